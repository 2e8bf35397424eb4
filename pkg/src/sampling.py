"""Seeded random terms and matrices for the sampled checks."""

import random

from src.matrix import Matrix
from src.scalars import ScalarAlgebra
from src.signature import (
    Generator,
    ObjectExpr,
    Signature,
    TypedTerm,
    coname_of,
    counit,
    dagger,
    gen,
    ident,
    name_of,
    sym,
    tensor,
    then,
    trace_term,
    unit,
)


def random_matrix(
    algebra: ScalarAlgebra, rows: int, cols: int, rng: random.Random
) -> Matrix:
    return Matrix.of(
        algebra, rows, cols, [algebra.sample(rng) for _ in range(rows * cols)]
    )


def _cycles(sig: Signature) -> list[tuple[Generator, Generator | None]]:
    """Generator pairs g : A → B, h : B → A (h None when g is an endo)."""
    pairs: list[tuple[Generator, Generator | None]] = []
    for g in sig.generators:
        if g.dom == g.cod:
            pairs.append((g, None))
        for h in sig.generators:
            if h.dom == g.cod and h.cod == g.dom:
                pairs.append((g, h))
    return pairs


def _closed_scalar(sig: Signature, rng: random.Random) -> TypedTerm:
    base = ObjectExpr.of(rng.choice(sig.object_names()))
    cycles = _cycles(sig)
    choice = rng.randrange(3)
    if not cycles or choice == 0:
        return trace_term(ident(base))
    g, h = rng.choice(cycles)
    if h is None:
        return trace_term(gen(g))
    if choice == 1:
        return trace_term(then(gen(g), gen(h)))
    # ⌜g⌝ : I → A* ⊗ B bent round into ⌞h⌟ : B ⊗ A* → I
    return then(name_of(gen(g)), sym(g.dom.dual(), g.cod), coname_of(gen(h)))


def random_scalar_term(
    sig: Signature, rng: random.Random, depth: int = 2
) -> TypedTerm:
    """A random closed term I → I built from the signature's generators."""
    if depth == 0 or rng.random() < 0.4:
        return _closed_scalar(sig, rng)
    left = random_scalar_term(sig, rng, depth - 1)
    right = random_scalar_term(sig, rng, depth - 1)
    if rng.random() < 0.5:
        return then(left, right)
    return tensor(left, right)


def _layer(
    sig: Signature, dom: ObjectExpr, rng: random.Random
) -> TypedTerm:
    """One slice of a random term: a tensor of pieces covering ``dom``."""
    pieces: list[TypedTerm] = []
    i = 0
    factors = dom.factors
    while i <= len(factors):
        roll = rng.random()
        if roll < 0.15:
            pieces.append(unit(ObjectExpr.of(rng.choice(sig.object_names()))))
            if i == len(factors):
                break
            continue
        if i == len(factors):
            break
        here = dom[i:]
        fitting = [
            g for g in sig.generators
            if len(g.dom) and here[: len(g.dom)] == g.dom
        ]
        if sig.dagger_closed:
            fitting += [
                g for g in sig.generators
                if len(g.cod) and here[: len(g.cod)] == g.cod
                and g.dom != g.cod
            ]
        if fitting and roll < 0.5:
            g = rng.choice(fitting)
            if here[: len(g.dom)] == g.dom and len(g.dom):
                pieces.append(gen(g))
                i += len(g.dom)
            else:
                pieces.append(dagger(gen(g)))
                i += len(g.cod)
            continue
        if len(here) >= 2 and roll < 0.65:
            pieces.append(sym(here[:1], here[1:2]))
            i += 2
            continue
        if len(here) >= 2 and here[1:2] == here[:1].dual() and roll < 0.8:
            pieces.append(counit(here[:1]))
            i += 2
            continue
        pieces.append(ident(here[:1]))
        i += 1
    if not pieces:
        return ident(dom)
    return tensor(*pieces)


def random_term(
    sig: Signature,
    rng: random.Random,
    dom: ObjectExpr | None = None,
    depth: int = 3,
) -> TypedTerm:
    """A random well-typed term, built as a stack of random layers."""
    if dom is None:
        names = sig.object_names()
        dom = ObjectExpr.of(*rng.choices(names, k=rng.randint(0, 2)))
    steps = [ident(dom)]
    for _ in range(rng.randint(1, depth)):
        steps.append(_layer(sig, steps[-1].cod, rng))
    return then(*steps)
