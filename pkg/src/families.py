"""Candidate natural families (diagonals, deletions, projections) and the
morphisms their naturality is tested against."""

import random
from collections.abc import Iterator
from itertools import product as cartesian
from typing import NamedTuple

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from src.errors import DimensionMismatch, KindMismatch
from src.matrix import Matrix
from src.models import Model, evaluate, symmetry_matrix
from src.params import FamilyKind, FamilySpec
from src.sampling import random_term
from src.signature import UNIT, ObjectExpr, Signature, format_term

RANDOM_DIM_LIMIT = 8


class NaturalFamily(BaseModel):
    """Components of a family at base objects, keyed by word text.

    Projection families store discard maps d_A : A → I and read
    p_{A,B} = 1_A ⊗ d_B (left) or q_{A,B} = d_A ⊗ 1_B (right).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    kind: FamilyKind
    components: dict[str, Matrix] = Field(default_factory=dict)

    def _stored(self, m: Model, word: ObjectExpr) -> Matrix | None:
        key = str(word)
        if key in self.components:
            return self.components[key]
        if len(word) == 1 and word.factors[0].dual:
            return self.components.get(str(word.dual()))
        if word.is_unit:
            return Matrix.scalar(m.algebra, m.algebra.one)
        return None

    def structural(self, m: Model, word: ObjectExpr) -> Matrix:
        """The component at a composite word built from its first factor
        and the rest through the monoidal structure maps."""
        head, rest = word[:1], word[1:]
        if self.kind == "diagonal":
            middle = (
                m.identity(head)
                .kron(symmetry_matrix(m, head, rest))
                .kron(m.identity(rest))
            )
            return middle @ self.component(m, head).kron(
                self.component(m, rest)
            )
        return self.discard(m, head).kron(self.discard(m, rest))

    def component(self, m: Model, word: ObjectExpr) -> Matrix:
        if self.kind not in ("diagonal", "deleting"):
            raise KindMismatch(
                f"Family '{self.name}' is a {self.kind}; use projection()"
            )
        stored = self._stored(m, word)
        if stored is not None:
            return stored
        if len(word) == 1:
            raise KeyError(f"Family '{self.name}' has no component at {word}")
        return self.structural(m, word)

    def discard(self, m: Model, word: ObjectExpr) -> Matrix:
        """d_word : word → I (the deleting component, or the discard map a
        projection family is built from)."""
        if self.kind == "diagonal":
            raise KindMismatch(f"Family '{self.name}' is a diagonal")
        stored = self._stored(m, word)
        if stored is not None:
            return stored
        if len(word) == 1:
            raise KeyError(f"Family '{self.name}' has no component at {word}")
        return self.structural(m, word)

    def projection(self, m: Model, a: ObjectExpr, b: ObjectExpr) -> Matrix:
        if self.kind == "left_projection":
            return m.identity(a).kron(self.discard(m, b))
        if self.kind == "right_projection":
            return self.discard(m, a).kron(m.identity(b))
        raise KindMismatch(f"Family '{self.name}' is not a projection")

    def naturality_legs(
        self,
        m: Model,
        f: Matrix,
        a: ObjectExpr,
        b: ObjectExpr,
        context: ObjectExpr | None = None,
    ) -> list[tuple[str, Matrix, Matrix]]:
        """Both legs of each naturality square at f : a → b."""
        if self.kind == "diagonal":
            return [(
                "Δ ∘ f = (f ⊗ f) ∘ Δ",
                self.component(m, b) @ f,
                f.kron(f) @ self.component(m, a),
            )]
        if self.kind == "deleting":
            return [(
                "d ∘ f = d",
                self.discard(m, b) @ f,
                self.discard(m, a),
            )]
        c = context if context is not None else UNIT
        one_c = m.identity(c)
        if self.kind == "left_projection":
            # natural in the kept and in the discarded factor
            return [
                (
                    "p ∘ (f ⊗ 1) = f ∘ p",
                    self.projection(m, b, c) @ f.kron(one_c),
                    f @ self.projection(m, a, c),
                ),
                (
                    "p ∘ (1 ⊗ f) = p",
                    self.projection(m, c, b) @ one_c.kron(f),
                    self.projection(m, c, a),
                ),
            ]
        return [
            (
                "q ∘ (1 ⊗ f) = f ∘ q",
                self.projection(m, c, b) @ one_c.kron(f),
                f @ self.projection(m, c, a),
            ),
            (
                "q ∘ (f ⊗ 1) = q",
                self.projection(m, b, c) @ f.kron(one_c),
                self.projection(m, a, c),
            ),
        ]


def family_from_spec(name: str, spec: FamilySpec, m: Model) -> NaturalFamily:
    """Parse a family from the model file, checking component shapes."""
    components = {}
    for key, entries in spec.components.items():
        word = ObjectExpr.parse(key)
        n = m.dim(word)
        rows, cols = (n * n, n) if spec.kind == "diagonal" else (1, n)
        try:
            matrix = Matrix.parse(m.algebra, rows, cols, entries)
        except DimensionMismatch as err:
            raise DimensionMismatch(
                f"Family '{name}' at {word}: {err.message}"
            ) from err
        components[str(word)] = matrix
    logger.debug(f"Loaded {spec.kind} family '{name}'")
    return NaturalFamily(name=name, kind=spec.kind, components=components)


# Candidate morphisms


class Candidate(NamedTuple):
    description: str
    matrix: Matrix
    dom: ObjectExpr
    cod: ObjectExpr


def _is_function(f: Matrix) -> bool:
    return all(
        sum(bool(f[i, j]) for i in range(f.rows)) == 1
        for j in range(f.cols)
    )


def _basis_state(m: Model, a: ObjectExpr, k: int) -> Matrix:
    n = m.dim(a)
    alg = m.algebra
    return Matrix.of(alg, n, 1, [alg.one if i == k else alg.zero
                                 for i in range(n)])


def _states(m: Model, a: ObjectExpr) -> Iterator[Candidate]:
    n = m.dim(a)
    for k in range(n):
        yield Candidate(f"basis state e_{k} of {a}",
                        _basis_state(m, a, k), UNIT, a)
    if not m.algebra.additive:
        return
    alg = m.algebra
    yield Candidate(f"zero state of {a}",
                    Matrix.of(alg, n, 1, [alg.zero] * n), UNIT, a)
    if n > 1:
        yield Candidate(f"sum of basis states of {a}",
                        Matrix.of(alg, n, 1, [alg.one] * n), UNIT, a)


def _generators(m: Model) -> Iterator[Candidate]:
    gens = list(m.signature.generators)
    for g in gens:
        if g.name in m.generators:
            yield Candidate(f"generator {g.name}", m.generators[g.name],
                            g.dom, g.cod)
    for f, g in cartesian(gens, repeat=2):
        if f.cod == g.dom and f.name in m.generators \
                and g.name in m.generators:
            yield Candidate(
                f"composite {f.name};{g.name}",
                m.generators[g.name] @ m.generators[f.name],
                f.dom, g.cod,
            )


def _exhaustive(m: Model, limit: int = 9) -> Iterator[Candidate]:
    """Every matrix a → b over a finite algebra, for small shapes."""
    elements = m.algebra.elements()
    if elements is None:
        return
    words = m.base_words()
    for a, b in cartesian(words, repeat=2):
        size = m.dim(a) * m.dim(b)
        if size > limit:
            continue
        for k, entries in enumerate(cartesian(elements, repeat=size)):
            yield Candidate(
                f"morphism #{k} {a} → {b}",
                Matrix.of(m.algebra, m.dim(b), m.dim(a), list(entries)),
                a, b,
            )


def _random_states(m: Model, rng: random.Random) -> Iterator[Candidate]:
    words = m.base_words()
    k = 0
    while True:
        a = rng.choice(words)
        n = m.dim(a)
        entries = [m.algebra.sample(rng) for _ in range(n)]
        yield Candidate(f"random state #{k} of {a}",
                        Matrix.of(m.algebra, n, 1, entries), UNIT, a)
        k += 1


def _random_terms(m: Model, rng: random.Random) -> Iterator[Candidate]:
    """Evaluated random terms out of a base object, built from the bound
    generators with symmetries and cups."""
    sig = Signature.build(list(m.dims)).extend(
        generators=[g for g in m.signature.generators
                    if g.name in m.generators]
    )
    words = m.base_words()
    k = 0
    while True:
        t = random_term(sig, rng, dom=rng.choice(words), depth=2)
        if m.dim(t.cod) > RANDOM_DIM_LIMIT:
            continue
        yield Candidate(f"random morphism #{k} {format_term(t)}",
                        evaluate(t, m), t.dom, t.cod)
        k += 1


def _random_tail(m: Model, rng: random.Random) -> Iterator[Candidate]:
    terms, states = _random_terms(m, rng), _random_states(m, rng)
    while True:
        yield next(terms)
        yield next(states)


def candidate_morphisms(
    m: Model, seed: int = 0
) -> Iterator[Candidate]:
    """Basis, zero and all-ones states, then generators and their
    composites, then every small morphism over a finite algebra, then
    random terms over the generators alternating with random states.
    Finite-set models only see functions."""
    rng = random.Random(seed)

    def stream() -> Iterator[Candidate]:
        for a in m.base_words():
            yield from _states(m, a)
        yield from _generators(m)
        yield from _exhaustive(m)
        if m.algebra.additive and m.kind != "finset":
            yield from _random_tail(m, rng)

    for candidate in stream():
        if m.kind == "finset" and not _is_function(candidate.matrix):
            continue
        yield candidate
