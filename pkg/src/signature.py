"""Signatures, strict tensor words, morphism terms and the type checker.

Objects are kept in strict monoidal normal form: a word of polarized base
objects, with the empty word standing for the unit I. Unitors and
associators are identities, and (A ⊗ B)* is identified with A* ⊗ B* in the
same order.
"""

import re
from functools import reduce
from typing import Annotated, Literal, Union

from loguru import logger
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from src.errors import (
    CompositionMismatch,
    DaggerUnavailable,
    NotAPermutation,
    TraceShapeMismatch,
    TypeMismatch,
    UnknownName,
)


class Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


class BaseObject(Frozen):
    name: str


class Factor(Frozen):
    base: str
    dual: bool = False

    def flip(self) -> "Factor":
        return Factor(base=self.base, dual=not self.dual)

    def __str__(self) -> str:
        return f"{self.base}*" if self.dual else self.base


class ObjectExpr(Frozen):
    factors: tuple[Factor, ...] = ()

    @classmethod
    def of(cls, *tokens: str) -> "ObjectExpr":
        """Build a word from tokens such as "A" or "B*"; "I" is skipped."""
        factors = []
        for token in tokens:
            token = token.strip()
            if token in ("", "I"):
                continue
            if token.endswith("*"):
                factors.append(Factor(base=token[:-1], dual=True))
            else:
                factors.append(Factor(base=token))
        return cls(factors=tuple(factors))

    @classmethod
    def parse(cls, text: str | list[str]) -> "ObjectExpr":
        """Read "A ⊗ B*" (or a token list) as used in model files."""
        if isinstance(text, list):
            return cls.of(*text)
        return cls.of(*re.split(r"[⊗,\s]+", text))

    def __add__(self, other: "ObjectExpr") -> "ObjectExpr":
        return ObjectExpr(factors=self.factors + other.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __getitem__(self, index: slice) -> "ObjectExpr":
        return ObjectExpr(factors=self.factors[index])

    @property
    def is_unit(self) -> bool:
        return not self.factors

    def dual(self) -> "ObjectExpr":
        return ObjectExpr(factors=tuple(f.flip() for f in self.factors))

    def bases(self) -> set[str]:
        return {f.base for f in self.factors}

    def dsl(self) -> str:
        """Render in the DSL's word syntax."""
        if not self.factors:
            return "I"
        return " * ".join(
            f"dual({f.base})" if f.dual else f.base for f in self.factors
        )

    def __str__(self) -> str:
        if not self.factors:
            return "I"
        return " ⊗ ".join(str(f) for f in self.factors)


UNIT = ObjectExpr()


def dual_object(a: ObjectExpr) -> ObjectExpr:
    """Pointwise polarity flip, order preserved; an involution."""
    return a.dual()


class Generator(Frozen):
    name: str
    dom: ObjectExpr
    cod: ObjectExpr


class Signature(Frozen):
    base_objects: tuple[BaseObject, ...] = ()
    generators: tuple[Generator, ...] = ()
    dagger_closed: bool = False

    @model_validator(mode="after")
    def _check_integrity(self) -> "Signature":
        names = [o.name for o in self.base_objects]
        if len(set(names)) != len(names):
            raise TypeMismatch(f"Duplicate base object in {names}")
        gen_names = [g.name for g in self.generators]
        if len(set(gen_names)) != len(gen_names):
            raise TypeMismatch(f"Duplicate generator in {gen_names}")
        known = set(names)
        for g in self.generators:
            unknown = (g.dom.bases() | g.cod.bases()) - known
            if unknown:
                raise UnknownName(min(unknown))
        return self

    @classmethod
    def build(
        cls,
        objects: list[str],
        generators: list[tuple[str, ObjectExpr, ObjectExpr]] = (),
        dagger_closed: bool = False,
    ) -> "Signature":
        return cls(
            base_objects=tuple(BaseObject(name=o) for o in objects),
            generators=tuple(
                Generator(name=n, dom=d, cod=c) for n, d, c in generators
            ),
            dagger_closed=dagger_closed,
        )

    def object_names(self) -> list[str]:
        return [o.name for o in self.base_objects]

    def generator(self, name: str) -> Generator:
        for g in self.generators:
            if g.name == name:
                return g
        raise UnknownName(name)

    def has_generator(self, name: str) -> bool:
        return any(g.name == name for g in self.generators)

    def extend(
        self,
        generators: list[Generator] = (),
        objects: list[str] = (),
        dagger_closed: bool | None = None,
    ) -> "Signature":
        """A copy with extra generators/objects; existing names are kept."""
        new_objects = tuple(
            BaseObject(name=o)
            for o in objects
            if o not in self.object_names()
        )
        new_gens = tuple(
            g for g in generators if not self.has_generator(g.name)
        )
        return Signature(
            base_objects=self.base_objects + new_objects,
            generators=self.generators + new_gens,
            dagger_closed=(
                self.dagger_closed if dagger_closed is None else dagger_closed
            ),
        )


# Terms


class Gen(Frozen):
    op: Literal["gen"] = "gen"
    generator: Generator


class Id(Frozen):
    op: Literal["id"] = "id"
    obj: ObjectExpr


class Compose(Frozen):
    op: Literal["compose"] = "compose"
    after: "Term"
    before: "Term"


class Tensor(Frozen):
    op: Literal["tensor"] = "tensor"
    left: "Term"
    right: "Term"


class Sym(Frozen):
    op: Literal["sym"] = "sym"
    a: ObjectExpr
    b: ObjectExpr


class Unit(Frozen):
    """η_a : I → a* ⊗ a"""

    op: Literal["unit"] = "unit"
    a: ObjectExpr


class Counit(Frozen):
    """ε_a : a ⊗ a* → I"""

    op: Literal["counit"] = "counit"
    a: ObjectExpr


class Dagger(Frozen):
    op: Literal["dagger"] = "dagger"
    term: "Term"


Term = Annotated[
    Union[Gen, Id, Compose, Tensor, Sym, Unit, Counit, Dagger],
    Field(discriminator="op"),
]

for _node in (Compose, Tensor, Dagger):
    _node.model_rebuild()


def children(t: Term) -> tuple[Term, ...]:
    """Subterms in path order: Compose (after, before), Tensor (left, right)."""
    if isinstance(t, Compose):
        return (t.after, t.before)
    if isinstance(t, Tensor):
        return (t.left, t.right)
    if isinstance(t, Dagger):
        return (t.term,)
    return ()


def subterm(t: Term, path: tuple[int, ...]) -> Term:
    for index in path:
        t = children(t)[index]
    return t


class TypedTerm(Frozen):
    term: Term
    dom: ObjectExpr
    cod: ObjectExpr

    def __str__(self) -> str:
        return f"{format_term(self.term)} : {self.dom} → {self.cod}"


def _check_word(word: ObjectExpr, sig: Signature, path: tuple[int, ...]):
    known = set(sig.object_names())
    for base in word.bases():
        if base not in known:
            raise UnknownName(base, path)


def _infer(
    t: Term, sig: Signature, path: tuple[int, ...]
) -> tuple[ObjectExpr, ObjectExpr]:
    if isinstance(t, Gen):
        if not sig.has_generator(t.generator.name):
            raise UnknownName(t.generator.name, path)
        declared = sig.generator(t.generator.name)
        if declared != t.generator:
            raise TypeMismatch(
                f"Generator '{declared.name}' is declared "
                f"{declared.dom} → {declared.cod} but used as "
                f"{t.generator.dom} → {t.generator.cod}"
            )
        return declared.dom, declared.cod
    if isinstance(t, Id):
        _check_word(t.obj, sig, path)
        return t.obj, t.obj
    if isinstance(t, Compose):
        after_dom, after_cod = _infer(t.after, sig, path + (0,))
        before_dom, before_cod = _infer(t.before, sig, path + (1,))
        if before_cod != after_dom:
            raise CompositionMismatch(
                expected=str(after_dom), found=str(before_cod), path=path
            )
        return before_dom, after_cod
    if isinstance(t, Tensor):
        left_dom, left_cod = _infer(t.left, sig, path + (0,))
        right_dom, right_cod = _infer(t.right, sig, path + (1,))
        return left_dom + right_dom, left_cod + right_cod
    if isinstance(t, Sym):
        _check_word(t.a, sig, path)
        _check_word(t.b, sig, path)
        return t.a + t.b, t.b + t.a
    if isinstance(t, Unit):
        _check_word(t.a, sig, path)
        return UNIT, t.a.dual() + t.a
    if isinstance(t, Counit):
        _check_word(t.a, sig, path)
        return t.a + t.a.dual(), UNIT
    if isinstance(t, Dagger):
        if not sig.dagger_closed:
            raise DaggerUnavailable(path)
        dom, cod = _infer(t.term, sig, path + (0,))
        return cod, dom
    raise TypeError(f"Not a term: {t!r}")


def typecheck(t: Term | TypedTerm, sig: Signature) -> TypedTerm:
    """Compute dom/cod structurally, raising on the first ill-typed node."""
    if isinstance(t, TypedTerm):
        t = t.term
    dom, cod = _infer(t, sig, ())
    logger.debug(f"Typechecked term as {dom} → {cod}")
    return TypedTerm(term=t, dom=dom, cod=cod)


# Builders. These assemble well-typed composites directly from typed parts.


def gen(g: Generator) -> TypedTerm:
    return TypedTerm(term=Gen(generator=g), dom=g.dom, cod=g.cod)


def ident(a: ObjectExpr) -> TypedTerm:
    return TypedTerm(term=Id(obj=a), dom=a, cod=a)


def sym(a: ObjectExpr, b: ObjectExpr) -> TypedTerm:
    return TypedTerm(term=Sym(a=a, b=b), dom=a + b, cod=b + a)


def unit(a: ObjectExpr) -> TypedTerm:
    return TypedTerm(term=Unit(a=a), dom=UNIT, cod=a.dual() + a)


def counit(a: ObjectExpr) -> TypedTerm:
    return TypedTerm(term=Counit(a=a), dom=a + a.dual(), cod=UNIT)


def dagger(t: TypedTerm) -> TypedTerm:
    return TypedTerm(term=Dagger(term=t.term), dom=t.cod, cod=t.dom)


def then(*steps: TypedTerm) -> TypedTerm:
    """Diagrammatic composition: first steps[0], then steps[1], ..."""

    def _step(before: TypedTerm, after: TypedTerm) -> TypedTerm:
        if before.cod != after.dom:
            raise CompositionMismatch(
                expected=str(after.dom), found=str(before.cod)
            )
        return TypedTerm(
            term=Compose(after=after.term, before=before.term),
            dom=before.dom,
            cod=after.cod,
        )

    return reduce(_step, steps)


def compose(after: TypedTerm, before: TypedTerm) -> TypedTerm:
    return then(before, after)


def tensor(*parts: TypedTerm) -> TypedTerm:
    if not parts:
        return ident(UNIT)

    def _pair(left: TypedTerm, right: TypedTerm) -> TypedTerm:
        return TypedTerm(
            term=Tensor(left=left.term, right=right.term),
            dom=left.dom + right.dom,
            cod=left.cod + right.cod,
        )

    return reduce(_pair, parts)


# Derived constructions


def name_of(f: TypedTerm) -> TypedTerm:
    """⌜f⌝ = (1_{A*} ⊗ f) ∘ η_A : I → A* ⊗ B"""
    return then(unit(f.dom), tensor(ident(f.dom.dual()), f))


def coname_of(f: TypedTerm) -> TypedTerm:
    """⌞f⌟ = ε_B ∘ (f ⊗ 1_{B*}) : A ⊗ B* → I"""
    return then(tensor(f, ident(f.cod.dual())), counit(f.cod))


def dual_of(f: TypedTerm) -> TypedTerm:
    """f* : B* → A*, bending both ends of f."""
    a, b = f.dom, f.cod
    return then(
        tensor(unit(a), ident(b.dual())),
        tensor(ident(a.dual()), f, ident(b.dual())),
        tensor(ident(a.dual()), counit(b)),
    )


def trace_term(f: TypedTerm, traced: ObjectExpr | None = None) -> TypedTerm:
    """Partial trace over the trailing word U of f : A ⊗ U → B ⊗ U.

    With ``traced`` omitted the whole domain is traced (total trace), which
    needs f to be an endomorphism.
    """
    u = f.dom if traced is None else traced
    n = len(u)
    if len(f.dom) < n or len(f.cod) < n:
        raise TraceShapeMismatch(
            f"Cannot trace {u} out of {f.dom} → {f.cod}"
        )
    if f.dom[len(f.dom) - n :] != u or f.cod[len(f.cod) - n :] != u:
        raise TraceShapeMismatch(
            f"Trailing words of {f.dom} → {f.cod} are not both {u}"
        )
    a = f.dom[: len(f.dom) - n]
    b = f.cod[: len(f.cod) - n]
    return then(
        tensor(ident(a), unit(u)),
        tensor(ident(a), sym(u.dual(), u)),
        tensor(f, ident(u.dual())),
        tensor(ident(b), counit(u)),
    )


def scalar_term_action(s: TypedTerm, f: TypedTerm) -> TypedTerm:
    """s • f, which under strict unitors is s ⊗ f."""
    if not (s.dom.is_unit and s.cod.is_unit):
        raise TypeMismatch(f"{s} is not a scalar")
    return tensor(s, f)


def counit_from_unit(a: ObjectExpr) -> TypedTerm:
    """ε_A = η_A† ∘ σ_{A,A*}"""
    return then(sym(a, a.dual()), dagger(unit(a)))


def unit_from_counit(a: ObjectExpr) -> TypedTerm:
    """η_A = σ_{A,A*} ∘ ε_A†"""
    return then(dagger(counit(a)), sym(a, a.dual()))


# Permutations


class Permutation(Frozen):
    """One-line notation: images[i - 1] is π(i)."""

    images: tuple[int, ...]

    @field_validator("images")
    @classmethod
    def _is_bijection(cls, images: tuple[int, ...]) -> tuple[int, ...]:
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"{images} is not a permutation")
        return images

    @classmethod
    def of(cls, *images: int) -> "Permutation":
        if sorted(images) != list(range(1, len(images) + 1)):
            raise NotAPermutation(f"{list(images)} is not a permutation")
        return cls(images=tuple(images))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(images=tuple(range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """(self ∘ other)(i) = self(other(i))"""
        if len(self) != len(other):
            raise NotAPermutation("Cannot compose permutations of sizes "
                                  f"{len(self)} and {len(other)}")
        return Permutation(images=tuple(self(other(i)) for i in
                                        range(1, len(self) + 1)))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self)
        for i, image in enumerate(self.images, start=1):
            inv[image - 1] = i
        return Permutation(images=tuple(inv))

    def __str__(self) -> str:
        return "(" + " ".join(str(i) for i in self.images) + ")"


def perm_term(p: Permutation, factors: list[ObjectExpr]) -> TypedTerm:
    """Adjacent swaps moving factor i to position π(i).

    perm_term(p ∘ q) equals perm_term(p) ∘ perm_term(q).
    """
    if len(p) != len(factors):
        raise NotAPermutation(
            f"Permutation {p} has size {len(p)} but there are "
            f"{len(factors)} factors"
        )
    target = [p(i + 1) - 1 for i in range(len(factors))]
    order = list(range(len(factors)))
    steps: list[TypedTerm] = []
    swapped = True
    while swapped:
        swapped = False
        for j in range(len(order) - 1):
            if target[order[j]] > target[order[j + 1]]:
                steps.append(
                    tensor(
                        *[ident(factors[k]) for k in order[:j]],
                        sym(factors[order[j]], factors[order[j + 1]]),
                        *[ident(factors[k]) for k in order[j + 2 :]],
                    )
                )
                order[j], order[j + 1] = order[j + 1], order[j]
                swapped = True
    if not steps:
        return ident(reduce(ObjectExpr.__add__, factors, UNIT))
    return then(*steps)


# Pretty printing


def format_term(t: Term | TypedTerm, order: str = "diagrammatic") -> str:
    """Render a term; ``order`` is "diagrammatic" (;) or "applicative" (.)."""
    if isinstance(t, TypedTerm):
        t = t.term
    if isinstance(t, Gen):
        return t.generator.name
    if isinstance(t, Id):
        return f"id[{t.obj.dsl()}]"
    if isinstance(t, Sym):
        return f"sym[{t.a.dsl()}, {t.b.dsl()}]"
    if isinstance(t, Unit):
        return f"eta[{t.a.dsl()}]"
    if isinstance(t, Counit):
        return f"eps[{t.a.dsl()}]"
    if isinstance(t, Dagger):
        return f"dagger({format_term(t.term, order)})"
    if isinstance(t, Tensor):
        return f"({format_term(t.left, order)} * {format_term(t.right, order)})"
    if isinstance(t, Compose):
        after = format_term(t.after, order)
        before = format_term(t.before, order)
        if order == "applicative":
            return f"({after} . {before})"
        return f"({before} ; {after})"
    raise TypeError(f"Not a term: {t!r}")
