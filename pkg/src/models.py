"""Matrix semantics of terms: the Rel, FdVec, finite-set and semilattice
models, the scalar action, the trace and the dagger-compact checks.

Conventions: a word's basis is the product basis with the left factor
major, so (i, j) ↦ i·dim_right + j. dim(A*) = dim(A) and the dual basis
is identified with the basis itself.
"""

import random
from itertools import product as cartesian
from math import prod
from typing import Any

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from src.diagram import equal_diagrams, to_diagram
from src.errors import (
    ConjUnavailable,
    DimensionMismatch,
    KindMismatch,
    NotASemilattice,
    ShapeMismatch,
    UnboundGenerator,
    UnknownName,
)
from src.matrix import Matrix
from src.params import ModelKind, ModelParams
from src.reports import CheckReport, Witness
from src.sampling import random_matrix, random_scalar_term
from src.scalars import ScalarAlgebra, algebra_for
from src.signature import (
    Compose,
    Counit,
    Dagger,
    Factor,
    Gen,
    Generator,
    Id,
    ObjectExpr,
    Signature,
    Sym,
    Tensor,
    Term,
    TypedTerm,
    Unit,
    counit,
    counit_from_unit,
    dagger,
    gen,
    ident,
    sym,
    tensor,
    then,
    unit,
    unit_from_counit,
)
from src.validator import validate_model

_STAGE_ERRORS = {
    "scalars": KindMismatch,
    "dimensions": DimensionMismatch,
    "semilattice": NotASemilattice,
    "generators": DimensionMismatch,
    "kind": KindMismatch,
}


class Model(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: ModelKind
    algebra: ScalarAlgebra
    dims: dict[str, int]
    generators: dict[str, Matrix] = Field(default_factory=dict)
    signature: Signature
    units: dict[str, Matrix] = Field(default_factory=dict)
    counits: dict[str, Matrix] = Field(default_factory=dict)

    def dim(self, word: ObjectExpr) -> int:
        return prod(self.dims[f.base] for f in word.factors)

    def base_words(self) -> list[ObjectExpr]:
        return [ObjectExpr.of(name) for name in self.dims]

    @property
    def has_dagger(self) -> bool:
        return self.kind in ("rel", "fdvec") and self.algebra.has_conj

    def extended(
        self, generators: dict[str, tuple[ObjectExpr, ObjectExpr, Matrix]]
    ) -> "Model":
        """A copy with extra generators bound to the given matrices."""
        new = [Generator(name=n, dom=d, cod=c)
               for n, (d, c, _) in generators.items()]
        matrices = dict(self.generators)
        for name, (d, c, m) in generators.items():
            _check_shape(name, m, self.dim(c), self.dim(d))
            matrices[name] = m
        return self.model_copy(
            update={
                "generators": matrices,
                "signature": self.signature.extend(generators=new),
            }
        )

    def identity(self, word: ObjectExpr) -> Matrix:
        return Matrix.identity(self.algebra, self.dim(word))


def _check_shape(name: str, m: Matrix, rows: int, cols: int) -> None:
    if m.shape != (rows, cols):
        raise DimensionMismatch(
            f"Generator '{name}' should be {rows}×{cols}, "
            f"got {m.rows}×{m.cols}"
        )


def build_model(
    kind: ModelKind,
    params: ModelParams | dict,
    signature: Signature | None = None,
) -> Model:
    """Validate parameters and assemble a model of the given kind."""
    if isinstance(params, dict):
        params = ModelParams.model_validate({**params, "kind": kind})
    if params.kind != kind:
        raise KindMismatch(f"Parameters describe a {params.kind} model")
    verdict = validate_model(params, signature)
    if not verdict.is_valid:
        logger.error(f"Model rejected at stage {verdict.stage}")
        raise _STAGE_ERRORS[verdict.stage](verdict.error_message)

    algebra = algebra_for(
        params.scalars, params.tolerance, params.meet_table
    )
    dims = dict(params.objects)
    generators, declared = {}, []
    for name in params.generators:
        dom, cod = params.generator_words(name, signature)
        declared.append(Generator(name=name, dom=dom, cod=cod))
        generators[name] = Matrix.parse(
            algebra,
            params.dim(cod),
            params.dim(dom),
            params.generator_entries(name),
        )
    if signature is None:
        signature = Signature(generators=())
    names = {g.name for g in declared}
    for g in signature.generators:
        if g.name in names and g not in declared:
            raise KindMismatch(
                f"Generator '{g.name}' has a different type in the model"
            )
    # generators over objects the model does not interpret stay unbound
    carried = [
        g for g in signature.generators
        if g.name not in names
        and (g.dom.bases() | g.cod.bases()) <= set(dims)
    ]
    sig = Signature.build(list(dims)).extend(
        generators=declared + carried,
        dagger_closed=signature.dagger_closed,
    )

    def vectors(raw: dict[str, list[Any]], transpose: bool) -> dict:
        out = {}
        for base, entries in raw.items():
            if base not in dims:
                raise UnknownName(base)
            n = dims[base] ** 2
            rows, cols = (1, n) if transpose else (n, 1)
            out[base] = Matrix.parse(algebra, rows, cols, entries)
        return out

    logger.info(f"Built {kind} model over {algebra.name} scalars")
    return Model(
        kind=kind,
        algebra=algebra,
        dims=dims,
        generators=generators,
        signature=sig,
        units=vectors(params.units, transpose=False),
        counits=vectors(params.counits, transpose=True),
    )


# Evaluation


def _digits(index: int, dims: list[int]) -> list[int]:
    out = []
    for d in reversed(dims):
        out.append(index % d)
        index //= d
    return out[::-1]


def _pairing(
    m: Model,
    factor: Factor,
    overrides: dict[str, Matrix],
    major: int,
    minor: int,
) -> Any:
    """Entry of the single-factor cup or cap at (major, minor)."""
    d = m.dims[factor.base]
    if factor.dual:
        major, minor = minor, major
    if factor.base in overrides:
        return overrides[factor.base].entries[major * d + minor]
    return m.algebra.one if major == minor else m.algebra.zero


def _cup_cap(
    m: Model, word: ObjectExpr, overrides: dict[str, Matrix], cap: bool
) -> Matrix:
    """η_a as a column over a* ⊗ a, or ε_a as a row over a ⊗ a*.

    The word's cup is the product of its factors' cups, regrouped so all
    dual factors come first.
    """
    dims = [m.dims[f.base] for f in word.factors]
    size = prod(dims)
    entries = []
    for first in range(size):
        majors = _digits(first, dims)
        for second in range(size):
            value = m.algebra.one
            for f, i, j in zip(word.factors, majors, _digits(second, dims)):
                value = m.algebra.mul(value, _pairing(m, f, overrides, i, j))
            entries.append(value)
    n = size * size
    if cap:
        return Matrix.of(m.algebra, 1, n, entries)
    return Matrix.of(m.algebra, n, 1, entries)


def symmetry_matrix(m: Model, a: ObjectExpr, b: ObjectExpr) -> Matrix:
    da, db = m.dim(a), m.dim(b)
    images = [k * da + i for i in range(da) for k in range(db)]
    return Matrix.permutation(m.algebra, images)


def _eval(t: Term, m: Model) -> Matrix:
    if isinstance(t, Gen):
        name = t.generator.name
        if name not in m.generators:
            raise UnboundGenerator(name)
        return m.generators[name]
    if isinstance(t, Id):
        return m.identity(t.obj)
    if isinstance(t, Compose):
        return _eval(t.after, m) @ _eval(t.before, m)
    if isinstance(t, Tensor):
        return _eval(t.left, m).kron(_eval(t.right, m))
    if isinstance(t, Sym):
        return symmetry_matrix(m, t.a, t.b)
    if isinstance(t, Unit):
        return _cup_cap(m, t.a, m.units, cap=False)
    if isinstance(t, Counit):
        return _cup_cap(m, t.a, m.counits, cap=True)
    if isinstance(t, Dagger):
        if not m.has_dagger:
            raise ConjUnavailable(
                f"A {m.kind} model over {m.algebra.name} scalars has no "
                "dagger"
            )
        return _eval(t.term, m).dagger()
    raise TypeError(f"Not a term: {t!r}")


def evaluate(t: TypedTerm | Term, m: Model) -> Matrix:
    """Functorial evaluation; the result is dim(cod) × dim(dom)."""
    term = t.term if isinstance(t, TypedTerm) else t
    return _eval(term, m)


class EvalReport(BaseModel):
    matrix: Matrix
    ledger: dict[str, int] = Field(default_factory=dict)
    loop_scalar: str


def evaluate_with_report(t: TypedTerm, m: Model) -> EvalReport:
    """Evaluate and record the free loops the term's diagram carries."""
    logger.info(f"Evaluating term in the {m.kind} model")
    matrix = evaluate(t, m)
    ledger = {
        base: n for base, n in to_diagram(t).loop_counts().items() if base
    }
    scalar = m.algebra.one
    for base, n in sorted(ledger.items()):
        loop = model_trace(m.identity(ObjectExpr.of(base))).value()
        for _ in range(n):
            scalar = m.algebra.mul(scalar, loop)
    return EvalReport(
        matrix=matrix,
        ledger=ledger,
        loop_scalar=m.algebra.render(scalar),
    )


def scalar_action(s: Matrix, f: Matrix) -> Matrix:
    """s • f: entrywise multiplication by a 1×1 scalar."""
    if s.shape != (1, 1):
        raise ShapeMismatch(f"{s.rows}×{s.cols} is not a scalar")
    return f.scale(s.value())


def model_trace(f: Matrix) -> Matrix:
    return Matrix.scalar(f.algebra, f.trace())


# Checks


def dagger_compact_check(m: Model) -> CheckReport:
    """ε_A = η_A† ∘ σ, σ unitary, and the dagger functor laws."""
    if not m.has_dagger:
        raise ConjUnavailable(
            f"A {m.kind} model over {m.algebra.name} scalars has no dagger"
        )
    report = CheckReport(title="dagger compactness")
    words = m.base_words()
    logger.info("Comparing each counit with the dagger of its unit")
    for a in words:
        report.compare(
            f"counit definable {a}",
            evaluate(counit(a), m),
            evaluate(counit_from_unit(a), m),
            f"ε_{a} differs from η_{a}† ∘ σ",
        )
        report.compare(
            f"unit definable {a}",
            evaluate(unit(a), m),
            evaluate(unit_from_counit(a), m),
            f"η_{a} differs from σ ∘ ε_{a}†",
        )
        report.compare(
            f"dagger of identity {a}",
            evaluate(dagger(ident(a)), m),
            m.identity(a),
            f"1_{a}† is not 1_{a}",
        )
    logger.info("Checking symmetries are unitary")
    for a, b in cartesian(words, repeat=2):
        s = evaluate(sym(a, b), m)
        report.record(
            f"symmetry unitary {a},{b}",
            s.is_unitary(),
            witness=None
            if s.is_unitary()
            else Witness(description=f"σ_{a},{b} is not unitary",
                         morphism=s),
        )
    logger.info("Checking dagger functor laws on generators")
    gens = list(m.signature.generators)
    for g in gens:
        report.compare(
            f"dagger involutive {g.name}",
            evaluate(dagger(dagger(gen(g))), m),
            evaluate(gen(g), m),
            f"{g.name}†† differs from {g.name}",
        )
    for f, g in cartesian(gens, repeat=2):
        if f.cod == g.dom:
            report.compare(
                f"dagger reverses {f.name};{g.name}",
                evaluate(dagger(then(gen(f), gen(g))), m),
                evaluate(then(dagger(gen(g)), dagger(gen(f))), m),
                f"({g.name} ∘ {f.name})† differs from "
                f"{f.name}† ∘ {g.name}†",
            )
        report.compare(
            f"dagger monoidal {f.name}*{g.name}",
            evaluate(dagger(tensor(gen(f), gen(g))), m),
            evaluate(tensor(dagger(gen(f)), dagger(gen(g))), m),
            f"({f.name} ⊗ {g.name})† differs from {f.name}† ⊗ {g.name}†",
        )
    return report


def scalar_commutativity_check(
    m: Model, samples: int = 200, seed: int = 0
) -> CheckReport:
    """Scalars commute, as terms (by diagram) and as evaluated matrices."""
    rng = random.Random(seed)
    report = CheckReport(title="scalar commutativity")
    logger.info(f"Sampling {samples} pairs of scalar terms")
    diagram_fail = term_fail = element_fail = None
    for _ in range(samples):
        s = random_scalar_term(m.signature, rng)
        t = random_scalar_term(m.signature, rng)
        if diagram_fail is None and not equal_diagrams(then(s, t),
                                                       then(t, s)):
            diagram_fail = Witness(
                description="s ; t and t ; s are different diagrams",
                terms=(str(s), str(t)),
            )
        st, ts = evaluate(then(s, t), m), evaluate(then(t, s), m)
        if term_fail is None and not st.equals(ts):
            term_fail = Witness(
                description="s ∘ t differs from t ∘ s",
                lhs=st, rhs=ts, terms=(str(s), str(t)),
            )
        a = Matrix.scalar(m.algebra, m.algebra.sample(rng))
        b = Matrix.scalar(m.algebra, m.algebra.sample(rng))
        if element_fail is None and not (a @ b).equals(b @ a):
            element_fail = Witness(
                description="s·t differs from t·s", lhs=a @ b, rhs=b @ a
            )
    report.record("scalar diagrams commute", diagram_fail is None,
                  witness=diagram_fail)
    report.record("scalar terms commute", term_fail is None,
                  witness=term_fail)
    report.record("scalar elements commute", element_fail is None,
                  witness=element_fail)
    return report


def _random_shape(m: Model, rng: random.Random) -> int:
    return 1 if not m.algebra.additive else rng.randint(1, 3)


def scalar_action_laws_check(
    m: Model, samples: int = 100, seed: int = 0
) -> CheckReport:
    """The scalar action laws and the naturality of s • 1."""
    rng = random.Random(seed)
    alg = m.algebra
    report = CheckReport(title="scalar action laws")
    first_failure: dict[str, Witness] = {}

    def check(name: str, lhs: Matrix, rhs: Matrix, morphism: Matrix):
        if name not in first_failure and not lhs.equals(rhs):
            first_failure[name] = Witness(
                description=f"{name} fails", morphism=morphism,
                lhs=lhs, rhs=rhs,
            )

    logger.info(f"Checking scalar action laws on {samples} samples")
    one = Matrix.scalar(alg, alg.one)
    for _ in range(samples):
        s = Matrix.scalar(alg, alg.sample(rng))
        t = Matrix.scalar(alg, alg.sample(rng))
        n, k, j = (_random_shape(m, rng) for _ in range(3))
        f = random_matrix(alg, n, k, rng)
        g = random_matrix(alg, k, j, rng)
        h = random_matrix(alg, j, n, rng)
        st = s @ t
        check("identity action", scalar_action(one, f), f, f)
        check(
            "iterated action",
            scalar_action(s, scalar_action(t, f)),
            scalar_action(st, f),
            f,
        )
        check(
            "composition",
            scalar_action(s, f) @ scalar_action(t, g),
            scalar_action(st, f @ g),
            f,
        )
        check(
            "tensor",
            scalar_action(s, f).kron(scalar_action(t, h)),
            scalar_action(st, f.kron(h)),
            f,
        )
        ident_n = Matrix.identity(alg, n)
        ident_k = Matrix.identity(alg, k)
        check(
            "naturality",
            f @ scalar_action(s, ident_k),
            scalar_action(s, ident_n) @ f,
            f,
        )
    for name in ("identity action", "iterated action", "composition",
                 "tensor", "naturality"):
        report.record(name, name not in first_failure,
                      witness=first_failure.get(name))
    return report


def _shape_grid(m: Model) -> list[tuple[int, int]]:
    if not m.algebra.additive:
        return [(1, 1)]
    return list(cartesian(range(1, 4), repeat=2))


def trace_cyclicity_check(
    m: Model, samples: int = 100, seed: int = 0
) -> CheckReport:
    """Tr(g·f) = Tr(f·g) on random pairs, cycling through every shape
    f : k → n with n, k in 1..3."""
    rng = random.Random(seed)
    report = CheckReport(title="trace")
    witness = None
    grid = _shape_grid(m)
    logger.info(f"Checking trace cyclicity on {samples} pairs")
    for trial in range(samples):
        n, k = grid[trial % len(grid)]
        f = random_matrix(m.algebra, n, k, rng)
        g = random_matrix(m.algebra, k, n, rng)
        lhs, rhs = model_trace(g @ f), model_trace(f @ g)
        if not lhs.equals(rhs):
            witness = Witness(description="Tr(g·f) ≠ Tr(f·g)",
                              morphism=f, lhs=lhs, rhs=rhs)
            break
    report.record("cyclicity", witness is None, witness=witness)
    for a in m.base_words():
        report.compare(
            f"loop is dimension {a}",
            model_trace(m.identity(a)),
            Matrix.scalar(m.algebra, m.algebra.from_int(m.dim(a)))
            if m.algebra.additive
            else Matrix.scalar(m.algebra, m.algebra.one),
            f"Tr(1_{a}) differs from dim {a}",
        )
    if m.algebra.additive:
        for d in range(1, 6):
            report.compare(
                f"Tr(1) at dimension {d}",
                model_trace(Matrix.identity(m.algebra, d)),
                Matrix.scalar(m.algebra, m.algebra.from_int(d)),
                f"Tr(1) differs from {d}",
            )
    return report


def rel_scalars_check(
m: Model) -> CheckReport:
    """Rel has two scalars and η_X is the converse of ε_X."""
    if m.kind != "rel":
        raise KindMismatch(f"Expected a rel model, got {m.kind}")
    report = CheckReport(title="rel scalars")
    elements = m.algebra.elements() or []
    report.record(
        "exactly two scalars",
        len(elements) == 2,
        detail=f"{len(elements)} scalars",
        witness=None
        if len(elements) == 2
        else Witness(description=f"Found {len(elements)} scalars"),
    )
    for x in m.base_words():
        report.compare(
            f"unit is converse of counit {x}",
            evaluate(unit(x), m),
            evaluate(counit(x), m).transpose(),
            f"η_{x} is not the converse of ε_{x}",
        )
    return report
