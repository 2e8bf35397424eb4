"""Bell states, the compositionality lemma and teleportation."""

from loguru import logger
from pydantic import BaseModel, ConfigDict

from src.diagram import equal_diagrams, to_diagram
from src.errors import NotInvertible, ShapeMismatch
from src.matrix import Matrix
from src.models import Model, build_model, evaluate, evaluate_with_report
from src.reports import BranchVerdict, DerivationReport, ProtocolReport
from src.rewrite import Equation
from src.scalars import ScalarAlgebra
from src.signature import (
    Generator,
    ObjectExpr,
    TypedTerm,
    coname_of,
    counit,
    gen,
    ident,
    name_of,
    tensor,
    then,
    unit,
)


class BellBranch(BaseModel):
    """A measurement outcome: the branch map and its correction."""

    model_config = ConfigDict(frozen=True)

    index: int
    branch: Matrix
    correction: Matrix


def bell_pair_terms(a: ObjectExpr) -> tuple[TypedTerm, TypedTerm]:
    """The Bell state η_A : I → A* ⊗ A and costate ε_A : A ⊗ A* → I."""
    return unit(a), counit(a)


def compositionality_term(f: Generator, g: Generator) -> TypedTerm:
    """(⌞f⌟ ⊗ 1_C) ∘ (1_A ⊗ ⌜g⌝) : A → C, which yanks to g ∘ f."""
    a, c = f.dom, g.cod
    return then(
        tensor(ident(a), name_of(gen(g))),
        tensor(coname_of(gen(f)), ident(c)),
    )


def _matrix_model(
    template: Model, shapes: dict[str, int], gens: dict[str, tuple]
) -> Model:
    """A throwaway model over the template's scalars."""
    base = build_model(
        template.kind,
        {
            "scalars": template.algebra.name,
            "objects": shapes,
            "meet_table": getattr(template.algebra, "meet_table", None),
            "tolerance": getattr(template.algebra, "tolerance", 1e-9),
        },
    )
    return base.extended(gens)


def compositionality_lemma_check(
    m: Model, f: Matrix, g: Matrix
) -> ProtocolReport:
    """Feeding a state through ⌜g⌝ and testing with ⌞f⌟ computes g ∘ f."""
    if f.rows != g.cols:
        raise ShapeMismatch(
            f"Cannot compose f : {f.cols} → {f.rows} with "
            f"g : {g.cols} → {g.rows}"
        )
    a, b, c = (ObjectExpr.of(x) for x in "ABC")
    fg, gg = (
        Generator(name="f", dom=a, cod=b),
        Generator(name="g", dom=b, cod=c),
    )
    local = _matrix_model(
        m,
        {"A": f.cols, "B": f.rows, "C": g.rows},
        {"f": (a, b, f), "g": (b, c, g)},
    )
    logger.info("Evaluating the bent composite")
    term = compositionality_term(fg, gg)
    composite = evaluate(term, local)
    expected = g @ f
    ok = composite.equals(expected)
    report = ProtocolReport(title="compositionality lemma")
    report.branches.append(
        BranchVerdict(
            index=0,
            passed=ok,
            composite=composite,
            detail="" if ok else f"expected\n{expected}",
        )
    )
    symbolic = equal_diagrams(term, then(gen(fg), gen(gg)))
    report.notes.append(f"diagram equal to g ∘ f: {symbolic}")
    return report


def teleport_term(beta: Generator, correction: Generator) -> TypedTerm:
    """correction ∘ (⌞β⌟ ⊗ 1_A) ∘ (1_A ⊗ η_A)"""
    a = beta.dom
    return then(
        tensor(ident(a), unit(a)),
        tensor(coname_of(gen(beta)), ident(a)),
        gen(correction),
    )


def _global_scalar(m: Matrix) -> object | None:
    """c when m = c · 1, else None."""
    if not m.is_square or m.rows == 0:
        return None
    c = m[0, 0]
    scaled = Matrix.identity(m.algebra, m.rows).scale(c)
    return c if m.equals(scaled) else None


def teleport_verify(
    m: Model, a: str, branches: list[BellBranch]
) -> ProtocolReport:
    """Each branch followed by its correction must give back 1_A."""
    word = ObjectExpr.of(a)
    n = m.dim(word)
    report = ProtocolReport(title=f"teleportation of {a}")
    for br in sorted(branches, key=lambda b: b.index):
        if br.branch.shape != (n, n) or br.correction.shape != (n, n):
            raise ShapeMismatch(
                f"Branch {br.index} must be {n}×{n} on {a}"
            )
        try:
            br.branch.inverse()
        except NotInvertible as err:
            raise NotInvertible(
                f"Branch {br.index} is not invertible: {err.message}"
            ) from err
        beta = Generator(name=f"beta{br.index}", dom=word, cod=word)
        fix = Generator(name=f"fix{br.index}", dom=word, cod=word)
        local = m.extended({
            beta.name: (word, word, br.branch),
            fix.name: (word, word, br.correction),
        })
        logger.info(f"Teleporting through branch {br.index}")
        result = evaluate_with_report(teleport_term(beta, fix), local)
        composite = result.matrix
        ok = composite.is_identity()
        scalar = _global_scalar(composite)
        report.branches.append(
            BranchVerdict(
                index=br.index,
                passed=ok,
                composite=composite,
                scalar=None if scalar is None else m.algebra.render(scalar),
                detail="" if ok else "residual composite is not 1_A",
            )
        )
    report.notes.append(
        "Bell states are unnormalized; loop scalars are reported, "
        "not compared"
    )
    return report


def pauli_branches(algebra: ScalarAlgebra) -> list[BellBranch]:
    """The qubit branches I, X, Z, XZ with their inverse corrections."""
    one, zero = algebra.one, algebra.zero
    minus = algebra.neg(one)
    identity = Matrix.from_rows(algebra, [[one, zero], [zero, one]])
    x = Matrix.from_rows(algebra, [[zero, one], [one, zero]])
    z = Matrix.from_rows(algebra, [[one, zero], [zero, minus]])
    branches = []
    for k, beta in enumerate((identity, x, z, x @ z)):
        branches.append(
            BellBranch(index=k, branch=beta, correction=beta.inverse())
        )
    return branches


def derive_teleportation(base: str = "A") -> DerivationReport:
    """The picture proof: yanking absorbs the Bell pair, then the formal
    inverse cancels the branch."""
    a = ObjectExpr.of(base)
    beta = Generator(name="beta", dom=a, cod=a)
    inverse = Generator(name="beta_inv", dom=a, cod=a)
    left = Equation(
        name="inverse_left", lhs=then(gen(beta), gen(inverse)), rhs=ident(a)
    )
    right = Equation(
        name="inverse_right", lhs=then(gen(inverse), gen(beta)), rhs=ident(a)
    )
    report = DerivationReport(title=f"teleportation of {a}")
    d0 = to_diagram(teleport_term(beta, inverse))
    report.expect_key("Bell pair yanks away", d0, left.lhs)
    logger.info("Cancelling the branch against its inverse")
    d1 = report.rewrite("teleport", d0, left)
    if report.expect_key("teleportation is the identity", d1, ident(a)):
        report.derived.append(f"{teleport_term(beta, inverse)} = {ident(a)}")
    report.notes.append(f"formal inverse axioms: {left}; {right}")
    return report
