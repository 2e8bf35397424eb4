import pytest

from src.diagram import key_of
from src.errors import KindMismatch, PreconditionUnmet, ShapeMismatch
from src.families import family_from_spec
from src.matrix import Matrix
from src.models import build_model
from src.nogo import (
    cap_swap_equation,
    check_cloning_axioms,
    cloning_collapse_check,
    deleting_collapse_check,
    delta_unit_lemma_check,
    derive_collapse,
    idempotent_scalars_check,
    product_structure_check,
    replay_derivation,
    semilattice_tables,
    trace_context,
    twist_context,
    verify_cap_swap_proof,
)
from src.params import FamilySpec
from src.scalars import check_semilattice
from src.signature import Signature, gen, ident, sym
from tests.conftest import A, B

BASIS_COPY = [1, 0, 0, 0, 0, 0, 0, 1]


def family(m, kind, components, name="fam"):
    return family_from_spec(
        name, FamilySpec(kind=kind, components=components), m
    )


@pytest.fixture
def diamond_copy(diamond):
    return family(diamond, "diagonal", {"A": [3]}, name="copy")


@pytest.fixture
def basis_copy(qubit):
    return family(qubit, "diagonal", {"A": BASIS_COPY}, name="basis_copy")


class TestCloningInModels:
    def test_semilattice_admits_cloning(self, diamond, diamond_copy):
        report = check_cloning_axioms(diamond, diamond_copy, samples=50)
        assert report.passed, [o.name for o in report.failed()]
        assert delta_unit_lemma_check(diamond, diamond_copy).passed

    def test_basis_copy_is_not_natural(self, qubit, basis_copy):
        report = check_cloning_axioms(qubit, basis_copy, samples=50)
        assert not report.passed
        assert [o.name for o in report.failed()] == ["naturality"]
        assert report.outcome("coassociative A").passed
        assert report.outcome("cocommutative A").passed

    def test_wrong_kind(self, qubit):
        d = family(qubit, "deleting", {"A": [1, 0]})
        with pytest.raises(KindMismatch):
            check_cloning_axioms(qubit, d)

    def test_idempotent_scalars(self, diamond, diamond_copy, qubit,
                                basis_copy):
        """Scalars are idempotent in the semilattice but 2 · 2 ≠ 2."""
        assert idempotent_scalars_check(diamond, diamond_copy).passed
        report = idempotent_scalars_check(qubit, basis_copy, samples=5)
        assert not report.outcome("idempotent (naturality square)").passed
        assert report.outcome("routes agree").passed
        assert report.notes[0].startswith("No-cloning certificate")

    def test_collapse_in_semilattice(self, diamond, diamond_copy):
        report = cloning_collapse_check(diamond, diamond_copy, samples=20)
        assert report.passed
        assert report.outcome("f = Tr(f) • 1 for generator s").passed

    def test_collapse_needs_the_axioms(self, qubit, basis_copy):
        with pytest.raises(PreconditionUnmet) as excinfo:
            cloning_collapse_check(qubit, basis_copy, samples=20)
        assert excinfo.value.failed == ["naturality"]


class TestCapSwapProof:
    def test_faces_hold_in_semilattice(self, diamond, diamond_copy):
        u = Matrix.scalar(diamond.algebra, 1)
        report = verify_cap_swap_proof(diamond, diamond_copy, u, A, A)
        assert report.passed
        assert report.notes == []

    def test_bell_state_breaks_naturality_face(self, qubit, basis_copy):
        u = Matrix.parse(qubit.algebra, 4, 1, [1, 0, 0, 1])
        report = verify_cap_swap_proof(qubit, basis_copy, u, A, A)
        assert not report.outcome("naturality face").passed
        assert not report.outcome("conclusion").passed
        assert report.outcome("unit face").passed
        assert report.notes == ["Broken face: naturality face"]

    def test_state_shape(self, qubit, basis_copy):
        with pytest.raises(ShapeMismatch):
            verify_cap_swap_proof(
                qubit, basis_copy, qubit.identity(A), A, A
            )


class TestProductStructure:
    def test_finset_is_cartesian(self, finset):
        report = product_structure_check(
            finset,
            family(finset, "diagonal", {"X": BASIS_COPY}),
            family(finset, "left_projection", {"X": [1, 1]}),
            family(finset, "right_projection", {"X": [1, 1]}),
        )
        assert report.passed, [o.name for o in report.failed()]

    def test_rel_is_not(self, rel):
        report = product_structure_check(
            rel,
            family(rel, "diagonal", {"X": BASIS_COPY}),
            family(rel, "left_projection", {"X": [1, 1]}),
            family(rel, "right_projection", {"X": [1, 1]}),
        )
        assert report.outcome("p ∘ Δ = 1 at X").passed
        assert not report.outcome("naturality of Δ").passed
        assert not report.outcome("naturality of p").passed


class TestDerivations:
    def test_contexts(self):
        """The twist context turns parallel caps into σ, and the trace
        context turns σ into f."""
        caps = cap_swap_equation(A)
        assert key_of(twist_context(A, caps.lhs)) == key_of(sym(A, A))
        assert key_of(twist_context(A, caps.rhs)) == key_of(ident(A + A))
        f = gen(Signature.build(["A"], [("f", A, A)]).generator("f"))
        assert key_of(trace_context(f, sym(A, A))) == key_of(f)

    def test_collapse_derivation(self):
        report = derive_collapse("A")
        assert report.passed, [c.name for c in report.conclusions]
        assert len(report.steps) == 2
        assert report.derived[0].startswith("twist_collapse")
        assert replay_derivation(report).passed

    def test_collapse_names_countermodel(self, qubit):
        report = derive_collapse("A", countermodel=qubit)
        assert "not the identity" in report.notes[0]

    def test_replay_detects_tampering(self):
        report = derive_collapse("A")
        step = report.steps[0]
        report.steps[0] = step.model_copy(update={"after_key": "tampered"})
        replay = replay_derivation(report)
        assert not replay.outcomes[0].passed

    def test_deleting_collapse(self, sig):
        report = deleting_collapse_check(sig)
        assert report.passed, [c.name for c in report.conclusions]
        assert "f = g" in report.derived
        assert replay_derivation(report).passed

    def test_deleting_needs_parallel_pair(self):
        lonely = Signature.build(["A", "B"], [("f", A, B)])
        with pytest.raises(PreconditionUnmet):
            deleting_collapse_check(lonely)


class TestSemilatticeTables:
    @pytest.mark.parametrize(
        "size, count", [(1, 1), (2, 1), (3, 1), (4, 2), (5, 5), (6, 15),
                        (7, 53), (8, 222)]
    )
    def test_counts(self, size, count):
        assert len(list(semilattice_tables(size))) == count

    def test_tables_are_semilattices(self):
        for table in semilattice_tables(5):
            check_semilattice(tuple(tuple(r) for r in table))

    @pytest.mark.slow
    @pytest.mark.parametrize("size", range(1, 9))
    def test_every_table_admits_cloning(self, size):
        """The identity copy is a uniform cloning in every semilattice,
        and every endomorphism collapses onto its trace."""
        for table in semilattice_tables(size):
            m = build_model(
                "semilattice",
                {"scalars": "semilattice", "objects": {"A": 1},
                 "meet_table": table},
            )
            top = m.algebra.one
            copy = family(m, "diagonal", {"A": [top]})
            axioms = check_cloning_axioms(m, copy, samples=5)
            assert axioms.passed, table
            assert cloning_collapse_check(m, copy, samples=5).passed, table
