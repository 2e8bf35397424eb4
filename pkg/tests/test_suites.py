import pytest
from loguru import logger

from src.bundle import load_model
from src.config import CliConfig
from src.errors import PreconditionUnmet
from src.suites import _RUNNERS, SUITES, run_suite
from tests.conftest import MODELS


@pytest.fixture
def config():
    return CliConfig(budget=50, samples=20, seed=0)


def bundle(name):
    return load_model(MODELS / f"{name}.json")


class TestSuites:
    def test_semilattice_clones(self, config):
        report = run_suite("cloning", bundle("semilattice"), config)
        assert report.passed, [o.name for o in report.failed()]
        assert report.outcome("idempotent (direct)").passed

    def test_basis_copy_does_not(self, config):
        report = run_suite("cloning", bundle("qubit-basiscopy"), config)
        assert not report.passed
        witness = report.outcome("naturality").witness
        assert "sum of basis states" in witness.description

    def test_collapse_in_semilattice(self, config):
        report = run_suite("collapse", bundle("semilattice"), config)
        assert report.passed, [o.name for o in report.failed()]
        assert any(n.startswith("derived twist_collapse")
                   for n in report.notes)
        assert any(o.name.startswith("replay ") for o in report.outcomes)

    def test_collapse_skips_model_side_without_cloning(self, config):
        report = run_suite("collapse", bundle("qubit-basiscopy"), config)
        assert report.passed
        assert any("not the identity" in n for n in report.notes)
        assert any(n.startswith("Model-side collapse skipped")
                   for n in report.notes)

    def test_deleting(self, config):
        rel = run_suite("deleting", bundle("rel"), config)
        assert rel.passed
        assert "derived f = g" not in rel.notes
        assert "derived R = S" in rel.notes

        qubit = run_suite("deleting", bundle("qubit-basiscopy"), config)
        assert not qubit.outcome("naturality of 'basis_discard'").passed

    def test_product(self, config):
        assert run_suite("product", bundle("finset"), config).passed
        assert not run_suite("product", bundle("rel"), config).passed

    def test_product_needs_families(self, config):
        with pytest.raises(PreconditionUnmet):
            run_suite("product", bundle("semilattice"), config)

    def test_teleport(self, config):
        report = run_suite("teleport", bundle("qubit-teleport"), config)
        assert report.passed
        assert report.outcome("branch 3").detail == "scalar 1"

    def test_scalars_and_dagger(self, config):
        rel = bundle("rel")
        assert run_suite("scalars", rel, config).outcome(
            "exactly two scalars"
        ).passed
        assert run_suite("dagger", rel, config).passed

    def test_unknown_suite(self, config):
        with pytest.raises(KeyError):
            run_suite("braiding", bundle("rel"), config)


class TestRunAll:
    def test_semilattice_skips_what_it_lacks(self, config):
        report = run_suite("all", bundle("semilattice"), config)
        skipped = sorted(n.split(" ")[0] for n in report.notes
                         if " skipped: " in n)

        # Assertions
        assert report.passed, [o.name for o in report.failed()]
        assert skipped == ["dagger", "product", "teleport"]
        assert report.outcome("cloning: naturality").passed

    def test_outcomes_keep_suite_order(self, config):
        report = run_suite("all", bundle("finset"), config)
        order = [o.name.split(":")[0] for o in report.outcomes]
        seen = list(dict.fromkeys(order))
        assert seen == [s for s in SUITES if s in seen]

    def test_skipped_suite_becomes_a_note(self, config, mocker):
        """A suite whose preconditions fail is reported, not raised."""
        logger.info("Mocking the scalars suite to fail its preconditions")
        failing = mocker.Mock(side_effect=PreconditionUnmet("no scalars"))
        mocker.patch.dict(_RUNNERS, {"scalars": failing})

        report = run_suite("all", bundle("rel"), config)

        # Assertions
        failing.assert_called_once()
        assert "scalars skipped: no scalars" in report.notes
        assert not any(o.name.startswith("scalars: ")
                       for o in report.outcomes)
