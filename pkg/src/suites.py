"""The check suites behind `verify SUITE`."""

import asyncio
from collections.abc import Callable

from loguru import logger

from src.bundle import ModelBundle
from src.config import CliConfig
from src.errors import ConjUnavailable, PreconditionUnmet
from src.families import NaturalFamily
from src.models import (
    dagger_compact_check,
    evaluate,
    rel_scalars_check,
    scalar_action_laws_check,
    scalar_commutativity_check,
    trace_cyclicity_check,
)
from src.nogo import (
    check_cloning_axioms,
    cloning_collapse_check,
    delta_unit_lemma_check,
    deleting_collapse_check,
    derive_collapse,
    find_naturality_counterexample,
    idempotent_scalars_check,
    product_structure_check,
    replay_derivation,
)
from src.protocols import (
    derive_teleportation,
    pauli_branches,
    teleport_verify,
)
from src.reports import (
    BranchVerdict,
    CheckReport,
    DerivationReport,
    Witness,
)
from src.signature import ObjectExpr, Signature, sym

SUITES = (
    "scalars",
    "dagger",
    "cloning",
    "collapse",
    "deleting",
    "product",
    "teleport",
)


def _require(bundle: ModelBundle, kind: str) -> NaturalFamily:
    fam = bundle.family(kind)
    if fam is None:
        raise PreconditionUnmet(
            f"The model file declares no {kind} family", failed=[kind]
        )
    return fam


def absorb_derivation(
    report: CheckReport, derivation: DerivationReport
) -> None:
    """Fold a derivation's conclusions and its replay into a check report."""
    for c in derivation.conclusions:
        report.outcomes.append(c)
    report.extend(replay_derivation(derivation), prefix="replay ")
    report.notes.extend(derivation.notes)
    report.notes.extend(f"derived {d}" for d in derivation.derived)


def scalars_suite(bundle: ModelBundle, config: CliConfig) -> CheckReport:
    m = bundle.model
    report = CheckReport(title="scalars")
    report.extend(scalar_commutativity_check(m, config.samples, config.seed))
    report.extend(scalar_action_laws_check(m, config.samples, config.seed))
    report.extend(trace_cyclicity_check(m, config.samples, config.seed))
    if m.kind == "rel":
        report.extend(rel_scalars_check(m))
    return report


def dagger_suite(bundle: ModelBundle, _config: CliConfig) -> CheckReport:
    return dagger_compact_check(bundle.model)


def cloning_suite(bundle: ModelBundle, config: CliConfig) -> CheckReport:
    m = bundle.model
    delta = _require(bundle, "diagonal")
    report = check_cloning_axioms(m, delta, config.budget, config.seed)
    report.extend(delta_unit_lemma_check(m, delta))
    report.extend(idempotent_scalars_check(m, delta, seed=config.seed))
    return report


def collapse_suite(bundle: ModelBundle, config: CliConfig) -> CheckReport:
    m = bundle.model
    delta = bundle.family("diagonal")
    report = CheckReport(title="collapse")
    axioms = None
    if delta is not None:
        axioms = check_cloning_axioms(m, delta, config.budget, config.seed)
    base = next(iter(m.dims))
    word = ObjectExpr.of(base)
    twisted = not evaluate(sym(word, word), m).is_identity()
    absorb_derivation(
        report,
        derive_collapse(
            base, countermodel=m if twisted else None, cloning=axioms
        ),
    )
    if delta is None:
        report.notes.append("No diagonal family: model-side collapse skipped")
        return report
    if m.kind == "finset":
        # the cups here are relations, not functions
        report.notes.append("Finite sets are not compact closed: "
                            "model-side collapse skipped")
        return report
    try:
        report.extend(
            cloning_collapse_check(
                m, delta, samples=config.samples, seed=config.seed
            )
        )
    except PreconditionUnmet as err:
        logger.warning(f"Skipping the model-side collapse: {err.message}")
        report.notes.append(f"Model-side collapse skipped: {err.message}")
    return report


def _deleting_signature(bundle: ModelBundle) -> Signature:
    sig = bundle.model.signature
    for f in sig.generators:
        for g in sig.generators:
            if f.name != g.name and f.dom == g.dom and f.cod == g.cod:
                return sig
    return Signature.build(
        ["A", "B"],
        [
            ("f", ObjectExpr.of("A"), ObjectExpr.of("B")),
            ("g", ObjectExpr.of("A"), ObjectExpr.of("B")),
        ],
    )


def deleting_suite(bundle: ModelBundle, config: CliConfig) -> CheckReport:
    report = CheckReport(title="deleting")
    absorb_derivation(
        report, deleting_collapse_check(_deleting_signature(bundle))
    )
    d = bundle.family("deleting")
    if d is not None:
        witness = find_naturality_counterexample(
            bundle.model, d, config.budget, config.seed
        )
        report.record(
            f"naturality of '{d.name}'",
            witness is None,
            detail="no counterexample within budget" if witness is None
            else "",
            witness=witness,
        )
    return report


def product_suite(bundle: ModelBundle, config: CliConfig) -> CheckReport:
    return product_structure_check(
        bundle.model,
        _require(bundle, "diagonal"),
        _require(bundle, "left_projection"),
        _require(bundle, "right_projection"),
        config.budget,
        config.seed,
    )


def teleport_suite(bundle: ModelBundle, config: CliConfig) -> CheckReport:
    m = bundle.model
    base = bundle.teleport_object or next(iter(m.dims))
    branches = bundle.teleport
    if not branches:
        if m.dims[base] != 2 or not m.algebra.additive:
            raise PreconditionUnmet(
                "No teleport branches in the model file and no qubit to "
                "fall back on",
                failed=["teleport branches"],
            )
        branches = pauli_branches(m.algebra)
    verdicts = teleport_verify(m, base, branches)
    report = CheckReport(title="teleport", notes=list(verdicts.notes))
    for v in verdicts.branches:
        report.record(
            f"branch {v.index}",
            v.passed,
            detail="" if v.scalar is None else f"scalar {v.scalar}",
            witness=None if v.passed else _residual(v),
        )
    absorb_derivation(report, derive_teleportation(base))
    return report


def _residual(verdict: BranchVerdict) -> Witness:
    return Witness(description=verdict.detail, morphism=verdict.composite)


_RUNNERS: dict[str, Callable[[ModelBundle, CliConfig], CheckReport]] = {
    "scalars": scalars_suite,
    "dagger": dagger_suite,
    "cloning": cloning_suite,
    "collapse": collapse_suite,
    "deleting": deleting_suite,
    "product": product_suite,
    "teleport": teleport_suite,
}


async def run_all(bundle: ModelBundle, config: CliConfig) -> CheckReport:
    """Every suite the model supports, run concurrently, merged in suite
    order."""

    async def one(name: str) -> CheckReport | str:
        try:
            return await asyncio.to_thread(_RUNNERS[name], bundle, config)
        except (PreconditionUnmet, ConjUnavailable) as err:
            logger.warning(f"Skipping suite {name}: {err.message}")
            return err.message

    results = await asyncio.gather(*(one(name) for name in SUITES))
    report = CheckReport(title="all")
    for name, result in zip(SUITES, results):
        if isinstance(result, str):
            report.notes.append(f"{name} skipped: {result}")
        else:
            report.extend(result, prefix=f"{name}: ")
    return report


def run_suite(
    name: str, bundle: ModelBundle, config: CliConfig
) -> CheckReport:
    if name == "all":
        return asyncio.run(run_all(bundle, config))
    if name not in _RUNNERS:
        raise KeyError(name)
    logger.info(f"Running the {name} suite on {bundle.source or 'model'}")
    return _RUNNERS[name](bundle, config)
