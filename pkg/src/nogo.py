"""Limitative results: uniform cloning and deleting, checked in models by
evaluation and in the free category by rewriting."""

import random
from collections.abc import Iterator
from itertools import combinations, islice
from itertools import product as cartesian

import networkx as nx
from loguru import logger

from src.diagram import canonical_key, to_diagram
from src.errors import KindMismatch, PreconditionUnmet, ShapeMismatch
from src.families import NaturalFamily, candidate_morphisms
from src.matrix import Matrix
from src.models import (
    Model,
    evaluate,
    model_trace,
    scalar_action,
    symmetry_matrix,
)
from src.reports import (
    CheckOutcome,
    CheckReport,
    DerivationReport,
    Witness,
)
from src.rewrite import (
    Equation,
    apply_equation,
    enumerate_matches,
    reverse_equation,
)
from src.signature import (
    UNIT,
    Generator,
    ObjectExpr,
    Permutation,
    Signature,
    TypedTerm,
    coname_of,
    counit,
    gen,
    ident,
    perm_term,
    scalar_term_action,
    sym,
    tensor,
    then,
    trace_term,
    unit,
)


def _expect(fam: NaturalFamily, *kinds: str) -> None:
    if fam.kind not in kinds:
        raise KindMismatch(
            f"Family '{fam.name}' is a {fam.kind}, expected {' or '.join(kinds)}"
        )


# Model-side checks


def find_naturality_counterexample(
    m: Model, fam: NaturalFamily, budget: int = 100, seed: int = 0
) -> Witness | None:
    """First candidate morphism breaking a naturality square, or None when
    none turns up within ``budget`` trials (never a proof)."""
    contexts = (
        m.base_words()
        if fam.kind in ("left_projection", "right_projection")
        else [None]
    )
    logger.info(f"Searching for a naturality counterexample to '{fam.name}'")
    trials = islice(candidate_morphisms(m, seed), budget)
    for trial, cand in enumerate(trials, start=1):
        for context in contexts:
            legs = fam.naturality_legs(
                m, cand.matrix, cand.dom, cand.cod, context
            )
            for label, lhs, rhs in legs:
                if not lhs.equals(rhs):
                    logger.debug(f"Counterexample after {trial} trials")
                    return Witness(
                        description=(
                            f"{label} fails at {cand.description} "
                            f"(trial {trial})"
                        ),
                        morphism=cand.matrix,
                        lhs=lhs,
                        rhs=rhs,
                    )
    logger.info(f"No counterexample within {budget} trials")
    return None


def _naturality(
    report: CheckReport,
    name: str,
    m: Model,
    fam: NaturalFamily,
    budget: int,
    seed: int,
) -> None:
    witness = find_naturality_counterexample(m, fam, budget, seed)
    report.record(
        name,
        witness is None,
        detail="no counterexample within budget" if witness is None else "",
        witness=witness,
    )


def check_cloning_axioms(
    m: Model, delta: NaturalFamily, samples: int = 100, seed: int = 0
) -> CheckReport:
    """Naturality, monoidality, coassociativity and cocommutativity."""
    _expect(delta, "diagonal")
    report = CheckReport(title=f"cloning axioms for '{delta.name}'")
    logger.info("Checking naturality of the diagonal")
    _naturality(report, "naturality", m, delta, samples, seed)

    logger.info("Checking monoidality of the diagonal")
    one = Matrix.scalar(m.algebra, m.algebra.one)
    report.compare("monoidal unit", delta.component(m, UNIT), one,
                   "Δ_I differs from l_I⁻¹")
    words = m.base_words()
    for a, b in cartesian(words, repeat=2):
        report.compare(
            f"monoidal {a},{b}",
            delta.component(m, a + b),
            delta.structural(m, a + b),
            f"Δ_{a}⊗{b} differs from (1 ⊗ σ ⊗ 1) ∘ (Δ_{a} ⊗ Δ_{b})",
        )

    logger.info("Checking coassociativity and cocommutativity")
    for a in words:
        d = delta.component(m, a)
        one_a = m.identity(a)
        report.compare(
            f"coassociative {a}",
            d.kron(one_a) @ d,
            one_a.kron(d) @ d,
            f"(Δ ⊗ 1) ∘ Δ differs from (1 ⊗ Δ) ∘ Δ at {a}",
        )
        report.compare(
            f"cocommutative {a}",
            symmetry_matrix(m, a, a) @ d,
            d,
            f"σ ∘ Δ differs from Δ at {a}",
        )
    return report


def delta_unit_lemma_check(m: Model, delta: NaturalFamily) -> CheckReport:
    _expect(delta, "diagonal")
    report = CheckReport(title="Δ_I lemma")
    report.compare(
        "Δ_I = l_I⁻¹",
        delta.component(m, UNIT),
        Matrix.scalar(m.algebra, m.algebra.one),
        "Δ_I is not the identity scalar",
    )
    return report


def cap_swap_equation(a: ObjectExpr) -> Equation:
    """η ⊗ η = (3 2 1 4) ∘ (η ⊗ η): parallel caps equal nested caps."""
    caps = tensor(unit(a), unit(a))
    swap = perm_term(Permutation.of(3, 2, 1, 4), [a.dual(), a, a.dual(), a])
    return Equation(name="cap_swap", lhs=caps, rhs=then(caps, swap))


def verify_cap_swap_proof(
    m: Model,
    delta: NaturalFamily,
    u: Matrix,
    a: ObjectExpr,
    b: ObjectExpr,
) -> CheckReport:
    """Check each face of the cap-swap argument for a state u : I → a ⊗ b."""
    _expect(delta, "diagonal")
    if u.shape != (m.dim(a + b), 1):
        raise ShapeMismatch(
            f"A state of {a + b} is {m.dim(a + b)}×1, got {u.rows}×{u.cols}"
        )
    report = CheckReport(title="cap-swap proof")
    uu = u.kron(u)
    logger.info("Checking the faces of the cap-swap argument")
    report.compare(
        "unit face", uu @ delta.component(m, UNIT), uu,
        "(u ⊗ u) ∘ Δ_I differs from u ⊗ u",
    )
    report.compare(
        "naturality face",
        delta.component(m, a + b) @ u,
        uu @ delta.component(m, UNIT),
        "Δ ∘ u differs from (u ⊗ u) ∘ Δ_I",
        morphism=u,
    )
    report.compare(
        "monoidality face",
        delta.component(m, a + b),
        delta.structural(m, a + b),
        "Δ_{a⊗b} differs from (1 ⊗ σ ⊗ 1) ∘ (Δ_a ⊗ Δ_b)",
    )
    for w in (a, b) if a != b else (a,):
        report.compare(
            f"cocommutativity face {w}",
            symmetry_matrix(m, w, w) @ delta.component(m, w),
            delta.component(m, w),
            f"σ ∘ Δ differs from Δ at {w}",
        )
    swap = evaluate(perm_term(Permutation.of(3, 2, 1, 4), [a, b, a, b]), m)
    report.compare(
        "conclusion", uu, swap @ uu,
        "u ⊗ u differs from (3 2 1 4) ∘ (u ⊗ u)", morphism=u,
    )
    broken = [o.name for o in report.failed() if o.name != "conclusion"]
    if broken:
        report.notes.append(f"Broken face: {broken[0]}")
    return report


def cloning_collapse_check(
    m: Model,
    delta: NaturalFamily,
    f: Matrix | None = None,
    samples: int = 100,
    seed: int = 0,
) -> CheckReport:
    """Every endomorphism is Tr(f) • 1, and Tr(s • 1) = s."""
    axioms = check_cloning_axioms(m, delta, samples, seed)
    if not axioms.passed:
        failed = [o.name for o in axioms.failed()]
        logger.error(f"Cloning axioms fail: {failed}")
        raise PreconditionUnmet(
            f"Family '{delta.name}' fails the cloning axioms: "
            + ", ".join(failed),
            failed=failed,
        )
    report = CheckReport(title="cloning collapse")
    alg = m.algebra
    endos: list[tuple[str, Matrix]] = []
    if f is not None:
        endos.append(("given endomorphism", f))
    elements = alg.elements()
    for a in m.base_words():
        n = m.dim(a)
        if elements is not None and n == 1:
            endos += [(f"scalar {alg.render(s)} on {a}",
                       Matrix.scalar(alg, s)) for s in elements]
        for g in m.signature.generators:
            if g.dom == a and g.cod == a and g.name in m.generators:
                endos.append((f"generator {g.name}", m.generators[g.name]))
    logger.info(f"Checking f = Tr(f) • 1 on {len(endos)} endomorphisms")
    for label, e in endos:
        if not e.is_square:
            raise ShapeMismatch(f"{label} is not square")
        rebuilt = scalar_action(model_trace(e),
                                Matrix.identity(alg, e.rows))
        report.compare(f"f = Tr(f) • 1 for {label}", e, rebuilt,
                       "f differs from Tr(f) • 1", morphism=e)
    scalars = elements if elements is not None else [
        alg.sample(random.Random(seed)) for _ in range(samples)
    ]
    logger.info("Checking the retraction Tr(s • 1) = s")
    for a in m.base_words():
        one_a = m.identity(a)
        for s in scalars:
            sm = Matrix.scalar(alg, s)
            report.compare(
                f"retraction {alg.render(s)} at {a}",
                model_trace(scalar_action(sm, one_a)),
                sm,
                "Tr(s • 1) differs from s",
            )
    return report


def idempotent_scalars_check(
    m: Model, delta: NaturalFamily, samples: int = 20, seed: int = 0
) -> CheckReport:
    """s · s = s, through the naturality square at I and directly."""
    _expect(delta, "diagonal")
    alg = m.algebra
    rng = random.Random(seed)
    scalars = alg.elements()
    if scalars is None:
        scalars = [alg.one, alg.from_int(2)]
        scalars += [alg.sample(rng) for _ in range(samples)]
    report = CheckReport(title="idempotent scalars")
    delta_i = delta.component(m, UNIT)
    square_fail = direct_fail = None
    disagreements = 0
    logger.info(f"Checking idempotence of {len(scalars)} scalars")
    for s in scalars:
        sm = Matrix.scalar(alg, s)
        lhs, rhs = delta_i @ sm, sm.kron(sm) @ delta_i
        square = lhs.equals(rhs)
        direct = alg.eq(alg.mul(s, s), s)
        if square != direct:
            disagreements += 1
        if not square and square_fail is None:
            square_fail = Witness(
                description=f"Δ_I ∘ s ≠ (s ⊗ s) ∘ Δ_I at s = {alg.render(s)}",
                morphism=sm, lhs=lhs, rhs=rhs,
            )
        if not direct and direct_fail is None:
            direct_fail = Witness(
                description=f"s · s ≠ s at s = {alg.render(s)}",
                morphism=sm,
                lhs=Matrix.scalar(alg, alg.mul(s, s)),
                rhs=sm,
            )
    report.record("idempotent (naturality square)", square_fail is None,
                  witness=square_fail)
    report.record("idempotent (direct)", direct_fail is None,
                  witness=direct_fail)
    report.record(
        "routes agree",
        disagreements == 0,
        witness=None if disagreements == 0 else Witness(
            description=f"{disagreements} scalars disagree"
        ),
    )
    if square_fail is not None or direct_fail is not None:
        witness = square_fail or direct_fail
        report.notes.append(
            f"No-cloning certificate: {witness.description}, so no uniform "
            f"cloning exists over {alg.name} scalars"
        )
    return report


def product_structure_check(
    m: Model,
    delta: NaturalFamily,
    p: NaturalFamily,
    q: NaturalFamily,
    samples: int = 100,
    seed: int = 0,
) -> CheckReport:
    """p ∘ Δ = 1 = q ∘ Δ, (p ⊗ q) ∘ Δ = 1 and naturality of all three."""
    _expect(delta, "diagonal")
    _expect(p, "left_projection")
    _expect(q, "right_projection")
    report = CheckReport(title="product structure")
    words = m.base_words()
    logger.info("Evaluating the projection diagrams")
    for a in words:
        d = delta.component(m, a)
        report.compare(f"p ∘ Δ = 1 at {a}", p.projection(m, a, a) @ d,
                       m.identity(a), f"p ∘ Δ differs from 1 at {a}")
        report.compare(f"q ∘ Δ = 1 at {a}", q.projection(m, a, a) @ d,
                       m.identity(a), f"q ∘ Δ differs from 1 at {a}")
    for a, b in cartesian(words, repeat=2):
        ab = a + b
        report.compare(
            f"(p ⊗ q) ∘ Δ = 1 at {a},{b}",
            p.projection(m, a, b).kron(q.projection(m, a, b))
            @ delta.component(m, ab),
            m.identity(ab),
            f"(p ⊗ q) ∘ Δ differs from 1 at {ab}",
        )
    logger.info("Checking naturality of Δ, p and q")
    _naturality(report, "naturality of Δ", m, delta, samples, seed)
    _naturality(report, "naturality of p", m, p, samples, seed)
    _naturality(report, "naturality of q", m, q, samples, seed)
    return report


def twist_context(a: ObjectExpr, x: TypedTerm) -> TypedTerm:
    """Plug x : I → a* ⊗ a ⊗ a* ⊗ a into caps fed by a ⊗ a."""
    aa = a + a
    gather = perm_term(Permutation.of(2, 3, 1, 4), [a.dual(), a, a.dual(), a])
    return then(
        tensor(ident(aa), x),
        tensor(ident(aa), gather),
        tensor(counit(aa), ident(aa)),
    )


def trace_context(f: TypedTerm, x: TypedTerm) -> TypedTerm:
    """Tr over the trailing a of (1 ⊗ f) ; x, for x : a ⊗ a → a ⊗ a."""
    a = f.dom
    return trace_term(then(tensor(ident(a), f), x), traced=a)


def derive_collapse(
    base: str = "A",
    countermodel: Model | None = None,
    cloning: CheckReport | None = None,
) -> DerivationReport:
    """Twist collapse (σ = 1) and f = Tr(f) • 1 from the cap-swap axiom."""
    a = ObjectExpr.of(base)
    f = Generator(name="f", dom=a, cod=a)
    report = DerivationReport(title=f"cloning collapse at {a}")
    cap_swap = cap_swap_equation(a)

    logger.info("Embedding the cap-swap equation into the twist context")
    d0 = to_diagram(twist_context(a, cap_swap.lhs))
    report.expect_key("context of parallel caps is the twist", d0,
                      sym(a, a))
    d1 = report.rewrite("twist", d0, cap_swap)
    report.expect_key("context of nested caps is the identity", d1,
                      ident(a + a))
    report.expect_key("rewrite agrees with substitution", d1,
                      twist_context(a, cap_swap.rhs))
    collapse = Equation(name="twist_collapse", lhs=sym(a, a),
                        rhs=ident(a + a))
    report.derived.append(str(collapse))

    logger.info("Applying σ = 1 inside the trace context")
    e0 = to_diagram(trace_context(gen(f), sym(a, a)))
    report.expect_key("trace context of the twist is f", e0, gen(f))
    e1 = report.rewrite("trace", e0, collapse)
    scaled = scalar_term_action(trace_term(gen(f)), ident(a))
    report.expect_key("f = Tr(f) • 1", e1, scaled)
    report.derived.append(f"f = {scaled}")

    if countermodel is not None:
        word = ObjectExpr.of(next(iter(countermodel.dims)))
        twist = evaluate(sym(word, word), countermodel)
        if not twist.is_identity():
            note = (
                f"σ_{word},{word} is not the identity in the "
                f"{countermodel.kind} model, so no family there satisfies "
                "the cloning axioms"
            )
            if cloning is not None and cloning.failed():
                w = cloning.failed()[0].witness
                note += f" (witness: {w.description})"
            report.notes.append(note)
    return report


def replay_derivation(report: DerivationReport) -> CheckReport:
    """Re-apply every recorded step and compare the keys."""
    replay = CheckReport(title=f"replay of {report.title}")
    logger.info(f"Replaying {len(report.steps)} rewrite steps")
    previous: dict[str, str] = {}
    for k, step in enumerate(report.steps):
        matches = enumerate_matches(step.before, to_diagram(step.equation.lhs))
        if step.site >= len(matches):
            replay.record(
                f"step {k} ({step.equation.name})",
                False,
                witness=Witness(description=f"site {step.site} is gone"),
            )
            continue
        after = apply_equation(step.before, step.equation,
                               matches[step.site])
        key = canonical_key(after).text()
        chained = previous.get(step.chain, step.before_key) == step.before_key
        ok = key == step.after_key and chained
        replay.record(
            f"step {k} ({step.equation.name})",
            ok,
            witness=None if ok else Witness(
                description="replayed key differs or chain is broken",
                terms=(key, step.after_key),
            ),
        )
        previous[step.chain] = step.after_key
    return replay


def _parallel_pair(sig: Signature) -> tuple[Generator, Generator]:
    for f, g in combinations(sig.generators, 2):
        if f.dom == g.dom and f.cod == g.cod:
            return f, g
    raise PreconditionUnmet(
        "Need two distinct parallel generators f, g : A → B",
        failed=["parallel generators"],
    )


def deleting_collapse_check(sig: Signature) -> DerivationReport:
    """With a uniform deleting family any parallel f, g become equal."""
    f, g = _parallel_pair(sig)
    a, b = f.dom, f.cod
    d_unit = Generator(name="d[I]", dom=UNIT, cod=UNIT)
    d_bent = Generator(name=f"d[{a + b.dual()}]", dom=a + b.dual(), cod=UNIT)
    report = DerivationReport(title=f"deleting collapse of {f.name}, {g.name}")

    unit_law = reverse_equation(
        Equation(name="delete_unit", lhs=gen(d_unit), rhs=ident(UNIT))
    )

    def naturality(h: Generator) -> Equation:
        return Equation(
            name=f"delete_natural_{h.name}",
            lhs=then(coname_of(gen(h)), gen(d_unit)),
            rhs=gen(d_bent),
        )

    bent = tensor(ident(a), unit(b))
    unbent_d = then(bent, tensor(gen(d_bent), ident(b)))
    finals = {}
    for h in (f, g):
        logger.info(f"Deleting through the coname of {h.name}")
        d = report.rewrite(f"coname {h.name}", to_diagram(coname_of(gen(h))),
                           unit_law)
        d = report.rewrite(f"coname {h.name}", d, naturality(h))
        report.expect_key(f"⌞{h.name}⌟ = d", d, gen(d_bent))

        logger.info(f"Deleting through {h.name} itself")
        d = report.rewrite(f"map {h.name}", to_diagram(gen(h)), unit_law)
        d = report.rewrite(f"map {h.name}", d, naturality(h))
        report.expect_key(f"{h.name} = (d ⊗ 1) ∘ (1 ⊗ η)", d, unbent_d)
        finals[h.name] = canonical_key(d)

    same = finals[f.name] == finals[g.name]
    report.conclusions.append(
        CheckOutcome(
            name=f"{f.name} = {g.name}",
            passed=same,
            witness=None if same else Witness(
                description="final keys differ",
                terms=(finals[f.name].text(), finals[g.name].text()),
            ),
        )
    )
    if same:
        report.derived.append(f"⌞{f.name}⌟ = {d_bent.name} = ⌞{g.name}⌟")
        report.derived.append(f"{f.name} = {g.name}")
    return report


# Exhaustive semilattices


def _lattice_graph(table: list[list[int]]) -> nx.DiGraph:
    n = len(table)
    graph = nx.DiGraph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(
        (x, y) for x in range(n) for y in range(n)
        if x != y and table[x][y] == x
    )
    return graph


def _meet_table(below: list[set[int]]) -> list[list[int]]:
    """Meets of a finite lattice given each element's down-set."""
    n = len(below)
    table = [[0] * n for _ in range(n)]
    for x, y in cartesian(range(n), repeat=2):
        common = below[x] & below[y]
        table[x][y] = max(common, key=lambda z: len(below[z]))
    return table


def _has_maximum(below: list[set[int]], subset: set[int]) -> bool:
    return any(subset <= below[c] for c in subset)


def _coatom_extensions(
    below: list[set[int]],
) -> Iterator[list[set[int]]]:
    """Lattices with one more element, added as a new coatom z.

    z's strict down-set D must be a down-set avoiding the top, and every
    other old element y must meet z, i.e. D ∩ ↓y must have a maximum.
    Removing a coatom from a finite lattice leaves a lattice, so this
    reaches every lattice one element larger.
    """
    n = len(below)
    top = next(x for x in range(n) if len(below[x]) == n)
    rest = [x for x in range(n) if x != top]
    for size in range(len(rest) + 1):
        for chosen in combinations(rest, size):
            down = set(chosen)
            if any(not below[x] <= down for x in down):
                continue
            if not all(_has_maximum(below, down & below[y]) for y in rest):
                continue
            grown = [set(s) for s in below] + [down | {n}]
            grown[top].add(n)
            yield grown


def semilattice_tables(size: int) -> Iterator[list[list[int]]]:
    """Every meet-semilattice with a top on ``size`` elements, up to
    isomorphism, as meet tables over 0..size-1."""
    if size < 1:
        return
    level: list[list[set[int]]] = [[{0}]]
    for _ in range(size - 1):
        grown: list[list[set[int]]] = []
        seen: list[tuple[str, nx.DiGraph]] = []
        for below in level:
            for candidate in _coatom_extensions(below):
                graph = _lattice_graph(_meet_table(candidate))
                h = nx.weisfeiler_lehman_graph_hash(graph)
                if any(
                    h == other_h and nx.is_isomorphic(graph, other)
                    for other_h, other in seen
                ):
                    continue
                seen.append((h, graph))
                grown.append(candidate)
        level = grown
    logger.debug(f"{len(level)} semilattices on {size} elements")
    for below in level:
        yield _meet_table(below)
