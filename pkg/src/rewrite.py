"""Equations and local rewriting of diagrams.

A match cuts the host diagram into a context with a hole whose ports line
up with the pattern's boundary. Each hole port is attached either to a host
port or, when the context feeds one pattern boundary straight back into
another, to a second hole port. Pattern wires that touch no node are hosted
on distinct free host wires (or on free loops), source end to source end.
Plugging the pattern back into the hole gives the host again, so replacing
it by the other side of an equation is sound in any compact closed model.
"""

from collections import Counter
from typing import Literal

import networkx as nx
from loguru import logger
from pydantic import model_validator

from src.diagram import (
    Diagram,
    LoopLabel,
    Port,
    canonical_key,
    make_diagram,
    to_diagram,
    trace_paths,
)
from src.errors import NoSuchMatch, TypeMismatch
from src.signature import Frozen, TypedTerm


class Equation(Frozen):
    name: str
    lhs: TypedTerm
    rhs: TypedTerm

    @model_validator(mode="after")
    def _same_type(self) -> "Equation":
        if self.lhs.dom != self.rhs.dom or self.lhs.cod != self.rhs.cod:
            raise TypeMismatch(
                f"Equation '{self.name}' relates {self.lhs.dom} → "
                f"{self.lhs.cod} with {self.rhs.dom} → {self.rhs.cod}"
            )
        return self

    def __str__(self) -> str:
        return f"{self.name}: {self.lhs} = {self.rhs}"


def reverse_equation(eq: Equation) -> Equation:
    name = eq.name[:-3] if eq.name.endswith("^-1") else f"{eq.name}^-1"
    return Equation(name=name, lhs=eq.rhs, rhs=eq.lhs)


class Attachment(Frozen):
    kind: Literal["host", "hole"]
    port: Port


class Match(Frozen):
    index: int
    node_map: tuple[tuple[int, int], ...]
    attachments: tuple[Attachment, ...]
    hosted_wires: tuple[int, ...] = ()
    consumed_loops: tuple[LoopLabel, ...] = ()

    def host_nodes(self) -> set[int]:
        return {h for _, h in self.node_map}


def _pattern_order(pattern: Diagram) -> list[int]:
    graph = nx.Graph()
    graph.add_nodes_from(range(len(pattern.nodes)))
    for w in pattern.wires:
        if not w.a.on_boundary and not w.b.on_boundary:
            graph.add_edge(w.a.node, w.b.node)
    order = []
    components = sorted(nx.connected_components(graph), key=min)
    for component in components:
        start = min(component)
        order.append(start)
        order.extend(v for _, v in nx.bfs_edges(graph, start))
    return order


def _node_fits(pattern: Diagram, pn: int, host: Diagram, hn: int) -> bool:
    p, h = pattern.nodes[pn], host.nodes[hn]
    return (
        p.generator == h.generator
        and p.dagger == h.dagger
        and p.dom == h.dom
        and p.cod == h.cod
    )


def enumerate_matches(d: Diagram, pattern: Diagram) -> list[Match]:
    """All embeddings of ``pattern`` into ``d``, in a deterministic order."""
    need = Counter(str(label) for label in pattern.loops)
    have = Counter(str(label) for label in d.loops)
    if any(have[label] < n for label, n in need.items()):
        return []
    free_loops = list(d.loops)
    for label in pattern.loops:
        free_loops.remove(label)

    p_mates, h_mates = pattern.mates(), d.mates()
    order = _pattern_order(pattern)
    pure = []
    for w in pattern.wires:
        if w.a.on_boundary and w.b.on_boundary:
            a, b = (w.a, w.b) if pattern.is_source(w.a) else (w.b, w.a)
            pure.append((a, b, w.base))

    found: list[Match] = []

    def image(p: Port, node_map: dict[int, int]) -> Port:
        return Port(node_map[p.node], p.side, p.index)

    def node_consistent(pn: int, hn: int, node_map: dict[int, int]) -> bool:
        trial = dict(node_map)
        trial[pn] = hn
        for pp in pattern.node_ports(pn):
            pq = p_mates[pp]
            if pq.on_boundary or pq.node not in trial:
                continue
            if h_mates[image(pp, trial)] != image(pq, trial):
                return False
        return True

    def finish(node_map: dict[int, int]) -> None:
        inverse = {h: p for p, h in node_map.items()}
        attached: dict[Port, Attachment] = {}
        for b in pattern.boundary_ports():
            x = p_mates[b]
            if x.on_boundary:
                continue
            y = h_mates[image(x, node_map)]
            if not y.on_boundary and y.node in inverse:
                z = Port(inverse[y.node], y.side, y.index)
                attached[b] = Attachment(kind="hole", port=p_mates[z])
            else:
                attached[b] = Attachment(kind="host", port=y)

        matched = set(node_map.values())
        free_wires = [
            (k, w)
            for k, w in enumerate(d.wires)
            if (w.a.on_boundary or w.a.node not in matched)
            and (w.b.on_boundary or w.b.node not in matched)
        ]

        def host_pure(i: int, used: set, loops_used: list[int]) -> None:
            if i == len(pure):
                _emit(node_map, attached, used, loops_used)
                return
            a, b, base = pure[i]
            for k, w in free_wires:
                if k in used or w.base != base:
                    continue
                s, t = (w.a, w.b) if d.is_source(w.a) else (w.b, w.a)
                attached[a] = Attachment(kind="host", port=s)
                attached[b] = Attachment(kind="host", port=t)
                host_pure(i + 1, used | {k}, loops_used)
            for j, label in enumerate(free_loops):
                if j in loops_used or label.base != base:
                    continue
                attached[a] = Attachment(kind="hole", port=b)
                attached[b] = Attachment(kind="hole", port=a)
                host_pure(i + 1, used, loops_used + [j])
            attached.pop(a, None)
            attached.pop(b, None)

        host_pure(0, set(), [])

    def _emit(node_map, attached, used, loops_used) -> None:
        found.append(
            Match(
                index=len(found),
                node_map=tuple(sorted(node_map.items())),
                attachments=tuple(
                    attached[b] for b in pattern.boundary_ports()
                ),
                hosted_wires=tuple(sorted(used)),
                consumed_loops=tuple(pattern.loops)
                + tuple(free_loops[j] for j in loops_used),
            )
        )

    def extend(k: int, node_map: dict[int, int]) -> None:
        if k == len(order):
            finish(node_map)
            return
        pn = order[k]
        taken = set(node_map.values())
        for hn in range(len(d.nodes)):
            if hn in taken or not _node_fits(pattern, pn, d, hn):
                continue
            if node_consistent(pn, hn, node_map):
                extend(k + 1, {**node_map, pn: hn})

    extend(0, {})
    logger.debug(f"Found {len(found)} matches")
    return found


def _remove_loops(
    loops: tuple[LoopLabel, ...], consumed: tuple[LoopLabel, ...]
) -> list[LoopLabel]:
    remaining = list(loops)
    for label in consumed:
        remaining.remove(label)
    return remaining


def _plug(d: Diagram, site: Match, pattern_boundary: list[Port],
          replacement: Diagram) -> Diagram:
    matched = site.host_nodes()
    kept = [n for n in range(len(d.nodes)) if n not in matched]
    renumber = {old: new for new, old in enumerate(kept)}
    offset = len(kept)

    def host(p: Port) -> Port:
        if p.on_boundary:
            return p
        return Port(renumber[p.node], p.side, p.index)

    def rhs(p: Port):
        if p.on_boundary:
            return ("hole", p)
        return Port(p.node + offset, p.side, p.index)

    edges = []
    hosted = set(site.hosted_wires)
    for k, w in enumerate(d.wires):
        if k in hosted:
            continue
        if not w.a.on_boundary and w.a.node in matched:
            continue
        if not w.b.on_boundary and w.b.node in matched:
            continue
        edges.append((host(w.a), host(w.b)))
    edges += [(rhs(w.a), rhs(w.b)) for w in replacement.wires]
    seen_holes = set()
    for b, attachment in zip(pattern_boundary, site.attachments):
        if attachment.kind == "host":
            edges.append((("hole", b), host(attachment.port)))
        elif (attachment.port, b) not in seen_holes:
            seen_holes.add((b, attachment.port))
            edges.append((("hole", b), ("hole", attachment.port)))

    pairs, loops = trace_paths(
        edges,
        is_real=lambda x: isinstance(x, Port),
        base_of=lambda x: replacement.factor(x[1]).base,
    )
    return make_diagram(
        d.inputs,
        d.outputs,
        [d.nodes[n] for n in kept] + list(replacement.nodes),
        pairs,
        _remove_loops(d.loops, site.consumed_loops)
        + list(replacement.loops)
        + loops,
    )


def apply_equation(d: Diagram, eq: Equation, site: Match) -> Diagram:
    """Replace the occurrence of eq.lhs at ``site`` by eq.rhs."""
    pattern = to_diagram(eq.lhs)
    if site not in enumerate_matches(d, pattern):
        raise NoSuchMatch(
            f"Site {site.index} is not a match of '{eq.name}' in the diagram"
        )
    logger.info(f"Applying equation '{eq.name}' at site {site.index}")
    replacement = to_diagram(eq.rhs)
    result = _plug(d, site, pattern.boundary_ports(), replacement)
    logger.debug(f"Rewritten key: {canonical_key(result).text()!r}")
    return result


def rewrite_once(d: Diagram, eq: Equation) -> Diagram | None:
    """Apply ``eq`` at its first match, or return None when it has none."""
    matches = enumerate_matches(d, to_diagram(eq.lhs))
    if not matches:
        return None
    return apply_equation(d, eq, matches[0])
