"""String diagrams of the free compact closed category.

A diagram is an open graph. Boundary ports and the ordered ports of
generator occurrences are paired by wires; closed wire loops that carry no
node are kept as labels, since Tr(1_A) is a non-trivial scalar.

Port polarity: every wire runs from a *source* end to a *target* end. An
input port of a positive factor is a source, an output port of a positive
factor a target, and a dual factor flips both.
"""

from collections import Counter, defaultdict
from collections.abc import Callable, Hashable, Iterable
from typing import NamedTuple

import networkx as nx
from loguru import logger

from src.errors import TypeMismatch
from src.signature import (
    Compose,
    Counit,
    Dagger,
    Factor,
    Frozen,
    Gen,
    Id,
    ObjectExpr,
    Sym,
    Tensor,
    Term,
    TypedTerm,
    UNIT,
    Unit,
)

BOUNDARY = -1


class Port(NamedTuple):
    node: int
    side: str  # "in" / "out" on the boundary, "dom" / "cod" on a node
    index: int

    @property
    def on_boundary(self) -> bool:
        return self.node == BOUNDARY


def inp(i: int) -> Port:
    return Port(BOUNDARY, "in", i)


def outp(i: int) -> Port:
    return Port(BOUNDARY, "out", i)


class Node(Frozen):
    generator: str
    dagger: bool = False
    dom: ObjectExpr
    cod: ObjectExpr

    @property
    def label(self) -> str:
        return f"{self.generator}†" if self.dagger else self.generator

    def flipped(self) -> "Node":
        return Node(
            generator=self.generator,
            dagger=not self.dagger,
            dom=self.cod,
            cod=self.dom,
        )


class Wire(Frozen):
    a: Port
    b: Port
    base: str


class LoopLabel(Frozen):
    """A closed component: a bare wire loop (``base``) or a canonical word."""

    base: str | None = None
    word: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.base is not None:
            return f"loop({self.base})"
        return "{" + "; ".join(self.word) + "}"


class CanonicalKey(Frozen):
    value: bytes

    def text(self) -> str:
        return self.value.decode("utf-8")


class Diagram(Frozen):
    inputs: ObjectExpr
    outputs: ObjectExpr
    nodes: tuple[Node, ...] = ()
    wires: tuple[Wire, ...] = ()
    loops: tuple[LoopLabel, ...] = ()

    def factor(self, port: Port) -> Factor:
        if port.side == "in":
            return self.inputs.factors[port.index]
        if port.side == "out":
            return self.outputs.factors[port.index]
        node = self.nodes[port.node]
        word = node.dom if port.side == "dom" else node.cod
        return word.factors[port.index]

    def is_source(self, port: Port) -> bool:
        dual = self.factor(port).dual
        if port.side in ("in", "cod"):
            return not dual
        return dual

    def boundary_ports(self) -> list[Port]:
        return [inp(i) for i in range(len(self.inputs))] + [
            outp(j) for j in range(len(self.outputs))
        ]

    def node_ports(self, n: int) -> list[Port]:
        node = self.nodes[n]
        return [Port(n, "dom", i) for i in range(len(node.dom))] + [
            Port(n, "cod", j) for j in range(len(node.cod))
        ]

    def ports(self) -> list[Port]:
        ports = self.boundary_ports()
        for n in range(len(self.nodes)):
            ports.extend(self.node_ports(n))
        return ports

    def mates(self) -> dict[Port, Port]:
        mates: dict[Port, Port] = {}
        for w in self.wires:
            mates[w.a] = w.b
            mates[w.b] = w.a
        return mates

    def loop_counts(self) -> Counter:
        return Counter(label.base for label in self.loops)


def make_diagram(
    inputs: ObjectExpr,
    outputs: ObjectExpr,
    nodes: Iterable[Node],
    pairs: Iterable[tuple[Port, Port]],
    loops: Iterable[LoopLabel] = (),
) -> Diagram:
    """Assemble a diagram, labelling wires and sorting into normal order."""
    skeleton = Diagram(inputs=inputs, outputs=outputs, nodes=tuple(nodes))
    wires = []
    for a, b in pairs:
        fa, fb = skeleton.factor(a), skeleton.factor(b)
        if fa.base != fb.base:
            raise TypeMismatch(f"Wire joins {fa} at {a} with {fb} at {b}")
        a, b = sorted((a, b))
        wires.append(Wire(a=a, b=b, base=fa.base))
    wires.sort(key=lambda w: (w.a, w.b))
    return Diagram(
        inputs=inputs,
        outputs=outputs,
        nodes=skeleton.nodes,
        wires=tuple(wires),
        loops=tuple(sorted(loops, key=str)),
    )


def trace_paths(
    edges: list[tuple[Hashable, Hashable]],
    is_real: Callable[[Hashable], bool],
    base_of: Callable[[Hashable], str],
) -> tuple[list[tuple[Hashable, Hashable]], list[LoopLabel]]:
    """Splice wire segments through virtual points.

    Real points have one incident edge, virtual points two. Every maximal
    path between two real points becomes a wire; cycles made only of
    virtual points become loops.
    """
    incident: dict[Hashable, list[int]] = defaultdict(list)
    for e, (x, y) in enumerate(edges):
        incident[x].append(e)
        incident[y].append(e)

    def other_end(e: int, x: Hashable) -> Hashable:
        a, b = edges[e]
        return b if a == x else a

    def other_edge(point: Hashable, e: int) -> int:
        first, second = incident[point]
        return second if first == e else first

    pairs = []
    visited: set[Hashable] = set()
    for start in list(incident):
        if not is_real(start) or start in visited:
            continue
        e = incident[start][0]
        cur = other_end(e, start)
        while not is_real(cur):
            visited.add(cur)
            e = other_edge(cur, e)
            cur = other_end(e, cur)
        visited.update((start, cur))
        pairs.append((start, cur))

    loops = []
    for start in list(incident):
        if is_real(start) or start in visited:
            continue
        e = incident[start][0]
        cur = start
        while True:
            visited.add(cur)
            cur = other_end(e, cur)
            if cur == start:
                break
            e = other_edge(cur, e)
        loops.append(LoopLabel(base=base_of(start)))
    return pairs, loops


class _Mid(NamedTuple):
    index: int


def compose_diagrams(after: Diagram, before: Diagram) -> Diagram:
    """Plug before's outputs into after's inputs."""
    if before.outputs != after.inputs:
        raise TypeMismatch(
            f"Cannot compose diagrams: {before.outputs} vs {after.inputs}"
        )
    offset = len(before.nodes)

    def from_before(p: Port) -> Hashable:
        return _Mid(p.index) if p.side == "out" else p

    def from_after(p: Port) -> Hashable:
        if p.side == "in":
            return _Mid(p.index)
        if p.on_boundary:
            return p
        return Port(p.node + offset, p.side, p.index)

    edges = [(from_before(w.a), from_before(w.b)) for w in before.wires]
    edges += [(from_after(w.a), from_after(w.b)) for w in after.wires]
    pairs, loops = trace_paths(
        edges,
        is_real=lambda x: isinstance(x, Port),
        base_of=lambda m: before.outputs.factors[m.index].base,
    )
    return make_diagram(
        before.inputs,
        after.outputs,
        before.nodes + after.nodes,
        pairs,
        before.loops + after.loops + tuple(loops),
    )


def tensor_diagrams(left: Diagram, right: Diagram) -> Diagram:
    n_nodes, n_in, n_out = (
        len(left.nodes),
        len(left.inputs),
        len(left.outputs),
    )

    def shift(p: Port) -> Port:
        if p.side == "in":
            return inp(p.index + n_in)
        if p.side == "out":
            return outp(p.index + n_out)
        return Port(p.node + n_nodes, p.side, p.index)

    pairs = [(w.a, w.b) for w in left.wires]
    pairs += [(shift(w.a), shift(w.b)) for w in right.wires]
    return make_diagram(
        left.inputs + right.inputs,
        left.outputs + right.outputs,
        left.nodes + right.nodes,
        pairs,
        left.loops + right.loops,
    )


def flip_diagram(d: Diagram) -> Diagram:
    """Vertical reflection: the diagram of the dagger."""
    swap = {"in": "out", "out": "in", "dom": "cod", "cod": "dom"}

    def flip(p: Port) -> Port:
        return Port(p.node, swap[p.side], p.index)

    return make_diagram(
        d.outputs,
        d.inputs,
        [n.flipped() for n in d.nodes],
        [(flip(w.a), flip(w.b)) for w in d.wires],
        d.loops,
    )


def _primitive(t: Term) -> Diagram:
    if isinstance(t, Gen):
        g = t.generator
        node = Node(generator=g.name, dom=g.dom, cod=g.cod)
        pairs = [(inp(i), Port(0, "dom", i)) for i in range(len(g.dom))]
        pairs += [(Port(0, "cod", j), outp(j)) for j in range(len(g.cod))]
        return make_diagram(g.dom, g.cod, [node], pairs)
    if isinstance(t, Id):
        pairs = [(inp(i), outp(i)) for i in range(len(t.obj))]
        return make_diagram(t.obj, t.obj, [], pairs)
    if isinstance(t, Sym):
        na, nb = len(t.a), len(t.b)
        pairs = [(inp(i), outp(nb + i)) for i in range(na)]
        pairs += [(inp(na + j), outp(j)) for j in range(nb)]
        return make_diagram(t.a + t.b, t.b + t.a, [], pairs)
    if isinstance(t, Unit):
        # factor i of a* pairs with factor i of a
        n = len(t.a)
        pairs = [(outp(i), outp(n + i)) for i in range(n)]
        return make_diagram(UNIT, t.a.dual() + t.a, [], pairs)
    if isinstance(t, Counit):
        n = len(t.a)
        pairs = [(inp(i), inp(n + i)) for i in range(n)]
        return make_diagram(t.a + t.a.dual(), UNIT, [], pairs)
    raise TypeError(f"Not a primitive term: {t!r}")


def _translate(t: Term) -> Diagram:
    if isinstance(t, Compose):
        return compose_diagrams(_translate(t.after), _translate(t.before))
    if isinstance(t, Tensor):
        return tensor_diagrams(_translate(t.left), _translate(t.right))
    if isinstance(t, Dagger):
        return flip_diagram(_translate(t.term))
    return _primitive(t)


def to_diagram(t: TypedTerm | Term) -> Diagram:
    """Compositional translation of a (typechecked) term."""
    term = t.term if isinstance(t, TypedTerm) else t
    return _translate(term)


# Canonical form


def _number_from(
    d: Diagram, mates: dict[Port, Port], root: int, index_of: dict[int, int]
) -> None:
    """Depth-first numbering of the nodes reachable from ``root``."""
    index_of[root] = len(index_of)
    stack = [iter(d.node_ports(root))]
    while stack:
        for p in stack[-1]:
            q = mates[p]
            if not q.on_boundary and q.node not in index_of:
                index_of[q.node] = len(index_of)
                stack.append(iter(d.node_ports(q.node)))
                break
        else:
            stack.pop()


def _describe(p: Port, index_of: dict[int, int]) -> str:
    if p.on_boundary:
        return f"{p.side}{p.index}"
    return f"n{index_of[p.node]}.{p.side[0]}{p.index}"


def _serialize_nodes(
    d: Diagram, mates: dict[Port, Port], index_of: dict[int, int]
) -> list[str]:
    lines = []
    for n in sorted(index_of, key=index_of.get):
        targets = ",".join(
            _describe(mates[p], index_of) for p in d.node_ports(n)
        )
        lines.append(f"n{index_of[n]}={d.nodes[n].label}[{targets}]")
    return lines


def closed_components(d: Diagram) -> list[LoopLabel]:
    """Canonical labels of the node-carrying components off the boundary."""
    mates = d.mates()
    anchored: dict[int, int] = {}
    for p in d.boundary_ports():
        q = mates[p]
        if not q.on_boundary and q.node not in anchored:
            _number_from(d, mates, q.node, anchored)
    return _closed_labels(d, mates, anchored)


def _closed_labels(
    d: Diagram, mates: dict[Port, Port], anchored: dict[int, int]
) -> list[LoopLabel]:
    graph = nx.Graph()
    graph.add_nodes_from(n for n in range(len(d.nodes)) if n not in anchored)
    for w in d.wires:
        if w.a.on_boundary or w.b.on_boundary:
            continue
        if w.a.node in graph and w.b.node in graph:
            graph.add_edge(w.a.node, w.b.node)
    labels = []
    for component in nx.connected_components(graph):
        best = None
        for start in sorted(component):
            index_of: dict[int, int] = {}
            _number_from(d, mates, start, index_of)
            word = tuple(_serialize_nodes(d, mates, index_of))
            if best is None or word < best:
                best = word
        labels.append(LoopLabel(word=best))
    return sorted(labels, key=lambda label: label.word)


def canonical_key(d: Diagram) -> CanonicalKey:
    """A byte string equal for exactly the isomorphic anchored diagrams."""
    mates = d.mates()
    anchored: dict[int, int] = {}
    for p in d.boundary_ports():
        q = mates[p]
        if not q.on_boundary and q.node not in anchored:
            _number_from(d, mates, q.node, anchored)
    lines = [f"dom {d.inputs}", f"cod {d.outputs}"]
    lines += [
        f"{_describe(p, anchored)}-{_describe(mates[p], anchored)}"
        for p in d.boundary_ports()
    ]
    lines += _serialize_nodes(d, mates, anchored)
    lines += sorted(str(label) for label in d.loops)
    lines += [str(label) for label in _closed_labels(d, mates, anchored)]
    return CanonicalKey(value="\n".join(lines).encode("utf-8"))


def key_of(t: TypedTerm | Term) -> CanonicalKey:
    return canonical_key(to_diagram(t))


def equal_diagrams(a: TypedTerm, b: TypedTerm) -> bool:
    """Equality in the free compact closed category over the signature."""
    if a.dom != b.dom or a.cod != b.cod:
        raise TypeMismatch(
            f"Cannot compare {a.dom} → {a.cod} with {b.dom} → {b.cod}"
        )
    logger.debug("Comparing canonical keys")
    return key_of(a) == key_of(b)
