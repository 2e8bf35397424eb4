from src.diagram import Diagram, Port


def _dot_id(p: Port) -> str:
    if p.on_boundary:
        return f"{p.side}{p.index}"
    return f"n{p.node}"


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(d: Diagram, name: str = "diagram") -> str:
    """Render a diagram as a dot digraph.

    Inputs sit on the top rank and outputs on the bottom rank; generator
    occurrences are boxes and every wire is an edge from its source end to
    its target end, labelled by its base object.
    """
    lines = [f"digraph {_quote(name)} {{", "  rankdir=TB;"]
    lines.append("  node [fontname=Helvetica];")
    if len(d.inputs):
        lines.append("  { rank=source;")
        for i, factor in enumerate(d.inputs.factors):
            lines.append(
                f"    in{i} [shape=plaintext, label={_quote(str(factor))}];"
            )
        lines.append("  }")
    if len(d.outputs):
        lines.append("  { rank=sink;")
        for j, factor in enumerate(d.outputs.factors):
            lines.append(
                f"    out{j} [shape=plaintext, label={_quote(str(factor))}];"
            )
        lines.append("  }")
    for k, node in enumerate(d.nodes):
        lines.append(f"  n{k} [shape=box, label={_quote(node.label)}];")
    for w in d.wires:
        source, target = (w.a, w.b) if d.is_source(w.a) else (w.b, w.a)
        lines.append(
            f"  {_dot_id(source)} -> {_dot_id(target)} "
            f"[label={_quote(w.base)}];"
        )
    for k, label in enumerate(d.loops):
        base = _quote(label.base or "")
        lines.append(f"  loop{k} [shape=circle, label={base}];")
        lines.append(f"  loop{k} -> loop{k} [label={base}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
