"""Board pictures of LUCI diagrams: a parseable text grid and SVG.

Text grid legend, one two-character cell per lattice site:

* ``Xq``, ``ZC``, ... a shape rooted here (basis letter + glyph);
* ``..`` an unused measure qubit, `` .`` a data qubit;
* ``##`` a broken or discarded qubit, blank outside the patch.

When two operators of one basis could own the same cell, the board carries a
``@ x y id`` line naming the operator.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .heuristic import FORMAT_HEADER, DiagramError, LuciDiagram

BASIS_COLOR = {"X": "#c0392b", "Z": "#2471a3"}


def _meta_lines(diag: LuciDiagram) -> list:
    # reuse the diagram format's header so both parse the same way
    return [ln for ln in diag.to_text().splitlines() if ln.startswith(("LUCI", "#"))]


def _owners(diag: LuciDiagram) -> dict:
    """(root, glyph, basis) -> operator ids with such a shape."""
    out: dict = {}
    for i, lst in diag.instance.catalog.items():
        for s in lst:
            out.setdefault((s.measure_qubit, s.glyph, s.basis), set()).add(i)
    return out


def render_text(diag: LuciDiagram) -> str:
    patch = diag.code.patch
    n = 2 * patch.d + 1
    live = set(diag.code.qubits)
    owners = _owners(diag)
    lines = _meta_lines(diag)
    for t, board in enumerate(diag.boards):
        lines.append("")
        lines.append(f"board {t}")
        cells = {}
        notes = []
        for i, s in sorted(board.items()):
            cells[s.measure_qubit] = s.basis + s.glyph
            if len(owners[(s.measure_qubit, s.glyph, s.basis)]) > 1:
                notes.append(f"@ {s.measure_qubit[0]} {s.measure_qubit[1]} {i}")
        for y in range(n):
            row = []
            for x in range(n):
                q = (x, y)
                if q in cells:
                    row.append(cells[q])
                elif q not in patch.roles:
                    row.append("  ")
                elif q not in live:
                    row.append("##")
                elif patch.is_data(q):
                    row.append(" .")
                else:
                    row.append("..")
            lines.append(" ".join(row).rstrip())
        lines.extend(notes)
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> LuciDiagram:
    """Inverse of ``render_text``."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(FORMAT_HEADER):
        raise DiagramError("missing LUCI header")
    head = []
    for ln in lines:  # header is the leading block; grid rows may start with "##"
        if not ln.startswith(("LUCI", "#")):
            break
        head.append(ln)
    empty = LuciDiagram.from_text("\n".join(head) + "\n")
    owners = _owners(empty)
    picks = []
    t = None
    y = 0
    pending: dict = {}
    forced: dict = {}

    def flush():
        for (x, yy), (basis, glyph) in pending.items():
            ids = owners.get(((x, yy), glyph, basis), set())
            i = forced.get((x, yy))
            if i is None:
                if len(ids) != 1:
                    raise DiagramError(f"cell ({x},{yy}) of board {t} is ambiguous or unknown")
                (i,) = ids
            elif i not in ids:
                raise DiagramError(f"operator {i} has no shape {basis}{glyph} at ({x},{yy})")
            picks.append(f"{t} {i} {x} {yy} {glyph} {basis}")

    n = 2 * empty.code.patch.d + 1
    for ln in lines[len(head):]:
        if ln.startswith("board "):
            if t is not None:
                flush()
            t, y, pending, forced = int(ln.split()[1]), 0, {}, {}
        elif ln.startswith("@ "):
            _, x, yy, i = ln.split()
            forced[(int(x), int(yy))] = int(i)
        elif t is not None and y < n:
            for x in range(n):
                cell = ln[3 * x:3 * x + 2]
                if len(cell) == 2 and cell[0] in "XZ":
                    pending[(x, y)] = (cell[0], cell[1])
            y += 1
    if t is not None:
        flush()
    body = "\n".join(head + [""] + picks) + "\n"
    return LuciDiagram.from_text(body)


def render_svg(diag: LuciDiagram, cell: int = 24) -> str:
    """One panel per board; layer-one CNOTs thin, crossbeams thick, roots ringed."""
    patch = diag.code.patch
    n = 2 * patch.d + 1
    size = n * cell
    gap = cell
    width = diag.T * (size + gap) + gap
    height = size + 2 * gap
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width),
                     height=str(height), viewBox=f"0 0 {width} {height}")
    live = set(diag.code.qubits)

    def at(ox, q):
        return ox + q[0] * cell + cell / 2, gap + q[1] * cell + cell / 2

    for t, board in enumerate(diag.boards):
        ox = gap + t * (size + gap)
        g = ET.SubElement(svg, "g", id=f"board-{t}")
        label = ET.SubElement(g, "text", x=str(ox), y=str(gap * 0.7), fill="#333")
        label.set("font-size", str(cell * 0.6))
        label.text = f"board {t}"
        for s in board.values():
            col = BASIS_COLOR[s.basis]
            for k, layer in enumerate(s.layers):
                for c, u in layer:
                    (x1, y1), (x2, y2) = at(ox, c), at(ox, u)
                    ET.SubElement(g, "line", x1=f"{x1:g}", y1=f"{y1:g}", x2=f"{x2:g}",
                                  y2=f"{y2:g}", stroke=col).set("stroke-width", "2" if k == 0 else "5")
        roots = {s.measure_qubit: s.basis for s in board.values()}
        for q in patch.qubits:
            x, y = at(ox, q)
            if q not in live:
                fill = "#000"
            else:
                fill = "#fff" if patch.is_data(q) else "#ddd"
            circ = ET.SubElement(g, "circle", cx=f"{x:g}", cy=f"{y:g}", r=f"{cell * 0.22:g}", fill=fill,
                                 stroke=BASIS_COLOR.get(roots.get(q), "#888"))
            circ.set("stroke-width", "3" if q in roots else "1")
    return ET.tostring(svg, encoding="unicode") + "\n"
