"""Deterministic renderers: canonical JSON (normative), DOT and SVG (advisory)."""
from __future__ import annotations

import math
from fractions import Fraction

from . import angles as A
from .complexes import CWComplex2
from .mating import ALPHA, position
from .rules import ExpandedComplex
from .tree import HubbardTree
from .workspace import dumps_canonical


def to_json(artifact) -> str:
    if hasattr(artifact, "to_json_dict"):
        return dumps_canonical(artifact.to_json_dict())
    return dumps_canonical(artifact)


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------


def _angle_label(angles) -> str:
    return "{" + ",".join(A.format_angle(t) for t in angles) + "}"


def tree_to_dot(tree: HubbardTree) -> str:
    lines = ["graph hubbard_tree {", '  node [shape=circle fontsize=10];']
    for i, v in enumerate(tree.vertices):
        shape = "doublecircle" if i in tree.branch_set else "circle"
        lines.append(f'  v{i} [label="{_angle_label(v.angles)}" shape={shape}];')
    for i, j in tree.edges:
        lines.append(f"  v{i} -- v{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def complex_to_dot(complex_: CWComplex2) -> str:
    g = complex_.graph
    lines = ["graph complex {", "  node [shape=circle fontsize=10];"]
    for i, v in enumerate(g.vertices):
        label = "|".join(
            ("a" if s == ALPHA else "b") + _angle_label(p.angles) for s, p in v.constituents
        )
        lines.append(f'  v{i} [label="{label}"];')
    for e in g.edges:
        lines.append(f'  v{e.u} -- v{e.w} [label="{e.side[0]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def expanded_to_dot(x: ExpandedComplex) -> str:
    edge_ids = sorted(x.edge_types, key=repr)
    lines = [f"graph level{x.level} {{", "  node [shape=point];"]
    names: dict = {}

    def node(v) -> str:
        if v not in names:
            names[v] = f"n{len(names)}"
        return names[v]

    # endpoints are union-find classes over edge ends; rebuild them here
    parent: dict = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for _, cyc in x.faces:
        for j in range(len(cyc)):
            e1, b1 = cyc[j]
            e2, b2 = cyc[(j + 1) % len(cyc)]
            parent[find((e1, 1 - b1))] = find((e2, b2))
    for eid in edge_ids:
        a = node(find((eid, 0)))
        b = node(find((eid, 1)))
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_SVG_HEAD = (
    '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.2 -1.2 2.4 2.4" '
    'width="480" height="480">\n'
)


def _xy(theta: Fraction, radius: float) -> tuple[float, float]:
    a = 2 * math.pi * float(theta)
    return (radius * math.cos(a), -radius * math.sin(a))


def _svg_graph(points: list[tuple[float, float]], segments: list[tuple[int, int]], labels: list[str]) -> str:
    parts = [_SVG_HEAD, '<circle cx="0" cy="0" r="1" fill="none" stroke="#ccc" stroke-width="0.01"/>\n']
    for i, j in segments:
        (x1, y1), (x2, y2) = points[i], points[j]
        parts.append(
            f'<line x1="{x1:.4f}" y1="{y1:.4f}" x2="{x2:.4f}" y2="{y2:.4f}" '
            'stroke="#333" stroke-width="0.012"/>\n'
        )
    for (x, y), lab in zip(points, labels):
        parts.append(f'<circle cx="{x:.4f}" cy="{y:.4f}" r="0.025" fill="#c33"/>\n')
        parts.append(
            f'<text x="{x + 0.03:.4f}" y="{y - 0.03:.4f}" font-size="0.06">{lab}</text>\n'
        )
    parts.append("</svg>\n")
    return "".join(parts)


def tree_to_svg(tree: HubbardTree) -> str:
    # radial layout: angle = minimal external angle, radius by valence class
    pts = []
    labels = []
    for i, v in enumerate(tree.vertices):
        r = 0.95 if len(tree.rotation[i]) == 1 else 0.45 + 0.1 * min(len(v.angles), 3)
        pts.append(_xy(v.min_angle, r))
        labels.append(_angle_label(v.angles))
    return _svg_graph(pts, list(tree.edges), labels)


def complex_to_svg(complex_: CWComplex2) -> str:
    g = complex_.graph
    pts = []
    labels = []
    for i, v in enumerate(g.vertices):
        spots = sorted({position(s, t) for s, p in v.constituents for t in p.angles})
        merged = len(v.constituents) > 1 or v.tau is not None
        r = 1.0 if merged else 0.55
        pts.append(_xy(spots[0], r))
        labels.append("|".join(("a" if s == ALPHA else "b") + _angle_label(p.angles) for s, p in v.constituents))
    segs = [(e.u, e.w) for e in g.edges]
    return _svg_graph(pts, segs, labels)


def expanded_to_svg(x: ExpandedComplex) -> str:
    # advisory layout on a circle in deterministic edge order
    parent: dict = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for _, cyc in x.faces:
        for j in range(len(cyc)):
            e1, b1 = cyc[j]
            e2, b2 = cyc[(j + 1) % len(cyc)]
            parent[find((e1, 1 - b1))] = find((e2, b2))
    classes = sorted({repr(find((eid, end))) for eid in x.edge_types for end in (0, 1)})
    index = {c: i for i, c in enumerate(classes)}
    n = max(len(classes), 1)
    pts = [_xy(Fraction(i, n), 0.9) for i in range(n)]
    segs = []
    for eid in sorted(x.edge_types, key=repr):
        segs.append((index[repr(find((eid, 0)))], index[repr(find((eid, 1)))]))
    return _svg_graph(pts, segs, [""] * n)
