"""Subdivision verification, rule extraction, and combinatorial iteration.

A complex subdivides another when its vertices and edges embed (each base edge
becoming a path), every finer face sits inside one base face, and the induced
map is cellular: each finer face's boundary maps exactly onto the boundary of
one base face.  The extracted rule replaces each tile type by the pattern of
finer faces found inside it; iteration substitutes patterns recursively and is
checked against powers of the census matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import angles as A
from .complexes import CWComplex2, GraphEdge
from .errors import ConsistencyFailure, LevelTooDeep
from .tree import JuliaPoint


# ---------------------------------------------------------------------------
# subdivision check
# ---------------------------------------------------------------------------


@dataclass
class SubdivisionEmbedding:
    vertex_map: dict[int, int]
    edge_paths: dict[int, list[tuple[int, int]]]  # base edge -> [(c1 edge, +1/-1 along base)]
    edge_class: dict[int, tuple]  # c1 edge -> ("base", e, i, dir) | ("interior", face)
    containment: dict[int, int]  # c1 face -> base face
    image_face: dict[int, int]  # c1 face -> base face it maps onto
    image_offset: dict[int, int]  # rotation aligning the c1 face image with that face


@dataclass
class SubdivisionFailure:
    reason: str
    cell: tuple

    def __bool__(self):
        return False


def _image_dart(C: CWComplex2, C1: CWComplex2, dart: int, subdivision_map: str) -> int | None:
    if subdivision_map == "identity":
        return dart
    e = C1.graph.edges[dart >> 1]
    dend = C1.graph.dendrites[e.side]
    pu, pw = (e.u_point, e.w_point) if dart & 1 == 0 else (e.w_point, e.u_point)
    fu, fw = dend.image(pu), dend.image(pw)
    if fu == fw:
        return None
    for i, be in enumerate(C.graph.edges):
        if be.side != e.side:
            continue
        if (be.u_point, be.w_point) == (fu, fw):
            return 2 * i
        if (be.u_point, be.w_point) == (fw, fu):
            return 2 * i + 1
    return None


def check_subdivision(C: CWComplex2, C1: CWComplex2, subdivision_map: str = "doubling"):
    """Decide whether C1 subdivides C and the map is a subdivision map.

    The map is cellular when every finer face's boundary maps exactly onto the
    boundary cycle of one base face.  `subdivision_map` selects the doubling of
    classes (the mating) or the identity (for self-subdivision sanity checks).
    Returns (True, SubdivisionEmbedding) or (False, SubdivisionFailure with the
    first failing cell).
    """
    # vertices: every base vertex class embeds, injectively
    c1_vertex_of_node = {}
    for j, v1 in enumerate(C1.graph.vertices):
        for node in v1.constituents:
            c1_vertex_of_node[node] = j
    vertex_map: dict[int, int] = {}
    for i, v in enumerate(C.graph.vertices):
        targets = {c1_vertex_of_node.get(n) for n in v.constituents}
        if None in targets or len(targets) != 1:
            return False, SubdivisionFailure("vertex-embedding", ("vertex", i))
        vertex_map[i] = targets.pop()
    if len(set(vertex_map.values())) != len(vertex_map):
        return False, SubdivisionFailure("vertex-pinching", ("vertices", vertex_map))

    # edges: each base edge is a path of C1 edges
    c1_points: dict[str, list[JuliaPoint]] = {}
    for e1 in C1.graph.edges:
        c1_points.setdefault(e1.side, [])
    for j, v1 in enumerate(C1.graph.vertices):
        for side, p in v1.constituents:
            c1_points.setdefault(side, []).append(p)
    c1_edge_lookup: dict[tuple, tuple[int, int]] = {}
    for k, e1 in enumerate(C1.graph.edges):
        c1_edge_lookup[(e1.side, e1.u_point, e1.w_point)] = (k, 1)
        c1_edge_lookup[(e1.side, e1.w_point, e1.u_point)] = (k, -1)

    edge_paths: dict[int, list[tuple[int, int]]] = {}
    edge_class: dict[int, tuple] = {}
    for i, e in enumerate(C.graph.edges):
        dend = C.graph.dendrites[e.side]
        pts = [
            p
            for p in set(c1_points.get(e.side, []))
            if p == e.u_point or p == e.w_point or dend.between(JuliaPoint(dend.theta, p.angles), JuliaPoint(dend.theta, e.u_point.angles), JuliaPoint(dend.theta, e.w_point.angles))
        ]
        if e.u_point not in pts or e.w_point not in pts:
            return False, SubdivisionFailure("edge-endpoints", ("edge", i))

        def rank(r: JuliaPoint) -> int:
            return sum(
                1
                for s in pts
                if s != r and (s == e.u_point or dend.between(s, e.u_point, r))
            )

        chain = sorted(pts, key=rank)
        path = []
        ok = True
        for a, b in zip(chain, chain[1:]):
            hit = c1_edge_lookup.get((e.side, a, b))
            if hit is None:
                ok = False
                break
            path.append(hit)
        if not ok:
            return False, SubdivisionFailure("edge-path", ("edge", i))
        edge_paths[i] = path
        for seg_idx, (k, direction) in enumerate(path):
            edge_class[k] = ("base", i, seg_idx, direction)

    for k in range(len(C1.graph.edges)):
        if k not in edge_class:
            edge_class[k] = ("interior", None)

    # no pinching: an interior point of a base-edge path may belong to exactly
    # one path and must not be the image of a base vertex (Theorem witnesses
    # show up precisely as such identifications in the preimage complex)
    vertex_images = set(vertex_map.values())
    interior_claims: dict[int, set[int]] = {}
    c1_vertex_lookup: dict[tuple, int] = {}
    for j, v1 in enumerate(C1.graph.vertices):
        for node in v1.constituents:
            c1_vertex_lookup[node] = j
    for i, path in edge_paths.items():
        e = C.graph.edges[i]
        for k, direction in path[:-1]:
            e1 = C1.graph.edges[k]
            endpoint = e1.w_point if direction == 1 else e1.u_point
            j = c1_vertex_lookup[(e.side, endpoint)]
            interior_claims.setdefault(j, set()).add(i)
    for j, claims in interior_claims.items():
        if len(claims) > 1 or j in vertex_images:
            return False, SubdivisionFailure("edge-pinching", ("vertex1", j))

    # faces: containment (seeded by on-base darts, propagated across interior
    # edges) and cellularity
    containment: dict[int, int] = {}
    owners_of: dict[int, set[int]] = {}
    for fi, cyc in enumerate(C1.faces):
        owners = set()
        for d in cyc:
            cls = edge_class[d >> 1]
            if cls[0] != "base":
                continue
            base_e, _, direction = cls[1], cls[2], cls[3]
            bit = d & 1
            along = direction if bit == 0 else -direction
            base_dart = 2 * base_e + (0 if along == 1 else 1)
            owners.add(C.face_of_dart(base_dart))
        owners_of[fi] = owners
    changed = True
    while changed:
        changed = False
        for k, cls in edge_class.items():
            if cls[0] != "interior":
                continue
            fa = C1.face_of_dart(2 * k)
            fb = C1.face_of_dart(2 * k + 1)
            merged = owners_of[fa] | owners_of[fb]
            for f in (fa, fb):
                if merged - owners_of[f]:
                    owners_of[f] = set(merged)
                    changed = True
    for fi, cyc in enumerate(C1.faces):
        owners = owners_of[fi]
        if not owners:
            if len(C.faces) == 1:
                owners = {0}
            else:
                return False, SubdivisionFailure("face-floating", ("face", fi))
        if len(owners) != 1:
            return False, SubdivisionFailure("face-containment", ("face", fi))
        containment[fi] = next(iter(owners))

    image_face: dict[int, int] = {}
    image_offset: dict[int, int] = {}
    for fi, cyc in enumerate(C1.faces):
        imgs = []
        for d in cyc:
            u = _image_dart(C, C1, d, subdivision_map)
            if u is None:
                return False, SubdivisionFailure("edge-image", ("dart", d))
            imgs.append(u)
        g = C.face_of_dart(imgs[0])
        gcyc = C.faces[g]
        n = len(gcyc)
        if len(imgs) != n:
            return False, SubdivisionFailure("cellularity-size", ("face", fi))
        offset = None
        for s in range(n):
            if all(imgs[(j + s) % n] == gcyc[j] for j in range(n)):
                offset = s
                break
        if offset is None:
            return False, SubdivisionFailure("cellularity-cycle", ("face", fi))
        image_face[fi] = g
        image_offset[fi] = offset

    for k, cls in edge_class.items():
        if cls[0] == "interior":
            e1 = C1.graph.edges[k]
            fa = containment[C1.face_of_dart(2 * k)]
            fb = containment[C1.face_of_dart(2 * k + 1)]
            if fa != fb:
                return False, SubdivisionFailure("interior-edge", ("edge1", k))
            edge_class[k] = ("interior", fa)

    return True, SubdivisionEmbedding(
        vertex_map=vertex_map,
        edge_paths=edge_paths,
        edge_class=edge_class,
        containment=containment,
        image_face=image_face,
        image_offset=image_offset,
    )


# ---------------------------------------------------------------------------
# rule data
# ---------------------------------------------------------------------------

Letter = tuple[int, int]  # (edge type, direction bit relative to the type edge)


@dataclass(frozen=True)
class TilePattern:
    """Replacement pattern of one tile type.

    `faces` hold boundary refs ("b", k, j) for segment j of boundary position k
    (always traversed forward along that position) and ("i", loc, bit) for
    interior edges; refs are rotated to align with the image type's word.
    """

    faces: tuple[tuple[int, tuple[tuple, ...]], ...]  # (image type, refs)
    interior_edges: tuple[Letter, ...]  # loc -> (edge type, flip bit)


@dataclass
class SubdivisionRuleData:
    tile_names: tuple[str, ...]
    tile_words: tuple[tuple[Letter, ...], ...]
    patterns: tuple[TilePattern, ...]
    edge_words: tuple[tuple[Letter, ...], ...]  # per edge type
    matrix: tuple[tuple[int, ...], ...]
    base: "ExpandedComplex"
    ambiguous_words: bool = False

    def to_json_dict(self) -> dict:
        return {
            "tile_types": [
                {
                    "name": self.tile_names[i],
                    "boundary_word": [list(l) for l in self.tile_words[i]],
                    "replacement_census": {
                        self.tile_names[j]: self.matrix[i][j]
                        for j in range(len(self.tile_names))
                        if self.matrix[i][j]
                    },
                }
                for i in range(len(self.tile_names))
            ],
            "edge_types": [
                {"id": i, "subdivision_word": [list(l) for l in w]}
                for i, w in enumerate(self.edge_words)
            ],
            "matrix": [list(r) for r in self.matrix],
        }


@dataclass
class ExpandedComplex:
    """Explicit complex at some subdivision level (faces with typed boundary cycles)."""

    level: int
    edge_types: dict = field(repr=False)  # edge id -> (type, flip)
    faces: list = field(repr=False)  # (tile type, cycle of (edge id, bit))
    n_vertices: int = 0

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.n_vertices, len(self.edge_types), len(self.faces))

    @property
    def face_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for _, c in self.faces)

    def census(self, n_types: int) -> tuple[int, ...]:
        out = [0] * n_types
        for t, _ in self.faces:
            out[t] += 1
        return tuple(out)

    def to_json_dict(self) -> dict:
        v, e, f = self.counts
        return {
            "level": self.level,
            "V": v,
            "E": e,
            "F": f,
            "face_sizes": sorted(self.face_sizes),
        }


def _validate_expanded(x: ExpandedComplex) -> None:
    use: dict = {}
    for _, cyc in x.faces:
        for eid, bit in cyc:
            use.setdefault(eid, [0, 0])[bit] += 1
    for eid in x.edge_types:
        if use.get(eid, [0, 0])[0] + use.get(eid, [0, 0])[1] != 2:
            raise ConsistencyFailure(f"edge {eid} not used exactly twice")
    parent: dict = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        parent[find(a)] = find(b)

    def tail(eid, bit):
        return (eid, bit)

    def head(eid, bit):
        return (eid, 1 - bit)

    for _, cyc in x.faces:
        for j in range(len(cyc)):
            union(head(*cyc[j]), tail(*cyc[(j + 1) % len(cyc)]))
    x.n_vertices = len({find((eid, end)) for eid in x.edge_types for end in (0, 1)})
    V, E, F = x.counts
    if V - E + F != 2:
        raise ConsistencyFailure(f"expanded level {x.level}: V-E+F = {V - E + F}")


def _canonical_rotation(letters: list[Letter]) -> int:
    n = len(letters)
    best, best_r = None, 0
    for r in range(n):
        w = tuple(letters[(r + j) % n] for j in range(n))
        if best is None or w < best:
            best, best_r = w, r
    return best_r


def extract_rule(
    C: CWComplex2,
    C1: CWComplex2,
    emb: SubdivisionEmbedding,
    subdivision_map: str = "doubling",
) -> SubdivisionRuleData:
    """Read the combinatorial replacement rule off a verified subdivision pair."""
    n_edges = len(C.graph.edges)
    # edge words: letters along each base edge's own orientation
    edge_words: list[tuple[Letter, ...]] = []
    for e in range(n_edges):
        word = []
        for k, direction in emb.edge_paths[e]:
            d1 = 2 * k if direction == 1 else 2 * k + 1
            u = _image_dart(C, C1, d1, subdivision_map)
            word.append((u >> 1, u & 1))
        edge_words.append(tuple(word))

    # rotate base faces into canonical alignment
    aligned: list[tuple[int, ...]] = []
    words: list[tuple[Letter, ...]] = []
    for cyc in C.faces:
        letters = [(d >> 1, d & 1) for d in cyc]
        r = _canonical_rotation(letters)
        aligned.append(tuple(cyc[r:] + cyc[:r]))
        words.append(tuple(letters[r:] + letters[:r]))

    # group faces into types: same word AND same replacement signature
    c1_faces_in: dict[int, list[int]] = {}
    for fi, owner in emb.containment.items():
        c1_faces_in.setdefault(owner, []).append(fi)

    def pattern_data(f: int, type_of_face: list[int]):
        cyc = aligned[f]
        posmap = {(d >> 1, d & 1): k for k, d in enumerate(cyc)}
        interior_local: dict[int, int] = {}
        pat_faces = []
        for fi in sorted(c1_faces_in.get(f, ())):
            refs = []
            c1cyc = C1.faces[fi]
            for d in c1cyc:
                k1 = d >> 1
                cls = emb.edge_class[k1]
                if cls[0] == "base":
                    base_e, i, direction = cls[1], cls[2], cls[3]
                    along = direction if (d & 1) == 0 else -direction
                    k = posmap[(base_e, 0 if along == 1 else 1)]
                    m = len(emb.edge_paths[base_e])
                    j = i if along == 1 else m - 1 - i
                    refs.append(("b", k, j))
                else:
                    if k1 not in interior_local:
                        interior_local[k1] = len(interior_local)
                    refs.append(("i", interior_local[k1], d & 1))
            # rotate so position j maps onto the image face's aligned cycle position j
            imgs = [_image_dart(C, C1, d, subdivision_map) for d in c1cyc]
            g = emb.image_face[fi]
            gcyc = aligned[g]
            n = len(gcyc)
            offset = next(
                s for s in range(n) if all(imgs[(j + s) % n] == gcyc[j] for j in range(n))
            )
            refs = tuple(refs[offset:] + refs[:offset])
            pat_faces.append((type_of_face[g], refs))
        interior = [None] * len(interior_local)
        for k1, loc in interior_local.items():
            u = _image_dart(C, C1, 2 * k1, subdivision_map)
            interior[loc] = (u >> 1, u & 1)
        return tuple(sorted(pat_faces)), tuple(interior)

    # refine type groups to a fixpoint (patterns reference image types)
    type_of_face = [0] * len(C.faces)
    groups: dict[tuple, int] = {}
    for f in range(len(C.faces)):
        key = words[f]
        if key not in groups:
            groups[key] = len(groups)
        type_of_face[f] = groups[key]
    ambiguous = False
    for _ in range(len(C.faces) + 1):
        sigs = {}
        new_type = [0] * len(C.faces)
        for f in range(len(C.faces)):
            sig = (words[f], pattern_data(f, type_of_face))
            if sig not in sigs:
                sigs[sig] = len(sigs)
            new_type[f] = sigs[sig]
        if new_type == type_of_face:
            break
        seen_words = {}
        for f in range(len(C.faces)):
            if words[f] in seen_words and new_type[f] != seen_words[words[f]]:
                ambiguous = True
            seen_words.setdefault(words[f], new_type[f])
        type_of_face = new_type

    n_types = len(set(type_of_face))
    rep_face = {}
    for f in range(len(C.faces)):
        rep_face.setdefault(type_of_face[f], f)
    tile_words = tuple(words[rep_face[t]] for t in range(n_types))
    patterns = []
    matrix = [[0] * n_types for _ in range(n_types)]
    for t in range(n_types):
        pfaces, interior = pattern_data(rep_face[t], type_of_face)
        patterns.append(TilePattern(faces=pfaces, interior_edges=interior))
        for pt, _ in pfaces:
            matrix[t][pt] += 1

    names = []
    for t in range(n_types):
        base = f"{len(tile_words[t])}-gon"
        k = sum(1 for s in names if s == base or s.startswith(base + "#"))
        names.append(base if k == 0 else f"{base}#{k + 1}")

    base_complex = ExpandedComplex(
        level=0,
        edge_types={e: (e, 0) for e in range(n_edges)},
        faces=[
            (type_of_face[f], [(d >> 1, d & 1) for d in aligned[f]])
            for f in range(len(C.faces))
        ],
    )
    _validate_expanded(base_complex)
    if base_complex.n_vertices != len(C.graph.vertices):
        raise ConsistencyFailure("base complex vertex count mismatch")

    return SubdivisionRuleData(
        tile_names=tuple(names),
        tile_words=tile_words,
        patterns=tuple(patterns),
        edge_words=tuple(edge_words),
        matrix=tuple(tuple(r) for r in matrix),
        base=base_complex,
        ambiguous_words=ambiguous,
    )


# ---------------------------------------------------------------------------
# iteration
# ---------------------------------------------------------------------------


def _expand_once(rule: SubdivisionRuleData, x: ExpandedComplex) -> ExpandedComplex:
    seg_ids: dict = {}
    new_edges: dict = {}
    for eid, (t, flip) in x.edge_types.items():
        word = rule.edge_words[t]
        m = len(word)
        for j in range(m):
            tt, ff = word[j] if not flip else (word[m - 1 - j][0], word[m - 1 - j][1] ^ 1)
            sid = ("seg", eid, j)
            seg_ids[(eid, j)] = sid
            new_edges[sid] = (tt, ff)

    new_faces = []
    for f_idx, (t, cyc) in enumerate(x.faces):
        word_lengths = [len(rule.edge_words[x.edge_types[eid][0]]) for eid, _ in cyc]
        pat = rule.patterns[t]
        for p_idx, (ptype, refs) in enumerate(pat.faces):
            out = []
            for ref in refs:
                if ref[0] == "b":
                    _, k, j = ref
                    eid, bit = cyc[k]
                    m = word_lengths[k]
                    jj = j if bit == 0 else m - 1 - j
                    out.append((seg_ids[(eid, jj)], bit))
                else:
                    _, loc, bit = ref
                    iid = ("ie", f_idx, loc)
                    if iid not in new_edges:
                        new_edges[iid] = rule.patterns[t].interior_edges[loc]
                    out.append((iid, bit))
            new_faces.append((ptype, out))

    out = ExpandedComplex(level=x.level + 1, edge_types=new_edges, faces=new_faces)
    _validate_expanded(out)
    return out


def census_sequence(rule: SubdivisionRuleData, n: int) -> list[tuple[int, ...]]:
    """Tile counts per type for levels 0..n via the census matrix."""
    counts = list(rule.base.census(len(rule.tile_names)))
    out = [tuple(counts)]
    for _ in range(n):
        counts = [
            sum(counts[i] * rule.matrix[i][j] for i in range(len(counts)))
            for j in range(len(counts))
        ]
        out.append(tuple(counts))
    return out


def iterate_rule(
    rule: SubdivisionRuleData, n: int, expansion_bound: int = 6
) -> tuple[list[tuple[int, ...]], list[ExpandedComplex]]:
    """Census sequence for levels 0..n plus explicit complexes up to the bound.

    Explicit expansion censuses are cross-checked against the matrix powers.
    """
    if n < 0:
        raise ValueError("level must be non-negative")
    censuses = census_sequence(rule, n)
    complexes = [rule.base]
    for level in range(1, min(n, expansion_bound) + 1):
        complexes.append(_expand_once(rule, complexes[-1]))
        if complexes[-1].census(len(rule.tile_names)) != censuses[level]:
            raise ConsistencyFailure(f"explicit census at level {level} disagrees with matrix")
    return censuses, complexes


def expanded_complex_at_level(
    rule: SubdivisionRuleData, level: int, expansion_bound: int = 6
) -> ExpandedComplex:
    if level > expansion_bound:
        raise LevelTooDeep(f"level {level} exceeds expansion bound {expansion_bound}")
    _, complexes = iterate_rule(rule, level, expansion_bound)
    return complexes[level]
