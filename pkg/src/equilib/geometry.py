"""Simplicial and polyhedral subdivision machinery over exact rationals.

Triangulations and polyhedral complexes of (subsets of) simplices, with the
query operations the perturbation constructions rely on: carriers, closed
stars, simplicial neighborhoods, barycentric-coordinate maps, star bumps,
hyperplane-extension subdivisions, regular triangulations from height
functions, generalized barycentric subdivision, the envelope-line (EL)
refinement with its convex piecewise-linear certificate, and refinement of a
complex into a triangulation without new vertices.

All ambient coordinates are rational; simplices may live in a proper affine
subspace (e.g. probability simplices), in which case computations run in an
exact affine chart.  Arrangement-based operations are intended for ambient
dimension <= 4; they are exponential in the hyperplane count by design.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .linalg import (
    ONE,
    ZERO,
    Chart,
    determinant,
    dot,
    frac_vec,
    linf_dist,
    linprog,
    matrix_rank,
    nullspace,
    solve_linear,
    vec_sub,
    vertex_enumeration,
)

Point = tuple[Fraction, ...]
Face = tuple[int, ...]  # sorted vertex indices


class GeometryError(ValueError):
    pass


def as_point(p: Sequence) -> Point:
    return tuple(Fraction(x) for x in p)


def barycentric_in(vertices: Sequence[Point], point: Point) -> Optional[list[Fraction]]:
    """Affine weights of `point` over affinely independent `vertices`.

    Returns None when the point is outside the affine hull.  Weights may be
    negative; convexity is the caller's test.
    """
    if not vertices:
        return None
    ambient = len(vertices[0])
    A = [[vertices[j][i] for j in range(len(vertices))] for i in range(ambient)]
    A.append([ONE] * len(vertices))
    b = list(point) + [ONE]
    return solve_linear(A, b)


@dataclass(frozen=True)
class Simplex:
    """Affinely independent rational points (ordered)."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        pts = self.vertices
        if not pts:
            raise GeometryError("empty simplex")
        diffs = [list(vec_sub(p, pts[0])) for p in pts[1:]]
        if matrix_rank(diffs) != len(pts) - 1:
            raise GeometryError("simplex vertices are affinely dependent")

    @staticmethod
    def of(points: Iterable[Sequence]) -> "Simplex":
        return Simplex(tuple(as_point(p) for p in points))

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def barycenter(self) -> Point:
        n = len(self.vertices)
        return tuple(
            sum((v[i] for v in self.vertices), ZERO) / n
            for i in range(len(self.vertices[0]))
        )

    def barycentric(self, point: Sequence) -> Optional[list[Fraction]]:
        return barycentric_in(self.vertices, as_point(point))

    def contains(self, point: Sequence) -> bool:
        w = self.barycentric(point)
        return w is not None and all(x >= 0 for x in w)

    def strictly_contains(self, point: Sequence) -> bool:
        """Relative interior membership."""
        w = self.barycentric(point)
        return w is not None and all(x > 0 for x in w)

    def diameter(self) -> Fraction:
        """Max pairwise vertex distance in the sup norm."""
        return max(
            (linf_dist(u, v) for u, v in itertools.combinations(self.vertices, 2)),
            default=ZERO,
        )

    def facets(self) -> list["Simplex"]:
        return [
            Simplex(tuple(v for j, v in enumerate(self.vertices) if j != i))
            for i in range(len(self.vertices))
        ]


def in_convex_hull(points: Sequence[Point], x: Sequence) -> bool:
    """Exact LP membership test: x in conv(points)."""
    x = as_point(x)
    if not points:
        return False
    n = len(points)
    A_eq = [[p[i] for p in points] for i in range(len(x))]
    A_eq.append([ONE] * n)
    b_eq = list(x) + [ONE]
    res = linprog([ZERO] * n, A_eq=A_eq, b_eq=b_eq)
    return res.status == "optimal"


def extreme_points(points: Sequence[Point]) -> list[Point]:
    """The vertices of conv(points), in input order."""
    out = []
    for i, p in enumerate(points):
        others = [q for j, q in enumerate(points) if j != i and q != p]
        if not in_convex_hull(others, p):
            if p not in out:
                out.append(p)
    return out


# --------------------------------------------------------------------------
# Triangulations
# --------------------------------------------------------------------------


class Subcomplex:
    """A set of faces (vertex-index tuples) closed under taking subfaces."""

    def __init__(self, faces: Iterable[Face]):
        closed: set[Face] = set()
        for f in faces:
            f = tuple(sorted(f))
            for k in range(1, len(f) + 1):
                closed.update(itertools.combinations(f, k))
        self.faces: frozenset[Face] = frozenset(closed)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for f in self.faces for v in f)

    def maximal_faces(self) -> list[Face]:
        return sorted(
            f for f in self.faces
            if not any(set(f) < set(g) for g in self.faces if g != f)
        )

    def __contains__(self, face: Face) -> bool:
        return tuple(sorted(face)) in self.faces

    def __eq__(self, other) -> bool:
        return isinstance(other, Subcomplex) and self.faces == other.faces

    def __hash__(self) -> int:
        return hash(self.faces)


class Triangulation:
    """A simplicial subdivision of a convex polytope.

    `vertices`: rational points; `maximal`: maximal simplices as sorted
    vertex-index tuples; `polytope`: the covered polytope's vertex list.
    Validity (exact volume cover + pairwise face intersections) is checked
    by `validate`, which the public constructors call.
    """

    def __init__(
        self,
        vertices: Sequence[Sequence],
        maximal: Sequence[Sequence[int]],
        polytope: Optional[Sequence[Sequence]] = None,
        *,
        validate: bool = True,
    ):
        self.vertices: tuple[Point, ...] = tuple(as_point(p) for p in vertices)
        self.maximal: tuple[Face, ...] = tuple(
            sorted(tuple(sorted(c)) for c in maximal)
        )
        if polytope is None:
            polytope = extreme_points(self.vertices)
        self.polytope: tuple[Point, ...] = tuple(as_point(p) for p in polytope)
        self.chart = Chart(self.polytope)
        self.dim = self.chart.dim
        if validate:
            self.validate()

    # -- basic structure ---------------------------------------------------

    def simplex(self, face: Face) -> Simplex:
        return Simplex(tuple(self.vertices[i] for i in face))

    def faces(self) -> Subcomplex:
        return Subcomplex(self.maximal)

    def faces_of_dim(self, k: int) -> list[Face]:
        return sorted(f for f in self.faces().faces if len(f) == k + 1)

    def cell_diameter(self, face: Face) -> Fraction:
        return self.simplex(face).diameter()

    def max_diameter(self) -> Fraction:
        return max(self.cell_diameter(c) for c in self.maximal)

    def _local(self, p: Point) -> list[Fraction]:
        return self.chart.to_local(p)

    def cell_volume(self, face: Face) -> Fraction:
        pts = [self._local(self.vertices[i]) for i in face]
        if len(pts) - 1 != self.dim:
            raise GeometryError("volume of a non-maximal cell requested")
        mat = [vec_sub(p, pts[0]) for p in pts[1:]]
        d = self.dim
        fact = 1
        for k in range(2, d + 1):
            fact *= k
        return abs(determinant(mat)) / fact if d > 0 else ONE

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        seen = set()
        for c in self.maximal:
            if c in seen:
                raise GeometryError(f"duplicate maximal cell {c}")
            seen.add(c)
            if len(c) != self.dim + 1:
                raise GeometryError(f"cell {c} is not full-dimensional")
            self.simplex(c)  # affine independence
        for i, v in enumerate(self.vertices):
            if not in_convex_hull(self.polytope, v):
                raise GeometryError(f"vertex {i} lies outside the covered polytope")
        total = sum((self.cell_volume(c) for c in self.maximal), ZERO)
        target = volume_in_chart(self.polytope, self.chart)
        if total != target:
            raise GeometryError(
                f"simplex volumes sum to {total}, polytope volume is {target}"
            )
        for a, b in itertools.combinations(self.maximal, 2):
            if not self._intersect_in_common_face(a, b):
                raise GeometryError(f"cells {a} and {b} do not meet in a common face")

    def _intersect_in_common_face(self, a: Face, b: Face) -> bool:
        """True iff conv(a) ∩ conv(b) = conv(shared vertices) (a face of each)."""
        shared = sorted(set(a) & set(b))
        va = [self.vertices[i] for i in a]
        vb = [self.vertices[i] for i in b]
        ambient = len(va[0])
        n, m = len(va), len(vb)
        # variables: lambda (n), mu (m); equalities: point match + two sums.
        A_eq = [
            [va[j][i] for j in range(n)] + [-vb[j][i] for j in range(m)]
            for i in range(ambient)
        ]
        A_eq.append([ONE] * n + [ZERO] * m)
        A_eq.append([ZERO] * n + [ONE] * m)
        b_eq = [ZERO] * ambient + [ONE, ONE]
        c = [
            ONE if a[j] not in shared else ZERO for j in range(n)
        ] + [ONE if b[j] not in shared else ZERO for j in range(m)]
        res = linprog(c, A_eq=A_eq, b_eq=b_eq, maximize=True)
        if res.status == "infeasible":
            return not shared  # disjoint cells sharing no vertex: fine
        return res.value == 0

    # -- queries -----------------------------------------------------------

    def find_cell(self, point: Sequence) -> Optional[Face]:
        p = as_point(point)
        for c in self.maximal:
            w = barycentric_in([self.vertices[i] for i in c], p)
            if w is not None and all(x >= 0 for x in w):
                return c
        return None

    def carrier(self, point: Sequence) -> Face:
        """The unique face containing the point in its relative interior."""
        p = as_point(point)
        c = self.find_cell(p)
        if c is None:
            raise GeometryError(f"point {p} lies outside the covered polytope")
        w = barycentric_in([self.vertices[i] for i in c], p)
        assert w is not None
        return tuple(i for i, x in zip(c, w) if x > 0)

    def barycentric_coords(self, point: Sequence) -> dict[int, Fraction]:
        """Convex weights over the carrier's vertices reproducing the point."""
        p = as_point(point)
        car = self.carrier(p)
        w = barycentric_in([self.vertices[i] for i in car], p)
        assert w is not None
        return {i: x for i, x in zip(car, w)}

    def closed_star(self, vertex: int) -> Subcomplex:
        if not 0 <= vertex < len(self.vertices):
            raise GeometryError(f"no vertex {vertex}")
        return Subcomplex(c for c in self.maximal if vertex in c)

    def simplicial_neighborhood(self, sub: Subcomplex) -> Subcomplex:
        """All simplices meeting the space of `sub` (closed under faces).

        In a simplicial complex two cells meet iff they share a vertex, so
        the neighborhood consists of the maximal cells touching `sub`'s
        vertex set.
        """
        if not sub.faces <= self.faces().faces:
            raise GeometryError("not a subcomplex of this triangulation")
        vs = sub.vertices
        return Subcomplex(c for c in self.maximal if vs & set(c))

    def star_bump(self, vertex: int, point: Sequence) -> Fraction:
        """PL bump: 1 on the closed star of `vertex`, 0 outside its neighborhood.

        Piecewise-linear interpolation of the vertex indicator of the closed
        star's vertex set (1 on the vertex and its neighbors, 0 elsewhere).
        """
        star_vertices = self.closed_star(vertex).vertices
        coords = self.barycentric_coords(point)
        return sum((w for i, w in coords.items() if i in star_vertices), ZERO)

    # -- modification ------------------------------------------------------

    def split_edge(self, edge: tuple[int, int]) -> "Triangulation":
        """Insert the midpoint of `edge`, bisecting every cell containing it."""
        u, v = edge
        mid = tuple((a + b) / 2 for a, b in zip(self.vertices[u], self.vertices[v]))
        verts = list(self.vertices)
        w = len(verts)
        verts.append(mid)
        cells: list[Face] = []
        for c in self.maximal:
            if u in c and v in c:
                cells.append(tuple(sorted([w if i == u else i for i in c])))
                cells.append(tuple(sorted([w if i == v else i for i in c])))
            else:
                cells.append(c)
        return Triangulation(verts, cells, self.polytope, validate=False)

    def serialize(self) -> str:
        from .rational import format_rational

        lines = ["# vertices"]
        for p in self.vertices:
            lines.append("v " + " ".join(format_rational(x) for x in p))
        lines.append("# cells")
        for c in self.maximal:
            lines.append("c " + " ".join(str(i) for i in c))
        return "\n".join(lines) + "\n"

    @staticmethod
    def deserialize(text: str) -> "Triangulation":
        from .rational import parse_rational

        verts: list[Point] = []
        cells: list[Face] = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tag, *rest = line.split()
            if tag == "v":
                verts.append(tuple(parse_rational(x) for x in rest))
            elif tag == "c":
                cells.append(tuple(int(x) for x in rest))
            else:
                raise GeometryError(f"unknown record {tag!r} in triangulation text")
        return Triangulation(verts, cells)


# --------------------------------------------------------------------------
# Volumes via lower hulls
# --------------------------------------------------------------------------


def _lower_hull_cells(
    local_pts: Sequence[list[Fraction]], heights: Sequence[Fraction], d: int
) -> list[Face]:
    """Maximal cells (index tuples) of the lower envelope of lifted points.

    Raises GeometryError("non-generic ...") when some lifted point lies on
    the supporting hyperplane of a lower cell it does not belong to.
    """
    n = len(local_pts)
    cells: list[Face] = []
    for combo in itertools.combinations(range(n), d + 1):
        pts = [local_pts[i] for i in combo]
        mat = [vec_sub(p, pts[0]) for p in pts[1:]]
        if d > 0 and determinant(mat) == 0:
            continue
        # Affine lift function l with l(p_i) = h_i on the combo.
        A = [list(local_pts[i]) + [ONE] for i in combo]
        b = [heights[i] for i in combo]
        coeffs = solve_linear(A, b)
        assert coeffs is not None
        grad, off = coeffs[:d], coeffs[d]
        flat = []
        ok = True
        for j in range(n):
            if j in combo:
                continue
            val = heights[j] - (dot(grad, local_pts[j]) + off)
            if val < 0:
                ok = False
                break
            if val == 0:
                flat.append(j)
        if not ok:
            continue
        if flat:
            raise GeometryError(
                "non-generic height: lifted points "
                f"{sorted(set(combo) | set(flat))} lie on a common lower hyperplane"
            )
        cells.append(tuple(combo))
    return cells


_GENERIC_SCHEDULE = [Fraction(1, 10**k) for k in range(1, 9)]


def lower_hull_triangulation(points: Sequence[Point]) -> tuple[list[Point], list[Face]]:
    """A triangulation of conv(points) using (a subset of) the given points.

    Heights follow a paraboloid plus a deterministic perturbation schedule
    shrunk until generic; used as the independent volume oracle.
    """
    pts = [as_point(p) for p in points]
    chart = Chart(pts)
    local = [chart.to_local(p) for p in pts]
    d = chart.dim
    if d == 0:
        return [pts[0]], [(0,)]
    base = [sum((x * x for x in lp), ZERO) for lp in local]
    for eps in _GENERIC_SCHEDULE:
        heights = [h + eps ** (i + 1) for i, h in enumerate(base)]
        try:
            cells = _lower_hull_cells(local, heights, d)
        except GeometryError:
            continue
        return pts, cells
    raise GeometryError("could not find a generic height for the point set")


def volume_in_chart(points: Sequence[Point], chart: Chart) -> Fraction:
    """Exact volume of conv(points), measured in the given chart's coordinates.

    Returns 0 when the points do not span the chart's full dimension.  Using
    a shared chart keeps volumes of different cells of one complex on the
    same scale.
    """
    local = [chart.to_local(as_point(p)) for p in points]
    d = chart.dim
    if d == 0:
        return ONE
    if matrix_rank([vec_sub(p, local[0]) for p in local[1:]]) < d:
        return ZERO
    base = [sum((x * x for x in lp), ZERO) for lp in local]
    fact = 1
    for k in range(2, d + 1):
        fact *= k
    for eps in _GENERIC_SCHEDULE:
        heights = [h + eps ** (i + 1) for i, h in enumerate(base)]
        try:
            cells = _lower_hull_cells(local, heights, d)
        except GeometryError:
            continue
        total = ZERO
        for c in cells:
            lp = [local[i] for i in c]
            mat = [vec_sub(p, lp[0]) for p in lp[1:]]
            total += abs(determinant(mat))
        return total / fact
    raise GeometryError("could not find a generic height for the point set")


def convex_polytope_volume(points: Sequence[Point]) -> Fraction:
    """Exact volume of conv(points), measured in the chart of its affine hull."""
    return volume_in_chart(points, Chart([as_point(p) for p in points]))


# --------------------------------------------------------------------------
# Regular triangulations from height functions
# --------------------------------------------------------------------------

HeightFunction = Mapping[int, Fraction]


def regular_triangulation(
    points: Sequence[Sequence], h: HeightFunction | Sequence
) -> Triangulation:
    """Lower-envelope triangulation of the lifted points.

    Every cell's lifted vertices span a hyperplane with all other lifted
    points strictly above (certified during construction); a lifted point on
    a foreign lower hyperplane means the height is non-generic and is
    reported with the flat witness.
    """
    pts = [as_point(p) for p in points]
    if isinstance(h, Mapping):
        heights = [Fraction(h[i]) for i in range(len(pts))]
    else:
        heights = [Fraction(x) for x in h]
    if len(heights) != len(pts):
        raise GeometryError("height function must cover every point")
    chart = Chart(pts)
    local = [chart.to_local(p) for p in pts]
    d = chart.dim
    if d == 0:
        return Triangulation([pts[0]], [(0,)], [pts[0]])
    cells = _lower_hull_cells(local, heights, d)
    used = sorted({i for c in cells for i in c})
    remap = {i: j for j, i in enumerate(used)}
    tri = Triangulation(
        [pts[i] for i in used],
        [tuple(remap[i] for i in c) for c in cells],
        extreme_points(pts),
    )
    return tri


# --------------------------------------------------------------------------
# Polyhedral complexes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Halfspace:
    """a · x <= b in ambient coordinates."""

    a: Point
    b: Fraction

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return dot(self.a, frac_vec(x)) - self.b


@dataclass(frozen=True)
class PolyCell:
    vertices: tuple[Point, ...]
    halfspaces: tuple[Halfspace, ...]

    def contains(self, x: Sequence) -> bool:
        return all(hs.value(x) <= 0 for hs in self.halfspaces)

    def dim(self) -> int:
        return Chart(self.vertices).dim

    def barycenter(self) -> Point:
        n = len(self.vertices)
        return tuple(
            sum((v[i] for v in self.vertices), ZERO) / n
            for i in range(len(self.vertices[0]))
        )

    def diameter(self) -> Fraction:
        return max(
            (linf_dist(u, v) for u, v in itertools.combinations(self.vertices, 2)),
            default=ZERO,
        )


FaceKey = frozenset  # frozenset of Point


class PolyhedralComplex:
    """Maximal polyhedral cells (V- and H-representations) with a face lattice."""

    def __init__(self, cells: Sequence[PolyCell], polytope: Sequence[Point]):
        if not cells:
            raise GeometryError("empty complex")
        self.cells = list(cells)
        self.polytope = tuple(as_point(p) for p in polytope)
        self.chart = Chart(self.polytope)
        self.dim = self.chart.dim

    def all_vertices(self) -> list[Point]:
        seen: list[Point] = []
        for c in self.cells:
            for v in c.vertices:
                if v not in seen:
                    seen.append(v)
        return seen

    def cell_faces(self, cell: PolyCell) -> set[FaceKey]:
        """All faces of `cell` as frozensets of vertex points."""
        tights: list[frozenset] = []
        for hs in cell.halfspaces:
            t = frozenset(v for v in cell.vertices if hs.value(v) == 0)
            if t and t != frozenset(cell.vertices):
                tights.append(t)
        faces: set[FaceKey] = {frozenset(cell.vertices)}
        frontier = set(tights)
        while frontier:
            faces |= frontier
            nxt = set()
            for f in frontier:
                for t in tights:
                    g = f & t
                    if g and g not in faces:
                        nxt.add(g)
            frontier = nxt
        return faces

    def face_lattice(self) -> dict[FaceKey, int]:
        """All faces of all cells, mapped to their affine dimension."""
        faces: set[FaceKey] = set()
        for c in self.cells:
            faces |= self.cell_faces(c)
        return {f: Chart(sorted(f)).dim for f in faces}

    def find_cell(self, point: Sequence) -> Optional[PolyCell]:
        p = as_point(point)
        try:
            self.chart.to_local(p)
        except ValueError:
            return None
        for c in self.cells:
            if c.contains(p):
                return c
        return None

    def carrier(self, point: Sequence) -> tuple[Point, ...]:
        """Vertices of the unique face containing the point in its relative interior."""
        p = as_point(point)
        cell = self.find_cell(p)
        if cell is None:
            raise GeometryError(f"point {p} lies outside the complex")
        tight = [hs for hs in cell.halfspaces if hs.value(p) == 0]
        verts = [
            v for v in cell.vertices if all(hs.value(v) == 0 for hs in tight)
        ]
        return tuple(verts)

    def is_simplicial(self) -> bool:
        return all(len(c.vertices) == c.dim() + 1 for c in self.cells)

    def validate(self) -> None:
        total = ZERO
        for c in self.cells:
            if Chart(c.vertices).dim != self.dim:
                raise GeometryError("non-maximal cell listed as maximal")
            total += volume_in_chart(c.vertices, self.chart)
        target = volume_in_chart(self.polytope, self.chart)
        if total != target:
            raise GeometryError(
                f"cell volumes sum to {total}, polytope volume is {target}"
            )
        for a, b in itertools.combinations(self.cells, 2):
            inter_dim, inter_verts = _poly_intersection(a, b)
            if inter_dim is None:
                continue
            key = frozenset(inter_verts)
            if key not in self.cell_faces(a) or key not in self.cell_faces(b):
                raise GeometryError("two cells intersect outside a common face")


def affine_hull_equations(points: Sequence[Point]) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Equality rows (N, c) with N x = c exactly on the affine hull of `points`."""
    chart = Chart(points)
    ambient = chart.ambient_dim
    if chart.dim == ambient:
        return [], []
    if chart.basis:
        normals = nullspace([list(v) for v in chart.basis])
    else:
        normals = [[ONE if j == i else ZERO for j in range(ambient)] for i in range(ambient)]
    A_eq = [list(n) for n in normals]
    b_eq = [dot(n, chart.origin) for n in normals]
    return A_eq, b_eq


def _poly_intersection(a: PolyCell, b: PolyCell):
    """Vertex set of a ∩ b (None, None when empty).

    Both cells are maximal cells of the same complex, so they share the
    complex's affine hull; the enumeration is constrained to it.
    """
    A_ub = [list(hs.a) for hs in a.halfspaces] + [list(hs.a) for hs in b.halfspaces]
    b_ub = [hs.b for hs in a.halfspaces] + [hs.b for hs in b.halfspaces]
    A_eq, b_eq = affine_hull_equations(a.vertices)
    verts = vertex_enumeration(A_ub, b_ub, A_eq or None, b_eq or None)
    if not verts:
        return None, None
    return Chart(verts).dim, [tuple(v) for v in verts]


# --------------------------------------------------------------------------
# Hyperplane arrangements within a base polytope
# --------------------------------------------------------------------------


def _primitive(a: Sequence[Fraction], b: Fraction) -> tuple[tuple[Fraction, ...], Fraction]:
    """Canonical integer-primitive form of the hyperplane a·x = b (sign-fixed)."""
    from math import gcd

    coefs = [Fraction(x) for x in a] + [Fraction(b)]
    denom = 1
    for c in coefs:
        denom = denom * c.denominator // gcd(denom, c.denominator)
    ints = [int(c * denom) for c in coefs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g:
        ints = [v // g for v in ints]
    lead = next((v for v in ints[:-1] if v != 0), 0)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(Fraction(v) for v in ints[:-1]), Fraction(ints[-1])


def hyperplane_through(chart_points: Sequence[Sequence[Fraction]], dim: int):
    """Hyperplane (a, b) in chart coordinates through the given local points.

    The points must affinely span a (dim-1)-flat.
    """
    p0 = frac_vec(chart_points[0])
    diffs = [vec_sub(frac_vec(p), p0) for p in chart_points[1:]]
    if matrix_rank(diffs) != dim - 1:
        raise GeometryError("points do not span a hyperplane")
    normals = nullspace(diffs) if diffs else [
        [ONE if j == i else ZERO for j in range(dim)] for i in range(dim)
    ]
    # kernel of the difference matrix has dimension 1 within the chart
    a = normals[0]
    return _primitive(a, dot(a, p0))


def simplex_facet_halfspaces(
    chart_verts: Sequence[Sequence[Fraction]], dim: int
) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """H-representation (chart coordinates) of a full-dimensional simplex."""
    out = []
    for i in range(len(chart_verts)):
        rest = [v for j, v in enumerate(chart_verts) if j != i]
        a, b = hyperplane_through(rest, dim)
        if dot(a, frac_vec(chart_verts[i])) > b:
            a, b = tuple(-x for x in a), -b
        out.append((a, b))
    return out


def _arrangement_cells(
    base_hrep: list[tuple[tuple[Fraction, ...], Fraction]],
    hyperplanes: list[tuple[tuple[Fraction, ...], Fraction]],
    dim: int,
) -> list[tuple[list[tuple[tuple[Fraction, ...], Fraction]], list[list[Fraction]]]]:
    """Full-dimensional cells of the arrangement inside the base polytope.

    Returns (H-rep rows, vertex list) pairs in chart coordinates.
    """
    cells = []
    seen: set[frozenset] = set()

    def feasible_full_dim(rows):
        A = [list(a) for a, _ in rows]
        b = [beta for _, beta in rows]
        verts = vertex_enumeration(A, b)
        if not verts:
            return None
        if Chart(verts).dim != dim:
            return None
        return verts

    def recurse(rows, k):
        if k == len(hyperplanes):
            verts = feasible_full_dim(rows)
            if verts is not None:
                key = frozenset(tuple(v) for v in verts)
                if key not in seen:
                    seen.add(key)
                    cells.append((rows, verts))
            return
        a, b = hyperplanes[k]
        neg = tuple(-x for x in a)
        for extra in ((a, b), (neg, -b)):
            rows2 = rows + [extra]
            # prune infeasible/flat branches early
            if feasible_full_dim(rows2) is not None:
                recurse(rows2, k + 1)

    recurse(list(base_hrep), 0)
    return cells


def _cells_to_complex(
    chart: Chart,
    raw_cells,
    polytope: Sequence[Point],
) -> PolyhedralComplex:
    cells = []
    for rows, verts in raw_cells:
        ambient_rows = [chart.lift_functional(a, b) for a, b in rows]
        hs = tuple(Halfspace(tuple(a), b) for a, b in ambient_rows)
        vs = tuple(tuple(chart.to_ambient(v)) for v in verts)
        cells.append(PolyCell(vs, hs))
    return PolyhedralComplex(cells, polytope)


def hyperplane_extension_subdivision(
    base: Simplex,
    embedded: Sequence[Simplex],
    marked_points: Optional[Sequence[Sequence]] = None,
) -> PolyhedralComplex:
    """Subdivision of `base` induced by extending the embedded simplices' facets.

    Every facet hyperplane of every embedded simplex is extended across the
    base simplex; the cells of the resulting arrangement form the complex.
    Each embedded simplex is then a union of cells (the space of a
    subcomplex).  `marked_points`, if given, must avoid every extended
    hyperplane; a hit is reported as a degenerate arrangement.
    """
    chart = Chart(base.vertices)
    d = chart.dim
    if d < 1:
        raise GeometryError("base simplex must have dimension >= 1")
    local_base = [chart.to_local(v) for v in base.vertices]
    for s in embedded:
        if s.dim != d:
            raise GeometryError("embedded simplices must be full-dimensional")
        for v in s.vertices:
            if not base.strictly_contains(v):
                raise GeometryError("embedded simplex not interior to the base")
    for s1, s2 in itertools.combinations(embedded, 2):
        if _simplices_intersect(s1, s2):
            raise GeometryError("embedded simplices are not pairwise disjoint")
    hyperplanes: list[tuple[tuple[Fraction, ...], Fraction]] = []
    for s in embedded:
        local = [chart.to_local(v) for v in s.vertices]
        for i in range(len(local)):
            rest = [v for j, v in enumerate(local) if j != i]
            hp = hyperplane_through(rest, d)
            if hp not in hyperplanes:
                hyperplanes.append(hp)
    if marked_points is not None:
        for p in marked_points:
            lp = chart.to_local(as_point(p))
            for a, b in hyperplanes:
                if dot(a, lp) == b:
                    raise GeometryError(
                        f"degenerate arrangement: marked point {tuple(p)} lies on "
                        f"extended hyperplane {a}·x = {b}"
                    )
    base_hrep = simplex_facet_halfspaces(local_base, d)
    raw = _arrangement_cells(base_hrep, hyperplanes, d)
    pc = _cells_to_complex(chart, raw, base.vertices)
    pc.validate()
    return pc


def _simplices_intersect(s1: Simplex, s2: Simplex) -> bool:
    n, m = len(s1.vertices), len(s2.vertices)
    ambient = len(s1.vertices[0])
    A_eq = [
        [s1.vertices[j][i] for j in range(n)] + [-s2.vertices[j][i] for j in range(m)]
        for i in range(ambient)
    ]
    A_eq.append([ONE] * n + [ZERO] * m)
    A_eq.append([ZERO] * n + [ONE] * m)
    b_eq = [ZERO] * ambient + [ONE, ONE]
    res = linprog([ZERO] * (n + m), A_eq=A_eq, b_eq=b_eq)
    return res.status == "optimal"


# --------------------------------------------------------------------------
# Refinement modulo protected cells
# --------------------------------------------------------------------------


def refine_modulo(
    tri: Triangulation,
    protected: Sequence[Sequence[int]],
    max_diameter: Fraction,
) -> Triangulation:
    """Refine by longest-edge bisection, never splitting a protected cell.

    Protected cells survive unchanged; every maximal cell sharing no vertex
    with a protected cell ends with sup-norm diameter <= max_diameter.
    Cells adjacent to protected ones are split only through their free
    edges and may stay larger.
    """
    max_diameter = Fraction(max_diameter)
    if max_diameter <= 0:
        raise GeometryError("max_diameter must be positive")
    prot = [tuple(sorted(f)) for f in protected]
    all_faces = tri.faces()
    for f in prot:
        if f not in all_faces:
            raise GeometryError(f"protected cell {f} is not a cell of the triangulation")
    prot_vertices: set[int] = set().union(*map(set, prot)) if prot else set()
    cur = tri
    for _ in range(100000):
        violating = [
            c
            for c in cur.maximal
            if not (set(c) & prot_vertices) and cur.cell_diameter(c) > max_diameter
        ]
        if not violating:
            out = Triangulation(cur.vertices, cur.maximal, cur.polytope)
            for f in prot:
                if f not in out.faces():
                    raise GeometryError(f"protected cell {f} was destroyed (bug)")
            return out
        cell = violating[0]
        edges = sorted(
            itertools.combinations(cell, 2),
            key=lambda e: (-linf_dist(cur.vertices[e[0]], cur.vertices[e[1]]), e),
        )
        cur = cur.split_edge(edges[0])
    achieved = max(
        cur.cell_diameter(c)
        for c in cur.maximal
        if not (set(c) & prot_vertices)
    )
    raise GeometryError(
        f"refinement did not reach diameter {max_diameter}; achieved {achieved}"
    )


# --------------------------------------------------------------------------
# Generalized barycentric subdivision
# --------------------------------------------------------------------------


def generalized_barycentric_subdivision(
    domain: "Triangulation | PolyhedralComplex",
    choices: Optional[Mapping] = None,
) -> Triangulation:
    """Derived triangulation from chains of per-face interior points.

    `choices` maps faces (vertex-index tuples for a triangulation, frozensets
    of vertex points for a complex) to chosen interior points; unspecified
    faces use the true barycenter.  Maximal simplices correspond to maximal
    chains of faces ordered by inclusion.
    """
    choices = dict(choices or {})
    if isinstance(domain, Triangulation):
        lattice = {f: len(f) - 1 for f in domain.faces().faces}

        def face_points(f):
            return [domain.vertices[i] for i in f]

        def contains_face(f, g):
            return set(f) < set(g)

        def canon(f):
            return tuple(sorted(f))

    else:
        lattice = domain.face_lattice()

        def face_points(f):
            return sorted(f)

        def contains_face(f, g):
            return f < g

        def canon(f):
            return frozenset(f)

    points: dict = {}
    for f, d in lattice.items():
        pts = face_points(f)
        if d == 0:
            points[f] = pts[0]
            continue
        choice = choices.get(canon(f) if not isinstance(f, frozenset) else f)
        if choice is None:
            n = len(pts)
            choice = tuple(sum((p[i] for p in pts), ZERO) / n for i in range(len(pts[0])))
        else:
            choice = as_point(choice)
            if not _in_relative_interior(pts, choice):
                raise GeometryError(
                    f"chosen point {choice} is not interior to its face"
                )
        points[f] = choice

    top_dim = max(lattice.values())
    by_dim: dict[int, list] = {}
    for f, d in lattice.items():
        by_dim.setdefault(d, []).append(f)

    vertex_list: list[Point] = []
    vertex_index: dict[Point, int] = {}
    for f in lattice:
        p = as_point(points[f])
        if p not in vertex_index:
            vertex_index[p] = len(vertex_list)
            vertex_list.append(p)

    cells: list[Face] = []

    def extend(chain, f, d):
        if d == top_dim:
            cells.append(tuple(sorted(vertex_index[as_point(points[g])] for g in chain)))
            return
        for g in by_dim.get(d + 1, []):
            if contains_face(f, g):
                extend(chain + [g], g, d + 1)

    for f in by_dim.get(0, []):
        extend([f], f, 0)

    if isinstance(domain, Triangulation):
        polytope = domain.polytope
    else:
        polytope = domain.polytope
    return Triangulation(vertex_list, sorted(set(cells)), polytope)


def _in_relative_interior(pts: Sequence[Point], x: Point) -> bool:
    """x ∈ relint(conv(pts)): a strictly positive convex certificate exists."""
    n = len(pts)
    ambient = len(x)
    # variables: weights (n) and margin t; maximize t with w_i >= t.
    A_eq = [[pts[j][i] for j in range(n)] + [ZERO] for i in range(ambient)]
    A_eq.append([ONE] * n + [ZERO])
    b_eq = list(x) + [ONE]
    A_ub = [
        [(-ONE if j == i else ZERO) for j in range(n)] + [ONE] for i in range(n)
    ]
    b_ub = [ZERO] * n
    A_ub.append([ZERO] * n + [ONE])
    b_ub.append(ONE)
    res = linprog([ZERO] * n + [ONE], A_ub, b_ub, A_eq, b_eq, maximize=True)
    return res.status == "optimal" and res.value is not None and res.value > 0


# --------------------------------------------------------------------------
# Piecewise-linear functions over subdivisions
# --------------------------------------------------------------------------


class PLFunction:
    """One affine function per maximal cell of a triangulation or complex.

    Pieces are (gradient, offset) in the domain chart's coordinates:
    value(x) = gradient · to_local(x) + offset on that cell.
    """

    def __init__(
        self,
        domain: "Triangulation | PolyhedralComplex",
        pieces: Sequence[tuple[Sequence[Fraction], Fraction]],
    ):
        self.domain = domain
        self.chart = domain.chart
        ncells = len(domain.maximal) if isinstance(domain, Triangulation) else len(domain.cells)
        if len(pieces) != ncells:
            raise GeometryError("one affine piece per maximal cell required")
        self.pieces = [
            (frac_vec(g), Fraction(off)) for g, off in pieces
        ]

    # -- cell access -------------------------------------------------------

    def _cell_vertices(self, i: int) -> list[Point]:
        if isinstance(self.domain, Triangulation):
            return [self.domain.vertices[j] for j in self.domain.maximal[i]]
        return list(self.domain.cells[i].vertices)

    def _ncells(self) -> int:
        return len(self.pieces)

    def piece_value(self, i: int, point: Sequence) -> Fraction:
        g, off = self.pieces[i]
        return dot(g, self.chart.to_local(as_point(point))) + off

    def _containing_cells(self, point: Sequence) -> list[int]:
        out = []
        p = as_point(point)
        if isinstance(self.domain, Triangulation):
            for i, c in enumerate(self.domain.maximal):
                w = barycentric_in([self.domain.vertices[j] for j in c], p)
                if w is not None and all(x >= 0 for x in w):
                    out.append(i)
        else:
            for i, c in enumerate(self.domain.cells):
                if c.contains(p):
                    out.append(i)
        return out

    def value(self, point: Sequence) -> Fraction:
        cells = self._containing_cells(point)
        if not cells:
            raise GeometryError(f"point {tuple(point)} outside the domain")
        return self.piece_value(cells[0], point)

    # -- structural checks ---------------------------------------------------

    def check_agreement(self) -> None:
        """Pieces of cells sharing a vertex must agree there (well-definedness)."""
        for i in range(self._ncells()):
            for v in self._cell_vertices(i):
                owners = self._containing_cells(v)
                vals = {self.piece_value(j, v) for j in owners}
                if len(vals) != 1:
                    raise GeometryError(f"pieces disagree at shared point {v}")

    def vertex_values(self) -> dict[Point, Fraction]:
        out: dict[Point, Fraction] = {}
        for i in range(self._ncells()):
            for v in self._cell_vertices(i):
                out[v] = self.piece_value(i, v)
        return out

    def is_convex(self) -> bool:
        """Exact global convexity: every piece underestimates every vertex value."""
        vv = self.vertex_values()
        for i in range(self._ncells()):
            for v, val in vv.items():
                if self.piece_value(i, v) > val:
                    return False
        return True

    def value_range(self) -> tuple[Fraction, Fraction]:
        vals = list(self.vertex_values().values())
        return min(vals), max(vals)

    def adjacent_cell_pairs(self) -> list[tuple[int, int, tuple[Point, ...]]]:
        """Pairs of maximal cells sharing a codimension-1 face."""
        d = self.domain.dim
        out = []
        for i, j in itertools.combinations(range(self._ncells()), 2):
            shared = [v for v in self._cell_vertices(i) if v in self._cell_vertices(j)]
            if len(shared) >= d and Chart(shared).dim == d - 1:
                out.append((i, j, tuple(shared)))
        return out

    def nonlinear_across_every_interior_facet(self) -> bool:
        """True iff adjacent pieces differ as affine functions across each shared facet."""
        for i, j, shared in self.adjacent_cell_pairs():
            witnesses = [
                v for v in self._cell_vertices(i) + self._cell_vertices(j)
                if v not in shared
            ]
            if all(self.piece_value(i, w) == self.piece_value(j, w) for w in witnesses):
                return False
        return True

    def subtract_affine(self, grad: Sequence[Fraction], off: Fraction) -> "PLFunction":
        grad = frac_vec(grad)
        off = Fraction(off)
        return PLFunction(
            self.domain,
            [(vec_sub(g, grad), o - off) for g, o in self.pieces],
        )

    def serialize(self) -> str:
        from .rational import format_rational

        lines = []
        for g, off in self.pieces:
            lines.append(
                "p " + " ".join(format_rational(x) for x in g) + " | " + format_rational(off)
            )
        return "\n".join(lines) + "\n"


def interpolate_heights(
    tri: Triangulation, heights: Mapping[int, Fraction]
) -> PLFunction:
    """PL function linear on each maximal simplex with given vertex values."""
    pieces = []
    for c in tri.maximal:
        local = [tri.chart.to_local(tri.vertices[i]) for i in c]
        A = [list(p) + [ONE] for p in local]
        b = [Fraction(heights[i]) for i in c]
        coeffs = solve_linear(A, b)
        if coeffs is None:
            raise GeometryError("degenerate cell in height interpolation")
        pieces.append((coeffs[:-1], coeffs[-1]))
    return PLFunction(tri, pieces)


# --------------------------------------------------------------------------
# EL refinement: arrangement of hyperplanes through codimension-1 cells
# --------------------------------------------------------------------------


def el_refinement(tri: Triangulation) -> tuple[PolyhedralComplex, PLFunction]:
    """Arrangement refinement of a triangulated simplex plus its convex witness.

    Extends the affine hull of every codimension-1 cell of `tri` across the
    base simplex; the cells of the arrangement form the refined complex.
    The returned function gamma(x) = alpha * sum_H |a_H·x − b_H| is convex
    piecewise-linear with range in [0,1], linear exactly on the complex's
    cells and non-linear across every interior facet.
    """
    if len(tri.polytope) != tri.dim + 1:
        raise GeometryError("el_refinement requires a triangulated simplex")
    chart = tri.chart
    d = tri.dim
    hyperplanes: list[tuple[tuple[Fraction, ...], Fraction]] = []
    for f in tri.faces_of_dim(d - 1):
        local = [chart.to_local(tri.vertices[i]) for i in f]
        hp = hyperplane_through(local, d)
        if hp not in hyperplanes:
            hyperplanes.append(hp)
    local_base = [chart.to_local(p) for p in tri.polytope]
    base_hrep = simplex_facet_halfspaces(local_base, d)
    raw = _arrangement_cells(base_hrep, hyperplanes, d)
    pc = _cells_to_complex(chart, raw, tri.polytope)
    pc.validate()

    def raw_gamma(lp: Sequence[Fraction]) -> Fraction:
        return sum((abs(dot(a, lp) - b) for a, b in hyperplanes), ZERO)

    peak = max(raw_gamma(p) for p in local_base)
    alpha = ONE / peak if peak > 0 else ONE
    pieces = []
    for cell in pc.cells:
        center = chart.to_local(cell.barycenter())
        grad = [ZERO] * d
        off = ZERO
        for a, b in hyperplanes:
            s = ONE if dot(a, center) - b > 0 else -ONE
            for k in range(d):
                grad[k] += s * a[k]
            off -= s * b
        pieces.append(([alpha * g for g in grad], alpha * off))
    gamma = PLFunction(pc, pieces)
    return pc, gamma


# --------------------------------------------------------------------------
# Triangulating a complex without new vertices
# --------------------------------------------------------------------------


def triangulate_without_new_vertices(
    pc: PolyhedralComplex, h: Mapping[int, Fraction] | Sequence
) -> tuple[Triangulation, PLFunction]:
    """Refine `pc` into a triangulation on the same vertex set via heights.

    `h` assigns a height to each vertex of the complex (indexed in
    `pc.all_vertices()` order) and must be a small generic perturbation of a
    height inducing `pc`: the regular triangulation of the lifted vertices
    must use every vertex and refine the complex, else an error is raised.
    The PL witness interpolates `h`; it is convex and linear exactly on the
    simplices.
    """
    verts = pc.all_vertices()
    if isinstance(h, Mapping):
        heights = {i: Fraction(h[i]) for i in range(len(verts))}
    else:
        heights = {i: Fraction(x) for i, x in enumerate(h)}
    if len(heights) != len(verts):
        raise GeometryError("height function must cover every vertex of the complex")

    if pc.is_simplicial():
        index = {v: i for i, v in enumerate(verts)}
        cells = [tuple(sorted(index[v] for v in c.vertices)) for c in pc.cells]
        tri = Triangulation(verts, cells, pc.polytope)
        witness = interpolate_heights(tri, heights)
        if not witness.is_convex():
            raise GeometryError("height is not a perturbation of a convex inducer")
        return tri, witness

    tri = regular_triangulation(verts, heights)
    if set(tri.vertices) != set(verts):
        raise GeometryError(
            "non-generic height: some vertex is not on the lower envelope"
        )
    index_of = {v: i for i, v in enumerate(tri.vertices)}
    for c in tri.maximal:
        pts = [tri.vertices[i] for i in c]
        if not any(all(cell.contains(p) for p in pts) for cell in pc.cells):
            raise GeometryError(
                "height perturbation too large: triangulation does not refine the complex"
            )
    witness = interpolate_heights(
        tri, {i: heights[verts.index(v)] for i, v in enumerate(tri.vertices)}
    )
    if not witness.is_convex():
        raise GeometryError("interpolated witness is not convex (non-generic height)")
    if not witness.nonlinear_across_every_interior_facet():
        raise GeometryError("witness linear across a facet (non-generic height)")
    return tri, witness


def affine_below_except_marked(
    plf: PLFunction, marked: Sequence[Sequence[int]]
) -> tuple[list[Fraction], Fraction]:
    """Affine function equal to `plf` on marked-cell vertices, strictly below elsewhere.

    `plf` must live on a Triangulation; `marked` lists cells (vertex-index
    tuples).  Subtracting the result from `plf` yields a nonnegative PL
    function vanishing (hence constant) on every marked cell.  Requires the
    marked vertices not to affinely span the domain (reported otherwise).
    """
    tri = plf.domain
    if not isinstance(tri, Triangulation):
        raise GeometryError("marked-cell adjustment needs a triangulation domain")
    faces = tri.faces()
    marked_vertices: set[int] = set()
    for f in marked:
        f = tuple(sorted(f))
        if f not in faces:
            raise GeometryError(f"marked cell {f} is not a cell of the triangulation")
        marked_vertices |= set(f)
    mpts = [tri.vertices[i] for i in sorted(marked_vertices)]
    if Chart(mpts).dim >= tri.dim:
        raise GeometryError(
            "marked cells affinely span the domain; no strictly-below affine "
            "function exists (vertex-count condition violated)"
        )
    vv = plf.vertex_values()
    d = tri.dim
    others = [v for v in tri.vertices if v not in mpts]
    # variables: gradient (d) + offset, free; plus margin t >= 0.
    nv = d + 1

    def row(point, margin):
        return list(plf.chart.to_local(point)) + [ONE] + [margin]

    A_eq = [row(p, ZERO) for p in mpts]
    b_eq = [vv[p] for p in mpts]
    A_ub = [row(p, ONE) for p in others]
    b_ub = [vv[p] for p in others]
    A_ub.append([ZERO] * nv + [ONE])
    b_ub.append(ONE)
    c = [ZERO] * nv + [ONE]
    # gradient/offset are free; the margin t is also treated as free but
    # maximized, so positivity is certified by the optimum.
    res = linprog(c, A_ub, b_ub, A_eq, b_eq, maximize=True, free=True)
    if res.status != "optimal" or res.value is None or res.value <= 0:
        raise GeometryError(
            "no affine function lies strictly below the PL function off the marked cells"
        )
    grad = res.x[:d]
    off = res.x[d]
    return grad, off


# --------------------------------------------------------------------------
# Fixtures
# --------------------------------------------------------------------------


def grid_triangulation(n: int) -> Triangulation:
    """The n x n unit-square grid with all squares split along one diagonal."""
    verts = [(Fraction(i), Fraction(j)) for j in range(n + 1) for i in range(n + 1)]

    def idx(i, j):
        return j * (n + 1) + i

    cells = []
    for i in range(n):
        for j in range(n):
            cells.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
            cells.append((idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)))
    corners = [(ZERO, ZERO), (Fraction(n), ZERO), (ZERO, Fraction(n)), (Fraction(n), Fraction(n))]
    return Triangulation(verts, cells, corners)
