import random
from fractions import Fraction

import pytest

from equilib.geometry import (
    GeometryError,
    Simplex,
    Triangulation,
    affine_below_except_marked,
    el_refinement,
    generalized_barycentric_subdivision,
    grid_triangulation,
    hyperplane_extension_subdivision,
    in_convex_hull,
    refine_modulo,
    regular_triangulation,
    triangulate_without_new_vertices,
)

F = Fraction


def unit_triangle():
    return Triangulation(
        [(F(0), F(0)), (F(1), F(0)), (F(0), F(1))],
        [(0, 1, 2)],
    )


def random_refinement(seed, splits=4):
    """Seeded triangulation built by repeated edge splits of a triangle."""
    rng = random.Random(seed)
    tri = unit_triangle()
    for _ in range(splits):
        edges = tri.faces_of_dim(1)
        tri = tri.split_edge(tuple(rng.choice(edges)))
    tri.validate()
    return tri


def random_point(rng, tri):
    cell = rng.choice(tri.maximal)
    ws = [rng.randint(0, 6) for _ in cell]
    if sum(ws) == 0:
        ws[0] = 1
    tot = sum(ws)
    pts = [tri.vertices[i] for i in cell]
    return [
        sum(F(w, tot) * pts[k][d] for k, w in enumerate(ws))
        for d in range(len(pts[0]))
    ]


# -- simplices -------------------------------------------------------------


def test_simplex_barycentric_identity():
    s = Simplex.of([[F(0), F(0)], [F(2), F(0)], [F(0), F(2)]])
    assert s.barycentric(s.barycenter()) == [F(1, 3)] * 3
    assert s.contains([F(1), F(1)])
    assert not s.strictly_contains([F(1), F(1)])  # on the long edge


def test_degenerate_simplex_rejected():
    with pytest.raises(GeometryError):
        Simplex.of([[F(0), F(0)], [F(1), F(1)], [F(2), F(2)]])


def test_in_convex_hull():
    square = [(F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1), F(1))]
    assert in_convex_hull(square, [F(1, 2), F(1, 2)])
    assert not in_convex_hull(square, [F(2), F(0)])


# -- triangulations --------------------------------------------------------


def test_grid_statistics():
    tri = grid_triangulation(3)
    assert len(tri.vertices) == 16
    assert len(tri.faces_of_dim(1)) == 33
    assert len(tri.maximal) == 18


@pytest.mark.parametrize("seed", range(5))
def test_carrier_and_barycentric_invariants(seed):
    rng = random.Random(1000 + seed)
    tri = random_refinement(seed)
    for _ in range(50):
        p = random_point(rng, tri)
        carrier = tri.carrier(p)
        coords = tri.barycentric_coords(p)
        # coordinates are a convex combination supported on the carrier
        assert sum(coords.values()) == 1
        assert all(w > 0 for w in coords.values())
        assert set(coords) == set(carrier)
        recon = [
            sum(w * tri.vertices[i][d] for i, w in coords.items())
            for d in range(2)
        ]
        assert recon == list(map(F, p))
        # the carrier contains the point in its relative interior
        assert tri.simplex(carrier).contains(p)


def test_star_bump_is_one_on_star_and_zero_outside():
    tri = grid_triangulation(2)
    v = 4  # center vertex of the 2x2 grid
    star = tri.closed_star(v)
    for i, p in enumerate(tri.vertices):
        expected = 1 if i in star.vertices else 0
        assert tri.star_bump(v, p) == expected


def test_split_edge_preserves_volume():
    tri = random_refinement(3)
    total = sum(tri.cell_volume(c) for c in tri.maximal)
    assert total == F(1, 2)


def test_serialize_round_trip():
    tri = random_refinement(7)
    again = Triangulation.deserialize(tri.serialize())
    assert again.vertices == tri.vertices
    assert again.maximal == tri.maximal


# -- regular triangulations ------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_regular_triangulation_generic_heights(seed):
    rng = random.Random(seed)
    pts = [(F(i), F(j)) for i in range(3) for j in range(3)]
    heights = [F(rng.randint(1, 1000), 997) for _ in pts]
    tri = regular_triangulation(pts, heights)
    tri.validate()
    assert set(tri.vertices) <= set(pts)
    # the cells tile the square exactly: volumes sum to the full region
    from equilib.geometry import volume_in_chart

    total = sum(tri.cell_volume(c) for c in tri.maximal)
    assert total == volume_in_chart(pts, tri.chart) > 0


def test_regular_triangulation_flat_height_reported():
    pts = [(F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1), F(1))]
    with pytest.raises(GeometryError):
        regular_triangulation(pts, [F(0)] * 4)


# -- subdivisions and refinements -----------------------------------------


def test_hyperplane_extension_subdivision_covers_domain():
    base = Simplex.of([[F(0), F(0)], [F(1), F(0)], [F(0), F(1)]])
    inner = Simplex.of(
        [[F(1, 4), F(1, 4)], [F(1, 2), F(1, 4)], [F(1, 4), F(1, 2)]]
    )
    pc = hyperplane_extension_subdivision(base, [inner])
    pc.validate()
    tri = unit_triangle()
    rng = random.Random(0)
    for _ in range(20):
        p = random_point(rng, tri)
        assert pc.find_cell(p) is not None
    # the embedded simplex is a union of cells
    covered = [c for c in pc.cells if all(inner.contains(v) for v in c.vertices)]
    assert sum(c.barycenter() is not None for c in covered) >= 1
    for c in covered:
        assert inner.contains(c.barycenter())


def test_refine_modulo_protects_and_bounds():
    tri = grid_triangulation(2)
    protected = [tri.maximal[0]]
    bound = F(1, 2)
    refined = refine_modulo(tri, protected, bound)
    refined.validate()
    protected_pts = tuple(sorted(tri.vertices[i] for i in protected[0]))
    surviving = {
        tuple(sorted(refined.vertices[i] for i in c)) for c in refined.maximal
    }
    assert protected_pts in surviving
    protected_vertex_pts = set(protected_pts)
    for c in refined.maximal:
        pts = {refined.vertices[i] for i in c}
        if pts & protected_vertex_pts:
            continue
        assert refined.cell_diameter(c) <= bound


def test_generalized_barycentric_subdivision_volume():
    tri = unit_triangle()
    sub = generalized_barycentric_subdivision(tri)
    sub.validate()
    assert len(sub.maximal) == 6
    assert sum(sub.cell_volume(c) for c in sub.maximal) == F(1, 2)


# -- EL refinement and its convex witness ---------------------------------


@pytest.fixture
def el(request):
    tri = unit_triangle().split_edge((0, 1)).split_edge((0, 2))
    return tri, el_refinement(tri)


def test_el_gamma_properties(el):
    tri, (pc, gamma) = el
    verts = pc.all_vertices()
    vals = [gamma.value(v) for v in verts]
    assert all(0 <= v <= 1 for v in vals)
    assert max(vals) == 1
    assert gamma.is_convex()
    assert gamma.nonlinear_across_every_interior_facet()


def test_el_gamma_linear_on_cells(el):
    tri, (pc, gamma) = el
    rng = random.Random(5)
    for cell in pc.cells:
        vs = list(cell.vertices)
        ws = [rng.randint(1, 5) for _ in vs]
        tot = sum(ws)
        p = [
            sum(F(w, tot) * vs[k][d] for k, w in enumerate(ws))
            for d in range(2)
        ]
        interp = sum(F(w, tot) * gamma.value(v) for v, w in zip(vs, ws))
        assert gamma.value(p) == interp


def test_triangulate_without_new_vertices(el):
    tri, (pc, gamma) = el
    rng = random.Random(11)
    verts = pc.all_vertices()
    for attempt in range(20):
        heights = [
            gamma.value(v) + F(rng.randint(-1, 1), 10**6) for v in verts
        ]
        try:
            fine, witness = triangulate_without_new_vertices(pc, heights)
        except GeometryError:
            continue
        fine.validate()
        assert set(fine.vertices) == set(verts)
        assert witness.is_convex()
        return
    pytest.fail("no generic height perturbation found in 20 attempts")


def test_affine_below_except_marked():
    tri = unit_triangle().split_edge((0, 1))
    pc, gamma = el_refinement(tri)
    fine, witness = _simplicial(pc, gamma)
    marked = [fine.faces_of_dim(1)[0]]
    grad_offset = affine_below_except_marked(witness, marked)
    grad, offset = grad_offset
    chart = witness.chart
    for i, v in enumerate(fine.vertices):
        loc = chart.to_local(v)
        affine = sum(g * x for g, x in zip(grad, loc)) + offset
        if i in marked[0]:
            assert affine == witness.value(v)
        else:
            assert affine < witness.value(v)


def _simplicial(pc, gamma):
    verts = pc.all_vertices()
    heights = [gamma.value(v) for v in verts]
    rng = random.Random(23)
    for _ in range(50):
        jitter = [h + F(rng.randint(-1, 1), 10**7) for h in heights]
        try:
            return triangulate_without_new_vertices(pc, jitter)
        except GeometryError:
            continue
    raise AssertionError("could not triangulate the refinement")
