import random
from fractions import Fraction

import pytest

from equilib.games import FiniteGame, profile_of
from equilib.geometry import Simplex
from equilib.indices import (
    IndexError_,
    check_sum_plus_one,
    component_index,
    degree_oracle,
    game_index_report,
    index_regular,
    index_via_degree,
    is_regular,
    make_affine_fixer,
    product_index,
)
from equilib.solver import components, support_enumeration

F = Fraction
HALF = F(1, 2)


# -- regular equilibrium indices -------------------------------------------


def test_strict_pure_equilibrium_has_index_one(coordination):
    assert index_regular(coordination, profile_of("A", "C")) == 1
    assert index_regular(coordination, profile_of("B", "D")) == 1


def test_coordination_mixed_has_index_minus_one(coordination):
    mixed = profile_of({"A": F(1, 3), "B": F(2, 3)}, {"C": F(1, 3), "D": F(2, 3)})
    assert index_regular(coordination, mixed) == -1


def test_matching_pennies_index_one(matching_pennies):
    mixed = profile_of({"A": HALF, "B": HALF}, {"C": HALF, "D": HALF})
    assert index_regular(matching_pennies, mixed) == 1


def test_indices_sum_to_one(coordination):
    es = support_enumeration(coordination)
    assert sum(index_regular(coordination, eq) for eq in es.isolated) == 1
    assert check_sum_plus_one(coordination)


def test_irregular_equilibrium_rejected(km):
    # (t, L) sits inside a continuum of the base game: not regular
    assert not is_regular(km, profile_of("t", "L"))
    with pytest.raises(IndexError_):
        index_regular(km, profile_of("t", "L"))


def shift_payoffs(game, player, amount):
    payoffs = {
        p: tuple(
            v + amount if n == player else v for n, v in enumerate(entry)
        )
        for p, entry in game.payoffs.items()
    }
    return FiniteGame.of(game.players, game.strategies, payoffs)


def scale_payoffs(game, player, factor):
    payoffs = {
        p: tuple(
            v * factor if n == player else v for n, v in enumerate(entry)
        )
        for p, entry in game.payoffs.items()
    }
    return FiniteGame.of(game.players, game.strategies, payoffs)


@pytest.mark.parametrize("amount,factor", [(F(7), F(3)), (F(-2), F(1, 5))])
def test_index_invariant_under_shift_and_positive_scaling(
    matching_pennies, amount, factor
):
    mixed = profile_of({"A": HALF, "B": HALF}, {"C": HALF, "D": HALF})
    base = index_regular(matching_pennies, mixed)
    shifted = shift_payoffs(matching_pennies, 0, amount)
    scaled = scale_payoffs(shifted, 1, factor)
    assert index_regular(scaled, mixed) == base


# -- degree oracle ---------------------------------------------------------


def test_degree_of_constant_map_is_one():
    box = [(F(-1), F(1)), (F(-1), F(1))]
    assert degree_oracle(lambda x: [F(0), F(0)], box, 2) == 1


def test_degree_of_expansion_is_one_2d():
    # Id - 2x = -x: orientation (-1)^2
    box = [(F(-1), F(1)), (F(-1), F(1))]
    assert degree_oracle(lambda x: [2 * x[0], 2 * x[1]], box, 2) == 1


def test_degree_of_expansion_is_minus_one_1d():
    box = [(F(-1), F(1))]
    assert degree_oracle(lambda x: [2 * x[0]], box, 1) == -1


def test_degree_mixed_signs_3d():
    box = [(F(-1), F(1))] * 3
    fmap = lambda x: [2 * x[0], F(0), 2 * x[2]]  # noqa: E731
    assert degree_oracle(fmap, box, 2) == 1


def test_degree_no_fixed_point_in_box_is_zero():
    box = [(F(1), F(2))]
    assert degree_oracle(lambda x: [F(0)], box, 2) == 0


def test_index_via_degree_agrees(matching_pennies, coordination):
    mixed_mp = profile_of({"A": HALF, "B": HALF}, {"C": HALF, "D": HALF})
    assert index_via_degree(matching_pennies, mixed_mp) == 1
    mixed_co = profile_of(
        {"A": F(1, 3), "B": F(2, 3)}, {"C": F(1, 3), "D": F(2, 3)}
    )
    assert index_via_degree(coordination, mixed_co) == -1
    assert index_via_degree(coordination, profile_of("A", "C")) == 1


# -- affine fixers ---------------------------------------------------------


def nested_simplices(dim, seed):
    """A shrunken copy of the standard simplex inside a larger one."""
    rng = random.Random(seed)
    corners = [
        [F(int(i == j)) for j in range(dim + 1)] for i in range(dim + 1)
    ]
    bary = [F(1, dim + 1)] * (dim + 1)

    def shrink(factor):
        return Simplex.of(
            [
                [b + factor * (c - b) for b, c in zip(bary, corner)]
                for corner in corners
            ]
        )

    inner = F(rng.randint(2, 4), 10)
    outer = inner + F(rng.randint(1, 3), 10)
    return shrink(inner), shrink(outer), bary


@pytest.mark.parametrize("dim", [1, 2, 3])
@pytest.mark.parametrize("r", [1, -1])
def test_make_affine_fixer_signs(dim, r):
    X, Y, sigma = nested_simplices(dim, 17 * dim + r)
    fx = make_affine_fixer(X, Y, sigma, r)
    assert fx.index == r
    assert fx.apply(sigma) == sigma
    # bijection X -> Y: vertex images recover Y's vertex set
    images = sorted(tuple(fx.apply(list(v))) for v in X.vertices)
    assert images == sorted(tuple(v) for v in Y.vertices)


def test_fixer_unique_fixed_point():
    X, Y, sigma = nested_simplices(2, 5)
    fx = make_affine_fixer(X, Y, sigma, -1)
    # any other sample point moves
    for v in X.vertices:
        assert fx.apply(list(v)) != list(v)


def test_product_index_multiplies():
    X1, Y1, s1 = nested_simplices(1, 1)
    X2, Y2, s2 = nested_simplices(2, 2)
    a = make_affine_fixer(X1, Y1, s1, -1)
    b = make_affine_fixer(X2, Y2, s2, -1)
    assert product_index([a, b]) == 1
    c = make_affine_fixer(X2, Y2, s2, 1)
    assert product_index([a, c]) == -1


def test_zero_dimensional_fixer_only_plus_one():
    point = Simplex.of([[F(1)]])
    fx = make_affine_fixer(point, point, [F(1)], 1)
    assert fx.index == 1
    with pytest.raises(IndexError_):
        make_affine_fixer(point, point, [F(1)], -1)


# -- component indices -----------------------------------------------------


def test_km_component_index_plus_one(km):
    es = support_enumeration(km)
    cg = components(es)
    assert len(cg.components) == 1
    subs = [cg.subsets[i] for i in cg.components[0]]
    assert component_index(km, subs) == 1


def test_component_index_on_singleton_matches_determinant(matching_pennies):
    es = support_enumeration(matching_pennies)
    cg = components(es)
    subs = [cg.subsets[i] for i in cg.components[0]]
    assert component_index(matching_pennies, subs) == 1


def test_game_index_report(km_p2):
    report = game_index_report(km_p2)
    assert sorted(e.index for e in report.entries) == [-1, 1, 1]
    assert report.total() == 1
    data = report.to_json()
    assert data["total"] == 1 and len(data["entries"]) == 3
