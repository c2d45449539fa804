import random
from fractions import Fraction

import pytest

from equilib.games import FiniteGame, MixedStrategy, is_equilibrium
from equilib.solver import (
    brute_force_equilibria,
    components,
    support_enumeration,
    three_player_support_enumeration,
)

F = Fraction


def random_bimatrix(seed, rows=3, cols=3):
    rng = random.Random(seed)
    labels = [[f"r{i}" for i in range(rows)], [f"c{j}" for j in range(cols)]]
    payoffs = {
        (a, b): (F(rng.randint(0, 20)), F(rng.randint(0, 20)))
        for a in labels[0]
        for b in labels[1]
    }
    return FiniteGame.of(["p1", "p2"], labels, payoffs)


def test_pure_coordination(coordination):
    es = support_enumeration(coordination)
    assert es.exhaustive
    profiles = {
        tuple(tuple(sorted(s.weights)) for s in p) for p in es.isolated
    }
    assert (((("A", F(1)),), (("C", F(1)),))) in profiles
    assert (((("B", F(1)),), (("D", F(1)),))) in profiles
    assert len(es.isolated) == 3  # two pure plus the mixed
    assert not es.subsets


def test_matching_pennies_unique_mixed(matching_pennies):
    es = support_enumeration(matching_pennies)
    assert len(es.isolated) == 1 and not es.subsets
    eq = es.isolated[0]
    assert all(set(s.weights) == {(l, F(1, 2)) for l in s.support()} for s in eq)


def test_km_maximal_subsets(km):
    es = support_enumeration(km)
    assert es.exhaustive
    assert not es.isolated  # the entire equilibrium set is one continuum
    supports = {ns.supports for ns in es.subsets}
    assert supports == {
        (("t",), ("L", "R")),
        (("m",), ("M", "R")),
        (("b",), ("L", "M")),
        (("t", "m"), ("R",)),
        (("t", "b"), ("L",)),
        (("m", "b"), ("M",)),
    }


def test_km_component_cycle(km):
    es = support_enumeration(km)
    cg = components(es)
    assert len(cg.components) == 1
    adj = cg.adjacency()
    assert all(len(neighbors) == 2 for neighbors in adj.values())


def test_all_enumerated_profiles_are_equilibria(km_p2):
    es = support_enumeration(km_p2)
    for p in es.isolated:
        assert is_equilibrium(km_p2, p)
    for ns in es.subsets:
        for p in ns.vertex_profiles():
            assert is_equilibrium(km_p2, p)


@pytest.mark.parametrize("seed", range(8))
def test_agrees_with_grid_oracle(seed):
    """Every grid profile the brute-force oracle flags lies in some subset."""
    game = random_bimatrix(seed, rows=2, cols=2)
    es = support_enumeration(game)
    subs = es.all_subsets()
    for prof in brute_force_equilibria(game, 4):
        assert any(ns.contains(game, prof) for ns in subs)


def test_degenerate_duplicate_column():
    # two payoff-identical columns create a continuum, not isolated points
    game = FiniteGame.of(
        ["p1", "p2"],
        [["a", "b"], ["x", "y"]],
        {
            ("a", "x"): (1, 1),
            ("a", "y"): (1, 1),
            ("b", "x"): (0, 0),
            ("b", "y"): (0, 0),
        },
    )
    es = support_enumeration(game)
    assert not es.isolated
    assert len(es.subsets) == 1
    ns = es.subsets[0]
    mid = (
        MixedStrategy.pure("a"),
        MixedStrategy.of({"x": F(1, 2), "y": F(1, 2)}),
    )
    assert ns.contains(game, mid)


# -- three players ---------------------------------------------------------


def three_player_pennies():
    labels = [["H0", "T0"], ["H1", "T1"], ["H2", "T2"]]

    def pay(a, b, c):
        # each player wants to match the next one around the cycle
        return (
            F(1 if a[0] == b[0] else -1),
            F(1 if b[0] == c[0] else -1),
            F(1 if c[0] == a[0] else -1),
        )

    payoffs = {
        (a, b, c): pay(a, b, c)
        for a in labels[0]
        for b in labels[1]
        for c in labels[2]
    }
    return FiniteGame.of(["p1", "p2", "p3"], labels, payoffs)


def test_three_player_cyclic_matching():
    game = three_player_pennies()
    es = three_player_support_enumeration(game)
    found = [
        p
        for p in es.isolated
        if all(set(w for _, w in s.weights) == {F(1, 2)} for s in p)
    ]
    assert found, "uniform mixed equilibrium not found"
    for p in es.isolated:
        assert is_equilibrium(game, p)


def test_three_player_pure_coordination():
    labels = [["a", "b"], ["a", "b"], ["a", "b"]]
    payoffs = {}
    for p in [(x, y, z) for x in "ab" for y in "ab" for z in "ab"]:
        v = F(1) if len(set(p)) == 1 else F(0)
        payoffs[p] = (v, v, v)
    game = FiniteGame.of(["p1", "p2", "p3"], labels, payoffs)
    es = three_player_support_enumeration(game)
    pure = {
        tuple(s.support()[0] for s in p)
        for p in es.isolated
        if all(s.is_pure() for s in p)
    }
    assert {("a", "a", "a"), ("b", "b", "b")} <= pure
    for p in es.isolated:
        assert is_equilibrium(game, p)


def test_three_player_flags_degenerate_continuum():
    # one player's payoffs constant: expect a flagged, non-exhaustive answer
    labels = [["a", "b"], ["x", "y"], ["u", "v"]]
    payoffs = {}
    for p in [(a, b, c) for a in "ab" for b in "xy" for c in "uv"]:
        payoffs[p] = (F(0), F(0), F(0))
    game = FiniteGame.of(["p1", "p2", "p3"], labels, payoffs)
    es = three_player_support_enumeration(game)
    assert not es.exhaustive
    assert es.notes
