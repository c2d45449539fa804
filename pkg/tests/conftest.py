from fractions import Fraction

import pytest

from equilib.examples import km_game, km_perturbation_1, km_perturbation_2
from equilib.games import FiniteGame


@pytest.fixture
def km():
    return km_game()


@pytest.fixture
def km_p1():
    return km_perturbation_1(Fraction(1, 10))


@pytest.fixture
def km_p2():
    return km_perturbation_2(Fraction(1, 10))


@pytest.fixture
def matching_pennies():
    return FiniteGame.of(
        ["p1", "p2"],
        [["A", "B"], ["C", "D"]],
        {
            ("A", "C"): (1, -1),
            ("A", "D"): (-1, 1),
            ("B", "C"): (-1, 1),
            ("B", "D"): (1, -1),
        },
    )


@pytest.fixture
def coordination():
    return FiniteGame.of(
        ["p1", "p2"],
        [["A", "B"], ["C", "D"]],
        {
            ("A", "C"): (2, 2),
            ("A", "D"): (0, 0),
            ("B", "C"): (0, 0),
            ("B", "D"): (1, 1),
        },
    )
