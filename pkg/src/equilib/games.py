"""Finite and polytope-form games with exact rational payoffs.

The central objects are :class:`FiniteGame` (normal form, payoff tensor over
pure profiles) and :class:`PolytopeGame` (strategy sets given as vertex lists,
payoffs extended multiaffinely).  All evaluation is exact; best replies and
dominance are decided by rational comparison and exact linear programming.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .linalg import ZERO, ONE, linprog
from .rational import RationalParseError, format_rational, parse_rational

Label = str


class GameError(ValueError):
    """Structured error for malformed games/profiles (message names the culprit)."""


@dataclass(frozen=True)
class MixedStrategy:
    """Probability distribution over pure-strategy labels.

    Weights are Fractions, nonnegative, summing to exactly 1; zero weights
    may be omitted or present (they compare equal either way).
    """

    weights: tuple[tuple[Label, Fraction], ...]

    @staticmethod
    def of(weights: Mapping[Label, Fraction | int | str]) -> "MixedStrategy":
        items = []
        total = ZERO
        for label, w in weights.items():
            w = parse_rational(w) if isinstance(w, str) else Fraction(w)
            if w < 0:
                raise GameError(f"negative weight {w} on strategy {label!r}")
            if w > 0:
                items.append((label, w))
            total += w
        if total != 1:
            raise GameError(f"weights sum to {total}, expected 1")
        return MixedStrategy(tuple(sorted(items)))

    @staticmethod
    def pure(label: Label) -> "MixedStrategy":
        return MixedStrategy(((label, ONE),))

    def as_dict(self) -> dict[Label, Fraction]:
        return dict(self.weights)

    def weight(self, label: Label) -> Fraction:
        return dict(self.weights).get(label, ZERO)

    def support(self) -> tuple[Label, ...]:
        return tuple(label for label, w in self.weights if w > 0)

    def as_vector(self, labels: Sequence[Label]) -> list[Fraction]:
        d = self.as_dict()
        missing = set(d) - set(labels)
        if missing:
            raise GameError(f"strategy labels {sorted(missing)} not in {list(labels)}")
        return [d.get(label, ZERO) for label in labels]

    def is_pure(self) -> bool:
        return len(self.weights) == 1

    def __str__(self) -> str:
        return " + ".join(f"{format_rational(w)}*{s}" for s, w in self.weights)


Profile = tuple[MixedStrategy, ...]


def profile_of(*strategies: MixedStrategy | Mapping | Label) -> Profile:
    out = []
    for s in strategies:
        if isinstance(s, MixedStrategy):
            out.append(s)
        elif isinstance(s, str):
            out.append(MixedStrategy.pure(s))
        else:
            out.append(MixedStrategy.of(s))
    return tuple(out)


@dataclass(frozen=True)
class FiniteGame:
    """Normal-form game: player labels, per-player strategy labels, payoff tensor."""

    players: tuple[Label, ...]
    strategies: tuple[tuple[Label, ...], ...]
    payoffs: Mapping[tuple[Label, ...], tuple[Fraction, ...]] = field(hash=False)

    def __post_init__(self):
        if len(self.players) != len(self.strategies):
            raise GameError("player count does not match strategy lists")
        for profile in itertools.product(*self.strategies):
            entry = self.payoffs.get(profile)
            if entry is None:
                raise GameError(f"payoff tensor missing entry for pure profile {profile}")
            if len(entry) != len(self.players):
                raise GameError(f"payoff entry for {profile} has wrong arity")

    @staticmethod
    def of(
        players: Sequence[Label],
        strategies: Sequence[Sequence[Label]],
        payoffs: Mapping[tuple, Sequence],
    ) -> "FiniteGame":
        tensor = {
            tuple(k): tuple(Fraction(x) for x in v) for k, v in payoffs.items()
        }
        return FiniteGame(tuple(players), tuple(map(tuple, strategies)), tensor)

    @property
    def num_players(self) -> int:
        return len(self.players)

    def pure_profiles(self) -> Iterable[tuple[Label, ...]]:
        return itertools.product(*self.strategies)

    def check_profile(self, profile: Profile) -> None:
        if len(profile) != self.num_players:
            raise GameError(
                f"profile has {len(profile)} strategies for {self.num_players} players"
            )
        for n, sigma in enumerate(profile):
            extra = set(sigma.support()) - set(self.strategies[n])
            if extra:
                raise GameError(
                    f"player {self.players[n]!r}: unknown strategies {sorted(extra)}"
                )

    def restrict(self, keep: Sequence[Sequence[Label]]) -> "FiniteGame":
        """Subgame on the given strategy subsets (order taken from the game)."""
        kept = tuple(
            tuple(s for s in self.strategies[n] if s in set(keep[n]))
            for n in range(self.num_players)
        )
        tensor = {
            p: self.payoffs[p] for p in itertools.product(*kept)
        }
        return FiniteGame(self.players, kept, tensor)


def payoff(game: FiniteGame, profile: Profile, player: int) -> Fraction:
    """Multilinear expected payoff of `player` under a mixed profile."""
    game.check_profile(profile)
    total = ZERO
    for pure in itertools.product(*(sigma.support() for sigma in profile)):
        prob = ONE
        for sigma, s in zip(profile, pure):
            prob *= sigma.weight(s)
        total += prob * game.payoffs[pure][player]
    return total


def payoff_all(game: FiniteGame, profile: Profile) -> tuple[Fraction, ...]:
    return tuple(payoff(game, profile, n) for n in range(game.num_players))


def payoff_against(
    game: FiniteGame, profile: Profile, player: int, strategy: MixedStrategy | Label
) -> Fraction:
    """Payoff to `player` when deviating to `strategy`, others as in `profile`."""
    if isinstance(strategy, str):
        strategy = MixedStrategy.pure(strategy)
    deviated = tuple(
        strategy if n == player else sigma for n, sigma in enumerate(profile)
    )
    return payoff(game, deviated, player)


def best_replies(game: FiniteGame, profile: Profile, player: int) -> set[Label]:
    """Pure strategies attaining the exact maximum payoff against `profile`."""
    values = {
        s: payoff_against(game, profile, player, s) for s in game.strategies[player]
    }
    best = max(values.values())
    return {s for s, v in values.items() if v == best}


def eps_best_replies(
    game: FiniteGame, profile: Profile, player: int, eps: Fraction
) -> set[Label]:
    """Pure strategies within (strictly less than) eps of the best payoff."""
    eps = Fraction(eps)
    if eps <= 0:
        raise GameError(f"eps must be positive, got {eps}")
    values = {
        s: payoff_against(game, profile, player, s) for s in game.strategies[player]
    }
    best = max(values.values())
    return {s for s, v in values.items() if v > best - eps}


def is_equilibrium(game: FiniteGame, profile: Profile) -> bool:
    """True iff every player's support consists of best replies."""
    game.check_profile(profile)
    for n in range(game.num_players):
        br = best_replies(game, profile, n)
        if not set(profile[n].support()) <= br:
            return False
    return True


def in_graph_br_eps(
    game: FiniteGame, sigma: Profile, tau: Profile, eps: Fraction
) -> bool:
    """True iff each tau_n is an eps-best reply (strict shortfall) against sigma."""
    eps = Fraction(eps)
    if eps <= 0:
        raise GameError(f"eps must be positive, got {eps}")
    game.check_profile(sigma)
    game.check_profile(tau)
    for n in range(game.num_players):
        value = payoff_against(game, sigma, n, tau[n])
        best = max(
            payoff_against(game, sigma, n, s) for s in game.strategies[n]
        )
        if not value > best - eps:
            return False
    return True


@dataclass(frozen=True)
class Elimination:
    player: int
    strategy: Label
    witness: MixedStrategy  # mixture over remaining strategies that strictly dominates


def _dominating_mixture(
    game: FiniteGame, player: int, strategy: Label
) -> Optional[MixedStrategy]:
    """Mixture over the player's other strategies strictly dominating `strategy`.

    Exact LP: maximize the worst-case margin; a strictly positive optimum
    yields a witness mixture.
    """
    others = [s for s in game.strategies[player] if s != strategy]
    if not others:
        return None
    opp_profiles = list(
        itertools.product(*(self_s for n, self_s in enumerate(game.strategies) if n != player))
    )

    def u(own: Label, opp: tuple[Label, ...]) -> Fraction:
        pure = list(opp)
        pure.insert(player, own)
        return game.payoffs[tuple(pure)][player]

    # Variables: y_r (r in others), delta.  Maximize delta subject to
    # sum_r y_r u(r, p) - delta >= u(strategy, p) for all opponent profiles p.
    nvars = len(others) + 1
    c = [ZERO] * len(others) + [ONE]
    A_ub = []
    b_ub = []
    for p in opp_profiles:
        row = [-u(r, p) for r in others] + [ONE]
        A_ub.append(row)
        b_ub.append(-u(strategy, p))
    A_eq = [[ONE] * len(others) + [ZERO]]
    b_eq = [ONE]
    # Bound delta so the LP stays bounded.
    spread = max(abs(v) for vs in game.payoffs.values() for v in vs) * 2 + 1
    A_ub.append([ZERO] * len(others) + [ONE])
    b_ub.append(spread)
    res = linprog(c, A_ub, b_ub, A_eq, b_eq, maximize=True)
    if res.status != "optimal" or res.value is None or res.value <= 0:
        return None
    y = res.x[: len(others)]
    return MixedStrategy.of({r: w for r, w in zip(others, y) if w > 0})


def eliminate_strictly_dominated(
    game: FiniteGame,
) -> tuple[FiniteGame, list[Elimination]]:
    """Iterated elimination of strictly dominated strategies (mixed dominators).

    Returns the reduced game and the trace of removals, each carrying the
    dominating mixture as a witness.
    """
    current = game
    trace: list[Elimination] = []
    changed = True
    while changed:
        changed = False
        for player in range(current.num_players):
            if len(current.strategies[player]) <= 1:
                continue
            for s in current.strategies[player]:
                witness = _dominating_mixture(current, player, s)
                if witness is not None:
                    trace.append(Elimination(player, s, witness))
                    keep = [list(strats) for strats in current.strategies]
                    keep[player] = [t for t in keep[player] if t != s]
                    current = current.restrict(keep)
                    changed = True
                    break
            if changed:
                break
    return current, trace


# --------------------------------------------------------------------------
# Polytope-form games
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PolytopeGame:
    """Game whose strategy sets are polytopes given by labeled rational vertices.

    `payoffs` maps tuples of vertex labels (one per player) to per-player
    rationals; evaluation extends multiaffinely via explicit
    convex-combination certificates.  Well-definedness (independence of the
    certificate) is the caller's responsibility and holds for all games
    constructed in this package, whose vertex payoffs are restrictions of
    multiaffine functions.
    """

    players: tuple[Label, ...]
    vertex_labels: tuple[tuple[Label, ...], ...]
    vertex_points: tuple[tuple[tuple[Fraction, ...], ...], ...]
    payoffs: Mapping[tuple[Label, ...], tuple[Fraction, ...]] = field(hash=False)

    def vertex_point(self, player: int, label: Label) -> tuple[Fraction, ...]:
        idx = self.vertex_labels[player].index(label)
        return self.vertex_points[player][idx]


Certificate = MixedStrategy  # weights over a player's vertex labels


def polytope_payoff(
    game: PolytopeGame,
    certificates: Sequence[Certificate],
    points: Optional[Sequence[Sequence[Fraction]]] = None,
) -> tuple[Fraction, ...]:
    """Multiaffine payoff at the points certified as convex combinations.

    If `points` is given, each certificate is checked to reproduce its point
    exactly; a mismatch is an error.
    """
    if len(certificates) != len(game.players):
        raise GameError("one certificate per player required")
    if points is not None:
        for n, (cert, pt) in enumerate(zip(certificates, points)):
            combo = None
            for label, w in cert.weights:
                v = game.vertex_point(n, label)
                term = [w * x for x in v]
                combo = term if combo is None else [a + b for a, b in zip(combo, term)]
            if combo is None or list(combo) != [Fraction(x) for x in pt]:
                raise GameError(
                    f"certificate for player {game.players[n]!r} does not reproduce its point"
                )
    totals = [ZERO] * len(game.players)
    for pure in itertools.product(*(c.support() for c in certificates)):
        prob = ONE
        for cert, label in zip(certificates, pure):
            prob *= cert.weight(label)
        entry = game.payoffs[pure]
        for n in range(len(totals)):
            totals[n] += prob * entry[n]
    return tuple(totals)


# --------------------------------------------------------------------------
# Game file format (JSON)
# --------------------------------------------------------------------------


def game_to_json(game: FiniteGame) -> dict:
    def build(prefix: tuple[Label, ...], depth: int):
        if depth == game.num_players:
            return [format_rational(v) for v in game.payoffs[prefix]]
        return [build(prefix + (s,), depth + 1) for s in game.strategies[depth]]

    return {
        "players": list(game.players),
        "strategies": [list(s) for s in game.strategies],
        "payoffs": build((), 0),
    }


def game_from_json(data: dict) -> FiniteGame:
    try:
        players = [str(p) for p in data["players"]]
        strategies = [[str(s) for s in strats] for strats in data["strategies"]]
        raw = data["payoffs"]
    except (KeyError, TypeError) as exc:
        raise GameError(f"malformed game file: missing/invalid section ({exc})") from exc
    payoffs: dict[tuple[Label, ...], tuple[Fraction, ...]] = {}

    def walk(node, prefix: tuple[Label, ...], depth: int, path: str):
        if depth == len(strategies):
            if not isinstance(node, list) or len(node) != len(players):
                raise GameError(f"payoff entry at {path} must list one rational per player")
            try:
                payoffs[prefix] = tuple(parse_rational(v) for v in node)
            except RationalParseError as exc:
                raise GameError(f"payoff entry at {path}: {exc}") from exc
            return
        if not isinstance(node, list) or len(node) != len(strategies[depth]):
            raise GameError(
                f"payoff array at {path} must have {len(strategies[depth])} entries"
            )
        for s, child in zip(strategies[depth], node):
            walk(child, prefix + (s,), depth + 1, f"{path}[{s}]")

    walk(raw, (), 0, "payoffs")
    return FiniteGame.of(players, strategies, payoffs)


def load_game(path: str) -> FiniteGame:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GameError(f"{path}: invalid JSON at line {exc.lineno} col {exc.colno}") from exc
    return game_from_json(data)


def save_game(game: FiniteGame, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(game_to_json(game), fh, indent=2)
        fh.write("\n")
