"""Fixed-point index computations.

``index_regular`` evaluates the sign of the support-restricted indifference
Jacobian, normalized per support-size signature so strict pure equilibria
get +1.  ``degree_oracle`` independently computes the topological degree of
a displacement map over a box by exact sign counting on a simplicial
decomposition of the boundary grid.  ``component_index`` sums regular
indices of deterministically perturbed games near a component.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .games import (
    FiniteGame,
    GameError,
    MixedStrategy,
    Profile,
    payoff,
    payoff_against,
)
from .geometry import Simplex, in_convex_hull
from .linalg import (
    ONE,
    ZERO,
    Chart,
    Matrix,
    Vector,
    determinant,
    frac_vec,
    linprog,
    solve_unique,
    vec_scale,
    vec_sub,
)
from .solver import (
    ComponentGraph,
    EquilibriumSet,
    NashSubset,
    components,
    support_enumeration,
)


class IndexError_(GameError):
    """Raised when an index computation cannot be carried out."""


# --------------------------------------------------------------------------
# Regular-equilibrium index via the indifference Jacobian
# --------------------------------------------------------------------------


def _indifference_jacobian(game: FiniteGame, eq: Profile) -> Matrix:
    """Jacobian of the support-restricted indifference system.

    Variables: weights of player 1 on its support I, weights of player 2 on
    its support J, and the two equilibrium payoffs v1, v2.  Equations: each
    supported strategy earns the owner's payoff, and each weight vector sums
    to one.
    """
    I = list(eq[0].support())
    J = list(eq[1].support())
    k1, k2 = len(I), len(J)
    size = k1 + k2 + 2
    M: Matrix = [[ZERO] * size for _ in range(size)]
    for a, i in enumerate(I):  # player 1 indifference over i in I
        for b, j in enumerate(J):
            M[a][k1 + b] = game.payoffs[(i, j)][0]
        M[a][k1 + k2] = -ONE
    for b, j in enumerate(J):  # player 2 indifference over j in J
        for a, i in enumerate(I):
            M[k1 + b][a] = game.payoffs[(i, j)][1]
        M[k1 + b][k1 + k2 + 1] = -ONE
    for a in range(k1):
        M[k1 + k2][a] = ONE
    for b in range(k2):
        M[k1 + k2 + 1][k1 + b] = ONE
    return M


_CALIBRATION: dict[int, int] = {}


def _reference_game(k: int) -> tuple[FiniteGame, Profile]:
    """A k x k game whose unique equilibrium is uniform and has index +1.

    Player 1 wants to match, player 2 to mismatch; for k = 1 the unique
    (strict) pure equilibrium stands in.
    """
    rows = [f"r{i}" for i in range(k)]
    cols = [f"c{j}" for j in range(k)]
    pay = {
        (rows[i], cols[j]): (
            Fraction(1 if i == j else 0),
            Fraction(0 if i == j else 1) if k > 1 else Fraction(1),
        )
        for i in range(k)
        for j in range(k)
    }
    g = FiniteGame.of(["1", "2"], [rows, cols], pay)
    u = Fraction(1, k)
    prof = (
        MixedStrategy.of({r: u for r in rows}),
        MixedStrategy.of({c: u for c in cols}),
    )
    return g, prof


def _calibration(k: int) -> int:
    if k not in _CALIBRATION:
        g, prof = _reference_game(k)
        d = determinant(_indifference_jacobian(g, prof))
        assert d != 0, "reference game must be regular"
        _CALIBRATION[k] = 1 if d > 0 else -1
    return _CALIBRATION[k]


def is_regular(game: FiniteGame, eq: Profile) -> bool:
    try:
        _check_regular(game, eq)
        return True
    except IndexError_:
        return False


def _check_regular(game: FiniteGame, eq: Profile) -> Matrix:
    if game.num_players != 2:
        raise IndexError_("index_regular handles exactly 2 players")
    I, J = eq[0].support(), eq[1].support()
    if len(I) != len(J):
        raise IndexError_(
            "unequal support sizes: equilibrium is not regular; use component_index"
        )
    for n, sup in ((0, I), (1, J)):
        v = payoff(game, eq, n)
        for s in game.strategies[n]:
            dev = payoff_against(game, eq, n, s)
            if s in sup:
                if dev != v:
                    raise IndexError_(f"profile is not an equilibrium at {s}")
            elif dev >= v:
                raise IndexError_(
                    f"off-support strategy {s} is not strictly inferior; "
                    "use component_index"
                )
    M = _indifference_jacobian(game, eq)
    if determinant(M) == 0:
        raise IndexError_("singular indifference Jacobian; use component_index")
    return M


def index_regular(game: FiniteGame, eq: Profile) -> int:
    """Index of a regular equilibrium of a 2-player game: +1 or -1."""
    M = _check_regular(game, eq)
    d = determinant(M)
    k = len(eq[0].support())
    return (1 if d > 0 else -1) * _calibration(k)


# --------------------------------------------------------------------------
# Degree oracle
# --------------------------------------------------------------------------

Box = Sequence[tuple[Fraction, Fraction]]

_RAY_SCHEDULE = [Fraction(1, p) for p in (10, 13, 17, 23, 31, 43, 59, 71)]


def _kuhn_simplices(dim: int):
    """Kuhn triangulation of the unit cube: vertex chains with permutation sign."""
    for perm in itertools.permutations(range(dim)):
        sign = _perm_sign(perm)
        chain = [tuple(0 for _ in range(dim))]
        for axis in perm:
            last = list(chain[-1])
            last[axis] += 1
            chain.append(tuple(last))
        yield chain, sign


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _boundary_simplices(box: Box, grid: int):
    """Oriented (d-1)-simplices of the triangulated boundary grid.

    Yields (vertices, orientation) with orientation +1/-1 relative to the
    outward normal of the facet the simplex lies on.
    """
    d = len(box)
    steps = [Fraction(hi - lo, grid) for lo, hi in box]
    for axis in range(d):
        for side in (0, 1):
            fixed = box[axis][side]
            normal_sign = 1 if side == 1 else -1
            free = [a for a in range(d) if a != axis]
            # orientation of (e_free..., outward normal) as a frame of R^d
            frame = [[ONE if r == a else ZERO for r in range(d)] for a in free]
            frame.append(
                [Fraction(normal_sign) if r == axis else ZERO for r in range(d)]
            )
            facet_or = 1 if determinant([list(col) for col in zip(*frame)]) > 0 else -1
            for corner in itertools.product(range(grid), repeat=d - 1):
                base = [ZERO] * d
                base[axis] = fixed
                for a, c in zip(free, corner):
                    base[a] = box[a][0] + steps[a] * c
                for chain, sign in _kuhn_simplices(d - 1):
                    verts = []
                    for offs in chain:
                        v = list(base)
                        for a, o in zip(free, offs):
                            v[a] = v[a] + steps[a] * o
                        verts.append(tuple(v))
                    yield verts, sign * facet_or


_ORACLE_CALIBRATION: dict[int, int] = {}


def _raw_degree(values: list[tuple[Vector, Vector]], d: int, ray: Vector) -> Optional[int]:
    """Signed ray-crossing count; None when the ray is non-generic."""
    total = 0
    for verts_w, orient in values:
        w = verts_w
        n = len(w)  # == d
        rows = [[w[i][r] for i in range(n)] + [-ray[r]] for r in range(d)]
        rows.append([ONE] * n + [ZERO])
        rhs = [ZERO] * d + [ONE]
        sol = solve_unique(rows, rhs)
        if sol is None:
            # singular system: degenerate only if the ray actually meets the image
            sys_ub = [[-ONE if j == i else ZERO for j in range(n + 1)] for i in range(n + 1)]
            res = linprog([ZERO] * (n + 1), sys_ub, [ZERO] * (n + 1), rows, rhs)
            if res.status == "optimal":
                return None  # non-transversal crossing: retry with another ray
            continue
        lam, t = sol[:n], sol[n]
        if min(lam) >= 0 and t >= 0 and (t == 0 or any(l == 0 for l in lam)):
            return None  # crossing on a face: retry with another ray
        if all(l > 0 for l in lam) and t > 0:
            mat = [vec_sub(w[i], w[0]) for i in range(1, n)] + [list(ray)]
            det = determinant([list(col) for col in zip(*mat)])
            if det == 0:
                return None
            total += orient * (1 if det > 0 else -1)
    return total


def _oracle_calibration(d: int) -> int:
    """Global sign fixed so that the identity displacement has degree +1."""
    if d not in _ORACLE_CALIBRATION:
        box = [(Fraction(-1), Fraction(1))] * d
        center = [ZERO] * d
        raw = None
        for eps in _RAY_SCHEDULE:
            ray = [eps**i for i in range(d)]
            vals = [
                ([vec_sub(v, center) for v in verts], orient)
                for verts, orient in _boundary_simplices(box, 1)
            ]
            raw = _raw_degree(vals, d, ray)
            if raw is not None:
                break
        assert raw in (1, -1), f"oracle calibration failed in dimension {d}"
        _ORACLE_CALIBRATION[d] = raw
    return _ORACLE_CALIBRATION[d]


def degree_oracle(
    fmap: Callable[[Vector], Vector], region: Box, grid: int
) -> int:
    """Topological degree of (Id - fmap) over the box `region`.

    The displacement is evaluated exactly at the boundary grid vertices and
    interpolated simplex-wise; crossings of a generic ray are counted with
    signs.  Boundary simplices whose displacement values surround the origin
    trigger an error asking for a finer grid.
    """
    d = len(region)
    if d == 0:
        return 1
    if grid < 1:
        raise IndexError_("grid must be >= 1")
    for lo, hi in region:
        if not lo < hi:
            raise IndexError_("region must have positive side lengths")

    def disp(x: Vector) -> Vector:
        return vec_sub(x, fmap(list(x)))

    if d == 1:
        (lo, hi) = region[0]
        vals = [disp([lo])[0], disp([hi])[0]]
        if any(v == 0 for v in vals):
            raise IndexError_("fixed point on the region boundary")
        sl, sh = (1 if vals[0] > 0 else -1), (1 if vals[1] > 0 else -1)
        return (sh - sl) // 2

    cache: dict[tuple, Vector] = {}

    def disp_cached(v: tuple) -> Vector:
        if v not in cache:
            w = disp(list(v))
            if all(c == 0 for c in w):
                raise IndexError_("fixed point on the boundary grid; refine the grid")
            cache[v] = w
        return cache[v]

    values = []
    for verts, orient in _boundary_simplices(region, grid):
        w = [disp_cached(v) for v in verts]
        if in_convex_hull(w, [ZERO] * d):
            raise IndexError_(
                "displacement values surround the origin on a boundary simplex; "
                "refine the grid"
            )
        values.append((w, orient))
    for eps in _RAY_SCHEDULE:
        ray = [eps**i for i in range(d)]
        raw = _raw_degree(values, d, ray)
        if raw is not None:
            return raw * _oracle_calibration(d)
    raise IndexError_("no generic ray direction found; refine the grid")


# --------------------------------------------------------------------------
# Nash-map degree for cross-validation
# --------------------------------------------------------------------------


def _nash_map(game: FiniteGame):
    """Gain-adjustment self-map of the product of simplices (2 players).

    Works in local coordinates that drop each player's last weight.
    """
    labels = [list(s) for s in game.strategies]
    k1, k2 = len(labels[0]), len(labels[1])

    def to_profile(x: Vector) -> Profile:
        w1 = list(x[: k1 - 1]) + [ONE - sum(x[: k1 - 1], ZERO)]
        w2 = list(x[k1 - 1 :]) + [ONE - sum(x[k1 - 1 :], ZERO)]
        return (
            MixedStrategy.of({s: w for s, w in zip(labels[0], w1)}),
            MixedStrategy.of({s: w for s, w in zip(labels[1], w2)}),
        )

    def fmap(x: Vector) -> Vector:
        prof = to_profile(x)
        out: list[Fraction] = []
        for n in range(2):
            base = payoff(game, prof, n)
            gains = [
                max(ZERO, payoff_against(game, prof, n, s) - base)
                for s in labels[n]
            ]
            denom = ONE + sum(gains, ZERO)
            w = prof[n].as_vector(labels[n])
            new = [(w[i] + gains[i]) / denom for i in range(len(labels[n]))]
            out.extend(new[:-1])
        return out

    return fmap, (k1 - 1) + (k2 - 1), to_profile


def _local_coords(eq: Profile, game: FiniteGame) -> Vector:
    out: list[Fraction] = []
    for n in range(2):
        v = eq[n].as_vector(list(game.strategies[n]))
        out.extend(v[:-1])
    return out


def index_via_degree(game: FiniteGame, eq: Profile, grid: int = 2) -> int:
    """Index of a regular equilibrium via the degree oracle on the Nash map.

    The game is restricted to the equilibrium's supports (valid for regular
    equilibria: off-support strategies are strictly inferior nearby) and the
    degree of the displacement is computed over a small box around the
    equilibrium in local coordinates.
    """
    _check_regular(game, eq)
    restricted = game.restrict([list(eq[n].support()) for n in range(2)])
    fmap, dim, _ = _nash_map(restricted)
    if dim == 0:
        return 1
    x0 = _local_coords(eq, restricted)
    # stay inside the simplex product and away from other equilibria
    limit = min(
        min((c for c in x0), default=ONE),
        min(
            (ONE - sum(x0[a:b], ZERO))
            for a, b in ((0, len(eq[0].support()) - 1), (len(eq[0].support()) - 1, dim))
            if b > a
        ),
    )
    for p in support_enumeration(restricted).all_vertex_profiles():
        o = _local_coords(p, restricted)
        gap = max(abs(a - b) for a, b in zip(x0, o))
        if gap > 0:
            limit = min(limit, gap)
    radius = limit / 2
    for _ in range(6):
        region = [(c - radius, c + radius) for c in x0]
        try:
            return degree_oracle(fmap, region, grid)
        except IndexError_:
            radius /= 2
    raise IndexError_("degree oracle failed to isolate the equilibrium")


# --------------------------------------------------------------------------
# Affine fixers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineFixer:
    """Affine bijection X -> Y fixing sigma, with recorded index sign."""

    linear: tuple[tuple[Fraction, ...], ...]
    sigma: tuple[Fraction, ...]
    domain: Simplex
    codomain: Simplex
    index: int
    chart: Chart

    def apply(self, point: Sequence) -> Vector:
        u = self.chart.to_local([Fraction(c) for c in point])
        v = [sum(self.linear[r][c] * u[c] for c in range(len(u))) for r in range(len(u))]
        return self.chart.to_ambient(v)

    def local_map(self) -> Callable[[Vector], Vector]:
        A = self.linear

        def f(u: Vector) -> Vector:
            return [
                sum(A[r][c] * u[c] for c in range(len(u))) for r in range(len(u))
            ]

        return f


def _linear_part_for_matching(
    chart: Chart, xs: list[Vector], ys: list[Vector]
) -> Optional[Matrix]:
    """A with A(local(x_i)) = local(y_i) for all i, or None."""
    d = chart.dim
    U = [chart.to_local(x) for x in xs]
    V = [chart.to_local(y) for y in ys]
    cols = list(range(len(U)))
    # pick d independent columns of U
    from .linalg import matrix_rank

    for pick in itertools.combinations(cols, d):
        Um = [[U[i][r] for i in pick] for r in range(d)]
        if determinant(Um) == 0:
            continue
        Vm = [[V[i][r] for i in pick] for r in range(d)]
        # A = Vm * Um^{-1}: solve A Um = Vm column-wise via transposed systems
        A: Matrix = [[ZERO] * d for _ in range(d)]
        for r in range(d):
            # row r of A satisfies Um^T (A_r)^T = (Vm row r)^T
            UmT = [[Um[c][i] for c in range(d)] for i in range(d)]
            row = solve_unique(UmT, [Vm[r][i] for i in range(d)])
            if row is None:
                return None
            A[r] = row
        # verify all vertices map correctly
        for i in cols:
            img = [
                sum(A[r][c] * U[i][c] for c in range(d)) for r in range(d)
            ]
            if img != V[i]:
                return None
        return A
    return None


def make_affine_fixer(X: Simplex, Y: Simplex, sigma: Sequence, r: int) -> AffineFixer:
    """Affine bijection of X onto Y whose unique fixed point sigma has index r.

    X must lie in the interior of Y and sigma must be the common barycenter.
    The vertex matching is searched over permutations until the recorded
    sign det(I - A) equals r.
    """
    if r not in (1, -1):
        raise IndexError_("r must be +1 or -1")
    sig = frac_vec(sigma)
    if frac_vec(X.barycenter()) != sig or frac_vec(Y.barycenter()) != sig:
        raise IndexError_("sigma must be the barycenter of both simplices")
    if X.dim != Y.dim:
        raise IndexError_("simplices must have equal dimension")
    if X.dim == 0:
        if r == 1:
            return AffineFixer((), tuple(sig), X, Y, 1, Chart([sig]))
        raise IndexError_("a point admits only index +1")
    for v in X.vertices:
        if not Y.strictly_contains(v):
            raise IndexError_("X must lie in the interior of Y")
    d = X.dim
    chart = Chart([sig] + [list(v) for v in X.vertices])
    xs = [list(v) for v in X.vertices]
    for perm in itertools.permutations(range(d + 1)):
        ys = [list(Y.vertices[perm[i]]) for i in range(d + 1)]
        A = _linear_part_for_matching(chart, xs, ys)
        if A is None:
            continue
        IA = [
            [(ONE if i == j else ZERO) - A[i][j] for j in range(d)] for i in range(d)
        ]
        det = determinant(IA)
        if det == 0:
            continue
        sign = 1 if det > 0 else -1
        if sign == r:
            return AffineFixer(
                tuple(tuple(row) for row in A), tuple(sig), X, Y, sign, chart
            )
    raise IndexError_(f"no vertex matching achieves index {r:+d}")


def product_index(fixers: Sequence[AffineFixer]) -> int:
    if not fixers:
        raise IndexError_("product_index requires at least one fixer")
    out = 1
    for f in fixers:
        out *= f.index
    return out


# --------------------------------------------------------------------------
# Component index by perturbation sums
# --------------------------------------------------------------------------


def _profile_distance_to_subset(
    game: FiniteGame, profile: Profile, subset: NashSubset
) -> Fraction:
    """Minimal over the subset of the max per-player ell-infinity distance."""
    from .solver import _factor_constraints

    dist = ZERO
    for n in range(2):
        labels = list(game.strategies[n])
        sup = list(subset.supports[n])
        A_ub, b_ub, A_eq, b_eq = _factor_constraints(
            game, n, sup, subset.supports[1 - n]
        )
        x = profile[n].as_vector(labels)
        # variables: z over sup, t; minimize t with |x_s - z_s| <= t
        m = len(sup)
        Aub = [row + [ZERO] for row in A_ub]
        bub = list(b_ub)
        Aeq = [row + [ZERO] for row in A_eq]
        beq = list(b_eq)
        for idx, s in enumerate(sup):
            row = [ZERO] * (m + 1)
            row[idx] = ONE
            row[m] = -ONE
            Aub.append(row)
            bub.append(x[labels.index(s)])
            row2 = [ZERO] * (m + 1)
            row2[idx] = -ONE
            row2[m] = -ONE
            Aub.append(row2)
            bub.append(-x[labels.index(s)])
        off = max(
            (x[labels.index(s)] for s in labels if s not in sup), default=ZERO
        )
        c = [ZERO] * m + [ONE]
        res = linprog(c, Aub, bub, Aeq, beq)
        if res.status != "optimal":
            return Fraction(10**9)  # factor polytope empty: effectively infinite
        dist = max(dist, max(res.value, off))
    return dist


def component_distance(
    game: FiniteGame, profile: Profile, component: Sequence[NashSubset]
) -> Fraction:
    return min(_profile_distance_to_subset(game, profile, s) for s in component)


def _perturbation_bonuses(game: FiniteGame, trial: int, magnitude: Fraction):
    """Deterministic per-own-strategy rational bonuses for one trial."""
    bonuses = {}
    state = 2 * trial + 1
    for n in range(game.num_players):
        for s in game.strategies[n]:
            state = (state * 1103515245 + 12345) % 2147483648
            bonuses[(n, s)] = magnitude * Fraction((state % 97) + 1, 97)
    return bonuses


def perturb_payoffs(game: FiniteGame, trial: int, magnitude: Fraction) -> FiniteGame:
    bonuses = _perturbation_bonuses(game, trial, magnitude)
    pay = {
        prof: tuple(
            game.payoffs[prof][n] + bonuses[(n, prof[n])]
            for n in range(game.num_players)
        )
        for prof in game.pure_profiles()
    }
    return FiniteGame.of(game.players, game.strategies, pay)


def component_index(
    game: FiniteGame,
    component: Sequence[NashSubset],
    trials: int = 3,
    magnitude: Fraction = Fraction(1, 1000),
) -> int:
    """Sum of perturbed-equilibrium indices near the component.

    Runs `trials` deterministic payoff perturbations of the given magnitude;
    each must yield only regular equilibria near the component, none in the
    boundary shell, and all trials must agree.
    """
    if game.num_players != 2:
        raise IndexError_("component_index handles exactly 2 players")
    magnitude = Fraction(magnitude)
    # isolating radius: half the distance to the rest of the equilibrium set
    es = support_enumeration(game)
    others = [
        s
        for s in es.all_subsets()
        if not any(
            s.supports == c.supports and s.factors == c.factors for c in component
        )
    ]
    delta = Fraction(1, 8)
    for s in others:
        for p in s.vertex_profiles():
            delta = min(delta, component_distance(game, p, component) / 4)
    if delta <= 0:
        raise IndexError_("component is not isolated from the rest of the equilibria")
    results = []
    for trial in range(trials):
        perturbed = perturb_payoffs(game, trial, magnitude)
        pes = support_enumeration(perturbed)
        if pes.subsets:
            raise IndexError_(
                f"perturbation trial {trial} left a degenerate equilibrium set; "
                "choose another magnitude"
            )
        total = 0
        for eq in pes.isolated:
            dist = component_distance(game, eq, component)
            if dist <= delta:
                total += index_regular(perturbed, eq)
            elif dist <= 2 * delta:
                raise IndexError_(
                    f"trial {trial}: equilibrium {eq} in the boundary shell "
                    f"({dist} vs isolating radius {delta}); reduce magnitude"
                )
        results.append(total)
    if len(set(results)) != 1:
        raise IndexError_(f"perturbation trials disagree: {results}")
    return results[0]


def check_sum_plus_one(game: FiniteGame) -> bool:
    """Whether the component indices of a 2-player game sum to +1."""
    if game.num_players != 2:
        raise IndexError_("check_sum_plus_one requires exhaustive enumeration (2 players)")
    es = support_enumeration(game)
    cg = components(es)
    total = 0
    for comp in cg.components:
        subs = [cg.subsets[i] for i in comp]
        if len(subs) == 1 and subs[0].is_singleton():
            eq = subs[0].sample()
            if is_regular(game, eq):
                total += index_regular(game, eq)
                continue
        total += component_index(game, subs)
    return total == 1


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


@dataclass
class IndexEntry:
    target: str
    index: int
    method: str
    witness: dict = field(default_factory=dict)


@dataclass
class IndexReport:
    entries: list[IndexEntry] = field(default_factory=list)

    def total(self) -> int:
        return sum(e.index for e in self.entries)

    def to_json(self) -> dict:
        return {
            "entries": [
                {
                    "target": e.target,
                    "index": e.index,
                    "method": e.method,
                    "witness": e.witness,
                }
                for e in self.entries
            ],
            "total": self.total(),
        }


def game_index_report(game: FiniteGame) -> IndexReport:
    """Per-component index report for a 2-player game."""
    es = support_enumeration(game)
    cg = components(es)
    report = IndexReport()
    for comp in cg.components:
        subs = [cg.subsets[i] for i in comp]
        if len(subs) == 1 and subs[0].is_singleton():
            eq = subs[0].sample()
            if is_regular(game, eq):
                report.entries.append(
                    IndexEntry(
                        " ; ".join(str(s) for s in eq),
                        index_regular(game, eq),
                        "determinant",
                        {"supports": [list(s.support()) for s in eq]},
                    )
                )
                continue
        idx = component_index(game, subs)
        desc = " | ".join(
            " x ".join(",".join(str(v) for v in f) for f in s.factors) for s in subs
        )
        report.entries.append(
            IndexEntry(desc, idx, "perturbation-sum", {"subsets": len(subs)})
        )
    return report
