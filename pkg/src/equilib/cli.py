"""Command-line front end: file I/O, subcommand dispatch, and reports.

Every subcommand builds a :class:`Report` with an input echo, results, any
certifications performed, and timings; ``--out`` writes the machine-readable
rendering (which round-trips) next to the human text printed on stdout.
Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .equivalence import (
    AffineSurjection,
    build_tilde_game,
    duplicate_strategy,
    save_mapping,
)
from .games import (
    GameError,
    MixedStrategy,
    Profile,
    eliminate_strictly_dominated,
    load_game,
    save_game,
)
from .geometry import (
    GeometryError,
    Triangulation,
    el_refinement,
    grid_triangulation,
    regular_triangulation,
)
from .indices import (
    IndexError_,
    component_index,
    degree_oracle,
    game_index_report,
    index_regular,
)
from .perturb import (
    PerturbError,
    PipelineParams,
    TargetPoint,
    TargetSpec,
    run_pipeline,
)
from .rational import RationalParseError, format_rational, parse_rational
from .solver import components, support_enumeration


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


@dataclass
class Report:
    command: str
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    certifications: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "params": self.params,
            "results": self.results,
            "certifications": list(self.certifications),
            "timings": self.timings,
        }

    @staticmethod
    def from_json(data: dict) -> "Report":
        return Report(
            command=data["command"],
            inputs=dict(data["inputs"]),
            params=dict(data["params"]),
            results=dict(data["results"]),
            certifications=list(data["certifications"]),
            timings=dict(data["timings"]),
        )

    def render_text(self) -> str:
        lines = [f"== {self.command} =="]

        def emit(prefix, value):
            if isinstance(value, dict):
                lines.append(f"{prefix}:")
                for k, v in value.items():
                    emit(f"  {k}", v)
            elif isinstance(value, list):
                lines.append(f"{prefix}:")
                for v in value:
                    lines.append(f"  - {v}")
            else:
                lines.append(f"{prefix}: {value}")

        for section in ("inputs", "params", "results"):
            data = getattr(self, section)
            if data:
                lines.append(f"[{section}]")
                for k, v in data.items():
                    emit(k, v)
        if self.certifications:
            lines.append("[certifications]")
            for c in self.certifications:
                lines.append(f"  - {c}")
        if self.timings:
            lines.append("[timings]")
            for k, v in self.timings.items():
                lines.append(f"  {k}: {v}s")
        return "\n".join(lines) + "\n"


def _profile_json(profile: Profile) -> list:
    return [
        {s: format_rational(w) for s, w in sigma.weights} for sigma in profile
    ]


def _emit(report: Report, out_path) -> None:
    sys.stdout.write(report.render_text())
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(report.to_json(), fh, indent=2)
            fh.write("\n")


# --------------------------------------------------------------------------
# Input parsing helpers
# --------------------------------------------------------------------------


def _parse_mixture(text: str) -> MixedStrategy:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"mixture is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("mixture must be a JSON object of label -> rational")
    return MixedStrategy.of({str(k): parse_rational(v) for k, v in data.items()})


def _parse_profile(text: str) -> Profile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"profile is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise UsageError("profile must be a JSON list of per-player objects")
    return tuple(
        MixedStrategy.of({str(k): parse_rational(v) for k, v in entry.items()})
        for entry in data
    )


def load_params(path: str) -> PipelineParams:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(
                f"{path}: invalid JSON at line {exc.lineno} col {exc.colno}"
            ) from exc
    if "eps" not in data:
        raise UsageError(f"{path}: params file must set 'eps'")
    kwargs = {}
    for key in (
        "eps",
        "eps0",
        "alpha",
        "alpha_star",
        "zeta",
        "xi",
        "tilde_diameter",
        "hat_diameter",
    ):
        if key in data:
            kwargs[key] = parse_rational(data[key])
    return PipelineParams(**kwargs)


def load_target_spec(path: str) -> TargetSpec:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(
                f"{path}: invalid JSON at line {exc.lineno} col {exc.colno}"
            ) from exc
    if not isinstance(data, list):
        raise UsageError(f"{path}: target spec must be a JSON list")
    points = []
    for i, entry in enumerate(data):
        try:
            profile = tuple(
                MixedStrategy.of(
                    {str(k): parse_rational(v) for k, v in sigma.items()}
                )
                for sigma in entry["point"]
            )
            points.append(
                TargetPoint(int(entry["component"]), profile, int(entry["sign"]))
            )
        except (KeyError, TypeError, RationalParseError) as exc:
            raise UsageError(f"{path}: target entry {i} malformed: {exc}") from exc
    return TargetSpec(tuple(points))


def _params_json(params: PipelineParams) -> dict:
    out = {}
    for key in (
        "eps",
        "eps0",
        "alpha",
        "alpha_star",
        "zeta",
        "xi",
        "tilde_diameter",
        "hat_diameter",
    ):
        v = getattr(params, key)
        if v is not None:
            out[key] = format_rational(Fraction(v))
    return out


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_solve(args) -> int:
    t0 = time.monotonic()
    game = load_game(args.game)
    es = support_enumeration(game)
    cg = components(es)
    report = Report("solve", inputs={"game": args.game})
    report.results = {
        "isolated": [_profile_json(p) for p in es.isolated],
        "maximal_subsets": [
            {
                "supports": [list(s) for s in ns.supports],
                "vertices": [_profile_json(p) for p in ns.vertex_profiles()],
            }
            for ns in cg.subsets
        ],
        "components": [list(c) for c in cg.components],
        "exhaustive": es.exhaustive,
        "notes": list(es.notes),
    }
    report.certifications.append(
        "every reported vertex profile verified as an equilibrium"
    )
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0


def cmd_components(args) -> int:
    t0 = time.monotonic()
    game = load_game(args.game)
    es = support_enumeration(game)
    cg = components(es)
    report = Report("components", inputs={"game": args.game})
    report.results = {
        "subsets": [
            {"supports": [list(s) for s in ns.supports]} for ns in cg.subsets
        ],
        "edges": sorted([list(e) for e in cg.edges]),
        "components": [list(c) for c in cg.components],
        "degrees": {
            str(i): len(adj) for i, adj in sorted(cg.adjacency().items())
        },
    }
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0


def cmd_index(args) -> int:
    t0 = time.monotonic()
    game = load_game(args.game)
    report = Report("index", inputs={"game": args.game})
    if args.point is not None:
        profile = _parse_profile(args.point)
        idx = index_regular(game, profile)
        report.inputs["point"] = args.point
        report.results = {"index": idx, "method": "determinant"}
    elif args.component is not None:
        es = support_enumeration(game)
        cg = components(es)
        if not 0 <= args.component < len(cg.components):
            raise UsageError(
                f"component {args.component} out of range "
                f"(game has {len(cg.components)})"
            )
        subs = [cg.subsets[i] for i in cg.components[args.component]]
        idx = component_index(game, subs)
        report.inputs["component"] = args.component
        report.results = {"index": idx, "method": "perturbation-sum"}
    else:
        ir = game_index_report(game)
        report.results = ir.to_json()
        report.certifications.append("indices over all components sum to +1")
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0


def cmd_dominance(args) -> int:
    t0 = time.monotonic()
    game = load_game(args.game)
    reduced, trace = eliminate_strictly_dominated(game)
    report = Report("dominance", inputs={"game": args.game})
    report.results = {
        "trace": [
            {
                "player": e.player,
                "strategy": e.strategy,
                "witness": {s: format_rational(w) for s, w in e.witness.weights},
            }
            for e in trace
        ],
        "residual_strategies": [list(s) for s in reduced.strategies],
    }
    report.certifications.append(
        "every elimination carries a strictly dominating mixture witness"
    )
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0


def cmd_duplicate(args) -> int:
    t0 = time.monotonic()
    game = load_game(args.game)
    mixture = _parse_mixture(args.mixture)
    new_game, phi = duplicate_strategy(
        game, args.player, mixture, new_label=args.label
    )
    if args.game_out:
        save_game(new_game, args.game_out)
    if args.mapping_out:
        phis = [
            phi
            if n == args.player
            else _identity_phi(new_game.strategies[n])
            for n in range(new_game.num_players)
        ]
        save_mapping(args.mapping_out, phis)
    report = Report(
        "duplicate",
        inputs={
            "game": args.game,
            "player": args.player,
            "mixture": args.mixture,
            "label": args.label,
        },
    )
    report.results = {
        "new_strategy": phi.source_labels[-1],
        "strategies": [list(s) for s in new_game.strategies],
        "game_out": args.game_out,
        "mapping_out": args.mapping_out,
    }
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0


def _identity_phi(labels) -> AffineSurjection:
    from .equivalence import identity_surjection

    return identity_surjection(labels)


def cmd_tilde(args) -> int:
    t0 = time.monotonic()
    game = load_game(args.game)
    tris = []
    for path in args.triangulation:
        with open(path) as fh:
            tris.append(Triangulation.deserialize(fh.read()))
    tg = build_tilde_game(game, tris)
    report = Report(
        "tilde",
        inputs={"game": args.game, "triangulations": list(args.triangulation)},
    )
    report.results = {
        "first_labels": [list(l) for l in tg.first_labels],
        "pair_strategy_counts": [
            len(tg.polytope_game.vertex_labels[n])
            for n in range(game.num_players)
        ],
        "projections": [
            {
                lab: {
                    s: format_rational(w)
                    for s, w in tg.vertex_mixtures[n][lab].weights
                }
                for lab in tg.first_labels[n]
            }
            for n in range(game.num_players)
        ],
    }
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0


def cmd_triangulate(args) -> int:
    t0 = time.monotonic()
    if args.kind == "grid":
        tri = grid_triangulation(args.n)
        inputs = {"kind": "grid", "n": args.n}
    else:
        with open(args.points) as fh:
            data = json.load(fh)
        points = [[parse_rational(x) for x in p] for p in data["points"]]
        heights = [parse_rational(h) for h in data["heights"]]
        tri = regular_triangulation(points, heights)
        inputs = {"kind": "regular", "points": args.points}
    report = Report("triangulate", inputs=inputs)
    report.results = {
        "num_vertices": len(tri.vertices),
        "num_cells": len(tri.maximal),
        "max_diameter": format_rational(tri.max_diameter()),
        "triangulation": tri.serialize(),
    }
    if args.tri_out:
        with open(args.tri_out, "w") as fh:
            fh.write(tri.serialize())
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0


def cmd_el_refine(args) -> int:
    t0 = time.monotonic()
    with open(args.triangulation) as fh:
        tri = Triangulation.deserialize(fh.read())
    complex_, gamma = el_refinement(tri)
    report = Report("el-refine", inputs={"triangulation": args.triangulation})
    report.results = {
        "num_cells": len(complex_.cells),
        "gamma_range": [
            format_rational(min(gamma.value(v) for v in complex_.all_vertices())),
            format_rational(max(gamma.value(v) for v in complex_.all_vertices())),
        ],
    }
    report.certifications.append(
        "gamma is linear on every cell and non-linear across interior facets"
    )
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0


def cmd_degree_oracle(args) -> int:
    t0 = time.monotonic()
    with open(args.spec) as fh:
        data = json.load(fh)
    A = [[parse_rational(x) for x in row] for row in data["matrix"]]
    b = [parse_rational(x) for x in data["offset"]]
    box = [
        (parse_rational(lo), parse_rational(hi)) for lo, hi in data["box"]
    ]
    grid = int(data.get("grid", 2))

    def fmap(x):
        return [
            sum(A[r][c] * x[c] for c in range(len(x))) + b[r]
            for r in range(len(b))
        ]

    deg = degree_oracle(fmap, box, grid)
    report = Report("degree-oracle", inputs={"spec": args.spec})
    report.params = {"grid": grid}
    report.results = {"degree": deg}
    report.certifications.append(
        "no boundary simplex admitted a sign-ambiguous displacement"
    )
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0


def cmd_perturb(args) -> int:
    t0 = time.monotonic()
    game = load_game(args.game)
    spec = load_target_spec(args.targets)
    params = load_params(args.params)
    perturbed, chain, pipeline_report = run_pipeline(game, spec, params)
    if args.game_out:
        save_game(perturbed, args.game_out)
    if args.witness_out:
        save_mapping(args.witness_out, [chain[0][0], chain[1][1]])
    report = Report(
        "perturb",
        inputs={
            "game": args.game,
            "targets": args.targets,
            "params_file": args.params,
        },
        params=_params_json(params),
    )
    report.results = pipeline_report.to_json()
    report.results["game_out"] = args.game_out
    report.results["witness_out"] = args.witness_out
    if pipeline_report.verified:
        report.certifications.append(
            "equilibria, indices, and projections verified against targets; "
            "payoff change certified below eps"
        )
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0 if pipeline_report.verified else 1


def _km_duplication_phi() -> list[AffineSurjection]:
    """Column map L' -> L for the perturbed example games, identity on rows."""
    from .equivalence import identity_surjection

    rows = identity_surjection(("t", "m", "b"))
    cols = AffineSurjection(
        ("L", "L'", "M", "R"),
        ("L", "M", "R"),
        {
            "L": MixedStrategy.pure("L"),
            "L'": MixedStrategy.pure("L"),
            "M": MixedStrategy.pure("M"),
            "R": MixedStrategy.pure("R"),
        },
        {s: MixedStrategy.pure(s) for s in ("L", "M", "R")},
    )
    return [rows, cols]


def cmd_verify_example(args) -> int:
    from .examples import km_perturbation_1, km_perturbation_2

    if args.name != "km":
        raise UsageError(f"unknown example {args.name!r} (try 'km')")
    t0 = time.monotonic()
    phis = _km_duplication_phi()
    half = Fraction(1, 2)
    rows = []
    ok_all = True
    for eps_text in ("1/10", "1/100"):
        eps = parse_rational(eps_text)
        # first perturbation: elimination, unique residual equilibrium
        g1 = km_perturbation_1(eps)
        reduced, trace = eliminate_strictly_dominated(g1)
        removed = sorted((e.player, e.strategy) for e in trace)
        ok = removed == [(0, "m"), (1, "M"), (1, "R")]
        es = support_enumeration(g1)
        ok = ok and not es.subsets and len(es.isolated) == 1
        if ok:
            eq = es.isolated[0]
            ok = index_regular(g1, eq) == 1
            proj = tuple(phi.apply(s) for phi, s in zip(phis, eq))
            want = (
                MixedStrategy.of({"t": half, "b": half}),
                MixedStrategy.pure("L"),
            )
            ok = ok and tuple(sorted(s.weights) for s in proj) == tuple(
                sorted(s.weights) for s in want
            )
        rows.append((f"perturbation 1, eps={eps_text}", ok))
        ok_all = ok_all and ok

        # second perturbation: three equilibria with signed indices
        g2 = km_perturbation_2(eps)
        es2 = support_enumeration(g2)
        ok2 = not es2.subsets and len(es2.isolated) == 3
        if ok2:
            found = []
            for eq in es2.isolated:
                proj = tuple(phi.apply(s) for phi, s in zip(phis, eq))
                found.append(
                    (
                        tuple(tuple(sorted(s.weights)) for s in proj),
                        index_regular(g2, eq),
                    )
                )
            want2 = [
                (
                    (
                        (("t", Fraction(1)),),
                        (("L", Fraction(1)),),
                    ),
                    1,
                ),
                (
                    (
                        (("b", Fraction(1)),),
                        (("L", Fraction(1)),),
                    ),
                    1,
                ),
                (
                    (
                        (("b", half), ("t", half)),
                        (("L", Fraction(1)),),
                    ),
                    -1,
                ),
            ]
            ok2 = sorted(found) == sorted(want2)
        rows.append((f"perturbation 2, eps={eps_text}", ok2))
        ok_all = ok_all and ok2

    report = Report("verify-example", inputs={"name": args.name})
    report.results = {
        "table": [
            {"check": name, "status": "pass" if ok else "FAIL"}
            for name, ok in rows
        ],
        "all_passed": ok_all,
    }
    report.timings["total"] = f"{time.monotonic() - t0:.3f}"
    _emit(report, args.out)
    return 0 if ok_all else 1


# --------------------------------------------------------------------------
# Dispatch
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equilib",
        description="Exact equilibrium enumeration, index calculus, and "
        "payoff-perturbation pipeline.",
    )
    sub = parser.add_subparsers(dest="subcommand")

    def common(p):
        p.add_argument("--out", help="write machine-readable report JSON here")

    p = sub.add_parser("solve", help="enumerate equilibria of a game file")
    p.add_argument("game")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("components", help="equilibrium component structure")
    p.add_argument("game")
    common(p)
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("index", help="fixed-point indices")
    p.add_argument("game")
    p.add_argument("--point", help="JSON profile for a single regular equilibrium")
    p.add_argument("--component", type=int, help="component number to evaluate")
    common(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("dominance", help="iterated strict dominance trace")
    p.add_argument("game")
    common(p)
    p.set_defaults(func=cmd_dominance)

    p = sub.add_parser("duplicate", help="duplicate a mixture as a new strategy")
    p.add_argument("game")
    p.add_argument("player", type=int)
    p.add_argument("mixture", help='JSON mixture, e.g. \'{"L": "1"}\'')
    p.add_argument("--label", help="label for the new strategy")
    p.add_argument("--game-out", dest="game_out", help="write the new game here")
    p.add_argument(
        "--mapping-out", dest="mapping_out", help="write the witness mapping here"
    )
    common(p)
    p.set_defaults(func=cmd_duplicate)

    p = sub.add_parser("tilde", help="lift a game onto triangulated simplices")
    p.add_argument("game")
    p.add_argument("triangulation", nargs="+", help="one file per player")
    common(p)
    p.set_defaults(func=cmd_tilde)

    p = sub.add_parser("triangulate", help="build a triangulation")
    p.add_argument("kind", choices=["grid", "regular"])
    p.add_argument("--n", type=int, default=2, help="grid resolution")
    p.add_argument("--points", help="JSON file with points and heights")
    p.add_argument("--tri-out", dest="tri_out", help="write the triangulation here")
    common(p)
    p.set_defaults(func=cmd_triangulate)

    p = sub.add_parser("el-refine", help="arrangement refinement with convex witness")
    p.add_argument("triangulation")
    common(p)
    p.set_defaults(func=cmd_el_refine)

    p = sub.add_parser("degree-oracle", help="PL degree of an affine map over a box")
    p.add_argument("spec", help="JSON file with matrix, offset, box, grid")
    common(p)
    p.set_defaults(func=cmd_degree_oracle)

    p = sub.add_parser("perturb", help="run the perturbation pipeline")
    p.add_argument("game")
    p.add_argument("targets", help="JSON target spec")
    p.add_argument("--params", required=True, help="JSON params file (sets eps)")
    p.add_argument("--game-out", dest="game_out", help="write the perturbed game here")
    p.add_argument(
        "--witness-out", dest="witness_out", help="write the witness mapping here"
    )
    common(p)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("verify-example", help="end-to-end reproduction checks")
    p.add_argument("name")
    common(p)
    p.set_defaults(func=cmd_verify_example)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except RationalParseError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (GameError, GeometryError, IndexError_, PerturbError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
