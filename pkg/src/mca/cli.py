"""Command-line entry point: simulate, analyze, render, serve.

$ mca simulate --model activation --seed 1 --out steady.csv
$ mca analyze --input steady.csv --sort Z --pair X,Y --resolution 21 --out grid.csv
$ mca render --grid grid.csv --out grid.svg
$ mca serve --port 8000 --data steady.csv

Exit codes: 0 success, 1 runtime/environment failure, 2 usage error.
Identical flags and seed produce byte-identical CSV/SVG outputs; timestamps
only appear in the simulate sidecar JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from itertools import combinations
from pathlib import Path

from . import engine, render, sde
from .data import drop_incomplete, load_csv, normalize_housekeeping

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mca",
        description="Multiresolution correlation analysis workbench",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="progress chatter on stderr")
    common.add_argument("--seed", type=int, default=0, help="RNG seed where applicable")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", parents=[common], help="generate steady-state samples")
    p_sim.add_argument("--model", required=True, choices=("activation", "inhibition"))
    p_sim.add_argument("--sigma", type=float, default=sde.DEFAULT_SIGMA, help="noise amplitude")
    p_sim.add_argument("--samples", type=int, default=500)
    p_sim.add_argument("--burn-in", type=int, default=300)
    p_sim.add_argument("--thin", type=int, default=20)
    p_sim.add_argument("--dt", type=float, default=0.1)
    p_sim.add_argument(
        "--param", action="append", default=[], metavar="NAME=VALUE",
        help="override one model parameter (repeatable)",
    )
    p_sim.add_argument(
        "--repression-form", choices=("k_scaled", "as_printed"), default="k_scaled"
    )
    p_sim.add_argument("--out", default="simulation.csv", help="output CSV ('-' for stdout)")

    p_an = sub.add_parser("analyze", parents=[common], help="compute a correlation grid")
    p_an.add_argument("--input", default="-", help="input CSV path ('-' for stdin)")
    p_an.add_argument("--sort", required=True, help="sorting variable")
    p_an.add_argument("--pair", help="comma-separated pair, e.g. X,Y")
    p_an.add_argument("--all-pairs", action="store_true", help="every pair of analysis variables")
    p_an.add_argument("--resolution", type=int, required=True)
    p_an.add_argument("--method", choices=("pearson", "spearman"), default="pearson")
    p_an.add_argument("--p", type=float, default=0.05, help="significance threshold")
    p_an.add_argument("--min-members", type=int, default=3)
    p_an.add_argument("--drop-incomplete", action="store_true")
    p_an.add_argument("--normalize-housekeeping", metavar="NAME")
    p_an.add_argument("--offset", type=float, default=0.0, help="additive offset before division")
    p_an.add_argument(
        "--no-offset-housekeeping", action="store_true",
        help="divide by the raw housekeeping value instead of the offset one",
    )
    p_an.add_argument("--format", choices=("csv", "json"), default="csv")
    p_an.add_argument("--out", default="-", help="output path ('-' for stdout); prefix with --all-pairs")

    p_re = sub.add_parser("render", parents=[common], help="render a grid CSV as SVG")
    p_re.add_argument("--grid", required=True, help="grid CSV path ('-' for stdin)")
    p_re.add_argument("--width", type=int, default=640)
    p_re.add_argument("--height", type=int, default=480)
    p_re.add_argument("--abscissa", choices=("quantile", "median"), default="quantile")
    p_re.add_argument("--positive-color", default="#2166ac")
    p_re.add_argument("--negative-color", default="#b2182b")
    p_re.add_argument("--insignificant-color", default="#ffffff")
    p_re.add_argument("--marker-size", type=float, default=4.0)
    p_re.add_argument("--x-label")
    p_re.add_argument("--y-label")
    p_re.add_argument("--out", default="-", help="output SVG path ('-' for stdout)")

    p_sv = sub.add_parser("serve", parents=[common], help="run the local analysis service")
    p_sv.add_argument("--host", default="127.0.0.1")
    p_sv.add_argument("--port", type=int, default=8000, help="0 picks an ephemeral port")
    p_sv.add_argument("--data", metavar="CSV", help="preload a dataset at startup")
    p_sv.add_argument("--frontend", metavar="DIR", help="serve a static UI from this directory")
    return parser


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _parse_overrides(pairs: list[str]) -> dict[str, float]:
    allowed = set(sde.parameter_names())
    out: dict[str, float] = {}
    for item in pairs:
        name, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--param expects NAME=VALUE, got {item!r}")
        if name not in allowed:
            raise ValueError(f"unknown model parameter {name!r} (valid: {sorted(allowed)})")
        try:
            out[name] = float(value)
        except ValueError:
            raise ValueError(f"parameter {name} needs a numeric value, got {value!r}") from None
    return out


def cmd_simulate(args) -> int:
    overrides = _parse_overrides(args.param)
    overrides.setdefault("sigma", args.sigma)
    overrides.setdefault("dt", args.dt)
    make = sde.activation_model if args.model == "activation" else sde.inhibition_model
    spec = make(repression_form=args.repression_form, **overrides)
    plan = sde.SamplingPlan(
        burn_in=args.burn_in, thin=args.thin, samples=args.samples, seed=args.seed
    )
    if args.verbose:
        print(f"simulating {args.model}: {plan}", file=sys.stderr)
    matrix = sde.simulate(spec, plan)
    _write_text(args.out, matrix.to_csv())
    if args.out != "-":
        sidecar = {
            "model": args.model,
            "parameters": {name: getattr(spec, name) for name in sde.parameter_names()},
            "repression_form": spec.repression_form,
            "plan": {"burn_in": plan.burn_in, "thin": plan.thin, "samples": plan.samples},
            "seed": plan.seed,
            "rng": sde.RNG_ALGORITHM,
            "columns": list(matrix.variable_names),
            "output": args.out,
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        side_path = Path(args.out).with_suffix(".json")
        side_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        if args.verbose:
            print(f"wrote {args.out} and {side_path}", file=sys.stderr)
    return 0


def _load_analyze_input(args):
    matrix = load_csv(_read_input(args.input))
    if args.drop_incomplete:
        matrix, dropped = drop_incomplete(matrix)
        if args.verbose and dropped:
            print(f"dropped {len(dropped)} incomplete rows: {dropped}", file=sys.stderr)
    if args.normalize_housekeeping:
        matrix = normalize_housekeeping(
            matrix,
            args.normalize_housekeeping,
            offset=args.offset,
            offset_housekeeping=not args.no_offset_housekeeping,
        )
    return matrix


def _emit_grid(grid, fmt: str, out: str) -> None:
    if fmt == "json":
        _write_text(out, json.dumps(engine.grid_to_dict(grid)) + "\n")
    else:
        _write_text(out, engine.grid_to_csv(grid))


def cmd_analyze(args) -> int:
    if bool(args.pair) == args.all_pairs:
        raise ValueError("exactly one of --pair or --all-pairs is required")
    matrix = _load_analyze_input(args)
    if args.pair:
        parts = [p.strip() for p in args.pair.split(",")]
        if len(parts) != 2 or not all(parts):
            raise ValueError(f"--pair expects two comma-separated names, got {args.pair!r}")
        grid = engine.build_grid(
            matrix, args.sort, parts[0], parts[1], args.resolution,
            method=args.method, p_threshold=args.p, min_members=args.min_members,
        )
        _emit_grid(grid, args.format, args.out)
        return 0
    if args.out == "-":
        raise ValueError("--all-pairs writes one file per pair; --out must be a prefix")
    names = [v for v in matrix.analysis_variables if v != args.sort]
    ext = "json" if args.format == "json" else "csv"
    for a, b in combinations(names, 2):
        grid = engine.build_grid(
            matrix, args.sort, a, b, args.resolution,
            method=args.method, p_threshold=args.p, min_members=args.min_members,
        )
        path = f"{args.out}{a}__{b}.{ext}"
        _emit_grid(grid, args.format, path)
        if args.verbose:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_render(args) -> int:
    text = _read_input(args.grid).decode("utf-8")
    grid = engine.grid_from_csv(text)
    opts = render.RenderOptions(
        width=args.width,
        height=args.height,
        colormap=render.DivergingColormap(
            negative=render.parse_color(args.negative_color),
            positive=render.parse_color(args.positive_color),
        ),
        insignificant_color=args.insignificant_color,
        abscissa_mode="quantile" if args.abscissa == "quantile" else "median_value",
        marker_size=args.marker_size,
        x_label=args.x_label,
        y_label=args.y_label,
    )
    _write_text(args.out, render.render_mca(grid, opts))
    return 0


def cmd_serve(args) -> int:
    from .service import create_server  # deferred: keeps import cost off the fast paths

    server = create_server(
        host=args.host, port=args.port, quiet=not args.verbose,
        frontend_dir=args.frontend,
    )
    if args.data:
        matrix = load_csv(_read_input(args.data))
        dataset_id = server.store.add_dataset(matrix)
        print(f"loaded {args.data} as dataset {dataset_id}", flush=True)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "render": cmd_render,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"mca {args.command}: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError) as exc:
        print(f"mca {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
