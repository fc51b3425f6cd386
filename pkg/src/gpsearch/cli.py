"""Command-line front end: ``gpsearch {search,experiment,landscape,export}``.

Exit codes: 0 success, 1 usage or validation error, 2 I/O error,
3 numerical failure (GP factorization exhausted the jitter ladder).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .gp import FactorizationError
from .harness import (
    STAT_FILES,
    ExperimentError,
    ExperimentPlan,
    analyze,
    fmt,
    heatmap_rows,
    marginal_heatmap,
    parallel_coordinates_rows,
    plan_configs_from_dicts,
    plan_configs_to_dicts,
    run_experiment,
    topk_rows,
    write_manifest,
    write_stats,
)
from .kernels import Kernel, parse_kernel
from .objective import (
    LandscapeError,
    prior_landscape,
    read_landscape,
    synth_landscape,
    write_landscape,
    write_rows,
)
from .search import ConfigError, SearchConfig, SearchError, Strategy, run_search, write_trace
from .space import Encoding, SpaceError, load_space, parse_space

EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 1, 2, 3
DEFAULT_CONFIGS = "gp:linear,gp:cubic,gp:abs-exp,gp:sq-exp,random"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _kernel(text: str) -> Kernel:
    try:
        return parse_kernel(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gpsearch", description="Bayesian optimization over grid-defined hyperparameter spaces.")
    p.add_argument("--version", action="version", version=f"gpsearch {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, landscape=True):
        sp.add_argument("--space", required=True, help="space file (one '<name>: v1, v2, ...' per line)")
        if landscape:
            sp.add_argument("--landscape", required=True, help="tabulated landscape file")

    def gp_flags(sp):
        sp.add_argument("--kernel", type=_kernel, default=Kernel.ABS_EXP, help="linear, cubic, abs-exp, sq-exp")
        sp.add_argument("--init-random", type=int, default=10, help="random evaluations before the GP takes over")
        sp.add_argument("--budget", type=int, default=100, help="total evaluations per run")
        sp.add_argument("--encoding", choices=[e.value for e in Encoding], default=Encoding.UNIT.value)
        sp.add_argument("--jitter", type=float, default=1e-8, help="initial diagonal jitter")

    s = sub.add_parser("search", help="run one search and write its trace")
    common(s)
    s.add_argument("--strategy", required=True, choices=[x.value for x in Strategy])
    gp_flags(s)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="trace output (JSON lines)")

    e = sub.add_parser("experiment", help="repeated runs with convergence, hit-rate and evals-to-target statistics")
    e.add_argument("--space", help="space file (not needed with --plan)")
    e.add_argument("--landscape", help="tabulated landscape file (not needed with --plan)")
    e.add_argument("--plan", "--manifest", dest="plan", help="plan or manifest JSON from an earlier run")
    e.add_argument("--configs", default=DEFAULT_CONFIGS, help="comma list of gp:<kernel>[:r<N>], random, grid")
    gp_flags(e)
    e.add_argument("--runs", type=int, default=100)
    e.add_argument("--base-seed", type=int, default=0)
    e.add_argument("--ks", type=_int_list, default=[1, 3, 5])
    e.add_argument("--checkpoints", type=_int_list, default=[50, 100, 200])
    e.add_argument("--target-k", type=int, default=1)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out-dir", required=True)

    g = sub.add_parser("landscape", help="generate a synthetic landscape file")
    common(g, landscape=False)
    g.add_argument("--kind", required=True, choices=["prior", "quadratic", "interaction"])
    g.add_argument("--kernel", type=_kernel, default=Kernel.SQ_EXP)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--offset", type=float, default=0.0)
    g.add_argument("--params", type=_float_list, help="quadratic target point, one unit-normalized value per axis")
    g.add_argument("--strength", type=float, default=1.0, help="interaction coupling strength")
    g.add_argument("--pair", default=None, help="interaction axes as a,b (default: first two axes)")
    g.add_argument("--out", required=True)

    x = sub.add_parser("export", help="heatmap, parallel-coordinates or top-k tables from a landscape")
    common(x)
    x.add_argument("--what", required=True, choices=["heatmap", "parcoords", "topk"])
    x.add_argument("--axes", help="heatmap axes as a,b")
    x.add_argument("--k", type=int, default=5)
    x.add_argument("--out", help="output file (default: standard output)")
    return p


# -- subcommands ----------------------------------------------------------------


def _config_from_flags(args, strategy: Strategy) -> SearchConfig:
    return SearchConfig(
        strategy=strategy,
        kernel=args.kernel,
        initial_random=args.init_random,
        budget=args.budget,
        encoding=Encoding(args.encoding),
        jitter=args.jitter,
        seed=getattr(args, "seed", 0),
    )


def cmd_search(args) -> int:
    space = load_space(args.space)
    l = read_landscape(args.landscape, space)
    cfg = _config_from_flags(args, Strategy(args.strategy))
    cfg.validate(space.size)
    try:
        trace = run_search(l, cfg)
    except SearchError as exc:
        write_trace(args.out, exc.trace, space)
        raise
    write_trace(args.out, trace, space)
    fid, score = trace.terminal_best
    values = " ".join(f"{n}={v}" for n, v in zip(space.names, space.labels_of(fid)))
    print(f"best flat_id={fid} {values} score={fmt(score)} evaluations={len(trace)}")
    return 0


def _parse_config_token(token: str, args) -> tuple[str, SearchConfig]:
    parts = token.strip().split(":")
    base = _config_from_flags(args, Strategy.GP)
    head = parts[0].lower()
    if head in ("random", "grid") and len(parts) == 1:
        return token.strip(), replace(base, strategy=Strategy(head))
    if head != "gp" or len(parts) not in (2, 3):
        raise ConfigError(f"bad config {token!r}; use gp:<kernel>[:r<N>], random or grid", "configs")
    try:
        cfg = replace(base, kernel=parse_kernel(parts[1]))
        if len(parts) == 3:
            if not parts[2].lower().startswith("r"):
                raise ValueError(parts[2])
            cfg = replace(cfg, initial_random=int(parts[2][1:]))
    except ValueError:
        raise ConfigError(f"bad config {token!r}; use gp:<kernel>[:r<N>], random or grid", "configs") from None
    return token.strip(), cfg


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest_from_flags(args) -> dict:
    if not args.space or not args.landscape:
        raise UsageError("experiment needs --space and --landscape, or --plan")
    configs = [_parse_config_token(t, args) for t in args.configs.split(",") if t.strip()]
    return {
        "gpsearch_version": __version__,
        "space": {"path": args.space, "text": Path(args.space).read_text()},
        "landscape": {"path": args.landscape, "sha256": _sha256(args.landscape)},
        "plan": {
            "configs": [{"name": n, **c.to_dict()} for n, c in configs],
            "runs_per_config": args.runs,
            "base_seed": args.base_seed,
        },
        "statistics": {"ks": args.ks, "checkpoints": args.checkpoints, "target_k": args.target_k},
    }


def cmd_experiment(args) -> int:
    if args.plan:
        manifest = json.loads(Path(args.plan).read_text())
        if args.landscape:
            manifest["landscape"] = {"path": args.landscape, "sha256": _sha256(args.landscape)}
    else:
        manifest = _manifest_from_flags(args)
    try:
        space = parse_space(manifest["space"]["text"]) if "text" in manifest["space"] else load_space(manifest["space"]["path"])
        lpath = manifest["landscape"]["path"]
        want = manifest["landscape"].get("sha256")
        if want and _sha256(lpath) != want:
            raise LandscapeError(f"landscape {lpath} does not match the manifest checksum")
        l = read_landscape(lpath, space)
        plan = ExperimentPlan(
            l,
            plan_configs_from_dicts(manifest["plan"]["configs"]),
            manifest["plan"]["runs_per_config"],
            manifest["plan"]["base_seed"],
        )
        st = manifest.get("statistics", {})
        stats_args = dict(
            ks=st.get("ks", [1, 3, 5]), checkpoints=st.get("checkpoints", [50, 100, 200]), target_k=st.get("target_k", 1)
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed plan: missing or invalid {exc}", "plan") from None
    manifest["plan"]["configs"] = plan_configs_to_dicts(plan)
    manifest["gpsearch_version"] = __version__

    out = Path(args.out_dir)
    written: list[Path] = []
    try:
        traces = run_experiment(plan, workers=max(1, args.workers))
        written = write_stats(out, analyze(plan, traces, **stats_args))
        written.append(out / "manifest.json")
        write_manifest(written[-1], manifest)
    except BaseException:
        for f in [out / name for name in (*STAT_FILES, "manifest.json")]:
            f.unlink(missing_ok=True)
        raise
    print(f"wrote {', '.join(str(p) for p in written)}")
    return 0


def cmd_landscape(args) -> int:
    space = load_space(args.space)
    if args.kind == "prior":
        l = prior_landscape(space, args.kernel, args.seed, args.scale, args.offset)
    else:
        params = args.params if args.params is not None else [0.5] * space.ndim
        pair = (0, 1)
        if args.pair:
            names = [n.strip() for n in args.pair.split(",")]
            if len(names) != 2:
                raise ConfigError("--pair needs exactly two axis names", "pair")
            pair = (space.axis_position(names[0]), space.axis_position(names[1]))
        if args.kind == "interaction":
            params = list(params) + [args.strength]
        l = synth_landscape(space, args.kind, params, pair)
    write_landscape(args.out, l)
    print(f"wrote {args.out} ({space.size} rows)")
    return 0


def cmd_export(args) -> int:
    space = load_space(args.space)
    l = read_landscape(args.landscape, space)
    if args.what == "heatmap":
        if not args.axes:
            raise ConfigError("heatmap export needs --axes a,b", "axes")
        names = [n.strip() for n in args.axes.split(",")]
        if len(names) != 2:
            raise ConfigError("--axes needs exactly two axis names", "axes")
        rows = heatmap_rows(marginal_heatmap(l, *names))
    elif args.what == "parcoords":
        rows = parallel_coordinates_rows(l)
    else:
        if args.k < 1:
            raise ConfigError("--k must be >= 1", "k")
        rows = topk_rows(l, args.k)
    if args.out:
        write_rows(args.out, rows)
    else:
        import csv

        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
    return 0


COMMANDS = {"search": cmd_search, "experiment": cmd_experiment, "landscape": cmd_landscape, "export": cmd_export}


def _one_line(msg: object) -> str:
    return " ".join(str(msg).split())


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gpsearch: error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        flag = f"--{exc.flag}: " if exc.flag else ""
        print(f"gpsearch: error: {flag}{_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE
    except (FactorizationError, SearchError) as exc:
        print(f"gpsearch: numerical error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_NUMERIC
    except ExperimentError as exc:
        code = EXIT_NUMERIC if isinstance(exc.__cause__, SearchError) else EXIT_USAGE
        print(f"gpsearch: error: {_one_line(exc)}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"gpsearch: I/O error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_IO
    except (SpaceError, LandscapeError, ValueError) as exc:
        print(f"gpsearch: error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
