"""Landscape loading shared by the experiment scripts."""

import argparse
from pathlib import Path

from gpsearch.objective import prior_landscape, read_landscape
from gpsearch.space import load_space

TABLES = Path(__file__).resolve().parents[1] / "tables"


def landscape_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", default=str(TABLES / "dstc4.space"))
    p.add_argument("--landscape", help="tabulated scores; a sq-exp prior sample is drawn when omitted")
    p.add_argument("--landscape-seed", type=int, default=0)


def load_landscape(args):
    space = load_space(args.space)
    if args.landscape:
        return read_landscape(args.landscape, space)
    return prior_landscape(space, "sq-exp", seed=args.landscape_seed)
