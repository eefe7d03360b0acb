"""Command-line surface: image filtering, saliency sweeps, pyramid runs, cost reports.

Exit codes: 0 success, 1 usage (bad flags or unreadable paths), 2 degenerate
input, 3 shape/config/content error. Every failure prints a single
machine-parseable line ``hsfpn: <category>: <message>`` on standard error.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .cost import CostModel, cost_rows, cost_table, count_params
from .errors import DegenerateBackgroundError, PgmParseError, ShapeError, ValidationError
from .frequency import ScrWindows, dct2, highpass_mask, idct2, lowcut_mask, scr, scr_filter_sweep
from .io import read_pgm, write_pgm
from .pyramid import (
    PyramidConfig,
    hsfpn_forward,
    init_weights,
    read_pyramid_dir,
    write_pyramid_dir,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_center(text):
    try:
        r, c = text.split(",")
        return int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <row>,<col>, got {text!r}")


def _parse_cut(text):
    try:
        r, c = text.lower().split("x")
        r, c = int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <rows>x<cols>, got {text!r}")
    if r < 0 or c < 0:
        raise argparse.ArgumentTypeError("cut extents must be >= 0")
    return r, c


def build_parser() -> _Parser:
    parser = _Parser(prog="hsfpn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="low-cut filter a PGM image")
    p.add_argument("image", help="input image (binary 8-bit PGM)")
    p.add_argument("-o", "--output", required=True, help="filtered PGM path")
    p.add_argument("--alpha", type=float, help="fractional cut-off in [0, 1]")
    p.add_argument("--cut", type=_parse_cut, metavar="RxC", help="absolute coefficient region")
    p.add_argument("--target-center", type=_parse_center, metavar="R,C")
    p.add_argument("--target-size", type=int, default=40)
    p.add_argument("--neighborhood-size", type=int, default=80)
    p.add_argument("--recenter", action="store_true",
                   help="add 0.5 before clamping (high-pass output is near zero-mean)")
    p.add_argument("--stats", help="stats JSON path (default: output with .stats.json)")

    p = sub.add_parser("scr-sweep", help="SCR versus expanding low-cut region")
    p.add_argument("image")
    p.add_argument("-o", "--output", required=True, help="CSV path")
    p.add_argument("--target-center", type=_parse_center, metavar="R,C", required=True)
    p.add_argument("--target-size", type=int, default=40)
    p.add_argument("--neighborhood-size", type=int, default=80)
    p.add_argument("--cut-max", type=int, required=True)
    p.add_argument("--cut-step", type=int, default=1)

    p = sub.add_parser("forward", help="run a pyramid directory through the network")
    p.add_argument("input_dir", help="directory with c2.pft..c5.pft and manifest.json")
    p.add_argument("-o", "--output-dir", required=True)
    p.add_argument("--mode", choices=["hsfpn", "fpn", "fpn_baseline"], default="hsfpn")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--groups", type=int, help="group count (default: gcd(channels, 16))")
    p.add_argument("--fusion", choices=["sdp_only", "sdp_plus_add"], default="sdp_only")
    p.add_argument("--report", help="report JSON path (default: <output-dir>/report.json)")

    p = sub.add_parser("cost", help="attention-layout complexity table")
    p.add_argument("--n", type=int, required=True, help="block count")
    p.add_argument("--h", type=int, required=True, help="block rows")
    p.add_argument("--w", type=int, required=True, help="block cols")
    p.add_argument("--c", type=int, required=True, help="channels")
    p.add_argument("--format", choices=["table", "json", "csv"], default="table")

    p = sub.add_parser("params", help="added parameter/MAC accounting per module")
    p.add_argument("--channels", type=int, default=256)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--groups", type=int, default=16)
    p.add_argument("--base-h", type=int, default=200, help="level-2 height")
    p.add_argument("--base-w", type=int, default=200, help="level-2 width")
    p.add_argument("--bias", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--no-cp", action="store_true")
    p.add_argument("--no-sp", action="store_true")
    p.add_argument("--no-sdp", action="store_true")
    p.add_argument("--format", choices=["table", "json", "csv"], default="table")
    return parser


def _windows(args) -> ScrWindows:
    return ScrWindows(
        target_center=args.target_center,
        target_extent=args.target_size,
        neighborhood_extent=args.neighborhood_size,
    )


def cmd_filter(args) -> int:
    if (args.alpha is None) == (args.cut is None):
        raise UsageError("exactly one of --alpha or --cut is required")
    image = read_pgm(args.image)
    h, w = image.shape
    if args.alpha is not None:
        mask = highpass_mask(h, w, args.alpha)
        cut_desc = {"alpha": args.alpha}
    else:
        mask = lowcut_mask(h, w, *args.cut)
        cut_desc = {"cut_rows": args.cut[0], "cut_cols": args.cut[1]}
    filtered = idct2(dct2(image) * mask)

    export = filtered + np.float32(0.5) if args.recenter else filtered
    write_pgm(args.output, export)

    stats = {"input": str(args.image), "output": str(args.output), **cut_desc,
             "recenter": bool(args.recenter), "degenerate": False}
    exit_code = 0
    if args.target_center is not None:
        windows = _windows(args)
        try:
            stats["scr_before"] = scr(image, windows)
            stats["scr_after"] = scr(filtered, windows)
        except DegenerateBackgroundError as err:
            stats["degenerate"] = True
            stats["scr_before"] = stats.get("scr_before")
            stats["scr_after"] = None
            stats["reason"] = str(err)
            exit_code = 2
    stats_path = args.stats or str(Path(args.output).with_suffix(".stats.json"))
    Path(stats_path).write_text(json.dumps(stats, indent=2) + "\n")
    if exit_code:
        print(f"hsfpn: degenerate: {stats['reason']}", file=sys.stderr)
    return exit_code


def cmd_scr_sweep(args) -> int:
    if args.cut_max < 0 or args.cut_step < 1:
        raise UsageError("--cut-max must be >= 0 and --cut-step >= 1")
    image = read_pgm(args.image)
    windows = _windows(args)
    cuts = [(c, c) for c in range(0, args.cut_max + 1, args.cut_step)]
    rows = scr_filter_sweep(image, windows, cuts)
    lines = ["cut_rows,cut_cols,scr"]
    for cut_rows, cut_cols, value in rows:
        lines.append(f"{cut_rows},{cut_cols},{value:.9g}")
    Path(args.output).write_text("\n".join(lines) + "\n")
    return 0


def cmd_forward(args) -> int:
    pyramid = read_pyramid_dir(args.input_dir, prefix="c")
    if not pyramid.uniform_channels:
        raise ShapeError("input pyramid levels disagree on channel count")
    channels = pyramid.channels()
    groups = args.groups if args.groups is not None else math.gcd(channels, 16)
    mode = "fpn_baseline" if args.mode in ("fpn", "fpn_baseline") else "hsfpn"
    config = PyramidConfig(
        channels=channels,
        alpha=args.alpha,
        k=args.k,
        groups=groups,
        fusion_mode=args.fusion,
        mode=mode,
        seed=args.seed,
    )
    weights = init_weights(config)
    timings = {}
    outputs = hsfpn_forward(pyramid, weights, timings=timings)
    write_pyramid_dir(args.output_dir, outputs, prefix="p")

    uses_modules = mode == "hsfpn"
    added = count_params(
        config,
        base_hw=pyramid.extents(2),
        with_cp=uses_modules,
        with_sp=uses_modules,
        with_sdp=uses_modules,
    )
    report = {
        "mode": mode,
        "seed": args.seed,
        "alpha": args.alpha,
        "fusion": args.fusion,
        "channels": channels,
        "levels": {
            str(lv): {
                "shape": list(outputs[lv].shape),
                "l2_norm": float(np.linalg.norm(outputs[lv].astype(np.float64))),
            }
            for lv in outputs
        },
        "timing_s": timings,
        "added_params": added.to_dict(),
    }
    report_path = args.report or str(Path(args.output_dir) / "report.json")
    Path(report_path).write_text(json.dumps(report, indent=2) + "\n")
    return 0


def cmd_cost(args) -> int:
    model = CostModel(n=args.n, h=args.h, w=args.w, c=args.c)
    if args.format == "table":
        print(cost_table(model))
    elif args.format == "json":
        desc = {"n": model.n, "h": model.h, "w": model.w, "c": model.c}
        print(json.dumps({"model": desc, "rows": cost_rows(model)}, indent=2))
    else:
        print("method,complexity,multiplier,macs")
        for row in cost_rows(model):
            print(f"{row['method']},{row['complexity']},{row['multiplier']},{row['macs']}")
    return 0


def cmd_params(args) -> int:
    config = PyramidConfig(
        channels=args.channels, k=args.k, groups=args.groups, conv_bias=args.bias
    )
    report = count_params(
        config,
        base_hw=(args.base_h, args.base_w),
        with_cp=not args.no_cp,
        with_sp=not args.no_sp,
        with_sdp=not args.no_sdp,
    )
    if args.format == "table":
        print(report.to_table())
    elif args.format == "json":
        print(report.to_json())
    else:
        print(report.to_csv(), end="")
    return 0


_COMMANDS = {
    "filter": cmd_filter,
    "scr-sweep": cmd_scr_sweep,
    "forward": cmd_forward,
    "cost": cmd_cost,
    "params": cmd_params,
}


def _fail(category: str, message: str) -> None:
    line = " ".join(str(message).split())
    print(f"hsfpn: {category}: {line}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as err:
        _fail("usage", err)
        return 1
    except FileNotFoundError as err:
        _fail("usage", err)
        return 1
    except DegenerateBackgroundError as err:
        _fail("degenerate", err)
        return 2
    except PgmParseError as err:
        _fail("parse", err)
        return 3
    except (ShapeError, ValidationError) as err:
        _fail("config", err)
        return 3
    except OSError as err:
        _fail("io", err)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
