"""Command-line interface: ``htsimplify {koch,simplify,stats,compare}``.

Exit codes: 0 success, 1 runtime or data failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import bisect
import contextlib
import csv
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .exceptions import HTSimplifyError
from .geometry import get_tolerance, polyline_length
from .io import FORMATS, Feature, FeatureSet, infer_format, read_features, render_rank_size, write_features
from .koch import KochSpec, koch_curve, triangle_inventory
from .scaling import DEFAULT_HEAD_LIMIT, head_tail_breaks, rank_size
from .simplify import (
    MeasureKind,
    detect_self_intersections,
    measure_tree,
    repair_crossings,
    simplify_dp,
    simplify_ht,
    simplify_vw,
    simplify_vw_count,
)

ALGORITHMS = ("ht", "dp", "vw")


class UsageError(Exception):
    pass


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _pos_int(text):
    v = _nonneg_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _pos_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return v


def _ratio(text):
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a ratio: {text!r}") from None
    if not 0 < v <= Fraction(1, 2):
        raise argparse.ArgumentTypeError(f"ratio must lie in (0, 1/2], got {text}")
    return v


def _head_limit(text):
    v = _pos_float(text)
    if not v < 1:
        raise argparse.ArgumentTypeError(f"head limit must lie in (0, 1), got {text}")
    return v


def _measure(text):
    try:
        return MeasureKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="htsimplify", description="Fractal-guided line simplification toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("koch", help="generate a Koch curve and print its statistics")
    k.add_argument("--iterations", type=_nonneg_int, required=True)
    k.add_argument("--ratio", type=_ratio, default=Fraction(1, 3))
    k.add_argument("--height-factor", type=_pos_float, default=1.0)
    k.add_argument("--out")
    k.add_argument("--format", choices=FORMATS)

    s = sub.add_parser("simplify", help="simplify every feature of a file")
    s.add_argument("--algo", choices=ALGORITHMS, required=True)
    s.add_argument("--measure", type=_measure, default=MeasureKind.PERP_DISTANCE)
    s.add_argument("--level", type=_pos_int)
    s.add_argument("--tolerance", type=_pos_float)
    s.add_argument("--min-area", type=_pos_float)
    s.add_argument("--count", type=_pos_int)
    s.add_argument("--head-limit", type=_head_limit, default=DEFAULT_HEAD_LIMIT)
    s.add_argument("--repair-crossings", action="store_true")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=FORMATS, help="input format (default: from extension)")

    st = sub.add_parser("stats", help="head/tail statistics of a measure")
    src = st.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="input")
    src.add_argument("--koch", type=_nonneg_int, metavar="N", help="use the triangle sizes of koch_curve(N)")
    st.add_argument("--measure", type=_measure, default=MeasureKind.PERP_DISTANCE)
    st.add_argument("--head-limit", type=_head_limit, default=DEFAULT_HEAD_LIMIT)
    st.add_argument("--plot")
    st.add_argument("--format", choices=FORMATS)

    c = sub.add_parser("compare", help="compare algorithms at a common vertex budget")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--algos", required=True, help="comma-separated, e.g. ht,dp,vw")
    c.add_argument("--budget", type=_pos_int, required=True)
    c.add_argument("--measure", type=_measure, default=MeasureKind.PERP_DISTANCE)
    c.add_argument("--head-limit", type=_head_limit, default=DEFAULT_HEAD_LIMIT)
    c.add_argument("--report")
    c.add_argument("--format", choices=FORMATS)
    return p


def _table(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows)


def _num(v: float) -> str:
    return f"{v:.6g}"


def _frac(v) -> str:
    f = Fraction(v).limit_denominator(10 ** 9)
    return str(f)


def _line_ht(line, kind, head_limit) -> Optional[int]:
    if len(line) < 3:
        return None
    return head_tail_breaks(measure_tree(line, kind).interior_values(), head_limit).ht_index


def _show(v) -> str:
    return "-" if v is None else str(v)


def _read(path, fmt):
    return read_features(path, fmt or infer_format(path))


def _out_format(path, fmt):
    try:
        return infer_format(path)
    except ValueError:
        if fmt:
            return fmt
        raise


# ---------------------------------------------------------------- koch

def cmd_koch(args, out, err) -> int:
    try:
        spec = KochSpec(args.iterations, args.ratio, args.height_factor)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out and not args.format:
        try:
            infer_format(args.out)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    line = koch_curve(spec)
    inv = triangle_inventory(spec.iterations, spec.ratio)
    print(f"vertices={len(line)} length={polyline_length(line):.6f}", file=out)
    rows = [["level", "scale", "count"]] + [[str(e.level), _frac(e.scale), str(e.count)] for e in inv]
    print(_table(rows), file=out)
    print("inventory " + " ".join(f"{_frac(e.scale)}:{e.count}" for e in inv), file=out)
    if args.out:
        fs = FeatureSet((Feature(f"koch{spec.iterations}", line, {"iterations": str(spec.iterations)}),))
        write_features(fs, args.out, args.format or infer_format(args.out))
    return 0


# ---------------------------------------------------------------- simplify

def _simplify_params(args):
    given = {
        "level": args.level is not None,
        "tolerance": args.tolerance is not None,
        "min-area": args.min_area is not None,
        "count": args.count is not None,
    }
    allowed = {"ht": {"level"}, "dp": {"tolerance"}, "vw": {"min-area", "count"}}[args.algo]
    extra = [k for k, v in given.items() if v and k not in allowed]
    if extra:
        raise UsageError(f"--{extra[0]} does not apply to --algo {args.algo}")
    if args.algo == "dp" and not given["tolerance"]:
        raise UsageError("--algo dp needs --tolerance")
    if args.algo == "vw" and given["min-area"] == given["count"]:
        raise UsageError("--algo vw needs exactly one of --min-area or --count")
    if args.algo == "vw" and given["count"] and args.count < 2:
        raise UsageError("--count must be at least 2")


def _run_algo(line, args):
    if args.algo == "ht":
        if len(line) < 3:
            return simplify_dp(line, 1.0)  # two vertices: nothing to classify
        return simplify_ht(line, args.measure, args.level or 2, args.head_limit)
    if args.algo == "dp":
        return simplify_dp(line, args.tolerance)
    if args.min_area is not None:
        return simplify_vw(line, args.min_area)
    return simplify_vw_count(line, min(args.count, len(line)))


def cmd_simplify(args, out, err) -> int:
    _simplify_params(args)
    try:
        out_fmt = _out_format(args.out, args.format)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    fs = _read(args.input, args.format)
    done = []
    rows = [["feature", "before", "after", "ht_before", "ht_after", "crossings"]]
    failed = False
    for f in fs:
        try:
            result = _run_algo(f.line, args)
            if args.repair_crossings:
                result = repair_crossings(f.line, result, args.measure)
            simple = result.apply(f.line)
            crossings = len(detect_self_intersections(simple))
            rows.append([
                f.id, str(len(f.line)), str(len(simple)),
                _show(_line_ht(f.line, args.measure, args.head_limit)),
                _show(_line_ht(simple, args.measure, args.head_limit)),
                str(crossings),
            ])
            done.append(Feature(f.id, simple, dict(f.properties)))
        except HTSimplifyError as exc:
            print(f"error: feature {f.id}: {exc}", file=err)
            failed = True
    write_features(FeatureSet(tuple(done)), args.out, out_fmt)
    print(_table(rows), file=out)
    return 1 if failed else 0


# ---------------------------------------------------------------- stats

def _stats_block(label, values, head_limit, out):
    ht = head_tail_breaks(values, head_limit)
    rs = rank_size(values)
    print(f"feature {label}: n={len(values)} ht_index={ht.ht_index}", file=out)
    print("means: " + (" ".join(_num(m) for m in ht.means) or "(none)"), file=out)
    print("head_counts: " + (" ".join(str(c) for c in ht.head_counts) or "(none)"), file=out)
    print("head_fractions: " + (" ".join(f"{h:.4f}" for h in ht.head_fractions) or "(none)"), file=out)
    rows = [["rank", "size", "level"]]
    levels = ht.levels[rs.order]
    rows += [[str(r), _num(v), str(l)] for r, v, l in zip(rs.ranks.tolist(), rs.sizes.tolist(), levels.tolist())]
    print(_table(rows), file=out)
    return rs


def cmd_stats(args, out, err) -> int:
    series = []
    failed = False
    if args.koch is not None:
        values = triangle_inventory(args.koch).values()
        if not values:
            print("error: koch iteration 0 has no triangles", file=err)
            return 1
        series.append((f"koch{args.koch}-triangles", _stats_block(f"koch{args.koch}-triangles", values, args.head_limit, out)))
    else:
        fs = _read(args.input, args.format)
        for f in fs:
            try:
                values = measure_tree(f.line, args.measure).interior_values()
                series.append((f.id, _stats_block(f.id, values, args.head_limit, out)))
            except HTSimplifyError as exc:
                print(f"error: feature {f.id}: {exc}", file=err)
                failed = True
    if args.plot:
        if not series:
            print("error: nothing to plot", file=err)
            return 1
        render_rank_size(series, args.plot)
    return 1 if failed else 0


# ---------------------------------------------------------------- compare

def _parse_algos(text, err):
    names = [a.strip() for a in text.split(",") if a.strip()]
    unknown = [a for a in names if a not in ALGORITHMS]
    if unknown:
        raise UsageError(f"unknown algorithm {unknown[0]!r}; choose from {', '.join(ALGORITHMS)}")
    uniq = list(dict.fromkeys(names))
    if len(uniq) < len(names):
        print(f"warning: duplicate algorithms ignored: {','.join(names)} -> {','.join(uniq)}", file=err)
    if len(uniq) < 2:
        raise UsageError("compare needs at least two distinct algorithms")
    return uniq


def dp_tolerance_for_budget(line, budget: int) -> float:
    """Tolerance whose Douglas-Peucker output is closest to ``budget`` vertices.

    Retained counts only change at the path-minimum split distances, so
    the search runs over those breakpoints; ties prefer the smaller count.
    """
    if len(line) < 3:
        return 1.0
    tree = measure_tree(line, MeasureKind.PERP_DISTANCE)
    pm = np.sort(tree.x_path_min[1:-1])
    cands = np.unique(pm[pm > 0])
    if len(cands) == 0:
        return get_tolerance()
    # retained(t) = 2 + #(pm >= t), non-increasing in t
    counts = [2 + len(pm) - bisect.bisect_left(pm.tolist(), t) for t in cands.tolist()]
    # counts non-increasing; the step past the last candidate leaves only the endpoints
    options = list(zip(counts, cands.tolist())) + [(2, float(cands[-1]) * 2)]
    best = min(options, key=lambda ct: (abs(ct[0] - budget), ct[0]))
    return best[1]


def _compare_one(line, algo, budget, args):
    n = len(line)
    if algo == "vw":
        target = max(2, min(budget, n))
        return simplify_vw_count(line, target), f"count={target}"
    if algo == "dp":
        tol = dp_tolerance_for_budget(line, budget)
        return simplify_dp(line, tol), f"tolerance={tol:.6g}"
    if n < 3:
        return simplify_dp(line, 1.0), "level=1"
    tree = measure_tree(line, args.measure)
    ht = head_tail_breaks(tree.interior_values(), args.head_limit).ht_index
    chosen = None
    for level in range(1, ht + 1):
        r = simplify_ht(line, args.measure, level, args.head_limit, tree=tree)
        chosen = (r, f"level={level}")
        if r.n_retained <= budget:
            break
    return chosen


def cmd_compare(args, out, err) -> int:
    algos = _parse_algos(args.algos, err)
    if args.budget < 2:
        raise UsageError("--budget must be at least 2")
    fs = _read(args.input, args.format)
    header = ["feature", "algorithm", "parameter", "retained", "crossings",
              "ht_before", "ht_after", "head_fractions_after", "retains_scaling"]
    rows = []
    failed = False
    for f in fs:
        ht_before = _line_ht(f.line, args.measure, args.head_limit)
        for algo in algos:
            try:
                result, param = _compare_one(f.line, algo, args.budget, args)
                simple = result.apply(f.line)
                crossings = len(detect_self_intersections(simple))
                if len(simple) >= 3:
                    after = head_tail_breaks(measure_tree(simple, args.measure).interior_values(), args.head_limit)
                    ht_after = after.ht_index
                    fracs = ";".join(f"{h:.4f}" for h in after.head_fractions)
                    keeps = ht_after >= 2 and all(h < 0.5 for h in after.head_fractions)
                else:
                    ht_after, fracs, keeps = None, "", False
                rows.append([f.id, algo, param, str(len(simple)), str(crossings),
                             _show(ht_before), _show(ht_after), fracs or "-", "yes" if keeps else "no"])
            except HTSimplifyError as exc:
                print(f"error: feature {f.id} / {algo}: {exc}", file=err)
                failed = True
    print(_table([header] + rows), file=out)
    if args.report:
        try:
            with open(args.report, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
        except OSError as exc:
            print(f"error: cannot write report {args.report}: {exc.strerror or exc}", file=err)
            return 1
    return 1 if failed else 0


_COMMANDS = {"koch": cmd_koch, "simplify": cmd_simplify, "stats": cmd_stats, "compare": cmd_compare}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        parser.print_usage(err)
        print(f"htsimplify {args.command}: error: {exc}", file=err)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: no such file", file=err)
        return 1
    except (HTSimplifyError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
