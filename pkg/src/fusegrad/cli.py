"""Command-line front end: ``fusegrad {fuse,eval,compare,demo}``.

Precedence for settings: built-in defaults < ``--config`` file < flags.
The config file holds ``key = value`` lines using the LossConfig keys
(variant, w_ssim, w_int, w_grad, scales, scale_weights, padding) and,
optionally, optimizer keys (steps, lr, init, beta1, beta2, epsilon,
tolerance, seed).

CSV column order for metric tables: ``path,en,mi,sd,scd,vif,qabf`` for
``eval`` and ``variant,en,mi,sd,scd,vif,qabf,best`` for ``compare``.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .gradients import l1_magnitude, sobel
from .image import ImageIOError, YCrCb, load_image, rgb_to_ycrcb, save_image, to_gray, ycrcb_to_rgb
from .losses import LossConfig, LossVariant, ours_targets, parse_floats, read_config_file, tcmoa_target
from .metrics import METRIC_NAMES, MetricReport, evaluate
from .optimizer import OptimizerConfig, PairKind, direct_fuse, make_synthetic_pair

log = logging.getLogger("fusegrad")

DEMO_AMPLITUDES = {
    PairKind.CROSS_EDGE: 0.5,
    PairKind.ANTI_DIAGONAL_RAMP: 0.8,
    PairKind.OPPOSING_POLARITY: 0.6,
}


class JobError(Exception):
    pass


# ---------------------------------------------------------------- settings

def build_configs(args) -> tuple[LossConfig, OptimizerConfig]:
    loss_map, opt_map = {}, {}
    if getattr(args, "config", None):
        try:
            raw = read_config_file(args.config)
        except OSError as exc:
            raise JobError(f"{args.config}: cannot read config ({exc.strerror or exc})") from exc
        for k, v in raw.items():
            if k in LossConfig.KEYS:
                loss_map[k] = v
            elif k in OptimizerConfig.KEYS:
                opt_map[k] = v
            else:
                raise JobError(f"{args.config}: unknown config key {k!r}")
    if getattr(args, "loss", None):
        loss_map["variant"] = args.loss
    if getattr(args, "weights", None):
        w = parse_floats(args.weights)
        if len(w) != 3:
            raise JobError(f"--weights expects w_ssim,w_int,w_grad, got {args.weights!r}")
        loss_map.update(w_ssim=w[0], w_int=w[1], w_grad=w[2])
    if getattr(args, "scales", None):
        loss_map["scales"] = args.scales
    if getattr(args, "scale_weights", None):
        loss_map["scale_weights"] = args.scale_weights
    if getattr(args, "padding", None):
        loss_map["padding"] = args.padding
    for flag, key in (("steps", "steps"), ("lr", "lr"), ("init", "init")):
        if getattr(args, flag, None) is not None:
            opt_map[key] = getattr(args, flag)
    try:
        return LossConfig.from_mapping(loss_map), OptimizerConfig.from_mapping(opt_map)
    except ValueError as exc:
        raise JobError(str(exc)) from exc


def weights_given(args) -> bool:
    if getattr(args, "weights", None):
        return True
    if getattr(args, "config", None):
        raw = read_config_file(args.config)
        return any(k in raw for k in ("w_ssim", "w_int", "w_grad"))
    return False


# ---------------------------------------------------------------- inputs

def _load_source(path):
    img = load_image(path)
    return img, to_gray(img)


def pair_inputs(first, second, labels=("ir", "vis")) -> tuple[list, list[str]]:
    """Pair two files, or two directories by filename stem."""
    a, b = Path(first), Path(second)
    if a.is_dir() != b.is_dir():
        raise JobError(f"{labels[0]} and {labels[1]} must both be files or both be directories")
    if not a.is_dir():
        for p in (a, b):
            if not p.exists():
                raise JobError(f"{p}: file not found")
        return [(a.stem, a, b)], []
    sa = {p.stem: p for p in sorted(a.iterdir()) if p.suffix.lower() == ".png"}
    sb = {p.stem: p for p in sorted(b.iterdir()) if p.suffix.lower() == ".png"}
    problems = [f"{sa[s]}: no matching {labels[1]} file" for s in sorted(set(sa) - set(sb))]
    problems += [f"{sb[s]}: no matching {labels[0]} file" for s in sorted(set(sb) - set(sa))]
    return [(s, sa[s], sb[s]) for s in sorted(set(sa) & set(sb))], problems


def _check_shapes(ir, vis, ir_path, vis_path):
    if ir.shape != vis.shape:
        raise JobError(f"dimension mismatch: {ir_path} is {ir.shape[0]}x{ir.shape[1]}, "
                       f"{vis_path} is {vis.shape[0]}x{vis.shape[1]}")


# ---------------------------------------------------------------- work units

def fuse_files(ir_path, vis_path, out_path, loss_cfg, opt_cfg, color=False):
    _, ir = _load_source(ir_path)
    vis_raw, vis_y = _load_source(vis_path)
    _check_shapes(ir, vis_y, ir_path, vis_path)
    try:
        fused, trace = direct_fuse(ir, vis_y, loss_cfg, opt_cfg)
    except ValueError as exc:
        raise JobError(f"{vis_path}: {exc}") from exc
    out_path = Path(out_path)
    if color and vis_raw.ndim == 3:
        ycc = rgb_to_ycrcb(vis_raw)
        save_image(out_path, ycrcb_to_rgb(YCrCb(fused, ycc.cr, ycc.cb)))
    else:
        save_image(out_path, fused)
    trace.to_csv(trace_path(out_path))
    return fused, trace


def trace_path(out_path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.stem + "_trace.csv")


def score_files(fused_path, ir_path, vis_path) -> MetricReport:
    f = to_gray(load_image(fused_path))
    i = to_gray(load_image(ir_path))
    v = to_gray(load_image(vis_path))
    if not (f.shape == i.shape == v.shape):
        raise JobError(f"dimension mismatch between {fused_path}, {ir_path} and {vis_path}")
    try:
        return evaluate(f, i, v)
    except ValueError as exc:
        raise JobError(f"{fused_path}: {exc}") from exc


def _run_pool(fn, items, jobs):
    def safe(item):
        try:
            return fn(item), None
        except (JobError, ImageIOError, ValueError) as exc:
            return None, str(exc)

    if jobs <= 1:
        return [safe(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(safe, items))


# ---------------------------------------------------------------- tables

def _fmt(x, digits=None):
    return repr(float(x)) if digits is None else f"{x:.{digits}f}"


def eval_table(rows, fmt="csv", with_mean=False) -> str:
    """``rows`` is a list of ``(label, MetricReport)``."""
    if fmt == "markdown":
        out = ["| path | " + " | ".join(m.upper() for m in METRIC_NAMES) + " |",
               "|---" * (len(METRIC_NAMES) + 1) + "|"]
        for label, rep in rows:
            out.append(f"| {label} | " + " | ".join(_fmt(x, 3) for x in rep.values()) + " |")
        if with_mean and rows:
            mean = MetricReport.mean(r for _, r in rows)
            out.append("| **mean** | " + " | ".join(_fmt(x, 3) for x in mean.values()) + " |")
        return "\n".join(out) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", *METRIC_NAMES])
    for label, rep in rows:
        w.writerow([label, *(_fmt(x) for x in rep.values())])
    if with_mean and rows:
        mean = MetricReport.mean(r for _, r in rows)
        w.writerow(["mean", *(_fmt(x) for x in mean.values())])
        w.writerow(["mean_rounded", *(_fmt(x, 3) for x in mean.values())])
    return buf.getvalue()


def best_marks(rows) -> dict[str, set[str]]:
    """Metric names for which each labelled row holds the best (highest) value."""
    marks = {label: set() for label, _ in rows}
    for k, name in enumerate(METRIC_NAMES):
        values = [rep.values()[k] for _, rep in rows]
        top = max(values)
        for (label, _), val in zip(rows, values):
            if val == top:
                marks[label].add(name)
    return marks


def compare_table(rows, fmt="csv") -> str:
    marks = best_marks(rows)
    if fmt == "markdown":
        out = ["| variant | " + " | ".join(m.upper() for m in METRIC_NAMES) + " |",
               "|---" * (len(METRIC_NAMES) + 1) + "|"]
        for label, rep in rows:
            cells = [f"**{_fmt(x, 3)}**" if name in marks[label] else _fmt(x, 3)
                     for name, x in zip(METRIC_NAMES, rep.values())]
            out.append(f"| {label} | " + " | ".join(cells) + " |")
        return "\n".join(out) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", *METRIC_NAMES, "best"])
    for label, rep in rows:
        best = ";".join(n for n in METRIC_NAMES if n in marks[label])
        w.writerow([label, *(_fmt(x) for x in rep.values()), best])
    return buf.getvalue()


def _emit(text, out_path=None):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_fuse(args) -> int:
    loss_cfg, opt_cfg = build_configs(args)
    pairs, problems = pair_inputs(args.ir, args.vis)
    for p in problems:
        log.error(p)
    if Path(args.ir).is_dir():
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        targets = [(s, i, v, out_dir / f"{s}.png") for s, i, v in pairs]
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        targets = [(s, i, v, Path(args.out)) for s, i, v in pairs]

    def work(item):
        _, ir_p, vis_p, out_p = item
        _, trace = fuse_files(ir_p, vis_p, out_p, loss_cfg, opt_cfg, color=args.color)
        log.info("%s: %d iterations, loss %.6g -> %.6g", out_p, trace.iterations_run,
                 trace.loss_history[0], trace.final_loss)

    failed = 0
    for (_, err) in _run_pool(work, targets, args.jobs):
        if err:
            log.error(err)
            failed += 1
    return 1 if failed or problems or not targets else 0


def cmd_eval(args) -> int:
    fused = Path(args.fused)
    problems = []
    if fused.is_dir():
        triples = []
        for p in sorted(fused.iterdir()):
            if p.suffix.lower() != ".png":
                continue
            ir_p, vis_p = Path(args.ir) / p.name, Path(args.vis) / p.name
            missing = [str(q) for q in (ir_p, vis_p) if not q.exists()]
            if missing:
                problems.append(f"{p}: no matching source file ({', '.join(missing)})")
                continue
            triples.append((p.stem, p, ir_p, vis_p))
    else:
        triples = [(str(fused), fused, Path(args.ir), Path(args.vis))]

    results = _run_pool(lambda t: score_files(t[1], t[2], t[3]), triples, args.jobs)
    rows = []
    for (label, *_), (rep, err) in zip(triples, results):
        if err:
            problems.append(err)
        else:
            rows.append((label, rep))
    for p in problems:
        log.error(p)
    if not rows:
        return 1
    _emit(eval_table(rows, args.format, with_mean=fused.is_dir()), args.out)
    return 1 if problems else 0


def compare_arrays(pairs, base_cfg, opt_cfg, keep_weights=False, out_dir=None, jobs=1):
    """Fuse every ``(stem, ir, vis_y)`` pair under each variant and score it.

    Returns ``(rows, errors)`` with rows ``(variant_name, mean MetricReport)``.
    """
    rows, errors = [], []
    for variant in LossVariant:
        if keep_weights:
            cfg = LossConfig(variant, base_cfg.w_ssim, base_cfg.w_int, base_cfg.w_grad,
                             base_cfg.scales, base_cfg.scale_weights, base_cfg.pad)
        else:
            cfg = base_cfg.with_variant(variant)

        def work(item, cfg=cfg, variant=variant):
            stem, ir, vis_y = item
            fused, trace = direct_fuse(ir, vis_y, cfg, opt_cfg)
            if out_dir is not None:
                vdir = Path(out_dir) / variant.value
                vdir.mkdir(parents=True, exist_ok=True)
                save_image(vdir / f"{stem}.png", fused)
                trace.to_csv(trace_path(vdir / f"{stem}.png"))
            return evaluate(fused, ir, vis_y)

        results = _run_pool(work, pairs, jobs)
        reports = [r for r, e in results if e is None]
        errs = [e for _, e in results if e is not None]
        if errs:
            errors.extend(f"{variant.value}: {e}" for e in errs)
        if reports:
            rows.append((variant.value, MetricReport.mean(reports)))
    return rows, errors


def cmd_compare(args) -> int:
    loss_cfg, opt_cfg = build_configs(args)
    file_pairs, problems = pair_inputs(args.ir, args.vis)
    pairs = []
    for stem, ir_p, vis_p in file_pairs:
        try:
            _, ir = _load_source(ir_p)
            _, vis = _load_source(vis_p)
            _check_shapes(ir, vis, ir_p, vis_p)
        except (ImageIOError, JobError) as exc:
            problems.append(str(exc))
            continue
        pairs.append((stem, ir, vis))
    out_dir = Path(args.out) if args.out else None
    if not pairs:
        for p in problems:
            log.error(p)
        return 1
    rows, errors = compare_arrays(pairs, loss_cfg, opt_cfg, weights_given(args), out_dir, args.jobs)
    for p in problems + errors:
        log.error(p)
    table = compare_table(rows, args.format)
    sys.stdout.write(table)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / ("compare.md" if args.format == "markdown" else "compare.csv")).write_text(table)
    return 1 if problems or errors or len(rows) != len(LossVariant) else 0


def demo_target_report(size=64, amplitude=None):
    """Interior target magnitudes on the anti-diagonal ramp: ``(tcmoa_max, ours_mean, two_a)``."""
    amplitude = DEMO_AMPLITUDES[PairKind.ANTI_DIAGONAL_RAMP] if amplitude is None else amplitude
    vis, ir = make_synthetic_pair(PairKind.ANTI_DIAGONAL_RAMP, size, amplitude)
    g_star = tcmoa_target(vis, ir)[1:-1, 1:-1]
    sel = l1_magnitude(ours_targets(vis, ir))[1:-1, 1:-1]
    gx, gy = sobel(vis)
    two_a = (np.abs(gx) + np.abs(gy))[1:-1, 1:-1]
    return float(np.max(np.abs(g_star))), float(np.mean(sel)), float(np.mean(two_a))


def cmd_demo(args) -> int:
    if args.init is None:
        args.init = "mean"
    loss_cfg, opt_cfg = build_configs(args)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise JobError(f"{out}: output directory not writable ({exc.strerror or exc})") from exc

    tc_max, ours_mean, two_a = demo_target_report(args.size)
    print(f"anti_diagonal_ramp interior target: tcmoa max |G*| = {tc_max:.3e}")
    print(f"anti_diagonal_ramp interior target: ours mean |sel_x|+|sel_y| = {ours_mean:.6f} "
          f"(2|a| = {two_a:.6f})")

    failed = False
    for kind in PairKind:
        vis, ir = make_synthetic_pair(kind, args.size, DEMO_AMPLITUDES[kind])
        kdir = out / kind.value
        kdir.mkdir(parents=True, exist_ok=True)
        save_image(kdir / "vis.png", vis)
        save_image(kdir / "ir.png", ir)
        rows, errors = compare_arrays([(kind.value, ir, vis)], loss_cfg, opt_cfg,
                                      weights_given(args), kdir, args.jobs)
        for e in errors:
            log.error(e)
            failed = True
        table = compare_table(rows, args.format)
        (kdir / ("compare.md" if args.format == "markdown" else "compare.csv")).write_text(table)
        print(f"\n[{kind.value}]")
        sys.stdout.write(table)
    return 1 if failed else 0


# ---------------------------------------------------------------- parser

def _add_loss_flags(p):
    p.add_argument("--loss", choices=[v.value for v in LossVariant], help="loss variant (default ours)")
    p.add_argument("--weights", help="w_ssim,w_int,w_grad")
    p.add_argument("--scales", help="comma-separated scales, must include 1")
    p.add_argument("--scale-weights", dest="scale_weights", help="comma-separated weights, normalized")
    p.add_argument("--padding", choices=["zero", "reflect"])
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", type=float, help="Adam step size")
    p.add_argument("--init", choices=["max", "mean", "vis"])
    p.add_argument("--config", help="key = value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fusegrad", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", help="fuse an ir/vis pair (or directories) by direct optimization")
    p.add_argument("--ir", required=True)
    p.add_argument("--vis", required=True)
    p.add_argument("--out", required=True, help="output PNG, or directory in directory mode")
    p.add_argument("--color", action="store_true", help="reattach the visible chroma")
    p.add_argument("--jobs", type=int, default=1)
    _add_loss_flags(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="score fused images")
    p.add_argument("--fused", required=True)
    p.add_argument("--ir", required=True)
    p.add_argument("--vis", required=True)
    p.add_argument("--out", help="write the table here instead of stdout")
    p.add_argument("--format", choices=["csv", "markdown"], default="csv")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="fuse with every loss variant and tabulate metrics")
    p.add_argument("--ir", required=True)
    p.add_argument("--vis", required=True)
    p.add_argument("--out", help="directory for fused images and the table")
    p.add_argument("--format", choices=["csv", "markdown"], default="csv")
    p.add_argument("--jobs", type=int, default=1)
    _add_loss_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("demo", help="run the synthetic cancellation demonstrations")
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--format", choices=["csv", "markdown"], default="csv")
    p.add_argument("--jobs", type=int, default=1)
    _add_loss_flags(p)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="fusegrad: %(message)s")
    try:
        return args.func(args)
    except (JobError, ImageIOError) as exc:
        log.error("%s", exc)
        return 1
    except ValueError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
