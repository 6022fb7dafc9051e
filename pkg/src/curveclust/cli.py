"""Batch command-line front end.

Four non-interactive subcommands: ``generate`` (synthetic data to CSV),
``cluster`` (multi-start MCEC / CEC / GMM with a JSON report), ``density``
(evaluate a saved model on a grid, emitting SVG contour bands or a CSV
dump), and ``bench`` (regenerate the synthetic suites and tabulate the
method comparison).

Machine-readable results go to files; stderr carries human diagnostics
only.  Exit codes: 0 success, 1 run error, 2 usage error.  Every report
echoes the full effective configuration.  ``CURVECLUST_THREADS`` overrides
``--threads``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import logsumexp

from . import __version__
from .dataio import (
    generate,
    load_model,
    preset_curve_group,
    read_csv,
    save_model,
    synthetic_suite,
    write_csv,
)
from .density import log_density
from .fit import FitConfig
from .mcec import McecConfig, cec_gaussian, gmm_em, mcec_run
from .metrics import (
    ModelScore,
    gaussian_mixture_n_params,
    jaccard_index,
    rand_index,
    score,
)

GAUSSIAN_SCHEMA = "curveclust-gaussians/1"

# ten-step sequential palette for the density bands (dark to bright)
BAND_COLORS = [
    "#440154", "#482878", "#3e4989", "#31688e", "#26828e",
    "#1f9e89", "#35b779", "#6ece58", "#b5de2b", "#fde725",
]


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _thread_count(requested: int) -> int:
    env = os.environ.get("CURVECLUST_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            _info(f"ignoring non-integer CURVECLUST_THREADS={env!r}")
    return max(1, requested)


def _start_seed(base_seed: int, start: int) -> int:
    return int(np.random.SeedSequence([base_seed, start]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    if args.preset:
        try:
            group = preset_curve_group(args.preset)
        except KeyError as exc:
            _info(str(exc))
            return 1
    else:
        try:
            mixture = load_model(args.curve_file)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            _info(f"cannot read curve file: {exc}")
            return 1
        group = [(c.model.curve, c.model.sigma) for c in mixture.active_components()]

    if args.sigma is not None:
        group = [(curve, args.sigma) for curve, _ in group]

    n_curves = len(group)
    base = args.count // n_curves
    counts = [base + (1 if i < args.count % n_curves else 0) for i in range(n_curves)]
    if min(counts) < 1:
        _info(f"--count {args.count} is too small for {n_curves} curves")
        return 1
    dataset = generate(
        [(curve, sigma, cnt) for (curve, sigma), cnt in zip(group, counts)],
        seed=args.seed,
        name=args.preset or str(args.curve_file),
    )
    write_csv(dataset, args.out)
    _info(
        f"wrote {len(dataset)} points in R^{dataset.dim} "
        f"({n_curves} curve(s), seed {args.seed}) to {args.out}"
    )
    return 0


# ---------------------------------------------------------------------------
# cluster


def _run_single_start(method, dataset, args, start: int) -> dict:
    seed = _start_seed(args.seed, start)
    begin = time.perf_counter()
    entry: dict = {"start": start, "seed": seed}
    if method == "mcec":
        config = McecConfig(
            k=args.k,
            order=args.order,
            segments_K=args.segments,
            removal_pct=args.removal_pct,
            seed=seed,
            fit=FitConfig(max_iters=args.fit_iters),
        )
        state, trace = mcec_run(dataset, config)
        model_score = score(state, dataset, likelihood="hard")
        entry.update(
            criterion=trace[-1],
            trace=trace,
            active_clusters=state.n_active(),
            score=model_score.as_dict(),
            _state=state,
        )
    elif method == "cec":
        result = cec_gaussian(
            dataset, k=args.k, seed=seed, removal_pct=args.removal_pct
        )
        model_score = ModelScore.from_loglik(
            result.log_likelihood,
            gaussian_mixture_n_params(dataset.dim, int(result.active.sum())),
            len(dataset),
            "hard",
        )
        entry.update(
            criterion=result.energy,
            trace=result.trace,
            active_clusters=int(result.active.sum()),
            score=model_score.as_dict(),
            _state=result,
        )
    else:  # gmm
        result = gmm_em(dataset, k=args.k, seed=seed)
        model_score = ModelScore.from_loglik(
            result.log_likelihood,
            gaussian_mixture_n_params(dataset.dim, args.k),
            len(dataset),
            "soft",
        )
        entry.update(
            criterion=-result.log_likelihood,
            trace=result.trace,
            active_clusters=args.k,
            score=model_score.as_dict(),
            _state=result,
        )
    if dataset.labels is not None:
        labels = entry["_state"].assignment if method == "mcec" else entry["_state"].labels
        entry["rand_index"] = rand_index(labels, dataset.labels)
        entry["jaccard_index"] = jaccard_index(labels, dataset.labels)
    entry["wall_time_s"] = time.perf_counter() - begin
    return entry


def run_multistart(method: str, dataset, args) -> tuple[list[dict], int]:
    """Independent seeded starts; best by the method's own criterion.

    MCEC and CEC select the minimum final energy, GMM the maximum log
    likelihood (its criterion value is stored negated so "smaller is
    better" holds uniformly).  Assembly is by start index, so thread count
    never changes the result.
    """
    threads = _thread_count(args.threads)

    def run(start: int) -> dict:
        try:
            return _run_single_start(method, dataset, args, start)
        except Exception as exc:  # noqa: BLE001 - per-start isolation
            _info(f"start {start} failed: {exc}")
            return {"start": start, "seed": _start_seed(args.seed, start), "error": str(exc)}

    if threads == 1:
        entries = [run(i) for i in range(args.starts)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(run, range(args.starts)))
    succeeded = [e for e in entries if "error" not in e]
    if not succeeded:
        return entries, -1
    best = min(succeeded, key=lambda e: (e["criterion"], e["start"]))
    return entries, best["start"]


def _gaussian_model_json(result, method: str) -> dict:
    if method == "cec":
        indices = np.flatnonzero(result.active)
    else:
        indices = np.arange(len(result.weights))
    return {
        "schema": GAUSSIAN_SCHEMA,
        "method": method,
        "components": [
            {
                "weight": float(result.weights[i]),
                "mean": [float(v) for v in result.means[i]],
                "cov": [[float(v) for v in row] for row in result.covariances[i]],
            }
            for i in indices
        ],
    }


def cmd_cluster(args) -> int:
    try:
        dataset = read_csv(args.infile)
    except (OSError, ValueError) as exc:
        _info(f"cannot read input: {exc}")
        return 1
    entries, best_idx = run_multistart(args.method, dataset, args)
    if best_idx < 0:
        _info("all starts failed")
        return 1

    best_state = next(e for e in entries if e["start"] == best_idx)["_state"]
    if args.out_model:
        if args.method == "mcec":
            save_model(best_state, args.out_model)
        else:
            with open(args.out_model, "w", encoding="utf-8") as fh:
                json.dump(_gaussian_model_json(best_state, args.method), fh, indent=2)
                fh.write("\n")

    report = {
        "config": {
            "command": "cluster",
            "input": str(args.infile),
            "method": args.method,
            "k": args.k,
            "order": args.order,
            "segments": args.segments,
            "starts": args.starts,
            "seed": args.seed,
            "removal_pct": args.removal_pct,
            "fit_iters": args.fit_iters,
            "threads": _thread_count(args.threads),
            "eps_policy": "1e-4 * |first iteration energy|",
            "version": __version__,
        },
        "selection_criterion": (
            "max log-likelihood" if args.method == "gmm" else "min final energy"
        ),
        "best_start": best_idx,
        "starts": [
            {k: v for k, v in entry.items() if not k.startswith("_")}
            for entry in entries
        ],
    }
    if not args.timing:
        for entry in report["starts"]:
            entry.pop("wall_time_s", None)
    if args.out_report:
        with open(args.out_report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    best_entry = report["starts"][best_idx]
    _info(
        f"{args.method} best start {best_idx}: criterion {best_entry['criterion']:.6g}, "
        f"MLE {best_entry['score']['mle']:.6g}"
    )
    return 0


# ---------------------------------------------------------------------------
# density


def _mixture_log_density(mixture, points: np.ndarray) -> np.ndarray:
    parts = [
        math.log(c.weight) + log_density(c.model, points)
        for c in mixture.active_components()
        if c.weight > 0.0
    ]
    return logsumexp(np.column_stack(parts), axis=1)


def _auto_bbox(mixture) -> tuple[float, float, float, float]:
    sweep_s = np.linspace(0.0, 1.0, 512, endpoint=False)[:, None]
    lows, highs, pad = [], [], 0.0
    for comp in mixture.active_components():
        pts = comp.model.curve.evaluate(sweep_s)
        lows.append(pts.min(axis=0))
        highs.append(pts.max(axis=0))
        pad = max(pad, 6.0 * comp.model.sigma)
    lo = np.min(lows, axis=0) - pad
    hi = np.max(highs, axis=0) + pad
    return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])


def render_svg_bands(values: np.ndarray, width: int, height: int) -> str:
    """Filled contour bands at deciles of the value range, one px per cell.

    values[row, col] with row 0 at the bottom edge; rows are emitted as
    run-length merged <rect> elements grouped by band class.
    """
    vmin, vmax = float(values.min()), float(values.max())
    span = vmax - vmin
    if span <= 0.0:
        bands = np.zeros_like(values, dtype=int)
    else:
        bands = np.clip(((values - vmin) / span * 10.0).astype(int), 0, 9)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        "<style>"
        + "".join(
            f".band-{i}{{fill:{color}}}" for i, color in enumerate(BAND_COLORS)
        )
        + "</style>",
    ]
    for row in range(height):
        y = height - 1 - row  # grid row 0 is the bottom edge
        band_row = bands[row]
        col = 0
        while col < width:
            band = band_row[col]
            run = col
            while run < width and band_row[run] == band:
                run += 1
            lines.append(
                f'<rect class="band-{band}" x="{col}" y="{y}" '
                f'width="{run - col}" height="1"/>'
            )
            col = run
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_density(args) -> int:
    try:
        mixture = load_model(args.model)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        _info(f"cannot read model: {exc}")
        return 1
    if mixture.active_components()[0].model.ambient_dim != 2:
        _info("density grids are only rendered for 2-D models")
        return 1
    try:
        width, height = (int(v) for v in args.grid.lower().split("x"))
    except ValueError:
        _info(f"--grid must look like 200x200, got {args.grid!r}")
        return 2
    if args.bbox:
        try:
            xmin, xmax, ymin, ymax = (float(v) for v in args.bbox.split(","))
        except ValueError:
            _info(f"--bbox must be xmin,xmax,ymin,ymax, got {args.bbox!r}")
            return 2
    else:
        xmin, xmax, ymin, ymax = _auto_bbox(mixture)
    if not (xmax > xmin and ymax > ymin and width > 0 and height > 0):
        _info("degenerate bounding box or grid")
        return 1

    dx = (xmax - xmin) / width
    dy = (ymax - ymin) / height
    xs = xmin + (np.arange(width) + 0.5) * dx
    ys = ymin + (np.arange(height) + 0.5) * dy
    xx, yy = np.meshgrid(xs, ys)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    values = np.exp(_mixture_log_density(mixture, pts)).reshape(height, width)

    out = str(args.out)
    if out.endswith(".svg"):
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(render_svg_bands(values, width, height))
    elif out.endswith(".csv"):
        with open(out, "w", encoding="utf-8") as fh:
            fh.write("x,y,density\n")
            for r in range(height):
                for c in range(width):
                    fh.write(f"{xs[c]:.17g},{ys[r]:.17g},{values[r, c]:.17g}\n")
    else:
        _info("--out must end in .svg or .csv")
        return 2
    _info(
        f"evaluated {width}x{height} grid over "
        f"[{xmin:.3g},{xmax:.3g}]x[{ymin:.3g},{ymax:.3g}] to {out}"
    )
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    cases = synthetic_suite(args.suite, seed=args.seed)
    multiplier = 2 if args.suite in ("order1", "order2") else 4
    os.makedirs(args.out_dir, exist_ok=True)
    table_rows = []
    summary = {
        "config": {
            "command": "bench",
            "suite": args.suite,
            "seed": args.seed,
            "starts": args.starts,
            "segments": args.segments,
            "removal_pct": args.removal_pct,
            "fit_iters": args.fit_iters,
            "baseline_k_multiplier": multiplier,
            "threads": _thread_count(args.threads),
            "version": __version__,
        },
        "cases": [],
    }
    for case in cases:
        csv_path = os.path.join(args.out_dir, f"{case.name}.csv")
        write_csv(case.dataset, csv_path)
        case_report = {"name": case.name, "true_k": case.true_k, "methods": {}}
        for method in ("mcec", "cec", "gmm"):
            k = case.true_k if method == "mcec" else multiplier * case.true_k
            run_args = argparse.Namespace(
                k=k,
                order=case.order,
                segments=args.segments,
                starts=args.starts,
                seed=args.seed,
                removal_pct=args.removal_pct,
                fit_iters=args.fit_iters,
                threads=args.threads,
            )
            entries, best_idx = run_multistart(method, case.dataset, run_args)
            if best_idx < 0:
                _info(f"{case.name}/{method}: all starts failed")
                return 1
            best = next(e for e in entries if e["start"] == best_idx)
            row = {
                "method": method,
                "k": k,
                "mle": best["score"]["mle"],
                "bic": best["score"]["bic"],
                "aic": best["score"]["aic"],
                "rand_index": best.get("rand_index"),
                "jaccard_index": best.get("jaccard_index"),
                "active_clusters": best["active_clusters"],
            }
            case_report["methods"][method] = row
        summary["cases"].append(case_report)

        rows = case_report["methods"]
        table_rows.append(f"### {case.name} (true k = {case.true_k})\n")
        table_rows.append("| metric | MCEC | CEC | GMM |")
        table_rows.append("| --- | --- | --- | --- |")
        for metric in ("mle", "bic", "aic"):
            table_rows.append(
                f"| {metric.upper()} | "
                + " | ".join(f"{rows[m][metric]:.2f}" for m in ("mcec", "cec", "gmm"))
                + " |"
            )
        rand = rows["mcec"]["rand_index"]
        jacc = rows["mcec"]["jaccard_index"]
        table_rows.append(f"| Rand index | {rand:.2f} | - | - |")
        table_rows.append(f"| Jaccard index | {jacc:.2f} | - | - |")
        table_rows.append("")

    with open(os.path.join(args.out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(args.out_dir, "table.md"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(table_rows))
    _info(f"bench {args.suite} complete; outputs in {args.out_dir}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curveclust",
        description="Gaussian-on-closed-curve density models and clustering.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample synthetic data to CSV")
    source = gen.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", help="named curve preset")
    source.add_argument("--curve-file", help="model JSON defining the curves")
    gen.add_argument("--sigma", type=float, default=None, help="override noise level")
    gen.add_argument("--count", type=int, default=500, help="total points")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.set_defaults(handler=cmd_generate)

    clu = sub.add_parser("cluster", help="multi-start clustering of a CSV dataset")
    clu.add_argument("--in", dest="infile", required=True, help="input CSV")
    clu.add_argument("--method", choices=("mcec", "cec", "gmm"), default="mcec")
    clu.add_argument("--k", type=int, required=True, help="initial cluster count")
    clu.add_argument("--order", type=int, default=1, help="Fourier order (mcec)")
    clu.add_argument("--segments", type=int, default=16, help="subintervals per axis")
    clu.add_argument("--starts", type=int, default=1)
    clu.add_argument("--seed", type=int, default=0)
    clu.add_argument("--removal-pct", type=float, default=5.0)
    clu.add_argument("--fit-iters", type=int, default=200)
    clu.add_argument("--threads", type=int, default=1)
    clu.add_argument("--out-model", default=None, help="best-start model JSON")
    clu.add_argument("--out-report", default=None, help="run report JSON")
    clu.add_argument(
        "--no-timing",
        dest="timing",
        action="store_false",
        help="omit wall-clock times for byte-reproducible reports",
    )
    clu.set_defaults(handler=cmd_cluster, timing=True)

    den = sub.add_parser("density", help="evaluate a model on a grid (SVG or CSV)")
    den.add_argument("--model", required=True, help="model JSON from cluster")
    den.add_argument("--grid", default="200x200", help="WxH cells")
    den.add_argument("--bbox", default=None, help="xmin,xmax,ymin,ymax")
    den.add_argument("--out", required=True, help="output .svg or .csv path")
    den.set_defaults(handler=cmd_density)

    ben = sub.add_parser("bench", help="run a synthetic comparison suite")
    ben.add_argument(
        "--suite", choices=("order1", "order2", "order3", "order4"), required=True
    )
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--starts", type=int, default=4)
    ben.add_argument("--segments", type=int, default=16)
    ben.add_argument("--removal-pct", type=float, default=5.0)
    ben.add_argument("--fit-iters", type=int, default=200)
    ben.add_argument("--threads", type=int, default=1)
    ben.add_argument("--out-dir", required=True)
    ben.set_defaults(handler=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _info(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
