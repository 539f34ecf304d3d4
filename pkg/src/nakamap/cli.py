"""Command-line pipeline: simulate / envelope / estimate / evaluate / render / bench."""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import _backend
from .envelope import Axis, RFFrame, analytic_envelope
from .errors import NakamapError
from .evaluation import evaluate
from .grids import read_image, render_gray, write_image
from .mapping import KernelSpec, estimate_fixed, estimate_mkl, estimate_wmc
from .nakagami import NakagamiParams
from .phantom import (
    Arrangement,
    Layout,
    PhantomSpec,
    generate_distribution_phantom,
    generate_scatterer_phantom,
)


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list: {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad int list: {text!r}") from None


def _kmax(text):
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad kmax: {text!r}") from None


def cmd_simulate(args):
    regions = tuple(
        NakagamiParams(mu=m, omega=o) for m, o in zip(args.mu, args.omega)
    )
    spec = PhantomSpec(
        width=args.width,
        height=args.height,
        layout=Layout(args.layout),
        regions=regions,
        disk_center=tuple(args.center) if args.center else None,
        disk_radius=args.radius,
        density=args.density,
        arrangement=Arrangement(args.arrangement),
        psf_freq=args.psf_freq,
        psf_axial_sigma=args.psf_axial_sigma,
        psf_lateral_sigma=args.psf_lateral_sigma,
        seed=args.seed,
    )
    if spec.layout is Layout.SCATTERERS:
        truth = generate_scatterer_phantom(spec)
    else:
        truth = generate_distribution_phantom(spec)
    write_image(truth.envelope, args.out)
    if args.out_truth_mu:
        write_image(truth.truth_mu, args.out_truth_mu)
    if args.out_truth_omega:
        write_image(truth.truth_omega, args.out_truth_omega)
    if args.out_labels:
        write_image(truth.labels, args.out_labels)
    print(
        f"simulated {args.layout} {args.width}x{args.height} seed={args.seed} "
        f"truth={truth.truth_kind} -> {args.out}"
    )
    return 0


def cmd_envelope(args):
    img = read_image(args.infile)
    frame = RFFrame(image=img, axis=Axis(args.axis))
    write_image(analytic_envelope(frame), args.out)
    print(f"envelope {img.width}x{img.height} axis={args.axis} -> {args.out}")
    return 0


def _run_estimator(img, args):
    if args.method == "fixed":
        return estimate_fixed(img, args.window, threads=args.threads)
    if args.method == "wmc":
        return estimate_wmc(img, args.windows, threads=args.threads)
    spec = KernelSpec.auto(
        img.width, img.height, min_size=args.min_size, step=args.step, kmax=args.kmax
    )
    return estimate_mkl(img, spec=spec, threads=args.threads)


def cmd_estimate(args):
    img = read_image(args.infile)
    t0 = time.perf_counter()
    result = _run_estimator(img, args)
    ms = (time.perf_counter() - t0) * 1000.0
    write_image(result.mu_map, args.out_mu)
    if args.out_omega:
        write_image(result.omega_map, args.out_omega)
    if args.out_scale:
        write_image(result.scale_map, args.out_scale)
    if args.out_fit:
        write_image(result.fit_map, args.out_fit)
    sizes = ",".join(str(s) for s in result.spec.sizes)
    print(
        f"{result.method} sizes={sizes} defects={result.defect_count} "
        f"filled={result.filled_count} backend={_backend.backend_name()} "
        f"{ms:.1f} ms"
    )
    return 0


def cmd_evaluate(args):
    est = read_image(args.est)
    truth = read_image(args.truth)
    labels = read_image(args.labels) if args.labels else None
    report = evaluate(est, truth, labels=labels)
    Path(args.report).write_text(report.to_json() + "\n", encoding="utf-8")
    print(f"mad={report.mad:.6g} rmse={report.rmse:.6g} -> {args.report}")
    return 0


def cmd_render(args):
    img = read_image(args.infile)
    lo = args.lo if args.lo is not None else float(np.percentile(img.data, 1.0))
    hi = args.hi if args.hi is not None else float(np.percentile(img.data, 99.0))
    Path(args.out).write_bytes(render_gray(img, lo, hi))
    print(f"rendered [{lo:.6g}, {hi:.6g}] -> {args.out}")
    return 0


# The bench suite: three distribution phantoms every estimator can be
# scored against (exact truth maps).
_BENCH_PHANTOMS = (
    ("homogeneous", Layout.HOMOGENEOUS, ((1.0, 1.0),)),
    ("disk", Layout.DISK, ((0.8, 1.0), (1.5, 1.0))),
    ("quadrants", Layout.QUADRANTS, ((0.6, 1.0), (1.0, 1.0), (1.5, 1.0), (2.5, 1.0))),
)


def cmd_bench(args):
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = ["phantom,method,mad,rmse"]
    full = {
        "seed": args.seed,
        "size": args.size,
        "backend": _backend.backend_name(),
        "results": {},
    }
    for offset, (name, layout, params) in enumerate(_BENCH_PHANTOMS):
        spec = PhantomSpec(
            width=args.size,
            height=args.size,
            layout=layout,
            regions=tuple(NakagamiParams(mu=m, omega=o) for m, o in params),
            seed=args.seed + offset,
        )
        truth = generate_distribution_phantom(spec)
        runs = (
            ("fixed", lambda img: estimate_fixed(img, args.fixed_size,
                                                 threads=args.threads)),
            ("wmc", lambda img: estimate_wmc(img, args.wmc_sizes,
                                             threads=args.threads)),
            ("mkl", lambda img: estimate_mkl(img, threads=args.threads)),
        )
        full["results"][name] = {}
        for method, run in runs:
            t0 = time.perf_counter()
            result = run(truth.envelope)
            ms = (time.perf_counter() - t0) * 1000.0
            report = evaluate(
                result.mu_map,
                truth.truth_mu,
                labels=truth.labels,
                defect_count=result.defect_count,
                runtime_ms=ms,
            )
            lines.append(f"{name},{method},{report.mad:.6g},{report.rmse:.6g}")
            full["results"][name][method] = json.loads(report.to_json())
    csv_text = "\n".join(lines) + "\n"
    (outdir / "bench.csv").write_text(csv_text, encoding="utf-8")
    (outdir / "bench.json").write_text(
        json.dumps(full, indent=2) + "\n", encoding="utf-8"
    )
    sys.stdout.write(csv_text)
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="nakamap",
        description="Localized Nakagami parameter maps from ultrasound data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a phantom with known truth")
    p.add_argument("--layout", required=True,
                   choices=[layout.value for layout in Layout])
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu", type=_float_list, default=(),
                   help="comma list, one value per region")
    p.add_argument("--omega", type=_float_list, default=(),
                   help="comma list, one value per region")
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--center", type=_float_list, default=None, help="x,y")
    p.add_argument("--density", type=float, default=0.1)
    p.add_argument("--arrangement", default="random",
                   choices=[a.value for a in Arrangement])
    p.add_argument("--psf-freq", type=float, default=0.25)
    p.add_argument("--psf-axial-sigma", type=float, default=2.0)
    p.add_argument("--psf-lateral-sigma", type=float, default=1.5)
    p.add_argument("--out", required=True, help="envelope header path (.json)")
    p.add_argument("--out-truth-mu", default=None)
    p.add_argument("--out-truth-omega", default=None)
    p.add_argument("--out-labels", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("envelope", help="detect the envelope of an RF image")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--axis", default="columns", choices=[a.value for a in Axis])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("estimate", help="compute parameter maps of an envelope")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--method", required=True, choices=["fixed", "wmc", "mkl"])
    p.add_argument("--window", type=int, default=7, help="fixed kernel size")
    p.add_argument("--windows", type=_int_list, default=(7, 9),
                   help="wmc kernel sizes, comma list")
    p.add_argument("--min-size", type=int, default=3, help="mkl ladder start")
    p.add_argument("--step", type=int, default=2, help="mkl ladder step")
    p.add_argument("--kmax", type=_kmax, default=None,
                   help="mkl ladder bound, integer or 'auto'")
    p.add_argument("--threads", type=int, default=0,
                   help="0 = NAKAMAP_THREADS env var, then CPU count")
    p.add_argument("--out-mu", required=True)
    p.add_argument("--out-omega", default=None)
    p.add_argument("--out-scale", default=None)
    p.add_argument("--out-fit", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("evaluate", help="score an estimated map against truth")
    p.add_argument("--est", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--report", required=True, help="output JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("render", help="render a map to 8-bit PGM")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--lo", type=float, default=None,
                   help="black point (default: 1st percentile)")
    p.add_argument("--hi", type=float, default=None,
                   help="white point (default: 99th percentile)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="run the phantom suite with every method")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--fixed-size", type=int, default=3)
    p.add_argument("--wmc-sizes", type=_int_list, default=(7, 9))
    p.add_argument("--threads", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NakamapError, NotImplementedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
