"""Command-line interface.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
3 registration failure (flat correlation surface, rank-deficient fit).
Every file written is announced on stdout, one path per line.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .datagen import NoiseSpec, add_noise_psnr, derive_seed, make_dataset2, sample_dataset1
from .errors import DegeneratePeakError, DimensionMismatchError, RankDeficientError
from .evaluate import ALGORITHM_NAMES, SweepResult, accuracy_sweep, make_registrar, time_registration
from .formats import DatasetManifest, FormatError, ImageRecord, MANIFEST_NAME, read_image, write_f64g
from .plot import write_accuracy_svg

SWEEP_COLUMNS = ("algorithm", "psnr_db", "n", "failures", "std_err_px",
                 "mean_abs_err_px", "max_err_px", "mean_time_us")
AXES_COLUMNS = ("algorithm", "psnr_db", "n", "std_err_x_px", "std_err_y_px",
                "mean_err_x_px", "mean_err_y_px")
DEFAULT_PSNR = "10:2:40"

CONVENTIONS = {
    "psnr": "10*log10(peak^2/MSE), peak = max of the clean image",
    "std": "population standard deviation",
    "error": "estimate - truth; std_err_px is over Euclidean error magnitudes",
    "sign": "positive dx/dy = target content moved toward +x/+y",
    "rng": "numpy PCG64 via SeedSequence; noise seed = SeedSequence([seed, round(1000*psnr), trial, role])",
}


class UsageError(Exception):
    pass


def _fixed(v: float) -> str:
    # round first so residues like -1e-17 print as 0.000000, not -0.000000
    return f"{round(v, 6) + 0.0:.6f}"


def parse_psnr(text: str) -> list[float | None]:
    """``"10:2:40"`` (inclusive range), comma lists, and ``clean`` for no noise."""
    levels: list[float | None] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part == "clean":
            levels.append(None)
        elif ":" in part:
            try:
                start, step, stop = (float(p) for p in part.split(":"))
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad PSNR range {part!r}, expected start:step:stop")
            if step <= 0 or stop < start:
                raise argparse.ArgumentTypeError(f"bad PSNR range {part!r}")
            n = int(round((stop - start) / step))
            levels.extend(start + i * step for i in range(n + 1))
        else:
            try:
                levels.append(float(part))
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad PSNR value {part!r}")
    if not levels:
        raise argparse.ArgumentTypeError("empty PSNR list")
    return levels


def parse_algos(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    bad = [n for n in names if n not in ALGORITHM_NAMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown algorithm(s) {', '.join(bad) or '(none)'}; choose from {', '.join(ALGORITHM_NAMES)}"
        )
    return names


def _single_psnr(text: str) -> float | None:
    levels = parse_psnr(text)
    if len(levels) != 1:
        raise argparse.ArgumentTypeError("give a single PSNR value or 'clean'")
    return levels[0]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _fmt(v) -> str:
    if v is None:
        return "clean"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _run_info(args, argv, **extra) -> dict:
    info = {"tool": "mmreg", "version": __version__, "argv": list(argv)}
    info.update(extra)
    return info


def _algo_params(args) -> dict:
    return {"centroid": {"radius": args.radius, "min_pixels_above_threshold": 3},
            "upsampled-dft": {"kappa": args.kappa, "half_window": 1.5},
            "phase-slope": {"rho": args.rho}}


def _registrar(args, name):
    return make_registrar(name, radius=args.radius, kappa=args.kappa, rho=args.rho)


def _announce(path) -> None:
    print(path, flush=True)


def _noise(grid, psnr_db, seed, trial, role):
    if psnr_db is None:
        return grid, None
    s = derive_seed(seed, int(round(psnr_db * 1000)) & (2**63 - 1), trial, role)
    return add_noise_psnr(grid, NoiseSpec(psnr_db, s)), s


def cmd_gen_synthetic(args, argv) -> int:
    pairs = sample_dataset1(args.seed, args.pairs, size=args.size, n_components=args.components)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    ref, ref_seed = _noise(pairs[0][0], args.psnr, args.seed, 0, 0)
    write_f64g(out / "ref.f64g", ref)
    _announce(out / "ref.f64g")
    records.append(ImageRecord("ref.f64g", 0.0, 0.0, args.psnr, ref_seed, role="reference"))
    width = len(str(len(pairs) - 1))
    for i, (_, shifted, truth) in enumerate(pairs):
        name = f"pair_{i:0{max(3, width)}d}.f64g"
        img, s = _noise(shifted, args.psnr, args.seed, i, 1)
        write_f64g(out / name, img)
        _announce(out / name)
        records.append(ImageRecord(name, truth.dx, truth.dy, args.psnr, s))
    params = {"seed": args.seed, "pairs": args.pairs, "size": args.size,
              "components": args.components, "psnr_db": args.psnr,
              "mixture": "shared per seed; centres U[0,size], sigma U[1,6], amplitude U(0,1]"}
    manifest = DatasetManifest("synthetic", records, params,
                               _run_info(args, argv, conventions=CONVENTIONS))
    _announce(manifest.write(out))
    return 0


def cmd_gen_downsample(args, argv) -> int:
    source = read_image(args.input)
    dataset = make_dataset2(source, args.factor, args.crop)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for i, (img, truth) in enumerate(dataset):
        u, v = round(truth.dx * args.factor), round(truth.dy * args.factor)
        name = f"tile_u{u:+03d}_v{v:+03d}.f64g"
        is_ref = u == 0 and v == 0
        img, s = _noise(img, args.psnr, args.seed, i, 0 if is_ref else 1)
        write_f64g(out / name, img)
        _announce(out / name)
        records.append(ImageRecord(name, truth.dx, truth.dy, args.psnr, s,
                                   role="reference" if is_ref else "target"))
    params = {"input": str(args.input), "source_width": source.width, "source_height": source.height,
              "factor": args.factor, "crop": args.crop, "psnr_db": args.psnr, "seed": args.seed,
              "filter": "box average over factor x factor blocks"}
    manifest = DatasetManifest("downsample", records, params,
                               _run_info(args, argv, conventions=CONVENTIONS))
    _announce(manifest.write(out))
    return 0


def cmd_register(args, argv) -> int:
    ref = read_image(args.reference)
    target = read_image(args.target)
    d = _registrar(args, args.algo)(ref, target)
    print(f"dx={_fixed(d.dx)} dy={_fixed(d.dy)}")
    return 0


def load_dataset(directory, limit: int | None = None):
    """``(reference, target, truth)`` triples for every target listed in a manifest."""
    directory = Path(directory)
    if not (directory / MANIFEST_NAME).is_file():
        raise UsageError(f"no {MANIFEST_NAME} in {directory}")
    manifest = DatasetManifest.read(directory)
    ref = read_image(directory / manifest.reference.file)
    targets = manifest.targets[:limit] if limit else manifest.targets
    return manifest, [(ref, read_image(directory / rec.file), rec.truth) for rec in targets]


def _write_csv(path: Path, columns, rows) -> None:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(getattr(r, c)) for c in columns) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def cmd_sweep(args, argv) -> int:
    manifest, dataset = load_dataset(args.data, args.limit)
    registrars = {name: _registrar(args, name) for name in args.algos}
    results = accuracy_sweep(dataset, registrars, args.psnr, seed=args.seed, workers=args.workers)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(out, SWEEP_COLUMNS, results)
    _announce(out)
    axes = out.with_name(out.stem + ".axes.csv")
    _write_csv(axes, AXES_COLUMNS, results)
    _announce(axes)
    run = _run_info(args, argv, seed=args.seed, psnr_levels=args.psnr, data=str(args.data),
                    dataset_kind=manifest.kind, dataset_params=manifest.params, pairs=len(dataset),
                    algorithms={n: _algo_params(args)[n] for n in args.algos},
                    conventions=CONVENTIONS, timing="mean_time_us excluded from reproducibility")
    run_path = out.with_name(out.stem + ".run.json")
    run_path.write_text(json.dumps(run, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    _announce(run_path)
    if args.svg:
        write_accuracy_svg(args.svg, results, title=f"accuracy vs PSNR ({manifest.kind})")
        _announce(args.svg)
    return 0


def cmd_bench(args, argv) -> int:
    if args.data:
        _, dataset = load_dataset(args.data, 1)
        ref, target, _ = dataset[0]
    else:
        ref, target, _ = sample_dataset1(args.seed, 1, size=args.size)[0]
    rows = []
    for name in args.algos:
        us = time_registration(_registrar(args, name), ref, target, args.warmup, args.reps)
        rows.append(SweepResult(name, None, args.reps, 0, 0.0, 0.0, 0.0, us))
        print(f"algorithm={name} size={ref.width}x{ref.height} median_us={us:.1f}")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        lines = ["algorithm,width,height,reps,median_time_us"]
        lines += [f"{r.algorithm},{ref.width},{ref.height},{args.reps},{r.mean_time_us!r}" for r in rows]
        out.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        _announce(out)
    return 0


def _add_algo_params(p) -> None:
    p.add_argument("--radius", type=float, default=3.0, help="centroid circle radius in pixels")
    p.add_argument("--kappa", type=_positive_int, default=100, help="upsampling factor for upsampled-dft")
    p.add_argument("--rho", type=float, default=0.6, help="phase-slope frequency disc, fraction of Nyquist")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmreg", description="Subpixel image registration by Modified Moment centroiding.")
    parser.add_argument("--version", action="version", version=f"mmreg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a test dataset")
    gsub = gen.add_subparsers(dest="kind", required=True)
    syn = gsub.add_parser("synthetic", help="Gaussian-mixture pairs with uniform subpixel shifts")
    syn.add_argument("--seed", type=int, default=0, help="mixture and shift seed")
    syn.add_argument("--pairs", type=_positive_int, default=100, help="number of shifted targets")
    syn.add_argument("--size", type=_positive_int, default=128, help="image side in pixels")
    syn.add_argument("--components", type=_positive_int, default=200, help="Gaussian components")
    syn.add_argument("--psnr", type=_single_psnr, default=None, help="noise level in dB (default clean)")
    syn.add_argument("--out", required=True, help="output directory")
    syn.set_defaults(func=cmd_gen_synthetic)

    down = gsub.add_parser("downsample", help="box-filter and decimate a high-resolution image")
    down.add_argument("--input", required=True, help="high-resolution source image (PGM or F64G)")
    down.add_argument("--factor", type=_positive_int, default=16, help="downsampling factor D")
    down.add_argument("--crop", type=_positive_int, default=128, help="output tile side in pixels")
    down.add_argument("--seed", type=int, default=0, help="noise seed when --psnr is given")
    down.add_argument("--psnr", type=_single_psnr, default=None, help="noise level in dB (default clean)")
    down.add_argument("--out", required=True, help="output directory")
    down.set_defaults(func=cmd_gen_downsample)

    reg = sub.add_parser("register", help="register one image pair")
    reg.add_argument("reference")
    reg.add_argument("target")
    reg.add_argument("--algo", choices=ALGORITHM_NAMES, default="centroid")
    _add_algo_params(reg)
    reg.set_defaults(func=cmd_register)

    sw = sub.add_parser("sweep", help="accuracy vs PSNR over a generated dataset")
    sw.add_argument("--data", required=True, help="dataset directory containing manifest.json")
    sw.add_argument("--algos", type=parse_algos, default=list(ALGORITHM_NAMES),
                    help="comma-separated registrars (default all)")
    sw.add_argument("--psnr", type=parse_psnr, default=parse_psnr(DEFAULT_PSNR),
                    help=f"START:STEP:STOP or comma list, 'clean' allowed (default {DEFAULT_PSNR})")
    sw.add_argument("--seed", type=int, default=0, help="base noise seed")
    sw.add_argument("--limit", type=_positive_int, default=None, help="use only the first N targets")
    sw.add_argument("--workers", type=_positive_int, default=1, help="threads over trials")
    sw.add_argument("--out", default="sweep.csv", help="results CSV")
    sw.add_argument("--svg", default=None, help="also draw std error vs PSNR as SVG")
    _add_algo_params(sw)
    sw.set_defaults(func=cmd_sweep)

    bench = sub.add_parser("bench", help="time each registrar on one pair")
    bench.add_argument("--data", default=None, help="dataset directory; first pair is timed")
    bench.add_argument("--size", type=_positive_int, default=128, help="synthetic pair side when no --data")
    bench.add_argument("--seed", type=int, default=0, help="synthetic pair seed")
    bench.add_argument("--algos", type=parse_algos, default=list(ALGORITHM_NAMES),
                       help="comma-separated registrars (default all)")
    bench.add_argument("--warmup", type=int, default=5, help="untimed calls before measuring")
    bench.add_argument("--reps", type=_positive_int, default=50, help="timed calls; the median is reported")
    bench.add_argument("--out", default=None, help="optional results CSV")
    _add_algo_params(bench)
    bench.set_defaults(func=cmd_bench)
    return parser


def _fail(msg: str, code: int) -> int:
    print(f"mmreg: error: {msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except DimensionMismatchError as exc:
        return _fail(str(exc), 2)
    except (DegeneratePeakError, RankDeficientError) as exc:
        return _fail(f"registration failed: {exc}", 3)
    except UsageError as exc:
        return _fail(str(exc), 2)
    except (OSError, FormatError) as exc:
        return _fail(str(exc), 1)
    except ValueError as exc:
        return _fail(str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())
