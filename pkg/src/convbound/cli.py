"""Command-line front end: ``convbound <command> [options]``.

Every command writes CSV results, SVG figures and a ``*_manifest.json``
listing what was produced. Exit status: 0 success, 1 bad input or usage,
2 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .bellstats import SettingPair, correlation_bounds, write_report
from .deconv import DeconvConfig, convolve_pair, deconvolve, load_config, write_ion_csv, write_trace_csv
from .discriminator import (
    ThresholdConfig,
    blend_interpretations,
    classify_counts,
    flipped_category_correlation,
    interpret_other,
    interpret_rowe,
    parity_correlation,
    write_category_report,
)
from .errors import ConvboundError, ValidationError
from .histogram import FrequencyDist, normalize, read_histogram, write_histogram
from .jointdensity import (
    DegenerateDistributionError,
    antidiagonal_sums,
    pearson_correlation,
    read_matrix_csv,
    read_triplets_csv,
    write_matrix_csv,
    write_triplets_csv,
)
from .synth import PRESETS, ExperimentConfig, Mode, JointSamples, simulate, write_samples

DEFAULT_OUT = "convbound_out"


class UsageError(ConvboundError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_triple(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("expected exactly three class weights")
    return vals


class Run:
    """Collects outputs for one command and writes its manifest."""

    def __init__(self, args, inputs=()):
        self.args = args
        self.inputs = [os.fspath(p) for p in inputs]
        out = args.out_dir or os.environ.get("CONVBOUND_OUT") or DEFAULT_OUT
        self.out_dir = Path(out)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.outputs.append(os.fspath(p))
        return p

    def csv(self, name: str, writer, *payload) -> Path:
        p = self.path(name)
        with open(p, "w", encoding="utf-8", newline="") as fh:
            writer(*payload, fh)
        return p

    def svg(self, name: str, draw, *a, **kw) -> Path:
        p = self.path(name)
        draw(*a, p, timestamp=not self.args.no_timestamp, **kw)
        return p

    def finish(self) -> Path:
        name = f"{self.args.command}_manifest.json"
        manifest = {
            "command": self.args.command,
            "argv": self.args.argv,
            "inputs": self.inputs,
            "seed": self.args.seed,
            "outputs": list(self.outputs),
            "tool_version": __version__,
        }
        p = self.out_dir / name
        with open(p, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
        return p


def _stem(path) -> str:
    return Path(path).stem


def _load_dist(path) -> FrequencyDist:
    return normalize(read_histogram(path))


def cmd_synth(args) -> int:
    base = PRESETS[args.preset]
    cfg = ExperimentConfig(
        n_experiments=args.n if args.n is not None else base.n_experiments,
        lambda_dark=args.lambda_dark if args.lambda_dark is not None else base.lambda_dark,
        lambda_bright=args.lambda_bright if args.lambda_bright is not None else base.lambda_bright,
        class_weights=args.weights or base.class_weights,
        seed=args.seed,
        mode=Mode(args.mode.replace("-", "_")),
    )
    run = Run(args)
    stem = f"{args.preset}_synth"
    out = simulate(cfg, workers=args.workers, label=stem)
    if isinstance(out, JointSamples):
        run.csv(f"{stem}_joint.csv", write_samples, out)
        hist = out.summed(stem)
    else:
        hist = out
    run.csv(f"{stem}.csv", write_histogram, hist)
    t = ThresholdConfig()
    run.svg(f"{stem}.svg", plotting.histogram_figure, normalize(hist).probs,
            title=f"{stem}: {cfg.n_experiments} experiments", cuts=(t.t1, t.t2))
    print(f"{stem}: {hist.total} experiments, N = {hist.N}")
    run.finish()
    return 0


def cmd_bounds(args) -> int:
    f = _load_dist(args.inp)
    run = Run(args, [args.inp])
    setting = SettingPair(args.phi1, args.phi2, args.setting or "")
    report = correlation_bounds(f, setting, args.seeds)
    stem = _stem(args.inp)
    run.csv(f"{stem}_bounds.csv", write_report, report)
    names = list(report.per_constructor)
    run.svg(f"{stem}_bounds.svg", plotting.bars_figure, names, [report.per_constructor[k] for k in names],
            title=f"{stem}: correlations consistent with one histogram")
    for k, r in report.per_constructor.items():
        print(f"{k:>20s}  r = {_fmt(r)}")
    print(f"{'range':>20s}  {_fmt(report.min_r)} <= r <= {_fmt(report.max_r)}")
    run.finish()
    return 0


def cmd_deconvolve(args) -> int:
    f = _load_dist(args.inp)
    overrides = dict(seed=args.seed, fitness_metric=args.metric, generations=args.generations,
                     population_size=args.population, workers=args.workers)
    if args.config:
        cfg = load_config(args.config, **overrides)
    else:
        cfg = DeconvConfig(**{k: v for k, v in overrides.items() if v is not None})
    run = Run(args, [args.inp] + ([args.config] if args.config else []))
    res = deconvolve(f, cfg)
    stem = _stem(args.inp)
    g, h = res.pair.g, res.pair.h
    run.csv(f"{stem}_ion1.csv", write_ion_csv, g)
    run.csv(f"{stem}_ion2.csv", write_ion_csv, h)
    run.csv(f"{stem}_trace.csv", write_trace_csv, res.trace)
    regen = convolve_pair(g, h)
    run.svg(f"{stem}_regeneration.svg", plotting.overlay_figure, f.probs, regen.probs,
            title=f"{stem}: regenerated from independent ions")
    run.svg(f"{stem}_ions.svg", plotting.ions_figure, g.probs, h.probs, title=f"{stem}: deconvolved ions")
    print(f"residual ({cfg.fitness_metric.value}) = {_fmt(res.residual)} after {len(res.trace)} generations")
    run.finish()
    return 0


def cmd_classify(args) -> int:
    f = _load_dist(args.inp)
    t = ThresholdConfig(args.t1, args.t2)
    run = Run(args, [args.inp])
    c = classify_counts(f, t)
    stem = _stem(args.inp)
    run.csv(f"{stem}_categories.csv", write_category_report, [(stem, c)])
    print(f"n0 = {_fmt(c.n0)}  n1 = {_fmt(c.n1)}  n2 = {_fmt(c.n2)}  total = {_fmt(c.total)}")
    print(f"q = {_fmt(parity_correlation(c))}  q_flipped = {_fmt(flipped_category_correlation(c))}")
    run.finish()
    return 0


def cmd_interpret(args) -> int:
    f = _load_dist(args.inp)
    t = ThresholdConfig(args.t1, args.t2)
    run = Run(args, [args.inp])
    P = blend_interpretations(f, t, args.blend)
    stem = f"{_stem(args.inp)}_interpret"
    run.csv(f"{stem}.csv", write_matrix_csv, P)
    run.csv(f"{stem}_triplets.csv", write_triplets_csv, P)
    run.svg(f"{stem}.svg", plotting.heatmap_figure, P.p,
            title=f"blend lambda = {_fmt(args.blend)} (1 = rowe, 0 = other)", cuts=(t.t1, t.t2))
    for name, Q in (("blend", P), ("rowe", interpret_rowe(f, t)), ("other", interpret_other(f, t))):
        try:
            print(f"{name:>6s}  r = {_fmt(pearson_correlation(Q))}")
        except DegenerateDistributionError as exc:
            print(f"{name:>6s}  r undefined ({exc})")
    run.finish()
    return 0


def _plot_csv(path: Path, out: Path, timestamp: bool) -> None:
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().strip().lower().split(",")
        fh.seek(0)
        if header[:3] == ["setting", "constructor", "r"]:
            rows = [line.strip().split(",") for line in fh.readlines()[1:] if line.strip()]
            rows = [r for r in rows if ":" not in r[1]]
            plotting.bars_figure([r[1] for r in rows], [float(r[2]) for r in rows], out,
                                 title=path.stem, timestamp=timestamp)
        elif header[:2] == ["generation", "best_fitness"]:
            data = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2)
            plotting.line_figure(data[:, 0], data[:, 1], out, "generation", "best fitness",
                                 title=path.stem, timestamp=timestamp, logy=True)
        elif header[:3] == ["i", "j", "p"]:
            plotting.heatmap_figure(read_triplets_csv(fh), out, title=path.stem, timestamp=timestamp)
        elif header and header[0] == "i\\j":
            plotting.heatmap_figure(read_matrix_csv(fh), out, title=path.stem, timestamp=timestamp)
        elif header[:2] == ["a", "b"]:
            data = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2).astype(int)
            plotting.histogram_figure(np.bincount(data.sum(axis=1)) / len(data), out,
                                      title=path.stem, timestamp=timestamp)
        elif header[:1] == ["label"]:
            raise ValidationError("category reports have nothing to plot")
        elif header[:2] == ["count", "probability"]:
            data = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2)
            probs = np.zeros(int(data[:, 0].max()) + 1)
            probs[data[:, 0].astype(int)] = data[:, 1]
            plotting.histogram_figure(probs, out, title=path.stem, timestamp=timestamp)
        else:
            f = normalize(read_histogram(path))
            plotting.histogram_figure(f.probs, out, title=path.stem, timestamp=timestamp)


def cmd_plot(args) -> int:
    run = Run(args, [args.inp])
    src = Path(args.inp)
    out = run.path(f"{src.stem}.svg")
    try:
        _plot_csv(src, out, not args.no_timestamp)
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"cannot plot {src}: {exc}") from None
    print(out)
    run.finish()
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out-dir", help=f"output directory (default: $CONVBOUND_OUT or ./{DEFAULT_OUT})")
    common.add_argument("--seed", type=int, default=0, help="seed for every stochastic step (default 0)")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp comment from SVG output")

    parser = _Parser(prog="convbound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"convbound {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("synth", parents=[common], help="simulate Poisson-mixture detection data")
    p.add_argument("--mode", choices=["single-pmt", "two-detector"], default="single-pmt")
    p.add_argument("--preset", choices=sorted(PRESETS), default="fig2a")
    p.add_argument("--n", type=int, help="number of experiments")
    p.add_argument("--lambda-dark", type=float, help="mean detected photons from a dark ion")
    p.add_argument("--lambda-bright", type=float, help="mean detected photons from a bright ion")
    p.add_argument("--weights", type=_float_triple, help="class weights p0,p1,p2 (0, 1, 2 bright)")
    p.add_argument("--workers", type=int, default=1, help="threads; output does not depend on it")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bounds", parents=[common], help="correlation range over joint-density constructors")
    p.add_argument("--in", dest="inp", required=True, help="histogram CSV or JSON")
    p.add_argument("--seeds", type=_int_list, default=[0], help="seeds for the random constructor, e.g. 1,2,3")
    p.add_argument("--phi1", type=float, default=3 * math.pi / 8, help="setting label angle 1 (radians)")
    p.add_argument("--phi2", type=float, default=3 * math.pi / 8, help="setting label angle 2 (radians)")
    p.add_argument("--setting", help="free-text setting label")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("deconvolve", parents=[common], help="factor a histogram into two independent ions")
    p.add_argument("--in", dest="inp", required=True, help="histogram CSV or JSON")
    p.add_argument("--metric", choices=["l1", "l2", "kl"], help="fitness metric (default l1)")
    p.add_argument("--config", help="JSON or TOML file with GA settings")
    p.add_argument("--generations", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--workers", type=int, help="threads for fitness evaluation")
    p.set_defaults(func=cmd_deconvolve)

    p = sub.add_parser("classify", parents=[common], help="discriminator-level category counts")
    p.add_argument("--in", dest="inp", required=True, help="histogram CSV or JSON")
    p.add_argument("--t1", type=int, default=25)
    p.add_argument("--t2", type=int, default=86)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("interpret", parents=[common], help="rowe/other joint densities and blends")
    p.add_argument("--in", dest="inp", required=True, help="histogram CSV or JSON")
    p.add_argument("--t1", type=int, default=25)
    p.add_argument("--t2", type=int, default=86)
    p.add_argument("--lambda", dest="blend", type=float, default=1.0,
                   help="blend weight: 1 = rowe, 0 = other (default 1)")
    p.set_defaults(func=cmd_interpret)

    p = sub.add_parser("plot", parents=[common], help="render any convbound CSV as SVG")
    p.add_argument("--in", dest="inp", required=True, help="CSV artifact")
    p.set_defaults(func=cmd_plot)
    return parser


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.argv = argv
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (ConvboundError, ValueError, OSError) as exc:
        print(f"convbound: error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def main() -> None:
    sys.exit(run())
