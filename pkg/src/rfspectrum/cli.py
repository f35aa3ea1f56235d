"""Command-line entry point: ``rfspectrum <gen|kernel|equiv|spectrum|cluster|experiment>``.

Exit codes: 0 success, 1 usage, 2 data or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import gmm
from .cluster import clustering_experiment
from .config import ConfigError, default_experiment, load_experiment, load_mixture
from .csvio import write_csv, write_matrix
from .datasets import DataFormatError
from .equivalent import build_equivalent, classify, coefficients
from .experiments import FIGURE_MODELS, resolve_dataset, run_experiment
from .kernels import center, monte_carlo_gram, parse_activation, phi_matrix
from .spectrum import ConvergenceError, eig_sym, esd_histogram, limiting_density
from .svg import Figure

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3

log = logging.getLogger("rfspectrum")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _model(args):
    """Mixture from ``--mixture`` (JSON path) or a built-in figure generator."""
    if args.mixture:
        model, _ = load_mixture(args.mixture)
        return model
    if args.figure in FIGURE_MODELS:
        return gmm.two_class_model(args.p, *FIGURE_MODELS[args.figure])
    if args.figure in ("fig5", "fig6"):
        return gmm.four_class_model(args.p)
    raise UsageError("give --mixture PATH or --figure fig1..fig6")


def _add_model_flags(sp):
    sp.add_argument("--mixture", help="mixture config JSON")
    sp.add_argument("--figure", default="fig1", help="built-in generator (fig1..fig6) when --mixture is absent")
    sp.add_argument("--p", type=int, default=512)
    sp.add_argument("--T", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)


def _comment(args, extra=""):
    return [f"rfspectrum {args.command} seed={args.seed}{extra}"]


def cmd_gen(args):
    data = gmm.sample_mixture(_model(args), args.T, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "X.csv", data.X, _comment(args))
    write_csv(out / "labels.csv", ["index", "label"], enumerate(data.labels), _comment(args))
    print(f"wrote {data.p} x {data.T} data to {out}")


def _kernel_pair(args):
    model = _model(args)
    kind = parse_activation(args.activation)
    data = gmm.sample_mixture(model, args.T, args.seed)
    stats = gmm.class_statistics(model, data.class_sizes)
    tau = stats.tau if args.tau_source == "model" else gmm.estimate_tau(data.X)
    if args.realizations:
        Phi = monte_carlo_gram(kind, data.X, args.n, args.realizations, args.seed).mean
    else:
        Phi = phi_matrix(kind, data.X).values
    return kind, data, stats, tau, Phi


def _add_kernel_flags(sp):
    _add_model_flags(sp)
    sp.add_argument("--activation", default="relu")
    sp.add_argument("--n", type=int, default=512, help="features per realization")
    sp.add_argument("--realizations", type=int, default=0, help="0 uses the closed form")
    sp.add_argument("--tau-source", choices=("model", "estimate"), default="model")


def cmd_kernel(args):
    kind, data, stats, tau, Phi = _kernel_pair(args)
    M = build_equivalent(data, stats, coefficients(kind, tau)).values if args.equivalent else Phi
    if args.centered:
        M = center(M).values
    write_matrix(args.out, M, _comment(args, f" activation={kind}"))
    print(f"wrote {M.shape[0]} x {M.shape[1]} kernel to {args.out}")


def cmd_equiv(args):
    rows = []
    for text in args.activations:
        c = coefficients(parse_activation(text), args.tau)
        rows.append((str(parse_activation(text)), c.d0, c.d1, c.d2, str(classify(c))))
    columns = ["activation", "d0", "d1", "d2", "taxonomy"]
    if args.out:
        write_csv(args.out, columns, rows, [f"rfspectrum equiv tau={args.tau!r}"])
    else:
        write_csv(sys.stdout, columns, rows)


def cmd_spectrum(args):
    kind, data, stats, tau, Phi = _kernel_pair(args)
    Fc = center(build_equivalent(data, stats, coefficients(kind, tau)) if args.equivalent else Phi).values
    sp = eig_sym(Fc)
    lam = sp.eigenvalues
    hi = 1.05 * max(lam[-1], 1e-12)
    lo = min(0.0, lam[0])
    edges, heights = esd_histogram(lam, args.bins, (lo, hi))
    x = np.linspace(lo - 0.05 * hi, 1.1 * hi, args.grid)
    rho = limiting_density(sp, args.n, x)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    head = _comment(args, f" activation={kind}")
    write_csv(out / "eigenvalues.csv", ["index", "eigenvalue"], enumerate(lam), head)
    write_csv(out / "histogram.csv", ["bin_left", "bin_right", "density"], zip(edges[:-1], edges[1:], heights), head)
    write_csv(out / "density.csv", ["x", "rho"], zip(x, rho), head)
    fig = Figure(f"ESD of Phi_c and limiting density of G_c ({kind}, n={args.n})")
    fig.bars(edges, heights, "ESD of Phi_c").line(x, rho, "limiting density")
    fig.save(out / "overlay.svg", head)
    print(f"wrote spectrum outputs to {out}")


def cmd_cluster(args):
    source = args.data
    if Path(source).is_file():
        source, _ = load_mixture(source)
    elif source in ("mnist", "eeg"):
        source = resolve_dataset({"dataset": source})
    else:
        raise UsageError(f"--data must be a mixture config path, 'mnist' or 'eeg'; got {source!r}")
    kinds = [parse_activation(a) for a in args.activations]
    rows = clustering_experiment(source, kinds, args.T, n=args.n, runs=args.runs, seed=args.seed)
    write_csv(args.out, ["activation", "taxonomy", "T", "mean_accuracy", "std_accuracy"],
              [(r.activation, r.taxonomy, r.T, r.mean_accuracy, r.std_accuracy) for r in rows],
              [f"rfspectrum cluster data={args.data} seed={args.seed} n={args.n} runs={args.runs}"])
    for r in rows:
        print(f"{r.activation:>14s}  T={r.T:<4d} {r.mean_accuracy:.4f} +- {r.std_accuracy:.4f}")


def cmd_experiment(args):
    overrides = dict(output_dir=args.out, seed=args.seed, runs=args.runs, realizations=args.realizations)
    if args.config:
        cfg = load_experiment(args.config)
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, value)
        cfg.__post_init__()
    elif args.id:
        cfg = default_experiment(args.id, **overrides)
    else:
        raise UsageError("give an experiment id or --config PATH")
    for path in run_experiment(cfg):
        print(path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rfspectrum", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("gen", help="sample a Gaussian mixture")
    _add_model_flags(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("kernel", help="expected (or Monte-Carlo) kernel matrix")
    _add_kernel_flags(sp)
    sp.add_argument("--equivalent", action="store_true", help="emit the asymptotic equivalent instead")
    sp.add_argument("--centered", action="store_true")
    sp.add_argument("--out", required=True, help="output CSV")
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("equiv", help="equivalent-kernel coefficients and taxonomy")
    sp.add_argument("--activations", type=_str_list, required=True)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--out", help="output CSV (default stdout)")
    sp.set_defaults(func=cmd_equiv)

    sp = sub.add_parser("spectrum", help="eigenvalues, histogram and limiting density")
    _add_kernel_flags(sp)
    sp.add_argument("--equivalent", action="store_true", help="use the asymptotic equivalent")
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--grid", type=int, default=600, help="density grid points")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("cluster", help="random-feature spectral clustering accuracy")
    sp.add_argument("--data", required=True, help="mixture config path or dataset id (mnist, eeg)")
    sp.add_argument("--activations", type=_str_list, required=True)
    sp.add_argument("--T", type=_int_list, default=[32, 64, 128])
    sp.add_argument("--n", type=int, default=32)
    sp.add_argument("--runs", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output CSV")
    sp.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("experiment", help="reproduce a figure or table")
    sp.add_argument("id", nargs="?", help="experiment id")
    sp.add_argument("--config", help="experiment config JSON")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--runs", type=int)
    sp.add_argument("--realizations", type=int)
    sp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"rfspectrum: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"rfspectrum: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DataFormatError, OSError, ValueError) as exc:
        print(f"rfspectrum: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
