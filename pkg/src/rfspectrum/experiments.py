"""Experiment drivers behind ``rfspectrum experiment``.

Each driver writes CSV tables and SVG figures into the configured output
directory.  Every file starts with a comment naming the experiment, seed and
config hash.  If a driver fails, files it already wrote are removed.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import stats as sps

from . import gmm
from .cluster import clustering_experiment, kmeans, accuracy, spectral_embed
from .config import ConfigError, ExperimentConfig, config_hash, parse_mixture
from .csvio import write_csv
from .datasets import DataFormatError, RawDataset, data_dir, read_eeg, read_idx
from .equivalent import build_equivalent, coefficients
from .kernels import center, monte_carlo_gram, parse_activation, phi_matrix
from .spectrum import eig_sym, esd_histogram, eigenvector_alignment, limiting_density, operator_norm_diff
from .svg import Figure

__all__ = ["run_experiment", "resolve_dataset", "kernel_pair", "two_sample_t", "FIGURE_MODELS"]

log = logging.getLogger(__name__)

# (mean value, covariance spread) of the synthetic two-class family per figure.
FIGURE_MODELS = {"fig1": (3.0, 2.0), "fig2": (3.0, 2.0), "fig3": (0.0, 15.0), "fig4": (5.0, 0.0)}


class _Outputs:
    def __init__(self, cfg: ExperimentConfig):
        self.dir = Path(cfg.output_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.header = [f"rfspectrum experiment={cfg.experiment} seed={cfg.seed} config={config_hash(cfg)}"]
        self.paths: list[Path] = []

    def csv(self, name, columns, rows):
        self.paths.append(write_csv(self.dir / name, columns, rows, self.header))
        return self.paths[-1]

    def svg(self, name, fig: Figure):
        self.paths.append(fig.save(self.dir / name, self.header))
        return self.paths[-1]

    def discard(self):
        for path in self.paths:
            path.unlink(missing_ok=True)


def _model_for(cfg: ExperimentConfig):
    if isinstance(cfg.data, dict) and "dataset" not in cfg.data:
        model, _ = parse_mixture(cfg.data)
        return model
    if cfg.experiment in FIGURE_MODELS:
        mean_value, spread = FIGURE_MODELS[cfg.experiment]
        return gmm.two_class_model(cfg.p, mean_value, spread)
    if cfg.experiment in ("fig5", "fig6"):
        return gmm.four_class_model(cfg.p)
    raise ConfigError(f"{cfg.experiment} needs a mixture in 'data'")


def resolve_dataset(spec: dict) -> RawDataset:
    """Load ``{"dataset": "mnist" | "eeg", ...}``, defaulting paths to
    ``$RFSPECTRUM_DATA_DIR/mnist`` and ``$RFSPECTRUM_DATA_DIR/eeg``."""
    name = spec.get("dataset")
    root = data_dir()

    def first_existing(folder, *names):
        for n in names:
            for cand in (folder / n, folder / f"{n}.gz"):
                if cand.exists():
                    return cand
        return None

    if name == "mnist":
        folder = Path(spec.get("dir", root / "mnist" if root else "."))
        images = spec.get("images") or first_existing(folder, "train-images-idx3-ubyte", "train-images.idx3-ubyte")
        labels = spec.get("labels") or first_existing(folder, "train-labels-idx1-ubyte", "train-labels.idx1-ubyte")
        if images is None or labels is None:
            raise DataFormatError(f"MNIST IDX files not found under {folder} (set RFSPECTRUM_DATA_DIR)")
        extra = []
        t_img = spec.get("test_images") or first_existing(folder, "t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte")
        t_lab = spec.get("test_labels") or first_existing(folder, "t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte")
        if t_img is not None and t_lab is not None:
            extra.append((t_img, t_lab))
        return read_idx(images, labels, spec.get("keep", [6, 8]), extra=extra)
    if name == "eeg":
        folder = Path(spec.get("dir", root / "eeg" if root else "."))
        dir_b = spec.get("dir_b") or next((folder / d for d in ("B", "O") if (folder / d).is_dir()), None)
        dir_e = spec.get("dir_e") or next((folder / d for d in ("E", "S") if (folder / d).is_dir()), None)
        if dir_b is None or dir_e is None:
            raise DataFormatError(f"EEG set B/E directories not found under {folder} (set RFSPECTRUM_DATA_DIR)")
        return read_eeg(dir_b, dir_e)
    raise ConfigError(f"unknown dataset {name!r}; expected 'mnist' or 'eeg'")


def two_sample_t(values, labels) -> float:
    """Welch t-statistic between the entries of classes 1 and 2."""
    values = np.asarray(values)
    labels = np.asarray(labels)
    return float(sps.ttest_ind(values[labels == 1], values[labels == 2], equal_var=False).statistic)


def kernel_pair(kind, model, T, seed, n=None, realizations=0, tau_source="model"):
    """Sample data and return ``(data, Phi_c, Phi_tilde_c)`` as arrays."""
    data = gmm.sample_mixture(model, T, seed)
    stats = gmm.class_statistics(model, data.class_sizes)
    tau = stats.tau if tau_source == "model" else gmm.estimate_tau(data.X)
    if realizations:
        Phi = monte_carlo_gram(kind, data.X, n or model.p, realizations, seed).mean
    else:
        Phi = phi_matrix(kind, data.X)
    Phi_c = center(Phi).values
    Phi_tc = center(build_equivalent(data, stats, coefficients(kind, tau))).values
    return data, Phi_c, Phi_tc


def _spectral_figure(cfg: ExperimentConfig, out: _Outputs):
    model = _model_for(cfg)
    T = cfg.T[0]
    kind = parse_activation(cfg.activations[0])
    data, F, Ft = kernel_pair(kind, model, T, cfg.seed, cfg.n, cfg.realizations, cfg.tau_source)
    sp, spt = eig_sym(F), eig_sym(Ft)
    hi = 1.05 * max(sp.eigenvalues[-1], spt.eigenvalues[-1])
    lo = min(0.0, sp.eigenvalues[0], spt.eigenvalues[0])
    edges, h = esd_histogram(sp.eigenvalues, cfg.bins, (lo, hi))
    _, ht = esd_histogram(spt.eigenvalues, cfg.bins, (lo, hi))
    out.csv("eigenvalues.csv", ["index", "phi_c", "phi_tilde_c"],
            [(i, a, b) for i, (a, b) in enumerate(zip(sp.eigenvalues, spt.eigenvalues))])
    out.csv("histogram_phi_c.csv", ["bin_left", "bin_right", "density"], zip(edges[:-1], edges[1:], h))
    out.csv("histogram_phi_tilde_c.csv", ["bin_left", "bin_right", "density"], zip(edges[:-1], edges[1:], ht))
    u, ut = sp.leading(1)[:, 0], spt.leading(1)[:, 0]
    if u @ ut < 0:
        ut = -ut
    summary = [
        ("operator_norm_diff", operator_norm_diff(F, Ft)),
        ("top_eigenvalue_phi_c", sp.eigenvalues[-1]),
        ("top_eigenvalue_phi_tilde_c", spt.eigenvalues[-1]),
        ("leading_alignment", eigenvector_alignment(u, ut)),
    ]
    if cfg.experiment == "fig1":
        n = cfg.n or T
        x = np.linspace(lo - 0.05 * hi, 1.1 * hi, 600)
        rho = limiting_density(sp, n, x)
        out.csv("density.csv", ["x", "rho"], zip(x, rho))
        fig = Figure(f"Eigenvalues of Phi_c and Phi_tilde_c ({kind}, p={model.p}, T={T})")
        fig.bars(edges, h, "Phi_c").bars(edges, ht, "Phi_tilde_c")
        out.svg("fig1.svg", fig)
        fig = Figure(f"Limiting density of G_c (n={n}) vs ESD of Phi_c")
        fig.bars(edges, h, "ESD of Phi_c").line(x, rho, "limiting density of G_c")
        out.svg("fig1_density.svg", fig)
    else:
        out.csv("eigenvectors.csv", ["index", "class", "u", "u_tilde"],
                [(i, int(c), a, b) for i, (c, a, b) in enumerate(zip(data.labels, u, ut))])
        fig = Figure(f"Leading eigenvector ({kind})")
        idx = np.arange(T)
        fig.line(idx, u, "Phi_c").line(idx, ut, "Phi_tilde_c", dashed=True)
        out.svg("fig2.svg", fig)
    out.csv("summary.csv", ["quantity", "value"], summary)


def _taxonomy_figure(cfg: ExperimentConfig, out: _Outputs):
    model = _model_for(cfg)
    T = cfg.T[0]
    summary = []
    for text in cfg.activations:
        kind = parse_activation(text)
        data, F, Ft = kernel_pair(kind, model, T, cfg.seed, cfg.n, cfg.realizations, cfg.tau_source)
        u = eig_sym(F).leading(1)[:, 0]
        ut = eig_sym(Ft).leading(1)[:, 0]
        if u @ ut < 0:
            ut = -ut
        tag = str(kind).replace(":", "_")
        out.csv(f"eigenvectors_{tag}.csv", ["index", "class", "u", "u_tilde"],
                [(i, int(c), a, b) for i, (c, a, b) in enumerate(zip(data.labels, u, ut))])
        fig = Figure(f"Leading eigenvector, {kind}")
        idx = np.arange(T)
        fig.line(idx, u, "Phi_c").line(idx, ut, "Phi_tilde_c", dashed=True)
        out.svg(f"{cfg.experiment}_{tag}.svg", fig)
        summary.append((str(kind), two_sample_t(u, data.labels), two_sample_t(ut, data.labels),
                        eigenvector_alignment(u, ut)))
    out.csv("summary.csv", ["activation", "t_statistic", "t_statistic_tilde", "alignment"], summary)


def _four_class_figure(cfg: ExperimentConfig, out: _Outputs):
    model = _model_for(cfg)
    T = cfg.T[0]
    data = gmm.sample_mixture(model, T, cfg.seed)
    summary = []
    for text in cfg.activations:
        kind = parse_activation(text)
        if cfg.realizations:
            Phi = monte_carlo_gram(kind, data.X, cfg.n or model.p, cfg.realizations, cfg.seed).mean
        else:
            Phi = phi_matrix(kind, data.X)
        emb = spectral_embed(center(Phi), 2)
        pred = kmeans(emb, model.K, seed=cfg.seed)
        acc = accuracy(pred, data.labels, model.K)
        tag = str(kind).replace(":", "_")
        out.csv(f"embedding_{tag}.csv", ["index", "class", "v1", "v2", "predicted"],
                [(i, int(c), a, b, int(q)) for i, (c, (a, b), q) in enumerate(zip(data.labels, emb, pred))])
        fig = Figure(f"Leading two eigenvectors, {kind}")
        for a in range(1, model.K + 1):
            mask = data.labels == a
            fig.scatter(emb[mask, 0], emb[mask, 1], f"class {a}")
        out.svg(f"{cfg.experiment}_{tag}.svg", fig)
        summary.append((str(kind), acc))
    out.csv("summary.csv", ["activation", "kmeans_accuracy"], summary)


def _table3(cfg: ExperimentConfig, out: _Outputs):
    specs = cfg.data if isinstance(cfg.data, list) else [{"dataset": "mnist"}, {"dataset": "eeg"}]
    rows = []
    for spec in specs:
        raw = resolve_dataset(spec)
        model = gmm.fit_empirical_model(raw.vectors, raw.labels)
        counts = np.bincount(raw.labels)[1:]
        stats = gmm.class_statistics(model, counts)
        rows.append((spec["dataset"], *gmm.statistic_norms(stats)))
    out.csv("table3.csv", ["dataset", "norm_MtM", "norm_ttT_plus_2S"], rows)


def _accuracy_table(cfg: ExperimentConfig, out: _Outputs):
    if isinstance(cfg.data, dict) and "dataset" in cfg.data:
        source = resolve_dataset(cfg.data)
    else:
        source = _model_for(cfg)
    kinds = [parse_activation(a) for a in cfg.activations]
    rows = clustering_experiment(source, kinds, cfg.T, n=cfg.n, runs=cfg.runs, seed=cfg.seed)
    out.csv(f"{cfg.experiment}.csv", ["activation", "taxonomy", "T", "mean_accuracy", "std_accuracy"],
            [(r.activation, r.taxonomy, r.T, r.mean_accuracy, r.std_accuracy) for r in rows])


_DRIVERS: dict[str, Callable] = {
    "fig1": _spectral_figure,
    "fig2": _spectral_figure,
    "fig3": _taxonomy_figure,
    "fig4": _taxonomy_figure,
    "fig5": _four_class_figure,
    "fig6": _four_class_figure,
    "table3": _table3,
    "table4": _accuracy_table,
    "table5": _accuracy_table,
    "custom": _accuracy_table,
}


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    out = _Outputs(cfg)
    try:
        _DRIVERS[cfg.experiment](cfg, out)
    except Exception:
        out.discard()
        log.error("experiment %s failed; removed %d partial outputs", cfg.experiment, len(out.paths))
        raise
    return out.paths
