"""JSON configuration for mixtures and experiments.

Mixture config::

    {"schema": 1, "p": 512, "K": 2,
     "means": ["canonical_spike(1, 3)", "canonical_spike(2, 3)"],
     "covariances": ["scaled_identity(1, 0)", "scaled_identity(1, 2)"],
     "proportions": [0.5, 0.5], "seed": 0}

Means may also be dense length-``p`` lists or ``"zeros"``; covariances may be
dense ``p x p`` lists.  Unknown keys are rejected.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .gmm import MixtureModel, canonical_spike, scaled_identity

__all__ = [
    "ConfigError",
    "SCHEMA_VERSION",
    "EXPERIMENT_IDS",
    "ExperimentConfig",
    "parse_mixture",
    "load_mixture",
    "load_experiment",
    "default_experiment",
    "config_hash",
]

SCHEMA_VERSION = 1
EXPERIMENT_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "table3", "table4", "table5", "custom")

_MIXTURE_KEYS = {"schema", "p", "K", "means", "covariances", "proportions", "seed"}
_CALL = re.compile(r"^\s*([a-z_]+)\s*\(([^)]*)\)\s*$")


class ConfigError(ValueError):
    pass


def _call(text: str):
    m = _CALL.match(text)
    if not m:
        raise ConfigError(f"cannot parse generator {text!r}")
    args = [a.strip() for a in m.group(2).split(",") if a.strip()]
    try:
        return m.group(1), [float(a) for a in args]
    except ValueError:
        raise ConfigError(f"non-numeric argument in {text!r}") from None


def _mean(spec, p: int) -> np.ndarray:
    if isinstance(spec, str):
        if spec.strip() == "zeros":
            return np.zeros(p)
        name, args = _call(spec)
        if name == "canonical_spike" and len(args) == 2:
            index = int(args[0])
            if not 1 <= index <= p:
                raise ConfigError(f"spike index {index} outside 1..{p}")
            return canonical_spike(p, index, args[1])
        raise ConfigError(f"unknown mean generator {spec!r}")
    v = np.asarray(spec, dtype=float)
    if v.shape != (p,):
        raise ConfigError(f"dense mean must have length {p}, got shape {v.shape}")
    return v


def _covariance(spec, p: int) -> np.ndarray:
    if isinstance(spec, str):
        name, args = _call(spec)
        if name == "scaled_identity" and len(args) == 2:
            return scaled_identity(p, args[0], args[1])
        raise ConfigError(f"unknown covariance generator {spec!r}")
    C = np.asarray(spec, dtype=float)
    if C.shape != (p, p):
        raise ConfigError(f"dense covariance must be {p} x {p}, got {C.shape}")
    return C


def parse_mixture(cfg: dict) -> tuple[MixtureModel, int]:
    """Build a model from a mixture config dict; returns ``(model, seed)``."""
    unknown = set(cfg) - _MIXTURE_KEYS
    if unknown:
        raise ConfigError(f"unknown mixture keys: {sorted(unknown)}")
    if cfg.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema {cfg.get('schema')}")
    try:
        p, K = int(cfg["p"]), int(cfg["K"])
    except KeyError as exc:
        raise ConfigError(f"missing mixture key {exc}") from None
    if p < 1 or K < 1:
        raise ConfigError("p and K must be positive")
    means = cfg.get("means", ["zeros"] * K)
    covs = cfg.get("covariances", ["scaled_identity(1, 0)"] * K)
    props = cfg.get("proportions", [1.0 / K] * K)
    if len(means) != K or len(covs) != K or len(props) != K:
        raise ConfigError(f"means, covariances and proportions need {K} entries each")
    M = np.stack([_mean(m, p) for m in means], axis=1)
    C = np.stack([_covariance(c, p) for c in covs])
    try:
        model = MixtureModel(M, C, np.asarray(props, dtype=float))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return model, int(cfg.get("seed", 0))


def load_mixture(path) -> tuple[MixtureModel, int]:
    with open(path) as fh:
        return parse_mixture(json.load(fh))


@dataclass
class ExperimentConfig:
    experiment: str
    data: Any = None                 # mixture dict, {"dataset": "mnist"|"eeg", ...} or None
    activations: list = field(default_factory=lambda: ["relu"])
    p: int = 512
    T: list = field(default_factory=lambda: [256])
    n: Optional[int] = 32
    runs: int = 50
    realizations: int = 0            # 0: closed-form expected kernel
    seed: int = 0
    tau_source: str = "model"        # "model" or "estimate"
    bins: int = 50
    output_dir: str = "out"
    schema: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; valid ids: {', '.join(EXPERIMENT_IDS)}")
        if self.schema != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema {self.schema}")
        if isinstance(self.T, int):
            self.T = [self.T]
        for name in ("p", "runs", "bins"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be positive")
        if any(int(t) < 1 for t in self.T):
            raise ConfigError("T values must be positive")
        if self.n is not None and int(self.n) < 1:
            raise ConfigError("n must be positive")
        if self.realizations < 0 or self.seed < 0:
            raise ConfigError("realizations and seed must be non-negative")
        if self.tau_source not in ("model", "estimate"):
            raise ConfigError("tau_source must be 'model' or 'estimate'")
        if isinstance(self.data, dict) and "dataset" in self.data:
            for key in ("images", "labels", "dir_b", "dir_e"):
                if key in self.data and not Path(self.data[key]).exists():
                    raise ConfigError(f"{key} path does not exist: {self.data[key]}")


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(asdict(cfg), sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


_DEFAULTS = {
    "fig1": dict(activations=["relu"], p=512, T=[256], n=512),
    "fig2": dict(activations=["relu"], p=512, T=[256], n=512),
    "fig3": dict(activations=["erf", "relu"], p=512, T=[256]),
    "fig4": dict(activations=["abs", "relu"], p=512, T=[256]),
    "fig5": dict(activations=["lrelu:1:-1", "lrelu:1:1"], p=512, T=[256]),
    "fig6": dict(activations=["lrelu:1:0"], p=512, T=[256]),
    "table3": dict(activations=[]),
    "table4": dict(activations=["linear", "indicator", "sign", "sin", "erf", "abs", "cos", "gauss-exp",
                                "relu"], T=[32, 64, 128], n=32, runs=50, data={"dataset": "mnist"}),
    "table5": dict(activations=["linear", "indicator", "sign", "sin", "erf", "abs", "cos", "gauss-exp",
                                "relu"], T=[32, 64, 128], n=32, runs=50, data={"dataset": "eeg"}),
    "custom": dict(),
}


def default_experiment(experiment: str, **overrides) -> ExperimentConfig:
    if experiment not in EXPERIMENT_IDS:
        raise ConfigError(f"unknown experiment {experiment!r}; valid ids: {', '.join(EXPERIMENT_IDS)}")
    kwargs = dict(_DEFAULTS[experiment])
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(experiment=experiment, **kwargs)


def load_experiment(path) -> ExperimentConfig:
    with open(path) as fh:
        raw = json.load(fh)
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
    if "experiment" not in raw:
        raise ConfigError("experiment id missing")
    return default_experiment(raw.pop("experiment"), **raw)
