"""Gaussian mixture model with diagonal covariances: joint density, priors,
simulation, CSV ingestion, and the DIC fit score.

Parameter layout is K mixture weights on the simplex, K mean vectors of
length p, and K diagonal standard-deviation vectors of length p.  Priors:
weights ~ Dirichlet(alpha), means ~ Normal(0, prior_mean_scale^2) per
coordinate, log sds ~ Normal(0, prior_logsd_scale^2) per coordinate.
"""

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import NumericError, ParseError


@dataclass(frozen=True)
class GmmSpec:
    K: int
    p: int
    prior_mean_scale: float = 10.0
    prior_dirichlet_alpha: float = 1.0
    prior_logsd_scale: float = 1.0

    def __post_init__(self):
        if self.K < 1 or self.p < 1:
            raise ValueError("K and p must be >= 1")
        for name in ("prior_mean_scale", "prior_dirichlet_alpha", "prior_logsd_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def n_unconstrained(self) -> int:
        """Free parameter count: K-1 weight logits + K*p means + K*p log sds."""
        return self.K * (2 * self.p + 1) - 1


@dataclass(frozen=True)
class GmmParams:
    """Model parameters in constrained coordinates."""

    weights: np.ndarray  # (K,), simplex
    means: np.ndarray    # (K, p)
    sds: np.ndarray      # (K, p), strictly positive

    def validate(self, spec: GmmSpec) -> None:
        if self.weights.shape != (spec.K,):
            raise ValueError(f"weights shape {self.weights.shape}, expected ({spec.K},)")
        if self.means.shape != (spec.K, spec.p) or self.sds.shape != (spec.K, spec.p):
            raise ValueError("means/sds must have shape (K, p)")
        if abs(float(self.weights.sum()) - 1.0) > 1e-12 or np.any(self.weights < 0):
            raise ValueError("weights must be a simplex vector")
        if np.any(self.sds <= 0):
            raise ValueError("sds must be strictly positive")


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    name: str = "data"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("values must be an N x p matrix with N >= 1")
        if not np.all(np.isfinite(v)):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def log_likelihood(spec: GmmSpec, data: Dataset, params: GmmParams) -> float:
    """Mixture log likelihood of the data, via log-sum-exp over components."""
    if data.p != spec.p:
        raise ValueError(f"data dimension {data.p} does not match spec p={spec.p}")
    params.validate(spec)
    y = data.values  # (N, p)
    with np.errstate(divide="ignore"):
        log_w = np.log(params.weights)  # zero weights allowed: -inf drops out
        # (N, K): sum over p of the componentwise normal log densities
        comp = -0.5 * np.sum(
            np.log(2.0 * np.pi * params.sds**2)[None, :, :]
            + ((y[:, None, :] - params.means[None, :, :]) / params.sds[None, :, :]) ** 2,
            axis=2,
        )
    return float(np.sum(logsumexp(log_w[None, :] + comp, axis=1)))


def log_prior(spec: GmmSpec, params: GmmParams) -> float:
    a = spec.prior_dirichlet_alpha
    with np.errstate(divide="ignore"):
        lp = (a - 1.0) * float(np.sum(np.log(params.weights)))
    lp += math.lgamma(spec.K * a) - spec.K * math.lgamma(a)
    s = spec.prior_mean_scale
    lp += float(-0.5 * np.sum((params.means / s) ** 2)) \
        - spec.K * spec.p * 0.5 * math.log(2.0 * math.pi * s**2)
    ls = np.log(params.sds)
    t = spec.prior_logsd_scale
    # lognormal over sds: Gaussian on log sd plus the 1/sd change of variables
    lp += float(-0.5 * np.sum((ls / t) ** 2) - np.sum(ls)) \
        - spec.K * spec.p * 0.5 * math.log(2.0 * math.pi * t**2)
    return lp


def log_joint(spec: GmmSpec, data: Dataset, params: GmmParams) -> float:
    out = log_likelihood(spec, data, params) + log_prior(spec, params)
    if not math.isfinite(out):
        raise NumericError(f"log joint is non-finite ({out}) for {params}")
    return out


def simulate(spec: GmmSpec, true_params: GmmParams, N: int, seed: int) -> Dataset:
    """Draw N observations: component index from the weights, then the
    component Gaussian."""
    if N < 1:
        raise ValueError("N must be >= 1")
    true_params.validate(spec)
    rng = np.random.default_rng(seed)
    comps = rng.choice(spec.K, size=N, p=true_params.weights)
    values = true_params.means[comps] + rng.standard_normal((N, spec.p)) * true_params.sds[comps]
    return Dataset(values, name=f"sim-K{spec.K}-p{spec.p}-N{N}", meta={"seed": seed})


def load_csv(path, label_column: str | None = None) -> Dataset:
    """Read a rectangular numeric CSV, optional single header row.

    If the first row contains any non-numeric cell it is treated as a header.
    label_column names a header column to drop (class labels in benchmark
    files); it requires a header row.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")

    def numeric(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    header = None
    if not all(numeric(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: header but no data rows")

    drop = None
    if label_column is not None:
        if header is None or label_column not in header:
            raise ParseError(f"{path}: label column {label_column!r} not found in header")
        drop = header.index(label_column)

    width = len(rows[0]) if header is None else len(header)
    values = []
    for i, row in enumerate(rows):
        rownum = i + 1 + (1 if header is not None else 0)
        if len(row) != width:
            raise ParseError(f"{path}: row {rownum} has {len(row)} cells, expected {width}")
        out = []
        for j, cell in enumerate(row):
            if j == drop:
                continue
            try:
                out.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell at row {rownum}, column {j + 1}: {cell!r}"
                ) from None
        values.append(out)
    return Dataset(np.asarray(values), name=os.path.splitext(os.path.basename(path))[0])


def dic(spec: GmmSpec, data: Dataset, posterior_draws: list[GmmParams]) -> float:
    """Deviance information criterion: mean deviance plus effective parameter
    count, with D(theta) = -2 * log likelihood (no prior) and the plug-in
    point the draw-wise mean parameter (weights re-normalized)."""
    if len(posterior_draws) < 2:
        raise ValueError(f"DIC needs at least 2 posterior draws, got {len(posterior_draws)}")
    devs = np.array([-2.0 * log_likelihood(spec, data, th) for th in posterior_draws])
    w_bar = np.mean([th.weights for th in posterior_draws], axis=0)
    theta_bar = GmmParams(
        weights=w_bar / w_bar.sum(),
        means=np.mean([th.means for th in posterior_draws], axis=0),
        sds=np.mean([th.sds for th in posterior_draws], axis=0),
    )
    d_bar = float(devs.mean())
    p_d = d_bar - (-2.0 * log_likelihood(spec, data, theta_bar))
    return d_bar + p_d
