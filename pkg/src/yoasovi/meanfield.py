"""Mean-field Gaussian variational family over unconstrained parameters.

q(z | lambda) is a product of independent Gaussians with parameters
lambda = (m, log_s).  Model parameters with constraints (simplex weights,
positive sds) are reached through a deterministic transform with a tracked
log Jacobian determinant, so the ELBO integrand is

    log p(y, constrain(z)) + log|J(z)| - log q(z | lambda).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri, softmax

from .gmm import GmmParams, GmmSpec


@dataclass(frozen=True)
class VariationalParams:
    m: np.ndarray
    log_s: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        log_s = np.asarray(self.log_s, dtype=float)
        if m.shape != log_s.shape or m.ndim != 1:
            raise ValueError("m and log_s must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(log_s))):
            raise ValueError("variational parameters must be finite")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "log_s", log_s)

    @property
    def dim(self) -> int:
        return self.m.shape[0]


@dataclass(frozen=True)
class ParamDraw:
    z: np.ndarray
    theta: object
    log_det_jacobian: float


def _split(z: np.ndarray, spec: GmmSpec):
    K, p = spec.K, spec.p
    logits = z[: K - 1]
    means = z[K - 1 : K - 1 + K * p].reshape(K, p)
    log_sds = z[K - 1 + K * p :].reshape(K, p)
    return logits, means, log_sds


def constrain(z: np.ndarray, spec: GmmSpec) -> tuple[GmmParams, float]:
    """Unconstrained vector to GmmParams plus the log |Jacobian| of the map.

    Weights come from a softmax over the K-1 free logits with the last
    category pinned at logit 0; sds from exp.  The weight-block Jacobian
    determinant is the product of all K weights, the sd block contributes
    each log sd.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (spec.n_unconstrained,):
        raise ValueError(f"expected z of length {spec.n_unconstrained}, got {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite unconstrained vector")
    logits, means, log_sds = _split(z, spec)
    weights = softmax(np.append(logits, 0.0))
    ldj = float(np.sum(np.log(weights)) + np.sum(log_sds))
    return GmmParams(weights=weights, means=means.copy(), sds=np.exp(log_sds)), ldj


def unconstrain(params: GmmParams, spec: GmmSpec) -> np.ndarray:
    params.validate(spec)
    logits = np.log(params.weights[:-1]) - np.log(params.weights[-1])
    return np.concatenate([logits, params.means.ravel(), np.log(params.sds).ravel()])


def sample(lam: VariationalParams, u: np.ndarray, spec: GmmSpec | None = None) -> ParamDraw:
    """One draw from q: z = m + exp(log_s) * ndtri(u).

    With a GmmSpec the draw carries the constrained parameters and Jacobian
    term; without one the transform is the identity (theta is z itself and
    the Jacobian term vanishes), which is what conjugate test models use.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (lam.dim,):
        raise ValueError(f"expected a point of dimension {lam.dim}, got {u.shape}")
    with np.errstate(over="ignore"):
        z = lam.m + np.exp(lam.log_s) * ndtri(u)
    if spec is None:
        return ParamDraw(z=z, theta=z, log_det_jacobian=0.0)
    theta, ldj = constrain(z, spec)
    return ParamDraw(z=z, theta=theta, log_det_jacobian=ldj)


def log_q(lam: VariationalParams, z: np.ndarray) -> float:
    z = np.asarray(z, dtype=float)
    return float(
        np.sum(
            -0.5 * np.log(2.0 * np.pi)
            - lam.log_s
            - (z - lam.m) ** 2 / (2.0 * np.exp(2.0 * lam.log_s))
        )
    )


def score(lam: VariationalParams, z: np.ndarray) -> np.ndarray:
    """Gradient of log_q with respect to (m, log_s), concatenated: length 2D."""
    z = np.asarray(z, dtype=float)
    inv_var = np.exp(-2.0 * lam.log_s)
    d_m = (z - lam.m) * inv_var
    d_log_s = (z - lam.m) ** 2 * inv_var - 1.0
    return np.concatenate([d_m, d_log_s])


def initial_params(spec: GmmSpec, data, rng: np.random.Generator,
                   kmeans_style: bool = False) -> VariationalParams:
    """Starting lambda for a GMM run.

    Weight logits and log-sd coordinates start near zero; the variational
    means of the model means start at randomly chosen data points.  With
    kmeans_style the points are picked by squared-distance weighting
    (k-means++ seeding), which guards against all K starting points landing
    in one cluster.  log_s starts at -1 everywhere.
    """
    K, p = spec.K, spec.p
    m = np.empty(spec.n_unconstrained)
    m[: K - 1] = rng.normal(0.0, 0.1, K - 1)
    y = data.values
    if kmeans_style:
        idx = [int(rng.integers(y.shape[0]))]
        for _ in range(K - 1):
            d2 = np.min(((y[:, None, :] - y[np.array(idx)][None]) ** 2).sum(axis=2), axis=1)
            idx.append(int(rng.choice(y.shape[0], p=d2 / d2.sum())))
        idx = np.array(idx)
    else:
        idx = rng.choice(y.shape[0], size=K, replace=False)
    m[K - 1 : K - 1 + K * p] = y[idx].ravel()
    m[K - 1 + K * p :] = rng.normal(0.0, 0.1, K * p)
    return VariationalParams(m=m, log_s=np.full(spec.n_unconstrained, -1.0))
