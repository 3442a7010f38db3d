"""Closed-form checks for the estimators, built on the one model where
everything is available analytically: a Gaussian mean with a Gaussian prior.

    theta ~ N(0, tau^2)
    y_i   ~ N(theta, sigma^2), i = 1..N   (iid)

The posterior is Gaussian, the marginal likelihood has a closed form, and
the ELBO of a Gaussian q(theta) = N(m, s^2) is an explicit function of
(m, s) with an explicit gradient.  Monte Carlo estimates can therefore be
tested against exact numbers instead of against themselves.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


def finite_diff(f: Callable[[np.ndarray], float], x: np.ndarray,
                step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    if step <= 0:
        raise ValueError("step must be positive")
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


@dataclass(frozen=True)
class ConjugateOracle:
    """Sufficient statistics and variances of the conjugate instance.

    Only (n, sum_y) are needed for the posterior; the ELBO and the joint
    density additionally need sum_y_sq, so all three summaries are kept.
    """

    prior_var: float
    lik_var: float
    n: int
    sum_y: float
    sum_y_sq: float

    def __post_init__(self):
        if self.prior_var <= 0 or self.lik_var <= 0:
            raise ValueError("variances must be positive")
        if self.n < 1:
            raise ValueError("need at least one observation")

    @classmethod
    def from_data(cls, y, prior_var: float, lik_var: float) -> "ConjugateOracle":
        y = np.asarray(y, dtype=float)
        return cls(prior_var=prior_var, lik_var=lik_var, n=y.size,
                   sum_y=float(np.sum(y)), sum_y_sq=float(np.sum(y * y)))

    def posterior(self) -> tuple[float, float]:
        """Exact posterior mean and variance."""
        prec = 1.0 / self.prior_var + self.n / self.lik_var
        return (self.sum_y / self.lik_var) / prec, 1.0 / prec

    def log_marginal(self) -> float:
        """log p(y) marginalised over theta.

        y is jointly Gaussian with covariance sigma^2 I + tau^2 J; the
        determinant and quadratic form reduce via the rank-one update.
        """
        s2, t2, n = self.lik_var, self.prior_var, self.n
        c = 1.0 + n * t2 / s2
        logdet = n * math.log(s2) + math.log(c)
        quad = self.sum_y_sq / s2 - (t2 / (s2 * s2)) * self.sum_y ** 2 / c
        return -0.5 * (n * math.log(2.0 * math.pi) + logdet + quad)

    def log_joint(self, theta) -> float:
        """log p(y, theta) for a scalar theta (arrays of size one accepted)."""
        th = float(np.asarray(theta).reshape(()))
        s2, t2, n = self.lik_var, self.prior_var, self.n
        ll = -0.5 * n * math.log(2.0 * math.pi * s2) \
            - (self.sum_y_sq - 2.0 * th * self.sum_y + n * th * th) / (2.0 * s2)
        lp = -0.5 * math.log(2.0 * math.pi * t2) - th * th / (2.0 * t2)
        return ll + lp


def closed_form_elbo(oracle: ConjugateOracle, m: float, s: float) -> tuple[float, np.ndarray]:
    """Exact ELBO of q = N(m, s^2) and its gradient in (m, s).

    Expectations of the quadratic terms use E[theta] = m and
    E[theta^2] = m^2 + s^2; the entropy of q contributes log s up to
    constants.  Returns (value, gradient) with gradient = (d/dm, d/ds).
    """
    if s <= 0:
        raise ValueError(f"q scale must be positive, got {s}")
    s2, t2, n = oracle.lik_var, oracle.prior_var, oracle.n
    e2 = m * m + s * s
    value = (
        -0.5 * n * math.log(2.0 * math.pi * s2)
        - (oracle.sum_y_sq - 2.0 * m * oracle.sum_y + n * e2) / (2.0 * s2)
        - 0.5 * math.log(2.0 * math.pi * t2) - e2 / (2.0 * t2)
        + 0.5 * math.log(2.0 * math.pi * s * s) + 0.5
    )
    d_m = (oracle.sum_y - n * m) / s2 - m / t2
    d_s = -n * s / s2 - s / t2 + 1.0 / s
    return value, np.array([d_m, d_s])
