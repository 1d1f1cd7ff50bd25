"""Numerical integration oracle for the closed-form Gamma identities.

Deliberately independent of the in-house special functions: normalisation
constants come from ``scipy.special.gammaln`` and truncation points from
``scipy.special.gammaincinv``, so agreement between this module and
:mod:`gammae.gamma` cross-checks two unrelated code paths.

Integrals over (0, inf) are evaluated after the substitution x = e^t, on
which the integrands decay at least exponentially toward both endpoints;
a fixed composite rule on a uniform t-grid then converges rapidly.  All
densities are evaluated in log space and exponentiated at the end, so shape
parameters up to 1e4 stay in range.

Documented accuracy: with the default 4097 nodes and automatic cutoffs the
KL and entropy integrals agree with the closed forms to better than 1e-9
for shape/rate in [0.1, 10] (the test corpus pins 1e-6).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gammaincinv, gammaln

from .errors import DomainError, NonConvergenceError
from .gamma import GammaParams, MixtureEmbedding

__all__ = ["QuadratureConfig", "numeric_kl", "numeric_entropy", "numeric_mixture_mass", "numeric_pdf_mass"]

_UPPER_QUANTILE = 1.0 - 1e-12
_LOWER_MASS = 1e-16
_TAIL_TOL = 1e-9


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite-rule settings; ``upper_cutoff=None`` picks the 1 - 1e-12 quantile."""

    node_count: int = 4097
    upper_cutoff: float | None = None
    scheme: str = "simpson-log"

    def __post_init__(self):
        if self.node_count < 64:
            raise DomainError("node_count must be at least 64")
        if self.upper_cutoff is not None and not (
            np.isfinite(self.upper_cutoff) and self.upper_cutoff > 0
        ):
            raise DomainError("upper_cutoff must be a positive real")
        if self.scheme not in ("simpson-log", "trapezoid-log"):
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")


def _log_density(t: np.ndarray, p: GammaParams) -> np.ndarray:
    # ln f(e^t) with scipy's gammaln as the independent normaliser.
    return (p.alpha - 1.0) * t - p.beta * np.exp(t) + p.alpha * np.log(p.beta) - gammaln(p.alpha)


def _t_bounds(p: GammaParams, cfg: QuadratureConfig) -> tuple[float, float]:
    if cfg.upper_cutoff is not None:
        cutoff = cfg.upper_cutoff
        tail = float(gammaincc(p.alpha, p.beta * cutoff))
        if tail > _TAIL_TOL:
            raise NonConvergenceError(
                f"tail mass {tail:.3e} beyond cutoff {cutoff} exceeds {_TAIL_TOL}"
            )
    else:
        cutoff = float(gammaincinv(p.alpha, _UPPER_QUANTILE)) / p.beta
    # Lower truncation via the small-x bound P(X < x) <= (beta x)^alpha / Gamma(alpha+1).
    t_lo = (np.log(_LOWER_MASS) + gammaln(p.alpha + 1.0)) / p.alpha - np.log(p.beta)
    return float(t_lo), float(np.log(cutoff))


def _composite(values: np.ndarray, h: float, scheme: str) -> float:
    if scheme == "trapezoid-log":
        return float(h * (values.sum() - 0.5 * (values[0] + values[-1])))
    weights = np.ones_like(values)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(h / 3.0 * np.dot(weights, values))


def _grid(t_lo: float, t_hi: float, cfg: QuadratureConfig) -> tuple[np.ndarray, float]:
    n = cfg.node_count
    if cfg.scheme == "simpson-log" and n % 2 == 0:
        n += 1  # Simpson needs an odd node count
    t = np.linspace(t_lo, t_hi, n)
    return t, t[1] - t[0]


def numeric_kl(p: GammaParams, q: GammaParams, cfg: QuadratureConfig | None = None) -> float:
    """KL(p || q) by composite quadrature of f_p (ln f_p - ln f_q) on the log axis."""
    cfg = cfg or QuadratureConfig()
    t, h = _grid(*_t_bounds(p, cfg), cfg)
    lp = _log_density(t, p)
    lq = _log_density(t, q)
    integrand = np.exp(lp + t) * (lp - lq)
    return _composite(integrand, h, cfg.scheme)


def numeric_entropy(p: GammaParams, cfg: QuadratureConfig | None = None) -> float:
    """Differential entropy -integral f ln f by composite quadrature."""
    cfg = cfg or QuadratureConfig()
    t, h = _grid(*_t_bounds(p, cfg), cfg)
    lp = _log_density(t, p)
    integrand = -np.exp(lp + t) * lp
    return _composite(integrand, h, cfg.scheme)


def numeric_pdf_mass(p: GammaParams, cfg: QuadratureConfig | None = None) -> float:
    """Total mass of one Gamma density (should integrate to 1)."""
    cfg = cfg or QuadratureConfig()
    t, h = _grid(*_t_bounds(p, cfg), cfg)
    integrand = np.exp(_log_density(t, p) + t)
    return _composite(integrand, h, cfg.scheme)


def numeric_mixture_mass(
    mixture: MixtureEmbedding, dim: int, cfg: QuadratureConfig | None = None
) -> float:
    """Total mass of one mixture dimension's density (should integrate to 1)."""
    cfg = cfg or QuadratureConfig()
    bounds = [
        _t_bounds(GammaParams(c.alpha[dim], c.beta[dim]), cfg) for c in mixture.components
    ]
    t_lo = min(b[0] for b in bounds)
    t_hi = max(b[1] for b in bounds)
    t, h = _grid(t_lo, t_hi, cfg)
    density = np.zeros_like(t)
    for comp, w in zip(mixture.components, mixture.weights[:, dim]):
        density += w * np.exp(_log_density(t, GammaParams(comp.alpha[dim], comp.beta[dim])))
    return _composite(density * np.exp(t), h, cfg.scheme)
