"""Gamma-distribution types and the probabilistic logical operators.

An entity or conjunctive-query embedding is a vector of independent Gamma
distributions (shape/rate pairs); a disjunctive embedding is a per-dimension
weighted mixture of such vectors.  The operators implemented here are the
closed parameter-space forms:

* intersection: per-dimension convex combination of shapes and rates,
* union: a Gamma mixture carrying its components and simplex weights,
* negation: per-dimension shape reciprocal ``1/alpha`` plus an elasticity
  offset, with a label bit plus parameter cache so double negation is an
  exact involution,
* distance: closed-form KL divergence summed over dimensions.

Everything operates on plain floats/arrays and is pure; the trainer reuses
the same formulas through :mod:`gammae.autodiff` dispatchers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .errors import DimensionMismatchError, DomainError, WeightSimplexError
from .special import digamma, log_gamma

__all__ = [
    "GammaParams",
    "GammaVector",
    "MixtureEmbedding",
    "gamma_pdf",
    "gamma_log_pdf",
    "gamma_entropy",
    "gamma_kl",
    "intersect",
    "mixture_union",
    "negate",
    "vector_distance",
    "mixture_distance",
    "kl_terms",
    "entropy_terms",
    "WEIGHT_SUM_TOL",
    "KL_NEGATIVE_TOL",
    "LOG_UNDERFLOW",
]

WEIGHT_SUM_TOL = 1e-9
KL_NEGATIVE_TOL = 1e-12
LOG_UNDERFLOW = -745.0  # below this, exp() underflows in float64


@dataclass(frozen=True)
class GammaParams:
    """One (shape, rate) pair; both strictly positive and finite."""

    alpha: float
    beta: float

    def __post_init__(self):
        alpha = float(self.alpha)
        beta = float(self.beta)
        if not (np.isfinite(alpha) and np.isfinite(beta)) or alpha <= 0 or beta <= 0:
            raise DomainError(f"Gamma parameters must be finite and positive, got ({self.alpha}, {self.beta})")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)


def _positive_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).copy()
    if arr.ndim != 1 or arr.size < 1:
        raise DomainError(f"{name} must be a 1-D vector with at least one entry")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and strictly positive")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GammaVector:
    """m independent Gamma dimensions plus a negation label bit.

    ``restore`` holds the pre-negation parameters when ``neg_label`` is 1 so
    that a second negation undoes the first exactly at any elasticity.
    """

    alpha: np.ndarray
    beta: np.ndarray
    neg_label: int = 0
    restore: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive_vector(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _positive_vector(self.beta, "beta"))
        if self.alpha.shape != self.beta.shape:
            raise DimensionMismatchError("alpha and beta must have equal length")
        if self.neg_label not in (0, 1):
            raise DomainError("neg_label must be 0 or 1")

    @classmethod
    def from_params(cls, params, neg_label: int = 0) -> "GammaVector":
        params = list(params)
        return cls(
            alpha=np.array([p.alpha for p in params]),
            beta=np.array([p.beta for p in params]),
            neg_label=neg_label,
        )

    @property
    def m(self) -> int:
        return int(self.alpha.size)

    @property
    def dims(self) -> tuple[GammaParams, ...]:
        return tuple(GammaParams(a, b) for a, b in zip(self.alpha, self.beta))


@dataclass(frozen=True)
class MixtureEmbedding:
    """k Gamma vectors with per-dimension simplex weights (k x m)."""

    components: tuple[GammaVector, ...]
    weights: np.ndarray

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise DomainError("a mixture needs at least one component")
        m = components[0].m
        if any(c.m != m for c in components):
            raise DimensionMismatchError("mixture components disagree on dimensionality")
        weights = np.asarray(self.weights, dtype=np.float64).copy()
        if weights.shape != (len(components), m):
            raise DimensionMismatchError(
                f"weights must have shape ({len(components)}, {m}), got {weights.shape}"
            )
        _check_simplex(weights)
        weights.setflags(write=False)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "weights", weights)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def m(self) -> int:
        return self.components[0].m


def _check_simplex(weights: np.ndarray):
    if np.any(weights < 0):
        raise WeightSimplexError("weights must be nonnegative")
    sums = weights.sum(axis=0)
    if np.any(np.abs(sums - 1.0) > WEIGHT_SUM_TOL):
        raise WeightSimplexError(f"per-dimension weights must sum to 1 within {WEIGHT_SUM_TOL}")


# -- densities, entropy, divergence --------------------------------------


def gamma_log_pdf(x: float, p: GammaParams) -> float:
    """Log density of Gamma(alpha, rate=beta) at x > 0."""
    if not np.isfinite(x) or x <= 0:
        raise DomainError(f"gamma pdf requires x > 0, got {x}")
    return float(
        (p.alpha - 1.0) * np.log(x) - p.beta * x + p.alpha * np.log(p.beta) - log_gamma(p.alpha)
    )


def gamma_pdf(x: float, p: GammaParams) -> float:
    """Density of Gamma(alpha, rate=beta) at x > 0, computed in log space."""
    lp = gamma_log_pdf(x, p)
    if lp < LOG_UNDERFLOW:
        return 0.0
    return float(np.exp(lp))


def entropy_terms(alpha, beta):
    """Differential entropy alpha - ln(beta) + ln Gamma(alpha) + (1 - alpha) psi(alpha).

    Backend-generic: works on arrays and on autodiff tensors.
    """
    return alpha - ad.log(beta) + ad.lgamma(alpha) + (1.0 - alpha) * ad.digamma(alpha)


def gamma_entropy(p: GammaParams) -> float:
    """Differential entropy of one Gamma distribution."""
    return float(p.alpha - np.log(p.beta) + log_gamma(p.alpha) + (1.0 - p.alpha) * digamma(p.alpha))


def kl_terms(alpha_e, beta_e, alpha_q, beta_q):
    """Closed-form KL(Gamma_e || Gamma_q), elementwise over dimensions.

    Backend-generic: works on arrays and on autodiff tensors.
    """
    return (
        (alpha_e - alpha_q) * ad.digamma(alpha_e)
        - ad.lgamma(alpha_e)
        + ad.lgamma(alpha_q)
        + alpha_q * (ad.log(beta_e) - ad.log(beta_q))
        + alpha_e * (beta_q - beta_e) / beta_e
    )


def gamma_kl(p: GammaParams, q: GammaParams) -> float:
    """KL divergence between two Gamma distributions (nonnegative).

    Tiny negative round-off (> -1e-12) is clamped to exactly zero.
    """
    val = float(kl_terms(p.alpha, p.beta, q.alpha, q.beta))
    if val < 0.0:
        if val < -KL_NEGATIVE_TOL:
            raise DomainError(f"KL divergence evaluated to {val}, below the round-off guard")
        return 0.0
    return val


# -- logical operators -----------------------------------------------------


def _as_weight_matrix(weights, k: int, m: int) -> np.ndarray:
    arr = np.asarray(weights, dtype=np.float64)
    if arr.ndim == 1:
        arr = np.repeat(arr[:, None], m, axis=1)
    if arr.shape != (k, m):
        raise DimensionMismatchError(f"weights must have shape ({k},) or ({k}, {m}), got {arr.shape}")
    _check_simplex(arr)
    return arr


def _check_same_m(inputs: list[GammaVector]) -> int:
    if not inputs:
        raise DomainError("operator needs at least one input")
    m = inputs[0].m
    if any(v.m != m for v in inputs):
        raise DimensionMismatchError("inputs disagree on dimensionality")
    return m


def intersect(inputs, weights) -> GammaVector:
    """Per-dimension convex combination of shapes and rates.

    ``weights`` is (k,) or (k, m), nonnegative, summing to 1 per dimension.
    Negation labels on the inputs are ignored; the output is a label-0 vector.
    """
    inputs = list(inputs)
    m = _check_same_m(inputs)
    w = _as_weight_matrix(weights, len(inputs), m)
    alpha = np.einsum("km,km->m", w, np.stack([v.alpha for v in inputs]))
    beta = np.einsum("km,km->m", w, np.stack([v.beta for v in inputs]))
    return GammaVector(alpha=alpha, beta=beta, neg_label=0)


def mixture_union(inputs, weights) -> MixtureEmbedding:
    """Weighted Gamma mixture over the inputs; weights on the simplex per dimension."""
    inputs = list(inputs)
    m = _check_same_m(inputs)
    w = _as_weight_matrix(weights, len(inputs), m)
    return MixtureEmbedding(components=tuple(inputs), weights=w)


def negate(vector: GammaVector, elasticity: float) -> GammaVector:
    """Complement embedding: shape -> 1/shape + elasticity, rate unchanged.

    A label-0 input flips to label 1 and caches its parameters; negating a
    label-1 vector restores the cached parameters exactly, making double
    negation an identity at any elasticity.
    """
    if not (0.0 <= elasticity < 1.0):
        raise DomainError(f"elasticity must be in [0, 1), got {elasticity}")
    if vector.neg_label == 1:
        if vector.restore is None:
            raise DomainError("cannot negate a label-1 vector without cached parameters")
        alpha, beta = vector.restore
        return GammaVector(alpha=alpha, beta=beta, neg_label=0)
    return GammaVector(
        alpha=1.0 / vector.alpha + elasticity,
        beta=vector.beta,
        neg_label=1,
        restore=(vector.alpha, vector.beta),
    )


def vector_distance(entity: GammaVector, query: GammaVector) -> float:
    """Sum of per-dimension KL(entity_j || query_j)."""
    if entity.m != query.m:
        raise DimensionMismatchError("entity and query disagree on dimensionality")
    terms = kl_terms(entity.alpha, entity.beta, query.alpha, query.beta)
    return float(np.maximum(terms, 0.0).sum())


def mixture_distance(entity: GammaVector, query: MixtureEmbedding) -> float:
    """Weight-averaged KL to the mixture components (convexity upper bound)."""
    if entity.m != query.m:
        raise DimensionMismatchError("entity and mixture disagree on dimensionality")
    total = 0.0
    for comp, w in zip(query.components, query.weights):
        terms = kl_terms(entity.alpha, entity.beta, comp.alpha, comp.beta)
        total += float((w * np.maximum(terms, 0.0)).sum())
    return total
