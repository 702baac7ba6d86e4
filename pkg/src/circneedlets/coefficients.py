"""Population moments, compensated needlet coefficients and covariances.

For a needlet ``psi`` and sampling density ``F`` the population moments are
``b = E[psi(X)]`` and ``sigma^2 = E[psi^2(X)]`` (the raw second moment).  The
normalised compensated coefficient of a Poisson sample with intensity ``R_t``
is

    beta~ = (sum_i psi(X_i) - R_t b) / (sqrt(R_t) sigma),

which has mean 0 and variance 1 exactly.  De-Poissonised coordinates replace
the Poisson count by a fixed ``n``; the centred variant
``(sum psi - n b)/(sqrt(n) sigma)`` covers general densities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import CircleDensity, PointSample
from .needlets import (
    NeedletSpec,
    default_quadrature_size,
    evaluate_needlet,
    needlet_coefficient,
    quadrature_grid,
    weight,
)


@dataclass(frozen=True)
class CoefficientMoments:
    """First two population moments of ``psi(X_1)`` for one needlet."""

    b: float
    sigma2: float
    spec: NeedletSpec
    density: CircleDensity

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))


def _sigma2_uniform_parseval(spec: NeedletSpec) -> float:
    # ||psi||^2 = lam * 2 sum_{k>=1} w_k^2; truncation error is (trunc_eps)^2.
    params = spec.params
    Bj = params.B ** float(spec.j)
    ks = np.arange(1, spec.k_max + 1, dtype=float)
    wk = weight(params.s, (ks / Bj) ** 2)
    return float(spec.length * 2.0 * np.sum(wk ** 2))


def population_moments(spec: NeedletSpec, density: CircleDensity, n_quad: int | None = None) -> CoefficientMoments:
    """Compute ``b`` and ``sigma^2`` (spectral paths where exact, else quadrature)."""
    b = needlet_coefficient(spec, density, n_quad=n_quad)
    if density.is_uniform:
        sigma2 = _sigma2_uniform_parseval(spec)
    else:
        n = n_quad or default_quadrature_size(spec)
        grid = quadrature_grid(n)
        psi = evaluate_needlet(spec, grid)
        sigma2 = float(np.mean(psi * psi * density(grid)))
    if sigma2 <= 0:
        raise ArithmeticError("nonpositive sigma^2; the quadrature collapsed")
    return CoefficientMoments(b=b, sigma2=sigma2, spec=spec, density=density)


def beta_tilde(sample: PointSample, moments: CoefficientMoments, R_t: float) -> float:
    """Normalised compensated coefficient of a Poisson sample."""
    if sample.kind != "poisson":
        raise ValueError(f"beta_tilde needs a Poisson sample, got kind={sample.kind!r}")
    if sample.intensity is None or not np.isclose(sample.intensity, R_t):
        raise ValueError(
            f"sample intensity {sample.intensity} does not match R_t={R_t}"
        )
    total = float(np.sum(evaluate_needlet(moments.spec, sample.points))) if sample.n else 0.0
    return (total - R_t * moments.b) / (np.sqrt(R_t) * moments.sigma)


def build_vector(sample: PointSample, moments_list: Sequence[CoefficientMoments], R_t: float) -> np.ndarray:
    """One replication row ``(beta~_{q_1}, ..., beta~_{q_d})``.

    All coordinates are computed from the identical point sample, so their
    empirical correlations estimate the exact covariance.
    """
    centers = [m.spec.center for m in moments_list]
    if len(set(np.round(centers, 15))) != len(centers):
        raise ValueError("duplicate needlet centres in the coordinate list")
    return np.array([beta_tilde(sample, m, R_t) for m in moments_list])


def depoissonized_vector(sample: PointSample, moments_list: Sequence[CoefficientMoments]) -> np.ndarray:
    """Fixed-``n`` coordinate vector ``(sum_i psi(X_i) - n b) / (sqrt(n) sigma)``.

    For the uniform density (``b = 0``) the centring term vanishes and this
    is the plain normalised sum; the centring extends the mean-zero contract
    to general densities without changing the uniform case.
    """
    if sample.n < 1:
        raise ValueError("de-Poissonised vector needs at least one point")
    n = sample.n
    out = np.empty(len(moments_list))
    for i, m in enumerate(moments_list):
        total = float(np.sum(evaluate_needlet(m.spec, sample.points)))
        out[i] = (total - n * m.b) / (np.sqrt(n) * m.sigma)
    return out


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric covariance of a coefficient vector with its provenance."""

    entries: np.ndarray
    source: str  # "exact-quadrature" | "monte-carlo"

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("covariance entries must form a square matrix")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("covariance matrix must be symmetric")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("covariance matrix is not positive semidefinite")

    @staticmethod
    def from_samples(values: np.ndarray) -> "CovarianceMatrix":
        cov = np.atleast_2d(np.cov(np.asarray(values, dtype=float), rowvar=False, bias=True))
        cov = 0.5 * (cov + cov.T)
        return CovarianceMatrix(entries=cov, source="monte-carlo")


def exact_covariance(
    moments_list: Sequence[CoefficientMoments],
    density: CircleDensity,
    n_quad: int | None = None,
) -> CovarianceMatrix:
    """Exact coefficient covariance ``int psi_a psi_b F drho / (sigma_a sigma_b)``.

    Independent of the Poisson intensity; unit diagonal by construction.
    """
    if n_quad is None:
        n_quad = max(default_quadrature_size(m.spec) for m in moments_list)
    grid = quadrature_grid(n_quad)
    fvals = density(grid)
    rows = np.stack([evaluate_needlet(m.spec, grid) for m in moments_list])
    sigmas = np.array([m.sigma for m in moments_list])
    raw = (rows * fvals) @ rows.T / n_quad
    ups = raw / np.outer(sigmas, sigmas)
    ups = 0.5 * (ups + ups.T)
    return CovarianceMatrix(entries=ups, source="exact-quadrature")


@dataclass
class CoefficientSample:
    """Replications of a coefficient vector plus the full configuration.

    ``values`` has one replication per row.  ``config`` carries everything
    needed to regenerate the draw (parameters, centres, intensity, seed).
    """

    values: np.ndarray
    config: dict
    kind: str  # "poissonized" | "depoissonized"

    @property
    def n_reps(self) -> int:
        return self.values.shape[0]

    def column(self, i: int = 0) -> np.ndarray:
        v = np.atleast_2d(self.values)
        return v[:, i]

    def to_csv(self, path, sidecar: bool = True) -> None:
        """One replication per row; JSON sidecar with configuration and seed."""
        from .reporting import write_csv, write_json

        vals = np.atleast_2d(self.values)
        header = [f"beta_{i + 1}" for i in range(vals.shape[1])]
        write_csv(path, header, vals)
        if sidecar:
            side = dict(self.config)
            side["kind"] = self.kind
            side["n_reps"] = int(vals.shape[0])
            write_json(str(path) + ".json", side)
