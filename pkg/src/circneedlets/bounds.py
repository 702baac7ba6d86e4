"""Computable right-hand sides of the normal-approximation bounds.

With the kernel ``h = psi / (sqrt(R_t) sigma)`` the univariate bound reads

    d_W <= |1 - ||h||^2_{L2(mu_t)}| + int |h|^3 dmu_t,

whose first term vanishes by the normalisation of ``h`` and whose second
equals ``R_t^{-1/2} sigma^{-3} int |psi|^3 F drho``.  The multivariate bound
(identity target covariance) combines the Hilbert-Schmidt distance of the
exact coefficient covariance from the identity with a weighted triple
integral.  The closed-form rate behind both bounds is ``(B^-j R_t)^{-1/2}``
times an unspecified constant, so only rates (not constants) are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional, Sequence

import numpy as np

from .coefficients import CoefficientMoments, exact_covariance
from .fields import CircleDensity
from .needlets import default_quadrature_size, evaluate_needlet, quadrature_grid


@dataclass(frozen=True)
class BoundReport:
    """Computed bound values for one (j, q-set, R_t) configuration."""

    config: dict
    wasserstein_rhs: float
    rate_term: float
    d2_rhs: Optional[float] = None
    covariance_hs_term: Optional[float] = None
    triple_term: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def wasserstein_rhs(moments: CoefficientMoments, density: CircleDensity, R_t: float,
                    n_quad: int | None = None) -> float:
    """Univariate bound value: normalisation residual plus the cubic term.

    The residual ``|1 - ||h||^2|`` is computed by quadrature even though it
    cancels exactly, so the reported value is the full right-hand side.
    """
    if R_t <= 0:
        raise ValueError(f"R_t must be positive, got {R_t}")
    if n_quad is None:
        n_quad = default_quadrature_size(moments.spec)
    grid = quadrature_grid(n_quad)
    psi = evaluate_needlet(moments.spec, grid)
    fv = density(grid)
    norm_residual = abs(1.0 - float(np.mean(psi * psi * fv)) / moments.sigma2)
    cubic = float(np.mean(np.abs(psi) ** 3 * fv)) / (math.sqrt(R_t) * moments.sigma ** 3)
    return norm_residual + cubic


def d2_rhs(moments_list: Sequence[CoefficientMoments], density: CircleDensity, R_t: float,
           n_quad: int | None = None) -> BoundReport:
    """Multivariate bound with identity target covariance.

    The operator-norm factors equal one, so the total decomposes as
    ``||I - C_d||_HS + sqrt(2 pi)/8 * triple_term`` where the triple term is
    ``int (sum_i |h_i|)^3 dmu_t``.
    """
    d = len(moments_list)
    if d < 1:
        raise ValueError("need at least one coordinate")
    if R_t <= 0:
        raise ValueError(f"R_t must be positive, got {R_t}")
    if n_quad is None:
        n_quad = max(default_quadrature_size(m.spec) for m in moments_list)
    grid = quadrature_grid(n_quad)
    fv = density(grid)
    habs = np.stack([
        np.abs(evaluate_needlet(m.spec, grid)) / (math.sqrt(R_t) * m.sigma)
        for m in moments_list
    ])
    # sum over all d^3 index triples collapses to the cube of the |h| sum
    triple = R_t * float(np.mean(habs.sum(axis=0) ** 3 * fv))
    cov = exact_covariance(moments_list, density, n_quad=n_quad)
    hs = float(np.linalg.norm(np.eye(d) - cov.entries, "fro"))
    total = hs + math.sqrt(2.0 * math.pi) / 8.0 * triple
    spec0 = moments_list[0].spec
    cfg = {
        "j": spec0.j,
        "B": spec0.params.B,
        "s": spec0.params.s,
        "eta": spec0.params.eta,
        "centers": [m.spec.center for m in moments_list],
        "R_t": R_t,
        "d": d,
        "density": density.name,
    }
    uni = wasserstein_rhs(moments_list[0], density, R_t, n_quad=n_quad)
    return BoundReport(
        config=cfg,
        wasserstein_rhs=uni,
        rate_term=theoretical_rate(spec0.j, R_t, spec0.params.B)[0],
        d2_rhs=total,
        covariance_hs_term=hs,
        triple_term=triple,
    )


def theoretical_rate(j: int, R_t: float, B: float, d: int = 1) -> tuple[float, float]:
    """Closed-form rates ``(B^-j R_t)^{-1/2}`` and ``d (B^-j R_t)^{-1/2}``.

    The theorems' constants are unspecified, so the returned values carry
    no prefactor; fitted constants belong to the Monte Carlo reports.
    """
    x = B ** float(-j) * R_t
    if x <= 0:
        raise ValueError("B^-j R_t must be positive")
    rate = x ** -0.5
    return rate, d * rate


def effective_sample_size(j: int, R_t: float, B: float) -> float:
    """Expected point count at the needlet scale, ``B^-j R_t``."""
    return B ** float(-j) * R_t


def covariance_envelope(j: int, B: float, s: int, delta, c_env: float = 0.25):
    """Decay envelope ``exp(-c_env B^2j delta^2) (1 + (B^j delta)^2s)``.

    ``c_env`` defaults to 1/4, the exponent the localisation envelope
    supports; stronger exponents can be probed through the parameter.
    """
    d = np.asarray(delta, dtype=float)
    if np.any(d < 0):
        raise ValueError("delta must be a nonnegative circular distance")
    x = B ** float(j) * d
    with np.errstate(over="ignore"):
        poly = 1.0 + x ** (2 * s)
    out = np.exp(-np.minimum(c_env * x * x, 745.0)) * poly
    return float(out) if np.isscalar(delta) else out
