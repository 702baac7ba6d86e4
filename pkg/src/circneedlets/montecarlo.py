"""Replication engine and statistical verification tools.

Cells of an experiment grid are sampled with independent derived RNG
streams keyed on ``(seed, kind, j, t, replication)``, so a grid can be run
whole, split across workers or restarted cell by cell with bit-identical
results.  Verification utilities cover the normality test, the empirical
one-dimensional Wasserstein distance to the standard normal, and the rate
regression against the closed-form ``(B^-j R_t)^{-1/2}``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .coefficients import CoefficientMoments, CoefficientSample, population_moments
from .fields import CircleDensity, _rejection_sample, derive_rng
from .needlets import NeedletParams, evaluate_needlet, needlet_spec
from .swtest import shapiro_wilk

_KIND_KEY = {"poissonized": 0, "depoissonized": 1}


@dataclass(frozen=True)
class ExperimentGrid:
    """Simulation grid: intensities ``R_t = R * t`` against resolution levels."""

    t_values: tuple
    j_values: tuple
    R_per_t: float = 10.0
    B: float = 1.3
    s: int = 3
    eta: float = 1.0
    center: float = math.pi
    density: Optional[CircleDensity] = None
    n_reps: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.n_reps < 100:
            raise ValueError(f"grids need n_reps >= 100, got {self.n_reps}")

    @property
    def params(self) -> NeedletParams:
        return NeedletParams(B=self.B, s=self.s, eta=self.eta)


def sample_cell(
    params: NeedletParams,
    j: int,
    density: CircleDensity,
    R_t: float,
    n_reps: int,
    seed: int,
    center: float = math.pi,
    t_key: int | None = None,
    kind: str = "poissonized",
    n_fixed: int | None = None,
    moments: Optional[Sequence[CoefficientMoments]] = None,
) -> CoefficientSample:
    """Draw ``n_reps`` independent coefficient rows for one grid cell.

    Replication ``r`` uses the stream keyed ``(seed, kind, j, t, r)``; cells
    and replications are therefore independent and order-free.  ``moments``
    may list several needlets at the same level to produce vector rows.
    """
    if kind not in _KIND_KEY:
        raise ValueError(f"unknown sample kind {kind!r}")
    if kind == "depoissonized" and (n_fixed is None or n_fixed < 1):
        raise ValueError("de-Poissonised cells need a positive fixed sample size")
    if moments is None:
        spec = needlet_spec(params, j, center)
        moments = [population_moments(spec, density)]
    t_key = t_key if t_key is not None else int(round(R_t))
    d = len(moments)
    bvec = np.array([m.b for m in moments])
    svec = np.array([m.sigma for m in moments])
    values = np.empty((n_reps, d))
    kkey = _KIND_KEY[kind]
    for r in range(n_reps):
        rng = derive_rng(seed, kkey, j, t_key, r)
        n = int(rng.poisson(R_t)) if kind == "poissonized" else int(n_fixed)
        pts = _rejection_sample(rng, density, n) if n > 0 else np.empty(0)
        if n > 0:
            sums = np.array([
                float(np.sum(evaluate_needlet(m.spec, pts))) for m in moments
            ])
        else:
            sums = np.zeros(d)
        if kind == "poissonized":
            values[r] = (sums - R_t * bvec) / (np.sqrt(R_t) * svec)
        else:
            values[r] = (sums - n * bvec) / (np.sqrt(n) * svec)
    config = {
        "j": j,
        "t": t_key,
        "R_t": R_t,
        "B": params.B,
        "s": params.s,
        "eta": params.eta,
        "centers": [m.spec.center for m in moments],
        "density": density.name,
        "seed": seed,
        "n_fixed": n_fixed,
    }
    return CoefficientSample(values=values, config=config, kind=kind)



@dataclass
class GridResult:
    cells: dict
    errors: list = field(default_factory=list)


def run_grid(grid: ExperimentGrid, kind: str = "poissonized", threads: int = 1) -> GridResult:
    """Run every (t, j) cell; cell failures are recorded, not fatal."""
    params = grid.params
    density = grid.density
    if density is None:
        from .fields import uniform_density

        density = uniform_density()
    jobs = [(t, j) for t in grid.t_values for j in grid.j_values]

    def one(cell):
        t, j = cell
        R_t = grid.R_per_t * t
        return cell, sample_cell(
            params, j, density, R_t, grid.n_reps, grid.seed,
            center=grid.center, t_key=int(t), kind=kind,
            n_fixed=int(round(R_t)) if kind == "depoissonized" else None,
        )

    result = GridResult(cells={})
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(one, c): c for c in jobs}
            for fut, cell in futures.items():
                try:
                    key, samp = fut.result()
                    result.cells[key] = samp
                except Exception as exc:  # cell-level isolation
                    result.errors.append({"cell": cell, "error": repr(exc)})
    else:
        for cell in jobs:
            try:
                key, samp = one(cell)
                result.cells[key] = samp
            except Exception as exc:
                result.errors.append({"cell": cell, "error": repr(exc)})
    return result


def empirical_wasserstein_normal(values) -> float:
    """Empirical 1-D Wasserstein distance to N(0, 1) by quantile coupling.

    ``mean_i |x_(i) - Phi^{-1}((i - 1/2)/n)|`` over the sorted sample; the
    midpoint grid avoids the infinite endpoint quantiles.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n < 10:
        raise ValueError(f"Wasserstein estimate needs n >= 10, got {n}")
    q = special.ndtri((np.arange(1, n + 1) - 0.5) / n)
    return float(np.mean(np.abs(x - q)))


def rate_regression(cells: Sequence[tuple], B: float) -> tuple[float, float, float]:
    """Least squares of ``log W1`` on ``log(B^-j R_t)`` over grid cells.

    Parameters
    ----------
    cells : sequence of (j, R_t, W1)
    B : float
        Scale parameter forming the effective sample size.

    Returns
    -------
    (slope, intercept, r2)
    """
    if len(cells) < 5:
        raise ValueError(f"rate regression needs at least 5 cells, got {len(cells)}")
    x = np.array([math.log(B ** float(-j) * R) for j, R, _ in cells])
    y = np.log(np.array([w1 for _, _, w1 in cells], dtype=float))
    if x.std() < 1e-9:
        raise ValueError("degenerate spread of B^-j R_t; cannot regress")
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def histogram(values, bins: int) -> list[tuple[float, int]]:
    """Equal-width histogram over [min, max]; counts sum to the sample size."""
    if bins < 5:
        raise ValueError(f"need at least 5 bins, got {bins}")
    v = np.asarray(values, dtype=float)
    counts, edges = np.histogram(v, bins=bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return [(float(c), int(k)) for c, k in zip(centers, counts)]


def cell_summary(sample: CoefficientSample, coordinate: int = 0) -> dict:
    """mean/var/W/p/W1 row for one cell (the grid-results CSV payload)."""
    v = sample.column(coordinate)
    sw = shapiro_wilk(v)
    return {
        "j": sample.config["j"],
        "t": sample.config["t"],
        "R_t": sample.config["R_t"],
        "n_reps": len(v),
        "mean": float(np.mean(v)),
        "var": float(np.var(v)),
        "W": sw.W,
        "p": sw.p_value,
        "W1": empirical_wasserstein_normal(v),
    }
