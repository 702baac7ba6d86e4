"""Mexican needlets on the unit circle.

The building block is the weight ``w_s(x) = x^s exp(-x)`` applied to squared
scaled frequencies.  A needlet at resolution ``j``, centred at ``x0`` and
carrying arc length ``lam`` (in the normalised measure ``rho = dtheta/2pi``) is

    psi(theta) = sqrt(lam) * sum_k w_s((B^-j k)^2) exp(i k (theta - x0))
               = 2 sqrt(lam) * sum_{k>=1} w_s((B^-j k)^2) cos(k (theta - x0)),

real because the weights are even in ``k`` and the ``k = 0`` term vanishes.

Two evaluation backends are provided and cross-checked in the tests:

* ``fourier`` -- the truncated cosine sum above, cut where the weights fall
  below ``trunc_eps`` of their peak (the defining formula);
* ``gauss`` -- the dual series obtained by Poisson summation,

      psi(theta) = sqrt(lam) B^j sqrt(pi) 4^-s (-1)^s
                   * sum_m H_{2s}(y_m) exp(-y_m^2),   y_m = B^j (d - 2 pi m)/2,

  with ``H_n`` the physicists' Hermite polynomials and ``d`` the wrapped
  angular offset.  Both series represent the same function to machine
  precision; the dual form costs O(1) per point and is used automatically
  once the cosine sum would need more than a few dozen terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import (
    CoverageError,
    DomainError,
    QuadratureResolutionError,
    ResourceLimitError,
)

_TWO_PI = 2.0 * np.pi

# Beyond this many cosine terms the dual (Gaussian image) series is cheaper
# (its cost per point is a few images regardless of the truncation index).
_FOURIER_AUTO_LIMIT = 48

# exp(-y*y) underflows to an irrelevant subnormal past here.
_Y_CLAMP = 27.5


def weight(s: int, x):
    """Evaluate the needlet weight ``w_s(x) = x^s exp(-x)``.

    Parameters
    ----------
    s : int
        Shape parameter, ``s >= 1``.
    x : float or array_like
        Nonnegative argument.

    Returns
    -------
    float or ndarray
        ``x**s * exp(-x)``, increasing on ``[0, s]`` and decreasing beyond.
    """
    if s < 1 or int(s) != s:
        raise DomainError(f"shape parameter s must be a positive integer, got {s}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("weight argument must be nonnegative")
    out = np.where(arr == 0.0, 0.0, arr ** s * np.exp(-arr))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def calderon_constant(s: int) -> float:
    """Closed-form Calderon constant ``e_s = Gamma(2s) / 2^(2s)``."""
    if s < 1 or int(s) != s:
        raise DomainError(f"shape parameter s must be a positive integer, got {s}")
    return math.gamma(2 * s) / 4.0 ** s


def calderon_constant_quadrature(s: int, t: float = 1.0) -> float:
    """Quadrature self-check of ``e_s``: integral of ``w_s(t x)^2 dx/x``.

    The integral is scale invariant in ``t``; any positive ``t`` must give the
    same value.  Serves as an independent check of :func:`calderon_constant`.
    """
    if t <= 0:
        raise DomainError("scale t must be positive")
    val, _ = integrate.quad(
        lambda x: (weight(s, t * x)) ** 2 / x, 0.0, np.inf, limit=200
    )
    return val


@dataclass(frozen=True)
class NeedletParams:
    """Frame parameters: scale ``B > 1``, shape ``s >= 1``, pixel ``eta``."""

    B: float
    s: int
    eta: float = 1.0
    trunc_eps: float = 1e-12

    def __post_init__(self):
        if not self.B > 1.0:
            raise DomainError(f"scale parameter B must exceed 1, got {self.B}")
        if self.s < 1 or int(self.s) != self.s:
            raise DomainError(f"shape parameter s must be a positive integer, got {self.s}")
        if not 0.0 < self.eta <= 1.0:
            raise DomainError(f"pixel parameter eta must lie in (0, 1], got {self.eta}")
        if not 0.0 < self.trunc_eps < 1e-6:
            raise DomainError(f"trunc_eps must lie in (0, 1e-6), got {self.trunc_eps}")

    @property
    def lambda_Bs(self) -> float:
        """Frame normalisation ``Lambda_{B,s} = e_s / (2 log B)``."""
        return calderon_constant(self.s) / (2.0 * math.log(self.B))


@dataclass(frozen=True)
class FrameConstants:
    """Calderon constant and the derived frame normalisation."""

    e_s: float
    lambda_Bs: float


def frame_constants(params: NeedletParams) -> FrameConstants:
    e_s = calderon_constant(params.s)
    return FrameConstants(e_s=e_s, lambda_Bs=e_s / (2.0 * math.log(params.B)))


def truncation_index(params: NeedletParams, j: int) -> int:
    """Smallest K with ``w_s((B^-j k)^2) < trunc_eps * max_k w_s`` for all k > K.

    The weights peak near ``k = B^j sqrt(s)`` and decay super-exponentially,
    so the cut index grows like ``B^j``.
    """
    Bj = params.B ** float(j)
    s = params.s
    # Peak of w over the integer grid (never below the k=1 value).
    k_peak = max(1, int(math.floor(Bj * math.sqrt(s))))
    cand = np.arange(max(1, k_peak - 1), k_peak + 3, dtype=float)
    w_max = float(np.max(weight(s, (cand / Bj) ** 2)))
    w_max = max(w_max, float(weight(s, (1.0 / Bj) ** 2)))
    thresh = params.trunc_eps * w_max
    # Solve s*log(x) - x = log(thresh) for x on the decreasing branch x > s.
    target = math.log(thresh)
    lo = float(s)
    hi = float(s) - 2.0 * math.log(params.trunc_eps) + 4.0 * s + 8.0
    if s * math.log(lo) - lo <= target:
        x_cut = lo
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if s * math.log(mid) - mid > target:
                lo = mid
            else:
                hi = mid
        x_cut = hi
    k_cut = Bj * math.sqrt(x_cut)
    if not np.isfinite(k_cut) or k_cut > 2 ** 31:
        raise ResourceLimitError(f"truncation index {k_cut:.3e} exceeds resource limits")
    k_max = max(k_peak, int(math.ceil(k_cut)))
    # Walk down while the boundary weights already sit below the threshold.
    while k_max > 1 and weight(s, ((k_max) / Bj) ** 2) < thresh:
        k_max -= 1
    return max(1, k_max)


@dataclass(frozen=True)
class NeedletSpec:
    """A single needlet: parameters, level, centre and arc length."""

    params: NeedletParams
    j: int
    center: float
    length: float
    k_max: int = field(default=0)

    def __post_init__(self):
        if self.length <= 0 or self.length > 1.0:
            raise DomainError(f"arc length must lie in (0, 1], got {self.length}")
        if self.k_max == 0:
            object.__setattr__(self, "k_max", truncation_index(self.params, self.j))


def needlet_spec(params: NeedletParams, j: int, center: float, length: float | None = None) -> NeedletSpec:
    """Build a standalone needlet at an arbitrary centre.

    When ``length`` is omitted the idealised arc length ``eta * B^-j`` is
    used; partition-derived needlets carry the exact ``1/Q_j`` instead.
    """
    if length is None:
        length = min(1.0, params.eta * params.B ** float(-j))
        if length == 0.0:
            raise ResourceLimitError(f"level {j} is beyond floating-point range for B={params.B}")
    return NeedletSpec(params=params, j=int(j), center=float(center), length=float(length))


@dataclass(frozen=True)
class Partition:
    """Equal-arc partition of the circle at resolution ``j``.

    ``Q_j = ceil(B^j / eta)`` arcs, midpoint centres, each of normalised
    length ``1/Q_j`` so the lengths sum to one exactly.
    """

    j: int
    Q: int
    centers: np.ndarray
    lengths: np.ndarray

    def needlet(self, params: NeedletParams, q: int) -> NeedletSpec:
        """Needlet attached to arc ``q`` (1-based)."""
        if not 1 <= q <= self.Q:
            raise DomainError(f"arc index q must lie in [1, {self.Q}], got {q}")
        return NeedletSpec(
            params=params, j=self.j, center=float(self.centers[q - 1]),
            length=float(self.lengths[q - 1]),
        )


def make_partition(params: NeedletParams, j: int) -> Partition:
    """Equal partition with ``Q_j = ceil(eta^-1 B^j)`` midpoint-centred arcs."""
    if j < 0:
        raise DomainError(f"partition level must be nonnegative, got {j}")
    q_exact = params.B ** float(j) / params.eta
    if q_exact > 2 ** 31:
        raise ResourceLimitError(f"arc count {q_exact:.3e} exceeds resource limits")
    Q = int(math.ceil(q_exact))
    centers = _TWO_PI * (np.arange(1, Q + 1) - 0.5) / Q
    lengths = np.full(Q, 1.0 / Q)
    return Partition(j=int(j), Q=Q, centers=centers, lengths=lengths)


def wrap_angle(delta):
    """Reduce an angular difference to the fundamental interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(delta, dtype=float), _TWO_PI)


def circular_distance(a, b):
    """Shortest arc distance ``min(|a-b|, 2 pi - |a-b|)``."""
    return np.abs(wrap_angle(np.asarray(a, dtype=float) - b))


def _hermite_times_gaussian(n: int, y: np.ndarray) -> np.ndarray:
    """``H_n(y) * exp(-y^2)`` with clamping so dead tails never overflow."""
    yc = np.clip(y, -_Y_CLAMP, _Y_CLAMP)
    expf = np.exp(-yc * yc)
    h_prev = np.ones_like(yc)
    if n == 0:
        return h_prev * expf
    h = 2.0 * yc
    for m in range(1, n):
        h_prev, h = h, 2.0 * yc * h - 2.0 * m * h_prev
    return h * expf


def _eval_gauss(spec: NeedletSpec, delta: np.ndarray) -> np.ndarray:
    params = spec.params
    Bj = params.B ** float(spec.j)
    d = wrap_angle(delta)
    # Images m with B^j pi (2m - 1)/2 < ~18 still contribute above 1e-16.
    n_images = max(1, int(math.ceil((36.0 / (np.pi * Bj) + 1.0) / 2.0)))
    total = np.zeros_like(d)
    for m in range(-n_images, n_images + 1):
        y = 0.5 * Bj * (d - _TWO_PI * m)
        total += _hermite_times_gaussian(2 * params.s, y)
    scale = math.sqrt(spec.length) * Bj * math.sqrt(math.pi) * 0.25 ** params.s
    if params.s % 2:
        scale = -scale
    return scale * total


def _eval_fourier(spec: NeedletSpec, delta: np.ndarray) -> np.ndarray:
    params = spec.params
    Bj = params.B ** float(spec.j)
    d = np.asarray(delta, dtype=float)
    out = np.zeros_like(d)
    flat = d.ravel()
    acc = np.zeros(flat.size)
    # Chunk the frequency axis to bound the outer-product workspace.
    step = max(1, int(4e6 // max(flat.size, 1)) or 1)
    for k0 in range(1, spec.k_max + 1, step):
        ks = np.arange(k0, min(k0 + step, spec.k_max + 1), dtype=float)
        wk = weight(params.s, (ks / Bj) ** 2)
        acc += np.cos(np.outer(flat, ks)) @ wk
    out = acc.reshape(d.shape)
    return 2.0 * math.sqrt(spec.length) * out


def evaluate_needlet(spec: NeedletSpec, theta, method: str = "auto"):
    """Evaluate the needlet at angles ``theta`` (radians, any real values).

    ``method`` is one of ``fourier`` (the defining truncated cosine sum),
    ``gauss`` (the dual Gaussian-image series) or ``auto``, which picks the
    cheaper backend; the two agree to machine precision.
    """
    arr = np.asarray(theta, dtype=float)
    delta = arr - spec.center
    if method == "auto":
        method = "fourier" if spec.k_max <= _FOURIER_AUTO_LIMIT else "gauss"
    if method == "fourier":
        vals = _eval_fourier(spec, delta)
    elif method == "gauss":
        vals = _eval_gauss(spec, delta)
    else:
        raise ValueError(f"unknown evaluation method {method!r}")
    if np.isscalar(theta) or arr.ndim == 0:
        return float(vals)
    return vals


def quadrature_grid(n: int) -> np.ndarray:
    """Uniform grid on [0, 2 pi); the mean over it integrates under rho.

    The periodic trapezoid rule on this grid is exact for trigonometric
    polynomials of degree below ``n`` and spectrally accurate for smooth
    periodic integrands.
    """
    return _TWO_PI * np.arange(n) / n


def default_quadrature_size(spec: NeedletSpec) -> int:
    return max(4096, 8 * spec.k_max)


@dataclass(frozen=True)
class TrigPoly:
    """Real trigonometric polynomial ``a_0 + 2 Re sum_{k>=1} a_k e^{ik theta}``.

    ``coeffs[k]`` holds ``a_k`` for ``k = 0..degree``; negative frequencies
    follow by conjugation.
    """

    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, theta):
        th = np.asarray(theta, dtype=float)
        ks = np.arange(1, self.degree + 1)
        vals = np.real(self.coeffs[0]) + 2.0 * (
            np.cos(np.outer(th, ks)) @ np.real(self.coeffs[1:])
            - np.sin(np.outer(th, ks)) @ np.imag(self.coeffs[1:])
        )
        return float(vals) if th.ndim == 0 else vals.reshape(th.shape)

    def norm2(self) -> float:
        """Squared L2(rho) norm by Parseval."""
        c = self.coeffs
        return float(np.abs(c[0]) ** 2 + 2.0 * np.sum(np.abs(c[1:]) ** 2))

    @staticmethod
    def random(degree: int, rng: np.random.Generator, mean_zero: bool = True) -> "TrigPoly":
        c = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
        c[0] = 0.0 if mean_zero else rng.normal()
        return TrigPoly(coeffs=c)


def needlet_trig_poly(spec: NeedletSpec) -> TrigPoly:
    """The needlet itself as a trigonometric polynomial (degree ``k_max``)."""
    params = spec.params
    Bj = params.B ** float(spec.j)
    ks = np.arange(spec.k_max + 1, dtype=float)
    wk = weight(params.s, (ks / Bj) ** 2)
    coeffs = math.sqrt(spec.length) * wk * np.exp(-1j * ks * spec.center)
    return TrigPoly(coeffs=coeffs)


def _coefficient_spectral(spec: NeedletSpec, coeffs: np.ndarray) -> float:
    """beta = sqrt(lam) sum_k a_k w_s((B^-j k)^2) e^{i k x0} over k in Z."""
    params = spec.params
    Bj = params.B ** float(spec.j)
    D = len(coeffs) - 1
    ks = np.arange(-D, D + 1, dtype=float)
    a = np.concatenate([np.conj(coeffs[:0:-1]), coeffs])
    wk = weight(params.s, (ks / Bj) ** 2)
    total = math.sqrt(spec.length) * np.sum(a * wk * np.exp(1j * ks * spec.center))
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise DomainError(
            f"spectral coefficient has imaginary residue {total.imag:.3e}; "
            "Fourier coefficients do not describe a real function"
        )
    return float(total.real)


def needlet_coefficient(spec: NeedletSpec, F, n_quad: int | None = None) -> float:
    """Inner product ``<F, psi>`` under rho.

    ``F`` may be a :class:`TrigPoly`, an object exposing complex Fourier
    coefficients through a ``fourier`` attribute (densities), or a plain
    callable.  Known coefficients take the exact spectral path; otherwise
    the uniform-grid trapezoid rule is used with ``n_quad`` points
    (default ``max(4096, 8 k_max)``).
    """
    fourier = None
    if isinstance(F, TrigPoly):
        fourier = F.coeffs
    elif getattr(F, "fourier", None) is not None:
        fourier = np.asarray(F.fourier, dtype=complex)
    if fourier is not None:
        return _coefficient_spectral(spec, fourier)
    if n_quad is None:
        n_quad = default_quadrature_size(spec)
    if n_quad < 4 * spec.k_max:
        raise QuadratureResolutionError(
            f"n_quad={n_quad} cannot resolve k_max={spec.k_max}; need at least {4 * spec.k_max}"
        )
    grid = quadrature_grid(n_quad)
    return float(np.mean(np.asarray(F(grid), dtype=float) * evaluate_needlet(spec, grid)))


def lp_norm(spec: NeedletSpec, p: float, n_quad: int | None = None) -> float:
    """``||psi||_p^p`` under rho by uniform-grid quadrature."""
    if p < 1:
        raise DomainError(f"p must be at least 1, got {p}")
    if n_quad is None:
        n_quad = default_quadrature_size(spec)
    if n_quad < 4 * spec.k_max:
        raise QuadratureResolutionError(
            f"n_quad={n_quad} cannot resolve k_max={spec.k_max}; need at least {4 * spec.k_max}"
        )
    grid = quadrature_grid(n_quad)
    return float(np.mean(np.abs(evaluate_needlet(spec, grid)) ** p))


def frame_window_bounds(params: NeedletParams, t_grid) -> tuple[float, float]:
    """Daubechies window check: extrema of ``sum_j w_s(t B^-2j)^2 / Lambda``.

    Both values sit near 1 for ``B`` near 1; their ratio degrades as ``B``
    grows.  The sum is truncated once terms fall below ``trunc_eps`` of the
    running maximum on the decaying branches.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.size == 0:
        raise ValueError("t_grid must not be empty")
    if np.any(ts <= 0):
        raise DomainError("t_grid entries must be positive")
    s, B, eps = params.s, params.B, params.trunc_eps
    lam = params.lambda_Bs
    vals = np.empty(ts.size)
    for i, t in enumerate(ts):
        total = 0.0
        peak = 0.0
        for direction in (1, -1):
            j = 0 if direction == 1 else -1
            while abs(j) < 100000:
                x = t * B ** (-2.0 * j)
                term = float(weight(s, x)) ** 2
                total += term
                peak = max(peak, term)
                decaying = x < s if direction == 1 else x > s
                if decaying and term < eps * peak:
                    break
                j += direction
        vals[i] = total / lam
    return float(vals.min()), float(vals.max())


def _tightness_level_sum(params: NeedletParams, coeffs: np.ndarray, j: int) -> float:
    """``sum_q |beta_jq|^2`` for an equal midpoint partition, exactly.

    Midpoint centres make ``sum_q e^{i(k-k')x_q}`` equal ``(-1)^l Q`` when
    ``k - k' = l Q`` and zero otherwise, so only frequency pairs congruent
    modulo ``Q_j`` contribute.
    """
    B, s, eta = params.B, params.s, params.eta
    Bj = B ** float(j)
    Q = max(1, int(math.ceil(Bj / eta)))
    D = len(coeffs) - 1
    ks = np.arange(-D, D + 1)
    a = np.concatenate([np.conj(coeffs[:0:-1]), coeffs])
    wk = weight(s, (ks / Bj) ** 2)
    b = a * wk
    total = 0.0
    ell_max = (2 * D) // Q
    for ell in range(-ell_max, ell_max + 1):
        dk = ell * Q
        lo, hi = max(-D, -D + dk), min(D, D + dk)
        if lo > hi:
            continue
        kk = np.arange(lo, hi + 1)
        cross = np.sum(b[kk + D] * np.conj(b[kk - dk + D]))
        total += (-1.0) ** ell * float(np.real(cross))
    # lam * Q = 1 for the equal partition, so the prefactor cancels.
    return total


def frame_tightness_ratio(params: NeedletParams, F: TrigPoly, j_min: int, j_max: int) -> float:
    """``sum_{j,q} |<F, psi_jq>|^2 / ||F||^2`` over levels ``j_min..j_max``.

    For a near-tight frame the ratio sits in a band of relative width
    ``O(eta) + O(|B-1|^2 log|B-1|)`` around ``Lambda_{B,s}``.  Raises
    :class:`CoverageError` when the window misses more than 1e-6 of the
    total energy (estimated by extending the window 20 levels each way).
    """
    if j_min > j_max:
        raise ValueError("empty level window")
    coeffs = np.asarray(F.coeffs, dtype=complex)
    norm2 = F.norm2()
    if norm2 <= 0:
        raise DomainError("F must have positive L2 norm")
    inside = sum(_tightness_level_sum(params, coeffs, j) for j in range(j_min, j_max + 1))
    outside = sum(
        _tightness_level_sum(params, coeffs, j)
        for j in list(range(j_min - 20, j_min)) + list(range(j_max + 1, j_max + 21))
    )
    if inside <= 0 or outside > 1e-6 * (inside + outside):
        raise CoverageError(
            f"levels [{j_min}, {j_max}] miss an estimated fraction "
            f"{outside / max(inside + outside, 1e-300):.3e} of the frame energy",
            missing_mass=outside / max(inside + outside, 1e-300),
        )
    return inside / norm2
