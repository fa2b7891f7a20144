"""Analytic Fourier coefficients of the cnoidal profiles and the PF(2) test.

Transform convention (used by every producer and consumer in this package):
a profile with half-period L is represented by the symmetric sequence
u_hat(n) = u_hat(-n) = (1/2L) int_{-L}^{L} u(xi) exp(-i n pi xi / L) dxi,
so that

    u(xi) = u_hat(0) + sum_{n>=1} 2 u_hat(n) cos(n pi xi / L)

and Parseval holds with no extra weights:

    sum_{n in Z} u_hat(n)^2 = (1/2L) int_{-L}^{L} u(xi)^2 dxi.

This (rather than the plain cosine coefficient) is the sequence whose
2x2 Toeplitz minors decide PF(2); with the doubled cosine coefficients in
the n != 0 slots the origin minor u_hat(0)^2 - u_hat(1)^2 goes negative
for moduli above ~0.7 and the positivity framework would collapse.

Closed forms implemented below (q = exp(-pi K'/K), so that
q^n/(1 - q^{2n}) = csch(n pi K'/K)/2):

* cn^2 wave:   u_hat(0) = (2 M K / L^2)(K - D),
               u_hat(n) = (M pi^2 / L^2 k^2) n csch(n pi K'/K);
* cn^4 wave at modulus sqrt2/2:
               u_hat(0) = 5c/6g,
               u_hat(n) = (5 c pi^4 / 6 g K^4) n^3 csch(n pi);
* cn^4 at general modulus (coefficients of cn^4 itself, in z with
  half-period K): constant (1/3k^4)[2(k^2-k'^2)(E/K-k'^2) + k^2 k'^2] and
  n-th term (pi^2 / k^4 K^2)(n q^n/(1-q^{2n}))(1/3)[2(k^2-k'^2)
  + n^2 pi^2/(2K^2)].
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .elliptic import EllipticContext
from .waves import FIFTH_CNOIDAL, CnoidalParams, WaveProfile

__all__ = [
    "COSINE_CONVENTION",
    "CoeffSequence",
    "Pf2Report",
    "AliasingWarning",
    "cn2_coeffs",
    "cn4_coeffs_halfmodulus",
    "cn4_series_general_k",
    "dft_cosine_coeffs",
    "dft_coeffs",
    "pf2_check",
]

COSINE_CONVENTION = ("u_hat(n) = (1/2L) int u exp(-i n pi xi/L);  "
                     "u(xi) = u_hat(0) + sum_{n>=1} 2 u_hat(n) cos(n pi xi/L)")

# arguments of csch beyond this overflow exp(); the coefficient is below
# the smallest subnormal and is reported as an exact zero
_CSCH_OVERFLOW = 700.0


class AliasingWarning(UserWarning):
    pass


def _csch(x: float) -> float:
    return 1.0 / math.sinh(x)


@dataclass(frozen=True, eq=False)
class CoeffSequence:
    """Symmetric cosine-coefficient sequence indexed by n in [-n_max, n_max].

    Only n >= 0 is stored; symmetry coeff(-n) = coeff(n) is structural.
    ``underflow`` marks sequences whose tail was cut to exact zeros by the
    csch overflow guard.
    """

    values: np.ndarray
    half_period: float
    normalization: str = COSINE_CONVENTION
    underflow: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n: int) -> float:
        n = abs(int(n))
        if n > self.n_max:
            raise IndexError(f"coefficient index {n} beyond truncation {self.n_max}")
        return float(self.values[n])

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.values > 0.0))

    def two_sided(self) -> np.ndarray:
        """Array of coeff(n) for n = -n_max .. n_max."""
        return np.concatenate([self.values[:0:-1], self.values])

    def ell2_norm_sq(self) -> float:
        """Two-sided sequence norm sum_{n in Z} coeff(n)^2 = (1/2L) int u^2."""
        return float(self.values[0] ** 2 + 2.0 * np.sum(self.values[1:] ** 2))

    def reconstruct(self, xi) -> np.ndarray:
        """Evaluate the truncated series u_hat(0) + sum 2 u_hat(n) cos(...)."""
        xi = np.asarray(xi, dtype=float)
        total = np.full_like(xi, self.values[0])
        for n in range(1, self.n_max + 1):
            total = total + 2.0 * self.values[n] * np.cos(n * math.pi * xi / self.half_period)
        return total

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("n,coeff\n")
        for n, v in enumerate(self.values):
            buf.write(f"{n},{v:.17g}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def cn2_coeffs(cn: CnoidalParams, n_max: int) -> CoeffSequence:
    """Analytic coefficients of the cn^2 cnoidal profile."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    ctx = EllipticContext.from_modulus(cn.modulus)
    L = cn.half_period
    vals = np.zeros(n_max + 1)
    vals[0] = (2.0 * cn.emm * ctx.K / L ** 2) * (ctx.K - ctx.D)
    ratio = math.pi * ctx.Kprime / ctx.K
    pref = cn.emm * math.pi ** 2 / (L ** 2 * cn.modulus ** 2)
    underflow = False
    for n in range(1, n_max + 1):
        x = n * ratio
        if x > _CSCH_OVERFLOW:
            underflow = True
            break
        vals[n] = pref * n * _csch(x)
    return CoeffSequence(values=vals, half_period=L, underflow=underflow)


def cn4_coeffs_halfmodulus(profile: WaveProfile, n_max: int) -> CoeffSequence:
    """Analytic coefficients of the cn^4 profile (modulus sqrt2/2 enforced)."""
    if profile.family != FIFTH_CNOIDAL:
        raise ValueError("half-modulus cn^4 coefficients are defined for the "
                         f"{FIFTH_CNOIDAL!r} family only")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    p = profile.params
    ctx = EllipticContext.from_modulus(math.sqrt(2.0) / 2.0)
    vals = np.zeros(n_max + 1)
    vals[0] = 5.0 * p.c / (6.0 * p.gamma)
    pref = 5.0 * p.c * math.pi ** 4 / (6.0 * p.gamma * ctx.K ** 4)
    underflow = False
    for n in range(1, n_max + 1):
        x = n * math.pi
        if x > _CSCH_OVERFLOW:
            underflow = True
            break
        vals[n] = pref * n ** 3 * _csch(x)
    return CoeffSequence(values=vals, half_period=profile.cnoidal.half_period,
                         underflow=underflow)


def cn4_series_general_k(k: float, n_max: int) -> CoeffSequence:
    """Cosine coefficients of cn^4(z, k) in z, half-period K(k).

    At k = sqrt2/2 the k^2 - k'^2 factors vanish and the sequence collapses
    to the half-modulus shape: constant 1/3 and terms ~ n^3 csch(n pi).
    """
    if not 0.0 < k < 1.0:
        raise ValueError(f"modulus must lie in (0, 1), got {k!r}")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    ctx = EllipticContext.from_modulus(k)
    k2 = k * k
    kp2 = ctx.kprime ** 2
    k4 = k2 * k2
    vals = np.zeros(n_max + 1)
    vals[0] = (2.0 * (k2 - kp2) * (ctx.E / ctx.K - kp2) + k2 * kp2) / (3.0 * k4)
    ratio = math.pi * ctx.Kprime / ctx.K
    underflow = False
    for n in range(1, n_max + 1):
        x = n * ratio
        if x > _CSCH_OVERFLOW:
            underflow = True
            break
        qfac = 0.5 * _csch(x)
        vals[n] = (math.pi ** 2 / (k4 * ctx.K ** 2)) * n * qfac * (
            2.0 * (k2 - kp2) + n * n * math.pi ** 2 / (2.0 * ctx.K ** 2)
        ) / 3.0
    return CoeffSequence(values=vals, half_period=ctx.K, underflow=underflow)


def dft_cosine_coeffs(u: np.ndarray, half_period: float, n_max: int) -> CoeffSequence:
    """Cosine coefficients of samples on the grid xi_j = -L + j (2L/N).

    This is the numerical oracle for the analytic formulas; it conforms to
    the module convention.  Warns when the content near the Nyquist scale
    exceeds 1e-12 of coeff(0), since then truncation/aliasing matters.
    """
    u = np.asarray(u, dtype=float)
    n_samp = len(u)
    if n_samp < 8 * n_max:
        raise ValueError(f"need at least 8*n_max = {8 * n_max} samples, got {n_samp}")
    spec = np.fft.rfft(u)
    # the grid starts at -L, half a period before the transform origin
    signs = (-1.0) ** np.arange(len(spec))
    vals = np.zeros(n_max + 1)
    vals[0] = spec[0].real / n_samp
    vals[1:] = signs[1:n_max + 1] * spec[1:n_max + 1].real / n_samp
    nyq_band = np.max(np.abs(spec[-max(2, n_samp // 64):])) / n_samp
    scale = max(abs(vals[0]), float(np.max(np.abs(spec))) / n_samp)
    if scale > 0 and nyq_band > 1e-12 * scale:
        warnings.warn(
            f"Nyquist-scale content {nyq_band:.2e} exceeds 1e-12 of the "
            "leading coefficient; increase the sample count",
            AliasingWarning,
        )
    return CoeffSequence(values=vals, half_period=half_period)


def dft_coeffs(profile: WaveProfile, n_max: int) -> CoeffSequence:
    """Discrete-transform coefficients of a periodic profile's samples."""
    if not profile.periodic:
        raise ValueError("dft_coeffs needs a periodic profile")
    return dft_cosine_coeffs(profile.u, profile.cnoidal.half_period, n_max)


# ---------------------------------------------------------------------------
# PF(2): 2x2 Toeplitz minors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pf2Report:
    """Outcome of the discrete PF(2) minor check on an index window."""

    passed: bool
    window: int
    min_minor: float
    min_location: tuple  # (n1, n2, m1, m2)
    scale: float
    log_concavity_ok: bool
    min_log_concavity: float
    tolerance: float
    failures: int = 0


def _twosided_values(seq) -> tuple[np.ndarray, int]:
    """Return (values over n = -R..R, R) from a CoeffSequence or odd array."""
    if isinstance(seq, CoeffSequence):
        return seq.two_sided(), seq.n_max
    arr = np.asarray(seq, dtype=float)
    if arr.ndim != 1 or len(arr) % 2 == 0:
        raise ValueError("raw sequences must be one-dimensional with odd length "
                         "(values for n = -R..R)")
    return arr, len(arr) // 2


def pf2_check(seq, window: int = 12, tol_factor: float = 1e-14) -> Pf2Report:
    """Check every 2x2 Toeplitz minor a(n1-m1)a(n2-m2) - a(n1-m2)a(n2-m1).

    Indices n1 < n2 and m1 < m2 range over [-window, window]; quadruples
    whose differences leave the stored range are skipped, so sequences should
    carry at least 2*window coefficients for full coverage.  Minors are
    allowed to dip to -tol_factor*scale with scale = max(a)^2, the
    floating-point floor for minors that vanish exactly.  The log-concavity
    corollary a(n)^2 >= a(n-1)a(n+1) is reported separately.
    """
    values, reach = _twosided_values(seq)
    if np.any(values < 0.0) or not np.any(values > 0.0):
        raise ValueError("PF(2) check expects a nonnegative, nontrivial sequence")
    idx = np.arange(-window, window + 1)
    usable = idx  # row/column index sets
    # Toeplitz matrix T[i, j] = a(n_i - m_j) where defined, else NaN
    diff = usable[:, None] - usable[None, :]
    defined = np.abs(diff) <= reach
    T = np.where(defined, values[np.clip(diff + reach, 0, 2 * reach)], np.nan)

    scale = float(np.max(values) ** 2)
    tol = tol_factor * scale

    m = len(usable)
    minors = (T[:, None, :, None] * T[None, :, None, :]
              - T[:, None, None, :] * T[None, :, :, None])
    i1, i2 = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    j1, j2 = i1, i2
    pair_rows = (i1 < i2)[:, :, None, None]
    pair_cols = (j1 < j2)[None, None, :, :]
    mask = pair_rows & pair_cols & np.isfinite(minors)
    masked = np.where(mask, minors, np.inf)
    flat = int(np.argmin(masked))
    loc = np.unravel_index(flat, masked.shape)
    min_minor = float(masked[loc])
    location = (int(usable[loc[0]]), int(usable[loc[1]]),
                int(usable[loc[2]]), int(usable[loc[3]]))
    failures = int(np.sum(np.where(mask, minors, np.inf) < -tol))

    # log-concavity across the stored range
    lc = values[1:-1] ** 2 - values[:-2] * values[2:]
    min_lc = float(np.min(lc)) if len(lc) else 0.0
    lc_ok = min_lc >= -tol

    return Pf2Report(
        passed=(min_minor >= -tol) and lc_ok,
        window=window,
        min_minor=min_minor,
        min_location=location,
        scale=scale,
        log_concavity_ok=lc_ok,
        min_log_concavity=min_lc,
        tolerance=tol,
        failures=failures,
    )
