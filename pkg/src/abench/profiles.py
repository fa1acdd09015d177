"""Random near-field phase-screen aberration profiles.

A profile is one delay error per transducer element. Profiles are built
by convolving unit-variance Gaussian noise with a Gaussian kernel whose
width is root-searched so the measured autocorrelation FWHM of that
realization lands on target, then mean-removing and rescaling to the
exact RMS target.

Randomness comes from the counter-based Philox4x64-10 generator keyed
directly with the 64-bit seed (``numpy.random.Philox(key=seed)``), with
normal variates drawn by ``Generator.standard_normal``; this is the
repo-wide seeded source, so profiles are bitwise reproducible per
(seed, n_elements, pitch, spec).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateProfileError, RangeError, ShapeError

RMS_RANGE = (20e-9, 80e-9)  # seconds
ACF_FWHM_RANGE = (4e-3, 9e-3)  # meters

# FWHM of a unit-variance Gaussian = 2*sqrt(2*ln 2) * sigma
_FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))


@dataclass(frozen=True)
class ProfileSpec:
    """Target statistics for one random profile.

    rms_target:      RMS delay error, seconds. 0 means "no aberration"
                     and is always accepted; otherwise must lie in
                     RMS_RANGE unless allow_out_of_range is set.
    acf_fwhm_target: autocorrelation full width at half maximum, meters.
    seed:            64-bit seed for the counter-based generator.
    """

    rms_target: float
    acf_fwhm_target: float
    seed: int
    allow_out_of_range: bool = False

    def __post_init__(self):
        if not np.isfinite(self.rms_target) or self.rms_target < 0:
            raise RangeError(f"rms_target must be finite and >= 0, got {self.rms_target}")
        if not np.isfinite(self.acf_fwhm_target) or self.acf_fwhm_target <= 0:
            raise RangeError(f"acf_fwhm_target must be finite and > 0, got {self.acf_fwhm_target}")
        if self.allow_out_of_range:
            return
        # one-part-in-1e9 slack so boundary values survive float round-off
        slack = 1.0 + 1e-9
        if self.rms_target != 0.0 and not (
            RMS_RANGE[0] / slack <= self.rms_target <= RMS_RANGE[1] * slack
        ):
            raise RangeError(
                f"rms_target {self.rms_target * 1e9:.1f} ns outside "
                f"[{RMS_RANGE[0] * 1e9:.0f}, {RMS_RANGE[1] * 1e9:.0f}] ns "
                "(pass allow_out_of_range=True to override)"
            )
        if not (ACF_FWHM_RANGE[0] / slack <= self.acf_fwhm_target <= ACF_FWHM_RANGE[1] * slack):
            raise RangeError(
                f"acf_fwhm_target {self.acf_fwhm_target * 1e3:.1f} mm outside "
                f"[{ACF_FWHM_RANGE[0] * 1e3:.0f}, {ACF_FWHM_RANGE[1] * 1e3:.0f}] mm "
                "(pass allow_out_of_range=True to override)"
            )


@dataclass(frozen=True)
class AberrationProfile:
    """Per-element delay errors in seconds."""

    delays: np.ndarray  # (n_elements,) float64 seconds
    pitch: float  # element spacing, meters

    def __post_init__(self):
        delays = np.asarray(self.delays, dtype=np.float64)
        object.__setattr__(self, "delays", delays)
        if delays.ndim != 1 or delays.size < 1:
            raise ShapeError(f"delays must be a 1-D array, got shape {delays.shape}")
        if not np.all(np.isfinite(delays)):
            raise RangeError("delays must all be finite")
        if not (np.isfinite(self.pitch) and self.pitch > 0):
            raise RangeError(f"pitch must be > 0, got {self.pitch}")

    @property
    def n_elements(self) -> int:
        return self.delays.size


def measure_rms(profile: AberrationProfile) -> float:
    """Root mean square of the delay errors, seconds."""
    return float(np.sqrt(np.mean(profile.delays**2)))


def _acf_fwhm_lags(delays: np.ndarray) -> float:
    """FWHM in lag units of the normalized biased autocorrelation."""
    n = delays.size
    r = np.correlate(delays, delays, mode="full")[n - 1 :] / n  # biased ACF, lags 0..n-1
    if r[0] <= 0.0:
        raise DegenerateProfileError("all-zero profile has no autocorrelation width")
    rho = r / r[0]
    below = np.nonzero(rho < 0.5)[0]
    if below.size == 0:
        raise DegenerateProfileError("autocorrelation never falls below half maximum")
    k = int(below[0])  # first lag strictly below 0.5; k >= 1 since rho[0] = 1
    # linear interpolation between lags k-1 and k for the 0.5 crossing
    half_lag = (k - 1) + (rho[k - 1] - 0.5) / (rho[k - 1] - rho[k])
    return 2.0 * half_lag


def measure_acf_fwhm(profile: AberrationProfile) -> float:
    """Autocorrelation FWHM of the delay sequence, meters.

    Uses the normalized biased autocorrelation with linear interpolation
    between integer lags for the half-maximum crossing.
    """
    if profile.n_elements < 8:
        raise ShapeError(f"need >= 8 elements to measure ACF FWHM, got {profile.n_elements}")
    return _acf_fwhm_lags(profile.delays) * profile.pitch


def _smooth(noise: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian smoothing with reflective padding, 'same' length."""
    half = max(1, int(np.ceil(4.0 * sigma)))
    j = np.arange(-half, half + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (j / sigma) ** 2)
    kernel /= kernel.sum()
    padded = np.pad(noise, half, mode="reflect")
    return np.convolve(padded, kernel, mode="valid")


def _candidate(noise: np.ndarray, sigma: float) -> np.ndarray:
    """Smoothed, mean-removed delay sequence for a trial kernel width."""
    y = _smooth(noise, sigma)
    return y - y.mean()


def generate_profile(spec: ProfileSpec, n_elements: int, pitch: float) -> AberrationProfile:
    """Generate one random aberration profile hitting the spec's targets.

    The measured RMS of the result equals spec.rms_target exactly (by
    post-scaling); the measured ACF FWHM equals spec.acf_fwhm_target to
    root-search tolerance for this specific noise realization.
    """
    if n_elements < 2:
        raise ShapeError(f"need >= 2 elements, got {n_elements}")
    if not (np.isfinite(pitch) and pitch > 0):
        raise RangeError(f"pitch must be > 0, got {pitch}")
    if spec.rms_target == 0.0:
        return AberrationProfile(np.zeros(n_elements), pitch)

    rng = np.random.Generator(np.random.Philox(key=np.uint64(spec.seed)))
    noise = rng.standard_normal(n_elements)

    target_lags = spec.acf_fwhm_target / pitch

    def err(sigma: float) -> float:
        return _acf_fwhm_lags(_candidate(noise, sigma)) - target_lags

    # White noise smoothed by a Gaussian of width sigma has an expected ACF
    # FWHM of sqrt(2) * FWHM(kernel); start the bracket there and widen
    # until the root is enclosed.
    sigma0 = max(target_lags / (_FWHM_PER_SIGMA * np.sqrt(2.0)), 0.05)
    # mean removal caps the reachable ACF width at a fraction of the record,
    # so stop widening the kernel once it dwarfs the array
    sigma_max = 4.0 * n_elements
    lo, hi = sigma0 / 4.0, min(sigma0 * 4.0, sigma_max)
    f_lo, f_hi = err(lo), err(hi)
    for _ in range(24):
        if f_lo < 0.0:
            break
        lo /= 2.0
        f_lo = err(lo)
    while f_hi <= 0.0 and hi < sigma_max:
        hi = min(hi * 2.0, sigma_max)
        f_hi = err(hi)
    if not (f_lo < 0.0 < f_hi):
        raise DegenerateProfileError(
            f"could not bracket ACF FWHM target {spec.acf_fwhm_target * 1e3:.2f} mm "
            f"for n_elements={n_elements}, pitch={pitch * 1e3:.3f} mm"
        )
    sigma = brentq(err, lo, hi, xtol=1e-8, rtol=1e-12)

    delays = _candidate(noise, sigma)
    delays *= spec.rms_target / np.sqrt(np.mean(delays**2))
    return AberrationProfile(delays, pitch)
