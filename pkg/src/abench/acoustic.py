"""Desk-scale full-synthetic-aperture simulator and phantom generators.

Replaces a full acoustic field solver with an ideal point-element, linear,
lossless propagation model: each scatterer contributes a Gaussian-windowed
sinusoid delayed by the two-way time of flight and weighted by spherical
spreading (soft-floored), with optional cosine element directivity.
Channel data is laid down at the high sample rate and FIR low-pass
decimated to the working rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.signal import fftconvolve, firwin

from .errors import DataError, RangeError

SOUND_SPEED_DEFAULT = 1540.0

# scatterers per resolution cell needed for fully developed speckle
FULLY_DEVELOPED_PER_CELL = 12.0


@dataclass(frozen=True)
class TransducerSpec:
    """Linear-array transducer and sampling settings (L11-5v-like defaults)."""

    n_elements: int = 128
    pitch: float = 0.3e-3
    center_freq: float = 5.208e6
    sample_rate_hi: float = 104.16e6
    sample_rate_lo: float = 20.832e6
    pulse_cycles: float = 2.5
    sound_speed_nominal: float = SOUND_SPEED_DEFAULT
    bandwidth_frac: float = 0.6  # -6 dB fractional bandwidth of the pulse

    def __post_init__(self):
        if self.n_elements < 2:
            raise RangeError(f"n_elements must be >= 2, got {self.n_elements}")
        ratio = self.sample_rate_hi / self.sample_rate_lo
        if abs(ratio - round(ratio)) > 1e-9:
            raise RangeError(
                f"sample_rate_hi ({self.sample_rate_hi}) must be an integer "
                f"multiple of sample_rate_lo ({self.sample_rate_lo})"
            )
        if self.center_freq >= self.sample_rate_lo / 2:
            raise RangeError(
                f"center_freq {self.center_freq} violates Nyquist at "
                f"sample_rate_lo {self.sample_rate_lo}"
            )

    @property
    def decimation_factor(self) -> int:
        return int(round(self.sample_rate_hi / self.sample_rate_lo))

    @property
    def wavelength(self) -> float:
        return self.sound_speed_nominal / self.center_freq

    def element_positions(self) -> np.ndarray:
        """Element center x-positions, meters, centered on the origin."""
        idx = np.arange(self.n_elements, dtype=np.float64)
        return (idx - (self.n_elements - 1) / 2.0) * self.pitch

    def pulse_sigma_t(self) -> float:
        """Gaussian envelope std (seconds) for the -6 dB fractional bandwidth."""
        return np.sqrt(2.0 * np.log(2.0)) / (np.pi * self.bandwidth_frac * self.center_freq)

    def pulse_waveform(self) -> np.ndarray:
        """Gaussian-windowed sinusoid sampled at sample_rate_hi, odd length."""
        duration = self.pulse_cycles / self.center_freq
        half = int(np.floor(duration / 2.0 * self.sample_rate_hi))
        t = np.arange(-half, half + 1, dtype=np.float64) / self.sample_rate_hi
        sigma = self.pulse_sigma_t()
        return np.sin(2.0 * np.pi * self.center_freq * t) * np.exp(-0.5 * (t / sigma) ** 2)

    def resolution_cell_area(self, f_number: float = 1.75) -> float:
        """Approximate resolution cell area (m^2): axial -6 dB extent x lateral width."""
        axial = self.sound_speed_nominal * np.sqrt(2.0 * np.log(2.0)) * self.pulse_sigma_t()
        lateral = self.wavelength * f_number
        return axial * lateral


L11_5V = TransducerSpec()


def fully_developed_density(
    xducer: TransducerSpec = L11_5V,
    f_number: float = 1.75,
    per_cell: float = FULLY_DEVELOPED_PER_CELL,
) -> float:
    """Scatterer density (per m^2) for fully developed speckle."""
    return per_cell / xducer.resolution_cell_area(f_number)


@dataclass(frozen=True)
class DiscMask:
    cx: float
    cz: float
    radius: float

    def contains(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        return (x - self.cx) ** 2 + (z - self.cz) ** 2 <= self.radius**2


@dataclass(frozen=True)
class RectMask:
    x0: float
    x1: float
    z0: float
    z1: float

    def contains(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        return (x >= self.x0) & (x <= self.x1) & (z >= self.z0) & (z <= self.z1)


@dataclass(frozen=True)
class ScattererPhantom:
    """Point scatterers (x, z, amplitude) in a rectangular region."""

    x: np.ndarray
    z: np.ndarray
    amplitude: np.ndarray
    width: float
    height: float
    sound_speed: float = SOUND_SPEED_DEFAULT

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        z = np.asarray(self.z, dtype=np.float64)
        amp = np.asarray(self.amplitude, dtype=np.float64)
        if not (x.shape == z.shape == amp.shape) or x.ndim != 1:
            raise DataError("x, z, amplitude must be 1-D arrays of equal length")
        if x.size and not (np.all(np.isfinite(x)) and np.all(np.isfinite(z)) and np.all(np.isfinite(amp))):
            raise DataError("scatterer coordinates and amplitudes must be finite")
        if x.size and not np.all(z > 0):
            raise DataError("all scatterers must lie below the array (z > 0)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "amplitude", amp)

    @property
    def n_scatterers(self) -> int:
        return self.x.size


def make_speckle_phantom(
    *,
    width: float,
    height: float,
    z_top: float,
    density: float,
    inclusions: tuple = (),
    seed: int = 0,
    sound_speed: float = SOUND_SPEED_DEFAULT,
    x_center: float = 0.0,
) -> ScattererPhantom:
    """Uniformly scattered phantom with Gaussian amplitudes and echogenic inclusions.

    density is in scatterers per m^2; use fully_developed_density() for the
    documented fully-developed default. Inclusions are (mask, echogenicity_dB)
    pairs applied in order; -inf dB zeroes the amplitudes (anechoic).
    """
    if not np.isfinite(density) or density < 0:
        raise RangeError(f"density must be >= 0, got {density}")
    count = int(round(density * width * height))
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    x = x_center + (rng.random(count) - 0.5) * width
    z = z_top + rng.random(count) * height
    amp = rng.standard_normal(count)
    for mask, db in inclusions:
        inside = mask.contains(x, z)
        if np.isneginf(db):
            amp[inside] = 0.0
        else:
            amp[inside] *= 10.0 ** (db / 20.0)
    return ScattererPhantom(x, z, amp, width, height, sound_speed)


# Cyst test scene: 45 x 40 mm speckle block starting 10 mm below the array,
# with anechoic discs of radii 5 mm and 7.5 mm centered 10 mm and 28 mm
# below the block's top face (so both cysts and their measurement annuli
# sit fully inside the speckle).
CYST_PHANTOM_WIDTH = 45e-3
CYST_PHANTOM_HEIGHT = 40e-3
CYST_PHANTOM_Z_TOP = 10e-3
CYST_TOP = DiscMask(cx=0.0, cz=20e-3, radius=5e-3)
CYST_BOTTOM = DiscMask(cx=0.0, cz=38e-3, radius=7.5e-3)


def make_cyst_test_phantom(
    seed: int = 0,
    xducer: TransducerSpec = L11_5V,
    density: float | None = None,
    f_number: float = 1.75,
) -> ScattererPhantom:
    """The two-anechoic-cyst evaluation phantom."""
    if density is None:
        density = fully_developed_density(xducer, f_number)
    return make_speckle_phantom(
        width=CYST_PHANTOM_WIDTH,
        height=CYST_PHANTOM_HEIGHT,
        z_top=CYST_PHANTOM_Z_TOP,
        density=density,
        inclusions=((CYST_TOP, -np.inf), (CYST_BOTTOM, -np.inf)),
        seed=seed,
        sound_speed=xducer.sound_speed_nominal,
    )


@dataclass
class FsaCube:
    """Full-synthetic-aperture channel data, indexed [tx m, rx n, time]."""

    data: np.ndarray  # (N, N, T) float32
    t0: float
    sample_rate: float

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[0] != self.data.shape[1]:
            raise DataError(f"FSA cube must be (N, N, T), got {self.data.shape}")

    @property
    def n_elements(self) -> int:
        return self.data.shape[0]


@njit(cache=True)
def _deposit_tx(d_tx, d_rx, amps, z, inv_c, fs, floor2, use_cos, out):
    """Two-tap spike deposit for one transmit element.

    d_tx: (S,) scatterer distances to the tx element.
    d_rx: (n_rx, S) distances to each receive element.
    out:  (n_rx, T) accumulator, zeroed by the caller. Each rx row is
          written independently, so accumulation order is fixed.
    """
    n_rx, S = d_rx.shape
    T = out.shape[1]
    for j in range(n_rx):
        for s in range(S):
            dm = d_tx[s]
            dn = d_rx[j, s]
            pos = (dm + dn) * inv_c * fs
            k0 = int(pos)
            den = dm * dn
            a = amps[s]
            if use_cos == 1:
                a *= (z[s] * z[s]) / den
            if den < floor2:
                den = floor2
            a /= den
            if k0 + 1 < T:
                frac = pos - k0
                out[j, k0] += a * (1.0 - frac)
                out[j, k0 + 1] += a * frac


def anti_alias_fir(decim: int, numtaps: int = 63, beta: float = 8.0) -> np.ndarray:
    """Fixed decimation filter: Kaiser-windowed sinc, cutoff 0.8x the low Nyquist."""
    return firwin(numtaps, 0.8 / decim, window=("kaiser", beta))


def simulate_fsa(
    phantom: ScattererPhantom,
    xducer: TransducerSpec = L11_5V,
    *,
    allow_empty: bool = False,
    directivity: str = "none",
    use_reciprocity: bool = True,
    distance_floor: float = 1e-3,
    decimate: bool = True,
) -> FsaCube:
    """Simulate full-synthetic-aperture channel data for a point-scatterer phantom.

    Each (tx m, rx n, scatterer s) contributes
    amp_s * pulse(t - (d_ms + d_ns)/c) / max(d_ms * d_ns, floor^2),
    deposited as a two-tap spike at sample_rate_hi, convolved with the pulse,
    then (by default) FIR low-pass decimated to sample_rate_lo. t0 = 0.

    The ideal point-element model is reciprocal, so by default only pairs
    n >= m are computed and mirrored; pass use_reciprocity=False to compute
    every pair independently.
    """
    if directivity not in ("none", "cosine"):
        raise DataError(f"directivity must be 'none' or 'cosine', got {directivity!r}")
    n = xducer.n_elements
    pulse = xducer.pulse_waveform()
    fs_hi = xducer.sample_rate_hi
    decim = xducer.decimation_factor if decimate else 1
    c = phantom.sound_speed

    if phantom.n_scatterers == 0:
        if not allow_empty:
            raise DataError("phantom has no scatterers (pass allow_empty=True for a zero cube)")
        t_lo = max(1, (pulse.size + decim - 1) // decim)
        rate = xducer.sample_rate_lo if decimate else fs_hi
        return FsaCube(np.zeros((n, n, t_lo), dtype=np.float32), 0.0, rate)

    elems = xducer.element_positions()
    # (S, N) scatterer-to-element distances
    dists = np.sqrt((phantom.x[:, None] - elems[None, :]) ** 2 + phantom.z[:, None] ** 2)
    t_hi = int(np.ceil(2.0 * dists.max() / c * fs_hi)) + pulse.size + 2
    t_lo = (t_hi + decim - 1) // decim

    if decimate:
        kernel = np.convolve(pulse, anti_alias_fir(decim))
    else:
        kernel = pulse

    amps = phantom.amplitude
    z = phantom.z
    use_cos = 1 if directivity == "cosine" else 0
    floor2 = distance_floor**2

    data = np.empty((n, n, t_lo), dtype=np.float32)
    d_by_elem = np.ascontiguousarray(dists.T)  # (N, S)
    buf = np.empty((n, t_hi), dtype=np.float64)
    for m in range(n):
        rx0 = m if use_reciprocity else 0
        block = buf[: n - rx0]
        block[:] = 0.0
        _deposit_tx(
            d_by_elem[m], d_by_elem[rx0:], amps, z, 1.0 / c, fs_hi, floor2, use_cos, block
        )
        shaped = fftconvolve(block, kernel[None, :], mode="same", axes=1)
        rows = shaped[:, ::decim].astype(np.float32)
        data[m, rx0:, :] = rows
        if use_reciprocity:
            data[rx0:, m, :] = rows

    rate = xducer.sample_rate_lo if decimate else fs_hi
    return FsaCube(data, 0.0, rate)
