"""Delay-and-sum reconstruction of single-plane-wave data on a pixel grid.

Each pixel sums receive elements inside an f-number-controlled aperture
centered on the nearest element, fetching every trace at the plane-wave
time of flight plus that element's delay error. No apodization window is
applied unless requested.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .acoustic import SOUND_SPEED_DEFAULT, TransducerSpec
from .errors import DataError, RangeError, ShapeError
from .profiles import AberrationProfile
from .synthesis import ChannelRF

DEFAULT_F_NUMBER = 1.75
DEFAULT_N_COLUMNS = 384


@dataclass(frozen=True)
class ImageGrid:
    """Beamforming grid: lateral positions x and depth rows z, meters."""

    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        z = np.asarray(self.z, dtype=np.float64)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        if x.ndim != 1 or z.ndim != 1 or x.size < 1 or z.size < 1:
            raise DataError("grid axes must be non-empty 1-D arrays")
        if np.any(z <= 0):
            raise DataError("grid depths must be > 0")
        if z.size > 1 and not np.all(np.diff(z) > 0):
            raise DataError("grid depths must be strictly increasing")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.z.size, self.x.size)

    @property
    def row_spacing(self) -> float:
        return float(self.z[1] - self.z[0]) if self.z.size > 1 else 0.0


def default_grid(
    xducer: TransducerSpec,
    z_min: float = 10e-3,
    z_max: float = 50e-3,
    n_columns: int = DEFAULT_N_COLUMNS,
) -> ImageGrid:
    """Grid spanning the array footprint with rows every c/(2*sample_rate_lo)."""
    elems = xducer.element_positions()
    x = np.linspace(elems[0], elems[-1], n_columns)
    dz = xducer.sound_speed_nominal / (2.0 * xducer.sample_rate_lo)
    n_rows = int(np.floor((z_max - z_min) / dz)) + 1
    z = z_min + dz * np.arange(n_rows)
    return ImageGrid(x, z)


@dataclass
class RfImage:
    """Beamformed RF samples on a grid, indexed [depth row, lateral column]."""

    data: np.ndarray  # (nz, nx) float32
    grid: ImageGrid

    def __post_init__(self):
        if self.data.shape != self.grid.shape:
            raise ShapeError(
                f"image shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise DataError("RF image contains non-finite values")


def tof(x_n: float, x: float, z: float, c: float) -> float:
    """Plane-wave two-way time of flight: (z + sqrt(z^2 + (x - x_n)^2)) / c."""
    return (z + math.sqrt(z * z + (x - x_n) * (x - x_n))) / c


def _sinc_table(n_fracs: int = 513) -> np.ndarray:
    """Fractional-delay taps for the optional windowed-sinc fetch path."""
    from .synthesis import sinc_kernel

    fracs = np.arange(n_fracs) / (n_fracs - 1)
    return np.vstack([sinc_kernel(min(f, 1.0 - 1e-12)) for f in fracs])


_SINC_TABLE = None


@njit(cache=True)
def _das_kernel(
    rf, delays, elem_x, grid_x, grid_z, t0, fs, inv_c, inv_f_number, pitch, use_sinc,
    sinc_table, out, oob
):
    n_elem, n_t = rf.shape
    nz = grid_z.size
    nx = grid_x.size
    x0 = elem_x[0]
    for ix in range(nx):
        x = grid_x[ix]
        # nearest element to the pixel column
        k = int(round((x - x0) / pitch))
        if k < 0:
            k = 0
        elif k > n_elem - 1:
            k = n_elem - 1
        misses = 0
        for iz in range(nz):
            z = grid_z[iz]
            aperture = z * inv_f_number
            n_ap = int(round(aperture / pitch))
            if n_ap < 1:
                n_ap = 1
            lo = k - n_ap // 2
            hi = lo + n_ap - 1
            if lo < 0:
                lo = 0
            if hi > n_elem - 1:
                hi = n_elem - 1
            acc = 0.0
            for n in range(lo, hi + 1):
                dx = x - elem_x[n]
                tau = (z + math.sqrt(z * z + dx * dx)) * inv_c + delays[n]
                pos = (tau - t0) * fs
                i0 = int(math.floor(pos))
                if use_sinc == 1:
                    if i0 - 3 < 0 or i0 + 4 >= n_t:
                        misses += 1
                        continue
                    frac = pos - i0
                    row = int(round(frac * (sinc_table.shape[0] - 1)))
                    val = 0.0
                    for j in range(8):
                        val += sinc_table[row, j] * rf[n, i0 - 3 + j]
                    acc += val
                else:
                    if i0 < 0 or i0 + 1 >= n_t:
                        misses += 1
                        continue
                    frac = pos - i0
                    acc += (1.0 - frac) * rf[n, i0] + frac * rf[n, i0 + 1]
            out[iz, ix] = acc
        oob[ix] = misses


def beamform(
    rf: ChannelRF,
    profile: AberrationProfile,
    grid: ImageGrid,
    f_number: float = DEFAULT_F_NUMBER,
    c: float = SOUND_SPEED_DEFAULT,
    pitch: float | None = None,
    interp: str = "linear",
) -> RfImage:
    """DAS image of a single plane wave with receive-side delay errors.

    The aperture at depth z spans a = z / f_number meters, rounded to whole
    elements, floor(n/2) of them left of the nearest element (the rest to the
    right), clipped at the array ends. Rectangular apodization. Pixels whose
    requested sample times fall outside the record contribute zeros and a
    coverage warning is emitted.
    """
    if f_number <= 0:
        raise RangeError(f"f_number must be > 0, got {f_number}")
    if rf.n_elements != profile.n_elements:
        raise ShapeError(
            f"rf has {rf.n_elements} elements but profile has {profile.n_elements}"
        )
    if interp not in ("linear", "sinc"):
        raise DataError(f"interp must be 'linear' or 'sinc', got {interp!r}")
    pitch = profile.pitch if pitch is None else pitch
    n = rf.n_elements
    elem_x = ((np.arange(n) - (n - 1) / 2.0) * pitch).astype(np.float64)

    global _SINC_TABLE
    if _SINC_TABLE is None:
        _SINC_TABLE = _sinc_table()
    out = np.empty(grid.shape, dtype=np.float64)
    oob = np.zeros(grid.x.size, dtype=np.int64)
    _das_kernel(
        rf.data.astype(np.float32),
        profile.delays.astype(np.float64),
        elem_x,
        grid.x,
        grid.z,
        float(rf.t0),
        float(rf.sample_rate),
        1.0 / c,
        1.0 / f_number,
        float(pitch),
        1 if interp == "sinc" else 0,
        _SINC_TABLE,
        out,
        oob,
    )
    misses = int(oob.sum())
    if misses:
        warnings.warn(
            f"{misses} pixel-element samples fell outside the time record "
            "and were treated as zero",
            stacklevel=2,
        )
    return RfImage(out.astype(np.float32), grid)


def aperture_element_count(z: float, f_number: float, pitch: float) -> int:
    """Whole-element aperture size at depth z (before clipping at array ends)."""
    return max(1, int(round(z / f_number / pitch)))
