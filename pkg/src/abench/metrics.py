"""ROI-based image-quality metrics on linear-domain envelope images.

Standard definitions locked by the analytic test cases: contrast is
20*log10(mean background / mean target), gCNR is one minus the overlap
of the two ROI histograms (256 shared-range bins), speckle SNR is
mean/std inside a rectangle of fully developed speckle. ROI membership
is by pixel center.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .acoustic import CYST_BOTTOM, CYST_TOP, DiscMask
from .beamform import ImageGrid
from .errors import DataError, DegenerateImageError, RangeError

GCNR_BINS = 256
_MIN_GCNR_PIXELS = 100


@dataclass(frozen=True)
class Circle:
    cx: float
    cz: float
    r: float

    def mask(self, grid: ImageGrid) -> np.ndarray:
        xx, zz = np.meshgrid(grid.x, grid.z)
        return (xx - self.cx) ** 2 + (zz - self.cz) ** 2 <= self.r**2


@dataclass(frozen=True)
class Annulus:
    cx: float
    cz: float
    r_inner: float
    r_outer: float

    def mask(self, grid: ImageGrid) -> np.ndarray:
        xx, zz = np.meshgrid(grid.x, grid.z)
        d2 = (xx - self.cx) ** 2 + (zz - self.cz) ** 2
        return (d2 >= self.r_inner**2) & (d2 <= self.r_outer**2)


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    z0: float
    z1: float

    def mask(self, grid: ImageGrid) -> np.ndarray:
        xx, zz = np.meshgrid(grid.x, grid.z)
        return (xx >= self.x0) & (xx <= self.x1) & (zz >= self.z0) & (zz <= self.z1)


@dataclass(frozen=True)
class RoiSpec:
    """Target circle, contrast annulus, and speckle-SNR rectangle."""

    target: Circle
    contrast_bg: Annulus
    snr_bg: Rect

    def __post_init__(self):
        a = self.contrast_bg
        if not (0 < a.r_inner < a.r_outer):
            raise RangeError("annulus radii must satisfy 0 < r_inner < r_outer")
        r = self.snr_bg
        if not (r.x0 < r.x1 and r.z0 < r.z1):
            raise RangeError("snr rectangle must have positive extent")
        # rectangle must stay clear of the target/annulus region
        nearest_x = min(max(self.target.cx, r.x0), r.x1)
        nearest_z = min(max(self.target.cz, r.z0), r.z1)
        d = math.hypot(nearest_x - self.target.cx, nearest_z - self.target.cz)
        if d <= a.r_outer:
            raise RangeError("snr rectangle overlaps the target's background annulus")


def roi_for_cyst(cyst: Circle | DiscMask, snr_bg: Rect) -> RoiSpec:
    """Canonical ROI: target = cyst circle, background annulus at 1.1r and 1.5r."""
    cx, cz, r = (cyst.cx, cyst.cz, getattr(cyst, "r", getattr(cyst, "radius", None)))
    return RoiSpec(
        target=Circle(cx, cz, r),
        contrast_bg=Annulus(cx, cz, 1.1 * r, 1.5 * r),
        snr_bg=snr_bg,
    )


# speckle rectangle clear of both cysts of the evaluation phantom
CYST_SNR_RECT = Rect(x0=10e-3, x1=17e-3, z0=14e-3, z1=24e-3)

CYST_ROIS = {
    "top_cyst": roi_for_cyst(CYST_TOP, CYST_SNR_RECT),
    "bottom_cyst": roi_for_cyst(CYST_BOTTOM, CYST_SNR_RECT),
}


def _roi_values(env: np.ndarray, grid: ImageGrid, mask: np.ndarray) -> np.ndarray:
    if env.shape != grid.shape:
        raise DataError(f"envelope shape {env.shape} does not match grid {grid.shape}")
    vals = np.asarray(env, dtype=np.float64)[mask]
    if vals.size == 0:
        raise DataError("ROI contains no pixels on this grid")
    return vals


def contrast_db(env: np.ndarray, grid: ImageGrid, roi: RoiSpec) -> float:
    """20*log10(mean background / mean target) on the linear envelope."""
    target = _roi_values(env, grid, roi.target.mask(grid))
    bg = _roi_values(env, grid, roi.contrast_bg.mask(grid))
    mu_t = target.mean()
    mu_b = bg.mean()
    if mu_t == 0.0:
        warnings.warn("target ROI mean is zero; contrast is infinite", stacklevel=2)
        return math.inf
    return float(20.0 * np.log10(mu_b / mu_t))


def gcnr(env: np.ndarray, grid: ImageGrid, roi: RoiSpec) -> float:
    """1 - histogram overlap of target and background, 256 shared-range bins."""
    target = _roi_values(env, grid, roi.target.mask(grid))
    bg = _roi_values(env, grid, roi.contrast_bg.mask(grid))
    if target.size < _MIN_GCNR_PIXELS or bg.size < _MIN_GCNR_PIXELS:
        raise DataError(
            f"gCNR needs >= {_MIN_GCNR_PIXELS} pixels per ROI, "
            f"got {target.size} / {bg.size}"
        )
    lo = min(target.min(), bg.min())
    hi = max(target.max(), bg.max())
    if hi <= lo:
        return 0.0  # identical constants: full overlap
    p_t, _ = np.histogram(target, bins=GCNR_BINS, range=(lo, hi))
    p_b, _ = np.histogram(bg, bins=GCNR_BINS, range=(lo, hi))
    p_t = p_t / target.size
    p_b = p_b / bg.size
    return float(1.0 - np.minimum(p_t, p_b).sum())


def speckle_snr(env: np.ndarray, grid: ImageGrid, roi: RoiSpec) -> float:
    """mean/std of the linear envelope inside the speckle rectangle."""
    vals = _roi_values(env, grid, roi.snr_bg.mask(grid))
    sd = vals.std()
    if sd == 0.0:
        raise DegenerateImageError("constant ROI has undefined speckle SNR")
    return float(vals.mean() / sd)


def evaluate_suite(
    envs: list[np.ndarray], grid: ImageGrid, rois: dict[str, RoiSpec]
) -> dict:
    """Per-metric mean and std across image versions, per named ROI.

    std is the population standard deviation, so single images and repeated
    images report 0.
    """
    if not envs:
        raise DataError("need at least one image")
    report: dict = {"n_images": len(envs), "rois": {}}
    for name, roi in rois.items():
        values = {"contrast_db": [], "gcnr": [], "speckle_snr": []}
        for env in envs:
            values["contrast_db"].append(contrast_db(env, grid, roi))
            values["gcnr"].append(gcnr(env, grid, roi))
            values["speckle_snr"].append(speckle_snr(env, grid, roi))
        report["rois"][name] = {
            metric: {"mean": float(np.mean(v)), "std": float(np.std(v))}
            for metric, v in values.items()
        }
    return report


def format_report(report: dict) -> str:
    """Table-1-style text rendering of an evaluate_suite report."""
    lines = [f"n_images = {report['n_images']}"]
    header = f"{'ROI':<14} {'Metric':<14} {'mean':>9} {'std':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for name, metrics in report["rois"].items():
        for metric, label in (
            ("contrast_db", "Contrast (dB)"),
            ("gcnr", "gCNR"),
            ("speckle_snr", "Speckle SNR"),
        ):
            m = metrics[metric]
            lines.append(f"{name:<14} {label:<14} {m['mean']:>9.3f} {m['std']:>8.3f}")
    return "\n".join(lines)
