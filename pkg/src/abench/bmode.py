"""Display-domain and network-domain transforms for beamformed RF images.

The B-mode operator is log-compressed envelope data standardized to zero
mean and unit standard deviation; the log uses a smooth clamp below the
-120 dB floor so the same formula is differentiable when replicated in
the loss module. The network domain applies: lateral 2x downsample ->
divide by max |RF| -> Yeo-Johnson -> affine map to [0, 1] with
dataset-level bounds; every step except the downsample is invertible.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from .beamform import ImageGrid, RfImage
from .errors import DataError, DegenerateImageError, ShapeError, TransformError

LOG_FLOOR_DB = -120.0
_DB20 = 20.0 / np.log(10.0)
YJ_LAMBDA_RANGE = (-2.0, 4.0)


def _as_array(img) -> np.ndarray:
    data = img.data if isinstance(img, (RfImage, BModeImage)) else img
    return np.asarray(data, dtype=np.float64)


def envelope(rf) -> np.ndarray:
    """Magnitude of the column-wise (axial) analytic signal."""
    data = _as_array(rf)
    if data.ndim != 2 or data.shape[0] < 16:
        raise ShapeError(f"need a 2-D image with >= 16 rows, got shape {data.shape}")
    return np.abs(hilbert(data, axis=0))


def _softplus(x: np.ndarray) -> np.ndarray:
    # overflow-safe; exactly linear beyond 30
    out = np.where(x > 30.0, x, np.log1p(np.exp(np.minimum(x, 30.0))))
    return out


def log_compress(env: np.ndarray, floor_db: float = LOG_FLOOR_DB) -> np.ndarray:
    """20*log10(env / max(env)) with a smooth clamp below floor_db."""
    peak = env.max()
    if peak <= 0:
        raise DegenerateImageError("cannot log-compress an all-zero envelope")
    db = _DB20 * np.log(env / peak + 1e-10)
    return floor_db + _softplus(db - floor_db)


@dataclass
class BModeImage:
    """Standardized log-envelope image (mean 0, std 1)."""

    data: np.ndarray
    grid: ImageGrid | None = None


def bmode(rf) -> BModeImage:
    """Log-compressed envelope standardized by mean subtraction and std division."""
    grid = rf.grid if isinstance(rf, RfImage) else None
    db = log_compress(envelope(rf))
    std = db.std()
    if std == 0.0:
        raise DegenerateImageError("constant image has no B-mode contrast")
    return BModeImage((db - db.mean()) / std, grid)


# -- Yeo-Johnson power transform ------------------------------------------


def yeojohnson(x: np.ndarray, lam: float) -> np.ndarray:
    """Yeo-Johnson transform, defined for positive and negative values."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    if abs(lam) < 1e-12:
        out[pos] = np.log1p(x[pos])
    else:
        out[pos] = (np.power(x[pos] + 1.0, lam) - 1.0) / lam
    if abs(lam - 2.0) < 1e-12:
        out[~pos] = -np.log1p(-x[~pos])
    else:
        out[~pos] = -(np.power(1.0 - x[~pos], 2.0 - lam) - 1.0) / (2.0 - lam)
    return out


def yeojohnson_inverse(y: np.ndarray, lam: float) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    out = np.empty_like(y)
    pos = y >= 0
    if abs(lam) < 1e-12:
        out[pos] = np.expm1(y[pos])
    else:
        out[pos] = np.power(y[pos] * lam + 1.0, 1.0 / lam) - 1.0
    if abs(lam - 2.0) < 1e-12:
        out[~pos] = -np.expm1(-y[~pos])
    else:
        out[~pos] = 1.0 - np.power(1.0 - (2.0 - lam) * y[~pos], 1.0 / (2.0 - lam))
    return out


def yeojohnson_llf(lam: float, x: np.ndarray) -> float:
    """Gaussian log-likelihood of the transformed sample (up to constants)."""
    x = np.asarray(x, dtype=np.float64)
    y = yeojohnson(x, lam)
    var = y.var()
    if not np.isfinite(var) or var <= 0:
        return -np.inf
    n = x.size
    return float(-0.5 * n * np.log(var) + (lam - 1.0) * np.sum(np.sign(x) * np.log1p(np.abs(x))))


def fit_yeojohnson_lambda(
    x: np.ndarray,
    lo: float = YJ_LAMBDA_RANGE[0],
    hi: float = YJ_LAMBDA_RANGE[1],
    tol: float = 1e-6,
) -> float:
    """Golden-section maximization of the Yeo-Johnson log-likelihood on [lo, hi]."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size < 2:
        raise TransformError("need at least 2 samples to fit lambda")
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = yeojohnson_llf(c, x), yeojohnson_llf(d, x)
    if not (np.isfinite(fc) or np.isfinite(fd)):
        raise TransformError("Yeo-Johnson likelihood is non-finite on the search interval")
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = yeojohnson_llf(c, x)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = yeojohnson_llf(d, x)
    lam = (a + b) / 2.0
    if not np.isfinite(yeojohnson_llf(lam, x)):
        raise TransformError("fitted lambda has non-finite likelihood")
    return float(lam)


# -- network-domain transform ----------------------------------------------


@dataclass(frozen=True)
class TransformMeta:
    """Everything needed to map a network tensor back to RF units."""

    max: float  # per-image max |RF| used for normalization
    lam: float  # dataset-level Yeo-Johnson lambda
    lo: float  # dataset-level bounds of the transformed values
    hi: float

    def to_json(self) -> str:
        return json.dumps({"max": self.max, "lambda": self.lam, "lo": self.lo, "hi": self.hi})

    @classmethod
    def from_json(cls, text: str) -> "TransformMeta":
        d = json.loads(text)
        return cls(max=d["max"], lam=d["lambda"], lo=d["lo"], hi=d["hi"])


@dataclass
class NetTensor:
    """Image in the network domain, values in [0, 1], with inversion metadata."""

    data: np.ndarray
    meta: TransformMeta
    grid: ImageGrid | None = None


def downsample_lateral(data: np.ndarray) -> np.ndarray:
    """Mean of adjacent column pairs (the documented lossy step)."""
    if data.ndim != 2 or data.shape[1] % 2:
        raise ShapeError(f"need an even column count to downsample, got {data.shape}")
    return 0.5 * (data[:, 0::2] + data[:, 1::2])


def downsample_grid(grid: ImageGrid) -> ImageGrid:
    return ImageGrid(0.5 * (grid.x[0::2] + grid.x[1::2]), grid.z)


def fit_transform_meta(images: list, lam: float | None = None, max_samples: int = 200_000) -> TransformMeta:
    """Fit the dataset-level transform: global lambda and [lo, hi] bounds.

    Each image is laterally downsampled and max-normalized exactly as in
    to_net_domain before pooling values for the likelihood fit. The stored
    meta's per-image max is a placeholder (1.0); to_net_domain replaces it.
    """
    if not images:
        raise TransformError("need at least one image to fit the transform")
    pooled = []
    for img in images:
        d = downsample_lateral(_as_array(img))
        peak = np.abs(d).max()
        if peak == 0:
            raise DegenerateImageError("cannot fit the transform on an all-zero image")
        pooled.append((d / peak).ravel())
    values = np.concatenate(pooled)
    if values.size > max_samples:
        step = values.size // max_samples
        values = values[::step]
    if lam is None:
        lam = fit_yeojohnson_lambda(values)
    transformed = yeojohnson(values, lam)
    lo, hi = float(transformed.min()), float(transformed.max())
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise TransformError("degenerate transformed-value bounds")
    return TransformMeta(max=1.0, lam=lam, lo=lo, hi=hi)


def to_net_domain(rf, meta: TransformMeta) -> NetTensor:
    """RF image -> network tensor in [0, 1] (clipping outside the fitted bounds)."""
    grid = rf.grid if isinstance(rf, RfImage) else None
    d = downsample_lateral(_as_array(rf))
    peak = np.abs(d).max()
    if peak == 0:
        raise DegenerateImageError("cannot normalize an all-zero image")
    y = yeojohnson(d / peak, meta.lam)
    t = np.clip((y - meta.lo) / (meta.hi - meta.lo), 0.0, 1.0)
    return NetTensor(
        t,
        dataclasses.replace(meta, max=float(peak)),
        downsample_grid(grid) if grid is not None else None,
    )


def from_net_domain(t: NetTensor) -> RfImage | np.ndarray:
    """Invert everything except the lateral downsample."""
    meta = t.meta
    y = meta.lo + np.asarray(t.data, dtype=np.float64) * (meta.hi - meta.lo)
    rf = yeojohnson_inverse(y, meta.lam) * meta.max
    if t.grid is not None:
        return RfImage(rf.astype(np.float32), t.grid)
    return rf


# -- rendering ---------------------------------------------------------------


def render_png(img, dynamic_range_db: float, path) -> None:
    """8-bit grayscale PNG of a linear envelope image: 0 dB -> 255, -DR -> 0."""
    from PIL import Image

    if dynamic_range_db <= 0:
        raise DataError(f"dynamic range must be > 0 dB, got {dynamic_range_db}")
    env = _as_array(img)
    peak = env.max()
    if peak <= 0:
        raise DegenerateImageError("cannot render an all-zero image")
    db = _DB20 * np.log(np.maximum(env / peak, 1e-10))
    level = np.clip((db + dynamic_range_db) / dynamic_range_db, 0.0, 1.0)
    gray = np.round(level * 255.0).astype(np.uint8)
    Image.fromarray(gray, mode="L").save(path)
