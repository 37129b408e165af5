"""Image quality: RMSE, Gaussian-window SSIM and phase-aligned complex error."""
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import DimensionError
from .recon import align_phase

DEFAULT_WINDOW = 7
DEFAULT_SIGMA = 1.5


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    ssim: float
    complex_error: float = float("nan")


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def rmse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def gaussian_window(size=DEFAULT_WINDOW, sigma=DEFAULT_SIGMA):
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


def fit_window(shape, window=DEFAULT_WINDOW):
    """Largest odd window no bigger than ``window`` that fits the image."""
    w = min(window, *shape)
    return w if w % 2 else w - 1


def ssim(a, b, window=DEFAULT_WINDOW, sigma=DEFAULT_SIGMA, data_range=None, k1=0.01, k2=0.03) -> float:
    """Mean local SSIM over all fully-contained windows of a 2-D pair.

    ``data_range`` (L) defaults to the larger of the two image maxima, which keeps
    the index symmetric. Pass the ground-truth maximum to score against a reference.
    """
    a, b = _pair(a, b)
    if a.ndim != 2:
        raise DimensionError("ssim works on 2-D images; use ssim_volume for stacks")
    if window < 1 or window > min(a.shape):
        raise ValueError(f"window {window} does not fit image of shape {a.shape}")
    L = float(max(a.max(), b.max())) if data_range is None else float(data_range)
    if L <= 0:
        L = 1.0
    c1 = (k1 * L) ** 2
    c2 = (k2 * L) ** 2
    kern = gaussian_window(window, sigma)
    smap = kernels.ssim_map(np.ascontiguousarray(a), np.ascontiguousarray(b), kern, c1, c2)
    return float(smap.mean())


def ssim_volume(a, b, window=DEFAULT_WINDOW, sigma=DEFAULT_SIGMA, data_range=None) -> float:
    """SSIM per z-slice of ``(Mz, My, Mx)`` volumes, averaged; one L for all slices."""
    a, b = _pair(a, b)
    if a.ndim == 2:
        return ssim(a, b, window, sigma, data_range)
    L = float(max(a.max(), b.max())) if data_range is None else data_range
    return float(np.mean([ssim(a[k], b[k], window, sigma, L) for k in range(a.shape[0])]))


def complex_error(z, s) -> float:
    """min over phi of ||e^{j phi} z - s|| / ||s||; absolute norm (with a warning) when s = 0."""
    z = np.asarray(z)
    s = np.asarray(s)
    if z.shape != s.shape:
        raise DimensionError(f"shapes differ: {z.shape} vs {s.shape}")
    ns = np.linalg.norm(s)
    if ns == 0:
        warnings.warn("zero reference; returning absolute error", RuntimeWarning, stacklevel=2)
        return float(np.linalg.norm(z))
    return float(np.linalg.norm(align_phase(z, s) - s) / ns)


def image_report(estimate, truth, shape, window=DEFAULT_WINDOW) -> MetricReport:
    """Magnitude RMSE/SSIM on the grid volume plus the complex error.

    SSIM uses L = max of the ground-truth magnitudes.
    """
    est = np.abs(np.asarray(estimate)).reshape(shape)
    ref = np.abs(np.asarray(truth)).reshape(shape)
    w = fit_window(shape[-2:], window)
    L = float(ref.max()) or None
    return MetricReport(rmse(ref, est), ssim_volume(ref, est, window=w, data_range=L), complex_error(estimate, truth))
