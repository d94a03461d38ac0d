"""Image difference metrics used by the comparison harness.

RMSE on the 0-255 subpixel scale, SSIM on the luma channel with the original
reference parameterization (11x11 Gaussian window, sigma 1.5, K1 0.01,
K2 0.03, L 255), silhouette-tolerant coverage agreement between written-pixel
masks, and a high-pass RMS estimator for residual aliasing energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from skimage.metrics import structural_similarity

# Rec.601 luma weights for the grayscale reduction ahead of SSIM.
_LUMA = np.array([0.299, 0.587, 0.114])


def _as_float(img):
    return np.asarray(img).astype(np.float64)


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")


def rmse(a, b):
    """Root-mean-squared per-channel difference on the 0-255 scale."""
    fa, fb = _as_float(a), _as_float(b)
    _check_same_shape(fa, fb)
    d = fa - fb
    return float(np.sqrt(np.mean(d * d)))


def luma(img):
    """(H, W[, 3]) image -> (H, W) luma, same scale as the input."""
    f = _as_float(img)
    if f.ndim == 2:
        return f
    if f.ndim == 3 and f.shape[2] == 3:
        return f @ _LUMA
    raise ValueError("expected (H, W) or (H, W, 3) image")


def ssim(a, b):
    """Mean structural similarity over luma, original reference constants."""
    fa, fb = luma(a), luma(b)
    _check_same_shape(fa, fb)
    if min(fa.shape) < 11:
        raise ValueError("image smaller than the 11x11 SSIM window")
    return float(structural_similarity(
        fa, fb, data_range=255.0, gaussian_weights=True, sigma=1.5,
        use_sample_covariance=False, K1=0.01, K2=0.03))


def coverage_agreement(mask_a, mask_b, erode=1):
    """Intersection-over-union of the two masks after eroding both.

    The erosion forgives one-pixel silhouette disagreement between
    renderers; identical or both-empty masks give 1.0.
    """
    ma = np.asarray(mask_a, dtype=bool)
    mb = np.asarray(mask_b, dtype=bool)
    _check_same_shape(ma, mb)
    if erode > 0:
        ma = ndimage.binary_erosion(ma, iterations=int(erode))
        mb = ndimage.binary_erosion(mb, iterations=int(erode))
    union = int(np.count_nonzero(ma | mb))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(ma & mb))
    return inter / union


def highpass_rms(img, size=3):
    """RMS of the residual after removing a local box average from luma.

    A cheap stand-in for high-frequency energy: aliasing shimmer on a field
    that should be flat shows up directly, smooth shading mostly cancels.
    """
    y = luma(img)
    lo = ndimage.uniform_filter(y, size=int(size), mode="nearest")
    r = y - lo
    return float(np.sqrt(np.mean(r * r)))


@dataclass
class QualityReport:
    """Difference summary between one test image set and a reference."""

    rmse: float
    ssim: float
    coverage: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        d = {"rmse": self.rmse, "ssim": self.ssim}
        if self.coverage is not None:
            d["coverage"] = self.coverage
        d.update(self.extra)
        return d


def compare_images(test, reference, mask_test=None, mask_ref=None, erode=1):
    """QualityReport for a pair of images (plus optional coverage masks)."""
    cov = None
    if mask_test is not None and mask_ref is not None:
        cov = coverage_agreement(mask_test, mask_ref, erode=erode)
    return QualityReport(rmse=rmse(test, reference),
                         ssim=ssim(test, reference), coverage=cov)
