"""Frequency-domain toolbox: separable 2D DCT, low-cut masks, and saliency.

The transform pair is the orthonormal type-II DCT and its inverse, built as
explicit cosine matrices (direct separable form; no FFT). Orthonormality makes
the round trip exact to float32 precision, preserves sum-of-squares, and turns
masked filtering into an orthogonal projection, so filtering twice equals
filtering once.

Low frequencies of a DCT plane sit in the top-left corner. The binary masks
here zero that corner, either as a fraction of the plane (``highpass_mask``)
or as an absolute coefficient region (``lowcut_mask``), and
``highfreq_response`` applies the fractional mask per channel. The
signal-to-clutter ratio ``scr`` quantifies how salient a small target is
against its surroundings before and after such filtering.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .errors import DegenerateBackgroundError, ShapeError, ValidationError
from .tensor import DTYPE, as_tensor, check_finite

PYRAMID_LEVELS = (2, 3, 4, 5)

# Filtering is applied only on the two highest-resolution levels by default.
DEFAULT_FILTER_LEVELS = (2, 3)


@dataclass(frozen=True)
class FilterSpec:
    """Cut-off fraction plus per-level enable flags for the low-cut filter."""

    alpha: float
    per_level_enabled: Mapping[int, bool] = field(
        default_factory=lambda: {lv: lv in DEFAULT_FILTER_LEVELS for lv in PYRAMID_LEVELS}
    )

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        for level in self.per_level_enabled:
            if level not in PYRAMID_LEVELS:
                raise ValidationError(f"unknown pyramid level {level}")

    def enabled(self, level: int) -> bool:
        if level not in PYRAMID_LEVELS:
            raise ValidationError(f"unknown pyramid level {level}")
        return bool(self.per_level_enabled.get(level, False))


@lru_cache(maxsize=None)
def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal type-II DCT matrix of order n (float64, cached)."""
    j = np.arange(n, dtype=np.float64)
    k = j[:, None]
    mat = np.cos(np.pi * (2.0 * j[None, :] + 1.0) * k / (2.0 * n))
    mat *= np.sqrt(2.0 / n)
    mat[0] *= np.sqrt(0.5)
    mat.setflags(write=False)
    return mat


def _plane_transform(planes: np.ndarray, row_mat: np.ndarray, col_mat: np.ndarray) -> np.ndarray:
    # planes: (..., H, W); applies row_mat along H and col_mat along W in float64
    z = planes.astype(np.float64)
    return (row_mat @ z @ col_mat.T).astype(DTYPE)


def _per_plane(x, forward: bool) -> np.ndarray:
    if np.ndim(x) == 2:
        x = as_tensor(x, rank=2)
    else:
        x = as_tensor(x, rank=4)
    h, w = x.shape[-2], x.shape[-1]
    dh, dw = dct_matrix(h), dct_matrix(w)
    if not forward:
        dh, dw = dh.T, dw.T
    return _plane_transform(x, dh, dw)


def dct2(x) -> np.ndarray:
    """Orthonormal 2D DCT of each (sample, channel) plane.

    Accepts an (N, C, H, W) tensor or a bare (H, W) plane; output extents
    equal input extents and the sum of squares is preserved.
    """
    return _per_plane(x, forward=True)


def idct2(x) -> np.ndarray:
    """Exact inverse of :func:`dct2` (orthonormal type-III along both axes)."""
    return _per_plane(x, forward=False)


def highpass_mask(h: int, w: int, alpha: float) -> np.ndarray:
    """Binary (h, w) mask that zeroes the top-left corner of a DCT plane.

    Entry (u, v) is 0 iff u < alpha*h and v < alpha*w, with the comparison on
    the real-valued products (no rounding): alpha=0.25 on h=10 zeroes
    u in {0, 1, 2}. alpha=0 passes everything, alpha=1 blocks everything.
    """
    if h < 1 or w < 1:
        raise ShapeError("mask extents must be >= 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")
    u = np.arange(h, dtype=np.float64)[:, None]
    v = np.arange(w, dtype=np.float64)[None, :]
    blocked = (u < alpha * h) & (v < alpha * w)
    return (~blocked).astype(DTYPE)


def lowcut_mask(h: int, w: int, cut_rows: int, cut_cols: int) -> np.ndarray:
    """Absolute-region variant: zeroes coefficients (u, v) with u < cut_rows and v < cut_cols."""
    if h < 1 or w < 1:
        raise ShapeError("mask extents must be >= 1")
    if cut_rows < 0 or cut_cols < 0:
        raise ValidationError("cut extents must be >= 0")
    mask = np.ones((h, w), dtype=DTYPE)
    mask[: min(cut_rows, h), : min(cut_cols, w)] = 0.0
    return mask


def filter_plane(plane, mask) -> np.ndarray:
    """idct2(mask * dct2(plane)) for a single (H, W) plane."""
    plane = as_tensor(plane, rank=2)
    mask = as_tensor(mask, rank=2)
    if mask.shape != plane.shape:
        raise ShapeError(f"mask shape {mask.shape} does not match plane {plane.shape}")
    return idct2(dct2(plane) * mask)


def highfreq_response(c, spec: FilterSpec, level: int) -> np.ndarray:
    """Per-channel low-cut filtering of an (N, C, H, W) tensor.

    When the filter is disabled at `level` the input is returned unchanged
    (bitwise). Otherwise every channel plane is transformed, masked with
    :func:`highpass_mask`, and transformed back; output dims equal input dims.
    """
    c = as_tensor(c, rank=4)
    if not spec.enabled(level):
        return c
    mask = highpass_mask(c.shape[2], c.shape[3], spec.alpha)
    return idct2(dct2(c) * mask)


# ---------------------------------------------------------------------------
# Signal-to-clutter ratio
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScrWindows:
    """Target and neighbourhood windows for the saliency ratio.

    Both windows are squares centred on `target_center` (row, col); they are
    clipped to the image bounds and statistics use the clipped regions. The
    background region is the annulus: neighbourhood window minus target window.
    """

    target_center: tuple
    target_extent: int = 40
    neighborhood_extent: int = 80

    def __post_init__(self):
        if self.target_extent <= 0:
            raise ValidationError("target extent must be positive")
        if self.neighborhood_extent <= self.target_extent:
            raise ValidationError("neighbourhood extent must exceed target extent")

    def _clip(self, extent: int, h: int, w: int):
        r, c = self.target_center
        r0 = max(int(r) - extent // 2, 0)
        c0 = max(int(c) - extent // 2, 0)
        r1 = min(r0 + extent, h)
        c1 = min(c0 + extent, w)
        return r0, r1, c0, c1

    def target_slice(self, h: int, w: int):
        r0, r1, c0, c1 = self._clip(self.target_extent, h, w)
        if r0 >= r1 or c0 >= c1:
            raise ValidationError("target window lies outside the image")
        return slice(r0, r1), slice(c0, c1)

    def neighborhood_slice(self, h: int, w: int):
        r0, r1, c0, c1 = self._clip(self.neighborhood_extent, h, w)
        return slice(r0, r1), slice(c0, c1)


def scr(image, windows: ScrWindows) -> float:
    """|mean(target) - mean(background)| / std(background).

    `image` is a single-channel 2-d array. The background is the neighbourhood
    annulus around the target window; its standard deviation is the population
    value (ddof=0). A numerically constant background raises
    :class:`DegenerateBackgroundError`.
    """
    image = as_tensor(image, rank=2)
    h, w = image.shape
    trs, tcs = windows.target_slice(h, w)
    nrs, ncs = windows.neighborhood_slice(h, w)

    annulus = np.zeros(image.shape, dtype=bool)
    annulus[nrs, ncs] = True
    annulus[trs, tcs] = False
    background = image[annulus].astype(np.float64)
    if background.size == 0:
        raise ValidationError("neighbourhood window adds no pixels beyond the target window")

    mu_t = image[trs, tcs].astype(np.float64).mean()
    mu_b = background.mean()
    sigma_b = background.std()
    if sigma_b < 1e-9:
        raise DegenerateBackgroundError(
            f"background standard deviation {sigma_b:.3e} is below 1e-9"
        )
    return float(abs(mu_t - mu_b) / sigma_b)


def scr_filter_sweep(image, windows: ScrWindows, cuts) -> list:
    """SCR after low-cut filtering for each (cut_rows, cut_cols) region.

    Returns [(cut_rows, cut_cols, scr), ...] in the given order. A cut of
    (0, 0) leaves the image untouched.
    """
    image = as_tensor(image, rank=2)
    h, w = image.shape
    coeffs = dct2(image)
    out = []
    for cut_rows, cut_cols in cuts:
        filtered = idct2(coeffs * lowcut_mask(h, w, cut_rows, cut_cols))
        out.append((int(cut_rows), int(cut_cols), scr(filtered, windows)))
    return out


def blob_scene(
    height: int = 100,
    width: int = 100,
    background: float = 0.2,
    amplitude: float = 0.6,
    blob_sigma: float = 2.5,
    ramp_amplitude: float = 0.2,
) -> np.ndarray:
    """Deterministic test scene: flat background + tiny Gaussian blob + low-frequency ramp.

    The blob sits at the image centre; the diagonal ramp plays the role of
    slowly varying clutter. Removing a moderate low-frequency region raises
    the blob's SCR (the ramp goes away), while aggressive cuts start to erode
    the blob itself and the SCR falls again.
    """
    rows = np.arange(height, dtype=np.float64)[:, None]
    cols = np.arange(width, dtype=np.float64)[None, :]
    ramp = ramp_amplitude * (rows + cols) / max(height + width - 2, 1)
    cr, cc = height // 2, width // 2
    blob = amplitude * np.exp(-((rows - cr) ** 2 + (cols - cc) ** 2) / (2.0 * blob_sigma ** 2))
    scene = background + ramp + blob
    return check_finite(scene.astype(DTYPE), "blob scene")
