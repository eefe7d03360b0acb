"""High-frequency perception: channel and spatial reweighting of a feature map.

The module derives two attention signals from the low-cut filtered response of
its input: a per-channel weight vector (channel path) and a per-pixel mask
(spatial path). Both multiply the *original* input, the products are summed,
and a 3x3 convolution fuses the result.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .frequency import FilterSpec, highfreq_response
from .tensor import ConvLayer, adaptive_pool, as_tensor, relu, sigmoid

DEFAULT_POOL_EXTENT = 16


@dataclass
class HfpParams:
    """Weights for one pyramid level.

    gap_conv / gmp_conv are grouped 1x1 convolutions (C -> C) applied to the
    pooled-and-summed average/max branches; merge_conv maps their GAP-first
    concatenation (2C -> C). spatial_conv collapses C channels to one plane,
    fuse_conv is the 3x3 output convolution (C -> C). `squash` optionally
    passes both attention signals through a sigmoid before they are used.
    """

    k: int
    gap_conv: ConvLayer
    gmp_conv: ConvLayer
    merge_conv: ConvLayer
    spatial_conv: ConvLayer
    fuse_conv: ConvLayer
    filter: FilterSpec
    squash: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"pooling extent k must be >= 1, got {self.k}")
        c = self.gap_conv.spec.in_channels
        checks = (
            (self.gap_conv.spec, c, c, "gap_conv"),
            (self.gmp_conv.spec, c, c, "gmp_conv"),
            (self.merge_conv.spec, 2 * c, c, "merge_conv"),
            (self.spatial_conv.spec, c, 1, "spatial_conv"),
            (self.fuse_conv.spec, c, c, "fuse_conv"),
        )
        for spec, cin, cout, name in checks:
            if spec.in_channels != cin or spec.out_channels != cout:
                raise ValidationError(
                    f"{name} must map {cin} -> {cout} channels, "
                    f"got {spec.in_channels} -> {spec.out_channels}"
                )
        if self.fuse_conv.spec.kernel != 3:
            raise ValidationError("fuse_conv must be a 3x3 convolution")

    @property
    def channels(self) -> int:
        return self.gap_conv.spec.in_channels

    def with_pool_extent(self, k: int) -> "HfpParams":
        return replace(self, k=k)


def channel_path(f, params: HfpParams) -> np.ndarray:
    """Per-channel weights u_cp with dims (N, C, 1, 1).

    Pipeline: adaptive avg/max pooling of `f` to (k, k), ReLU on each branch,
    spatial summation to two length-C vectors, separate grouped 1x1
    convolutions, GAP-first concatenation, and a final grouped 1x1 convolution
    back to C channels.
    """
    f = as_tensor(f, rank=4)
    avg = relu(adaptive_pool(f, params.k, params.k, "avg"))
    mx = relu(adaptive_pool(f, params.k, params.k, "max"))
    avg_vec = avg.astype(np.float64).sum(axis=(2, 3), keepdims=True).astype(f.dtype)
    max_vec = mx.astype(np.float64).sum(axis=(2, 3), keepdims=True).astype(f.dtype)
    scores = np.concatenate([params.gap_conv(avg_vec), params.gmp_conv(max_vec)], axis=1)
    u_cp = params.merge_conv(scores)
    return sigmoid(u_cp) if params.squash else u_cp


def spatial_path(f, params: HfpParams) -> np.ndarray:
    """Per-pixel mask u_sp with dims (N, 1, H, W): a 1x1 convolution of `f` to one channel."""
    u_sp = params.spatial_conv(f)
    return sigmoid(u_sp) if params.squash else u_sp


def hfp_forward(c, params: HfpParams, level: int) -> np.ndarray:
    """Full module: filter, reweight along channels and pixels, fuse.

    The filtered response feeds both paths; their outputs broadcast against
    the raw input `c` (u_cp over space, u_sp over channels), the two Hadamard
    products are summed pixel by pixel, and fuse_conv produces the output.
    Dims are preserved.
    """
    c = as_tensor(c, rank=4)
    f = highfreq_response(c, params.filter, level)
    u_cp = channel_path(f, params)
    u_sp = spatial_path(f, params)
    return params.fuse_conv(u_cp * c + u_sp * c)
