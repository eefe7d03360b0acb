"""Spatial dependency perception: block-partitioned pixel-level cross-attention.

Queries come from the lower feature, keys and values from the upsampled upper
feature. All three are cut into blocks the size of the pyramid's top level;
attention runs independently inside each block (n similarity matrices of size
hw x hw, not one n x n matrix across blocks), so no information crosses block
boundaries.
"""

from dataclasses import dataclass, replace
from math import sqrt

import numpy as np

from .errors import ShapeError, ValidationError
from .tensor import ConvLayer, as_tensor, matmul, softmax_rows, upsample2x


@dataclass
class SdpParams:
    """Projection weights and block extents for one pyramid level.

    q_conv / k_conv / v_conv are 1x1 convolutions preserving the channel
    count (bias-free by default). Block extents equal the top pyramid level's
    spatial extents; leave them None to have the pyramid assembly fill them in
    from the input at forward time.
    """

    q_conv: ConvLayer
    k_conv: ConvLayer
    v_conv: ConvLayer
    block_h: int | None = None
    block_w: int | None = None

    def __post_init__(self):
        c = self.q_conv.spec.in_channels
        for name, layer in (("q_conv", self.q_conv), ("k_conv", self.k_conv), ("v_conv", self.v_conv)):
            spec = layer.spec
            if spec.in_channels != c or spec.out_channels != c:
                raise ValidationError(f"{name} must preserve the channel count {c}")
            if spec.kernel != 1:
                raise ValidationError(f"{name} must be a 1x1 convolution")
        if (self.block_h is None) != (self.block_w is None):
            raise ValidationError("block extents must be set together")
        if self.block_h is not None and (self.block_h < 1 or self.block_w < 1):
            raise ValidationError("block extents must be >= 1")

    @property
    def channels(self) -> int:
        return self.q_conv.spec.in_channels

    def with_blocks(self, block_h: int, block_w: int) -> "SdpParams":
        return replace(self, block_h=block_h, block_w=block_w)


def partition_blocks(x, block_h: int, block_w: int) -> np.ndarray:
    """Cut an (N, C, H, W) tensor into per-block pixel matrices.

    Returns an (N, n, block_h*block_w, C) array: blocks ordered row-major over
    the block grid, pixels row-major inside each block, each pixel a C-vector.
    Block extents must divide the spatial extents.
    """
    x = as_tensor(x, rank=4)
    n_, c, h, w = x.shape
    if block_h < 1 or block_w < 1:
        raise ShapeError("block extents must be >= 1")
    if h % block_h or w % block_w:
        raise ShapeError(
            f"block extents ({block_h}, {block_w}) do not divide spatial extents ({h}, {w})"
        )
    gh, gw = h // block_h, w // block_w
    blocks = x.reshape(n_, c, gh, block_h, gw, block_w)
    blocks = blocks.transpose(0, 2, 4, 3, 5, 1)  # N, gh, gw, bh, bw, C
    return np.ascontiguousarray(blocks.reshape(n_, gh * gw, block_h * block_w, c))


def reassemble_blocks(blocks, dims, block_h: int, block_w: int) -> np.ndarray:
    """Exact inverse of :func:`partition_blocks` for the given (N, C, H, W) dims."""
    blocks = np.ascontiguousarray(blocks)
    if blocks.ndim != 4:
        raise ShapeError(f"expected (N, n, hw, C) blocks, got rank {blocks.ndim}")
    n_, c, h, w = dims
    if block_h < 1 or block_w < 1 or h % block_h or w % block_w:
        raise ShapeError(
            f"block extents ({block_h}, {block_w}) do not divide spatial extents ({h}, {w})"
        )
    gh, gw = h // block_h, w // block_w
    if blocks.shape != (n_, gh * gw, block_h * block_w, c):
        raise ShapeError(
            f"block array {blocks.shape} does not match {gh * gw} blocks of "
            f"{block_h}x{block_w} pixels over dims {tuple(dims)}"
        )
    x = blocks.reshape(n_, gh, gw, block_h, block_w, c)
    x = x.transpose(0, 5, 1, 3, 2, 4)
    return np.ascontiguousarray(x.reshape(n_, c, h, w))


def attention_weights(q, k) -> np.ndarray:
    """Row-stochastic similarity matrix softmax(q @ k.T / sqrt(C)) for one block."""
    q = np.ascontiguousarray(q, dtype=np.float32)
    k = np.ascontiguousarray(k, dtype=np.float32)
    if q.ndim != 2 or k.ndim != 2 or q.shape != k.shape:
        raise ShapeError(f"expected equal (hw, C) matrices, got {q.shape} and {k.shape}")
    c = q.shape[1]
    logits = matmul(q, np.ascontiguousarray(k.T)) / np.float32(sqrt(c))
    return softmax_rows(logits)


def block_attention(q, k, v) -> np.ndarray:
    """Attention output a @ v for one block, where a = attention_weights(q, k)."""
    v = np.ascontiguousarray(v, dtype=np.float32)
    if v.shape != np.shape(q):
        raise ShapeError(f"value block {v.shape} does not match query block {np.shape(q)}")
    return matmul(attention_weights(q, k), v)


def sdp_forward(c_low, p_up, params: SdpParams) -> np.ndarray:
    """Cross-attention fusion of a feature with its upsampled upper neighbour.

    `p_up` must have half the spatial extents of `c_low` and the same channel
    count. It is upsampled, the three 1x1 projections produce Q (from c_low)
    and K, V (from the upsampled map), attention runs per block, and the
    reassembled result is added to `c_low`.
    """
    c_low = as_tensor(c_low, rank=4)
    p_up = as_tensor(p_up, rank=4)
    n_, c, h, w = c_low.shape
    if p_up.shape[0] != n_ or p_up.shape[1] != c:
        raise ShapeError(f"feature pair disagrees on batch/channels: {c_low.shape} vs {p_up.shape}")
    if p_up.shape[2] * 2 != h or p_up.shape[3] * 2 != w:
        raise ShapeError(
            f"upper feature {p_up.shape[2:]} must be half the lower extents {(h, w)}"
        )
    if params.block_h is None:
        raise ValidationError("SdpParams block extents are unset")
    if params.channels != c:
        raise ShapeError(f"projections expect {params.channels} channels, input has {c}")

    up = upsample2x(p_up)
    q = partition_blocks(params.q_conv(c_low), params.block_h, params.block_w)
    k = partition_blocks(params.k_conv(up), params.block_h, params.block_w)
    v = partition_blocks(params.v_conv(up), params.block_h, params.block_w)

    out = np.empty_like(v)
    for s in range(n_):
        for j in range(q.shape[1]):
            out[s, j] = block_attention(q[s, j], k[s, j], v[s, j])
    return c_low + reassemble_blocks(out, c_low.shape, params.block_h, params.block_w)
