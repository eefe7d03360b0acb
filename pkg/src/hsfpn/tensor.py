"""Minimal deterministic dense-tensor engine for NCHW feature maps.

Values are 32-bit floats throughout; reductions (convolution, pooling means,
matrix products) accumulate in 64-bit and round once on output so that results
stay within ~1e-5 of a naive double-precision evaluation. All operations are
pure functions: the same inputs produce bitwise-identical outputs.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError, ValidationError

DTYPE = np.float32


def as_tensor(x, rank: int | None = None) -> np.ndarray:
    """Coerce `x` to a C-contiguous float32 array and check its rank.

    Rank may be at most 4, interpreted (N, C, H, W); `rank=n` requires
    exactly n dimensions. Zero-length extents are rejected.
    """
    arr = np.ascontiguousarray(x, dtype=DTYPE)
    if arr.ndim == 0:
        raise ShapeError("scalar is not a tensor; rank must be between 1 and 4")
    if arr.ndim > 4:
        raise ShapeError(f"rank {arr.ndim} exceeds the supported maximum of 4")
    if rank is not None and arr.ndim != rank:
        raise ShapeError(f"expected a rank-{rank} tensor, got rank {arr.ndim}")
    if min(arr.shape) < 1:
        raise ShapeError(f"all extents must be >= 1, got {arr.shape}")
    return arr


def check_finite(x: np.ndarray, what: str = "tensor") -> np.ndarray:
    """Reject NaN/Inf. Applied wherever values enter from files or generators."""
    if not np.isfinite(x).all():
        raise ValidationError(f"{what} contains non-finite values")
    return x


@dataclass(frozen=True)
class ConvSpec:
    """Static description of a stride-1 square convolution.

    `kernel` is 1 (no padding) or 3 (zero padding 1), so spatial extents are
    always preserved. `groups` must divide both channel counts.
    """

    in_channels: int
    out_channels: int
    kernel: int = 1
    groups: int = 1
    has_bias: bool = True

    def __post_init__(self):
        if self.in_channels < 1 or self.out_channels < 1:
            raise ValidationError("channel counts must be positive")
        if self.kernel not in (1, 3):
            raise ValidationError(f"kernel must be 1 or 3, got {self.kernel}")
        if self.groups < 1 or self.in_channels % self.groups or self.out_channels % self.groups:
            raise ValidationError(
                f"groups={self.groups} must divide in_channels={self.in_channels} "
                f"and out_channels={self.out_channels}"
            )

    @property
    def weight_shape(self) -> tuple:
        return (self.out_channels, self.in_channels // self.groups, self.kernel, self.kernel)

    @property
    def weight_count(self) -> int:
        o, i, kh, kw = self.weight_shape
        return o * i * kh * kw

    @property
    def param_count(self) -> int:
        return self.weight_count + (self.out_channels if self.has_bias else 0)

    def macs(self, height: int, width: int) -> int:
        """Multiply-accumulates for one sample at the given spatial extents."""
        return self.weight_count * height * width


@dataclass
class ConvLayer:
    """A ConvSpec bundled with its weight (and optional bias) arrays."""

    spec: ConvSpec
    weight: np.ndarray
    bias: np.ndarray | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return conv2d(x, self.spec, self.weight, self.bias)


def conv2d(x, spec: ConvSpec, weight, bias=None) -> np.ndarray:
    """Direct stride-1 convolution of an (N, C, H, W) tensor.

    kernel 3 uses zero padding 1, kernel 1 no padding, so the output is
    (N, out_channels, H, W). Each output value is the plain dot product of the
    kernel with its (zero-padded) input window, accumulated in float64.
    """
    x = as_tensor(x, rank=4)
    n, c, h, w = x.shape
    if c != spec.in_channels:
        raise ShapeError(f"input has {c} channels, spec expects {spec.in_channels}")
    weight = np.ascontiguousarray(weight, dtype=DTYPE)
    if weight.size != spec.weight_count:
        raise ShapeError(
            f"weight has {weight.size} elements, spec requires {spec.weight_count}"
        )
    if not np.isfinite(weight).all():
        raise ValidationError("convolution weight contains non-finite values")
    weight = weight.reshape(spec.weight_shape)
    if bias is not None:
        if not spec.has_bias:
            raise ValidationError("bias supplied for a bias-free ConvSpec")
        bias = np.ascontiguousarray(bias, dtype=DTYPE)
        if bias.shape != (spec.out_channels,):
            raise ShapeError(f"bias must have shape ({spec.out_channels},), got {bias.shape}")
        if not np.isfinite(bias).all():
            raise ValidationError("convolution bias contains non-finite values")

    k = spec.kernel
    if k == 3:
        x = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    # (N, C, H, W, k, k) windows over the padded input
    windows = sliding_window_view(x, (k, k), axis=(2, 3))

    cin_g = spec.in_channels // spec.groups
    cout_g = spec.out_channels // spec.groups
    w64 = weight.astype(np.float64)
    out = np.empty((n, spec.out_channels, h, w), dtype=np.float64)
    for g in range(spec.groups):
        xs = windows[:, g * cin_g:(g + 1) * cin_g].astype(np.float64)
        ws = w64[g * cout_g:(g + 1) * cout_g]
        out[:, g * cout_g:(g + 1) * cout_g] = np.einsum(
            "nchwij,ocij->nohw", xs, ws, optimize=True
        )
    if bias is not None:
        out += bias.astype(np.float64)[:, None, None]
    return out.astype(DTYPE)


def adaptive_pool(x, out_h: int, out_w: int, mode: str = "avg") -> np.ndarray:
    """Adaptive average or max pooling to an (out_h, out_w) grid.

    Output cell (i, j) covers input rows floor(i*H/out_h) .. ceil((i+1)*H/out_h)-1
    and the analogous columns, matching the usual adaptive-pooling rule.
    """
    x = as_tensor(x, rank=4)
    n, c, h, w = x.shape
    if mode not in ("avg", "max"):
        raise ValidationError(f"mode must be 'avg' or 'max', got {mode!r}")
    if out_h < 1 or out_w < 1:
        raise ShapeError("output extents must be >= 1")
    if out_h > h or out_w > w:
        raise ShapeError(f"output extents ({out_h}, {out_w}) exceed input ({h}, {w})")

    out = np.empty((n, c, out_h, out_w), dtype=DTYPE)
    for i in range(out_h):
        r0 = (i * h) // out_h
        r1 = ((i + 1) * h + out_h - 1) // out_h
        for j in range(out_w):
            c0 = (j * w) // out_w
            c1 = ((j + 1) * w + out_w - 1) // out_w
            window = x[:, :, r0:r1, c0:c1]
            if mode == "avg":
                out[:, :, i, j] = window.astype(np.float64).mean(axis=(2, 3))
            else:
                out[:, :, i, j] = window.max(axis=(2, 3))
    return out


def relu(x) -> np.ndarray:
    """Elementwise max(0, x)."""
    x = as_tensor(x)
    return np.maximum(x, DTYPE(0))


def softmax_rows(m) -> np.ndarray:
    """Row-wise softmax of a 2-d matrix, stabilised by max subtraction."""
    m = np.ascontiguousarray(m, dtype=DTYPE)
    if m.ndim != 2:
        raise ShapeError(f"softmax_rows expects a 2-d matrix, got rank {m.ndim}")
    z = m.astype(np.float64)
    z -= z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return (e / e.sum(axis=1, keepdims=True)).astype(DTYPE)


def upsample2x(x) -> np.ndarray:
    """Nearest-neighbour upsampling: each pixel becomes a 2x2 constant block."""
    x = as_tensor(x, rank=4)
    return x.repeat(2, axis=2).repeat(2, axis=3)


def matmul(a, b) -> np.ndarray:
    """(r, s) x (s, t) matrix product, accumulated in float64."""
    a = np.ascontiguousarray(a, dtype=DTYPE)
    b = np.ascontiguousarray(b, dtype=DTYPE)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("matmul expects 2-d matrices")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions differ: {a.shape} x {b.shape}")
    return (a.astype(np.float64) @ b.astype(np.float64)).astype(DTYPE)


def sigmoid(x) -> np.ndarray:
    """Elementwise logistic function (optional squashing of attention weights)."""
    x = as_tensor(x)
    z = x.astype(np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out.astype(DTYPE)
