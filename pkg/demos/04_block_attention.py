"""Block-partitioned pixel attention, step by step.

Shows the partition layout, the row-stochastic similarity matrix inside one
block, and the key property that makes the layout cheap: nothing flows across
block boundaries.

Run from the repository root:  python demos/04_block_attention.py
"""

import numpy as np

from hsfpn import (
    ConvLayer,
    ConvSpec,
    SdpParams,
    attention_weights,
    block_attention,
    partition_blocks,
    reassemble_blocks,
    sdp_forward,
)

rng = np.random.default_rng(1)

print("An 8x8 map with 4x4 blocks becomes a 2x2 grid of 16-pixel matrices:")
x = rng.standard_normal((1, 3, 8, 8)).astype(np.float32)
blocks = partition_blocks(x, 4, 4)
print(f"  partition_blocks: {x.shape} -> {blocks.shape}  (N, blocks, pixels, channels)")
back = reassemble_blocks(blocks, x.shape, 4, 4)
print(f"  round trip bitwise exact: {back.tobytes() == x.tobytes()}")

print("\nInside one block, every pixel attends to every pixel of its partner block:")
q = rng.standard_normal((16, 8)).astype(np.float32)
k = rng.standard_normal((16, 8)).astype(np.float32)
v = rng.standard_normal((16, 8)).astype(np.float32)
a = attention_weights(q, k)
print(f"  similarity matrix {a.shape}, every row sums to "
      f"{a.sum(axis=1).min():.6f}..{a.sum(axis=1).max():.6f}")
out = block_attention(q, k, v)
inside = (out >= v.min(axis=0)).all() and (out <= v.max(axis=0)).all()
print(f"  outputs are convex mixes of the value rows (inside envelope: {inside})")

print("\nCross-attention fusion between pyramid neighbours:")


def proj(channels):
    spec = ConvSpec(channels, channels, kernel=1, has_bias=False)
    return ConvLayer(spec, rng.uniform(-0.5, 0.5, spec.weight_shape).astype(np.float32))


params = SdpParams(q_conv=proj(3), k_conv=proj(3), v_conv=proj(3), block_h=4, block_w=4)
c_low = rng.standard_normal((1, 3, 8, 8)).astype(np.float32)
p_up = rng.standard_normal((1, 3, 4, 4)).astype(np.float32)
fused = sdp_forward(c_low, p_up, params)
print(f"  sdp_forward: lower {c_low.shape} + upper {p_up.shape} -> {fused.shape}")

print("\nLocality: perturbing one upper block touches exactly one output block.")
perturbed = p_up.copy()
perturbed[:, :, 0:2, 0:2] += 1.0  # upsamples into block (0, 0)
fused2 = sdp_forward(c_low, perturbed, params)
delta = np.abs(fused2 - fused).max(axis=(0, 1))
print("  max |change| per 4x4 output block:")
for bi in range(2):
    print("   ", "  ".join(f"{delta[bi * 4:(bi + 1) * 4, bj * 4:(bj + 1) * 4].max():.4f}"
                           for bj in range(2)))
