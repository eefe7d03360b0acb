import numpy as np
import pytest

from hsfpn import (
    ConvLayer,
    ConvSpec,
    CostModel,
    SdpParams,
    ShapeError,
    ValidationError,
    attention_cost,
    attention_weights,
    block_attention,
    cost_rows,
    cost_table,
    partition_blocks,
    reassemble_blocks,
    sdp_forward,
)

from oracles import naive_block_attention, naive_sdp_forward

RNG = np.random.default_rng(2718)


def proj_layer(rng, channels, zero=False, bias=False):
    spec = ConvSpec(channels, channels, kernel=1, has_bias=bias)
    if zero:
        weight = np.zeros(spec.weight_shape, np.float32)
    else:
        weight = rng.uniform(-0.5, 0.5, size=spec.weight_shape).astype(np.float32)
    b = np.zeros(channels, np.float32) if bias else None
    return ConvLayer(spec, weight, b)


def make_params(channels, block_h, block_w, seed=0, zero_v=False):
    rng = np.random.default_rng(seed)
    return SdpParams(
        q_conv=proj_layer(rng, channels),
        k_conv=proj_layer(rng, channels),
        v_conv=proj_layer(rng, channels, zero=zero_v),
        block_h=block_h,
        block_w=block_w,
    )


class TestPartition:
    def test_single_block(self):
        x = RNG.standard_normal((1, 3, 4, 4)).astype(np.float32)
        blocks = partition_blocks(x, 4, 4)
        assert blocks.shape == (1, 1, 16, 3)
        np.testing.assert_array_equal(blocks[0, 0, 0], x[0, :, 0, 0])
        np.testing.assert_array_equal(blocks[0, 0, 5], x[0, :, 1, 1])

    def test_block_count(self):
        x = RNG.standard_normal((1, 2, 32, 32)).astype(np.float32)
        blocks = partition_blocks(x, 4, 4)
        assert blocks.shape[1] == 64

    def test_roundtrip_bitwise(self):
        x = RNG.standard_normal((2, 3, 8, 12)).astype(np.float32)
        blocks = partition_blocks(x, 4, 4)
        back = reassemble_blocks(blocks, x.shape, 4, 4)
        assert back.tobytes() == x.tobytes()

    def test_roundtrip_single_block(self):
        x = RNG.standard_normal((1, 2, 4, 6)).astype(np.float32)
        back = reassemble_blocks(partition_blocks(x, 4, 6), x.shape, 4, 6)
        assert back.tobytes() == x.tobytes()

    def test_non_divisible_rejected(self):
        with pytest.raises(ShapeError):
            partition_blocks(RNG.standard_normal((1, 1, 6, 6)).astype(np.float32), 4, 4)

    def test_reassemble_extent_mismatch(self):
        x = RNG.standard_normal((1, 2, 8, 8)).astype(np.float32)
        blocks = partition_blocks(x, 4, 4)
        with pytest.raises(ShapeError):
            reassemble_blocks(blocks, x.shape, 2, 2)

    def test_row_major_block_order(self):
        x = np.zeros((1, 1, 4, 4), np.float32)
        x[0, 0, 0, 2] = 7.0  # second block of the top row
        blocks = partition_blocks(x, 2, 2)
        assert blocks[0, 1].max() == 7.0


class TestBlockAttention:
    def test_zero_query_uniform(self):
        hw, c = 6, 4
        q = np.zeros((hw, c), np.float32)
        k = RNG.standard_normal((hw, c)).astype(np.float32)
        v = RNG.standard_normal((hw, c)).astype(np.float32)
        a = attention_weights(q, k)
        np.testing.assert_allclose(a, np.full((hw, hw), 1.0 / hw), atol=1e-6)
        out = block_attention(q, k, v)
        np.testing.assert_allclose(out, np.tile(v.mean(axis=0), (hw, 1)), atol=1e-5)

    def test_single_pixel(self):
        q = RNG.standard_normal((1, 5)).astype(np.float32)
        k = RNG.standard_normal((1, 5)).astype(np.float32)
        v = RNG.standard_normal((1, 5)).astype(np.float32)
        np.testing.assert_array_equal(attention_weights(q, k), [[1.0]])
        np.testing.assert_allclose(block_attention(q, k, v), v, atol=1e-7)

    def test_matches_row_oracle(self):
        q = RNG.standard_normal((16, 8)).astype(np.float32)
        k = RNG.standard_normal((16, 8)).astype(np.float32)
        v = RNG.standard_normal((16, 8)).astype(np.float32)
        np.testing.assert_allclose(block_attention(q, k, v), naive_block_attention(q, k, v),
                                   atol=1e-5)

    def test_rows_sum_to_one(self):
        for _ in range(20):
            q = (RNG.standard_normal((9, 6)) * 5).astype(np.float32)
            k = (RNG.standard_normal((9, 6)) * 5).astype(np.float32)
            a = attention_weights(q, k)
            np.testing.assert_allclose(a.sum(axis=1), np.ones(9), atol=1e-6)

    def test_output_inside_value_envelope(self):
        for _ in range(20):
            q = (RNG.standard_normal((8, 5)) * 3).astype(np.float32)
            k = (RNG.standard_normal((8, 5)) * 3).astype(np.float32)
            v = RNG.standard_normal((8, 5)).astype(np.float32)
            out = block_attention(q, k, v)
            assert (out >= v.min(axis=0) - 1e-6).all()
            assert (out <= v.max(axis=0) + 1e-6).all()

    def test_scale_cancellation(self):
        q = RNG.standard_normal((7, 4)).astype(np.float32)
        k = RNG.standard_normal((7, 4)).astype(np.float32)
        for s in (0.25, 2.0, 7.5):
            a = attention_weights(q, k)
            b = attention_weights((q * s).astype(np.float32), (k / s).astype(np.float32))
            np.testing.assert_allclose(a, b, atol=1e-6)


class TestSdpForward:
    def test_zero_value_path_is_identity(self):
        c_low = RNG.standard_normal((1, 4, 8, 8)).astype(np.float32)
        p_up = RNG.standard_normal((1, 4, 4, 4)).astype(np.float32)
        params = make_params(4, 4, 4, zero_v=True)
        np.testing.assert_array_equal(sdp_forward(c_low, p_up, params), c_low)

    def test_single_block_equals_global_attention(self):
        c_low = RNG.standard_normal((1, 4, 4, 4)).astype(np.float32)
        p_up = RNG.standard_normal((1, 4, 2, 2)).astype(np.float32)
        params = make_params(4, 4, 4, seed=9)
        out = sdp_forward(c_low, p_up, params)

        up = np.repeat(np.repeat(p_up, 2, axis=2), 2, axis=3)
        q = partition_blocks(params.q_conv(c_low), 4, 4)[0, 0]
        k = partition_blocks(params.k_conv(up), 4, 4)[0, 0]
        v = partition_blocks(params.v_conv(up), 4, 4)[0, 0]
        att = block_attention(q, k, v)
        ref = c_low + reassemble_blocks(att[None, None], c_low.shape, 4, 4)
        np.testing.assert_allclose(out, ref, atol=1e-6)

    def test_matches_composed_oracle(self):
        c_low = RNG.standard_normal((1, 4, 8, 8)).astype(np.float32)
        p_up = RNG.standard_normal((1, 4, 4, 4)).astype(np.float32)
        params = make_params(4, 4, 4, seed=17)
        out = sdp_forward(c_low, p_up, params)
        ref = naive_sdp_forward(c_low, p_up, params)
        np.testing.assert_allclose(out, ref, atol=1e-4)

    def test_block_locality(self):
        # block-aligned perturbation of the upper feature touches only its own output block
        c = 3
        c_low = RNG.standard_normal((1, c, 8, 8)).astype(np.float32)
        p_up = RNG.standard_normal((1, c, 4, 4)).astype(np.float32)
        params = make_params(c, 4, 4, seed=23)
        base = sdp_forward(c_low, p_up, params)

        perturbed = p_up.copy()
        perturbed[:, :, 0:2, 0:2] += 1.0  # upsamples into block (0, 0) only
        out = sdp_forward(c_low, perturbed, params)
        assert not np.array_equal(out[:, :, 0:4, 0:4], base[:, :, 0:4, 0:4])
        assert out[:, :, 0:4, 4:8].tobytes() == base[:, :, 0:4, 4:8].tobytes()
        assert out[:, :, 4:8, :].tobytes() == base[:, :, 4:8, :].tobytes()

    def test_extent_relation_enforced(self):
        params = make_params(4, 4, 4)
        c_low = RNG.standard_normal((1, 4, 8, 8)).astype(np.float32)
        with pytest.raises(ShapeError):
            sdp_forward(c_low, RNG.standard_normal((1, 4, 8, 8)).astype(np.float32), params)

    def test_unset_blocks_rejected(self):
        rng = np.random.default_rng(0)
        params = SdpParams(proj_layer(rng, 4), proj_layer(rng, 4), proj_layer(rng, 4))
        c_low = RNG.standard_normal((1, 4, 8, 8)).astype(np.float32)
        p_up = RNG.standard_normal((1, 4, 4, 4)).astype(np.float32)
        with pytest.raises(ValidationError):
            sdp_forward(c_low, p_up, params)

    def test_batched_matches_per_sample(self):
        c_low = RNG.standard_normal((2, 4, 8, 8)).astype(np.float32)
        p_up = RNG.standard_normal((2, 4, 4, 4)).astype(np.float32)
        params = make_params(4, 4, 4, seed=31)
        both = sdp_forward(c_low, p_up, params)
        for s in range(2):
            single = sdp_forward(c_low[s:s + 1], p_up[s:s + 1], params)
            np.testing.assert_array_equal(both[s:s + 1], single)


class TestAttentionCost:
    def test_ratio_identities(self):
        for _ in range(100):
            model = CostModel(
                n=int(RNG.integers(1, 64)),
                h=int(RNG.integers(1, 32)),
                w=int(RNG.integers(1, 32)),
                c=int(RNG.integers(1, 512)),
            )
            vit = attention_cost(model, "vit")
            sdp = attention_cost(model, "sdp")
            glo = attention_cost(model, "global")
            hw = model.h * model.w
            assert sdp * model.n == vit * hw
            assert glo == vit * hw

    def test_single_block_sdp_equals_global(self):
        model = CostModel(n=1, h=5, w=7, c=16)
        assert attention_cost(model, "sdp") == attention_cost(model, "global")

    def test_linear_in_channels(self):
        a = CostModel(n=4, h=3, w=3, c=8)
        b = CostModel(n=4, h=3, w=3, c=16)
        for layout in ("vit", "sdp", "global"):
            assert attention_cost(b, layout) == 2 * attention_cost(a, layout)

    def test_rows_and_table(self):
        model = CostModel(n=4, h=2, w=2, c=8)
        rows = cost_rows(model)
        assert [r["method"] for r in rows] == ["vit", "sdp", "global"]
        assert [r["multiplier"] for r in rows] == ["1", "hw/n", "hw"]
        table = cost_table(model)
        assert "hw/n" in table and "multiplier" in table

    def test_invalid_layout(self):
        with pytest.raises(ValidationError):
            attention_cost(CostModel(1, 1, 1, 1), "dense")

    def test_positive_fields_required(self):
        with pytest.raises(ValidationError):
            CostModel(0, 1, 1, 1)
