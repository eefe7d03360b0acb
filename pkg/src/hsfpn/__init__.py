"""High-frequency and spatial perception feature pyramid toolkit."""

from .cost import ATTENTION_LAYOUTS, CostModel, OpCostReport, attention_cost, cost_rows, cost_table, count_params
from .errors import DegenerateBackgroundError, PgmParseError, ShapeError, ValidationError
from .frequency import (
    FilterSpec,
    ScrWindows,
    blob_scene,
    dct2,
    dct_matrix,
    filter_plane,
    highfreq_response,
    highpass_mask,
    idct2,
    lowcut_mask,
    scr,
    scr_filter_sweep,
)
from .hfp import HfpParams, channel_path, hfp_forward, spatial_path
from .io import read_pgm, read_tensor, write_pgm, write_tensor
from .pyramid import (
    FeaturePyramid,
    HsfpnWeights,
    LEVELS,
    PyramidConfig,
    SDP_LEVELS,
    build_laterals,
    hsfpn_forward,
    init_weights,
    load_weights,
    random_pyramid,
    read_pyramid_dir,
    save_weights,
    write_pyramid_dir,
)
from .sdp import (
    SdpParams,
    attention_weights,
    block_attention,
    partition_blocks,
    reassemble_blocks,
    sdp_forward,
)
from .tensor import (
    ConvLayer,
    ConvSpec,
    adaptive_pool,
    as_tensor,
    conv2d,
    matmul,
    relu,
    sigmoid,
    softmax_rows,
    upsample2x,
)

__version__ = "0.1.0"
