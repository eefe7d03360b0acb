"""Cost accounting: attention-layout complexity and per-module parameter/MAC counts.

Attention costs follow the dominant-term calculus for three layouts over an
input split into n blocks of h x w pixels with c channels:

    block-token (``vit``):    n^2 * h*w * c      multiplier 1
    in-block    (``sdp``):    n * (h*w)^2 * c    multiplier hw/n
    all-pixel   (``global``): (n*h*w)^2 * c      multiplier hw

Each count includes both the similarity and the value-weighting product as a
uniform factor of two, so the pairwise ratios match the multipliers exactly.
"""

import json
from dataclasses import dataclass, field

from .errors import ValidationError

ATTENTION_LAYOUTS = ("vit", "sdp", "global")

_COMPLEXITY = {"vit": "n^2*h*w*c", "sdp": "n*(h*w)^2*c", "global": "(n*h*w)^2*c"}
_MULTIPLIER = {"vit": "1", "sdp": "hw/n", "global": "hw"}


@dataclass(frozen=True)
class CostModel:
    """Block count, block extents, and channel count for an attention layout."""

    n: int
    h: int
    w: int
    c: int

    def __post_init__(self):
        if min(self.n, self.h, self.w, self.c) < 1:
            raise ValidationError("all cost-model fields must be positive")


def attention_cost(model: CostModel, layout: str) -> int:
    """Multiply-accumulate count of the dominant attention terms (exact integer)."""
    if layout not in ATTENTION_LAYOUTS:
        raise ValidationError(f"layout must be one of {ATTENTION_LAYOUTS}, got {layout!r}")
    hw = model.h * model.w
    if layout == "vit":
        return 2 * model.n * model.n * hw * model.c
    if layout == "sdp":
        return 2 * model.n * hw * hw * model.c
    return 2 * (model.n * hw) ** 2 * model.c


def cost_rows(model: CostModel) -> list:
    """One dict per layout: method, complexity, multiplier, and MAC count."""
    return [
        {
            "method": layout,
            "complexity": _COMPLEXITY[layout],
            "multiplier": _MULTIPLIER[layout],
            "macs": attention_cost(model, layout),
        }
        for layout in ATTENTION_LAYOUTS
    ]


def cost_table(model: CostModel) -> str:
    """Aligned-column text table of the three layouts."""
    rows = cost_rows(model)
    headers = ("method", "complexity", "multiplier", "macs")
    cells = [[str(r[h]) for h in headers] for r in rows]
    widths = [max(len(h), *(len(row[i]) for row in cells)) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for row in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Parameter and MAC accounting for the pyramid modules
# ---------------------------------------------------------------------------

@dataclass
class LayerCost:
    params: int = 0
    macs: int = 0

    def __iadd__(self, other):
        self.params += other.params
        self.macs += other.macs
        return self


@dataclass
class OpCostReport:
    """Per-level, per-module parameter and MAC counts with totals.

    MACs cover the convolution and attention products for one sample at the
    configured resolution; pooling, activations, and bias additions are left
    out as non-dominant.
    """

    per_level: dict = field(default_factory=dict)

    def add(self, level: int, module: str, params: int, macs: int):
        mods = self.per_level.setdefault(level, {})
        entry = mods.setdefault(module, LayerCost())
        entry += LayerCost(params, macs)

    def module_total(self, module: str) -> LayerCost:
        total = LayerCost()
        for mods in self.per_level.values():
            if module in mods:
                total += mods[module]
        return total

    def level_total(self, level: int) -> LayerCost:
        total = LayerCost()
        for entry in self.per_level.get(level, {}).values():
            total += entry
        return total

    @property
    def total(self) -> LayerCost:
        total = LayerCost()
        for level in self.per_level:
            total += self.level_total(level)
        return total

    def to_dict(self) -> dict:
        return {
            "per_level": {
                str(level): {m: {"params": e.params, "macs": e.macs} for m, e in mods.items()}
                for level, mods in sorted(self.per_level.items())
            },
            "total": {"params": self.total.params, "macs": self.total.macs},
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_csv(self) -> str:
        lines = ["level,module,params,macs"]
        for level, mods in sorted(self.per_level.items()):
            for module, e in sorted(mods.items()):
                lines.append(f"{level},{module},{e.params},{e.macs}")
        t = self.total
        lines.append(f"total,all,{t.params},{t.macs}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        rows = [("level", "module", "params", "macs")]
        for level, mods in sorted(self.per_level.items()):
            for module, e in sorted(mods.items()):
                rows.append((str(level), module, f"{e.params}", f"{e.macs}"))
        t = self.total
        rows.append(("total", "all", f"{t.params}", f"{t.macs}"))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in rows)


def count_params(
    config,
    base_hw=(200, 200),
    with_cp: bool = True,
    with_sp: bool = True,
    with_sdp: bool = True,
) -> OpCostReport:
    """Exact added parameter/MAC counts of the pyramid modules over a plain FPN.

    `config` is a :class:`hsfpn.pyramid.PyramidConfig`; `base_hw` gives the
    level-2 spatial extents (halved per level) used for the MAC counts. The
    3x3 fuse convolution belongs to the reweighting module as a whole and is
    counted whenever the channel or spatial path is enabled. With every module
    disabled the report is empty (zero added parameters).
    """
    from .pyramid import LEVELS, SDP_LEVELS, conv_specs_for  # local import, no cycle

    specs = conv_specs_for(config)
    report = OpCostReport()
    h2, w2 = base_hw
    if h2 < 1 or w2 < 1:
        raise ValidationError("base extents must be positive")
    h5, w5 = h2 >> 3, w2 >> 3
    if h5 < 1 or w5 < 1 or h5 << 3 != h2 or w5 << 3 != w2:
        raise ValidationError(f"base extents {base_hw} are not divisible across 4 levels")

    for i, level in enumerate(LEVELS):
        h, w = h2 >> i, w2 >> i
        if with_cp:
            params = sum(specs[name].param_count for name in ("gap", "gmp", "merge"))
            macs = sum(specs[name].macs(1, 1) for name in ("gap", "gmp", "merge"))
            report.add(level, "cp", params, macs)
        if with_sp:
            report.add(level, "sp", specs["spatial"].param_count, specs["spatial"].macs(h, w))
        if with_cp or with_sp:
            report.add(level, "hfp_fuse", specs["fuse"].param_count, specs["fuse"].macs(h, w))
        if with_sdp and level in SDP_LEVELS:
            proj_params = 3 * specs["proj"].param_count
            proj_macs = 3 * specs["proj"].macs(h, w)
            attn = attention_cost(
                CostModel(n=(h // h5) * (w // w5), h=h5, w=w5, c=config.channels), "sdp"
            )
            report.add(level, "sdp", proj_params, proj_macs + attn)
    return report
