"""Analytical throughput model and exhaustive design-space search.

Per-task latency is the slowest of three stages, each counted in its own
clock domain and converted to seconds before the max: the PL sender, the
tile kernel on the array, and the PL carry pipeline.  Throughput is the
replica count over that bottleneck latency.  The search enumerates every
(P_intra0, P_intra1, P_inter) triple within the resource caps and ranks by
modeled throughput with a deterministic tie-break.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .engine import ArrayConfig, kernel_cycle_count, padded_segments
from .limbs import limb_count
from .placement import plan_broadcast


class InfeasibleError(ValueError):
    """No configuration satisfies the resource constraints."""


@dataclass(frozen=True)
class ResourceCaps:
    c_lut: float = 1.0
    c_bram: float = 1.0
    c_plio: int = 156
    c_aie: int = 400

    def __post_init__(self):
        if min(self.c_lut, self.c_bram) <= 0 or min(self.c_plio, self.c_aie) <= 0:
            raise ValueError("resource budgets must be positive")


def default_sender_cycles(n_bits: int) -> int:
    """512-bit DDR beats for both operands plus 128-bit stream beats each."""
    return -(-2 * n_bits // 512) + 2 * -(-n_bits // 128)


def default_carry_cycles(n_bits: int) -> int:
    """128-bit window adds plus 512-bit group adds over the 2N-bit result."""
    return -(-2 * n_bits // 128) + -(-2 * n_bits // 512)


@dataclass
class ProfileData:
    """Calibration inputs: per-task PL cost, stage cycle models, clocks."""

    lut_per_task: float = 0.1116  # fraction of the device per replica
    bram_per_task: float = 0.0239
    pl_freq_hz: float = 200e6
    aie_freq_hz: float = 1e9
    sender_cycles_override: int | None = None
    carry_cycles_override: int | None = None
    eff_table: dict = field(default_factory=dict)  # (s0, s1) -> eff

    def __post_init__(self):
        if self.pl_freq_hz <= 0 or self.aie_freq_hz <= 0:
            raise ValueError("clock frequencies must be positive")
        for key, eff in self.eff_table.items():
            if not 0 < eff <= 1:
                raise ValueError(f"eff {eff} for {key} outside (0, 1]")

    def sender_cycles(self, n_bits: int) -> int:
        if self.sender_cycles_override is not None:
            return self.sender_cycles_override
        return default_sender_cycles(n_bits)

    def carry_cycles(self, n_bits: int) -> int:
        if self.carry_cycles_override is not None:
            return self.carry_cycles_override
        return default_carry_cycles(n_bits)

    def eff(self, s0: int, s1: int) -> float:
        hit = self.eff_table.get((s0, s1))
        if hit is not None:
            return hit
        return kernel_cycle_count(s0, s1).eff


@dataclass(frozen=True)
class ThroughputEstimate:
    tasks_per_second: float
    bottleneck: str  # "sender" | "carry" | "aie"
    stage_seconds: dict


def segments_per_aie(n_bits: int, p_intra0: int, p_intra1: int) -> tuple[int, int]:
    """Per-tile segment counts for an N-bit operand pair (S1 lane-padded)."""
    limbs = limb_count(n_bits)
    return padded_segments(limbs, limbs, p_intra0, p_intra1)


def aie_cycles(s0: int, s1: int, eff: float) -> int:
    """Tile kernel cycles S0*S1 / (8 * eff), rounded up."""
    if not 0 < eff <= 1:
        raise ValueError(f"eff must lie in (0, 1], got {eff}")
    # small epsilon so eff values derived from a cycle count round-trip exactly
    return max(1, math.ceil(s0 * s1 / (8 * eff) - 1e-9))


def estimate_throughput(cfg: ArrayConfig, prof: ProfileData) -> ThroughputEstimate:
    s0, s1 = segments_per_aie(cfg.n_bits, cfg.p_intra0, cfg.p_intra1)
    stage_seconds = {
        "sender": prof.sender_cycles(cfg.n_bits) / prof.pl_freq_hz,
        "aie": aie_cycles(s0, s1, prof.eff(s0, s1)) / prof.aie_freq_hz,
        "carry": prof.carry_cycles(cfg.n_bits) / prof.pl_freq_hz,
    }
    bottleneck = max(stage_seconds, key=lambda k: (stage_seconds[k], k))
    return ThroughputEstimate(
        tasks_per_second=cfg.p_inter / stage_seconds[bottleneck],
        bottleneck=bottleneck,
        stage_seconds=stage_seconds,
    )


@dataclass(frozen=True)
class ConstraintVerdict:
    feasible: bool
    slack: dict  # resource -> remaining budget (negative = violated)


def check_constraints(cfg: ArrayConfig, caps: ResourceCaps, prof: ProfileData) -> ConstraintVerdict:
    slack = {
        "aie": caps.c_aie - cfg.p_inter * cfg.p_intra,
        "plio": caps.c_plio - plan_broadcast(cfg).total_plio,
        "lut": caps.c_lut - prof.lut_per_task * cfg.p_inter,
        "bram": caps.c_bram - prof.bram_per_task * cfg.p_inter,
    }
    return ConstraintVerdict(all(v >= 0 for v in slack.values()), slack)


@dataclass(frozen=True)
class DseRow:
    p_intra0: int
    p_intra1: int
    p_inter: int
    s0: int
    s1: int
    bottleneck: str
    tasks_per_second: float
    lut: float
    bram: float
    plio: int
    aie: int


@dataclass(frozen=True)
class DseResult:
    rows: tuple[DseRow, ...]
    best: ArrayConfig | None


DSE_CSV_COLUMNS = (
    "p_intra0", "p_intra1", "p_inter", "s0", "s1",
    "bottleneck", "tasks_per_s", "lut", "bram", "plio", "aie",
)


def dse_search(n_bits: int, caps: ResourceCaps, prof: ProfileData,
               candidates=None) -> DseResult:
    """Enumerate, filter by the caps, rank by modeled throughput.

    Ties break toward the smaller tile grid, then the smaller replica count.
    `candidates` restricts the sweep to explicit (p0, p1, p_inter) triples.
    """
    if n_bits < 31:
        raise ValueError("operand width must be at least one 31-bit segment")
    limbs = limb_count(n_bits)
    if candidates is None:
        candidates = []
        p0_max = min(limbs, caps.c_aie)
        for p0 in range(1, p0_max + 1):
            p1_max = min(limbs, caps.c_aie // p0)
            for p1 in range(1, p1_max + 1):
                for p_inter in range(1, caps.c_aie // (p0 * p1) + 1):
                    candidates.append((p0, p1, p_inter))
    rows = []
    for p0, p1, p_inter in candidates:
        cfg = ArrayConfig(p_inter, p0, p1, n_bits)
        if not check_constraints(cfg, caps, prof).feasible:
            continue
        est = estimate_throughput(cfg, prof)
        s0, s1 = segments_per_aie(n_bits, p0, p1)
        rows.append(DseRow(
            p0, p1, p_inter, s0, s1,
            est.bottleneck, est.tasks_per_second,
            prof.lut_per_task * p_inter, prof.bram_per_task * p_inter,
            plan_broadcast(cfg).total_plio, p_inter * p0 * p1,
        ))
    rows.sort(key=lambda r: (-r.tasks_per_second, r.p_intra0 * r.p_intra1,
                             r.p_inter, r.p_intra0))
    best = None
    if rows:
        top = rows[0]
        best = ArrayConfig(top.p_inter, top.p_intra0, top.p_intra1, n_bits)
    return DseResult(tuple(rows), best)


def _parse_kv_lines(path: str) -> list[list[str]]:
    entries = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                entries.append(line.split())
    return entries


def load_caps(path: str) -> ResourceCaps:
    """Caps file: `aie N`, `plio N`, `lut F`, `bram F` lines."""
    kwargs = {}
    names = {"aie": "c_aie", "plio": "c_plio", "lut": "c_lut", "bram": "c_bram"}
    for entry in _parse_kv_lines(path):
        if len(entry) != 2 or entry[0] not in names:
            raise ValueError(f"bad caps line: {' '.join(entry)!r}")
        key = names[entry[0]]
        kwargs[key] = int(entry[1]) if key in ("c_aie", "c_plio") else float(entry[1])
    return ResourceCaps(**kwargs)


def load_profile(path: str) -> ProfileData:
    """Profile file: frequencies, per-task LUT/BRAM, optional cycle overrides
    and `eff S0 S1 VALUE` table rows."""
    prof = ProfileData()
    eff_table = {}
    for entry in _parse_kv_lines(path):
        key = entry[0]
        if key == "eff":
            if len(entry) != 4:
                raise ValueError(f"bad eff line: {' '.join(entry)!r}")
            eff_table[(int(entry[1]), int(entry[2]))] = float(entry[3])
            continue
        if len(entry) != 2:
            raise ValueError(f"bad profile line: {' '.join(entry)!r}")
        value = entry[1]
        if key == "pl_freq_mhz":
            prof.pl_freq_hz = float(value) * 1e6
        elif key == "aie_freq_mhz":
            prof.aie_freq_hz = float(value) * 1e6
        elif key == "lut_per_task":
            prof.lut_per_task = float(value)
        elif key == "bram_per_task":
            prof.bram_per_task = float(value)
        elif key == "sender_cycles":
            prof.sender_cycles_override = int(value)
        elif key == "carry_cycles":
            prof.carry_cycles_override = int(value)
        else:
            raise ValueError(f"unknown profile key {key!r}")
    prof.eff_table = eff_table
    prof.__post_init__()
    return prof
