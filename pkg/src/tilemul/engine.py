"""Schoolbook multiplication tiled over a logical 2D vector-MAC array.

The partial-product grid of two limb vectors is cut into uniform rectangular
tiles of S0 x S1 segments.  Tiles along an anti-diagonal of the tile grid
accumulate into overlapping output columns and form a cascade chain executed
in read-after-write order; chains are mutually independent and merge by
column addition.  Two kernel implementations are provided and kept
equivalent: the lane-faithful one drives the 8-lane accumulator one MAC
group at a time, the packed one computes a tile's column sums through one
native wide multiplication (limbs spread on a 128-bit pitch so column sums
land in disjoint slots).  A Karatsuba recursion over native integers, on an
entirely separate code path, serves as the independent oracle.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

from .limbs import (
    SEGMENT_BITS,
    SEGMENT_MASK,
    SIMD_LANES,
    ACC_MAX,
    AccumulatorOverflowError,
    AccVector,
    LimbVector,
    WeightedAcc,
    acc_mac,
    decompose,
    parse_hex,
    to_hex,
)
from .carry import normalize_value

# Column sums are proven safe for up to 2**17 products of two 31-bit segments.
MAX_COLUMN_PRODUCTS = 1 << 17

# Packed-kernel pitch: one column sum per 128-bit slot, byte aligned.
_SLOT_BYTES = 16

# Micro cycle model: one cycle per packed 8-lane MAC group, plus a fixed
# per-row charge for loads, stores and loop control.
ROW_OVERHEAD_CYCLES = 8


@dataclass
class OpCounters:
    """Instrumented operation counts for reports and constant-work checks."""

    multiplications: int = 0
    mac_products: int = 0

    def reset(self) -> None:
        self.multiplications = 0
        self.mac_products = 0

    def snapshot(self) -> tuple[int, int]:
        return (self.multiplications, self.mac_products)


counters = OpCounters()


@dataclass(frozen=True)
class ArrayConfig:
    """DSE decision variable: replica count and the two tile-grid dimensions."""

    p_inter: int
    p_intra0: int
    p_intra1: int
    n_bits: int

    def __post_init__(self):
        if self.p_inter < 1 or self.p_intra0 < 1 or self.p_intra1 < 1:
            raise ValueError("parallelism parameters must be >= 1")
        if self.n_bits < 1:
            raise ValueError("operand width must be >= 1 bit")

    @property
    def p_intra(self) -> int:
        return self.p_intra0 * self.p_intra1


@dataclass(frozen=True)
class TileSpec:
    row_index: int
    col_index: int
    a_range: tuple[int, int]  # half-open limb range into operand A
    b_range: tuple[int, int]
    s0: int
    s1: int

    @property
    def base_column(self) -> int:
        return self.a_range[0] + self.b_range[0]


@dataclass(frozen=True)
class TileGrid:
    tiles: tuple[TileSpec, ...]
    chains: tuple[tuple[TileSpec, ...], ...]
    p0: int
    p1: int
    s0: int
    s1: int
    l0_padded: int
    l1_padded: int


def padded_segments(l0: int, l1: int, p0: int, p1: int) -> tuple[int, int]:
    """Per-tile segment counts; the SIMD dimension pads up to a lane multiple."""
    s0 = -(-l0 // p0)
    s1 = -(-l1 // p1)
    s1 = -(-s1 // SIMD_LANES) * SIMD_LANES
    return s0, s1


@lru_cache(maxsize=256)
def _plan(l0: int, l1: int, p0: int, p1: int) -> TileGrid:
    s0, s1 = padded_segments(l0, l1, p0, p1)
    if min(s0, s1) > MAX_COLUMN_PRODUCTS:
        raise ValueError("tile exceeds the accumulator safety bound")
    tiles = []
    for r in range(p0):
        for c in range(p1):
            tiles.append(
                TileSpec(r, c, (r * s0, (r + 1) * s0), (c * s1, (c + 1) * s1), s0, s1)
            )
    grid = {(t.row_index, t.col_index): t for t in tiles}
    chains = []
    for d in range(p0 + p1 - 1):
        chain = tuple(
            grid[(r, d - r)] for r in range(max(0, d - p1 + 1), min(p0, d + 1))
        )
        chains.append(chain)
    return TileGrid(tuple(tiles), tuple(chains), p0, p1, s0, s1, s0 * p0, s1 * p1)


def plan_tiles(l0: int, l1: int, cfg: ArrayConfig) -> TileGrid:
    """Uniform rectangular tiling with full partial-product coverage.

    Chains group tiles along the reduction anti-diagonals of the tile grid;
    consecutive tiles in a chain hand their accumulator stream onward.
    """
    if l0 < 1 or l1 < 1:
        raise ValueError("operand limb counts must be >= 1")
    if cfg.p_intra0 > l0 or cfg.p_intra1 > l1:
        raise ValueError(
            f"over-partition: ({cfg.p_intra0}, {cfg.p_intra1}) tiles for "
            f"({l0}, {l1}) limbs"
        )
    return _plan(l0, l1, cfg.p_intra0, cfg.p_intra1)


def tile_kernel(a_segs, b_segs, acc_in) -> list[AccVector]:
    """Lane-faithful tile kernel: output-stationary 8-lane MAC accumulation.

    `acc_in` must hold one AccVector per local output group, i.e.
    ceil((S0 + S1 - 1) / 8) of them; lane l of group g carries the column at
    local weight 8 g + l.  Results stream out only after every local product
    has been absorbed.
    """
    s0, s1 = len(a_segs), len(b_segs)
    ngroups = -(-(s0 + s1 - 1) // SIMD_LANES)
    if len(acc_in) != ngroups:
        raise ValueError(f"expected {ngroups} accumulator groups, got {len(acc_in)}")
    groups = list(acc_in)
    for i in range(s0):
        a_i = a_segs[i]
        for g in range(i // SIMD_LANES, (i + s1 - 1) // SIMD_LANES + 1):
            lo = g * SIMD_LANES - i
            window = tuple(
                b_segs[lo + lane] if 0 <= lo + lane < s1 else 0
                for lane in range(SIMD_LANES)
            )
            groups[g] = acc_mac(groups[g], a_i, window)
    counters.mac_products += s0 * s1
    return groups


@lru_cache(maxsize=512)
def _pack_format(count: int) -> struct.Struct:
    return struct.Struct("<" + "I12x" * count)  # one limb per 16-byte slot


@lru_cache(maxsize=512)
def _unpack_format(count: int) -> struct.Struct:
    return struct.Struct("<" + "QQ" * count)  # each slot as a 128-bit pair


def _tile_columns_packed(a_segs, b_segs) -> bytes:
    """Column sums of one tile via a single native wide multiplication.

    Limbs are spread on a 128-bit pitch, so the product holds each column sum
    in its own 16-byte slot (sums stay below 2**79 by the tile-size bound).
    Returns the raw little-endian slot buffer.
    """
    na, nb = len(a_segs), len(b_segs)
    prod = int.from_bytes(_pack_format(na).pack(*a_segs), "little") * int.from_bytes(
        _pack_format(nb).pack(*b_segs), "little"
    )
    return prod.to_bytes((na + nb) * _SLOT_BYTES, "little")


def _tile_columns(a_segs, b_segs) -> list[int]:
    """Per-column sums of one tile; safe below 2^79 by the plan-time bound."""
    counters.mac_products += len(a_segs) * len(b_segs)
    if len(a_segs) == 1 or len(b_segs) == 1:
        # degenerate convolution: one product per column
        scalar, vec = (a_segs[0], b_segs) if len(a_segs) == 1 else (b_segs[0], a_segs)
        return [scalar * v for v in vec]
    raw = _tile_columns_packed(a_segs, b_segs)
    ncols = len(a_segs) + len(b_segs) - 1
    halves = _unpack_format(ncols).unpack_from(raw)
    return [lo | (hi << 64) for lo, hi in zip(halves[::2], halves[1::2])]


def _run_tile_packed(a_segs, b_segs, base: int, state: dict) -> None:
    get = state.get
    for off, col in enumerate(_tile_columns(a_segs, b_segs)):
        if col:
            v = get(base + off, 0) + col
            if v > ACC_MAX:
                raise AccumulatorOverflowError(
                    f"column {base + off} overflows the 80-bit accumulator"
                )
            state[base + off] = v


def _run_tile_lanes(a_segs, b_segs, base: int, state: dict) -> None:
    ngroups = -(-(len(a_segs) + len(b_segs) - 1) // SIMD_LANES)
    acc_in = []
    for g in range(ngroups):
        gbase = base + g * SIMD_LANES
        lanes = tuple(state.pop(gbase + lane, 0) for lane in range(SIMD_LANES))
        acc_in.append(AccVector(lanes, gbase))
    for vec in tile_kernel(a_segs, b_segs, acc_in):
        for lane, v in enumerate(vec.lanes):
            if v:
                state[vec.base_weight + lane] = v


def run_array(a: LimbVector, b: LimbVector, cfg: ArrayConfig, lane_kernel: bool = False) -> WeightedAcc:
    """Execute the tile grid chain by chain and merge the column sums.

    Chains are independent (safe to evaluate concurrently); within a chain
    the accumulator stream flows tile to tile in dependency order.  The
    merged result is bit-identical for every valid configuration.
    """
    grid = plan_tiles(max(len(a), 1), max(len(b), 1), cfg)
    a_l = a.limbs + (0,) * (grid.l0_padded - len(a.limbs))
    b_l = b.limbs + (0,) * (grid.l1_padded - len(b.limbs))
    if not lane_kernel and len(grid.tiles) == 1:
        columns = _tile_columns(a_l, b_l)
        while columns and columns[-1] == 0:
            columns.pop()
        return WeightedAcc(tuple(columns))
    run_tile = _run_tile_lanes if lane_kernel else _run_tile_packed
    columns = [0] * (grid.l0_padded + grid.l1_padded - 1)
    for chain in grid.chains:
        state: dict[int, int] = {}
        for tile in chain:
            run_tile(
                a_l[tile.a_range[0] : tile.a_range[1]],
                b_l[tile.b_range[0] : tile.b_range[1]],
                tile.base_column,
                state,
            )
        for col, v in state.items():
            nv = columns[col] + v
            if nv > ACC_MAX:
                raise AccumulatorOverflowError(
                    f"merged column {col} overflows the 80-bit accumulator"
                )
            columns[col] = nv
    while columns and columns[-1] == 0:
        columns.pop()
    return WeightedAcc(tuple(columns))


@lru_cache(maxsize=64)
def _default_cfg(n_bits: int) -> ArrayConfig:
    return ArrayConfig(1, 1, 1, n_bits)


def mul_ints(a: int, b: int, n_bits: int, cfg: ArrayConfig | None = None,
             lane_kernel: bool = False) -> int:
    """Full engine pipeline on integers: decompose, run the array, carry."""
    if cfg is None:
        cfg = _default_cfg(n_bits)
    acc = run_array(decompose(a, n_bits), decompose(b, n_bits), cfg, lane_kernel)
    counters.multiplications += 1
    return normalize_value(acc)


def schoolbook_mul(a: str, b: str, n_bits: int, cfg: ArrayConfig | None = None) -> str:
    """Exact product of two hex operands of declared width, as hex (width 2N)."""
    return to_hex(mul_ints(parse_hex(a), parse_hex(b), n_bits, cfg))


_KARATSUBA_BASE_BITS = 64


def _karatsuba(a: int, b: int, n: int) -> int:
    if n <= _KARATSUBA_BASE_BITS:
        return a * b
    h = n // 2
    mask = (1 << h) - 1
    a_hi, a_lo = a >> h, a & mask
    b_hi, b_lo = b >> h, b & mask
    z2 = _karatsuba(a_hi, b_hi, n - h)
    z0 = _karatsuba(a_lo, b_lo, h)
    z1 = _karatsuba(a_hi + a_lo, b_hi + b_lo, h + 1) - z2 - z0
    return (z2 << (2 * h)) + (z1 << h) + z0


def karatsuba_mul_ints(a: int, b: int, n_bits: int) -> int:
    if a < 0 or b < 0:
        raise ValueError("operands must be non-negative")
    if a >> n_bits or b >> n_bits:
        raise ValueError(f"operand wider than {n_bits} bits")
    return _karatsuba(a, b, n_bits)


def karatsuba_oracle(a: str, b: str, n_bits: int) -> str:
    """Three-product half-split recursion down to a 64-bit native base case.

    Shares no code with the tiled engine; used to cross-check it.
    """
    return to_hex(karatsuba_mul_ints(parse_hex(a), parse_hex(b), n_bits))


@dataclass(frozen=True)
class KernelCycles:
    cycles: int
    eff: float


def kernel_cycle_count(s0: int, s1: int, row_overhead: int = ROW_OVERHEAD_CYCLES) -> KernelCycles:
    """Micro cycle model for one tile kernel invocation.

    Each of the ceil(S1/8) output rows issues S0 packed MAC groups at one
    cycle apiece plus a fixed load/store/loop charge; efficiency is the ideal
    MAC-group count over the modeled cycles and approaches 1 from below as
    the tile grows.
    """
    if s0 < 1 or s1 < 1:
        raise ValueError("segment counts must be >= 1")
    rows = -(-s1 // SIMD_LANES)
    cycles = rows * (s0 + row_overhead)
    eff = (s0 * s1 / SIMD_LANES) / cycles
    return KernelCycles(cycles, eff)
