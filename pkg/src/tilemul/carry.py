"""Two-stage carry propagation for weighted column sums.

Stage 1 folds each 80-bit column into its low 31 bits plus a spill addend at
the next column weight, then sums every 128-bit window of the resulting bit
stream independently, each window emitting a payload and a small carry-out.
Stage 2 resolves the carry-outs sequentially in 512-bit groups.  The naive
full ripple is kept as the reference the two-stage path must match
bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .limbs import (
    SEGMENT_BITS,
    SEGMENT_MASK,
    ACC_BITS,
    LimbVector,
    WeightedAcc,
    int_to_limbs,
    limbs_to_int,
)

CHUNK_BITS = 128
_CHUNK_MASK = (1 << CHUNK_BITS) - 1
GROUP_CHUNKS = 4  # 4 x 128 = 512-bit second-stage granularity
GROUP_BITS = CHUNK_BITS * GROUP_CHUNKS


@dataclass(frozen=True, slots=True)
class CarryChunk:
    """One 128-bit window of partially-normalized result bits."""

    payload: int
    carry_out: int

    def __post_init__(self):
        if not 0 <= self.payload <= _CHUNK_MASK:
            raise ValueError("payload outside 128-bit range")
        if self.carry_out < 0:
            raise ValueError("carry_out must be non-negative")


def _minimal_limbvector(value: int) -> LimbVector:
    if value < 0:
        raise ValueError("carry propagation produced a negative total")
    count = -(-value.bit_length() // SEGMENT_BITS)
    return LimbVector(int_to_limbs(value, count), SEGMENT_BITS * count)


def propagate_full(w: WeightedAcc) -> LimbVector:
    """Naive sequential ripple over all columns; the carry oracle."""
    limbs = []
    carry = 0
    for col in w.columns:
        t = col + carry
        limbs.append(t & SEGMENT_MASK)
        carry = t >> SEGMENT_BITS
    if carry < 0:
        raise ValueError("column sums ripple to a negative total")
    while carry:
        limbs.append(carry & SEGMENT_MASK)
        carry >>= SEGMENT_BITS
    while limbs and limbs[-1] == 0:
        limbs.pop()
    return LimbVector(tuple(limbs), SEGMENT_BITS * len(limbs))


def _chunk_count(ncols: int) -> int:
    if ncols == 0:
        return 0
    return -(-(SEGMENT_BITS * (ncols - 1) + ACC_BITS) // CHUNK_BITS)


def stage1_local_carry(w: WeightedAcc, window_order=None) -> list[CarryChunk]:
    """Sum each 128-bit window independently.

    Windows are mutually independent; `window_order` only changes the order
    they are evaluated in and must not change the result.
    """
    ncols = len(w.columns)
    nchunks = _chunk_count(ncols)
    if nchunks == 0:
        return []
    for c, col in enumerate(w.columns):
        if col < 0:
            raise ValueError(f"column {c} is negative; stage 1 folds unsigned sums")
    if nchunks == 1 and window_order is None:
        # every fold addend lands in window 0
        local = w.columns[0] if ncols == 1 else w.value()
        return [CarryChunk(local & _CHUNK_MASK, local >> CHUNK_BITS)]

    # Fold: low 31 bits stay put (disjoint fields -> plain concatenation),
    # the upper bits of each column become an addend one column up.
    lows = [col & SEGMENT_MASK for col in w.columns]
    base_bytes = limbs_to_int(lows).to_bytes(nchunks * (CHUNK_BITS // 8), "little")
    spill_sums = [0] * nchunks
    offset = SEGMENT_BITS
    for col in w.columns:
        spill = col >> SEGMENT_BITS
        if spill:
            bit = offset & (CHUNK_BITS - 1)
            windex = offset >> 7  # CHUNK_BITS == 128
            spill_sums[windex] += (spill << bit) & _CHUNK_MASK
            high = spill >> (CHUNK_BITS - bit)
            if high:
                spill_sums[windex + 1] += high
        offset += SEGMENT_BITS

    order = range(nchunks) if window_order is None else window_order
    if sorted(order) != list(range(nchunks)):
        raise ValueError("window_order must be a permutation of all windows")
    chunks: list = [None] * nchunks
    stride = CHUNK_BITS // 8
    for windex in order:
        local = (
            int.from_bytes(base_bytes[windex * stride : (windex + 1) * stride], "little")
            + spill_sums[windex]
        )
        chunks[windex] = CarryChunk(local & _CHUNK_MASK, local >> CHUNK_BITS)
    return chunks


def _stage2_total(chunks) -> int:
    if not chunks:
        return 0
    ngroups = -(-len(chunks) // GROUP_CHUNKS)
    buf = bytearray(ngroups * (GROUP_BITS // 8))
    carry_in = 0
    group_mask = (1 << GROUP_BITS) - 1
    for g in range(ngroups):
        group = chunks[g * GROUP_CHUNKS : (g + 1) * GROUP_CHUNKS]
        gval = carry_in
        carry_in = 0
        for i, chunk in enumerate(group):
            gval += chunk.payload << (CHUNK_BITS * i)
            target = CHUNK_BITS * (i + 1)
            if target < GROUP_BITS:
                gval += chunk.carry_out << target
            else:
                carry_in += chunk.carry_out
        carry_in += gval >> GROUP_BITS
        off = g * (GROUP_BITS // 8)
        buf[off : off + GROUP_BITS // 8] = (gval & group_mask).to_bytes(
            GROUP_BITS // 8, "little"
        )
    total = int.from_bytes(buf, "little")
    if carry_in:
        total += carry_in << (GROUP_BITS * ngroups)
    return total


def stage2_merge(chunks) -> LimbVector:
    """Resolve inter-chunk carries sequentially in 512-bit groups."""
    return _minimal_limbvector(_stage2_total(chunks))


def normalize(w: WeightedAcc) -> LimbVector:
    """Production path: stage-2 merge of the stage-1 window sums."""
    return stage2_merge(stage1_local_carry(w))


def normalize_value(w: WeightedAcc) -> int:
    """Two-stage carry result as an integer, skipping the limb slicing."""
    return _stage2_total(stage1_local_carry(w))
