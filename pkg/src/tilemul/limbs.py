"""31-bit limb vectors and the 8-lane 80-bit accumulator primitive.

Operands are stored little-endian as 31-bit segments, one per 32-bit
container with the top bit held at zero so the values stay non-negative on
signed vector hardware.  Products of two segments are at most 62 bits, so an
80-bit signed lane can absorb 2**17 of them before running out of headroom;
crossing that bound is a planner bug and raises instead of wrapping.
"""

from __future__ import annotations

from dataclasses import dataclass

SEGMENT_BITS = 31
SEGMENT_MASK = (1 << SEGMENT_BITS) - 1
SIMD_LANES = 8
ACC_BITS = 80
ACC_MAX = (1 << (ACC_BITS - 1)) - 1
ACC_MIN = -(1 << (ACC_BITS - 1))

# 31-bit limbs pack into whole bytes eight at a time (8 * 31 = 248 = 31 * 8).
_BLOCK_LIMBS = 8
_BLOCK_BYTES = 31


class AccumulatorOverflowError(ArithmeticError):
    """An 80-bit lane left its signed range; detected, never wrapped."""


def parse_hex(text: str) -> int:
    """Parse a big-endian hex string, with or without a 0x prefix."""
    s = text.strip()
    if s[:2].lower() == "0x":
        s = s[2:]
    if not s:
        raise ValueError(f"malformed hex value: {text!r}")
    try:
        return int(s, 16)
    except ValueError:
        raise ValueError(f"malformed hex value: {text!r}") from None


def to_hex(value: int) -> str:
    if value < 0:
        raise ValueError("negative value has no hex encoding here")
    return f"0x{value:x}"


def limb_count(bitwidth: int) -> int:
    if bitwidth < 0:
        raise ValueError("bitwidth must be non-negative")
    return -(-bitwidth // SEGMENT_BITS)


def int_to_limbs(value: int, count: int) -> tuple[int, ...]:
    """Slice a non-negative integer into `count` 31-bit limbs."""
    if value < 0:
        raise ValueError("value must be non-negative")
    if value >> (SEGMENT_BITS * count):
        raise ValueError(f"value does not fit in {count} limbs")
    if count == 0:
        return ()
    if count == 1:
        return (value,)
    # eight limbs per byte-aligned 248-bit block
    nblocks = -(-count // _BLOCK_LIMBS)
    buf = value.to_bytes(nblocks * _BLOCK_BYTES, "little")
    out = []
    for k in range(0, nblocks * _BLOCK_BYTES, _BLOCK_BYTES):
        block = int.from_bytes(buf[k : k + _BLOCK_BYTES], "little")
        for _ in range(_BLOCK_LIMBS):
            out.append(block & SEGMENT_MASK)
            block >>= SEGMENT_BITS
    return tuple(out[:count])


def limbs_to_int(limbs) -> int:
    """Recombine little-endian 31-bit limbs into an integer."""
    n = len(limbs)
    if n == 0:
        return 0
    if n == 1:
        return limbs[0]
    # Merge eight limbs into one 248-bit block; blocks are byte-aligned.
    nblocks = -(-n // _BLOCK_LIMBS)
    buf = bytearray(nblocks * _BLOCK_BYTES)
    for k in range(nblocks):
        block = 0
        for j, limb in enumerate(limbs[k * _BLOCK_LIMBS : (k + 1) * _BLOCK_LIMBS]):
            block |= limb << (SEGMENT_BITS * j)
        buf[k * _BLOCK_BYTES : (k + 1) * _BLOCK_BYTES] = block.to_bytes(_BLOCK_BYTES, "little")
    return int.from_bytes(buf, "little")


@dataclass(frozen=True, slots=True)
class LimbVector:
    """An unsigned integer as little-endian 31-bit limbs plus its declared width."""

    limbs: tuple[int, ...]
    bitwidth: int

    def __post_init__(self):
        for i, limb in enumerate(self.limbs):
            if not 0 <= limb <= SEGMENT_MASK:
                raise ValueError(f"limb {i} = {limb:#x} violates the 31-bit bound")

    def value(self) -> int:
        return limbs_to_int(self.limbs)

    def __len__(self) -> int:
        return len(self.limbs)


def decompose(value, bitwidth: int) -> LimbVector:
    """Slice a non-negative integer (hex string or int) into 31-bit limbs.

    The limb count is ceil(bitwidth / 31); the value must fit the declared
    width.
    """
    v = parse_hex(value) if isinstance(value, str) else int(value)
    if v < 0:
        raise ValueError("value must be non-negative")
    if bitwidth < 0:
        raise ValueError("bitwidth must be non-negative")
    if v >> bitwidth:
        raise ValueError(f"value has more than {bitwidth} bits")
    return LimbVector(int_to_limbs(v, limb_count(bitwidth)), bitwidth)


def recompose(lv: LimbVector) -> str:
    """Inverse of decompose: hex encoding of the represented value."""
    return to_hex(lv.value())


def pad_limbs(lv: LimbVector, target_count: int) -> LimbVector:
    """Zero-extend at the high end to exactly `target_count` limbs."""
    if target_count < len(lv.limbs):
        raise ValueError(
            f"target count {target_count} is below the current {len(lv.limbs)} limbs"
        )
    pad = (0,) * (target_count - len(lv.limbs))
    return LimbVector(lv.limbs + pad, lv.bitwidth)


@dataclass(frozen=True, slots=True)
class AccVector:
    """Eight 80-bit signed lanes; lane k sits at weight 31*(base_weight + k)."""

    lanes: tuple[int, ...]
    base_weight: int = 0

    def __post_init__(self):
        if len(self.lanes) != SIMD_LANES:
            raise ValueError(f"expected {SIMD_LANES} lanes, got {len(self.lanes)}")
        for k, lane in enumerate(self.lanes):
            if not ACC_MIN <= lane <= ACC_MAX:
                raise AccumulatorOverflowError(
                    f"lane {k} = {lane} outside the signed {ACC_BITS}-bit range"
                )

    @staticmethod
    def zero(base_weight: int = 0) -> "AccVector":
        return AccVector((0,) * SIMD_LANES, base_weight)


def acc_mac(acc: AccVector, a_scalar: int, b_lanes) -> AccVector:
    """lane[k] += a_scalar * b_lanes[k], with hard 80-bit overflow detection."""
    if not 0 <= a_scalar <= SEGMENT_MASK:
        raise ValueError(f"scalar operand {a_scalar:#x} violates the 31-bit bound")
    if len(b_lanes) != SIMD_LANES:
        raise ValueError(f"expected {SIMD_LANES} b lanes, got {len(b_lanes)}")
    out = []
    for k in range(SIMD_LANES):
        b = b_lanes[k]
        if not 0 <= b <= SEGMENT_MASK:
            raise ValueError(f"b lane {k} = {b:#x} violates the 31-bit bound")
        v = acc.lanes[k] + a_scalar * b
        if not ACC_MIN <= v <= ACC_MAX:
            raise AccumulatorOverflowError(
                f"lane {k} overflows {ACC_BITS}-bit accumulator at weight "
                f"{acc.base_weight + k}"
            )
        out.append(v)
    return AccVector(tuple(out), acc.base_weight)


@dataclass(frozen=True, slots=True)
class WeightedAcc:
    """Column sums indexed by 31-bit weight position (column c has weight 2^(31c))."""

    columns: tuple[int, ...]

    def __post_init__(self):
        for c, col in enumerate(self.columns):
            if not ACC_MIN <= col <= ACC_MAX:
                raise AccumulatorOverflowError(
                    f"column {c} = {col} outside the signed {ACC_BITS}-bit range"
                )

    def value(self) -> int:
        total = 0
        for c, col in enumerate(self.columns):
            total += col << (SEGMENT_BITS * c)
        return total
