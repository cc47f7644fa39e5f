"""Fixed-point Mandelbrot divergence testing driven by the engine.

Coordinates are signed fixed-point numbers with a configurable fractional
width; multiplication truncates toward zero, magnitudes route through the
engine multiplier.  The escape test uses the squared magnitude against 4,
first applied to z = c itself.  Because escape counts are data dependent, a
work queue dispatches pixels to a configurable number of concurrent test
slots; the rendered map is identical for every slot count.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .engine import ArrayConfig, mul_ints

INT_BITS_DEFAULT = 4  # integer-bit budget; exceeding it counts as divergence


@dataclass(frozen=True)
class FixedPoint:
    """Signed value raw / 2^frac_bits."""

    raw: int
    frac_bits: int

    def __post_init__(self):
        if self.frac_bits < 1:
            raise ValueError("frac_bits must be >= 1")

    def to_float(self) -> float:
        return self.raw / (1 << self.frac_bits)


def fp_from_decimal(text: str, frac_bits: int) -> FixedPoint:
    """Parse a signed decimal string, truncating toward zero past frac_bits."""
    s = text.strip()
    if not s:
        raise ValueError("empty decimal string")
    sign = 1
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        s = s[1:]
    int_part, _, frac_part = s.partition(".")
    digits = (int_part + frac_part) or ""
    if not digits.isdigit():
        raise ValueError(f"malformed decimal value: {text!r}")
    scale = 10 ** len(frac_part)
    raw = (int(digits) << frac_bits) // scale
    return FixedPoint(sign * raw, frac_bits)


@dataclass(frozen=True)
class ViewPort:
    center_re: FixedPoint
    center_im: FixedPoint
    scale: FixedPoint  # half-width of the rendered window
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("pixel counts must be >= 1")
        if self.scale.raw <= 0:
            raise ValueError("scale must be positive")
        if not (self.center_re.frac_bits == self.center_im.frac_bits == self.scale.frac_bits):
            raise ValueError("viewport components must share one fixed-point format")


@dataclass(frozen=True)
class IterationMap:
    counts: tuple[tuple[int, ...], ...]  # rows, top row first
    max_iter: int

    @property
    def height(self) -> int:
        return len(self.counts)

    @property
    def width(self) -> int:
        return len(self.counts[0]) if self.counts else 0


def _mul_trunc(x: int, y: int, frac_bits: int, width: int,
               cfg: ArrayConfig | None) -> int:
    sign = (x < 0) != (y < 0)
    t = mul_ints(abs(x), abs(y), width, cfg) >> frac_bits
    return -t if sign else t


def _divergence_raw(cre: int, cim: int, frac_bits: int, max_iter: int,
                    int_bits: int, cfg: ArrayConfig | None) -> tuple[int, int]:
    """Escape count plus the number of engine multiplications consumed."""
    width = frac_bits + int_bits
    limit = 1 << width
    if abs(cre) >= limit or abs(cim) >= limit:
        raise ValueError("coordinate outside the integer-bit budget")
    four = 4 << frac_bits
    re, im = cre, cim  # z starts at c: the recurrence's first step folded in
    muls = 0
    for i in range(max_iter):
        re2 = _mul_trunc(re, re, frac_bits, width, cfg)
        im2 = _mul_trunc(im, im, frac_bits, width, cfg)
        muls += 2
        if re2 + im2 > four:
            return i, muls
        re_im = _mul_trunc(re, im, frac_bits, width, cfg)
        muls += 1
        re = re2 - im2 + cre
        im = 2 * re_im + cim
        if abs(re) >= limit or abs(im) >= limit:
            # out of format: |z| >= 2^int_bits implies divergence next pass
            return min(i + 1, max_iter), muls
    return max_iter, muls


def divergence_test(c_re: FixedPoint, c_im: FixedPoint, max_iter: int,
                    int_bits: int = INT_BITS_DEFAULT,
                    cfg: ArrayConfig | None = None) -> int:
    """First pass whose squared magnitude exceeds 4, else max_iter."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if c_re.frac_bits != c_im.frac_bits:
        raise ValueError("coordinates must share one fixed-point format")
    count, _ = _divergence_raw(c_re.raw, c_im.raw, c_re.frac_bits, max_iter,
                               int_bits, cfg)
    return count


def pixel_coordinates(vp: ViewPort) -> tuple[list[int], list[int]]:
    """Pixel-center raws: re per column, im per row (top row first)."""
    fb = vp.scale.frac_bits
    w, h = vp.width, vp.height
    res = [vp.center_re.raw + (vp.scale.raw * (2 * x + 1 - w)) // w for x in range(w)]
    ims = [vp.center_im.raw + (vp.scale.raw * (h - 1 - 2 * y)) // w for y in range(h)]
    return res, ims


def render(vp: ViewPort, frac_bits: int, max_iter: int, scheduler_width: int = 1,
           int_bits: int = INT_BITS_DEFAULT,
           cfg: ArrayConfig | None = None) -> IterationMap:
    """Dispatch every pixel through the run-time work queue and collect counts.

    `scheduler_width` models the number of concurrent divergence-test slots:
    a slot finishing earliest (ties toward the lower slot id) pulls the next
    pixel, its busy time being the multiplications the pixel consumed.  The
    map itself is schedule-invariant.
    """
    if vp.scale.frac_bits != frac_bits:
        raise ValueError(
            f"viewport is quantized at {vp.scale.frac_bits} fractional bits, "
            f"render asked for {frac_bits}"
        )
    if scheduler_width < 1:
        raise ValueError("scheduler_width must be >= 1")
    res, ims = pixel_coordinates(vp)
    counts = [[0] * vp.width for _ in range(vp.height)]
    slots = [(0, s) for s in range(scheduler_width)]  # (busy-until, slot id)
    heapq.heapify(slots)
    for y in range(vp.height):
        for x in range(vp.width):
            finish, slot = heapq.heappop(slots)
            count, muls = _divergence_raw(res[x], ims[y], frac_bits, max_iter,
                                          int_bits, cfg)
            counts[y][x] = count
            heapq.heappush(slots, (finish + muls, slot))
    return IterationMap(tuple(tuple(row) for row in counts), max_iter)


def write_pgm(m: IterationMap, path: str) -> None:
    """Binary PGM (P5), 8-bit gray = floor(255 * count / max_iter)."""
    with open(path, "wb") as fh:
        fh.write(f"P5\n{m.width} {m.height}\n255\n".encode("ascii"))
        for row in m.counts:
            fh.write(bytes(255 * c // m.max_iter for c in row))
