"""Constant-time RSA on the multiplication engine via Montgomery arithmetic.

Every modular multiplication costs exactly three engine multiplications
(product, quotient estimate, quotient times modulus) followed by a shift and
one conditional subtraction, so no division ever runs.  Exponentiation
squares and multiplies on every bit, discarding the multiply on zero bits,
which keeps the engine-multiplication count a function of the exponent's bit
length only.  A five-kernel pipeline simulator reproduces how independent
tasks interleave on the single multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import ArrayConfig, mul_ints
from .limbs import parse_hex


@dataclass(frozen=True)
class MontgomeryContext:
    """Precomputed reduction constants for an odd modulus and radix 2^k."""

    modulus: int
    k: int
    n_prime: int  # -modulus^(-1) mod 2^k
    r_mod: int    # 2^k mod modulus (Montgomery one)
    r2_mod: int   # 2^(2k) mod modulus (entry constant)

    @property
    def radix(self) -> int:
        return 1 << self.k


def mont_setup(modulus, k: int | None = None) -> MontgomeryContext:
    """Derive the Montgomery constants; the modulus must be odd and below 2^k."""
    m = parse_hex(modulus) if isinstance(modulus, str) else int(modulus)
    if m < 3:
        raise ValueError("modulus must be at least 3")
    if m % 2 == 0:
        raise ValueError("modulus must be odd")
    if k is None:
        k = m.bit_length()
    if k < m.bit_length():
        raise ValueError(f"radix exponent {k} below the modulus width {m.bit_length()}")
    r = 1 << k
    n_prime = (-pow(m, -1, r)) % r
    assert (m * n_prime) % r == r - 1
    return MontgomeryContext(m, k, n_prime, r % m, (r * r) % m)


def _mont_reduce(d: int, ctx: MontgomeryContext, cfg: ArrayConfig | None) -> int:
    """REDC: (d + ((d * n') mod R) * M) / R with a final conditional subtract."""
    mask = ctx.radix - 1
    c = mul_ints(ctx.n_prime, d & mask, ctx.k, cfg)
    f = mul_ints(c & mask, ctx.modulus, ctx.k, cfg)
    g = (f + d) >> ctx.k
    return g - ctx.modulus if g >= ctx.modulus else g


def mont_mul(am: int, bm: int, ctx: MontgomeryContext,
             cfg: ArrayConfig | None = None) -> int:
    """am * bm * R^(-1) mod M through exactly three engine multiplications."""
    if not 0 <= am < ctx.modulus or not 0 <= bm < ctx.modulus:
        raise ValueError("operands must be reduced below the modulus")
    return _mont_reduce(mul_ints(am, bm, ctx.k, cfg), ctx, cfg)


def to_mont(a: int, ctx: MontgomeryContext, cfg: ArrayConfig | None = None) -> int:
    if not 0 <= a < ctx.modulus:
        raise ValueError("value must be reduced below the modulus")
    return mont_mul(a, ctx.r2_mod, ctx, cfg)


def from_mont(am: int, ctx: MontgomeryContext, cfg: ArrayConfig | None = None) -> int:
    # a full mont_mul by one, so every MontMul costs the same three engine calls
    return mont_mul(am, 1 % ctx.modulus, ctx, cfg)


def mod_exp_const_time(base: int, exponent: int, ctx: MontgomeryContext,
                       cfg: ArrayConfig | None = None) -> int:
    """base^exponent mod M, scanning exponent bits LSB first.

    Each bit costs one squaring and one multiplication; the multiply result
    is discarded on zero bits, so the work depends only on bit length.  Entry
    and exit add one Montgomery multiplication each.
    """
    if not 0 <= base < ctx.modulus:
        raise ValueError("base must be reduced below the modulus")
    if exponent < 0:
        raise ValueError("exponent must be non-negative")
    acc = ctx.r_mod
    sq = to_mont(base, ctx, cfg)
    for i in range(exponent.bit_length()):
        prod = mont_mul(acc, sq, ctx, cfg)   # M1: multiply into the ladder
        if (exponent >> i) & 1:
            acc = prod
        sq = mont_mul(sq, sq, ctx, cfg)      # M0: running square
    return from_mont(acc, ctx, cfg)


@dataclass(frozen=True)
class KeygenVerdict:
    ok: bool
    violation: str | None = None


_KEY_CONDITIONS = (
    ("1 < e_prv < phi", lambda p, q, e_pub, e_prv, phi: 1 < e_prv < phi),
    ("gcd(e_prv, phi) = 1", lambda p, q, e_pub, e_prv, phi: math.gcd(e_prv, phi) == 1),
    ("1 < e_pub < e_prv", lambda p, q, e_pub, e_prv, phi: 1 < e_pub < e_prv),
    ("e_pub * e_prv mod phi = 1", lambda p, q, e_pub, e_prv, phi: (e_pub * e_prv) % phi == 1),
)


def keygen_check(p: int, q: int, e_pub: int, e_prv: int) -> KeygenVerdict:
    """Verify the exponent conditions in order; report the first violation."""
    phi = (p - 1) * (q - 1)
    for name, cond in _KEY_CONDITIONS:
        if not cond(p, q, e_pub, e_prv, phi):
            return KeygenVerdict(False, name)
    return KeygenVerdict(True)


@dataclass(frozen=True)
class TraceEvent:
    kernel: int      # 1 load, 2 prepare, 3 multiply, 4 collect, 5 writeback
    task: int
    iteration: int   # -1 entry conversion, bit index, bitlen(e) exit
    mult: int        # 0 square / entry / exit, 1 ladder multiply
    stage: int       # 0..2 engine multiplications inside one MontMul
    start: int
    end: int


@dataclass(frozen=True)
class PipelineTrace:
    events: tuple[TraceEvent, ...]
    span: int
    multiplier_busy_fraction: float

    def kernel_events(self, kernel: int) -> list[TraceEvent]:
        return [e for e in self.events if e.kernel == kernel]


@dataclass(frozen=True)
class TaskBatch:
    messages: tuple[int, ...]
    exponent: int
    ctx: MontgomeryContext


def _mont_mul_schedule(nbits: int) -> list[tuple[int, int]]:
    """(iteration, mult) labels of every MontMul one task issues, in order."""
    ops = [(-1, 0)]  # entry: to Montgomery space
    for i in range(nbits):
        ops.append((i, 0))  # square
        ops.append((i, 1))  # ladder multiply (result kept or discarded)
    ops.append((nbits, 0))  # exit: leave Montgomery space
    return ops


def rsa_pipeline_sim(batch: TaskBatch, cfg: ArrayConfig | None = None,
                     prof=None) -> tuple[list[int], PipelineTrace]:
    """Run a batch and produce the five-kernel interleaving trace.

    The multiplier (kernel 3) serves one engine multiplication per abstract
    slot; a task's next multiplication becomes ready one slot after its
    previous one finished (collect plus prepare), so batches of two or more
    keep the multiplier saturated while a single task leaves gaps.  Kernel
    2/4 events bracket each multiplication; kernels 1 and 5 bracket each
    task.  Slot times are abstract; `prof` is accepted for interface
    stability but does not change the ordering.
    """
    if len(batch.messages) < 1:
        raise ValueError("batch must contain at least one task")
    results = [mod_exp_const_time(m, batch.exponent, batch.ctx, cfg)
               for m in batch.messages]

    ops = _mont_mul_schedule(batch.exponent.bit_length())
    pending = {t: 0 for t in range(len(batch.messages))}  # next op index * 3 stages
    ready = {t: t + 2 for t in range(len(batch.messages))}  # after load + prepare
    last_served = {t: -1 for t in range(len(batch.messages))}
    events = [
        TraceEvent(1, t, -1, 0, 0, t, t + 1) for t in range(len(batch.messages))
    ]
    total_stages = len(ops) * 3
    slot = 0
    busy = 0
    first_k3 = None
    while any(v < total_stages for v in pending.values()):
        runnable = [t for t, v in pending.items() if v < total_stages and ready[t] <= slot]
        if not runnable:
            slot += 1
            continue
        task = min(runnable, key=lambda t: (last_served[t], t))
        idx = pending[task]
        iteration, mult = ops[idx // 3]
        stage = idx % 3
        events.append(TraceEvent(2, task, iteration, mult, stage, slot - 1, slot))
        events.append(TraceEvent(3, task, iteration, mult, stage, slot, slot + 1))
        events.append(TraceEvent(4, task, iteration, mult, stage, slot + 1, slot + 2))
        if first_k3 is None:
            first_k3 = slot
        busy += 1
        pending[task] = idx + 1
        ready[task] = slot + 2  # collect + prepare before the next stage
        last_served[task] = slot
        slot += 1
        if pending[task] == total_stages:
            events.append(TraceEvent(5, task, ops[-1][0], 0, 2, slot + 1, slot + 2))
    span = slot - first_k3  # first kernel-3 start to last kernel-3 end
    trace = PipelineTrace(tuple(events), span, busy / span)
    return results, trace
