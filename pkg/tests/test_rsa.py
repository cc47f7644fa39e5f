import pytest

from conftest import random_keyset, ref_mod_exp
from tilemul.engine import ArrayConfig, counters
from tilemul.rsa import (
    TaskBatch,
    from_mont,
    keygen_check,
    mod_exp_const_time,
    mont_mul,
    mont_setup,
    rsa_pipeline_sim,
    to_mont,
)


# --- Montgomery setup ---------------------------------------------------------

def test_setup_small_modulus_17():
    ctx = mont_setup(17, 5)
    assert ctx.radix == 32
    # brute force over residues mod 32
    assert ctx.n_prime == next(x for x in range(32) if (17 * x) % 32 == 31)
    assert ctx.n_prime == 15


def test_setup_modulus_3():
    ctx = mont_setup(3, 2)
    assert ctx.r_mod == 1  # 4 mod 3


def test_setup_identity_random_2048(rng):
    m = rng.getrandbits(2048) | (1 << 2047) | 1
    ctx = mont_setup(m)
    assert (m * ctx.n_prime) % ctx.radix == ctx.radix - 1


def test_setup_rejects_bad_inputs():
    with pytest.raises(ValueError, match="odd"):
        mont_setup(16, 5)
    with pytest.raises(ValueError, match="radix"):
        mont_setup(17, 3)
    assert mont_setup("0x11", 5).modulus == 17


# --- Montgomery multiplication ---------------------------------------------------

def test_mont_one_is_idempotent():
    ctx = mont_setup(1000003, 20)
    assert mont_mul(ctx.r_mod, ctx.r_mod, ctx) == ctx.r_mod


def test_mont_mul_exhaustive_mod_17():
    ctx = mont_setup(17, 5)
    for a in range(17):
        for b in range(17):
            got = from_mont(mont_mul(to_mont(a, ctx), to_mont(b, ctx), ctx), ctx)
            assert got == (a * b) % 17


def test_mont_mul_costs_three_engine_multiplications():
    ctx = mont_setup(1000003, 20)
    counters.reset()
    mont_mul(123456, 654321 % ctx.modulus, ctx)
    assert counters.multiplications == 3


def test_mont_mul_range_checked():
    ctx = mont_setup(17, 5)
    with pytest.raises(ValueError):
        mont_mul(17, 1, ctx)


# --- domain conversion --------------------------------------------------------------

def test_to_mont_fixed_points():
    ctx = mont_setup(1000003, 20)
    assert to_mont(0, ctx) == 0
    assert to_mont(1, ctx) == ctx.r_mod


def test_mont_roundtrip_random(rng):
    ctx = mont_setup(rng.getrandbits(256) | (1 << 255) | 1)
    for _ in range(1000):
        a = rng.randrange(ctx.modulus)
        assert from_mont(to_mont(a, ctx), ctx) == a


# --- exponentiation -------------------------------------------------------------------

def test_mod_exp_edge_exponents():
    ctx = mont_setup(1000003, 20)
    assert mod_exp_const_time(12345, 0, ctx) == 1
    assert mod_exp_const_time(12345, 1, ctx) == 12345


def test_mod_exp_matches_reference_512(rng):
    m = rng.getrandbits(512) | (1 << 511) | 1
    ctx = mont_setup(m)
    for _ in range(5):
        base = rng.randrange(m)
        exp = rng.getrandbits(64)
        assert mod_exp_const_time(base, exp, ctx) == ref_mod_exp(base, exp, m)


def test_mod_exp_work_depends_only_on_bit_length():
    ctx = mont_setup(rng_m := (1 << 255) + 977)  # odd 256-bit modulus
    bits = 64
    sparse = 1 << (bits - 1)                    # Hamming weight 1
    dense = (1 << bits) - 1                     # Hamming weight 64
    counts = []
    for exp in (sparse, dense, (1 << (bits - 1)) | 0xDEAD):
        counters.reset()
        mod_exp_const_time(3, exp, ctx)
        counts.append(counters.multiplications)
    assert len(set(counts)) == 1
    assert counts[0] == 3 * (2 * bits + 2)  # two MontMuls per bit, entry, exit


def test_rsa_roundtrip_small_keyset(rng):
    p, q, e_pub, e_prv = random_keyset(64, rng)
    m_mod = p * q
    ctx = mont_setup(m_mod)
    for _ in range(10):
        msg = rng.randrange(m_mod)
        cipher = mod_exp_const_time(msg, e_pub, ctx)
        assert mod_exp_const_time(cipher, e_prv, ctx) == msg


# --- key checking ----------------------------------------------------------------------

def test_keygen_check_detects_swapped_exponents():
    verdict = keygen_check(11, 13, e_pub=103, e_prv=7)
    assert not verdict.ok
    assert verdict.violation == "1 < e_pub < e_prv"


def test_keygen_check_accepts_valid_set():
    assert keygen_check(11, 13, e_pub=7, e_prv=103).ok  # 7 * 103 = 721 = 6*120 + 1


def test_keygen_check_boundary_phi():
    verdict = keygen_check(11, 13, e_pub=7, e_prv=120)
    assert not verdict.ok
    assert verdict.violation == "1 < e_prv < phi"


# --- pipeline simulation ----------------------------------------------------------------

def _batch(messages, exponent=0b1011, modulus=1000003):
    ctx = mont_setup(modulus, 20)
    return TaskBatch(tuple(messages), exponent, ctx)


def test_pipeline_outputs_match_direct_execution():
    batch = _batch([3, 77, 123456])
    results, _ = rsa_pipeline_sim(batch)
    assert results == [mod_exp_const_time(m, batch.exponent, batch.ctx)
                       for m in batch.messages]


def test_pipeline_single_task_leaves_gaps():
    _, solo = rsa_pipeline_sim(_batch([3]))
    _, pair = rsa_pipeline_sim(_batch([3, 77]))
    assert solo.multiplier_busy_fraction < pair.multiplier_busy_fraction
    assert pair.multiplier_busy_fraction == pytest.approx(1.0)


def test_pipeline_interleaves_tasks_round_robin():
    _, trace = rsa_pipeline_sim(_batch([3, 77]))
    k3 = trace.kernel_events(3)
    # the published two-task order: the first ladder multiplications alternate
    ladder = [e for e in k3 if e.iteration == 0 and e.mult == 0]
    assert [(e.task, e.stage) for e in ladder[:4]] == [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert all(a.task != b.task for a, b in zip(k3, k3[1:]))


def test_pipeline_event_conservation():
    exponent = 0b110101
    batch = _batch([3, 77, 99], exponent)
    _, trace = rsa_pipeline_sim(batch)
    k3 = trace.kernel_events(3)
    assert len(k3) == 3 * (2 * exponent.bit_length() + 2) * 3
    # kernel-3 events never overlap
    spans = sorted((e.start, e.end) for e in k3)
    assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))


def test_pipeline_has_all_five_kernels():
    _, trace = rsa_pipeline_sim(_batch([3, 77]))
    assert {e.kernel for e in trace.events} == {1, 2, 3, 4, 5}
