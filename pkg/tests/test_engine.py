import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_columns
from tilemul.carry import normalize
from tilemul.engine import (
    ArrayConfig,
    counters,
    karatsuba_mul_ints,
    karatsuba_oracle,
    kernel_cycle_count,
    mul_ints,
    plan_tiles,
    run_array,
    schoolbook_mul,
    tile_kernel,
)
from tilemul.limbs import SEGMENT_MASK, AccVector, decompose

seg = st.integers(0, SEGMENT_MASK)


def cfg(p0, p1, n_bits=4096, p_inter=1):
    return ArrayConfig(p_inter, p0, p1, n_bits)


# --- tiling -------------------------------------------------------------

def test_single_tile_covers_everything():
    grid = plan_tiles(4, 4, cfg(1, 1))
    assert len(grid.tiles) == 1
    t = grid.tiles[0]
    assert t.s0 == 4 and t.s1 == 8  # S1 lane-padded
    assert t.s0 * 4 == 16  # sixteen partial products over the raw limbs


def test_full_partition_gives_sixteen_tiles():
    grid = plan_tiles(4, 4, cfg(4, 4))
    assert len(grid.tiles) == 16
    assert grid.s0 == 1 and grid.s1 == 8


def test_table_scale_partition_gives_132_tiles():
    grid = plan_tiles(2115, 2115, cfg(11, 12))
    assert len(grid.tiles) == 132
    assert grid.s0 == 193 and grid.s1 == 184
    assert len(grid.chains) == 11 + 12 - 1


def test_tile_coverage_is_exact_partition():
    grid = plan_tiles(10, 10, cfg(3, 2))
    seen = set()
    for t in grid.tiles:
        for i in range(*t.a_range):
            for j in range(*t.b_range):
                assert (i, j) not in seen
                seen.add((i, j))
    assert len(seen) == grid.l0_padded * grid.l1_padded


def test_over_partition_rejected():
    with pytest.raises(ValueError, match="over-partition"):
        plan_tiles(4, 4, cfg(5, 1))


# --- tile kernel --------------------------------------------------------

def _zero_stream(s0, s1):
    ngroups = -(-(s0 + s1 - 1) // 8)
    return [AccVector.zero(8 * g) for g in range(ngroups)]


def _stream_columns(groups):
    cols = []
    for vec in groups:
        cols.extend(vec.lanes)
    return cols


def test_tile_kernel_unit_product():
    a = [1] + [0] * 7
    b = [1] + [0] * 7
    out = _stream_columns(tile_kernel(a, b, _zero_stream(8, 8)))
    assert out[0] == 1 and all(v == 0 for v in out[1:])


def test_tile_kernel_passthrough_on_zero_operand():
    acc_in = [AccVector(tuple(range(8)), 0), AccVector(tuple(range(8, 16)), 8)]
    out = tile_kernel([0] * 8, [0] * 8, list(acc_in))
    assert [v.lanes for v in out] == [v.lanes for v in acc_in]


def test_tile_kernel_matches_brute_force(rng):
    for _ in range(10):
        a = [rng.randrange(1 << 31) for _ in range(16)]
        b = [rng.randrange(1 << 31) for _ in range(16)]
        got = _stream_columns(tile_kernel(a, b, _zero_stream(16, 16)))
        want = brute_force_columns(a, b)
        assert got[: len(want)] == want
        assert all(v == 0 for v in got[len(want):])


def test_tile_kernel_stream_length_checked():
    with pytest.raises(ValueError, match="groups"):
        tile_kernel([1] * 8, [1] * 8, [AccVector.zero()])


def test_tile_kernel_mac_count_is_s0_s1():
    counters.reset()
    tile_kernel([1] * 13, [1] * 16, _zero_stream(13, 16))
    assert counters.mac_products == 13 * 16


# --- array execution ----------------------------------------------------

def test_degenerate_grid_equals_single_kernel(rng):
    a = [rng.randrange(1 << 31) for _ in range(8)]
    b = [rng.randrange(1 << 31) for _ in range(8)]
    lv_a = decompose(sum(v << (31 * i) for i, v in enumerate(a)), 8 * 31)
    lv_b = decompose(sum(v << (31 * i) for i, v in enumerate(b)), 8 * 31)
    acc = run_array(lv_a, lv_b, cfg(1, 1, n_bits=8 * 31))
    want = brute_force_columns(a, b)
    assert list(acc.columns) == want[: len(acc.columns)]


def test_closed_form_square():
    n = 4096
    v = (1 << n) - 1
    acc = run_array(decompose(v, n), decompose(v, n), cfg(1, 1, n_bits=n))
    assert normalize(acc).value() == v * v


def test_lane_and_packed_kernels_agree(rng):
    n = 2048
    a, b = rng.getrandbits(n), rng.getrandbits(n)
    for c in (cfg(1, 1, n), cfg(3, 4, n), cfg(7, 2, n)):
        packed = run_array(decompose(a, n), decompose(b, n), c)
        lanes = run_array(decompose(a, n), decompose(b, n), c, lane_kernel=True)
        assert packed.columns == lanes.columns


def test_tiling_invariance_small(rng):
    n = 1984  # 64 limbs
    for _ in range(5):
        a, b = rng.getrandbits(n), rng.getrandbits(n)
        results = {
            mul_ints(a, b, n, c)
            for c in (cfg(1, 1, n), cfg(2, 2, n), cfg(8, 8, n), cfg(64, 1, n), cfg(5, 13, n))
        }
        assert results == {a * b}


def test_mac_count_covers_padded_grid():
    counters.reset()
    n = 1984
    mul_ints(1, 1, n, cfg(2, 3, n))
    grid = plan_tiles(64, 64, cfg(2, 3, n))
    assert counters.mac_products == grid.l0_padded * grid.l1_padded
    assert counters.multiplications == 1


# --- schoolbook entry points ---------------------------------------------

def test_schoolbook_zero():
    assert schoolbook_mul("0x0", "0xdeadbeef", 32) == "0x0"


def test_schoolbook_16_bit_example():
    assert schoolbook_mul("0xFFFF", "0xFFFF", 16) == "0xfffe0001"


def test_schoolbook_matches_native_8_bit(rng):
    for _ in range(10_000):
        a, b = rng.getrandbits(8), rng.getrandbits(8)
        assert mul_ints(a, b, 8) == a * b


def test_schoolbook_commutes(rng):
    n = 992
    for _ in range(20):
        a, b = rng.getrandbits(n), rng.getrandbits(n)
        assert mul_ints(a, b, n) == mul_ints(b, a, n)


def test_range_errors_propagate():
    with pytest.raises(ValueError):
        schoolbook_mul("0x100", "0x1", 8)


# --- karatsuba oracle -----------------------------------------------------

def test_karatsuba_power_of_two_halves():
    n = 512
    v = 1 << (n // 2)
    assert karatsuba_mul_ints(v, v, n) == 1 << n


def test_karatsuba_middle_term_identity(rng):
    # (Ah + Al)(Bh + Bl) - AhBh - AlBl == AhBl + AlBh
    for _ in range(50):
        ah, al, bh, bl = (rng.getrandbits(256) for _ in range(4))
        middle = (ah + al) * (bh + bl) - ah * bh - al * bl
        assert middle == ah * bl + al * bh


def test_cross_oracle_agreement_1024(rng):
    for _ in range(200):
        a, b = rng.getrandbits(1024), rng.getrandbits(1024)
        assert karatsuba_mul_ints(a, b, 1024) == mul_ints(a, b, 1024)


def test_karatsuba_hex_wrapper():
    assert karatsuba_oracle("0xFFFF", "0xFFFF", 16) == "0xfffe0001"
    with pytest.raises(ValueError):
        karatsuba_oracle("0x100", "0x1", 8)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, (1 << 1024) - 1), st.integers(0, (1 << 1024) - 1))
def test_engine_equals_oracle_property(a, b):
    assert mul_ints(a, b, 1024) == karatsuba_mul_ints(a, b, 1024)


# --- kernel cycle model ----------------------------------------------------

def test_eff_monotone_over_square_sweep():
    effs = [kernel_cycle_count(s, s).eff for s in (8, 16, 32, 64, 128, 256)]
    assert all(x <= y for x, y in zip(effs, effs[1:]))
    assert all(0 < e <= 1 for e in effs)


def test_eff_approaches_asymptote_below_one():
    assert kernel_cycle_count(4096, 4096).eff < 1


def test_small_tile_less_efficient_than_large():
    assert kernel_cycle_count(8, 8).eff < kernel_cycle_count(64, 64).eff


def test_cycle_model_counts_row_overhead():
    m = kernel_cycle_count(8, 8)
    assert m.cycles == 8 + 8  # one row of 8 MAC groups plus the fixed charge
    assert m.eff == pytest.approx(0.5)
