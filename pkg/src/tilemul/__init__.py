"""Arbitrary-precision integer multiplication on a simulated tiled MAC array."""

from .limbs import (
    SEGMENT_BITS,
    SIMD_LANES,
    ACC_BITS,
    AccumulatorOverflowError,
    AccVector,
    LimbVector,
    WeightedAcc,
    acc_mac,
    decompose,
    pad_limbs,
    recompose,
)
from .carry import CarryChunk, propagate_full, stage1_local_carry, stage2_merge
from .engine import (
    ArrayConfig,
    TileGrid,
    TileSpec,
    counters,
    karatsuba_oracle,
    kernel_cycle_count,
    mul_ints,
    plan_tiles,
    run_array,
    schoolbook_mul,
    tile_kernel,
)
from .placement import (
    LogicalArray,
    PhysicalGrid,
    PlacementResult,
    PlioPlan,
    place,
    plan_broadcast,
    validate_placement,
)
from .dse import (
    ProfileData,
    ResourceCaps,
    ThroughputEstimate,
    aie_cycles,
    check_constraints,
    dse_search,
    estimate_throughput,
    segments_per_aie,
)
from .rsa import (
    MontgomeryContext,
    TaskBatch,
    from_mont,
    keygen_check,
    mod_exp_const_time,
    mont_mul,
    mont_setup,
    rsa_pipeline_sim,
    to_mont,
)
from .mandelbrot import (
    FixedPoint,
    IterationMap,
    ViewPort,
    divergence_test,
    fp_from_decimal,
    render,
    write_pgm,
)

__version__ = "0.1.0"
