"""Command-line interface wiring the library end to end.

Every command prints a run report block (parameters, wall time, instrumented
operation counts, output checksums) and, where a tabular report is written,
renders a matplotlib figure next to it unless --no-plot is given.

Exit codes: 0 success, 2 bad input, 3 infeasible or unsatisfiable request.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import random
import sys
import time

from . import engine, mandelbrot, placement, rsa
from .dse import (
    InfeasibleError,
    ProfileData,
    ResourceCaps,
    DSE_CSV_COLUMNS,
    dse_search,
    load_caps,
    load_profile,
)
from .engine import ArrayConfig, counters, karatsuba_mul_ints, mul_ints
from .limbs import parse_hex

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


class VerificationError(Exception):
    pass


def _read_hex_lines(path: str) -> list[int]:
    with open(path) as fh:
        values = [parse_hex(line) for line in fh if line.strip()]
    if not values:
        raise ValueError(f"{path}: no operands found")
    return values


def _write_hex_lines(path: str, values) -> None:
    with open(path, "w") as fh:
        for v in values:
            fh.write(f"0x{v:x}\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _print_report(command: str, params: dict, wall: float, outputs) -> None:
    print("[run-report]")
    print(f"command = {command}")
    for key, value in params.items():
        print(f"{key} = {value}")
    print(f"wall_time_s = {wall:.6f}")
    print(f"engine_multiplications = {counters.multiplications}")
    print(f"mac_products = {counters.mac_products}")
    for path in outputs:
        print(f"sha256 {path} = {_sha256(path)}")


def _figure_path(out_path: str) -> str:
    stem, dot, _ext = out_path.rpartition(".")
    return (stem if dot else out_path) + ".png"


def _cfg_from_args(args, n_bits: int) -> ArrayConfig:
    return ArrayConfig(getattr(args, "inter", 1) or 1, args.intra0, args.intra1, n_bits)


def cmd_mul(args) -> int:
    a_vals = _read_hex_lines(args.a)
    b_vals = _read_hex_lines(args.b)
    if len(a_vals) != len(b_vals):
        raise ValueError("operand files hold different line counts")
    cfg = _cfg_from_args(args, args.bits)
    start = time.perf_counter()
    products = [mul_ints(a, b, args.bits, cfg) for a, b in zip(a_vals, b_vals)]
    wall = time.perf_counter() - start
    verified = None
    if args.verify:
        verified = all(
            p == karatsuba_mul_ints(a, b, args.bits)
            for p, a, b in zip(products, a_vals, b_vals)
        )
    _write_hex_lines(args.out, products)
    params = {
        "bits": args.bits,
        "pairs": len(products),
        "config": f"P_inter={cfg.p_inter} P_intra0={cfg.p_intra0} P_intra1={cfg.p_intra1}",
    }
    if verified is not None:
        params["oracle_match"] = verified
    _print_report("mul", params, wall, [args.out])
    if verified is False:
        raise VerificationError("engine product disagrees with the independent oracle")
    return EXIT_OK


def cmd_dse(args) -> int:
    caps = load_caps(args.caps) if args.caps else ResourceCaps()
    prof = load_profile(args.profile) if args.profile else ProfileData()
    start = time.perf_counter()
    result = dse_search(args.bits, caps, prof)
    wall = time.perf_counter() - start
    if result.best is None:
        raise InfeasibleError("no configuration satisfies the resource caps")
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DSE_CSV_COLUMNS)
        for r in result.rows:
            writer.writerow([
                r.p_intra0, r.p_intra1, r.p_inter, r.s0, r.s1, r.bottleneck,
                f"{r.tasks_per_second:.3f}", f"{r.lut:.6f}", f"{r.bram:.6f}",
                r.plio, r.aie,
            ])
    outputs = [args.out]
    if not args.no_plot:
        from .report import save_dse_figure

        fig_path = _figure_path(args.out)
        save_dse_figure(result.rows, fig_path)
        outputs.append(fig_path)
    best = result.best
    _print_report("dse", {
        "bits": args.bits,
        "candidates": len(result.rows),
        "best": f"P_inter={best.p_inter} P_intra0={best.p_intra0} P_intra1={best.p_intra1}",
        "best_tasks_per_s": f"{result.rows[0].tasks_per_second:.3f}",
    }, wall, outputs)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.tasks < 1:
        raise ValueError("need at least one task")
    cfg = _cfg_from_args(args, args.bits)
    rng = random.Random(args.seed)
    pairs = [(rng.getrandbits(args.bits), rng.getrandbits(args.bits))
             for _ in range(args.tasks)]
    durations = []
    start = time.perf_counter()
    for a, b in pairs:
        t0 = time.perf_counter()
        mul_ints(a, b, args.bits, cfg)
        durations.append(time.perf_counter() - t0)
    wall = time.perf_counter() - start
    outputs = []
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["task", "seconds", "mac_products_cumulative"])
            cumulative = 0
            grid = engine.plan_tiles(
                len(engine.decompose(0, args.bits)), len(engine.decompose(0, args.bits)), cfg
            )
            per_task = grid.l0_padded * grid.l1_padded
            for i, d in enumerate(durations):
                cumulative += per_task
                writer.writerow([i, f"{d:.6f}", cumulative])
        outputs.append(args.out)
        if not args.no_plot:
            from .report import save_bench_figure

            fig_path = _figure_path(args.out)
            save_bench_figure(durations, fig_path)
            outputs.append(fig_path)
    _print_report("bench", {
        "bits": args.bits,
        "tasks": args.tasks,
        "config": f"P_intra0={cfg.p_intra0} P_intra1={cfg.p_intra1}",
        "software_tasks_per_s": f"{args.tasks / wall:.3f}",
        "note": "software-simulation throughput, not a hardware figure",
    }, wall, outputs)
    return EXIT_OK


def cmd_place(args) -> int:
    if args.chains:
        logical = placement.LogicalArray(args.chains, args.length, args.tasks)
    else:
        cfg = ArrayConfig(args.tasks, args.intra0, args.intra1, 31)
        logical = placement.logical_from_config(cfg)
    start = time.perf_counter()
    result = placement.place(logical)
    wall = time.perf_counter() - start
    violations = placement.validate_placement(result)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "chain", "pos", "row", "col"])
        writer.writerows(placement.placement_rows(result))
    outputs = [args.out]
    if not args.no_plot:
        from .report import save_placement_figure

        fig_path = _figure_path(args.out)
        save_placement_figure(result, fig_path)
        outputs.append(fig_path)
    if args.text:
        print(placement.render_text(result))
    _print_report("place", {
        "links": f"{logical.chain_count} x {logical.chain_length} x {logical.task_count} tasks",
        "occupied": result.occupied_count,
        "violations": len(violations),
    }, wall, outputs)
    return EXIT_OK if not violations else 1


def cmd_rsa(args) -> int:
    modulus = _read_hex_lines(args.modulus)[0]
    exponent = _read_hex_lines(args.exponent)[0]
    messages = _read_hex_lines(args.infile)
    ctx = rsa.mont_setup(modulus, args.bits)
    cfg = _cfg_from_args(args, ctx.k)
    batch = rsa.TaskBatch(tuple(messages), exponent, ctx)
    start = time.perf_counter()
    results, trace = rsa.rsa_pipeline_sim(batch, cfg)
    wall = time.perf_counter() - start
    _write_hex_lines(args.out, results)
    outputs = [args.out]
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["kernel", "task", "iteration", "mult", "stage", "start", "end"])
            for e in trace.events:
                writer.writerow([e.kernel, e.task, e.iteration, e.mult, e.stage,
                                 e.start, e.end])
        outputs.append(args.trace)
    _print_report("rsa", {
        "bits": ctx.k,
        "tasks": len(messages),
        "multiplier_busy_fraction": f"{trace.multiplier_busy_fraction:.4f}",
    }, wall, outputs)
    return EXIT_OK


def cmd_mandelbrot(args) -> int:
    center_re = mandelbrot.fp_from_decimal(args.center_re, args.frac_bits)
    center_im = mandelbrot.fp_from_decimal(args.center_im, args.frac_bits)
    scale = mandelbrot.fp_from_decimal(args.scale, args.frac_bits)
    vp = mandelbrot.ViewPort(center_re, center_im, scale, args.width, args.height)
    start = time.perf_counter()
    itermap = mandelbrot.render(vp, args.frac_bits, args.max_iter,
                                scheduler_width=args.scheduler_width)
    wall = time.perf_counter() - start
    mandelbrot.write_pgm(itermap, args.out)
    outputs = [args.out]
    if not args.no_plot:
        from .report import save_mandelbrot_figure

        fig_path = _figure_path(args.out)
        save_mandelbrot_figure(itermap.counts, args.max_iter, fig_path)
        outputs.append(fig_path)
    _print_report("mandelbrot", {
        "view": f"({args.center_re}, {args.center_im}) scale {args.scale}",
        "pixels": f"{args.width}x{args.height}",
        "frac_bits": args.frac_bits,
        "max_iter": args.max_iter,
        "scheduler_width": args.scheduler_width,
    }, wall, outputs)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tilemul",
        description="Tiled arbitrary-precision multiplication toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mul", help="multiply hex operand files through the engine")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--intra0", type=int, default=1)
    p.add_argument("--intra1", type=int, default=1)
    p.add_argument("--verify", action="store_true",
                   help="cross-check against the Karatsuba oracle")
    p.set_defaults(func=cmd_mul)

    p = sub.add_parser("dse", help="search array configurations for peak throughput")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--caps", help="resource caps file (defaults built in)")
    p.add_argument("--profile", help="calibration profile file (defaults built in)")
    p.add_argument("--out", required=True, help="ranked candidate CSV")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_dse)

    p = sub.add_parser("bench", help="measure software multiplication throughput")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--tasks", type=int, required=True)
    p.add_argument("--intra0", type=int, default=1)
    p.add_argument("--intra1", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="per-task timing CSV")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("place", help="map cascade links onto the 8x50 grid")
    p.add_argument("--chains", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--tasks", type=int, default=1)
    p.add_argument("--intra0", type=int)
    p.add_argument("--intra1", type=int)
    p.add_argument("--out", required=True, help="assignment CSV")
    p.add_argument("--text", action="store_true", help="print the text grid")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_place)

    p = sub.add_parser("rsa", help="modular exponentiation over a message file")
    p.add_argument("--modulus", required=True, help="hex file, first line used")
    p.add_argument("--exponent", required=True, help="hex file, first line used")
    p.add_argument("--bits", type=int, default=None, help="Montgomery radix exponent")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", help="pipeline trace CSV")
    p.add_argument("--intra0", type=int, default=1)
    p.add_argument("--intra1", type=int, default=1)
    p.set_defaults(func=cmd_rsa)

    p = sub.add_parser("mandelbrot", help="render an escape-time map to PGM")
    p.add_argument("--center-re", required=True)
    p.add_argument("--center-im", required=True)
    p.add_argument("--scale", required=True)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--frac-bits", type=int, default=64)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--scheduler-width", type=int, default=1)
    p.add_argument("--out", required=True, help="PGM path")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_mandelbrot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "place" and bool(args.chains) == bool(args.intra0):
        print("place: give either --chains/--length or --intra0/--intra1",
              file=sys.stderr)
        return EXIT_INPUT
    if args.command == "place" and args.chains and not args.length:
        print("place: --chains requires --length", file=sys.stderr)
        return EXIT_INPUT
    counters.reset()
    try:
        return args.func(args)
    except (InfeasibleError, placement.CapacityError, placement.UnplaceableError) as exc:
        print(f"tilemul {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as exc:
        print(f"tilemul {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationError as exc:
        print(f"tilemul {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
