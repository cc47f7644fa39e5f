"""Serpentine placement of cascade chains on the 8 x 50 physical cell grid.

Cascade links run horizontally; even rows (bottom row is row 0) carry the
stream left to right, odd rows right to left.  Step 1 rearranges the logical
chains into equal-length links, step 2 packs the links row by row from the
bottom-left corner, reversing the orientation on odd rows to honor the
alternating stream directions.  Links never wrap across rows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import ArrayConfig

GRID_ROWS = 8
GRID_COLS = 50


class CapacityError(ValueError):
    """More cells requested than the grid can hold."""


class UnplaceableError(ValueError):
    """A link cannot be laid out under the row-contained cascade rule."""


@dataclass(frozen=True)
class PhysicalGrid:
    rows: int = GRID_ROWS
    cols: int = GRID_COLS

    @property
    def capacity(self) -> int:
        return self.rows * self.cols

    def direction(self, row: int) -> int:
        """+1 for left-to-right cascade rows, -1 for right-to-left."""
        return 1 if row % 2 == 0 else -1


@dataclass(frozen=True)
class LogicalArray:
    """Uniform cascade links: chain_count links of chain_length cells, per task."""

    chain_count: int
    chain_length: int
    task_count: int = 1

    def __post_init__(self):
        if self.chain_count < 1 or self.chain_length < 1 or self.task_count < 1:
            raise ValueError("logical array dimensions must be >= 1")

    @property
    def cells(self) -> int:
        return self.chain_count * self.chain_length * self.task_count


@dataclass(frozen=True)
class PlacementResult:
    assignments: dict  # (task, chain, pos) -> (row, col)

    @property
    def occupied_count(self) -> int:
        return len(self.assignments)


@dataclass(frozen=True)
class PlioPlan:
    inputs_per_task: int
    outputs_per_task: int
    total_plio: int


def plan_broadcast(cfg: ArrayConfig) -> PlioPlan:
    """Stream counts under row broadcast of A and hypotenuse broadcast of B.

    One input stream per tile row plus one per tile column, one output
    stream per reduction chain: total (2*P0 + 2*P1 - 1) * P_inter.
    """
    inputs = cfg.p_intra0 + cfg.p_intra1
    outputs = cfg.p_intra0 + cfg.p_intra1 - 1
    return PlioPlan(inputs, outputs, (2 * cfg.p_intra0 + 2 * cfg.p_intra1 - 1) * cfg.p_inter)


def logical_from_config(cfg: ArrayConfig) -> LogicalArray:
    """Equalize the anti-diagonal chains of a P0 x P1 tile grid into links.

    The chain lengths 1, 2, ..., min, ..., min, ..., 2, 1 pair up exactly
    (k with min-k), giving max(P0, P1) links of length min(P0, P1) with no
    pass-through padding.
    """
    return LogicalArray(
        chain_count=max(cfg.p_intra0, cfg.p_intra1),
        chain_length=min(cfg.p_intra0, cfg.p_intra1),
        task_count=cfg.p_inter,
    )


def place(logical: LogicalArray, grid: PhysicalGrid = PhysicalGrid()) -> PlacementResult:
    """Pack every (task, chain) link into the grid, bottom-left first."""
    if logical.chain_length > grid.cols:
        raise UnplaceableError(
            f"link length {logical.chain_length} exceeds the {grid.cols}-cell row"
        )
    if logical.cells > grid.capacity:
        raise CapacityError(f"{logical.cells} cells requested, grid holds {grid.capacity}")
    links_per_row = grid.cols // logical.chain_length
    total_links = logical.chain_count * logical.task_count
    rows_needed = -(-total_links // links_per_row)
    if rows_needed > grid.rows:
        raise CapacityError(
            f"{total_links} links of length {logical.chain_length} need "
            f"{rows_needed} rows, grid has {grid.rows}"
        )
    assignments = {}
    link = 0
    for task in range(logical.task_count):
        for chain in range(logical.chain_count):
            row, slot = divmod(link, links_per_row)
            start = slot * logical.chain_length
            for pos in range(logical.chain_length):
                if grid.direction(row) > 0:
                    col = start + pos
                else:
                    col = grid.cols - 1 - start - pos
                assignments[(task, chain, pos)] = (row, col)
            link += 1
    return PlacementResult(assignments)


def validate_placement(p: PlacementResult, grid: PhysicalGrid = PhysicalGrid()) -> list[str]:
    """Empty list iff bounds, injectivity and directed adjacency all hold."""
    violations = []
    seen = {}
    for key, (row, col) in p.assignments.items():
        if not (0 <= row < grid.rows and 0 <= col < grid.cols):
            violations.append(f"{key}: cell ({row}, {col}) outside the grid")
        if (row, col) in seen:
            violations.append(f"{key}: cell ({row}, {col}) already used by {seen[(row, col)]}")
        else:
            seen[(row, col)] = key
    for (task, chain, pos), (row, col) in p.assignments.items():
        nxt = p.assignments.get((task, chain, pos + 1))
        if nxt is None:
            continue
        nrow, ncol = nxt
        if nrow != row:
            violations.append(f"({task}, {chain}, {pos}->{pos + 1}): chain leaves row {row}")
        elif ncol - col != grid.direction(row):
            violations.append(
                f"({task}, {chain}, {pos}->{pos + 1}): step {ncol - col} against "
                f"the row-{row} cascade direction"
            )
    return violations


def render_text(p: PlacementResult, grid: PhysicalGrid = PhysicalGrid()) -> str:
    """One character per cell: task index (mod 36), '.' for free cells."""
    digits = "0123456789abcdefghijklmnopqrstuvwxyz"
    cells = [["." for _ in range(grid.cols)] for _ in range(grid.rows)]
    for (task, _chain, _pos), (row, col) in p.assignments.items():
        cells[row][col] = digits[task % len(digits)]
    # top row printed first, row 0 at the bottom
    return "\n".join("".join(cells[r]) for r in range(grid.rows - 1, -1, -1))


def placement_rows(p: PlacementResult) -> list[tuple[int, int, int, int, int]]:
    """(task, chain, pos, row, col) tuples in deterministic order."""
    return [
        (task, chain, pos, row, col)
        for (task, chain, pos), (row, col) in sorted(p.assignments.items())
    ]
