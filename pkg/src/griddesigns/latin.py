"""Latin squares, the Jacobson-Matthews random walk, and the
correspondence between Latin squares and bijection families.

A bijection family assigns, to every block beta of a symmetric design D1,
a bijection psi_beta from the parallel classes of a resolvable design
onto beta, subject to the uniqueness condition: for each class P and each
point i of D1 there is exactly one beta with psi_beta(P) = i.  When D1 is
the trivial symmetric design (every block the complement of one point),
such families are exactly Latin squares of order v1: add a dummy column
for the missing point and the psi_beta become the rows of the square.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .incidence import Check, IncidenceStructure, Resolution


@dataclass(frozen=True)
class LatinSquare:
    """Order-n array of symbols 0..n-1; rows and columns are permutations."""

    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cells = tuple(tuple(row) for row in self.cells)
        n = len(cells)
        if n == 0:
            raise ValueError("empty square")
        for row in cells:
            if len(row) != n:
                raise ValueError("square array required")
            for s in row:
                if not 0 <= s < n:
                    raise ValueError(f"symbol {s} out of range 0..{n - 1}")
        object.__setattr__(self, "cells", cells)

    @property
    def n(self) -> int:
        return len(self.cells)

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return self.cells[i]


def cyclic_square(n: int) -> LatinSquare:
    return LatinSquare(tuple(tuple((i + j) % n for j in range(n)) for i in range(n)))


def addition_table_elementary_abelian(m: int) -> LatinSquare:
    """Addition (XOR) table of GF(2)^m, order 2^m."""
    if not 1 <= m <= 6:
        raise ValueError("m out of range 1..6")
    n = 1 << m
    return LatinSquare(tuple(tuple(b ^ c for c in range(n)) for b in range(n)))


def validate_latin(square: LatinSquare) -> Check:
    """Rows and columns must all be permutations of 0..n-1; the witness is
    the first duplicated (axis, index, symbol) in row-then-column scan."""
    n = square.n
    for i, row in enumerate(square.cells):
        seen = set()
        for s in row:
            if s in seen:
                return Check(False, reason="repeated symbol in row", witness=("row", i, s))
            seen.add(s)
    for j in range(n):
        seen = set()
        for i in range(n):
            s = square.cells[i][j]
            if s in seen:
                return Check(
                    False, reason="repeated symbol in column", witness=("col", j, s)
                )
            seen.add(s)
    return Check(True)


class JacobsonMatthewsChain:
    """The +-1 contingency-cube random walk on (im)proper Latin squares.

    State is a function f on row x column x symbol cells with line sums 1,
    all entries 0/1 (proper) except possibly a single -1 (improper).  Each
    move picks a zero cell (proper) or resolves the -1 cell (improper) and
    adds the +-1 pattern of a 2x2x2 subcube.  Squares are only read off
    proper states.  Driven by a seeded PCG64 generator, so identical
    (n, seed, move count) give identical output.
    """

    def __init__(self, n: int, seed):
        if n < 2:
            raise ValueError("order must be at least 2")
        self.n = n
        self.rng = np.random.default_rng(seed)
        # start from the cyclic square
        f = [[[0] * n for _ in range(n)] for _ in range(n)]
        for x in range(n):
            for y in range(n):
                f[x][y][(x + y) % n] = 1
        self.f = f
        self.improper: tuple[int, int, int] | None = None

    def _move(self) -> None:
        n, f = self.n, self.f
        ri = self.rng.integers
        if self.improper is None:
            x = int(ri(n))
            y = int(ri(n))
            line = f[x][y]
            zcur = line.index(1)
            z = int(ri(n - 1))
            if z >= zcur:
                z += 1
            x2 = next(r for r in range(n) if f[r][y][z] == 1)
            y2 = next(c for c in range(n) if f[x][c][z] == 1)
            z2 = zcur
        else:
            x, y, z = self.improper
            rows = [r for r in range(n) if f[r][y][z] == 1]
            cols = [c for c in range(n) if f[x][c][z] == 1]
            syms = [s for s in range(n) if f[x][y][s] == 1]
            x2 = rows[int(ri(2))]
            y2 = cols[int(ri(2))]
            z2 = syms[int(ri(2))]
        f[x][y][z] += 1
        f[x2][y][z] -= 1
        f[x][y2][z] -= 1
        f[x][y][z2] -= 1
        f[x2][y2][z] += 1
        f[x2][y][z2] += 1
        f[x][y2][z2] += 1
        f[x2][y2][z2] -= 1
        self.improper = (x2, y2, z2) if f[x2][y2][z2] == -1 else None

    def walk(self, moves: int) -> None:
        """Perform the given number of moves, then continue to the next
        proper state if the walk ended improper."""
        for _ in range(moves):
            self._move()
        while self.improper is not None:
            self._move()

    def square(self) -> LatinSquare:
        if self.improper is not None:
            raise RuntimeError("state is improper")
        return LatinSquare(
            tuple(tuple(row.index(1) for row in self.f[x]) for x in range(self.n))
        )


def jm_sample(n: int, seed, moves: int | None = None) -> LatinSquare:
    """One random Latin square of order n after `moves` walk steps
    (default 10 n^3)."""
    if moves is None:
        moves = 10 * n**3
    if moves < 1:
        raise ValueError("moves must be positive")
    chain = JacobsonMatthewsChain(n, seed)
    chain.walk(moves)
    return chain.square()


def jm_squares(
    n: int,
    seed,
    count: int,
    burn_in: int | None = None,
    spacing: int | None = None,
) -> Iterator[LatinSquare]:
    """Stream of `count` squares from one chain: burn-in of 10 n^3 moves,
    then one square every n^3 moves."""
    if burn_in is None:
        burn_in = 10 * n**3
    if spacing is None:
        spacing = n**3
    chain = JacobsonMatthewsChain(n, seed)
    chain.walk(burn_in)
    for i in range(count):
        if i:
            chain.walk(spacing)
        yield chain.square()


@dataclass(frozen=True)
class BijectionFamily:
    """The maps psi_beta, tabulated: images[beta][c] is the Delta_1 point
    assigned to parallel class c by block beta's bijection.  ``blocks``
    records the target blocks (D1's block list)."""

    images: tuple[tuple[int, ...], ...]
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(tuple(r) for r in self.images))
        object.__setattr__(self, "blocks", tuple(tuple(sorted(b)) for b in self.blocks))
        if len(self.images) != len(self.blocks):
            raise ValueError("one image row per block required")

    @property
    def n_blocks(self) -> int:
        return len(self.images)

    @property
    def n_classes(self) -> int:
        return len(self.images[0]) if self.images else 0

    def class_for(self, beta: int) -> dict[int, int]:
        """Inverse row map: Delta_1 point j -> parallel class index."""
        return {j: c for c, j in enumerate(self.images[beta])}


def _trivial_missing_points(d1: IncidenceStructure) -> list[int]:
    """For a trivial symmetric design, the point each block omits."""
    v1 = d1.v
    if d1.b != v1:
        raise ValueError("trivial symmetric design must have b = v")
    missing = []
    full = frozenset(range(v1))
    for i, fs in enumerate(d1.block_sets):
        rest = full - fs
        if len(rest) != 1:
            raise ValueError(f"block {i} is not the complement of a single point")
        missing.append(next(iter(rest)))
    if sorted(missing) != list(range(v1)):
        raise ValueError("blocks do not omit each point exactly once")
    return missing


def latin_to_bijections(
    square: LatinSquare,
    d1: IncidenceStructure,
    column_classes: Sequence[int] | None = None,
) -> BijectionFamily:
    """Turn a Latin square of order v1 into a bijection family for the
    trivial symmetric design on v1 points.

    Column 0 is the dummy column: rows are first normalised by their
    column-0 entry, so the row with leading symbol b describes the block
    omitting b.  Column c >= 1 feeds parallel class ``column_classes[c-1]``
    (identity by default), and the cell value is the assigned point.
    """
    res = validate_latin(square)
    if not res:
        raise ValueError(f"not a Latin square: {res.reason} at {res.witness}")
    v1 = square.n
    missing = _trivial_missing_points(d1)
    if d1.v != v1:
        raise ValueError("square order must match the design's point count")
    r = v1 - 1
    if column_classes is None:
        column_classes = tuple(range(r))
    if sorted(column_classes) != list(range(r)):
        raise ValueError("column_classes must be a bijection onto 0..r-1")
    row_of = {row[0]: row for row in square.cells}
    block_of_missing = {m: i for i, m in enumerate(missing)}
    images = [None] * v1
    for b, row in row_of.items():
        imgs = [0] * r
        for c in range(1, v1):
            imgs[column_classes[c - 1]] = row[c]
        images[block_of_missing[b]] = tuple(imgs)
    return BijectionFamily(tuple(images), d1.blocks)


def bijections_to_latin(family: BijectionFamily, d1: IncidenceStructure) -> LatinSquare:
    """Reconstruct the Latin square (rows keyed by the dummy symbol) from a
    family over a trivial symmetric design; inverse of latin_to_bijections
    with the identity column map."""
    missing = _trivial_missing_points(d1)
    rows = []
    for beta, imgs in enumerate(family.images):
        rows.append((missing[beta],) + tuple(imgs))
    rows.sort(key=lambda row: row[0])
    return LatinSquare(tuple(rows))


def validate_bijections(
    family: BijectionFamily, d1: IncidenceStructure, resolution: Resolution
) -> Check:
    """Check the family's defining conditions: every row is a bijection
    onto its block, and every (class, point) pair is hit by exactly one
    block's map."""
    r = len(resolution.classes)
    if family.n_blocks != d1.b:
        return Check(False, reason="row count differs from block count")
    if family.n_classes != r:
        return Check(False, reason="column count differs from class count")
    if family.blocks != d1.blocks:
        return Check(False, reason="family was built against a different block list")
    for beta, fs in enumerate(d1.block_sets):
        if len(fs) != r:
            return Check(False, reason="block size differs from class count", witness=(beta,))
        if set(family.images[beta]) != fs:
            return Check(
                False, reason="row is not a bijection onto its block", witness=(beta,)
            )
    for c in range(r):
        hits = [0] * d1.v
        for beta in range(family.n_blocks):
            hits[family.images[beta][c]] += 1
        for i, h in enumerate(hits):
            if h != 1:
                return Check(
                    False,
                    reason="uniqueness condition fails",
                    witness=(c, i, h),
                )
    return Check(True)


# --- Latin square file format: line 1 "n", then n rows of n symbols ---


def write_latin(square: LatinSquare, path) -> None:
    lines = [str(square.n)]
    lines.extend(" ".join(map(str, row)) for row in square.cells)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_latin(path) -> LatinSquare:
    with open(path) as fh:
        raw = fh.read().split()
    if not raw:
        raise ValueError("empty latin square file")
    n = int(raw[0])
    vals = [int(tok) for tok in raw[1:]]
    if len(vals) != n * n:
        raise ValueError(f"expected {n * n} symbols, got {len(vals)}")
    return LatinSquare(tuple(tuple(vals[i * n : (i + 1) * n]) for i in range(n)))
