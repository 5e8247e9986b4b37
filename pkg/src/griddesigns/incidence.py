"""Incidence structures and brute-force verification of design properties.

An :class:`IncidenceStructure` is a point set 0..v-1 together with a list
of blocks (point subsets).  Verification is always by exhaustive counting:
pair counts come from the integer incidence matrix product N N^T, so a
claimed parameter set is either confirmed exactly or refuted with a
deterministic witness (the lexicographically least offending tuple).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Check:
    """Outcome of a structure check.

    ``value`` carries the verified quantity (a lambda, a (k2, lambda2)
    pair, ...) on success; ``witness`` the least offending tuple on
    failure, with ``reason`` naming the violated condition.
    """

    ok: bool
    value: object = None
    witness: object = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class IncidenceStructure:
    """Points 0..v-1 and a sequence of blocks (nonempty point subsets).

    Blocks are stored as sorted index tuples; block list order matters
    only for identity, never for design semantics.  A per-point bitmap
    of block memberships mirrors the block list for fast pair counting.
    """

    __slots__ = ("v", "blocks", "_block_sets", "_point_masks", "_block_masks", "_matrix")

    def __init__(self, v: int, blocks: Iterable[Iterable[int]]):
        if v <= 0:
            raise ValueError("need at least one point")
        blks = []
        for i, blk in enumerate(blocks):
            t = tuple(sorted(blk))
            if not t:
                raise ValueError(f"block {i} is empty")
            if t[0] < 0 or t[-1] >= v:
                raise ValueError(f"block {i} has a point outside 0..{v - 1}")
            if any(a == b for a, b in zip(t, t[1:])):
                raise ValueError(f"block {i} repeats a point")
            blks.append(t)
        self.v = v
        self.blocks = tuple(blks)
        self._block_sets = None
        self._point_masks = None
        self._block_masks = None
        self._matrix = None

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def block_sets(self) -> tuple[frozenset, ...]:
        if self._block_sets is None:
            self._block_sets = tuple(frozenset(blk) for blk in self.blocks)
        return self._block_sets

    @property
    def point_masks(self) -> tuple[int, ...]:
        """For each point, the bitmap of blocks containing it."""
        if self._point_masks is None:
            masks = [0] * self.v
            for i, blk in enumerate(self.blocks):
                bit = 1 << i
                for p in blk:
                    masks[p] |= bit
            self._point_masks = tuple(masks)
        return self._point_masks

    @property
    def block_masks(self) -> tuple[int, ...]:
        """For each block, the bitmap of its points."""
        if self._block_masks is None:
            self._block_masks = tuple(
                sum(1 << p for p in blk) for blk in self.blocks
            )
        return self._block_masks

    def incidence_matrix(self) -> np.ndarray:
        """v x b 0/1 matrix, N[p, i] = 1 iff point p lies in block i."""
        if self._matrix is None:
            m = np.zeros((self.v, self.b), dtype=np.uint8)
            for i, blk in enumerate(self.blocks):
                m[list(blk), i] = 1
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def pair_counts(self) -> np.ndarray:
        """v x v matrix of #blocks containing each point pair (exact)."""
        m = self.incidence_matrix().astype(np.float32)
        return np.rint(m @ m.T).astype(np.int64)

    def relabel(self, perm: Sequence[int]) -> "IncidenceStructure":
        """Apply a point permutation (perm[p] = image of p) to all blocks."""
        return IncidenceStructure(
            self.v, [tuple(perm[p] for p in blk) for blk in self.blocks]
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IncidenceStructure)
            and self.v == other.v
            and self.blocks == other.blocks
        )

    def __hash__(self) -> int:
        return hash((self.v, self.blocks))

    def __repr__(self) -> str:
        sizes = {len(blk) for blk in self.blocks}
        k = sizes.pop() if len(sizes) == 1 else sorted(sizes)
        return f"IncidenceStructure(v={self.v}, b={self.b}, k={k})"


@dataclass(frozen=True)
class Resolution:
    """Partition of the block indices into parallel classes."""

    classes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "classes", tuple(tuple(c) for c in self.classes)
        )

    @property
    def r(self) -> int:
        return len(self.classes)

    def class_index(self) -> dict[int, int]:
        """Map block index -> class index."""
        out = {}
        for ci, cls in enumerate(self.classes):
            for blk in cls:
                out[blk] = ci
        return out


@dataclass(frozen=True)
class TransversalGrouping:
    """Partition of the point set of a transversal design into groups."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(g) for g in self.groups))

    def group_index(self) -> dict[int, int]:
        out = {}
        for gi, grp in enumerate(self.groups):
            for p in grp:
                out[p] = gi
        return out


@dataclass(frozen=True)
class DesignParams:
    """Recounted parameters of an incidence structure."""

    v: int
    b: int
    block_sizes: tuple[int, ...]       # sorted multiset
    replications: tuple[int, ...]      # sorted multiset
    lambda1: int | None                # constant replication, if constant
    lambda2: int | None                # constant pair count, if constant

    @property
    def uniform_k(self) -> int | None:
        return self.block_sizes[0] if len(set(self.block_sizes)) == 1 else None


def design_params(design: IncidenceStructure) -> DesignParams:
    m = design.incidence_matrix()
    reps = m.sum(axis=1).astype(int)
    pc = design.pair_counts()
    iu = np.triu_indices(design.v, k=1)
    off = pc[iu]
    lambda2 = int(off[0]) if off.size and (off == off[0]).all() else None
    reps_sorted = tuple(sorted(int(r) for r in reps))
    lambda1 = reps_sorted[0] if len(set(reps_sorted)) == 1 else None
    return DesignParams(
        v=design.v,
        b=design.b,
        block_sizes=tuple(sorted(len(blk) for blk in design.blocks)),
        replications=reps_sorted,
        lambda1=lambda1,
        lambda2=lambda2,
    )


def _uniform_size(design: IncidenceStructure) -> Check | int:
    sizes = [len(blk) for blk in design.blocks]
    k0 = sizes[0]
    for i, s in enumerate(sizes):
        if s != k0:
            return Check(False, reason="not uniform", witness=(i, s, k0))
    return k0


def verify_tdesign(design: IncidenceStructure, t: int) -> Check:
    """Exhaustively test whether every t-subset of points lies in a
    constant number of blocks (t in {1, 2}).

    On success the Check carries that constant.  On failure the witness
    is the least t-subset whose count differs from the count of the
    lexicographically least t-subset, as (subset, reference, actual).
    """
    if t not in (1, 2):
        raise ValueError("only t = 1 and t = 2 are supported")
    if design.b == 0:
        raise ValueError("empty structure")
    k = _uniform_size(design)
    if isinstance(k, Check):
        return k
    if t > k:
        return Check(False, reason="block size below t", witness=(k, t))
    if t == 1:
        counts = design.incidence_matrix().sum(axis=1).astype(int)
        ref = int(counts[0])
        bad = np.flatnonzero(counts != ref)
        if bad.size:
            p = int(bad[0])
            return Check(
                False,
                reason="replication differs",
                witness=((p,), ref, int(counts[p])),
            )
        return Check(True, value=ref)
    if design.v < 2:
        raise ValueError("t = 2 needs at least two points")
    pc = design.pair_counts()
    ref = int(pc[0, 1])
    probe = pc.copy()
    np.fill_diagonal(probe, ref)
    bad = np.argwhere(probe != ref)
    if bad.size:
        i, j = (int(x) for x in min((i, j) for i, j in bad if i < j))
        return Check(
            False,
            reason="pair count differs",
            witness=((i, j), ref, int(pc[i, j])),
        )
    return Check(True, value=ref)


def is_symmetric(design: IncidenceStructure) -> bool:
    """A 2-design with equally many points and blocks."""
    return design.b == design.v and bool(verify_tdesign(design, 2))


def verify_resolution(design: IncidenceStructure, resolution: Resolution) -> Check:
    """Test that each class partitions the point set (and the classes
    partition the block list into equal-size classes)."""
    listed = sorted(b for cls in resolution.classes for b in cls)
    if listed != list(range(design.b)):
        return Check(False, reason="classes do not partition the block list")
    sizes = [len(cls) for cls in resolution.classes]
    for i, s in enumerate(sizes):
        if s != sizes[0]:
            return Check(
                False, reason="class sizes unequal", witness=(i, s, sizes[0])
            )
    full = (1 << design.v) - 1
    masks = design.block_masks
    for ci, cls in enumerate(resolution.classes):
        seen = 0
        for blk in cls:
            m = masks[blk]
            if seen & m:
                dup = (seen & m).bit_length() - 1
                return Check(
                    False,
                    reason="class does not partition the points",
                    witness=(ci, dup),
                )
            seen |= m
        if seen != full:
            missing = (~seen & full)
            low = (missing & -missing).bit_length() - 1
            return Check(
                False,
                reason="class does not cover the points",
                witness=(ci, low),
            )
    return Check(True, value=(resolution.r, sizes[0] if sizes else 0))


def verify_transversal(
    design: IncidenceStructure, grouping: TransversalGrouping
) -> Check:
    """Test the transversal-design axioms against a point grouping.

    Success carries (k2, lambda2): uniform block size, with every block
    meeting each group at most once and every cross-group point pair
    lying in exactly lambda2 blocks.
    """
    listed = sorted(p for grp in grouping.groups for p in grp)
    if listed != list(range(design.v)):
        raise ValueError("groups do not partition the point set")
    sizes = {len(grp) for grp in grouping.groups}
    if len(sizes) != 1:
        raise ValueError("groups have unequal sizes")
    gidx = grouping.group_index()
    for bi, blk in enumerate(design.blocks):
        seen: dict[int, int] = {}
        for p in blk:
            g = gidx[p]
            if g in seen:
                return Check(
                    False,
                    reason="block meets a group twice",
                    witness=(bi, g, seen[g], p),
                )
            seen[g] = p
    k2 = _uniform_size(design)
    if isinstance(k2, Check):
        return k2
    pc = design.pair_counts()
    gid = np.array([gidx[p] for p in range(design.v)])
    cross = gid[:, None] != gid[None, :]
    iu = np.triu_indices(design.v, k=1)
    cross_iu = cross[iu]
    vals = pc[iu][cross_iu]
    if not vals.size:
        raise ValueError("no cross-group pairs")
    lam2 = int(vals[0])
    if not (vals == lam2).all():
        probe = pc.copy()
        probe[~cross] = lam2
        bad = min((i, j) for i, j in np.argwhere(probe != lam2) if i < j)
        i, j = int(bad[0]), int(bad[1])
        return Check(
            False,
            reason="cross-group pair count differs",
            witness=((i, j), lam2, int(pc[i, j])),
        )
    return Check(True, value=(k2, lam2))


def dual(design: IncidenceStructure) -> IncidenceStructure:
    """Transpose points and blocks.  Rejects repeated blocks, which would
    collapse to one dual point."""
    seen: dict[frozenset, int] = {}
    for i, fs in enumerate(design.block_sets):
        if fs in seen:
            raise ValueError(f"blocks {seen[fs]} and {i} are equal; dual undefined")
        seen[fs] = i
    masks = design.point_masks
    blocks = []
    for p in range(design.v):
        m = masks[p]
        if m == 0:
            raise ValueError(f"point {p} lies in no block; dual block empty")
        idx = []
        while m:
            low = m & -m
            idx.append(low.bit_length() - 1)
            m ^= low
        blocks.append(tuple(idx))
    return IncidenceStructure(design.b, blocks)


def complement(design: IncidenceStructure) -> IncidenceStructure:
    """Replace every block by its complement in the point set."""
    full = frozenset(range(design.v))
    blocks = []
    for i, fs in enumerate(design.block_sets):
        if len(fs) == design.v:
            raise ValueError(f"block {i} is the full point set; complement empty")
        blocks.append(tuple(sorted(full - fs)))
    return IncidenceStructure(design.v, blocks)


# ---------------------------------------------------------------------------
# Design file format (shared repo-wide):
#   line 1: "v b"
#   then b lines, each a block's point indices in increasing order
#   optional sections, each introduced by a marker line:
#     #resolution   one class per line, block indices
#     #groups       one group per line, point indices
#     #labels       one line per block: "beta gamma"
# ---------------------------------------------------------------------------


class DesignFileError(ValueError):
    """Parse failure, carrying the 1-based offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class LoadedDesign:
    design: IncidenceStructure
    resolution: Resolution | None = None
    grouping: TransversalGrouping | None = None
    labels: tuple[tuple[int, int], ...] | None = None


def write_design(
    design: IncidenceStructure,
    path,
    resolution: Resolution | None = None,
    grouping: TransversalGrouping | None = None,
    labels: Sequence[tuple[int, int]] | None = None,
) -> None:
    lines = [f"{design.v} {design.b}"]
    lines.extend(" ".join(map(str, blk)) for blk in design.blocks)
    if resolution is not None:
        lines.append("#resolution")
        lines.extend(" ".join(map(str, cls)) for cls in resolution.classes)
    if grouping is not None:
        lines.append("#groups")
        lines.extend(" ".join(map(str, grp)) for grp in grouping.groups)
    if labels is not None:
        if len(labels) != design.b:
            raise ValueError("need one (beta, gamma) label per block")
        lines.append("#labels")
        lines.extend(f"{beta} {gamma}" for beta, gamma in labels)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_ints(text: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in text.split()]
    except ValueError:
        raise DesignFileError(f"expected integers, got {text!r}", lineno) from None


def read_design(path) -> LoadedDesign:
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise DesignFileError("empty file", 1)
    head = _parse_ints(raw[0], 1)
    if len(head) != 2:
        raise DesignFileError("header must be 'v b'", 1)
    v, b = head
    if len(raw) < 1 + b:
        raise DesignFileError(f"expected {b} block lines", len(raw))
    blocks = []
    for i in range(b):
        blk = _parse_ints(raw[1 + i], 2 + i)
        if not blk:
            raise DesignFileError("empty block line", 2 + i)
        blocks.append(blk)
    try:
        design = IncidenceStructure(v, blocks)
    except ValueError as exc:
        raise DesignFileError(str(exc), 2) from None

    resolution = None
    grouping = None
    labels = None
    pos = 1 + b
    while pos < len(raw):
        marker = raw[pos].strip()
        if not marker:
            pos += 1
            continue
        start = pos + 1
        end = start
        rows = []
        while end < len(raw) and not raw[end].startswith("#") and raw[end].strip():
            rows.append(_parse_ints(raw[end], end + 1))
            end += 1
        if marker == "#resolution":
            resolution = Resolution(tuple(tuple(r) for r in rows))
        elif marker == "#groups":
            grouping = TransversalGrouping(tuple(tuple(r) for r in rows))
        elif marker == "#labels":
            if len(rows) != b or any(len(r) != 2 for r in rows):
                raise DesignFileError("labels need one 'beta gamma' line per block", pos + 1)
            labels = tuple((r[0], r[1]) for r in rows)
        else:
            raise DesignFileError(f"unknown section {marker!r}", pos + 1)
        pos = end
    return LoadedDesign(design, resolution, grouping, labels)
