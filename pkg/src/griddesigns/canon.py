"""Exact isomorphism testing for desk-scale designs: canonical forms,
automorphism generators and group order, and cheap invariant pre-filters.

The canonizer runs individualization-refinement with full backtracking on
the bipartite point/block incidence graph (plus one auxiliary vertex per
part when a point partition is supplied, so partition-preserving means
the parts may permute).  The refinement trace at every search node is a
label-invariant, so the leaf minimizing (trace path, leaf certificate) is
a canonical labeling: two structures get equal certificates iff they are
isomorphic (respecting the partition).  Automorphisms are discovered as
pairs of equivalent leaves; they prune the search (orbit pruning on the
target cell) and generate the full automorphism group, whose order is
computed exactly from the discovered generators.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .incidence import IncidenceStructure, design_params

MAX_VERTICES = 400


# --------------------------------------------------------------------------
# invariant fingerprints
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Fingerprint:
    """Cheap relabeling-invariant key: global parameters plus the multiset
    of triple block intersection sizes.

    For more than ``exact_limit`` blocks the triple multiset is sampled
    (seeded, by block index), which is *not* relabeling-invariant; such
    keys are flagged inexact and never count as isomorphism evidence.
    """

    v: int
    b: int
    block_sizes: tuple[int, ...]
    replications: tuple[int, ...]
    pair_lambda: int | None
    triples: tuple[tuple[int, int], ...]
    exact: bool
    seed: int | None = None

    @property
    def base(self):
        return (self.v, self.b, self.block_sizes, self.replications, self.pair_lambda)


def fingerprint(
    design: IncidenceStructure,
    seed: int = 0,
    sample_size: int = 100_000,
    exact_limit: int = 100,
) -> Fingerprint:
    params = design_params(design)
    masks = design.block_masks
    counts: dict[int, int] = {}
    if design.b <= exact_limit:
        for i, j, k in combinations(range(design.b), 3):
            size = (masks[i] & masks[j] & masks[k]).bit_count()
            counts[size] = counts.get(size, 0) + 1
        exact = True
        used_seed = None
    else:
        rng = np.random.default_rng(seed)
        for _ in range(sample_size):
            i, j, k = rng.choice(design.b, size=3, replace=False)
            size = (masks[i] & masks[j] & masks[k]).bit_count()
            counts[size] = counts.get(size, 0) + 1
        exact = False
        used_seed = seed
    return Fingerprint(
        v=params.v,
        b=params.b,
        block_sizes=params.block_sizes,
        replications=params.replications,
        pair_lambda=params.lambda2,
        triples=tuple(sorted(counts.items())),
        exact=exact,
        seed=used_seed,
    )


def fingerprint_verdict(f1: Fingerprint, f2: Fingerprint) -> str:
    """'non-isomorphic' when the keys prove it; 'undecided' otherwise.

    Sampled triple multisets depend on the block labeling, so a sampled
    mismatch is never treated as evidence.
    """
    if f1.base != f2.base:
        return "non-isomorphic"
    if f1.exact and f2.exact and f1.triples != f2.triples:
        return "non-isomorphic"
    return "undecided"


# --------------------------------------------------------------------------
# canonical labeling
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """Canonical form of a design: the block list relabeled to canonical
    point order, plus the automorphism group discovered on the way.

    Certificates of two structures (canonicalized the same way, i.e. both
    plain or both with a point partition) are equal iff the structures are
    isomorphic (respecting the partition)."""

    v: int
    b: int
    colored: bool
    canonical_blocks: tuple[tuple[int, ...], ...]
    aut_gens: tuple[tuple[int, ...], ...]
    aut_order: int

    @property
    def key(self):
        return (self.v, self.b, self.colored, self.canonical_blocks)

    @property
    def hash(self) -> str:
        payload = f"{self.v} {self.b} {int(self.colored)};" + ";".join(
            " ".join(map(str, blk)) for blk in self.canonical_blocks
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def __eq__(self, other) -> bool:
        return isinstance(other, Certificate) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)


class _Canonizer:
    """Backtracking individualization-refinement on an adjacency matrix.

    ``first_*`` is the leftmost leaf (automorphism anchor), ``best_*`` the
    minimal (path, certificate) leaf seen so far.  A subtree is pruned
    when its invariant path is lexicographically above the best and has
    diverged from the first; sibling branches equivalent under discovered
    automorphisms fixing the individualized prefix are skipped.
    """

    def __init__(
        self,
        adjm: np.ndarray,
        init_cells: list[list[int]],
        known_gens: Sequence[tuple[int, ...]] = (),
    ):
        self.adjm = adjm
        self.n = adjm.shape[0]
        # CSR-style adjacency for the worklist refiner, flattened edge
        # lists for the bincount sweeps
        src, dst = np.nonzero(adjm)
        self._vert_rep = src.astype(np.int64)
        self._nbrs = dst.astype(np.int64)
        self._indptr = np.searchsorted(src, np.arange(self.n + 1))
        self.first_path = None
        self.first_cert = None
        self.first_lab = None
        self.best_path = None
        self.best_cert = None
        self.best_lab = None
        self.aut_gens: list[tuple[int, ...]] = list(known_gens)
        self._aut_seen: set[tuple[int, ...]] = set(known_gens)
        self._init_cells = [tuple(sorted(c)) for c in init_cells]

    # -- equitable refinement with an invariant trace --

    def _refine(self, cells_list: list[tuple[int, ...]], active=None):
        """Refine to the coarsest equitable partition below the input.

        Worklist of splitter cells (only the ``active`` positions when the
        rest of the input partition is already stable), then one full
        signature sweep that both verifies equitability and yields the
        counts matrix of every vertex against every final cell.

        Cells carry invariant ids in birth order, so the returned trace of
        split events (parent id, count/size distribution) and the quotient
        matrix are label-invariants of the run.  Returns
        (cells, invariant, counts-by-cell-position).
        """
        n = self.n
        indptr, indices = self._indptr, self._nbrs
        cells: list = list(cells_list)  # id -> members (None when split)
        order = list(range(len(cells)))  # alive ids in position order
        cid = [0] * n
        for a, members in enumerate(cells):
            for u in members:
                cid[u] = a
        queue = deque(order if active is None else [order[i] for i in active])
        trace = []
        while True:
            while queue:
                s = queue.popleft()
                members = cells[s]
                if members is None:
                    continue  # stale; its pieces are queued
                nbr = np.concatenate(
                    [indices[indptr[u] : indptr[u + 1]] for u in members]
                )
                counts = np.bincount(nbr, minlength=n).tolist()
                affected = {cid[x] for x in nbr.tolist()}
                for a in sorted(affected):
                    mem = cells[a]
                    if len(mem) == 1:
                        continue
                    groups: dict[int, list[int]] = {}
                    for u in mem:
                        groups.setdefault(counts[u], []).append(u)
                    if len(groups) == 1:
                        continue
                    keys = sorted(groups)
                    trace.append(
                        (a, tuple((key, len(groups[key])) for key in keys))
                    )
                    pos = order.index(a)
                    new_ids = []
                    for key in keys:
                        piece = tuple(groups[key])
                        new_id = len(cells)
                        cells.append(piece)
                        new_ids.append(new_id)
                        for u in piece:
                            cid[u] = new_id
                    cells[a] = None
                    order[pos : pos + 1] = new_ids
                    queue.extend(new_ids)
            # full sweep: verifies equitability and produces the counts
            # matrix (vertices x cell positions) for the caller
            ncells = len(order)
            pos_of = {a: i for i, a in enumerate(order)}
            colidx = np.fromiter((pos_of[c] for c in cid), np.int64, n)
            counts_m = np.bincount(
                self._vert_rep * ncells + colidx[self._nbrs],
                minlength=n * ncells,
            ).reshape(n, ncells)
            again = False
            for a in list(order):
                mem = cells[a]
                if len(mem) == 1:
                    continue
                rows: dict[bytes, list[int]] = {}
                for u in mem:
                    rows.setdefault(counts_m[u].tobytes(), []).append(u)
                if len(rows) == 1:
                    continue
                keys = sorted(rows)
                trace.append((a, tuple((key, len(rows[key])) for key in keys)))
                pos = order.index(a)
                new_ids = []
                for key in keys:
                    piece = tuple(rows[key])
                    new_id = len(cells)
                    cells.append(piece)
                    new_ids.append(new_id)
                    for u in piece:
                        cid[u] = new_id
                cells[a] = None
                order[pos : pos + 1] = new_ids
                queue.extend(new_ids)
                again = True
            if not again:
                break
        final_cells = [cells[a] for a in order]
        reps = [mem[0] for mem in final_cells]
        quotient = counts_m[reps].tobytes()
        inv = (tuple(len(c) for c in final_cells), tuple(trace), quotient)
        return final_cells, inv, counts_m

    # -- leaves --

    def _leaf(self, cells, path) -> None:
        lab = [c[0] for c in cells]
        cert = np.packbits(
            self.adjm[np.ix_(lab, lab)].astype(np.uint8), axis=None
        ).tobytes()
        path = tuple(path)

        if self.first_path is None:
            self.first_path = path
            self.first_cert = cert
            self.first_lab = lab
            self.best_path = path
            self.best_cert = cert
            self.best_lab = lab
            return
        if path == self.first_path and cert == self.first_cert:
            self._record_aut(self.first_lab, lab)
        cand = (path, cert)
        best = (self.best_path, self.best_cert)
        if cand < best:
            self.best_path, self.best_cert, self.best_lab = path, cert, lab
        elif cand == best and lab != self.best_lab:
            self._record_aut(self.best_lab, lab)

    def _record_aut(self, lab_a, lab_b) -> None:
        g = [0] * self.n
        for pos in range(self.n):
            g[lab_a[pos]] = lab_b[pos]
        g = tuple(g)
        if g in self._aut_seen or g == tuple(range(self.n)):
            return
        gl = list(g)
        if not np.array_equal(self.adjm[gl][:, gl], self.adjm):
            return  # stale best-vs-best candidate; not an automorphism
        self._aut_seen.add(g)
        self.aut_gens.append(g)

    # -- search --

    def run(self) -> None:
        cells, inv, counts = self._refine(list(self._init_cells))
        self._search(cells, counts, [inv], (), first_eq=True, cmp_best="EQ")

    def _compare(self, entry, depth, first_eq, cmp_best):
        """Advance the two path-comparison states by one path entry."""
        if first_eq and self.first_path is not None:
            first_eq = (
                depth < len(self.first_path) and self.first_path[depth] == entry
            )
        if self.best_path is not None and cmp_best == "EQ":
            if depth < len(self.best_path):
                ref = self.best_path[depth]
                if entry < ref:
                    cmp_best = "LT"
                elif entry > ref:
                    cmp_best = "GT"
            else:
                cmp_best = "GT"
        return first_eq, cmp_best

    def _search(self, cells, counts, path, prefix, first_eq, cmp_best) -> None:
        # first_eq: path so far coincides with the first leaf's path.
        # cmp_best: lexicographic state against the best path ("EQ" tied,
        # "LT" strictly below, "GT" strictly above).  GT subtrees that can
        # no longer produce automorphisms of the first leaf are pruned;
        # leaf updates recompare full tuples, so a best that improved
        # mid-search never causes a wrong replacement.
        first_eq, cmp_best = self._compare(path[-1], len(path) - 1, first_eq, cmp_best)
        if cmp_best == "GT" and not first_eq:
            return
        # target: the first smallest non-singleton cell (small cells keep
        # the branching factor down; the choice is label-invariant)
        target_pos = None
        for i, c in enumerate(cells):
            if len(c) > 1 and (target_pos is None or len(c) < len(cells[target_pos])):
                target_pos = i
        if target_pos is None:
            self._leaf(cells, path)
            return
        target = cells[target_pos]
        handled: set[int] = set()
        for u in target:
            if u in handled:
                continue
            # stage-1 invariant: the candidate's count row against the
            # parent cells, known before refining the child; most
            # non-canonical candidates die here
            entry = counts[u].tobytes()
            f_eq, c_best = self._compare(entry, len(path), first_eq, cmp_best)
            if c_best == "GT" and not f_eq:
                handled.add(u)
                continue
            child = list(cells)
            rest = tuple(x for x in target if x != u)
            child[target_pos : target_pos + 1] = [(u,), rest]
            refined, inv_child, counts_child = self._refine(
                child, active=[target_pos, target_pos + 1]
            )
            self._search(
                refined,
                counts_child,
                path + [entry, inv_child],
                prefix + (u,),
                f_eq,
                c_best,
            )
            handled.add(u)
            handled.update(self._orbit_under_stabilizer(u, prefix))

    def _orbit_under_stabilizer(self, u: int, prefix: tuple) -> set[int]:
        gens = [g for g in self.aut_gens if all(g[x] == x for x in prefix)]
        if not gens:
            return {u}
        orb = {u}
        queue = [u]
        while queue:
            x = queue.pop()
            for g in gens:
                y = g[x]
                if y not in orb:
                    orb.add(y)
                    queue.append(y)
        return orb


def _aut_order(point_gens: Sequence[tuple[int, ...]], v: int) -> int:
    if not point_gens:
        return 1
    from sympy.combinatorics import Permutation, PermutationGroup

    return int(PermutationGroup([Permutation(list(g)) for g in point_gens]).order())


def _extend_to_vertices(
    point_perm: Sequence[int],
    design: IncidenceStructure,
    point_partition,
    n: int,
) -> tuple[int, ...]:
    """Extend a point permutation to the full vertex set (blocks, parts);
    raises if it is not an automorphism respecting the partition."""
    v, b = design.v, design.b
    block_index = {fs: i for i, fs in enumerate(design.block_sets)}
    g = list(point_perm) + [0] * (n - v)
    for bi, blk in enumerate(design.blocks):
        img = block_index.get(frozenset(point_perm[p] for p in blk))
        if img is None:
            raise ValueError("known generator does not preserve the blocks")
        g[v + bi] = v + img
    if point_partition is not None:
        part_index = {frozenset(part): i for i, part in enumerate(point_partition)}
        for pi, part in enumerate(point_partition):
            img = part_index.get(frozenset(point_perm[p] for p in part))
            if img is None:
                raise ValueError("known generator does not preserve the partition")
            g[v + b + pi] = v + b + img
    return tuple(g)


def canonical_form(
    design: IncidenceStructure,
    point_partition: Sequence[Sequence[int]] | None = None,
    known_automorphisms: Sequence[Sequence[int]] = (),
) -> Certificate:
    """Canonicalize a design; with ``point_partition`` the certificate and
    automorphisms are those preserving the partition (parts may permute).

    ``known_automorphisms`` (point permutations already known to preserve
    the blocks) seed the search's orbit pruning; they are verified, and
    the certificate is the same with or without them.

    The reported generators all verifiably map blocks to blocks, and the
    group order is exact.
    """
    v, b = design.v, design.b
    n_parts = len(point_partition) if point_partition is not None else 0
    n = v + b + n_parts
    if v + b > MAX_VERTICES:
        raise ValueError(f"{v + b} vertices exceed the {MAX_VERTICES} cap")
    adjm = np.zeros((n, n), dtype=np.uint8)
    for bi, blk in enumerate(design.blocks):
        bv = v + bi
        idx = list(blk)
        adjm[idx, bv] = 1
        adjm[bv, idx] = 1
    init_cells = [list(range(v)), list(range(v, v + b))]
    if point_partition is not None:
        listed = sorted(p for part in point_partition for p in part)
        if listed != list(range(v)):
            raise ValueError("point partition must partition the point set")
        for pi, part in enumerate(point_partition):
            pv = v + b + pi
            idx = list(part)
            adjm[idx, pv] = 1
            adjm[pv, idx] = 1
        init_cells.append(list(range(v + b, n)))

    ident = tuple(range(n))
    known = []
    for g in known_automorphisms:
        full = _extend_to_vertices(g, design, point_partition, n)
        if full != ident:
            known.append(full)
    canonizer = _Canonizer(adjm, init_cells, known_gens=known)
    canonizer.run()

    lab = canonizer.best_lab
    point_positions = [u for u in lab if u < v]
    point_rank = {u: i for i, u in enumerate(point_positions)}
    block_order = [u - v for u in lab if v <= u < v + b]
    canonical_blocks = tuple(
        tuple(sorted(point_rank[p] for p in design.blocks[bi])) for bi in block_order
    )

    point_gens = []
    block_sets = set(design.block_sets)
    for g in canonizer.aut_gens:
        pg = tuple(g[p] for p in range(v))
        if any(x >= v for x in pg):
            raise AssertionError("automorphism mixes points and blocks")
        for blk in design.blocks:
            if frozenset(pg[p] for p in blk) not in block_sets:
                raise AssertionError("discovered generator does not preserve blocks")
        point_gens.append(pg)

    return Certificate(
        v=v,
        b=b,
        colored=point_partition is not None,
        canonical_blocks=canonical_blocks,
        aut_gens=tuple(point_gens),
        aut_order=_aut_order(point_gens, v),
    )


def isomorphic(d: IncidenceStructure, e: IncidenceStructure) -> bool:
    """Exact isomorphism test via certificate equality."""
    if (d.v, d.b) != (e.v, e.b):
        return False
    fd, fe = fingerprint(d), fingerprint(e)
    if fingerprint_verdict(fd, fe) == "non-isomorphic":
        return False
    return canonical_form(d) == canonical_form(e)
