"""Builders for the ingredient designs: affine planes and spaces with
their resolutions, duals as transversal designs, trivial symmetric
designs, projective planes.

Point indexing is by base-q positional encoding of coordinate tuples,
most significant coordinate first, so emitted design files are stable
across runs.
"""

from __future__ import annotations

from itertools import combinations, product

from .gf import field_of_order
from .incidence import (
    IncidenceStructure,
    Resolution,
    TransversalGrouping,
    dual,
    verify_resolution,
)

MAX_POINTS = 4096


def _point_codes(q: int, n: int):
    """All coordinate tuples of GF(q)^n in code order (msb first)."""
    return list(product(range(q), repeat=n))


def _normalized_directions(q: int, n: int):
    """Nonzero coordinate tuples whose first nonzero entry is 1, in code
    order; one representative per hyperplane direction."""
    out = []
    for vec in product(range(q), repeat=n):
        nz = next((c for c in vec if c), None)
        if nz == 1:
            out.append(vec)
    return out


def affine_space_hyperplanes(n: int, q: int) -> tuple[IncidenceStructure, Resolution]:
    """Points and affine hyperplanes of AG(n, q), resolved by direction.

    Hyperplanes are the solution sets of a.x = c for a normalized nonzero
    a; the (q^n - 1)/(q - 1) directions give the parallel classes, each
    holding the q hyperplanes with that normal.  Affine resolvable with
    mu = q^(n-2).
    """
    if n < 2:
        raise ValueError("dimension must be at least 2")
    F = field_of_order(q)
    if q**n > MAX_POINTS:
        raise ValueError(f"q^n = {q**n} exceeds the {MAX_POINTS}-point cap")
    points = _point_codes(q, n)
    directions = _normalized_directions(q, n)
    blocks = []
    classes = []
    for a in directions:
        buckets: list[list[int]] = [[] for _ in range(q)]
        for code, x in enumerate(points):
            buckets[F.dot(a, x)].append(code)
        start = len(blocks)
        blocks.extend(tuple(bucket) for bucket in buckets)
        classes.append(tuple(range(start, start + q)))
    design = IncidenceStructure(q**n, blocks)
    resolution = Resolution(tuple(classes))
    return design, resolution


def affine_plane(q: int) -> tuple[IncidenceStructure, Resolution]:
    """The desarguesian affine plane AG(2, q) with its line resolution."""
    return affine_space_hyperplanes(2, q)


def trivial_symmetric(v1: int) -> IncidenceStructure:
    """The trivial symmetric 2-(v1, v1-1, v1-2) design: block b omits
    point b."""
    if v1 < 3:
        raise ValueError("need at least 3 points")
    return IncidenceStructure(
        v1, [tuple(p for p in range(v1) if p != b) for b in range(v1)]
    )


def dual_transversal(
    d0: IncidenceStructure, resolution: Resolution
) -> tuple[IncidenceStructure, TransversalGrouping, int]:
    """Dual of an affine resolvable design, grouped by parallel class.

    Affineness (constant cross-class block intersection mu) is verified,
    not assumed; the dual is then a transversal design with k2 = r and
    lambda2 = mu.  Returns (design, grouping, mu).
    """
    res = verify_resolution(d0, resolution)
    if not res:
        raise ValueError(f"invalid resolution: {res.reason} (witness {res.witness})")
    cidx = resolution.class_index()
    masks = d0.block_masks
    mu = None
    for i, j in combinations(range(d0.b), 2):
        if cidx[i] == cidx[j]:
            continue
        size = (masks[i] & masks[j]).bit_count()
        if mu is None:
            mu = size
        elif size != mu:
            raise ValueError(
                f"not affine: cross-class intersections of sizes {mu} and {size}"
            )
    if mu is None or mu == 0:
        raise ValueError("not affine: no cross-class intersections")
    d2 = dual(d0)
    grouping = TransversalGrouping(resolution.classes)
    return d2, grouping, mu


def projective_plane(q: int) -> IncidenceStructure:
    """The desarguesian projective plane PG(2, q), a symmetric
    2-(q^2+q+1, q+1, 1) design."""
    F = field_of_order(q)
    reps = _normalized_directions(q, 3)
    blocks = []
    for line in reps:
        blocks.append(
            tuple(i for i, pt in enumerate(reps) if F.dot(line, pt) == 0)
        )
    return IncidenceStructure(len(reps), blocks)
