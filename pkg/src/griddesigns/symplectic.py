"""Quadratic forms over GF(2), the symplectic design family S^eps(n),
its grid-preserving automorphism group, and the grid divisibility test.

The ambient space is W = V + V* with V = GF(2)^n; a pair (v, x) is
encoded as the integer x * 2^n + v.  Both points and blocks of the
designs are indexed by W.  The form Q_{a,b}(v, x) = v.x + v.b + a.x
polarises to the standard pairing, its type is +1 iff a.b = 0, and the
explicit incidence rule P(v,x) ~ B(w,y) iff (v+w).(x+y) = 0 reproduces
the quadratic-form construction block for block.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .builders import affine_space_hyperplanes, dual_transversal, trivial_symmetric
from .compose import ComposedDesign, CompositionInput, composition_input, construct
from .incidence import IncidenceStructure
from .latin import addition_table_elementary_abelian, latin_to_bijections

PLUS = 1
MINUS = -1


def _parity(z: int) -> int:
    return z.bit_count() & 1


def point_code(v: int, x: int, n: int) -> int:
    return (x << n) | v


def point_decode(code: int, n: int) -> tuple[int, int]:
    return code & ((1 << n) - 1), code >> n


@dataclass(frozen=True)
class QForm:
    """Label (a, b) of the quadratic form Q_{a,b}(v,x) = v.x + v.b + a.x."""

    n: int
    a: int
    b: int

    def __post_init__(self):
        lim = 1 << self.n
        if not (0 <= self.a < lim and 0 <= self.b < lim):
            raise ValueError("label vectors must have length n")


def qform_eval(q: QForm, v: int, x: int) -> int:
    lim = 1 << q.n
    if not (0 <= v < lim and 0 <= x < lim):
        raise ValueError("argument vectors must have length n")
    return _parity(v & x) ^ _parity(v & q.b) ^ _parity(q.a & x)


def qform_type(q: QForm) -> int:
    """+1 or -1; the sign is (-1)^(a.b)."""
    return MINUS if _parity(q.a & q.b) else PLUS


def zero_count(q: QForm) -> int:
    """Number of zeros of the form on W, by exhaustive evaluation.

    Equals 2^(n-1) (2^n + type) -- the independent oracle for qform_type.
    """
    if q.n > 6:
        raise ValueError("zero counting capped at n = 6")
    n = q.n
    return sum(
        1
        for x in range(1 << n)
        for v in range(1 << n)
        if qform_eval(q, v, x) == 0
    )


def _check_design_n(n: int) -> None:
    if not 2 <= n <= 5:
        raise ValueError("design order n out of range 2..5")


def splus(n: int) -> IncidenceStructure:
    """S^+(n): P(v,x) incident B(w,y) iff (v+w).(x+y) = 0."""
    _check_design_n(n)
    N = 1 << n
    W = 1 << (2 * n)
    blocks = []
    for bcode in range(W):
        w, y = point_decode(bcode, n)
        blk = [
            p
            for p in range(W)
            if _parity(((p & (N - 1)) ^ w) & ((p >> n) ^ y)) == 0
        ]
        blocks.append(tuple(blk))
    return IncidenceStructure(W, blocks)


def sminus(n: int) -> IncidenceStructure:
    """S^-(n): the complementary design, incidence (v+w).(x+y) = 1."""
    _check_design_n(n)
    N = 1 << n
    W = 1 << (2 * n)
    blocks = []
    for bcode in range(W):
        w, y = point_decode(bcode, n)
        blk = [
            p
            for p in range(W)
            if _parity(((p & (N - 1)) ^ w) & ((p >> n) ^ y)) == 1
        ]
        blocks.append(tuple(blk))
    return IncidenceStructure(W, blocks)


def standard_construction(n: int, eps: int) -> IncidenceStructure:
    """The quadratic-form construction: blocks are the labels Q_{a,b}
    (block index y*2^n + w for the label (a, b) = (w, y)), with w incident
    to Q iff (-1)^Q(w) equals eps * type(Q).

    Equal, block for block, to splus/sminus under B(a,b) <-> Q_{a,b}.
    """
    _check_design_n(n)
    if eps not in (PLUS, MINUS):
        raise ValueError("eps must be +1 or -1")
    W = 1 << (2 * n)
    blocks = []
    for bcode in range(W):
        a, b = point_decode(bcode, n)
        q = QForm(n, a, b)
        want = 0 if eps == qform_type(q) else 1
        blk = [
            p for p in range(W) if qform_eval(q, p & ((1 << n) - 1), p >> n) == want
        ]
        blocks.append(tuple(blk))
    return IncidenceStructure(W, blocks)


# --- GF(2) matrices as tuples of row masks (bit i of input selects row i) ---


def mat_vec(v: int, m: tuple[int, ...]) -> int:
    out = 0
    i = 0
    while v:
        if v & 1:
            out ^= m[i]
        v >>= 1
        i += 1
    return out


def mat_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(mat_vec(row, b) for row in a)


def mat_transpose(m: tuple[int, ...]) -> tuple[int, ...]:
    n = len(m)
    return tuple(
        sum(((m[i] >> j) & 1) << i for i in range(n)) for j in range(n)
    )


def mat_identity(n: int) -> tuple[int, ...]:
    return tuple(1 << i for i in range(n))


def mat_inv(m: tuple[int, ...]) -> tuple[int, ...]:
    n = len(m)
    rows = list(m)
    aug = list(mat_identity(n))
    for col in range(n):
        piv = next(r for r in range(col, n) if (rows[r] >> col) & 1)
        rows[col], rows[piv] = rows[piv], rows[col]
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(n):
            if r != col and (rows[r] >> col) & 1:
                rows[r] ^= rows[col]
                aug[r] ^= aug[col]
    return tuple(aug)


def gl_generators(n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """A transvection and a basis cycle; together they generate GL(n, 2)
    (verified by closure order in the tests)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    transvection = tuple(0b11 if i == 0 else 1 << i for i in range(n))
    cycle = tuple(1 << ((i + 1) % n) for i in range(n))
    return transvection, cycle


def matrix_point_perm(a: tuple[int, ...], n: int) -> tuple[int, ...]:
    """The action P(v, x) -> P(vA, x(A^-1)^T) as a permutation of W."""
    binv = mat_transpose(mat_inv(a))
    N = 1 << n
    perm = []
    for code in range(1 << (2 * n)):
        v, x = code & (N - 1), code >> n
        perm.append(point_code(mat_vec(v, a), mat_vec(x, binv), n))
    return tuple(perm)


def is_design_automorphism(perm, design: IncidenceStructure) -> bool:
    target = set(design.block_sets)
    return all(frozenset(perm[p] for p in blk) in target for blk in design.blocks)


def group_gens(n: int) -> list[tuple[int, ...]]:
    """Generators of the grid-preserving group: the 2n translations of W
    plus two GL(n, 2) generators in the inverse-transpose action.  Every
    generator is verified to be an automorphism of S^-(n)."""
    if not 2 <= n <= 4:
        raise ValueError("group generators capped at n = 4")
    W = 1 << (2 * n)
    gens = [tuple(code ^ (1 << i) for code in range(W)) for i in range(2 * n)]
    for a in gl_generators(n):
        gens.append(matrix_point_perm(a, n))
    sm = sminus(n)
    for i, g in enumerate(gens):
        if not is_design_automorphism(g, sm):
            raise AssertionError(f"generator {i} is not an automorphism of S^-({n})")
    return gens


def grid_partitions(n: int):
    """The two coset partitions giving W its square-grid structure:
    cosets of V (second coordinate fixed) and of V* (first fixed)."""
    N = 1 << n
    cosets_v = tuple(
        tuple(point_code(v, x, n) for v in range(N)) for x in range(N)
    )
    cosets_vstar = tuple(
        tuple(point_code(v, x, n) for x in range(N)) for v in range(N)
    )
    return cosets_v, cosets_vstar


def grid_divisibility(k: int, n: int) -> bool:
    """Necessary condition for a block-transitive grid-preserving group
    on an n x n grid: n+1 must divide C(k, 2)."""
    return comb(k, 2) % (n + 1) == 0


# --- the composition producing S^-(n) ------------------------------------


def swap_encoding(n: int) -> tuple[int, ...]:
    """The involution exchanging the symplectic code x*2^n + v with the
    composed-design code v*2^n + x."""
    N = 1 << n
    return tuple(((code & (N - 1)) << n) | (code >> n) for code in range(1 << (2 * n)))


@dataclass(frozen=True)
class SymplecticComposition:
    """S^-(n) realised by the product construction, with the generators of
    its grid-preserving group acting on the composed points."""

    n: int
    composed: ComposedDesign
    gens: tuple[tuple[int, ...], ...]


def sminus_composition(n: int) -> SymplecticComposition:
    """Build S^-(n) through the product construction.

    D0 is AG(n, 2) with its hyperplane resolution (class c indexed by the
    nonzero normal vector c+1), D1 the trivial symmetric design on 2^n
    points, psi the XOR addition table.  The transversal design selects,
    for each point y, the hyperplane of each direction *avoiding* y; that
    is the dual with the two parallel hyperplanes of every class swapped,
    and makes the construction reproduce the incidence (v+w).(x+y) = 1
    exactly.  The returned generators (translations of W and GL(n, 2) in
    the inverse-transpose action) are automorphisms of the composed design
    preserving its part partition.
    """
    if not 2 <= n <= 4:
        raise ValueError("composition capped at n = 4")
    d0, resolution = affine_space_hyperplanes(n, 2)
    d2_dual, grouping, _mu = dual_transversal(d0, resolution)
    mate = {}
    for cls in resolution.classes:
        first, second = cls
        mate[first], mate[second] = second, first
    d2 = IncidenceStructure(
        d2_dual.v, [tuple(sorted(mate[ell] for ell in blk)) for blk in d2_dual.blocks]
    )
    d1 = trivial_symmetric(1 << n)
    family = latin_to_bijections(addition_table_elementary_abelian(n), d1)
    inp = composition_input(d0, resolution, d1, family, d2, grouping)
    composed = construct(inp)

    v0 = 1 << n
    W = 1 << (2 * n)
    gens = []
    for i in range(n):  # translations of Delta_1 (the part index)
        e = 1 << i
        gens.append(tuple(((p // v0) ^ e) * v0 + (p % v0) for p in range(W)))
    for i in range(n):  # translations of Delta_0 inside every part
        f = 1 << i
        gens.append(tuple((p // v0) * v0 + ((p % v0) ^ f) for p in range(W)))
    for a in gl_generators(n):
        binv = mat_transpose(mat_inv(a))
        gens.append(
            tuple(
                mat_vec(p // v0, a) * v0 + mat_vec(p % v0, binv) for p in range(W)
            )
        )
    for i, g in enumerate(gens):
        if not is_design_automorphism(g, composed.design):
            raise AssertionError(f"generator {i} is not an automorphism")
    return SymplecticComposition(n, composed, tuple(gens))
