"""The central product construction and its parameter arithmetic.

Inputs: a resolvable 2-design D0 with r parallel classes of s blocks, a
symmetric 2-design D1 with block size r, a bijection family psi, and a
transversal design D2 whose points are the blocks of D0 grouped by
parallel class.  The output design lives on Delta_0 x Delta_1 with blocks

    B_beta(gamma) = union over j in beta of (gamma /\\ psi_beta^{-1}(j)) x {j}

for beta a block of D1 and gamma a block of D2.  Point (delta, j) is
encoded as j*v0 + delta, so the natural partition into copies of Delta_0
is the partition into contiguous index ranges.
"""

from __future__ import annotations

from dataclasses import dataclass

from .builders import dual_transversal, trivial_symmetric, affine_plane
from .incidence import (
    IncidenceStructure,
    Resolution,
    TransversalGrouping,
    is_symmetric,
    verify_resolution,
    verify_tdesign,
    verify_transversal,
)
from .latin import BijectionFamily, LatinSquare, latin_to_bijections, validate_bijections


@dataclass(frozen=True)
class CompositionInput:
    d0: IncidenceStructure
    resolution: Resolution
    d1: IncidenceStructure
    family: BijectionFamily
    d2: IncidenceStructure
    grouping: TransversalGrouping


def composition_input(
    d0: IncidenceStructure,
    resolution: Resolution,
    d1: IncidenceStructure,
    family: BijectionFamily,
    d2: IncidenceStructure,
    grouping: TransversalGrouping,
) -> CompositionInput:
    """Validate all structural invariants and bundle the inputs."""
    res = verify_resolution(d0, resolution)
    if not res:
        raise ValueError(f"D0 resolution invalid: {res.reason} (witness {res.witness})")
    if not is_symmetric(d1):
        raise ValueError("D1 is not a symmetric 2-design")
    fam = validate_bijections(family, d1, resolution)
    if not fam:
        raise ValueError(f"bijection family invalid: {fam.reason} (witness {fam.witness})")
    trans = verify_transversal(d2, grouping)
    if not trans:
        raise ValueError(f"D2 not transversal: {trans.reason} (witness {trans.witness})")
    if d2.v != d0.b:
        raise ValueError("D2's points must be D0's blocks")
    for gi, (grp, cls) in enumerate(zip(grouping.groups, resolution.classes)):
        if sorted(grp) != sorted(cls):
            raise ValueError(
                f"group {gi} does not match parallel class {gi}; "
                "the identification of D2 points with D0 blocks is broken"
            )
    if len(grouping.groups) != len(resolution.classes):
        raise ValueError("group count differs from class count")
    return CompositionInput(d0, resolution, d1, family, d2, grouping)


@dataclass(frozen=True)
class ParamLedger:
    """Every parameter of a composition, plus the two construction
    conditions: ``square`` (as many blocks as points, the block-count
    identity r(r-1)s*lam2 = k0*k2*(k2-1)) and ``two_design``
    (lam1*(k2-1) = lam0*(r-1)*s).  When both hold the output is a
    symmetric 2-design with lam = lam1*lam2."""

    v0: int
    k0: int
    lam0: int
    r: int
    s: int
    v1: int
    lam1: int
    k2: int
    lam2: int
    r2: int
    b2: int
    v: int
    b: int
    block_size: int
    replication: int
    square: bool
    two_design: bool
    lam: int

    def describe(self) -> str:
        lines = [
            f"D0: resolvable 2-({self.v0},{self.k0},{self.lam0}), "
            f"{self.r} classes of {self.s} blocks",
            f"D1: symmetric 2-({self.v1},{self.r},{self.lam1})",
            f"D2: transversal, k2={self.k2} lambda2={self.lam2} "
            f"r2={self.r2} b2={self.b2}",
            f"output: {self.v} points, {self.b} blocks of size {self.block_size}, "
            f"replication {self.replication}",
            f"block-count condition r(r-1)s*lam2 = k0*k2*(k2-1): "
            f"{'holds' if self.square else 'FAILS'}",
            f"pair-count condition lam1*(k2-1) = lam0*(r-1)*s: "
            f"{'holds' if self.two_design else 'FAILS'}",
        ]
        if self.square and self.two_design:
            lines.append(
                f"predicted: symmetric 2-({self.v},{self.block_size},{self.lam}) design"
            )
        elif self.two_design:
            lines.append(f"predicted: 2-({self.v},{self.block_size},{self.lam}) design")
        else:
            lines.append("predicted: 1-design only (not a 2-design)")
        return "\n".join(lines)


def predict(inp: CompositionInput) -> ParamLedger:
    """Recount the ingredient parameters and evaluate the construction's
    two conditions; raises on an internally inconsistent D2."""
    chk0 = verify_tdesign(inp.d0, 2)
    if not chk0:
        raise ValueError(f"D0 is not a 2-design: {chk0.reason}")
    lam0 = chk0.value
    k0 = len(inp.d0.blocks[0])
    v0 = inp.d0.v
    r = len(inp.resolution.classes)
    s = len(inp.resolution.classes[0])
    v1 = inp.d1.v
    lam1 = verify_tdesign(inp.d1, 2).value
    k2, lam2 = verify_transversal(inp.d2, inp.grouping).value
    rep2 = verify_tdesign(inp.d2, 1)
    if not rep2:
        raise ValueError(f"inconsistent D2: {rep2.reason} (witness {rep2.witness})")
    r2 = rep2.value
    if r2 * (k2 - 1) != (r - 1) * s * lam2:
        raise ValueError(
            "inconsistent D2: replication does not satisfy "
            "r2*(k2-1) = (r-1)*s*lam2"
        )
    b2 = inp.d2.b
    if b2 * k2 != r2 * r * s:
        raise ValueError("inconsistent D2: block count does not satisfy b2*k2 = r2*r*s")
    return ParamLedger(
        v0=v0,
        k0=k0,
        lam0=lam0,
        r=r,
        s=s,
        v1=v1,
        lam1=lam1,
        k2=k2,
        lam2=lam2,
        r2=r2,
        b2=b2,
        v=v0 * v1,
        b=v1 * b2,
        block_size=k0 * k2,
        replication=r * r2,
        square=r * (r - 1) * s * lam2 == k0 * k2 * (k2 - 1),
        two_design=lam1 * (k2 - 1) == lam0 * (r - 1) * s,
        lam=lam1 * lam2,
    )


@dataclass(frozen=True)
class ComposedDesign:
    """A constructed design with its block labels (beta, gamma), its
    point partition into copies of Delta_0, and the parameter ledger."""

    input: CompositionInput
    design: IncidenceStructure
    labels: tuple[tuple[int, int], ...]
    parts: tuple[tuple[int, ...], ...]
    ledger: ParamLedger

    @property
    def v0(self) -> int:
        return self.input.d0.v

    @property
    def v1(self) -> int:
        return self.input.d1.v

    def point(self, delta: int, j: int) -> int:
        return j * self.v0 + delta

    def block_index(self, beta: int, gamma: int) -> int:
        return beta * self.input.d2.b + gamma


def construct(inp: CompositionInput) -> ComposedDesign:
    """Assemble the composed design, blocks enumerated beta-major then
    gamma; block sizes and counts are checked against the ledger."""
    ledger = predict(inp)
    v0 = inp.d0.v
    cidx = inp.resolution.class_index()
    blocks = []
    labels = []
    for beta in range(inp.d1.b):
        j_of_class = inp.family.images[beta]
        for gamma, d2block in enumerate(inp.d2.blocks):
            pts = []
            for ell in d2block:
                j = j_of_class[cidx[ell]]
                base = j * v0
                pts.extend(base + delta for delta in inp.d0.blocks[ell])
            blocks.append(tuple(sorted(pts)))
            labels.append((beta, gamma))
    design = IncidenceStructure(v0 * inp.d1.v, blocks)
    if design.b != ledger.b:
        raise AssertionError("block count disagrees with the ledger")
    bad = next((blk for blk in design.blocks if len(blk) != ledger.block_size), None)
    if bad is not None:
        raise AssertionError("a block size disagrees with the ledger")
    rep = verify_tdesign(design, 1)
    if not rep or rep.value != ledger.replication:
        raise AssertionError("replication disagrees with the ledger")
    parts = tuple(
        tuple(range(j * v0, (j + 1) * v0)) for j in range(inp.d1.v)
    )
    return ComposedDesign(inp, design, tuple(labels), parts, ledger)


def affine_symmetric(
    d0: IncidenceStructure, resolution: Resolution, square: LatinSquare
) -> ComposedDesign:
    """Compose an affine resolvable design with the trivial symmetric
    design and its own dual, the bijections read off a Latin square of
    order r+1.  Output is a symmetric 2-(s^2 mu (r+1), s mu r, mu (r-1))
    design."""
    d2, grouping, _mu = dual_transversal(d0, resolution)
    r = len(resolution.classes)
    if square.n != r + 1:
        raise ValueError(f"Latin square order {square.n} != r + 1 = {r + 1}")
    d1 = trivial_symmetric(r + 1)
    family = latin_to_bijections(square, d1)
    inp = composition_input(d0, resolution, d1, family, d2, grouping)
    return construct(inp)


def sane(q: int, square: LatinSquare) -> ComposedDesign:
    """The quasi-affine family: compose AG(2, q) with a Latin square of
    order q+2 into a symmetric 2-(q^2(q+2), q(q+1), q) design."""
    d0, resolution = affine_plane(q)
    return affine_symmetric(d0, resolution, square)
