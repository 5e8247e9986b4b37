"""Permutation machinery for the composed designs: orbits and Schreier
stabilizer generators, wreath decompositions relative to the part
partition, the two structural properties characterising the
partition-preserving automorphisms, the induced action on the transversal
design, and the four-condition flag-transitivity criterion.

Permutations are image tuples: g[i] is the image of i.  ``compose(p, q)``
applies p first, then q.  Group elements are handled generator-only;
orbits and Schreier generators are the only group-theoretic engines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .compose import ComposedDesign, CompositionInput
from .incidence import Check, IncidenceStructure

Perm = tuple[int, ...]


def identity(m: int) -> Perm:
    return tuple(range(m))


def compose(p: Perm, q: Perm) -> Perm:
    """Apply p, then q."""
    return tuple(q[i] for i in p)


def inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def is_perm(p: Sequence[int]) -> bool:
    return sorted(p) == list(range(len(p)))


def point_action(g: Perm, p: int) -> int:
    return g[p]


def block_image(g: Perm, block) -> frozenset:
    return frozenset(g[p] for p in block)


def is_automorphism(g: Perm, design: IncidenceStructure) -> bool:
    """Direct check: g maps the block multiset onto itself."""
    from collections import Counter

    target = Counter(design.block_sets)
    return Counter(block_image(g, blk) for blk in design.blocks) == target


def block_action(design: IncidenceStructure) -> Callable[[Perm, int], int]:
    """Action on block indices induced by point permutations; requires
    distinct blocks."""
    index = {fs: i for i, fs in enumerate(design.block_sets)}
    if len(index) != design.b:
        raise ValueError("repeated blocks; no induced index action")

    def act(g: Perm, bi: int) -> int:
        return index[block_image(g, design.blocks[bi])]

    return act


def flags(design: IncidenceStructure) -> list[tuple[int, frozenset]]:
    """All incident (point, block) pairs, blocks as frozensets (distinct
    blocks required)."""
    if len(set(design.block_sets)) != design.b:
        raise ValueError("repeated blocks; flags would be ambiguous")
    return [(p, fs) for fs in design.block_sets for p in sorted(fs)]


def flag_action(g: Perm, flag: tuple[int, frozenset]) -> tuple[int, frozenset]:
    p, fs = flag
    return g[p], frozenset(g[x] for x in fs)


@dataclass(frozen=True)
class Orbit:
    """Closure of a seed under generators, with a transversal: for each
    element, a group element carrying the seed there."""

    seed: object
    elements: tuple
    transversal: dict

    def __len__(self) -> int:
        return len(self.elements)


def orbit(gens: Sequence[Perm], seed, act: Callable = point_action) -> Orbit:
    """Breadth-first closure; elements are reported sorted whenever they
    are orderable, so the result is schedule-independent."""
    if gens:
        m = len(gens[0])
        trans = {seed: identity(m)}
    else:
        trans = {seed: ()}
    queue = [seed]
    while queue:
        x = queue.pop()
        t = trans[x]
        for g in gens:
            y = act(g, x)
            if y not in trans:
                trans[y] = compose(t, g)
                queue.append(y)
    try:
        elements = tuple(sorted(trans))
    except TypeError:
        elements = tuple(trans)
    return Orbit(seed, elements, trans)


def stabilizer_gens(gens: Sequence[Perm], x, act: Callable = point_action) -> list[Perm]:
    """Schreier generators of the stabilizer of x, deduplicated.

    For each orbit element y and generator s, the element
    t_y s t_{y^s}^{-1} fixes x; together these generate the stabilizer.
    """
    orb = orbit(gens, x, act)
    out: list[Perm] = []
    seen = set()
    ident = identity(len(gens[0])) if gens else ()
    for y in orb.elements:
        t = orb.transversal[y]
        for s in gens:
            u = compose(compose(t, s), inverse(orb.transversal[act(s, y)]))
            if u != ident and u not in seen:
                seen.add(u)
                out.append(u)
    return out


@dataclass(frozen=True)
class WreathElement:
    """A partition-preserving permutation of Delta_0 x Delta_1, split into
    per-part maps h_j of Delta_0 and a part permutation sigma."""

    h: tuple[Perm, ...]
    sigma: Perm

    @property
    def v1(self) -> int:
        return len(self.sigma)

    @property
    def v0(self) -> int:
        return len(self.h[0])

    def point_perm(self) -> Perm:
        """Reassemble: (delta, j) -> (delta^{h_j}, j^sigma)."""
        v0 = self.v0
        out = [0] * (v0 * self.v1)
        for j, hj in enumerate(self.h):
            base, nbase = j * v0, self.sigma[j] * v0
            for d in range(v0):
                out[base + d] = nbase + hj[d]
        return tuple(out)


def decompose_wreath(g: Perm, v0: int, v1: int) -> WreathElement:
    """Split g along the partition into parts {j*v0 .. (j+1)*v0 - 1};
    raises with a split part as witness when g does not preserve it."""
    if len(g) != v0 * v1:
        raise ValueError("degree mismatch")
    sigma = []
    h = []
    for j in range(v1):
        base = j * v0
        target = g[base] // v0
        hj = []
        for d in range(v0):
            img = g[base + d]
            if img // v0 != target:
                raise ValueError(
                    f"part {j} is split: point {base} maps into part {target}, "
                    f"point {base + d} into part {img // v0}"
                )
            hj.append(img - target * v0)
        sigma.append(target)
        h.append(tuple(hj))
    if not is_perm(sigma):
        raise ValueError("part map is not a permutation")
    return WreathElement(tuple(h), tuple(sigma))


# --- actions of partition-preserving elements derived from the raw perm ---


def part_of(g: Perm, v0: int, j: int) -> int:
    """sigma(j) read off the raw permutation."""
    return g[j * v0] // v0


def part_map(g: Perm, v0: int, delta: int, j: int) -> int:
    """h_j(delta) read off the raw permutation."""
    return g[j * v0 + delta] - part_of(g, v0, j) * v0


def sigma_point_action(v0: int) -> Callable[[Perm, int], int]:
    def act(g: Perm, j: int) -> int:
        return part_of(g, v0, j)

    return act


def sigma_block_action(inp: CompositionInput) -> Callable[[Perm, int], int]:
    """Action on D1's block indices via the part permutation."""
    v0 = inp.d0.v
    index = {fs: i for i, fs in enumerate(inp.d1.block_sets)}

    def act(g: Perm, beta: int) -> int:
        img = frozenset(part_of(g, v0, j) for j in inp.d1.blocks[beta])
        got = index.get(img)
        if got is None:
            raise ValueError("part permutation does not preserve D1's blocks")
        return got

    return act


# --- the two structural properties ----------------------------------------


def preserves_d0_structure(h: Perm, inp: CompositionInput) -> bool:
    """h maps D0's block list onto itself and permutes the parallel
    classes (membership of Aut*(D0))."""
    index = {fs: i for i, fs in enumerate(inp.d0.block_sets)}
    cidx = inp.resolution.class_index()
    image_class: dict[int, set[int]] = {}
    for bi, blk in enumerate(inp.d0.blocks):
        img = index.get(block_image(h, blk))
        if img is None:
            return False
        image_class.setdefault(cidx[bi], set()).add(cidx[img])
    return all(len(targets) == 1 for targets in image_class.values())


def fixes_all_classes(h: Perm, inp: CompositionInput) -> bool:
    """h lies in T0: every parallel class is fixed setwise."""
    index = {fs: i for i, fs in enumerate(inp.d0.block_sets)}
    cidx = inp.resolution.class_index()
    for bi, blk in enumerate(inp.d0.blocks):
        img = index.get(block_image(h, blk))
        if img is None or cidx[img] != cidx[bi]:
            return False
    return True


def sigma_is_d1_automorphism(sigma: Perm, d1: IncidenceStructure) -> bool:
    target = set(d1.block_sets)
    return all(block_image(sigma, blk) in target for blk in d1.blocks)


def check_prop1(w: WreathElement, inp: CompositionInput) -> Check:
    """The class-transport identity: for every block beta of D1 and every
    j in beta, the h_j image of the class psi_beta^{-1}(j) is the class
    psi_{beta^sigma}^{-1}(j^sigma)."""
    if not sigma_is_d1_automorphism(w.sigma, inp.d1):
        return Check(False, reason="sigma is not an automorphism of D1")
    d1index = {fs: i for i, fs in enumerate(inp.d1.block_sets)}
    class_sets = [
        frozenset(inp.d0.block_sets[bi] for bi in cls)
        for cls in inp.resolution.classes
    ]
    class_lookup = {cs: i for i, cs in enumerate(class_sets)}
    for beta in range(inp.d1.b):
        beta_img = d1index[frozenset(w.sigma[j] for j in inp.d1.blocks[beta])]
        cls_of = inp.family.class_for(beta)
        cls_of_img = inp.family.class_for(beta_img)
        for j in inp.d1.blocks[beta]:
            c = cls_of[j]
            hj = w.h[j]
            image = frozenset(
                frozenset(hj[p] for p in inp.d0.blocks[bi])
                for bi in inp.resolution.classes[c]
            )
            if class_lookup.get(image) != cls_of_img[w.sigma[j]]:
                return Check(False, reason="class transport fails", witness=(beta, j))
    return Check(True)


def gamma_prime(
    inp: CompositionInput, w: WreathElement, beta: int, gamma: int
) -> frozenset:
    """The transported transversal block: the set of h_j images of the
    D0-blocks selected by gamma, j running over beta via psi_beta.

    Requires every h_j to map D0 blocks to D0 blocks; raises otherwise.
    """
    index = {fs: i for i, fs in enumerate(inp.d0.block_sets)}
    cidx = inp.resolution.class_index()
    images = inp.family.images[beta]
    out = set()
    for ell in inp.d2.blocks[gamma]:
        j = images[cidx[ell]]
        img = index.get(block_image(w.h[j], inp.d0.blocks[ell]))
        if img is None:
            raise ValueError(
                f"h_{j} does not map D0 block {ell} to a block"
            )
        out.add(img)
    return frozenset(out)


def check_prop2(w: WreathElement, inp: CompositionInput) -> Check:
    """The selector-transport property: for all beta, gamma the
    transported block gamma' is again a block of D2, and it meets
    psi_{beta^sigma}^{-1}(j^sigma) exactly in the h_j image of
    gamma /\\ psi_beta^{-1}(j)."""
    if not sigma_is_d1_automorphism(w.sigma, inp.d1):
        return Check(False, reason="sigma is not an automorphism of D1")
    d1index = {fs: i for i, fs in enumerate(inp.d1.block_sets)}
    d2index = {fs: i for i, fs in enumerate(inp.d2.block_sets)}
    d0index = {fs: i for i, fs in enumerate(inp.d0.block_sets)}
    cidx = inp.resolution.class_index()
    for beta in range(inp.d1.b):
        beta_img = d1index[frozenset(w.sigma[j] for j in inp.d1.blocks[beta])]
        cls_of = inp.family.class_for(beta)
        cls_of_img = inp.family.class_for(beta_img)
        for gamma in range(inp.d2.b):
            try:
                gp = gamma_prime(inp, w, beta, gamma)
            except ValueError:
                return Check(
                    False, reason="a part map breaks D0's blocks", witness=(beta, gamma)
                )
            if gp not in d2index:
                return Check(
                    False,
                    reason="transported selector is not a D2 block",
                    witness=(beta, gamma),
                )
            by_class: dict[int, list[int]] = {}
            for ell in inp.d2.blocks[gamma]:
                by_class.setdefault(cidx[ell], []).append(ell)
            for j in inp.d1.blocks[beta]:
                cut = by_class.get(cls_of[j], [])
                img_cut = frozenset(
                    d0index[block_image(w.h[j], inp.d0.blocks[ell])] for ell in cut
                )
                c_img = cls_of_img[w.sigma[j]]
                target = frozenset(
                    ell
                    for ell in gp
                    if cidx[ell] == c_img
                )
                if img_cut != target:
                    return Check(
                        False,
                        reason="selector cut is not transported",
                        witness=(beta, gamma, j),
                    )
    return Check(True)


def is_aut_via_charg(w: WreathElement, inp: CompositionInput) -> bool:
    """Membership test for the partition-preserving automorphism group by
    the structural characterisation: every h_j preserves D0's blocks and
    classes, sigma is an automorphism of D1, and the selector-transport
    property holds."""
    if not all(preserves_d0_structure(hj, inp) for hj in w.h):
        return False
    if not sigma_is_d1_automorphism(w.sigma, inp.d1):
        return False
    return bool(check_prop2(w, inp))


def phi_beta(w: WreathElement, beta: int, inp: CompositionInput) -> Perm:
    """The induced permutation of D2's points for an element whose sigma
    fixes block beta: each D0-block moves by the h_j of the part its
    class feeds.  The result is verified to be an automorphism of D2."""
    beta_set = frozenset(inp.d1.blocks[beta])
    if frozenset(w.sigma[j] for j in beta_set) != beta_set:
        raise ValueError("sigma does not stabilize beta")
    index = {fs: i for i, fs in enumerate(inp.d0.block_sets)}
    cidx = inp.resolution.class_index()
    images = inp.family.images[beta]
    out = []
    for ell in range(inp.d2.v):
        j = images[cidx[ell]]
        img = index.get(block_image(w.h[j], inp.d0.blocks[ell]))
        if img is None:
            raise ValueError(f"h_{j} does not map D0 block {ell} to a block")
        out.append(img)
    perm = tuple(out)
    if not is_perm(perm):
        raise ValueError("induced map is not a permutation of D2's points")
    if not is_automorphism(perm, inp.d2):
        raise ValueError("induced map is not an automorphism of D2")
    return perm


def flag_transitive_direct(gens: Sequence[Perm], design: IncidenceStructure) -> bool:
    """One orbit on all incident (point, block) pairs.  Every generator
    must be an automorphism."""
    for i, g in enumerate(gens):
        if not is_automorphism(g, design):
            raise ValueError(f"generator {i} is not an automorphism")
    all_flags = flags(design)
    if not gens:
        return len(all_flags) <= 1
    orb = orbit(gens, all_flags[0], flag_action)
    return len(orb) == len(all_flags)


@dataclass(frozen=True)
class FlagTransitivityReport:
    """The four decomposed conditions, their conjunction, and the direct
    whole-design orbit check (the two must agree)."""

    d1_flag_transitive: bool
    d0_flag_transitive: bool
    d2_flag_transitive: bool
    cell_transitive: bool
    direct: bool

    @property
    def overall(self) -> bool:
        return (
            self.d1_flag_transitive
            and self.d0_flag_transitive
            and self.d2_flag_transitive
            and self.cell_transitive
        )

    @property
    def agree(self) -> bool:
        return self.overall == self.direct


def _phi_action(inp: CompositionInput, beta: int):
    """Action of G_beta elements (raw perms) on D2 block indices."""
    v0 = inp.d0.v
    d0index = {fs: i for i, fs in enumerate(inp.d0.block_sets)}
    d2index = {fs: i for i, fs in enumerate(inp.d2.block_sets)}
    cidx = inp.resolution.class_index()
    images = inp.family.images[beta]

    def act(g: Perm, gamma: int) -> int:
        pts = set()
        for ell in inp.d2.blocks[gamma]:
            j = images[cidx[ell]]
            jimg = part_of(g, v0, j)
            moved = frozenset(
                g[j * v0 + d] - jimg * v0 for d in inp.d0.blocks[ell]
            )
            pts.add(d0index[moved])
        return d2index[frozenset(pts)]

    return act


def _phi_perm(inp: CompositionInput, beta: int, g: Perm) -> Perm:
    """phi_beta as a raw-permutation projection (no validity checks;
    callers have verified membership already)."""
    v0 = inp.d0.v
    d0index = {fs: i for i, fs in enumerate(inp.d0.block_sets)}
    cidx = inp.resolution.class_index()
    images = inp.family.images[beta]
    out = []
    for ell in range(inp.d2.v):
        j = images[cidx[ell]]
        jimg = part_of(g, v0, j)
        moved = frozenset(g[j * v0 + d] - jimg * v0 for d in inp.d0.blocks[ell])
        out.append(d0index[moved])
    return tuple(out)


def theorem_flagtr_report(
    gens: Sequence[Perm], composed: ComposedDesign
) -> FlagTransitivityReport:
    """Evaluate the four-part flag-transitivity criterion for the group
    generated by partition-preserving automorphisms of a composed design,
    together with the direct flag-orbit check.

    Conditions are checked on one representative per orbit at each level
    (least index): the groups at different representatives of one orbit
    are conjugate inside the generated group, and conjugation transports
    flag-transitivity, so a single representative decides each orbit.

    Every generator must preserve the part partition and pass the
    membership characterisation; violations raise ValueError.
    """
    inp = composed.input
    v0, v1 = inp.d0.v, inp.d1.v
    wreaths = []
    for i, g in enumerate(gens):
        try:
            w = decompose_wreath(g, v0, v1)
        except ValueError as exc:
            raise ValueError(f"generator {i}: {exc}") from None
        if not is_aut_via_charg(w, inp):
            raise ValueError(
                f"generator {i} fails the membership characterisation"
            )
        wreaths.append(w)

    # 1. the part permutations are flag-transitive on D1
    sigma_gens = [w.sigma for w in wreaths]
    cond1 = flag_transitive_direct(sigma_gens, inp.d1)

    # 2. part stabilizers are flag-transitive on D0
    act_j = sigma_point_action(v0)
    cond2 = True
    seen_j: set[int] = set()
    for j in range(v1):
        if j in seen_j:
            continue
        orb_j = orbit(gens, j, act_j)
        seen_j.update(orb_j.elements)
        stab = stabilizer_gens(gens, j, act_j) if gens else []
        h_gens = [tuple(part_map(g, v0, d, j) for d in range(v0)) for g in stab]
        if not flag_transitive_direct(h_gens, inp.d0):
            cond2 = False
            break

    # 3. block stabilizers act flag-transitively on D2
    act_beta = sigma_block_action(inp)
    cond3 = True
    cond4 = True
    seen_beta: set[int] = set()
    for beta in range(inp.d1.b):
        if beta in seen_beta or not (cond3 and cond4):
            continue
        orb_beta = orbit(gens, beta, act_beta)
        seen_beta.update(orb_beta.elements)
        stab_beta = stabilizer_gens(gens, beta, act_beta) if gens else []
        phi_gens = [_phi_perm(inp, beta, g) for g in stab_beta]
        if not flag_transitive_direct(phi_gens, inp.d2):
            cond3 = False

        # 4. the (beta, gamma, j) stabilizers are transitive on the cells
        act_gamma = _phi_action(inp, beta)
        images = inp.family.images[beta]
        cidx = inp.resolution.class_index()
        seen_gamma: set[int] = set()
        for gamma in range(inp.d2.b):
            if gamma in seen_gamma or not cond4:
                continue
            orb_gamma = orbit(stab_beta, gamma, act_gamma)
            seen_gamma.update(orb_gamma.elements)
            stab_gamma = (
                stabilizer_gens(stab_beta, gamma, act_gamma) if stab_beta else []
            )
            cells: dict[int, tuple[int, ...]] = {}
            for ell in inp.d2.blocks[gamma]:
                j = images[cidx[ell]]
                cells[j] = inp.d0.blocks[ell]
            seen_cell_j: set[int] = set()
            for j, cell in sorted(cells.items()):
                if j in seen_cell_j or not cond4:
                    continue
                orb_cj = orbit(stab_gamma, j, act_j)
                seen_cell_j.update(orb_cj.elements)
                stab_j = (
                    stabilizer_gens(stab_gamma, j, act_j) if stab_gamma else []
                )
                h_gens = [
                    tuple(part_map(g, v0, d, j) for d in range(v0)) for g in stab_j
                ]
                cell_orbit = orbit(h_gens, cell[0])
                if set(cell_orbit.elements) != set(cell):
                    cond4 = False

    direct = flag_transitive_direct(gens, composed.design)
    return FlagTransitivityReport(cond1, cond2, cond3, cond4, direct)


# --- permutation file format: one image list per line ---------------------


def write_perms(perms: Sequence[Perm], path) -> None:
    with open(path, "w", newline="\n") as fh:
        for p in perms:
            fh.write(" ".join(map(str, p)) + "\n")


def read_perms(path) -> list[Perm]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            p = tuple(int(tok) for tok in line.split())
            if not is_perm(p):
                raise ValueError(f"line {lineno}: not a permutation")
            out.append(p)
    return out
