"""The CC1 (24 single-qubit) and CC2 (11520 two-qubit) standard minimal forms.

CC1 holds one diagram per element of the reduced 1-qubit Clifford group:
the identity wire, six one-vertex forms, thirteen two-vertex forms and four
three-vertex forms.  CC2 is generated from four shapes (tensor, swap, CNOT
and swapped-CNOT) dressed with CC1 blocks and the small post-CNOT parameter
families; its size 24*24*(1+1+9+9) = 11520 equals the order of the reduced
2-qubit Clifford group, so distinctness of all member keys makes the family
a complete set of representatives.

Tables are built lazily once per process and shared read-only.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .diagram import B, X, Z, Diagram, DiagramBuilder
from .errors import NotAClifford
from .passes import fuse_spiders, remove_identities
from .semantics import DEFAULT_TOL, interpret, scalar_free_equal

KEY_DECIMALS = 12


def canonical_key(m: np.ndarray, decimals: int = KEY_DECIMALS) -> Tuple:
    """Scalar-free fingerprint: normalise by the first max-magnitude entry
    (first within a relative tolerance, so float noise cannot change which
    entry is picked) and round.  Clifford matrices live on a discrete grid,
    so the rounded form is stable."""
    m = np.asarray(m, dtype=complex)
    flat = m.ravel()
    mags = np.abs(flat)
    top = float(mags.max())
    if top < 1e-14:
        return ("zero", m.shape)
    idx = int(np.argmax(mags >= top * (1.0 - 1e-9)))
    pivot = flat[idx]
    norm = m / pivot
    re = np.round(norm.real, decimals) + 0.0
    im = np.round(norm.imag, decimals) + 0.0
    return (m.shape, tuple(re.ravel()), tuple(im.ravel()))


def line_diagram(seq: Sequence[Tuple[str, int]]) -> Diagram:
    """A one-wire diagram with the given (kind, phase) vertices in order."""
    b = DiagramBuilder()
    i0 = b.add_vertex(B)
    prev = i0
    for kind, phase in seq:
        v = b.add_vertex(kind, phase)
        b.add_edge(prev, v)
        prev = v
    o0 = b.add_vertex(B)
    b.add_edge(prev, o0)
    b.set_boundaries([i0], [o0])
    return b.build()


def _line_pool(max_vertices: int) -> List[List[Tuple[str, int]]]:
    """All spider-only line sequences with at most max_vertices vertices.

    H boxes are excluded: the minimal-form claim is about the stabilizer
    spider language (an H box would undercut the three-vertex Euler forms).
    """
    alphabet: List[Tuple[str, int]] = [(Z, p) for p in range(4)] + \
        [(X, p) for p in range(4)]
    pool: List[List[Tuple[str, int]]] = [[]]
    frontier: List[List[Tuple[str, int]]] = [[]]
    for _ in range(max_vertices):
        frontier = [seq + [a] for seq in frontier for a in alphabet]
        pool.extend(frontier)
    return pool


class CC1Table:
    """The 24 single-qubit minimal forms with precomputed oracle keys."""

    def __init__(self):
        members: List[Diagram] = [Diagram.identity_wire()]
        for kind in (Z, X):
            for p in (1, 2, 3):
                members.append(line_diagram([(kind, p)]))
        # two-vertex candidates: opposite-colour ordered pairs, deduplicated
        # semantically; exactly 13 classes must remain
        keys = {canonical_key(interpret(m)) for m in members}
        two: List[Diagram] = []
        for first, second in ((Z, X), (X, Z)):
            for a in (1, 2, 3):
                for b in (1, 2, 3):
                    d = line_diagram([(first, a), (second, b)])
                    k = canonical_key(interpret(d))
                    if k not in keys:
                        keys.add(k)
                        two.append(d)
        if len(two) != 13:
            raise AssertionError(f"expected 13 two-vertex forms, found {len(two)}")
        members.extend(two)
        # three-vertex candidates: alternating +-pi/2 labels only
        three: List[Diagram] = []
        for first, second in ((Z, X), (X, Z)):
            for a in (1, 3):
                for b in (1, 3):
                    for c in (1, 3):
                        d = line_diagram([(first, a), (second, b), (first, c)])
                        k = canonical_key(interpret(d))
                        if k not in keys:
                            keys.add(k)
                            three.append(d)
        if len(three) != 4:
            raise AssertionError(f"expected 4 three-vertex forms, found {len(three)}")
        members.extend(three)
        if len(members) != 24:
            raise AssertionError(f"expected 24 members, found {len(members)}")
        self.members: Tuple[Diagram, ...] = tuple(members)
        self.keys: Dict[Tuple, int] = {}
        for i, m in enumerate(self.members):
            self.keys[canonical_key(interpret(m))] = i

    def lookup(self, matrix: np.ndarray, tol: float = DEFAULT_TOL) -> Tuple[int, Diagram]:
        k = canonical_key(matrix)
        if k in self.keys:
            idx = self.keys[k]
            if scalar_free_equal(interpret(self.members[idx]), matrix, tol):
                return idx, self.members[idx]
        for idx, m in enumerate(self.members):  # rounding fallback, rarely taken
            if scalar_free_equal(interpret(m), matrix, tol):
                return idx, m
        raise NotAClifford("matrix is not a 1-qubit Clifford")

    def verify_minimality(self) -> None:
        """No line diagram with fewer vertices is equivalent to any member."""
        best: Dict[Tuple, int] = {}
        for seq in _line_pool(3):
            k = canonical_key(interpret(line_diagram(seq)))
            n = len(seq)
            if k not in best or n < best[k]:
                best[k] = n
        for i, m in enumerate(self.members):
            k = canonical_key(interpret(m))
            size = len(m.interior())
            if best.get(k, size) < size:
                raise AssertionError(f"CC1 member {i} is not minimal")


_A_PARAMS: List[List[Tuple[str, int]]] = [[], [(X, 1)], [(X, 1), (Z, 1)]]
_B_PARAMS: List[List[Tuple[str, int]]] = [[], [(Z, 1)], [(Z, 1), (X, 1)]]

CC2_SHAPES = ("tensor", "swap", "cnot", "tonc")


def _build_cc2_member(shape: str, c1_seq, c2_seq, a_seq, b_seq) -> Diagram:
    bld = DiagramBuilder()
    in0 = bld.add_vertex(B)
    in1 = bld.add_vertex(B)
    frontier = [in0, in1]

    def run(wire: int, seq) -> None:
        for kind, phase in seq:
            v = bld.add_vertex(kind, phase)
            bld.add_edge(frontier[wire], v)
            frontier[wire] = v

    run(0, c1_seq)
    run(1, c2_seq)
    if shape in ("cnot", "tonc"):
        zv = bld.add_vertex(Z, 0)
        xv = bld.add_vertex(X, 0)
        bld.add_edge(frontier[0], zv)
        bld.add_edge(frontier[1], xv)
        bld.add_edge(zv, xv)
        frontier[0], frontier[1] = zv, xv
        if shape == "tonc":
            frontier[0], frontier[1] = frontier[1], frontier[0]
        run(0, b_seq if shape == "tonc" else a_seq)
        run(1, a_seq if shape == "tonc" else b_seq)
    elif shape == "swap":
        frontier[0], frontier[1] = frontier[1], frontier[0]
    out0 = bld.add_vertex(B)
    out1 = bld.add_vertex(B)
    bld.add_edge(frontier[0], out0)
    bld.add_edge(frontier[1], out1)
    bld.set_boundaries([in0, in1], [out0, out1])
    # canonical form: adjacent same-colour blocks fuse into the CNOT legs
    return remove_identities(fuse_spiders(bld.build()))


class CC2Family:
    """All 11520 two-qubit minimal forms, indexed by oracle key."""

    def __init__(self, cc1: CC1Table):
        cc1_seqs: List[List[Tuple[str, int]]] = []
        for m in cc1.members:
            seq = [(m.kind(v), m.phase(v)) for v in m.interior()]
            # interior ids are in wire order by construction of line_diagram
            cc1_seqs.append(seq)
        self.members: List[Diagram] = []
        self.shapes: List[Tuple] = []
        self.keys: Dict[Tuple, int] = {}
        for shape in CC2_SHAPES:
            a_opts = _A_PARAMS if shape in ("cnot", "tonc") else [[]]
            b_opts = _B_PARAMS if shape in ("cnot", "tonc") else [[]]
            for ai, a_seq in enumerate(a_opts):
                for bi, b_seq in enumerate(b_opts):
                    for i1, c1 in enumerate(cc1_seqs):
                        for i2, c2 in enumerate(cc1_seqs):
                            d = _build_cc2_member(shape, c1, c2, a_seq, b_seq)
                            k = canonical_key(interpret(d))
                            if k in self.keys:
                                raise AssertionError(
                                    f"CC2 key collision: {shape},{ai},{bi},{i1},{i2}")
                            self.keys[k] = len(self.members)
                            self.members.append(d)
                            self.shapes.append((shape, ai, bi, i1, i2))
        if len(self.members) != 11520:
            raise AssertionError(f"expected 11520 members, found {len(self.members)}")

    def lookup(self, matrix: np.ndarray, tol: float = DEFAULT_TOL) -> Diagram:
        if np.asarray(matrix).shape != (4, 4):
            raise NotAClifford("CC2 lookup needs a 4x4 matrix")
        k = canonical_key(matrix)
        idx = self.keys.get(k)
        if idx is None:
            raise NotAClifford("matrix is not a 2-qubit Clifford (no key match)")
        member = self.members[idx]
        if not scalar_free_equal(interpret(member), matrix, tol):
            raise NotAClifford("key collision outside tolerance")
        return member

    def contains(self, d: Diagram) -> bool:
        """Structural membership: d must be isomorphic to a member."""
        if d.signature() != (2, 2):
            return False
        try:
            member = self.lookup(interpret(d))
        except NotAClifford:
            return False
        return d.iso_equal(member)


_CC1: Optional[CC1Table] = None
_CC2: Optional[CC2Family] = None


def cc1_table() -> CC1Table:
    global _CC1
    if _CC1 is None:
        _CC1 = CC1Table()
    return _CC1


def cc2_family() -> CC2Family:
    global _CC2
    if _CC2 is None:
        _CC2 = CC2Family(cc1_table())
    return _CC2


def cc2_lookup(matrix: np.ndarray, tol: float = DEFAULT_TOL) -> Diagram:
    return cc2_family().lookup(matrix, tol)


def cc2_contains(d: Diagram) -> bool:
    return cc2_family().contains(d)
