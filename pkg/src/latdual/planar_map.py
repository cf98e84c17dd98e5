"""Combinatorial maps: graphs embedded on the sphere or torus.

A map is encoded by two permutations of its darts (half-edges):
``alpha`` reverses a dart, ``sigma`` moves to the next dart
counterclockwise around the same vertex.  Everything else is derived:

* vertices  = orbits of sigma,
* faces     = orbits of ``phi = sigma o alpha`` (``phi(d) = sigma[alpha[d]]``),
* with sigma counterclockwise, ``phi`` walks each face boundary
  clockwise: the face of a dart lies on its *right*.

Orientation conventions used throughout the package:

* ``tail(d)`` is the vertex owning dart ``d``; ``head(d) = tail(alpha(d))``.
* The dual map keeps the dart set and alpha, with
  ``sigma_dual(d) = alpha[sigma[d]]``.  Under this choice ``dual(dual(m))``
  is *identical* to ``m`` (not merely isomorphic).  In the dual map
  ``tail(y) = face(alpha(y))`` and ``head(y) = face(y)``: the dual dart
  ``y`` crosses the primal dart ``y`` transversally, running from its
  left face to its right face.
* ``cross_count(C, D)`` computes the algebraic intersection number of a
  primal cycle with a dual cycle from shared edge indices, normalized so
  that intersection numbers match the standard surface orientation
  (eastward row cycle . northward column cycle = +1 on grid tori).

No coordinates are stored; all constructions are purely combinatorial.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import (
    DegenerateMap,
    EulerMismatch,
    MalformedRotation,
    NotATorus,
    SizeTooSmall,
)

SPHERE = "sphere"
TORUS = "torus"


def _orbits(perm):
    """Orbits of a permutation given as an integer array, ordered by
    smallest element."""
    n = len(perm)
    seen = np.zeros(n, dtype=bool)
    out = []
    for start in range(n):
        if seen[start]:
            continue
        orb = []
        d = start
        while not seen[d]:
            seen[d] = True
            orb.append(d)
            d = perm[d]
        out.append(orb)
    return out


class CombinatorialMap:
    """Immutable embedded graph on the sphere or torus.

    Parameters
    ----------
    sigma, alpha : sequences of dart indices
        ``alpha`` must be a fixed-point-free involution.
    surface : "sphere" or "torus"
        Declared surface; the computed Euler characteristic must match.
    """

    __slots__ = (
        "n_darts", "sigma", "alpha", "phi", "surface",
        "vertices", "faces", "vertex_of", "face_of",
        "edge_of", "edge_dart", "n_edges", "_homology",
    )

    def __init__(self, sigma, alpha, surface):
        sigma = np.asarray(sigma, dtype=np.int64)
        alpha = np.asarray(alpha, dtype=np.int64)
        n = len(sigma)
        if len(alpha) != n:
            raise MalformedRotation("sigma and alpha disagree on dart count")
        if n == 0 or n % 2:
            raise MalformedRotation("dart count must be positive and even")
        for name, p in (("sigma", sigma), ("alpha", alpha)):
            if sorted(p.tolist()) != list(range(n)):
                raise MalformedRotation(f"{name} is not a permutation of 0..{n - 1}")
        if np.any(alpha[alpha] != np.arange(n)) or np.any(alpha == np.arange(n)):
            raise MalformedRotation("alpha must be a fixed-point-free involution")
        if surface not in (SPHERE, TORUS):
            raise ValueError(f"unknown surface {surface!r}")

        self.n_darts = n
        self.sigma = sigma
        self.alpha = alpha
        self.phi = sigma[alpha]
        self.surface = surface

        self.vertices = _orbits(sigma)
        self.faces = _orbits(self.phi)
        self.vertex_of = np.empty(n, dtype=np.int64)
        for i, orb in enumerate(self.vertices):
            self.vertex_of[orb] = i
        self.face_of = np.empty(n, dtype=np.int64)
        for i, orb in enumerate(self.faces):
            self.face_of[orb] = i

        # edge k <-> dart pair {edge_dart[k], alpha[edge_dart[k]]}
        self.edge_dart = np.array(
            [d for d in range(n) if d < alpha[d]], dtype=np.int64)
        self.n_edges = len(self.edge_dart)
        self.edge_of = np.empty(n, dtype=np.int64)
        for k, d in enumerate(self.edge_dart):
            self.edge_of[d] = k
            self.edge_of[alpha[d]] = k

        self._check_connected()
        chi = self.n_vertices - self.n_edges + self.n_faces
        expected = 2 if surface == SPHERE else 0
        if chi != expected:
            raise EulerMismatch(
                f"V-E+F = {chi}, expected {expected} for {surface}")
        self._homology = None

    # -- basic queries ---------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    def tail(self, d):
        return int(self.vertex_of[d])

    def head(self, d):
        return int(self.vertex_of[self.alpha[d]])

    def degree(self, v):
        return len(self.vertices[v])

    def _check_connected(self):
        n = self.n_darts
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            d = stack.pop()
            for nxt in (self.sigma[d], self.alpha[d]):
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
        if not seen.all():
            raise MalformedRotation("map is not connected")

    def __repr__(self):
        return (f"CombinatorialMap({self.surface}, V={self.n_vertices}, "
                f"E={self.n_edges}, F={self.n_faces})")

    # -- duality ----------------------------------------------------------

    def dual(self):
        """Dual map on the same darts; ``m.dual().dual()`` equals ``m``.

        Edge ``k`` of the dual is edge ``k`` of the primal; the dual dart
        ``y`` crosses the primal dart ``y`` from right to left.
        """
        return CombinatorialMap(self.alpha[self.sigma], self.alpha, self.surface)

    # -- isomorphism ------------------------------------------------------

    def _canon_from(self, start):
        """BFS relabelling code starting at ``start`` (sigma/alpha walk)."""
        n = self.n_darts
        label = np.full(n, -1, dtype=np.int64)
        label[start] = 0
        order = [start]
        nxt = 1
        q = deque([start])
        while q:
            d = q.popleft()
            for e in (self.sigma[d], self.alpha[d]):
                if label[e] < 0:
                    label[e] = nxt
                    nxt += 1
                    order.append(e)
                    q.append(e)
        code = []
        for d in order:
            code.append(int(label[self.sigma[d]]))
            code.append(int(label[self.alpha[d]]))
        return tuple(code)

    def canonical_form(self):
        """Minimal BFS code over all starting darts; equal codes iff
        isomorphic (as oriented maps on the same surface)."""
        return min(self._canon_from(s) for s in range(self.n_darts))

    def is_isomorphic(self, other):
        return (self.surface == other.surface
                and self.n_darts == other.n_darts
                and self.canonical_form() == other.canonical_form())

    # -- homology ---------------------------------------------------------

    def tree_cotree(self):
        """Spanning tree / dual spanning cotree split of the edges.

        Returns ``(tree, cotree, leftover)`` as lists of edge indices.
        On the sphere ``leftover`` is empty, on the torus it has 2 edges.
        """
        tree = set()
        seen = {0}
        stack = [0]
        parent_dart = {}
        while stack:
            v = stack.pop()
            for d in self.vertices[v]:
                w = self.head(d)
                if w not in seen:
                    seen.add(w)
                    tree.add(int(self.edge_of[d]))
                    parent_dart[w] = d
                    stack.append(w)
        # dual spanning tree among the non-tree edges
        cotree = set()
        dseen = {0}
        stack = [0]
        dual_parent = {}
        while stack:
            f = stack.pop()
            for d in self.faces[f]:
                e = int(self.edge_of[d])
                if e in tree:
                    continue
                g = int(self.face_of[self.alpha[d]])
                if g not in dseen:
                    dseen.add(g)
                    cotree.add(e)
                    dual_parent[g] = d
                    stack.append(g)
        leftover = [e for e in range(self.n_edges)
                    if e not in tree and e not in cotree]
        return sorted(tree), sorted(cotree), sorted(leftover)

    def _tree_path(self, v_from, v_to, tree_edges):
        """Dart walk from v_from to v_to inside the spanning tree."""
        tree = set(tree_edges)
        prev = {v_from: None}
        q = deque([v_from])
        while q:
            v = q.popleft()
            if v == v_to:
                break
            for d in self.vertices[v]:
                if int(self.edge_of[d]) not in tree:
                    continue
                w = self.head(d)
                if w not in prev:
                    prev[w] = d
                    q.append(w)
        path = []
        v = v_to
        while prev[v] is not None:
            d = prev[v]
            path.append(d)
            v = self.tail(d)
        path.reverse()
        return path

    def fundamental_cycle(self, edge, tree_edges):
        """Closed dart walk: tree path closing up through ``edge``."""
        d = int(self.edge_dart[edge])
        path = self._tree_path(self.head(d), self.tail(d), tree_edges)
        return [d] + path

    def homology_basis(self):
        """Two closed walks generating H1 of a torus map, with
        intersection number A.B = +1.  Cached."""
        if self.surface != TORUS:
            raise NotATorus("homology basis requires a torus map")
        if self._homology is not None:
            return self._homology
        tree, cotree, leftover = self.tree_cotree()
        if len(leftover) != 2:
            raise EulerMismatch(
                f"tree-cotree leftover {len(leftover)} != 2 on torus")
        a = self.fundamental_cycle(leftover[0], tree)
        b = self.fundamental_cycle(leftover[1], tree)
        ab = self.intersection_number(a, b)
        if ab == -1:
            b = [int(self.alpha[d]) for d in reversed(b)]
        elif ab != 1:
            raise EulerMismatch(f"basis cycles intersect {ab} times, not +-1")
        self._homology = HomologyBasis(a, b)
        return self._homology

    def is_closed_walk(self, darts):
        if not darts:
            return True
        for d, e in zip(darts, darts[1:]):
            if self.head(d) != self.tail(e):
                return False
        return self.head(darts[-1]) == self.tail(darts[0])

    def intersection_number(self, cycle_a, cycle_b):
        """Algebraic intersection number of two closed dart walks.

        Pushes ``cycle_b`` off to its left and counts signed crossings of
        the pushed copy with the darts of ``cycle_a``; shared edges are
        handled automatically (the pushed copy never meets them).
        """
        if not (self.is_closed_walk(cycle_a) and self.is_closed_walk(cycle_b)):
            raise ValueError("intersection number needs closed walks")
        in_a = {}
        for d in cycle_a:
            in_a[d] = in_a.get(d, 0) + 1
        total = 0
        k = len(cycle_b)
        for i in range(k):
            d_in = cycle_b[i]
            d_out = cycle_b[(i + 1) % k]
            v_enter = int(self.alpha[d_in])   # dart at the corner, backwards
            # walk the fan strictly ccw from d_out to v_enter
            x = int(self.sigma[d_out])
            while x != v_enter:
                if x == d_out:
                    raise ValueError("fan failed to close; bad walk")
                total += in_a.get(x, 0) - in_a.get(int(self.alpha[x]), 0)
                x = int(self.sigma[x])
        # The fan walk counts crossings of the pushed copy of B over A with
        # the opposite orientation sign; negate so that an eastward row
        # cycle and a northward column cycle of a grid torus give A.B = +1.
        return -total

    def cross_count(self, primal_cycle, dual_cycle):
        """Intersection number of a primal closed walk with a dual closed
        walk (dual darts index the same edges).  +1 each time the dual walk
        uses the dart of the primal walk itself (right-to-left crossing)."""
        use = {}
        for y in dual_cycle:
            use[y] = use.get(y, 0) + 1
        return sum(use.get(d, 0) - use.get(int(self.alpha[d]), 0)
                   for d in primal_cycle)

    def face_is_contractible(self, f):
        """Face boundaries always bound, hence are null-homologous; checked
        against the homology basis via crossings with basis-dual cycles."""
        if self.surface != TORUS:
            return True
        dual = self.dual()
        tree, cotree, leftover = self.tree_cotree()
        # dual cycles through the two leftover edges
        basis = self.homology_basis()
        walk = list(self.faces[f])
        for e in leftover:
            dwalk = dual.fundamental_cycle(
                e, [k for k in range(self.n_edges) if k in set(cotree)])
            if self.cross_count(walk, dwalk) != 0:
                return False
        return True


class HomologyBasis:
    """Pair of closed dart walks A, B on a torus map with A.B = +1."""

    __slots__ = ("cycle_a", "cycle_b")

    def __init__(self, cycle_a, cycle_b):
        self.cycle_a = list(map(int, cycle_a))
        self.cycle_b = list(map(int, cycle_b))


def build_map(rotations, alpha_pairs, surface):
    """Build a map from per-vertex counterclockwise dart lists plus the
    edge pairing.

    ``rotations``    -- iterable of dart lists, one per vertex;
    ``alpha_pairs``  -- iterable of (d, d') dart pairs, one per edge.
    """
    rotations = [list(r) for r in rotations]
    all_darts = [d for rot in rotations for d in rot]
    n = len(all_darts)
    if n == 0:
        raise MalformedRotation("no darts")
    if sorted(all_darts) != list(range(n)):
        raise MalformedRotation("darts must be 0..n-1, each exactly once")
    sigma = np.empty(n, dtype=np.int64)
    for rot in rotations:
        for i, d in enumerate(rot):
            sigma[d] = rot[(i + 1) % len(rot)]
    alpha = np.full(n, -1, dtype=np.int64)
    for d, e in alpha_pairs:
        if d == e or alpha[d] != -1 or alpha[e] != -1:
            raise MalformedRotation(f"bad alpha pair ({d}, {e})")
        alpha[d] = e
        alpha[e] = d
    if np.any(alpha < 0):
        raise MalformedRotation("alpha pairs do not cover all darts")
    return CombinatorialMap(sigma, alpha, surface)


# ---------------------------------------------------------------------------
# grid builders


def grid_torus(m, n):
    """m x n square-lattice torus.  Vertex (i, j) has darts in ccw order
    E, N, W, S; east dart of (i,j) is ``4*(j*m+i)``, etc.

    Rows wrap modulo m (x direction), columns modulo n (y direction).
    """
    if m < 2 or n < 2:
        raise SizeTooSmall("grid torus needs m, n >= 2")

    def dart(i, j, k):          # k: 0=E 1=N 2=W 3=S
        return 4 * ((j % n) * m + (i % m)) + k

    rotations = [[dart(i, j, 0), dart(i, j, 1), dart(i, j, 2), dart(i, j, 3)]
                 for j in range(n) for i in range(m)]
    pairs = []
    for j in range(n):
        for i in range(m):
            pairs.append((dart(i, j, 0), dart(i + 1, j, 2)))
            pairs.append((dart(i, j, 1), dart(i, j + 1, 3)))
    return build_map(rotations, pairs, TORUS)


def grid_torus_coordinates(m, n):
    """Vertex and face coordinates for grid_torus(m, n): vertex (i,j) at
    i + 1j*j, face k at the center of the square with SW corner (i,j)."""
    gm = grid_torus(m, n)
    vcoord = {}
    for j in range(n):
        for i in range(m):
            vcoord[gm.tail(4 * (j * m + i))] = complex(i, j)
    fcoord = {}
    for j in range(n):
        for i in range(m):
            east = 4 * (j * m + i)
            f = int(gm.face_of[east])     # face NE of (i, j)
            fcoord[f] = complex(i + 0.5, j + 0.5)
    return gm, vcoord, fcoord


def grid_canonical_homology(gm, m, n):
    """Row-0 eastward cycle and column-0 northward cycle of a grid torus."""
    a = [4 * i for i in range(m)]              # east darts along row 0
    b = [4 * (j * m) + 1 for j in range(n)]    # north darts along column 0
    ab = gm.intersection_number(a, b)
    if ab != 1:
        raise EulerMismatch(f"grid A.B = {ab}, expected 1")
    gm._homology = HomologyBasis(a, b)
    return gm._homology


def grid_patch(m, n, wired=()):
    """m x n grid patch on the sphere, with optional wired sides.

    ``wired`` is a subset of {"north", "south", "east", "west"}; each wired
    side is collapsed to a single extended vertex (its along-side edges are
    contracted away).  Free sides need no decoration: in the dual they all
    attach to the outer-face vertex.
    """
    if m < 2 or n < 2:
        raise SizeTooSmall("grid patch needs m, n >= 2")
    bad = set(wired) - {"north", "south", "east", "west"}
    if bad:
        raise ValueError(f"unknown sides {sorted(bad)}")

    # darts: for each horizontal edge ((i,j)-(i+1,j)) a pair, likewise
    # vertical; number them edge by edge.
    h_edges = [(i, j) for j in range(n) for i in range(m - 1)]
    v_edges = [(i, j) for j in range(n - 1) for i in range(m)]
    dart_id = {}
    nd = 0
    for (i, j) in h_edges:
        dart_id[("E", i, j)] = nd        # at (i,j), pointing east
        dart_id[("W", i + 1, j)] = nd + 1
        nd += 2
    for (i, j) in v_edges:
        dart_id[("N", i, j)] = nd
        dart_id[("S", i, j + 1)] = nd + 1
        nd += 2
    rotations = []
    for j in range(n):
        for i in range(m):
            rot = [dart_id.get((k, i, j)) for k in ("E", "N", "W", "S")]
            rotations.append([d for d in rot if d is not None])
    pairs = [(2 * k, 2 * k + 1) for k in range(nd // 2)]
    patch = build_map(rotations, pairs, SPHERE)

    def vertex_index(i, j):
        return int(patch.vertex_of[dart_id[
            next(k for k in (("E", i, j), ("N", i, j), ("W", i, j), ("S", i, j))
             if k in dart_id)]])

    side_edges = {
        "south": [dart_id[("E", i, 0)] for i in range(m - 1)],
        "north": [dart_id[("E", i, n - 1)] for i in range(m - 1)],
        "west": [dart_id[("N", 0, j)] for j in range(n - 1)],
        "east": [dart_id[("N", m - 1, j)] for j in range(n - 1)],
    }
    for side in sorted(wired):
        while side_edges[side]:
            d = side_edges[side][0]
            patch = contract_edge(patch, int(patch.edge_of[d]))
            # dart ids shift after contraction: recompute remaining lists
            side_edges = _remap_side_edges(side_edges, d)
    return patch


def _remap_side_edges(side_edges, removed_dart):
    """After contracting the edge of ``removed_dart``, dart ids above the
    removed pair shift down by 2."""
    base = removed_dart - (removed_dart % 2)
    out = {}
    for side, darts in side_edges.items():
        new = []
        for d in darts:
            if d in (base, base + 1):
                continue
            new.append(d - 2 if d > base + 1 else d)
        out[side] = new
    return out


def contract_edge(m, edge):
    """Contract a non-loop edge, merging its endpoints.  Preserves the
    embedding (and hence the Euler characteristic)."""
    d = int(m.edge_dart[edge])
    a = int(m.alpha[d])
    if m.tail(d) == m.head(d):
        raise DegenerateMap("cannot contract a loop")
    # splice the two rotation cycles: successor of x skips d and a.
    n = m.n_darts
    sigma = m.sigma.copy()
    # predecessor of a dart in its rotation
    pred = np.empty(n, dtype=np.int64)
    pred[sigma] = np.arange(n)
    sigma[pred[d]] = sigma[a]
    sigma[pred[a]] = sigma[d]
    keep = np.array([x for x in range(n) if x not in (d, a)], dtype=np.int64)
    relabel = np.full(n, -1, dtype=np.int64)
    relabel[keep] = np.arange(n - 2)
    new_sigma = relabel[sigma[keep]]
    new_alpha = relabel[m.alpha[keep]]
    return CombinatorialMap(new_sigma, new_alpha, m.surface)


# ---------------------------------------------------------------------------
# derived graphs


def check_nondegenerate(m):
    """Every edge must have two distinct endpoints and two distinct sides;
    otherwise the quadrangulation collapses."""
    for d in m.edge_dart:
        a = int(m.alpha[d])
        if m.tail(d) == m.head(d):
            raise DegenerateMap(f"edge {int(m.edge_of[d])} is a loop")
        if int(m.face_of[d]) == int(m.face_of[a]):
            raise DegenerateMap(
                f"edge {int(m.edge_of[d])} is a bridge (same face both sides)")


def diamond(m):
    """Quadrangulation on V + V*: one edge per corner (tail(d), face(d)).

    Diamond darts: ``2*d`` runs vertex -> face, ``2*d + 1`` back.  Each
    primal edge e = {d, alpha d} spans the quad face with corner darts
    ``{d, phi(d), alpha(d), phi(alpha(d))}``.
    """
    check_nondegenerate(m)
    n = m.n_darts
    sigma = np.empty(2 * n, dtype=np.int64)
    phi = m.phi
    phi_inv = np.empty(n, dtype=np.int64)
    phi_inv[phi] = np.arange(n)
    # phi runs face boundaries clockwise, so the ccw rotation around a
    # face vertex follows phi inverse
    for d in range(n):
        sigma[2 * d] = 2 * int(m.sigma[d])            # ccw around tail(d)
        sigma[2 * d + 1] = 2 * int(phi_inv[d]) + 1    # ccw around face(d)
    alpha = np.empty(2 * n, dtype=np.int64)
    alpha[0::2] = np.arange(n) * 2 + 1
    alpha[1::2] = np.arange(n) * 2
    dm = CombinatorialMap(sigma, alpha, m.surface)
    from collections import Counter
    for f in range(dm.n_faces):
        if len(dm.faces[f]) != 4:
            raise DegenerateMap("diamond face is not a quadrilateral")
        corners = [int(y) // 2 for y in dm.faces[f]]
        counts = sorted(Counter(int(m.edge_of[x]) for x in corners).values())
        # the quad of edge e holds the corners {d, phi d, alpha d,
        # phi(alpha d)}, so e appears exactly twice among the corner edges
        if len(set(corners)) != 4 or counts != [1, 1, 2]:
            raise DegenerateMap("diamond face is not the quad of one edge")
    return dm


def medial(m):
    """Medial map: one 4-valent vertex per edge of ``m``.

    Medial darts: ``2*d`` runs along face(d) from the midpoint of edge(d)
    towards the midpoint of edge(phi(d)); ``2*d + 1`` is its reversal.
    The ccw rotation at the midpoint of edge {d, alpha d} is
    (2d, 2 phi^-1(alpha d) + 1, 2 alpha(d), 2 phi^-1(d) + 1).
    """
    check_nondegenerate(m)
    n = m.n_darts
    phi = m.phi
    phi_inv = np.empty(n, dtype=np.int64)
    phi_inv[phi] = np.arange(n)
    sigma = np.empty(2 * n, dtype=np.int64)
    for d in range(n):
        sigma[2 * d] = 2 * int(phi_inv[m.alpha[d]]) + 1
        sigma[2 * d + 1] = 2 * int(phi[d])
    alpha = np.empty(2 * n, dtype=np.int64)
    alpha[0::2] = np.arange(n) * 2 + 1
    alpha[1::2] = np.arange(n) * 2
    mm = CombinatorialMap(sigma, alpha, m.surface)
    for v in range(mm.n_vertices):
        if mm.degree(v) != 4:
            raise DegenerateMap("medial vertex degree != 4")
    return mm
