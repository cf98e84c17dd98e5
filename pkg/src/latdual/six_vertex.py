"""Six-vertex model: ice configurations, height functions, the Baxter
oriented-loop measure with its FK and 6V projections, topological
observables, and the free-fermion dimer/Kasteleyn correspondence.

Conventions:

* a configuration assigns each edge its arrow as a chosen dart;
* the type at a vertex is read from the out/in pattern of its rotation
  cycle anchored at the stored first dart (East for grid maps), with
  (E,N,W,S) out-patterns  1:(1,1,0,0) 2:(0,0,1,1) 3:(1,0,0,1)
  4:(0,1,1,0) 5:(0,1,0,1) 6:(1,0,1,0) and weights (a,a,b,b,c,c);
* heights live on dual vertices in integer units of pi/2:
  J[y] = +1 if the arrow dart equals y else -1 on the dual darts of the
  arrow's edge (the primal dart crosses its own dual dart left to right).
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import (
    DomainError,
    InvalidIce,
    NotBipartite,
    NotFourRegular,
    NotPerfectMatching,
    NotPlanar,
    QOutOfRange,
    TooLarge,
)
from .planar_map import CombinatorialMap, diamond, medial
from .random_cluster import FKModel, all_configs, fk_weight, loop_representation

ENUM_CAP = 2 ** 24

# out-pattern (anchored at the first stored dart, then ccw) -> type
TYPE_TABLE = {
    (1, 1, 0, 0): 1, (0, 0, 1, 1): 2,
    (1, 0, 0, 1): 3, (0, 1, 1, 0): 4,
    (0, 1, 0, 1): 5, (1, 0, 1, 0): 6,
}


class SixVertexModel:
    """4-regular map with symmetric weights (a, b, c)."""

    __slots__ = ("map", "a", "b", "c")

    def __init__(self, m, a=1.0, b=1.0, c=1.0):
        for v in range(m.n_vertices):
            if m.degree(v) != 4:
                raise NotFourRegular(f"vertex {v} has degree {m.degree(v)}")
        self.map = m
        self.a = complex(a)
        self.b = complex(b)
        self.c = complex(c)

    def type_weight(self, t):
        return (self.a, self.a, self.b, self.b, self.c, self.c)[t - 1]


def delta_param(a, b, c):
    """Anisotropy invariant (a^2 + b^2 - c^2) / (2ab)."""
    if a <= 0 or b <= 0:
        raise DomainError("a, b must be positive")
    return (a * a + b * b - c * c) / (2 * a * b)


def coupling_constant(c):
    """g = (8/pi) arcsin(c/2) on 0 < c < 2 (pure evaluation; no scaling
    limit is asserted)."""
    if not 0 < c < 2:
        raise DomainError("c must lie in (0, 2)")
    return 8.0 / np.pi * np.arcsin(c / 2.0)


def _out_pattern(m, arrows, v):
    """Out/in booleans around vertex v in rotation order."""
    return tuple(1 if arrows[int(m.edge_of[d])] == d else 0
                 for d in m.vertices[v])


def vertex_type(model, arrows, v):
    pat = _out_pattern(model.map, arrows, v)
    if sum(pat) != 2:
        raise InvalidIce(f"vertex {v} violates the ice rule")
    return TYPE_TABLE[pat]


def enumerate_6v(m):
    """All ice configurations as arrays arrow[e] in {ref dart, alpha}.

    Vectorized filter over the 2^E orientation masks."""
    E = m.n_edges
    if 2 ** E > ENUM_CAP:
        raise TooLarge(f"2^{E} orientations exceed the cap")
    masks = np.arange(2 ** E, dtype=np.int64)
    flips = (masks[:, None] >> np.arange(E)) & 1       # 1 = arrow on alpha
    ref = np.array([1 if d == int(m.edge_dart[m.edge_of[d]]) else 0
                    for d in range(m.n_darts)])
    ok = np.ones(len(masks), dtype=bool)
    for v in range(m.n_vertices):
        out = np.zeros(len(masks), dtype=np.int64)
        for d in m.vertices[v]:
            e = int(m.edge_of[d])
            out += np.where(flips[:, e] == 1 - ref[d], 1, 0)
        ok &= out == 2
    configs = []
    ref_dart = m.edge_dart
    alpha = m.alpha
    for row in flips[ok]:
        configs.append(np.array(
            [int(alpha[ref_dart[e]]) if row[e] else int(ref_dart[e])
             for e in range(E)]))
    return configs


def config_weight(model, arrows):
    w = 1.0 + 0.0j
    for v in range(model.map.n_vertices):
        w *= model.type_weight(vertex_type(model, arrows, v))
    return w


def partition_6v(model):
    return complex(sum(config_weight(model, cfg)
                       for cfg in enumerate_6v(model.map)))


def reverse_config(m, arrows):
    return np.array([int(m.alpha[a]) for a in arrows])


def transfer_matrix_partition(n_cols, n_rows, a, b, c):
    """Independent row-transfer-matrix oracle for the 6V partition
    function on an (n_cols x n_rows) square torus."""
    weight = {1: a, 2: a, 3: b, 4: b, 5: c, 6: c}

    def site_type(o_e, o_n, o_w, o_s):
        return TYPE_TABLE.get((o_e, o_n, o_w, o_s))

    dim = 2 ** n_cols
    T = np.zeros((dim, dim), dtype=complex)
    for s in range(dim):
        s_bits = [(s >> i) & 1 for i in range(n_cols)]       # 1 = up
        for sp in range(dim):
            sp_bits = [(sp >> i) & 1 for i in range(n_cols)]
            acc = 0.0 + 0.0j
            for h in range(dim):
                h_bits = [(h >> i) & 1 for i in range(n_cols)]  # 1 = right
                wrow = 1.0 + 0.0j
                for i in range(n_cols):
                    t = site_type(h_bits[i], sp_bits[i],
                                  1 - h_bits[i - 1], 1 - s_bits[i])
                    if t is None:
                        wrow = 0.0
                        break
                    wrow *= weight[t]
                acc += wrow
            T[sp, s] = acc
    return complex(np.trace(np.linalg.matrix_power(T, n_rows)))


# ---------------------------------------------------------------------------
# height functions


class HeightField:
    """Heights on dual vertices in integer units of pi/2, with integer
    dual-basis periods (units of pi/2); zero at dual vertex 0."""

    __slots__ = ("dual_map", "h_int", "periods_int")

    def __init__(self, dual_map, h_int, periods_int):
        self.dual_map = dual_map
        self.h_int = h_int
        self.periods_int = periods_int

    def values(self):
        return self.h_int * (np.pi / 2)

    def periods(self):
        return tuple(p * np.pi / 2 for p in self.periods_int)


def height_increment_form(m, arrows):
    """Integer 1-form on dual darts: J[y]/(pi/2)."""
    j = np.zeros(m.n_darts, dtype=np.int64)
    for e in range(m.n_edges):
        a = int(arrows[e])
        j[a] = 1
        j[int(m.alpha[a])] = -1
    return j


def height_function(model_or_map, arrows):
    """Height field of an ice configuration.

    Exact integer arithmetic: increments +-1 (units pi/2) across each
    edge; closedness around every primal vertex is the ice rule; on the
    torus the periods over the dual homology basis are even integers
    (multiples of pi).
    """
    m = model_or_map.map if isinstance(model_or_map, SixVertexModel) \
        else model_or_map
    for v in range(m.n_vertices):
        pat = tuple(1 if arrows[int(m.edge_of[d])] == d else 0
                    for d in m.vertices[v])
        if sum(pat) != 2:
            raise InvalidIce(f"vertex {v} violates the ice rule")
    j = height_increment_form(m, arrows)
    dm = m.dual()
    # closedness: the sum over every dual face (primal vertex) vanishes
    for f in range(dm.n_faces):
        if sum(int(j[y]) for y in dm.faces[f]):
            raise InvalidIce("height form is not closed")
    h = np.full(dm.n_vertices, None, dtype=object)
    h[0] = 0
    stack = [0]
    while stack:
        u = stack.pop()
        for y in dm.vertices[u]:
            w = dm.head(y)
            if h[w] is None:
                h[w] = h[u] + int(j[y])
                stack.append(w)
    h = h.astype(np.int64)
    per = (0, 0)
    if m.surface == "torus":
        basis = dm.homology_basis()
        per = (int(sum(j[y] for y in basis.cycle_a)),
               int(sum(j[y] for y in basis.cycle_b)))
    return HeightField(dm, h, per)


def dual_path_height_integral(m, arrows, dual_walk):
    """Integer sum of J/(pi/2) along a dual walk."""
    j = height_increment_form(m, arrows)
    return int(sum(j[y] for y in dual_walk))


# ---------------------------------------------------------------------------
# Baxter oriented-loop measure (grid torus, self-dual point)


def baxter_spin_parameter(q):
    if not 0 < q < 4:
        raise QOutOfRange("Baxter measure needs 0 < q < 4")
    return float(np.arccos(np.sqrt(q) / 2) / (2 * np.pi))


class BaxterEnsemble:
    """Oriented-loop ensemble at the self-dual point of FK with cluster
    fugacity q on a grid torus.

    Per FK configuration and per loop, the two orientations carry weights
    exp(-+ 2 pi i s t(L)) with t the turning number; orientation sums are
    2 cos(2 pi s) = sqrt(q) for contractible loops and 2 for
    non-contractible ones.
    """

    __slots__ = ("map", "q", "s", "fk", "configs", "gases")

    def __init__(self, m, q):
        self.map = m
        self.q = float(q)
        self.s = baxter_spin_parameter(q)
        self.fk = FKModel(m, q, np.sqrt(q))
        self.configs = list(all_configs(m))
        self.gases = [loop_representation(m, cfg) for cfg in self.configs]

    def loop_orientation_weights(self, gas, i):
        """(weight of canonical orientation, weight of reversal)."""
        t = gas.turning_number(i)
        w = np.exp(-2j * np.pi * self.s * t)
        return w, np.conj(w)

    def orientation_sum(self, gas):
        total = 1.0 + 0.0j
        for i in range(gas.n_loops):
            w, wbar = self.loop_orientation_weights(gas, i)
            total *= w + wbar
        return total

    def fk_side_weight(self, gas):
        """sqrt(q) per contractible loop, 2 per non-contractible loop
        (the latter is the orientation sum at winding 0; the paper's
        density statement drops this factor)."""
        rq = np.sqrt(self.q)
        val = 1.0
        for i in range(gas.n_loops):
            val *= rq if gas.is_contractible(i) else 2.0
        return val


def quad_vertices(m, dm, dd):
    """quad_vertex[e] = the diamond-dual vertex of the quad of edge e.

    The quad of edge e = {d, alpha d} is the diamond face whose sides are
    the corners {d, phi d, alpha d, phi(alpha d)}; located by matching
    corner sets, then mapped to its vertex in the dual of the diamond.
    """
    by_corners = {}
    for f in range(dm.n_faces):
        corners = frozenset(int(y) // 2 for y in dm.faces[f])
        by_corners[corners] = f
    out = np.empty(m.n_edges, dtype=np.int64)
    for e in range(m.n_edges):
        d = int(m.edge_dart[e])
        a = int(m.alpha[d])
        key = frozenset((d, int(m.phi[d]), a, int(m.phi[a])))
        f = by_corners[key]
        out[e] = int(dd.vertex_of[dm.alpha[dm.faces[f][0]]])
    return out


def oriented_loops_to_arrows(m, dm, dd, quad_vertex, gas, orientation):
    """6V arrows on the dual of the diamond induced by oriented loops.

    orientation[i] = +1 traverses loop i as stored, -1 reversed.  The
    arrow through corner x is the diamond-dual dart (2x or 2x+1) based at
    the quad vertex the strand leaves.
    """
    arrows = {}
    for i, loop in enumerate(gas.loops):
        steps = loop if orientation[i] > 0 else [
            (to, frm, kind, e, -t, -c)
            for frm, to, kind, e, t, c in reversed(loop)]
        k = len(steps)
        for idx in range(k):
            frm, to, kind, e_out, _, _ = steps[idx]
            e_in = steps[idx - 1][3]
            x = frm
            qv_in = int(quad_vertex[e_in])
            if int(dd.vertex_of[2 * x]) == qv_in:
                arrows[x] = 2 * x
            elif int(dd.vertex_of[2 * x + 1]) == qv_in:
                arrows[x] = 2 * x + 1
            else:
                raise NotPlanar("corner not adjacent to arriving quad")
    # medial vertices = corners = primal darts; diamond edge of corner x
    # is the dart pair {2x, 2x+1}, which is also an edge of the dual map.
    return arrows


def baxter_6v_model(m, q):
    """The 6V projection target: model on the dual of the diamond with
    a = b = 1, c = 2 cos(pi s); c^2 = 2 + sqrt(q)."""
    s = baxter_spin_parameter(q)
    dm = diamond(m)
    dd = dm.dual()
    return SixVertexModel(dd, 1.0, 1.0, 2 * np.cos(np.pi * s)), dm, dd


def baxter_projection_checks(m, q):
    """Config-by-config checks of both projections of the Baxter measure.

    Returns (fk_max_dev, sixv_max_dev):
    * fk: orientation sum = sqrt(q)^{#contractible} 2^{#non-contractible};
    * 6v: summing oriented weights over loop configs mapping to the same
      arrow configuration reproduces the 6V weights with
      a = b = 1, c = 2 cos(pi s).
    """
    ens = BaxterEnsemble(m, q)
    model6v, dm, dd = baxter_6v_model(m, q)
    quad_vertex = quad_vertices(m, dm, dd)
    fk_dev = 0.0
    by_arrows = {}
    for cfg, gas in zip(ens.configs, ens.gases):
        osum = ens.orientation_sum(gas)
        fk_dev = max(fk_dev, abs(osum - ens.fk_side_weight(gas)))
        for orient in itertools.product((1, -1), repeat=gas.n_loops):
            wt = 1.0 + 0.0j
            for i in range(gas.n_loops):
                w, wbar = ens.loop_orientation_weights(gas, i)
                wt *= w if orient[i] > 0 else wbar
            arrows = oriented_loops_to_arrows(m, dm, dd, quad_vertex,
                                              gas, orient)
            key = tuple(sorted(arrows.values()))
            by_arrows[key] = by_arrows.get(key, 0.0 + 0.0j) + wt
    sixv_dev = 0.0
    for key, total in by_arrows.items():
        arrow_by_edge = np.empty(dd.n_edges, dtype=np.int64)
        for dart in key:
            arrow_by_edge[int(dd.edge_of[dart])] = dart
        w6 = config_weight(model6v, arrow_by_edge)
        sixv_dev = max(sixv_dev, abs(total - w6))
    return fk_dev, sixv_dev


# ---------------------------------------------------------------------------
# topological observable


def flow_homology_class(m, dm, dd, arrows_by_edge, basis):
    """Class (M, N) of the 6V arrow flow on the diamond dual, measured
    against the primal basis via height periods.

    The diamond paths v -> face(d) -> v' tracing the primal basis cycles
    stay in the classes of A and B; J-periods over them are pi/2 times
    the intersection numbers with the flow.
    """
    j = np.zeros(dd.n_darts, dtype=np.int64)
    for e in range(dd.n_edges):
        a = int(arrows_by_edge[e])
        j[a] = 1
        j[int(dd.alpha[a])] = -1
    # J lives on darts of dual(dd) = dm; integrate along diamond walks
    def diamond_walk(cycle):
        walk = []
        for d in cycle:
            walk.append(2 * d)                       # tail(d) -> face(d)
            walk.append(2 * int(m.phi[d]) + 1)       # face(d) -> head(d)
        return walk
    per_a = sum(int(j[y]) for y in diamond_walk(basis.cycle_a))
    per_b = sum(int(j[y]) for y in diamond_walk(basis.cycle_b))
    # (M, N) with flow ~ M A + N B: i(A, flow) = N, i(B, flow) = -M
    return -per_b, per_a


def topological_observable(m, q, alpha_t, beta_t):
    """(lhs, rhs) of the loop/height topological identity on a grid torus.

    lhs: under the self-dual random-cluster loop measure,
         E[ prod over non-contractible loop classes (m, n):
            (2 cos(m alpha_t + n beta_t) / sqrt q)^{2k} ] normalized by
         the same expression at (0, 0);
    rhs: under the Baxter 6V projection (a = b = 1, c^2 = 2 + sqrt q),
         E[ exp(i (M alpha_t + N beta_t)) ] with (M, N) the arrow-flow
         homology class.

    alpha_t, beta_t are the periods of the continuum form over the basis
    cycles; the paper's parametrization is alpha_t = alpha,
    beta_t = beta * Im tau with the lattice aspect ratio tau.
    """
    ens = BaxterEnsemble(m, q)
    basis = m.homology_basis()
    rq = np.sqrt(q)
    num = den = 0.0
    for gas in ens.gases:
        w = rq ** gas.n_loops        # self-dual loop weight
        fac = fac0 = 1.0
        for i in range(gas.n_loops):
            if gas.is_contractible(i, basis):
                continue
            mm, nn = gas.homology_class(i, basis)
            fac *= 2 * np.cos(mm * alpha_t + nn * beta_t) / rq
            fac0 *= 2.0 / rq
        num += w * fac
        den += w * fac0
    lhs = num / den
    model6v, dm, dd = baxter_6v_model(m, q)
    znum = zden = 0.0 + 0.0j
    for arrows in enumerate_6v(dd):
        w6 = config_weight(model6v, arrows)
        M, N = flow_homology_class(m, dm, dd, arrows, basis)
        znum += w6 * np.exp(1j * (M * alpha_t + N * beta_t))
        zden += w6
    rhs = znum / zden
    return float(lhs), complex(rhs)


# ---------------------------------------------------------------------------
# dimers, Kasteleyn, the free-fermion bridge


GRID_DIRS = {0: (1, 0), 1: (0, 1), 2: (-1, 0), 3: (0, -1)}


def medial_edge_class(m, medial_dart):
    """Diagonal class of a medial edge of a grid map: "sw-ne" or "se-nw".

    Uses the dart-local displacement (no wrap issues): the medial edge
    along face(d) joins the midpoints of edge(d) and edge(phi(d))."""
    d = medial_dart // 2
    delta = np.array(GRID_DIRS[d % 4]) + np.array(GRID_DIRS[int(m.phi[d]) % 4])
    if delta[0] * delta[1] > 0:
        return "sw-ne"
    if delta[0] * delta[1] < 0:
        return "se-nw"
    raise NotPlanar("degenerate medial edge direction")


def perfect_matchings(g):
    """All perfect matchings of a map, as frozensets of edge indices."""
    n = g.n_vertices
    adj = [[] for _ in range(n)]
    for e in range(g.n_edges):
        d = int(g.edge_dart[e])
        adj[g.tail(d)].append((e, g.head(d)))
    out = []

    def extend(covered, used):
        free = [v for v in range(n) if v not in covered]
        if not free:
            out.append(frozenset(used))
            return
        v = free[0]
        for e, w in adj[v]:
            if w not in covered and w != v:
                extend(covered | {v, w}, used | {e})
        # edges stored from tail only; also scan edges arriving at v
        for e in range(g.n_edges):
            d = int(g.edge_dart[e])
            if g.head(d) == v and g.tail(d) not in covered and g.tail(d) != v:
                if e not in used:
                    extend(covered | {v, g.tail(d)}, used | {e})

    extend(frozenset(), frozenset())
    return sorted(set(out), key=sorted)


def matching_sum(g, weights):
    return sum(float(np.prod([weights[e] for e in mm]))
               for mm in perfect_matchings(g))


def bipartition(g):
    """2-coloring of the vertices; NotBipartite if none exists."""
    color = {0: 0}
    stack = [0]
    while stack:
        v = stack.pop()
        for d in g.vertices[v]:
            w = g.head(d)
            if w not in color:
                color[w] = 1 - color[v]
                stack.append(w)
            elif color[w] == color[v]:
                raise NotBipartite("odd cycle found")
    black = [v for v in range(g.n_vertices) if color[v] == 0]
    white = [v for v in range(g.n_vertices) if color[v] == 1]
    return black, white


def kasteleyn_orientation(g):
    """Edge orientation (chosen dart per edge) with an odd number of
    clockwise boundary edges around every face except a root face.

    Sphere maps only (the root face plays the outer face)."""
    if g.surface != "sphere":
        raise NotPlanar("Kasteleyn orientation implemented for sphere maps")
    tree, cotree, leftover = g.tree_cotree()
    assert not leftover
    orient = {}
    for e in tree:
        orient[e] = int(g.edge_dart[e])
    # peel the dual tree from the leaves towards the root face (face of
    # dart 0): each face fixes its single undetermined (cotree) edge.
    root = int(g.face_of[0])
    children = {f: [] for f in range(g.n_faces)}
    order = []
    seen = {root}
    stack = [root]
    dualg = g.dual()
    while stack:
        f = stack.pop()
        order.append(f)
        for y in g.faces[f]:
            e = int(g.edge_of[y])
            if e not in cotree:
                continue
            nxt = int(g.face_of[g.alpha[y]])
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    for f in reversed(order):
        if f == root:
            continue
        undecided = None
        clockwise = 0
        for y in g.faces[f]:
            e = int(g.edge_of[y])
            if e in orient:
                if orient[e] == int(g.alpha[y]):
                    clockwise += 1
            elif undecided is None:
                undecided = (e, y)
            else:
                undecided = "many"
        if undecided is None:
            if clockwise % 2 == 0:
                raise NotPlanar("Kasteleyn peeling failed")
            continue
        if undecided == "many":
            raise NotPlanar("Kasteleyn peeling order invalid")
        e, y = undecided
        # orient the edge clockwise on f iff the count is currently even
        orient[e] = int(g.alpha[y]) if clockwise % 2 == 0 else int(y)
    return orient


def kasteleyn_matrix(g, weights):
    """Signed bipartite adjacency; |det| = weighted matching sum."""
    black, white = bipartition(g)
    if len(black) != len(white):
        raise NotBipartite("unbalanced bipartition has no matchings")
    orient = kasteleyn_orientation(g)
    bidx = {v: i for i, v in enumerate(black)}
    widx = {v: i for i, v in enumerate(white)}
    K = np.zeros((len(black), len(white)))
    for e in range(g.n_edges):
        d = orient[e]
        t, h = g.tail(d), g.head(d)
        if t in bidx:
            K[bidx[t], widx[h]] += weights[e]
        else:
            K[bidx[h], widx[t]] -= weights[e]
    return K


def kasteleyn_partition(g, weights):
    """|det K|; requires a bipartite sphere map."""
    return abs(float(np.linalg.det(kasteleyn_matrix(g, weights))))


# -- the 6V <-> dimer correspondence on grid medials ------------------------


def grid_medial(m):
    """Medial map of a grid map, with bipartite classes (horizontal edge
    midpoints = black, vertical = white) and diagonal weight classes."""
    dg = medial(m)
    # medial vertex = edge of m; black iff horizontal
    black = [e for e in range(m.n_edges)
             if int(m.edge_dart[e]) % 4 in (0, 2)]
    return dg, black


def dimer_weights(m, dg, theta):
    """cos(theta) on sw-ne medial edges, sin(theta) on se-nw."""
    w = np.empty(dg.n_edges, dtype=float)
    for e in range(dg.n_edges):
        dart = int(dg.edge_dart[e])
        w[e] = (np.cos(theta) if medial_edge_class(m, dart) == "sw-ne"
                else np.sin(theta))
    return w


def _medial_midpoint_displacement(m, medial_dart):
    d = medial_dart // 2
    start = 0.5 * np.array(GRID_DIRS[d % 4])
    end = (np.array(GRID_DIRS[d % 4])
           + 0.5 * np.array(GRID_DIRS[int(m.phi[d]) % 4]))
    return start, end, d


def dimer_to_6v(m, dg, matching):
    """Arrows of the 6V configuration corresponding to a perfect matching
    of the grid medial.

    For a matched medial edge joining the midpoints b (horizontal edge of
    m) and w (vertical edge), the arrow through b points with the b -> w
    displacement and the arrow through w against the w -> b displacement.
    """
    arrows = np.full(m.n_edges, -1, dtype=np.int64)
    for me in matching:
        dart = int(dg.edge_dart[me])
        d = dart // 2                      # boundary dart of m
        e1 = int(m.edge_of[d])             # midpoint 1: edge of d
        e2 = int(m.edge_of[m.phi[d]])      # midpoint 2: edge of phi(d)
        start, end, _ = _medial_midpoint_displacement(m, dart)
        delta = end - start                # from mid(e1) to mid(e2)
        for e, sign in ((e1, +1), (e2, -1)):
            horizontal = int(m.edge_dart[e]) % 4 in (0, 2)
            if horizontal:
                # black: arrow points along the dimer (b -> w)
                point_east = sign * delta[0] > 0
                want = 0 if point_east else 2
            else:
                # white: arrow points against the dimer (w -> b)
                point_north = -(sign * delta[1]) > 0
                want = 1 if point_north else 3
            ref = int(m.edge_dart[e])
            arrow = ref if ref % 4 == want else int(m.alpha[ref])
            if arrow % 4 != want:
                raise NotPerfectMatching("dart direction bookkeeping failed")
            if arrows[e] >= 0 and arrows[e] != arrow:
                raise NotPerfectMatching(
                    "matching induces conflicting arrows")
            arrows[e] = arrow
    if np.any(arrows < 0):
        raise NotPerfectMatching("matching does not cover every edge")
    return arrows


def sixv_dimer_partition_check(m, theta):
    """(Z_dimer(theta), Z_6V(cos theta, sin theta, 1)) on a grid map;
    equal because the two preimages of each type-5/6 vertex carry weights
    summing to cos^2 + sin^2 = 1 = c."""
    dg, black = grid_medial(m)
    w = dimer_weights(m, dg, theta)
    z_dimer = 0.0
    for mm in perfect_matchings(dg):
        arrows = dimer_to_6v(m, dg, mm)
        for v in range(m.n_vertices):   # validity check: ice rule holds
            _ = vertex_type(SixVertexModel(m, 1, 1, 1), arrows, v)
        z_dimer += float(np.prod([w[e] for e in mm]))
    model = SixVertexModel(m, np.cos(theta), np.sin(theta), 1.0)
    z_6v = partition_6v(model).real
    return z_dimer, z_6v


def sixv_defect_sectors(m, theta, edge_b, edge_w):
    """Partition sums of the 6V model with edges b, w split into
    half-edges, resolved by magnetic charge sector.

    A split edge whose halves both point away from its midpoint (into
    their endpoint vertices) carries charge +1/2; both pointing towards
    the midpoint (out of the vertices) carries -1/2; one of each is the
    chargeless sector (an ordinary through-arrow).  Half orientations are
    summed over whenever the ice rule leaves them free.  Returns a dict
    {(charge_b, charge_w): sum} with charges in units of 1/2.
    """
    model = SixVertexModel(m, np.cos(theta), np.sin(theta), 1.0)
    defect = (edge_b, edge_w)
    free_edges = [e for e in range(m.n_edges) if e not in defect]
    half_darts = []
    for e in defect:
        d = int(m.edge_dart[e])
        half_darts.extend([d, int(m.alpha[d])])
    sectors = {}
    for bits in itertools.product((0, 1), repeat=len(free_edges)):
        arrows = {}
        for e, bit in zip(free_edges, bits):
            ref = int(m.edge_dart[e])
            arrows[e] = ref if bit == 0 else int(m.alpha[ref])
        # out-ness per half dart d: 1 if the half at tail(d) points out
        for half_bits in itertools.product((0, 1), repeat=len(half_darts)):
            half_out = dict(zip(half_darts, half_bits))
            weight = 1.0
            ok = True
            for v in range(m.n_vertices):
                pat = []
                for d in m.vertices[v]:
                    e = int(m.edge_of[d])
                    if e in defect:
                        pat.append(half_out[d])
                    else:
                        pat.append(1 if arrows[e] == d else 0)
                t = TYPE_TABLE.get(tuple(pat))
                if t is None:
                    ok = False
                    break
                weight *= model.type_weight(t).real
            if not ok:
                continue
            charges = []
            for e in defect:
                d = int(m.edge_dart[e])
                o1, o2 = half_out[d], half_out[int(m.alpha[d])]
                # both halves out of their vertices = towards the midpoint
                charges.append(-1 if o1 and o2 else 1 if not (o1 or o2)
                               else 0)
            key = tuple(charges)
            sectors[key] = sectors.get(key, 0.0) + weight
    return sectors


def monomer_defect_check(m, theta, black_vertex, white_vertex):
    """Monomer pair on the grid medial vs the 6V edge-defect sector.

    ``black_vertex`` / ``white_vertex`` are medial vertices (= edges of
    the grid map) on opposite colour classes.  Returns
    (dimer monomer sum, 6V sum over the charge -+1/2 sectors at (b, w)),
    which agree exactly for weights (cos theta : sin theta : 1).
    """
    dg, black = grid_medial(m)
    wts = dimer_weights(m, dg, theta)
    if (black_vertex in black) == (white_vertex in black):
        raise NotBipartite("defects must sit on opposite colour classes")
    n = dg.n_vertices
    keep = [v for v in range(n) if v not in (black_vertex, white_vertex)]
    total_dimer = 0.0
    for mm in _near_matchings(dg, set(keep)):
        total_dimer += float(np.prod([wts[e] for e in mm]))
    sectors = sixv_defect_sectors(m, theta, black_vertex, white_vertex)
    # the mirror sector (+1/2, -1/2) carries the same sum by reversal
    return total_dimer, sectors.get((-1, 1), 0.0)


def _near_matchings(g, cover_set):
    """Matchings covering exactly ``cover_set`` (each vertex once)."""
    out = []
    ends = [(g.tail(int(g.edge_dart[e])), g.head(int(g.edge_dart[e])))
            for e in range(g.n_edges)]

    def extend(covered, used):
        remaining = [v for v in sorted(cover_set) if v not in covered]
        if not remaining:
            out.append(frozenset(used))
            return
        v = remaining[0]
        for e, (t, h) in enumerate(ends):
            if e in used:
                continue
            if t == v and h in cover_set and h not in covered and h != v:
                extend(covered | {t, h}, used | {e})
            elif h == v and t in cover_set and t not in covered and t != v:
                extend(covered | {t, h}, used | {e})

    extend(set(), frozenset())
    return sorted(set(out), key=sorted)
