"""Fortuin-Kasteleyn percolation: exact weights, Potts equivalence,
planar duality, the medial loop representation, Edwards-Sokal coupling,
and winding observables.

Loop bookkeeping: medial vertices are identified with primal darts
(dart d <-> the corner (tail d, face d)).  The quad of edge e = {d, a(d)}
has corner darts {d, phi(d), a(d), phi(a(d))}; an open edge contributes
the two face-corner arcs (d, phi d) and (a d, phi(a d)), a closed edge the
two vertex-corner arcs (d, phi(a d)) and (phi d, a d).  Turn and crossing
signs are stored per canonical arc; they are globally consistent (loop
turning +-1 <=> contractible, crossing totals = intersection numbers up
to one overall orientation), which is all the identities below use.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DomainError,
    NotInteger,
    PathInvalid,
    TooLarge,
    ZeroWeightEdge,
)
from .groups import FiniteAbelianGroup
from .spin import SpinModel, partition_function

ENUM_CAP = 2 ** 24


class FKModel:
    """Random-cluster model: map, cluster fugacity q > 0, edge weights."""

    __slots__ = ("map", "q", "weights")

    def __init__(self, m, q, weights):
        if q <= 0:
            raise DomainError("q must be positive")
        w = np.asarray(weights, dtype=float)
        if w.shape == ():
            w = np.full(m.n_edges, float(w))
        if w.shape != (m.n_edges,) or np.any(w < 0):
            raise DomainError("need one weight >= 0 per edge")
        self.map = m
        self.q = float(q)
        self.weights = w


class UnionFind:
    """Disjoint sets over 0..n-1 with path compression."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.count = n

    def find(self, i):
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)
            self.count -= 1


def cluster_count(m, open_edges):
    """Number of connected components of (V, open edges), via union-find."""
    uf = UnionFind(m.n_vertices)
    for e in open_edges:
        d = int(m.edge_dart[e])
        uf.union(m.tail(d), m.head(d))
    return uf.count


def cluster_count_dfs(m, open_edges):
    """Independent depth-first count (cross-check oracle)."""
    adj = {v: [] for v in range(m.n_vertices)}
    for e in open_edges:
        d = int(m.edge_dart[e])
        adj[m.tail(d)].append(m.head(d))
        adj[m.head(d)].append(m.tail(d))
    seen = set()
    comps = 0
    for v in range(m.n_vertices):
        if v in seen:
            continue
        comps += 1
        stack = [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    return comps


def components(m, open_edges):
    """Vertex partition of (V, open edges) as a root array."""
    uf = UnionFind(m.n_vertices)
    for e in open_edges:
        d = int(m.edge_dart[e])
        uf.union(m.tail(d), m.head(d))
    return np.array([uf.find(v) for v in range(m.n_vertices)])


def all_configs(m):
    """Iterator over all edge subsets as boolean arrays (2^E of them)."""
    E = m.n_edges
    if 2 ** E > ENUM_CAP:
        raise TooLarge(f"2^{E} configurations exceed the cap")
    for mask in range(2 ** E):
        yield np.array([(mask >> e) & 1 for e in range(E)], dtype=bool)


def fk_weight(model, config):
    """q^{#clusters} prod_{open} w(e)."""
    open_edges = [e for e in range(model.map.n_edges) if config[e]]
    c = cluster_count(model.map, open_edges)
    return model.q ** c * float(np.prod(model.weights[config]))


def fk_partition(model):
    return sum(fk_weight(model, cfg) for cfg in all_configs(model.map))


def fk_probability(model, event):
    """P(event) under the random-cluster measure; event maps a boolean
    config array to bool."""
    num = den = 0.0
    for cfg in all_configs(model.map):
        w = fk_weight(model, cfg)
        den += w
        if event(cfg):
            num += w
    return num / den


def potts_spin_model(model):
    """The q-state Potts spin model matched to the FK weights:
    edge table 1 + w(e) delta_0, so Z_potts = Z_fk exactly."""
    q = int(round(model.q))
    if abs(model.q - q) > 1e-12 or q < 2:
        raise NotInteger("Potts correspondence needs integer q >= 2")
    grp = FiniteAbelianGroup(q)
    tables = []
    for w in model.weights:
        t = np.ones(q, dtype=complex)
        t[0] += w
        tables.append(t)
    return SpinModel(model.map, grp, tables)


def potts_fk_identity(model):
    """(Z_potts, Z_fk, ratio); the two agree exactly."""
    zp = partition_function(potts_spin_model(model)).real
    zf = fk_partition(model)
    return zp, zf, zp / zf


def connectivity(model, v1, v2):
    """P(v1 <-> v2) under the random-cluster measure."""
    m = model.map
    num = den = 0.0
    for cfg in all_configs(m):
        w = fk_weight(model, cfg)
        den += w
        roots = components(m, [e for e in range(m.n_edges) if cfg[e]])
        if roots[v1] == roots[v2]:
            num += w
    return num / den


def spin_identity_check(model, v1, v2):
    """The two Potts-FK identities by double enumeration.

    Returns ((corr, p), (cov, scaled_p)) where corr = <sigma(v2)
    sigma(v1)^-1>_Potts equals p = P(v1 <-> v2), and the covariance of the
    indicator spins equals (q-1)/q^2 * p.
    """
    q = int(round(model.q))
    spin = potts_spin_model(model)
    from .spin import _config_matrix, _edge_weights
    cfg = _config_matrix(spin)
    w = _edge_weights(spin, cfg)
    z = np.sum(w)
    chars = spin.group.character_table()
    corr = complex(np.sum(w * chars[1, cfg[:, v2]]
                          * np.conj(chars[1, cfg[:, v1]])) / z)
    ind1 = (cfg[:, v1] == 0).astype(float)
    ind2 = (cfg[:, v2] == 0).astype(float)
    e12 = np.sum(w * ind1 * ind2) / z
    e1 = np.sum(w * ind1) / z
    e2 = np.sum(w * ind2) / z
    cov = complex(e12 - e1 * e2).real
    p = connectivity(model, v1, v2)
    return (corr.real, p), (cov, (q - 1) / q ** 2 * p)


# ---------------------------------------------------------------------------
# planar duality


def dual_model(model):
    """Dual FK model on the dual map with w(e*) = q / w(e)."""
    if np.any(model.weights == 0):
        raise ZeroWeightEdge("dual weight q/w undefined for w = 0")
    return FKModel(model.map.dual(), model.q, model.q / model.weights)


def dual_config(config):
    """e* open iff e closed."""
    return ~np.asarray(config, dtype=bool)


def duality_weight_check(model, config):
    """Per-configuration duality identity on the sphere:

        q^{C(E0)} prod w = (q^{|V|-|E|-1} prod_E w) q^{C(E0*)} prod (q/w).

    Returns (lhs, rhs).
    """
    dm = dual_model(model)
    lhs = fk_weight(model, config)
    pref = (model.q ** (model.map.n_vertices - model.map.n_edges - 1)
            * float(np.prod(model.weights)))
    rhs = pref * fk_weight(dm, dual_config(config))
    return lhs, rhs


# ---------------------------------------------------------------------------
# loop representation on the medial of the diamond


class LoopGas:
    """Loops of an FK configuration, with per-loop data.

    Each loop is a list of oriented steps
    (corner_from, corner_to, kind, edge, turn, cross) where kind is "f" or
    "v", turn is the signed quarter turn (+1 left), and cross the signed
    crossing of the primal edge (vertex arcs only; +1 when the step
    crosses the reference dart of the edge from its left to its right).
    Corners are primal darts.
    """

    __slots__ = ("map", "loops", "config")

    def __init__(self, m, loops, config):
        self.map = m
        self.loops = loops
        self.config = config

    @property
    def n_loops(self):
        return len(self.loops)

    def loop_corners(self, i):
        return [arc[0] for arc in self.loops[i]]

    def turning_number(self, i):
        """Net quarter turns / 4: +-1 for contractible loops, 0 for
        non-contractible ones (grid-torus medials)."""
        t = sum(step[4] for step in self.loops[i])
        if t % 4:
            raise PathInvalid("turning number not a multiple of 4")
        return t // 4

    def homology_class(self, i, basis=None):
        """(m, n) with loop ~ m A + n B, up to overall sign (fixed by the
        traversal orientation)."""
        m = self.map
        basis = basis or m.homology_basis()
        in_a = {}
        for d in basis.cycle_a:
            in_a[d] = in_a.get(d, 0) + 1
        in_b = {}
        for d in basis.cycle_b:
            in_b[d] = in_b.get(d, 0) + 1
        ia = ib = 0
        for frm, to, kind, edge, turn, cross in self.loops[i]:
            if kind != "v":
                continue
            d = int(m.edge_dart[edge])
            ia += cross * (in_a.get(d, 0) - in_a.get(int(m.alpha[d]), 0))
            ib += cross * (in_b.get(d, 0) - in_b.get(int(m.alpha[d]), 0))
        # loop = m A + n B: i(L, A) = -n, i(L, B) = m
        return ib, -ia

    def is_contractible(self, i, basis=None):
        return self.homology_class(i, basis) == (0, 0)


def loop_representation(model_or_map, config):
    """Loop gas of an FK configuration (paper's E0' construction).

    Canonical arcs per quad of edge e with reference dart d: open edge ->
    face arcs (d, phi d) and (a d, phi(a d)), both left turns; closed edge
    -> vertex arcs (d, phi(a d)) with a right turn and (phi d, a d) with a
    left turn, both crossing the edge from the left of d to its right.
    """
    m = model_or_map.map if isinstance(model_or_map, FKModel) else model_or_map
    phi = m.phi
    arcs = []
    for e in range(m.n_edges):
        d = int(m.edge_dart[e])
        a = int(m.alpha[d])
        if config[e]:
            arcs.append((d, int(phi[d]), "f", e, 1, 0))
            arcs.append((a, int(phi[a]), "f", e, 1, 0))
        else:
            arcs.append((d, int(phi[a]), "v", e, -1, 1))
            arcs.append((int(phi[d]), a, "v", e, 1, 1))
    at_corner = {}
    for i, arc in enumerate(arcs):
        at_corner.setdefault(arc[0], []).append(i)
        at_corner.setdefault(arc[1], []).append(i)
    for corner, ids in at_corner.items():
        if len(ids) != 2:
            raise PathInvalid("loop cover is not 2-regular")
    unused = set(range(len(arcs)))
    loops = []
    while unused:
        start = min(unused)
        loop = []
        arc_id = start
        corner = arcs[arc_id][0]
        while True:
            x, y, kind, e, turn, cross = arcs[arc_id]
            if corner == x:
                loop.append((x, y, kind, e, turn, cross))
                corner = y
            else:
                loop.append((y, x, kind, e, -turn, -cross))
                corner = x
            unused.discard(arc_id)
            ids = at_corner[corner]
            arc_id = ids[0] if ids[1] == arc_id else ids[1]
            if arc_id == start and corner == arcs[start][0]:
                break
        loops.append(loop)
    return LoopGas(m, loops, np.asarray(config, dtype=bool))


def loop_count_identity(model_or_map, config):
    """(n_loops, C(E0), C(E0*), sphere_prediction) where the prediction is
    C(E0) + C(E0*) - 1; exact on the sphere.  On the torus it undercounts
    by one exactly when the configuration has non-contractible loops."""
    m = model_or_map.map if isinstance(model_or_map, FKModel) else model_or_map
    gas = loop_representation(m, config)
    open_edges = [e for e in range(m.n_edges) if config[e]]
    c = cluster_count(m, open_edges)
    dualm = m.dual()
    closed = [e for e in range(m.n_edges) if not config[e]]
    c_dual = cluster_count(dualm, closed)
    return gas.n_loops, c, c_dual, c + c_dual - 1


def loop_weight(model, gas, sqrt_q=None):
    """sqrt(q)^{#loops} prod over arcs of the displayed edge factors
    (w/sqrt q)^{1/4} for face arcs, (w*/sqrt q)^{1/4} for vertex arcs."""
    q = model.q
    rq = np.sqrt(q) if sqrt_q is None else sqrt_q
    val = rq ** gas.n_loops
    for loop in gas.loops:
        for _, _, kind, e, _, _ in loop:
            w = model.weights[e] if kind == "f" else q / model.weights[e]
            val *= (w / rq) ** 0.25
    return val


# ---------------------------------------------------------------------------
# Edwards-Sokal coupling


def edwards_sokal_sample(model, config, rng):
    """Uniform spin per cluster of the FK configuration."""
    q = int(round(model.q))
    if abs(model.q - q) > 1e-12:
        raise NotInteger("Edwards-Sokal needs integer q")
    m = model.map
    roots = components(m, [e for e in range(m.n_edges) if config[e]])
    spins = {}
    out = np.empty(m.n_vertices, dtype=np.int64)
    for v in range(m.n_vertices):
        r = roots[v]
        if r not in spins:
            spins[r] = int(rng.integers(q))
        out[v] = spins[r]
    return out


def es_joint_distribution(model):
    """Exact joint coupling table {(config mask, spin tuple): weight} with
    weight prod_open w(e) 1{spins constant on open edges}.

    Its spin marginal is the Potts distribution and its config marginal is
    the FK distribution, both exactly.
    """
    q = int(round(model.q))
    if abs(model.q - q) > 1e-12:
        raise NotInteger("Edwards-Sokal needs integer q")
    m = model.map
    if q ** m.n_vertices * 2 ** m.n_edges > ENUM_CAP:
        raise TooLarge("joint enumeration too large")
    table = {}
    ends = [(m.tail(int(m.edge_dart[e])), m.head(int(m.edge_dart[e])))
            for e in range(m.n_edges)]
    for mask in range(2 ** m.n_edges):
        wcfg = 1.0
        open_e = []
        for e in range(m.n_edges):
            if (mask >> e) & 1:
                wcfg *= model.weights[e]
                open_e.append(e)
        for s in range(q ** m.n_vertices):
            spins = []
            t = s
            for _ in range(m.n_vertices):
                spins.append(t % q)
                t //= q
            ok = all(spins[ends[e][0]] == spins[ends[e][1]] for e in open_e)
            if ok and wcfg:
                table[(mask, tuple(spins))] = wcfg
    return table


def es_marginal_checks(model):
    """Max deviations of the joint marginals from (Potts, FK) weights."""
    q = int(round(model.q))
    m = model.map
    table = es_joint_distribution(model)
    spin_marg = {}
    cfg_marg = {}
    for (mask, spins), w in table.items():
        spin_marg[spins] = spin_marg.get(spins, 0.0) + w
        cfg_marg[mask] = cfg_marg.get(mask, 0.0) + w
    dev_spin = 0.0
    for spins, w in spin_marg.items():
        potts = 1.0
        for e in range(m.n_edges):
            d = int(m.edge_dart[e])
            if spins[m.tail(d)] == spins[m.head(d)]:
                potts *= 1.0 + model.weights[e]
        dev_spin = max(dev_spin, abs(w - potts))
    dev_cfg = 0.0
    for mask, w in cfg_marg.items():
        cfg = np.array([(mask >> e) & 1 for e in range(m.n_edges)],
                       dtype=bool)
        dev_cfg = max(dev_cfg, abs(w - fk_weight(model, cfg)))
    return dev_spin, dev_cfg


def es_sampler_frequencies(model, n_draws, seed):
    """Empirical spin-configuration frequencies from the two-step sampler
    (FK config by exact weights, then uniform cluster spins)."""
    q = int(round(model.q))
    m = model.map
    configs = list(all_configs(m))
    weights = np.array([fk_weight(model, c) for c in configs])
    probs = weights / weights.sum()
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(configs), size=n_draws, p=probs)
    counts = {}
    for i in draws:
        spins = tuple(edwards_sokal_sample(model, configs[i], rng))
        counts[spins] = counts.get(spins, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# winding (parafermionic) observable


def corner_of(m, v, f):
    """The dart whose corner is (v, f); error if absent or ambiguous."""
    hits = [d for d in m.vertices[v] if int(m.face_of[d]) == f]
    if len(hits) != 1:
        raise PathInvalid(f"corner ({v}, {f}) absent or ambiguous")
    return int(hits[0])


def winding_observable(model, s, mark1, mark2, gamma_dual):
    """< 1{(v1 f1) <-> (v2 f2)} exp(2 i s int_gamma dh) > under the
    random-cluster measure.

    mark1, mark2 are (vertex, face) corners; gamma_dual is a dual-map walk
    from f1 to f2.  The height integral along gamma equals pi times the
    algebraic number of crossings of gamma by any open path v1 -> v2
    (well defined when the marks lie on one loop).  Defined for any real
    s and q > 0; normalized by the full partition function.
    """
    m = model.map
    dualm = m.dual()
    v1, f1 = mark1
    v2, f2 = mark2
    corner_of(m, v1, f1)
    corner_of(m, v2, f2)
    for y, z in zip(gamma_dual, gamma_dual[1:]):
        if dualm.head(y) != dualm.tail(z):
            raise PathInvalid("gamma is not a dual walk")
    gamma_edges = {}
    for y in gamma_dual:
        e = int(m.edge_of[y])
        sign = 1 if int(m.edge_dart[e]) == int(m.alpha[y]) else -1
        gamma_edges[e] = gamma_edges.get(e, 0) + sign
    num = 0.0j
    den = 0.0
    for cfg in all_configs(m):
        w = fk_weight(model, cfg)
        den += w
        open_edges = [e for e in range(m.n_edges) if cfg[e]]
        roots = components(m, open_edges)
        if roots[v1] != roots[v2]:
            continue
        closed = [e for e in range(m.n_edges) if not cfg[e]]
        droots = components(dualm, closed)
        dv1 = int(dualm.vertex_of[m.alpha[m.faces[f1][0]]])
        dv2 = int(dualm.vertex_of[m.alpha[m.faces[f2][0]]])
        if droots[dv1] != droots[dv2]:
            continue
        n_cross = _path_crossings(m, open_edges, v1, v2, gamma_edges)
        num += w * np.exp(2j * s * np.pi * n_cross)
    return num / den


def _path_crossings(m, open_edges, v1, v2, gamma_edges):
    """Algebraic crossings of gamma by a breadth-first open path v1->v2.

    The crossing sign of edge e traversed along its reference dart is the
    stored gamma orientation; traversing against it flips the sign.
    """
    from collections import deque
    prev = {v1: None}
    q = deque([v1])
    open_set = set(open_edges)
    while q:
        v = q.popleft()
        if v == v2:
            break
        for d in m.vertices[v]:
            if int(m.edge_of[d]) not in open_set:
                continue
            w = m.head(d)
            if w not in prev:
                prev[w] = d
                q.append(w)
    if v2 not in prev:
        raise PathInvalid("marked vertices not connected")
    n = 0
    v = v2
    while prev[v] is not None:
        d = prev[v]
        e = int(m.edge_of[d])
        if e in gamma_edges:
            sign = 1 if d == int(m.edge_dart[e]) else -1
            n += sign * gamma_edges[e]
        v = m.tail(d)
    return n
