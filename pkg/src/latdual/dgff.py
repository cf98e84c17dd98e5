"""Discrete Gaussian free field on conductance networks.

Covers the Laplacian/Green kernel with Dirichlet or zero-mean boundary
handling, the discrete Hodge star and decomposition, minimal currents for
magnetic charges, electric-magnetic correlators, instanton lattice sums
with Poisson/T-duality, and the continuum correlator closed forms.

1-forms are stored as length-2E arrays over darts with
``omega[alpha(d)] = -omega[d]``.  Fixed sign conventions (see planar_map):

* ``d0(phi)[d] = phi[head d] - phi[tail d]``,
* ``d1(omega)[f] = sum of omega over the ccw boundary of f``,
* star primal -> dual: ``(*w)[y] = c_e w[y]``; dual -> primal:
  ``(*h)[d] = -h[d]/c_e``; then ** = -Id, both isometric, and
  ``laplacian = d1 (star (d0 .))`` is the positive weighted Laplacian.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    ChargeImbalance,
    CoincidentPoints,
    DomainError,
    SingularSystem,
    TruncationInsufficient,
)

RESIDUAL_TOL = 1e-12


class ConductanceNetwork:
    """Map with positive edge conductances and an optional boundary set."""

    __slots__ = ("map", "conductances", "boundary", "_green")

    def __init__(self, m, conductances, boundary=()):
        c = np.asarray(conductances, dtype=float)
        if c.shape == ():
            c = np.full(m.n_edges, float(c))
        if c.shape != (m.n_edges,) or np.any(c <= 0):
            raise DomainError("need one positive conductance per edge")
        self.map = m
        self.conductances = c
        self.boundary = frozenset(int(v) for v in boundary)
        if any(not 0 <= v < m.n_vertices for v in self.boundary):
            raise DomainError("boundary vertex not in map")
        self._green = None

    def dual(self):
        """Dual network with reciprocal conductances (no boundary)."""
        return ConductanceNetwork(self.map.dual(), 1.0 / self.conductances)

    def edge_c(self, dart):
        return float(self.conductances[self.map.edge_of[dart]])


def laplacian_matrix(network):
    m = network.map
    L = np.zeros((m.n_vertices, m.n_vertices))
    for e in range(m.n_edges):
        d = int(m.edge_dart[e])
        u, v = m.tail(d), m.head(d)
        c = network.conductances[e]
        L[u, u] += c
        L[v, v] += c
        L[u, v] -= c
        L[v, u] -= c
    return L


def laplacian_apply(network, f):
    """(Lap f)(v) = sum_{v'~v} c (f(v) - f(v'))."""
    return laplacian_matrix(network) @ np.asarray(f, dtype=float)


def _solve_checked(a, b):
    """Dense solve with residual verification; never trusted blind."""
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    scale = max(1.0, float(np.max(np.abs(b))))
    if np.max(np.abs(a @ x - b)) > RESIDUAL_TOL * scale:
        raise SingularSystem("solution residual exceeds tolerance")
    return x


def green_kernel(network):
    """Green kernel of the weighted Laplacian.

    With boundary: inverse on free vertices, zero rows/columns on the
    boundary.  Without boundary: zero-mean pseudo-inverse (Green function
    modulo additive constants).  Cached on the network.
    """
    if network._green is not None:
        return network._green
    m = network.map
    n = m.n_vertices
    L = laplacian_matrix(network)
    if network.boundary:
        free = [v for v in range(n) if v not in network.boundary]
        Lff = L[np.ix_(free, free)]
        Gff = _solve_checked(Lff, np.eye(len(free)))
        G = np.zeros((n, n))
        G[np.ix_(free, free)] = Gff
    else:
        # pseudo-inverse with zero row/column means
        P = np.eye(n) - np.ones((n, n)) / n
        G = P @ np.linalg.pinv(L) @ P
        if np.max(np.abs(L @ G - P)) > 1e-10:
            raise SingularSystem("pseudo-inverse residual too large")
    network._green = 0.5 * (G + G.T)
    return network._green


def dirichlet_solve(network, boundary_values):
    """Harmonic extension of prescribed boundary values."""
    if not network.boundary:
        raise SingularSystem("Dirichlet problem needs a nonempty boundary")
    m = network.map
    n = m.n_vertices
    L = laplacian_matrix(network)
    free = [v for v in range(n) if v not in network.boundary]
    bnd = sorted(network.boundary)
    phi = np.zeros(n)
    for v in bnd:
        phi[v] = boundary_values[v]
    rhs = -L[np.ix_(free, bnd)] @ phi[bnd]
    phi[free] = _solve_checked(L[np.ix_(free, free)], rhs)
    return phi


def dirichlet_energy(network, f):
    """(1/2) sum_e c_e (df)^2; equals (1/2) f . Lap f."""
    m = network.map
    f = np.asarray(f, dtype=float)
    tot = 0.0
    for e in range(m.n_edges):
        d = int(m.edge_dart[e])
        tot += network.conductances[e] * (f[m.head(d)] - f[m.tail(d)]) ** 2
    return 0.5 * tot


def characteristic_function(network, boundary_values, points, charges):
    """E exp(i sum a_j phi(v_j)) for the DGFF with Dirichlet data:

        exp(i sum a_j phi0(v_j)) exp(-1/2 sum a_j a_k G(v_j, v_k)).
    """
    g = green_kernel(network)
    phi0 = (dirichlet_solve(network, boundary_values) if network.boundary
            else np.zeros(network.map.n_vertices))
    points = list(points)
    charges = np.asarray(charges, dtype=float)
    mean = float(sum(a * phi0[v] for a, v in zip(charges, points)))
    quad = float(sum(charges[j] * charges[k] * g[points[j], points[k]]
                     for j in range(len(points)) for k in range(len(points))))
    return np.exp(1j * mean) * np.exp(-0.5 * quad)


def sample_field(network, boundary_values, rng, n_samples):
    """Exact Gaussian samples of the field on all vertices (free vertices
    fluctuate, boundary pinned)."""
    m = network.map
    g = green_kernel(network)
    phi0 = (dirichlet_solve(network, boundary_values) if network.boundary
            else np.zeros(m.n_vertices))
    # covariance is g (PSD); use eigen square root for the singular rows
    w, u = np.linalg.eigh(g)
    w = np.clip(w, 0.0, None)
    half = u * np.sqrt(w)
    z = rng.standard_normal((n_samples, m.n_vertices))
    return phi0 + z @ half.T


# ---------------------------------------------------------------------------
# forms and Hodge theory


def form_from_edge_values(m, edge_values):
    """Antisymmetric dart array from one value per edge (measured along
    the reference dart)."""
    omega = np.zeros(m.n_darts)
    for e in range(m.n_edges):
        d = int(m.edge_dart[e])
        omega[d] = edge_values[e]
        omega[int(m.alpha[d])] = -edge_values[e]
    return omega


def assert_antisymmetric(m, omega, tol=1e-12):
    if np.max(np.abs(omega[m.alpha] + omega)) > tol:
        raise DomainError("1-form is not antisymmetric")


def d0(m, phi):
    """Exterior derivative of a vertex function: dphi[d] = phi(head)-phi(tail)."""
    phi = np.asarray(phi, dtype=float)
    return phi[m.vertex_of[m.alpha]] - phi[m.vertex_of[np.arange(m.n_darts)]]


def d1(m, omega):
    """Face sums over counterclockwise boundaries."""
    out = np.zeros(m.n_faces)
    for f in range(m.n_faces):
        out[f] = sum(omega[d] for d in m.faces[f])
    return out


def divergence(network, omega):
    """Weighted divergence: (div omega)(v) = sum_{d out of v} c_d omega[d]."""
    m = network.map
    out = np.zeros(m.n_vertices)
    for d in range(m.n_darts):
        out[m.vertex_of[d]] += network.edge_c(d) * omega[d]
    return out


def hodge_star(network, omega, direction):
    """Discrete Hodge star.

    direction "primal_to_dual": (*w)[y] = c_e w[y] (the dual dart y
    crosses the primal dart y from right to left).
    direction "dual_to_primal": (*h)[d] = -h[d] / c_e.
    The composite is -Id and both directions are isometric.
    """
    m = network.map
    c = network.conductances[m.edge_of[np.arange(m.n_darts)]]
    if direction == "primal_to_dual":
        return c * omega
    if direction == "dual_to_primal":
        return -omega / c
    raise ValueError("direction must be primal_to_dual or dual_to_primal")


def form_inner(network, a, b, dual=False):
    """<a, b> = sum_e c_e a_e b_e (or 1/c_e on the dual network)."""
    m = network.map
    tot = 0.0
    for e in range(m.n_edges):
        d = int(m.edge_dart[e])
        c = network.conductances[e]
        tot += (a[d] * b[d]) * (1.0 / c if dual else c)
    return float(tot)


def hodge_decompose(network, omega):
    """Orthogonal splitting J = d(phi) + *d(psi) + harmonic.

    phi lives on primal vertices, psi on dual vertices; the harmonic part
    vanishes on the sphere and is 2-dimensional on the torus.
    Returns (exact, coexact, harmonic) dart arrays.
    """
    m = network.map
    assert_antisymmetric(m, omega)
    # exact part: least squares over potentials gives Lap phi = -div omega
    # (div(d phi) = -Lap phi with the positive Laplacian convention)
    L = laplacian_matrix(network)
    rhs = -divergence(network, omega)
    n = m.n_vertices
    P = np.eye(n) - np.ones((n, n)) / n
    phi = P @ np.linalg.pinv(L) @ (rhs - rhs.mean())
    exact = d0(m, phi)
    # coexact part: psi on dual vertices solves Lap_dual psi = -d1(omega)
    # (ccw face sums of omega, re-indexed to dual vertices; the sign comes
    # from the least-squares normal equations with the star convention)
    dual_net = network.dual()
    dm = dual_net.map
    Ld = laplacian_matrix(dual_net)
    face_sums = -d1(m, omega)
    rhs_d = np.zeros(dm.n_vertices)
    for f in range(m.n_faces):
        rhs_d[dm.vertex_of[m.alpha[m.faces[f][0]]]] = face_sums[f]
    nd = dm.n_vertices
    Pd = np.eye(nd) - np.ones((nd, nd)) / nd
    psi = Pd @ np.linalg.pinv(Ld) @ (rhs_d - rhs_d.mean())
    dpsi = np.zeros(m.n_darts)
    for y in range(m.n_darts):
        dpsi[y] = psi[dm.vertex_of[m.alpha[y]]] - psi[dm.vertex_of[y]]
    # note dual-map tail of dart y is the orbit of sigma_dual containing y
    coexact = hodge_star(network, dpsi, "dual_to_primal")
    harmonic = omega - exact - coexact
    return exact, coexact, harmonic


def harmonic_basis(network):
    """Closed harmonic 1-forms (w1, w2) on a torus network with periods
    (int_A, int_B) = (1, 0) and (0, 1), plus their Gram matrix in the
    Dirichlet inner product."""
    m = network.map
    basis = m.homology_basis()
    tree, cotree, leftover = m.tree_cotree()
    dualm = m.dual()
    dual_cycles = [dualm.fundamental_cycle(e, cotree) for e in leftover]
    # closed primal forms from crossings with the dual cycles
    forms = []
    for dc in dual_cycles:
        j = np.zeros(m.n_darts)
        for y in dc:
            j[y] += 1.0
            j[int(m.alpha[y])] -= 1.0
        forms.append(j)
    periods = np.array(
        [[sum(f[d] for d in cyc) for cyc in (basis.cycle_a, basis.cycle_b)]
         for f in forms])
    if abs(round(np.linalg.det(periods))) != 1:
        raise SingularSystem("dual cycles do not span homology")
    target = np.linalg.solve(periods.T, np.eye(2)).T  # rows: coefficients
    combos = [target[0, 0] * forms[0] + target[0, 1] * forms[1],
              target[1, 0] * forms[0] + target[1, 1] * forms[1]]
    out = []
    for j in combos:
        exact, coexact, harmonic = hodge_decompose(network, j)
        # a closed form has no coexact part; drop the exact part only
        out.append(j - exact)
    w1, w2 = out
    gram = np.array([[form_inner(network, a, b) for b in out] for a in out])
    return w1, w2, gram


def periods(m, omega, basis=None):
    """(int_A omega, int_B omega) over the homology basis."""
    basis = basis or m.homology_basis()
    return (float(sum(omega[d] for d in basis.cycle_a)),
            float(sum(omega[d] for d in basis.cycle_b)))


def dual_harmonic_basis(network):
    """Harmonic forms on the dual network with unit periods over dual
    cycles homologous to the *primal* basis cycles A, B.

    Needed whenever primal and dual forms are paired (bilinear relation,
    T-duality): the dual map's own tree-cotree basis generally represents
    different homology classes.
    """
    m = network.map
    basis = m.homology_basis()
    dual_net = network.dual()
    dm = dual_net.map
    dtree, dcotree, dleft = dm.tree_cotree()
    dual_cycles = [dm.fundamental_cycle(e, dtree) for e in dleft]
    # classes of the dual cycles in the primal (A, B) basis: for
    # D = xA + yB, i(A, D) = y and i(B, D) = -x with A.B = +1.
    cls = np.array(
        [[-m.cross_count(basis.cycle_b, dc),
          m.cross_count(basis.cycle_a, dc)] for dc in dual_cycles],
        dtype=float)
    if abs(round(np.linalg.det(cls))) != 1:
        raise SingularSystem("dual tree-cotree cycles do not span homology")
    # coefficients expressing [A], [B] as integer combos of the dual cycles
    combo = np.linalg.solve(cls.T, np.eye(2))     # columns: [A], [B]
    # closed dual forms built from the primal basis cycles
    forms = []
    for cyc in (basis.cycle_a, basis.cycle_b):
        j = np.zeros(m.n_darts)
        for d in cyc:
            j[d] += 1.0
            j[int(m.alpha[d])] -= 1.0
        forms.append(j)
    raw = np.array([[sum(f[y] for y in dc) for dc in dual_cycles]
                    for f in forms])              # raw[f, i] = int_{D_i} f
    per = raw @ combo                             # periods over [A], [B]
    target = np.linalg.solve(per.T, np.eye(2)).T
    out = []
    for row in target:
        j = row[0] * forms[0] + row[1] * forms[1]
        exact, _, _ = hodge_decompose(dual_net, j)
        out.append(j - exact)
    w1, w2 = out
    gram = np.array([[form_inner(dual_net, a, b) for b in out] for a in out])
    return w1, w2, gram


def bilinear_pairing(network, primal_form, dual_form):
    """<w, * w_dual> in the primal inner product; for harmonic bases with
    periods (a, b) and (c, d) over matching cycles this equals ad - bc.

    Reduces to the purely topological wedge sum_e w[d_e] w_dual[d_e], with
    the sign fixed so the relation reads +(ad - bc).
    """
    return -form_inner(network, primal_form,
                       hodge_star(network, dual_form, "dual_to_primal"))


# ---------------------------------------------------------------------------
# magnetic charges and electric-magnetic correlators


def minimal_current(network, magnetic):
    """Current of minimal Dirichlet energy with d(J) = magnetic charges.

    magnetic maps faces to real charges summing to zero;
    J = *d(sum_f m_f G_dual(., f)) up to the star sign convention, fixed so
    that d1(J) reproduces the charges exactly.
    """
    m = network.map
    charge = np.zeros(m.n_faces)
    for f, q in magnetic.items():
        charge[f] = q
    if abs(charge.sum()) > 1e-12:
        raise ChargeImbalance("magnetic charges must sum to zero")
    dual_net = network.dual()
    dm = dual_net.map
    gd = green_kernel(dual_net)
    # d1(*d psi) = -Lap_dual psi, so solve with the negated charge vector
    rhs = np.zeros(dm.n_vertices)
    for f in range(m.n_faces):
        dv = int(dm.vertex_of[m.alpha[m.faces[f][0]]])
        rhs[dv] = -charge[f]
    psi = gd @ rhs
    dpsi = np.zeros(m.n_darts)
    for y in range(m.n_darts):
        dpsi[y] = psi[dm.vertex_of[m.alpha[y]]] - psi[dm.vertex_of[y]]
    j = hodge_star(network, dpsi, "dual_to_primal")
    resid = np.max(np.abs(d1(m, j) - charge))
    if resid > 1e-9:
        raise ChargeImbalance(f"minimal current residual {resid}")
    return j


def current_energy(network, j):
    """(1/2) <J, J> in the weighted inner product."""
    return 0.5 * form_inner(network, j, j)


def path_current_variance(network, path_darts):
    """Var(int_gamma J) for the centered current, from the Green kernel:
    Cov(J(uv), J(xy)) = G(v,y) + G(u,x) - G(v,x) - G(u,y)."""
    m = network.map
    g = green_kernel(network)
    var = 0.0
    for d in path_darts:
        for dd in path_darts:
            u, v = m.tail(d), m.head(d)
            x, y = m.tail(dd), m.head(dd)
            var += g[v, y] + g[u, x] - g[v, x] - g[u, y]
    return float(var)


def em_correlator(network, alpha, gamma, magnetic):
    """< exp(i alpha int_gamma J) > for the current with magnetic charges,
    normalized by the charge-free partition function:

        exp(-energy(J_m)) * exp(i alpha int_gamma J_m)
        * exp(-alpha^2 Var(int_gamma J)/2).

    ``gamma`` is a dart walk on the primal map (closed or open).
    """
    m = network.map
    j_m = (minimal_current(network, magnetic) if magnetic
           else np.zeros(m.n_darts))
    mean = float(sum(j_m[d] for d in gamma))
    var = path_current_variance(network, gamma) if gamma else 0.0
    shift = current_energy(network, j_m)
    return np.exp(-shift) * np.exp(1j * alpha * mean) * np.exp(
        -0.5 * alpha ** 2 * var)


def em_duality_check(network, alpha, mag_value, v_pair, f_pair,
                     gamma, gamma_dual):
    """Moduli of the electric-magnetic correlator under the swap
    (Gamma, alpha electric, m magnetic) <-> (dual Gamma, m electric,
    alpha magnetic).  Returns (lhs, rhs) moduli; they agree exactly.

    ``gamma``: primal walk pairing v_pair; ``gamma_dual``: dual walk (darts
    of the dual map) pairing f_pair.  Charges are +-alpha at v_pair and
    +-mag_value at f_pair.
    """
    f_minus, f_plus = f_pair
    lhs = em_correlator(network, alpha, gamma,
                        {f_plus: mag_value, f_minus: -mag_value})
    dual_net = network.dual()
    dm = dual_net.map
    v_minus, v_plus = v_pair
    # on the dual, magnetic charges sit at faces of the dual = primal vertices
    fm = int(dm.face_of[network.map.alpha[network.map.vertices[v_minus][0]]])
    fp = int(dm.face_of[network.map.alpha[network.map.vertices[v_plus][0]]])
    rhs = em_correlator(dual_net, mag_value, gamma_dual,
                        {fp: alpha, fm: -alpha})
    return abs(lhs), abs(rhs)


# ---------------------------------------------------------------------------
# lattice sums: Poisson summation, instantons, T-duality


def _theta_sum(gram, coeff, tol=1e-14):
    """sum_{v in Z^2} exp(-coeff v^T gram v), truncated with a certified
    Gaussian tail bound from the smallest eigenvalue."""
    gram = np.asarray(gram, dtype=float)
    lam = float(np.min(np.linalg.eigvalsh(gram)))
    if lam <= 0:
        raise TruncationInsufficient("Gram matrix not positive definite")
    # tail over ||v|| >= R bounded by sum of exp(-coeff lam r^2) ring counts
    radius = 1
    while True:
        bound = 0.0
        r = radius
        while True:
            term = 8 * r * np.exp(-coeff * lam * r * r)
            bound += term
            if term < 1e-18 * max(1.0, bound) or r > radius + 400:
                break
            r += 1
        if bound < tol:
            break
        radius += 1
        if radius > 2000:
            raise TruncationInsufficient("cannot certify tail bound")
    rng = np.arange(-radius, radius + 1)
    vx, vy = np.meshgrid(rng, rng, indexing="ij")
    q = (gram[0, 0] * vx * vx + 2 * gram[0, 1] * vx * vy
         + gram[1, 1] * vy * vy)
    return float(np.sum(np.exp(-coeff * q))), bound


def poisson_check(gram, t, tol=1e-14):
    """Both sides of the Poisson summation identity

        sum_{x in L} e^{-pi t |x|^2}
            = t^{-dim/2} Vol(V/L)^{-1} sum_{y in L'} e^{-pi |y|^2 / t}

    for the lattice with the given Gram matrix (dual lattice Gram is the
    inverse).  Returns (lhs, rhs).
    """
    gram = np.asarray(gram, dtype=float)
    if gram.shape == (1, 1) or gram.ndim == 0 or gram.shape == ():
        g = float(gram if gram.ndim == 0 else gram[0, 0])
        lhs = _theta1(g, np.pi * t, tol)
        rhs = t ** -0.5 / np.sqrt(g) * _theta1(1.0 / g, np.pi / t, tol)
        return lhs, rhs
    dim = gram.shape[0]
    lhs, _ = _theta_sum(gram, np.pi * t, tol)
    vol = float(np.sqrt(np.linalg.det(gram)))
    rhs_sum, _ = _theta_sum(np.linalg.inv(gram), np.pi / t, tol)
    rhs = t ** (-dim / 2) / vol * rhs_sum
    return lhs, rhs


def _theta1(g, coeff, tol=1e-14):
    radius = 1
    while 2 * np.exp(-coeff * g * radius * radius) / max(
            1e-300, 1 - np.exp(-coeff * g * (2 * radius + 1))) > tol:
        radius += 1
        if radius > 10 ** 6:
            raise TruncationInsufficient("1d tail bound failed")
    n = np.arange(-radius, radius + 1)
    return float(np.sum(np.exp(-coeff * g * n * n)))


def instanton_partition(network, r, tol=1e-14):
    """Instanton sum of the compactified field at radius r:

        Z_inst(r) = sum over closed harmonic forms with periods in
                    sqrt(2 pi) r Z of exp(-(1/2) <w, w>).

    The sqrt(2 pi) scale is the unique normalization for which duality
    inverts the radius exactly (see t_duality_check).
    """
    _, _, gram = harmonic_basis(network)
    coeff = 0.5 * (2 * np.pi) * r * r        # (1/2)(sqrt(2 pi) r)^2
    val, bound = _theta_sum(gram, coeff, tol)
    return val


def t_duality_check(network, r, tol=1e-14):
    """(lhs, rhs, factor) with lhs = Z_inst(r), rhs = Z*_inst(1/r) on the
    reciprocal-conductance dual, and the elementary factor

        Z_inst(r) = factor * Z*_inst(1/r),
        factor = r^{-2} det(Gram)^{-1/2},

    derived from the Poisson summation formula with dim V = 2 and the
    bilinear-pairing identification of the dual period lattice.
    """
    _, _, gram = harmonic_basis(network)
    lhs = instanton_partition(network, r, tol)
    rhs = instanton_partition(network.dual(), 1.0 / r, tol)
    factor = r ** -2 / np.sqrt(np.linalg.det(gram))
    return lhs, rhs, factor


# ---------------------------------------------------------------------------
# continuum correlator closed forms (pure evaluators)


def _check_distinct(*points):
    pts = [complex(p) for p in points]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if pts[i] == pts[j]:
                raise CoincidentPoints("correlator points must be distinct")
    return pts


def electric_two_point(z, w, e, g):
    """<:O_e(z) O_-e(w):> = |z - w|^(-e^2/g)."""
    if g <= 0:
        raise DomainError("coupling g must be positive")
    z, w = _check_distinct(z, w)
    return abs(z - w) ** (-e * e / g)


def magnetic_two_point(z, w, mcharge, g):
    """<:O_m(z) O_-m(w):> = |z - w|^(-m^2 g)."""
    if g <= 0:
        raise DomainError("coupling g must be positive")
    z, w = _check_distinct(z, w)
    return abs(z - w) ** (-mcharge * mcharge * g)


def mixed_four_point(z1, z2, w1, w2, e, mcharge, g):
    """Electric pair at z2/z1 (+-e), magnetic pair at w2/w1 (+-m):

        |z1-z2|^(-e^2/g) |w1-w2|^(-m^2 g)
        e^{i m e (arg(z2-w2) - arg(z2-w1) - arg(z1-w2) + arg(z1-w1))}.
    """
    if g <= 0:
        raise DomainError("coupling g must be positive")
    z1, z2, w1, w2 = _check_distinct(z1, z2, w1, w2)
    mod = (abs(z1 - z2) ** (-e * e / g)
           * abs(w1 - w2) ** (-mcharge * mcharge * g))
    phase = (np.angle(z2 - w2) - np.angle(z2 - w1)
             - np.angle(z1 - w2) + np.angle(z1 - w1))
    return mod * np.exp(1j * mcharge * e * phase)


def spinor_two_point(w1, w2, u1, u2, e, mcharge, g):
    """Coalesced spinor pair with explicit reference directions u1, u2:

        |w2-w1|^{-e^2/g - m^2 g} e^{-2 i e m arg(w2-w1)}
                                 e^{i e m (arg u1 + arg u2)}.
    """
    if g <= 0:
        raise DomainError("coupling g must be positive")
    w1, w2 = _check_distinct(w1, w2)
    u1, u2 = complex(u1), complex(u2)
    if u1 == 0 or u2 == 0:
        raise DomainError("reference directions must be nonzero")
    mod = abs(w2 - w1) ** (-e * e / g - mcharge * mcharge * g)
    return mod * np.exp(1j * e * mcharge * (
        np.angle(u1) + np.angle(u2) - 2 * np.angle(w2 - w1)))


def spinor_coalescence_check(w1, w2, u1, u2, e, mcharge, g, ks=(3, 4, 5, 6)):
    """Ratios mixed4(z_i = w_i + delta u_i) / spinor2 for delta = 10^-k.

    The ratios converge to a delta-independent unit phase exp(i pi e m s)
    with s in {-1, 0, 1} fixed by the branch of arg(w1 - w2) relative to
    arg(w2 - w1) (the paper's implicit reference-direction convention).
    Returns (list of ratios, limiting branch factor).
    """
    spin = spinor_two_point(w1, w2, u1, u2, e, mcharge, g)
    u1, u2 = complex(u1), complex(u2)
    u1 /= abs(u1)
    u2 /= abs(u2)
    ratios = []
    for k in ks:
        delta = 10.0 ** -k
        val = mixed_four_point(w1 + delta * u1, w2 + delta * u2,
                               w1, w2, e, mcharge, g)
        ratios.append(val / spin)
    s = (np.angle(w1 - w2) - np.angle(w2 - w1)) / np.pi   # = +-1
    branch = np.exp(-1j * np.pi * e * mcharge * s)
    return ratios, branch


def coupling_swap_check(e, mcharge, g):
    """Exponent identity under O_{e,m} <-> O_{2m, e/2}, g <-> 4/g:
    e^2/g + m^2 g = (2m)^2/(4/g) + (e/2)^2 (4/g) and em = (2m)(e/2).
    Returns the max absolute defect (identically zero)."""
    lhs = e * e / g + mcharge * mcharge * g
    rhs = (2 * mcharge) ** 2 / (4 / g) + (e / 2) ** 2 * (4 / g)
    return max(abs(lhs - rhs), abs(e * mcharge - (2 * mcharge) * (e / 2)))
