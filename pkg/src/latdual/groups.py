"""Finite abelian groups, characters, and the Fourier-Pontryagin transform.

Group elements are integer indices 0..|G|-1 in mixed radix over the cyclic
factors (q1, ..., qk); the dual group is identified with G componentwise,
so the character with index ``c`` evaluates as

    chi_c(g) = prod_j exp(2 pi i  c_j g_j / q_j).

This identification is fixed once; self-duality statements below are
fixed-point equations under it.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

TOL = 1e-12


class FiniteAbelianGroup:
    """Z/q1 x ... x Z/qk with elements as mixed-radix indices."""

    __slots__ = ("factors", "order", "_residues", "_neg", "_sub", "_chars")

    def __init__(self, *factors):
        if len(factors) == 1 and isinstance(factors[0], (tuple, list)):
            factors = tuple(factors[0])
        factors = tuple(int(q) for q in factors)
        if not factors or any(q < 2 for q in factors):
            raise DomainError("all cyclic factors must be >= 2")
        self.factors = factors
        self.order = int(np.prod(factors))
        res = np.zeros((self.order, len(factors)), dtype=np.int64)
        idx = np.arange(self.order)
        for j in reversed(range(len(factors))):
            res[:, j] = idx % factors[j]
            idx = idx // factors[j]
        self._residues = res
        self._neg = None
        self._sub = None
        self._chars = None

    def element(self, residues):
        """Index of the element with the given residue vector."""
        residues = [int(r) % q for r, q in zip(residues, self.factors)]
        idx = 0
        for r, q in zip(residues, self.factors):
            idx = idx * q + r
        return idx

    def residues(self, g):
        return tuple(int(x) for x in self._residues[g])

    @property
    def identity(self):
        return 0

    def neg_table(self):
        if self._neg is None:
            qs = np.asarray(self.factors)
            neg = (-self._residues) % qs
            self._neg = np.array([self.element(r) for r in neg], dtype=np.int64)
        return self._neg

    def sub_table(self):
        """sub[a, b] = index of g_a - g_b (vectorised Cayley table)."""
        if self._sub is None:
            qs = np.asarray(self.factors)
            n = self.order
            diff = (self._residues[:, None, :] - self._residues[None, :, :]) % qs
            flat = np.zeros((n, n), dtype=np.int64)
            for j, q in enumerate(self.factors):
                flat = flat * q + diff[:, :, j]
            self._sub = flat
        return self._sub

    def add(self, a, b):
        qs = np.asarray(self.factors)
        return self.element((self._residues[a] + self._residues[b]) % qs)

    def neg(self, a):
        return int(self.neg_table()[a])

    def order_of(self, g):
        k, acc = 1, g
        while acc != self.identity:
            acc = self.add(acc, g)
            k += 1
        return k

    def character_table(self):
        """X[c, g] = chi_c(g); unitary up to 1/sqrt(|G|)."""
        if self._chars is None:
            n = self.order
            phase = np.zeros((n, n))
            for j, q in enumerate(self.factors):
                phase += np.multiply.outer(
                    self._residues[:, j], self._residues[:, j]) / q
            self._chars = np.exp(2j * np.pi * phase)
        return self._chars

    def character(self, c):
        return Character(self, c)

    def __eq__(self, other):
        return (isinstance(other, FiniteAbelianGroup)
                and self.factors == other.factors)

    def __hash__(self):
        return hash(self.factors)

    def __repr__(self):
        return " x ".join(f"Z/{q}" for q in self.factors)


class Character:
    """chi_c under the fixed identification of the dual group with G."""

    __slots__ = ("group", "index")

    def __init__(self, group, index):
        self.group = group
        self.index = int(index) % group.order

    def __call__(self, g):
        return complex(self.group.character_table()[self.index, g])

    def inverse(self):
        return Character(self.group, self.group.neg(self.index))

    def __mul__(self, other):
        return Character(self.group, self.group.add(self.index, other.index))


class WeightFunction:
    """Complex-valued function on a finite abelian group, one value per
    element index."""

    __slots__ = ("group", "values")

    def __init__(self, group, values):
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (group.order,):
            raise DomainError(
                f"need {group.order} values, got {values.shape}")
        self.group = group
        self.values = values

    def __getitem__(self, g):
        return complex(self.values[g])

    def is_symmetric(self, tol=TOL):
        return bool(np.max(np.abs(
            self.values[self.group.neg_table()] - self.values)) <= tol)

    def is_positive(self, tol=TOL):
        return bool(np.max(np.abs(self.values.imag)) <= tol
                    and np.min(self.values.real) > 0)

    def __repr__(self):
        return f"WeightFunction({self.group}, {np.round(self.values, 6)})"


def dft_matrix(group):
    """Fourier-Pontryagin matrix F[c, g] = |G|^-1/2 conj(chi_c(g))."""
    return np.conj(group.character_table()) / np.sqrt(group.order)


def fourier_transform(w):
    """hat w(chi) = |G|^-1/2 sum_g w(g) conj(chi(g)), on the dual group
    identified with G.  Of order 4: applying it twice gives w(-g)."""
    return WeightFunction(w.group, dft_matrix(w.group) @ w.values)


def check_self_dual(w):
    """sup-norm residual of the fixed-point equation Fw = w."""
    return float(np.max(np.abs(fourier_transform(w).values - w.values)))


def duality_pair(w):
    """Return (hat w, involution residual), the residual being
    ||FFw - w(-.)||_inf which vanishes identically."""
    what = fourier_transform(w)
    wflip = w.values[w.group.neg_table()]
    res = float(np.max(np.abs(fourier_transform(what).values - wflip)))
    return what, res


def self_dual_potts_weight(q):
    """w = 1 + sqrt(q) * delta_0 on Z/q, the Potts fixed point of F."""
    if q < 2:
        raise DomainError("q >= 2")
    g = FiniteAbelianGroup(q)
    values = np.ones(q, dtype=np.complex128)
    values[0] += np.sqrt(q)
    return WeightFunction(g, values)


def fz_weight(rprime, theta):
    """Fateev-Zamolodchikov clock weights with anisotropy angle theta.

        w(k) = prod_{j=0}^{k-1} sin(pi j/r' + theta/r')
                              / sin(pi (j+1)/r' - theta/r')

    Positive, symmetric, w(0) = 1, and w(r') telescopes back to 1.
    theta = pi/4 is the self-dual point (F w = w exactly).
    """
    if rprime < 2:
        raise DomainError("rprime >= 2")
    if not 0 < theta < np.pi / 2:
        raise DomainError("theta must lie in (0, pi/2)")
    g = FiniteAbelianGroup(rprime)
    vals = np.empty(rprime, dtype=np.complex128)
    acc = 1.0
    vals[0] = 1.0
    for k in range(1, rprime):
        j = k - 1
        acc *= (np.sin((np.pi * j + theta) / rprime)
                / np.sin((np.pi * (j + 1) - theta) / rprime))
        vals[k] = acc
    return WeightFunction(g, vals)


def fz_cycle_residual(rprime, theta):
    """|w(r') - w(0)| continued one more step; zero by telescoping."""
    w = fz_weight(rprime, theta)
    acc = complex(w.values[rprime - 1])
    j = rprime - 1
    acc *= (np.sin((np.pi * j + theta) / rprime)
            / np.sin((np.pi * (j + 1) - theta) / rprime))
    return abs(acc - 1.0)


def fz_recursion_residual(w):
    """Residual of w(k+1)(1 + lam^3 xi^-k) + w(k)(lam + lam^2 xi^-k) = 0
    with lam = -exp(-i pi / 2q), the defining relation of the self-dual
    family.  Returns the max over k."""
    q = w.group.order
    lam = -np.exp(-1j * np.pi / (2 * q))
    xi = np.exp(2j * np.pi / q)
    res = 0.0
    for k in range(q):
        term = (w.values[(k + 1) % q] * (1 + lam ** 3 * xi ** (-k))
                + w.values[k] * (lam + lam ** 2 * xi ** (-k)))
        res = max(res, abs(term))
    return res


def fz_parafermion_coeffs(rprime, theta):
    """Coefficients (a, b, c, d) of the local parafermionic relation,
    matched to the FZ weights at anisotropy theta.

    In the family (a,b,c,d) = (u/lam, lam/u, 1/(u lam), u lam) with
    lam^4 = chi0(g0), the choice lam = exp(i pi / 2r') and
    u = exp(i (theta - pi/2) / r') reproduces the theta-weights through
    the difference relation ((a - b chi0) shift - (c - d chi0)) w = 0.
    """
    lam = np.exp(1j * np.pi / (2 * rprime))
    u = np.exp(1j * (theta - np.pi / 2) / rprime)
    return (u / lam, lam / u, 1.0 / (u * lam), u * lam)


def parafermion_difference_residual(w, g0, chi0, coeffs):
    """Max over g of |(a - b chi0(g)) w(g g0) - (c - d chi0(g)) w(g)|."""
    a, b, c, d = coeffs
    grp = w.group
    res = 0.0
    for g in range(grp.order):
        z = chi0(g)
        shifted = w[grp.add(g, g0)]
        res = max(res, abs((a - b * z) * shifted - (c - d * z) * w[g]))
    return res


def ashkin_teller_check(w, tol=1e-10):
    """Self-duality test on Z/2 x Z/2.

    True iff w(0,0) = w(1,0) + w(0,1) + w(1,1) and Fw equals w up to the
    factor-swap identification of the dual group.  (The transform fixes w
    exactly only when additionally w(1,0) = w(0,1); the swap is the
    isomorphism ambiguity of the identification.)
    """
    if w.group.factors != (2, 2):
        raise DomainError("Ashkin-Teller check needs Z/2 x Z/2")
    v = w.values
    cond_sum = abs(v[0] - (v[1] + v[2] + v[3])) <= tol
    what = fourier_transform(w).values
    swap = np.array([0, 2, 1, 3])
    dft_ok = min(
        float(np.max(np.abs(what - v))),
        float(np.max(np.abs(what - v[swap])))) <= tol
    return bool(cond_sum and dft_ok)


def dft_eigenvalue_multiplicities(q):
    """Counts of the DFT eigenvalues (1, -1, i, -i) on C^(Z/q)."""
    f = dft_matrix(FiniteAbelianGroup(q))
    eig = np.linalg.eigvals(f)
    targets = np.array([1, -1, 1j, -1j])
    counts = [0, 0, 0, 0]
    for lam in eig:
        k = int(np.argmin(np.abs(targets - lam)))
        if abs(targets[k] - lam) > 1e-8:
            raise ArithmeticError(f"DFT eigenvalue {lam} not a 4th root")
        counts[k] += 1
    return tuple(counts)
