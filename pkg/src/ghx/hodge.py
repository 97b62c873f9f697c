"""Mixed Hodge-index theorem on Herm(n): Gram matrix, signature, primitive space.

Given alpha_1, ..., alpha_{m-1} in Gamma_m, put Omega = (alpha_1, ..., alpha_{m-2})
and Q(beta, gamma) = D(Omega, beta, gamma).  The statements certified here are

* Q has Lorentzian signature (1, 0, n^2 - 1);
* Q is negative definite on the primitive hyperplane
  {gamma : D(Omega, alpha_{m-1}, gamma) = 0};
* Herm(n) = primitive hyperplane + R alpha_{m-1};
* the Gram matrix is nonsingular.

Everything is done over the reals on Herm(n); a complex primitive class has
primitive real and imaginary parts, so negativity for complex classes follows.
The last bullet stands in for the isomorphism beta -> omega^{n-m} Omega beta
onto H^{n-1,n-1}: composed with the intersection pairing that map is exactly
the Gram matrix, so injectivity is Gram nonsingularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space

from .errors import ContractError, PreconditionError
from .garding import representer_values, require_gamma
from .herm import (DEFAULT_TOL, HermitianForm, MetricPencil, RealBasis,
                   _as_matrix, proportionality)
from .sympoly import _group, polarize, random_hermitian

SIGNATURE_TOL = 1e-8


@dataclass
class QuadraticReport:
    n: int
    m: int
    basis: RealBasis = field(repr=False)
    gram: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    signature: tuple
    indeterminate: bool
    functional: Optional[np.ndarray] = field(default=None, repr=False)
    primitive_basis: Optional[np.ndarray] = field(default=None, repr=False)
    restricted_spectrum: Optional[np.ndarray] = None
    alpha_norm_q: Optional[float] = None
    decomposition_constant: Optional[float] = None
    decomposition_residual: Optional[float] = None

    @property
    def scale(self) -> float:
        return float(np.abs(self.eigenvalues).max())

    @property
    def lorentzian(self) -> bool:
        return self.signature == (1, 0, self.n * self.n - 1)

    @property
    def min_abs_eigenvalue(self) -> float:
        return float(np.abs(self.eigenvalues).min())

    @property
    def nonsingular(self) -> bool:
        return self.min_abs_eigenvalue > SIGNATURE_TOL * self.scale

    @property
    def primitive_negative(self) -> bool:
        if self.restricted_spectrum is None:
            return False
        return bool(self.restricted_spectrum.max() < -1e-10 * self.scale)

    def q(self, beta, gamma=None) -> float:
        """Q(beta, gamma) through the Gram matrix."""
        b = self.basis.coords(beta)
        c = b if gamma is None else self.basis.coords(gamma)
        return float(b @ self.gram @ c)

    def as_polynomial(self) -> "GramPolynomial":
        return GramPolynomial(self.basis, self.gram)


@dataclass(frozen=True)
class GramPolynomial:
    """Quadratic polynomial on Herm(n) given by a Gram matrix in basis coordinates."""

    basis: RealBasis
    gram: np.ndarray

    @property
    def degree(self) -> int:
        return 2

    def polar(self, args):
        x, y = (self.basis.coords(_as_matrix(a)) for a in args)
        return np.einsum("...i,ij,...j->...", x, self.gram, y)


def signature_of(eigs: np.ndarray, rel_tol: float = SIGNATURE_TOL):
    thr = rel_tol * np.abs(eigs).max()
    plus = int(np.sum(eigs > thr))
    minus = int(np.sum(eigs < -thr))
    zero = len(eigs) - plus - minus
    return (plus, zero, minus), zero > 0


def gram_of(slots: Sequence, G: MetricPencil, basis: Optional[RealBasis] = None) -> np.ndarray:
    """Gram matrix of beta, gamma -> D(slots, beta, gamma) over the real basis."""
    basis = basis or RealBasis(G.n)
    d = basis.dim
    iu, ju = np.triu_indices(d)
    distinct, mult = _group([HermitianForm(s) for s in slots])
    vals = polarize(G, distinct + [basis.matrices[iu], basis.matrices[ju]], mult + [1, 1])
    gram = np.zeros((d, d))
    gram[iu, ju] = vals
    gram[ju, iu] = vals
    return gram


def gram_matrix(slots: Sequence, G: MetricPencil, check: bool = True,
                tol: float = DEFAULT_TOL) -> QuadraticReport:
    """Gram matrix and signature of Q = D(slots, ., .); m = len(slots) + 2."""
    slots = [HermitianForm(s) for s in slots]
    m = len(slots) + 2
    if m > G.n:
        raise ContractError(f"degree m={m} exceeds n={G.n}")
    if check:
        require_gamma(slots, G, m, tol, what="slot")
    basis = RealBasis(G.n)
    gram = gram_of(slots, G, basis)
    eigs = np.linalg.eigvalsh(gram)
    sig, indet = signature_of(eigs)
    return QuadraticReport(G.n, m, basis, gram, eigs, sig, indet)


def quadratic_hyperbolicity(report: QuadraticReport) -> bool:
    """A real quadratic form is complete and hyperbolic iff it is nondegenerate Lorentzian."""
    return report.lorentzian


def gram_report(gram: np.ndarray, n: int, m: int = 2) -> QuadraticReport:
    """Wrap an arbitrary symmetric Gram matrix (in RealBasis coordinates)."""
    gram = np.asarray(gram, dtype=float)
    eigs = np.linalg.eigvalsh(gram)
    sig, indet = signature_of(eigs)
    return QuadraticReport(n, m, RealBasis(n), gram, eigs, sig, indet)


@dataclass
class PrimitiveSpace:
    functional: np.ndarray      # coordinates: gamma -> functional @ coords(gamma)
    basis: np.ndarray           # (n^2 - 1, n^2), orthonormal rows
    representer: HermitianForm

    def residual(self, coords: np.ndarray) -> np.ndarray:
        return coords @ self.functional


def primitive_basis(slots: Sequence, alpha_last, G: MetricPencil, check: bool = True,
                    tol: float = DEFAULT_TOL) -> PrimitiveSpace:
    """Orthonormal coordinate basis of {gamma : D(slots, alpha_last, gamma) = 0}."""
    alphas = [HermitianForm(s) for s in slots] + [HermitianForm(alpha_last)]
    m = len(alphas) + 1
    if check:
        require_gamma(alphas, G, m, tol)
    vals, basis = representer_values(alphas, G)
    H = HermitianForm(basis.from_coords(vals / basis.sq_norms))
    if np.linalg.norm(vals) == 0:
        raise PreconditionError("primitivity functional vanishes")
    ns = null_space(vals[None, :])
    return PrimitiveSpace(vals, ns.T, H)


def verify_theorem_a(alphas: Sequence, G: MetricPencil, gamma=None, seed: int = 0,
                     check: bool = True, tol: float = DEFAULT_TOL) -> QuadraticReport:
    """Full mixed Hodge-index report for alpha_1..alpha_{m-1} in Gamma_m.

    ``gamma`` is the class decomposed as primitive + c alpha_{m-1}; a seeded
    random Hermitian matrix is used if it is omitted.
    """
    alphas = [HermitianForm(a) for a in alphas]
    if len(alphas) < 1:
        raise ContractError("need at least alpha_1 (m >= 2)")
    m = len(alphas) + 1
    if m > G.n:
        raise ContractError(f"degree m={m} exceeds n={G.n}")
    if check:
        require_gamma(alphas, G, m, tol)
    slots, last = alphas[:-1], alphas[-1]
    rep = gram_matrix(slots, G, check=False)
    prim = primitive_basis(slots, last, G, check=False)
    B = prim.basis
    restricted = np.linalg.eigvalsh(B @ rep.gram @ B.T)
    a = rep.basis.coords(last)
    qaa = float(a @ rep.gram @ a)
    if gamma is None:
        gamma = random_hermitian(np.random.default_rng(seed), G.n)
    g = rep.basis.coords(gamma)
    c = float(g @ rep.gram @ a) / qaa
    p = g - c * a
    resid = abs(float(prim.residual(p))) / (
        np.linalg.norm(prim.functional) * (np.linalg.norm(g) + abs(c) * np.linalg.norm(a)))
    rep.functional = prim.functional
    rep.primitive_basis = B
    rep.restricted_spectrum = restricted
    rep.alpha_norm_q = qaa
    rep.decomposition_constant = c
    rep.decomposition_residual = float(resid)
    return rep


@dataclass
class CorollaryRecord:
    pairing: float      # D(beta, alpha^(m-1))
    q_value: float      # D(beta, beta, alpha^(m-2))
    top: float          # D(alpha^(m)) = sigma_m(alpha)
    defect: float       # pairing^2 - q_value * top, >= 0

    @property
    def scale(self) -> float:
        return max(self.pairing ** 2, abs(self.q_value * self.top), 1e-300)

    def holds(self, tol: float = DEFAULT_TOL) -> bool:
        return self.defect >= -tol * self.scale


def corollary_hodge_index(alpha, beta, G: MetricPencil, m: int,
                          tol: float = DEFAULT_TOL) -> CorollaryRecord:
    """The Cauchy-Schwarz type inequality D(b, a^(m-1))^2 >= D(b, b, a^(m-2)) D(a^(m))."""
    alpha, beta = HermitianForm(alpha), HermitianForm(beta)
    require_gamma([alpha], G, m, tol)
    pairing = float(polarize(G, [beta, alpha], [1, m - 1]))
    q = float(polarize(G, [beta, alpha], [2, m - 2]))
    top = float(polarize(G, [alpha], [m]))
    return CorollaryRecord(pairing, q, top, pairing * pairing - q * top)


@dataclass
class MinorReport:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    negative_semidefinite: bool
    degenerate: bool
    proportional: bool

    @property
    def consistent(self) -> bool:
        return self.degenerate == self.proportional


def minor_2x2(beta1, beta2, alphas: Sequence, G: MetricPencil, prim_tol: float = 1e-8,
              tol: float = DEFAULT_TOL) -> MinorReport:
    """The 2x2 matrix of Q on two primitive classes.

    ``alphas`` = (alpha_1, ..., alpha_{m-1}); primitivity is taken with
    respect to D(Omega, alpha_{m-1}, .).
    """
    alphas = [HermitianForm(a) for a in alphas]
    b1, b2 = HermitianForm(beta1), HermitianForm(beta2)
    m = len(alphas) + 1
    require_gamma(alphas, G, m, tol)
    slots, last = alphas[:-1], alphas[-1]
    vals, basis = representer_values(alphas, G)
    for i, b in enumerate((b1, b2)):
        c = basis.coords(b)
        r = abs(c @ vals) / (np.linalg.norm(vals) * max(np.linalg.norm(c), 1e-300))
        if r > prim_tol:
            raise PreconditionError(f"beta_{i + 1} is not primitive (relative residual {r:.2e})")
    distinct, mult = _group(slots)
    q11 = float(polarize(G, distinct + [b1], mult + [2]))
    q22 = float(polarize(G, distinct + [b2], mult + [2]))
    q12 = float(polarize(G, distinct + [b1, b2], mult + [1, 1]))
    M = np.array([[q11, q12], [q12, q22]])
    ev = np.linalg.eigvalsh(M)
    scale = max(abs(q11), abs(q22), 1e-300)
    nsd = bool(ev.max() <= 1e-9 * scale)
    det = q11 * q22 - q12 * q12
    degenerate = bool(det <= 1e-8 * scale * scale)
    if b1.norm() == 0 or b2.norm() == 0:
        prop = True
    else:
        prop = proportionality(b1, b2) is not None
    return MinorReport(M, ev, nsd, degenerate, prop)


@dataclass
class LogConcavity:
    a: np.ndarray
    defects: np.ndarray          # a_k^2 - a_{k+1} a_{k-1}, k = 1..m-1
    holds: np.ndarray
    equality: np.ndarray
    proportional: bool

    @property
    def log_concave(self) -> bool:
        return bool(np.all(self.holds))

    @property
    def consistent(self) -> bool:
        return bool(np.all(self.equality == self.proportional))


def log_concavity(alpha, beta, G: MetricPencil, m: int, tol: float = DEFAULT_TOL,
                  equality_tol: float = DEFAULT_TOL) -> LogConcavity:
    """a_k = D(alpha^(k), beta^(m-k)) and the log-concavity verdicts for k = 1..m-1."""
    alpha, beta = HermitianForm(alpha), HermitianForm(beta)
    require_gamma([alpha, beta], G, m, tol)
    a = np.array([float(polarize(G, [alpha, beta], [k, m - k])) for k in range(m + 1)])
    k = np.arange(1, m)
    defects = a[k] ** 2 - a[k + 1] * a[k - 1]
    holds = defects >= -tol * a[k] ** 2
    equality = defects <= equality_tol * a[k] ** 2
    prop = proportionality(alpha, beta) is not None
    return LogConcavity(a, defects, holds, equality, prop)
