"""Elementary symmetric polynomials on pencils and their complete polarization.

``sigma(A, G, k)`` is e_k of the pencil eigenvalues of (A, G).  In form
language it equals ``A^k ^ omega^{n-k} / omega^n`` up to the positive factor
``k!(n-k)!/n!``, which never changes a sign or an inequality.  ``mixed_sigma``
is the symmetric multilinear form D with D(A, ..., A) = sigma(A, G, m).

Anything exposing ``degree`` and ``polar(args)`` (a list of ``degree`` matrices
or stacks thereof) is treated as a homogeneous polynomial on Herm(n) by the
line-restriction, hyperbolicity and cone routines below.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np

from .errors import ContractError, DegenerateInputError, PreconditionError
from .herm import (DEFAULT_TOL, HermitianForm, MetricPencil, RealBasis,
                   _as_matrix)

ROOT_TOL = 1e-7


# -- elementary symmetric functions ---------------------------------------

def esp_all(lam: np.ndarray, k: int) -> np.ndarray:
    """e_0..e_k of the last axis of ``lam`` by the Vieta recurrence.

    Eigenvalues are consumed in sorted order; returns shape ``lam.shape[:-1] + (k+1,)``.
    """
    lam = np.sort(np.asarray(lam, dtype=float), axis=-1)
    e = np.zeros(lam.shape[:-1] + (k + 1,))
    e[..., 0] = 1.0
    for i in range(lam.shape[-1]):
        top = min(i + 1, k)
        e[..., 1:top + 1] = e[..., 1:top + 1] + lam[..., i:i + 1] * e[..., 0:top]
    return e


def _sigma_reduced(r: np.ndarray, k: int) -> np.ndarray:
    return esp_all(np.linalg.eigvalsh(r), k)[..., k]


def _check_degree(k: int, n: int):
    if not 1 <= k <= n:
        raise ContractError(f"degree {k} outside 1..{n}")


def sigma(A, G: MetricPencil, k: int) -> float:
    """e_k of the pencil eigenvalues of (A, G)."""
    _check_degree(k, G.n)
    return float(_sigma_reduced(G.reduce(A), k))


def sigma_batch(a: np.ndarray, G: MetricPencil, k: int) -> np.ndarray:
    _check_degree(k, G.n)
    return _sigma_reduced(G.reduce(a), k)


def sigmas(A, G: MetricPencil, m: int) -> np.ndarray:
    """(sigma_1, ..., sigma_m) of A; batched over leading axes."""
    _check_degree(m, G.n)
    return esp_all(np.linalg.eigvalsh(G.reduce(A)), m)[..., 1:]


# -- polarization ------------------------------------------------------------

def _subset_sign(m: int, size: int) -> int:
    return -1 if (m - size) % 2 else 1


def _subset_table(mult: Sequence[int]):
    """Centred difference table for the polarization of a degree-m form.

    The m-th difference of p along the arguments equals m! D(...) from any
    base point.  Taking the base point -(1/2) sum r_i x_i makes every
    evaluation point a combination with coefficients s_i - r_i / 2, which
    cancels far less than differencing from the origin.  Count vectors s and
    r - s give opposite points with equal contributions, so only one of each
    pair is kept, with doubled weight.
    """
    m = sum(mult)
    r = tuple(mult)
    rows, weights = [], []
    for s in itertools.product(*(range(k + 1) for k in r)):
        mirror = tuple(k - si for k, si in zip(r, s))
        if s > mirror:
            continue
        w = _subset_sign(m, sum(s)) * (1 if s == mirror else 2)
        for si, ri in zip(s, r):
            w *= math.comb(ri, si)
        rows.append([si - ri / 2 for si, ri in zip(s, r)])
        weights.append(w)
    return np.array(rows, dtype=float), np.array(weights, dtype=float)


def polarize_reduced(r: np.ndarray, mult: Sequence[int]) -> np.ndarray:
    """Complete polarization of sigma_m on already-reduced arguments.

    ``r`` has shape ``(..., g, n, n)`` holding g distinct arguments; argument i
    is repeated ``mult[i]`` times and m = sum(mult).  Batched over ``...``.
    """
    mult = tuple(int(x) for x in mult)
    if r.shape[-3] != len(mult):
        raise ContractError("multiplicity vector does not match argument count")
    m = sum(mult)
    _check_degree(m, r.shape[-1])
    table, weights = _subset_table(mult)
    sums = np.einsum("sg,...gij->...sij", table, r)
    vals = _sigma_reduced(sums, m)
    # elementwise product and a row sum keep each result independent of the batch size
    return np.sum(vals * weights, axis=-1) / math.factorial(m)


def _group(args):
    """Collapse repeated (identical) arguments into (distinct, multiplicities)."""
    distinct, mult = [], []
    for a in args:
        for i, d in enumerate(distinct):
            if d is a:
                mult[i] += 1
                break
        else:
            distinct.append(a)
            mult.append(1)
    return distinct, mult


def polarize(G: MetricPencil, args: Sequence, mult: Optional[Sequence[int]] = None) -> np.ndarray:
    """D(args) for sigma_m relative to G, m = len(args) (or sum(mult)).

    Arguments may be HermitianForms or stacks with common leading batch axes.
    """
    if mult is None:
        args, mult = _group(list(args))
    mats = [_as_matrix(a) for a in args]
    shape = np.broadcast_shapes(*(a.shape for a in mats))
    stack = np.stack([np.broadcast_to(a, shape) for a in mats], axis=-3)
    return polarize_reduced(G.reduce(stack), mult)


@dataclass(frozen=True)
class MixedContext:
    """sigma_m relative to G with k fixed leading slots.

    As a polynomial it is x -> D(fixed..., x, ..., x) of degree m - k.
    """

    m: int
    G: MetricPencil
    fixed: tuple = ()

    def __post_init__(self):
        fixed = tuple(HermitianForm(f) for f in self.fixed)
        object.__setattr__(self, "fixed", fixed)
        n = self.G.n
        if not 1 <= self.m <= n:
            raise ContractError(f"degree m={self.m} outside 1..{n}")
        if len(fixed) > self.m:
            raise ContractError("more fixed slots than the degree")
        for f in fixed:
            if f.n != n:
                raise ContractError(f"fixed slot dimension {f.n} != {n}")

    @property
    def n(self) -> int:
        return self.G.n

    @property
    def degree(self) -> int:
        return self.m - len(self.fixed)

    def polar(self, free: Sequence) -> np.ndarray:
        if len(free) != self.degree:
            raise ContractError(f"expected {self.degree} free arguments, got {len(free)}")
        return polarize(self.G, list(self.fixed) + list(free))

    def __call__(self, x) -> float:
        return float(self.polar([x] * self.degree))


def mixed_sigma(ctx: MixedContext, free: Sequence) -> float:
    """Fully polarized sigma_m evaluated on the fixed slots plus ``free``."""
    return float(ctx.polar(list(free)))


def _principal_minor_esp(M: np.ndarray, m: int) -> np.ndarray:
    n = M.shape[-1]
    total = 0.0
    for idx in itertools.combinations(range(n), m):
        sub = M[..., idx, :][..., :, idx]
        total = total + np.linalg.det(sub)
    return np.real(total)


def mixed_sigma_oracle(ctx: MixedContext, free: Sequence) -> np.ndarray:
    """Independent evaluation of :func:`mixed_sigma`.

    Uses no eigensolver and no Cholesky factor: e_m of the pencil is the sum
    of m x m principal minors of G^{-1} A, and the multilinear coefficient is
    extracted by finite differencing over the grid t in {0,1}^m (zero
    corner included) after normalising each argument to unit Frobenius norm.
    """
    args = list(ctx.fixed) + list(free)
    if len(args) != ctx.m:
        raise ContractError(f"expected {ctx.m} arguments, got {len(args)}")
    m = ctx.m
    mats = [_as_matrix(a) for a in args]
    norms = [np.linalg.norm(a, axis=(-2, -1)) for a in mats]
    safe = [np.where(nv > 0, nv, 1.0) for nv in norms]
    unit = [a / s[..., None, None] for a, s in zip(mats, safe)]
    Ginv_args = [np.linalg.solve(ctx.G.G.matrix, u) for u in unit]
    acc = 0.0
    for t in itertools.product((0, 1), repeat=m):
        size = sum(t)
        M = sum(ti * a for ti, a in zip(t, Ginv_args)) if size else np.zeros_like(Ginv_args[0])
        val = _principal_minor_esp(M, m)
        acc = acc + ((-1) ** (m - size)) * val
    out = acc / math.factorial(m)
    for nv in norms:
        out = out * nv
    return out


def _esp_newton_mp(M, n: int, k: int):
    p, P = [], M
    for i in range(k):
        p.append(sum(P[j, j] for j in range(n)))
        if i + 1 < k:
            P = P * M
    e = [mpmath.mpf(1)]
    for j in range(1, k + 1):
        acc = sum(((-1) ** (i - 1)) * e[j - i] * p[i - 1] for i in range(1, j + 1))
        e.append(acc / j)
    return mpmath.re(e[k])


def sigma_highprec(X, G: MetricPencil, k: int, dps: int = 40, direction=None, t=0):
    """e_k of the pencil (X + t * direction, G) in mpmath arithmetic.

    Uses power sums of G^{-1} X and Newton's identities; shares no code with
    the eigensolver path and is meant for finite-difference oracles.  The
    shift by ``t * direction`` is formed in extended precision.
    """
    _check_degree(k, G.n)
    with mpmath.workdps(dps):
        Ginv = mpmath.inverse(mpmath.matrix(G.G.matrix.tolist()))
        M = Ginv * mpmath.matrix(_as_matrix(X).tolist())
        if direction is not None:
            M = M + mpmath.mpf(t) * (Ginv * mpmath.matrix(_as_matrix(direction).tolist()))
        return _esp_newton_mp(M, G.n, k)


# -- restriction to lines and real-rootedness ------------------------------

@dataclass(frozen=True)
class PolyOnLine:
    """Real univariate polynomial, ascending coefficients."""

    coefficients: tuple

    @property
    def degree(self) -> int:
        c = np.asarray(self.coefficients)
        nz = np.flatnonzero(c)
        return int(nz[-1]) if nz.size else -1

    def __call__(self, s):
        return np.polynomial.polynomial.polyval(s, np.asarray(self.coefficients))

    def roots(self) -> np.ndarray:
        c = np.asarray(self.coefficients, dtype=float)
        if not np.any(c):
            raise DegenerateInputError("zero polynomial has no finite root set")
        scale = np.abs(c).max()
        c = c / scale
        # trailing coefficients below roundoff are a degree drop, not a root at infinity
        keep = np.flatnonzero(np.abs(c) > 1e-13)
        c = c[: keep[-1] + 1]
        if c.size <= 1:
            return np.array([], dtype=complex)
        return _merge_clusters(c, np.roots(c[::-1]))


ROOT_BACKWARD_ERROR = 1e-13


def _merge_clusters(c: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Replace each numerically multiple root by k copies of the cluster mean.

    A k-fold root perturbed by relative coefficient error eps splits into a
    ring of radius about (eps S k! / |p^(k)(mu)|)^(1/k), S = sum |c_j| |mu|^j,
    while the mean of the ring stays accurate to O(eps).  Groups found by
    single linkage are merged only when their spread fits that radius.
    """
    if r.size < 2:
        return r
    order = np.argsort(r.real)
    r = r[order]
    groups, cur = [], [0]
    for i in range(1, r.size):
        if abs(r[i] - r[cur[-1]]) <= 1e-3 * (1 + abs(r[i])) or \
                any(abs(r[i] - r[j]) <= 1e-3 * (1 + abs(r[i])) for j in cur):
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    out = r.copy()
    P = np.polynomial.Polynomial(c)
    for g in groups:
        k = len(g)
        if k < 2:
            continue
        mu = r[g].mean()
        dk = abs(P.deriv(k)(mu))
        S = float(np.sum(np.abs(c) * np.abs(mu) ** np.arange(c.size)))
        if dk == 0:
            continue
        radius = (ROOT_BACKWARD_ERROR * S * math.factorial(k) / dk) ** (1.0 / k)
        if np.abs(r[g] - mu).max() <= 10 * radius:
            out[g] = mu
    return out


def restrict_line(poly, a, x) -> PolyOnLine:
    """Coefficients of s -> P(s a + x), via c_j = C(d, j) P(a^(j), x^(d-j))."""
    d = poly.degree
    A, X = HermitianForm(a), HermitianForm(x)
    coeffs = []
    for j in range(d + 1):
        coeffs.append(math.comb(d, j) * float(poly.polar([A] * j + [X] * (d - j))))
    return PolyOnLine(tuple(coeffs))


def real_rooted(p: PolyOnLine, tol: float = ROOT_TOL) -> bool:
    """True iff every root r of p has |Im r| <= tol (1 + |r|)."""
    r = p.roots()
    return bool(np.all(np.abs(r.imag) <= tol * (1.0 + np.abs(r))))


def random_hermitian(rng: np.random.Generator, n: int, size=None) -> np.ndarray:
    """(Z + Z^H)/2 with Z entrywise standard complex Gaussian."""
    shape = (n, n) if size is None else tuple(np.atleast_1d(size)) + (n, n)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return 0.5 * (z + np.conj(np.swapaxes(z, -1, -2)))


def _poly_scale(poly, a) -> float:
    return np.linalg.norm(_as_matrix(a)) ** poly.degree


@dataclass
class HyperbolicityResult:
    hyperbolic: bool
    samples: int
    witness: Optional[HermitianForm] = None
    witness_roots: Optional[np.ndarray] = None

    def __bool__(self):
        return self.hyperbolic

    @property
    def summary(self) -> str:
        if self.hyperbolic:
            return f"no violation found in {self.samples} samples"
        return f"non-real roots found after {self.samples} samples"


def hyperbolic_at(poly, a, samples: int = 1000, seed: int = 0,
                  tol: float = ROOT_TOL) -> HyperbolicityResult:
    """Monte-Carlo hyperbolicity probe of ``poly`` in direction ``a``.

    Draws random Hermitian x and checks that s -> P(s a + x) is real rooted.
    A True answer means no violation was found, not a proof.
    """
    A = HermitianForm(a)
    pa = float(poly.polar([A] * poly.degree))
    if abs(pa) <= 1e-12 * _poly_scale(poly, A):
        raise PreconditionError("P(a) != 0 fails: polynomial vanishes at the direction")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        x = HermitianForm(random_hermitian(rng, A.n))
        line = restrict_line(poly, A, x)
        if not real_rooted(line, tol):
            return HyperbolicityResult(False, i + 1, x, line.roots())
    return HyperbolicityResult(True, samples)


@dataclass
class ConeMembership:
    member: bool
    margin: float
    roots: np.ndarray = field(repr=False)


def in_cone(poly, a, x, tol: float = DEFAULT_TOL) -> ConeMembership:
    """Membership of x in the hyperbolicity cone of ``poly`` containing ``a``.

    x is inside iff every root of s -> P(s a + x) is strictly negative; the
    margin is minus the largest root (real part).
    """
    line = restrict_line(poly, a, x)
    r = line.roots()
    if r.size == 0:
        return ConeMembership(False, -np.inf, r)
    r = r[np.argsort(r.real)]
    margin = float(-r.real.max())
    return ConeMembership(margin > tol, margin, r)


@dataclass
class GammaMembership:
    member: bool
    margins: np.ndarray
    sigmas: np.ndarray

    def first_failure(self, tol: float = DEFAULT_TOL):
        bad = np.flatnonzero(self.margins <= tol)
        return int(bad[0]) + 1 if bad.size else None


def gamma_margins(a: np.ndarray, G: MetricPencil, m: int):
    """Normalised margins sigma_l / e_l(|lam|), l = 1..m, batched."""
    _check_degree(m, G.n)
    lam = np.linalg.eigvalsh(G.reduce(a))
    s = esp_all(lam, m)[..., 1:]
    scale = esp_all(np.abs(lam), m)[..., 1:]
    margins = np.where(scale > 0, s / np.where(scale > 0, scale, 1.0), 0.0)
    return margins, s


def in_gamma_m(A, G: MetricPencil, m: int, tol: float = DEFAULT_TOL) -> GammaMembership:
    """A in Gamma_m iff sigma_l(A) > tol * e_l(|lam|) for l = 1..m."""
    margins, s = gamma_margins(_as_matrix(A), G, m)
    return GammaMembership(bool(np.all(margins > tol)), margins, s)


# -- linearity space -------------------------------------------------------

@dataclass(frozen=True)
class TracePowerPolynomial:
    """P(x) = (tr x)^m; its linearity space is the trace-free hyperplane."""

    n: int
    m: int

    @property
    def degree(self) -> int:
        return self.m

    def polar(self, args):
        out = 1.0
        for a in args:
            out = out * np.real(np.trace(_as_matrix(a), axis1=-2, axis2=-1))
        return out


def linearity_dimension(poly, n: int, seed: int = 0, rel_tol: float = 1e-8) -> int:
    """Numerical dimension of the linearity space LP of ``poly`` on Herm(n).

    x is in LP iff D(x, y_2, ..., y_d) = 0 for all y; the kernel of that map
    is estimated from 2 n^2 random tuples y and an SVD.
    """
    d = poly.degree
    if d < 2:
        raise ContractError("linearity test needs degree >= 2")
    basis = RealBasis(n)
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(2 * n * n):
        ys = [random_hermitian(rng, n) for _ in range(d - 1)]
        rows.append(np.asarray(poly.polar([basis.matrices] + ys), dtype=float))
    sv = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(np.sum(sv <= rel_tol * sv[0])) if sv[0] > 0 else basis.dim
