"""Garding's inequality, mixed positivity and the concavity profile of sigma_m^{1/m}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np

from .errors import ConeViolation, ContractError, DegenerateInputError
from .herm import (DEFAULT_TOL, HermitianForm, MetricPencil, RealBasis,
                   _as_matrix, pencil_eigenvalues, proportionality)
from .sympoly import (_group, gamma_margins, polarize, sigma, sigma_batch,
                      _esp_newton_mp)

EQUALITY_TOL = 1e-7


def require_gamma(args: Sequence, G: MetricPencil, m: int, tol: float = DEFAULT_TOL,
                  what: str = "argument", closed: bool = False):
    """Raise ConeViolation naming the first argument outside Gamma_m.

    With ``closed=True`` the closure is accepted (margins >= -tol).
    """
    for i, a in enumerate(args):
        margins, s = gamma_margins(_as_matrix(a), G, m)
        if closed:
            # on the boundary e_l(|lam|) can itself be roundoff, so measure against the spectral radius
            top = np.abs(pencil_eigenvalues(a, G)).max()
            ref = np.array([math.comb(G.n, l) * top ** l for l in range(1, m + 1)])
            margins = np.where(ref > 0, s / np.where(ref > 0, ref, 1.0), 0.0)
        bad = np.flatnonzero(margins < -tol) if closed else np.flatnonzero(margins <= tol)
        if bad.size:
            lvl = int(bad[0]) + 1
            raise ConeViolation(
                f"{what} {i} is outside {'the closure of ' if closed else ''}Gamma_{m}: "
                f"sigma_{lvl} margin {margins[bad[0]]:.3e} (sigma_{lvl} = {s[bad[0]]:.6g})",
                index=i, level=lvl, margin=float(margins[bad[0]]))


@dataclass
class GardingGap:
    lhs: float
    rhs: float
    gap: float
    equality_witness: Optional[dict] = None

    @property
    def relative_gap(self) -> float:
        return self.gap / self.rhs if self.rhs > 0 else math.inf

    def holds(self, tol: float = DEFAULT_TOL) -> bool:
        return self.gap >= -tol * self.rhs


def garding_gap(Bs: Sequence, G: MetricPencil, tol: float = DEFAULT_TOL,
                equality_tol: float = EQUALITY_TOL) -> GardingGap:
    """D(B_1..B_m) against prod sigma_m(B_i)^{1/m} for B_i in Gamma_m.

    If the gap is within ``equality_tol * rhs`` the pairwise proportionality
    constants are attached as the equality witness (None entries where the
    pair is not proportional to 1e-9).
    """
    Bs = [HermitianForm(b) for b in Bs]
    m = len(Bs)
    if m < 1:
        raise ContractError("need at least one argument")
    require_gamma(Bs, G, m, tol)
    # same batched path as the campaigns, so recorded violations replay bit for bit
    lhs, rhs = (float(v[0]) for v in garding_gaps(np.stack([b.matrix for b in Bs])[None], G))
    gap = lhs - rhs
    witness = None
    if gap <= equality_tol * rhs:
        witness = {(i, j): proportionality(Bs[i], Bs[j])
                   for i in range(m) for j in range(i + 1, m)}
    return GardingGap(lhs, rhs, gap, witness)


def garding_gaps(stack: np.ndarray, G: MetricPencil):
    """Vectorised (lhs, rhs) for a stack of shape (K, m, n, n); no cone check."""
    m = stack.shape[-3]
    lhs = polarize(G, [stack[..., i, :, :] for i in range(m)], [1] * m)
    s = sigma_batch(stack, G, m)
    rhs = np.prod(np.abs(s) ** (1.0 / m) * np.sign(s), axis=-1)
    return lhs, rhs


def mixed_positivity(x1, rest: Sequence, G: MetricPencil, tol: float = DEFAULT_TOL) -> float:
    """D(x_1, x_2, ..., x_m) for x_1 in the closed cone, the rest strictly inside.

    The value is strictly positive whenever the preconditions hold.
    """
    x1 = HermitianForm(x1)
    rest = [HermitianForm(r) for r in rest]
    m = len(rest) + 1
    if x1.norm() <= 1e-14 * x1.n:
        raise DegenerateInputError("first argument is zero")
    require_gamma([x1], G, m, tol, what="closed-cone argument", closed=True)
    require_gamma(rest, G, m, tol, what="interior argument")
    return float(polarize(G, [x1] + rest))


@dataclass
class Representer:
    H: HermitianForm
    min_eigenvalue: float
    values: np.ndarray = field(repr=False)

    @property
    def positive(self) -> bool:
        return self.min_eigenvalue > 0


def representer_values(As: Sequence, G: MetricPencil, basis: Optional[RealBasis] = None):
    """D(A_1..A_{m-1}, e_i) for every element e_i of the real basis."""
    basis = basis or RealBasis(G.n)
    distinct, mult = _group([HermitianForm(a) for a in As])
    return polarize(G, distinct + [basis.matrices], mult + [1]), basis


def positive_representer(As: Sequence, G: MetricPencil, check: bool = True,
                         tol: float = DEFAULT_TOL) -> Representer:
    """The Hermitian H with D(A_1, ..., A_{m-1}, beta) = inner(H, beta).

    m = len(As) + 1.  For A_i in Gamma_m the matrix H is positive definite,
    i.e. the mixed (n-1, n-1)-form is strictly positive.
    """
    As = list(As)
    m = len(As) + 1
    if m > G.n:
        raise ContractError(f"degree {m} exceeds n={G.n}")
    if check:
        require_gamma(As, G, m, tol)
    vals, basis = representer_values(As, G)
    H = HermitianForm(basis.from_coords(vals / basis.sq_norms))
    lam = pencil_eigenvalues(H, G)
    return Representer(H, float(lam[0]), vals)


# -- concavity of g(t) = sigma_m(alpha + t beta)^{1/m} ----------------------

@dataclass
class ConcavityProfile:
    t: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    dg_fd: np.ndarray
    d2g_fd: np.ndarray

    @property
    def concave(self) -> bool:
        return bool(np.all(self.d2g <= 1e-9 * np.abs(self.g)))

    @property
    def strictly_concave(self) -> bool:
        return bool(np.all(self.d2g < 0))

    def fd_errors(self):
        """Relative deviation of the closed forms from finite differences."""
        e1 = np.abs(self.dg - self.dg_fd) / np.maximum(np.abs(self.dg), 1e-300)
        e2 = np.abs(self.d2g - self.d2g_fd) / np.maximum(np.abs(self.d2g), 1e-300)
        return e1, e2


def _g_closed(alpha, beta, G, m, t):
    x = alpha + t * beta
    s = sigma(x, G, m)
    d1 = float(polarize(G, [beta, x], [1, m - 1]))
    g = s ** (1.0 / m)
    dg = s ** (1.0 / m - 1.0) * d1
    if m < 2:
        return g, dg, 0.0
    d2 = float(polarize(G, [beta, x], [2, m - 2]))
    d2g = (m - 1) * s ** (1.0 / m - 1.0) * d2 - (m - 1) * s ** (1.0 / m - 2.0) * d1 * d1
    return g, dg, d2g


def concavity_profile(alpha, beta, G: MetricPencil, m: int, t_grid: Sequence[float],
                      h: float = 1e-4, tol: float = DEFAULT_TOL,
                      dps: int = 40) -> ConcavityProfile:
    """Tabulate g, g', g'' on ``t_grid`` (all t >= 0).

    g' and g'' come from the closed forms in terms of D(beta, x^(m-1)) and
    D(beta, beta, x^(m-2)) with x = alpha + t beta.  The finite-difference
    columns difference g itself with fourth-order stencils, centred where
    t >= 2h and one-sided forward below that; the step is ``h`` times the
    local length scale min(1, g/|g'|).  g is evaluated in ``dps``-digit arithmetic
    there, since at h = 1e-4 double-precision roundoff alone is ~1e-8 |g|.
    """
    alpha, beta = HermitianForm(alpha), HermitianForm(beta)
    require_gamma([alpha, beta], G, m, tol)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        raise ContractError("t grid must be non-negative")
    a, b = alpha.matrix, beta.matrix

    with mpmath.workdps(dps):
        Ginv = mpmath.inverse(mpmath.matrix(G.G.matrix.tolist()))
        Ma = Ginv * mpmath.matrix(a.tolist())
        Mb = Ginv * mpmath.matrix(b.tolist())

    def gval(t):
        return _esp_newton_mp(Ma + t * Mb, G.n, m) ** (mpmath.mpf(1) / m)

    rows = []
    with mpmath.workdps(dps):
        for t in t_grid:
            g, dg, d2g = _g_closed(alpha, beta, G, m, t)
            tt = mpmath.mpf(float(t))
            # near the cone boundary g varies on the scale g/|g'|
            hh = mpmath.mpf(h) * min(1.0, abs(g / dg)) if dg else mpmath.mpf(h)
            if tt >= 2 * hh:
                fm2, fm1, f0, fp1, fp2 = (gval(tt + k * hh) for k in (-2, -1, 0, 1, 2))
                dg_fd = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * hh)
                d2g_fd = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * hh * hh)
            else:
                f = [gval(tt + k * hh) for k in range(6)]
                dg_fd = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * hh)
                d2g_fd = (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4]
                          - 10 * f[5]) / (12 * hh * hh)
            rows.append((g, dg, d2g, float(dg_fd), float(d2g_fd)))
    arr = np.array(rows).reshape(-1, 5)
    return ConcavityProfile(t_grid, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4])
