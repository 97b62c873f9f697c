"""Flat complex torus C^n / (Z^n + i Z^n) on a periodic grid.

Real axes are ordered (x_1, ..., x_n, y_1, ..., y_n) with z_j = x_j + i y_j,
every period equal to 1 and N samples per axis.  A Fourier mode
exp(2 pi i (k.x + l.y)) is mapped by d/dz_j to pi (l_j + i k_j) and by
d/dzbar_j to -pi (l_j - i k_j), and dd^c psi is the Hermitian matrix field
with entries d^2 psi / dz_j dzbar_k (the convention dd^c = i d dbar).

Every (1,1)-class has a unique constant representative, so cohomology is
Herm(n) and integrals of top forms are grid means of the pointwise mixed
sigma values (the constant normalisation drops out of every sign and ratio).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import AliasingError, ContractError, PreconditionError
from .garding import positive_representer, require_gamma
from .herm import (DEFAULT_TOL, HermitianForm, MetricPencil, RealBasis,
                   _as_matrix, inner_batch, pencil_eigenvalues, proportionality)
from .hodge import gram_of
from .sympoly import polarize, sigma

MAX_POINTS = 2 ** 24
CHUNK = 1 << 15


def default_grid(n: int) -> int:
    return 32 if n <= 2 else 8 if n == 3 else 4


@dataclass(frozen=True)
class TorusContext:
    n: int
    N: int = 0

    def __post_init__(self):
        if self.N == 0:
            object.__setattr__(self, "N", default_grid(self.n))
        N = self.N
        if self.n < 1:
            raise ContractError("complex dimension must be positive")
        if N < 4 or N & (N - 1):
            raise ContractError(f"grid size {N} must be a power of two >= 4")
        if N ** (2 * self.n) > MAX_POINTS:
            raise ContractError(f"grid has {N ** (2 * self.n)} points, limit {MAX_POINTS}")

    @property
    def shape(self) -> tuple:
        return (self.N,) * (2 * self.n)

    @property
    def points(self) -> int:
        return self.N ** (2 * self.n)

    @property
    def axis_names(self) -> list:
        return [f"x{j + 1}" for j in range(self.n)] + [f"y{j + 1}" for j in range(self.n)]

    @cached_property
    def high_mask(self) -> np.ndarray:
        """Grid of modes with some |frequency| > N/4."""
        mask = np.zeros(self.shape, dtype=bool)
        for fr in self.frequencies():
            mask |= np.abs(fr) > self.N // 4
        return mask

    def frequencies(self) -> list:
        """Integer frequency arrays, one per real axis, broadcastable to the grid."""
        f = sfft.fftfreq(self.N, d=1.0 / self.N)
        out = []
        for ax in range(2 * self.n):
            shape = [1] * (2 * self.n)
            shape[ax] = self.N
            out.append(f.reshape(shape))
        return out

    def wavevector(self) -> list:
        """w_j = l_j + i k_j for j = 1..n (k along x_j, l along y_j)."""
        fr = self.frequencies()
        return [fr[self.n + j] + 1j * fr[j] for j in range(self.n)]

    def coordinates(self) -> list:
        x = np.arange(self.N) / self.N
        return np.meshgrid(*([x] * (2 * self.n)), indexing="ij")


class ScalarField:
    """Real samples on the torus grid with a cached spectrum."""

    def __init__(self, ctx: TorusContext, values):
        values = np.asarray(values, dtype=float)
        if values.shape != ctx.shape:
            raise ContractError(f"field shape {values.shape} != grid {ctx.shape}")
        values.setflags(write=False)
        self.ctx = ctx
        self.values = values
        self._spec = None

    @classmethod
    def from_spectrum(cls, ctx: TorusContext, spec: np.ndarray) -> "ScalarField":
        f = cls(ctx, np.real(sfft.ifftn(spec)))
        return f

    @classmethod
    def zeros(cls, ctx: TorusContext) -> "ScalarField":
        return cls(ctx, np.zeros(ctx.shape))

    @property
    def spectrum(self) -> np.ndarray:
        if self._spec is None:
            self._spec = sfft.fftn(self.values)
        return self._spec

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def sup(self) -> float:
        return float(np.abs(self.values).max())

    def __add__(self, other):
        return ScalarField(self.ctx, self.values + other.values)

    def __neg__(self):
        return ScalarField(self.ctx, -self.values)

    def __sub__(self, other):
        return ScalarField(self.ctx, self.values - other.values)


def check_band_limit(field: ScalarField, rel_tol: float = 1e-12):
    """Raise AliasingError if energy sits at |frequency| > N/4 on any axis."""
    ctx = field.ctx
    spec = field.spectrum
    total = np.abs(spec).max()
    if total == 0:
        return
    if np.abs(spec[ctx.high_mask]).max(initial=0.0) > rel_tol * total:
        raise AliasingError(f"field has energy above N/4 = {ctx.N // 4}")


def ddc(psi: ScalarField, ctx: Optional[TorusContext] = None) -> np.ndarray:
    """Pointwise dd^c psi as an array of shape grid + (n, n)."""
    ctx = ctx or psi.ctx
    check_band_limit(psi)
    w = ctx.wavevector()
    spec = psi.spectrum
    n = ctx.n
    out = np.empty(ctx.shape + (n, n), dtype=complex)
    for j in range(n):
        for k in range(j, n):
            sym = -np.pi ** 2 * w[j] * np.conj(w[k])
            vals = sfft.ifftn(sym * spec)
            if j == k:
                out[..., j, j] = vals.real
            else:
                out[..., j, k] = vals
                out[..., k, j] = np.conj(vals)
    return out


@dataclass
class FormField:
    """Closed real (1,1)-form C + dd^c psi; C is the cohomology class."""

    ctx: TorusContext
    base: HermitianForm
    potential: Optional[ScalarField] = None

    def __post_init__(self):
        self.base = HermitianForm(self.base)
        if self.base.n != self.ctx.n:
            raise ContractError("base form dimension does not match the torus")

    def evaluate(self) -> np.ndarray:
        if self.potential is None:
            return np.broadcast_to(self.base.matrix, self.ctx.shape + self.base.matrix.shape)
        return self.base.matrix + ddc(self.potential, self.ctx)

    @property
    def constant(self) -> bool:
        return self.potential is None


def _pointwise_polar(G: MetricPencil, fields: Sequence[np.ndarray], npts: int, n: int):
    flat = [f.reshape(-1, n, n) if f.ndim > 2 else f for f in fields]
    out = np.empty(npts)
    for s in range(0, npts, CHUNK):
        sl = [f[s:s + CHUNK] if f.ndim == 3 else f for f in flat]
        out[s:s + CHUNK] = polarize(G, sl, [1] * len(sl))
    return out


def integral_pairing(fields: Sequence, G: MetricPencil, ctx: TorusContext) -> float:
    """Grid mean of D(f_1(x), ..., f_m(x)); m = len(fields), the rest are omega."""
    fields = [f if isinstance(f, FormField) else FormField(ctx, f) for f in fields]
    for f in fields:
        if f.ctx != ctx:
            raise ContractError("field lives on a different torus")
    if G.n != ctx.n:
        raise ContractError("metric dimension does not match the torus")
    if all(f.constant for f in fields):
        return float(polarize(G, [f.base for f in fields], [1] * len(fields)))
    vals = [f.base.matrix if f.constant else f.evaluate() for f in fields]
    pts = _pointwise_polar(G, vals, ctx.points, ctx.n)
    return float(np.mean(pts))


def _symbol(H: np.ndarray, ctx: TorusContext) -> np.ndarray:
    """Fourier symbol of phi -> inner(H, dd^c phi): -pi^2 w^H H w."""
    w = ctx.wavevector()
    n = ctx.n
    s = 0.0
    for j in range(n):
        for p in range(n):
            s = s + H[j, p] * np.conj(w[j]) * w[p]
    return -np.pi ** 2 * np.real(s)


def apply_operator(H, phi: ScalarField) -> ScalarField:
    """inner(H, dd^c phi) evaluated pointwise in physical space."""
    return ScalarField(phi.ctx, pair_constant(H, ddc(phi)))


def pair_constant(H, values: np.ndarray) -> np.ndarray:
    """inner(H, values[x]) at every point, for a constant H (one BLAS product)."""
    H = _as_matrix(H)
    n = H.shape[-1]
    flat = values.reshape(-1, n * n)
    return np.real(flat @ H.T.reshape(n * n)).reshape(values.shape[:-2])


def laplacian_solve(H, f: ScalarField, ctx: Optional[TorusContext] = None,
                    mean_tol: float = 1e-10) -> ScalarField:
    """Zero-mean phi with inner(H, dd^c phi) = f for positive definite H."""
    ctx = ctx or f.ctx
    Hm = _as_matrix(H)
    if np.linalg.eigvalsh(Hm)[0] <= 0:
        raise PreconditionError("operator matrix is not positive definite")
    if abs(f.mean) > mean_tol * f.sup():
        raise PreconditionError(f"right-hand side has nonzero mean {f.mean:.3e}")
    s = _symbol(Hm, ctx)
    s.flat[0] = 1.0
    spec = f.spectrum / s
    spec.flat[0] = 0.0
    return ScalarField.from_spectrum(ctx, spec)


def random_potential(rng: np.random.Generator, ctx: TorusContext, modes: int = 6,
                     amplitude: float = 1.0) -> ScalarField:
    """Real band-limited potential: a few modes with |frequency| < N/4 per axis."""
    spec = np.zeros(ctx.shape, dtype=complex)
    lim = max(ctx.N // 4 - 1, 1)
    for _ in range(modes):
        xi = rng.integers(-lim, lim + 1, size=2 * ctx.n)
        if not np.any(xi):
            continue
        c = (rng.standard_normal() + 1j * rng.standard_normal()) * amplitude
        idx = tuple(int(v) % ctx.N for v in xi)
        neg = tuple(int(-v) % ctx.N for v in xi)
        spec[idx] += c
        spec[neg] += np.conj(c)
    return ScalarField.from_spectrum(ctx, spec * ctx.points / 2)


def field_coords(values: np.ndarray, basis: RealBasis) -> np.ndarray:
    return basis.coords(values).reshape(-1, basis.dim)


@dataclass
class TorusReport:
    n: int
    m: int
    N: int
    beta_class: HermitianForm = field(repr=False)
    representer_min_eig: float = 0.0
    rhs_mean: float = 0.0
    solver_residual: float = 0.0
    primitivity_residual: float = 0.0
    pointwise_max: float = 0.0
    pointwise_scale: float = 1.0
    integrated: float = 0.0
    constant_model: float = 0.0
    gauge_residual: float = 0.0

    @property
    def relative_mismatch(self) -> float:
        d = abs(self.integrated - self.constant_model)
        return d / max(abs(self.constant_model), self.pointwise_scale * 1e-12, 1e-300)

    @property
    def pointwise_nonpositive(self) -> bool:
        return self.pointwise_max <= 1e-8 * self.pointwise_scale

    def checks(self) -> dict:
        return {
            "representer_positive": self.representer_min_eig > 0,
            "solver_residual": self.solver_residual <= 1e-8,
            "primitive_pointwise": self.primitivity_residual <= 1e-8,
            "pointwise_nonpositive": self.pointwise_nonpositive,
            "integrated_matches": self.relative_mismatch <= 1e-6
                                  or abs(self.integrated - self.constant_model) <= 1e-12 * self.pointwise_scale,
        }

    @property
    def ok(self) -> bool:
        return all(self.checks().values())


def verify_theorem_a_torus(alphas: Sequence, G: MetricPencil, beta_class, psi: Optional[ScalarField],
                           ctx: TorusContext, tol: float = DEFAULT_TOL) -> TorusReport:
    """Run the proof of the mixed Hodge-index inequality on the torus.

    beta_class is first projected along alpha_{m-1} onto the primitive
    hyperplane; its representative beta + dd^c psi is then corrected by
    dd^c phi, phi solving inner(H, beta + dd^c(psi + phi)) = 0 with H the
    positive representer of D(alpha_1, ..., alpha_{m-1}, .).  The pointwise
    values D(Omega, beta_phi, beta_phi) are checked non-positive and their
    mean compared with the constant-model Q(beta, beta).
    """
    alphas = [HermitianForm(a) for a in alphas]
    m = len(alphas) + 1
    if G.n != ctx.n:
        raise ContractError("metric dimension does not match the torus")
    require_gamma(alphas, G, m, tol)
    rep = positive_representer(alphas, G, check=False)
    H = rep.H.matrix
    last = alphas[-1]
    beta = HermitianForm(beta_class)
    hb, ha = float(inner_batch(H, beta.matrix)), float(inner_batch(H, last.matrix))
    beta = HermitianForm(beta.matrix - (hb / ha) * last.matrix)

    basis = RealBasis(ctx.n)
    gram = gram_of(alphas[:-1], G, basis)
    bc = basis.coords(beta)
    const_q = float(bc @ gram @ bc)

    psi = psi if psi is not None else ScalarField.zeros(ctx)
    ddc_psi = ddc(psi, ctx)
    f_vals = -(pair_constant(H, ddc_psi) + inner_batch(H, beta.matrix))
    rhs_mean = float(np.mean(f_vals))
    f = ScalarField(ctx, f_vals - rhs_mean)
    phi = laplacian_solve(H, f, ctx)
    ddc_phi = ddc(phi, ctx)
    fscale = max(f.sup(), 1e-300)
    applied = pair_constant(H, ddc_phi)
    solver_res = float(np.abs(applied - f.values).max()) / fscale if f.sup() > 0 \
        else float(np.abs(applied).max())

    beta_hat = beta.matrix + ddc_psi
    beta_phi = beta_hat + ddc_phi
    # residuals are measured against the size of the input representative
    flat = beta_hat.reshape(-1, ctx.n * ctx.n)
    size = max(float(np.sqrt((flat.real ** 2 + flat.imag ** 2).sum(axis=1).max())), 1e-300)
    prim = np.abs(pair_constant(H, beta_phi))
    prim_res = float(prim.max()) / (np.linalg.norm(H) * size)

    coords = field_coords(beta_phi, basis)
    q = np.sum((coords @ gram) * coords, axis=1)
    gscale = float(np.abs(np.linalg.eigvalsh(gram)).max())
    qscale = gscale * size ** 2

    gauge = psi + phi
    gauge_res = float(np.abs(gauge.values - gauge.mean).max()) / max(psi.sup(), 1e-300) \
        if psi.sup() > 0 else float(np.abs(gauge.values).max())

    return TorusReport(
        n=ctx.n, m=m, N=ctx.N, beta_class=beta,
        representer_min_eig=rep.min_eigenvalue, rhs_mean=rhs_mean,
        solver_residual=solver_res, primitivity_residual=prim_res,
        pointwise_max=float(q.max()), pointwise_scale=qscale,
        integrated=float(np.mean(q)), constant_model=const_q, gauge_residual=gauge_res)


@dataclass
class HessianCheck:
    c: np.ndarray                 # per-class sigma_m ratio
    pointwise_deviation: float    # max |sigma_m(alpha(x)) - c| / c
    integrated: float             # grid mean of D(alpha_1, ..., alpha_m)
    rhs: float                    # prod c_k^{1/m} * volume
    equality: bool
    ratios: dict

    @property
    def gap(self) -> float:
        return self.integrated - self.rhs

    def holds(self, tol: float = DEFAULT_TOL) -> bool:
        return self.gap >= -tol * self.rhs


def hessian_constant_check(alphas: Sequence, G: MetricPencil, ctx: TorusContext, m: Optional[int] = None,
                           tol: float = DEFAULT_TOL, equality_tol: float = 1e-7) -> HessianCheck:
    """Global Garding inequality from the pointwise one, via constant Hessian solutions.

    On the torus the constant representative alpha_k solves
    alpha_k^m ^ omega^{n-m} = c_k omega^n with c_k = sigma_m(alpha_k); a
    single class is repeated m times.
    """
    alphas = [HermitianForm(a) for a in alphas]
    if m is None:
        m = len(alphas)
    if len(alphas) == 1:
        alphas = alphas * m
    if len(alphas) != m:
        raise ContractError(f"need 1 or m={m} classes, got {len(alphas)}")
    require_gamma(alphas, G, m, tol)
    volume = 1.0
    c = []
    dev = 0.0
    for a in alphas:
        ck = integral_pairing([a] * m, G, ctx) / volume
        point = sigma(a, G, m)
        dev = max(dev, abs(point - ck) / ck)
        c.append(ck)
    c = np.array(c)
    integrated = integral_pairing(alphas, G, ctx)
    rhs = float(np.prod(c ** (1.0 / m))) * volume
    equality = integrated - rhs <= equality_tol * rhs
    ratios = {}
    for i in range(m):
        for j in range(i + 1, m):
            if proportionality(alphas[i], alphas[j]) is not None:
                ratios[(i, j)] = float((c[i] / c[j]) ** (1.0 / m))
    return HessianCheck(c, dev, integrated, rhs, bool(equality), ratios)


# -- snapshot export ---------------------------------------------------------

MAGIC = b"GHXFLD01"


def export_field(path, values: np.ndarray, ctx: TorusContext, name: str = "field",
                 description: str = "") -> tuple:
    """Write ``values`` (grid shape, optionally + component axes) as flat binary.

    Layout: 8-byte magic, then little-endian int64 n, N, component count,
    then float64 little-endian samples in C order over (x_1..x_n, y_1..y_n,
    components); complex data is split into interleaved (re, im) components.
    A JSON sidecar ``<path>.json`` describes the contents.
    """
    path = Path(path)
    arr = np.asarray(values)
    if arr.shape[: 2 * ctx.n] != ctx.shape:
        raise ContractError("values do not match the grid")
    comp_shape = list(arr.shape[2 * ctx.n:])
    complex_data = np.iscomplexobj(arr)
    if complex_data:
        arr = np.stack([arr.real, arr.imag], axis=-1)
    data = np.ascontiguousarray(arr, dtype="<f8")
    ncomp = int(np.prod(data.shape[2 * ctx.n:])) if data.ndim > 2 * ctx.n else 1
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<qqq", ctx.n, ctx.N, ncomp))
        fh.write(data.tobytes())
    sidecar = {
        "schema": "ghx/1",
        "name": name,
        "description": description,
        "n": ctx.n,
        "N": ctx.N,
        "axis_order": ctx.axis_names,
        "component_shape": comp_shape,
        "complex": complex_data,
        "components": ncomp,
        "dtype": "float64-le",
        "header_bytes": len(MAGIC) + 24,
    }
    side = path.with_name(path.name + ".json")
    side.write_text(json.dumps(sidecar, indent=2) + "\n")
    return path, side


def read_field(path) -> tuple:
    """Inverse of :func:`export_field`; returns (values, TorusContext)."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:8] != MAGIC:
        raise ContractError("not a ghx field snapshot")
    n, N, ncomp = struct.unpack("<qqq", raw[8:32])
    ctx = TorusContext(int(n), int(N))
    data = np.frombuffer(raw[32:], dtype="<f8")
    side = path.with_name(path.name + ".json")
    meta = json.loads(side.read_text()) if side.exists() else None
    if meta is not None:
        shape = ctx.shape + tuple(meta["component_shape"]) + ((2,) if meta["complex"] else ())
        vals = data.reshape(shape)
        if meta["complex"]:
            vals = vals[..., 0] + 1j * vals[..., 1]
    else:
        vals = data.reshape(ctx.shape + ((ncomp,) if ncomp > 1 else ()))
    return vals, ctx
