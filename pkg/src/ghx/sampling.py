"""Seeded random generation: Haar unitaries, Gamma_m members, band-limited data.

Campaign sample ``i`` under seed ``s`` always draws from ``stream(s, i)``, a
Philox (counter-based) generator keyed by ``SeedSequence([s, i])``, so a
campaign can be split across workers without changing any sample.
"""

from __future__ import annotations

import numpy as np

from .herm import MetricPencil
from .sympoly import esp_all, random_hermitian

__all__ = ["stream", "haar_unitary", "sample_gamma_eigenvalues", "sample_gamma",
           "random_hermitian", "random_metric", "sample_psd"]

DEFAULT_SHIFT = 0.5
DEFAULT_MIN_MARGIN = 1e-3


def stream(seed: int, index: int = 0, *subkey: int) -> np.random.Generator:
    """Generator for sample ``index``; ``subkey`` separates independent draws of one sample."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    key = [seed, int(index), *(int(k) for k in subkey)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def haar_unitary(rng: np.random.Generator, n: int, size=None) -> np.ndarray:
    """Haar-distributed unitary matrices via QR with the phase correction."""
    shape = (n, n) if size is None else tuple(np.atleast_1d(size)) + (n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def sample_gamma_eigenvalues(rng, n, m, count, shift=DEFAULT_SHIFT,
                             min_margin=DEFAULT_MIN_MARGIN) -> np.ndarray:
    """Rejection-sample ``count`` vectors lam with e_l(lam) > min_margin * e_l(|lam|), l <= m."""
    out = [np.empty((0, n))]
    have = 0
    while have < count:
        batch = max(64, 2 * (count - have))
        lam = rng.standard_normal((batch, n)) + shift
        e = esp_all(lam, m)[:, 1:]
        scale = esp_all(np.abs(lam), m)[:, 1:]
        ok = np.all(e > min_margin * scale, axis=1)
        acc = lam[ok][: count - have]
        out.append(acc)
        have += acc.shape[0]
    return np.concatenate(out, axis=0)


def sample_gamma(rng, G: MetricPencil, m: int, size=None, shift=DEFAULT_SHIFT,
                 min_margin=DEFAULT_MIN_MARGIN) -> np.ndarray:
    """Random members of Gamma_m relative to G.

    Pencil eigenvalues are drawn by rejection from shifted Gaussians and
    placed in a Haar-random G-orthonormal frame: A = L U diag(lam) U^H L^H.
    Returns an (n, n) matrix if ``size`` is None, else a stack.
    """
    n = G.n
    count = 1 if size is None else int(np.prod(size))
    lam = sample_gamma_eigenvalues(rng, n, m, count, shift, min_margin)
    U = haar_unitary(rng, n, count)
    LU = G.factor @ U
    a = (LU * lam[:, None, :]) @ np.conj(np.swapaxes(LU, -1, -2))
    a = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    if size is None:
        return a[0]
    return a.reshape(tuple(np.atleast_1d(size)) + (n, n))


def sample_psd(rng, n: int, rank=None) -> np.ndarray:
    """Nonzero positive semidefinite matrix, optionally of given rank."""
    k = n if rank is None else rank
    v = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    return v @ v.conj().T


def random_metric(rng, n: int, spread: float = 1.0) -> MetricPencil:
    """Random positive definite metric with eigenvalues in [e^-spread, e^spread]."""
    U = haar_unitary(rng, n)
    lam = np.exp(rng.uniform(-spread, spread, n))
    return MetricPencil((U * lam) @ U.conj().T)
