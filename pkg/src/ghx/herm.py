"""Hermitian matrices, metric pencils and the real coordinate basis of Herm(n).

A constant-coefficient real (1,1)-form ``i * sum A_jk dz_j ^ dzbar_k`` is
represented by its Hermitian coefficient matrix ``A``.  The reference Kahler
form is a positive definite ``G`` wrapped in a :class:`MetricPencil`, and all
eigenvalues are taken relative to it, i.e. as roots of ``det(A - lam G)``.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ContractError, DegenerateInputError, PreconditionError

MAX_DIM = 16
CONDITION_LIMIT = 1e10
DEFAULT_TOL = 1e-9


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, HermitianForm):
        return x.matrix
    return np.asarray(x, dtype=complex)


def hermitize(a: np.ndarray) -> np.ndarray:
    """Rebuild a (stack of) Hermitian matrices from upper triangle + real diagonal."""
    a = np.asarray(a, dtype=complex)
    upper = np.triu(a, 1)
    out = upper + np.conj(np.swapaxes(upper, -1, -2))
    idx = np.arange(a.shape[-1])
    out[..., idx, idx] = a[..., idx, idx].real
    return out


class HermitianForm:
    """An n x n complex Hermitian matrix.

    Only the upper triangle and the real part of the diagonal of ``entries``
    are read; the lower triangle is always the conjugate mirror, so the
    Hermitian symmetry holds exactly.  Instances are immutable.
    """

    __slots__ = ("_m",)

    def __init__(self, entries):
        if isinstance(entries, HermitianForm):
            m = entries.matrix
        else:
            a = np.asarray(entries, dtype=complex)
            if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
                raise ContractError(f"expected a square matrix, got shape {a.shape}")
            m = hermitize(a)
        m = np.array(m, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "_m", m)

    def __setattr__(self, name, value):
        raise AttributeError("HermitianForm is immutable")

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def n(self) -> int:
        return self._m.shape[0]

    @classmethod
    def identity(cls, n: int) -> "HermitianForm":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, n: int) -> "HermitianForm":
        return cls(np.zeros((n, n)))

    @classmethod
    def diag(cls, values: Sequence[float]) -> "HermitianForm":
        return cls(np.diag(np.asarray(values, dtype=float)))

    def __array__(self, dtype=None, copy=None):
        return np.array(self._m, dtype=dtype) if dtype is not None else self._m.copy()

    def __add__(self, other):
        return HermitianForm(self._m + _as_matrix(other))

    def __sub__(self, other):
        return HermitianForm(self._m - _as_matrix(other))

    def __neg__(self):
        return HermitianForm(-self._m)

    def __mul__(self, c):
        c = float(c)
        return HermitianForm(c * self._m)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return HermitianForm(self._m / float(c))

    def __eq__(self, other):
        if not isinstance(other, HermitianForm):
            return NotImplemented
        return self._m.shape == other._m.shape and bool(np.all(self._m == other._m))

    __hash__ = None

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self._m))

    def __repr__(self):
        return f"HermitianForm(n={self.n}, {np.array2string(self._m, precision=4)})"


class MetricPencil:
    """Positive definite reference form G with its Cholesky factor G = L L^H.

    Construction fails if G is not positive definite or if its condition
    number exceeds ``CONDITION_LIMIT``.
    """

    def __init__(self, G):
        G = HermitianForm(G)
        if G.n > MAX_DIM:
            raise ContractError(f"dimension {G.n} exceeds supported bound {MAX_DIM}")
        ev = np.linalg.eigvalsh(G.matrix)
        if ev[0] <= 0:
            raise PreconditionError(f"metric is not positive definite (min eigenvalue {ev[0]:.3e})")
        if ev[-1] / ev[0] > CONDITION_LIMIT:
            raise PreconditionError(
                f"metric condition number {ev[-1] / ev[0]:.3e} exceeds {CONDITION_LIMIT:.0e}")
        L = np.linalg.cholesky(G.matrix)
        gnorm = np.linalg.norm(G.matrix)
        if np.linalg.norm(L @ L.conj().T - G.matrix) > 1e-12 * gnorm:
            raise PreconditionError("Cholesky reconstruction error too large")
        Linv = solve_triangular(L, np.eye(G.n), lower=True)
        L.setflags(write=False)
        Linv.setflags(write=False)
        self.G = G
        self.factor = L
        self.inv_factor = Linv

    @classmethod
    def identity(cls, n: int) -> "MetricPencil":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.G.n

    def reduce(self, a) -> np.ndarray:
        """L^{-1} A L^{-H}, batched over leading axes; result exactly Hermitian."""
        a = _as_matrix(a)
        if a.shape[-1] != self.n or a.shape[-2] != self.n:
            raise ContractError(f"dimension mismatch: matrix {a.shape[-2:]} vs metric n={self.n}")
        r = self.inv_factor @ a @ self.inv_factor.conj().T
        return 0.5 * (r + np.conj(np.swapaxes(r, -1, -2)))

    def __repr__(self):
        return f"MetricPencil(n={self.n})"


def _check_same_dim(*forms):
    dims = {_as_matrix(f).shape[-1] for f in forms}
    if len(dims) != 1:
        raise ContractError(f"dimension mismatch: {sorted(dims)}")


def pencil_eigenvalues(A, G: MetricPencil) -> np.ndarray:
    """Roots of det(A - lam G) in ascending order."""
    return np.linalg.eigvalsh(G.reduce(A))


def inner(A, B) -> float:
    """Real Frobenius pairing Re tr(A B)."""
    a, b = _as_matrix(A), _as_matrix(B)
    if a.shape != b.shape:
        raise ContractError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # tr(AB) = sum_jk A_jk B_kj
    return float(np.real(np.sum(a * b.T)))


def inner_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("...jk,...kj->...", a, b))


def proportionality(A, B, tol: float = DEFAULT_TOL) -> Optional[float]:
    """Return c with A = c B to relative tolerance ``tol``, or None."""
    _check_same_dim(A, B)
    a, b = _as_matrix(A), _as_matrix(B)
    nb = np.linalg.norm(b)
    if nb <= 1e-14 * b.shape[-1]:
        raise DegenerateInputError("reference matrix is numerically zero")
    c = inner(a, b) / inner(b, b)
    if np.linalg.norm(a - c * b) <= tol * (np.linalg.norm(a) + nb):
        return float(c)
    return None


# -- real coordinates on Herm(n) ------------------------------------------

class RealBasis:
    """Ordered real basis of the n^2-dimensional space of Hermitian matrices.

    Order: E_jj for j ascending, then for each pair j < k in lexicographic
    order the symmetric unit E_jk + E_kj followed by the antisymmetric unit
    i (E_jk - E_kj).  The basis is orthogonal for :func:`inner`; diagonal
    units have squared norm 1 and off-diagonal units squared norm 2.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ContractError("n must be positive")
        self.n = n
        mats = np.zeros((n * n, n, n), dtype=complex)
        for j in range(n):
            mats[j, j, j] = 1.0
        pos = n
        pairs = []
        for j in range(n):
            for k in range(j + 1, n):
                mats[pos, j, k] = mats[pos, k, j] = 1.0
                mats[pos + 1, j, k] = 1j
                mats[pos + 1, k, j] = -1j
                pairs.append((j, k))
                pos += 2
        mats.setflags(write=False)
        self.matrices = mats
        self.pairs = pairs
        self.sq_norms = np.where(np.arange(n * n) < n, 1.0, 2.0)

    @property
    def dim(self) -> int:
        return self.n * self.n

    @property
    def elements(self) -> list:
        return [HermitianForm(m) for m in self.matrices]

    def __len__(self):
        return self.dim

    def coords(self, A) -> np.ndarray:
        """Real coordinate vector(s) of Hermitian matrix(es), batched."""
        a = _as_matrix(A)
        n = self.n
        out = np.empty(a.shape[:-2] + (n * n,))
        idx = np.arange(n)
        out[..., :n] = a[..., idx, idx].real
        if self.pairs:
            j, k = np.array(self.pairs).T
            off = a[..., j, k]
            out[..., n::2] = off.real
            out[..., n + 1::2] = off.imag
        return out

    def from_coords(self, v) -> np.ndarray:
        """Hermitian matrix (stack) with the given coordinates."""
        v = np.asarray(v, dtype=float)
        return np.tensordot(v, self.matrices, axes=([-1], [0]))

    def form(self, v) -> HermitianForm:
        return HermitianForm(self.from_coords(v))


# -- plain-text matrix format ---------------------------------------------

class MatrixFormatError(ContractError):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column


def _signed_float(s: str) -> float:
    if s in ("", "+"):
        return 1.0
    if s == "-":
        return -1.0
    return float(s)


def parse_complex(token: str) -> complex:
    """Parse ``a+bi`` style tokens: ``3``, ``-1.5``, ``2i``, ``-i``, ``1e-3-2i``."""
    t = token.strip().lower()
    if not t or "j" in t or "_" in t:
        raise ValueError(f"bad complex literal {token!r}")
    if not t.endswith("i"):
        return complex(float(t), 0.0)
    body = t[:-1]
    split = None
    for pos in range(len(body) - 1, 0, -1):
        if body[pos] in "+-" and body[pos - 1] != "e":
            split = pos
            break
    try:
        if split is None:
            return complex(0.0, _signed_float(body))
        return complex(float(body[:split]), _signed_float(body[split:]))
    except ValueError:
        raise ValueError(f"bad complex literal {token!r}") from None


def parse_matrix_text(text: str, herm_tol: float = 1e-12) -> HermitianForm:
    """Parse the dimension-line-then-rows format into a HermitianForm.

    Blank lines and ``#`` comments are ignored.  Errors name the 1-based
    line and column (token position) of the offending entry.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise MatrixFormatError("empty matrix file")
    lineno, head = rows[0]
    if len(head) != 1:
        raise MatrixFormatError("dimension line must hold a single integer", lineno, 1)
    try:
        n = int(head[0])
    except ValueError:
        raise MatrixFormatError(f"bad dimension {head[0]!r}", lineno, 1) from None
    if not 1 <= n <= MAX_DIM:
        raise MatrixFormatError(f"dimension {n} outside 1..{MAX_DIM}", lineno, 1)
    body = rows[1:]
    if len(body) != n:
        last = body[-1][0] if body else lineno
        raise MatrixFormatError(f"expected {n} matrix rows, found {len(body)}", last)
    a = np.zeros((n, n), dtype=complex)
    for r, (lineno, toks) in enumerate(body):
        if len(toks) != n:
            raise MatrixFormatError(f"expected {n} entries, found {len(toks)}", lineno,
                                    min(len(toks), n) + 1)
        for c, tok in enumerate(toks):
            try:
                a[r, c] = parse_complex(tok)
            except ValueError as exc:
                raise MatrixFormatError(str(exc), lineno, c + 1) from None
            if not np.isfinite(a[r, c]):
                raise MatrixFormatError(f"non-finite entry {tok!r}", lineno, c + 1)
    scale = max(np.abs(a).max(), 1.0)
    for r in range(n):
        if abs(a[r, r].imag) > herm_tol * scale:
            raise MatrixFormatError("diagonal entry must be real", body[r][0], r + 1)
        for c in range(r):
            if abs(a[r, c] - np.conj(a[c, r])) > herm_tol * scale:
                raise MatrixFormatError("matrix is not Hermitian", body[r][0], c + 1)
    return HermitianForm(a)


def format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def format_matrix_text(A) -> str:
    a = _as_matrix(A)
    lines = [str(a.shape[0])]
    lines += [" ".join(format_complex(z) for z in row) for row in a]
    return "\n".join(lines) + "\n"
