"""Dense complex matrix kernel.

Matrices are plain ``complex128`` numpy arrays; :func:`cmatrix` is the single
entry point that validates shape and finiteness.  Everything here is thin
wrapping of LAPACK through numpy/scipy with the error vocabulary used by the
rest of the package.
"""
import warnings

import numpy as np
import scipy.linalg as sla

from .errors import NonConvergence, NotHermitian, NotPositiveDefinite, SchemaError, Singular

PIVOT_RTOL = 1e-13


def cmatrix(data, shape=None, name="matrix"):
    """Coerce ``data`` to a finite 2-D complex128 array.

    Scalars become 1x1 matrices and 1-D input becomes a column.  ``shape`` may
    fix either dimension (use ``None`` as a wildcard).
    """
    M = np.array(data, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    elif M.ndim == 1:
        M = M.reshape(-1, 1)
    elif M.ndim != 2:
        raise SchemaError(f"{name}: expected a 2-D array, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise SchemaError(f"{name}: entries must be finite")
    if shape is not None:
        for axis, want in enumerate(shape):
            if want is not None and M.shape[axis] != want:
                raise SchemaError(f"{name}: expected shape {shape}, got {M.shape}")
    return M


def frozen(M):
    M = np.array(M, dtype=np.complex128)
    M.setflags(write=False)
    return M


def norm(M):
    """Spectral norm (largest singular value); 0 for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def herm(H):
    H = np.asarray(H)
    return (H + H.conj().T) / 2


def cholesky(H, tol=1e-9):
    """Lower Cholesky factor of a Hermitian positive definite matrix.

    Raises :class:`NotHermitian` if ``||H - H*|| > tol ||H||`` and
    :class:`NotPositiveDefinite` if elimination hits a non-positive pivot.
    The factor is of the symmetrized matrix ``(H + H*)/2``.
    """
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise SchemaError(f"cholesky: square matrix required, got {H.shape}")
    if H.shape[0] == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    scale = norm(H)
    if norm(H - H.conj().T) > tol * scale:
        raise NotHermitian(f"asymmetry {norm(H - H.conj().T):.3e} exceeds {tol:.1e}*{scale:.3e}")
    try:
        L = np.linalg.cholesky(herm(H))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if not np.all(np.isfinite(L)) or np.any(L.diagonal().real <= 0):
        raise NotPositiveDefinite("non-positive pivot")
    return L


def is_positive_definite(H, tol=1e-9):
    """Cholesky-based positivity test of a Hermitian matrix (asymmetry beyond
    ``tol`` relative counts as failure)."""
    H = np.asarray(H, dtype=np.complex128)
    if H.shape[0] == 0:
        return True
    if np.linalg.norm(H - H.conj().T) > tol * np.linalg.norm(H):
        return False
    try:
        L = np.linalg.cholesky(herm(H))
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(np.isfinite(L)))


def chol_solve(L, B):
    """Solve ``(L L*) X = B`` given the lower factor ``L``."""
    Y = sla.solve_triangular(L, B, lower=True)
    return sla.solve_triangular(L.conj().T, Y, lower=False)


def whiten(L, B):
    """Return ``L^{-1} B`` so that ``B* (LL*)^{-1} B = Y* Y``."""
    return sla.solve_triangular(L, B, lower=True)


def solve(A, B):
    """Solve ``A X = B`` by LU with partial pivoting.

    Raises :class:`Singular` when a pivot falls below ``PIVOT_RTOL * ||A||``.
    """
    A = np.asarray(A, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SchemaError(f"solve: square matrix required, got {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise SchemaError(f"solve: row mismatch {A.shape} vs {B.shape}")
    n = A.shape[0]
    if n == 0:
        return np.zeros(B.shape, dtype=np.complex128)
    scale = np.max(np.abs(A))
    if scale == 0:
        raise Singular("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    pivots = np.abs(lu.diagonal())
    if pivots.min() <= PIVOT_RTOL * scale * n:
        raise Singular(f"pivot {pivots.min():.3e} below threshold")
    return sla.lu_solve((lu, piv), B, check_finite=False)


def inv(A):
    A = np.asarray(A)
    return solve(A, np.eye(A.shape[0], dtype=np.complex128))


def eigvals(A):
    A = np.asarray(A, dtype=np.complex128)
    if A.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from None


def lmin(H):
    """Smallest eigenvalue of the Hermitian part; ``inf`` for empty input."""
    H = np.asarray(H)
    if H.shape[0] == 0:
        return float("inf")
    return float(np.linalg.eigvalsh(herm(H))[0])


def eig_condition(A):
    """Eigenvector matrix of ``A`` and its 2-norm condition number."""
    A = np.asarray(A, dtype=np.complex128)
    if A.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128), np.zeros((0, 0), dtype=np.complex128), 1.0
    w, V = np.linalg.eig(A)
    V = V / np.linalg.norm(V, axis=0)
    s = np.linalg.svd(V, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    return w, V, cond


def sqrtm_psd(H):
    """Principal square root of a Hermitian positive semidefinite matrix."""
    w, U = np.linalg.eigh(herm(H))
    w = np.clip(w, 0.0, None)
    return (U * np.sqrt(w)) @ U.conj().T


def inv_sqrtm_pd(H):
    w, U = np.linalg.eigh(herm(H))
    if w[0] <= 0:
        raise NotPositiveDefinite(f"min eigenvalue {w[0]:.3e}")
    return (U / np.sqrt(w)) @ U.conj().T


def signature_matrix(m1, m2):
    return np.diag(np.r_[np.ones(m1), -np.ones(m2)]).astype(np.complex128)


# JSON encoding: complex scalar -> [re, im], matrix -> list of rows

def encode_complex(x):
    x = complex(x)
    return [float(x.real), float(x.imag)]


def decode_complex(obj, name="value"):
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if (isinstance(obj, (list, tuple)) and len(obj) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)):
        return complex(obj[0], obj[1])
    raise SchemaError(f"{name}: complex scalars are encoded as [re, im], got {obj!r}")


def encode_matrix(M):
    M = np.asarray(M, dtype=np.complex128)
    return [[encode_complex(x) for x in row] for row in M]


def decode_matrix(obj, shape=None, name="matrix"):
    if not isinstance(obj, list) or not all(isinstance(row, list) for row in obj):
        raise SchemaError(f"{name}: a matrix is a list of rows")
    widths = {len(row) for row in obj}
    if len(widths) > 1:
        raise SchemaError(f"{name}: ragged rows")
    rows = [[decode_complex(x, name) for x in row] for row in obj]
    ncols = widths.pop() if widths else 0
    if shape is not None and len(rows) == 0 and shape[1] is not None:
        ncols = shape[1]
    M = np.array(rows, dtype=np.complex128).reshape(len(rows), ncols)
    return cmatrix(M, shape=shape, name=name)
