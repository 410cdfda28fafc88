"""Dense complex linear algebra for finite-dimensional quantum models.

Operators and states are plain numpy arrays (complex128); the functions
here validate them, combine them, and decompose Hermitian operators into
eigenvalue clusters with their eigenspace projectors. All comparisons use
the max entry modulus norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotHermitianError, ParameterError, ValidationError

NORM_TOL = 1e-10      # state normalization
OP_TOL = 1e-9         # operator identity checks
CLUSTER_TOL = 1e-8    # eigenvalue degeneracy merging
DEFAULT_MAX_DIM = 256  # guard against accidentally huge compound spaces


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


PAULI_X = _frozen(np.array([[0, 1], [1, 0]], dtype=complex))
PAULI_Y = _frozen(np.array([[0, -1j], [1j, 0]], dtype=complex))
PAULI_Z = _frozen(np.array([[1, 0], [0, -1]], dtype=complex))


def as_operator(a) -> np.ndarray:
    """Coerce to a 2-D complex array, requiring finite entries."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix entries must be finite")
    return a


def as_state(v, tol: float = NORM_TOL) -> np.ndarray:
    """Coerce to a 1-D complex array, requiring unit norm within tol."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.shape[0] < 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("state amplitudes must be finite")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"state norm is {norm!r}, not 1 within {tol}")
    return v


def max_abs(a) -> float:
    """Max entry modulus of an array."""
    return float(np.max(np.abs(a)))


def tensor(*factors) -> np.ndarray:
    """Kronecker product; the left factor is the slow index.

    For matrices a (m x n) and b (p x q) the result has shape (m*p, n*q)
    with row index r = r_a * p + r_b. Works on vectors too.
    """
    if not factors:
        raise DimensionError("tensor() needs at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    if not np.all(np.isfinite(out)):
        raise ValidationError("tensor factors must be finite")
    return out


def matmul(a, b) -> np.ndarray:
    a = as_operator(a)
    b = as_operator(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_operator(a).conj().T


def apply(a, v) -> np.ndarray:
    """Apply a matrix to a vector."""
    a = as_operator(a)
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or a.shape[1] != v.shape[0]:
        raise DimensionError(f"cannot apply {a.shape} to vector of length {v.shape}")
    return a @ v


def inner(u, v) -> complex:
    """Inner product <u|v>, conjugating the left argument."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"inner product needs equal-length vectors, got {u.shape} and {v.shape}")
    return complex(np.vdot(u, v))


def _square(a) -> np.ndarray:
    a = as_operator(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def is_hermitian(a, tol: float = OP_TOL) -> bool:
    a = _square(a)
    return max_abs(a - a.conj().T) <= tol


def is_unitary(a, tol: float = OP_TOL) -> bool:
    a = _square(a)
    return max_abs(a.conj().T @ a - np.eye(a.shape[0])) <= tol


def is_projector(a, tol: float = OP_TOL) -> bool:
    a = _square(a)
    return is_hermitian(a, tol) and max_abs(a @ a - a) <= tol


def psd_sqrt(a, clamp_tol: float = 1e-10) -> np.ndarray:
    """Operator square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in [-clamp_tol, 0) are treated as rounding noise and
    clamped to 0; anything below -clamp_tol is an error.
    """
    a = _square(a)
    if not is_hermitian(a, OP_TOL):
        raise NotHermitianError("operator square root needs a Hermitian matrix")
    w, vecs = np.linalg.eigh((a + a.conj().T) / 2)
    if w[0] < -clamp_tol:
        raise ValidationError(f"matrix is not positive semidefinite (eigenvalue {w[0]!r})")
    root = vecs @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ vecs.conj().T
    return (root + root.conj().T) / 2


def embed_operator(op, dims, sites) -> np.ndarray:
    """Embed an operator acting on selected tensor factors into the full space.

    ``dims`` lists the dimension of every factor (slow index first) and
    ``sites`` names the factors ``op`` acts on, in the order of op's own
    tensor structure; the remaining factors are acted on as identity.
    """
    op = _square(op)
    dims = [int(d) for d in dims]
    sites = [int(s) for s in sites]
    n = len(dims)
    if any(d < 1 for d in dims):
        raise DimensionError("all factor dimensions must be >= 1")
    if len(set(sites)) != len(sites) or any(s < 0 or s >= n for s in sites):
        raise DimensionError(f"invalid site list {sites} for {n} factors")
    d_sites = math.prod(dims[s] for s in sites)
    if op.shape[0] != d_sites:
        raise DimensionError(f"operator dim {op.shape[0]} does not match sites {sites} of dims {dims}")
    rest = [i for i in range(n) if i not in sites]
    order = sites + rest
    d_rest = math.prod(dims[i] for i in rest)
    full = np.kron(op, np.eye(d_rest, dtype=complex))
    shape = [dims[i] for i in order]
    full = full.reshape(shape + shape)
    perm = [order.index(i) for i in range(n)]
    full = full.transpose(perm + [p + n for p in perm])
    total = math.prod(dims)
    return np.ascontiguousarray(full.reshape(total, total))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Clustered eigenvalues of a Hermitian operator with eigenspace projectors.

    Eigenvalues are strictly increasing; each projector is idempotent and
    Hermitian, projectors are mutually orthogonal, and they sum to the
    identity, all within OP_TOL.
    """

    eigenvalues: tuple
    projectors: tuple

    def __post_init__(self):
        values = tuple(float(x) for x in self.eigenvalues)
        projs = tuple(_frozen(as_operator(p).copy()) for p in self.projectors)
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "projectors", projs)
        if len(values) != len(projs) or not values:
            raise ValidationError("need one projector per eigenvalue")
        if any(b - a <= 0 for a, b in zip(values, values[1:])):
            raise ValidationError("eigenvalues must be strictly increasing")
        dim = projs[0].shape[0]
        for p in projs:
            if p.shape != (dim, dim):
                raise DimensionError("projectors must share one square shape")
            if not is_projector(p, OP_TOL):
                raise ValidationError("each component must be an orthogonal projector")
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if max_abs(projs[i] @ projs[j]) > OP_TOL:
                    raise ValidationError("eigenspace projectors must be mutually orthogonal")
        if max_abs(sum(projs) - np.eye(dim)) > OP_TOL:
            raise ValidationError("projectors must sum to the identity")

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def reconstruct(self) -> np.ndarray:
        """Assemble sum_i x_i P_i."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for x, p in zip(self.eigenvalues, self.projectors):
            out += x * p
        return out


def spectral_decompose(a, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomposition:
    """Eigendecompose a Hermitian matrix, merging nearly degenerate eigenvalues.

    Consecutive eigenvalues closer than cluster_tol are merged into a single
    outcome; the reported eigenvalue is the arithmetic mean of the cluster
    and its projector is the sum of the clustered rank-1 projectors.
    """
    a = _square(a)
    if cluster_tol < 0:
        raise ParameterError(f"cluster_tol must be >= 0, got {cluster_tol}")
    if not is_hermitian(a, OP_TOL):
        raise NotHermitianError("spectral decomposition needs a Hermitian matrix")
    w, vecs = np.linalg.eigh((a + a.conj().T) / 2)
    breaks = [0]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > cluster_tol:
            breaks.append(i)
    breaks.append(len(w))
    values = []
    projectors = []
    for lo, hi in zip(breaks, breaks[1:]):
        block = vecs[:, lo:hi]
        proj = block @ block.conj().T
        values.append(float(np.mean(w[lo:hi])))
        projectors.append((proj + proj.conj().T) / 2)
    return SpectralDecomposition(tuple(values), tuple(projectors))
