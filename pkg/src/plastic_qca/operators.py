"""Sparse operators on the composite qubit-link space.

Elementary operators are small dense matrices on a few tensor factors
(sites and links); :func:`embed` places them on the full space with the
identity elsewhere.  :class:`LinearOperator` is a thin immutable wrapper
around a CSR matrix with canonical (sorted, duplicate-free) storage, so
norms and equality checks are reproducible.
"""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np
from scipy import sparse

from .errors import BoundsError, ShapeError
from .lattice import LatticeSpec, TruncationMode, link_values, site_occupations

E00 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
E01 = np.array([[0, 1], [0, 0]], dtype=np.complex128)
E10 = np.array([[0, 0], [1, 0]], dtype=np.complex128)
E11 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)


def _canonical(matrix) -> sparse.csr_matrix:
    csr = sparse.csr_matrix(matrix, dtype=np.complex128)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


class LinearOperator:
    """Immutable sparse complex operator of shape ``(dim, dim)``."""

    __array_priority__ = 20

    def __init__(self, matrix, spec: LatticeSpec | None = None):
        self._matrix = _canonical(matrix)
        if self._matrix.shape[0] != self._matrix.shape[1]:
            raise ShapeError(f"operator must be square, got {self._matrix.shape}")
        self.spec = spec

    @classmethod
    def identity(cls, spec: LatticeSpec) -> "LinearOperator":
        return cls(sparse.identity(spec.dim, dtype=np.complex128, format="csr"), spec)

    @classmethod
    def diagonal(cls, values, spec: LatticeSpec) -> "LinearOperator":
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (spec.dim,):
            raise ShapeError(f"diagonal of length {values.shape} does not match dim {spec.dim}")
        return cls(sparse.diags(values, format="csr"), spec)

    @property
    def matrix(self) -> sparse.csr_matrix:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self._matrix.shape

    @property
    def nnz(self) -> int:
        return self._matrix.nnz

    def _check(self, other: "LinearOperator") -> None:
        if not isinstance(other, LinearOperator):
            raise TypeError(f"expected LinearOperator, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ShapeError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def apply(self, vector) -> np.ndarray:
        vector = np.asarray(vector)
        if vector.shape[0] != self.dim:
            raise ShapeError(f"vector of length {vector.shape[0]} does not match dim {self.dim}")
        return self._matrix @ vector

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            self._check(other)
            return LinearOperator(self._matrix @ other._matrix, self.spec)
        return self.apply(other)

    def __add__(self, other):
        self._check(other)
        return LinearOperator(self._matrix + other._matrix, self.spec)

    def __sub__(self, other):
        self._check(other)
        return LinearOperator(self._matrix - other._matrix, self.spec)

    def __neg__(self):
        return LinearOperator(-self._matrix, self.spec)

    def __mul__(self, scalar):
        if isinstance(scalar, LinearOperator):
            raise TypeError("use @ to compose operators")
        return LinearOperator(complex(scalar) * self._matrix, self.spec)

    __rmul__ = __mul__

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self._matrix.conj().T, self.spec)

    @property
    def H(self) -> "LinearOperator":
        return self.adjoint()

    def conj(self) -> "LinearOperator":
        """Entrywise complex conjugate in the computational basis."""
        return LinearOperator(self._matrix.conj(), self.spec)

    def diagonal_values(self) -> np.ndarray:
        return self._matrix.diagonal()

    def to_dense(self) -> np.ndarray:
        return self._matrix.toarray()

    def frobenius_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self._matrix.data) ** 2)))

    def operator_norm(self, rtol: float = 1e-10, max_iter: int = 500, seed: int = 0) -> float:
        """Largest singular value by power iteration on ``A^dagger A``."""
        if self.nnz == 0:
            return 0.0
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        v /= np.linalg.norm(v)
        adj = self._matrix.conj().T.tocsr()
        estimate = 0.0
        for _ in range(max_iter):
            w = adj @ (self._matrix @ v)
            new_estimate = float(np.linalg.norm(w))
            if new_estimate == 0.0:
                return 0.0
            v = w / new_estimate
            if abs(new_estimate - estimate) <= rtol * new_estimate:
                estimate = new_estimate
                break
            estimate = new_estimate
        return float(np.sqrt(estimate))

    def is_diagonal(self) -> bool:
        coo = self._matrix.tocoo()
        return bool(np.all(coo.row == coo.col))

    def __repr__(self):
        return f"LinearOperator(dim={self.dim}, nnz={self.nnz})"


def compose(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    return a @ b


def adjoint(a: LinearOperator) -> LinearOperator:
    return a.adjoint()


def add(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    return a + b


def scale(a: LinearOperator, scalar: complex) -> LinearOperator:
    return scalar * a


def commutator(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    return a @ b - b @ a


def anticommutator(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    return a @ b + b @ a


# ---------------------------------------------------------------------------
# placement of local matrices


Factor = tuple[str, int]


def site(p: int) -> Factor:
    return ("site", p)


def link(j: int) -> Factor:
    return ("link", j)


def local_layout(factors: Sequence[Factor], spec: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Base indices and local offsets for a set of tensor factors.

    Every global index decomposes uniquely as ``base + offsets[k]`` where
    ``k`` is the local index over ``factors`` (first factor most
    significant) and ``base`` has all local digits zero.
    """
    dims, strides, digits = [], [], []
    for kind, i in factors:
        if kind == "site":
            spec.check_site(i)
            dims.append(2)
            strides.append(spec.site_stride(i))
            digits.append(site_occupations(spec, i))
        elif kind == "link":
            spec.check_link(i)
            dims.append(spec.link_dim)
            strides.append(spec.link_stride(i))
            digits.append(link_values(spec, i) + spec.cutoff)
        else:
            raise ValueError(f"unknown factor kind {kind!r}")
    if len(set(factors)) != len(factors):
        raise ValueError("repeated tensor factor")

    offsets = np.zeros(1, dtype=np.int64)
    for size, stride in zip(dims, strides):
        offsets = (offsets[:, None] + stride * np.arange(size, dtype=np.int64)[None, :]).ravel()

    is_base = np.ones(spec.dim, dtype=bool)
    for column in digits:
        is_base &= column == 0
    bases = np.flatnonzero(is_base).astype(np.int64)
    return bases, offsets


def local_triplets(local: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nonzero entries of a dense local matrix in row-major order."""
    local = np.asarray(local, dtype=np.complex128)
    rows, cols = np.nonzero(local)
    return rows.astype(np.int64), cols.astype(np.int64), local[rows, cols]


def embed(local, factors: Sequence[Factor], spec: LatticeSpec) -> LinearOperator:
    """Place ``local`` on ``factors`` and the identity on every other factor."""
    local = np.asarray(local, dtype=np.complex128)
    bases, offsets = local_layout(factors, spec)
    if local.shape != (len(offsets), len(offsets)):
        raise ShapeError(f"local matrix {local.shape} does not fit factors of size {len(offsets)}")
    rows, cols, vals = local_triplets(local)
    all_rows = (bases[None, :] + offsets[rows][:, None]).ravel()
    all_cols = (bases[None, :] + offsets[cols][:, None]).ravel()
    all_vals = np.repeat(vals, len(bases))
    matrix = sparse.coo_matrix((all_vals, (all_rows, all_cols)), shape=(spec.dim, spec.dim))
    return LinearOperator(matrix, spec)


# ---------------------------------------------------------------------------
# link and qubit operators


class LinkKind(str, enum.Enum):
    LOWER = "lower"
    RAISE = "raise"
    NUMBER = "number"
    PHASE = "phase"


def lowering_matrix(cutoff: int, truncation: TruncationMode) -> np.ndarray:
    """``|l> -> |l-1>`` on one link; the bottom state wraps or is annihilated."""
    d = 2 * cutoff + 1
    matrix = np.zeros((d, d), dtype=np.complex128)
    for digit in range(1, d):
        matrix[digit - 1, digit] = 1.0
    if TruncationMode(truncation) is TruncationMode.CYCLIC_WRAP:
        matrix[d - 1, 0] = 1.0
    return matrix


def number_matrix(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(-cutoff, cutoff + 1).astype(np.complex128))


def phase_matrix(cutoff: int, phi: float) -> np.ndarray:
    values = np.arange(-cutoff, cutoff + 1)
    return np.diag(np.exp(1j * values * phi))


def link_matrix(kind: LinkKind, spec: LatticeSpec, phi: float | None = None) -> np.ndarray:
    kind = LinkKind(kind)
    if kind is LinkKind.LOWER:
        return lowering_matrix(spec.cutoff, spec.truncation)
    if kind is LinkKind.RAISE:
        return lowering_matrix(spec.cutoff, spec.truncation).conj().T
    if kind is LinkKind.NUMBER:
        return number_matrix(spec.cutoff)
    if phi is None:
        raise ValueError("the phase operator needs an angle phi")
    return phase_matrix(spec.cutoff, phi)


def link_op(kind: LinkKind, link_index: int, spec: LatticeSpec, phi: float | None = None) -> LinearOperator:
    """Lowering (V), raising (V^dagger), number (L) or phase (T_phi) operator on one link."""
    spec.check_link(link_index)
    return embed(link_matrix(kind, spec, phi), [link(link_index)], spec)


def qubit_op(matrix2x2, site_index: int, spec: LatticeSpec) -> LinearOperator:
    matrix2x2 = np.asarray(matrix2x2, dtype=np.complex128)
    if matrix2x2.shape != (2, 2):
        raise ShapeError(f"qubit operator must be 2x2, got {matrix2x2.shape}")
    if not 0 <= site_index < spec.num_sites:
        raise BoundsError(f"site {site_index} outside 0..{spec.num_sites - 1}")
    return embed(matrix2x2, [site(site_index)], spec)


def number_op(site_index: int, spec: LatticeSpec) -> LinearOperator:
    spec.check_site(site_index)
    return LinearOperator.diagonal(site_occupations(spec, site_index), spec)


def total_number_op(spec: LatticeSpec) -> LinearOperator:
    total = sum(site_occupations(spec, p) for p in range(spec.num_sites))
    return LinearOperator.diagonal(total, spec)
