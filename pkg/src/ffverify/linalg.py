"""Complex linear algebra over labeled tensor-product spaces.

Dense operators are fine up to a few thousand dimensions; beyond that the
matrix-free helpers (apply plans plus Krylov iteration) take over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import InputError
from .tolerances import HERMITIAN_TOL

NodeDims = Mapping[int, int]


def _dims_product(dims: Sequence[int]) -> int:
    return math.prod(dims)


def hermiticity_defect(matrix: np.ndarray) -> float:
    """Largest entry of |A - A^dagger|."""
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """Square operator acting on an ordered subset of nodes."""

    matrix: np.ndarray
    support: tuple[int, ...]
    node_dims: dict[int, int]

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        support = tuple(int(v) for v in self.support)
        dims = {int(k): int(v) for k, v in self.node_dims.items()}
        if len(set(support)) != len(support):
            raise InputError("support repeats a node")
        missing = [v for v in support if v not in dims]
        if missing:
            raise InputError(f"no dimension given for nodes {missing}")
        expected = _dims_product([dims[v] for v in support])
        if matrix.ndim != 2 or matrix.shape != (expected, expected):
            raise InputError(
                f"matrix shape {matrix.shape} does not match support dimension {expected}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "node_dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return hermiticity_defect(self.matrix) < tol


@dataclass(frozen=True, eq=False)
class FullOperator:
    """Operator over the full ordered node list."""

    matrix: np.ndarray
    node_order: tuple[int, ...]
    node_dims: dict[int, int]

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        order = tuple(int(v) for v in self.node_order)
        dims = {int(k): int(v) for k, v in self.node_dims.items()}
        expected = _dims_product([dims[v] for v in order])
        if matrix.ndim != 2 or matrix.shape != (expected, expected):
            raise InputError(
                f"matrix shape {matrix.shape} does not match total dimension {expected}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "node_order", order)
        object.__setattr__(self, "node_dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class ApplyPlan:
    """Precompiled application of a local operator to full-space vectors."""

    matrix: np.ndarray          # factors permuted so the axes are ascending
    axes: tuple[int, ...]       # ascending tensor axes the operator acts on
    shape: tuple[int, ...]      # full tensor shape
    _contract_axes: tuple[tuple[int, ...], tuple[int, ...]] = field(repr=False, default=())

    def __call__(self, vec: np.ndarray) -> np.ndarray:
        k = len(self.axes)
        sub = tuple(self.shape[a] for a in self.axes)
        t = vec.reshape(self.shape)
        m = self.matrix.reshape(sub + sub)
        t = np.tensordot(m, t, axes=(tuple(range(k, 2 * k)), self.axes))
        t = np.moveaxis(t, tuple(range(k)), self.axes)
        return t.reshape(-1)


def make_plan(matrix: np.ndarray, support: Sequence[int],
              node_order: Sequence[int], node_dims: NodeDims) -> ApplyPlan:
    """Compile a local operator into an ApplyPlan for the given node order."""
    matrix = np.asarray(matrix, dtype=complex)
    order = tuple(int(v) for v in node_order)
    support = tuple(int(v) for v in support)
    positions = {v: i for i, v in enumerate(order)}
    missing = [v for v in support if v not in positions]
    if missing:
        raise InputError(f"support nodes {missing} absent from node order")
    axes = [positions[v] for v in support]
    perm = sorted(range(len(axes)), key=lambda i: axes[i])
    sorted_axes = tuple(axes[i] for i in perm)
    dims = [node_dims[v] for v in support]
    if matrix.shape != (_dims_product(dims),) * 2:
        raise InputError("matrix shape does not match the support dimensions")
    k = len(dims)
    tensor = matrix.reshape(tuple(dims) * 2)
    tensor = tensor.transpose(tuple(perm) + tuple(k + i for i in perm))
    new_dims = [dims[i] for i in perm]
    compiled = np.ascontiguousarray(tensor.reshape(_dims_product(new_dims), -1))
    shape = tuple(node_dims[v] for v in order)
    return ApplyPlan(compiled, sorted_axes, shape)


def plan_for(op: LocalOperator, node_order: Sequence[int],
             node_dims: NodeDims | None = None) -> ApplyPlan:
    dims = dict(op.node_dims)
    if node_dims:
        dims.update({int(k): int(v) for k, v in node_dims.items()})
    return make_plan(op.matrix, op.support, node_order, dims)


def embed(op: LocalOperator, node_order: Sequence[int],
          node_dims: NodeDims | None = None) -> FullOperator:
    """Tensor the operator with the identity on the remaining nodes.

    The result's tensor factors follow node_order.  Extra node dimensions not
    stored on the operator are taken from node_dims.
    """
    order = tuple(int(v) for v in node_order)
    if len(set(order)) != len(order):
        raise InputError("node order repeats a node")
    dims = dict(op.node_dims)
    if node_dims:
        for k, v in node_dims.items():
            k, v = int(k), int(v)
            if k in dims and dims[k] != v:
                raise InputError(f"conflicting dimensions for node {k}")
            dims[k] = v
    missing = [v for v in order if v not in dims]
    if missing:
        raise InputError(f"no dimension given for nodes {missing}")
    if not set(op.support) <= set(order):
        raise InputError("support is not contained in the node order")

    comp = [v for v in order if v not in op.support]
    comp_dim = _dims_product([dims[v] for v in comp])
    big = np.kron(op.matrix, np.eye(comp_dim))
    source = list(op.support) + comp
    source_dims = [dims[v] for v in source]
    tensor = big.reshape(tuple(source_dims) * 2)
    perm = [source.index(v) for v in order]
    n = len(order)
    tensor = tensor.transpose(tuple(perm) + tuple(n + i for i in perm))
    total = _dims_product([dims[v] for v in order])
    return FullOperator(tensor.reshape(total, total), order,
                        {v: dims[v] for v in order})


def eigh(matrix: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError("eigh needs a square matrix")
    if matrix.size == 0:
        raise InputError("eigh needs a nonempty matrix")
    defect = hermiticity_defect(matrix)
    if defect > tol:
        raise InputError(f"matrix is not Hermitian (defect {defect:.2e})")
    vals, vecs = scipy.linalg.eigh(matrix)
    return vals, vecs


def singular_values(matrix: np.ndarray) -> np.ndarray:
    """Singular values in descending order."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.size == 0:
        raise InputError("empty matrix")
    return scipy.linalg.svdvals(matrix)


def operator_norm(matrix: np.ndarray) -> float:
    """Largest singular value."""
    return float(singular_values(matrix)[0])


def second_largest_eigenvalue(matrix: np.ndarray) -> float:
    """Second entry of the descending eigenvalue list (multiplicity counted)."""
    vals, _ = eigh(matrix)
    if len(vals) < 2:
        raise InputError("need dimension >= 2")
    return float(vals[-2])


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return operator_norm(a @ b - b @ a)


def is_projector(matrix: np.ndarray, tol: float = 1e-10) -> bool:
    matrix = np.asarray(matrix, dtype=complex)
    if hermiticity_defect(matrix) > tol:
        return False
    return operator_norm(matrix @ matrix - matrix) < tol


# ---------------------------------------------------------------------------
# matrix-free spectral helpers

def lowest_eigenpairs(matvec: Callable[[np.ndarray], np.ndarray], dim: int,
                      k: int, tol: float = 0.0, seed: int = 7) -> tuple[np.ndarray, np.ndarray]:
    """k smallest eigenpairs of a Hermitian operator given by its action."""
    op = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    v0 = np.random.default_rng(seed).standard_normal(dim)
    vals, vecs = scipy.sparse.linalg.eigsh(
        op, k=k, which="SA", tol=tol, v0=v0, maxiter=50 * dim)
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def largest_eigenvalue(matvec: Callable[[np.ndarray], np.ndarray], dim: int,
                       tol: float = 0.0, seed: int = 7) -> float:
    """Largest eigenvalue of a Hermitian operator given by its action."""
    op = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    v0 = np.random.default_rng(seed).standard_normal(dim)
    vals = scipy.sparse.linalg.eigsh(
        op, k=1, which="LA", tol=tol, v0=v0, maxiter=50 * dim,
        return_eigenvectors=False)
    return float(vals[0])


def largest_eigenpair(matvec: Callable[[np.ndarray], np.ndarray], dim: int,
                      tol: float = 0.0, seed: int = 7) -> tuple[float, np.ndarray]:
    op = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    v0 = np.random.default_rng(seed).standard_normal(dim)
    vals, vecs = scipy.sparse.linalg.eigsh(
        op, k=1, which="LA", tol=tol, v0=v0, maxiter=50 * dim)
    return float(vals[0]), vecs[:, 0]


def product_operator_norm(apply_m: Callable[[np.ndarray], np.ndarray],
                          apply_m_adjoint: Callable[[np.ndarray], np.ndarray],
                          dim: int, tol: float = 0.0, seed: int = 7) -> float:
    """Operator norm of M given the actions of M and M^dagger (via M^dagger M)."""
    def gram(v):
        return apply_m_adjoint(apply_m(v))

    top = largest_eigenvalue(gram, dim, tol=tol, seed=seed)
    return math.sqrt(max(top, 0.0))
