"""Solvers for the Kronecker-structured (Lyapunov) space-time system

    (S_tau x M_1 x ... x M_d + sum_j M_tau x ... x S_j x ... x M_d
     + gamma M_tau x M_1 x ... x M_d) U = F

where ``x`` is the Kronecker product and tensors use C (row-major) ordering.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from dopg.assembly import OperatorSet
from dopg.errors import ConditioningWarning, DecompositionError, ParameterError, ResonanceError, SizeGuardError

__all__ = [
    "EigenSystem",
    "SolutionTensor",
    "generalized_eig_spatial",
    "generalized_eig_temporal",
    "fast_solve",
    "direct_solve",
    "kronecker_matrix",
    "apply_operator",
    "DIRECT_SIZE_LIMIT",
]

DIRECT_SIZE_LIMIT = 5000


@dataclass(frozen=True)
class EigenSystem:
    """Generalized eigenpairs ``A e_k = lambda_k B e_k`` (eigenvectors in columns).

    ``projector`` is ``(B E)^{-1} = (E^T B E)^{-1} E^T``; for pencils whose
    eigenvectors are ``B``-orthogonal this reduces to ``E^T`` scaled row-wise
    by ``1 / (e_k^T B e_k)``.
    """

    values: NDArray
    vectors: NDArray
    role: str
    projector: NDArray = field(repr=False)

    def residual(self, A: NDArray, B: NDArray) -> NDArray:
        """Per-eigenpair ``|A e - lambda B e| / (|A| |e|)``."""
        R = A @ self.vectors - (B @ self.vectors) * self.values
        return np.linalg.norm(R, axis=0) / (np.linalg.norm(A, 2) * np.linalg.norm(self.vectors, axis=0))


@dataclass(frozen=True)
class SolutionTensor:
    """Petrov-Galerkin coefficients ``u_hat[n, m_1, ..., m_d]`` plus the data needed to evaluate them."""

    coeffs: NDArray
    tau_b: float
    T: float
    bounds: tuple[tuple[float, float], ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.coeffs.ndim != 1 + len(self.bounds):
            raise ParameterError("coefficient tensor rank does not match the domain dimension")
        if not np.all(np.isfinite(self.coeffs)):
            raise ParameterError("coefficient tensor has non-finite entries")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape

    @property
    def d(self) -> int:
        return len(self.bounds)


def _eig_pencil(A: NDArray, B: NDArray, role: str) -> EigenSystem:
    try:
        values, vectors = sla.eig(A, B)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DecompositionError(f"{role} pencil: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise DecompositionError(f"{role} pencil is singular (infinite eigenvalues)")
    if np.all(np.abs(values.imag) <= 1e-14 * max(1.0, np.abs(values).max())) and np.all(vectors.imag == 0):
        values, vectors = values.real, vectors.real
    W = vectors.T @ B @ vectors
    try:
        projector = np.linalg.solve(W, vectors.T)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"{role} eigenvectors are defective") from exc
    if np.linalg.cond(W) > 1e12:
        raise DecompositionError(f"{role} eigenvectors are numerically defective")
    return EigenSystem(values, vectors, role, projector)


def generalized_eig_spatial(S_tot: NDArray, M: NDArray, role: str = "spatial") -> EigenSystem:
    """Eigenpairs of ``S_tot e = lambda M e``.

    A symmetric positive definite ``M`` takes the symmetric-definite route
    (real eigenvalues, M-orthonormal vectors). Otherwise, as with the
    sign-alternating test functions used here, the pencil is solved as a
    general dense problem and complex pairs may appear.
    """
    S_tot = np.asarray(S_tot, dtype=float)
    M = np.asarray(M, dtype=float)
    if S_tot.shape != M.shape or S_tot.shape[0] != S_tot.shape[1]:
        raise ParameterError("spatial pencil needs two square matrices of equal size")
    symmetric = np.allclose(S_tot, S_tot.T, rtol=0, atol=1e-12 * max(np.abs(S_tot).max(), 1e-300)) and np.allclose(
        M, M.T, rtol=0, atol=1e-14 * np.abs(M).max()
    )
    if symmetric:
        try:
            np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            pass
        else:
            values, vectors = sla.eigh(S_tot, M)
            return EigenSystem(values, vectors, role, vectors.T.copy())
    return _eig_pencil(S_tot, M, role)


def generalized_eig_temporal(M_tau: NDArray, S_tau: NDArray) -> EigenSystem:
    """Eigenpairs of ``M_tau e = lambda S_tau e`` (general, possibly complex)."""
    M_tau = np.asarray(M_tau, dtype=float)
    S_tau = np.asarray(S_tau, dtype=float)
    if S_tau.shape != M_tau.shape or S_tau.shape[0] != S_tau.shape[1]:
        raise ParameterError("temporal pencil needs two square matrices of equal size")
    if np.linalg.matrix_rank(S_tau) < S_tau.shape[0]:
        raise DecompositionError("temporal stiffness matrix is singular")
    return _eig_pencil(M_tau, S_tau, "temporal")


def mode_product(X: NDArray, A: NDArray, axis: int) -> NDArray:
    """Contract ``A[i, k] X[..., k, ...]`` along ``axis`` (one sum-factorization sweep)."""
    return np.moveaxis(np.tensordot(A, X, axes=([1], [axis])), 0, axis)


def _check_load(ops: OperatorSet, F: NDArray) -> NDArray:
    F = np.asarray(getattr(F, "values", F))
    if F.shape != ops.shape:
        raise ParameterError(f"load tensor shape {F.shape} does not match system shape {ops.shape}")
    return F


def fast_solve(ops: OperatorSet, F, eig: tuple[EigenSystem, ...] | None = None) -> SolutionTensor:
    """Solve the Lyapunov system through 1-D generalized eigen-decompositions.

    ``U = sum kappa e_n^tau x e_m1^1 x ... x e_md^d`` with
    ``kappa = [(proj_tau x proj_1 x ... ) F] / Lambda`` and
    ``Lambda = 1 + gamma lambda_n^tau + lambda_n^tau sum_j lambda_mj^j``.
    The projections and the reconstruction are applied one tensor mode at
    a time. ``eig`` may pass precomputed ``(temporal, spatial_1, ...)`` systems.
    """
    F = _check_load(ops, F)
    if eig is None:
        eig = (generalized_eig_temporal(ops.M_tau, ops.S_tau),) + tuple(
            generalized_eig_spatial(S, M, role=f"spatial {j + 1}") for j, (S, M) in enumerate(zip(ops.S_tot, ops.M))
        )
    et, es = eig[0], eig[1:]
    G = F
    for axis, e in enumerate(eig):
        G = mode_product(G, e.projector, axis)
    lam_space = reduce(np.add.outer, [e.values for e in es])
    Lam = np.multiply.outer(1.0 + ops.gamma * et.values, np.ones(np.shape(lam_space))) + np.multiply.outer(
        et.values, lam_space
    )
    scale = np.abs(Lam).max()
    if np.any(np.abs(Lam) <= 1e-14 * scale):
        raise ResonanceError("a mode of the Kronecker system is singular (Lambda = 0)")
    kappa = G / Lam
    U = kappa
    for axis, e in enumerate(eig):
        U = mode_product(U, e.vectors, axis)
    if np.iscomplexobj(U):
        imag = np.abs(U.imag).max()
        if imag > 1e-8 * max(np.abs(U.real).max(), 1e-300):
            warnings.warn(f"solution has imaginary residue {imag:.2e}", ConditioningWarning, stacklevel=2)
        U = U.real
    return SolutionTensor(np.ascontiguousarray(U), ops.tau_b, ops.T, ops.bounds, {"solver": "fast"})


def kronecker_matrix(ops: OperatorSet) -> NDArray:
    """Explicit dense system matrix (verification only)."""
    size = int(np.prod(ops.shape))
    if size > DIRECT_SIZE_LIMIT:
        raise SizeGuardError(f"dense system of size {size} exceeds the limit {DIRECT_SIZE_LIMIT}")
    kron = lambda mats: reduce(np.kron, mats)
    A = kron((ops.S_tau,) + ops.M)
    for j in range(ops.d):
        A = A + kron((ops.M_tau,) + ops.M[:j] + (ops.S_tot[j],) + ops.M[j + 1:])
    if ops.gamma != 0.0:
        A = A + ops.gamma * kron((ops.M_tau,) + ops.M)
    return A


def apply_operator(ops: OperatorSet, U) -> NDArray:
    """Apply the Kronecker operator to a coefficient tensor without forming it."""
    U = np.asarray(getattr(U, "coeffs", U))

    def chain(first, spatial):
        X = mode_product(U, first, 0)
        for j, A in enumerate(spatial):
            X = mode_product(X, A, j + 1)
        return X

    out = chain(ops.S_tau, ops.M)
    for j in range(ops.d):
        out = out + chain(ops.M_tau, ops.M[:j] + (ops.S_tot[j],) + ops.M[j + 1:])
    if ops.gamma != 0.0:
        out = out + ops.gamma * chain(ops.M_tau, ops.M)
    return out


def direct_solve(ops: OperatorSet, F) -> SolutionTensor:
    """Dense LU solve of the explicit Kronecker system (size-guarded oracle)."""
    F = _check_load(ops, F)
    A = kronecker_matrix(ops)
    try:
        u = sla.solve(A, F.reshape(-1))
    except (np.linalg.LinAlgError, sla.LinAlgWarning) as exc:
        raise DecompositionError(f"direct solve failed: {exc}") from exc
    return SolutionTensor(u.reshape(ops.shape), ops.tau_b, ops.T, ops.bounds, {"solver": "direct"})
