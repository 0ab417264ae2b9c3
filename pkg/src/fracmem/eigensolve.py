"""First eigenpair of  A u + diag(V m) u = lambda diag(g m) u.

The weight g may change sign.  Writing B = A + diag(V m) (positive definite
once the coercivity check passes) and D = diag(g m), the smallest admissible
eigenvalue is characterized through the inverted pencil: factor B = L L^T
and take the largest eigenvalue mu_max of the symmetric matrix
L^{-1} D L^{-T}; then lambda_1 = 1 / mu_max.  This avoids indefinite shifts
and matches the admissible set {u : sum g u^2 m > 0}.  The iterative path is
Lanczos (ARPACK) on the factored operator with a fixed start vector, so runs
are deterministic; a dense symmetric solve is the fallback for tiny systems
or on ARPACK failure, and serves as the independent test oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, eigh, solve_triangular
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import (
    AssumptionError,
    CoercivityError,
    DenominatorError,
    NoPositiveDirectionError,
    ShapeError,
)
from .fracop import Operator, quadratic_form

#: Absolute gap under which the two largest pencil eigenvalues count as tied.
TIE_TOL = 1e-12


class MultiplicityWarning(UserWarning):
    """First pencil eigenvalue is numerically multiple; simplicity not asserted."""


@dataclass(frozen=True)
class EigenPair:
    """Converged first eigenpair.

    lambda_ is the eigenvalue, u the eigenfunction normalized to
    sum g u^2 m = 1 with positive total mass, residual the relative
    pencil residual, matvecs the number of operator applications spent.
    """

    lambda_: float
    u: np.ndarray
    residual: float
    normalized: bool
    matvecs: int
    multiple: bool = False


@dataclass(frozen=True)
class CoercivityReport:
    """Smallest eigenvalue of B = A + diag(V m), for the given V and for the
    adversarial pairing of the same values (largest negative parts moved onto
    the cells of smallest stiffness diagonal)."""

    min_eig: float
    coercive: bool
    margin: float
    adversarial_min_eig: float
    adversarial_coercive: bool

    def __post_init__(self):
        assert self.coercive == (self.min_eig > 0)


def _check_field(op: Operator, f, name: str) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (op.n_cells,):
        raise ShapeError(f"{name} shape {f.shape} does not match {op.n_cells} cells")
    return f


def _min_eig_sym(B: np.ndarray) -> float:
    return float(eigh(B, eigvals_only=True, subset_by_index=[0, 0])[0])


def coercivity_check(op: Operator, V) -> CoercivityReport:
    """Positive definiteness of A + diag(V m), given and adversarial pairing.

    Rearranging V only permutes its values over cells of equal measure, so a
    check run with the most adversarial pairing (largest negative V values on
    the cells of smallest diagonal entry) is the certificate recorded for the
    whole rearrangement class.  This pairing is a heuristic extreme, not a
    proven bound; both margins are reported.
    """
    V = _check_field(op, V, "V")
    A = op.stiffness
    B = A + np.diag(V * op.mass)
    min_eig = _min_eig_sym(B)

    order_cells = np.argsort(np.diag(A), kind="stable")
    V_adv = np.empty_like(V)
    V_adv[order_cells] = np.sort(V)
    B_adv = A + np.diag(V_adv * op.mass)
    adv_min = _min_eig_sym(B_adv)
    return CoercivityReport(
        min_eig=min_eig,
        coercive=min_eig > 0,
        margin=min_eig,
        adversarial_min_eig=adv_min,
        adversarial_coercive=adv_min > 0,
    )


def _pencil_top_dense(L: np.ndarray, d: np.ndarray):
    """Two largest eigenpairs of L^{-1} diag(d) L^{-T} by dense solve."""
    n = L.shape[0]
    Linv = solve_triangular(L, np.eye(n), lower=True)
    S = (Linv * d) @ Linv.T
    S = 0.5 * (S + S.T)
    vals, vecs = eigh(S)
    mu1 = float(vals[-1])
    mu2 = float(vals[-2]) if n > 1 else -np.inf
    return mu1, mu2, vecs[:, -1], n * n


def _pencil_top_lanczos(L: np.ndarray, d: np.ndarray, tol: float):
    """Two largest eigenpairs via ARPACK with a fixed start vector."""
    n = L.shape[0]
    count = [0]

    def matvec(y):
        count[0] += 1
        w = solve_triangular(L, y, lower=True, trans="T")
        w = d * w
        return solve_triangular(L, w, lower=True)

    S = LinearOperator((n, n), matvec=matvec, dtype=float)
    v0 = np.full(n, 1.0 / np.sqrt(n))
    vals, vecs = eigsh(S, k=2, which="LA", tol=tol, v0=v0, maxiter=100 * n)
    order = np.argsort(vals)
    mu1 = float(vals[order[-1]])
    mu2 = float(vals[order[-2]])
    return mu1, mu2, vecs[:, order[-1]], count[0]


def first_eigenpair(op: Operator, g, V, tol: float = 1e-10) -> EigenPair:
    """Smallest admissible eigenvalue and eigenfunction of the weighted pencil.

    Requires the coercivity check to pass (a failed Cholesky factorization
    raises CoercivityError) and g to have a nontrivial positive part.  For
    nonnegative g the eigenfunction is asserted strictly positive; the
    all-pairs kernel couples every cell, so the mask is always connected in
    the operator's graph.  A numerically multiple top pencil eigenvalue is
    reported through a MultiplicityWarning and the `multiple` flag instead of
    an assertion.
    """
    g = _check_field(op, g, "g")
    V = _check_field(op, V, "V")
    if not np.any(g > 0):
        raise AssumptionError("g has no positive part on the mask")

    B = op.stiffness + np.diag(V * op.mass)
    try:
        L = cholesky(B, lower=True)
    except np.linalg.LinAlgError as exc:
        raise CoercivityError(f"A + diag(V m) is not positive definite: {exc}")

    d = g * op.mass
    n = op.n_cells
    if n <= 2:
        mu1, mu2, y, matvecs = _pencil_top_dense(L, d)
    else:
        try:
            mu1, mu2, y, matvecs = _pencil_top_lanczos(L, d, tol)
        except ArpackNoConvergence:
            mu1, mu2, y, matvecs = _pencil_top_dense(L, d)

    if mu1 <= 0:
        raise NoPositiveDirectionError(
            f"largest pencil eigenvalue {mu1} is not positive"
        )
    multiple = (mu1 - mu2) <= TIE_TOL
    if multiple:
        warnings.warn(
            f"top pencil eigenvalues within {TIE_TOL}: {mu1} vs {mu2}",
            MultiplicityWarning,
        )

    lam = 1.0 / mu1
    u = solve_triangular(L, y, lower=True, trans="T")
    if np.sum(u) < 0:
        u = -u
    denom = float(np.sum(g * u * u * op.mass))
    u = u / np.sqrt(denom)

    if np.min(g) >= 0 and not multiple and np.min(u) <= 0:
        raise AssertionError(
            "first eigenfunction not strictly positive for nonnegative g"
        )

    r = B @ u - lam * (d * u)
    row_norm = float(np.max(np.sum(np.abs(B), axis=1)))
    res = float(np.linalg.norm(r) / (np.linalg.norm(u) * row_norm))
    return EigenPair(
        lambda_=lam,
        u=u,
        residual=res,
        normalized=True,
        matvecs=matvecs,
        multiple=multiple,
    )


def residual(op: Operator, g, V, pair: EigenPair) -> float:
    """Relative pencil residual  |B u - lambda D u| / (|u| * |B|_row)."""
    g = _check_field(op, g, "g")
    V = _check_field(op, V, "V")
    u = pair.u
    B = op.stiffness + np.diag(V * op.mass)
    r = B @ u - pair.lambda_ * (g * op.mass * u)
    row_norm = float(np.max(np.sum(np.abs(B), axis=1)))
    return float(np.linalg.norm(r) / (np.linalg.norm(u) * row_norm))


def rayleigh_quotient(op: Operator, g, V, u) -> float:
    """(u . A u + sum V u^2 m) / (sum g u^2 m); the weighted mass must be positive."""
    g = _check_field(op, g, "g")
    u = _check_field(op, u, "u")
    denom = float(np.sum(g * u * u * op.mass))
    if denom <= 0:
        raise DenominatorError(f"weighted mass sum is {denom}, must be positive")
    return quadratic_form(op, V, u) / denom
