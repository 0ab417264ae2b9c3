"""Minimize the first weighted eigenvalue over a pair of rearrangement classes.

Alternating descent: solve the eigenproblem for the current weights, then
replace g by the class member maximizing sum g u^2 and V by the member
minimizing sum V u^2.  Each half-step optimizes the Rayleigh quotient with
the other arguments fixed and has a closed-form optimum (sort pairing), so
the eigenvalue sequence is non-increasing.  Assignments live in a finite
set; the loop stops at an exact fixed point of both rearrangement steps,
on a sustained relative-eigenvalue plateau (tie-induced cycles), or at
max_iter.  Convergence is declared on assignment stability rather than on
eigenvalue stability alone to avoid stopping on plateaus caused by ties.

Starts are seeded shuffles of the class values: sorted starts bias toward
symmetric minimizers and can mask non-uniqueness, which multi_start probes
by reporting the spread of converged eigenvalues over seeds.  The scheme
can stop at local fixed points; the spread is reported, not suppressed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionError
from .eigensolve import EigenPair, first_eigenpair
from .fracop import Operator
from .geometry import Grid
from .rearrange import (
    WeightClass,
    maximizing_rearrangement,
    minimizing_rearrangement,
    validate_assumptions,
)

DESCENT_SLACK = 1e-12


@dataclass(frozen=True)
class OptResult:
    """Converged (or best-seen) state of one optimization run."""

    lambda_min: float
    g_opt: np.ndarray
    V_opt: np.ndarray
    u_opt: np.ndarray
    history: list[tuple[int, float, float]]  # (iteration, lambda, residual)
    iterations: int
    converged: bool
    stop_reason: str
    start_seed: int


def _initial_member(wclass: WeightClass, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(wclass.values)


def optimize(
    grid: Grid,
    op: Operator,
    g_class: WeightClass,
    V_class: WeightClass,
    tol: float = 1e-8,
    max_iter: int = 500,
    seed: int = 0,
    eig_tol: float = 1e-10,
    q: float | None = None,
) -> OptResult:
    """Alternating eigenvalue descent over E(g) x E(V) from one seeded start.

    When `q` is given the admissibility report is evaluated first and a
    failure raises AssumptionError (callers that already validated can leave
    it None; the eigensolver still enforces coercivity and g+ != 0).
    """
    if q is not None:
        report = validate_assumptions(g_class, V_class, q, op)
        if not report.passed:
            raise AssumptionError(f"assumption checks failed: {report}")

    rng = np.random.default_rng(seed)
    g = _initial_member(g_class, rng)
    V = _initial_member(V_class, rng)

    history: list[tuple[int, float, float]] = []
    best: tuple[float, np.ndarray, np.ndarray, EigenPair] | None = None
    plateau = 0
    converged = False
    stop_reason = "max_iter"
    lam_prev = None

    for it in range(max_iter):
        pair = first_eigenpair(op, g, V, tol=eig_tol)
        history.append((it, pair.lambda_, pair.residual))
        if best is None or pair.lambda_ < best[0]:
            best = (pair.lambda_, g, V, pair)

        g_next = maximizing_rearrangement(g_class, pair.u)
        V_next = minimizing_rearrangement(V_class, pair.u)
        if np.array_equal(g_next, g) and np.array_equal(V_next, V):
            converged = True
            stop_reason = "fixed_point"
            best = (pair.lambda_, g, V, pair)
            break

        if lam_prev is not None and abs(pair.lambda_ - lam_prev) <= tol * abs(pair.lambda_):
            plateau += 1
        else:
            plateau = 0
        lam_prev = pair.lambda_
        if plateau >= 2:
            converged = True
            stop_reason = "lambda_plateau"
            g, V = g_next, V_next
            break
        g, V = g_next, V_next

    lam, g_opt, V_opt, pair = best
    return OptResult(
        lambda_min=lam,
        g_opt=g_opt,
        V_opt=V_opt,
        u_opt=pair.u,
        history=history,
        iterations=len(history),
        converged=converged,
        stop_reason=stop_reason,
        start_seed=seed,
    )


@dataclass(frozen=True)
class MultiStartResult:
    """All per-seed results (sorted by eigenvalue, then seed) and their spread."""

    results: list[OptResult]
    best: OptResult
    spread: float


def multi_start(
    grid: Grid,
    op: Operator,
    g_class: WeightClass,
    V_class: WeightClass,
    n_starts: int = 1,
    seeds: list[int] | None = None,
    **opts,
) -> MultiStartResult:
    """Run `optimize` over seeds (default 0..n_starts-1) and rank the results."""
    if seeds is None:
        if n_starts < 1:
            raise ValueError(f"n_starts must be >= 1, got {n_starts}")
        seeds = list(range(n_starts))
    results = [
        optimize(grid, op, g_class, V_class, seed=seed, **opts) for seed in seeds
    ]
    ranked = sorted(results, key=lambda r: (r.lambda_min, r.start_seed))
    lams = [r.lambda_min for r in results]
    return MultiStartResult(
        results=ranked, best=ranked[0], spread=max(lams) - min(lams)
    )
