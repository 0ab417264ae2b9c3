"""Discrete rearrangement classes of weight fields.

On a uniform mask all cells carry the same measure, so two fields are
rearrangements of each other exactly when their value multisets agree.  A
class is therefore stored as one sorted value multiset, and the extremal
members against a reference field are obtained by sort pairing: assigning
values to cells in order of u^2 realizes the discrete bathtub extremes
(largest values on largest u^2 maximizes sum w u^2, smallest values on
largest u^2 minimizes it, over all permutations of the multiset).

Tie-breaking is by ascending cell index so runs are reproducible;
minimizers with ties are non-unique in the continuum too.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError, ShapeError, SpecError
from .eigensolve import coercivity_check
from .fracop import Operator
from .geometry import Grid

MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class StepSpec:
    """Piecewise-constant class description: (value, fraction of cells) steps."""

    steps: tuple[tuple[float, float], ...]

    def validate(self) -> None:
        if not self.steps:
            raise SpecError("step spec needs at least one step")
        fractions = [f for _, f in self.steps]
        if any(f < 0 for f in fractions):
            raise SpecError(f"fractions must be nonnegative, got {fractions}")
        if abs(sum(fractions) - 1.0) > 1e-12:
            raise SpecError(f"fractions must sum to 1, got {sum(fractions)}")


@dataclass(frozen=True)
class WeightClass:
    """Multiset of cell values defining one rearrangement class."""

    values: np.ndarray  # sorted ascending, one per inside cell
    provenance: str = "step-spec"

    @property
    def n_cells(self) -> int:
        return self.values.shape[0]

    def member_from_permutation(self, perm: np.ndarray) -> np.ndarray:
        return self.values[perm]


def class_from_spec(spec, grid: Grid) -> WeightClass:
    """Realize a class on a grid from a StepSpec or from a sampled field.

    Step counts follow largest-remainder rounding: floor(fraction * m) per
    step, leftovers to the largest fractional parts, ties by list order.
    """
    m = grid.n_cells
    if isinstance(spec, StepSpec):
        spec.validate()
        raw = np.array([f * m for _, f in spec.steps])
        counts = np.floor(raw).astype(int)
        rem = m - int(counts.sum())
        frac = raw - np.floor(raw)
        order = sorted(range(len(raw)), key=lambda i: (-frac[i], i))
        for i in order[:rem]:
            counts[i] += 1
        values = np.concatenate(
            [np.full(c, v) for (v, _), c in zip(spec.steps, counts)]
        )
        prov = "step-spec"
    else:
        values = np.asarray(spec, dtype=float)
        if values.shape != (m,):
            raise ShapeError(
                f"sampled field has shape {values.shape}, grid has {m} cells"
            )
        prov = "sampled-field"
    values = np.sort(values)
    values.setflags(write=False)
    return WeightClass(values=values, provenance=prov)


def _pairing_order(u: np.ndarray) -> np.ndarray:
    """Cell ids sorted by u^2 descending, ties by cell index ascending."""
    usq = np.asarray(u, dtype=float) ** 2
    return np.lexsort((np.arange(usq.shape[0]), -usq))


def maximizing_rearrangement(wclass: WeightClass, u: np.ndarray) -> np.ndarray:
    """Class member maximizing sum w_i u_i^2: largest values on largest u^2."""
    u = np.asarray(u, dtype=float)
    if u.shape != (wclass.n_cells,):
        raise ShapeError(f"u has shape {u.shape}, class has {wclass.n_cells} cells")
    out = np.empty_like(wclass.values)
    out[_pairing_order(u)] = wclass.values[::-1]
    return out


def minimizing_rearrangement(wclass: WeightClass, u: np.ndarray) -> np.ndarray:
    """Class member minimizing sum w_i u_i^2: smallest values on largest u^2."""
    u = np.asarray(u, dtype=float)
    if u.shape != (wclass.n_cells,):
        raise ShapeError(f"u has shape {u.shape}, class has {wclass.n_cells} cells")
    out = np.empty_like(wclass.values)
    out[_pairing_order(u)] = wclass.values
    return out


def is_rearrangement(grid: Grid, f1, f2, tol: float = 1e-12) -> bool:
    """True iff the sorted cell values agree within tol per entry."""
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    if f1.shape != f2.shape or f1.shape != (grid.n_cells,):
        return False
    return bool(np.max(np.abs(np.sort(f1) - np.sort(f2))) <= tol)


def lq_norm(grid: Grid, f, q: float) -> float:
    """(sum |f_i|^q m_i)^(1/q); constant across a rearrangement class."""
    if q < 1:
        raise ParameterError(f"q must be >= 1, got {q}")
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n_cells,):
        raise ShapeError(f"field shape {f.shape} does not match {grid.n_cells} cells")
    return float(np.sum(np.abs(f) ** q * grid.cell_measure) ** (1.0 / q))


class MonotoneReport(NamedTuple):
    ok: bool
    max_violation: float


def check_monotone_dependence(u, w, direction: str) -> MonotoneReport:
    """Whether w is a monotone function of u across cells.

    increasing: u_i < u_j implies w_i <= w_j (within 1e-12); decreasing is
    the mirrored condition.  Reports the largest violation over all pairs.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape != w.shape:
        raise ShapeError(f"field shapes differ: {u.shape} vs {w.shape}")
    if direction == "decreasing":
        w = -w
    elif direction != "increasing":
        raise ParameterError(f"direction must be increasing or decreasing, got {direction!r}")

    order = np.argsort(u, kind="stable")
    u_sorted = u[order]
    w_sorted = w[order]
    max_violation = 0.0
    prev_max = -np.inf  # largest w among strictly smaller u values
    i = 0
    n = u_sorted.shape[0]
    while i < n:
        j = i
        while j < n and u_sorted[j] == u_sorted[i]:
            j += 1
        group_min = float(np.min(w_sorted[i:j]))
        if prev_max > -np.inf:
            max_violation = max(max_violation, prev_max - group_min)
        prev_max = max(prev_max, float(np.max(w_sorted[i:j])))
        i = j
    return MonotoneReport(ok=max_violation <= MONOTONE_TOL, max_violation=max_violation)


@dataclass(frozen=True)
class AssumptionReport:
    """Checkable stand-ins for the admissibility assumptions on (g, V).

    The integrability exponent must exceed N / (2 s); the g class must
    contain a positive value; the uncomputable Sobolev-constant bound on the
    negative part of V is replaced by the adversarial coercivity check (a
    documented substitution: stricter in spirit, not equivalent, since the
    discrete class is finite while the continuum bound covers all of it).
    """

    integrability_ok: bool
    positive_part_ok: bool
    coercivity_ok: bool
    q: float
    q_threshold: float
    coercivity_margin: float
    adversarial_margin: float
    note: str = (
        "Sobolev-constant bound replaced by an adversarial coercivity check "
        "over the discrete rearrangement class"
    )

    @property
    def passed(self) -> bool:
        return self.integrability_ok and self.positive_part_ok and self.coercivity_ok


def validate_assumptions(
    g_class: WeightClass, V_class: WeightClass, q: float, op: Operator
) -> AssumptionReport:
    """Run the admissibility checks for a pair of weight classes on one operator."""
    N = op.params.dim
    s = op.params.s
    threshold = N / (2.0 * s)
    integrability_ok = q > threshold
    positive_part_ok = bool(np.any(g_class.values > 0))

    diag_order = np.argsort(np.diag(op.stiffness), kind="stable")
    V_adv = np.empty(op.n_cells)
    V_adv[diag_order] = np.sort(V_class.values)
    rep = coercivity_check(op, V_adv)
    return AssumptionReport(
        integrability_ok=integrability_ok,
        positive_part_ok=positive_part_ok,
        coercivity_ok=rep.coercive and rep.adversarial_coercive,
        q=q,
        q_threshold=threshold,
        coercivity_margin=rep.min_eig,
        adversarial_margin=rep.adversarial_min_eig,
    )
