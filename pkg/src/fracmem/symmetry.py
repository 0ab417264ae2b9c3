"""Polarization, symmetrizations, and polarization-based symmetry checks.

Polarization of a nonnegative field across a lattice-exact half-space H is
the two-point rearrangement that keeps, at each cell/mirror pair, the larger
value on the H side.  Mirrors falling outside the mask contribute the value
zero (the field is extended by zero outside the domain); nonnegativity is
required precisely so that this zero extension keeps polarized fields in
the zero-exterior class.

Steiner symmetrization rearranges each 1D slice into its symmetric
decreasing profile; foliated symmetrization sorts each radial shell by
polar angle from a direction.  Both are idempotent rearrangements and are
used as test-input generators and diagnostics only, never inside the
optimizer.  The characterization checks sample the finitely many
lattice-exact half-spaces of the relevant continuum family, so they verify
necessary symmetry conditions on the grid: a field passes iff it equals its
polarization at every sampled half-space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainShapeError, ParameterError, ShapeError
from .geometry import (
    EXTERIOR,
    Annulus,
    Disc,
    Grid,
    HalfSpace,
    compatible_halfspaces,
    mask_polarization_invariant,
    radial_shells,
    reflect_all,
    side_of_cells,
    through_origin_directions,
)

from . import fracop


def _check_nonneg_field(grid: Grid, f, name: str = "field") -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n_cells,):
        raise ShapeError(f"{name} shape {f.shape} does not match {grid.n_cells} cells")
    if np.min(f) < 0:
        raise DomainShapeError(f"{name} must be nonnegative for polarization")
    return f


def polarize(grid: Grid, hs: HalfSpace, f) -> np.ndarray:
    """Two-point rearrangement of f across hs: max on H, min off H.

    Cells whose center lies on the hyperplane are unchanged; mirror values
    outside the mask count as zero.
    """
    f = _check_nonneg_field(grid, f)
    sigma = reflect_all(grid, hs)
    mirrored = np.where(sigma != EXTERIOR, f[sigma], 0.0)
    side = side_of_cells(grid, hs)
    out = np.where(side > 0, np.maximum(f, mirrored), np.minimum(f, mirrored))
    return np.where(side == 0, f, out)


def complement(grid: Grid, hs: HalfSpace) -> HalfSpace:
    """Open half-space on the other side of the same hyperplane."""
    return HalfSpace(
        normal=tuple(-c for c in hs.normal),
        offset=-hs.offset,
        grid_compatible=hs.grid_compatible,
        _kind=hs._kind,
        _axis=hs._axis,
        _sign=-hs._sign,
        _m=hs._m,
    )


def dual_polarize(grid: Grid, hs: HalfSpace, f) -> np.ndarray:
    """Polarization composed with the reflection: favors the complement side.

    Computed both as polarize(f) after the mirror pullback and as the
    polarization w.r.t. the complementary half-space; the two agree exactly
    and the identity is asserted on every call.
    """
    f = _check_nonneg_field(grid, f)
    via_complement = polarize(grid, complement(grid, hs), f)

    f_H = polarize(grid, hs, f)
    sigma = reflect_all(grid, hs)
    side = side_of_cells(grid, hs)
    # zero-extended polarized value at an exterior mirror point: the mirror
    # of sigma(x) is x itself, so it is max(0, f(x)) on H and min(0, f(x))
    # off H; sigma(x) lies on the side opposite to x.
    exterior_val = np.where(side < 0, f, 0.0)
    composed = np.where(sigma != EXTERIOR, f_H[np.where(sigma != EXTERIOR, sigma, 0)], exterior_val)
    assert np.array_equal(composed, via_complement), "dual polarization identity failed"
    return via_complement


def steiner_symmetrize(grid: Grid, axis: int, f) -> np.ndarray:
    """Symmetric-decreasing rearrangement of every slice along `axis`.

    Each slice (cells sharing all other lattice coordinates) must be
    contiguous.  Sorted values are placed largest at the slice center,
    alternating outward; for even slice lengths the two central cells take
    the two largest values with the larger on the negative side.
    """
    f = _check_nonneg_field(grid, f)
    if axis < 0 or axis >= grid.dim:
        raise ParameterError(f"axis {axis} out of range for dim {grid.dim}")
    out = np.empty_like(f)
    keys = grid.lattice
    other = [a for a in range(grid.dim) if a != axis]
    if other:
        slice_ids = keys[:, other[0]]
    else:
        slice_ids = np.zeros(grid.n_cells, dtype=int)
    for sid in np.unique(slice_ids):
        cells = np.nonzero(slice_ids == sid)[0]
        pos = keys[cells, axis]
        order = np.argsort(pos)
        cells = cells[order]
        pos = pos[order]
        if pos.shape[0] > 1 and np.any(np.diff(pos) != 1):
            raise DomainShapeError(
                f"slice {sid} along axis {axis} is not contiguous; "
                "mask is not slice-convex"
            )
        out[cells[_symmetric_decreasing_positions(len(cells))]] = np.sort(f[cells])[::-1]
    return out


def _symmetric_decreasing_positions(m: int) -> np.ndarray:
    """Placement order for sorted-descending values on m contiguous slots."""
    if m % 2 == 0:
        first, second = m // 2 - 1, m // 2
    else:
        first, second = m // 2, m // 2 - 1
    positions = [first]
    left, right = second, m // 2 + 1
    if m % 2 == 0:
        left, right = m // 2 - 2, m // 2 + 1
        positions.append(second)
    else:
        left, right = m // 2 - 1, m // 2 + 1
    while len(positions) < m:
        if left >= 0:
            positions.append(left)
            left -= 1
        if right < m and len(positions) < m:
            positions.append(right)
            right += 1
    return np.asarray(positions, dtype=int)


def foliated_schwarz_symmetrize(grid: Grid, direction, f) -> np.ndarray:
    """Shell-wise angular rearrangement: per radial shell of width h, sort
    cells by polar angle from `direction` (ties by the second coordinate)
    and assign the shell's values in descending order.

    Requires a radial mask (disc or concentric annulus); the output is
    equimeasurable with f within every shell.  Angular resolution is
    shell-dependent: thin shells near the origin carry few cells.
    """
    f = _check_nonneg_field(grid, f)
    if not _is_radial_mask(grid):
        raise DomainShapeError(
            "foliated symmetrization needs a disc or concentric annulus mask"
        )
    gamma = np.asarray(list(direction), dtype=float)
    norm = np.linalg.norm(gamma)
    if gamma.shape != (grid.dim,) or norm == 0:
        raise ParameterError("direction must be a nonzero grid-dimension vector")
    gamma = gamma / norm

    out = np.empty_like(f)
    for shell in radial_shells(grid, grid.h):
        x = grid.centers[shell]
        r = np.linalg.norm(x, axis=1)
        theta = np.arccos(np.clip((x @ gamma) / r, -1.0, 1.0))
        order = np.lexsort((x[:, -1], theta))
        out[shell[order]] = np.sort(f[shell])[::-1]
    return out


def _is_radial_mask(grid: Grid) -> bool:
    spec = grid.spec
    if isinstance(spec, Disc):
        return True
    return isinstance(spec, Annulus) and spec.offset == 0.0


# ---------------------------------------------------------------------------
# Characterization-based diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryReport:
    """Per-half-space polarization deviations of one field for one family."""

    family: str
    deviations: list[tuple[HalfSpace, float]]
    max_deviation: float
    tolerance: float
    verdict: bool
    direction: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "direction": None if self.direction is None else list(map(float, self.direction)),
            "halfspaces": [
                {
                    "normal": list(map(float, hs.normal)),
                    "offset": float(hs.offset),
                    "deviation": dev,
                }
                for hs, dev in self.deviations
            ],
        }


def _deviation(grid: Grid, hs: HalfSpace, f: np.ndarray) -> float:
    return float(np.max(np.abs(polarize(grid, hs, f) - f)))


def check_steiner(grid: Grid, f, axis: int, tolerance: float = 1e-6) -> SymmetryReport:
    """Polarization invariance over the sampled hyperplane-parallel family.

    A nonnegative field on a slice-convex mask symmetric about {x_axis = 0}
    passes iff it is symmetric about that hyperplane with slices
    nonincreasing away from it.  The mask must be polarization-invariant
    for every sampled half-space.
    """
    f = _check_nonneg_field(grid, f)
    family = compatible_halfspaces(grid, "steiner", axis=axis)
    for hs in family:
        if not mask_polarization_invariant(grid, hs):
            raise DomainShapeError(
                "mask is not polarization-invariant for the hyperplane-parallel "
                f"family of axis {axis}"
            )
    deviations = [(hs, _deviation(grid, hs, f)) for hs in family]
    max_dev = max(d for _, d in deviations)
    return SymmetryReport(
        family=f"steiner(axis={axis})",
        deviations=deviations,
        max_deviation=max_dev,
        tolerance=tolerance,
        verdict=max_dev <= tolerance,
    )


def check_foliated(
    grid: Grid,
    f,
    direction=None,
    tolerance: float = 1e-6,
) -> SymmetryReport:
    """Polarization invariance over through-origin half-spaces containing a
    direction; with direction=None, scan all lattice-exact directions and
    report the one minimizing the worst deviation.

    The scan covers only the finitely many exact directions (8 in 2D), so a
    continuum symmetry axis falling between them shows up as the best
    sampled direction with a nonzero residual.  On an off-center annulus the
    hole cells are simply absent from the mask, which reproduces the
    zero-extension convention for such domains automatically.
    """
    f = _check_nonneg_field(grid, f)
    if direction is not None:
        return _foliated_report(grid, f, np.asarray(list(direction), dtype=float), tolerance)
    best = None
    for gamma in through_origin_directions(grid):
        rep = _foliated_report(grid, f, gamma, tolerance)
        if best is None or rep.max_deviation < best.max_deviation:
            best = rep
    return best


def _foliated_report(grid: Grid, f: np.ndarray, gamma: np.ndarray, tolerance: float) -> SymmetryReport:
    norm = np.linalg.norm(gamma)
    if gamma.shape != (grid.dim,) or norm == 0:
        raise ParameterError("direction must be a nonzero grid-dimension vector")
    gamma = gamma / norm
    family = compatible_halfspaces(grid, "through_origin_containing", direction=gamma)
    if not family:
        raise ParameterError(f"no lattice-exact half-space strictly contains {gamma}")
    deviations = [(hs, _deviation(grid, hs, f)) for hs in family]
    max_dev = max(d for _, d in deviations)
    return SymmetryReport(
        family="foliated",
        deviations=deviations,
        max_deviation=max_dev,
        tolerance=tolerance,
        verdict=max_dev <= tolerance,
        direction=gamma,
    )


def reflection_invariance_deviation(grid: Grid, hs: HalfSpace, f) -> float:
    """max |f(sigma(x)) - f(x)| over cells; requires sigma to map the mask onto itself."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n_cells,):
        raise ShapeError(f"field shape {f.shape} does not match {grid.n_cells} cells")
    sigma = reflect_all(grid, hs)
    if np.any(sigma == EXTERIOR):
        raise DomainShapeError("mask is not invariant under this reflection")
    return float(np.max(np.abs(f[sigma] - f)))


class HardyLittlewoodGap(NamedTuple):
    lhs: float
    rhs: float
    dual_lhs: float
    dual_rhs: float


def hardy_littlewood_gap(grid: Grid, hs: HalfSpace, u, v) -> HardyLittlewoodGap:
    """Both rearrangement inequalities for one polarization.

    Returns (sum u v, sum u_H v_H, sum u^H v_H, sum u v) scaled by the cell
    measure; the contract is lhs <= rhs and dual_lhs <= dual_rhs.  The mask
    must be polarization-invariant for hs, and both fields nonnegative (the
    zero-extension convention of polarize forces this).
    """
    u = _check_nonneg_field(grid, u, "u")
    v = _check_nonneg_field(grid, v, "v")
    if not mask_polarization_invariant(grid, hs):
        raise DomainShapeError("mask is not polarization-invariant for this half-space")
    measure = grid.cell_measure
    base = float(np.sum(u * v) * measure)
    u_H = polarize(grid, hs, u)
    v_H = polarize(grid, hs, v)
    u_dual = dual_polarize(grid, hs, u)
    paired = float(np.sum(u_H * v_H) * measure)
    anti = float(np.sum(u_dual * v_H) * measure)
    return HardyLittlewoodGap(lhs=base, rhs=paired, dual_lhs=anti, dual_rhs=base)


def seminorm_decrease_gap(grid: Grid, hs: HalfSpace, f, op=None, s: float = 0.5) -> float:
    """[f]_s^2 - [f_H]_s^2; nonnegative on reflection-symmetric masks."""
    f = _check_nonneg_field(grid, f)
    f_H = polarize(grid, hs, f)
    before = fracop.gagliardo_seminorm_sq(grid, s, f, op=op)
    after = fracop.gagliardo_seminorm_sq(grid, s, f_H, op=op)
    return before - after
