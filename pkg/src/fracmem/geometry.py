"""Masked uniform grids with lattice-exact reflections.

Domains (intervals, boxes, discs, annuli) are sampled on a uniform lattice
over the bounding box [-L, L]^N whose cell centers sit at half-integer
multiples of the spacing h, i.e. at (k + 1/2) h for integer k.  That
centering makes reflections across the coordinate axes, across the two
diagonals (in 2D), and across axis-parallel hyperplanes at half-grid
offsets exact maps of the lattice onto itself, which is what the
polarization and symmetrization machinery needs: reflected cell centers
are again cell centers, so two-point rearrangements are pure index
permutations with no interpolation.

A cell belongs to the mask iff its center lies in the open domain; for an
annulus the closed hole is excluded.  The mask is first-order accurate at
the boundary, which is acceptable at desk scale and is the price paid for
exact multiset arithmetic on cell values.

The continuum symmetry characterizations quantify over infinite families
of half-spaces; a grid admits only finitely many exact reflections, so
`compatible_halfspaces` samples those families.  Downstream diagnostics
therefore verify necessary conditions at the sampled reflections, not the
full continuum equivalence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import (
    CompatibilityError,
    DomainShapeError,
    EmptyDomainError,
    ParameterError,
)

#: Sentinel returned by reflect_cell when the mirror image is not an inside cell.
EXTERIOR: int = -1


# ---------------------------------------------------------------------------
# Domain specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Open interval (a, b) on the line."""

    a: float
    b: float
    kind = "interval"
    dim = 1

    def validate(self) -> None:
        if not self.a < self.b:
            raise ParameterError(f"interval requires a < b, got ({self.a}, {self.b})")

    def half_width(self) -> float:
        return max(abs(self.a), abs(self.b))

    def diameter(self) -> float:
        return self.b - self.a

    def contains(self, x: np.ndarray) -> np.ndarray:
        return (x[:, 0] > self.a) & (x[:, 0] < self.b)


@dataclass(frozen=True)
class Box:
    """Open origin-centered rectangle with the given side lengths."""

    lengths: tuple[float, float]
    kind = "box"
    dim = 2

    def validate(self) -> None:
        if len(self.lengths) != 2:
            raise ParameterError("box takes exactly two side lengths")
        if any(l <= 0 for l in self.lengths):
            raise ParameterError(f"box lengths must be positive, got {self.lengths}")

    def half_width(self) -> float:
        return max(self.lengths) / 2.0

    def diameter(self) -> float:
        return math.hypot(*self.lengths)

    def contains(self, x: np.ndarray) -> np.ndarray:
        inside = np.abs(x[:, 0]) < self.lengths[0] / 2.0
        return inside & (np.abs(x[:, 1]) < self.lengths[1] / 2.0)


@dataclass(frozen=True)
class Disc:
    """Open origin-centered disc of the given radius."""

    radius: float
    kind = "disc"
    dim = 2

    def validate(self) -> None:
        if self.radius <= 0:
            raise ParameterError(f"disc radius must be positive, got {self.radius}")

    def half_width(self) -> float:
        return self.radius

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ij->i", x, x) < self.radius**2


@dataclass(frozen=True)
class Annulus:
    """Disc of radius `outer` minus the closed disc of radius `inner` centered
    at (offset, 0).  offset = 0 gives the concentric ring."""

    outer: float
    inner: float
    offset: float = 0.0
    kind = "annulus"
    dim = 2

    def validate(self) -> None:
        if self.inner <= 0 or self.outer <= 0:
            raise ParameterError("annulus radii must be positive")
        if not 0 <= self.offset < self.outer - self.inner:
            raise ParameterError(
                "annulus offset must satisfy 0 <= t < R - r so the hole closure "
                f"stays inside the outer disc, got t={self.offset}, R={self.outer}, r={self.inner}"
            )

    def half_width(self) -> float:
        return self.outer

    def diameter(self) -> float:
        return 2.0 * self.outer

    def contains(self, x: np.ndarray) -> np.ndarray:
        inside_outer = np.einsum("ij,ij->i", x, x) < self.outer**2
        d = x - np.array([self.offset, 0.0])
        outside_hole = np.einsum("ij,ij->i", d, d) > self.inner**2
        return inside_outer & outside_hole


DomainSpec = Union[Interval, Box, Disc, Annulus]


def domain_from_dict(d: dict) -> DomainSpec:
    """Build a DomainSpec from its JSON form, e.g. {"kind": "disc", "R": 1}."""
    try:
        kind = d["kind"]
    except (TypeError, KeyError):
        raise ParameterError("domain must be an object with a 'kind' field")
    try:
        if kind == "interval":
            return Interval(float(d["a"]), float(d["b"]))
        if kind == "box":
            lengths = d["lengths"]
            return Box((float(lengths[0]), float(lengths[1])))
        if kind == "disc":
            return Disc(float(d["R"]))
        if kind == "annulus":
            return Annulus(float(d["R"]), float(d["r"]), float(d.get("t", 0.0)))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ParameterError(f"bad parameters for domain kind {kind!r}: {exc}")
    raise ParameterError(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Masked uniform lattice over the bounding box of a domain.

    Attributes
    ----------
    spec : DomainSpec
        Effective domain (annulus offsets are snapped to the lattice).
    dim, n_per_axis, h : int, int, float
        Dimension, cells per axis of the bounding box, cell side.
    centers : (m, dim) float array
        Coordinates of the inside-cell centers, row index = cell id.
    lattice : (m, dim) int array
        Integer lattice index k of each inside cell; center = (k + 1/2) h.
    cell_id : int array of shape (n,)*dim
        Inside-cell id for each bounding-box lattice position, EXTERIOR if
        the cell is not inside.
    cell_measure : float
        h**dim, exact.

    Immutable after construction (arrays are set read-only); safe for
    concurrent reads.
    """

    spec: DomainSpec
    dim: int
    n_per_axis: int
    h: float
    centers: np.ndarray
    lattice: np.ndarray
    cell_id: np.ndarray
    cell_measure: float

    @property
    def n_cells(self) -> int:
        return self.centers.shape[0]

    @property
    def inside(self) -> np.ndarray:
        """Boolean mask per bounding-box lattice cell."""
        return self.cell_id >= 0

    def lattice_center(self, key: np.ndarray) -> np.ndarray:
        """Coordinates of lattice index rows; works outside the box too."""
        return (np.asarray(key, dtype=float) + 0.5) * self.h

    def key_in_box(self, key: np.ndarray) -> np.ndarray:
        half = self.n_per_axis // 2
        k = np.asarray(key)
        return np.all((k >= -half) & (k < half), axis=-1)

    def id_of_key(self, key: np.ndarray) -> np.ndarray:
        """Inside-cell id for integer lattice rows (EXTERIOR if outside mask/box)."""
        k = np.atleast_2d(np.asarray(key, dtype=int))
        half = self.n_per_axis // 2
        ok = np.all((k >= -half) & (k < half), axis=1)
        ids = np.full(k.shape[0], EXTERIOR, dtype=int)
        if np.any(ok):
            pos = tuple((k[ok] + half).T)
            ids[ok] = self.cell_id[pos]
        return ids


def build_grid(spec: DomainSpec, n: int) -> Grid:
    """Sample `spec` on an n-per-axis lattice over its bounding box.

    The bounding box is [-L, L]^N with L the domain's half-width, h = 2L/n,
    and a cell is inside iff its center lies in the open domain.  n must be
    even so that centers sit at half-integer multiples of h (the lattice
    symmetry every exact reflection relies on).  Annulus hole offsets are
    snapped to the nearest multiple of h.
    """
    spec.validate()
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    if n % 2 != 0:
        raise ParameterError(
            f"n must be even to center cells at half-integer multiples of h, got {n}"
        )
    dim = spec.dim
    L = spec.half_width()
    h = 2.0 * L / n
    if isinstance(spec, Annulus) and spec.offset != 0.0:
        snapped = round(spec.offset / h) * h
        if not 0 <= snapped < spec.outer - spec.inner:
            raise ParameterError(
                f"annulus offset {spec.offset} snaps to {snapped}, outside [0, R - r)"
            )
        spec = Annulus(spec.outer, spec.inner, snapped)

    half = n // 2
    axes = [np.arange(-half, half)] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    keys = np.stack([m.ravel() for m in mesh], axis=1)
    centers = (keys + 0.5) * h
    inside = spec.contains(centers)
    m = int(np.count_nonzero(inside))
    if m == 0:
        raise EmptyDomainError(f"no cell center lies inside {spec}")

    cell_id = np.full(inside.shape, EXTERIOR, dtype=int)
    cell_id[inside] = np.arange(m)
    cell_id = cell_id.reshape((n,) * dim)

    centers_in = centers[inside].copy()
    keys_in = keys[inside].copy()
    for arr in (centers_in, keys_in, cell_id):
        arr.setflags(write=False)
    return Grid(
        spec=spec,
        dim=dim,
        n_per_axis=n,
        h=h,
        centers=centers_in,
        lattice=keys_in,
        cell_id=cell_id,
        cell_measure=h**dim,
    )


# ---------------------------------------------------------------------------
# Half-spaces and reflections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfSpace:
    """Open affine half-space H = {x : x . normal > offset}.

    Only lattice-exact reflections are representable: the hyperplane is
    either axis-normal at a half-grid offset (normal = s*e_axis, offset a
    multiple of h/2) or one of the two diagonals through the origin (2D).
    The reflection and the side test are carried out in integer lattice
    arithmetic, so they are exact.
    """

    normal: tuple[float, ...]
    offset: float
    grid_compatible: bool
    # lattice action: ("axis", axis, sign, m) reflects across {x_axis = m*h/2},
    # ("diag", d, sign, 0) across {x_1 = d*x_2} with d in {+1, -1}.
    _kind: str = field(repr=False, default="axis")
    _axis: int = field(repr=False, default=0)
    _sign: int = field(repr=False, default=1)
    _m: int = field(repr=False, default=0)

    def contains_origin_closure(self) -> bool:
        return self.offset <= 1e-12


def axis_halfspace(grid: Grid, axis: int, sign: int, m: int) -> HalfSpace:
    """H = {x : sign * x_axis > sign * m * h / 2}; hyperplane {x_axis = m h/2}."""
    if axis < 0 or axis >= grid.dim:
        raise ParameterError(f"axis {axis} out of range for dim {grid.dim}")
    if sign not in (1, -1):
        raise ParameterError("sign must be +1 or -1")
    normal = [0.0] * grid.dim
    normal[axis] = float(sign)
    return HalfSpace(
        normal=tuple(normal),
        offset=sign * m * grid.h / 2.0,
        grid_compatible=True,
        _kind="axis",
        _axis=axis,
        _sign=sign,
        _m=m,
    )


def diagonal_halfspace(grid: Grid, d: int, sign: int) -> HalfSpace:
    """2D through-origin half-space with normal sign*(1, -d)/sqrt(2).

    The hyperplane is {x_1 = d * x_2}; its reflection swaps lattice indices
    exactly (d=+1: (k1,k2) -> (k2,k1); d=-1: (k1,k2) -> (-k2-1,-k1-1)).
    """
    if grid.dim != 2:
        raise CompatibilityError("diagonal half-spaces exist only in 2D")
    if d not in (1, -1) or sign not in (1, -1):
        raise ParameterError("d and sign must be +1 or -1")
    s = 1.0 / math.sqrt(2.0)
    normal = (sign * s, -d * sign * s)
    return HalfSpace(
        normal=normal,
        offset=0.0,
        grid_compatible=True,
        _kind="diag",
        _axis=d,
        _sign=sign,
        _m=0,
    )


def halfspace_from_floats(grid: Grid, normal: Iterable[float], offset: float) -> HalfSpace:
    """Classify a numeric (normal, offset) pair as a lattice-exact half-space.

    Raises CompatibilityError when the reflection is not lattice-exact.
    """
    nu = np.asarray(list(normal), dtype=float)
    if nu.shape != (grid.dim,):
        raise ParameterError(f"normal must have {grid.dim} components")
    norm = float(np.linalg.norm(nu))
    if abs(norm - 1.0) > 1e-12:
        if norm == 0.0:
            raise ParameterError("normal must be nonzero")
        nu = nu / norm
        offset = offset / norm
    tol = 1e-12
    for axis in range(grid.dim):
        for sign in (1, -1):
            target = np.zeros(grid.dim)
            target[axis] = sign
            if np.max(np.abs(nu - target)) <= tol:
                m_float = 2.0 * offset / grid.h * sign
                m = round(m_float)
                if abs(m_float - m) > 1e-9:
                    raise CompatibilityError(
                        f"offset {offset} is not a half-grid multiple (h={grid.h})"
                    )
                return axis_halfspace(grid, axis, sign, m)
    if grid.dim == 2 and abs(offset) <= tol:
        s = 1.0 / math.sqrt(2.0)
        for d in (1, -1):
            for sign in (1, -1):
                target = np.array([sign * s, -d * sign * s])
                if np.max(np.abs(nu - target)) <= 1e-12:
                    return diagonal_halfspace(grid, d, sign)
    raise CompatibilityError(
        f"half-space with normal {tuple(nu)} offset {offset} has no lattice-exact reflection"
    )


def reflect_keys(grid: Grid, hs: HalfSpace, keys: np.ndarray) -> np.ndarray:
    """Reflect integer lattice rows across the hyperplane of `hs` (exact)."""
    if not hs.grid_compatible:
        raise CompatibilityError("half-space is not grid compatible")
    k = np.atleast_2d(np.asarray(keys, dtype=int)).copy()
    if hs._kind == "axis":
        k[:, hs._axis] = hs._m - 1 - k[:, hs._axis]
    elif hs._axis == 1:  # hyperplane {x1 = x2}
        k = k[:, ::-1].copy()
    else:  # hyperplane {x1 = -x2}
        k = -k[:, ::-1] - 1
    return k


def side_of_keys(grid: Grid, hs: HalfSpace, keys: np.ndarray) -> np.ndarray:
    """+1 on H, -1 on the open complement, 0 on the hyperplane (exact)."""
    k = np.atleast_2d(np.asarray(keys, dtype=int))
    if hs._kind == "axis":
        val = hs._sign * (2 * k[:, hs._axis] + 1 - hs._m)
    else:
        d = hs._axis
        val = hs._sign * ((2 * k[:, 0] + 1) - d * (2 * k[:, 1] + 1))
    return np.sign(val).astype(int)


def reflect_cell(grid: Grid, hs: HalfSpace, cell: int):
    """Mirror cell id under the reflection of `hs`, or EXTERIOR.

    The mirror of an inside cell center is again a lattice center; if that
    center is not an inside cell the reflected point lies where zero-extended
    functions vanish, and the sentinel EXTERIOR is returned.
    """
    key = reflect_keys(grid, hs, grid.lattice[cell : cell + 1])
    return int(grid.id_of_key(key)[0])


def reflect_all(grid: Grid, hs: HalfSpace) -> np.ndarray:
    """Vector of mirror cell ids (EXTERIOR where the image leaves the mask)."""
    return grid.id_of_key(reflect_keys(grid, hs, grid.lattice))


def side_of_cells(grid: Grid, hs: HalfSpace) -> np.ndarray:
    """Side indicator (+1 / -1 / 0) for every inside cell."""
    return side_of_keys(grid, hs, grid.lattice)


def compatible_halfspaces(
    grid: Grid,
    family: str,
    axis: int | None = None,
    direction: Iterable[float] | None = None,
) -> list[HalfSpace]:
    """Enumerate the lattice-exact half-spaces of a named family.

    steiner(axis)
        All half-spaces whose hyperplane is parallel to {x_axis = 0} at a
        half-grid offset and which contain that hyperplane (both
        orientations, |offset| = m h/2 with m = 0 .. n-1).  A nonnegative
        field equals its polarization w.r.t. every member iff it is
        symmetric about {x_axis = 0} with slices nonincreasing away from it.
    through_origin
        Half-spaces with 0 on the hyperplane: axis normals and, in 2D, the
        two diagonals; both orientations (2 in 1D, 8 in 2D).
    through_origin_containing
        The subset of through_origin whose open half contains `direction`
        (strict inequality direction . normal > 0).
    """
    if family == "steiner":
        if axis is None:
            raise ParameterError("steiner family needs an axis")
        out = []
        for m in range(grid.n_per_axis):
            # H = {x_axis > -m h/2} and H = {x_axis < +m h/2}: both contain
            # the closed hyperplane {x_axis = 0} for m > 0, and for m = 0 are
            # the two open halves.
            out.append(axis_halfspace(grid, axis, +1, -m))
            out.append(axis_halfspace(grid, axis, -1, m))
        return out
    if family in ("through_origin", "through_origin_containing"):
        hss = []
        for ax in range(grid.dim):
            hss.append(axis_halfspace(grid, ax, +1, 0))
            hss.append(axis_halfspace(grid, ax, -1, 0))
        if grid.dim == 2:
            for d in (1, -1):
                for sign in (1, -1):
                    hss.append(diagonal_halfspace(grid, d, sign))
        if family == "through_origin":
            return hss
        if direction is None:
            raise ParameterError("through_origin_containing needs a direction")
        gamma = np.asarray(list(direction), dtype=float)
        if gamma.shape != (grid.dim,):
            raise ParameterError(f"direction must have {grid.dim} components")
        return [hs for hs in hss if float(gamma @ np.asarray(hs.normal)) > 1e-12]
    raise ParameterError(f"unknown half-space family {family!r}")


def through_origin_directions(grid: Grid) -> list[np.ndarray]:
    """Unit normals of the through-origin family (candidate symmetry axes)."""
    return [np.asarray(hs.normal) for hs in compatible_halfspaces(grid, "through_origin")]


# ---------------------------------------------------------------------------
# Mask diagnostics and shells
# ---------------------------------------------------------------------------

def mask_polarization_invariant(grid: Grid, hs: HalfSpace) -> bool:
    """Discrete test of mask_H == mask for the set polarization of `hs`.

    mask_H keeps a cell in H iff the cell or its mirror is inside, and keeps
    a cell off H iff both the cell and its mirror are inside.
    """
    n = grid.n_per_axis
    half = n // 2
    axes = [np.arange(-half, half)] * grid.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    keys = np.stack([m.ravel() for m in mesh], axis=1)
    inside = grid.inside.ravel()
    mirror = reflect_keys(grid, hs, keys)
    mirror_inside = np.zeros(keys.shape[0], dtype=bool)
    in_box = grid.key_in_box(mirror)
    if np.any(in_box):
        pos = tuple((mirror[in_box] + half).T)
        mirror_inside[in_box] = grid.inside[pos]
    side = side_of_keys(grid, hs, keys)
    pol = np.where(side > 0, inside | mirror_inside, inside & mirror_inside)
    pol = np.where(side == 0, inside, pol)
    return bool(np.array_equal(pol, inside))


def mask_reflection_invariant(grid: Grid, hs: HalfSpace) -> bool:
    """True iff the reflection of `hs` maps the inside mask onto itself."""
    return bool(np.all(reflect_all(grid, hs) != EXTERIOR))


def radial_shells(grid: Grid, width: float) -> list[np.ndarray]:
    """Partition inside cells into radial bins floor(|center| / width).

    Empty bins are omitted; the returned arrays are disjoint and cover all
    inside cells.
    """
    if width <= 0:
        raise ParameterError(f"shell width must be positive, got {width}")
    radii = np.linalg.norm(grid.centers, axis=1)
    bins = np.floor(radii / width).astype(int)
    return [np.nonzero(bins == b)[0] for b in np.unique(bins)]
