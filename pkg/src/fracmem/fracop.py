"""Dense quadratic form of the restricted fractional Laplacian on a mask.

For a function u on the inside cells, extended by zero outside the domain,
the energy (C_{N,s}/2) [u]_s^2 splits into interior pair interactions and a
diagonal "killing" contribution from the exterior.  Midpoint quadrature
with self-cell exclusion gives, for inside cells i != j,

    A_ij = -c_ns * h^{2N} * |x_i - x_j|^{-(N+2s)}

and on the diagonal

    A_ii = c_ns * h^N * ( h^N * sum_{j inside, j != i} K_ij + kappa_i ),

where kappa_i approximates the exterior integral of the kernel from x_i:
a midpoint sum over bounding-box cells that are not inside, plus a midpoint
sum over lattice cells beyond the box out to the truncation radius
R_t = 10 * diam(domain), plus the exact analytic tail of the radial kernel
beyond R_t.  The resulting matrix is symmetric, has nonpositive
off-diagonal entries and strictly dominant diagonal (the killing term is
positive), hence is positive definite; with the all-pairs kernel every two
cells interact, so the matrix is irreducible and the first eigenvector of
the associated pencils is simple and sign-definite.

Quadrature is first-order near the kernel singularity; accuracy is
controlled by grid refinement rather than higher-order corrections.
Assembly is dense and caps at 4096 cells by design (desk-scale tool).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma

from .errors import ParameterError, ShapeError, SizeLimitError
from .geometry import Grid

#: Dense-assembly cap; larger masks must reduce n.
MAX_CELLS = 4096

#: Truncation radius for the exterior quadrature, in units of diam(domain).
TRUNCATION_FACTOR = 10.0


@dataclass(frozen=True)
class FracParams:
    """Order s, dimension, and kernel normalization constant."""

    s: float
    dim: int
    c_ns: float

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ParameterError(f"s must lie in (0, 1), got {self.s}")
        if self.c_ns <= 0:
            raise ParameterError("normalization constant must be positive")


@dataclass(frozen=True)
class Operator:
    """Assembled stiffness matrix and diagonal mass for one grid.

    stiffness : (m, m) symmetric positive definite array
    mass : (m,) array, h^N per cell
    Immutable after assembly; concurrent reads are safe.
    """

    stiffness: np.ndarray
    mass: np.ndarray
    params: FracParams
    grid: Grid

    @property
    def n_cells(self) -> int:
        return self.mass.shape[0]


def normalization_constant(N: int, s: float) -> float:
    """Standard kernel normalization  s * 4^s * Gamma(N/2 + s) / (pi^{N/2} Gamma(1 - s)).

    For N=1, s=1/2 this equals 1/pi; for N=2, s=1/2 it equals 1/(2 pi).
    """
    if N < 1:
        raise ParameterError(f"dimension must be >= 1, got {N}")
    if not 0.0 < s < 1.0:
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    return s * 4.0**s * _gamma(N / 2.0 + s) / (math.pi ** (N / 2.0) * _gamma(1.0 - s))


def sphere_surface_measure(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1} (2 for N=1, 2*pi for N=2)."""
    return 2.0 * math.pi ** (N / 2.0) / _gamma(N / 2.0)


def _lattice_ball_kernel_sum(grid: Grid, power: float, radius: float) -> float:
    """Sum of |d*h|^{-power} over nonzero integer offsets d with |d*h| <= radius.

    Because inside-cell centers and all lattice centers differ by integer
    multiples of h, this sum is the same seen from every inside cell.
    """
    h = grid.h
    dmax = int(math.floor(radius / h))
    if grid.dim == 1:
        d = np.arange(1, dmax + 1, dtype=float)
        return float(2.0 * np.sum((d * h) ** (-power)))
    total = 0.0
    # row-wise to keep memory flat for large truncation radii
    for dx in range(-dmax, dmax + 1):
        rem = (radius / h) ** 2 - dx * dx
        if rem < 0:
            continue
        dy_max = int(math.floor(math.sqrt(rem)))
        dy = np.arange(-dy_max, dy_max + 1, dtype=float)
        r2 = (dx * dx + dy * dy) * h * h
        if dx == 0:
            r2 = r2[dy != 0]
        total += float(np.sum(r2 ** (-power / 2.0)))
    return total


def assemble_operator(grid: Grid, s: float) -> Operator:
    """Assemble the quadratic form u . A u = (c_ns/2) [u]_s^2 on the mask."""
    m = grid.n_cells
    if m > MAX_CELLS:
        raise SizeLimitError(
            f"{m} cells exceeds the dense limit of {MAX_CELLS}; reduce n"
        )
    N = grid.dim
    c_ns = normalization_constant(N, s)
    params = FracParams(s=s, dim=N, c_ns=c_ns)
    h = grid.h
    power = N + 2.0 * s
    x = grid.centers

    diff = x[:, None, :] - x[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(dist2, 1.0)
    K = dist2 ** (-power / 2.0)
    np.fill_diagonal(K, 0.0)

    diam = grid.spec.diameter()
    r_t = TRUNCATION_FACTOR * diam
    s_full = _lattice_ball_kernel_sum(grid, power, r_t)
    tail = sphere_surface_measure(N) * r_t ** (-2.0 * s) / (2.0 * s)

    inside_sums = K.sum(axis=1)
    # kappa_i = h^N * (box-exterior cells) + h^N * (beyond-box cells within R_t) + tail.
    # Every bounding-box cell of the supported domains lies within R_t of every
    # inside cell (R_t = 10 diam >= box diagonal), so the beyond-box midpoint sum
    # equals the full lattice-ball sum minus all box cells, and the box split
    # collapses to s_full minus the inside pair sums.  Guarded here, not assumed.
    box_diag = 2.0 * grid.spec.half_width() * math.sqrt(N)
    if r_t < box_diag:
        raise ParameterError(
            "truncation radius smaller than the bounding box diagonal; "
            "domain is too far off-center for this quadrature"
        )
    kappa = h**N * (s_full - inside_sums) + tail

    A = -c_ns * h ** (2 * N) * K
    np.fill_diagonal(A, c_ns * h**N * (h**N * inside_sums + kappa))
    A = 0.5 * (A + A.T)
    mass = np.full(m, grid.cell_measure)
    for arr in (A, mass):
        arr.setflags(write=False)
    return Operator(stiffness=A, mass=mass, params=params, grid=grid)


def quadratic_form(op: Operator, V: np.ndarray, u: np.ndarray) -> float:
    """Energy  u . A u + sum_i V_i u_i^2 m_i."""
    u = _check_field(op, u)
    V = _check_field(op, V)
    return float(u @ op.stiffness @ u + np.sum(V * u * u * op.mass))


def gagliardo_seminorm_sq(grid: Grid, s: float, u: np.ndarray, op: Operator | None = None) -> float:
    """Discrete squared seminorm [u]_s^2 = (2 / c_ns) u . A u.

    Includes the exterior pairs through the killing term (u is extended by
    zero outside the mask).  Pass a prebuilt operator to skip reassembly.
    """
    if op is None:
        op = assemble_operator(grid, s)
    elif op.grid is not grid or op.params.s != s:
        raise ShapeError("operator was assembled for a different grid or order")
    u = _check_field(op, u)
    return float((2.0 / op.params.c_ns) * (u @ op.stiffness @ u))


def _check_field(op: Operator, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (op.n_cells,):
        raise ShapeError(f"field shape {f.shape} does not match {op.n_cells} cells")
    return f
