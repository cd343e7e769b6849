"""Linear solvers for the implicit stages.

The IMEX stages all need (I - lam * Lap_h) x = b with lam >= 0 constant, which
the type-II discrete cosine transform diagonalizes exactly on the mirrored-
ghost Neumann grid: the eigenvalues of Lap_h are

    mu_k = sum_a (2 / h_a^2) (cos(pi k_a / n_a) - 1),   k_a = 0 .. n_a - 1,

so a forward DCT, a per-mode division by (1 - lam * mu_k), and an inverse DCT
solve the system to rounding.  A plain FFT would impose periodicity instead.

BDF2 needs a variable-coefficient non-symmetric solve, done matrix-free with
restarted GMRES.  A dense LU path exists as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.fft import dctn, idctn
from scipy.sparse.linalg import LinearOperator, gmres

from .grid import GridSpec, VectorField3

__all__ = [
    "HelmholtzPlan",
    "helmholtz_plan",
    "helmholtz_solve",
    "GmresConfig",
    "GmresResult",
    "gmres_solve",
    "dense_helmholtz_matrix",
    "dense_oracle_solve",
]

DENSE_CELL_LIMIT = 4096


@dataclass(frozen=True)
class HelmholtzPlan:
    """Reusable spectral factorization of (I - lam * Lap_h) on one grid."""

    grid: GridSpec
    lam: float
    denominators: np.ndarray = field(repr=False)  # shape grid.shape_interior

    @property
    def spectral_denominators(self) -> np.ndarray:
        return self.denominators


def laplacian_eigenvalues(grid: GridSpec) -> np.ndarray:
    """Neumann cell-centered Laplacian spectrum, shaped like the interior."""
    mu = np.zeros(grid.shape_interior)
    for a in range(grid.dim):
        k = np.arange(grid.n[a])
        mu_a = (2.0 / grid.h[a] ** 2) * (np.cos(np.pi * k / grid.n[a]) - 1.0)
        shape = [1] * grid.dim
        shape[grid.array_axis(a)] = grid.n[a]
        mu = mu + mu_a.reshape(shape)
    return mu


def helmholtz_plan(grid: GridSpec, lam: float) -> HelmholtzPlan:
    if lam < 0:
        raise ValueError(f"lam must be >= 0 to keep the system SPD, got {lam}")
    denom = 1.0 - lam * laplacian_eigenvalues(grid)
    return HelmholtzPlan(grid=grid, lam=lam, denominators=denom)


def helmholtz_solve(plan: HelmholtzPlan, rhs: VectorField3) -> VectorField3:
    """Solve (I - lam*Lap_h) x = rhs per component via DCT-II.

    Only interior values of rhs are read; the result's ghosts are mirrored.
    Length-1 axes contribute a zero eigenvalue and are skipped in the
    transform.
    """
    if rhs.grid != plan.grid:
        raise ValueError("rhs grid does not match plan grid")
    shape = plan.grid.shape_interior
    axes = tuple(ax for ax in range(plan.grid.dim) if shape[ax] > 1)
    if not axes:
        return VectorField3.from_interior(
            plan.grid, rhs.interior / plan.denominators[..., None]
        )
    xhat = dctn(rhs.interior, type=2, axes=axes)
    xhat /= plan.denominators[..., None]
    out = VectorField3.from_interior(plan.grid, idctn(xhat, type=2, axes=axes))
    return out


@dataclass(frozen=True)
class GmresConfig:
    restart: int = 30
    max_iter: int = 500
    rel_tol: float = 1e-9

    def __post_init__(self):
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError("rel_tol must lie in (0, 1)")


@dataclass
class GmresResult:
    x: VectorField3
    iters: int
    converged: bool
    residual: float


def gmres_solve(
    apply: Callable[[VectorField3], VectorField3],
    rhs: VectorField3,
    cfg: GmresConfig,
    x0: VectorField3 | None = None,
) -> GmresResult:
    """Restarted GMRES on a matrix-free linear operator over interior values."""
    grid = rhs.grid
    shape = grid.shape_interior + (3,)
    nunk = int(np.prod(shape))

    def matvec(v: np.ndarray) -> np.ndarray:
        f = VectorField3.from_interior(grid, v.reshape(shape))
        return apply(f).interior.ravel().copy()

    op = LinearOperator((nunk, nunk), matvec=matvec)
    b = rhs.interior.ravel()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return GmresResult(VectorField3.zeros(grid), 0, True, 0.0)

    iters = 0

    def count(_):
        nonlocal iters
        iters += 1

    x0v = x0.interior.ravel() if x0 is not None else None
    try:
        sol, info = gmres(
            op,
            b,
            x0=x0v,
            rtol=cfg.rel_tol,
            atol=0.0,
            restart=cfg.restart,
            maxiter=cfg.max_iter,
            callback=count,
            callback_type="pr_norm",
        )
    except (np.linalg.LinAlgError, ValueError):  # Arnoldi breakdown
        return GmresResult(VectorField3.zeros(grid), iters, False, float("nan"))
    res = float(np.linalg.norm(matvec(sol) - b) / bnorm)
    x = VectorField3.from_interior(grid, sol.reshape(shape))
    return GmresResult(x=x, iters=iters, converged=(info == 0), residual=res)


def dense_helmholtz_matrix(grid: GridSpec, lam: float) -> np.ndarray:
    """Dense (I - lam*Lap_h) over interior cells, mirror BC folded into rows.

    Acts on a single scalar component; the vector operator is block-diagonal
    with three copies.  Guarded to small grids.
    """
    ncells = grid.num_cells
    if ncells > DENSE_CELL_LIMIT:
        raise ValueError(f"dense assembly limited to {DENSE_CELL_LIMIT} cells, got {ncells}")
    shape = grid.shape_interior
    A = np.eye(ncells)
    idx = np.arange(ncells).reshape(shape)
    for a in range(grid.dim):
        ax = grid.array_axis(a)
        coef = lam / grid.h[a] ** 2
        for cell in range(ncells):
            ii = list(np.unravel_index(cell, shape))
            for off in (-1, +1):
                jj = list(ii)
                jj[ax] += off
                if jj[ax] < 0 or jj[ax] >= shape[ax]:
                    jj = ii  # mirrored ghost folds onto the cell itself
                A[cell, idx[tuple(jj)]] -= coef
                A[cell, cell] += coef
    return A


def dense_oracle_solve(grid: GridSpec, lam: float, rhs: VectorField3) -> VectorField3:
    """LU-based reference solve of (I - lam*Lap_h) x = rhs."""
    A = dense_helmholtz_matrix(grid, lam)
    b = rhs.interior.reshape(grid.num_cells, 3)
    x = np.linalg.solve(A, b)
    return VectorField3.from_interior(grid, x.reshape(grid.shape_interior + (3,)))
