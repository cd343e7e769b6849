"""Cell-centered grids, ghost-cell Neumann boundaries, and discrete operators.

Fields live at cell centers x_{i-1/2} = (i - 1/2) h with one ghost layer per
face.  Homogeneous Neumann boundary conditions are realized to second order by
mirroring: each ghost cell copies its face-adjacent interior cell.  On such
grids the 3-point / 7-point Laplacian, the centered gradient, and the
face-difference (staggered) gradient satisfy the usual discrete calculus,
in particular summation by parts:

    <-lap(f), g> == <face_gradient(f), face_gradient(g)>

holds exactly (to rounding) whenever f carries mirrored ghosts.  The centered
gradient does *not* satisfy this identity, which is why both gradients exist:
``gradient`` (centered) feeds the physics and the reported H1 norm,
``face_gradient`` feeds energy-stability checks.

Array layout: ``data[z, y, x, comp]`` (x fastest among cells, the three vector
components interleaved innermost).  1-D grids drop the leading axes:
``data[x, comp]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridSpec",
    "VectorField3",
    "TensorField",
    "GridMismatchError",
    "fill_ghosts",
    "laplacian",
    "gradient",
    "face_gradient",
    "face_inner",
    "avg_gradient",
    "inner_product",
    "lp_norm",
    "norms",
    "FieldNorms",
]


class GridMismatchError(ValueError):
    """Two fields that must share a grid do not."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid in 1 or 3 dimensions.

    ``n``, ``h`` and ``extent`` are per-axis tuples in (x, y, z) order and
    must satisfy h[a] * n[a] == extent[a].
    """

    dim: int
    n: tuple[int, ...]
    h: tuple[float, ...]
    extent: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 3):
            raise ValueError(f"dim must be 1 or 3, got {self.dim}")
        for name, t in (("n", self.n), ("h", self.h), ("extent", self.extent)):
            if len(t) != self.dim:
                raise ValueError(f"{name} must have {self.dim} entries, got {len(t)}")
        if any(nv < 1 for nv in self.n):
            raise ValueError("cell counts must be positive")
        if any(hv <= 0 for hv in self.h):
            raise ValueError("spacings must be positive")
        for a in range(self.dim):
            if abs(self.h[a] * self.n[a] - self.extent[a]) > 1e-12 * abs(self.extent[a]):
                raise ValueError(
                    f"axis {a}: h*n = {self.h[a] * self.n[a]!r} != extent {self.extent[a]!r}"
                )

    @classmethod
    def line(cls, n: int, length: float = 1.0) -> "GridSpec":
        return cls(dim=1, n=(n,), h=(length / n,), extent=(length,))

    @classmethod
    def box(cls, n: tuple[int, int, int], extent: tuple[float, float, float]) -> "GridSpec":
        h = tuple(extent[a] / n[a] for a in range(3))
        return cls(dim=3, n=tuple(n), h=h, extent=tuple(extent))

    @classmethod
    def unit_cube(cls, n: int) -> "GridSpec":
        return cls.box((n, n, n), (1.0, 1.0, 1.0))

    # numpy array axis for spatial axis a (x is the fastest-varying axis)
    def array_axis(self, a: int) -> int:
        return self.dim - 1 - a

    @property
    def shape_interior(self) -> tuple[int, ...]:
        return tuple(self.n[self.dim - 1 - i] for i in range(self.dim))

    @property
    def shape_ghosted(self) -> tuple[int, ...]:
        return tuple(s + 2 for s in self.shape_interior)

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def cell_centers(self, a: int) -> np.ndarray:
        return (np.arange(self.n[a]) + 0.5) * self.h[a]

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays (x, y, z as applicable) shaped like the interior."""
        axes = [self.cell_centers(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        z, y, x = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
        return x, y, z


@dataclass
class VectorField3:
    """Three-component field on a ghosted cell-centered grid."""

    grid: GridSpec
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        want = self.grid.shape_ghosted + (3,)
        if self.data.shape != want:
            raise ValueError(f"data shape {self.data.shape} != {want}")

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField3":
        return cls(grid, np.zeros(grid.shape_ghosted + (3,)))

    @classmethod
    def from_interior(cls, grid: GridSpec, values: np.ndarray) -> "VectorField3":
        """Wrap interior cell values (ghosts are filled by mirroring)."""
        f = cls(grid, np.empty(grid.shape_ghosted + (3,)))
        f.interior[...] = values
        return fill_ghosts(f)

    @property
    def interior(self) -> np.ndarray:
        sl = (slice(1, -1),) * self.grid.dim
        return self.data[sl]

    def copy(self) -> "VectorField3":
        return VectorField3(self.grid, self.data.copy())


@dataclass
class TensorField:
    """Per-cell 3x3 tensors: entry [a, c] = d(component c)/d(axis a).

    Rows for axes a >= dim are identically zero so that Frobenius norms are
    dimension-independent.
    """

    grid: GridSpec
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        want = self.grid.shape_interior + (3, 3)
        if self.data.shape != want:
            raise ValueError(f"data shape {self.data.shape} != {want}")


def _check_same_grid(f: VectorField3, g: VectorField3) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grids differ: {f.grid} vs {g.grid}")


def fill_ghosts(f: VectorField3) -> VectorField3:
    """Mirror every ghost cell from its face-adjacent interior cell (in place).

    Applied axis by axis, so edge/corner ghosts hold mirrored mirrors; the
    stencils never read those.  Idempotent.
    """
    d = f.data
    for ax in range(f.grid.dim):
        sl_lo = [slice(None)] * d.ndim
        sl_lo_src = [slice(None)] * d.ndim
        sl_lo[ax], sl_lo_src[ax] = 0, 1
        d[tuple(sl_lo)] = d[tuple(sl_lo_src)]
        sl_hi = [slice(None)] * d.ndim
        sl_hi_src = [slice(None)] * d.ndim
        sl_hi[ax], sl_hi_src[ax] = -1, -2
        d[tuple(sl_hi)] = d[tuple(sl_hi_src)]
    return f


def _shifted(data: np.ndarray, ax: int, off: int) -> np.ndarray:
    """Interior-shaped view of ghosted data shifted by off along array axis ax."""
    ndim = data.ndim - 1  # spatial axes only
    sl = [slice(1, -1)] * ndim + [slice(None)]
    sl[ax] = slice(1 + off, data.shape[ax] - 1 + off)
    return data[tuple(sl)]


def laplacian(f: VectorField3) -> VectorField3:
    """Centered second-difference Laplacian; requires mirrored ghosts on f."""
    g = f.grid
    out = VectorField3.zeros(g)
    acc = out.interior
    ctr = f.interior
    for a in range(g.dim):
        ax = g.array_axis(a)
        acc += (_shifted(f.data, ax, +1) - 2.0 * ctr + _shifted(f.data, ax, -1)) / g.h[a] ** 2
    return out


def gradient(f: VectorField3) -> TensorField:
    """Centered two-cell gradient; requires mirrored ghosts on f."""
    g = f.grid
    out = np.zeros(g.shape_interior + (3, 3))
    for a in range(g.dim):
        ax = g.array_axis(a)
        out[..., a, :] = (_shifted(f.data, ax, +1) - _shifted(f.data, ax, -1)) / (2.0 * g.h[a])
    return TensorField(g, out)


def face_gradient(f: VectorField3) -> list[np.ndarray]:
    """One-sided differences on cell faces, one array per axis.

    Along axis a the array has n[a]+1 entries in that direction (all faces,
    including the two boundary faces, which vanish when f carries mirrored
    ghosts).  This is the gradient compatible with summation by parts.
    """
    g = f.grid
    out = []
    for a in range(g.dim):
        ax = g.array_axis(a)
        ndim = f.data.ndim - 1
        sl_hi = [slice(1, -1)] * ndim + [slice(None)]
        sl_lo = [slice(1, -1)] * ndim + [slice(None)]
        sl_hi[ax] = slice(1, None)
        sl_lo[ax] = slice(0, -1)
        out.append((f.data[tuple(sl_hi)] - f.data[tuple(sl_lo)]) / g.h[a])
    return out


def face_inner(fg: list[np.ndarray], gg: list[np.ndarray], grid: GridSpec) -> float:
    """h^d-weighted inner product of two face gradients."""
    vol = grid.cell_volume
    return vol * float(sum(np.sum(a * b) for a, b in zip(fg, gg)))


def avg_gradient(f: VectorField3) -> TensorField:
    """Centered gradient of the half-cell-averaged field.

    Component c is first averaged along its own axis,
    (m_c)_i <- ((m_c)_i + (m_c)_{i-1}) / 2, the averaged field gets mirrored
    ghosts, then the centered gradient is taken.  Components whose axis does
    not exist (1-D) are left unaveraged.  Requires mirrored ghosts on f.
    """
    g = f.grid
    avg = VectorField3.zeros(g)
    avg.interior[...] = f.interior
    for c in range(min(3, g.dim)):
        ax = g.array_axis(c)
        avg.interior[..., c] = 0.5 * (
            _shifted(f.data, ax, 0)[..., c] + _shifted(f.data, ax, -1)[..., c]
        )
    fill_ghosts(avg)
    return gradient(avg)


def inner_product(f: VectorField3, g: VectorField3) -> float:
    """h^d sum over interior cells of f . g."""
    _check_same_grid(f, g)
    return f.grid.cell_volume * float(np.sum(f.interior * g.interior))


def lp_norm(f: VectorField3, p: float) -> float:
    """(h^d sum |f_I|^p)^(1/p) with |.| the per-cell Euclidean length."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    mag = np.sqrt(np.sum(f.interior**2, axis=-1))
    return float((f.grid.cell_volume * np.sum(mag**p)) ** (1.0 / p))


@dataclass(frozen=True)
class FieldNorms:
    linf: float
    l2: float
    h1: float
    h1_face: float  # staggered-gradient variant of the H1 norm


def norms(f: VectorField3) -> FieldNorms:
    """linf (max abs component), l2, and H1 (both gradient variants).

    H1 uses the centered gradient; ``h1_face`` swaps in the face-difference
    gradient.  Ghosts of f must be mirrored before calling.
    """
    linf = float(np.max(np.abs(f.interior))) if f.grid.num_cells else 0.0
    vol = f.grid.cell_volume
    l2sq = vol * float(np.sum(f.interior**2))
    gc = gradient(f)
    h1 = np.sqrt(l2sq + vol * float(np.sum(gc.data**2)))
    gf = face_gradient(f)
    h1f = np.sqrt(l2sq + face_inner(gf, gf, f.grid))
    return FieldNorms(linf=linf, l2=float(np.sqrt(l2sq)), h1=float(h1), h1_face=float(h1f))
