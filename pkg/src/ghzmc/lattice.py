"""Hypercubic lattice geometry, bond enumeration, partitions, and energies.

Sites are indexed row-major over the d-dimensional grid and bonds are listed
in canonical (site index, axis) order, so every derived quantity is
bit-reproducible.  Spin configurations are plain length-N numpy arrays over
{-1, +1} (int8); bond sums are accumulated as integers and multiplied by the
coupling only at the end, so energies are exact at enumerable sizes.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry and thermodynamic parameters of one spin system.

    ``coupling`` is the ferromagnetic bond strength J > 0 and ``beta`` the
    inverse temperature; the Boltzmann weight of a configuration is
    exp(-beta * energy).
    """

    dimension: int
    linear_sizes: tuple
    boundary: Boundary = Boundary.PERIODIC
    coupling: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "linear_sizes", tuple(int(s) for s in self.linear_sizes))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if len(self.linear_sizes) != self.dimension:
            raise ValueError(
                f"expected {self.dimension} linear sizes, got {len(self.linear_sizes)}"
            )
        if any(s < 1 for s in self.linear_sizes):
            raise ValueError("linear sizes must be positive")
        if self.boundary is Boundary.PERIODIC and any(s < 3 for s in self.linear_sizes):
            # L = 2 with periodic wrap would enumerate the same site pair twice.
            raise ValueError("periodic lattices require every linear size >= 3")
        if not self.coupling > 0:
            raise ValueError("coupling J must be > 0 (ferromagnetic)")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.linear_sizes))

    @property
    def temperature(self) -> float:
        if self.beta == 0:
            return np.inf
        return 1.0 / self.beta

    def site_index(self, coords) -> int:
        idx = 0
        for c, size in zip(coords, self.linear_sizes):
            idx = idx * size + (c % size)
        return idx

    def site_coords(self, index: int) -> tuple:
        coords = []
        for size in reversed(self.linear_sizes):
            coords.append(index % size)
            index //= size
        return tuple(reversed(coords))


@lru_cache(maxsize=None)
def enumerate_bonds(spec: LatticeSpec) -> np.ndarray:
    """All nearest-neighbor bonds as an (n_bonds, 2) int32 array.

    Each unordered pair appears exactly once, ordered by (site, axis).
    Periodic lattices have exactly d*N bonds.
    """
    sizes = spec.linear_sizes
    periodic = spec.boundary is Boundary.PERIODIC
    bonds = []
    for site in range(spec.n_sites):
        coords = spec.site_coords(site)
        for axis in range(spec.dimension):
            if coords[axis] + 1 >= sizes[axis] and not periodic:
                continue
            nbr = list(coords)
            nbr[axis] = (coords[axis] + 1) % sizes[axis]
            bonds.append((site, spec.site_index(nbr)))
    out = np.asarray(bonds, dtype=np.int32).reshape(-1, 2)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def neighbor_table(spec: LatticeSpec) -> np.ndarray:
    """(N, 2d) table of neighbor site indices; -1 marks missing (open edge).

    Column order is (+axis0, -axis0, +axis1, -axis1, ...); the Monte Carlo
    kernels visit neighbors in this order, which pins down their random
    number consumption.
    """
    sizes = spec.linear_sizes
    periodic = spec.boundary is Boundary.PERIODIC
    table = np.full((spec.n_sites, 2 * spec.dimension), -1, dtype=np.int32)
    for site in range(spec.n_sites):
        coords = spec.site_coords(site)
        for axis in range(spec.dimension):
            for col, step in ((2 * axis, 1), (2 * axis + 1, -1)):
                c = coords[axis] + step
                if 0 <= c < sizes[axis]:
                    nbr = list(coords)
                    nbr[axis] = c
                    table[site, col] = spec.site_index(nbr)
                elif periodic:
                    nbr = list(coords)
                    nbr[axis] = c % sizes[axis]
                    table[site, col] = spec.site_index(nbr)
    table.setflags(write=False)
    return table


# ---------------------------------------------------------------------------
# Spin configurations
# ---------------------------------------------------------------------------

def all_up(spec: LatticeSpec) -> np.ndarray:
    return np.ones(spec.n_sites, dtype=np.int8)

def check_config(spec: LatticeSpec, sigma: np.ndarray):
    sigma = np.asarray(sigma)
    if sigma.shape != (spec.n_sites,):
        raise ValueError(f"configuration has shape {sigma.shape}, expected ({spec.n_sites},)")
    if not np.all(np.abs(sigma) == 1):
        raise ValueError("spins must be +1 or -1")

def global_flip(sigma: np.ndarray) -> np.ndarray:
    return (-sigma).astype(np.int8)

def flip_region(sigma: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Negate exactly the masked spins (an involution)."""
    out = np.array(sigma, dtype=np.int8, copy=True)
    out[np.asarray(mask, dtype=bool)] *= -1
    return out

def random_config(spec: LatticeSpec, np_rng) -> np.ndarray:
    return (2 * np_rng.integers(0, 2, size=spec.n_sites) - 1).astype(np.int8)


def energy(spec: LatticeSpec, sigma: np.ndarray) -> float:
    """Total energy -J * sum over bonds of s_i s_j."""
    check_config(spec, sigma)
    bonds = enumerate_bonds(spec)
    s = np.asarray(sigma, dtype=np.int64)
    return -spec.coupling * float(np.sum(s[bonds[:, 0]] * s[bonds[:, 1]]))


# ---------------------------------------------------------------------------
# Bipartitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bipartition:
    """Region A of a bipartition with its derived crossing/interior bond sets.

    ``boundary_bonds`` are the bonds with exactly one endpoint in A; the
    boundary Hamiltonian sums over these.  Complementing ``a_mask`` leaves
    them unchanged.
    """

    a_mask: np.ndarray
    boundary_bonds: np.ndarray
    interior_bonds: np.ndarray
    name: str = "custom"

    @property
    def boundary_size(self) -> int:
        return int(len(self.boundary_bonds))


def make_bipartition(spec: LatticeSpec, a_mask, name: str = "custom") -> Bipartition:
    a_mask = np.asarray(a_mask, dtype=bool)
    if a_mask.shape != (spec.n_sites,):
        raise ValueError(f"mask has shape {a_mask.shape}, expected ({spec.n_sites},)")
    bonds = enumerate_bonds(spec)
    crossing = a_mask[bonds[:, 0]] != a_mask[bonds[:, 1]]
    boundary = bonds[crossing].copy()
    interior = bonds[~crossing].copy()
    boundary.setflags(write=False)
    interior.setflags(write=False)
    mask = a_mask.copy()
    mask.setflags(write=False)
    return Bipartition(mask, boundary, interior, name=name)


def boundary_energy(spec: LatticeSpec, sigma: np.ndarray, part: Bipartition) -> float:
    """-J * sum over crossing bonds of s_i s_j (the boundary Hamiltonian)."""
    check_config(spec, sigma)
    b = part.boundary_bonds
    s = np.asarray(sigma, dtype=np.int64)
    return -spec.coupling * float(np.sum(s[b[:, 0]] * s[b[:, 1]]))


def boundary_pairs(part: Bipartition) -> np.ndarray:
    """Crossing bonds oriented as (site in A, facing site in the complement)."""
    b = part.boundary_bonds
    in_a = part.a_mask[b[:, 0]]
    out = np.where(in_a[:, None], b, b[:, ::-1])
    return out.astype(np.int32)


def preset_mask(spec: LatticeSpec, preset: str) -> np.ndarray:
    """Named partition presets used by the sweep experiments.

    ``half-cylinder``: slab of the first floor(L0/2) layers along axis 0.
    ``single-site``: site 0 only.
    ``block:r``: hypercube of side r at the origin corner.
    """
    n = spec.n_sites
    mask = np.zeros(n, dtype=bool)
    if preset == "half-cylinder":
        half = spec.linear_sizes[0] // 2
        if half < 1:
            raise ValueError("half-cylinder needs L0 >= 2")
        layer = n // spec.linear_sizes[0]
        mask[: half * layer] = True
    elif preset == "single-site":
        mask[0] = True
    elif preset.startswith("block:"):
        r = int(preset.split(":", 1)[1])
        if r < 1 or any(r > s for s in spec.linear_sizes):
            raise ValueError(f"block size {r} does not fit the lattice")
        for site in range(n):
            if all(c < r for c in spec.site_coords(site)):
                mask[site] = True
    else:
        raise ValueError(f"unknown partition preset {preset!r}")
    return mask


def is_contiguous(spec: LatticeSpec, part: Bipartition) -> bool:
    """True when both A and its complement are connected subgraphs."""
    nbr = neighbor_table(spec)

    def connected(mask):
        seeds = np.flatnonzero(mask)
        if len(seeds) == 0:
            return False
        seen = np.zeros(spec.n_sites, dtype=bool)
        stack = [int(seeds[0])]
        seen[seeds[0]] = True
        while stack:
            site = stack.pop()
            for j in nbr[site]:
                if j >= 0 and mask[j] and not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        return bool(np.all(seen[mask]))

    return connected(part.a_mask) and connected(~part.a_mask)


# ---------------------------------------------------------------------------
# Tripartitions (for conditional mutual information)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TripartitionABC:
    """Disjoint masks A, B, C covering all sites; B insulates A from C."""

    a_mask: np.ndarray
    b_mask: np.ndarray
    c_mask: np.ndarray
    r: int = 1


def validate_tripartition(spec: LatticeSpec, tri: TripartitionABC):
    a, b, c = tri.a_mask, tri.b_mask, tri.c_mask
    for m in (a, b, c):
        if np.asarray(m).shape != (spec.n_sites,):
            raise ValueError("tripartition masks must cover all sites")
    overlap = (a.astype(int) + b.astype(int) + c.astype(int))
    if not np.all(overlap == 1):
        raise ValueError("tripartition masks must be disjoint and cover all sites")
    bonds = enumerate_bonds(spec)
    ac = (a[bonds[:, 0]] & c[bonds[:, 1]]) | (c[bonds[:, 0]] & a[bonds[:, 1]])
    if np.any(ac):
        raise ValueError("tripartition has a bond connecting A and C (need r > 0)")


def make_tripartition(spec: LatticeSpec, a_sites, r: int = 1) -> TripartitionABC:
    """B = all sites within graph distance r of A (excluding A); C = rest."""
    if r < 1:
        raise ValueError("separation width r must be >= 1")
    a_mask = np.zeros(spec.n_sites, dtype=bool)
    a_mask[list(a_sites)] = True
    nbr = neighbor_table(spec)
    frontier = a_mask.copy()
    b_mask = np.zeros(spec.n_sites, dtype=bool)
    for _ in range(r):
        nxt = np.zeros(spec.n_sites, dtype=bool)
        for site in np.flatnonzero(frontier):
            for j in nbr[site]:
                if j >= 0 and not a_mask[j] and not b_mask[j]:
                    nxt[j] = True
        b_mask |= nxt
        frontier = nxt
    c_mask = ~(a_mask | b_mask)
    tri = TripartitionABC(a_mask, b_mask, c_mask, r=r)
    validate_tripartition(spec, tri)
    return tri
