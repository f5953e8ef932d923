"""Lattice discretization of the unit ball and grid functions with
multiset values.

Nodes carry a QPoint value stored canonically; edges connect axis
neighbors at spacing delta.  The Dirichlet energy sums squared matching
distances over edges with weight delta^(m-2); the squared L2 distance
sums them over nodes with weight delta^m.  Boundary nodes are the lattice
points touching the sphere (or the interval endpoints for m = 1) and are
treated as hard constraints by every solver in this package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .qspace import make_qpoint, optimal_matching

__all__ = [
    "GridDomain",
    "QGridFunction",
    "InitialSpec",
    "build_domain",
    "domain_manifest",
    "make_grid_function",
    "sample_initial",
    "dirichlet_energy",
    "l2_distance_sq",
    "branch_mean_field",
    "branch_mean_residual",
    "translate_field",
    "scalar_dirichlet_energy",
    "write_snapshot_csv",
    "read_snapshot_csv",
]

_GEOM_TOL = 1e-12


@dataclass(frozen=True)
class GridDomain:
    """Masked lattice over the closed unit ball in R^m, m in {1, 2}."""

    m: int
    resolution: int
    delta: float
    coords: np.ndarray      # (num_nodes, m)
    is_boundary: np.ndarray  # (num_nodes,) bool
    edges: np.ndarray        # (num_edges, 2) node indices
    interior: np.ndarray     # indices of interior nodes

    def __post_init__(self):
        for name in ("coords", "is_boundary", "edges", "interior"):
            arr = getattr(self, name)
            arr.flags.writeable = False

    @property
    def num_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def same_as(self, other: "GridDomain") -> bool:
        return self.m == other.m and self.resolution == other.resolution


def build_domain(m: int, resolution: int) -> GridDomain:
    """Uniform grid of odd resolution >= 3 on [-1, 1]^m masked to |x| <= 1."""
    if m not in (1, 2):
        raise ValueError("m must be 1 or 2")
    if resolution < 3 or resolution % 2 == 0:
        raise ValueError("resolution must be odd and at least 3")
    axis = np.linspace(-1.0, 1.0, resolution)
    delta = 2.0 / (resolution - 1)

    if m == 1:
        coords = axis.reshape(-1, 1).copy()
        is_boundary = np.zeros(resolution, dtype=bool)
        is_boundary[0] = is_boundary[-1] = True
        idx = np.arange(resolution - 1)
        edges = np.column_stack([idx, idx + 1]).astype(np.int64)
    else:
        keep = {}
        coords_list = []
        for iy in range(resolution):
            for ix in range(resolution):
                x, y = axis[ix], axis[iy]
                if x * x + y * y <= 1.0 + _GEOM_TOL:
                    keep[(ix, iy)] = len(coords_list)
                    coords_list.append((x, y))
        coords = np.asarray(coords_list, dtype=float)
        nb = [(1, 0), (-1, 0), (0, 1), (0, -1)]
        is_boundary = np.zeros(len(coords_list), dtype=bool)
        edge_list = []
        for (ix, iy), k in keep.items():
            x, y = coords[k]
            on_sphere = x * x + y * y >= 1.0 - _GEOM_TOL
            missing = any((ix + dx, iy + dy) not in keep for dx, dy in nb)
            is_boundary[k] = on_sphere or missing
            for dx, dy in ((1, 0), (0, 1)):
                other = keep.get((ix + dx, iy + dy))
                if other is not None:
                    edge_list.append((k, other))
        edges = np.asarray(edge_list, dtype=np.int64).reshape(-1, 2)

    interior = np.flatnonzero(~is_boundary)
    # every interior node must see at least one edge
    touched = np.zeros(coords.shape[0], dtype=bool)
    touched[edges.ravel()] = True
    if not np.all(touched[interior]):
        raise ValueError("degenerate domain: isolated interior node")
    return GridDomain(m, resolution, delta, coords, is_boundary, edges, interior)


def domain_manifest(domain: GridDomain) -> dict:
    """JSON-ready description of the discretization."""
    return {
        "m": domain.m,
        "resolution": domain.resolution,
        "delta": domain.delta,
        "num_nodes": domain.num_nodes,
        "num_edges": domain.num_edges,
        "boundary_nodes": [int(i) for i in np.flatnonzero(domain.is_boundary)],
    }


def _canonical_rows(values: np.ndarray) -> np.ndarray:
    if values.shape[2] == 1:
        return np.sort(values, axis=1)
    out = values.copy()
    for i in range(out.shape[0]):
        order = np.lexsort(out[i].T[::-1])
        out[i] = out[i][order]
    return out


@dataclass(frozen=True)
class QGridFunction:
    """Node values of shape (num_nodes, q, n), canonical per node."""

    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 3 or vals.shape[0] != self.domain.num_nodes:
            raise ValueError("values must have shape (num_nodes, q, n)")
        if vals.shape[1] < 1 or vals.shape[2] < 1:
            raise ValueError("values must have q, n >= 1")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        vals = np.ascontiguousarray(_canonical_rows(vals))
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def q(self) -> int:
        return self.values.shape[1]

    @property
    def n(self) -> int:
        return self.values.shape[2]

    def value_at(self, node: int):
        return make_qpoint(self.values[node])


def make_grid_function(domain: GridDomain, values) -> QGridFunction:
    return QGridFunction(domain, np.asarray(values, dtype=float))


@dataclass(frozen=True)
class InitialSpec:
    """Named initial datum.  Polynomials are in the radial coordinate |x|,
    coefficients in ascending-degree order."""

    preset: str
    coeffs: tuple = field(default_factory=tuple)
    branch_coeffs: tuple = field(default_factory=tuple)


def sample_initial(spec: InitialSpec, domain: GridDomain, q: int) -> QGridFunction:
    if q < 1:
        raise ValueError("q must be at least 1")
    s = np.linalg.norm(domain.coords, axis=1)
    nn = domain.num_nodes

    if spec.preset in ("symmetric-cos", "symmetric-poly"):
        if q % 2 != 0:
            raise ValueError(f"preset {spec.preset!r} requires even q")
        if spec.preset == "symmetric-cos":
            g = np.cos(np.pi * s / 2.0)
        else:
            if not spec.coeffs:
                raise ValueError("symmetric-poly requires coefficients")
            g = np.maximum(npoly.polyval(s, np.asarray(spec.coeffs, float)), 0.0)
        half = q // 2
        vals = np.empty((nn, q, 1))
        vals[:, :half, 0] = -g[:, None]
        vals[:, half:, 0] = g[:, None]
    elif spec.preset == "branches":
        if len(spec.branch_coeffs) != q:
            raise ValueError(
                f"branches preset needs {q} coefficient groups, "
                f"got {len(spec.branch_coeffs)}"
            )
        vals = np.empty((nn, q, 1))
        for b, coeffs in enumerate(spec.branch_coeffs):
            if not len(coeffs):
                raise ValueError("empty coefficient group in branches preset")
            vals[:, b, 0] = npoly.polyval(s, np.asarray(coeffs, float))
    else:
        raise ValueError(f"unknown preset {spec.preset!r}")
    return QGridFunction(domain, vals)


def _check_same(f: QGridFunction, g: QGridFunction):
    if not f.domain.same_as(g.domain):
        raise ValueError("grid functions live on different domains")
    if f.q != g.q or f.n != g.n:
        raise ValueError("grid functions have different value shapes")


def _paired_costs(f: QGridFunction, a_vals: np.ndarray, b_vals: np.ndarray) -> float:
    """Sum of squared matching distances over paired value arrays."""
    if f.n == 1 or f.q == 1:
        return float(((a_vals - b_vals) ** 2).sum())
    total = 0.0
    for va, vb in zip(a_vals, b_vals):
        total += optimal_matching(make_qpoint(va), make_qpoint(vb)).cost
    return total


def dirichlet_energy(f: QGridFunction) -> float:
    """Edge sum of squared matching distances, weighted by delta^(m-2)."""
    d = f.domain
    ea, eb = d.edges[:, 0], d.edges[:, 1]
    return d.delta ** (d.m - 2) * _paired_costs(f, f.values[ea], f.values[eb])


def l2_distance_sq(f: QGridFunction, g: QGridFunction) -> float:
    """Node sum of squared matching distances, weighted by delta^m."""
    _check_same(f, g)
    d = f.domain
    return d.delta**d.m * _paired_costs(f, f.values, g.values)


def branch_mean_field(f: QGridFunction) -> np.ndarray:
    """Nodewise average of the branches, shape (num_nodes, n)."""
    return f.values.mean(axis=1)


def scalar_dirichlet_energy(domain: GridDomain, u: np.ndarray) -> float:
    """Dirichlet energy of a single-valued field, u of shape (num_nodes,)
    or (num_nodes, n)."""
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    ea, eb = domain.edges[:, 0], domain.edges[:, 1]
    return domain.delta ** (domain.m - 2) * float(((arr[ea] - arr[eb]) ** 2).sum())


def _neighbor_sums(domain: GridDomain, u: np.ndarray) -> np.ndarray:
    """For each node j: sum over incident edges of (u_j - u_neighbor)."""
    ea, eb = domain.edges[:, 0], domain.edges[:, 1]
    diff = u[ea] - u[eb]
    nn = domain.num_nodes
    return np.bincount(ea, weights=diff, minlength=nn) - np.bincount(
        eb, weights=diff, minlength=nn
    )


def branch_mean_residual(f_prev: QGridFunction, f_curr: QGridFunction, tau: float) -> float:
    """Max-norm residual of the implicit step equation for the branch mean.

    At interior nodes the mean of a converged step satisfies
    (mean_k - mean_{k-1}) / tau = discrete Laplacian of mean_k; the return
    value is the largest interior violation.  Equals the hat-function weak
    form divided by the node weight delta^m.
    """
    _check_same(f_prev, f_curr)
    if f_prev.n != 1:
        raise ValueError("branch mean residual is defined for n = 1")
    if tau <= 0:
        raise ValueError("tau must be positive")
    d = f_prev.domain
    mp = branch_mean_field(f_prev)[:, 0]
    mc = branch_mean_field(f_curr)[:, 0]
    lap = _neighbor_sums(d, mc) / d.delta**2
    res = (mc - mp)[d.interior] / tau + lap[d.interior]
    return float(np.max(np.abs(res), initial=0.0))


def translate_field(f: QGridFunction, phi) -> QGridFunction:
    """Shift every branch at node x by the single-valued field phi(x)."""
    arr = np.asarray(phi, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape != (f.domain.num_nodes, f.n):
        raise ValueError("phi must have shape (num_nodes, n)")
    return QGridFunction(f.domain, f.values + arr[:, None, :])


def write_snapshot_csv(f: QGridFunction, path):
    """One row per node: node index, m coordinates, then q*n branch
    coordinates in canonical order."""
    d = f.domain
    cols = ["node_index"]
    cols += [f"x{i}" for i in range(d.m)]
    cols += [f"v{i}" for i in range(f.q * f.n)]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for j in range(d.num_nodes):
            row = [str(j)]
            row += [format(c, ".17e") for c in d.coords[j]]
            row += [format(c, ".17e") for c in f.values[j].ravel()]
            fh.write(",".join(row) + "\n")


def read_snapshot_csv(path, domain: GridDomain, q: int, n: int = 1) -> QGridFunction:
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[0] != domain.num_nodes or raw.shape[1] != 1 + domain.m + q * n:
        raise ValueError("snapshot file does not match the domain shape")
    vals = raw[:, 1 + domain.m:].reshape(domain.num_nodes, q, n)
    return QGridFunction(domain, vals)
