"""Spin operators, AKLT Hamiltonians, spin-measurement bond tests, and
spherical designs.

Each graph vertex j carries spin deg(j)/2; each edge gets the projector onto
the maximal total-spin subspace of its two nodes.  Bond tests measure both
spins along a common direction and fail only on aligned extremal outcomes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg
from .errors import InputError
from .graph import Hypergraph, Edge, degree
from .hamiltonian import FFHamiltonian
from .linalg import LocalOperator
from .tolerances import (PROB_SUM_TOL, SPIN_CLUSTER_TOL, UNIT_VECTOR_TOL)


@dataclass(frozen=True)
class SpinValue:
    """Spin quantum number stored as 2S so half-integers stay exact."""

    twice_s: int

    def __post_init__(self):
        if self.twice_s < 1:
            raise InputError("spin must be at least 1/2")

    @property
    def dimension(self) -> int:
        return self.twice_s + 1

    @property
    def spin(self) -> float:
        return self.twice_s / 2.0


@lru_cache(maxsize=None)
def spin_operators(twice_s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(S_x, S_y, S_z) in the basis m = S, S-1, ..., -S."""
    s = SpinValue(twice_s).spin
    d = twice_s + 1
    m = s - np.arange(d)
    sz = np.diag(m).astype(complex)
    # <m+1| S_+ |m> = sqrt(S(S+1) - m(m+1))
    raising = np.zeros((d, d), dtype=complex)
    for i in range(1, d):
        mm = m[i]
        raising[i - 1, i] = math.sqrt(s * (s + 1) - mm * (mm + 1))
    sx = (raising + raising.conj().T) / 2
    sy = (raising - raising.conj().T) / (2j)
    for a in (sx, sy, sz):
        a.setflags(write=False)
    return sx, sy, sz


def spin_along(twice_s: int, direction: np.ndarray) -> np.ndarray:
    r = np.asarray(direction, dtype=float)
    if r.shape != (3,) or abs(np.linalg.norm(r) - 1.0) > UNIT_VECTOR_TOL:
        raise InputError("direction must be a unit 3-vector")
    sx, sy, sz = spin_operators(twice_s)
    return r[0] * sx + r[1] * sy + r[2] * sz


def coherent_extremes(twice_s: int, direction) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors of the spin component along `direction` with eigenvalues
    +S and -S, phase fixed by making the largest amplitude real positive."""
    op = spin_along(twice_s, np.asarray(direction, dtype=float))
    vals, vecs = linalg.eigh(op)
    minus = vecs[:, 0]
    plus = vecs[:, -1]

    def fix_phase(v):
        i = int(np.argmax(np.abs(v)))
        phase = v[i] / abs(v[i])
        return v / phase

    return fix_phase(plus), fix_phase(minus)


@lru_cache(maxsize=None)
def coupled_spin_projector(twice_sj: int, twice_sk: int) -> np.ndarray:
    """Projector onto the maximal total-spin subspace of two coupled spins.

    Built from the eigendecomposition of (S_j + S_k)^2 with eigenvalue
    clustering, avoiding explicit recoupling tables.
    """
    dj, dk = twice_sj + 1, twice_sk + 1
    total = np.zeros((dj * dk, dj * dk), dtype=complex)
    for a, b in zip(spin_operators(twice_sj)[:3], spin_operators(twice_sk)[:3]):
        joint = np.kron(a, np.eye(dk)) + np.kron(np.eye(dj), b)
        total += joint @ joint
    s_e = (twice_sj + twice_sk) / 2
    target = s_e * (s_e + 1)
    vals, vecs = linalg.eigh(total)
    mask = np.abs(vals - target) < SPIN_CLUSTER_TOL
    rank = int(np.sum(mask))
    if rank != twice_sj + twice_sk + 1:
        raise InputError(
            f"top spin sector has rank {rank}, expected {twice_sj + twice_sk + 1}")
    v = vecs[:, mask]
    p = v @ v.conj().T
    p = (p + p.conj().T) / 2
    p.setflags(write=False)
    return p


@dataclass(frozen=True)
class Bond:
    """An edge of an AKLT Hamiltonian together with its two node spins."""

    edge: Edge
    twice_sj: int
    twice_sk: int

    @property
    def twice_se(self) -> int:
        return self.twice_sj + self.twice_sk

    @property
    def total_spin(self) -> float:
        return self.twice_se / 2.0

    @property
    def dim(self) -> int:
        return (self.twice_sj + 1) * (self.twice_sk + 1)

    @property
    def top_projector(self) -> np.ndarray:
        return coupled_spin_projector(self.twice_sj, self.twice_sk)

    @property
    def ground_projector(self) -> np.ndarray:
        return np.eye(self.dim) - self.top_projector


def aklt_hamiltonian(g: Hypergraph) -> FFHamiltonian:
    """AKLT Hamiltonian of a loopless simple graph: spin deg(j)/2 per node,
    maximal total-spin projector per edge."""
    if not g.edges:
        raise InputError("graph has no edges")
    if not g.is_simple_graph():
        raise InputError("AKLT construction needs a loopless simple graph")
    dims = {}
    for v in g.vertices:
        d = degree(g, v)
        if d < 1:
            raise InputError(f"vertex {v} is isolated")
        dims[v] = d + 1  # 2S_j + 1 with S_j = deg(j)/2
    projectors = {}
    for e in g.edges:
        j, k = e
        p = coupled_spin_projector(degree(g, j), degree(g, k))
        projectors[e] = LocalOperator(p, e, {j: dims[j], k: dims[k]})
    return FFHamiltonian(g, projectors, dims)


def bond(h: FFHamiltonian, e) -> Bond:
    """Bond view of an edge of an AKLT-style Hamiltonian."""
    e = tuple(sorted(int(v) for v in e))
    if e not in set(h.graph.edges):
        raise InputError(f"{e} is not an edge of the Hamiltonian")
    j, k = e
    return Bond(e, h.node_dims[j] - 1, h.node_dims[k] - 1)


def bonds(h: FFHamiltonian) -> tuple[Bond, ...]:
    return tuple(bond(h, e) for e in h.graph.edges)


def bond_test_projector(b: Bond, direction) -> np.ndarray:
    """Two-outcome spin test along a direction: fail on aligned extremal
    outcomes; identical for antipodal directions."""
    plus_j, minus_j = coherent_extremes(b.twice_sj, direction)
    plus_k, minus_k = coherent_extremes(b.twice_sk, direction)
    both_plus = np.kron(plus_j, plus_k)
    both_minus = np.kron(minus_j, minus_k)
    r = np.eye(b.dim, dtype=complex)
    r -= np.outer(both_plus, both_plus.conj())
    r -= np.outer(both_minus, both_minus.conj())
    return r


@dataclass(frozen=True, eq=False)
class DirectionDistribution:
    """Finitely supported probability measure on the unit sphere."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] == 0:
            raise InputError("points must be a nonempty (n, 3) array")
        norms = np.linalg.norm(pts, axis=1)
        if np.max(np.abs(norms - 1.0)) > UNIT_VECTOR_TOL:
            raise InputError("all points must lie on the unit sphere")
        if self.weights is None:
            w = np.full(len(pts), 1.0 / len(pts))
        else:
            w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(pts),) or np.any(w < 0):
            raise InputError("weights must be nonnegative, one per point")
        if abs(w.sum() - 1.0) > PROB_SUM_TOL:
            raise InputError(f"weights sum to {w.sum()}, expected 1")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    @classmethod
    def uniform(cls, points) -> "DirectionDistribution":
        points = np.asarray(points, dtype=float)
        return cls(points, np.full(len(points), 1.0 / len(points)))

    def rotated(self, rotation: np.ndarray) -> "DirectionDistribution":
        return DirectionDistribution(self.points @ np.asarray(rotation).T, self.weights)

    def to_json(self) -> str:
        return json.dumps({"points": self.points.tolist(),
                           "weights": self.weights.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DirectionDistribution":
        try:
            data = json.loads(text)
            pts = data["points"]
            w = data.get("weights")
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise InputError(f"malformed design JSON: {exc}") from exc
        pts = np.asarray(pts, dtype=float)
        if w is None:
            return cls.uniform(pts)
        return cls(pts, np.asarray(w, dtype=float))

    @classmethod
    def from_file(cls, path) -> "DirectionDistribution":
        with open(path) as fh:
            return cls.from_json(fh.read())


def symmetrize(mu: DirectionDistribution) -> DirectionDistribution:
    """Average of the distribution and its center inversion."""
    points = np.concatenate([mu.points, -mu.points])
    weights = np.concatenate([mu.weights, mu.weights]) / 2.0
    return DirectionDistribution(points, weights)


def frame_potential(mu: DirectionDistribution, t: int) -> float:
    """Sum_ij w_i w_j (r_i . r_j)^t."""
    if t < 0 or int(t) != t:
        raise InputError("frame potential order must be a nonnegative integer")
    dots = mu.points @ mu.points.T
    return float(mu.weights @ (dots ** int(t)) @ mu.weights)


def is_design(mu: DirectionDistribution, t: int, tol: float = 1e-9) -> bool:
    """Whether the symmetrized distribution is a spherical t-design.

    Checked via the even frame potentials F_k = 1/(k+1) for k <= t; odd
    moments of the symmetrized distribution vanish identically.
    """
    sym = symmetrize(mu)
    for k in range(2, int(t) + 1, 2):
        if abs(frame_potential(sym, k) - 1.0 / (k + 1)) > tol:
            return False
    return True


def design_order(mu: DirectionDistribution, max_t: int = 20, tol: float = 1e-9) -> int:
    """Largest t <= max_t for which the symmetrized distribution is a t-design."""
    order = 1
    for k in range(2, max_t + 1, 2):
        if abs(frame_potential(symmetrize(mu), k) - 1.0 / (k + 1)) > tol:
            break
        order = k + 1
    return min(order, max_t)


_PHI = (1.0 + math.sqrt(5.0)) / 2.0


def _cyclic(coords):
    x, y, z = coords
    return [(x, y, z), (z, x, y), (y, z, x)]


def _catalog_points(name: str) -> np.ndarray:
    if name == "tetrahedron":
        pts = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif name == "octahedron":
        pts = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    elif name == "cube":
        pts = [(x, y, z) for x in (1, -1) for y in (1, -1) for z in (1, -1)]
    elif name == "icosahedron":
        pts = []
        for s1 in (1, -1):
            for s2 in (1, -1):
                pts.extend(_cyclic((0.0, s1 * 1.0, s2 * _PHI)))
    elif name == "dodecahedron":
        pts = [(x, y, z) for x in (1, -1) for y in (1, -1) for z in (1, -1)]
        for s1 in (1, -1):
            for s2 in (1, -1):
                pts.extend(_cyclic((0.0, s1 / _PHI, s2 * _PHI)))
    else:
        raise InputError(f"unknown design name {name!r}")
    arr = np.asarray(pts, dtype=float)
    return arr / np.linalg.norm(arr, axis=1)[:, None]


#: design order t of each catalog entry
CATALOG_ORDERS = {"tetrahedron": 2, "octahedron": 3, "cube": 3,
                  "icosahedron": 5, "dodecahedron": 5}


def design_catalog(name: str) -> DirectionDistribution:
    """Uniform distribution on the vertices of a platonic solid."""
    return DirectionDistribution.uniform(_catalog_points(name))


@dataclass(frozen=True, eq=False)
class BondOperator:
    """Average of bond tests for one edge; None distribution means isotropic."""

    bond: Bond
    matrix: np.ndarray
    distribution: DirectionDistribution | None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.bond.dim,) * 2:
            raise InputError("bond operator has the wrong dimension")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def edge(self) -> Edge:
        return self.bond.edge

    @property
    def gap(self) -> float:
        """nu_e = 1 - ||Omega_e - Q_e||."""
        return 1.0 - linalg.operator_norm(self.matrix - self.bond.ground_projector)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))


def bond_operator(b: Bond, mu: DirectionDistribution) -> BondOperator:
    """Weighted average of the bond tests drawn from mu."""
    omega = np.zeros((b.dim, b.dim), dtype=complex)
    for w, r in zip(mu.weights, mu.points):
        omega += w * bond_test_projector(b, r)
    return BondOperator(b, omega, mu)


def isotropic_bond_operator(b: Bond) -> BondOperator:
    """Closed form of the direction-averaged bond operator:
    Q_e + (2S_e - 1)/(2S_e + 1) P_e, with gap 2/(2S_e + 1)."""
    t = b.twice_se
    omega = b.ground_projector + ((t - 1) / (t + 1)) * b.top_projector
    return BondOperator(b, omega, None)


def isotropic_gap(twice_se: int) -> float:
    return 2.0 / (twice_se + 1)


def overlap_trace(twice_se: int, c: float) -> float:
    """tr[(R_r - Q_e)(R_s - Q_e)] as a function of cos angle c = r.s:
    2S_e - 3 + 2((1+c)/2)^(2S_e) + 2((1-c)/2)^(2S_e)."""
    if not -1.0 <= c <= 1.0:
        raise InputError("cosine must lie in [-1, 1]")
    t = twice_se
    return t - 3 + 2 * ((1 + c) / 2) ** t + 2 * ((1 - c) / 2) ** t


def overlap_trace_binomial(twice_se: int, c: float) -> float:
    """Even-power expansion of overlap_trace; equal by a binomial identity."""
    if not -1.0 <= c <= 1.0:
        raise InputError("cosine must lie in [-1, 1]")
    t = twice_se
    acc = sum(math.comb(t, 2 * j) * c ** (2 * j) for j in range(t // 2 + 1))
    return t - 3 + 2.0 ** (2 - t) * acc


def overlap_trace_matrix(b: Bond, r, s) -> float:
    """Direct matrix evaluation of tr[(R_r - Q_e)(R_s - Q_e)]."""
    q = b.ground_projector
    a = bond_test_projector(b, r) - q
    bm = bond_test_projector(b, s) - q
    return float(np.real(np.trace(a @ bm)))


def trace_floor(twice_se: int) -> float:
    """Lower bound on tr(Omega_e - Q_e)^2: (2S_e - 1)^2 / (2S_e + 1)."""
    t = twice_se
    return (t - 1) ** 2 / (t + 1)


@dataclass(frozen=True)
class BondDesignReport:
    """Equivalence suite for one bond operator built from a distribution.

    The four statements (maximal gap, exact closed form, homogeneity, and the
    symmetrized distribution being a 2S_e-design) hold or fail together.
    """

    twice_se: int
    gap: float
    gap_is_maximal: bool
    matches_closed_form: bool
    is_homogeneous: bool
    is_design: bool
    trace_sq: float
    floor: float
    statements_agree: bool
    floor_holds: bool

    @property
    def passed(self) -> bool:
        return self.statements_agree and self.floor_holds


def bond_design_report(b: Bond, mu: DirectionDistribution,
                       tol: float = 1e-9) -> BondDesignReport:
    """Evaluate the four equivalent optimality statements plus the trace floor."""
    op = bond_operator(b, mu)
    t = b.twice_se
    gap = op.gap
    gap_max = abs(gap - isotropic_gap(t)) < tol

    p = b.top_projector
    q = b.ground_projector
    closed = q + ((t - 1) / (t + 1)) * p
    matches = linalg.operator_norm(op.matrix - closed) < tol

    # best homogeneous fit: lambda = tr[(Omega - Q) P] / tr P
    o = op.matrix - q
    lam = float(np.real(np.trace(o @ p))) / float(np.real(np.trace(p)))
    homogeneous = linalg.operator_norm(op.matrix - q - lam * p) < tol

    design = is_design(mu, t, tol)
    trace_sq = float(np.real(np.trace(o @ o)))
    floor = trace_floor(t)

    flags = (gap_max, matches, homogeneous, design)
    return BondDesignReport(
        twice_se=t, gap=gap, gap_is_maximal=gap_max, matches_closed_form=matches,
        is_homogeneous=homogeneous, is_design=design, trace_sq=trace_sq,
        floor=floor, statements_agree=all(flags) or not any(flags),
        floor_holds=trace_sq >= floor - tol)
