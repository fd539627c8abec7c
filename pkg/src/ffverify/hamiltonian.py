"""Frustration-free Hamiltonians built from local projectors on a hypergraph.

Provides the ground projector, the spectral gap, and the commutation profile
(g, s, zeta, g~) that feeds every norm bound downstream.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import DegenerateSpectrum, InputError, NotFrustrationFree, ResourceError
from .graph import Edge, Hypergraph
from .linalg import ApplyPlan, FullOperator, LocalOperator
from .tolerances import (COMMUTE_TOL, DENSE_EIG_LIMIT, GROUND_TOL,
                         PROJECTOR_TOL, UNIT_SV_TOL, max_dim)


@dataclass(frozen=True, eq=False)
class FFHamiltonian:
    """Sum of local projectors, one per hyperedge, sharing a null vector."""

    graph: Hypergraph
    projectors: dict[Edge, LocalOperator]
    node_dims: dict[int, int]

    def __post_init__(self):
        dims = {int(k): int(v) for k, v in self.node_dims.items()}
        missing = [v for v in self.graph.vertices if v not in dims]
        if missing:
            raise InputError(f"no dimension for nodes {missing}")
        extra = set(self.projectors) - set(self.graph.edges)
        if extra:
            raise InputError(f"projectors for unknown edges {sorted(extra)}")
        projs = {}
        for e in self.graph.edges:
            if e not in self.projectors:
                raise InputError(f"no projector for edge {e}")
            op = self.projectors[e]
            if tuple(sorted(op.support)) != e:
                raise InputError(f"projector support {op.support} does not match edge {e}")
            for v in op.support:
                if op.node_dims[v] != dims[v]:
                    raise InputError(f"dimension mismatch on node {v}")
            if not op.is_hermitian(PROJECTOR_TOL):
                raise InputError(f"projector on {e} is not Hermitian")
            if linalg.operator_norm(op.matrix @ op.matrix - op.matrix) > PROJECTOR_TOL:
                raise InputError(f"operator on {e} is not a projector")
            projs[e] = op
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "node_dims", dims)
        object.__setattr__(self, "_cache", {})

    @property
    def node_order(self) -> tuple[int, ...]:
        return self.graph.vertices

    @property
    def dim(self) -> int:
        return math.prod(self.node_dims[v] for v in self.node_order)

    @cached_property
    def _plans(self) -> dict[Edge, ApplyPlan]:
        return {e: linalg.make_plan(op.matrix, op.support, self.node_order, self.node_dims)
                for e, op in self.projectors.items()}

    def apply_edge(self, e: Edge, vec: np.ndarray) -> np.ndarray:
        """P_e |vec> in the full space."""
        return self._plans[e](vec)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """H |vec> as a sum of local applications."""
        out = np.zeros_like(vec, dtype=complex)
        for plan in self._plans.values():
            out += plan(vec)
        return out

    def embedded(self, e: Edge) -> FullOperator:
        return linalg.embed(self.projectors[e], self.node_order, self.node_dims)

    def dense(self) -> np.ndarray:
        """Dense matrix of H; refuses above the configured dimension cap."""
        d = self.dim
        if d > max_dim():
            raise ResourceError(
                f"dense Hamiltonian of dimension {d} exceeds FFV_MAX_DIM={max_dim()}")
        out = np.zeros((d, d), dtype=complex)
        for e in self.graph.edges:
            out += self.embedded(e).matrix
        return out


@dataclass(frozen=True)
class SpectralProfile:
    """Scalar data entering the norm bounds for one Hamiltonian."""

    gamma: float
    ground_rank: int
    g: int
    s: float
    g_tilde: int
    zeta: float
    ordering: tuple[Edge, ...]

    def __post_init__(self):
        chain = (self.zeta, self.s ** 2 * self.g_tilde,
                 self.s ** 2 * self.g ** 2, float(self.g ** 2))
        for lo, hi in zip(chain, chain[1:]):
            if lo > hi + 1e-12:
                raise InputError(f"profile chain violated: {chain}")


def ground_space(h: FFHamiltonian, tol: float = GROUND_TOL,
                 dense_limit: int = DENSE_EIG_LIMIT) -> tuple[int, np.ndarray]:
    """Rank and orthonormal basis (dim x rank) of the zero-energy eigenspace."""
    key = ("ground", tol, dense_limit)
    if key in h._cache:
        return h._cache[key]
    result = _ground_space_uncached(h, tol, dense_limit)
    h._cache[key] = result
    return result


def _ground_space_uncached(h: FFHamiltonian, tol: float,
                           dense_limit: int) -> tuple[int, np.ndarray]:
    d = h.dim
    if not h.graph.edges:
        return d, np.eye(d, dtype=complex)
    if d <= dense_limit:
        vals, vecs = linalg.eigh(h.dense())
        rank = int(np.sum(vals < tol))
        if rank == 0:
            raise NotFrustrationFree(
                f"smallest eigenvalue {vals[0]:.3e} is above tolerance {tol}")
        return rank, vecs[:, :rank]
    if d > max_dim():
        raise ResourceError(
            f"dimension {d} exceeds FFV_MAX_DIM={max_dim()}; shrink the instance")
    k = 2
    while True:
        vals, vecs = linalg.lowest_eigenpairs(h.apply, d, k=k, tol=1e-12)
        if vals[0] >= tol:
            raise NotFrustrationFree(
                f"smallest eigenvalue {vals[0]:.3e} is above tolerance {tol}")
        if vals[-1] >= tol:
            rank = int(np.sum(vals < tol))
            return rank, vecs[:, :rank]
        k = min(2 * k, d - 1)
        if k >= d - 1:
            raise ResourceError("ground space saturates the iterative eigensolver")


def ground_projector(h: FFHamiltonian, tol: float = GROUND_TOL) -> tuple[FullOperator, int]:
    """Projector onto the zero-energy eigenspace plus its rank."""
    rank, basis = ground_space(h, tol)
    if h.dim > max_dim():
        raise ResourceError("dense ground projector exceeds the dimension cap")
    q0 = basis @ basis.conj().T
    return FullOperator(q0, h.node_order, h.node_dims), rank


def spectral_gap_gamma(h: FFHamiltonian, tol: float = GROUND_TOL,
                       dense_limit: int = DENSE_EIG_LIMIT) -> float:
    """Smallest eigenvalue of H above the ground cluster."""
    key = ("gamma", tol, dense_limit)
    if key in h._cache:
        return h._cache[key]
    result = _spectral_gap_uncached(h, tol, dense_limit)
    h._cache[key] = result
    return result


def _spectral_gap_uncached(h: FFHamiltonian, tol: float, dense_limit: int) -> float:
    if not h.graph.edges:
        raise DegenerateSpectrum("H = 0 has no spectral gap")
    d = h.dim
    if d <= dense_limit:
        vals, _ = linalg.eigh(h.dense())
        if vals[0] >= tol:
            raise NotFrustrationFree(
                f"smallest eigenvalue {vals[0]:.3e} is above tolerance {tol}")
        above = vals[vals >= tol]
        if len(above) == 0:
            raise DegenerateSpectrum("all eigenvalues sit in the ground cluster")
        return float(above[0])
    if d > max_dim():
        raise ResourceError(
            f"dimension {d} exceeds FFV_MAX_DIM={max_dim()}; shrink the instance")
    k = 4
    while True:
        vals, _ = linalg.lowest_eigenpairs(h.apply, d, k=k, tol=1e-12)
        if vals[0] >= tol:
            raise NotFrustrationFree(
                f"smallest eigenvalue {vals[0]:.3e} is above tolerance {tol}")
        above = vals[vals >= tol]
        if len(above) > 0:
            return float(above[0])
        k = min(2 * k, d - 1)
        if k >= d - 1:
            raise DegenerateSpectrum("all eigenvalues sit in the ground cluster")


def _pair_space(h: FFHamiltonian, e: Edge, f: Edge) -> tuple[np.ndarray, np.ndarray]:
    """Both projectors embedded in the joint support space (small and dense)."""
    nodes = tuple(sorted(set(e) | set(f)))
    dims = {v: h.node_dims[v] for v in nodes}
    a = linalg.embed(h.projectors[e], nodes, dims).matrix
    b = linalg.embed(h.projectors[f], nodes, dims).matrix
    return a, b


@dataclass(frozen=True, eq=False)
class CommutationStructure:
    """Edge-pair commutation data: g, s, and the ordering-dependent zeta, g~."""

    g: int
    s: float
    g_tilde: int
    zeta: float
    ordering: tuple[Edge, ...]
    pair_s: dict[frozenset, float]
    noncommuting: dict[Edge, tuple[Edge, ...]]


def _pair_data(h: FFHamiltonian) -> tuple[dict, dict]:
    """Nonunit singular values and commutation flags for all adjacent pairs."""
    if "pairs" in h._cache:
        return h._cache["pairs"]
    edges = h.graph.edges
    pair_s: dict[frozenset, float] = {}
    noncomm: dict[Edge, list[Edge]] = {e: [] for e in edges}
    for e, f in itertools.combinations(edges, 2):
        if not set(e) & set(f):
            continue  # disjoint supports commute exactly
        a, b = _pair_space(h, e, f)
        if linalg.commutator_norm(a, b) > COMMUTE_TOL:
            noncomm[e].append(f)
            noncomm[f].append(e)
        svals = linalg.singular_values(a @ b)
        below = svals[svals < 1.0 - UNIT_SV_TOL]
        pair_s[frozenset((e, f))] = float(below[0]) if len(below) else 0.0
    h._cache["pairs"] = (pair_s, noncomm)
    return pair_s, noncomm


def commutation_structure(h: FFHamiltonian,
                          ordering: Sequence[Edge] | None = None) -> CommutationStructure:
    """Pairwise projector data on joint supports; no diagonalization of H.

    s is the largest singular value of P_j P_k strictly below 1 - UNIT_SV_TOL
    over noncommuting pairs (commuting pairs only carry {0, 1} singular values,
    so including them changes nothing).
    """
    edges = h.graph.edges
    if ordering is None:
        ordering = edges
    ordering = tuple(tuple(sorted(e)) for e in ordering)
    if sorted(ordering) != sorted(edges):
        raise InputError("ordering must be a permutation of the edge set")

    pair_s, noncomm = _pair_data(h)
    g = max((len(v) for v in noncomm.values()), default=0)
    s = 0.0
    for e, fs in noncomm.items():
        for f in fs:
            s = max(s, pair_s[frozenset((e, f))])

    index = {e: i for i, e in enumerate(ordering)}
    nonset = {e: set(fs) for e, fs in noncomm.items()}
    # A_k = earlier noncommuting partners of edge k under the ordering
    a_sets = {k: [j for j in ordering if index[j] < index[k] and j in nonset[k]]
              for k in ordering}
    g_k = {k: len(a_sets[k]) for k in ordering}
    zeta = 0.0
    g_tilde = 0
    for j in ordering:
        later = [k for k in ordering if j in a_sets[k]]
        zeta_j = sum(g_k[k] * pair_s[frozenset((j, k))] ** 2 for k in later)
        zeta = max(zeta, zeta_j)
        g_tilde = max(g_tilde, sum(g_k[k] for k in later))
    return CommutationStructure(
        g=g, s=s, g_tilde=g_tilde, zeta=zeta, ordering=ordering,
        pair_s=pair_s, noncommuting={e: tuple(v) for e, v in noncomm.items()})


def spectral_profile(h: FFHamiltonian, ordering: Sequence[Edge] | None = None,
                     tol: float = GROUND_TOL,
                     gamma: float | None = None) -> SpectralProfile:
    """Full scalar profile; gamma is diagonalized unless supplied by the caller."""
    structure = commutation_structure(h, ordering)
    if gamma is None:
        gamma = spectral_gap_gamma(h, tol)
    rank, _ = ground_space(h, tol)
    return SpectralProfile(gamma=float(gamma), ground_rank=rank, g=structure.g,
                           s=structure.s, g_tilde=structure.g_tilde,
                           zeta=structure.zeta, ordering=structure.ordering)


def best_zeta_ordering(h: FFHamiltonian,
                       exhaustive_limit: int = 7) -> tuple[tuple[Edge, ...], float]:
    """Edge ordering minimizing zeta: exhaustive for small edge sets, greedy above."""
    structure = commutation_structure(h)
    edges = h.graph.edges

    def zeta_of(ordering):
        return commutation_structure(h, ordering).zeta

    if len(edges) <= exhaustive_limit:
        best = min(itertools.permutations(edges), key=zeta_of)
        return tuple(best), zeta_of(best)
    # greedy: place the edge with the most remaining noncommuting partners last
    remaining = list(edges)
    tail: list[Edge] = []
    while remaining:
        counts = {e: sum(1 for f in structure.noncommuting[e] if f in remaining)
                  for e in remaining}
        pick = max(remaining, key=lambda e: (counts[e], e))
        remaining.remove(pick)
        tail.append(pick)
    ordering = tuple(reversed(tail))
    return ordering, zeta_of(ordering)


def random_ff_instance(seed: int, nodes: Sequence[int], dims: dict[int, int] | Sequence[int],
                       edges: Iterable[Iterable[int]], ground_rank: int,
                       projector_ranks: dict[Edge, int] | None = None) -> FFHamiltonian:
    """Random frustration-free instance with a planted shared null space.

    Draws a Haar-random `ground_rank`-dimensional subspace, then for each edge
    a random local projector annihilating it.  The actual zero-energy space may
    exceed the planted one; the frustration-free property always holds.
    """
    nodes = tuple(int(v) for v in nodes)
    if not isinstance(dims, dict):
        dims = {v: int(d) for v, d in zip(nodes, dims)}
    g = Hypergraph(nodes, tuple(tuple(e) for e in edges))
    total = math.prod(dims[v] for v in g.vertices)
    if not 1 <= ground_rank <= total:
        raise InputError(f"ground rank {ground_rank} infeasible in dimension {total}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((total, ground_rank)) + 1j * rng.standard_normal((total, ground_rank))
    basis, _ = np.linalg.qr(raw)

    order = g.vertices
    shape = tuple(dims[v] for v in order)
    projectors = {}
    for e in g.edges:
        axes = tuple(order.index(v) for v in e)
        d_e = math.prod(dims[v] for v in e)
        rest = [a for a in range(len(order)) if a not in axes]
        # columns of the reshaped ground basis span the edge-local subspace the
        # projector must annihilate
        cols = []
        for i in range(ground_rank):
            t = basis[:, i].reshape(shape)
            t = np.transpose(t, axes + tuple(rest))
            cols.append(t.reshape(d_e, -1))
        w = np.concatenate(cols, axis=1)
        u, sv, _ = np.linalg.svd(w, full_matrices=True)
        keep = int(np.sum(sv > 1e-10))
        comp = u[:, keep:]  # orthonormal basis of the allowed subspace
        avail = comp.shape[1]
        if projector_ranks is not None and e in projector_ranks:
            r = projector_ranks[e]
            if r > avail:
                raise InputError(f"rank {r} infeasible on edge {e} (max {avail})")
        else:
            r = avail if avail == 0 else int(rng.integers(1, avail + 1))
        if r == 0:
            p = np.zeros((d_e, d_e), dtype=complex)
        else:
            mix = rng.standard_normal((avail, avail)) + 1j * rng.standard_normal((avail, avail))
            q, _ = np.linalg.qr(comp @ mix)
            v = q[:, :r]
            p = v @ v.conj().T
        p = (p + p.conj().T) / 2
        projectors[e] = LocalOperator(p, e, {v: dims[v] for v in e})
    return FFHamiltonian(g, projectors, dict(dims))


# ---------------------------------------------------------------------------
# serialization: graph JSON plus per-edge matrices in an npz container

def save_hamiltonian(h: FFHamiltonian, path) -> None:
    manifest = {
        "graph": json.loads(h.graph.to_json()),
        "node_dims": {str(k): v for k, v in h.node_dims.items()},
        "edges": [list(e) for e in h.graph.edges],
    }
    arrays = {f"edge_{i}": h.projectors[e].matrix
              for i, e in enumerate(h.graph.edges)}
    np.savez(path, manifest=json.dumps(manifest), **arrays)


def load_hamiltonian(path) -> FFHamiltonian:
    with np.load(path, allow_pickle=False) as data:
        try:
            manifest = json.loads(str(data["manifest"]))
            g = Hypergraph(tuple(manifest["graph"]["vertices"]),
                           tuple(tuple(e) for e in manifest["graph"]["edges"]))
            dims = {int(k): int(v) for k, v in manifest["node_dims"].items()}
            projectors = {}
            for i, e in enumerate(tuple(tuple(sorted(e)) for e in manifest["edges"])):
                matrix = np.asarray(data[f"edge_{i}"], dtype=complex)
                projectors[e] = LocalOperator(matrix, e, {v: dims[v] for v in e})
        except KeyError as exc:
            raise InputError(f"malformed Hamiltonian container: missing {exc}") from exc
    return FFHamiltonian(g, projectors, dims)
