"""Matching/coloring verification protocols: exact spectral gaps, the
closed-form lower bounds, sample counts, and competitor cost formulas.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .aklt import BondOperator, DirectionDistribution, bond, bond_operator, \
    isotropic_bond_operator
from .errors import InputError, ResourceError
from .graph import Edge, MatchingCover, max_degree, Hypergraph
from .hamiltonian import FFHamiltonian, ground_space, spectral_profile
from .linalg import ApplyPlan, FullOperator, LocalOperator
from .tolerances import DENSE_EIG_LIMIT, GROUND_TOL, max_dim


@dataclass(frozen=True, eq=False)
class Protocol:
    """Matching cover plus one bond verification operator per edge."""

    hamiltonian: FFHamiltonian
    cover: MatchingCover
    bond_ops: dict[Edge, BondOperator]

    def __post_init__(self):
        h = self.hamiltonian
        if self.cover.edge_union != set(h.graph.edges):
            raise InputError("cover does not match the Hamiltonian's edge set")
        ops = {}
        for e in h.graph.edges:
            if e not in self.bond_ops:
                raise InputError(f"no bond operator for edge {e}")
            op = self.bond_ops[e]
            if op.edge != e:
                raise InputError(f"bond operator for {op.edge} filed under {e}")
            q = op.bond.ground_projector
            defect = linalg.operator_norm(op.matrix @ q - q)
            if defect > 1e-10:
                raise InputError(
                    f"bond operator on {e} moves the target subspace ({defect:.2e})")
            ops[e] = op
        object.__setattr__(self, "bond_ops", ops)

    @property
    def nu_e(self) -> float:
        """Minimum bond gap over all edges."""
        return min(op.gap for op in self.bond_ops.values())

    @cached_property
    def _plans(self) -> dict[Edge, ApplyPlan]:
        h = self.hamiltonian
        return {e: linalg.make_plan(op.matrix, e, h.node_order, h.node_dims)
                for e, op in self.bond_ops.items()}

    def apply_test(self, matching: Sequence[Edge], vec: np.ndarray) -> np.ndarray:
        out = vec
        for e in matching:
            out = self._plans[tuple(sorted(e))](out)
        return out

    def apply_omega(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros_like(vec, dtype=complex)
        for m, p in zip(self.cover.matchings, self.cover.probabilities):
            out += p * self.apply_test(m, vec)
        return out


def test_operator(protocol: Protocol, matching: Sequence[Edge]) -> FullOperator:
    """Dense product of the embedded bond operators of one matching.

    The supports are pairwise disjoint, so the factors commute and the order
    is immaterial; the ground space is left untouched.
    """
    h = protocol.hamiltonian
    edges = [tuple(sorted(e)) for e in matching]
    for e in edges:
        if e not in set(h.graph.edges):
            raise InputError(f"{e} is not an edge of the Hamiltonian")
    claimed = set()
    for e in edges:
        if claimed & set(e):
            raise InputError("edges do not form a matching")
        claimed.update(e)
    d = h.dim
    if d > max_dim():
        raise ResourceError(f"dense test operator of dimension {d} exceeds the cap")
    out = np.eye(d, dtype=complex)
    for e in edges:
        local = LocalOperator(protocol.bond_ops[e].matrix, e,
                              {v: h.node_dims[v] for v in e})
        out = linalg.embed(local, h.node_order, h.node_dims).matrix @ out
    return FullOperator(out, h.node_order, h.node_dims)


def verification_operator(protocol: Protocol) -> FullOperator:
    """Dense probability-weighted average of the test operators."""
    h = protocol.hamiltonian
    d = h.dim
    if d > max_dim():
        raise ResourceError(f"dense verification operator of dimension {d} exceeds the cap")
    out = np.zeros((d, d), dtype=complex)
    for m, p in zip(protocol.cover.matchings, protocol.cover.probabilities):
        out += p * test_operator(protocol, m).matrix
    return FullOperator(out, h.node_order, h.node_dims)


def spectral_gap_nu(omega: np.ndarray | FullOperator, q0: np.ndarray | FullOperator) -> float:
    """nu = 1 - ||(1 - Q0) Omega (1 - Q0)|| for a dense verification operator."""
    om = omega.matrix if isinstance(omega, FullOperator) else np.asarray(omega, dtype=complex)
    q = q0.matrix if isinstance(q0, FullOperator) else np.asarray(q0, dtype=complex)
    if om.shape != q.shape:
        raise InputError("operator and projector dimensions differ")
    defect = linalg.operator_norm(om @ q - q)
    if defect > 1e-9:
        raise InputError(f"Omega does not fix the target subspace ({defect:.2e})")
    comp = np.eye(om.shape[0]) - q
    return 1.0 - linalg.operator_norm(comp @ om @ comp)


def measured_gap(protocol: Protocol, tol: float = GROUND_TOL,
                 dense_limit: int = DENSE_EIG_LIMIT) -> float:
    """Exact spectral gap of the protocol's verification operator.

    Dense at small dimension; Krylov iteration on the deflated operator above.
    """
    h = protocol.hamiltonian
    d = h.dim
    rank, basis = ground_space(h, tol)
    if d <= dense_limit:
        omega = verification_operator(protocol).matrix
        q0 = basis @ basis.conj().T
        return spectral_gap_nu(omega, q0)
    if d > max_dim():
        raise ResourceError(
            f"dimension {d} exceeds FFV_MAX_DIM={max_dim()}; shrink the instance")

    def deflated(v):
        v = v - basis @ (basis.conj().T @ v)
        v = protocol.apply_omega(v)
        return v - basis @ (basis.conj().T @ v)

    top = linalg.largest_eigenvalue(deflated, d, tol=1e-12)
    return 1.0 - top


# ---------------------------------------------------------------------------
# closed-form bounds

def gap_factor(m: int, x: float) -> float:
    """Shape factor of the matching-protocol gap bound.

    (sqrt(1+x) - 1)/sqrt(1+x) for m = 2 and (sqrt(1+x) - 1)/(sqrt(1+x) + 1)
    for m >= 3; monotone increasing and concave, with limits 0 at x = 0 and
    1 as x -> infinity.
    """
    if m < 2:
        raise InputError("need at least two matchings")
    if x < 0:
        raise InputError("argument must be nonnegative")
    if math.isinf(x):
        return 1.0
    root = math.sqrt(1.0 + x)
    if m == 2:
        return (root - 1.0) / root
    return (root - 1.0) / (root + 1.0)


def matching_gap_bounds(m: int, nu_e: float, gamma: float, s: float,
                        g: int) -> tuple[float, float]:
    """(strong, weak) lower bounds on the gap of a matching protocol.

    strong = (nu_e/m) * gap_factor(m, gamma/(s^2 g^2)); weak = nu_e*gamma/(6 m g^2).
    The degenerate s = 0 or g = 0 case uses the x -> infinity limit of the
    factor, which only strengthens the bound.
    """
    if m < 2:
        raise InputError("need at least two matchings")
    if not (0 <= s < 1):
        raise InputError("s must lie in [0, 1)")
    if nu_e < 0 or gamma <= 0 or g < 0:
        raise InputError("nu_e, gamma, g must be positive")
    denom = s * s * g * g
    x = math.inf if denom == 0 else gamma / denom
    strong = (nu_e / m) * gap_factor(m, x)
    weak = strong if g == 0 else nu_e * gamma / (6 * m * g * g)
    return strong, weak


def coloring_gap_bound(nu_e: float, gamma: float, n_edges: int) -> float:
    """Lower bound nu_e * gamma / |E| for coloring protocols with p_l = |M_l|/|E|."""
    if nu_e < 0 or gamma <= 0 or n_edges < 1:
        raise InputError("nu_e, gamma, |E| must be positive")
    return nu_e * gamma / n_edges


def sample_count(nu: float, epsilon: float, delta: float) -> int:
    """Tests needed at gap nu: ceil(ln delta / ln(1 - nu * epsilon))."""
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise InputError("epsilon and delta must lie in (0, 1)")
    if not (0 < nu <= 1):
        raise InputError("nu must lie in (0, 1]")
    return math.ceil(math.log(delta) / math.log1p(-nu * epsilon))


def sample_count_from_bounds(m: int, nu_e: float, epsilon: float, delta: float,
                             gamma: float, s: float, g: int) -> tuple[int, int]:
    """(N_strong, N_weak) from the closed-form gap bounds.

    N_strong = m ln(1/delta) / (nu_e epsilon f) rounded to the nearest integer,
    N_weak likewise with the weak bound.
    """
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise InputError("epsilon and delta must lie in (0, 1)")
    strong, weak = matching_gap_bounds(m, nu_e, gamma, s, g)
    if strong <= 0 or weak <= 0:
        raise InputError("gap bounds are not positive")
    log_inv = math.log(1.0 / delta)
    n_strong = round(log_inv / (strong * epsilon))
    n_weak = round(log_inv / (weak * epsilon))
    return n_strong, n_weak


@dataclass(frozen=True)
class GapReport:
    """Measured gap of one protocol next to every applicable lower bound.

    The matching-protocol bounds need at least two matchings and the coloring
    bound needs proportional probabilities; inapplicable entries are None.
    """

    nu_measured: float
    thm1_strong: float | None
    thm1_weak: float | None
    thm2: float | None
    parameters: dict

    @property
    def passed(self) -> bool:
        tol = 1e-9
        ok = True
        for bound in (self.thm1_strong, self.thm1_weak, self.thm2):
            if bound is not None:
                ok = ok and self.nu_measured >= bound - tol
        return ok

    def to_dict(self) -> dict:
        out = {"nu_measured": self.nu_measured, "thm1_strong": self.thm1_strong,
               "thm1_weak": self.thm1_weak, "thm2": self.thm2}
        out.update(self.parameters)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def gap_report(protocol: Protocol, gamma: float | None = None,
               profile=None, tol: float = GROUND_TOL) -> GapReport:
    """Measure the protocol gap and evaluate the applicable bounds."""
    h = protocol.hamiltonian
    if profile is None:
        profile = spectral_profile(h, tol=tol, gamma=gamma)
    gamma = profile.gamma
    nu_e = protocol.nu_e
    m = len(protocol.cover)
    nu = measured_gap(protocol, tol)
    if m >= 2:
        strong, weak = matching_gap_bounds(m, nu_e, gamma, profile.s, profile.g)
    else:
        strong = weak = None
    thm2 = None
    if protocol.cover.is_coloring():
        n_edges = h.graph.n_edges
        proportional = all(
            abs(p - len(mm) / n_edges) < 1e-12
            for p, mm in zip(protocol.cover.probabilities, protocol.cover.matchings))
        if proportional:
            thm2 = coloring_gap_bound(nu_e, gamma, n_edges)
    params = {"n": h.graph.n_vertices, "edge_count": h.graph.n_edges, "m": m,
              "gamma": gamma, "nu_E": nu_e, "s": profile.s, "g": profile.g,
              "dim": h.dim}
    return GapReport(nu_measured=nu, thm1_strong=strong, thm1_weak=weak,
                     thm2=thm2, parameters=params)


# ---------------------------------------------------------------------------
# protocol assembly

def build_protocol(h: FFHamiltonian, cover: MatchingCover,
                   mu: DirectionDistribution | None) -> Protocol:
    """Bond operators from one shared direction distribution (isotropic when
    mu is None), assembled into a protocol."""
    ops = {}
    for e in h.graph.edges:
        b = bond(h, e)
        ops[e] = isotropic_bond_operator(b) if mu is None else bond_operator(b, mu)
    return Protocol(h, cover, ops)


def aklt_protocol_bounds(g: Hypergraph, gamma: float, epsilon: float | None = None,
                         delta: float | None = None) -> dict:
    """Closed-form gap floors and sample ceilings specialized to AKLT graphs.

    Uses S_E <= max degree, nu_e = 2/(2 S_E + 1), m <= max degree + 1 and the
    proportional-coloring bound for the large-degree variant.
    """
    if gamma <= 0:
        raise InputError("gamma must be positive")
    d = max_degree(g)
    if d < 1:
        raise InputError("graph has no edges")
    n = g.n_vertices
    out = {
        "gap_floor": gamma / (24.0 * d ** 4),
        "large_degree_gap": 4.0 * gamma / (n * d * (2 * d + 1)),
    }
    if epsilon is not None and delta is not None:
        if not (0 < epsilon < 1 and 0 < delta < 1):
            raise InputError("epsilon and delta must lie in (0, 1)")
        log_inv = math.log(1.0 / delta)
        out["n_ceiling"] = math.ceil(log_inv / (epsilon * out["gap_floor"]))
        out["large_degree_n"] = math.ceil(log_inv / (epsilon * out["large_degree_gap"]))
    return out


# ---------------------------------------------------------------------------
# competitor sample costs

def hkse_cost(edge_count: int, gamma: float, epsilon: float, delta: float) -> float:
    """|E|^3 / (2 gamma^2 eps^2) * ln[-(|E|+1)/ln(1-delta)]."""
    if edge_count < 1 or gamma <= 0:
        raise InputError("edge count and gamma must be positive")
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise InputError("epsilon and delta must lie in (0, 1)")
    lead = edge_count ** 3 / (2.0 * gamma ** 2 * epsilon ** 2)
    return lead * math.log(-(edge_count + 1) / math.log1p(-delta))


def hkse_cost_approx(edge_count: int, gamma: float, epsilon: float, delta: float) -> float:
    """Large-|E| small-delta approximation |E|^3/(2 gamma^2 eps^2) ln(|E|/delta)."""
    if edge_count < 1 or gamma <= 0:
        raise InputError("edge count and gamma must be positive")
    lead = edge_count ** 3 / (2.0 * gamma ** 2 * epsilon ** 2)
    return lead * math.log(edge_count / delta)


def bhsre_lower(n: int, gamma: float, epsilon: float, delta: float,
                kappa: int, alpha: float | None = None) -> float:
    """n^2 (alpha kappa)^2 / (2 gamma^2 eps^2) * ln((kappa+1)/delta); the
    alpha-free lower bound substitutes alpha*kappa >= 1."""
    if kappa < 2:
        raise InputError("kappa must be at least 2")
    if alpha is not None and alpha * kappa < 1:
        raise InputError("alpha * kappa must be at least 1")
    if n < 1 or gamma <= 0:
        raise InputError("n and gamma must be positive")
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise InputError("epsilon and delta must lie in (0, 1)")
    factor = 1.0 if alpha is None else (alpha * kappa) ** 2
    return factor * n ** 2 / (2.0 * gamma ** 2 * epsilon ** 2) * math.log((kappa + 1) / delta)


def tm_lower(n: int, r: float) -> float:
    """32 R^2 n^5 + 2^11 n^15 R^4 ln 2 (verification at precision 1/n)."""
    if n < 1 or r <= 0:
        raise InputError("n and R must be positive")
    return 32.0 * r ** 2 * n ** 5 + 2.0 ** 11 * n ** 15 * r ** 4 * math.log(2.0)


def gkea_costs(modes: int, epsilon: float, delta: float) -> tuple[int, int]:
    """(general, gapped) sample counts for Gaussian-state certification."""
    if modes < 2:
        raise InputError("need at least two modes")
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise InputError("epsilon and delta must lie in (0, 1)")
    log_term = math.log(2.0 / delta)
    general = math.ceil(2.0 * modes ** 4 * log_term / epsilon ** 2)
    gapped = math.ceil(modes ** 2 * math.log(modes) ** 2 * log_term / (2.0 * epsilon ** 2))
    return general, gapped


def competitor_costs(epsilon: float, delta: float, gamma: float | None = None,
                     n: int | None = None, edge_count: int | None = None,
                     kappa: int = 2, alpha: float | None = None,
                     r: float | None = None, modes: int | None = None) -> dict:
    """Evaluate every competitor formula whose inputs were supplied."""
    out: dict = {}
    if edge_count is not None and gamma is not None:
        out["HKSE"] = hkse_cost(edge_count, gamma, epsilon, delta)
        out["HKSE_approx"] = hkse_cost_approx(edge_count, gamma, epsilon, delta)
    if n is not None and gamma is not None:
        out["BHSRE"] = bhsre_lower(n, gamma, epsilon, delta, kappa, alpha)
    if n is not None and r is not None:
        out["TM_lower"] = tm_lower(n, r)
    if modes is not None:
        general, gapped = gkea_costs(modes, epsilon, delta)
        out["GKEA_general"] = general
        out["GKEA_gapped"] = gapped
    return out


# ---------------------------------------------------------------------------
# serialization

REPORT_COLUMNS = ("n", "m", "gamma", "nu_measured", "thm1_strong", "thm1_weak",
                  "thm2", "N", "N_strong", "N_weak", "HKSE", "BHSRE")


def report_rows_to_csv(rows: Sequence[Mapping]) -> str:
    """CSV text with the documented column schema; absent entries left blank."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        writer.writerow(["" if row.get(c) is None else row.get(c) for c in REPORT_COLUMNS])
    return buf.getvalue()


def report_rows_to_json(rows: Sequence[Mapping]) -> str:
    return json.dumps([{k: v for k, v in row.items()} for row in rows],
                      indent=2, sort_keys=True)
