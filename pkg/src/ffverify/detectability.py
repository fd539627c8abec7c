"""Numeric checkers for the product-norm bounds of frustration-free
Hamiltonians and the projector inequalities behind them.

Every check returns measured values plus a pass flag instead of asserting,
so callers can tabulate margins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import InputError
from .graph import Edge
from .hamiltonian import (FFHamiltonian, commutation_structure, ground_space,
                          spectral_gap_gamma)
from .tolerances import DENSE_EIG_LIMIT, GROUND_TOL, PROJECTOR_TOL, UNIT_SV_TOL


def _bound_chain(energy: float, zeta: float, s: float, g_tilde: int, g: int) -> tuple[float, ...]:
    """(zeta, s^2 g~, s^2 g^2, g^2) each mapped through x -> x / (energy + x)."""
    out = []
    for x in (zeta, s * s * g_tilde, s * s * g * g, float(g * g)):
        out.append(x / (energy + x) if energy + x > 0 else 0.0)
    return tuple(out)


@dataclass(frozen=True)
class DLReport:
    """Measured product norm squared against its four upper bounds."""

    measured: float
    bounds: tuple[float, float, float, float]
    ordering: tuple[Edge, ...]
    gamma: float
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        chain = (self.measured,) + self.bounds
        return all(a <= b + self.tol for a, b in zip(chain, chain[1:]))


def _product_norm_sq(h: FFHamiltonian, ordering: Sequence[Edge],
                     basis: np.ndarray, dense_limit: int = DENSE_EIG_LIMIT) -> float:
    """||(1 - Q0) (1-P_1)...(1-P_q) (1 - Q0)||^2.

    Q0 commutes with every projector, so the inner complements collapse and
    only the two outer deflations remain.
    """
    d = h.dim

    def deflate(v):
        return v - basis @ (basis.conj().T @ v)

    def apply_m(v):
        v = deflate(v)
        for e in reversed(ordering):
            v = v - h.apply_edge(e, v)
        return deflate(v)

    def apply_m_adjoint(v):
        v = deflate(v)
        for e in ordering:
            v = v - h.apply_edge(e, v)
        return deflate(v)

    if d <= dense_limit:
        m = np.eye(d, dtype=complex)
        cols = [apply_m(m[:, i]) for i in range(d)]
        return float(linalg.operator_norm(np.column_stack(cols)) ** 2)
    norm = linalg.product_operator_norm(apply_m, apply_m_adjoint, d, tol=1e-12)
    return norm * norm


def dl_norm_check(h: FFHamiltonian, ordering: Sequence[Edge] | None = None,
                  tol: float = GROUND_TOL, gamma: float | None = None) -> DLReport:
    """Product-norm bound check for a frustration-free Hamiltonian."""
    structure = commutation_structure(h, ordering)
    if gamma is None:
        gamma = spectral_gap_gamma(h, tol)
    _, basis = ground_space(h, tol)
    measured = _product_norm_sq(h, structure.ordering, basis)
    bounds = _bound_chain(gamma, structure.zeta, structure.s,
                          structure.g_tilde, structure.g)
    return DLReport(measured=measured, bounds=bounds,
                    ordering=structure.ordering, gamma=float(gamma))


@dataclass(frozen=True)
class StateCheck:
    """Product applied to a single excited state against the same bounds."""

    phi_norm_sq: float
    energy: float | None   # None when the product annihilates the state
    bounds: tuple[float, float, float, float]
    ordering: tuple[Edge, ...]
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        if self.energy is None:
            return True  # vacuous: phi = 0
        chain = (self.phi_norm_sq,) + self.bounds
        return all(a <= b + self.tol for a, b in zip(chain, chain[1:]))


def dl_state_check(h: FFHamiltonian, ordering: Sequence[Edge] | None,
                   psi: np.ndarray, tol: float = GROUND_TOL) -> StateCheck:
    """Apply (1-P_1)...(1-P_q) to a normalized state orthogonal to the ground
    space and compare the surviving weight with the energy-resolved bounds."""
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise InputError("state must be normalized")
    structure = commutation_structure(h, ordering)
    _, basis = ground_space(h, tol)
    overlap = float(np.linalg.norm(basis.conj().T @ psi) ** 2)
    if overlap >= 1e-10:
        raise InputError(f"state has ground-space weight {overlap:.2e}")
    phi = psi.copy()
    for e in reversed(structure.ordering):
        phi = phi - h.apply_edge(e, phi)
    norm_sq = float(np.real(np.vdot(phi, phi)))
    if norm_sq <= 1e-24:
        return StateCheck(phi_norm_sq=0.0, energy=None,
                          bounds=(0.0, 0.0, 0.0, 0.0), ordering=structure.ordering)
    energy = float(np.real(np.vdot(phi, h.apply(phi))) / norm_sq)
    bounds = _bound_chain(energy, structure.zeta, structure.s,
                          structure.g_tilde, structure.g)
    return StateCheck(phi_norm_sq=norm_sq, energy=energy, bounds=bounds,
                      ordering=structure.ordering)


@dataclass(frozen=True)
class PairCheck:
    """Two-projector inequality ||P(1-Q)v|| <= ||Pv|| + s ||Qv||."""

    lhs: float
    rhs: float
    s: float
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + self.tol


def _require_projector(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if not linalg.is_projector(m, PROJECTOR_TOL):
        raise InputError(f"{name} is not a projector")
    return m


def projector_pair_check(p: np.ndarray, q: np.ndarray, psi: np.ndarray) -> PairCheck:
    """Check the two-projector inequality on one vector.

    s is the largest singular value of PQ strictly below 1 (0 if all equal 1).
    """
    p = _require_projector(p, "P")
    q = _require_projector(q, "Q")
    psi = np.asarray(psi, dtype=complex)
    svals = linalg.singular_values(p @ q)
    below = svals[svals < 1.0 - UNIT_SV_TOL]
    s = float(below[0]) if len(below) else 0.0
    lhs = float(np.linalg.norm(p @ (psi - q @ psi)))
    rhs = float(np.linalg.norm(p @ psi) + s * np.linalg.norm(q @ psi))
    return PairCheck(lhs=lhs, rhs=rhs, s=s)


@dataclass(frozen=True)
class UnionGapCheck:
    """Gap of the projector average against the product-norm lower bound."""

    gap: float              # 1 - ||mean of projectors||
    rhs: float              # (1 - ||product||) / (m (1 + ||product||))
    product_norm: float
    m: int
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        ok = self.gap >= self.rhs - self.tol
        if self.m == 2:
            ok = ok and abs(self.gap - (1.0 - self.product_norm) / 2.0) <= self.tol
        return ok


def union_gap_check(projectors: Sequence[np.ndarray]) -> UnionGapCheck:
    """1 - ||(P_1 + ... + P_m)/m|| >= (1 - ||P_1...P_m||)/(m(1 + ||P_1...P_m||));
    equality replaces the bound at m = 2."""
    if len(projectors) < 2:
        raise InputError("need at least two projectors")
    ps = [_require_projector(p, f"P_{i + 1}") for i, p in enumerate(projectors)]
    m = len(ps)
    mean = sum(ps) / m
    prod = ps[0]
    for p in ps[1:]:
        prod = prod @ p
    gap = 1.0 - linalg.operator_norm(mean)
    product_norm = linalg.operator_norm(prod)
    rhs = (1.0 - product_norm) / (m * (1.0 + product_norm))
    return UnionGapCheck(gap=gap, rhs=rhs, product_norm=product_norm, m=m)


def random_projector(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    """Haar-random rank-`rank` projector, for invariant sweeps."""
    if not 0 <= rank <= dim:
        raise InputError("rank out of range")
    if rank == 0:
        return np.zeros((dim, dim), dtype=complex)
    raw = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    q, _ = np.linalg.qr(raw)
    p = q @ q.conj().T
    return (p + p.conj().T) / 2
