"""Classical reference-direction estimation and the large-j2 correspondence.

When the reference spin grows macroscopic, estimating the relative angle
reduces to estimating the tilt of the prepared state against a classical
z-axis.  The azimuth-averaged state sigma(beta) is diagonal in the weight m
with coherences across j, mirroring the quantum blocks diagonal in J with
coherences across j1; the block pairing is m = J - j2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .su2 import DomainError, HalfInt, half, m_range, wigner_d
from .states import GenericState, averaged_state
from .estimator import TrigBlock, TrigBlocks
from .optimizer import OptimizationResult, optimize_trig_blocks, max_fidelity, optimize_state

_QUAD_NODES = 200


@dataclass
class ClassicalAveragedState:
    """Azimuth-averaged |psi1> density: per-m real symmetric matrices over j."""

    blocks: dict[HalfInt, tuple[tuple[HalfInt, ...], np.ndarray]] = field(default_factory=dict)

    def trace(self) -> float:
        return float(sum(np.trace(m) for _, m in self.blocks.values()))


def _m_structure(state: GenericState) -> list[tuple[HalfInt, tuple[HalfInt, ...]]]:
    js = state.j_labels
    j_max = max(js, key=lambda j: j.twice)
    out = []
    for m in m_range(j_max):
        basis = tuple(j for j in js if abs(m.twice) <= j.twice)
        if basis:
            out.append((m, basis))
    return out


def classical_sigma(state: GenericState, beta: float) -> ClassicalAveragedState:
    """<j' m|sigma(beta)|j m> = a_{j'} a_j d^{j'}_{m m1}(beta) d^{j}_{m m1}(beta)."""
    if not 0.0 <= beta <= math.pi + 1e-12:
        raise DomainError(f"beta = {beta} outside [0, pi]")
    out = ClassicalAveragedState()
    for m, basis in _m_structure(state):
        amp_d = np.array([state.amplitude(j) * wigner_d(j, m, state.m1, beta) for j in basis])
        out.blocks[m] = (basis, np.outer(amp_d, amp_d))
    return out


def classical_trig_blocks(state: GenericState) -> TrigBlocks:
    """A(mu) coefficients for the classical task, by Gauss-Legendre quadrature."""
    nodes, weights = leggauss(_QUAD_NODES)
    betas = (nodes + 1.0) * (math.pi / 2.0)
    weights = weights * (math.pi / 2.0)
    blocks: dict[HalfInt, TrigBlock] = {}
    for m, basis in _m_structure(state):
        dim = len(basis)
        k0 = np.zeros((dim, dim))
        k1 = np.zeros((dim, dim))
        k2 = np.zeros((dim, dim))
        for b, w in zip(betas, weights):
            mat = classical_sigma(state, b).blocks[m][1]
            sb = math.sin(b)
            k0 += w * mat * (sb / 4.0)
            k1 += w * mat * (sb * sb / 4.0)
            k2 += w * mat * (math.cos(b) * sb / 4.0)
        blocks[m] = TrigBlock(basis, k0, k1, k2)
    return TrigBlocks(blocks)


def classical_fidelity(state: GenericState) -> OptimizationResult:
    """Maximal fidelity for estimating the tilt against a classical z-axis."""
    return optimize_trig_blocks(classical_trig_blocks(state))


def asymptotic_deviation(state: GenericState, j2: HalfInt, beta: float) -> float:
    """Max entrywise gap between the J = j2 + m quantum blocks and sigma's m blocks."""
    j2 = half(j2)
    rho = averaged_state(state, j2, beta)
    sigma = classical_sigma(state, beta)
    worst = 0.0
    for J, (basis, mat) in rho.blocks.items():
        m = J - j2
        if m not in sigma.blocks:
            raise DomainError(f"quantum block J={J} has no classical partner m={m}")
        s_basis, s_mat = sigma.blocks[m]
        idx = []
        for j in basis:
            if j not in s_basis:
                raise DomainError(f"label {j} missing from classical block m={m}")
            idx.append(s_basis.index(j))
        sub = s_mat[np.ix_(idx, idx)]
        # coupled-basis Clebsch-Gordan phases contribute (-1)^{j - m1} per row
        # in the limit, so off-diagonals flip sign relative to sigma's basis
        signs = np.array([(-1.0) ** ((j.twice - state.m1.twice) // 2) for j in basis])
        sub = sub * np.outer(signs, signs)
        worst = max(worst, float(np.abs(mat - sub).max()))
    return worst


@dataclass
class SweepRow:
    j2: HalfInt
    a_star: float
    f_opt: float
    f_parallel: float
    f_antiparallel: float


def default_sweep_grid() -> list[HalfInt]:
    """Half-integer steps through the fast small-j2 region, then sparse plateau points."""
    grid = [HalfInt(t) for t in range(1, 21)]  # 1/2 .. 10
    grid += [half(v) for v in (15, 20, 30, 50, 100)]
    return grid


def sweep_optimal_vs_j2(j2_values: list[HalfInt]) -> list[SweepRow]:
    """Optimal amplitude and the three fidelity curves over the given j2 grid."""
    rows = []
    for j2 in j2_values:
        j2 = half(j2)
        a_star, _, result = optimize_state(j2)
        f_par = max_fidelity(GenericState.parallel(), j2, certify=False).fidelity
        f_anti = max_fidelity(GenericState.antiparallel(), j2, certify=False).fidelity
        rows.append(SweepRow(j2=j2, a_star=a_star, f_opt=result.fidelity,
                             f_parallel=f_par, f_antiparallel=f_anti))
    return rows
