"""Utility-weighted measurement operators and average-fidelity evaluation.

Every block entry of the measurement operator A_mu is of the form
c0 + c1*sin(mu) + c2*cos(mu); the three coefficients come from the angular
moments of the squared rotated highest-weight amplitudes, which reduce to
Beta-function values in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .su2 import DomainError, HalfInt, check_jm, half, m_range
from .states import (
    BlockedOperator,
    GenericState,
    _cg_column,
    coupling_structure,
)

_PSD_TOL = 1e-12


class StructureMismatchError(ValueError):
    """POVM block layout does not match the signal's coupling structure."""


def utility(mu: float, beta: float) -> float:
    """Quadratic figure of merit cos^2((mu - beta)/2)."""
    return math.cos((mu - beta) / 2.0) ** 2


@dataclass(frozen=True)
class MomentTriple:
    """Angular moments (P, Q, R) with I(mu) = P + Q*sin(mu) + R*cos(mu)."""

    P: float
    Q: float
    R: float

    def value(self, mu: float) -> float:
        return self.P + self.Q * math.sin(mu) + self.R * math.cos(mu)


@lru_cache(maxsize=None)
def moment_integrals(j2: HalfInt, m2: HalfInt) -> MomentTriple:
    """Closed-form moments of (d^{j2}_{m2 j2}(beta))^2 against the sin(beta)/2 prior.

    With u = cos(beta) the squared amplitude is a Bernstein monomial in
    (1+u)/2, so the three integrals are Beta functions:
      P = 1/(2(2j+1)),  R = m/((2j+1)(2j+2)),
      Q = binom(2j, j+m) * Gamma(j+m+3/2) * Gamma(j-m+3/2) / Gamma(2j+3).
    """
    j2, m2 = half(j2), half(m2)
    check_jm(j2, m2)
    tj = j2.twice
    a = (j2.twice + m2.twice) // 2
    b = (j2.twice - m2.twice) // 2
    P = 1.0 / (2.0 * (tj + 1))
    R = float(m2) / ((tj + 1) * (tj + 2))
    log_q = (
        math.lgamma(a + b + 1) - math.lgamma(a + 1) - math.lgamma(b + 1)
        + math.lgamma(a + 1.5) + math.lgamma(b + 1.5) - math.lgamma(a + b + 3)
    )
    return MomentTriple(P=P, Q=math.exp(log_q), R=R)


@dataclass
class TrigBlock:
    basis: tuple[HalfInt, ...]
    k0: np.ndarray
    k1: np.ndarray  # sin(mu) coefficient
    k2: np.ndarray  # cos(mu) coefficient

    @property
    def dim(self) -> int:
        return len(self.basis)

    def at(self, mu: float) -> np.ndarray:
        return self.k0 + math.sin(mu) * self.k1 + math.cos(mu) * self.k2

    def trace_coeffs(self) -> tuple[float, float, float]:
        return (float(np.trace(self.k0)), float(np.trace(self.k1)), float(np.trace(self.k2)))


@dataclass
class TrigBlocks:
    """Direct sum of trigonometric-in-mu operator families A(mu)."""

    blocks: dict[HalfInt, TrigBlock]

    def at(self, mu: float) -> BlockedOperator:
        out = BlockedOperator()
        for J, blk in self.blocks.items():
            out.blocks[J] = (blk.basis, blk.at(mu))
        return out


@lru_cache(maxsize=None)
def _geometry(m1: HalfInt, js: tuple[HalfInt, ...], j2: HalfInt):
    """Amplitude-independent CG/moment contractions per (J, j1, j1') entry."""
    fake = [(J, basis) for J, basis in _structure_for(js, j2)]
    trips = {}
    ms = m_range(j2)
    P = np.array([moment_integrals(j2, m2).P for m2 in ms])
    Q = np.array([moment_integrals(j2, m2).Q for m2 in ms])
    R = np.array([moment_integrals(j2, m2).R for m2 in ms])
    for J, basis in fake:
        cols = [_cg_column(j1, m1, j2, J) for j1 in basis]
        dim = len(basis)
        g0 = np.empty((dim, dim))
        g1 = np.empty((dim, dim))
        g2 = np.empty((dim, dim))
        for i in range(dim):
            for k in range(i, dim):
                prod = cols[i] * cols[k]
                g0[i, k] = g0[k, i] = float(np.dot(P, prod))
                g1[i, k] = g1[k, i] = float(np.dot(Q, prod))
                g2[i, k] = g2[k, i] = float(np.dot(R, prod))
        trips[J] = (basis, g0, g1, g2)
    return trips


def _structure_for(js: tuple[HalfInt, ...], j2: HalfInt):
    from .su2 import couple_range

    all_J = sorted({J for j1 in js for J in couple_range(j1, j2)}, key=lambda J: J.twice)
    return [
        (J, tuple(j1 for j1 in js
                  if abs(j1.twice - j2.twice) <= J.twice <= j1.twice + j2.twice))
        for J in all_J
    ]


def signal_trig_blocks(state: GenericState, j2: HalfInt) -> TrigBlocks:
    """A(mu) coefficient blocks for the rotation-averaged signal state."""
    j2 = half(j2)
    geo = _geometry(state.m1, state.j_labels, j2)
    blocks = {}
    for J, (basis, g0, g1, g2) in geo.items():
        amps = np.array([state.amplitude(j1) for j1 in basis])
        outer = np.outer(amps, amps)
        blocks[J] = TrigBlock(basis, outer * g0, outer * g1, outer * g2)
    return TrigBlocks(blocks)


def a_operator(state: GenericState, j2: HalfInt, mu: float) -> BlockedOperator:
    """Utility-weighted measurement operator A_mu as a block direct sum."""
    if not 0.0 <= mu <= math.pi:
        raise DomainError(f"mu = {mu} outside [0, pi]")
    return signal_trig_blocks(state, j2).at(mu)


# ---------------------------------------------------------------------------
# POVM descriptions

@dataclass(frozen=True)
class SingleEstimate:
    """One outcome for the whole block; the element is the block identity."""

    mu: float


@dataclass
class PairEstimate:
    """Two outcomes (nu, pi - nu) with orthogonal rank-one projectors."""

    nu: float
    proj_nu: np.ndarray
    proj_conjugate: np.ndarray  # paired with the estimate pi - nu

    def elements(self) -> list[tuple[float, np.ndarray]]:
        return [(self.nu, self.proj_nu), (math.pi - self.nu, self.proj_conjugate)]


@dataclass
class PovmSpec:
    """Per-J-sector measurement: SingleEstimate or PairEstimate blocks."""

    per_block: dict[HalfInt, SingleEstimate | PairEstimate]

    def elements(self, J: HalfInt, dim: int) -> list[tuple[float, np.ndarray]]:
        spec = self.per_block[J]
        if isinstance(spec, SingleEstimate):
            return [(spec.mu, np.eye(dim))]
        if dim != 2:
            raise StructureMismatchError(f"pair estimate on block of dimension {dim}")
        return spec.elements()

    def validate(self, dims: dict[HalfInt, int], tol: float = _PSD_TOL) -> None:
        """Check per-block completeness and positive semidefiniteness."""
        if set(self.per_block) != set(dims):
            raise StructureMismatchError("POVM blocks do not match the coupling structure")
        for J, dim in dims.items():
            els = self.elements(J, dim)
            acc = np.zeros((dim, dim))
            for _, e in els:
                if np.linalg.eigvalsh((e + e.T) / 2.0).min() < -tol:
                    raise StructureMismatchError(f"element on block J={J} not PSD")
                acc += e
            if np.abs(acc - np.eye(dim)).max() > tol:
                raise StructureMismatchError(f"block J={J} elements do not sum to identity")


def block_dims(state: GenericState, j2: HalfInt) -> dict[HalfInt, int]:
    return {J: len(basis) for J, basis in coupling_structure(state, half(j2))}


def fidelity(state: GenericState, j2: HalfInt, povm: PovmSpec) -> float:
    """Average fidelity sum_J sum_mu Tr(A^J_mu E^J_mu)."""
    j2 = half(j2)
    trig = signal_trig_blocks(state, j2)
    dims = {J: blk.dim for J, blk in trig.blocks.items()}
    povm.validate(dims)
    total = 0.0
    for J, blk in trig.blocks.items():
        for mu, element in povm.elements(J, blk.dim):
            total += float(np.trace(blk.at(mu) @ element))
    return total


def fidelity_montecarlo(state: GenericState, j2: HalfInt, povm: PovmSpec,
                        samples: int, seed: int) -> tuple[float, float]:
    """Simulate the estimation protocol; unbiased (estimate, stderr) of the fidelity.

    Draws beta from the sin(beta)/2 prior, picks an outcome from the exact
    per-outcome probabilities, and averages the utility of the outcome's
    estimate.  Deterministic for fixed (seed, samples).
    """
    j2 = half(j2)
    if samples < 1:
        raise DomainError("samples must be >= 1")
    trig = signal_trig_blocks(state, j2)
    dims = {J: blk.dim for J, blk in trig.blocks.items()}
    povm.validate(dims)

    ms = m_range(j2)
    # probability of each outcome is linear in the squared rotated amplitudes:
    # p_o(beta) = sum_{m2} coef[o, m2] * (d^{j2}_{m2 j2}(beta))^2
    mus = []
    coef_rows = []
    for J, blk in trig.blocks.items():
        cols = [_cg_column(j1, state.m1, j2, J) for j1 in blk.basis]
        amps = [state.amplitude(j1) for j1 in blk.basis]
        for mu, element in povm.elements(J, blk.dim):
            row = np.zeros(len(ms))
            for i in range(blk.dim):
                for k in range(blk.dim):
                    row += amps[i] * amps[k] * element[k, i] * cols[i] * cols[k]
            mus.append(mu)
            coef_rows.append(row)
    mus = np.array(mus)
    coef = np.array(coef_rows)

    log_binom = np.array([
        math.lgamma(j2.twice + 1)
        - math.lgamma((j2.twice + m2.twice) // 2 + 1)
        - math.lgamma((j2.twice - m2.twice) // 2 + 1)
        for m2 in ms
    ])
    a_pow = np.array([(j2.twice + m2.twice) // 2 for m2 in ms], dtype=float)
    b_pow = np.array([(j2.twice - m2.twice) // 2 for m2 in ms], dtype=float)

    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, samples)  # cos(beta), the prior in disguise
    with np.errstate(divide="ignore"):
        log_c2 = np.log(np.maximum((1.0 + u) / 2.0, 1e-300))
        log_s2 = np.log(np.maximum((1.0 - u) / 2.0, 1e-300))
    dsq = np.exp(log_binom[:, None] + a_pow[:, None] * log_c2[None, :]
                 + b_pow[:, None] * log_s2[None, :])
    probs = np.clip(coef @ dsq, 0.0, None)  # (outcomes, samples)
    cum = np.cumsum(probs, axis=0)
    draw = rng.uniform(0.0, 1.0, samples) * cum[-1]
    idx = (draw[None, :] > cum).sum(axis=0).clip(max=len(mus) - 1)

    mu_sel = mus[idx]
    sin_b = np.sqrt(np.maximum(1.0 - u * u, 0.0))
    utils = 0.5 * (1.0 + np.cos(mu_sel) * u + np.sin(mu_sel) * sin_b)
    est = float(utils.mean())
    stderr = float(utils.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return est, stderr
