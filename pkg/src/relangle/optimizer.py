"""Optimal estimates, POVMs and preparation-amplitude search.

One-dimensional J-sectors take a single closed-form estimate; two-dimensional
sectors (repeated representations) take the two-outcome (nu, pi - nu) pair
with projectors from the eigenvectors of A_{pi-nu} - A_nu.  Optimality of a
reported POVM is certified by scanning the minimum eigenvalue of
Upsilon - A_mu over a dense mu grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .su2 import DomainError, HalfInt, half
from .estimator import (
    PairEstimate,
    PovmSpec,
    SingleEstimate,
    TrigBlock,
    TrigBlocks,
    signal_trig_blocks,
)
from .states import GenericState

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_PAIR_BRACKET = (1e-6, math.pi / 2.0)
CERTIFICATE_GRID = 1001
CERTIFICATE_PASS = -1e-9


class UnsupportedBlockError(ValueError):
    """Block dimension above 2: outside the solved optimization scope."""


@dataclass
class OptimizationResult:
    povm: PovmSpec
    fidelity: float
    per_block_contributions: dict[HalfInt, float]
    certificate_min_eigenvalue: float | None

    @property
    def certified(self) -> bool:
        return (self.certificate_min_eigenvalue is not None
                and self.certificate_min_eigenvalue >= CERTIFICATE_PASS)


def golden_max(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section maximizer of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _eig2_sym(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a symmetric 2x2 matrix."""
    p, r, s = mat[0, 0], mat[0, 1], mat[1, 1]
    if r == 0.0:
        if p <= s:
            return np.array([p, s]), np.eye(2)
        return np.array([s, p]), np.array([[0.0, 1.0], [1.0, 0.0]])
    mean = (p + s) / 2.0
    rad = math.hypot((p - s) / 2.0, r)
    lo, hi = mean - rad, mean + rad
    v_hi = np.array([r, hi - p])
    v_hi /= np.linalg.norm(v_hi)
    v_lo = np.array([-v_hi[1], v_hi[0]])
    return np.array([lo, hi]), np.column_stack([v_lo, v_hi])


def _single_from_coeffs(c0: float, c1: float, c2: float) -> tuple[float, float]:
    """argmax over [0, pi] of c0 + c1 sin(mu) + c2 cos(mu)."""
    cands = [0.0, math.pi]
    if c1 != 0.0 or c2 != 0.0:
        peak = math.atan2(c1, c2)
        if 0.0 <= peak <= math.pi:
            cands.append(peak)
    else:
        cands.append(math.pi / 2.0)
    vals = [c0 + c1 * math.sin(m) + c2 * math.cos(m) for m in cands]
    best = int(np.argmax(vals))
    return cands[best], vals[best]


def _pair_objective(blk: TrigBlock, mu: float) -> float:
    a_mu = blk.at(mu)
    delta = blk.at(math.pi - mu) - a_mu
    eigs, _ = _eig2_sym(delta)
    return float(np.trace(a_mu)) + float(eigs[eigs > 0.0].sum())


def _newton_polish(f, x: float, lo: float, hi: float, h: float = 1e-5, steps: int = 2) -> float:
    """Central-difference Newton refinement of an interior maximum.

    Golden section stalls near sqrt(eps) of the peak where function values
    tie; two Newton steps push the argmax error below 1e-9.
    """
    for _ in range(steps):
        fp = f(x + h)
        fm = f(x - h)
        f0 = f(x)
        d2 = (fp - 2.0 * f0 + fm) / (h * h)
        if d2 >= -1e-8:
            break
        step = -(fp - fm) / (2.0 * h) / d2
        nxt = min(max(x + step, lo), hi)
        if f(nxt) + 1e-15 < f0:
            break
        x = nxt
    return x


def _pair_from_block(blk: TrigBlock, tol: float = 1e-10) -> tuple[float, PairEstimate, float]:
    nu = golden_max(lambda m: _pair_objective(blk, m), *_PAIR_BRACKET, tol=tol)
    nu = _newton_polish(lambda m: _pair_objective(blk, m), nu, *_PAIR_BRACKET)
    a_nu = blk.at(nu)
    delta = blk.at(math.pi - nu) - a_nu
    eigs, vecs = _eig2_sym(delta)
    # nu-element on the nonpositive span, (pi - nu)-element on the nonnegative one
    proj_hi = np.zeros((2, 2))
    proj_lo = np.zeros((2, 2))
    for val, vec in zip(eigs, vecs.T):
        if val >= 0.0:
            proj_hi += np.outer(vec, vec)
        else:
            proj_lo += np.outer(vec, vec)
    pair = PairEstimate(nu=nu, proj_nu=proj_lo, proj_conjugate=proj_hi)
    contrib = float(np.trace(a_nu)) + float(eigs[eigs > 0.0].sum())
    return nu, pair, contrib


def optimal_single_estimate(state: GenericState, j2: HalfInt, J: HalfInt) -> tuple[float, float]:
    """Best single estimate and its fidelity contribution for a 1-dim block."""
    blk = signal_trig_blocks(state, half(j2)).blocks[half(J)]
    if blk.dim != 1:
        raise UnsupportedBlockError(f"block J={J} has dimension {blk.dim}, expected 1")
    return _single_from_coeffs(*blk.trace_coeffs())


def optimal_pair(state: GenericState, j2: HalfInt, J: HalfInt) -> tuple[float, PairEstimate, float]:
    """Optimal (nu, pi - nu) two-outcome measurement for a 2-dim block."""
    blk = signal_trig_blocks(state, half(j2)).blocks[half(J)]
    if blk.dim != 2:
        raise UnsupportedBlockError(f"block J={J} has dimension {blk.dim}, expected 2")
    return _pair_from_block(blk)


def _certificate(trig: TrigBlocks, povm: PovmSpec, grid: int) -> float:
    """Minimum eigenvalue of Upsilon - A_mu over all blocks and a mu grid."""
    worst = math.inf
    mu_grid = np.linspace(0.0, math.pi, grid)
    for J, blk in trig.blocks.items():
        upsilon = np.zeros((blk.dim, blk.dim))
        for mu, element in povm.elements(J, blk.dim):
            upsilon += blk.at(mu) @ element
        upsilon = (upsilon + upsilon.T) / 2.0
        for mu in mu_grid:
            gap = upsilon - blk.at(mu)
            if blk.dim == 1:
                worst = min(worst, float(gap[0, 0]))
            else:
                eigs, _ = _eig2_sym(gap)
                worst = min(worst, float(eigs[0]))
    return worst


def helstrom_certificate(state: GenericState, j2: HalfInt, povm: PovmSpec,
                         grid: int = CERTIFICATE_GRID) -> float:
    trig = signal_trig_blocks(state, half(j2))
    povm.validate({J: blk.dim for J, blk in trig.blocks.items()})
    return _certificate(trig, povm, grid)


def optimize_trig_blocks(trig: TrigBlocks, certify: bool = True,
                         grid: int = CERTIFICATE_GRID) -> OptimizationResult:
    """Per-block optimization of any trig-coefficient operator family."""
    per_block = {}
    contributions = {}
    for J, blk in trig.blocks.items():
        if blk.dim == 1:
            mu, contrib = _single_from_coeffs(*blk.trace_coeffs())
            per_block[J] = SingleEstimate(mu)
        elif blk.dim == 2:
            _, pair, contrib = _pair_from_block(blk)
            per_block[J] = pair
        else:
            raise UnsupportedBlockError(
                f"block J={J} has dimension {blk.dim}; only dimensions <= 2 are solved")
        contributions[J] = contrib
    povm = PovmSpec(per_block)
    cert = _certificate(trig, povm, grid) if certify else None
    return OptimizationResult(
        povm=povm,
        fidelity=float(sum(contributions.values())),
        per_block_contributions=contributions,
        certificate_min_eigenvalue=cert,
    )


def max_fidelity(state: GenericState, j2: HalfInt, certify: bool = True) -> OptimizationResult:
    """Optimal POVM and maximal average fidelity for a given preparation."""
    return optimize_trig_blocks(signal_trig_blocks(state, half(j2)), certify=certify)


def two_term_nu(a: float) -> float:
    """Closed-form optimal estimate angle for the j2=1/2 two-term preparation.

    arctan[sqrt(3) (1 + 2 a^2) pi / (8 a sqrt(1 - a^2))]; at the boundary
    amplitudes the off-diagonal coupling vanishes and nu -> pi/2.
    """
    if a <= 0.0 or a >= 1.0:
        return math.pi / 2.0
    return math.atan(math.sqrt(3.0) * (1.0 + 2.0 * a * a) * math.pi
                     / (8.0 * a * math.sqrt(1.0 - a * a)))


def optimize_state(j2: HalfInt, coarse_step: float = 0.001,
                   tol: float = 1e-8) -> tuple[float, HalfInt, OptimizationResult]:
    """Best preparation amplitude over the m1=0 two-term family vs the parallel state.

    Coarse grid over a in [0, 1] (endpoints included) followed by golden-section
    refinement; returns (a_star, winning m1 sector, optimization result).
    """
    j2 = half(j2)
    if j2.twice < 1:
        raise DomainError("j2 must be at least 1/2")

    def f0(a: float) -> float:
        trig = signal_trig_blocks(GenericState.two_term(a), j2)
        return optimize_trig_blocks(trig, certify=False).fidelity

    n = int(round(1.0 / coarse_step))
    grid = [min(1.0, i * coarse_step) for i in range(n + 1)]
    vals = [f0(a) for a in grid]
    best = int(np.argmax(vals))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, n)]
    a_star = golden_max(f0, lo, hi, tol=tol)
    if f0(a_star) < vals[best]:
        a_star = grid[best]
    result0 = max_fidelity(GenericState.two_term(a_star), j2)

    result1 = max_fidelity(GenericState.parallel(), j2)
    # ties go to the m1=0 sector for deterministic output
    if result0.fidelity >= result1.fidelity - 1e-9:
        return a_star, half(0), result0
    return a_star, half(1), result1
