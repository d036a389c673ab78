import math

import numpy as np
import pytest

from relangle.su2 import DomainError, HalfInt, half
from relangle.states import GenericState
from relangle.estimator import (
    PairEstimate,
    PovmSpec,
    SingleEstimate,
    block_dims,
    fidelity,
    signal_trig_blocks,
)
from relangle.optimizer import (
    UnsupportedBlockError,
    golden_max,
    helstrom_certificate,
    max_fidelity,
    optimal_pair,
    optimal_single_estimate,
    optimize_state,
    two_term_nu,
)

THREE_TERM = GenericState.from_dict(0, {0: 0.5, 1: 0.5, 2: math.sqrt(0.5)})


def random_povm(dims, rng):
    per_block = {}
    for J, dim in dims.items():
        if dim == 1 or rng.uniform() < 0.3:
            per_block[J] = SingleEstimate(rng.uniform(0.0, math.pi))
        else:
            theta = rng.uniform(0.0, math.pi)
            v = np.array([math.cos(theta), math.sin(theta)])
            p = np.outer(v, v)
            per_block[J] = PairEstimate(rng.uniform(0.0, math.pi / 2),
                                        p, np.eye(2) - p)
    return PovmSpec(per_block)


class TestGoldenMax:
    def test_recovers_sine_peak(self):
        x = golden_max(math.sin, 0.0, math.pi, tol=1e-12)
        assert x == pytest.approx(math.pi / 2, abs=1e-6)


class TestSingleEstimate:
    def test_higher_block_peak_at_half_pi(self):
        mu, _ = optimal_single_estimate(GenericState.two_term(0.6), "1/2", "3/2")
        assert mu == pytest.approx(math.pi / 2, abs=1e-12)

    def test_parallel_blocks_match_grid_scan(self):
        from scipy.optimize import brentq
        state = GenericState.parallel()
        trig = signal_trig_blocks(state, half("1/2"))
        for J, blk in trig.blocks.items():
            mu_star, val = optimal_single_estimate(state, "1/2", J)
            f = lambda m: blk.trace_coeffs()[0] \
                + blk.trace_coeffs()[1] * math.sin(m) + blk.trace_coeffs()[2] * math.cos(m)
            grid = np.linspace(0.0, math.pi, 100001)
            k = int(np.argmax([f(m) for m in grid]))
            # refine by rooting the numerical derivative; function-value search
            # alone floors at sqrt(eps) near the peak
            h = 1e-6
            df = lambda m: (f(m + h) - f(m - h)) / (2.0 * h)
            lo, hi = grid[max(k - 2, 0)], grid[min(k + 2, grid.size - 1)]
            mu_num = brentq(df, lo, hi, xtol=1e-12)
            assert abs(mu_star - mu_num) < 1e-8
            assert val == pytest.approx(f(mu_star), abs=1e-14)

    def test_rejects_wrong_dimension(self):
        with pytest.raises(UnsupportedBlockError):
            optimal_single_estimate(GenericState.two_term(0.6), "1/2", "1/2")


class TestPairEstimateBlock:
    def test_rejects_wrong_dimension(self):
        with pytest.raises(UnsupportedBlockError):
            optimal_pair(GenericState.two_term(0.6), "1/2", "3/2")

    @pytest.mark.parametrize("a", [0.1, 0.3, 0.5, 0.609, 0.7, 0.9])
    def test_closed_form_nu(self, a):
        nu, pair, _ = optimal_pair(GenericState.two_term(a), "1/2", "1/2")
        assert abs(nu - two_term_nu(a)) < 1e-8
        assert pair.nu == nu

    def test_degenerate_amplitudes(self):
        # off-diagonal vanishes; the pair construction must still be valid
        for a in (0.0, 1.0):
            nu, pair, contrib = optimal_pair(GenericState.two_term(a), "1/2", "1/2")
            total = pair.proj_nu + pair.proj_conjugate
            assert np.abs(total - np.eye(2)).max() < 1e-12
            assert contrib > 0.0

    def test_eigenvector_structure(self):
        # the difference operator is off-diagonal, so projectors lie along (1, +-1)
        _, pair, _ = optimal_pair(GenericState.two_term(0.609), "1/2", "1/2")
        plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
        minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
        spans = sorted([abs(plus @ pair.proj_nu @ plus),
                        abs(minus @ pair.proj_nu @ minus)])
        assert spans[0] == pytest.approx(0.0, abs=1e-12)
        assert spans[1] == pytest.approx(1.0, abs=1e-12)

    def test_pair_relabeling_symmetry(self):
        state = GenericState.two_term(0.5)
        nu, pair, contrib = optimal_pair(state, "1/2", "1/2")
        blk = signal_trig_blocks(state, half("1/2")).blocks[half("1/2")]
        swapped = (float(np.trace(blk.at(nu) @ pair.proj_nu))
                   + float(np.trace(blk.at(math.pi - nu) @ pair.proj_conjugate)))
        relabeled = (float(np.trace(blk.at(math.pi - nu) @ pair.proj_conjugate))
                     + float(np.trace(blk.at(nu) @ pair.proj_nu)))
        assert swapped == relabeled
        assert contrib == pytest.approx(swapped, abs=1e-14)


class TestMaxFidelity:
    def test_contributions_sum(self):
        result = max_fidelity(GenericState.two_term(0.609), "1/2")
        assert result.fidelity == pytest.approx(
            sum(result.per_block_contributions.values()), abs=1e-12)

    def test_certified(self):
        result = max_fidelity(GenericState.parallel(), "1/2")
        assert result.certified
        assert result.certificate_min_eigenvalue >= -1e-9

    def test_rejects_large_blocks(self):
        # three j1 values all couple into J=1 with j2=1: dimension 3
        with pytest.raises(UnsupportedBlockError):
            max_fidelity(THREE_TERM, 1)

    @pytest.mark.parametrize("state", [GenericState.parallel(),
                                       GenericState.antiparallel(),
                                       GenericState.two_term(0.609)])
    def test_dominates_random_povms(self, state):
        rng = np.random.default_rng(17)
        dims = block_dims(state, "1/2")
        result = max_fidelity(state, "1/2")
        assert result.certified
        for _ in range(20):
            competitor = random_povm(dims, rng)
            f = fidelity(state, "1/2", competitor)
            assert f <= result.fidelity + 1e-7


class TestCertificate:
    def test_suboptimal_povm_detected(self):
        state = GenericState.parallel()
        dims = block_dims(state, "1/2")
        povm = PovmSpec({J: SingleEstimate(0.0) for J in dims})
        assert helstrom_certificate(state, "1/2", povm) < -1e-3

    def test_optimal_two_term_passes(self):
        result = max_fidelity(GenericState.two_term(0.609), "1/2", certify=False)
        assert helstrom_certificate(GenericState.two_term(0.609), "1/2",
                                    result.povm) >= -1e-9


class TestOptimizeState:
    def test_rejects_zero_j2(self):
        with pytest.raises(DomainError):
            optimize_state(0)

    def test_spin_half_optimum(self):
        a_star, sector, result = optimize_state("1/2")
        assert a_star == pytest.approx(0.609, abs=0.005)
        assert sector == half(0)
        assert result.fidelity == pytest.approx(0.91092, abs=5e-5)
        assert result.certified

    def test_single_interior_peak(self):
        # exactly one sign change of the finite-difference gradient
        grid = np.linspace(0.0, 1.0, 101)
        vals = [max_fidelity(GenericState.two_term(a), "1/2", certify=False).fidelity
                for a in grid]
        diffs = np.sign(np.diff(vals))
        changes = np.count_nonzero(np.diff(diffs[diffs != 0.0]))
        assert changes == 1

    @pytest.mark.parametrize("twice_j2", [1, 2, 4, 9, 20])
    def test_m1_zero_sector_wins(self, twice_j2):
        a_star, sector, result = optimize_state(HalfInt(twice_j2))
        par = max_fidelity(GenericState.parallel(), HalfInt(twice_j2), certify=False)
        assert sector == half(0)
        assert result.fidelity >= par.fidelity - 1e-9
