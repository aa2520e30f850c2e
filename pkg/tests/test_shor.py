import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpsim.errors import ConfigurationError, GateDefinitionError, ValidationError
from qpsim.lang import emit, parse
from qpsim.shor import (
    ShorParams,
    build_shor_program,
    build_shor_text,
    classical_order,
    continued_fraction_order,
    exact_control_distribution,
    extract_factors,
    factor,
    prime_power_root,
    qft_swap_lines,
    smallest_factor,
)


class TestShorParams:
    def test_register_sizes_n15(self):
        p = ShorParams(N=15, a=2)
        assert p.n_work == 4
        assert p.n_cbits == 8
        assert p.num_qubits == 5
        assert ShorParams(N=15, a=2, approach="3nx1").num_qubits == 12

    def test_register_sizes_n21(self):
        p = ShorParams(N=21, a=2)
        assert p.n_work == 5
        assert p.n_cbits == 9  # 21^2 - 1 = 440 needs 9 bits

    def test_filename(self):
        assert ShorParams(N=15, a=7).filename() == "Shor-N15-a7-nx2n.qp"
        assert ShorParams(N=21, a=2, approach="3nx1").filename() == \
            "Shor-N21-a2-3nx1.qp"

    @pytest.mark.parametrize("kwargs", [
        {"N": 14, "a": 3},       # even
        {"N": 13, "a": 2},       # below minimum
        {"N": 15, "a": 1},       # base too small
        {"N": 15, "a": 2, "approach": "2nx2"},
    ])
    def test_invalid_params(self, kwargs):
        with pytest.raises(ConfigurationError):
            ShorParams(**kwargs)

    def test_shared_factor_base_rejected(self):
        with pytest.raises(GateDefinitionError):
            ShorParams(N=15, a=6)


class TestProgramGenerators:
    def test_nx2n_structure(self):
        text = build_shor_text(ShorParams(N=15, a=2))
        lines = [l for l in text.splitlines() if l and not l.startswith("#")]
        assert lines[0] == "AddQubits 5"
        assert lines[1] == "AddCbits 8"
        assert lines[2] == "GateOp SigmaX 4"
        assert lines.count("GateOp Hadamard 0") == 16  # two per stage
        assert lines.count("Measure 0") == 8
        assert sum(1 for l in lines if l.startswith("GateOp RPhase")) == 7
        assert lines[-1] == "Measure 1:5"
        # stage 0 uses the highest power of the base
        assert "GateOp QuModExpUaj 0:5 a=2 j=7 N=15" in lines

    def test_nx2n_stage_feedback(self):
        text = build_shor_text(ShorParams(N=15, a=2))
        # stage 3: phase correction reads the three earlier stage bits,
        # most recent first position after the acted-on qubit
        assert "GateOp RPhase 0,-3,-2,-1" in text
        assert "GateOp Copy 0,-4" in text
        assert "GateOp SigmaX 0,-4" in text

    def test_3nx1_structure(self):
        text = build_shor_text(ShorParams(N=15, a=2, approach="3nx1"))
        lines = [l for l in text.splitlines() if l and not l.startswith("#")]
        assert lines[0] == "AddQubits 12"
        assert lines[1] == "GateOp SigmaX 11"
        assert lines[2] == "GateOp Hadamard 0:8"
        assert "GateOp QuModExpUaj 7,8:12 a=2 j=0 N=15" in lines
        assert "GateOp QuModExpUaj 0,8:12 a=2 j=7 N=15" in lines
        assert "Measure 8:12" in lines
        assert lines[-1] == "Measure 0:8"

    def test_generated_programs_parse_and_roundtrip(self):
        for approach in ("nx2n", "3nx1"):
            program = build_shor_program(ShorParams(N=15, a=2,
                                                    approach=approach))
            assert parse(emit(program)) == program

    def test_qft_swap_lines_counts(self):
        lines = qft_swap_lines(4)
        assert sum(1 for l in lines if "Hadamard" in l) == 4
        assert sum(1 for l in lines if "CPHASE" in l) == 6
        assert sum(1 for l in lines if "SWAP" in l) == 2
        assert "GateOp CPHASE 1,0 phi=PI/2" in lines

    def test_qft_swap_lines_offset(self):
        lines = qft_swap_lines(2, offset=5)
        assert lines[0] == "GateOp Hadamard 5"
        assert "GateOp SWAP 5,6" in lines


class TestContinuedFractions:
    def test_quarter(self):
        assert continued_fraction_order(64, 8, 15) == [1, 4]

    def test_zero_measurement(self):
        assert continued_fraction_order(0, 8, 15) == []

    def test_denominators_increase_and_bounded(self):
        cands = continued_fraction_order(85, 8, 15)
        assert cands == sorted(set(cands))
        assert all(0 < c < 15 for c in cands)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            continued_fraction_order(256, 8, 15)
        with pytest.raises(ValidationError):
            continued_fraction_order(-1, 8, 15)

    @given(st.integers(1, (1 << 12) - 1))
    @settings(max_examples=300)
    def test_matches_fraction_convergents(self, m):
        """Oracle: denominators from Fraction-based convergent recursion."""
        L, N = 12, 451
        target = Fraction(m, 1 << L)
        # standard continued-fraction expansion of target
        coeffs = []
        x = target
        while True:
            a = int(x)
            coeffs.append(a)
            frac = x - a
            if frac == 0:
                break
            x = 1 / frac
        q_prev, q_cur = 0, 1  # q_{-1}, q_0
        denoms = [1]
        for a in coeffs[1:]:
            q_prev, q_cur = q_cur, a * q_cur + q_prev
            denoms.append(q_cur)
        expected = []
        for d in denoms:
            if 0 < d < N and d not in expected:
                expected.append(d)
        assert continued_fraction_order(m, L, N) == expected


class TestExtractFactors:
    def test_n15_order4(self):
        assert extract_factors(15, 2, 4) == (3, 5)

    def test_n21_order6(self):
        assert extract_factors(21, 2, 6) == (3, 7)

    def test_odd_order_fails(self):
        assert extract_factors(15, 2, 3) is None

    def test_wrong_order_fails(self):
        assert extract_factors(15, 2, 6) is None

    def test_minus_one_case_fails(self):
        # order(2 mod 961307) = 59946 but 2^(r/2) = -1 mod N: no factors
        r = classical_order(2, 961307)
        assert r == 59946
        assert pow(2, r // 2, 961307) == 961307 - 1
        assert extract_factors(961307, 2, r) is None

    def test_try_multiples_recovers_from_divisor(self):
        # candidate 2 is a proper divisor of the true order 4
        assert extract_factors(15, 2, 2) is None
        assert extract_factors(15, 2, 2, try_multiples=True) == (3, 5)

    def test_invalid_candidate(self):
        with pytest.raises(ValidationError):
            extract_factors(15, 2, 0)

    @given(st.integers(2, 400))
    @settings(max_examples=200)
    def test_returned_factors_are_real(self, a):
        N = 1309  # 7 * 11 * 17
        if math.gcd(a, N) != 1:
            return
        result = extract_factors(N, a, classical_order(a, N))
        if result is not None:
            p, q = result
            assert N % p == 0 and N % q == 0
            assert 1 < p <= q < N


class TestClassicalHelpers:
    @pytest.mark.parametrize("a,N,r", [(2, 15, 4), (7, 15, 4), (2, 21, 6),
                                       (2, 13564597, 564840)])
    def test_classical_order(self, a, N, r):
        assert classical_order(a, N) == r
        assert pow(a, r, N) == 1
        # minimality spot check
        assert all(pow(a, d, N) != 1 for d in (1, 2) if d < r)

    def test_classical_order_shared_factor_rejected(self):
        with pytest.raises(ValidationError):
            classical_order(3, 15)

    @pytest.mark.parametrize("N,f", [(15, 3), (21, 3), (35, 5), (49, 7),
                                     (13564597, 2161), (961307, 619)])
    def test_smallest_factor(self, N, f):
        assert smallest_factor(N) == f
        assert N % f == 0

    @pytest.mark.parametrize("N", [2, 3, 17, 1009, 2161, 6277])
    def test_smallest_factor_prime(self, N):
        assert smallest_factor(N) is None

    @pytest.mark.parametrize("N,root", [(25, 5), (27, 3), (121, 11),
                                        (243, 3), (15, None), (21, None),
                                        (13564597, None)])
    def test_prime_power_root(self, N, root):
        assert prime_power_root(N) == root


class TestExactDistribution:
    def test_n15_four_peaks(self):
        dist = exact_control_distribution(15, 2)
        peaks = np.flatnonzero(dist > 1e-12)
        np.testing.assert_array_equal(peaks, [0, 64, 128, 192])
        np.testing.assert_allclose(dist[peaks], 0.25, atol=1e-12)

    def test_normalized(self):
        for approach in ("nx2n", "3nx1"):
            dist = exact_control_distribution(15, 7, approach)
            assert dist.sum() == pytest.approx(1.0, abs=1e-9)


class TestFactorPipeline:
    def test_n15_quantum(self):
        result = factor(15, 2, seed=0, max_runs=10)
        assert result.success and not result.classical
        assert result.factors == (3, 5)
        good = result.runs[-1]
        assert good.order == 4
        assert good.factors == (3, 5)
        assert good.integer == int(good.bits, 2)

    def test_n21_quantum(self):
        result = factor(21, 2, seed=1, max_runs=10)
        assert result.success
        assert result.factors == (3, 7)

    def test_3nx1_approach(self):
        result = factor(15, 2, approach="3nx1", seed=0, max_runs=10)
        assert result.success
        assert result.factors == (3, 5)

    def test_run_seeds_increment(self):
        result = factor(15, 2, seed=5, max_runs=10)
        assert [r.seed for r in result.runs] == list(range(5, 5 + len(result.runs)))

    def test_prime_power_short_circuit(self):
        result = factor(25)
        assert result.classical and result.factors == (5, 5)
        assert result.runs == []

    def test_explicit_shared_base_short_circuit(self):
        result = factor(15, 3)
        assert result.classical and result.factors == (3, 5)

    def test_prime_rejected(self):
        with pytest.raises(ConfigurationError, match="prime"):
            factor(17)

    def test_even_rejected(self):
        with pytest.raises(ConfigurationError):
            factor(20)

    def test_auto_base_scan(self):
        result = factor(15, seed=0, max_runs=10)
        assert result.success
        assert result.factors == (3, 5)

    def test_exhausted_runs_report_failure(self):
        # seed chosen so the single a=2 run measures a useless integer
        result = factor(15, 2, seed=3, max_runs=1)
        assert not result.success
        assert result.factors is None
        assert len(result.runs) == 1

    def test_keep_traces(self):
        result = factor(15, 2, seed=0, max_runs=3, keep_traces=True)
        assert all(r.trace is not None for r in result.runs)
        off = factor(15, 2, seed=0, max_runs=3)
        assert all(r.trace is None for r in off.runs)

    def test_dense_mode_matches(self):
        sparse = factor(15, 2, seed=2, max_runs=4)
        dense = factor(15, 2, seed=2, max_runs=4, mode="dense")
        assert [r.integer for r in sparse.runs] == [r.integer for r in dense.runs]
