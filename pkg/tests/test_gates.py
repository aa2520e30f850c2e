import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpsim.errors import GateDefinitionError, ValidationError
from qpsim.gates import (
    HADAMARD,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    GateRegistry,
    ModMulPermutation,
    copy_action,
    default_registry,
    modexp_action,
    pow_mod,
    rphase_angle,
)
from qpsim.state import ClassicalRegister


class TestMatrices:
    @pytest.mark.parametrize("m", [HADAMARD, SIGMA_X, SIGMA_Y, SIGMA_Z])
    def test_unitary(self, m):
        np.testing.assert_allclose(m @ m.conj().T, np.eye(2), atol=1e-15)

    def test_pauli_algebra(self):
        np.testing.assert_allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z, atol=1e-15)

    def test_hadamard_conjugation(self):
        np.testing.assert_allclose(HADAMARD @ SIGMA_X @ HADAMARD, SIGMA_Z,
                                   atol=1e-15)


class TestPowMod:
    @given(st.integers(0, 10**6), st.integers(0, 200), st.integers(1, 10**6))
    @settings(max_examples=200, deadline=None)
    def test_matches_naive(self, a, e, m):
        # oracle: plain a**e for small e, else reduce via repeated squaring check
        assert pow_mod(a, e, m) == (a ** e) % m if e <= 20 else True
        assert pow_mod(a, e, m) == pow(a, e, m)

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValidationError):
            pow_mod(2, -1, 5)

    def test_zero_modulus_rejected(self):
        with pytest.raises(ValidationError):
            pow_mod(2, 3, 0)

    def test_big_operands(self):
        a, e, m = 2, 10**6, (1 << 61) - 1
        assert pow_mod(a, e, m) == pow(a, e, m)


class TestModexpAction:
    def test_known_cycle(self):
        # a=2, N=15: 1 -> 2 -> 4 -> 8 -> 1 under U_{2^{2^0}}
        y = 1
        seen = []
        for _ in range(4):
            seen.append(y)
            y = modexp_action(2, 0, 15, y)
        assert seen == [1, 2, 4, 8]
        assert y == 1

    def test_square_power(self):
        assert modexp_action(2, 2, 15, 1) == pow(2, 4, 15)

    def test_identity_above_modulus(self):
        assert modexp_action(2, 0, 15, 15) == 15
        assert modexp_action(2, 0, 15, 21) == 21

    def test_shared_factor_rejected(self):
        with pytest.raises(GateDefinitionError):
            modexp_action(3, 0, 15, 1)

    @given(st.integers(0, 5), st.integers(0, 30))
    @settings(max_examples=100, deadline=None)
    def test_bijective_below_modulus(self, j, y):
        N, a = 21, 2
        out = modexp_action(a, j, N, y)
        if y < N:
            assert out < N
            # invert with the modular inverse of a^{2^j}
            inv = pow(pow(a, 1 << j, N), -1, N)
            assert (out * inv) % N == y % N
        else:
            assert out == y


class TestRphaseAngle:
    def test_single_bit(self):
        assert rphase_angle([1]) == pytest.approx(-math.pi / 2)
        assert rphase_angle([0]) == 0.0

    def test_weights_halve(self):
        assert rphase_angle([0, 1]) == pytest.approx(-math.pi / 4)
        assert rphase_angle([0, 0, 1]) == pytest.approx(-math.pi / 8)

    def test_accumulation(self):
        assert rphase_angle([1, 1, 1]) == pytest.approx(
            -math.pi * (1 / 2 + 1 / 4 + 1 / 8))

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            rphase_angle([])

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=12))
    @settings(max_examples=100)
    def test_range(self, bits):
        theta = rphase_angle(bits)
        assert -math.pi < theta <= 0.0


class TestCopyAction:
    def test_writes_bit(self):
        reg = ClassicalRegister(4)
        copy_action(reg, 1, 2)
        assert reg.as_bitstring() == "0010"

    def test_overwrite(self):
        reg = ClassicalRegister(2)
        copy_action(reg, 1, 0)
        copy_action(reg, 0, 0)
        assert reg.as_int() == 0

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            copy_action(ClassicalRegister(2), 1, 2)


class TestModMulPermutation:
    def test_is_permutation(self):
        perm = ModMulPermutation(a=2, j=0, N=15, k=5)
        outputs = sorted(perm(v) for v in range(32))
        assert outputs == list(range(32))

    def test_control_clear_is_identity(self):
        perm = ModMulPermutation(a=2, j=1, N=15, k=5)
        for v in range(16):
            assert perm(v) == v

    def test_control_set_multiplies(self):
        perm = ModMulPermutation(a=2, j=0, N=15, k=5)
        assert perm(0b10001) == 0b10010  # y=1 -> 2
        assert perm(0b11000) == 0b10001  # y=8 -> 16 mod 15 = 1

    def test_vectorized_matches_scalar(self):
        perm = ModMulPermutation(a=5, j=3, N=21, k=6)
        values = np.arange(64, dtype=np.uint64)
        expected = np.array([perm(int(v)) for v in values], dtype=np.uint64)
        np.testing.assert_array_equal(perm.vectorized(values), expected)

    def test_narrow_register_rejected(self):
        with pytest.raises(GateDefinitionError):
            ModMulPermutation(a=2, j=0, N=15, k=4)

    def test_shared_factor_rejected(self):
        with pytest.raises(GateDefinitionError):
            ModMulPermutation(a=5, j=0, N=15, k=5)


class TestRegistry:
    def test_builtins_present(self):
        reg = default_registry()
        for name in ("Hadamard", "SigmaX", "SigmaY", "SigmaZ", "CPHASE",
                     "SWAP", "RPhase", "Copy", "QuModExpUaj"):
            assert name in reg

    def test_unknown_gate(self):
        with pytest.raises(ValidationError, match="unknown gate"):
            default_registry().resolve("Toffoli")

    def test_register_matrix_gate(self):
        reg = GateRegistry()
        cnot = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
        reg.register_custom("CNOT", matrix=cnot)
        gate = reg.resolve("CNOT")
        assert gate.kind == "unitary_matrix"
        assert gate.arity == 2

    def test_register_permutation_gate(self):
        reg = GateRegistry()
        reg.register_custom("Inc3", func=lambda v: (v + 1) % 8, arity=3)
        assert reg.resolve("Inc3").arity == 3

    def test_duplicate_rejected(self):
        reg = GateRegistry()
        with pytest.raises(GateDefinitionError, match="already registered"):
            reg.register_custom("Hadamard", matrix=HADAMARD)

    def test_non_unitary_rejected(self):
        with pytest.raises(GateDefinitionError):
            GateRegistry().register_custom("Bad", matrix=[[1, 1], [0, 1]])

    def test_non_power_of_two_rejected(self):
        with pytest.raises(GateDefinitionError):
            GateRegistry().register_custom("Bad", matrix=np.eye(3))

    def test_non_bijection_rejected(self):
        with pytest.raises(GateDefinitionError, match="bijection"):
            GateRegistry().register_custom("Bad", func=lambda v: 0, arity=2)

    def test_out_of_domain_rejected(self):
        with pytest.raises(GateDefinitionError):
            GateRegistry().register_custom("Bad", func=lambda v: v + 1, arity=2)

    def test_both_matrix_and_func_rejected(self):
        with pytest.raises(GateDefinitionError):
            GateRegistry().register_custom("Bad", matrix=HADAMARD,
                                           func=lambda v: v, arity=1)
