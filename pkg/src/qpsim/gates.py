"""Gate registry: built-in unitaries, the modular-multiplication permutation,
the semiclassical phase correction (RPhase), Copy and user-defined gates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GateDefinitionError, ValidationError
from .state import ClassicalRegister, _check_unitary

SQRT1_2 = 1.0 / math.sqrt(2.0)

HADAMARD = np.array([[SQRT1_2, SQRT1_2], [SQRT1_2, -SQRT1_2]], dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

# Exhaustive bijectivity checks above this arity are slower than the
# simulation itself; fall back to random collision probes.
EXHAUSTIVE_PERM_LIMIT = 20
PERM_PROBES = 10**6


def pow_mod(a: int, e: int, m: int) -> int:
    """a^e mod m by square-and-multiply (arbitrary precision)."""
    if e < 0:
        raise ValidationError("exponent must be >= 0")
    if m < 1:
        raise ValidationError("modulus must be >= 1")
    return pow(a, e, m)


def modexp_action(a: int, j: int, N: int, y: int) -> int:
    """Work-register map of the controlled U_{a^{2^j}} oracle: y -> y*a^{2^j}
    mod N for y < N, identity for y >= N."""
    if math.gcd(a, N) != 1:
        raise GateDefinitionError(f"gcd({a}, {N}) != 1")
    if y < N:
        return (y * pow_mod(a, 1 << j, N)) % N
    return y


def rphase_angle(bits) -> float:
    """Phase correction angle -pi * sum_k b_k / 2^k; the first listed bit is
    the most recently measured stage bit and carries weight 1/2."""
    bits = [int(b) for b in bits]
    if not bits:
        raise ValidationError("RPhase requires at least one classical source bit")
    theta = 0.0
    for k, b in enumerate(bits, start=1):
        if b:
            theta -= math.pi / (1 << k)
    return theta


def copy_action(register: ClassicalRegister, qubit_value: int, cbit: int) -> ClassicalRegister:
    """Write a measured qubit value into classical bit ``cbit``."""
    if not 0 <= cbit < len(register):
        raise ValidationError(f"classical bit index {cbit} out of range")
    register[cbit] = int(qubit_value)
    return register


class ModMulPermutation:
    """Permutation on [0, 2^k): MSB is the control bit, the remaining k-1 bits
    are the work value y. With control set, y < N maps to y*mult mod N."""

    def __init__(self, a: int, j: int, N: int, k: int):
        if math.gcd(a, N) != 1:
            raise GateDefinitionError(f"gcd({a}, {N}) != 1")
        if (1 << (k - 1)) <= N:
            raise GateDefinitionError(
                f"work register of {k - 1} qubits too narrow for N={N}")
        self.a = a
        self.j = j
        self.N = N
        self.k = k
        self.mult = pow_mod(a, 1 << j, N)
        self._work_mask = (1 << (k - 1)) - 1
        self._ctrl_bit = 1 << (k - 1)

    def __call__(self, v: int) -> int:
        if v & self._ctrl_bit:
            y = v & self._work_mask
            if y < self.N:
                return self._ctrl_bit | ((y * self.mult) % self.N)
        return v

    def vectorized(self, v: np.ndarray) -> np.ndarray:
        ctrl = (v & self._ctrl_bit) != 0
        y = v & self._work_mask
        mapped = self._ctrl_bit | ((y * self.mult) % self.N)
        return np.where(ctrl & (y < self.N), mapped, v)


@dataclass(frozen=True)
class GateDef:
    name: str
    kind: str  # builtin_1q | cphase | swap | rphase | copy | modexp |
               # unitary_matrix | permutation_fn
    matrix: np.ndarray | None = None
    func: Callable[[int], int] | None = None
    arity: int | None = None  # quantum targets; None = variadic
    param_names: tuple[str, ...] = ()


def _check_bijection(func: Callable[[int], int], k: int) -> None:
    domain = 1 << k
    if k <= EXHAUSTIVE_PERM_LIMIT:
        seen = bytearray(domain)
        for v in range(domain):
            out = func(v)
            if not 0 <= out < domain:
                raise GateDefinitionError(
                    f"permutation output {out} outside [0, 2^{k})")
            if seen[out]:
                raise GateDefinitionError("permutation is not a bijection")
            seen[out] = 1
        return
    rng = np.random.default_rng(0)
    probes = rng.integers(0, domain, size=PERM_PROBES)
    outputs = set()
    for v in np.unique(probes).tolist():
        out = func(int(v))
        if not 0 <= out < domain:
            raise GateDefinitionError(f"permutation output {out} outside [0, 2^{k})")
        if out in outputs:
            raise GateDefinitionError("permutation collision detected by sampling")
        outputs.add(out)


class GateRegistry:
    """Immutable-after-load name -> GateDef mapping with the built-ins."""

    def __init__(self):
        self._gates: dict[str, GateDef] = {}
        for name, m in (("Hadamard", HADAMARD), ("SigmaX", SIGMA_X),
                        ("SigmaY", SIGMA_Y), ("SigmaZ", SIGMA_Z)):
            self._gates[name] = GateDef(name, "builtin_1q", matrix=m, arity=1)
        self._gates["CPHASE"] = GateDef("CPHASE", "cphase", arity=2,
                                        param_names=("phi",))
        self._gates["SWAP"] = GateDef("SWAP", "swap", arity=2)
        self._gates["RPhase"] = GateDef("RPhase", "rphase", arity=1)
        self._gates["Copy"] = GateDef("Copy", "copy", arity=1)
        self._gates["QuModExpUaj"] = GateDef("QuModExpUaj", "modexp",
                                             param_names=("a", "j", "N"))

    def __contains__(self, name: str) -> bool:
        return name in self._gates

    def resolve(self, name: str) -> GateDef:
        gate = self._gates.get(name)
        if gate is None:
            raise ValidationError(f"unknown gate {name!r}")
        return gate

    def names(self):
        return list(self._gates)

    def gates(self):
        return list(self._gates.values())

    def register_custom(self, name: str, matrix=None, func=None,
                        arity: int | None = None) -> "GateRegistry":
        """Register a user gate as a unitary matrix or a permutation function.
        Bijectivity of functions is verified exhaustively up to arity 20."""
        if name in self._gates:
            raise GateDefinitionError(f"gate {name!r} is already registered")
        if (matrix is None) == (func is None):
            raise GateDefinitionError("provide exactly one of matrix or func")
        if matrix is not None:
            m = np.asarray(matrix, dtype=np.complex128)
            dim = m.shape[0] if m.ndim == 2 else 0
            k = dim.bit_length() - 1
            if dim < 2 or (1 << k) != dim:
                raise GateDefinitionError("matrix dimension must be a power of two >= 2")
            m = _check_unitary(m, dim)
            self._gates[name] = GateDef(name, "unitary_matrix", matrix=m, arity=k)
        else:
            if arity is None or arity < 1:
                raise GateDefinitionError("permutation gates need an explicit arity >= 1")
            _check_bijection(func, arity)
            self._gates[name] = GateDef(name, "permutation_fn", func=func,
                                        arity=arity)
        return self


def default_registry() -> GateRegistry:
    return GateRegistry()
