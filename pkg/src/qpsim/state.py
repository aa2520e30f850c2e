"""Quantum register state: sparse map or dense array over 64-bit basis indices.

Bit convention: qubit 0 occupies the most significant of the used bits of the
basis index, so the printed bitstring of an index reads qubit 0, 1, ... left
to right. A state with ``num_qubits = n`` stores qubit ``q`` at bit position
``n - 1 - q``.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    GateDefinitionError,
    InternalError,
    ResourceError,
    ValidationError,
)

MAX_QUBITS = 63
PRUNE_THRESHOLD = 1e-24  # on |amplitude|^2, sparse mode only
NORM_TOLERANCE = 1e-10
UNITARY_TOLERANCE = 1e-10

# Entry count above which sparse gate application switches to vectorized
# numpy kernels instead of per-entry dict updates.
_VECTOR_THRESHOLD = 2048

_DEFAULT_BUDGET = 8 * 1024**3


def default_memory_budget() -> int:
    """Dense-mode allocation budget in bytes; overridable via environment."""
    env = os.environ.get("QPSIM_MEMORY_BUDGET")
    if env:
        return int(env)
    return _DEFAULT_BUDGET


@dataclass(frozen=True)
class MeasurementOutcome:
    qubit_indices: tuple[int, ...]
    bits: tuple[int, ...]
    probability: float

    def as_int(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value


class ClassicalRegister:
    """Ordered array of classical bits, written by Copy."""

    def __init__(self, num_bits: int):
        self.bits = [0] * num_bits

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i: int) -> int:
        return self.bits[i]

    def __setitem__(self, i: int, value: int) -> None:
        if value not in (0, 1):
            raise ValidationError(f"classical bit value must be 0 or 1, got {value}")
        self.bits[i] = value

    def as_bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)

    def as_int(self) -> int:
        return int(self.as_bitstring(), 2) if self.bits else 0

    def copy(self) -> "ClassicalRegister":
        out = ClassicalRegister(len(self.bits))
        out.bits = list(self.bits)
        return out


def _check_unitary(matrix: np.ndarray, dim: int) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.complex128)
    if m.shape != (dim, dim):
        raise GateDefinitionError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
    if not np.allclose(m.conj().T @ m, np.eye(dim), atol=UNITARY_TOLERANCE):
        raise GateDefinitionError("matrix is not unitary")
    return m


class QuantumState:
    """Amplitudes of an n-qubit register in sparse (dict) or dense (array) form."""

    def __init__(self, num_qubits: int, mode: str = "sparse",
                 memory_budget: int | None = None):
        if not 1 <= num_qubits <= MAX_QUBITS:
            raise ConfigurationError(
                f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
        if mode not in ("sparse", "dense"):
            raise ConfigurationError(f"unknown mode {mode!r}")
        self.num_qubits = num_qubits
        self.mode = mode
        self.memory_budget = memory_budget if memory_budget is not None \
            else default_memory_budget()
        if mode == "dense":
            self._vec = self._allocate_dense(num_qubits)
            self._vec[0] = 1.0
            self._table = None
        else:
            self._table = {0: 1.0 + 0.0j}
            self._vec = None

    # ------------------------------------------------------------------
    # bookkeeping

    def _allocate_dense(self, num_qubits: int) -> np.ndarray:
        required = 16 << num_qubits
        if required > self.memory_budget:
            raise ResourceError(
                f"dense state of {num_qubits} qubits requires {required} bytes, "
                f"budget is {self.memory_budget} bytes")
        return np.zeros(1 << num_qubits, dtype=np.complex128)

    def _bitpos(self, qubit: int) -> int:
        return self.num_qubits - 1 - qubit

    def _check_qubits(self, qubits, distinct: bool = True) -> None:
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise ValidationError(f"qubit index {q} out of range")
        if distinct and len(set(qubits)) != len(qubits):
            raise ValidationError(f"duplicate qubit indices in {list(qubits)}")

    def nonzero_count(self) -> int:
        if self.mode == "sparse":
            return len(self._table)
        return int(np.count_nonzero(self._vec))

    def norm_squared(self) -> float:
        if self.mode == "sparse":
            return sum((a.real * a.real + a.imag * a.imag)
                       for a in self._table.values())
        return float(np.vdot(self._vec, self._vec).real)

    def sorted_items(self):
        """(basis_index, amplitude) pairs sorted by basis index."""
        if self.mode == "sparse":
            return sorted(self._table.items())
        idx = np.flatnonzero(self._vec)
        return [(int(i), complex(self._vec[i])) for i in idx]

    def amplitude(self, index: int) -> complex:
        if self.mode == "sparse":
            return self._table.get(index, 0.0 + 0.0j)
        return complex(self._vec[index])

    def copy(self) -> "QuantumState":
        out = QuantumState.__new__(QuantumState)
        out.num_qubits = self.num_qubits
        out.mode = self.mode
        out.memory_budget = self.memory_budget
        out._table = dict(self._table) if self._table is not None else None
        out._vec = self._vec.copy() if self._vec is not None else None
        return out

    def _keys_amps(self):
        n = len(self._table)
        keys = np.fromiter(self._table.keys(), dtype=np.uint64, count=n)
        amps = np.fromiter(self._table.values(), dtype=np.complex128, count=n)
        return keys, amps

    def _set_sparse(self, keys: np.ndarray, amps: np.ndarray) -> None:
        keep = (amps.real * amps.real + amps.imag * amps.imag) >= PRUNE_THRESHOLD
        if not keep.all():
            keys = keys[keep]
            amps = amps[keep]
        self._table = dict(zip(keys.tolist(), amps.tolist()))

    def _prune(self) -> None:
        table = self._table
        dead = [k for k, a in table.items()
                if a.real * a.real + a.imag * a.imag < PRUNE_THRESHOLD]
        for k in dead:
            del table[k]

    # ------------------------------------------------------------------
    # gates

    def apply_1q(self, target: int, matrix, quantum_controls=(),
                 classical_controls=()) -> "QuantumState":
        """Apply a 2x2 unitary to ``target``, restricted to basis states where
        all quantum controls are 1. Skipped entirely if any resolved classical
        control bit is 0."""
        self._check_qubits([target, *quantum_controls])
        if any(int(b) == 0 for b in classical_controls):
            return self
        u = _check_unitary(matrix, 2)
        u00, u01 = complex(u[0, 0]), complex(u[0, 1])
        u10, u11 = complex(u[1, 0]), complex(u[1, 1])
        bit = 1 << self._bitpos(target)
        cmask = 0
        for q in quantum_controls:
            cmask |= 1 << self._bitpos(q)

        if self.mode == "dense":
            base = np.arange(self._vec.size, dtype=np.uint64)
            sel = (base & np.uint64(bit)) == 0
            if cmask:
                sel &= (base & np.uint64(cmask)) == np.uint64(cmask)
            i0 = base[sel]
            i1 = i0 | np.uint64(bit)
            a0 = self._vec[i0]
            a1 = self._vec[i1]
            self._vec[i0] = u00 * a0 + u01 * a1
            self._vec[i1] = u10 * a0 + u11 * a1
            return self

        table = self._table
        if len(table) >= _VECTOR_THRESHOLD:
            keys, amps = self._keys_amps()
            if cmask:
                active = (keys & np.uint64(cmask)) == np.uint64(cmask)
            else:
                active = np.ones(keys.size, dtype=bool)
            akeys = keys[active]
            aamps = amps[active]
            b = ((akeys >> np.uint64(self._bitpos(target))) & np.uint64(1)) \
                .astype(np.int64)
            lo = akeys & np.uint64(~bit & ((1 << 64) - 1))
            hi = lo | np.uint64(bit)
            row0 = np.where(b == 0, u00, u01) * aamps
            row1 = np.where(b == 0, u10, u11) * aamps
            out_keys = np.concatenate([keys[~active], lo, hi])
            out_amps = np.concatenate([amps[~active], row0, row1])
            uk, inv = np.unique(out_keys, return_inverse=True)
            re = np.bincount(inv, weights=out_amps.real, minlength=uk.size)
            im = np.bincount(inv, weights=out_amps.imag, minlength=uk.size)
            self._set_sparse(uk, re + 1j * im)
            return self

        new: dict[int, complex] = {}
        get = new.get
        for idx, amp in table.items():
            if cmask and (idx & cmask) != cmask:
                new[idx] = get(idx, 0j) + amp
                continue
            if idx & bit:
                lo = idx ^ bit
                if u01 != 0:
                    new[lo] = get(lo, 0j) + u01 * amp
                if u11 != 0:
                    new[idx] = get(idx, 0j) + u11 * amp
            else:
                if u00 != 0:
                    new[idx] = get(idx, 0j) + u00 * amp
                hi = idx | bit
                if u10 != 0:
                    new[hi] = get(hi, 0j) + u10 * amp
        self._table = new
        self._prune()
        return self

    def apply_kq(self, targets, matrix) -> "QuantumState":
        """Apply a 2^k x 2^k unitary to the ordered ``targets`` (first target
        is the most significant bit of the k-bit block value)."""
        targets = list(targets)
        self._check_qubits(targets)
        k = len(targets)
        u = _check_unitary(matrix, 1 << k)
        positions = [self._bitpos(q) for q in targets]

        def block_value(idx: int) -> int:
            v = 0
            for p in positions:
                v = (v << 1) | ((idx >> p) & 1)
            return v

        def with_block(idx: int, v: int) -> int:
            for i, p in enumerate(reversed(positions)):
                bitv = (v >> i) & 1
                idx = (idx & ~(1 << p)) | (bitv << p)
            return idx

        if self.mode == "dense":
            new = np.zeros_like(self._vec)
            for idx in range(self._vec.size):
                amp = self._vec[idx]
                if amp == 0:
                    continue
                v = block_value(idx)
                col = u[:, v]
                for vp in np.flatnonzero(col):
                    new[with_block(idx, int(vp))] += col[vp] * amp
            self._vec = new
            return self

        new_t: dict[int, complex] = {}
        get = new_t.get
        for idx, amp in self._table.items():
            v = block_value(idx)
            col = u[:, v]
            for vp in np.flatnonzero(col):
                j = with_block(idx, int(vp))
                new_t[j] = get(j, 0j) + complex(col[vp]) * amp
        self._table = new_t
        self._prune()
        return self

    def apply_cphase(self, control: int, target: int, phi: float) -> "QuantumState":
        if control == target:
            raise ValidationError("CPHASE control and target must differ")
        self._check_qubits([control, target])
        mask = (1 << self._bitpos(control)) | (1 << self._bitpos(target))
        phase = cmath.exp(1j * phi)
        if self.mode == "dense":
            base = np.arange(self._vec.size, dtype=np.uint64)
            sel = (base & np.uint64(mask)) == np.uint64(mask)
            self._vec[sel] *= phase
            return self
        table = self._table
        if len(table) >= _VECTOR_THRESHOLD:
            keys, amps = self._keys_amps()
            sel = (keys & np.uint64(mask)) == np.uint64(mask)
            amps[sel] *= phase
            self._table = dict(zip(keys.tolist(), amps.tolist()))
            return self
        for idx in table:
            if (idx & mask) == mask:
                table[idx] *= phase
        return self

    def apply_phase_1q(self, target: int, theta: float,
                       classical_controls=()) -> "QuantumState":
        """diag(1, e^{i theta}) on ``target``."""
        self._check_qubits([target])
        if any(int(b) == 0 for b in classical_controls):
            return self
        bit = 1 << self._bitpos(target)
        phase = cmath.exp(1j * theta)
        if self.mode == "dense":
            base = np.arange(self._vec.size, dtype=np.uint64)
            sel = (base & np.uint64(bit)) != 0
            self._vec[sel] *= phase
            return self
        for idx in self._table:
            if idx & bit:
                self._table[idx] *= phase
        return self

    def apply_swap(self, a: int, b: int) -> "QuantumState":
        if a == b:
            raise ValidationError("SWAP targets must differ")
        self._check_qubits([a, b])
        pa, pb = self._bitpos(a), self._bitpos(b)
        if self.mode == "dense":
            base = np.arange(self._vec.size, dtype=np.uint64)
            ba = (base >> np.uint64(pa)) & np.uint64(1)
            bb = (base >> np.uint64(pb)) & np.uint64(1)
            diff = ba != bb
            src = base.copy()
            flip = np.uint64((1 << pa) | (1 << pb))
            src[diff] = base[diff] ^ flip
            self._vec = self._vec[src]
            return self
        flip = (1 << pa) | (1 << pb)
        new: dict[int, complex] = {}
        for idx, amp in self._table.items():
            ba = (idx >> pa) & 1
            bb = (idx >> pb) & 1
            new[idx ^ flip if ba != bb else idx] = amp
        self._table = new
        return self

    def apply_permutation(self, targets, perm, table=None) -> "QuantumState":
        """Remap the k-bit value read from ``targets`` through the bijection
        ``perm`` (callable int -> int, or use ``table`` when provided).
        Amplitude values are untouched; support size is preserved."""
        targets = list(targets)
        self._check_qubits(targets)
        k = len(targets)
        positions = [self._bitpos(q) for q in targets]

        if self.mode == "dense":
            if table is None:
                table = np.fromiter((perm(v) for v in range(1 << k)),
                                    dtype=np.int64, count=1 << k)
            else:
                table = np.asarray(table, dtype=np.int64)
            base = np.arange(self._vec.size, dtype=np.int64)
            v = np.zeros_like(base)
            for p in positions:
                v = (v << 1) | ((base >> p) & 1)
            vp = table[v]
            dest = base
            clear = 0
            for p in positions:
                clear |= 1 << p
            dest = dest & ~clear
            for i, p in enumerate(reversed(positions)):
                dest = dest | (((vp >> i) & 1) << p)
            new = np.zeros_like(self._vec)
            new[dest] = self._vec
            self._vec = new
            return self

        if len(self._table) >= _VECTOR_THRESHOLD and table is None \
                and hasattr(perm, "vectorized"):
            keys, amps = self._keys_amps()
            skeys = keys.astype(np.int64)
            v = np.zeros_like(skeys)
            for p in positions:
                v = (v << 1) | ((skeys >> p) & 1)
            vp = perm.vectorized(v)
            clear = 0
            for p in positions:
                clear |= 1 << p
            dest = skeys & ~clear
            for i, p in enumerate(reversed(positions)):
                dest = dest | (((vp >> i) & 1) << p)
            self._table = dict(zip(dest.tolist(), amps.tolist()))
            return self

        lookup = (lambda v: int(table[v])) if table is not None else perm
        new_t: dict[int, complex] = {}
        clear = 0
        for p in positions:
            clear |= 1 << p
        for idx, amp in self._table.items():
            v = 0
            for p in positions:
                v = (v << 1) | ((idx >> p) & 1)
            vp = lookup(v)
            dest = idx & ~clear
            for i, p in enumerate(reversed(positions)):
                dest |= ((vp >> i) & 1) << p
            new_t[dest] = amp
        if len(new_t) != len(self._table):
            raise GateDefinitionError("permutation is not a bijection on the support")
        self._table = new_t
        return self

    # ------------------------------------------------------------------
    # measurement and readout

    def _pattern_probs(self, qubit_indices):
        """Probability per observed bit pattern, sorted by pattern value."""
        positions = [self._bitpos(q) for q in qubit_indices]
        if self.mode == "dense":
            base = np.arange(self._vec.size, dtype=np.int64)
            pat = np.zeros_like(base)
            for p in positions:
                pat = (pat << 1) | ((base >> p) & 1)
            w = (self._vec.real ** 2 + self._vec.imag ** 2)
            up, inv = np.unique(pat, return_inverse=True)
            probs = np.bincount(inv, weights=w, minlength=up.size)
            keep = probs > 0
            return up[keep].tolist(), probs[keep].tolist()
        keys, amps = self._keys_amps()
        skeys = keys.astype(np.int64)
        pat = np.zeros_like(skeys)
        for p in positions:
            pat = (pat << 1) | ((skeys >> p) & 1)
        w = amps.real ** 2 + amps.imag ** 2
        up, inv = np.unique(pat, return_inverse=True)
        probs = np.bincount(inv, weights=w, minlength=up.size)
        return up.tolist(), probs.tolist()

    def marginal_distribution(self, qubit_indices):
        """(patterns, probabilities) over the observed bit patterns of the
        listed qubits (first qubit = MSB of the pattern), sorted by pattern."""
        qubit_indices = list(qubit_indices)
        self._check_qubits(qubit_indices)
        return self._pattern_probs(qubit_indices)

    def probability_of(self, qubit_indices, bits) -> float:
        qubit_indices = list(qubit_indices)
        bits = [int(b) for b in bits]
        if len(bits) != len(qubit_indices):
            raise ValidationError("bit pattern length must match qubit count")
        self._check_qubits(qubit_indices)
        want = 0
        for b in bits:
            want = (want << 1) | b
        patterns, probs = self._pattern_probs(qubit_indices)
        for pat, pr in zip(patterns, probs):
            if pat == want:
                return float(pr)
        return 0.0

    def project(self, qubit_indices, bits) -> float:
        """Collapse onto the subspace where ``qubit_indices`` read ``bits``;
        renormalize; return the pre-collapse probability of that pattern."""
        qubit_indices = list(qubit_indices)
        bits = [int(b) for b in bits]
        self._check_qubits(qubit_indices)
        positions = [self._bitpos(q) for q in qubit_indices]
        mask = 0
        want = 0
        for p, b in zip(positions, bits):
            mask |= 1 << p
            want |= b << p
        if self.mode == "dense":
            base = np.arange(self._vec.size, dtype=np.uint64)
            sel = (base & np.uint64(mask)) == np.uint64(want)
            prob = float(np.sum(self._vec.real[sel] ** 2 + self._vec.imag[sel] ** 2))
            if prob <= 0.0:
                raise InternalError("projection onto a zero-norm subspace")
            self._vec[~sel] = 0
            self._vec /= math.sqrt(prob)
            return prob
        scale_items = [(k, a) for k, a in self._table.items()
                       if (k & mask) == want]
        prob = sum(a.real * a.real + a.imag * a.imag for _, a in scale_items)
        if prob <= 0.0:
            raise InternalError("projection onto a zero-norm subspace")
        inv = 1.0 / math.sqrt(prob)
        self._table = {k: a * inv for k, a in scale_items}
        return prob

    def measure(self, qubit_indices, rng) -> MeasurementOutcome:
        """Sample ``qubit_indices`` jointly per the Born rule, collapse and
        renormalize. ``rng`` is a numpy Generator."""
        qubit_indices = list(qubit_indices)
        self._check_qubits(qubit_indices)
        patterns, probs = self._pattern_probs(qubit_indices)
        r = rng.random() * sum(probs)
        acc = 0.0
        chosen = patterns[-1]
        for pat, pr in zip(patterns, probs):
            acc += pr
            if r < acc:
                chosen = pat
                break
        k = len(qubit_indices)
        bits = tuple((chosen >> (k - 1 - i)) & 1 for i in range(k))
        prob = self.project(qubit_indices, bits)
        return MeasurementOutcome(tuple(qubit_indices), bits, prob)

    def bloch_vector(self, qubit: int) -> tuple[float, float, float]:
        """(x, y, z) of the single-qubit reduced density matrix."""
        self._check_qubits([qubit])
        bit = 1 << self._bitpos(qubit)
        rho01 = 0j
        p0 = 0.0
        p1 = 0.0
        if self.mode == "dense":
            base = np.arange(self._vec.size, dtype=np.uint64)
            sel0 = (base & np.uint64(bit)) == 0
            i0 = base[sel0]
            a0 = self._vec[i0]
            a1 = self._vec[i0 | np.uint64(bit)]
            p0 = float(np.sum(a0.real ** 2 + a0.imag ** 2))
            p1 = float(np.sum(a1.real ** 2 + a1.imag ** 2))
            rho01 = complex(np.sum(a0 * a1.conj()))
        else:
            table = self._table
            for idx, amp in table.items():
                if idx & bit:
                    p1 += amp.real ** 2 + amp.imag ** 2
                else:
                    p0 += amp.real ** 2 + amp.imag ** 2
                    partner = table.get(idx | bit)
                    if partner is not None:
                        rho01 += amp * partner.conjugate()
        x = 2.0 * rho01.real
        y = -2.0 * rho01.imag  # 2 Im(rho10) with rho10 = conj(rho01)
        z = p0 - p1
        return (x, y, z)

    # ------------------------------------------------------------------
    # mode conversion

    def convert_mode(self, target_mode: str) -> "QuantumState":
        if target_mode not in ("sparse", "dense"):
            raise ConfigurationError(f"unknown mode {target_mode!r}")
        if target_mode == self.mode:
            return self
        if target_mode == "dense":
            vec = self._allocate_dense(self.num_qubits)
            for idx, amp in self._table.items():
                vec[idx] = amp
            self._vec = vec
            self._table = None
        else:
            table: dict[int, complex] = {}
            for idx in np.flatnonzero(self._vec):
                amp = complex(self._vec[idx])
                if amp.real * amp.real + amp.imag * amp.imag >= PRUNE_THRESHOLD:
                    table[int(idx)] = amp
            self._table = table
            self._vec = None
        self.mode = target_mode
        return self

    def to_dense_array(self) -> np.ndarray:
        """Dense copy of the amplitudes (no mode change); small states only."""
        if self.mode == "dense":
            return self._vec.copy()
        vec = np.zeros(1 << self.num_qubits, dtype=np.complex128)
        for idx, amp in self._table.items():
            vec[idx] = amp
        return vec


def new_state(num_qubits: int, mode: str = "sparse",
              memory_budget: int | None = None) -> QuantumState:
    """|00...0> over ``num_qubits`` qubits."""
    return QuantumState(num_qubits, mode, memory_budget)


def bitstring(index: int, num_qubits: int) -> str:
    return format(index, f"0{num_qubits}b")
