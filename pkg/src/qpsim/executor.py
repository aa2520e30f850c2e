"""Runs a validated Program against the state engine with a seeded RNG,
recording per-gate timing, measurement outcomes and optional state snapshots."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ExecutionError, InternalError, ValidationError
from .gates import (
    GateRegistry,
    ModMulPermutation,
    copy_action,
    default_registry,
    rphase_angle,
)
from .lang import Instruction, Program, emit_instruction, validate
from .state import (
    ClassicalRegister,
    MeasurementOutcome,
    QuantumState,
    bitstring,
    default_memory_budget,
)

RENDER_THRESHOLD = 1e-12  # on |amplitude|^2 for printed state lines

# Timing buckets of the per-run report; gates outside this map get their own
# named line.
_BUCKETS = {
    "Hadamard": "Hadamard",
    "QuModExpUaj": "QuModExp",
    "CPHASE": "QFT",
    "SWAP": "QFT",
    "RPhase": "QFT",
    "Measure": "Measure",
    "Copy": "Measure",
}
_BUCKET_ORDER = ("Hadamard", "QuModExp", "QFT", "Measure")
_SETUP_BUCKET = "Setup"  # AddQubits/AddCbits; counted in Total, not printed


@dataclass
class ExecutionConfig:
    seed: int = 0
    mode: str = "sparse"
    measurement: str = "in_place"  # in_place | deferred
    trace_states: bool = False
    snapshot_cap: int = 65536
    memory_budget: int | None = None

    def __post_init__(self):
        if self.mode not in ("sparse", "dense"):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.measurement not in ("in_place", "deferred"):
            raise ValidationError(f"unknown measurement mode {self.measurement!r}")
        if self.snapshot_cap < 1:
            raise ValidationError("snapshot_cap must be >= 1")


@dataclass
class InstructionRecord:
    instruction: Instruction
    seconds: float
    outcome: MeasurementOutcome | None = None
    nonzero_after: int = 0


@dataclass
class Snapshot:
    step: int
    instruction: str
    nonzero_count: int
    entries: list | None  # [(bitstring, re, im)] when count <= cap
    top_probabilities: list | None  # [(bitstring, p)] x <= 16 otherwise
    bloch: list  # per-qubit (x, y, z)


@dataclass
class ExecutionTrace:
    records: list[InstructionRecord] = field(default_factory=list)
    buckets: dict[str, float] = field(default_factory=dict)
    total_seconds: float = 0.0
    classical_register: ClassicalRegister | None = None
    final_state: QuantumState | None = None
    snapshots: list[Snapshot] = field(default_factory=list)
    seed: int = 0
    mode: str = "sparse"

    def outcomes(self) -> list[MeasurementOutcome]:
        return [r.outcome for r in self.records if r.outcome is not None]

    def peak_nonzero(self) -> int:
        return max((r.nonzero_after for r in self.records), default=0)


def apply_gateop(state: QuantumState, creg: ClassicalRegister,
                 inst: Instruction, registry: GateRegistry,
                 definite: dict[int, int] | None = None) -> None:
    """Apply one GateOp instruction in place. ``definite`` maps qubits known
    to be in a post-measurement basis state to their bit value; pass None to
    skip the Copy-before-Measure check (test setup)."""
    gate = registry.resolve(inst.gate)
    qubits = inst.qubit_targets()
    cvalues = [creg[i] for i in inst.cbit_targets()]

    if gate.kind == "builtin_1q" or (gate.kind == "unitary_matrix"
                                     and gate.arity == 1):
        # 1-qubit gates broadcast over every listed qubit; classical
        # references gate the whole operation.
        for target in qubits:
            state.apply_1q(target, gate.matrix, classical_controls=cvalues)
        if definite is not None and not (cvalues and any(v == 0 for v in cvalues)):
            _invalidate(definite, qubits)
    elif gate.kind == "unitary_matrix":
        state.apply_kq(qubits, gate.matrix)
        _invalidate(definite, qubits)
    elif gate.kind == "permutation_fn":
        state.apply_permutation(qubits, gate.func)
        _invalidate(definite, qubits)
    elif gate.kind == "cphase":
        phi = inst.param("phi")
        if phi is None:
            raise ValidationError(f"line {inst.line}: CPHASE requires phi=")
        state.apply_cphase(qubits[0], qubits[1], float(phi))
    elif gate.kind == "swap":
        state.apply_swap(qubits[0], qubits[1])
        _invalidate(definite, qubits)
    elif gate.kind == "rphase":
        theta = rphase_angle(cvalues)
        state.apply_phase_1q(qubits[0], theta)
    elif gate.kind == "copy":
        source = qubits[0]
        dest = inst.cbit_targets()[0]
        if definite is not None:
            if source not in definite:
                raise ExecutionError(
                    f"line {inst.line}: Copy before Measure on qubit {source}")
            value = definite[source]
        else:
            p1 = state.probability_of([source], [1])
            if p1 > 1e-9 and p1 < 1 - 1e-9:
                raise ExecutionError(
                    f"line {inst.line}: Copy source qubit {source} is not in a "
                    f"definite post-measurement state")
            value = 1 if p1 >= 0.5 else 0
        copy_action(creg, value, dest)
    elif gate.kind == "modexp":
        a = inst.param("a")
        j = inst.param("j")
        modulus = inst.param("N")
        if a is None or j is None or modulus is None:
            raise ValidationError(
                f"line {inst.line}: QuModExpUaj requires a=, j=, N=")
        perm = ModMulPermutation(int(a), int(j), int(modulus), len(qubits))
        state.apply_permutation(qubits, perm)
        _invalidate(definite, qubits)
    else:
        raise InternalError(f"unhandled gate kind {gate.kind!r}")


def _invalidate(definite, qubits) -> None:
    if definite is not None:
        for q in qubits:
            definite.pop(q, None)


class Executor:
    """Stepwise interpreter for one Program run. Instances are single-use."""

    def __init__(self, program: Program, registry: GateRegistry | None = None,
                 config: ExecutionConfig | None = None):
        self.program = program
        self.registry = registry or default_registry()
        self.config = config or ExecutionConfig()
        diagnostics = validate(program, self.registry)
        if diagnostics:
            raise ValidationError("; ".join(str(d) for d in diagnostics))
        budget = self.config.memory_budget
        if budget is None:
            budget = default_memory_budget()
        self.state = QuantumState(max(program.num_qubits, 1), self.config.mode,
                                  memory_budget=budget)
        self.creg = ClassicalRegister(program.num_cbits)
        self.rng = np.random.default_rng(self.config.seed)
        self.cursor = 0
        self.definite: dict[int, int] = {}
        self.deferred: list[tuple[int, Instruction]] = []  # (record idx, inst)
        self.deferred_qubits: set[int] = set()
        self.trace = ExecutionTrace(seed=self.config.seed, mode=self.config.mode)

    @property
    def finished(self) -> bool:
        return self.cursor >= len(self.program.instructions)

    def step(self) -> InstructionRecord:
        if self.finished:
            raise ExecutionError("execution already complete")
        inst = self.program.instructions[self.cursor]
        start = time.perf_counter()
        outcome = None
        if inst.command in ("AddQubits", "AddCbits"):
            pass  # registers are sized from the validated Program up front
        elif inst.command == "GateOp":
            touched = set(inst.qubit_targets())
            if touched & self.deferred_qubits:
                q = sorted(touched & self.deferred_qubits)[0]
                raise ExecutionError(
                    f"line {inst.line}: gate after deferred measurement of "
                    f"qubit {q}")
            apply_gateop(self.state, self.creg, inst, self.registry,
                         self.definite)
        elif inst.command == "Measure":
            outcome = self._measure(inst)
        record = InstructionRecord(inst, time.perf_counter() - start, outcome,
                                   self.state.nonzero_count())
        self.trace.records.append(record)
        bucket = self._bucket(inst)
        self.trace.buckets[bucket] = self.trace.buckets.get(bucket, 0.0) \
            + record.seconds
        self.trace.total_seconds += record.seconds
        if self.config.trace_states and inst.command in ("GateOp", "Measure"):
            self.trace.snapshots.append(self._snapshot(inst))
        self.cursor += 1
        if self.finished:
            self._finalize()
        return record

    def _measure(self, inst: Instruction):
        qubits = inst.qubit_targets()
        if self.config.measurement == "deferred":
            for q in qubits:
                self.deferred_qubits.add(q)
            self.deferred.append((len(self.trace.records), inst))
            return None
        outcome = self.state.measure(qubits, self.rng)
        for q, b in zip(outcome.qubit_indices, outcome.bits):
            self.definite[q] = b
        return outcome

    def _finalize(self) -> None:
        if self.deferred:
            all_qubits: list[int] = []
            for _, inst in self.deferred:
                all_qubits.extend(inst.qubit_targets())
            before = self.state.copy()
            joint = self.state.measure(all_qubits, self.rng)
            pos = 0
            for record_idx, inst in self.deferred:
                k = len(inst.qubit_targets())
                bits = joint.bits[pos:pos + k]
                sub = MeasurementOutcome(tuple(inst.qubit_targets()), bits,
                                         before.probability_of(
                                             inst.qubit_targets(), bits))
                self.trace.records[record_idx].outcome = sub
                pos += k
            self.deferred = []
        self.trace.classical_register = self.creg
        self.trace.final_state = self.state

    def run(self) -> ExecutionTrace:
        while not self.finished:
            self.step()
        return self.trace

    def _bucket(self, inst: Instruction) -> str:
        if inst.command in ("AddQubits", "AddCbits"):
            return _SETUP_BUCKET
        if inst.command == "Measure":
            return "Measure"
        return _BUCKETS.get(inst.gate, inst.gate)

    def _snapshot(self, inst: Instruction) -> Snapshot:
        count = self.state.nonzero_count()
        n = self.state.num_qubits
        entries = None
        top = None
        if count <= self.config.snapshot_cap:
            entries = [(bitstring(i, n), a.real, a.imag)
                       for i, a in self.state.sorted_items()]
        else:
            pairs = [(i, abs(a) ** 2) for i, a in self.state.sorted_items()]
            pairs.sort(key=lambda t: -t[1])
            top = [(bitstring(i, n), p) for i, p in pairs[:16]]
        bloch = [self.state.bloch_vector(q) for q in range(n)]
        return Snapshot(len(self.trace.records) - 1, emit_instruction(inst),
                        count, entries, top, bloch)


def execute(program: Program, registry: GateRegistry | None = None,
            config: ExecutionConfig | None = None) -> ExecutionTrace:
    """Run a Program to completion and return its trace."""
    return Executor(program, registry, config).run()


def timing_report(trace: ExecutionTrace) -> str:
    """Per-bucket timing lines, `<name>: <seconds>s.` with 2 decimals.
    Canonical buckets come first, other gates get their own lines, Total last."""
    lines = []
    seen = set()
    for name in _BUCKET_ORDER:
        if name in trace.buckets:
            lines.append(f"{name}: {trace.buckets[name]:.2f}s.")
            seen.add(name)
    for name in sorted(trace.buckets):
        if name in seen or name == _SETUP_BUCKET:
            continue
        lines.append(f"{name}: {trace.buckets[name]:.2f}s.")
    lines.append(f"Total: {trace.total_seconds:.2f}s.")
    return "\n".join(lines)


def render_state(state: QuantumState, format: str = "amplitudes") -> str:
    """Final-state text in one of three formats: complex amplitudes,
    normalized probabilities, or a plain machine-readable dump."""
    n = state.num_qubits
    lines = []
    for idx, amp in state.sorted_items():
        p = amp.real * amp.real + amp.imag * amp.imag
        if p < RENDER_THRESHOLD:
            continue
        bits = bitstring(idx, n)
        if format == "amplitudes":
            lines.append(f"{bits} {amp.real:.10f} {amp.imag:.10f}")
        elif format == "probabilities":
            lines.append(f"{bits} {p:.10f}")
        elif format == "plain":
            lines.append(f"{idx} {bits} {amp.real:.10f} {amp.imag:.10f} {p:.10f}")
        else:
            raise ValidationError(f"unknown state format {format!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def snapshot_states(trace: ExecutionTrace) -> list[Snapshot]:
    return list(trace.snapshots)


def run_log(trace: ExecutionTrace, program: Program,
            state_format: str = "amplitudes") -> str:
    """Full run log: instruction echo, outcomes, timing report, final state."""
    sections = ["# instructions"]
    sections += [emit_instruction(i) for i in program.instructions]
    sections.append("")
    sections.append("# outcomes")
    sections.append(f"seed: {trace.seed}")
    sections.append(f"mode: {trace.mode}")
    for record in trace.records:
        if record.outcome is not None:
            o = record.outcome
            bits = "".join(str(b) for b in o.bits)
            sections.append(
                f"Measure {list(o.qubit_indices)} -> {bits} (p={o.probability:.6f})")
    if trace.classical_register is not None and len(trace.classical_register):
        sections.append(
            f"classical register: {trace.classical_register.as_bitstring()} "
            f"| {trace.classical_register.as_int()}")
    sections.append("")
    sections.append("# timing")
    sections.append(timing_report(trace))
    sections.append("")
    sections.append("# final state")
    sections.append(render_state(trace.final_state, state_format))
    return "\n".join(sections)
