"""Line-oriented `.qp` quantum-program language: parser, emitter, validator.

Grammar (one instruction per line, '#' comments and blank lines ignored):

    AddQubits <n>
    AddCbits <n>
    GateOp <gate> <targets> [key=value ...]
    Measure <targets>

Targets are comma-separated items: a signed integer or a half-open range
``lo:hi``. Non-negative indices are qubits; a negative index ``-k`` is the
classical bit ``nC - k``, counted from the end of the classical register.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParseError
from .gates import GateRegistry, default_registry

_INT_RE = re.compile(r"-?\d+$")
_RANGE_RE = re.compile(r"(\d+):(\d+)$")
_PI_RE = re.compile(r"(-)?(?:(\d+)\*)?PI(?:/(\d+))?$")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"line {self.line}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class TargetItem:
    """A single signed index, or a half-open qubit range [lo, hi)."""
    lo: int
    hi: int | None = None

    def raw_indices(self):
        if self.hi is None:
            return [self.lo]
        return list(range(self.lo, self.hi))

    def __str__(self) -> str:
        if self.hi is None:
            return str(self.lo)
        return f"{self.lo}:{self.hi}"


@dataclass(frozen=True)
class TargetRef:
    kind: str  # qubit | cbit
    raw_index: int
    resolved_index: int


@dataclass(frozen=True)
class Instruction:
    command: str  # AddQubits | AddCbits | GateOp | Measure
    line: int = field(compare=False, default=0)
    count: int = 0  # AddQubits/AddCbits
    gate: str | None = None
    items: tuple[TargetItem, ...] = ()
    targets: tuple[TargetRef, ...] = ()
    params: tuple[tuple[str, float | int], ...] = ()

    def param(self, name, default=None):
        for key, value in self.params:
            if key == name:
                return value
        return default

    def qubit_targets(self):
        return [t.resolved_index for t in self.targets if t.kind == "qubit"]

    def cbit_targets(self):
        return [t.resolved_index for t in self.targets if t.kind == "cbit"]


@dataclass(frozen=True)
class Program:
    instructions: tuple[Instruction, ...]
    num_qubits: int
    num_cbits: int


def parse_phi(token: str) -> float | None:
    """PI, PI/<int>, <int>*PI/<int> (optionally negated) or a decimal literal."""
    m = _PI_RE.match(token)
    if m:
        sign = -1.0 if m.group(1) else 1.0
        num = int(m.group(2)) if m.group(2) else 1
        den = int(m.group(3)) if m.group(3) else 1
        if den == 0:
            return None
        return sign * num * math.pi / den
    try:
        return float(token)
    except ValueError:
        return None


def format_phi(value: float) -> str:
    """Canonical phi text: a PI fraction when it reparses to the same float,
    else the decimal repr."""
    if value != 0.0 and math.isfinite(value):
        frac = Fraction(abs(value) / math.pi).limit_denominator(1 << 16)
        if frac.numerator != 0:
            num, den = frac.numerator, frac.denominator
            text = "PI" if num == 1 else f"{num}*PI"
            if den != 1:
                text += f"/{den}"
            if value < 0:
                text = "-" + text
            if parse_phi(text) == value:
                return text
    return repr(value)


_INT_PARAMS = {"a", "j", "N"}


class _Parser:
    def __init__(self, text: str, registry: GateRegistry):
        self.registry = registry
        self.lines = text.replace("\r\n", "\n").split("\n")
        self.diagnostics: list[Diagnostic] = []
        self.instructions: list[Instruction] = []
        self.num_qubits = 0
        self.num_cbits = 0

    def error(self, line: int, message: str) -> None:
        self.diagnostics.append(Diagnostic(line, message))

    def parse(self) -> Program:
        for lineno, raw in enumerate(self.lines, start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            self.parse_line(lineno, stripped)
        if self.diagnostics:
            raise ParseError(self.diagnostics)
        return Program(tuple(self.instructions), self.num_qubits, self.num_cbits)

    def parse_line(self, lineno: int, text: str) -> None:
        tokens = text.split()
        command = tokens[0]
        if command in ("AddQubits", "AddCbits"):
            if len(tokens) != 2 or not _INT_RE.match(tokens[1]):
                self.error(lineno, f"{command} takes a single integer count")
                return
            count = int(tokens[1])
            if count < 1:
                self.error(lineno, f"{command} count must be >= 1")
                return
            if command == "AddQubits":
                if self.num_qubits:
                    self.error(lineno, "AddQubits already declared")
                    return
                self.num_qubits = count
            else:
                if self.num_cbits:
                    self.error(lineno, "AddCbits already declared")
                    return
                self.num_cbits = count
            self.instructions.append(Instruction(command, lineno, count=count))
        elif command == "GateOp":
            if len(tokens) < 3:
                self.error(lineno, "GateOp needs a gate name and targets")
                return
            gate = tokens[1]
            if gate not in self.registry:
                self.error(lineno, f"unknown gate {gate!r}")
                return
            items = self.parse_items(lineno, tokens[2])
            params = self.parse_params(lineno, tokens[3:])
            if items is None or params is None:
                return
            targets = self.resolve_items(lineno, items)
            if targets is None:
                return
            self.check_arity(lineno, gate, targets)
            self.instructions.append(Instruction(
                "GateOp", lineno, gate=gate, items=tuple(items),
                targets=tuple(targets), params=tuple(params)))
        elif command == "Measure":
            if len(tokens) != 2:
                self.error(lineno, "Measure takes a target list")
                return
            items = self.parse_items(lineno, tokens[1])
            if items is None:
                return
            targets = self.resolve_items(lineno, items)
            if targets is None:
                return
            bad = [t for t in targets if t.kind != "qubit"]
            if bad:
                self.error(lineno, "Measure targets must be qubits")
                return
            self.instructions.append(Instruction(
                "Measure", lineno, items=tuple(items), targets=tuple(targets)))
        else:
            self.error(lineno, f"unknown command {command!r}")

    def parse_items(self, lineno: int, text: str):
        items = []
        for piece in text.split(","):
            m = _RANGE_RE.match(piece)
            if m:
                lo, hi = int(m.group(1)), int(m.group(2))
                if lo >= hi:
                    self.error(lineno, f"malformed range {piece!r} (lo >= hi)")
                    return None
                items.append(TargetItem(lo, hi))
            elif _INT_RE.match(piece):
                items.append(TargetItem(int(piece)))
            else:
                self.error(lineno, f"malformed target {piece!r}")
                return None
        return items

    def resolve_items(self, lineno: int, items):
        refs = []
        for item in items:
            for raw in item.raw_indices():
                if raw >= 0:
                    if self.num_qubits == 0:
                        self.error(lineno, "qubit used before AddQubits")
                        return None
                    if raw >= self.num_qubits:
                        self.error(lineno, f"qubit index {raw} out of range "
                                           f"(have {self.num_qubits})")
                        return None
                    refs.append(TargetRef("qubit", raw, raw))
                else:
                    if self.num_cbits == 0:
                        self.error(lineno, "classical bit used before AddCbits")
                        return None
                    resolved = self.num_cbits + raw
                    if resolved < 0:
                        self.error(lineno, f"classical index {raw} out of range "
                                           f"(have {self.num_cbits})")
                        return None
                    refs.append(TargetRef("cbit", raw, resolved))
        return refs

    def parse_params(self, lineno: int, tokens):
        params = []
        for token in tokens:
            if "=" not in token:
                self.error(lineno, f"malformed parameter {token!r}")
                return None
            key, _, raw = token.partition("=")
            if key in _INT_PARAMS:
                if not _INT_RE.match(raw):
                    self.error(lineno, f"parameter {key} must be an integer")
                    return None
                params.append((key, int(raw)))
            else:
                value = parse_phi(raw)
                if value is None:
                    self.error(lineno, f"malformed value for {key}: {raw!r}")
                    return None
                params.append((key, value))
        return params

    def check_arity(self, lineno: int, gate_name: str, targets) -> None:
        gate = self.registry.resolve(gate_name)
        qubits = [t for t in targets if t.kind == "qubit"]
        cbits = [t for t in targets if t.kind == "cbit"]
        if gate.kind in ("builtin_1q",):
            # first target is the acted-on qubit; extras are controls
            if not targets or targets[0].kind != "qubit":
                self.error(lineno, f"{gate_name} needs a qubit as first target")
        elif gate.kind == "cphase":
            if len(qubits) != 2 or cbits:
                self.error(lineno, "CPHASE takes exactly two qubit targets")
        elif gate.kind == "swap":
            if len(qubits) != 2 or cbits:
                self.error(lineno, "SWAP takes exactly two qubit targets")
        elif gate.kind == "rphase":
            if not targets or targets[0].kind != "qubit":
                self.error(lineno, "RPhase needs a qubit as first target")
        elif gate.kind == "copy":
            if len(targets) != 2 or targets[0].kind != "qubit" \
                    or targets[1].kind != "cbit":
                self.error(lineno, "Copy takes a source qubit and a classical bit")
        elif gate.kind == "modexp":
            if len(qubits) < 2 or cbits:
                self.error(lineno, "QuModExpUaj takes a control qubit plus the "
                                   "work register")
        elif gate.kind in ("unitary_matrix", "permutation_fn"):
            needed = gate.arity or 1
            if gate.kind == "unitary_matrix" and needed == 1:
                if not targets or targets[0].kind != "qubit":
                    self.error(lineno, f"{gate_name} needs a qubit as first target")
            elif len(qubits) != needed or cbits:
                self.error(lineno, f"{gate_name} takes exactly {needed} qubit "
                                   f"targets")


def parse(text: str, registry: GateRegistry | None = None) -> Program:
    """Parse a .qp script into a validated Program. Raises ParseError carrying
    line-numbered diagnostics on any failure."""
    return _Parser(text, registry or default_registry()).parse()


def emit_instruction(inst: Instruction) -> str:
    if inst.command in ("AddQubits", "AddCbits"):
        return f"{inst.command} {inst.count}"
    items = ",".join(str(item) for item in inst.items)
    parts = []
    if inst.command == "GateOp":
        parts = ["GateOp", inst.gate, items]
    else:
        parts = ["Measure", items]
    for key, value in inst.params:
        if isinstance(value, int):
            parts.append(f"{key}={value}")
        else:
            parts.append(f"{key}={format_phi(value)}")
    return " ".join(parts)


def emit(program: Program) -> str:
    """Canonical text of a Program: one instruction per line, LF-terminated.
    parse(emit(p)) is structurally equal to p."""
    lines = [emit_instruction(inst) for inst in program.instructions]
    return "\n".join(lines) + ("\n" if lines else "")


def validate(program: Program, registry: GateRegistry | None = None) -> list[Diagnostic]:
    """Executable-readiness diagnostics beyond what parse() enforces."""
    registry = registry or default_registry()
    diagnostics: list[Diagnostic] = []
    for inst in program.instructions:
        if inst.command == "GateOp":
            gate = registry.resolve(inst.gate)
            qubits = inst.qubit_targets()
            if len(set(qubits)) != len(qubits):
                diagnostics.append(Diagnostic(
                    inst.line, f"duplicate target in {inst.gate}"))
            if gate.kind == "rphase" and not inst.cbit_targets():
                diagnostics.append(Diagnostic(
                    inst.line, "RPhase requires at least one classical source"))
            if gate.kind == "cphase" and inst.param("phi") is None:
                diagnostics.append(Diagnostic(inst.line, "CPHASE requires phi="))
            if gate.kind == "modexp":
                for name in ("a", "j", "N"):
                    if inst.param(name) is None:
                        diagnostics.append(Diagnostic(
                            inst.line, f"QuModExpUaj requires {name}="))
            if gate.kind in ("swap", "cphase", "modexp", "permutation_fn") \
                    and inst.cbit_targets():
                diagnostics.append(Diagnostic(
                    inst.line, f"{inst.gate} does not accept classical targets"))
        elif inst.command == "Measure":
            qubits = inst.qubit_targets()
            if len(set(qubits)) != len(qubits):
                diagnostics.append(Diagnostic(inst.line, "duplicate Measure target"))
    return diagnostics
