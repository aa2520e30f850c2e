"""Shor factorization pipelines: program generators for the conventional
(3n qubits, one QFT) and the one-control-qubit semiclassical (n+1 qubits,
2n measure-and-feedback stages) circuits, continued-fraction order recovery,
GCD factor extraction and classical test oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, GateDefinitionError, ValidationError
from .executor import ExecutionConfig, ExecutionTrace, apply_gateop, execute
from .gates import GateRegistry, default_registry, pow_mod
from .lang import Program, parse
from .state import ClassicalRegister, QuantumState

APPROACHES = ("nx2n", "3nx1")


def _num_control_bits(N: int) -> int:
    # closed form of int(log2(1 << (N**2 - 1).bit_length()))
    return (N * N - 1).bit_length()


@dataclass(frozen=True)
class ShorParams:
    N: int
    a: int = 2
    approach: str = "nx2n"

    def __post_init__(self):
        if self.N < 15 or self.N % 2 == 0:
            raise ConfigurationError(f"N must be an odd integer >= 15, got {self.N}")
        if self.a < 2:
            raise ConfigurationError(f"a must be >= 2, got {self.a}")
        if self.approach not in APPROACHES:
            raise ConfigurationError(f"approach must be one of {APPROACHES}")
        if math.gcd(self.a, self.N) != 1:
            raise GateDefinitionError(
                f"gcd({self.a}, {self.N}) = {math.gcd(self.a, self.N)} is a "
                f"trivial factor; pick a coprime base")

    @property
    def n_work(self) -> int:
        return self.N.bit_length()

    @property
    def n_cbits(self) -> int:
        return _num_control_bits(self.N)

    @property
    def num_qubits(self) -> int:
        if self.approach == "nx2n":
            return self.n_work + 1
        return self.n_cbits + self.n_work

    def filename(self) -> str:
        return f"Shor-N{self.N}-a{self.a}-{self.approach}.qp"


def qft_swap_lines(num_qubits: int, offset: int = 0) -> list[str]:
    """QFT ladder plus bit-reversal SWAPs over ``num_qubits`` wires starting
    at ``offset`` (qubit ``offset`` is the most significant)."""
    lines = []
    for c in range(num_qubits):
        lines.append(f"GateOp Hadamard {offset + c}")
        for i, d in enumerate(range(c + 1, num_qubits)):
            lines.append(f"GateOp CPHASE {offset + d},{offset + c} "
                         f"phi=PI/{1 << (i + 1)}")
    for i in range(num_qubits // 2):
        lines.append(f"GateOp SWAP {offset + i},{offset + num_qubits - 1 - i}")
    return lines


def build_shor_text(params: ShorParams) -> str:
    """Command text of the factorization circuit for ``params``."""
    N, a = params.N, params.a
    lines = [f"#! Shor factorization program: N={N} a={a} "
             f"approach={params.approach}"]
    if params.approach == "nx2n":
        nQ = params.num_qubits
        nC = params.n_cbits
        lines.append(f"AddQubits {nQ}")
        lines.append(f"AddCbits {nC}")
        lines.append(f"#! work register <- |1>")
        lines.append(f"GateOp SigmaX {nQ - 1}")
        for e in range(nC):
            lines.append(f"#! stage {e}")
            lines.append("GateOp Hadamard 0")
            lines.append(f"GateOp QuModExpUaj 0:{nQ} a={a} j={nC - e - 1} N={N}")
            if e > 0:
                sources = ",".join(str(i) for i in range(-e, 0))
                lines.append(f"GateOp RPhase 0,{sources}")
            lines.append("GateOp Hadamard 0")
            lines.append("Measure 0")
            lines.append(f"GateOp Copy 0,-{e + 1}")
            lines.append(f"GateOp SigmaX 0,-{e + 1}")
        lines.append("#! read out the work register")
        lines.append(f"Measure 1:{nQ}")
    else:
        nWQ = params.n_work
        nCQ = params.n_cbits
        nTQ = nWQ + nCQ
        lines.append(f"AddQubits {nTQ}")
        lines.append(f"#! work register <- |1>")
        lines.append(f"GateOp SigmaX {nTQ - 1}")
        lines.append(f"GateOp Hadamard 0:{nCQ}")
        for c in range(nCQ):
            lines.append(f"GateOp QuModExpUaj {nCQ - c - 1},{nCQ}:{nTQ} "
                         f"a={a} j={c} N={N}")
        lines.append(f"Measure {nCQ}:{nTQ}")
        lines.append("#! QFT on the control register")
        lines.extend(qft_swap_lines(nCQ))
        lines.append(f"Measure 0:{nCQ}")
    return "\n".join(lines) + "\n"


def build_shor_program(params: ShorParams,
                       registry: GateRegistry | None = None) -> Program:
    return parse(build_shor_text(params), registry or default_registry())


# ----------------------------------------------------------------------
# classical number theory

def continued_fraction_order(m: int, L: int, N: int) -> list[int]:
    """Denominators of the convergents of m / 2^L that fall in (0, N),
    in increasing order. m = 0 carries no order information."""
    if not 0 <= m < (1 << L):
        raise ValidationError(f"m must be in [0, 2^{L})")
    if m == 0:
        return []
    num, den = m, 1 << L
    q_prev, q_cur = 0, 1  # q_{-1}, q_0 with a0 = num // den
    candidates = []
    x, y = num, den
    first = True
    while y:
        coeff = x // y
        x, y = y, x - coeff * y
        if first:
            first = False  # q_0 = 1 regardless of a0
        else:
            q_prev, q_cur = q_cur, coeff * q_cur + q_prev
        if 0 < q_cur < N and (not candidates or candidates[-1] != q_cur):
            candidates.append(q_cur)
    return candidates


def extract_factors(N: int, a: int, r: int, try_multiples: bool = False,
                    multiple_bound: int = 16):
    """Nontrivial factor pair from an order candidate, or None. With
    ``try_multiples``, r, 2r, ... multiple_bound*r are attempted in turn."""
    if r < 1:
        raise ValidationError("order candidate must be >= 1")
    multiples = range(1, multiple_bound + 1) if try_multiples else (1,)
    for k in multiples:
        rp = k * r
        if pow_mod(a, rp, N) != 1:
            continue
        if rp % 2:
            continue
        x = pow_mod(a, rp // 2, N)
        if x == N - 1:
            continue
        p = math.gcd(x - 1, N)
        q = math.gcd(x + 1, N)
        if 1 < p < N and 1 < q < N:
            return (min(p, q), max(p, q))
    return None


def classical_order(a: int, N: int) -> int:
    """Smallest r >= 1 with a^r = 1 mod N, by direct iteration."""
    if math.gcd(a, N) != 1:
        raise ValidationError(f"gcd({a}, {N}) != 1")
    x = a % N
    r = 1
    while x != 1:
        x = (x * a) % N
        r += 1
    return r


def smallest_factor(N: int) -> int | None:
    """Trial division up to sqrt(N); None when N is prime (or < 4)."""
    if N % 2 == 0 and N > 2:
        return 2
    f = 3
    while f * f <= N:
        if N % f == 0:
            return f
        f += 2
    return None


def prime_power_root(N: int) -> int | None:
    """p such that N = p^k with k >= 2, else None."""
    for k in range(2, N.bit_length() + 1):
        root = round(N ** (1.0 / k))
        for cand in (root - 1, root, root + 1):
            if cand >= 2 and cand ** k == N:
                return cand
    return None


# ----------------------------------------------------------------------
# the pipeline

@dataclass
class RunRecord:
    bits: str
    integer: int
    candidates: list[int]
    order: int | None
    factors: tuple[int, int] | None
    seed: int
    a: int = 2
    trace: ExecutionTrace | None = None


@dataclass
class FactorizationResult:
    N: int
    a: int | None
    approach: str
    runs: list[RunRecord] = field(default_factory=list)
    success: bool = False
    factors: tuple[int, int] | None = None
    classical: bool = False  # factors found without the quantum pipeline


def _measured_integer(trace: ExecutionTrace, approach: str) -> tuple[str, int]:
    if approach == "nx2n":
        creg = trace.classical_register
        return creg.as_bitstring(), creg.as_int()
    # 3nx1: last Measure targets the control register
    outcome = trace.outcomes()[-1]
    bits = "".join(str(b) for b in outcome.bits)
    return bits, int(bits, 2)


def factor(N: int, a: int | None = None, approach: str = "nx2n",
           seed: int = 0, max_runs: int = 10, try_multiples: bool = False,
           multiple_bound: int = 16, mode: str = "sparse",
           memory_budget: int | None = None, keep_traces: bool = False,
           max_bases: int = 8,
           registry: GateRegistry | None = None) -> FactorizationResult:
    """Run the quantum order-finding pipeline until a factor pair is found or
    the run budget is exhausted. Per-run seeds are seed + run index. With no
    base supplied, a = 2, 3, 4, ... are tried in turn (a base whose order has
    a^(r/2) = -1 mod N can never produce factors); a gcd(a, N) > 1 hit
    short-circuits with that classical factor."""
    if N < 15 or N % 2 == 0:
        raise ConfigurationError(f"N must be an odd integer >= 15, got {N}")
    if smallest_factor(N) is None:
        raise ConfigurationError(f"N={N} is prime")
    result = FactorizationResult(N=N, a=a, approach=approach)

    root = prime_power_root(N)
    if root is not None:
        result.success = True
        result.classical = True
        result.factors = (min(root, N // root), max(root, N // root))
        return result
    if a is not None and math.gcd(a, N) != 1:
        g = math.gcd(a, N)
        result.success = True
        result.classical = True
        result.factors = (min(g, N // g), max(g, N // g))
        return result

    registry = registry or default_registry()
    next_base = 2
    for base_index in range(1 if a is not None else max_bases):
        if a is not None:
            base = a
        else:
            base = next_base
            next_base += 1
            g = math.gcd(base, N)
            if g != 1:
                # the scan itself stumbled on a factor
                result.success = True
                result.classical = True
                result.a = base
                result.factors = (min(g, N // g), max(g, N // g))
                return result
        result.a = base
        params = ShorParams(N=N, a=base, approach=approach)
        program = build_shor_program(params, registry)
        nbits = params.n_cbits
        for i in range(max_runs):
            run_seed = seed + i
            config = ExecutionConfig(seed=run_seed, mode=mode,
                                     memory_budget=memory_budget)
            trace = execute(program, registry, config)
            bits, m = _measured_integer(trace, approach)
            candidates = continued_fraction_order(m, nbits, N)
            order = None
            factors = None
            for cand in candidates:
                if order is None and pow_mod(base, cand, N) == 1:
                    order = cand
                if factors is None:
                    factors = extract_factors(N, base, cand, try_multiples,
                                              multiple_bound)
            if order is None and candidates:
                order = candidates[-1]
            record = RunRecord(bits, m, candidates, order, factors, run_seed,
                               base, trace if keep_traces else None)
            result.runs.append(record)
            if factors is not None:
                result.success = True
                result.factors = factors
                return result
    return result


# ----------------------------------------------------------------------
# exact-distribution oracles (test instrumentation)

_BRANCH_EPSILON = 1e-15


def exact_control_distribution(N: int, a: int, approach: str = "nx2n",
                               registry: GateRegistry | None = None) -> np.ndarray:
    """Exact probability distribution over the 2n-bit phase-estimate integer,
    with no sampling. For nx2n, all mid-circuit measurement branches are
    enumerated with their path probabilities; for 3nx1, the circuit runs
    densely with measurements marginalized out."""
    params = ShorParams(N=N, a=a, approach=approach)
    registry = registry or default_registry()
    program = build_shor_program(params, registry)
    nbits = params.n_cbits
    dist = np.zeros(1 << nbits)
    instructions = program.instructions

    if approach == "3nx1":
        state = QuantumState(params.num_qubits, "dense")
        creg = ClassicalRegister(0)
        for inst in instructions:
            if inst.command == "GateOp":
                apply_gateop(state, creg, inst, registry, definite=None)
        patterns, probs = state.marginal_distribution(range(nbits))
        for pat, pr in zip(patterns, probs):
            dist[pat] += pr
        return dist

    last = len(instructions) - 1

    def walk(i: int, state: QuantumState, creg: ClassicalRegister,
             definite: dict, prob: float) -> None:
        while i <= last:
            inst = instructions[i]
            if inst.command == "Measure":
                if i == last:
                    i += 1  # work-register readout: marginalize
                    continue
                qubits = inst.qubit_targets()
                assert len(qubits) == 1
                q = qubits[0]
                for bit in (0, 1):
                    p = state.probability_of([q], [bit])
                    if p <= _BRANCH_EPSILON:
                        continue
                    branch = state.copy()
                    branch.project([q], [bit])
                    branch_def = dict(definite)
                    branch_def[q] = bit
                    walk(i + 1, branch, creg.copy(), branch_def, prob * p)
                return
            if inst.command == "GateOp":
                apply_gateop(state, creg, inst, registry, definite)
            i += 1
        dist[creg.as_int()] += prob

    walk(0, QuantumState(params.num_qubits, "sparse"), ClassicalRegister(nbits),
         {}, 1.0)
    return dist
