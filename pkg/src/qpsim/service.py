"""Local HTTP/JSON API: parse and convert .qp scripts, create execution
sessions, step or run them, and list the gate registry. Binds to loopback by
default; serves the browser UI when a static directory is supplied."""

from __future__ import annotations

import threading
import uuid
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .errors import ParseError, QpError
from .executor import ExecutionConfig, Executor, timing_report
from .gates import default_registry
from .lang import (
    Instruction,
    Program,
    emit,
    emit_instruction,
    format_phi,
    parse,
)
from .state import bitstring


class ParseRequest(BaseModel):
    script: str


class ConvertRequest(BaseModel):
    script: str | None = None
    circuit: dict | None = None


class SessionRequest(BaseModel):
    script: str
    seed: int = 0
    mode: str = "sparse"
    snapshot_cap: int = 65536


def _program_json(program: Program) -> dict:
    return {
        "num_qubits": program.num_qubits,
        "num_cbits": program.num_cbits,
        "instructions": [_instruction_json(i) for i in program.instructions],
    }


def _instruction_json(inst: Instruction) -> dict:
    out: dict[str, Any] = {"command": inst.command, "line": inst.line}
    if inst.command in ("AddQubits", "AddCbits"):
        out["count"] = inst.count
    else:
        if inst.gate:
            out["gate"] = inst.gate
        out["targets"] = [str(item) for item in inst.items]
        out["params"] = {k: (v if isinstance(v, int) else format_phi(v))
                         for k, v in inst.params}
    return out


def program_to_circuit(program: Program) -> dict:
    """Circuit JSON: one op per column, targets in item syntax."""
    columns = []
    for inst in program.instructions:
        if inst.command in ("AddQubits", "AddCbits"):
            continue
        gate = inst.gate if inst.command == "GateOp" else "Measure"
        op = {"gate": gate,
              "targets": [str(item) for item in inst.items]}
        params = {k: (v if isinstance(v, int) else format_phi(v))
                  for k, v in inst.params}
        if params:
            op["params"] = params
        columns.append({"ops": [op]})
    return {"qubits": program.num_qubits, "cbits": program.num_cbits,
            "columns": columns}


def circuit_to_script(circuit: dict) -> str:
    lines = []
    qubits = int(circuit.get("qubits", 0))
    cbits = int(circuit.get("cbits", 0))
    if qubits:
        lines.append(f"AddQubits {qubits}")
    if cbits:
        lines.append(f"AddCbits {cbits}")
    for column in circuit.get("columns", []):
        for op in column.get("ops", []):
            gate = op["gate"]
            targets = ",".join(str(t) for t in op.get("targets", []))
            params = " ".join(f"{k}={v}" for k, v in op.get("params", {}).items())
            if gate == "Measure":
                lines.append(f"Measure {targets}")
            else:
                line = f"GateOp {gate} {targets}"
                if params:
                    line += f" {params}"
                lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


def _diagnostics_payload(diagnostics) -> list[dict]:
    return [{"line": d.line, "severity": d.severity, "message": d.message}
            for d in diagnostics]


class Session:
    def __init__(self, request: SessionRequest, registry):
        program = parse(request.script, registry)
        config = ExecutionConfig(seed=request.seed, mode=request.mode,
                                 snapshot_cap=request.snapshot_cap)
        self.program = program
        self.config = config
        self.executor = Executor(program, registry, config)
        self.lock = threading.Lock()

    def state_payload(self) -> dict:
        state = self.executor.state
        n = state.num_qubits
        count = state.nonzero_count()
        bloch = [list(state.bloch_vector(q)) for q in range(n)]
        payload: dict[str, Any] = {"num_qubits": n, "nonzero_count": count,
                                   "bloch": bloch}
        if count <= self.config.snapshot_cap:
            payload["summary"] = False
            payload["entries"] = [
                {"bitstring": bitstring(i, n), "re": a.real, "im": a.imag,
                 "p": a.real * a.real + a.imag * a.imag}
                for i, a in state.sorted_items()]
        else:
            payload["summary"] = True
            pairs = [(i, abs(a) ** 2) for i, a in state.sorted_items()]
            pairs.sort(key=lambda t: -t[1])
            payload["top"] = [{"bitstring": bitstring(i, n), "p": p}
                              for i, p in pairs[:16]]
        return payload

    def classical_payload(self) -> dict:
        creg = self.executor.creg
        return {"bits": list(creg.bits), "bitstring": creg.as_bitstring(),
                "integer": creg.as_int()}


def create_app(ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="qpsim", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    registry = default_registry()
    sessions: dict[str, Session] = {}

    @app.post("/parse")
    def parse_endpoint(request: ParseRequest):
        try:
            program = parse(request.script, registry)
        except ParseError as err:
            raise HTTPException(status_code=400, detail={
                "diagnostics": _diagnostics_payload(err.diagnostics)})
        return {"program": _program_json(program),
                "instruction_count": len(program.instructions),
                "canonical": emit(program)}

    @app.post("/program")
    def convert_endpoint(request: ConvertRequest):
        if (request.script is None) == (request.circuit is None):
            raise HTTPException(status_code=400, detail={
                "message": "provide exactly one of script or circuit"})
        try:
            if request.script is not None:
                program = parse(request.script, registry)
                return {"circuit": program_to_circuit(program),
                        "canonical": emit(program)}
            script = circuit_to_script(request.circuit)
            program = parse(script, registry)
            return {"script": emit(program)}
        except ParseError as err:
            raise HTTPException(status_code=400, detail={
                "diagnostics": _diagnostics_payload(err.diagnostics)})

    @app.get("/gates")
    def gates_endpoint():
        return {"gates": [
            {"name": g.name, "kind": g.kind, "arity": g.arity,
             "params": list(g.param_names)} for g in registry.gates()]}

    @app.post("/sessions")
    def create_session(request: SessionRequest):
        try:
            session = Session(request, registry)
        except ParseError as err:
            raise HTTPException(status_code=400, detail={
                "diagnostics": _diagnostics_payload(err.diagnostics)})
        except QpError as err:
            raise HTTPException(status_code=400, detail={"message": str(err)})
        session_id = uuid.uuid4().hex
        sessions[session_id] = session
        return {"id": session_id,
                "instruction_count": len(session.program.instructions),
                "num_qubits": session.program.num_qubits,
                "num_cbits": session.program.num_cbits}

    def _get(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail={"message": "unknown session"})
        return session

    @app.post("/sessions/{session_id}/step")
    def step_session(session_id: str):
        session = _get(session_id)
        with session.lock:
            if session.executor.finished:
                raise HTTPException(status_code=409,
                                    detail={"message": "stepped past end"})
            try:
                record = session.executor.step()
            except QpError as err:
                raise HTTPException(status_code=400, detail={"message": str(err)})
            payload = {
                "index": session.executor.cursor - 1,
                "instruction": emit_instruction(record.instruction),
                "finished": session.executor.finished,
                "state": session.state_payload(),
                "classical_register": session.classical_payload(),
            }
            if record.outcome is not None:
                payload["outcome"] = {
                    "qubits": list(record.outcome.qubit_indices),
                    "bits": list(record.outcome.bits),
                    "probability": record.outcome.probability,
                }
            return payload

    @app.post("/sessions/{session_id}/run")
    def run_session(session_id: str):
        session = _get(session_id)
        with session.lock:
            try:
                trace = session.executor.run()
            except QpError as err:
                raise HTTPException(status_code=400, detail={"message": str(err)})
            outcomes = [{"qubits": list(o.qubit_indices),
                         "bits": list(o.bits),
                         "probability": o.probability} for o in trace.outcomes()]
            return {
                "finished": True,
                "timing": {"buckets": trace.buckets,
                           "total_seconds": trace.total_seconds,
                           "report": timing_report(trace)},
                "outcomes": outcomes,
                "classical_register": session.classical_payload(),
                "state": session.state_payload(),
            }

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        if session_id not in sessions:
            raise HTTPException(status_code=404, detail={"message": "unknown session"})
        del sessions[session_id]
        return {"deleted": session_id}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
