// Typed client for the simulator's local JSON API. The UI never computes
// amplitudes itself; everything rendered comes from these responses.

export interface GateOpJson {
  gate: string;
  targets: string[];
  params?: Record<string, string | number>;
}

export interface ColumnJson {
  ops: GateOpJson[];
}

export interface CircuitJson {
  qubits: number;
  cbits: number;
  columns: ColumnJson[];
}

export interface StateEntry {
  bitstring: string;
  re: number;
  im: number;
  p: number;
}

export interface StatePayload {
  num_qubits: number;
  nonzero_count: number;
  bloch: number[][]; // per-qubit [x, y, z]
  summary: boolean;
  entries?: StateEntry[];
  top?: { bitstring: string; p: number }[];
}

export interface ClassicalPayload {
  bits: number[];
  bitstring: string;
  integer: number;
}

export interface SessionInfo {
  id: string;
  instruction_count: number;
  num_qubits: number;
  num_cbits: number;
}

export interface StepResponse {
  index: number;
  instruction: string;
  finished: boolean;
  state: StatePayload;
  classical_register: ClassicalPayload;
  outcome?: { qubits: number[]; bits: number[]; probability: number };
}

export interface RunResponse {
  finished: boolean;
  timing: {
    buckets: Record<string, number>;
    total_seconds: number;
    report: string;
  };
  outcomes: { qubits: number[]; bits: number[]; probability: number }[];
  classical_register: ClassicalPayload;
  state: StatePayload;
}

export interface Diagnostic {
  line: number;
  severity: string;
  message: string;
}

export class ApiError extends Error {
  status: number;
  diagnostics: Diagnostic[];

  constructor(status: number, message: string, diagnostics: Diagnostic[] = []) {
    super(message);
    this.status = status;
    this.diagnostics = diagnostics;
  }
}

async function request<T>(base: string, path: string, method: string,
                          body?: unknown): Promise<T> {
  const response = await fetch(base + path, {
    method,
    headers: body === undefined ? {} : { 'Content-Type': 'application/json' },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  if (!response.ok) {
    let detail: any = {};
    try {
      detail = (await response.json()).detail ?? {};
    } catch {
      // non-JSON error body; fall through with the status text
    }
    throw new ApiError(response.status,
                       detail.message ?? response.statusText,
                       detail.diagnostics ?? []);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(readonly base: string = '') {}

  parseScript(script: string) {
    return request<{ program: unknown; instruction_count: number; canonical: string }>(
      this.base, '/parse', 'POST', { script });
  }

  scriptToCircuit(script: string) {
    return request<{ circuit: CircuitJson; canonical: string }>(
      this.base, '/program', 'POST', { script });
  }

  circuitToScript(circuit: CircuitJson) {
    return request<{ script: string }>(this.base, '/program', 'POST', { circuit });
  }

  listGates() {
    return request<{ gates: { name: string; kind: string; arity: number | null; params: string[] }[] }>(
      this.base, '/gates', 'GET');
  }

  createSession(script: string, seed = 0, snapshotCap = 65536) {
    return request<SessionInfo>(this.base, '/sessions', 'POST',
                                { script, seed, snapshot_cap: snapshotCap });
  }

  step(sessionId: string) {
    return request<StepResponse>(this.base, `/sessions/${sessionId}/step`, 'POST');
  }

  run(sessionId: string) {
    return request<RunResponse>(this.base, `/sessions/${sessionId}/run`, 'POST');
  }

  deleteSession(sessionId: string) {
    return request<{ deleted: string }>(this.base, `/sessions/${sessionId}`, 'DELETE');
  }
}
