// Circuit editing model. The grid is the editable representation; the
// canonical script text always comes back from the service conversion
// endpoint, never from local emission.

import { CircuitJson, ColumnJson, GateOpJson } from './api.js';

/** Expand one target item ("3", "-2", "1:4") into raw signed indices. */
export function expandItem(item: string): number[] {
  const range = /^(\d+):(\d+)$/.exec(item);
  if (range) {
    const lo = parseInt(range[1], 10);
    const hi = parseInt(range[2], 10);
    const out: number[] = [];
    for (let i = lo; i < hi; i += 1) out.push(i);
    return out;
  }
  return [parseInt(item, 10)];
}

export function expandTargets(targets: string[]): number[] {
  return targets.flatMap(expandItem);
}

/** Collapse consecutive runs of qubit indices back into item syntax. */
export function formatTargets(indices: number[]): string[] {
  const items: string[] = [];
  let i = 0;
  while (i < indices.length) {
    let j = i;
    while (j + 1 < indices.length && indices[j + 1] === indices[j] + 1
           && indices[j] >= 0) {
      j += 1;
    }
    // collapse runs of three or more; pairs stay explicit ("0,1" not "0:2")
    if (j - i >= 2 && indices[i] >= 0) {
      items.push(`${indices[i]}:${indices[j] + 1}`);
      i = j + 1;
    } else {
      items.push(String(indices[i]));
      i += 1;
    }
  }
  return items;
}

export interface Cell {
  wire: number;        // 0..qubits-1 quantum, then qubits..qubits+cbits-1 classical
  column: number;
  glyph: string;       // short label drawn in the cell
  role: 'target' | 'source' | 'classical';
  classical: boolean;  // cell sits on a dashed classical wire
  copyEdge: boolean;   // highlighted measurement-copy edge
}

const GLYPHS: Record<string, string> = {
  Hadamard: 'H',
  SigmaX: 'X',
  SigmaY: 'Y',
  SigmaZ: 'Z',
  CPHASE: 'Φ',
  SWAP: '×',
  RPhase: 'R',
  Copy: 'C',
  QuModExpUaj: 'Ua',
  Measure: 'M',
};

export function glyphFor(gate: string): string {
  return GLYPHS[gate] ?? gate.slice(0, 2);
}

/**
 * Flatten a circuit into renderable cells. Classical wires live below the
 * quantum wires; a negative target -k on nC classical bits resolves to wire
 * qubits + (nC - k).
 */
export function gridCells(circuit: CircuitJson): Cell[] {
  const cells: Cell[] = [];
  circuit.columns.forEach((column: ColumnJson, columnIndex: number) => {
    for (const op of column.ops) {
      const glyph = glyphFor(op.gate);
      const isCopy = op.gate === 'Copy';
      for (const raw of expandTargets(op.targets)) {
        if (raw >= 0) {
          cells.push({
            wire: raw,
            column: columnIndex,
            glyph,
            role: 'target',
            classical: false,
            copyEdge: false,
          });
        } else {
          cells.push({
            wire: circuit.qubits + circuit.cbits + raw,
            column: columnIndex,
            glyph: isCopy ? '▼' : '●',
            role: 'classical',
            classical: true,
            copyEdge: isCopy,
          });
        }
      }
    }
  });
  return cells;
}

export class CircuitModel {
  qubits: number;
  cbits: number;
  columns: ColumnJson[];

  constructor(qubits = 1, cbits = 0) {
    this.qubits = qubits;
    this.cbits = cbits;
    this.columns = [];
  }

  static fromJson(circuit: CircuitJson): CircuitModel {
    const model = new CircuitModel(circuit.qubits, circuit.cbits);
    model.columns = circuit.columns.map((c) => ({
      ops: c.ops.map((op) => ({ ...op, targets: [...op.targets] })),
    }));
    return model;
  }

  toJson(): CircuitJson {
    return { qubits: this.qubits, cbits: this.cbits, columns: this.columns };
  }

  addQubit(): void {
    this.qubits += 1;
  }

  addCbit(): void {
    this.cbits += 1;
  }

  /** Append a gate as a new column (one op per time step). */
  placeGate(gate: string, targets: number[],
            params?: Record<string, string | number>): void {
    const op: GateOpJson = { gate, targets: formatTargets(targets) };
    if (params && Object.keys(params).length > 0) {
      op.params = params;
    }
    this.columns.push({ ops: [op] });
  }

  placeMeasure(targets: number[]): void {
    this.columns.push({ ops: [{ gate: 'Measure', targets: formatTargets(targets) }] });
  }

  setParams(column: number, params: Record<string, string | number>): void {
    const op = this.columns[column]?.ops[0];
    if (op) op.params = params;
  }

  deleteColumn(column: number): void {
    this.columns.splice(column, 1);
  }
}
