// Pure render functions: every function maps service payloads to markup
// strings, so the views are testable without a browser. app.ts injects the
// results into the document.

import { RunResponse, StatePayload } from './api.js';
import { Cell, gridCells } from './model.js';
import { CircuitJson } from './api.js';

const CELL = 44; // px grid pitch
const PAD = 28;

function escapeHtml(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

/**
 * SVG circuit grid: solid quantum wires on top, dashed classical wires below
 * (classical data paths are drawn dashed), Copy edges highlighted.
 */
export function renderGrid(circuit: CircuitJson): string {
  const wires = circuit.qubits + circuit.cbits;
  const columns = Math.max(circuit.columns.length, 1);
  const width = PAD * 2 + columns * CELL;
  const height = PAD * 2 + wires * CELL;
  const parts: string[] = [
    `<svg class="grid" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">`,
  ];
  for (let w = 0; w < wires; w += 1) {
    const y = PAD + w * CELL + CELL / 2;
    const classical = w >= circuit.qubits;
    const dash = classical ? ' stroke-dasharray="6 4"' : '';
    const label = classical ? `c${w - circuit.qubits}` : `q${w}`;
    parts.push(`<line class="wire${classical ? ' classical' : ''}" x1="${PAD}" y1="${y}" `
      + `x2="${width - PAD}" y2="${y}" stroke="#555"${dash}/>`);
    parts.push(`<text class="wire-label" x="4" y="${y + 4}">${label}</text>`);
  }
  for (const cell of gridCells(circuit)) {
    parts.push(renderCell(cell));
  }
  parts.push('</svg>');
  return parts.join('');
}

function renderCell(cell: Cell): string {
  const x = PAD + cell.column * CELL + CELL / 2;
  const y = PAD + cell.wire * CELL + CELL / 2;
  const classes = ['cell', cell.role, cell.copyEdge ? 'copy-edge' : '']
    .filter(Boolean).join(' ');
  if (cell.classical) {
    const fill = cell.copyEdge ? '#d9822b' : '#777';
    return `<g class="${classes}" data-column="${cell.column}">`
      + `<circle cx="${x}" cy="${y}" r="7" fill="${fill}"/></g>`;
  }
  return `<g class="${classes}" data-column="${cell.column}">`
    + `<rect x="${x - 16}" y="${y - 16}" width="32" height="32" rx="4" `
    + `fill="#fff" stroke="#333"/>`
    + `<text x="${x}" y="${y + 5}" text-anchor="middle">${escapeHtml(cell.glyph)}</text></g>`;
}

/** Per-qubit Bloch disc pair: (x, y) equatorial view and (x, z) polar view. */
export function renderBloch(bloch: number[][]): string {
  const r = 26;
  const parts = bloch.map(([x, , z], qubit) => {
    const px = x * r;
    const pz = -z * r;
    return `<svg class="bloch" data-qubit="${qubit}" viewBox="-32 -32 64 64" width="64" height="64">`
      + `<circle r="${r}" fill="none" stroke="#888"/>`
      + `<line x1="0" y1="-${r}" x2="0" y2="${r}" stroke="#ddd"/>`
      + `<line x1="-${r}" y1="0" x2="${r}" y2="0" stroke="#ddd"/>`
      + `<circle class="bloch-point" cx="${px.toFixed(2)}" cy="${pz.toFixed(2)}" r="4" fill="#1f6feb"/>`
      + `<text x="0" y="-${r + 2}" text-anchor="middle" class="bloch-label">q${qubit}</text>`
      + `</svg>`;
  });
  return `<div class="bloch-row">${parts.join('')}</div>`;
}

/**
 * Probability/amplitude bars for a full snapshot, or top-16 probability bars
 * plus a "summary" badge when the state was too large to ship.
 */
export function renderBars(state: StatePayload): string {
  if (state.summary) {
    const bars = (state.top ?? []).map(({ bitstring, p }) =>
      bar(bitstring, p, `p=${p.toFixed(4)}`)).join('');
    return `<div class="bars summary">`
      + `<span class="badge summary-badge">summary: ${state.nonzero_count} nonzero entries</span>`
      + bars + `</div>`;
  }
  const bars = (state.entries ?? []).map((entry) =>
    bar(entry.bitstring, entry.p,
        `p=${entry.p.toFixed(4)} re=${entry.re.toFixed(4)} im=${entry.im.toFixed(4)}`,
        entry.re, entry.im)).join('');
  return `<div class="bars">${bars}</div>`;
}

function bar(label: string, p: number, title: string,
             re?: number, im?: number): string {
  const height = Math.max(1, Math.round(p * 120));
  const amp = re === undefined ? '' :
    `<div class="amp"><span class="re" style="width:${Math.abs(re!) * 50}px"></span>`
    + `<span class="im" style="width:${Math.abs(im!) * 50}px"></span></div>`;
  return `<div class="bar" data-bitstring="${label}" data-p="${p}" title="${escapeHtml(title)}">`
    + `<div class="fill" style="height:${height}px"></div>${amp}`
    + `<span class="label">${label}</span></div>`;
}

export function renderClassicalStrip(bits: number[]): string {
  const cells = bits.map((b, i) =>
    `<span class="bit ${b ? 'one' : 'zero'}" data-index="${i}">${b}</span>`).join('');
  return `<div class="classical-strip">${cells}</div>`;
}

/** Timing bucket panel from a run-to-end response, one line per bucket. */
export function renderTiming(run: RunResponse): string {
  const lines = run.timing.report.split('\n').map((line) =>
    `<div class="timing-line">${escapeHtml(line)}</div>`).join('');
  return `<div class="timing">${lines}</div>`;
}

export function renderDiagnostics(diagnostics: { line: number; message: string }[]): string {
  if (diagnostics.length === 0) return '';
  const items = diagnostics.map((d) =>
    `<li data-line="${d.line}">line ${d.line}: ${escapeHtml(d.message)}</li>`).join('');
  return `<ul class="diagnostics">${items}</ul>`;
}
