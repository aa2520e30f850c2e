// Page controller: wires the script pane, circuit grid, gate palette and the
// step/run session controls together. All conversion and simulation happens
// server-side; this file only moves JSON between the API and the DOM.

import { ApiClient, ApiError, CircuitJson, StepResponse } from './api.js';
import { CircuitModel } from './model.js';
import {
  renderBars,
  renderBloch,
  renderClassicalStrip,
  renderDiagnostics,
  renderGrid,
  renderTiming,
} from './views.js';

const api = new ApiClient('');

const $ = (id: string) => document.getElementById(id) as HTMLElement;

let model = new CircuitModel(2, 0);
let canonicalScript = '';
let sessionId: string | null = null;
let stepping = false; // at most one in-flight step; clicks queue behind it
let pendingSteps = 0;

async function syncFromModel(): Promise<void> {
  try {
    const { script } = await api.circuitToScript(model.toJson());
    canonicalScript = script;
    (document.getElementById('script') as HTMLTextAreaElement).value = script;
    const { circuit } = await api.scriptToCircuit(script);
    $('grid').innerHTML = renderGrid(circuit);
    $('diagnostics').innerHTML = '';
  } catch (err) {
    showError(err);
  }
}

async function syncFromScript(): Promise<void> {
  const script = (document.getElementById('script') as HTMLTextAreaElement).value;
  try {
    const { circuit, canonical } = await api.scriptToCircuit(script);
    canonicalScript = canonical;
    model = CircuitModel.fromJson(circuit);
    $('grid').innerHTML = renderGrid(circuit);
    $('diagnostics').innerHTML = '';
  } catch (err) {
    showError(err);
  }
}

function showError(err: unknown): void {
  if (err instanceof ApiError && err.diagnostics.length > 0) {
    $('diagnostics').innerHTML = renderDiagnostics(err.diagnostics);
  } else {
    $('diagnostics').innerHTML = renderDiagnostics(
      [{ line: 0, message: String(err) }]);
  }
}

async function newSession(): Promise<void> {
  if (sessionId) {
    await api.deleteSession(sessionId).catch(() => undefined);
  }
  const seed = parseInt((document.getElementById('seed') as HTMLInputElement).value, 10) || 0;
  const info = await api.createSession(canonicalScript, seed);
  sessionId = info.id;
  pendingSteps = 0;
  ($('step') as HTMLButtonElement).removeAttribute('disabled');
  $('instruction').textContent = `session ready: ${info.instruction_count} instructions`;
}

function applyStep(step: StepResponse): void {
  $('instruction').textContent = `#${step.index}: ${step.instruction}`;
  $('bloch').innerHTML = renderBloch(step.state.bloch);
  $('bars').innerHTML = renderBars(step.state);
  $('classical').innerHTML = renderClassicalStrip(step.classical_register.bits);
  highlightColumn(step.index);
  if (step.outcome) {
    $('instruction').textContent +=
      ` → ${step.outcome.bits.join('')} (p=${step.outcome.probability.toFixed(4)})`;
  }
  if (step.finished) {
    ($('step') as HTMLButtonElement).setAttribute('disabled', 'disabled');
  }
}

function highlightColumn(instructionIndex: number): void {
  document.querySelectorAll('#grid .cell.active')
    .forEach((el) => el.classList.remove('active'));
  // instruction indices include the register declarations, which have no column
  const column = instructionIndex - 2;
  document.querySelectorAll(`#grid .cell[data-column="${column}"]`)
    .forEach((el) => el.classList.add('active'));
}

async function stepOnce(): Promise<void> {
  if (!sessionId) return;
  if (stepping) {
    pendingSteps += 1;
    return;
  }
  stepping = true;
  try {
    const step = await api.step(sessionId);
    applyStep(step);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      ($('step') as HTMLButtonElement).setAttribute('disabled', 'disabled');
    } else {
      showError(err);
    }
  } finally {
    stepping = false;
    if (pendingSteps > 0) {
      pendingSteps -= 1;
      void stepOnce();
    }
  }
}

async function runToEnd(): Promise<void> {
  if (!sessionId) await newSession();
  if (!sessionId) return;
  try {
    const result = await api.run(sessionId);
    $('bloch').innerHTML = renderBloch(result.state.bloch);
    $('bars').innerHTML = renderBars(result.state);
    $('classical').innerHTML = renderClassicalStrip(result.classical_register.bits);
    $('timing').innerHTML = renderTiming(result);
    ($('step') as HTMLButtonElement).setAttribute('disabled', 'disabled');
  } catch (err) {
    showError(err);
  }
}

async function buildPalette(): Promise<void> {
  const { gates } = await api.listGates();
  const palette = $('palette');
  for (const gate of gates) {
    const button = document.createElement('button');
    button.textContent = gate.name;
    button.title = gate.params.length > 0 ? `params: ${gate.params.join(', ')}` : '';
    button.addEventListener('click', () => {
      const targets = promptTargets(gate.arity);
      if (targets === null) return;
      const params: Record<string, string> = {};
      for (const name of gate.params) {
        const value = window.prompt(`${gate.name} ${name}=`);
        if (value === null) return;
        params[name] = value;
      }
      if (gate.name === 'Measure') {
        model.placeMeasure(targets);
      } else {
        model.placeGate(gate.name, targets, params);
      }
      void syncFromModel();
    });
    palette.appendChild(button);
  }
}

function promptTargets(arity: number | null): number[] | null {
  const hint = arity === null ? 'targets (comma separated)' : `${arity} target(s)`;
  const raw = window.prompt(hint, '0');
  if (raw === null) return null;
  return raw.split(',').map((t) => parseInt(t.trim(), 10));
}

export function init(): void {
  $('add-qubit').addEventListener('click', () => { model.addQubit(); void syncFromModel(); });
  $('add-cbit').addEventListener('click', () => { model.addCbit(); void syncFromModel(); });
  $('script').addEventListener('change', () => void syncFromScript());
  $('new-session').addEventListener('click', () => void newSession().catch(showError));
  $('step').addEventListener('click', () => void stepOnce());
  $('run').addEventListener('click', () => void runToEnd());
  void buildPalette();
  void syncFromModel();
}

if (typeof document !== 'undefined' && document.getElementById('grid')) {
  init();
}
