import { ApiClient, ApiRequestError } from "./api.js";
import {
  applyConnectivityError,
  applyCorrectionAck,
  applyPredictions,
  initialState,
  moveSelection,
  retrainBusy,
  retrainFailed,
  retrainFinished,
  retrainStarted,
  setCutoff,
  setPage,
  type SessionState,
} from "./state.js";
import {
  renderBanner,
  renderPagination,
  renderRetrainPanel,
  renderStatusLine,
  renderToast,
  renderTriageTable,
} from "./render.js";
import { buildTree, renderTreeOptions, selectableCodes } from "./tree_picker.js";
import type { CorrectionRecord, HierarchyCode, Level, ModelId } from "./types.js";

const api = new ApiClient("");
let state: SessionState = initialState(
  (document.body.dataset.level as Level) || "BL1",
  (document.body.dataset.model as ModelId) || "nb",
);
let hierarchyCodes: HierarchyCode[] = [];
let validCodes = new Set<string>();
// last superseded correction per record, so undo can re-post it
const priorCorrections = new Map<string, CorrectionRecord | null>();

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function render(): void {
  el("banner").innerHTML = renderBanner(state);
  el("toast").innerHTML = renderToast(state);
  el("status").innerHTML = renderStatusLine(state);
  el("table").innerHTML = renderTriageTable(state);
  el("pager").innerHTML = renderPagination(state);
  el("retrain-panel").innerHTML = renderRetrainPanel(state);
  const picker = el("picker") as HTMLSelectElement;
  picker.innerHTML = renderTreeOptions(buildTree(hierarchyCodes));
}

async function refreshPredictions(): Promise<void> {
  try {
    const resp = await api.predictions(
      state.level, state.model, state.cutoff, state.limit, state.offset,
    );
    state = applyPredictions(state, resp);
  } catch (err) {
    state = applyConnectivityError(state, err instanceof Error ? err.message : String(err));
  }
  render();
}

async function loadHierarchy(): Promise<void> {
  try {
    const resp = await api.hierarchy(state.level);
    hierarchyCodes = resp.codes;
    validCodes = selectableCodes(resp.codes);
  } catch (err) {
    state = applyConnectivityError(state, err instanceof Error ? err.message : String(err));
  }
}

async function correctSelected(code: string): Promise<void> {
  const item = state.items[state.selectedRow];
  if (!item || !validCodes.has(code)) return; // picker prevents foreign codes
  priorCorrections.set(item.record_key, item.active_correction);
  try {
    const ack = await api.submitCorrection(item.record_key, state.level, code, "expert");
    state = applyCorrectionAck(state, ack);
  } catch (err) {
    state = { ...state, toast: err instanceof Error ? err.message : String(err) };
  }
  render();
}

async function undoSelected(): Promise<void> {
  const item = state.items[state.selectedRow];
  if (!item) return;
  const prior = priorCorrections.get(item.record_key);
  if (prior === undefined || prior === null) return; // nothing to undo to
  await correctSelected(prior.corrected_code);
}

async function triggerRetrain(): Promise<void> {
  state = retrainStarted(state);
  render();
  try {
    const resp = await api.retrain(state.level, state.model);
    state = retrainFinished(state, resp);
    render();
    await refreshPredictions(); // table re-sorts under the new snapshot
  } catch (err) {
    if (err instanceof ApiRequestError && err.status === 409) {
      state = retrainBusy(state);
    } else {
      state = retrainFailed(state, err instanceof Error ? err.message : String(err));
    }
    render();
  }
}

function wireEvents(): void {
  document.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset.action;
    if (action === "retrain") void triggerRetrain();
    if (action === "retry") void refreshPredictions();
    if (action === "prev") {
      state = setPage(state, state.offset - state.limit);
      void refreshPredictions();
    }
    if (action === "next") {
      state = setPage(state, state.offset + state.limit);
      void refreshPredictions();
    }
    const row = target.closest("tr[data-row]") as HTMLElement | null;
    if (row) {
      state = { ...state, selectedRow: Number(row.dataset.row) };
      render();
    }
  });

  document.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement || event.target instanceof HTMLSelectElement) {
      return;
    }
    if (event.key === "j" || event.key === "ArrowDown") {
      state = moveSelection(state, 1);
      render();
    }
    if (event.key === "k" || event.key === "ArrowUp") {
      state = moveSelection(state, -1);
      render();
    }
  });

  (el("cutoff") as HTMLInputElement).addEventListener("change", (event) => {
    const value = Number((event.target as HTMLInputElement).value);
    if (!Number.isNaN(value) && value >= 0 && value <= 1) {
      state = setCutoff(state, value);
      void refreshPredictions();
    }
  });

  el("apply-correction").addEventListener("click", () => {
    const picker = el("picker") as HTMLSelectElement;
    if (picker.value) void correctSelected(picker.value);
  });
  el("undo-correction").addEventListener("click", () => void undoSelected());
}

async function start(): Promise<void> {
  wireEvents();
  await loadHierarchy();
  await refreshPredictions();
}

void start();
