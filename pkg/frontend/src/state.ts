import type {
  CorrectionRecord,
  Level,
  ModelId,
  PredictionItem,
  PredictionsResponse,
  RetrainResponse,
} from "./types.js";

// All transitions are pure (state in, state out) so the loop logic is
// testable without a DOM: fetch -> transition -> render.

export interface SessionState {
  level: Level;
  model: ModelId;
  cutoff: number;
  limit: number;
  offset: number;
  total: number;
  snapshotVersion: number | null;
  items: PredictionItem[];
  selectedRow: number;
  pendingCorrections: number;
  lastRetrain: RetrainResponse | null;
  retrainInFlight: boolean;
  toast: string | null;
  banner: string | null;
}

export function initialState(level: Level = "BL1", model: ModelId = "nb"): SessionState {
  return {
    level,
    model,
    cutoff: 1.0,
    limit: 25,
    offset: 0,
    total: 0,
    snapshotVersion: null,
    items: [],
    selectedRow: 0,
    pendingCorrections: 0,
    lastRetrain: null,
    retrainInFlight: false,
    toast: null,
    banner: null,
  };
}

export function applyPredictions(state: SessionState, resp: PredictionsResponse): SessionState {
  return {
    ...state,
    items: resp.items,
    total: resp.total,
    offset: resp.offset,
    limit: resp.limit,
    snapshotVersion: resp.snapshot_version,
    selectedRow: Math.min(state.selectedRow, Math.max(resp.items.length - 1, 0)),
    banner: null,
  };
}

export function applyConnectivityError(state: SessionState, message: string): SessionState {
  return { ...state, banner: `Cannot reach the review service: ${message}` };
}

export function moveSelection(state: SessionState, delta: number): SessionState {
  if (state.items.length === 0) return state;
  const row = Math.min(Math.max(state.selectedRow + delta, 0), state.items.length - 1);
  return { ...state, selectedRow: row };
}

export function setCutoff(state: SessionState, cutoff: number): SessionState {
  return { ...state, cutoff, offset: 0 };
}

export function setPage(state: SessionState, offset: number): SessionState {
  return { ...state, offset: Math.max(0, offset) };
}

/** Newest correction wins: the acked correction replaces the row's badge. */
export function applyCorrectionAck(state: SessionState, ack: CorrectionRecord): SessionState {
  const items = state.items.map((item) =>
    item.record_key === ack.record_key ? { ...item, active_correction: ack } : item,
  );
  return { ...state, items, pendingCorrections: state.pendingCorrections + 1 };
}

export function retrainStarted(state: SessionState): SessionState {
  return { ...state, retrainInFlight: true, toast: null };
}

export function retrainFinished(state: SessionState, resp: RetrainResponse): SessionState {
  return {
    ...state,
    retrainInFlight: false,
    lastRetrain: resp,
    pendingCorrections: 0,
    snapshotVersion: resp.snapshot_version,
    toast: null,
  };
}

export function retrainBusy(state: SessionState): SessionState {
  return {
    ...state,
    retrainInFlight: false,
    toast: "A retrain is already in progress — try again when it finishes.",
  };
}

export function retrainFailed(state: SessionState, message: string): SessionState {
  return { ...state, retrainInFlight: false, toast: `Retrain failed: ${message}` };
}

/** The value an undo should re-post: the correction active before `ack`. */
export function undoTarget(
  previous: CorrectionRecord | null,
): { code: string } | null {
  return previous === null ? null : { code: previous.corrected_code };
}
