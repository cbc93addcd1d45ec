import type { SessionState } from "./state.js";
import { escapeHtml } from "./tree_picker.js";

// Render functions are pure string builders over the session state; the
// bootstrap code swaps them into the DOM wholesale. Every number shown
// comes straight from an API response held in the state.

const pct = (value: number): string => `${(value * 100).toFixed(1)}%`;

export function renderBanner(state: SessionState): string {
  if (state.banner === null) return "";
  return `<div class="banner" role="alert">${escapeHtml(state.banner)}
    <button data-action="retry">Retry</button></div>`;
}

export function renderToast(state: SessionState): string {
  if (state.toast === null) return "";
  return `<div class="toast" role="status">${escapeHtml(state.toast)}</div>`;
}

export function renderTriageTable(state: SessionState): string {
  if (state.items.length === 0) {
    return `<div class="empty">No predictions at or below confidence ${pct(state.cutoff)}.</div>`;
  }
  const rows = state.items
    .map((item, i) => {
      const selected = i === state.selectedRow ? ' class="selected"' : "";
      const badge = item.active_correction
        ? `<span class="badge">corrected: ${item.active_correction.corrected_code}</span>`
        : "";
      const path = item.path.join(" › ");
      const label = item.predicted_label ? ` (${escapeHtml(item.predicted_label)})` : "";
      return `<tr data-row="${i}"${selected}>
        <td class="mono">${escapeHtml(item.record_key)}</td>
        <td>${escapeHtml(item.description)}</td>
        <td class="mono" title="${escapeHtml(path)}">${item.predicted_code}${label}</td>
        <td class="num">${pct(item.confidence)}</td>
        <td>${badge}</td>
      </tr>`;
    })
    .join("");
  return `<table class="grid">
    <thead><tr><th>Record</th><th>Description</th><th>Predicted</th><th>Confidence</th><th></th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

export function renderPagination(state: SessionState): string {
  const from = state.total === 0 ? 0 : state.offset + 1;
  const to = Math.min(state.offset + state.items.length, state.total);
  return `<div class="pager">
    <button data-action="prev" ${state.offset === 0 ? "disabled" : ""}>‹ prev</button>
    <span>${from}–${to} of ${state.total}</span>
    <button data-action="next" ${to >= state.total ? "disabled" : ""}>next ›</button>
  </div>`;
}

export function renderRetrainPanel(state: SessionState): string {
  const busyAttr = state.retrainInFlight ? "disabled" : "";
  const busyLabel = state.retrainInFlight ? "Retraining…" : "Retrain";
  let summary = "";
  if (state.lastRetrain !== null) {
    const r = state.lastRetrain;
    const delta = r.after_macro_f1 - r.before_macro_f1;
    summary = `<div class="retrain-summary">
      <span>macro-F1 before <b>${r.before_macro_f1.toFixed(4)}</b></span>
      <span>after <b>${r.after_macro_f1.toFixed(4)}</b></span>
      <span class="${delta >= 0 ? "up" : "down"}">Δ ${delta >= 0 ? "+" : ""}${delta.toFixed(4)}</span>
      <span class="muted">v=${r.v}, ${r.n_corrections} correction(s), snapshot ${r.snapshot_version}</span>
    </div>`;
  }
  return `<div class="retrain">
    <button data-action="retrain" ${busyAttr}>${busyLabel}</button>
    <span class="muted">${state.pendingCorrections} pending correction(s)</span>
    ${summary}
  </div>`;
}

export function renderStatusLine(state: SessionState): string {
  const version = state.snapshotVersion === null ? "–" : String(state.snapshotVersion);
  return `<div class="status muted">level ${state.level} · model ${state.model} · snapshot ${version} · cutoff ${pct(state.cutoff)}</div>`;
}
