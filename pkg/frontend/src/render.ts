// HTML-string renderers. Kept free of DOM APIs so they unit-test in plain
// node; main.ts owns mounting and event wiring.

import type { Metrics, ModelInfo, Suggestion } from "./api.js";
import type { ReviewItem, ReviewQueue } from "./queue.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** 0.9731 -> "97%" */
export function formatConfidence(confidence: number): string {
  return `${Math.round(confidence * 100)}%`;
}

export function formatMetric(value: number | null): string {
  return value === null ? "n/a" : value.toFixed(3);
}

export function labelName(label: 0 | 1): string {
  return label === 1 ? "metaphor" : "literal";
}

/**
 * The 11-token window as inline text: padding slots dropped, center token
 * wrapped in <mark>.
 */
export function renderWindow(tokens: string[], centerIndex: number): string {
  const parts: string[] = [];
  tokens.forEach((tok, i) => {
    if (tok === "") return;
    parts.push(i === centerIndex ? `<mark>${escapeHtml(tok)}</mark>` : escapeHtml(tok));
  });
  return parts.join(" ");
}

/** Empty string on cold start: no model, no badge. */
export function renderBadge(s: Suggestion | null): string {
  if (s === null) return "";
  const cls = s.offered ? "badge offered" : "badge";
  return (
    `<span class="${cls}" title="model v${s.model_version}">` +
    `${labelName(s.label)} ${formatConfidence(s.confidence)}</span>`
  );
}

export function renderCard(item: ReviewItem, isCurrent: boolean): string {
  const id = escapeHtml(item.candidateId);
  const pressed = (label: 0 | 1) => (item.form.label === label ? "true" : "false");
  const canApprove = item.suggestion !== null && item.suggestion.offered;
  const error = item.error
    ? `<p class="error" role="alert">${escapeHtml(item.error)}</p>`
    : "";
  return `<article class="card${isCurrent ? " current" : ""}" data-id="${id}">
  <header>
    <span class="meta">${escapeHtml(item.network)} &middot; ${escapeHtml(item.violentWord)}</span>
    ${renderBadge(item.suggestion)}
  </header>
  <p class="window">${renderWindow(item.tokens, item.centerIndex)}</p>
  <div class="form">
    <button data-action="label" data-label="1" aria-pressed="${pressed(1)}">metaphor</button>
    <button data-action="label" data-label="0" aria-pressed="${pressed(0)}">literal</button>
    <input data-field="subject" placeholder="subject" value="${escapeHtml(item.form.subject)}">
    <input data-field="object" placeholder="object" value="${escapeHtml(item.form.object)}">
    <button data-action="approve" ${canApprove ? "" : "disabled "}title="y">approve</button>
    <button data-action="correct" title="enter">save</button>
    <button data-action="skip" title="s">skip</button>
  </div>
  ${error}
</article>`;
}

export function renderQueue(queue: ReviewQueue): string {
  if (queue.items.length === 0) {
    return `<p class="empty">queue is empty (${queue.pendingTotal} pending on server)</p>`;
  }
  const cards = queue.items.map((item, i) => renderCard(item, i === 0));
  return `<p class="count">${queue.pendingTotal} pending</p>\n${cards.join("\n")}`;
}

export function renderRetrainPanel(model: ModelInfo | null, busy: boolean): string {
  const button = `<button data-action="retrain" ${busy ? "disabled " : ""}title="r">retrain</button>`;
  const status = busy ? `<span class="status">retraining&hellip;</span>` : "";
  if (model === null) {
    return `<p class="model">no trained model yet</p>\n${button}${status}`;
  }
  const m = model.metrics;
  return `<p class="model">model <strong>v${model.version}</strong>
  &middot; trained on ${model.training_size}
  &middot; auc ${formatMetric(m.auc)}
  &middot; acc ${formatMetric(m.accuracy)}</p>
${button}${status}`;
}

export function renderGroupTable(title: string, groups: Record<string, Metrics>): string {
  const keys = Object.keys(groups).sort();
  const rows = keys.map((key) => {
    const m = groups[key];
    return (
      `<tr><td>${escapeHtml(key)}</td><td>${formatMetric(m.auc)}</td>` +
      `<td>${formatMetric(m.sensitivity)}</td><td>${formatMetric(m.specificity)}</td>` +
      `<td>${formatMetric(m.accuracy)}</td></tr>`
    );
  });
  return `<table class="groups">
<caption>${escapeHtml(title)}</caption>
<thead><tr><th></th><th>auc</th><th>sens</th><th>spec</th><th>acc</th></tr></thead>
<tbody>${rows.join("")}</tbody>
</table>`;
}

/** Dismissable banner for transport failures; empty string when clear. */
export function renderBanner(message: string | null): string {
  if (message === null) return "";
  return (
    `<div class="banner" role="alert">${escapeHtml(message)} ` +
    `<button data-action="retry">retry</button></div>`
  );
}
