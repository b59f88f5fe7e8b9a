// Entry point: mounts the review queue and retrain panel, owns all event
// wiring. Keyboard-first: y approve, n flip to the corrected label,
// 1/0 pick a label, enter save, s skip, r retrain.

import { Api, ApiError } from "./api.js";
import type { Label, ModelInfo } from "./api.js";
import { ReviewQueue } from "./queue.js";
import type { ReviewItem } from "./queue.js";
import { renderBanner, renderGroupTable, renderQueue, renderRetrainPanel } from "./render.js";

const api = new Api("");
const queue = new ReviewQueue(api, annotatorName());

let model: ModelInfo | null = null;
let retraining = false;
let banner: string | null = null;

const $queue = byId("queue");
const $panel = byId("retrain-panel");
const $groups = byId("group-metrics");
const $banner = byId("banner");

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function annotatorName(): string {
  const stored = localStorage.getItem("annotator");
  if (stored) return stored;
  const name = window.prompt("annotator name?")?.trim() || "anonymous";
  localStorage.setItem("annotator", name);
  return name;
}

function renderAll(): void {
  $queue.innerHTML = renderQueue(queue);
  $panel.innerHTML = renderRetrainPanel(model, retraining);
  $banner.innerHTML = renderBanner(banner);
}

async function renderGroups(): Promise<void> {
  if (model === null) {
    $groups.innerHTML = "";
    return;
  }
  try {
    const byWord = await api.getGroupedMetrics("violent_word");
    const byNetwork = await api.getGroupedMetrics("network");
    $groups.innerHTML =
      renderGroupTable("by violent word", byWord.groups) +
      renderGroupTable("by network", byNetwork.groups);
  } catch {
    $groups.innerHTML = "";
  }
}

/** Full reload; on transport failure shows the retry banner and keeps state. */
async function refresh(): Promise<void> {
  try {
    model = await api.getModel();
    await queue.refresh();
    banner = null;
  } catch (err) {
    banner = err instanceof ApiError ? `service unavailable (${err.message})` : String(err);
  }
  renderAll();
  void renderGroups();
}

async function retrainFlow(): Promise<void> {
  if (retraining) return;
  retraining = true;
  renderAll();
  const previous = model?.version ?? 0;
  try {
    model = await api.retrain();
  } catch (err) {
    if (err instanceof ApiError && err.status === 503) {
      // someone else kicked it off; poll until the version increments
      model = await pollForVersionAbove(previous);
    } else {
      banner = err instanceof ApiError ? err.message : String(err);
    }
  }
  retraining = false;
  await refresh();
}

async function pollForVersionAbove(version: number): Promise<ModelInfo | null> {
  for (let i = 0; i < 120; i++) {
    await sleep(1000);
    try {
      const m = await api.getModel();
      if (m && m.version > version) return m;
    } catch {
      // keep polling
    }
  }
  return model;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function itemFor(el: Element): ReviewItem | null {
  const card = el.closest<HTMLElement>(".card");
  if (!card) return null;
  return queue.items.find((i) => i.candidateId === card.dataset.id) ?? null;
}

async function submit(kind: "approve" | "correct", item: ReviewItem): Promise<void> {
  const ok = kind === "approve" ? await queue.approve(item) : await queue.correct(item);
  renderAll();
  if (ok && queue.items.length === 0) void refresh();
}

$queue.addEventListener("click", (ev) => {
  const target = ev.target as HTMLElement;
  const action = target.dataset.action;
  if (!action) return;
  const item = itemFor(target);
  if (!item) return;
  if (action === "label") {
    item.form.label = Number(target.dataset.label) as Label;
    renderAll();
  } else if (action === "approve" || action === "correct") {
    void submit(action, item);
  } else if (action === "skip") {
    queue.skip(item);
    renderAll();
  }
});

// inputs write through to form state so refreshes never lose typing
$queue.addEventListener("input", (ev) => {
  const target = ev.target as HTMLInputElement;
  const field = target.dataset.field;
  const item = itemFor(target);
  if (!item || !field) return;
  if (field === "subject") item.form.subject = target.value;
  else if (field === "object") item.form.object = target.value;
});

$panel.addEventListener("click", (ev) => {
  const target = ev.target as HTMLElement;
  if (target.dataset.action === "retrain") void retrainFlow();
});

$banner.addEventListener("click", (ev) => {
  const target = ev.target as HTMLElement;
  if (target.dataset.action === "retry") void refresh();
});

document.addEventListener("keydown", (ev) => {
  const inField = ev.target instanceof HTMLInputElement;
  const item = queue.current;
  if (ev.key === "Enter" && inField && item) {
    void submit("correct", item);
    return;
  }
  if (inField) return;
  if (!item) {
    if (ev.key === "r") void retrainFlow();
    return;
  }
  switch (ev.key) {
    case "y":
      void submit("approve", item);
      break;
    case "n": {
      // reject the suggestion: pre-select the opposite label for correction
      const suggested = item.suggestion?.label ?? 1;
      item.form.label = ((suggested + 1) % 2) as Label;
      renderAll();
      break;
    }
    case "1":
    case "0":
      item.form.label = Number(ev.key) as Label;
      renderAll();
      break;
    case "s":
      queue.skip(item);
      renderAll();
      break;
    case "r":
      void retrainFlow();
      break;
  }
});

void refresh();
