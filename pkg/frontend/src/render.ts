/**
 * Pure HTML-string renderers. Keeping these DOM-free makes them
 * unit-testable without a browser; main.ts injects the output.
 */

import { AgreementPair, BatchItem, Candidate } from "./api.js";
import { FlowState } from "./flow.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Record text with every candidate span wrapped; the active one marked. */
export function renderText(item: BatchItem, activeIndex: number): string {
  const spans = item.candidates
    .map((c, i) => ({ ...c, active: i === activeIndex }))
    .sort((a, b) => a.char_start - b.char_start);
  const text = item.record.text;
  let out = "";
  let pos = 0;
  for (const span of spans) {
    if (span.char_start < pos) continue; // overlapping spans: first wins
    out += escapeHtml(text.slice(pos, span.char_start));
    const cls = span.active ? "candidate active" : "candidate";
    out += `<mark class="${cls}">${escapeHtml(text.slice(span.char_start, span.char_end))}</mark>`;
    pos = span.char_end;
  }
  out += escapeHtml(text.slice(pos));
  return out;
}

export function alignmentBadge(alignment: number | null): string {
  if (alignment === null) return `<span class="badge undefined">n/a</span>`;
  const cls = alignment === 1 ? "same" : alignment === -1 ? "opposed" : "none";
  const sign = alignment > 0 ? `+${alignment}` : `${alignment}`;
  return `<span class="badge ${cls}">alignment ${sign}</span>`;
}

export function renderCandidate(candidate: Candidate): string {
  return `<span class="object-surface">${escapeHtml(candidate.surface)}</span>`;
}

export function renderState(state: FlowState): string {
  switch (state.phase) {
    case "idle":
      return `<p>Enter an annotator id to begin.</p>`;
    case "loading":
      return `<p>Loading…</p>`;
    case "retry":
      return (
        `<div class="banner retry">Network problem — your choice ` +
        `<strong>${state.pendingLabel}</strong> is kept. Press Enter to retry.</div>`
      );
    case "error":
      return `<div class="banner error">${escapeHtml(state.lastError ?? "unknown error")}</div>`;
    case "exhausted": {
      const n = state.submitted.length;
      return (
        `<div class="done"><h2>Batch complete</h2>` +
        `<p>${n} vote${n === 1 ? "" : "s"} submitted this session.</p></div>`
      );
    }
    case "annotating":
    case "submitting": {
      const item = state.item;
      if (!item) return "";
      const candidate = item.candidates[state.candidateIndex];
      const last = state.submitted[state.submitted.length - 1];
      const lastBadge = last ? alignmentBadge(last.alignment) : "";
      return (
        `<div class="item">` +
        `<p class="text">${renderText(item, state.candidateIndex)}</p>` +
        `<p class="target">Specified target: <strong>${escapeHtml(item.record.target)}</strong></p>` +
        `<p class="question">Stance toward ${renderCandidate(candidate)}?</p>` +
        `<p class="hint">[f] Favor · [a] Against · [n] None</p>` +
        (lastBadge ? `<p class="last">Last vote: ${lastBadge}</p>` : "") +
        `</div>`
      );
    }
  }
}

export function renderAgreement(pairs: AgreementPair[]): string {
  if (pairs.length === 0) {
    return `<p class="empty">No overlapping annotations yet — agreement needs two annotators with shared items.</p>`;
  }
  const rows = pairs
    .map(
      (p) =>
        `<tr><td>${escapeHtml(p.annotator_a)}</td><td>${escapeHtml(p.annotator_b)}</td>` +
        `<td>${p.shared_items}</td><td>${p.kappa.toFixed(4)}</td></tr>`,
    )
    .join("");
  return (
    `<table class="agreement"><thead>` +
    `<tr><th>Annotator A</th><th>Annotator B</th><th>Shared</th><th>Kappa</th></tr>` +
    `</thead><tbody>${rows}</tbody></table>`
  );
}
