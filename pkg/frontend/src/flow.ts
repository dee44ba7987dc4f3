/**
 * Annotation flow state machine.
 *
 * One candidate object is presented at a time; the annotator picks
 * Favor/Against/None, the vote is submitted, and the server's echoed
 * alignment is kept for display. Network failures surface a retry state
 * that preserves the in-progress choice; a DuplicateVote answer is
 * treated as already-saved (e.g. a double click) and the flow advances.
 */

import { AnnotationApi, ApiError, BatchItem, Label, VoteResponse } from "./api.js";

export type FlowPhase =
  | "idle"
  | "loading"
  | "annotating"
  | "submitting"
  | "retry"
  | "exhausted"
  | "error";

export interface SubmittedVote {
  recordId: string;
  objectSurface: string;
  label: Label;
  alignment: number | null;
}

export interface FlowState {
  phase: FlowPhase;
  sessionId: string | null;
  item: BatchItem | null;
  /** index of the candidate currently awaiting a label */
  candidateIndex: number;
  /** choice preserved across retries */
  pendingLabel: Label | null;
  lastError: string | null;
  submitted: SubmittedVote[];
}

export class AnnotationFlow {
  /** candidates the server confirmed as already voted ("record|surface") */
  private acknowledged = new Set<string>();

  private state: FlowState = {
    phase: "idle",
    sessionId: null,
    item: null,
    candidateIndex: 0,
    pendingLabel: null,
    lastError: null,
    submitted: [],
  };

  constructor(
    private readonly api: AnnotationApi,
    private readonly onChange: (state: FlowState) => void = () => {},
  ) {}

  getState(): FlowState {
    return this.state;
  }

  private update(patch: Partial<FlowState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  async start(annotatorId: string): Promise<void> {
    this.update({ phase: "loading" });
    try {
      const session = await this.api.createSession(annotatorId);
      this.update({ sessionId: session.session_id });
      await this.advance();
    } catch (err) {
      this.update({ phase: "error", lastError: String(err) });
    }
  }

  /** Fetch the next item with an unlabeled candidate, or finish. */
  private async advance(): Promise<void> {
    if (!this.state.sessionId) throw new Error("flow not started");
    this.update({ phase: "loading", pendingLabel: null });
    let next;
    try {
      next = await this.api.nextItem(this.state.sessionId);
    } catch (err) {
      this.update({ phase: "error", lastError: String(err) });
      return;
    }
    if (next.exhausted || !next.item) {
      this.update({ phase: "exhausted", item: null });
      return;
    }
    const recordId = next.item.record.id;
    const done = new Set(
      this.state.submitted.filter((v) => v.recordId === recordId).map((v) => v.objectSurface),
    );
    const index = next.item.candidates.findIndex(
      (c) => !done.has(c.surface) && !this.acknowledged.has(`${recordId}|${c.surface}`),
    );
    this.update({
      phase: "annotating",
      item: next.item,
      candidateIndex: index < 0 ? 0 : index,
    });
  }

  currentCandidate() {
    const { item, candidateIndex } = this.state;
    return item ? item.candidates[candidateIndex] : null;
  }

  /** Submit a label for the current candidate (also the retry entry point). */
  async choose(label: Label): Promise<void> {
    const { item, sessionId } = this.state;
    const candidate = this.currentCandidate();
    if (!item || !sessionId || !candidate || this.state.phase === "submitting") {
      return;
    }
    this.update({ phase: "submitting", pendingLabel: label });
    let vote: VoteResponse;
    try {
      vote = await this.api.submitVote(sessionId, item.record.id, candidate.surface, label);
    } catch (err) {
      if (err instanceof ApiError && err.code === "DuplicateVote") {
        // double submit: the server already has this vote, just advance
        this.acknowledged.add(`${item.record.id}|${candidate.surface}`);
        await this.advance();
        return;
      }
      if (err instanceof ApiError) {
        this.update({ phase: "error", lastError: `${err.code}: ${err.message}` });
        return;
      }
      // network failure: keep the choice for one-keystroke retry
      this.update({ phase: "retry", lastError: String(err) });
      return;
    }
    this.update({
      submitted: [
        ...this.state.submitted,
        {
          recordId: vote.record_id,
          objectSurface: vote.object_surface,
          label: vote.label,
          alignment: vote.alignment,
        },
      ],
    });
    await this.advance();
  }

  /** Re-submit the preserved choice after a network failure. */
  async retry(): Promise<void> {
    const label = this.state.pendingLabel;
    if (this.state.phase === "retry" && label) {
      await this.choose(label);
    }
  }
}
