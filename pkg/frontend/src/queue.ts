import { Api, ApiError } from "./api.js";
import type { AnnotationPayload, CandidateItem, Label, Suggestion } from "./api.js";

export interface FormState {
  label: Label | null;
  subject: string;
  object: string;
}

/**
 * Client-side view of one pending candidate. Mirrors the server item and is
 * never mutated except through submitted annotations; `form` and `error` are
 * the only local additions.
 */
export interface ReviewItem {
  candidateId: string;
  tokens: string[];
  centerIndex: number;
  violentWord: string;
  network: string;
  suggestion: Suggestion | null;
  form: FormState;
  error: string | null;
}

export function toReviewItem(c: CandidateItem): ReviewItem {
  return {
    candidateId: c.candidate_id,
    tokens: c.tokens,
    centerIndex: c.center_index,
    violentWord: c.violent_word,
    network: c.network,
    suggestion: c.suggestion,
    // only offered suggestions pre-select a label; low-confidence ones
    // render without a selection so they do not anchor the annotator
    form: {
      label: c.suggestion && c.suggestion.offered ? c.suggestion.label : null,
      subject: "",
      object: "",
    },
    error: null,
  };
}

/**
 * The review queue. All state changes round-trip through the service: an item
 * only leaves the queue once POST /api/annotations succeeded, and a failed
 * submit keeps the item (form intact) with the error recorded inline.
 */
export class ReviewQueue {
  items: ReviewItem[] = [];
  pendingTotal = 0;

  constructor(
    private api: Api,
    public annotator: string,
  ) {}

  get current(): ReviewItem | null {
    return this.items[0] ?? null;
  }

  /**
   * Re-fetch pending candidates. In-progress form state is carried over for
   * items that are still pending, so a background refresh (or a retry after
   * the service came back) never loses half-typed subject/object fields.
   * Throws on transport failure without touching current state.
   */
  async refresh(limit = 50): Promise<void> {
    const page = await this.api.getCandidates("pending", limit);
    const kept = new Map(this.items.map((i) => [i.candidateId, i.form]));
    this.items = page.candidates.map((c) => {
      const item = toReviewItem(c);
      const form = kept.get(item.candidateId);
      if (form) {
        // an explicit choice survives the refresh, but a never-touched
        // label must not mask a newly offered pre-selection
        item.form = {
          label: form.label !== null ? form.label : item.form.label,
          subject: form.subject,
          object: form.object,
        };
      }
      return item;
    });
    this.pendingTotal = page.pending_total;
  }

  /** One-click approve: posts the suggested label with source model_approved. */
  approve(item: ReviewItem): Promise<boolean> {
    const s = item.suggestion;
    if (!s || !s.offered) {
      item.error = "no offered suggestion to approve";
      return Promise.resolve(false);
    }
    return this.submit(item, {
      candidate_id: item.candidateId,
      label: s.label,
      annotator: this.annotator,
      source: "model_approved",
    });
  }

  /** Annotator-edited label (and optional subject/object): source human. */
  correct(item: ReviewItem): Promise<boolean> {
    if (item.form.label === null) {
      item.error = "pick a label first";
      return Promise.resolve(false);
    }
    return this.submit(item, {
      candidate_id: item.candidateId,
      label: item.form.label,
      annotator: this.annotator,
      subject: item.form.subject.trim() || null,
      object: item.form.object.trim() || null,
      source: "human",
    });
  }

  /** Push an item to the back of the queue without annotating. */
  skip(item: ReviewItem): void {
    const i = this.items.indexOf(item);
    if (i >= 0) {
      this.items.splice(i, 1);
      this.items.push(item);
    }
  }

  private async submit(item: ReviewItem, payload: AnnotationPayload): Promise<boolean> {
    try {
      await this.api.postAnnotation(payload);
    } catch (err) {
      item.error = err instanceof ApiError ? err.message : String(err);
      return false;
    }
    item.error = null;
    this.items = this.items.filter((i) => i.candidateId !== item.candidateId);
    this.pendingTotal = Math.max(0, this.pendingTotal - 1);
    return true;
  }
}
