export type Decision = "yes" | "no" | "complicated";

/** One blinded queue item, exactly as the service serializes it. */
export type QueueItemView = {
  item_id: string;
  pmcid: string;
  criterion: string;
  criterion_description: string;
  paper_link: string;
  displayed_evidence: string | null;
  origin: string;
  pass: number;
};

export type QueueNextResponse =
  | { done: false; item: QueueItemView }
  | { done: true; progress: Progress };

export type LabelForm = {
  item_id: string;
  decision: Decision;
  curator: string;
  pass: number;
  notes: string;
  notes2: string;
};

export type LabelAck = {
  stored: boolean;
  item_id: string;
  pass: number;
  decision: Decision;
  pass2_queued: boolean;
};

export type Progress = {
  disagreement_total: number;
  disagreement_done: number;
  control_total: number;
  control_done: number;
  pass2_pending: number;
  pass2_done: number;
};

export type CriterionInfo = {
  id: string;
  description: string;
  progress: Progress;
};

export type ReportPayload = {
  criterion: string;
  format: string;
  content?: string;
  report?: unknown;
};

export class ApiError extends Error {
  status: number;
  fields: string[];

  constructor(status: number, message: string, fields: string[] = []) {
    super(message);
    this.status = status;
    this.fields = fields;
  }
}
