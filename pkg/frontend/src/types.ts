/** Payload shapes of the review service API. */

export type UrgencyLabel = "stable" | "attention" | "urgent";

export type FollowUpInterval =
  | "1_week"
  | "2_weeks"
  | "1_month"
  | "3_months"
  | "none_selected";

export interface QueueRow {
  case_id: string;
  label: UrgencyLabel | null;
  status: string;
}

export interface ChartPoint {
  x: number;
  y: number;
}

export interface ThresholdLine {
  label: string;
  y: number;
}

export interface ChartAnnotation {
  x: number;
  text: string;
}

export interface ChartSpec {
  chart_id: string;
  topic: string;
  subject: string;
  points: ChartPoint[];
  threshold_lines: ThresholdLine[];
  annotations: ChartAnnotation[];
  caption: string;
  empty: boolean;
}

export type MoveTag = "what_happened" | "why_it_matters" | "what_to_do";

export const MOVE_TAGS: MoveTag[] = [
  "what_happened",
  "why_it_matters",
  "what_to_do",
];

export interface ReviewSectionView {
  section_id: string;
  topic: string;
  moves: Record<MoveTag, string>;
  gap_statements: string[];
  chart_refs: string[];
  origin: string;
}

export interface SessionView {
  case_id: string;
  physician_id: string;
  status: "in_review" | "approved";
  medications_confirmed: boolean;
  follow_up_interval: FollowUpInterval;
}

export interface ReviewPayload {
  case_id: string;
  urgency: UrgencyLabel;
  session: SessionView | null;
  sections: ReviewSectionView[];
  charts: ChartSpec[];
}

export interface EditResult {
  seq: number;
  section_id: string;
  move_tag: string;
  after_text: string;
}

export interface ApprovedNoteView {
  case_id: string;
  physician_id: string;
  modification_rate: number;
  scope_bucket: string;
}

export interface ApiError {
  error: string;
  detail: string;
}
