// Shapes of the review-service JSON API. Field names mirror the wire
// format exactly; the UI must only ever display values from these.

export type Level = "BL0" | "BL1" | "BL2";
export type ModelId = "nb" | "rf";

export interface HierarchyCode {
  code: string;
  label: string | null;
  parent: string | null;
  depth: number;
}

export interface HierarchyResponse {
  level: Level;
  codes: HierarchyCode[];
}

export interface CorrectionRecord {
  sequence: number;
  record_key: string;
  level: Level;
  corrected_code: string;
  annotator: string;
  timestamp: number;
}

export interface PredictionItem {
  record_key: string;
  description: string;
  predicted_code: string;
  predicted_label: string | null;
  path: string[];
  confidence: number;
  model_id: string;
  active_correction: CorrectionRecord | null;
}

export interface PredictionsResponse {
  snapshot_version: number;
  total: number;
  limit: number;
  offset: number;
  items: PredictionItem[];
}

export interface RetrainResponse {
  level: Level;
  model: ModelId;
  v: number;
  before_macro_f1: number;
  after_macro_f1: number;
  snapshot_version: number;
  n_corrections: number;
}

export interface ApiError {
  code: string;
  message: string;
}
