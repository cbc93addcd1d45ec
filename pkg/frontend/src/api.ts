import type {
  CorrectionRecord,
  HierarchyResponse,
  Level,
  ModelId,
  PredictionsResponse,
  RetrainResponse,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(res: Response): Promise<ApiRequestError> {
  try {
    const body = (await res.json()) as { code?: string; message?: string };
    return new ApiRequestError(res.status, body.code ?? "error", body.message ?? res.statusText);
  } catch {
    return new ApiRequestError(res.status, "error", res.statusText);
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async get<T>(path: string, params: Record<string, string | number>): Promise<T> {
    const query = new URLSearchParams(
      Object.entries(params).map(([k, v]) => [k, String(v)]),
    );
    const res = await fetch(`${this.baseUrl}${path}?${query}`);
    if (!res.ok) throw await parseError(res);
    return res.json() as Promise<T>;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw await parseError(res);
    return res.json() as Promise<T>;
  }

  health(): Promise<{ status: string }> {
    return this.get("/api/health", {});
  }

  hierarchy(level: Level): Promise<HierarchyResponse> {
    return this.get("/api/hierarchy", { level });
  }

  predictions(
    level: Level,
    model: ModelId,
    maxConfidence: number,
    limit: number,
    offset: number,
  ): Promise<PredictionsResponse> {
    return this.get("/api/predictions", {
      level,
      model,
      max_confidence: maxConfidence,
      limit,
      offset,
    });
  }

  submitCorrection(
    recordKey: string,
    level: Level,
    correctedCode: string,
    annotator: string,
  ): Promise<CorrectionRecord> {
    return this.post("/api/corrections", {
      record_key: recordKey,
      level,
      corrected_code: correctedCode,
      annotator,
    });
  }

  retrain(level: Level, model: ModelId, v?: number): Promise<RetrainResponse> {
    return this.post("/api/retrain", { level, model, v: v ?? null });
  }
}
