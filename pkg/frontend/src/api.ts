/** Typed client for the consultation service HTTP API. */

export interface RecommendationEntry {
  family_id: number;
  name: string;
  probability: number;
}

export interface ConsultResponse {
  consultation_id: string;
  model_version: number;
  recommendations: RecommendationEntry[];
  dominant_colors: { class: string; color: number[] }[];
  warning: string | null;
  render_count: number;
  renders_b64: string[];
}

export interface Attributes {
  room_type: string;
  room_size: string;
  room_style: string;
  room_mood: string;
  room_tone: string;
  color_preferences: number[];
  paint_preference: string;
}

export interface PaletteEntry {
  id: number;
  name: string;
  representative: number[];
}

export interface ModelInfo {
  model_version: number | null;
  train_config: Record<string, unknown>;
  palette: PaletteEntry[];
}

export interface FeedbackAck {
  status: string;
  outcome: string;
  dataset_rows: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${(err as Error).message}`);
    }
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string; model_version: number | null }> {
    return this.request("/health");
  }

  modelInfo(): Promise<ModelInfo> {
    return this.request("/model");
  }

  consult(
    imageB64: string,
    attributes: Attributes,
    detections?: unknown,
    detectionsEndpoint?: string,
  ): Promise<ConsultResponse> {
    const body: Record<string, unknown> = { image_b64: imageB64, attributes };
    if (detections !== undefined) body.detections = detections;
    if (detectionsEndpoint) body.detections_endpoint = detectionsEndpoint;
    return this.post("/consult", body);
  }

  feedback(consultationId: string, outcome: "accepted" | "rejected", familyId?: number): Promise<FeedbackAck> {
    const body: Record<string, unknown> = { consultation_id: consultationId, outcome };
    if (familyId !== undefined) body.family_id = familyId;
    return this.post("/feedback", body);
  }

  retrain(seed?: number): Promise<{ model_version: number }> {
    return this.post("/retrain", seed === undefined ? {} : { seed });
  }
}

async function blobBytes(file: Blob): Promise<Uint8Array> {
  if (typeof file.arrayBuffer === "function") {
    return new Uint8Array(await file.arrayBuffer());
  }
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(new Uint8Array(reader.result as ArrayBuffer));
    reader.onerror = () => reject(reader.error);
    reader.readAsArrayBuffer(file);
  });
}

/** Encode a selected file as base64 for the consult request body. */
export async function fileToBase64(file: Blob): Promise<string> {
  const bytes = await blobBytes(file);
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(binary);
}

/** Display form used everywhere probabilities are shown: one decimal percent. */
export function formatProbability(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}
