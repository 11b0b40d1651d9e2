// Thin typed client for the rec-service JSON API. The studio talks to the
// backend exclusively through this module.

export interface HealthResponse {
  status: string;
  model: string;
  index_size: number;
  dict_size: number;
}

export interface CompleteResponse {
  colors: string[];
  updated_document: unknown;
  exemplar_id: string | null;
  timing: { provider_ms: number };
}

export interface GenerateResponse {
  palette: string[];
  exemplar_id: string | null;
  timing: { provider_ms: number };
}

export type PromptOverrides = Record<string, string | number>;

export class ServiceError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ServiceError';
  }
}

async function throwFromResponse(res: Response): Promise<never> {
  let message = `HTTP ${res.status}`;
  try {
    const body = (await res.json()) as { error?: string };
    if (body && typeof body.error === 'string') message = body.error;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ServiceError(res.status, message);
}

export class ServiceClient {
  // `base` is the endpoint prefix, default same-origin /v1. `fetchFn` is
  // injectable so tests can count or redirect requests.
  constructor(
    readonly base: string = '/v1',
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async post<T>(path: string, payload: unknown): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(`${this.base}${path}`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(payload),
      });
    } catch (err) {
      throw new ServiceError(0, `service unreachable: ${String(err)}`);
    }
    if (!res.ok) await throwFromResponse(res);
    return (await res.json()) as T;
  }

  async health(): Promise<HealthResponse> {
    let res: Response;
    try {
      res = await this.fetchFn(`${this.base}/health`);
    } catch (err) {
      throw new ServiceError(0, `service unreachable: ${String(err)}`);
    }
    if (!res.ok) await throwFromResponse(res);
    return (await res.json()) as HealthResponse;
  }

  complete(document: unknown, overrides?: PromptOverrides): Promise<CompleteResponse> {
    const payload: Record<string, unknown> = { document };
    if (overrides) payload.overrides = overrides;
    return this.post<CompleteResponse>('/complete', payload);
  }

  generate(text: string, overrides?: PromptOverrides): Promise<GenerateResponse> {
    const payload: Record<string, unknown> = { text };
    if (overrides) payload.overrides = overrides;
    return this.post<GenerateResponse>('/generate', payload);
  }
}
