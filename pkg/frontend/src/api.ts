/**
 * Typed client for the mca analysis service.
 *
 * Every number the explorer displays comes verbatim from these responses;
 * the client performs no statistics of its own.
 */

export interface DatasetInfo {
  dataset_id: string;
  variables: string[];
  n_observations: number;
}

export interface CellRecord {
  alpha: number;
  beta: number;
  n: number;
  median_s: number;
  r: number | null;
  p: number | null;
  significant: boolean;
  omitted: boolean;
}

export interface GridParams {
  sort: string;
  x: string;
  y: string;
  r: number;
  method: "pearson" | "spearman";
  p: number;
  session?: string;
}

export interface SubpopulationResponse {
  indices: number[];
  median_s: number;
  n: number;
}

export interface ScatterPoint {
  index: number;
  x: number;
  y: number;
}

export interface ScatterResponse {
  points: ScatterPoint[];
  n: number;
}

export interface SessionResponse {
  session_id: string;
  excluded: number[];
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private url(path: string, params?: Record<string, string | number | undefined>): string {
    const query = params
      ? Object.entries(params)
          .filter(([, value]) => value !== undefined && value !== "")
          .map(([key, value]) => `${key}=${encodeURIComponent(String(value))}`)
          .join("&")
      : "";
    return `${this.baseUrl}${path}${query ? `?${query}` : ""}`;
  }

  listDatasets(): Promise<DatasetInfo[]> {
    return fetch(this.url("/datasets")).then((r) => asJson<DatasetInfo[]>(r));
  }

  uploadCsv(body: string): Promise<DatasetInfo> {
    return fetch(this.url("/datasets"), {
      method: "POST",
      headers: { "Content-Type": "text/csv" },
      body,
    }).then((r) => asJson<DatasetInfo>(r));
  }

  /** Raw response text is kept so callers can compare grids byte-for-byte. */
  async gridRaw(datasetId: string, params: GridParams): Promise<string> {
    const response = await fetch(
      this.url(`/datasets/${datasetId}/mca`, { ...params })
    );
    if (!response.ok) return asJson<never>(response);
    return response.text();
  }

  async grid(datasetId: string, params: GridParams): Promise<CellRecord[]> {
    return JSON.parse(await this.gridRaw(datasetId, params)) as CellRecord[];
  }

  subpopulation(
    datasetId: string,
    sort: string,
    alpha: number,
    beta: number,
    session?: string
  ): Promise<SubpopulationResponse> {
    return fetch(
      this.url(`/datasets/${datasetId}/subpopulation`, { sort, alpha, beta, session })
    ).then((r) => asJson<SubpopulationResponse>(r));
  }

  scatter(datasetId: string, x: string, y: string, session?: string): Promise<ScatterResponse> {
    return fetch(this.url(`/datasets/${datasetId}/scatter`, { x, y, session })).then((r) =>
      asJson<ScatterResponse>(r)
    );
  }

  createSession(datasetId: string, excluded: number[]): Promise<SessionResponse> {
    return fetch(this.url(`/datasets/${datasetId}/sessions`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ excluded }),
    }).then((r) => asJson<SessionResponse>(r));
  }

  updateSession(
    datasetId: string,
    sessionId: string,
    excluded: number[]
  ): Promise<SessionResponse> {
    return fetch(this.url(`/datasets/${datasetId}/sessions/${sessionId}`), {
      method: "PATCH",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ excluded }),
    }).then((r) => asJson<SessionResponse>(r));
  }
}
