/** Typed client for the rebalance REST API. */

export interface HealthPayload {
  status: string;
  version: string;
  site_count: number;
}

export interface LanePayload {
  src: string;
  dst: string;
  total: number;
  weekly: Record<string, number>;
}

export interface TransfersPayload {
  run_id: string;
  lanes: LanePayload[];
}

export interface SeriesPayload {
  site: string;
  weeks: Array<number | string>;
  demand: number[];
  receipts: number[];
  transfer_in: number[];
  transfer_out: number[];
  inventory: number[];
  sim_inv: number[];
  wos: number[];
  sim_wos: number[];
  inv_cost: number[];
  sim_inv_cost: number[];
}

export interface RunSummary {
  run_id: string;
  created: string;
  status: string;
  objective: number | null;
  gap: number | null;
  total_units: number;
  total_savings: number;
}

export interface RunPayload {
  run_id: string;
  state?: string;
  note?: string;
  status?: string;
  total_units?: number;
  total_savings?: number;
  config?: unknown;
  plan?: { objective: number; gap: number; status: string };
}

export interface KpiRow {
  scope: string;
  week: number | string;
  inventory: number;
  sim_inv: number;
  wos: number;
  sim_wos: number;
  inv_cost: number;
  sim_inv_cost: number;
  demand: number;
  receipts: number;
}

export interface ReportPayload {
  run_id: string;
  role: string;
  mode: string;
  sections: string[];
  text: string;
  warnings: string[];
  data_rows: number;
}

export interface ErrorPayload {
  code: string;
  message: string;
  details: string[];
}

export class ApiError extends Error {
  constructor(public status: number, public payload: ErrorPayload) {
    super(payload.message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let payload: ErrorPayload;
      try {
        payload = (await resp.json()) as ErrorPayload;
      } catch {
        payload = { code: "http_error", message: resp.statusText, details: [] };
      }
      throw new ApiError(resp.status, payload);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<HealthPayload> {
    return this.request("/api/health");
  }

  async getConfigText(): Promise<{ text: string; version: number }> {
    const resp = await this.fetchFn(this.baseUrl + "/api/config");
    if (!resp.ok) {
      throw new ApiError(resp.status, (await resp.json()) as ErrorPayload);
    }
    const version = Number(resp.headers.get("X-Config-Version") ?? "0");
    return { text: await resp.text(), version };
  }

  putConfig(text: string): Promise<{ version: number; advisories: string[] }> {
    return this.request("/api/config", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: text,
    });
  }

  submitRun(options?: Record<string, unknown>): Promise<{ run_id: string; state: string }> {
    return this.request("/api/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(options ? { options } : {}),
    });
  }

  listRuns(): Promise<{ runs: RunSummary[] }> {
    return this.request("/api/runs");
  }

  getRun(runId: string): Promise<RunPayload> {
    return this.request(`/api/runs/${runId}`);
  }

  transfers(runId: string): Promise<TransfersPayload> {
    return this.request(`/api/runs/${runId}/transfers`);
  }

  series(runId: string, site: string): Promise<SeriesPayload> {
    return this.request(`/api/runs/${runId}/series/${site}`);
  }

  kpis(runId: string, level: string): Promise<{ rows: KpiRow[] }> {
    return this.request(`/api/runs/${runId}/kpis?level=${level}`);
  }

  report(runId: string, role: string): Promise<ReportPayload> {
    return this.request(`/api/runs/${runId}/report`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ role }),
    });
  }
}
