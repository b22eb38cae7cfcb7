/** Dashboard state: tab navigation, run submission and polling.
 *
 * One optimization at a time: the run button reports busy from submission
 * until the job turns terminal.  Errors surface as a banner, never as a
 * crash.  Selections are always validated against the last fetched lists.
 */

import { ApiClient, RunSummary } from "./api.js";

export type Tab = "network" | "transfers" | "demand-supply" | "results";

export interface HeaderMetrics {
  siteCount: number | null;
  objective: number | null;
  gap: number | null;
  totalSavings: number | null;
}

export interface ViewState {
  tab: Tab;
  runs: RunSummary[];
  sites: string[];
  selectedRun: string | null;
  selectedSite: string | null;
  role: string;
  job: { runId: string; state: string; note: string } | null;
  metrics: HeaderMetrics;
  banner: string | null;
}

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class DashboardState {
  state: ViewState = {
    tab: "network",
    runs: [],
    sites: [],
    selectedRun: null,
    selectedSite: null,
    role: "analyst",
    job: null,
    metrics: { siteCount: null, objective: null, gap: null, totalSavings: null },
    banner: null,
  };

  private submitting = false;

  constructor(
    private api: ApiClient,
    private pollIntervalMs = 1000,
    private sleepFn: (ms: number) => Promise<void> = sleep,
  ) {}

  get busy(): boolean {
    if (this.submitting) return true;
    const job = this.state.job;
    return job !== null && job.state !== "done" && job.state !== "failed";
  }

  setTab(tab: Tab): void {
    this.state.tab = tab;
  }

  selectRun(runId: string): void {
    if (this.state.runs.some((r) => r.run_id === runId)) {
      this.state.selectedRun = runId;
    }
  }

  selectSite(site: string): void {
    if (this.state.sites.includes(site)) {
      this.state.selectedSite = site;
    }
  }

  async refreshLists(): Promise<void> {
    try {
      const [health, runs] = await Promise.all([
        this.api.health(),
        this.api.listRuns(),
      ]);
      this.state.metrics.siteCount = health.site_count;
      this.state.runs = runs.runs;
      if (this.state.selectedRun !== null &&
          !runs.runs.some((r) => r.run_id === this.state.selectedRun)) {
        this.state.selectedRun = null;
      }
      this.state.banner = null;
    } catch (err) {
      this.state.banner = `service unavailable: ${(err as Error).message}`;
    }
  }

  /** Submit a run and poll until terminal; no-op while one is in flight. */
  async runAndPoll(options?: Record<string, unknown>): Promise<ViewState> {
    if (this.busy) {
      return this.state;
    }
    this.submitting = true;
    try {
      let runId: string;
      try {
        const submitted = await this.api.submitRun(options);
        runId = submitted.run_id;
        this.state.job = { runId, state: submitted.state, note: "" };
      } catch (err) {
        this.state.banner = `submit failed: ${(err as Error).message}`;
        return this.state;
      }
      while (true) {
        await this.sleepFn(this.pollIntervalMs);
        try {
          const run = await this.api.getRun(runId);
          const state = run.state ?? "done";
          this.state.job = { runId, state, note: run.note ?? "" };
          if (state === "done" || state === "failed") {
            if (state === "done" && run.plan) {
              this.state.metrics.objective = run.plan.objective;
              this.state.metrics.gap = run.plan.gap;
              this.state.metrics.totalSavings = run.total_savings ?? null;
            }
            break;
          }
        } catch (err) {
          this.state.banner = `poll failed: ${(err as Error).message}`;
          break;
        }
      }
    } finally {
      this.submitting = false;
    }
    await this.refreshLists();
    if (this.state.job && this.state.job.state === "done") {
      this.state.selectedRun = this.state.job.runId;
    }
    return this.state;
  }
}
