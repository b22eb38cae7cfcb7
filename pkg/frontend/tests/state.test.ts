/** Run-and-poll behavior against a scripted fake service. */

import { describe, expect, it } from "vitest";

import { ApiClient, FetchLike } from "../src/api.js";
import { DashboardState } from "../src/state.js";

function jsonResponse(body: unknown, status = 200, headers: Record<string, string> = {}) {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json", ...headers },
  });
}

function scriptedService() {
  let pollCount = 0;
  const calls: string[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push(`${init?.method ?? "GET"} ${url}`);
    if (url.endsWith("/api/health")) {
      return jsonResponse({ status: "ok", version: "0", site_count: 5 });
    }
    if (url.endsWith("/api/runs") && init?.method === "POST") {
      return jsonResponse({ run_id: "r1", state: "queued" }, 202);
    }
    if (url.endsWith("/api/runs")) {
      return jsonResponse({ runs: [{ run_id: "r1", created: "t", status: "Optimal",
        objective: 44715, gap: 0.003, total_units: 1502, total_savings: 577600 }] });
    }
    if (url.endsWith("/api/runs/r1")) {
      pollCount += 1;
      if (pollCount === 1) return jsonResponse({ run_id: "r1", state: "queued", note: "" });
      if (pollCount === 2) return jsonResponse({ run_id: "r1", state: "running", note: "nodes=10" });
      return jsonResponse({
        run_id: "r1", state: "done", status: "Optimal",
        total_savings: 577600, total_units: 1502,
        plan: { objective: 44715, gap: 0.0033, status: "Optimal" },
      });
    }
    return jsonResponse({ code: "not_found", message: "nope", details: [] }, 404);
  };
  return { fetchFn, calls, polls: () => pollCount };
}

describe("run and poll", () => {
  it("submits, polls to terminal, then refreshes the header metrics", async () => {
    const svc = scriptedService();
    const dash = new DashboardState(new ApiClient("", svc.fetchFn), 1,
                                    async () => {});
    const busyDuringRun: boolean[] = [];
    const origSleep = (dash as any).sleepFn;
    (dash as any).sleepFn = async (ms: number) => {
      busyDuringRun.push(dash.busy);
      await origSleep(ms);
    };

    const state = await dash.runAndPoll({ rel_gap: 0.01 });
    expect(svc.polls()).toBe(3);
    expect(busyDuringRun.every(Boolean)).toBe(true);     // disabled while running
    expect(dash.busy).toBe(false);
    expect(state.job?.state).toBe("done");
    expect(state.metrics.objective).toBe(44715);
    expect(state.metrics.gap).toBeCloseTo(0.0033);
    expect(state.metrics.totalSavings).toBe(577600);
    expect(state.metrics.siteCount).toBe(5);
    expect(state.selectedRun).toBe("r1");
  });

  it("ignores a second click while a run is in flight", async () => {
    const svc = scriptedService();
    const dash = new DashboardState(new ApiClient("", svc.fetchFn), 1,
                                    async () => {});
    const first = dash.runAndPoll();
    const second = await dash.runAndPoll();   // busy: must not submit again
    await first;
    const submits = svc.calls.filter((c) => c.startsWith("POST /api/runs"));
    expect(submits.length).toBe(1);
    expect(second.job?.runId).toBe("r1");
  });

  it("turns a dead service into a banner, not a crash", async () => {
    const deadFetch: FetchLike = async () => {
      throw new Error("connection refused");
    };
    const dash = new DashboardState(new ApiClient("", deadFetch), 1,
                                    async () => {});
    const state = await dash.runAndPoll();
    expect(state.banner).toContain("submit failed");
    expect(dash.busy).toBe(false);
    await dash.refreshLists();
    expect(state.banner).toContain("service unavailable");
  });

  it("validates selections against fetched lists", async () => {
    const svc = scriptedService();
    const dash = new DashboardState(new ApiClient("", svc.fetchFn), 1,
                                    async () => {});
    await dash.refreshLists();
    dash.selectRun("r1");
    expect(dash.state.selectedRun).toBe("r1");
    dash.selectRun("ghost");
    expect(dash.state.selectedRun).toBe("r1");
    dash.state.sites = ["DC1"];
    dash.selectSite("DC9");
    expect(dash.state.selectedSite).toBeNull();
    dash.selectSite("DC1");
    expect(dash.state.selectedSite).toBe("DC1");
  });
});
