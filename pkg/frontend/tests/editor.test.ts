/** Config editor: local checks, server violations, version badge. */

import { describe, expect, it } from "vitest";

import { ApiClient, FetchLike } from "../src/api.js";
import { ConfigEditor, localViolations } from "../src/configEditor.js";

const baseDoc = {
  sites: ["A", "B"],
  items: ["IT"],
  horizon: [1, 2],
  frozen_weeks: 0,
  parameters: { min_ship_qty: 5 },
};

function editorService(opts: { rejectWith?: string[] } = {}) {
  let version = 1;
  let active = JSON.stringify(baseDoc);
  const fetchFn: FetchLike = async (url, init) => {
    if (url.endsWith("/api/config") && (init?.method ?? "GET") === "GET") {
      return new Response(active, {
        status: 200,
        headers: { "X-Config-Version": String(version) },
      });
    }
    if (url.endsWith("/api/config") && init?.method === "PUT") {
      if (opts.rejectWith) {
        return new Response(
          JSON.stringify({ code: "invalid_config", message: "rejected",
                           details: opts.rejectWith }),
          { status: 422 });
      }
      active = String(init.body);
      version += 1;
      return new Response(JSON.stringify({ version, advisories: [] }),
                          { status: 200 });
    }
    return new Response("{}", { status: 404 });
  };
  return { fetchFn, activeText: () => active };
}

describe("local validation", () => {
  it("flags negative minimum quantity before the server sees it", () => {
    const doc = { ...baseDoc, parameters: { min_ship_qty: -1 } };
    const problems = localViolations(JSON.stringify(doc));
    expect(problems.some((p) => p.includes("min_ship_qty"))).toBe(true);
  });

  it("flags broken JSON", () => {
    expect(localViolations("{nope")[0]).toContain("not valid JSON");
  });
});

describe("editor round trip", () => {
  it("loads, edits, saves, and bumps the version badge", async () => {
    const svc = editorService();
    const editor = new ConfigEditor(new ApiClient("", svc.fetchFn));
    await editor.load();
    expect(editor.state.version).toBe(1);

    const updated = { ...baseDoc, frozen_weeks: 1 };
    editor.edit(JSON.stringify(updated));
    expect(editor.saveBlocked).toBe(false);
    await editor.save();
    expect(editor.state.version).toBe(2);
    expect(editor.state.violations).toEqual([]);
    expect(JSON.parse(svc.activeText()).frozen_weeks).toBe(1);
  });

  it("blocks saving while local violations exist", async () => {
    const svc = editorService();
    const editor = new ConfigEditor(new ApiClient("", svc.fetchFn));
    await editor.load();
    editor.edit(JSON.stringify({ ...baseDoc,
                                 parameters: { min_ship_qty: -3 } }));
    expect(editor.saveBlocked).toBe(true);
    await editor.save();                       // must be a no-op
    expect(editor.state.version).toBe(1);
  });

  it("shows server violations at their field paths and keeps the version", async () => {
    const svc = editorService({
      rejectWith: ["parameters.demand.DC9: unknown site DC9"],
    });
    const editor = new ConfigEditor(new ApiClient("", svc.fetchFn));
    await editor.load();
    editor.edit(JSON.stringify(baseDoc));
    await editor.save();
    expect(editor.state.violations).toEqual(
      ["parameters.demand.DC9: unknown site DC9"]);
    expect(editor.state.version).toBe(1);
  });
});
