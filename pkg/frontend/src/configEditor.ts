/** Config editor: round-trips the active document through GET/PUT with
 * inline violation display and a version badge.  A couple of cheap local
 * checks catch obvious mistakes before the server sees them; the server
 * remains the authority.
 */

import { ApiClient, ApiError } from "./api.js";

export interface EditorState {
  text: string;
  version: number;
  violations: string[];
  advisories: string[];
  dirty: boolean;
}

export function localViolations(text: string): string[] {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    return [`$: not valid JSON (${(err as Error).message})`];
  }
  const problems: string[] = [];
  const params = doc?.parameters ?? {};
  if (typeof params.min_ship_qty === "number" && params.min_ship_qty < 0) {
    problems.push("parameters.min_ship_qty: must be >= 0");
  }
  if (!Array.isArray(doc?.sites) || doc.sites.length === 0) {
    problems.push("sites: must be a non-empty list");
  }
  if (!Array.isArray(doc?.horizon) || doc.horizon.length === 0) {
    problems.push("horizon: must be a non-empty list");
  }
  if (typeof doc?.frozen_weeks === "number" && doc.frozen_weeks < 0) {
    problems.push("frozen_weeks: must be >= 0");
  }
  return problems;
}

export class ConfigEditor {
  state: EditorState = {
    text: "",
    version: 0,
    violations: [],
    advisories: [],
    dirty: false,
  };

  constructor(private api: ApiClient) {}

  async load(): Promise<EditorState> {
    const { text, version } = await this.api.getConfigText();
    this.state = { text, version, violations: [], advisories: [], dirty: false };
    return this.state;
  }

  edit(text: string): EditorState {
    this.state.text = text;
    this.state.dirty = true;
    this.state.violations = localViolations(text);
    return this.state;
  }

  get saveBlocked(): boolean {
    return this.state.violations.length > 0;
  }

  async save(): Promise<EditorState> {
    if (this.saveBlocked) {
      return this.state;
    }
    try {
      const result = await this.api.putConfig(this.state.text);
      this.state.version = result.version;
      this.state.advisories = result.advisories;
      this.state.violations = [];
      this.state.dirty = false;
    } catch (err) {
      if (err instanceof ApiError) {
        this.state.violations = err.payload.details.length
          ? err.payload.details
          : [err.payload.message];
      } else {
        this.state.violations = [(err as Error).message];
      }
    }
    return this.state;
  }
}
