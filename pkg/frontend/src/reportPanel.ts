/** Role-aware report panel: fetches the narrative for the chosen role and
 * renders the canonical text, turning **field** highlight markers into
 * emphasis.  Row counts come from the payload, not local math.
 */

import { ApiClient, ReportPayload } from "./api.js";

export function emphasize(text: string): string {
  const escaped = text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
  return escaped.replace(/\*\*([^*]+)\*\*/g, "<strong>$1</strong>");
}

export function reportHtml(report: ReportPayload): string {
  const parts: string[] = [];
  report.sections.forEach((section, k) => {
    parts.push(`<section class="report-section" data-index="${k + 1}">`);
    const lines = section.split("\n");
    let inTable = false;
    for (const line of lines) {
      if (line.startsWith("|")) {
        if (!inTable) {
          parts.push('<table class="report-table">');
          inTable = true;
        }
        if (/^\|\s*-+/.test(line)) continue;
        const cells = line
          .replace(/^\||\|$/g, "")
          .split("|")
          .map((c) => emphasize(c.trim()));
        const isHeader = ["week", "scope"].includes(
          cells[0]?.toLowerCase() ?? "");
        const tag = isHeader ? "th" : "td";
        parts.push(
          `<tr>${cells.map((c) => `<${tag}>${c}</${tag}>`).join("")}</tr>`,
        );
      } else {
        if (inTable) {
          parts.push("</table>");
          inTable = false;
        }
        if (line.trim()) parts.push(`<p>${emphasize(line)}</p>`);
      }
    }
    if (inTable) parts.push("</table>");
    parts.push("</section>");
  });
  if (report.warnings.length) {
    parts.push(
      `<aside class="report-warnings">${report.warnings
        .map((w) => `<p>${emphasize(w)}</p>`)
        .join("")}</aside>`,
    );
  }
  return parts.join("\n");
}

export function tableRowCount(html: string): number {
  return (html.match(/<td>/g) ?? []).length > 0
    ? (html.match(/<tr>(?:<td>)/g) ?? []).length
    : 0;
}

export class ReportPanel {
  report: ReportPayload | null = null;
  role = "analyst";

  constructor(private api: ApiClient) {}

  async fetch(runId: string, role: string): Promise<ReportPayload> {
    this.role = role;
    this.report = await this.api.report(runId, role);
    return this.report;
  }

  html(): string {
    return this.report ? reportHtml(this.report) : "<p>no report loaded</p>";
  }

  rows(): number {
    return this.report?.data_rows ?? 0;
  }
}
