/** Browser wiring: tabs, run button, charts, editor, report panel. */

import { ApiClient } from "./api.js";
import { ConfigEditor } from "./configEditor.js";
import { reportHtml } from "./reportPanel.js";
import { seriesChartView, seriesSvg } from "./seriesChart.js";
import { DashboardState, Tab } from "./state.js";
import { flowSvg, transferFlowView } from "./transferFlow.js";

const api = new ApiClient("");
const dash = new DashboardState(api);
const editor = new ConfigEditor(api);

const $ = (id: string) => document.getElementById(id) as HTMLElement;

function fmt(v: number | null, digits = 0): string {
  return v === null ? "-" : v.toLocaleString(undefined, {
    maximumFractionDigits: digits,
  });
}

function renderHeader(): void {
  const m = dash.state.metrics;
  $("metric-sites").textContent = fmt(m.siteCount);
  $("metric-objective").textContent = fmt(m.objective);
  $("metric-gap").textContent =
    m.gap === null ? "-" : `${(m.gap * 100).toFixed(2)}%`;
  $("metric-savings").textContent = fmt(m.totalSavings);
  const banner = $("banner");
  banner.textContent = dash.state.banner ?? "";
  banner.style.display = dash.state.banner ? "block" : "none";
  ($("run-button") as HTMLButtonElement).disabled = dash.busy;
  $("job-state").textContent = dash.state.job
    ? `${dash.state.job.state} ${dash.state.job.note}`
    : "idle";
}

async function renderTransfers(): Promise<void> {
  const runId = dash.state.selectedRun;
  if (!runId) return;
  const [config, transfers] = await Promise.all([
    api.getConfigText(),
    api.transfers(runId),
  ]);
  const sites: string[] = JSON.parse(config.text).sites;
  $("flow-canvas").innerHTML = flowSvg(transferFlowView(sites, transfers));
}

async function renderSeries(): Promise<void> {
  const runId = dash.state.selectedRun;
  const site = (document.getElementById("site-select") as HTMLSelectElement)
    ?.value;
  if (!runId || !site) {
    $("series-canvas").innerHTML = "<p>pick a run and a site</p>";
    return;
  }
  const payload = await api.series(runId, site);
  $("series-canvas").innerHTML = seriesSvg(seriesChartView(payload));
}

async function renderReport(): Promise<void> {
  const runId = dash.state.selectedRun;
  if (!runId) return;
  const role = (document.getElementById("role-select") as HTMLSelectElement)
    .value;
  const report = await api.report(runId, role);
  $("report-body").innerHTML = reportHtml(report);
}

async function refreshSites(): Promise<void> {
  const config = await api.getConfigText();
  const sites: string[] = JSON.parse(config.text).sites;
  dash.state.sites = sites;
  const select = document.getElementById("site-select") as HTMLSelectElement;
  select.innerHTML = sites
    .map((s) => `<option value="${s}">${s}</option>`)
    .join("");
}

function showTab(tab: Tab): void {
  dash.setTab(tab);
  document.querySelectorAll<HTMLElement>(".tab-panel").forEach((el) => {
    el.style.display = el.dataset.tab === tab ? "block" : "none";
  });
  if (tab === "transfers") void renderTransfers();
  if (tab === "demand-supply") void renderSeries();
  if (tab === "results") void renderReport();
}

async function boot(): Promise<void> {
  await dash.refreshLists();
  await refreshSites();
  const editorState = await editor.load();
  const textarea = $("config-text") as HTMLTextAreaElement;
  textarea.value = editorState.text;
  $("config-version").textContent = `v${editorState.version}`;
  renderHeader();

  $("run-button").addEventListener("click", () => {
    // desk-scale defaults: stop at a 1% gap, two minutes tops
    void dash.runAndPoll({ rel_gap: 0.01, time_limit: 120 }).then(() => {
      renderHeader();
      void renderTransfers();
    });
    renderHeader();
  });
  textarea.addEventListener("input", () => {
    editor.edit(textarea.value);
    $("config-violations").innerHTML = editor.state.violations
      .map((v) => `<li>${v}</li>`)
      .join("");
    ($("config-save") as HTMLButtonElement).disabled = editor.saveBlocked;
  });
  $("config-save").addEventListener("click", () => {
    void editor.save().then((state) => {
      $("config-version").textContent = `v${state.version}`;
      $("config-violations").innerHTML = state.violations
        .map((v) => `<li>${v}</li>`)
        .join("");
    });
  });
  $("role-select").addEventListener("change", () => void renderReport());
  $("site-select").addEventListener("change", () => void renderSeries());
  document.querySelectorAll<HTMLElement>(".tab-button").forEach((btn) => {
    btn.addEventListener("click", () => showTab(btn.dataset.tab as Tab));
  });
  showTab("network");
  setInterval(() => renderHeader(), 1000);
}

void boot();
