// KPI monitoring: a status band over a selectable range plus the current
// status badge, metric values and - when the target is missed - the
// action list. Every status and value shown is fetched; the page does no
// evaluation of its own. Layout is deliberately fixed.

import type { ApiClient, Catalog, EvaluationResult, Kpi, MetricCell } from "../api";
import { ApiFailure, toApiInstant } from "../api";
import { lineChart, statusBand } from "../charts";
import { banner, clear, el, freshId, labeled, option } from "../dom";
import type { ViewState } from "../state";
import { showsExplorer } from "../state";
import { t } from "../strings";

const RANGES: Record<string, { days: number; step: string }> = {
  "14d": { days: 14, step: "1d" },
  "30d": { days: 30, step: "2d" },
  "90d": { days: 90, step: "7d" },
};

export interface MonitorOptions {
  now?: Date;
}

function metricCellText(cell: MetricCell): string {
  if ("value" in cell) return String(cell.value);
  return t("monitor.nodata");
}

export function renderKpiMonitor(
  catalog: Catalog,
  state: ViewState,
  api: ApiClient,
  options: MonitorOptions = {},
): HTMLElement {
  const root = el("div", { class: "view view-monitor" });
  const now = options.now ?? new Date();

  const kpiPicker = el("select", { class: "kpi-picker" });
  kpiPicker.id = freshId("kpi");
  for (const kpi of catalog.kpis) {
    kpiPicker.append(option(kpi.id, `${kpi.id} - ${kpi.name}`));
  }
  const rangePicker = el("select", { class: "range-picker" });
  rangePicker.id = freshId("range");
  for (const key of Object.keys(RANGES)) {
    rangePicker.append(option(key, t(`monitor.range.${key}`)));
  }

  const controls = el("div", { class: "controls" }, [
    labeled(t("monitor.kpi"), kpiPicker),
    labeled(t("monitor.range"), rangePicker),
  ]);
  const panel = el("div", { class: "monitor-panel", "aria-live": "polite" });
  root.append(controls, panel);

  const refresh = () => {
    const kpi = catalog.kpis.find((k) => k.id === (kpiPicker as HTMLSelectElement).value)
      ?? catalog.kpis[0];
    if (!kpi) return;
    const range = RANGES[(rangePicker as HTMLSelectElement).value] ?? RANGES["14d"];
    const to = toApiInstant(now);
    const from = toApiInstant(new Date(now.getTime() - range.days * 86_400_000));
    clear(panel);
    void Promise.all([
      api.kpiStatus(state.activeLab, kpi.id, to),
      api.kpiSeries(state.activeLab, kpi.id, from, to, range.step),
    ])
      .then(([status, series]) => {
        panel.append(statusPanel(kpi, status));
        panel.append(statusBand(series));
      })
      .catch((failure) => {
        if (failure instanceof ApiFailure && failure.code === "lab_out_of_scope") {
          panel.append(el("p", { class: "not-applicable" }, [t("monitor.not_applicable")]));
        } else {
          panel.append(banner(`${t("error.banner")}: ${String(failure.message ?? failure)}`));
        }
      });
  };

  kpiPicker.addEventListener("change", refresh);
  rangePicker.addEventListener("change", refresh);
  refresh();

  if (showsExplorer(state.userHint)) {
    root.append(buildExplorer(catalog, state, api, now));
  }
  return root;
}

function statusPanel(kpi: Kpi, result: EvaluationResult): HTMLElement {
  const box = el("div", { class: "status-panel" });
  const badge = el("span", { class: `badge badge-${result.status}` }, [
    t(`monitor.status.${result.status}`),
  ]);
  box.append(el("h3", {}, [kpi.name, " ", badge]));

  const metrics = el("dl", { class: "metric-values" });
  for (const [metricId, cell] of Object.entries(result.metric_values)) {
    metrics.append(el("dt", {}, [metricId]));
    const classes = "value" in cell ? "metric-value" : "metric-value metric-gap";
    metrics.append(el("dd", { class: classes }, [metricCellText(cell)]));
  }
  box.append(el("h4", {}, [t("monitor.metrics")]), metrics);

  if (result.status === "not_met" && result.triggered_actions.length > 0) {
    const list = el("ul", { class: "action-list" });
    for (const action of result.triggered_actions) {
      list.append(el("li", {}, [action.description]));
    }
    box.append(el("h4", {}, [t("monitor.actions")]), list);
  }
  return box;
}

function buildExplorer(
  catalog: Catalog,
  state: ViewState,
  api: ApiClient,
  now: Date,
): HTMLElement {
  const box = el("section", { class: "card explorer" }, [
    el("h2", {}, [t("monitor.explorer.title")]),
  ]);
  const picker = el("select", { class: "explorer-measure" });
  picker.id = freshId("explorer");
  for (const measure of catalog.measures) {
    if (measure.value_type === "category") continue; // not plottable
    picker.append(option(measure.id, measure.name));
  }
  const fromInput = el("input", { type: "date" });
  fromInput.id = freshId("from");
  const toInput = el("input", { type: "date" });
  toInput.id = freshId("to");
  const show = el("button", { type: "button" }, [t("monitor.explorer.show")]);
  const chartSlot = el("div", { class: "chart-slot" });
  box.append(
    labeled(t("entry.measure"), picker),
    labeled("from", fromInput),
    labeled("to", toInput),
    show,
    chartSlot,
  );
  show.addEventListener("click", () => {
    const fromRaw = (fromInput as HTMLInputElement).value;
    const toRaw = (toInput as HTMLInputElement).value;
    const from = fromRaw ? `${fromRaw}T00:00:00Z` : toApiInstant(new Date(now.getTime() - 30 * 86_400_000));
    const to = toRaw ? `${toRaw}T23:59:59Z` : toApiInstant(now);
    void api
      .measureSeries(state.activeLab, (picker as HTMLSelectElement).value, from, to)
      .then((points) => {
        clear(chartSlot);
        chartSlot.append(lineChart(points));
      })
      .catch((failure) => {
        clear(chartSlot);
        chartSlot.append(banner(`${t("error.banner")}: ${String(failure.message ?? failure)}`));
      });
  });
  return box;
}
