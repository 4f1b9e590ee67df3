// The three upload modes: a single-measure form, a report form (one field
// per template measure), and a CSV file upload. Inputs are typed from the
// catalog: booleans become checkboxes, categories become closed dropdowns.

import type { ApiClient, Catalog, IngestOutcome, Measure } from "../api";
import { measuresInScope, toApiInstant } from "../api";
import { banner, clear, el, freshId, labeled, option } from "../dom";
import type { ViewState } from "../state";
import { t } from "../strings";

export function renderEntryForms(
  catalog: Catalog,
  state: ViewState,
  api: ApiClient,
): HTMLElement {
  const root = el("div", { class: "view view-entry" });
  root.append(
    section(t("entry.single.title"), buildMeasureForm(catalog, state, api)),
    section(t("entry.report.title"), buildReportForm(catalog, state, api)),
    section(t("entry.file.title"), buildFileForm(state, api)),
  );
  return root;
}

function section(title: string, body: HTMLElement): HTMLElement {
  return el("section", { class: "card" }, [el("h2", {}, [title]), body]);
}

function valueControl(measure: Measure): HTMLElement {
  switch (measure.value_type) {
    case "boolean": {
      const box = el("input", { type: "checkbox", "data-measure": measure.id });
      box.id = freshId("value");
      return box;
    }
    case "category": {
      const select = el("select", { "data-measure": measure.id });
      select.id = freshId("value");
      for (const name of measure.category_values ?? []) {
        select.append(option(name));
      }
      return select;
    }
    case "integer": {
      const input = el("input", { type: "number", step: "1", "data-measure": measure.id });
      input.id = freshId("value");
      return input;
    }
    default: {
      const input = el("input", { type: "number", step: "any", "data-measure": measure.id });
      input.id = freshId("value");
      return input;
    }
  }
}

function readControl(measure: Measure, control: HTMLElement): number | boolean | string | null {
  if (measure.value_type === "boolean") {
    return (control as HTMLInputElement).checked;
  }
  if (measure.value_type === "category") {
    return (control as HTMLSelectElement).value;
  }
  const raw = (control as HTMLInputElement).value.trim();
  if (raw === "") return null;
  return Number(raw);
}

function timestampField(): { wrapper: HTMLElement; read: () => string } {
  const input = el("input", { type: "datetime-local", step: "1" });
  input.id = freshId("ts");
  const read = () => {
    const raw = (input as HTMLInputElement).value;
    if (!raw) return toApiInstant(new Date());
    return toApiInstant(new Date(raw + "Z"));
  };
  return { wrapper: labeled(t("entry.timestamp"), input), read };
}

export function renderOutcome(outcome: IngestOutcome): HTMLElement {
  const box = el("div", { class: "outcome" });
  box.append(
    el("p", { class: "outcome-counts" }, [
      `${t("entry.accepted")}: ${outcome.accepted}, ${t("entry.rejected")}: ${outcome.rejected.length}`,
    ]),
  );
  if (outcome.rejected.length > 0) {
    const head = el("tr", {}, [
      el("th", {}, [t("entry.rejection.row")]),
      el("th", {}, [t("entry.rejection.code")]),
      el("th", {}, [t("entry.rejection.message")]),
    ]);
    const table = el("table", { class: "rejections" }, [el("thead", {}, [head])]);
    const body = el("tbody");
    for (const rejection of outcome.rejected) {
      body.append(
        el("tr", {}, [
          el("td", {}, [rejection.locator]),
          el("td", {}, [rejection.code]),
          el("td", {}, [rejection.message]),
        ]),
      );
    }
    table.append(body);
    box.append(table);
  }
  return box;
}

function buildMeasureForm(catalog: Catalog, state: ViewState, api: ApiClient): HTMLElement {
  const form = el("form", { class: "measure-form" });
  const inScope = measuresInScope(catalog, state.activeLab);
  const picker = el("select", { class: "measure-picker" });
  picker.id = freshId("measure");
  for (const measure of inScope) {
    picker.append(option(measure.id, `${measure.name} (${measure.unit})`));
  }

  const valueSlot = el("div", { class: "value-slot" });
  const timestamp = timestampField();
  const outcomeSlot = el("div", { class: "outcome-slot", "aria-live": "polite" });

  let current: Measure | undefined = inScope[0];
  let control: HTMLElement | null = null;

  const renderValue = () => {
    clear(valueSlot);
    if (!current) return;
    control = valueControl(current);
    const text = current.value_type === "boolean"
      ? `${t("entry.value")} (${t("entry.yes")}/${current.unit})`
      : `${t("entry.value")} (${current.unit})`;
    valueSlot.append(labeled(text, control));
  };
  renderValue();

  picker.addEventListener("change", () => {
    current = inScope.find((m) => m.id === (picker as HTMLSelectElement).value);
    renderValue();
  });

  const submit = el("button", { type: "submit" }, [t("entry.submit")]);
  form.append(labeled(t("entry.measure"), picker), valueSlot, timestamp.wrapper, submit, outcomeSlot);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!current || !control) return;
    const value = readControl(current, control);
    if (value === null) return;
    void api
      .submitObservation(state.activeLab, {
        measure_id: current.id,
        timestamp: timestamp.read(),
        value,
        uploader_id: state.uploaderId,
      })
      .then((outcome) => {
        clear(outcomeSlot);
        outcomeSlot.append(renderOutcome(outcome));
      })
      .catch(() => {
        clear(outcomeSlot);
        outcomeSlot.append(banner(t("entry.error")));
        // inputs stay as they are; nothing is reset on failure
      });
  });
  return form;
}

function buildReportForm(catalog: Catalog, state: ViewState, api: ApiClient): HTMLElement {
  const form = el("form", { class: "report-form" });
  const picker = el("select", { class: "report-picker" });
  picker.id = freshId("report");
  for (const report of catalog.reports) {
    picker.append(option(report.id, report.name));
  }

  const fieldsSlot = el("div", { class: "report-fields" });
  const timestamp = timestampField();
  const outcomeSlot = el("div", { class: "outcome-slot", "aria-live": "polite" });
  const controls = new Map<string, { measure: Measure; control: HTMLElement }>();

  const renderFields = () => {
    clear(fieldsSlot);
    controls.clear();
    const report = catalog.reports.find((r) => r.id === (picker as HTMLSelectElement).value)
      ?? catalog.reports[0];
    if (!report) return;
    for (const measureId of report.measure_ids) {
      const measure = catalog.measures.find((m) => m.id === measureId);
      if (!measure) continue;
      const control = valueControl(measure);
      controls.set(measure.id, { measure, control });
      fieldsSlot.append(labeled(`${measure.name} (${measure.unit})`, control));
    }
  };
  renderFields();
  picker.addEventListener("change", renderFields);

  const submit = el("button", { type: "submit" }, [t("entry.submit")]);
  form.append(labeled(t("entry.report.pick"), picker), fieldsSlot, timestamp.wrapper, submit, outcomeSlot);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const report = catalog.reports.find((r) => r.id === (picker as HTMLSelectElement).value)
      ?? catalog.reports[0];
    if (!report) return;
    const values: Record<string, number | boolean | string> = {};
    for (const [measureId, entry] of controls) {
      const value = readControl(entry.measure, entry.control);
      if (value !== null) values[measureId] = value;
    }
    void api
      .submitReport(state.activeLab, report.id, {
        timestamp: timestamp.read(),
        uploader_id: state.uploaderId,
        values,
      })
      .then((outcome) => {
        clear(outcomeSlot);
        outcomeSlot.append(renderOutcome(outcome));
      })
      .catch(() => {
        clear(outcomeSlot);
        outcomeSlot.append(banner(t("entry.error")));
      });
  });
  return form;
}

function buildFileForm(state: ViewState, api: ApiClient): HTMLElement {
  const form = el("form", { class: "file-form" });
  const file = el("input", { type: "file", accept: ".csv,text/csv" });
  file.id = freshId("file");
  const content = el("textarea", { rows: "6", class: "csv-content" });
  content.id = freshId("csv");
  const outcomeSlot = el("div", { class: "outcome-slot", "aria-live": "polite" });

  file.addEventListener("change", () => {
    const chosen = (file as HTMLInputElement).files?.[0];
    if (!chosen) return;
    void chosen.text().then((text) => {
      (content as HTMLTextAreaElement).value = text;
    });
  });

  const submit = el("button", { type: "submit" }, [t("entry.submit")]);
  form.append(labeled(t("entry.file.pick"), file), labeled(t("entry.file.content"), content), submit, outcomeSlot);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const csv = (content as HTMLTextAreaElement).value;
    if (!csv.trim()) return;
    void api
      .importCsv(state.activeLab, csv, state.uploaderId)
      .then((outcome) => {
        clear(outcomeSlot);
        outcomeSlot.append(renderOutcome(outcome));
      })
      .catch((failure) => {
        clear(outcomeSlot);
        outcomeSlot.append(banner(`${t("error.banner")}: ${String(failure.message ?? failure)}`));
      });
  });
  return form;
}
