// Externalized string catalog. One locale ships today; adding another is
// a matter of adding a table here and a switcher in the shell.

export type Locale = "en";

const EN: Record<string, string> = {
  "app.title": "Living-lab dashboard",
  "nav.enter_data": "Enter data",
  "nav.my_data": "My data",
  "nav.kpi_monitor": "KPI monitor",
  "nav.federation": "Federation",
  "shell.lab": "Lab",
  "shell.uploader": "Your uploader id",
  "shell.user_hint": "I am a",
  "hint.researcher": "researcher",
  "hint.municipality": "municipality worker",
  "hint.participant": "participant",

  "entry.single.title": "Single measure",
  "entry.report.title": "Report",
  "entry.file.title": "File upload",
  "entry.measure": "Measure",
  "entry.timestamp": "Observed at (UTC)",
  "entry.value": "Value",
  "entry.yes": "yes",
  "entry.submit": "Submit",
  "entry.report.pick": "Report form",
  "entry.file.content": "CSV content",
  "entry.file.pick": "Choose a CSV file",
  "entry.accepted": "accepted",
  "entry.rejected": "rejected",
  "entry.rejection.row": "Row",
  "entry.rejection.code": "Problem",
  "entry.rejection.message": "Details",
  "entry.error": "The service could not be reached; your input is preserved.",

  "monitor.kpi": "KPI",
  "monitor.range": "Range",
  "monitor.range.14d": "Last 2 weeks",
  "monitor.range.30d": "Last month",
  "monitor.range.90d": "Last quarter",
  "monitor.status.met": "met",
  "monitor.status.not_met": "not met",
  "monitor.status.insufficient_data": "insufficient data",
  "monitor.actions": "Actions to take",
  "monitor.metrics": "Metric values",
  "monitor.nodata": "no data",
  "monitor.not_applicable": "This KPI does not apply to the selected lab.",
  "monitor.explorer.title": "Raw series explorer (researcher view)",
  "monitor.explorer.show": "Show",

  "mydata.title": "Data you entered",
  "mydata.empty": "Nothing here yet. Your entries will show up as charts - head over to “Enter data” to add the first one.",

  "federation.title": "Federation overview",
  "federation.cell.met": "met",
  "federation.cell.not_met": "not met",
  "federation.cell.insufficient_data": "no data",
  "federation.cell.not_applicable": "n/a",
  "federation.cell.error": "error",
  "federation.legend": "Correlation across labs is descriptive only; statuses come straight from the evaluation service.",

  "error.banner": "Request failed",
};

const CATALOGS: Record<Locale, Record<string, string>> = { en: EN };

let active: Locale = "en";

export function setLocale(locale: Locale): void {
  active = locale;
}

export function t(key: string): string {
  return CATALOGS[active][key] ?? key;
}
