// Typed client for the monitoring service. Every number shown anywhere in
// the UI comes from these endpoints; the client never derives KPI status
// or metric values itself.

export interface LabProfile {
  id: string;
  city: string;
  country: string;
  target_groups: string[];
  description: string;
}

export type ValueType = "number" | "integer" | "boolean" | "category";

export interface MeasureScope {
  kind: "common" | "specific";
  lab_ids?: string[];
}

export interface Measure {
  id: string;
  name: string;
  unit: string;
  value_type: ValueType;
  frequency: string;
  scope: MeasureScope;
  category_values?: string[];
}

export interface ReportTemplate {
  id: string;
  name: string;
  measure_ids: string[];
}

export type Dimension = "economic" | "social" | "environmental" | "technical";

export interface Kpi {
  id: string;
  name: string;
  dimension: Dimension;
  created_by: string;
  goal: string;
  csf: string;
  metrics: { id: string; expression: string }[];
  target: {
    conjunctive: boolean;
    predicates: { metric_id: string; comparator: string; threshold: number }[];
  };
  actions: { description: string }[];
  monitor_frequency: string;
  window: string;
}

export interface Catalog {
  labs: LabProfile[];
  measures: Measure[];
  reports: ReportTemplate[];
  kpis: Kpi[];
  protocol_notes: string | null;
}

export interface Rejection {
  locator: string;
  code: string;
  message: string;
}

export interface IngestOutcome {
  accepted: number;
  rejected: Rejection[];
}

export type KpiStatus = "met" | "not_met" | "insufficient_data";

export type MetricCell = { value: number } | { status: "insufficient_data" };

export interface EvaluationResult {
  kpi_id: string;
  lab_id: string;
  evaluated_at: string;
  window_start: string;
  window_end: string;
  metric_values: Record<string, MetricCell>;
  status: KpiStatus;
  predicate_outcomes: Record<string, "pass" | "fail" | "unknown">;
  triggered_actions: { description: string }[];
}

export interface SeriesPoint {
  timestamp: string;
  value: number;
}

export interface StatusPoint {
  timestamp: string;
  status: KpiStatus;
}

export type SummaryCell = KpiStatus | "not_applicable";

export interface FederationRow {
  kpi_id: string;
  statuses: Record<string, SummaryCell>;
  notes?: Record<string, string>;
}

export interface FederationSummary {
  evaluated_at: string;
  rows: FederationRow[];
}

export class ApiFailure extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** Render an instant the way the service expects: UTC, second precision. */
export function toApiInstant(date: Date): string {
  return date.toISOString().replace(/\.\d{3}Z$/, "Z");
}

async function parseError(response: Response): Promise<ApiFailure> {
  try {
    const body = (await response.json()) as { error?: { code?: string; message?: string } };
    return new ApiFailure(
      response.status,
      body.error?.code ?? "http_error",
      body.error?.message ?? `request failed with ${response.status}`,
    );
  } catch {
    return new ApiFailure(response.status, "http_error", `request failed with ${response.status}`);
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, payload: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  catalog(): Promise<Catalog> {
    return this.getJson("/catalog");
  }

  submitObservation(
    lab: string,
    observation: { measure_id: string; timestamp: string; value: number | boolean | string; uploader_id: string },
  ): Promise<IngestOutcome> {
    return this.postJson(`/labs/${lab}/observations`, observation);
  }

  submitReport(
    lab: string,
    report: string,
    payload: { timestamp: string; uploader_id: string; values: Record<string, number | boolean | string> },
  ): Promise<IngestOutcome> {
    return this.postJson(`/labs/${lab}/reports/${report}`, payload);
  }

  async importCsv(lab: string, content: string, uploader: string): Promise<IngestOutcome> {
    const response = await fetch(
      `${this.baseUrl}/labs/${lab}/import?uploader=${encodeURIComponent(uploader)}`,
      { method: "POST", headers: { "content-type": "text/csv" }, body: content },
    );
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as IngestOutcome;
  }

  async measureSeries(
    lab: string,
    measure: string,
    from: string,
    to: string,
    uploader?: string,
  ): Promise<SeriesPoint[]> {
    const filter = uploader ? `&uploader=${encodeURIComponent(uploader)}` : "";
    const body = await this.getJson<{ points: SeriesPoint[] }>(
      `/labs/${lab}/measures/${measure}/series?from=${from}&to=${to}${filter}`,
    );
    return body.points;
  }

  kpiStatus(lab: string, kpi: string, at: string): Promise<EvaluationResult> {
    return this.getJson(`/labs/${lab}/kpis/${kpi}/status?at=${at}`);
  }

  async kpiSeries(
    lab: string,
    kpi: string,
    from: string,
    to: string,
    step: string,
  ): Promise<StatusPoint[]> {
    const body = await this.getJson<{ points: StatusPoint[] }>(
      `/labs/${lab}/kpis/${kpi}/series?from=${from}&to=${to}&step=${step}`,
    );
    return body.points;
  }

  federationSummary(at: string): Promise<FederationSummary> {
    return this.getJson(`/federation/summary?at=${at}`);
  }
}

/** Measures the active lab actually collects (presentation filtering from
 * catalog facts; no evaluation happens client-side). */
export function measuresInScope(catalog: Catalog, lab: string): Measure[] {
  return catalog.measures.filter(
    (m) => m.scope.kind === "common" || (m.scope.lab_ids ?? []).includes(lab),
  );
}
