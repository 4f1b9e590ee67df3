// fetch stub: routes are matched by "METHOD /path" prefix; every call is
// recorded so tests can assert exactly what went over the wire.

import type { Catalog } from "../src/api";

export interface RecordedCall {
  method: string;
  url: string;
  body?: string;
}

type Responder = unknown | ((url: string, init?: RequestInit) => unknown);

export interface FetchStub {
  calls: RecordedCall[];
  unmatched: string[];
}

export function stubFetch(routes: Record<string, Responder>): FetchStub {
  const stub: FetchStub = { calls: [], unmatched: [] };
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = init?.method ?? "GET";
    stub.calls.push({ method, url, body: init?.body ? String(init.body) : undefined });
    for (const [key, responder] of Object.entries(routes)) {
      const [routeMethod, routePath] = key.split(" ", 2);
      if (method !== routeMethod) continue;
      const path = url.split("?")[0];
      if (path !== routePath) continue;
      const payload = typeof responder === "function"
        ? (responder as (url: string, init?: RequestInit) => unknown)(url, init)
        : responder;
      if (payload instanceof Response) return payload;
      return new Response(JSON.stringify(payload), {
        status: 200,
        headers: { "content-type": "application/json" },
      });
    }
    stub.unmatched.push(`${method} ${url}`);
    return new Response(JSON.stringify({ error: { code: "not_found", message: url } }), {
      status: 404,
      headers: { "content-type": "application/json" },
    });
  }) as typeof fetch;
  return stub;
}

export function errorResponse(status: number, code: string, message = "nope"): Response {
  return new Response(JSON.stringify({ error: { code, message } }), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export async function flushAsync(): Promise<void> {
  // let queued promise callbacks (fetch -> then -> DOM updates) run
  for (let i = 0; i < 8; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

/** Two labs, typed measures (one out of scope for drama), one report
 * template, one KPI with actions. */
export const CATALOG: Catalog = {
  labs: [
    { id: "drama", city: "Drama", country: "Greece", target_groups: ["women"], description: "" },
    { id: "strovolos", city: "Strovolos", country: "Cyprus", target_groups: ["elderly"], description: "" },
  ],
  measures: [
    {
      id: "production_yield_kg", name: "Production yield", unit: "kg",
      value_type: "number", frequency: "daily", scope: { kind: "common" },
    },
    {
      id: "participants_active", name: "Active participants", unit: "count",
      value_type: "integer", frequency: "weekly", scope: { kind: "common" },
    },
    {
      id: "compost_applied", name: "Compost applied", unit: "yes/no",
      value_type: "boolean", frequency: "weekly", scope: { kind: "common" },
    },
    {
      id: "harvest_quality", name: "Harvest quality", unit: "grade",
      value_type: "category", frequency: "weekly",
      scope: { kind: "common" },
      category_values: ["poor", "fair", "good", "excellent"],
    },
    {
      id: "soil_ph", name: "Soil pH", unit: "pH",
      value_type: "number", frequency: "monthly",
      scope: { kind: "specific", lab_ids: ["strovolos"] },
    },
  ],
  reports: [
    { id: "daily_harvest", name: "Daily harvest", measure_ids: ["production_yield_kg", "compost_applied"] },
  ],
  kpis: [
    {
      id: "KA1", name: "Economic viability", dimension: "economic", created_by: "CKLH",
      goal: "g", csf: "c",
      metrics: [{ id: "balance", expression: "sum(revenue) - sum(expenses)" }],
      target: { conjunctive: false, predicates: [{ metric_id: "balance", comparator: ">", threshold: 0 }] },
      actions: [{ description: "Increase revenues" }, { description: "Reduce costs" }],
      monitor_frequency: "monthly", window: "1m",
    },
    {
      id: "KS1", name: "Soil health", dimension: "environmental", created_by: "LL Strovolos",
      goal: "g", csf: "c",
      metrics: [{ id: "acidity", expression: "avg(soil_ph)" }],
      target: { conjunctive: false, predicates: [{ metric_id: "acidity", comparator: ">=", threshold: 6 }] },
      actions: [{ description: "Increase organic matter in the soil" }],
      monitor_frequency: "monthly", window: "3m",
    },
  ],
  protocol_notes: null,
};
