// Federation overview: the KPI x lab status matrix, dimension-coded by
// row. Cells come straight from the summary endpoint; a row the endpoint
// could not fill renders as error cells rather than being dropped.

import type { ApiClient, Catalog, FederationSummary, SummaryCell } from "../api";
import { toApiInstant } from "../api";
import { banner, el } from "../dom";
import { t } from "../strings";

export interface FederationOptions {
  now?: Date;
}

export function renderFederation(
  catalog: Catalog,
  api: ApiClient,
  options: FederationOptions = {},
): HTMLElement {
  const root = el("div", { class: "view view-federation" }, [
    el("h2", {}, [t("federation.title")]),
  ]);
  const slot = el("div", { class: "matrix-slot", "aria-live": "polite" });
  root.append(slot, el("p", { class: "legend" }, [t("federation.legend")]));

  const at = toApiInstant(options.now ?? new Date());
  void api
    .federationSummary(at)
    .then((summary) => {
      slot.append(matrixTable(catalog, summary));
    })
    .catch((failure) => {
      slot.append(banner(`${t("error.banner")}: ${String(failure.message ?? failure)}`));
    });
  return root;
}

function cellNode(status: SummaryCell | undefined): HTMLTableCellElement {
  if (status === undefined) {
    return el("td", { class: "cell cell-error" }, [t("federation.cell.error")]);
  }
  return el("td", { class: `cell cell-${status}` }, [t(`federation.cell.${status}`)]);
}

function matrixTable(catalog: Catalog, summary: FederationSummary): HTMLTableElement {
  const labs = catalog.labs.map((lab) => lab.id);
  const head = el("tr", {}, [el("th", { scope: "col" }, ["KPI"])]);
  for (const lab of labs) {
    head.append(el("th", { scope: "col" }, [lab]));
  }
  const table = el("table", { class: "federation-matrix" }, [el("thead", {}, [head])]);
  const body = el("tbody");
  const rowsByKpi = new Map(summary.rows.map((row) => [row.kpi_id, row]));
  for (const kpi of catalog.kpis) {
    const row = rowsByKpi.get(kpi.id);
    const tr = el("tr", {}, [
      el("th", { scope: "row", class: `kpi-label dim-${kpi.dimension}` }, [
        `${kpi.id} ${kpi.name}`,
      ]),
    ]);
    for (const lab of labs) {
      tr.append(cellNode(row?.statuses?.[lab]));
    }
    body.append(tr);
  }
  table.append(body);
  return table;
}
