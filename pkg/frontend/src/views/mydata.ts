// The uploader's own data, one chart per measure they have fed. The
// series endpoint does the filtering (uploader= query parameter); this
// page only draws what comes back.

import type { ApiClient, Catalog, SeriesPoint } from "../api";
import { measuresInScope, toApiInstant } from "../api";
import { lineChart } from "../charts";
import { el } from "../dom";
import type { ViewState } from "../state";
import { t } from "../strings";

export interface MyDataOptions {
  now?: Date;
  horizonDays?: number;
}

export function renderMyData(
  catalog: Catalog,
  state: ViewState,
  api: ApiClient,
  options: MyDataOptions = {},
): HTMLElement {
  const root = el("div", { class: "view view-mydata" }, [el("h2", {}, [t("mydata.title")])]);
  const chartsSlot = el("div", { class: "my-charts", "aria-live": "polite" });
  root.append(chartsSlot);

  const now = options.now ?? new Date();
  const to = toApiInstant(now);
  const from = toApiInstant(new Date(now.getTime() - (options.horizonDays ?? 90) * 86_400_000));
  const plottable = measuresInScope(catalog, state.activeLab).filter(
    (m) => m.value_type !== "category",
  );

  void Promise.all(
    plottable.map((measure) =>
      api
        .measureSeries(state.activeLab, measure.id, from, to, state.uploaderId)
        .then((points): [string, SeriesPoint[]] => [measure.id, points])
        .catch((): [string, SeriesPoint[]] => [measure.id, []]),
    ),
  ).then((results) => {
    const nonEmpty = results.filter(([, points]) => points.length > 0);
    if (nonEmpty.length === 0) {
      chartsSlot.append(el("p", { class: "empty-state" }, [t("mydata.empty")]));
      return;
    }
    for (const [measureId, points] of nonEmpty) {
      const measure = catalog.measures.find((m) => m.id === measureId);
      const card = el("section", { class: "card my-chart", "data-measure": measureId }, [
        el("h3", {}, [measure ? `${measure.name} (${measure.unit})` : measureId]),
        lineChart(points),
      ]);
      chartsSlot.append(card);
    }
  });
  return root;
}
