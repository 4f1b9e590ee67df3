// Federation matrix: four cell states, dimension-coded rows, error cells
// for rows the endpoint could not fill, and participant-mode hiding.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { createApp } from "../src/app";
import { visibleViews } from "../src/state";
import { renderFederation } from "../src/views/federation";
import { CATALOG, flushAsync, stubFetch } from "./stub";

const NOW = new Date("2026-04-01T00:00:00Z");

function mount(): HTMLElement {
  const view = renderFederation(CATALOG, new ApiClient(""), { now: NOW });
  document.body.innerHTML = "";
  document.body.append(view);
  return view;
}

describe("federation matrix", () => {
  it("renders all four cell states with dimension coding", async () => {
    stubFetch({
      "GET /federation/summary": {
        evaluated_at: "2026-04-01T00:00:00Z",
        rows: [
          { kpi_id: "KA1", statuses: { drama: "met", strovolos: "not_met" } },
          { kpi_id: "KS1", statuses: { drama: "not_applicable", strovolos: "insufficient_data" } },
        ],
      },
    });
    const view = mount();
    await flushAsync();

    const table = view.querySelector(".federation-matrix")!;
    expect(table.querySelector(".cell-met")!.textContent).toBe("met");
    expect(table.querySelector(".cell-not_met")!.textContent).toBe("not met");
    expect(table.querySelector(".cell-insufficient_data")!.textContent).toBe("no data");
    expect(table.querySelector(".cell-not_applicable")!.textContent).toBe("n/a");
    expect(table.querySelector(".kpi-label.dim-economic")).not.toBeNull();
    expect(table.querySelector(".kpi-label.dim-environmental")).not.toBeNull();
    expect(view.querySelector(".legend")!.textContent).toContain("descriptive");
  });

  it("renders an all-insufficient matrix for an empty federation", async () => {
    stubFetch({
      "GET /federation/summary": {
        evaluated_at: "2026-04-01T00:00:00Z",
        rows: [
          { kpi_id: "KA1", statuses: { drama: "insufficient_data", strovolos: "insufficient_data" } },
          { kpi_id: "KS1", statuses: { drama: "insufficient_data", strovolos: "insufficient_data" } },
        ],
      },
    });
    const view = mount();
    await flushAsync();
    expect(view.querySelectorAll(".cell-insufficient_data")).toHaveLength(4);
    expect(view.querySelectorAll(".cell-met")).toHaveLength(0);
  });

  it("marks rows the endpoint failed to supply as error cells", async () => {
    stubFetch({
      "GET /federation/summary": {
        evaluated_at: "2026-04-01T00:00:00Z",
        rows: [
          { kpi_id: "KA1", statuses: { drama: "met" } }, // strovolos missing
          // KS1 row missing entirely
        ],
      },
    });
    const view = mount();
    await flushAsync();
    const errorCells = view.querySelectorAll(".cell-error");
    expect(errorCells).toHaveLength(3); // 1 missing lab + 2 cells of the dropped row
  });

  it("shows a banner when the endpoint is unreachable", async () => {
    stubFetch({}); // summary unmatched -> 404
    const view = mount();
    await flushAsync();
    expect(view.querySelector(".banner")).not.toBeNull();
    expect(view.querySelector(".federation-matrix")).toBeNull();
  });
});

describe("participant presentation", () => {
  it("removes only the federation view from navigation", () => {
    expect(visibleViews("participant")).toEqual(["enter_data", "my_data", "kpi_monitor"]);
    expect(visibleViews("municipality")).toContain("federation");
    expect(visibleViews("researcher")).toContain("federation");
  });

  it("starts participants without a federation button but with entry forms", async () => {
    stubFetch({});
    const app = createApp(CATALOG, new ApiClient(""), { now: NOW });
    document.body.innerHTML = "";
    document.body.append(app);
    await flushAsync();
    const buttons = [...app.querySelectorAll(".nav-button")].map((b) => b.getAttribute("data-view"));
    expect(buttons).toEqual(["enter_data", "my_data", "kpi_monitor"]);
    expect(app.querySelector(".measure-form")).not.toBeNull(); // entry never restricted
  });
});
