// My-data view: the uploader sees their own points only (the series
// endpoint filters; the page passes the uploader along on every request).

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import type { ViewState } from "../src/state";
import { renderMyData } from "../src/views/mydata";
import { CATALOG, flushAsync, stubFetch } from "./stub";

const NOW = new Date("2026-04-01T00:00:00Z");

const STATE: ViewState = {
  activeLab: "drama",
  activeView: "my_data",
  userHint: "participant",
  uploaderId: "ana",
};

function mount(): HTMLElement {
  const view = renderMyData(CATALOG, STATE, new ApiClient(""), { now: NOW });
  document.body.innerHTML = "";
  document.body.append(view);
  return view;
}

describe("my data", () => {
  it("charts the uploader's own points, one chart per measure with data", async () => {
    const stub = stubFetch({
      "GET /labs/drama/measures/production_yield_kg/series": {
        points: [
          { timestamp: "2026-03-10T08:00:00Z", value: 5.5 },
          { timestamp: "2026-03-11T08:00:00Z", value: 6.25 },
        ],
      },
      "GET /labs/drama/measures/participants_active/series": { points: [] },
      "GET /labs/drama/measures/compost_applied/series": { points: [] },
    });
    const view = mount();
    await flushAsync();

    // every series request carried the uploader filter
    expect(stub.calls.length).toBeGreaterThan(0);
    for (const call of stub.calls) {
      expect(call.url).toContain("uploader=ana");
    }
    // category measures are never requested (not plottable)
    expect(stub.calls.some((c) => c.url.includes("harvest_quality"))).toBe(false);

    const charts = view.querySelectorAll(".my-chart");
    expect(charts).toHaveLength(1);
    expect(charts[0]!.getAttribute("data-measure")).toBe("production_yield_kg");
    const dots = charts[0]!.querySelectorAll(".series-point");
    expect(dots).toHaveLength(2);
    expect([...dots].map((d) => d.getAttribute("data-value"))).toEqual(["5.5", "6.25"]);
  });

  it("prompts for data entry when the uploader has nothing yet", async () => {
    stubFetch({
      "GET /labs/drama/measures/production_yield_kg/series": { points: [] },
      "GET /labs/drama/measures/participants_active/series": { points: [] },
      "GET /labs/drama/measures/compost_applied/series": { points: [] },
    });
    const view = mount();
    await flushAsync();
    expect(view.querySelectorAll(".my-chart")).toHaveLength(0);
    expect(view.querySelector(".empty-state")).not.toBeNull();
  });
});
