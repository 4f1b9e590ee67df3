// Entry-form correctness: typed inputs from the catalog, scope-filtered
// measure lists, and rejected imports rendered row by row.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import type { ViewState } from "../src/state";
import { renderEntryForms } from "../src/views/entry";
import { CATALOG, flushAsync, stubFetch } from "./stub";

const state: ViewState = {
  activeLab: "drama",
  activeView: "enter_data",
  userHint: "participant",
  uploaderId: "ana",
};

function mount(): HTMLElement {
  const view = renderEntryForms(CATALOG, state, new ApiClient(""));
  document.body.innerHTML = "";
  document.body.append(view);
  return view;
}

describe("single-measure form", () => {
  beforeEach(() => {
    stubFetch({});
  });

  it("offers only measures in scope for the active lab", () => {
    const view = mount();
    const picker = view.querySelector<HTMLSelectElement>(".measure-picker")!;
    const offered = [...picker.options].map((o) => o.value);
    expect(offered).toContain("production_yield_kg");
    expect(offered).not.toContain("soil_ph"); // strovolos-specific
  });

  it("renders a closed dropdown for category measures", () => {
    const view = mount();
    const picker = view.querySelector<HTMLSelectElement>(".measure-picker")!;
    picker.value = "harvest_quality";
    picker.dispatchEvent(new Event("change"));
    const control = view.querySelector<HTMLSelectElement>('select[data-measure="harvest_quality"]')!;
    expect(control).not.toBeNull();
    expect([...control.options].map((o) => o.value)).toEqual(["poor", "fair", "good", "excellent"]);
    expect(control.querySelector("input")).toBeNull(); // no free-text escape hatch
  });

  it("renders a checkbox for boolean measures", () => {
    const view = mount();
    const picker = view.querySelector<HTMLSelectElement>(".measure-picker")!;
    picker.value = "compost_applied";
    picker.dispatchEvent(new Event("change"));
    const control = view.querySelector<HTMLInputElement>('input[data-measure="compost_applied"]')!;
    expect(control.type).toBe("checkbox");
  });

  it("associates every control with a label", () => {
    const view = mount();
    for (const control of view.querySelectorAll("input, select, textarea")) {
      const id = control.getAttribute("id");
      expect(id, control.outerHTML).toBeTruthy();
      expect(view.querySelector(`label[for="${id}"]`), control.outerHTML).not.toBeNull();
    }
  });

  it("posts the observation and shows the outcome", async () => {
    const stub = stubFetch({
      "POST /labs/drama/observations": { accepted: 1, rejected: [] },
    });
    const view = mount();
    const value = view.querySelector<HTMLInputElement>('input[data-measure="production_yield_kg"]')!;
    value.value = "5.5";
    view.querySelector<HTMLFormElement>(".measure-form")!.dispatchEvent(new Event("submit"));
    await flushAsync();
    expect(stub.calls).toHaveLength(1);
    const body = JSON.parse(stub.calls[0].body!) as Record<string, unknown>;
    expect(body.measure_id).toBe("production_yield_kg");
    expect(body.value).toBe(5.5);
    expect(body.uploader_id).toBe("ana");
    expect(view.querySelector(".outcome-counts")!.textContent).toContain("accepted: 1");
  });

  it("keeps form state and shows a banner when the service is down", async () => {
    stubFetch({
      "POST /labs/drama/observations": () => {
        throw new Error("connection refused");
      },
    });
    const view = mount();
    const value = view.querySelector<HTMLInputElement>('input[data-measure="production_yield_kg"]')!;
    value.value = "7.25";
    view.querySelector<HTMLFormElement>(".measure-form")!.dispatchEvent(new Event("submit"));
    await flushAsync();
    expect(view.querySelector(".banner")).not.toBeNull();
    expect(value.value).toBe("7.25"); // preserved
  });
});

describe("report form", () => {
  it("renders one field per template measure", () => {
    stubFetch({});
    const view = mount();
    const fields = view.querySelectorAll(".report-fields [data-measure]");
    expect([...fields].map((f) => f.getAttribute("data-measure"))).toEqual([
      "production_yield_kg",
      "compost_applied",
    ]);
  });

  it("submits only filled fields under one timestamp", async () => {
    const stub = stubFetch({
      "POST /labs/drama/reports/daily_harvest": { accepted: 2, rejected: [] },
    });
    const view = mount();
    const yieldInput = view.querySelector<HTMLInputElement>(
      '.report-fields input[data-measure="production_yield_kg"]')!;
    yieldInput.value = "4";
    const compost = view.querySelector<HTMLInputElement>(
      '.report-fields input[data-measure="compost_applied"]')!;
    compost.checked = true;
    view.querySelector<HTMLFormElement>(".report-form")!.dispatchEvent(new Event("submit"));
    await flushAsync();
    const body = JSON.parse(stub.calls[0].body!) as { values: Record<string, unknown> };
    expect(body.values).toEqual({ production_yield_kg: 4, compost_applied: true });
  });
});

describe("file upload", () => {
  it("renders the per-row rejection table from the import outcome", async () => {
    stubFetch({
      "POST /labs/drama/import": {
        accepted: 8,
        rejected: [
          { locator: "4", code: "out_of_scope", message: "measure 'soil_ph' is not collected by lab 'drama'" },
          { locator: "7", code: "type_mismatch", message: "measure 'compost_applied' expects true or false" },
        ],
      },
    });
    const view = mount();
    const textarea = view.querySelector<HTMLTextAreaElement>(".csv-content")!;
    textarea.value = "measure_id,timestamp,value,uploader_id\n...";
    view.querySelector<HTMLFormElement>(".file-form")!.dispatchEvent(new Event("submit"));
    await flushAsync();

    const rows = [...view.querySelectorAll(".rejections tbody tr")].map((tr) =>
      [...tr.querySelectorAll("td")].map((td) => td.textContent),
    );
    expect(rows).toHaveLength(2);
    expect(rows[0]![0]).toBe("4");
    expect(rows[0]![1]).toBe("out_of_scope");
    expect(rows[1]![0]).toBe("7");
    expect(rows[1]![1]).toBe("type_mismatch");
    expect(view.querySelector(".outcome-counts")!.textContent).toContain("accepted: 8");
    expect(view.querySelector(".file-form")!.outerHTML).toMatchSnapshot();
  });

  it("surfaces a malformed header as a banner", async () => {
    stubFetch({
      "POST /labs/drama/import": () =>
        new Response(JSON.stringify({ error: { code: "malformed_header", message: "bad header" } }), {
          status: 400,
          headers: { "content-type": "application/json" },
        }),
    });
    const view = mount();
    const textarea = view.querySelector<HTMLTextAreaElement>(".csv-content")!;
    textarea.value = "wrong,header";
    view.querySelector<HTMLFormElement>(".file-form")!.dispatchEvent(new Event("submit"));
    await flushAsync();
    expect(view.querySelector(".banner")!.textContent).toContain("bad header");
  });
});
