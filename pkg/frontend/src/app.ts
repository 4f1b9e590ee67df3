// Application shell: lab picker, view switcher, user-hint selector.
// Switching views rebuilds (and thereby refetches) the active view; there
// is no client-side cache beyond that.

import type { ApiClient, Catalog } from "./api";
import { clear, el, freshId, labeled, option } from "./dom";
import type { ActiveView, ViewState } from "./state";
import { initialState, visibleViews } from "./state";
import { t } from "./strings";
import { renderEntryForms } from "./views/entry";
import { renderFederation } from "./views/federation";
import { renderKpiMonitor } from "./views/monitor";
import { renderMyData } from "./views/mydata";

export interface AppOptions {
  now?: Date;
}

export function createApp(catalog: Catalog, api: ApiClient, options: AppOptions = {}): HTMLElement {
  const root = el("div", { class: "app" });
  const state: ViewState = initialState(catalog.labs[0]?.id ?? "");

  const header = el("header", { class: "app-header" }, [el("h1", {}, [t("app.title")])]);
  const nav = el("nav", { class: "view-nav", "aria-label": "views" });
  const main = el("main", { class: "app-main" });

  const labPicker = el("select", { class: "lab-picker" });
  labPicker.id = freshId("lab");
  for (const lab of catalog.labs) {
    labPicker.append(option(lab.id, `${lab.city} (${lab.id})`));
  }
  labPicker.addEventListener("change", () => {
    state.activeLab = (labPicker as HTMLSelectElement).value;
    renderView();
  });

  const uploaderInput = el("input", { type: "text", class: "uploader-input" });
  uploaderInput.id = freshId("uploader");
  uploaderInput.addEventListener("change", () => {
    state.uploaderId = (uploaderInput as HTMLInputElement).value.trim();
    if (state.activeView === "my_data") renderView();
  });

  const hintPicker = el("select", { class: "hint-picker" });
  hintPicker.id = freshId("hint");
  for (const hint of ["participant", "municipality", "researcher"] as const) {
    hintPicker.append(option(hint, t(`hint.${hint}`)));
  }
  hintPicker.addEventListener("change", () => {
    state.userHint = (hintPicker as HTMLSelectElement).value as ViewState["userHint"];
    if (!visibleViews(state.userHint).includes(state.activeView)) {
      state.activeView = "enter_data";
    }
    renderNav();
    renderView();
  });

  header.append(
    el("div", { class: "session-controls" }, [
      labeled(t("shell.lab"), labPicker),
      labeled(t("shell.uploader"), uploaderInput),
      labeled(t("shell.user_hint"), hintPicker),
    ]),
  );

  const renderNav = () => {
    clear(nav);
    for (const view of visibleViews(state.userHint)) {
      const button = el(
        "button",
        {
          type: "button",
          class: view === state.activeView ? "nav-button active" : "nav-button",
          "data-view": view,
          "aria-pressed": String(view === state.activeView),
        },
        [t(`nav.${view}`)],
      );
      button.addEventListener("click", () => {
        state.activeView = view;
        renderNav();
        renderView();
      });
      nav.append(button);
    }
  };

  const renderView = () => {
    clear(main);
    const views: Record<ActiveView, () => HTMLElement> = {
      enter_data: () => renderEntryForms(catalog, state, api),
      my_data: () => renderMyData(catalog, state, api, { now: options.now }),
      kpi_monitor: () => renderKpiMonitor(catalog, state, api, { now: options.now }),
      federation: () => renderFederation(catalog, api, { now: options.now }),
    };
    main.append(views[state.activeView]());
  };

  renderNav();
  renderView();
  root.append(header, nav, main);
  return root;
}
