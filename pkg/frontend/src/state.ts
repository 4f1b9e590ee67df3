export type ActiveView = "enter_data" | "my_data" | "kpi_monitor" | "federation";
export type UserHint = "researcher" | "municipality" | "participant";

export interface ViewState {
  activeLab: string;
  activeView: ActiveView;
  userHint: UserHint;
  uploaderId: string;
}

export const ALL_VIEWS: ActiveView[] = ["enter_data", "my_data", "kpi_monitor", "federation"];

/** The user hint tunes presentation only: participants are not shown the
 * federation matrix (or the researcher explorer), but data entry is never
 * restricted. */
export function visibleViews(hint: UserHint): ActiveView[] {
  if (hint === "participant") {
    return ALL_VIEWS.filter((view) => view !== "federation");
  }
  return ALL_VIEWS;
}

export function showsExplorer(hint: UserHint): boolean {
  return hint === "researcher";
}

export function initialState(defaultLab: string): ViewState {
  return { activeLab: defaultLab, activeView: "enter_data", userHint: "participant", uploaderId: "" };
}
