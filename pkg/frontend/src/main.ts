/** Browser entry point: wires the flow, shortcuts, and dashboard to the DOM. */

import { AnnotationApi } from "./api.js";
import { Dashboard } from "./dashboard.js";
import { AnnotationFlow } from "./flow.js";
import { actionForKey } from "./keyboard.js";
import { renderState } from "./render.js";

function main(): void {
  const api = new AnnotationApi(window.location.origin);
  const root = document.getElementById("app");
  const dashboardEl = document.getElementById("dashboard");
  const form = document.getElementById("start-form") as HTMLFormElement | null;
  const input = document.getElementById("annotator-id") as HTMLInputElement | null;
  const refreshBtn = document.getElementById("refresh-agreement");
  if (!root || !form || !input) return;

  const flow = new AnnotationFlow(api, (state) => {
    root.innerHTML = renderState(state);
  });
  const dashboard = new Dashboard(api);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const annotator = input.value.trim();
    if (annotator) {
      form.classList.add("hidden");
      void flow.start(annotator);
    }
  });

  document.addEventListener("keydown", (event) => {
    if (document.activeElement === input) return;
    const action = actionForKey(event.key);
    if (!action) return;
    event.preventDefault();
    if (action.kind === "label") {
      void flow.choose(action.label);
    } else {
      void flow.retry();
    }
  });

  const refreshDashboard = async () => {
    await dashboard.refresh();
    if (dashboardEl) dashboardEl.innerHTML = dashboard.html();
  };
  refreshBtn?.addEventListener("click", () => void refreshDashboard());
  void refreshDashboard();
}

main();
