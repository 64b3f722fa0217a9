/** Console bootstrap: create or join a session, then wire stream -> view. */

import { BridgeClient, createSession, listPlans, startSession } from "./client";
import { ForceChart } from "./chart";
import { ConsolePanels } from "./panels";
import { ConsoleViewModel } from "./viewmodel";

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("base") ?? `${window.location.protocol}//${window.location.host}`;
}

async function boot(): Promise<void> {
  const base = baseUrl();
  const select = document.getElementById("plan-select") as HTMLSelectElement;
  const startBtn = document.getElementById("start-session") as HTMLButtonElement;
  const ratioInput = document.getElementById("ratio") as HTMLInputElement;

  for (const name of await listPlans(base)) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    select.appendChild(opt);
  }

  startBtn.addEventListener("click", async () => {
    startBtn.disabled = true;
    const info = await createSession(base, {
      plan_name: select.value,
      real_time_ratio: parseFloat(ratioInput.value || "1"),
    });
    runConsole(base, info.session_id);
    await startSession(base, info.session_id);
  });
}

function runConsole(base: string, sessionId: string): void {
  const vm = new ConsoleViewModel();
  const canvas = document.getElementById("chart") as HTMLCanvasElement;
  const chart = new ForceChart(canvas, vm);

  let lastFailed: string | null = null;
  const client = new BridgeClient({
    baseUrl: base,
    sessionId,
    onFrame: (frame) => vm.apply(frame),
    onConnectionChange: (up) => {
      vm.stale = !up;
    },
  });

  const panels = new ConsolePanels(document.body, vm, {
    sendText: (text) => {
      vm.echoUserText(text);
      if (!client.sendChat(text)) {
        lastFailed = text;
        panels.lastFailedText = text;
      } else {
        lastFailed = null;
        panels.lastFailedText = null;
      }
    },
    pressEstop: () => {
      if (vm.pressEstop()) client.sendEstop();
    },
    retryLast: () => {
      if (lastFailed !== null && client.sendChat(lastFailed)) {
        lastFailed = null;
        panels.lastFailedText = null;
      }
    },
  });

  client.connect();
  setInterval(() => {
    vm.markStale(Date.now());
    chart.render();
    panels.render();
  }, 100);
}

window.addEventListener("DOMContentLoaded", () => {
  boot().catch((err) => {
    const badge = document.getElementById("mode-badge");
    if (badge) badge.textContent = `startup failed: ${err}`;
  });
});
