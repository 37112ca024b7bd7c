// Browser entry point. Wires the controller to the DOM and to the
// WebSocket relay (the bridge server forwards lines verbatim to the
// simulator service's TCP port).

import { LineSplitter, ServiceClient, type LineTransport } from "./protocol.js";
import { SimulatorController } from "./controller.js";
import type { AnimationStep } from "./modelview.js";
import {
  renderButtons,
  renderDiagnostics,
  renderErrorToast,
  renderLog,
  renderPanels,
} from "./render.js";

const EDGE_FLASH_MS = 500;
const EDGE_STAGGER_MS = 220;

function wsTransport(url: string): Promise<LineTransport> {
  return new Promise((resolve, reject) => {
    const ws = new WebSocket(url);
    const lineCallbacks: Array<(line: string) => void> = [];
    const closeCallbacks: Array<() => void> = [];
    const splitter = new LineSplitter((line) => {
      for (const cb of lineCallbacks) cb(line);
    });
    ws.onmessage = (ev) => splitter.feed(String(ev.data) + "\n");
    ws.onclose = () => {
      for (const cb of closeCallbacks) cb();
    };
    ws.onerror = () => reject(new Error(`cannot reach ${url}`));
    ws.onopen = () =>
      resolve({
        send: (line) => ws.send(line),
        onLine: (cb) => lineCallbacks.push(cb),
        onClose: (cb) => closeCallbacks.push(cb),
        close: () => ws.close(),
      });
  });
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function main(): Promise<void> {
  const sourceBox = el<HTMLTextAreaElement>("source");
  const classBox = el<HTMLInputElement>("mcfsm-class");
  const loadBtn = el<HTMLButtonElement>("load");
  const panels = el<HTMLDivElement>("panels");
  const buttons = el<HTMLDivElement>("buttons");
  const log = el<HTMLDivElement>("log");
  const diagnostics = el<HTMLDivElement>("diagnostics");
  const toasts = el<HTMLDivElement>("toasts");

  // start from the bundled two-switch demo model when available
  try {
    const res = await fetch("/models/combo_switches.mcfsm");
    if (res.ok) sourceBox.value = await res.text();
  } catch {
    // fine, the textarea just starts empty
  }

  const scheme = location.protocol === "https:" ? "wss" : "ws";
  const transport = await wsTransport(`${scheme}://${location.host}/ws`);
  const client = new ServiceClient(transport);

  const controller = new SimulatorController(client, {
    onView(view) {
      diagnostics.innerHTML = "";
      panels.innerHTML = renderPanels(view);
      buttons.innerHTML = renderButtons(view);
      log.innerHTML = renderLog(view);
      log.scrollTop = log.scrollHeight;
    },
    onCascade(plan) {
      animateCascade(panels, plan);
    },
    onDiagnostics(diags) {
      panels.innerHTML = "";
      buttons.innerHTML = "";
      log.innerHTML = "";
      diagnostics.innerHTML = renderDiagnostics(diags);
    },
    onError(err) {
      const holder = document.createElement("div");
      holder.innerHTML = renderErrorToast(err);
      const toast = holder.firstElementChild as HTMLElement;
      toasts.appendChild(toast);
      setTimeout(() => toast.remove(), 4000);
    },
  });

  loadBtn.addEventListener("click", () => {
    const klass = classBox.value.trim();
    void controller.load(sourceBox.value, klass.length > 0 ? klass : undefined);
  });

  buttons.addEventListener("click", (ev) => {
    const btn = (ev.target as HTMLElement).closest<HTMLButtonElement>(".event-btn");
    if (!btn || !btn.dataset.event) return;
    // presses queue up server-side confirmation; animation never blocks them
    void controller.press(btn.dataset.event);
  });
}

function animateCascade(panels: HTMLElement, plan: AnimationStep[]): void {
  plan.forEach((step, i) => {
    setTimeout(() => {
      const edge = panels.querySelector(
        `[data-machine="${cssEscape(step.machine)}"] [data-edge="${cssEscape(step.hop)}"]`,
      );
      if (!edge) return;
      edge.classList.add("fired");
      setTimeout(() => edge.classList.remove("fired"), EDGE_FLASH_MS);
    }, i * EDGE_STAGGER_MS);
  });
}

function cssEscape(value: string): string {
  return typeof CSS !== "undefined" && CSS.escape ? CSS.escape(value) : value;
}

void main();
