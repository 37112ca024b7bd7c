// String renderers: view state in, SVG/HTML out.
//
// The browser shell assigns these strings to innerHTML; tests assert on them
// directly. Keeping render pure (no document access) means the whole
// pipeline from wire payload to markup runs anywhere.

import { layoutMachine, type MachineLayout } from "./layout.js";
import type { Diagnostic, ErrorPayload } from "./protocol.js";
import { shortEventName } from "./protocol.js";
import type { LogEntryView, MachineView, UiModelView } from "./modelview.js";

export function renderPanels(view: UiModelView): string {
  return view.machines.map((m) => renderMachinePanel(m)).join("\n");
}

export function renderMachinePanel(machine: MachineView): string {
  const layout = layoutMachine(machine);
  const parts: string[] = [];
  parts.push(
    `<svg class="machine-panel" data-machine="${esc(machine.name)}" ` +
      `viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `width="${layout.width}" height="${layout.height}" xmlns="http://www.w3.org/2000/svg">`,
  );
  const markerId = `arrow-${machine.name}`;
  parts.push(
    `<defs><marker id="${esc(markerId)}" markerWidth="7" markerHeight="5" ` +
      `refX="6" refY="2.5" orient="auto"><path d="M0,0 L7,2.5 L0,5 Z" class="arrowhead"/></marker></defs>`,
  );
  parts.push(
    `<text class="panel-title" x="${layout.width / 2}" y="14" text-anchor="middle">` +
      `${esc(machine.name)} : ${esc(machine.klass)}</text>`,
  );

  for (const edge of layout.edges) {
    const source = machine.edges.find((e) => e.hop === edge.hop);
    const above = source ? source.above.map(shortEventName) : [];
    const below = source ? source.below : [];
    parts.push(`<g class="edge" data-edge="${esc(edge.hop)}">`);
    parts.push(
      `<path class="edge-line" d="${edge.d}" fill="none" marker-end="url(#${esc(markerId)})"/>`,
    );
    if (above.length > 0) {
      parts.push(labelStack(edge.labelAbove.x, edge.labelAbove.y, above, "label-above", -11));
    }
    if (below.length > 0) {
      parts.push(labelStack(edge.labelBelow.x, edge.labelBelow.y, below, "label-below", 11));
    }
    parts.push("</g>");
  }

  for (const node of layout.nodes) {
    const classes = ["state"];
    if (node.name === machine.current) classes.push("current");
    parts.push(`<g class="node" data-state="${esc(node.name)}">`);
    if (node.name === machine.start) {
      // short arrow marking the start state, aimed at the node from outside
      const sx = node.x - node.r - 20;
      parts.push(
        `<line class="start-arrow" x1="${sx}" y1="${node.y}" ` +
          `x2="${node.x - node.r - 3}" y2="${node.y}" marker-end="url(#${esc(markerId)})"/>`,
      );
    }
    parts.push(
      `<circle class="${classes.join(" ")}" cx="${node.x}" cy="${node.y}" r="${node.r}"/>`,
    );
    parts.push(
      `<text class="state-name" x="${node.x}" y="${node.y}" ` +
        `text-anchor="middle" dominant-baseline="middle">${esc(node.name)}</text>`,
    );
    parts.push("</g>");
  }

  parts.push("</svg>");
  return parts.join("");
}

function labelStack(x: number, y: number, labels: string[], cls: string, lineStep: number): string {
  // stack grows away from the edge: above-labels upward, below-labels downward
  const spans = labels
    .map((text, i) => `<tspan x="${x}" dy="${i === 0 ? 0 : lineStep}">${esc(text)}</tspan>`)
    .join("");
  return `<text class="${cls}" x="${x}" y="${y}" text-anchor="middle">${spans}</text>`;
}

export function renderButtons(view: UiModelView): string {
  return view.buttons
    .map((b) => {
      const boundText = b.bound === null ? "unbounded" : `bound ${b.bound}`;
      const steps = b.lastSteps === null ? "" : `<span class="badge badge-steps">last ${b.lastSteps} steps</span>`;
      return (
        `<button class="event-btn" data-event="${esc(b.leaf)}">` +
        `<span class="event-name">${esc(b.leaf)}</span>` +
        `<span class="badge badge-bound">${esc(boundText)}</span>` +
        steps +
        `</button>`
      );
    })
    .join("\n");
}

export function renderLog(view: UiModelView): string {
  return view.log.map(renderLogEntry).join("\n");
}

export function renderLogEntry(entry: LogEntryView): string {
  const fired = entry.fired.map(shortEventName).join(", ");
  const boundText = entry.bound === null ? "unbounded" : String(entry.bound);
  const post = Object.entries(entry.post)
    .map(([m, s]) => `${m}=${s}`)
    .join(", ");
  return (
    `<div class="log-entry" data-seq="${entry.seq}">` +
    `<span class="log-seq">#${entry.seq}</span> ` +
    `<span class="log-event">${esc(entry.event)}</span> ` +
    `<span class="log-fired">[${esc(fired)}]</span> ` +
    `<span class="log-post">(${esc(post)})</span> ` +
    `<span class="log-steps">steps ${entry.steps} / ${esc(boundText)}</span>` +
    `</div>`
  );
}

export function renderDiagnostics(diags: Diagnostic[]): string {
  const rows = diags
    .map(
      (d) =>
        `<div class="diag ${esc(d.severity)}">` +
        `<span class="diag-pos">${d.line}:${d.col}</span> ` +
        `<span class="diag-code">${esc(d.code)}</span> ` +
        `<span class="diag-msg">${esc(d.message)}</span>` +
        `</div>`,
    )
    .join("\n");
  return `<div class="diagnostics">${rows}</div>`;
}

export function renderErrorToast(err: ErrorPayload): string {
  const extra = err.code === "cascade-overflow" && err.limit !== undefined
    ? ` (cap ${err.limit})`
    : "";
  return `<div class="toast error" data-code="${esc(err.code)}">${esc(err.message)}${esc(extra)}</div>`;
}

function esc(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export type { MachineLayout };
