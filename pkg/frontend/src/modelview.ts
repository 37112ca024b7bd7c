// View state for the simulator.
//
// The view is a pure function of the create snapshot plus the trace stream:
// buildView() renders the initial picture, applyTrace() folds in one
// server-confirmed macro step. Nothing here touches the DOM or the network,
// which keeps the whole state machine unit-testable.

import type {
  BoundReport,
  CreatePayload,
  GraphEdge,
  ModelGraph,
  TracePayload,
} from "./protocol.js";
import { leafName } from "./protocol.js";

export interface MachineView {
  path: string;
  name: string;
  klass: string;
  start: string;
  states: string[];
  edges: GraphEdge[];
  /** Exactly one highlighted state per machine, from the last snapshot. */
  current: string;
}

export interface EventButtonView {
  path: string;
  leaf: string;
  bound: number | null;
  /** Step count of the most recent press, null before the first one. */
  lastSteps: number | null;
  /** Largest step count seen so far; must never exceed bound. */
  maxSteps: number;
  presses: number;
}

export interface LogEntryView {
  seq: number;
  event: string;
  fired: string[];
  pre: Record<string, string>;
  post: Record<string, string>;
  steps: number;
  bound: number | null;
}

export interface UiModelView {
  model: string;
  machines: MachineView[];
  buttons: EventButtonView[];
  log: LogEntryView[];
  lastSeq: number;
}

/** One edge flash of the cascade animation, in firing order. */
export interface AnimationStep {
  machine: string;
  src: string;
  dst: string;
  hop: string;
}

export function buildView(
  create: CreatePayload,
  graph: ModelGraph,
  bounds: BoundReport,
): UiModelView {
  const machines: MachineView[] = graph.machines.map((m) => {
    const current = create.state[m.name];
    if (current === undefined) {
      throw new Error(`no state snapshot for machine ${m.name}`);
    }
    return {
      path: m.path,
      name: m.name,
      klass: m.class,
      start: m.start,
      states: m.states,
      edges: m.edges,
      current,
    };
  });

  const buttons: EventButtonView[] = graph.external_events.map((path) => {
    const leaf = leafName(path);
    return {
      path,
      leaf,
      bound: bounds.bounds[leaf] ?? null,
      lastSteps: null,
      maxSteps: 0,
      presses: 0,
    };
  });

  return { model: graph.model, machines, buttons, log: [], lastSeq: 0 };
}

export interface TraceApplication {
  view: UiModelView;
  plan: AnimationStep[];
  /** False when the trace was a duplicate (already applied seq). */
  applied: boolean;
}

/**
 * Folds one trace envelope into the view. Traces arrive with a monotone
 * 1-based history index as seq; anything at or below lastSeq is a replay
 * and is dropped (the protocol is at-least-once on reconnects).
 */
export function applyTrace(view: UiModelView, seq: number, trace: TracePayload): TraceApplication {
  if (seq <= view.lastSeq) {
    return { view, plan: [], applied: false };
  }

  const machines = view.machines.map((m) => {
    const next = trace.post[m.name];
    if (next === undefined) {
      throw new Error(`trace snapshot is missing machine ${m.name}`);
    }
    if (!m.states.includes(next)) {
      throw new Error(`trace moved ${m.name} to unknown state ${next}`);
    }
    return m.current === next ? m : { ...m, current: next };
  });

  const eventLeaf = leafName(trace.event);
  let bound: number | null = null;
  const buttons = view.buttons.map((b) => {
    if (b.leaf !== eventLeaf) return b;
    bound = b.bound;
    return {
      ...b,
      lastSteps: trace.steps,
      maxSteps: Math.max(b.maxSteps, trace.steps),
      presses: b.presses + 1,
    };
  });

  const entry: LogEntryView = {
    seq,
    event: eventLeaf,
    fired: trace.fired,
    pre: trace.pre,
    post: trace.post,
    steps: trace.steps,
    bound,
  };

  return {
    view: {
      ...view,
      machines,
      buttons,
      log: [...view.log, entry],
      lastSeq: seq,
    },
    plan: trace.fired.map(parseFiredEdge),
    applied: true,
  };
}

/** "/Model/Machine/src_dst" -> animation step with machine leaf name. */
export function parseFiredEdge(path: string): AnimationStep {
  const parts = path.split("/").filter((p) => p.length > 0);
  const hop = parts[parts.length - 1] ?? "";
  const machine = parts[parts.length - 2] ?? "";
  const sep = hop.indexOf("_");
  return {
    machine,
    src: sep >= 0 ? hop.slice(0, sep) : hop,
    dst: sep >= 0 ? hop.slice(sep + 1) : hop,
    hop,
  };
}

/** Structural invariant: one known highlighted state per machine. */
export function checkHighlights(view: UiModelView): void {
  for (const m of view.machines) {
    if (!m.states.includes(m.current)) {
      throw new Error(`machine ${m.name} highlights unknown state ${m.current}`);
    }
  }
}

/** Invariant from the bound report: observed steps never beat the bound. */
export function checkStepBounds(view: UiModelView): void {
  for (const b of view.buttons) {
    if (b.bound !== null && b.maxSteps > b.bound) {
      throw new Error(`${b.leaf}: observed ${b.maxSteps} steps above bound ${b.bound}`);
    }
  }
}
