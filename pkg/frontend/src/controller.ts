// Session orchestration: one controller per page, one service connection.
//
// Rendering is delegated through the events interface so the controller can
// run headless (tests drive it over TCP) or in the browser (app.ts wires it
// to the DOM over the WebSocket relay). The view only ever changes on
// server-confirmed data: create snapshots and pushed traces.

import type {
  BoundReport,
  Diagnostic,
  ErrorPayload,
  ModelGraph,
  ServiceClient,
  TracePayload,
} from "./protocol.js";
import { ServiceProtocolError } from "./protocol.js";
import {
  applyTrace,
  buildView,
  checkHighlights,
  checkStepBounds,
  type AnimationStep,
  type UiModelView,
} from "./modelview.js";

export interface ControllerEvents {
  /** Full view replacement: after load and after every applied trace. */
  onView(view: UiModelView): void;
  /** Fired-edge sequence of one confirmed macro step, for animation. */
  onCascade(plan: AnimationStep[], trace: TracePayload): void;
  onDiagnostics(diagnostics: Diagnostic[]): void;
  onError(error: ErrorPayload): void;
}

export class SimulatorController {
  private session: string | null = null;
  private currentView: UiModelView | null = null;
  private queue: Promise<void> = Promise.resolve();

  constructor(
    private readonly client: ServiceClient,
    private readonly events: ControllerEvents,
  ) {
    client.onTrace((session, seq, trace) => {
      if (session === this.session) this.receiveTrace(seq, trace);
    });
    client.onServerError((payload) => this.events.onError(payload));
  }

  get view(): UiModelView | null {
    return this.currentView;
  }

  get sessionId(): string | null {
    return this.session;
  }

  /**
   * Creates a fresh session from DSL source. Replaces any previous session;
   * reloading the same source starts over from the initial state.
   */
  async load(source: string, mcfsmClass?: string): Promise<boolean> {
    const created = await this.client.create(source, mcfsmClass);
    if (!created.ok) {
      this.session = null;
      this.currentView = null;
      this.events.onDiagnostics(created.diagnostics);
      return false;
    }
    const session = created.session;
    const [graph, bounds] = await Promise.all([
      this.client.query<ModelGraph>(session, "model-graph"),
      this.client.query<BoundReport>(session, "bound-report"),
    ]);
    this.session = session;
    this.currentView = buildView(created.payload, graph, bounds);
    checkHighlights(this.currentView);
    this.events.onView(this.currentView);
    return true;
  }

  /**
   * Queues one button press. Injections are serialized so a press during a
   * running animation simply lines up behind the in-flight one; the service
   * confirms each with a trace and the view folds them in arrival order.
   */
  press(event: string): Promise<void> {
    const run = this.queue.then(async () => {
      if (this.session === null) throw new Error("no live session");
      try {
        await this.client.inject(this.session, event);
      } catch (err) {
        if (err instanceof ServiceProtocolError) {
          this.events.onError(err.error);
          return;
        }
        throw err;
      }
    });
    // keep the queue alive after failures
    this.queue = run.catch(() => undefined);
    return run;
  }

  /** Waits until every queued press has been confirmed or rejected. */
  idle(): Promise<void> {
    return this.queue;
  }

  private receiveTrace(seq: number, trace: TracePayload): void {
    if (this.currentView === null) return;
    const result = applyTrace(this.currentView, seq, trace);
    if (!result.applied) return;
    this.currentView = result.view;
    checkHighlights(this.currentView);
    checkStepBounds(this.currentView);
    this.events.onView(this.currentView);
    this.events.onCascade(result.plan, trace);
  }
}
