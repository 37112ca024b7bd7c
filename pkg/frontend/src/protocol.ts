// Wire protocol client for the mcfsm simulator service.
//
// The service speaks JSON lines over a stream; every message is an envelope
// {type, session, seq, payload}. This module is transport-neutral: it works
// on anything that can send and receive text lines (a TCP socket in node,
// a WebSocket relay in the browser).

export type EnvelopeType = "create" | "inject" | "query" | "trace" | "error" | "diag";

export interface Envelope {
  type: EnvelopeType;
  session: string | null;
  seq: number;
  payload: Record<string, unknown>;
}

export interface Diagnostic {
  file: string;
  line: number;
  col: number;
  severity: string;
  code: string;
  message: string;
}

export interface CreatePayload {
  model: string;
  state: Record<string, string>;
  external_events: string[];
}

export interface TracePayload {
  event: string;
  fired: string[];
  pre: Record<string, string>;
  post: Record<string, string>;
  steps: number;
}

export interface ErrorPayload {
  code: string;
  message: string;
  event?: string;
  limit?: number;
}

export interface GraphEdge {
  src: string;
  dst: string;
  hop: string;
  above: string[];
  below: string[];
}

export interface GraphMachine {
  path: string;
  name: string;
  class: string;
  start: string;
  states: string[];
  edges: GraphEdge[];
}

export interface ModelGraph {
  model: string;
  external_events: string[];
  machines: GraphMachine[];
}

export interface BoundEntry {
  event: string;
  bound: number | null;
  max_fired: number | null;
  witness: string[];
  cycle: string[];
}

export interface BoundReport {
  model: string;
  entries: BoundEntry[];
  bounds: Record<string, number | null>;
}

export type CreateResult =
  | { ok: true; session: string; payload: CreatePayload }
  | { ok: false; diagnostics: Diagnostic[] };

/** A bidirectional stream of text lines. */
export interface LineTransport {
  send(line: string): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: () => void): void;
  close(): void;
}

/** Splits a chunked byte/text stream into lines; transports share it. */
export class LineSplitter {
  private buffer = "";

  constructor(private readonly emit: (line: string) => void) {}

  feed(chunk: string): void {
    this.buffer += chunk;
    let nl: number;
    while ((nl = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, nl);
      this.buffer = this.buffer.slice(nl + 1);
      if (line.trim().length > 0) this.emit(line);
    }
  }
}

interface Pending {
  seq: number;
  resolve: (env: Envelope) => void;
  reject: (err: Error) => void;
}

interface InjectWaiter {
  seq: number;
  session: string;
  resolve: (trace: TracePayload) => void;
  reject: (err: Error) => void;
}

export class ServiceProtocolError extends Error {
  constructor(public readonly error: ErrorPayload) {
    super(`${error.code}: ${error.message}`);
    this.name = "ServiceProtocolError";
  }
}

/**
 * Request/response client with a trace subscription stream.
 *
 * Sequencing rules: replies to create and query echo the request seq.
 * A successful inject is confirmed by a pushed trace envelope whose seq is
 * the 1-based history index, so injects are matched by arrival order per
 * session instead (the service handles one line at a time per connection,
 * and this client keeps at most one inject in flight per session).
 */
export class ServiceClient {
  private nextSeq = 1;
  private pending = new Map<number, Pending>();
  private injectWaiters: InjectWaiter[] = [];
  private traceListeners: Array<(session: string, seq: number, trace: TracePayload) => void> = [];
  private errorListeners: Array<(payload: ErrorPayload) => void> = [];
  private closed = false;

  constructor(private readonly transport: LineTransport) {
    transport.onLine((line) => this.dispatch(line));
    transport.onClose(() => this.handleClose());
  }

  close(): void {
    this.transport.close();
  }

  /** Every trace envelope the connection receives, in arrival order. */
  onTrace(cb: (session: string, seq: number, trace: TracePayload) => void): void {
    this.traceListeners.push(cb);
  }

  /** Errors that do not belong to any in-flight request. */
  onServerError(cb: (payload: ErrorPayload) => void): void {
    this.errorListeners.push(cb);
  }

  async create(source: string, mcfsmClass?: string): Promise<CreateResult> {
    const payload: Record<string, unknown> = { source };
    if (mcfsmClass !== undefined) payload.mcfsm_class = mcfsmClass;
    const env = await this.request("create", null, payload);
    if (env.type === "diag") {
      const diags = (env.payload.diagnostics ?? []) as Diagnostic[];
      return { ok: false, diagnostics: diags };
    }
    return {
      ok: true,
      session: env.session as string,
      payload: env.payload as unknown as CreatePayload,
    };
  }

  async query<T = unknown>(session: string, what: string): Promise<T> {
    const env = await this.request("query", session, { what });
    return (env.payload as { result: T }).result;
  }

  /**
   * Injects one external event; resolves with the confirming trace.
   * Rejects with ServiceProtocolError on unknown events or cascade overflow.
   */
  inject(session: string, event: string): Promise<TracePayload> {
    return new Promise<TracePayload>((resolve, reject) => {
      if (this.closed) {
        reject(new Error("connection closed"));
        return;
      }
      const seq = this.nextSeq++;
      this.injectWaiters.push({ seq, session, resolve, reject });
      this.send({ type: "inject", session, seq, payload: { event } });
    });
  }

  private request(
    type: EnvelopeType,
    session: string | null,
    payload: Record<string, unknown>,
  ): Promise<Envelope> {
    return new Promise<Envelope>((resolve, reject) => {
      if (this.closed) {
        reject(new Error("connection closed"));
        return;
      }
      const seq = this.nextSeq++;
      this.pending.set(seq, { seq, resolve, reject });
      this.send({ type, session, seq, payload });
    });
  }

  private send(env: Envelope): void {
    this.transport.send(JSON.stringify(env));
  }

  private dispatch(line: string): void {
    let env: Envelope;
    try {
      env = JSON.parse(line) as Envelope;
    } catch {
      return; // not ours to diagnose; the service never emits broken JSON
    }
    if (env.type === "trace") {
      const trace = env.payload as unknown as TracePayload;
      const session = env.session ?? "";
      const idx = this.injectWaiters.findIndex((w) => w.session === session);
      if (idx >= 0) {
        const waiter = this.injectWaiters.splice(idx, 1)[0]!;
        waiter.resolve(trace);
      }
      for (const cb of this.traceListeners) cb(session, env.seq, trace);
      return;
    }
    if (env.type === "error") {
      const payload = env.payload as unknown as ErrorPayload;
      const waiterIdx = this.injectWaiters.findIndex((w) => w.seq === env.seq);
      if (waiterIdx >= 0) {
        const waiter = this.injectWaiters.splice(waiterIdx, 1)[0]!;
        waiter.reject(new ServiceProtocolError(payload));
        return;
      }
      const pending = this.pending.get(env.seq);
      if (pending) {
        this.pending.delete(env.seq);
        pending.reject(new ServiceProtocolError(payload));
        return;
      }
      for (const cb of this.errorListeners) cb(payload);
      return;
    }
    // create, diag and query replies echo the request seq
    const pending = this.pending.get(env.seq);
    if (pending) {
      this.pending.delete(env.seq);
      pending.resolve(env);
    }
  }

  private handleClose(): void {
    this.closed = true;
    const err = new Error("connection closed");
    for (const p of this.pending.values()) p.reject(err);
    this.pending.clear();
    for (const w of this.injectWaiters) w.reject(err);
    this.injectWaiters = [];
  }
}

/** "/Model/Machine/src_dst" -> "Machine/src_dst"; "/Model/xEv" -> "xEv". */
export function shortEventName(path: string): string {
  const parts = path.split("/").filter((p) => p.length > 0);
  if (parts.length >= 3) return `${parts[parts.length - 2]}/${parts[parts.length - 1]}`;
  return parts[parts.length - 1] ?? path;
}

/** Leaf segment of a path: "/Model/xPressS1" -> "xPressS1". */
export function leafName(path: string): string {
  const parts = path.split("/").filter((p) => p.length > 0);
  return parts[parts.length - 1] ?? path;
}
