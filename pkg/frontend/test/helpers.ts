// Shared plumbing for the tests that talk to a live simulator service.

import { execFile, spawn, type ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { promisify } from "node:util";

import { SimulatorController, type ControllerEvents } from "../src/controller.js";
import type { AnimationStep, UiModelView } from "../src/modelview.js";
import { ServiceClient, type Diagnostic, type ErrorPayload, type TracePayload } from "../src/protocol.js";
import { connectTcp } from "../src/tcp.js";

const execFileAsync = promisify(execFile);

const here = path.dirname(fileURLToPath(import.meta.url));
export const repoRoot = path.resolve(here, "..", "..");
export const comboModelPath = path.join(repoRoot, "models", "combo_switches.mcfsm");
export const comboSource = readFileSync(comboModelPath, "utf-8");

export interface LiveService {
  child: ChildProcess;
  port: number;
  stop(): void;
}

/** Starts `mcfsm serve` on an ephemeral port and waits for its banner. */
export function startService(): Promise<LiveService> {
  return new Promise((resolve, reject) => {
    const child = spawn("python3", ["-u", "-m", "mcfsm", "serve", "--port", "0"], {
      stdio: ["ignore", "pipe", "inherit"],
    });
    child.once("error", reject);
    let banner = "";
    child.stdout!.setEncoding("utf-8");
    child.stdout!.on("data", (chunk: string) => {
      banner += chunk;
      const nl = banner.indexOf("\n");
      if (nl < 0) return;
      const match = banner.slice(0, nl).match(/listening on .*:(\d+)/);
      if (match) {
        resolve({ child, port: Number(match[1]), stop: () => child.kill() });
      } else {
        reject(new Error(`unexpected banner: ${banner.slice(0, nl)}`));
      }
    });
    child.once("exit", (code) => reject(new Error(`service exited early (${code})`)));
  });
}

export interface Captured {
  views: UiModelView[];
  cascades: Array<{ plan: AnimationStep[]; trace: TracePayload }>;
  diagnostics: Diagnostic[][];
  errors: ErrorPayload[];
}

export interface Harness {
  client: ServiceClient;
  controller: SimulatorController;
  captured: Captured;
  close(): void;
}

/** A controller wired to a live service, with every callback recorded. */
export async function connectController(port: number): Promise<Harness> {
  const transport = await connectTcp("127.0.0.1", port);
  const client = new ServiceClient(transport);
  const captured: Captured = { views: [], cascades: [], diagnostics: [], errors: [] };
  const events: ControllerEvents = {
    onView: (view) => captured.views.push(view),
    onCascade: (plan, trace) => captured.cascades.push({ plan, trace }),
    onDiagnostics: (diags) => captured.diagnostics.push(diags),
    onError: (err) => captured.errors.push(err),
  };
  const controller = new SimulatorController(client, events);
  return { client, controller, captured, close: () => client.close() };
}

/** Runs the CLI simulator and parses its trailing `final: (...)` line. */
export async function cliFinalState(events: string[]): Promise<Record<string, string>> {
  const { stdout } = await execFileAsync("python3", [
    "-m",
    "mcfsm",
    "simulate",
    comboModelPath,
    "--events",
    events.join(","),
  ]);
  const match = stdout.match(/final: \(([^)]*)\)/);
  if (!match) throw new Error(`no final line in CLI output:\n${stdout}`);
  const state: Record<string, string> = {};
  for (const pair of match[1]!.split(", ")) {
    const [machine, name] = pair.split("=");
    if (!machine || !name) throw new Error(`bad state pair ${pair}`);
    state[machine] = name;
  }
  return state;
}

export function viewHighlights(view: UiModelView): Record<string, string> {
  const out: Record<string, string> = {};
  for (const m of view.machines) out[m.name] = m.current;
  return out;
}

/** data-state of every circle rendered with the `current` class. */
export function renderedCurrentStates(svg: string): string[] {
  const out: string[] = [];
  const nodeRe = /<g class="node" data-state="([^"]+)">(?:(?!<\/g>).)*?class="state current"/gs;
  let m: RegExpExecArray | null;
  while ((m = nodeRe.exec(svg)) !== null) out.push(m[1]!);
  return out;
}

/** Small deterministic RNG so randomized press sequences are replayable. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export const LOOP_SOURCE = `
FSM class "Flip" {
    hop a_b += xKick yTick
    hop b_a += xKick yTick
}

McFSM class "Loop" {
    Flip inst P {
        Start: a
        cap &xKick += ../xGo ../Q/yTick
    }
    Flip inst Q {
        Start: a
        cap &xKick += ../P/yTick
    }
}
`;
