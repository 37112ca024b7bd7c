// Bridge server: static assets plus a WebSocket-to-TCP relay.
//
// Browsers cannot open raw TCP sockets, so each WebSocket client gets its
// own TCP connection to the simulator service and lines are forwarded
// verbatim in both directions. The per-connection protocol semantics
// (create auto-subscribes, trace pushes) carry over unchanged.
//
// Usage:
//   node dist/server.js [--port 8080] [--service-host H] [--service-port P]
//
// Without --service-port the bridge spawns `python3 -m mcfsm serve` itself
// on an ephemeral port and tears it down on exit.

import { spawn, type ChildProcess } from "node:child_process";
import http from "node:http";
import net from "node:net";
import path from "node:path";
import { fileURLToPath } from "node:url";

import express from "express";
import { WebSocketServer, type WebSocket } from "ws";

import { LineSplitter } from "./protocol.js";

interface BridgeOptions {
  host: string;
  port: number;
  serviceHost: string;
  servicePort: number | null;
}

export interface Bridge {
  server: http.Server;
  port: number;
  servicePort: number;
  close(): Promise<void>;
}

function parseArgs(argv: string[]): BridgeOptions {
  const opts: BridgeOptions = {
    host: "127.0.0.1",
    port: 8080,
    serviceHost: "127.0.0.1",
    servicePort: null,
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      const v = argv[++i];
      if (v === undefined) throw new Error(`${arg} needs a value`);
      return v;
    };
    if (arg === "--port") opts.port = Number(next());
    else if (arg === "--host") opts.host = next();
    else if (arg === "--service-host") opts.serviceHost = next();
    else if (arg === "--service-port") opts.servicePort = Number(next());
    else throw new Error(`unknown argument ${arg}`);
  }
  return opts;
}

/** Spawns the simulator service on an ephemeral port, resolves its port. */
function spawnService(): Promise<{ child: ChildProcess; port: number }> {
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
      if (match) resolve({ child, port: Number(match[1]) });
      else reject(new Error(`unexpected service banner: ${banner.slice(0, nl)}`));
    });
    child.once("exit", (code) => reject(new Error(`service exited early (${code})`)));
  });
}

export async function startBridge(options: Partial<BridgeOptions> = {}): Promise<Bridge> {
  const opts: BridgeOptions = {
    host: options.host ?? "127.0.0.1",
    port: options.port ?? 8080,
    serviceHost: options.serviceHost ?? "127.0.0.1",
    servicePort: options.servicePort ?? null,
  };

  let child: ChildProcess | null = null;
  let servicePort = opts.servicePort;
  if (servicePort === null) {
    const spawned = await spawnService();
    child = spawned.child;
    servicePort = spawned.port;
  }

  const here = path.dirname(fileURLToPath(import.meta.url));
  const frontendRoot = path.resolve(here, "..");
  const repoRoot = path.resolve(frontendRoot, "..");

  const app = express();
  app.use(express.static(path.join(frontendRoot, "public")));
  app.use("/js", express.static(path.join(frontendRoot, "dist")));
  app.use("/models", express.static(path.join(repoRoot, "models")));

  const server = http.createServer(app);
  const wss = new WebSocketServer({ server, path: "/ws" });

  wss.on("connection", (ws: WebSocket) => {
    const upstream = net.createConnection({ host: opts.serviceHost, port: servicePort! });
    upstream.setEncoding("utf-8");
    upstream.setNoDelay(true);

    const splitter = new LineSplitter((line) => {
      if (ws.readyState === ws.OPEN) ws.send(line);
    });
    upstream.on("data", (chunk: string) => splitter.feed(chunk));
    upstream.on("close", () => ws.close());
    upstream.on("error", () => ws.close());

    ws.on("message", (data) => {
      const text = typeof data === "string" ? data : data.toString("utf-8");
      upstream.write(text.endsWith("\n") ? text : text + "\n");
    });
    ws.on("close", () => upstream.destroy());
    ws.on("error", () => upstream.destroy());
  });

  await new Promise<void>((resolve, reject) => {
    server.once("error", reject);
    server.listen(opts.port, opts.host, resolve);
  });
  const address = server.address() as net.AddressInfo;

  return {
    server,
    port: address.port,
    servicePort: servicePort!,
    close: () =>
      new Promise<void>((resolve) => {
        wss.close();
        server.close(() => {
          if (child) child.kill();
          resolve();
        });
        // close() waits for idle sockets; terminate live ws clients now
        for (const clientWs of wss.clients) clientWs.terminate();
      }),
  };
}

const isMain =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;

if (isMain) {
  const opts = parseArgs(process.argv.slice(2));
  startBridge(opts)
    .then((bridge) => {
      console.log(`webui on http://${opts.host}:${bridge.port}`);
      console.log(`relaying to ${opts.serviceHost}:${bridge.servicePort}`);
    })
    .catch((err) => {
      console.error(String(err));
      process.exit(1);
    });
}
