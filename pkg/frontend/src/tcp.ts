// node-only transport: connects a LineTransport to the service's TCP port.

import net from "node:net";

import { LineSplitter, type LineTransport } from "./protocol.js";

export function connectTcp(host: string, port: number): Promise<LineTransport> {
  return new Promise((resolve, reject) => {
    const socket = net.createConnection({ host, port });
    socket.setEncoding("utf-8");
    socket.setNoDelay(true);

    const lineCallbacks: Array<(line: string) => void> = [];
    const closeCallbacks: Array<() => void> = [];
    const splitter = new LineSplitter((line) => {
      for (const cb of lineCallbacks) cb(line);
    });

    socket.on("data", (chunk: string) => splitter.feed(chunk));
    socket.on("close", () => {
      for (const cb of closeCallbacks) cb();
    });

    socket.once("error", reject);
    socket.once("connect", () => {
      socket.removeListener("error", reject);
      socket.on("error", () => socket.destroy());
      resolve({
        send: (line) => socket.write(line + "\n"),
        onLine: (cb) => lineCallbacks.push(cb),
        onClose: (cb) => closeCallbacks.push(cb),
        close: () => socket.end(),
      });
    });
  });
}
