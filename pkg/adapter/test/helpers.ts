import { execFileSync } from "child_process";
import * as fs from "fs";
import * as http from "http";
import * as os from "os";
import * as path from "path";

export const FIXTURES = path.join(__dirname, "fixtures");

export function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "dforge-adapter-"));
}

/** Run a python snippet against the installed primary package. */
export function python(code: string, args: string[] = []): string {
  return execFileSync("python3", ["-c", code, ...args], { encoding: "utf-8" });
}

export interface MockLm {
  url: string;
  close: () => Promise<void>;
  requests: unknown[];
}

/** Local HTTP stub standing in for an encoder / LM inference endpoint. */
export function startMockServer(
  handler: (body: Record<string, unknown>) => { status?: number; body?: unknown }
): Promise<MockLm> {
  const requests: unknown[] = [];
  const server = http.createServer((req, res) => {
    const chunks: Buffer[] = [];
    req.on("data", (c) => chunks.push(c));
    req.on("end", () => {
      const parsed = JSON.parse(Buffer.concat(chunks).toString("utf-8") || "{}");
      requests.push(parsed);
      const { status, body } = handler(parsed);
      res.writeHead(status ?? 200, { "content-type": "application/json" });
      res.end(JSON.stringify(body ?? {}));
    });
  });
  return new Promise((resolve) => {
    server.listen(0, "127.0.0.1", () => {
      const addr = server.address() as { port: number };
      resolve({
        url: `http://127.0.0.1:${addr.port}/`,
        close: () => new Promise((r) => server.close(() => r())),
        requests,
      });
    });
  });
}
