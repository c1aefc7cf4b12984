/**
 * Spawns the real session service (Python) for the test run and renders the
 * drawing fixtures it needs.  The service URL and fixtures land in JSON files
 * next to the tests.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));
const repoRoot = resolve(here, "..", "..");

const RENDER_FIXTURES = `
import base64, io, json, sys
import numpy as np
from PIL import Image

def disk(size, radius):
    c = (size - 1) / 2
    cols, rows = np.meshgrid(np.arange(size), np.arange(size))
    px = np.where(np.hypot(cols - c, rows - c) <= radius, 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(px, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode()

print(json.dumps({"disk256": disk(256, 100.0)}))
`;

let service: ChildProcess | null = null;

function waitForPort(child: ChildProcess): Promise<string> {
  return new Promise((resolvePort, reject) => {
    let buffer = "";
    const timer = setTimeout(
      () => reject(new Error(`service did not start: ${buffer}`)),
      30_000,
    );
    child.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const m = buffer.match(/http:\/\/([\d.]+):(\d+)\//);
      if (m) {
        clearTimeout(timer);
        resolvePort(`http://${m[1]}:${m[2]}`);
      }
    });
    child.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited with ${code}: ${buffer}`));
    });
  });
}

export default async function setup(): Promise<() => void> {
  const env = {
    ...process.env,
    PYTHONPATH: resolve(repoRoot, "src"),
  };

  const fixtures = spawn("python3", ["-c", RENDER_FIXTURES], { env });
  let fixturesJson = "";
  fixtures.stdout.on("data", (c: Buffer) => (fixturesJson += c.toString()));
  await new Promise<void>((res, rej) => {
    fixtures.on("exit", (code) =>
      code === 0 ? res() : rej(new Error(`fixture render failed (${code})`)),
    );
  });

  service = spawn(
    "python3",
    ["-u", "-m", "orthosketch.cli", "serve", "--port", "0"],
    { env, cwd: repoRoot },
  );
  const baseUrl = await waitForPort(service);

  mkdirSync(resolve(here, ".generated"), { recursive: true });
  writeFileSync(
    resolve(here, ".generated", "env.json"),
    JSON.stringify({ baseUrl, repoRoot, fixtures: JSON.parse(fixturesJson) }),
  );

  return () => {
    service?.kill();
    service = null;
  };
}
