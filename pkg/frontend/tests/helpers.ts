import { execFile } from "node:child_process";
import { mkdtemp } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

const run = promisify(execFile);

/** Run one native CLI command; rejects on nonzero exit. */
export async function cli(...args: string[]): Promise<string> {
  const { stdout } = await run("python3", ["-m", "rulegrid.cli", ...args]);
  return stdout;
}

export function scratchDir(prefix: string): Promise<string> {
  return mkdtemp(join(tmpdir(), prefix));
}
