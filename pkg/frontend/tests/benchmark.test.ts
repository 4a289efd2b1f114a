/** Benchmark file interop: files written by the native CLI open through
 * the bridge, bridge-saved files read back natively, and derived
 * benchmarks (shuffle, split) keep native semantics.
 */

import { readFile } from "node:fs/promises";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { BridgeClient } from "../src/index.js";
import { cli, scratchDir } from "./helpers.js";

let client: BridgeClient;
let dir: string;
let nativeFile: string;

beforeAll(async () => {
  dir = await scratchDir("rulegrid-bench-");
  nativeFile = join(dir, "small40.xmgb");
  await cli("generate", "--config", "small", "--num", "40", "--out", nativeFile);
  process.env.XMINIGRID_DATA = dir;
  client = await BridgeClient.connect();
});

afterAll(async () => {
  await client.shutdown();
});

describe("native-written files", () => {
  it("load with the right metadata", async () => {
    const bench = await client.loadBenchmark(nativeFile);
    expect(bench.info.numRulesets).toBe(40);
    expect(bench.info.configName).toBe("small");
    expect(bench.info.seed).toBe(42);
    await bench.close();
  });

  it("resolve by registered name through the data directory", async () => {
    await cli("generate", "--config", "trivial", "--num", "12", "--out", join(dir, "trivial.xmgb"));
    const bench = await client.loadNamed("trivial");
    expect(bench.info.numRulesets).toBe(12);
    await bench.close();
  });

  it("reject unknown names with the native error", async () => {
    await expect(client.loadNamed("nope")).rejects.toMatchObject({
      name: "UnknownBenchmark",
    });
  });
});

describe("benchmark operations", () => {
  it("samples the same task for a fixed seed", async () => {
    const bench = await client.loadBenchmark(nativeFile);
    const a = await bench.sample(123);
    const b = await bench.sample(123);
    expect(a.index).toBe(b.index);
    expect(a.ruleset).toEqual(b.ruleset);
    expect(a.ruleset).toEqual(await bench.get(a.index));
    await bench.close();
  });

  it("splits 0.8 into disjoint 32 + 8", async () => {
    const bench = await client.loadBenchmark(nativeFile);
    const [train, test] = await bench.split(0.8);
    expect(train.info.numRulesets).toBe(32);
    expect(test.info.numRulesets).toBe(8);
    // boundary tasks line up with the parent ordering
    expect(await train.get(0)).toEqual(await bench.get(0));
    expect(await test.get(0)).toEqual(await bench.get(32));
    await Promise.all([train.close(), test.close(), bench.close()]);
  });

  it("shuffles into a same-size reordering", async () => {
    const bench = await client.loadBenchmark(nativeFile);
    const shuffled = await bench.shuffle(9);
    expect(shuffled.info.numRulesets).toBe(40);
    const again = await bench.shuffle(9);
    expect(await shuffled.get(0)).toEqual(await again.get(0));
    await Promise.all([shuffled.close(), again.close(), bench.close()]);
  });
});

describe("bridge-written files", () => {
  it("round trip byte-exactly and read back natively", async () => {
    const bench = await client.loadBenchmark(nativeFile);
    const copy = join(dir, "copy.xmgb");
    await bench.save(copy);
    expect(await readFile(copy)).toEqual(await readFile(nativeFile));

    const report = await cli("stats", "--in", copy);
    expect(report).toContain("tasks: 40");
    expect(report).toContain("config: small");
    await bench.close();
  });
});
