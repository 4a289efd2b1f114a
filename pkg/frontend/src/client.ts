/** Client for the stdio bridge: one JSON request per line, one reply back.
 *
 * Every result is produced by the native engine on the other side of the
 * pipe; nothing here re-implements semantics.  Requests may overlap, the
 * id field pairs replies with callers.
 */

import { spawn, type ChildProcessByStdio } from "node:child_process";
import { createInterface } from "node:readline";
import type { Readable, Writable } from "node:stream";
import {
  BridgeError,
  type BatchTimeStep,
  type BenchmarkInfo,
  type EnvInfo,
  type EnvOptions,
  type Observation,
  type Ruleset,
  type TimeStep,
} from "./types.js";

interface Pending {
  resolve: (value: any) => void;
  reject: (err: Error) => void;
}

function envRequest(opts: EnvOptions): Record<string, unknown> {
  return {
    name: opts.name,
    max_steps: opts.maxSteps,
    view_size: opts.viewSize,
    see_through_walls: opts.seeThroughWalls,
    ruleset: opts.ruleset,
  };
}

function toTimeStep(r: any): TimeStep {
  return {
    observation: r.observation as Observation,
    reward: r.reward as number,
    discount: r.discount as number,
    stepType: r.step_type as number,
  };
}

function toBatch(r: any): BatchTimeStep {
  return {
    observations: r.observations,
    rewards: r.rewards,
    discounts: r.discounts,
    stepTypes: r.step_types,
  };
}

export class BridgeClient {
  private child: ChildProcessByStdio<Writable, Readable, null>;
  private pending = new Map<number, Pending>();
  private nextId = 1;
  private closed = false;

  private constructor(command: string, args: string[]) {
    this.child = spawn(command, args, { stdio: ["pipe", "pipe", "inherit"] });
    const lines = createInterface({ input: this.child.stdout });
    lines.on("line", (line) => this.onReply(line));
    this.child.on("exit", () => {
      this.closed = true;
      const err = new BridgeError("BridgeClosed", "bridge process exited");
      for (const p of this.pending.values()) p.reject(err);
      this.pending.clear();
    });
  }

  /** Spawn the server and wait for a ping, so failures surface early. */
  static async connect(
    command = "python3",
    args = ["-m", "rulegrid.cli", "bridge"],
  ): Promise<BridgeClient> {
    const client = new BridgeClient(command, args);
    await client.request("ping", {});
    return client;
  }

  private onReply(line: string): void {
    const reply = JSON.parse(line);
    const pending = this.pending.get(reply.id);
    if (!pending) return;
    this.pending.delete(reply.id);
    if (reply.ok) pending.resolve(reply.result);
    else pending.reject(new BridgeError(reply.error, reply.message));
  }

  request(op: string, fields: Record<string, unknown>): Promise<any> {
    if (this.closed) {
      return Promise.reject(new BridgeError("BridgeClosed", "bridge process exited"));
    }
    const id = this.nextId++;
    const line = JSON.stringify({ id, op, ...fields });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.child.stdin.write(line + "\n");
    });
  }

  /** Ask the server to stop, then wait for the process to go away. */
  async shutdown(): Promise<number | null> {
    const exited = new Promise<number | null>((resolve) => {
      this.child.on("exit", (code) => resolve(code));
    });
    await this.request("shutdown", {});
    return exited;
  }

  /** Hard stop for cleanup paths; prefer shutdown(). */
  kill(): void {
    this.child.kill();
  }

  async environments(): Promise<string[]> {
    const r = await this.request("environments", {});
    return r.names;
  }

  async make(opts: EnvOptions = {}): Promise<RemoteEnv> {
    const r = await this.request("make", envRequest(opts));
    return new RemoteEnv(this, {
      handle: r.handle,
      numActions: r.num_actions,
      viewSize: r.view_size,
      height: r.height,
      width: r.width,
      stepBudget: r.step_budget,
    });
  }

  async makeBatch(numEnvs: number, opts: EnvOptions = {}): Promise<RemoteVecEnv> {
    const r = await this.request("make_batch", { num_envs: numEnvs, ...envRequest(opts) });
    return new RemoteVecEnv(this, r.handle, r.num_envs, r.num_actions, r.view_size);
  }

  async loadBenchmark(path: string): Promise<RemoteBenchmark> {
    return RemoteBenchmark.fromReply(this, await this.request("load_benchmark", { path }));
  }

  async loadNamed(name: string): Promise<RemoteBenchmark> {
    return RemoteBenchmark.fromReply(this, await this.request("load_named", { name }));
  }

  async close(handle: string): Promise<void> {
    await this.request("close", { handle });
  }
}

/** One scalar environment living in the server process. */
export class RemoteEnv {
  constructor(
    private client: BridgeClient,
    readonly info: EnvInfo,
  ) {}

  /** Start a fresh trial; the reply is the FIRST timestep. */
  async reset(seed: number): Promise<TimeStep> {
    return toTimeStep(await this.client.request("reset", { handle: this.info.handle, seed }));
  }

  /** Advance one step.  Reward, discount and step type describe the
   * transition; the observation is already the next playable state, the
   * server applies auto-reset on LAST steps. */
  async step(action: number): Promise<TimeStep> {
    return toTimeStep(await this.client.request("step", { handle: this.info.handle, action }));
  }

  async close(): Promise<void> {
    await this.client.close(this.info.handle);
  }
}

/** A fixed-size batch of environments stepped in lockstep. */
export class RemoteVecEnv {
  constructor(
    private client: BridgeClient,
    readonly handle: string,
    readonly numEnvs: number,
    readonly numActions: number,
    readonly viewSize: number,
  ) {}

  async reset(seed: number): Promise<BatchTimeStep> {
    return toBatch(await this.client.request("batch_reset", { handle: this.handle, seed }));
  }

  /** actions[i] drives env i; results stay in input order. */
  async step(actions: number[]): Promise<BatchTimeStep> {
    return toBatch(await this.client.request("batch_step", { handle: this.handle, actions }));
  }

  async close(): Promise<void> {
    await this.client.close(this.handle);
  }
}

/** A benchmark file opened (or derived) in the server process. */
export class RemoteBenchmark {
  constructor(
    private client: BridgeClient,
    readonly info: BenchmarkInfo,
  ) {}

  static fromReply(client: BridgeClient, r: any): RemoteBenchmark {
    return new RemoteBenchmark(client, {
      handle: r.handle,
      numRulesets: r.num_rulesets,
      configName: r.config_name,
      seed: r.seed,
    });
  }

  async get(index: number): Promise<Ruleset> {
    const r = await this.client.request("get_ruleset", { handle: this.info.handle, index });
    return r.ruleset;
  }

  async sample(seed: number): Promise<{ index: number; ruleset: Ruleset }> {
    return this.client.request("sample_ruleset", { handle: this.info.handle, seed });
  }

  async shuffle(seed: number): Promise<RemoteBenchmark> {
    const r = await this.client.request("shuffle", { handle: this.info.handle, seed });
    return RemoteBenchmark.fromReply(this.client, r);
  }

  async split(prop: number): Promise<[RemoteBenchmark, RemoteBenchmark]> {
    const r = await this.client.request("split", { handle: this.info.handle, prop });
    return [
      RemoteBenchmark.fromReply(this.client, r.left),
      RemoteBenchmark.fromReply(this.client, r.right),
    ];
  }

  async save(path: string, compress = true): Promise<void> {
    await this.client.request("save_benchmark", { handle: this.info.handle, path, compress });
  }

  async close(): Promise<void> {
    await this.client.close(this.info.handle);
  }
}
