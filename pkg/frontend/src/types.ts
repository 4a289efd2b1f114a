/** Wire types of the JSON-lines bridge, mirrored one to one. */

export enum StepType {
  FIRST = 0,
  MID = 1,
  LAST = 2,
}

/** Egocentric view: view_size x view_size cells of [tile, color] bytes. */
export type Observation = number[][][];

export interface TimeStep {
  observation: Observation;
  reward: number;
  discount: number;
  stepType: StepType;
}

export interface BatchTimeStep {
  observations: Observation[];
  rewards: number[];
  discounts: number[];
  stepTypes: StepType[];
}

/** A task: goal encoding, rule encodings, initially placed object codes. */
export interface Ruleset {
  goal: [number, number, number, number];
  rules: [number, number, number, number][];
  init_objects: number[];
}

export interface EnvOptions {
  name?: string;
  maxSteps?: number;
  viewSize?: number;
  seeThroughWalls?: boolean;
  ruleset?: Ruleset;
}

export interface EnvInfo {
  handle: string;
  numActions: number;
  viewSize: number;
  height: number;
  width: number;
  stepBudget: number;
}

export interface BenchmarkInfo {
  handle: string;
  numRulesets: number;
  configName: string;
  seed: number;
}

/** A failed reply; name carries the native exception class. */
export class BridgeError extends Error {
  constructor(name: string, message: string) {
    super(message);
    this.name = name;
  }
}
