export { BridgeClient, RemoteBenchmark, RemoteEnv, RemoteVecEnv } from "./client.js";
export {
  BridgeError,
  StepType,
  type BatchTimeStep,
  type BenchmarkInfo,
  type EnvInfo,
  type EnvOptions,
  type Observation,
  type Ruleset,
  type TimeStep,
} from "./types.js";
