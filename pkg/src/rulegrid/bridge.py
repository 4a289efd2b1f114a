"""Line-delimited JSON server exposing the engine over stdin/stdout.

One request per line: ``{"id": 7, "op": "step", "handle": "env:1",
"action": 2}``.  One reply per line: ``{"id": 7, "ok": true, "result":
...}`` on success, ``{"id": 7, "ok": false, "error": "InvalidAction",
"message": ...}`` on failure, with the error field carrying the native
exception name.  Handles are opaque strings owned by the server process;
every op that creates state returns one.

Scalar ``step`` applies the auto-reset wrapper, so rewards, discounts and
step types describe the transition while the observation always belongs
to the next playable state.  ``batch_step`` has the same contract per
slot.  This matches the rollout conventions of the in-process harness,
which is what makes cross-language golden traces comparable.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace

import numpy as np

from .benchio import Benchmark, load_benchmark, load_named, save_benchmark
from .env import Environment, EnvParams
from .registry import make, registered_environments
from .rng import key_from_seed, randint
from .ruleset import Ruleset
from .vecenv import VecEnv


def _ruleset_json(rs: Ruleset) -> dict:
    return {
        "goal": list(rs.goal),
        "rules": [list(r) for r in rs.rules],
        "init_objects": list(rs.init_objects),
    }


def _ruleset_from_json(data: dict) -> Ruleset:
    return Ruleset(
        goal=tuple(data["goal"]),
        rules=tuple(tuple(r) for r in data["rules"]),
        init_objects=tuple(data["init_objects"]),
    ).validate()


def _apply_overrides(params: EnvParams, req: dict) -> EnvParams:
    fields = {}
    if req.get("ruleset") is not None:
        fields["ruleset"] = _ruleset_from_json(req["ruleset"])
    for name in ("max_steps", "view_size", "see_through_walls"):
        if req.get(name) is not None:
            fields[name] = req[name]
    return replace(params, **fields) if fields else params


class Bridge:
    """Dispatch table plus the handle registry for one server session."""

    def __init__(self) -> None:
        self._table: dict[str, object] = {}
        self._serial = 0

    def _put(self, kind: str, obj) -> str:
        self._serial += 1
        handle = f"{kind}:{self._serial}"
        self._table[handle] = obj
        return handle

    def _take(self, handle, kind: str):
        if not isinstance(handle, str) or not handle.startswith(kind + ":"):
            raise KeyError(f"expected a {kind} handle, got {handle!r}")
        try:
            return self._table[handle]
        except KeyError:
            raise KeyError(f"unknown handle {handle!r}") from None

    def dispatch(self, op: str, req: dict):
        handler = getattr(self, "op_" + op, None)
        if handler is None:
            raise ValueError(f"unknown op {op!r}")
        return handler(req)

    # -- environments -----------------------------------------------------

    def op_environments(self, req: dict):
        return {"names": registered_environments()}

    def _make_params(self, req: dict) -> EnvParams:
        if req.get("name"):
            _, params = make(req["name"])
        else:
            params = EnvParams()
        return _apply_overrides(params, req)

    def op_make(self, req: dict):
        params = self._make_params(req)
        env = Environment()
        handle = self._put("env", {"env": env, "params": params, "ts": None})
        return {
            "handle": handle,
            "num_actions": env.num_actions,
            "view_size": params.view_size,
            "height": params.height,
            "width": params.width,
            "step_budget": params.step_budget,
        }

    def op_reset(self, req: dict):
        state = self._take(req["handle"], "env")
        ts = state["env"].reset(state["params"], key_from_seed(int(req["seed"])))
        state["ts"] = ts
        return {
            "observation": ts.observation.tolist(),
            "reward": ts.reward,
            "discount": ts.discount,
            "step_type": int(ts.step_type),
        }

    def op_step(self, req: dict):
        state = self._take(req["handle"], "env")
        if state["ts"] is None:
            raise RuntimeError("step before reset")
        env, params = state["env"], state["params"]
        ts = env.step(params, state["ts"], int(req["action"]))
        state["ts"] = env.auto_reset(params, ts)
        return {
            "observation": state["ts"].observation.tolist(),
            "reward": ts.reward,
            "discount": ts.discount,
            "step_type": int(ts.step_type),
        }

    # -- batched environments ----------------------------------------------

    def op_make_batch(self, req: dict):
        params = self._make_params(req)
        vec = VecEnv(params, int(req["num_envs"]))
        return {
            "handle": self._put("vec", vec),
            "num_envs": vec.num_envs,
            "num_actions": Environment.num_actions,
            "view_size": params.view_size,
        }

    @staticmethod
    def _vec_json(vts) -> dict:
        return {
            "observations": vts.observations.tolist(),
            "rewards": vts.rewards.tolist(),
            "discounts": vts.discounts.tolist(),
            "step_types": vts.step_types.tolist(),
        }

    def op_batch_reset(self, req: dict):
        vec = self._take(req["handle"], "vec")
        return self._vec_json(vec.reset(key_from_seed(int(req["seed"]))))

    def op_batch_step(self, req: dict):
        vec = self._take(req["handle"], "vec")
        actions = np.asarray(req["actions"], dtype=np.int64)
        return self._vec_json(vec.step(actions))

    # -- benchmarks ---------------------------------------------------------

    def _bench_meta(self, handle: str, b: Benchmark) -> dict:
        return {
            "handle": handle,
            "num_rulesets": b.num_rulesets(),
            "config_name": b.config_name,
            "seed": b.seed,
        }

    def op_load_benchmark(self, req: dict):
        b = load_benchmark(req["path"])
        return self._bench_meta(self._put("bench", b), b)

    def op_load_named(self, req: dict):
        b = load_named(req["name"])
        return self._bench_meta(self._put("bench", b), b)

    def op_save_benchmark(self, req: dict):
        b = self._take(req["handle"], "bench")
        save_benchmark(req["path"], b, compress=bool(req.get("compress", True)))
        return {"path": req["path"]}

    def op_get_ruleset(self, req: dict):
        b = self._take(req["handle"], "bench")
        return {"ruleset": _ruleset_json(b.get_ruleset(int(req["index"])))}

    def op_sample_ruleset(self, req: dict):
        b = self._take(req["handle"], "bench")
        index = randint(key_from_seed(int(req["seed"])), b.num_rulesets())
        return {"index": index, "ruleset": _ruleset_json(b.get_ruleset(index))}

    def op_shuffle(self, req: dict):
        b = self._take(req["handle"], "bench")
        shuffled = b.shuffle(key_from_seed(int(req["seed"])))
        return self._bench_meta(self._put("bench", shuffled), shuffled)

    def op_split(self, req: dict):
        b = self._take(req["handle"], "bench")
        left, right = b.split(float(req["prop"]))
        return {
            "left": self._bench_meta(self._put("bench", left), left),
            "right": self._bench_meta(self._put("bench", right), right),
        }

    # -- session ------------------------------------------------------------

    def op_close(self, req: dict):
        self._table.pop(req["handle"], None)
        return {"closed": req["handle"]}

    def op_ping(self, req: dict):
        return {"pong": True}

    def op_shutdown(self, req: dict):
        return {"bye": True}


def serve(stdin=None, stdout=None) -> None:
    """Blocking request loop; returns after a shutdown op or closed stdin."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    bridge = Bridge()
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        rid = None
        op = None
        try:
            req = json.loads(line)
            rid = req.get("id")
            op = req["op"]
            reply = {"id": rid, "ok": True, "result": bridge.dispatch(op, req)}
        except Exception as exc:
            reply = {"id": rid, "ok": False, "error": type(exc).__name__, "message": str(exc)}
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()
        if op == "shutdown" and reply["ok"]:
            break
