"""Batched environments as structure-of-arrays numpy state.

One ``VecEnv`` steps N independent environments per call.  Environment i
behaves exactly like the scalar ``Environment`` reset with the i-th child
of the root key (``split(key, N)[i]``), so per-env trajectories do not
depend on the batch size, and the test suite can drive both engines side
by side and require bit-identical results.

Trials auto-reset inside ``step``: the returned record carries the finished
trial's reward, discount and step type next to the first observation of the
next trial, gym style, which is what a rollout loop wants to consume.

The default scenario's reset is fully vectorized (doors, object placement
and agent spawn consume the same Philox words as the scalar builders).  The
classic ports go through the scalar builders per environment; their resets
are rare relative to steps, so stepping still dominates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    AgentState,
    Direction,
    FLOOR_CODE,
    Grid,
    PICKABLE_TILES,
    Position,
    Tile,
    WALKABLE_TILES,
)
from .env import Action, EnvParams, EnvState, StepType
from .errors import GridFull, InvalidAction
from .goals import DIRECTIONAL_GOAL_OFFSET, GOAL_GATES, GoalKind
from .layouts import GENERATION_COLORS, plan_layout
from .observation import observe
from .rng import Key, draw_block_array, split_array, split_batch
from .rules import (
    DIRECTIONAL_OFFSET,
    NEAR_OFFSETS,
    RULE_GATES,
    RuleKind,
)
from .ruleset import Ruleset
from .scenarios import SCENARIOS

# Tile-class lookup tables indexed by the high nibble of an entity code.
_WALKABLE = np.zeros(16, dtype=bool)
_WALKABLE[[int(t) for t in WALKABLE_TILES]] = True
_PICKABLE = np.zeros(16, dtype=bool)
_PICKABLE[[int(t) for t in PICKABLE_TILES]] = True

# Trigger gates as (kind, event) tables; row 0 (EMPTY) stays all-False.
_RULE_GATE = np.zeros((max(RuleKind) + 1, 4), dtype=bool)
for _k, _evs in RULE_GATES.items():
    for _e in _evs:
        _RULE_GATE[int(_k), int(_e)] = True
_GOAL_GATE = np.zeros((max(GoalKind) + 1, 4), dtype=bool)
for _k, _evs in GOAL_GATES.items():
    for _e in _evs:
        _GOAL_GATE[int(_k), int(_e)] = True

# Row/col deltas indexed by Direction (up, right, down, left).
_DR = np.array([-1, 0, 1, 0], dtype=np.int64)
_DC = np.array([0, 1, 0, -1], dtype=np.int64)

_COLORS = np.array([int(c) for c in GENERATION_COLORS], dtype=np.uint8)

_FORWARD = ((-1, 0), (0, 1), (1, 0), (0, -1))
_RIGHT = ((0, 1), (1, 0), (0, -1), (-1, 0))


def _view_offsets(view_size: int) -> tuple[np.ndarray, np.ndarray]:
    """(4, v, v) row/col offsets of each view cell per facing direction."""
    v = view_size
    half = v // 2
    d_r = np.empty((4, v, v), dtype=np.int64)
    d_c = np.empty((4, v, v), dtype=np.int64)
    for d in range(4):
        fr, fc = _FORWARD[d]
        rr, rc = _RIGHT[d]
        for i in range(v):
            ahead = (v - 1) - i
            for j in range(v):
                lat = j - half
                d_r[d, i, j] = ahead * fr + lat * rr
                d_c[d, i, j] = ahead * fc + lat * rc
    return d_r, d_c


@dataclass(eq=False)
class VecTimeStep:
    """One batched transition record; arrays are indexed by environment."""

    observations: np.ndarray | None  # (N, v, v, 2) uint8
    rewards: np.ndarray  # (N,) float64
    discounts: np.ndarray  # (N,) float64
    step_types: np.ndarray  # (N,) int8

    def last(self) -> np.ndarray:
        return self.step_types == int(StepType.LAST)


class VecEnv:
    """N structurally identical environments stepped as numpy arrays.

    All environments share ``params`` (layout, sizes, budget); each may run
    its own ruleset, e.g. one benchmark task per environment.  State lives
    in flat arrays owned by this object; ``step`` mutates them in place and
    starts fresh trials for environments whose trial just ended.
    """

    def __init__(
        self,
        params: EnvParams,
        num_envs: int,
        rulesets: Ruleset | Sequence[Ruleset] | None = None,
    ) -> None:
        if num_envs < 1:
            raise ValueError(f"num_envs must be >= 1, got {num_envs}")
        self.params = params
        self.num_envs = num_envs
        h, w = params.height, params.width
        self._h, self._w = h, w
        self._budget = params.step_budget
        self._rows = np.arange(num_envs)

        if rulesets is None:
            tasks = [params.ruleset] * num_envs
        elif isinstance(rulesets, Ruleset):
            tasks = [rulesets] * num_envs
        else:
            tasks = list(rulesets)
            if len(tasks) != num_envs:
                raise ValueError(f"{len(tasks)} rulesets for {num_envs} envs")
        self._tasks = tasks

        # Per-env task encodings, rules and objects left-packed.
        self._rule_width = max(len(t.active_rules) for t in tasks)
        self._obj_width = max((len(t.active_objects) for t in tasks), default=0)
        self._goals = np.zeros((num_envs, 4), dtype=np.uint8)
        self._rules = np.zeros((num_envs, max(self._rule_width, 1), 4), dtype=np.uint8)
        self._objs = np.zeros((num_envs, max(self._obj_width, 1)), dtype=np.uint8)
        self._obj_counts = np.zeros(num_envs, dtype=np.int64)
        for i, t in enumerate(tasks):
            self._fill_task(i, t)

        # Mutable per-env state.
        self._grids = np.zeros((num_envs, h * w), dtype=np.uint8)
        self._agent_r = np.zeros(num_envs, dtype=np.int64)
        self._agent_c = np.zeros(num_envs, dtype=np.int64)
        self._agent_dir = np.zeros(num_envs, dtype=np.int64)
        self._pocket = np.zeros(num_envs, dtype=np.uint8)
        self._step_count = np.zeros(num_envs, dtype=np.int64)
        self._goal_reached = np.zeros(num_envs, dtype=bool)
        self._rng0 = np.zeros(num_envs, dtype=np.uint64)
        self._rng1 = np.zeros(num_envs, dtype=np.uint64)

        self._vector_reset = params.scenario == "xland"
        if self._vector_reset:
            plan = plan_layout(params.layout, h, w)
            base = np.frombuffer(plan.base_cells(), dtype=np.uint8)
            self._base_cells = base
            self._segments = [np.array(s, dtype=np.int64) for s in plan.door_segments]
            self._fixed_doors = plan.fixed_doors
            self._free_cells = np.nonzero((base >> 4) == int(Tile.FLOOR))[0]
            if self._obj_counts.max(initial=0) >= self._free_cells.size:
                raise GridFull(
                    f"{int(self._obj_counts.max())} objects on "
                    f"{self._free_cells.size} free cells"
                )

        # Neighbour flat index per near-offset; -1 marks out of bounds.
        self._nbr: dict[tuple[int, int], np.ndarray] = {}
        for dr, dc in NEAR_OFFSETS:
            rr, cc = np.divmod(np.arange(h * w, dtype=np.int64), w)
            nr, nc = rr + dr, cc + dc
            ok = (nr >= 0) & (nr < h) & (nc >= 0) & (nc < w)
            self._nbr[(dr, dc)] = np.where(ok, nr * w + nc, -1)

        self._obs_dr, self._obs_dc = _view_offsets(params.view_size)

    def _fill_task(self, i: int, task: Ruleset) -> None:
        self._goals[i] = task.goal
        rules = task.active_rules
        self._rules[i] = 0
        for s, enc in enumerate(rules):
            self._rules[i, s] = enc
        objs = task.active_objects
        self._objs[i] = 0
        self._objs[i, : len(objs)] = objs
        self._obj_counts[i] = len(objs)
        self._tasks[i] = task

    # -- reset ------------------------------------------------------------

    def reset(self, key: Key, compute_obs: bool = True) -> VecTimeStep:
        """Start every environment from its own child of ``key``."""
        return self.reset_with_keys(*split_batch(key, self.num_envs), compute_obs)

    def reset_with_keys(
        self, k0: np.ndarray, k1: np.ndarray, compute_obs: bool = True
    ) -> VecTimeStep:
        """Reset env i from the explicit key pair (k0[i], k1[i]).

        Lets a worker pool run a slice of a larger batch with the same
        per-env keys the full batch would use.
        """
        if k0.shape != (self.num_envs,) or k1.shape != (self.num_envs,):
            raise ValueError(f"expected {self.num_envs} key pairs")
        self._reset_envs(self._rows, np.asarray(k0, dtype=np.uint64), np.asarray(k1, dtype=np.uint64))
        n = self.num_envs
        return VecTimeStep(
            self._observe() if compute_obs else None,
            np.zeros(n),
            np.ones(n),
            np.full(n, int(StepType.FIRST), dtype=np.int8),
        )

    def _reset_envs(self, idx: np.ndarray, ek0: np.ndarray, ek1: np.ndarray) -> None:
        ks0, ks1 = split_array(ek0, ek1, 0)
        st0, st1 = split_array(ek0, ek1, 1)
        self._rng0[idx], self._rng1[idx] = st0, st1
        if self._vector_reset:
            self._build_xland(idx, ks0, ks1)
        else:
            self._build_scalar(idx, ks0, ks1)
        self._step_count[idx] = 0
        self._goal_reached[idx] = False

    def _draw_words(self, k0: np.ndarray, k1: np.ndarray, count: int) -> np.ndarray:
        """(len(k0), count) uint64, matching the scalar draw stream order."""
        cols = []
        for block in range((count + 3) // 4):
            cols.extend(draw_block_array(k0, k1, block))
        return np.stack(cols, axis=1)[:, :count]

    def _build_xland(self, idx: np.ndarray, k0: np.ndarray, k1: np.ndarray) -> None:
        w = self._w
        kd0, kd1 = split_array(k0, k1, 0)
        ko0, ko1 = split_array(k0, k1, 1)
        ka0, ka1 = split_array(k0, k1, 2)
        n = idx.size

        grids = self._grids
        grids[idx] = self._base_cells
        if self._segments:
            words = self._draw_words(kd0, kd1, 2 * len(self._segments))
            for s, seg in enumerate(self._segments):
                if self._fixed_doors:
                    flat = np.full(n, seg[len(seg) // 2])
                else:
                    flat = seg[(words[:, 2 * s] % np.uint64(seg.size)).astype(np.int64)]
                color = _COLORS[(words[:, 2 * s + 1] % np.uint64(_COLORS.size)).astype(np.int64)]
                grids[idx, flat] = np.uint8(int(Tile.DOOR_CLOSED) * 16) + color

        # Object placement: stable argsort of one draw per free cell gives
        # the same permutation as the scalar shuffle, ties broken by index.
        free = self._free_cells
        draws = self._draw_words(ko0, ko1, free.size)
        perm = free[np.argsort(draws, axis=1, kind="stable")]
        counts = self._obj_counts[idx]
        for j in range(self._obj_width):
            m = counts > j
            if m.any():
                grids[idx[m], perm[m, j]] = self._objs[idx[m], j]

        blk = draw_block_array(ka0, ka1, 0)
        tail = (free.size - counts).astype(np.uint64)
        spot = counts + (blk[0] % tail).astype(np.int64)
        flat = perm[np.arange(n), spot]
        self._agent_r[idx] = flat // w
        self._agent_c[idx] = flat % w
        self._agent_dir[idx] = (blk[1] % np.uint64(4)).astype(np.int64)
        self._pocket[idx] = 0

    def _build_scalar(self, idx: np.ndarray, k0: np.ndarray, k1: np.ndarray) -> None:
        build = SCENARIOS[self.params.scenario]
        for t, e in enumerate(idx):
            grid, agent, task = build(self.params, Key(int(k0[t]), int(k1[t])))
            self._grids[e] = np.frombuffer(grid.cells, dtype=np.uint8)
            self._agent_r[e] = agent.position.row
            self._agent_c[e] = agent.position.col
            self._agent_dir[e] = int(agent.direction)
            self._pocket[e] = agent.pocket
            if task is not self._tasks[e]:
                self._fill_task(int(e), task)

    # -- step -------------------------------------------------------------

    def step(self, actions, compute_obs: bool = True) -> VecTimeStep:
        """Advance every environment one step; auto-resets finished trials."""
        a = np.asarray(actions)
        if a.shape != (self.num_envs,):
            raise InvalidAction(f"expected {self.num_envs} actions, got shape {a.shape}")
        if ((a < 0) | (a >= len(Action))).any():
            raise InvalidAction(f"action outside [0, {len(Action) - 1}]")
        a = a.astype(np.int64)
        h, w = self._h, self._w
        rows, grids, pocket = self._rows, self._grids, self._pocket

        tr = self._agent_r + _DR[self._agent_dir]
        tc = self._agent_c + _DC[self._agent_dir]
        inside = (tr >= 0) & (tr < h) & (tc >= 0) & (tc < w)
        tflat = tr * w + tc
        tcode = grids[rows, np.where(inside, tflat, 0)]
        ttile = tcode >> 4
        ev = np.full(self.num_envs, -1, dtype=np.int8)

        m = (a == int(Action.MOVE_FORWARD)) & inside & _WALKABLE[ttile]
        np.copyto(self._agent_r, tr, where=m)
        np.copyto(self._agent_c, tc, where=m)
        ev[m] = 0  # MOVE

        m = a == int(Action.TURN_LEFT)
        np.copyto(self._agent_dir, (self._agent_dir + 3) & 3, where=m)
        m = a == int(Action.TURN_RIGHT)
        np.copyto(self._agent_dir, (self._agent_dir + 1) & 3, where=m)

        m = (a == int(Action.PICK_UP)) & inside & (pocket == 0) & _PICKABLE[ttile]
        if m.any():
            pocket[m] = tcode[m]
            grids[rows[m], tflat[m]] = FLOOR_CODE
            ev[m] = 1  # PICK_UP

        m = (a == int(Action.PUT_DOWN)) & inside & (pocket != 0) & (ttile == int(Tile.FLOOR))
        if m.any():
            grids[rows[m], tflat[m]] = pocket[m]
            pocket[m] = 0
            ev[m] = 2  # PUT_DOWN

        m = (a == int(Action.TOGGLE)) & inside
        if m.any():
            tcolor = tcode & 15
            unlocks = pocket == np.uint8(int(Tile.KEY) * 16) + tcolor
            m &= (ttile == int(Tile.DOOR_CLOSED)) | ((ttile == int(Tile.DOOR_LOCKED)) & unlocks)
            grids[rows[m], tflat[m]] = np.uint8(int(Tile.DOOR_OPEN) * 16) + tcolor[m]
            ev[m] = 3  # TOGGLE

        has_ev = ev >= 0
        if has_ev.any():
            ev_safe = np.where(has_ev, ev, 0)
            if self._rule_width:
                self._apply_rules(has_ev, ev_safe)
            self._check_goals(has_ev, ev_safe)

        self._step_count += 1
        sc = self._step_count
        goal = self._goal_reached
        last = goal | (sc >= self._budget)
        rewards = np.where(goal, 1.0 - 0.9 * (sc / self._budget), 0.0)
        discounts = np.where(last, 0.0, 1.0)
        step_types = np.where(last, int(StepType.LAST), int(StepType.MID)).astype(np.int8)

        if last.any():
            idx = np.nonzero(last)[0]
            self._reset_envs(idx, self._rng0[idx].copy(), self._rng1[idx].copy())

        obs = self._observe() if compute_obs else None
        return VecTimeStep(obs, rewards, discounts, step_types)

    # -- rules and goals ---------------------------------------------------

    def _apply_rules(self, has_ev: np.ndarray, ev_safe: np.ndarray) -> None:
        for s in range(self._rule_width):
            kinds = self._rules[:, s, 0]
            act = has_ev & (kinds != 0) & _RULE_GATE[kinds, ev_safe]
            if not act.any():
                continue
            for k in np.unique(kinds[act]):
                sub = np.nonzero(act & (kinds == k))[0]
                enc = self._rules[sub, s]
                in_a, in_b, out = enc[:, 1], enc[:, 2], enc[:, 3]
                kind = RuleKind(int(k))
                if kind == RuleKind.AGENT_HOLD:
                    hit = self._pocket[sub] == in_a
                    # Floor output means the held object just vanishes.
                    new = np.where(out >> 4 == int(Tile.FLOOR), 0, out)
                    self._pocket[sub[hit]] = new[hit]
                elif kind == RuleKind.AGENT_NEAR:
                    self._fire_agent_near(sub, in_a, out, NEAR_OFFSETS)
                elif kind in DIRECTIONAL_OFFSET and kind >= RuleKind.AGENT_NEAR_UP:
                    self._fire_agent_near(sub, in_a, out, (DIRECTIONAL_OFFSET[kind],))
                elif kind == RuleKind.TILE_NEAR:
                    self._fire_tile_near(sub, in_a, in_b, out, NEAR_OFFSETS)
                else:
                    self._fire_tile_near(sub, in_a, in_b, out, (DIRECTIONAL_OFFSET[kind],))

    def _agent_neighbour_hits(self, sub, code, offsets):
        """Per offset: does the agent's neighbour cell hold ``code``?"""
        h, w = self._h, self._w
        ar, ac = self._agent_r[sub], self._agent_c[sub]
        hits, flats = [], []
        for dr, dc in offsets:
            nr, nc = ar + dr, ac + dc
            ok = (nr >= 0) & (nr < h) & (nc >= 0) & (nc < w)
            nf = np.where(ok, nr * w + nc, 0)
            hits.append(ok & (self._grids[sub, nf] == code))
            flats.append(nf)
        return np.stack(hits), np.stack(flats)

    def _fire_agent_near(self, sub, in_a, out, offsets) -> None:
        hits, flats = self._agent_neighbour_hits(sub, in_a, offsets)
        found = hits.any(axis=0)
        first = hits.argmax(axis=0)  # first offset in scan order
        tgt = flats[first, np.arange(sub.size)]
        self._grids[sub[found], tgt[found]] = out[found]

    def _fire_tile_near(self, sub, in_a, in_b, out, offsets) -> None:
        g = self._grids[sub]
        is_a = g == in_a[:, None]
        hits = []
        for dr, dc in offsets:
            nbr = self._nbr[(dr, dc)]
            ok = nbr >= 0
            b_at = np.zeros_like(is_a)
            b_at[:, ok] = g[:, nbr[ok]] == in_b[:, None]
            hits.append(is_a & b_at)
        any_cell = hits[0].copy()
        for hx in hits[1:]:
            any_cell |= hx
        found = any_cell.any(axis=1)
        pos = any_cell.argmax(axis=1)  # first matching a, row-major
        lanes = np.arange(sub.size)
        first = np.stack([hx[lanes, pos] for hx in hits]).argmax(axis=0)
        nbr_stack = np.stack([self._nbr[(dr, dc)] for dr, dc in offsets])
        bpos = nbr_stack[first, pos]
        self._grids[sub[found], pos[found]] = out[found]
        self._grids[sub[found], bpos[found]] = FLOOR_CODE

    def _check_goals(self, has_ev: np.ndarray, ev_safe: np.ndarray) -> None:
        h, w = self._h, self._w
        kinds = self._goals[:, 0]
        act = has_ev & ~self._goal_reached & (kinds != 0) & _GOAL_GATE[kinds, ev_safe]
        if not act.any():
            return
        for k in np.unique(kinds[act]):
            sub = np.nonzero(act & (kinds == k))[0]
            a1, a2, a3 = self._goals[sub, 1], self._goals[sub, 2], self._goals[sub, 3]
            kind = GoalKind(int(k))
            if kind == GoalKind.AGENT_HOLD:
                got = self._pocket[sub] == a1
            elif kind == GoalKind.AGENT_ON_TILE:
                at = self._agent_r[sub] * w + self._agent_c[sub]
                got = self._grids[sub, at] == a1
            elif kind == GoalKind.AGENT_ON_POSITION:
                got = (self._agent_r[sub] == a1) & (self._agent_c[sub] == a2)
            elif kind == GoalKind.TILE_ON_POSITION:
                rr, cc = a2.astype(np.int64), a3.astype(np.int64)
                ok = (rr < h) & (cc < w)
                at = np.where(ok, rr * w + cc, 0)
                got = ok & (self._grids[sub, at] == a1)
            elif kind == GoalKind.AGENT_NEAR:
                hits, _ = self._agent_neighbour_hits(sub, a1, NEAR_OFFSETS)
                got = hits.any(axis=0)
            elif kind in DIRECTIONAL_GOAL_OFFSET and kind >= GoalKind.AGENT_NEAR_UP:
                hits, _ = self._agent_neighbour_hits(sub, a1, (DIRECTIONAL_GOAL_OFFSET[kind],))
                got = hits[0]
            else:
                offsets = (
                    NEAR_OFFSETS if kind == GoalKind.TILE_NEAR
                    else (DIRECTIONAL_GOAL_OFFSET[kind],)
                )
                g = self._grids[sub]
                is_a = g == a1[:, None]
                got = np.zeros(sub.size, dtype=bool)
                for dr, dc in offsets:
                    nbr = self._nbr[(dr, dc)]
                    ok = nbr >= 0
                    b_at = np.zeros_like(is_a)
                    b_at[:, ok] = g[:, nbr[ok]] == a2[:, None]
                    got |= (is_a & b_at).any(axis=1)
            self._goal_reached[sub[got]] = True

    # -- observations -------------------------------------------------------

    def _observe(self) -> np.ndarray:
        if not self.params.see_through_walls:
            return np.stack(
                [
                    observe(*self._materialize(i), self.params.view_size, False)
                    for i in range(self.num_envs)
                ]
            )
        h, w = self._h, self._w
        wr = self._agent_r[:, None, None] + self._obs_dr[self._agent_dir]
        wc = self._agent_c[:, None, None] + self._obs_dc[self._agent_dir]
        valid = (wr >= 0) & (wr < h) & (wc >= 0) & (wc < w)
        flat = np.where(valid, wr * w + wc, 0)
        v = self.params.view_size
        codes = np.take_along_axis(self._grids, flat.reshape(self.num_envs, -1), 1)
        codes = np.where(valid, codes.reshape(self.num_envs, v, v), 0)
        obs = np.empty((self.num_envs, v, v, 2), dtype=np.uint8)
        obs[..., 0] = codes >> 4
        obs[..., 1] = codes & 15
        return obs

    def _materialize(self, i: int) -> tuple[Grid, AgentState]:
        grid = Grid(self._h, self._w, self._grids[i].tobytes())
        agent = AgentState(
            Position(int(self._agent_r[i]), int(self._agent_c[i])),
            Direction(int(self._agent_dir[i])),
            int(self._pocket[i]),
        )
        return grid, agent

    def env_state(self, i: int) -> EnvState:
        """The i-th environment as a scalar EnvState, for tests and tools."""
        grid, agent = self._materialize(i)
        return EnvState(
            grid,
            agent,
            self._tasks[i],
            int(self._step_count[i]),
            bool(self._goal_reached[i]),
            Key(int(self._rng0[i]), int(self._rng1[i])),
        )
