from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from rulegrid.core import (
    AgentState,
    Color,
    Direction,
    FLOOR_CODE,
    Grid,
    Position,
    Tile,
    WALL_CODE,
    pack_entity,
)
from rulegrid.errors import InvalidEncoding
from rulegrid.goals import (
    EMPTY_GOAL,
    Goal,
    GoalKind,
    PAIR_GOALS,
    check_goal,
    decode_goal,
    encode_goal,
)
from rulegrid.rules import (
    EMPTY_RULE,
    EventKind,
    PAIR_INPUT_RULES,
    Rule,
    RuleKind,
    TriggerEvent,
    apply_rules,
    decode_rule,
    encode_rule,
)
from rulegrid.ruleset import MAX_INIT_OBJECTS, MAX_RULES, Ruleset

RED_BALL = pack_entity(Tile.BALL, Color.RED)
BLUE_PYRAMID = pack_entity(Tile.PYRAMID, Color.BLUE)
PURPLE_SQUARE = pack_entity(Tile.SQUARE, Color.PURPLE)
GREEN_BALL = pack_entity(Tile.BALL, Color.GREEN)
YELLOW_KEY = pack_entity(Tile.KEY, Color.YELLOW)

# All placeable object codes (tile >= BALL, color >= RED, skipping doors/walls).
object_codes = st.builds(
    pack_entity,
    st.sampled_from([Tile.BALL, Tile.SQUARE, Tile.PYRAMID, Tile.GOAL, Tile.KEY, Tile.HEX, Tile.STAR]),
    st.sampled_from(sorted(set(Color) - {Color.END_OF_MAP, Color.UNSEEN, Color.EMPTY})),
)


def room(h=7, w=7, objects=()):
    buf = bytearray()
    for r in range(h):
        for c in range(w):
            edge = r in (0, h - 1) or c in (0, w - 1)
            buf.append(WALL_CODE if edge else FLOOR_CODE)
    g = Grid(h, w, bytes(buf))
    for (r, c), code in objects:
        g = g.with_code(r, c, code)
    return g


def agent_at(r, c, d=Direction.UP, pocket=0):
    return AgentState(Position(r, c), Direction(d), pocket)


MOVE = TriggerEvent(EventKind.MOVE, Position(1, 1))
PICK = TriggerEvent(EventKind.PICK_UP, Position(1, 1))
PUT = TriggerEvent(EventKind.PUT_DOWN, Position(1, 1))
TOGGLE = TriggerEvent(EventKind.TOGGLE, Position(1, 1))


# ---------------------------------------------------------------- encodings


@st.composite
def rule_values(draw):
    kind = draw(st.sampled_from(sorted(RuleKind)))
    if kind == RuleKind.EMPTY:
        return Rule(RuleKind.EMPTY)
    a = draw(object_codes)
    b = draw(object_codes) if kind in PAIR_INPUT_RULES else 0
    out = draw(object_codes | st.just(FLOOR_CODE))
    return Rule(kind, a, b, out)


@st.composite
def goal_values(draw):
    kind = draw(st.sampled_from(sorted(GoalKind)))
    if kind == GoalKind.EMPTY:
        return Goal(GoalKind.EMPTY)
    if kind == GoalKind.AGENT_ON_POSITION:
        return Goal(kind, draw(st.integers(0, 255)), draw(st.integers(0, 255)))
    if kind == GoalKind.TILE_ON_POSITION:
        return Goal(kind, draw(object_codes), draw(st.integers(0, 255)), draw(st.integers(0, 255)))
    if kind in PAIR_GOALS:
        return Goal(kind, draw(object_codes), draw(object_codes))
    return Goal(kind, draw(object_codes))


@settings(max_examples=10000, deadline=None)
@given(rule_values())
def test_rule_encoding_round_trip(rule):
    enc = encode_rule(rule)
    assert all(0 <= v <= 255 for v in enc)
    assert decode_rule(enc) == rule
    assert encode_rule(decode_rule(enc)) == enc


@settings(max_examples=10000, deadline=None)
@given(goal_values())
def test_goal_encoding_round_trip(goal):
    enc = encode_goal(goal)
    assert all(0 <= v <= 255 for v in enc)
    assert decode_goal(enc) == goal
    assert encode_goal(decode_goal(enc)) == enc


def test_decode_rejects_malformed_encodings():
    with pytest.raises(InvalidEncoding):
        decode_rule((12, RED_BALL, 0, RED_BALL))  # unknown id
    with pytest.raises(InvalidEncoding):
        decode_rule((0, 1, 0, 0))  # dirty empty rule
    with pytest.raises(InvalidEncoding):
        decode_rule((1, RED_BALL, RED_BALL, RED_BALL))  # single-input rule with in_b
    with pytest.raises(InvalidEncoding):
        decode_rule((3, RED_BALL, 0, RED_BALL))  # pair rule missing in_b
    with pytest.raises(InvalidEncoding):
        decode_rule((1, 255, 0, RED_BALL))  # illegal entity code
    with pytest.raises(InvalidEncoding):
        decode_goal((15, RED_BALL, 0, 0))
    with pytest.raises(InvalidEncoding):
        decode_goal((1, RED_BALL, RED_BALL, 0))
    with pytest.raises(InvalidEncoding):
        decode_goal((4, RED_BALL, 0, 0))
    with pytest.raises(InvalidEncoding):
        decode_goal((0, 0, 1, 0))


def test_single_input_rule_ids_keep_in_b_zero():
    for kind in (1, 2, 8, 9, 10, 11):
        rule = decode_rule((kind, RED_BALL, 0, GREEN_BALL))
        assert rule.in_b == 0


# ------------------------------------------------------------- rule firing


def near_rule(a, b, out, kind=RuleKind.TILE_NEAR):
    return (int(kind), a, b, out)


def test_tile_near_rule_fires_only_after_put_down():
    g = room(objects=[((2, 2), BLUE_PYRAMID), ((2, 3), PURPLE_SQUARE)])
    rules = (near_rule(BLUE_PYRAMID, PURPLE_SQUARE, RED_BALL),)
    agent = agent_at(4, 4)
    for ev in (MOVE, PICK, TOGGLE):
        g2, _ = apply_rules(g, agent, rules, ev)
        assert g2 == g
    g2, _ = apply_rules(g, agent, rules, PUT)
    assert g2.code_at(2, 2) == RED_BALL
    assert g2.code_at(2, 3) == FLOOR_CODE


def test_near_firing_decreases_object_count_by_one():
    g = room(objects=[((2, 2), BLUE_PYRAMID), ((2, 3), PURPLE_SQUARE)])
    rules = (near_rule(BLUE_PYRAMID, PURPLE_SQUARE, RED_BALL),)
    before = sum(1 for c in g.cells if c not in (FLOOR_CODE, WALL_CODE))
    g2, _ = apply_rules(g, agent_at(4, 4), rules, PUT)
    after = sum(1 for c in g2.cells if c not in (FLOOR_CODE, WALL_CODE))
    assert after == before - 1


def test_near_rule_smallest_row_major_match_fires():
    # Two candidate pyramids; the one at the smaller (row, col) wins.
    g = room(
        objects=[
            ((4, 4), BLUE_PYRAMID), ((4, 5), PURPLE_SQUARE),
            ((2, 2), BLUE_PYRAMID), ((3, 2), PURPLE_SQUARE),
        ]
    )
    rules = (near_rule(BLUE_PYRAMID, PURPLE_SQUARE, RED_BALL),)
    g2, _ = apply_rules(g, agent_at(5, 1), rules, PUT)
    assert g2.code_at(2, 2) == RED_BALL
    assert g2.code_at(3, 2) == FLOOR_CODE
    # the other pair is untouched: one firing per rule per event
    assert g2.code_at(4, 4) == BLUE_PYRAMID
    assert g2.code_at(4, 5) == PURPLE_SQUARE


def test_near_rule_neighbor_scan_order_is_row_major():
    # b both above and left of a: the cell above (smaller row) is consumed.
    g = room(
        objects=[
            ((3, 3), BLUE_PYRAMID),
            ((2, 3), PURPLE_SQUARE), ((3, 2), PURPLE_SQUARE),
        ]
    )
    rules = (near_rule(BLUE_PYRAMID, PURPLE_SQUARE, RED_BALL),)
    g2, _ = apply_rules(g, agent_at(5, 5), rules, PUT)
    assert g2.code_at(2, 3) == FLOOR_CODE
    assert g2.code_at(3, 2) == PURPLE_SQUARE


def test_directional_tile_near_rules():
    # TILE_NEAR_UP: b one tile above a.
    g = room(objects=[((3, 3), BLUE_PYRAMID), ((2, 3), PURPLE_SQUARE)])
    up = (near_rule(BLUE_PYRAMID, PURPLE_SQUARE, RED_BALL, RuleKind.TILE_NEAR_UP),)
    down = (near_rule(BLUE_PYRAMID, PURPLE_SQUARE, RED_BALL, RuleKind.TILE_NEAR_DOWN),)
    g2, _ = apply_rules(g, agent_at(5, 5), up, PUT)
    assert g2.code_at(3, 3) == RED_BALL and g2.code_at(2, 3) == FLOOR_CODE
    g3, _ = apply_rules(g, agent_at(5, 5), down, PUT)
    assert g3 == g  # square is above, not below


def test_agent_hold_rule_rewrites_pocket_after_pickup():
    g = room()
    rules = ((int(RuleKind.AGENT_HOLD), BLUE_PYRAMID, 0, RED_BALL),)
    agent = agent_at(2, 2, pocket=BLUE_PYRAMID)
    _, a2 = apply_rules(g, agent, rules, PICK)
    assert a2.pocket == RED_BALL
    _, a3 = apply_rules(g, agent, rules, MOVE)
    assert a3.pocket == BLUE_PYRAMID  # gated: only after pick-up
    # disappearance output empties the pocket
    rules = ((int(RuleKind.AGENT_HOLD), BLUE_PYRAMID, 0, FLOOR_CODE),)
    _, a4 = apply_rules(g, agent, rules, PICK)
    assert a4.pocket == 0


def test_agent_near_rule_fires_on_move_pick_put():
    g = room(objects=[((2, 3), BLUE_PYRAMID)])
    rules = ((int(RuleKind.AGENT_NEAR), BLUE_PYRAMID, 0, RED_BALL),)
    for ev in (MOVE, PICK, PUT):
        g2, _ = apply_rules(g, agent_at(3, 3), rules, ev)
        assert g2.code_at(2, 3) == RED_BALL
    g3, _ = apply_rules(g, agent_at(3, 3), rules, TOGGLE)
    assert g3 == g
    g4, _ = apply_rules(g, agent_at(5, 5), rules, MOVE)  # not adjacent
    assert g4 == g


def test_agent_near_directional_rules():
    g = room(objects=[((2, 3), BLUE_PYRAMID)])
    up = ((int(RuleKind.AGENT_NEAR_UP), BLUE_PYRAMID, 0, RED_BALL),)
    left = ((int(RuleKind.AGENT_NEAR_LEFT), BLUE_PYRAMID, 0, RED_BALL),)
    g2, _ = apply_rules(g, agent_at(3, 3), up, MOVE)  # pyramid above agent
    assert g2.code_at(2, 3) == RED_BALL
    g3, _ = apply_rules(g, agent_at(3, 3), left, MOVE)
    assert g3 == g


def test_rules_scan_in_order_and_see_earlier_firings():
    # First rule turns pyramid+square into a red ball next to the green
    # ball; second rule consumes that freshly created pair.
    g = room(objects=[((2, 2), BLUE_PYRAMID), ((2, 3), PURPLE_SQUARE), ((3, 2), GREEN_BALL)])
    chained = (
        near_rule(BLUE_PYRAMID, PURPLE_SQUARE, RED_BALL),
        near_rule(RED_BALL, GREEN_BALL, YELLOW_KEY),
    )
    g2, _ = apply_rules(g, agent_at(5, 5), chained, PUT)
    assert g2.code_at(2, 2) == YELLOW_KEY
    assert g2.code_at(3, 2) == FLOOR_CODE
    # Reversed order: second rule scans before the red ball exists.
    g3, _ = apply_rules(g, agent_at(5, 5), chained[::-1], PUT)
    assert g3.code_at(2, 2) == RED_BALL
    assert g3.code_at(3, 2) == GREEN_BALL


def test_empty_rules_never_fire():
    g = room(objects=[((2, 2), BLUE_PYRAMID), ((2, 3), PURPLE_SQUARE)])
    g2, a2 = apply_rules(g, agent_at(2, 4), (EMPTY_RULE,) * 18, PUT)
    assert g2 == g and a2 == agent_at(2, 4)


# --------------------------------------------------------------- goal checks


def test_goal_gating_matrix():
    g = room(objects=[((2, 3), RED_BALL)])
    agent = agent_at(3, 3, pocket=RED_BALL)
    hold = (int(GoalKind.AGENT_HOLD), RED_BALL, 0, 0)
    assert check_goal(g, agent, hold, PICK)
    assert not check_goal(g, agent, hold, MOVE)
    assert not check_goal(g, agent, hold, PUT)
    near = (int(GoalKind.AGENT_NEAR), RED_BALL, 0, 0)
    assert all(check_goal(g, agent, near, ev) for ev in (MOVE, PICK, PUT))
    assert not check_goal(g, agent, near, TOGGLE)
    pair = (int(GoalKind.TILE_NEAR), RED_BALL, RED_BALL, 0)
    assert not check_goal(g, agent, pair, MOVE)


def test_tile_near_goal_four_neighbor_placements():
    goal = (int(GoalKind.TILE_NEAR), BLUE_PYRAMID, PURPLE_SQUARE, 0)
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        g = room(objects=[((3, 3), BLUE_PYRAMID), ((3 + dr, 3 + dc), PURPLE_SQUARE)])
        assert check_goal(g, agent_at(1, 1), goal, PUT)
    g = room(objects=[((3, 3), BLUE_PYRAMID), ((4, 4), PURPLE_SQUARE)])  # diagonal
    assert not check_goal(g, agent_at(1, 1), goal, PUT)


def test_directional_tile_near_goals():
    # TILE_NEAR_UP: b one tile above a.
    g = room(objects=[((3, 3), BLUE_PYRAMID), ((2, 3), PURPLE_SQUARE)])
    up = (int(GoalKind.TILE_NEAR_UP), BLUE_PYRAMID, PURPLE_SQUARE, 0)
    down = (int(GoalKind.TILE_NEAR_DOWN), BLUE_PYRAMID, PURPLE_SQUARE, 0)
    assert check_goal(g, agent_at(1, 1), up, PUT)
    assert not check_goal(g, agent_at(1, 1), down, PUT)


def test_agent_near_directional_goals():
    g = room(objects=[((2, 3), RED_BALL)])
    agent = agent_at(3, 3)
    up = (int(GoalKind.AGENT_NEAR_UP), RED_BALL, 0, 0)
    right = (int(GoalKind.AGENT_NEAR_RIGHT), RED_BALL, 0, 0)
    assert check_goal(g, agent, up, MOVE)
    assert not check_goal(g, agent, right, MOVE)


def test_position_goals():
    g = room()
    on_pos = (int(GoalKind.AGENT_ON_POSITION), 3, 4, 0)
    assert check_goal(g, agent_at(3, 4), on_pos, MOVE)
    assert not check_goal(g, agent_at(4, 3), on_pos, MOVE)
    g2 = room(objects=[((2, 5), RED_BALL)])
    tile_pos = (int(GoalKind.TILE_ON_POSITION), RED_BALL, 2, 5, )
    assert check_goal(g2, agent_at(1, 1), tile_pos, PUT)
    assert not check_goal(g2, agent_at(1, 1), tile_pos, MOVE)


def test_empty_goal_always_false():
    g = room()
    for ev in (MOVE, PICK, PUT, TOGGLE):
        assert not check_goal(g, agent_at(1, 1), EMPTY_GOAL, ev)


def test_check_goal_never_mutates():
    g = room(objects=[((2, 3), RED_BALL)])
    agent = agent_at(3, 3)
    before = (bytes(g.cells), agent)
    check_goal(g, agent, (int(GoalKind.AGENT_NEAR), RED_BALL, 0, 0), MOVE)
    assert (bytes(g.cells), agent) == before


# ----------------------------------------------------------------- ruleset


def test_ruleset_padding_and_canonical():
    rs = Ruleset(
        goal=(int(GoalKind.AGENT_HOLD), RED_BALL, 0, 0),
        rules=(near_rule(BLUE_PYRAMID, PURPLE_SQUARE, RED_BALL),),
        init_objects=(BLUE_PYRAMID, PURPLE_SQUARE),
    )
    padded = rs.padded()
    assert len(padded.rules) == MAX_RULES
    assert len(padded.init_objects) == MAX_INIT_OBJECTS
    assert padded.active_rules == rs.rules
    assert padded.canonical() == rs.canonical()
    # canonical ignores rule order and object order
    rs2 = Ruleset(
        goal=rs.goal,
        rules=(near_rule(RED_BALL, GREEN_BALL, YELLOW_KEY),) + rs.rules,
        init_objects=(PURPLE_SQUARE, BLUE_PYRAMID),
    )
    rs3 = Ruleset(
        goal=rs.goal,
        rules=rs.rules + (near_rule(RED_BALL, GREEN_BALL, YELLOW_KEY),),
        init_objects=(BLUE_PYRAMID, PURPLE_SQUARE),
    )
    assert rs2.canonical() == rs3.canonical()
    assert rs2.canonical() != rs.canonical()
