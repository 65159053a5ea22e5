"""Environment model, motion plans, mission-motion integration, and replanning.

Regions and doors live in a partitioned environment; an agent's motion
capabilities are the trim automaton whose states are regions and whose
events are doors.  Motion plans are region-sequence languages; an
integrated plan interleaves them with the mission events they enable.

Two run semantics coexist deliberately.  Containment checks (is a region
word executable?) use stutter-closed runs: an agent may dwell in a region
across steps, which the integrated plans produced here require at cycle
boundaries.  Door realisation (which door words implement a region word?)
uses strict runs: every region change costs exactly one door event.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from cosynth.automata import (
    Dfa,
    EventAlphabet,
    InputError,
    Word,
    empty_dfa,
    language_equal,
    language_subset,
    minimize,
    trim,
    word_dfa,
)
from cosynth.langops import project, satisfies
from cosynth.lstar import LearnLog, learn


class MotionInfeasible(RuntimeError):
    """No adequate motion plan exists; carries the offending region pair."""

    def __init__(self, pair: tuple[str, str]):
        super().__init__(f"no door connects {pair[0]} to {pair[1]}")
        self.pair = pair


class ReplanInfeasible(RuntimeError):
    """The real environment offers no path between two required regions."""

    def __init__(self, pair: tuple[str, str]):
        super().__init__(f"no path from {pair[0]} to {pair[1]} in the real environment")
        self.pair = pair


@dataclass(frozen=True)
class Environment:
    """Partitioned environment: regions, adjacency, doors, and the door map."""

    regions: tuple[str, ...]
    adjacency: tuple[tuple[str, str], ...]
    doors: tuple[str, ...]
    door_map: Mapping[tuple[str, str], tuple[str, ...]]
    initial_regions: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "adjacency", tuple(tuple(p) for p in self.adjacency))
        object.__setattr__(self, "doors", tuple(self.doors))
        object.__setattr__(self, "door_map", {tuple(k): tuple(v) for k, v in self.door_map.items()})
        object.__setattr__(self, "initial_regions", dict(self.initial_regions))
        region_set = set(self.regions)
        if set(self.doors) & region_set:
            raise InputError("door and region labels must be disjoint")
        for pair in self.door_map:
            if pair not in set(self.adjacency):
                raise InputError(f"door map entry {pair} not in the adjacency relation")
            if not set(self.door_map[pair]) <= set(self.doors):
                raise InputError(f"unknown door in map entry {pair}")
        for v, v2 in self.adjacency:
            if v not in region_set or v2 not in region_set:
                raise InputError(f"adjacency pair ({v},{v2}) references unknown regions")
        for agent, region in self.initial_regions.items():
            if region not in region_set:
                raise InputError(f"initial region {region!r} of {agent} unknown")

    def doors_between(self, v: str, v2: str) -> tuple[str, ...]:
        return self.door_map.get((v, v2), ())

    def without_doors(self, closed: set[str]) -> "Environment":
        door_map = {pair: tuple(d for d in ds if d not in closed)
                    for pair, ds in self.door_map.items()}
        return replace(self, door_map=door_map)


@dataclass(frozen=True)
class LabelingMap:
    """Per-agent map from mission events to the regions where they may occur."""

    regions: tuple[str, ...]
    mapping: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mapping", {e: frozenset(r) for e, r in self.mapping.items()})
        for event, targets in self.mapping.items():
            if not targets:
                raise InputError(f"event {event!r} mapped to no region")
            if not targets <= set(self.regions):
                raise InputError(f"event {event!r} mapped outside the region set")

    def of(self, event: str) -> frozenset[str]:
        try:
            return self.mapping[event]
        except KeyError:
            raise InputError(f"no region assigned to event {event!r}") from None

    def ordered(self, event: str) -> tuple[str, ...]:
        targets = self.of(event)
        return tuple(r for r in self.regions if r in targets)


def motion_dfa(env: Environment, initial_region: str) -> Dfa:
    """Trim DFA over doors: one state per region, moves follow the door map."""
    if initial_region not in env.regions:
        raise InputError(f"initial region {initial_region!r} not in the environment")
    transitions: dict[tuple[str, str], str] = {}
    for (v, v2), doors in env.door_map.items():
        for d in doors:
            existing = transitions.get((v, d))
            if existing is not None and existing != v2:
                raise InputError(f"door {d!r} leads from {v!r} to both {existing!r} and {v2!r}")
            transitions[(v, d)] = v2
    alphabet = EventAlphabet(env.doors, frozenset(env.doors))
    dfa = Dfa(env.regions, alphabet, initial_region, transitions, frozenset(env.regions))
    return trim(dfa)


def run_language(motion: Dfa, stutter: bool, regions: Optional[Sequence[str]] = None) -> Dfa:
    """Region words realisable as runs of the motion automaton.

    With ``stutter`` the agent may repeat its current region (dwell);
    without it every consecutive region pair must be door-connected.
    The empty word is always included.  ``regions`` may name a larger
    alphabet than the motion model reaches (unreachable regions then have
    no runs).
    """
    if regions is None:
        regions = motion.states
    elif not set(motion.states) <= set(regions):
        raise InputError("the region alphabet must cover the motion model's states")
    alphabet = EventAlphabet(tuple(regions))
    regions = motion.states
    start = "@start"
    transitions: dict[tuple[str, str], str] = {(start, motion.initial): motion.initial}
    steps = {(v, motion.transitions[(v, d)]) for (v, d) in motion.transitions}
    for v, v2 in steps:
        transitions[(v, v2)] = v2
    if stutter:
        for v in regions:
            transitions[(v, v)] = v
    return Dfa((start,) + regions, alphabet, start, transitions,
               frozenset((start,) + regions))


# -- integrated-plan construction -----------------------------------------


def _interleave(mission: Dfa, pi: LabelingMap, initial_region: str) -> Dfa:
    """Insert region symbols in front of the mission events they relocate.

    The construction tracks the agent's region through the mission
    automaton.  A mission event doable in the current region keeps the
    region; otherwise a committed region move is inserted first.  Reaching
    the mission's initial state back in the initial region closes the loop
    through the plan's entry state, which re-asserts the initial region at
    every mission cycle.
    """
    regions = pi.regions
    if set(regions) & set(mission.alphabet.events):
        raise InputError("region labels collide with mission events")
    for e in mission.alphabet.events:
        pi.of(e)  # raises for unlabelled events
    alphabet = EventAlphabet(
        tuple(regions) + tuple(mission.alphabet.events),
        frozenset(regions) | mission.alphabet.controllable,
    )
    entry = "entry"
    home = (mission.initial, initial_region)

    def node(q: str, v: str) -> str:
        return f"{q}@{v}"

    def move_node(q: str, v: str, v2: str) -> str:
        return f"{q}@{v}>{v2}"

    transitions: dict[tuple[str, str], str] = {(entry, initial_region): node(*home)}
    states = {entry, node(*home)}
    queue = deque([home])
    seen = {home}

    def target(q2: str, v2: str) -> str:
        if (q2, v2) == home:
            return entry
        pair = (q2, v2)
        if pair not in seen:
            seen.add(pair)
            queue.append(pair)
        return node(q2, v2)

    while queue:
        q, v = queue.popleft()
        src = node(q, v)
        moves: dict[str, list[str]] = {}
        for e in mission.alphabet.events:
            q2 = mission.transitions.get((q, e))
            if q2 is None:
                continue
            placements = pi.ordered(e)
            if v in placements:
                transitions[(src, e)] = target(q2, v)
            for v2 in placements:
                if v2 != v:
                    moves.setdefault(v2, []).append(e)
        for v2, events in moves.items():
            mid = move_node(q, v, v2)
            states.add(mid)
            transitions[(src, v2)] = mid
            for e in events:
                q2 = mission.transitions[(q, e)]
                transitions[(mid, e)] = target(q2, v2)
    states |= {node(q, v) for q, v in seen}
    ordered = (entry,) + tuple(sorted(states - {entry}))
    dfa = Dfa(ordered, alphabet, entry, transitions, frozenset(ordered))
    return trim(dfa)


def lift_mission_to_regions(mission: Dfa, pi: LabelingMap, initial_region: str) -> Dfa:
    """Region itinerary of a mission plan: substitute events by their regions,
    merge consecutive duplicates, and anchor each cycle at the initial region."""
    lp = _interleave(mission, pi, initial_region)
    return minimize(project(lp, pi.regions))


def mp_membership(t: Word, lifted_mission: Dfa) -> int:
    """1 iff the prefix language of t satisfies the lifted mission."""
    probe = word_dfa(t, lifted_mission.alphabet)
    return 1 if satisfies(probe, lifted_mission) is None else 0


class MotionTeacher:
    """Teacher of the motion-plan learner: memberships against the lifted
    mission, conjectures against it plus run-containment in the motion model."""

    def __init__(self, lifted: Dfa, motion: Dfa):
        self.lifted = lifted
        self.runs = run_language(motion, stutter=True, regions=lifted.alphabet.events)

    def membership(self, word: Word) -> int:
        return mp_membership(word, self.lifted)

    def conjecture(self, dfa: Dfa) -> Optional[Word]:
        difference = language_equal(dfa, self.lifted)
        if difference is not None:
            return difference
        witness = language_subset(dfa, self.runs)
        assert witness is None, "accepted motion plan must stay within the motion model"
        return None

    @property
    def generation(self) -> int:
        return 0


def _first_unconnected(word: Word, motion: Dfa) -> tuple[str, str]:
    steps = {(v, motion.transitions[(v, d)]) for (v, d) in motion.transitions}
    previous: Optional[str] = None
    for v in word:
        if previous is not None and v != previous and (previous, v) not in steps:
            return previous, v
        previous = v
    if word and word[0] != motion.initial:
        return motion.initial, word[0]
    raise AssertionError(f"no unconnected pair in {word}")


def synthesize_motion_plan(
    mission: Dfa,
    pi: LabelingMap,
    motion: Dfa,
    initial_region: str,
    log: Optional[LearnLog] = None,
) -> Dfa:
    """Learn an adequate motion plan for a mission plan.

    Raises :class:`MotionInfeasible` when the lifted mission requires a
    region change the motion model cannot perform.  The result satisfies
    both adequacy clauses, which are re-checked directly on the output.
    """
    lifted = lift_mission_to_regions(mission, pi, initial_region)
    runs = run_language(motion, stutter=True, regions=lifted.alphabet.events)
    witness = language_subset(lifted, runs)
    if witness is not None:
        raise MotionInfeasible(_first_unconnected(witness, motion))
    teacher = MotionTeacher(lifted, motion)
    plan = minimize(learn(teacher, lifted.alphabet, log=log))
    assert satisfies(plan, lifted) is None, "motion plan must satisfy the lifted mission"
    assert language_subset(plan, runs) is None, "motion plan must stay within the motion model"
    return plan


def door_profile(motion_plan: Dfa, motion: Dfa) -> Dfa:
    """Door words whose strict runs trace a region word of the motion plan."""
    witness = language_subset(
        motion_plan, run_language(motion, stutter=True, regions=motion_plan.alphabet.events)
    )
    if witness is not None:
        raise InputError(f"motion plan leaves the motion model at {' '.join(witness)}")
    p0 = motion_plan.transitions.get((motion_plan.initial, motion.initial))
    if p0 is None or p0 not in motion_plan.marked:
        return empty_dfa(motion.alphabet)
    start = (motion.initial, p0)
    order = [start]
    seen = {start}
    transitions: dict[tuple[str, str], str] = {}
    queue = deque(order)

    def name(v: str, p: str) -> str:
        return f"{v}|{p}"

    while queue:
        v, p = queue.popleft()
        for d in motion.alphabet.events:
            v2 = motion.transitions.get((v, d))
            if v2 is None:
                continue
            p2 = motion_plan.transitions.get((p, v2))
            if p2 is None or p2 not in motion_plan.marked:
                continue
            transitions[(name(v, p), d)] = name(v2, p2)
            if (v2, p2) not in seen:
                seen.add((v2, p2))
                order.append((v2, p2))
                queue.append((v2, p2))
    states = tuple(name(v, p) for v, p in order)
    dfa = Dfa(states, motion.alphabet, name(*start), transitions, frozenset(states))
    return minimize(dfa)


@dataclass(frozen=True)
class IntegratedPlan:
    """A mission-motion plan with its projections and door profile."""

    agent: str
    dfa: Dfa
    mission: Dfa
    motion_plan: Dfa
    profile: Dfa
    initial_region: str
    labeling: LabelingMap


def integrate(
    mission: Dfa,
    motion_plan: Dfa,
    pi: LabelingMap,
    initial_region: str,
    motion: Dfa,
    agent: str = "agent",
    check_depth: int = 12,
) -> IntegratedPlan:
    """Interleave a mission plan with region moves into an integrated plan.

    The projections of the result recover both inputs exactly, and the
    three defining clauses are validated (clause two by walking every plan
    word up to the check depth).
    """
    lp = _interleave(mission, pi, initial_region)
    mission_back = minimize(project(lp, mission.alphabet.events))
    delta = language_equal(mission_back, mission)
    if delta is not None:
        raise AssertionError(f"integration altered the mission at {' '.join(delta) or 'ε'}")
    motion_back = minimize(project(lp, pi.regions))
    delta = language_equal(motion_back, motion_plan)
    if delta is not None:
        raise AssertionError(f"motion plan inadequate for the mission at {' '.join(delta) or 'ε'}")
    validate_integrated_clauses(lp, pi, initial_region, motion, check_depth)
    profile = door_profile(motion_plan, motion)
    return IntegratedPlan(agent, lp, mission, motion_plan, profile, initial_region, pi)


def validate_integrated_clauses(
    lp: Dfa, pi: LabelingMap, initial_region: str, motion: Dfa, depth: int
) -> None:
    """Check the three integrated-plan clauses; raises AssertionError on failure."""
    regions = set(pi.regions)
    for e in lp.alphabet.events:
        first = lp.transitions.get((lp.initial, e))
        assert first is None or e == initial_region, (
            f"plan must start with the initial region, found {e!r}"
        )
    # clause 2 on every word of bounded length, clause 1 covered above
    frontier: list[tuple[str, Optional[str]]] = [(lp.initial, None)]
    for _ in range(depth):
        nxt: list[tuple[str, Optional[str]]] = []
        for state, previous in frontier:
            for e in lp.alphabet.events:
                to = lp.transitions.get((state, e))
                if to is None:
                    continue
                if e not in regions and previous is not None:
                    if previous in regions:
                        assert previous in pi.of(e), (
                            f"event {e!r} fired in region {previous!r} outside π({e!r})"
                        )
                    else:
                        assert pi.of(previous) & pi.of(e), (
                            f"consecutive events {previous!r},{e!r} disagree on their region"
                        )
                nxt.append((to, e))
        frontier = nxt
    witness = language_subset(
        minimize(project(lp, pi.regions)),
        run_language(motion, stutter=True, regions=pi.regions),
    )
    assert witness is None, f"motion component not executable at {' '.join(witness)}"


# -- replanning ------------------------------------------------------------


@dataclass
class _PlanWord:
    symbols: list[str]
    loop_to: Optional[int]  # prefix length at which the final transition re-enters


def _enumerate_plan_words(dfa: Dfa, limit: int = 10_000) -> list[_PlanWord]:
    """All maximal plan words; a cycle is truncated to one unrolling u·v."""
    words: list[_PlanWord] = []

    def walk(state: str, path: list[str], positions: dict[str, int]) -> None:
        if len(words) > limit:
            raise AssertionError("plan enumeration limit exceeded")
        extended = False
        for e in dfa.alphabet.events:
            nxt = dfa.transitions.get((state, e))
            if nxt is None:
                continue
            extended = True
            if nxt in positions:
                words.append(_PlanWord(path + [e], positions[nxt]))
                continue
            positions[nxt] = len(path) + 1
            walk(nxt, path + [e], positions)
            del positions[nxt]
        if not extended:
            words.append(_PlanWord(list(path), None))

    walk(dfa.initial, [], {dfa.initial: 0})
    return words


def _shortest_region_path(env: Environment, source: str, target: str) -> Optional[list[str]]:
    """Shortest door-connected region path, ties broken lexicographically."""
    usable = sorted(v2 for (v, v2), doors in env.door_map.items() if doors and v == source)
    parents: dict[str, Optional[str]] = {source: None}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        if v == target:
            path = [v]
            while parents[path[-1]] is not None:
                path.append(parents[path[-1]])  # type: ignore[arg-type]
            return list(reversed(path))
        neighbours = sorted(v2 for (u, v2), doors in env.door_map.items() if u == v and doors)
        for v2 in neighbours:
            if v2 not in parents:
                parents[v2] = v
                queue.append(v2)
    return None


def replan(lp: IntegratedPlan, nominal_motion: Dfa, real_env: Environment) -> IntegratedPlan:
    """Adapt an integrated plan to the real environment.

    Region changes that keep at least one door are left untouched (the
    door profile is simply recomputed against the real environment, which
    drops words through missing doors).  A region change with no door left
    is bridged by the shortest intermediate region path of the real
    environment; the plan is rebuilt with the inserted regions.  Mission
    event sequences are never altered.
    """
    if set(real_env.regions) != set(nominal_motion.states) or not set(
        nominal_motion.alphabet.events
    ) <= set(real_env.doors):
        raise InputError("real environment must share regions and doors with the nominal model")
    witness = language_subset(
        lp.motion_plan, run_language(nominal_motion, stutter=True, regions=lp.labeling.regions)
    )
    assert witness is None, "plan was not adequate for its nominal motion model"
    real = motion_dfa(real_env, lp.initial_region)
    regions = set(lp.labeling.regions)
    words = _enumerate_plan_words(lp.dfa)
    rebuilt: list[_PlanWord] = []
    changed = False
    for word in words:
        symbols: list[str] = []
        offsets: dict[int, int] = {0: 0}
        current: Optional[str] = None
        for idx, symbol in enumerate(word.symbols):
            if symbol in regions and current is not None and symbol != current:
                if not real_env.doors_between(current, symbol):
                    path = _shortest_region_path(real_env, current, symbol)
                    if path is None:
                        raise ReplanInfeasible((current, symbol))
                    symbols.extend(path[1:-1])
                    changed = True
            symbols.append(symbol)
            if symbol in regions:
                current = symbol
            offsets[idx + 1] = len(symbols)
        loop_to = None if word.loop_to is None else offsets[word.loop_to]
        rebuilt.append(_PlanWord(symbols, loop_to))

    if changed:
        new_dfa = _plan_from_words(rebuilt, lp.dfa.alphabet)
        mission_back = minimize(project(new_dfa, lp.mission.alphabet.events))
        delta = language_equal(mission_back, lp.mission)
        assert delta is None, "replanning must preserve the mission projection"
    else:
        new_dfa = lp.dfa
    new_motion_plan = minimize(project(new_dfa, lp.labeling.regions))
    witness = language_subset(
        new_motion_plan, run_language(real, stutter=True, regions=lp.labeling.regions)
    )
    assert witness is None, "replanned motion must be executable in the real environment"
    profile = door_profile(new_motion_plan, real)
    return IntegratedPlan(
        lp.agent, new_dfa, lp.mission, new_motion_plan, profile, lp.initial_region, lp.labeling
    )


def _plan_from_words(words: Sequence[_PlanWord], alphabet: EventAlphabet) -> Dfa:
    """Deterministic trie over the plan words, with cycle edges restored."""
    root = "n0"
    states = [root]
    children: dict[tuple[str, str], str] = {}

    def extend(state: str, symbol: str) -> str:
        key = (state, symbol)
        if key not in children:
            name = f"n{len(states)}"
            states.append(name)
            children[key] = name
        return children[key]

    transitions: dict[tuple[str, str], str] = {}
    for word in words:
        node = root
        path_nodes = [root]
        for i, symbol in enumerate(word.symbols):
            last = i == len(word.symbols) - 1
            if last and word.loop_to is not None:
                transitions[(node, symbol)] = path_nodes[word.loop_to]
                break
            node = extend(node, symbol)
            transitions[(path_nodes[-1], symbol)] = node
            path_nodes.append(node)
    return minimize(Dfa(tuple(states), alphabet, root, transitions, frozenset(states)))


# -- simulation -------------------------------------------------------------


@dataclass
class SimulationResult:
    trace: list[str]
    completed: bool
    deadlock: Optional[str] = None

    def text(self) -> str:
        return "\n".join(self.trace) + ("\n" if self.trace else "")


@dataclass
class _Walker:
    plan: IntegratedPlan
    state: str
    region: Optional[str] = None
    consumed: list[str] = field(default_factory=list)
    believed: dict[tuple[str, str], tuple[str, ...]] = field(default_factory=dict)
    replans: int = 0


def simulate(
    plans: Sequence[IntegratedPlan],
    env: Environment,
    schedule: Sequence[tuple[int, str, str]] = (),
    max_steps: int = 200,
    stop_event: Optional[str] = None,
    nominal_motion: Optional[Dfa] = None,
) -> SimulationResult:
    """Step the integrated plans against the environment and a door schedule.

    Region symbols are private to their agent; mission events shared by
    several plans fire jointly.  One action executes per step: pending
    region moves first (by agent order), then the least enabled mission
    event.  When a believed door turns out closed the agent replans
    against the effectively open environment and continues; each replan
    adds one trace line.  Trace lines read "step agent symbol kind".
    """
    doors_open: dict[str, bool] = {d: True for d in env.doors}
    timetable: dict[int, list[tuple[str, str]]] = {}
    for step_at, door, state in schedule:
        if door not in doors_open:
            raise InputError(f"schedule mentions unknown door {door!r}")
        if state not in ("open", "closed"):
            raise InputError(f"door state must be open or closed, got {state!r}")
        timetable.setdefault(step_at, []).append((door, state))

    if not plans:
        return SimulationResult([], True)
    walkers = [
        _Walker(lp, lp.dfa.initial, believed=dict(env.door_map)) for lp in plans
    ]
    nominal_motions = [
        nominal_motion or motion_dfa(env, lp.initial_region) for lp in plans
    ]
    mission_owners: dict[str, list[int]] = {}
    for i, lp in enumerate(plans):
        for e in lp.mission.alphabet.events:
            mission_owners.setdefault(e, []).append(i)
    region_sets = [set(lp.labeling.regions) for lp in plans]
    trace: list[str] = []
    fired_stop = False

    def effective_env() -> Environment:
        closed = {d for d, is_open in doors_open.items() if not is_open}
        return env.without_doors(closed)

    for step in range(max_steps):
        for door, state in timetable.get(step, ()):
            doors_open[door] = state == "open"
        if fired_stop:
            return SimulationResult(trace, True)

        # replan any agent whose believed doors for its next move are stale
        for i, w in enumerate(walkers):
            for v2 in _next_region_moves(w, region_sets[i]):
                if w.region is None or v2 == w.region:
                    continue
                believed = w.believed.get((w.region, v2), ())
                if any(not doors_open[d] for d in believed):
                    _replan_walker(w, step, effective_env(), nominal_motions[i], trace)
                    break

        moves: list[tuple[int, str]] = []
        for i, w in enumerate(walkers):
            for v2 in _next_region_moves(w, region_sets[i]):
                if w.region is None or v2 == w.region:
                    moves.append((i, v2))
                elif any(doors_open[d] for d in effective_env().doors_between(w.region, v2)):
                    moves.append((i, v2))
        if moves:
            i, v2 = moves[0]
            w = walkers[i]
            w.state = w.plan.dfa.transitions[(w.state, v2)]
            w.region = v2
            w.consumed.append(v2)
            trace.append(f"{step} {w.plan.agent} {v2} region")
            continue

        enabled: list[str] = []
        for event, owners in sorted(mission_owners.items()):
            if all(
                walkers[i].plan.dfa.transitions.get((walkers[i].state, event)) is not None
                for i in owners
            ):
                enabled.append(event)
        if not enabled:
            snapshot = "; ".join(
                f"{w.plan.agent}@{w.state}({w.region or '-'})" for w in walkers
            )
            return SimulationResult(trace, False, deadlock=snapshot)
        event = enabled[0]
        for i in mission_owners[event]:
            w = walkers[i]
            w.state = w.plan.dfa.transitions[(w.state, event)]
            w.consumed.append(event)
            trace.append(f"{step} {w.plan.agent} {event} mission")
        if stop_event is not None and event == stop_event:
            fired_stop = True
    return SimulationResult(trace, fired_stop or stop_event is None)


def _next_region_moves(w: _Walker, regions: set[str]) -> list[str]:
    return [
        e
        for e in w.plan.dfa.alphabet.events
        if e in regions and (w.state, e) in w.plan.dfa.transitions
    ]


def _replan_walker(
    w: _Walker,
    step: int,
    effective: Environment,
    nominal_motion: Dfa,
    trace: list[str],
) -> None:
    new_plan = replan(w.plan, nominal_motion, effective)
    state = new_plan.dfa.initial
    for symbol in w.consumed:
        nxt = new_plan.dfa.transitions.get((state, symbol))
        while nxt is None:
            # fast-forward through regions spliced behind the agent
            inserted = [
                e for e in new_plan.dfa.alphabet.events
                if e in set(new_plan.labeling.regions) and (state, e) in new_plan.dfa.transitions
            ]
            if not inserted:
                raise AssertionError("cannot resume the replanned plan")
            state = new_plan.dfa.transitions[(state, inserted[0])]
            nxt = new_plan.dfa.transitions.get((state, symbol))
        state = nxt
    w.plan = new_plan
    w.state = state
    w.believed = dict(effective.door_map)
    w.replans += 1
    trace.append(f"{step} {new_plan.agent} {w.region or '-'} replan")


# -- environment & labeling file formats ------------------------------------


def environment_to_text(env: Environment) -> str:
    lines = [
        "regions: " + " ".join(env.regions),
        "doors: " + " ".join(env.doors),
        "adjacency:",
    ]
    for v, v2 in env.adjacency:
        lines.append(f"{v} {v2}")
    lines.append("doormap:")
    for v, v2 in env.adjacency:
        if (v, v2) in env.door_map:
            lines.append(f"{v} {v2} " + " ".join(env.door_map[(v, v2)]))
    lines.append("initial:")
    for agent in sorted(env.initial_regions):
        lines.append(f"{agent} {env.initial_regions[agent]}")
    return "\n".join(lines) + "\n"


def environment_from_text(text: str, source: str = "<string>") -> Environment:
    regions: list[str] = []
    doors: list[str] = []
    adjacency: list[tuple[str, str]] = []
    door_map: dict[tuple[str, str], tuple[str, ...]] = {}
    initial: dict[str, str] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lowered = line.lower()
        if lowered.startswith("regions:"):
            regions = line.split(":", 1)[1].split()
            continue
        if lowered.startswith("doors:"):
            doors = line.split(":", 1)[1].split()
            continue
        if lowered in ("adjacency:", "doormap:", "initial:"):
            section = lowered[:-1]
            continue
        parts = line.split()
        if section == "adjacency":
            if len(parts) != 2:
                raise InputError(f"{source}:{lineno}: adjacency wants 'from to'")
            adjacency.append((parts[0], parts[1]))
        elif section == "doormap":
            if len(parts) < 2:
                raise InputError(f"{source}:{lineno}: doormap wants 'from to doors...'")
            door_map[(parts[0], parts[1])] = tuple(parts[2:])
        elif section == "initial":
            if len(parts) != 2:
                raise InputError(f"{source}:{lineno}: initial wants 'agent region'")
            initial[parts[0]] = parts[1]
        else:
            raise InputError(f"{source}:{lineno}: unexpected line {line!r}")
    try:
        return Environment(tuple(regions), tuple(adjacency), tuple(doors), door_map, initial)
    except InputError as exc:
        raise InputError(f"{source}: {exc}") from None


def labeling_from_text(text: str, regions: Sequence[str], source: str = "<string>") -> dict[str, LabelingMap]:
    """Parse 'agent event region...' lines into one labeling map per agent."""
    per_agent: dict[str, dict[str, frozenset[str]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 3:
            raise InputError(f"{source}:{lineno}: labeling wants 'agent event region...'")
        agent, event, targets = parts[0], parts[1], parts[2:]
        per_agent.setdefault(agent, {})[event] = frozenset(targets)
    return {
        agent: LabelingMap(tuple(regions), mapping) for agent, mapping in per_agent.items()
    }


def labeling_to_text(labelings: Mapping[str, LabelingMap]) -> str:
    lines = []
    for agent in sorted(labelings):
        pi = labelings[agent]
        for event in sorted(pi.mapping):
            lines.append(f"{agent} {event} " + " ".join(pi.ordered(event)))
    return "\n".join(lines) + "\n"


def schedule_from_text(text: str, source: str = "<string>") -> list[tuple[int, str, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InputError(f"{source}:{lineno}: schedule wants 'step door open|closed'")
        try:
            step = int(parts[0])
        except ValueError:
            raise InputError(f"{source}:{lineno}: step must be an integer") from None
        out.append((step, parts[1], parts[2]))
    return out
