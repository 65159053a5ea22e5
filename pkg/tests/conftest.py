"""Shared test helpers: brute-force oracles and case-study constructions.

The oracles here never call the code paths they check: membership is decided
by stepping transition tables word by word, projections by filtering
symbols, and language comparisons by enumerating words up to a bound.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Iterator, Sequence

import pytest

from cosynth.automata import Dfa, EventAlphabet, Word


def words_up_to(events: Sequence[str], length: int) -> Iterator[Word]:
    for n in range(length + 1):
        for combo in itertools.product(events, repeat=n):
            yield combo


def step_word(dfa: Dfa, word: Word):
    state = dfa.initial
    for symbol in word:
        state = dfa.transitions.get((state, symbol))
        if state is None:
            return None
    return state


def brute_accepts(dfa: Dfa, word: Word) -> bool:
    state = step_word(dfa, word)
    return state is not None and state in dfa.marked


def brute_generates(dfa: Dfa, word: Word) -> bool:
    return step_word(dfa, word) is not None


def lang_set(dfa: Dfa, length: int) -> set[Word]:
    return {w for w in words_up_to(dfa.alphabet.events, length) if brute_accepts(dfa, w)}


def brute_project(word: Word, target: Iterable[str]) -> Word:
    keep = set(target)
    return tuple(s for s in word if s in keep)


def random_dfa(rng: random.Random, max_states: int, events: Sequence[str],
               density: float = 0.8, marked_p: float = 0.5) -> Dfa:
    n = rng.randint(1, max_states)
    states = tuple(str(i) for i in range(n))
    transitions = {}
    for q in states:
        for e in events:
            if rng.random() < density:
                transitions[(q, e)] = rng.choice(states)
    marked = frozenset(q for q in states if rng.random() < marked_p)
    return Dfa(states, EventAlphabet(tuple(events)), "0", transitions, marked)


def cycle_dfa(symbols: Sequence[str], alphabet: EventAlphabet) -> Dfa:
    n = len(symbols)
    states = tuple(str(i) for i in range(n))
    transitions = {(str(i), e): str((i + 1) % n) for i, e in enumerate(symbols)}
    return Dfa(states, alphabet, "0", transitions, frozenset(states))


def chain_dfa(symbols: Sequence[str], alphabet: EventAlphabet, mark_all: bool = False) -> Dfa:
    states = tuple(str(i) for i in range(len(symbols) + 1))
    transitions = {(str(i), e): str(i + 1) for i, e in enumerate(symbols)}
    marked = frozenset(states) if mark_all else frozenset({states[-1]})
    return Dfa(states, alphabet, "0", transitions, marked)


# -- case-study definitions, transcribed from the coordination scenario -----

AGENT1_EVENTS = ("Close", "D1close", "D1open", "G1inR1", "G1inR3", "G2inR1", "Open", "h1", "r")
AGENT2_EVENTS = ("D1open", "F", "G2inR1", "h2", "r")
AGENT3_EVENTS = ("Close", "D1close", "D1open", "G2inR1", "G3inR1", "G3inR3", "Open", "h3", "r")
AGENT1_UC = frozenset({"G2inR1", "h1"})
AGENT2_UC = frozenset({"D1open", "h2"})
AGENT3_UC = frozenset({"G2inR1", "h3"})

STAY1 = ("h1", "G1inR1", "Open", "D1open", "G2inR1", "Close", "D1close", "r")
GO1 = ("h1", "G1inR3", "Open", "D1open", "G2inR1", "Close", "D1close", "G1inR1", "r")
STAY3 = ("h3", "G3inR1", "Open", "D1open", "G2inR1", "Close", "D1close", "r")
GO3 = ("h3", "G3inR3", "Open", "D1open", "G2inR1", "Close", "D1close", "G3inR1", "r")
FIRE2 = ("h2", "F", "D1open", "G2inR1", "r")

REGIONS = ("R1", "R2", "R3")


def agent_alphabets() -> tuple[EventAlphabet, EventAlphabet, EventAlphabet]:
    return (
        EventAlphabet(AGENT1_EVENTS, frozenset(AGENT1_EVENTS) - AGENT1_UC),
        EventAlphabet(AGENT2_EVENTS, frozenset(AGENT2_EVENTS) - AGENT2_UC),
        EventAlphabet(AGENT3_EVENTS, frozenset(AGENT3_EVENTS) - AGENT3_UC),
    )


def branching_mission(first: str, branch_a: Sequence[str], branch_b: Sequence[str],
                      alphabet: EventAlphabet) -> Dfa:
    """Cycle with a two-way branch after the first event."""
    states = ["s0", "s1"]
    transitions = {("s0", first): "s1"}
    for prefix, branch in (("a", branch_a), ("b", branch_b)):
        previous = "s1"
        for i, e in enumerate(branch):
            nxt = "s0" if i == len(branch) - 1 else f"{prefix}{i + 1}"
            if nxt != "s0":
                states.append(nxt)
            transitions[(previous, e)] = nxt
            previous = nxt
    return Dfa(tuple(states), alphabet, "s0", transitions, frozenset(states))


@pytest.fixture(scope="session")
def casestudy():
    """Pipeline config, mission DFA, and decomposed specs for the case study."""
    from cosynth.automata import minimize, parallel_compose_all, load_dfa
    from cosynth.langops import project, widen_alphabet, widen_like
    from cosynth.fixtures import fixture_path
    from cosynth.pipeline import PipelineConfig

    config = PipelineConfig.load(fixture_path("casestudy.cfg"))
    alphabets = [a.alphabet for a in config.agents]
    global_events = tuple(sorted({e for a in alphabets for e in a.events}))
    controlled = {e for a in alphabets for e in a.controllable}
    global_alphabet = EventAlphabet(global_events, frozenset(global_events) & controlled)
    components = [load_dfa(p) for p in config.mission_paths]
    mission = minimize(widen_alphabet(parallel_compose_all(components), global_alphabet))
    specs = [widen_like(minimize(project(mission, a.events)), a) for a in alphabets]
    return {
        "config": config,
        "alphabets": alphabets,
        "global_alphabet": global_alphabet,
        "mission": mission,
        "specs": specs,
    }
