"""Decide inputless-task solvability by exhaustive decision-map search.

A protocol solves a task exactly when there is a knowledge-respecting map
from the protocol model to the task's output model that picks an allowed
tuple for every schedule.  Because output states are related per agent by
decision equality, any such map is determined by one value per (agent,
view-class) pair, so the search runs over decision maps instead of raw
state maps.  Verdicts are deterministic: variables are ordered agent by
agent, classes by first occurrence, values by first tuple occurrence, and
the first satisfying assignment is the certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import simengine
from .kernel import FrameMorphism, is_morphism, is_proper
from .logic import ModelMorphism, is_model_morphism
from .schedules import (
    Abstraction,
    enum_schedules,
    protocol_action_model,
    protocol_model,
)
from .tasks import InputlessTask, Value, output_model
from .topology import morphism_to_simplicial


@dataclass(frozen=True)
class DecisionMap:
    """Per agent, one output value for each of its view-classes."""

    values: tuple[tuple[Value, ...], ...]  # [agent][class] -> value

    def value(self, agent: int, cls: int) -> Value:
        return self.values[agent][cls]


@dataclass(frozen=True)
class SearchStats:
    nodes: int
    backtracks: int
    assignments: int


@dataclass(frozen=True)
class Verdict:
    solvable: bool
    decision: DecisionMap | None
    classes: tuple[tuple[tuple[int, ...], ...], ...]  # [agent][class] -> schedules
    stats: SearchStats

    def __bool__(self) -> bool:
        return self.solvable


class SolverError(ValueError):
    pass


def _class_structure(
    task: InputlessTask, abstraction: Abstraction | None
) -> tuple[tuple[tuple[tuple[int, ...], ...], ...], list[tuple[int, ...]]]:
    """View classes per agent plus, per schedule, its class per agent.

    Classes come from the schedule action model, whose labels are already
    numbered by first-occurring schedule.
    """
    action = protocol_action_model(task.n, task.rounds, abstraction)
    frame = action.frame
    classes = frame.classes_by_agent
    per_schedule = [
        tuple(frame.partitions[a][k] for a in range(frame.agent_count))
        for k in frame.states()
    ]
    return classes, per_schedule


class _Search:
    """Backtracking over (agent, view-class) assignments.

    Live tuple sets per schedule are bitmasks; assigning a value
    intersects them with the value's coordinate mask.  Forced values
    (every live tuple of some schedule agreeing on a coordinate) are
    propagated through a work queue before branching, which never skips a
    solution, so the first one found under the canonical variable and
    value order is still the canonically first certificate.  Variables
    are flattened to dense ints for the hot loop.
    """

    def __init__(
        self,
        task: InputlessTask,
        classes,
        per_schedule,
        keep: Sequence[int] | None = None,
    ):
        tuples = task.output.tuples
        n_agents = task.process_count
        self.variables = [
            (a, c) for a in range(n_agents) for c in range(len(classes[a]))
        ]
        var_id = {v: i for i, v in enumerate(self.variables)}
        n_vars = len(self.variables)
        domains = [task.output.values_for(a) for a in range(n_agents)]
        # per variable: candidate values and the tuple mask of each value
        self.var_values: list[tuple] = [()] * n_vars
        self.var_masks: list[tuple[int, ...]] = [()] * n_vars
        for (a, c), vid in var_id.items():
            self.var_values[vid] = tuple(domains[a])
            self.var_masks[vid] = tuple(
                sum(1 << t for t, out in enumerate(tuples) if out[a] == value)
                for value in domains[a]
            )
        kept = range(len(task.delta_table)) if keep is None else keep
        self.sched_ids = list(kept)
        self.live = [
            sum(1 << t for t in task.delta_table[k]) for k in self.sched_ids
        ]
        self.sched_vars = [
            tuple(var_id[(a, per_schedule[k][a])] for a in range(n_agents))
            for k in self.sched_ids
        ]
        self.touching: list[list[int]] = [[] for _ in range(n_vars)]
        for pos, svars in enumerate(self.sched_vars):
            for vid in svars:
                self.touching[vid].append(pos)
        # only variables under some kept constraint are worth branching on;
        # the rest take their first domain value (their canonical choice)
        self.branch_order = [
            vid for vid in range(n_vars) if self.touching[vid]
        ]
        self.value_of: list = [None] * n_vars
        self.nodes = 0
        self.backtracks = 0
        self.assignments = 0

    def _assign(self, vid: int, choice: int, trail: list) -> bool:
        self.assignments += 1
        self.value_of[vid] = self.var_values[vid][choice]
        trail.append((-1, vid))
        mask = self.var_masks[vid][choice]
        live = self.live
        for pos in self.touching[vid]:
            new = live[pos] & mask
            if new != live[pos]:
                trail.append((pos, live[pos]))
                live[pos] = new
                if not new:
                    return False
                self.queue.append(pos)
        return True

    def _propagate(self, trail: list) -> bool:
        queue = self.queue
        live = self.live
        value_of = self.value_of
        while queue:
            pos = queue.pop()
            lv = live[pos]
            for vid in self.sched_vars[pos]:
                if value_of[vid] is not None:
                    continue
                for choice, mask in enumerate(self.var_masks[vid]):
                    if lv & ~mask == 0:
                        if not self._assign(vid, choice, trail):
                            return False
                        break
        return True

    def _undo(self, trail: list):
        value_of = self.value_of
        live = self.live
        while trail:
            key, old = trail.pop()
            if key < 0:
                value_of[old] = None
            else:
                live[key] = old

    def run(self) -> dict | None:
        """Returns the complete assignment or None when none exists."""
        self.queue: list[int] = list(range(len(self.sched_ids)))
        trail0: list = []
        if not self._propagate(trail0):
            return None
        if not self._search(0):
            return None
        return {
            var: self.value_of[vid]
            if self.value_of[vid] is not None
            else self.var_values[vid][0]
            for vid, var in enumerate(self.variables)
        }

    def _search(self, start: int) -> bool:
        value_of = self.value_of
        order = self.branch_order
        pos = start
        while pos < len(order) and value_of[order[pos]] is not None:
            pos += 1
        if pos == len(order):
            return True
        vid = order[pos]
        self.nodes += 1
        for choice in range(len(self.var_values[vid])):
            trail: list = []
            self.queue = []
            ok = self._assign(vid, choice, trail) and self._propagate(trail)
            if ok and self._search(pos + 1):
                return True
            self._undo(trail)
        self.backtracks += 1
        return False


def solve(
    task: InputlessTask,
    n: int | None = None,
    rounds: int | None = None,
    abstraction: Abstraction | None = None,
) -> Verdict:
    """Complete backtracking search over decision maps.

    Any schedule whose compatible tuple set empties prunes the branch.  A
    Solvable verdict is re-verified through the simulator path before
    being returned.
    """
    n = task.n if n is None else n
    rounds = task.rounds if rounds is None else rounds
    if n != task.n or rounds != task.rounds:
        raise SolverError(
            f"task {task.name!r} is tabulated for n={task.n}, rounds={task.rounds}"
        )
    classes, per_schedule = _class_structure(task, abstraction)
    n_agents = task.process_count

    if task.empty_schedules:
        return Verdict(False, None, classes, SearchStats(0, 0, 0))

    search = _Search(task, classes, per_schedule)
    result = search.run()
    stats = SearchStats(search.nodes, search.backtracks, search.assignments)
    if result is None:
        return Verdict(False, None, classes, stats)
    decision = DecisionMap(
        tuple(
            tuple(result[(a, c)] for c in range(len(classes[a])))
            for a in range(n_agents)
        )
    )
    if not verify_certificate(task, n, rounds, decision, abstraction):
        raise SolverError("internal error: found certificate failed verification")
    return Verdict(True, decision, classes, stats)


def verify_certificate(
    task: InputlessTask,
    n: int,
    rounds: int,
    decision: DecisionMap,
    abstraction: Abstraction | None = None,
) -> bool:
    """Re-check a decision map through the simulator.

    View classes are re-derived by running every schedule in the memory
    simulator and grouping final states, not by reusing the view algebra.
    The induced tuple of every schedule must be allowed, the induced state
    map must be a morphism of Kripke models into the output model, and its
    projection must translate to a chromatic simplicial map onto the
    output complex.  Raises on partial maps or class-count mismatches.
    """
    if n != task.n or rounds != task.rounds:
        raise SolverError(
            f"task {task.name!r} is tabulated for n={task.n}, rounds={task.rounds}"
        )
    scheds = enum_schedules(n, rounds)
    n_agents = task.process_count
    # simulator-side classes, numbered by first occurrence
    sim_class: list[list[int]] = []
    for a in range(n_agents):
        index: dict[object, int] = {}
        row = []
        for sched in scheds:
            state = simengine.run(sched, abstraction).final(a)
            if state not in index:
                index[state] = len(index)
            row.append(index[state])
        sim_class.append(row)
    for a in range(n_agents):
        if len(decision.values[a]) != max(sim_class[a]) + 1:
            raise SolverError(
                f"decision map for agent {a} covers {len(decision.values[a])} "
                f"classes, simulator found {max(sim_class[a]) + 1}"
            )

    for k in range(len(scheds)):
        out = tuple(decision.value(a, sim_class[a][k]) for a in range(n_agents))
        if not task.allows(k, out):
            return False

    # the induced map into the output model is a model morphism
    proto = protocol_model(n, rounds, abstraction)
    out_model, pairing = output_model(task, n, rounds)
    tuple_index = {t: i for i, t in enumerate(task.output.tuples)}
    mapping = []
    for k in range(len(scheds)):
        out = tuple(decision.value(a, sim_class[a][k]) for a in range(n_agents))
        mapping.append(pairing[(k, tuple_index[out])])
    h = ModelMorphism(FrameMorphism(tuple(mapping)))
    if not is_model_morphism(h, proto, out_model):
        return False

    # and its projection onto the output frame is chromatic simplicial
    # (the duality only exists for proper frames; coarse abstractions can
    # leave schedules fully indistinguishable, where the check is vacuous)
    out_frame = task.output.frame
    projected = FrameMorphism(
        tuple(
            tuple_index[
                tuple(decision.value(a, sim_class[a][k]) for a in range(n_agents))
            ]
            for k in range(len(scheds))
        )
    )
    if not is_morphism(projected, proto.frame, out_frame):
        return False
    if is_proper(proto.frame) and is_proper(out_frame):
        morphism_to_simplicial(projected, proto.frame, out_frame)
    return True


def _solve_restricted(
    task: InputlessTask,
    keep: Sequence[int],
    classes,
    per_schedule,
) -> bool:
    """Solvability over a subset of schedules (used for conflict cores).
    Classes stay those of the full model; dropped schedules impose no
    constraint."""
    if any(not task.delta_table[k] for k in keep):
        return False
    return _Search(task, classes, per_schedule, keep).run() is not None


def conflict_core(
    task: InputlessTask, abstraction: Abstraction | None = None
) -> tuple[int, ...]:
    """Greedy shrink of the schedule set keeping unsolvability.

    Drops canonical-order blocks of schedules while unsolvability
    survives, halving the block size down to single deletions.  The final
    single-deletion pass makes the result minimal: removing any one
    member restores solvability.
    """
    classes, per_schedule = _class_structure(task, abstraction)
    everything = range(len(task.delta_table))
    if _solve_restricted(task, everything, classes, per_schedule):
        raise SolverError("conflict core requested for a solvable task")
    core = list(everything)
    chunk = max(1, len(core) // 2)
    while chunk >= 1:
        pos = 0
        while pos < len(core):
            trial = core[:pos] + core[pos + chunk:]
            if not _solve_restricted(task, trial, classes, per_schedule):
                core = trial
            else:
                pos += chunk
        chunk = chunk // 2 if chunk > 1 else 0
    return tuple(core)


def solve_report(
    task: InputlessTask,
    n: int | None = None,
    rounds: int | None = None,
    abstraction: Abstraction | None = None,
) -> dict:
    """Verdict plus class inventories and search statistics, JSON-ready."""
    verdict = solve(task, n, rounds, abstraction)
    scheds = enum_schedules(task.n, task.rounds)
    report = {
        "task": task.name,
        "n": task.n,
        "rounds": task.rounds,
        "solvable": verdict.solvable,
        "states": len(scheds),
        "class_counts": [len(by_agent) for by_agent in verdict.classes],
        "classes": [
            [[scheds[k].text() for k in members] for members in by_agent]
            for by_agent in verdict.classes
        ],
        "search_nodes": verdict.stats.nodes,
        "search_backtracks": verdict.stats.backtracks,
        "search_assignments": verdict.stats.assignments,
    }
    if verdict.solvable:
        report["decision"] = [
            [_value_json(v) for v in per_agent] for per_agent in verdict.decision.values
        ]
    else:
        core = conflict_core(task, abstraction)
        report["conflict_core"] = [scheds[k].text() for k in core]
    return report


def _value_json(value: Value):
    if isinstance(value, tuple):
        return list(value)
    return value


def decision_to_json(task: InputlessTask, verdict: Verdict) -> dict:
    """Certificate file contents: values per class plus class membership
    in canonical schedule order."""
    if not verdict.solvable:
        raise SolverError("no certificate for an unsolvable task")
    scheds = enum_schedules(task.n, task.rounds)
    return {
        "task": task.name,
        "n": task.n,
        "N": task.rounds,
        "decision": [
            [_value_json(v) for v in per_agent] for per_agent in verdict.decision.values
        ],
        "classes": [
            [[scheds[k].text() for k in members] for members in by_agent]
            for by_agent in verdict.classes
        ],
    }
