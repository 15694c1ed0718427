"""Kripke frames, frame morphisms, products, and isomorphism search.

A frame stores one equivalence relation per agent as dense class labels:
``partitions[a][s]`` is the class of state ``s`` for agent ``a``, and two
states are related for ``a`` exactly when their labels are equal.  All
structures are immutable; every operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Sequence


@dataclass(frozen=True)
class KripkeFrame:
    """States plus one equivalence partition per agent.

    Labels are dense per agent (0..num_classes-1, numbered by first
    occurrence).  Construct through :func:`new_frame`, which canonicalizes
    arbitrary labels.  Zero-state frames are allowed; they arise from
    product updates whose preconditions enable nothing.
    """

    state_count: int
    agent_count: int
    partitions: tuple[tuple[int, ...], ...]  # [agent][state] -> class label

    def label(self, agent: int, state: int) -> int:
        return self.partitions[agent][state]

    def related(self, agent: int, u: int, v: int) -> bool:
        return self.partitions[agent][u] == self.partitions[agent][v]

    def num_classes(self, agent: int) -> int:
        row = self.partitions[agent]
        return max(row) + 1 if row else 0

    @cached_property
    def classes_by_agent(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        """For each agent, the states of each class, class index order."""
        out = []
        for a in range(self.agent_count):
            row = self.partitions[a]
            buckets: list[list[int]] = [[] for _ in range(self.num_classes(a))]
            for s, c in enumerate(row):
                buckets[c].append(s)
            out.append(tuple(tuple(b) for b in buckets))
        return tuple(out)

    def class_members(self, agent: int, cls: int) -> tuple[int, ...]:
        return self.classes_by_agent[agent][cls]

    def states(self) -> range:
        return range(self.state_count)


@dataclass(frozen=True)
class FrameMorphism:
    """A total map of states, ``mapping[u]`` = image of state ``u``."""

    mapping: tuple[int, ...]

    def __call__(self, state: int) -> int:
        return self.mapping[state]


def new_frame(
    state_count: int,
    agent_count: int,
    partitions: Sequence[Sequence[Hashable]],
) -> KripkeFrame:
    """Build a canonical frame from per-agent labelings.

    Labels may be any hashable values; they are renumbered densely per
    agent in order of first occurrence (gaps are silently closed).
    Raises ValueError on shape mismatch.
    """
    if state_count < 0 or agent_count < 1:
        raise ValueError("state_count must be >= 0 and agent_count >= 1")
    if len(partitions) != agent_count:
        raise ValueError(
            f"expected {agent_count} agent labelings, got {len(partitions)}"
        )
    canon: list[tuple[int, ...]] = []
    for a, row in enumerate(partitions):
        row = list(row)
        if len(row) != state_count:
            raise ValueError(
                f"agent {a}: labeling covers {len(row)} states, frame has {state_count}"
            )
        seen: dict[Hashable, int] = {}
        dense = []
        for lbl in row:
            if lbl not in seen:
                seen[lbl] = len(seen)
            dense.append(seen[lbl])
        canon.append(tuple(dense))
    return KripkeFrame(state_count, agent_count, tuple(canon))


def is_proper(frame: KripkeFrame) -> bool:
    """True iff no two distinct states are related for every agent."""
    seen: set[tuple[int, ...]] = set()
    for s in frame.states():
        sig = tuple(frame.partitions[a][s] for a in range(frame.agent_count))
        if sig in seen:
            return False
        seen.add(sig)
    return True


def product(
    f: KripkeFrame, g: KripkeFrame
) -> tuple[KripkeFrame, FrameMorphism, FrameMorphism]:
    """Cartesian product frame plus its two projections.

    States are pairs in row-major order (s * |G| + t); a pair is related
    for an agent exactly when both components are.  The projections are
    Kripke frame morphisms.
    """
    if f.agent_count != g.agent_count:
        raise ValueError("product requires equal agent counts")
    nf, ng = f.state_count, g.state_count
    partitions = []
    for a in range(f.agent_count):
        row = [
            f.partitions[a][s] * g.num_classes(a) + g.partitions[a][t]
            if g.num_classes(a)
            else 0
            for s in range(nf)
            for t in range(ng)
        ]
        partitions.append(row)
    prod = new_frame(nf * ng, f.agent_count, partitions)
    proj_f = FrameMorphism(tuple(s for s in range(nf) for _ in range(ng)))
    proj_g = FrameMorphism(tuple(t for _ in range(nf) for t in range(ng)))
    return prod, proj_f, proj_g


def is_morphism(f: FrameMorphism, src: KripkeFrame, dst: KripkeFrame) -> bool:
    """Check u ~_a v implies f(u) ~_a f(v) for all pairs and agents.

    Raises ValueError if the map is not total on src or hits an
    out-of-range codomain index.
    """
    if len(f.mapping) != src.state_count:
        raise ValueError("morphism map must be total on the source frame")
    for img in f.mapping:
        if not 0 <= img < dst.state_count:
            raise ValueError(f"codomain index {img} out of range")
    # per agent, every source class must land inside one target class
    for a in range(src.agent_count):
        for members in src.classes_by_agent[a]:
            first = dst.partitions[a][f.mapping[members[0]]]
            for s in members[1:]:
                if dst.partitions[a][f.mapping[s]] != first:
                    return False
    return True


def compose_morphisms(outer: FrameMorphism, inner: FrameMorphism) -> FrameMorphism:
    """outer after inner: state u maps to outer(inner(u))."""
    return FrameMorphism(tuple(outer.mapping[x] for x in inner.mapping))


def identity_morphism(frame: KripkeFrame) -> FrameMorphism:
    return FrameMorphism(tuple(range(frame.state_count)))


def _refine_colors(f: KripkeFrame, g: KripkeFrame) -> tuple[list[int], list[int]]:
    """Joint color refinement of two frames.

    Colors are comparable across the frames: states that could correspond
    under an isomorphism always get equal colors.  Used as pruning before
    the backtracking search.
    """
    cf = [0] * f.state_count
    cg = [0] * g.state_count
    while True:
        table: dict[tuple, int] = {}

        def signature(frame: KripkeFrame, colors: list[int], s: int) -> tuple:
            sig = [colors[s]]
            for a in range(frame.agent_count):
                members = frame.classes_by_agent[a][frame.partitions[a][s]]
                sig.append(tuple(sorted(colors[t] for t in members)))
            return tuple(sig)

        nf = [table.setdefault(signature(f, cf, s), len(table)) for s in f.states()]
        ng = [table.setdefault(signature(g, cg, s), len(table)) for s in g.states()]
        if nf == cf and ng == cg:
            return cf, cg
        cf, cg = nf, ng


def find_isomorphism(f: KripkeFrame, g: KripkeFrame) -> FrameMorphism | None:
    """Search for a bijective morphism whose inverse is a morphism.

    Color refinement plus per-agent class signatures prune the search;
    intended for desk-scale frames (a few hundred states).  Returns the
    witness map or None.
    """
    if f.state_count != g.state_count or f.agent_count != g.agent_count:
        return None
    for a in range(f.agent_count):
        sizes_f = sorted(len(c) for c in f.classes_by_agent[a])
        sizes_g = sorted(len(c) for c in g.classes_by_agent[a])
        if sizes_f != sizes_g:
            return None
    cf, cg = _refine_colors(f, g)
    if sorted(cf) != sorted(cg):
        return None

    by_color: dict[int, list[int]] = {}
    for t, c in enumerate(cg):
        by_color.setdefault(c, []).append(t)
    # most-constrained first: rarest color, then index for determinism
    order = sorted(f.states(), key=lambda s: (len(by_color.get(cf[s], ())), s))

    n_agents = f.agent_count
    mapping: list[int] = [-1] * f.state_count
    used = [False] * g.state_count
    cls_fwd: list[dict[int, int]] = [{} for _ in range(n_agents)]
    cls_rev: list[dict[int, int]] = [{} for _ in range(n_agents)]

    def assign(s: int, t: int) -> list[tuple[int, int]] | None:
        """Try f(s)=t; returns the class-pairings added, or None on clash."""
        added: list[tuple[int, int]] = []
        for a in range(n_agents):
            cs, ct = f.partitions[a][s], g.partitions[a][t]
            bound = cls_fwd[a].get(cs)
            if bound is not None:
                if bound != ct:
                    break
                continue
            if ct in cls_rev[a]:
                break
            if len(f.classes_by_agent[a][cs]) != len(g.classes_by_agent[a][ct]):
                break
            cls_fwd[a][cs] = ct
            cls_rev[a][ct] = cs
            added.append((a, cs))
        else:
            return added
        for a, cs in added:
            del cls_rev[a][cls_fwd[a].pop(cs)]
        return None

    def search(pos: int) -> bool:
        if pos == len(order):
            return True
        s = order[pos]
        for t in by_color.get(cf[s], ()):
            if used[t]:
                continue
            added = assign(s, t)
            if added is None:
                continue
            mapping[s] = t
            used[t] = True
            if search(pos + 1):
                return True
            used[t] = False
            mapping[s] = -1
            for a, cs in added:
                del cls_rev[a][cls_fwd[a].pop(cs)]
        return False

    if search(0):
        return FrameMorphism(tuple(mapping))
    return None


def are_isomorphic(f: KripkeFrame, g: KripkeFrame) -> bool:
    return find_isomorphism(f, g) is not None


# ---------------------------------------------------------------------------
# serialization

def agent_name(i: int) -> str:
    """Process display names: p, q, r, ... then a<i>."""
    if 0 <= i < 11:
        return chr(ord("p") + i)
    return f"a{i}"


def frame_to_json(frame: KripkeFrame) -> dict:
    return {
        "states": frame.state_count,
        "agents": frame.agent_count,
        "partitions": [list(row) for row in frame.partitions],
    }


def frame_from_json(data: dict) -> KripkeFrame:
    return new_frame(int(data["states"]), int(data["agents"]), data["partitions"])


def frame_to_dot(frame: KripkeFrame, node_labels: Sequence[str] | None = None) -> str:
    """DOT rendering: one node per state, one undirected edge per related
    pair, edge labels the comma-joined names of the relating agents."""
    lines = ["graph frame {", "  node [shape=circle];"]
    for s in frame.states():
        text = node_labels[s] if node_labels is not None else str(s)
        lines.append(f'  s{s} [label="{text}"];')
    for u in frame.states():
        for v in range(u + 1, frame.state_count):
            agents = [
                agent_name(a)
                for a in range(frame.agent_count)
                if frame.related(a, u, v)
            ]
            if agents:
                lines.append(f'  s{u} -- s{v} [label="{",".join(agents)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
