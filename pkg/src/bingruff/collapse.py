"""Elementary collapses and collapse-sequence search.

A free face is a simplex contained in exactly one other simplex; removing
the pair is an elementary collapse.  Freeness is monotone while collapsing
(coface counts only drop), which lets :class:`_Collapser` maintain the set
of available pairs incrementally and support undo for backtracking search.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .complex_core import Complex, Subcomplex, facets
from .errors import DeltaTooLarge, IllegalStep, SearchBudgetExceeded

EXHAUSTIVE_TOP_LIMIT = 60


@dataclass(frozen=True)
class CollapseStep:
    """One elementary collapse: remove ``sigma`` and its free face ``tau``."""

    sigma: tuple
    tau: tuple
    dim_sigma: int = field(default=-1)

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(self.sigma))
        object.__setattr__(self, "tau", tuple(self.tau))
        if self.dim_sigma < 0:
            object.__setattr__(self, "dim_sigma", len(self.sigma) - 1)
        assert set(self.tau) < set(self.sigma)
        assert len(self.sigma) == len(self.tau) + 1
        assert self.dim_sigma == len(self.sigma) - 1


@dataclass(frozen=True)
class RetractionRecord:
    """Where the removed points of one step map.

    The elementary retraction sends ``|sigma|`` onto ``∂sigma ∖ int(tau)``
    by central projection away from ``center``, a point chosen outside
    ``sigma`` past the free face so that the whole of ``tau`` projects onto
    the far faces.  Coordinates are frozen at application time.
    """

    step: CollapseStep
    v_op: int  # vertex of sigma opposite tau
    b_tau: tuple  # barycenter of tau
    center: tuple  # projection center: 2*b_tau - v_op

    @classmethod
    def from_complex(cls, c, step):
        (v_op,) = set(step.sigma) - set(step.tau)
        b_tau = np.mean([c.verts[v] for v in step.tau], axis=0)
        center = 2.0 * b_tau - c.verts[v_op]
        return cls(step, v_op, tuple(b_tau), tuple(center))


@dataclass(frozen=True)
class CollapseSequence:
    """An ordered legal run of elementary collapses from ``start``.

    ``end`` is the subcomplex of ``start`` left after all steps; replaying
    the steps must be legal at each point and land on ``end`` exactly.
    """

    steps: tuple
    start: Complex
    end: Subcomplex

    @classmethod
    def from_steps(cls, start, steps):
        steps = tuple(steps)
        remaining = replay(start, steps)
        return cls(steps, start, Subcomplex(start, remaining))

    def __len__(self):
        return len(self.steps)


class _Collapser:
    """Mutable collapse state over a fixed starting simplex set.

    ``free`` maps each currently free face to its unique coface.  While only
    applying steps, a face's free coface can never change (counts only
    drop), so one entry per tau is enough; undo repairs the neighborhood.
    """

    __slots__ = ("simps", "parents", "free", "_by_sigma", "_heap")

    def __init__(self, c):
        self.simps = set(c.simps if isinstance(c, Complex) else c)
        self.parents = {s: set() for s in self.simps}
        for s in self.simps:
            if len(s) > 1:
                for f in facets(s):
                    self.parents[f].add(s)
        self.free = {}
        self._by_sigma = {}
        self._heap = []
        for t in self.simps:
            p = self._free_parent(t)
            if p is not None:
                self._add_pair(t, p)

    def _free_parent(self, t):
        ps = self.parents.get(t)
        if ps is None or len(ps) != 1:
            return None
        (s,) = ps
        return s if not self.parents[s] else None

    def _add_pair(self, t, s):
        if self.free.get(t) != s:
            self.free[t] = s
            self._by_sigma.setdefault(s, set()).add(t)
            heapq.heappush(self._heap, (-(len(s) - 1), t, s))

    def _drop_pair(self, t):
        s = self.free.pop(t, None)
        if s is not None:
            group = self._by_sigma.get(s)
            if group is not None:
                group.discard(t)
                if not group:
                    del self._by_sigma[s]

    def _neighborhood(self, tau, sigma):
        cells = set(facets(sigma)) | set(facets(tau))
        for f in list(cells):
            if len(f) > 1:
                cells.update(facets(f))
        return cells

    def _refresh(self, cells):
        for t in cells:
            p = self._free_parent(t) if t in self.simps else None
            if self.free.get(t) != p:
                self._drop_pair(t)
                if p is not None:
                    self._add_pair(t, p)

    def is_legal(self, tau, sigma):
        return (
            tau in self.simps
            and sigma in self.simps
            and self.parents.get(tau) == {sigma}
            and not self.parents.get(sigma)
        )

    def apply(self, tau, sigma):
        assert self.is_legal(tau, sigma), (tau, sigma)
        self.simps.discard(sigma)
        self.simps.discard(tau)
        for f in facets(sigma):
            self.parents[f].discard(sigma)
        if len(tau) > 1:
            for f in facets(tau):
                self.parents[f].discard(tau)
        self._drop_pair(tau)
        for t in list(self._by_sigma.get(sigma, ())):
            self._drop_pair(t)
        self._refresh(self._neighborhood(tau, sigma))

    def undo(self, tau, sigma):
        self.simps.add(sigma)
        self.simps.add(tau)
        for f in facets(sigma):
            self.parents[f].add(sigma)
        if len(tau) > 1:
            for f in facets(tau):
                self.parents[f].add(tau)
        cells = self._neighborhood(tau, sigma) | {tau, sigma}
        for s in cells:
            for t in list(self._by_sigma.get(s, ())):
                self._drop_pair(t)
        self._refresh(cells)

    def pop_greedy(self):
        """Best available pair under (highest dim, lexicographic), or None."""
        while self._heap:
            _, t, s = self._heap[0]
            if self.free.get(t) == s and self.is_legal(t, s):
                return t, s
            heapq.heappop(self._heap)
        return None

    def free_pairs(self):
        return sorted((t, s) for t, s in self.free.items() if self.is_legal(t, s))

    def current_dim(self):
        return max((len(s) - 1 for s in self.simps), default=-1)


def free_faces(c):
    """All (tau, sigma) pairs where tau's only coface is sigma.

    Sorted lexicographically by vertex ids (tau first, then sigma).
    """
    return _Collapser(c).free_pairs()


def collapse_step(c, step):
    """Apply one elementary collapse, returning the smaller complex."""
    tau, sigma = step.tau, step.sigma
    if sigma not in c.simps or tau not in c.simps or not set(tau) < set(sigma):
        raise IllegalStep(f"pair not incident in complex: {tau} < {sigma}")
    if c.parents(tau) != (sigma,) or c.parents(sigma):
        raise IllegalStep(f"{tau} is not a free face of {sigma}")
    remaining = set(c.simps)
    remaining.discard(sigma)
    remaining.discard(tau)
    return c.replace(simplices=remaining, _closed=True)


def replay(start, steps):
    """Simplex set left after replaying steps; raises IllegalStep if stuck."""
    col = _Collapser(start)
    for st in steps:
        if not col.is_legal(st.tau, st.sigma):
            raise IllegalStep(f"step ({st.tau}, {st.sigma}) illegal during replay")
        col.apply(st.tau, st.sigma)
    return frozenset(col.simps)


def collapse_to_spine(c, strategy="greedy", seed=0, top_limit=EXHAUSTIVE_TOP_LIMIT):
    """Collapse until no free face remains.

    greedy
        Highest-dimension step first, lexicographic tie-break.
    random
        Uniform choice among available pairs, from ``seed``.
    exhaustive
        Backtracking search minimizing the dimension of the final spine;
        refuses inputs with more than ``top_limit`` top simplices.
    """
    col = _Collapser(c)
    steps = []
    if strategy == "greedy":
        while True:
            pair = col.pop_greedy()
            if pair is None:
                break
            col.apply(*pair)
            steps.append(CollapseStep(pair[1], pair[0]))
    elif strategy == "random":
        rng = np.random.default_rng(seed)
        while True:
            pairs = col.free_pairs()
            if not pairs:
                break
            t, s = pairs[rng.integers(len(pairs))]
            col.apply(t, s)
            steps.append(CollapseStep(s, t))
    elif strategy == "exhaustive":
        if len(c.top_simplices()) > top_limit:
            raise SearchBudgetExceeded(
                f"{len(c.top_simplices())} top simplices > limit {top_limit}"
            )
        _, best = _exhaustive(col, {})
        for t, s in best:
            col.apply(t, s)
            steps.append(CollapseStep(s, t))
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    end = Subcomplex(c, frozenset(col.simps))
    return CollapseSequence(tuple(steps), c, end)


def _exhaustive(col, memo):
    state = frozenset(col.simps)
    hit = memo.get(state)
    if hit is not None:
        return hit
    pairs = col.free_pairs()
    if not pairs:
        result = (col.current_dim(), ())
    else:
        best = None
        for t, s in sorted(pairs, key=lambda p: (-(len(p[1]) - 1), p)):
            col.apply(t, s)
            d, suffix = _exhaustive(col, memo)
            col.undo(t, s)
            if best is None or d < best[0]:
                best = (d, ((t, s),) + suffix)
            if best[0] == 0:
                break
        result = best
    memo[state] = result
    return result


# -- geometric partial collapse ------------------------------------------


@dataclass(frozen=True)
class PartialCollapseRecord:
    """Homeomorphism record for one partial collapse."""

    step: CollapseStep
    new_vertex: object  # vertex id, or None when tau is a vertex
    moved: dict  # vertex id -> (old coords, new coords)
    support: tuple  # top cells of the sliver left in place of sigma


def partial_collapse(c, step, delta):
    """Push the free face ``tau`` into ``sigma``, stopping ``delta`` short.

    The output is PL-homeomorphic to the input: ``tau`` is subdivided at its
    barycenter (when it has positive dimension) and the new vertex moves
    toward the opposite vertex of ``sigma``, denting ``|sigma|`` to within
    Hausdorff distance ``delta`` of the fully collapsed image.  Nothing
    outside ``sigma`` moves.
    """
    assert delta > 0
    tau, sigma = step.tau, step.sigma
    if c.parents(tau) != (sigma,) or c.parents(sigma):
        raise IllegalStep(f"{tau} is not a free face of {sigma}")
    (v_op,) = set(sigma) - set(tau)
    b_tau = np.mean([c.verts[v] for v in tau], axis=0)
    axis = b_tau - c.verts[v_op]
    reach = float(np.linalg.norm(axis))
    if delta >= reach:
        raise DeltaTooLarge(f"delta {delta} >= feature size {reach}")
    target = c.verts[v_op] + (delta / reach) * axis

    if len(tau) == 1:
        # the free vertex belongs to sigma only; slide it toward the far end
        verts = dict(c.verts)
        old = tuple(verts[tau[0]])
        verts[tau[0]] = target
        rec = PartialCollapseRecord(step, None, {tau[0]: (old, tuple(target))}, (sigma,))
        return c.replace(vertices=verts, _closed=True), rec

    m = max(c.verts) + 1
    verts = dict(c.verts)
    verts[m] = target
    simps = set(c.simps)
    simps.discard(sigma)
    simps.discard(tau)
    slivers = []
    for rho in facets(tau):
        slivers.append(tuple(sorted((m,) + rho + (v_op,))))
        simps.add(tuple(sorted((m,) + rho)))  # dented copy of tau
    simps.update(slivers)
    out = Complex(verts, simps, c.labels)
    rec = PartialCollapseRecord(step, m, {m: (tuple(b_tau), tuple(target))}, tuple(slivers))
    return out, rec


# -- sequence serialization ----------------------------------------------


def serialize_cseq(steps):
    lines = []
    for st in steps:
        lines.append(
            "c "
            + " ".join(str(v) for v in st.sigma)
            + " | "
            + " ".join(str(v) for v in st.tau)
        )
    return "\n".join(lines) + ("\n" if lines else "")


def parse_cseq(text):
    steps = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("c "):
            raise ValueError(f"unrecognized line: {raw!r}")
        left, _, right = line[2:].partition("|")
        sigma = tuple(int(v) for v in left.split())
        tau = tuple(int(v) for v in right.split())
        steps.append(CollapseStep(sigma, tau))
    return steps


__all__ = [
    "CollapseStep",
    "CollapseSequence",
    "RetractionRecord",
    "PartialCollapseRecord",
    "free_faces",
    "collapse_step",
    "collapse_to_spine",
    "partial_collapse",
    "replay",
    "serialize_cseq",
    "parse_cseq",
]
