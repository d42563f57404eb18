"""Generating and verifying stepwise-safe collapse sequences.

A sweep consumes the 3-cells of a region one elementary collapse at a
time while the tracked boundary map stays a certified immersion.  The
builders in :mod:`bingruff.meshes` produce regions whose dual graphs are
trees, so a safe order usually exists; :func:`find_safe_sequence` searches
for one with the immersion checker as the arbiter, and
:func:`verify_safe_sequence` replays a constructed order and certifies
every step.
"""

from __future__ import annotations

from .collapse import CollapseStep
from .errors import SearchBudgetExceeded
from .immersion import classify_collapse
from .plmaps import initial_boundary_map


def _parent_map(simps):
    parents = {}
    for s in simps:
        parents.setdefault(s, ())
        for i in range(len(s)):
            f = s[:i] + s[i + 1 :]
            parents[f] = parents.get(f, ()) + (s,)
    return parents


def _free_tet_faces(simps, keep):
    """(tau, sigma) pairs: sigma a live tet, tau its free 2-face not in keep."""
    parents = _parent_map(simps)
    out = []
    for tau, ps in parents.items():
        if len(tau) != 3 or tau in keep or tau not in simps:
            continue
        if len(ps) == 1 and len(ps[0]) == 4:
            out.append((tau, ps[0]))
    return sorted(out)


def verify_safe_sequence(M, steps, bm=None):
    """Push a boundary map through ``steps``, requiring every one safe.

    Returns the final BoundaryMap; raises AssertionError naming the first
    dangerous step otherwise.
    """
    bm = initial_boundary_map(M) if bm is None else bm
    for i, step in enumerate(steps):
        rep = classify_collapse(bm, step)
        assert not rep.dangerous, (
            f"step {i} {step.sigma}|{step.tau} dangerous at {rep.failing_vertices}"
        )
        bm = rep.pushed
    return bm


def find_safe_sequence(M, keep=(), bm=None, budget=20000):
    """Depth-first search for a stepwise-safe (3-cell, 2-face) sweep.

    ``keep`` lists 2-cells that must never be consumed (the intended spine
    walls).  Candidates whose free face already carries part of the
    boundary image are tried first ("front following"), nearest the
    previous step.  Returns (steps, final BoundaryMap).  Raises
    SearchBudgetExceeded if the classification budget runs out, ValueError
    if the space is exhausted with no full sweep.
    """
    keep = frozenset(keep)
    bm0 = initial_boundary_map(M) if bm is None else bm
    simps0 = frozenset(M.simps)
    n_tets = sum(1 for s in simps0 if len(s) == 4)
    calls = [0]

    def rec(simps, bmap, path):
        if sum(1 for s in simps if len(s) == 4) == 0:
            return path, bmap
        cands = _free_tet_faces(simps, keep)
        if not cands:
            return None
        hot = set(bmap.cell_carrier.values())
        last = path[-1].tau if path else None

        def score(pair):
            tau, sigma = pair
            front = 0 if tau in hot else 1
            near = 0 if last is not None and set(tau) & set(last) else 1
            return (front, near, tau, sigma)

        for tau, sigma in sorted(cands, key=score):
            if calls[0] >= budget:
                raise SearchBudgetExceeded(
                    f"no safe sweep within {budget} classifications"
                )
            calls[0] += 1
            step = CollapseStep(sigma, tau)
            rep = classify_collapse(bmap, step)
            if rep.dangerous:
                continue
            got = rec(simps - {sigma, tau}, rep.pushed, path + [step])
            if got is not None:
                return got
        return None

    got = rec(simps0, bm0, [])
    if got is None:
        raise ValueError(f"no stepwise-safe sweep exists for the {n_tets}-tet region")
    return got
