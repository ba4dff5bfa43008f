"""Exhaustive reference implementations for small instances.

Everything here enumerates the full assignment space and exists only to
cross-check the solvers in tests and in the ``verify`` command.  The code
deliberately shares nothing with the solver modules beyond the data model,
and it refuses instances whose raw search space exceeds the guard.
"""

from __future__ import annotations

from .model import (
    DUMMY,
    DualInfeasibleError,
    FeasibilityError,
    IlapInstance,
    IqapInstance,
    LapInstance,
    dual_feasible,
    ilap_primal_feasible,
    lap_primal_feasible,
)

SEARCH_SPACE_GUARD = 10**6


class GuardExceeded(ValueError):
    """The instance's raw search space is too large for enumeration."""


def search_space_size(inst) -> int:
    """Product of the allowed-label counts over all vertices."""
    unary = inst.unary if isinstance(inst, IqapInstance) else inst
    size = 1
    for labs in unary.allowed:
        size *= len(labs)
    return size


def _check_guard(inst) -> None:
    size = search_space_size(inst)
    if size > SEARCH_SPACE_GUARD:
        raise GuardExceeded(
            f"search space of {size} assignments exceeds the guard of "
            f"{SEARCH_SPACE_GUARD}")


def _enumerate(inst, visit) -> None:
    """Backtracking over feasible assignments, pruning reused labels.

    For square instances every label must be fresh; with a dummy label only
    the non-dummy ones are constrained.  ``visit(x, value)`` is called for
    each complete feasible assignment, where ``value`` is accumulated from
    direct cost lookups (including pairwise terms toward already placed
    neighbors for quadratic instances).
    """
    square = isinstance(inst, LapInstance)
    unary = inst.unary if isinstance(inst, IqapInstance) else inst
    edges_at: list[list] = [[] for _ in range(unary.num_vertices)]
    if isinstance(inst, IqapInstance):
        for e in inst.edges:
            # visit order is 0..n-1, so charge the edge at its later endpoint
            edges_at[e.v].append((e.u, e.cells, False))
    n = unary.num_vertices
    x = [DUMMY] * n
    used = 0  # bitmask over non-dummy labels

    def place(v: int, partial):
        nonlocal used
        if v == n:
            visit(list(x), partial)
            return
        for lab, c in zip(unary.allowed[v], unary.costs[v]):
            if lab == DUMMY:
                if square:
                    continue
            else:
                bit = 1 << lab
                if used & bit:
                    continue
                used |= bit
            x[v] = lab
            value = partial + c
            for other, cells, _ in edges_at[v]:
                value += cells.get((x[other], lab), 0)
            place(v + 1, value)
            if lab != DUMMY:
                used &= ~(1 << lab)
        x[v] = DUMMY

    place(0, 0)


def brute_force_optimum(inst):
    """Exact optimum and the complete set of optimal assignments.

    Returns ``(value, assignments)``; for a square instance with no perfect
    matching returns ``(None, [])``.  Two sweeps over the search space: one
    to find the optimum, one to collect every assignment within the
    tolerance window (exact equality for integral instances).
    """
    _check_guard(inst)
    best = None

    def track(_x, value):
        nonlocal best
        if best is None or value < best:
            best = value

    _enumerate(inst, track)
    if best is None:
        return None, []
    window = 0 if inst.integral else inst.atol
    optima = []

    def collect(x, value):
        if value <= best + window:
            optima.append(x)

    _enumerate(inst, collect)
    return best, optima


def minimally_assignable_pairs(inst) -> set[tuple[int, int]]:
    """Pairs (vertex, label) realized by at least one optimal assignment."""
    _, optima = brute_force_optimum(inst)
    pairs = set()
    for x in optima:
        for v, lab in enumerate(x):
            pairs.add((v, lab))
    return pairs


def _labels_unused_somewhere(optima, num_labels: int) -> set[int]:
    """Non-dummy labels left unassigned by at least one optimal assignment."""
    out = set()
    for x in optima:
        used = set(lab for lab in x if lab != DUMMY)
        for lab in range(num_labels):
            if lab not in used:
                out.add(lab)
    return out


def _active_pairs(inst, dual) -> set[tuple[int, int]]:
    atol = inst.atol
    is_square = isinstance(inst, LapInstance)
    active = set()
    for v, (labs, cs) in enumerate(zip(inst.allowed, inst.costs)):
        av = dual.alpha[v]
        for lab, c in zip(labs, cs):
            if is_square:
                b = dual.beta[lab]
            else:
                b = 0 if lab == DUMMY else dual.beta[lab]
            if c - av - b <= atol:
                active.add((v, lab))
    return active


def check_dual_relative_interior(inst, dual) -> bool:
    """Whether ``dual`` lies in the relative interior of the dual optima.

    The tight constraints must be exactly the minimally assignable pairs.
    For dummy-label instances the sign constraints on the label potentials
    are part of the system as well: a potential must vanish exactly when
    some optimal assignment leaves its label unused.
    """
    if not isinstance(inst, (LapInstance, IlapInstance)):
        raise TypeError("dual checks cover unary instances only")
    viol = dual_feasible(inst, dual)
    if viol is not None:
        raise DualInfeasibleError(viol.message)
    _check_guard(inst)
    _, optima = brute_force_optimum(inst)
    pairs = set()
    for x in optima:
        for v, lab in enumerate(x):
            pairs.add((v, lab))
    if _active_pairs(inst, dual) != pairs:
        return False
    if isinstance(inst, LapInstance):
        return True
    atol = inst.atol
    zero_beta = {lab for lab, b in enumerate(dual.beta) if b >= -atol}
    return zero_beta == _labels_unused_somewhere(optima, inst.num_labels)


def check_primal_relative_interior(inst, mu) -> bool:
    """Whether ``mu`` lies in the relative interior of the primal optima.

    The support of ``mu`` must be exactly the minimally assignable pairs;
    for dummy-label instances a label's column mass must hit one exactly
    when every optimal assignment uses that label.
    """
    if isinstance(inst, LapInstance):
        viol = lap_primal_feasible(inst, mu)
    elif isinstance(inst, IlapInstance):
        viol = ilap_primal_feasible(inst, mu)
    else:
        raise TypeError("primal checks cover unary instances only")
    if viol is not None:
        raise FeasibilityError(viol.message)
    _check_guard(inst)
    _, optima = brute_force_optimum(inst)
    pairs = set()
    for x in optima:
        for v, lab in enumerate(x):
            pairs.add((v, lab))
    atol = inst.atol
    support = set()
    for v, row in mu.items():
        for lab, value in row.items():
            if value > atol:
                support.add((v, lab))
    if support != pairs:
        return False
    if isinstance(inst, LapInstance):
        return True
    col = [0] * inst.num_labels
    for v, row in mu.items():
        for lab, value in row.items():
            if lab != DUMMY:
                col[lab] += value
    saturated = {lab for lab, s in enumerate(col) if s >= 1 - atol}
    always_used = set(range(inst.num_labels)) - _labels_unused_somewhere(
        optima, inst.num_labels)
    return saturated == always_used
