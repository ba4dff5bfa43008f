"""Sparse cost models for assignment problems and their LP duals.

Three problem classes share one storage scheme:

* ``LapInstance``: equal-size vertex and label sets, the assignment is a
  bijection restricted to per-vertex allowed labels.
* ``IlapInstance``: a dummy label (``DUMMY``) may absorb any number of
  vertices; each non-dummy label is used at most once.  Vertex and label
  counts are unrelated.
* ``IqapInstance``: an ILAP plus pairwise costs on a loopless graph over the
  vertices.  Pairwise entries that are not stored are zero.

Costs are kept per vertex as a sorted tuple of allowed labels with a parallel
cost tuple.  Integer-valued costs are stored as Python ints so that integral
instances can be processed in exact arithmetic.  Instances are immutable
after construction and safe to share across threads or processes.

Every tolerance comparison in the package goes through the instance's
``atol``: the configured relative knob ``tolerance`` scaled by
``1 + max_abs_cost``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

DUMMY = -1

Assignment = Sequence[int]


class FeasibilityError(ValueError):
    """An assignment or primal vector violates the problem constraints."""


class DualInfeasibleError(ValueError):
    """A dual vector violates the dual constraints beyond tolerance."""


@dataclass(frozen=True)
class Violation:
    """Diagnosis of the first violated constraint found by a check."""

    kind: str
    message: str
    vertex: int | None = None
    label: int | None = None

    def __str__(self) -> str:
        return self.message


def _as_cost(value, where: str):
    if isinstance(value, bool):
        raise TypeError(f"{where}: boolean is not a valid cost")
    if isinstance(value, int):
        return value
    x = float(value)
    if not math.isfinite(x):
        raise ValueError(f"{where}: cost must be finite, got {value!r}")
    if x.is_integer() and abs(x) <= 2.0**53:
        return int(x)
    return x


def _normalize_rows(allowed, costs, num_labels: int, *, dummy_required: bool):
    """Sort each per-vertex label list, validate it, and normalize costs.

    Returns (allowed rows, cost rows, max abs cost) as nested tuples.
    """
    if len(allowed) != len(costs):
        raise ValueError("allowed and costs must have one entry per vertex")
    low = DUMMY if dummy_required else 0
    rows = []
    cost_rows = []
    max_abs = 0
    for v, (labs, cs) in enumerate(zip(allowed, costs)):
        labs = list(labs)
        cs = list(cs)
        if len(labs) != len(cs):
            raise ValueError(f"vertex {v}: label list and cost list differ in length")
        if not labs:
            raise ValueError(f"vertex {v}: needs at least one allowed label")
        pairs = sorted(zip(labs, (_as_cost(c, f"vertex {v}") for c in cs)))
        prev = None
        for lab, _ in pairs:
            if lab == prev:
                raise ValueError(f"vertex {v}: duplicate allowed label {lab}")
            if not (low <= lab < num_labels):
                raise ValueError(f"vertex {v}: label {lab} out of range")
            prev = lab
        if dummy_required and pairs[0][0] != DUMMY:
            raise ValueError(f"vertex {v}: dummy label missing from allowed set")
        rows.append(tuple(lab for lab, _ in pairs))
        cost_rows.append(tuple(c for _, c in pairs))
        row_max = max(abs(c) for c in cost_rows[-1])
        if row_max > max_abs:
            max_abs = row_max
    return tuple(rows), tuple(cost_rows), max_abs


class _BaseInstance:
    """Shared helpers for the two unary instance classes."""

    num_vertices: int
    num_labels: int
    allowed: tuple[tuple[int, ...], ...]
    costs: tuple[tuple, ...]

    def _finish_init(self, vertex_names, label_names, tolerance: float):
        if tolerance < 0:
            raise ValueError("tolerance must be non-negative")
        self.tolerance = float(tolerance)
        self._index = tuple(
            {lab: i for i, lab in enumerate(row)} for row in self.allowed
        )
        self.integral = all(
            isinstance(c, int) for row in self.costs for c in row
        )
        vfl = [[] for _ in range(self.num_labels)]
        for v, row in enumerate(self.allowed):
            for lab in row:
                if lab != DUMMY:
                    vfl[lab].append(v)
        self.vertices_for_label = tuple(tuple(vs) for vs in vfl)
        self.vertex_names = tuple(vertex_names) if vertex_names else None
        self.label_names = tuple(label_names) if label_names else None
        if self.vertex_names and len(self.vertex_names) != self.num_vertices:
            raise ValueError("vertex_names length mismatch")
        if self.label_names and len(self.label_names) != self.num_labels:
            raise ValueError("label_names length mismatch")

    @property
    def atol(self) -> float:
        return self.tolerance * (1 + self.max_abs_cost)

    def allows(self, v: int, lab: int) -> bool:
        return lab in self._index[v]

    def label_index(self, v: int, lab: int) -> int:
        """Position of ``lab`` inside ``allowed[v]``; KeyError if disallowed."""
        return self._index[v][lab]

    def cost(self, v: int, lab: int):
        return self.costs[v][self._index[v][lab]]

    def vertex_name(self, v: int) -> str:
        return self.vertex_names[v] if self.vertex_names else str(v)

    def label_name(self, lab: int) -> str:
        if lab == DUMMY:
            return "#"
        return self.label_names[lab] if self.label_names else str(lab)


class LapInstance(_BaseInstance):
    """Square assignment instance: n vertices, n labels, bijective solutions."""

    def __init__(self, allowed, costs, *, vertex_names=None, label_names=None,
                 tolerance: float = 1e-9):
        n = len(allowed)
        self.num_vertices = n
        self.num_labels = n
        self.allowed, self.costs, self.max_abs_cost = _normalize_rows(
            allowed, costs, n, dummy_required=False)
        self._finish_init(vertex_names, label_names, tolerance)

    def replace_tolerance(self, tolerance: float) -> "LapInstance":
        return LapInstance(self.allowed, self.costs,
                           vertex_names=self.vertex_names,
                           label_names=self.label_names,
                           tolerance=tolerance)

    def __repr__(self):
        return f"LapInstance(n={self.num_vertices}, pairs={sum(map(len, self.allowed))})"


class IlapInstance(_BaseInstance):
    """Assignment instance with a dummy label allowed for every vertex.

    ``num_labels`` counts only the non-dummy labels; the dummy is the
    sentinel ``DUMMY`` and must appear in every allowed list.
    """

    def __init__(self, allowed, costs, num_labels: int, *, vertex_names=None,
                 label_names=None, tolerance: float = 1e-9):
        self.num_vertices = len(allowed)
        self.num_labels = num_labels
        self.allowed, self.costs, self.max_abs_cost = _normalize_rows(
            allowed, costs, num_labels, dummy_required=True)
        self._finish_init(vertex_names, label_names, tolerance)

    def dummy_cost(self, v: int):
        return self.costs[v][self._index[v][DUMMY]]

    def scale_costs(self, factor: int) -> "IlapInstance":
        """New instance with every cost multiplied by ``factor``."""
        scaled = tuple(tuple(c * factor for c in row) for row in self.costs)
        return IlapInstance(self.allowed, scaled, self.num_labels,
                            vertex_names=self.vertex_names,
                            label_names=self.label_names,
                            tolerance=self.tolerance)

    def replace_tolerance(self, tolerance: float) -> "IlapInstance":
        return IlapInstance(self.allowed, self.costs, self.num_labels,
                            vertex_names=self.vertex_names,
                            label_names=self.label_names,
                            tolerance=tolerance)

    def __repr__(self):
        return (f"IlapInstance(vertices={self.num_vertices}, "
                f"labels={self.num_labels})")


class PairwiseEdge:
    """Pairwise costs of one unordered vertex pair, stored with ``u < v``.

    ``cells`` maps ``(label of u, label of v)`` to a cost; absent cells are
    zero.  ``rows_local``/``cols_local`` hold the same data grouped by the
    local index of the label inside ``allowed[u]``/``allowed[v]``, which is
    the layout the reparametrization sweeps operate on.
    """

    __slots__ = ("u", "v", "cells", "rows_local", "cols_local", "max_abs_cost")

    def __init__(self, u: int, v: int, cells: Mapping, unary: IlapInstance):
        if u == v:
            raise ValueError(f"pairwise edge ({u}, {v}) is a loop")
        if u > v:
            u, v = v, u
            cells = {(l, k): c for (k, l), c in cells.items()}
        self.u = u
        self.v = v
        norm = {}
        rows: dict[int, list] = {}
        cols: dict[int, list] = {}
        max_abs = 0
        for (k, l), c in cells.items():
            where = f"edge ({u}, {v}) cell ({k}, {l})"
            if not unary.allows(u, k):
                raise ValueError(f"{where}: label {k} not allowed for vertex {u}")
            if not unary.allows(v, l):
                raise ValueError(f"{where}: label {l} not allowed for vertex {v}")
            if (k, l) in norm:
                raise ValueError(f"{where}: duplicate cell")
            c = _as_cost(c, where)
            norm[(k, l)] = c
            ki = unary.label_index(u, k)
            li = unary.label_index(v, l)
            rows.setdefault(ki, []).append((li, c))
            cols.setdefault(li, []).append((ki, c))
            if abs(c) > max_abs:
                max_abs = abs(c)
        self.cells = norm
        self.rows_local = rows
        self.cols_local = cols
        self.max_abs_cost = max_abs


class IqapInstance:
    """ILAP core plus sparse pairwise costs over a vertex graph."""

    def __init__(self, unary: IlapInstance, edges: Iterable = ()):
        self.unary = unary
        built = []
        seen = set()
        for u, v, cells in edges:
            edge = PairwiseEdge(u, v, cells, unary)
            if not (0 <= edge.u < unary.num_vertices
                    and 0 <= edge.v < unary.num_vertices):
                raise ValueError(f"edge ({u}, {v}) references unknown vertex")
            if (edge.u, edge.v) in seen:
                raise ValueError(f"duplicate edge ({edge.u}, {edge.v})")
            seen.add((edge.u, edge.v))
            built.append(edge)
        built.sort(key=lambda e: (e.u, e.v))
        self.edges = tuple(built)
        self._edge_by_pair = {(e.u, e.v): e for e in built}
        pair_max = max((e.max_abs_cost for e in built), default=0)
        self.max_abs_cost = max(unary.max_abs_cost, pair_max)
        self.integral = unary.integral and all(
            isinstance(c, int) for e in built for c in e.cells.values())

    @property
    def num_vertices(self) -> int:
        return self.unary.num_vertices

    @property
    def num_labels(self) -> int:
        return self.unary.num_labels

    @property
    def tolerance(self) -> float:
        return self.unary.tolerance

    @property
    def atol(self) -> float:
        return self.unary.tolerance * (1 + self.max_abs_cost)

    def edge_between(self, u: int, v: int) -> PairwiseEdge | None:
        if u > v:
            u, v = v, u
        return self._edge_by_pair.get((u, v))

    def pairwise_cost(self, u: int, v: int, k: int, l: int):
        """Cost of labeling ``u`` with ``k`` and ``v`` with ``l`` (0 if unstored)."""
        edge = self.edge_between(u, v)
        if edge is None:
            raise ValueError(f"no edge between vertices {u} and {v}")
        if not self.unary.allows(u, k):
            raise ValueError(f"label {k} not allowed for vertex {u}")
        if not self.unary.allows(v, l):
            raise ValueError(f"label {l} not allowed for vertex {v}")
        key = (k, l) if u == edge.u else (l, k)
        return edge.cells.get(key, 0)

    def replace_tolerance(self, tolerance: float) -> "IqapInstance":
        return IqapInstance(self.unary.replace_tolerance(tolerance),
                            [(e.u, e.v, e.cells) for e in self.edges])

    def __repr__(self):
        return (f"IqapInstance(vertices={self.num_vertices}, "
                f"labels={self.num_labels}, edges={len(self.edges)})")


def unary_part(inst) -> _BaseInstance:
    """The unary instance behind any of the three problem classes."""
    return inst.unary if isinstance(inst, IqapInstance) else inst


# ---------------------------------------------------------------------------
# Assignments


def check_feasible(inst, x: Assignment) -> Violation | None:
    """Diagnose the first constraint ``x`` violates, or None if feasible."""
    unary = unary_part(inst)
    n = unary.num_vertices
    if len(x) != n:
        return Violation("dimension",
                         f"assignment has {len(x)} entries, expected {n}")
    for v, lab in enumerate(x):
        if not unary.allows(v, lab):
            return Violation(
                "disallowed",
                f"vertex {v} takes label {lab}, not in its allowed set",
                v, lab)
    seen: dict[int, int] = {}
    skip_dummy = not isinstance(unary, LapInstance)
    for v, lab in enumerate(x):
        if skip_dummy and lab == DUMMY:
            continue
        if lab in seen:
            return Violation(
                "duplicate",
                f"label {lab} assigned to both vertex {seen[lab]} and vertex {v}",
                v, lab)
        seen[lab] = v
    return None


def require_feasible(inst, x: Assignment) -> None:
    viol = check_feasible(inst, x)
    if viol is not None:
        raise FeasibilityError(viol.message)


def lap_objective(inst: LapInstance, x: Assignment):
    require_feasible(inst, x)
    return sum(inst.cost(v, lab) for v, lab in enumerate(x))


def ilap_objective(inst: IlapInstance, x: Assignment):
    require_feasible(inst, x)
    return sum(inst.cost(v, lab) for v, lab in enumerate(x))


def iqap_objective(inst: IqapInstance, x: Assignment):
    require_feasible(inst, x)
    total = sum(inst.unary.cost(v, lab) for v, lab in enumerate(x))
    for e in inst.edges:
        total += e.cells.get((x[e.u], x[e.v]), 0)
    return total


def objective(inst, x: Assignment):
    """Objective of ``x`` for whichever problem class ``inst`` belongs to."""
    if isinstance(inst, IqapInstance):
        return iqap_objective(inst, x)
    if isinstance(inst, IlapInstance):
        return ilap_objective(inst, x)
    return lap_objective(inst, x)


# ---------------------------------------------------------------------------
# Dual vectors


@dataclass
class LapDual:
    """Vertex potentials ``alpha`` and label potentials ``beta``."""

    alpha: list
    beta: list


@dataclass
class IlapDual:
    """Vertex potentials and non-positive potentials for non-dummy labels."""

    alpha: list
    beta: list


def dual_feasible(inst, dual, tol: float | None = None) -> Violation | None:
    """Diagnose the first dual constraint violated beyond ``tol``.

    ``tol`` defaults to the instance ``atol``.  Dimension mismatches raise
    ValueError; constraint violations are returned as a diagnosis.
    """
    unary = unary_part(inst)
    if tol is None:
        tol = inst.atol
    if len(dual.alpha) != unary.num_vertices:
        raise ValueError("alpha length does not match the vertex count")
    if isinstance(unary, LapInstance):
        if not isinstance(dual, LapDual):
            raise ValueError("expected a LapDual for a LapInstance")
        if len(dual.beta) != unary.num_labels:
            raise ValueError("beta length does not match the label count")
        for v, (labs, cs) in enumerate(zip(unary.allowed, unary.costs)):
            av = dual.alpha[v]
            for lab, c in zip(labs, cs):
                if c - av - dual.beta[lab] < -tol:
                    return Violation(
                        "dual",
                        f"dual constraint violated at vertex {v}, label {lab}",
                        v, lab)
        return None
    if not isinstance(dual, IlapDual):
        raise ValueError("expected an IlapDual for this instance")
    if len(dual.beta) != unary.num_labels:
        raise ValueError("beta length does not match the non-dummy label count")
    for lab, b in enumerate(dual.beta):
        if b > tol:
            return Violation("dual", f"beta[{lab}] = {b} exceeds zero", None, lab)
    for v, (labs, cs) in enumerate(zip(unary.allowed, unary.costs)):
        av = dual.alpha[v]
        for lab, c in zip(labs, cs):
            b = dual.beta[lab] if lab != DUMMY else 0
            if c - av - b < -tol:
                return Violation(
                    "dual",
                    f"dual constraint violated at vertex {v}, label {lab}",
                    v, lab)
    return None


def require_dual_feasible(inst, dual, tol: float | None = None) -> None:
    viol = dual_feasible(inst, dual, tol)
    if viol is not None:
        raise DualInfeasibleError(viol.message)


def dual_objective(inst, dual):
    """Sum of all dual variables (beta runs over non-dummy labels for ILAP)."""
    unary = unary_part(inst)
    if len(dual.alpha) != unary.num_vertices or len(dual.beta) != unary.num_labels:
        raise ValueError("dual dimensions do not match the instance")
    return sum(dual.alpha) + sum(dual.beta)


# ---------------------------------------------------------------------------
# Primal vectors (mu), used by the mapping and oracle checks

PrimalVector = Mapping[int, Mapping[int, float]]


def _primal_entry(mu: PrimalVector, v: int, lab: int):
    row = mu.get(v)
    if row is None:
        return 0
    return row.get(lab, 0)


def lap_primal_feasible(inst: LapInstance, mu: PrimalVector,
                        tol: float | None = None) -> Violation | None:
    if tol is None:
        tol = inst.atol
    n = inst.num_vertices
    col = [0] * inst.num_labels
    for v in range(n):
        row_sum = 0
        for lab, value in mu.get(v, {}).items():
            if not inst.allows(v, lab):
                return Violation("disallowed",
                                 f"mu[{v}][{lab}] set on a disallowed pair", v, lab)
            if value < -tol:
                return Violation("negative", f"mu[{v}][{lab}] = {value} < 0", v, lab)
            row_sum += value
            col[lab] += value
        if abs(row_sum - 1) > tol:
            return Violation("row", f"mu row {v} sums to {row_sum}, expected 1", v)
    for lab, s in enumerate(col):
        if abs(s - 1) > tol:
            return Violation("column", f"mu column {lab} sums to {s}, expected 1",
                             None, lab)
    return None


def ilap_primal_feasible(inst: IlapInstance, mu: PrimalVector,
                         tol: float | None = None) -> Violation | None:
    if tol is None:
        tol = inst.atol
    col = [0] * inst.num_labels
    for v in range(inst.num_vertices):
        row_sum = 0
        for lab, value in mu.get(v, {}).items():
            if not inst.allows(v, lab):
                return Violation("disallowed",
                                 f"mu[{v}][{lab}] set on a disallowed pair", v, lab)
            if value < -tol:
                return Violation("negative", f"mu[{v}][{lab}] = {value} < 0", v, lab)
            row_sum += value
            if lab != DUMMY:
                col[lab] += value
        if abs(row_sum - 1) > tol:
            return Violation("row", f"mu row {v} sums to {row_sum}, expected 1", v)
    for lab, s in enumerate(col):
        if s > 1 + tol:
            return Violation("column", f"mu column {lab} sums to {s} > 1",
                             None, lab)
    return None
