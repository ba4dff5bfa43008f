"""Reparametrization state and edge-wise message passing.

The dual of the pairwise relaxation splits into messages ``phi`` (one value
per directed edge endpoint and label) and label potentials ``beta``.  A
message shifts cost between an edge and one of its endpoint unaries without
changing any assignment's total cost:

* reparametrized unary: original cost plus all outgoing messages,
* reparametrized pairwise: stored cost minus the two incoming messages.

``mplp_pp_edge_update`` performs one handshake on an edge: it absorbs both
endpoint unaries (with ``beta`` subtracted from non-dummy labels) into the
edge and returns half of each min-marginal to each side.  Afterwards the
edge's reparametrized pairwise costs are non-negative and vanish at the
joint minimizer, and the lower bound cannot decrease.  One pass applies the
update once per edge in ascending endpoint order.

Per-edge minima exploit the sparse cell pattern: rows or columns without
stored cells reduce to a minimum over the opposite unary vector alone.
"""

from __future__ import annotations

from .model import DUMMY, IqapInstance


class IqapDualState:
    """Mutable dual state: messages, label potentials, cached unaries.

    ``theta_phi[v]`` caches the reparametrized unary costs of vertex ``v``
    (parallel to ``inst.unary.allowed[v]``) and is maintained incrementally
    as messages change.  ``beta`` holds one non-positive value per non-dummy
    label.  ``phi[(v, u)]`` is the message from ``v`` toward neighbor ``u``,
    parallel to ``inst.unary.allowed[v]``.

    A state belongs to one solver run; copy it for paired experiments.
    """

    __slots__ = ("inst", "beta", "phi", "theta_phi")

    def __init__(self, inst: IqapInstance):
        self.inst = inst
        self.beta = [0] * inst.num_labels
        self.theta_phi = [list(row) for row in inst.unary.costs]
        self.phi = {}
        for e in inst.edges:
            self.phi[(e.u, e.v)] = [0] * len(inst.unary.allowed[e.u])
            self.phi[(e.v, e.u)] = [0] * len(inst.unary.allowed[e.v])

    def copy(self) -> "IqapDualState":
        dup = IqapDualState.__new__(IqapDualState)
        dup.inst = self.inst
        dup.beta = list(self.beta)
        dup.theta_phi = [list(row) for row in self.theta_phi]
        dup.phi = {key: list(vals) for key, vals in self.phi.items()}
        return dup

    def tilde(self, v: int) -> list:
        """Reparametrized unary of ``v`` with ``beta`` subtracted.

        Entry order matches ``inst.unary.allowed[v]``; the dummy label keeps
        its plain reparametrized cost.
        """
        beta = self.beta
        return [
            cost if lab == DUMMY else cost - beta[lab]
            for lab, cost in zip(self.inst.unary.allowed[v], self.theta_phi[v])
        ]


def reparam_pairwise(state: IqapDualState, u: int, v: int, k: int, l: int):
    """Reparametrized pairwise cost of labeling ``u`` with ``k``, ``v`` with ``l``."""
    base = state.inst.pairwise_cost(u, v, k, l)
    iu = state.inst.unary.label_index(u, k)
    iv = state.inst.unary.label_index(v, l)
    return base - state.phi[(v, u)][iv] - state.phi[(u, v)][iu]


def _row_minima(base: list, rows: dict[int, list], num_rows: int) -> list:
    """Per row r: min over columns j of ``base[j] + stored(r, j)``.

    ``rows`` maps a row index to its stored ``(column, cost)`` entries;
    absent cells count as zero.  The minimum over absent cells is found by
    scanning columns in ascending ``base`` order until an uncovered one
    appears, so fully empty rows cost a single lookup.
    """
    order = sorted(range(len(base)), key=base.__getitem__)
    cheapest = base[order[0]]
    full = len(base)
    out = []
    for r in range(num_rows):
        entries = rows.get(r)
        if not entries:
            out.append(cheapest)
            continue
        best = None
        if len(entries) < full:
            covered = {j for j, _ in entries}
            for j in order:
                if j not in covered:
                    best = base[j]
                    break
        for j, c in entries:
            val = base[j] + c
            if best is None or val < best:
                best = val
        out.append(best)
    return out


def _oriented(state: IqapDualState, u: int, v: int):
    """Edge between u and v with its row/column maps oriented as (u, v)."""
    edge = state.inst.edge_between(u, v)
    if edge is None:
        raise ValueError(f"no edge between vertices {u} and {v}")
    if edge.u == u:
        return edge.rows_local, edge.cols_local
    return edge.cols_local, edge.rows_local


def mplp_pp_edge_update(state: IqapDualState, u: int, v: int) -> None:
    """One handshake on edge (u, v): split min-marginals between endpoints."""
    rows_u, rows_v = _oriented(state, u, v)
    phi_uv = state.phi[(u, v)]
    phi_vu = state.phi[(v, u)]
    tu = state.tilde(u)
    tv = state.tilde(v)
    base_u = [t - p for t, p in zip(tu, phi_uv)]
    base_v = [t - p for t, p in zip(tv, phi_vu)]
    min_over_v = _row_minima(base_v, rows_u, len(base_u))
    min_over_u = _row_minima(base_u, rows_v, len(base_v))
    unary_u = state.theta_phi[u]
    unary_v = state.theta_phi[v]
    for k in range(len(base_u)):
        delta = (base_u[k] + min_over_v[k]) / 2 - tu[k]
        phi_uv[k] += delta
        unary_u[k] += delta
    for l in range(len(base_v)):
        delta = (base_v[l] + min_over_u[l]) / 2 - tv[l]
        phi_vu[l] += delta
        unary_v[l] += delta


def mplp_pp_pass(state: IqapDualState, *, backward: bool = False) -> None:
    """Apply the edge update once per edge, in ascending endpoint order.

    ``backward`` adds a second sweep in reverse order.
    """
    for e in state.inst.edges:
        mplp_pp_edge_update(state, e.u, e.v)
    if backward:
        for e in reversed(state.inst.edges):
            mplp_pp_edge_update(state, e.u, e.v)


def pairwise_minimum(state: IqapDualState, edge) -> float:
    """Minimum reparametrized pairwise cost of ``edge`` over all label pairs."""
    phi_uv = state.phi[(edge.u, edge.v)]
    phi_vu = state.phi[(edge.v, edge.u)]
    base_v = [-p for p in phi_vu]
    per_row = _row_minima(base_v, edge.rows_local, len(phi_uv))
    return min(m - p for m, p in zip(per_row, phi_uv))
