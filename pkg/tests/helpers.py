"""Shared builders for the test suite: the worked 5x5 example and seeded
random instance generators."""

import random

from qapbound.model import DUMMY, IlapInstance, IqapInstance, LapDual, LapInstance

EXAMPLE1_COSTS = [
    [3, 3, 3, 7, 6],
    [3, 3, 9, 9, 8],
    [9, 10, 4, 7, 11],
    [4, 4, 4, 8, 11],
    [8, 9, 4, 7, 13],
]
EXAMPLE1_MATCHING = [4, 0, 3, 1, 2]
EXAMPLE1_VALUE = 24  # frozen from exhaustive enumeration of all 120 bijections
# tight pairs of the initial dual, row by row
EXAMPLE1_INITIAL_ACTIVE = {
    (0, 0), (0, 1), (0, 2), (0, 4),
    (1, 0), (1, 1),
    (2, 2), (2, 3),
    (3, 0), (3, 1), (3, 2),
    (4, 2), (4, 3),
}
# pairs realized by some optimal assignment (circled in the figure)
EXAMPLE1_OPTIMAL_PAIRS = {
    (0, 4),
    (1, 0), (1, 1),
    (2, 2), (2, 3),
    (3, 0), (3, 1),
    (4, 2), (4, 3),
}


def example1_instance(tolerance=1e-9):
    return LapInstance([list(range(5))] * 5, EXAMPLE1_COSTS,
                       vertex_names="abcde", label_names="ABCDE",
                       tolerance=tolerance)


def example1_initial_dual():
    return LapDual([2, 2, 3, 3, 3], [1, 1, 1, 4, 4])


def example1_final_dual():
    return LapDual([2, 3, 5, 4, 5], [0, 0, -1, 2, 4])


def random_lap(rng, n, *, extra=0.35, lo=0, hi=9, tolerance=1e-9):
    """Random square instance with a planted perfect matching."""
    perm = list(range(n))
    rng.shuffle(perm)
    allowed = []
    costs = []
    for v in range(n):
        labs = {perm[v]}
        for lab in range(n):
            if rng.random() < extra:
                labs.add(lab)
        labs = sorted(labs)
        allowed.append(labs)
        costs.append([rng.randint(lo, hi) for _ in labs])
    return LapInstance(allowed, costs, tolerance=tolerance)


def random_ilap(rng, *, max_vertices=6, max_labels=6, allow=0.55,
                lo=-5, hi=9, tolerance=1e-9):
    nv = rng.randint(1, max_vertices)
    nl = rng.randint(1, max_labels)
    allowed = []
    costs = []
    for v in range(nv):
        labs = [DUMMY] + [lab for lab in range(nl) if rng.random() < allow]
        allowed.append(labs)
        costs.append([rng.randint(lo, hi) for _ in labs])
    return IlapInstance(allowed, costs, nl, tolerance=tolerance)


def random_iqap(rng, *, max_vertices=5, max_labels=4, max_edges=6,
                lo=-5, hi=5, cell_prob=0.4, dummy_cells=True):
    nv = rng.randint(2, max_vertices)
    nl = rng.randint(1, max_labels)
    allowed = []
    for v in range(nv):
        k = rng.randint(0, nl)
        allowed.append([DUMMY] + sorted(rng.sample(range(nl), k=k)))
    costs = [[rng.randint(lo, hi) for _ in labs] for labs in allowed]
    core = IlapInstance(allowed, costs, nl)
    pairs = [(u, v) for u in range(nv) for v in range(u + 1, nv)]
    rng.shuffle(pairs)
    edges = []
    for (u, v) in pairs[:rng.randint(0, min(max_edges, len(pairs)))]:
        cells = {}
        for k in core.allowed[u]:
            for l in core.allowed[v]:
                if not dummy_cells and DUMMY in (k, l):
                    continue
                if rng.random() < cell_prob:
                    c = rng.randint(lo, hi)
                    if c != 0:
                        cells[(k, l)] = c
        edges.append((u, v, cells))
    return IqapInstance(core, edges)


def random_feasible_ilap_assignment(rng, inst):
    """Uniform-ish feasible assignment: greedy with the dummy as fallback."""
    x = []
    used = set()
    for v in range(inst.num_vertices):
        options = [lab for lab in inst.allowed[v]
                   if lab == DUMMY or lab not in used]
        lab = rng.choice(options)
        if lab != DUMMY:
            used.add(lab)
        x.append(lab)
    return x


def random_reduced_matching(rng, inst, reduced, max_restarts=200):
    """Random perfect matching of a reduced square instance.

    Greedy over a shuffled node order with restarts; falls back to lifting a
    random feasible assignment (always possible) when unlucky.
    """
    size = reduced.lap.num_vertices
    for _ in range(max_restarts):
        order = list(range(size))
        rng.shuffle(order)
        taken = set()
        xp = [None] * size
        ok = True
        for node in order:
            options = [lab for lab in reduced.lap.allowed[node]
                       if lab not in taken]
            if not options:
                ok = False
                break
            lab = rng.choice(options)
            taken.add(lab)
            xp[node] = lab
        if ok:
            return xp
    from qapbound.reduction import lift_assignment

    return lift_assignment(inst, random_feasible_ilap_assignment(rng, inst))


def seeded(seed):
    return random.Random(seed)
