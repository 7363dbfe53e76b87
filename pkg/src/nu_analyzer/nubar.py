"""Convex upper bound on the sparsity-aware robustness measure.

The bound is the infimum over positive diagonal similarities of the largest
scaled entry. Its combinatorial value is the maximum over directed cycles of
the geometric mean of the entries along the cycle, computed here with Karp's
maximum mean-cycle recursion on log weights per strongly connected component.
A self-contained bisection/Bellman-Ford solver provides an independent value
for cross-checking, and an exact balancing routine produces an optimal
scaling whose largest incoming and outgoing scaled entries agree at every
node wherever that is structurally possible.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._graph import condensation_topological_order, has_cycle, strongly_connected_components
from .errors import ValidationError
from .magnitude import as_array

NEG = float("-inf")


@dataclass(frozen=True)
class ScalingVector:
    """Nonnegative diagonal-similarity weights."""

    d: np.ndarray
    strictly_positive: bool = field(init=False)

    def __post_init__(self) -> None:
        a = np.asarray(self.d, dtype=float)
        if a.ndim != 1 or a.shape[0] < 1:
            raise ValidationError(f"scaling vector must be one-dimensional, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise ValidationError("scaling weights must be finite and nonnegative")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "d", a)
        object.__setattr__(self, "strictly_positive", bool(np.all(a > 0)))


@dataclass(frozen=True)
class NubarResult:
    value: float
    scaling: ScalingVector
    witness_cycle: tuple[int, ...]  # 1-based node sequence of a maximizing cycle
    certified: bool
    balanced: bool


@dataclass(frozen=True)
class PhiView:
    """Scaled entries M_ij * d_i / d_j under the zero conventions.

    Entries with M_ij = 0 are 0. Entries with d_i = 0 are 0 regardless of
    d_j. Entries with M_ij > 0, d_i > 0 and d_j = 0 are +inf and mark the
    scaling infeasible.
    """

    matrix: np.ndarray
    feasible: bool


def phi_view(M, d) -> PhiView:
    a = as_array(M)
    dv = np.asarray(getattr(d, "d", d), dtype=float)
    if dv.shape != (a.shape[0],):
        raise ValidationError(f"scaling vector has wrong length {dv.shape} for n={a.shape[0]}")
    if not np.all(np.isfinite(dv)) or np.any(dv < 0):
        raise ValidationError("scaling weights must be finite and nonnegative")
    pos = a > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = a * dv[:, None] / dv[None, :]
    phi = np.where(pos & (dv[:, None] > 0), raw, 0.0)
    return PhiView(matrix=phi, feasible=not np.isinf(phi).any())


def _log_weights(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), NEG)


def _support_adjacency(a: np.ndarray) -> list[list[int]]:
    return [list(np.nonzero(a[i] > 0)[0]) for i in range(a.shape[0])]


def _karp_max_mean(w: np.ndarray) -> float:
    """Maximum cycle mean of a strongly connected log-weighted digraph.

    ``w[u, v]`` is the arc weight, -inf where there is no arc. Node 0 is used
    as the source; strong connectivity guarantees walks of every length.
    """
    L = w.shape[0]
    D = np.full((L + 1, L), NEG)
    D[0, 0] = 0.0
    for k in range(L):
        D[k + 1] = (D[k][:, None] + w).max(axis=0)
    DL = D[L]
    den = (L - np.arange(L, dtype=float))[:, None]
    with np.errstate(invalid="ignore"):
        ratios = np.where(D[:L] > NEG, (DL[None, :] - D[:L]) / den, np.inf)
    per_node = ratios.min(axis=0)
    valid = DL > NEG
    if not valid.any():
        return NEG
    return float(per_node[valid].max())


def _max_cycle_mean(a: np.ndarray) -> float:
    """Maximum cycle mean over the whole support graph, -inf if acyclic."""
    n = a.shape[0]
    adj = _support_adjacency(a)
    w = _log_weights(a)
    best = NEG
    for comp in strongly_connected_components(n, adj):
        if len(comp) == 1:
            v = comp[0]
            if a[v, v] > 0:
                best = max(best, w[v, v])
            continue
        best = max(best, _karp_max_mean(w[np.ix_(comp, comp)]))
    return best


def _potentials(w: np.ndarray, lam: float) -> np.ndarray:
    """Longest-path potentials from a super-source under weights w - lam.

    With lam the maximum cycle mean no cycle has positive adjusted weight, so
    the longest walks are bounded and n relaxation rounds suffice. The
    resulting potentials p satisfy w[u, v] + p[u] - p[v] <= lam on every arc,
    with equality along maximizing cycles.
    """
    n = w.shape[0]
    wp = w - lam
    p = np.zeros(n)
    for _ in range(n):
        cand = (p[:, None] + wp).max(axis=0)
        newp = np.maximum(p, cand)
        if np.array_equal(newp, p):
            break
        p = newp
    return p


def _tight_arcs(w: np.ndarray, lam: float, p: np.ndarray, tol: float) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        slack = p[:, None] + w - lam - p[None, :]
    return (w > NEG) & (np.abs(slack) <= tol * max(1.0, abs(lam)))


def _cycle_in_tight_graph(tight: np.ndarray) -> tuple[int, ...]:
    """Deterministic cycle extraction: walk the tight subgraph restricted to
    its strongly connected parts, from the smallest node, always taking the
    smallest successor."""
    n = tight.shape[0]
    adj = [list(np.nonzero(tight[i])[0]) for i in range(n)]
    comp_sets: dict[int, set[int]] = {}
    eligible: list[int] = []
    for comp in strongly_connected_components(n, adj):
        if len(comp) > 1 or tight[comp[0], comp[0]]:
            cs = set(comp)
            for u in comp:
                comp_sets[u] = cs
            eligible.extend(comp)
    for start in sorted(eligible):
        cs = comp_sets[start]
        pos = {start: 0}
        seq = [start]
        u = start
        while True:
            nxt = next((v for v in adj[u] if v in cs), None)
            if nxt is None:
                break
            if nxt in pos:
                cycle = [int(v) for v in seq[pos[nxt]:]]
                i = cycle.index(min(cycle))
                return tuple(cycle[i:] + cycle[:i])
            pos[nxt] = len(seq)
            seq.append(nxt)
            u = nxt
    return ()


def _witness_cycle(w: np.ndarray, lam: float, p: np.ndarray, tol: float = 1e-9) -> tuple[int, ...]:
    cycle = _cycle_in_tight_graph(_tight_arcs(w, lam, p, tol))
    if not cycle:
        # loosen the tightness tolerance; only needed when potentials carry
        # more rounding than usual
        for factor in (1e2, 1e4, 1e6):
            cycle = _cycle_in_tight_graph(_tight_arcs(w, lam, p, tol * factor))
            if cycle:
                break
    return cycle


def _cycle_geometric_mean(a: np.ndarray, cycle: tuple[int, ...]) -> float:
    if not cycle:
        return 0.0
    total = 0.0
    L = len(cycle)
    for i in range(L):
        total += math.log(a[cycle[i], cycle[(i + 1) % L]])
    return math.exp(total / L)


def _acyclic_scaling(a: np.ndarray) -> np.ndarray:
    """Limit scaling attaining value 0 on acyclic support: zero on every node
    with an outgoing arc, one on sinks and isolated nodes."""
    out_degree = (a > 0).sum(axis=1)
    return np.where(out_degree > 0, 0.0, 1.0)


def certify_optimality(M, d, tol: float = 1e-9) -> bool:
    """Sufficient optimality test for a scaling.

    True when every maximizing scaled entry (k, l) is continued by an equal
    maximizing entry out of l, i.e. the maximizing set chains into loops.
    True implies the scaling is optimal; False is inconclusive.
    """
    view = phi_view(M, d)
    if not view.feasible:
        return False
    phi = view.matrix
    vmax = float(phi.max())
    if vmax == 0.0:
        return True
    ks, ls = np.nonzero(phi >= vmax * (1.0 - tol))
    for k, l in zip(ks, ls):
        if abs(phi[k, l] - phi[l].max()) > tol * vmax:
            return False
    return True


def balance_residuals(M, d) -> np.ndarray:
    """Per-node gap between the largest incoming and outgoing scaled entries.

    The diagonal is excluded from both maxima. Residuals are normalized by
    the attained objective so a tolerance reads as a value-relative bound.
    An infeasible scaling yields +inf residuals.
    """
    view = phi_view(M, d)
    if not view.feasible:
        return np.full(view.matrix.shape[0], np.inf)
    phi = view.matrix.copy()
    np.fill_diagonal(phi, 0.0)
    in_max = phi.max(axis=0)
    out_max = phi.max(axis=1)
    scale = max(float(view.matrix.max()), 1e-300)
    return np.abs(in_max - out_max) / scale


def is_balanced(M, d, tol: float = 1e-8) -> bool:
    return bool(balance_residuals(M, d).max() <= tol)


def nubar_exact(M) -> NubarResult:
    """Exact value of the scaling bound with an optimal scaling and witness.

    The value is the maximum cycle geometric mean of the support graph; the
    scaling comes from longest-path potentials, which make every scaled entry
    at most the value and the witness cycle tight.
    """
    a = as_array(M)
    lam = _max_cycle_mean(a)
    if lam == NEG:
        d = _acyclic_scaling(a)
        sv = ScalingVector(d)
        return NubarResult(0.0, sv, (), certify_optimality(a, d), is_balanced(a, d))
    w = _log_weights(a)
    p = _potentials(w, lam)
    cycle = _witness_cycle(w, lam, p)
    value = _cycle_geometric_mean(a, cycle)
    d = np.exp(p - p.max())
    sv = ScalingVector(d)
    return NubarResult(
        value,
        sv,
        tuple(i + 1 for i in cycle),
        certify_optimality(a, d),
        is_balanced(a, d),
    )


def nubar_lp(M, tol_log: float = 1e-10) -> NubarResult:
    """Independent solver for the same bound, used as a cross-check oracle.

    Bisects the objective level; a level is feasible exactly when the graph
    with arc costs level - log(M_ij) has no negative cycle, which n rounds of
    Bellman-Ford relaxation detect. Kept free of the mean-cycle machinery on
    purpose.
    """
    a = as_array(M)
    n = a.shape[0]
    if not has_cycle(n, _support_adjacency(a)):
        d = _acyclic_scaling(a)
        sv = ScalingVector(d)
        return NubarResult(0.0, sv, (), certify_optimality(a, d), is_balanced(a, d))
    w = _log_weights(a)
    arcs = w > NEG

    def feasible(level: float) -> np.ndarray | None:
        cost = np.where(arcs, level - w, np.inf)
        dist = np.zeros(n)
        for _ in range(n):
            dist = np.minimum(dist, (dist[:, None] + cost).min(axis=0))
        if ((dist[:, None] + cost).min(axis=0) < dist - 1e-15).any():
            return None
        return dist

    lo = float(w[arcs].min()) - 1.0
    hi = float(w[arcs].max()) + 1.0
    while hi - lo > tol_log:
        mid = 0.5 * (lo + hi)
        if feasible(mid) is not None:
            hi = mid
        else:
            lo = mid
    dist = feasible(hi)
    beta = -dist
    d = np.exp(beta - beta.max())
    gamma = 0.5 * (lo + hi)
    value = math.exp(gamma)
    cycle = ()
    for tol in (max(1e-8, 100 * n * tol_log), 1e-6, 1e-4):
        cycle = _cycle_in_tight_graph(_tight_arcs(w, gamma, beta, tol))
        if cycle:
            break
    sv = ScalingVector(d)
    return NubarResult(
        value,
        sv,
        tuple(i + 1 for i in cycle),
        certify_optimality(a, d),
        is_balanced(a, d),
    )


def _max_balance_strong(
    nodes: list[int], arcs: list[tuple[int, int, float]]
) -> tuple[dict[int, float], dict[int, float]]:
    """Exact max-balancing of a strongly connected log-weighted digraph.

    Repeatedly pins the maximizing cycles: compute the maximum cycle mean,
    fix relative scalings along the tight strongly connected classes,
    contract each class to a single node and recurse on the contracted graph
    (the next level's mean is strictly smaller). Returns per-node log
    scalings and the level value at which each node was absorbed.
    """
    idx = {u: i for i, u in enumerate(nodes)}
    members: list[dict[int, float]] = [{u: 0.0} for u in nodes]
    cur_arcs = [(idx[u], idx[v], wt) for u, v, wt in arcs]
    level_of: dict[int, float] = {}

    while cur_arcs:
        m = len(members)
        W = np.full((m, m), NEG)
        for u, v, wt in cur_arcs:
            if wt > W[u, v]:
                W[u, v] = wt
        lam = _karp_max_mean(W)
        p = _potentials(W, lam)
        tight = _tight_arcs(W, lam, p, 1e-9)
        tadj = [list(np.nonzero(tight[i])[0]) for i in range(m)]
        classes = [
            comp
            for comp in strongly_connected_components(m, tadj)
            if len(comp) > 1 or tight[comp[0], comp[0]]
        ]
        delta = np.zeros(m)
        class_of = np.full(m, -1)
        for ci, comp in enumerate(classes):
            cs = set(comp)
            class_of[comp] = ci
            root = comp[0]
            seen = {root}
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v in tadj[u]:
                    if v in cs and v not in seen:
                        delta[v] = delta[u] + W[u, v] - lam
                        seen.add(v)
                        queue.append(v)
        for comp in classes:
            for i in comp:
                for orig in members[i]:
                    level_of.setdefault(orig, lam)
        new_ids = {}
        new_members: list[dict[int, float]] = []
        for comp in classes:
            nid = len(new_members)
            merged: dict[int, float] = {}
            for i in comp:
                for orig, off in members[i].items():
                    merged[orig] = off + delta[i]
            new_members.append(merged)
            for i in comp:
                new_ids[i] = nid
        for i in range(m):
            if class_of[i] == -1:
                new_ids[i] = len(new_members)
                new_members.append(members[i])
        next_arcs: dict[tuple[int, int], float] = {}
        for u, v, wt in cur_arcs:
            if class_of[u] != -1 and class_of[u] == class_of[v]:
                continue  # pinned inside a class (critical arcs and chords)
            key = (new_ids[u], new_ids[v])
            wn = wt + delta[u] - delta[v]
            if key not in next_arcs or wn > next_arcs[key]:
                next_arcs[key] = wn
        members = new_members
        cur_arcs = [(u, v, wt) for (u, v), wt in next_arcs.items()]

    pi: dict[int, float] = {}
    for mem in members:
        for orig, off in mem.items():
            pi[orig] = off
    for u in nodes:
        level_of.setdefault(u, NEG)
    return pi, level_of


def balanced_solution(M) -> NubarResult:
    """Optimal scaling whose in/out maxima agree at every node.

    Within each strongly connected part the balance is exact (critical-class
    contraction). Across parts the condensation is a directed acyclic graph;
    cross arcs are pushed strictly below the balanced levels of their
    endpoints, and chain nodes are equalized by coordinate sweeps. Nodes from
    which no cycle is reachable take scaling zero so their arcs vanish, which
    is the only way their outgoing maxima can match an empty incoming side.
    """
    a = as_array(M)
    n = a.shape[0]
    lam_all = _max_cycle_mean(a)
    if lam_all == NEG:
        d = _acyclic_scaling(a)
        sv = ScalingVector(d)
        return NubarResult(0.0, sv, (), certify_optimality(a, d), is_balanced(a, d))
    w_full = _log_weights(a)
    p_full = _potentials(w_full, lam_all)
    cycle = _witness_cycle(w_full, lam_all, p_full)
    value = _cycle_geometric_mean(a, cycle)

    off = a.copy()
    np.fill_diagonal(off, 0.0)
    adj = _support_adjacency(off)
    w_off = _log_weights(off)
    comps, comp_of = condensation_topological_order(n, adj)
    nblocks = len(comps)
    nontrivial = [len(c) > 1 for c in comps]

    pi = np.zeros(n)
    level = np.full(n, NEG)
    for bi, comp in enumerate(comps):
        if not nontrivial[bi]:
            continue
        arcs = [
            (u, v, w_off[u, v]) for u in comp for v in adj[u] if comp_of[v] == bi
        ]
        pim, lev = _max_balance_strong(comp, arcs)
        for u in comp:
            pi[u] = pim[u]
            level[u] = lev[u]

    # cross-arc bookkeeping over the condensation
    cross: list[tuple[int, int, int, int]] = []
    succ_blocks: list[set[int]] = [set() for _ in range(nblocks)]
    for u in range(n):
        for v in adj[u]:
            if comp_of[u] != comp_of[v]:
                cross.append((comp_of[u], comp_of[v], u, v))
                succ_blocks[comp_of[u]].add(comp_of[v])
    live = list(nontrivial)
    for bi in range(nblocks):  # topological: arcs only go forward
        if live[bi]:
            for bj in succ_blocks[bi]:
                live[bj] = True

    margin = math.log(0.9)
    tau = lam_all + math.log(1e-10)  # suppression target for unmatchable sides
    in_arcs: list[list[tuple[int, float, float]]] = [[] for _ in range(nblocks)]
    out_arcs: list[list[tuple[int, float, float]]] = [[] for _ in range(nblocks)]
    for bs, bt, u, v in cross:
        if not (live[bs] and live[bt]):
            continue  # arcs from zero-scaled nodes contribute nothing
        c = w_off[u, v] + (pi[u] if nontrivial[bs] else 0.0) - (pi[v] if nontrivial[bt] else 0.0)
        cap = math.inf
        if nontrivial[bs]:
            cap = min(cap, level[u] + margin)
        if nontrivial[bt]:
            cap = min(cap, level[v] + margin)
        in_arcs[bt].append((bs, c, cap))
        out_arcs[bs].append((bt, c, cap))

    # Sweep the block offsets until every cross arc sits at or below its
    # endpoints' balanced levels and every chain node's incoming and outgoing
    # maxima agree. A chain node publishes the balance level it can achieve
    # (its incoming caps may pin it); successors treat a predecessor's level
    # as an additional bound on the connecting arc, so equalization pressure
    # propagates through the condensation instead of stalling at tight caps.
    x = np.zeros(nblocks)
    demand = np.full(nblocks, math.inf)
    order = [bi for bi in range(nblocks) if live[bi]]
    for sweep in range(200 + 10 * nblocks):
        sweep_order = order if sweep % 2 == 0 else order[::-1]
        max_delta = 0.0
        for bi in sweep_order:
            lo, hi = NEG, math.inf
            for bs, c, cap in in_arcs[bi]:
                bound = min(cap, demand[bs])
                if math.isfinite(bound):
                    lo = max(lo, c + x[bs] - bound)
            for bt, c, cap in out_arcs[bi]:
                if math.isfinite(cap):
                    hi = min(hi, cap - c + x[bt])
            if nontrivial[bi]:
                xn = lo if lo > hi else min(max(x[bi], lo), hi)
            else:
                p_in = max((c + x[bs] for bs, c, _ in in_arcs[bi]), default=None)
                q_out = max((c - x[bt] for bt, c, _ in out_arcs[bi]), default=None)
                if p_in is None:
                    xn = 0.0  # unreachable for live chain nodes
                else:
                    half = 0.5 * (p_in + q_out) if q_out is not None else NEG
                    level_u = max(min(half, p_in - lo), tau)
                    demand[bi] = level_u
                    xn = p_in - level_u
            max_delta = max(max_delta, abs(xn - x[bi]))
            x[bi] = xn
        if max_delta <= 1e-14:
            break

    d_log = np.full(n, NEG)
    for bi, comp in enumerate(comps):
        for u in comp:
            if live[bi]:
                d_log[u] = (pi[u] if nontrivial[bi] else 0.0) + x[bi]
            elif not adj[u]:
                d_log[u] = 0.0  # sinks and isolated nodes: any positive weight
    finite = np.isfinite(d_log)
    top = d_log[finite].max()
    d = np.where(finite, np.exp(np.where(finite, d_log, 0.0) - top), 0.0)
    sv = ScalingVector(d)
    return NubarResult(
        value,
        sv,
        tuple(i + 1 for i in cycle),
        certify_optimality(a, d),
        is_balanced(a, d),
    )
