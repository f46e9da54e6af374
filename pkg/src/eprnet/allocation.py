"""Channel-to-pair allocation strategies maximizing the minimum rate.

An allocation instance couples the transmittance of every served node pair
with the per-channel generation rates.  A pair assigned a set of channels
receives their summed generation rate scaled by its transmittance.  Every
strategy partitions all channels among the pairs (channels are indivisible
and never reused) and chases the max-min received rate:

* ``fractional_optimum``  - closed-form bound with divisible channels
* ``exact_maxmin``        - branch and bound, provably optimal
* ``first_fit``           - binary search on a target + sequential pass
* ``round_robin``         - cyclic deal, biggest channels first
* ``random_balanced``     - seeded uniform shuffle, balanced counts
* ``modified_lpt``        - biggest channel to the currently poorest pair
* ``bezakova_matching``   - repeated max-min matchings, factor 1/(m-k+1)
* ``lp_round``            - water-filling rounded to whole channels

Channel and pair indices are 0-based throughout.  Received rates are
always computed the same way (per pair, channel rates summed in ascending
channel order, then scaled), so independently produced allocations with
the same assignment compare bit-for-bit equal.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .spectrum import RateVector


class AllocationError(ValueError):
    """Raised for invalid instances, assignments, or strategy inputs."""


@dataclass(frozen=True)
class AllocationInstance:
    """Transmittances of k node pairs plus m per-channel rates."""

    etas: tuple[float, ...]
    rates: RateVector

    def __post_init__(self) -> None:
        if not self.etas:
            raise AllocationError("instance needs at least one pair")
        for i, eta in enumerate(self.etas):
            if not (0.0 < eta <= 1.0):
                raise AllocationError(
                    f"eta at index {i} must be in (0, 1], got {eta}"
                )

    @property
    def pair_count(self) -> int:
        return len(self.etas)

    @property
    def channel_count(self) -> int:
        return len(self.rates)


@dataclass(frozen=True)
class Allocation:
    """A total channel->pair assignment and the resulting received rates."""

    assignment: tuple[int, ...]
    received: tuple[float, ...]

    @property
    def min_rate(self) -> float:
        return min(self.received)


@dataclass(frozen=True)
class ExactResult:
    """Outcome of the exact solver; ``optimal`` is False on budget stop."""

    allocation: Allocation
    optimal: bool
    nodes_explored: int


def received_rates(
    instance: AllocationInstance,
    assignment: Sequence[int] | Mapping[int, int],
) -> tuple[float, ...]:
    """Received rate of every pair under a total assignment.

    Pair sums are exactly rounded (math.fsum), so a pair's rate depends
    only on which channels it owns, never on their enumeration order.

    Args:
        assignment: either a length-m sequence where entry x names the
            pair owning channel x, or an equivalent {channel: pair} map.

    Raises:
        AllocationError: if any channel is unassigned, assigned twice, or
            assigned to an out-of-range pair.
    """
    k, m = instance.pair_count, instance.channel_count
    if isinstance(assignment, Mapping):
        if set(assignment) != set(range(m)):
            missing = sorted(set(range(m)) - set(assignment))
            extra = sorted(set(assignment) - set(range(m)))
            raise AllocationError(
                f"assignment must cover channels 0..{m - 1} exactly once"
                f" (missing {missing}, unknown {extra})"
            )
        dense = [assignment[x] for x in range(m)]
    else:
        dense = list(assignment)
        if len(dense) != m:
            raise AllocationError(
                f"assignment length {len(dense)} != channel count {m}"
            )
    owned: list[list[float]] = [[] for _ in range(k)]
    for x, p in enumerate(dense):
        if not isinstance(p, (int, np.integer)) or not 0 <= p < k:
            raise AllocationError(f"channel {x} assigned to invalid pair {p!r}")
        owned[p].append(instance.rates[x])
    return tuple(instance.etas[p] * math.fsum(owned[p]) for p in range(k))


def channels_by_pair(assignment: Sequence[int], pair_count: int) -> tuple[tuple[int, ...], ...]:
    """Group channel indices by owning pair (ascending within each pair)."""
    groups: list[list[int]] = [[] for _ in range(pair_count)]
    for x, p in enumerate(assignment):
        groups[p].append(x)
    return tuple(tuple(g) for g in groups)


def _finish(instance: AllocationInstance, assignment: Sequence[int]) -> Allocation:
    dense = tuple(int(p) for p in assignment)
    return Allocation(dense, received_rates(instance, dense))


def _validated_order(order: Sequence[int] | None, k: int) -> list[int]:
    if order is None:
        return list(range(k))
    order = [int(p) for p in order]
    if sorted(order) != list(range(k)):
        raise AllocationError(f"pair_order must be a permutation of 0..{k - 1}")
    return order


def fractional_optimum(instance: AllocationInstance) -> float:
    """Max-min received rate when channels may be split fractionally.

    With divisible channels every pair can be pushed to exactly
    total_rate / sum(1/eta): pair p consumes T/eta_p of generation rate,
    and the budget balances at that T.  This is an upper bound for every
    indivisible allocation.
    """
    for eta in instance.etas:
        if eta <= 0:
            raise AllocationError(f"eta must be > 0, got {eta}")
    total = 0.0
    for r in instance.rates:
        total += r
    denom = math.fsum(1.0 / eta for eta in instance.etas)
    return total / denom


def _waterfill_bound(r: list[float], inv_eta: list[float], mass_left: float) -> float:
    """Best possible final minimum if the remaining mass were divisible."""
    order = sorted(range(len(r)), key=lambda p: r[p])
    inv_sum = 0.0
    cost_sum = 0.0  # sum of r_i / eta_i over the current group
    for p in order:
        level = r[p]
        if inv_sum > 0.0:
            cost = level * inv_sum - cost_sum
            if cost >= mass_left:
                return (mass_left + cost_sum) / inv_sum
        inv_sum += inv_eta[p]
        cost_sum += level * inv_eta[p]
    return (mass_left + cost_sum) / inv_sum


def exact_maxmin(
    instance: AllocationInstance,
    *,
    pair_order: Sequence[int] | None = None,
    node_budget: int = 1_000_000,
    time_budget_s: float | None = None,
    target_hint: float | None = None,
    warm: Sequence[int] | None = None,
) -> ExactResult:
    """Provably optimal max-min allocation by branch and bound.

    Channels are branched in descending-rate order; each search node is
    bounded by the water-filling completion of the remaining rate mass,
    and equal-rate channels are canonicalized (their pair indices must be
    non-decreasing) to kill permutation symmetry.  Intended for small
    instances; on larger ones set a budget and expect ``optimal=False``
    with the best incumbent found.

    Args:
        pair_order: permutation used to break ties between equally poor
            pairs while branching; distinct orders can surface distinct
            optimal assignments.
        node_budget: max search nodes before giving up.
        time_budget_s: optional wall-clock cap.
        target_hint: a received-rate value known to be achievable (e.g.
            from a previous solve of the same instance); the search then
            returns the first allocation reaching it.
        warm: a full channel-to-pair assignment to seed the incumbent,
            typically the allocation from a previous solve of the same
            instance; with ``target_hint`` it lets repeat solves finish
            at the root.

    Returns:
        ExactResult; ``allocation.received`` uses the canonical rate
        computation, so its minimum compares exactly with enumeration.
    """
    k, m = instance.pair_count, instance.channel_count
    rank = [0] * k
    for pos, p in enumerate(_validated_order(pair_order, k)):
        rank[p] = pos
    n = list(instance.rates)
    etas = list(instance.etas)
    inv_eta = [1.0 / e for e in etas]
    order = sorted(range(m), key=lambda x: (-n[x], x))
    suffix_mass = [0.0] * (m + 1)
    for t in range(m - 1, -1, -1):
        suffix_mass[t] = suffix_mass[t + 1] + n[order[t]]

    if warm is not None:
        warm = [int(p) for p in warm]
        if len(warm) != m or any(p < 0 or p >= k for p in warm):
            raise AllocationError("warm must assign every channel to a pair")
        warm_alloc = _finish(instance, warm)
        if target_hint is not None and warm_alloc.min_rate >= target_hint:
            return ExactResult(warm_alloc, True, 0)

    # Seed the incumbent with the best cheap heuristic so pruning bites
    # immediately.
    seed_alloc = modified_lpt(instance)
    candidates = [first_fit(instance, None)]
    if m >= k:
        candidates.append(bezakova_matching(instance))
    if warm is not None:
        candidates.append(warm_alloc)
    for cand in candidates:
        if cand.min_rate > seed_alloc.min_rate:
            seed_alloc = cand
    best_assign = list(seed_alloc.assignment)
    best_value = seed_alloc.min_rate
    if target_hint is not None and best_value >= target_hint:
        return ExactResult(seed_alloc, True, 0)

    assign = [-1] * m
    mass = [0.0] * k
    nodes = 0
    deadline = None if time_budget_s is None else time.monotonic() + time_budget_s

    class _Stop(Exception):
        pass

    class _Found(Exception):
        pass

    def recurse(t: int, prev_pair: int) -> None:
        nonlocal nodes, best_value, best_assign
        nodes += 1
        if nodes > node_budget or (deadline is not None and time.monotonic() > deadline):
            raise _Stop
        if t == m:
            value = min(received_rates(instance, assign))
            if target_hint is not None:
                if value >= target_hint:
                    best_value = value
                    best_assign = assign.copy()
                    raise _Found
                return
            if value > best_value:
                best_value = value
                best_assign = assign.copy()
            return
        r = [etas[p] * mass[p] for p in range(k)]
        bound = _waterfill_bound(r, inv_eta, suffix_mass[t])
        padded = bound * (1.0 + 1e-12)
        if target_hint is not None:
            if padded < target_hint:
                return
        elif padded <= best_value:
            return
        x = order[t]
        tied = t > 0 and n[order[t - 1]] == n[x]
        children = sorted(range(k), key=lambda p: (r[p], rank[p]))
        for p in children:
            if tied and p < prev_pair:
                continue
            assign[x] = p
            mass[p] += n[x]
            recurse(t + 1, p)
            mass[p] -= n[x]
            assign[x] = -1

    optimal = True
    try:
        recurse(0, -1)
    except _Stop:
        optimal = False
    except _Found:
        pass
    return ExactResult(_finish(instance, best_assign), optimal, nodes)


def first_fit(
    instance: AllocationInstance,
    pair_order: Sequence[int] | None = None,
) -> Allocation:
    """Largest uniformly reachable target via a sequential prefix pass.

    For a candidate target T the channels are walked in index order and
    accumulate on the current pair until its received rate reaches T,
    then the pass moves to the next pair in ``pair_order`` (channels left
    over after the last pair stay on it).  Feasibility of the pass is
    monotone in T, so the largest feasible T in [0, fractional optimum]
    is found by bisection to 1e-9 relative resolution.
    """
    k, m = instance.pair_count, instance.channel_count
    order = _validated_order(pair_order, k)
    n = list(instance.rates)
    etas = list(instance.etas)

    def run_pass(target: float) -> tuple[list[int], bool]:
        assign = [-1] * m
        mass = [0.0] * k
        cursor = 0
        for x in range(m):
            p = order[cursor] if cursor < k else order[k - 1]
            assign[x] = p
            mass[p] += n[x]
            if cursor < k and etas[p] * mass[p] >= target:
                cursor += 1
        return assign, cursor >= k

    tf = fractional_optimum(instance)
    target = 0.0
    if tf > 0 and run_pass(0.0)[1]:
        if run_pass(tf)[1]:
            target = tf
        else:
            lo, hi = 0.0, tf
            tol = 1e-9 * tf
            while hi - lo > tol:
                mid = (lo + hi) / 2.0
                if run_pass(mid)[1]:
                    lo = mid
                else:
                    hi = mid
            target = lo
    assign, _ = run_pass(target)
    return _finish(instance, assign)


def round_robin(
    instance: AllocationInstance,
    pair_order: Sequence[int] | None = None,
) -> Allocation:
    """Deal channels cyclically in descending-rate order (ties by index)."""
    k = instance.pair_count
    order = _validated_order(pair_order, k)
    by_rate = sorted(range(instance.channel_count),
                     key=lambda x: (-instance.rates[x], x))
    assign = [-1] * instance.channel_count
    for pos, x in enumerate(by_rate):
        assign[x] = order[pos % k]
    return _finish(instance, assign)


def random_balanced(instance: AllocationInstance, rng_seed: int) -> Allocation:
    """Uniformly shuffle channels, then deal so counts differ by <= 1."""
    k, m = instance.pair_count, instance.channel_count
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    perm = rng.permutation(m)
    assign = [-1] * m
    for pos in range(m):
        assign[int(perm[pos])] = pos % k
    return _finish(instance, assign)


def modified_lpt(instance: AllocationInstance) -> Allocation:
    """Biggest channel first, always to a currently poorest pair.

    Giving the next channel to a pair with the minimum received rate is
    the greedy move that maximizes the post-assignment minimum; ties go
    to the lowest pair index.
    """
    k = instance.pair_count
    etas = instance.etas
    assign = [-1] * instance.channel_count
    received = [0.0] * k
    for x in sorted(range(instance.channel_count),
                    key=lambda x: (-instance.rates[x], x)):
        p = min(range(k), key=lambda q: (received[q], q))
        assign[x] = p
        received[p] += etas[p] * instance.rates[x]
    return _finish(instance, assign)


def _hall_feasible(fmat: np.ndarray, reqs: np.ndarray, deficit: np.ndarray,
                   available: int) -> bool:
    """Matching existence for per-pair targets over the remaining channels.

    ``fmat[q]`` holds pair q's resulting rate for each remaining channel,
    sorted descending, so every eligibility set is a prefix of the same
    ordering and Hall's condition reduces to sorted prefix-length counts.
    """
    if not deficit.any():
        return True
    counts = (fmat[deficit] >= reqs[deficit, None]).sum(axis=1)
    counts.sort()
    if len(counts) > available:
        return False
    return bool((counts >= np.arange(1, len(counts) + 1)).all())


def _matching_rounds(instance: AllocationInstance, *, frugal: bool) -> Allocation:
    """One full run of the round-based matching scheme.

    Every round finds the highest threshold t* such that each pair below
    t* can take one distinct remaining channel reaching it (binary search
    over the finite set of reachable cumulative values, Hall feasibility
    on prefix eligibility sets).  Pairs already at t* skip the round.

    ``frugal=True`` then hands each needy pair its cheapest sufficient
    channel, minimizing the generation rate consumed per round so large
    channels survive for later rounds.  ``frugal=False`` instead raises
    pairs' individual targets as far as the others' targets allow, which
    spends channels faster but maximizes the round's whole rate profile,
    not only its minimum.  Channels that can no longer improve the
    minimum are dealt to the currently poorest pairs.
    """
    k, m = instance.pair_count, instance.channel_count
    etas = np.asarray(instance.etas)
    n = list(instance.rates)
    assign = [-1] * m
    mass = np.zeros(k)
    remaining = list(range(m))

    while remaining:
        r = etas * mass
        # Channels sorted by descending rate (ties by index) so that each
        # pair's eligible set is a prefix.
        rem_sorted = sorted(remaining, key=lambda x: (-n[x], x))
        vals = np.asarray([n[x] for x in rem_sorted])
        fmat = r[:, None] + etas[:, None] * vals[None, :]

        candidates = np.unique(np.concatenate([fmat.ravel(), r]))
        lo, hi = 0, len(candidates) - 1  # candidates[lo] always feasible
        while lo < hi:
            mid = (lo + hi + 1) // 2
            t = candidates[mid]
            deficit = r < t
            reqs = np.where(deficit, t, r)
            if _hall_feasible(fmat, reqs, deficit, len(rem_sorted)):
                lo = mid
            else:
                hi = mid - 1
        t_star = float(candidates[lo])

        deficit = r < t_star
        reqs = np.where(deficit, t_star, r)
        if not frugal:
            # Raise individual targets while the rest stay feasible.
            for q in range(k):
                own = fmat[q][fmat[q] > reqs[q]]
                if own.size == 0:
                    continue
                own = np.unique(own)
                qlo, qhi = 0, len(own) - 1
                best = None
                while qlo <= qhi:
                    qmid = (qlo + qhi) // 2
                    trial = reqs.copy()
                    trial[q] = own[qmid]
                    trial_deficit = deficit.copy()
                    trial_deficit[q] = True
                    if _hall_feasible(fmat, trial, trial_deficit,
                                      len(rem_sorted)):
                        best = own[qmid]
                        qlo = qmid + 1
                    else:
                        qhi = qmid - 1
                if best is not None:
                    reqs[q] = best
                    deficit[q] = True

        needy = [q for q in range(k) if deficit[q]]
        if not needy:
            # No remaining channel improves the minimum: deal the rest to
            # the poorest pairs and stop.
            r_list = list(r)
            for x in remaining:
                p = min(range(k), key=lambda q: (r_list[q], q))
                assign[x] = p
                r_list[p] += instance.etas[p] * n[x]
            remaining = []
            break

        # Most constrained pair first; each takes its smallest eligible
        # remaining channel, which minimizes the total assigned rate.
        prefix_len = {q: int((fmat[q] >= reqs[q]).sum()) for q in needy}
        taken = [False] * len(rem_sorted)
        for q in sorted(needy, key=lambda q: (prefix_len[q], q)):
            pos = prefix_len[q] - 1
            while pos >= 0 and taken[pos]:
                pos -= 1
            if pos < 0:
                raise AllocationError("internal error: matching round infeasible")
            taken[pos] = True
            x = rem_sorted[pos]
            assign[x] = q
            mass[q] += n[x]
            remaining.remove(x)

    return _finish(instance, assign)


def bezakova_matching(instance: AllocationInstance) -> Allocation:
    """Repeated max-min matchings; min rate >= optimum / (m - k + 1).

    The first round is always a full max-min matching, which alone
    secures the 1/(m - k + 1) guarantee; later rounds only add channels.
    Two refinements shape those rounds: a pair already meeting a round's
    threshold may be skipped, and matchings may prefer cheaper channels
    (minimizing the generation rate consumed).  Both are allowed only
    when they do not hurt the overall minimum, so the scheme runs once
    with each round policy and keeps the allocation with the larger final
    minimum (ties favor the frugal run, which consumed less rate).
    """
    k, m = instance.pair_count, instance.channel_count
    if m < k:
        raise AllocationError(
            f"need at least one channel per pair: {m} channels < {k} pairs"
        )
    frugal = _matching_rounds(instance, frugal=True)
    generous = _matching_rounds(instance, frugal=False)
    return frugal if frugal.min_rate >= generous.min_rate else generous


def lp_round(instance: AllocationInstance) -> Allocation:
    """Round the water-filling fractional optimum to whole channels.

    Pairs claim contiguous spans of generation-rate mass, in pair order
    over channels in index order, each span worth T_f / eta_p.  At most
    k-1 channels straddle a span boundary; each of those is handed whole
    to the straddling pair whose rounded-down (wholly owned) received
    rate is currently smaller, ties to the lower pair index.  The result
    is guaranteed to reach at least
    max(0, T_f - max_{p,x} eta_p * rate_x); with pathological values a
    pair may end up with no channels at all.
    """
    k, m = instance.pair_count, instance.channel_count
    tf = fractional_optimum(instance)
    n = list(instance.rates)
    if tf <= 0.0:
        # Degenerate all-zero spectrum: ownership spans are empty, hand
        # everything to the first pair.
        return _finish(instance, [0] * m)

    boundaries = []  # cumulative mass where pair p's span ends
    acc = 0.0
    for p in range(k - 1):
        acc += tf / instance.etas[p]
        boundaries.append(acc)
    boundaries.append(math.inf)  # last pair absorbs float drift

    whole: list[list[int]] = [[] for _ in range(k)]
    shared: list[tuple[int, list[int]]] = []
    p = 0
    lo_edge = 0.0
    for x in range(m):
        hi_edge = lo_edge + n[x]
        while p < k - 1 and boundaries[p] <= lo_edge:
            p += 1
        claimants = [p]
        while p < k - 1 and boundaries[p] < hi_edge:
            p += 1
            claimants.append(p)
        if len(claimants) == 1:
            whole[p].append(x)
        else:
            shared.append((x, claimants))
        lo_edge = hi_edge

    assign = [-1] * m
    floor_rate = [0.0] * k
    for q in range(k):
        for x in whole[q]:
            assign[x] = q
            floor_rate[q] += instance.etas[q] * n[x]
    for x, claimants in shared:
        winner = min(claimants, key=lambda q: (floor_rate[q], q))
        assign[x] = winner
        floor_rate[winner] += instance.etas[winner] * n[x]
    return _finish(instance, assign)
