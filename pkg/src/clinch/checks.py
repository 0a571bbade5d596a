"""Property harness: truthfulness, rationality, optimality, monotonicity.

Every checker returns a PropertyReport rather than raising: failures are
data.  Two deliberately different Pareto checkers run side by side (a
trade-based characterization and a direct randomized improvement search)
and the report records both verdicts; the test suite treats any
disagreement between them on engine outcomes as a build-stopping bug.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine, oracle
from .core import (
    ABS_FLOOR,
    EVENT_EXIT,
    EventTrace,
    Outcome,
    PriceState,
    ValidatedInstance,
    check_price_state,
    validate_instance,
)
from .engine import state_at, wishful_allocation

_GAUSS_NODES = 48


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one property check over one instance or corpus."""

    name: str
    corpus: str
    passed: bool
    worst_violation: float
    witness: dict | None = None
    details: tuple[str, ...] = ()

    def __post_init__(self):
        if self.passed and self.witness is not None:
            raise ValueError("a passing report cannot carry a witness")
        if not self.passed and self.witness is None:
            raise ValueError("a failing report must carry a witness")

    def to_dict(self) -> dict:
        return {"property": self.name, "corpus": self.corpus, "passed": self.passed,
                "worst_violation": self.worst_violation, "witness": self.witness,
                "details": list(self.details)}


def _witness(inst: ValidatedInstance, **extra) -> dict:
    doc = {"values": list(inst.values), "budgets": list(inst.budgets),
           "supply": inst.supply}
    doc.update(extra)
    return doc


def merge_reports(name: str, corpus: str, reports: list[PropertyReport]) -> PropertyReport:
    """Deterministic merge: worst violation wins, first witness kept."""
    worst = max((r.worst_violation for r in reports), default=0.0)
    failed = [r for r in reports if not r.passed]
    details = tuple(d for r in reports for d in r.details)
    if failed:
        return PropertyReport(name, corpus, False, worst, failed[0].witness, details)
    return PropertyReport(name, corpus, True, worst, None, details)


# ---------------------------------------------------------------------------
# Corpora

@dataclass(frozen=True)
class CorpusSpec:
    """Seeded random-instance generator parameters."""

    count: int = 100
    n_min: int = 2
    n_max: int = 8
    v_max: float = 10.0
    b_min: float = 0.0
    b_max: float = 5.0
    s_max: float = 20.0
    seed: int = 0

    def describe(self) -> str:
        return (f"{self.count} seeded instances, n in [{self.n_min},{self.n_max}], "
                f"values (0,{self.v_max}], budgets ({self.b_min},{self.b_max}], "
                f"supply (0,{self.s_max}], seed {self.seed}")


def random_instances(spec: CorpusSpec) -> list[ValidatedInstance]:
    rng = np.random.default_rng(spec.seed)
    out = []
    for _ in range(spec.count):
        n = int(rng.integers(spec.n_min, spec.n_max + 1))
        vals = spec.v_max * (1.0 - rng.random(n))
        buds = spec.b_min + (spec.b_max - spec.b_min) * (1.0 - rng.random(n))
        s = spec.s_max * (1.0 - rng.random())
        out.append(validate_instance(values=vals, budgets=buds, supply=s))
    return out


def property_corpus(seed: int = 0, count: int = 1000) -> CorpusSpec:
    """The canonical corpus for the truthfulness/optimality property suite."""
    return CorpusSpec(count=count, n_min=2, n_max=8, v_max=10.0, b_max=5.0,
                      s_max=20.0, seed=seed)


def oracle_corpus(seed: int = 0, count: int = 200) -> CorpusSpec:
    """Corpus for engine-vs-integrator agreement.

    A first-order walk's absolute error scales with the money moved and
    with 1/p at the first clinch entry, so the agreement tolerance pins
    the instance scale: budgets bounded away from zero and supply of
    order one keep the entry price, and with it the error constant, in
    the regime the stated tolerance was calibrated for.  Harder scales
    are exercised by the engine-vs-closed-form and property suites, which
    do not go through the integrator.
    """
    return CorpusSpec(count=count, n_min=2, n_max=6, v_max=10.0, b_min=0.5,
                      b_max=2.0, s_max=1.5, seed=seed)


def stratified_two_player(seed: int = 0, count: int = 10000,
                          budget_ratio_max: float = 4.0) -> list[ValidatedInstance]:
    """n=2 instances balanced across the six closed-form regimes.

    Supply is sampled inside the regime's spend window (below the poorer
    budget, between it and the split knee, or beyond the knee), for both
    value orders; player labels are then swapped at random so the
    relabeling path is exercised too.
    """
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        regime = k % 6
        v_pair = 10.0 * (1.0 - rng.random(2))
        lo, hi = sorted(v_pair)
        if regime < 3:
            v1, v2 = lo, hi          # higher value on the poorer side
        else:
            v1, v2 = hi, lo
        b2 = 0.05 + 4.95 * (1.0 - rng.random())
        b1 = b2 * (1.0 + (budget_ratio_max - 1.0) * rng.random())
        knee = b2 * math.exp(b1 / b2 - 1.0)
        vmin = min(v1, v2)
        u = rng.random()
        if regime % 3 == 0:
            spend = b2 * u
        elif regime % 3 == 1:
            spend = b2 + (knee - b2) * u
        else:
            spend = knee * (1.0 + 3.0 * u)
        s = spend / vmin
        vals, buds = [v1, v2], [b1, b2]
        if rng.random() < 0.5:
            vals, buds = vals[::-1], buds[::-1]
        out.append(validate_instance(values=vals, budgets=buds, supply=s))
    return out


# ---------------------------------------------------------------------------
# Truthfulness / rationality / budget feasibility

def misreport_grid(inst: ValidatedInstance, player: int, points: int = 50,
                   rel: float = 1e-9) -> list[float]:
    """Candidate misreports: an even grid over [0, 2 max v] plus every
    opponent value nudged one tolerance-width to either side (the only
    discontinuity candidates)."""
    top = 2.0 * max(inst.values)
    grid = [top * k / (points - 1) for k in range(points)]
    for j, v in enumerate(inst.values):
        if j == player:
            continue
        eps = max(ABS_FLOOR, rel * max(1.0, v))
        grid.extend((max(v - eps, 0.0), v + eps))
    return grid


def check_ic(inst: ValidatedInstance, solver=engine.solve, points: int = 50,
             slack: float = 1e-6) -> PropertyReport:
    """No player can gain more than `slack` by any grid misreport."""
    base = solver(inst)
    worst = 0.0
    witness = None
    for i in range(inst.n):
        truth = inst.values[i] * base.allocation[i] - base.payments[i]
        for report in misreport_grid(inst, i, points):
            vals = list(inst.values)
            vals[i] = report
            dev = solver(validate_instance(values=vals, budgets=inst.budgets,
                                           supply=inst.supply))
            gain = (inst.values[i] * dev.allocation[i] - dev.payments[i]) - truth
            if gain > worst:
                worst = gain
                if gain > slack:
                    witness = _witness(inst, player=i, misreport=report, gain=gain)
    return PropertyReport("incentive-compatibility", "single instance",
                          witness is None, worst, witness)


def check_ir(inst: ValidatedInstance, outcome: Outcome, tol: float = 1e-9
             ) -> PropertyReport:
    """Truthful utility is non-negative for every player."""
    worst = 0.0
    witness = None
    for i in range(inst.n):
        u = inst.values[i] * outcome.allocation[i] - outcome.payments[i]
        bad = -u
        if bad > worst:
            worst = bad
            if bad > tol * max(1.0, abs(u)):
                witness = _witness(inst, player=i, utility=u)
    return PropertyReport("individual-rationality", "single instance",
                          witness is None, worst, witness)


def check_budget(inst: ValidatedInstance, outcome: Outcome, tol: float = 1e-9
                 ) -> PropertyReport:
    """Payments stay inside declared budgets (and are non-negative)."""
    worst = 0.0
    witness = None
    for i in range(inst.n):
        over = max(outcome.payments[i] - inst.budgets[i], -outcome.payments[i])
        if over > worst:
            worst = over
            if over > tol * max(1.0, inst.budgets[i]):
                witness = _witness(inst, player=i, payment=outcome.payments[i])
    return PropertyReport("budget-feasibility", "single instance",
                          witness is None, worst, witness)


# ---------------------------------------------------------------------------
# Pareto optimality: characterization + randomized direct search

def _characterization_violation(inst: ValidatedInstance, outcome: Outcome,
                                tol: float = 1e-9) -> tuple[float, str | None]:
    """No-improving-trade conditions: supply sold out (all values positive),
    and no higher-value player keeps budget slack while a lower-value
    player holds goods."""
    n = inst.n
    money = lambda x: tol * max(1.0, abs(x))
    if n >= 2 and all(v > 0.0 for v in inst.values):
        unsold = inst.supply - sum(outcome.allocation)
        if unsold > money(inst.supply):
            return unsold, f"unsold supply {unsold}"
    for i in range(n):
        slack = inst.budgets[i] - outcome.payments[i]
        if slack <= money(inst.budgets[i]):
            continue
        for j in range(n):
            if inst.values[i] <= inst.values[j] or outcome.allocation[j] <= money(1.0):
                continue
            size = min(slack, (inst.values[i] - inst.values[j]) * outcome.allocation[j])
            return size, (f"player {i} has budget slack {slack} while lower-value "
                          f"player {j} holds {outcome.allocation[j]} units")
    return 0.0, None


def _search_improvement(inst: ValidatedInstance, outcome: Outcome,
                        rng: np.random.Generator, candidates: int = 1000,
                        margin: float = 1e-6) -> tuple[float, dict | None]:
    """Randomized direct search for a dominating outcome.

    Candidates are alternative (x', pay') pairs; a find must weakly improve
    every bidder and the seller with one strict gain beyond `margin`.
    Payments may go negative (the comparison class allows compensating a
    bidder for giving up goods); only pay' <= budget is required.
    """
    n = inst.n
    v = np.asarray(inst.values)
    b = np.asarray(inst.budgets)
    x0 = np.asarray(outcome.allocation)
    p0 = np.asarray(outcome.payments)
    u0 = v * x0 - p0
    eps = 1e-12

    best_gain, best = 0.0, None

    def consider(x1: np.ndarray, p1: np.ndarray, label: str) -> None:
        nonlocal best_gain, best
        if (x1 < -eps).any() or x1.sum() > inst.supply + eps:
            return
        if (p1 > b + eps).any():
            return
        u1 = v * x1 - p1
        gains = np.concatenate([u1 - u0, [p1.sum() - p0.sum()]])
        if (gains < -eps).any():
            return
        strict = float(gains.max())
        if strict > max(best_gain, margin):
            best_gain = strict
            best = {"kind": label, "x": x1.tolist(), "pay": p1.tolist(),
                    "gain": strict}

    unsold = inst.supply - float(x0.sum())
    if unsold > 0.0:
        for i in range(n):
            if v[i] > 0.0:
                x1 = x0.copy()
                x1[i] += unsold
                consider(x1, p0.copy(), "sell unsold supply")

    pairs = [(i, j) for i in range(n) for j in range(n)
             if i != j and v[i] > v[j] and x0[j] > 0.0]
    for k in range(candidates):
        if pairs and k % 2 == 0:
            i, j = pairs[k // 2 % len(pairs)]
            size = min(x0[j], (b[i] - p0[i]) / max(v[i], eps)) * rng.random()
            if size <= 0.0:
                continue
            x1 = x0.copy()
            x1[i] += size
            x1[j] -= size
            p1 = p0.copy()
            charge = size * (v[j] + (v[i] - v[j]) * rng.random())
            p1[i] += charge
            p1[j] -= size * v[j]
            consider(x1, p1, "pairwise trade with compensation")
        else:
            x1 = np.maximum(x0 + rng.normal(0.0, 0.1, n) * max(1.0, inst.supply), 0.0)
            total = x1.sum()
            if total > inst.supply:
                x1 *= inst.supply / total
            p1 = p0 + rng.normal(0.0, 0.1, n) * np.maximum(1.0, b)
            consider(x1, np.minimum(p1, b), "random perturbation")
    return best_gain, best


def check_pareto(inst: ValidatedInstance, outcome: Outcome,
                 rng: np.random.Generator | None = None, candidates: int = 1000,
                 tol: float = 1e-9, margin: float = 1e-6) -> PropertyReport:
    """Both Pareto checkers; the report records each verdict.

    Fails when either the trade characterization or the direct randomized
    search flags the outcome.  The `details` tuple carries the two
    sub-verdicts so that disagreement between them is visible to callers.
    """
    rng = rng or np.random.default_rng(0)
    char_viol, char_msg = _characterization_violation(inst, outcome, tol)
    search_gain, search_hit = _search_improvement(inst, outcome, rng, candidates,
                                                  margin)
    details = (f"characterization: {'fail: ' + char_msg if char_msg else 'pass'}",
               f"search: {'fail, gain ' + repr(search_gain) if search_hit else 'pass'}")
    failed = char_msg is not None or search_hit is not None
    worst = max(char_viol, search_gain if search_hit else 0.0)
    witness = None
    if failed:
        witness = _witness(inst, characterization=char_msg, improvement=search_hit)
    return PropertyReport("pareto-optimality", "single instance", not failed,
                          worst, witness, details)


# ---------------------------------------------------------------------------
# Supply monotonicity

def check_supply_monotonicity(values, budgets, supply_pairs,
                              config: engine.EngineConfig = engine.DEFAULT_CONFIG,
                              slack: float = 1e-8) -> PropertyReport:
    """x, payments and utilities all grow with supply; the wishful
    allocation of the larger run dominates at every shared trace price."""
    worst = 0.0
    witness = None
    for s_lo, s_hi in supply_pairs:
        if s_lo > s_hi:
            s_lo, s_hi = s_hi, s_lo
        lo = validate_instance(values=values, budgets=budgets, supply=s_lo)
        hi = validate_instance(values=values, budgets=budgets, supply=s_hi)
        tr_lo, tr_hi = engine.trace(lo, config), engine.trace(hi, config)
        out_lo, out_hi = tr_lo.outcome, tr_hi.outcome
        for i in range(lo.n):
            drops = (
                (out_lo.allocation[i] - out_hi.allocation[i], "allocation"),
                (out_lo.payments[i] - out_hi.payments[i], "payment"),
                ((lo.values[i] * out_lo.allocation[i] - out_lo.payments[i])
                 - (hi.values[i] * out_hi.allocation[i] - out_hi.payments[i]),
                 "utility"),
            )
            for drop, what in drops:
                if drop > worst:
                    worst = drop
                    if drop > slack:
                        witness = _witness(lo, player=i, quantity=what,
                                           pair=[s_lo, s_hi])
        prices = sorted({ev.price for ev in tr_lo.events + tr_hi.events
                         if ev.price > 0.0})
        for p in prices:
            psi_lo = wishful_allocation(state_at(tr_lo, p, config))
            psi_hi = wishful_allocation(state_at(tr_hi, p, config))
            for i in range(lo.n):
                drop = psi_lo[i] - psi_hi[i]
                if drop > worst:
                    worst = drop
                    if drop > slack:
                        witness = _witness(lo, player=i, quantity="wishful allocation",
                                           price=p, pair=[s_lo, s_hi])
    return PropertyReport("supply-monotonicity", "single value/budget profile",
                          witness is None, worst, witness)


# ---------------------------------------------------------------------------
# Engine-vs-integrator agreement

def check_oracle_agreement(instances, h: float = 1e-4, tol: float | None = None,
                           shrink: float = 1.5,
                           config: engine.EngineConfig = engine.DEFAULT_CONFIG
                           ) -> PropertyReport:
    """Componentwise engine/integrator agreement at step h, plus first-order
    convergence: the corpus mean error must shrink by `shrink` when h halves.

    The default agreement tolerance is 10*h, matching the integrator's
    membership tolerance scale (a first-order method's error budget moves
    with its step)."""
    if tol is None:
        tol = 10.0 * h
    worst = 0.0
    witness = None
    errs_h, errs_h2 = [], []
    for inst in instances:
        ref = engine.solve(inst, config)
        approx = oracle.solve_euler(inst, h)
        fine = oracle.solve_euler(inst, h / 2.0)
        err = max(abs(a - b) for a, b in zip(approx.allocation + approx.payments,
                                             ref.allocation + ref.payments))
        err2 = max(abs(a - b) for a, b in zip(fine.allocation + fine.payments,
                                              ref.allocation + ref.payments))
        errs_h.append(err)
        errs_h2.append(err2)
        if err > worst:
            worst = err
            if err > tol:
                witness = _witness(inst, error=err, step=h)
    mean_h, mean_h2 = float(np.mean(errs_h)), float(np.mean(errs_h2))
    details = (f"max err at h: {worst:.3e}", f"mean err at h: {mean_h:.3e}",
               f"mean err at h/2: {mean_h2:.3e}")
    if witness is None and mean_h2 > 0.0 and mean_h / mean_h2 < shrink:
        witness = {"convergence_ratio": mean_h / mean_h2, "required": shrink}
        worst = max(worst, shrink - mean_h / mean_h2)
    return PropertyReport("integration-oracle-agreement",
                          f"{len(errs_h)} instances at h={h:g}",
                          witness is None, worst, witness, details)


# ---------------------------------------------------------------------------
# Trace invariants

def _segment_budget(start: PriceState, i: int, rho: np.ndarray) -> np.ndarray:
    """Closed-form remaining budget of player i on a constant-set segment."""
    if i not in start.clinching:
        return np.full(rho.shape, start.budgets[i])
    k = len(start.clinching)
    p0, s0, b0 = start.price, start.supply, start.budgets[i]
    if k == 1:
        return b0 + p0 * s0 * (np.log(p0) - np.log(rho))
    return b0 + p0 * s0 / (k - 1) * ((p0 / rho) ** (k - 1) - 1.0)


def _segment_sales(start: PriceState, rho: np.ndarray) -> np.ndarray:
    """Rate of money spent, rho * (-dS/d rho), on a constant-set segment."""
    k = len(start.clinching)
    if k == 0:
        return np.zeros(rho.shape)
    p0, s0 = start.price, start.supply
    return k * s0 * (p0 / rho) ** k


def verify_trace(tr: EventTrace, config: engine.EngineConfig = engine.DEFAULT_CONFIG,
                 rtol: float = 1e-8, samples: int = 5) -> list[str]:
    """Violation messages for every structural law along one trace.

    Covers the snapshot invariants at (and between) all recorded states,
    allocation/budget monotonicity, clinching persistence, the
    wishful-allocation laws (monotone, continuous across exits, decrement
    equal to the integral of B/price^2) and conservation of money against
    the price-weighted integral of sold supply.
    """
    bad: list[str] = []
    inst = validate_instance(values=tr.values, budgets=tr.budgets, supply=tr.supply)
    if inst.n == 1 or not tr.events:
        return bad
    nodes, weights = np.polynomial.legendre.leggauss(_GAUSS_NODES)

    def money_tol(x: float = 1.0) -> float:
        return max(ABS_FLOOR, rtol * max(1.0, abs(x)))

    def gauss(lo: float, hi: float, fvals) -> float:
        # geometric panels: segments can span decades of price and the
        # integrands blow up like 1/price^2 towards the left endpoint
        panels = min(max(int(math.ceil(math.log2(hi / lo))), 1), 64)
        cuts = lo * (hi / lo) ** np.linspace(0.0, 1.0, panels + 1)
        total = 0.0
        for a, b in zip(cuts, cuts[1:]):
            mid, half = 0.5 * (b + a), 0.5 * (b - a)
            total += float(np.sum(weights * fvals(mid + half * nodes)) * half)
        return total

    # snapshot invariants at recorded states, with the sub-step convention:
    # a state carrying a mid-removal active set skips the set-definition check
    first_exit_at = {}
    for ev in tr.events:
        first_exit_at.setdefault((ev.kind, ev.price), ev)
    states = [(engine.initial_state(inst), "gt", "initial", False)]
    for ev in tr.events:
        rule = "ge" if ev.kind == EVENT_EXIT else "gt"
        if ev.kind == EVENT_EXIT and first_exit_at[(ev.kind, ev.price)] is not ev:
            rule = "skip"
        states.append((ev.before, rule, f"before {ev.kind}@{ev.price:g}", True))
        full_after = ev.after.active == frozenset(
            i for i in range(inst.n) if tr.values[i] > ev.price)
        states.append((ev.after, "gt" if full_after else "skip",
                       f"after {ev.kind}@{ev.price:g}", not full_after))
    for st, rule, label, relaxed in states:
        for msg in check_price_state(st, tr.budgets, tr.supply, rtol, rule, relaxed):
            bad.append(f"{label}: {msg}")

    # interior of every inter-event segment
    segs = []
    prev = states[0][0]
    for ev in tr.events:
        segs.append((prev, ev.before.price))
        prev = ev.after
    for start, p_end in segs:
        if p_end <= start.price or not start.clinching:
            continue
        for frac in np.linspace(0.15, 0.85, samples):
            p = start.price + frac * (p_end - start.price)
            st = engine.evolve(start, float(p), config)
            for msg in check_price_state(st, tr.budgets, tr.supply, rtol, "gt"):
                bad.append(f"inside segment at p={p:g}: {msg}")

    # monotonicity and clinching persistence across recorded states
    seen_clinching: set[int] = set()
    prev_state = states[0][0]
    prev_psi = None
    for st, _, label, _relaxed in states[1:]:
        for i in range(inst.n):
            if st.allocation[i] < prev_state.allocation[i] - money_tol():
                bad.append(f"{label}: allocation of {i} decreased")
            if st.budgets[i] > prev_state.budgets[i] + money_tol(st.budgets[i]):
                bad.append(f"{label}: budget of {i} increased")
        for i in seen_clinching:
            if tr.values[i] > st.price and i not in st.clinching:
                bad.append(f"{label}: player {i} left the clinching set early")
        seen_clinching |= set(st.clinching)
        seen_clinching &= {i for i in range(inst.n) if tr.values[i] > st.price}
        if st.price > 0.0:
            psi = wishful_allocation(st)
            if prev_psi is not None:
                for i in range(inst.n):
                    if psi[i] > prev_psi[i] + money_tol(psi[i]):
                        bad.append(f"{label}: wishful allocation of {i} increased")
            prev_psi = psi
        prev_state = st

    # wishful allocation: continuity across exits, decrement = integral law
    for ev in tr.events:
        if ev.kind == EVENT_EXIT and ev.price > 0.0:
            pre, post = wishful_allocation(ev.before), wishful_allocation(ev.after)
            for i in range(inst.n):
                if abs(pre[i] - post[i]) > money_tol(pre[i]):
                    bad.append(f"exit@{ev.price:g}: wishful allocation of {i} jumped "
                               f"by {post[i] - pre[i]}")
    for start, p_end in segs:
        if p_end <= start.price or start.price <= 0.0:
            continue
        end = engine.evolve(start, p_end, config)
        psi0, psi1 = wishful_allocation(start), wishful_allocation(end)
        for i in range(inst.n):
            drop = gauss(start.price, p_end,
                         lambda r, i=i: _segment_budget(start, i, r) / r**2)
            if abs((psi0[i] - psi1[i]) - drop) > money_tol(psi0[i]):
                bad.append(f"segment from p={start.price:g}: wishful decrement of "
                           f"{i} is {psi0[i] - psi1[i]}, integral gives {drop}")

    # conservation: money collected so far == integral of rho * sold supply
    collected = 0.0
    for (start, p_end), ev in zip(segs, tr.events):
        if p_end > start.price and start.clinching:
            collected += gauss(start.price, p_end,
                               lambda r: _segment_sales(start, r))
        collected += sum(ev.delta_pay)
        total_paid = sum(b0 - b for b0, b in zip(tr.budgets, ev.after.budgets))
        if abs(total_paid - collected) > money_tol(collected):
            bad.append(f"after {ev.kind}@{ev.price:g}: money paid {total_paid} != "
                       f"price-weighted sales {collected}")

    # full allocation
    if all(v > 0.0 for v in tr.values) and inst.n >= 2:
        if abs(sum(tr.outcome.allocation) - tr.supply) > money_tol(tr.supply):
            bad.append(f"final allocation sums to {sum(tr.outcome.allocation)}, "
                       f"supply is {tr.supply}")
    return bad


# ---------------------------------------------------------------------------
# Myerson payment identity

def _adaptive_simpson(f, a: float, b: float, fa: float, fm: float, fb: float,
                      tol: float, depth: int) -> float:
    m = 0.5 * (a + b)
    flm, frm = f(0.5 * (a + m)), f(0.5 * (m + b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) < 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (_adaptive_simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)
            + _adaptive_simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1))


def myerson_gap(inst: ValidatedInstance, player: int,
                config: engine.EngineConfig = engine.DEFAULT_CONFIG,
                quad_tol: float = 1e-6) -> float:
    """|pay_i - (v_i x_i - integral of x_i over reports in [0, v_i])|.

    The allocation curve jumps only at opponent values but has steep knees
    inside the pieces (where a budget starts or stops binding as the
    report moves), so the re-solved allocation is integrated by adaptive
    Simpson between opponent values.
    """
    v_i = inst.values[player]
    out = engine.solve(inst, config)
    breaks = sorted({0.0, v_i, *(v for j, v in enumerate(inst.values)
                                 if j != player and 0.0 < v < v_i)})

    def x_of(u: float) -> float:
        vals = list(inst.values)
        vals[player] = float(u)
        dev = engine.solve(validate_instance(values=vals, budgets=inst.budgets,
                                             supply=inst.supply), config)
        return dev.allocation[player]

    integral = 0.0
    for lo, hi in zip(breaks, breaks[1:]):
        nudge = 1e-12 * (hi - lo)
        integral += _adaptive_simpson(x_of, lo, hi, x_of(lo + nudge),
                                      x_of(0.5 * (lo + hi)), x_of(hi - nudge),
                                      quad_tol, 36)
    predicted = v_i * out.allocation[player] - integral
    return abs(out.payments[player] - predicted)
