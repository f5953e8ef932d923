"""Implicit time stepping for grid functions with multiset values.

Each step minimizes  dirichlet_energy(g) + l2_distance_sq(g, f_prev) / tau
over grid functions that agree with f_prev on the boundary.  The solver
alternates between recomputing optimal branch pairings and a conjugate
gradient solve of the resulting convex quadratic; for n = 1 the canonical
(sorted) storage makes every pairing the identity and a single sweep is
exact.  Two step size schedules are provided: a geometric one where step k
uses tau = h / 2^k, and a uniform one with tau = T / N.

The interpolated trajectory of the geometric schedule holds each state on
a plateau and crosses to the next state on a short terminal ramp through
the sorted embedding; the uniform schedule interpolates linearly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    GridDomain,
    QGridFunction,
    _canonical_rows,
    dirichlet_energy,
    l2_distance_sq,
)
from .qspace import ascending_projection, optimal_matching, make_qpoint

__all__ = [
    "StepSchedule",
    "SolverOptions",
    "StepReport",
    "FlowTrajectory",
    "geometric_schedule",
    "uniform_schedule",
    "minimize_step",
    "run_flow",
    "evaluate_at_time",
    "step_estimate_margin",
    "holder_margin",
]


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes for N implicit steps over the horizon [0, total]."""

    mode: str
    h: float
    steps: int
    total: float

    def __post_init__(self):
        if self.mode not in ("geometric", "uniform"):
            raise ValueError("mode must be 'geometric' or 'uniform'")
        if self.h <= 0 or self.total <= 0:
            raise ValueError("step sizes must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")

    def tau(self, k: int) -> float:
        """Step size of step k, 1 <= k <= steps."""
        if not 1 <= k <= self.steps:
            raise ValueError(f"step index {k} outside 1..{self.steps}")
        if self.mode == "geometric":
            return self.h * 0.5**k
        return self.h


def geometric_schedule(h: float, steps: int) -> StepSchedule:
    """Halving steps tau_k = h / 2^k; the wall horizon is steps * h."""
    return StepSchedule("geometric", float(h), int(steps), float(h) * int(steps))


def uniform_schedule(total_time: float, steps: int) -> StepSchedule:
    """Constant steps tau = total_time / steps."""
    steps = int(steps)
    return StepSchedule("uniform", float(total_time) / steps, steps, float(total_time))


@dataclass(frozen=True)
class SolverOptions:
    outer_tol: float = 1e-12        # relative objective decrease to stop
    max_outer: int = 100
    cg_tol: float = 1e-12           # relative residual target
    stationarity_tol: float = 1e-10  # absolute first-order target, delta^-m scale
    cg_iter_factor: int = 10        # iteration cap = factor * unknowns


@dataclass(frozen=True)
class StepReport:
    k: int
    tau: float
    energy_before: float
    energy_after: float
    penalty: float
    outer_iterations: int
    converged: bool
    objective_trace: tuple
    stationarity: float


@dataclass(frozen=True)
class FlowTrajectory:
    schedule: StepSchedule
    snapshots: tuple
    reports: tuple

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.reports) and len(
            self.reports
        ) == self.schedule.steps

    @property
    def completed_steps(self) -> int:
        return len(self.snapshots) - 1

    @property
    def energies(self) -> list:
        return [dirichlet_energy(f) for f in self.snapshots]

    @property
    def effective_time(self) -> float:
        """Sum of the step sizes actually taken."""
        return math.fsum(r.tau for r in self.reports)

    def ramp_intervals(self) -> tuple:
        """Terminal crossing windows of the geometric interpolation."""
        if self.schedule.mode != "geometric":
            return ()
        h = self.schedule.h
        out = []
        for k in range(1, self.completed_steps + 1):
            end = k * h
            out.append((end - self.schedule.tau(k), end))
        return tuple(out)


def _cg(apply_a, b, x0, rel_tol, abs_tol_inf, max_iter):
    """Conjugate gradients on an SPD operator.

    Runs until both the relative l2 and the absolute max-norm residual
    targets hold, the iteration cap is reached, or the residual stops
    improving (floating point floor).  Every exit is confirmed against a
    freshly recomputed residual; when the recursive residual has drifted
    from the truth the iteration restarts, a bounded number of times, so
    the reported residual is never the recursive fiction.  The returned
    iterate never has a larger quadratic objective than x0.
    """
    x = np.array(x0, dtype=float)
    rel_target = rel_tol * float(np.linalg.norm(b))
    it = 0
    true_inf = math.inf
    for _attempt in range(3):
        r = b - apply_a(x)
        rs = float(r @ r)
        d = r.copy()
        best = math.inf
        stall = 0
        on_targets = False
        while True:
            rnorm = math.sqrt(rs)
            rinf = float(np.max(np.abs(r), initial=0.0))
            if rnorm <= rel_target and rinf <= abs_tol_inf:
                on_targets = True
                break
            if it >= max_iter:
                break
            if rnorm < 0.99 * best:
                best = rnorm
                stall = 0
            else:
                stall += 1
                if stall >= 30:
                    break
            ad = apply_a(d)
            dad = float(d @ ad)
            if dad <= 0.0:  # operator floor, cannot make progress
                break
            alpha = rs / dad
            x += alpha * d
            it += 1
            r -= alpha * ad
            rs_new = float(r @ r)
            beta = rs_new / rs if rs > 0 else 0.0
            rs = rs_new
            d = r + beta * d
        true_r = b - apply_a(x)
        true_norm = float(np.linalg.norm(true_r))
        true_inf = float(np.max(np.abs(true_r), initial=0.0))
        if not on_targets:
            break  # stopped on a cap or a floor; nothing left to try
        if true_norm <= rel_target and true_inf <= abs_tol_inf:
            break
    return x, it, true_inf


def _edge_split(domain: GridDomain):
    """Interior-interior edge pairs (in interior numbering) and, for edges
    with one fixed endpoint, the interior side with its boundary node."""
    int_of = -np.ones(domain.num_nodes, dtype=np.int64)
    int_of[domain.interior] = np.arange(len(domain.interior))
    ea, eb = domain.edges[:, 0], domain.edges[:, 1]
    a_in = int_of[ea] >= 0
    b_in = int_of[eb] >= 0
    both = a_in & b_in
    ii_a = int_of[ea[both]]
    ii_b = int_of[eb[both]]
    only_a = a_in & ~b_in
    only_b = b_in & ~a_in
    bd_int = np.concatenate([int_of[ea[only_a]], int_of[eb[only_b]]])
    bd_node = np.concatenate([eb[only_a], ea[only_b]])
    return int_of, ii_a, ii_b, bd_int, bd_node


def _solve_identity(vals, prev_vals, domain, tau, opts, ctx):
    """Frozen-pairing solve when every pairing is the identity: the system
    decouples into one scalar screened Poisson problem per branch and
    coordinate, anchored at the previous snapshot.  Solving per branch
    keeps exact sign symmetry."""
    int_of, ii_a, ii_b, bd_int, bd_node = ctx
    interior = domain.interior
    ni = len(interior)
    w_e = domain.delta ** (domain.m - 2)
    w_p = domain.delta**domain.m / tau
    bd_deg = np.bincount(bd_int, minlength=ni).astype(float)
    abs_target = opts.stationarity_tol * domain.delta**domain.m
    max_iter = max(opts.cg_iter_factor * ni, 50)

    def apply_a(x):
        diff = x[ii_a] - x[ii_b]
        lap = np.bincount(ii_a, weights=diff, minlength=ni).astype(float)
        lap -= np.bincount(ii_b, weights=diff, minlength=ni)
        lap += bd_deg * x
        return w_e * lap + w_p * x

    worst_inf = 0.0
    for bidx in range(vals.shape[1]):
        for c in range(vals.shape[2]):
            p = prev_vals[interior, bidx, c]
            bvals = prev_vals[bd_node, bidx, c]
            rhs = w_p * p + w_e * np.bincount(bd_int, weights=bvals, minlength=ni)
            x, _, rinf = _cg(apply_a, rhs, vals[interior, bidx, c],
                             opts.cg_tol, abs_target, max_iter)
            vals[interior, bidx, c] = x
            worst_inf = max(worst_inf, rinf)
    return worst_inf


def _solve_matched(vals, prev_vals, domain, tau, opts, ctx, edge_sigma, node_nu):
    """Frozen-pairing solve with explicit pairings, one wired system per
    coordinate over all interior branch values."""
    int_of, *_ = ctx
    interior = domain.interior
    ni = len(interior)
    qq = vals.shape[1]
    nun = ni * qq
    w_e = domain.delta ** (domain.m - 2)
    w_p = domain.delta**domain.m / tau
    abs_target = opts.stationarity_tol * domain.delta**domain.m
    max_iter = max(opts.cg_iter_factor * nun, 50)
    branch = np.arange(qq)

    rows_a, rows_b = [], []
    diag_extra = np.zeros(nun)
    pulled = np.zeros((nun, vals.shape[2]))
    for e, (a, b) in enumerate(domain.edges):
        sig = edge_sigma[e]
        a_in = int_of[a] >= 0
        b_in = int_of[b] >= 0
        if a_in and b_in:
            rows_a.append(int_of[a] * qq + branch)
            rows_b.append(int_of[b] * qq + sig)
        elif a_in:
            rows = int_of[a] * qq + branch
            diag_extra[rows] += 1.0
            pulled[rows] += vals[b][sig]
        elif b_in:
            rows = int_of[b] * qq + sig
            diag_extra[rows] += 1.0
            pulled[rows] += vals[a][branch]
    ra = np.concatenate(rows_a) if rows_a else np.zeros(0, dtype=np.int64)
    rb = np.concatenate(rows_b) if rows_b else np.zeros(0, dtype=np.int64)

    matched_prev = np.empty((ni, qq, vals.shape[2]))
    for j, x in enumerate(interior):
        matched_prev[j] = prev_vals[x][node_nu[j]]

    def apply_a(x):
        diff = x[ra] - x[rb]
        lap = np.bincount(ra, weights=diff, minlength=nun).astype(float)
        lap -= np.bincount(rb, weights=diff, minlength=nun)
        lap += diag_extra * x
        return w_e * lap + w_p * x

    worst_inf = 0.0
    for c in range(vals.shape[2]):
        rhs = w_p * matched_prev[:, :, c].ravel() + w_e * pulled[:, c]
        x0 = vals[interior, :, c].ravel()
        x, _, rinf = _cg(apply_a, rhs, x0, opts.cg_tol, abs_target, max_iter)
        vals[interior, :, c] = x.reshape(ni, qq)
        worst_inf = max(worst_inf, rinf)
    return worst_inf


def minimize_step(f_prev: QGridFunction, tau: float,
                  opts: SolverOptions | None = None, step_index: int = 0):
    """One implicit step from f_prev.

    Returns (f_next, report) with the boundary of f_prev preserved and
    objective value never above the starting one, so the Dirichlet energy
    cannot increase across the step.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    opts = opts or SolverOptions()
    domain = f_prev.domain
    energy_before = dirichlet_energy(f_prev)

    if energy_before == 0.0:
        # constant data is a fixed point of every step
        report = StepReport(step_index, tau, 0.0, 0.0, 0.0, 0, True, (0.0,), 0.0)
        return f_prev, report

    ctx = _edge_split(domain)
    vals = f_prev.values.copy()
    prev_vals = f_prev.values
    identity_only = f_prev.n == 1

    def objective(g):
        return dirichlet_energy(g) + l2_distance_sq(g, f_prev) / tau

    trace = [energy_before]  # objective at f_prev: penalty vanishes
    converged = False
    outer = 0
    stationarity = 0.0
    current = f_prev
    while outer < opts.max_outer:
        outer += 1
        if identity_only:
            stationarity = _solve_identity(vals, prev_vals, domain, tau, opts, ctx)
        else:
            edge_sigma = [
                np.asarray(
                    optimal_matching(
                        make_qpoint(vals[a]), make_qpoint(vals[b])
                    ).sigma,
                    dtype=np.int64,
                )
                for a, b in domain.edges
            ]
            node_nu = [
                np.asarray(
                    optimal_matching(
                        make_qpoint(vals[x]), make_qpoint(prev_vals[x])
                    ).sigma,
                    dtype=np.int64,
                )
                for x in domain.interior
            ]
            stationarity = _solve_matched(
                vals, prev_vals, domain, tau, opts, ctx, edge_sigma, node_nu
            )
        vals = _canonical_rows(vals)
        candidate = QGridFunction(domain, vals.copy())
        value = objective(candidate)
        if value >= trace[-1]:
            # floating point floor reached; keep the last accepted iterate
            converged = True
            break
        current = candidate
        trace.append(value)
        if trace[-2] - value <= opts.outer_tol * max(1.0, abs(trace[-2])):
            converged = True
            break

    energy_after = dirichlet_energy(current)
    penalty = l2_distance_sq(current, f_prev)
    report = StepReport(
        step_index,
        tau,
        energy_before,
        energy_after,
        penalty,
        outer,
        converged,
        tuple(trace),
        stationarity / domain.delta**domain.m,
    )
    return current, report


def run_flow(f0: QGridFunction, schedule: StepSchedule,
             opts: SolverOptions | None = None) -> FlowTrajectory:
    """Run the full chain of implicit steps.  A step that fails to converge
    truncates the trajectory; its best iterate is kept and flagged."""
    opts = opts or SolverOptions()
    snapshots = [f0]
    reports = []
    current = f0
    for k in range(1, schedule.steps + 1):
        current, report = minimize_step(current, schedule.tau(k), opts, step_index=k)
        snapshots.append(current)
        reports.append(report)
        if not report.converged:
            break
    return FlowTrajectory(schedule, tuple(snapshots), tuple(reports))


def _blend_sorted(prev: QGridFunction, nxt: QGridFunction, a: float) -> QGridFunction:
    """Convex combination through the sorted embedding, then the retraction
    onto the ascending cone (a no-op on ascending rows, applied anyway).
    Boundary rows are pinned rather than blended: both endpoints share them
    bitwise and (1-a)*v + a*v can drift by an ulp."""
    emb_prev = prev.values[:, :, 0]
    emb_next = nxt.values[:, :, 0]
    blend = (1.0 - a) * emb_prev + a * emb_next
    bnd = prev.domain.is_boundary
    blend[bnd] = emb_prev[bnd]
    proj = np.stack([ascending_projection(row) for row in blend])
    return QGridFunction(prev.domain, proj[:, :, None])


def evaluate_at_time(traj: FlowTrajectory, t: float) -> QGridFunction:
    """State of the interpolated trajectory at wall time t.

    Geometric mode: constant plateaus with a crossing ramp of length tau_k
    at the end of each step window.  Uniform mode: linear interpolation
    between consecutive states.  Blending requires n = 1.
    """
    sched = traj.schedule
    completed = traj.completed_steps
    horizon = sched.total if completed == sched.steps else completed * sched.h
    slack = 1e-12 * max(1.0, abs(horizon))
    if t < -slack or t > horizon + slack:
        raise ValueError(f"time {t} outside [0, {horizon}]")
    t = min(max(t, 0.0), horizon)
    if completed == 0:
        return traj.snapshots[0]

    if sched.mode == "uniform":
        i = min(int(t / sched.h), completed - 1)
        a = (t - i * sched.h) / sched.h
        a = min(max(a, 0.0), 1.0)
        if a == 0.0:
            return traj.snapshots[i]
        if a == 1.0:
            return traj.snapshots[i + 1]
        if traj.snapshots[0].n != 1:
            raise ValueError("interpolation requires n = 1")
        return _blend_sorted(traj.snapshots[i], traj.snapshots[i + 1], a)

    k = min(int(t / sched.h) + 1, completed)
    ramp_len = sched.tau(k)
    ramp_start = k * sched.h - ramp_len
    if t <= ramp_start:
        return traj.snapshots[k - 1]
    if t >= k * sched.h:
        return traj.snapshots[k]
    if traj.snapshots[0].n != 1:
        raise ValueError("interpolation requires n = 1")
    a = (t - ramp_start) / ramp_len
    return _blend_sorted(traj.snapshots[k - 1], traj.snapshots[k], a)


def step_estimate_margin(report: StepReport) -> float:
    """Slack in the step penalty bound
    penalty <= tau * (energy_before - energy_after)."""
    return report.tau * (report.energy_before - report.energy_after) - report.penalty


def holder_margin(traj: FlowTrajectory, t: float, s: float) -> float:
    """Slack in the time regularity bound
    distance(F(t), F(s)) <= sqrt((s - t) + h) * sqrt(initial energy)."""
    if not t < s:
        raise ValueError("need t < s")
    ft = evaluate_at_time(traj, t)
    fs = evaluate_at_time(traj, s)
    dist = math.sqrt(l2_distance_sq(ft, fs))
    bound = math.sqrt((s - t) + traj.schedule.h) * math.sqrt(
        dirichlet_energy(traj.snapshots[0])
    )
    return bound - dist
