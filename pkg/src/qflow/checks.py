"""Named verification checks with pass/fail margins.

Each check returns a CheckResult whose margin is the clearance to the
failing boundary: nonnegative margins pass.  Value-level checks sample
random inputs from a caller-supplied generator; trajectory-level checks
recompute every quantity from the snapshots rather than trusting the
solver's own reports.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .qspace import (
    ascending_projection,
    make_qpoint,
    matching_distance,
    optimal_matching,
    sorted_embedding,
)
from .grid import (
    QGridFunction,
    branch_mean_field,
    branch_mean_residual,
    build_domain,
    dirichlet_energy,
    l2_distance_sq,
    scalar_dirichlet_energy,
    translate_field,
)
from .morseflow import (
    FlowTrajectory,
    SolverOptions,
    evaluate_at_time,
    holder_margin,
    minimize_step,
)
from .oracle import brute_force_step, implicit_euler_chain

__all__ = [
    "CheckResult",
    "CHECK_NAMES",
    "check_metric_axioms",
    "check_sorted_matching",
    "check_embedding_isometry",
    "check_ascending_projection",
    "check_translation_identity",
    "check_energy_monotonicity",
    "check_step_estimate",
    "check_eta_residual",
    "check_symmetry",
    "check_positivity",
    "check_max_principle",
    "check_boundary_trace",
    "check_holder",
    "check_brute_force",
    "check_oracle_equivalence",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str


# evaluation order used by the verify command
CHECK_NAMES = (
    "metric_axioms",
    "sorted_matching",
    "embedding_isometry",
    "ascending_projection",
    "translation_identity",
    "energy_monotonicity",
    "step_estimate",
    "eta_residual",
    "symmetry",
    "positivity",
    "max_principle",
    "boundary_trace",
    "holder",
    "brute_force",
    "oracle_equivalence",
)


def check_metric_axioms(rng, samples: int = 200) -> CheckResult:
    """Symmetry to 1e-12, exact zero on equal multisets, positive distance
    on distinct random ones, triangle inequality with 1e-10 slack."""
    margin = math.inf
    ok = True
    worst = ""
    for _ in range(samples):
        q = int(rng.integers(1, 7))
        n = int(rng.integers(1, 4))
        a = rng.normal(size=(q, n))
        b = rng.normal(size=(q, n))
        c = rng.normal(size=(q, n))
        pa, pb, pc = make_qpoint(a, n), make_qpoint(b, n), make_qpoint(c, n)
        dab = matching_distance(pa, pb)
        sym = 1e-12 - abs(dab - matching_distance(pb, pa))
        same = matching_distance(pa, make_qpoint(a[rng.permutation(q)], n))
        if same != 0.0:
            ok = False
            worst = f"nonzero distance {same:g} on a permuted copy"
        distinct = dab - 1e-12
        tri = matching_distance(pa, pb) + matching_distance(pb, pc) \
            + 1e-10 - matching_distance(pa, pc)
        margin = min(margin, sym, distinct, tri)
    passed = ok and margin >= 0.0
    detail = worst or (
        f"{samples} samples, q<=6, n<=3; smallest clearance {margin:.3e}"
    )
    return CheckResult("metric_axioms", passed, margin, detail)


def check_sorted_matching(rng, samples: int = 200) -> CheckResult:
    """For n = 1 the identity pairing of the canonical (ascending) forms
    must equal the exhaustive minimum over all pairings exactly."""
    worst = 0.0
    identity_ok = True
    for _ in range(samples):
        q = int(rng.integers(2, 7))
        a = np.sort(rng.normal(size=q))
        b = np.sort(rng.normal(size=q))
        match = optimal_matching(make_qpoint(a), make_qpoint(b))
        identity_ok &= match.sigma == tuple(range(q))
        best = min(
            float(((a - b[list(p)]) ** 2).sum())
            for p in itertools.permutations(range(q))
        )
        worst = max(worst, abs(match.cost - best))
    passed = identity_ok and worst == 0.0
    detail = f"{samples} samples, largest identity-vs-exhaustive gap {worst:.3e}"
    if not identity_ok:
        detail = "non-identity pairing returned for canonical operands"
    return CheckResult("sorted_matching", passed, -worst, detail)


def check_embedding_isometry(rng, samples: int = 200) -> CheckResult:
    gap = 0.0
    for _ in range(samples):
        q = int(rng.integers(1, 7))
        pa = make_qpoint(rng.normal(size=q))
        pb = make_qpoint(rng.normal(size=q))
        emb = float(np.linalg.norm(sorted_embedding(pa) - sorted_embedding(pb)))
        gap = max(gap, abs(emb - matching_distance(pa, pb)))
    margin = 1e-12 - gap
    return CheckResult(
        "embedding_isometry",
        margin >= 0.0,
        margin,
        f"{samples} samples, largest embedding-vs-metric gap {gap:.3e}",
    )


def check_ascending_projection(rng, samples: int = 200) -> CheckResult:
    margin = math.inf
    ok = True
    detail = ""
    for _ in range(samples):
        q = int(rng.integers(2, 9))
        x = rng.normal(size=q)
        if rng.random() < 0.3:  # exercise ties
            x[rng.integers(0, q)] = x[rng.integers(0, q)]
        y = rng.normal(size=q)
        px, py = ascending_projection(x), ascending_projection(y)
        if not (np.array_equal(ascending_projection(px), px)
                and np.all(np.diff(px) >= 0.0)):
            ok = False
            detail = "projection output not a fixed ascending point"
        xs = np.sort(x)
        if not np.array_equal(ascending_projection(xs), xs):
            ok = False
            detail = "projection moved an already ascending input"
        lip = float(np.linalg.norm(x - y)) + 1e-12 \
            - float(np.linalg.norm(px - py))
        margin = min(margin, lip)
    passed = ok and margin >= 0.0
    return CheckResult(
        "ascending_projection",
        passed,
        margin if ok else -math.inf,
        detail or f"{samples} samples, smallest Lipschitz clearance {margin:.3e}",
    )


def check_translation_identity(rng, domain, q: int, pairs: int = 50) -> CheckResult:
    """Shifting every branch by a single-valued field phi expands the energy
    as Dir(f) + 2q * <edge differences of the branch mean, of phi>
    + q * Dir(phi); the pairing-dependent part is unchanged by the shift, so
    the identity is exact up to rounding (1e-10 relative)."""
    def rel_gap(dom, f, phi):
        ea, eb = dom.edges[:, 0], dom.edges[:, 1]
        lhs = dirichlet_energy(translate_field(f, phi))
        eta = branch_mean_field(f)
        deta = eta[ea] - eta[eb]
        dphi = phi[ea] - phi[eb]
        cross = dom.delta ** (dom.m - 2) * float((deta * dphi).sum())
        rhs = dirichlet_energy(f) + 2.0 * f.q * cross \
            + f.q * scalar_dirichlet_energy(dom, phi)
        return abs(lhs - rhs) / max(1.0, abs(lhs))

    worst = 0.0
    for _ in range(pairs):
        f = QGridFunction(domain, rng.normal(size=(domain.num_nodes, q, 1)))
        phi = rng.normal(size=(domain.num_nodes, 1))
        worst = max(worst, rel_gap(domain, f, phi))
    # vector-valued spot checks on a small interval, pairings nontrivial
    small = build_domain(1, 11)
    for _ in range(8):
        f = QGridFunction(small, rng.normal(size=(small.num_nodes, 2, 2)))
        phi = rng.normal(size=(small.num_nodes, 2))
        worst = max(worst, rel_gap(small, f, phi))
    margin = 1e-10 - worst
    return CheckResult(
        "translation_identity",
        margin >= 0.0,
        margin,
        f"{pairs} scalar + 8 vector pairs, largest relative gap {worst:.3e}",
    )


def _energies(traj: FlowTrajectory):
    return [dirichlet_energy(f) for f in traj.snapshots]


def check_energy_monotonicity(traj: FlowTrajectory) -> CheckResult:
    energies = _energies(traj)
    margin = math.inf
    worst_k = 0
    for k in range(1, len(energies)):
        allowed = energies[k - 1] + 1e-10 * max(1.0, energies[k - 1])
        if allowed - energies[k] < margin:
            margin = allowed - energies[k]
            worst_k = k
    if math.isinf(margin):
        margin = 0.0
    return CheckResult(
        "energy_monotonicity",
        margin >= 0.0,
        margin,
        f"{len(energies) - 1} steps, tightest clearance {margin:.3e} at step {worst_k}",
    )


def check_step_estimate(traj: FlowTrajectory) -> CheckResult:
    energies = _energies(traj)
    raw = math.inf
    worst_k = 0
    for k, report in enumerate(traj.reports, start=1):
        penalty = l2_distance_sq(traj.snapshots[k - 1], traj.snapshots[k])
        slack = report.tau * (energies[k - 1] - energies[k]) - penalty
        if slack < raw:
            raw = slack
            worst_k = k
    if math.isinf(raw):
        raw = 0.0
    margin = raw + 1e-10
    return CheckResult(
        "step_estimate",
        margin >= 0.0,
        margin,
        f"smallest penalty-bound slack {raw:.3e} at step {worst_k}",
    )


def check_eta_residual(traj: FlowTrajectory) -> CheckResult:
    """Branch-mean step equation residual at every converged step, against
    the threshold 1e-8 * (1 + max |branch mean|)."""
    if traj.snapshots[0].n != 1:
        return CheckResult("eta_residual", False, -math.inf,
                           "defined for n = 1 only")
    margin = math.inf
    worst = ""
    skipped = 0
    for k, report in enumerate(traj.reports, start=1):
        if not report.converged:
            skipped += 1
            continue
        res = branch_mean_residual(traj.snapshots[k - 1], traj.snapshots[k],
                                   report.tau)
        eta_max = float(np.max(np.abs(branch_mean_field(traj.snapshots[k]))))
        clearance = 1e-8 * (1.0 + eta_max) - res
        if clearance < margin:
            margin = clearance
            worst = f"residual {res:.3e} at step {k}"
    if math.isinf(margin):
        margin = 0.0
        worst = "no converged steps"
    detail = worst + (f", {skipped} non-converged steps skipped" if skipped else "")
    return CheckResult("eta_residual", margin >= 0.0, margin, detail)


def check_symmetry(traj: FlowTrajectory) -> CheckResult:
    worst = max(
        float(np.max(np.abs(branch_mean_field(f)))) for f in traj.snapshots
    )
    margin = 1e-10 - worst
    return CheckResult(
        "symmetry",
        margin >= 0.0,
        margin,
        f"largest |branch mean| over all nodes and steps {worst:.3e}",
    )


def check_positivity(traj: FlowTrajectory) -> CheckResult:
    """Top branch strictly above 1e-12 at interior nodes from step 1 on."""
    interior = traj.snapshots[0].domain.interior
    if len(traj.snapshots) < 2 or len(interior) == 0:
        return CheckResult("positivity", False, -math.inf,
                           "needs at least one step and an interior node")
    low = min(
        float(np.min(f.values[interior, -1, 0])) for f in traj.snapshots[1:]
    )
    margin = low - 1e-12
    return CheckResult(
        "positivity",
        margin > 0.0,
        margin,
        f"smallest interior top-branch value after step 1 is {low:.3e}",
    )


def _max_norms(traj: FlowTrajectory):
    return [
        float(np.sqrt((f.values**2).sum(axis=(1, 2)).max()))
        for f in traj.snapshots
    ]


def check_max_principle(trajs) -> CheckResult:
    """Max node norm non-increasing (within 1e-12) along every uniform run."""
    margin = math.inf
    counted = 0
    for traj in trajs:
        if traj.schedule.mode != "uniform":
            continue
        counted += 1
        norms = _max_norms(traj)
        for k in range(1, len(norms)):
            margin = min(margin, norms[k - 1] + 1e-12 - norms[k])
    if counted == 0:
        return CheckResult("max_principle", False, -math.inf,
                           "no uniform-schedule run available")
    if math.isinf(margin):
        margin = 0.0
    return CheckResult(
        "max_principle",
        margin >= 0.0,
        margin,
        f"{counted} uniform run(s), tightest monotonicity clearance {margin:.3e}",
    )


def check_boundary_trace(traj: FlowTrajectory, rng, times: int = 8) -> CheckResult:
    bnd = traj.snapshots[0].domain.is_boundary
    ref = traj.snapshots[0].values[bnd]
    dev = 0.0
    for f in traj.snapshots[1:]:
        if not np.array_equal(f.values[bnd], ref):
            dev = max(dev, float(np.max(np.abs(f.values[bnd] - ref))))
    if traj.snapshots[0].n == 1 and traj.completed_steps > 0:
        horizon = traj.schedule.total \
            if traj.completed_steps == traj.schedule.steps \
            else traj.completed_steps * traj.schedule.h
        for t in rng.uniform(0.0, horizon, size=times):
            g = evaluate_at_time(traj, float(t))
            if not np.array_equal(g.values[bnd], ref):
                dev = max(dev, float(np.max(np.abs(g.values[bnd] - ref))))
    return CheckResult(
        "boundary_trace",
        dev == 0.0,
        0.0 if dev == 0.0 else -dev,
        "boundary rows identical on every snapshot and sampled time"
        if dev == 0.0 else f"largest boundary deviation {dev:.3e}",
    )


def check_holder(traj: FlowTrajectory, rng, pairs: int = 100) -> CheckResult:
    horizon = traj.schedule.total \
        if traj.completed_steps == traj.schedule.steps \
        else traj.completed_steps * traj.schedule.h
    raw = math.inf
    used = 0
    for _ in range(pairs):
        t, s = np.sort(rng.uniform(0.0, horizon, size=2))
        if s - t < 1e-12:
            continue
        used += 1
        raw = min(raw, holder_margin(traj, float(t), float(s)))
    if math.isinf(raw):
        raw = 0.0
    margin = raw + 1e-8
    return CheckResult(
        "holder",
        margin >= 0.0,
        margin,
        f"{used} sampled time pairs, smallest bound slack {raw:.3e}",
    )


def check_brute_force(rng, instances: int = 20,
                      opts: SolverOptions | None = None) -> CheckResult:
    """Solver objective vs exhaustive global minimum on tiny instances."""
    opts = opts or SolverOptions()
    worst = 0.0
    one_sided = math.inf
    for i in range(instances):
        domain = build_domain(1, 3 if i % 4 == 0 else 5)
        f_prev = QGridFunction(
            domain, rng.normal(size=(domain.num_nodes, 2, 1))
        )
        tau = float(10.0 ** rng.uniform(-1.0, 0.0))
        f_loc, _ = minimize_step(f_prev, tau, opts)
        loc = dirichlet_energy(f_loc) + l2_distance_sq(f_loc, f_prev) / tau
        _, glob = brute_force_step(f_prev, tau)
        worst = max(worst, abs(loc - glob))
        one_sided = min(one_sided, loc - glob + 1e-10)
    margin = min(1e-8 - worst, one_sided)
    return CheckResult(
        "brute_force",
        margin >= 0.0,
        margin,
        f"{instances} instances, largest objective gap {worst:.3e}",
    )


def check_oracle_equivalence(traj: FlowTrajectory) -> CheckResult:
    """Single-branch uniform flow against the banded-solver reference chain,
    snapshot by snapshot, in the max norm."""
    if traj.snapshots[0].q != 1 or traj.snapshots[0].n != 1 \
            or traj.schedule.mode != "uniform":
        return CheckResult("oracle_equivalence", False, -math.inf,
                           "needs a q = 1, n = 1 uniform run")
    domain = traj.snapshots[0].domain
    u0 = traj.snapshots[0].values[:, 0, 0]
    tau = traj.schedule.h
    worst = 0.0
    for k in range(1, traj.completed_steps + 1):
        ref = implicit_euler_chain(domain, u0, [tau] * k)
        worst = max(worst, float(np.max(np.abs(
            traj.snapshots[k].values[:, 0, 0] - ref
        ))))
    margin = 1e-8 - worst
    return CheckResult(
        "oracle_equivalence",
        margin >= 0.0,
        margin,
        f"{traj.completed_steps} snapshots, largest max-norm gap {worst:.3e}",
    )
