"""Benchmark harness: instance generation, runs, sweeps, and verification.

Exposes four subcommands (also reachable through the `adbundle` console
script):

    gen     write instance container files and print their constants
    run     run one solver on one instance; emit a record row, a
            per-iteration trace, and the final iterates
    bench   run the cross product instances x solvers x alpha and emit a
            human table plus a machine-readable records CSV
    verify  re-check a finished run's trace against the per-cycle
            invariants and the complexity ceilings

Records CSV column order:
    instance_id, solver, alpha, eps_bar, iterations, cycles, serious,
    null, bad, seconds, rel_gap, terminated_by, bound_cycles, bound_iters,
    bounds_pass

Trace files carry one header line and then one line per iteration:
    j,k,lambda,t,phi_best,event

The ADBUNDLE_RECORDS_DIR environment variable overrides the output
directory for bench records.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import complexity, solver
from .errors import ConfigurationError
from .instances import (
    Instance,
    boxed_variant,
    compute_constants,
    gen_dense,
    gen_sparse,
    load_instance,
    make_objective,
    save_instance,
)
from .objective import eval_phi
from .solver import (
    AD_GPB,
    AD_GPB_STAR,
    GPB,
    POL_GPB,
    POL_SUBGRAD,
    RunReport,
    SolverConfig,
    VARIANTS,
    polyak_stepsize,
)

RECORD_COLUMNS = [
    "instance_id", "solver", "alpha", "eps_bar", "iterations", "cycles",
    "serious", "null", "bad", "seconds", "rel_gap", "terminated_by",
    "bound_cycles", "bound_iters", "bounds_pass",
]

# Variants whose cycle test does not drive the within-cycle stepsize rule,
# so the cycle-length ceiling does not apply to them.
CONSTANT_TEST_VARIANTS = {GPB, POL_GPB}
# Variants that chain the stepsize seed across cycles; only they obey the
# run-level bad-iteration budget.
CHAINED_SEED_VARIANTS = {AD_GPB, AD_GPB_STAR}


@dataclass
class ExperimentSpec:
    """One benchmark sweep, JSON-serializable with defaults filled in."""

    kind: str = "dense"  # dense | sparse
    m: int = 200
    n: int = 600
    density: float | None = None
    seeds: list = field(default_factory=lambda: [1])
    box_radius: float | None = None
    solvers: list = field(default_factory=lambda: [AD_GPB_STAR, GPB])
    alphas: list = field(default_factory=lambda: [1.0])
    eps_bar: float = 1e-5
    tau: float = 0.95
    beta0: float = 0.5
    bundle_scheme: str = "two-cut"
    iteration_cap: int = 10_000_000
    time_cap: float | None = None
    out_dir: str = "records"

    def __post_init__(self):
        if self.eps_bar <= 0:
            raise ConfigurationError("eps_bar must be positive")
        if not self.alphas:
            raise ConfigurationError("alpha list must be nonempty")
        for s in self.solvers:
            if s not in VARIANTS:
                raise ConfigurationError(f"unknown solver {s!r}")

    @staticmethod
    def from_json(path) -> "ExperimentSpec":
        with open(path) as fh:
            return ExperimentSpec(**json.load(fh))

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass
class BenchRecord:
    instance_id: str
    solver: str
    alpha: float
    eps_bar: float
    iterations: int
    cycles: int
    serious: int
    null: int
    bad: int
    seconds: float
    rel_gap: float
    terminated_by: str
    bound_cycles: object = ""
    bound_iters: object = ""
    bounds_pass: str = ""

    def row(self) -> list:
        return [getattr(self, c) for c in RECORD_COLUMNS]


def records_dir(spec_out: str) -> str:
    return os.environ.get("ADBUNDLE_RECORDS_DIR", spec_out)


def instance_id(inst: Instance) -> str:
    tag = "sparse" if inst.is_sparse else "dense"
    parts = [tag, str(inst.m), str(inst.n)]
    if inst.density is not None:
        parts.append(f"{inst.density:g}")
    parts.append(f"s{inst.seed}")
    return "-".join(parts)


def build_instance(spec: ExperimentSpec, seed: int) -> Instance:
    if spec.kind == "dense":
        inst = gen_dense(spec.m, spec.n, seed)
    elif spec.kind == "sparse":
        if spec.density is None:
            raise ConfigurationError("sparse instances need a density")
        inst = gen_sparse(spec.m, spec.n, spec.density, seed)
    else:
        raise ConfigurationError(f"unknown instance kind {spec.kind!r}")
    if spec.box_radius is not None:
        inst = boxed_variant(inst, spec.box_radius)
    return inst


def initial_stepsize(inst: Instance, alpha: float) -> float:
    obj = make_objective(inst)
    fo = obj.oracle(inst.x0)
    return alpha * polyak_stepsize(fo.value, inst.phi_star, fo.subgradient)


def run_single(
    inst: Instance,
    solver_name: str,
    alpha: float,
    eps_bar: float,
    tau: float = 0.95,
    beta0: float = 0.5,
    bundle_scheme: str = "two-cut",
    iteration_cap: int = 10_000_000,
    time_cap: float | None = None,
    audit=None,
) -> tuple[BenchRecord, RunReport]:
    """Run one solver cell: epsilon = eps_bar * (phi(x0) - phi*)."""
    known = solver_name != AD_GPB
    obj = make_objective(inst, known_optimum=known)
    phi0 = eval_phi(obj, inst.x0)
    epsilon = eps_bar * (phi0 - inst.phi_star)
    lam1 = initial_stepsize(inst, alpha)
    config = SolverConfig(
        variant=solver_name, epsilon=epsilon, lambda1=lam1, tau=tau,
        beta0=beta0, bundle_scheme=bundle_scheme, iteration_cap=iteration_cap,
        time_cap=time_cap,
    )
    report = solver.run(obj, config, inst.x0, audit=audit)
    rel_gap = (report.phi_y - inst.phi_star) / (phi0 - inst.phi_star)
    record = BenchRecord(
        instance_id=instance_id(inst), solver=solver_name, alpha=alpha,
        eps_bar=eps_bar, iterations=report.iterations, cycles=report.cycles,
        serious=report.serious, null=report.null, bad=report.bad,
        seconds=report.wall_time, rel_gap=rel_gap,
        terminated_by=report.terminated_by,
    )
    _attach_bounds(record, report, inst, epsilon, tau, lam1, phi0)
    return record, report


def _attach_bounds(record: BenchRecord, report: RunReport, inst: Instance,
                   epsilon: float, tau: float, lam1: float, phi0: float) -> None:
    """Fill the ceiling columns for variants covered by a guarantee."""
    consts = compute_constants(inst)
    if report.variant == AD_GPB_STAR:
        inputs = complexity.BoundInputs(
            epsilon=epsilon, tau=tau, lambda1=lam1, M=consts.M, L=consts.L,
            D=consts.D, d0=consts.d0,
            t_start_max=_max_cycle_start_gap(report),
        )
        record.bound_cycles = complexity.k_hat(inputs)
        record.bound_iters = complexity.total_iter_bound_known(inputs)
    elif report.variant == AD_GPB and math.isfinite(consts.D):
        nhat0 = report.cycle_records[0].nhat_prev if report.cycle_records else None
        if nhat0 is None:
            return
        inputs = complexity.BoundInputs(
            epsilon=epsilon, tau=tau, lambda1=lam1, M=consts.M, L=consts.L,
            D=consts.D, d0=consts.d0, beta0=report.cycle_records[0].beta_prev,
            phi_gap0=phi0 - nhat0,
        )
        record.bound_cycles = 4 * complexity.k_bar(inputs)
        record.bound_iters = complexity.total_iter_bound_general(inputs)
    else:
        return
    ok_cycles = record.cycles <= record.bound_cycles
    ok_iters = (record.bound_iters == math.inf
                or record.iterations <= record.bound_iters)
    record.bounds_pass = "pass" if (ok_cycles and ok_iters) else "fail"


def _max_cycle_start_gap(report: RunReport) -> float | None:
    gaps = [c.t_first for c in report.cycle_records]
    return max(gaps) if gaps else None


def write_records(records: list[BenchRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            writer.writerow(r.row())


def read_records(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def save_trace(report: RunReport, path) -> None:
    with open(path, "w") as fh:
        fh.write("j,k,lambda,t,phi_best,event\n")
        for tr in report.trace:
            fh.write(
                f"{tr.j},{tr.k},{tr.lam:.17g},{tr.t:.17g},"
                f"{tr.phi_best:.17g},{tr.event}\n"
            )


def load_trace(path) -> list[solver.TraceRecord]:
    out = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "j,k,lambda,t,phi_best,event":
            raise ValueError(f"{path} is not a trace file")
        for line in fh:
            j, k, lam, t, phi, event = line.strip().split(",")
            out.append(solver.TraceRecord(
                j=int(j), k=int(k), lam=float(lam), t=float(t),
                phi_best=float(phi), event=event,
            ))
    return out


def save_solution(report: RunReport, path) -> None:
    """Final iterates, one %.17g line each for y and the prox center."""
    with open(path, "w") as fh:
        fh.write(json.dumps({"variant": report.variant,
                             "phi_y": report.phi_y}) + "\n")
        fh.write(" ".join(f"{v:.17g}" for v in report.y_final) + "\n")
        fh.write(" ".join(f"{v:.17g}" for v in report.x_final) + "\n")


def load_solution(path) -> tuple[dict, np.ndarray, np.ndarray]:
    with open(path) as fh:
        meta = json.loads(fh.readline())
        y = np.array([float(v) for v in fh.readline().split()])
        x = np.array([float(v) for v in fh.readline().split()])
    return meta, y, x


# --- trace-level verification --------------------------------------------


@dataclass
class CheckResult:
    name: str
    status: str  # pass | fail | skip
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status == "fail"


def _split_cycles(trace) -> list[list]:
    cycles, current = [], []
    for tr in trace:
        current.append(tr)
        if tr.event in (solver.EVENT_SERIOUS, solver.EVENT_STOP):
            cycles.append(current)
            current = []
    if current:
        cycles.append(current)  # trailing partial cycle of a capped run
    return cycles


def verify_trace(
    trace: list,
    variant: str,
    epsilon: float,
    tau: float,
    lam1: float,
    M: float,
    L: float,
    D: float,
    subproblem_tol: float = 1e-12,
) -> list[CheckResult]:
    """Re-check the per-cycle invariants that every finished run must obey.

    The t-monotonicity slack combines 10x the subproblem tolerance with a
    double-precision roundoff allowance scaled to the operand magnitude;
    objective values around 1e7 carry ~1e-9 of float noise, far above any
    fixed absolute slack.
    """
    results: list[CheckResult] = []
    cycles = _split_cycles(trace)
    lam_lo = complexity.lambda_lower(tau, epsilon, M, L)

    bad_mono = bad_floor = bad_len = 0
    for cyc in cycles:
        lam_start = cyc[0].lam
        floor = 0.5 * min(lam_lo, lam_start)
        s_k = sum(1 for tr in cyc if tr.event == solver.EVENT_NULL_HALVE)
        complete = cyc[-1].event in (solver.EVENT_SERIOUS, solver.EVENT_STOP)
        for prev, cur in zip(cyc, cyc[1:]):
            slack = 10.0 * subproblem_tol + 1e-13 * max(
                1.0, abs(prev.t), abs(cur.phi_best)
            )
            if cur.t > prev.t + slack:
                bad_mono += 1
        for tr in cyc:
            if tr.lam < floor:
                bad_floor += 1
        if complete and variant not in CONSTANT_TEST_VARIANTS:
            bound = complexity.cycle_len_bound(cyc[0].t, epsilon, tau, s_k)
            if len(cyc) > bound:
                bad_len += 1

    results.append(CheckResult(
        "t-monotonicity", "fail" if bad_mono else "pass",
        f"{bad_mono} violations over {len(trace)} iterations"))
    results.append(CheckResult(
        "lambda-floor", "fail" if bad_floor else "pass",
        f"floor 0.5*min(lambda_lower, cycle start)"))
    if variant in CONSTANT_TEST_VARIANTS:
        results.append(CheckResult("cycle-length", "skip",
                                   "constant-test variant"))
    else:
        results.append(CheckResult(
            "cycle-length", "fail" if bad_len else "pass",
            f"{len(cycles)} cycles checked"))

    total_bad = sum(1 for tr in trace if tr.event == solver.EVENT_NULL_HALVE)
    if variant in CHAINED_SEED_VARIANTS:
        cap = complexity.bad_iter_bound(lam1, lam_lo)
        results.append(CheckResult(
            "bad-iteration-cap", "fail" if total_bad > cap else "pass",
            f"{total_bad} bad <= {cap}"))
    else:
        results.append(CheckResult(
            "bad-iteration-cap", "skip",
            f"variant {variant} re-seeds the stepsize across cycles"))

    if math.isfinite(D):
        tbar = complexity.t_bar(M, L, D)
        worst = max((c[0].t for c in cycles), default=-math.inf)
        results.append(CheckResult(
            "cycle-start-gap", "fail" if worst > tbar else "pass",
            f"max t at cycle start {worst:.6g} <= {tbar:.6g}"))
    else:
        results.append(CheckResult("cycle-start-gap", "skip",
                                   "unbounded domain"))

    phi_bad = sum(
        1 for prev, cur in zip(trace, trace[1:]) if cur.phi_best > prev.phi_best
    )
    results.append(CheckResult(
        "phi-monotonicity", "fail" if phi_bad else "pass",
        f"{phi_bad} increases of the best value"))
    return results


def verify_record_bounds(record: dict) -> list[CheckResult]:
    out = []
    if record.get("bound_cycles") in ("", None):
        out.append(CheckResult("ceilings", "skip", "no guarantee for variant"))
        return out
    ok = record.get("bounds_pass") == "pass"
    out.append(CheckResult(
        "ceilings", "pass" if ok else "fail",
        f"cycles {record['cycles']} <= {record['bound_cycles']}, "
        f"iterations {record['iterations']} <= {record['bound_iters']}"))
    return out


# --- bench table rendering ------------------------------------------------


def format_cell(record: BenchRecord) -> str:
    """Iterations (rounded to 0.1K) over integer seconds; */* when capped."""
    if record.terminated_by != "tolerance":
        return "*/*"
    return f"{record.iterations / 1000.0:.1f}K/{round(record.seconds)}"


def render_table(records: list[BenchRecord], solvers: list[str],
                 alphas: list[float]) -> str:
    by_key = {(r.instance_id, r.solver, r.alpha): r for r in records}
    instances = sorted({r.instance_id for r in records})
    cols = [(s, a) for s in solvers for a in alphas]
    lines = []
    header = ["instance"] + [f"{s}(a={a:g})" for s, a in cols]
    widths = [max(24, len(header[0]))] + [max(16, len(h)) for h in header[1:]]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for inst_id in instances:
        row = [inst_id.ljust(widths[0])]
        for (s, a), w in zip(cols, widths[1:]):
            rec = by_key.get((inst_id, s, a))
            row.append((format_cell(rec) if rec else "-").ljust(w))
        lines.append("  ".join(row))
    return "\n".join(lines) + "\n"


def run_bench(spec: ExperimentSpec, workers: int = 1,
              progress=None) -> list[BenchRecord]:
    cells = [
        (seed, s, a)
        for seed in spec.seeds
        for s in spec.solvers
        for a in spec.alphas
    ]
    instances = {seed: build_instance(spec, seed) for seed in spec.seeds}

    def one(cell):
        seed, s, a = cell
        record, _ = run_single(
            instances[seed], s, a, spec.eps_bar, tau=spec.tau,
            beta0=spec.beta0, bundle_scheme=spec.bundle_scheme,
            iteration_cap=spec.iteration_cap, time_cap=spec.time_cap,
        )
        if progress:
            progress(record)
        return record

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, cells))
    return [one(c) for c in cells]


# --- CLI -------------------------------------------------------------------


def _add_instance_args(p, required=True):
    p.add_argument("--kind", choices=["dense", "sparse"], default="dense")
    p.add_argument("-m", type=int, required=required, default=None)
    p.add_argument("-n", type=int, required=required, default=None)
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--seed", type=int, nargs="+", default=[1])
    p.add_argument("--box-radius", type=float, default=None)


def cmd_gen(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    spec = ExperimentSpec(kind=args.kind, m=args.m, n=args.n,
                          density=args.density, seeds=args.seed,
                          box_radius=args.box_radius)
    for seed in args.seed:
        inst = build_instance(spec, seed)
        path = os.path.join(args.out_dir, instance_id(inst) + ".inst")
        save_instance(inst, path)
        c = compute_constants(inst)
        print(f"{path}: M={c.M:.6g} L={c.L:g} D={c.D:g} d0={c.d0:.6g}")
    return 0


def cmd_run(args) -> int:
    inst = load_instance(args.instance)
    record, report = run_single(
        inst, args.solver, args.alpha, args.eps_bar, tau=args.tau,
        beta0=args.beta0, bundle_scheme=args.bundle_scheme,
        iteration_cap=args.iteration_cap, time_cap=args.time_cap,
    )
    base = args.out or os.path.splitext(args.instance)[0] + f".{args.solver}"
    write_records([record], base + ".record.csv")
    save_trace(report, base + ".trace.csv")
    save_solution(report, base + ".solution.txt")
    print(f"{record.instance_id} {record.solver}: "
          f"{record.iterations} iterations, {record.cycles} cycles, "
          f"rel gap {record.rel_gap:.3e}, {record.terminated_by}")
    return 0 if record.terminated_by == "tolerance" else 1


def cmd_bench(args) -> int:
    if args.spec:
        spec = ExperimentSpec.from_json(args.spec)
    else:
        if args.m is None or args.n is None:
            raise ConfigurationError("bench needs -m/-n or --spec")
        spec = ExperimentSpec(
            kind=args.kind, m=args.m, n=args.n, density=args.density,
            seeds=args.seed, box_radius=args.box_radius,
            solvers=args.solver, alphas=args.alpha, eps_bar=args.eps_bar,
            iteration_cap=args.iteration_cap, time_cap=args.time_cap,
            out_dir=args.out_dir,
        )
    out_dir = records_dir(spec.out_dir)
    os.makedirs(out_dir, exist_ok=True)
    spec.dump(os.path.join(out_dir, "spec.json"))

    def progress(record):
        print(f"  {record.instance_id} {record.solver} a={record.alpha:g}: "
              f"{format_cell(record)}", flush=True)

    records = run_bench(spec, workers=args.workers, progress=progress)
    write_records(records, os.path.join(out_dir, "records.csv"))
    table = render_table(records, spec.solvers, spec.alphas)
    with open(os.path.join(out_dir, "table.txt"), "w") as fh:
        fh.write(table)
    print(table)
    return 0


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    rows = read_records(args.record)
    trace = load_trace(args.trace)
    if not rows:
        print("empty record file", file=sys.stderr)
        return 2
    row = rows[0]
    consts = compute_constants(inst)
    obj = make_objective(inst)
    phi0 = eval_phi(obj, inst.x0)
    epsilon = float(row["eps_bar"]) * (phi0 - inst.phi_star)
    lam1 = initial_stepsize(inst, float(row["alpha"]))
    results = verify_trace(
        trace, row["solver"], epsilon, args.tau, lam1,
        consts.M, consts.L, consts.D,
    )
    results += verify_record_bounds(row)
    if len(trace) != int(row["iterations"]):
        results.append(CheckResult(
            "trace-length", "fail",
            f"{len(trace)} lines vs {row['iterations']} iterations"))
    else:
        results.append(CheckResult("trace-length", "pass"))
    failed = False
    for r in results:
        print(f"[{r.status:>4}] {r.name}: {r.detail}")
        failed = failed or r.failed
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adbundle",
        description="adaptive proximal bundle solvers and benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate instance files")
    _add_instance_args(p)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run one solver on one instance file")
    p.add_argument("instance")
    p.add_argument("--solver", choices=VARIANTS, default=AD_GPB_STAR)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--eps-bar", type=float, default=1e-5)
    p.add_argument("--tau", type=float, default=0.95)
    p.add_argument("--beta0", type=float, default=0.5)
    p.add_argument("--bundle-scheme", choices=["two-cut", "multi-cut"],
                   default="two-cut")
    p.add_argument("--iteration-cap", type=int, default=10_000_000)
    p.add_argument("--time-cap", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run a sweep and emit tables/records")
    _add_instance_args(p, required=False)
    p.add_argument("--spec", default=None,
                   help="JSON ExperimentSpec (overrides other flags)")
    p.add_argument("--solver", nargs="+", choices=VARIANTS,
                   default=[AD_GPB_STAR, GPB])
    p.add_argument("--alpha", type=float, nargs="+", default=[1.0])
    p.add_argument("--eps-bar", type=float, default=1e-5)
    p.add_argument("--iteration-cap", type=int, default=10_000_000)
    p.add_argument("--time-cap", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default="records")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="re-check a run against its ceilings")
    p.add_argument("instance")
    p.add_argument("record", help="record CSV from `run`")
    p.add_argument("trace", help="trace CSV from `run`")
    p.add_argument("--tau", type=float, default=0.95)
    p.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
