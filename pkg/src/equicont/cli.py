"""Configuration-driven command line front end.

Subcommands: ``analyze | continue | verify | project | list``.  All modes but
``list`` read a JSON config (schema in docs/config.md), write a structured
JSON report plus, for continuations, a delimiter-separated branch table and a
full-precision state table.  Exit status: 0 when every requested check
passed, 2 on invalid configuration, 3 on solver failure or failed checks
(with a diagnostic payload in the report).
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bordered import solve_bordered
from .catalog import get_problem, list_problems
from .continuation import StepPolicy, continue_branch
from .errors import ConfigError, EquicontError, UnknownProblemError
from .linearize import assemble_linearization, kernel_basis, nondegeneracy_check
from .projection import equivariance_residual, slice_project, winding_degree
from .slices import build_slice
from .verify import verify_problem

RUN_MODES = ("analyze", "continue", "verify", "project")


def _positive(cfg, key, value):
    if not (isinstance(value, (int, float)) and value > 0):
        raise ConfigError(f"{key} must be a positive number, got {value!r}")
    return float(value)


class ExperimentConfig:
    """Validated experiment description (see docs/config.md)."""

    def __init__(self, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        self.raw = raw
        prob = raw.get("problem")
        if not isinstance(prob, dict) or "name" not in prob:
            raise ConfigError("config needs problem: {name: ...}")
        self.problem_name = prob["name"]
        self.problem_params = dict(prob.get("params", {}))
        grid = raw.get("grid", {})
        self.n = grid.get("n")
        if self.n is not None and (int(self.n) % 2 or int(self.n) < 8):
            raise ConfigError(f"grid.n must be even and >= 8, got {self.n}")
        self.scheme = grid.get("scheme", "spectral")
        if self.scheme not in ("spectral", "fd4"):
            raise ConfigError(f"grid.scheme must be spectral or fd4, got {self.scheme!r}")
        solver = raw.get("solver", {})
        self.newton_tol = _positive(solver, "solver.newton_tol",
                                    solver.get("newton_tol", 1e-10))
        self.svd_tol = _positive(solver, "solver.svd_tol", solver.get("svd_tol", 1e-8))
        self.angle_tol = _positive(solver, "solver.angle_tol",
                                   solver.get("angle_tol", 1e-6))
        self.multiplier_tol = _positive(solver, "solver.multiplier_tol",
                                        solver.get("multiplier_tol", 1e-8))
        step = solver.get("step", {})
        self.num_steps = int(step.get("num_steps", 20))
        if self.num_steps < 1:
            raise ConfigError("solver.step.num_steps must be >= 1")
        self.min_step = _positive(step, "solver.step.min_step",
                                  step.get("min_step", 1e-6))
        self.patience = int(step.get("obstruction_patience", 1))
        self.run = raw.get("run", "analyze")
        if self.run not in RUN_MODES:
            raise ConfigError(f"run must be one of {RUN_MODES}, got {self.run!r}")
        lam = raw.get("lambda", {})
        self.lambda0 = lam.get("start")
        self.lambda_target = lam.get("target")
        self.output = raw.get("output")
        self.seed = int(raw.get("seed", 0))

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def step_policy(self):
        return StepPolicy(num_steps=self.num_steps, min_step=self.min_step,
                          multiplier_tol=self.multiplier_tol,
                          obstruction_patience=self.patience,
                          newton_tol=self.newton_tol, svd_tol=self.svd_tol,
                          angle_tol=self.angle_tol)

    def resolve(self):
        entry = get_problem(self.problem_name)
        problem, x0 = entry.make(n=self.n, scheme=self.scheme,
                                 **self.problem_params)
        lam0 = entry.lambda0 if self.lambda0 is None else float(self.lambda0)
        target = entry.lambda_target if self.lambda_target is None \
            else float(self.lambda_target)
        lo, hi = problem.parameter_range
        for val, label in ((lam0, "lambda.start"), (target, "lambda.target")):
            if not (lo - 1e-12 <= val <= hi + 1e-12):
                raise ConfigError(
                    f"{label} = {val:g} outside the parameter range "
                    f"[{lo:g}, {hi:g}] of {self.problem_name}")
        return entry, problem, x0, lam0, target


def _checksum(state):
    return hashlib.sha256(np.ascontiguousarray(state, dtype=float).tobytes()).hexdigest()[:16]


def _write_branch_tables(branch, out_dir):
    branch_path = out_dir / "branch.csv"
    with open(branch_path, "w", newline="\n") as fh:
        fh.write("lambda,state_checksum,max_abs_multiplier,residual,kernel_dim\n")
        for s in branch.samples:
            fh.write(f"{s.lam!r},{_checksum(s.state)},{s.max_multiplier!r},"
                     f"{s.residual!r},{s.kernel_dim}\n")
    states_path = out_dir / "states.csv"
    with open(states_path, "w", newline="\n") as fh:
        for s in branch.samples:
            fh.write(",".join([repr(s.lam)] + [repr(v) for v in s.state]) + "\n")
    return branch_path, states_path


def _run_analyze(cfg, problem, x0, lam0, target, rng, report):
    L = assemble_linearization(problem, x0, lam0)
    info = kernel_basis(L, problem.gram, svd_tol=cfg.svd_tol)
    nd = nondegeneracy_check(info.basis, problem.group.orbit_tangent(x0),
                             problem.gram, angle_tol=cfg.angle_tol,
                             singular_values=info.singular_values,
                             ambiguous=info.ambiguous, gap=info.gap)
    report["analysis"] = {
        "center_residual": problem.residual_norm(x0, lam0),
        "kernel_dim": nd.kernel_dim,
        "orbit_rank": nd.orbit_rank,
        "group_dim": nd.group_dim,
        "principal_angle": nd.principal_angle,
        "verdict": nd.verdict,
        "rank_deficient": nd.rank_deficient,
        "smallest_singular_values": sorted(nd.singular_values)[:6],
        "equivariance_residual": equivariance_residual(problem, x0, lam0),
        "notes": nd.notes,
    }
    if nd.nondegenerate:
        sl = build_slice(problem, x0, lam0, svd_tol=cfg.svd_tol,
                         angle_tol=cfg.angle_tol, L=L)
        sol = solve_bordered(problem, sl, lam0, x_guess=x0,
                             newton_tol=cfg.newton_tol)
        report["analysis"]["bordered_condition"] = sl.condition
        report["analysis"]["multipliers"] = list(sol.multipliers)
        report["analysis"]["solve_residual"] = sol.residual
    return nd.nondegenerate


def _run_continue(cfg, problem, x0, lam0, target, rng, report, out_dir):
    branch = continue_branch(problem, x0, lam0, target,
                             step_policy=cfg.step_policy())
    branch_path, states_path = _write_branch_tables(branch, out_dir)
    report["branch"] = {
        "status": branch.status,
        "message": branch.message,
        "samples": len(branch.samples),
        "lambda_first": branch.samples[0].lam,
        "lambda_last": branch.samples[-1].lam,
        "max_abs_multiplier": max(s.max_multiplier for s in branch.samples),
        "max_residual": max(s.residual for s in branch.samples),
        "kernel_dims": sorted({s.kernel_dim for s in branch.samples}),
        "files": {"branch": branch_path.name, "states": states_path.name},
    }
    if branch.status == "obstructed":
        report["branch"]["obstruction_multiplier"] = \
            branch.samples[-1].max_multiplier
    return branch.status == "completed"


def _run_verify(cfg, problem, x0, lam0, target, rng, report, expected):
    checks = verify_problem(problem, x0, lam0, rng, expected=expected)
    report["checks"] = [c.as_dict() for c in checks]
    return all(c.passed for c in checks)


def _run_project(cfg, problem, x0, lam0, target, rng, report, samples=50):
    sl = build_slice(problem, x0, lam0, svd_tol=cfg.svd_tol,
                     angle_tol=cfg.angle_tol)
    d = problem.group.d
    radius = min(0.3, 0.5 * problem.group.domain_radius)
    worst_res, worst_inv, recovered = 0.0, 0.0, 0
    for _ in range(samples):
        g = rng.uniform(-radius, radius, size=d) / max(np.sqrt(d), 1.0)
        moved = problem.group.act(g, x0)
        ghat, x_slice = slice_project(problem, moved, sl)
        res = np.max(np.abs(sl.orbit_basis.T @ (problem.gram.M_X @ (x_slice - x0))))
        worst_res = max(worst_res, res)
        recovered += 1
        if problem.group.abelian:
            worst_inv = max(worst_inv, float(np.max(np.abs(ghat + g))))
    report["projection"] = {
        "samples": samples,
        "recovered": recovered,
        "worst_residual": worst_res,
        "worst_inversion_error": worst_inv if problem.group.abelian else None,
        "contour_radius": radius,
    }
    passed = worst_res <= 1e-8 and (not problem.group.abelian or worst_inv <= 1e-6)
    if d in (1, 2):
        deg = winding_degree(problem, x0, sl, radius=min(0.5, radius))
        report["projection"]["winding_degree"] = deg
        passed = passed and abs(deg) == 1
    return passed


def run(config, out_dir=None, seed=None):
    """Execute one experiment; returns (report dict, passed flag, files dir)."""
    if seed is not None:
        config.seed = int(seed)
    rng = np.random.default_rng(config.seed)
    entry, problem, x0, lam0, target = config.resolve()
    out = Path(out_dir or config.output or f"runs/{config.problem_name}-{config.run}")
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "problem": config.problem_name,
        "run": config.run,
        "lambda": {"start": lam0, "target": target},
        "provenance": {"config": config.raw, "seed": config.seed,
                       "version": __version__},
    }
    try:
        if config.run == "analyze":
            passed = _run_analyze(config, problem, x0, lam0, target, rng, report)
        elif config.run == "continue":
            passed = _run_continue(config, problem, x0, lam0, target, rng,
                                   report, out)
        elif config.run == "verify":
            passed = _run_verify(config, problem, x0, lam0, target, rng,
                                 report, entry.expected)
        else:
            passed = _run_project(config, problem, x0, lam0, target, rng, report)
    except EquicontError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        passed = False
    report["passed"] = bool(passed)
    with open(out / "report.json", "w", newline="\n") as fh:
        json.dump(report, fh, indent=2, default=_json_default)
        fh.write("\n")
    return report, passed, out


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _print_catalog():
    entries = list_problems()
    width = max(len(e.name) for e in entries)
    print(f"{'problem':{width}}  n    lambda window      expected  summary")
    for e in entries:
        print(f"{e.name:{width}}  {e.default_n:<4} "
              f"[{e.lambda0:g} -> {e.lambda_target:g}]".ljust(width + 25)
              + f"{e.expected:10}{e.summary}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="equicont",
        description="symmetry-aware continuation of critical branches")
    parser.add_argument("mode", choices=RUN_MODES + ("list",))
    parser.add_argument("--config", help="path to a JSON experiment config")
    parser.add_argument("--out", help="output directory (unique per run)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--n", type=int, help="override the grid size")
    args = parser.parse_args(argv)

    if args.mode == "list":
        _print_catalog()
        return 0
    if not args.config:
        print("error: --config is required for this mode", file=sys.stderr)
        return 2
    try:
        config = ExperimentConfig.load(args.config)
        config.run = args.mode
        if args.n is not None:
            if args.n % 2 or args.n < 8:
                raise ConfigError(f"--n must be even and >= 8, got {args.n}")
            config.n = args.n
        report, passed, out = run(config, out_dir=args.out, seed=args.seed)
    except (ConfigError, UnknownProblemError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EquicontError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    status = "PASS" if passed else "FAIL"
    print(f"[{status}] {config.problem_name} ({args.mode}) -> {out}/report.json")
    if not passed:
        if "error" in report:
            print(f"  {report['error']['type']}: {report['error']['message']}")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
