"""Command-line front end.

Subcommands ``solve``, ``report``, ``compare`` and ``validate`` read a JSON
problem config and write their results into the output directory.  Exit
codes: 0 success, 2 configuration or parameter error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import ProblemConfig, build_initial, build_operator, build_times, load_config
from .contour import contour_for_spectrum
from .errors import LidskiiError, NumericalError, ParameterError
from .solver import (
    EvolutionProblem,
    compare_methods,
    derivative_identity_check,
    fractional_residual,
    relative_error,
    solve_contour,
    solve_oracle,
    solve_series,
)
from .spectral import (
    bracket_eigenvalues,
    counting_ratio_trend,
    diagnose,
    eigendecompose,
    estimate_order,
)
from .operators import DiscretizedOperator

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
S_NUMBERS_LISTED = 1000


def _fmt(x: float) -> str:
    return "%.17g" % x


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    _atomic_write(path, buf.getvalue())


def _write_json(path: Path, data):
    _atomic_write(path, json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class _Run:
    """Everything a subcommand needs, built from the config and CLI overrides."""

    def __init__(self, args):
        self.config_path = Path(args.config)
        cfg = load_config(self.config_path)
        if args.tol is not None:
            if not args.tol > 0:
                raise ParameterError("--tol must be positive")
            cfg.quadrature["tol"] = float(args.tol)
        if args.seed is not None:
            cfg.seed = int(args.seed)
        if args.out is not None:
            cfg.outputs = args.out
        self.cfg: ProblemConfig = cfg
        out = Path(cfg.outputs)
        self.out = out if out.is_absolute() else Path.cwd() / out
        self.op: DiscretizedOperator = build_operator(cfg.operator)
        self.h = build_initial(cfg.initial, self.op, self.config_path.parent)
        self.times = build_times(cfg.times)
        self.problem = EvolutionProblem(self.op, cfg.mode, cfg.exponent, self.h, self.times)

    @property
    def tol(self) -> float:
        return self.cfg.quadrature["tol"]

    def contour(self, eigs):
        c = self.cfg.contour
        return contour_for_spectrum(
            eigs, self.problem.kappa, float(self.times[-1]),
            theta_zero=c.get("theta_zero"), theta_iota=c.get("theta_iota"),
            epsilon=c.get("epsilon"), cut_radius=c.get("r"), vertex=c.get("vertex"),
        )


def _solution_rows(result):
    u = result.solution
    for i, t in enumerate(result.times):
        for k in range(u.shape[1]):
            z = complex(u[i, k])
            yield [float(t), result.method, k, z.real, z.imag]


def cmd_solve(run: _Run) -> dict:
    spectral = eigendecompose(run.op)
    brackets = bracket_eigenvalues(spectral, **_bracket_args(run.cfg))
    contour = run.contour(spectral.eigenvalues)
    c = solve_contour(run.problem, contour, run.tol,
                      base_nodes_per_unit=run.cfg.quadrature["base_nodes_per_unit"], spectral=spectral)
    s = solve_series(run.problem, spectral, brackets)
    results = [c, s]
    summary = {"times": run.times, "mode": {run.cfg.mode: run.cfg.exponent},
               "dimension": run.op.dimension, "operator_kind": run.op.kind,
               "log_scale": {"contour": c.log_scale, "series": s.log_scale},
               "errors": {"contour_vs_series": relative_error(c, s)},
               "error_estimate": c.diagnostics["error_estimate"],
               "group_norms": s.group_partial_norms, "brackets": list(brackets.boundaries)}
    if run.cfg.mode == "power":
        o = solve_oracle(run.problem)
        results.append(o)
        summary["log_scale"]["oracle"] = o.log_scale
        summary["errors"]["contour_vs_oracle"] = relative_error(c, o)
        summary["errors"]["series_vs_oracle"] = relative_error(s, o)
    summary["max_errors"] = {k: float(np.max(v)) for k, v in summary["errors"].items()}
    rows = [row for r in results for row in _solution_rows(r)]
    _write_csv(run.out / "solution.csv", ["t", "method", "component", "re", "im"], rows)
    _write_json(run.out / "summary.json", summary)
    _write_json(run.out / "contour.json", {**contour.to_dict(), "quadrature": c.diagnostics["quadrature"]})
    return summary["max_errors"]


def _bracket_args(cfg: ProblemConfig) -> dict:
    rep = cfg.report or {}
    return {"tau": float(rep.get("tau", 1.0)), "gap_constant": float(rep.get("gap_constant", 1.0))}


def cmd_report(run: _Run) -> dict:
    powers = run.cfg.report.get("powers", [int(run.cfg.exponent)] if run.cfg.mode == "power" else [1])
    diag = diagnose(run.op, powers=powers, seed=run.cfg.seed)
    data = diag.to_dict()
    data["s_numbers_count"] = int(diag.s_numbers.size)
    data["s_numbers"] = data["s_numbers"][:S_NUMBERS_LISTED]
    if not np.isfinite(diag.mu_hat):
        # negative definite operators such as the Laplacian: fit -Re W
        m = -(np.asarray(run.op.matrix) if not run.op.is_diagonal else np.diag(run.op.diagonal))
        neg = DiscretizedOperator("neg_real_part", run.op.dimension, run.op.grid, {}, dense=(m + m.conj().T) / 2)
        try:
            data["mu_hat"] = estimate_order(neg)
            data["mu_hat_of"] = "-Re W"
        except ParameterError:
            data["mu_hat"] = None
    spectral = eigendecompose(run.op)
    data["brackets"] = list(bracket_eigenvalues(spectral, **_bracket_args(run.cfg)).boundaries)
    if np.isfinite(diag.rho_hat):
        data["counting_ratio_trend"] = counting_ratio_trend(diag.s_numbers, diag.rho_hat)
    _write_json(run.out / "diagnostics.json", data)
    return {"rho_hat": data["rho_hat"], "mu_hat": data["mu_hat"]}


def cmd_compare(run: _Run) -> dict:
    spectral = eigendecompose(run.op)
    brackets = bracket_eigenvalues(spectral, **_bracket_args(run.cfg))
    contour = run.contour(spectral.eigenvalues)
    res = compare_methods(run.problem, contour, spectral, brackets, run.tol)
    times = run.times
    if run.cfg.mode == "power":
        header = ["t", "contour_vs_series", "contour_vs_oracle", "series_vs_oracle"]
        rows = [[float(t), res["contour_vs_series"][i], res["contour_vs_oracle"][i], res["series_vs_oracle"][i]]
                for i, t in enumerate(times)]
    else:
        header = ["t", "contour_vs_series", "fractional_residual", "derivative_identity"]
        rows = [[float(t), res["contour_vs_series"][i],
                 fractional_residual(run.problem, contour, float(t), run.tol),
                 derivative_identity_check(run.problem, contour, float(t), run.tol)]
                for i, t in enumerate(times)]
    _write_csv(run.out / "errors.csv", header, [[float(v) if not isinstance(v, str) else v for v in r] for r in rows])
    series = res["series"]
    scale = np.exp(-series.log_scale)
    norm_rows = [[float(t), nu, float(series.group_partial_norms[i, nu] * scale[i])]
                 for i, t in enumerate(times) for nu in range(series.group_partial_norms.shape[1])]
    _write_csv(run.out / "group_norms.csv", ["t", "nu", "norm"], norm_rows)
    return {h: max(float(r[j]) for r in rows) for j, h in enumerate(header) if j > 0}


def cmd_validate(run: _Run) -> dict:
    return {"valid": True, "operator": run.op.kind, "dimension": run.op.dimension,
            "times": len(run.times), "mode": {run.cfg.mode: run.cfg.exponent}}


COMMANDS = {"solve": cmd_solve, "report": cmd_report, "compare": cmd_compare, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidskii-evolve",
        description="Solve du/dt = -W^n u and D^{1/alpha} u = W u by contour quadrature and root-vector series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "solve the problem and write solution.csv, summary.json, contour.json"),
        ("report", "write spectral diagnostics to diagnostics.json"),
        ("compare", "write errors.csv and group_norms.csv"),
        ("validate", "check the config without solving"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON problem config")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--tol", type=float, help="quadrature tolerance (overrides the config)")
        p.add_argument("--seed", type=int, help="random seed (overrides the config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = _Run(args)
        result = COMMANDS[args.command](run)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LidskiiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(_jsonable(result), sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
