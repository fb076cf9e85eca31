"""JSON problem configuration: parsing, validation and object construction."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import operators as ops
from .errors import ConfigError, ParameterError

__all__ = ["ProblemConfig", "load_config", "build_operator", "build_initial", "build_times", "OPERATOR_KINDS"]

OPERATOR_KINDS = (
    "gl_derivative",
    "dirichlet_laplacian",
    "composite",
    "quasi_polynomial",
    "binomial_expansion",
    "difference",
    "riesz_potential",
    "riesz_composite",
    "diagonal_normal",
    "diagonal",
    "matrix",
)


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex numbers are written [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _req(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return d[key]


@dataclass
class ProblemConfig:
    """Validated problem description; ``to_dict`` and ``from_dict`` round-trip."""

    operator: dict
    mode: str
    exponent: float
    initial: dict
    times: list | dict
    contour: dict = field(default_factory=dict)
    quadrature: dict = field(default_factory=lambda: {"tol": 1e-10, "base_nodes_per_unit": 64})
    seed: int = 0
    outputs: str = "out"
    report: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - {"operator", "mode", "initial", "times", "contour", "quadrature",
                               "seed", "outputs", "report"}
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        op = _req(data, "operator", "config")
        if not isinstance(op, dict) or op.get("kind") not in OPERATOR_KINDS:
            raise ConfigError(f"operator.kind must be one of {', '.join(OPERATOR_KINDS)}")
        mode = _req(data, "mode", "config")
        if not isinstance(mode, dict) or len(mode) != 1 or next(iter(mode)) not in ("power", "fractional"):
            raise ConfigError('mode must be {"power": n} or {"fractional": alpha}')
        (mode_name, exponent), = mode.items()
        mode_name = "power" if mode_name == "power" else "fractional"
        if mode_name == "power" and (int(exponent) != exponent or exponent < 1):
            raise ConfigError("mode.power must be a positive integer")
        if mode_name == "fractional" and not float(exponent) > 1:
            raise ConfigError("mode.fractional must exceed 1")
        initial = _req(data, "initial", "config")
        if not isinstance(initial, dict) or len(initial) != 1 or \
                next(iter(initial)) not in ("basis_index", "gaussian", "file", "vector", "sine"):
            raise ConfigError("initial must have exactly one of basis_index, gaussian, file, vector, sine")
        times = _req(data, "times", "config")
        build_times(times)
        quad = {"tol": 1e-10, "base_nodes_per_unit": 64}
        quad.update(data.get("quadrature", {}))
        if not float(quad["tol"]) > 0:
            raise ConfigError("quadrature.tol must be positive")
        if int(quad["base_nodes_per_unit"]) < 1:
            raise ConfigError("quadrature.base_nodes_per_unit must be positive")
        contour = dict(data.get("contour", {}))
        bad = set(contour) - {"theta_zero", "theta_iota", "epsilon", "r", "vertex"}
        if bad:
            raise ConfigError(f"unknown contour keys: {sorted(bad)}")
        return cls(
            operator=copy.deepcopy(op),
            mode=mode_name,
            exponent=int(exponent) if mode_name == "power" else float(exponent),
            initial=copy.deepcopy(initial),
            times=copy.deepcopy(times),
            contour=contour,
            quadrature={"tol": float(quad["tol"]), "base_nodes_per_unit": int(quad["base_nodes_per_unit"])},
            seed=int(data.get("seed", 0)),
            outputs=str(data.get("outputs", "out")),
            report=copy.deepcopy(data.get("report", {})),
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = {d.pop("mode"): d.pop("exponent")}
        return d


def load_config(path) -> ProblemConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return ProblemConfig.from_dict(data)


def build_times(spec) -> np.ndarray:
    if isinstance(spec, list):
        if not spec:
            raise ConfigError("times must be non-empty")
        t = np.array(spec, dtype=float)
    elif isinstance(spec, dict):
        t_min, t_max = float(_req(spec, "t_min", "times")), float(_req(spec, "t_max", "times"))
        count = int(_req(spec, "count", "times"))
        spacing = spec.get("spacing", "linear")
        if count < 1:
            raise ConfigError("times must be non-empty")
        if not 0 < t_min <= t_max:
            raise ConfigError("need 0 < t_min <= t_max")
        if spacing == "linear":
            t = np.linspace(t_min, t_max, count)
        elif spacing == "log":
            t = np.geomspace(t_min, t_max, count)
        else:
            raise ConfigError("times.spacing must be linear or log")
    else:
        raise ConfigError("times must be a list or a {t_min, t_max, count, spacing} object")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ConfigError("times must be positive and strictly increasing")
    return t


def _grid(spec: dict) -> ops.GridSpec:
    g = _req(spec, "grid", f"operator {spec['kind']}")
    return ops.make_grid(float(_req(g, "a", "grid")), float(_req(g, "b", "grid")), int(_req(g, "n_points", "grid")))


def _coefficient(value, grid: ops.GridSpec | None, dimension: int) -> np.ndarray:
    if isinstance(value, dict):
        if "one_plus_abs_power" in value and grid is not None:
            return (1 + np.abs(grid.nodes)) ** float(value["one_plus_abs_power"])
        raise ConfigError(f"unsupported coefficient spec {value!r}")
    if isinstance(value, list):
        arr = np.array([_complex(v) for v in value])
        if arr.size != dimension:
            raise ConfigError("coefficient list length does not match the dimension")
        return arr
    return np.full(dimension, _complex(value))


def build_operator(spec: dict) -> ops.DiscretizedOperator:
    """Construct the operator named by ``spec["kind"]``; errors surface as ``ConfigError``."""
    kind = spec.get("kind")
    try:
        if kind == "gl_derivative":
            return ops.gl_fractional_derivative(_grid(spec), float(_req(spec, "order", kind)))
        if kind == "dirichlet_laplacian":
            return ops.dirichlet_laplacian(_grid(spec))
        if kind == "composite":
            return ops.composite_operator(float(_req(spec, "eta", kind)), float(_req(spec, "xi", kind)),
                                          float(_req(spec, "beta", kind)), _grid(spec),
                                          spec.get("laplacian_kind", "dirichlet"))
        if kind == "quasi_polynomial":
            coefs = [_complex(c) for c in _req(spec, "coefficients", kind)]
            return ops.quasi_polynomial(coefs, float(_req(spec, "theta", kind)), _grid(spec))
        if kind == "binomial_expansion":
            return ops.binomial_expansion_operator(int(_req(spec, "n", kind)), float(_req(spec, "beta", kind)),
                                                   _grid(spec))
        if kind == "difference":
            dim = int(_req(spec, "dimension", kind))
            n_diag = _coefficient(spec.get("n_diag", 1.0), None, dim)
            q = np.eye(dim) * float(spec.get("q_scale", 1.0))
            op, _ = ops.difference_perturbation(
                _coefficient(spec.get("a", 1.0), None, dim), _coefficient(spec.get("b", 1.0), None, dim),
                float(spec.get("c", 1.0)), int(spec.get("d_shift", 1)), float(spec.get("beta", 0.5)),
                q, np.diag(n_diag))
            return op
        if kind == "riesz_potential":
            return ops.riesz_potential(_grid(spec), float(_req(spec, "beta", kind)))
        if kind == "riesz_composite":
            grid = _grid(spec)
            a = _coefficient(spec.get("a", 1.0), grid, grid.n_points)
            return ops.riesz_composite(grid, a, float(spec.get("delta", 0.0)), float(_req(spec, "beta", kind)))
        if kind == "diagonal_normal":
            return ops.diagonal_normal_operator(
                float(_req(spec, "kappa", kind)), float(_req(spec, "M", kind)), int(_req(spec, "dimension", kind)),
                spec.get("arg_pattern", "alternating"), spec.get("eta_ratio"), int(spec.get("seed", 0)))
        if kind == "diagonal":
            values = np.array([_complex(v) for v in _req(spec, "values", kind)])
            if values.size == 0:
                raise ConfigError("diagonal.values must be non-empty")
            return ops.DiscretizedOperator("diagonal", values.size, None, {}, diagonal=values)
        if kind == "matrix":
            rows = _req(spec, "entries", kind)
            m = np.array([[_complex(v) for v in row] for row in rows])
            return ops.from_matrix(m)
    except ConfigError:
        raise
    except (ParameterError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"operator {kind}: {exc}") from exc
    raise ConfigError(f"unknown operator kind {kind!r}")


def build_initial(spec: dict, op: ops.DiscretizedOperator, base_dir: Path | None = None) -> np.ndarray:
    (key, value), = spec.items()
    n = op.dimension
    x = op.grid.nodes if op.grid is not None else np.linspace(0, 1, n + 2)[1:-1]
    if key == "basis_index":
        k = int(value)
        if not 0 <= k < n:
            raise ConfigError(f"basis_index must lie in [0, {n})")
        h = np.zeros(n, dtype=complex)
        h[k] = 1.0
        return h
    if key == "gaussian":
        center, width = float(_req(value, "center", "gaussian")), float(_req(value, "width", "gaussian"))
        if not width > 0:
            raise ConfigError("gaussian.width must be positive")
        return np.exp(-(((x - center) / width) ** 2)).astype(complex)
    if key == "sine":
        a, b = (op.grid.a, op.grid.b) if op.grid is not None else (0.0, 1.0)
        return np.sin(float(value) * np.pi * (x - a) / (b - a)).astype(complex)
    if key == "vector":
        h = np.array([_complex(v) for v in value])
    else:
        path = Path(value)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if not path.is_file():
            raise ConfigError(f"initial vector file not found: {path}")
        h = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, ndmin=1)
        h = np.asarray(h, dtype=complex).ravel()
    if h.size != n:
        raise ConfigError(f"initial vector has length {h.size}, operator dimension is {n}")
    return h
