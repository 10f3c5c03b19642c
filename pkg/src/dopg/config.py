"""Run configuration: YAML grammar, schema validation with line numbers, and object construction.

A config file has up to five top-level sections::

    case:            # optional manufactured solution preset
      name: case1    # case1 | case2 | case3
      d: 1
      p1: 3
      alpha: 1.0e-4
      p2: 2          # case1 only
      p3: 2          # case1 only
      p: 1           # case3 only
      K: 25          # projection truncation (case2 default 25)
    problem:         # optional; overrides the preset problem
      T: 2.0
      bounds: [-1, 1]          # one pair for all dimensions, or a list of pairs
      gamma: 0.0
      c_l: 0.0                 # scalars or per-dimension lists
      c_r: 0.0
      kappa_l: 1.0
      kappa_r: 0.0
      temporal:  {kind: constant, value: 1.0, interval: [0.1, 0.4]}
      diffusion: {kind: constant, value: 1.0, interval: [0.6, 0.9]}
      advection: null
      load: "sin(pi*x1) * t"   # forcing expression, used when no case is given
    discretization:
      N: 4
      M: 11                    # scalar or per-dimension list
      tau_b: 1.0e-4            # default: case alpha, else centre of the temporal interval
      q_time: 20
      q_space: null            # null: M_j + 2 order points
    experiment:
      solver: fast             # fast | direct | both
      grid_density: 101
      refine: {axis: space, values: [3, 5, 7, 9]}
      bench: {dims: [1, 2, 3], N: 4, M: 11, crossover_M: [2, 4, 6, 8, 10]}

Distributions take ``kind`` (``dirac`` with ``at``, ``constant`` with
``value``, ``table`` with an ``expr`` in the half-order ``s``) and an
``interval`` of half-orders.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
import yaml
from scipy import special

from dopg.distribution import OrderDistribution
from dopg.errors import DopgError
from dopg.manufactured import ManufacturedCase, make_case
from dopg.problem import DiscretizationConfig, ProblemSpec

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "SCHEMA", "safe_eval"]


class ConfigError(DopgError, ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, path: str = ""):
        self.line = line
        self.path = path
        where = f"line {line}: " if line else ""
        loc = f"{path}: " if path else ""
        super().__init__(f"{where}{loc}{message}")


_num = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}
_num_or_list = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 1}]}
_interval = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

_distribution = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["dirac", "constant", "table"]},
        "at": _num,
        "value": {"type": "number", "exclusiveMinimum": 0},
        "expr": {"type": "string"},
        "interval": _interval,
        "quadrature_order": _pos_int,
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "dirac"}}}, "then": {"required": ["at"]}},
        {"if": {"properties": {"kind": {"const": "constant"}}}, "then": {"required": ["value", "interval"]}},
        {"if": {"properties": {"kind": {"const": "table"}}}, "then": {"required": ["expr", "interval"]}},
    ],
}
_dist_or_list = {
    "oneOf": [_distribution, {"type": "null"}, {"type": "array", "items": {"oneOf": [_distribution, {"type": "null"}]}}]
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "case": {
            "type": "object",
            "required": ["name"],
            "additionalProperties": False,
            "properties": {
                "name": {"enum": ["case1", "case2", "case3"]},
                "d": {"type": "integer", "minimum": 1, "maximum": 3},
                "p1": {"type": "integer", "minimum": 0},
                "alpha": {"type": "number", "minimum": 0},
                "p2": _pos_int,
                "p3": _pos_int,
                "p": _pos_int,
                "K": _pos_int,
                "wavenumber": _num,
            },
        },
        "problem": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "d": {"type": "integer", "minimum": 1, "maximum": 3},
                "T": {"type": "number", "exclusiveMinimum": 0},
                "bounds": {"oneOf": [_interval, {"type": "array", "items": _interval, "minItems": 1}]},
                "gamma": _num,
                "c_l": _num_or_list,
                "c_r": _num_or_list,
                "kappa_l": _num_or_list,
                "kappa_r": _num_or_list,
                "temporal": _distribution,
                "diffusion": _dist_or_list,
                "advection": _dist_or_list,
                "load": {"type": "string"},
            },
        },
        "discretization": {
            "type": "object",
            "required": ["N", "M"],
            "additionalProperties": False,
            "properties": {
                "N": _pos_int,
                "M": {"oneOf": [_pos_int, {"type": "array", "items": _pos_int, "minItems": 1}]},
                "tau_b": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "q_time": _pos_int,
                "q_space": {"oneOf": [_pos_int, {"type": "null"}]},
                "q_inner_time": _pos_int,
                "q_inner_space": _pos_int,
                "q_load": _pos_int,
            },
        },
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "solver": {"enum": ["fast", "direct", "both"]},
                "grid_density": {"type": "integer", "minimum": 2},
                "refine": {
                    "type": "object",
                    "required": ["values"],
                    "additionalProperties": False,
                    "properties": {
                        "axis": {"enum": ["space", "time"]},
                        "values": {"type": "array", "items": _pos_int, "minItems": 1},
                    },
                },
                "bench": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "dims": {"type": "array", "items": {"enum": [1, 2, 3]}, "minItems": 1},
                        "N": _pos_int,
                        "M": _pos_int,
                        "repeats": _pos_int,
                        "crossover_M": {"type": "array", "items": _pos_int},
                    },
                },
            },
        },
    },
}


_EVAL_NAMES = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "pi", "abs", "sinh", "cosh", "tanh", "e", "where")
}
_EVAL_NAMES["gamma"] = special.gamma


def safe_eval(expr: str, **variables):
    """Evaluate a numeric expression with numpy math names and the given variables only."""
    code = compile(expr, "<config>", "eval")
    allowed = set(_EVAL_NAMES) | set(variables)
    for name in code.co_names:
        if name not in allowed:
            raise ConfigError(f"name {name!r} is not allowed in expression {expr!r}")
    return eval(code, {"__builtins__": {}}, {**_EVAL_NAMES, **variables})


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-4`` (no dot) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


def _node_line(root: yaml.Node | None, path) -> int | None:
    """Line of the YAML node addressed by a jsonschema path (deepest existing node)."""
    node, line = root, (root.start_mark.line + 1 if root is not None else None)
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            nxt = node.value[key]
        else:
            nxt = None
        if nxt is None:
            break
        node, line = nxt, nxt.start_mark.line + 1
    return line


@dataclass
class RunConfig:
    """Validated configuration with the objects it describes."""

    raw: dict
    problem: ProblemSpec
    disc: DiscretizationConfig
    case: ManufacturedCase | None
    load_expr: str | None
    solver: str
    grid_density: int
    refine_axis: str
    refine_values: tuple[int, ...]
    bench: dict
    q_load: int
    source: str = "<string>"

    def with_sizes(self, N: int | None = None, M=None) -> DiscretizationConfig:
        """The discretization with ``N`` and/or ``M`` replaced."""
        d = self.disc
        M = d.M if M is None else ((M,) * self.problem.d if np.ndim(M) == 0 else tuple(M))
        return DiscretizationConfig(
            d.N if N is None else N, M, d.tau_b, d.q_time, d.q_space, d.q_inner_time, d.q_inner_space
        )


def _distribution(spec: dict | None, where: str) -> OrderDistribution | None:
    if spec is None:
        return None
    q = spec.get("quadrature_order", 20)
    kind = spec["kind"]
    if kind == "dirac":
        lo, hi = spec.get("interval", (None, None))
        return OrderDistribution.dirac(float(spec["at"]), lo, hi)
    lo, hi = map(float, spec["interval"])
    if kind == "constant":
        return OrderDistribution.constant(float(spec["value"]), lo, hi, q)
    expr = spec["expr"]
    safe_eval(expr, s=np.array([0.5 * (lo + hi)]))
    return OrderDistribution.table(lambda s, e=expr: safe_eval(e, s=s) * np.ones_like(s), lo, hi, expr, q)


def _dists(spec, d: int, where: str):
    if isinstance(spec, list):
        return [_distribution(s, f"{where}[{i}]") for i, s in enumerate(spec)]
    return _distribution(spec, where)


def parse_config(data: Any, root: yaml.Node | None = None, source: str = "<string>") -> RunConfig:
    """Validate a parsed config mapping and build the run objects."""
    if isinstance(data, dict) and "manifest" in data and "config" in data:
        data = data["config"]
        root = None
    if data is None:
        data = {}
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        path = list(err.absolute_path)
        raise ConfigError(err.message, _node_line(root, path), "/".join(map(str, path)))

    def fail(exc: Exception, section: str):
        return ConfigError(str(exc), _node_line(root, [section]), section)

    case_spec = data.get("case")
    case = None
    if case_spec:
        params = {k: v for k, v in case_spec.items() if k != "name"}
        if case_spec["name"] == "case1" and any(k in params for k in ("p", "wavenumber")):
            raise ConfigError("case1 takes p2/p3, not p or wavenumber", _node_line(root, ["case"]), "case")
        if case_spec["name"] == "case3" and any(k in params for k in ("p2", "p3", "K", "wavenumber")):
            raise ConfigError("case3 takes p, not p2/p3/K", _node_line(root, ["case"]), "case")
        if case_spec["name"] == "case2" and any(k in params for k in ("p", "p2", "p3")):
            raise ConfigError("case2 takes K and wavenumber", _node_line(root, ["case"]), "case")
        try:
            case = make_case(case_spec["name"], **params)
        except (DopgError, TypeError) as exc:
            raise fail(exc, "case") from exc

    prob = data.get("problem", {})
    load_expr = prob.get("load")
    if case is None and load_expr is None:
        raise ConfigError("either a case or problem.load is required", _node_line(root, []), "")
    try:
        if case is not None and not any(k for k in prob if k != "load"):
            problem = case.problem
        else:
            base = case.problem if case is not None else None
            d = prob.get("d", base.d if base else None)
            if d is None:
                bounds = prob.get("bounds")
                d = len(bounds) if bounds and isinstance(bounds[0], list) else 1
            temporal = _distribution(prob["temporal"], "temporal") if "temporal" in prob else (base.temporal if base else None)
            if temporal is None:
                raise ConfigError("problem.temporal is required", _node_line(root, ["problem"]), "problem")
            diffusion = _dists(prob["diffusion"], d, "diffusion") if "diffusion" in prob else (
                list(base.diffusion) if base else None
            )
            advection = _dists(prob["advection"], d, "advection") if "advection" in prob else (
                list(base.advection) if base else None
            )
            problem = ProblemSpec.create(
                temporal=temporal,
                diffusion=diffusion,
                d=d,
                T=prob.get("T", base.T if base else 2.0),
                bounds=prob.get("bounds", base.bounds if base else (-1.0, 1.0)),
                advection=advection,
                gamma=prob.get("gamma", base.gamma if base else 0.0),
                c_l=prob.get("c_l", list(base.c_l) if base else 0.0),
                c_r=prob.get("c_r", list(base.c_r) if base else 0.0),
                kappa_l=prob.get("kappa_l", list(base.kappa_l) if base else 1.0),
                kappa_r=prob.get("kappa_r", list(base.kappa_r) if base else 0.0),
            )
        if case is not None and case.problem.d != problem.d:
            raise ConfigError("problem dimension differs from the case dimension", _node_line(root, ["problem"]), "problem")
        if case is not None:
            case = ManufacturedCase(case.name, problem, case.exact)
        if load_expr is not None:
            safe_eval(load_expr, t=1.0, **{f"x{j + 1}": 0.0 for j in range(problem.d)})
    except ConfigError:
        raise
    except (DopgError, SyntaxError, TypeError, ValueError) as exc:
        raise fail(exc, "problem") from exc

    disc_spec = data.get("discretization")
    if disc_spec is None:
        raise ConfigError("discretization section is required", _node_line(root, []), "discretization")
    try:
        M = disc_spec["M"]
        M = (M,) * problem.d if isinstance(M, int) else tuple(M)
        if len(M) != problem.d:
            raise ConfigError(f"M needs {problem.d} entries", _node_line(root, ["discretization", "M"]), "discretization/M")
        tau_b = disc_spec.get("tau_b")
        if tau_b is None and case is not None:
            tau_b = case.tau_b
        if tau_b is None:
            # centre of the temporal order interval (the dirac location for point masses)
            tau_b = 0.5 * (problem.temporal.lo + problem.temporal.hi)
        disc = DiscretizationConfig(
            disc_spec["N"], M, tau_b,
            q_time=disc_spec.get("q_time", 20),
            q_space=disc_spec.get("q_space"),
            q_inner_time=disc_spec.get("q_inner_time"),
            q_inner_space=disc_spec.get("q_inner_space"),
        )
    except ConfigError:
        raise
    except DopgError as exc:
        raise fail(exc, "discretization") from exc

    exp = data.get("experiment", {})
    refine = exp.get("refine", {})
    values = tuple(refine.get("values", ()))
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(
            "refinement schedule must increase strictly",
            _node_line(root, ["experiment", "refine", "values"]),
            "experiment/refine/values",
        )
    return RunConfig(
        raw=data,
        problem=problem,
        disc=disc,
        case=case,
        load_expr=load_expr,
        solver=exp.get("solver", "fast"),
        grid_density=exp.get("grid_density", 101),
        refine_axis=refine.get("axis", "space"),
        refine_values=values,
        bench=exp.get("bench", {}),
        q_load=disc_spec.get("q_load", 40),
        source=source,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read, validate and build a config file (YAML, or a JSON run manifest)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        root = yaml.compose(text, Loader=_Loader)
        data = yaml.load(text, Loader=_Loader)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"YAML syntax error: {exc.problem}", line) from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", 1)
    return parse_config(data, root, str(path))
