"""Run configuration: a single JSON document, strictly validated.

Unknown keys are rejected anywhere in the tree and violations carry the
field path, so typos cannot silently change a run.  One deliberate
exception: a growth exponent b >= 2 in the problem block is not fatal --
it is recorded as a rejection of hypothesis (3) (the theorem requires
b < 2) so the checker can still evaluate the other hypotheses and report
the rejection prominently.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .geometry import Ball, Box, Grid
from .presets import PROBLEMS, build_problem

__all__ = ["RunConfig", "load_config", "config_hash"]

_DOMAIN_KEYS = {"shape", "center", "radius", "lower", "upper"}
_GRID_KEYS = {"nodes_per_axis", "radial_cells", "h"}
_PROBLEM_KEYS = {"name", "mu", "q", "m1", "m2", "a", "b", "alpha", "beta", "t_grid", "coeffs"}
_SAMPLING_KEYS = {"t_count", "t_min", "t_max", "s_count", "s_span", "x_stride"}
_SOLVER_KEYS = {"tol", "max_iters", "seed", "path_points", "mp_max_iters", "residual_trials"}
_OUTPUT_KEYS = {"dir"}
_TOP_KEYS = {"schema", "domain", "grid", "problem", "sampling", "solver", "output"}


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _check_keys(section: dict, allowed: set, path: str) -> None:
    unknown = set(section) - allowed
    _require(not unknown, path, f"unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}")


def _number(section: dict, key: str, path: str, default=None, positive=False, integer=False):
    if key not in section or section[key] is None:
        return default
    v = section[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"{path}.{key}", "must be a number")
    if integer:
        _require(float(v).is_integer(), f"{path}.{key}", "must be an integer")
        v = int(v)
    if positive:
        _require(v > 0, f"{path}.{key}", "must be > 0")
    return v


@dataclass
class RunConfig:
    """Validated run configuration; see the README for the JSON schema."""

    domain: dict
    grid: dict
    problem: dict
    sampling: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    rejected: dict = field(default_factory=dict)  # hypothesis index -> reason

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        _require(isinstance(raw, dict), "config", "must be a JSON object")
        _check_keys(raw, _TOP_KEYS, "config")
        schema = raw.get("schema", 1)
        _require(schema == 1, "config.schema", f"unsupported schema {schema}")
        for key in ("domain", "grid", "problem"):
            _require(key in raw, f"config.{key}", "section is required")

        dom = dict(raw["domain"])
        _check_keys(dom, _DOMAIN_KEYS, "domain")
        shape = dom.get("shape")
        _require(shape in ("ball", "box"), "domain.shape", "must be 'ball' or 'box'")
        if shape == "ball":
            _require("center" in dom and "radius" in dom, "domain", "ball needs center and radius")
            _require(
                isinstance(dom["center"], list) and len(dom["center"]) >= 1,
                "domain.center",
                "must be a coordinate list",
            )
            _number(dom, "radius", "domain", positive=True)
        else:
            for k in ("lower", "upper"):
                _require(
                    isinstance(dom.get(k), list) and len(dom[k]) >= 1, f"domain.{k}", "must be a coordinate list"
                )
            _require(len(dom["lower"]) == len(dom["upper"]), "domain", "lower/upper lengths differ")
            _require(
                all(u > l for l, u in zip(dom["lower"], dom["upper"])),
                "domain",
                "upper must exceed lower componentwise",
            )

        grd = dict(raw["grid"])
        _check_keys(grd, _GRID_KEYS, "grid")
        nodes = _number(grd, "nodes_per_axis", "grid", positive=True, integer=True)
        cells = _number(grd, "radial_cells", "grid", positive=True, integer=True)
        h = _number(grd, "h", "grid", positive=True)
        _require(
            sum(v is not None for v in (nodes, cells, h)) == 1,
            "grid",
            "exactly one of nodes_per_axis, radial_cells or h is required",
        )
        if nodes is not None:
            _require(nodes >= 4, "grid.nodes_per_axis", "must be >= 4")
        if cells is not None:
            _require(cells >= 4, "grid.radial_cells", "must be >= 4")
            _require(shape == "ball", "grid.radial_cells", "radial grids need a ball domain")

        prob = dict(raw["problem"])
        _check_keys(prob, _PROBLEM_KEYS, "problem")
        name = prob.get("name")
        _require(name in PROBLEMS, "problem.name", f"must be one of {sorted(PROBLEMS)}")
        _number(prob, "mu", "problem", positive=True)
        _number(prob, "q", "problem", positive=True)
        for k in ("m1", "m2"):
            v = _number(prob, k, "problem")
            if v is not None:
                _require(v >= 0, f"problem.{k}", "must be >= 0")
        _number(prob, "a", "problem", positive=True)
        _number(prob, "alpha", "problem", positive=True)
        _number(prob, "beta", "problem", positive=True)
        rejected = {}
        b = _number(prob, "b", "problem")
        if b is not None and b >= 2:
            # theorem hypothesis (3) requires b < 2; record, do not run (3)
            rejected[3] = (
                f"configured growth pair (a={prob.get('a')}, b={b}) rejected: "
                "the coercivity hypothesis requires b < 2"
            )
            prob["a"] = None
            prob["b"] = None
        elif b is not None:
            _require(b > 0, "problem.b", "must be > 0")
        if prob.get("coeffs") is not None:
            _require(
                isinstance(prob["coeffs"], list)
                and len(prob["coeffs"]) >= 1
                and all(isinstance(v, (int, float)) for v in prob["coeffs"]),
                "problem.coeffs",
                "must be a nonempty list of numbers",
            )
        tg = prob.get("t_grid", [1.0])
        _require(
            isinstance(tg, list) and len(tg) >= 1 and all(isinstance(v, (int, float)) for v in tg),
            "problem.t_grid",
            "must be a nonempty list of numbers",
        )
        _require(all(v > 0 for v in tg), "problem.t_grid", "times must be > 0")
        prob["t_grid"] = [float(v) for v in tg]

        samp = dict(raw.get("sampling", {}))
        _check_keys(samp, _SAMPLING_KEYS, "sampling")
        _number(samp, "t_count", "sampling", positive=True, integer=True)
        _number(samp, "t_min", "sampling", positive=True)
        _number(samp, "t_max", "sampling", positive=True)
        _number(samp, "s_count", "sampling", positive=True, integer=True)
        _number(samp, "s_span", "sampling", positive=True)
        _number(samp, "x_stride", "sampling", positive=True, integer=True)

        solv = dict(raw.get("solver", {}))
        _check_keys(solv, _SOLVER_KEYS, "solver")
        _number(solv, "tol", "solver", positive=True)
        _number(solv, "max_iters", "solver", positive=True, integer=True)
        _number(solv, "seed", "solver", integer=True)
        _number(solv, "path_points", "solver", positive=True, integer=True)
        _number(solv, "mp_max_iters", "solver", positive=True, integer=True)
        _number(solv, "residual_trials", "solver", positive=True, integer=True)

        outp = dict(raw.get("output", {}))
        _check_keys(outp, _OUTPUT_KEYS, "output")

        return RunConfig(
            domain=dom,
            grid=grd,
            problem=prob,
            sampling=samp,
            solver=solv,
            output=outp,
            rejected=rejected,
        )

    def to_dict(self) -> dict:
        d = {
            "schema": 1,
            "domain": self.domain,
            "grid": self.grid,
            "problem": self.problem,
            "sampling": self.sampling,
            "solver": self.solver,
            "output": self.output,
        }
        return d

    # -- construction of the runtime objects --------------------------------

    def build_domain(self):
        if self.domain["shape"] == "ball":
            return Ball(tuple(self.domain["center"]), float(self.domain["radius"]))
        return Box(tuple(self.domain["lower"]), tuple(self.domain["upper"]))

    def build_grid(self) -> Grid:
        dom = self.build_domain()
        if self.grid.get("radial_cells") is not None:
            return Grid.radial(dom, int(self.grid["radial_cells"]))
        if self.grid.get("h") is not None:
            lo, hi = dom.bounds()
            side = float(max(hi - lo))
            nodes = max(4, int(math.ceil(side / float(self.grid["h"]))) + 1)
            return Grid.cartesian(dom, nodes)
        return Grid.cartesian(dom, int(self.grid["nodes_per_axis"]))

    def build_spec(self, grid: Grid):
        params = {k: v for k, v in self.problem.items() if k != "name" and v is not None}
        return build_problem(self.problem["name"], grid, params)

    def sampling_kwargs(self) -> dict:
        out = {}
        for k in _SAMPLING_KEYS:
            if self.sampling.get(k) is not None:
                out[k] = self.sampling[k]
        return out

    def solver_value(self, key: str, default):
        v = self.solver.get(key)
        return default if v is None else v


def config_hash(cfg: RunConfig) -> str:
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(raw)
