"""Scenario files: a YAML document with ``name``, ``system``, ``defaults``
and an optional ``expected`` block."""

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .bilinear import BilinearSystem

__all__ = ["Scenario", "ScenarioError", "DEFAULTS", "load_scenario", "parse_scenario",
           "emit_scenario", "bundled_scenarios", "resolve_scenario_path"]

DEFAULTS = {
    "seed": 0,
    "grid": 1024,
    "tau": 0.05,
    "tol": 1e-3,
    "max_iter": 500,
    "control_samples": 32,
    "refine": 2,
    "budget": 200000,
    "horizon": 50.0,
    "angular_tol": 1e-6,
    "n_rays": 5,
    "graph_bins": 720,
    "graph_tau": 0.05,
    "graph_controls": 5,
    "access_grid": 360,
    "lie_depth": 8,
    "verify_times": [0.25, 0.5, 1.0],
    "verify_tol": 0.03,
}

_TOP_KEYS = {"name", "system", "defaults", "expected"}
_SYSTEM_KEYS = {"A", "B", "U"}
_EXPECTED_KEYS = {"R", "R_tol", "arcs", "arc_tol_bins", "eigensets", "union_family"}


class ScenarioError(ValueError):
    """Invalid scenario file; the message names the offending key."""


@dataclass
class Scenario:
    name: str
    system: BilinearSystem
    defaults: dict = field(default_factory=dict)
    expected: dict = None

    def setting(self, key):
        return self.defaults.get(key, DEFAULTS[key])

    def to_dict(self):
        sys = self.system
        d = {
            "name": self.name,
            "system": {
                "A": sys.A.tolist(),
                "B": [B.tolist() for B in sys.Bs],
                "U": sys.U.tolist(),
            },
            "defaults": copy.deepcopy(self.defaults),
        }
        if self.expected is not None:
            d["expected"] = copy.deepcopy(self.expected)
        return d


def _line_of(root, path):
    """1-based line of the key at ``path`` in a composed YAML node tree."""
    node = root
    line = None
    for key in path:
        if not isinstance(node, yaml.MappingNode):
            break
        for k, v in node.value:
            if k.value == key:
                line = k.start_mark.line + 1
                node = v
                break
        else:
            break
    return line


def _fail(root, path, msg):
    where = _line_of(root, path) if root is not None else None
    key = ".".join(path)
    loc = f" (line {where})" if where else ""
    raise ScenarioError(f"{key}{loc}: {msg}")


def _matrix(root, path, value, dim=None):
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        _fail(root, path, "expected a matrix given as a list of numeric rows")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        _fail(root, path, f"expected a square matrix, got shape {M.shape}")
    if dim is not None and M.shape[0] != dim:
        _fail(root, path, f"expected a {dim}x{dim} matrix, got {M.shape[0]}x{M.shape[1]}")
    if not np.all(np.isfinite(M)):
        _fail(root, path, "entries must be finite")
    return M


def parse_scenario(text, source="<string>"):
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" line {mark.line + 1}" if mark else ""
        raise ScenarioError(f"{source}:{loc} YAML parse error: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: top level must be a mapping")
    for key in data:
        if key not in _TOP_KEYS:
            _fail(root, [str(key)], f"unknown key (allowed: {sorted(_TOP_KEYS)})")
    for key in ("name", "system"):
        if key not in data:
            raise ScenarioError(f"{key}: missing required key")
    name = data["name"]
    if not isinstance(name, str) or not name:
        _fail(root, ["name"], "must be a non-empty string")
    system = data["system"]
    if not isinstance(system, dict):
        _fail(root, ["system"], "must be a mapping with keys A, B, U")
    for key in system:
        if key not in _SYSTEM_KEYS:
            _fail(root, ["system", str(key)], f"unknown key (allowed: {sorted(_SYSTEM_KEYS)})")
    for key in ("A", "B", "U"):
        if key not in system:
            raise ScenarioError(f"system.{key}: missing required key")
    A = _matrix(root, ["system", "A"], system["A"])
    if not isinstance(system["B"], list) or not system["B"]:
        _fail(root, ["system", "B"], "expected a non-empty list of matrices")
    Bs = [_matrix(root, ["system", "B"], B, A.shape[0]) for B in system["B"]]
    try:
        U = np.array(system["U"], dtype=float).reshape(-1, 2)
    except (TypeError, ValueError):
        _fail(root, ["system", "U"], "expected a list of [lo, hi] pairs")
    if U.shape[0] != len(Bs):
        _fail(root, ["system", "U"], f"needs {len(Bs)} [lo, hi] pairs, one per control matrix")
    if np.any(U[:, 0] > U[:, 1]):
        _fail(root, ["system", "U"], "lo must not exceed hi")
    defaults = data.get("defaults") or {}
    if not isinstance(defaults, dict):
        _fail(root, ["defaults"], "must be a mapping")
    for key, value in defaults.items():
        if key not in DEFAULTS:
            _fail(root, ["defaults", str(key)], f"unknown setting (allowed: {sorted(DEFAULTS)})")
        ref = DEFAULTS[key]
        if isinstance(ref, list):
            ok = isinstance(value, list) and all(isinstance(v, (int, float)) for v in value)
        elif isinstance(ref, int) and not isinstance(ref, bool):
            ok = isinstance(value, int) and not isinstance(value, bool)
        else:
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if not ok:
            _fail(root, ["defaults", str(key)], f"wrong type {type(value).__name__}")
    expected = data.get("expected")
    if expected is not None:
        if not isinstance(expected, dict):
            _fail(root, ["expected"], "must be a mapping")
        for key in expected:
            if key not in _EXPECTED_KEYS:
                _fail(root, ["expected", str(key)], f"unknown key (allowed: {sorted(_EXPECTED_KEYS)})")
    try:
        sys = BilinearSystem(A, Bs, U)
    except ValueError as exc:
        raise ScenarioError(f"system: {exc}") from None
    return Scenario(name, sys, dict(defaults), expected)


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    return parse_scenario(text, str(path))


def emit_scenario(scn):
    return yaml.safe_dump(scn.to_dict(), sort_keys=False, default_flow_style=None)


def bundled_scenarios():
    root = resources.files("eigensets") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def resolve_scenario_path(name_or_path):
    """A filesystem path, or the name of a bundled scenario."""
    p = Path(name_or_path)
    if p.exists():
        return p
    cand = resources.files("eigensets") / "scenarios" / f"{name_or_path}.yaml"
    if cand.is_file():
        return Path(str(cand))
    raise ScenarioError(f"{name_or_path}: no such file or bundled scenario "
                        f"(bundled: {', '.join(bundled_scenarios())})")
