"""Run configuration: a flat JSON document, validated before any work."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from fraclog.errors import ConfigError
from fraclog.models import Cubic, LogisticModel, Quadratic, QuadraticCapacity
from fraclog.order import FractionalOrder
from fraclog.scheme import SolverConfig

MODEL_PARAMS = {
    "quadratic": ("r",),
    "quadratic_capacity": ("r", "K"),
    "cubic": ("r", "k", "m"),
}

KEYS = {
    "model", "r", "K", "k", "m",
    "theta", "mu", "gamma", "b_theta",
    "x0", "t0", "t_end", "steps",
    "scheme", "corrector_iterations", "corrector_tol", "k_max",
    "output", "epsilon", "L", "lipschitz_A", "sample_times",
}

SYNONYMS = {"alpha": "theta"}


@dataclass(frozen=True)
class RunConfig:
    model: LogisticModel
    ord: FractionalOrder
    x0: tuple[float, ...]
    t0: float
    t_end: float
    steps: int
    scheme: str
    corrector_iterations: int
    corrector_tol: float
    k_max: int
    output: str | None
    epsilon: float
    L: float | None
    lipschitz_A: float | None
    sample_times: tuple[float, ...]
    raw: dict

    def solver_config(self) -> SolverConfig:
        iterations = self.corrector_iterations if self.scheme == "pece" else 0
        return SolverConfig(self.t0, self.t_end, self.steps, iterations,
                            self.corrector_tol, k_max=self.k_max)

    def replace(self, **changes) -> "RunConfig":
        """Re-validate with some raw keys changed."""
        raw = dict(self.raw)
        raw.update(changes)
        return parse_config(raw)


def _number(raw: dict, key: str, default: Any = None, *, required: bool = False) -> float:
    if key not in raw:
        if required:
            raise ConfigError(key, "missing required key")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(key, f"must be finite, got {value!r}")
    return float(value)


def _integer(raw: dict, key: str, default: int) -> int:
    value = raw.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return value


def _build(field: str, factory, *args):
    try:
        return factory(*args)
    except ValueError as exc:
        raise ConfigError(field, str(exc)) from None


def parse_config(raw: dict) -> RunConfig:
    """Validate a config mapping; errors name the offending key."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in raw:
        if key in SYNONYMS:
            raise ConfigError(key, f"use {SYNONYMS[key]!r} for the fractional order")
        if key not in KEYS:
            raise ConfigError(key, "unknown key")

    kind = raw.get("model")
    if kind not in MODEL_PARAMS:
        raise ConfigError("model", f"expected one of {sorted(MODEL_PARAMS)}, got {kind!r}")
    params = [_number(raw, name, required=True) for name in MODEL_PARAMS[kind]]
    factory = {"quadratic": Quadratic, "quadratic_capacity": QuadraticCapacity,
               "cubic": Cubic}[kind]
    model = _build(",".join(MODEL_PARAMS[kind]), factory, *params)

    theta = _number(raw, "theta", required=True)
    mu = _number(raw, "mu", required=True)
    gamma = _number(raw, "gamma", required=True)
    b_theta = _number(raw, "b_theta", 1.0)
    for name, value, ok in (("theta", theta, 0 < theta < 1), ("mu", mu, 0 < mu < 1),
                            ("gamma", gamma, gamma > 0), ("b_theta", b_theta, b_theta > 0)):
        if not ok:
            raise ConfigError(name, f"out of range: {value}")
    ord = FractionalOrder(theta, mu, gamma, b_theta)

    x0_raw = raw.get("x0")
    if x0_raw is None:
        raise ConfigError("x0", "missing required key")
    x0_list = x0_raw if isinstance(x0_raw, list) else [x0_raw]
    if not x0_list:
        raise ConfigError("x0", "empty list")
    x0 = tuple(_number({"x0": v}, "x0") for v in x0_list)

    t0 = _number(raw, "t0", 0.0)
    t_end = _number(raw, "t_end", required=True)
    if not t_end > t0:
        raise ConfigError("t_end", f"must exceed t0 ({t0}), got {t_end}")
    steps = _integer(raw, "steps", None) if "steps" in raw else None
    if steps is None:
        raise ConfigError("steps", "missing required key")
    if steps < 1:
        raise ConfigError("steps", f"must be a positive integer, got {steps}")

    scheme = raw.get("scheme", "pece")
    if scheme not in ("explicit", "pece"):
        raise ConfigError("scheme", f"expected 'explicit' or 'pece', got {scheme!r}")
    iterations = _integer(raw, "corrector_iterations", 1)
    if iterations < 0:
        raise ConfigError("corrector_iterations", "must be nonnegative")
    tol = _number(raw, "corrector_tol", 1e-12)
    k_max = _integer(raw, "k_max", 256)
    if k_max < 1:
        raise ConfigError("k_max", "must be positive")

    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output", "expected a path string")
    epsilon = _number(raw, "epsilon", 0.02)
    if not epsilon > 0:
        raise ConfigError("epsilon", "must be positive")
    L = _number(raw, "L", None)
    if L is not None and not L > 0:
        raise ConfigError("L", "must be positive")
    A = _number(raw, "lipschitz_A", None)
    if A is not None and A < 0:
        raise ConfigError("lipschitz_A", "must be nonnegative")
    times = raw.get("sample_times", [5, 10, 20, 40])
    if not isinstance(times, list) or not times:
        raise ConfigError("sample_times", "expected a non-empty list")
    sample_times = tuple(_number({"sample_times": v}, "sample_times") for v in times)
    if any(t < 0 for t in sample_times):
        raise ConfigError("sample_times", "times must be nonnegative")

    return RunConfig(model, ord, x0, t0, t_end, steps, scheme, iterations, tol,
                     k_max, output, epsilon, L, A, sample_times, dict(raw))


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None
    return parse_config(raw)
