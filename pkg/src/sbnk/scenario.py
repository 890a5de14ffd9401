"""Flat dotted-key scenario files: parse, validate, serialize.

A scenario file is plain text, one ``key = value`` per line, ``#`` comments.
Every key is checked against the schema below; unknown keys and malformed
values are rejected with the offending line number.
"""

from __future__ import annotations

from pathlib import Path

from sbnk.picard import ScenarioParams


class SchemaError(ValueError):
    """Scenario file violates the schema; message carries the line number."""


def _positive(x: float) -> bool:
    return x > 0


def _nonnegative(x: float) -> bool:
    return x >= 0


def _in_unit(x: float) -> bool:
    return 0.0 < x < 1.0


# key -> (python type, predicate, description)
SCHEMA: dict[str, tuple[type, object, str]] = {
    "grid.d": (int, lambda x: x in (1, 2, 3), "dimension in {1,2,3}"),
    "grid.nx": (int, lambda x: x >= 4 and x % 2 == 0, "even, >= 4"),
    "grid.nv": (int, lambda x: x >= 4 and x % 2 == 0, "even, >= 4"),
    "grid.lx": (float, _positive, "positive"),
    "grid.vmax": (float, _positive, "positive"),
    "weights.q": (float, _positive, "positive"),
    "weights.a": (float, _positive, "positive"),
    "weights.eps1": (float, _nonnegative, "nonnegative"),
    "scenario.eps": (float, _positive, "positive"),
    "scenario.beta": (float, _in_unit, "in (0,1)"),
    "scenario.alpha": (float, _in_unit, "in (0,1)"),
    "scenario.alpha_star": (float, _in_unit, "in (0,1)"),
    "scenario.t": (float, _positive, "positive"),
    "scenario.dt": (float, _positive, "positive"),
    "scenario.mode": (str, lambda x: x in ("picard", "direct"), "picard|direct"),
    "scenario.max_n": (int, _positive, "positive"),
    "scenario.stop_tol": (float, _positive, "positive"),
    "solver.mu": (float, _positive, "positive"),
    "solver.trunc_tol": (float, _positive, "positive"),
    "output.dir": (str, lambda x: len(x) > 0, "nonempty path"),
}

_PARAM_KEYS = {
    "grid.d": "d",
    "grid.nx": "nx",
    "grid.nv": "nv",
    "grid.lx": "Lx",
    "grid.vmax": "Vmax",
    "weights.q": "q",
    "weights.a": "a",
    "weights.eps1": "eps1",
    "scenario.eps": "eps",
    "scenario.beta": "beta",
    "scenario.alpha": "alpha",
    "scenario.alpha_star": "alpha_star",
    "scenario.t": "T",
    "scenario.dt": "dt",
    "scenario.mode": "mode",
    "scenario.max_n": "max_n",
    "scenario.stop_tol": "stop_tol",
    "solver.mu": "mu",
    "solver.trunc_tol": "trunc_tol",
}


def parse_scenario(text: str) -> dict[str, int | float | str]:
    """Parse and schema-validate scenario text into a flat key-value table."""
    out: dict[str, int | float | str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in SCHEMA:
            raise SchemaError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise SchemaError(f"line {lineno}: duplicate key {key!r}")
        typ, pred, desc = SCHEMA[key]
        try:
            if typ is int:
                parsed: int | float | str = int(value)
            elif typ is float:
                parsed = float(value)
            else:
                parsed = value
        except ValueError as exc:
            raise SchemaError(
                f"line {lineno}: key {key!r} expects {typ.__name__}, got {value!r}"
            ) from exc
        if not pred(parsed):  # type: ignore[operator]
            raise SchemaError(
                f"line {lineno}: key {key!r} value {value!r} violates constraint ({desc})"
            )
        out[key] = parsed
    return out


def serialize_scenario(table: dict[str, int | float | str]) -> str:
    """Render a scenario table back to text, keys sorted, values round-trippable."""
    lines = []
    for key in sorted(table):
        v = table[key]
        if isinstance(v, float):
            lines.append(f"{key} = {v:.17g}")
        else:
            lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


def load_scenario(path: str | Path) -> dict[str, int | float | str]:
    return parse_scenario(Path(path).read_text())


def scenario_to_params(table: dict[str, int | float | str]) -> ScenarioParams:
    """Build solver parameters from a parsed scenario table."""
    kwargs = {}
    for key, attr in _PARAM_KEYS.items():
        if key in table:
            kwargs[attr] = table[key]
    try:
        return ScenarioParams(**kwargs)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"invalid parameter combination: {exc}") from exc


def params_to_table(params: ScenarioParams) -> dict[str, int | float | str]:
    return {key: getattr(params, attr) for key, attr in _PARAM_KEYS.items()}
