"""Plain-text run configuration: bracketed sections of key = value lines.

Grammar (one nesting level only):

    # comment (also ';'); blank lines ignored
    [section]
    key = value              # scalars
    key = a, b, c            # comma-separated lists
    check.param = value      # per-check parameters inside [checks]

Unknown sections or keys are hard errors (with a closest-match hint);
every error carries its line number.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field

MODEL_NAMES = ("scalar", "burgers", "advection", "wave", "maxwell",
               "euler_sh", "euler_cons", "tricomi", "ck")
CHECK_NAMES = ("is_sh", "entropy_pair", "energy", "constraints", "support",
               "rh", "riemann", "viscous_limit", "tricomi_certificate")
PROFILE_NAMES = ("constant", "step", "bump", "plane-wave", "file")
BOUNDARY_NAMES = ("periodic", "outflow")

# value kinds: float, int, str, list_float, list_int, list_str, enum:<...>
_SCHEMA = {
    "model": {
        "name": "enum:" + ",".join(MODEL_NAMES),
        "gamma": "float",
        "a": "float",
        "flux_coeffs": "list_float",
        "lam": "float",
        "y_bound": "float",
        "a_re": "float",
        "a_im": "float",
        "aj": "list_float",
        "ajk": "list_float",
    },
    "grid": {
        "shape": "list_int",
        "h": "float",
        "origin": "list_float",
        "boundary": "enum:" + ",".join(BOUNDARY_NAMES),
    },
    "scheme": {
        "lambda": "float",
        "cfl_safety": "float",
        "t_end": "float",
        "output_stride": "int",
        "viscosity": "float",
    },
    "initial": {
        "profile": "enum:" + ",".join(PROFILE_NAMES),
        "value": "list_float",
        "left": "list_float",
        "right": "list_float",
        "jump_at": "float",
        "center": "list_float",
        "radius": "float",
        "amplitude": "list_float",
        "modes": "list_int",
        "csv": "str",
    },
    "checks": {
        "names": "list_str",
    },
    "output": {
        "dir": "str",
    },
}

_CHECK_PARAMS = {
    "is_sh": {"per_axis": "int", "box_lo": "list_float", "box_hi": "list_float"},
    "entropy_pair": {"tol": "float", "per_axis": "int"},
    "energy": {},
    "constraints": {"factor": "float", "floor": "float"},
    "support": {"radius": "float", "slope": "float", "tol": "float",
                "margin_cells": "int"},
    "rh": {"u_left": "list_float", "u_right": "list_float", "speed": "float",
           "tol": "float"},
    "riemann": {"u_left": "float", "u_right": "float", "tol": "float"},
    "viscous_limit": {"u_left": "float", "u_right": "float",
                      "eps": "list_float", "t": "float", "slack": "float"},
    "tricomi_certificate": {},
}


class ConfigError(ValueError):
    """Parse or validation failure; ``errors`` lists (line, message)."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"line {ln}: {msg}" for ln, msg in self.errors))


@dataclass
class RunConfig:
    """Validated configuration.  Sections are plain dicts keyed by the
    schema names; check parameters live under checks_params[check]."""

    model: dict
    grid: dict = field(default_factory=dict)
    scheme: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    checks_params: dict = field(default_factory=dict)
    output_dir: str = "out"

    def echo(self) -> dict:
        return {
            "model": self.model,
            "grid": self.grid,
            "scheme": self.scheme,
            "initial": self.initial,
            "checks": self.checks,
            "checks_params": self.checks_params,
            "output_dir": self.output_dir,
        }


def _suggest(word, options):
    match = difflib.get_close_matches(word, options, n=1, cutoff=0.6)
    return f" (did you mean '{match[0]}'?)" if match else ""


def _parse_value(kind, raw, line, errors):
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            value = int(raw)
            return value
        if kind == "str":
            return raw
        if kind == "list_float":
            return [float(v.strip()) for v in raw.split(",") if v.strip() != ""]
        if kind == "list_int":
            return [int(v.strip()) for v in raw.split(",") if v.strip() != ""]
        if kind == "list_str":
            return [v.strip() for v in raw.split(",") if v.strip() != ""]
        if kind.startswith("enum:"):
            options = kind[5:].split(",")
            if raw not in options:
                errors.append((line, f"value '{raw}' not one of {options}"))
                return None
            return raw
    except ValueError:
        errors.append((line, f"cannot parse '{raw}' as {kind}"))
        return None
    raise AssertionError(f"unknown schema kind {kind}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError listing every problem with
    its line number."""
    errors = []
    sections = {name: {} for name in _SCHEMA}
    seen = set()
    current = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                errors.append((lineno, f"unknown section '[{name}]'"
                               + _suggest(name, list(_SCHEMA))))
                current = None
            else:
                current = name
            continue
        if "=" not in line:
            errors.append((lineno, f"expected 'key = value', got '{line}'"))
            continue
        if current is None:
            errors.append((lineno, "key outside any known section"))
            continue
        key, _, raw_value = line.partition("=")
        key = key.strip()
        if (current, key) in seen:
            errors.append((lineno, f"duplicate key '{key}' in [{current}]"))
            continue
        seen.add((current, key))

        if current == "checks" and "." in key:
            check, _, param = key.partition(".")
            if check not in _CHECK_PARAMS:
                errors.append((lineno, f"unknown check '{check}' in key '{key}'"
                               + _suggest(check, list(_CHECK_PARAMS))))
                continue
            if param not in _CHECK_PARAMS[check]:
                errors.append((lineno, f"unknown parameter '{param}' for check "
                               f"'{check}'" + _suggest(param, list(_CHECK_PARAMS[check]))))
                continue
            value = _parse_value(_CHECK_PARAMS[check][param], raw_value, lineno, errors)
            if value is not None:
                sections["checks"].setdefault("_params", {}).setdefault(check, {})[param] = value
            continue

        if key not in _SCHEMA[current]:
            errors.append((lineno, f"unknown key '{key}' in [{current}]"
                           + _suggest(key, list(_SCHEMA[current]))))
            continue
        value = _parse_value(_SCHEMA[current][key], raw_value, lineno, errors)
        if value is not None:
            sections[current][key] = value
            _validate_value(current, key, value, lineno, errors)

    if "name" not in sections["model"]:
        errors.append((0, "missing required key 'name' in [model]"))
    for check in sections["checks"].get("names", []):
        if check not in CHECK_NAMES:
            errors.append((0, f"unknown check '{check}'" + _suggest(check, CHECK_NAMES)))
    for check in sections["checks"].get("_params", {}):
        names = sections["checks"].get("names", [])
        if check not in names:
            errors.append((0, f"parameters given for check '{check}' that is not "
                           "in checks.names"))

    if errors:
        raise ConfigError(sorted(errors))

    return RunConfig(
        model=sections["model"],
        grid=sections["grid"],
        scheme=sections["scheme"],
        initial=sections["initial"],
        checks=sections["checks"].get("names", []),
        checks_params=sections["checks"].get("_params", {}),
        output_dir=sections["output"].get("dir", "out"),
    )


def _validate_value(section, key, value, line, errors):
    if section == "scheme":
        if key == "lambda" and value <= 0:
            errors.append((line, "'lambda' must be positive"))
        if key == "cfl_safety" and not 0 < value <= 1:
            errors.append((line, "'cfl_safety' must lie in (0, 1]"))
        if key == "t_end" and value < 0:
            errors.append((line, "'t_end' must be non-negative"))
        if key == "output_stride" and value < 1:
            errors.append((line, "'output_stride' must be >= 1"))
        if key == "viscosity" and value < 0:
            errors.append((line, "'viscosity' must be non-negative"))
    if section == "grid":
        if key == "h" and value <= 0:
            errors.append((line, "'h' must be positive"))
        if key == "shape" and any(s < 1 for s in value):
            errors.append((line, "'shape' entries must be >= 1"))
    if section == "model":
        if key == "gamma" and value <= 1:
            errors.append((line, "'gamma' must exceed 1"))
        if key == "lam" and value < 0:
            errors.append((line, "'lam' must be non-negative"))
