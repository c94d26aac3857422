"""Scenario configuration: a versioned JSON document, validated field by field.

Angles and frequencies may be written either as plain numbers or as strings
of the form "<number>pi" (for example "4pi" or "0.5pi"), which are expanded
exactly in double precision.
"""

import json
import math
import re
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from ..geom3 import as_mat3, as_vec3, so3_defect
from ..odeint import IntegratorSettings
from ..seek3d import SeekParams, SignalField, signal_field

SCHEMA_VERSION = 1
REPRESENTATIONS = ("full", "transformed", "rora")

_PI_PATTERN = re.compile(r"^\s*([+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)\s*pi\s*$")


class ConfigError(ValueError):
    """Invalid scenario configuration; the message lists every bad field."""


def parse_pi_value(value, where: str = "value") -> float:
    """Accept a number, or a '<number>pi' string expanded as number * pi."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        m = _PI_PATTERN.match(value)
        if m:
            return float(m.group(1)) * math.pi
        raise ConfigError(f"{where}: cannot parse {value!r}; expected a number or 'Npi'")
    raise ConfigError(f"{where}: expected a number or 'Npi' string, got {type(value).__name__}")


@dataclass(frozen=True)
class Scenario:
    """A complete experiment description for the scenario runner."""

    name: str
    params: SeekParams
    field: SignalField
    field_spec: dict
    p0: np.ndarray
    R0: np.ndarray
    z0: object  # float or the string "slow-manifold"
    t_final: float
    integrator: IntegratorSettings = IntegratorSettings()
    representations: tuple = REPRESENTATIONS

    def initial_z(self, t0: float = 0.0) -> float:
        if self.z0 == "slow-manifold":
            return self.field.strength(self.p0, t0)
        return float(self.z0)

    @property
    def sample_dt(self) -> float:
        """Shared sampling interval for every representation of this scenario."""
        spp = self.integrator.steps_per_period
        stride = self.integrator.sample_stride
        return stride * self.params.tau_period / self.params.omega / spp


def _collect(errors, where, fn):
    try:
        return fn()
    except ConfigError as exc:
        errors.append(str(exc))
    except (TypeError, ValueError) as exc:
        errors.append(f"{where}: {exc}")
    return None


def scenario_from_dict(doc: dict, name_default: str = "scenario") -> Scenario:
    """Validate a parsed configuration document into a Scenario.

    Raises ConfigError whose message contains one line per offending field.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    errors = []
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        errors.append(
            f"schema_version: expected {SCHEMA_VERSION}, got {version!r}"
        )

    name = doc.get("name", name_default)
    if not isinstance(name, str) or not name:
        errors.append("name: must be a non-empty string")
        name = name_default

    pd = doc.get("params")
    params = None
    if not isinstance(pd, dict):
        errors.append("params: missing or not an object")
    else:
        alpha = _collect(errors, "params.alpha", lambda: float(pd.get("alpha")))
        omega = _collect(
            errors, "params.omega", lambda: parse_pi_value(pd.get("omega"), "params.omega")
        )
        mu = _collect(errors, "params.mu", lambda: float(pd.get("mu")))
        if None not in (alpha, omega, mu):
            params = _collect(errors, "params", lambda: SeekParams(alpha, omega, mu))

    fd = doc.get("field", {"kind": "static"})
    fld = None
    spec = dict(fd) if isinstance(fd, dict) else {}
    if not isinstance(fd, dict) or "kind" not in fd:
        errors.append("field: must be an object with a 'kind' key")
    else:
        fld = _collect(errors, "field", lambda: signal_field(**fd))

    p0 = _collect(errors, "p0", lambda: as_vec3(doc.get("p0")))
    r0_doc = doc.get("R0", np.eye(3).tolist())
    R0 = _collect(errors, "R0", lambda: as_mat3(r0_doc))
    if R0 is not None and so3_defect(R0) > 0.5:
        errors.append("R0: not within projection tolerance of a rotation matrix")

    z0 = doc.get("z0", "slow-manifold")
    if z0 != "slow-manifold":
        z0 = _collect(errors, "z0", lambda: float(z0))

    t_final = _collect(errors, "t_final", lambda: float(doc.get("t_final")))
    if t_final is not None and t_final <= 0:
        errors.append("t_final: must be positive")

    idoc = doc.get("integrator", {})
    integrator = None
    if not isinstance(idoc, dict):
        errors.append("integrator: must be an object")
    else:
        integrator = _collect(
            errors,
            "integrator",
            lambda: IntegratorSettings(
                steps_per_period=int(idoc.get("steps_per_period", 64)),
                projection=bool(idoc.get("projection", True)),
                sample_stride=int(idoc.get("sample_stride", 1)),
            ),
        )

    reps = doc.get("representations", list(REPRESENTATIONS))
    if (
        not isinstance(reps, (list, tuple))
        or not reps
        or any(r not in REPRESENTATIONS for r in reps)
    ):
        errors.append(
            f"representations: must be a non-empty subset of {list(REPRESENTATIONS)}"
        )
        reps = REPRESENTATIONS

    unknown = set(doc) - {
        "schema_version", "name", "params", "field", "p0", "R0", "z0",
        "t_final", "integrator", "representations",
    }
    if unknown:
        errors.append(f"unknown keys: {sorted(unknown)}")

    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    return Scenario(
        name=name,
        params=params,
        field=fld,
        field_spec=spec,
        p0=p0,
        R0=R0,
        z0=z0,
        t_final=t_final,
        integrator=integrator,
        representations=tuple(reps),
    )


def load_config(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)
