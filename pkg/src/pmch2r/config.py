"""Run configuration shared by the command line and the figure recipes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

from .core import PrescribedFunction
from .integrator import IntegratorConfig

_INTEGRATOR_FIELDS = {f.name for f in fields(IntegratorConfig)}


def canonical_json(obj) -> str:
    """Sorted keys and fixed separators, so equal configs serialise to equal bytes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs to reproduce its output.

    ``integrator`` holds only the overrides of :class:`IntegratorConfig`
    defaults; ``start`` is ``{"axis": delta}``, ``{"point": [x, y, eps]}`` or
    ``{"equilibrium": eps}``; ``extra`` carries command-specific settings.
    """

    function: dict
    integrator: dict = field(default_factory=dict)
    start: dict | None = None
    direction: int | None = None
    out: str | None = None
    format: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        PrescribedFunction.from_dict(self.function)  # validates
        unknown = set(self.integrator) - _INTEGRATOR_FIELDS
        if unknown:
            raise ValueError(f"unknown integrator settings: {sorted(unknown)}")
        # normalise numbers so that 1 and 1.0 serialise identically
        object.__setattr__(self, "function", PrescribedFunction.from_dict(self.function).to_dict())
        object.__setattr__(self, "integrator", {k: (float(v) if isinstance(v, (int, float))
                                                    and not isinstance(v, bool) and k != "lyapunov_window"
                                                    else v) for k, v in self.integrator.items()})

    @property
    def prescribed(self) -> PrescribedFunction:
        return PrescribedFunction.from_dict(self.function)

    @property
    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig().with_(**self.integrator)

    def to_dict(self) -> dict:
        d = {"function": self.function, "integrator": dict(self.integrator)}
        for k in ("start", "direction", "out", "format"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        if self.extra:
            d["extra"] = self.extra
        return d

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        allowed = {"function", "integrator", "start", "direction", "out", "format", "extra"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "function" not in d:
            raise ValueError("config needs a 'function' entry")
        return cls(d["function"], dict(d.get("integrator", {})), d.get("start"), d.get("direction"),
                   d.get("out"), d.get("format"), dict(d.get("extra", {})))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid JSON config: {exc}") from exc
        if not isinstance(d, dict):
            raise ValueError("config must be a JSON object")
        return cls.from_dict(d)
