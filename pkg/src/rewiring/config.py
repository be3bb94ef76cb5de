"""Key-value run configuration with sections.

Example::

    [run]
    mode = discrete
    seed = 7
    n = 20
    steps = 1000

    [kernel]
    type = er            # er | mixed | reversible
    p0 = 0.2
    p1 = 0.5

    [global.1]
    lambda = 1.0
    p0 = 0.3
    p1 = 0.7

    [local]
    c0 = 1
    c1 = 2

Comments start with ``#`` or ``;``.  Every error names the offending line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Union

from .measures import BetaMixedKernelParams, GlobalAtom, IidEdgeLimit, RewiringMeasureSpec, reversible_kernel

MODES = ("discrete", "ctmc", "densities", "verify")
KERNEL_KEYS = {
    "er": {"p0", "p1"},
    "mixed": {"a0", "b0", "a1", "b1"},
    "reversible": {"alpha", "beta", "alpha_prime"},
}
RUN_KEYS = {
    "mode": str,
    "seed": int,
    "n": int,
    "steps": int,
    "horizon": float,
    "out": str,
    "initial": str,
    "snapshot_every": float,
    "motif_order": int,
    "samples": int,
    "suite": str,
    "graph": str,
    "record_maps": bool,
}

_SECTION = re.compile(r"^\[([A-Za-z_][\w.]*)\]$")


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        self.line = line
        if source is None:
            where = ""
        else:
            where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass
class RunConfig:
    mode: Optional[str] = None
    seed: int = 0
    n: Optional[int] = None
    steps: Optional[int] = None
    horizon: Optional[float] = None
    out: str = "out"
    initial: str = "empty"
    snapshot_every: Optional[float] = None
    motif_order: int = 2
    samples: int = 100_000
    suite: str = "default"
    graph: Optional[str] = None
    record_maps: bool = False
    kernel: Optional[Union[IidEdgeLimit, BetaMixedKernelParams]] = None
    spec: Optional[RewiringMeasureSpec] = None

    def with_overrides(self, **flags: Any) -> "RunConfig":
        """Flags win over file values; ``None`` means not given."""
        given = {k: v for k, v in flags.items() if v is not None}
        return replace(self, **given)

    def validate(self, mode: Optional[str] = None) -> "RunConfig":
        mode = mode or self.mode
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if mode in ("discrete", "ctmc", "densities") and self.graph is None:
            if self.n is None or self.n < 1:
                raise ConfigError(f"mode {mode} needs a positive n")
        if mode == "discrete":
            if self.kernel is None:
                raise ConfigError("mode discrete needs a [kernel] section")
            if self.steps is None or self.steps < 0:
                raise ConfigError("mode discrete needs steps >= 0")
        if mode == "ctmc":
            if self.spec is None:
                raise ConfigError("mode ctmc needs [global.k] and/or [local] sections")
            if self.horizon is None or self.horizon < 0:
                raise ConfigError("mode ctmc needs horizon >= 0")
            if self.snapshot_every is not None and self.snapshot_every <= 0:
                raise ConfigError("snapshot_every must be positive")
        if mode == "densities" and self.graph is None and not isinstance(self.kernel, IidEdgeLimit):
            raise ConfigError("mode densities needs a graph path or an er [kernel] to sample from")
        if self.motif_order < 1:
            raise ConfigError("motif_order must be positive")
        return replace(self, mode=mode)


def _parse_number(text: str, kind, line: int, source: str):
    try:
        if kind is int:
            return int(text)
        if kind is bool:
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if kind is float:
            return float(Fraction(text))
        return text
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse {text!r} as {kind.__name__}", line, source) from None


def _prob(sec: dict, key: str, source: str) -> float:
    text, line = sec[key]
    value = _parse_number(text, float, line, source)
    if not 0 <= value <= 1:
        raise ConfigError(f"{key}={text} is not a probability", line, source)
    return value


def _positive(sec: dict, key: str, source: str, allow_zero: bool = False) -> float:
    text, line = sec[key]
    value = _parse_number(text, float, line, source)
    if value < 0 or (value == 0 and not allow_zero):
        raise ConfigError(f"{key}={text} must be {'nonnegative' if allow_zero else 'positive'}", line, source)
    return value


def _require(sec: dict, keys: set, name: str, header_line: int, source: str) -> None:
    missing = sorted(keys - set(sec))
    if missing:
        raise ConfigError(f"[{name}] missing {', '.join(missing)}", header_line, source)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    headers: dict[str, int] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = re.split(r"[#;]", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = m.group(1)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", lineno, source)
            if not (current in ("run", "kernel", "local") or re.fullmatch(r"global\.\d+", current)):
                raise ConfigError(f"unknown section [{current}]", lineno, source)
            sections[current] = {}
            headers[current] = lineno
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value' or '[section]'", lineno, source)
        if current is None:
            raise ConfigError("key outside any section", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError("empty key or value", lineno, source)
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in [{current}]", lineno, source)
        sections[current][key] = (value, lineno)

    cfg = RunConfig()
    for key, (value, lineno) in sections.get("run", {}).items():
        if key not in RUN_KEYS:
            raise ConfigError(f"unknown key {key!r} in [run]", lineno, source)
        setattr(cfg, key, _parse_number(value, RUN_KEYS[key], lineno, source))

    if "kernel" in sections:
        sec = dict(sections["kernel"])
        if "type" not in sec:
            raise ConfigError("[kernel] needs type = er | mixed | reversible", headers["kernel"], source)
        ktype, tline = sec.pop("type")
        if ktype not in KERNEL_KEYS:
            raise ConfigError(f"unknown kernel type {ktype!r}", tline, source)
        for key, (_, lineno) in sec.items():
            if key not in KERNEL_KEYS[ktype]:
                raise ConfigError(f"unknown key {key!r} for kernel type {ktype}", lineno, source)
        if ktype == "er":
            _require(sec, {"p0", "p1"}, "kernel", headers["kernel"], source)
            cfg.kernel = IidEdgeLimit(_prob(sec, "p0", source), _prob(sec, "p1", source))
        elif ktype == "mixed":
            _require(sec, KERNEL_KEYS["mixed"], "kernel", headers["kernel"], source)
            cfg.kernel = BetaMixedKernelParams(*(_positive(sec, k, source) for k in ("a0", "b0", "a1", "b1")))
        else:
            _require(sec, {"alpha", "beta"}, "kernel", headers["kernel"], source)
            alpha_prime = _positive(sec, "alpha_prime", source) if "alpha_prime" in sec else None
            cfg.kernel = reversible_kernel(_positive(sec, "alpha", source), _positive(sec, "beta", source), alpha_prime)

    atoms = []
    for name in sorted((s for s in sections if s.startswith("global.")), key=lambda s: int(s.split(".")[1])):
        sec = sections[name]
        for key, (_, lineno) in sec.items():
            if key not in ("lambda", "p0", "p1"):
                raise ConfigError(f"unknown key {key!r} in [{name}]", lineno, source)
        _require(sec, {"lambda", "p0", "p1"}, name, headers[name], source)
        lim = IidEdgeLimit(_prob(sec, "p0", source), _prob(sec, "p1", source))
        if lim.identity_cell_prob == 1:
            raise ConfigError(f"[{name}] (p0, p1) = (0, 1) is the identity map; no events", headers[name], source)
        atoms.append(GlobalAtom(_positive(sec, "lambda", source), lim))
    c0 = c1 = 0.0
    if "local" in sections:
        sec = sections["local"]
        for key, (_, lineno) in sec.items():
            if key not in ("c0", "c1"):
                raise ConfigError(f"unknown key {key!r} in [local]", lineno, source)
        c0 = _positive(sec, "c0", source, allow_zero=True) if "c0" in sec else 0.0
        c1 = _positive(sec, "c1", source, allow_zero=True) if "c1" in sec else 0.0
    if atoms or "local" in sections:
        cfg.spec = RewiringMeasureSpec(tuple(atoms), c0, c1)
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", source=str(p)) from None
    return parse_config(text, source=str(p))
