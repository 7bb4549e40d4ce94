"""Run configuration: a flat INI-style key/value format.

Example::

    [run]
    command = venus

    [model]
    N = 6
    gamma = 0.7
    h = 0.8
    boundary = periodic

    [disorder]
    variant = both
    lam = 0.0
    mu = -1.125

    [grid]
    axis1 = lam
    axis1_min = 0.6
    axis1_max = 0.9
    axis1_steps = 31

Text after ``#`` or ``;`` (at line start or after whitespace) is a comment. Every key has a default
except ``model.N``; unknown sections or keys are errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace

from .model import Boundary, Disorder, DisorderCase, ModelParams
from .quench import QuenchSettings
from .scan import Axis

FORMAT_VERSION = "1"
COMMANDS = ("single", "scan2d", "scan1d", "venus", "hc")


class ConfigError(ValueError):
    def __init__(self, message, key=None, line=None):
        where = []
        if key:
            where.append(f"key '{key}'")
        if line:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class VenusOptions:
    eps_abs: float = 1e-4
    k: float = 2.0


@dataclass(frozen=True)
class CriticalFieldOptions:
    h_low: float = 0.3
    h_high: float = 0.8
    tol: float = 0.05
    delta_mean: float | None = None
    observable: str = "ggm"
    coupling_sigma: float | None = None


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: ModelParams
    disorder: DisorderCase
    quench: QuenchSettings = QuenchSettings()
    axis1: Axis | None = None
    axis2: Axis | None = None
    venus: VenusOptions = VenusOptions()
    hc: CriticalFieldOptions = CriticalFieldOptions()
    site: int | None = None
    pair: tuple | None = None
    output: str = "results"
    format_version: str = FORMAT_VERSION

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}",
                              "run.command")
        if self.command in ("scan2d", "scan1d", "venus", "hc") and self.axis1 is None:
            raise ConfigError(f"command {self.command} needs a [grid] axis1", "grid.axis1")
        if self.command == "scan2d" and self.axis2 is None:
            raise ConfigError("scan2d needs a [grid] axis2", "grid.axis2")
        if self.command in ("scan1d", "venus", "hc") and self.axis1.name != "lam":
            raise ConfigError("line scans sweep alpha, so axis1 must be 'lam'", "grid.axis1")
        if self.quench.convergence_window > self.quench.realizations:
            raise ConfigError("convergence_window exceeds realizations",
                              "quench.convergence_window")

    def with_overrides(self, seed=None, realizations=None, workers=None, output=None):
        q = self.quench
        changes = {}
        if seed is not None:
            changes["master_seed"] = int(seed)
        if realizations is not None:
            changes["realizations"] = int(realizations)
            if q.convergence_window > int(realizations):
                changes["convergence_window"] = int(realizations)
        if workers is not None:
            changes["workers"] = int(workers)
        out = replace(self, quench=replace(q, **changes)) if changes else self
        return replace(out, output=output) if output is not None else out

    def to_text(self) -> str:
        """Canonical config text; ``parse_config(cfg.to_text()) == cfg``."""
        return "".join(f"[{sec}]\n" + "".join(f"{k} = {v}\n" for k, v in items) + "\n"
                       for sec, items in self.sections().items())

    def sections(self) -> dict:
        m, d, q = self.model, self.disorder, self.quench
        out = {
            "run": [("command", self.command), ("format_version", self.format_version),
                    ("output", self.output)],
            "model": [("N", m.N), ("gamma", _num(m.gamma)), ("h", _num(m.h)),
                      ("boundary", m.boundary.value)],
            "disorder": [("variant", d.variant.value), ("lam", _num(d.lam)), ("mu", _num(d.mu)),
                         ("sigma_J", _num(d.sigma_J)), ("sigma_delta", _num(d.sigma_delta))],
            "quench": [(f.name, _num(getattr(q, f.name))) for f in fields(QuenchSettings)],
        }
        grid = []
        for n, ax in ((1, self.axis1), (2, self.axis2)):
            if ax is not None:
                grid += [(f"axis{n}", ax.name), (f"axis{n}_min", _num(ax.min)),
                         (f"axis{n}_max", _num(ax.max)), (f"axis{n}_steps", ax.steps)]
        if grid:
            out["grid"] = grid
        out["venus"] = [("eps_abs", _num(self.venus.eps_abs)), ("k", _num(self.venus.k))]
        hc = [("h_low", _num(self.hc.h_low)), ("h_high", _num(self.hc.h_high)),
              ("tol", _num(self.hc.tol)), ("observable", self.hc.observable)]
        if self.hc.delta_mean is not None:
            hc.append(("delta_mean", _num(self.hc.delta_mean)))
        if self.hc.coupling_sigma is not None:
            hc.append(("coupling_sigma", _num(self.hc.coupling_sigma)))
        out["hc"] = hc
        obs = []
        if self.site is not None:
            obs.append(("site", self.site))
        if self.pair is not None:
            obs.append(("pair", f"{self.pair[0]},{self.pair[1]}"))
        if obs:
            out["observables"] = obs
        return out


def _num(x):
    return repr(float(x)) if isinstance(x, float) else str(x)


_SCHEMA = {
    "run": {"command": str, "format_version": str, "output": str},
    "model": {"N": int, "gamma": float, "h": float, "boundary": str},
    "disorder": {"variant": str, "lam": float, "mu": float, "sigma_J": float,
                 "sigma_delta": float},
    "quench": {f.name: (int if f.type in ("int", int) else float) for f in fields(QuenchSettings)},
    "grid": {"axis1": str, "axis1_min": float, "axis1_max": float, "axis1_steps": int,
             "axis2": str, "axis2_min": float, "axis2_max": float, "axis2_steps": int},
    "venus": {"eps_abs": float, "k": float},
    "hc": {"h_low": float, "h_high": float, "tol": float, "delta_mean": float,
           "observable": str, "coupling_sigma": float},
    "observables": {"site": int, "pair": str},
}


def _read(text):
    values = {}
    lines = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = re.split(r"\s[#;]", raw, maxsplit=1)[0].strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", line=n)
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line=n)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=n)
        if section is None:
            raise ConfigError("key outside of any section", line=n)
        key, val = (s.strip() for s in line.split("=", 1))
        full = f"{section}.{key}"
        if key not in _SCHEMA[section]:
            raise ConfigError("unknown key", full, n)
        if full in values:
            raise ConfigError("duplicate key", full, n)
        try:
            values[full] = _SCHEMA[section][key](val)
        except ValueError:
            raise ConfigError(f"cannot parse {val!r} as {_SCHEMA[section][key].__name__}",
                              full, n) from None
        lines[full] = n
    return values, lines


def parse_config(text: str) -> RunConfig:
    values, lines = _read(text)

    def get(key, default=None):
        return values.get(key, default)

    def build(key, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except ValueError as err:
            raise ConfigError(str(err), key, lines.get(key)) from None

    if "model.N" not in values:
        raise ConfigError("missing required key", "model.N")
    model = build("model.N", lambda: ModelParams(
        get("model.N"), get("model.gamma", 0.7), get("model.h", 0.8),
        Boundary(get("model.boundary", "periodic"))))
    disorder = build("disorder.variant", lambda: DisorderCase(
        Disorder(get("disorder.variant", "ordered")), get("disorder.lam", 0.0),
        get("disorder.mu", 0.0), get("disorder.sigma_J", 1.0), get("disorder.sigma_delta", 1.0)))
    qdefaults = QuenchSettings()
    quench = build("quench.realizations", lambda: QuenchSettings(**{
        f.name: get(f"quench.{f.name}", getattr(qdefaults, f.name))
        for f in fields(QuenchSettings)}))
    axes = []
    for n in (1, 2):
        if f"grid.axis{n}" in values:
            axes.append(build(f"grid.axis{n}_steps", lambda n=n: Axis(
                get(f"grid.axis{n}"), get(f"grid.axis{n}_min", -2.0),
                get(f"grid.axis{n}_max", 2.0), get(f"grid.axis{n}_steps", 41))))
        else:
            axes.append(None)
    venus = VenusOptions(get("venus.eps_abs", 1e-4), get("venus.k", 2.0))
    hc = CriticalFieldOptions(get("hc.h_low", 0.3), get("hc.h_high", 0.8),
                              get("hc.tol", 0.05), get("hc.delta_mean"),
                              get("hc.observable", "ggm"), get("hc.coupling_sigma"))
    pair = get("observables.pair")
    if pair is not None:
        try:
            pair = tuple(int(p) for p in pair.split(","))
            assert len(pair) == 2
        except (ValueError, AssertionError):
            raise ConfigError("pair must be 'i,j'", "observables.pair",
                              lines.get("observables.pair")) from None
    return build("run.command", lambda: RunConfig(
        command=get("run.command", "single"), model=model, disorder=disorder, quench=quench,
        axis1=axes[0], axis2=axes[1], venus=venus, hc=hc, site=get("observables.site"),
        pair=pair, output=get("run.output", "results"),
        format_version=get("run.format_version", FORMAT_VERSION)))
