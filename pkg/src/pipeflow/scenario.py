"""Scenario configuration: INI files describing a complete simulation.

A scenario file has six mandatory sections and an optional output section::

    [mesh]                      [coeffs]              [time]
    x_left = -2.5               a = 0.0               tau = 0.01
    x_right = 2.5               b = 0.0               t_end = 1.0
    n_elems = 500               c = 0.0               snapshot_times = 0.25, 0.5, 1.0
                                d = 0.0
    [eos]                       theta_ext = 1.0       [output]
    kind = ideal_gas                                  directory = out/run
    R = 1.0                     [bc]                  formats = csv
    c_v = 2.5                   mode = closed

    [init]
    rho = 1 if x < 0 else 3
    m = 0
    theta = 1

``kind`` selects ``ideal_gas`` (keys R, c_v) or ``power_law`` (keys
c_gamma, gamma, c_v).  ``mode`` selects ``closed`` or ``in_out`` (keys
m_in, theta_in, m_out).  Initial data are expressions in the position x
using +-*/,**, comparisons, conditional expressions and the math functions
listed in EXPRESSION_NAMES.  Parsing validates every invariant and reports
all violations with their section.key paths; serialization round-trips to
an identical scenario.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, replace

from .assembly import BoundarySpec, PhysCoeffs, State, System
from .eos import GasModel, IdealGas, PowerLawGas
from .mesh import Mesh1D, build_mesh, project_initial

__all__ = [
    "ConfigError",
    "Scenario",
    "MeshSection",
    "TimeSection",
    "InitSection",
    "OutputSection",
    "parse_scenario",
    "parse_scenario_string",
    "serialize_scenario",
    "compile_expression",
    "EXPRESSION_NAMES",
]


class ConfigError(ValueError):
    """Scenario file could not be parsed or violates an invariant."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


EXPRESSION_NAMES = {
    "pi": math.pi,
    "e": math.e,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "tanh": math.tanh,
    "abs": abs,
    "min": min,
    "max": max,
}


def compile_expression(text: str):
    """Compile an initial-data expression into a function of x."""
    code = compile(text, "<init-expression>", "eval")
    unknown = set(code.co_names) - set(EXPRESSION_NAMES) - {"x"}
    if unknown:
        raise ValueError(f"unknown name(s) in expression: {', '.join(sorted(unknown))}")

    def f(x: float) -> float:
        ns = dict(EXPRESSION_NAMES)
        ns["x"] = x
        return float(eval(code, {"__builtins__": {}}, ns))

    return f


@dataclass(frozen=True)
class MeshSection:
    x_left: float
    x_right: float
    n_elems: int


@dataclass(frozen=True)
class TimeSection:
    tau: float
    t_end: float
    snapshot_times: tuple[float, ...] = ()


@dataclass(frozen=True)
class InitSection:
    rho: str
    m: str
    theta: str


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv",)


@dataclass(frozen=True)
class Scenario:
    """A validated simulation setup."""

    mesh: MeshSection
    eos: GasModel
    coeffs: PhysCoeffs
    bc: BoundarySpec
    init: InitSection
    time: TimeSection
    output: OutputSection = OutputSection()

    def build_mesh(self) -> Mesh1D:
        return build_mesh(self.mesh.x_left, self.mesh.x_right, self.mesh.n_elems)

    def build_system(self, n_quad: int = 3) -> System:
        return System(self.build_mesh(), self.eos, self.coeffs, self.bc, n_quad=n_quad)

    def initial_state(self) -> State:
        """Project the initial data; prescribed boundary dofs applied."""
        mesh = self.build_mesh()
        state = State(
            rho_hat=project_initial(compile_expression(self.init.rho), mesh, "Q"),
            m_hat=project_initial(compile_expression(self.init.m), mesh, "V"),
            theta_hat=project_initial(compile_expression(self.init.theta), mesh, "W"),
            t=0.0,
        )
        return self.bc.apply(state)

    def with_overrides(self, tau=None, n_elems=None, t_end=None, out_dir=None) -> "Scenario":
        """Copy with command-line style overrides applied."""
        s = self
        if n_elems is not None:
            s = replace(s, mesh=replace(s.mesh, n_elems=int(n_elems)))
        if tau is not None or t_end is not None:
            tsec = s.time
            if tau is not None:
                tsec = replace(tsec, tau=float(tau))
            if t_end is not None:
                new_end = float(t_end)
                keep = tuple(t for t in tsec.snapshot_times if t <= new_end)
                tsec = replace(tsec, t_end=new_end, snapshot_times=keep)
            s = replace(s, time=tsec)
        if out_dir is not None:
            s = replace(s, output=replace(s.output, directory=str(out_dir)))
        return _validated(s)


def _validated(scenario: Scenario) -> Scenario:
    problems = []
    m = scenario.mesh
    if not m.x_left < m.x_right:
        problems.append("mesh.x_left/x_right: interval is empty or inverted")
    if m.n_elems < 2:
        problems.append("mesh.n_elems: need at least 2 elements")
    t = scenario.time
    if t.tau <= 0.0:
        problems.append("time.tau: must be positive")
    if t.t_end < 0.0:
        problems.append("time.t_end: must be non-negative")
    for st in t.snapshot_times:
        if not (0.0 <= st <= t.t_end):
            problems.append(f"time.snapshot_times: {st} outside [0, t_end]")
    # initial data must evaluate on the domain and be positive where required
    if not problems:
        mesh = scenario.build_mesh()
        for key, expr, positive in (
            ("rho", scenario.init.rho, True),
            ("m", scenario.init.m, False),
            ("theta", scenario.init.theta, True),
        ):
            try:
                f = compile_expression(expr)
                samples = [f(x) for x in mesh.midpoints] + [f(x) for x in mesh.nodes]
            except Exception as exc:
                problems.append(f"init.{key}: not evaluable on the domain ({exc})")
                continue
            if positive and min(samples) <= 0.0:
                problems.append(f"init.{key}: must be strictly positive on the domain")
    if problems:
        raise ConfigError(problems)
    return scenario


_EOS_KINDS = {"ideal_gas": IdealGas, "power_law": PowerLawGas}


def _canonical_kind(raw: str) -> str:
    return raw.strip().lower().replace("-", "_").replace(" ", "_")


def _parse(cp: configparser.ConfigParser, origin: str) -> Scenario:
    problems = []

    def get(section, key, conv, default=None, required=True):
        try:
            raw = cp.get(section, key)
        except (configparser.NoSectionError, configparser.NoOptionError):
            if default is not None or not required:
                return default
            problems.append(f"{section}.{key}: missing")
            return None
        try:
            return conv(raw)
        except Exception as exc:
            problems.append(f"{section}.{key}: {exc}")
            return None

    def floats(raw):
        parts = [p for p in raw.replace(",", " ").split() if p]
        return tuple(float(p) for p in parts)

    def coalesce(value, fallback):
        return value if value is not None else fallback

    mesh = MeshSection(
        x_left=coalesce(get("mesh", "x_left", float), 0.0),
        x_right=coalesce(get("mesh", "x_right", float), 0.0),
        n_elems=coalesce(get("mesh", "n_elems", int), 0),
    )

    kind = _canonical_kind(get("eos", "kind", str, default="ideal_gas"))
    kind = {"ideal": "ideal_gas", "idealgas": "ideal_gas", "powerlaw": "power_law"}.get(
        kind, kind
    )
    model = None
    if kind == "ideal_gas":
        R = get("eos", "R", float)
        c_v = get("eos", "c_v", float)
        if R is not None and c_v is not None:
            try:
                model = IdealGas(R=R, c_v=c_v)
            except ValueError as exc:
                problems.append(f"eos: {exc}")
    elif kind == "power_law":
        c_gamma = get("eos", "c_gamma", float)
        gamma = get("eos", "gamma", float)
        c_v = get("eos", "c_v", float, default=1.0)
        if c_gamma is not None and gamma is not None:
            try:
                model = PowerLawGas(c_gamma=c_gamma, gamma=gamma, c_v_coeffs=(c_v,))
            except ValueError as exc:
                problems.append(f"eos: {exc}")
    else:
        problems.append(f"eos.kind: unknown kind {kind!r}")

    coeffs = None
    try:
        coeffs = PhysCoeffs(
            a=get("coeffs", "a", float, default=0.0),
            b=get("coeffs", "b", float, default=0.0),
            c=get("coeffs", "c", float, default=0.0),
            d=get("coeffs", "d", float, default=0.0),
            theta_ext=get("coeffs", "theta_ext", float, default=1.0),
        )
    except (TypeError, ValueError) as exc:
        problems.append(f"coeffs: {exc}")

    bc = None
    mode = _canonical_kind(get("bc", "mode", str, default="closed"))
    mode = {"inout": "in_out"}.get(mode, mode)
    try:
        if mode == "closed":
            bc = BoundarySpec()
        elif mode == "in_out":
            bc = BoundarySpec(
                mode="in_out",
                m_in=get("bc", "m_in", float),
                theta_in=get("bc", "theta_in", float),
                m_out=get("bc", "m_out", float),
            )
        else:
            problems.append(f"bc.mode: unknown mode {mode!r}")
    except ValueError as exc:
        problems.append(f"bc: {exc}")

    init = InitSection(
        rho=get("init", "rho", str, default="1"),
        m=get("init", "m", str, default="0"),
        theta=get("init", "theta", str, default="1"),
    )

    time = TimeSection(
        tau=coalesce(get("time", "tau", float), 0.0),
        t_end=get("time", "t_end", float, default=0.0),
        snapshot_times=get("time", "snapshot_times", floats, default=()),
    )

    output = OutputSection(
        directory=get("output", "directory", str, default="out", required=False),
        formats=get(
            "output",
            "formats",
            lambda raw: tuple(p.strip() for p in raw.split(",") if p.strip()),
            default=("csv",),
            required=False,
        ),
    )

    if problems:
        raise ConfigError([f"{origin}: {p}" for p in problems])
    try:
        return _validated(
            Scenario(mesh=mesh, eos=model, coeffs=coeffs, bc=bc, init=init, time=time, output=output)
        )
    except ConfigError as exc:
        raise ConfigError([f"{origin}: {p}" for p in exc.problems]) from None


def _make_parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (R vs r)
    return cp


def parse_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    cp = _make_parser()
    try:
        with open(path) as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError([f"{path}: {exc}"]) from None
    except configparser.Error as exc:
        raise ConfigError([f"{path}: {exc}"]) from None
    return _parse(cp, str(path))


def parse_scenario_string(text: str, origin: str = "<string>") -> Scenario:
    cp = _make_parser()
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError([f"{origin}: {exc}"]) from None
    return _parse(cp, origin)


def serialize_scenario(scenario: Scenario) -> str:
    """Render a scenario back to config text (round-trips through parse)."""
    cp = _make_parser()
    cp["mesh"] = {
        "x_left": repr(scenario.mesh.x_left),
        "x_right": repr(scenario.mesh.x_right),
        "n_elems": str(scenario.mesh.n_elems),
    }
    model = scenario.eos
    if isinstance(model, IdealGas):
        cp["eos"] = {"kind": "ideal_gas", "R": repr(model.R), "c_v": repr(model.c_v)}
    elif isinstance(model, PowerLawGas):
        cp["eos"] = {
            "kind": "power_law",
            "c_gamma": repr(model.c_gamma),
            "gamma": repr(model.gamma),
            "c_v": repr(model.c_v_coeffs[0]),
        }
    else:  # pragma: no cover
        raise ValueError(f"cannot serialize model {model!r}")
    c = scenario.coeffs
    cp["coeffs"] = {
        "a": repr(c.a),
        "b": repr(c.b),
        "c": repr(c.c),
        "d": repr(c.d),
        "theta_ext": repr(c.theta_ext),
    }
    if scenario.bc.is_open:
        cp["bc"] = {
            "mode": "in_out",
            "m_in": repr(scenario.bc.m_in),
            "theta_in": repr(scenario.bc.theta_in),
            "m_out": repr(scenario.bc.m_out),
        }
    else:
        cp["bc"] = {"mode": "closed"}
    cp["init"] = {
        "rho": scenario.init.rho,
        "m": scenario.init.m,
        "theta": scenario.init.theta,
    }
    cp["time"] = {
        "tau": repr(scenario.time.tau),
        "t_end": repr(scenario.time.t_end),
    }
    if scenario.time.snapshot_times:
        cp["time"]["snapshot_times"] = ", ".join(
            repr(t) for t in scenario.time.snapshot_times
        )
    cp["output"] = {
        "directory": scenario.output.directory,
        "formats": ", ".join(scenario.output.formats),
    }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
