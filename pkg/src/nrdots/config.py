"""Run configuration: INI parsing, auto-mode resolution and a reproducible text form.

Sections are ``[model]``, ``[leads]``, ``[phonon]``, ``[sweep]``,
``[quadrature]`` and ``[output]``; custom circuits add ``[dot:<label>]``
sections and a ``[couplings]`` section with keys ``<a>,<b>``.
"""

from __future__ import annotations

import configparser
import math
import re
import sys
from dataclasses import dataclass, field, replace

from .circuit import (
    AUXILIARY,
    PRIMARY,
    CircuitSpec,
    DotSpec,
    FourDotParams,
    ThreeDotParams,
    validate_circuit,
)
from .quadrature import QuadratureConfig
from .scattering import (
    directional_coupling,
    directional_phase,
    matched_gamma_four_dot,
    matched_gamma_three_dot,
)

MODEL_KINDS = ("three_dot", "four_dot", "custom")
SWEEP_KINDS = ("omega", "g_ratio", "voltage", "nu")
DEFAULT_AUX_MU = {"three_dot": {"a": -50.0}, "four_dot": {"u": -60.0, "d": -60.0}}
DEFAULT_TEMPERATURE = {"three_dot": 0.5, "four_dot": 1.0, "custom": 0.5}

_ALLOWED = {
    "model": {
        "kind", "eps_d", "lambda", "lambda1", "lambda2", "kappa", "delta", "delta1", "delta2",
        "eps_aux", "g_mode", "g_abs", "g_phase", "phi", "gamma_mode", "gamma", "reverse",
        "transport", "scatter",
    },
    "leads": {"temperature", "mu_a", "mu_u", "mu_d"},
    "phonon": {"nu", "omega_c", "onsite"},
    "sweep": {"kind", "start", "stop", "points", "bias"},
    "quadrature": {"rel_tol", "abs_tol", "window_pad_T", "window_pad_G", "max_subdivisions"},
    "output": {"path"},
}
_DOT_KEYS = {"role", "onsite", "damping"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    kind: str
    eps_d: float = 1.0
    lam: float = 0.0
    lam1: float = 0.0
    lam2: float = 0.0
    kappa: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0
    eps_aux: float = 0.0
    gamma: float = 1.0
    g: complex | None = None  # three-dot direct coupling
    phi: float | None = None  # four-dot loop phase
    reverse: bool = False
    transport: str = "giom"
    scatter: str = "closed_form"
    circuit: CircuitSpec | None = None

    def three_dot(self) -> ThreeDotParams:
        return ThreeDotParams(self.eps_d, self.lam, self.kappa, self.gamma, self.g, self.eps_aux)

    def four_dot(self) -> FourDotParams:
        return FourDotParams(
            self.eps_d, self.lam1, self.lam2, self.delta1, self.delta2, self.kappa, self.gamma, self.phi
        )

    def spec(self) -> CircuitSpec:
        if self.kind == "three_dot":
            return self.three_dot().spec()
        if self.kind == "four_dot":
            return self.four_dot().spec()
        return self.circuit


@dataclass(frozen=True)
class LeadsConfig:
    temperature: float
    aux_mu: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class PhononConfig:
    nu: float
    omega_c: float
    onsite: str = "renormalized"  # how eps_d is read


@dataclass(frozen=True)
class SweepConfig:
    kind: str
    start: float
    stop: float
    points: int
    bias: float = 20.0

    def grid(self):
        import numpy as np

        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig
    leads: LeadsConfig
    phonon: PhononConfig | None = None
    sweep: SweepConfig | None = None
    quadrature: QuadratureConfig = QuadratureConfig()
    output: str | None = None
    notes: tuple[str, ...] = ()


class _Source:
    """Line lookup for error messages."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line(self, section: str, key: str | None = None) -> int | None:
        current = None
        for n, raw in enumerate(self.lines, 1):
            s = raw.strip()
            m = re.match(r"^\[(.+)\]$", s)
            if m:
                current = m.group(1).strip()
                if key is None and current == section:
                    return n
                continue
            if current == section and key is not None and "=" in s:
                if s.split("=", 1)[0].strip() == key:
                    return n
        return None

    def error(self, section: str, key: str | None, msg: str) -> ConfigError:
        path = section if key is None else f"{section}.{key}"
        n = self.line(section, key)
        where = f" (line {n})" if n else ""
        return ConfigError(f"{path}{where}: {msg}")


def _reader(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return cp


def _float(cp, src, section, key, default=None, required=False):
    if not cp.has_option(section, key):
        if required:
            raise src.error(section, key, "missing required key")
        return default
    raw = cp.get(section, key)
    try:
        value = float(raw)
    except ValueError:
        raise src.error(section, key, f"expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise src.error(section, key, "value must be finite")
    return value


def _int(cp, src, section, key, default=None, required=False):
    value = _float(cp, src, section, key, default, required)
    if value is None:
        return None
    if value != int(value):
        raise src.error(section, key, f"expected an integer, got {cp.get(section, key)!r}")
    return int(value)


def _choice(cp, src, section, key, choices, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    if raw not in choices:
        raise src.error(section, key, f"expected one of {', '.join(choices)}, got {raw!r}")
    return raw


def _bool(cp, src, section, key, default=False):
    if not cp.has_option(section, key):
        return default
    try:
        return cp.getboolean(section, key)
    except ValueError:
        raise src.error(section, key, f"expected a boolean, got {cp.get(section, key)!r}") from None


def _check_keys(cp, src):
    for section in cp.sections():
        if section.startswith("dot:"):
            allowed = _DOT_KEYS
        elif section == "couplings":
            continue
        elif section in _ALLOWED:
            allowed = _ALLOWED[section]
        else:
            raise src.error(section, None, "unknown section")
        for key in cp.options(section):
            if section == "leads" and key.startswith("mu_"):
                continue  # checked against the model's auxiliary dots later
            if key not in allowed:
                raise src.error(section, key, "unknown key")


def _custom_circuit(cp, src) -> CircuitSpec:
    dots = []
    for section in cp.sections():
        if not section.startswith("dot:"):
            continue
        label = section[4:].strip()
        role = _choice(cp, src, section, "role", (PRIMARY, AUXILIARY), None)
        if role is None:
            raise src.error(section, "role", "missing required key")
        onsite = _float(cp, src, section, "onsite", 0.0)
        damping = _float(cp, src, section, "damping", required=True)
        dots.append(DotSpec(label, role, onsite, damping))
    couplings = {}
    if cp.has_section("couplings"):
        for key in cp.options("couplings"):
            ends = [p.strip() for p in key.split(",")]
            if len(ends) != 2 or not all(ends):
                raise src.error("couplings", key, "coupling keys look like 'a,b'")
            raw = cp.get("couplings", key)
            try:
                value = complex(raw.replace(" ", ""))
            except ValueError:
                raise src.error("couplings", key, f"expected a complex number, got {raw!r}") from None
            couplings[(ends[0], ends[1])] = value
    spec = CircuitSpec(tuple(dots), couplings)
    if len(spec.primaries) < 2:
        raise src.error("model", "kind", "custom circuits need at least two primary dots")
    return spec


def _polar(r: float, phase: float) -> complex:
    # drop cos(pi/2)-style rounding residue so headers reparse to the same g
    re, im = r * math.cos(phase), r * math.sin(phase)
    tiny = 4 * sys.float_info.epsilon * abs(r)
    return complex(0.0 if abs(re) <= tiny else re, 0.0 if abs(im) <= tiny else im)


def _mode(cp, src, key, auto_alias):
    mode = _choice(cp, src, "model", key, ("auto", auto_alias, "explicit"), "auto")
    return "auto" if mode == auto_alias else mode


def _resolve_three_dot(cp, src, base: dict, notes: list) -> dict:
    lam = _float(cp, src, "model", "lambda", required=True)
    kappa = _float(cp, src, "model", "kappa", required=True)
    if lam <= 0 or kappa <= 0:
        raise src.error("model", "lambda" if lam <= 0 else "kappa", "must be positive")
    g_mode = _mode(cp, src, "g_mode", "auto_directional")
    gamma_mode = _mode(cp, src, "gamma_mode", "auto_matched")
    reverse = base["reverse"]
    if gamma_mode == "auto":
        raw_gamma = matched_gamma_three_dot(lam, kappa)
        raw_g = directional_coupling(lam, kappa, reverse)
        notes.append(f"auto: directional g = {_fmt_c(raw_g)}, matched gamma = {raw_gamma:.12g}")
        gamma = 1.0
        new_lam = math.sqrt(kappa * gamma)
        notes.append(
            f"auto: rescaled to gamma = 1 with lambda = {new_lam:.12g}, kappa = {kappa:.12g} "
            f"(input lambda = {lam:.12g})"
        )
        lam = new_lam
    else:
        gamma = _float(cp, src, "model", "gamma", 1.0)
        if gamma <= 0:
            raise src.error("model", "gamma", "must be positive")
    if g_mode == "auto":
        g = directional_coupling(lam, kappa, reverse)
        notes.append(f"auto: directional g = {_fmt_c(g)}" + (" (reversed)" if reverse else ""))
    else:
        g_abs = _float(cp, src, "model", "g_abs", required=True)
        g_phase = _float(cp, src, "model", "g_phase", math.pi / 2)
        g = _polar(g_abs, g_phase)
    return dict(base, lam=lam, kappa=kappa, gamma=gamma, g=g)


def _resolve_four_dot(cp, src, base: dict, notes: list) -> dict:
    lam = _float(cp, src, "model", "lambda")
    lam1 = _float(cp, src, "model", "lambda1", lam)
    lam2 = _float(cp, src, "model", "lambda2", lam)
    if lam1 is None or lam2 is None:
        raise src.error("model", "lambda", "missing required key (or lambda1 and lambda2)")
    kappa = _float(cp, src, "model", "kappa", required=True)
    delta = _float(cp, src, "model", "delta")
    d1 = _float(cp, src, "model", "delta1", delta)
    d2 = _float(cp, src, "model", "delta2", None if delta is None else -delta)
    if d1 is None or d2 is None:
        raise src.error("model", "delta", "missing required key (or delta1 and delta2)")
    if lam1 <= 0 or lam2 <= 0 or kappa <= 0:
        raise src.error("model", "kappa" if kappa <= 0 else "lambda", "must be positive")
    g_mode = _mode(cp, src, "g_mode", "auto_directional")
    gamma_mode = _mode(cp, src, "gamma_mode", "auto_matched")
    reverse = base["reverse"]
    if gamma_mode == "auto":
        raw_gamma = matched_gamma_four_dot(lam1, lam2, d1, d2, kappa)
        notes.append(f"auto: matched gamma = {raw_gamma:.12g}")
        scale = 1.0 / math.sqrt(raw_gamma)
        lam1, lam2 = lam1 * scale, lam2 * scale
        gamma = 1.0
        notes.append(
            f"auto: rescaled to gamma = 1 with lambda1 = {lam1:.12g}, lambda2 = {lam2:.12g}, "
            f"kappa = {kappa:.12g}"
        )
    else:
        gamma = _float(cp, src, "model", "gamma", 1.0)
        if gamma <= 0:
            raise src.error("model", "gamma", "must be positive")
    if g_mode == "auto":
        try:
            phi = directional_phase(lam1, lam2, d1, d2, kappa, reverse)
        except ValueError as exc:
            raise src.error("model", "g_mode", str(exc)) from None
        notes.append(f"auto: directional loop phase phi = {phi:.12g}" + (" (reversed)" if reverse else ""))
    else:
        phi = _float(cp, src, "model", "phi", required=True)
    return dict(base, lam1=lam1, lam2=lam2, kappa=kappa, delta1=d1, delta2=d2, gamma=gamma, phi=phi)


def parse_config(text: str) -> RunConfig:
    """Parse and fully resolve a run configuration.

    Auto modes are replaced by their resolved values; the record of what was
    resolved is kept in ``notes`` and written into every output header.
    """
    src = _Source(text)
    cp = _reader(text)
    _check_keys(cp, src)
    if not cp.has_section("model"):
        raise ConfigError("model: missing required section")
    kind = _choice(cp, src, "model", "kind", MODEL_KINDS, None)
    if kind is None:
        raise src.error("model", "kind", "missing required key")
    notes: list[str] = []
    base = dict(
        kind=kind,
        eps_d=_float(cp, src, "model", "eps_d", 1.0),
        eps_aux=_float(cp, src, "model", "eps_aux", 0.0),
        reverse=_bool(cp, src, "model", "reverse", False),
        transport=_choice(cp, src, "model", "transport", ("giom", "lb"), "giom" if kind != "custom" else "lb"),
        scatter=_choice(
            cp, src, "model", "scatter", ("closed_form", "generic"), "closed_form" if kind != "custom" else "generic"
        ),
    )
    if kind == "three_dot":
        fields = _resolve_three_dot(cp, src, base, notes)
    elif kind == "four_dot":
        fields = _resolve_four_dot(cp, src, base, notes)
    else:
        if base["transport"] != "lb" or base["scatter"] != "generic":
            raise src.error("model", "transport", "custom circuits use transport = lb and scatter = generic")
        fields = dict(base, circuit=_custom_circuit(cp, src))
    model = ModelConfig(**fields)
    report = validate_circuit(model.spec())
    if not report.ok:
        raise ConfigError("circuit: " + "; ".join(report.violations))

    T = DEFAULT_TEMPERATURE[kind]
    if cp.has_section("leads"):
        T = _float(cp, src, "leads", "temperature", T)
    if T <= 0:
        raise src.error("leads", "temperature", "must be positive")
    if kind == "custom":
        aux_mu = {}
        for d in model.circuit.auxiliaries:
            key = f"mu_{d.label}"
            if cp.has_section("leads") and cp.has_option("leads", key):
                aux_mu[d.label] = _float(cp, src, "leads", key)
            else:
                aux_mu[d.label] = -50.0
        if cp.has_section("leads"):
            for key in cp.options("leads"):
                if key.startswith("mu_") and key[3:] not in aux_mu:
                    raise src.error("leads", key, "no auxiliary dot with that label")
    else:
        aux_mu = {}
        for lab, default in DEFAULT_AUX_MU[kind].items():
            aux_mu[lab] = _float(cp, src, "leads", f"mu_{lab}", default) if cp.has_section("leads") else default
        if cp.has_section("leads"):
            for key in cp.options("leads"):
                if key.startswith("mu_") and key[3:] not in aux_mu:
                    raise src.error("leads", key, f"lead {key[3:]!r} does not exist for {kind}")
    leads = LeadsConfig(T, aux_mu)

    phonon = None
    if cp.has_section("phonon"):
        if kind != "three_dot":
            raise src.error("phonon", None, "phonon coupling is available for the three-dot model only")
        nu = _float(cp, src, "phonon", "nu", required=True)
        wc = _float(cp, src, "phonon", "omega_c", required=True)
        if nu < 0:
            raise src.error("phonon", "nu", "must be non-negative")
        if wc <= 0:
            raise src.error("phonon", "omega_c", "must be positive")
        onsite = _choice(cp, src, "phonon", "onsite", ("renormalized", "bare"), "renormalized")
        phonon = PhononConfig(nu, wc, onsite)

    sweep = None
    if cp.has_section("sweep"):
        skind = _choice(cp, src, "sweep", "kind", SWEEP_KINDS, None)
        if skind is None:
            raise src.error("sweep", "kind", "missing required key")
        start = _float(cp, src, "sweep", "start", required=True)
        stop = _float(cp, src, "sweep", "stop", required=True)
        points = _int(cp, src, "sweep", "points", required=True)
        bias = _float(cp, src, "sweep", "bias", 20.0)
        if not start < stop:
            raise src.error("sweep", "start", f"start ({start:g}) must be below stop ({stop:g})")
        if points < 2:
            raise src.error("sweep", "points", "need at least 2 points")
        if skind == "g_ratio" and kind != "three_dot":
            raise src.error("sweep", "kind", "g_ratio sweeps need the three-dot model")
        if skind == "nu" and phonon is None:
            raise src.error("sweep", "kind", "nu sweeps need a [phonon] section")
        if skind in ("nu",) and start < 0:
            raise src.error("sweep", "start", "nu must be non-negative")
        sweep = SweepConfig(skind, start, stop, points, bias)

    qkw = {}
    if cp.has_section("quadrature"):
        for key in ("rel_tol", "abs_tol", "window_pad_T", "window_pad_G"):
            if cp.has_option("quadrature", key):
                qkw[key] = _float(cp, src, "quadrature", key)
        if cp.has_option("quadrature", "max_subdivisions"):
            qkw["max_subdivisions"] = _int(cp, src, "quadrature", "max_subdivisions")
    try:
        quad = QuadratureConfig(**qkw)
    except ValueError as exc:
        raise ConfigError(f"quadrature: {exc}") from None

    output = cp.get("output", "path") if cp.has_option("output", "path") else None
    return RunConfig(model, leads, phonon, sweep, quad, output, tuple(notes))


def with_rel_tol(cfg: RunConfig, rel_tol: float) -> RunConfig:
    try:
        return replace(cfg, quadrature=replace(cfg.quadrature, rel_tol=rel_tol))
    except ValueError as exc:
        raise ConfigError(f"--rel-tol: {exc}") from None


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_c(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.12g}{z.imag:+.12g}j"


def to_ini(cfg: RunConfig) -> str:
    """Exact text form of a resolved configuration; parsing it gives the same run."""
    m = cfg.model
    out = ["[model]", f"kind = {m.kind}"]
    if m.kind != "custom":
        out.append(f"eps_d = {_fmt(m.eps_d)}")
    if m.kind == "three_dot":
        out += [
            f"lambda = {_fmt(m.lam)}",
            f"kappa = {_fmt(m.kappa)}",
            f"eps_aux = {_fmt(m.eps_aux)}",
            "g_mode = explicit",
            f"g_abs = {_fmt(abs(m.g))}",
            f"g_phase = {_fmt(math.atan2(m.g.imag, m.g.real))}",
        ]
    elif m.kind == "four_dot":
        out += [
            f"lambda1 = {_fmt(m.lam1)}",
            f"lambda2 = {_fmt(m.lam2)}",
            f"kappa = {_fmt(m.kappa)}",
            f"delta1 = {_fmt(m.delta1)}",
            f"delta2 = {_fmt(m.delta2)}",
            "g_mode = explicit",
            f"phi = {_fmt(m.phi)}",
        ]
    if m.kind != "custom":
        out += ["gamma_mode = explicit", f"gamma = {_fmt(m.gamma)}"]
        if m.reverse:
            out.append("reverse = true")
    out += [f"transport = {m.transport}", f"scatter = {m.scatter}"]
    if m.kind == "custom":
        for d in m.circuit.dots:
            out += ["", f"[dot:{d.label}]", f"role = {d.role}", f"onsite = {_fmt(d.onsite)}",
                    f"damping = {_fmt(d.lead_damping)}"]
        out += ["", "[couplings]"]
        for (a, b), v in m.circuit.couplings.items():
            v = complex(v)
            out.append(f"{a},{b} = {repr(v.real)}{'+' if v.imag >= 0 else '-'}{repr(abs(v.imag))}j")
    out += ["", "[leads]", f"temperature = {_fmt(cfg.leads.temperature)}"]
    out += [f"mu_{lab} = {_fmt(mu)}" for lab, mu in cfg.leads.aux_mu.items()]
    if cfg.phonon is not None:
        p = cfg.phonon
        out += ["", "[phonon]", f"nu = {_fmt(p.nu)}", f"omega_c = {_fmt(p.omega_c)}", f"onsite = {p.onsite}"]
    if cfg.sweep is not None:
        s = cfg.sweep
        out += ["", "[sweep]", f"kind = {s.kind}", f"start = {_fmt(s.start)}", f"stop = {_fmt(s.stop)}",
                f"points = {s.points}", f"bias = {_fmt(s.bias)}"]
    q = cfg.quadrature
    out += [
        "", "[quadrature]",
        f"rel_tol = {_fmt(q.rel_tol)}",
        f"abs_tol = {_fmt(q.abs_tol)}",
        f"window_pad_T = {_fmt(q.window_pad_T)}",
        f"window_pad_G = {_fmt(q.window_pad_G)}",
        f"max_subdivisions = {q.max_subdivisions}",
    ]
    return "\n".join(out) + "\n"


def header_lines(cfg: RunConfig) -> list[str]:
    """Comment header: resolution notes (``##``) followed by the resolved config."""
    lines = [f"## {n}" for n in cfg.notes]
    lines += [("# " + ln) if ln else "#" for ln in to_ini(cfg).splitlines()]
    return lines


def config_from_header(text: str) -> RunConfig:
    """Recover the run configuration from a CSV written by the CLI."""
    body = []
    for ln in text.splitlines():
        if not ln.startswith("#"):
            break
        if ln.startswith("##"):
            continue
        body.append(ln[2:] if ln.startswith("# ") else ln[1:])
    return parse_config("\n".join(body))
