"""Command-line front end.

Configuration is an INI file with ``[channel]``, ``[scheme]`` and ``[sim]``
sections. Every key may also be given as ``--key value`` (or
``--key=value``) and the flag wins. Each run writes its data file plus a
``<out>.manifest.json`` describing how it was produced.

Exit codes: 0 success, 2 configuration error, 3 resource guard tripped.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import re
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .channels import ChannelError, ChannelModel
from .infotheory import exponent_curve, moving_rate_bounds
from .optimize import capacity, curve_to_csv, mi_curve, optimal_query_size
from .report import ResourceGuardError
from .sim_moving import MovingConfig, audit, run_moving_sim
from .sim_stationary import RUNNERS, ConfigError, SearchConfig

EXIT_OK, EXIT_CONFIG, EXIT_GUARD = 0, 2, 3
COMMANDS = ("mi-curve", "optimize", "exponents", "simulate", "bounds-audit")
SIM_SCHEMES = ("nonadaptive", "forney", "yamamoto-itoh", "two-phase", "moving")


def _opt(cast):
    def f(text):
        return None if text.strip().lower() in ("none", "") else cast(text)

    f.__name__ = f"optional {cast.__name__}"
    return f


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _ints(text):
    return [int(t) for t in text.replace(",", " ").split()]


def _floats(text):
    return [float(t) for t in text.replace(",", " ").split()]


def _policy(text):
    t = text.strip()
    return t if t in ("uniform", "sweep") else float(t)


# key -> (section, parser, default)
KEYS = {
    "variant": ("channel", str, "linear_bsc"),
    "a": ("channel", float, 0.7),
    "b": ("channel", float, 0.1),
    "mu": ("channel", float, 1.0),
    "a_var": ("channel", float, 0.0),
    "b_var": ("channel", float, 0.0),
    "require_monotone": ("channel", _bool, True),
    "scheme": ("scheme", str, "nonadaptive"),
    "delta": ("scheme", float, 1 / 64),
    "rate": ("scheme", _opt(float), None),
    "N": ("scheme", _opt(int), None),
    "sweep_N": ("scheme", _ints, []),
    "prior": ("scheme", _opt(float), None),
    "forney_T": ("scheme", float, 0.05),
    "yi_lambda": ("scheme", float, 0.2),
    "yi_threshold": ("scheme", _opt(float), None),
    "false_erase": ("scheme", float, 1e-2),
    "alpha": ("scheme", float, 0.1),
    "N1": ("scheme", _opt(int), None),
    "N2": ("scheme", _opt(int), None),
    "N3": ("scheme", _opt(int), None),
    "w_policy": ("scheme", _policy, "uniform"),
    "max_rounds": ("scheme", int, 10_000),
    "check_rate": ("scheme", _bool, True),
    "v_max": ("scheme", float, 0.1),
    "method": ("scheme", str, "exact"),
    "density": ("scheme", int, 1),
    "max_trajectories": ("scheme", int, 5_000_000),
    "grid_step": ("scheme", float, 1e-3),
    "rho_max": ("scheme", float, 20.0),
    "rate_points": ("scheme", int, 50),
    "audit_N_max": ("scheme", int, 12),
    "audit_M_max": ("scheme", int, 24),
    "audit_v_max": ("scheme", _floats, [0.1, 0.25]),
    "trials": ("sim", int, 1000),
    "seed": ("sim", int, 0),
    "threads": ("sim", int, 1),
}
SECTIONS = ("channel", "scheme", "sim")

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


class CliConfigError(ValueError):
    """Bad configuration file or flag; maps to exit code 2."""


def _format(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class RunConfig:
    """Resolved key/value configuration (defaults, then file, then flags)."""

    values: dict = field(default_factory=lambda: {k: spec[2] for k, spec in KEYS.items()})

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key: str, text: str, where: str = "flag") -> None:
        if key not in KEYS:
            raise CliConfigError(f"{where}: unknown key {key!r}")
        section, cast, default = KEYS[key]
        if text.strip() == "":
            self.values[key] = default
            return
        try:
            self.values[key] = cast(text.strip())
        except ValueError as exc:
            raise CliConfigError(f"{where}: bad value for {key!r}: {exc}") from None

    def sections(self) -> dict:
        out = {s: {} for s in SECTIONS}
        for k, v in self.values.items():
            out[KEYS[k][0]][k] = v
        return out

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for s, kv in self.sections().items():
            cp[s] = {k: _format(v) for k, v in kv.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str, path: str = "<config>") -> "RunConfig":
        cfg = cls()
        lines = _key_lines(text)
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text, source=path)
        except configparser.Error as exc:
            raise CliConfigError(str(exc).replace("\n", " ")) from None
        for section in cp.sections():
            if section not in SECTIONS:
                raise CliConfigError(f"{path}:{lines.get((section, None), '?')}: unknown section [{section}]")
            for key, text_val in cp[section].items():
                where = f"{path}:{lines.get((section, key), '?')}"
                if key in KEYS and KEYS[key][0] != section:
                    raise CliConfigError(f"{where}: key {key!r} belongs in [{KEYS[key][0]}]")
                cfg.set(key, text_val, where)
        return cfg


def _key_lines(text: str) -> dict:
    out, section = {}, None
    for i, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            out.setdefault((section, None), i)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            out.setdefault((section, m.group(1).strip()), i)
    return out


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    version: str
    started: str
    finished: str
    outputs: list

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def _g(x) -> str:
    return f"{float(x) + 0.0:.12g}"


# --- model / config builders ------------------------------------------------------


def build_model(cfg: RunConfig) -> ChannelModel:
    v = cfg["variant"]
    if v == "linear_bsc":
        return ChannelModel.linear_bsc(cfg["a"], cfg["b"], cfg["require_monotone"])
    if v == "gaussian_pair":
        return ChannelModel.gaussian_pair(cfg["mu"], cfg["a_var"], cfg["b_var"], cfg["require_monotone"])
    raise CliConfigError(f"unknown channel variant {v!r}")


def search_config(cfg: RunConfig, model: ChannelModel, N=None) -> SearchConfig:
    return SearchConfig(
        model=model, delta=cfg["delta"], rate=cfg["rate"], N=N if N is not None else cfg["N"],
        prior=cfg["prior"], forney_T=cfg["forney_T"], yi_lambda=cfg["yi_lambda"],
        yi_threshold=cfg["yi_threshold"], false_erase=cfg["false_erase"], alpha=cfg["alpha"],
        N1=cfg["N1"], N2=cfg["N2"], N3=cfg["N3"], trials=cfg["trials"], seed=cfg["seed"],
        w_policy=cfg["w_policy"], max_rounds=cfg["max_rounds"], threads=cfg["threads"],
    )


def moving_config(cfg: RunConfig, model: ChannelModel, N=None) -> MovingConfig:
    N = N if N is not None else cfg["N"]
    if N is None:
        raise CliConfigError("scheme=moving needs N")
    w = cfg["w_policy"]
    return MovingConfig(
        model=model, delta=cfg["delta"], N=N, v_max=cfg["v_max"], prior=cfg["prior"],
        trials=cfg["trials"], seed=cfg["seed"], w_policy=w, method=cfg["method"],
        density=cfg["density"], max_trajectories=cfg["max_trajectories"], threads=cfg["threads"],
    )


# --- commands -----------------------------------------------------------------------


def cmd_mi_curve(cfg: RunConfig) -> tuple[str, str]:
    model = build_model(cfg)
    return "mi_curve.csv", curve_to_csv(mi_curve(model, cfg["grid_step"]))


def cmd_optimize(cfg: RunConfig) -> tuple[str, str]:
    model = build_model(cfg)
    rep = optimal_query_size(model, cfg["grid_step"])
    return "optimum.json", rep.to_json() + "\n"


EXPONENT_COLUMNS = (
    "random_coding", "forney", "burnashev_qstar", "yamamoto_itoh", "two_phase_burnashev",
    "yamamoto_itoh_qstar",
)


def exponent_table(model: ChannelModel, points: int = 50, rho_max: float = 20.0):
    """Exponent curves on a shared grid of ``points`` rates from 0 to ``C(0)``.

    The first five columns are, in order: random coding, decision feedback,
    the feedback bound of the fixed channel ``P_q*``, validation over the
    best channel and the adaptive tradeoff. ``yamamoto_itoh_qstar`` repeats
    the validation curve with the search channel ``P_q*``.
    """
    q = optimal_query_size(model).q_star
    rates = np.linspace(0.0, capacity(model, 0.0), points)
    cols = {
        "random_coding": exponent_curve("random_coding", rates, model, q),
        "forney": exponent_curve("forney", rates, model, q, rho_max=rho_max),
        "burnashev_qstar": exponent_curve("two_phase_burnashev", rates, model, q, channel_q=q),
        "yamamoto_itoh": exponent_curve("yamamoto_itoh", rates, model, q, validation_q=0.0),
        "two_phase_burnashev": exponent_curve("two_phase_burnashev", rates, model, q, channel_q=0.0),
        "yamamoto_itoh_qstar": exponent_curve("yamamoto_itoh", rates, model, q, validation_q=q),
    }
    return rates, {k: np.array(c.exponent_values) for k, c in cols.items()}


def cmd_exponents(cfg: RunConfig) -> tuple[str, str]:
    model = build_model(cfg)
    if cfg["rate_points"] < 2:
        raise CliConfigError("rate_points must be at least 2")
    rates, cols = exponent_table(model, cfg["rate_points"], cfg["rho_max"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rate", *EXPONENT_COLUMNS])
    for i, r in enumerate(rates):
        w.writerow([_g(r), *(_g(cols[c][i]) for c in EXPONENT_COLUMNS)])
    return "exponents.csv", buf.getvalue()


def _simulate_one(cfg: RunConfig, model: ChannelModel, N=None):
    scheme = cfg["scheme"]
    if scheme == "moving":
        mc = moving_config(cfg, model, N)
        if cfg["check_rate"] and mc.v_max > 0:
            opt = optimal_query_size(model)
            ach, _ = moving_rate_bounds(opt.q_star, mc.v_max, model)
            if mc.rate >= ach:
                raise ConfigError(f"rate {mc.rate:.6g} is not below the achievable maximum {ach:.6g}")
        return run_moving_sim(mc)
    sc = search_config(cfg, model, N)
    if scheme == "two-phase":
        return RUNNERS[scheme](sc)
    return RUNNERS[scheme](sc, check_rate=cfg["check_rate"])


def cmd_simulate(cfg: RunConfig) -> tuple[str, str]:
    scheme = cfg["scheme"]
    if scheme not in SIM_SCHEMES:
        raise CliConfigError(f"unknown scheme {scheme!r}; choose from {', '.join(SIM_SCHEMES)}")
    model = build_model(cfg)
    if not cfg["sweep_N"]:
        return "simulate.json", _simulate_one(cfg, model).to_json() + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "rate", "error_rate", "ci_low", "ci_high", "erasure_rate", "mean_tau"])
    for N in cfg["sweep_N"]:
        r = _simulate_one(cfg, model, N)
        rate = math.log2(1 / cfg["delta"]) / N
        w.writerow([N, _g(rate), _g(r.error_rate), _g(r.error_ci[0]), _g(r.error_ci[1]),
                    _g(r.erasure_rate), _g(r.mean_stopping_time)])
    return "sweep.csv", buf.getvalue()


AUDIT_COLUMNS = (
    "N", "M", "v_max", "count", "count_bound", "intersection_bound", "far_pairs",
    "max_far_intersections", "violations", "far_pairs_representative",
    "max_far_intersections_representative", "violations_representative",
)


# the default audit (about 4e9 checks) takes seconds; the cap allows ~10x that
AUDIT_WORK_PER_TRAJECTORY = 10_000


def cmd_bounds_audit(cfg: RunConfig) -> tuple[str, str]:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AUDIT_COLUMNS)
    vs, n_max, m_max = cfg["audit_v_max"], cfg["audit_N_max"], cfg["audit_M_max"]
    if any(not 0 < v <= 0.5 for v in vs):
        raise CliConfigError("audit_v_max entries must lie in (0, 1/2]")
    # pair checks per config grow like M * K^2 * N with K ~ v M N^2 paths per start
    work = sum(M * (v * M * N * N + 2) ** 2 * N
               for v in vs for N in range(1, n_max + 1) for M in range(2, m_max + 1))
    cap = AUDIT_WORK_PER_TRAJECTORY * cfg["max_trajectories"]
    if work > cap:
        raise ResourceGuardError(f"audit needs about {work:.3g} pair checks (cap {cap:.3g})")
    for v in vs:
        for N in range(1, n_max + 1):
            for M in range(2, m_max + 1):
                d = asdict(audit(N, M, v))
                w.writerow([_g(d[c]) if isinstance(d[c], float) else d[c] for c in AUDIT_COLUMNS])
    return "bounds_audit.csv", buf.getvalue()


HANDLERS = {
    "mi-curve": cmd_mi_curve,
    "optimize": cmd_optimize,
    "exponents": cmd_exponents,
    "simulate": cmd_simulate,
    "bounds-audit": cmd_bounds_audit,
}


# --- argument handling --------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mdsearch", description="Search under query-dependent noise.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="INI file with [channel], [scheme], [sim] sections")
    p.add_argument("--out", help="data file path (manifest goes to <out>.manifest.json)")
    p.add_argument("--seed", help="master seed")
    p.add_argument("--trials", help="Monte Carlo trials")
    p.add_argument("--threads", help="worker processes")
    p.epilog = "Any config key can be overridden with --key value."
    return p


def _overrides(extra: list[str]) -> list[tuple[str, str]]:
    out, i = [], 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) < 3:
            raise CliConfigError(f"unexpected argument {tok!r}")
        if "=" in tok:
            k, v = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise CliConfigError(f"flag {tok} needs a value")
            k, v = tok[2:], extra[i + 1]
            i += 2
        out.append((k.replace("-", "_") if k.replace("-", "_") in KEYS else k, v))
    return out


def resolve_config(args, extra) -> RunConfig:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise CliConfigError(f"cannot read config: {exc}") from None
        cfg = RunConfig.from_ini(text, args.config)
    else:
        cfg = RunConfig()
    for key in ("seed", "trials", "threads"):
        val = getattr(args, key)
        if val is not None:
            cfg.set(key, val, f"--{key}")
    for k, v in _overrides(extra):
        cfg.set(k, v, f"--{k}")
    return cfg


def main(argv=None) -> int:
    args, extra = _parser().parse_known_args(argv)
    started = _now()
    try:
        cfg = resolve_config(args, extra)
        default_name, data = HANDLERS[args.command](cfg)
    except (CliConfigError, ConfigError, ChannelError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    out = args.out or default_name
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(data)
    manifest = RunManifest(
        command=args.command, config=cfg.sections(), seed=cfg["seed"], version=__version__,
        started=started, finished=_now(), outputs=[out],
    )
    with open(out + ".manifest.json", "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json() + "\n")
    print(out)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
