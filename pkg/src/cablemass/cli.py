"""Experiment harness: presets, config files, CSV artifacts, CLI.

Every study scenario is addressable as a named preset (the
damping/stiffness parameter set plus its input, order and horizon).  A
run writes flat CSV artifacts:

    eigs.csv     re,im of every eigenvalue of A
    hsv.csv      Hankel singular values and the cumulative error bound
    outputs.csv  FOM and ROM outputs on the comparison grid
    error.csv    relative L2/Linf error per channel and combined
    energy.csv   unforced energy history (energy studies only)

Floats are written with 17 significant digits so runs with identical
configs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import analysis, balance, linalg, rom, signals
from .model import (InvalidParams, PhysicalParams, build_system,
                    quadratic_forms, sample_initial_data)
from .signals import InputSpec

ENV_PREFIX = "CABLEMASS_"
#: Flags that may also be supplied as CABLEMASS_<NAME> environment variables.
ENV_KEYS = ("config", "preset", "r", "out", "n", "tf")

# Fixed simulation parameters shared by every experiment:
# l = 1, m0 = 1, ml = 1.5, k3 = 1, beta = 1.
_FIXED = dict(l=1.0, m0=1.0, ml=1.5, k3=1.0, beta=1.0)


class ParseError(ValueError):
    """Config file could not be parsed; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None
                         else f"line {line}: {message}")


class ValidationError(ValueError):
    """A config value violates its contract; carries the field name."""

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(message or f"invalid value for {field!r}")


@dataclass(frozen=True)
class Preset:
    name: str
    params: PhysicalParams
    input_name: str
    r: int = 4
    tf: float = 100.0
    energy_study: bool = False


def _preset(name, input_name, r=4, tf=100.0, energy_study=False, **damping):
    return Preset(name=name, params=PhysicalParams(**_FIXED, **damping),
                  input_name=input_name, r=r, tf=tf, energy_study=energy_study)


#: Catalog of the study scenarios (damping parameter set x input).
PRESETS = {
    p.name: p for p in (
        # Kelvin-Voigt + right-boundary damping, unit springs: the
        # stability/energy-decay study.
        _preset("exp_stab_Ex1", "zero", tf=50.0, energy_study=True,
                gamma=0.1, alphal=0.1, k0=1.0, kl=1.0),
        # hyperbolic case: viscous damping only, everything small
        _preset("exp_stability2", "zero", tf=100.0, energy_study=True,
                gamma=0.0, alpha=0.01, alpha0=0.01, alphal=0.01,
                k0=0.01, kl=0.01),
        # small damping scenarios
        _preset("small_damp_ex1_in2", "input2",
                gamma=0.001, alphal=0.1, k0=0.1, kl=0.1),
        _preset("small_damp_ex5_in4", "input4", r=8,
                gamma=0.001, k0=0.1, kl=0.1),
        # small stiffness scenarios
        _preset("small_stiff_ex2_in1", "input1",
                gamma=0.0, alpha=0.1, alpha0=0.1, alphal=0.1,
                k0=0.001, kl=0.001),
        _preset("small_stiff_ex1_in4", "input4",
                gamma=0.1, alphal=0.1, k0=0.001, kl=0.001),
        _preset("small_stiff_ex5_in4", "input4", tf=300.0,
                gamma=0.1, k0=0.001, kl=0.001),
        # small damping and stiffness
        _preset("small_all_ex3_in2", "input2",
                gamma=0.001, alpha=0.001, k0=0.001, kl=0.001),
        _preset("small_all_ex3_in4", "input4",
                gamma=0.001, alpha=0.001, k0=0.001, kl=0.001),
    )
}

PRESET_ALIASES = {
    "example1_input2_smalldamp": "small_damp_ex1_in2",
}

#: Parameters used when no preset and no [params] section are given
#: (the stability-study scenario).
DEFAULT_PARAMS = PRESETS["exp_stab_Ex1"].params


def get_preset(name: str) -> Preset:
    key = PRESET_ALIASES.get(name, name)
    try:
        return PRESETS[key]
    except KeyError:
        raise ValidationError("preset", f"unknown preset {name!r}") from None


@dataclass
class ExperimentConfig:
    """Fully resolved experiment description."""

    params: PhysicalParams
    input: InputSpec
    n: int = 100
    r: int = 4
    t0: float = 0.0
    tf: float = 100.0
    rtol: float = 1e-3
    atol: float = 1e-6
    sample_count: int = 1000
    out_dir: str = "out"
    input2_mode: str = "literal"
    energy_study: bool = False
    preset: str | None = None


_PARAM_FIELDS = ("l", "m0", "ml", "k0", "kl", "k3", "beta",
                 "gamma", "alpha", "alpha0", "alphal")
_INPUT_FIELDS = ("kind", "scale", "c1", "c2", "m", "nfreq", "a", "b")
_EXPERIMENT_FIELDS = ("preset", "n", "r", "t0", "tf", "rtol", "atol",
                      "sample_count", "out", "input2_mode", "energy_study")


def _parse_float(field, raw):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ValidationError(field, f"{field!r} must be a number, got {raw!r}")


def _parse_int(field, raw):
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ValidationError(field, f"{field!r} must be an integer, got {raw!r}")


def _parse_bool(field, raw):
    text = str(raw).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValidationError(field, f"{field!r} must be a boolean, got {raw!r}")


def _read_ini(path):
    parser = configparser.ConfigParser()
    try:
        with open(path, "r") as handle:
            parser.read_file(handle, source=str(path))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ParseError(str(exc).splitlines()[0], line=line) from exc
    known = {"experiment": _EXPERIMENT_FIELDS, "params": _PARAM_FIELDS,
             "input": _INPUT_FIELDS}
    for section in parser.sections():
        if section not in known:
            raise ValidationError(section, f"unknown section [{section}]")
        for key in parser[section]:
            if key not in known[section]:
                raise ValidationError(key, f"unknown key {key!r} in [{section}]")
    return parser


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.n < 3:
        raise ValidationError("n", f"n must be >= 3, got {cfg.n}")
    if cfg.r < 1:
        raise ValidationError("r", f"r must be >= 1, got {cfg.r}")
    if not cfg.tf > cfg.t0:
        raise ValidationError("tf", f"need tf > t0, got [{cfg.t0}, {cfg.tf}]")
    if cfg.rtol <= 0.0:
        raise ValidationError("rtol", "rtol must be positive")
    if cfg.atol <= 0.0:
        raise ValidationError("atol", "atol must be positive")
    if cfg.sample_count < 2:
        raise ValidationError("sample_count", "sample_count must be >= 2")
    if cfg.input2_mode not in ("imag", "literal"):
        raise ValidationError("input2_mode",
                              f"input2_mode must be 'imag' or 'literal', "
                              f"got {cfg.input2_mode!r}")
    return cfg


def load_config(path=None, cli_overrides=None, env=None) -> ExperimentConfig:
    """Build a validated ExperimentConfig.

    Precedence, lowest to highest: package defaults, named preset,
    config file, CABLEMASS_* environment variables, CLI flags.

    Raises
    ------
    ParseError
        On unparseable config text (with the offending line number).
    ValidationError
        On an unknown key or an invalid value (named field).
    """
    cli_overrides = dict(cli_overrides or {})
    env = os.environ if env is None else env
    env_overrides = {}
    for key in ENV_KEYS:
        value = env.get(ENV_PREFIX + key.upper())
        if value is not None:
            env_overrides[key] = value

    parser = _read_ini(path) if path is not None else None
    exp = dict(parser["experiment"]) if parser and parser.has_section(
        "experiment") else {}

    # resolve the preset first: flags beat env beats file
    preset_name = cli_overrides.get("preset") or env_overrides.get("preset") \
        or exp.get("preset")
    preset = get_preset(preset_name) if preset_name else None

    cfg = ExperimentConfig(
        params=preset.params if preset else DEFAULT_PARAMS,
        input=signals.input_preset(preset.input_name) if preset
        else signals.input_preset("input1"),
        preset=preset.name if preset else None,
    )
    if preset:
        cfg.r = preset.r
        cfg.tf = preset.tf
        cfg.energy_study = preset.energy_study

    if parser and parser.has_section("params"):
        raw = dict(parser["params"])
        values = {f: getattr(cfg.params, f) for f in _PARAM_FIELDS}
        values.update({f: _parse_float(f, raw[f]) for f in raw})
        try:
            cfg.params = PhysicalParams(**values)
        except InvalidParams as exc:
            raise ValidationError(exc.field, str(exc)) from exc

    if parser and parser.has_section("input"):
        raw = dict(parser["input"])
        kind_name = raw.pop("kind", None)
        if kind_name is not None:
            try:
                cfg.input = signals.input_preset(kind_name)
            except ValueError as exc:
                raise ValidationError("kind", str(exc)) from exc
        updates = {f: _parse_float(f, raw[f]) for f in raw}
        try:
            cfg.input = replace(cfg.input, **updates)
        except ValueError as exc:
            field = next(iter(updates), "input")
            raise ValidationError(field, str(exc)) from exc

    for key, raw in exp.items():
        if key == "preset":
            continue
        if key in ("n", "r", "sample_count"):
            setattr(cfg, key, _parse_int(key, raw))
        elif key in ("t0", "tf", "rtol", "atol"):
            setattr(cfg, key, _parse_float(key, raw))
        elif key == "energy_study":
            cfg.energy_study = _parse_bool(key, raw)
        elif key == "out":
            cfg.out_dir = raw
        elif key == "input2_mode":
            cfg.input2_mode = raw

    for source in (env_overrides, cli_overrides):
        for key, raw in source.items():
            if raw is None or key in ("preset", "config"):
                continue
            if key in ("n", "r"):
                setattr(cfg, key, _parse_int(key, raw))
            elif key == "tf":
                cfg.tf = _parse_float(key, raw)
            elif key == "out":
                cfg.out_dir = str(raw)
            else:
                raise ValidationError(key, f"unknown override {key!r}")

    return _validate(cfg)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(x) for x in row) + "\n")


def write_eigs_csv(path, eigs):
    order = np.lexsort((-eigs.imag, -eigs.real))
    _write_csv(path, ("re", "im"),
               [(e.real, e.imag) for e in eigs[order]])


def write_hsv_csv(path, hsv):
    rows = [(i + 1, hsv[i], balance.error_bound(hsv, i + 1))
            for i in range(len(hsv))]
    _write_csv(path, ("index", "sigma", "bound"), rows)


def write_outputs_csv(path, fom_series, rom_series):
    rows = zip(fom_series.times, fom_series.values[:, 0],
               fom_series.values[:, 1], rom_series.values[:, 0],
               rom_series.values[:, 1])
    _write_csv(path, ("t", "y1_fom", "y2_fom", "y1_rom", "y2_rom"), rows)


def write_error_csv(path, metrics):
    rows = [
        ("y1", metrics.rel_l2_per_channel[0], metrics.rel_linf_per_channel[0]),
        ("y2", metrics.rel_l2_per_channel[1], metrics.rel_linf_per_channel[1]),
        ("combined", metrics.rel_l2, metrics.rel_linf),
    ]
    _write_csv(path, ("channel", "rel_l2", "rel_linf"), rows)


def write_energy_csv(path, report):
    rows = zip(report.times, report.e, report.ek, report.ep)
    _write_csv(path, ("t", "E", "EK", "EP"), rows)


# Initial data of the unforced energy study: position e^x sin(1-x),
# velocity cos(x).
def _energy_initial_data(params, n):
    return sample_initial_data(
        params, n,
        pos=lambda x: np.exp(x) * np.sin(1.0 - x),
        vel=np.cos)


def run_experiment(cfg: ExperimentConfig, log=None) -> dict:
    """Run the full experiment and write the artifact set.

    Returns a dict mapping artifact names to file paths.
    """
    log = log or (lambda msg: None)
    os.makedirs(cfg.out_dir, exist_ok=True)
    artifacts = {}

    sys_ = build_system(cfg.params, cfg.n)
    log(f"built system: n={cfg.n}, state dim {2 * cfg.n}, h={sys_.grid.h:.6g}")

    eigs = linalg.eigenvalues(sys_.a)
    path = os.path.join(cfg.out_dir, "eigs.csv")
    write_eigs_csv(path, eigs)
    artifacts["eigs"] = path
    log(f"stability margin: {eigs.real.max():.6g}")

    p, q = balance.gramians(sys_)
    bal = balance.square_root_transform(p, q, cfg.r)
    red = balance.reduce(sys_, bal)
    path = os.path.join(cfg.out_dir, "hsv.csv")
    write_hsv_csv(path, bal.hsv)
    artifacts["hsv"] = path
    log(f"retained r={cfg.r}, error bound {balance.error_bound(bal.hsv, cfg.r):.6g}")

    spec = signals.resolve_input(cfg.input, sys_, mode=cfg.input2_mode)
    fom_series = rom.simulate_fom(sys_, spec, cfg.t0, cfg.tf, rtol=cfg.rtol,
                                  atol=cfg.atol, sample_count=cfg.sample_count)
    rom_series = rom.simulate_rom(red, spec, cfg.t0, cfg.tf, rtol=cfg.rtol,
                                  atol=cfg.atol, sample_count=cfg.sample_count)
    path = os.path.join(cfg.out_dir, "outputs.csv")
    write_outputs_csv(path, fom_series, rom_series)
    artifacts["outputs"] = path

    metrics = analysis.output_error(fom_series, rom_series)
    path = os.path.join(cfg.out_dir, "error.csv")
    write_error_csv(path, metrics)
    artifacts["error"] = path
    log(f"FOM vs ROM rel_l2={metrics.rel_l2:.6g} rel_linf={metrics.rel_linf:.6g}")

    if cfg.energy_study:
        forms = quadratic_forms(cfg.params, cfg.n)
        x0 = _energy_initial_data(cfg.params, cfg.n)
        report = analysis.energy_decay(sys_, forms, x0, cfg.tf,
                                       rtol=min(cfg.rtol, 1e-6),
                                       atol=min(cfg.atol, 1e-9),
                                       sample_count=cfg.sample_count)
        path = os.path.join(cfg.out_dir, "energy.csv")
        write_energy_csv(path, report)
        artifacts["energy"] = path
        log(f"fitted decay rate {report.fitted_rate:.6g} (R2={report.fit_r2:.4f})")

    return artifacts


def _cmd_build(cfg, log):
    sys_ = build_system(cfg.params, cfg.n)
    log(f"preset: {cfg.preset or '(none)'}")
    log(f"nodes n={cfg.n}, spacing h={sys_.grid.h:.6g}, state dim {2 * cfg.n}")
    log(f"input kind: {cfg.input.kind}, r={cfg.r}, horizon [{cfg.t0}, {cfg.tf}]")
    return {}


def _cmd_eigs(cfg, log):
    sys_ = build_system(cfg.params, cfg.n)
    eigs = linalg.eigenvalues(sys_.a)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "eigs.csv")
    write_eigs_csv(path, eigs)
    log(f"stability margin: {eigs.real.max():.6g}")
    return {"eigs": path}


def _cmd_balance(cfg, log):
    sys_ = build_system(cfg.params, cfg.n)
    p, q = balance.gramians(sys_)
    hsv = balance.hankel_values(p, q)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "hsv.csv")
    write_hsv_csv(path, hsv)
    log(f"leading Hankel values: {np.array2string(hsv[:min(6, len(hsv))], precision=4)}")
    return {"hsv": path}


def _cmd_simulate(cfg, log):
    sys_ = build_system(cfg.params, cfg.n)
    p, q = balance.gramians(sys_)
    red = balance.reduce(sys_, balance.square_root_transform(p, q, cfg.r))
    spec = signals.resolve_input(cfg.input, sys_, mode=cfg.input2_mode)
    fom_series = rom.simulate_fom(sys_, spec, cfg.t0, cfg.tf, rtol=cfg.rtol,
                                  atol=cfg.atol, sample_count=cfg.sample_count)
    rom_series = rom.simulate_rom(red, spec, cfg.t0, cfg.tf, rtol=cfg.rtol,
                                  atol=cfg.atol, sample_count=cfg.sample_count)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "outputs.csv")
    write_outputs_csv(path, fom_series, rom_series)
    return {"outputs": path}


def _cmd_energy(cfg, log):
    sys_ = build_system(cfg.params, cfg.n)
    forms = quadratic_forms(cfg.params, cfg.n)
    x0 = _energy_initial_data(cfg.params, cfg.n)
    report = analysis.energy_decay(sys_, forms, x0, cfg.tf,
                                   rtol=min(cfg.rtol, 1e-6),
                                   atol=min(cfg.atol, 1e-9),
                                   sample_count=cfg.sample_count)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "energy.csv")
    write_energy_csv(path, report)
    log(f"fitted decay rate {report.fitted_rate:.6g} (R2={report.fit_r2:.4f})")
    return {"energy": path}


_COMMANDS = {
    "build": _cmd_build,
    "eigs": _cmd_eigs,
    "balance": _cmd_balance,
    "simulate": _cmd_simulate,
    "compare": run_experiment,
    "energy": _cmd_energy,
}


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="config file (INI)")
    common.add_argument("--preset", metavar="NAME",
                        help="named experiment preset")
    common.add_argument("--r", type=int, metavar="INT", help="reduced order")
    common.add_argument("--n", type=int, metavar="INT", help="node count")
    common.add_argument("--tf", type=float, metavar="REAL",
                        help="final time")
    common.add_argument("--out", metavar="DIR", help="output directory")

    parser = argparse.ArgumentParser(
        prog="cablemass",
        description="Balanced-truncation model reduction experiments for "
                    "the nonlinear cable-mass system.",
        epilog="Flags may also be given as environment variables with the "
               f"{ENV_PREFIX} prefix (e.g. {ENV_PREFIX}PRESET).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("build", "validate the config and report system dimensions"),
            ("eigs", "write the eigenvalues of A (eigs.csv)"),
            ("balance", "write the Hankel singular values (hsv.csv)"),
            ("simulate", "write FOM and ROM outputs (outputs.csv)"),
            ("compare", "run the full experiment (all artifacts)"),
            ("energy", "write the unforced energy history (energy.csv)")):
        sub.add_parser(name, parents=[common], help=help_text)

    args = parser.parse_args(argv)
    overrides = {key: getattr(args, key) for key in ENV_KEYS
                 if getattr(args, key, None) is not None}
    config_path = overrides.pop("config", None) \
        or os.environ.get(ENV_PREFIX + "CONFIG")

    def log(message):
        print(message)

    try:
        cfg = load_config(config_path, cli_overrides=overrides)
        handler = _COMMANDS[args.command]
        artifacts = handler(cfg, log=log)
        for name, path in (artifacts or {}).items():
            log(f"wrote {name}: {path}")
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
