"""Command-line interface: experiment orchestration and CSV emission.

Each subcommand runs one experiment family and writes plain comma-separated
tables plus a JSON manifest (command, resolved config, seed, code version,
output paths, wall-clock timings).  Identical configuration and seed
reproduce byte-identical CSV files; manifests differ only in timings.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    FockOracle,
    concentration_stats,
    rectangular_profile,
    two_rectangle_profile,
)
from .branches import BranchState, entropy, mutual_information, reduced_state
from .bph import bph_report, distinguishability_curve
from .darwinism import (
    averaged_relative_redundancy,
    fraction_sizes,
    non_monotonicity,
    pip_trace,
    redundancy_trace,
)
from .errors import ConfigError, NumericalError
from .model import (
    ModelConfig,
    build_coupling_matrix,
    diagonalize,
    evolve,
    evolve_many,
)
from .nonmarkov import nm_degree, sample_pairs

_CONFIG_KEYS = {
    "n_env",
    "omega0",
    "omega_min",
    "omega_max",
    "gamma",
    "gamma_bar",
    "gamma_bar_ratio",
    "alpha0",
    "branch_a",
    "branch_b",
    "delta",
    "t_max_gamma",
    "n_times",
    "mc_samples",
    "master_seed",
}


def _as_complex(value, key: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, complex):
        return value
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) for v in value)
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{key} must be a number or a [re, im] pair, got {value!r}")


def load_config(path: str | None, overrides: dict) -> ModelConfig:
    """Resolve a run configuration from an optional JSON file plus overrides."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    data.update((k, v) for k, v in overrides.items() if v is not None)

    ratio = data.pop("gamma_bar_ratio", None)
    kwargs: dict = {}
    for key, value in data.items():
        if key in ("alpha0", "branch_a", "branch_b"):
            kwargs[key] = _as_complex(value, key)
        elif key in ("n_env", "n_times", "mc_samples", "master_seed"):
            kwargs[key] = int(value)
        else:
            kwargs[key] = float(value)
    if ratio is not None:
        if "gamma_bar" in kwargs and kwargs["gamma_bar"] is not None:
            raise ConfigError("give gamma_bar or gamma_bar_ratio, not both")
        kwargs["gamma_bar"] = float(ratio) * kwargs.get("gamma", ModelConfig.gamma)
    return ModelConfig(**kwargs)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _config_snapshot(config: ModelConfig) -> dict:
    snap = asdict(config)
    for key in ("alpha0", "branch_a", "branch_b"):
        value = snap[key]
        snap[key] = [value.real, value.imag]
    snap["resolved_gamma_bar"] = config.coupling_gamma_bar
    snap["decay_rate"] = config.decay_rate
    return snap


@dataclass
class Manifest:
    command: str
    version: str
    master_seed: int
    config: dict
    parameters: dict
    outputs: list[str] = field(default_factory=list)
    timings_s: dict = field(default_factory=dict)

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def _ratio_list(text: str) -> list[float]:
    try:
        ratios = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--ratios must be a comma-separated number list, got {text!r}")
    if not ratios:
        raise ConfigError("--ratios must name at least one value")
    return ratios


# ---------------------------------------------------------------------------
# subcommands


def cmd_dynamics(config: ModelConfig, out: Path, args) -> list[Path]:
    prop = diagonalize(build_coupling_matrix(config))
    times = config.times
    amps = evolve_many(prop, config.alpha0, times)
    system = np.abs(amps[:, 0]) ** 2
    env = np.sum(np.abs(amps[:, 1:]) ** 2, axis=1)
    path = out / "dynamics.csv"
    write_csv(
        path,
        ["t", "gamma_t", "system_excitation", "environment_excitation", "total_excitation"],
        (
            (t, t * config.decay_rate, s, e, s + e)
            for t, s, e in zip(times, system, env)
        ),
    )
    return [path]


def cmd_pip(config: ModelConfig, out: Path, args) -> list[Path]:
    prop = diagonalize(build_coupling_matrix(config))
    sizes = fraction_sizes(config.n_env, args.fractions)
    curves = pip_trace(prop, config, sizes=sizes, threads=args.threads)
    path = out / "pip.csv"

    def rows():
        for curve in curves:
            for frac, mean, err in zip(curve.fractions, curve.mean_mi, curve.stderr_mi):
                yield (
                    curve.time,
                    curve.time * config.decay_rate,
                    frac,
                    mean,
                    err,
                    curve.h_system,
                )

    write_csv(
        path,
        ["t", "gamma_t", "fraction", "mean_mi", "stderr_mi", "h_system"],
        rows(),
    )
    return [path]


def cmd_redundancy(config: ModelConfig, out: Path, args) -> list[Path]:
    prop = diagonalize(build_coupling_matrix(config))
    sizes = fraction_sizes(config.n_env, args.fractions)
    trace = redundancy_trace(prop, config, sizes=sizes, threads=args.threads)
    path = out / "redundancy.csv"
    write_csv(
        path,
        ["t", "gamma_t", "h_system", "mi_full", "f_delta", "r_delta", "r_rel"],
        zip(
            trace.times,
            trace.gamma_times,
            trace.h_system,
            trace.mi_full,
            trace.f_delta,
            trace.r_delta,
            trace.r_rel,
        ),
    )
    return [path]


def _sweep_configs(config: ModelConfig, ratios: list[float]) -> list[tuple[float, ModelConfig]]:
    from dataclasses import replace

    return [(r, replace(config, gamma_bar=r * config.gamma)) for r in ratios]


def cmd_nonmarkov(config: ModelConfig, out: Path, args) -> list[Path]:
    alphas = sample_pairs(args.pairs, seed=config.master_seed)
    rows = []
    for ratio, cfg in _sweep_configs(config, _ratio_list(args.ratios)):
        prop = diagonalize(build_coupling_matrix(cfg))
        degree = nm_degree(prop, alphas, cfg.times)
        rows.append(
            (
                ratio,
                cfg.coupling_gamma_bar,
                degree,
                cfg.times[0],
                cfg.times[-1],
                cfg.times[-1] * cfg.decay_rate,
            )
        )
    path = out / "nonmarkov.csv"
    write_csv(
        path,
        ["gamma_bar_ratio", "gamma_bar", "nm_degree", "t_min", "t_max", "gamma_t_max"],
        rows,
    )
    return [path]


def cmd_sweep(config: ModelConfig, out: Path, args) -> list[Path]:
    alphas = sample_pairs(args.pairs, seed=config.master_seed)
    sizes = fraction_sizes(config.n_env, args.fractions)
    rows = []
    for ratio, cfg in _sweep_configs(config, _ratio_list(args.ratios)):
        prop = diagonalize(build_coupling_matrix(cfg))
        trace = redundancy_trace(prop, cfg, sizes=sizes, threads=args.threads)
        degree = nm_degree(prop, alphas, cfg.times)
        nqd = non_monotonicity(trace)
        rbar = averaged_relative_redundancy(trace, cfg.times[0], cfg.times[-1])
        rows.append(
            (
                ratio,
                cfg.coupling_gamma_bar,
                degree,
                float("nan") if nqd is None else nqd,
                rbar,
                cfg.times[0],
                cfg.times[-1],
                cfg.times[-1] * cfg.decay_rate,
            )
        )
    path = out / "sweep.csv"
    write_csv(
        path,
        [
            "gamma_bar_ratio",
            "gamma_bar",
            "nm_degree",
            "nm_qd",
            "avg_relative_redundancy",
            "t_min",
            "t_max",
            "gamma_t_max",
        ],
        rows,
    )
    return [path]


def cmd_bph(config: ModelConfig, out: Path, args) -> list[Path]:
    prop = diagonalize(build_coupling_matrix(config))
    fractions = np.linspace(0.05, 1.0, args.f_points)
    times = [gt / config.decay_rate for gt in _ratio_list(args.t_gammas)]
    rows = []
    for t in times:
        state = BranchState.from_amplitudes(
            config.branch_a, config.branch_b, evolve(prop, config.alpha0, t)
        )
        curve = distinguishability_curve(
            state, fractions, samples=config.mc_samples, seed=config.master_seed
        )
        rng = np.random.default_rng(
            np.random.SeedSequence((config.master_seed & (2**64 - 1), 0xB9))
        )
        for frac, mean, err in zip(curve.fractions, curve.mean, curve.stderr):
            size = int(round(frac * config.n_env))
            cross, mp_dev = [], []
            for _ in range(min(config.mc_samples, 20)):
                frag = rng.choice(config.n_env, size=size, replace=False) + 1
                report = bph_report(state, frag)
                cross.append(report.cross_d)
                mp_dev.append(report.mp_deviation)
            rows.append(
                (
                    t,
                    t * config.decay_rate,
                    frac,
                    mean,
                    err,
                    float(np.mean(cross)),
                    float(np.mean(mp_dev)),
                )
            )
    path = out / "bph.csv"
    write_csv(
        path,
        [
            "t",
            "gamma_t",
            "fraction",
            "distinguishability",
            "distinguishability_stderr",
            "cross_d",
            "mp_deviation",
        ],
        rows,
    )
    return [path]


def cmd_concentration(config: ModelConfig, out: Path, args) -> list[Path]:
    total = abs(config.alpha0) ** 2
    rows = []
    for name, builder in (("rectangle", rectangular_profile), ("two_rectangles", two_rectangle_profile)):
        for n in (config.n_env, 2 * config.n_env):
            profile = builder(n, args.width, total)
            stats = concentration_stats(
                profile, args.fraction, samples=args.samples, seed=config.master_seed
            )
            rows.append(
                (
                    name,
                    n,
                    args.width,
                    args.fraction,
                    args.samples,
                    stats.mean,
                    stats.expected,
                    stats.variance,
                    stats.max_dev,
                )
            )
    path = out / "concentration.csv"
    write_csv(
        path,
        [
            "profile",
            "n",
            "width",
            "fraction",
            "samples",
            "sample_mean",
            "expected",
            "variance",
            "max_dev",
        ],
        rows,
    )
    return [path]


def cmd_oracle(config: ModelConfig, out: Path, args) -> list[Path]:
    from dataclasses import replace

    cfg = replace(
        config,
        n_env=args.n_env,
        omega_min=0.5,
        omega_max=1.5,
        gamma=0.08,
        alpha0=_as_complex(args.alpha0, "alpha0"),
    )
    oracle = FockOracle(cfg)
    prop = diagonalize(build_coupling_matrix(cfg))
    times = np.linspace(0.0, args.t_max, args.n_times)
    fragments = [(k,) for k in range(1, cfg.n_env + 1)] + [tuple(range(1, cfg.n_env + 1))]
    rows = []
    for t in times:
        state = BranchState.from_amplitudes(
            cfg.branch_a, cfg.branch_b, evolve(prop, cfg.alpha0, t)
        )
        h_branch = entropy(reduced_state(state, [0]))
        h_fock = oracle.entropy((0,), t)
        rows.append((t, t * cfg.decay_rate, "S", "entropy", h_branch, h_fock, abs(h_branch - h_fock)))
        for frag in fragments:
            mi_b = mutual_information(state, frag)
            mi_f = oracle.mutual_information(frag, t)
            label = "+".join(str(j) for j in frag)
            rows.append((t, t * cfg.decay_rate, label, "mutual_information", mi_b, mi_f, abs(mi_b - mi_f)))
    path = out / "oracle.csv"
    write_csv(
        path,
        ["t", "gamma_t", "fragment", "quantity", "branch_value", "fock_value", "abs_diff"],
        rows,
    )
    return [path]


_COMMANDS = {
    "dynamics": cmd_dynamics,
    "pip": cmd_pip,
    "redundancy": cmd_redundancy,
    "nonmarkov": cmd_nonmarkov,
    "sweep": cmd_sweep,
    "bph": cmd_bph,
    "concentration": cmd_concentration,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darwinbath",
        description="Oscillator-bath quantum Darwinism and non-Markovianity experiments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--threads", type=int, default=None, help="worker threads")
        p.add_argument(
            "--gamma-bar-ratio",
            type=float,
            help="resonant coupling as a multiple of gamma",
        )
        p.add_argument(
            "--fractions",
            choices=("coarse", "full"),
            default="coarse",
            help="fraction grid density for PIP-based commands",
        )
        p.add_argument("--samples", type=int, help="Monte-Carlo samples per cell")
        p.add_argument(
            "--t-max-gamma", type=float, help="time-grid extent in decay_rate*t units"
        )

    for name, help_text in (
        ("dynamics", "system/environment excitation time series"),
        ("pip", "averaged mutual information over (time, fraction)"),
        ("redundancy", "H(S), I(S:E), f_delta, R_delta, R_r time series"),
        ("nonmarkov", "non-Markovianity degree per coupling ratio"),
        ("sweep", "nm degree, f_delta non-monotonicity, averaged R_r per ratio"),
        ("bph", "fragment distinguishability, cross term, map deviation"),
        ("concentration", "fragment-sum statistics for prototype profiles"),
        ("oracle", "branch formalism vs truncated-Fock cross-check"),
    ):
        p = sub.add_parser(name, help=help_text)
        common(p)
        if name in ("nonmarkov", "sweep"):
            p.add_argument("--ratios", default="10,25,50,75,100")
            p.add_argument("--pairs", type=int, default=1000)
        if name == "bph":
            p.add_argument("--t-gammas", default="8.0", help="decay_rate*t instants")
            p.add_argument("--f-points", type=int, default=20)
        if name == "concentration":
            p.add_argument("--width", type=float, default=0.5)
            p.add_argument("--fraction", type=float, default=0.1)
            p.set_defaults(samples=400)
        if name == "oracle":
            p.add_argument("--n-env", type=int, default=2, choices=(1, 2, 3))
            p.add_argument("--alpha0", type=float, default=0.8)
            p.add_argument("--t-max", type=float, default=30.0)
            p.add_argument("--n-times", type=int, default=20)
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is None:
        args.threads = min(8, os.cpu_count() or 1)
    overrides = {
        "master_seed": args.seed,
        "gamma_bar_ratio": args.gamma_bar_ratio,
        "mc_samples": args.samples if args.command != "concentration" else None,
        "t_max_gamma": args.t_max_gamma,
    }
    config = load_config(args.config, overrides)

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}")
    if not out.is_dir():
        raise ConfigError(f"output path {out} is not a directory")

    started = time.perf_counter()
    outputs = _COMMANDS[args.command](config, out, args)
    elapsed = time.perf_counter() - started

    parameters = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config", "seed", "out")
    }
    manifest = Manifest(
        command=args.command,
        version=__version__,
        master_seed=config.master_seed,
        config=_config_snapshot(config),
        parameters=parameters,
        outputs=[str(p) for p in outputs],
        timings_s={"total": elapsed},
    )
    manifest_path = out / f"{args.command}_manifest.json"
    manifest.write(manifest_path)
    for path in outputs:
        print(f"wrote {path}")
    print(f"wrote {manifest_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
