"""Command-line experiment runner.

Usage::

    python -m logeit run CONFIG [--out DIR] [--seed N] [--format json|csv]
    python -m logeit --list-experiments

The configuration is an INI file; see :data:`SCHEMA` for the recognized
sections and keys.  Unknown sections or keys are rejected.

Exit codes: 0 when every gate passes, 1 when a gate fails, 2 for a bad
configuration, 3 for any other error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import boundary_trig_basis
from .calculus import spectral_log
from .derivatives import dlambda
from .errors import ConfigError, ExperimentFailure, LogEITError
from .fem import ConductivityField, nd_matrix
from .harness import (
    ConductivityEnsemble,
    ExperimentReport,
    bump,
    default_direction,
    dl_lipschitz_check,
    fd_check,
    inclusion,
    inclusion_perturbations,
    linearization_error_compare,
    loewner_heinz_check,
    monotonicity_check,
    neumann_series_check,
    norm_equivalence_survey,
    relative_boundedness_experiment,
    tau_rate_experiment,
)
from .io import emit_plotdata, sha256_file, write_operator_csv
from .mesh import MAX_LEVEL, build_disk_mesh
from .suite import SUITE, derive_seed

__all__ = ["EXPERIMENTS", "RunConfig", "load_config", "main", "run"]

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

#: section -> key -> (type, default); ``None`` marks an optional value
SCHEMA = {
    "run": {"experiment": (str, None), "seed": (int, 0), "out": (str, "results"), "format": (str, "json")},
    "mesh": {"level": (int, 4), "N": (int, 8)},
    "conductivity": {
        "kind": (str, "constant"),
        "value": (float, 1.0),
        "background": (float, 1.0),
        "inclusions": (str, ""),
        "seed": (int, None),
    },
    "grids": {
        "tau": ("floats", None),
        "eps": ("floats", [0.25]),
        "r": ("floats", [0.25]),
        "steps": ("floats", None),
        "N": ("ints", None),
        "contraction": ("floats", [0.2]),
    },
    "ensemble": {
        "count": (int, 20),
        "lower": (float, 0.5),
        "upper": (float, 2.0),
        "rule": (str, "mixed"),
        "contrast": (float, 2.0),
        "vectors": (int, 100),
    },
}


@dataclass
class RunConfig:
    """Validated run configuration (flattened ``section.key`` values)."""

    experiment: str
    level: int
    N: int
    conductivity: dict
    grids: dict
    ensemble: dict
    out: Path
    seed: int
    format: str = "json"
    source: str = field(default="", repr=False)

    def mesh(self):
        return build_disk_mesh(self.level)

    def basis(self, N: int | None = None):
        return boundary_trig_basis(self.mesh(), self.N if N is None else N)

    def sigma(self) -> ConductivityField:
        m = self.mesh()
        c = self.conductivity
        if c["kind"] == "constant":
            return ConductivityField.constant(m, c["value"])
        if c["kind"] == "inclusions":
            vals = np.full(m.n_triangles, c["background"])
            cen = m.centroids
            for x, y, rad, v in c["inclusion_list"]:
                mask = inclusion((x, y), rad)(cen[:, 0], cen[:, 1]) > 0
                vals[mask] = v
            return ConductivityField(m, vals)
        seed = self.seed if c["seed"] is None else c["seed"]
        return self.ensemble_obj(derive_seed(seed, 100), 1, constant_every=0).fields(m)[0]

    def ensemble_obj(self, seed: int, count: int | None = None, **kw) -> ConductivityEnsemble:
        e = self.ensemble
        return ConductivityEnsemble(
            seed, e["count"] if count is None else count, kw.pop("rule", e["rule"]), (e["lower"], e["upper"]), **kw
        )


def _parse_value(kind, raw: str, where: str):
    if kind in ("floats", "ints"):
        parts = [p for p in raw.replace(";", ",").split(",") if p.strip()]
        if not parts:
            raise ConfigError(f"{where}: grid is empty")
    try:
        if kind in ("floats", "ints"):
            conv = float if kind == "floats" else int
            return [conv(p) for p in parts]
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from exc


def load_config(path, out: str | None = None, seed: int | None = None, fmt: str | None = None) -> RunConfig:
    """Parse and validate a configuration file.

    Raises
    ------
    ConfigError
        On unreadable files, unknown sections or keys, bad values, empty
        grids, unknown experiments or a basis order the mesh cannot resolve.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        text = Path(path).read_text()
        cp.read_string(text, source=str(path))
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    vals = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
            vals[(sec, key)] = _parse_value(SCHEMA[sec][key][0], raw.strip(), f"[{sec}] {key}")
    get = {
        (sec, key): vals.get((sec, key), default) for sec, keys in SCHEMA.items() for key, (_, default) in keys.items()
    }
    if out is not None:
        get[("run", "out")] = out
    if seed is not None:
        get[("run", "seed")] = seed
    if fmt is not None:
        get[("run", "format")] = fmt

    exp = get[("run", "experiment")]
    if exp is None:
        raise ConfigError("[run] experiment is required")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; try --list-experiments")
    if get[("run", "format")] not in ("json", "csv"):
        raise ConfigError("[run] format must be json or csv")
    if get[("run", "seed")] < 0:
        raise ConfigError("[run] seed must be nonnegative")
    level, N = get[("mesh", "level")], get[("mesh", "N")]
    if not 0 <= level <= MAX_LEVEL:
        raise ConfigError(f"[mesh] level must lie in [0, {MAX_LEVEL}]")
    nb = 16 * 2**level

    def check_N(n, what):
        if n < 1 or 2 * n > nb // 4:
            raise ConfigError(f"{what} = {n} violates the aliasing rule 2N <= {nb // 4} at mesh level {level}")

    check_N(N, "[mesh] N")
    for n in get[("grids", "N")] or []:
        check_N(n, "[grids] N")

    cond = {k: get[("conductivity", k)] for k in SCHEMA["conductivity"]}
    if cond["kind"] not in ("constant", "inclusions", "random"):
        raise ConfigError("[conductivity] kind must be constant, inclusions or random")
    if cond["kind"] == "constant" and not cond["value"] > 0:
        raise ConfigError("[conductivity] value must be positive")
    incl = []
    if cond["inclusions"]:
        for item in cond["inclusions"].split(";"):
            parts = _parse_value("floats", item, "[conductivity] inclusions")
            if len(parts) != 4 or not parts[2] > 0 or not parts[3] > 0:
                raise ConfigError("[conductivity] inclusions are 'x, y, radius, value' separated by ';'")
            incl.append(tuple(parts))
    if cond["kind"] == "inclusions" and not incl:
        raise ConfigError("[conductivity] kind=inclusions needs an inclusions list")
    cond["inclusion_list"] = incl

    grids = {k: get[("grids", k)] for k in SCHEMA["grids"]}
    if any(not 0 < e <= 0.5 for e in grids["eps"]):
        raise ConfigError("[grids] eps values must lie in (0, 1/2]")
    if any(not -0.5 <= r <= 0.5 for r in grids["r"]):
        raise ConfigError("[grids] r values must lie in [-1/2, 1/2]")
    if grids["tau"] is not None and any(t < 0 for t in grids["tau"]):
        raise ConfigError("[grids] tau values must be nonnegative")
    if grids["steps"] is not None:
        st = np.asarray(grids["steps"])
        if st.size < 4 or np.any(np.diff(st) >= 0) or np.any(st <= 0):
            raise ConfigError("[grids] steps must be positive, strictly decreasing and at least four")
    ens = {k: get[("ensemble", k)] for k in SCHEMA["ensemble"]}
    if not 0 < ens["lower"] < ens["upper"]:
        raise ConfigError("[ensemble] needs 0 < lower < upper")
    if ens["count"] < 2 or ens["vectors"] < 1:
        raise ConfigError("[ensemble] count must be at least 2 and vectors at least 1")
    if ens["rule"] not in ("bumps", "inclusions", "mixed"):
        raise ConfigError("[ensemble] rule must be bumps, inclusions or mixed")
    return RunConfig(
        exp, level, N, cond, grids, ens, Path(get[("run", "out")]), int(get[("run", "seed")]),
        get[("run", "format")], text,
    )


# experiments driven by a configuration --------------------------------------


def _exp_tau_rate(cfg: RunConfig) -> list[ExperimentReport]:
    s, b = cfg.sigma(), cfg.basis()
    reps = []
    for eps in cfg.grids["eps"]:
        r = tau_rate_experiment(s, eps, b, taus=cfg.grids["tau"])
        r.name = f"tau_rate_eps{eps:g}"
        reps.append(r)
    return reps


def _exp_boundedness(cfg: RunConfig) -> list[ExperimentReport]:
    grid = cfg.grids["N"] or [n for n in (cfg.N // 8, cfg.N // 4, cfg.N // 2, cfg.N) if n >= 1]
    b = cfg.basis(max(grid))
    k1 = cfg.sigma().log()
    k2 = cfg.ensemble_obj(derive_seed(cfg.seed, 1), 1, constant_every=0).log_fields(b.mesh)[0]
    return [relative_boundedness_experiment(k1, k2, b, grid)]


def _monotone_partner(cfg: RunConfig, s: ConductivityField) -> ConductivityField:
    c = s.mesh.centroids
    return s * (1.0 + 0.5 * bump((0.2, -0.1), 0.3)(c[:, 0], c[:, 1]))


def _exp_monotonicity(cfg: RunConfig) -> list[ExperimentReport]:
    s = cfg.sigma()
    return [monotonicity_check(s, _monotone_partner(cfg, s), cfg.basis(), cfg.ensemble["vectors"], cfg.seed)]


def _exp_loewner_heinz(cfg: RunConfig) -> list[ExperimentReport]:
    s = cfg.sigma()
    if any(not 0 <= r <= 0.5 for r in cfg.grids["r"]):
        raise ConfigError("[grids] r values must lie in [0, 1/2] for loewner_heinz_check")
    reps = []
    for r in cfg.grids["r"]:
        rep = loewner_heinz_check(s, _monotone_partner(cfg, s), r, cfg.basis(), cfg.ensemble["vectors"], cfg.seed)
        rep.name = f"loewner_heinz_r{r:g}"
        reps.append(rep)
    return reps


def _exp_norm_equivalence(cfg: RunConfig) -> list[ExperimentReport]:
    if cfg.N % 2:
        raise ConfigError("[mesh] N must be even for norm_equivalence_survey (it also runs at N/2)")
    ens = cfg.ensemble_obj(derive_seed(cfg.seed, 2))
    return [norm_equivalence_survey(ens, cfg.grids["r"], cfg.basis(), cfg.ensemble["vectors"], cfg.seed)]


def _exp_lipschitz(cfg: RunConfig) -> list[ExperimentReport]:
    if cfg.N % 2:
        raise ConfigError("[mesh] N must be even for dl_lipschitz_check (it also runs at N/2)")
    b = cfg.basis()
    ks = cfg.ensemble_obj(derive_seed(cfg.seed, 3), 2 * cfg.ensemble["count"]).log_fields(b.mesh)
    return [dl_lipschitz_check(list(zip(ks[0::2], ks[1::2])), default_direction(b.mesh), b)]


def _exp_neumann(cfg: RunConfig) -> list[ExperimentReport]:
    s, b = cfg.sigma(), cfg.basis()
    g = default_direction(b.mesh)
    reps = []
    for t in cfg.grids["contraction"]:
        rep = neumann_series_check(s, s * (t * (1.0 + 0.1 * g)), b)
        rep.name = f"neumann_series_t{t:g}"
        reps.append(rep)
    return reps


def _exp_linearization(cfg: RunConfig) -> list[ExperimentReport]:
    b = cfg.basis()
    hs = inclusion_perturbations(b.mesh, cfg.ensemble["count"], cfg.ensemble["contrast"], derive_seed(cfg.seed, 4))
    return [linearization_error_compare(cfg.sigma().log(), hs, b)]


def _exp_fd(cfg: RunConfig) -> list[ExperimentReport]:
    s, b = cfg.sigma(), cfg.basis()
    eta = default_direction(b.mesh)
    rep = fd_check(lambda x: nd_matrix(x, b).matrix, dlambda(s, eta, b), s, eta, cfg.grids["steps"], name="fd_dlambda")
    return [rep]


def _exp_all(cfg: RunConfig) -> list[ExperimentReport]:
    return [f(cfg.seed) for f in SUITE.values()]


EXPERIMENTS = {
    "tau_rate_experiment": (_exp_tau_rate, "shift-error rates for each eps in [grids] eps"),
    "relative_boundedness_experiment": (_exp_boundedness, "log difference vs log growth over [grids] N"),
    "monotonicity_check": (_exp_monotonicity, "ND order for sigma and a raised copy"),
    "loewner_heinz_check": (_exp_loewner_heinz, "fractional-power order for each r in [grids] r"),
    "norm_equivalence_survey": (_exp_norm_equivalence, "sigma-norm sandwich and H^r equivalence drift"),
    "dl_lipschitz_check": (_exp_lipschitz, "DL difference ratio drift under N doubling"),
    "neumann_series_check": (_exp_neumann, "Taylor remainders for each t in [grids] contraction"),
    "linearization_error_compare": (_exp_linearization, "linearization error of Lambda vs L"),
    "fd_check": (_exp_fd, "finite-difference slope of the ND derivative"),
    "all": (_exp_all, "the full acceptance suite (" + ", ".join(SUITE) + ")"),
}


# output ----------------------------------------------------------------------


def _gates_csv(rep: ExperimentReport) -> str:
    lines = ["name,value,lower,upper,passed"]
    for g in rep.gates:
        lines.append(f"{g.name},{g.value!r},{'' if g.lower is None else repr(g.lower)},"
                     f"{'' if g.upper is None else repr(g.upper)},{g.passed}")
    return "\n".join(lines) + "\n"


def _write_outputs(cfg: RunConfig, reports: list[ExperimentReport]) -> dict:
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    written = []
    (out / "config.ini").write_text(cfg.source)
    written.append(out / "config.ini")
    for rep in reports:
        rdir = out / "reports"
        rdir.mkdir(exist_ok=True)
        if cfg.format == "json":
            p = rdir / f"{rep.name}.json"
            p.write_text(rep.to_json())
        else:
            p = rdir / f"{rep.name}.csv"
            p.write_text(_gates_csv(rep))
        written.append(p)
        tdir = out / "tables"
        tdir.mkdir(exist_ok=True)
        for t in rep.tables:
            p = tdir / (f"{rep.name}__{t}".replace("/", "_") + ".csv")
            p.write_text(rep.table_csv(t))
            written.append(p)
        written += emit_plotdata(rep, out / "plots")
    s, b = cfg.sigma(), cfg.basis()
    A = nd_matrix(s, b)
    meta = {"sigma": s.digest(), "level": cfg.level}
    written.append(write_operator_csv(A.matrix, out / "matrices" / "nd.csv", N=cfg.N, signature="-0.5,0.5", **meta))
    written.append(write_operator_csv(spectral_log(A), out / "matrices" / "log_nd.csv", **meta))
    manifest = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "passed": all(r.passed for r in reports),
        "files": [
            {"path": p.relative_to(out).as_posix(), "sha256": sha256_file(p), "bytes": p.stat().st_size}
            for p in sorted(set(written))
        ],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (out / "timings.json").write_text(
        json.dumps({r.name: r.runtime for r in reports}, indent=2, sort_keys=True) + "\n"
    )
    return manifest


def run(config_path, out: str | None = None, seed: int | None = None, fmt: str | None = None,
        stream=None) -> int:
    """Run the configured experiment and write its artifacts; returns the exit code."""
    stream = stream or sys.stdout
    try:
        cfg = load_config(config_path, out, seed, fmt)
        t0 = time.perf_counter()
        reports = EXPERIMENTS[cfg.experiment][0](cfg)
        _write_outputs(cfg, reports)
        for rep in reports:
            print(rep.summary(), file=stream)
        failed = [r.name for r in reports if not r.passed]
        print(f"wrote {cfg.out} in {time.perf_counter() - t0:.1f} s", file=stream)
        if failed:
            raise ExperimentFailure("gates failed in: " + ", ".join(failed))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExperimentFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAILED
    except LogEITError as exc:
        print(f"runtime error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - the exit code is the contract
        traceback.print_exc()
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logeit", description="Logarithmic EIT forward-map experiments.")
    p.add_argument("--list-experiments", action="store_true", help="list experiment names and exit")
    sub = p.add_subparsers(dest="command")
    r = sub.add_parser("run", help="run the experiment named in a config file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides [run] out)")
    r.add_argument("--seed", type=int, help="base seed (overrides [run] seed)")
    r.add_argument("--format", choices=("json", "csv"), help="report format (overrides [run] format)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.list_experiments:
        for name, (_, desc) in EXPERIMENTS.items():
            print(f"{name:34s} {desc}")
        return EXIT_OK
    if args.command != "run":
        _parser().print_usage(sys.stderr)
        return EXIT_CONFIG
    return run(args.config, args.out, args.seed, args.format)
