"""Config-driven command line front end.

Subcommands: ``solve`` (one eigenpair), ``sweep`` (increasing-p series),
``verify-limit`` (limit-eigenvalue characterization), ``residuals``
(limit-system residual report), ``check`` (inequality suites).

Config files are flat UTF-8 text, one ``section.key = value`` per line,
``#`` starts a comment line.  All CSV output uses ``.`` decimals at 17
significant digits and is written atomically (temp file + rename).
Exit codes: 0 success, 1 config error, 2 numerical failure,
3 assertion failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .geometry import Domain, GridFunction, build_disk, build_interval, build_rectangle, inradius, normalized_cone
from .energy import ProblemParams
from .eig_solver import SolverOptions, solve_eigenpair
from .asymptotics import (
    LimitParams,
    lambda_infinity,
    minmax_infimum,
    sweep_csv_text,
    sweep_p,
)
from .infinity_ops import residual_csv_text, residuals_limit_system
from .inequalities import run_all_suites

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_ASSERTION = 3


class ConfigError(Exception):
    pass


def parse_config(path: str) -> dict[str, str]:
    """Flat ``section.key = value`` file into a dict."""
    entries: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'section.key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if "." not in key:
            raise ConfigError(f"{path}:{lineno}: key {key!r} must be section.key")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


class Config:
    def __init__(self, entries: dict[str, str], path: str):
        self.entries = entries
        self.path = path
        self.used: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self.entries

    def _raw(self, key: str):
        if key not in self.entries:
            raise ConfigError(f"{self.path}: missing required key {key!r}")
        self.used.add(key)
        return self.entries[key]

    def get_str(self, key: str, default=None) -> str:
        if default is not None and key not in self.entries:
            return default
        return self._raw(key)

    def get_float(self, key: str, default=None) -> float:
        if default is not None and key not in self.entries:
            return default
        raw = self._raw(key)
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{self.path}: key {key!r}: not a number: {raw!r}") from exc

    def get_int(self, key: str, default=None) -> int:
        val = self.get_float(key, default=float(default) if default is not None else None)
        if val != int(val):
            raise ConfigError(f"{self.path}: key {key!r} must be an integer")
        return int(val)

    def get_bool(self, key: str, default: bool) -> bool:
        if key not in self.entries:
            return default
        raw = self._raw(key).lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{self.path}: key {key!r}: not a boolean: {raw!r}")

    def get_float_list(self, key: str) -> list[float]:
        raw = self._raw(key).replace(",", " ")
        try:
            return [float(tok) for tok in raw.split()]
        except ValueError as exc:
            raise ConfigError(f"{self.path}: key {key!r}: not a number list") from exc


def write_atomic(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename; no partial files on failure."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def build_domain(cfg: Config) -> Domain:
    shape = cfg.get_str("domain.shape")
    n = cfg.get_int("grid.n")
    if shape == "interval":
        return build_interval(cfg.get_float("domain.a"), cfg.get_float("domain.b"), n)
    if shape == "rectangle":
        return build_rectangle(
            cfg.get_float("domain.ax"), cfg.get_float("domain.ay"),
            cfg.get_float("domain.bx"), cfg.get_float("domain.by"),
            cfg.get_int("grid.nx", n), cfg.get_int("grid.ny", n))
    if shape == "disk":
        center = (cfg.get_float("domain.cx", 0.0), cfg.get_float("domain.cy", 0.0))
        return build_disk(center, cfg.get_float("domain.radius"), n)
    raise ConfigError(
        f"{cfg.path}: domain.shape must be interval, rectangle or disk, got {shape!r}")


def build_params(cfg: Config, need_p: bool = True) -> ProblemParams:
    p = cfg.get_float("params.p") if need_p or cfg.has("params.p") else None
    r = cfg.get_float("params.r")
    s = cfg.get_float("params.s")
    gamma = cfg.get_float("params.gamma") if cfg.has("params.gamma") else None
    alpha = cfg.get_float("params.alpha") if cfg.has("params.alpha") else None
    beta = cfg.get_float("params.beta") if cfg.has("params.beta") else None
    if alpha is not None and beta is not None and p is not None:
        if abs(alpha + beta - p) > 1e-9 * max(1.0, p):
            raise ConfigError(
                f"{cfg.path}: params.alpha + params.beta must equal params.p "
                f"(alpha={alpha}, beta={beta}, p={p})")
    try:
        return ProblemParams(p=p, r=r, s=s, alpha=alpha, beta=beta, gamma=gamma)
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: invalid params section: {exc}") from exc


def build_solver_options(cfg: Config) -> SolverOptions:
    try:
        return SolverOptions(
            max_iters=cfg.get_int("solver.max_iters", 5000),
            tol=cfg.get_float("solver.tol", 1e-9),
            step0=cfg.get_float("solver.step0", 1.0),
            armijo_shrink=cfg.get_float("solver.armijo_shrink", 0.5),
            seed=cfg.get_int("solver.seed", 0),
            positivity_projection=cfg.get_bool("solver.positivity_projection", True),
            trace=cfg.get_bool("solver.trace", False),
        )
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: invalid solver section: {exc}") from exc


def _out_dir(cfg: Config | None, args) -> Path:
    if args.out:
        return Path(args.out)
    if cfg is not None and cfg.has("output.dir"):
        return Path(cfg.get_str("output.dir"))
    return Path("out")


def _limit_params(cfg: Config, domain: Domain) -> LimitParams:
    try:
        return LimitParams(
            gamma=cfg.get_float("params.gamma"),
            r=cfg.get_float("params.r"),
            s=cfg.get_float("params.s"),
            R=inradius(domain),
        )
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: invalid limit parameters: {exc}") from exc


def cmd_solve(cfg: Config, args) -> int:
    domain = build_domain(cfg)
    params = build_params(cfg)
    opts = build_solver_options(cfg)
    pair = solve_eigenpair(domain, params, opts)
    out = _out_dir(cfg, args)

    rows = ["x,y,u,v" if domain.dim == 2 else "x,u,v"]
    for k in range(domain.n_nodes):
        xy = ",".join(f"{c:.17g}" for c in domain.coords[k])
        rows.append(f"{xy},{pair.u.values[k]:.17g},{pair.v.values[k]:.17g}")
    write_atomic(out / "eigenpair.csv", "\n".join(rows) + "\n")

    lam_root = math.exp(pair.log_lam / params.p)
    summary = ("lambda,lambda_root,log_lambda,residual,iterations,converged\n"
               f"{pair.lam:.17g},{lam_root:.17g},{pair.log_lam:.17g},"
               f"{pair.residual:.17g},{pair.iterations},{int(pair.converged)}\n")
    write_atomic(out / "summary.csv", summary)
    if opts.trace:
        lines = ["iter,lambda,step,residual"]
        lines += [f"{i},{lam:.17g},{st:.17g},{res:.17g}"
                  for i, lam, st, res in pair.trace_rows]
        write_atomic(out / "trace.csv", "\n".join(lines) + "\n")
    print(f"lambda={pair.lam:.17g} lambda_root={lam_root:.17g} "
          f"residual={pair.residual:.17g} iters={pair.iterations}")
    return EXIT_OK if pair.converged else EXIT_NUMERICAL


def cmd_sweep(cfg: Config, args) -> int:
    domain = build_domain(cfg)
    opts = build_solver_options(cfg)
    gamma = cfg.get_float("params.gamma")
    r = cfg.get_float("params.r")
    s = cfg.get_float("params.s")
    p_values = cfg.get_float_list("sweep.p_values")
    try:
        records = sweep_p(domain, gamma, r, s, p_values, opts)
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: invalid sweep: {exc}") from exc
    out = _out_dir(cfg, args)
    write_atomic(out / "sweep.csv", sweep_csv_text(records))
    for rec in records:
        print(f"p={rec.p:g} lambda_root={rec.lambda_root:.12g} gap={rec.gap:.12g}")
    return EXIT_OK if all(r.converged for r in records) else EXIT_NUMERICAL


def cmd_verify_limit(cfg: Config, args) -> int:
    domain = build_domain(cfg)
    lp = _limit_params(cfg, domain)
    lam_inf = lambda_infinity(lp)
    tol = cfg.get_float("verify.tolerance", 0.1)
    print(f"lambda_inf={lam_inf:.17g}")
    cross = minmax_infimum(lp)
    if abs(cross - lam_inf) > 1e-3 * max(1.0, lam_inf):
        print(f"FAIL formula cross-check: search={cross:.17g}")
        return EXIT_ASSERTION
    if not cfg.has("sweep.p_values"):
        print("PASS (analytic characterization only; no solves requested)")
        return EXIT_OK
    opts = build_solver_options(cfg)
    records = sweep_p(domain, lp.gamma, lp.r, lp.s,
                      cfg.get_float_list("sweep.p_values"), opts)
    out = _out_dir(cfg, args)
    write_atomic(out / "sweep.csv", sweep_csv_text(records))
    if not all(r.converged for r in records):
        print("FAIL solver did not converge on every row")
        return EXIT_NUMERICAL
    final = records[-1]
    print(f"final_gap={final.gap:.17g} tolerance={tol:.17g}")
    if final.gap <= tol and final.gap < records[0].gap:
        print("PASS")
        return EXIT_OK
    print("FAIL")
    return EXIT_ASSERTION


def cmd_residuals(cfg: Config, args) -> int:
    domain = build_domain(cfg)
    lp = _limit_params(cfg, domain)
    candidate = cfg.get_str("residuals.candidate", "cone")
    if candidate == "cone":
        cone = normalized_cone(domain)
        u, v = cone, cone
    elif candidate == "solve":
        params = build_params(cfg)
        opts = build_solver_options(cfg)
        pair = solve_eigenpair(domain, params, opts)
        if not pair.converged:
            print("solver did not converge")
            return EXIT_NUMERICAL
        weight = pair.u.values**lp.gamma * pair.v.values ** (1.0 - lp.gamma)
        top = float(weight.max())
        if top <= 0:
            return EXIT_NUMERICAL
        scale = top ** (-1.0)  # joint rescale puts the coupling sup at 1
        u = GridFunction(domain, pair.u.values * scale)
        v = GridFunction(domain, pair.v.values * scale)
    else:
        raise ConfigError(
            f"{cfg.path}: residuals.candidate must be 'cone' or 'solve', got {candidate!r}")
    report = residuals_limit_system(u, v, lp)
    out = _out_dir(cfg, args)
    write_atomic(out / "residuals.csv", residual_csv_text(report))
    print(f"max_abs_residual={report.max_abs_residual:.17g} "
          f"signed_min={report.signed_min:.17g} signed_max={report.signed_max:.17g}")
    return EXIT_OK


def cmd_check(cfg: Config | None, args) -> int:
    seed = 2024
    if cfg is not None and cfg.has("check.seed"):
        seed = cfg.get_int("check.seed")
    results = run_all_suites(seed=seed)
    lines = [res.json_line() for res in results]
    out = _out_dir(cfg, args)
    write_atomic(out / "check.jsonl", "\n".join(lines) + "\n")
    for line in lines:
        print(line)
    return EXIT_OK if all(res.passed for res in results) else EXIT_ASSERTION


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plapsys",
        description="Coupled local/nonlocal p-Laplacian eigenpairs and their "
                    "large-p limit")
    parser.add_argument("command",
                        choices=["solve", "sweep", "verify-limit", "residuals", "check"])
    parser.add_argument("--config", help="path to a section.key = value config file")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--deterministic", action="store_true",
                        help="force fixed-order reductions (always on in this build)")
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads, 0 = auto (single-threaded build)")
    args = parser.parse_args(argv)

    try:
        cfg = None
        if args.config is not None:
            cfg = Config(parse_config(args.config), args.config)
        elif args.command != "check":
            raise ConfigError(f"subcommand {args.command!r} requires --config")
        handler = {
            "solve": cmd_solve,
            "sweep": cmd_sweep,
            "verify-limit": cmd_verify_limit,
            "residuals": cmd_residuals,
            "check": cmd_check,
        }[args.command]
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ZeroDivisionError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
