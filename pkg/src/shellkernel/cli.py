"""Command-line interface.

    shellkernel profile --k 10000 --A 1 --B 2 --t-start 5000 --t-stop 21000 --points 50 --out p.csv
    shellkernel shells  --k 10000 --A 1 --B 2 --a-list 1,2,3 --out shells.json
    shellkernel verify  --suite inside --k 10000 --A 1 --B 2
    shellkernel ja      --k 10000 --a-list 1,2,4

Settings may also come from ``--config FILE`` holding ``key = value``
lines; flags given on the command line win.  Exit status: 0 ok, 1 a check
failed, 2 bad configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import phgseries
from .errors import ConvergenceError, DomainError
from .kernel import KernelContext, bergman
from .oracle import exhaustive_kernel, pure_J_exact
from .phgseries import PhgSeries
from .quadrature import integrate_J, laplace_J, trapezoid_J_oracle
from .shells import (
    TOL_GAP,
    TOL_PLATEAU,
    TOL_SHELL,
    CheckResult,
    GeometricPrefactor,
    inside_regime,
    neck_regime,
    profile,
    verify_concentration,
    verify_inside,
    verify_neck,
    verify_subspace,
)
from .weight import ModelWeight

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
SUITES = ("inside", "neck", "concentration", "subspace", "oracles", "series")
K_RANGE = (100, 10**7)


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """17 significant digits, locale independent."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return "%.17g" % float(x)


@dataclass
class RunConfig:
    k: int = 10**4
    A: float = 0.0
    B: float = 0.0
    kappa: PhgSeries = field(default_factory=PhgSeries)
    n: int = 1
    prefactor_enabled: bool = False
    rel_tol: float = 1e-10
    output_path: str = "-"
    t_start: float | None = None
    t_stop: float | None = None
    points: int = 101
    a_list: list[int] | None = None
    suite: str | None = None
    json_path: str | None = None

    def validate(self) -> None:
        if not K_RANGE[0] <= self.k <= K_RANGE[1]:
            raise ConfigError(f"k must lie in [{K_RANGE[0]}, {K_RANGE[1]}], got {self.k}")
        if not 1e-12 <= self.rel_tol <= 1e-2:
            raise ConfigError(f"rel-tol must lie in [1e-12, 1e-2], got {self.rel_tol}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.points < 0:
            raise ConfigError("points must be nonnegative")

    def weight(self) -> ModelWeight:
        try:
            return ModelWeight(self.A, self.B, self.kappa)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def context(self) -> KernelContext:
        try:
            return KernelContext(self.k, self.weight(), self.rel_tol)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def prefactor(self) -> GeometricPrefactor:
        return GeometricPrefactor(self.n, self.prefactor_enabled)


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_a_list(s: str) -> list[int]:
    s = s.strip()
    if not s:
        return []
    try:
        return [int(x) for x in s.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise ConfigError(f"bad a-list {s!r}") from exc


def _kappa_from_terms(terms) -> PhgSeries:
    acc = {}
    for c, i, j in terms:
        try:
            key = (Fraction(i), int(j))
            acc[key] = acc.get(key, 0.0) + float(c)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad kappa term {c} {i} {j}") from exc
    return PhgSeries(acc)


_FILE_KEYS = {
    "k": ("k", int),
    "a": ("A", float),
    "b": ("B", float),
    "n": ("n", int),
    "prefactor": ("prefactor_enabled", _parse_bool),
    "rel_tol": ("rel_tol", float),
    "out": ("output_path", str),
    "t_start": ("t_start", float),
    "t_stop": ("t_stop", float),
    "points": ("points", int),
    "a_list": ("a_list", _parse_a_list),
    "suite": ("suite", str),
    "json": ("json_path", str),
}


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``kappa_term = c i_num/i_den j`` may repeat."""
    values: dict = {}
    kappa = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key.lower() == "kappa_term":
            parts = value.split()
            if len(parts) != 3:
                raise ConfigError(f"{path}:{lineno}: kappa_term needs 'c i_num/i_den j'")
            kappa.append(parts)
            continue
        norm = key.lower()
        if norm not in _FILE_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        attr, conv = _FILE_KEYS[norm]
        try:
            values[attr] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    if kappa:
        values["kappa_terms"] = kappa
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    if args.config:
        merged.update(read_config_file(args.config))
    flag_map = {
        "k": "k", "A": "A", "B": "B", "n": "n", "prefactor": "prefactor_enabled",
        "rel_tol": "rel_tol", "out": "output_path", "t_start": "t_start", "t_stop": "t_stop",
        "points": "points", "a_list": "a_list", "suite": "suite", "json": "json_path",
    }
    for dest, attr in flag_map.items():
        v = getattr(args, dest, None)
        if v is not None:
            merged[attr] = v
    if getattr(args, "kappa_term", None):
        merged["kappa_terms"] = args.kappa_term
    kappa_terms = merged.pop("kappa_terms", [])
    cfg = RunConfig(**merged)
    cfg.kappa = _kappa_from_terms(kappa_terms)
    cfg.validate()
    return cfg


def _open_out(path: str):
    if path in ("-", ""):
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _write_text(path: str, text: str) -> None:
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


# -- commands -----------------------------------------------------------------

def cmd_profile(cfg: RunConfig) -> int:
    ctx = cfg.context()
    k = cfg.k
    start = cfg.t_start if cfg.t_start is not None else 2.0 * math.sqrt(k) * math.log(k)
    stop = cfg.t_stop if cfg.t_stop is not None else 2.0 * k + math.sqrt(k) * math.log(k)
    if start < ctx.t_lower:
        raise ConfigError(f"grid start {start} below k^(1/3) = {ctx.t_lower:.6g}")
    grid = np.linspace(start, stop, cfg.points) if cfg.points else []
    rows = profile(ctx, grid, cfg.prefactor)
    lines = ["t,tau,log_bergman,dominant_index,log_rho_pred"]
    for r in rows:
        lines.append(",".join([fmt(r.t), fmt(r.t), fmt(r.log_bergman), fmt(r.dominant_index), fmt(r.log_rho_pred)]))
        if r.error:
            print(f"t={fmt(r.t)}: {r.error}", file=sys.stderr)
    _write_text(cfg.output_path, "\n".join(lines) + "\n")
    return EXIT_OK


def _check_inside_list(cfg: RunConfig, a_list) -> None:
    top = inside_regime(cfg.k)
    for a in a_list:
        if not 1 <= a <= top:
            raise ConfigError(f"a = {a} outside the shell regime [1, sqrt(k)/log k = {top:.4g}]")


def cmd_shells(cfg: RunConfig) -> int:
    a_list = [1, 2, 3] if cfg.a_list is None else cfg.a_list
    _check_inside_list(cfg, a_list)
    reports = verify_inside(cfg.context(), a_list) if a_list else []
    _write_text(cfg.output_path, json.dumps([r.to_dict() for r in reports], indent=2) + "\n")
    return EXIT_OK


def cmd_ja(cfg: RunConfig) -> int:
    a_list = [1, 2, 3] if cfg.a_list is None else cfg.a_list
    if any(a < 1 for a in a_list):
        raise ConfigError("a must be >= 1")
    w = cfg.weight()
    lines = ["a,t_a,log_J,log_J_laplace,laplace_ratio"]
    for a in a_list:
        res = integrate_J(w, cfg.k, a, cfg.rel_tol)
        lap = laplace_J(w, cfg.k, a)
        lines.append(",".join([fmt(a), fmt(res.peak), fmt(res.log_value), fmt(lap), fmt(math.exp(lap - res.log_value))]))
    _write_text(cfg.output_path, "\n".join(lines) + "\n")
    return EXIT_OK


def _suite_inside(cfg: RunConfig) -> list[CheckResult]:
    a_list = [1, 2, 3] if cfg.a_list is None else cfg.a_list
    _check_inside_list(cfg, a_list)
    out = []
    for rep in verify_inside(cfg.context(), a_list):
        a = rep.spec.a
        measured = {
            "shell_value": (abs(rep.measured_shell_log - rep.predicted_shell_log), TOL_SHELL),
            "gap": (rep.gap_suppression_log, -TOL_GAP),
            "dominant": (rep.dominant_index, a),
            "plateau": (max(abs(x) for x in rep.plateau_log), TOL_PLATEAU),
        }
        for name, ok in rep.checks.items():
            value, bound = measured[name]
            out.append(CheckResult(f"{name}[a={a}]", ok, float(value), float(bound), rep.to_dict()))
    return out


def _default_neck_samples(k: int) -> list[int]:
    lo, hi = neck_regime(k)
    return sorted({math.floor(lo) + 1, round(math.sqrt(k)), math.floor(0.9 * hi)})


def _suite_neck(cfg: RunConfig) -> list[CheckResult]:
    samples = _default_neck_samples(cfg.k) if cfg.a_list is None else cfg.a_list
    lo, hi = neck_regime(cfg.k)
    for a in samples:
        if not lo < a <= math.ceil(hi):
            raise ConfigError(f"neck sample {a} outside (sqrt(k)/log k, sqrt(k) log k]")
    return verify_neck(cfg.context(), samples, cfg.prefactor)


def _suite_concentration(cfg: RunConfig) -> list[CheckResult]:
    a_list = [1, 2, 3] if cfg.a_list is None else cfg.a_list
    _check_inside_list(cfg, a_list)
    return verify_concentration(cfg.context(), a_list)


def _suite_subspace(cfg: RunConfig) -> list[CheckResult]:
    a_list = [1, 2, 3] if cfg.a_list is None else cfg.a_list
    _check_inside_list(cfg, a_list)
    return verify_subspace(cfg.context(), a_list)


def _suite_oracles(cfg: RunConfig) -> list[CheckResult]:
    w = cfg.weight()
    k = cfg.k
    out = []
    if w.is_pure:
        for a in range(1, 6):
            if a * k ** (1 / 3) > k:
                break
            got = integrate_J(w, k, a, cfg.rel_tol).log_value
            ref = pure_J_exact(k, a)
            out.append(CheckResult(f"gamma_oracle[a={a}]", abs(got - ref) <= 1e-8, abs(got - ref), 1e-8))
    for a in (1, 2):
        got = integrate_J(w, k, a, cfg.rel_tol).log_value
        ref = trapezoid_J_oracle(w, k, a, 10**6)
        out.append(CheckResult(f"trapezoid_oracle[a={a}]", abs(got - ref) <= 1e-8, abs(got - ref), 1e-8))
    ctx = cfg.context()
    rng = np.random.default_rng(20240601)
    t_lo = ctx.t_domain
    worst = 0.0
    for t in rng.uniform(t_lo, 2.0 * k + 3.0 * math.sqrt(k) * math.log(k), 10):
        worst = max(worst, abs(bergman(ctx, float(t)).log_total - exhaustive_kernel(ctx, float(t))))
    out.append(CheckResult("exhaustive_kernel", worst <= 1e-12, worst, 1e-12))
    return out


def random_series(rng, n_terms: int = 5, order: int = 6, min_expo: Fraction = Fraction(1, 2)) -> PhgSeries:
    acc = {}
    while len(acc) < n_terms:
        q = int(rng.integers(1, 5))
        p = int(rng.integers(1, order * q + 1))
        i = Fraction(p, q)
        if i < min_expo:
            continue
        acc[(i, int(rng.integers(0, 3)))] = float(rng.uniform(-1, 1))
    return PhgSeries(acc, order=order)


def _max_coeff(s: PhgSeries) -> float:
    return max((abs(t.coeff) for t in s), default=0.0)


def series_roundtrip_residuals(count: int = 100, seed: int = 7) -> tuple[float, float]:
    """Largest residual coefficient of ``exp(log1p(s)) - (1+s)`` and of
    ``shift(shift(s, c1), c2) - shift(s, c1 + c2)`` over random series."""
    rng = np.random.default_rng(seed)
    one = PhgSeries({(0, 0): 1.0})
    worst_exp = worst_shift = 0.0
    for _ in range(count):
        s = random_series(rng)
        back = phgseries.exp(phgseries.log1p(s)) - (one + s)
        worst_exp = max(worst_exp, _max_coeff(back))
        c1, c2 = rng.uniform(-1, 1, 2)
        lhs = phgseries.shift_substitute(phgseries.shift_substitute(s, c1), c2)
        rhs = phgseries.shift_substitute(s, c1 + c2)
        worst_shift = max(worst_shift, _max_coeff(lhs - rhs))
    return worst_exp, worst_shift


def _suite_series(cfg: RunConfig) -> list[CheckResult]:
    e, s = series_roundtrip_residuals()
    return [
        CheckResult("exp_log1p_roundtrip", e <= 1e-12, e, 1e-12),
        CheckResult("shift_additivity", s <= 1e-12, s, 1e-12),
    ]


_SUITE_FUNCS = {
    "inside": _suite_inside,
    "neck": _suite_neck,
    "concentration": _suite_concentration,
    "subspace": _suite_subspace,
    "oracles": _suite_oracles,
    "series": _suite_series,
}


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    if suite not in _SUITE_FUNCS:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    results = _SUITE_FUNCS[suite](cfg)
    width = max((len(r.name) for r in results), default=4)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  value={fmt(r.value)}  bound={fmt(r.bound)}")
    ok = all(r.passed for r in results)
    print(f"suite {suite}: {sum(r.passed for r in results)}/{len(results)} passed")
    if cfg.json_path:
        Path(cfg.json_path).write_text(json.dumps([r.to_dict() for r in results], indent=2) + "\n")
    return EXIT_OK if ok else EXIT_FAILED


# -- argument parsing ---------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="file of 'key = value' lines")
    p.add_argument("--k", type=int)
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--kappa-term", nargs=3, action="append", metavar=("C", "I", "J"),
                   help="kappa term C (log t)^J / t^I with rational I, repeatable")
    p.add_argument("--n", type=int, help="complex dimension for the geometric prefactor")
    p.add_argument("--prefactor", action="store_const", const=True, default=None,
                   help="apply (k/pi)^(n-1) to predicted densities")
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--out", help="output file ('-' for stdout)")
    return p


def make_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="shellkernel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", parents=[common], help="kernel along a t grid (CSV)")
    p.add_argument("--t-start", type=float)
    p.add_argument("--t-stop", type=float)
    p.add_argument("--points", type=int)

    p = sub.add_parser("shells", parents=[common], help="shell reports (JSON)")
    p.add_argument("--a-list", type=_parse_a_list)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--suite")
    p.add_argument("--a-list", type=_parse_a_list)
    p.add_argument("--json", help="write per-check details to this file")

    p = sub.add_parser("ja", parents=[common], help="log J_a, t_a and the Laplace comparison (CSV)")
    p.add_argument("--a-list", type=_parse_a_list)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        if args.command == "profile":
            return cmd_profile(cfg)
        if args.command == "shells":
            return cmd_shells(cfg)
        if args.command == "ja":
            return cmd_ja(cfg)
        if not cfg.suite:
            raise ConfigError("verify needs --suite")
        return cmd_verify(cfg, cfg.suite)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ConvergenceError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
