"""Shell geometry and model-level checks of the shell, neck and subspace
statements.

Distances to the divisor are identified with the fibre coordinate ``t``
(they differ by ``O(log k / sqrt k)`` at the relevant points, which is left
inside the tolerance budgets below).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .kernel import KernelContext, bergman, bergman_truncated, log_lambda, mode_fraction
from .weight import ModelWeight, log_h0

__all__ = [
    "ShellSpec",
    "ShellReport",
    "GeometricPrefactor",
    "CheckResult",
    "ProfileRow",
    "shell_spec",
    "predicted_peak",
    "apply_prefactor",
    "verify_inside",
    "verify_far",
    "verify_neck",
    "verify_subspace",
    "verify_concentration",
    "profile",
    "inside_regime",
    "neck_regime",
]

TOL_SHELL = 0.2
TOL_GAP = 100.0
TOL_PLATEAU = 0.05
TOL_SUBSPACE = 50.0
TOL_FAR = 100.0
NEGLIGIBLE = 1e-20


def inside_regime(k: int) -> float:
    """Largest shell index covered by the shell statements, ``sqrt(k)/log k``."""
    return math.sqrt(k) / math.log(k)


def neck_regime(k: int) -> tuple[float, float]:
    return math.sqrt(k) / math.log(k), math.sqrt(k) * math.log(k)


@dataclass(frozen=True)
class ShellSpec:
    a: int
    tau_shell: float
    tau_gap: float


@dataclass(frozen=True)
class GeometricPrefactor:
    """The factor ``(k/pi)^(n-1)`` between fibre and manifold densities."""

    n: int = 1
    enabled: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass
class ShellReport:
    spec: ShellSpec
    measured_shell_log: float
    predicted_shell_log: float
    gap_suppression_log: float
    dominant_index: int
    plateau_log: tuple[float, float]
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return math.exp(self.measured_shell_log - self.predicted_shell_log)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "a": self.spec.a,
            "tau_shell": self.spec.tau_shell,
            "tau_gap": self.spec.tau_gap,
            "log_measured": self.measured_shell_log,
            "log_predicted": self.predicted_shell_log,
            "log_gap_suppression": self.gap_suppression_log,
            "pass": self.passed,
        }


@dataclass
class CheckResult:
    """One named check with the measured value and what it was compared to."""

    name: str
    passed: bool
    value: float
    bound: float
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed, "value": self.value, "bound": self.bound, **self.detail}


def shell_spec(w: ModelWeight, k: int, a: int) -> ShellSpec:
    if int(a) != a or a < 1 or a > inside_regime(k):
        raise DomainError(f"shell index {a} outside [1, sqrt(k)/log k = {inside_regime(k):.4g}]")
    s = 2.0 * k / a
    tau = s - 0.5 * w.B * math.log(s)
    return ShellSpec(int(a), tau, tau - k / (a * (a + 1.0)))


def predicted_peak(k: int, a: int) -> float:
    """``log(2 k^{3/2} / (sqrt(pi) a))``."""
    return math.log(2.0) + 1.5 * math.log(k) - 0.5 * math.log(math.pi) - math.log(a)


def apply_prefactor(p: GeometricPrefactor, k: int, log_b: float) -> float:
    if not p.enabled:
        return log_b
    return log_b + (p.n - 1) * (math.log(k) - math.log(math.pi))


def verify_inside(
    ctx: KernelContext,
    a_list,
    tol_shell: float = TOL_SHELL,
    tol_gap: float = TOL_GAP,
    tol_plateau: float = TOL_PLATEAU,
) -> list[ShellReport]:
    """Shell value, gap suppression, dominance and plateau for each ``a``."""
    reports = []
    for a in sorted(a_list):
        spec = shell_spec(ctx.weight, ctx.k, a)
        shell = bergman(ctx, spec.tau_shell)
        gap = bergman(ctx, spec.tau_gap)
        plateau = tuple(bergman(ctx, spec.tau_shell + d).log_total - shell.log_total for d in (-1.0, 1.0))
        predicted = predicted_peak(ctx.k, a)
        rep = ShellReport(
            spec=spec,
            measured_shell_log=shell.log_total,
            predicted_shell_log=predicted,
            gap_suppression_log=gap.log_total - shell.log_total,
            dominant_index=shell.dominant_index,
            plateau_log=plateau,
        )
        rep.checks = {
            "shell_value": abs(shell.log_total - predicted) <= tol_shell,
            "gap": rep.gap_suppression_log <= -tol_gap,
            "dominant": shell.dominant_index == a,
            "plateau": max(abs(x) for x in plateau) <= tol_plateau,
        }
        reports.append(rep)
    return reports


def verify_far(ctx: KernelContext, margin: float = TOL_FAR) -> CheckResult:
    """Beyond ``t_1 + sqrt(k) log k`` the kernel is negligible against the first shell."""
    t1 = ctx.peak(1)
    t = t1 + math.sqrt(ctx.k) * math.log(ctx.k)
    drop = bergman(ctx, t).log_total - bergman(ctx, t1).log_total
    return CheckResult("far_region", drop <= -margin, drop, -margin, {"t": t})


def verify_neck(ctx: KernelContext, a_samples, prefactor: GeometricPrefactor | None = None) -> list[CheckResult]:
    """Two-sided bound ``k sqrt(k)/a < B(t_a) < 4k + 2k sqrt(k)/a`` and the
    upper bound ``4k + 3 sqrt(k) tau`` at ``tau = t_a``."""
    prefactor = prefactor or GeometricPrefactor()
    lo_a, hi_a = neck_regime(ctx.k)
    k = ctx.k
    out = []
    for a in sorted(a_samples):
        if int(a) != a or not lo_a < a <= math.ceil(hi_a):
            raise DomainError(f"neck sample {a} outside (sqrt(k)/log k, sqrt(k) log k]")
        t_a = ctx.peak(a)
        val = bergman(ctx, t_a)
        lower = 1.5 * math.log(k) - math.log(a)
        upper = math.log(4.0 * k + 2.0 * k**1.5 / a)
        tau_form = math.log(4.0 * k + 3.0 * math.sqrt(k) * t_a)
        rho = apply_prefactor(prefactor, k, val.log_total)
        tau_bound = apply_prefactor(prefactor, k, tau_form)
        detail = {"a": int(a), "t_a": t_a, "log_lower": lower, "log_upper": upper}
        out.append(CheckResult(f"neck_lower[a={a}]", lower < val.log_total, val.log_total, lower, detail))
        out.append(CheckResult(f"neck_upper[a={a}]", val.log_total < upper, val.log_total, upper, detail))
        out.append(CheckResult(f"neck_tau[a={a}]", rho <= tau_bound, rho, tau_bound, detail))
    return out


def verify_subspace(
    ctx: KernelContext, a_list, points: int = 20, threshold: float = TOL_SUBSPACE
) -> list[CheckResult]:
    """``log(B_{k+1,a+1} / B_{k+1}) <= -threshold`` on ``[t_a - k/(2a^2), t_1]``."""
    out = []
    t1 = ctx.peak(1)
    for a in sorted(a_list):
        if a > inside_regime(ctx.k):
            raise DomainError(f"subspace check needs a <= sqrt(k)/log k, got {a}")
        grid = np.linspace(ctx.peak(a) - ctx.k / (2.0 * a * a), t1, points)
        worst, worst_t = -math.inf, None
        for t in grid:
            t = float(t)
            r = bergman_truncated(ctx, t, a + 1).log_total - bergman(ctx, t).log_total
            if r > worst:
                worst, worst_t = r, t
        out.append(CheckResult(f"subspace[a={a}]", worst <= -threshold, worst, -threshold, {"a": int(a), "t": worst_t}))
    return out


def verify_concentration(ctx: KernelContext, a_list, threshold: float = TOL_SUBSPACE) -> list[CheckResult]:
    """Mode ``a`` carries the kernel at ``t_a``, the neighbouring modes are
    negligible on ``|t - t_a| <= k/(2a^2)``, and the mass of mode ``a`` is
    negligible at ``t_a - 3 sqrt(k) log k / a``."""
    out = []
    k = ctx.k
    for a in sorted(a_list):
        t_a = ctx.peak(a)
        frac = mode_fraction(ctx, t_a, a)
        out.append(CheckResult(f"mode_fraction[a={a}]", frac >= 1.0 - NEGLIGIBLE, frac, 1.0 - NEGLIGIBLE, {"t": t_a}))

        t_in = t_a - k / (2.0 * a * a)
        above = bergman_truncated(ctx, t_in, a + 1).log_total - (log_lambda(ctx, a, t_in) + log_h0(ctx.weight, t_in))
        out.append(CheckResult(f"upper_modes[a={a}]", above <= -threshold, above, -threshold, {"t": t_in}))
        if a > 1:
            t_out = t_a + k / (2.0 * a * a)
            own = log_lambda(ctx, a, t_out)
            below = max(log_lambda(ctx, i, t_out) for i in range(1, a)) + math.log(a - 1) - own
            out.append(CheckResult(f"lower_modes[a={a}]", below <= -threshold, below, -threshold, {"t": t_out}))

        t_deep = t_a - 3.0 * math.sqrt(k) * math.log(k) / a
        if t_deep >= ctx.t_lower:
            mass = log_lambda(ctx, a, t_deep) + log_h0(ctx.weight, t_deep)
            bound = math.log(NEGLIGIBLE)
            out.append(CheckResult(f"localized[a={a}]", mass <= bound, mass, bound, {"t": t_deep}))
    return out


@dataclass(frozen=True)
class ProfileRow:
    t: float
    log_bergman: float | None
    dominant_index: int | None
    log_rho_pred: float | None
    error: str | None = None


def profile(ctx: KernelContext, t_grid, prefactor: GeometricPrefactor | None = None) -> list[ProfileRow]:
    """Kernel along a grid; points that cannot be evaluated keep their reason."""
    prefactor = prefactor or GeometricPrefactor()
    rows = []
    for t in t_grid:
        t = float(t)
        try:
            v = bergman(ctx, t)
        except (DomainError, ConvergenceError) as exc:
            rows.append(ProfileRow(t, None, None, None, str(exc)))
            continue
        rows.append(ProfileRow(t, v.log_total, v.dominant_index, apply_prefactor(prefactor, ctx.k, v.log_total)))
    return rows
