"""Model parameters, admissibility thresholds and coercivity constants.

Conventions: the charge is fixed to ``e = -1`` and ``omega > 0``; the
potential is either a constant ``m**2`` or a coercive radial profile given by
an expression in ``r``.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, InfeasibleError

__all__ = [
    "PotentialSpec",
    "ModelParams",
    "AdmissibilityReport",
    "CoercivityConstants",
    "omega_gap",
    "alpha0",
    "check_admissible",
    "feasible_epsilon",
    "normalization_constant",
    "negative_part",
]

_EXPR_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tanh": np.tanh,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "abs": np.abs,
    "minimum": np.minimum,
    "maximum": np.maximum,
}
_EXPR_CONSTS = {"pi": math.pi, "e": math.e}
_EXPR_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load,
    ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub,
    ast.UAdd, ast.Mod,
)


def _compile_expr(expr: str):
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _EXPR_NODES):
            raise DomainError(f"unsupported syntax in potential expression: {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id not in _EXPR_FUNCS and node.id not in _EXPR_CONSTS and node.id != "r":
            raise DomainError(f"unknown name {node.id!r} in potential expression")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _EXPR_FUNCS):
            raise DomainError("only whitelisted functions may be called in a potential expression")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise DomainError("only numeric constants are allowed in a potential expression")
    return compile(tree, "<potential>", "eval")


@dataclass(frozen=True)
class PotentialSpec:
    """Radial potential ``V``.

    ``kind='constant'`` means ``V = m**2``; ``kind='coercive'`` evaluates
    ``expr`` (a numpy expression in ``r``). ``v0`` is ``inf V``; when omitted
    for a coercive potential it is the minimum over a fine grid of [0, 50].
    """

    kind: str = "constant"
    m: Optional[float] = None
    expr: Optional[str] = None
    v0: Optional[float] = None
    _code: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "constant":
            if self.m is None or not np.isfinite(self.m) or self.m <= 0:
                raise DomainError("constant potential needs m > 0")
        elif self.kind == "coercive":
            if not self.expr:
                raise DomainError("coercive potential needs an expression in r")
            object.__setattr__(self, "_code", _compile_expr(self.expr))
            if self.v0 is None:
                with np.errstate(all="ignore"):
                    vals = self(np.linspace(0.0, 50.0, 100001))
                object.__setattr__(self, "v0", float(np.nanmin(vals)))
            if not np.isfinite(self.v0):
                raise DomainError("inf V must be finite")
        else:
            raise DomainError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def constant(cls, m: float) -> "PotentialSpec":
        return cls(kind="constant", m=float(m))

    @classmethod
    def coercive(cls, expr: str, v0: Optional[float] = None) -> "PotentialSpec":
        return cls(kind="coercive", expr=expr, v0=v0)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def V0(self) -> float:
        if self.is_constant:
            return float(self.m) ** 2
        return float(self.v0)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.is_constant:
            return np.full_like(r, float(self.m) ** 2)
        env = {"r": r, **_EXPR_FUNCS, **_EXPR_CONSTS}
        out = eval(self._code, {"__builtins__": {}}, env)
        return np.broadcast_to(np.asarray(out, dtype=float), r.shape).copy()

    def to_dict(self) -> dict:
        if self.is_constant:
            return {"kind": "constant", "m": float(self.m)}
        return {"kind": "coercive", "expr": self.expr, "v0": float(self.v0)}


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of the standing-wave system (``e = -1`` fixed)."""

    s: float
    alpha: float
    p: float
    omega: float
    potential: PotentialSpec

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise DomainError(f"s must lie in (0, 1), got {self.s}")
        if not 2.0 < self.p < 6.0:
            raise DomainError(f"p must lie in (2, 6), got {self.p}")
        if not self.omega > 0.0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if not np.isfinite(self.alpha):
            raise DomainError("alpha must be finite")

    @property
    def alpha_minus(self) -> float:
        return negative_part(self.alpha)

    @property
    def m(self) -> Optional[float]:
        return self.potential.m

    def to_dict(self) -> dict:
        return {
            "s": float(self.s),
            "alpha": float(self.alpha),
            "p": float(self.p),
            "omega": float(self.omega),
            "potential": self.potential.to_dict(),
        }


@dataclass
class AdmissibilityReport:
    omega_gap: float
    alpha0: Optional[float]
    admissible: bool
    violated_conditions: list

    def to_dict(self) -> dict:
        return {
            "omega_gap": self.omega_gap,
            "alpha0": self.alpha0,
            "admissible": self.admissible,
            "violated_conditions": list(self.violated_conditions),
        }


@dataclass
class CoercivityConstants:
    """Constants making the quadratic part of ``J`` coercive.

    ``c1, c2`` belong to ``epsilon0`` (mountain-pass geometry); ``d1, d2``
    belong to ``epsilon1`` and are only present when ``p < 4``.
    ``feasible_interval`` is the open interval of the requested case.
    """

    epsilon0: float
    c1: float
    c2: float
    feasible_interval: tuple
    epsilon1: Optional[float] = None
    d1: Optional[float] = None
    d2: Optional[float] = None

    @property
    def cmin(self) -> float:
        return min(self.c1, self.c2)


def negative_part(x: float) -> float:
    return max(-float(x), 0.0)


def _positive_part(x: float) -> float:
    return max(float(x), 0.0)


def omega_gap(p: float, m: float, omega: float) -> float:
    """``m^2 - omega^2 - (4-p)^+ / (p-2) * omega^2``."""
    if not 2.0 < p < 6.0:
        raise DomainError(f"p must lie in (2, 6), got {p}")
    if not m > 0.0:
        raise DomainError(f"m must be positive, got {m}")
    if not omega > 0.0:
        raise DomainError(f"omega must be positive, got {omega}")
    w2 = omega * omega
    return m * m - w2 - _positive_part(4.0 - p) / (p - 2.0) * w2


def alpha0(s, t):
    """Admissibility threshold ``s^-s (1-s)^(s-1) t^(1-s)``.

    Equal to ``inf_{k>0} (k^2 + t) / k^(2s)``. Accepts scalars or arrays.
    """
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any((s_arr <= 0.0) | (s_arr >= 1.0)):
        raise DomainError("s must lie in (0, 1)")
    if np.any(t_arr <= 0.0):
        raise DomainError("t must be positive")
    # log form keeps the s -> 0, 1 limits free of 0 * inf
    log_val = -s_arr * np.log(s_arr) - (1.0 - s_arr) * np.log1p(-s_arr) + (1.0 - s_arr) * np.log(t_arr)
    out = np.exp(log_val)
    return float(out) if out.ndim == 0 else out


def check_admissible(params: ModelParams) -> AdmissibilityReport:
    """Hypotheses (a)/(b) and the threshold ``alpha > -alpha0(s, Omega)``."""
    if not params.potential.is_constant:
        raise DomainError(
            "admissibility thresholds apply to constant potentials only; coercive potentials "
            "admit every alpha and p, use the spectrum module for their constants"
        )
    p, m, w = params.p, float(params.potential.m), params.omega
    gap = omega_gap(p, m, w)
    violated = []
    if p >= 4.0:
        if not m > w:
            violated.append("(a)")
    elif not m * math.sqrt(p - 2.0) > math.sqrt(2.0) * w:
        violated.append("(b)")
    a0 = alpha0(params.s, gap) if gap > 0.0 else None
    if a0 is not None and not params.alpha > -a0:
        violated.append("threshold")
    return AdmissibilityReport(
        omega_gap=gap,
        alpha0=a0,
        admissible=not violated and a0 is not None,
        violated_conditions=violated,
    )


def _log_interval(am: float, s: float, T: float) -> tuple:
    """``log`` of the open interval where both coercivity constants are positive."""
    return ((1.0 - s) / s) * math.log((1.0 - s) * am / T), -math.log(am * s)


def _interval(am: float, s: float, T: float) -> tuple:
    lo, hi = _log_interval(am, s, T)
    return math.exp(lo), math.exp(hi)


def _maximize_min(f, g, lo, hi):
    """Maximizer of ``min(f, g)`` on (lo, hi) for ``f`` decreasing, ``g`` increasing.

    Works in ``log epsilon`` so tiny ``alpha^-`` (interval ends near 0 or
    infinity) stays representable.  The maximum sits where the two curves
    cross, so a bracketing root of ``f - g`` locates it to machine precision.
    """
    fa, fb = f(lo) - g(lo), f(hi) - g(hi)
    if fa <= 0.0:
        return lo
    if fb >= 0.0:
        return hi
    return float(optimize.brentq(lambda x: f(x) - g(x), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))


def feasible_epsilon(params: ModelParams, case: str = "geometry") -> CoercivityConstants:
    """Auxiliary parameter making the coercivity system solvable.

    ``case='geometry'`` uses ``T = m^2 - omega^2``; ``case='palais_smale'``
    uses ``T = Omega``. The epsilon maximizing the smaller constant is chosen.
    """
    if case not in ("geometry", "palais_smale"):
        raise DomainError(f"unknown case {case!r}")
    if not params.potential.is_constant:
        raise DomainError("feasible_epsilon needs a constant potential")
    s, p, w = params.s, params.p, params.omega
    m2 = float(params.potential.m) ** 2
    am = params.alpha_minus
    tgeo = m2 - w * w
    gap = omega_gap(p, float(params.potential.m), w)
    if gap <= 0.0:
        raise InfeasibleError(f"Omega = {gap:.6g} is not positive")
    T = tgeo if case == "geometry" else gap
    ex = s / (1.0 - s)
    half = p / 2.0 - 1.0

    if am == 0.0:
        out = CoercivityConstants(epsilon0=1.0, c1=1.0, c2=tgeo, feasible_interval=(0.0, math.inf))
        if p < 4.0:
            out.epsilon1, out.d1, out.d2 = 1.0, half, half * m2 - w * w
        return out

    lo, hi = _interval(am, s, T)
    # for p < 4 the Palais-Smale constants are always reported, so Omega must work too
    for tt in (T, gap) if p < 4.0 else (T,):
        a, b = _log_interval(am, s, tt)
        if not a < b:
            raise InfeasibleError(
                f"alpha^- = {am:.6g} reaches the threshold alpha0 = {alpha0(s, tt):.6g}; feasible interval is empty"
            )

    la, lb = math.log(am * s), math.log(am * (1.0 - s))

    # constants as functions of x = log(epsilon)
    def c1(x):
        return 1.0 - math.exp(la + x)

    def c2(x):
        return tgeo - math.exp(lb - ex * x)

    x0 = _maximize_min(c1, c2, *_log_interval(am, s, tgeo))
    out = CoercivityConstants(epsilon0=math.exp(x0), c1=c1(x0), c2=c2(x0), feasible_interval=(lo, hi))
    if p < 4.0:
        def d1(x):
            return half * c1(x)

        def d2(x):
            return half * (m2 - math.exp(lb - ex * x)) - w * w

        x1 = _maximize_min(d1, d2, *_log_interval(am, s, gap))
        out.epsilon1, out.d1, out.d2 = math.exp(x1), d1(x1), d2(x1)
    return out


def normalization_constant(s: float, rtol: float = 1e-11) -> float:
    """``C(s)`` from the radial reduction of the ``1 - cos(x_1)`` integral.

    ``1/C(s) = 4 pi * int_0^inf (1 - sin r / r) r^(-1-2s) dr``. The integral is
    split at ``r = 1``; on ``[1, inf)`` the non-oscillatory part integrates to
    ``1/(2s)`` exactly and the ``sin(r) r^(-2-2s)`` part goes through QUADPACK's
    Fourier-integral routine.
    """
    if not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")

    def near(r):
        if r < 1e-3:
            r2 = r * r
            # series of 1 - sin r / r keeps full precision near 0
            return (r2 / 6.0 - r2 * r2 / 120.0 + r2 ** 3 / 5040.0) * r ** (-1.0 - 2.0 * s)
        return (1.0 - math.sin(r) / r) * r ** (-1.0 - 2.0 * s)

    head, err_head = integrate.quad(near, 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=200)
    osc, err_osc = integrate.quad(
        lambda r: r ** (-2.0 - 2.0 * s), 1.0, np.inf, weight="sin", wvar=1.0, epsabs=1e-13, limlst=100
    )
    total = head + 1.0 / (2.0 * s) - osc
    err = err_head + err_osc
    if not np.isfinite(total) or total <= 0.0 or err > 1e-7 * abs(total):
        from .errors import NumericalError

        raise NumericalError(
            "quadrature for C(s) did not converge", s=s, value=total, head=head, tail=osc, error=err
        )
    return 1.0 / (4.0 * math.pi * total)
