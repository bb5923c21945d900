"""Numerical mountain pass for the reduced energy ``J``.

A polygonal path of ``M + 1`` fields runs from ``0`` to an endpoint ``e`` with
``J(e) <= -1``.  Each deformation step works on the path node of highest
energy:

1. maximize ``J`` along the local path direction ``u_{i+1} - u_{i-1}``;
2. take an Armijo steepest-descent step in the preconditioned metric.

The local maximization pins the node to the ridge, so the gradient norm at the
node can be driven to the requested tolerance instead of stalling at the path
resolution.

Energies are tracked at the nodes and at the segment midpoints.  Without the
midpoints a node can slide past the ridge while the segment joining it to a
neighbour still crosses high ground, and the node maximum then drops towards
zero although the polygon never left the mountain.  A step is therefore kept
only if neither the moved node nor its two adjacent midpoints exceed the
current path maximum; when the highest value sits at a midpoint, that midpoint
becomes a node and a node elsewhere is dropped.  Nodes on each side of the
maximizer are respaced by arclength every few steps, again only if the maximum
does not rise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .electrostatic import DEFAULT_PHI_TOL, solve_phi
from .errors import AdmissibilityError, DomainError, GeometryError, NumericalError
from .functional import EnergyBreakdown, evaluate, gradient_J, preconditioner_shift
from .params import check_admissible
from .radial import OperatorSymbol, RadialField, RadialGrid

__all__ = [
    "SolveOptions",
    "PathState",
    "SolveResult",
    "gaussian_seed",
    "find_descent_endpoint",
    "mountain_pass_solve",
    "pde_residuals",
]

ARMIJO_C = 1e-4
ARMIJO_FACTOR = 0.5
DOUBLING_CAP = 2.0 ** 30
STEP_REACH = 0.5
MAX_SHRINK = 6


@dataclass
class SolveOptions:
    M: int = 40
    tol: float = 1e-6
    max_iters: int = 2000
    seed_amplitude: float = 1.0
    seed_width: float = 1.0
    redistribute_every: int = 5
    phi_tol: float = DEFAULT_PHI_TOL

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise DomainError(f"M must be an integer >= 2, got {self.M}")
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise DomainError(f"max_iters must be a nonnegative integer, got {self.max_iters}")
        if not (self.seed_amplitude > 0 and self.seed_width > 0):
            raise DomainError("seed amplitude and width must be positive")

    def to_dict(self) -> dict:
        return {
            "M": int(self.M),
            "tol": float(self.tol),
            "max_iters": int(self.max_iters),
            "seed_amplitude": float(self.seed_amplitude),
            "seed_width": float(self.seed_width),
        }


@dataclass
class PathState:
    """Polygonal path with energies at the nodes and at the segment midpoints.

    The midpoints catch a ridge that passes between two nodes; the path
    maximum is taken over both.
    """

    points: list
    energies: list
    mids: list

    @property
    def argmax(self) -> int:
        # np.argmax returns the first (smallest) index on ties
        return int(np.argmax(self.energies))

    @property
    def max_energy(self) -> float:
        return max(float(np.max(self.energies)), float(np.max(self.mids)))


@dataclass
class SolveResult:
    u: RadialField
    phi: RadialField
    energy: EnergyBreakdown
    grad_norm: float
    residual_u: float
    residual_phi: float
    iterations: int
    converged: bool
    params: object
    options: SolveOptions
    endpoint_scale: float
    k0: int | None = None
    max_energy_history: list = field(default_factory=list, repr=False)
    grad_history: list = field(default_factory=list, repr=False)
    # path maximum just before each deformation step (after any midpoint refinement)
    pre_step_history: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "energy": self.energy.to_dict(),
            "grad_norm": float(self.grad_norm),
            "residual_u": float(self.residual_u),
            "residual_phi": float(self.residual_phi),
            "params": self.params.to_dict(),
            "grid": self.u.grid.metadata(),
            "solver": self.options.to_dict(),
            "endpoint_scale": float(self.endpoint_scale),
            "k0": self.k0,
            "u_max": float(np.max(np.abs(self.u.values))),
            "phi_max": float(np.max(self.phi.values)),
            "max_energy_history": [float(x) for x in self.max_energy_history],
        }


def gaussian_seed(grid: RadialGrid, amplitude: float = 1.0, width: float = 1.0) -> RadialField:
    return RadialField.from_function(grid, lambda r: amplitude * np.exp(-((r / width) ** 2)))


def find_descent_endpoint(seed: RadialField, params, phi_tol: float = DEFAULT_PHI_TOL,
                          cap: float = DOUBLING_CAP) -> tuple:
    """Return ``(t * seed, t)`` with ``J(t * seed) <= -1``, ``t`` found by doubling."""
    if seed.is_zero():
        raise DomainError("the seed must be nonzero")
    t = 1.0
    while True:
        e = t * seed
        if evaluate(e, params, phi_tol=phi_tol)[0].total <= -1.0:
            return e, t
        t *= 2.0
        if t > cap:
            raise GeometryError(
                f"J(t*seed) stayed above -1 up to t = {cap:g}; parameters may be inadmissible "
                "or the grid too coarse"
            )


class _Projector:
    """Preconditioned-orthogonal projection onto ``{c : Y^T c = 0}``."""

    def __init__(self, Y, weight):
        self.Y = Y
        self.Winv_Y = Y / weight[:, None]
        self.gram = np.linalg.inv(Y.T @ self.Winv_Y)

    def field(self, u: RadialField) -> RadialField:
        c = u.modes - self.Y @ (self.Y.T @ u.modes)
        return RadialField(u.grid, modes=c)

    def dual(self, d):
        return d - self.Y @ (self.gram @ (self.Winv_Y.T @ d))


class _Problem:
    def __init__(self, params, grid, options, projector=None):
        self.params = params
        self.grid = grid
        self.opts = options
        self.tau = preconditioner_shift(params, grid)
        self.weight = OperatorSymbol.for_params(grid, params).sigma + self.tau
        self.proj = projector

    def energy(self, u):
        return evaluate(u, self.params, phi_tol=self.opts.phi_tol)[0].total

    def gradient(self, u):
        """Projected Riesz representative, its norm, and the dual vector."""
        g = gradient_J(u, self.params, tau=self.tau, phi_tol=self.opts.phi_tol)
        d = g.dual if self.proj is None else self.proj.dual(g.dual)
        nu = self.grid.mode_norm
        rep = RadialField(self.grid, modes=d / (nu * self.weight))
        norm = math.sqrt(float(np.sum(d * d / self.weight)) / nu)
        return rep, norm, d

    def slope(self, u, t):
        """``J'(u)[t]``."""
        g = gradient_J(u, self.params, tau=self.tau, phi_tol=self.opts.phi_tol)
        return g.action(t)

    def line_max(self, u, t, e_u):
        """Maximize ``J(u + theta t)`` for ``theta`` in ``[-1/2, 1/2]``."""
        f_lo, f_hi = self.slope(u - 0.5 * t, t), self.slope(u + 0.5 * t, t)
        if f_lo > 0.0 and f_hi < 0.0:
            theta = optimize.brentq(lambda th: self.slope(u + th * t, t), -0.5, 0.5, xtol=1e-14, rtol=1e-14)
        else:
            cands = [(-0.5, self.energy(u - 0.5 * t)), (0.5, self.energy(u + 0.5 * t))]
            theta, best = max(cands, key=lambda c: c[1])
            if best <= e_u:
                return u, e_u
        v = u + theta * t
        return v, self.energy(v)

    def descend(self, u, e_u, max_len=math.inf):
        """Armijo step along the negative preconditioned gradient.

        The trial step is 1, shortened if needed so the node moves at most
        ``max_len`` in the H1 norm.
        """
        g, gnorm, _ = self.gradient(u)
        step = min(1.0, max_len / max(_h1_norm(g), np.finfo(float).tiny))
        for _ in range(60):
            v = u - step * g
            e_v = self.energy(v)
            if e_v <= e_u - ARMIJO_C * step * gnorm * gnorm:
                return v, e_v
            step *= ARMIJO_FACTOR
        raise NumericalError("Armijo backtracking failed to find a decrease", grad_norm=gnorm)


def _h1_norm(a: RadialField) -> float:
    k = a.grid.k
    return math.sqrt(float(np.sum((1.0 + k * k) * a.modes * a.modes)))


def _h1_dist(a: RadialField, b: RadialField) -> float:
    return _h1_norm(a - b)


def _respace(points, lo, hi):
    """Equal-arclength nodes on the polygon ``points[lo..hi]``, ends fixed."""
    seg = points[lo: hi + 1]
    n = len(seg) - 1
    if n < 2:
        return list(seg)
    lengths = np.array([_h1_dist(seg[j + 1], seg[j]) for j in range(n)])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    if cum[-1] == 0.0:
        return list(seg)
    out = [seg[0]]
    for target in np.linspace(0.0, cum[-1], n + 1)[1:-1]:
        j = min(int(np.searchsorted(cum, target, side="right")) - 1, n - 1)
        frac = 0.0 if lengths[j] == 0.0 else (target - cum[j]) / lengths[j]
        out.append(seg[j] + frac * (seg[j + 1] - seg[j]))
    out.append(seg[-1])
    return out


def _mid_energy(prob, a, b):
    return prob.energy(0.5 * (a + b))


def _build_path(prob, points, energies=None):
    if energies is None:
        energies = [0.0] + [prob.energy(p) for p in points[1:]]
    mids = [_mid_energy(prob, a, b) for a, b in zip(points[:-1], points[1:])]
    return PathState(list(points), list(energies), mids)


def _redistribute(prob, path):
    i = path.argmax
    n = len(path.points) - 1
    pts = _respace(path.points, 0, i)[:-1] + _respace(path.points, i, n)
    energies = [0.0] + [path.energies[j] if j == i else prob.energy(pts[j]) for j in range(1, n)] + [path.energies[n]]
    new = _build_path(prob, pts, energies)
    # keep the respaced path only when it does not lift the path maximum
    if new.max_energy <= path.max_energy:
        return new
    return path


def _insert_at_ridge(prob, path, size, j=None):
    """Turn the highest segment midpoint into a node, then drop a node to keep ``size`` nodes.

    The dropped node is the interior node with the shortest adjacent segments
    whose removal does not lift the path maximum; if there is none the path
    keeps the extra node.
    """
    top = path.max_energy
    if j is None:
        j = int(np.argmax(path.mids))
    a, b = path.points[j], path.points[j + 1]
    m = 0.5 * (a + b)
    pts = path.points[: j + 1] + [m] + path.points[j + 1:]
    energies = path.energies[: j + 1] + [path.mids[j]] + path.energies[j + 1:]
    mids = path.mids[:j] + [_mid_energy(prob, a, m), _mid_energy(prob, m, b)] + path.mids[j + 1:]
    new = PathState(pts, energies, mids)
    if len(pts) <= size:
        return new
    keep = {j, j + 1, j + 2}
    cands = [q for q in range(1, len(pts) - 1) if q not in keep]
    spread = [_h1_dist(pts[q - 1], pts[q]) + _h1_dist(pts[q], pts[q + 1]) for q in cands]
    for _, q in sorted(zip(spread, cands)):
        chord = _mid_energy(prob, pts[q - 1], pts[q + 1])
        if chord <= top:
            return PathState(pts[:q] + pts[q + 1:], energies[:q] + energies[q + 1:],
                             mids[: q - 1] + [chord] + mids[q + 1:])
    return new


def _spectral_projector(params, grid, weight):
    """Projector onto ``P_{k0}`` for coercive potentials, ``None`` if ``k0 <= 1``."""
    from .spectrum import eigen_decomposition

    K = 1
    while True:
        K = min(2 * K, grid.N // 4)
        spec = eigen_decomposition(params, K, grid)
        if spec.k0 is not None or K == grid.N // 4:
            break
    if spec.k0 is None:
        raise GeometryError("no computed eigenvalue exceeds omega^2 with K <= N/4")
    if spec.k0 <= 1:
        return None, spec.k0
    return _Projector(spec.modes[:, : spec.k0 - 1], weight), spec.k0


def _step(prob, path, i, u_top, e_top):
    """Move node ``i`` downhill without lifting the path maximum.

    Tries the descent from the line maximum first, then from the old node,
    halving the allowed move when an adjacent segment midpoint would rise
    above the current maximum.  If nothing qualifies, the node stays and the
    higher adjacent segment is split, which shortens the next allowed move.
    """
    top = path.max_energy
    u, e_u = path.points[i], path.energies[i]
    left, right = path.points[i - 1], path.points[i + 1]
    # keep the node within half a path spacing of where it was
    reach = STEP_REACH * min(_h1_dist(u, left), _h1_dist(u, right))
    for start, e_start in ((u_top, e_top), (u, e_u)):
        for shrink in range(MAX_SHRINK):
            v, e_v = prob.descend(start, e_start, reach * 0.5 ** shrink)
            if e_v > top:
                break
            ml, mr = _mid_energy(prob, left, v), _mid_energy(prob, v, right)
            if max(ml, mr) <= top:
                path.points[i], path.energies[i] = v, e_v
                path.mids[i - 1], path.mids[i] = ml, mr
                return path
    j = i - 1 if path.mids[i - 1] >= path.mids[i] else i
    return _insert_at_ridge(prob, path, len(path.points), j)


def mountain_pass_solve(params, grid: RadialGrid, options: SolveOptions | None = None) -> SolveResult:
    """Mountain-pass critical point of ``J`` on the radial grid.

    Constant potentials must pass the admissibility check, otherwise
    ``AdmissibilityError`` is raised before any work. Reaching ``max_iters``
    returns an unconverged result.
    """
    options = options or SolveOptions()
    k0 = None
    if params.potential.is_constant:
        report = check_admissible(params)
        if not report.admissible:
            raise AdmissibilityError(
                "parameters violate " + ", ".join(report.violated_conditions), report=report
            )
        prob = _Problem(params, grid, options)
    else:
        prob = _Problem(params, grid, options)
        proj, k0 = _spectral_projector(params, grid, prob.weight)
        prob.proj = proj

    seed = gaussian_seed(grid, options.seed_amplitude, options.seed_width)
    if prob.proj is not None:
        seed = prob.proj.field(seed)
    endpoint, t_end = find_descent_endpoint(seed, params, phi_tol=options.phi_tol)
    M = options.M
    path = _build_path(prob, [(j / M) * endpoint for j in range(M + 1)])

    history, grads, before = [], [], []
    converged = False
    it = 0
    gnorm = math.inf
    while True:
        if max(path.mids) > max(path.energies):
            path = _insert_at_ridge(prob, path, M + 1)
        i = path.argmax
        last = len(path.points) - 1
        if i == 0 or i == last:
            raise GeometryError("the path maximum sits at an endpoint; no mountain-pass geometry")
        u, e_u = path.points[i], path.energies[i]
        # local maximization along the path, then descent
        t = path.points[i + 1] - path.points[i - 1]
        u_top, e_top = prob.line_max(u, t, e_u)
        _, gnorm, _ = prob.gradient(u_top)
        grads.append(gnorm)
        if gnorm <= options.tol and e_top > 0.0:
            path.points[i], path.energies[i] = u_top, e_top
            converged = True
            break
        if it >= options.max_iters:
            path.points[i], path.energies[i] = u_top, e_top
            break
        it += 1
        before.append(path.max_energy)
        path = _step(prob, path, i, u_top, e_top)
        if options.redistribute_every and it % options.redistribute_every == 0:
            path = _redistribute(prob, path)
        history.append(path.max_energy)

    u = path.points[i]
    breakdown, phi_sol = evaluate(u, params, phi_tol=options.phi_tol)
    ru, rphi = pde_residuals(u, phi_sol.phi, params)
    converged = converged and breakdown.total > 0.0
    return SolveResult(
        u=u,
        phi=phi_sol.phi,
        energy=breakdown,
        grad_norm=gnorm,
        residual_u=ru,
        residual_phi=rphi,
        iterations=it,
        converged=converged,
        params=params,
        options=options,
        endpoint_scale=t_end,
        k0=k0,
        max_energy_history=history,
        grad_history=grads,
        pre_step_history=before,
    )


def pde_residuals(u: RadialField, phi: RadialField, params) -> tuple:
    """Relative weak-form residuals of the two field equations.

    For every basis test function the equation terms are evaluated separately;
    the residual is the largest imbalance divided by the largest sum of term
    magnitudes, so a pair solving both equations gives ``(0, 0)``.
    """
    u._check(phi)
    grid = u.grid
    proj = grid.project
    uv, pv = u.values, phi.values
    nu = grid.mode_norm
    sigma = OperatorSymbol.for_params(grid, params).sigma
    V = params.potential(grid.r)
    w = params.omega

    t_op = nu * sigma * u.modes
    t_v = proj(V * uv)
    t_c = proj((w - pv) ** 2 * uv)
    t_n = proj(np.abs(uv) ** (params.p - 2.0) * uv)
    res_u = _rel(t_op + t_v - t_c - t_n, (t_op, t_v, t_c, t_n))

    u2 = uv * uv
    a_op = nu * grid.k ** 2 * phi.modes
    a_src = proj(w * u2)
    a_sc = proj(pv * u2)
    res_phi = _rel(a_op - a_src + a_sc, (a_op, a_src, a_sc))
    return res_u, res_phi


def _rel(imbalance, terms):
    scale = float(np.max(sum(np.abs(t) for t in terms)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(imbalance))) / scale
