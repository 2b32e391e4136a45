"""Asymptotic ensemble weight enumerators for protograph codes.

The normalized logarithmic asymptotic spectrum of a protograph ensemble
is the constrained supremum

    r(delta) = (1/n_norm) * sup { sum_c a_c(x) - sum_v (q_v - 1) H(x_v) }

over per-variable weight fractions x in [0, 1], subject to the
transmitted fractions averaging to delta.  Each check contributes the
exponent a_c of its even-overlap count, evaluated at the saddle point
of its even-subset generating function; variables contribute binomial
entropy terms weighted by their degree q_v.

delta_min, the linear minimum-distance growth rate, is the first zero
crossing of r.  For an unwrapping, lambda * delta_min of the
lambda-fold tail-biting ensemble lower-bounds the free-distance growth
of the unterminated convolutional ensemble; the bound curve flattens to
its limit as lambda grows.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .protograph import Protograph, ProtographError, expand
from .rng import generator, open_uniform
from .unwrap import TrivialCutError, Unwrapping, cut, tailbite, terminate

NORMALIZATIONS = ("full", "transmitted")

STATUS_OK = "ok"
STATUS_NO_CROSSING = "no_zero_crossing_in_range"
STATUS_NO_LINEAR_GROWTH = "no_linear_growth"


class InnerSolverError(RuntimeError):
    """Saddle-point iteration failed to converge within its cap."""


class OptimizerUnreliableError(RuntimeError):
    """Multistart surface evaluations are inconsistent."""


@dataclass(frozen=True)
class SpectralOptions:
    """Tuning knobs for the enumerator optimizer.

    The defaults reproduce all shipped reference values; they trade a
    few seconds per curve for multistart robustness on tail-biting
    ensembles, whose optima localize in a few periods.
    """

    normalization: str = "full"
    multistarts: int = 32
    ascent_iterations: int = 600
    step_init: float = 0.2
    stall_limit: int = 40
    eta_floor: float = 1e-12
    box_margin: float = 1e-7
    feas_margin: float = 1e-7
    inner_tol: float = 1e-10
    inner_cap: int = 200
    delta_start: float = 1e-3
    delta_stop: float = 0.2
    delta_step: float = 1e-3
    bisect_tol: float = 2.5e-5
    plateau_tol: float = 1e-3
    polish_rounds: int = 16
    polish_active_eps: float = 1e-5
    polish_top: int = 3
    polish_gate: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")


_SUBSET_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _subset_matrices(k: int, parity: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(S, A, b): subset indicator rows of the requested parity, and the
    facet system A x <= b of their convex hull (the parity polytope)."""
    key = (k, parity)
    if key not in _SUBSET_CACHE:
        masks = np.arange(1 << k, dtype=np.uint32)
        bits = (masks[:, None] >> np.arange(k)) & 1
        sizes = bits.sum(axis=1)
        S = bits[sizes % 2 == parity].astype(np.float64)
        comp = bits[sizes % 2 != parity]
        A = (2.0 * comp - 1.0).astype(np.float64)
        b = comp.sum(axis=1).astype(np.float64) - 1.0
        _SUBSET_CACHE[key] = (S, A, b)
    return _SUBSET_CACHE[key]


def _entropy(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 1e-300, 1.0)
    y = np.clip(1.0 - x, 1e-300, 1.0)
    return -(x * np.log(x) + y * np.log(y))


def _entropy_grad(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 1e-15, 1.0 - 1e-15)
    return np.log((1.0 - x) / x)


def _newton_even(
    S: np.ndarray, x: np.ndarray, s0: np.ndarray, tol: float, cap: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimize phi(s) = ln sum_subsets exp(s . S) - s . x, batched.

    phi is the log of the even-subset generating function in t = e^s,
    convex in s; its minimum is the check exponent a(x) and the
    minimizer gives the envelope gradient da/dx_e = -s_e.
    Returns (phi_min, s, converged).
    """
    n, k = x.shape
    s = s0.copy()
    converged = np.zeros(n, dtype=bool)
    frozen = np.zeros(n, dtype=bool)
    phi = np.full(n, np.inf)
    eye = np.eye(k)
    for _ in range(cap):
        z = s @ S.T
        zmax = z.max(axis=1, keepdims=True)
        p = np.exp(z - zmax)
        Z = p.sum(axis=1, keepdims=True)
        q = p / Z
        mu = q @ S
        grad = mu - x
        phi = (zmax[:, 0] + np.log(Z[:, 0])) - (s * x).sum(axis=1)
        converged = np.abs(grad).max(axis=1) <= tol
        frozen |= np.abs(s).max(axis=1) > 120.0
        act = ~(converged | frozen)
        if not act.any():
            break
        H = np.einsum("ne,ek,el->nkl", q[act], S, S) - mu[act, :, None] * mu[act, None, :]
        H += 1e-13 * eye
        rhs = grad[act][:, :, None]
        try:
            step = -np.linalg.solve(H, rhs)[:, :, 0]
        except np.linalg.LinAlgError:
            step = -np.linalg.solve(H + 1e-6 * eye, rhs)[:, :, 0]
        # trust-region clamp: near-flat coordinates produce huge Newton
        # steps that no line search can tame
        norm = np.abs(step).max(axis=1)
        big = norm > 4.0
        step[big] *= (4.0 / norm[big])[:, None]
        s_act = s[act]
        phi_act = phi[act]
        x_act = x[act]
        slope = (grad[act] * step).sum(axis=1)
        alpha = np.ones(act.sum())
        # in the quadratic regime the objective decrease is below float64
        # resolution, so a line search only adds noise; take the full step
        quad = np.abs(grad[act]).max(axis=1) < 1e-6
        pending = ~quad
        s_new = s_act.copy()
        s_new[quad] += step[quad]
        for _ in range(25):
            trial = s_act[pending] + alpha[pending, None] * step[pending]
            zt = trial @ S.T
            zm = zt.max(axis=1, keepdims=True)
            phi_t = (zm[:, 0] + np.log(np.exp(zt - zm).sum(axis=1))) - (trial * x_act[pending]).sum(axis=1)
            good = phi_t <= phi_act[pending] + 1e-4 * alpha[pending] * slope[pending]
            idx = np.flatnonzero(pending)
            s_new[idx[good]] = trial[good]
            pending[idx[good]] = False
            if not pending.any():
                break
            alpha[pending] *= 0.5
        s_new[pending] = s_act[pending]
        s[act] = s_new
    return phi, s, converged & ~frozen


@dataclass(frozen=True)
class _CheckGroup:
    degree: int
    edge_cls: np.ndarray
    S: np.ndarray
    A: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class CheckSystem:
    """Reduced optimization problem for one protograph.

    Degree-1 checks pin their variable to zero (with cascade); degree-2
    checks force equality, so their variables merge into one class with
    an analytic entropy contribution.  What remains are generic checks
    of degree >= 3 over merged classes.
    """

    n_classes: int
    members: tuple[tuple[int, ...], ...]
    tx_weight: np.ndarray
    h_coef: np.ndarray
    groups: tuple[_CheckGroup, ...]
    norm_len: int
    n_pinned: int


def build_check_system(proto: Protograph, normalization: str = "full") -> CheckSystem:
    n_v = proto.n_v
    degrees = proto.base.sum(axis=0)
    check_edges = [
        [v for v in range(n_v) for _ in range(int(proto.base[c, v]))] for c in range(proto.n_c)
    ]

    parent = list(range(n_v))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    pinned = [False] * n_v

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra == rb:
            return
        parent[rb] = ra
        pinned[ra] = pinned[ra] or pinned[rb]

    def pin(a: int) -> None:
        pinned[find(a)] = True

    remaining = list(range(len(check_edges)))
    h2_events: list[int] = []
    while True:
        changed = False
        kept = []
        for c in remaining:
            eff = [v for v in check_edges[c] if not pinned[find(v)]]
            if len(eff) >= 3:
                kept.append(c)
                continue
            changed = True
            if len(eff) == 1:
                pin(eff[0])
            elif len(eff) == 2:
                union(eff[0], eff[1])
                h2_events.append(eff[0])
        remaining = kept
        if not changed:
            break

    roots = sorted({find(v) for v in range(n_v) if not pinned[find(v)]})
    cls_of = {r: i for i, r in enumerate(roots)}
    members: list[list[int]] = [[] for _ in roots]
    for v in range(n_v):
        r = find(v)
        if not pinned[r]:
            members[cls_of[r]].append(v)
    C = len(roots)
    tx = set(proto.transmitted)
    tx_weight = np.array([sum(1 for v in mem if v in tx) for mem in members], dtype=np.float64)
    h_coef = np.zeros(C)
    for i, mem in enumerate(members):
        h_coef[i] -= sum(int(degrees[v]) - 1 for v in mem)
    for v in h2_events:
        r = find(v)
        if not pinned[r]:
            h_coef[cls_of[r]] += 1.0

    by_degree: dict[int, list[list[int]]] = {}
    for c in remaining:
        eff = [cls_of[find(v)] for v in check_edges[c] if not pinned[find(v)]]
        by_degree.setdefault(len(eff), []).append(eff)
    groups = []
    for k in sorted(by_degree):
        S, A, b = _subset_matrices(k, 0)
        groups.append(
            _CheckGroup(k, np.asarray(by_degree[k], dtype=np.int64), S, A, b)
        )

    norm_len = proto.n_v if normalization == "full" else proto.m
    n_pinned = sum(1 for v in range(n_v) if pinned[find(v)])
    return CheckSystem(
        C,
        tuple(tuple(mem) for mem in members),
        tx_weight,
        h_coef,
        tuple(groups),
        norm_len,
        n_pinned,
    )


def _classes_to_variables(
    system: CheckSystem, x: np.ndarray, n_vars: int, floor: float
) -> np.ndarray:
    """Per-variable profile from a class profile; pinned variables at the floor."""
    xv = np.full(n_vars, floor)
    for i, mem in enumerate(system.members):
        xv[list(mem)] = x[i]
    return xv


def _variables_to_classes(system: CheckSystem, xv: np.ndarray) -> np.ndarray:
    """Class profile from a per-variable profile (members averaged)."""
    return np.array([float(np.mean(xv[list(mem)])) for mem in system.members])


def _project_slice(
    z: np.ndarray, w: np.ndarray, s: float, lo: float, hi: float
) -> np.ndarray:
    """Project rows of z onto { x : w . x = s, lo <= x <= hi }.

    Euclidean projection solved by bisection on the dual variable; the
    coordinate map is x_j = clip(z_j + nu * w_j).  Coordinates with
    w_j = 0 are only clipped.
    """
    x = np.clip(z, lo, hi)
    pos = w > 0
    if not pos.any():
        return x
    wp = w[pos]
    span = (hi + np.abs(z).max()) / wp.min() + 1.0
    nu_lo = np.full(z.shape[0], -span)
    nu_hi = np.full(z.shape[0], span)
    zp = z[:, pos]
    for _ in range(90):
        nu = 0.5 * (nu_lo + nu_hi)
        val = (np.clip(zp + nu[:, None] * wp, lo, hi) * wp).sum(axis=1)
        low = val < s
        nu_lo[low] = nu[low]
        nu_hi[~low] = nu[~low]
    nu = 0.5 * (nu_lo + nu_hi)
    x[:, pos] = np.clip(zp + nu[:, None] * wp, lo, hi)
    return x


@dataclass
class PointResult:
    """Optimizer outcome for one (delta, normalization) query."""

    delta: float
    r: float
    x_classes: np.ndarray | None
    feasible: bool
    agree_count: int
    proj_grad_norm: float
    inner_failures: int


class SpectralEngine:
    """Batched multistart optimizer over one check system."""

    def __init__(self, proto: Protograph, options: SpectralOptions | None = None):
        self.proto = proto
        self.options = options or SpectralOptions()
        self.system = build_check_system(proto, self.options.normalization)
        self._warm_cache: dict[int, np.ndarray] = {}
        self._batch = 0
        self.inner_failures = 0

    def _evaluate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """F, dF/dx, and feasibility per batch row."""
        sys = self.system
        B = x.shape[0]
        if B != self._batch:
            self._warm_cache.clear()
            self._batch = B
        F = (sys.h_coef * _entropy(x)).sum(axis=1)
        grad = sys.h_coef * _entropy_grad(x)
        feas = np.ones(B, dtype=bool)
        for gi, grp in enumerate(sys.groups):
            G, k = grp.edge_cls.shape
            xe = x[:, grp.edge_cls].reshape(B * G, k)
            margins = grp.b - xe @ grp.A.T
            ok = margins.min(axis=1) >= self.options.feas_margin
            feas &= ok.reshape(B, G).all(axis=1)
            warm = self._warm_cache.get(gi)
            if warm is None or warm.shape[0] != B * G:
                xc = np.clip(xe, 1e-12, 1.0 - 1e-12)
                warm = np.log(xc / (1.0 - xc))
            phi = np.zeros(B * G)
            s_opt = np.zeros((B * G, k))
            if ok.any():
                phi_ok, s_ok, conv = _newton_even(
                    grp.S, xe[ok], warm[ok], self.options.inner_tol, self.options.inner_cap
                )
                self.inner_failures += int((~conv).sum())
                phi_ok = np.where(conv, phi_ok, -np.inf)
                phi[ok] = phi_ok
                s_opt[ok] = s_ok
                warm = warm.copy()
                warm[ok] = s_ok
                self._warm_cache[gi] = warm
            F += phi.reshape(B, G).sum(axis=1)
            s3 = s_opt.reshape(B, G, k) * feas[:, None, None]
            rows = np.arange(B)[:, None]
            for j in range(k):
                np.add.at(grad, (rows, np.broadcast_to(grp.edge_cls[:, j], (B, G))), -s3[:, :, j])
        F = np.where(feas, F, -np.inf)
        return F, grad, feas

    def _starts(self, s: float, key: tuple, warm: tuple[np.ndarray, ...]) -> np.ndarray:
        opts = self.options
        sys = self.system
        C = sys.n_classes
        lo, hi = opts.box_margin, 1.0 - opts.box_margin
        w = sys.tx_weight
        rows: list[np.ndarray] = []
        u = min(max(s / max(w.sum(), 1e-30), lo), hi)
        rows.append(np.full(C, u))
        for wx in warm:
            row = np.asarray(wx, dtype=np.float64)
            # rescale to the target mass multiplicatively: the projection
            # below spreads any residue uniformly, which would lift the
            # zeros of a localized profile and wreck its entropy terms
            mass = float((w * row).sum())
            if mass > 1e-12 and s > 0:
                row = row * min(s / mass, hi / max(float(row.max()), 1e-12))
            rows.append(row)
        widths = sorted({max(1, C // 8), max(1, C // 6), max(1, C // 4), max(1, C // 2)})
        idx = np.arange(C)
        for width in widths:
            for offset in range(0, C, width):
                if len(rows) >= opts.multistarts - max(4, opts.multistarts // 4):
                    break
                # localized bump with decaying shoulders; hard-edged windows
                # sit outside the parity polytope
                dist = np.maximum(0, np.maximum(offset - idx, idx - (offset + width - 1)))
                rows.append(np.maximum(lo, 0.45 * 0.25**dist))
        rng = generator(opts.seed, "starts", *key)
        while len(rows) < opts.multistarts:
            rows.append(0.6 * open_uniform(rng, C))
        x0 = np.stack(rows[: opts.multistarts])
        return _project_slice(x0, w, s, lo, hi)

    def maximize(self, s: float, key: tuple, warm: tuple[np.ndarray, ...] = ()) -> PointResult:
        opts = self.options
        sys = self.system
        lo, hi = opts.box_margin, 1.0 - opts.box_margin
        w = sys.tx_weight
        delta = s / sys.norm_len
        s_max = float((w * hi).sum())
        if s > s_max - 1e-12 or sys.n_classes == 0:
            return PointResult(delta, -np.inf, None, False, 0, np.nan, self.inner_failures)

        x = self._starts(s, key, warm)
        F, g, feas = self._evaluate(x)
        base = x[0]
        for _ in range(14):
            bad = ~np.isfinite(F)
            if not bad.any():
                break
            x[bad] = _project_slice(0.5 * (x[bad] + base), w, s, lo, hi)
            F, g, feas = self._evaluate(x)

        B = x.shape[0]
        eta = np.full(B, opts.step_init)
        stall = np.zeros(B, dtype=np.int64)
        alive = np.isfinite(F)
        for _ in range(opts.ascent_iterations):
            if not alive.any():
                break
            prop = _project_slice(x + eta[:, None] * g, w, s, lo, hi)
            Fp, gp, fp = self._evaluate(prop)
            acc = alive & fp & (Fp > F + 1e-14)
            x[acc] = prop[acc]
            F[acc] = Fp[acc]
            g[acc] = gp[acc]
            eta[acc] = np.minimum(eta[acc] * 1.3, 5.0)
            rej = alive & ~acc
            eta[rej] *= 0.5
            stall[acc] = 0
            stall[rej] += 1
            alive &= (eta > opts.eta_floor) & (stall < opts.stall_limit)

        finite = np.isfinite(F)
        if not finite.any():
            return PointResult(delta, -np.inf, None, False, 0, np.nan, self.inner_failures)
        best = int(np.argmax(np.where(finite, F, -np.inf)))
        agree = int((np.abs(F[finite] - F[best]) <= 1e-6).sum())
        # polish the runners-up too: a localized profile often trails the
        # spread-out one before its active facets are slid along, then
        # overtakes it
        order = np.argsort(np.where(finite, F, -np.inf))[::-1]
        picked: list[int] = []
        for idx in order[: max(1, opts.polish_top)]:
            i = int(idx)
            if not finite[i] or F[i] < F[best] - opts.polish_gate:
                break
            if any(abs(F[i] - F[j]) <= 1e-9 for j in picked):
                continue
            picked.append(i)
        xb, Fb, gb = self._polish(x[best], g[best], float(F[best]))
        for i in picked:
            if i == best:
                continue
            xi, Fi, gi = self._polish(x[i], g[i], float(F[i]))
            if Fi > Fb:
                xb, Fb, gb = xi, Fi, gi
        interior = (xb > lo * 2) & (xb < hi - lo)
        gs = gb.copy()
        wi = w * interior
        denom = float((wi * wi).sum())
        if denom > 0:
            gs = gs - ((gs * wi).sum() / denom) * w
        pg = float(np.abs(gs[interior]).max()) if interior.any() else 0.0
        return PointResult(
            delta, Fb / sys.norm_len, xb.copy(), True, agree, pg, self.inner_failures
        )

    def _polish(
        self, x: np.ndarray, g: np.ndarray, F: float
    ) -> tuple[np.ndarray, float, np.ndarray]:
        """Slide the ascent endpoint along its active constraints.

        Projected gradient steps stall once the optimum sits on parity
        facets: almost every proposal crosses a facet and is rejected.
        Each polish round solves a small LP for the steepest feasible
        direction (active facets, box walls, and the mass constraint as
        linear constraints on the step) and line-searches along it.
        """
        opts = self.options
        sys = self.system
        lo, hi = opts.box_margin, 1.0 - opts.box_margin
        w = sys.tx_weight
        eps = opts.polish_active_eps
        for _ in range(opts.polish_rounds):
            normals = []
            for grp in sys.groups:
                xe = x[grp.edge_cls]
                margins = grp.b - xe @ grp.A.T
                for ci, fi in zip(*np.nonzero(margins < eps)):
                    row = np.zeros(sys.n_classes)
                    np.add.at(row, grp.edge_cls[ci], grp.A[fi])
                    normals.append(row)
            a_ub = np.stack(normals) if normals else None
            b_ub = np.zeros(len(normals)) if normals else None
            lower = np.where(x <= lo + eps, 0.0, -1.0)
            upper = np.where(x >= hi - eps, 0.0, 1.0)
            lp = linprog(
                -g,
                A_ub=a_ub,
                b_ub=b_ub,
                A_eq=w[None, :],
                b_eq=np.zeros(1),
                bounds=np.column_stack([lower, upper]),
                method="highs",
            )
            if not lp.success:
                break
            d = lp.x
            gain = float(g @ d)
            if gain <= 1e-10 * (1.0 + float(np.abs(g).max())):
                break
            t_max = 1.0
            for grp in sys.groups:
                rate = d[grp.edge_cls] @ grp.A.T
                margins = grp.b - x[grp.edge_cls] @ grp.A.T
                rising = rate > 1e-14
                if rising.any():
                    room = (margins[rising] - opts.feas_margin) / rate[rising]
                    t_max = min(t_max, float(room.min()))
            up = d > 1e-14
            down = d < -1e-14
            if up.any():
                t_max = min(t_max, float(((hi - x[up]) / d[up]).min()))
            if down.any():
                t_max = min(t_max, float(((lo - x[down]) / d[down]).min()))
            if t_max <= 0.0:
                break
            steps = 0.999 * t_max * 0.5 ** np.arange(14)
            cand = x[None, :] + steps[:, None] * d[None, :]
            Fc, gc, feas = self._evaluate(cand)
            if not np.isfinite(Fc).any() or Fc.max() <= F + 1e-14:
                break
            pick = int(np.argmax(Fc))
            x, F, g = cand[pick], float(Fc[pick]), gc[pick]
        return x, F, g

    def r_of_delta(self, delta: float, key: tuple, warm: tuple[np.ndarray, ...] = ()) -> PointResult:
        return self.maximize(delta * self.system.norm_len, key, warm)


def spectral_shape(
    proto: Protograph, delta: float, options: SpectralOptions | None = None
) -> float:
    """Normalized asymptotic spectrum value r(delta)."""
    return SpectralEngine(proto, options).r_of_delta(float(delta), ("single", 0)).r


@dataclass(frozen=True)
class SpectralCurve:
    """Sampled r(delta) with the crossing analysis attached."""

    deltas: np.ndarray
    r_values: np.ndarray
    delta_min: float | None
    bracket: tuple[float, float] | None
    status: str
    negativity_certificate: tuple[tuple[float, float], ...]
    agree_counts: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "deltas": [float(d) for d in self.deltas],
            "r_values": [float(r) for r in self.r_values],
            "delta_min": None if self.delta_min is None else float(self.delta_min),
            "bracket": None if self.bracket is None else [float(b) for b in self.bracket],
            "status": self.status,
            "negativity_certificate": [[float(a), float(b)] for a, b in self.negativity_certificate],
        }


@dataclass(frozen=True)
class GrowthResult:
    """delta_min scan outcome for one protograph ensemble."""

    proto_name: str
    normalization: str
    status: str
    delta_min: float | None
    curve: SpectralCurve
    crossing_profile: tuple[float, ...] | None = None

    def to_json(self) -> dict:
        out = {
            "proto_name": self.proto_name,
            "normalization": self.normalization,
            "status": self.status,
            "delta_min": None if self.delta_min is None else float(self.delta_min),
        }
        out.update(self.curve.to_json())
        return out


def growth_rate(
    proto: Protograph,
    options: SpectralOptions | None = None,
    warm_starts: tuple[np.ndarray, ...] = (),
) -> GrowthResult:
    """Scan r(delta) on a grid and bisect the first zero crossing.

    The grid walk warm-starts each point from the previous optimum; the
    crossing is bisected to ``bisect_tol``.  If r never becomes positive
    the result carries a negativity certificate instead of a crossing.
    ``warm_starts`` supplies extra start profiles (length ``n_classes``)
    that are mixed into every optimizer call; the crossing optimum is
    returned as ``crossing_profile`` so callers can chain related scans.
    """
    opts = options or SpectralOptions()
    engine = SpectralEngine(proto, opts)
    deltas: list[float] = []
    values: list[float] = []
    agrees: list[int] = []
    warm: tuple[np.ndarray, ...] = ()
    bracket = None
    hi_x: np.ndarray | None = None
    i = 0
    while True:
        d = opts.delta_start + i * opts.delta_step
        if d > opts.delta_stop + 1e-12:
            break
        res = engine.r_of_delta(d, ("grid", i), warm + warm_starts)
        deltas.append(d)
        values.append(res.r)
        agrees.append(res.agree_count)
        if res.x_classes is not None:
            warm = (res.x_classes,)
        if res.r > 0.0:
            prev = deltas[-2] if len(deltas) >= 2 else max(opts.delta_step / 1e3, 1e-7)
            bracket = (prev, d)
            hi_x = res.x_classes
            break
        i += 1

    if bracket is None:
        finite = [v for v in values if np.isfinite(v)]
        rising = len(finite) >= 2 and finite[-1] > finite[-2]
        status = STATUS_NO_CROSSING if rising else STATUS_NO_LINEAR_GROWTH
        curve = SpectralCurve(
            np.asarray(deltas),
            np.asarray(values),
            None,
            None,
            status,
            tuple((d, v) for d, v in zip(deltas, values)),
            tuple(agrees),
        )
        return GrowthResult(proto.name, opts.normalization, status, None, curve)

    lo_d, hi_d = bracket
    lo_warm = warm
    step = 0
    while hi_d - lo_d > opts.bisect_tol:
        mid = 0.5 * (lo_d + hi_d)
        res = engine.r_of_delta(mid, ("bisect", step), lo_warm + warm_starts)
        step += 1
        if res.x_classes is not None:
            lo_warm = (res.x_classes,) + tuple(lo_warm[:1])
        if res.r > 0.0:
            hi_d = mid
            if res.x_classes is not None:
                hi_x = res.x_classes
        else:
            lo_d = mid
    delta_min = 0.5 * (lo_d + hi_d)
    certificate = tuple((d, v) for d, v in zip(deltas, values) if v <= 0.0)
    curve = SpectralCurve(
        np.asarray(deltas),
        np.asarray(values),
        delta_min,
        (lo_d, hi_d),
        STATUS_OK,
        certificate,
        tuple(agrees),
    )
    profile = None if hi_x is None else tuple(float(v) for v in hi_x)
    return GrowthResult(
        proto.name, opts.normalization, STATUS_OK, delta_min, curve, profile
    )


@dataclass(frozen=True)
class BoundCurve:
    """Free-distance growth lower bounds lambda * delta_min(lambda)."""

    proto_name: str
    lift_factor: int | None
    expand_seed: int | None
    lambdas: tuple[int, ...]
    delta_mins: tuple[float | None, ...]
    bounds: tuple[float | None, ...]
    statuses: tuple[str, ...]
    plateau_onset: int | None
    plateau_value: float | None

    def to_json(self) -> dict:
        return {
            "proto_name": self.proto_name,
            "expand_factor": self.lift_factor,
            "expand_seed": self.expand_seed,
            "lambdas": list(self.lambdas),
            "delta_mins": [None if d is None else float(d) for d in self.delta_mins],
            "bounds": [None if b is None else float(b) for b in self.bounds],
            "statuses": list(self.statuses),
            "plateau_onset": self.plateau_onset,
            "plateau_value": None if self.plateau_value is None else float(self.plateau_value),
        }


def conv_bound(
    proto: Protograph,
    lambda_max: int,
    expand_factor: int | None = None,
    expand_seed: int = 0,
    options: SpectralOptions | None = None,
) -> BoundCurve:
    """Tail-biting bound curve lambda * delta_min(lambda) for lambda <= lambda_max.

    Protographs with a trivial cut (gcd(n_c, n_v) = 1) must supply an
    ``expand_factor``; the graph-cover expansion preserves the ensemble
    while making the partition nontrivial.
    """
    opts = options or SpectralOptions()
    used_factor: int | None = None
    used_seed: int | None = None
    try:
        unwrapping = cut(proto)
    except TrivialCutError:
        if expand_factor is None:
            raise
        expanded = expand(proto, expand_factor, expand_seed)
        unwrapping = cut(expanded)
        used_factor = expand_factor
        used_seed = expand_seed
    return conv_bound_from_unwrapping(
        unwrapping, lambda_max, opts, used_factor, used_seed, proto.name
    )


def _window_profiles(
    unwrapping: Unwrapping, k_max: int, opts: SpectralOptions
) -> tuple[tuple[int, np.ndarray], ...]:
    """Crossing profiles of the k-period terminated ensembles, k <= k_max.

    Padding a k-period codeword profile with an empty period embeds it
    into the (k+1)-period ensemble, so each scan warm-starts from its
    predecessors and the absolute crossing weight is nonincreasing in k.
    Windows that fail protograph validation (short windows of
    near-square cuts) or never cross zero are skipped.  Profiles come
    back per-variable, shaped (k, n_v); the scan grid is coarsened
    because these only seed the tail-biting searches.
    """
    if k_max < 1:
        return ()
    scan = replace(
        opts,
        delta_step=max(opts.delta_step, 2e-3),
        bisect_tol=max(opts.bisect_tol, 1e-4),
    )
    n_v = unwrapping.n_v
    out: list[tuple[int, np.ndarray]] = []
    for k in range(1, k_max + 1):
        try:
            win = terminate(unwrapping, k)
        except ProtographError:
            continue
        system = build_check_system(win, scan.normalization)
        if system.n_classes == 0:
            continue
        warm = tuple(
            _variables_to_classes(
                system,
                np.vstack(
                    [xv, np.full((k - kk, n_v), scan.box_margin)]
                ).reshape(-1),
            )
            for kk, xv in out
        )
        res = growth_rate(win, scan, warm_starts=warm)
        if res.delta_min is None or res.crossing_profile is None:
            continue
        xv = _classes_to_variables(
            system, np.asarray(res.crossing_profile), k * n_v, scan.box_margin
        ).reshape(k, n_v)
        out.append((k, xv))
    return tuple(out)


def conv_bound_from_unwrapping(
    unwrapping: Unwrapping,
    lambda_max: int,
    options: SpectralOptions | None = None,
    lift_factor: int | None = None,
    expand_seed: int | None = None,
    name: str | None = None,
) -> BoundCurve:
    opts = options or SpectralOptions()
    if lambda_max < 1:
        raise ValueError("lambda_max must be >= 1")
    lambdas = tuple(range(1, lambda_max + 1))
    n_v = unwrapping.n_v
    windows = _window_profiles(unwrapping, lambda_max - 1, opts)
    delta_mins: list[float | None] = []
    bounds: list[float | None] = []
    statuses: list[str] = []
    prev_profile: np.ndarray | None = None
    prev_lam = 0
    for lam in lambdas:
        tb = tailbite(unwrapping, lam)
        # The low-weight optimum is a bump localized over a few periods.
        # Two families seed this lambda's search: the crossing optimum at
        # the previous lambda padded with empty periods at each cyclic
        # position, and the terminated-window optima, which are exactly
        # the tail-biting branches supported on k < lambda consecutive
        # periods.  The embedding needs class index i to be variable
        # column i, which holds whenever no check-degree reductions
        # merged or pinned variables.
        warm: tuple[np.ndarray, ...] = ()
        if lam > 1 and (prev_profile is not None or windows):
            system = build_check_system(tb, opts.normalization)
            clean = system.n_pinned == 0 and all(
                len(m) == 1 for m in system.members
            )
            if clean and system.n_classes == lam * n_v:
                rows: list[np.ndarray] = []
                if prev_profile is not None:
                    pad = np.full((lam - prev_lam, n_v), opts.box_margin)
                    rows.extend(
                        np.insert(prev_profile, pos, pad, axis=0).reshape(-1)
                        for pos in range(prev_lam + 1)
                    )
                rows.extend(
                    np.vstack(
                        [xv, np.full((lam - k, n_v), opts.box_margin)]
                    ).reshape(-1)
                    for k, xv in windows
                    if k < lam
                )
                warm = tuple(rows)
        result = growth_rate(tb, opts, warm_starts=warm)
        statuses.append(result.status)
        delta_mins.append(result.delta_min)
        bounds.append(None if result.delta_min is None else lam * result.delta_min)
        if (
            result.crossing_profile is not None
            and len(result.crossing_profile) == lam * n_v
        ):
            prev_profile = np.asarray(result.crossing_profile).reshape(lam, n_v)
            prev_lam = lam
    onset, value = _detect_plateau(lambdas, bounds, opts.plateau_tol)
    return BoundCurve(
        name or unwrapping.source.name,
        lift_factor,
        expand_seed,
        lambdas,
        tuple(delta_mins),
        tuple(bounds),
        tuple(statuses),
        onset,
        value,
    )


def _detect_plateau(
    lambdas: tuple[int, ...], bounds: list[float | None], tol: float
) -> tuple[int | None, float | None]:
    """Smallest lambda from which two successive bound increments stay
    below tol; the plateau value is the final bound."""
    for j in range(len(bounds) - 2):
        window = bounds[j : j + 3]
        if any(b is None for b in window):
            continue
        if abs(window[1] - window[0]) < tol and abs(window[2] - window[1]) < tol:
            return lambdas[j], bounds[-1]
    return None, None


def check_enumerator(
    x, parity: int = 0, tol: float = 1e-10, cap: int = 200
) -> tuple[float, np.ndarray]:
    """Exponent a(x) of one check's overlap count and the saddle point t*.

    ``x`` holds the per-edge weight fractions; ``parity`` selects even
    (0) or odd (1) overlap counts.  Edges at the x = 0 / x = 1 boundary
    are eliminated analytically (an x = 1 edge flips the parity of the
    rest).  Returns (a, t_star) with t* entries 0 and inf at eliminated
    boundary edges; a = -inf when x is outside the parity polytope.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be one-dimensional")
    if (x < -1e-12).any() or (x > 1.0 + 1e-12).any():
        raise ValueError("weight fractions must lie in [0, 1]")
    x = np.clip(x, 0.0, 1.0)
    t_star = np.full(x.shape, np.nan)
    at_zero = x <= 1e-12
    at_one = x >= 1.0 - 1e-12
    t_star[at_zero] = 0.0
    t_star[at_one] = np.inf
    p = (parity + int(at_one.sum())) % 2
    inner = ~(at_zero | at_one)
    xi = x[inner]
    k = int(inner.sum())
    neg_inf = float("-inf")

    if k == 0:
        return (0.0 if p == 0 else neg_inf), t_star
    if k == 1:
        if p == 0:
            return neg_inf, t_star
        t_star[inner] = xi[0] / (1.0 - xi[0])
        return float(_entropy(xi)[0]), t_star
    if k == 2:
        if p == 0:
            if abs(xi[0] - xi[1]) > 1e-9:
                return neg_inf, t_star
            t_star[inner] = xi / (1.0 - xi)
            return float(_entropy(np.array([xi.mean()]))[0]), t_star
        if abs(xi.sum() - 1.0) > 1e-9:
            return neg_inf, t_star
        t_star[inner] = xi
        return float(_entropy(np.array([xi[0]]))[0]), t_star

    S, A, b = _subset_matrices(k, p)
    if (b - A @ xi).min() < 0.0:
        return neg_inf, t_star
    xc = np.clip(xi, 1e-12, 1.0 - 1e-12)
    phi, s, conv = _newton_even(S, xi[None, :], np.log(xc / (1.0 - xc))[None, :], tol, cap)
    if not conv[0]:
        raise InnerSolverError(
            f"saddle-point iteration did not converge (residual bound {tol} not met)"
        )
    t_star[inner] = np.exp(s[0])
    return float(phi[0]), t_star


__all__ = [
    "SpectralOptions",
    "SpectralEngine",
    "CheckSystem",
    "build_check_system",
    "check_enumerator",
    "spectral_shape",
    "growth_rate",
    "conv_bound",
    "conv_bound_from_unwrapping",
    "GrowthResult",
    "SpectralCurve",
    "BoundCurve",
    "PointResult",
    "InnerSolverError",
    "OptimizerUnreliableError",
    "STATUS_OK",
    "STATUS_NO_CROSSING",
    "STATUS_NO_LINEAR_GROWTH",
]
