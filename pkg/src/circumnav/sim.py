"""Closed-loop simulation engine.

Each step runs the sensing/estimation/broadcast/control loop: the sensing
agent measures its distances to the true circle, the estimator updates
``(c_hat, r_hat)``, every agent receives the estimates, computes its bearing
and ring angle, and applies the control law.

Agents, filters and estimates share one flat state advanced by a single RK4
step, so the controller always sees the estimator's instantaneous rates.
The target moves by a zero-order hold over the same step.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import rng as rngmod
from .controller import SCALE, ControllerParams, apply_actuation, control_law
from .errors import InsufficientData, InvariantViolation, ValidationError
from .estimator import (
    FILTER_INIT_MODES,
    FilterBank,
    Measurement,
    center_estimator_rhs,
    filter_rates,
    radius_estimator_rhs,
)
from .formation import RingOrder, order_agents
from .geometry import EPS_MIN, TWO_PI, Vec2, bearing, ccw_angle, distances
from .integrate import rk4_step
from .target import (
    SatelliteEstimate,
    StepLog,
    TargetScript,
    TargetState,
    draw_velocity,
    satellite_observe,
)

log = logging.getLogger(__name__)

ADAPTIVE = "adaptive"
PERFECT = "perfect"

SUM_TOL = 1e-6
BETA_TOL = 1e-9
PSI_TOL = 1e-12


@dataclass(frozen=True)
class SatelliteConfig:
    noise_c: float = 0.0
    noise_r: float = 0.0
    offset_c: tuple[float, float] = (0.0, 0.0)
    offset_r: float = 0.0


@dataclass(frozen=True)
class EstimatorConfig:
    alpha: float = 1.0
    gamma: float = 0.2
    r_floor: float = 0.1
    filter_init: str = "steady"
    mode: str = ADAPTIVE

    def __post_init__(self):
        if self.filter_init not in FILTER_INIT_MODES:
            raise ValueError(f"unknown filter_init {self.filter_init!r}")
        if self.mode not in (ADAPTIVE, PERFECT):
            raise ValueError(f"unknown estimator mode {self.mode!r}")


@dataclass(frozen=True)
class PEConfig:
    window: float = 10.0
    epsilon: float = 1e-3
    stride: int = 10


@dataclass(frozen=True)
class SimConfig:
    n_agents: int
    positions: tuple[Vec2, ...]
    target_c0: Vec2 = Vec2(25.0, 25.0)
    target_r0: float = 10.0
    target: TargetScript = TargetScript()
    satellite: SatelliteConfig = SatelliteConfig()
    estimator: EstimatorConfig = EstimatorConfig()
    controller: ControllerParams = ControllerParams()
    dt: float = 0.01
    horizon: float = 100.0
    seed: int = 0
    sensing_index: int = 0
    measurement_noise: float = 0.0
    staleness: int = 0
    probe_velocity: Optional[Vec2] = None
    pe: PEConfig = PEConfig()
    transient_cutoff: Optional[float] = None
    strict: bool = True
    name: str = "custom"

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def cutoff(self) -> float:
        if self.transient_cutoff is None:
            return 0.3 * self.horizon
        return self.transient_cutoff


@dataclass(frozen=True)
class PEWindowStat:
    start: float
    end: float
    value: float  # integral of f^2, or min eigenvalue of the integral of f f^T


@dataclass(frozen=True)
class PEResult:
    windows: tuple[PEWindowStat, ...]
    epsilon: float
    verdict: bool

    @property
    def min_value(self) -> float:
        return min(w.value for w in self.windows)


@dataclass
class RunRecord:
    config: SimConfig
    order: RingOrder
    satellite: SatelliteEstimate
    t: np.ndarray
    c: np.ndarray
    r: np.ndarray
    c_dot: np.ndarray
    r_dot: np.ndarray
    c_hat: np.ndarray
    r_hat: np.ndarray
    c_hat_dot: np.ndarray
    r_hat_dot: np.ndarray
    p: np.ndarray          # (steps+1, n, 2), ring-position order
    beta: np.ndarray       # (steps+1, n)
    Dc: np.ndarray         # true distance to centre, per agent
    Db: np.ndarray         # true distance to boundary, per agent
    Dc_hat: np.ndarray     # distance to the estimated centre
    u: np.ndarray          # raw control law output
    U: np.ndarray          # applied control
    psi_dev: np.ndarray    # max | |psi_i| - 1 | per row
    filters: np.ndarray    # (steps+1, 6)
    violations: list = field(default_factory=list)
    events: dict = field(default_factory=dict)
    runtime: float = 0.0
    completed_steps: int = 0

    @property
    def n(self) -> int:
        return self.p.shape[1]

    @property
    def W(self) -> np.ndarray:
        """Distance of every agent to the estimated boundary."""
        return self.Dc_hat - self.r_hat[:, None]


def validate(cfg: SimConfig, sat: SatelliteEstimate) -> None:
    if cfg.n_agents < 2:
        raise ValidationError("need at least two agents")
    if len(cfg.positions) != cfg.n_agents:
        raise ValidationError(
            f"{len(cfg.positions)} initial positions given for {cfg.n_agents} agents")
    if not (cfg.dt > 0 and cfg.horizon > 0):
        raise ValidationError("dt and horizon must be positive")
    if not 0 <= cfg.sensing_index < cfg.n_agents:
        raise ValidationError("sensing_index out of range")
    if not sat.r_hat0 > 0:
        raise ValidationError(f"initial radius estimate {sat.r_hat0} must be positive")
    if not cfg.target_r0 > 0:
        raise ValidationError("target radius must be positive")
    for i, p in enumerate(cfg.positions):
        d = math.hypot(p[0] - sat.c_hat0[0], p[1] - sat.c_hat0[1])
        if d <= EPS_MIN:
            raise ValidationError(f"agent {i} starts on the estimated centre")
        # on the estimated boundary is allowed (equilibrium runs start there)
        if d < sat.r_hat0 * (1 - 1e-12):
            raise ValidationError(
                f"agent {i} starts inside the estimated circle "
                f"(distance {d:.6g} < r_hat(0) = {sat.r_hat0:.6g})")


class _Loop:
    """Mutable per-run machinery; one instance per :func:`run` call."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.n = cfg.n_agents
        self.est = cfg.estimator
        self.ctl = cfg.controller
        self.probe = cfg.probe_velocity
        # per-step held quantities
        self.c0 = (0.0, 0.0)
        self.r0 = 1.0
        self.cd = (0.0, 0.0)
        self.rd = 0.0
        self.noise = (0.0, 0.0)
        self.stale = None  # (chx, chy, rh, chdx, chdy, rhd) held over the step

    def truth(self, h):
        return (self.c0[0] + self.cd[0] * h, self.c0[1] + self.cd[1] * h), self.r0 + self.rd * h

    def measure(self, h, p1):
        c, r = self.truth(h)
        Dc, Db = distances(c, r, p1)
        if self.noise != (0.0, 0.0):
            Dc = abs(Dc + self.noise[0])
            Db = abs(Db + self.noise[1])
        return Measurement(Dc, Db, Vec2(p1[0], p1[1]))

    def estimates(self, h, y):
        """(c_hat, r_hat, c_hat', r_hat', filter rates) at stage offset ``h``."""
        n2 = 2 * self.n
        if self.est.mode == PERFECT:
            c, r = self.truth(h)
            return c, r, self.cd, self.rd, (0.0,) * 6
        z = y[n2:n2 + 6]
        r_hat = y[n2 + 6]
        c_hat = (y[n2 + 7], y[n2 + 8])
        m = self.measure(h, (y[0], y[1]))
        d = filter_rates(self.est.alpha, z[0], z[1], z[2], z[3], z[4], z[5],
                         m.Dc, m.Db, m.p1[0], m.p1[1])
        rhd = radius_estimator_rhs(d[2], d[0], d[1], r_hat, self.est.gamma)
        chd = center_estimator_rhs((d[4], d[5]), d[1], d[3], c_hat, self.est.gamma)
        return c_hat, r_hat, chd, rhd, d

    def agents(self, y, c_hat, r_hat, chd, rhd, details=False):
        n = self.n
        pts = [(y[2 * k], y[2 * k + 1]) for k in range(n)]
        vs = [(p[0] - c_hat[0], p[1] - c_hat[1]) for p in pts]
        out_U = []
        out = [] if details else None
        for k in range(n):
            psi = bearing(c_hat, pts[k])
            Dh = math.hypot(*vs[k])
            b = ccw_angle(vs[k], vs[(k + 1) % n])
            u = control_law(chd, rhd, Dh, r_hat, b, psi)
            if k == 0 and self.probe is not None:
                U = self.probe
            else:
                U = apply_actuation(u, self.ctl)
            out_U.append(U)
            if details:
                out.append((b, Dh, u, U, abs(math.hypot(*psi) - 1.0)))
        return out_U, out

    def rates(self, h, y):
        c_hat, r_hat, chd, rhd, d = self.estimates(h, y)
        if self.stale is not None:
            chx, chy, r_hat, cdx, cdy, rhd = self.stale
            c_hat, chd = (chx, chy), (cdx, cdy)
        U, _ = self.agents(y, c_hat, r_hat, chd, rhd)
        dy = np.empty_like(y)
        for k, Uk in enumerate(U):
            dy[2 * k] = Uk[0]
            dy[2 * k + 1] = Uk[1]
        n2 = 2 * self.n
        if self.est.mode == PERFECT:
            dy[n2:] = 0.0
        else:
            dy[n2:n2 + 6] = d
            dy[n2 + 6] = rhd
            dy[n2 + 7] = chd[0]
            dy[n2 + 8] = chd[1]
        return dy


def run(cfg: SimConfig) -> RunRecord:
    """Simulate ``cfg`` and return the full time series.

    In strict mode the first invariant violation raises InvariantViolation;
    otherwise violations are collected in ``record.violations``.
    """
    started = time.perf_counter()
    streams = rngmod.streams(cfg.seed)
    truth = TargetState(Vec2(*cfg.target_c0), float(cfg.target_r0))
    sc = cfg.satellite
    sat = satellite_observe(truth, sc.noise_c, sc.noise_r, streams["satellite"],
                            sc.offset_c, sc.offset_r, cfg.estimator.r_floor)
    if cfg.estimator.mode == PERFECT:
        sat = SatelliteEstimate(truth.c, truth.r)
    validate(cfg, sat)

    order = order_agents(cfg.positions, sat.c_hat0, cfg.sensing_index)
    ring = order.arrange([Vec2(*p) for p in cfg.positions])
    n = cfg.n_agents
    steps = cfg.steps
    dt = cfg.dt

    loop = _Loop(cfg)
    steplog = StepLog()
    events = {"r_hat_clips": 0}
    violations: list = []

    p1 = ring[0]
    Dc0, Db0 = distances(truth.c, truth.r, p1)
    bank = FilterBank.initial(cfg.estimator.alpha, Measurement(Dc0, Db0, p1),
                              cfg.estimator.filter_init)
    y = np.concatenate([np.ravel(ring), bank.as_array(), [sat.r_hat0, *sat.c_hat0]])

    rows = steps + 1
    rec = RunRecord(
        config=cfg, order=order, satellite=sat,
        t=np.zeros(rows), c=np.zeros((rows, 2)), r=np.zeros(rows),
        c_dot=np.zeros((rows, 2)), r_dot=np.zeros(rows),
        c_hat=np.zeros((rows, 2)), r_hat=np.zeros(rows),
        c_hat_dot=np.zeros((rows, 2)), r_hat_dot=np.zeros(rows),
        p=np.zeros((rows, n, 2)), beta=np.zeros((rows, n)),
        Dc=np.zeros((rows, n)), Db=np.zeros((rows, n)), Dc_hat=np.zeros((rows, n)),
        u=np.zeros((rows, n, 2)), U=np.zeros((rows, n, 2)),
        psi_dev=np.zeros(rows), filters=np.zeros((rows, 6)),
        violations=violations, events=events,
    )
    history: list = []

    def violation(k, kind, detail):
        t = k * dt
        violations.append({"t": round(t, 12), "step": k, "kind": kind, "detail": detail})
        if cfg.strict:
            raise InvariantViolation(f"t={t:g}: {kind}: {detail}")

    def record_row(k):
        c_hat, r_hat, chd, rhd, _ = loop.estimates(0.0, y)
        history.append((c_hat[0], c_hat[1], r_hat, chd[0], chd[1], rhd))
        _, det = loop.agents(y, c_hat, r_hat, chd, rhd, details=True)
        rec.t[k] = k * dt
        rec.c[k] = loop.c0
        rec.r[k] = loop.r0
        rec.c_dot[k] = loop.cd
        rec.r_dot[k] = loop.rd
        rec.c_hat[k] = c_hat
        rec.r_hat[k] = r_hat
        rec.c_hat_dot[k] = chd
        rec.r_hat_dot[k] = rhd
        rec.p[k] = y[:2 * n].reshape(n, 2)
        rec.filters[k] = y[2 * n:2 * n + 6]
        for i, (b, Dh, u, U, pdev) in enumerate(det):
            rec.beta[k, i] = b
            rec.Dc_hat[k, i] = Dh
            rec.u[k, i] = u
            rec.U[k, i] = U
            Dc, Db = distances(loop.c0, loop.r0, rec.p[k, i])
            rec.Dc[k, i] = Dc
            rec.Db[k, i] = Db
        rec.psi_dev[k] = max(d[4] for d in det)
        check_row(k)

    def check_row(k):
        beta = rec.beta[k]
        total = float(beta.sum())
        if abs(total - TWO_PI) > SUM_TOL:
            violation(k, "beta_sum", f"sum(beta) = {total:.12g}")
        if beta.min() < -BETA_TOL:
            violation(k, "beta_negative", f"min(beta) = {beta.min():.3g}")
        now = order_agents(rec.p[k], rec.c_hat[k], 0)
        if now.perm != tuple(range(n)):
            violation(k, "ring_order", f"ring order changed to {now.perm}")
        if not rec.r_hat[k] > 0:
            violation(k, "r_hat_nonpositive", f"r_hat = {rec.r_hat[k]:.6g}")
        if rec.psi_dev[k] > PSI_TOL:
            violation(k, "bearing_norm", f"| |psi| - 1 | = {rec.psi_dev[k]:.3g}")

    def draw(k):
        truth_k = truth_state[0]
        cd, rd = draw_velocity(truth_k, cfg.target, dt, streams["target"], steplog)
        loop.cd, loop.rd = (cd.x, cd.y), rd
        if cfg.measurement_noise > 0:
            e = streams["measurement"].standard_normal(2) * cfg.measurement_noise
            loop.noise = (float(e[0]), float(e[1]))

    truth_state = [truth]
    loop.c0, loop.r0 = (truth.c.x, truth.c.y), truth.r
    k = 0
    try:
        draw(0)
        record_row(0)
        for k in range(steps):
            if cfg.staleness > 0 and cfg.estimator.mode != PERFECT:
                loop.stale = history[max(0, k - cfg.staleness)]
            # rates() takes the offset into the current step, not absolute time
            y = rk4_step(y, loop.rates, dt)
            s = truth_state[0]
            nxt = TargetState(
                Vec2(s.c.x + loop.cd[0] * dt, s.c.y + loop.cd[1] * dt),
                max(s.r + loop.rd * dt, cfg.target.r_min),
                Vec2(*loop.cd), loop.rd, (k + 1) * dt)
            truth_state[0] = nxt
            loop.c0, loop.r0 = (nxt.c.x, nxt.c.y), nxt.r
            r_idx = 2 * n + 6
            if cfg.estimator.mode != PERFECT and y[r_idx] < cfg.estimator.r_floor:
                y[r_idx] = cfg.estimator.r_floor
                events["r_hat_clips"] += 1
            if k + 1 < steps:
                draw(k + 1)
            record_row(k + 1)
            rec.completed_steps = k + 1
    finally:
        events.update(centre_clips=steplog.centre_clips, radius_clips=steplog.radius_clips,
                      radius_floors=steplog.radius_floors)
        rec.runtime = time.perf_counter() - started
    return rec


def pe_check(t, f, T: float, epsilon: float, stride: int = 1) -> PEResult:
    """Sliding-window persistent-excitation test.

    For every window ``[tau, tau + T]`` (starting every ``stride`` samples)
    integrates ``f f^T`` with the trapezoidal rule. Scalar signals are
    judged by the integral itself, vector signals by its smallest
    eigenvalue. The verdict is true iff every window exceeds ``epsilon``.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if t.size < 2 or t[-1] - t[0] < T - 1e-12:
        raise InsufficientData(f"{t[-1] - t[0] if t.size else 0:g} s of samples, window needs {T:g} s")
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-6, atol=1e-12):
        raise InsufficientData("samples are not on a uniform grid")
    w = int(round(T / dt))
    if w < 1:
        raise InsufficientData("window shorter than one sample")

    def cumtrapz(g):
        return np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * dt)])

    dim = f.shape[1]
    starts = np.arange(0, t.size - w, max(1, int(stride)))
    if dim == 1:
        I = cumtrapz(f[:, 0] ** 2)
        vals = I[starts + w] - I[starts]
    elif dim == 2:
        a = cumtrapz(f[:, 0] ** 2)
        b = cumtrapz(f[:, 0] * f[:, 1])
        c = cumtrapz(f[:, 1] ** 2)
        A = a[starts + w] - a[starts]
        Bm = b[starts + w] - b[starts]
        C = c[starts + w] - c[starts]
        vals = 0.5 * (A + C) - np.sqrt(0.25 * (A - C) ** 2 + Bm ** 2)
    else:
        vals = np.array([
            np.linalg.eigvalsh(np.trapz(f[i:i + w + 1, :, None] * f[i:i + w + 1, None, :],
                                        dx=dt, axis=0))[0]
            for i in starts])
    windows = tuple(PEWindowStat(float(t[i]), float(t[i + w]), float(v))
                    for i, v in zip(starts, vals))
    return PEResult(windows, epsilon, bool(np.all(vals > epsilon)))


def pe_signals(rec: RunRecord, since: float = 0.0):
    """Sensing-agent velocity and range rate on ``t >= since``.

    The velocity is the applied control itself. The range rate is a
    finite difference of the logged distance, used for diagnosis only.
    """
    mask = rec.t >= since - 1e-12
    t = rec.t[mask]
    p_dot = rec.U[mask, 0, :]
    Dc_dot = np.gradient(rec.Dc[:, 0], rec.t)[mask]
    return t, p_dot, Dc_dot


def pe_report(rec: RunRecord, since: Optional[float] = None) -> dict:
    cfg = rec.config
    since = cfg.cutoff if since is None else since
    t, p_dot, Dc_dot = pe_signals(rec, since)
    out = {}
    for name, sig in (("p1_dot", p_dot), ("Dc1_dot", Dc_dot)):
        res = pe_check(t, sig, cfg.pe.window, cfg.pe.epsilon, cfg.pe.stride)
        out[name] = {"verdict": res.verdict, "min_value": res.min_value,
                     "windows": len(res.windows)}
    return out


def _run_reduced(args):
    cfg, reduce = args
    rec = run(cfg)
    return rec if reduce is None else reduce(rec)


def run_many(configs: Sequence[SimConfig], parallel: int = 1,
             reduce: Optional[Callable] = None) -> list:
    """Run independent configurations, optionally across ``parallel`` processes.

    Every run owns its own state and RNG streams, so the results are the
    same as running them one after another; they come back in input order.
    ``reduce`` (a picklable, module-level callable) is applied to each record
    inside the worker to avoid shipping full records between processes.
    """
    jobs = [(cfg, reduce) for cfg in configs]
    if parallel <= 1 or len(jobs) <= 1:
        return [_run_reduced(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(_run_reduced, jobs))
