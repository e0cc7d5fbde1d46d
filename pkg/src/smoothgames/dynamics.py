"""Gradient updates with heavy-ball momentum, simultaneous or alternating.

With block step sizes ``eta1`` (theta) and ``eta2`` (phi) and momenta
``beta1``, ``beta2``::

    theta' = theta - eta1 * g_theta(theta, phi) + beta1 * (theta - theta_prev)
    phi'   = phi   - eta2 * g_phi(src, phi)     + beta2 * (phi - phi_prev)

where ``src`` is ``theta`` for simultaneous updates and the fresh ``theta'``
for alternating ones. On the bilinear game this is
``theta' = theta - eta1 A phi + ...`` and ``phi' = phi + eta2 A^T src + ...``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DimensionError, NoEquilibriumError, NumericalError
from .games import AlphaGame, BilinearGame, JointPoint
from .spectral import svd

DIVERGENCE_FACTOR = 1e12


class Scheme(str, Enum):
    SIMULTANEOUS = "simultaneous"
    ALTERNATING = "alternating"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        aliases = {"sim": cls.SIMULTANEOUS, "alt": cls.ALTERNATING}
        key = str(value).lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class MethodConfig:
    scheme: Scheme
    eta1: float
    eta2: float
    beta1: float = 0.0
    beta2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        for name in ("eta1", "eta2", "beta1", "beta2"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if self.eta1 < 0 or self.eta2 < 0:
            raise ValueError("step sizes must be nonnegative")

    @classmethod
    def uniform(cls, scheme, eta: float, beta: float = 0.0) -> "MethodConfig":
        """Same step size and momentum for both players."""
        return cls(scheme, eta, eta, beta, beta)

    def to_dict(self) -> dict:
        return {"scheme": self.scheme.value, "eta1": self.eta1, "eta2": self.eta2,
                "beta1": self.beta1, "beta2": self.beta2}


@dataclass(frozen=True)
class AugmentedState:
    current: JointPoint
    previous: JointPoint

    def __post_init__(self):
        if self.current.dims != self.previous.dims:
            raise DimensionError("current and previous iterates differ in shape")

    @classmethod
    def at_rest(cls, point: JointPoint) -> "AugmentedState":
        """State with zero velocity: the previous iterate equals the current one."""
        return cls(point, point)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.current.as_vector(), self.previous.as_vector()])


def _advance(game, cfg: MethodConfig, th, ph, th_prev, ph_prev):
    th_new = th - cfg.eta1 * game.theta_grad(th, ph) + cfg.beta1 * (th - th_prev)
    src = th_new if cfg.scheme is Scheme.ALTERNATING else th
    ph_new = ph - cfg.eta2 * game.phi_grad(src, ph) + cfg.beta2 * (ph - ph_prev)
    return th_new, ph_new


def step(game, config: MethodConfig, state: AugmentedState) -> AugmentedState:
    """One application of the momentum update; returns ``(omega_{t+1}, omega_t)``."""
    cur, prev = state.current, state.previous
    if cur.dims != game.dims:
        raise DimensionError(f"state has dims {cur.dims}, game expects {game.dims}")
    with np.errstate(over="ignore", invalid="ignore"):
        th, ph = _advance(game, config, cur.theta, cur.phi, prev.theta, prev.phi)
    if not (np.all(np.isfinite(th)) and np.all(np.isfinite(ph))):
        raise NumericalError("update produced non-finite values")
    return AugmentedState(JointPoint(th, ph), cur)


def gradient_step(game, config: MethodConfig, point: JointPoint) -> JointPoint:
    """Plain (memoryless) gradient update; momenta in ``config`` are ignored."""
    if point.dims != game.dims:
        raise DimensionError(f"point has dims {point.dims}, game expects {game.dims}")
    th = point.theta - config.eta1 * game.theta_grad(point.theta, point.phi)
    src = th if config.scheme is Scheme.ALTERNATING else point.theta
    ph = point.phi - config.eta2 * game.phi_grad(src, point.phi)
    return JointPoint(th, ph)


def _kernel_projection(a: np.ndarray, theta0, phi0, theta_min, phi_min):
    dec = svd(a)
    r = dec.rank
    # rotate, drop the first r (range) coordinates, rotate back
    ut = dec.u @ theta0
    ut[:r] = 0.0
    vp = dec.v @ phi0
    vp[:r] = 0.0
    return JointPoint(theta_min + dec.u.T @ ut, phi_min + dec.v.T @ vp)


def project_equilibrium(game, init: JointPoint) -> JointPoint:
    """Equilibrium the iterates started at ``init`` are measured against.

    For bilinear games the update never moves the components of ``theta``
    (resp. ``phi``) lying in the kernel of ``A^T`` (resp. ``A``); the returned
    point is the minimum-norm equilibrium plus those kernel components of
    ``init``, so ``theta_t - theta*`` stays in range(A) along the run. Other
    families use their equilibrium at the origin (for ``AlphaGame`` with
    ``alpha == 0`` the bilinear projection is applied).
    """
    if init.dims != game.dims:
        raise DimensionError(f"point has dims {init.dims}, game expects {game.dims}")
    if isinstance(game, BilinearGame):
        if not game.has_equilibrium:
            raise NoEquilibriumError("the game admits no equilibrium")
        eq = game.equilibrium()
        return _kernel_projection(game.a, init.theta, init.phi, eq.theta, eq.phi)
    if isinstance(game, AlphaGame) and game.alpha == 0.0:
        d, p = game.dims
        return _kernel_projection(game.a, init.theta, init.phi, np.zeros(d), np.zeros(p))
    return game.equilibrium()


@dataclass
class Trajectory:
    deltas: np.ndarray
    config: MethodConfig
    equilibrium_used: JointPoint
    iterates: list = field(default_factory=list)
    record_every: int | None = None
    diverged_at: int | None = None

    @property
    def steps_run(self) -> int:
        return len(self.deltas) - 1

    @property
    def final_ratio(self) -> float:
        """Delta_T / Delta_0 (``inf`` when Delta_0 is zero and Delta_T is not)."""
        d0 = self.deltas[0]
        if d0 == 0:
            return 0.0 if self.deltas[-1] == 0 else float("inf")
        return float(self.deltas[-1] / d0)


def run(game, config: MethodConfig, init: JointPoint, steps: int, record_every: int | None = None) -> Trajectory:
    """Iterate the update ``steps`` times from ``init`` with zero initial velocity.

    ``deltas[t]`` is the squared distance to :func:`project_equilibrium` of
    ``init``. The run stops early at the first step where it exceeds
    ``1e12 * deltas[0]``; that step is stored in ``diverged_at``. When
    ``record_every`` is set, iterates at steps ``0, k, 2k, ...`` (and the last
    step) are kept as ``(step, JointPoint)`` pairs.
    """
    if int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps!r}")
    if record_every is not None and (int(record_every) != record_every or record_every < 1):
        raise ValueError(f"record_every must be a positive integer, got {record_every!r}")
    if init.dims != game.dims:
        raise DimensionError(f"point has dims {init.dims}, game expects {game.dims}")
    steps = int(steps)
    eq = project_equilibrium(game, init)
    th_star, ph_star = eq.theta, eq.phi

    th = np.array(init.theta)
    ph = np.array(init.phi)
    th_prev, ph_prev = th, ph
    deltas = np.empty(steps + 1)
    d0 = float(np.dot(th - th_star, th - th_star) + np.dot(ph - ph_star, ph - ph_star))
    deltas[0] = d0
    ceiling = DIVERGENCE_FACTOR * d0 if d0 > 0 else np.inf
    iterates = [(0, init)] if record_every else []
    diverged_at = None

    advance = _advance
    last = 0
    for t in range(1, steps + 1):
        th_new, ph_new = advance(game, config, th, ph, th_prev, ph_prev)
        th_prev, ph_prev, th, ph = th, ph, th_new, ph_new
        et = th - th_star
        ep = ph - ph_star
        delta = float(et @ et + ep @ ep)
        deltas[t] = delta
        last = t
        if record_every and t % record_every == 0:
            iterates.append((t, JointPoint(th, ph)))
        if not np.isfinite(delta):
            raise NumericalError(f"non-finite iterate at step {t}")
        if delta > ceiling:
            diverged_at = t
            break
    deltas = deltas[: last + 1]
    if record_every and iterates[-1][0] != last:
        iterates.append((last, JointPoint(th, ph)))
    return Trajectory(deltas=deltas, config=config, equilibrium_used=eq, iterates=iterates,
                      record_every=record_every, diverged_at=diverged_at)


def exact_linear_operator(game, config: MethodConfig) -> np.ndarray:
    """Matrix M with ``(e_{t+1}, e_t) = M (e_t, e_{t-1})`` for the displacement e from equilibrium.

    The state is stacked as ``(theta_t, phi_t, theta_{t-1}, phi_{t-1})``. When the game
    has no affine offset (b = c = 0 for bilinear games, always for the other
    families) the displacement is the state itself.
    """
    d, p = game.dims
    m = d + p
    jac = game.jacobian()
    j_tt, j_tp = jac[:d, :d], jac[:d, d:]
    j_pt, j_pp = jac[d:, :d], jac[d:, d:]
    e1, e2 = config.eta1, config.eta2
    b1, b2 = config.beta1, config.beta2

    theta_row = np.zeros((d, 2 * m))
    theta_row[:, :d] = (1 + b1) * np.eye(d) - e1 * j_tt
    theta_row[:, d:m] = -e1 * j_tp
    theta_row[:, m:m + d] = -b1 * np.eye(d)

    phi_row = np.zeros((p, 2 * m))
    phi_row[:, d:m] = (1 + b2) * np.eye(p) - e2 * j_pp
    phi_row[:, m + d:] = -b2 * np.eye(p)
    if config.scheme is Scheme.ALTERNATING:
        phi_row -= e2 * j_pt @ theta_row
    else:
        phi_row[:, :d] -= e2 * j_pt

    op = np.zeros((2 * m, 2 * m))
    op[:d] = theta_row
    op[d:m] = phi_row
    op[m:, :m] = np.eye(m)
    return op


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, dest) -> None:
    """Write ``step,delta`` rows, plus ``theta_i``/``phi_j`` columns when iterates were recorded.

    Iterate columns are empty on steps that were not recorded. ``dest`` is a
    path or a text stream.
    """
    recorded = {t: pt for t, pt in traj.iterates}
    header = ["step", "delta"]
    if recorded:
        d, p = traj.equilibrium_used.dims
        header += [f"theta_{i}" for i in range(d)] + [f"phi_{j}" for j in range(p)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for t, delta in enumerate(traj.deltas):
        row = [str(t), _fmt(delta)]
        if recorded:
            pt = recorded.get(t)
            if pt is None:
                row += [""] * (len(header) - 2)
            else:
                row += [_fmt(v) for v in pt.theta] + [_fmt(v) for v in pt.phi]
        writer.writerow(row)
    text = buf.getvalue()
    if isinstance(dest, (str, Path)):
        try:
            Path(dest).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write trajectory to {dest}: {exc}") from exc
    else:
        dest.write(text)
