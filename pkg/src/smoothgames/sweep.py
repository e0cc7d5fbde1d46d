"""Parameter grids of scalar diagnostics, exported as ``y,x,value`` CSV.

Three kinds of grid are supported:

* ``normalized_delta``: Delta_T / Delta_0 after running the dynamics, over
  (eta, beta);
* ``max_root_magnitude_sim`` / ``max_root_magnitude_alt``: largest root
  magnitude of the bilinear characteristic quartic, over (eta, beta) with
  ``eta := sqrt(eta1 eta2 lambda)`` and ``beta1 = beta2 = beta``;
* ``optimal_beta``: grid-searched optimal momentum of the kappa-alpha game,
  over (alpha, log10 kappa).
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import dynamics, theory
from .games import BilinearGame, JointPoint, KappaAlphaGame, game_to_dict
from .spectral import poly_roots

CEILING = 1e12


class Diagnostic(str, Enum):
    NORMALIZED_DELTA = "normalized_delta"
    MAX_ROOT_MAGNITUDE_SIM = "max_root_magnitude_sim"
    MAX_ROOT_MAGNITUDE_ALT = "max_root_magnitude_alt"
    OPTIMAL_BETA = "optimal_beta"


def _axis(values, name) -> tuple:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ValueError(f"axis {name!r} is empty")
    if not all(np.isfinite(vals)):
        raise ValueError(f"axis {name!r} has non-finite values")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError(f"axis {name!r} must be strictly ascending")
    return vals


@dataclass(frozen=True)
class GridSpec:
    x_name: str
    x_values: tuple
    y_name: str
    y_values: tuple
    diagnostic: Diagnostic
    steps: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x_values", _axis(self.x_values, self.x_name))
        object.__setattr__(self, "y_values", _axis(self.y_values, self.y_name))
        object.__setattr__(self, "diagnostic", Diagnostic(self.diagnostic))
        if self.steps is not None and (int(self.steps) != self.steps or self.steps < 1):
            raise ValueError("steps must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be an unsigned integer")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.y_values), len(self.x_values)

    def to_dict(self) -> dict:
        return {"x_name": self.x_name, "x_values": list(self.x_values),
                "y_name": self.y_name, "y_values": list(self.y_values),
                "diagnostic": self.diagnostic.value, "steps": self.steps, "seed": self.seed}

    @classmethod
    def from_dict(cls, doc: dict) -> "GridSpec":
        return cls(doc["x_name"], doc["x_values"], doc["y_name"], doc["y_values"],
                   doc["diagnostic"], doc.get("steps"), doc.get("seed", 0))


@dataclass
class GridResult:
    spec: GridSpec
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.spec.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.spec.shape}")

    def cell(self, x: float, y: float) -> float:
        """Value at the grid point closest to ``(x, y)``."""
        j = int(np.argmin(np.abs(np.array(self.spec.x_values) - x)))
        i = int(np.argmin(np.abs(np.array(self.spec.y_values) - y)))
        return float(self.values[i, j])


def default_workers() -> int:
    return os.cpu_count() or 1


def _map_rows(fn, rows, workers):
    """Apply ``fn`` to each row argument, optionally in a process pool; order is preserved."""
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(rows) == 1:
        return [fn(r) for r in rows]
    with ProcessPoolExecutor(max_workers=min(workers, len(rows))) as pool:
        return list(pool.map(fn, rows))


# ---------------------------------------------------------------------------
# trajectory grids

def seeded_init(game, seed: int) -> JointPoint:
    """Standard normal starting point drawn from ``numpy.random.default_rng(seed)``."""
    d, p = game.dims
    rng = np.random.default_rng(seed)
    return JointPoint(rng.standard_normal(d), rng.standard_normal(p))


def _trajectory_row(args):
    game, scheme, beta, etas, init, steps = args
    out = []
    for eta in etas:
        cfg = dynamics.MethodConfig.uniform(scheme, eta, beta)
        try:
            traj = dynamics.run(game, cfg, init, steps)
        except (ArithmeticError, ValueError) as exc:
            out.append((CEILING, "failed", f"{type(exc).__name__}: {exc}"))
            continue
        if traj.diverged_at is not None:
            out.append((CEILING, "diverged", traj.diverged_at))
        else:
            out.append((min(max(traj.final_ratio, 0.0), CEILING), None, None))
    return out


def sweep_trajectory_grid(game, scheme, spec: GridSpec, init: JointPoint | None = None,
                          workers: int | None = 1) -> GridResult:
    """Delta_T / Delta_0 for every (eta, beta) cell, with x = eta and y = beta.

    Every cell starts from the same point, :func:`seeded_init` of ``spec.seed``
    unless ``init`` is given, with zero initial velocity. Cells that cross the
    divergence ceiling, or raise, store ``1e12`` and are listed in the
    metadata. Results do not depend on ``workers``.
    """
    if spec.diagnostic is not Diagnostic.NORMALIZED_DELTA:
        raise ValueError("trajectory grids use the normalized_delta diagnostic")
    if spec.steps is None:
        raise ValueError("trajectory grids need spec.steps")
    scheme = dynamics.Scheme.parse(scheme)
    if init is None:
        init = seeded_init(game, spec.seed)
    t0 = time.perf_counter()
    rows = [(game, scheme, beta, spec.x_values, init, spec.steps) for beta in spec.y_values]
    cells = _map_rows(_trajectory_row, rows, workers)
    values = np.array([[c[0] for c in row] for row in cells])
    diverged = [[i, j] for i, row in enumerate(cells) for j, c in enumerate(row) if c[1] == "diverged"]
    failed = [[i, j, c[2]] for i, row in enumerate(cells) for j, c in enumerate(row) if c[1] == "failed"]
    meta = {
        "game": game_to_dict(game),
        "scheme": scheme.value,
        "init": {"theta": init.theta.tolist(), "phi": init.phi.tolist()},
        "ceiling": CEILING,
        "divergence_count": len(diverged),
        "diverged_cells": diverged,
        "failed_cells": failed,
        "wall_time": time.perf_counter() - t0,
    }
    return GridResult(spec, values, meta)


# ---------------------------------------------------------------------------
# characteristic-polynomial grids

def max_root_magnitude(scheme, eta: float, beta: float) -> float:
    """Largest root magnitude of the bilinear quartic at ``eta1 eta2 lambda = eta^2``."""
    scheme = dynamics.Scheme.parse(scheme)
    poly_fn = theory.char_poly_alt if scheme is dynamics.Scheme.ALTERNATING else theory.char_poly_sim
    return poly_roots(poly_fn(1.0, eta, eta, beta, beta)).spectral_radius


def sweep_magnitude_grid(spec: GridSpec, scheme=None) -> GridResult:
    """Max root magnitude of the simultaneous or alternating quartic; x = eta, y = beta."""
    expected = {Diagnostic.MAX_ROOT_MAGNITUDE_SIM: dynamics.Scheme.SIMULTANEOUS,
                Diagnostic.MAX_ROOT_MAGNITUDE_ALT: dynamics.Scheme.ALTERNATING}
    if spec.diagnostic not in expected:
        raise ValueError(f"{spec.diagnostic.value} is not a root-magnitude diagnostic")
    if scheme is None:
        scheme = expected[spec.diagnostic]
    scheme = dynamics.Scheme.parse(scheme)
    if scheme is not expected[spec.diagnostic]:
        raise ValueError(f"diagnostic {spec.diagnostic.value} does not match scheme {scheme.value}")
    t0 = time.perf_counter()
    values = np.array([[max_root_magnitude(scheme, eta, beta) for eta in spec.x_values]
                       for beta in spec.y_values])
    meta = {"scheme": scheme.value, "lambda_ata": 1.0,
            "convention": "eta := sqrt(eta1*eta2*lambda), beta1 = beta2 = beta",
            "wall_time": time.perf_counter() - t0}
    return GridResult(spec, values, meta)


# ---------------------------------------------------------------------------
# optimal momentum grids

DEFAULT_ETA_GRID = np.round(np.arange(1, 401) * 0.005, 12)
DEFAULT_BETA_GRID = np.round(np.arange(-100, 101) * 0.01, 12)


def _optmom_row(args):
    log_kappa, alphas, eta_grid, beta_grid = args
    kappa = 10.0 ** log_kappa
    return [theory.optimal_momentum(KappaAlphaGame.from_kappa(a, kappa), eta_grid, beta_grid).beta_opt
            for a in alphas]


def sweep_optimal_momentum(spec: GridSpec, eta_grid=None, beta_grid=None,
                           workers: int | None = 1) -> GridResult:
    """Optimal momentum of the two-dimensional kappa-alpha game; x = alpha, y = log10(kappa).

    ``eta_grid`` and ``beta_grid`` are the inner search grids (defaults: eta in
    0.005..2 step 0.005, beta in -1..1 step 0.01); they are recorded in the
    metadata.
    """
    if spec.diagnostic is not Diagnostic.OPTIMAL_BETA:
        raise ValueError("optimal-momentum grids use the optimal_beta diagnostic")
    eta_grid = DEFAULT_ETA_GRID if eta_grid is None else np.asarray(eta_grid, dtype=float)
    beta_grid = DEFAULT_BETA_GRID if beta_grid is None else np.asarray(beta_grid, dtype=float)
    t0 = time.perf_counter()
    rows = [(lk, spec.x_values, eta_grid, beta_grid) for lk in spec.y_values]
    values = np.array(_map_rows(_optmom_row, rows, workers))
    meta = {
        "game": "kappa_alpha, n=2, d = (1/kappa, 1) scaled to trace 2",
        "eta_grid": {"min": float(eta_grid.min()), "max": float(eta_grid.max()), "count": int(eta_grid.size)},
        "beta_grid": {"min": float(beta_grid.min()), "max": float(beta_grid.max()), "count": int(beta_grid.size)},
        "wall_time": time.perf_counter() - t0,
    }
    return GridResult(spec, values, meta)


# ---------------------------------------------------------------------------
# presets

def _steps(start: float, stop: float, step: float) -> tuple:
    n = int(round((stop - start) / step))
    return tuple(float(round(start + k * step, 12)) for k in range(n + 1))


FIG4_ETAS = _steps(0.1, 1.0, 0.1)
FIG4_BETAS = _steps(-0.9, -0.1, 0.1) + _steps(0.1, 0.9, 0.1)
FIG7_ETAS = _steps(0.05, 1.0, 0.05)
FIG7_BETAS = _steps(-1.0, 1.0, 0.05)
FIG8_ALPHAS = _steps(0.1, 1.0, 0.1)
FIG8_LOG_KAPPAS = _steps(0.0, 3.0, 0.25)
FIG4_STEPS = 10_000


def preset(name: str, seed: int = 0, steps: int | None = None) -> GridSpec:
    """Pinned grids: ``fig4-alt``, ``fig4-sim``, ``fig7-sim``, ``fig7-alt`` and ``fig8``."""
    if name in ("fig4-alt", "fig4-sim"):
        return GridSpec("eta", FIG4_ETAS, "beta", FIG4_BETAS, Diagnostic.NORMALIZED_DELTA,
                        steps or FIG4_STEPS, seed)
    if name == "fig7-sim":
        return GridSpec("eta", FIG7_ETAS, "beta", FIG7_BETAS, Diagnostic.MAX_ROOT_MAGNITUDE_SIM, None, seed)
    if name == "fig7-alt":
        return GridSpec("eta", FIG7_ETAS, "beta", FIG7_BETAS, Diagnostic.MAX_ROOT_MAGNITUDE_ALT, None, seed)
    if name == "fig8":
        return GridSpec("alpha", FIG8_ALPHAS, "log10_kappa", FIG8_LOG_KAPPAS, Diagnostic.OPTIMAL_BETA, None, seed)
    raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("fig4-alt", "fig4-sim", "fig7-sim", "fig7-alt", "fig8")


def run_preset(name: str, seed: int = 0, steps: int | None = None, workers: int | None = 1) -> GridResult:
    spec = preset(name, seed, steps)
    if spec.diagnostic is Diagnostic.NORMALIZED_DELTA:
        scheme = "alternating" if name.endswith("alt") else "simultaneous"
        return sweep_trajectory_grid(BilinearGame([[1.0]]), scheme, spec, workers=workers)
    if spec.diagnostic is Diagnostic.OPTIMAL_BETA:
        return sweep_optimal_momentum(spec, workers=workers)
    return sweep_magnitude_grid(spec)


# ---------------------------------------------------------------------------
# export

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def grid_csv_text(result: GridResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["y", "x", "value"])
    for i, y in enumerate(result.spec.y_values):
        for j, x in enumerate(result.spec.x_values):
            writer.writerow([_fmt(y), _fmt(x), _fmt(result.values[i, j])])
    return buf.getvalue()


def export_grid(result: GridResult, path) -> Path:
    """Write the CSV to ``path`` and ``{spec, metadata}`` JSON next to it (same stem, ``.json``).

    Returns the sidecar path.
    """
    path = Path(path)
    side = sidecar_path(path)
    if side == path:
        raise ValueError(f"grid path {path} must not end in .json")
    doc = {"spec": result.spec.to_dict(), "metadata": result.metadata}
    try:
        path.write_text(grid_csv_text(result))
        side.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write grid to {path}: {exc}") from exc
    return side


def load_grid(path) -> GridResult:
    """Inverse of :func:`export_grid`."""
    path = Path(path)
    doc = json.loads(sidecar_path(path).read_text())
    spec = GridSpec.from_dict(doc["spec"])
    values = np.empty(spec.shape)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        if next(reader) != ["y", "x", "value"]:
            raise ValueError(f"{path}: unexpected header")
        rows = list(reader)
    if len(rows) != values.size:
        raise ValueError(f"{path}: expected {values.size} rows, found {len(rows)}")
    for k, (_, _, v) in enumerate(rows):
        values.flat[k] = float(v)
    return GridResult(spec, values, doc.get("metadata", {}))


# ---------------------------------------------------------------------------
# eigenvalue paths

def eigenvalue_path(lams, etas, beta: float) -> list[dict]:
    """Momentum roots ``mu_pm`` of each ``lam`` as ``eta`` varies, one record per (eta, lam)."""
    out = []
    for eta in etas:
        for lam in np.atleast_1d(np.asarray(lams, dtype=complex)):
            me = theory.momentum_eigenvalues(lam, eta, beta)
            base = 1 - eta * lam
            out.append({"eta": float(eta), "lambda": complex(lam), "no_momentum": complex(base),
                        "mu_plus": me.mu_plus, "mu_minus": me.mu_minus})
    return out


def write_eigenvalue_path(records, path) -> None:
    """CSV with real/imaginary columns for ``lambda``, ``1 - eta lambda`` and ``mu_pm``."""
    cols = ("lambda", "no_momentum", "mu_plus", "mu_minus")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["eta"] + [f"{c}_{part}" for c in cols for part in ("re", "im")])
    for r in records:
        writer.writerow([_fmt(r["eta"])] + [_fmt(getattr(r[c], part)) for c in cols for part in ("real", "imag")])
    Path(path).write_text(buf.getvalue())


__all__ = [
    "CEILING", "Diagnostic", "GridSpec", "GridResult", "PRESETS", "preset", "run_preset",
    "sweep_trajectory_grid", "sweep_magnitude_grid", "sweep_optimal_momentum",
    "max_root_magnitude", "seeded_init", "export_grid", "load_grid", "grid_csv_text",
    "eigenvalue_path", "write_eigenvalue_path", "default_workers",
]
