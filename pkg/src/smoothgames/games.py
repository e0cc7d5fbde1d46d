"""Quadratic two-player game families.

State convention: a joint point is ``(theta, phi)``. ``theta`` (the first
player, dimension d) minimizes its loss, ``phi`` (the second player,
dimension p) minimizes its own loss; in the zero-sum families below ``phi``
therefore ascends the shared objective. The vector field stacks the two
gradients in the same ``(theta, phi)`` order, so one gradient step is
``omega - eta * v(omega)`` for both players.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DimensionError, GameSpecError, NoEquilibriumError
from .spectral import Spectrum, svd

EQUILIBRIUM_RESIDUAL_TOL = 1e-8
CLASSIFY_TOL = 1e-10
TRACE_TOL = 1e-10


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _vector(x, name) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    return arr


def _matrix(a, name="a") -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"{name} must be a nonempty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class JointPoint:
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", _frozen(_vector(self.theta, "theta")))
        object.__setattr__(self, "phi", _frozen(_vector(self.phi, "phi")))

    @classmethod
    def zeros(cls, d: int, p: int) -> "JointPoint":
        return cls(np.zeros(d), np.zeros(p))

    @classmethod
    def from_vector(cls, vec, d: int) -> "JointPoint":
        vec = np.asarray(vec, dtype=float)
        return cls(vec[:d], vec[d:])

    @property
    def dims(self) -> tuple[int, int]:
        return len(self.theta), len(self.phi)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.theta, self.phi])

    def sq_distance(self, other: "JointPoint") -> float:
        return float(np.sum((self.theta - other.theta) ** 2) + np.sum((self.phi - other.phi) ** 2))

    def __eq__(self, other):
        if not isinstance(other, JointPoint):
            return NotImplemented
        return np.array_equal(self.theta, other.theta) and np.array_equal(self.phi, other.phi)

    __hash__ = None


class _QuadraticGame:
    """Shared plumbing for the three families (all have a constant Jacobian)."""

    dims: tuple[int, int]

    def theta_grad(self, theta, phi):
        raise NotImplementedError

    def phi_grad(self, theta, phi):
        raise NotImplementedError

    def jacobian(self, point: JointPoint | None = None) -> np.ndarray:
        if point is not None:
            self._check(point)
        return self._jacobian()

    def _check(self, point: JointPoint):
        if point.dims != self.dims:
            raise DimensionError(f"point has dims {point.dims}, game expects {self.dims}")

    def vector_field(self, point: JointPoint) -> JointPoint:
        self._check(point)
        return JointPoint(self.theta_grad(point.theta, point.phi), self.phi_grad(point.theta, point.phi))

    def origin(self) -> JointPoint:
        return JointPoint.zeros(*self.dims)


@dataclass(frozen=True, eq=False)
class BilinearGame(_QuadraticGame):
    """``min_theta max_phi  theta^T A phi + theta^T b + c^T phi``."""

    a: np.ndarray
    b: np.ndarray | None = None
    c: np.ndarray | None = None

    def __post_init__(self):
        a = _matrix(self.a)
        d, p = a.shape
        b = np.zeros(d) if self.b is None else _vector(self.b, "b")
        c = np.zeros(p) if self.c is None else _vector(self.c, "c")
        if b.shape != (d,) or c.shape != (p,):
            raise DimensionError(f"b must have length {d} and c length {p}")
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "c", _frozen(c))

    @property
    def dims(self) -> tuple[int, int]:
        return self.a.shape

    @property
    def has_equilibrium(self) -> bool:
        """True when b is in range(A) and c is in range(A^T)."""
        for mat, rhs in ((self.a, self.b), (self.a.T, self.c)):
            sol = np.linalg.lstsq(mat, rhs, rcond=None)[0]
            if np.linalg.norm(mat @ sol - rhs) > EQUILIBRIUM_RESIDUAL_TOL * max(1.0, np.linalg.norm(rhs)):
                return False
        return True

    def theta_grad(self, theta, phi):
        return self.a @ phi + self.b

    def phi_grad(self, theta, phi):
        return -(self.a.T @ theta + self.c)

    def _jacobian(self):
        d, p = self.dims
        jac = np.zeros((d + p, d + p))
        jac[:d, d:] = self.a
        jac[d:, :d] = -self.a.T
        return jac

    def equilibrium(self) -> JointPoint:
        """Minimum-norm zero of the vector field: ``A phi = -b``, ``A^T theta = -c``."""
        if not self.has_equilibrium:
            raise NoEquilibriumError("b or c lies outside the range of A: the game admits no equilibrium")
        dec = svd(self.a)
        r = dec.rank
        inv_s = 1.0 / dec.singular_values[:r]
        # A = U^T S V  =>  A^+ = V^T S^+ U
        phi = -dec.v[:r].T @ (inv_s * (dec.u[:r] @ self.b))
        theta = -dec.u[:r].T @ (inv_s * (dec.v[:r] @ self.c))
        return JointPoint(theta, phi)


@dataclass(frozen=True, eq=False)
class AlphaGame(_QuadraticGame):
    """``min_theta max_phi  alpha |theta|^2 + (1 - alpha) theta^T A phi - alpha |phi|^2``."""

    alpha: float
    a: np.ndarray

    def __post_init__(self):
        if not 0.0 <= float(self.alpha) <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "a", _frozen(_matrix(self.a)))

    @property
    def dims(self) -> tuple[int, int]:
        return self.a.shape

    def theta_grad(self, theta, phi):
        return 2 * self.alpha * theta + (1 - self.alpha) * (self.a @ phi)

    def phi_grad(self, theta, phi):
        return -(1 - self.alpha) * (self.a.T @ theta) + 2 * self.alpha * phi

    def _jacobian(self):
        d, p = self.dims
        al = self.alpha
        jac = np.zeros((d + p, d + p))
        jac[:d, :d] = 2 * al * np.eye(d)
        jac[:d, d:] = (1 - al) * self.a
        jac[d:, :d] = -(1 - al) * self.a.T
        jac[d:, d:] = 2 * al * np.eye(p)
        return jac

    def equilibrium(self) -> JointPoint:
        return self.origin()


@dataclass(frozen=True, eq=False)
class KappaAlphaGame(_QuadraticGame):
    """``alpha |D^1/2 theta|^2 + (1 - alpha) theta^T phi - alpha |D^1/2 phi|^2`` with diagonal D.

    ``d_diag`` must be positive, nondecreasing and sum to its length n.
    """

    alpha: float
    d_diag: np.ndarray

    def __post_init__(self):
        if not 0.0 <= float(self.alpha) <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        dd = _vector(self.d_diag, "d_diag")
        if dd.size == 0 or np.any(dd <= 0):
            raise ValueError("d_diag entries must be strictly positive")
        if np.any(np.diff(dd) < 0):
            raise ValueError("d_diag entries must be nondecreasing")
        if abs(dd.sum() - dd.size) > TRACE_TOL:
            raise ValueError(f"d_diag must sum to n={dd.size} (got {float(dd.sum())!r})")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "d_diag", _frozen(dd))

    @classmethod
    def from_kappa(cls, alpha: float, kappa: float) -> "KappaAlphaGame":
        """Two-dimensional instance with D proportional to diag(1/kappa, 1), trace 2."""
        if kappa < 1:
            raise ValueError("kappa must be >= 1")
        raw = np.array([1.0 / kappa, 1.0])
        dd = 2.0 * raw / raw.sum()
        # make the trace exactly n after rounding
        dd[1] = 2.0 - dd[0]
        return cls(alpha, dd)

    @property
    def n(self) -> int:
        return len(self.d_diag)

    @property
    def dims(self) -> tuple[int, int]:
        return self.n, self.n

    @property
    def kappa(self) -> float:
        return float(self.d_diag[-1] / self.d_diag[0])

    def theta_grad(self, theta, phi):
        return 2 * self.alpha * self.d_diag * theta + (1 - self.alpha) * phi

    def phi_grad(self, theta, phi):
        return -(1 - self.alpha) * theta + 2 * self.alpha * self.d_diag * phi

    def _jacobian(self):
        n = self.n
        al = self.alpha
        jac = np.zeros((2 * n, 2 * n))
        jac[:n, :n] = np.diag(2 * al * self.d_diag)
        jac[:n, n:] = (1 - al) * np.eye(n)
        jac[n:, :n] = -(1 - al) * np.eye(n)
        jac[n:, n:] = np.diag(2 * al * self.d_diag)
        return jac

    def jacobian_eigenvalues(self) -> Spectrum:
        """Closed form ``2 alpha d_jj +/- (1 - alpha) i``."""
        re = 2 * self.alpha * self.d_diag
        im = (1 - self.alpha) * np.ones(self.n)
        return Spectrum.from_values(np.concatenate([re + 1j * im, re - 1j * im]))

    def equilibrium(self) -> JointPoint:
        return self.origin()


Game = BilinearGame | AlphaGame | KappaAlphaGame


class GameClass(str, Enum):
    PURELY_ADVERSARIAL = "purely-adversarial"
    PURELY_COOPERATIVE = "purely-cooperative"
    MIXED = "mixed"


def classify_game(spectrum: Spectrum, tol: float = CLASSIFY_TOL) -> GameClass:
    """Adversarial if every eigenvalue is imaginary, cooperative if all are real and positive."""
    eigs = np.asarray(spectrum.eigenvalues if isinstance(spectrum, Spectrum) else spectrum, dtype=complex)
    if eigs.size == 0:
        raise ValueError("empty spectrum")
    if np.all(np.abs(eigs.real) <= tol):
        return GameClass.PURELY_ADVERSARIAL
    if np.all(np.abs(eigs.imag) <= tol) and np.all(eigs.real > 0):
        return GameClass.PURELY_COOPERATIVE
    return GameClass.MIXED


def vector_field(game, point: JointPoint) -> JointPoint:
    return game.vector_field(point)


def jacobian(game, point: JointPoint | None = None) -> np.ndarray:
    return game.jacobian(point)


def equilibrium(game) -> JointPoint:
    return game.equilibrium()


# --- JSON documents -------------------------------------------------------

FAMILIES = ("bilinear", "alpha", "kappa_alpha")


def _get(doc, key, pointer):
    if key not in doc:
        raise GameSpecError("missing required field", f"{pointer}/{key}")
    return doc[key]


def _number(value, pointer) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise GameSpecError(f"expected a number, got {type(value).__name__}", pointer)
    return float(value)


def _number_list(value, pointer) -> list[float]:
    if not isinstance(value, list) or not value:
        raise GameSpecError("expected a nonempty array of numbers", pointer)
    return [_number(v, f"{pointer}/{i}") for i, v in enumerate(value)]


def _matrix_doc(value, pointer) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise GameSpecError("expected a nonempty array of rows", pointer)
    rows = [_number_list(r, f"{pointer}/{i}") for i, r in enumerate(value)]
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise GameSpecError(f"row has {len(r)} entries, expected {width}", f"{pointer}/{i}")
    return np.array(rows)


def game_from_dict(doc) -> Game:
    """Build a game from its JSON document.

    ``{"family": "bilinear", "a": [[...]], "b": [...], "c": [...]}`` (b, c optional),
    ``{"family": "alpha", "alpha": x, "a": [[...]]}`` or
    ``{"family": "kappa_alpha", "alpha": x, "d_diag": [...]}`` (or ``"kappa": k`` for
    the two-dimensional instance).
    """
    if not isinstance(doc, dict):
        raise GameSpecError("game document must be a JSON object", "")
    family = _get(doc, "family", "")
    if family not in FAMILIES:
        raise GameSpecError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}", "/family")
    try:
        if family == "bilinear":
            a = _matrix_doc(_get(doc, "a", ""), "/a")
            b = doc.get("b")
            c = doc.get("c")
            b = None if b is None else _number_list(b, "/b")
            c = None if c is None else _number_list(c, "/c")
            if b is not None and len(b) != a.shape[0]:
                raise GameSpecError(f"expected {a.shape[0]} entries", "/b")
            if c is not None and len(c) != a.shape[1]:
                raise GameSpecError(f"expected {a.shape[1]} entries", "/c")
            return BilinearGame(a, b, c)
        alpha = _number(_get(doc, "alpha", ""), "/alpha")
        if not 0.0 <= alpha <= 1.0:
            raise GameSpecError("alpha must lie in [0, 1]", "/alpha")
        if family == "alpha":
            return AlphaGame(alpha, _matrix_doc(_get(doc, "a", ""), "/a"))
        if "d_diag" in doc:
            dd = _number_list(doc["d_diag"], "/d_diag")
            try:
                return KappaAlphaGame(alpha, dd)
            except ValueError as exc:
                raise GameSpecError(str(exc), "/d_diag") from exc
        if "kappa" not in doc:
            raise GameSpecError("missing required field (give d_diag or kappa)", "/d_diag")
        kappa = _number(doc["kappa"], "/kappa")
        if kappa < 1:
            raise GameSpecError("kappa must be >= 1", "/kappa")
        return KappaAlphaGame.from_kappa(alpha, kappa)
    except DimensionError as exc:
        raise GameSpecError(str(exc), "") from exc


def game_to_dict(game) -> dict:
    if isinstance(game, BilinearGame):
        return {"family": "bilinear", "a": game.a.tolist(), "b": game.b.tolist(), "c": game.c.tolist()}
    if isinstance(game, AlphaGame):
        return {"family": "alpha", "alpha": game.alpha, "a": game.a.tolist()}
    if isinstance(game, KappaAlphaGame):
        return {"family": "kappa_alpha", "alpha": game.alpha, "d_diag": game.d_diag.tolist()}
    raise TypeError(f"not a game: {game!r}")


def load_game(path) -> Game:
    path = Path(path)
    with path.open() as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GameSpecError(f"malformed JSON ({exc.msg} at line {exc.lineno})", "") from exc
    return game_from_dict(doc)
