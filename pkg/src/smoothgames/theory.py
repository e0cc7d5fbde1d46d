"""Closed-form spectral results for gradient methods with momentum.

Conventions: for a Jacobian eigenvalue ``lam`` the plain gradient update
multiplies the corresponding mode by ``1 - eta * lam``. With heavy-ball
momentum the mode obeys ``x_{t+1} = (1 - eta*lam + beta) x_t - beta x_{t-1}``,
whose two characteristic roots are returned by :func:`momentum_eigenvalues`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEigenvalueError, HypothesisError, OutOfRangeError
from .games import KappaAlphaGame
from .spectral import Polynomial, Spectrum

DEGENERATE_TOL = 1e-14


def _finite(*values) -> None:
    for v in values:
        z = complex(v)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError(f"non-finite argument {v!r}")


def _as_eigs(spectrum) -> np.ndarray:
    if isinstance(spectrum, Spectrum):
        return np.asarray(spectrum.eigenvalues, dtype=complex)
    return np.atleast_1d(np.asarray(spectrum, dtype=complex))


# ---------------------------------------------------------------------------
# optimal step size

@dataclass(frozen=True)
class StepSizeReport:
    eta_best: float
    rho_best: float
    lower_bound_rho_sq: float
    upper_bound_rho_sq: float
    delta_term: float
    eta_lower: float
    eta_upper: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _max_sq_factor(eigs: np.ndarray, eta) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    r2 = eigs.real**2 + eigs.imag**2
    vals = 1.0 - 2.0 * np.multiply.outer(eta, eigs.real) + np.multiply.outer(eta**2, r2)
    return vals.max(axis=-1)


def best_step_size(spectrum) -> StepSizeReport:
    """Step size minimising ``max_k |1 - eta lam_k|^2`` and the bounds that bracket it.

    Each ``f_k(eta) = |1 - eta lam_k|^2`` is a convex quadratic in ``eta``, so
    their upper envelope is piecewise quadratic and its minimum sits at a
    vertex ``Re(1/lam_k)`` of one piece or at a crossing of two pieces. All such
    candidates are enumerated and the best one is returned.

    Parameters
    ----------
    spectrum : Spectrum or array_like of complex
        Jacobian eigenvalues; all must have positive real part.

    Returns
    -------
    StepSizeReport
        ``eta_lower = Re(1/lam_1)`` and ``eta_upper = 2 Re(1/lam_1)`` with
        ``lam_1`` the eigenvalue of smallest ``Re(1/lam)``;
        ``lower_bound_rho_sq = max_k sin^2(psi_k)``;
        ``upper_bound_rho_sq = 1 - Re(1/lam_1) * delta`` where
        ``delta = min_k |lam_k|^2 (2 Re(1/lam_k) - Re(1/lam_1))``.
    """
    eigs = _as_eigs(spectrum)
    if eigs.size == 0:
        raise ValueError("spectrum is empty")
    _finite(*eigs)
    if np.any(eigs.real <= 0):
        raise HypothesisError("every eigenvalue needs a positive real part")

    r2 = eigs.real**2 + eigs.imag**2
    inv_re = eigs.real / r2
    order = np.lexsort((-r2, inv_re))
    eigs, r2, inv_re = eigs[order], r2[order], inv_re[order]

    cands = [0.0, *inv_re.tolist()]
    re = eigs.real
    for j in range(len(eigs)):
        for k in range(j + 1, len(eigs)):
            den = r2[j] - r2[k]
            if den != 0:
                eta = 2.0 * (re[j] - re[k]) / den
                if eta > 0:
                    cands.append(eta)
    cands = np.array(sorted(set(cands)))
    vals = _max_sq_factor(eigs, cands)
    i = int(np.argmin(vals))  # first (smallest eta) among exact ties
    eta_best = float(cands[i])
    rho_sq = max(float(vals[i]), 0.0)

    eta1 = float(inv_re[0])
    delta = float(np.min(r2 * (2.0 * inv_re - eta1)))
    sin2 = float(np.max(eigs.imag**2 / r2))
    return StepSizeReport(
        eta_best=eta_best,
        rho_best=math.sqrt(rho_sq),
        lower_bound_rho_sq=sin2,
        upper_bound_rho_sq=1.0 - eta1 * delta,
        delta_term=delta,
        eta_lower=eta1,
        eta_upper=2.0 * eta1,
    )


# ---------------------------------------------------------------------------
# momentum

@dataclass(frozen=True)
class MomentumEigs:
    lam: complex
    eta: float
    beta: float
    discriminant: complex | None
    mu_plus: complex
    mu_minus: complex
    rho: float

    @property
    def radius(self) -> float:
        """Spectral radius (not squared) of the mode's 2x2 update."""
        return math.sqrt(self.rho)


def _principal_sqrt(z: complex) -> complex:
    # negative reals map to +i sqrt(-z) whatever the sign of the zero imaginary part
    if z.imag == 0 and z.real < 0:
        return complex(0.0, math.sqrt(-z.real))
    return cmath.sqrt(z)


def momentum_eigenvalues(lam: complex, eta: float, beta: float) -> MomentumEigs:
    """Roots of ``x^2 - (1 - eta lam + beta) x + beta``.

    With ``s = 1 - eta lam + beta`` and ``Delta = 1 - 4 beta / s^2`` the roots
    are ``mu_pm = s (1 pm sqrt(Delta)) / 2``, taking the square root with
    nonnegative real part (``+i sqrt(-Delta)`` for negative real ``Delta``).
    When ``|s| <= 1e-14`` the formula is undefined and the roots are taken as
    ``pm sqrt(-beta)`` directly; ``discriminant`` is then ``None``.
    ``rho`` is ``max(|mu_plus|^2, |mu_minus|^2)``.
    """
    _finite(lam, eta, beta)
    lam = complex(lam)
    eta, beta = float(eta), float(beta)
    s = 1.0 - eta * lam + beta
    if abs(s) <= DEGENERATE_TOL:
        root = _principal_sqrt(complex(-beta))
        disc = None
        mu_p, mu_m = root, -root
    else:
        disc = 1.0 - 4.0 * beta / (s * s)
        sq = _principal_sqrt(disc)
        mu_p = s * (1.0 + sq) / 2.0
        mu_m = s * (1.0 - sq) / 2.0
    rho = max(abs(mu_p) ** 2, abs(mu_m) ** 2)
    return MomentumEigs(lam, eta, beta, disc, mu_p, mu_m, rho)


def momentum_radius(lams, eta, beta) -> np.ndarray:
    """Vectorised spectral radius ``max_k max |mu_pm(lam_k)|`` over broadcast ``eta`` and ``beta``.

    ``lams`` is reduced over; ``eta`` and ``beta`` broadcast against each other.
    """
    eta = np.asarray(eta, dtype=float)
    beta = np.asarray(beta, dtype=float)
    out = None
    for lam in np.atleast_1d(np.asarray(lams, dtype=complex)):
        s = 1.0 - eta * lam + beta
        root = np.sqrt(s * s - 4.0 * beta + 0j)
        mag = np.maximum(np.abs(s + root), np.abs(s - root)) / 2.0
        out = mag if out is None else np.maximum(out, mag)
    return out


@dataclass(frozen=True)
class BenefitInterval:
    lam: complex
    lower: float
    upper: float
    empty: bool

    def contains(self, eta: float) -> bool:
        return (not self.empty) and self.lower < eta < self.upper


def benefit_interval(lam: complex) -> BenefitInterval:
    """Step sizes for which a little positive momentum speeds up the mode ``lam``.

    ``I(lam) = (Re(1/lam) / (1 + |sin psi|), Re(1/lam) / (1 - |sin psi|))`` with
    ``psi = arg(lam)``. For real ``lam`` the interval is empty and both
    endpoints equal ``1/lam``.
    """
    _finite(lam)
    lam = complex(lam)
    if lam.real <= 0:
        raise HypothesisError("benefit interval needs Re(lambda) > 0")
    inv_re = (1 / lam).real
    if lam.imag == 0:
        return BenefitInterval(lam, inv_re, inv_re, True)
    sin = abs(lam.imag) / abs(lam)
    return BenefitInterval(lam, inv_re / (1 + sin), inv_re / (1 - sin), False)


def rho_derivative_at_zero(lam: complex, eta: float) -> float:
    """Derivative in ``beta`` at ``beta = 0`` of the squared momentum radius of mode ``lam``.

    Equals ``2 (2 eta^2 |lam|^2 - eta Re(lam) (1 + eta^2 |lam|^2)) / |1 - eta lam|^2``.
    """
    _finite(lam, eta)
    lam = complex(lam)
    eta = float(eta)
    if lam.real <= 0:
        raise HypothesisError("needs Re(lambda) > 0")
    den = abs(1 - eta * lam) ** 2
    if den == 0:
        raise DegenerateEigenvalueError("1 - eta * lambda vanishes")
    r2 = abs(lam) ** 2
    return 2.0 * (2.0 * eta**2 * r2 - eta * lam.real * (1.0 + eta**2 * r2)) / den


# ---------------------------------------------------------------------------
# bilinear games: characteristic polynomials and rates

def _base_quartic(beta1: float, beta2: float) -> np.ndarray:
    # ascending coefficients of (x - 1)^2 (x - beta1) (x - beta2)
    c = np.array([1.0])
    for r in (1.0, 1.0, beta1, beta2):
        c = np.convolve(c, [-r, 1.0])
    return c


def char_poly_sim(lambda_ata: float, eta1: float, eta2: float, beta1: float, beta2: float) -> Polynomial:
    """``(x-1)^2 (x-beta1)(x-beta2) + eta1 eta2 lambda x^2`` for an eigenvalue ``lambda`` of ``A^T A``."""
    _finite(lambda_ata, eta1, eta2, beta1, beta2)
    if lambda_ata <= 0:
        raise ValueError("lambda_ata must be positive")
    c = _base_quartic(beta1, beta2)
    c[2] += eta1 * eta2 * lambda_ata
    return Polynomial(c)


def char_poly_alt(lambda_ata: float, eta1: float, eta2: float, beta1: float, beta2: float) -> Polynomial:
    """``(x-1)^2 (x-beta1)(x-beta2) + eta1 eta2 lambda x^3`` (alternating updates)."""
    _finite(lambda_ata, eta1, eta2, beta1, beta2)
    if lambda_ata <= 0:
        raise ValueError("lambda_ata must be positive")
    c = _base_quartic(beta1, beta2)
    c[3] += eta1 * eta2 * lambda_ata
    return Polynomial(c)


def sim_divergence_bound(beta: float, eta: float, sigma_max: float) -> float:
    """Per-step growth factor of Delta_t guaranteed for simultaneous updates.

    ``(1 + beta)^2 + eta^2 sigma_max^2`` for ``beta >= 0`` and ``1 - beta`` for
    ``-1/16 <= beta < 0``. No guarantee is available below ``-1/16``.
    """
    _finite(beta, eta, sigma_max)
    if eta < 0 or sigma_max <= 0:
        raise ValueError("need eta >= 0 and sigma_max > 0")
    if beta < -1.0 / 16.0:
        raise OutOfRangeError(f"beta={beta} is below -1/16")
    if beta >= 0:
        return (1.0 + beta) ** 2 + eta**2 * sigma_max**2
    return 1.0 - beta


def alt_convergence_rate(eta: float, sigma_min: float, sigma_max: float) -> float:
    """Geometric rate ``max(1/2, 1 - eta^2 sigma_min^2 / 4)`` for alternating updates
    with ``beta1 = -1/2`` and ``beta2 = 0``, valid for ``0 < eta <= 1/sigma_max``."""
    _finite(eta, sigma_min, sigma_max)
    if sigma_min <= 0 or sigma_max < sigma_min:
        raise ValueError("need 0 < sigma_min <= sigma_max")
    if not 0 < eta <= (1.0 / sigma_max) * (1 + 1e-12):
        raise HypothesisError(f"eta={eta} outside (0, 1/sigma_max]")
    return max(0.5, 1.0 - eta**2 * sigma_min**2 / 4.0)


# ---------------------------------------------------------------------------
# optimal momentum on the kappa-alpha family

@dataclass(frozen=True)
class OptimalMomentum:
    beta_opt: float
    eta_opt: float
    rho_opt: float

    def __iter__(self):
        return iter((self.beta_opt, self.eta_opt, self.rho_opt))


def optimal_momentum(game: KappaAlphaGame, eta_grid, beta_grid) -> OptimalMomentum:
    """Grid search for the ``(beta, eta)`` minimising the momentum spectral radius.

    The radius over all Jacobian eigenvalues ``2 alpha d_jj +- (1 - alpha) i``
    is evaluated on the full product grid. Exact ties go to the smallest
    ``|beta|`` and then the smallest ``eta``. ``rho_opt`` is the (unsquared)
    spectral radius at the optimum.
    """
    etas = np.asarray(eta_grid, dtype=float).ravel()
    betas = np.asarray(beta_grid, dtype=float).ravel()
    if etas.size == 0 or betas.size == 0:
        raise ValueError("grids must be nonempty")
    if not (np.all(np.isfinite(etas)) and np.all(np.isfinite(betas))):
        raise ValueError("grids must be finite")
    lams = _as_eigs(game.jacobian_eigenvalues())
    rad = momentum_radius(lams, etas[None, :], betas[:, None])
    best = rad.min()
    bi, ei = np.nonzero(rad == best)
    pick = np.lexsort((etas[ei], np.abs(betas[bi])))[0]
    return OptimalMomentum(float(betas[bi[pick]]), float(etas[ei[pick]]), float(best))


def polyak_momentum(kappa: float) -> float:
    """Heavy-ball momentum ``((sqrt(kappa) - 1) / (sqrt(kappa) + 1))^2`` for a quadratic of condition ``kappa``."""
    r = math.sqrt(kappa)
    return ((r - 1) / (r + 1)) ** 2
