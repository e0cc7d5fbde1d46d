"""Small dense linear algebra: eigenvalues, SVD and polynomial roots.

Eigenvalues and singular values come from LAPACK through :mod:`numpy.linalg`
(Hessenberg reduction followed by shifted QR for the eigenproblem). This module
wraps them with the conventions the rest of the package relies on: a fixed
eigenvalue ordering, the ``A = U^T diag(s) V`` SVD layout, a numerical rank and
finite-value checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, NumericalError

MAX_SIDE = 64


def _sorted_eigs(values) -> np.ndarray:
    vals = np.asarray(values, dtype=complex).ravel()
    # magnitude desc, then real desc, then imaginary desc
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    out = vals[order]
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (with multiplicity) and their spectral radius.

    Eigenvalues are kept sorted by descending magnitude, ties broken by
    descending real part and then descending imaginary part.
    """

    eigenvalues: np.ndarray
    spectral_radius: float

    @classmethod
    def from_values(cls, values: Iterable[complex]) -> "Spectrum":
        eigs = _sorted_eigs(list(values))
        if not np.all(np.isfinite(eigs)):
            raise NumericalError("non-finite eigenvalue")
        radius = float(np.abs(eigs).max()) if eigs.size else 0.0
        return cls(eigenvalues=eigs, spectral_radius=radius)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __iter__(self):
        return iter(complex(z) for z in self.eigenvalues)

    @property
    def arguments(self) -> np.ndarray:
        """Polar angles psi_k of the eigenvalues, lambda_k = r_k exp(i psi_k)."""
        return np.angle(self.eigenvalues)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [{"re": float(z.real), "im": float(z.imag)} for z in self.eigenvalues],
            "spectral_radius": self.spectral_radius,
        }


def _as_matrix(m, allow_complex=False) -> np.ndarray:
    arr = np.asarray(m, dtype=complex if allow_complex and np.iscomplexobj(m) else float)
    if arr.ndim == 1 and arr.size == 1:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError("matrix has non-finite entries", matrix=arr)
    return arr


def eigenvalues(m) -> Spectrum:
    """All eigenvalues of a small square matrix.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Real (or complex) matrix with ``n <= 64``.

    Raises
    ------
    DimensionError
        If ``m`` is not square or is larger than 64 x 64.
    NumericalError
        If the QR iteration fails to converge; the matrix is attached.
    """
    arr = _as_matrix(m, allow_complex=True)
    n, k = arr.shape
    if n != k:
        raise DimensionError(f"eigenvalues need a square matrix, got {n}x{k}")
    if n > MAX_SIDE:
        raise DimensionError(f"matrix side {n} exceeds {MAX_SIDE}")
    try:
        vals = np.linalg.eigvals(arr)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}", matrix=arr) from exc
    return Spectrum.from_values(vals)


@dataclass(frozen=True)
class SvdResult:
    """Singular value decomposition ``m = u.T @ diag(s) @ v``.

    ``u`` is d x d and ``v`` is p x p, both orthogonal; rows of ``u`` (resp.
    ``v``) are the left (resp. right) singular vectors.
    """

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray
    rank: int
    rank_tolerance: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape[0], self.v.shape[0]

    def sigma_matrix(self) -> np.ndarray:
        d, p = self.shape
        out = np.zeros((d, p))
        k = len(self.singular_values)
        out[np.arange(k), np.arange(k)] = self.singular_values
        return out

    def reconstruct(self) -> np.ndarray:
        return self.u.T @ self.sigma_matrix() @ self.v

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0]) if self.rank else 0.0

    @property
    def sigma_min(self) -> float:
        """Smallest positive singular value (0 for a numerically zero matrix)."""
        return float(self.singular_values[self.rank - 1]) if self.rank else 0.0


def svd(m, rank_tolerance: float | None = None) -> SvdResult:
    """Full SVD with numerical rank.

    The default tolerance is ``1e-10 * sigma_max * max(rows, cols)``.
    """
    arr = _as_matrix(m)
    try:
        uu, s, vh = np.linalg.svd(arr, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}", matrix=arr) from exc
    if rank_tolerance is None:
        smax = float(s[0]) if s.size else 0.0
        rank_tolerance = 1e-10 * smax * max(arr.shape)
    rank_tolerance = max(float(rank_tolerance), np.finfo(float).tiny)
    rank = int(np.count_nonzero(s > rank_tolerance))
    for a in (uu, s, vh):
        a.setflags(write=False)
    return SvdResult(u=uu.T.copy(), singular_values=s, v=vh, rank=rank, rank_tolerance=rank_tolerance)


@dataclass(frozen=True, init=False)
class Polynomial:
    """Polynomial with complex coefficients in ascending degree order.

    Trailing (highest-degree) exact zeros are trimmed so the leading
    coefficient is nonzero.
    """

    coefficients: tuple

    def __init__(self, coefficients: Sequence[complex]):
        coeffs = [complex(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            raise ValueError("the zero polynomial has no leading coefficient")
        if not all(np.isfinite(c.real) and np.isfinite(c.imag) for c in coeffs):
            raise NumericalError("polynomial has non-finite coefficients")
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def from_roots(cls, roots: Iterable[complex]) -> "Polynomial":
        coeffs = np.array([1.0 + 0j])
        for r in roots:
            coeffs = np.convolve(coeffs, [-complex(r), 1.0])
        return cls(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self.coefficients)

    def __call__(self, z):
        acc = 0j if np.isscalar(z) else np.zeros_like(np.asarray(z, dtype=complex))
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc

    def __repr__(self) -> str:
        return f"Polynomial({[c.real if c.imag == 0 else c for c in self.coefficients]})"


def companion_matrix(p: Polynomial) -> np.ndarray:
    """Frobenius companion matrix whose eigenvalues are the roots of ``p``.

    Returns a real array when every coefficient is real, complex otherwise.
    """
    n = p.degree
    if n < 1:
        raise ValueError("companion matrix needs degree >= 1")
    coeffs = np.array(p.coefficients, dtype=complex)
    monic = coeffs[:-1] / coeffs[-1]
    c = np.zeros((n, n), dtype=complex)
    c[1:, :-1] = np.eye(n - 1)
    c[:, -1] = -monic
    if p.is_real:
        return c.real.copy()
    return c


def poly_roots(p: Polynomial) -> Spectrum:
    """Roots of ``p`` with multiplicity, as the spectrum of its companion matrix."""
    if p.degree < 1:
        raise ValueError("poly_roots needs degree >= 1")
    return eigenvalues(companion_matrix(p))
