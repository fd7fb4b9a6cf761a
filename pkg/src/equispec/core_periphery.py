"""Closed-form spectral theory of equitable core-periphery graphs.

The class covered here has connectivity ``[[k, kp], [1, 0]]``: the core is
``k``-regular, every core vertex has ``kp`` periphery neighbours and every
periphery vertex a single core neighbour. Sizes then satisfy
``N_p = kp * N_c``.

Through ``mu = lam - kp/lam`` each of the two spectral bands is mapped
onto the Kesten-McKay band of degree ``k``, which is what makes every
quantity below explicit.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, StructureError
from .graphs import BlockStructure, validate_structure


@dataclass(frozen=True)
class CorePeripheryParams:
    k: int
    kp: int
    n_core: int

    def __post_init__(self):
        if self.k < 2:
            raise DomainError(f"core degree k={self.k} unsupported, need k >= 2")
        if self.kp < 1:
            raise DomainError(f"core-periphery degree kp={self.kp} must be >= 1")
        if self.n_core < 1:
            raise DomainError(f"n_core={self.n_core} must be positive")

    @property
    def n_periphery(self) -> int:
        return self.kp * self.n_core

    @property
    def n_vertices(self) -> int:
        return self.n_core + self.n_periphery

    def structure(self) -> BlockStructure:
        return BlockStructure.core_periphery(self.n_core, self.k, self.kp)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def _check_k(k):
    if k < 2:
        raise DomainError(f"k={k} unsupported: the band needs k - 1 > 0")


def mu(lam, kp):
    """Map an eigenvalue onto the Kesten-McKay variable ``lam - kp/lam``."""
    lam = np.asarray(lam, dtype=float)
    if kp == 0:
        return _scalar_or_array(lam.copy())
    if np.any(lam == 0):
        raise DomainError("mu is undefined at lambda = 0")
    return _scalar_or_array(lam - kp / lam)


def cavity_alpha_beta(lam, k, kp):
    """Real and imaginary parts of the core-core cavity variance at ``lam - i0+``.

    Inside the band ``|mu| < 2 sqrt(k-1)`` the pair is the complex root of
    ``(k-1) D**2 - mu D + 1 = 0`` with positive imaginary part. Outside,
    ``beta = 0`` and ``alpha`` is the real root that behaves like ``1/mu``
    for large ``|mu|``.
    """
    _check_k(k)
    m = np.asarray(mu(lam, kp), dtype=float)
    g2 = 4.0 * (k - 1)
    disc = m * m - g2
    inside = disc < 0
    alpha = np.empty_like(m)
    beta = np.zeros_like(m)
    alpha[inside] = m[inside] / (2.0 * (k - 1))
    beta[inside] = np.sqrt(-disc[inside]) / (2.0 * (k - 1))
    out = ~inside
    # 2 / (mu + sgn(mu) sqrt(.)) is the small root written without cancellation
    mo = m[out]
    alpha[out] = 2.0 / (mo + np.sign(mo) * np.sqrt(disc[out]))
    return _scalar_or_array(alpha), _scalar_or_array(beta)


def support_intervals(k, kp) -> list:
    """Bands where the continuous density is positive.

    Returns ``[(-(g+r), -(r-g)), (r-g, g+r)]`` with ``g = sqrt(k-1)`` and
    ``r = sqrt(k-1+kp)``; for ``kp == 0`` the two bands merge into the
    Kesten-McKay interval.
    """
    _check_k(k)
    g = np.sqrt(k - 1.0)
    if kp == 0:
        return [(-2.0 * g, 2.0 * g)]
    r = np.sqrt(k - 1.0 + kp)
    return [(float(-(g + r)), float(-(r - g))), (float(r - g), float(g + r))]


def kesten_mckay_density(lam, k):
    """Limiting spectral density of random ``k``-regular graphs."""
    _check_k(k)
    lam = np.asarray(lam, dtype=float)
    arg = 4.0 * (k - 1) - lam * lam
    rho = np.zeros_like(lam)
    ok = arg > 0
    rho[ok] = k * np.sqrt(arg[ok]) / (2.0 * np.pi * (k * k - lam[ok] ** 2))
    return _scalar_or_array(rho)


def analytic_density(lam, k, kp):
    """Continuous spectral density, normalised to one over the two bands.

    Zero outside the support and at ``lam = 0``, where the atom of
    ``N_p - N_c`` zero eigenvalues sits; that atom is not part of the curve.
    """
    _check_k(k)
    if kp == 0:
        return kesten_mckay_density(lam, k)
    lam = np.asarray(lam, dtype=float)
    rho = np.zeros_like(lam)
    nz = lam != 0
    ln = lam[nz]
    m = ln - kp / ln
    arg = (k - 1.0) - 0.25 * m * m
    ok = arg > 0
    vals = np.zeros_like(ln)
    mo = m[ok]
    lo = ln[ok]
    vals[ok] = k / (2.0 * np.pi) * np.sqrt(arg[ok]) / (k * k - mo * mo) * (1.0 + kp / (lo * lo))
    rho[nz] = vals
    return _scalar_or_array(rho)


def analytic_density_delta_form(lam, k, kp):
    """Same density written through the cavity solution ``alpha + i beta``.

    ``rho = k beta / (2 pi delta) * (1 + kp/lam**2)`` with
    ``delta = (mu - k alpha)**2 + (k beta)**2``.
    """
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    rho = np.zeros_like(lam)
    nz = lam != 0 if kp else np.ones(lam.shape, dtype=bool)
    ln = lam[nz]
    alpha, beta = cavity_alpha_beta(ln, k, kp)
    alpha, beta = np.atleast_1d(alpha), np.atleast_1d(beta)
    m = np.atleast_1d(mu(ln, kp))
    delta = (m - k * alpha) ** 2 + (k * beta) ** 2
    jac = 1.0 + kp / ln**2 if kp else 1.0
    rho[nz] = k * beta / (2.0 * np.pi * delta) * jac
    if kp == 0:
        # both bands coincide, each carrying half the Kesten-McKay mass
        rho = 2.0 * rho
    return float(rho[0]) if scalar else rho


def band_weight(kp) -> float:
    """Mass of the two continuous bands in the full ensemble density.

    The cavity density of the whole graph integrates to ``2 N_c / N`` over
    the bands; dividing by this weight gives the unit-mass curve of
    :func:`analytic_density`.
    """
    return 1.0 if kp == 0 else 2.0 / (1.0 + kp)


def isolated_eigenvalues(k, kp) -> tuple:
    """Roots of ``lam**2 - k lam - kp = 0`` (block-constant eigenvectors)."""
    h = k / 2.0
    s = np.sqrt(h * h + kp)
    return float(h - s), float(h + s)


def zero_eigenvalue_count(n_core: int, n_periphery: int) -> int:
    """Guaranteed number of zero eigenvalues, ``N_p - N_c``.

    This is the power of ``lam`` split off the characteristic polynomial;
    the kernel of a given adjacency matrix is at least this large.
    """
    if n_periphery < n_core:
        raise DomainError(f"n_periphery={n_periphery} < n_core={n_core}")
    return int(n_periphery - n_core)


def quotient_eigenvalues(s: BlockStructure) -> np.ndarray:
    """Eigenvalues of the block-degree matrix ``c``, ascending.

    ``c`` is similar to the symmetric matrix ``sqrt(N_a/N_b) c_ab`` when the
    structure is equitable, so a symmetric solver applies.
    """
    report = validate_structure(s)
    if not report.ok:
        raise StructureError(report.violations)
    c = s.matrix()
    n = np.sqrt(np.asarray(s.sizes, dtype=float))
    sym = c * n[:, None] / n[None, :]
    sym = 0.5 * (sym + sym.T)
    return np.linalg.eigvalsh(sym)


@dataclass(frozen=True)
class SpectralSummary:
    k: int
    kp: int
    n_core: int
    support: tuple
    lambda_minus: float
    lambda_plus: float
    zero_multiplicity: int
    continuous_fraction: float

    @property
    def isolated(self) -> tuple:
        return (self.lambda_minus, self.lambda_plus)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["support"] = [list(iv) for iv in self.support]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def spectral_summary(params: CorePeripheryParams) -> SpectralSummary:
    lm, lp = isolated_eigenvalues(params.k, params.kp)
    n = params.n_vertices
    return SpectralSummary(
        k=params.k,
        kp=params.kp,
        n_core=params.n_core,
        support=tuple(support_intervals(params.k, params.kp)),
        lambda_minus=lm,
        lambda_plus=lp,
        zero_multiplicity=zero_eigenvalue_count(params.n_core, params.n_periphery),
        continuous_fraction=(2 * params.n_core - 2) / n,
    )
