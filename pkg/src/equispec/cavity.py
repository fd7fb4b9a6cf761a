"""Block cavity equations for the spectral density of equitable graphs.

With the block-symmetric ansatz the cavity variances reduce to an
``m x m`` complex matrix ``D[a, b]``: the variance at a vertex of block
``a`` once one of its neighbours in block ``b`` is removed. The fixed point

    D[a, b] = 1 / (z - sum_c max(c[a, c] - [b == c], 0) * D[c, a])

is found by damped synchronous sweeps; block variances
``1 / (z - sum_c c[a, c] D[c, a])`` then give the density through their
imaginary parts at ``z = lam - i eps``.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, SingularityError, StructureError
from .graphs import BlockStructure, validate_structure

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
DEFAULT_DAMPING = 0.3
PLOT_EPSILON = 1e-3
CHECK_EPSILON = 1e-6

_TINY = 1e-300


@dataclass
class CavitySolution:
    z: complex
    cavity: np.ndarray
    block: np.ndarray
    iterations: int
    residual: float


@dataclass
class DensityCurve:
    lambdas: np.ndarray
    rho: np.ndarray
    epsilon: float | None = None
    meta: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def __len__(self):
        return len(self.lambdas)

    def __call__(self, lam):
        """Linear interpolation, zero outside the grid."""
        return np.interp(lam, self.lambdas, self.rho, left=0.0, right=0.0)

    def write(self, csv_path, json_path=None) -> None:
        """CSV ``lambda,rho`` plus an optional JSON sidecar with the metadata."""
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda", "rho"])
            for x, y in zip(self.lambdas, self.rho):
                w.writerow([repr(float(x)), repr(float(y))])
        if json_path is not None:
            side = {"epsilon": self.epsilon, **self.meta}
            if self.failures:
                side["failures"] = [{"lambda": lam, "error": msg} for lam, msg in self.failures]
            Path(json_path).write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")

    @classmethod
    def read(cls, csv_path, json_path=None) -> "DensityCurve":
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        meta = {}
        if json_path is not None:
            meta = json.loads(Path(json_path).read_text())
        eps = meta.pop("epsilon", None)
        return cls(data[:, 0], data[:, 1], eps, meta)


def _cavity_weights(c: np.ndarray) -> np.ndarray:
    m = c.shape[0]
    # W[a, b, c] = max(c_ac - delta_bc, 0)
    return np.maximum(c[:, None, :] - np.eye(m)[None, :, :], 0.0)


def _checked_inverse(denom, z):
    if np.min(np.abs(denom)) < _TINY:
        raise SingularityError(f"vanishing cavity denominator at z={z}")
    return 1.0 / denom


def cavity_update(c: np.ndarray, D: np.ndarray, z: complex) -> np.ndarray:
    """One undamped sweep of the block cavity map."""
    W = _cavity_weights(c)
    return _checked_inverse(z - np.einsum("abc,ca->ab", W, D), z)


def block_variances(c: np.ndarray, D: np.ndarray, z: complex) -> np.ndarray:
    return _checked_inverse(z - np.einsum("ac,ca->a", c, D), z)


def _require_valid(s):
    report = validate_structure(s)
    if not report.ok:
        raise StructureError(report.violations)


def _iterate(W, z, D, tol, max_iter, damping):
    # residual is the undamped change, so the returned D satisfies |f(D) - D| <= tol
    residual = np.inf
    for it in range(1, max_iter + 1):
        cand = _checked_inverse(z - np.einsum("abc,ca->ab", W, D), z)
        residual = float(np.max(np.abs(cand - D)))
        if residual <= tol:
            return D, it, residual
        D = (1.0 - damping) * cand + damping * D
    raise ConvergenceError(z, max_iter, residual)


def solve_cavity(
    s: BlockStructure,
    z: complex,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    damping: float = DEFAULT_DAMPING,
    init: np.ndarray | None = None,
) -> CavitySolution:
    """Fixed point of the block cavity equations at ``z`` (``Im z < 0``).

    Iteration starts from ``1/z`` in every entry unless ``init`` is given.
    The update is ``new = (1 - damping) * f(old) + damping * old``.
    """
    z = complex(z)
    if not z.imag < 0:
        raise ValueError(f"z must lie strictly below the real axis, got {z}")
    if not 0 <= damping < 1:
        raise ValueError(f"damping must be in [0, 1), got {damping}")
    _require_valid(s)
    c = s.matrix()
    m = s.m
    D = np.full((m, m), 1.0 / z, dtype=complex) if init is None else np.array(init, dtype=complex)
    D, it, res = _iterate(_cavity_weights(c), z, D, tol, max_iter, damping)
    return CavitySolution(z, D, block_variances(c, D, z), it, res)


def _rho_from_block(s, block):
    sizes = np.asarray(s.sizes, dtype=float)
    rho = float(np.dot(sizes, block.imag)) / (np.pi * sizes.sum())
    return max(rho, 0.0)


def density_at(s: BlockStructure, lam: float, epsilon: float = CHECK_EPSILON, **solver) -> float:
    """Spectral density of the ensemble at ``lam``, regularised by ``epsilon``."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    sol = solve_cavity(s, complex(lam, -epsilon), **solver)
    return _rho_from_block(s, sol.block)


def _sweep_chunk(s, lambdas, epsilon, solver):
    rho = np.full(len(lambdas), np.nan)
    failures = []
    init = None
    for i, lam in enumerate(lambdas):
        try:
            sol = solve_cavity(s, complex(lam, -epsilon), init=init, **solver)
        except (ConvergenceError, SingularityError) as exc:
            failures.append((float(lam), str(exc)))
            init = None
            continue
        rho[i] = _rho_from_block(s, sol.block)
        init = sol.cavity
    return rho, failures


def density_grid(
    s: BlockStructure,
    lambda_min: float,
    lambda_max: float,
    n_points: int,
    epsilon: float = PLOT_EPSILON,
    threads: int = 1,
    chunks: int | None = None,
    **solver,
) -> DensityCurve:
    """Density on a uniform grid, warm-starting each point from its left neighbour.

    The grid is cut into contiguous chunks that are swept independently
    (in parallel when ``threads > 1``). Points whose solve fails are
    dropped and recorded in ``DensityCurve.failures``.
    """
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if not lambda_min < lambda_max:
        raise ValueError("lambda_min must be below lambda_max")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    _require_valid(s)
    grid = np.linspace(lambda_min, lambda_max, n_points)
    n_chunks = chunks or max(1, threads)
    pieces = np.array_split(grid, min(n_chunks, n_points))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda p: _sweep_chunk(s, p, epsilon, solver), pieces))
    else:
        results = [_sweep_chunk(s, p, epsilon, solver) for p in pieces]
    rho = np.concatenate([r for r, _ in results])
    failures = [f for _, fs in results for f in fs]
    keep = ~np.isnan(rho)
    meta = {
        "structure": s.to_dict(),
        "tol": solver.get("tol", DEFAULT_TOL),
        "damping": solver.get("damping", DEFAULT_DAMPING),
    }
    return DensityCurve(grid[keep], rho[keep], epsilon, meta, failures)
