"""Exact diagonalisation of sampled ensembles and comparison with densities."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .core_periphery import quotient_eigenvalues
from .errors import EigensolverError, EquispecError
from .graphs import BlockStructure, EquitableGraph, generate_equitable

ZERO = "zero"
ISOLATED = "isolated"
CONTINUOUS = "continuous"

DEFAULT_ZERO_TOL = 1e-8
DEFAULT_ISOLATED_TOL = 1e-6
DEFAULT_SIZE_CAP = 5000


def exact_eigenvalues(g: EquitableGraph, cap: int = DEFAULT_SIZE_CAP, check: bool = True) -> np.ndarray:
    """All eigenvalues of the adjacency matrix of ``g``, ascending.

    With ``check`` the trace identities ``sum(lam) = 0`` and
    ``sum(lam**2) = 2|E|`` are verified.
    """
    n = g.n_vertices
    if n > cap:
        raise EigensolverError(f"graph with {n} vertices exceeds the dense size cap {cap}")
    if n == 0:
        return np.zeros(0)
    A = g.adjacency_matrix()
    try:
        eigs = scipy.linalg.eigvalsh(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed: {exc}") from exc
    if check:
        n_edges = len(g.edges)
        if abs(eigs.sum()) > 1e-8 * max(n, 1):
            raise EigensolverError(f"trace check failed: sum of eigenvalues {eigs.sum():.3e}")
        sq = float(np.dot(eigs, eigs))
        if abs(sq - 2 * n_edges) > 1e-8 * max(2 * n_edges, 1):
            raise EigensolverError(f"trace check failed: sum of squares {sq} != {2 * n_edges}")
    return eigs


def _isolated_targets(summary):
    if summary is None:
        return ()
    if hasattr(summary, "isolated"):
        return tuple(summary.isolated)
    return tuple(float(x) for x in summary)


def classify(eigs, summary, zero_tol: float = DEFAULT_ZERO_TOL, isolated_tol: float = DEFAULT_ISOLATED_TOL) -> np.ndarray:
    """Tag the eigenvalues of a single graph as zero, isolated or continuous.

    ``summary`` is a :class:`SpectralSummary` or any sequence of predicted
    isolated eigenvalues. Each prediction claims at most the one nearest
    non-zero eigenvalue within ``isolated_tol``.
    """
    eigs = np.asarray(eigs, dtype=float)
    tags = np.full(eigs.shape, CONTINUOUS, dtype=object)
    tags[np.abs(eigs) <= zero_tol] = ZERO
    for target in _isolated_targets(summary):
        free = np.flatnonzero(tags == CONTINUOUS)
        if free.size == 0:
            break
        j = free[np.argmin(np.abs(eigs[free] - target))]
        if abs(eigs[j] - target) <= isolated_tol:
            tags[j] = ISOLATED
    return tags


@dataclass
class EmpiricalSpectrum:
    """Eigenvalues pooled over an ensemble, sorted ascending.

    ``samples[i]`` and ``tags[i]`` belong to ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    samples: np.ndarray
    tags: np.ndarray
    n_samples: int
    n_per_graph: int
    structure: BlockStructure | None = None
    seeds: dict = field(default_factory=dict)

    def values(self, tag: str) -> np.ndarray:
        return self.eigenvalues[self.tags == tag]

    def count(self, tag: str, sample: int | None = None) -> int:
        mask = self.tags == tag
        if sample is not None:
            mask &= self.samples == sample
        return int(mask.sum())

    def per_sample(self, sample: int) -> np.ndarray:
        return self.eigenvalues[self.samples == sample]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample", "eigenvalue", "tag"])
            for s, x, t in zip(self.samples.tolist(), self.eigenvalues.tolist(), self.tags.tolist()):
                w.writerow([s, repr(x), t])


def _pool(per_sample, per_tags, structure, seeds):
    n_samples = len(per_sample)
    n = len(per_sample[0]) if n_samples else 0
    eigs = np.concatenate(per_sample) if n_samples else np.zeros(0)
    samples = np.repeat(np.arange(n_samples), n)
    tags = np.concatenate(per_tags) if n_samples else np.zeros(0, dtype=object)
    order = np.lexsort((samples, eigs))
    return EmpiricalSpectrum(eigs[order], samples[order], tags[order], n_samples, n, structure, seeds)


def ensemble_spectrum(
    s: BlockStructure,
    n_samples: int,
    seed: int,
    summary=None,
    zero_tol: float = DEFAULT_ZERO_TOL,
    isolated_tol: float = DEFAULT_ISOLATED_TOL,
    threads: int = 1,
    cap: int = DEFAULT_SIZE_CAP,
) -> EmpiricalSpectrum:
    """Sample ``n_samples`` graphs, diagonalise each and pool the spectra.

    Sample ``i`` uses child ``i`` of ``SeedSequence(seed)``. Without a
    ``summary`` the quotient eigenvalues of ``s`` are the isolated
    predictions. Errors carry the failing index in ``exc.sample_index``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    targets = _isolated_targets(summary) if summary is not None else tuple(quotient_eigenvalues(s))
    children = np.random.SeedSequence(seed).spawn(n_samples)

    def run(i):
        try:
            g = generate_equitable(s, np.random.default_rng(children[i]))
            eigs = exact_eigenvalues(g, cap=cap)
        except EquispecError as exc:
            exc.sample_index = i
            raise
        return eigs, classify(eigs, targets, zero_tol, isolated_tol)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, range(n_samples)))
    else:
        results = [run(i) for i in range(n_samples)]
    seeds = {"seed": seed, "spawn": "SeedSequence(seed).spawn(n_samples)"}
    return _pool([r[0] for r in results], [r[1] for r in results], s, seeds)


def spectrum_from_density(density, support, n: int, grid_points: int = 4001) -> EmpiricalSpectrum:
    """Deterministic pseudo-spectrum: quantiles ``(i + 1/2)/n`` of a density."""
    xs, F = _cdf_table(density, support, grid_points)
    F = F / F[-1]
    q = (np.arange(n) + 0.5) / n
    # F is flat over gaps; keep the strictly increasing part for inversion
    keep = np.concatenate([[True], np.diff(F) > 0])
    eigs = np.interp(q, F[keep], xs[keep])
    tags = np.full(n, CONTINUOUS, dtype=object)
    return EmpiricalSpectrum(eigs, np.zeros(n, dtype=np.int64), tags, 1, n)


def _evaluate(density, x):
    x = np.asarray(x, dtype=float)
    try:
        y = np.asarray(density(x), dtype=float)
        if y.shape == x.shape:
            return y
    except (TypeError, ValueError):
        pass
    return np.array([float(density(v)) for v in x])


def _bin_averages(density, lo, hi, order=8):
    """Mean of ``density`` over each bin by Gauss-Legendre quadrature."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (hi - lo)
    x = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]
    y = _evaluate(density, x.ravel()).reshape(x.shape)
    return 0.5 * (y @ weights)


def _cdf_table(density, support, grid_points):
    """Cumulative integral of ``density`` over ``support`` on edge-clustered grids."""
    xs, Fs = [], []
    total = 0.0
    theta = np.linspace(0.0, np.pi, grid_points)
    for lo, hi in support:
        x = lo + (hi - lo) * (1.0 - np.cos(theta)) / 2.0
        y = _evaluate(density, x)
        F = total + np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))])
        total = F[-1]
        xs.append(x)
        Fs.append(F)
    return np.concatenate(xs), np.concatenate(Fs)


def freedman_diaconis_bins(x, total_length: float) -> int:
    x = np.asarray(x, dtype=float)
    q75, q25 = np.percentile(x, [75, 25])
    h = 2.0 * (q75 - q25) * len(x) ** (-1.0 / 3.0)
    if h <= 0:
        return 1
    return max(1, int(np.ceil(total_length / h)))


def _bin_layout(x, support, n_bins):
    """Contiguous bins: uniform inside each band, one bin per outside region."""
    lengths = np.array([hi - lo for lo, hi in support])
    alloc = np.maximum(1, np.round(n_bins * lengths / lengths.sum()).astype(int))
    edges = []
    inside = []
    if x[0] < support[0][0]:
        edges.append(float(x[0]))
        inside.append(False)
    for j, ((lo, hi), nb) in enumerate(zip(support, alloc)):
        pts = np.linspace(lo, hi, nb + 1)
        edges.extend(pts[:-1].tolist())
        inside.extend([True] * nb)
        if j + 1 < len(support):
            edges.append(float(hi))
            inside.append(False)
    edges.append(float(support[-1][1]))
    if x[-1] > support[-1][1]:
        edges.append(float(x[-1]))
        inside.append(False)
    return np.array(edges), np.array(inside)


@dataclass
class HistogramComparison:
    bin_lo: np.ndarray
    bin_hi: np.ndarray
    empirical: np.ndarray
    analytic: np.ndarray
    in_support: np.ndarray
    l1_distance: float
    sup_cdf_distance: float
    zero_count: int = 0
    isolated_found: int = 0

    @property
    def n_bins(self) -> int:
        return len(self.bin_lo)

    @property
    def widths(self) -> np.ndarray:
        return self.bin_hi - self.bin_lo

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_lo", "bin_hi", "empirical", "analytic"])
            for row in zip(self.bin_lo, self.bin_hi, self.empirical, self.analytic):
                w.writerow([repr(float(v)) for v in row])

    def summary(self) -> dict:
        return {
            "l1": self.l1_distance,
            "sup_cdf": self.sup_cdf_distance,
            "n_bins": self.n_bins,
            "zero_count": self.zero_count,
            "isolated_found": self.isolated_found,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")


def compare(spectrum: EmpiricalSpectrum, density, n_bins: int | None = None, support=None, cdf_points: int = 4001) -> HistogramComparison:
    """Histogram of the continuous eigenvalues against a unit-mass density.

    The L1 distance compares each bin height with the mean of the density
    over that bin; the ``analytic`` column holds midpoint values. Bins are laid out uniformly inside each support interval; eigenvalues
    falling outside the support land in extra bins where the reference
    density is zero, so their mass counts fully towards the L1 distance.
    ``density`` is any callable, including a :class:`DensityCurve`.
    """
    x = np.sort(spectrum.values(CONTINUOUS))
    if x.size == 0:
        raise EquispecError("no continuous eigenvalues to compare")
    if support is None:
        support = [(float(x[0]), float(x[-1]))]
    support = [tuple(map(float, iv)) for iv in support]
    if n_bins is None:
        n_bins = freedman_diaconis_bins(x, sum(hi - lo for lo, hi in support))
    edges, inside = _bin_layout(x, support, n_bins)
    counts, _ = np.histogram(x, edges)
    widths = np.diff(edges)
    emp = counts / (x.size * widths)
    mids = 0.5 * (edges[1:] + edges[:-1])
    ana = np.zeros_like(mids)
    ana[inside] = _evaluate(density, mids[inside])
    avg = np.zeros_like(mids)
    avg[inside] = _bin_averages(density, edges[:-1][inside], edges[1:][inside])
    l1 = float(np.sum(np.abs(emp - avg) * widths))

    xs, F = _cdf_table(density, support, cdf_points)
    Fx = np.interp(x, xs, F, left=0.0, right=F[-1])
    i = np.arange(x.size)
    sup = float(max(np.max(np.abs(Fx - i / x.size)), np.max(np.abs(Fx - (i + 1) / x.size))))

    return HistogramComparison(
        edges[:-1], edges[1:], emp, ana, inside, l1, sup,
        zero_count=spectrum.count(ZERO),
        isolated_found=spectrum.count(ISOLATED),
    )


def support_fraction(values, support, pad: float = 0.0) -> float:
    """Fraction of ``values`` inside the support widened by ``pad`` on each side."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 1.0
    hit = np.zeros(values.shape, dtype=bool)
    for lo, hi in support:
        hit |= (values >= lo - pad) & (values <= hi + pad)
    return float(hit.mean())
