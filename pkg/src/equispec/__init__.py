"""Random equitable graphs and their spectral densities."""

__version__ = "0.1.0"

from .graphs import (
    BlockStructure,
    EquitableGraph,
    ValidationReport,
    generate_biregular,
    generate_equitable,
    generate_regular,
    validate_structure,
    verify_regularity,
)
from .cavity import CavitySolution, DensityCurve, density_at, density_grid, solve_cavity
from .core_periphery import (
    CorePeripheryParams,
    SpectralSummary,
    analytic_density,
    cavity_alpha_beta,
    isolated_eigenvalues,
    kesten_mckay_density,
    mu,
    quotient_eigenvalues,
    spectral_summary,
    support_intervals,
    zero_eigenvalue_count,
)
from .empirical import (
    EmpiricalSpectrum,
    HistogramComparison,
    classify,
    compare,
    ensemble_spectrum,
    exact_eigenvalues,
)
