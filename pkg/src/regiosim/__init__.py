"""Regional innovation growth with spatial knowledge spillovers."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .dynamics import (
    EquilibriumRates,
    Trajectory,
    equilibrium_closed_form,
    equilibrium_solve,
    equilibrium_two_region,
    neumann_equilibrium,
    simulate,
    step,
)
from .model import (
    EconomyConfig,
    EconomyState,
    GrowthRates,
    ModelParams,
    RegionParams,
    build_config,
    growth_rates,
    output,
    validate_config,
)
from .spatial import (
    Coordinates,
    DistanceMatrix,
    MoranResult,
    SpatialWeights,
    band_partition,
    haversine_distances,
    inverse_square_weights,
    morans_i,
    morans_test,
    row_standardize,
)
