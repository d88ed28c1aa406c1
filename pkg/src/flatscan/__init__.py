"""Distance-to-flat persistent homology transforms of rasters and meshes."""

from .complex import (
    FiltrationValues,
    ParseError,
    Shape,
    betti,
    cubical_from_occupancy,
    euler_characteristic,
    flat_filtration,
    load_grid,
    load_off,
    lower_star,
    slice_shape,
)
from .grassmann import (
    Flat,
    affine_distance,
    appendix_bound,
    canonicalize,
    deaffine,
    distance_to_flat,
    embed,
    grassmann_distance,
    principal_angles,
    principal_angles_recursive,
    sample_flats,
    weyl_gap,
)
from .persistence import DiagramDistanceReport, PersistenceDiagram, bottleneck, pd0_union_find, pd_reduction, wasserstein
from .transform import (
    ChiPair,
    DphtResult,
    betti_slice_euler,
    chi_grassmannian,
    chi_pair,
    continuity_probe,
    dpht_scan,
    euler_curve,
    hpht_vs_cpht_demo,
    injectivity_probe,
    instability_demo,
    radon_chi,
)
from .estimator import DphtFeatures

__version__ = "0.1.0"
