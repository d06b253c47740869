"""2-D topology optimization with normalized field-product densities."""

from nfpto._core import (
    CellGrid,
    DensityField,
    DesignField,
    InversionResult,
    NeighborhoodTopology,
    Problem,
    backprop_to_beta,
    beta_from_density,
    build_neighborhoods,
    default_beta_lb,
    density_from_beta,
    density_jacobian_entry,
    direct_density,
    element_stiffness_q4,
    filter_density,
    gradcheck,
    grayness,
    make_problem,
    make_weight_stencil,
    nfp_log_form,
    nfp_product_form,
    projection_density,
    raw_product_density,
    simp_factor,
    solve,
    volume_fraction,
)

__all__ = [
    "CellGrid",
    "DensityField",
    "DesignField",
    "InversionResult",
    "NeighborhoodTopology",
    "Problem",
    "backprop_to_beta",
    "beta_from_density",
    "build_neighborhoods",
    "default_beta_lb",
    "density_from_beta",
    "density_jacobian_entry",
    "direct_density",
    "element_stiffness_q4",
    "filter_density",
    "gradcheck",
    "grayness",
    "make_problem",
    "make_weight_stencil",
    "nfp_log_form",
    "nfp_product_form",
    "projection_density",
    "raw_product_density",
    "simp_factor",
    "solve",
    "volume_fraction",
]
