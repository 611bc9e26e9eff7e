"""Canonical solutions of the inhomogeneous Cauchy-Riemann equation on planar
domains and on products of planar domains, with kernel-estimate probes."""

from .errors import (DataError, DbarError, DomainMembershipError, GeometryError,
                     ParameterError, PreconditionError, SingularityError,
                     UnsupportedError)
from .forms import Form01, PolyPotential, bidisc_family, builtin_form, form_from_potential
from .geometry import (ComplexPoint, PlanarDomain, area_quadrature, boundary_quadrature,
                       disc, ellipse, exhaustion, fourier_curve, make_domain,
                       parametric, unit_disc)
from .kernels import KernelSet
from .oracle import DiscreteDbarSystem, compare_fields, least_norm_solve
from .product import (ProductDomain, ProductField, TildeConfig, canonicity_defect_nd,
                      solve_smooth, solve_tilde, uniform_bound_probe)
from .report import EstimateReport, PairSampler
from .solve1d import ScalarData, SolutionField, bergman_project_1d, canonicity_defect, solve_T

__all__ = [
    "ComplexPoint", "PlanarDomain", "area_quadrature", "boundary_quadrature", "disc",
    "ellipse", "exhaustion", "fourier_curve", "make_domain", "parametric", "unit_disc",
    "KernelSet", "ScalarData", "SolutionField", "solve_T", "bergman_project_1d",
    "canonicity_defect", "Form01", "PolyPotential", "builtin_form", "bidisc_family",
    "form_from_potential", "ProductDomain", "ProductField", "TildeConfig", "solve_smooth",
    "solve_tilde", "canonicity_defect_nd", "uniform_bound_probe", "DiscreteDbarSystem",
    "least_norm_solve", "compare_fields", "EstimateReport", "PairSampler",
    "DataError", "DbarError", "DomainMembershipError", "GeometryError",
    "ParameterError", "PreconditionError", "SingularityError", "UnsupportedError",
]
__version__ = "0.1.0"
