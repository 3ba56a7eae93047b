from micro_reynolds.model.coefficients import (
    coef_constants,
    evaluate_field,
    profile,
    sample_field,
    theta_phi,
)
from micro_reynolds.model.params import (
    DerivedParams,
    FluidParams,
    gamma_alpha,
    validate,
    wave_number,
)
from micro_reynolds.model.roughness import RoughnessProfile
from micro_reynolds.model.samples import (
    CoefficientConstants,
    CoefficientField,
    CoefficientSample,
    ProfileSample,
)
