"""Figure regeneration for the space-form mean-convergence experiments."""

from .csvio import (
    ModulationRow,
    SchemaError,
    VarianceProfileRow,
    read_modulation_csv,
    read_variance_profile_csv,
)
from .formulas import (
    hessian_weight,
    modulation_archetype,
    modulation_asymptotic,
    modulation_small_sample,
)
from .plots import (
    build_archetypal,
    build_modulation_panel,
    build_variance_profile,
    save_figure,
)

__version__ = "0.1.0"

__all__ = [
    "ModulationRow",
    "SchemaError",
    "VarianceProfileRow",
    "read_modulation_csv",
    "read_variance_profile_csv",
    "hessian_weight",
    "modulation_archetype",
    "modulation_asymptotic",
    "modulation_small_sample",
    "build_archetypal",
    "build_modulation_panel",
    "build_variance_profile",
    "save_figure",
]
