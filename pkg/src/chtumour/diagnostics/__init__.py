from .records import (
    DiagnosticsRecord,
    QuasiDiagnosticsRecord,
    apriori_monitors,
    energy_identity_residual,
    mass_residuals,
    parabolic_record,
    quasi_energy_residual,
    quasistatic_record,
)
from .experiments import (
    continuous_dependence_experiment,
    dependence_numerator,
    dt_order_study,
    kappa_study,
    self_convergence,
)

__all__ = [
    "DiagnosticsRecord",
    "QuasiDiagnosticsRecord",
    "apriori_monitors",
    "continuous_dependence_experiment",
    "dependence_numerator",
    "dt_order_study",
    "energy_identity_residual",
    "kappa_study",
    "mass_residuals",
    "parabolic_record",
    "quasi_energy_residual",
    "quasistatic_record",
    "self_convergence",
]
