"""Geometric phases of mixed states under cyclic unitary evolution."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .matcore import (  # noqa: F401
    DensityOperator,
    SpectralDecomposition,
    bloch_density,
    eig_hermitian,
    exp_hermitian_generator,
    scalar_unitary_distance,
    unwind_phase,
    validate_density,
)
from .evolution import (  # noqa: F401
    ConstantSegment,
    HamiltonianSpec,
    Pulse,
    SampledSegment,
    build_grid,
    check_cyclic,
    check_global_cyclic,
    grid_for_steps,
    insert_pulse,
    propagate,
)
from .phasecalc import (  # noqa: F401
    dynamical_phase,
    geometric_phase,
    integrate_one_form,
    one_form,
    per_level_phases,
    total_phase,
)
from .gaugelab import (  # noqa: F401
    GaugeKind,
    apply_gauge,
    build_diagonal_gauge,
    classify_gauge,
    gauge_shift_report,
    parallel_transport_lift,
    pt_defect,
)
