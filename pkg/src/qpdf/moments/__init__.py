"""Statistics of an amplitude-encoded PDF via diagonal phase unitaries."""
from .counts import approx_count, exact_count, gate_count, term_count
from .measure import (
    MomentEncoding,
    build_measurement_circuit,
    estimate_statistic,
    measure_moment_series,
    overlap_expectation,
)
from .phase import (
    DiagonalPhaseProgram,
    PhaseProfile,
    compile_phase_unitary,
    compile_zstrings,
    exact_alpha,
    exact_program,
    fit_beta,
    fit_polynomial,
    phase_profile,
)
from .zstrings import ZStringPolynomial, pauli_decompose_D, walsh_decompose, zstring_power
