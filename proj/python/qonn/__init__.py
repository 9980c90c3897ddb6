"""Quantum optical neural networks with programmable Kerr-like nonlinearities.

Thin python surface over the C++ core: Fock-space simulation of NMZI meshes,
the linear-optics-programmed baseline, task cost functions and the two-stage
derivative-free trainer.
"""

from qonn._core import (  # noqa: F401
    FockBasis,
    HeisenbergModel,
    LinOptQonn,
    NmziMesh,
    StateVector,
    __version__,
    amplitude_dump,
    apply_core,
    apply_lo_qonn,
    apply_mode_phase,
    apply_multimode,
    apply_nmzi,
    apply_ns,
    apply_qonn,
    apply_two_mode,
    build_basis,
    build_hamiltonian,
    clements_mesh,
    count_params,
    dc_matrix,
    discrimination_cost,
    encode_dualrail,
    exact_ground_energy,
    fidelity,
    fidelity_cost,
    lo_depth,
    minimize,
    mzi_matrix,
    overlap,
    permanent,
    project_dualrail,
    record_layer_amplitudes,
    run_sweep,
    sample_lattice_model,
    target_ghz,
    target_haar_random,
    verify_table,
    vqe_cost,
)
