"""Simulation of protocols that broadcast a known qubit state to several receivers."""
from .channels import (
    BroadcastChannel,
    Party,
    bell,
    channel_controlled,
    channel_general,
    channel_joint,
    channel_multidirectional,
    cluster_plus,
    cluster_yan,
    nonmax_bell,
    receiver,
    sender,
)
from .metrics import ResourceCount, receiver_fidelities, resource_count, uhlmann_fidelity
from .noise import (
    NoiseChannel,
    NoiseMode,
    NoiseSpec,
    amplitude_damping,
    bit_flip,
    depolarizing,
    phase_damping,
    validate_completeness,
)
from .protocols import (
    KnownQubit,
    Transcript,
    derive_corrections,
    run_bell_rsp_broadcast,
    run_cluster_broadcast,
    run_controlled_broadcast,
    run_joint_broadcast,
    run_multidirectional,
    run_phase_chain,
    run_probabilistic_broadcast,
    yan_basis,
)

__version__ = "0.1.0"
