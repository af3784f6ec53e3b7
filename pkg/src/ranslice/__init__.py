"""Descriptor-driven orchestration and simulation of shared gNB
components across RAN slice subnets."""

from .descriptors import (
    DescriptorSet,
    ServiceType,
    Snssai,
    enumerate_ils,
    parse_descriptor_set,
    serialize_descriptor_set,
    validate,
)
from .orchestrator import (
    Direction,
    Orchestrator,
    ScalingEvent,
    ScalingThresholds,
    evaluate_scaling_policy,
)
from .resources import (
    CapacityBudget,
    ResourceModelParams,
    SliceLoad,
    calibrate_params,
    cu_vcpu_consumption,
    du_vcpu_consumption,
    isolation_ok,
    vnic_mean_wait,
)
from .sim import DemandProfile, SimConfig, SimTrace, compare_scenarios, export, run
from .topology import (
    Drb,
    DrbQos,
    InstanceGraph,
    Scenario,
    build_instance_graph,
    route_drb,
    slice_awareness_required,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityBudget",
    "DemandProfile",
    "DescriptorSet",
    "Direction",
    "Drb",
    "DrbQos",
    "InstanceGraph",
    "Orchestrator",
    "ResourceModelParams",
    "Scenario",
    "ScalingEvent",
    "ScalingThresholds",
    "ServiceType",
    "SimConfig",
    "SimTrace",
    "SliceLoad",
    "Snssai",
    "build_instance_graph",
    "calibrate_params",
    "compare_scenarios",
    "cu_vcpu_consumption",
    "du_vcpu_consumption",
    "enumerate_ils",
    "evaluate_scaling_policy",
    "export",
    "isolation_ok",
    "parse_descriptor_set",
    "route_drb",
    "run",
    "serialize_descriptor_set",
    "slice_awareness_required",
    "validate",
    "vnic_mean_wait",
    "__version__",
]
