from .model import (
    AuxIl,
    AuxiliaryNsd,
    ConnectivityPoint,
    ConstituentSpec,
    DescriptorSet,
    GnbNsd,
    HarqTarget,
    InstantiationLevel,
    Pnfd,
    RanNsst,
    RlcMode,
    ScaleLevel,
    ScalingAspect,
    ServiceType,
    SliceProfile,
    Snssai,
    VmFlavour,
    Vnfd,
    enumerate_ils,
)
from .parse import (
    DescriptorSyntaxError,
    DuplicateIdError,
    parse_descriptor_set,
    parse_snssai,
    serialize_descriptor_set,
)
from .validate import Finding, ValidationReport, validate

__all__ = [
    "AuxIl",
    "AuxiliaryNsd",
    "ConnectivityPoint",
    "ConstituentSpec",
    "DescriptorSet",
    "DescriptorSyntaxError",
    "DuplicateIdError",
    "Finding",
    "GnbNsd",
    "HarqTarget",
    "InstantiationLevel",
    "Pnfd",
    "RanNsst",
    "RlcMode",
    "ScaleLevel",
    "ScalingAspect",
    "ServiceType",
    "SliceProfile",
    "Snssai",
    "ValidationReport",
    "VmFlavour",
    "Vnfd",
    "enumerate_ils",
    "parse_descriptor_set",
    "parse_snssai",
    "serialize_descriptor_set",
    "validate",
]
