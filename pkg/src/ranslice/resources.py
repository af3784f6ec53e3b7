"""vCPU-consumption and vNIC waiting-time models, the isolation predicate
over shared instances, and coefficient calibration.

DU vCPU consumption follows the three measured trends for virtualized
baseband processing: exponential in modulation order, linear with an
offset in PRBs, linear in code rate. A single multiplicative traffic
term satisfies all three at once:

    C = c0 + k * prbs * code_rate * exp(beta * modulation_order)

There is no published CU model, so the CU uses the same family scaled by
``cu_scale`` (< 1: the CU processes fewer cycles per bit). The vNIC
buffer is an M/M/1 queue whose arrival rate grows linearly with the PRBs
routed through the VM; the queue model is pluggable.

Default coefficients are placeholders and should be overridden from the
configuration file or fitted with ``calibrate_params``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .descriptors import Snssai
from .errors import RansliceError

MODULATION_ORDERS = (2, 4, 6, 8)

# NR resource grid: 12 subcarriers x 14 symbols per slot, 2^mu slots/ms.
_SYMBOLS_PER_PRB_PER_SEC_MU0 = 12 * 14 * 1000


class VnicSaturatedError(RansliceError):
    """Packet arrival rate at or beyond the vNIC service rate: the queue
    has no stationary regime and the waiting time is unbounded."""


class UnderdeterminedError(RansliceError):
    """Too few (or degenerate) anchor points to fit the free coefficients."""


class CalibrationError(RansliceError):
    """Anchors are inconsistent with the model shape (e.g. consumption
    decreasing in traffic)."""


@dataclass(frozen=True)
class ResourceModelParams:
    c0: float = 0.05            # vCPU-fraction baseline per slice per instance
    k: float = 0.001            # vCPU-fraction per PRB-equivalent traffic unit
    beta: float = 0.35          # per-modulation-order exponent
    cu_scale: float = 0.3       # CU consumption relative to the DU
    vnic_service_rate: float = 1.0e5   # packets/s (mu)
    pkt_per_prb: float = 125.0         # packets/s generated per allocated PRB

    def __post_init__(self):
        if self.c0 < 0:
            raise ValueError("c0 must be >= 0")
        for name in ("k", "beta", "vnic_service_rate", "pkt_per_prb"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 < self.cu_scale < 1:
            raise ValueError("cu_scale must be in (0, 1)")


@dataclass(frozen=True)
class SliceLoad:
    """Coarse-time-scale load of one slice subnet: allocated PRBs plus
    the average MCS assigned to its scheduled users."""

    snssai: Snssai
    prbs: int
    modulation_order: int
    code_rate: float

    def __post_init__(self):
        if self.prbs < 0:
            raise ValueError("prbs must be >= 0")
        if self.modulation_order not in MODULATION_ORDERS:
            raise ValueError(f"modulation_order must be one of {MODULATION_ORDERS}")
        if not 0 < self.code_rate <= 1:
            raise ValueError("code_rate must be in (0, 1]")


@dataclass(frozen=True)
class CapacityBudget:
    """Per-instance vCPU capacity (1.0 per vCPU of the VM flavour) and the
    per-slice consumption cap, as a fraction of that capacity."""

    vcpu_capacity: float
    per_slice_cap: float = 0.9

    def __post_init__(self):
        if self.vcpu_capacity <= 0:
            raise ValueError("vcpu_capacity must be > 0")
        if not 0 < self.per_slice_cap <= 1:
            raise ValueError("per_slice_cap must be in (0, 1]")


def du_vcpu_consumption(load: SliceLoad, p: ResourceModelParams) -> float:
    """vCPU fraction one slice consumes on a DU instance."""
    return p.c0 + p.k * load.prbs * load.code_rate * math.exp(p.beta * load.modulation_order)


def cu_vcpu_consumption(load: SliceLoad, p: ResourceModelParams) -> float:
    """vCPU fraction one slice consumes on a CU instance: same traffic
    dependence as the DU, scaled down by ``cu_scale``."""
    return p.cu_scale * du_vcpu_consumption(load, p)


def mm1_wait(arrival_rate: float, service_rate: float) -> float:
    """Mean waiting time in queue (excluding service) of an M/M/1 server:
    W = 1/(mu - lambda) - 1/mu."""
    if arrival_rate >= service_rate:
        raise VnicSaturatedError(
            f"arrival rate {arrival_rate:.1f} >= service rate {service_rate:.1f} pkt/s")
    return 1.0 / (service_rate - arrival_rate) - 1.0 / service_rate


def vnic_mean_wait(total_prbs: int, p: ResourceModelParams,
                   queue_wait: Callable[[float, float], float] = mm1_wait) -> float:
    """Mean waiting time (s) of packets in a vNIC buffer fed by
    ``total_prbs`` allocated PRBs. Raises VnicSaturatedError when the
    implied arrival rate reaches the service rate."""
    if total_prbs < 0:
        raise ValueError("total_prbs must be >= 0")
    return queue_wait(p.pkt_per_prb * total_prbs, p.vnic_service_rate)


@dataclass(frozen=True)
class IsolationResult:
    ok: bool
    capacity_headroom: float
    slice_headroom: Mapping[Snssai, float]
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def check_isolation(consumptions: Mapping[Snssai, float],
                    budget: CapacityBudget) -> IsolationResult:
    """Isolation predicate on one shared instance, from per-slice vCPU
    consumptions: the total may not exceed the instance capacity and no
    slice may exceed its cap. Boundaries are inclusive."""
    total = sum(consumptions.values())
    slice_limit = budget.per_slice_cap * budget.vcpu_capacity
    violations: list[str] = []
    if total > budget.vcpu_capacity:
        violations.append(
            f"total consumption {total:.4f} exceeds capacity {budget.vcpu_capacity:.4f}")
    headroom = {}
    for snssai in sorted(consumptions, key=lambda s: s.key()):
        used = consumptions[snssai]
        headroom[snssai] = slice_limit - used
        if used > slice_limit:
            violations.append(
                f"slice {snssai} consumption {used:.4f} exceeds cap {slice_limit:.4f}")
    return IsolationResult(
        ok=not violations,
        capacity_headroom=budget.vcpu_capacity - total,
        slice_headroom=headroom,
        violations=tuple(violations),
    )


def isolation_ok(loads: Sequence[SliceLoad], budget: CapacityBudget,
                 p: ResourceModelParams,
                 consumption: Callable[[SliceLoad, ResourceModelParams], float] = du_vcpu_consumption,
                 ) -> IsolationResult:
    """Isolation predicate over slice loads sharing one instance."""
    if not loads:
        raise ValueError("loads must be non-empty")
    consumptions: dict[Snssai, float] = {}
    for load in loads:
        if load.snssai in consumptions:
            raise ValueError(f"duplicate load for slice {load.snssai}")
        consumptions[load.snssai] = consumption(load, p)
    return check_isolation(consumptions, budget)


def estimate_prbs(throughput_mbps: float, modulation_order: int, code_rate: float,
                  numerology_index: int, dl_ul_symbol_ratio: float) -> int:
    """PRBs needed to carry a downlink throughput at the given MCS.

    One PRB carries 12 * 14 * 1000 * 2^mu symbols/s, of which the
    downlink share is r / (1 + r) for a DL/UL symbol ratio r; each symbol
    carries modulation_order * code_rate information bits.
    """
    if throughput_mbps < 0:
        raise ValueError("throughput must be >= 0")
    if throughput_mbps == 0:
        return 0
    sym_per_sec = _SYMBOLS_PER_PRB_PER_SEC_MU0 * (2 ** numerology_index)
    dl_share = dl_ul_symbol_ratio / (1.0 + dl_ul_symbol_ratio)
    bits_per_prb = modulation_order * code_rate * sym_per_sec * dl_share
    return max(1, math.ceil(throughput_mbps * 1e6 / bits_per_prb))


def _traffic_term(load: SliceLoad, beta: float) -> float:
    return load.prbs * load.code_rate * math.exp(beta * load.modulation_order)


@dataclass(frozen=True)
class CalibrationResult:
    params: ResourceModelParams
    residuals: tuple[float, ...]

    @property
    def max_abs_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)


def calibrate_params(anchors: Sequence[tuple[SliceLoad, float]],
                     base: ResourceModelParams = ResourceModelParams(),
                     beta: float | None = None) -> CalibrationResult:
    """Least-squares fit of (c0, k) to observed (load, vCPU-fraction)
    anchors, with beta fixed (from ``base`` unless overridden).

    With two distinct anchors the system is exactly determined and the
    fitted model reproduces them to numerical precision. Raises
    UnderdeterminedError with fewer than two independent anchors and
    CalibrationError when the fit leaves the admissible region (k <= 0).
    A slightly negative fitted c0 is clamped by refitting with c0 = 0.
    """
    if len(anchors) < 2:
        raise UnderdeterminedError("need at least two anchor points to fit (c0, k)")
    beta_fixed = base.beta if beta is None else beta
    x = np.array([_traffic_term(load, beta_fixed) for load, _ in anchors])
    y = np.array([observed for _, observed in anchors])
    design = np.column_stack([np.ones_like(x), x])
    if np.linalg.matrix_rank(design) < 2:
        raise UnderdeterminedError("anchor loads are not distinct enough to fit (c0, k)")
    coeffs, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    c0, k = float(coeffs[0]), float(coeffs[1])
    if c0 < 0:
        c0 = 0.0
        k = float(np.dot(x, y) / np.dot(x, x))
    if k <= 0:
        raise CalibrationError("anchors imply consumption non-increasing in traffic")
    params = replace(base, c0=c0, k=k, beta=beta_fixed)
    fitted = c0 + k * x
    residuals = tuple(float(r) for r in (y - fitted))
    return CalibrationResult(params=params, residuals=residuals)
