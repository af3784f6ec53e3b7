"""Lifecycle state machine for slice subnets over one gNB deployment.

Plays the NFVO/VNFM/slice-subnet-manager roles: instantiates subnets
from their templates, admits DRBs under the isolation predicate,
allocates PRBs at coarse time scale, and scales instances. A slice's CU
scales independently per subnet; a shared DU scales exactly once through
the auxiliary service, after which every referencing subnet's
instantiation level is updated to the new DU level (its CU level
re-selected from its own demand).

All mutating operations run on one logical thread (single-writer);
read-only snapshots are safe to take concurrently.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .descriptors import DescriptorSet, GnbNsd, Snssai, validate
from .descriptors.validate import ValidationReport
from .errors import RansliceError
from .resources import (
    CapacityBudget,
    ResourceModelParams,
    SliceLoad,
    check_isolation,
    cu_vcpu_consumption,
    du_vcpu_consumption,
    estimate_prbs,
    MODULATION_ORDERS,
    vnic_mean_wait,
    VnicSaturatedError,
)
from .topology import Drb, Scenario, dedicated_du_ids, shared_cu_id, shared_du_ids


class OrchestrationError(RansliceError):
    pass


class UnknownSnssaiError(OrchestrationError):
    pass


class DescriptorInvalidError(OrchestrationError):
    """Descriptor findings block instantiation."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__(f"descriptor set has findings:\n{report}")


class AtBoundaryError(OrchestrationError):
    """No adjacent scale level in the requested direction."""


class NoMatchingIlError(OrchestrationError):
    """The gNB NSD declares no IL for the requested (cu_sl, du_sl) pair."""


class Direction(enum.Enum):
    UP = "up"
    DOWN = "down"


class ScaleTarget(enum.Enum):
    CU = "cu"
    DU = "du"                    # dedicated per-subnet DU pool
    SHARED_DU = "shared_du"
    # Coordinated per-subnet IL update after a shared-DU scaling; not a
    # scaling execution of its own.
    SUBNET_IL = "subnet_il"


class ScalingCause(enum.Enum):
    LOAD_INCREASE = "load_increase"
    LOAD_DECREASE = "load_decrease"
    ADMISSION = "admission"


@dataclass(frozen=True)
class ScalingEvent:
    time: int
    target: ScaleTarget
    snssai: Snssai | None
    from_level: str
    to_level: str
    cause: ScalingCause

    def __post_init__(self):
        if self.from_level == self.to_level:
            raise ValueError("scaling event must change level")

    def __str__(self) -> str:
        who = self.target.value if self.snssai is None else f"{self.target.value}({self.snssai})"
        return f"{who}:{self.from_level}->{self.to_level}"


@dataclass(frozen=True)
class ScalingThresholds:
    """Trigger rule for the scaling policy: scale up when the windowed
    mean utilization exceeds ``hi``, down below ``lo``; an opposite
    decision within ``cooldown`` ticks of the last one is suppressed."""

    hi: float = 0.8
    lo: float = 0.3
    window: int = 5
    cooldown: int = 3

    def __post_init__(self):
        if not 0 < self.lo < self.hi <= 1:
            raise ValueError("thresholds must satisfy 0 < lo < hi <= 1")
        if self.window < 1 or self.cooldown < 0:
            raise ValueError("window must be >= 1 and cooldown >= 0")


REJECT_VCPU_CAP = "vcpu_cap"
REJECT_VNIC_SATURATED = "vnic_saturated"
REJECT_VNIC_DELAY = "vnic_delay"


@dataclass(frozen=True)
class Admit:
    est_prbs: int

    @property
    def admitted(self) -> bool:
        return True


@dataclass(frozen=True)
class Reject:
    reason: str
    detail: str = ""

    @property
    def admitted(self) -> bool:
        return False


@dataclass(frozen=True)
class AdmittedDrb:
    drb: Drb
    est_prbs: int
    modulation_order: int
    code_rate: float


@dataclass
class SubnetInstance:
    """Runtime state of one RAN slice subnet: its current instantiation
    level (and the two scale levels it combines), admitted bearers and
    the PRBs last allocated to it."""

    snssai: Snssai
    nsst_ref: str
    nsd_ref: str
    current_il: str
    cu_sl: str
    du_sl: str
    admitted_drbs: list[AdmittedDrb] = field(default_factory=list)
    allocated_prbs: int = 0

    def demand_prbs(self) -> int:
        return sum(a.est_prbs for a in self.admitted_drbs)


@dataclass
class AuxServiceInstance:
    """The auxiliary network service coordinating a shared DU: scaling
    executes here exactly once, and its IL pins the DU scale level of
    every referencing subnet."""

    aux_nsd_ref: str
    current_il: str
    live_du_ids: list[str]


@dataclass(frozen=True)
class InstanceUtil:
    """Projected state of one live VNF instance: per-slice vCPU use,
    PRBs flowing through its vNIC, and the flavour capacity."""

    instance_id: str
    kind: str                    # "cu" | "du"
    shared: bool
    owners: tuple[Snssai, ...]
    per_slice: Mapping[Snssai, float]
    prbs: int
    capacity: float

    @property
    def consumption(self) -> float:
        return sum(self.per_slice.values())

    @property
    def utilization(self) -> float:
        return self.consumption / self.capacity


def evaluate_scaling_policy(history: Sequence[float], thresholds: ScalingThresholds,
                            can_up: bool = True, can_down: bool = True,
                            last_event: tuple[int, Direction] | None = None,
                            now: int = 0) -> Direction | None:
    """Threshold policy with hysteresis over a utilization history.

    The mean is taken over the last ``window`` samples (fewer if the
    history is shorter). Returns None between thresholds, at a level
    boundary, or when the opposite of the last decision falls inside the
    cooldown.
    """
    if not history:
        raise ValueError("history must be non-empty")
    recent = list(history)[-thresholds.window:]
    mean = sum(recent) / len(recent)
    if mean > thresholds.hi and can_up:
        decision = Direction.UP
    elif mean < thresholds.lo and can_down:
        decision = Direction.DOWN
    else:
        return None
    if last_event is not None:
        last_tick, last_dir = last_event
        if last_dir != decision and now - last_tick < thresholds.cooldown:
            return None
    return decision


def _integer_split(total: int, parts: int) -> list[int]:
    base, rem = divmod(total, parts)
    return [base + (1 if i < rem else 0) for i in range(parts)]


def _snap_modulation(value: float) -> int:
    return min(MODULATION_ORDERS, key=lambda m: (abs(m - value), m))


class Orchestrator:
    """Single-writer orchestration state over a validated descriptor set."""

    def __init__(self, ds: DescriptorSet, scenario: Scenario,
                 params: ResourceModelParams,
                 budget: CapacityBudget,
                 thresholds: ScalingThresholds = ScalingThresholds(),
                 vnic_delay_cap_s: float = 2e-3):
        report = validate(ds)
        if not report.ok:
            raise DescriptorInvalidError(report)
        self.ds = ds
        self.scenario = scenario
        self.params = params
        self.budget = budget
        self.thresholds = thresholds
        self.vnic_delay_cap_s = vnic_delay_cap_s
        self.clock = 0
        self.subnets: dict[Snssai, SubnetInstance] = {}
        self.aux: AuxServiceInstance | None = None
        self.events: list[ScalingEvent] = []
        self.findings: list[str] = []
        self._hist: dict[tuple[str, Snssai | None], deque[float]] = {}
        self._last_scale: dict[tuple[str, Snssai | None], tuple[int, Direction]] = {}

    # -- descriptor lookups -------------------------------------------------

    def _nsd(self, snssai: Snssai) -> GnbNsd:
        return self.ds.gnb_nsds[self.subnets[snssai].nsd_ref]

    def _cu_sl_vcpus(self, snssai: Snssai, sl_id: str | None = None) -> int:
        subnet = self.subnets[snssai]
        nsd = self._nsd(snssai)
        sl = nsd.sa_cu.sl(sl_id or subnet.cu_sl)
        return self.ds.sl_total_vcpus(nsd, sl, self.ds.cu_vnfd(nsd))

    def _du_sl_spec(self, snssai: Snssai, sl_id: str | None = None) -> tuple[int, int]:
        """(instance count, vCPUs per instance) of a dedicated DU scale level."""
        subnet = self.subnets[snssai]
        nsd = self._nsd(snssai)
        sl = nsd.sa_du.sl(sl_id or subnet.du_sl)
        if len(sl.constituents) != 1:
            raise OrchestrationError(
                f"DU scale level {sl.id!r} must have exactly one constituent")
        c = sl.constituents[0]
        flavour = self.ds.du_vnfd(nsd).flavour(c.flavour_ref)
        return c.instance_count, flavour.vcpus

    def _aux_spec(self, il_id: str | None = None) -> tuple[int, int]:
        """(instance count, vCPUs per instance) of an auxiliary-service IL."""
        aux_nsd = self.ds.aux_nsds[self.aux.aux_nsd_ref]
        il = aux_nsd.il(il_id or self.aux.current_il)
        any_subnet = next(iter(self.subnets.values()))
        du_vnfd = self.ds.du_vnfd(self.ds.gnb_nsds[any_subnet.nsd_ref])
        return il.du_count, du_vnfd.flavour(il.du_il_ref).vcpus

    def _il_capacity(self, nsd: GnbNsd, il) -> int:
        cu = self.ds.sl_total_vcpus(nsd, nsd.sa_cu.sl(il.cu_sl), self.ds.cu_vnfd(nsd))
        du = self.ds.sl_total_vcpus(nsd, nsd.sa_du.sl(il.du_sl), self.ds.du_vnfd(nsd))
        return cu + du

    # -- lifecycle ----------------------------------------------------------

    def instantiate_subnet(self, snssai: Snssai) -> SubnetInstance:
        """Create the subnet at the lowest declared IL of its gNB NSD; in
        shared-DU scenarios the DU level is pinned to the auxiliary
        service, created by the first subnet and reused afterwards."""
        if snssai in self.subnets:
            raise OrchestrationError(f"subnet {snssai} already instantiated")
        nsst = self.ds.nsst_for(snssai)
        if nsst is None:
            raise UnknownSnssaiError(f"no NSST declares snssai {snssai}")
        nsd = self.ds.gnb_nsd_for(nsst)

        if self.scenario.du_shared and nsd.aux_nsd_ref is None and self.subnets:
            # A single subnet may "share" its DU without coordination, but
            # actual sharing across subnets needs the auxiliary service.
            raise OrchestrationError(
                f"scenario {self.scenario.value} shares the DU across subnets "
                f"but gnb_nsd[{nsd.id}] declares no auxiliary NSD")
        if self.scenario.du_shared and nsd.aux_nsd_ref is not None:
            if self.aux is None:
                first = self.ds.aux_nsds[nsd.aux_nsd_ref].ils[0]
                self.aux = AuxServiceInstance(
                    aux_nsd_ref=nsd.aux_nsd_ref,
                    current_il=first.id,
                    live_du_ids=shared_du_ids(first.du_count),
                )
            elif nsd.aux_nsd_ref != self.aux.aux_nsd_ref:
                raise OrchestrationError(
                    f"gnb_nsd[{nsd.id}] references auxiliary NSD "
                    f"{nsd.aux_nsd_ref!r}, but {self.aux.aux_nsd_ref!r} is live")
            candidates = [il for il in nsd.ils if il.du_sl == self.aux.current_il]
            if not candidates:
                raise OrchestrationError(
                    f"gnb_nsd[{nsd.id}] declares no IL at auxiliary level "
                    f"{self.aux.current_il!r}")
            il = min(candidates, key=lambda i: self._cu_capacity_of(nsd, i.cu_sl))
        else:
            il = min(nsd.ils, key=lambda i: self._il_capacity(nsd, i))

        subnet = SubnetInstance(
            snssai=snssai, nsst_ref=nsst.id, nsd_ref=nsd.id,
            current_il=il.id, cu_sl=il.cu_sl, du_sl=il.du_sl,
        )
        self.subnets[snssai] = subnet
        return subnet

    def _cu_capacity_of(self, nsd: GnbNsd, cu_sl: str) -> int:
        return self.ds.sl_total_vcpus(nsd, nsd.sa_cu.sl(cu_sl), self.ds.cu_vnfd(nsd))

    def _sorted_slices(self) -> list[Snssai]:
        return sorted(self.subnets, key=lambda s: s.key())

    # -- load projection ------------------------------------------------------

    def _slice_mcs(self, snssai: Snssai,
                   extra: tuple[Snssai, int, int, float] | None = None) -> tuple[int, float]:
        """PRB-weighted average MCS over the admitted DRBs of a slice, the
        modulation snapped to a valid order. (2, 1.0) when idle."""
        entries = [(a.est_prbs, a.modulation_order, a.code_rate)
                   for a in self.subnets[snssai].admitted_drbs]
        if extra is not None and extra[0] == snssai:
            entries.append((extra[1], extra[2], extra[3]))
        total = sum(w for w, _, _ in entries)
        if total == 0:
            return 2, 1.0
        mean_m = sum(w * m for w, m, _ in entries) / total
        mean_cr = sum(w * cr for w, _, cr in entries) / total
        return _snap_modulation(mean_m), mean_cr

    def _slice_load(self, snssai: Snssai, prbs: int,
                    extra: tuple[Snssai, int, int, float] | None = None) -> SliceLoad:
        m, cr = self._slice_mcs(snssai, extra)
        return SliceLoad(snssai=snssai, prbs=prbs, modulation_order=m, code_rate=cr)

    def _project(self, prbs_by_slice: Mapping[Snssai, int],
                 extra: tuple[Snssai, int, int, float] | None = None,
                 cu_sl_over: Mapping[Snssai, str] | None = None,
                 du_sl_over: Mapping[Snssai, str] | None = None,
                 aux_il_over: str | None = None) -> list[InstanceUtil]:
        """Per-instance consumption/PRB projection for a given PRB split.
        A slice's PRBs spread evenly (integer split) over the DU pool
        serving it; its CU carries the full slice load. Overrides allow
        probing hypothetical scale levels without touching state."""
        slices = self._sorted_slices()
        insts: list[InstanceUtil] = []
        # With a single owning subnet a "shared" instance degenerates to a
        # dedicated one: there is no other slice for the cap to protect.
        multi = len(slices) > 1

        if self.aux is not None:
            count, vcpus = self._aux_spec(aux_il_over)
            ids = shared_du_ids(count)
            shares = {s: _integer_split(prbs_by_slice.get(s, 0), count) for s in slices}
            for i, du_id in enumerate(ids):
                per_slice = {}
                prbs_total = 0
                for s in slices:
                    load = self._slice_load(s, shares[s][i], extra)
                    per_slice[s] = du_vcpu_consumption(load, self.params)
                    prbs_total += shares[s][i]
                insts.append(InstanceUtil(du_id, "du", multi, tuple(slices),
                                          per_slice, prbs_total, float(vcpus)))
        else:
            for s in slices:
                sl_id = du_sl_over.get(s) if du_sl_over else None
                count, vcpus = self._du_sl_spec(s, sl_id)
                shares = _integer_split(prbs_by_slice.get(s, 0), count)
                for i, du_id in enumerate(dedicated_du_ids(s, count)):
                    load = self._slice_load(s, shares[i], extra)
                    insts.append(InstanceUtil(du_id, "du", False, (s,),
                                              {s: du_vcpu_consumption(load, self.params)},
                                              shares[i], float(vcpus)))

        if self.scenario.cu_shared:
            per_slice = {}
            prbs_total = 0
            capacity = 0
            for s in slices:
                load = self._slice_load(s, prbs_by_slice.get(s, 0), extra)
                per_slice[s] = cu_vcpu_consumption(load, self.params)
                prbs_total += prbs_by_slice.get(s, 0)
                sl_id = cu_sl_over.get(s) if cu_sl_over else None
                capacity = max(capacity, self._cu_sl_vcpus(s, sl_id))
            insts.append(InstanceUtil(shared_cu_id(), "cu", multi, tuple(slices),
                                      per_slice, prbs_total, float(capacity)))
        else:
            for s in slices:
                load = self._slice_load(s, prbs_by_slice.get(s, 0), extra)
                sl_id = cu_sl_over.get(s) if cu_sl_over else None
                insts.append(InstanceUtil(self._nsd(s).cu_id, "cu", False, (s,),
                                          {s: cu_vcpu_consumption(load, self.params)},
                                          prbs_by_slice.get(s, 0),
                                          float(self._cu_sl_vcpus(s, sl_id))))
        return insts

    def _demand_map(self) -> dict[Snssai, int]:
        return {s: self.subnets[s].demand_prbs() for s in self._sorted_slices()}

    def _allocated_map(self) -> dict[Snssai, int]:
        return {s: self.subnets[s].allocated_prbs for s in self._sorted_slices()}

    # -- admission ------------------------------------------------------------

    def admit_drb(self, snssai: Snssai, drb: Drb,
                  modulation_order: int, code_rate: float) -> Admit | Reject:
        """Admit the DRB iff, with every slice at its post-admission
        demand, isolation holds on each shared instance the DRB touches
        and no touched vNIC saturates or exceeds the delay cap."""
        if snssai not in self.subnets:
            raise UnknownSnssaiError(f"subnet {snssai} not instantiated")
        nsst = self.ds.nssts[self.subnets[snssai].nsst_ref]
        profile = nsst.slice_profile
        est = estimate_prbs(drb.qos.throughput_mbps, modulation_order, code_rate,
                            profile.numerology_index, profile.dl_ul_symbol_ratio)
        demand = self._demand_map()
        demand[snssai] = demand[snssai] + est
        extra = (snssai, est, modulation_order, code_rate)
        for inst in self._project(demand, extra=extra):
            if snssai not in inst.owners:
                continue
            if inst.shared:
                result = check_isolation(
                    inst.per_slice,
                    CapacityBudget(inst.capacity, self.budget.per_slice_cap))
                if not result.ok:
                    return Reject(REJECT_VCPU_CAP,
                                  f"{inst.instance_id}: {'; '.join(result.violations)}")
            try:
                wait = vnic_mean_wait(inst.prbs, self.params)
            except VnicSaturatedError as exc:
                return Reject(REJECT_VNIC_SATURATED, f"{inst.instance_id}: {exc}")
            if wait > self.vnic_delay_cap_s:
                return Reject(REJECT_VNIC_DELAY,
                              f"{inst.instance_id}: mean wait {wait * 1e3:.3f} ms "
                              f"exceeds cap {self.vnic_delay_cap_s * 1e3:.3f} ms")
        self.subnets[snssai].admitted_drbs.append(
            AdmittedDrb(drb=drb, est_prbs=est,
                        modulation_order=modulation_order, code_rate=code_rate))
        return Admit(est_prbs=est)

    def depart_drb(self, snssai: Snssai, drb_id: str) -> bool:
        subnet = self.subnets[snssai]
        for i, entry in enumerate(subnet.admitted_drbs):
            if entry.drb.drb_id == drb_id:
                del subnet.admitted_drbs[i]
                return True
        return False

    # -- PRB allocation ---------------------------------------------------------

    def _isolation_feasible(self, prbs_by_slice: Mapping[Snssai, int]) -> bool:
        for inst in self._project(prbs_by_slice):
            if not inst.shared:
                continue
            result = check_isolation(
                inst.per_slice, CapacityBudget(inst.capacity, self.budget.per_slice_cap))
            if not result.ok:
                return False
        return True

    def allocate_prbs(self, total_prbs: int) -> dict[Snssai, int]:
        """Split the PRB budget across subnets proportionally to their
        admitted demand (largest-remainder rounding), then trim the
        largest allocations one PRB at a time until isolation holds on
        every shared instance, and finally round-robin any slack back.
        Deterministic; allocations never exceed a slice's demand."""
        if total_prbs < 0:
            raise ValueError("total_prbs must be >= 0")
        slices = self._sorted_slices()
        demand = self._demand_map()
        total_demand = sum(demand.values())

        if total_demand <= total_prbs:
            alloc = dict(demand)
        else:
            shares = {s: total_prbs * demand[s] / total_demand for s in slices}
            alloc = {s: int(shares[s]) for s in slices}
            leftover = total_prbs - sum(alloc.values())
            by_remainder = sorted(slices, key=lambda s: (-(shares[s] - alloc[s]), s.key()))
            for s in by_remainder[:leftover]:
                alloc[s] += 1

        while not self._isolation_feasible(alloc):
            reducible = [s for s in slices if alloc[s] > 0]
            assert reducible, "isolation violated at zero allocation"
            victim = max(reducible, key=lambda s: (alloc[s], s.key()))
            alloc[victim] -= 1

        changed = True
        while changed:
            changed = False
            for s in slices:
                if alloc[s] >= demand[s] or sum(alloc.values()) >= total_prbs:
                    continue
                trial = dict(alloc)
                trial[s] += 1
                if self._isolation_feasible(trial):
                    alloc = trial
                    changed = True

        for s in slices:
            self.subnets[s].allocated_prbs = alloc[s]
        return alloc

    # -- scaling ------------------------------------------------------------------

    def scale_subnet_cu(self, snssai: Snssai, direction: Direction,
                        cause: ScalingCause = ScalingCause.LOAD_INCREASE) -> ScalingEvent:
        """Move the subnet's CU scale level one step; the DU level is
        untouched and the current IL becomes the declared IL for the new
        pair."""
        subnet = self.subnets[snssai]
        nsd = self._nsd(snssai)
        sa = nsd.sa_cu
        idx = sa.index_of(subnet.cu_sl)
        j = idx + 1 if direction is Direction.UP else idx - 1
        if j < 0 or j >= len(sa.sls):
            raise AtBoundaryError(
                f"cu of {snssai} has no scale level {direction.value} from {subnet.cu_sl!r}")
        new_sl = sa.sls[j].id
        il = nsd.find_il(new_sl, subnet.du_sl)
        if il is None:
            raise NoMatchingIlError(
                f"gnb_nsd[{nsd.id}] declares no IL for ({new_sl}, {subnet.du_sl})")
        event = ScalingEvent(time=self.clock, target=ScaleTarget.CU, snssai=snssai,
                             from_level=subnet.cu_sl, to_level=new_sl, cause=cause)
        subnet.cu_sl = new_sl
        subnet.current_il = il.id
        self.events.append(event)
        return event

    def scale_subnet_du(self, snssai: Snssai, direction: Direction,
                        cause: ScalingCause = ScalingCause.LOAD_INCREASE) -> ScalingEvent:
        """Per-subnet DU scaling for subnets whose DU pool is not under
        auxiliary coordination. Shared DUs scale through scale_shared_du."""
        if self.aux is not None:
            raise OrchestrationError("shared DUs scale through the auxiliary service")
        subnet = self.subnets[snssai]
        nsd = self._nsd(snssai)
        sa = nsd.sa_du
        idx = sa.index_of(subnet.du_sl)
        j = idx + 1 if direction is Direction.UP else idx - 1
        if j < 0 or j >= len(sa.sls):
            raise AtBoundaryError(
                f"du of {snssai} has no scale level {direction.value} from {subnet.du_sl!r}")
        new_sl = sa.sls[j].id
        il = nsd.find_il(subnet.cu_sl, new_sl)
        if il is None:
            raise NoMatchingIlError(
                f"gnb_nsd[{nsd.id}] declares no IL for ({subnet.cu_sl}, {new_sl})")
        event = ScalingEvent(time=self.clock, target=ScaleTarget.DU, snssai=snssai,
                             from_level=subnet.du_sl, to_level=new_sl, cause=cause)
        subnet.du_sl = new_sl
        subnet.current_il = il.id
        self.events.append(event)
        return event

    def _reselect_cu_sl(self, snssai: Snssai) -> str:
        """Smallest CU scale level whose capacity covers the subnet's
        current CU demand; the largest one if none suffices."""
        nsd = self._nsd(snssai)
        need = cu_vcpu_consumption(
            self._slice_load(snssai, self.subnets[snssai].demand_prbs()), self.params)
        for sl in nsd.sa_cu.sls:
            if self._cu_capacity_of(nsd, sl.id) >= need:
                return sl.id
        return nsd.sa_cu.sls[-1].id

    def scale_shared_du(self, direction: Direction,
                        cause: ScalingCause = ScalingCause.LOAD_INCREASE) -> list[ScalingEvent]:
        """Scale the shared DU: exactly one scaling execution, on the
        auxiliary service, then update every referencing subnet to an IL
        whose DU level equals the new auxiliary IL (CU level re-selected
        from the subnet's own demand). A subnet with no usable IL keeps
        its previous view and an InconsistentIl finding is recorded."""
        if self.aux is None:
            raise OrchestrationError("no auxiliary service instance is live")
        aux_nsd = self.ds.aux_nsds[self.aux.aux_nsd_ref]
        ids = [il.id for il in aux_nsd.ils]
        idx = ids.index(self.aux.current_il)
        j = idx + 1 if direction is Direction.UP else idx - 1
        if j < 0 or j >= len(ids):
            raise AtBoundaryError(
                f"auxiliary service has no IL {direction.value} from {self.aux.current_il!r}")
        old_il = self.aux.current_il
        new_il = aux_nsd.ils[j]
        self.aux.current_il = new_il.id
        self.aux.live_du_ids = shared_du_ids(new_il.du_count)
        events = [ScalingEvent(time=self.clock, target=ScaleTarget.SHARED_DU, snssai=None,
                               from_level=old_il, to_level=new_il.id, cause=cause)]
        self.events.append(events[0])

        for s in self._sorted_slices():
            subnet = self.subnets[s]
            nsd = self._nsd(s)
            new_du_sl = new_il.id
            if nsd.sa_du.sl(new_du_sl) is None:
                self.findings.append(
                    f"InconsistentIl: {s}: sa_du has no scale level {new_du_sl!r}")
                continue
            want_cu = self._reselect_cu_sl(s)
            chosen = nsd.find_il(want_cu, new_du_sl)
            if chosen is None:
                need = cu_vcpu_consumption(
                    self._slice_load(s, subnet.demand_prbs()), self.params)
                candidates = [il for il in nsd.ils
                              if il.du_sl == new_du_sl and il.cu_sl is not None
                              and self._cu_capacity_of(nsd, il.cu_sl) >= need]
                if not candidates:
                    self.findings.append(
                        f"InconsistentIl: {s}: no declared IL matches du_sl {new_du_sl!r}")
                    continue
                chosen = min(candidates, key=lambda il: self._cu_capacity_of(nsd, il.cu_sl))
            prev_il = subnet.current_il
            subnet.du_sl = new_du_sl
            subnet.cu_sl = chosen.cu_sl
            subnet.current_il = chosen.id
            event = ScalingEvent(time=self.clock, target=ScaleTarget.SUBNET_IL, snssai=s,
                                 from_level=prev_il, to_level=chosen.id, cause=cause)
            events.append(event)
            self.events.append(event)
        return events

    # -- policy-driven scaling ----------------------------------------------------

    def observe_utilization(self) -> list[InstanceUtil]:
        """Project utilization at the current allocations, record it in
        the per-target policy histories, and return the snapshot."""
        insts = self._project(self._allocated_map())
        by_id = {inst.instance_id: inst for inst in insts}

        for s in self._sorted_slices():
            consumption = 0.0
            for inst in insts:
                if inst.kind == "cu" and s in inst.owners:
                    consumption = inst.per_slice[s]
                    break
            util = consumption / self._cu_sl_vcpus(s)
            self._history(("cu", s)).append(util)

        if self.aux is not None:
            pool = [by_id[i] for i in self.aux.live_du_ids]
            util = sum(i.consumption for i in pool) / sum(i.capacity for i in pool)
            self._history(("du", None)).append(util)
        else:
            for s in self._sorted_slices():
                count, _ = self._du_sl_spec(s)
                pool = [by_id[i] for i in dedicated_du_ids(s, count)]
                util = sum(i.consumption for i in pool) / sum(i.capacity for i in pool)
                self._history(("du", s)).append(util)
        return insts

    def _history(self, key: tuple[str, Snssai | None]) -> deque[float]:
        if key not in self._hist:
            self._hist[key] = deque(maxlen=max(self.thresholds.window, 1))
        return self._hist[key]

    def _shared_ok(self, insts: Iterable[InstanceUtil], check_vnic: bool) -> bool:
        for inst in insts:
            if inst.shared:
                result = check_isolation(
                    inst.per_slice, CapacityBudget(inst.capacity, self.budget.per_slice_cap))
                if not result.ok:
                    return False
            elif inst.consumption > inst.capacity:
                return False
            if check_vnic:
                try:
                    wait = vnic_mean_wait(inst.prbs, self.params)
                except VnicSaturatedError:
                    return False
                if wait > self.vnic_delay_cap_s:
                    return False
        return True

    def _cu_down_feasible(self, snssai: Snssai, new_sl: str) -> bool:
        insts = self._project(self._allocated_map(), cu_sl_over={snssai: new_sl})
        return self._shared_ok((i for i in insts if i.kind == "cu"), check_vnic=False)

    def _du_down_feasible(self, snssai: Snssai | None, new_level: str) -> bool:
        if snssai is None:
            insts = self._project(self._allocated_map(), aux_il_over=new_level)
        else:
            insts = self._project(self._allocated_map(), du_sl_over={snssai: new_level})
        return self._shared_ok((i for i in insts if i.kind == "du"), check_vnic=True)

    def apply_scaling_policies(self) -> list[ScalingEvent]:
        """Evaluate the threshold policy per CU and per DU pool and apply
        the resulting scalings. A scale-down that would violate isolation
        (or saturate a vNIC) is suppressed; admitted DRBs are never
        evicted."""
        events: list[ScalingEvent] = []
        for s in self._sorted_slices():
            subnet = self.subnets[s]
            nsd = self._nsd(s)
            sa = nsd.sa_cu
            idx = sa.index_of(subnet.cu_sl)
            can_up = (idx + 1 < len(sa.sls)
                      and nsd.find_il(sa.sls[idx + 1].id, subnet.du_sl) is not None)
            can_down = (idx > 0
                        and nsd.find_il(sa.sls[idx - 1].id, subnet.du_sl) is not None
                        and self._cu_down_feasible(s, sa.sls[idx - 1].id))
            key = ("cu", s)
            hist = self._history(key)
            if not hist:
                continue
            decision = evaluate_scaling_policy(
                hist, self.thresholds, can_up=can_up, can_down=can_down,
                last_event=self._last_scale.get(key), now=self.clock)
            if decision is None:
                continue
            cause = (ScalingCause.LOAD_INCREASE if decision is Direction.UP
                     else ScalingCause.LOAD_DECREASE)
            events.append(self.scale_subnet_cu(s, decision, cause))
            self._last_scale[key] = (self.clock, decision)

        if self.aux is not None:
            aux_nsd = self.ds.aux_nsds[self.aux.aux_nsd_ref]
            ids = [il.id for il in aux_nsd.ils]
            idx = ids.index(self.aux.current_il)
            can_up = idx + 1 < len(ids)
            can_down = idx > 0 and self._du_down_feasible(None, ids[idx - 1])
            key = ("du", None)
            hist = self._history(key)
            if hist:
                decision = evaluate_scaling_policy(
                    hist, self.thresholds, can_up=can_up, can_down=can_down,
                    last_event=self._last_scale.get(key), now=self.clock)
                if decision is not None:
                    cause = (ScalingCause.LOAD_INCREASE if decision is Direction.UP
                             else ScalingCause.LOAD_DECREASE)
                    events.extend(self.scale_shared_du(decision, cause))
                    self._last_scale[key] = (self.clock, decision)
        else:
            for s in self._sorted_slices():
                subnet = self.subnets[s]
                nsd = self._nsd(s)
                sa = nsd.sa_du
                idx = sa.index_of(subnet.du_sl)
                can_up = (idx + 1 < len(sa.sls)
                          and nsd.find_il(subnet.cu_sl, sa.sls[idx + 1].id) is not None)
                can_down = (idx > 0
                            and nsd.find_il(subnet.cu_sl, sa.sls[idx - 1].id) is not None
                            and self._du_down_feasible(s, sa.sls[idx - 1].id))
                key = ("du", s)
                hist = self._history(key)
                if not hist:
                    continue
                decision = evaluate_scaling_policy(
                    hist, self.thresholds, can_up=can_up, can_down=can_down,
                    last_event=self._last_scale.get(key), now=self.clock)
                if decision is None:
                    continue
                cause = (ScalingCause.LOAD_INCREASE if decision is Direction.UP
                         else ScalingCause.LOAD_DECREASE)
                events.append(self.scale_subnet_du(s, decision, cause))
                self._last_scale[key] = (self.clock, decision)
        return events

    # -- accounting ----------------------------------------------------------------

    def live_vm_count(self) -> int:
        """Live VMs implied by the current scale levels: one per CU
        instance plus the DU pool size."""
        if not self.subnets:
            return 0
        cu = 1 if self.scenario.cu_shared else len(self.subnets)
        if self.aux is not None:
            du = self._aux_spec()[0]
        else:
            du = sum(self._du_sl_spec(s)[0] for s in self.subnets)
        return cu + du

    def advance_clock(self) -> None:
        self.clock += 1
