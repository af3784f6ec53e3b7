"""Parsing of descriptor documents into a typed DescriptorSet.

A document is a YAML (or JSON) mapping whose top-level keys name the
descriptor kind: ``ran_nsst``, ``gnb_nsd``, ``vnfd``, ``pnfd``,
``aux_nsd``. Each value is either one descriptor mapping or a list of
them. Parsing checks shape and field types only; cross-references stay
symbolic and structural invariants are checked by ``validate``, so that
an incomplete descriptor parses and is reported as a finding rather
than a parse error. The exception is enumerated fields (service type,
RLC mode, HARQ target), whose membership is part of the schema.
"""

from __future__ import annotations

from typing import Any, Iterable, Mapping, Sequence

import yaml

from ..errors import RansliceError
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
)

KINDS = ("ran_nsst", "gnb_nsd", "vnfd", "pnfd", "aux_nsd")


class DescriptorSyntaxError(RansliceError):
    """Malformed descriptor document (bad YAML, wrong shape or type)."""

    def __init__(self, document: str, message: str, line: int | None = None):
        self.document = document
        self.line = line
        where = document if line is None else f"{document}:{line}"
        super().__init__(f"{where}: {message}")


class DuplicateIdError(RansliceError):
    """Two descriptors share one id (ids are unique across all kinds)."""

    def __init__(self, dup_id: str):
        self.dup_id = dup_id
        super().__init__(f"duplicate descriptor id {dup_id!r}")


def _as_map(obj: Any, doc: str, path: str) -> Mapping[str, Any]:
    if not isinstance(obj, Mapping):
        raise DescriptorSyntaxError(doc, f"{path}: expected a mapping, got {type(obj).__name__}")
    return obj


def _as_list(obj: Any, doc: str, path: str) -> list[Any]:
    if not isinstance(obj, Sequence) or isinstance(obj, (str, bytes)):
        raise DescriptorSyntaxError(doc, f"{path}: expected a list, got {type(obj).__name__}")
    return list(obj)


def _get_str(m: Mapping[str, Any], key: str, doc: str, path: str,
             required: bool = False) -> str | None:
    v = m.get(key)
    if v is None:
        if required:
            raise DescriptorSyntaxError(doc, f"{path}.{key}: missing required field")
        return None
    if not isinstance(v, str):
        raise DescriptorSyntaxError(doc, f"{path}.{key}: expected a string")
    return v


def _get_int(m: Mapping[str, Any], key: str, doc: str, path: str,
             required: bool = False) -> int | None:
    v = m.get(key)
    if v is None:
        if required:
            raise DescriptorSyntaxError(doc, f"{path}.{key}: missing required field")
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise DescriptorSyntaxError(doc, f"{path}.{key}: expected an integer")
    return v


def _get_num(m: Mapping[str, Any], key: str, doc: str, path: str,
             required: bool = False) -> float | None:
    v = m.get(key)
    if v is None:
        if required:
            raise DescriptorSyntaxError(doc, f"{path}.{key}: missing required field")
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DescriptorSyntaxError(doc, f"{path}.{key}: expected a number")
    return float(v)


def _get_bool(m: Mapping[str, Any], key: str, doc: str, path: str,
              required: bool = False, default: bool | None = None) -> bool | None:
    v = m.get(key)
    if v is None:
        if required:
            raise DescriptorSyntaxError(doc, f"{path}.{key}: missing required field")
        return default
    if not isinstance(v, bool):
        raise DescriptorSyntaxError(doc, f"{path}.{key}: expected a boolean")
    return v


def _get_enum(m: Mapping[str, Any], key: str, enum_cls, doc: str, path: str):
    raw = _get_str(m, key, doc, path, required=True)
    for member in enum_cls:
        if member.value == raw:
            return member
    allowed = ", ".join(member.value for member in enum_cls)
    raise DescriptorSyntaxError(doc, f"{path}.{key}: {raw!r} not one of {allowed}")


def parse_snssai(obj: Any, doc: str, path: str) -> Snssai:
    m = _as_map(obj, doc, path)
    service_type = _get_enum(m, "service_type", ServiceType, doc, path)
    subtype = _get_str(m, "subtype", doc, path)
    return Snssai(service_type=service_type, subtype=subtype)


def _parse_slice_profile(obj: Any, snssai: Snssai | None, doc: str, path: str) -> SliceProfile:
    m = _as_map(obj, doc, path)
    if snssai is None:
        raise DescriptorSyntaxError(doc, f"{path}: slice_profile requires a snssai on the NSST")
    return SliceProfile(
        snssai=snssai,
        pdcp_duplication=_get_bool(m, "pdcp_duplication", doc, path, required=True),
        pdcp_ciphering=_get_bool(m, "pdcp_ciphering", doc, path, required=True),
        rlc_mode=_get_enum(m, "rlc_mode", RlcMode, doc, path),
        rlc_segmentation=_get_bool(m, "rlc_segmentation", doc, path, required=True),
        numerology_index=_get_int(m, "numerology_index", doc, path, required=True),
        harq_target=_get_enum(m, "harq_target", HarqTarget, doc, path),
        dl_ul_symbol_ratio=_get_num(m, "dl_ul_symbol_ratio", doc, path, required=True),
    )


def _parse_fcaps(obj: Any, doc: str, path: str) -> dict[str, Any]:
    if obj is None:
        return {}
    m = _as_map(obj, doc, path)
    out: dict[str, Any] = {}
    for k, v in m.items():
        if not isinstance(k, str):
            raise DescriptorSyntaxError(doc, f"{path}: fcaps keys must be strings")
        if v is not None and not isinstance(v, (str, int, float, bool)):
            raise DescriptorSyntaxError(doc, f"{path}.{k}: fcaps values must be scalars")
        out[k] = v
    return out


def _parse_nsst(m: Mapping[str, Any], doc: str) -> RanNsst:
    nsst_id = _get_str(m, "id", doc, "ran_nsst", required=True)
    path = f"ran_nsst[{nsst_id}]"
    snssai = None
    if m.get("snssai") is not None:
        snssai = parse_snssai(m["snssai"], doc, f"{path}.snssai")
    profile = None
    if m.get("slice_profile") is not None:
        profile = _parse_slice_profile(m["slice_profile"], snssai, doc, f"{path}.slice_profile")
    return RanNsst(
        id=nsst_id,
        snssai=snssai,
        slice_profile=profile,
        fcaps=_parse_fcaps(m.get("fcaps"), doc, f"{path}.fcaps"),
        gnb_nsd_ref=_get_str(m, "gnb_nsd_ref", doc, path),
    )


def _parse_scale_level(obj: Any, doc: str, path: str) -> ScaleLevel:
    m = _as_map(obj, doc, path)
    sl_id = _get_str(m, "id", doc, path, required=True)
    constituents = []
    for i, c in enumerate(_as_list(m.get("constituents", []), doc, f"{path}.constituents")):
        cm = _as_map(c, doc, f"{path}.constituents[{i}]")
        constituents.append(ConstituentSpec(
            constituent_ref=_get_str(cm, "constituent_ref", doc, f"{path}.constituents[{i}]", required=True),
            instance_count=_get_int(cm, "instance_count", doc, f"{path}.constituents[{i}]", required=True),
            flavour_ref=_get_str(cm, "flavour_ref", doc, f"{path}.constituents[{i}]", required=True),
        ))
    return ScaleLevel(id=sl_id, constituents=tuple(constituents))


def _parse_scaling_aspect(obj: Any, doc: str, path: str) -> ScalingAspect:
    m = _as_map(obj, doc, path)
    sa_id = _get_str(m, "id", doc, path, required=True)
    sls = tuple(_parse_scale_level(sl, doc, f"{path}.sls[{i}]")
                for i, sl in enumerate(_as_list(m.get("sls", []), doc, f"{path}.sls")))
    return ScalingAspect(id=sa_id, sls=sls)


def _parse_gnb_nsd(m: Mapping[str, Any], doc: str) -> GnbNsd:
    nsd_id = _get_str(m, "id", doc, "gnb_nsd", required=True)
    path = f"gnb_nsd[{nsd_id}]"
    sa_cu = None
    if m.get("sa_cu") is not None:
        sa_cu = _parse_scaling_aspect(m["sa_cu"], doc, f"{path}.sa_cu")
    sa_du = None
    if m.get("sa_du") is not None:
        sa_du = _parse_scaling_aspect(m["sa_du"], doc, f"{path}.sa_du")
    ils = []
    for i, il in enumerate(_as_list(m.get("ils", []), doc, f"{path}.ils")):
        ilm = _as_map(il, doc, f"{path}.ils[{i}]")
        ils.append(InstantiationLevel(
            id=_get_str(ilm, "id", doc, f"{path}.ils[{i}]", required=True),
            cu_sl=_get_str(ilm, "cu_sl", doc, f"{path}.ils[{i}]"),
            du_sl=_get_str(ilm, "du_sl", doc, f"{path}.ils[{i}]"),
        ))
    ru_refs = tuple(
        r if isinstance(r, str) else _bad_ref(doc, f"{path}.ru_pnfd_refs")
        for r in _as_list(m.get("ru_pnfd_refs", []), doc, f"{path}.ru_pnfd_refs")
    )
    cu_id = _get_str(m, "cu_id", doc, path) or f"{nsd_id}-cu"
    return GnbNsd(
        id=nsd_id,
        cu_id=cu_id,
        sa_cu=sa_cu,
        sa_du=sa_du,
        ils=tuple(ils),
        cu_vnfd_ref=_get_str(m, "cu_vnfd_ref", doc, path),
        du_vnfd_ref=_get_str(m, "du_vnfd_ref", doc, path),
        ru_pnfd_refs=ru_refs,
        aux_nsd_ref=_get_str(m, "aux_nsd_ref", doc, path),
    )


def _bad_ref(doc: str, path: str):
    raise DescriptorSyntaxError(doc, f"{path}: references must be strings")


def _parse_vnfd(m: Mapping[str, Any], doc: str) -> Vnfd:
    vnfd_id = _get_str(m, "id", doc, "vnfd", required=True)
    path = f"vnfd[{vnfd_id}]"
    flavours = []
    for i, fl in enumerate(_as_list(m.get("ils", []), doc, f"{path}.ils")):
        flm = _as_map(fl, doc, f"{path}.ils[{i}]")
        flavours.append(VmFlavour(
            id=_get_str(flm, "id", doc, f"{path}.ils[{i}]", required=True),
            vcpus=_get_int(flm, "vcpus", doc, f"{path}.ils[{i}]", required=True),
            cpu_ghz=_get_num(flm, "cpu_ghz", doc, f"{path}.ils[{i}]", required=True),
            mem_gb=_get_num(flm, "mem_gb", doc, f"{path}.ils[{i}]", required=True),
        ))
    return Vnfd(
        id=vnfd_id,
        shared=_get_bool(m, "shared", doc, path, default=False),
        ils=tuple(flavours),
    )


def _parse_pnfd(m: Mapping[str, Any], doc: str) -> Pnfd:
    pnfd_id = _get_str(m, "id", doc, "pnfd", required=True)
    path = f"pnfd[{pnfd_id}]"
    cps = []
    for i, cp in enumerate(_as_list(m.get("cps", []), doc, f"{path}.cps")):
        cpm = _as_map(cp, doc, f"{path}.cps[{i}]")
        cps.append(ConnectivityPoint(
            name=_get_str(cpm, "name", doc, f"{path}.cps[{i}]", required=True),
            gbps=_get_num(cpm, "gbps", doc, f"{path}.cps[{i}]", required=True),
        ))
    return Pnfd(id=pnfd_id, cps=tuple(cps))


def _parse_aux_nsd(m: Mapping[str, Any], doc: str) -> AuxiliaryNsd:
    aux_id = _get_str(m, "id", doc, "aux_nsd", required=True)
    path = f"aux_nsd[{aux_id}]"
    ils = []
    for i, il in enumerate(_as_list(m.get("ils", []), doc, f"{path}.ils")):
        ilm = _as_map(il, doc, f"{path}.ils[{i}]")
        ils.append(AuxIl(
            id=_get_str(ilm, "id", doc, f"{path}.ils[{i}]", required=True),
            du_count=_get_int(ilm, "du_count", doc, f"{path}.ils[{i}]", required=True),
            du_il_ref=_get_str(ilm, "du_il_ref", doc, f"{path}.ils[{i}]", required=True),
        ))
    return AuxiliaryNsd(id=aux_id, ils=tuple(ils))


_PARSERS = {
    "ran_nsst": _parse_nsst,
    "gnb_nsd": _parse_gnb_nsd,
    "vnfd": _parse_vnfd,
    "pnfd": _parse_pnfd,
    "aux_nsd": _parse_aux_nsd,
}


def _load_document(text: str, doc: str) -> Mapping[str, Any]:
    try:
        loaded = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        line = None
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            line = mark.line + 1
        raise DescriptorSyntaxError(doc, f"invalid YAML: {exc}", line=line) from exc
    if loaded is None:
        return {}
    return _as_map(loaded, doc, "document")


def parse_descriptor_set(documents: Iterable[str | Mapping[str, Any]],
                         names: Sequence[str] | None = None) -> DescriptorSet:
    """Parse descriptor documents (YAML/JSON text or pre-loaded mappings)
    into a DescriptorSet.

    Raises DescriptorSyntaxError on malformed input and DuplicateIdError
    when two descriptors (of any kind) share an id. Invariants beyond
    shape are left to ``validate``.
    """
    nssts: dict[str, RanNsst] = {}
    gnb_nsds: dict[str, GnbNsd] = {}
    vnfds: dict[str, Vnfd] = {}
    pnfds: dict[str, Pnfd] = {}
    aux_nsds: dict[str, AuxiliaryNsd] = {}
    buckets = {"ran_nsst": nssts, "gnb_nsd": gnb_nsds, "vnfd": vnfds,
               "pnfd": pnfds, "aux_nsd": aux_nsds}
    seen_ids: set[str] = set()

    docs = list(documents)
    for i, raw in enumerate(docs):
        doc = names[i] if names is not None else f"doc-{i}"
        content = _load_document(raw, doc) if isinstance(raw, str) else _as_map(raw, doc, "document")
        for kind, value in content.items():
            if kind not in KINDS:
                raise DescriptorSyntaxError(doc, f"unknown descriptor kind {kind!r}")
            entries = value if isinstance(value, list) else [value]
            for entry in entries:
                m = _as_map(entry, doc, kind)
                parsed = _PARSERS[kind](m, doc)
                if parsed.id in seen_ids:
                    raise DuplicateIdError(parsed.id)
                seen_ids.add(parsed.id)
                buckets[kind][parsed.id] = parsed

    return DescriptorSet(nssts=nssts, gnb_nsds=gnb_nsds, vnfds=vnfds,
                         pnfds=pnfds, aux_nsds=aux_nsds)


def _snssai_to_dict(s: Snssai) -> dict[str, Any]:
    out: dict[str, Any] = {"service_type": s.service_type.value}
    if s.subtype is not None:
        out["subtype"] = s.subtype
    return out


def _nsst_to_dict(n: RanNsst) -> dict[str, Any]:
    out: dict[str, Any] = {"id": n.id}
    if n.snssai is not None:
        out["snssai"] = _snssai_to_dict(n.snssai)
    if n.slice_profile is not None:
        p = n.slice_profile
        out["slice_profile"] = {
            "pdcp_duplication": p.pdcp_duplication,
            "pdcp_ciphering": p.pdcp_ciphering,
            "rlc_mode": p.rlc_mode.value,
            "rlc_segmentation": p.rlc_segmentation,
            "numerology_index": p.numerology_index,
            "harq_target": p.harq_target.value,
            "dl_ul_symbol_ratio": p.dl_ul_symbol_ratio,
        }
    if n.fcaps:
        out["fcaps"] = dict(n.fcaps)
    if n.gnb_nsd_ref is not None:
        out["gnb_nsd_ref"] = n.gnb_nsd_ref
    return out


def _sa_to_dict(sa: ScalingAspect) -> dict[str, Any]:
    return {
        "id": sa.id,
        "sls": [
            {
                "id": sl.id,
                "constituents": [
                    {"constituent_ref": c.constituent_ref,
                     "instance_count": c.instance_count,
                     "flavour_ref": c.flavour_ref}
                    for c in sl.constituents
                ],
            }
            for sl in sa.sls
        ],
    }


def _nsd_to_dict(n: GnbNsd) -> dict[str, Any]:
    out: dict[str, Any] = {"id": n.id, "cu_id": n.cu_id}
    if n.sa_cu is not None:
        out["sa_cu"] = _sa_to_dict(n.sa_cu)
    if n.sa_du is not None:
        out["sa_du"] = _sa_to_dict(n.sa_du)
    ils = []
    for il in n.ils:
        ild: dict[str, Any] = {"id": il.id}
        if il.cu_sl is not None:
            ild["cu_sl"] = il.cu_sl
        if il.du_sl is not None:
            ild["du_sl"] = il.du_sl
        ils.append(ild)
    out["ils"] = ils
    if n.cu_vnfd_ref is not None:
        out["cu_vnfd_ref"] = n.cu_vnfd_ref
    if n.du_vnfd_ref is not None:
        out["du_vnfd_ref"] = n.du_vnfd_ref
    if n.ru_pnfd_refs:
        out["ru_pnfd_refs"] = list(n.ru_pnfd_refs)
    if n.aux_nsd_ref is not None:
        out["aux_nsd_ref"] = n.aux_nsd_ref
    return out


def _vnfd_to_dict(v: Vnfd) -> dict[str, Any]:
    return {
        "id": v.id,
        "shared": v.shared,
        "ils": [{"id": fl.id, "vcpus": fl.vcpus, "cpu_ghz": fl.cpu_ghz, "mem_gb": fl.mem_gb}
                for fl in v.ils],
    }


def _pnfd_to_dict(p: Pnfd) -> dict[str, Any]:
    return {"id": p.id, "cps": [{"name": cp.name, "gbps": cp.gbps} for cp in p.cps]}


def _aux_to_dict(a: AuxiliaryNsd) -> dict[str, Any]:
    return {"id": a.id,
            "ils": [{"id": il.id, "du_count": il.du_count, "du_il_ref": il.du_il_ref}
                    for il in a.ils]}


def serialize_descriptor_set(ds: DescriptorSet) -> dict[str, Any]:
    """Canonical single-document form of a DescriptorSet: kinds in fixed
    order, descriptors sorted by id, optional absent fields omitted.
    ``parse_descriptor_set([serialize_descriptor_set(ds)])`` equals ds."""
    out: dict[str, Any] = {}
    if ds.nssts:
        out["ran_nsst"] = [_nsst_to_dict(ds.nssts[k]) for k in sorted(ds.nssts)]
    if ds.gnb_nsds:
        out["gnb_nsd"] = [_nsd_to_dict(ds.gnb_nsds[k]) for k in sorted(ds.gnb_nsds)]
    if ds.vnfds:
        out["vnfd"] = [_vnfd_to_dict(ds.vnfds[k]) for k in sorted(ds.vnfds)]
    if ds.pnfds:
        out["pnfd"] = [_pnfd_to_dict(ds.pnfds[k]) for k in sorted(ds.pnfds)]
    if ds.aux_nsds:
        out["aux_nsd"] = [_aux_to_dict(ds.aux_nsds[k]) for k in sorted(ds.aux_nsds)]
    return out
