"""Core domain types: lifecycle steps, the 14-alert taxonomy, step mappings, alerts.

The five detectable lifecycle steps (A through E) cover point of entry,
C&C communication, privilege escalation, asset/data discovery, and data
exfiltration.  Each of the fourteen alert types maps to exactly one step
under a configurable ``StepMapping``; the canonical mapping ships as the
default and alternative mappings can be loaded from a key-value file.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigError, TaxonomyError


class AptStep(enum.Enum):
    """Lifecycle step of a multi-stage campaign; value is the lifecycle index."""

    A = 2
    B = 3
    C = 4
    D = 5
    E = 6

    @property
    def lifecycle_index(self) -> int:
        return self.value

    @property
    def description(self) -> str:
        return _STEP_DESCRIPTIONS[self]

    @classmethod
    def from_letter(cls, letter: str) -> "AptStep":
        try:
            return cls[letter]
        except KeyError:
            raise TaxonomyError(f"unknown lifecycle step {letter!r}") from None


_STEP_DESCRIPTIONS = {
    AptStep.A: "point of entry",
    AptStep.B: "command and control communication",
    AptStep.C: "privilege escalation",
    AptStep.D: "asset and data discovery",
    AptStep.E: "data exfiltration",
}


class Protocol(enum.Enum):
    """Coarse protocol class derived from the destination port."""

    HTTP = "HTTP"
    DNS = "DNS"
    HTTPS = "HTTPS"
    TCP_OTHER = "TCP_OTHER"

    @classmethod
    def from_port(cls, port: int) -> "Protocol":
        return _PORT_PROTOCOLS.get(port, cls.TCP_OTHER)


_PORT_PROTOCOLS = {80: Protocol.HTTP, 53: Protocol.DNS, 443: Protocol.HTTPS}


class AlertType(enum.Enum):
    """The fourteen detectable alert types."""

    DISGUISED_EXE = "disguised_exe_alert"
    HASH = "hash_alert"
    DOMAIN = "domain_alert"
    IP = "ip_alert"
    SSL = "ssl_alert"
    DOMAIN_FLUX = "domain_flux_alert"
    SCAN = "scan_alert"
    TOR = "tor_alert"
    PHISHING = "phishing_alert"
    MALWARE_DOWNLOAD = "malware_download_alert"
    KERNEL_EXPLOIT = "kernel_exploit_attempt_alert"
    MALICIOUS_LINK_CLICK = "malicious_link_click_alert"
    DATA_EXFILTRATION = "data_exfiltration_alert"
    NETWORK_INTRUSION = "network_intrusion_alert"

    @property
    def severity(self) -> int:
        return _SEVERITIES[self]

    @property
    def default_protocol(self) -> Protocol:
        return _DEFAULT_PROTOCOLS[self]

    @classmethod
    def from_name(cls, name: str) -> "AlertType":
        try:
            return _TYPES_BY_NAME[name]
        except KeyError:
            raise TaxonomyError(f"unknown alert type {name!r}") from None


_TYPES_BY_NAME = {t.value: t for t in AlertType}

# Static per-type severity on a 1..5 scale, monotone by lifecycle stage:
# exfiltration and kernel exploitation top the scale, scanning is the floor.
_SEVERITIES = {
    AlertType.DISGUISED_EXE: 2,
    AlertType.HASH: 2,
    AlertType.DOMAIN: 2,
    AlertType.IP: 3,
    AlertType.SSL: 3,
    AlertType.DOMAIN_FLUX: 3,
    AlertType.SCAN: 1,
    AlertType.TOR: 4,
    AlertType.PHISHING: 2,
    AlertType.MALWARE_DOWNLOAD: 2,
    AlertType.KERNEL_EXPLOIT: 5,
    AlertType.MALICIOUS_LINK_CLICK: 2,
    AlertType.DATA_EXFILTRATION: 5,
    AlertType.NETWORK_INTRUSION: 4,
}

_DEFAULT_PROTOCOLS = {
    AlertType.DISGUISED_EXE: Protocol.HTTP,
    AlertType.HASH: Protocol.HTTP,
    AlertType.DOMAIN: Protocol.DNS,
    AlertType.IP: Protocol.HTTPS,
    AlertType.SSL: Protocol.HTTPS,
    AlertType.DOMAIN_FLUX: Protocol.DNS,
    AlertType.SCAN: Protocol.TCP_OTHER,
    AlertType.TOR: Protocol.HTTPS,
    AlertType.PHISHING: Protocol.DNS,
    AlertType.MALWARE_DOWNLOAD: Protocol.HTTP,
    AlertType.KERNEL_EXPLOIT: Protocol.HTTPS,
    AlertType.MALICIOUS_LINK_CLICK: Protocol.HTTP,
    AlertType.DATA_EXFILTRATION: Protocol.HTTPS,
    AlertType.NETWORK_INTRUSION: Protocol.TCP_OTHER,
}


@dataclass(frozen=True)
class StepMapping:
    """Total map from alert type to lifecycle step.

    ``entries`` must cover all fourteen types; construct through
    ``make_step_mapping`` so totality is checked once, up front.
    """

    name: str
    entries: Mapping[AlertType, AptStep]

    def step_of(self, alert_type: AlertType | str) -> AptStep:
        if isinstance(alert_type, str):
            alert_type = AlertType.from_name(alert_type)
        return self.entries[alert_type]

    def types_for(self, step: AptStep) -> tuple[AlertType, ...]:
        order = list(AlertType)
        return tuple(t for t in order if self.entries[t] is step)

    def with_overrides(self, name: str, overrides: Mapping[AlertType, AptStep]) -> "StepMapping":
        merged = dict(self.entries)
        merged.update(overrides)
        return make_step_mapping(name, merged)


def make_step_mapping(name: str, entries: Mapping[AlertType, AptStep]) -> StepMapping:
    """Validate totality and freeze a step mapping."""
    missing = [t.value for t in AlertType if t not in entries]
    if missing:
        raise ConfigError(f"step mapping {name!r} is not total; missing {missing}")
    extra = [k for k in entries if not isinstance(k, AlertType)]
    if extra:
        raise ConfigError(f"step mapping {name!r} has non-taxonomy keys {extra}")
    return StepMapping(name=name, entries=dict(entries))


def step_of(alert_type: AlertType | str, mapping: StepMapping) -> AptStep:
    """Resolve an alert type to its lifecycle step under ``mapping``."""
    return mapping.step_of(alert_type)


_CANONICAL_ENTRIES = {
    AlertType.DISGUISED_EXE: AptStep.A,
    AlertType.HASH: AptStep.A,
    AlertType.DOMAIN: AptStep.A,
    AlertType.PHISHING: AptStep.A,
    AlertType.MALICIOUS_LINK_CLICK: AptStep.A,
    AlertType.MALWARE_DOWNLOAD: AptStep.A,
    AlertType.IP: AptStep.B,
    AlertType.SSL: AptStep.B,
    AlertType.DOMAIN_FLUX: AptStep.B,
    AlertType.KERNEL_EXPLOIT: AptStep.C,
    AlertType.NETWORK_INTRUSION: AptStep.C,
    AlertType.SCAN: AptStep.D,
    AlertType.TOR: AptStep.E,
    AlertType.DATA_EXFILTRATION: AptStep.E,
}

_CANONICAL: StepMapping | None = None


def canonical_mapping() -> StepMapping:
    """The default alert-type to step partition covering all five steps."""
    global _CANONICAL
    if _CANONICAL is None:
        _CANONICAL = make_step_mapping("canonical", _CANONICAL_ENTRIES)
    return _CANONICAL


def load_mapping_file(path: str | Path, name: str | None = None) -> StepMapping:
    """Load a step mapping from a JSON object of alert-type name to step letter."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read step mapping file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"step mapping file {path} must hold a JSON object")
    entries = {}
    for type_name, letter in raw.items():
        entries[AlertType.from_name(type_name)] = AptStep.from_letter(str(letter))
    return make_step_mapping(name or path.stem, entries)


@dataclass(frozen=True, slots=True)
class ScenarioTag:
    """Ground-truth marker: which chain shape an alert belongs to, and where."""

    shape_id: str
    position: int

    def __str__(self) -> str:
        return f"{self.shape_id}:{self.position}"

    @classmethod
    def parse(cls, text: str) -> "ScenarioTag":
        shape_id, _, pos = text.partition(":")
        if not shape_id or not pos.isdigit():
            raise TaxonomyError(f"malformed scenario tag {text!r}")
        return cls(shape_id=shape_id, position=int(pos))


DYNAMIC_PORT_RANGE = (49152, 65535)


@dataclass(frozen=True, slots=True)
class Alert:
    """One synthetic security event.

    Timestamps are UTC epoch seconds.  ``infected_host`` always equals the
    source address; ``scanned_host`` is populated for scan alerts only and
    mirrors the destination.  ``campaign_id`` is present exactly when the
    alert belongs to a generated attack chain.
    """

    alert_id: int
    alert_type: AlertType
    timestamp: int
    src_ip: str
    src_port: int
    dest_ip: str
    dest_port: int
    infected_host: str
    scanned_host: str | None
    step: AptStep
    campaign_id: str | None
    ground_truth: ScenarioTag | None

    def __post_init__(self) -> None:
        if not (0 <= self.src_port <= 65535 and 0 <= self.dest_port <= 65535):
            raise ValueError(f"alert {self.alert_id}: port out of range")
        if self.infected_host != self.src_ip:
            raise ValueError(f"alert {self.alert_id}: infected_host must equal src_ip")
        if self.alert_type is AlertType.SCAN:
            if self.scanned_host != self.dest_ip:
                raise ValueError(f"alert {self.alert_id}: scan alert needs scanned_host == dest_ip")
        elif self.scanned_host is not None:
            raise ValueError(f"alert {self.alert_id}: scanned_host is exclusive to scan alerts")
        if (self.campaign_id is None) != (self.ground_truth is None):
            raise ValueError(f"alert {self.alert_id}: campaign_id present iff scenario ground truth")

    @property
    def protocol(self) -> Protocol:
        return Protocol.from_port(self.dest_port)

    @property
    def is_noise(self) -> bool:
        return self.ground_truth is None


def make_alert(
    alert_id: int,
    alert_type: AlertType,
    timestamp: int,
    src_ip: str,
    src_port: int,
    dest_ip: str,
    dest_port: int,
    mapping: StepMapping,
    campaign_id: str | None = None,
    ground_truth: ScenarioTag | None = None,
) -> Alert:
    """Build an alert with the derived fields filled in."""
    return Alert(
        alert_id=alert_id,
        alert_type=alert_type,
        timestamp=timestamp,
        src_ip=src_ip,
        src_port=src_port,
        dest_ip=dest_ip,
        dest_port=dest_port,
        infected_host=src_ip,
        scanned_host=dest_ip if alert_type is AlertType.SCAN else None,
        step=mapping.step_of(alert_type),
        campaign_id=campaign_id,
        ground_truth=ground_truth,
    )


def ts_to_iso(ts: int) -> str:
    """Render epoch seconds as a compact UTC ISO-8601 string."""
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def iso_to_ts(text: str) -> int:
    """Parse the ISO-8601 form produced by ``ts_to_iso``."""
    try:
        dt = datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
    except ValueError:
        raise TaxonomyError(f"malformed timestamp {text!r}") from None
    return int(dt.timestamp())


def all_alert_type_names() -> tuple[str, ...]:
    return tuple(t.value for t in AlertType)


def partition_is_total(mapping: StepMapping, steps: Iterable[AptStep] = AptStep) -> bool:
    """True when every given step owns at least one alert type."""
    return all(mapping.types_for(s) for s in steps)
