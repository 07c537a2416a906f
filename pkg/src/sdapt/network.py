"""Monitored network model: campus space, external space, and special host lists.

Defaults use the documentation ranges so generated traffic can never point at
real hosts.  The blacklist, Tor exit list, and C&C pool are carved out of the
external space deterministically from the run seed.
"""

from __future__ import annotations

import enum
import ipaddress
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError

DEFAULT_CAMPUS_CIDR = "10.20.0.0/16"
DEFAULT_EXTERNAL_CIDRS = ("203.0.113.0/24", "198.51.100.0/24", "192.0.2.0/24")
DEFAULT_BLACKLIST_SIZE = 32
DEFAULT_TOR_EXIT_COUNT = 16
DEFAULT_CNC_COUNT = 8


class IpClass(enum.Enum):
    CAMPUS = "campus"
    EXTERNAL = "external"
    BLACKLIST = "blacklist"
    TOR_EXIT = "tor_exit"
    CNC = "cnc"


@dataclass(frozen=True)
class NetworkEnvironment:
    """Read-only description of the simulated address space."""

    campus: ipaddress.IPv4Network
    external: tuple[ipaddress.IPv4Network, ...]
    ip_blacklist: frozenset[str]
    tor_exit_nodes: frozenset[str]
    cnc_pool: frozenset[str]

    def __post_init__(self) -> None:
        for net in self.external:
            if self.campus.overlaps(net):
                raise ConfigError(f"external network {net} overlaps campus {self.campus}")
        if not self.ip_blacklist:
            raise ConfigError("ip_blacklist must not be empty")
        if not self.tor_exit_nodes:
            raise ConfigError("tor_exit_nodes must not be empty")
        special = [self.ip_blacklist, self.tor_exit_nodes, self.cnc_pool]
        names = ["ip_blacklist", "tor_exit_nodes", "cnc_pool"]
        for i in range(len(special)):
            for j in range(i + 1, len(special)):
                if special[i] & special[j]:
                    raise ConfigError(f"{names[i]} and {names[j]} overlap")
        for name, pool in zip(names, special):
            for ip in pool:
                addr = ipaddress.IPv4Address(ip)
                if addr in self.campus:
                    raise ConfigError(f"{name} entry {ip} lies inside the campus network")
                if not any(addr in net for net in self.external):
                    raise ConfigError(f"{name} entry {ip} lies outside the external space")

    @property
    def campus_host_count(self) -> int:
        # usable host offsets, excluding the all-zeros and all-ones addresses
        return self.campus.num_addresses - 2

    def campus_host(self, offset: int) -> str:
        """Dotted address for a 1-based host offset inside the campus prefix."""
        if not (1 <= offset <= self.campus_host_count):
            raise ConfigError(f"campus host offset {offset} out of range")
        return str(self.campus.network_address + offset)

    def special_addresses(self) -> frozenset[str]:
        return self.ip_blacklist | self.tor_exit_nodes | self.cnc_pool


def classify_ip(ip: str, env: NetworkEnvironment) -> IpClass:
    """Classify an address; special lists take precedence over plain external."""
    if ip in env.ip_blacklist:
        return IpClass.BLACKLIST
    if ip in env.tor_exit_nodes:
        return IpClass.TOR_EXIT
    if ip in env.cnc_pool:
        return IpClass.CNC
    if ipaddress.IPv4Address(ip) in env.campus:
        return IpClass.CAMPUS
    return IpClass.EXTERNAL


def sample_ip(ip_class: IpClass, env: NetworkEnvironment, rng: random.Random) -> str:
    """Draw an address that classifies back to the requested class."""
    if ip_class is IpClass.CAMPUS:
        return env.campus_host(rng.randrange(1, env.campus_host_count + 1))
    if ip_class is IpClass.BLACKLIST:
        return _sample_listed(env.ip_blacklist, "ip_blacklist", rng)
    if ip_class is IpClass.TOR_EXIT:
        return _sample_listed(env.tor_exit_nodes, "tor_exit_nodes", rng)
    if ip_class is IpClass.CNC:
        return _sample_listed(env.cnc_pool, "cnc_pool", rng)
    # plain external: resample around the carved-out special addresses
    special = env.special_addresses()
    for _ in range(64):
        net = env.external[rng.randrange(len(env.external))]
        ip = str(net.network_address + rng.randrange(1, net.num_addresses - 1))
        if ip not in special:
            return ip
    raise ConfigError("external space is saturated by special address lists")


def _sample_listed(pool: frozenset[str], name: str, rng: random.Random) -> str:
    if not pool:
        raise ConfigError(f"cannot sample from empty pool {name}")
    return sorted(pool)[rng.randrange(len(pool))]


def _external_hosts(networks: Sequence[ipaddress.IPv4Network]) -> list[str]:
    hosts: list[str] = []
    for net in networks:
        hosts.extend(str(net.network_address + i) for i in range(1, net.num_addresses - 1))
    return hosts


def default_environment(
    seed: int,
    campus_cidr: str = DEFAULT_CAMPUS_CIDR,
    external_cidrs: Sequence[str] = DEFAULT_EXTERNAL_CIDRS,
    blacklist_size: int = DEFAULT_BLACKLIST_SIZE,
    tor_exit_count: int = DEFAULT_TOR_EXIT_COUNT,
    cnc_count: int = DEFAULT_CNC_COUNT,
) -> NetworkEnvironment:
    """Build the default environment; special lists derive from the seed."""
    try:
        campus = ipaddress.IPv4Network(campus_cidr)
        external = tuple(ipaddress.IPv4Network(c) for c in external_cidrs)
    except ValueError as exc:
        raise ConfigError(f"invalid network prefix: {exc}") from exc
    pool = _external_hosts(external)
    need = blacklist_size + tor_exit_count + cnc_count
    if need > len(pool):
        raise ConfigError(f"external space holds {len(pool)} hosts; {need} special entries requested")
    rng = random.Random(seed ^ 0x5EED_0E17)
    chosen = rng.sample(pool, need)
    return NetworkEnvironment(
        campus=campus,
        external=external,
        ip_blacklist=frozenset(chosen[:blacklist_size]),
        tor_exit_nodes=frozenset(chosen[blacklist_size:blacklist_size + tor_exit_count]),
        cnc_pool=frozenset(chosen[blacklist_size + tor_exit_count:]),
    )


def environment_from_lists(
    campus_cidr: str,
    external_cidrs: Sequence[str],
    ip_blacklist: Iterable[str],
    tor_exit_nodes: Iterable[str],
    cnc_pool: Iterable[str],
) -> NetworkEnvironment:
    """Build an environment from explicit address lists."""
    try:
        campus = ipaddress.IPv4Network(campus_cidr)
        external = tuple(ipaddress.IPv4Network(c) for c in external_cidrs)
    except ValueError as exc:
        raise ConfigError(f"invalid network prefix: {exc}") from exc
    return NetworkEnvironment(
        campus=campus,
        external=external,
        ip_blacklist=frozenset(ip_blacklist),
        tor_exit_nodes=frozenset(tor_exit_nodes),
        cnc_pool=frozenset(cnc_pool),
    )


def read_address_file(path: str | Path) -> list[str]:
    """Read a newline-delimited address list, ignoring blanks and comments."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read address file {path}: {exc}") from exc
    out = []
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out
