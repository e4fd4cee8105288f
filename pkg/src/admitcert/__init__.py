"""Linear-time certification of bus admittance matrix invertibility."""

from .certify import Certificate, Condition, Verdict, certify
from .matpower_io import load_network, parse_case, to_network
from .netmodel import Branch, Network, Shunt, build_admittance, build_incidence, stamp_branch

__all__ = [
    "Branch", "Certificate", "Condition", "Network", "Shunt", "Verdict",
    "build_admittance", "build_incidence", "certify", "load_network",
    "parse_case", "stamp_branch", "to_network",
]
