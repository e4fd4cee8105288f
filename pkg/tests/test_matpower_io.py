import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admitcert.matpower_io import (ConversionError, ParseError, case_name, load_network,
                                   network_to_json, parse_case, to_network)
from admitcert.netmodel import build_admittance
from admitcert.oracle import PROFILES, random_network

from conftest import case_path

TWO_BUS = """function mpc = tiny
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t230\t1\t1.1\t0.9;
\t2\t1\t50\t10\t0\t{bs}\t1\t1\t0\t230\t1\t1.1\t0.9;
];
% comment with [brackets] and letters
mpc.branch = [
\t1\t2\t{r}\t{x}\t{b}\t0\t0\t0\t{tap}\t{shift}\t1\t-360\t360;
];
"""


def two_bus(r=0.01, x=0.1, b=0.0, tap=0.0, shift=0.0, bs=0.0):
    return TWO_BUS.format(r=r, x=x, b=b, tap=tap, shift=shift, bs=bs)


def test_minimal_case():
    raw = parse_case(two_bus(), "mcase")
    assert raw.buses.shape[0] == 2 and raw.branches.shape[0] == 1 and raw.base_mva == 100


def test_case14_counts():
    net = load_network(case_path("case14_ieee"))
    assert (net.n_nodes, net.n_branches) == (14, 20)


def test_missing_branch_section():
    text = two_bus().split("mpc.branch")[0]
    with pytest.raises(ParseError, match="branch"):
        parse_case(text, "mcase")


def test_non_numeric_token_located():
    text = two_bus().replace("\t230\t1\t1.1", "\tfoo\t1\t1.1", 1)
    with pytest.raises(ParseError) as exc:
        parse_case(text, "mcase")
    assert exc.value.line == 4 and exc.value.column is not None


def test_pure_reactor():
    net = to_network(parse_case(two_bus(r=0, x=0.1), "mcase"))
    b = net.branches[0]
    assert b.y == pytest.approx(-10j) and b.tap == 1


def test_zero_impedance_rejected():
    with pytest.raises(ConversionError):
        to_network(parse_case(two_bus(r=0, x=0), "mcase"))


def test_out_of_service_dropped_and_bus_shunt():
    text = two_bus(bs=19.0).replace("360\t360;", "360\t360;").replace("\t1\t-360", "\t0\t-360")
    net = to_network(parse_case(text, "mcase"))
    assert net.n_branches == 0
    assert net.shunt_vector[1] == pytest.approx(0.19j)


def _pi_model(r, x, b, tau, theta):
    ys = 1 / complex(r, x)
    return np.array([[(ys + 1j * b / 2) / tau**2, -ys / (tau * cmath.exp(-1j * theta))],
                     [-ys / (tau * cmath.exp(1j * theta)), ys + 1j * b / 2]])


def test_pi_model_example():
    theta = math.radians(30)
    net = to_network(parse_case(two_bus(r=0.01, x=0.1, tap=1.05, shift=30), "mcase"))
    np.testing.assert_allclose(build_admittance(net).toarray(), _pi_model(0.01, 0.1, 0, 1.05, theta),
                               rtol=1e-13)


@settings(max_examples=100, deadline=None)
@given(r=st.floats(0.0, 0.1), x=st.floats(0.01, 0.5), b=st.floats(0.0, 0.5),
       tau=st.floats(0.9, 1.1), shift=st.floats(-30, 30))
def test_pi_model_property(r, x, b, tau, shift):
    net = to_network(parse_case(two_bus(r=repr(r), x=repr(x), b=repr(b), tap=repr(tau), shift=repr(shift)),
                                "mcase"))
    ref = _pi_model(r, x, b, tau, math.radians(shift))
    np.testing.assert_allclose(build_admittance(net).toarray(), ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("profile", PROFILES)
def test_json_round_trip(profile):
    net = random_network(3, profile)
    text = network_to_json(net)
    back = to_network(parse_case(text.encode(), "json"))
    assert back == net
    assert network_to_json(back) == text


def test_json_errors():
    with pytest.raises(ParseError):
        parse_case("{not json", "json")
    with pytest.raises(ParseError):
        parse_case(json.dumps({"branches": []}), "json")
    with pytest.raises(ConversionError):
        parse_case(json.dumps({"n_nodes": 1, "branches": [{"from": 0, "to": 1, "y": [1, 0]}]}), "json")


def test_bus_ids_kept():
    net = load_network(case_path("case118_ieee"))
    assert net.bus_ids[0] == 1 and len(set(net.bus_ids)) == 118
    assert case_name(case_path("case118_ieee")) == "case118_ieee"
