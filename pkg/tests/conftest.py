import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from corpus import CHAIN, ENZYME, INFLOW, NET_REV, NET_SIPHON  # noqa: E402

from crncert.network import parse_network  # noqa: E402

NETWORKS_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "networks")


@pytest.fixture
def net_rev():
    return parse_network(NET_REV)


@pytest.fixture
def net_siphon():
    return parse_network(NET_SIPHON)


@pytest.fixture
def enzyme():
    return parse_network(ENZYME)


@pytest.fixture
def chain():
    return parse_network(CHAIN)


@pytest.fixture
def inflow():
    return parse_network(INFLOW)


@pytest.fixture
def networks_dir():
    return NETWORKS_DIR
