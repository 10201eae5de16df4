from fractions import Fraction as F

import pytest

from mumford_heat import (Disc, FundamentalDomain, MoebiusMap, OperatorConfig,
                          RationalFunctionDatum, SchottkyGroup, build_profile)


@pytest.fixture(scope="session")
def tate_group():
    gen = MoebiusMap(9, 0, 0, 1)
    return SchottkyGroup(
        p=3,
        generators=(gen,),
        holes=(Disc(F(0), 0, complement=True), Disc(F(0), -2)),
        outer=Disc(F(0), 0),
    )


@pytest.fixture(scope="session")
def tate_datum():
    return RationalFunctionDatum.tate()


@pytest.fixture(scope="session")
def tate_profile(tate_group, tate_datum):
    return build_profile(tate_datum, tate_group.fundamental_domain(), 2)


@pytest.fixture(scope="session")
def tate_cfg(tate_group, tate_profile):
    return OperatorConfig(group=tate_group, profile=tate_profile,
                          alpha=F(1), alpha_g=F(1), cutoff_len=40)


@pytest.fixture(scope="session")
def genus2_group():
    g1 = MoebiusMap(9, 0, 0, 1)
    g2 = MoebiusMap(17, -16, 8, -7)
    return SchottkyGroup(
        p=3,
        generators=(g1, g2),
        holes=(Disc(F(0), 0, complement=True), Disc(F(2), -1),
               Disc(F(0), -2), Disc(F(1), -2)),
        outer=Disc(F(0), 0),
    )


@pytest.fixture(scope="session")
def genus2_profile(genus2_group):
    return build_profile(RationalFunctionDatum.constant(),
                         genus2_group.fundamental_domain(), 2)


@pytest.fixture(scope="session")
def genus2_cfg(genus2_group, genus2_profile):
    return OperatorConfig(group=genus2_group, profile=genus2_profile,
                          alpha=F(1), alpha_g=F(2), cutoff_len=8)


@pytest.fixture(scope="session")
def ball_domain():
    return FundamentalDomain(Disc(F(0), 0), (), 3)
