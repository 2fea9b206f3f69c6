from fractions import Fraction

import pytest

from itempricing import Instance, XoS


def xos_instance(supply, *buyers):
    return Instance(tuple(supply), tuple(XoS(c) for c in buyers))


@pytest.fixture
def two_by_two():
    # Two goods, two XoS buyers; each good has one copy.
    return xos_instance((1, 1), [[4, 1], [1, 1]], [[1, 3]])


def F(x):
    return Fraction(x)
