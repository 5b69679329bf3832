import os
import random

import pytest

from xmodforge import fingrpd


SEED = int(os.environ.get("XMODFORGE_SEED", "20260810"))


@pytest.fixture
def rng():
    return random.Random(SEED)


@pytest.fixture
def pair2():
    return fingrpd.pair_groupoid(["a", "b"])


@pytest.fixture
def c2():
    return fingrpd.cyclic_groupoid(2)


@pytest.fixture
def c3():
    return fingrpd.cyclic_groupoid(3)


@pytest.fixture
def c4():
    return fingrpd.cyclic_groupoid(4)


def s3_groupoid():
    """Symmetric group on 3 letters as a one-object groupoid; elements are
    permutations rendered as compact digit strings."""
    from xmodforge.generators import s3_groupoid as gen_s3
    return gen_s3()


@pytest.fixture
def s3():
    return s3_groupoid()
