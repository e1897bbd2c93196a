import mpmath
import numpy as np
import pytest
from hypothesis import settings

from mbverify.mb_model import MBParameterSet

mpmath.mp.dps = 30
settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def mpc(z):
    return mpmath.mpc(z.real, z.imag)


def mp_gamma_product(num, den=(), pre=1):
    """Reference value of pre * prod Γ(num) / prod Γ(den) in extended precision."""
    out = mpmath.mpc(pre)
    for x in num:
        out *= mpmath.gamma(mpc(complex(x)))
    for x in den:
        out *= mpmath.rgamma(mpc(complex(x)))
    return complex(out)


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_complex(rng, n):
    return list(rng.uniform(0.3, 1.2, n) + 1j * rng.uniform(-0.3, 0.3, n))


def random_r(rng, N, nu=0.5, family="RPlus"):
    al, be = random_complex(rng, N + 1), random_complex(rng, N)
    return MBParameterSet(family, N, al, be, sum(al) + sum(be) + nu)
