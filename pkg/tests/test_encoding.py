import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from encsec.encoding import Encoder, SubgroupEncoder, embed, unembed
from encsec.errors import DomainError, EncodingOverflow

SPACE = (1 << 61) - 1


def test_encoder_fixed_values():
    e = Encoder(1000, 4)
    assert e.encode(2.5) == 10
    assert e.encode(-2.5) == 990
    assert e.decode(990) == -2.5
    # half-to-even at the rounding boundary
    assert e.encode(0.125) == 0 and e.encode(0.375) == 2


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_encoder_roundtrip_within_half_ulp(x):
    e = Encoder(SPACE, 1 << 16)
    assert abs(e.decode(e.encode(x)) - x) <= 0.5 / e.scale


@given(st.floats(-1e5, 1e5, allow_nan=False), st.floats(-1e5, 1e5, allow_nan=False))
def test_encoder_additive_sign_convention(x, y):
    e = Encoder(SPACE, 1 << 10)
    s = (e.encode(x) + e.encode(y)) % SPACE
    assert abs(e.decode(s) - (x + y)) <= 1.0 / e.scale


def test_encoder_overflow_and_domain():
    e = Encoder(1000, 4)
    for x in (e.bound, -e.bound, math.inf, math.nan):
        with pytest.raises(EncodingOverflow):
            e.encode(x)
    with pytest.raises(DomainError):
        e.decode(1000)
    with pytest.raises(DomainError):
        Encoder(1000, 3)
    with pytest.raises(DomainError):
        Encoder(4, 4)


def test_embed_exhaustive_p23():
    p, q = 23, 11
    images = [embed(v, p) for v in range(1, q + 1)]
    subgroup = {pow(4, k, p) for k in range(q)}
    assert set(images) == subgroup and len(set(images)) == q
    for v in range(1, q + 1):
        assert unembed(embed(v, p), p) == v
    with pytest.raises(EncodingOverflow):
        embed(12, p)
    with pytest.raises(DomainError):
        unembed(5, p)  # 5 is a non-residue mod 23


@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_embed_multiplicative(a, b):
    p = 4294967087  # 2 * 2147483543 + 1
    q = (p - 1) // 2
    if a * b > q:
        return
    assert embed(a, p) * embed(b, p) % p == embed(a * b, p)


def test_subgroup_encoder_products():
    enc = SubgroupEncoder(4294967087, 1 << 8)
    w = enc.encode(2.0) * enc.encode(1.5) % enc.p
    assert enc.decode(w, factors=2) == 3.0
    for bad in (0.0, -1.0, 1e-4):
        with pytest.raises(EncodingOverflow):
            enc.encode(bad)
