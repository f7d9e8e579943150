import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapebandit.core import InvalidParameter, validate_shape
from shapebandit.instances import (
    FAMILIES,
    FAMILY_SHAPE,
    discretize_holder,
    family_size,
    gen_lower_bound_instance,
    gen_random_instance,
    holder_bins,
    random_family_index,
)


class TestLowerBound:
    def test_hypercube_bernoulli(self):
        inst = gen_lower_bound_instance("hypercube", 4, 0.1, index=(1, -1, 1, -1), variant="bernoulli")
        assert inst.means == pytest.approx([0.6, 0.4, 0.6, 0.4])
        assert inst.tau == 0.5

    def test_monotone_step(self):
        inst = gen_lower_bound_instance("monotone_step", 5, 0.2, index=3)
        assert inst.means.tolist() == [0, 0, 0.2, 0.2, 0.2]
        assert inst.tau == pytest.approx(0.1)
        assert validate_shape(inst.means, "monotone")

    def test_concave_ramp(self):
        inst = gen_lower_bound_instance("concave_ramp", 8, 0.1, index=1)
        assert inst.means == pytest.approx([0.05, 0.1, 0.15, 0.2, 0.2, 0.2, 0.2, 0.2])
        assert inst.tau == pytest.approx(0.1)
        assert validate_shape(inst.means, "concave")

    def test_ramp_kink_exact(self):
        for K in (8, 64, 1024):
            for lvl in range(1, K.bit_length() - 1):
                inst = gen_lower_bound_instance("concave_ramp", K, 0.3, index=lvl)
                assert inst.means[2 ** (lvl + 1) - 1] == 2 * 0.3

    @settings(max_examples=300)
    @given(st.sampled_from(FAMILIES), st.integers(2, 200), st.floats(0.01, 0.5), st.integers(0, 10 ** 6),
           st.sampled_from(["gaussian", "bernoulli"]))
    def test_members_pass_their_validator(self, family, K, eps, seed, variant):
        if family == "concave_ramp" and K < 4:
            return
        idx = random_family_index(family, K, np.random.default_rng(seed))
        if family == "concave_ramp" and variant == "bernoulli" and eps > 0.25:
            return  # ramp tops out at 2 eps above the shift
        inst = gen_lower_bound_instance(family, K, eps, 1.0, idx, variant)
        assert validate_shape(inst.means, FAMILY_SHAPE[family])
        if variant == "bernoulli":
            assert 0 <= inst.means.min() and inst.means.max() <= 1

    def test_bad_index(self):
        with pytest.raises(InvalidParameter):
            gen_lower_bound_instance("monotone_step", 5, 0.1, index=6)
        with pytest.raises(InvalidParameter):
            gen_lower_bound_instance("hypercube", 3, 0.1, index=(1, 0, 1))

    def test_family_sizes(self):
        assert family_size("monotone_step", 10) == 10
        assert family_size("concave_ramp", 1024) == 10


class TestRandom:
    @settings(max_examples=300)
    @given(st.sampled_from(["none", "monotone", "unimodal", "concave"]), st.integers(1, 80),
           st.integers(0, 10 ** 6))
    def test_shape_and_determinism(self, shape, K, seed):
        a = gen_random_instance(shape, K, seed)
        assert validate_shape(a.means, shape)
        assert a == gen_random_instance(shape, K, seed)


class TestHolder:
    def test_identity_monotone(self):
        inst = discretize_holder(lambda x: x, 1.0, 100, "monotone")
        assert inst.K == 100
        assert inst.means == pytest.approx([(j - 0.5) / 100 for j in range(1, 101)])

    def test_unstructured_bins(self):
        B = math.exp(10)
        assert holder_bins("unstructured", 1.0, B) == round((B / 10) ** (1 / 3))

    def test_constant(self):
        inst = discretize_holder(lambda x: 0.3, 1.0, 1000, "unimodal")
        for shape in ("none", "monotone", "unimodal", "concave"):
            assert validate_shape(inst.means, shape)

    def test_bad_beta(self):
        with pytest.raises(InvalidParameter):
            holder_bins("monotone", 0.0, 100)
