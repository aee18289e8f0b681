import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicmcap.bicm import (
    bicm_mi,
    bit_cost,
    bit_mutual_informations,
    brgc_permutation,
    check_bits,
    conditional_entropy_bit,
    effective_bit_channel,
    effective_pair_channel,
    kron_pmf,
    label_bits,
)
from bicmcap.dmc import entropy, mutual_information, output_pmf

from .helpers import product_bsc, random_channel

bit_prob = st.floats(0.0, 1.0)


def h2(e):
    return -e * np.log2(e) - (1 - e) * np.log2(1 - e)


def _direct_bit_channel(H, p0s, i):
    # brute force: q_b = sum over labels with bit i = b of H[:, x] * prod_{j != i} p^j
    m = len(p0s)
    labels = label_bits(m)
    out = np.zeros((H.shape[0], 2))
    for x, lab in enumerate(labels):
        wt = np.prod([p0s[j] if lab[j] == 0 else 1 - p0s[j] for j in range(m) if j != i])
        out[:, lab[i]] += wt * H[:, x]
    return out


# -- Kronecker pmf and labels -------------------------------------------------


def test_kron_pmf_examples():
    np.testing.assert_allclose(kron_pmf([0.5, 0.5]), 0.25)
    np.testing.assert_allclose(kron_pmf([1.0, 0.3]), [0.3, 0.7, 0.0, 0.0])
    # label 010 sits at 0-based index 2
    assert kron_pmf([0.5, 0.4, 0.9])[2] == pytest.approx(0.27, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(bit_prob, min_size=1, max_size=5))
def test_kron_pmf_is_a_pmf_with_correct_marginals(p0s):
    p = kron_pmf(p0s)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    labels = label_bits(len(p0s))
    for i, q in enumerate(p0s):
        assert p[labels[:, i] == 0].sum() == pytest.approx(q, abs=1e-12)


def test_label_bits_msb_first():
    np.testing.assert_array_equal(label_bits(2), [[0, 0], [0, 1], [1, 0], [1, 1]])


def test_brgc_examples():
    np.testing.assert_array_equal(brgc_permutation(1), [0, 1])
    np.testing.assert_array_equal(brgc_permutation(2), [0, 1, 3, 2])
    np.testing.assert_array_equal(brgc_permutation(3), [0, 1, 3, 2, 6, 7, 5, 4])


@pytest.mark.parametrize("m", range(1, 7))
def test_brgc_is_gray_permutation(m):
    g = brgc_permutation(m)
    assert g[0] == 0
    assert sorted(g) == list(range(2**m))
    flips = np.array([bin(a ^ b).count("1") for a, b in zip(g, g[1:])])
    assert np.all(flips == 1)


def test_check_bits_rejects_bad_input():
    with pytest.raises(ValueError):
        check_bits([0.5, 1.2])
    with pytest.raises(ValueError):
        check_bits([0.5], m=2)


# -- effective channels --------------------------------------------------------


def test_effective_bit_channel_single_bit_is_the_channel():
    H = np.array([[0.7, 0.2], [0.3, 0.8]])
    np.testing.assert_array_equal(effective_bit_channel(H, [0.3], 0), H)


def test_effective_bit_channel_identity_example():
    hi = effective_bit_channel(np.eye(4), [0.5, 0.5], 0)
    np.testing.assert_allclose(hi[:, 0], [0.5, 0.5, 0, 0])
    np.testing.assert_allclose(hi[:, 1], [0, 0, 0.5, 0.5])


def test_effective_pair_channel_m2_is_the_channel():
    rng = np.random.default_rng(1)
    H = random_channel(rng, 5, 2)
    np.testing.assert_array_equal(effective_pair_channel(H, [0.3, 0.6], 0, 1), H)


def test_effective_pair_channel_column_order():
    # for (j, i) = (1, 0) the columns are ordered b_1 b_0, i.e. transposed labels
    rng = np.random.default_rng(2)
    H = random_channel(rng, 5, 2)
    np.testing.assert_array_equal(effective_pair_channel(H, [0.3, 0.6], 1, 0), H[:, [0, 2, 1, 3]])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_effective_bit_channel_matches_brute_force(seed, m):
    rng = np.random.default_rng(seed)
    H = random_channel(rng, 6, m)
    p0s = rng.uniform(size=m)
    for i in range(m):
        np.testing.assert_allclose(
            effective_bit_channel(H, p0s, i), _direct_bit_channel(H, p0s, i), atol=1e-13
        )


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_kronecker_consistency(seed, m):
    rng = np.random.default_rng(seed)
    H = random_channel(rng, 7, m)
    p0s = rng.uniform(size=m)
    r = output_pmf(H, kron_pmf(p0s))
    for i in range(m):
        hi = effective_bit_channel(H, p0s, i)
        np.testing.assert_allclose(hi @ [p0s[i], 1 - p0s[i]], r, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4))
def test_pair_channel_marginalizes_to_bit_channel(seed, m):
    rng = np.random.default_rng(seed)
    H = random_channel(rng, 5, m)
    p0s = rng.uniform(size=m)
    for j in range(m):
        for i in range(m):
            if i == j:
                continue
            pair = effective_pair_channel(H, p0s, j, i)
            pj = p0s[j]
            np.testing.assert_allclose(
                pj * pair[:, 0:2] + (1 - pj) * pair[:, 2:4],
                effective_bit_channel(H, p0s, i),
                atol=1e-13,
            )


def test_pair_channel_rejects_equal_positions():
    with pytest.raises(ValueError):
        effective_pair_channel(np.eye(4), [0.5, 0.5], 1, 1)


def test_bit_cost_is_conditional_mean():
    w = np.array([9.0, 1.0, 9.0, 1.0])
    np.testing.assert_allclose(bit_cost(w, [0.5, 0.5], 0), [5.0, 5.0])
    np.testing.assert_allclose(bit_cost(w, [0.5, 0.5], 1), [9.0, 1.0])


# -- conditional entropy and BICM rate ----------------------------------------


def test_conditional_entropy_examples():
    assert conditional_entropy_bit(np.eye(2), 0.3) == 0.0
    assert conditional_entropy_bit(np.full((4, 2), 0.25), 0.7) == pytest.approx(2.0, abs=1e-14)
    hi = np.array([[0.9, 0.2], [0.1, 0.8]])
    # 0.5 h2(0.1) + 0.5 h2(0.2)
    assert conditional_entropy_bit(hi, 0.5) == pytest.approx(0.5954618442383218, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 1))
def test_conditional_entropy_is_affine(seed, a):
    rng = np.random.default_rng(seed)
    hi = random_channel(rng, 6, 1)
    f = lambda q: conditional_entropy_bit(hi, q)  # noqa: E731
    assert f(a) - (a * f(1.0) + (1 - a) * f(0.0)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_bicm_mi_identity_uniform(m):
    assert bicm_mi(np.eye(2**m), np.full(m, 0.5)) == pytest.approx(m, abs=1e-12)


def test_bicm_mi_product_bsc():
    # two decoupled BSC(0.1) bits
    assert bicm_mi(product_bsc(0.1, 2), [0.5, 0.5]) == pytest.approx(2 * (1 - h2(0.1)), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_bicm_mi_degenerate_bits_is_zero(seed, m):
    rng = np.random.default_rng(seed)
    H = random_channel(rng, 6, m)
    assert bicm_mi(H, rng.integers(0, 2, size=m).astype(float)) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_bit_mutual_informations_in_unit_interval(seed, m):
    rng = np.random.default_rng(seed)
    H = random_channel(rng, 8, m)
    terms = bit_mutual_informations(H, rng.uniform(size=m))
    assert np.all(terms >= 0) and np.all(terms <= 1 + 1e-12)


def test_bicm_mi_single_bit_equals_mutual_information():
    rng = np.random.default_rng(9)
    H = random_channel(rng, 5, 1)
    assert bicm_mi(H, [0.3]) == pytest.approx(mutual_information(H, [0.3, 0.7]), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(0, 2), st.floats(0, 1), st.floats(0, 1))
def test_output_entropy_concave_and_conditional_entropies_concave_in_one_bit(seed, m, i, a, b):
    rng = np.random.default_rng(seed)
    i = i % m
    H = random_channel(rng, 6, m)
    p0s = rng.uniform(size=m)

    def with_bit(q):
        p = p0s.copy()
        p[i] = q
        return p

    def hy(q):
        return entropy(output_pmf(H, kron_pmf(with_bit(q))))

    mid = 0.5 * (a + b)
    assert hy(mid) >= 0.5 * (hy(a) + hy(b)) - 1e-10
    for j in range(m):
        if j == i:
            continue

        def hyj(q):
            p = with_bit(q)
            return conditional_entropy_bit(effective_bit_channel(H, p, j), p[j])

        # H(Y | B_j) is concave in p^i, so -H(Y | B_j) is convex
        assert hyj(mid) >= 0.5 * (hyj(a) + hyj(b)) - 1e-10


def test_bicm_mi_dimension_mismatch():
    with pytest.raises(ValueError):
        bicm_mi(np.eye(4), [0.5, 0.5, 0.5])
