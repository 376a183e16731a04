import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pureextract.extraction import (
    Projector,
    apply_projection,
    block_flip_projector,
    configuration_projector,
    identity_projector,
    parity_projector,
    projector_from_vectors,
    quench_probability,
)
from pureextract.numerics import reduced_density, schmidt
from pureextract.quench import QuenchSetup, evolved_state, pair_amplitudes
from pureextract.spinbasis import (
    FullBasis,
    LocalSpace,
    PureState,
    QuditBasis,
    RingGeometry,
    TwoFlipBasis,
    contiguous_block,
)
from pureextract.states import supersinglet

RING = RingGeometry(24)
LEFT, RIGHT = tuple(range(1, 13)), tuple(range(13, 25))


def quench_state(t, r1=10, r2=14):
    return evolved_state(QuenchSetup(RING, r1, r2, t))


def test_block_projector_ranks():
    assert block_flip_projector((5,), 24).rank == 1
    assert block_flip_projector(LEFT, 24).rank == 12


def test_parity_projectors_on_two_sites():
    even = parity_projector((1, 2), "even", FullBasis(6))
    odd = parity_projector((1, 2), "odd", FullBasis(6))
    space = even.space
    assert even.rank == odd.rank == 2
    assert {space.configurations()[i] for i in np.flatnonzero(np.diag(even.matrix()))} == {
        (0, 0),
        (1, 1),
    }
    assert np.allclose(even.matrix() + odd.matrix(), np.eye(4))
    with pytest.raises(ValueError):
        parity_projector((1, 2), "mixed")


def test_projector_rejects_non_orthonormal_vectors():
    space = LocalSpace("product", 1, 3)
    with pytest.raises(ValueError):
        Projector((1,), space, np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        Projector((1, 2), space, np.eye(3)[:, :1])


@given(st.integers(1, 4), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_projector_gram_identity(n_region, rank, seed):
    rng = np.random.default_rng(seed)
    basis = FullBasis(6)
    dim = 2**n_region
    rank = min(rank, dim)
    vecs = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    proj = projector_from_vectors(tuple(range(1, n_region + 1)), basis, vecs)
    p = proj.matrix()
    assert proj.rank == rank
    assert np.max(np.abs(p @ p - p)) < 1e-12
    assert np.max(np.abs(p - p.conj().T)) < 1e-12


def test_supersinglet_two_level_projectors():
    state = supersinglet(3)
    basis = state.basis
    keep_23 = lambda c: c[0] in (1, 2)  # levels 2 and 3, stored 0-based
    p_a = configuration_projector((1,), basis, keep_23)
    p_b = configuration_projector((2,), basis, keep_23)
    out = apply_projection(state, p_a, p_b)
    assert abs(out.probability - 1 / 3) < 1e-12
    assert out.is_pure
    assert abs(out.entropy - 1.0) < 1e-12
    assert abs(out.epp - 1 / 3) < 1e-12
    phi_23 = np.zeros((3, 3))
    phi_23[1, 2], phi_23[2, 1] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    assert np.allclose(out.post_state, phi_23)


def test_supersinglet_rank_one_projectors_give_product():
    state = supersinglet(3)
    p_a = configuration_projector((1,), state.basis, lambda c: c[0] == 1)
    p_b = configuration_projector((2,), state.basis, lambda c: c[0] == 2)
    out = apply_projection(state, p_a, p_b)
    assert out.is_pure and out.entropy == 0.0 and out.epp == 0.0
    assert abs(out.probability - 1 / 6) < 1e-12
    assert np.allclose(np.abs(out.post_state), np.eye(3)[1][:, None] * np.eye(3)[2][None, :])


def test_quench_start_is_separable():
    out = apply_projection(
        quench_state(0.0), block_flip_projector(LEFT, 24), block_flip_projector(RIGHT, 24)
    )
    assert out.probability == 1.0 and out.is_pure and out.entropy == 0.0


def test_impossible_branch():
    out = apply_projection(
        quench_state(0.0),
        block_flip_projector((1, 2), 24),
        block_flip_projector((20, 21), 24),
    )
    assert out.impossible and out.probability == 0.0 and out.epp == 0.0


def test_projection_keeps_pairs_across_regions():
    a, b = contiguous_block(24, 6, 5), contiguous_block(24, 18, 5)
    state = quench_state(2.2)
    out = apply_projection(state, block_flip_projector(a, 24), block_flip_projector(b, 24))
    pairs = state.basis.pairs()
    expected = np.array(
        [[state.amplitudes[pairs.index(tuple(sorted((j, k))))] for k in b] for j in a]
    )
    got = out.post_state[1 : 1 + len(a), 1 : 1 + len(b)]
    assert np.count_nonzero(np.abs(out.post_state) > 1e-14) == np.count_nonzero(
        np.abs(expected) > 1e-14
    )
    phase = np.vdot(expected.ravel(), got.ravel())
    phase /= abs(phase)
    assert np.allclose(got * np.linalg.norm(expected), phase * expected, atol=1e-12)


def brute_probability(table, a, b):
    inside = sum(abs(table[j - 1, k - 1]) ** 2 for j in a for k in b)
    total = sum(abs(table[l, m]) ** 2 for l in range(24) for m in range(24))
    return 2 * inside / total


def test_block_probability_matches_pair_sum():
    a, b = contiguous_block(24, 6, 4), contiguous_block(24, 18, 4)
    table = pair_amplitudes(QuenchSetup(RING, 10, 14, 3.0))
    expected = brute_probability(table, a, b)
    state = quench_state(3.0)
    assert abs(quench_probability(table, a, b) - expected) < 1e-12
    assert abs(quench_probability(state, a, b) - expected) < 1e-12
    out = apply_projection(state, block_flip_projector(a, 24), block_flip_projector(b, 24))
    assert abs(out.probability - expected) < 1e-12


def test_adjacent_halves_at_start_give_certainty():
    assert quench_probability(quench_state(0.0), LEFT, RIGHT) == 1.0


def projected_global_state(state, a, b):
    mask = np.array([(j in a and k in b) or (j in b and k in a) for j, k in state.basis.pairs()])
    return PureState.from_unnormalized(state.basis, np.where(mask, state.amplitudes, 0.0))


def test_reduced_state_matches_pair_formula():
    a, b = contiguous_block(24, 6, 6), contiguous_block(24, 18, 6)
    table = pair_amplitudes(QuenchSetup(RING, 10, 14, 4.1))
    state = projected_global_state(quench_state(4.1), a, b)
    rho = reduced_density(state, a).matrix[1 : 1 + len(a), 1 : 1 + len(a)]
    block = table[np.ix_(np.array(a) - 1, np.array(b) - 1)]
    closed = block @ block.conj().T
    closed /= np.trace(closed)
    assert np.max(np.abs(rho - closed)) < 1e-12


def test_schmidt_of_projected_state_matches_reduced_spectrum():
    state = projected_global_state(quench_state(3.0), LEFT, RIGHT)
    coefficients = schmidt(state, LEFT, RIGHT).coefficients
    w = np.sort(np.linalg.eigvalsh(reduced_density(state, LEFT).matrix))[::-1]
    assert np.allclose(coefficients, np.sqrt(np.clip(w[: len(coefficients)], 0, None)), atol=1e-10)


@given(
    st.floats(0.0, 6.0),
    st.integers(1, 12),
    st.integers(1, 12),
    st.integers(1, 24),
    st.integers(0, 11),
)
def test_block_extraction_is_pure(t, size_a, size_b, start, gap):
    a = tuple((start - 1 + i) % 24 + 1 for i in range(size_a))
    b_start = start + size_a + gap
    b = tuple((b_start - 1 + i) % 24 + 1 for i in range(size_b))
    if set(a) & set(b):
        return
    out = apply_projection(quench_state(t), block_flip_projector(a, 24), block_flip_projector(b, 24))
    assert 0.0 <= out.probability <= 1.0 + 1e-12
    if not out.impossible:
        assert out.purity > 1 - 1e-10 and out.is_pure
        assert abs(out.epp - out.entropy * out.probability) < 1e-12


def test_identity_projectors_on_bell_pair():
    amps = np.zeros(8)
    amps[0b000] = amps[0b101] = 1 / math.sqrt(2)
    state = PureState(FullBasis(3), amps)
    out = apply_projection(
        state, identity_projector((1,), state.basis), identity_projector((3,), state.basis)
    )
    assert out.is_pure and abs(out.entropy - 1.0) < 1e-12 and abs(out.probability - 1) < 1e-12


def test_incompatible_projector():
    with pytest.raises(ValueError):
        apply_projection(
            supersinglet(3), block_flip_projector((1,), 24), block_flip_projector((2,), 24)
        )
    qudit = QuditBasis(3, 3)
    with pytest.raises(ValueError):
        configuration_projector((1,), qudit, lambda c: False)


def test_overlapping_regions_rejected():
    state = quench_state(1.0)
    with pytest.raises(ValueError):
        apply_projection(state, block_flip_projector((1, 2), 24), block_flip_projector((2, 3), 24))
    with pytest.raises(ValueError):
        quench_probability(state, (1, 2), (2, 3))
    assert TwoFlipBasis(24).local_space(2).kind == "flip2"
