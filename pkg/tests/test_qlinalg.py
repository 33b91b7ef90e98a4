import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfwitness.qlinalg import (
    UnitaryParams,
    ValidationError,
    complete_to_unitary,
    dagger,
    decode_unitary,
    derive_seed,
    encode_unitary,
    is_orthonormal,
    is_projector,
    is_unitary,
    make_rng,
    n_unitary_params,
    projector,
    random_state,
    random_unitary,
    require_normalized,
    require_unitary,
    tensor,
    unitary_mapping,
)

angles = st.floats(min_value=-10, max_value=10, allow_nan=False)


def test_tensor_is_row_major_kron():
    a = np.array([1, 2])
    b = np.array([0, 1, 0])
    assert np.array_equal(tensor(a, b), [0, 1, 0, 0, 2, 0])


def test_unitarity_checks():
    assert is_unitary(np.eye(3))
    assert not is_unitary(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValidationError, match="unitarity check failed"):
        require_unitary(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValidationError, match="normalization check failed"):
        require_normalized(np.array([1.0, 1.0]))


def test_projector_of_state():
    v = random_state(4, 3)
    p = projector(v)
    assert is_projector(p)
    assert np.isclose(np.trace(p).real, 1.0)


def test_orthonormal_family_projectors_below_identity():
    u = random_unitary(5, 11)
    total = sum(projector(u[:, k]) for k in range(3))
    assert np.max(np.linalg.eigvalsh(total)) <= 1 + 1e-9
    assert is_orthonormal(u[:, :3])


def test_complete_to_unitary_keeps_first_column():
    v = random_state(4, 5)
    u = complete_to_unitary(v)
    assert is_unitary(u)
    assert np.allclose(u[:, 0], v)


def test_unitary_mapping_sends_source_to_target():
    s, t = random_state(3, 1), random_state(3, 2)
    u = unitary_mapping(s, t)
    assert is_unitary(u)
    assert np.allclose(u @ s, t)


def test_decode_small_angle_example():
    u = decode_unitary(UnitaryParams(2, (np.pi / 4, 0.0, 0.0)))
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    assert np.allclose(u, [[c, -s], [s, c]])


def test_encode_identity_gives_zero_angles():
    assert np.allclose(encode_unitary(np.eye(4)).angles, 0.0)


def test_param_count_checked():
    with pytest.raises(ValueError):
        UnitaryParams(3, (0.0,) * 7)
    assert n_unitary_params(4) == 15


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_encode_decode_round_trip_up_to_phase(d, seed):
    u = random_unitary(d, seed)
    v = decode_unitary(encode_unitary(u))
    overlap = np.trace(dagger(u) @ v) / d
    assert abs(abs(overlap) - 1) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda d: st.tuples(st.just(d), st.lists(angles, min_size=d * d - 1, max_size=d * d - 1))))
def test_decoded_matrices_are_special_unitary(args):
    d, a = args
    u = decode_unitary(UnitaryParams(d, tuple(a)))
    assert is_unitary(u)
    assert abs(np.linalg.det(u) - 1) < 1e-9


def test_haar_first_moment():
    rng = make_rng(2024)
    vals = [abs(random_unitary(2, rng)[0, 0]) ** 2 for _ in range(10_000)]
    assert abs(np.mean(vals) - 0.5) < 0.02


def test_random_state_phase_convention():
    v = random_state(3, 9)
    assert abs(np.linalg.norm(v) - 1) < 1e-12
    assert v[0].imag == 0 and v[0].real >= 0


def test_streams_are_reproducible_and_distinct():
    a = make_rng(7, 1).standard_normal(3)
    b = make_rng(7, 1).standard_normal(3)
    c = make_rng(7, 2).standard_normal(3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert derive_seed(7, 1) == derive_seed(7, 1) != derive_seed(7, 2)
