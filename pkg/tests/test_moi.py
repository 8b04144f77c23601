import math

import numpy as np
import pytest

from conftest import complex_gaussian, random_measure
from moilab.counterexample import build_instance
from moilab.linalg import (
    DimensionMismatchError,
    hermitian_from_matrix,
    random_hermitian,
    rank_one,
    spectral_measure,
    zero_operator,
)
from moilab.moi import (
    DividedDifference2,
    apply_function_pair,
    apply_function_single,
    apply_function_triple,
    argument_perturbation,
    double_operator_integral,
    first_argument_perturbation,
    perturbation_via_divided_difference,
    triple_operator_integral,
)
from moilab.reference import (
    naive_double_operator_integral,
    naive_triple_operator_integral,
)


def test_apply_function_single_identity_function(rng):
    A = random_hermitian(rng, 6)
    out = apply_function_single(lambda t: t, spectral_measure(A))
    assert np.max(np.abs(out - A.matrix)) <= 1e-10


def test_apply_function_single_constant_one(rng):
    E = spectral_measure(random_hermitian(rng, 5))
    out = apply_function_single(lambda t: np.ones_like(t), E)
    assert np.allclose(out, np.eye(5), atol=1e-12)


def test_apply_function_single_square_on_diagonal():
    E = spectral_measure(hermitian_from_matrix(np.diag([1.0, 2.0])))
    out = apply_function_single(lambda t: t**2, E)
    assert np.allclose(out, np.diag([1.0, 4.0]), atol=1e-12)


def test_double_integral_constant_symbol_returns_operator(rng):
    dim = 5
    E1 = random_measure(rng, dim, 3)
    E2 = random_measure(rng, dim, 4)
    T = complex_gaussian(rng, dim, dim)
    out = double_operator_integral(lambda x, y: np.ones(np.broadcast_shapes(x.shape, y.shape)), E1, T, E2)
    assert np.max(np.abs(out - T)) <= 1e-12


def test_double_integral_first_variable_factorizes(rng):
    dim = 5
    A = random_hermitian(rng, dim)
    E1 = spectral_measure(A)
    E2 = random_measure(rng, dim, 2)
    T = complex_gaussian(rng, dim, dim)
    out = double_operator_integral(lambda x, y: x + 0.0 * y, E1, T, E2)
    assert np.max(np.abs(out - A.matrix @ T)) <= 1e-10


def test_double_integral_single_atoms():
    E = spectral_measure(hermitian_from_matrix(3.0 * np.eye(3)))
    out = double_operator_integral(lambda x, y: x * y, E, np.eye(3), E)
    assert np.allclose(out, 9.0 * np.eye(3), atol=1e-12)


def test_double_integral_dimension_mismatch(rng):
    E1 = random_measure(rng, 3, 2)
    E2 = random_measure(rng, 4, 2)
    with pytest.raises(DimensionMismatchError):
        double_operator_integral(lambda x, y: x, E1, np.eye(3), E2)


def test_apply_function_pair_sum_splits(rng):
    A = random_hermitian(rng, 6)
    B = random_hermitian(rng, 6)
    out = apply_function_pair(lambda x, y: x + y, A, B)
    assert np.max(np.abs(out - (A.matrix + B.matrix))) <= 1e-10


def test_apply_function_pair_product_orders_left_then_right(rng):
    A = random_hermitian(rng, 6)
    B = random_hermitian(rng, 6)
    out = apply_function_pair(lambda x, y: x * y, A, B)
    assert np.max(np.abs(out - A.matrix @ B.matrix)) <= 1e-10


def test_apply_function_pair_collapses_to_rank_one():
    # phi paired with the lattice operators collapses onto the summed frames
    inst = build_instance(4)
    out = apply_function_pair(inst.phi, inst.A, inst.B)
    expected = rank_one(inst.g_vectors.sum(axis=0), inst.h_vectors.sum(axis=0)) / 2.0
    assert np.max(np.abs(out - expected)) <= 1e-10


def test_triple_integral_constant_symbol(rng):
    dim = 4
    E1, E2, E3 = (random_measure(rng, dim, k) for k in (2, 3, 1))
    T1 = complex_gaussian(rng, dim, dim)
    T2 = complex_gaussian(rng, dim, dim)
    ones = lambda x, y, z: np.ones(np.broadcast_shapes(x.shape, y.shape, z.shape))
    out = triple_operator_integral(ones, E1, T1, E2, T2, E3)
    assert np.max(np.abs(out - T1 @ T2)) <= 1e-12


def test_triple_integral_product_factorizes(rng):
    dim = 5
    A, B, C = (random_hermitian(rng, dim) for _ in range(3))
    out = apply_function_triple(lambda x, y, z: x * y * z, A, B, C)
    assert np.max(np.abs(out - A.matrix @ B.matrix @ C.matrix)) <= 1e-9


def test_triple_integral_matches_naive_oracle(rng):
    phi = lambda x, y, z: np.exp(1j * (x - 2.0 * y)) + x * z
    for _ in range(10):
        dim = int(rng.integers(3, 9))
        E1, E2, E3 = (random_measure(rng, dim, int(rng.integers(1, 6))) for _ in range(3))
        T1 = complex_gaussian(rng, dim, dim)
        T2 = complex_gaussian(rng, dim, dim)
        fast = triple_operator_integral(phi, E1, T1, E2, T2, E3)
        slow = naive_triple_operator_integral(phi, E1, T1, E2, T2, E3)
        assert np.max(np.abs(fast - slow)) <= 1e-10


def test_double_integral_matches_naive_oracle(rng):
    phi = lambda x, y: np.cos(x * y) + 1j * y
    for _ in range(10):
        dim = int(rng.integers(3, 9))
        E1, E2 = (random_measure(rng, dim, int(rng.integers(1, 6))) for _ in range(2))
        T = complex_gaussian(rng, dim, dim)
        fast = double_operator_integral(phi, E1, T, E2)
        slow = naive_double_operator_integral(phi, E1, T, E2)
        assert np.max(np.abs(fast - slow)) <= 1e-10


def test_apply_function_triple_constant_is_identity(rng):
    ops = [random_hermitian(rng, 4) for _ in range(3)]
    ones = lambda x, y, z: np.ones(np.broadcast_shapes(x.shape, y.shape, z.shape))
    out = apply_function_triple(ones, *ops)
    assert np.allclose(out, np.eye(4), atol=1e-12)


def test_apply_function_triple_last_slot_with_zero_operator(rng):
    A = random_hermitian(rng, 4)
    B = random_hermitian(rng, 4)
    out = apply_function_triple(lambda x, y, z: z + 0.0 * x * y, A, B, zero_operator(4))
    assert np.max(np.abs(out)) <= 1e-12


def test_apply_function_triple_tensor_product_factorizes():
    inst = build_instance(4)
    lhs = apply_function_triple(inst.f, inst.A, inst.B, inst.C)
    rhs = apply_function_pair(inst.phi, inst.A, inst.B) @ inst.C.matrix
    # psi fixes C (spectrum {0, 1}), so the triple result is the pair result times C
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_perturbation_identity_function(rng):
    A = random_hermitian(rng, 6)
    B = random_hermitian(rng, 6)
    out = perturbation_via_divided_difference(lambda t: t, A, B)
    assert np.max(np.abs(out - (A.matrix - B.matrix))) <= 1e-10


def test_perturbation_square_function(rng):
    A = random_hermitian(rng, 6)
    B = random_hermitian(rng, 6)
    out = perturbation_via_divided_difference(lambda t: t**2, A, B)
    direct = A.matrix @ A.matrix - B.matrix @ B.matrix
    assert np.max(np.abs(out - direct)) <= 1e-10


def test_perturbation_equal_operators_any_policy(rng):
    A = random_hermitian(rng, 5)
    for policy in (0.0, 1.0, 5.0 - 3.0j):
        out = perturbation_via_divided_difference(
            lambda t: np.sin(t), A, A, diagonal_value=policy
        )
        assert np.max(np.abs(out)) <= 1e-12


def test_divided_difference_values():
    dd = DividedDifference2(base=lambda t: t**2, diagonal_value=7.0)
    assert complex(dd(3.0, 1.0)) == pytest.approx(4.0)
    assert complex(dd(2.0, 2.0)) == pytest.approx(7.0)


def test_diagonal_policy_never_leaks_into_result(rng):
    shared = np.sort(rng.uniform(-2.0, 2.0, size=5))
    Q = complex_gaussian(rng, 5, 5)
    Q, _ = np.linalg.qr(Q)
    A = hermitian_from_matrix((Q * shared) @ Q.conj().T)
    B = hermitian_from_matrix(np.diag(shared).astype(complex))
    f = lambda t: t**3 - t
    base = perturbation_via_divided_difference(f, A, B, diagonal_value=0.0)
    other = perturbation_via_divided_difference(f, A, B, diagonal_value=9.0 + 2j)
    assert np.max(np.abs(base - other)) <= 1e-12


def test_diagonal_policy_bit_identical_on_exactly_shared_spectra():
    # diagonal inputs decompose exactly, so both measures carry the float
    # 1.5 and the diagonal branch really fires; outputs must not move
    A = hermitian_from_matrix(np.diag([1.5, 2.0, 4.0]).astype(complex))
    B = hermitian_from_matrix(np.diag([-3.0, 1.5, 2.0]).astype(complex))
    f = lambda t: np.exp(1j * t)
    outputs = [
        perturbation_via_divided_difference(f, A, B, diagonal_value=policy)
        for policy in (0.0, 1.0, -4.0 + 11.0j)
    ]
    assert np.array_equal(outputs[0], outputs[1])
    assert np.array_equal(outputs[0], outputs[2])
    direct = apply_function_single(f, spectral_measure(A)) - apply_function_single(
        f, spectral_measure(B)
    )
    assert np.max(np.abs(outputs[0] - direct)) <= 1e-12


def test_single_slot_exactness_sweep(rng):
    functions = [
        lambda t: 0.3 * t**4 - t**2 + 0.5 * t,
        lambda t: np.exp(1j * t),
    ]
    worst = 0.0
    for _ in range(30):
        dim = int(rng.integers(2, 11))
        A = random_hermitian(rng, dim)
        B = random_hermitian(rng, dim)
        for f in functions:
            lhs = perturbation_via_divided_difference(f, A, B)
            rhs = apply_function_single(f, spectral_measure(A)) - apply_function_single(
                f, spectral_measure(B)
            )
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    assert worst <= 1e-9


def test_argument_perturbation_same_operator_is_zero(rng):
    ops = [random_hermitian(rng, 4) for _ in range(3)]
    f = lambda x, y, z: np.sin(x) + y * z
    out = argument_perturbation(f, 0, ops[0], ops[0], ops[1], ops[2])
    assert np.max(np.abs(out)) <= 1e-12


def test_argument_perturbation_coordinate_function(rng):
    A1, A2, B, C = (random_hermitian(rng, 5) for _ in range(4))
    out = first_argument_perturbation(lambda x, y, z: x + 0.0 * y * z, A1, A2, B, C)
    assert np.max(np.abs(out - (A1.matrix - A2.matrix))) <= 1e-10


def test_argument_perturbation_all_positions_match_direct_difference(rng):
    f = lambda x, y, z: np.sin(x) * np.cos(y) + z
    for _ in range(8):
        dim = int(rng.integers(2, 7))
        X1, X2, Y, Z = (random_hermitian(rng, dim) for _ in range(4))
        for index in (0, 1, 2):
            lhs = argument_perturbation(f, index, X1, X2, Y, Z)
            args1 = [Y, Z]
            args1.insert(index, X1)
            args2 = [Y, Z]
            args2.insert(index, X2)
            rhs = apply_function_triple(f, *args1) - apply_function_triple(f, *args2)
            assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_argument_perturbation_rejects_bad_index(rng):
    ops = [random_hermitian(rng, 3) for _ in range(4)]
    with pytest.raises(ValueError):
        argument_perturbation(lambda x, y, z: x, 3, *ops)


def test_commuting_diagonal_consistency(rng):
    f = lambda x, y, z: np.cos(x) * y + z**2
    diags = [np.sort(rng.uniform(-2.0, 2.0, size=6)) for _ in range(3)]
    ops = [hermitian_from_matrix(np.diag(d).astype(complex)) for d in diags]
    out = apply_function_triple(f, *ops)
    expected = np.diag(f(*diags).astype(complex))
    assert np.max(np.abs(out - expected)) <= 1e-12


def test_mixed_dimension_rejection(rng):
    A = random_hermitian(rng, 3)
    B = random_hermitian(rng, 4)
    with pytest.raises(DimensionMismatchError):
        apply_function_pair(lambda x, y: x + y, A, B)
    with pytest.raises(DimensionMismatchError):
        apply_function_triple(lambda x, y, z: x, A, A, B)
