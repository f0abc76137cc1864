import numpy as np
from hypothesis import given, settings as hypothesis_settings
from hypothesis.strategies import integers
from pytest import approx, mark, raises
from scipy.linalg import hadamard

from entlab.core.exceptions import DimensionMismatchError, InvalidStateError
from entlab.models.spectra import (
    BooleanFunctionTable,
    MatrixValuedFunction,
    mask_of,
    members,
    points,
    random_bounded_table,
    subset_mask,
)
from entlab.services.fourier_service import butterfly, fourier_service


def test_butterfly_matches_hadamard_matrix(rng):
    values = rng.normal(size=16)
    assert np.allclose(butterfly(values), hadamard(16) @ values)


def test_mask_helpers():
    assert mask_of((1, -1, 1, -1)) == 0b1010
    assert subset_mask([0, 3]) == 0b1001
    assert members(0b1001) == [0, 3]
    assert tuple(points(3)[0b110]) == (1, -1, -1)


def test_character_has_single_coefficient():
    grid = points(4)
    spectrum = fourier_service.fourier(BooleanFunctionTable(4, grid[:, 0] * grid[:, 2]))
    expected = np.zeros(16)
    expected[0b0101] = 1.0
    assert np.allclose(spectrum.coefficients, expected)
    assert fourier_service.level_mass(spectrum, 2) == approx(1.0)
    assert fourier_service.level_mass(spectrum, 1) == approx(0.0)


@hypothesis_settings(max_examples=40, deadline=None)
@given(integers(min_value=0, max_value=2**32 - 1), integers(min_value=1, max_value=8))
def test_parseval(seed, n):
    rng = np.random.default_rng(seed)
    f = BooleanFunctionTable(n, rng.uniform(-1.0, 1.0, size=1 << n))
    spectrum = fourier_service.fourier(f)
    assert np.sum(spectrum.coefficients**2) == approx(np.mean(f.values**2))
    assert sum(fourier_service.level_weight(spectrum, ell) for ell in range(n + 1)) == approx(np.mean(f.values**2))


def test_inverse_recovers_table(rng):
    f = BooleanFunctionTable(5, rng.normal(size=32))
    assert np.allclose(fourier_service.inverse(fourier_service.fourier(f)).values, f.values)


def test_table_size_checked():
    with raises(DimensionMismatchError):
        BooleanFunctionTable(3, np.zeros(7))
    with raises(InvalidStateError):
        BooleanFunctionTable(2, [0.0, 2.0, 0.0, 0.0], bounded=True)


@mark.parametrize("ell", [1, 2, 3])
def test_scalar_level_k_holds_on_random_tables(rng, ell):
    for _ in range(50):
        audit = fourier_service.level_k_audit(random_bounded_table(6, rng), ell)
        assert audit.holds, audit


def test_scalar_level_k_needs_bounded_table():
    with raises(InvalidStateError):
        fourier_service.level_k_audit(BooleanFunctionTable(2, [0.1, 0.2, 0.3, 0.4]), 1)


def test_scalar_level_k_on_dictator():
    grid = points(3)
    audit = fourier_service.level_k_audit(BooleanFunctionTable(3, grid[:, 1], bounded=True), 1)
    assert audit.lhs == approx(1.0)
    assert audit.holds


@mark.parametrize("ell", [1, 2])
def test_matrix_level_k_holds_on_random_functions(rng, ell):
    for _ in range(20):
        audit = fourier_service.matrix_level_k_audit(fourier_service.random_matrix_function(4, 2, rng), ell)
        assert audit.holds, audit


@mark.parametrize("c, ell, expected", [(2, 1, 2), (2, 2, 2), (1, 1, 1), (1, 2, 3), (1, 4, 4)])
def test_padded_dimension(c, ell, expected):
    assert fourier_service.padded_dimension(c, ell) == expected


def test_matrix_spectrum_trace_norms_of_constant_function():
    rho = np.diag([0.75, 0.25])
    spectrum = fourier_service.matrix_fourier(MatrixValuedFunction(2, [rho] * 4))
    norms = fourier_service.level_trace_norm_sums(spectrum)
    assert norms[0] == approx(1.0)
    assert np.allclose(norms[1:], 0.0)


@hypothesis_settings(max_examples=30, deadline=None)
@given(integers(min_value=0, max_value=2**32 - 1), integers(min_value=2, max_value=6))
def test_level_mass_is_invariant_under_relabeling(seed, n):
    rng = np.random.default_rng(seed)
    values = rng.uniform(-1.0, 1.0, size=1 << n)
    perm = rng.permutation(n)
    relabeled = np.array([values[subset_mask([int(perm[i]) for i in members(mask)])] for mask in range(1 << n)])
    before = fourier_service.fourier(BooleanFunctionTable(n, values))
    after = fourier_service.fourier(BooleanFunctionTable(n, relabeled))
    for ell in range(n + 1):
        assert fourier_service.level_mass(after, ell) == approx(fourier_service.level_mass(before, ell))
