import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transmon_cas.hilbert import (ModeDims, all_labels, basis_index, basis_label, basis_state,
                                  commutator, hermiticity_residual, projector, site_operator,
                                  total_number)

dims_strategy = st.tuples(*[st.integers(2, 4)] * 3)


def test_default_dims():
    d = ModeDims()
    assert d.levels == (4, 4, 4)
    assert d.total == 64


@pytest.mark.parametrize("levels", [(1, 4, 4), (4, 4), (2, 2, 2, 2)])
def test_bad_dims(levels):
    with pytest.raises(ValueError):
        ModeDims(levels)


def test_coupler_lowering_two_levels():
    a = site_operator((2, 2, 2), "qc", "lower")
    assert a.shape == (8, 8)
    nz = a[np.nonzero(a)]
    assert len(nz) == 4
    assert np.all(nz == 1)


def test_number_spectrum():
    n = site_operator((4, 4, 4), 0, "number")
    assert np.allclose(n, np.diag(np.diag(n)))
    vals, counts = np.unique(np.real(np.diag(n)), return_counts=True)
    assert list(vals) == [0, 1, 2, 3]
    assert list(counts) == [16] * 4


def test_raise_is_adjoint_of_lower():
    lo = site_operator((3, 3, 3), 1, "lower")
    hi = site_operator((3, 3, 3), 1, "raise")
    assert np.array_equal(hi, lo.conj().T)


def test_ladder_matrix_element():
    a = site_operator((4, 3, 2), 0, "lower")
    for n in range(1, 4):
        bra = basis_state((4, 3, 2), (n - 1, 0, 0))
        ket = basis_state((4, 3, 2), (n, 0, 0))
        assert np.isclose(bra @ a @ ket, np.sqrt(n))


@pytest.mark.parametrize("mode", [3, -1, "q3"])
def test_bad_mode(mode):
    with pytest.raises(ValueError):
        site_operator((2, 2, 2), mode, "lower")


def test_bad_kind():
    with pytest.raises(ValueError):
        site_operator((2, 2, 2), 0, "position")


@pytest.mark.parametrize("dims,label,index", [((4, 4, 4), (0, 0, 0), 0),
                                              ((4, 4, 4), (1, 0, 1), 17),
                                              ((2, 2, 2), (0, 1, 0), 2)])
def test_basis_index(dims, label, index):
    assert basis_index(dims, label) == index
    assert np.argmax(np.abs(basis_state(dims, label))) == index


def test_label_out_of_range():
    with pytest.raises(ValueError):
        basis_state((2, 2, 2), (0, 2, 0))
    with pytest.raises(ValueError):
        basis_label((2, 2, 2), 8)


@given(dims_strategy)
def test_commutator_off_truncation(dims):
    top = np.array(dims) - 1
    occ = np.array(all_labels(dims))
    for m in range(3):
        a = site_operator(dims, m, "lower")
        c = commutator(a, a.conj().T)
        keep = occ[:, m] < top[m]
        block = c[np.ix_(keep, keep)]
        assert np.allclose(block, np.eye(keep.sum()))


@given(dims_strategy, st.sampled_from(["lower", "raise", "number"]),
       st.sampled_from(["lower", "raise", "number"]))
def test_distinct_modes_commute(dims, k1, k2):
    for m1, m2 in ((0, 1), (0, 2), (1, 2)):
        a = site_operator(dims, m1, k1)
        b = site_operator(dims, m2, k2)
        assert np.array_equal(a @ b, b @ a)


@given(dims_strategy)
@settings(max_examples=20)
def test_basis_orthonormal_complete(dims):
    states = np.array([basis_state(dims, lab) for lab in all_labels(dims)])
    assert np.array_equal(states @ states.conj().T, np.eye(len(states)))


@given(dims_strategy, st.data())
def test_index_label_roundtrip(dims, data):
    n = data.draw(st.integers(0, int(np.prod(dims)) - 1))
    assert basis_index(dims, basis_label(dims, n)) == n


def test_total_number_and_projector():
    n = total_number((2, 2, 2))
    assert np.isclose(np.real(np.trace(n)), 12)
    p = projector((2, 2, 2), [(0, 0, 0), (1, 1, 1)])
    assert np.allclose(p @ p, p)
    assert np.isclose(np.trace(p), 2)


def test_hermiticity_residual():
    assert hermiticity_residual(site_operator((3, 3, 3), 2, "number")) == 0.0
    assert hermiticity_residual(site_operator((3, 3, 3), 2, "lower")) > 1
