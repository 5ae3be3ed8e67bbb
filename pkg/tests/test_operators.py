import numpy as np
import pytest

from spinsync.operators import (
    SpinSpec,
    devectorize,
    embed,
    left_multiplier,
    right_multiplier,
    spin_operators,
    vectorize,
)

RNG = np.random.default_rng(1234)


# ---------------------------------------------------------------- spin algebra

def test_spin_half_is_half_pauli():
    sz, sp, sm = spin_operators(0.5)
    assert np.allclose(sz, [[0.5, 0], [0, -0.5]])
    assert np.allclose(sp, [[0, 1], [0, 0]])
    assert np.allclose(sm, [[0, 0], [1, 0]])


def test_spin_one_ladder_coefficients():
    sz, sp, sm = spin_operators(1.0)
    assert np.allclose(np.diag(sz), [1, 0, -1])
    # raising |0> -> sqrt(2)|1>, |-1> -> sqrt(2)|0>
    assert np.allclose(sp[0, 1], np.sqrt(2))
    assert np.allclose(sp[1, 2], np.sqrt(2))
    assert np.count_nonzero(sp) == 2


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5, 2.0])
def test_commutators_and_casimir(s):
    sz, sp, sm = spin_operators(s)
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    assert np.max(np.abs(sx @ sy - sy @ sx - 1j * sz)) < 1e-12
    assert np.max(np.abs(sy @ sz - sz @ sy - 1j * sx)) < 1e-12
    assert np.max(np.abs(sz @ sx - sx @ sz - 1j * sy)) < 1e-12
    casimir = sx @ sx + sy @ sy + sz @ sz
    dim = int(round(2 * s + 1))
    assert np.max(np.abs(casimir - s * (s + 1) * np.eye(dim))) < 1e-12


@pytest.mark.parametrize("bad", [0.7, 0.0, -1.0, 1.2])
def test_non_half_integer_rejected(bad):
    with pytest.raises(ValueError):
        spin_operators(bad)
    with pytest.raises(ValueError):
        SpinSpec((1.0, bad))


# -------------------------------------------------------------------- SpinSpec

def test_spec_dims_and_ordering():
    spec = SpinSpec((1.0, 0.5, 1.0))
    assert spec.site_dims == (3, 2, 3)
    assert spec.dim == 18
    strings = spec.basis_strings()
    assert len(strings) == 18
    # site 1 slowest, descending magnetization within each site
    assert strings[0] == (1.0, 0.5, 1.0)
    assert strings[1] == (1.0, 0.5, 0.0)
    assert strings[-1] == (-1.0, -0.5, -1.0)
    # composite index consistent with kron ordering of diagonal operators
    spec3 = SpinSpec((1.0, 1.0, 1.0))
    sz = spin_operators(1.0)[0]
    total_mz = sum(embed(sz, j, spec3) for j in range(3))
    assert np.allclose(
        np.diag(total_mz).real, [sum(s) for s in spec3.basis_strings()]
    )


def test_empty_spec_rejected():
    with pytest.raises(ValueError):
        SpinSpec(())


# ----------------------------------------------------------------------- embed

def test_embed_matches_explicit_kron():
    spec = SpinSpec((1.0, 1.0, 1.0))
    sz, sp, _ = spin_operators(1.0)
    eye = np.eye(3)
    assert np.allclose(embed(sz, 0, spec), np.kron(np.kron(sz, eye), eye))
    assert np.allclose(embed(sp, 1, spec), np.kron(np.kron(eye, sp), eye))
    assert np.allclose(embed(sz, 2, spec), np.kron(np.kron(eye, eye), sz))


def test_embed_diagonal_entry():
    spec = SpinSpec((1.0, 1.0, 1.0))
    sz = spin_operators(1.0)[0]
    strings = spec.basis_strings()
    i = strings.index((1.0, 0.0, -1.0))
    assert embed(sz, 2, spec)[i, i] == -1.0
    assert embed(sz, 1, spec)[i, i] == 0.0
    assert embed(sz, 0, spec)[i, i] == 1.0


def test_embed_products_and_commutation():
    spec = SpinSpec((0.5, 1.0))
    for s, site in ((0.5, 0), (1.0, 1)):
        sz, sp, sm = spin_operators(s)
        lhs = embed(sp, site, spec) @ embed(sm, site, spec)
        assert np.allclose(lhs, embed(sp @ sm, site, spec), atol=1e-14)
    a = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
    b = RNG.normal(size=(3, 3)) + 1j * RNG.normal(size=(3, 3))
    ea, eb = embed(a, 0, spec), embed(b, 1, spec)
    assert np.max(np.abs(ea @ eb - eb @ ea)) < 1e-13


def test_embed_validates_inputs():
    spec = SpinSpec((1.0, 1.0))
    with pytest.raises(ValueError):
        embed(np.eye(2), 0, spec)  # wrong dimension for a spin-1 site
    with pytest.raises(ValueError):
        embed(np.eye(3), 2, spec)  # site out of range


# ------------------------------------------------------------- vectorization

def test_vectorize_is_column_stacking():
    x = np.array([[1, 2], [3, 4]])
    assert np.array_equal(vectorize(x), [1, 3, 2, 4])
    assert np.array_equal(devectorize(vectorize(x)), x)


def test_vectorize_rejects_bad_shapes():
    with pytest.raises(ValueError):
        vectorize(np.ones((2, 3)))
    with pytest.raises(ValueError):
        devectorize(np.ones(5))


@pytest.mark.parametrize("d", [2, 3, 5])
def test_multiplier_identity(d):
    # vec(A X B) = (B^T kron A) vec(X), checked entrywise on random draws
    for _ in range(5):
        a = RNG.normal(size=(d, d)) + 1j * RNG.normal(size=(d, d))
        b = RNG.normal(size=(d, d)) + 1j * RNG.normal(size=(d, d))
        x = RNG.normal(size=(d, d)) + 1j * RNG.normal(size=(d, d))
        direct = vectorize(a @ x @ b)
        via_kron = np.kron(b.T, a) @ vectorize(x)
        assert np.max(np.abs(direct - via_kron)) < 1e-13
        assert np.max(np.abs(left_multiplier(a) @ vectorize(x) - vectorize(a @ x))) < 1e-13
        assert np.max(np.abs(right_multiplier(b) @ vectorize(x) - vectorize(x @ b))) < 1e-13
