import pytest

from stringbordism.algebra import build_A_n, build_EQ, build_tilde_A1
from stringbordism.fplin import FpMatrix
from stringbordism.gmod import (
    GradedModule,
    direct_sum,
    free_module,
    restrict,
    split_by_involution,
    suspend,
    tensor,
    trivial_module,
    truncate,
)


def test_trivial_module():
    m = trivial_module(build_A_n(1), degree=0)
    assert m.degree_dims() == {0: 1}
    assert not m.truncated
    m.validate()
    m4 = trivial_module(build_EQ(3), degree=4)
    assert m4.degree_dims() == {4: 1}
    m4.validate()


@pytest.mark.parametrize("algebra", [
    build_A_n(1), build_A_n(2), build_EQ(3), build_EQ(5), build_tilde_A1()])
def test_free_module_validates(algebra):
    m = free_module(algebra)
    assert m.total_dim == algebra.dim
    assert m.degree_dims() == {
        d: algebra.dim_in_degree(d)
        for d in range(algebra.top_degree + 1) if algebra.dim_in_degree(d)}
    m.validate()


def test_validate_catches_corruption():
    a = build_A_n(1)
    m = free_module(a)
    # Zero out the Sq1 action from degree 0.  Relations that mention Sq1
    # directly route both sides through the corrupted matrix, so the first
    # detectable breakage is Sq2 Sq2 = Sq3 Sq1 applied to the unit.
    m.actions[0][0] = FpMatrix.zeros(2, m.dim(1), m.dim(0))
    with pytest.raises(ValueError, match=r"Sq2\*Sq2"):
        m.validate()


def test_restrict_free_A2_to_A1():
    m = restrict(free_module(build_A_n(2)), build_A_n(1))
    assert m.algebra.name == "A1"
    assert m.total_dim == 64
    m.validate()


def test_restrict_needs_matching_generators():
    with pytest.raises(ValueError):
        restrict(free_module(build_A_n(1)), build_A_n(2))


def test_suspend():
    m = suspend(trivial_module(build_A_n(1)), 5)
    assert m.degree_dims() == {5: 1}
    m.validate()
    down = suspend(m, -5)
    assert down.degree_dims() == {0: 1}


def test_truncate_is_quotient_module():
    m = truncate(free_module(build_A_n(2)), 10)
    assert m.truncated
    assert max(m.degrees) <= 10
    m.validate()
    same = truncate(free_module(build_A_n(1)), 23)
    assert not same.truncated


def test_direct_sum():
    a = build_EQ(3)
    m = direct_sum(trivial_module(a, 0), trivial_module(a, 5))
    assert m.degree_dims() == {0: 1, 5: 1}
    m.validate()
    both = direct_sum(free_module(a), free_module(a))
    assert both.degree_dims() == {d: 2 * k for d, k in free_module(a).degree_dims().items()}
    both.validate()


def test_tensor_of_trivials():
    a = build_A_n(1)
    m = tensor(trivial_module(a, 3), trivial_module(a, 4))
    assert m.degree_dims() == {7: 1}
    assert m.labels == ["x3|x4"]
    assert not m.truncated
    m.validate()


@pytest.mark.parametrize("algebra", [build_A_n(1), build_EQ(3), build_EQ(5)])
def test_tensor_of_frees_validates(algebra):
    f = free_module(algebra)
    m = tensor(f, f)
    assert not m.truncated
    # Dimensions convolve.
    fd = f.degree_dims()
    for d, k in m.degree_dims().items():
        assert k == sum(fd.get(d1, 0) * fd.get(d - d1, 0) for d1 in fd)
    m.validate()


def test_tensor_of_frees_tilde_A1_validates():
    f = free_module(build_tilde_A1())
    m = tensor(f, f)
    assert m.total_dim == 24 * 24
    m.validate()


def test_tensor_truncation_bound():
    a = build_A_n(1)
    f = truncate(free_module(a), 4)       # bottom 0, exact to 4
    g = suspend(trivial_module(a), 2)     # complete, degree 2
    m = tensor(f, g)
    # Pairs with first factor above degree 4 are unknown, so the product
    # is exact only through 4 + 2.
    assert m.truncated
    assert m.max_degree == 6
    m.validate()
    capped = tensor(g, g, max_degree=3)
    assert capped.total_dim == 0


def test_split_by_involution_swap():
    a = build_EQ(3)
    f = free_module(a)
    m = direct_sum(f, f)
    # The swap of the two summands commutes with everything.
    phi = {}
    for d in sorted(set(m.degrees)):
        n = f.dim(d)
        rows = []
        for i in range(2 * n):
            row = [0] * 2 * n
            row[(i + n) % (2 * n)] = 1
            rows.append(row)
        phi[d] = FpMatrix(3, rows, ncols=2 * n)
    plus, minus = split_by_involution(m, phi)
    assert plus.degree_dims() == f.degree_dims()
    assert minus.degree_dims() == f.degree_dims()
    plus.validate()
    minus.validate()


def test_split_by_involution_identity():
    a = build_EQ(3)
    f = free_module(a)
    phi = {d: FpMatrix.identity(3, f.dim(d)) for d in set(f.degrees)}
    plus, minus = split_by_involution(f, phi)
    assert plus.degree_dims() == f.degree_dims()
    assert minus.total_dim == 0


def test_split_rejects_p2_and_non_involutions():
    f2 = free_module(build_A_n(0))
    with pytest.raises(ValueError):
        split_by_involution(f2, {d: FpMatrix.identity(2, f2.dim(d))
                                 for d in set(f2.degrees)})
    f = free_module(build_EQ(3))
    bad = {d: FpMatrix.identity(3, f.dim(d)).scale(2) for d in set(f.degrees)}
    # scale(2) squares to 4 = 1 mod 3, so corrupt one degree differently
    bad[0] = FpMatrix(3, [[2]])
    assert (bad[0] @ bad[0]) == FpMatrix.identity(3, 1)
    zero = {d: FpMatrix.zeros(3, f.dim(d), f.dim(d)) for d in set(f.degrees)}
    with pytest.raises(ValueError):
        split_by_involution(f, zero)


def test_module_rejects_basis_above_max_degree():
    a = build_A_n(1)
    with pytest.raises(ValueError):
        GradedModule(a, [3], ["x3"], {0: {}, 1: {}}, max_degree=2)
