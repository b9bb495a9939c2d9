import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import symbolic
from cfinsler import expr as ex
from cfinsler.errors import DomainViolation, JetDomainError, MissingIndex, UnsupportedOrder
from cfinsler.jet import (DenseDerivatives, IndexSet, WirtingerPoint, evaluate_jet, index_set, jet_of,
                          multi_index, partial)
from cfinsler.zoo import disk_metric, euclidean
from conftest import point

coord = st.floats(-0.4, 0.4, allow_nan=False)
fiber = st.floats(-2.0, 2.0, allow_nan=False)


def test_disk_value_one_dimension():
    # L = |eta|^2 / (1 - |z|^2)^2 at z = 1/2, eta = 1 is 1 / (3/4)^2
    j = evaluate_jet(disk_metric(1, -1.0), point([0.5], [1.0]))
    assert j.value == pytest.approx(16 / 9, rel=1e-15)


def test_euclidean_fundamental_tensor_is_identity():
    j = evaluate_jet(euclidean(3), point([0.1, 0.2j, 0.3], [1, 2j, -1]))
    d = DenseDerivatives(j)
    assert np.allclose(d.d("E", "EB"), np.eye(3), atol=0)
    assert np.allclose(d.d("Z", "E", "EB"), 0, atol=0)


def test_disk_tensor_at_axis_point():
    # g_{1 1bar} = 1 / (1 - |z|^2)^2 at z = (0.3, 0)
    j = evaluate_jet(disk_metric(2, -1.0), point([0.3, 0], [1, 0]))
    assert partial(j, [("eta", 0), ("etabar", 0)]) == pytest.approx(1 / 0.91 ** 2, rel=1e-14)


@pytest.mark.parametrize("name", ["euclidean", "disk", "hartogs-alpha", "hartogs-randers"])
def test_coefficients_match_symbolic_oracle(metrics, name):
    key = {"disk": "disk:eps=-1"}.get(name, name)
    m = metrics[key]
    L = {"euclidean": symbolic.euclidean_L, "disk": lambda: symbolic.disk_L(-1),
         "hartogs-alpha": symbolic.hartogs_alpha_L, "hartogs-randers": symbolic.hartogs_randers_L}[name]()
    z, eta = [0.6, 0.2 - 0.1j], [1.0, 0.5j]
    if name in ("euclidean", "disk"):
        z = [0.3, -0.2j]
    j = evaluate_jet(m, point(z, eta))
    cases = [[], [("eta", 1)], [("eta", 0), ("etabar", 1)], [("z", 0), ("eta", 0), ("etabar", 0)],
             [("zbar", 1), ("eta", 1), ("etabar", 0), ("eta", 0)]]
    for factors in cases:
        got = partial(j, factors)
        want = symbolic.derivative(L, factors, z, eta)
        assert abs(got - want) <= 1e-11 * max(1.0, abs(want)), factors


def test_product_and_quotient_rules():
    iset = index_set(1, 3, 1)
    p = point([0.3 + 0.1j], [0.7 - 0.2j])
    f = ex.z(0) * ex.eta(0) ** 2
    g = 1 / (1 + ex.abs2(ex.z(0)))
    jf, jg, jfg = jet_of(f, p, iset), jet_of(g, p, iset), jet_of(f * g, p, iset)
    assert np.allclose((jf * jg).c, jfg.c, rtol=1e-14, atol=1e-15)
    # d/deta of z eta^2 = 2 z eta
    assert partial(jf, [("eta", 0)]) == pytest.approx(2 * p.z[0] * p.eta[0])
    assert partial(jf, [("z", 0), ("eta", 0), ("eta", 0)]) == pytest.approx(2.0)


def test_sqrt_and_log_guards():
    iset = index_set(1, 3, 1)
    p = point([0.0], [1.0])
    with pytest.raises(JetDomainError):
        jet_of(ex.sqrt(ex.abs2(ex.z(0))), p, iset)
    with pytest.raises(JetDomainError):
        jet_of(ex.log(ex.abs2(ex.z(0))), p, iset)


def test_order_caps_and_missing_index():
    m = euclidean(2)
    p = point([0, 0], [1, 0])
    with pytest.raises(UnsupportedOrder):
        evaluate_jet(m, p, fiber_order=4)
    j = evaluate_jet(m, p, fiber_order=2, base_order=0)
    with pytest.raises(MissingIndex):
        partial(j, [("z", 0), ("eta", 0)])
    with pytest.raises(MissingIndex):
        multi_index(2, ("eta", 2))


def test_dimension_and_domain_checks():
    with pytest.raises(DomainViolation):
        evaluate_jet(euclidean(2), point([0, 0, 0], [1, 0, 0]))
    with pytest.raises(DomainViolation):
        evaluate_jet(disk_metric(2, -1.0), point([0.9, 0.9], [1, 0]))


def test_index_sets_are_down_closed():
    for shape in ("full", "spray"):
        s = IndexSet(2, 3, 1, shape)
        for m in s.monomials:
            for k, e in enumerate(m):
                if e:
                    lower = list(m)
                    lower[k] -= 1
                    assert tuple(lower) in s.index
    assert IndexSet(2, 3, 1, "spray").size == 56


@settings(max_examples=25, deadline=None)
@given(st.lists(coord, min_size=4, max_size=4), st.lists(fiber, min_size=4, max_size=4))
def test_spray_shape_agrees_with_full(zs, es):
    m = disk_metric(2, -1.0)
    p = WirtingerPoint([zs[0] + 1j * zs[1], zs[2] + 1j * zs[3]], [es[0] + 1j * es[1], es[2] + 1j * es[3]])
    if not np.any(p.eta):
        return
    full = evaluate_jet(m, p)
    spray = evaluate_jet(m, p, shape="spray")
    for mono, k in spray.iset.index.items():
        assert spray.c[k] == pytest.approx(full.c[full.iset.index[mono]], rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(coord, min_size=4, max_size=4), st.lists(fiber, min_size=4, max_size=4))
def test_jet_value_equals_plain_evaluation(zs, es):
    m = disk_metric(2, -0.5)
    p = WirtingerPoint([zs[0] + 1j * zs[1], zs[2] + 1j * zs[3]], [es[0] + 1j * es[1], es[2] + 1j * es[3]])
    assert evaluate_jet(m, p).value == pytest.approx(m.L(p), rel=1e-13, abs=1e-15)
