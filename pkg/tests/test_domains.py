import numpy as np
import pytest

from cfinsler.domains import Ball, Hartogs, Intersection, Polydisc, Whole, parse_domain
from cfinsler.errors import DomainViolation


def test_parse_descriptors():
    assert isinstance(parse_domain("all", 3), Whole)
    b = parse_domain("ball(2; 1, 0.5i)", 2)
    assert b.radius == 2.0 and b.center == (1 + 0j, 0.5j)
    assert b.describe() == "ball(2.0; 1.0, 0.0+0.5i)"
    assert parse_domain("polydisc(0.5)", 2).radii == (0.5, 0.5)
    assert isinstance(parse_domain("Hartogs", 2), Hartogs)
    for bad, dim in (("ball(1; 0)", 2), ("polydisc(1,2,3)", 2), ("hartogs", 3), ("blob", 1)):
        with pytest.raises(DomainViolation):
            parse_domain(bad, dim)


def test_membership():
    h = Hartogs()
    assert h.contains(np.array([0.5, 0.2]))
    assert not h.contains(np.array([0.2, 0.5]))
    assert not h.contains(np.array([1.1, 0.2]))
    assert Polydisc((1.0, 0.5)).contains(np.array([0.9, 0.4j]))
    assert not Polydisc((1.0, 0.5)).contains(np.array([0.9, 0.6]))
    assert not Ball(2, 1.0).contains(np.array([0.6, 0.6]), margin=0.2)


def test_sampling_stays_inside_shrunk_domains():
    rng = np.random.default_rng(0)
    for d in (Ball(2, 1.0), Ball(2, 0.5, (1, 1j)), Polydisc((1.0, 0.3)), Hartogs()):
        for _ in range(200):
            z = d.sample_base(rng, 0.8)
            assert d.contains(z, shrink=0.8 + 1e-12) or isinstance(d, Hartogs) and d.contains(z, shrink=0.8)


def test_intersection():
    a, b = Ball(2, 1.0), Ball(2, 1.0, (1.5, 0))
    both = a.intersect(b)
    assert isinstance(both, Intersection)
    assert both.contains(np.array([0.75, 0]))
    assert not both.contains(np.array([0.0, 0]))
    assert a.intersect(Whole(2)) is a and Whole(2).intersect(a) is a
    with pytest.raises(DomainViolation):
        a.intersect(Ball(3, 1.0))
