import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import A
from rearrange.canonical import is_periodic, order
from rearrange.diagram import (
    apply_cell,
    conjugate,
    identity,
    make_diagram,
    power,
    random_element,
)
from rearrange.expansion import INTERIOR, CellUnion, is_prefix, vertex_in_cell
from rearrange.system import BUILTIN_NAMES, builtin
from rearrange.wandering import (
    WANDERING,
    WEAKLY,
    WanderingCertificate,
    WanderingError,
    cell_inside_interior,
    fixed_cells,
    image_certificate,
    verification_log,
    verify_wandering,
    wandering_cell,
)


def test_x_certificate(x):
    c = wandering_cell(x, verify=20)
    assert c.kind == WANDERING
    assert (c.e, c.e_star, c.n, c.f) == (A("t.2"), A("t.2.2"), 1, A("t.2.1"))
    assert c.set == CellUnion.of("t.2.1", kind=INTERIOR)
    assert c.verified_to == 20


def test_x_first_power_image(x):
    assert apply_cell(x, CellUnion.of("t.2.1")).addresses == (A("t.2.2.1"),)


def test_r_certificate(r):
    c = wandering_cell(r, verify=4)
    assert (c.kind, c.edge, c.orbit_length, c.order) == (WEAKLY, A("t.1"), 2, 2)
    assert verification_log(r, c, 2) == [(1, "disjoint"), (2, "fixed"), (-1, "disjoint"), (-2, "fixed")]


def test_identity_certificate(circle):
    c = wandering_cell(identity(circle), verify=3)
    assert c.kind == WEAKLY and c.edge == A("t")
    assert all(st == "fixed" for _, st in verification_log(identity(circle), c, 3))


def test_fake_certificate_fails(x):
    fake = WanderingCertificate(WANDERING, CellUnion.of("t.2.2", kind=INTERIOR))
    assert not verify_wandering(x, fake, 3)
    assert verification_log(x, fake, 1)[0] == (1, "fail")


def test_certificate_invariants():
    with pytest.raises(WanderingError):
        WanderingCertificate(WEAKLY, CellUnion.of("t"), orbit_length=3, order=4)
    with pytest.raises(WanderingError):
        WanderingCertificate("sometimes", CellUnion.of("t"))


def test_power_arithmetic(x):
    c = wandering_cell(x)
    for q in range(1, 6):
        image = apply_cell(power(x, q * c.n), CellUnion((c.e,)))
        assert all(is_prefix(c.e_star, a) for a in image)


def test_cell_inside_interior():
    circle = builtin("circle_T")
    assert cell_inside_interior(circle, A("t.2.1")) == A("t.2.1.1.2")
    assert cell_inside_interior(circle, A("t")) == A("t")
    interval = builtin("interval_F")
    assert cell_inside_interior(interval, A("t")) == A("t")
    assert cell_inside_interior(interval, A("t.1")) == A("t.1.1")
    # in the cantor system the two halves never touch
    cantor = builtin("cantor_V")
    assert cell_inside_interior(cantor, A("t.2.1")) == A("t.2.1")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_cell_inside_interior_avoids_gluing_points(name):
    sys = builtin(name)
    E = [l for e in sys.base.edges for l in sys.children((e.id,))]
    for f in E:
        a = cell_inside_interior(sys, f)
        assert is_prefix(f, a)
        # no endpoint of C(f) shared with a cell outside C(f) lies in C(a)
        for g in E:
            if g == f:
                continue
            for v in set(sys.endpoints(f)) & set(sys.endpoints(g)):
                assert not vertex_in_cell(sys, v, a)


def test_fixed_cells(circle, r):
    assert fixed_cells(identity(circle)).addresses == (A("t"),)
    assert fixed_cells(r).addresses == ()
    g = make_diagram(
        circle,
        [A("t.1"), A("t.2.1"), A("t.2.2.1"), A("t.2.2.2")],
        [A("t.1"), A("t.2.1.1"), A("t.2.1.2"), A("t.2.2")],
        {A("t.1"): A("t.1"), A("t.2.1"): A("t.2.1.1"), A("t.2.2.1"): A("t.2.1.2"), A("t.2.2.2"): A("t.2.2")},
    )
    assert A("t.1") in fixed_cells(g).addresses


systems = st.sampled_from(BUILTIN_NAMES)


@settings(max_examples=60, deadline=None)
@given(systems, st.integers(0, 100_000))
def test_certificates_verify(name, seed):
    g = random_element(builtin(name), random.Random(seed), 3)
    c = wandering_cell(g)
    bound = max(20, 2 * order(g)) if is_periodic(g) else 20
    assert verify_wandering(g, c, bound)
    if c.kind == WANDERING:
        assert not is_periodic(g)
        assert all(not power(g, m).is_identity() for m in range(1, 6))


@settings(max_examples=40, deadline=None)
@given(systems, st.integers(0, 100_000))
def test_conjugation_covariance(name, seed):
    rng = random.Random(seed)
    sys = builtin(name)
    g, h = random_element(sys, rng, 3), random_element(sys, rng, 2)
    c = wandering_cell(g)
    assert verify_wandering(conjugate(g, h), image_certificate(c, h), 10)
