"""Function spaces: evaluation, Gram matrices, norms, approximation."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sampdisc import (
    DegenerateSystemError,
    DomainMismatchError,
    DomainSpec,
    FunctionSystem,
    InvalidParameterError,
    as_function,
    best_approx,
    christoffel,
    eval_system,
    export_value_table,
    gram,
    lp_norm,
    make_fa,
    nikolskii_constant,
    orthonormalize,
)
from conftest import sweep_max_ratio

TORUS = DomainSpec.torus(grid_size=1024)
UNIT = DomainSpec.unit_interval()


def trig(freqs):
    return FunctionSystem.trig([[k] for k in freqs])


# ---------------------------------------------------------------------------
# Domains


def test_atomic_masses_must_sum_to_one():
    with pytest.raises(InvalidParameterError):
        DomainSpec.finite_set([0.0, 1.0], [0.5, 0.6])


def test_grid_size_minimum():
    with pytest.raises(InvalidParameterError):
        DomainSpec.torus(grid_size=1)


def test_unit_interval_grid_is_odd():
    dom = DomainSpec.unit_interval(grid_size=100)
    assert dom.grid_size % 2 == 1


def test_quadrature_weights_sum_to_one():
    for dom in (TORUS, UNIT, DomainSpec.finite_set([0, 1, 2], [0.2, 0.3, 0.5])):
        _, w = dom.quadrature()
        assert abs(w.sum() - 1.0) < 1e-12


def test_domain_json_roundtrip():
    for dom in (TORUS, UNIT, DomainSpec.finite_set([0.0, 2.0], [0.25, 0.75])):
        again = DomainSpec.from_json(dom.to_json())
        assert again.kind == dom.kind


# ---------------------------------------------------------------------------
# Evaluation


def test_constant_mode_evaluates_to_one():
    table = eval_system(trig([0]), np.array([0.3, 2.0, 5.9]))
    assert np.allclose(table, 1.0)


def test_first_mode_at_pi():
    table = eval_system(trig([1]), np.array([np.pi]))
    assert abs(table[0, 0] - (-1.0)) < 1e-12


def test_hat_value_on_downslope():
    table = eval_system(FunctionSystem.hat_family([0.25]), np.array([3 / 8]))
    assert abs(table[0, 0] - 0.5) < 1e-15


def test_hat_outside_domain_raises():
    with pytest.raises(DomainMismatchError):
        eval_system(FunctionSystem.hat_family([0.25]), np.array([1.5]))


def test_value_table_needs_matching_atom():
    dom = DomainSpec.finite_set([0.0, 1.0])
    system = FunctionSystem.value_table(np.eye(2), atoms=dom.atoms)
    with pytest.raises(DomainMismatchError):
        eval_system(system, np.array([0.5]), dom)


def test_make_fa_examples():
    f = make_fa(0.25)
    assert f(0.25) == 1.0
    assert f(0.5) == 0.0
    with pytest.raises(InvalidParameterError):
        make_fa(0.75)


@given(st.sampled_from([0.5, 0.25, 0.125, 1 / 16]),
       st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0]))
def test_hat_pnorm_closed_form(a, p):
    # integral of the plateau function to the p equals a (p + 2) / (p + 1);
    # fractional p loses Simpson's full order at the kink, hence 1e-8
    system = FunctionSystem.hat_family([a])
    val = lp_norm([1.0], system, UNIT, p)
    assert abs(val**p - a * (p + 2) / (p + 1)) < 1e-8


# ---------------------------------------------------------------------------
# Gram and orthonormalization


def test_trig_gram_is_identity():
    g = gram(trig([-2, -1, 0, 1, 2]), TORUS)
    assert np.abs(g - np.eye(5)).max() < 1e-12


def test_hat_pair_gram_closed_form():
    g = gram(FunctionSystem.hat_family([0.25, 0.125]), UNIT)
    expected = np.array([[1 / 3, 3 / 16], [3 / 16, 1 / 6]])
    assert np.abs(g - expected).max() < 1e-12


def test_atomic_identity_gram():
    dom = DomainSpec.finite_set([0.0, 1.0, 2.0])
    system = FunctionSystem.value_table(np.eye(3), atoms=dom.atoms)
    g = gram(system, dom)
    assert np.abs(g - np.eye(3) / 3).max() < 1e-15


def test_degenerate_system_raises_with_eigenvalue():
    dom = DomainSpec.finite_set([0.0, 1.0, 2.0])
    vals = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0]])
    with pytest.raises(DegenerateSystemError) as err:
        gram(FunctionSystem.value_table(vals, atoms=dom.atoms), dom)
    assert err.value.smallest is not None


def test_orthonormalize_trig_is_identity():
    ob = orthonormalize(trig([-1, 0, 1]), TORUS)
    assert np.abs(ob.transform - np.eye(3)).max() < 1e-12


def test_orthonormalize_scaling():
    # doubling an orthonormal system halves the change of basis
    dom = DomainSpec.finite_set(np.arange(4.0))
    system = FunctionSystem.value_table(2.0 * np.sqrt(4) * np.eye(4), atoms=dom.atoms)
    ob = orthonormalize(system, dom)
    assert np.abs(ob.transform - np.eye(4) / 2.0).max() < 1e-12


def test_orthonormalized_gram_is_identity():
    system = FunctionSystem.hat_family([0.25, 0.125])
    ob = orthonormalize(system, UNIT)
    nodes, w = UNIT.quadrature()
    table = ob.eval(nodes)
    gu = (table * w) @ table.conj().T
    assert np.abs(gu - np.eye(2)).max() < 1e-9


# ---------------------------------------------------------------------------
# Norms


def test_unimodular_mode_has_unit_norms():
    system = trig([3])
    for p in (1, 2, 3.5, np.inf):
        assert abs(lp_norm([1.0], system, TORUS, p) - 1.0) < 1e-9


def test_hat_l2_norm():
    val = lp_norm([1.0], FunctionSystem.hat_family([0.25]), UNIT, 2)
    assert abs(val - math.sqrt(1 / 3)) < 1e-12


def test_hat_sup_norm():
    val = lp_norm([1.0], FunctionSystem.hat_family([0.25]), UNIT, np.inf)
    assert abs(val - 1.0) < 1e-12


def test_parseval_on_torus():
    rng = np.random.default_rng(0)
    c = rng.normal(size=5) + 1j * rng.normal(size=5)
    val = lp_norm(c, trig([-2, -1, 0, 1, 2]), TORUS, 2)
    assert abs(val - np.linalg.norm(c)) < 1e-12


def test_norm_monotonicity():
    rng = np.random.default_rng(1)
    system = FunctionSystem.hat_family([0.5, 0.25, 0.125])
    for _ in range(10):
        c = rng.normal(size=3)
        vals = [lp_norm(c, system, UNIT, p) for p in (1, 2, 4, np.inf)]
        for lo, hi in zip(vals, vals[1:]):
            assert lo <= hi + 1e-8


def test_norm_homogeneity():
    system = FunctionSystem.hat_family([0.25, 0.125])
    c = np.array([0.3, -1.2])
    for p in (1, 2, 3, np.inf):
        v1 = lp_norm(c, system, UNIT, p)
        v2 = lp_norm(2.5 * c, system, UNIT, p)
        assert abs(v2 - 2.5 * v1) < 1e-9


def test_invalid_p_rejected():
    with pytest.raises(InvalidParameterError):
        lp_norm([1.0], trig([0]), TORUS, 0.5)


# ---------------------------------------------------------------------------
# Christoffel values


def test_trig_christoffel_is_dimension():
    ob = orthonormalize(trig([-1, 0, 1]), TORUS)
    chi = christoffel(ob, np.array([0.0, 1.1, 4.4]))
    assert np.abs(chi - 3.0).max() < 1e-12


def test_odd_mode_christoffel_vanishes_at_zero():
    # orthonormal odd mode on a symmetric atomic domain vanishes at 0
    atoms = np.array([0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
    dom = DomainSpec.finite_set(atoms)
    vals = np.sqrt(2.0) * np.sin(atoms)[None, :]
    system = FunctionSystem.value_table(vals, atoms=atoms)
    ob = orthonormalize(system, dom)
    assert christoffel(ob, 0.0) < 1e-20


def test_christoffel_unitary_invariance():
    system = FunctionSystem.hat_family([0.5, 0.25])
    ob = orthonormalize(system, UNIT)
    theta = 0.7
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    ob2 = type(ob)(transform=rot @ ob.transform, system=system, domain=UNIT)
    pts = np.array([0.1, 0.3, 0.9])
    assert np.abs(christoffel(ob, pts) - christoffel(ob2, pts)).max() < 1e-12


def test_christoffel_duality_against_sweep(rng):
    # sqrt(christoffel) equals the largest point value on the L2 unit ball
    for _ in range(3):
        n, k = 3, 12
        atoms = np.sort(rng.uniform(0, 5, size=k))
        masses = rng.uniform(0.3, 1.0, size=k)
        masses /= masses.sum()
        dom = DomainSpec.finite_set(atoms, masses)
        system = FunctionSystem.value_table(rng.normal(size=(n, k)), atoms=atoms)
        ob = orthonormalize(system, dom)
        w = atoms[rng.integers(0, k)]
        chi = christoffel(ob, w)

        def ratio(c):
            f = as_function(c, system, dom)
            return abs(f(np.array([w]))[0]) / lp_norm(c, system, dom, 2)

        swept, _ = sweep_max_ratio(ratio, system)
        assert abs(math.sqrt(chi) - swept) < 1e-3 * max(swept, 1e-9)


# ---------------------------------------------------------------------------
# Best approximation


def test_projection_of_orthogonal_mode_is_zero():
    system = trig([0, 1])
    f = as_function(np.array([1.0]), trig([2]), TORUS)
    res = best_approx(f, system, TORUS, 2)
    assert np.abs(res.coeffs).max() < 1e-9
    assert abs(res.distance - 1.0) < 1e-9


def test_minimax_fit_of_hat_by_constants():
    # the plateau function has range [0, 1]; its best uniform constant is 1/2
    f = make_fa(0.25)
    atoms = np.linspace(0, 1, 513)
    adom = DomainSpec.finite_set(atoms)
    csys = FunctionSystem.value_table(np.ones((1, len(atoms))), atoms=atoms)
    res = best_approx(f, csys, adom, np.inf)
    assert abs(res.coeffs[0] - 0.5) < 1e-9
    assert abs(res.distance - 0.5) < 1e-9


def test_best_approx_idempotent_on_members():
    system = FunctionSystem.hat_family([0.5, 0.25])
    c = np.array([0.7, -0.2])
    f = as_function(c, system, UNIT)
    for p in (2, 4, np.inf):
        res = best_approx(f, system, UNIT, p)
        assert np.abs(res.coeffs - c).max() < 1e-7
        assert res.distance < 1e-8


def test_projection_residual_is_orthogonal():
    system = FunctionSystem.hat_family([0.5, 0.25])
    f = make_fa(0.125)
    res = best_approx(f, system, UNIT, 2)
    nodes, w = UNIT.quadrature()
    table = eval_system(system, nodes, UNIT)
    resid = f(nodes) - res.coeffs @ table
    inner = (table * w) @ np.conj(resid)
    assert np.abs(inner).max() < 1e-9


# ---------------------------------------------------------------------------
# Nikol'skii constants


def test_trig_two_inf_constant_is_sqrt_n():
    res = nikolskii_constant(trig([-1, 0, 1]), TORUS, 2, np.inf)
    assert abs(res.value - math.sqrt(3)) < 1e-9
    assert res.method == "christoffel-exact"


def test_equal_exponents_give_one():
    res = nikolskii_constant(trig([0, 1]), TORUS, 3, 3)
    assert res.value == 1.0


def test_hat_two_inf_constant():
    res = nikolskii_constant(FunctionSystem.hat_family([0.25]), UNIT, 2, np.inf)
    assert abs(res.value - math.sqrt(3)) < 1e-9


def test_invalid_exponent_order_rejected():
    with pytest.raises(InvalidParameterError):
        nikolskii_constant(trig([0]), TORUS, 4, 2)


def test_nikolskii_matches_sweep_oracle(rng):
    # multi-restart optimizer versus brute coefficient enumeration
    for _ in range(3):
        n, k = 2, 10
        atoms = np.sort(rng.uniform(0, 3, size=k))
        masses = rng.uniform(0.3, 1.0, size=k)
        masses /= masses.sum()
        dom = DomainSpec.finite_set(atoms, masses)
        system = FunctionSystem.value_table(rng.normal(size=(n, k)), atoms=atoms)
        res = nikolskii_constant(system, dom, 2, 4, seed=5)

        def ratio(c):
            return lp_norm(c, system, dom, 4) / lp_norm(c, system, dom, 2)

        swept, _ = sweep_max_ratio(ratio, system)
        assert res.value >= swept - 1e-9
        assert res.value <= swept * (1 + 1e-4)


def test_value_table_csv_export(tmp_path):
    dom = DomainSpec.finite_set([0.0, 1.0, 2.0])
    system = FunctionSystem.value_table(np.arange(6.0).reshape(2, 3), atoms=dom.atoms)
    path = tmp_path / "table.csv"
    export_value_table(system, dom, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "point,g0,g1"
    assert len(lines) == 4


def test_system_json_roundtrip():
    for system in (trig([-1, 0, 2]), FunctionSystem.lacunary([2, 4, 8]),
                   FunctionSystem.hat_family([0.5, 0.125]),
                   FunctionSystem.value_table(np.eye(2), atoms=[0.0, 1.0])):
        again = FunctionSystem.from_json(system.to_json())
        assert again.kind == system.kind
        assert again.n == system.n


def test_lacunary_validation():
    system = FunctionSystem.lacunary([3, 6, 13])
    assert abs(system.ratio - 2.0) < 1e-12  # minimal consecutive ratio
    with pytest.raises(InvalidParameterError):
        FunctionSystem.lacunary([4, 4, 8])  # not strictly increasing
    with pytest.raises(InvalidParameterError):
        FunctionSystem.lacunary([4, 2])
