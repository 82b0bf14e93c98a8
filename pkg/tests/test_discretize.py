"""Discrete norms, discretization constants, and the lower-bound audits."""

import math

import numpy as np
import pytest

from sampdisc import (
    DomainSpec,
    FunctionSystem,
    InvalidParameterError,
    PointSet,
    PremiseError,
    SizeGuardError,
    as_function,
    disc_constants,
    disc_norm,
    is_injective,
    khinchin_audit,
    khinchin_constant,
    lp_norm,
    make_fa,
    nikolskii_constant,
    rademacher_pth_moment,
    ril1_audit,
    rip3_bound,
    sample_vector,
    wrdi_transfer,
    wrdi_transfer_audit,
)
from conftest import eigen_reference, random_atomic_instance, sweep_max_ratio

TORUS = DomainSpec.torus(grid_size=1024)
UNIT = DomainSpec.unit_interval()


def trig(freqs):
    return FunctionSystem.trig([[k] for k in freqs])


def sine_span_instance():
    """Real span of an odd mode on a symmetric atomic domain."""
    atoms = np.array([0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
    dom = DomainSpec.finite_set(atoms)
    vals = np.sqrt(2.0) * np.sin(atoms)[None, :]
    return FunctionSystem.value_table(vals, atoms=atoms), dom


# ---------------------------------------------------------------------------
# Sampling and discrete norms


def test_sample_vector_of_constant():
    ps = PointSet(points=np.array([0.1, 0.5, 0.9]))
    vals = sample_vector(lambda x: np.ones_like(x), ps)
    assert np.allclose(vals, 1.0)


def test_sample_vector_of_hat():
    ps = PointSet(points=np.array([1 / 8, 3 / 8, 3 / 4]))
    vals = sample_vector(make_fa(0.25), ps)
    assert np.allclose(vals, [1.0, 0.5, 0.0])


def test_sample_vector_linearity():
    ps = PointSet(points=np.array([0.13, 0.77]))
    f, g = make_fa(0.25), make_fa(0.5)
    lhs = sample_vector(lambda x: 2.0 * f(x) + 3.0 * g(x), ps)
    rhs = 2.0 * sample_vector(f, ps) + 3.0 * sample_vector(g, ps)
    assert np.allclose(lhs, rhs)


def test_disc_norm_of_ones():
    for q in (1, 2, 7, np.inf):
        assert abs(disc_norm(np.ones(5), q) - 1.0) < 1e-15


def test_disc_norm_arithmetic():
    assert abs(disc_norm([3, 4], 2) - math.sqrt(12.5)) < 1e-12
    assert abs(disc_norm([3, 4], 2, weights=[1, 1]) - 5.0) < 1e-12


def test_disc_norm_rejects_negative_weights():
    with pytest.raises(InvalidParameterError):
        disc_norm([1.0, 2.0], 2, weights=[0.5, -0.1])


def test_pointset_weight_budget_enforced():
    with pytest.raises(InvalidParameterError):
        PointSet(points=np.array([0.0, 1.0]), weights=np.array([0.7, 0.7]),
                 weight_budget=1.0)


# ---------------------------------------------------------------------------
# Discretization constants


def test_dft_constants_are_one():
    system = trig([-1, 0, 1])
    ps = PointSet.equispaced(TORUS, 3)
    rep = disc_constants(system, TORUS, ps, 2, 2)
    assert abs(rep.d_left - 1) < 1e-9
    assert abs(rep.d_right - 1) < 1e-9
    assert rep.method == "eigen-exact"


def test_single_constant_function_any_exponents():
    dom = DomainSpec.finite_set(np.arange(5.0))
    system = FunctionSystem.value_table(np.ones((1, 5)), atoms=dom.atoms)
    ps = PointSet(points=np.array([2.0]))
    for p, q in ((1, 1), (2, 2), (3, 1), (2, np.inf)):
        rep = disc_constants(system, dom, ps, p, q)
        assert abs(rep.d_left - 1) < 1e-9
        assert abs(rep.d_right - 1) < 1e-9


def test_kernel_gives_infinite_left_constant():
    system, dom = sine_span_instance()
    ps = PointSet(points=np.array([0.0, np.pi]))  # the mode vanishes here
    rep = disc_constants(system, dom, ps, 2, 2)
    assert math.isinf(rep.d_left)
    assert rep.d_right < 1e-9


def test_replication_invariance():
    rng = np.random.default_rng(7)
    system, dom, ps = random_atomic_instance(rng, n_max=3, m_max=6, weighted=False)
    base = disc_constants(system, dom, ps, 2, 2)
    for k in (2, 3):
        rep = disc_constants(system, dom, ps.replicate(k), 2, 2)
        if math.isinf(base.d_left):
            assert math.isinf(rep.d_left)
        else:
            assert abs(rep.d_left - base.d_left) < 1e-10 * base.d_left
        assert abs(rep.d_right - base.d_right) < 1e-10 * max(base.d_right, 1e-30)


def test_padding_monotonicity():
    # repeating m' - m <= m of the points inflates the left constant by
    # at most 2^(1/q)
    rng = np.random.default_rng(11)
    q = 2
    for _ in range(5):
        system, dom, ps = random_atomic_instance(rng, n_max=3, m_max=5,
                                                 weighted=False)
        base = disc_constants(system, dom, ps, 2, q)
        if math.isinf(base.d_left):
            continue
        extra = int(rng.integers(1, ps.m + 1))
        padded = PointSet(points=np.concatenate([ps.points, ps.points[:extra]]))
        rep = disc_constants(system, dom, padded, 2, q)
        assert rep.d_left <= 2 ** (1 / q) * base.d_left * (1 + 1e-9)


def test_chaining_inequality():
    rng = np.random.default_rng(23)
    for _ in range(10):
        system, dom, ps = random_atomic_instance(rng, n_max=4, m_max=9)
        rep = disc_constants(system, dom, ps, 2, 2)
        if math.isinf(rep.d_left):
            continue
        assert rep.d_left * rep.d_right >= 1 - 1e-9


def test_optimizer_matches_eigen_reference():
    rng = np.random.default_rng(37)
    for _ in range(8):
        system, dom, ps = random_atomic_instance(rng, n_max=5, m_max=10,
                                                 weighted=bool(rng.integers(0, 2)))
        ref_l, ref_r = eigen_reference(system, dom, ps)
        rep = disc_constants(system, dom, ps, 2, 2, method="optimize",
                             restarts=24, seed=3)
        assert abs(rep.d_right - ref_r) <= 1e-6 * max(ref_r, 1e-12)
        if math.isinf(ref_l):
            assert math.isinf(rep.d_left)
        else:
            assert abs(rep.d_left - ref_l) <= 1e-6 * ref_l


def test_vertex_path_matches_sweep():
    # q = inf left constants: exact vertex enumeration versus coefficient sweep
    rng = np.random.default_rng(5)
    for _ in range(4):
        system, dom, ps = random_atomic_instance(rng, n_max=3, m_max=8,
                                                 complex_ok=False)
        if not is_injective(system, dom, ps):
            continue
        rep = disc_constants(system, dom, ps, 2, np.inf)
        assert "vertex-exact" in rep.method

        def ratio(c):
            f = as_function(c, system, dom)
            return lp_norm(c, system, dom, 2) / np.abs(f(ps.points)).max()

        swept, _ = sweep_max_ratio(ratio, system)
        assert rep.d_left >= swept - 1e-9
        assert rep.d_left <= swept * (1 + 1e-3)


def test_lacunary_rdi_scaling_consequence():
    # flat christoffel systems: N^(q/2) <= m (D_R M)^q for every point set
    system = FunctionSystem.lacunary([2, 4, 8])
    dom = DomainSpec.torus(grid_size=512)
    m_nik = nikolskii_constant(system, dom, 2, 4, seed=1).value
    rng = np.random.default_rng(2)
    q = 4.0
    for m in (3, 6, 12):
        ps = PointSet.random(dom, m, rng)
        rep = disc_constants(system, dom, ps, 4, q, seed=2)
        assert system.n ** (q / 2) <= m * (rep.d_right * m_nik) ** q * (1 + 1e-9)


def test_disc_report_serializes_infinity():
    system, dom = sine_span_instance()
    ps = PointSet(points=np.array([0.0, np.pi]))
    rep = disc_constants(system, dom, ps, 2, 2)
    blob = rep.to_json()
    assert blob["D_L"] == "inf"
    assert isinstance(blob["D_R"], float)


# ---------------------------------------------------------------------------
# Injectivity and the size bound


def test_injectivity_of_dft_points():
    assert is_injective(trig([-1, 0, 1]), TORUS, PointSet.equispaced(TORUS, 3))


def test_vanishing_samples_are_not_injective():
    system, dom = sine_span_instance()
    assert not is_injective(system, dom, PointSet(points=np.array([0.0, np.pi])))


def test_fewer_points_than_dimension_never_injective():
    system = trig([-1, 0, 1])
    assert not is_injective(system, TORUS, PointSet(points=np.array([0.3, 0.9])))


def test_rip3_bound_values():
    assert abs(rip3_bound(1 / 8, 2, 2, 1.0) - 4.0) < 1e-12
    assert abs(rip3_bound(1 / 32, 2, 2, 1.0) - 16.0) < 1e-12
    assert rip3_bound(1 / 8, 2, 2, 1e9) < 1e-12  # vacuous for huge constants


def test_rip3_bound_parameter_guard():
    with pytest.raises(InvalidParameterError):
        rip3_bound(0.3, 2, 2, 1.0)


def test_rip3_bound_holds_on_injective_sets():
    dom = UNIT
    rng = np.random.default_rng(17)
    for k in (3, 5):
        a = 2.0 ** (-k)
        system = FunctionSystem.hat_family([a, a / 2])
        pts = np.concatenate([rng.uniform(0, a / 2, 1), rng.uniform(0, 1, 5)])
        ps = PointSet(points=pts)
        assert is_injective(system, dom, ps)
        rep = disc_constants(system, dom, ps, 2, 2)
        assert ps.m >= rip3_bound(a, 2, 2, rep.d_right) * (1 - 1e-9)


# ---------------------------------------------------------------------------
# Pointwise weighted-right audit


def test_ril1_one_dimensional_equality():
    rng = np.random.default_rng(3)
    atoms = np.arange(6.0)
    dom = DomainSpec.finite_set(atoms)
    system = FunctionSystem.value_table(rng.normal(size=(1, 6)), atoms=atoms)
    lam = 1.7
    ps = PointSet(points=np.array([atoms[2]]), weights=np.array([lam]))
    rep = ril1_audit(system, dom, ps, p=4, q=2)
    # a single point with the minimal constant collapses the chain to equality
    assert abs(rep.lhs[0] - rep.bound) < 1e-8 * rep.bound
    assert rep.ok


def test_ril1_uniform_trig_sanity():
    system = trig([-1, 0, 1])
    m = 5
    ps = PointSet(points=PointSet.equispaced(TORUS, m).points,
                  weights=np.full(m, 1.0 / m))
    rep = ril1_audit(system, TORUS, ps, p=2, q=2)
    # christoffel is N, weights 1/m: lambda_j N <= 1 requires N <= m
    assert np.all(rep.lhs <= 1.0 + 1e-12)
    assert rep.ok


def test_ril1_weight_scaling_homogeneity():
    rng = np.random.default_rng(9)
    system, dom, ps = random_atomic_instance(rng, n_max=2, m_max=4,
                                             complex_ok=False, weighted=True)
    rep1 = ril1_audit(system, dom, ps, p=4, q=2, seed=1)
    t = 3.0
    ps2 = PointSet(points=ps.points, weights=t * ps.weights)
    rep2 = ril1_audit(system, dom, ps2, p=4, q=2, seed=1)
    assert np.allclose(rep2.lhs, t * rep1.lhs)
    assert abs(rep2.bound - t * rep1.bound) < 1e-6 * rep2.bound


def test_ril1_requires_weights():
    system = trig([0, 1])
    with pytest.raises(PremiseError):
        ril1_audit(system, TORUS, PointSet.equispaced(TORUS, 4), p=4, q=2)


# ---------------------------------------------------------------------------
# Khinchin enumeration


def test_khinchin_constant_values():
    assert abs(khinchin_constant(2) - 1.0) < 1e-12
    assert abs(khinchin_constant(4) - math.sqrt(2) * (3 / 4) ** 0.25) < 1e-12


def test_khinchin_constant_dominates_enumeration():
    rng = np.random.default_rng(4)
    for p in (2.0, 4.0, 6.0):
        kp = khinchin_constant(p)
        for _ in range(20):
            n = int(rng.integers(1, 11))
            a = rng.normal(size=(n, 1))
            mom = rademacher_pth_moment(a, np.ones(1), p)
            assert mom ** (1 / p) <= kp * np.linalg.norm(a) * (1 + 1e-12)


def test_rademacher_fourth_moment_identity():
    # exact enumeration equals 3 (sum a^2)^2 - 2 sum a^4
    rng = np.random.default_rng(6)
    for n in (1, 2, 5, 9):
        a = rng.normal(size=(n, 1))
        mom = rademacher_pth_moment(a, np.ones(1), 4.0)
        expect = 3 * np.sum(a**2) ** 2 - 2 * np.sum(a**4)
        assert abs(mom - expect) < 1e-12 * max(expect, 1.0)


def test_rademacher_two_term_fourth_moment():
    a, b = 0.8, -1.3
    mom = rademacher_pth_moment(np.array([[a], [b]]), np.ones(1), 4.0)
    assert abs(mom - (a**4 + 6 * a**2 * b**2 + b**4)) < 1e-12


def test_khinchin_audit_one_dimensional_equality():
    atoms = np.arange(4.0)
    dom = DomainSpec.finite_set(atoms)
    system = FunctionSystem.value_table(np.array([[1.0, -2.0, 0.5, 1.5]]),
                                        atoms=atoms)
    ps = PointSet(points=atoms[[0, 2]], weights=np.array([0.4, 0.9]))
    rep = khinchin_audit(system, dom, ps, p=2.0)
    # N = 1, p = 2: the random-sign average is the weighted christoffel sum
    assert abs(rep.average - rep.khinchin_rhs) < 1e-12 * rep.khinchin_rhs
    assert rep.ok


def test_khinchin_audit_guard():
    atoms = np.arange(14.0)
    dom = DomainSpec.finite_set(atoms)
    system = FunctionSystem.value_table(np.eye(14) + 0.01, atoms=atoms)
    ps = PointSet(points=atoms[:13])
    with pytest.raises(SizeGuardError):
        khinchin_audit(system, dom, ps, p=4.0)


def test_khinchin_audit_random_instances():
    rng = np.random.default_rng(12)
    for _ in range(5):
        system, dom, ps = random_atomic_instance(rng, n_max=4, m_max=6,
                                                 weighted=True)
        if not is_injective(system, dom, ps):
            continue
        rep = khinchin_audit(system, dom, ps, p=4.0, restarts=24, seed=8)
        assert rep.ok, rep.slacks


# ---------------------------------------------------------------------------
# Weighted-right transfer


def test_wrdi_transfer_values():
    assert wrdi_transfer(2.0, 1.5, 4, 2) == 3.0
    assert wrdi_transfer(2.0, 1.0, 4, 2) == 2.0
    with pytest.raises(InvalidParameterError):
        wrdi_transfer(2.0, 1.5, 4, 1.5)
    with pytest.raises(InvalidParameterError):
        wrdi_transfer(2.0, 1.5, 4, 4)


def test_wrdi_transfer_on_trig_instance():
    system = trig([-1, 0, 1])
    m = 5
    ps = PointSet(points=PointSet.equispaced(TORUS, m).points,
                  weights=np.full(m, 1.0 / m))
    rep = wrdi_transfer_audit(system, TORUS, ps, p=4, r=2, restarts=24, seed=2)
    assert rep.measured_r <= rep.transferred + 1e-9
    assert rep.ok


def test_wrdi_transfer_needs_probability_weights():
    system = trig([0, 1])
    ps = PointSet(points=np.array([0.1, 0.7]), weights=np.array([0.9, 0.9]))
    with pytest.raises(PremiseError):
        wrdi_transfer_audit(system, TORUS, ps, p=4, r=2)
