import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import post_selected_mean_quad
from twotime.errors import GridTooNarrow, NearOrthogonalBoundaries, NormalizationError
from twotime.measurement import ObservableSpec, abl_probabilities, expectation_value
from twotime.qcore import Operator, StateVector, SubsystemLayout, random_hermitian, random_state
from twotime.weakmeas import (
    GaussianPointer,
    WeakScenario,
    couple_pointer,
    default_grid,
    grid_oracle,
    mixture_outer_on_grid,
    pointer_reduced_two_state,
    post_select_pointer,
    weak_value,
    weakness_residual,
)

R = 2 ** -0.5
SZ = ObservableSpec.pauli("z")
XP = [R, R]
PHI2_AW2 = [3 / np.sqrt(10), -1 / np.sqrt(10)]


def aw2(sigma):
    return WeakScenario(SZ, XP, PHI2_AW2, sigma)


def test_overlap_convention_against_grid():
    rng = np.random.default_rng(4)
    for _ in range(10):
        s = rng.uniform(0.5, 5)
        m1, m2 = rng.uniform(-3, 3, size=2)
        g1, g2 = GaussianPointer.single(m1, s), GaussianPointer.single(m2, s)
        q = np.linspace(min(m1, m2) - 12 * s, max(m1, m2) + 12 * s, 1 << 15)
        num = np.sum(g1.wavefunction(q) * g2.wavefunction(q)) * (q[1] - q[0])
        assert g1.inner(g2) == pytest.approx(num, abs=1e-8)
        assert g1.inner(g2) == pytest.approx(np.exp(-(m1 - m2) ** 2 / (8 * s * s)), abs=1e-15)
        dens = g1.wavefunction(q) ** 2
        h = q[1] - q[0]
        var = np.sum((q - m1) ** 2 * dens) * h
        assert np.sqrt(var) == pytest.approx(s, rel=1e-8)


def test_pointer_validation():
    with pytest.raises(ValueError):
        GaussianPointer([1, 2], [0.0], 1.0)
    with pytest.raises(ValueError):
        GaussianPointer([1], [0.0], 0.0)
    with pytest.raises(ValueError):
        GaussianPointer.single(0, 1).inner(GaussianPointer.single(0, 2))


def test_scenario_validation():
    with pytest.raises(NormalizationError) as exc:
        WeakScenario(SZ, [1, 1], XP, 1.0)
    assert exc.value.field == "c_initial"
    with pytest.raises(ValueError):
        WeakScenario(SZ, [1], XP, 1.0)
    with pytest.raises(NearOrthogonalBoundaries):
        WeakScenario(SZ, [1, 0], [0, 1], 1.0)


def test_weak_value_examples():
    s = WeakScenario(SZ, XP, XP, 1.0)
    assert weak_value(s) == pytest.approx(0, abs=1e-15)
    assert weak_value(aw2(1.0)) == pytest.approx(2, abs=1e-14)
    assert weak_value(aw2(1.0)).real > SZ.eigenvalues.max()
    imag = WeakScenario(SZ, XP, [R, 1j * R], 1.0)
    assert weak_value(imag) == pytest.approx(1j, abs=1e-14)


def test_weak_value_from_states():
    phi1 = StateVector.qubit("s", XP)
    phi2 = StateVector.qubit("s", PHI2_AW2)
    s = WeakScenario.from_states(SZ, phi1, phi2, 3.0)
    a = SZ.operator.entries
    want = np.vdot(phi2.amplitudes, a @ phi1.amplitudes) / np.vdot(phi2.amplitudes, phi1.amplitudes)
    assert weak_value(s) == pytest.approx(want, abs=1e-14)


def test_weak_value_equals_expectation_for_equal_boundaries(rng):
    lay = SubsystemLayout((("s", 3),))
    obs = ObservableSpec.from_operator(random_hermitian(lay, rng))
    for _ in range(100):
        psi = random_state(lay, rng)
        s = WeakScenario.from_states(obs, psi, psi, 1.0)
        aw = weak_value(s)
        assert abs(aw - expectation_value(psi, obs)) < 1e-12
        assert abs(aw.imag) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_weak_value_phase_invariant(seed, p1, p2):
    rng = np.random.default_rng(seed)
    lay = SubsystemLayout((("s", 3),))
    obs = ObservableSpec.from_operator(random_hermitian(lay, rng))
    a, b = random_state(lay, rng), random_state(lay, rng)
    base = weak_value(WeakScenario.from_states(obs, a, b, 1.0))
    sa = StateVector(lay, np.exp(1j * p1) * a.amplitudes)
    sb = StateVector(lay, np.exp(1j * p2) * b.amplitudes)
    assert weak_value(WeakScenario.from_states(obs, sa, sb, 1.0)) == pytest.approx(base, abs=1e-10)


def test_same_phase_sqrt_abl_form():
    """When every ``c_k c'_k*`` shares a phase, ``A_w`` is the sqrt-ABL weighted mean."""
    lay = SubsystemLayout((("s", 3),))
    obs = ObservableSpec.from_operator(Operator(lay, np.diag([2.0, 0.5, -1.0])))
    ci = np.array([0.6, 0.48, 0.64]) * np.exp(0.4j)
    cf = np.array([0.8, 0.36, 0.48])
    cf /= np.linalg.norm(cf)
    s = WeakScenario(obs, ci, cf, 1.0)
    sq = np.sqrt(abl_probabilities(s.state("initial"), s.state("final"), obs))
    assert weak_value(s) == pytest.approx(np.dot(obs.eigenvalues, sq) / sq.sum(), abs=1e-13)


def test_couple_pointer_examples():
    j = couple_pointer(WeakScenario(SZ, [0, 1], [R, R], 2.0))
    assert j.pointers[1].centers[0] == -1.0
    assert j.coefficients[0] == 0
    lay = SubsystemLayout.qubits("s")
    zero = ObservableSpec.from_operator(Operator(lay, np.zeros((2, 2))))
    j = couple_pointer(WeakScenario(zero, XP, XP, 1.0))
    assert all(p.centers[0] == 0.0 for p in j.pointers)
    j = couple_pointer(WeakScenario(SZ, XP, XP, 1.0))
    assert [p.centers[0] for p in j.pointers] == [1.0, -1.0]
    np.testing.assert_allclose(j.coefficients, [R, R])


def test_post_select_examples():
    p = post_select_pointer(couple_pointer(WeakScenario(SZ, XP, [0, 1], 1.0)), WeakScenario(SZ, XP, [0, 1], 1.0))
    assert p.norm == pytest.approx(1)
    assert abs(p.coefficients[0]) == 0 and p.centers[1] == -1.0
    s = WeakScenario(SZ, XP, XP, 3.0)
    p = post_select_pointer(couple_pointer(s), s)
    assert p.mean() == pytest.approx(0, abs=1e-15)
    assert grid_oracle(p).mean == pytest.approx(0, abs=1e-10)


def test_aw2_pointer_at_sigma_10():
    s = aw2(10.0)
    p = post_select_pointer(couple_pointer(s), s)
    g = grid_oracle(p)
    assert abs(g.peak - 2) < 0.1
    assert abs(g.mean - 2) < 0.1
    assert g.norm == pytest.approx(1, abs=1e-6)
    assert g.mean == pytest.approx(p.mean(), abs=1e-6)
    assert post_selected_mean_quad(p.coefficients, p.centers, p.sigma) == pytest.approx(p.mean(), abs=1e-3)


def test_residual_examples():
    s = WeakScenario(SZ, XP, [1, 0], 1.0)
    assert weakness_residual(s) == pytest.approx(0, abs=1e-15)
    vals = [weakness_residual(aw2(x)) for x in (1, 5, 20)]
    assert vals[0] > vals[1] > vals[2]
    same = WeakScenario(SZ, [0.6, 0.8], [0.6, 0.8], 1.0)
    assert weakness_residual(same.with_sigma(100)) < 1e-4
    assert weakness_residual(same.with_sigma(1000)) < weakness_residual(same.with_sigma(100))


def test_residual_nonincreasing_over_ladder(rng):
    for _ in range(5):
        a, b = random_state(SubsystemLayout.qubits("s"), rng), random_state(SubsystemLayout.qubits("s"), rng)
        s = WeakScenario.from_states(SZ, a, b, 1.0)
        vals = [weakness_residual(s.with_sigma(x)) for x in (1, 2, 5, 10, 20, 50, 100)]
        assert all(x >= y - 1e-15 for x, y in zip(vals, vals[1:]))


def test_same_phase_mean_converges_to_weak_value():
    lay = SubsystemLayout((("s", 3),))
    obs = ObservableSpec.from_operator(Operator(lay, np.diag([1.0, 0.0, -1.0])))
    ci = np.array([0.2, 0.4, 0.8])
    ci /= np.linalg.norm(ci)
    cf = np.array([0.9, 0.3, 0.1])
    cf /= np.linalg.norm(cf)
    s = WeakScenario(obs, ci, cf, 1.0)
    aw = weak_value(s).real
    errs = []
    for sig in (1, 5, 20):
        si = s.with_sigma(sig)
        errs.append(abs(post_select_pointer(couple_pointer(si), si).mean() - aw))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_complex_weak_value_pointer_reads_real_part():
    s = WeakScenario(SZ, XP, [R, 1j * R], 50.0)
    p = post_select_pointer(couple_pointer(s), s)
    assert p.mean() == pytest.approx(weak_value(s).real, abs=1e-3)


def test_grid_oracle_examples():
    g = grid_oracle(GaussianPointer.single(0.0, 1.0))
    assert g.mean == pytest.approx(0, abs=1e-12)
    assert g.norm == pytest.approx(1, abs=1e-6)
    two = GaussianPointer([1, 1], [-1.0, 1.0], 10.0)
    assert grid_oracle(two).mean == pytest.approx(0, abs=1e-10)
    with pytest.raises(GridTooNarrow):
        grid_oracle(GaussianPointer.single(0.0, 1.0), (-2.0, 2.0, 4096))
    with pytest.raises(ValueError):
        grid_oracle(GaussianPointer.single(0.0, 1.0), (-8.0, 8.0, 100))


def test_closed_form_mean_matches_grid(rng):
    for _ in range(10):
        k = int(rng.integers(1, 5))
        p = GaussianPointer(rng.normal(size=k) + 1j * rng.normal(size=k), rng.uniform(-3, 3, size=k),
                            rng.uniform(0.5, 4))
        assert grid_oracle(p).mean == pytest.approx(p.mean(), abs=1e-6)


def test_pointer_two_state_through_twostate_module():
    for s in (aw2(1.0), aw2(4.0), WeakScenario(SZ, [0.6, 0.8j], [R, R], 2.0)):
        ptr = post_select_pointer(couple_pointer(s), s)
        grid = default_grid(ptr, 8.0, 2048)
        red = pointer_reduced_two_state(s, grid)
        np.testing.assert_allclose(red, mixture_outer_on_grid(ptr, grid), atol=1e-10)
