import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ghartree.criteria import (
    CriterionInput,
    GroundStateData,
    MechanicsState,
    Verdict,
    blowup_criterion,
    classify_datum,
    dichotomy_classify,
    f_radicand,
    f_threshold,
    gaussian_energy,
    gaussian_observables,
    gaussian_z,
    me_g_functionals,
    mechanics_conditions,
    mechanics_state,
    omega_sq,
    particle_energy,
    report_json,
    scale_invariant_exponent,
    threshold_condition,
    threshold_solve,
    u_tilde,
    u_tilde_max,
)
from ghartree.eqparams import EquationParams
from ghartree.errors import DomainError, InvalidParams, NoRootInBracket, NonpositiveEnergy, WrongRegime
from ghartree.grid import ComplexField, Grid
from ghartree.observables import observe
from ghartree.radial import radial_integral, radial_potential

P331 = EquationParams(3, 3, 1)
P351 = EquationParams(3, 5, 1)
P371 = EquationParams(3, 7, 1)
P432 = EquationParams(4, 3, 2)
# converged n=128, L=12 ground-state integrals for (3, 3, 1)
GROUND = GroundStateData(5.23394886230268, 2 * 5.23394886230268, 3 * 5.23394886230268)


# -- f -----------------------------------------------------------------------

@pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 4.0, 14 / 3])
def test_f_vanishes_at_one(k):
    assert f_threshold(1.0, k) == 0.0


def test_f_hand_values():
    assert f_threshold(4.0, 1.0) == pytest.approx(-1.5, abs=1e-15)
    assert f_threshold(0.25, 1.0) == pytest.approx(1.5, abs=1e-15)


def test_f_domain():
    for x, k in ((0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)):
        with pytest.raises(DomainError):
            f_threshold(x, k)


@pytest.mark.parametrize("k", [0.25, 1.0, 2.0, 4.0, 14 / 3])
def test_radicand_nonnegative_on_log_grid(k):
    x = np.geomspace(1e-3, 1e3, 20001)
    rad = f_radicand(x, k)
    assert np.min(rad) >= -1e-14
    assert np.all(rad[np.abs(x - 1) > 1e-3] > 0)


@given(k=st.floats(0.05, 10))
def test_f_continuous_at_one(k):
    assert abs(f_threshold(1 - 1e-7, k)) < 1e-5
    assert abs(f_threshold(1 + 1e-7, k)) < 1e-5
    assert f_threshold(1 - 1e-3, k) > 0 > f_threshold(1 + 1e-3, k)


# -- criterion and mechanics ---------------------------------------------------------

def test_omega_worked():
    assert math.sqrt(omega_sq(P331)) == pytest.approx(0.75, rel=1e-15)
    assert omega_sq(P351) == pytest.approx(0.9, rel=1e-15)
    assert omega_sq(P432) == pytest.approx(4 / 3, rel=1e-15)


def test_real_data_reduces_to_variance_bound():
    rng = np.random.default_rng(0)
    w2 = omega_sq(P331)
    for _ in range(500):
        M, E, V = rng.uniform(0.1, 10, 3)
        holds, _ = blowup_criterion(CriterionInput(M, E, V, 0.0, P331))
        assert holds == (V < w2 * M**2 / E)


def test_criterion_regime_errors():
    with pytest.raises(WrongRegime):
        blowup_criterion(CriterionInput(1, 1, 1, 0, EquationParams(3, 2, 2)))
    with pytest.raises(NonpositiveEnergy):
        blowup_criterion(CriterionInput(1, -1, 1, 0, P331))
    with pytest.raises(InvalidParams):
        CriterionInput(0, 1, 1, 0, P331)


def test_u_tilde_max():
    assert u_tilde_max(0.5) == pytest.approx(0.75)
    for a in (0.3, 0.5, 1.0, 2.0):
        assert u_tilde(1.0, a) == pytest.approx(u_tilde_max(a), rel=1e-14)
        v = np.linspace(0.05, 3, 200)
        assert np.max(u_tilde(v, a)) <= u_tilde_max(a) + 1e-14


def test_mechanics_boundary_case():
    st_ = MechanicsState(omega=0.75, k=1.0, alpha=0.5, x0=1.0, slope0=0.0, u_tilde_max=0.75)
    assert particle_energy(st_) == pytest.approx(st_.u_tilde_max, rel=1e-14)
    assert mechanics_conditions(st_) == []


@given(
    x=st.floats(0.01, 20),
    vs=st.floats(-5, 5),
    alpha=st.floats(0.1, 3),
)
def test_energy_equivalence(x, vs, alpha):
    """𝓔 < Ũ_max ⟺ Ṽ_s² < 1/(2αṼ^{2α}) + Ṽ - (2α+1)/(2α)."""
    st_ = MechanicsState(0.75, 2 * alpha, alpha, x, vs * 4 * math.sqrt(2), u_tilde_max(alpha))
    en = particle_energy(st_)
    rhs = 1 / (2 * alpha * x ** (2 * alpha)) + x - (2 * alpha + 1) / (2 * alpha)
    assume(abs(en - st_.u_tilde_max) > 1e-9 * max(1, en) and abs(vs * vs - rhs) > 1e-9 * max(1, abs(rhs)))
    assert (en < st_.u_tilde_max) == (vs * vs < rhs)


def _scaled(inp, lam):
    P = inp.params
    a = P.scaling_exponent
    N = P.N
    return CriterionInput(
        inp.mass * lam ** (2 * a - N),
        inp.energy * lam ** (2 * a + 2 - N),
        inp.variance0 * lam ** (2 * a - N - 2),
        inp.variance_rate0 * lam ** (2 * a - N),
        P,
    )


@given(
    M=st.floats(0.1, 10),
    E=st.floats(0.01, 10),
    V=st.floats(0.1, 10),
    Vt=st.floats(-10, 10),
)
def test_scaling_invariance(M, E, V, Vt):
    inp = CriterionInput(M, E, V, Vt, P331)
    base, s0 = blowup_criterion(inp)
    for lam in (0.5, 2.0):
        got, s1 = blowup_criterion(_scaled(inp, lam))
        assert s1.x0 == pytest.approx(s0.x0, rel=1e-12)
        assert s1.slope0 == pytest.approx(s0.slope0, rel=1e-12, abs=1e-14)
        if abs(s0.slope0 - 4 * math.sqrt(2) * s0.f_value) > 1e-9:
            assert got == base


def test_mechanics_union_matches_f_sampled():
    rng = np.random.default_rng(11)
    for params in (P331, P351, P371, P432):
        for _ in range(300):
            M, E, V = rng.uniform(0.1, 5, 3)
            Vt = rng.uniform(-20, 20)
            holds, st_ = blowup_criterion(CriterionInput(M, E, V, Vt, params))
            assert holds == bool(mechanics_conditions(st_))


# -- Gaussian data -------------------------------------------------------------

def test_gaussian_mass_closed_form():
    inp, G = gaussian_observables(1.0, 1.0, P331)
    assert inp.mass == pytest.approx(math.pi**1.5, rel=1e-15)
    assert inp.variance_rate0 == 0.0


@pytest.mark.parametrize("params,power,num", [(P331, 4, 3), (P351, 8, 5), (P371, 12, 7)])
def test_gaussian_energy_displays_3d(params, power, num):
    for beta, gamma in ((0.7, 1.0), (1.2, 2.5), (0.3, 0.4)):
        disp = math.pi**1.5 / 4 * beta**2 / gamma**0.5 * (3 - 16 * math.pi / num**3.5 * beta**power / gamma**2)
        assert gaussian_energy(beta, gamma, params) == pytest.approx(disp, rel=1e-13)


def test_gaussian_energy_4d_models():
    beta, gamma = 1.1, 1.3
    disp = math.pi**2 * beta**2 / gamma * (1 - math.pi**2 / 81 * beta**4 / gamma**2)
    assert gaussian_energy(beta, gamma, P432, "tabulated") == pytest.approx(disp, rel=1e-13)
    exact = math.pi**2 * beta**2 / gamma * (1 - 2 * math.pi**2 / 81 * beta**4 / gamma**2)
    assert gaussian_energy(beta, gamma, P432, "exact") == pytest.approx(exact, rel=1e-13)
    with pytest.raises(InvalidParams):
        gaussian_energy(beta, gamma, P432, "approx")


@pytest.mark.parametrize("params", [P331, P432, EquationParams(3, 4, 1.5)])
def test_gaussian_z_radial_quadrature(params):
    beta, gamma = 0.9, 1.4
    N, p, b = params.N, params.p, params.b
    if not (b == N - 2 or N == 3):
        pytest.skip("radial potential needs b = N - 2 or N = 3")
    g = lambda s: (beta * math.exp(-gamma * s * s / 2)) ** p
    z = radial_integral(lambda s: radial_potential(g, s, N, b) * g(s), N)
    assert gaussian_z(beta, gamma, params) == pytest.approx(z, rel=1e-8)


@pytest.mark.parametrize("params", [P331, EquationParams(3, 4, 1.5), EquationParams(2, 3, 1)])
def test_gaussian_observables_on_grid(params):
    g = Grid(params.N, 48 if params.N == 3 else 96, 8.0)
    o = observe(ComplexField.gaussian(g, 0.9, 1.4), params)
    inp, G = gaussian_observables(0.9, 1.4, params)
    assert o.mass == pytest.approx(inp.mass, rel=1e-10)
    assert o.variance == pytest.approx(inp.variance0, rel=1e-10)
    assert o.grad_norm_sq == pytest.approx(G, rel=1e-10)
    assert o.energy == pytest.approx(inp.energy, rel=1e-8)


def test_scale_invariant_exponents():
    assert scale_invariant_exponent(P331) == 0.5
    assert scale_invariant_exponent(P351) == 0.25
    assert scale_invariant_exponent(P371) == pytest.approx(1 / 6)
    assert scale_invariant_exponent(P432) == 0.5


@given(beta=st.floats(0.2, 2.0), gamma=st.floats(0.2, 5.0))
@settings(max_examples=30)
def test_verdict_depends_on_scale_invariant_variable(beta, gamma):
    for params in (P331, P351, P371):
        e = scale_invariant_exponent(params)
        a = classify_datum(*gaussian_observables(beta, gamma, params), ground=GROUND if params is P331 else None)
        b = classify_datum(*gaussian_observables(beta / gamma**e, 1.0, params), ground=GROUND if params is P331 else None)
        assert a.verdict == b.verdict


# -- thresholds ----------------------------------------------------------------

def test_closed_form_thresholds():
    assert threshold_solve("negative-energy", P331) == pytest.approx(3 ** (9 / 8) / (2 * math.pi**0.25), rel=1e-8)
    assert threshold_solve("criterion-blowup", P331) == pytest.approx(
        3 ** (9 / 8) / (2**1.25 * math.pi**0.25), rel=1e-8
    )
    assert threshold_solve("negative-energy", P351) == pytest.approx(
        5 ** (7 / 16) * 3 ** (1 / 8) / (2**0.5 * math.pi ** (1 / 8)), rel=1e-8
    )
    assert threshold_solve("criterion-blowup", P371) == pytest.approx(
        3 ** (1 / 12) * 7 ** (7 / 24) / (2 ** (7 / 12) * math.pi ** (1 / 12)), rel=1e-8
    )
    assert threshold_solve("gradient", P331, GROUND) == pytest.approx(
        2**0.5 / (3**0.25 * math.pi**0.75) * math.sqrt(GROUND.mass_Q), rel=1e-8
    )


@pytest.mark.parametrize(
    "params,kind,ground",
    [
        (P331, "negative-energy", None),
        (P331, "criterion-blowup", None),
        (P331, "me-lower", GROUND),
        (P331, "me-upper", GROUND),
        (P331, "gradient", GROUND),
        (P351, "energy-critical-lower", None),
        (P351, "energy-critical-upper", None),
        (P432, "gradient", None),
        (P371, "negative-energy", None),
    ],
)
def test_threshold_separates(params, kind, ground):
    t = threshold_solve(kind, params, ground)
    fn = threshold_condition(kind, params, ground)
    assert np.sign(fn(t * (1 - 1e-3))) != np.sign(fn(t * (1 + 1e-3)))


@pytest.mark.parametrize("params,model", [(P331, "exact"), (P351, "exact"), (P371, "exact"), (P432, "tabulated"), (P432, "exact")])
def test_negative_energy_above_criterion(params, model):
    assert threshold_solve("negative-energy", params, energy_model=model) > threshold_solve(
        "criterion-blowup", params, energy_model=model
    )


def test_no_root():
    with pytest.raises(NoRootInBracket):
        threshold_solve("negative-energy", P331, bracket=(0.01, 0.5))


def test_unknown_kind():
    with pytest.raises(InvalidParams):
        threshold_condition("sideways", P331)


# -- dichotomy ----------------------------------------------------------------------

def test_me_g_at_ground_state():
    E_Q = 0.5 * GROUND.grad_sq_Q - GROUND.z_Q / 6
    me, g = me_g_functionals(GROUND.mass_Q, E_Q, GROUND.grad_sq_Q, GROUND, P331)
    assert me == pytest.approx(1.0, rel=1e-14) and g == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(WrongRegime):
        me_g_functionals(1, 1, 1, GROUND, P351)


@pytest.mark.parametrize(
    "beta,verdict",
    [
        (0.5, Verdict.GLOBAL),
        (1.0, Verdict.UNDETERMINED),
        (1.1, Verdict.CRITERION),
        (1.2, Verdict.CRITERION),
        (1.35, Verdict.NEGATIVE_ENERGY),
    ],
)
def test_subcritical_bands(beta, verdict):
    rep = classify_datum(*gaussian_observables(beta, 1.0, P331), ground=GROUND)
    assert rep.verdict is verdict


def test_energy_critical_bands():
    assert classify_datum(*gaussian_observables(0.7, 1.0, P351)).verdict is Verdict.GLOBAL
    assert classify_datum(*gaussian_observables(1.0, 1.0, P351)).verdict is Verdict.UNDETERMINED
    assert classify_datum(*gaussian_observables(1.3, 1.0, P351)).verdict is Verdict.CRITERION


def test_supercritical_only_blowup_clauses():
    assert classify_datum(*gaussian_observables(0.5, 1.0, P371)).verdict is Verdict.UNDETERMINED
    assert classify_datum(*gaussian_observables(1.2, 1.0, P371)).verdict is Verdict.CRITERION
    assert classify_datum(*gaussian_observables(1.4, 1.0, P371)).verdict is Verdict.NEGATIVE_ENERGY
    with pytest.raises(WrongRegime):
        dichotomy_classify(*gaussian_observables(1.0, 1.0, P371))


def test_infinite_variance_clause():
    # G > 1 and ME < 1 only happens above β_ME^+, where nonradial infinite-variance data give 2(b)
    inp, G = gaussian_observables(1.19, 1.0, P331)
    rep = dichotomy_classify(inp, G, GROUND, radial=False, finite_variance=False)
    assert rep.verdict is Verdict.UNDETERMINED and rep.clauses_fired == ["thm5.1(2b)"]
    rep = dichotomy_classify(inp, G, GROUND)
    assert rep.verdict is Verdict.BLOWUP_REGIME


def test_report_schema():
    inp, G = gaussian_observables(0.5, 1.0, P331)
    rep = classify_datum(inp, G, GROUND)
    js = report_json(inp, rep, {"gradient": 1.04})
    assert set(js) == {"params", "inputs", "me", "g", "omega", "k", "x0", "f_value", "verdict", "clauses", "thresholds"}
    assert js["verdict"] == "global-scattering-regime"
