"""Blow-up criterion, mass-energy dichotomy and Gaussian-data thresholds.

Three analytic tools live here.

* The variance criterion: a finite-variance solution with E > 0 blows up when

      V_t(0) / (ωM) < 4√2 f(E V(0) / (ωM)²),

  where f is the signed square root returned by :func:`f_threshold`.
* The ground-state dichotomy through the normalised functionals ME and G
  (intercritical) or E/E[Q] and ‖∇u‖/‖∇Q‖ (energy-critical).
* Closed-form observables of Gaussian data β exp(-γ|x|²/2) and the
  β-thresholds where each condition switches.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .eqparams import Criticality, EquationParams, classify
from .errors import DomainError, InvalidParams, NoRootInBracket, NonpositiveEnergy, WrongRegime
from .groundstate import critical_constants
from .riesz import sphere_area

SQRT32 = 4 * math.sqrt(2)
RADICAND_CLIP = 1e-14
BRACKET = (1e-3, 10.0)
BISECT_TOL = 1e-8


# -- the threshold function ---------------------------------------------------

def f_radicand(x, k: float):
    return 1 / (k * np.power(x, k)) + x - (1 + k) / k


def f_threshold(x: float, k: float) -> float:
    """Signed root of 1/(k x^k) + x - (1+k)/k: positive for x < 1, negative for x ≥ 1."""
    if not (x > 0) or not (k > 0):
        raise DomainError(f"need x > 0 and k > 0, got x={x}, k={k}")
    rad = float(f_radicand(x, k))
    if rad < 0:
        if rad < -RADICAND_CLIP * max(1.0, x, 1 / (k * x**k)):
            raise DomainError(f"negative radicand {rad} at x={x}, k={k}")
        rad = 0.0
    root = math.sqrt(rad)
    return root if x < 1 else -root


def omega_sq(params: EquationParams) -> float:
    N, p, b = params.N, params.p, params.b
    return N**2 * (N * (p - 2) + b - 2) / (8 * (N * (p - 2) + b))


# -- criterion inputs and mechanics ------------------------------------------

@dataclass(frozen=True)
class CriterionInput:
    mass: float
    energy: float
    variance0: float
    variance_rate0: float
    params: EquationParams

    def __post_init__(self):
        if not (self.mass > 0):
            raise InvalidParams(f"need mass > 0, got {self.mass}")
        if not (self.variance0 > 0 and math.isfinite(self.variance0)):
            raise InvalidParams(f"need 0 < V(0) < inf, got {self.variance0}")

    def as_dict(self) -> dict:
        return {
            "mass": self.mass,
            "energy": self.energy,
            "variance0": self.variance0,
            "variance_rate0": self.variance_rate0,
        }


@dataclass(frozen=True)
class MechanicsState:
    """Initial data of the reduced particle problem."""

    omega: float
    k: float
    alpha: float
    x0: float
    slope0: float
    u_tilde_max: float

    @property
    def c(self) -> float:
        a = self.alpha
        return (a + 1) * (2 * a + 1) / 2

    @property
    def v0(self) -> float:
        return self.x0 ** (self.alpha + 1)

    @property
    def vtilde_s0(self) -> float:
        return self.slope0 / SQRT32

    @property
    def v_s0(self) -> float:
        return (self.alpha + 1) * self.x0**self.alpha * self.vtilde_s0

    @property
    def f_value(self) -> float:
        return f_threshold(self.x0, self.k)

    def as_dict(self) -> dict:
        return {
            "omega": self.omega,
            "k": self.k,
            "alpha": self.alpha,
            "x0": self.x0,
            "slope0": self.slope0,
            "u_tilde_max": self.u_tilde_max,
        }


def u_tilde(v: float, alpha: float) -> float:
    a = alpha
    return (a + 1) / (2 * a) * v ** (2 * a / (a + 1)) - (a + 1) / (2 * a + 1) * v ** ((2 * a + 1) / (a + 1))


def u_tilde_max(alpha: float) -> float:
    return (alpha + 1) / (2 * alpha * (2 * alpha + 1))


def mechanics_state(inp: CriterionInput) -> MechanicsState:
    params = inp.params
    rep = classify(params)
    if rep.s_c <= 0:
        raise WrongRegime(f"criterion needs s_c > 0, got s_c={rep.s_c}")
    if not (inp.energy > 0):
        raise NonpositiveEnergy(f"criterion needs E > 0, got E={inp.energy}")
    omega = math.sqrt(omega_sq(params))
    wm = omega * inp.mass
    return MechanicsState(
        omega=omega,
        k=rep.k,
        alpha=rep.alpha,
        x0=inp.energy * inp.variance0 / wm**2,
        slope0=inp.variance_rate0 / wm,
        u_tilde_max=u_tilde_max(rep.alpha),
    )


def blowup_criterion(inp: CriterionInput) -> tuple:
    """Return ``(holds, state)`` for the variance criterion.

    Raises
    ------
    WrongRegime
        For s_c ≤ 0.
    NonpositiveEnergy
        For E ≤ 0; such data belong to the negative-energy clause.
    """
    st = mechanics_state(inp)
    return st.slope0 < SQRT32 * st.f_value, st


def particle_energy(state: MechanicsState) -> float:
    """𝓔(0) = v_s(0)²/(2c) + Ũ(v(0))."""
    return state.v_s0**2 / (2 * state.c) + u_tilde(state.v0, state.alpha)


def mechanics_conditions(state: MechanicsState) -> list:
    """Tags among "I", "II", "III" satisfied by the particle's initial data."""
    if not (state.x0 > 0 and state.alpha > 0):
        raise DomainError("mechanics conditions need x0 > 0 and alpha > 0")
    en = particle_energy(state)
    umax = state.u_tilde_max
    v0, vs = state.v0, state.v_s0
    tags = []
    if en < umax and v0 < 1:
        tags.append("I")
    if en > umax and vs < 0:
        tags.append("II")
    if en == umax and vs < 0 and v0 < 1:
        tags.append("III")
    return tags


# -- dichotomy -------------------------------------------------------------------

class Verdict(str, enum.Enum):
    GLOBAL = "global-scattering-regime"
    BLOWUP_REGIME = "blowup-regime"
    CRITERION = "criterion-blowup"
    NEGATIVE_ENERGY = "negative-energy-blowup"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class GroundStateData:
    """The three ground-state integrals the dichotomy needs."""

    mass_Q: float
    grad_sq_Q: float
    z_Q: float

    @classmethod
    def of(cls, ground) -> "GroundStateData":
        return cls(float(ground.mass_Q), float(ground.grad_sq_Q), float(ground.z_Q))


def _denominators(ground, params: EquationParams) -> tuple:
    """(M[Q]^{(1-s_c)/s_c} E[Q], ‖Q‖^{(1-s_c)/s_c} ‖∇Q‖) computed from the profile."""
    gd = GroundStateData.of(ground)
    s_c = params.s_c
    e = (1 - s_c) / s_c
    EQ = 0.5 * gd.grad_sq_Q - gd.z_Q / (2 * params.p)
    dg = gd.mass_Q ** (e / 2) * math.sqrt(gd.grad_sq_Q)
    return gd.mass_Q**e * EQ, dg


def me_g_functionals(mass: float, energy: float, grad_sq: float, ground, params: EquationParams) -> tuple:
    """Normalised (ME, G) for 0 < s_c < 1."""
    s_c = classify(params).s_c
    if not (0 < s_c < 1):
        raise WrongRegime(f"ME and G need 0 < s_c < 1, got s_c={s_c}")
    dme, dg = _denominators(ground, params)
    e = (1 - s_c) / s_c
    me = mass**e * energy / dme
    g = mass ** (e / 2) * math.sqrt(grad_sq) / dg
    return me, g


def critical_functionals(energy: float, grad_sq: float, params: EquationParams) -> tuple:
    """(E/E[Q], ‖∇u‖/‖∇Q‖) with the closed-form energy-critical constants."""
    if classify(params).criticality is not Criticality.ENERGY_CRITICAL:
        raise WrongRegime("critical functionals need s_c = 1")
    sc = critical_constants(params.N, params.b)
    return energy / sc.energy_Q_critical, math.sqrt(grad_sq / sc.grad_Q_sq_critical)


@dataclass
class ClassificationReport:
    me_value: float
    g_value: float
    verdict: Verdict
    clauses_fired: list
    mechanics: MechanicsState | None = None
    criterion: bool | None = None
    thresholds: dict = field(default_factory=dict)


def dichotomy_classify(
    inp: CriterionInput,
    grad_sq: float,
    ground=None,
    radial: bool = True,
    finite_variance: bool = True,
) -> ClassificationReport:
    """Ground-state dichotomy for 0 < s_c ≤ 1.

    The verdict is one of global-scattering-regime, blowup-regime or
    undetermined; the clause list records the branch used.
    """
    params = inp.params
    rep = classify(params)
    clauses = []
    if rep.criticality is Criticality.INTERCRITICAL:
        if ground is None:
            raise InvalidParams("intercritical dichotomy needs ground-state data")
        me, g = me_g_functionals(inp.mass, inp.energy, grad_sq, ground, params)
        tag = "thm5.1"
    elif rep.criticality is Criticality.ENERGY_CRITICAL:
        me, g = critical_functionals(inp.energy, grad_sq, params)
        tag = "thm5.2"
    else:
        raise WrongRegime(f"dichotomy unavailable for class {rep.criticality.value}")
    verdict = Verdict.UNDETERMINED
    if me < 1:
        if g < 1:
            verdict = Verdict.GLOBAL
            clauses.append(f"{tag}(1)")
        elif g > 1:
            if finite_variance or radial:
                verdict = Verdict.BLOWUP_REGIME
                clauses.append(f"{tag}(2a)" if tag == "thm5.1" else f"{tag}(2)")
            elif tag == "thm5.1":
                clauses.append("thm5.1(2b)")
    return ClassificationReport(me, g, verdict, clauses)


def classify_datum(
    inp: CriterionInput,
    grad_sq: float,
    ground=None,
    radial: bool = True,
    finite_variance: bool = True,
) -> ClassificationReport:
    """Merge every applicable clause into one report.

    Priority: negative energy, dichotomy global regime, variance criterion,
    dichotomy blow-up regime, otherwise undetermined.
    """
    rep = classify(inp.params)
    clauses = []
    me = g = math.nan
    dich = None
    if rep.criticality in (Criticality.INTERCRITICAL, Criticality.ENERGY_CRITICAL) and (
        ground is not None or rep.criticality is Criticality.ENERGY_CRITICAL
    ):
        dich = dichotomy_classify(inp, grad_sq, ground, radial, finite_variance)
        me, g = dich.me_value, dich.g_value
        clauses += dich.clauses_fired
    state = None
    crit = None
    if inp.energy <= 0:
        if rep.s_c > 0 and finite_variance:
            clauses.append("negative-energy")
        verdict = Verdict.NEGATIVE_ENERGY if "negative-energy" in clauses else Verdict.UNDETERMINED
    else:
        if rep.s_c > 0 and finite_variance:
            crit, state = blowup_criterion(inp)
            if crit:
                clauses.append("thm1.3")
        if dich is not None and dich.verdict is Verdict.GLOBAL:
            verdict = Verdict.GLOBAL
        elif crit:
            verdict = Verdict.CRITERION
        elif dich is not None and dich.verdict is Verdict.BLOWUP_REGIME:
            verdict = Verdict.BLOWUP_REGIME
        else:
            verdict = Verdict.UNDETERMINED
    return ClassificationReport(me, g, verdict, clauses, mechanics=state, criterion=crit)


def report_json(inp: CriterionInput, report: ClassificationReport, thresholds: dict | None = None) -> dict:
    st = report.mechanics
    params = inp.params
    omega = math.sqrt(omega_sq(params)) if omega_sq(params) > 0 else None
    nan_to_none = lambda v: None if v is None or (isinstance(v, float) and math.isnan(v)) else v
    return {
        "params": params.as_dict(),
        "inputs": inp.as_dict(),
        "me": nan_to_none(report.me_value),
        "g": nan_to_none(report.g_value),
        "omega": omega,
        "k": params.k,
        "x0": st.x0 if st else None,
        "f_value": st.f_value if st else None,
        "verdict": report.verdict.value,
        "clauses": list(report.clauses_fired),
        "thresholds": dict(thresholds or {}),
    }


# -- Gaussian data --------------------------------------------------------------

ENERGY_MODELS = ("exact", "tabulated")


def gaussian_z(beta: float, gamma: float, params: EquationParams) -> float:
    """Z of β exp(-γ|x|²/2) by Gaussian integration of the Riesz pairing."""
    N, p, b = params.N, params.p, params.b
    a = p * gamma / 2  # |u|^p = β^p exp(-a|x|²)
    pair = (math.pi / (2 * a)) ** (N / 2) * sphere_area(N) * math.gamma((N - b) / 2) / (2 * (a / 2) ** ((N - b) / 2))
    return beta ** (2 * p) * pair


def _displayed_z(beta: float, gamma: float, params: EquationParams):
    # 4d worked example as tabulated in the literature; half the exact value
    if (params.N, params.p, params.b) == (4, 3.0, 2.0):
        return 6 * math.pi**4 * beta**6 / (81 * gamma**3)
    return None


def gaussian_energy(beta: float, gamma: float, params: EquationParams, energy_model: str = "exact") -> float:
    if energy_model not in ENERGY_MODELS:
        raise InvalidParams(f"energy_model must be one of {ENERGY_MODELS}")
    G = gaussian_grad_sq(beta, gamma, params.N)
    Z = _displayed_z(beta, gamma, params) if energy_model == "tabulated" else None
    if Z is None:
        Z = gaussian_z(beta, gamma, params)
    return 0.5 * G - Z / (2 * params.p)


def gaussian_grad_sq(beta: float, gamma: float, N: int) -> float:
    return N * math.pi ** (N / 2) * beta**2 / (2 * gamma ** ((N - 2) / 2))


def gaussian_observables(beta: float, gamma: float, params: EquationParams, energy_model: str = "exact") -> tuple:
    """Closed-form ``(CriterionInput, ‖∇u‖²)`` for real Gaussian data."""
    if not (beta > 0 and gamma > 0):
        raise InvalidParams(f"need beta, gamma > 0, got {beta}, {gamma}")
    N = params.N
    M = beta**2 * (math.pi / gamma) ** (N / 2)
    V0 = beta**2 * N * math.pi ** (N / 2) / (2 * gamma ** (N / 2 + 1))
    E = gaussian_energy(beta, gamma, params, energy_model)
    return CriterionInput(M, E, V0, 0.0, params), gaussian_grad_sq(beta, gamma, N)


def scale_invariant_exponent(params: EquationParams) -> float:
    """e such that verdicts depend on β/γ^e only."""
    return params.scaling_exponent / 2


# -- thresholds --------------------------------------------------------------

THRESHOLD_KINDS = (
    "negative-energy",
    "criterion-blowup",
    "me-lower",
    "me-upper",
    "gradient",
    "energy-critical-lower",
    "energy-critical-upper",
)


def threshold_condition(kind: str, params: EquationParams, ground=None, energy_model: str = "exact"):
    """Scalar function of β (γ = 1) whose sign change marks the threshold."""
    rep = classify(params)

    def obs(beta):
        inp, G = gaussian_observables(beta, 1.0, params, energy_model)
        return inp, G

    if kind == "negative-energy":
        return lambda beta: obs(beta)[0].energy
    if kind == "criterion-blowup":
        w2 = omega_sq(params)
        if w2 <= 0:
            raise WrongRegime("criterion needs ω² > 0")

        def crit(beta):
            inp, _ = obs(beta)
            return inp.energy * inp.variance0 - w2 * inp.mass**2

        return crit
    if kind in ("me-lower", "me-upper"):
        if ground is None:
            raise InvalidParams("ME thresholds need ground-state data")

        def me(beta):
            inp, G = obs(beta)
            return me_g_functionals(inp.mass, inp.energy, G, ground, params)[0] - 1

        return me
    if kind == "gradient":
        if rep.criticality is Criticality.ENERGY_CRITICAL:
            return lambda beta: critical_functionals(*_eg(obs(beta)), params)[1] - 1
        if ground is None:
            raise InvalidParams("gradient threshold needs ground-state data")
        return lambda beta: me_g_functionals(obs(beta)[0].mass, obs(beta)[0].energy, obs(beta)[1], ground, params)[1] - 1
    if kind in ("energy-critical-lower", "energy-critical-upper"):
        return lambda beta: critical_functionals(*_eg(obs(beta)), params)[0] - 1
    raise InvalidParams(f"unknown threshold kind {kind!r}")


def _eg(pair):
    inp, G = pair
    return inp.energy, G


def threshold_solve(
    kind: str,
    params: EquationParams,
    ground=None,
    energy_model: str = "exact",
    bracket: tuple = BRACKET,
    tol: float = BISECT_TOL,
) -> float:
    """β/γ^e where the ``kind`` condition switches, by scan plus bisection.

    For the two-root kinds (``*-lower``/``*-upper``) the first and last sign
    changes in the bracket are returned respectively.
    """
    fn = threshold_condition(kind, params, ground, energy_model)
    xs = np.geomspace(bracket[0], bracket[1], 4001)
    vals = np.array([fn(x) for x in xs])
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if flips.size == 0:
        raise NoRootInBracket(f"{kind}: no sign change on {bracket}")
    i = flips[-1] if kind.endswith("-upper") else flips[0]
    if kind.endswith("-upper") and flips.size < 2:
        raise NoRootInBracket(f"{kind}: only one sign change on {bracket}")
    return float(optimize.bisect(fn, xs[i], xs[i + 1], xtol=tol * xs[i], rtol=4 * np.finfo(float).eps, maxiter=200))


def applicable_kinds(params: EquationParams, have_ground: bool = False) -> list:
    rep = classify(params)
    kinds = []
    if rep.s_c > 0:
        kinds += ["negative-energy", "criterion-blowup"]
    if rep.criticality is Criticality.INTERCRITICAL and have_ground:
        kinds += ["me-lower", "me-upper", "gradient"]
    if rep.criticality is Criticality.ENERGY_CRITICAL:
        kinds += ["energy-critical-lower", "energy-critical-upper", "gradient"]
    return kinds


def threshold_table(params: EquationParams, ground=None, energy_model: str = "exact") -> dict:
    """Every applicable β-threshold, keyed by kind."""
    return {
        kind: threshold_solve(kind, params, ground, energy_model)
        for kind in applicable_kinds(params, ground is not None)
    }
