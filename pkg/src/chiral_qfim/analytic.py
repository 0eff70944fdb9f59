"""Closed-form sensitivity catalog for the supported input states.

Every quantity the numerical pipeline produces has a closed-form
counterpart here: SLDs, QFIM entries, Cramér–Rao bounds, covariances,
intensity-measurement sensitivities, the |1₊,1₋⟩ benchmark bound, and the
projective fidelity fringes.  The comparison harness in ``experiments``
checks the two against each other; where a closed-form entry is known to
disagree with the numerical pipeline, the report carries a note and the
numerical value is treated as authoritative.

Phase convention: output coherences carry e^{−iΔ} (one-photon) and
e^{−2iΔ} (two-photon) factors, matching the channel module's
e^{−i(φ₊n₊+φ₋n₋)} rotation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    CHIRAL_NAMES,
    ChiralParams,
    DomainError,
    apply_channel_kraus,
    channel_alpha_derivative,
    channel_phi_derivative,
)
from .estimation import SldMatrix
from .fock import (
    NOON_HV,
    SINGLE_PHOTON_H,
    FockSpace,
    TwoModeState,
    coherent_product_state,
    hv_to_pm_amplitudes,
    mode_operators,
)

COHERENT = "coherent"
FOCK_ONE_PLUS_ONE_MINUS = "fock_one_plus_one_minus"
_KINDS = (COHERENT, SINGLE_PHOTON_H, NOON_HV, FOCK_ONE_PLUS_ONE_MINUS)

QFIM_BOUND = "qfim_bound"
INTENSITY_MEASUREMENT = "intensity_measurement"
FIDELITY_FRINGE = "fidelity_fringe"
_METHODS = (QFIM_BOUND, INTENSITY_MEASUREMENT, FIDELITY_FRINGE)

# smallest absorption at which the 1/α factors of the NOON catalog are
# evaluated directly; the α = 0 endpoint is reported as the limit instead
NOON_ALPHA_FLOOR = 1e-6

COVARIANCE_SIGN_NOTE = (
    "cov(x_d, x_s) is catalogued as +X_d/N0; the numerical pipeline yields"
    " -X_d/N0, and comparisons treat the numerical sign as authoritative"
)


@dataclass(frozen=True)
class InputStateKind:
    """One of the four supported input states, with its mean photon number.

    Coherent inputs carry their H/V amplitudes; the quantum inputs are
    parameter-free.  Use the classmethod constructors.
    """

    kind: str
    amp_h: complex = 0j
    amp_v: complex = 0j

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown input state kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == COHERENT:
            for amp in (self.amp_h, self.amp_v):
                if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                    raise ValueError("coherent amplitudes must be finite")
        elif self.amp_h != 0j or self.amp_v != 0j:
            raise ValueError(f"amplitudes only apply to the coherent kind, not {self.kind!r}")

    @classmethod
    def coherent(cls, amp_h: complex, amp_v: complex = 0j) -> "InputStateKind":
        return cls(kind=COHERENT, amp_h=complex(amp_h), amp_v=complex(amp_v))

    @classmethod
    def single_photon_h(cls) -> "InputStateKind":
        return cls(kind=SINGLE_PHOTON_H)

    @classmethod
    def noon_hv(cls) -> "InputStateKind":
        return cls(kind=NOON_HV)

    @classmethod
    def fock_one_plus_one_minus(cls) -> "InputStateKind":
        return cls(kind=FOCK_ONE_PLUS_ONE_MINUS)

    @property
    def mean_photons(self) -> float:
        if self.kind == COHERENT:
            return abs(self.amp_h) ** 2 + abs(self.amp_v) ** 2
        if self.kind == SINGLE_PHOTON_H:
            return 1.0
        return 2.0

    @property
    def zero_relative_phase(self) -> bool:
        """True when the H and V amplitudes have no relative phase."""
        if self.kind != COHERENT:
            return True
        cross = self.amp_h.conjugate() * self.amp_v
        return cross.imag == 0.0 and cross.real >= 0.0


def default_param_labels(kind: InputStateKind | str) -> tuple:
    """Parameters estimated by default for each input state.

    Σ is excluded for the quantum inputs, whose outputs carry no
    photon-number coherence and hence no Σ dependence.
    """
    name = kind.kind if isinstance(kind, InputStateKind) else kind
    if name not in _KINDS:
        raise ValueError(f"unknown input state kind {name!r}; expected one of {_KINDS}")
    if name == COHERENT:
        return CHIRAL_NAMES
    return ("x_d", "x_s", "delta")


@dataclass(frozen=True)
class SensitivityReport:
    """A set of per-parameter sensitivities from one method."""

    method: str
    values: dict
    covariances: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {_METHODS}")
        for p, v in self.values.items():
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"sensitivity for {p!r} must be finite and nonnegative, got {v!r}")

    def value(self, param: str) -> float:
        return self.values[param]


def _check_domain(params: ChiralParams) -> float:
    d = params.eta_plus * params.eta_minus
    if d <= 0.0:
        raise DomainError(f"(1-X_s)^2 - X_d^2 = {d!r} must be positive")
    return d


# ---------------------------------------------------------------------------
# coherent input
# ---------------------------------------------------------------------------


def coherent_bounds(params: ChiralParams, n0: float) -> SensitivityReport:
    """Closed-form bound matrix entries for a coherent input.

    The covariance of the two absorption estimates is catalogued with the
    positive sign; the numerical pipeline yields the negative of it (see
    the attached note).
    """
    if n0 <= 0.0:
        raise DomainError(f"mean photon number must be positive, got {n0!r}")
    d = _check_domain(params)
    x_d, x_s = params.x_d, params.x_s
    absorb = math.sqrt((1.0 - x_s) / n0)
    phase = math.sqrt((1.0 - x_s) / (n0 * d))
    return SensitivityReport(
        method=QFIM_BOUND,
        values={"x_d": absorb, "x_s": absorb, "delta": phase, "sigma": phase},
        covariances={
            ("x_d", "x_s"): x_d / n0,
            ("delta", "sigma"): x_d / (n0 * d),
        },
        notes=(COVARIANCE_SIGN_NOTE,),
    )


def coherent_intensity_sensitivities(
    params: ChiralParams,
    n0: float | None = None,
    *,
    kind: InputStateKind | None = None,
) -> SensitivityReport:
    """Error-propagation sensitivities of mode-intensity measurements.

    The N₀ decomposition underlying the closed form requires the H and V
    amplitudes to share a phase, so a coherent ``kind`` with a relative
    phase is rejected.  Equals ``coherent_bounds`` on X_d and X_s at every
    parameter point (the intensity measurement saturates the bound).
    """
    if kind is not None:
        if kind.kind != COHERENT:
            raise ValueError(f"expected a coherent input kind, got {kind.kind!r}")
        if not kind.zero_relative_phase:
            raise DomainError(
                "intensity sensitivities require zero relative phase between"
                " the H and V amplitudes"
            )
        if n0 is not None and not math.isclose(n0, kind.mean_photons):
            raise ValueError(f"n0 {n0!r} contradicts the kind's mean photon number")
        n0 = kind.mean_photons
    if n0 is None:
        raise ValueError("either n0 or kind is required")
    if n0 <= 0.0:
        raise DomainError(f"mean photon number must be positive, got {n0!r}")
    value = math.sqrt((1.0 - params.x_s) / n0)
    return SensitivityReport(
        method=INTENSITY_MEASUREMENT, values={"x_d": value, "x_s": value}
    )


def coherent_slds(
    params: ChiralParams, n0: float, space: FockSpace, truncation_budget: float = 1e-10
) -> list:
    """Matrix realizations of the four coherent-state SLDs on ``space``.

    L_d and L_s are number-operator combinations; L_Δ and L_Σ are
    commutator realizations −i[G, ρ_out] with G = n₊ − n₋ and n₊ + n₋
    (the output stays pure, so the pure-state identity L = 2 ∂ρ applies).
    Each matrix carries its defining-equation residual, evaluated against
    the exact channel derivatives, and agrees with the numerical solver on
    all support-coupled pairs.
    """
    if n0 <= 0.0:
        raise DomainError(f"mean photon number must be positive, got {n0!r}")
    amp_p, amp_m = hv_to_pm_amplitudes(math.sqrt(n0), 0.0)
    state = coherent_product_state(space, amp_p, amp_m, truncation_budget=truncation_budget)
    output = apply_channel_kraus(state, params)
    ops = mode_operators(space)
    eye = np.eye(space.dim)
    eta_p, eta_m = params.eta_plus, params.eta_minus

    l_d = ops.n_minus / eta_m - ops.n_plus / eta_p
    l_s = -ops.n_plus / eta_p - ops.n_minus / eta_m + n0 * eye
    rho = output.rho
    g_delta = (ops.n_plus - ops.n_minus).astype(np.complex128)
    g_sigma = (ops.n_plus + ops.n_minus).astype(np.complex128)
    l_delta = -1j * (g_delta @ rho - rho @ g_delta)
    l_sigma = -1j * (g_sigma @ rho - rho @ g_sigma)

    d_alpha_p = channel_alpha_derivative(state, params, "plus")
    d_alpha_m = channel_alpha_derivative(state, params, "minus")
    derivs = {
        "x_d": d_alpha_p - d_alpha_m,
        "x_s": d_alpha_p + d_alpha_m,
        "delta": 0.5 * (
            channel_phi_derivative(output, "plus") - channel_phi_derivative(output, "minus")
        ),
        "sigma": 0.5 * (
            channel_phi_derivative(output, "plus") + channel_phi_derivative(output, "minus")
        ),
    }
    support_rank = int(np.sum(np.linalg.eigvalsh(rho) > 1e-10))
    notes = {
        "x_d": "the transmitted-fraction orientation is the negative of this operator",
        "x_s": "",
        "delta": "commutator prefactor fixed by the defining equation",
        "sigma": "commutator prefactor fixed by the defining equation",
    }
    slds = []
    for param, l_mat in (
        ("x_d", l_d.astype(np.complex128)),
        ("x_s", l_s.astype(np.complex128)),
        ("delta", l_delta),
        ("sigma", l_sigma),
    ):
        resid = derivs[param] - 0.5 * (l_mat @ rho + rho @ l_mat)
        slds.append(
            SldMatrix(
                param=param,
                L=l_mat,
                support_rank=support_rank,
                residual=float(np.max(np.abs(resid))),
                meta={"realization": "closed_form", "note": notes[param]},
            )
        )
    return slds


# ---------------------------------------------------------------------------
# single-photon input
# ---------------------------------------------------------------------------


class SinglePhotonCatalog(tuple):
    """(rho_support, slds, qfim, bounds, intensity) over {|1,0⟩,|0,1⟩,|0,0⟩}.

    At X_s = 0 the vacuum weight vanishes and the entries containing 1/X_s
    diverge; there ``slds`` and ``qfim`` are None while the bounds, whose
    closed forms stay finite, carry a note.
    """

    __slots__ = ()

    def __new__(cls, rho_support, slds, qfim, bounds, intensity):
        return super().__new__(cls, (rho_support, slds, qfim, bounds, intensity))

    rho_support = property(lambda self: self[0])
    slds = property(lambda self: self[1])
    qfim = property(lambda self: self[2])
    bounds = property(lambda self: self[3])
    intensity = property(lambda self: self[4])
    qfim_params = ("x_d", "x_s", "delta")


def single_photon_catalog(params: ChiralParams) -> SinglePhotonCatalog:
    """Closed-form state, SLDs, QFIM, and bounds for the |1_H⟩ input.

    The support basis is {|1,0⟩, |0,1⟩, |0,0⟩} and the QFIM rows follow
    ``qfim_params`` = (x_d, x_s, delta); Σ carries no information for this
    input and is omitted.  Intensity measurement saturates the absorption
    bounds, so ``intensity`` equals ``bounds`` on X_d and X_s.
    """
    d = _check_domain(params)
    eta_p, eta_m = params.eta_plus, params.eta_minus
    x_d, x_s, delta = params.x_d, params.x_s, params.delta

    coherence = 0.5 * math.sqrt(d) * cmath.exp(-1j * delta)
    rho_support = np.array(
        [
            [0.5 * eta_p, coherence, 0.0],
            [coherence.conjugate(), 0.5 * eta_m, 0.0],
            [0.0, 0.0, x_s],
        ],
        dtype=np.complex128,
    )
    values = {
        "x_d": math.sqrt(1.0 - x_s - x_d**2),
        "x_s": math.sqrt(x_s * (1.0 - x_s)),
        "delta": math.sqrt((eta_p + eta_m) / (2.0 * eta_p * eta_m)),
    }
    intensity = SensitivityReport(
        method=INTENSITY_MEASUREMENT,
        values={"x_d": values["x_d"], "x_s": values["x_s"]},
    )
    if x_s == 0.0:
        bounds = SensitivityReport(
            method=QFIM_BOUND,
            values=values,
            covariances={("x_d", "x_s"): 0.0},
            notes=(
                "lossless point: the vacuum weight vanishes, the entries"
                " containing 1/X_s diverge, and no finite QFIM or L_s"
                " realization exists; the bounds are their finite limits",
            ),
        )
        return SinglePhotonCatalog(rho_support, None, None, bounds, intensity)

    l_d = np.diag([-1.0 / eta_p, 1.0 / eta_m, 0.0]).astype(np.complex128)
    l_s = np.diag([-1.0 / eta_p, -1.0 / eta_m, 1.0 / x_s]).astype(np.complex128)
    z = -2j * math.sqrt(d) * cmath.exp(-1j * delta) / (eta_p + eta_m)
    l_delta = np.zeros((3, 3), dtype=np.complex128)
    l_delta[0, 1] = z
    l_delta[1, 0] = z.conjugate()
    slds = {"x_d": l_d, "x_s": l_s, "delta": l_delta}

    f_dd = (1.0 - x_s) / d
    f_ss = (1.0 - x_s) / d + 1.0 / x_s
    f_ds = x_d / d
    f_delta = 2.0 * eta_p * eta_m / (eta_p + eta_m)
    qfim = np.array(
        [[f_dd, f_ds, 0.0], [f_ds, f_ss, 0.0], [0.0, 0.0, f_delta]]
    )

    bounds = SensitivityReport(
        method=QFIM_BOUND,
        values=values,
        covariances={("x_d", "x_s"): -x_s * x_d},
    )
    return SinglePhotonCatalog(rho_support, slds, qfim, bounds, intensity)


# ---------------------------------------------------------------------------
# NOON input
# ---------------------------------------------------------------------------


class NoonCatalog(tuple):
    """(rho_support, slds, qfim, bounds, intensity) over the two-photon support.

    Support basis order: {|2,0⟩, |0,2⟩, |1,0⟩, |0,1⟩, |0,0⟩}.  At the
    lossless endpoint α₊ = α₋ = 0 the entries containing 1/α diverge;
    there ``slds`` and ``qfim`` are None and the absorption bounds carry
    their one-sided limits (0), with a note.
    """

    __slots__ = ()

    def __new__(cls, rho_support, slds, qfim, bounds, intensity):
        return super().__new__(cls, (rho_support, slds, qfim, bounds, intensity))

    rho_support = property(lambda self: self[0])
    slds = property(lambda self: self[1])
    qfim = property(lambda self: self[2])
    bounds = property(lambda self: self[3])
    intensity = property(lambda self: self[4])
    qfim_params = ("x_d", "x_s", "delta")


def _noon_rho_support(params: ChiralParams) -> np.ndarray:
    eta_p, eta_m = params.eta_plus, params.eta_minus
    a_p, a_m = params.alpha_plus, params.alpha_minus
    cross = -0.5 * eta_p * eta_m * cmath.exp(-2j * params.delta)
    rho = np.zeros((5, 5), dtype=np.complex128)
    rho[0, 0] = 0.5 * eta_p**2
    rho[1, 1] = 0.5 * eta_m**2
    rho[0, 1] = cross
    rho[1, 0] = cross.conjugate()
    rho[2, 2] = a_p * eta_p
    rho[3, 3] = a_m * eta_m
    rho[4, 4] = 0.5 * (a_p**2 + a_m**2)
    return rho


def noon_intensity_sensitivities(params: ChiralParams) -> SensitivityReport:
    """Intensity-measurement sensitivities for the |1_H,1_V⟩ input.

    Defined on the whole parameter domain; unlike the catalogued QFIM
    these contain no 1/α factors.
    """
    eta_p, eta_m = params.eta_plus, params.eta_minus
    return SensitivityReport(
        method=INTENSITY_MEASUREMENT,
        values={
            "x_d": 0.5 * math.sqrt(eta_p + eta_m + 2.0 * eta_p * eta_m),
            "x_s": 0.5 * math.sqrt(eta_p + eta_m - 2.0 * eta_p * eta_m),
        },
    )


def noon_catalog(params: ChiralParams) -> NoonCatalog:
    """Closed-form state, SLDs, QFIM, and bounds for the |1_H,1_V⟩ input.

    The 1/α entries are evaluated for α± ≥ 1e-6; the exact endpoint
    α₊ = α₋ = 0 reports the limiting bounds instead (δX_d, δX_s → 0,
    δΔ → 1/2), and absorptions inside (0, 1e-6) or vanishing in only one
    mode are rejected.  The SLD diagonals are undefined at X_s = X_d = 0,
    so SLD output is refused at that exact point.
    """
    _check_domain(params)
    a_p, a_m = params.alpha_plus, params.alpha_minus
    eta_p, eta_m = params.eta_plus, params.eta_minus
    x_d, x_s, delta = params.x_d, params.x_s, params.delta
    rho_support = _noon_rho_support(params)
    intensity = noon_intensity_sensitivities(params)
    f_delta = 8.0 * eta_p**2 * eta_m**2 / (eta_p**2 + eta_m**2)

    if a_p == 0.0 and a_m == 0.0:
        bounds = SensitivityReport(
            method=QFIM_BOUND,
            values={"x_d": 0.0, "x_s": 0.0, "delta": 1.0 / math.sqrt(f_delta)},
            notes=(
                "lossless endpoint: the absorption entries diverge and the"
                " absorption bounds are reported as their one-sided limits 0;"
                " no finite QFIM or SLD realization exists here",
            ),
        )
        return NoonCatalog(rho_support, None, None, bounds, intensity)
    if min(a_p, a_m) < NOON_ALPHA_FLOOR:
        raise DomainError(
            f"the 1/alpha entries are evaluated for alpha >= {NOON_ALPHA_FLOOR};"
            f" got alpha+ = {a_p!r}, alpha- = {a_m!r} (the exact lossless"
            " endpoint alpha+ = alpha- = 0 is reported as a limit instead)"
        )

    s = x_s**2 + x_d**2
    q_p = (1.0 - 2.0 * a_p) ** 2 / (a_p * eta_p)
    q_m = (1.0 - 2.0 * a_m) ** 2 / (a_m * eta_m)
    f_dd = 4.0 + q_p + q_m + 4.0 * x_d**2 / s
    f_ss = 4.0 + q_p + q_m + 4.0 * x_s**2 / s
    f_ds = 4.0 * x_s * x_d / s + q_p - q_m
    qfim = np.array(
        [[f_dd, f_ds, 0.0], [f_ds, f_ss, 0.0], [0.0, 0.0, f_delta]]
    )

    l_d = np.diag(
        [
            -2.0 / eta_p,
            2.0 / eta_m,
            (1.0 - 2.0 * a_p) / (a_p * eta_p),
            -(1.0 - 2.0 * a_m) / (a_m * eta_m),
            2.0 * x_d / s,
        ]
    ).astype(np.complex128)
    l_s = np.diag(
        [
            -2.0 / eta_p,
            -2.0 / eta_m,
            (1.0 - 2.0 * a_p) / (a_p * eta_p),
            (1.0 - 2.0 * a_m) / (a_m * eta_m),
            2.0 * x_s / s,
        ]
    ).astype(np.complex128)
    z = 4j * eta_p * eta_m * cmath.exp(-2j * delta) / (eta_p**2 + eta_m**2)
    l_delta = np.zeros((5, 5), dtype=np.complex128)
    l_delta[0, 1] = z
    l_delta[1, 0] = z.conjugate()
    slds = {"x_d": l_d, "x_s": l_s, "delta": l_delta}

    block = np.array([[f_dd, f_ds], [f_ds, f_ss]])
    inv = np.linalg.inv(block)
    bounds = SensitivityReport(
        method=QFIM_BOUND,
        values={
            "x_d": math.sqrt(inv[0, 0]),
            "x_s": math.sqrt(inv[1, 1]),
            "delta": 1.0 / math.sqrt(f_delta),
        },
        covariances={("x_d", "x_s"): float(inv[0, 1])},
    )
    return NoonCatalog(rho_support, slds, qfim, bounds, intensity)


# ---------------------------------------------------------------------------
# Fock benchmark and fidelity fringes
# ---------------------------------------------------------------------------


def fock_benchmark_bound(params: ChiralParams) -> SensitivityReport:
    """Bound for the |1₊,1₋⟩ product input: √(α₊η₊ + α₋η₋)/2 for X_d and X_s."""
    value = (
        math.sqrt(
            params.alpha_plus * params.eta_plus + params.alpha_minus * params.eta_minus
        )
        / 2.0
    )
    return SensitivityReport(method=QFIM_BOUND, values={"x_d": value, "x_s": value})


def fidelity_fringe(kind: InputStateKind | str, params: ChiralParams) -> float:
    """Projective fidelity ⟨ψ_in|ρ_out|ψ_in⟩ for the quantum inputs.

    The single-photon fringe oscillates with period 2π in Δ; the NOON
    fringe with period π (doubled frequency).
    """
    name = kind.kind if isinstance(kind, InputStateKind) else kind
    x_d, x_s, delta = params.x_d, params.x_s, params.delta
    if name == SINGLE_PHOTON_H:
        root = math.sqrt((1.0 - x_s) ** 2 - x_d**2)
        return 0.5 * (1.0 - x_s + root * math.cos(delta))
    if name == NOON_HV:
        a = (1.0 - x_s) ** 2 + x_d**2
        b = (1.0 - x_s) ** 2 - x_d**2
        return 0.5 * (a + b * math.cos(2.0 * delta))
    raise ValueError(
        f"fidelity fringes are defined for {SINGLE_PHOTON_H!r} and {NOON_HV!r},"
        f" not {name!r}"
    )
