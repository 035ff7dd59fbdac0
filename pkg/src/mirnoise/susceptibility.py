"""Effective susceptibility of the beam-averaged surface displacement.

The readout couples to every acoustic mode through its overlap with the beam;
each mode responds as a Lorentzian oscillator with structural damping.  The
effective susceptibility is the overlap-squared weighted sum of the per-mode
susceptibilities; at zero frequency the loss angle drops out and the sum is
real and positive.  The fluctuation-dissipation theorem then fixes the thermal
force and displacement noise spectra (one-sided, in angular frequency).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import BudgetExceededError
from .geometry import PlanoConvexGeometry
from .modes import ModeData, acoustic_waist_sq, fundamental_frequency
from .overlap import BeamSpec, check_beam_on_mirror, shell_overlap_sq_over_mass

#: Boltzmann constant, J/K (exact SI value)
BOLTZMANN = 1.380649e-23

LossAngle = Union[float, Callable[[float], float]]


def _loss_at(loss_angle: LossAngle, omega: float) -> float:
    phi = loss_angle(omega) if callable(loss_angle) else float(loss_angle)
    if not 0 <= phi < 1:
        raise ValueError(f"loss angle must lie in [0, 1), got {phi} at omega={omega}")
    return phi


@dataclass(frozen=True)
class TruncationPolicy:
    """Controls how the modal sum is truncated.

    epsilon    relative tail tolerance for the reported susceptibility
    max_modes  hard budget; exceeding it raises BudgetExceededError
    n_max, p_max, l_max  index caps bounding the enumerated mode universe
    """

    epsilon: float = 1e-4
    max_modes: int = 1_000_000
    n_max: int = 200
    p_max: int = 1_000_000
    l_max: int = 1_000_000

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_modes < 1:
            raise ValueError("max_modes must be at least 1")
        if self.n_max < 1 or self.p_max < 0 or self.l_max < 0:
            raise ValueError("index caps out of range")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class SusceptibilityResult:
    """Modal sum outcome (m/N) with its truncation diagnostics.

    tail_bound is relative to |value|.  For centered beams it is a rigorous
    geometric bound; off-center it is an extrapolated estimate and
    tail_is_estimate is set.
    """

    value: complex
    frequency: float
    modes_used: int
    tail_bound: float
    tail_is_estimate: bool
    converged: bool
    per_n: tuple


@dataclass(frozen=True)
class SpectrumPoint:
    """One-sided spectra at angular frequency omega.

    force_spectrum          S_T  (N^2 s)
    displacement_spectrum   S_u  (m^2 s), exact branch
    displacement_spectrum_lowfreq  low-frequency approximation 2 k_B T (phi/omega) chi0
    """

    omega: float
    temperature: float
    force_spectrum: float
    displacement_spectrum: float
    displacement_spectrum_lowfreq: float


@dataclass(frozen=True)
class OpticalMassApprox:
    """Single-oscillator stand-in: the illuminated substrate column's mass."""

    optical_mass: float
    fundamental_frequency: float
    chi_approx: float


def mode_susceptibility(mode: ModeData, omega: float, loss_angle: LossAngle) -> complex:
    """Lorentzian response 1/(M (Omega_n^2 - omega^2 - i Omega_n^2 phi))."""
    if omega < 0:
        raise ValueError("frequency must be non-negative")
    phi = _loss_at(loss_angle, omega)
    om_n2 = mode.frequency * mode.frequency
    den = mode.effective_mass * complex(om_n2 - omega * omega, -om_n2 * phi)
    return 1.0 / den


def _min_abs_denominator(om_m2, n, curv, shell_start, omega, phi):
    """min over shells s >= shell_start of |Omega_{n,s}^2 (1 - i phi) - omega^2|.

    Omega^2 grows linearly in s, so the minimum sits at shell_start or at the
    crossing with omega^2.
    """
    def w2(s):
        return om_m2 * (n * n + curv * n * (s + 1.0))

    om2 = omega * omega
    candidates = [shell_start]
    if w2(shell_start) < om2:
        s_cross = ((om2 / om_m2 - n * n) / (curv * n) - 1.0)
        for s in (math.floor(s_cross), math.ceil(s_cross)):
            if s >= shell_start:
                candidates.append(s)
    return min(abs(complex(w2(s) - om2, -w2(s) * phi)) for s in candidates)


def _chi_centered(geometry, beam, omega, phi, policy):
    """Modal sum for a centered beam: l = 0 cosine modes only, closed-form
    overlaps, rigorous geometric tail bound per longitudinal family."""
    om_m = fundamental_frequency(geometry)
    om_m2 = om_m * om_m
    curv = (2.0 / math.pi) * math.sqrt(geometry.thickness / geometry.curvature_radius)
    w02 = beam.waist * beam.waist
    rho = geometry.material.density
    h0 = geometry.thickness
    at_zero = omega == 0.0

    total = 0.0 if at_zero else 0.0 + 0.0j
    tail_abs = 0.0
    per_n = []
    modes_used = 0

    for n in range(1, policy.n_max + 1):
        wn2 = acoustic_waist_sq(geometry, n)
        mass = (math.pi / 4.0) * rho * h0 * wn2
        c = 2.0 * wn2 / (2.0 * wn2 + w02)
        q = (2.0 * wn2 - w02) / (2.0 * wn2 + w02)
        q2 = q * q
        s_n = 0.0 if at_zero else 0.0 + 0.0j
        ovl2_head = c * c  # c^2 q^(2 p0) at the head of the current block
        p0 = 0
        block = 64
        tail_n = 0.0
        while True:
            count = min(block, policy.p_max + 1 - p0)
            p = np.arange(p0, p0 + count, dtype=float)
            ovl2 = ovl2_head * q2 ** (p - p0)
            om2 = om_m2 * (n * n + curv * n * (2.0 * p + 1.0))
            if at_zero:
                s_n += float((ovl2 / (mass * om2)).sum())
            else:
                den = mass * (om2 - omega * omega - 1j * om2 * phi)
                s_n += complex((ovl2 / den).sum())
            modes_used += count
            p_next = p0 + count
            ovl2_next = ovl2_head * q2**count
            if ovl2_next == 0.0:
                tail_n = 0.0
            elif q2 < 1.0:
                min_den = (
                    om_m2 * (n * n + curv * n * (2.0 * p_next + 1.0))
                    if at_zero
                    else _min_abs_denominator(om_m2, n, curv, 2 * p_next, omega, phi)
                )
                tail_n = ovl2_next / ((1.0 - q2) * mass * min_den)
            else:
                tail_n = float("inf")  # degenerate beam (w0 -> 0): no geometric decay
            if modes_used > policy.max_modes:
                partial = SusceptibilityResult(
                    value=complex(total + s_n),
                    frequency=omega,
                    modes_used=modes_used,
                    tail_bound=float("inf"),
                    tail_is_estimate=False,
                    converged=False,
                    per_n=tuple(per_n),
                )
                raise BudgetExceededError(
                    f"mode budget {policy.max_modes} exhausted at n={n}, p={p_next}",
                    partial=partial,
                )
            if p_next > policy.p_max:
                break
            target = policy.epsilon * abs(total + s_n) / (2.0 * policy.n_max)
            if tail_n <= target:
                break
            ovl2_head = ovl2_next
            p0 = p_next
            block = min(2 * block, 8192)
        total += s_n
        tail_abs += tail_n
        per_n.append(s_n)

    scale = abs(total) if total else 1.0
    tail_rel = tail_abs / scale
    return SusceptibilityResult(
        value=complex(total),
        frequency=omega,
        modes_used=modes_used,
        tail_bound=tail_rel,
        tail_is_estimate=False,
        converged=tail_rel <= policy.epsilon,
        per_n=tuple(per_n),
    )


def _shell_tail_estimate(abs_terms):
    """Geometric extrapolation of the remaining shells from the last few computed.

    Strides over four shells to average out the even/odd coupling oscillation;
    returns inf while the shell weights are still growing (the enumeration has
    not passed the coupling peak yet).
    """
    last = abs_terms[-1]
    ref = abs_terms[-5]
    if last == 0.0 and ref == 0.0:
        return 0.0
    if ref <= 0.0 or last >= ref:
        return float("inf")
    ratio = min((last / ref) ** 0.25, 0.999)
    return last * ratio / (1.0 - ratio)


def _chi_offaxis(geometry, beam, omega, phi, policy):
    """Modal sum for a displaced beam, taken shell-by-shell.

    Within a degenerate (n, 2p+l) shell the mass-normalized overlap-squared sum
    is basis independent, so it is evaluated in the separable Hermite-Gauss
    basis (stable normalized recurrences) instead of mode by mode; each shell
    trace folds in the s//2 + 1 cosine modes that couple to an offset along x
    (sine modes vanish identically).  modes_used counts these shell summands.
    The per-family tail is an extrapolated estimate, not a bound.
    """
    om_m = fundamental_frequency(geometry)
    om_m2 = om_m * om_m
    curv = (2.0 / math.pi) * math.sqrt(geometry.thickness / geometry.curvature_radius)
    at_zero = omega == 0.0
    shell_cap = min(2 * policy.p_max + policy.l_max, 60_000)

    total = 0.0 if at_zero else 0.0 + 0.0j
    tail_abs = 0.0
    per_n = []
    modes_used = 0

    for n in range(1, policy.n_max + 1):
        smax = 64
        while True:
            smax = min(smax, shell_cap)
            traces = shell_overlap_sq_over_mass(geometry, beam, n, smax)
            s_idx = np.arange(smax + 1, dtype=float)
            om2 = om_m2 * (n * n + curv * n * (s_idx + 1.0))
            if at_zero:
                cterms = traces / om2
                abs_terms = cterms
            else:
                den = om2 - omega * omega - 1j * om2 * phi
                cterms = traces / den
                abs_terms = np.abs(cterms)
            tail_beyond = _shell_tail_estimate(abs_terms)
            target = policy.epsilon * abs(total + cterms.sum()) / (2.0 * policy.n_max)
            if tail_beyond <= target or smax >= shell_cap:
                break
            smax *= 2
        # trim: keep the smallest shell prefix whose dropped remainder still
        # meets the per-family target, so the summand count tracks epsilon
        remainder = np.cumsum(abs_terms[::-1])[::-1]
        remainder = np.append(remainder[1:], 0.0) + tail_beyond
        s_stop = int(np.argmax(remainder <= target)) if remainder[-1] <= target else smax
        s_n = complex(cterms[: s_stop + 1].sum()) if not at_zero else float(cterms[: s_stop + 1].sum())
        tail_n = float(remainder[s_stop])
        # one summand per degenerate shell; each shell trace folds in its
        # s//2 + 1 coupled cosine modes analytically
        modes_used += s_stop + 1
        if modes_used > policy.max_modes:
            partial = SusceptibilityResult(
                value=complex(total + s_n),
                frequency=omega,
                modes_used=modes_used,
                tail_bound=float("inf"),
                tail_is_estimate=True,
                converged=False,
                per_n=tuple(per_n),
            )
            raise BudgetExceededError(
                f"mode budget {policy.max_modes} exhausted at n={n}", partial=partial
            )
        total += s_n
        tail_abs += tail_n
        per_n.append(s_n)

    scale = abs(total) if total else 1.0
    tail_rel = tail_abs / scale
    return SusceptibilityResult(
        value=complex(total),
        frequency=omega,
        modes_used=modes_used,
        tail_bound=tail_rel,
        tail_is_estimate=True,
        converged=tail_rel <= policy.epsilon,
        per_n=tuple(per_n),
    )


def effective_susceptibility(
    geometry: PlanoConvexGeometry,
    beam: BeamSpec,
    omega: float = 0.0,
    loss_angle: LossAngle | None = None,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> SusceptibilityResult:
    """Overlap-weighted modal susceptibility sum at angular frequency omega.

    At omega = 0 the damping term cancels and the sum is real, positive and
    independent of the loss angle.  Enumeration is deterministic: longitudinal
    families in ascending n, transverse shells in ascending 2p+l, so repeated
    runs are bit-identical.
    """
    if omega < 0:
        raise ValueError("frequency must be non-negative")
    check_beam_on_mirror(beam, geometry)
    if loss_angle is None:
        loss_angle = geometry.material.loss_angle
    phi = _loss_at(loss_angle, omega) if omega > 0 else 0.0
    if beam.offset == 0.0:
        return _chi_centered(geometry, beam, omega, phi, policy)
    return _chi_offaxis(geometry, beam, omega, phi, policy)


def thermal_force_spectrum(chi_value: complex, omega: float, temperature: float) -> float:
    """S_T = -(2 k_B T / omega) Im(1/chi), the fluctuation-dissipation relation."""
    if omega <= 0:
        raise ValueError("the force spectrum is defined for omega > 0")
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    return -(2.0 * BOLTZMANN * temperature / omega) * (1.0 / chi_value).imag


def displacement_noise_spectrum(
    geometry: PlanoConvexGeometry,
    beam: BeamSpec,
    omega: float,
    temperature: float,
    loss_angle: LossAngle | None = None,
    policy: TruncationPolicy = DEFAULT_POLICY,
    chi_zero: SusceptibilityResult | None = None,
) -> SpectrumPoint:
    """Displacement noise at omega: exact branch and low-frequency approximation.

    Exact:  S_u = (2 k_B T / omega) Im(chi_eff[omega])
    Approx: S_u ~= 2 k_B T (phi/omega) chi_eff[0]   (valid well below resonance)

    Pass chi_zero to reuse a previously computed zero-frequency sum across a
    frequency grid.
    """
    if omega <= 0:
        raise ValueError("the noise spectrum is defined for omega > 0")
    if loss_angle is None:
        loss_angle = geometry.material.loss_angle
    chi = effective_susceptibility(geometry, beam, omega, loss_angle, policy)
    if chi_zero is None:
        chi_zero = effective_susceptibility(geometry, beam, 0.0, loss_angle, policy)
    phi = _loss_at(loss_angle, omega)
    exact = (2.0 * BOLTZMANN * temperature / omega) * chi.value.imag
    approx = 2.0 * BOLTZMANN * temperature * (phi / omega) * chi_zero.value.real
    force = thermal_force_spectrum(chi.value, omega, temperature)
    return SpectrumPoint(
        omega=omega,
        temperature=temperature,
        force_spectrum=force,
        displacement_spectrum=exact,
        displacement_spectrum_lowfreq=approx,
    )


def optical_mass_model(geometry: PlanoConvexGeometry, beam: BeamSpec) -> OpticalMassApprox:
    """Single-oscillator estimate of chi_eff[0] for a centered beam.

    The oscillator mass is the illuminated substrate column (pi/4) rho h0 w0^2
    scaled by 12/pi^2, resonating at the fundamental longitudinal frequency.
    Always an overestimate of the true zero-frequency susceptibility because
    the true transverse shells resonate above the longitudinal baseline.
    """
    if beam.offset != 0.0:
        raise ValueError("the optical-mass approximation assumes a centered beam")
    m_opt = (12.0 / math.pi**2) * (math.pi / 4.0) * geometry.material.density * (
        geometry.thickness * beam.waist * beam.waist
    )
    om_m = fundamental_frequency(geometry)
    return OpticalMassApprox(
        optical_mass=m_opt,
        fundamental_frequency=om_m,
        chi_approx=1.0 / (m_opt * om_m * om_m),
    )
