"""Parameter sweeps, the convergence study, comparison report, and CSV output.

Sweeps vary one of {thickness, waist, offset, mass, mode_count} while holding
the rest fixed, re-solving the geometry closure wherever the swept parameter
touches it.  Output rows are deterministic: fixed enumeration order inside the
modal sums and fixed float formatting, so identical sweeps give byte-identical
CSV files (wall-times are kept on the row objects but never written).
"""
from __future__ import annotations

import concurrent.futures
import math
import time
from dataclasses import dataclass, field, replace
from typing import IO, Optional, Sequence

import numpy as np

from .errors import BudgetExceededError
from .geometry import Material, FUSED_SILICA, PlanoConvexGeometry, solve_geometry
from .modes import acoustic_waist_sq, fundamental_frequency
from .overlap import BeamSpec, check_beam_on_mirror, shell_overlap_sq_over_mass
from .susceptibility import (
    DEFAULT_POLICY,
    SusceptibilityResult,
    TruncationPolicy,
    effective_susceptibility,
)

CSV_HEADER = "# mirnoise v1, one-sided angular-frequency spectra, SI units"

SWEEP_PARAMETERS = ("thickness", "waist", "offset", "mass", "mode_count")

#: zero-frequency susceptibility of a standard cylindrical mirror of equal
#: mass, literature reference values (not recomputed here), keyed by beam waist
CYLINDRICAL_REFERENCE = {0.02: 46e-11, 0.055: 11e-11}

#: default sweep ranges; figure-axis choices, not measured quantities
DEFAULT_RANGES = {
    "thickness": (0.04, 0.12, 30),
    "waist": (0.01, 0.06, 26),
    "offset": (0.0, 0.22, 23),
    "mass": (5.0, 50.0, 10),
    "mode_count": (1e2, 1e6, 5),
}


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep description plus the fixed operating point."""

    parameter: str
    lo: float
    hi: float
    points: int
    mass: float = 20.0
    thickness: float = 0.07
    waist: float = 0.02
    offset: float = 0.0
    temperature: float = 300.0
    loss_angle: float = 1e-6
    material: Material = FUSED_SILICA
    policy: TruncationPolicy = DEFAULT_POLICY

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.points < 2:
            raise ValueError("a sweep needs at least 2 points")
        if self.parameter == "offset" and self.lo < 0:
            raise ValueError("offsets are non-negative")

    def values(self) -> np.ndarray:
        if self.parameter == "mode_count":
            counts = np.geomspace(self.lo, self.hi, self.points)
            return np.unique(np.rint(counts).astype(int)).astype(float)
        return np.linspace(self.lo, self.hi, self.points)

    def operating_point(self, value: float):
        """Geometry and beam at one sweep point; swept parameter substituted."""
        mass = value if self.parameter == "mass" else self.mass
        thickness = value if self.parameter == "thickness" else self.thickness
        waist = value if self.parameter == "waist" else self.waist
        offset = value if self.parameter == "offset" else self.offset
        mat = replace(self.material, loss_angle=self.loss_angle)
        geometry = solve_geometry(mass, thickness, mat)
        beam = BeamSpec(waist=waist, offset=offset)
        check_beam_on_mirror(beam, geometry)
        return geometry, beam


@dataclass(frozen=True)
class SweepRow:
    value: float
    chi0: float
    modes_used: int
    tail_bound: float
    paraxial_warning: bool
    converged: bool
    seconds: float = field(default=0.0, compare=False)


def validate_sweep(spec: SweepSpec) -> None:
    """Check every sweep point's invariants before any computation is spent."""
    if spec.parameter == "mode_count":
        return
    for value in spec.values():
        spec.operating_point(value)


def _sweep_point(spec: SweepSpec, value: float) -> SweepRow:
    start = time.perf_counter()
    value = float(value)
    geometry, beam = spec.operating_point(value)
    try:
        res = effective_susceptibility(geometry, beam, 0.0, spec.loss_angle, spec.policy)
        chi0 = res.value.real
        modes_used = res.modes_used
        tail = res.tail_bound
        converged = res.converged
    except BudgetExceededError as err:
        partial: SusceptibilityResult = err.partial
        chi0 = partial.value.real
        modes_used = partial.modes_used
        tail = partial.tail_bound
        converged = False
    return SweepRow(
        value=value,
        chi0=chi0,
        modes_used=modes_used,
        tail_bound=tail,
        paraxial_warning=geometry.paraxial_warning,
        converged=converged,
        seconds=time.perf_counter() - start,
    )


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Evaluate chi_eff[0] across the sweep; rows come back in sweep order.

    Budget-exceeded points are recorded as unconverged rows and the sweep
    continues; an invalid spec aborts before any point is computed.
    """
    validate_sweep(spec)
    if spec.parameter == "mode_count":
        return _mode_count_rows(spec)
    values = list(spec.values())
    if jobs <= 1:
        return [_sweep_point(spec, v) for v in values]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_point, [spec] * len(values), values))


def _mode_count_rows(spec: SweepSpec) -> list[SweepRow]:
    """Sweep over the mode count: the convergence study in row form."""
    mat = replace(spec.material, loss_angle=spec.loss_angle)
    geometry = solve_geometry(spec.mass, spec.thickness, mat)
    beam = BeamSpec(waist=spec.waist, offset=spec.offset)
    checkpoints = [int(v) for v in spec.values()]
    start = time.perf_counter()
    pairs = convergence_study(geometry, beam, spec.loss_angle, checkpoints)
    elapsed = time.perf_counter() - start
    final = pairs[-1][1]
    rows = []
    for count, chi in pairs:
        gap = abs(chi - final) / abs(final) if final else 0.0
        rows.append(
            SweepRow(
                value=float(count),
                chi0=chi,
                modes_used=count,
                tail_bound=gap,
                paraxial_warning=geometry.paraxial_warning,
                converged=gap <= spec.policy.epsilon,
                seconds=elapsed / len(pairs),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Convergence study
# ---------------------------------------------------------------------------


def _centered_term_pool(geometry, beam, n_max, floor_rel=1e-25):
    """All (n, p) zero-frequency terms down to a negligibility floor."""
    om_m2 = fundamental_frequency(geometry) ** 2
    curv = (2.0 / math.pi) * math.sqrt(geometry.thickness / geometry.curvature_radius)
    w02 = beam.waist * beam.waist
    rho = geometry.material.density
    h0 = geometry.thickness

    top = None
    per_n = []
    for n in range(1, n_max + 1):
        wn2 = acoustic_waist_sq(geometry, n)
        mass = (math.pi / 4.0) * rho * h0 * wn2
        c = 2.0 * wn2 / (2.0 * wn2 + w02)
        q2 = ((2.0 * wn2 - w02) / (2.0 * wn2 + w02)) ** 2
        head = c * c / (mass * om_m2 * (n * n + curv * n))
        if top is None:
            top = head
        floor = top * floor_rel
        if head < floor:
            per_n.append((n, np.empty(0), np.empty(0, dtype=int)))
            continue
        # p count from pure geometric decay (denominator growth only helps)
        if q2 > 0.0:
            count = int(math.log(floor / head) / math.log(q2)) + 2 if q2 < 1 else 10**6
        else:
            count = 1
        p = np.arange(count, dtype=float)
        ovl2 = (c * c) * q2**p
        om2 = om_m2 * (n * n + curv * n * (2.0 * p + 1.0))
        terms = ovl2 / (mass * om2)
        keep = terms >= floor
        per_n.append((n, terms[keep], p[keep].astype(int)))
    return per_n


def convergence_study(
    geometry: PlanoConvexGeometry,
    beam: BeamSpec,
    loss_angle: float,
    checkpoints: Sequence[int],
    n_max: int = DEFAULT_POLICY.n_max,
) -> list[tuple[int, float]]:
    """chi_eff[0] truncated to the first K modes, for each checkpoint K.

    The canonical enumeration orders modes by decreasing zero-frequency
    contribution (ties by ascending n then p), so checkpoint values form a
    nondecreasing sequence whose first entry is the fundamental mode alone.
    Terms below 1e-25 of the leading one are numerically invisible in a
    float64 sum; checkpoints beyond them return the saturated value.
    """
    checkpoints = list(checkpoints)
    if any(c < 1 for c in checkpoints):
        raise ValueError("checkpoints must be positive")
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    check_beam_on_mirror(beam, geometry)

    if beam.offset == 0.0:
        pool = _centered_term_pool(geometry, beam, n_max)
        terms = np.concatenate([t for _, t, _ in pool])
        n_ids = np.concatenate([np.full(len(t), n) for n, t, _ in pool])
        p_ids = np.concatenate([p for _, _, p in pool])
        order = np.lexsort((p_ids, n_ids, -terms))
        csum = np.cumsum(terms[order])
        out = []
        for k in checkpoints:
            idx = min(k, len(csum)) - 1
            out.append((k, float(csum[idx])))
        return out

    # displaced beam: degenerate shells are the natural grain; a shell of
    # index s holds s//2 + 1 coupled (cosine) modes
    om_m2 = fundamental_frequency(geometry) ** 2
    curv = (2.0 / math.pi) * math.sqrt(geometry.thickness / geometry.curvature_radius)
    grain_terms = []
    grain_counts = []
    grain_keys = []
    top = None
    for n in range(1, n_max + 1):
        smax = 64
        while True:
            traces = shell_overlap_sq_over_mass(geometry, beam, n, smax)
            om2 = om_m2 * (n * n + curv * n * (np.arange(smax + 1) + 1.0))
            terms = traces / om2
            if top is None:
                top = terms.max()
            if terms[-1] < top * 1e-25 or smax >= 60_000:
                break
            smax *= 2
        keep = terms >= top * 1e-25
        for s in np.nonzero(keep)[0]:
            grain_terms.append(terms[s])
            grain_counts.append(s // 2 + 1)
            grain_keys.append((n, s))
    order = sorted(range(len(grain_terms)), key=lambda i: (-grain_terms[i], grain_keys[i]))
    out = []
    acc = 0.0
    count = 0
    it = iter(order)
    pending = next(it, None)
    for k in checkpoints:
        while pending is not None and count < k:
            acc += grain_terms[pending]
            count += grain_counts[pending]
            pending = next(it, None)
        out.append((k, acc))
    return out


# ---------------------------------------------------------------------------
# Comparison report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompareReport:
    waist: float
    chi0: float
    modes_used: int
    tail_bound: float
    cylindrical_reference: Optional[float]
    improvement_ratio: Optional[float]


def compare_report(
    geometry: PlanoConvexGeometry,
    beam: BeamSpec,
    policy: TruncationPolicy = DEFAULT_POLICY,
    include_cylindrical: bool = True,
) -> CompareReport:
    """Plano-convex chi_eff[0] next to the cylindrical literature reference.

    The cylindrical values exist only at the two standard waists; other waists
    are refused unless the cylindrical column is suppressed.
    """
    if beam.offset != 0.0:
        raise ValueError("the comparison is defined for a centered beam")
    reference = None
    if include_cylindrical:
        for ref_waist, ref_value in CYLINDRICAL_REFERENCE.items():
            if math.isclose(beam.waist, ref_waist, rel_tol=1e-9):
                reference = ref_value
                break
        else:
            raise ValueError(
                f"no cylindrical reference at waist {beam.waist} m; available at "
                f"{sorted(CYLINDRICAL_REFERENCE)} (or suppress the cylindrical column)"
            )
    res = effective_susceptibility(geometry, beam, 0.0, None, policy)
    chi0 = res.value.real
    return CompareReport(
        waist=beam.waist,
        chi0=chi0,
        modes_used=res.modes_used,
        tail_bound=res.tail_bound,
        cylindrical_reference=reference,
        improvement_ratio=None if reference is None else reference / chi0,
    )


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.8e}"


def write_csv(fh: IO[str], columns: Sequence[str], rows: Sequence[Sequence]) -> None:
    fh.write(CSV_HEADER + "\n")
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(_fmt(v) for v in row) + "\n")


def sweep_csv(fh: IO[str], spec: SweepSpec, rows: Sequence[SweepRow]) -> None:
    write_csv(
        fh,
        (spec.parameter, "chi0", "modes_used", "tail_bound", "paraxial_warning", "converged"),
        [(r.value, r.chi0, r.modes_used, r.tail_bound, r.paraxial_warning, r.converged) for r in rows],
    )
