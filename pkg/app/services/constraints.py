from __future__ import annotations

import logging
import math

from app.core.errors import ConstraintDegenerateError, ConstraintInfeasibleError, ParameterError
from app.models.enums import EPaForm
from app.schemas.fit import ConstraintAnchors, FreeParams
from app.schemas.material import OipSet

logger = logging.getLogger(__name__)

EQ_XAXC = "E_xaxc relation (hh/lh at zero)"
EQ_PC = "E_pc relation (split-off at -Δ)"
EQ_PA = "E_pa relation (split-off antibonding level)"
EQ_SASC = "E_sasc relation (Γ gap)"

_DEGENERATE_TOL = 1.0e-12


def derive_e_pa(anchors: ConstraintAnchors, form: EPaForm = EPaForm.ROUND_TRIP) -> float:
    """
    E_pa from the upper split-off level E_so1. ``ROUND_TRIP`` is the form that
    reproduces E_so1 after the E_pc/E_xaxc relations are applied; ``PRINTED``
    carries Δ_aΔ in place of Δ_aΔ_c in the last numerator term.
    """
    if anchors.e_so1 is None:
        raise ParameterError(f"{EQ_PA}: anchors carry no e_so1 level")
    d_a, d_c, delta, e_so1 = anchors.delta_a, anchors.delta_c, anchors.delta, anchors.e_so1
    denominator = d_a - d_c
    if abs(denominator) <= _DEGENERATE_TOL:
        raise ConstraintDegenerateError("Δ_a equals Δ_c", equation=EQ_PA)
    if form is EPaForm.PRINTED:
        logger.warning("using the printed E_pa relation; it does not reproduce E_so1 exactly")
        last = d_a * delta / 3.0
    else:
        last = d_a * d_c / 3.0
    numerator = e_so1 * (d_a - delta) - d_a * delta + (2.0 / 3.0) * d_a * d_a + last
    return numerator / denominator


def derive_e_pc(e_pa: float, anchors: ConstraintAnchors) -> float:
    d_a, d_c, delta = anchors.delta_a, anchors.delta_c, anchors.delta
    denominator = d_a - delta
    if abs(denominator) <= _DEGENERATE_TOL * max(1.0, abs(d_a)):
        raise ConstraintDegenerateError("Δ_a equals Δ", equation=EQ_PC)
    numerator = (
        delta * delta
        + delta * (e_pa - (2.0 / 3.0) * d_a - (2.0 / 3.0) * d_c)
        + (1.0 / 3.0) * d_a * d_c
        - e_pa * d_c
    )
    value = numerator / denominator
    if not math.isfinite(value):
        raise ConstraintDegenerateError("E_pc diverges", equation=EQ_PC)
    return value


def derive_e_xaxc(e_pa: float, e_pc: float, delta_a: float, delta_c: float) -> float:
    anion = e_pa + delta_a / 3.0
    cation = e_pc + delta_c / 3.0
    if anion < 0 or cation < 0:
        distance = max(0.0, -anion) + max(0.0, -cation)
        raise ConstraintInfeasibleError(
            f"negative radicand factors ({anion:.6g}, {cation:.6g})", equation=EQ_XAXC, distance=distance
        )
    return math.sqrt(anion * cation)


def derive_e_sasc(e_sa: float, e_sc: float, e_g: float) -> float:
    # e_g² − e_g(e_sa + e_sc) + e_sa·e_sc, in factored form
    radicand = (e_g - e_sa) * (e_g - e_sc)
    if radicand < 0:
        distance = min(abs(e_g - e_sa), abs(e_g - e_sc))
        raise ConstraintInfeasibleError(
            f"negative radicand {radicand:.6g}: E_g lies between E_sa and E_sc",
            equation=EQ_SASC,
            distance=distance,
        )
    return -math.sqrt(radicand)


def expand(
    free: FreeParams,
    anchors: ConstraintAnchors,
    *,
    use_eq5: bool = False,
    e_pa_form: EPaForm = EPaForm.ROUND_TRIP,
) -> OipSet:
    """
    Full OIP set from the genes. The derived entries pin the Γ spectrum: the
    s-block upper level at E_g, the hh/lh level at 0 and the split-off at −Δ.
    """
    if use_eq5:
        e_pa = derive_e_pa(anchors, e_pa_form)
    elif free.e_pa is None:
        raise ParameterError("e_pa is neither a gene nor derived (set use_eq5 or provide e_pa)")
    else:
        e_pa = free.e_pa

    upper_s = max(free.e_sa, free.e_sc)
    if anchors.e_g <= upper_s:
        raise ConstraintInfeasibleError(
            f"E_g={anchors.e_g:.6g} does not lie above both s on-site energies",
            equation=EQ_SASC,
            distance=upper_s - anchors.e_g,
        )
    e_sasc = derive_e_sasc(free.e_sa, free.e_sc, anchors.e_g)
    e_pc = derive_e_pc(e_pa, anchors)
    e_xaxc = derive_e_xaxc(e_pa, e_pc, anchors.delta_a, anchors.delta_c)

    # −Δ must be the lower level of the split-off block
    partner = e_pa + e_pc - 2.0 * (anchors.delta_a + anchors.delta_c) / 3.0 + anchors.delta
    if partner < -anchors.delta:
        raise ConstraintInfeasibleError(
            "split-off pin would not be the lower Γ7 level", equation=EQ_PC, distance=-anchors.delta - partner
        )

    return OipSet(
        e_sa=free.e_sa,
        e_sc=free.e_sc,
        e_ssa=free.e_ssa,
        e_ssc=free.e_ssc,
        e_xayc=free.e_xayc,
        e_saxc=free.e_saxc,
        e_xasc=free.e_xasc,
        e_ssaxc=free.e_ssaxc,
        e_xassc=free.e_xassc,
        e_pa=e_pa,
        e_pc=e_pc,
        e_sasc=e_sasc,
        e_xaxc=e_xaxc,
        delta_a=anchors.delta_a,
        delta_c=anchors.delta_c,
    )


def split_off_levels(oips: OipSet) -> tuple[float, float]:
    """Eigenvalues of the Γ7 block, ascending."""
    a = oips.e_pa - 2.0 * oips.delta_a / 3.0
    c = oips.e_pc - 2.0 * oips.delta_c / 3.0
    mean = (a + c) / 2.0
    radius = math.hypot((a - c) / 2.0, oips.e_xaxc)
    return mean - radius, mean + radius


def feasible_e_pa_range(anchors: ConstraintAnchors) -> tuple[float, float]:
    """
    Interval of gene e_pa values for which the E_pc, E_xaxc and split-off
    conditions hold. E_pc is linear in e_pa, so every condition is a half-line.
    """
    offset = derive_e_pc(0.0, anchors)
    slope = derive_e_pc(1.0, anchors) - offset
    d_a, d_c, delta = anchors.delta_a, anchors.delta_c, anchors.delta
    # (a, b) with a·e_pa + b >= 0
    conditions = (
        (1.0, d_a / 3.0),
        (slope, offset + d_c / 3.0),
        (1.0 + slope, offset - 2.0 * (d_a + d_c) / 3.0 + 2.0 * delta),
    )
    low, high = -math.inf, math.inf
    for a, b in conditions:
        if abs(a) <= _DEGENERATE_TOL:
            if b < 0:
                return math.inf, -math.inf
            continue
        bound = -b / a
        if a > 0:
            low = max(low, bound)
        else:
            high = min(high, bound)
    return low, high


def repair_free_params(
    free: FreeParams,
    anchors: ConstraintAnchors,
    *,
    use_eq5: bool = False,
    margin: float = 1.0e-6,
) -> FreeParams:
    """
    Nearest genes (coordinate-wise) that ``expand`` accepts: both s on-site
    energies below E_g and, when it is a gene, e_pa inside its feasible range.
    Genes that cannot be repaired are returned unchanged.
    """
    update = {
        "e_sa": min(free.e_sa, anchors.e_g - margin),
        "e_sc": min(free.e_sc, anchors.e_g - margin),
    }
    if not use_eq5 and free.e_pa is not None:
        try:
            low, high = feasible_e_pa_range(anchors)
        except ConstraintDegenerateError:
            low, high = math.inf, -math.inf
        if low + margin <= high - margin:
            update["e_pa"] = min(max(free.e_pa, low + margin), high - margin)
    return free.model_copy(update=update)


__all__ = [
    "EQ_XAXC",
    "EQ_PC",
    "EQ_PA",
    "EQ_SASC",
    "derive_e_pa",
    "derive_e_pc",
    "derive_e_xaxc",
    "derive_e_sasc",
    "expand",
    "split_off_levels",
    "feasible_e_pa_range",
    "repair_free_params",
]
