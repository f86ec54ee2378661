"""Output states of the quantum-injected amplifier.

The amplifier is seeded with one polarization qubit on spatial mode k1 and
vacuum on k2, and emits photon pairs on the mode couples (k1H, k2V) and
(k1V, k2H). With pair indices (i, j) counting emissions on those couples,
the horizontally seeded output is

    sum_{i,j} gamma_ij * sqrt(i+1) |i+1, j, j, i>,
    gamma_ij = cosh(g)^-3 (-tanh g)^i (tanh g)^j,

and the vertically seeded one carries sqrt(j+1) on |i, j+1, j, i>. Either
way every stored occupation has exactly one more photon on k1 than on k2.
The two branches occupy disjoint sets of occupations, so an arbitrary
injected qubit amplifies to the matching coherent combination, and the
heralded tripartite state pairs the branches with an opposite-polarization
trigger photon.

Amplitudes decay geometrically in i and j; the infinite double sum is kept
on a finite index grid whose size is either fixed or grown automatically
until the discarded probability mass is below the configured tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConvergenceError
from .fock_core import (
    MODE_NAMES,
    FockOccupation,
    GainParams,
    PolarizationQubit,
    SparseKet,
    superpose,
)

_AUTO_START_CAP = 8

SIGMA_MARKER = "sigma"


@dataclass(frozen=True)
class AmplifiedState:
    """A built output ket with its gain and injection provenance."""

    ket: SparseKet
    gain: GainParams
    injected: PolarizationQubit | str


def gamma_coeff(gain: GainParams, i: int, j: int) -> complex:
    """Pair-emission coefficient cosh(g)^-3 (-tanh g)^i (tanh g)^j."""
    if i < 0 or j < 0:
        raise ValueError("pair indices must be nonnegative")
    gamma = gain.gamma_cap
    return complex(math.cosh(gain.g) ** -3 * (-gamma) ** i * gamma**j)


def _kept_mass(gain: GainParams, cap: int) -> float:
    # Truncated norm^2 of either branch: cosh^-6 * sum_{i<=cap}(i+1)q^i * sum_{j<=cap}q^j
    q = gain.gamma_cap**2
    powers = q ** np.arange(cap + 1)
    si = float(((np.arange(cap + 1) + 1) * powers).sum())
    sj = float(powers.sum())
    return math.cosh(gain.g) ** -6 * si * sj


def resolve_cutoff(gain: GainParams) -> int:
    """Index cap actually used for the (i, j) grid.

    In auto mode the cap doubles until the kept probability mass reaches
    1 - epsilon_trunc; exceeding the hard bound raises ConvergenceError.
    """
    if isinstance(gain.cutoff, int):
        return gain.cutoff
    cap = _AUTO_START_CAP
    while _kept_mass(gain, cap) < 1.0 - gain.epsilon_trunc:
        cap *= 2
        if cap > gain.hard_cap:
            raise ConvergenceError(
                f"auto cutoff exceeded hard bound {gain.hard_cap} at g={gain.g}"
            )
    return cap


def _amplitude_grid(gain: GainParams, cap: int) -> tuple[np.ndarray, np.ndarray]:
    gamma = gain.gamma_cap
    c3 = math.cosh(gain.g) ** -3
    i = np.arange(cap + 1)
    col_h = c3 * (-gamma) ** i * np.sqrt(i + 1)
    row = gamma**i
    amps_h = np.outer(col_h, row)
    col_v = c3 * (-gamma) ** i
    amps_v = np.outer(col_v, row * np.sqrt(i + 1))
    return amps_h, amps_v


def _build_branch(gain: GainParams, vertical: bool) -> SparseKet:
    cap = resolve_cutoff(gain)
    amps_h, amps_v = _amplitude_grid(gain, cap)
    amps = amps_v if vertical else amps_h
    terms: dict[FockOccupation, complex] = {}
    for i in range(cap + 1):
        for j in range(cap + 1):
            amp = amps[i, j]
            if amp == 0.0:
                continue
            if vertical:
                occ = FockOccupation(i, j + 1, j, i)
            else:
                occ = FockOccupation(i + 1, j, j, i)
            terms[occ] = complex(amp)
    return SparseKet(terms, gain_tag=gain)


def build_psi_h(gain: GainParams) -> AmplifiedState:
    """Amplified output for a horizontally polarized injected photon."""
    return AmplifiedState(_build_branch(gain, vertical=False), gain, PolarizationQubit.h())


def build_psi_v(gain: GainParams) -> AmplifiedState:
    """Amplified output for a vertically polarized injected photon."""
    return AmplifiedState(_build_branch(gain, vertical=True), gain, PolarizationQubit.v())


def build_m_qubit(gain: GainParams, q: PolarizationQubit) -> AmplifiedState:
    """Amplified output for an arbitrary injected qubit.

    Branch disjointness makes the norm the sum of the squared qubit
    amplitudes, so the result is normalized up to the truncation tail.
    """
    ket = superpose(
        [
            (q.alpha, _build_branch(gain, vertical=False)),
            (q.beta, _build_branch(gain, vertical=True)),
        ],
        gain_tag=gain,
    )
    return AmplifiedState(ket, gain, q)


def build_sigma(gain: GainParams) -> AmplifiedState:
    """Heralded tripartite state over trigger plus the four output modes.

    The trigger-H component carries the horizontally seeded branch and the
    trigger-V component the vertically seeded branch with opposite sign,
    each weighted 1/sqrt2.
    """
    w = 1.0 / math.sqrt(2.0)
    terms: dict[FockOccupation, complex] = {}
    for sign, trigger, vertical in ((w, "H", False), (-w, "V", True)):
        branch = _build_branch(gain, vertical=vertical)
        for occ, amp in branch.terms.items():
            tagged = FockOccupation(*occ.occupations, trigger=trigger)
            terms[tagged] = sign * amp
    return AmplifiedState(SparseKet(terms, gain_tag=gain), gain, SIGMA_MARKER)


def mean_photons(state: AmplifiedState, modes: Iterable[str] = MODE_NAMES) -> float:
    """Expected photon number over the selected modes (trigger excluded)."""
    modes = tuple(modes)
    for m in modes:
        if m not in MODE_NAMES:
            raise ValueError(f"unknown mode {m!r}")
    if not modes:
        return 0.0
    idx = [MODE_NAMES.index(m) for m in modes]
    total = 0.0
    for occ, amp in state.ket.terms.items():
        ns = occ.occupations
        total += (abs(amp) ** 2) * sum(ns[k] for k in idx)
    return total
