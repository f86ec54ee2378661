"""Core value types: polarization qubits, sparse Fock kets, density matrices.

The photon modes are two spatial arms, each with two linear polarizations.
Mode ordering is fixed everywhere as (k1H, k1V, k2H, k2V), so a horizontal
photon on k1 is the occupation |1,0,0,0>. Kets may additionally carry a
heralding trigger polarization for tripartite states. All types are
immutable values; all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MODE_NAMES = ("k1H", "k1V", "k2H", "k2V")
_MODE_INDEX = {name: i for i, name in enumerate(MODE_NAMES)}

HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-9


@dataclass(frozen=True)
class PolarizationQubit:
    """Single-photon polarization state alpha|H> + beta|V>, kept normalized."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = math.hypot(abs(self.alpha), abs(self.beta))
        if norm == 0.0:
            raise ValueError("polarization amplitudes must not both be zero")
        object.__setattr__(self, "alpha", complex(self.alpha) / norm)
        object.__setattr__(self, "beta", complex(self.beta) / norm)

    @classmethod
    def h(cls) -> "PolarizationQubit":
        return cls(1.0, 0.0)

    @classmethod
    def v(cls) -> "PolarizationQubit":
        return cls(0.0, 1.0)

    @classmethod
    def plus(cls) -> "PolarizationQubit":
        return cls(1.0, 1.0)

    @classmethod
    def minus(cls) -> "PolarizationQubit":
        return cls(1.0, -1.0)

    def amplitudes(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def overlap(self, other: "PolarizationQubit") -> complex:
        return complex(np.vdot(self.amplitudes(), other.amplitudes()))


_PAULI = {
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def bloch_rotate(q: PolarizationQubit, axis: str, angle: float) -> PolarizationQubit:
    """Rotate a polarization qubit by `angle` radians about a Bloch axis.

    A Z-rotation by phi turns (|H> + |V>)/sqrt2 into (|H> + e^{i phi}|V>)/sqrt2
    up to a global phase.
    """
    if axis not in _PAULI:
        raise ValueError(f"unknown rotation axis {axis!r}, expected X, Y or Z")
    u = math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * _PAULI[axis]
    a, b = u @ q.amplitudes()
    return PolarizationQubit(a, b)


@dataclass(frozen=True, slots=True)
class FockOccupation:
    """Photon numbers on the four modes plus an optional trigger polarization."""

    n1H: int
    n1V: int
    n2H: int
    n2V: int
    trigger: str | None = None

    def __post_init__(self):
        for n in (self.n1H, self.n1V, self.n2H, self.n2V):
            if n < 0:
                raise ValueError("occupation numbers must be nonnegative")
        if self.trigger not in (None, "H", "V"):
            raise ValueError("trigger must be 'H', 'V' or None")

    @property
    def occupations(self) -> tuple[int, int, int, int]:
        return (self.n1H, self.n1V, self.n2H, self.n2V)

    def photons(self, modes: Iterable[str] = MODE_NAMES) -> int:
        """Total photon number over the selected modes (trigger excluded)."""
        occ = self.occupations
        total = 0
        for m in modes:
            total += occ[_MODE_INDEX[m]]
        return total

    def sort_key(self):
        return ("" if self.trigger is None else self.trigger, self.occupations)


@dataclass(frozen=True)
class GainParams:
    """Nonlinear gain together with the Fock truncation policy.

    `cutoff` is either a fixed maximum for each of the two pair indices or
    "auto", in which case builders grow the cap until the discarded tail
    probability mass drops below `epsilon_trunc` (hard bound `hard_cap`).
    """

    g: float
    cutoff: int | str = "auto"
    epsilon_trunc: float = 1e-10
    hard_cap: int = 2048

    def __post_init__(self):
        if not (self.g >= 0.0 and math.isfinite(self.g)):
            raise ValueError("gain must be finite and nonnegative")
        if isinstance(self.cutoff, str):
            if self.cutoff != "auto":
                raise ValueError("cutoff must be a nonnegative integer or 'auto'")
        elif self.cutoff < 0:
            raise ValueError("cutoff must be a nonnegative integer or 'auto'")
        if not (0.0 < self.epsilon_trunc < 1.0):
            raise ValueError("epsilon_trunc must be in (0, 1)")

    @property
    def gamma_cap(self) -> float:
        """Geometric decay factor of the pair amplitudes, tanh(g)."""
        return math.tanh(self.g)


@dataclass(frozen=True)
class SparseKet:
    """Complex amplitudes over Fock occupations, stored sparsely.

    Either every occupation carries a trigger label or none does; mixing the
    two is a structural error. `gain_tag` records the gain used to build the
    ket (provenance only, never consulted by algebra).
    """

    terms: Mapping[FockOccupation, complex]
    gain_tag: GainParams | None = None

    def __post_init__(self):
        terms = dict(self.terms)
        triggered = [occ.trigger is not None for occ in terms]
        if triggered and any(triggered) and not all(triggered):
            raise ValueError("ket mixes triggered and untriggered occupations")
        object.__setattr__(self, "terms", terms)

    @property
    def has_trigger(self) -> bool:
        return any(occ.trigger is not None for occ in self.terms)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def sorted_terms(self) -> list[tuple[FockOccupation, complex]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())


def superpose(
    pairs: Sequence[tuple[complex, SparseKet]],
    gain_tag: GainParams | None = None,
) -> SparseKet:
    """Linear combination of kets; exact-zero amplitudes are dropped."""
    out: dict[FockOccupation, complex] = {}
    for coeff, ket in pairs:
        if coeff == 0:
            continue
        for occ, amp in ket.terms.items():
            out[occ] = out.get(occ, 0.0) + coeff * amp
    out = {occ: amp for occ, amp in out.items() if amp != 0}
    return SparseKet(out, gain_tag=gain_tag)


def inner_product(a: SparseKet, b: SparseKet) -> complex:
    """<a|b> over the shared occupations.

    Raises ValueError when one ket carries a trigger label and the other
    does not, since the two live in structurally different spaces.
    """
    if a.has_trigger != b.has_trigger:
        raise ValueError("cannot take inner product across trigger structure mismatch")
    small, large = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    total = 0.0 + 0.0j
    for occ, amp in small.items():
        other = large.get(occ)
        if other is not None:
            if small is a.terms:
                total += amp.conjugate() * other
            else:
                total += other.conjugate() * amp
    return total


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense Hermitian matrix with ordered subsystem labels.

    For qubit-structured states dim == 2**len(labels) and the basis is the
    row-major tensor product with |H>, |V> per subsystem. `physical` is False
    for raw linear-inversion reconstructions, which are Hermitian with unit
    trace but may carry negative eigenvalues.
    """

    matrix: np.ndarray
    labels: tuple[str, ...] = ("state",)
    physical: bool = True

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.abs(m - m.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("matrix is not Hermitian within 1e-10")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(self.matrix.trace().real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def is_qubit_structured(self) -> bool:
        return self.dim == 2 ** len(self.labels)

    def qubit_axis(self, label: str) -> int:
        if not self.is_qubit_structured():
            raise ValueError("matrix is not a tensor product of labeled qubits")
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown subsystem label {label!r}") from None


def ket_to_density(
    k: SparseKet | PolarizationQubit,
    basis: Sequence[FockOccupation] | None = None,
) -> DensityMatrix:
    """Rank-1 projector |k><k| in the occupied (or supplied) basis.

    A PolarizationQubit yields the 2x2 polarization matrix in the (H, V)
    basis. For a SparseKet the basis defaults to the occupied occupations in
    canonical order; pass an explicit shared basis to compare kets with
    disjoint supports.
    """
    if isinstance(k, PolarizationQubit):
        v = k.amplitudes()
        return DensityMatrix(np.outer(v, v.conj()), labels=("qubit",))
    if basis is None:
        basis = [occ for occ, _ in k.sorted_terms()]
    v = np.array([k.terms.get(occ, 0.0) for occ in basis], dtype=complex)
    return DensityMatrix(np.outer(v, v.conj()), labels=("fock",))


def union_basis(*kets: SparseKet) -> list[FockOccupation]:
    """Canonically ordered union of the occupations of several kets."""
    occs = set()
    for k in kets:
        occs.update(k.terms)
    return sorted(occs, key=lambda occ: occ.sort_key())


# ---------------------------------------------------------------------------
# JSON structures


def ket_to_json(k: SparseKet) -> list[dict]:
    return [
        {
            "occ": list(occ.occupations),
            "trigger": occ.trigger,
            "amp": [amp.real, amp.imag],
        }
        for occ, amp in k.sorted_terms()
    ]


def ket_from_json(items: Iterable[Mapping]) -> SparseKet:
    terms = {}
    for item in items:
        occ = FockOccupation(*item["occ"], trigger=item["trigger"])
        terms[occ] = complex(item["amp"][0], item["amp"][1])
    return SparseKet(terms)


def density_to_json(dm: DensityMatrix) -> dict:
    entries = [[z.real, z.imag] for z in dm.matrix.ravel()]
    return {"labels": list(dm.labels), "dim": dm.dim, "entries": entries}


def density_from_json(data: Mapping, physical: bool = True) -> DensityMatrix:
    dim = data["dim"]
    flat = np.array([complex(re, im) for re, im in data["entries"]])
    if flat.size != dim * dim:
        raise ValueError("entry count does not match dim")
    return DensityMatrix(flat.reshape(dim, dim), labels=tuple(data["labels"]), physical=physical)
