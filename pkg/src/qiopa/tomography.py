"""Polarization-analyzer simulation and density-matrix reconstruction.

Analyzer labels per qubit: H/V (linear), D/A (diagonal, +45/-45 degrees) and
L/R (circular, L = (|H> + i|V>)/sqrt2). A measurement setting is one label
per qubit; its projector is the tensor product of the rank-1 single-qubit
projectors. Two tomographic schemes are supported:

  minimal       {H, V, D, R} per qubit, 4^n settings, an invertible frame;
  overcomplete  {H, V, D, A, L, R} per qubit, 6^n settings (both analyzer
                ports of three bases), solved by least squares.

Counts are independent Poisson draws per setting. Randomness uses PCG64
generators seeded through numpy SeedSequence(seed).spawn(...), one child per
setting (or per bootstrap resample) in the record's listed order, so results
never depend on evaluation or scheduling order.

Reconstruction is linear: estimated probabilities (normalized by the total
of the {H,V}^n settings) are mapped to Pauli correlation coefficients and
assembled into a unit-trace Hermitian matrix. The output may have negative
eigenvalues and is flagged non-physical; `project_to_physical` optionally
clips the spectrum and renormalizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .amplifier import AmplifiedState, build_psi_h, build_psi_v
from .errors import DegenerateEventError
from .fock_core import DensityMatrix, GainParams, PolarizationQubit, superpose
from .loss_reduction import LossSpec, reduce_two_qubit

AnalyzerSetting = tuple[str, ...]

_SQRT2 = math.sqrt(2.0)

ANALYZER_KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([1.0, 1.0], dtype=complex) / _SQRT2,
    "A": np.array([1.0, -1.0], dtype=complex) / _SQRT2,
    "L": np.array([1.0, 1.0j], dtype=complex) / _SQRT2,
    "R": np.array([1.0, -1.0j], dtype=complex) / _SQRT2,
}

SCHEME_LABELS = {"minimal": "HVDR", "overcomplete": "HVDALR"}

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def scheme_settings(scheme: str, n_qubits: int) -> list[AnalyzerSetting]:
    """Canonically ordered setting list of a tomographic scheme."""
    if scheme not in SCHEME_LABELS:
        raise ValueError(f"unknown scheme {scheme!r}")
    return list(product(SCHEME_LABELS[scheme], repeat=n_qubits))


def projector(setting: AnalyzerSetting) -> DensityMatrix:
    """Tensor product of rank-1 analyzer projectors for one setting."""
    p = np.array([[1.0 + 0.0j]])
    for label in setting:
        if label not in ANALYZER_KETS:
            raise ValueError(f"unknown analyzer label {label!r}")
        ket = ANALYZER_KETS[label]
        p = np.kron(p, np.outer(ket, ket.conj()))
    labels = tuple(f"q{i}" for i in range(len(setting)))
    return DensityMatrix(p, labels=labels)


def expected_rate(rho: DensityMatrix, setting: AnalyzerSetting) -> float:
    """Born probability Tr(rho P) of one analyzer setting, clamped to [0, 1]."""
    p = projector(setting)
    if p.dim != rho.dim:
        raise ValueError(f"setting has {p.dim} dimensions, state has {rho.dim}")
    value = float(np.trace(rho.matrix @ p.matrix).real)
    if rho.physical and not (-1e-10 <= value <= 1.0 + 1e-10):
        raise ValueError(f"Born rate {value} outside [0, 1] for a physical state")
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class CountRecord:
    """Per-setting event counts with the exposure and seed that produced them.

    Entries hold Poisson draws (integers) or, for noiseless records, the
    expected values themselves; iteration order is the canonical scheme
    order.
    """

    entries: Mapping[AnalyzerSetting, float]
    scale: float
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))
        for setting, count in self.entries.items():
            if count < 0:
                raise ValueError(f"negative count at {setting}")

    def settings(self) -> list[AnalyzerSetting]:
        return list(self.entries)

    def n_qubits(self) -> int:
        return len(next(iter(self.entries)))

    def to_csv(self) -> str:
        lines = ["setting,count"]
        for setting, count in self.entries.items():
            lines.append(f"{''.join(setting)},{count:.9g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, scale: float = 0.0, seed: int | None = None) -> "CountRecord":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if lines[0] != "setting,count":
            raise ValueError("bad counts CSV header")
        entries = {}
        for ln in lines[1:]:
            raw_setting, raw_count = ln.split(",")
            count = float(raw_count)
            entries[tuple(raw_setting)] = int(count) if count.is_integer() else count
        return cls(entries, scale=scale, seed=seed)


def simulate_counts(
    rho: DensityMatrix,
    settings: Sequence[AnalyzerSetting],
    scale: float,
    seed: int,
) -> CountRecord:
    """Independent Poisson counts with mean scale * Born rate per setting."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    children = np.random.SeedSequence(seed).spawn(len(settings))
    entries = {}
    for setting, child in zip(settings, children):
        rng = np.random.Generator(np.random.PCG64(child))
        entries[tuple(setting)] = int(rng.poisson(scale * expected_rate(rho, setting)))
    return CountRecord(entries, scale=scale, seed=seed)


def expected_counts(
    rho: DensityMatrix, settings: Sequence[AnalyzerSetting], scale: float
) -> CountRecord:
    """Noiseless record holding the expected counts themselves."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    entries = {tuple(s): scale * expected_rate(rho, s) for s in settings}
    return CountRecord(entries, scale=scale, seed=None)


@lru_cache(maxsize=8)
def _pauli_words(n_qubits: int) -> np.ndarray:
    words = []
    for labels in product("IXYZ", repeat=n_qubits):
        w = np.array([[1.0 + 0.0j]])
        for c in labels:
            w = np.kron(w, _PAULI[c])
        words.append(w)
    return np.stack(words)


@lru_cache(maxsize=8)
def _design_pinv(scheme: str, n_qubits: int) -> np.ndarray:
    settings = scheme_settings(scheme, n_qubits)
    words = _pauli_words(n_qubits)
    rows = []
    for setting in settings:
        p = projector(setting).matrix
        rows.append(np.einsum("ij,wji->w", p, words).real / 2**n_qubits)
    return np.linalg.pinv(np.array(rows))


def infer_scheme(counts: CountRecord) -> str:
    n = counts.n_qubits()
    size = len(counts.entries)
    for scheme in SCHEME_LABELS:
        if size == len(SCHEME_LABELS[scheme]) ** n:
            return scheme
    raise ValueError(f"cannot infer scheme from {size} settings on {n} qubits")


def linear_inversion(
    counts: CountRecord,
    scheme: str = "minimal",
    labels: tuple[str, ...] | None = None,
) -> DensityMatrix:
    """Direct linear reconstruction of the measured state.

    Hermitian with unit trace by construction; possibly indefinite, hence
    flagged `physical=False`. Normalization is estimated from the total of
    the {H,V}^n settings.
    """
    n = counts.n_qubits()
    settings = scheme_settings(scheme, n)
    missing = [s for s in settings if s not in counts.entries]
    if missing:
        raise ValueError(f"counts missing {len(missing)} settings, e.g. {''.join(missing[0])}")
    norm_total = sum(counts.entries[s] for s in settings if set(s) <= {"H", "V"})
    if norm_total <= 0:
        raise ValueError("all-zero counts in the {H,V}^n normalization group")
    probs = np.array([counts.entries[s] for s in settings]) / norm_total
    coeffs = _design_pinv(scheme, n) @ probs
    rho = np.tensordot(coeffs, _pauli_words(n), axes=1) / 2**n
    trace = rho.trace().real
    if trace <= 0:
        raise ValueError("reconstruction has nonpositive trace")
    if labels is None:
        labels = tuple(f"q{i}" for i in range(n))
    return DensityMatrix(rho / trace, labels=labels, physical=False)


def project_to_physical(rho: DensityMatrix) -> DensityMatrix:
    """Nearest positive matrix by eigenvalue clipping, trace renormalized."""
    vals, vecs = np.linalg.eigh(rho.matrix)
    clipped = np.clip(vals, 0.0, None)
    total = clipped.sum()
    if total <= 0:
        raise ValueError("matrix has no positive spectral weight")
    fixed = (vecs * (clipped / total)) @ vecs.conj().T
    return DensityMatrix(fixed, labels=rho.labels, physical=True)


@dataclass(frozen=True)
class BootstrapResult:
    """Resampled statistic summary; failed resamples are excluded."""

    mean: float
    stddev: float
    n_resamples: int
    n_excluded: int
    statistic: str


def bootstrap_errors(
    counts: CountRecord,
    statistic: Callable[[DensityMatrix], float],
    n_resamples: int,
    seed: int,
    scheme: str | None = None,
    labels: tuple[str, ...] | None = None,
) -> BootstrapResult:
    """Poisson bootstrap of a scalar statistic of the reconstructed state.

    Each resample redraws every count as Poisson(observed count), re-runs
    the inversion and evaluates the statistic. Per-resample substreams make
    the result independent of resample order.
    """
    if n_resamples < 2:
        raise ValueError("need at least 2 resamples")
    if scheme is None:
        scheme = infer_scheme(counts)
    settings = counts.settings()
    observed = [counts.entries[s] for s in settings]
    children = np.random.SeedSequence(seed).spawn(n_resamples)
    values = []
    excluded = 0
    for child in children:
        rng = np.random.Generator(np.random.PCG64(child))
        resampled = {s: int(rng.poisson(lam)) for s, lam in zip(settings, observed)}
        try:
            rho = linear_inversion(
                CountRecord(resampled, scale=counts.scale, seed=None), scheme, labels=labels
            )
            values.append(float(statistic(rho)))
        except (ValueError, ArithmeticError):
            excluded += 1
    if len(values) < 2:
        raise ValueError(f"statistic failed on {excluded} of {n_resamples} resamples")
    arr = np.array(values)
    name = getattr(statistic, "__name__", "statistic")
    return BootstrapResult(
        mean=float(arr.mean()),
        stddev=float(arr.std(ddof=1)),
        n_resamples=n_resamples,
        n_excluded=excluded,
        statistic=name,
    )


# ---------------------------------------------------------------------------
# Interference fringes


@dataclass(frozen=True)
class FringeScan:
    """Conditioned analyzer probabilities on both arms versus input phase."""

    phi_values: tuple[float, ...]
    rate_plus_k1: tuple[float, ...]
    rate_minus_k1: tuple[float, ...]
    rate_plus_k2: tuple[float, ...]
    rate_minus_k2: tuple[float, ...]
    degenerate: tuple[bool, ...]
    basis: str

    def to_csv(self) -> str:
        lines = ["phi,rate_plus_k1,rate_minus_k1,rate_plus_k2,rate_minus_k2,degenerate"]
        rows = zip(
            self.phi_values,
            self.rate_plus_k1,
            self.rate_minus_k1,
            self.rate_plus_k2,
            self.rate_minus_k2,
            self.degenerate,
        )
        for phi, p1, m1, p2, m2, flag in rows:
            lines.append(f"{phi:.9g},{p1:.9g},{m1:.9g},{p2:.9g},{m2:.9g},{int(flag)}")
        return "\n".join(lines) + "\n"


_FRINGE_BASES = {"pm": ("D", "A"), "lr": ("L", "R")}


def fringe_scan(
    gain: GainParams,
    loss: LossSpec,
    phis: Sequence[float],
    basis: str = "pm",
) -> FringeScan:
    """Phase scan of the conditioned state with (|H> + e^{i phi}|V>)/sqrt2 injected.

    Rates are analyzer probabilities on the conditioned two-qubit state, so
    plus and minus sum to one arm by arm. Points where the conditioning
    event is impossible are flagged, not fatal.
    """
    if len(phis) == 0:
        raise ValueError("phi list must be nonempty")
    if basis not in _FRINGE_BASES:
        raise ValueError(f"unknown fringe basis {basis!r}")
    plus_label, minus_label = _FRINGE_BASES[basis]
    branch_h = build_psi_h(gain).ket
    branch_v = build_psi_v(gain).ket
    w = 1.0 / _SQRT2

    columns = {"p1": [], "m1": [], "p2": [], "m2": []}
    flags = []
    for phi in phis:
        qubit = PolarizationQubit(w, w * complex(math.cos(phi), math.sin(phi)))
        ket = superpose([(qubit.alpha, branch_h), (qubit.beta, branch_v)], gain_tag=gain)
        state = AmplifiedState(ket, gain, qubit)
        try:
            reduced = reduce_two_qubit(state, loss)
        except DegenerateEventError:
            for col in columns.values():
                col.append(math.nan)
            flags.append(True)
            continue
        rho = reduced.rho
        columns["p1"].append(expected_rate(rho, (plus_label, "H")) + expected_rate(rho, (plus_label, "V")))
        columns["m1"].append(expected_rate(rho, (minus_label, "H")) + expected_rate(rho, (minus_label, "V")))
        columns["p2"].append(expected_rate(rho, ("H", plus_label)) + expected_rate(rho, ("V", plus_label)))
        columns["m2"].append(expected_rate(rho, ("H", minus_label)) + expected_rate(rho, ("V", minus_label)))
        flags.append(False)
    return FringeScan(
        phi_values=tuple(float(p) for p in phis),
        rate_plus_k1=tuple(columns["p1"]),
        rate_minus_k1=tuple(columns["m1"]),
        rate_plus_k2=tuple(columns["p2"]),
        rate_minus_k2=tuple(columns["m2"]),
        degenerate=tuple(flags),
        basis=basis,
    )


def visibility(scan: FringeScan, mode: str) -> float:
    """First-harmonic fringe visibility of one arm's plus-analyzer rate.

    Least-squares fit of a + b cos(phi + c); returns (max-min)/(max+min) of
    the fitted sinusoid, which is |b|/a, clamped to [0, 1]. A flat scan gives
    zero.
    """
    if mode not in ("k1", "k2"):
        raise ValueError(f"mode must be 'k1' or 'k2', got {mode!r}")
    rates = scan.rate_plus_k1 if mode == "k1" else scan.rate_plus_k2
    points = [(p, r) for p, r, d in zip(scan.phi_values, rates, scan.degenerate) if not d]
    if len(points) < 8:
        raise ValueError("need at least 8 non-degenerate points over a full period")
    phi = np.array([p for p, _ in points])
    r = np.array([v for _, v in points])
    span = phi.max() - phi.min()
    if span < 2 * math.pi * (1 - 1.0 / len(points)) - 1e-9:
        raise ValueError("scan does not cover a full period")
    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    (a, b, c), *_ = np.linalg.lstsq(design, r, rcond=None)
    amplitude = math.hypot(b, c)
    if a <= 0 or amplitude < 1e-12 * max(a, 1.0):
        return 0.0
    return min(amplitude / a, 1.0)


def visibility_theory_k1(g: float) -> float:
    """Gain law for the cloning-arm fringe visibility, 1/(1 + 2 tanh^2 g)."""
    if g < 0:
        raise ValueError("gain must be nonnegative")
    return 1.0 / (1.0 + 2.0 * math.tanh(g) ** 2)


def fidelity_from_visibility(v: float) -> float:
    """Cloning fidelity implied by a fringe visibility, (1 + v)/2."""
    if not (0.0 <= v <= 1.0):
        raise ValueError("visibility must be in [0, 1]")
    return (1.0 + v) / 2.0
