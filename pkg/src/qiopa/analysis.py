"""Scalar witnesses and state comparators.

Entropies are in bits. Matrix square roots and entropies go through
Hermitian eigendecompositions with negative eigenvalues clipped at the
tolerance below; inputs violating positivity beyond 1e-6 are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .amplifier import build_psi_h, build_psi_v
from .errors import NonPhysicalStateError
from .fock_core import DensityMatrix, GainParams, inner_product

_CLIP_TOL = 1e-6


@dataclass(frozen=True)
class WitnessReport:
    """Aggregated scalar diagnostics of a state (unused fields stay None)."""

    ppt_min_eigenvalue: float | None = None
    entropy_bits: float | None = None
    uhlmann_fidelity: float | None = None
    hs_distance: float | None = None
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "ppt_min_eigenvalue": self.ppt_min_eigenvalue,
            "entropy_bits": self.entropy_bits,
            "uhlmann_fidelity": self.uhlmann_fidelity,
            "hs_distance": self.hs_distance,
            "provenance": dict(self.provenance),
        }


def _as_qubit_tensor(rho: DensityMatrix) -> np.ndarray:
    n = len(rho.labels)
    return rho.matrix.reshape([2] * (2 * n))


def partial_transpose(rho: DensityMatrix, subsystem: str) -> DensityMatrix:
    """Transpose of one labeled qubit; Hermitian but possibly indefinite."""
    axis = rho.qubit_axis(subsystem)
    n = len(rho.labels)
    tensor = np.swapaxes(_as_qubit_tensor(rho), axis, n + axis)
    return DensityMatrix(tensor.reshape(rho.dim, rho.dim), labels=rho.labels, physical=False)


def ppt_min_eigenvalue(rho: DensityMatrix, transposed_subsystem: str) -> float:
    """Minimal eigenvalue of the partial transpose.

    A negative value certifies non-separability across the cut between the
    transposed subsystem and the rest.
    """
    return partial_transpose(rho, transposed_subsystem).min_eigenvalue()


def partial_trace(rho: DensityMatrix, keep: tuple[str, ...]) -> DensityMatrix:
    """Marginal density matrix of the named qubits, in the order given."""
    axes = [rho.qubit_axis(label) for label in keep]
    n = len(rho.labels)
    tensor = _as_qubit_tensor(rho)
    drop = [i for i in range(n) if i not in axes]
    for i in sorted(drop, reverse=True):
        tensor = np.trace(tensor, axis1=i, axis2=tensor.ndim // 2 + i)
    kept_in_order = [lbl for lbl in rho.labels if lbl in keep]
    m = tensor.reshape(2 ** len(keep), 2 ** len(keep))
    if kept_in_order != list(keep):
        order = [kept_in_order.index(lbl) for lbl in keep]
        t = m.reshape([2] * (2 * len(keep)))
        t = np.transpose(t, order + [len(keep) + o for o in order])
        m = t.reshape(2 ** len(keep), 2 ** len(keep))
    return DensityMatrix(m, labels=tuple(keep), physical=rho.physical)


def _clipped_spectrum(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(rho.matrix)
    if vals[0] < -_CLIP_TOL:
        raise NonPhysicalStateError(f"eigenvalue {vals[0]:.3e} below -1e-6")
    return np.clip(vals, 0.0, None), vecs


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-sum(p log2 p) over the eigenvalues, with 0 log 0 = 0."""
    vals, _ = _clipped_spectrum(rho)
    positive = vals[vals > 0]
    return float(-(positive * np.log2(positive)).sum())


def entanglement_entropy_sigma(gain: GainParams) -> float:
    """Entropy of the trigger marginal of the heralded tripartite state.

    The branch kets are orthogonal with equal truncated norms, so the
    marginal is computed exactly from their 2x2 Gram matrix and the result
    is one bit at every gain.
    """
    branch_h = build_psi_h(gain).ket
    branch_v = build_psi_v(gain).ket
    gram = np.array(
        [
            [inner_product(branch_h, branch_h), -inner_product(branch_v, branch_h)],
            [-inner_product(branch_h, branch_v), inner_product(branch_v, branch_v)],
        ]
    ) / 2.0
    marginal = gram / gram.trace().real
    vals = np.clip(np.linalg.eigvalsh(marginal), 0.0, None)
    positive = vals[vals > 0]
    return float(-(positive * np.log2(positive)).sum())


def uhlmann_fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Mixed-state overlap [Tr sqrt(sqrt(a) b sqrt(a))]^2, in [0, 1].

    Eigenvalues below 1e-12 of the leading one are treated as exact zeros:
    the square root would otherwise amplify spectral noise of rank-deficient
    inputs into the trace.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    vals, vecs = _clipped_spectrum(a)
    vals[vals < 1e-12 * max(vals.max(), 1e-300)] = 0.0
    sqrt_a = (vecs * np.sqrt(vals)) @ vecs.conj().T
    _clipped_spectrum(b)
    inner = sqrt_a @ b.matrix @ sqrt_a
    inner_vals = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    inner_vals[inner_vals < 1e-12 * max(inner_vals.max(), 1e-300)] = 0.0
    f = float(np.sqrt(inner_vals).sum() ** 2)
    return min(max(f, 0.0), 1.0)


def hs_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Squared Hilbert-Schmidt distance Tr[(a - b)^2]."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.matrix - b.matrix
    return float(np.trace(diff @ diff).real)


def branch_hs_distance(gain: GainParams) -> float:
    """Squared Hilbert-Schmidt distance between the two branch projectors.

    For rank-1 operators Tr[(|a><a| - |b><b|)^2] reduces to
    <a|a>^2 + <b|b>^2 - 2|<a|b>|^2, which stays tractable at cutoffs where
    the dense matrices would not. The branches are disjoint, so the cross
    term vanishes and the distance is two up to the truncation tail.
    """
    a = build_psi_h(gain).ket
    b = build_psi_v(gain).ket
    na = inner_product(a, a).real
    nb = inner_product(b, b).real
    cross = abs(inner_product(a, b))
    return na**2 + nb**2 - 2.0 * cross**2
