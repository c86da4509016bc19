"""Decay channels: Kraus families, their application, and certificates.

Builds the completely positive trace-preserving map generated by a set of
decaying modes, as an explicit family of Kraus operators indexed by how
many quanta each decay mode loses.  Completeness and the commutation
certificate that validates the construction are computed and enforced on
the subspace where the truncated representation is exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
import scipy.linalg

from .fock import (
    DensityOperator,
    FockSpace,
    InvariantViolation,
    OperatorMatrix,
    Statistics,
    build_annihilator,
    vacuum_state,
)

if TYPE_CHECKING:  # pragma: no cover
    from .flavour import MixingParams

CERTIFICATE_TOL = 1e-10
COMPLETENESS_TOL = 1e-10
SUPPORT_TOL = 1e-14

# exp(-x) underflows well before this; treat the decayed weight as exact
LARGE_EXPONENT = 700.0


class CertificateError(ValueError):
    """The decay operators do not shift the non-Hermitian generator as required."""


class SupportError(ValueError):
    """State support exceeds the occupation range covered by the channel."""


@dataclass(frozen=True, eq=False)
class DecayModel:
    """Hamiltonian + decay operators defining one dissipative evolution.

    ``decay_ops[j]`` is the operator c_j annihilated with rate ``widths[j]``;
    the Lindblad operators are ``sqrt(widths[j]) * decay_ops[j]``.  For
    flavour-mixed models ``mixing_unitary`` holds the 2x2 matrix V with
    c_j^dag = sum_l V[j, l] a_l^dag, and ``mixing`` the originating angles.
    """

    space: FockSpace
    masses: tuple[float, ...]
    widths: tuple[float, ...]
    hamiltonian: OperatorMatrix
    lindblads: tuple[OperatorMatrix, ...]
    decay_ops: tuple[OperatorMatrix, ...]
    m_operator: OperatorMatrix
    mixing: "MixingParams | None" = None
    mixing_unitary: np.ndarray | None = None
    certificate_defect: float = 0.0

    @property
    def n_decay_modes(self) -> int:
        return len(self.decay_ops)

    @property
    def is_mixed(self) -> bool:
        return self.mixing_unitary is not None

    def exact_total_bound(self) -> float:
        """Largest total occupation whose dynamics the truncation captures exactly.

        Without mixing every retained tuple evolves exactly (decay only
        lowers occupations).  Mixed decay operators shuffle quanta between
        modes, so only total-occupation sectors not exceeding the common
        bosonic cutoff are exact.
        """
        if not self.is_mixed:
            return math.inf
        bos = [m.cutoff for m in self.space.modes if not m.is_fermion]
        return float(min(bos)) if bos else math.inf


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Ordered Kraus family for a fixed evolution time.

    ``multi_indices[i]`` records how many quanta operator ``operators[i]``
    removes from each decay mode.  ``completeness_defect`` is the spectral
    norm of (sum_k E_k^dag E_k - 1) restricted to the exactly-represented
    subspace (total occupation <= ``exact_bound``).
    """

    time: float
    operators: tuple[OperatorMatrix, ...]
    multi_indices: tuple[tuple[int, ...], ...]
    k_max: int
    exact_bound: float
    completeness_defect: float

    def exact_indices(self) -> np.ndarray:
        space = self.operators[0].space
        return np.flatnonzero(space.total_occupation <= self.exact_bound)


def _decay_weight(gamma: float, t: float) -> float:
    """1 - exp(-gamma t), exact 1.0 once the exponent is numerically dead."""
    x = gamma * t
    if x <= 0.0:
        return 0.0
    if x > LARGE_EXPONENT:
        return 1.0
    return -math.expm1(-x)


def _decay_amplitude(mass: float, gamma: float, t: float) -> complex:
    """exp(-(i m + gamma/2) t) with a clean underflow to exactly zero."""
    x = 0.5 * gamma * t
    if x > LARGE_EXPONENT:
        return 0.0j
    return complex(math.cos(-mass * t), math.sin(-mass * t)) * math.exp(-x)


def _mode_caps(space: FockSpace) -> tuple[int, ...]:
    return tuple(1 if m.is_fermion else m.cutoff for m in space.modes)


def kraus_multi_indices(space: FockSpace, k_max: int) -> tuple[tuple[int, ...], ...]:
    """Deterministic enumeration of loss patterns: grouped by total, then lexicographic."""
    caps = _mode_caps(space)
    indices = [
        t
        for t in itertools.product(*(range(c + 1) for c in caps))
        if sum(t) <= k_max
    ]
    indices.sort(key=lambda t: (sum(t), t))
    return tuple(indices)


def _certificate_defect(
    space: FockSpace,
    m_matrix: np.ndarray,
    decay_ops: Sequence[np.ndarray],
    masses: Sequence[float],
    widths: Sequence[float],
    mixed: bool,
) -> float:
    """Max deviation of [M, c_j] from -(m_j - i Gamma_j/2) c_j on safe columns.

    For mixed bosonic models the top occupation level of each mode is a
    known truncation artifact, so columns touching it are excluded; the
    relation is exact on the rest.
    """
    if mixed:
        cols = [
            i
            for i, occ in enumerate(space.occupations)
            if all(
                occ[l] <= space.modes[l].cutoff - 1
                for l in range(space.n_modes)
                if not space.modes[l].is_fermion
            )
        ]
    else:
        cols = list(range(space.dimension))
    if not cols:
        return 0.0
    worst = 0.0
    for c, m_j, g_j in zip(decay_ops, masses, widths):
        mu = m_j - 0.5j * g_j
        defect = m_matrix @ c - c @ m_matrix + mu * c
        worst = max(worst, float(np.max(np.abs(defect[:, cols]))))
    return worst


def _assemble_model(
    space: FockSpace,
    masses: Sequence[float],
    widths: Sequence[float],
    decay_ops: Sequence[OperatorMatrix],
    mixing=None,
    mixing_unitary: np.ndarray | None = None,
) -> DecayModel:
    masses = tuple(float(x) for x in masses)
    widths = tuple(float(x) for x in widths)
    if any(g < 0 for g in widths):
        raise ValueError(f"widths must be >= 0, got {widths}")
    if not (len(masses) == len(widths) == len(decay_ops)):
        raise ValueError("masses, widths and decay operators must align")

    dim = space.dimension
    ham = np.zeros((dim, dim), dtype=complex)
    kay = np.zeros((dim, dim), dtype=complex)
    lindblads = []
    for c, m_j, g_j in zip(decay_ops, masses, widths):
        cdag_c = c.entries.conj().T @ c.entries
        ham += m_j * cdag_c
        kay += -0.5 * g_j * cdag_c
        lindblads.append(OperatorMatrix(space, math.sqrt(g_j) * c.entries))
    herm = float(np.max(np.abs(ham - ham.conj().T)))
    if herm > 1e-12 * max(1.0, float(np.max(np.abs(ham)))):
        raise InvariantViolation(f"Hamiltonian not Hermitian: defect {herm:.3e}")
    m_matrix = ham + 1j * kay
    defect = _certificate_defect(
        space, m_matrix, [c.entries for c in decay_ops], masses, widths,
        mixed=mixing_unitary is not None,
    )
    return DecayModel(
        space=space,
        masses=masses,
        widths=widths,
        hamiltonian=OperatorMatrix(space, ham),
        lindblads=tuple(lindblads),
        decay_ops=tuple(decay_ops),
        m_operator=OperatorMatrix(space, m_matrix),
        mixing=mixing,
        mixing_unitary=mixing_unitary,
        certificate_defect=defect,
    )


def build_decay_model(
    space: FockSpace,
    masses: Sequence[float] | None = None,
    widths: Sequence[float] | None = None,
) -> DecayModel:
    """Unmixed model: every mode decays independently at its own width.

    Masses and widths default to the values carried by the space's modes.
    """
    if masses is None:
        masses = [m.mass for m in space.modes]
    if widths is None:
        widths = [m.width for m in space.modes]
    if len(tuple(masses)) != space.n_modes or len(tuple(widths)) != space.n_modes:
        raise ValueError("need one mass and one width per mode")
    ops = [build_annihilator(space, j) for j in range(1, space.n_modes + 1)]
    return _assemble_model(space, masses, widths, ops)


def _propagator(model: DecayModel, t: float) -> np.ndarray:
    """exp(-i M t); elementwise on the diagonal when no mixing is present."""
    dim = model.space.dimension
    if t == 0.0:
        return np.eye(dim, dtype=complex)
    if not model.is_mixed:
        occ = model.space.occupation_array
        phases = occ @ np.asarray(model.masses)
        rates = occ @ np.asarray(model.widths)
        mods = np.where(0.5 * rates * t > LARGE_EXPONENT, 0.0, np.exp(-0.5 * rates * t))
        return np.diag(np.exp(-1j * phases * t) * mods)
    return scipy.linalg.expm(-1j * model.m_operator.entries * t)


def build_kraus(model: DecayModel, t: float, k_max: int | None = None) -> KrausSet:
    """Kraus family at time t, one operator per loss pattern (k_1, ..., k_r).

    Each operator is exp(-i M t) prod_j (sqrt(1 - exp(-Gamma_j t)) c_j)^{k_j}
    / sqrt(k_j!), with k_j capped at the mode cutoff (1 for fermions) and
    sum k_j <= k_max.  At t = 0 the family is the identity plus zeros.
    """
    t = float(t)
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if model.certificate_defect > CERTIFICATE_TOL:
        raise CertificateError(
            f"commutation certificate defect {model.certificate_defect:.3e} exceeds "
            f"{CERTIFICATE_TOL}; Kraus construction is not valid for this model"
        )
    caps = _mode_caps(model.space)
    full = sum(caps)
    if k_max is None:
        k_max = full
    else:
        k_max = int(k_max)
        if k_max < 0:
            raise ValueError(f"k_max must be >= 0, got {k_max}")
        k_max = min(k_max, full)

    indices = kraus_multi_indices(model.space, k_max)
    weights = [_decay_weight(g, t) for g in model.widths]
    prop = _propagator(model, t)
    dim = model.space.dimension

    operators = []
    for kappa in indices:
        coeff2 = 1.0
        for k_j, w_j in zip(kappa, weights):
            if k_j:
                coeff2 *= w_j**k_j / math.factorial(k_j)
        if coeff2 == 0.0 and sum(kappa):
            operators.append(OperatorMatrix(model.space, np.zeros((dim, dim), dtype=complex)))
            continue
        mono = np.eye(dim, dtype=complex)
        for k_j, c in zip(kappa, model.decay_ops):
            for _ in range(k_j):
                mono = mono @ c.entries
        operators.append(OperatorMatrix(model.space, math.sqrt(coeff2) * (prop @ mono)))

    exact_bound = min(float(k_max), model.exact_total_bound())
    ix = np.flatnonzero(model.space.total_occupation <= exact_bound)
    total = sum(E.entries.conj().T @ E.entries for E in operators)
    block = (total - np.eye(dim))[np.ix_(ix, ix)]
    defect = float(np.linalg.norm(block, 2)) if ix.size else 0.0
    if defect > COMPLETENESS_TOL:
        raise InvariantViolation(
            f"Kraus completeness defect {defect:.3e} on the exact subspace "
            f"(total occupation <= {exact_bound})"
        )
    return KrausSet(
        time=t,
        operators=tuple(operators),
        multi_indices=indices,
        k_max=k_max,
        exact_bound=exact_bound,
        completeness_defect=defect,
    )


def apply_channel_matrix(kraus: KrausSet, matrix: np.ndarray) -> np.ndarray:
    """Linear action sum_k E_k X E_k^dag on a raw matrix."""
    out = np.zeros_like(np.asarray(matrix, dtype=complex))
    for E in kraus.operators:
        out += E.entries @ matrix @ E.entries.conj().T
    return out


def support_total_bound(rho: DensityOperator, tol: float = SUPPORT_TOL) -> int:
    """Largest total occupation carrying any weight in the state."""
    mag = np.maximum(
        np.max(np.abs(rho.matrix), axis=0), np.max(np.abs(rho.matrix), axis=1)
    )
    live = np.flatnonzero(mag > tol)
    if live.size == 0:
        return 0
    return int(rho.space.total_occupation[live].max())


def apply_channel(kraus: KrausSet, rho: DensityOperator) -> DensityOperator:
    """Evolve a state through the channel; trace is preserved to 1e-12."""
    space = kraus.operators[0].space
    if rho.space != space:
        raise ValueError("state and Kraus family live on different spaces")
    bound = support_total_bound(rho)
    if bound > kraus.exact_bound:
        raise SupportError(
            f"state support reaches total occupation {bound}, beyond the "
            f"exactly covered bound {kraus.exact_bound} (k_max={kraus.k_max})"
        )
    out = apply_channel_matrix(kraus, rho.matrix)
    drift = abs(complex(np.trace(out)) - complex(np.trace(rho.matrix)))
    if drift > 1e-12:
        raise InvariantViolation(f"channel changed the trace by {drift:.3e}")
    return DensityOperator(space, out, tail_weight=rho.tail_weight)


def evolve_state(
    model: DecayModel,
    rho0: DensityOperator,
    times: Sequence[float],
    k_max: int | None = None,
) -> list[DensityOperator]:
    """Channel evolution sampled on a time grid (one Kraus family per point)."""
    times = [float(t) for t in times]
    if any(t < 0 for t in times):
        raise ValueError("times must be >= 0")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be sorted ascending")
    if rho0.space != model.space:
        raise ValueError("state and model live on different spaces")
    if k_max is None:
        k_max = support_total_bound(rho0)
    out = []
    for t in times:
        out.append(apply_channel(build_kraus(model, t, k_max), rho0))
    return out


def expectation(rho: DensityOperator, obs: OperatorMatrix) -> float:
    """tr(rho * obs) for a Hermitian observable; the tiny imaginary residue
    left by floating point is checked and discarded."""
    if rho.space != obs.space:
        raise ValueError("state and observable live on different spaces")
    herm = obs.hermiticity_defect()
    if herm > 1e-12 * max(1.0, float(np.max(np.abs(obs.entries)))):
        raise ValueError(f"observable is not Hermitian (defect {herm:.3e})")
    value = complex(np.einsum("ij,ji->", rho.matrix, obs.entries))
    scale = max(1.0, float(np.max(np.abs(obs.entries))))
    if abs(value.imag) > 1e-12 * scale:
        raise InvariantViolation(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def occupation_distribution(rho: DensityOperator) -> dict[tuple[int, ...], float]:
    """Probabilities of each occupation tuple (the diagonal of the state)."""
    diag = np.diag(rho.matrix)
    if float(np.max(np.abs(diag.imag))) > 1e-12:
        raise InvariantViolation("occupation probabilities have imaginary parts")
    probs = diag.real
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-12:
        raise InvariantViolation(f"occupation probabilities sum to {total}, not 1")
    return {occ: float(p) for occ, p in zip(rho.space.occupations, probs)}


def trace_distance(a, b) -> float:
    """(1/2) ||a - b||_1 between two states or raw matrices."""
    ma = a.matrix if isinstance(a, DensityOperator) else np.asarray(a, dtype=complex)
    mb = b.matrix if isinstance(b, DensityOperator) else np.asarray(b, dtype=complex)
    delta = ma - mb
    delta = 0.5 * (delta + delta.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(delta))))


def enforce_superselection(rho: DensityOperator) -> DensityOperator:
    """Drop coherences between different total-occupation sectors (a pinching)."""
    tot = rho.space.total_occupation
    mask = (tot[:, None] == tot[None, :]).astype(float)
    return DensityOperator(rho.space, rho.matrix * mask, tail_weight=rho.tail_weight)


def distance_to_vacuum(rho: DensityOperator) -> float:
    return trace_distance(rho, vacuum_state(rho.space))
