"""Two-flavour mixing: the mixing unitary, mixed decay models, observables.

The propagation modes c_1, c_2 (definite mass and width) are a unitary
rotation of the detection flavours a_1, a_2; their mismatch is what makes
the flavour charge oscillate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import DecayModel, _assemble_model
from .fock import FockSpace, OperatorMatrix, build_annihilator

UNITARITY_TOL = 1e-14

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MixingParams:
    """Mixing angles (theta, phi, psi) plus a global phase chi.

    Angles are stored reduced to [0, 2*pi) so serialized configs have a
    canonical form; the reduction changes nothing observable.
    """

    theta: float = 0.0
    phi: float = 0.0
    psi: float = 0.0
    chi: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi", "psi", "chi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value % TWO_PI)


def mixing_matrix(params: MixingParams) -> np.ndarray:
    """2x2 unitary V with c_j^dag = sum_l V[j, l] a_l^dag."""
    c = math.cos(0.5 * params.theta)
    s = math.sin(0.5 * params.theta)
    phase = np.exp(1j * params.chi)
    V = phase * np.array(
        [
            [np.exp(0.5j * (params.phi + params.psi)) * c,
             np.exp(-0.5j * (params.phi - params.psi)) * s],
            [-np.exp(0.5j * (params.phi - params.psi)) * s,
             np.exp(-0.5j * (params.phi + params.psi)) * c],
        ],
        dtype=complex,
    )
    defect = float(np.max(np.abs(V @ V.conj().T - np.eye(2))))
    if defect > UNITARITY_TOL:
        raise ValueError(f"mixing matrix unitarity defect {defect:.3e}")
    return V


def build_mixed_model(
    space: FockSpace,
    params: MixingParams,
    masses: tuple[float, float],
    widths: tuple[float, float],
) -> DecayModel:
    """Two-flavour model whose decay modes are the rotated operators c_1, c_2.

    Both modes must share one statistics and one cutoff: the rotation moves
    quanta between modes, so an asymmetric truncation would not be closed
    under it.  Fermionic pairs are accepted (the loss patterns are then
    restricted to {0, 1}) but the worked closed forms target bosons.
    """
    if space.n_modes != 2:
        raise ValueError(f"mixing needs exactly 2 modes, space has {space.n_modes}")
    m1, m2 = space.modes
    if m1.statistics is not m2.statistics:
        raise ValueError("mixing needs both modes to share one statistics")
    if m1.cutoff != m2.cutoff:
        raise ValueError(
            f"mixing needs equal cutoffs, got {m1.cutoff} and {m2.cutoff}"
        )
    V = mixing_matrix(params)
    a_ops = [build_annihilator(space, 1).entries, build_annihilator(space, 2).entries]
    decay_ops = []
    for j in range(2):
        cj = V[j, 0].conjugate() * a_ops[0] + V[j, 1].conjugate() * a_ops[1]
        decay_ops.append(OperatorMatrix(space, cj))
    return _assemble_model(
        space,
        masses=tuple(float(x) for x in masses),
        widths=tuple(float(x) for x in widths),
        decay_ops=decay_ops,
        mixing=params,
        mixing_unitary=V,
    )


def build_flavour_observables(space: FockSpace, phi: float = 0.0) -> dict[str, OperatorMatrix]:
    """Total number N, flavour charge S, and the coherence pair Qplus/Qminus.

    The phase on the off-diagonal pair must match the phi used in the
    mixing parameters for the closed-form identities to hold.
    """
    if space.n_modes != 2:
        raise ValueError(f"flavour observables need exactly 2 modes, space has {space.n_modes}")
    a1 = build_annihilator(space, 1).entries
    a2 = build_annihilator(space, 2).entries
    n1 = a1.conj().T @ a1
    n2 = a2.conj().T @ a2
    cross = np.exp(1j * phi) * (a1.conj().T @ a2)
    return {
        "N": OperatorMatrix(space, n1 + n2),
        "S": OperatorMatrix(space, n1 - n2),
        "Qplus": OperatorMatrix(space, cross + cross.conj().T),
        "Qminus": OperatorMatrix(space, 1j * (cross - cross.conj().T)),
    }
