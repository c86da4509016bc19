"""Brute-force oracle: the generator as a linear map plus fixed-step RK4.

Independent of the Kraus construction on purpose; it integrates the
first-order system for the density matrix directly so the two routes can
be compared against each other.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import DecayModel
from .fock import DensityOperator, InvariantViolation

EIG_EXCURSION_FLOOR = -1e-8
STEP_MATCH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GeneratorAction:
    """Right-hand side of the evolution: rho -> W rho + rho W^dag + sum L rho L^dag,

    where W = -i(H + iK) combines the commutator and anticommutator parts.
    """

    model: DecayModel
    w_matrix: np.ndarray
    jump_ops: tuple[np.ndarray, ...]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = self.w_matrix @ rho + rho @ self.w_matrix.conj().T
        for L in self.jump_ops:
            out += L @ rho @ L.conj().T
        return out


def build_generator(model: DecayModel) -> GeneratorAction:
    w = -1j * model.m_operator.entries
    jumps = tuple(L.entries for L in model.lindblads)
    return GeneratorAction(model=model, w_matrix=w, jump_ops=jumps)


def generator_apply(gen: GeneratorAction, rho_matrix: np.ndarray) -> np.ndarray:
    """One application of the generator to a raw density matrix."""
    rho = np.asarray(rho_matrix, dtype=complex)
    dim = gen.model.space.dimension
    if rho.shape != (dim, dim):
        raise ValueError(f"matrix shape {rho.shape} does not match dimension {dim}")
    return gen(rho)


def _steps_for(t: float, step: float) -> int:
    n = int(round(t / step))
    if abs(n * step - t) > STEP_MATCH_TOL * max(1.0, abs(t)):
        raise ValueError(
            f"time {t!r} is not a multiple of step {step!r}; "
            "interpolation is not supported"
        )
    return n


def integrate(
    gen: GeneratorAction,
    rho0: DensityOperator,
    times: Sequence[float],
    step: float,
) -> list[DensityOperator]:
    """Classic fixed-step RK4 trajectory sampled at the requested times.

    Every requested time must be an integer multiple of ``step``.  The
    trajectory is returned as-is: no renormalization and no positivity
    projection, so trace drift stays visible to the caller.  Negative
    eigenvalue excursions beyond -1e-8 abort loudly.
    """
    step = float(step)
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    times = [float(t) for t in times]
    if any(t < 0 for t in times):
        raise ValueError("times must be >= 0")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be sorted ascending")
    if rho0.space != gen.model.space:
        raise ValueError("state and generator live on different spaces")

    targets = [_steps_for(t, step) for t in times]
    out: list[DensityOperator] = []
    rho = np.array(rho0.matrix, dtype=complex)
    done = 0
    for t, n in zip(times, targets):
        for _ in range(n - done):
            k1 = gen(rho)
            k2 = gen(rho + 0.5 * step * k1)
            k3 = gen(rho + 0.5 * step * k2)
            k4 = gen(rho + step * k3)
            rho = rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        done = n
        if n == 0:
            out.append(rho0)
            continue
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        if herm > 1e-10:
            raise InvariantViolation(f"RK4 state lost Hermiticity: defect {herm:.3e} at t={t}")
        lo = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        if lo < EIG_EXCURSION_FLOOR:
            raise InvariantViolation(
                f"RK4 state eigenvalue {lo:.3e} below {EIG_EXCURSION_FLOOR} at t={t}"
            )
        out.append(
            DensityOperator(gen.model.space, rho, tail_weight=rho0.tail_weight, validate=False)
        )
    return out


def default_step(model: DecayModel) -> float:
    """1e-3 in units of the fastest width (1e-3 raw when nothing decays)."""
    gmax = max(model.widths) if model.widths else 0.0
    return 1e-3 / gmax if gmax > 0 else 1e-3
