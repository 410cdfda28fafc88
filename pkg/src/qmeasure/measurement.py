"""Indirect measurement scheme: processes, meter evolution, induced POVMs.

A measuring process is the quadruple (apparatus space, apparatus state,
interaction unitary, meter PVM). Conjugating the embedded meter with the
interaction gives the evolved meter on system x apparatus; pinching the
evolved meter with the apparatus state gives the POVM the process induces
on the system. Constructive models are provided in both directions: a
pointer model realizing any accurate observable, and a dilation model
realizing any generalized observable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError
from .linalg import (
    DEFAULT_MAX_DIM,
    OP_TOL,
    _frozen,
    as_operator,
    as_state,
    is_unitary,
    max_abs,
    psd_sqrt,
    tensor,
)
from .observables import (
    LABEL_TOL,
    OutcomeDistribution,
    Povm,
    Pvm,
    born_pvm,
)

REPRO_TOL = 1e-9              # default reproducibility decision tolerance
COMPLETION_THRESHOLD = 1e-8   # candidates more dependent than this are skipped


@dataclass(frozen=True, eq=False)
class EvolvedMeter(Pvm):
    """Meter PVM conjugated into the Heisenberg picture on system x apparatus."""


@dataclass(frozen=True, eq=False)
class MeasurementProcess:
    """The measuring-process quadruple with an explicit system dimension."""

    system_dim: int
    apparatus_dim: int
    apparatus_state: np.ndarray
    interaction: np.ndarray
    meter: Pvm
    max_dim: int = field(default=DEFAULT_MAX_DIM, repr=False)

    def __post_init__(self):
        system_dim = int(self.system_dim)
        apparatus_dim = int(self.apparatus_dim)
        if system_dim < 1 or apparatus_dim < 1:
            raise DimensionError("system and apparatus dimensions must be >= 1")
        total = system_dim * apparatus_dim
        if total > self.max_dim:
            raise DimensionError(
                f"compound dimension {total} exceeds the cap {self.max_dim}"
            )
        xi = as_state(self.apparatus_state)
        if xi.shape[0] != apparatus_dim:
            raise DimensionError(
                f"apparatus state has dim {xi.shape[0]}, expected {apparatus_dim}"
            )
        u = as_operator(self.interaction)
        if u.shape != (total, total):
            raise DimensionError(
                f"interaction must be {total}x{total} on system x apparatus, got {u.shape}"
            )
        if not is_unitary(u, OP_TOL):
            raise ValidationError("interaction operator must be unitary")
        if not isinstance(self.meter, Pvm):
            raise ValidationError("meter must be a Pvm")
        if self.meter.dim != apparatus_dim:
            raise DimensionError(
                f"meter acts on dim {self.meter.dim}, expected apparatus dim {apparatus_dim}"
            )
        object.__setattr__(self, "system_dim", system_dim)
        object.__setattr__(self, "apparatus_dim", apparatus_dim)
        object.__setattr__(self, "apparatus_state", _frozen(xi.copy()))
        object.__setattr__(self, "interaction", _frozen(u.copy()))

    @property
    def total_dim(self) -> int:
        return self.system_dim * self.apparatus_dim


@dataclass(frozen=True, eq=False)
class ReproducibilityReport:
    """Per-outcome operator distance between an induced POVM and a target PVM."""

    reproducible: bool
    max_operator_deviation: float
    per_outcome_deviation: dict
    tolerance: float


def evolve_meter(process: MeasurementProcess) -> EvolvedMeter:
    """Heisenberg-evolved meter: E(x) = U^dag (I x E_M(x)) U on system x apparatus."""
    u = process.interaction
    eye_sys = np.eye(process.system_dim, dtype=complex)
    projectors = []
    for p in process.meter.projectors:
        evolved = u.conj().T @ tensor(eye_sys, p) @ u
        projectors.append((evolved + evolved.conj().T) / 2)
    return EvolvedMeter(process.meter.outcomes, tuple(projectors), process.total_dim)


def meter_distribution(process: MeasurementProcess, psi) -> OutcomeDistribution:
    """Outcome distribution of the pointer readings for a system state psi."""
    psi = as_state(psi)
    if psi.shape[0] != process.system_dim:
        raise DimensionError(
            f"state dim {psi.shape[0]} does not match system dim {process.system_dim}"
        )
    joint_state = tensor(psi, process.apparatus_state)
    return born_pvm(evolve_meter(process), joint_state)


def induced_povm(process: MeasurementProcess) -> Povm:
    """System-side POVM generated by the process: Pi(x) = <xi|E_evolved(x)|xi>."""
    d_sys, d_app = process.system_dim, process.apparatus_dim
    xi = process.apparatus_state
    evolved = evolve_meter(process)
    effects = []
    for p in evolved.projectors:
        blocks = p.reshape(d_sys, d_app, d_sys, d_app)
        effect = np.einsum("k,ikjl,l->ij", xi.conj(), blocks, xi)
        effects.append((effect + effect.conj().T) / 2)
    return Povm(evolved.outcomes, tuple(effects), d_sys)


def _match_labels(left, right, label_tol):
    """Pair up nearly equal labels from two sorted sequences.

    Returns (pairs, left_only, right_only) as index lists.
    """
    pairs = []
    used_left = set()
    used_right = set()
    j = 0
    for i, x in enumerate(left):
        while j < len(right) and right[j] < x - label_tol:
            j += 1
        if j < len(right) and abs(right[j] - x) <= label_tol:
            pairs.append((i, j))
            used_left.add(i)
            used_right.add(j)
            j += 1
    left_only = [i for i in range(len(left)) if i not in used_left]
    right_only = [j for j in range(len(right)) if j not in used_right]
    return pairs, left_only, right_only


def check_reproducibility(
    process: MeasurementProcess,
    target: Pvm,
    tol: float = REPRO_TOL,
    label_tol: float = LABEL_TOL,
) -> ReproducibilityReport:
    """Compare the induced POVM against the target PVM, outcome by outcome.

    Outcome labels are matched within label_tol; an outcome present on only
    one side is compared against the zero operator. The process reproduces
    the target's statistics iff the largest per-outcome operator deviation
    is at most tol.
    """
    if process.system_dim != target.dim:
        raise DimensionError(
            f"process system dim {process.system_dim} does not match PVM dim {target.dim}"
        )
    induced = induced_povm(process)
    pairs, induced_only, target_only = _match_labels(
        induced.outcomes, target.outcomes, label_tol
    )
    per_outcome = {}
    for i, j in pairs:
        per_outcome[target.outcomes[j]] = max_abs(
            induced.effects[i] - target.projectors[j]
        )
    for i in induced_only:
        per_outcome[induced.outcomes[i]] = max_abs(induced.effects[i])
    for j in target_only:
        per_outcome[target.outcomes[j]] = max_abs(target.projectors[j])
    worst = max(per_outcome.values())
    return ReproducibilityReport(
        reproducible=worst <= tol,
        max_operator_deviation=worst,
        per_outcome_deviation=per_outcome,
        tolerance=float(tol),
    )


def _pointer_pvm(outcomes, dim: int) -> Pvm:
    projectors = []
    for j in range(dim):
        p = np.zeros((dim, dim), dtype=complex)
        p[j, j] = 1.0
        projectors.append(p)
    return Pvm(outcomes, tuple(projectors), dim)


def von_neumann_model(target: Pvm, max_dim: int = DEFAULT_MAX_DIM) -> MeasurementProcess:
    """Pointer model realizing an accurate observable.

    The apparatus is one pointer level per outcome, started in level 0; the
    interaction shifts the pointer by j on the eigenspace of the j-th
    outcome (a unitary, since the eigenspace projectors are orthogonal and
    complete). The induced POVM equals the target PVM exactly.
    """
    n = len(target.outcomes)
    eye_app = np.eye(n, dtype=complex)
    u = np.zeros((target.dim * n, target.dim * n), dtype=complex)
    for j, proj in enumerate(target.projectors):
        shift_j = np.roll(eye_app, j, axis=0)
        u += tensor(proj, shift_j)
    xi = np.zeros(n, dtype=complex)
    xi[0] = 1.0
    return MeasurementProcess(
        system_dim=target.dim,
        apparatus_dim=n,
        apparatus_state=xi,
        interaction=u,
        meter=_pointer_pvm(target.outcomes, n),
        max_dim=max_dim,
    )


def _complete_columns(matrix, free_slots, candidates, threshold=COMPLETION_THRESHOLD):
    """Fill the given column slots with vectors orthonormal to all columns.

    Candidates are orthogonalized (two rounds of modified Gram-Schmidt)
    against every column placed so far; candidates whose residual norm is
    at most threshold are skipped as near-dependent.
    """
    placed = [matrix[:, j] for j in range(matrix.shape[1]) if j not in free_slots]
    slots = list(free_slots)
    for cand in candidates:
        if not slots:
            return
        v = np.asarray(cand, dtype=complex).copy()
        for _ in range(2):
            for u in placed:
                v -= np.vdot(u, v) * u
        norm = np.linalg.norm(v)
        if norm <= threshold:
            continue
        v /= norm
        slot = slots.pop(0)
        matrix[:, slot] = v
        placed.append(v)
    if slots:
        raise ValidationError("could not complete the interaction to a unitary")


def _standard_basis_candidates(dim: int):
    eye = np.eye(dim, dtype=complex)
    return [eye[:, k] for k in range(dim)]


def dilation_model(
    povm: Povm,
    completion_rng: np.random.Generator | None = None,
    max_dim: int = DEFAULT_MAX_DIM,
) -> MeasurementProcess:
    """Measuring process realizing an arbitrary generalized observable.

    Builds the isometry V = sum_j sqrt(Pi(x_j)) x |j> (an isometry because
    the effects resolve the identity), places its columns at the slots that
    carry |psi> x |0>, and completes the remaining columns to a unitary.
    The induced POVM equals the input POVM regardless of the completion;
    completion_rng switches the completion candidates from the standard
    basis to random vectors, which is useful for checking exactly that.
    """
    n = len(povm.outcomes)
    d_sys = povm.dim
    total = d_sys * n
    if total > max_dim:
        raise DimensionError(f"compound dimension {total} exceeds the cap {max_dim}")
    roots = np.array([psd_sqrt(e) for e in povm.effects])
    # V[(i, j), h] = roots[j][i, h]; column h is V applied to basis state h
    isometry = roots.transpose(1, 0, 2).reshape(total, d_sys)
    u = np.zeros((total, total), dtype=complex)
    specified = [h * n for h in range(d_sys)]
    u[:, specified] = isometry
    free = [c for c in range(total) if c not in specified]
    if completion_rng is None:
        candidates = _standard_basis_candidates(total)
    else:
        candidates = (
            completion_rng.normal(size=total) + 1j * completion_rng.normal(size=total)
            for _ in range(20 * total)
        )
    _complete_columns(u, free, candidates)
    xi = np.zeros(n, dtype=complex)
    xi[0] = 1.0
    return MeasurementProcess(
        system_dim=d_sys,
        apparatus_dim=n,
        apparatus_state=xi,
        interaction=u,
        meter=_pointer_pvm(povm.outcomes, n),
        max_dim=max_dim,
    )
