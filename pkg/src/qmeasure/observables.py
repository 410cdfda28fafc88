"""PVM and POVM observables and their Born-rule outcome distributions.

A Pvm is an accurate observable: outcome labels with orthogonal projectors
that resolve the identity. A Povm is the generalized (possibly noisy)
observable: labels with positive effects resolving the identity. Both are
immutable; outcome labels are sorted increasing at construction and must be
separated by more than LABEL_TOL.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError, ValidationError
from .linalg import (
    CLUSTER_TOL,
    OP_TOL,
    PAULI_Z,
    _frozen,
    as_operator,
    as_state,
    is_projector,
    max_abs,
    spectral_decompose,
)

LABEL_TOL = 1e-8      # outcome labels closer than this are considered duplicates
PROB_SUM_TOL = 1e-10  # distribution normalization
PROB_NEG_TOL = 1e-12  # largest negative probability clamped to zero
BORN_IMAG_TOL = 1e-12  # largest imaginary residue tolerated in a Born probability


def _sorted_labeled_ops(outcomes, operators, dim: int, kind: str):
    """Sort (label, operator) pairs by label and enforce label separation."""
    labels = [float(x) for x in outcomes]
    ops = [as_operator(p) for p in operators]
    if len(labels) != len(ops) or not labels:
        raise ValidationError(f"need one operator per outcome label in a {kind}")
    if not all(np.isfinite(labels)):
        raise ValidationError("outcome labels must be finite")
    for p in ops:
        if p.shape != (dim, dim):
            raise DimensionError(f"{kind} operators must be {dim}x{dim}, got {p.shape}")
    order = sorted(range(len(labels)), key=lambda i: labels[i])
    labels = [labels[i] for i in order]
    ops = [ops[i] for i in order]
    for a, b in zip(labels, labels[1:]):
        if b - a <= LABEL_TOL:
            raise ValidationError(
                f"{kind} outcome labels {a!r} and {b!r} are closer than {LABEL_TOL}"
            )
    return tuple(labels), tuple(_frozen(p.copy()) for p in ops)


def _check_resolution_of_unity(ops, dim: int, kind: str) -> None:
    deviation = max_abs(sum(ops) - np.eye(dim))
    if deviation > OP_TOL:
        raise ValidationError(
            f"{kind} operators do not sum to the identity (max deviation {deviation:.3e})"
        )


@dataclass(frozen=True, eq=False)
class Pvm:
    """Projection-valued measure: an accurate observable."""

    outcomes: tuple
    projectors: tuple
    dim: int

    def __post_init__(self):
        dim = int(self.dim)
        if dim < 1:
            raise DimensionError(f"dim must be >= 1, got {dim}")
        object.__setattr__(self, "dim", dim)
        labels, ops = _sorted_labeled_ops(self.outcomes, self.projectors, dim, "PVM")
        for p in ops:
            if not is_projector(p, OP_TOL):
                raise ValidationError("each PVM element must be an orthogonal projector")
        for i in range(len(ops)):
            for j in range(i + 1, len(ops)):
                if max_abs(ops[i] @ ops[j]) > OP_TOL:
                    raise ValidationError("PVM projectors must be mutually orthogonal")
        _check_resolution_of_unity(ops, dim, "PVM")
        object.__setattr__(self, "outcomes", labels)
        object.__setattr__(self, "projectors", ops)

    def __len__(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive-operator-valued measure: a generalized observable."""

    outcomes: tuple
    effects: tuple
    dim: int

    def __post_init__(self):
        dim = int(self.dim)
        if dim < 1:
            raise DimensionError(f"dim must be >= 1, got {dim}")
        object.__setattr__(self, "dim", dim)
        labels, ops = _sorted_labeled_ops(self.outcomes, self.effects, dim, "POVM")
        for e in ops:
            if max_abs(e - e.conj().T) > OP_TOL:
                raise ValidationError("each effect must be Hermitian")
            w = np.linalg.eigvalsh((e + e.conj().T) / 2)
            if w[0] < -OP_TOL or w[-1] > 1 + OP_TOL:
                raise ValidationError(
                    f"effect eigenvalues must lie in [0, 1], got range [{w[0]!r}, {w[-1]!r}]"
                )
        _check_resolution_of_unity(ops, dim, "POVM")
        object.__setattr__(self, "outcomes", labels)
        object.__setattr__(self, "effects", ops)

    def __len__(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Probabilities over outcome labels; sums to 1 within PROB_SUM_TOL."""

    outcomes: tuple
    probabilities: tuple

    def __post_init__(self):
        labels = tuple(float(x) for x in self.outcomes)
        probs = [float(p) for p in self.probabilities]
        if len(labels) != len(probs) or not labels:
            raise ValidationError("need one probability per outcome")
        for p in probs:
            if p < -PROB_NEG_TOL:
                raise ValidationError(f"probability {p!r} is below the -{PROB_NEG_TOL} floor")
        probs = tuple(max(p, 0.0) for p in probs)
        total = sum(probs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1 within {PROB_SUM_TOL}")
        object.__setattr__(self, "outcomes", labels)
        object.__setattr__(self, "probabilities", probs)

    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, self.probabilities))


def expectation(op, psi) -> float:
    """<psi|op|psi> for Hermitian op; rejects imaginary residue above BORN_IMAG_TOL."""
    value = complex(np.vdot(psi, op @ psi))
    if abs(value.imag) > BORN_IMAG_TOL:
        raise ValidationError(f"expectation has imaginary residue {value.imag!r}")
    return value.real


def _born(outcomes, operators, dim: int, psi) -> OutcomeDistribution:
    psi = as_state(psi)
    if psi.shape[0] != dim:
        raise DimensionError(f"state dim {psi.shape[0]} does not match observable dim {dim}")
    return OutcomeDistribution(outcomes, tuple(expectation(op, psi) for op in operators))


def pvm_from_observable(a, cluster_tol: float = CLUSTER_TOL) -> Pvm:
    """Spectral PVM of a Hermitian operator, with degenerate eigenvalues merged."""
    decomp = spectral_decompose(a, cluster_tol)
    return Pvm(decomp.eigenvalues, decomp.projectors, decomp.dim)


def born_pvm(pvm: Pvm, psi) -> OutcomeDistribution:
    """P(x) = <psi|E(x)|psi> over the PVM's outcomes."""
    return _born(pvm.outcomes, pvm.projectors, pvm.dim, psi)


def born_povm(povm: Povm, psi) -> OutcomeDistribution:
    """P(x) = <psi|Pi(x)|psi> over the POVM's outcomes."""
    return _born(povm.outcomes, povm.effects, povm.dim, psi)


def as_povm(pvm: Pvm) -> Povm:
    """View an accurate observable as a generalized one with the same operators."""
    return Povm(pvm.outcomes, pvm.projectors, pvm.dim)


def is_projective(povm: Povm, tol: float = OP_TOL) -> bool:
    """True iff every effect is a projector and effects are mutually orthogonal."""
    for e in povm.effects:
        if not is_projector(e, tol):
            return False
    for i in range(len(povm.effects)):
        for j in range(i + 1, len(povm.effects)):
            if max_abs(povm.effects[i] @ povm.effects[j]) > tol:
                return False
    return True


def unsharp_qubit_povm(eta: float) -> Povm:
    """Two-outcome smeared sigma-z observable, Pi(+/-1) = (I +/- eta*sigma_z)/2.

    eta = 1 is the sharp projective limit; eta = 0 is pure noise.
    """
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"sharpness eta must lie in [0, 1], got {eta!r}")
    eye = np.eye(2, dtype=complex)
    effects = ((eye - eta * PAULI_Z) / 2, (eye + eta * PAULI_Z) / 2)
    return Povm((-1.0, 1.0), effects, 2)
