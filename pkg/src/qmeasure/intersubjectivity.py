"""Two-observer joint local measurements and outcome agreement.

Two measuring processes that share the system are composed on
H x K1 x K2. Each meter is evolved by its own process's interaction and
embedded into the compound space; the scenario is local when every pair of
evolved meter projectors commutes. For local scenarios the joint outcome
distribution P(x, y) = <Psi| E1(x) E2(y) |Psi> is well defined, and when
both processes reproduce the statistics of the same accurate observable,
both observers read the same outcome with probability one. For noisy
observables the agreement probability drops below one; a seeded sampler
draws outcome pairs from the joint table for Monte Carlo checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionError,
    NonCommutingMetersError,
    PreconditionError,
    ValidationError,
)
from .linalg import (
    DEFAULT_MAX_DIM,
    OP_TOL,
    _frozen,
    as_state,
    embed_operator,
    is_unitary,
    max_abs,
    tensor,
)
from .measurement import (
    REPRO_TOL,
    EvolvedMeter,
    MeasurementProcess,
    check_reproducibility,
    evolve_meter,
)
from .observables import LABEL_TOL, PROB_NEG_TOL, PROB_SUM_TOL, Pvm

COMMUTATION_TOL = 1e-8  # default locality decision tolerance
OIT_TOL = 1e-9          # default intersubjectivity decision tolerance
JOINT_IMAG_TOL = 1e-10  # largest imaginary residue tolerated in a joint probability


@dataclass(frozen=True, eq=False)
class JointScenario:
    """A system state with two measuring processes composed on H x K1 x K2."""

    psi: np.ndarray
    process1: MeasurementProcess
    process2: MeasurementProcess
    composed_unitary: np.ndarray
    evolved1: EvolvedMeter
    evolved2: EvolvedMeter
    max_commutator_norm: float

    def __post_init__(self):
        psi = as_state(self.psi)
        total = (
            self.process1.system_dim
            * self.process1.apparatus_dim
            * self.process2.apparatus_dim
        )
        if self.composed_unitary.shape != (total, total):
            raise DimensionError("composed unitary has the wrong dimension")
        if not is_unitary(self.composed_unitary, OP_TOL):
            raise ValidationError("composed evolution operator must be unitary")
        object.__setattr__(self, "psi", _frozen(psi.copy()))
        object.__setattr__(self, "composed_unitary", _frozen(self.composed_unitary.copy()))
        object.__setattr__(self, "max_commutator_norm", float(self.max_commutator_norm))

    @property
    def total_dim(self) -> int:
        return self.composed_unitary.shape[0]

    @property
    def joint_state(self) -> np.ndarray:
        return tensor(self.psi, self.process1.apparatus_state, self.process2.apparatus_state)


class CommutationCheck(NamedTuple):
    commuting: bool
    max_commutator_norm: float


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint probability table over both observers' outcome labels."""

    outcomes1: tuple
    outcomes2: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        o1 = tuple(float(x) for x in self.outcomes1)
        o2 = tuple(float(x) for x in self.outcomes2)
        table = np.asarray(self.probabilities, dtype=float)
        if table.shape != (len(o1), len(o2)):
            raise DimensionError(
                f"joint table shape {table.shape} does not match outcome counts "
                f"({len(o1)}, {len(o2)})"
            )
        lowest = float(table.min())
        if lowest < -PROB_NEG_TOL:
            raise ValidationError(
                f"joint probability {lowest!r} is below the -{PROB_NEG_TOL} floor"
            )
        table = np.clip(table, 0.0, None)
        total = float(table.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"joint probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "outcomes1", o1)
        object.__setattr__(self, "outcomes2", o2)
        object.__setattr__(self, "probabilities", _frozen(table))

    def marginal1(self) -> np.ndarray:
        return self.probabilities.sum(axis=1)

    def marginal2(self) -> np.ndarray:
        return self.probabilities.sum(axis=0)


@dataclass(frozen=True, eq=False)
class OitReport:
    """Agreement diagnostics for a joint measurement of one accurate observable."""

    off_diagonal_mass: float
    diagonal: dict
    expected_diagonal: dict
    max_diagonal_deviation: float
    intersubjective: bool
    tolerance: float


@dataclass(frozen=True, eq=False)
class SampleResult:
    """Outcome pairs drawn from a joint table plus their empirical distribution."""

    pairs: np.ndarray
    counts: np.ndarray
    empirical: JointDistribution
    seed: int


def compose(
    psi,
    process1: MeasurementProcess,
    process2: MeasurementProcess,
    max_dim: int = DEFAULT_MAX_DIM,
) -> JointScenario:
    """Compose two processes sharing the system into one scenario on H x K1 x K2.

    The composed evolution applies process1's interaction (on H and K1) and
    then process2's (on H and K2). Each meter is evolved by its own
    interaction and embedded into the compound space; the largest commutator
    norm over all pairs of evolved meter projectors is stored so locality
    can be decided later at any tolerance.
    """
    psi = as_state(psi)
    d_sys = psi.shape[0]
    if process1.system_dim != d_sys or process2.system_dim != d_sys:
        raise DimensionError(
            f"processes act on system dims {process1.system_dim} and "
            f"{process2.system_dim}, state has dim {d_sys}"
        )
    d1, d2 = process1.apparatus_dim, process2.apparatus_dim
    dims = [d_sys, d1, d2]
    total = d_sys * d1 * d2
    if total > max_dim:
        raise DimensionError(f"compound dimension {total} exceeds the cap {max_dim}")
    u1_full = embed_operator(process1.interaction, dims, [0, 1])
    u2_full = embed_operator(process2.interaction, dims, [0, 2])
    composed = u2_full @ u1_full
    ev1 = evolve_meter(process1)
    ev2 = evolve_meter(process2)
    proj1 = tuple(embed_operator(p, dims, [0, 1]) for p in ev1.projectors)
    proj2 = tuple(embed_operator(p, dims, [0, 2]) for p in ev2.projectors)
    evolved1 = EvolvedMeter(ev1.outcomes, proj1, total)
    evolved2 = EvolvedMeter(ev2.outcomes, proj2, total)
    worst = 0.0
    for a in proj1:
        for b in proj2:
            worst = max(worst, max_abs(a @ b - b @ a))
    return JointScenario(
        psi=psi,
        process1=process1,
        process2=process2,
        composed_unitary=composed,
        evolved1=evolved1,
        evolved2=evolved2,
        max_commutator_norm=worst,
    )


def check_commutation(scenario: JointScenario, tol: float = COMMUTATION_TOL) -> CommutationCheck:
    """Decide locality: do all pairs of evolved meter projectors commute within tol?"""
    worst = scenario.max_commutator_norm
    return CommutationCheck(commuting=worst <= tol, max_commutator_norm=worst)


def joint_distribution(
    scenario: JointScenario, commutation_tol: float = COMMUTATION_TOL
) -> JointDistribution:
    """Joint table P(x, y) = <Psi| E1(x) E2(y) |Psi> for a local scenario.

    Raises NonCommutingMetersError when the meters fail the commutation
    check; the product of non-commuting projectors is not a probability.
    """
    check = check_commutation(scenario, commutation_tol)
    if not check.commuting:
        raise NonCommutingMetersError(
            f"evolved meters do not commute (max commutator norm "
            f"{check.max_commutator_norm:.3e} > {commutation_tol})"
        )
    state = scenario.joint_state
    left = [p @ state for p in scenario.evolved1.projectors]
    right = [p @ state for p in scenario.evolved2.projectors]
    table = np.empty((len(left), len(right)), dtype=float)
    for i, lvec in enumerate(left):
        for j, rvec in enumerate(right):
            value = complex(np.vdot(lvec, rvec))
            if abs(value.imag) > JOINT_IMAG_TOL:
                raise ValidationError(
                    f"joint probability has imaginary residue {value.imag!r}"
                )
            table[i, j] = value.real
    return JointDistribution(scenario.evolved1.outcomes, scenario.evolved2.outcomes, table)


def _diagonal_cells(dist: JointDistribution, label_tol: float = LABEL_TOL):
    """Index pairs (i, j) whose outcome labels agree within label_tol."""
    cells = []
    for i, x in enumerate(dist.outcomes1):
        for j, y in enumerate(dist.outcomes2):
            if abs(x - y) <= label_tol:
                cells.append((i, j))
    return cells


def table_agreement(dist: JointDistribution, label_tol: float = LABEL_TOL) -> float:
    """Total mass on cells of a joint table whose two labels agree within label_tol."""
    return float(sum(dist.probabilities[i, j] for i, j in _diagonal_cells(dist, label_tol)))


def agreement_probability(
    scenario: JointScenario, commutation_tol: float = COMMUTATION_TOL
) -> float:
    """Probability that both observers read the same outcome label."""
    return table_agreement(joint_distribution(scenario, commutation_tol))


def verify_oit(
    scenario: JointScenario,
    observable: Pvm,
    tol: float = OIT_TOL,
    reproducibility_tol: float = REPRO_TOL,
    commutation_tol: float = COMMUTATION_TOL,
    label_tol: float = LABEL_TOL,
) -> OitReport:
    """Check that joint accurate measurements of one observable always agree.

    Both processes must reproduce the observable's statistics (their induced
    POVMs must equal its PVM within reproducibility_tol); otherwise
    PreconditionError is raised and agreement_probability is the meaningful
    quantity instead. The report compares the joint table against the ideal:
    zero off-diagonal mass and diagonal P(x, x) = ||E(x) psi||^2.
    """
    for name, process in (("process1", scenario.process1), ("process2", scenario.process2)):
        report = check_reproducibility(process, observable, reproducibility_tol)
        if not report.reproducible:
            raise PreconditionError(
                f"{name} does not reproduce the observable's statistics "
                f"(max operator deviation {report.max_operator_deviation:.3e}); "
                f"use agreement_probability for noisy observables"
            )
    dist = joint_distribution(scenario, commutation_tol)
    diag_cells = _diagonal_cells(dist, label_tol)
    diagonal_mass = sum(dist.probabilities[i, j] for i, j in diag_cells)
    off_diagonal_mass = float(dist.probabilities.sum() - diagonal_mass)
    expected = {}
    for x, proj in zip(observable.outcomes, observable.projectors):
        expected[x] = float(np.linalg.norm(proj @ scenario.psi) ** 2)
    diagonal = {}
    for i, j in diag_cells:
        matches = [x for x in observable.outcomes if abs(x - dist.outcomes1[i]) <= label_tol]
        key = matches[0] if matches else dist.outcomes1[i]
        diagonal[key] = float(dist.probabilities[i, j])
    worst = 0.0
    for x in set(expected) | set(diagonal):
        worst = max(worst, abs(diagonal.get(x, 0.0) - expected.get(x, 0.0)))
    return OitReport(
        off_diagonal_mass=off_diagonal_mass,
        diagonal=diagonal,
        expected_diagonal=expected,
        max_diagonal_deviation=worst,
        intersubjective=(off_diagonal_mass <= tol and worst <= tol),
        tolerance=float(tol),
    )


def sample_outcomes(
    scenario: JointScenario,
    n: int,
    seed: int,
    commutation_tol: float = COMMUTATION_TOL,
) -> SampleResult:
    """Draw n i.i.d. outcome pairs from the joint table.

    Sampling is inverse-CDF over the lexicographically ordered (x, y) cells
    using numpy's seeded default generator, so a fixed seed reproduces the
    exact sequence. Cells with zero analytic probability are never drawn.
    """
    n = int(n)
    if n < 1:
        raise ValidationError(f"sample count must be >= 1, got {n}")
    dist = joint_distribution(scenario, commutation_tol)
    flat = dist.probabilities.ravel()
    cdf = np.cumsum(flat)
    rng = np.random.default_rng(seed)
    draws = rng.random(n)
    cells = np.searchsorted(cdf, draws, side="right")
    cells = np.clip(cells, 0, flat.size - 1)
    n2 = len(dist.outcomes2)
    xs = np.asarray(dist.outcomes1)[cells // n2]
    ys = np.asarray(dist.outcomes2)[cells % n2]
    pairs = np.column_stack([xs, ys])
    counts = np.bincount(cells, minlength=flat.size).reshape(dist.probabilities.shape)
    empirical = JointDistribution(dist.outcomes1, dist.outcomes2, counts / n)
    return SampleResult(
        pairs=_frozen(pairs),
        counts=_frozen(counts),
        empirical=empirical,
        seed=int(seed),
    )
