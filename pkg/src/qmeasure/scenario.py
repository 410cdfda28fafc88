"""Scenario files: strict loading, experiment execution, parameter sweeps.

A scenario file is a JSON object naming a system state, one observable, one
or two measuring processes, and an experiment to run. Loading builds every
library object and checks every invariant; running then executes the named
experiment and returns a plain-dict report ready for json.dump. Validation
and execution share this single loader, so a file accepted by `validate` is
exactly a file `run` can execute.

Schema sketch (see the README for a worked example):

    {
      "schema_version": "1",
      "system": {"dim": 2, "state": [[re, im], ...]},
      "observable": {"hermitian_matrix": {...}} | {"pvm": {...}}
                    | {"povm": {...}} | {"unsharp": {"eta": 0.8}},
      "processes": [{"model": "von_neumann" | "dilation"}
                    | {"model": "custom", "apparatus_dim": n, "xi": [...],
                       "unitary": {...}, "meter": {...}}],
      "experiment": "induce" | "reproduce" | "joint" | "oit" | "sample",
      "params": {"tolerances": {...}, "n_samples": n, "seed": n}
    }
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .intersubjectivity import (
    COMMUTATION_TOL,
    OIT_TOL,
    agreement_probability,
    check_commutation,
    compose,
    joint_distribution,
    sample_outcomes,
    table_agreement,
    verify_oit,
)
from .linalg import CLUSTER_TOL, DEFAULT_MAX_DIM
from .measurement import (
    REPRO_TOL,
    MeasurementProcess,
    check_reproducibility,
    dilation_model,
    induced_povm,
    von_neumann_model,
)
from .observables import (
    Povm,
    Pvm,
    as_povm,
    born_povm,
    is_projective,
    pvm_from_observable,
    unsharp_qubit_povm,
)
from .serialize import (
    _require,
    matrix_from_json,
    matrix_to_json,
    povm_from_json,
    povm_to_json,
    pvm_from_json,
    pvm_to_json,
    state_from_json,
    state_to_json,
)

SCHEMA_VERSION = "1"
STATE_NORM_GATE = 1e-8  # looser than the library's norm invariant; gated then renormalized

EXPERIMENTS = ("induce", "reproduce", "joint", "oit", "sample")
_PROCESS_COUNT = {"induce": 1, "reproduce": 1, "joint": 2, "oit": 2, "sample": 2}

DEFAULT_TOLERANCES = {
    "cluster": CLUSTER_TOL,
    "reproducibility": REPRO_TOL,
    "commutation": COMMUTATION_TOL,
    "oit": OIT_TOL,
}
# which tolerance the CLI --tol flag overrides, per experiment
DECISION_TOLERANCE = {
    "reproduce": "reproducibility",
    "joint": "commutation",
    "sample": "commutation",
    "oit": "oit",
}

DEFAULT_N_SAMPLES = 10000
DEFAULT_SEED = 0


@dataclass(frozen=True, eq=False)
class ObservableSpec:
    """An observable as declared in a scenario, in every usable form."""

    kind: str
    povm: Povm
    pvm: Optional[Pvm]  # present when the observable is projective
    eta: Optional[float]


@dataclass(frozen=True, eq=False)
class Scenario:
    schema_version: str
    system_dim: int
    psi: np.ndarray
    observable: ObservableSpec
    processes: tuple
    models: tuple
    experiment: str
    tolerances: dict
    n_samples: int
    seed: int
    raw: dict  # the parsed source document, kept for sweeps


def _check_keys(data: dict, allowed, required, where: str):
    for key in data:
        _require(key in allowed, f"{where}: unknown field {key!r}")
    for key in required:
        _require(key in data, f"{where}: missing field {key!r}")


def _gated_state(raw, where: str, dim: Optional[int] = None) -> np.ndarray:
    vec = state_from_json(raw, where)
    if dim is not None:
        _require(
            vec.shape[0] == dim,
            f"{where}: expected {dim} amplitudes, got {vec.shape[0]}",
        )
    norm = float(np.linalg.norm(vec))
    _require(
        abs(norm - 1.0) <= STATE_NORM_GATE,
        f"{where}: norm {norm!r} deviates from 1 beyond {STATE_NORM_GATE}",
    )
    return vec / norm


def _maybe_pvm(povm: Povm) -> Optional[Pvm]:
    if is_projective(povm):
        return Pvm(outcomes=povm.outcomes, projectors=povm.effects, dim=povm.dim)
    return None


def _build_observable(data, dim: int, cluster_tol: float) -> ObservableSpec:
    where = "observable"
    _require(isinstance(data, dict), f"{where}: expected an object")
    kinds = ("hermitian_matrix", "pvm", "povm", "unsharp")
    present = [k for k in data if k in kinds]
    _check_keys(data, kinds, (), where)
    _require(
        len(present) == 1,
        f"{where}: exactly one of {', '.join(kinds)} is required",
    )
    kind = present[0]
    if kind == "hermitian_matrix":
        a = matrix_from_json(data[kind], f"{where}.hermitian_matrix")
        _require(a.shape == (dim, dim),
                 f"{where}: matrix shape {a.shape} does not match system dim {dim}")
        pvm = pvm_from_observable(a, cluster_tol)
        return ObservableSpec(kind=kind, povm=as_povm(pvm), pvm=pvm, eta=None)
    if kind == "pvm":
        pvm = pvm_from_json(data[kind], f"{where}.pvm")
        _require(pvm.dim == dim,
                 f"{where}: pvm dim {pvm.dim} does not match system dim {dim}")
        return ObservableSpec(kind=kind, povm=as_povm(pvm), pvm=pvm, eta=None)
    if kind == "povm":
        povm = povm_from_json(data[kind], f"{where}.povm")
        _require(povm.dim == dim,
                 f"{where}: povm dim {povm.dim} does not match system dim {dim}")
        return ObservableSpec(kind=kind, povm=povm, pvm=_maybe_pvm(povm), eta=None)
    block = data["unsharp"]
    _require(isinstance(block, dict), f"{where}.unsharp: expected an object")
    _check_keys(block, ("eta",), ("eta",), f"{where}.unsharp")
    eta = block["eta"]
    _require(isinstance(eta, (int, float)) and not isinstance(eta, bool),
             f"{where}.unsharp.eta: must be a number, got {eta!r}")
    _require(dim == 2, f"{where}: the unsharp observable needs a 2-dimensional system")
    povm = unsharp_qubit_povm(float(eta))
    return ObservableSpec(kind=kind, povm=povm, pvm=_maybe_pvm(povm), eta=float(eta))


def _build_process(entry, index: int, observable: ObservableSpec,
                   system_dim: int, max_dim: int):
    where = f"processes[{index}]"
    _require(isinstance(entry, dict), f"{where}: expected an object")
    _require("model" in entry, f"{where}: missing field 'model'")
    model = entry["model"]
    if model == "von_neumann":
        _check_keys(entry, ("model",), ("model",), where)
        _require(
            observable.pvm is not None,
            f"{where}: the von_neumann model needs a projective observable",
        )
        return von_neumann_model(observable.pvm, max_dim=max_dim), model
    if model == "dilation":
        _check_keys(entry, ("model",), ("model",), where)
        return dilation_model(observable.povm, max_dim=max_dim), model
    if model == "custom":
        fields = ("model", "apparatus_dim", "xi", "unitary", "meter")
        _check_keys(entry, fields, fields, where)
        apparatus_dim = entry["apparatus_dim"]
        _require(
            isinstance(apparatus_dim, int) and not isinstance(apparatus_dim, bool)
            and apparatus_dim >= 1,
            f"{where}.apparatus_dim: must be a positive integer, got {apparatus_dim!r}",
        )
        xi = _gated_state(entry["xi"], f"{where}.xi", apparatus_dim)
        process = MeasurementProcess(
            system_dim=system_dim,
            apparatus_dim=apparatus_dim,
            apparatus_state=xi,
            interaction=matrix_from_json(entry["unitary"], f"{where}.unitary"),
            meter=pvm_from_json(entry["meter"], f"{where}.meter"),
            max_dim=max_dim,
        )
        return process, model
    raise ValidationError(
        f"{where}: unknown model {model!r} (expected von_neumann, dilation, or custom)"
    )


def _build_tolerances(data) -> dict:
    tolerances = dict(DEFAULT_TOLERANCES)
    if data is None:
        return tolerances
    where = "params.tolerances"
    _require(isinstance(data, dict), f"{where}: expected an object")
    _check_keys(data, tuple(DEFAULT_TOLERANCES), (), where)
    for key, value in data.items():
        _require(
            isinstance(value, (int, float)) and not isinstance(value, bool)
            and value >= 0,
            f"{where}.{key}: must be a non-negative number, got {value!r}",
        )
        tolerances[key] = float(value)
    return tolerances


def load_scenario(data, max_dim: int = DEFAULT_MAX_DIM) -> Scenario:
    """Build and invariant-check every object a scenario file declares."""
    _require(isinstance(data, dict), "scenario: expected a JSON object at top level")
    _check_keys(
        data,
        ("schema_version", "system", "observable", "processes", "experiment", "params"),
        ("schema_version", "system", "observable", "processes", "experiment"),
        "scenario",
    )
    version = data["schema_version"]
    _require(
        version == SCHEMA_VERSION,
        f"scenario: unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})",
    )

    system = data["system"]
    _require(isinstance(system, dict), "system: expected an object")
    _check_keys(system, ("dim", "state"), ("dim", "state"), "system")
    dim = system["dim"]
    _require(isinstance(dim, int) and not isinstance(dim, bool) and dim >= 1,
             f"system.dim: must be a positive integer, got {dim!r}")
    psi = _gated_state(system["state"], "system.state", dim)

    experiment = data["experiment"]
    _require(experiment in EXPERIMENTS,
             f"experiment: unknown experiment {experiment!r} (expected one of "
             f"{', '.join(EXPERIMENTS)})")

    params = data.get("params", {})
    _require(isinstance(params, dict), "params: expected an object")
    _check_keys(params, ("tolerances", "n_samples", "seed"), (), "params")
    tolerances = _build_tolerances(params.get("tolerances"))
    n_samples = params.get("n_samples", DEFAULT_N_SAMPLES)
    _require(isinstance(n_samples, int) and not isinstance(n_samples, bool)
             and n_samples >= 1,
             f"params.n_samples: must be a positive integer, got {n_samples!r}")
    seed = params.get("seed", DEFAULT_SEED)
    _require(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
             f"params.seed: must be a non-negative integer, got {seed!r}")

    observable = _build_observable(data["observable"], dim, tolerances["cluster"])

    entries = data["processes"]
    _require(isinstance(entries, list), "processes: expected a list")
    needed = _PROCESS_COUNT[experiment]
    _require(
        len(entries) == needed,
        f"processes: the {experiment} experiment needs exactly {needed} "
        f"process(es), got {len(entries)}",
    )
    built = [
        _build_process(entry, i, observable, dim, max_dim)
        for i, entry in enumerate(entries)
    ]
    processes = tuple(p for p, _ in built)
    models = tuple(m for _, m in built)

    return Scenario(
        schema_version=version,
        system_dim=dim,
        psi=psi,
        observable=observable,
        processes=processes,
        models=models,
        experiment=experiment,
        tolerances=tolerances,
        n_samples=n_samples,
        seed=seed,
        raw=copy.deepcopy(data),
    )


def load_scenario_file(path, max_dim: int = DEFAULT_MAX_DIM) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return load_scenario(data, max_dim=max_dim)


def _label_key(x) -> str:
    return str(float(x))


def _prob_map(outcomes, values) -> dict:
    return {_label_key(x): float(p) for x, p in zip(outcomes, values)}


def _effective_tolerances(scenario: Scenario, tol_override: Optional[float]) -> dict:
    tolerances = dict(scenario.tolerances)
    decision = DECISION_TOLERANCE.get(scenario.experiment)
    if tol_override is not None and decision is not None:
        tolerances[decision] = float(tol_override)
    return tolerances


def run_experiment(
    scenario: Scenario,
    tol_override: Optional[float] = None,
    seed_override: Optional[int] = None,
) -> dict:
    """Execute the scenario's experiment and return a JSON-ready report.

    tol_override replaces the experiment's decision tolerance (see
    DECISION_TOLERANCE); seed_override replaces the sampling seed. Both are
    the CLI flags' hooks and default to the scenario's own parameters.
    """
    tolerances = _effective_tolerances(scenario, tol_override)
    diagnostics = {"tolerances": tolerances}
    experiment = scenario.experiment

    if experiment == "induce":
        pi = induced_povm(scenario.processes[0])
        dist = born_povm(pi, scenario.psi)
        results = {
            "induced_povm": povm_to_json(pi),
            "projective": bool(is_projective(pi)),
            "distribution": _prob_map(dist.outcomes, dist.probabilities),
        }
    elif experiment == "reproduce":
        report = check_reproducibility(
            scenario.processes[0],
            _target_pvm(scenario),
            tol=tolerances["reproducibility"],
        )
        results = {
            "reproducible": bool(report.reproducible),
            "max_operator_deviation": float(report.max_operator_deviation),
            "per_outcome_deviation": {
                _label_key(x): float(d)
                for x, d in report.per_outcome_deviation.items()
            },
        }
    else:
        joint = compose(scenario.psi, scenario.processes[0], scenario.processes[1])
        check = check_commutation(joint, tolerances["commutation"])
        diagnostics["max_commutator_norm"] = float(check.max_commutator_norm)
        diagnostics["commuting"] = bool(check.commuting)
        if experiment == "joint":
            dist = joint_distribution(joint, tolerances["commutation"])
            results = {
                "outcomes1": list(dist.outcomes1),
                "outcomes2": list(dist.outcomes2),
                "joint_table": dist.probabilities.tolist(),
                "marginal1": _prob_map(dist.outcomes1, dist.marginal1()),
                "marginal2": _prob_map(dist.outcomes2, dist.marginal2()),
                "agreement_probability": table_agreement(dist),
            }
        elif experiment == "oit":
            report = verify_oit(
                joint,
                _target_pvm(scenario),
                tol=tolerances["oit"],
                reproducibility_tol=tolerances["reproducibility"],
                commutation_tol=tolerances["commutation"],
            )
            dist = joint_distribution(joint, tolerances["commutation"])
            results = {
                "intersubjective": bool(report.intersubjective),
                "off_diagonal_mass": float(report.off_diagonal_mass),
                "diagonal": {_label_key(x): p for x, p in report.diagonal.items()},
                "expected_diagonal": {
                    _label_key(x): p for x, p in report.expected_diagonal.items()
                },
                "max_diagonal_deviation": float(report.max_diagonal_deviation),
                "outcomes1": list(dist.outcomes1),
                "outcomes2": list(dist.outcomes2),
                "joint_table": dist.probabilities.tolist(),
            }
        else:
            seed = scenario.seed if seed_override is None else int(seed_override)
            sample = sample_outcomes(
                joint, scenario.n_samples, seed, tolerances["commutation"]
            )
            results = {
                "n_samples": int(scenario.n_samples),
                "seed": int(seed),
                "outcomes1": list(sample.empirical.outcomes1),
                "outcomes2": list(sample.empirical.outcomes2),
                "counts": sample.counts.tolist(),
                "empirical_table": sample.empirical.probabilities.tolist(),
                "empirical_agreement": table_agreement(sample.empirical),
                "analytic_agreement": agreement_probability(
                    joint, tolerances["commutation"]
                ),
            }

    return {"experiment": experiment, "results": results, "diagnostics": diagnostics}


def _target_pvm(scenario: Scenario) -> Pvm:
    if scenario.observable.pvm is None:
        raise ValidationError(
            f"the {scenario.experiment} experiment needs a projective observable "
            f"(hermitian_matrix, pvm, or an unsharp/povm observable whose effects "
            f"are projectors); use induce or joint for noisy ones"
        )
    return scenario.observable.pvm


def sweep_agreement(scenario: Scenario, etas, max_dim: int = DEFAULT_MAX_DIM):
    """Agreement probability as a function of the unsharpness eta.

    Rebuilds the scenario at each eta, so only scenarios whose observable is
    the unsharp family and whose processes are derived models (not custom
    interactions, which do not depend on eta) can be swept.
    """
    _require(
        scenario.observable.kind == "unsharp",
        "sweep: only the unsharp observable has an eta to sweep",
    )
    _require(
        all(m != "custom" for m in scenario.models),
        "sweep: custom processes do not depend on eta and cannot be swept",
    )
    _require(
        len(scenario.processes) == 2,
        "sweep: agreement needs a two-process scenario",
    )
    rows = []
    for eta in etas:
        data = copy.deepcopy(scenario.raw)
        data["observable"] = {"unsharp": {"eta": float(eta)}}
        rebuilt = load_scenario(data, max_dim=max_dim)
        joint = compose(rebuilt.psi, rebuilt.processes[0], rebuilt.processes[1])
        rows.append((float(eta), agreement_probability(
            joint, rebuilt.tolerances["commutation"]
        )))
    return rows


def scenario_to_json(
    psi,
    observable,
    processes,
    experiment: str,
    tolerances: Optional[dict] = None,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> dict:
    """Serialize programmatically built objects into a scenario document.

    The observable may be a Pvm, a Povm, or a Hermitian matrix; processes are
    written out explicitly as custom processes, so the document reloads to
    numerically identical objects regardless of how they were first built.
    """
    psi = np.asarray(psi, dtype=complex)
    if isinstance(observable, Pvm):
        obs = {"pvm": pvm_to_json(observable)}
    elif isinstance(observable, Povm):
        obs = {"povm": povm_to_json(observable)}
    else:
        obs = {"hermitian_matrix": matrix_to_json(np.asarray(observable, dtype=complex))}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "system": {"dim": int(psi.shape[0]), "state": state_to_json(psi)},
        "observable": obs,
        "processes": [
            {
                "model": "custom",
                "apparatus_dim": int(p.apparatus_dim),
                "xi": state_to_json(p.apparatus_state),
                "unitary": matrix_to_json(p.interaction),
                "meter": pvm_to_json(p.meter),
            }
            for p in processes
        ],
        "experiment": experiment,
    }
    params = {}
    if tolerances is not None:
        params["tolerances"] = {k: float(v) for k, v in tolerances.items()}
    if n_samples is not None:
        params["n_samples"] = int(n_samples)
    if seed is not None:
        params["seed"] = int(seed)
    if params:
        doc["params"] = params
    return doc
