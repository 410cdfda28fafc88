"""Shared randomized factories for states, unitaries, observables, processes."""

import numpy as np

from qmeasure import MeasurementProcess, Povm, Pvm

# integer eigenvalue pool keeps clusters separated far beyond every tolerance
_LABEL_POOL = np.arange(-5, 6)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_labels(rng, n_outcomes):
    return np.sort(rng.choice(_LABEL_POOL, size=n_outcomes, replace=False)).astype(float)


def random_hermitian_with_outcomes(rng, dim, n_outcomes):
    """Hermitian operator with exactly n_outcomes well-separated eigenvalues."""
    values = random_labels(rng, n_outcomes)
    extra = rng.choice(values, size=dim - n_outcomes)
    spectrum = np.concatenate([values, extra])
    u = random_unitary(rng, dim)
    a = (u * spectrum) @ u.conj().T
    return (a + a.conj().T) / 2


def random_pvm(rng, dim, n_outcomes):
    u = random_unitary(rng, dim)
    cuts = np.sort(rng.choice(np.arange(1, dim), size=n_outcomes - 1, replace=False))
    groups = np.split(np.arange(dim), cuts)
    projectors = []
    for grp in groups:
        block = u[:, grp]
        p = block @ block.conj().T
        projectors.append((p + p.conj().T) / 2)
    return Pvm(tuple(random_labels(rng, n_outcomes)), tuple(projectors), dim)


def random_povm(rng, dim, n_outcomes):
    grams = []
    for _ in range(n_outcomes):
        b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        grams.append(b.conj().T @ b)
    total = sum(grams)
    w, v = np.linalg.eigh(total)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    effects = []
    for g in grams:
        e = inv_sqrt @ g @ inv_sqrt
        effects.append((e + e.conj().T) / 2)
    return Povm(tuple(random_labels(rng, n_outcomes)), tuple(effects), dim)


def pointer_meter(dim):
    projectors = tuple(np.diag(np.eye(dim)[j]).astype(complex) for j in range(dim))
    return Pvm(tuple(float(j) for j in range(dim)), projectors, dim)


def random_process(rng, system_dim, apparatus_dim):
    return MeasurementProcess(
        system_dim=system_dim,
        apparatus_dim=apparatus_dim,
        apparatus_state=random_state(rng, apparatus_dim),
        interaction=random_unitary(rng, system_dim * apparatus_dim),
        meter=pointer_meter(apparatus_dim),
    )
