"""Deterministic chunked Monte Carlo over orbits of the base system.

Samples are split into fixed-size chunks; chunk ``i`` draws from a generator
seeded by ``SeedSequence(seed, spawn_key=(i,))``. Results are concatenated
in chunk order, so the output is identical for any worker count.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import InvalidInputError

CHUNK_SIZE = 4096


def chunk_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def derive_seed(seed, *tags):
    """Child seed for an independent sub-experiment identified by ``tags``."""
    ss = np.random.SeedSequence([int(seed), *[int(t) for t in tags]])
    return int(ss.generate_state(1, np.uint64)[0])


def chunk_sizes(samples, chunk_size=CHUNK_SIZE):
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    full, rest = divmod(int(samples), chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def map_chunks(fn, samples, seed, workers=1, chunk_size=CHUNK_SIZE):
    """Run ``fn(rng, size)`` on every chunk and concatenate along axis 0."""
    sizes = chunk_sizes(samples, chunk_size)
    jobs = [(chunk_rng(seed, i), s) for i, s in enumerate(sizes)]
    if workers is None or workers <= 1 or len(jobs) == 1:
        parts = [fn(rng, s) for rng, s in jobs]
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    return np.concatenate(parts, axis=0)


def evaluator(cocycle, system):
    """Fast ``points -> matrices`` map; symbol-indexed cocycles use a lookup table."""
    mats = cocycle.symbol_matrices() if system.kind == "shift" else None
    if mats is None:
        return cocycle.batch
    mats = np.ascontiguousarray(mats)
    if len(mats) == 1:
        return lambda pts: np.broadcast_to(mats[0], (len(pts),) + mats.shape[1:])
    return lambda pts: mats[pts]


def _frobenius(P):
    return np.sqrt(np.einsum("sij,sij->s", P, P))


def _renormalize(P, logs):
    f = _frobenius(P)
    with np.errstate(divide="ignore"):
        logs += np.log(f)
    P /= np.where(f > 0, f, 1.0)[:, None, None]


def _finish(P, logs):
    s1 = np.linalg.svd(P, compute_uv=False)[:, 0]
    with np.errstate(divide="ignore"):
        return logs + np.log(s1)


def segment_log_norms_chunk(cocycles, system, segments, rng, size):
    """log ||A^{(b-a)}(T^a x)|| for every cocycle and segment ``(a, b)``.

    All cocycles are evaluated along the same ``size`` orbits. Segments
    sharing a start reuse one running product. Returns an array of shape
    ``(size, len(cocycles), len(segments))``.
    """
    segments = [(int(a), int(b)) for a, b in segments]
    if any(a < 0 or b <= a for a, b in segments):
        raise InvalidInputError("segments must satisfy 0 <= start < stop")
    runs = {}
    for idx, (a, b) in enumerate(segments):
        runs.setdefault(a, {}).setdefault(b, []).append(idx)
    horizon = max(b for _, b in segments)
    out = np.empty((size, len(cocycles), len(segments)))
    active = {}
    evals = [evaluator(c, system) for c in cocycles]
    orbit = system.orbit(rng, size)
    for j in range(horizon):
        pts = next(orbit)
        if j in runs:
            active[j] = [
                (np.broadcast_to(np.eye(c.dim), (size, c.dim, c.dim)).copy(), np.zeros(size))
                for c in cocycles
            ]
        if not active:
            continue
        mats = [f(pts) for f in evals]
        for start in list(active):
            state = active[start]
            for ci, (P, logs) in enumerate(state):
                P = np.matmul(mats[ci], P)
                _renormalize(P, logs)
                state[ci] = (P, logs)
            stops = runs[start]
            if j + 1 in stops:
                for ci, (P, logs) in enumerate(state):
                    val = _finish(P, logs)
                    for idx in stops[j + 1]:
                        out[:, ci, idx] = val
            if j + 1 >= max(stops):
                del active[start]
    return out


def segment_log_norms(cocycles, system, segments, samples, seed, workers=1):
    return map_chunks(
        lambda rng, size: segment_log_norms_chunk(cocycles, system, segments, rng, size),
        samples, seed, workers,
    )


def mean_and_error(values):
    """Sample mean, standard error and count of ``-inf`` entries.

    A single ``-inf`` sample makes the mean ``-inf``; the error is then
    reported as 0 and the count flags the situation.
    """
    v = np.asarray(values, dtype=float)
    neg = int(np.sum(np.isneginf(v)))
    if neg:
        return -np.inf, 0.0, neg
    if v.size < 2:
        return float(v.mean()), 0.0, 0
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size)), 0
