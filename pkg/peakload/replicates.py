"""
Seeded Monte-Carlo replicate runner shared by the GOF test, the bootstrap
and the alternative-family tests.

Replicate i draws from a generator seeded by child i of
``SeedSequence(seed, spawn_key=(stream,))``. The child depends only on
(seed, stream, i), so a process pool returns exactly what a sequential
loop returns.
"""

import logging
import math
from functools import partial
from multiprocessing import Pool

import numpy as np

logger = logging.getLogger(__name__)


STREAM_GOF = 1
STREAM_BOOTSTRAP = 2
STREAM_ALT = 3


def spawn_seeds(seed, count, stream=0):
    root = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return root.spawn(int(count))


def replicate_rng(seed_seq):
    return np.random.Generator(np.random.PCG64(seed_seq))


def run_replicates(worker, payload, seed, count, stream=0, workers=1):
    """
    Call ``worker(payload, seed_seq)`` once per replicate and return the
    results in replicate order. ``worker`` must be a module-level function
    when ``workers > 1``.
    """
    seeds = spawn_seeds(seed, count, stream)
    task = partial(worker, payload)

    if workers <= 1 or count < 2:
        return [task(s) for s in seeds]

    workers = min(int(workers), len(seeds))
    chunksize = max(1, math.ceil(len(seeds) / (workers * 4)))
    logger.info("Running %d replicates on %d worker processes.", count, workers)

    with Pool(processes=workers) as pool:
        return pool.map(task, seeds, chunksize=chunksize)


def semiparametric_sample(body_values, size, tail_probability, tail_sampler, rng):
    """
    Synthetic sample of ``size`` points: each point is, with probability
    ``tail_probability``, a fresh model variate from ``tail_sampler(k, rng)``,
    otherwise a uniform resample of the observed body values.
    """
    body_values = np.asarray(body_values, dtype=float)

    if body_values.size == 0:
        n_tail = int(size)
    else:
        n_tail = int(np.count_nonzero(rng.random(int(size)) < tail_probability))

    parts = []
    if n_tail < size:
        parts.append(rng.choice(body_values, size=int(size) - n_tail, replace=True))
    if n_tail:
        parts.append(np.asarray(tail_sampler(n_tail, rng), dtype=float))

    return np.concatenate(parts)
