import os

import numpy as np

# Stream id reserved for the k-means pre-run that picks alpha.
ALPHA_STREAM = 0xA1FA

N_JOBS_ENV = "LWK_N_JOBS"


def rng_for(seed, *key) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``; order of use never matters."""
    seed = int(seed)
    # SeedSequence entropy must be nonnegative; fold negative seeds into 64 bits.
    words = [seed & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in key]
    return np.random.default_rng(np.random.SeedSequence(words))


def default_n_jobs(n_jobs=None) -> int:
    if n_jobs is not None:
        return int(n_jobs)
    raw = os.environ.get(N_JOBS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return int(raw)
    except ValueError:
        return 1


def run_parallel(func, tasks, n_jobs=None):
    """``[func(*t) for t in tasks]``, spread over joblib workers when ``n_jobs != 1``."""
    n_jobs = default_n_jobs(n_jobs)
    tasks = list(tasks)
    if n_jobs == 1 or len(tasks) < 2:
        return [func(*t) for t in tasks]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(func)(*t) for t in tasks)
