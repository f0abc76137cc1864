"""Worker pool for independent trials.

Trial ``t`` of suite ``s`` always receives the generator derived from
(master seed, s, t), so results are identical for every ``jobs`` value.
Workers are forked so they see the settings the parent configured.
"""
import multiprocessing as mp
from functools import partial
from typing import Any, Callable, List

import numpy as np

from entlab.core.logger import get_logger
from entlab.core.seeding import trial_rng

logger = get_logger(__name__)

TrialFn = Callable[[int, np.random.Generator], Any]


def _run_trial(fn: TrialFn, suite: str, master: int, trial: int) -> Any:
    return fn(trial, trial_rng(master, suite, trial))


def run_trials(fn: TrialFn, suite: str, trials: int, master: int, jobs: int = 1) -> List[Any]:
    """
    Evaluate ``fn(trial, rng)`` for every trial index.

    Args:
        fn: Module-level function (it is pickled for the workers)
        suite: Suite name used in seed derivation
        trials: Number of trials
        master: Master seed
        jobs: Worker processes; 1 runs inline

    Returns:
        Results ordered by trial index
    """
    task = partial(_run_trial, fn, suite, master)
    if jobs <= 1 or trials <= 1:
        return [task(t) for t in range(trials)]
    logger.debug("Dispatching trials", extra={"extra": {"suite": suite, "trials": trials, "jobs": jobs}})
    with mp.get_context("fork").Pool(processes=jobs) as pool:
        return pool.map(task, range(trials), chunksize=max(1, trials // (4 * jobs)))
