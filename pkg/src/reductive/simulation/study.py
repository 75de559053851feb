"""Replication harness: run a StudySpec and aggregate it into a StudyTable."""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from reductive.models import StudyRow, StudyTable

from .config import SimConfig, StudySpec
from .oracles import population_moments
from .tasks import ReplicateOutcome, run_replicate

logger = logging.getLogger(__name__)


def summarize(
    sweep_param: str, sweep_value: float, estimator: str, outcomes: list[ReplicateOutcome]
) -> StudyRow:
    """Aggregate one estimator's replications; failures are counted and excluded."""
    ok = [o for o in outcomes if o.ok]
    angles = [float(o.angle_deg) for o in ok if o.angle_deg is not None]
    mses = [float(o.scaled_mse) for o in ok if o.scaled_mse is not None]
    mean_angle = float(np.mean(angles)) if angles else None
    return StudyRow(
        sweep_param=sweep_param,
        sweep_value=sweep_value,
        estimator=estimator,
        mean_angle_deg=mean_angle,
        sd_angle_deg=float(np.std(angles, ddof=1)) if len(angles) > 1 else None,
        log_mean_angle=float(np.log(mean_angle)) if mean_angle else None,
        mean_mse=float(np.mean(mses)) if mses else None,
        n_ok=len(ok),
        n_fail=len(outcomes) - len(ok),
        source_counts=dict(Counter(o.source for o in ok if o.source is not None)),
        angles=angles,
        mses=mses,
    )


def run_design(
    cfg: SimConfig, sweep_index: int = 0, threads: int = 1
) -> dict[str, list[ReplicateOutcome]]:
    """All replications of one design, grouped by estimator in replication order."""
    pop = population_moments(cfg)
    reps = range(cfg.reps)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: run_replicate(cfg, r, sweep_index, pop), reps))
    else:
        results = [run_replicate(cfg, r, sweep_index, pop) for r in reps]
    grouped: dict[str, list[ReplicateOutcome]] = {name: [] for name in cfg.estimators}
    for outcomes in results:
        for outcome in outcomes:
            grouped[outcome.estimator].append(outcome)
    return grouped


def run_study(spec: StudySpec, threads: int = 1) -> StudyTable:
    """Run every grid point of ``spec``; rows come in sweep order then estimator order."""
    base = spec.base
    logger.info(
        f"Study {spec.name}: model={base.model.value} sweep {spec.sweep.param} over "
        f"{len(spec.sweep.values)} values, {base.reps} reps, estimators {base.estimators}"
    )
    table = StudyTable(
        name=spec.name,
        model=base.model.value,
        sweep_param=spec.sweep.param,
        estimators=list(base.estimators),
        reps=base.reps,
        seed=base.seed,
        log_angles=spec.log_angles,
    )
    for sweep_index, value, cfg in spec.configs():
        grouped = run_design(cfg, sweep_index, threads)
        for name in cfg.estimators:
            row = summarize(spec.sweep.param, value, name, grouped[name])
            table.rows.append(row)
            if row.n_fail:
                logger.warning(
                    f"{name} at {spec.sweep.param}={value}: {row.n_fail} of {cfg.reps} fits failed"
                )
        means = {r.estimator: r.mean_angle_deg for r in table.rows if r.sweep_value == value}
        logger.info(f"{spec.sweep.param}={value}: {means}")
    return table
