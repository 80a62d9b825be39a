# -*- coding: utf-8 -*-
"""
Calibration of the crossing intensity against the crossing share a batch actually realises.

The analytic mapping counts committed crossers at spawn. Some of them never step onto the road
while the ego camera sees them, so the sequence-level Crosser share of a batch falls below the
analytic fraction. Calibration simulates a pilot subset of the batch in memory and searches the
crossing intensity whose realised share meets the target. Pilot clips use the seeds of the
batch itself, so a pilot covering the whole batch reproduces its share exactly.
"""
import logging
from collections import OrderedDict

from pedcross.algorithms.clip import simulate_clip
from pedcross.algorithms.spawner import MAX_INTENSITY, CrossingRateConfig, analytic_intensity, layers_enabled
from pedcross.behaviour import SimulationError
from pedcross.utils.cli import run_all
from pedcross.weather import get_weather
from pedcross.world import build_world

logger = logging.getLogger("pedcross.calibration")


def pilot_jobs(jobs, count):
    """
    Spread ``count`` pilot clips evenly over ``jobs``; all jobs when there are no more of them.

        >>> pilot_jobs(list(range(10)), 4)
        [0, 2, 5, 7]
        >>> pilot_jobs(list(range(3)), 4)
        [0, 1, 2]

    """
    n = len(jobs)
    if n <= count:
        return list(jobs)
    return [jobs[i * n // count] for i in range(count)]


def pilot_kernel(arg0):
    """
    Simulate one pilot clip without writing it.

    :param arg0: tuple ``(params, job)``
    :returns: ``(crossers, non_crossers)`` among the labelled pedestrians of the clip

    """
    # Pool.map only supports a single parameter
    params, job = arg0
    try:
        recording = simulate_clip(params, build_world(job["town"]), get_weather(job["weather"]), job["clip_seed"],
                                  clip_id=job["clip_id"])
    except SimulationError as e:
        logger.debug("pilot %s failed: %s", job["clip_id"], e)
        return 0, 0

    labels = [p["sequence_label"] for p in recording.manifest.pedestrians]
    return labels.count("Crosser"), labels.count("NonCrosser")


def _next_intensity(trials, lo, hi, target):
    """
    Next intensity to try: regula falsi inside a two-sided bracket, a secant step through the last
    two trials otherwise, kept inside the bracket.
    """
    (x_lo, s_lo), (x_hi, s_hi) = lo, hi
    x, s = trials[-1]
    if s_lo is not None and s_hi is not None and s_hi > s_lo:
        guess = x_lo + (target - s_lo) * (x_hi - x_lo) / (s_hi - s_lo)
    elif len(trials) > 1 and trials[-1][1] != trials[-2][1]:
        (x0, s0), (x1, s1) = trials[-2], trials[-1]
        guess = x1 + (target - s1) * (x1 - x0) / (s1 - s0)
    elif s > 0:
        guess = x * target / s
    else:
        guess = x_hi

    if not x_lo < guess < x_hi:
        if s_hi is None and guess >= x_hi:
            guess = x_hi
        elif s_lo is None and guess <= x_lo:
            guess = x_lo
        else:
            guess = (x_lo + x_hi) / 2
    if any(abs(guess - t[0]) < 1e-9 for t in trials):
        guess = (x_lo + x_hi) / 2
    return guess


def search_intensity(measure, target, start, tolerance=0.01, rounds=6, upper=MAX_INTENSITY):
    """
    Search an intensity in ``[0, upper]`` whose measured share lies within ``tolerance`` of ``target``.

    The measured share is assumed to grow with the intensity. The search keeps the tightest
    bracket seen so far and stops early once a trial is close enough, when the target lies out
    of reach, or after ``rounds`` trials.

        >>> best, trials = search_intensity(lambda x: 0.2 + 0.3 * x, 0.6, 1.0)
        >>> round(best[0], 6), round(best[1], 6), len(trials)
        (1.333333, 0.6, 3)

    :param measure: callable mapping an intensity to a share
    :param target: share to reach
    :param start: first intensity to try
    :param tolerance: accepted absolute deviation
    :param rounds: maximal number of trials
    :param upper: largest intensity
    :returns: ``((intensity, share), trials)`` with the closest trial first

    """
    lo, hi = (0.0, None), (float(upper), None)
    trials = []
    x = min(max(float(start), 0.0), float(upper))
    for _ in range(rounds):
        s = float(measure(x))
        trials.append((x, s))
        logger.debug("intensity %.4f realises crossing share %.4f", x, s)
        if abs(s - target) <= tolerance:
            break
        if s < target:
            if x >= upper:
                break
            lo = (x, s)
        else:
            if x <= 0.0:
                break
            hi = (x, s)
        if lo[0] >= hi[0]:
            break
        x = _next_intensity(trials, lo, hi, target)

    best = min(trials, key=lambda t: (abs(t[1] - target), t[0]))
    return best, trials


def calibrate_crossing_rates(params, jobs):
    """
    Find the crossing intensity at which the pilot clips of ``jobs`` realise the target crossing ratio.

    :param params: resolved generation parameters with ``crossing_ratio`` set
    :param jobs: clip jobs of the batch
    :returns: ordered calibration report, ``None`` when the crossing layers are disabled

    """
    target = params["crossing_ratio"]
    cfg = CrossingRateConfig.from_params(params.new(crossing_ratio=None))
    if not layers_enabled(cfg):
        logger.warning("crossing layers are disabled, target crossing ratio %.2f not calibrated", target)
        return None

    pilot = pilot_jobs(jobs, int(params["calibration_clips"]))
    start = analytic_intensity(cfg, target)

    def measure(intensity):
        trial = params.new(crossing_intensity=intensity)
        counts = run_all(pilot_kernel, [(trial, job) for job in pilot], workers=params["workers"])
        crossing = sum(c for c, _ in counts)
        labelled = crossing + sum(n for _, n in counts)
        return crossing / float(labelled) if labelled else 0.0

    logger.info("calibrating crossing intensity on %d pilot clips for target %.2f", len(pilot), target)
    (intensity, share), trials = search_intensity(measure, target, start, tolerance=params["calibration_tolerance"],
                                                  rounds=int(params["calibration_rounds"]))
    if abs(share - target) > params["calibration_tolerance"]:
        logger.warning("closest realised crossing share %.3f at intensity %.3f misses target %.2f", share,
                       intensity, target)
    else:
        logger.info("crossing intensity %.4f realises %.3f on the pilot clips", intensity, share)

    report = OrderedDict()
    report["target"] = float(target)
    report["analytic_intensity"] = start
    report["intensity"] = intensity
    report["pilot_clips"] = len(pilot)
    report["pilot_share"] = share
    report["trials"] = [OrderedDict([("intensity", x), ("share", s)]) for x, s in trials]
    return report
