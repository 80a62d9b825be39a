# -*- coding: utf-8 -*-
"""
Batch generation over weather conditions, clip indices and towns.
"""
import logging
import os
from collections import OrderedDict

from pedcross.algorithms.calibration import calibrate_crossing_rates
from pedcross.algorithms.clip import run_clip
from pedcross.annotation import ClipWriteError
from pedcross.behaviour import SimulationError
from pedcross.utils.cli import run_all
from pedcross.utils.stats import dataset_stats, verify_crossing_ratio
from pedcross.utils.util import RngStream, dumps
from pedcross.weather import get_weather, weather_index
from pedcross.world import build_world

logger = logging.getLogger("pedcross.batch")

BATCH_REPORT = "batch_report.json"


def clip_seed(root_seed, weather_idx, clip_index):
    """
    Seed of a clip, derived from its position in the batch only.

        >>> clip_seed(0, 3, 1) == clip_seed(0, 3, 1) != clip_seed(0, 1, 3)
        True

    """
    return RngStream(root_seed).child(weather_idx, clip_index).seed64()


def clip_jobs(params):
    """
    All clips of a batch: every weather condition ``videos_per_weather`` times, towns assigned
    round-robin by clip index.

    :param params: resolved generation parameters
    :returns: list of ordered job descriptions

    """
    towns = params["towns"]
    jobs = []
    for weather in params["weather_conditions"]:
        wi = weather_index(weather)
        for ci in range(params["videos_per_weather"]):
            jobs.append(OrderedDict([("clip_id", "%s_%04d" % (weather, ci)),
                                     ("weather", weather),
                                     ("weather_index", wi),
                                     ("clip_index", ci),
                                     ("town", towns[ci % len(towns)]),
                                     ("clip_seed", clip_seed(params["seed"], wi, ci))]))
    return jobs


def clip_kernel(arg0):
    """
    Generate one clip and report how it went.

    :param arg0: tuple ``(params, job)``
    :returns: ordered status dictionary

    """
    # Pool.map only supports a single parameter
    params, job = arg0

    status = OrderedDict([("clip_id", job["clip_id"]),
                          ("weather", job["weather"]),
                          ("town", job["town"]),
                          ("clip_seed", job["clip_seed"])])
    try:
        manifest = run_clip(params, build_world(job["town"]), get_weather(job["weather"]), job["clip_seed"],
                            clip_id=job["clip_id"], out_dir=params["outputs_dir"])
    except (SimulationError, ClipWriteError) as e:
        logger.error("%s failed: %s", job["clip_id"], e)
        status["status"] = "failed"
        status["error"] = "%s: %s" % (type(e).__name__, e)
        return status

    status["status"] = "ok"
    status["frame_count"] = manifest.frame_count
    status["pedestrians"] = len(manifest.pedestrians)
    return status


def run_batch(params):
    """
    Generate all clips of ``params`` and write ``batch_report.json`` to the output directory.

    With a target crossing ratio the crossing intensity is first calibrated on pilot clips, unless
    ``crossing_intensity`` is given or ``calibration_clips`` is zero. Failed clips are logged and
    skipped; the batch fails when more than ``failure_threshold`` of its clips failed.

    :param params: resolved generation parameters
    :returns: the batch report

    """
    out_dir = params["outputs_dir"]
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)

    jobs = clip_jobs(params)
    logger.info("generating %d clips over %d weather conditions into %s", len(jobs),
                len(params["weather_conditions"]), out_dir)

    calibration = None
    if (params["crossing_ratio"] is not None and params["crossing_intensity"] is None
            and params["calibration_clips"] > 0):
        calibration = calibrate_crossing_rates(params, jobs)
        if calibration is not None:
            params = params.new(crossing_intensity=calibration["intensity"])

    results = run_all(clip_kernel, [(params, job) for job in jobs], workers=params["workers"])

    failures = [r for r in results if r["status"] != "ok"]
    stats = dataset_stats([os.path.join(out_dir, r["clip_id"]) for r in results if r["status"] == "ok"])

    verification = None
    if params["crossing_ratio"] is not None:
        verification = verify_crossing_ratio(stats, params["crossing_ratio"])

    failed = len(jobs) > 0 and len(failures) > params["failure_threshold"] * len(jobs)

    report = OrderedDict()
    report["status"] = "failed" if failed else "ok"
    report["clips"] = len(jobs)
    report["failed_clips"] = [OrderedDict([("clip_id", r["clip_id"]), ("error", r["error"])]) for r in failures]
    report["stats"] = stats
    report["verification"] = verification
    report["calibration"] = calibration
    report["config"] = params.recorded()

    with open(os.path.join(out_dir, BATCH_REPORT), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report, indent=2))
        fh.write("\n")

    if failed:
        logger.error("%d of %d clips failed", len(failures), len(jobs))
    else:
        logger.info("%d clips, %d failed, crossing share %.3f", len(jobs), len(failures), stats["crossing_share"])
    return report
