# -*- coding: utf-8 -*-
"""
Statistics for generated datasets.
"""
import logging
from collections import Counter, OrderedDict

from scipy.stats import binomtest

from pedcross.annotation import load_manifest

logger = logging.getLogger("pedcross.stats")

MIN_SAMPLES = 100
CONFIDENCE = 0.95


def _share(k, n):
    return k / float(n) if n else 0.0


def dataset_stats(clip_dirs):
    """
    Aggregate the manifests of ``clip_dirs``.

    Pedestrians never visible in their clip carry no sequence label and count towards
    ``unique_pedestrians`` only. Clips with a malformed manifest are listed under ``errors``.

    :param clip_dirs: clip directories
    :returns: ordered report dictionary

        >>> dataset_stats([])["total_clips"]
        0

    """
    clips, frames, samples, pedestrians, crossing, non_crossing = 0, 0, 0, 0, 0, 0
    duration = 0.0
    weathers, towns, archetypes = Counter(), Counter(), Counter()
    errors = []

    for clip_dir in clip_dirs:
        try:
            manifest = load_manifest(clip_dir)
        except ValueError as e:
            logger.warning("%s", e)
            errors.append(str(clip_dir))
            continue

        clips += 1
        frames += int(manifest["frame_count"])
        duration += int(manifest["frame_count"]) / float(manifest.get("fps", 30))
        samples += int(manifest["annotated_samples"])
        weathers[manifest["weather"]] += 1
        towns[manifest["town"]] += 1
        for ped in manifest["pedestrians"]:
            pedestrians += 1
            archetypes[ped.get("archetype")] += 1
            if ped.get("sequence_label") == "Crosser":
                crossing += 1
            elif ped.get("sequence_label") == "NonCrosser":
                non_crossing += 1

    labelled = crossing + non_crossing
    report = OrderedDict()
    report["total_clips"] = clips
    report["total_frames"] = frames
    report["avg_frames_per_clip"] = _share(frames, clips)
    report["avg_duration"] = _share(duration, clips)
    report["unique_pedestrians"] = pedestrians
    report["labelled_pedestrians"] = labelled
    report["crossing"] = crossing
    report["non_crossing"] = non_crossing
    report["crossing_share"] = _share(crossing, labelled)
    report["non_crossing_share"] = _share(non_crossing, labelled)
    report["cnc_ratio"] = _share(crossing, non_crossing)
    report["annotated_samples"] = samples
    report["avg_samples_per_clip"] = _share(samples, clips)
    report["weather_coverage"] = OrderedDict(sorted(weathers.items()))
    report["town_coverage"] = OrderedDict(sorted(towns.items()))
    report["archetypes"] = OrderedDict(sorted((str(k), v) for k, v in archetypes.items()))
    report["errors"] = errors
    return report


def verify_crossing_ratio(stats, target, tolerance=0.08, min_samples=MIN_SAMPLES):
    """
    Compare the sequence-level crossing share of ``stats`` with ``target``.

    :param stats: report of :func:`dataset_stats`
    :param target: target crossing ratio
    :param tolerance: accepted absolute deviation
    :param min_samples: below this many labelled pedestrians the verdict is ``inconclusive``
    :returns: ordered dictionary with ``verdict`` one of ``pass``, ``fail``, ``inconclusive``

        >>> verify_crossing_ratio({"crossing": 62, "non_crossing": 38}, 0.6)["verdict"]
        'pass'
        >>> verify_crossing_ratio({"crossing": 30, "non_crossing": 70}, 0.6)["verdict"]
        'fail'
        >>> verify_crossing_ratio({"crossing": 30, "non_crossing": 20}, 0.6)["verdict"]
        'inconclusive'

    """
    k = int(stats["crossing"])
    n = k + int(stats["non_crossing"])
    measured = _share(k, n)

    if n == 0:
        low, high = 0.0, 1.0
    else:
        ci = binomtest(k, n).proportion_ci(confidence_level=CONFIDENCE)
        low, high = float(ci.low), float(ci.high)

    if n < min_samples:
        verdict = "inconclusive"
    elif abs(measured - target) <= tolerance + 1e-12:
        verdict = "pass"
    else:
        verdict = "fail"

    report = OrderedDict([("verdict", verdict),
                          ("measured", measured),
                          ("target", float(target)),
                          ("tolerance", float(tolerance)),
                          ("samples", n),
                          ("ci_low", low),
                          ("ci_high", high),
                          ("confidence", CONFIDENCE)])
    logger.info("crossing ratio %.3f (%d pedestrians, %.0f%% CI [%.3f, %.3f]) vs target %.3f: %s",
                measured, n, 100 * CONFIDENCE, low, high, target, verdict)
    return report


def format_stats(report):
    """
    Render a :func:`dataset_stats` report as a text table.

        >>> format_stats(dataset_stats([])).split()[:2]
        ['Metric', 'Value']

    """
    rows = [("Total clips", "%d" % report["total_clips"]),
            ("Total frames", "%d" % report["total_frames"]),
            ("Avg. frames per clip", "%.1f" % report["avg_frames_per_clip"]),
            ("Avg. clip duration (s)", "%.2f" % report["avg_duration"]),
            ("Unique pedestrians", "%d" % report["unique_pedestrians"]),
            ("Crossing (C)", "%d (%.1f%%)" % (report["crossing"], 100 * report["crossing_share"])),
            ("Non-crossing (NC)", "%d (%.1f%%)" % (report["non_crossing"], 100 * report["non_crossing_share"])),
            ("C/NC ratio", "%.2f" % report["cnc_ratio"]),
            ("Annotated samples", "%d" % report["annotated_samples"]),
            ("Avg. samples per clip", "%.1f" % report["avg_samples_per_clip"]),
            ("Weather conditions", "%d" % len(report["weather_coverage"])),
            ("Towns", "%d" % len(report["town_coverage"]))]
    if report["errors"]:
        rows.append(("Malformed clips", "%d" % len(report["errors"])))

    lines = ["%-30s %10s" % ("Metric", "Value"), "-" * 41]
    lines.extend("%-30s %10s" % row for row in rows)
    return "\n".join(lines)
