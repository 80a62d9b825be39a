#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Pedestrian Crossing Scenarios Command Line Client
"""
import sys
from collections import OrderedDict
from dataclasses import asdict

from pedcross.algorithms.batch import run_batch
from pedcross.annotation import find_clip_dirs
from pedcross.behaviour import describe_behaviour
from pedcross.generation_params import ConfigurationError
from pedcross.sensing import CameraModel
from pedcross.utils.cli import UsageError, parse_cli, setup_logging
from pedcross.utils.stats import dataset_stats, format_stats, verify_crossing_ratio
from pedcross.utils.util import dumps
from pedcross.weather import WEATHER_CONDITIONS
from pedcross.world import TEMPLATES, build_world

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BATCH_FAILED = 2
EXIT_VERIFICATION_FAILED = 3


def print_params(params):
    slen = max(len(p) for p in params) + 1
    fmt = "{key:%ds}: {value}" % slen
    for k, v in params.items():
        print(fmt.format(key=k, value=v))


def describe():
    """
    Archetypes, behaviour graph, weather table, road templates and camera as one document.
    """
    templates = OrderedDict()
    for name in TEMPLATES:
        world = build_world(name)
        templates[name] = OrderedDict(asdict(world))
        templates[name]["road_width"] = world.w_road
    doc = describe_behaviour()
    doc["weather_conditions"] = [w.describe() for w in WEATHER_CONDITIONS.values()]
    doc["templates"] = templates
    doc["camera"] = CameraModel().describe()
    return doc


def generate(args, params):
    if args.show_defaults or args.dry_run:
        print_params(params)
        return EXIT_OK

    setup_logging(args.loglvl, args.log_filename)
    report = run_batch(params)
    return EXIT_BATCH_FAILED if report["status"] == "failed" else EXIT_OK


def stats(args):
    report = dataset_stats(find_clip_dirs(args.clip_dir))
    if not args.json_only:
        print(format_stats(report))
        print()
    print(dumps(report, indent=2))
    return EXIT_OK


def verify(args):
    report = verify_crossing_ratio(dataset_stats(find_clip_dirs(args.clip_dir)), args.target, args.tolerance)
    print(dumps(report, indent=2))
    return EXIT_VERIFICATION_FAILED if report["verdict"] == "fail" else EXIT_OK


def main(argv=None):
    """
    Run one ``scenarios`` command and return its exit code.
    """
    try:
        args, params = parse_cli(argv)
        if args.command == "generate":
            return generate(args, params)
        if args.command == "stats":
            return stats(args)
        if args.command == "verify":
            return verify(args)
        print(dumps(describe(), indent=2))
        return EXIT_OK
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
