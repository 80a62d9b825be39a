# -*- coding: utf-8 -*-
"""
Command Line Interfaces
"""
import argparse
import ast
import copy
import datetime
import logging
import os
import re
import socket
import subprocess
import sys
from multiprocessing import Pool

import multiprocessing_logging

from pedcross.generation_params import GenerationParams

cli_arg_aliases = {
    "Town01": "town_a",
    "Town02": "town_b",
    "Town03": "town_c",
    "Town05": "town_e",
    "--outputs-dir": "--outputs_dir",
    "--weather-conditions": "--weather_conditions",
    "--videos-per-weather": "--videos_per_weather",
    "--dataset-mode": "--dataset_mode",
    "--crossing-ratio": "--crossing_ratio",
    "--sudden-crossing-ratio": "--sudden_crossing_ratio",
    "--jaywalking-ratio": "--jaywalking_ratio",
}


class UsageError(Exception):
    pass


def apply_aliases(cli_args):
    """
    Apply aliases to command line argument. Only whole arguments, or the key of ``--key=value``,
    are replaced.

        >>> apply_aliases(['--towns', 'Town01', 'Town05', '--outputs-dir', '/tmp/x'])
        ['--towns', 'town_a', 'town_e', '--outputs_dir', '/tmp/x']
        >>> apply_aliases(['--outputs-dir=/data/Town01_runs'])
        ['--outputs_dir=/data/Town01_runs']

    :param cli_args: list of strings

    """
    acli_args = []

    for arg in cli_args:
        key, sep, value = arg.partition("=") if arg.startswith("--") else (arg, "", "")
        acli_args.append(cli_arg_aliases.get(key, key) + sep + value)

    return acli_args


def pop_prefixed_params(prefix, params):
    """
    pop all parameters from ``params`` with a prefix.

    A prefix is any string before the first "/" in a string::

        >>> pop_prefixed_params('crossing', {'crossing/group_probability': 0.4, 'seed': 2})
        {'group_probability': 0.4}

    :param prefix: prefix string
    :param params: key-value store where keys are strings

    """
    keys = [k for k in params]
    poped_params = {}
    if not prefix.endswith("/"):
        prefix += "/"

    for key in keys:
        if key.startswith(prefix):
            poped_key = key[len(prefix):]
            poped_params[poped_key] = params.pop(key)

    return poped_params


def parse_value(v):
    """
    Interpret a command line value as a Python literal, falling back to the string itself.

        >>> parse_value("0.25"), parse_value("(10, 12)"), parse_value("town_b")
        (0.25, (10, 12), 'town_b')

    """
    try:
        return ast.literal_eval(v)
    except (ValueError, SyntaxError):
        return v


def parse_free_params(unknown):
    """
    Turn ``--key value ...`` arguments into a dictionary. Keys without values are set to ``True``,
    keys with several values to a tuple.

        >>> parse_free_params(['--crossing/group_probability', '0', '--clip-duration-range', '10', '12'])
        {'crossing/group_probability': 0, 'clip_duration_range': (10, 12)}

    """
    params = {}
    i = 0
    while i < len(unknown):
        k = unknown[i]
        if not k.startswith("-"):
            raise UsageError("Failure to parse command line argument '%s'" % k)
        k = re.match("^-+(.*)", k).groups()[0]
        k = k.replace("-", "_")
        values = []
        i += 1
        while i < len(unknown) and not unknown[i].startswith("--"):
            values.append(parse_value(unknown[i]))
            i += 1
        if not values:
            params[k] = True
        elif len(values) == 1:
            params[k] = values[0]
        else:
            params[k] = tuple(values)
    return params


def run_all(f, jobs, workers=1):
    """
    Call ``f`` on every job, in a process pool when ``workers > 1``.

    ``Pool.map`` only supports a single parameter, so every job is one tuple.

    :param f: function taking one job
    :param jobs: list of jobs
    :param workers: number of parallel processes
    :returns: results in job order

    """
    if workers == 1:
        results = []
        for job in jobs:
            res = f(copy.deepcopy(job))
            logging.debug(res)
            results.append(res)
        return results

    pool = Pool(workers)
    try:
        results = pool.map(f, jobs)
    finally:
        pool.close()
        pool.join()
    for res in results:
        logging.debug(res)
    return results


def git_revisionf():
    git_revision = []
    cmds = [("git", "show", "-s", "--format=%cd", "HEAD", "--date=short"),
            ("git", "rev-parse", "--abbrev-ref", "HEAD"),
            ("git", "show", "-s", "--format=%h", "HEAD", "--date=short")]

    for cmd in cmds:
        try:
            r = subprocess.check_output(cmd, stderr=subprocess.DEVNULL).decode().rstrip()
            git_revision.append(r)
        except (subprocess.CalledProcessError, OSError):
            pass

    git_revision = "-".join(git_revision)
    return git_revision


def log_filenamef():
    base = os.path.basename(sys.argv[0]).replace(".py", "")
    revision = git_revisionf()
    date = datetime.datetime.now().strftime("%Y-%m-%d_%H:%M")
    hostname = socket.gethostname()
    log_filename = "{base},{hostname},{date},{revision}.log".format(base=base,
                                                                    hostname=hostname,
                                                                    date=date,
                                                                    revision=revision)
    log_filename = os.path.join("logs", log_filename)
    return log_filename


def setup_logging(loglvl="INFO", log_filename=None):
    """
    Log everything to a file under ``logs/`` and ``loglvl`` and above to the console. Worker
    processes log through the parent's handlers.
    """
    if log_filename is None:
        log_filename = log_filenamef()

    multiprocessing_logging.install_mp_handler()

    dirname = os.path.dirname(log_filename)
    if dirname and not os.path.isdir(dirname):
        os.makedirs(dirname)
    logging.basicConfig(level=logging.DEBUG,
                        format='%(levelname)5s:%(name)12s:%(asctime)s: %(message)s',
                        datefmt='%Y/%m/%d %H:%M:%S %Z',
                        filename=log_filename)

    console = logging.StreamHandler()
    console.setLevel(getattr(logging, loglvl.upper()))
    console.setFormatter(logging.Formatter('%(name)s: %(message)s',))
    logging.getLogger('').addHandler(console)


class ArgumentParser(argparse.ArgumentParser):
    """
    Argument parser raising :class:`UsageError` instead of exiting.
    """

    def error(self, message):
        raise UsageError("%s\n%s: error: %s" % (self.format_usage().rstrip(), self.prog, message))


# explicit generate flags and the parameter they set
_FLAG_PARAMS = (
    ("type", "type"),
    ("outputs_dir", "outputs_dir"),
    ("towns", "towns"),
    ("weather_conditions", "weather_conditions"),
    ("videos_per_weather", "videos_per_weather"),
    ("dataset_mode", "dataset_mode"),
    ("crossing_ratio", "crossing_ratio"),
    ("sudden_crossing_ratio", "sudden_crossing_ratio"),
    ("jaywalking_ratio", "jaywalking_ratio"),
    ("enable_lidar", "sensor/lidar"),
    ("enable_dvs", "sensor/dvs"),
    ("enable_emergency", "sensor/emergency"),
    ("seed", "seed"),
    ("workers", "workers"),
)


def _add_logging_args(parser):
    parser.add_argument('--loglvl', type=str, help="Logging level (one of DEBUG, WARN, INFO)", default="INFO")
    parser.add_argument('--log-filename', dest="log_filename", type=str, help="Logfile filename", default=None)


def build_parser():
    parser = ArgumentParser(prog="scenarios",
                            description="Deterministic pedestrian crossing scenario generator.",
                            formatter_class=argparse.RawDescriptionHelpFormatter)
    commands = parser.add_subparsers(dest="command", metavar="{generate,stats,verify,describe}")

    gen = commands.add_parser("generate", help="generate a batch of annotated clips")
    gen.add_argument('--type', type=str, default=None, help="scenario type")
    gen.add_argument('--outputs_dir', type=str, default=None, help="directory receiving the clips")
    gen.add_argument('--towns', type=str, nargs="+", default=None, help="road templates, used round-robin")
    gen.add_argument('--weather_conditions', type=str, nargs="+", default=None,
                     help="weather condition names or 'all'")
    gen.add_argument('--videos_per_weather', type=int, default=None, help="clips per weather condition")
    gen.add_argument('--dataset_mode', action='store_true', default=None, help="batch across all weather conditions")
    gen.add_argument('--crossing_ratio', type=float, default=None, help="target crossing ratio in [0.40, 0.75]")
    gen.add_argument('--sudden_crossing_ratio', type=float, default=None, help="share of sudden crossers")
    gen.add_argument('--jaywalking_ratio', type=float, default=None, help="share of jaywalkers")
    gen.add_argument('--enable_lidar', action='store_true', default=None, help="record LiDAR as enabled")
    gen.add_argument('--enable_dvs', action='store_true', default=None, help="record DVS as enabled")
    gen.add_argument('--enable_emergency', action='store_true', default=None, help="record emergency vehicles")
    gen.add_argument('-S', '--seed', type=int, default=None, help="randomness seed")
    gen.add_argument('-w', '--workers', type=int, default=None, help="number of parallel clip workers")
    gen.add_argument('--port', type=int, default=None, help="accepted for compatibility, ignored")
    gen.add_argument('--tm_port', type=int, default=None, help="accepted for compatibility, ignored")
    gen.add_argument('--host', type=str, default=None, help="accepted for compatibility, ignored")
    gen.add_argument('--dry-run', dest="dry_run", action='store_true',
                     help="Show parameters that would be used but don't generate anything.")
    gen.add_argument('--show-defaults', dest="show_defaults", action='store_true',
                     help="Show default parameters and exit.")
    _add_logging_args(gen)

    stats = commands.add_parser("stats", help="dataset statistics of a generated batch")
    stats.add_argument('clip_dir', type=str, help="batch directory")
    stats.add_argument('--json', dest="json_only", action='store_true', help="print the JSON document only")

    verify = commands.add_parser("verify", help="compare the measured crossing ratio to a target")
    verify.add_argument('clip_dir', type=str, help="batch directory")
    verify.add_argument('--target', type=float, required=True, help="target crossing ratio")
    verify.add_argument('--tolerance', type=float, default=0.08, help="accepted deviation from the target")

    commands.add_parser("describe", help="dump archetypes, behaviour graph, weather and templates")
    return parser


def parse_cli(argv=None):
    """
    Parse a command line.

    Besides the explicit flags, ``generate`` accepts ``--key value`` for every generation parameter,
    e.g. ``--crossing/group_probability 0``.

    :param argv: arguments without the program name, ``sys.argv[1:]`` by default
    :returns: ``(args, params)`` where ``params`` is the resolved :class:`GenerationParams` of a
        ``generate`` command and ``None`` otherwise

    """
    if argv is None:
        argv = sys.argv[1:]
    argv = apply_aliases(list(argv))
    if argv and argv[0] == "scenarios":
        argv = argv[1:]

    parser = build_parser()
    args, unknown = parser.parse_known_args(argv)

    if args.command is None:
        parser.error("a command is required")

    if args.command != "generate":
        if unknown:
            parser.error("unrecognized arguments: %s" % " ".join(unknown))
        return args, None

    params = GenerationParams()
    if args.show_defaults:
        return args, params

    for flag, key in _FLAG_PARAMS:
        value = getattr(args, flag)
        if value is not None:
            params[key] = value

    for k, v in parse_free_params(unknown).items():
        params[k] = v

    if params["outputs_dir"] is None:
        parser.error("--outputs_dir is required")

    return args, params.resolved()
