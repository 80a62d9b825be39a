# -*- coding: utf-8 -*-
"""
Seeding and canonical serialisation helpers.
"""
import hashlib
import json
import zlib
from collections import OrderedDict
from enum import Enum

import numpy as np

FLOAT_DIGITS = 6


def _spawn_key(key):
    if isinstance(key, (bool, np.bool_)):
        raise TypeError("Boolean stream keys are ambiguous.")
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError("Stream keys must be non-negative, got %d" % key)
        return int(key)
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    raise TypeError("Unsupported stream key %r" % (key,))


class RngStream(object):
    """
    A named node in a tree of independent random streams.

    Every node is identified by a root seed and a path of keys. Integer keys are used as they
    are, string tags through their CRC32, so that the stream drawn for a path never depends on
    which other streams were consumed before::

        >>> a = RngStream(7).child("traffic").generator().random()
        >>> _ = RngStream(7).child("roles").generator().random()
        >>> a == RngStream(7).child("traffic").generator().random()
        True
        >>> RngStream(7).child(0, 1).seed64() == RngStream(7).child(0, 1).seed64()
        True

    """

    def __init__(self, root_seed, path=()):
        self.root_seed = int(root_seed)
        self.path = tuple(path)

    def child(self, *keys):
        return RngStream(self.root_seed, self.path + tuple(_spawn_key(k) for k in keys))

    def seed_sequence(self):
        return np.random.SeedSequence(self.root_seed, spawn_key=self.path)

    def generator(self, *keys):
        """
        A fresh numpy generator for this node, or a child of it when keys are given.
        """
        if keys:
            return self.child(*keys).generator()
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def seed64(self):
        return int(self.seed_sequence().generate_state(1, dtype=np.uint64)[0])

    def __repr__(self):
        return "RngStream(%d, %s)" % (self.root_seed, self.path)


def canonical(obj):
    """
    Convert ``obj`` into plain JSON types with floats rounded to six decimals.

        >>> list(canonical(OrderedDict([("b", np.float64(0.1234567)), ("a", (1, np.int64(2)))])).items())
        [('b', 0.123457), ('a', [1, 2])]

    """
    if isinstance(obj, dict):
        return OrderedDict((str(k), canonical(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [canonical(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.name
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = round(float(obj), FLOAT_DIGITS)
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError("Non-finite value in record.")
        return x + 0.0
    return obj


def dumps(obj, indent=None):
    return json.dumps(canonical(obj), indent=indent)


def digest(obj):
    """
    Short content digest of the canonical serialisation of ``obj``.
    """
    return hashlib.sha256(dumps(obj).encode("utf-8")).hexdigest()[:16]
