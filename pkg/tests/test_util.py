# -*- coding: utf-8 -*-

import json
from collections import OrderedDict

import numpy as np
import pytest

from pedcross.utils.util import RngStream, digest, dumps


def test_streams_are_reproducible():
    a = RngStream(42).child(3, 7).generator("fsm", 2).random(5)
    b = RngStream(42).child(3, 7).generator("fsm", 2).random(5)
    assert np.array_equal(a, b)


def test_streams_are_distinct():
    root = RngStream(42)
    draws = [root.child(*path).generator().random() for path in [(0, 0), (0, 1), (1, 0), ("traffic",), ("roles",)]]
    assert len(set(draws)) == len(draws)
    assert RngStream(42).seed64() != RngStream(43).seed64()


def test_stream_keys():
    with pytest.raises(ValueError):
        RngStream(1).child(-1)
    with pytest.raises(TypeError):
        RngStream(1).child(True)


def test_canonical_json():
    assert dumps({"a": -0.0}) == '{"a": 0.0}'
    assert dumps({"a": 1.23456789}) == '{"a": 1.234568}'
    assert dumps(OrderedDict([("b", 1), ("a", 2)])) == '{"b": 1, "a": 2}'
    assert json.loads(dumps({"x": np.array([1.0, 2.0])})) == {"x": [1.0, 2.0]}
    with pytest.raises(ValueError):
        dumps({"a": float("nan")})


def test_digest():
    assert digest({"a": 1}) == digest(OrderedDict([("a", 1)]))
    assert digest({"a": 1}) != digest({"a": 2})
    assert len(digest({})) == 16
