import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclomon import InstanceError, load_instance, write_report
from cyclomon.generators import random_instance
from cyclomon.serialize import (dump_instance, instance_hash, make_report, read_report,
                                tolerances_from_env)

MINIMAL = {"dimension": 1, "graph": [[[0], [0]], [[1], [1]]], "n": 2, "B": [[1]], "w_star": [0]}


def doc(**changes):
    data = dict(MINIMAL)
    data.update(changes)
    return json.dumps(data)


def test_minimal_instance():
    inst = load_instance(doc())
    assert inst.dimension == 1 and inst.n == 2 and inst.graph.size == 2
    np.testing.assert_array_equal(inst.B.matrix, [[1.0]])
    assert inst.tolerances.feas_tol == 1e-7
    assert inst.warnings == ()


def test_stream_input():
    assert load_instance(io.StringIO(doc())) == load_instance(doc())


def test_b_dimension_mismatch():
    with pytest.raises(InstanceError, match="dimension mismatch") as info:
        load_instance(doc(B=[[1, 0], [0, 1]]))
    assert info.value.field.startswith("B")


@pytest.mark.parametrize("changes, field", [
    ({"graph": [[[0], [0, 1]]]}, "graph[0][1]"),
    ({"w_star": [0, 1]}, "w_star"),
    ({"n": 1}, "n"),
    ({"dimension": 0}, "dimension"),
    ({"extra": 1}, "extra"),
    ({"tolerances": {"feas_tol": -1}}, "tolerances"),
    ({"tolerances": {"bogus": 1}}, "tolerances.bogus"),
    ({"graph": [[[0], ["a"]]]}, "graph[0][1][0]"),
])
def test_schema_errors_name_the_field(changes, field):
    with pytest.raises(InstanceError) as info:
        load_instance(doc(**changes))
    assert info.value.field == field


@pytest.mark.parametrize("token", ["NaN", "Infinity", "-Infinity"])
def test_non_finite_numbers_rejected(token):
    text = doc().replace('"w_star": [0]', f'"w_star": [{token}]')
    with pytest.raises(InstanceError):
        load_instance(text)


def test_missing_field():
    with pytest.raises(InstanceError) as info:
        load_instance(json.dumps({"dimension": 1, "n": 2}))
    assert info.value.field == "graph"


def test_optional_fields_default():
    inst = load_instance(json.dumps({"dimension": 2, "graph": [[[0, 0], [1, 1]]], "n": 3}))
    np.testing.assert_array_equal(inst.B.matrix, np.zeros((2, 2)))
    np.testing.assert_array_equal(inst.w_star, [0, 0])


def test_duplicates_flagged():
    inst = load_instance(doc(graph=[[[0], [0]], [[1], [1]], [[0], [0]]]))
    assert inst.graph.size == 2
    assert len(inst.warnings) == 1


def test_tolerance_environment():
    env = {"CYCLOMON_TOLERANCES": '{"feas_tol": 1e-5, "max_iter": 20}'}
    tol = tolerances_from_env(env)
    assert tol.feas_tol == 1e-5 and tol.max_iter == 20 and tol.num_tol == 1e-9
    inst = load_instance(doc(tolerances={"opt_tol": 1e-6}), tol)
    assert (inst.tolerances.feas_tol, inst.tolerances.opt_tol) == (1e-5, 1e-6)
    with pytest.raises(InstanceError):
        tolerances_from_env({"CYCLOMON_TOLERANCES": "{not json"})


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(1, 3), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_instance_round_trip(m, d, n, seed):
    inst = random_instance(np.random.default_rng(seed), m, d, n)
    back = load_instance(dump_instance(inst))
    assert back == inst
    assert instance_hash(back) == instance_hash(inst)


def test_report_round_trip_with_infinity():
    inst = load_instance(doc())
    rep = make_report("conj", inst, "infinite", None, {"value": math.inf, "x": np.array([0.5])})
    text = write_report(rep)
    assert '"+inf"' in text
    back = read_report(text)
    assert back["values"]["value"] == math.inf
    assert back["values"]["x"] == [0.5]
    assert back["instance_hash"] == instance_hash(inst)
    assert {"command", "verdict", "witness", "values", "iterations", "warnings",
            "tool_version", "seed", "tolerances"} <= set(back)
