import json

import numpy as np
import pytest

from mnsdp import (
    FormatError,
    ParameterError,
    constraint_count,
    generate_instance,
    load_instance,
    save_instance,
)
from mnsdp.instance import instance_from_dict, instance_to_dict


def test_generated_shape_and_ranges():
    inst = generate_instance(10, 1.5, 7)
    assert inst.n == 10 and inst.num_pairs == 45
    assert np.all((inst.xy >= 0) & (inst.xy <= 10))
    assert np.all((inst.generation >= 10) & (inst.generation <= 100))
    assert np.array_equal(inst.load, inst.generation / 1.5)
    assert np.all(inst.generation - inst.load > 0)
    assert set(inst.k_class.tolist()) <= {1, 2, 3}
    assert [nd.id for nd in inst.nodes] == list(range(10))


def test_distance_matrix():
    inst = generate_instance(12, 1.4, 3)
    d = inst.distance
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    i, j = 2, 9
    dx, dy = inst.xy[i] - inst.xy[j]
    assert d[i, j] == np.sqrt(dx * dx + dy * dy)
    with pytest.raises(ValueError):
        d[0, 1] = 1.0


def test_composition_and_reference_count():
    inst = generate_instance(100, 1.3, 1, composition=(30, 30, 40))
    assert inst.composition() == (30, 30, 40)
    assert constraint_count(inst) == 403030


def test_determinism_and_seed_sensitivity(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_instance(generate_instance(10, 1.5, 7), a)
    save_instance(generate_instance(10, 1.5, 7), b)
    assert a.read_bytes() == b.read_bytes()
    assert generate_instance(10, 1.5, 7) != generate_instance(10, 1.5, 8)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=2, ratio=1.5, seed=0),
        dict(n=10, ratio=1.0, seed=0),
        dict(n=10, ratio=0.5, seed=0),
        dict(n=10, ratio=1.5, seed=-1),
        dict(n=10, ratio=1.5, seed=0, composition=(3, 3, 3)),
        dict(n=10, ratio=1.5, seed=0, composition=(11, -1, 0)),
    ],
)
def test_generator_rejects_bad_parameters(kwargs):
    with pytest.raises(ParameterError):
        generate_instance(**kwargs)


def test_round_trip(tmp_path):
    inst = generate_instance(10, 1.5, 7)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert back == inst
    assert np.array_equal(back.distance, inst.distance)
    data = json.loads(path.read_text())
    assert data["schema"] == "mnsdp-instance/1"
    assert "distance" not in data


def test_rejects_bad_class():
    data = instance_to_dict(generate_instance(5, 1.5, 0))
    data["nodes"][2]["k"] = 4
    with pytest.raises(FormatError, match=r"nodes\[2\]\.k"):
        instance_from_dict(data)


def test_rejects_missing_ratio():
    data = instance_to_dict(generate_instance(5, 1.5, 0))
    del data["ratio"]
    with pytest.raises(FormatError, match="ratio"):
        instance_from_dict(data)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(schema="mnsdp-instance/2"),
        lambda d: d["nodes"][0].update(x=float("nan")),
        lambda d: d["nodes"][1].update(id=5),
        lambda d: d["nodes"][0].update(load=-1.0),
        lambda d: d.update(n=7),
        lambda d: d["nodes"][0].pop("generation"),
    ],
)
def test_rejects_malformed(mutate):
    data = instance_to_dict(generate_instance(5, 1.5, 0))
    mutate(data)
    with pytest.raises(FormatError):
        instance_from_dict(data)


def test_load_errors(tmp_path):
    with pytest.raises(FormatError):
        load_instance(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(FormatError):
        load_instance(bad)
