"""Model/evidence JSON parsing and canonical serialization."""

import json

import pytest

from qmtree import ParseError
from qmtree.fixtures import fixture_path
from qmtree.modelio import (
    canonical_dumps,
    dump_model,
    load_evidence,
    load_model,
    mass_from_json,
    mass_to_json,
    parse_model,
)


@pytest.fixture
def chain_doc():
    return json.loads(fixture_path("chain3").read_text())


def test_fixture_loads(chain_doc):
    model = parse_model(chain_doc)
    assert model.frame.size == 8
    assert sorted(model.partitions) == ["X", "Y", "Z"]
    assert len(model.evidence) == 2


def test_round_trip_is_byte_identical(chain_doc):
    model = parse_model(chain_doc)
    once = dump_model(model)
    again = dump_model(parse_model(json.loads(once)))
    assert once == again


def test_missing_schema_version(chain_doc):
    del chain_doc["schema_version"]
    with pytest.raises(ParseError):
        parse_model(chain_doc)


def test_unknown_schema_version(chain_doc):
    chain_doc["schema_version"] = 99
    with pytest.raises(ParseError):
        parse_model(chain_doc)


def test_bad_partition_reported(chain_doc):
    chain_doc["nodes"]["X"] = [["000"]]
    with pytest.raises(ParseError, match="node 'X'"):
        parse_model(chain_doc)


def test_evidence_must_use_real_blocks(chain_doc):
    chain_doc["evidence"][0]["mass"][0]["blocks"] = [["000", "001"]]
    with pytest.raises(ParseError, match="not a block"):
        parse_model(chain_doc)


def test_evidence_masses_must_normalize(chain_doc):
    chain_doc["evidence"][0]["mass"][0]["mass"] = 0.5
    with pytest.raises(ParseError):
        parse_model(chain_doc)


def test_standalone_evidence_file(tmp_path, chain_doc):
    model = parse_model(chain_doc)
    single = chain_doc["evidence"][0]
    path = tmp_path / "ev.json"
    path.write_text(json.dumps(single))
    assert len(load_evidence(model, path)) == 1
    path.write_text(json.dumps([single, chain_doc["evidence"][1]]))
    assert len(load_evidence(model, path)) == 2


def test_mass_function_json_round_trip(chain_doc):
    model = parse_model(chain_doc)
    node, mass = model.evidence[0]
    from qmtree import vacuous_extend

    extended = vacuous_extend(mass, model.partitions[node])
    doc = mass_to_json(extended)
    back = mass_from_json(model.frame, doc)
    assert back == extended


def test_mass_json_validates(chain_doc):
    model = parse_model(chain_doc)
    with pytest.raises(ParseError):
        mass_from_json(model.frame, [{"subset": ["000"], "mass": 0.5}])


def test_canonical_dumps_rounds_floats():
    out = canonical_dumps({"x": 0.30000000000000004})
    assert json.loads(out)["x"] == 0.3


def test_all_fixtures_parse():
    for name in ("chain3", "star_diagnostic", "bad_markov"):
        model = load_model(fixture_path(name))
        assert model.partitions
