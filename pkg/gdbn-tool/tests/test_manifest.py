import json
import os

import pytest
from freezegun import freeze_time

from src.constants import FORMAT_VERSION, TOOL_VERSION, OutputFiles
from src.exc import DataFormatException, ValidationException
from src.io import write_text
from src.manifest import (
    RUN_CONFIG_SCHEMA,
    RUN_MANIFEST_SCHEMA,
    RunManifest,
    get_schema_directory,
    load_config,
    validate_document,
)


@pytest.fixture()
def config_file(tmp_path):
    def write(document: object) -> str:
        file_path = os.path.join(tmp_path, "config.json")
        write_text(file_path, json.dumps(document))
        return file_path

    yield write


# region test schemas


def test_schema_directory_holds_both_schemas():
    for name in (RUN_CONFIG_SCHEMA, RUN_MANIFEST_SCHEMA):
        assert (get_schema_directory() / name).is_file()


def test_load_config(config_file):
    document = {"iters": 500, "burn_in": 0.25, "model": "ebge", "x_grid": "0..4", "move_probabilities": {}}
    assert load_config(config_file(document)) == document


@pytest.mark.parametrize(
    "document, location",
    [
        ({"iters": 0}, "iters"),
        ({"burn_in": 1.0}, "burn_in"),
        ({"model": "bge"}, "model"),
        ({"unknown_option": 1}, "<root>"),
        ({"move_probabilities": {"static_flip": 0.5}}, "move_probabilities"),
        ({"block": []}, "block"),
    ],
    ids=["zero iterations", "burn-in of one", "unknown model", "unknown key", "unknown move", "empty blocks"],
)
def test_load_config_rejects_invalid(config_file, document, location):
    with pytest.raises(ValidationException) as e:
        load_config(config_file(document))
    assert location in str(e.value)


def test_load_config_malformed_json(config_file, tmp_path):
    file_path = os.path.join(tmp_path, "broken.json")
    write_text(file_path, "{\n  \"iters\": \n")
    with pytest.raises(DataFormatException):
        load_config(file_path)


def test_validate_document_names_the_source():
    with pytest.raises(ValidationException) as e:
        validate_document({"seed": "x"}, RUN_CONFIG_SCHEMA, "custom.json")
    assert "custom.json" in str(e.value)


# endregion

# region test manifest


@freeze_time("2024-06-11 12:30:00")
def test_manifest_timestamps(tmp_path):
    manifest = RunManifest(subcommand="learn", config={"iters": 10}, seed=7)
    file_path = os.path.join(tmp_path, "input.csv")
    write_text(file_path, "a\n1\n")
    manifest.add_input(file_path)
    manifest.add_output(os.path.join(tmp_path, OutputFiles.chain.value))
    manifest.add_output(os.path.join(tmp_path, OutputFiles.summary.value))
    written = manifest.write(str(tmp_path))
    assert os.path.basename(written) == OutputFiles.manifest.value
    with open(written, encoding="utf-8") as f:
        document = json.load(f)
    assert document["started_at"] == document["finished_at"] == "2024-06-11T12:30:00+00:00"
    assert document["format_version"] == FORMAT_VERSION
    assert document["tool_version"] == TOOL_VERSION
    assert document["outputs"] == [OutputFiles.chain.value, OutputFiles.summary.value]
    assert list(document["inputs"]) == ["input.csv"]
    assert len(document["inputs"]["input.csv"]) == 64
    assert document["duration_ms"] >= 0


def test_manifest_rejects_unknown_subcommand(tmp_path):
    with pytest.raises(ValidationException):
        RunManifest(subcommand="train", config={}, seed=1).write(str(tmp_path))


# endregion
