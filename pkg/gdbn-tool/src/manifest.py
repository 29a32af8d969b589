import json
import os
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import attr
from jsonschema import Draft201909Validator, ValidationError
from referencing import Registry, Resource

from src.constants import FORMAT_VERSION, TOOL_VERSION, OutputFiles
from src.exc import ValidationException
from src.io import read_json, sha256_digest, write_json
from src.utils import bold

RUN_CONFIG_SCHEMA = "run_config.json"
RUN_MANIFEST_SCHEMA = "run_manifest.json"


def get_schema_directory() -> Path:
    return Path(__file__).parent.parent.parent / "common" / "schemas"


def _validator(schema_name: str) -> Draft201909Validator:
    schema_directory = get_schema_directory()
    registry = Registry[str]().with_resources(
        [
            (name, Resource.from_contents(json.loads((schema_directory / name).read_text())))
            for name in [RUN_CONFIG_SCHEMA, RUN_MANIFEST_SCHEMA]
        ]
    )
    return Draft201909Validator(
        {"$schema": "https://json-schema.org/draft/2019-09/schema", "$ref": schema_name},
        registry=registry,  # type: ignore  # apparently this is an unexpected keyword argument
    )


def validate_document(document: dict[str, Any], schema_name: str, source: str) -> None:
    try:
        _validator(schema_name).validate(document)
    except ValidationError as e:
        location = "/".join(str(part) for part in e.absolute_path) or "<root>"
        raise ValidationException(f"{bold(source)} is invalid at {bold(location)}: {e.message}") from None


def load_config(file_path: str) -> dict[str, Any]:
    """
    Read a `--config` file. Keys mirror the long option names with dashes replaced by underscores.
    """

    config = read_json(file_path)
    validate_document(config, RUN_CONFIG_SCHEMA, file_path)
    return config


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@attr.s
class RunManifest:
    """
    Provenance of one CLI invocation. Timestamps and durations live only here, so result files stay byte-identical
    across reruns.
    """

    subcommand: str = attr.ib()
    config: dict[str, Any] = attr.ib()
    seed: int = attr.ib()
    tool_version: str = attr.ib(default=TOOL_VERSION)
    inputs: dict[str, str] = attr.ib(factory=dict)
    outputs: list[str] = attr.ib(factory=list)
    started_at: str = attr.ib(factory=_timestamp)
    finished_at: Optional[str] = attr.ib(default=None)
    duration_ms: Optional[float] = attr.ib(default=None)
    t0: float = attr.ib(factory=time.perf_counter, repr=False)

    def add_input(self, file_path: str) -> None:
        self.inputs[os.path.basename(file_path)] = sha256_digest(file_path)

    def add_output(self, file_path: str) -> None:
        self.outputs.append(os.path.basename(file_path))

    def finish(self) -> None:
        self.finished_at = _timestamp()
        self.duration_ms = (time.perf_counter() - self.t0) * 1000

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "subcommand": self.subcommand,
            "config": self.config,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": sorted(self.outputs),
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "duration_ms": self.duration_ms,
        }

    def write(self, directory: str) -> str:
        if self.finished_at is None:
            self.finish()
        document = self.to_dict()
        validate_document(document, RUN_MANIFEST_SCHEMA, "run manifest")
        file_path = os.path.join(directory, OutputFiles.manifest.value)
        write_json(file_path, document)
        return file_path
