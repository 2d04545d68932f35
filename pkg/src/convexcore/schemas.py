"""Access to the JSON schemas shipped with the package."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema

SCHEMA_NAMES = ("run_config", "group", "domain", "form", "gallery_emit", "gallery_list", "diagnose", "dual", "signature", "negativity")


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("convexcore").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def _registry():
    from referencing import Registry, Resource

    return Registry().with_resources(
        (f"{n}.json", Resource.from_contents(load_schema(n))) for n in SCHEMA_NAMES
    )


def validate(instance: dict, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` when ``instance`` does not match."""
    schema = load_schema(name)
    cls = jsonschema.validators.validator_for(schema)
    cls(schema, registry=_registry()).validate(instance)
