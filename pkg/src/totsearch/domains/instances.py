"""Problem-instance documents (JSON).

Blocksworld::

    {"domain": "blocksworld", "id": "...", "init": ["On(A,B)", ...],
     "goal": ["On(C,B)"], "prompt": "optional z0 override"}

Game of 24::

    {"domain": "game24", "id": "...", "numbers": [4, 9, 10, 13], "target": 24}
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Union

import jsonschema

from ..errors import InstanceFormatError
from .base import Domain
from .blocksworld import BlocksConfig, BlocksDomain
from .game24 import Game24Domain

_FACT = r"^\s*(On|Clear)\(\s*[A-Za-z][A-Za-z0-9]*\s*(,\s*[A-Za-z][A-Za-z0-9]*\s*)?\)\s*$"

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "domain": {"const": "blocksworld"},
                "id": {"type": "string", "minLength": 1},
                "init": {"type": "array", "minItems": 1, "items": {"type": "string", "pattern": _FACT}},
                "goal": {"type": "array", "items": {"type": "string", "pattern": _FACT}},
                "prompt": {"type": "string", "minLength": 1},
            },
            "required": ["domain", "id", "init", "goal"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "domain": {"const": "game24"},
                "id": {"type": "string", "minLength": 1},
                "numbers": {"type": "array", "minItems": 1, "maxItems": 6,
                            "items": {"type": ["integer", "string"]}},
                "target": {"type": ["integer", "string"]},
                "prompt": {"type": "string", "minLength": 1},
            },
            "required": ["domain", "id", "numbers"],
            "additionalProperties": False,
        },
    ],
}


def domain_from_dict(doc: dict) -> Domain:
    try:
        jsonschema.validate(doc, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InstanceFormatError(f"invalid instance: {exc.message}") from None
    try:
        if doc["domain"] == "blocksworld":
            init = BlocksConfig.from_facts(doc["init"])
            return BlocksDomain(init, doc["goal"], instance_id=doc["id"], prompt=doc.get("prompt"))
        return Game24Domain(doc["numbers"], doc.get("target", 24), instance_id=doc["id"],
                            prompt=doc.get("prompt"))
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceFormatError(f"invalid instance {doc.get('id')!r}: {exc}") from None


def domain_to_dict(domain: Domain) -> dict:
    if isinstance(domain, BlocksDomain):
        d = {"domain": "blocksworld", "id": domain.instance_id,
             "init": sorted(domain.init.facts), "goal": sorted(domain.goal)}
    elif isinstance(domain, Game24Domain):
        from .game24 import fmt
        d = {"domain": "game24", "id": domain.instance_id,
             "numbers": [int(x) if x.denominator == 1 else fmt(x) for x in domain.numbers],
             "target": int(domain.target) if domain.target.denominator == 1 else fmt(domain.target)}
    else:
        raise TypeError(f"cannot serialise {type(domain).__name__}")
    if domain.custom_prompt is not None:
        d["prompt"] = domain.custom_prompt
    return d


def load_instance(path: Union[str, Path]) -> Domain:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceFormatError(f"cannot read instance {path}: {exc}") from None
    return domain_from_dict(doc)


def bundled_instance(name: str) -> Domain:
    """Load one of the instances shipped in ``totsearch/data/instances``."""
    ref = resources.files("totsearch") / "data" / "instances" / f"{name}.json"
    return domain_from_dict(json.loads(ref.read_text()))
