"""Certificate documents: stable, versioned JSON with a digest of the inputs.

Every document carries ``format``, ``version`` and ``input_digest`` (SHA-256 of
the canonical JSON of the resolved configuration).  Keys are sorted and floats
use ``repr`` round-tripping, so identical jobs produce identical bytes.
"""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Any

FORMAT = "zerocert-certificate"
VERSION = 1
OUTDIR_ENV = "ZEROCERT_OUTDIR"


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def input_digest(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def make_document(kind: str, config: dict, result: dict, verdict: str) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "config": config,
        "input_digest": input_digest(config),
        "verdict": verdict,
        "result": result,
    }


def dump_document(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_document(text: str) -> dict:
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise ValueError("not a zerocert certificate")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported certificate version {doc.get('version')!r}")
    if input_digest(doc["config"]) != doc["input_digest"]:
        raise ValueError("input digest does not match the embedded configuration")
    return doc


def resolve_output(path: str | None) -> Path | None:
    """Relative output paths are placed under ``$ZEROCERT_OUTDIR`` when it is set."""
    if path is None:
        return None
    p = Path(path)
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir and not p.is_absolute():
        p = Path(outdir) / p
    return p


def write_document(doc: dict, path: str | Path | None) -> str:
    text = dump_document(doc)
    if path is not None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    return text
