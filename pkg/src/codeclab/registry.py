"""Codec construction from textual ids, as used by configs and the CLI.

Ids: "nested-scalar", "midpoint-scalar", "block-dct", "external".
Options (all optional): levels (scalar ladders), native_qualities
(block-dct), spec / spec_path (external).
An id of the form "name:arg" is shorthand for the obvious option
(ladder size for the scalar codecs, spec path for external).
"""
from __future__ import annotations

from .codecs import Codec, midpoint_scalar_codec, nested_scalar_codec
from .blockdct import BlockDctCodec, DEFAULT_NATIVE_QUALITIES
from .external import ExternalCodec, ExternalCodecSpec


def make_codec(codec_id: str, options: dict | None = None) -> Codec:
    options = dict(options or {})
    name, _, arg = codec_id.partition(":")
    if name in ("nested-scalar", "midpoint-scalar"):
        levels = int(arg) if arg else int(options.pop("levels", 3))
        _reject_unknown(name, options, {"source_n"})
        builder = nested_scalar_codec if name == "nested-scalar" else midpoint_scalar_codec
        return builder(levels)
    if name == "block-dct":
        native = options.pop("native_qualities", DEFAULT_NATIVE_QUALITIES)
        _reject_unknown(name, options, set())
        return BlockDctCodec(native)
    if name == "external":
        if arg:
            spec = ExternalCodecSpec.from_file(arg)
        elif "spec_path" in options:
            spec = ExternalCodecSpec.from_file(options.pop("spec_path"))
        elif "spec" in options:
            import json

            spec = ExternalCodecSpec.from_json(json.dumps(options.pop("spec")))
        else:
            raise ValueError("external codec needs a spec (external:PATH or spec_path)")
        _reject_unknown(name, options, set())
        return ExternalCodec(spec)
    raise ValueError(f"unknown codec id {codec_id!r}")


def _reject_unknown(name: str, options: dict, tolerated: set[str]) -> None:
    unknown = set(options) - tolerated
    if unknown:
        raise ValueError(f"unknown options for codec {name!r}: {sorted(unknown)}")
