"""Integrity-checked archive format for model artifacts.

Archives are plain ``.npz`` files (no pickled objects) holding named float/int
arrays plus a JSON metadata blob and a SHA-256 digest over everything.  The
digest catches bit rot and hand edits; a format version gate catches files
written by incompatible releases.
"""
from __future__ import annotations

import hashlib
import io
import json
from pathlib import Path

import numpy as np

from .errors import CorruptFile, VersionMismatch

FORMAT_VERSION = 1

_META_KEY = "__meta__"
_DIGEST_KEY = "__sha256__"


def _content_digest(meta_json: str, arrays: dict[str, np.ndarray]) -> str:
    h = hashlib.sha256()
    h.update(meta_json.encode("utf-8"))
    for name in sorted(arrays):
        a = np.ascontiguousarray(arrays[name])
        h.update(name.encode("utf-8"))
        h.update(str(a.dtype).encode("utf-8"))
        h.update(str(a.shape).encode("utf-8"))
        h.update(a.tobytes())
    return h.hexdigest()


def _as_bytes_array(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-8"), dtype=np.uint8).copy()


def _from_bytes_array(arr: np.ndarray) -> str:
    return arr.astype(np.uint8).tobytes().decode("utf-8")


def write_archive(path: str | Path, kind: str, meta: dict, arrays: dict[str, np.ndarray]) -> str:
    """Write an archive and return its content digest."""
    full_meta = {"format_version": FORMAT_VERSION, "kind": kind, **meta}
    meta_json = json.dumps(full_meta, sort_keys=True)
    digest = _content_digest(meta_json, arrays)
    payload = dict(arrays)
    payload[_META_KEY] = _as_bytes_array(meta_json)
    payload[_DIGEST_KEY] = _as_bytes_array(digest)
    # np.savez appends ".npz" when given a name, so hand it an open file
    with open(path, "wb") as fh:
        np.savez(fh, **payload)
    return digest


def read_archive(path: str | Path, expect_kind: str) -> tuple[dict, dict[str, np.ndarray]]:
    """Read an archive, verifying version, kind, and content digest."""
    try:
        with np.load(path, allow_pickle=False) as npz:
            names = set(npz.files)
            if _META_KEY not in names or _DIGEST_KEY not in names:
                raise CorruptFile(f"{path}: missing archive metadata")
            meta_json = _from_bytes_array(npz[_META_KEY])
            stored_digest = _from_bytes_array(npz[_DIGEST_KEY])
            arrays = {n: npz[n] for n in names - {_META_KEY, _DIGEST_KEY}}
    except CorruptFile:
        raise
    except Exception as exc:
        raise CorruptFile(f"{path}: unreadable archive ({exc})") from None

    try:
        meta = json.loads(meta_json)
    except json.JSONDecodeError:
        raise CorruptFile(f"{path}: metadata is not valid JSON") from None

    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: format version {version!r}, this build reads {FORMAT_VERSION}"
        )
    if meta.get("kind") != expect_kind:
        raise CorruptFile(f"{path}: archive kind {meta.get('kind')!r}, expected {expect_kind!r}")
    if _content_digest(meta_json, arrays) != stored_digest:
        raise CorruptFile(f"{path}: content digest mismatch")
    return meta, arrays


def digest_of(arrays: dict[str, np.ndarray], extra: str = "") -> str:
    """Standalone digest over arrays plus an optional tag, for hash chaining."""
    return _content_digest(extra, arrays)
