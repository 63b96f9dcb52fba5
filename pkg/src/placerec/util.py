"""Small shared helpers: seed derivation, atomic file writes, digests."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from contextlib import contextmanager


def subseed(seed: int, stage: str) -> int:
    """Derive a named sub-seed from a master seed.

    Derivation is ``(seed + stable 32-bit hash of the stage name) mod 2**32``
    so every pipeline stage gets an independent, reproducible stream from a
    single user-facing seed.
    """
    digest = hashlib.sha256(stage.encode("utf-8")).digest()
    return (int(seed) + int.from_bytes(digest[:4], "little")) % (2**32)


def config_digest(config: dict) -> str:
    """Short stable digest of a configuration mapping."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def file_digest(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:12]


@contextmanager
def atomic_write(path: str | os.PathLike, mode: str = "w"):
    """Write to a temp file and rename on success.

    Guarantees no partial output file exists if the writer raises.
    """
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
