"""Directory-backed write-once object store.

Keys are ``/``-separated relative paths under ``root``. A put writes the
blob to a hidden temporary file in the destination directory, fsyncs it and
hard-links it into place. ``os.link`` fails if the key already exists, so
the existence check and the publish are one atomic step and readers only
ever see complete blobs.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path, PurePosixPath
from typing import List

from ..errors import KeyExistsError

TMP_PREFIX = ".tmp-"


def _normalize(key: str) -> str:
    key = key.replace("\\", "/").lstrip("/")
    parts = PurePosixPath(key).parts
    if not parts or any(p in ("..", ".") for p in parts):
        raise ValueError(f"invalid store key {key!r}")
    if any(p.startswith(TMP_PREFIX) for p in parts):
        raise ValueError(f"keys may not start with {TMP_PREFIX!r}")
    return "/".join(parts)


class ObjectStore:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def __repr__(self):
        return f"ObjectStore({str(self.root)!r})"

    def _path(self, key: str) -> Path:
        return self.root / _normalize(key)

    def put_atomic(self, key: str, data: bytes) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=TMP_PREFIX, dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            try:
                os.link(tmp, path)
            except FileExistsError:
                raise KeyExistsError(f"store key {key!r} already exists (keys are write-once)") from None
        finally:
            os.unlink(tmp)

    def get(self, key: str) -> bytes:
        try:
            return self._path(key).read_bytes()
        except FileNotFoundError:
            raise KeyError(key) from None

    def exists(self, key: str) -> bool:
        return self._path(key).is_file()

    def list(self, prefix: str = "") -> List[str]:
        """Sorted keys starting with ``prefix`` (temporary files excluded)."""
        keys = []
        for path in self.root.rglob("*"):
            if path.is_file() and not path.name.startswith(TMP_PREFIX):
                key = path.relative_to(self.root).as_posix()
                if key.startswith(prefix):
                    keys.append(key)
        return sorted(keys)

    def mtime_ns(self, key: str) -> int:
        return self._path(key).stat().st_mtime_ns
