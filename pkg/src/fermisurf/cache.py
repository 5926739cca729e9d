"""Content-addressed on-disk result cache.

Keys are SHA-256 hashes of (solver id, cache version, canonical JSON of the
numeric inputs). Each entry is a JSON sidecar of scalars plus optional
binary field snapshots; writes go through a temp file and atomic rename so
concurrent identical runs leave one valid entry. A payload whose recorded
digest no longer matches is treated as a miss with a warning.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from pathlib import Path

CACHE_VERSION = 1
ENV_VAR = "FERMISURF_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "fermisurf"


def canonical_json(obj) -> str:
    """Deterministic JSON used both for hashing and sidecar storage."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def cache_key(solver_id: str, inputs) -> str:
    payload = canonical_json(
        {"solver": solver_id, "version": CACHE_VERSION, "inputs": inputs}
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


class SolutionCache:
    """Directory-backed cache mapping keys to scalar JSON + binary blobs."""

    def __init__(self, directory: Path | str | None = None):
        self.directory = Path(directory) if directory else default_cache_dir()

    def _paths(self, key: str):
        base = self.directory / key[:2] / key
        return base.with_suffix(".json"), base.with_suffix(".bin")

    def get(self, key: str):
        """Return (scalars, blob or None) on hit, None on miss/corruption."""
        sidecar, blob_path = self._paths(key)
        if not sidecar.exists():
            return None
        try:
            entry = json.loads(sidecar.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            warnings.warn(f"cache entry unreadable, treating as miss: {exc}",
                          RuntimeWarning, stacklevel=2)
            return None
        blob = None
        if entry.get("blob_sha256"):
            try:
                blob = blob_path.read_bytes()
            except OSError as exc:
                warnings.warn(f"cache blob unreadable, treating as miss: {exc}",
                              RuntimeWarning, stacklevel=2)
                return None
            if hashlib.sha256(blob).hexdigest() != entry["blob_sha256"]:
                warnings.warn("cache blob digest mismatch, treating as miss",
                              RuntimeWarning, stacklevel=2)
                return None
        if entry.get("scalars_sha256"):
            digest = hashlib.sha256(
                canonical_json(entry["scalars"]).encode()
            ).hexdigest()
            if digest != entry["scalars_sha256"]:
                warnings.warn("cache scalar digest mismatch, treating as miss",
                              RuntimeWarning, stacklevel=2)
                return None
        return entry["scalars"], blob

    def put(self, key: str, scalars, blob: bytes | None = None) -> None:
        sidecar, blob_path = self._paths(key)
        entry = {
            "version": CACHE_VERSION,
            "scalars": scalars,
            "scalars_sha256": hashlib.sha256(
                canonical_json(scalars).encode()
            ).hexdigest(),
            "blob_sha256": hashlib.sha256(blob).hexdigest() if blob else None,
        }
        if blob is not None:
            _atomic_write(blob_path, blob)
        _atomic_write(sidecar, canonical_json(entry).encode())

    def get_or_solve(self, solver_id: str, inputs, thunk):
        """Cached scalars for (solver_id, inputs), calling thunk on a miss.

        thunk() must return a JSON-serializable scalar dict, or a
        (scalars, blob_bytes) pair.
        """
        key = cache_key(solver_id, inputs)
        hit = self.get(key)
        if hit is not None:
            return hit[0], True
        result = thunk()
        if isinstance(result, tuple):
            scalars, blob = result
        else:
            scalars, blob = result, None
        self.put(key, scalars, blob)
        return scalars, False
