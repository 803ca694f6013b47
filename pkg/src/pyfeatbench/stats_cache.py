"""On-disk cache of per-pair match statistics.

Classes:
    PairStatsCache: Mapping of pair keys to `CachedPair` records backed by a
        JSON-lines file. Inherits from `MutableMapping`.

The file is append-only: every assignment writes one line, and when a key
appears on several lines the last one wins. Deleting a key appends nothing,
it only forgets the entry in memory until `compact` rewrites the file.

A key identifies the query image, the template image, the combination and the
result-relevant configuration, see `pair_key`.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, MutableMapping
from pathlib import Path

import orjson
from mashumaro.exceptions import InvalidFieldValue, MissingField

from pyfeatbench.const import CACHE_FILE
from pyfeatbench.models.bench_models import CachedPair, CombinationId

logger = logging.getLogger(__name__)


def pair_key(
    query_digest: str, template_digest: str, combination: CombinationId, config_hash: str
) -> str:
    """Cache key of an image pair under a combination and configuration."""
    return f'{query_digest}:{template_digest}:{combination.name}:{config_hash}'


class PairStatsCache(MutableMapping[str, CachedPair]):
    """Append-only JSON-lines cache of pair statistics.

    Args:
        directory (str | Path): Directory holding the cache file, created on
            the first write.

    Attributes:
        path (Path): Cache file.
    """

    __slots__ = ('_data', 'path')

    def __init__(self, directory: str | Path) -> None:
        """Load the existing entries of a cache directory."""
        self.path = Path(directory) / CACHE_FILE
        self._data: dict[str, CachedPair] = {}
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        skipped = 0
        with self.path.open('rb') as handle:
            for line in handle:
                if not line.strip():
                    continue
                try:
                    entry = CachedPair.from_dict(orjson.loads(line))
                except (orjson.JSONDecodeError, MissingField, InvalidFieldValue):
                    skipped += 1
                    continue
                self._data[entry.key] = entry
        if skipped:
            logger.warning('Skipped %d malformed lines of %s', skipped, self.path)
        logger.debug('Loaded %d cached pairs from %s', len(self._data), self.path)

    def __getitem__(self, key: str) -> CachedPair:
        """Cached entry of a key."""
        return self._data[key]

    def __setitem__(self, key: str, value: CachedPair) -> None:
        """Store an entry and append it to the file."""
        if value.key != key:
            value = CachedPair(key, value.stats, value.matched, value.pair_time)
        self._data[key] = value
        self._append([value])

    def __delitem__(self, key: str) -> None:
        """Forget an entry in memory."""
        del self._data[key]

    def __iter__(self) -> Iterator[str]:
        """Iterate over keys."""
        return iter(self._data)

    def __len__(self) -> int:
        """Return the number of entries."""
        return len(self._data)

    def store(self, entries: list[CachedPair]) -> None:
        """Store several entries with a single append."""
        if not entries:
            return
        for entry in entries:
            self._data[entry.key] = entry
        self._append(entries)

    def compact(self) -> None:
        """Rewrite the file with one line per live entry."""
        self.path.parent.mkdir(parents=True, exist_ok=True)
        lines = [self._line(entry) for entry in self._data.values()]
        self.path.write_bytes(b''.join(lines))

    @staticmethod
    def _line(entry: CachedPair) -> bytes:
        return orjson.dumps(entry.to_dict()) + b'\n'

    def _append(self, entries: list[CachedPair]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open('ab') as handle:
            handle.write(b''.join(self._line(entry) for entry in entries))
