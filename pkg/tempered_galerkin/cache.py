"""On-disk cache of assembled Toeplitz first rows."""

import logging
from pathlib import Path

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, ValidationError

from .models.operator import BasisSpec, OperatorParams

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

CACHE_FORMAT = 1


class CacheEntry(BaseModel):
    """JSON sidecar describing a cached first row."""

    format: int = Field(default=CACHE_FORMAT, description="Layout version of the cache files")

    r: int = Field(description="B-spline order")

    n: int = Field(description="Refinement level")

    beta: float = Field(description="Operator order")

    lam: float = Field(description="Tempering rate")

    length: int = Field(description="Number of stored entries")

    dtype: str = Field(default="<f8", description="Array element type (little-endian float64)")


class FirstRowCache:
    """First rows keyed by (r, n, beta, lambda); a pure accelerator.

    Rows are stored as little-endian float64 `.npy` files next to a JSON
    sidecar. Unreadable or mismatched entries are treated as misses.
    """

    def __init__(self, cache_dir: Path):
        """Initialize FirstRowCache.

        Args:
            cache_dir: Directory holding the cache files; created on first store
        """
        self.cache_dir = cache_dir

    def _stem(self, params: OperatorParams, spec: BasisSpec) -> Path:
        name = f"row_r{spec.r}_n{spec.n}_b{params.beta!r}_l{params.lam!r}"
        return self.cache_dir / name.replace(".", "p")

    def _entry(self, params: OperatorParams, spec: BasisSpec) -> CacheEntry:
        return CacheEntry(
            r=spec.r, n=spec.n, beta=params.beta, lam=params.lam, length=spec.dimension
        )

    def load(self, params: OperatorParams, spec: BasisSpec) -> FloatArray | None:
        """Return the cached first row, or None on a miss."""
        stem = self._stem(params, spec)
        sidecar = stem.with_suffix(".json")
        data_file = stem.with_suffix(".npy")
        if not sidecar.exists() or not data_file.exists():
            return None

        try:
            stored = CacheEntry.model_validate_json(sidecar.read_text())
            row = np.load(data_file, allow_pickle=False)
        except (OSError, ValueError, ValidationError) as e:
            logger.warning(f"Ignoring unreadable cache entry {stem.name}: {e}")
            return None

        if stored != self._entry(params, spec) or row.shape != (spec.dimension,):
            logger.warning(f"Ignoring mismatched cache entry {stem.name}")
            return None

        logger.debug(f"Cache hit for {stem.name}")
        return np.asarray(row, dtype=np.float64)

    def store(self, params: OperatorParams, spec: BasisSpec, row: FloatArray) -> None:
        """Write a first row and its sidecar."""
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        stem = self._stem(params, spec)
        np.save(stem.with_suffix(".npy"), np.asarray(row, dtype="<f8"), allow_pickle=False)
        stem.with_suffix(".json").write_text(self._entry(params, spec).model_dump_json(indent=2))
        logger.debug(f"Cached first row {stem.name}")
