"""Design matrices from named panel columns."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import DataError, ModelError

INTERCEPT = "(Intercept)"


@dataclass(frozen=True)
class FeatureSpec:
    bases: tuple[str, ...]
    interactions: tuple[tuple[str, str], ...] = ()
    intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "bases", tuple(self.bases))
        object.__setattr__(self, "interactions", tuple(tuple(p) for p in self.interactions))
        names = self.term_names()
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ModelError(f"duplicate term names: {', '.join(dupes)}")

    def term_names(self) -> list[str]:
        names = [INTERCEPT] if self.intercept else []
        names += list(self.bases)
        names += [f"{a}:{b}" for a, b in self.interactions]
        return names

    def referenced(self) -> list[str]:
        seen: dict[str, None] = dict.fromkeys(self.bases)
        for a, b in self.interactions:
            seen.setdefault(a)
            seen.setdefault(b)
        return list(seen)


@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    names: list[str]
    rows: np.ndarray
    n_excluded: int
    extra: dict[str, np.ndarray] = field(default_factory=dict)


def build_feature_matrix(columns, spec: FeatureSpec, require: Sequence[str] = ()) -> FeatureMatrix:
    """Columns ordered intercept, bases, interaction products.

    ``columns`` is an :class:`~dlab.ingest.AlignedPanel` or a name -> vector
    mapping. Rows where any referenced column (or a ``require`` column) is
    undefined are dropped; ``rows`` holds the surviving row indices and
    ``extra`` the ``require`` columns restricted to them.
    """
    source: Mapping[str, np.ndarray] = getattr(columns, "columns", columns)
    needed = spec.referenced() + [c for c in require if c not in spec.referenced()]
    missing = [c for c in needed if c not in source]
    if missing:
        raise DataError(f"missing column(s): {', '.join(missing)}")
    data = {c: np.asarray(source[c], dtype=np.float64) for c in needed}
    lengths = {len(v) for v in data.values()}
    if len(lengths) > 1:
        raise DataError("referenced columns differ in length")
    n = lengths.pop() if lengths else 0
    ok = np.ones(n, dtype=bool)
    for v in data.values():
        ok &= np.isfinite(v)
    rows = np.flatnonzero(ok)
    parts = []
    if spec.intercept:
        parts.append(np.ones(len(rows)))
    parts += [data[c][rows] for c in spec.bases]
    parts += [data[a][rows] * data[b][rows] for a, b in spec.interactions]
    X = np.column_stack(parts) if parts else np.empty((len(rows), 0))
    return FeatureMatrix(
        X=X,
        names=spec.term_names(),
        rows=rows,
        n_excluded=int(n - len(rows)),
        extra={c: data[c][rows] for c in require},
    )
