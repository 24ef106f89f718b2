"""Loading WALS typological features and one-hot encoding for regression."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)

# The 28 morphology-related WALS feature ids, in atlas order.
MORPHOLOGY_FEATURES = (
    "22A", "26A", "27A", "28A", "29A", "30A", "33A", "34A", "37A", "38A",
    "49A", "51A", "57A", "59A", "65A", "66A", "67A", "69A", "70A", "73A",
    "74A", "75A", "78A", "94A", "101A", "102A", "111A", "112A",
)

_LANGUAGE_COLUMNS = ("language_code", "iso_code", "wals_code")
MISSING_CATEGORY = "__missing__"


@dataclass(frozen=True)
class WalsRecord:
    language_code: str
    values: dict[str, str]


@dataclass(frozen=True)
class DesignMatrix:
    matrix: np.ndarray
    column_names: tuple[str, ...]
    row_codes: tuple[str, ...]


def load_wals(
    csv_text: str, feature_list: Sequence[str] = MORPHOLOGY_FEATURES
) -> list[WalsRecord]:
    """Parse a WALS CSV export into per-language records.

    The header must contain a language-code column (one of
    ``language_code``, ``iso_code``, ``wals_code``) and one column per
    requested feature; a feature column matches when its header equals the
    feature id or starts with ``"<id> "``.  Empty cells become missing
    values; columns outside ``feature_list`` are ignored.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty WALS CSV") from None
    header = [h.strip() for h in header]
    lower = [h.lower() for h in header]

    lang_col = None
    for name in _LANGUAGE_COLUMNS:
        if name in lower:
            lang_col = lower.index(name)
            break
    if lang_col is None:
        raise ValueError(
            f"WALS CSV needs a language column; expected one of {_LANGUAGE_COLUMNS}"
        )

    feature_cols: dict[str, int] = {}
    missing: list[str] = []
    for fid in feature_list:
        for i, h in enumerate(header):
            if h == fid or h.startswith(fid + " "):
                feature_cols[fid] = i
                break
        else:
            missing.append(fid)
    if missing:
        raise ValueError(f"WALS CSV header is missing feature columns: {missing}")

    records: list[WalsRecord] = []
    seen: set[str] = set()
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        code = row[lang_col].strip()
        if not code:
            log.warning("load_wals: skipping row with empty language code")
            continue
        if code in seen:
            log.warning("load_wals: duplicate language %s; keeping first row", code)
            continue
        seen.add(code)
        values = {}
        for fid, col in feature_cols.items():
            cell = row[col].strip() if col < len(row) else ""
            if cell:
                values[fid] = cell
        if not values:
            log.warning("load_wals: language %s has no feature values", code)
        records.append(WalsRecord(code, values))
    return records


def encode(
    records: Sequence[WalsRecord],
    languages: Sequence[str],
    feature_list: Sequence[str] = MORPHOLOGY_FEATURES,
) -> DesignMatrix:
    """One-hot encode categorical features, one row per requested language.

    Each feature contributes one indicator per category observed anywhere
    in ``records`` plus a dedicated missing indicator, so every row sums to
    exactly 1 within each feature's block.  Languages without a record get
    all-missing rows.  Column order is fixed: feature-list order, then
    category lexicographic, missing last.
    """
    if not languages:
        raise ValueError("languages must be nonempty")
    by_code: dict[str, WalsRecord] = {}
    for rec in records:
        by_code.setdefault(rec.language_code, rec)

    categories: dict[str, list[str]] = {}
    for fid in feature_list:
        observed = {rec.values[fid] for rec in records if fid in rec.values}
        categories[fid] = sorted(observed)

    column_names: list[str] = []
    col_of: dict[tuple[str, str], int] = {}
    for fid in feature_list:
        for cat in categories[fid] + [MISSING_CATEGORY]:
            col_of[(fid, cat)] = len(column_names)
            column_names.append(f"{fid}={cat}")

    matrix = np.zeros((len(languages), len(column_names)))
    for r, code in enumerate(languages):
        rec = by_code.get(code)
        for fid in feature_list:
            value = rec.values.get(fid) if rec is not None else None
            cat = value if value is not None else MISSING_CATEGORY
            matrix[r, col_of[(fid, cat)]] = 1.0
    return DesignMatrix(matrix, tuple(column_names), tuple(languages))
