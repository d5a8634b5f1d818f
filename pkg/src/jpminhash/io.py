"""Readers and writers for the package's external file formats.

CSV files start with the version header line ``# jpminhash-v1`` (further
``#`` lines are free-form comments) and print floats with 9 significant
digits; JSONL records carry ``"v": 1``.  64-bit ids and seeds are encoded as
decimal strings to survive JSON consumers that truncate to 53-bit integers.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from .dense import FiniteMeasure, PiecewiseDensity
from .harness import BandingScheme, InvertedIndex, PairSample, PairScore, PRPoint
from .minhash import Signature

__all__ = [
    "VERSION_HEADER",
    "fmt_float",
    "write_pair_csv",
    "read_pair_csv",
    "write_pr_csv",
    "read_pr_csv",
    "write_signatures_jsonl",
    "read_signatures_jsonl",
    "write_measures_jsonl",
    "read_measures_jsonl",
    "write_index_jsonl",
    "read_index_jsonl",
    "read_corpus_jsonl",
]

VERSION_HEADER = "# jpminhash-v1"

PAIR_COLUMNS = "idA,idB,jp,jw,jsd,tv,jaccard,weight"
PR_COLUMNS = "method,a,o,cost,precision,recall,mode"


def fmt_float(v: float) -> str:
    return format(float(v), ".9g")


def _write_text(path: str | Path, lines: Iterable[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _data_lines(path: str | Path) -> list[tuple[int, str]]:
    """Non-comment, non-empty lines with their 1-based line numbers."""
    out = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append((lineno, line))
    return out


def write_pair_csv(path: str | Path, pairs: PairSample, comments: Sequence[str] = ()) -> None:
    lines = [VERSION_HEADER]
    lines.extend(f"# {c}" for c in comments)
    lines.append(PAIR_COLUMNS)
    for s in pairs.scores:
        lines.append(
            ",".join(
                (
                    s.id_a,
                    s.id_b,
                    fmt_float(s.jp),
                    fmt_float(s.jw),
                    fmt_float(s.jsd),
                    fmt_float(s.tv),
                    fmt_float(s.support_jaccard),
                    fmt_float(s.weight),
                )
            )
        )
    _write_text(path, lines)


def read_pair_csv(path: str | Path) -> PairSample:
    rows = _data_lines(path)
    if not rows or rows[0][1] != PAIR_COLUMNS:
        raise ValueError(f"{path}: expected pair CSV columns {PAIR_COLUMNS!r}")
    scores = []
    for lineno, line in rows[1:]:
        parts = line.split(",")
        if len(parts) != 8:
            raise ValueError(f"{path}:{lineno}: expected 8 fields, got {len(parts)}")
        try:
            scores.append(
                PairScore(
                    id_a=parts[0],
                    id_b=parts[1],
                    jp=float(parts[2]),
                    jw=float(parts[3]),
                    jsd=float(parts[4]),
                    tv=float(parts[5]),
                    support_jaccard=float(parts[6]),
                    weight=float(parts[7]),
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return PairSample(tuple(scores))


def write_pr_csv(path: str | Path, points: Sequence[PRPoint], comments: Sequence[str] = ()) -> None:
    lines = [VERSION_HEADER]
    lines.extend(f"# {c}" for c in comments)
    lines.append(PR_COLUMNS)
    for p in points:
        lines.append(
            f"{p.method},{p.a},{p.o},{p.cost},{fmt_float(p.precision)},{fmt_float(p.recall)},{p.mode}"
        )
    _write_text(path, lines)


def read_pr_csv(path: str | Path) -> list[PRPoint]:
    rows = _data_lines(path)
    if not rows or rows[0][1] != PR_COLUMNS:
        raise ValueError(f"{path}: expected PR CSV columns {PR_COLUMNS!r}")
    points = []
    for lineno, line in rows[1:]:
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}:{lineno}: expected 7 fields, got {len(parts)}")
        try:
            points.append(
                PRPoint(
                    method=parts[0],
                    a=int(parts[1]),
                    o=int(parts[2]),
                    cost=int(parts[3]),
                    precision=float(parts[4]),
                    recall=float(parts[5]),
                    mode=parts[6],
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return points


def _load_json_line(path: str | Path, lineno: int, line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ValueError(f"{path}:{lineno}: expected a JSON object")
    return obj


def _require(obj: dict, key: str, path: str | Path, lineno: int):
    if key not in obj:
        raise ValueError(f"{path}:{lineno}: missing field {key!r}")
    return obj[key]


def write_signatures_jsonl(path: str | Path, sigs: Iterable[Signature]) -> None:
    lines = []
    for s in sigs:
        lines.append(
            json.dumps(
                {
                    "v": 1,
                    "id": s.doc_id,
                    "seed": str(s.base_seed),
                    "k": s.k,
                    "samples": [str(v) for v in s.samples],
                }
            )
        )
    _write_text(path, lines)


def read_signatures_jsonl(path: str | Path) -> list[Signature]:
    sigs = []
    for lineno, line in _data_lines(path):
        obj = _load_json_line(path, lineno, line)
        try:
            sigs.append(
                Signature(
                    doc_id=_require(obj, "id", path, lineno),
                    samples=tuple(int(v) for v in _require(obj, "samples", path, lineno)),
                    base_seed=int(_require(obj, "seed", path, lineno)),
                    k=int(_require(obj, "k", path, lineno)),
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return sigs


def write_measures_jsonl(
    path: str | Path, measures: Iterable[tuple[str, FiniteMeasure | PiecewiseDensity]]
) -> None:
    lines = []
    for mid, m in measures:
        if isinstance(m, FiniteMeasure):
            lines.append(json.dumps({"v": 1, "id": mid, "masses": list(m.masses)}))
        else:
            lines.append(
                json.dumps(
                    {
                        "v": 1,
                        "id": mid,
                        "breakpoints": list(m.breakpoints),
                        "values": list(m.values),
                    }
                )
            )
    _write_text(path, lines)


def read_measures_jsonl(path: str | Path) -> list[tuple[str, FiniteMeasure | PiecewiseDensity]]:
    out = []
    for lineno, line in _data_lines(path):
        obj = _load_json_line(path, lineno, line)
        mid = _require(obj, "id", path, lineno)
        try:
            if "masses" in obj:
                out.append((mid, FiniteMeasure(tuple(obj["masses"]))))
            elif "breakpoints" in obj:
                out.append(
                    (mid, PiecewiseDensity(tuple(obj["breakpoints"]), tuple(_require(obj, "values", path, lineno))))
                )
            else:
                raise ValueError("need either 'masses' or 'breakpoints'")
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out


def write_index_jsonl(path: str | Path, index: InvertedIndex) -> None:
    scheme = index.scheme
    lines = [
        json.dumps(
            {"v": 1, "kind": "index", "a": scheme.a, "o": scheme.o, "seed": str(scheme.base_seed)}
        )
    ]
    for (band, key), docs in sorted(index.buckets.items()):
        lines.append(json.dumps({"band": band, "key": str(key), "docs": list(docs)}))
    _write_text(path, lines)


def read_index_jsonl(path: str | Path) -> InvertedIndex:
    rows = _data_lines(path)
    if not rows:
        raise ValueError(f"{path}: empty index file")
    lineno, line = rows[0]
    meta = _load_json_line(path, lineno, line)
    if meta.get("kind") != "index":
        raise ValueError(f"{path}:{lineno}: expected index metadata line")
    scheme = BandingScheme(
        a=int(_require(meta, "a", path, lineno)),
        o=int(_require(meta, "o", path, lineno)),
        base_seed=int(_require(meta, "seed", path, lineno)),
    )
    buckets: dict[tuple[int, int], tuple[str, ...]] = {}
    for lineno, line in rows[1:]:
        obj = _load_json_line(path, lineno, line)
        band = int(_require(obj, "band", path, lineno))
        key = int(_require(obj, "key", path, lineno))
        buckets[(band, key)] = tuple(_require(obj, "docs", path, lineno))
    return InvertedIndex(buckets, scheme)


def read_corpus_jsonl(path: str | Path) -> list[dict]:
    """Raw corpus records: each line needs 'id' plus 'text' or 'weights'."""
    records = []
    for lineno, line in _data_lines(path):
        obj = _load_json_line(path, lineno, line)
        _require(obj, "id", path, lineno)
        if "text" not in obj and "weights" not in obj:
            raise ValueError(f"{path}:{lineno}: need either 'text' or 'weights'")
        records.append(obj)
    return records
