"""German labor-market statistics keyed by occupation classification
codes, joined to professions.

Statistics arrive as absolute employee counts per classification
subgroup; an accompanying classifier file maps profession names to codes
(a trailing "x" in a code stands for the whole subgroup). Joining tries
the profession's titles against the classifier, then resolves the code
exactly or by prefix against the statistics table.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum


class MatchKind(str, Enum):
    EXACT = "exact"
    PREFIX = "prefix"


class MajorityGroup(str, Enum):
    FEMALE = "female_majority"
    MALE = "male_majority"
    UNASSIGNED = "unassigned"


class DominatedGroup(str, Enum):
    FEMALE = "female_dominated"
    MALE = "male_dominated"
    NONE = "not_dominated"


@dataclass
class LaborStat:
    kldb_code: str
    label: str
    n_men: int
    n_women: int

    @property
    def pct_women(self) -> float:
        return self.n_women / (self.n_men + self.n_women)


@dataclass
class CodeAssignment:
    profession_id: str
    kldb_code: str
    match_kind: MatchKind
    matched_title: str


def load_stats(path) -> list[LaborStat]:
    """CSV columns: code, label, men, women. Duplicate codes and
    non-numeric counts are errors naming the row."""
    out: list[LaborStat] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#") or row[0] == "code":
                continue
            if len(row) < 4:
                raise ValueError(f"labor stats row {row_no}: expected 4 columns")
            code = row[0].strip()
            if code in seen:
                raise ValueError(f"labor stats row {row_no}: duplicate code "
                                 f"{code!r}")
            seen.add(code)
            try:
                men = int(row[2])
                women = int(row[3])
            except ValueError as exc:
                raise ValueError(f"labor stats row {row_no}: non-numeric "
                                 "count") from exc
            if men < 0 or women < 0 or men + women == 0:
                raise ValueError(f"labor stats row {row_no}: counts must be "
                                 "nonnegative with a positive total")
            out.append(LaborStat(code, row[1].strip(), men, women))
    return out


def load_classifier(path) -> dict[str, str]:
    """Profession-name to code index, CSV columns (name, code)."""
    index: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#") or row[0] == "name":
                continue
            if len(row) < 2:
                raise ValueError(f"classifier row {row_no}: expected 2 columns")
            name = row[0].strip()
            code = row[1].strip()
            if name in index and index[name] != code:
                raise ValueError(f"classifier row {row_no}: conflicting code "
                                 f"for {name!r}")
            index[name] = code
    return index


def resolve_code(code: str, stats_codes: set[str]) -> tuple[str, MatchKind] | None:
    """Exact code first, then progressively shorter prefixes (the "8445x"
    subgroup encoding)."""
    bare = code.rstrip("xX")
    if code in stats_codes:
        return code, MatchKind.EXACT
    if bare != code and bare in stats_codes:
        return bare, MatchKind.PREFIX
    for length in range(len(bare) - 1, 2, -1):
        prefix = bare[:length]
        if prefix in stats_codes:
            return prefix, MatchKind.PREFIX
    return None


def assign(professions, classifier: dict[str, str],
           stats: list[LaborStat]) -> tuple[list[CodeAssignment], list[str]]:
    """Join professions to statistics codes.

    ``professions`` yields (profession_id, titles) pairs; the first title
    with a classifier entry wins, ambiguous or unlisted professions are
    reported as unmatched.
    """
    stats_codes = {s.kldb_code for s in stats}
    assignments: list[CodeAssignment] = []
    unmatched: list[str] = []
    for prof_id, titles in professions:
        hit = None
        for title in titles:
            code = classifier.get(title)
            if code is None:
                continue
            resolved = resolve_code(code, stats_codes)
            if resolved is not None:
                hit = CodeAssignment(prof_id, resolved[0], resolved[1], title)
                break
        if hit is None:
            unmatched.append(prof_id)
        else:
            assignments.append(hit)
    return assignments, unmatched


def majority_group(pct_women: float, threshold: float = 0.5) -> MajorityGroup:
    """Strictly more than the threshold on either side; the exact boundary
    stays unassigned."""
    if pct_women > threshold:
        return MajorityGroup.FEMALE
    if pct_women < threshold:
        return MajorityGroup.MALE
    return MajorityGroup.UNASSIGNED


def dominated_group(pct_women: float, threshold: float = 0.7) -> DominatedGroup:
    """At least ``threshold`` of one gender (inclusive bound)."""
    if pct_women >= threshold:
        return DominatedGroup.FEMALE
    if pct_women <= 1.0 - threshold:
        return DominatedGroup.MALE
    return DominatedGroup.NONE


@dataclass
class JoinedLabor:
    profession_id: str
    kldb_code: str
    match_kind: MatchKind
    n_men: int
    n_women: int
    pct_women: float
    majority: MajorityGroup
    dominated: DominatedGroup


def join(assignments: list[CodeAssignment], stats: list[LaborStat],
         majority_threshold: float = 0.5,
         dominated_threshold: float = 0.7) -> list[JoinedLabor]:
    by_code = {s.kldb_code: s for s in stats}
    out = []
    for a in assignments:
        stat = by_code[a.kldb_code]
        pct = stat.pct_women
        out.append(JoinedLabor(
            profession_id=a.profession_id,
            kldb_code=a.kldb_code,
            match_kind=a.match_kind,
            n_men=stat.n_men,
            n_women=stat.n_women,
            pct_women=pct,
            majority=majority_group(pct, majority_threshold),
            dominated=dominated_group(pct, dominated_threshold),
        ))
    return out


def write_joined(rows: list[JoinedLabor], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["profession_id", "kldb_code", "match_kind", "n_men",
                         "n_women", "pct_women", "majority", "dominated"])
        for r in sorted(rows, key=lambda r: r.profession_id):
            writer.writerow([r.profession_id, r.kldb_code, r.match_kind.value,
                             r.n_men, r.n_women, f"{r.pct_women:.6f}",
                             r.majority.value, r.dominated.value])
