"""Exact and fuzzy matching of profession titles against article titles.

Fuzzy candidates use the Levenshtein edit distance over Unicode code
points and the derived ratio 1 - distance / max(len). A pair is emitted
when the distance is at most ``d_max`` or the ratio is at least ``r_min``;
exact matches are auto-confirmed, everything else waits for a reviewer
decision ingested from a CSV file.
"""

from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass
from enum import Enum


class MatchStatus(str, Enum):
    EXACT = "exact"
    FUZZY = "fuzzy"
    CONFIRMED = "confirmed"
    REJECTED = "rejected"


@dataclass
class MatchCandidate:
    profession_id: str
    profession_title: str
    article_title: str
    distance: int
    ratio: float
    status: MatchStatus
    title_role: str  # which slot the profession title came from: male/female/neutral
    gender_group: str | None = None


def lev_distance(a: str, b: str) -> int:
    """Minimum number of single-character edits turning ``a`` into ``b``.

    Operates on Unicode code points, so an umlaut substitution counts as
    one edit.
    """
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + cost))
        previous = current
    return previous[-1]


def lev_ratio(a: str, b: str) -> float:
    """Match proportion 1 - distance / max(len(a), len(b)), in [0, 1]."""
    longest = max(len(a), len(b))
    if longest == 0:
        raise ValueError("lev_ratio: undefined for two empty strings")
    return 1.0 - lev_distance(a, b) / longest


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


def match(professions, titles, d_max: int = 2, r_min: float = 0.8,
          case_fold: bool = False) -> list[MatchCandidate]:
    """All-pairs match of profession titles against article titles.

    ``professions`` yields (profession_id, role, title) triples where role
    is one of male/female/neutral. Each (profession title, article title)
    pair meeting distance <= d_max or ratio >= r_min appears exactly once.
    Candidates are sorted by (profession_id, ratio desc, article title).
    Comparison is case-sensitive by default (German nouns are capitalized);
    ``case_fold`` folds both sides first.
    """
    title_list = sorted({_nfc(t) for t in titles})
    out: list[MatchCandidate] = []
    for prof_id, role, raw in professions:
        ptitle = _nfc(raw)
        pcmp = ptitle.casefold() if case_fold else ptitle
        plen = len(pcmp)
        for atitle in title_list:
            acmp = atitle.casefold() if case_fold else atitle
            # length bound: distance >= |len difference|, so a pair whose
            # length gap already fails both thresholds cannot match
            gap = abs(plen - len(acmp))
            longest = max(plen, len(acmp))
            if longest == 0:
                continue
            if gap > d_max and (1.0 - gap / longest) < r_min:
                continue
            d = lev_distance(pcmp, acmp)
            if d == 0:
                out.append(MatchCandidate(prof_id, ptitle, atitle, 0, 1.0,
                                          MatchStatus.EXACT, role,
                                          gender_group=role))
                continue
            ratio = 1.0 - d / longest
            if d <= d_max or ratio >= r_min:
                out.append(MatchCandidate(prof_id, ptitle, atitle, d, ratio,
                                          MatchStatus.FUZZY, role))
    out.sort(key=lambda c: (c.profession_id, -c.ratio, c.article_title,
                            c.profession_title))
    return out


def apply_decisions(candidates: list[MatchCandidate], path) -> list[MatchCandidate]:
    """Flip fuzzy candidates to confirmed/rejected from a reviewer CSV.

    Rows are (profession_id, article_title, verdict, gender_group) with
    verdict in {confirm, reject}. Only fuzzy candidates are reviewable;
    exact matches are confirmed by construction and stay untouched even
    when they share a key with a reviewed pair. A row referencing a pair
    that has no reviewable candidate is an error.
    """
    index: dict[tuple[str, str], list[MatchCandidate]] = {}
    for cand in candidates:
        if cand.status is MatchStatus.EXACT:
            continue
        index.setdefault((cand.profession_id, cand.article_title), []).append(cand)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for row_no, row in enumerate(reader, start=1):
            if not row or row[0].startswith("#"):
                continue
            if row[0] == "profession_id":
                continue
            if len(row) < 4:
                raise ValueError(f"decisions row {row_no}: expected 4 columns")
            prof_id, atitle, verdict, group = (c.strip() for c in row[:4])
            key = (prof_id, _nfc(atitle))
            if key not in index:
                raise ValueError(
                    f"decisions row {row_no}: no candidate for "
                    f"({prof_id}, {atitle})")
            for cand in index[key]:
                if verdict == "confirm":
                    cand.status = MatchStatus.CONFIRMED
                    cand.gender_group = group or cand.title_role
                elif verdict == "reject":
                    cand.status = MatchStatus.REJECTED
                    cand.gender_group = None
                else:
                    raise ValueError(
                        f"decisions row {row_no}: unknown verdict {verdict!r}")
    return candidates


def accepted(candidates: list[MatchCandidate]) -> list[MatchCandidate]:
    """Candidates usable downstream: exact plus reviewer-confirmed."""
    return [c for c in candidates
            if c.status in (MatchStatus.EXACT, MatchStatus.CONFIRMED)]


def write_candidates(candidates: list[MatchCandidate], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["profession_id", "title_role", "profession_title",
                         "article_title", "distance", "ratio", "status",
                         "gender_group"])
        for c in candidates:
            writer.writerow([c.profession_id, c.title_role, c.profession_title,
                             c.article_title, c.distance, f"{c.ratio:.6f}",
                             c.status.value, c.gender_group or ""])
