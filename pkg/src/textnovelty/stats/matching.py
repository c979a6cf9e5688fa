"""Case-control matching on (venue, year, subfield) with field fallback.

Each case draws one unused control published in the same venue and year
and the same subfield; when no subfield-level candidate is left, the
coarser field classification is tried; failing that the case is reported
unmatched. Sampling is uniform and seeded, cases are processed in id
order, and candidate lists are id-sorted, so results are deterministic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional


@dataclass
class MatchResult:
    pairs: list[tuple[str, str, str]] = field(default_factory=list)
    unmatched: list[str] = field(default_factory=list)

    def control_of(self) -> dict[str, str]:
        return {case: control for case, control, _ in self.pairs}


def match_case_control(cases: Iterable, pool: Iterable,
                       seed: int = 0) -> MatchResult:
    """Match each case to one control from the pool.

    `cases` and `pool` are records with paper_id, venue_id, pub_date,
    subfield_id, and field_id. Pool entries sharing an id with a case are
    ignored; each control is used at most once.
    """
    cases = sorted(cases, key=lambda r: r.paper_id)
    case_ids = {r.paper_id for r in cases}

    by_subfield: dict[tuple, list[str]] = {}
    by_field: dict[tuple, list[str]] = {}
    for r in pool:
        if r.paper_id in case_ids:
            continue
        year = r.pub_date.year
        if r.subfield_id is not None:
            by_subfield.setdefault(
                (r.venue_id, year, r.subfield_id), []).append(r.paper_id)
        if r.field_id is not None:
            by_field.setdefault(
                (r.venue_id, year, r.field_id), []).append(r.paper_id)
    for candidates in by_subfield.values():
        candidates.sort()
    for candidates in by_field.values():
        candidates.sort()

    rng = random.Random(seed)
    used: set[str] = set()
    result = MatchResult()

    def draw(candidates: Optional[list[str]]) -> Optional[str]:
        if not candidates:
            return None
        available = [c for c in candidates if c not in used]
        if not available:
            return None
        return available[rng.randrange(len(available))]

    for case in cases:
        year = case.pub_date.year
        control = None
        level = None
        if case.subfield_id is not None:
            control = draw(by_subfield.get((case.venue_id, year, case.subfield_id)))
            level = "subfield"
        if control is None and case.field_id is not None:
            control = draw(by_field.get((case.venue_id, year, case.field_id)))
            level = "field"
        if control is None:
            result.unmatched.append(case.paper_id)
        else:
            used.add(control)
            result.pairs.append((case.paper_id, control, level))
    return result
