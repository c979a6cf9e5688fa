import datetime
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from textnovelty import PaperRecord
from textnovelty.textproc import TextPipeline

FIXTURE_DIR = Path(__file__).parent / "data" / "fixture"
GOLDEN_DIR = Path(__file__).parent / "data" / "golden"


def make_record(pid, year, title, month=1, day=1, abstract=None, refs=(),
                venue="V1", subfield=1, fld=1):
    return PaperRecord(
        paper_id=pid, pub_date=datetime.date(year, month, day), title=title,
        abstract=abstract, venue_id=venue, subfield_id=subfield, field_id=fld,
        references=list(refs))


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture(scope="session")
def seed_pipeline():
    """Pipeline with tiny explicit lists so tests stay predictable."""
    pipe = TextPipeline(
        stop_words={"the", "a", "an", "of", "in", "on", "for", "and", "or",
                    "with", "by", "to", "is", "are", "journal", "university"},
        removal_words={"autonomous", "conservative", "movement", "general"},
        natural_stop_words=set(),
        expand_lists=False)
    pipe.fit([])
    return pipe
