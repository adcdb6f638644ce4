import pytest

from ksikit import events as ev


@pytest.fixture
def meta():
    return ev.SessionMeta(participant_id="p0", device="mouse", cohort="novice", block_count=1)


@pytest.fixture
def fingers_meta():
    return ev.SessionMeta(participant_id="p0", device="fingers", cohort="expert", block_count=1)


def make_log(meta, events):
    return ev.SessionLog(meta=meta, events=list(events))
