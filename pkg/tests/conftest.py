from datetime import datetime, timedelta
from pathlib import Path

import pytest

from iotconflict.ingest import registry_from_dict
from iotconflict.model import ServiceEvent, TimeInterval
from iotconflict.selection import make_pair

DATA = Path(__file__).resolve().parent.parent / "data"
DAY = datetime(2018, 6, 15)

_acceptance_lines = []


def at(hour: float, day: int = 0) -> datetime:
    return DAY + timedelta(days=day, seconds=round(hour * 3600))


def iv(h0: float, h1: float, day: int = 0) -> TimeInterval:
    return TimeInterval(at(h0, day), at(h1, day))


def ev(eid, service, h0, h1, user, loc="living room", state="On", q=None, n=None, demand=1, day=0):
    return ServiceEvent(
        event_id=eid,
        service_id=service,
        state=state,
        interval=iv(h0, h1, day),
        location=loc,
        user_id=user,
        qualitative_values=n or {},
        quantitative_values=q or {},
        capacity_demand=demand,
    )


def pair(a, b):
    p = make_pair(a, b)
    assert p is not None, "test events do not form an overlap pair"
    return p


def make_home():
    return registry_from_dict(
        {
            "services": [
                {"service_id": "tv", "capacity": "unbounded",
                 "qualitative": {"channel": ["news", "sports", "movies"]}},
                {"service_id": "ac", "quantitative": {"temperature": {"unit": "C", "min": 10, "max": 35}},
                 "depends_on": ["window"], "env_effects": {"temperature": "lowers"}},
                {"service_id": "window", "env_effects": {"airflow": "raises"}},
                {"service_id": "heater", "env_effects": {"temperature": "raises"}},
                {"service_id": "console", "capacity": 1},
                {"service_id": "console2", "capacity": 2},
                {"service_id": "lamp1", "env_effects": {"luminosity": "raises"}},
                {"service_id": "lamp2", "env_effects": {"luminosity": "raises"}},
                {"service_id": "light"},
                {"service_id": "dvd"},
            ]
        }
    )


@pytest.fixture
def home():
    return make_home()


@pytest.fixture
def acceptance():
    def record(criterion: str, ok: bool, detail: str = ""):
        _acceptance_lines.append(f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
