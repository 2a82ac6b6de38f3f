import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mononav import synth  # noqa: E402


@pytest.fixture(scope="session")
def room_scene():
    return synth.render_room(np.random.default_rng(1000))


@pytest.fixture
def dart_zone_frame():
    """Frame whose concave safe zone has its centroid on an off-color patch outside the zone."""
    img = np.full((120, 160, 3), 120, np.uint8)
    img[63:77, 73:88] = (250, 0, 0)
    zone = {"vertices": [[10, 116], [80, 40], [150, 116], [80, 52]]}
    return img, zone


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, in criterion order."""
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                rows.append((props["criterion"], outcome, props.get("detail", "")))
    if not rows:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome, detail in sorted(rows):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}  {detail}")
