import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pskit import packets  # noqa: E402
from pskit.packets import PhysConfig  # noqa: E402

# filled by test_acceptance.py: criterion number -> (title, passed, detail)
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {title} [{detail}]")


@pytest.fixture
def cfg():
    return PhysConfig()


def sample_centered(packet, cfg, n=4096, half=16.0):
    """Samples of ``packet`` on x0 +- half*delta."""
    h = half * packet.delta
    return packets.sample(packet, cfg, packet.x0 - h, 2 * h / (n - 1), n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
