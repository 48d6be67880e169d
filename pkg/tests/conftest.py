import numpy as np
import pytest

from dvfi.frames import Sequence


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_frame(rng, h=16, w=16):
    return rng.random((h, w, 3))


def random_septuplet(rng, h=32, w=32, n_inputs=4):
    frames = tuple(rng.random((h, w, 3)) for _ in range(7))
    inputs = (0, 2, 4, 6) if n_inputs == 4 else (2, 4)
    return Sequence(frames, inputs, 3)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(test_acceptance.RESULTS):
        line = f"criterion {num:2d} [{name}]: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
