import pytest

from cesaro import WeightSpec, make_grid


@pytest.fixture(scope="session")
def ces2():
    """w = 1/x, p = 2 on (0, 1): Psi(x) = 1/x - 1."""
    return WeightSpec.power(-1.0, 2.0, 1.0)


@pytest.fixture(scope="session")
def geo_grid():
    return make_grid(1.0, 10_000, "geometric-near-zero", x_min=1e-6, knots=[0.5])


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """Log one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def _record(number, ok, detail, table=()):
        block = [f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"]
        block += [f"    {row}" for row in table]
        lines.append((number, block))
        print("\n".join(block))
        return ok
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, block in sorted(lines, key=lambda item: item[0]):
            for line in block:
                terminalreporter.write_line(line)
