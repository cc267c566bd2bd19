import pytest

from clickbound.testfn import ModelParams
from clickbound.wightman import load_or_build_table


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("overlap-cache")


@pytest.fixture(scope="session")
def table_for(cache_dir):
    """Factory for overlap tables with default settings, cached per session."""
    memo = {}

    def get(alpha, r_ratio):
        key = (float(alpha), float(r_ratio))
        if key not in memo:
            memo[key] = load_or_build_table(ModelParams(*key), cache_dir=cache_dir)
        return memo[key]

    return get


@pytest.fixture(scope="session")
def table_r1(table_for):
    return table_for(1.0, 1.0)


@pytest.fixture(scope="session")
def table_r2(table_for):
    return table_for(1.0, 2.0)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) != "call":
                continue
            lines += [v for k, v in rep.user_properties if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
