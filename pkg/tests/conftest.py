import pytest

from fairprov import harness
from fairprov.consolidate import consolidate_tree


@pytest.fixture(scope="session")
def demo_tree(tmp_path_factory):
    root = tmp_path_factory.mktemp("demo") / "ds"
    harness.generate(harness.demo_profile(), root)
    return root


@pytest.fixture(scope="session")
def demo_graph_frozen(demo_tree):
    doc, scan = consolidate_tree(demo_tree)
    assert not scan.violations
    return doc


@pytest.fixture
def demo_graph(demo_graph_frozen):
    """A private copy that tests may mutate."""
    return demo_graph_frozen.copy()


@pytest.fixture(scope="session")
def default_tree(tmp_path_factory):
    root = tmp_path_factory.mktemp("default") / "ds"
    harness.generate(harness.default_profile(), root, workers=4)
    return root


@pytest.fixture(scope="session")
def default_graph(default_tree):
    doc, scan = consolidate_tree(default_tree, workers=4)
    assert not scan.violations
    return doc


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
