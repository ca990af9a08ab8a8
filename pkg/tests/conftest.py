import os
import shutil

import pytest
from synth import three_commit_repo

ACCEPTANCE_LINES: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def git_available():
    if shutil.which("git") is None:
        pytest.skip("git executable not found")
    return True


@pytest.fixture
def fixture_repo(tmp_path, git_available):
    return three_commit_repo(tmp_path / "fixture-repo")


@pytest.fixture
def data_dir():
    root = os.environ.get("COMMIT_DENSITY_DATA")
    if not root or not os.path.isdir(root):
        pytest.skip("set COMMIT_DENSITY_DATA to the reproduction data directory")
    return root
