import os

import pytest
from hypothesis import HealthCheck, settings

from lopt import Tokenizer, TokenizerConfig, toy_bpe, toy_wordpiece

settings.register_profile(
    "default",
    deadline=None,
    max_examples=200,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=1000, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def toybpe():
    vocab, merges = toy_bpe()
    return Tokenizer(vocab, TokenizerConfig(), merges)


@pytest.fixture(scope="session")
def toywp():
    return Tokenizer(toy_wordpiece(), TokenizerConfig(algorithm="wordpiece"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
