import time

import numpy as np
import pytest

from scatpalm.dataset import synth_generate
from scatpalm.features import FeatureSchema, extract_many
from scatpalm.filterbank import FilterBankConfig, build_filter_bank


# wall clock of expensive session fixtures, read by runtime-bounded checks
EXTRACT_SECONDS: dict = {}

# one verdict line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def default_bank():
    return build_filter_bank(FilterBankConfig())


@pytest.fixture(scope="session")
def default_schema():
    return FeatureSchema()


@pytest.fixture(scope="session")
def synth_50x12():
    """The desk-scale analogue of the PolyU protocol: 50 classes x 12 samples."""
    return synth_generate(50, 12, 128, seed=0)


@pytest.fixture(scope="session")
def synth_features(synth_50x12, default_schema, default_bank):
    t0 = time.perf_counter()
    X = extract_many(synth_50x12.images, default_schema, default_bank)
    EXTRACT_SECONDS["synth_50x12"] = time.perf_counter() - t0
    return X, synth_50x12.labels, synth_50x12.sample_index


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
