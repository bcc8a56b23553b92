import numpy as np
import pytest

from shortblock import _kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20231017)


# (numba, numpy) implementations of each kernel, so both paths are checked
# whatever SHORTBLOCK_DISABLE_NUMBA says.
KERNEL_PAIRS = {
    "fht": (_kernels.fht_rows_nb, _kernels.fht_rows_np),
    "naive": (_kernels.naive_rows_nb, _kernels.naive_rows_np),
    "parity": (_kernels.naive_parity_rows_nb, _kernels.naive_parity_rows_np),
    "gold": (_kernels.gold_nb, _kernels.gold_np),
    "metrics": (_kernels.candidate_metrics_nb, _kernels.candidate_metrics_np),
}


def bipolar(bits):
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
