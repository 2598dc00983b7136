from pathlib import Path

import numpy as np
import pytest

from mmcmcbayes.io import MethylationMatrix, write_methylation_csv
from mmcmcbayes.simulate import synthetic_baseline

DATA = Path(__file__).parent / "data"


def shifted_pair(n_cpg=600, n_samples=8, shift=1.0, seed=0, chromosomes=None):
    """Cancer = baseline + shift + noise, normal = baseline + noise."""
    base = synthetic_baseline(n_cpg, n_samples, seed=seed)
    rng = np.random.default_rng(seed + 1000)
    chroms = chromosomes if chromosomes is not None else base.chromosomes
    c = base.values + shift + rng.normal(0, 0.3, base.values.shape)
    n = base.values + rng.normal(0, 0.3, base.values.shape)
    return (
        MethylationMatrix(base.cpg_ids, chroms, c, base.sample_names),
        MethylationMatrix(base.cpg_ids, chroms, n, base.sample_names),
    )


@pytest.fixture
def demo_head_path():
    return DATA / "demo_head.csv"


@pytest.fixture
def normal_head_path():
    return DATA / "normal_head.csv"


@pytest.fixture
def small_pair():
    return shifted_pair()


@pytest.fixture
def small_pair_files(tmp_path, small_pair):
    c, n = small_pair
    cp, np_ = tmp_path / "cancer.csv", tmp_path / "normal.csv"
    write_methylation_csv(c, cp)
    write_methylation_csv(n, np_)
    return cp, np_


def pytest_terminal_summary(terminalreporter):
    import sys

    lines = getattr(sys.modules.get("test_acceptance"), "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
