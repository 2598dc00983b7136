import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmcmcbayes.engine import DmrRecord
from mmcmcbayes.errors import ConfigError, InfeasiblePlacementError, UnknownCpGError
from mmcmcbayes.io import MethylationMatrix
from mmcmcbayes.simulate import (
    SimConfig,
    TruthInterval,
    evaluate,
    read_truth,
    simulate_dataset,
    synthetic_baseline,
    write_truth,
)

BASE = synthetic_baseline(5000, 6, seed=1)


def inside_mask(truth, n):
    mask = np.zeros(n, dtype=bool)
    for t in truth:
        mask[t.start_row : t.end_row + 1] = True
    return mask


def rec_for(index, start, end):
    return DmrRecord(index.chromosomes[start], index.cpg_ids[start], index.cpg_ids[end], end - start + 1, 2.0, 1)


# baseline


def test_baseline_shape_and_ids():
    b = synthetic_baseline(100, 4, chromosome="X", seed=2)
    assert b.values.shape == (100, 4)
    assert b.cpg_ids[0] == "cg00000000" and b.sample_names[0] == "M_sample_1"
    assert set(b.chromosomes) == {"X"}


def test_baseline_bimodal():
    means = np.nanmean(BASE.values, axis=1)
    assert (means > 0.5).mean() > 0.3 and (means < -1).mean() > 0.2


def test_baseline_missing_rate():
    b = synthetic_baseline(2000, 5, seed=0, missing_rate=0.1)
    assert np.isnan(b.values).mean() == pytest.approx(0.1, abs=0.01)


# simulate_dataset


def test_noiseless_single_shift():
    c, n, truth = simulate_dataset(SimConfig(BASE, noise_sd=0.0, n_dmrs=1, shifts=(2.0,), seed=4))
    (t,) = truth
    diff = c.values - n.values
    mask = inside_mask(truth, BASE.n_cpg)
    np.testing.assert_allclose(diff[mask], 2.0, rtol=0, atol=1e-12)
    assert np.all(diff[~mask] == 0.0)
    np.testing.assert_array_equal(n.values, BASE.values)
    assert t.length in (10, 20, 50) and t.shift == 2.0


def test_default_config_truth():
    _, _, truth = simulate_dataset(SimConfig(BASE, seed=5))
    assert len(truth) == 10
    assert all(t.length in (10, 20, 50) and t.shift in (1.0, 2.0) for t in truth)
    assert all(a.end_row < b.start_row for a, b in zip(truth, truth[1:]))


def test_same_seed_identical():
    a = simulate_dataset(SimConfig(BASE, seed=9))
    b = simulate_dataset(SimConfig(BASE, seed=9))
    assert a[2] == b[2]
    np.testing.assert_array_equal(a[0].values, b[0].values)
    np.testing.assert_array_equal(a[1].values, b[1].values)


def test_different_seed_differs():
    assert simulate_dataset(SimConfig(BASE, seed=1))[2] != simulate_dataset(SimConfig(BASE, seed=2))[2]


def test_noisy_group_difference_within_bound():
    cfg = SimConfig(BASE, noise_sd=0.5, n_dmrs=10, seed=12)
    c, n, truth = simulate_dataset(cfg)
    diff = c.values.mean(axis=1) - n.values.mean(axis=1)
    expected = np.zeros(BASE.n_cpg)
    for t in truth:
        expected[t.start_row : t.end_row + 1] = t.shift
    # each group mean has sd noise_sd / sqrt(n); their difference has sqrt(2) times that
    sd = cfg.noise_sd * np.sqrt(2 / BASE.n_sample)
    outside = np.abs(diff - expected) > 3 * sd
    assert outside.mean() < 0.01
    for t in truth:
        block = diff[t.start_row : t.end_row + 1] - t.shift
        assert abs(block.mean()) <= 3 * sd / np.sqrt(t.length)


def test_infeasible_total_length():
    small = synthetic_baseline(40, 3)
    with pytest.raises(InfeasiblePlacementError):
        simulate_dataset(SimConfig(small, n_dmrs=3, lengths=(20,)))


def test_infeasible_region_too_long_for_any_chromosome():
    b = synthetic_baseline(60, 2)
    split = MethylationMatrix(b.cpg_ids, ["1"] * 30 + ["2"] * 30, b.values, b.sample_names)
    with pytest.raises(InfeasiblePlacementError):
        simulate_dataset(SimConfig(split, n_dmrs=1, lengths=(50,)))


def test_exact_fit_placement():
    small = synthetic_baseline(20, 2)
    _, _, truth = simulate_dataset(SimConfig(small, n_dmrs=2, lengths=(10,), seed=3))
    assert [(t.start_row, t.end_row) for t in truth] == [(0, 9), (10, 19)]


@pytest.mark.parametrize("kwargs", [dict(noise_sd=-0.1), dict(n_dmrs=-1), dict(lengths=(0,)), dict(shifts=())])
def test_bad_sim_config(kwargs):
    with pytest.raises(ConfigError):
        SimConfig(BASE, **kwargs)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.lists(st.integers(9, 120), min_size=2, max_size=4))
def test_truth_respects_chromosomes(seed, run_lengths):
    n = sum(run_lengths)
    chroms = [str(k) for k, r in enumerate(run_lengths) for _ in range(r)]
    b = synthetic_baseline(n, 2, seed=0)
    m = MethylationMatrix(b.cpg_ids, chroms, b.values, b.sample_names)
    cfg = SimConfig(m, noise_sd=0.0, n_dmrs=3, lengths=(1, 2, 3), seed=seed)
    _, _, truth = simulate_dataset(cfg)
    assert all(a.end_row < b.start_row for a, b in zip(truth, truth[1:]))
    for t in truth:
        assert set(chroms[t.start_row : t.end_row + 1]) == {t.chromosome}


def test_truth_round_trip(tmp_path):
    _, _, truth = simulate_dataset(SimConfig(BASE, seed=7))
    write_truth(truth, BASE, tmp_path / "truth.csv")
    assert read_truth(tmp_path / "truth.csv") == truth
    header = (tmp_path / "truth.csv").read_text().splitlines()[0]
    assert header == "Chromosome,Start_CpG,End_CpG,Start_Row,End_Row,Length,Shift"


# evaluate

TRUTH = [TruthInterval("6", 100, 119, 1.0), TruthInterval("6", 300, 309, 2.0)]


def test_evaluate_exact():
    det = [rec_for(BASE, t.start_row, t.end_row) for t in TRUTH]
    m = evaluate(det, TRUTH, BASE)
    assert (m["sensitivity"], m["fdr"]) == (1.0, 0.0)
    assert (m["cpg_precision"], m["cpg_recall"]) == (1.0, 1.0)


def test_evaluate_no_detections():
    m = evaluate([], TRUTH, BASE)
    assert (m["sensitivity"], m["fdr"], m["n_detected"]) == (0.0, 0.0, 0)


def test_evaluate_half_and_half():
    det = [rec_for(BASE, 110, 130), rec_for(BASE, 2000, 2010)]
    m = evaluate(det, TRUTH, BASE)
    assert (m["sensitivity"], m["fdr"]) == (0.5, 0.5)
    assert m["cpg_precision"] == pytest.approx(10 / 32)
    assert m["cpg_recall"] == pytest.approx(10 / 30)


def test_evaluate_single_shared_cpg_counts():
    assert evaluate([rec_for(BASE, 119, 119)], TRUTH, BASE)["sensitivity"] == 0.5


def test_evaluate_unknown_cpg():
    bad = DmrRecord("6", "cg99999999", "cg00000001", 2, 2.0, 1)
    with pytest.raises(UnknownCpGError):
        evaluate([bad], TRUTH, BASE)


spans = st.lists(st.tuples(st.integers(0, 400), st.integers(0, 30)), max_size=8)


@given(spans, st.integers(0, len(TRUTH) - 1))
def test_evaluate_monotone(det_spans, k):
    det = [rec_for(BASE, s, min(BASE.n_cpg - 1, s + w)) for s, w in det_spans]
    before = evaluate(det, TRUTH, BASE)["sensitivity"]
    t = TRUTH[k]
    after = evaluate(det + [rec_for(BASE, t.start_row, t.start_row)], TRUTH, BASE)["sensitivity"]
    assert after >= before
