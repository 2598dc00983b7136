import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmcmcbayes.analysis import (
    Overlap,
    compare_dmrs,
    format_summary,
    plot_dmr_region,
    site_means,
    summarize_dmrs,
)
from mmcmcbayes.engine import DmrRecord
from mmcmcbayes.errors import MmcmcError, PairMismatchError, UnknownCpGError
from mmcmcbayes.io import MethylationMatrix

N_ROWS = 60
INDEX = MethylationMatrix([f"cg{i:08d}" for i in range(N_ROWS)], ["6"] * N_ROWS, np.zeros((N_ROWS, 1)), ["s"])


def rec(start, end, bf=2.0, stage=1, chrom="6"):
    return DmrRecord(chrom, INDEX.cpg_ids[start], INDEX.cpg_ids[end], end - start + 1, bf, stage)


def series(svg):
    groups = re.findall(r'<g class="series" data-group="(\w+)" data-values="([^"]*)">', svg)
    return {name: np.array([float(v) for v in vals.split(",")]) for name, vals in groups}


# summarize


def test_summary_single_record():
    s = summarize_dmrs([rec(0, 9, bf=1.2)])
    assert s.n_dmrs == 1
    assert set(s.size_stats.values()) == {10.0}
    assert set(s.decision_stats.values()) == {1.2}


def test_summary_empty():
    s = summarize_dmrs([])
    assert s.n_dmrs == 0 and s.by_chromosome == {} and s.by_stage == {}
    assert "Number of DMRs: 0" in format_summary(s)


def test_summary_reproduces_published_size_block():
    # 659 regions of 14 CpGs and 855 of 15 give the published six numbers
    recs = [DmrRecord("6", "a", "b", 14, 1.1, 3)] * 659 + [DmrRecord("6", "a", "b", 15, 1.1, 3)] * 855
    s = summarize_dmrs(recs)
    assert s.n_dmrs == 1514
    got = [round(s.size_stats[k], 3) for k in ("min", "q1", "median", "mean", "q3", "max")]
    assert got == [14.0, 14.0, 15.0, 14.565, 15.0, 15.0]
    assert s.by_chromosome == {"6": 1514} and s.by_stage == {3: 1514}
    text = format_summary(s)
    assert "Number of DMRs: 1514" in text
    assert "14.000  14.000  15.000  14.565  15.000  15.000" in text


def test_summary_quartiles_interpolate():
    s = summarize_dmrs([rec(0, k - 1) for k in (1, 2, 3, 4)])
    assert s.size_stats["q1"] == 1.75 and s.size_stats["q3"] == 3.25


def test_summary_groups():
    s = summarize_dmrs([rec(0, 1, stage=2), rec(2, 3, stage=1, chrom="X"), rec(4, 5, stage=2)])
    assert s.by_chromosome == {"6": 2, "X": 1}
    assert list(s.by_stage.items()) == [(1, 1), (2, 2)]


@given(st.lists(st.tuples(st.integers(1, 500), st.floats(0.01, 100)), max_size=30))
def test_summary_count_invariant(rows):
    recs = [DmrRecord("1", "a", "b", n, bf, 1) for n, bf in rows]
    s = summarize_dmrs(recs)
    assert s.n_dmrs == len(recs) == sum(s.by_chromosome.values())


# compare


def test_self_overlap_is_full():
    table = [rec(0, 9), rec(20, 29), rec(40, 40)]
    assert compare_dmrs(table, table, INDEX) == [Overlap(i, i, 100.0) for i in range(3)]


def test_disjoint_tables_empty():
    assert compare_dmrs([rec(0, 9)], [rec(10, 19)], INDEX) == []


def test_partial_overlap_jaccard():
    (o,) = compare_dmrs([rec(0, 9)], [rec(5, 14)], INDEX)
    assert o.overlap_percent == pytest.approx(100 * 5 / 15)


def test_unknown_boundary():
    bad = DmrRecord("6", "cg99999999", INDEX.cpg_ids[3], 4, 2.0, 1)
    with pytest.raises(UnknownCpGError):
        compare_dmrs([bad], [rec(0, 3)], INDEX)


intervals = st.lists(
    st.tuples(st.integers(0, N_ROWS - 1), st.integers(0, 15)).map(lambda t: (t[0], min(N_ROWS - 1, t[0] + t[1]))),
    max_size=6,
)


@given(intervals, intervals)
def test_compare_symmetric(a, b):
    ta, tb = [rec(s, e) for s, e in a], [rec(s, e) for s, e in b]
    ab = {(o.index_a, o.index_b): o.overlap_percent for o in compare_dmrs(ta, tb, INDEX)}
    ba = {(o.index_b, o.index_a): o.overlap_percent for o in compare_dmrs(tb, ta, INDEX)}
    assert ab == ba
    for (i, j), pct in ab.items():
        assert 0 < pct <= 100
        assert (pct == 100.0) == (a[i] == b[j])


# plot


@pytest.fixture
def plot_pair():
    rng = np.random.default_rng(8)
    c = rng.normal(1.0, 1.0, (30, 4))
    n = rng.normal(0.0, 1.0, (30, 3))
    c[12, 1] = np.nan
    ids = [f"cg{i:08d}" for i in range(30)]
    return (
        MethylationMatrix(ids, ["6"] * 30, c, [f"c{j}" for j in range(4)]),
        MethylationMatrix(ids, ["6"] * 30, n, [f"n{j}" for j in range(3)]),
    )


def test_plot_two_series_of_region_length(plot_pair):
    c, n = plot_pair
    table = [rec(0, 4), rec(10, 24)]
    svg = plot_dmr_region(table, c, n, 2)
    s = series(svg)
    assert sorted(s) == ["cancer", "normal"]
    assert all(len(v) == 15 for v in s.values())
    assert "<title>Chr 6: cg00000010 - cg00000024</title>" in svg
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_plot_series_are_site_means(plot_pair):
    c, n = plot_pair
    s = series(plot_dmr_region([rec(10, 24)], c, n, 1))
    np.testing.assert_allclose(s["cancer"], site_means(c, 10, 24), rtol=1e-5)
    np.testing.assert_allclose(s["normal"], site_means(n, 10, 24), rtol=1e-5)
    assert s["cancer"][2] == pytest.approx(np.nanmean(c.values[12]), rel=1e-5)


def test_plot_identical_groups_coincide(plot_pair):
    c, _ = plot_pair
    s = series(plot_dmr_region([rec(3, 8)], c, c, 1))
    np.testing.assert_array_equal(s["cancer"], s["normal"])


def test_plot_single_cpg(plot_pair):
    c, n = plot_pair
    s = series(plot_dmr_region([rec(7, 7)], c, n, 1))
    assert len(s["cancer"]) == len(s["normal"]) == 1


def test_plot_all_missing_site():
    vals = np.array([[np.nan, np.nan], [1.0, 2.0]])
    m = MethylationMatrix(["cg00000000", "cg00000001"], ["6", "6"], vals, ["a", "b"])
    s = series(plot_dmr_region([rec(0, 1)], m, m, 1))
    assert np.isnan(s["cancer"][0]) and s["cancer"][1] == 1.5


@pytest.mark.parametrize("index", [0, 3])
def test_plot_index_out_of_range(plot_pair, index):
    c, n = plot_pair
    with pytest.raises(MmcmcError, match="out of range"):
        plot_dmr_region([rec(0, 1), rec(2, 3)], c, n, index)


def test_plot_requires_valid_pair(plot_pair):
    c, _ = plot_pair
    other = MethylationMatrix(list(reversed(c.cpg_ids)), c.chromosomes, c.values, c.sample_names)
    with pytest.raises(PairMismatchError):
        plot_dmr_region([rec(0, 1)], c, other, 1)
