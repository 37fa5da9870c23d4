"""Endurance metrics, histogram export, and wear binning."""

import json

import numpy as np
import pytest

from nvmwear import (
    MetricsError,
    MetricsReport,
    achieved_endurance,
    endurance_improvement,
    export_histogram,
    lifetime_improvement,
    log2_bins,
    normalized_endurance,
    parse_histogram_csv,
    write_overhead,
)


def test_ae_uniform_is_one():
    assert achieved_endurance([4, 4, 4, 4]) == 1.0


def test_ae_single_hot_line():
    assert achieved_endurance([0, 0, 0, 8]) == 0.25


def test_ae_scale_invariant():
    rng = np.random.default_rng(11)
    counts = rng.integers(1, 1000, 256)
    assert achieved_endurance(counts) == pytest.approx(
        achieved_endurance(counts * 7))


def test_ae_empty_and_all_zero_rejected():
    with pytest.raises(MetricsError):
        achieved_endurance([])
    with pytest.raises(MetricsError):
        achieved_endurance([0, 0, 0])


def test_ae_improves_as_peak_spreads():
    # moving writes off the hottest line onto a cold one raises AE
    assert achieved_endurance([10, 2, 0, 0]) < achieved_endurance([8, 2, 2, 0])


def test_write_overhead_example():
    assert write_overhead(1000, 1051) == pytest.approx(0.051)


def test_write_overhead_zero_when_equal():
    assert write_overhead(500, 500) == 0.0


def test_write_overhead_rejects_bad_inputs():
    with pytest.raises(MetricsError):
        write_overhead(0, 10)
    with pytest.raises(MetricsError):
        write_overhead(100, 99)


def test_endurance_improvement_doubles():
    assert endurance_improvement(0.2, 0.1) == pytest.approx(2.0)
    assert endurance_improvement(0.4, 0.4) == pytest.approx(1.0)
    with pytest.raises(MetricsError):
        endurance_improvement(0.5, 0.0)


def test_normalized_endurance_examples():
    assert normalized_endurance(0.788, 0.0047) == pytest.approx(0.78432, abs=1e-4)
    assert normalized_endurance(0.746, 1.1159) == pytest.approx(0.35256, abs=1e-4)


def test_lifetime_improvement_discounts_overhead():
    assert lifetime_improvement(2.0, 1.0) == pytest.approx(1.0)
    assert lifetime_improvement(3.0, 0.5) == pytest.approx(2.0)
    # overhead-free leveling passes improvement straight through
    assert lifetime_improvement(5.0, 0.0) == pytest.approx(5.0)


def test_report_holds_optional_fields():
    rep = MetricsReport(ae=0.5, wo=0.1, ne=0.4545)
    assert rep.ei is None and rep.li is None and rep.totals is None


def test_histogram_csv_round_trip():
    counts = {0: 3, 3: 7, 4: 1}
    blob = export_histogram(counts, fmt="csv")
    lines = blob.decode().splitlines()
    assert lines[0] == "line_index,count"
    assert lines[1] == "0,3"
    assert lines[-1] == "#total,11"
    assert parse_histogram_csv(blob) == counts


def test_histogram_json_shape():
    blob = export_histogram({0: 2, 1: 5}, fmt="json")
    doc = json.loads(blob)
    assert doc["lines"] == [[0, 2], [1, 5]]
    assert doc["totals"] == {"lines": 2, "writes": 7}


def test_histogram_unknown_format_rejected():
    with pytest.raises(MetricsError):
        export_histogram({0: 1}, fmt="xml")


def test_log2_bins_places_counts():
    # zero counts get their own bin; otherwise bin = bit_length(count)
    bins = log2_bins([0, 1, 2, 3, 4, 1000])
    assert bins[0] == 1          # the single zero
    assert bins[1] == 1          # count 1
    assert bins[2] == 2          # counts 2 and 3
    assert bins[3] == 1          # count 4
    assert bins[10] == 1         # 512 <= 1000 < 1024
    assert sum(bins.values()) == 6


def test_log2_bins_total_preserved():
    rng = np.random.default_rng(4)
    counts = rng.integers(0, 10**6, 500)
    bins = log2_bins(counts)
    assert sum(bins.values()) == 500
