import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rcomplexity import io as rio
from rcomplexity.core import ArchitectureProfile
from rcomplexity.estimators import PointWeights, SubintervalWeights
from rcomplexity.expression import parse
from rcomplexity.fitting import MeasurementSet, MetricKind, TermLibrary, fit_known, fit_unknown

HEADER = "label,metric,n,value,repetitions,timestamp\n"


def _roundtrip(rows):
    buf = io.StringIO()
    rio.write_dataset(rows, buf)
    buf.seek(0)
    return rio.read_dataset(buf)


@given(st.lists(st.tuples(st.integers(1, 10**9), st.floats(1e-300, 1e300)), max_size=30))
def test_dataset_round_trip_exact(pairs):
    rows = [rio.DatasetRow("k", MetricKind.TIME_SECONDS, n, v) for n, v in pairs]
    assert [(r.n, r.value) for r in _roundtrip(rows)] == pairs


def test_dataset_preserves_fields():
    rows = [rio.DatasetRow("naive", MetricKind.PEAK_MEMORY_BYTES, 64, 98304.0, 3, "2026-01-01T00:00:00")]
    assert _roundtrip(rows) == rows


def test_dataset_without_format_line():
    rows = rio.read_dataset(io.StringIO(HEADER + "a,time_s,4,0.5,1,\n"))
    assert rows == [rio.DatasetRow("a", MetricKind.TIME_SECONDS, 4, 0.5, 1, "")]


@pytest.mark.parametrize("text, match", [
    ("label,metric,n,value,repetitions,timestamp,extra\n", "unknown"),
    ("label,metric,n,value\n", "missing"),
    (HEADER + "a,cpu,4,0.5,1,\n", "metric"),
    (HEADER + "a,time_s,0,0.5,1,\n", "positive integer"),
    (HEADER + "a,time_s,4,-1,1,\n", "positive real"),
    (HEADER + "a,time_s,4.5,1,1,\n", "line 2"),
    (HEADER + "a,time_s,4\n", "fields"),
    ("# format=2\n" + HEADER, "format"),
    ("", "no header"),
])
def test_dataset_rejections(text, match):
    with pytest.raises(rio.FormatError, match=match):
        rio.read_dataset(io.StringIO(text))


def test_rows_to_measurements_filters():
    rows = [rio.DatasetRow("a", MetricKind.TIME_SECONDS, 2, 1.0),
            rio.DatasetRow("a", MetricKind.PEAK_MEMORY_BYTES, 2, 64.0),
            rio.DatasetRow("b", MetricKind.TIME_SECONDS, 3, 2.0)]
    assert rio.rows_to_measurements(rows, MetricKind.TIME_SECONDS).samples == ((2, 1.0), (3, 2.0))
    assert rio.rows_to_measurements(rows, MetricKind.TIME_SECONDS, "b").samples == ((3, 2.0),)


def test_config_grammar():
    cfg = rio.parse_config("# c\nformat = 1\n\nkey = a = b\n")
    assert cfg == {"format": "1", "key": "a = b"}
    with pytest.raises(rio.FormatError, match="duplicate"):
        rio.parse_config("a=1\na=2\n")
    with pytest.raises(rio.FormatError, match="key = value"):
        rio.parse_config("just text\n")
    with pytest.raises(rio.FormatError, match="format"):
        rio.parse_config("format=3\n")
    assert rio.parse_config(rio.dump_config({"x": 1, "y": None})) == {"format": "1", "x": "1", "y": ""}


def test_weights_files():
    points = rio.read_weights("format=1\nmode = points\nweights = 0.5, 0.25, 0.25\n")
    assert points == PointWeights((0.5, 0.25, 0.25))
    sub = rio.read_weights("mode=subintervals\nknots=1,2,4\nweights=0.5,0.5\n")
    assert sub == SubintervalWeights((1, 2, 4), (0.5, 0.5))


@pytest.mark.parametrize("text", [
    "mode=points\nweights=0.5,0.4\n",
    "mode=points\nweights=1\nknots=1,2\n",
    "mode=subintervals\nweights=1\n",
    "mode=subintervals\nknots=3,2\nweights=1\n",
    "mode=other\nweights=1\n",
    "mode=points\n",
    "mode=points\nweights=x\n",
    "mode=points\nweights=1\ncolour=red\n",
])
def test_weights_rejections(text):
    with pytest.raises(rio.FormatError):
        rio.read_weights(text)


def test_library_file():
    lib = rio.read_library("powers=1,2,3\nlog_exponents=0,1\nexp_bases=1\ngamma_exponents=0\nmax_terms=1\n")
    assert lib == TermLibrary(powers=(1, 2, 3), log_exponents=(0, 1), exp_bases=(1,),
                              gamma_exponents=(0,), max_terms=1)
    assert rio.read_library("") == TermLibrary()
    with pytest.raises(rio.FormatError):
        rio.read_library("depth=3\n")
    with pytest.raises(rio.FormatError):
        rio.read_library("max_terms=0\n")


def test_report_round_trip_known():
    n = np.arange(2, 40)
    data = MeasurementSet.from_arrays(n, 1.109e-8 * n.astype(float) ** 3 * (1 + 0.01 * np.sin(n)),
                                      architecture=ArchitectureProfile(3.2e9, "desk"))
    fit = fit_known(data, parse("n^3"))
    text = rio.dump_report(fit, "naive")
    back, label = rio.read_report(text)
    assert label == "naive"
    assert back == fit
    assert back.cycle_coefficients == fit.cycle_coefficients
    assert "cycle_coefficients=" in text and "format=1" in text


def test_report_round_trip_model_selection():
    n = np.repeat(np.arange(2, 30), 2)
    data = MeasurementSet.from_arrays(n, 5.0 * n * np.log2(n) + 1e-9 * n)
    fit = fit_unknown(data, TermLibrary(powers=(1, 2), exp_bases=(1,), gamma_exponents=(0,)))
    back, _ = rio.read_report(rio.dump_report(fit))
    assert back == fit
    assert rio.model_from_report(rio.dump_report(fit)) == fit.model


def test_report_rejections():
    with pytest.raises(rio.FormatError, match="model"):
        rio.read_report("format=1\n")
    with pytest.raises(rio.FormatError):
        rio.read_report("model=n^3\nmetric=cpu\n")
