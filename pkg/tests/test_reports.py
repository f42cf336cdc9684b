import pandas as pd
import pytest

from BackEnd_01_ARC_Core import ARCInputError
from BackEnd_02_ARC_Analysis import regret_curve
from BackEnd_03_OneWay_Trading import closed_form_curve, simulate
from BackEnd_06_Reports import (
    fmt,
    plot_data_path,
    read_curve_csv,
    read_price_path,
    read_trace_csv,
    write_curve_csv,
    write_plot_data,
    write_trace_csv,
)


def test_fmt_six_decimals():
    assert fmt(2 / 3) == "0.666667"
    assert fmt(-2) == "-2.000000"


def test_curve_csv_round_trip(tmp_path, capacity):
    curve = regret_curve(capacity, [0.0, 1 / 3, 1.0])
    path = write_curve_csv(curve, tmp_path / "out" / "curve.csv")
    assert path.read_text().splitlines()[0] == "beta,value,policy_id"
    back = read_curve_csv(path)
    assert [s.beta for s in back.samples] == [s.beta for s in curve.samples]
    assert [s.value for s in back.samples] == [s.value for s in curve.samples]
    assert [s.policy_id for s in back.samples] == [s.policy_id for s in curve.samples]


def test_curve_csv_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("b,v,id\n0,1,x\n")
    with pytest.raises(ARCInputError):
        read_curve_csv(path)


def test_plot_data(tmp_path, classic):
    curve = regret_curve(classic, [0.0, 0.5, 1.0])
    path = write_plot_data(curve, plot_data_path(tmp_path / "curve.csv"))
    assert path.suffix == ".dat"
    assert path.read_text().splitlines() == ["0.0 -2.0", "0.5 -0.5", "1.0 1.0"]


def test_plot_data_keeps_full_precision(tmp_path, market):
    curve = closed_form_curve(market, [1 / 3, 2 / 3, 1.0])
    path = write_plot_data(curve, tmp_path / "oneway.dat")
    frame = pd.read_csv(path, sep=" ", header=None, float_precision="round_trip")
    assert frame.shape == (3, 2)
    assert frame[0].tolist() == [1 / 3, 2 / 3, 1.0]
    assert frame[1].tolist() == list(curve.values)


def test_trace_round_trip(tmp_path, market):
    result = simulate([1.5, 1.0], 1.0, market)
    frame = read_trace_csv(write_trace_csv(result, tmp_path / "trace.csv"))
    assert frame["sold"].tolist() == pytest.approx([0.5, 0.5])


class TestPricePath:
    def test_read(self, tmp_path, market):
        path = tmp_path / "path.txt"
        path.write_text("1.5\n1\n")
        assert read_price_path(path, market) == [1.5, 1.0]

    @pytest.mark.parametrize(
        "text, line",
        [("2.5\n1\n", 1), ("1.5\nabc\n", 2), ("1.5\n", 2), ("1.5\n1\n1\n", 3)],
    )
    def test_errors(self, tmp_path, market, text, line):
        path = tmp_path / "path.txt"
        path.write_text(text)
        with pytest.raises(ARCInputError, match=f"line {line}"):
            read_price_path(path, market)
