"""SVG plotting helpers."""

import pytest

from ccpj.errors import ValidationError
from ccpj.plotsvg import line_plot, nice_ticks


class TestNiceTicks:
    @pytest.mark.parametrize("lo,hi,step", [
        (0.0, 10.0, 2.0),
        (0.0, 1.0, 0.2),
        (0.0, 0.47, 0.1),
        (2.0, 9.0, 2.0),
        (0.0, 100.0, 20.0),
        (-3.0, 3.0, 2.0),
    ])
    def test_step_on_1_2_5_ladder(self, lo, hi, step):
        ticks = nice_ticks(lo, hi)
        assert len(ticks) >= 2
        got = ticks[1] - ticks[0]
        assert got == pytest.approx(step)
        # ticks sit inside [lo, hi] on multiples of the step, reaching within
        # one step of each end
        assert ticks[0] >= lo - 1e-9 and ticks[-1] <= hi + 1e-9
        assert ticks[0] - lo < step and hi - ticks[-1] < step
        for t in ticks:
            assert abs(t / got - round(t / got)) < 1e-9

    def test_degenerate_range(self):
        ticks = nice_ticks(3.0, 3.0)
        assert len(ticks) >= 2 and ticks[0] <= 3.0 + 1e-12

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            nice_ticks(0.0, float("nan"))


class TestLinePlot:
    def test_basic_document(self):
        xs = [0.0, 1.0, 2.0, 3.0]
        ys = [0.0, 1.0, 0.5, 2.0]
        svg = line_plot([("speed", xs, ys)], "t / s", "v / mm/s", "demo")
        assert svg.startswith("<svg")
        assert svg.endswith("</svg>\n")
        assert "t / s" in svg and "v / mm/s" in svg and "demo" in svg
        assert "polyline" in svg
        assert "nan" not in svg.lower()

    def test_deterministic(self):
        series = [("a", [0.0, 1.0, 2.0], [0.3, 0.1, 0.7])]
        assert line_plot(series, "x", "y", "t") == line_plot(series, "x", "y", "t")

    def test_legend_only_for_multiple_series(self):
        xs = [0.0, 1.0]
        one = line_plot([("a", xs, [0.0, 1.0])], "x", "y", "t")
        two = line_plot([("a", xs, [0.0, 1.0]), ("b", xs, [1.0, 0.0])],
                        "x", "y", "t")
        assert two.count("polyline") == 2 and one.count("polyline") == 1
        assert "b</text>" in two
        assert "a</text>" not in one

    def test_marker_text(self):
        xs = [1.0, 2.0, 3.0]
        ys = [1.0, 4.0, 2.0]
        svg = line_plot([("v", xs, ys)], "x", "y", "t",
                        marker=(2.0, 4.0, "max at 2 s"))
        assert "max at 2 s" in svg
        assert "circle" in svg

    def test_empty_series_rejected(self):
        with pytest.raises(ValidationError):
            line_plot([], "x", "y", "t")
        with pytest.raises(ValidationError):
            line_plot([("a", [], [])], "x", "y", "t")
