import math
from pathlib import Path

import numpy as np
import pytest

from ordest.dataset import PairedDataset, PairedRow, load_csv, plugin_model, summarize
from ordest.errors import DatasetError, DomainError

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.fixture
def write_csv(tmp_path):
    def write(text: str) -> Path:
        path = tmp_path / "data.csv"
        path.write_text(text)
        return path

    return write


class TestLoadCsv:
    def test_table1(self):
        """27 children with both columns and group labels."""
        ds = load_csv(FIXTURES / "table1.csv")
        assert len(ds) == 27
        assert ds.columns == ["group", "x1", "x2"]
        assert ds.rows[0] == PairedRow(group="Girl", x1=21.0, x2=20.0)
        assert {row.group for row in ds.rows} == {"Girl", "Boy"}

    def test_table2(self):
        """The dental subset has 13 rows."""
        ds = load_csv(FIXTURES / "table2.csv")
        assert len(ds) == 13
        assert ds.source.endswith("table2.csv")

    def test_group_is_optional(self, write_csv):
        """A file with only x1 and x2 loads with empty groups."""
        ds = load_csv(write_csv("x1,x2\n1.5,2\n3, 4\n"))
        np.testing.assert_array_equal(ds.x1, [1.5, 3.0])
        np.testing.assert_array_equal(ds.x2, [2.0, 4.0])
        assert ds.rows[0].group == ""

    def test_malformed_cell(self, write_csv):
        """The first bad cell is reported with its row and column."""
        with pytest.raises(DatasetError) as info:
            load_csv(write_csv("group,x1,x2\na,1,2\nb,3,oops\nc,5,x\n"))
        assert (info.value.row, info.value.column) == (2, "x2")
        assert "oops" in str(info.value)

    @pytest.mark.parametrize("cell", ["", "nan", "inf"])
    def test_missing_or_non_finite(self, write_csv, cell):
        """Empty, NaN and infinite cells are malformed."""
        with pytest.raises(DatasetError) as info:
            load_csv(write_csv(f"group,x1,x2\na,{cell},2\n"))
        assert (info.value.row, info.value.column) == (1, "x1")

    def test_missing_column(self, write_csv):
        """Both numeric columns are required."""
        with pytest.raises(DatasetError, match="x2"):
            load_csv(write_csv("group,x1\na,1\n"))

    def test_header_only(self, write_csv):
        """A header without data rows is an error."""
        with pytest.raises(DatasetError, match="no data rows"):
            load_csv(write_csv("group,x1,x2\n"))

    def test_empty_file(self, write_csv):
        """An empty file is an error."""
        with pytest.raises(DatasetError, match="empty"):
            load_csv(write_csv(""))

    def test_missing_file(self, tmp_path):
        """A missing path is a dataset error, not an OSError."""
        with pytest.raises(DatasetError, match="cannot read"):
            load_csv(tmp_path / "absent.csv")


class TestSummarize:
    def test_table1(self):
        """Means, n-1 variances, their average and the correlation."""
        summary = summarize(load_csv(FIXTURES / "table1.csv"))
        assert summary.n == 27
        assert summary.mean1 == pytest.approx(22.185185, abs=1e-6)
        assert summary.mean2 == pytest.approx(23.166667, abs=1e-6)
        assert summary.var1 == pytest.approx(5.925926, abs=1e-6)
        assert summary.var2 == pytest.approx(4.653846, abs=1e-6)
        assert summary.pooled_variance == pytest.approx(5.289886, abs=1e-6)
        assert summary.correlation == pytest.approx(0.625583, abs=1e-6)
        assert not summary.degenerate

    def test_table2_means(self):
        """The dental subset means that drive the published estimates."""
        summary = summarize(load_csv(FIXTURES / "table2.csv"))
        assert summary.mean1 == pytest.approx(23.076923, abs=1e-6)
        assert summary.mean2 == pytest.approx(22.653846, abs=1e-6)

    def test_constant_column(self):
        """A constant column leaves the correlation undefined."""
        rows = [PairedRow(group="", x1=1.0, x2=x2) for x2 in (1.0, 2.0, 4.0)]
        summary = summarize(PairedDataset(rows=rows, columns=["x1", "x2"]))
        assert summary.correlation is None
        assert summary.degenerate
        assert summary.var1 == 0.0

    def test_single_row(self):
        """Variances need two rows."""
        ds = PairedDataset(rows=[PairedRow(group="", x1=1.0, x2=2.0)], columns=["x1", "x2"])
        with pytest.raises(DatasetError):
            summarize(ds)


class TestPluginModel:
    def test_dental_values(self):
        """sigma = sqrt(sigma^2) and tau = sigma sqrt(2 (1 - rho))."""
        model = plugin_model(0.418, 0.626)
        assert model.sigma == pytest.approx(math.sqrt(0.418))
        assert model.tau == pytest.approx(0.559164, abs=1e-6)

    @pytest.mark.parametrize(
        "sigma2, rho", [(0.0, 0.5), (-1.0, 0.5), (math.nan, 0.5), (1.0, 1.0), (1.0, -1.5)]
    )
    def test_invalid(self, sigma2, rho):
        """sigma^2 > 0 and |rho| < 1 are required."""
        with pytest.raises(DomainError):
            plugin_model(sigma2, rho)
