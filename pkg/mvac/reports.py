"""The `mvac` DataFrame namespace: reproducible CSV output and plot specifications.

Every table mvac emits (step logs, diagnostic reports, sweep summaries, selftest results)
is a `pl.DataFrame` and is written through this namespace.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import polars as pl
import polars.selectors as cs
from polars.api import register_dataframe_namespace

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import IO

    import altair as alt

__all__ = [
    "FLOAT_PRECISION",
    "ReportFrameNameSpace",
]

FLOAT_PRECISION = 16
"""Digits after the point in scientific notation, i.e. 17 significant digits."""


@register_dataframe_namespace("mvac")
class ReportFrameNameSpace:
    def __init__(self, df: pl.DataFrame) -> None:
        self._df = df

    def write_csv(self, path: Path | str | IO[str]) -> Path | IO[str]:
        """Write the frame with a header and floats that read back exactly.

        Examples:
            >>> import io
            >>> df = pl.DataFrame({"t": [0.1], "E": [1.0 / 3.0]})
            >>> text = df.mvac.write_csv(io.StringIO()).getvalue()
            >>> text.splitlines()[0]
            't,E'
            >>> pl.read_csv(io.StringIO(text))["E"][0] == 1.0 / 3.0
            True
        """
        target = Path(path) if isinstance(path, str) else path
        self._df.write_csv(target, float_scientific=True, float_precision=FLOAT_PRECISION)
        return target

    def plot(self, x: str, y: str | Sequence[str], *, title: str | None = None) -> alt.Chart:
        """Line chart of one or more columns against `x`.

        Polars does not implement plotting logic itself; this defers to
        [`Altair`](https://altair-viz.github.io/). Several `y` columns are drawn as one series
        each, colored by column name.

        Examples:
            >>> df = pl.DataFrame({"t": [0.0, 1.0], "a": [1.0, 2.0], "b": [0.5, 0.25]})
            >>> chart = df.mvac.plot("t", ["a", "b"], title="demo")
            >>> chart.to_dict()["mark"]["type"]
            'line'
        """
        import altair as alt

        columns = [y] if isinstance(y, str) else list(y)
        long = (
            self._df.select(x, *columns)
            .with_columns(cs.float().fill_nan(None))
            .unpivot(index=x, on=columns, variable_name="series", value_name="value")
        )
        chart = (
            long.pipe(alt.Chart)
            .mark_line(point=True)
            .encode(
                x=alt.X(f"{x}:Q"),
                y=alt.Y("value:Q"),
                color=alt.Color("series:N"),
            )
        )
        return chart.properties(title=title) if title is not None else chart

    def write_plot_script(
        self, path: Path | str, x: str, y: str | Sequence[str], *, title: str | None = None
    ) -> Path:
        """Save the Vega-Lite specification of `plot(x, y)` to `path`."""
        path = Path(path)
        path.write_text(self.plot(x, y, title=title).to_json(indent=2), encoding="utf-8")
        return path
