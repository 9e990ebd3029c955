import numpy as np
import polars as pl
import pytest

import mvac as mv


@pytest.fixture(autouse=True)
def setup(doctest_namespace: dict) -> None:
    doctest_namespace["np"] = np
    doctest_namespace["pl"] = pl
    doctest_namespace["mv"] = mv
