"""Input validation helpers shared by the estimator facade and the service."""

from __future__ import annotations

import pandas as pd

from . import tabular


def check_dataset(X, schema_hints=None):
    """Coerce a DataFrame or Dataset into a Dataset, validating shape."""
    if isinstance(X, tabular.Dataset):
        return X
    if isinstance(X, pd.DataFrame):
        if X.shape[0] == 0:
            raise ValueError("empty data")
        return tabular.from_dataframe(X, schema_hints=schema_hints)
    raise TypeError(f"expected DataFrame or Dataset, got {type(X).__name__}")


def check_dimension(d, name):
    if d.column(name).kind != tabular.DIMENSION:
        raise ValueError(f"{name} is not a dimension")
    return name


def check_measure(d, name):
    if d.column(name).kind != tabular.MEASURE:
        raise ValueError(f"{name} is not a measure")
    return name


def check_fitted(estimator, attribute):
    from sklearn.exceptions import NotFittedError

    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )
