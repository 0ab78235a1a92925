"""Conditional-independence testing over categorical columns.

G-squared (likelihood ratio) by default, Pearson chi-squared optional.  The
conditional test stratifies on the joint configuration of the conditioning
set and sums statistic and degrees of freedom over non-empty strata.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

DEFAULT_ALPHA = 0.05
MIN_AVG_CELL_COUNT = 5.0

# counts every test issued; lets callers verify that query-time paths never
# touch the statistical engine
TEST_COUNTER = {"count": 0}


@dataclass(frozen=True)
class CiResult:
    statistic: float
    p_value: float
    independent: bool
    dof: int
    insufficient_data: bool


def _stratum_statistic(table, method):
    """Statistic and dof for one two-way table, dropping empty rows/cols."""
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    r, c = table.shape
    if r < 2 or c < 2:
        return 0.0, 0
    total = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / total
    if method == "gsq":
        with np.errstate(divide="ignore", invalid="ignore"):
            term = table * np.log(table / expected)
        stat = 2.0 * term[table > 0].sum()
    elif method == "chisq":
        stat = ((table - expected) ** 2 / expected).sum()
    else:
        raise ValueError(f"unknown method: {method}")
    return float(max(stat, 0.0)), (r - 1) * (c - 1)


def ci_test(d, x, y, z=(), alpha=DEFAULT_ALPHA, method="gsq", insufficient_is_independent=True):
    """Test X ⊥ Y | Z on categorical (or pre-discretized) columns.

    When the average cell count of the full contingency layout drops below
    five the result is flagged ``insufficient_data`` and the configured
    degenerate policy decides independence (default: declare independent).
    """
    z = sorted(set(z))
    if x == y:
        raise ValueError("x and y must differ")
    if x in z or y in z:
        raise ValueError("x and y must not appear in z")
    TEST_COUNTER["count"] += 1

    cx = d.codes(x)
    cy = d.codes(y)
    nx = d.column(x).cardinality
    ny = d.column(y).cardinality
    n = d.row_count

    if z:
        stratum = np.zeros(n, dtype=np.int64)
        for col in z:
            stratum = stratum * d.column(col).cardinality + d.codes(col)
        strata, stratum_idx = np.unique(stratum, return_inverse=True)
        n_strata = len(strata)
        joint = (stratum_idx * nx + cx) * ny + cy
        counts = np.bincount(joint, minlength=n_strata * nx * ny)
        tables = counts.reshape(n_strata, nx, ny)
    else:
        n_strata = 1
        joint = cx * ny + cy
        counts = np.bincount(joint, minlength=nx * ny)
        tables = counts.reshape(1, nx, ny)

    method = {"gsq": "gsq", "g2": "gsq", "chisq": "chisq", "chi2": "chisq"}.get(method, method)
    stat = 0.0
    dof = 0
    for t in tables:
        s, df = _stratum_statistic(t, method)
        stat += s
        dof += df

    p_value = float(chi2.sf(stat, dof)) if dof > 0 else 1.0
    avg_cell = n / float(nx * ny * n_strata)
    insufficient = avg_cell < MIN_AVG_CELL_COUNT
    if insufficient:
        independent = bool(insufficient_is_independent)
    else:
        independent = p_value > alpha
    return CiResult(
        statistic=float(stat),
        p_value=p_value,
        independent=independent,
        dof=int(dof),
        insufficient_data=insufficient,
    )
