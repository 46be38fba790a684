"""Pure-numpy Gower kNN imputation kernel (fallback backend).

Reference semantics for the compiled twin in ``_gower_cy.pyx``; the two must
produce bit-identical output.
"""

from __future__ import annotations

import numpy as np


def gower_row_distances(d_vals, d_obs, r_vals, r_obs, nom, inv_range):
    """Distances from one recipient row to every donor row.

    Returns (dist, comparable): dist is float64 per donor (garbage where not
    comparable), comparable marks donors sharing at least one usable column.
    """
    both = (d_obs.astype(bool)) & (r_obs.astype(bool))      # (nd, p)
    num = ~nom.astype(bool)
    diff = np.abs(d_vals - r_vals) * inv_range
    np.minimum(diff, 1.0, out=diff)
    dissim = np.where(num, diff, (d_vals != r_vals).astype(np.float64))
    dissim = np.where(both, dissim, 0.0)
    usable = both.sum(axis=1)
    comparable = usable > 0
    dist = np.zeros(len(d_vals))
    # cumsum = strictly left-to-right summation, bit-identical to the C loop
    total = dissim.cumsum(axis=1)[:, -1] if dissim.shape[1] else np.zeros(len(d_vals))
    np.divide(total, usable, out=dist, where=comparable)
    return dist, comparable


def knn_impute_grid(d_vals, d_obs, r_vals, r_obs, nom, nlev, inv_range,
                    miss_rows, miss_cols, ks):
    """Impute every missing recipient cell for every k in ``ks``.

    Donor eligibility for cell (r, c): the donor has column c observed and is
    Gower-comparable to row r. Donors are ranked by (distance, donor index);
    numeric cells take the mean of the k nearest eligible donors, nominal
    cells the mode (ties to the lowest level code). Fewer than k eligible
    donors means all of them are used; zero means the fallback flag is set
    and the caller substitutes the mean/mode value.

    Returns (imputed, fallback): imputed is (len(ks), n_missing) float64,
    fallback a bool vector over missing cells.
    """
    ks = np.asarray(ks, dtype=np.int64)
    nk, nmiss = len(ks), len(miss_rows)
    imputed = np.zeros((nk, nmiss))
    fallback = np.zeros(nmiss, dtype=bool)
    kmax = int(ks.max()) if nk else 0

    order_by_row: dict[int, np.ndarray] = {}
    for m in range(nmiss):
        r, c = int(miss_rows[m]), int(miss_cols[m])
        if r not in order_by_row:
            dist, comparable = gower_row_distances(
                d_vals, d_obs, r_vals[r], r_obs[r], nom, inv_range)
            idx = np.flatnonzero(comparable)
            # stable sort on distance = tie-break by ascending donor index
            order_by_row[r] = idx[np.argsort(dist[idx], kind="stable")]
        order = order_by_row[r]
        eligible = order[d_obs[order, c].astype(bool)]
        if len(eligible) == 0:
            fallback[m] = True
            continue
        vals = d_vals[eligible, c]
        if nom[c]:
            counts = np.zeros(int(nlev[c]), dtype=np.int64)
            take = 0
            for ki, k in enumerate(ks):
                stop = min(int(k), len(eligible))
                while take < stop:
                    counts[int(vals[take])] += 1
                    take += 1
                imputed[ki, m] = float(np.argmax(counts))
        else:
            csum = np.cumsum(vals[:kmax])
            for ki, k in enumerate(ks):
                stop = min(int(k), len(eligible))
                imputed[ki, m] = csum[stop - 1] / stop
    return imputed, fallback
