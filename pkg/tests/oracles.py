"""Independent brute-force oracles used across the test suite.

These deliberately avoid the library's fast paths: plain Python loops,
explicit formulas, and an interior-point QP solver for the SVM dual.
"""

import numpy as np


def pairwise_min_distances(queries, references, exclude_identical_index=False):
    out = []
    for i, q in enumerate(queries):
        best = np.inf
        for j, r in enumerate(references):
            if exclude_identical_index and i == j:
                continue
            d = np.sqrt(float(np.sum((np.asarray(q) - np.asarray(r)) ** 2)))
            best = min(best, d)
        out.append(best)
    return np.array(out)


def l2_matrix_triple_loop(features, labels, num_classes):
    values = np.zeros((num_classes, num_classes))
    for i in range(num_classes):
        qi = np.flatnonzero(labels == i)
        for j in range(num_classes):
            rj = np.flatnonzero(labels == j)
            total = 0.0
            for a in qi:
                best = np.inf
                for b in rj:
                    if i == j and a == b:
                        continue
                    best = min(best, np.sqrt(float(np.sum((features[a] - features[b]) ** 2))))
                total += best
            values[i, j] = total / len(qi)
    return values


def gaussian_density(x, mean, cov):
    d = len(mean)
    diff = np.asarray(x) - np.asarray(mean)
    inv = np.linalg.inv(cov)
    det = np.linalg.det(cov)
    return float(np.exp(-0.5 * diff @ inv @ diff) / np.sqrt((2 * np.pi) ** d * det))


def qp_dual_alphas(K, y, C):
    """Brute-force soft-margin dual optimum via cvxopt interior point."""
    import cvxopt

    cvxopt.solvers.options.update(
        {"show_progress": False, "abstol": 1e-12, "reltol": 1e-12, "feastol": 1e-12, "maxiters": 300}
    )
    n = len(y)
    P = cvxopt.matrix(np.outer(y, y) * K)
    q = cvxopt.matrix(-np.ones(n))
    G = cvxopt.matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = cvxopt.matrix(np.hstack([np.zeros(n), C * np.ones(n)]))
    A = cvxopt.matrix(np.asarray(y, dtype=np.float64).reshape(1, -1))
    b = cvxopt.matrix(0.0)
    sol = cvxopt.solvers.qp(P, q, G, h, A, b)
    return np.array(sol["x"]).ravel()


def pearson_r(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    return float(np.sum(xc * yc) / np.sqrt(np.sum(xc**2) * np.sum(yc**2)))
