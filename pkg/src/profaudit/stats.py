"""Deterministic statistics engine: rank tests, Monte Carlo chi-square,
correlations, logistic regression, multi-rater agreement, and
multiple-comparison corrections.

Everything is implemented directly on top of numpy so that results are
reproducible bit-for-bit from a single 64-bit seed and every method can be
checked against small independent oracles (exhaustive enumeration, direct
formula substitution, simulate-then-fit) in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# z quantile for a two-sided 95% interval
_Z95 = 1.959963984540054

# Monte Carlo simulations are generated in fixed-size chunks; each chunk
# seeds its own counter-based generator, so the result is independent of
# how chunks are scheduled.
_MC_CHUNK = 8192


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass
class TestResult:
    """Outcome of a hypothesis test, plus the metadata needed to rerun it."""

    statistic: float
    p: float
    method: str
    n: tuple
    z: float | None = None
    correction: dict | None = None
    b: int | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "statistic": self.statistic,
            "z": self.z,
            "p": self.p,
            "n": list(self.n),
            "correction": self.correction,
            "seed": self.seed,
            "B": self.b,
        }


@dataclass
class LogisticFit:
    coefficients: list[float]
    std_errors: list[float]
    p_values: list[float]
    ci95: list[tuple[float, float]]
    accuracy: float
    mcfadden_r2: float
    converged: bool
    iterations: int
    log_likelihood: float
    null_log_likelihood: float


@dataclass
class KappaResult:
    kappa: float
    p_bar: float
    p_bar_e: float
    n_raters: int
    n_items: int
    n_categories: int


@dataclass
class BhResult:
    reject: list[bool]
    adjusted_p: list[float]
    m0_estimate: int
    q: float
    stage2_level: float | None
    single_stage_reject: list[bool] = field(default_factory=list)


def midranks(values) -> list[float]:
    """Ranks 1..n with ties replaced by the average of their positions."""
    vals = [float(v) for v in values]
    if any(math.isnan(v) for v in vals):
        raise ValueError("midranks: NaN in input")
    n = len(vals)
    order = sorted(range(n), key=lambda i: vals[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and vals[order[j + 1]] == vals[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def wilcoxon_rank_sum(x, y, continuity: bool = True) -> TestResult:
    """Two-sided Wilcoxon-Mann-Whitney rank-sum test.

    Uses the normal approximation with tie-corrected variance and a 0.5
    continuity correction. The statistic reported is the Mann-Whitney U of
    the first sample. When both samples are a single repeated value the
    test is degenerate and p = 1 is returned.
    """
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    n1, n2 = len(x), len(y)
    if n1 < 1 or n2 < 1:
        raise ValueError("wilcoxon_rank_sum: both samples must be non-empty")
    combined = x + y
    ranks = midranks(combined)
    r1 = sum(ranks[:n1])
    u1 = r1 - n1 * (n1 + 1) / 2.0
    big_n = n1 + n2

    # tie correction: sum over tie groups of t^3 - t
    counts: dict[float, int] = {}
    for v in combined:
        counts[v] = counts.get(v, 0) + 1
    tie_term = sum(t ** 3 - t for t in counts.values())

    var = n1 * n2 / 12.0 * ((big_n + 1) - tie_term / (big_n * (big_n - 1)))
    if var <= 0:
        return TestResult(statistic=u1, z=0.0, p=1.0,
                          method="wilcoxon_rank_sum", n=(n1, n2))
    mu = n1 * n2 / 2.0
    dev = u1 - mu
    if continuity:
        if dev > 0:
            dev -= 0.5
        elif dev < 0:
            dev += 0.5
    z = dev / math.sqrt(var)
    p = min(1.0, 2.0 * _norm_cdf(-abs(z)))
    return TestResult(statistic=u1, z=z, p=p,
                      method="wilcoxon_rank_sum", n=(n1, n2))


def _pearson_x2(table: np.ndarray, expected: np.ndarray) -> float:
    return float(((table - expected) ** 2 / expected).sum())


def chi2_mc(table, b: int = 10000, seed: int = 0) -> TestResult:
    """Pearson chi-square independence test with a Monte Carlo p-value.

    Simulates ``b`` tables under independence with both margins fixed by
    randomly permuting column labels against row labels, and reports
    p = (1 + #{X2_sim >= X2_obs}) / (b + 1). Chunk ``i`` of the simulation
    stream uses a Philox generator keyed with ``seed ^ i``, so the p-value
    depends only on (table, b, seed).
    """
    tab = np.asarray(table, dtype=np.int64)
    if tab.ndim != 2:
        raise ValueError("chi2_mc: table must be two-dimensional")
    if (tab < 0).any():
        raise ValueError("chi2_mc: negative counts")
    row_sums = tab.sum(axis=1)
    col_sums = tab.sum(axis=0)
    if (row_sums > 0).sum() < 2 or (col_sums > 0).sum() < 2:
        raise ValueError("chi2_mc: degenerate table (needs >=2 nonzero rows and columns)")
    total = int(tab.sum())
    expected = np.outer(row_sums, col_sums) / total
    # drop empty margins so every expected cell is positive
    keep_r = row_sums > 0
    keep_c = col_sums > 0
    tab = tab[keep_r][:, keep_c]
    expected = expected[keep_r][:, keep_c]
    row_sums = row_sums[keep_r]
    col_sums = col_sums[keep_c]
    r, c = tab.shape
    x2_obs = _pearson_x2(tab.astype(float), expected)

    col_labels = np.repeat(np.arange(c), col_sums)
    # row i occupies a contiguous slice of positions
    row_slices = []
    start = 0
    for s in row_sums:
        row_slices.append(slice(start, start + int(s)))
        start += int(s)

    ge = 0
    done = 0
    chunk_index = 0
    while done < b:
        k = min(_MC_CHUNK, b - done)
        rng = np.random.Generator(np.random.Philox(key=seed ^ chunk_index))
        perm = rng.permuted(np.tile(col_labels, (k, 1)), axis=1)
        x2_sim = np.zeros(k)
        for i in range(r):
            block = perm[:, row_slices[i]]
            for j in range(c):
                cnt = (block == j).sum(axis=1)
                x2_sim += (cnt - expected[i, j]) ** 2 / expected[i, j]
        ge += int((x2_sim >= x2_obs - 1e-9).sum())
        done += k
        chunk_index += 1

    p = (1.0 + ge) / (b + 1.0)
    return TestResult(statistic=x2_obs, p=p, method="chi2_monte_carlo",
                      n=(total,), b=b, seed=seed)


def pearson(x, y) -> float:
    """Product-moment correlation coefficient."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("pearson: inputs must be 1-d vectors of equal length")
    if len(xa) < 2:
        raise ValueError("pearson: need at least two observations")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("pearson: correlation undefined for a constant vector")
    return float(dx @ dy) / (sx * sy)


def spearman(x, y) -> float:
    """Spearman rank correlation, tie-corrected via midranks.

    With ties averaged, the Pearson correlation of the midrank vectors is
    exactly the tie-corrected coefficient.
    """
    if len(x) != len(y):
        raise ValueError("spearman: inputs must have equal length")
    if len(x) < 3:
        raise ValueError("spearman: need at least three observations")
    return pearson(midranks(x), midranks(y))


def _log_likelihood(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = np.clip(X @ beta, -35.0, 35.0)
    # log(1 + e^eta) computed stably
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def logistic_score(X, y, beta) -> np.ndarray:
    """Analytic gradient of the log-likelihood, X'(y - p)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.asarray(beta, dtype=float)
    eta = np.clip(X @ beta, -35.0, 35.0)
    p = 1.0 / (1.0 + np.exp(-eta))
    return X.T @ (y - p)


def logistic_log_likelihood(X, y, beta) -> float:
    return _log_likelihood(np.asarray(X, float), np.asarray(y, float),
                           np.asarray(beta, float))


def logistic_fit(X, y, max_iter: int = 100, tol: float = 1e-8,
                 separation_bound: float = 50.0) -> LogisticFit:
    """Maximum-likelihood logistic regression via IRLS.

    ``X`` is the full design matrix including the intercept column; ``y``
    is binary. Convergence when max |delta beta| < ``tol``. Wald standard
    errors come from the inverse observed information X'WX. Suspected
    perfect separation (|beta| drifting past ``separation_bound`` while the
    likelihood still improves) yields a result flagged converged=False
    rather than an exception.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError("logistic_fit: X must be a 2-d design matrix")
    n, k = X.shape
    if len(y) != n:
        raise ValueError("logistic_fit: X and y lengths differ")
    if n <= k:
        raise ValueError("logistic_fit: need more observations than parameters")
    if not ((y == 0) | (y == 1)).all():
        raise ValueError("logistic_fit: y must be binary")
    if y.min() == y.max():
        raise ValueError("logistic_fit: y contains a single class")

    beta = np.zeros(k)
    ll_prev = _log_likelihood(X, y, beta)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        eta = np.clip(X @ beta, -35.0, 35.0)
        p = 1.0 / (1.0 + np.exp(-eta))
        w = np.maximum(p * (1.0 - p), 1e-10)
        xtwx = X.T @ (X * w[:, None])
        score = X.T @ (y - p)
        try:
            delta = np.linalg.solve(xtwx, score)
        except np.linalg.LinAlgError as exc:
            raise ValueError("logistic_fit: singular design matrix") from exc
        beta = beta + delta
        if float(np.abs(delta).max()) < tol:
            converged = True
            break
        ll = _log_likelihood(X, y, beta)
        if float(np.abs(beta).max()) > separation_bound and ll > ll_prev:
            converged = False
            break
        ll_prev = ll

    eta = np.clip(X @ beta, -35.0, 35.0)
    p = 1.0 / (1.0 + np.exp(-eta))
    w = np.maximum(p * (1.0 - p), 1e-10)
    xtwx = X.T @ (X * w[:, None])
    try:
        cov = np.linalg.inv(xtwx)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(xtwx)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        zvals = np.where(se > 0, beta / se, np.inf)
    pvals = [min(1.0, 2.0 * _norm_cdf(-abs(float(zv)))) for zv in zvals]
    ci = [(float(b - _Z95 * s), float(b + _Z95 * s)) for b, s in zip(beta, se)]
    accuracy = float(((p >= 0.5) == (y == 1)).mean())
    ll = _log_likelihood(X, y, beta)
    pbar = float(y.mean())
    ll_null = n * (pbar * math.log(pbar) + (1 - pbar) * math.log(1 - pbar))
    mcfadden = 1.0 - ll / ll_null if ll_null != 0 else float("nan")
    return LogisticFit(
        coefficients=[float(v) for v in beta],
        std_errors=[float(v) for v in se],
        p_values=pvals,
        ci95=ci,
        accuracy=accuracy,
        mcfadden_r2=float(mcfadden),
        converged=converged,
        iterations=iterations,
        log_likelihood=ll,
        null_log_likelihood=float(ll_null),
    )


def fleiss_kappa(counts, n_raters: int) -> KappaResult:
    """Fleiss' kappa for fixed-size multi-rater categorical agreement.

    ``counts`` has one row per item and one column per category; entry
    (i, j) is the number of raters who put item i in category j. Every
    row must sum to ``n_raters``.
    """
    tab = np.asarray(counts, dtype=float)
    if tab.ndim != 2:
        raise ValueError("fleiss_kappa: counts must be two-dimensional")
    if n_raters < 2:
        raise ValueError("fleiss_kappa: need at least two raters")
    n_items, n_cats = tab.shape
    if n_items < 1:
        raise ValueError("fleiss_kappa: no items")
    row_sums = tab.sum(axis=1)
    if not np.all(row_sums == n_raters):
        raise ValueError("fleiss_kappa: every row must sum to n_raters")

    n = float(n_raters)
    p_i = ((tab ** 2).sum(axis=1) - n) / (n * (n - 1.0))
    p_bar = float(p_i.mean())
    p_j = tab.sum(axis=0) / (n_items * n)
    p_bar_e = float((p_j ** 2).sum())
    if p_bar_e >= 1.0 - 1e-15:
        raise ValueError("fleiss_kappa: undefined, all assignments in one category")
    kappa = (p_bar - p_bar_e) / (1.0 - p_bar_e)
    return KappaResult(kappa=kappa, p_bar=p_bar, p_bar_e=p_bar_e,
                       n_raters=n_raters, n_items=n_items, n_categories=n_cats)


def bonferroni(alpha: float, m: int) -> float:
    """Family-wise corrected significance level alpha / m."""
    if m < 1:
        raise ValueError("bonferroni: m must be >= 1")
    return alpha / m


def _bh_reject(pvals: np.ndarray, level: float) -> np.ndarray:
    """Linear step-up rejections at the given level."""
    m = len(pvals)
    order = np.argsort(pvals, kind="stable")
    kmax = 0
    for rank, idx in enumerate(order, start=1):
        if pvals[idx] <= rank * level / m:
            kmax = rank
    reject = np.zeros(m, dtype=bool)
    reject[order[:kmax]] = True
    return reject


def bh_adjusted(pvals) -> list[float]:
    """Single-stage Benjamini-Hochberg adjusted p-values."""
    p = np.asarray(pvals, dtype=float)
    m = len(p)
    if m == 0:
        return []
    order = np.argsort(p, kind="stable")
    adj = np.empty(m)
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, p[idx] * m / rank)
        adj[idx] = running
    return [float(v) for v in adj]


def bh_two_stage(pvals, q: float = 0.05) -> BhResult:
    """Two-stage Benjamini-Hochberg step-up correction.

    Stage 1 runs the step-up at q/(1+q) to estimate the number of true
    nulls m0 = m - r1; stage 2 reruns the step-up at q*m/m0. When stage 1
    rejects nothing the procedure stops (nothing rejected); when it
    rejects everything, everything stays rejected. Single-stage adjusted
    p-values are emitted alongside for comparison.
    """
    p = np.asarray(pvals, dtype=float)
    m = len(p)
    if m == 0:
        return BhResult(reject=[], adjusted_p=[], m0_estimate=0, q=q,
                        stage2_level=None, single_stage_reject=[])
    if ((p < 0) | (p > 1)).any():
        raise ValueError("bh_two_stage: p-values must lie in [0, 1]")
    single = _bh_reject(p, q)
    stage1 = _bh_reject(p, q / (1.0 + q))
    r1 = int(stage1.sum())
    if r1 == 0:
        reject = stage1
        m0 = m
        level2 = None
    elif r1 == m:
        reject = stage1
        m0 = 0
        level2 = None
    else:
        m0 = m - r1
        level2 = q * m / m0
        reject = _bh_reject(p, level2)
    return BhResult(
        reject=[bool(v) for v in reject],
        adjusted_p=bh_adjusted(p),
        m0_estimate=m0,
        q=q,
        stage2_level=level2,
        single_stage_reject=[bool(v) for v in single],
    )
