//! Stationarity testing, correlogram-based lag selection, and the Wilcoxon
//! signed-rank model comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{difference, PreprocessRecord, Subseries};

/// Two-sided normal threshold at the 95% confidence level.
pub const Z_95: f64 = 1.96;
/// Two-sided normal threshold at the 99% confidence level (the default).
pub const Z_99: f64 = 2.576;

/// Asymptotic Dickey-Fuller critical values for the constant-only regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfCriticalValues<T> {
    pub pct1: T,
    pub pct5: T,
    pub pct10: T,
}

impl<T: Scalar> Default for DfCriticalValues<T> {
    fn default() -> Self {
        DfCriticalValues {
            pct1: T::from_f64_lit(-3.43),
            pct5: T::from_f64_lit(-2.86),
            pct10: T::from_f64_lit(-2.57),
        }
    }
}

/// Outcome of the augmented Dickey-Fuller regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult<T> {
    /// t-ratio on the lagged-level coefficient.
    pub statistic: T,
    pub lags_used: usize,
    pub critical_values: DfCriticalValues<T>,
    /// Unit root rejected at the 5% level.
    pub stationary: bool,
}

/// Sample autocorrelations, partial autocorrelations and the confidence band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelogramResult<T> {
    /// Indexed by lag 0..=max_lag; `acf[0] == 1`.
    pub acf: Vec<T>,
    /// Indexed by lag 1..=max_lag (entry `k-1` is lag `k`).
    pub pacf: Vec<T>,
    /// Half-width of the +-1.96/sqrt(n) band.
    pub band: T,
}

/// Direction of a signed-rank comparison between two models' absolute errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WsrtSign {
    /// First model's errors significantly smaller.
    Better,
    Same,
    /// First model's errors significantly larger.
    Worse,
}

impl WsrtSign {
    pub fn symbol(&self) -> &'static str {
        match self {
            WsrtSign::Better => "+",
            WsrtSign::Same => "=",
            WsrtSign::Worse => "-",
        }
    }
}

impl std::fmt::Display for WsrtSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Wilcoxon signed-rank outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WsrtResult<T> {
    pub z: T,
    /// At the 99% level used throughout.
    pub significant: bool,
    pub sign: WsrtSign,
}

impl<T: Scalar> WsrtResult<T> {
    /// Decision at an arbitrary two-sided threshold (e.g. [`Z_95`]).
    pub fn significant_at(&self, threshold: f64) -> bool {
        self.z.abs() > T::from_f64_lit(threshold)
    }
}

/// Ordinary least squares via normal equations with partial pivoting.
/// Returns the coefficients and the standard error of each.
fn ols<T: Scalar>(rows: &[Vec<T>], y: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let m = rows.len();
    let k = rows[0].len();
    if m <= k {
        return Err(Error::Numeric(format!(
            "least squares needs more rows ({m}) than coefficients ({k})"
        )));
    }
    let mut xtx = vec![vec![T::zero(); k]; k];
    let mut xty = vec![T::zero(); k];
    for (row, &target) in rows.iter().zip(y) {
        for i in 0..k {
            for j in i..k {
                xtx[i][j] = xtx[i][j] + row[i] * row[j];
            }
            xty[i] = xty[i] + row[i] * target;
        }
    }
    for i in 0..k {
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
    }

    let beta = solve(xtx.clone(), xty)?;

    let mut rss = T::zero();
    for (row, &target) in rows.iter().zip(y) {
        let fit: T = row.iter().zip(&beta).map(|(&x, &b)| x * b).sum();
        let r = target - fit;
        rss = rss + r * r;
    }
    let sigma2 = rss / T::from_usize_lit(m - k);

    // diagonal of (X'X)^-1 column by column
    let mut se = Vec::with_capacity(k);
    for j in 0..k {
        let mut e = vec![T::zero(); k];
        e[j] = T::one();
        let col = solve(xtx.clone(), e)?;
        let var = sigma2 * col[j];
        if var < T::zero() {
            return Err(Error::Numeric("negative coefficient variance".into()));
        }
        se.push(var.sqrt());
    }
    Ok((beta, se))
}

/// Gaussian elimination with partial pivoting.
fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let k = b.len();
    for i in 0..k {
        let mut piv = i;
        for r in (i + 1)..k {
            if a[r][i].abs() > a[piv][i].abs() {
                piv = r;
            }
        }
        if a[piv][i].abs() < T::from_f64_lit(1e-300) {
            return Err(Error::Numeric("singular regression matrix".into()));
        }
        a.swap(i, piv);
        b.swap(i, piv);
        for r in (i + 1)..k {
            let f = a[r][i] / a[i][i];
            for c in i..k {
                a[r][c] = a[r][c] - f * a[i][c];
            }
            b[r] = b[r] - f * b[i];
        }
    }
    let mut x = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut acc = b[i];
        for c in (i + 1)..k {
            acc = acc - a[i][c] * x[c];
        }
        x[i] = acc / a[i][i];
    }
    Ok(x)
}

/// Augmented Dickey-Fuller unit-root test with constant, no trend.
///
/// Regresses the first difference on (constant, lagged level, lagged
/// differences) with `floor((n-1)^(1/3))` augmentation lags. The reported
/// statistic is the t-ratio on the lagged level, compared against the
/// asymptotic constant-case critical values.
pub fn adf_test<T: Scalar>(s: &Subseries<T>) -> Result<AdfResult<T>> {
    let n = s.len();
    if n < 20 {
        return Err(Error::SeriesTooShort { need: 20, got: n });
    }
    let p = ((n - 1) as f64).powf(1.0 / 3.0).floor() as usize;
    let y = &s.values;
    let dy: Vec<T> = y.windows(2).map(|w| w[1] - w[0]).collect();

    // rows for t = p+1 .. n-1 (0-based time index into y)
    let m = n - 1 - p;
    let mut rows = Vec::with_capacity(m);
    let mut resp = Vec::with_capacity(m);
    for t in (p + 1)..n {
        let mut row = Vec::with_capacity(p + 2);
        row.push(T::one());
        row.push(y[t - 1]);
        for i in 1..=p {
            row.push(dy[t - i - 1]);
        }
        rows.push(row);
        resp.push(dy[t - 1]);
    }

    let (beta, se) = ols(&rows, &resp)?;
    if se[1] <= T::zero() {
        return Err(Error::Numeric("zero standard error on lagged level".into()));
    }
    let statistic = beta[1] / se[1];
    let critical_values = DfCriticalValues::default();
    Ok(AdfResult {
        statistic,
        lags_used: p,
        stationary: statistic < critical_values.pct5,
        critical_values,
    })
}

/// Sample ACF and PACF up to `max_lag`, with the white-noise confidence band.
///
/// The ACF uses the biased autocovariance normalized by lag 0; the PACF comes
/// from the Durbin-Levinson recursion on those autocorrelations.
pub fn correlogram<T: Scalar>(s: &Subseries<T>, max_lag: usize) -> Result<CorrelogramResult<T>> {
    let n = s.len();
    if max_lag < 1 {
        return Err(Error::InvalidParameter {
            name: "max_lag",
            reason: "must be at least 1".into(),
        });
    }
    if max_lag >= n / 2 {
        return Err(Error::InvalidParameter {
            name: "max_lag",
            reason: format!("{max_lag} must be below half the length {n}"),
        });
    }
    let nf = T::from_usize_lit(n);
    let mean = s.values.iter().copied().sum::<T>() / nf;
    let c0: T = s
        .values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<T>()
        / nf;
    if c0 <= T::zero() {
        return Err(Error::DegenerateScale {
            kind: "autocorrelation",
            reason: "series has zero variance".into(),
        });
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    acf.push(T::one());
    for k in 1..=max_lag {
        let ck: T = (k..n)
            .map(|t| (s.values[t] - mean) * (s.values[t - k] - mean))
            .sum::<T>()
            / nf;
        acf.push(ck / c0);
    }

    let pacf = durbin_levinson(&acf);
    let band = T::from_f64_lit(Z_95) / nf.sqrt();
    Ok(CorrelogramResult { acf, pacf, band })
}

/// Durbin-Levinson recursion; returns the partial autocorrelations for lags
/// 1..=L given autocorrelations for lags 0..=L.
fn durbin_levinson<T: Scalar>(rho: &[T]) -> Vec<T> {
    let max_lag = rho.len() - 1;
    let mut pacf = Vec::with_capacity(max_lag);
    let mut prev = vec![T::zero(); max_lag + 1];
    prev[1] = rho[1];
    pacf.push(rho[1]);
    for k in 2..=max_lag {
        let mut num = rho[k];
        let mut den = T::one();
        for j in 1..k {
            num = num - prev[j] * rho[k - j];
            den = den - prev[j] * rho[j];
        }
        let phi_kk = num / den;
        let mut cur = prev.clone();
        cur[k] = phi_kk;
        for j in 1..k {
            cur[j] = prev[j] - phi_kk * prev[k - j];
        }
        pacf.push(phi_kk);
        prev = cur;
    }
    pacf
}

/// Biased-normalization sample autocorrelations for lags 0..=max_lag.
pub fn acf<T: Scalar>(s: &Subseries<T>, max_lag: usize) -> Result<Vec<T>> {
    Ok(correlogram(s, max_lag)?.acf)
}

/// Partial autocorrelations for lags 1..=max_lag.
pub fn pacf<T: Scalar>(s: &Subseries<T>, max_lag: usize) -> Result<Vec<T>> {
    Ok(correlogram(s, max_lag)?.pacf)
}

/// Autoregressive order from the PACF cut-off: the largest lag whose partial
/// autocorrelation exceeds the confidence band, with a fallback of 1.
pub fn select_lag<T: Scalar>(s: &Subseries<T>, max_lag: usize) -> Result<usize> {
    let cg = correlogram(s, max_lag)?;
    let p = (1..=max_lag)
        .filter(|&k| cg.pacf[k - 1].abs() > cg.band)
        .next_back()
        .unwrap_or(1);
    Ok(p)
}

/// Result of the bounded differencing loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryOutcome<T: Scalar> {
    pub series: Subseries<T>,
    pub record: PreprocessRecord<T>,
    /// False when the differencing budget ran out first.
    pub stationary: bool,
    pub adf: AdfResult<T>,
}

/// Differences until the ADF test rejects a unit root or `max_d` passes have
/// been spent. Exhausting the budget is reported, not treated as an error.
pub fn difference_until_stationary<T: Scalar>(
    s: &Subseries<T>,
    max_d: usize,
) -> Result<StationaryOutcome<T>> {
    let mut current = s.clone();
    let mut d = 0;
    let mut adf = adf_test(&current)?;
    while !adf.stationary && d < max_d {
        let (next, _) = difference(&current, 1)?;
        current = next;
        d += 1;
        adf = adf_test(&current)?;
    }
    let (series, record) = difference(s, d)?;
    debug_assert_eq!(series.values, current.values);
    Ok(StationaryOutcome {
        series,
        record,
        stationary: adf.stationary,
        adf,
    })
}

/// Wilcoxon signed-rank test on paired absolute forecast errors.
///
/// Pairs `|errors_a[i]| - |errors_b[i]|`, drops exact zeros, ranks the
/// absolute differences with average ranks for ties, and converts the
/// positive-rank sum to a normal z statistic. Negative z means the first
/// model's errors are smaller; the sign column follows that convention at
/// the 99% level.
pub fn wilcoxon_signed_rank<T: Scalar>(errors_a: &[T], errors_b: &[T]) -> Result<WsrtResult<T>> {
    if errors_a.len() != errors_b.len() {
        return Err(Error::Validation(format!(
            "error sequences differ in length: {} vs {}",
            errors_a.len(),
            errors_b.len()
        )));
    }
    let diffs: Vec<T> = errors_a
        .iter()
        .zip(errors_b)
        .map(|(&a, &b)| a.abs() - b.abs())
        .filter(|d| *d != T::zero())
        .collect();
    if diffs.is_empty() {
        return Ok(WsrtResult {
            z: T::zero(),
            significant: false,
            sign: WsrtSign::Same,
        });
    }
    let n = diffs.len();
    if n < 6 {
        return Err(Error::Validation(format!(
            "only {n} nonzero differences; need at least 6"
        )));
    }

    let ranks = average_ranks(&diffs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > T::zero())
        .map(|(_, &r)| r)
        .sum();

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
    let z = (w_plus - mean) / sd;

    let significant = z.abs() > Z_99;
    let sign = if !significant {
        WsrtSign::Same
    } else if z < 0.0 {
        WsrtSign::Better
    } else {
        WsrtSign::Worse
    };
    Ok(WsrtResult {
        z: T::from_f64_lit(z),
        significant,
        sign,
    })
}

/// Ranks of |values| (1-based), averaging over ties.
fn average_ranks<T: Scalar>(values: &[T]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .abs()
            .partial_cmp(&values[b].abs())
            .expect("finite values")
    });
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]].abs() == values[order[i]].abs() {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}
