//! Performance statistics over daily return series.
//!
//! Conventions, chosen once and used everywhere:
//! - wealth is indexed to 100 at inception: wealth[t] = 100 * prod(1 + r_i, i <= t)
//! - annualization uses 252 trading days
//! - volatility uses the sample (n-1) standard deviation
//! - skewness and kurtosis are uncorrected moment ratios; kurtosis is raw
//!   (normal = 3) unless `excess_kurtosis` is set
//! - alpha and beta regress against the benchmark with risk-free rate 0;
//!   alpha is annualized arithmetically (x 252)
//! - max drawdown is the largest peak-relative loss over the wealth path,
//!   the peak seeded with the inception value
//!
//! A zero-variance return series reports skewness and kurtosis as 0 rather
//! than 0/0.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;
/// Wealth index value at inception.
pub const WEALTH_BASE: f64 = 100.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsOptions {
    /// Report kurtosis minus 3 instead of the raw fourth moment ratio.
    pub excess_kurtosis: bool,
}

/// Full statistics for one strategy over one window. `alpha_pct` and `beta`
/// are present only when a benchmark was supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub cumulative_return_pct: f64,
    pub annualized_return_pct: f64,
    pub annualized_vol_pct: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub alpha_pct: Option<f64>,
    pub beta: Option<f64>,
    pub max_drawdown_pct: f64,
    pub dates: Vec<NaiveDate>,
    pub daily_returns: Vec<f64>,
    /// Length `dates.len() + 1`; `wealth[0]` is exactly 100.
    pub wealth: Vec<f64>,
}

impl BacktestReport {
    /// Look up a headline statistic by its field name, for the correlation
    /// study and for summary tables.
    pub fn stat(&self, name: &str) -> Result<f64> {
        let missing = || Error::MissingStat {
            stat: name.to_string(),
        };
        Ok(match name {
            "cumulative_return_pct" => self.cumulative_return_pct,
            "annualized_return_pct" => self.annualized_return_pct,
            "annualized_vol_pct" => self.annualized_vol_pct,
            "skewness" => self.skewness,
            "kurtosis" => self.kurtosis,
            "alpha_pct" => self.alpha_pct.ok_or_else(missing)?,
            "beta" => self.beta.ok_or_else(missing)?,
            "max_drawdown_pct" => self.max_drawdown_pct,
            _ => return Err(missing()),
        })
    }
}

fn check_series(what: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput { what });
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput { what });
    }
    Ok(())
}

/// Running-peak max drawdown over a wealth path, as a fraction of the peak.
fn max_drawdown_fraction(wealth: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for &w in wealth {
        peak = peak.max(w);
        worst = worst.max((peak - w) / peak);
    }
    worst
}

/// Compute every statistic for a daily return series. Returns are fractional
/// (0.01 = 1%) and assumed > -100%. The benchmark, when given, must be
/// day-aligned with the strategy; alpha/beta are omitted without one.
pub fn performance_stats(
    dates: &[NaiveDate],
    daily: &[f64],
    benchmark: Option<&[f64]>,
    opts: &StatsOptions,
) -> Result<BacktestReport> {
    check_series("daily returns", daily)?;
    let n = daily.len();
    if dates.len() != n {
        return Err(Error::LengthMismatch {
            what: "dates vs daily returns",
            left: dates.len(),
            right: n,
        });
    }

    let mut wealth = Vec::with_capacity(n + 1);
    wealth.push(WEALTH_BASE);
    let mut acc = WEALTH_BASE;
    for &r in daily {
        acc *= 1.0 + r;
        wealth.push(acc);
    }
    let growth = acc / WEALTH_BASE;

    let mean = daily.iter().sum::<f64>() / n as f64;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &r in daily {
        let d = r - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let sample_var = if n > 1 { m2 / (n as f64 - 1.0) } else { 0.0 };
    m2 /= n as f64;
    m3 /= n as f64;
    m4 /= n as f64;
    let (skewness, kurtosis_raw) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (0.0, 0.0)
    };
    let kurtosis = if opts.excess_kurtosis && m2 > 0.0 {
        kurtosis_raw - 3.0
    } else {
        kurtosis_raw
    };

    let (alpha_pct, beta) = match benchmark {
        None => (None, None),
        Some(bench) => {
            check_series("benchmark returns", bench)?;
            if bench.len() != n {
                return Err(Error::LengthMismatch {
                    what: "benchmark vs daily returns",
                    left: bench.len(),
                    right: n,
                });
            }
            let bench_mean = bench.iter().sum::<f64>() / n as f64;
            let mut cov = 0.0;
            let mut var_b = 0.0;
            for (&s, &b) in daily.iter().zip(bench) {
                cov += (s - mean) * (b - bench_mean);
                var_b += (b - bench_mean) * (b - bench_mean);
            }
            if var_b == 0.0 {
                return Err(Error::ZeroVarianceSeries { what: "benchmark" });
            }
            let beta = cov / var_b;
            let alpha = TRADING_DAYS_PER_YEAR * (mean - beta * bench_mean);
            (Some(alpha * 100.0), Some(beta))
        }
    };

    Ok(BacktestReport {
        cumulative_return_pct: WEALTH_BASE * growth,
        annualized_return_pct: (growth.powf(TRADING_DAYS_PER_YEAR / n as f64) - 1.0) * 100.0,
        annualized_vol_pct: sample_var.sqrt() * TRADING_DAYS_PER_YEAR.sqrt() * 100.0,
        skewness,
        kurtosis,
        alpha_pct,
        beta,
        max_drawdown_pct: max_drawdown_fraction(&wealth) * 100.0,
        dates: dates.to_vec(),
        daily_returns: daily.to_vec(),
        wealth,
    })
}

/// Pearson correlation with a two-sided p-value from the exact t reference
/// distribution with n - 2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "pearson inputs",
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewObservations {
            what: "pearson correlation",
            n,
            min: 3,
        });
    }
    check_series("pearson inputs", x)?;
    check_series("pearson inputs", y)?;
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mean_x) * (yi - mean_y);
        sxx += (xi - mean_x) * (xi - mean_x);
        syy += (yi - mean_y) * (yi - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVarianceSeries { what: "x" });
    }
    if syy == 0.0 {
        return Err(Error::ZeroVarianceSeries { what: "y" });
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);

    let df = (n - 2) as f64;
    let r2 = r * r;
    // |r| = 1 sends the t statistic to infinity and the p-value to zero
    let p = if 1.0 - r2 <= f64::EPSILON {
        0.0
    } else {
        let t = r.abs() * (df / (1.0 - r2)).sqrt();
        student_t_two_sided_p(t, df)?
    };
    Ok((r, p))
}

/// Two-sided tail probability of |T| >= t for Student's t with `df` degrees
/// of freedom, via the regularized incomplete beta identity
/// P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2).
pub fn student_t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    let x = df / (df + t * t);
    incomplete_beta(0.5 * df, 0.5, x)
}

/// ln Gamma(x) for x > 0 (Lanczos approximation, g = 7, 9 terms).
fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    let z = x - 1.0;
    #[allow(clippy::excessive_precision)]
    let mut acc = 0.99999999999980993;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (z + i as f64 + 1.0);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta I_x(a, b) by continued fraction (modified
/// Lentz), with the symmetry switch for fast convergence.
fn incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_continued_fraction(a, b, x)? / a)
    } else {
        Ok(1.0 - front * beta_continued_fraction(b, a, 1.0 - x)? / b)
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        // even step
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete beta continued fraction",
        iterations: MAX_ITER,
    })
}
