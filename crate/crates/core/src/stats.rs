//! Evaluation metric and the hypothesis tests used by the report.

use serde::{Deserialize, Serialize};

use crate::dist::{f_distribution_sf, normal_sf};
use crate::error::{Error, Result};

/// Confusion counts with outliers as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    /// Counts from paired truth / prediction flags (`true` = outlier).
    pub fn from_flags(truth: &[bool], predicted: &[bool]) -> Self {
        let mut c = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(c: Confusion) -> Result<f64> {
    if c.total() == 0 {
        return Err(Error::Domain("mcc of an empty confusion matrix".into()));
    }
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return Ok(0.0);
    }
    let denom = (factors[0] * factors[1]).sqrt() * (factors[2] * factors[3]).sqrt();
    Ok(((tp * tn - fp * fn_) / denom).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Holm-adjusted p-value once a family of tests is adjusted; equals `p_value` before.
    pub adjusted_p: f64,
}

impl TestResult {
    fn new(statistic: f64, p_value: f64) -> Self {
        let p = p_value.clamp(0.0, 1.0);
        Self { statistic, p_value: p, adjusted_p: p }
    }
}

/// Midranks (1-based) of `values` plus the sizes of every tie group.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = r;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

const EXACT_MWU_MAX: usize = 8;

/// Null distribution counts of U for tie-free samples: `counts[u]` is the
/// number of rank assignments giving `U = u`.
fn mwu_exact_counts(n1: usize, n2: usize) -> Vec<f64> {
    // f[i][j][u]: arrangements of i first-sample and j second-sample ranks
    let max_u = n1 * n2;
    let mut f = vec![vec![vec![0.0; max_u + 1]; n2 + 1]; n1 + 1];
    for j in 0..=n2 {
        f[0][j][0] = 1.0;
    }
    for i in 1..=n1 {
        f[i][0][0] = 1.0;
        for j in 1..=n2 {
            for u in 0..=i * j {
                // the largest value belongs to sample one (beats all j) or to sample two
                let a = if u >= j { f[i - 1][j][u - j] } else { 0.0 };
                let b = f[i][j - 1][u];
                f[i][j][u] = a + b;
            }
        }
    }
    f[n1][n2].clone()
}

/// Two-sided Mann-Whitney U test. The statistic is `U` of the first sample
/// (pairs where `a > b`, ties counted half). Small tie-free samples (both at
/// most 8) use the exact null distribution; otherwise the normal approximation
/// with tie-corrected variance and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("Mann-Whitney U needs two nonempty samples".into()));
    }
    let (n1, n2) = (a.len(), b.len());
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&all);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let has_ties = ties.iter().any(|&t| t > 1);

    if !has_ties && n1 <= EXACT_MWU_MAX && n2 <= EXACT_MWU_MAX {
        let counts = mwu_exact_counts(n1, n2);
        let total: f64 = counts.iter().sum();
        let k = u.round() as usize;
        let lower: f64 = counts[..=k].iter().sum::<f64>() / total;
        let upper: f64 = counts[k..].iter().sum::<f64>() / total;
        return Ok(TestResult::new(u, (2.0 * lower.min(upper)).min(1.0)));
    }

    let n = (n1 + n2) as f64;
    let mu = (n1 * n2) as f64 / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = (n1 * n2) as f64 / 12.0 * ((n + 1.0) - tie_term);
    if !(var > 0.0) {
        return Ok(TestResult::new(u, 1.0));
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    Ok(TestResult::new(u, (2.0 * normal_sf(z)).min(1.0)))
}

/// Kendall tau-b with a two-sided normal-approximation p-value; the variance
/// of the concordance score carries the full tie correction.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidParameter("Kendall tau needs at least 2 pairs".into()));
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in 0..i {
            let dx = (x[i] - x[j]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            let dy = (y[i] - y[j]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            s += dx * dy;
        }
    }
    let (_, tx) = midranks(x);
    let (_, ty) = midranks(y);
    let pairs = |t: &[usize]| t.iter().map(|&t| (t * (t.saturating_sub(1))) as f64 / 2.0).sum::<f64>();
    let nf = n as f64;
    let n0 = nf * (nf - 1.0) / 2.0;
    let (n1, n2) = (pairs(&tx), pairs(&ty));
    if n0 == n1 || n0 == n2 {
        return Err(Error::Domain("constant input".into()));
    }
    let s = s as f64;
    let tau = s / ((n0 - n1) * (n0 - n2)).sqrt();

    let sum = |t: &[usize], f: &dyn Fn(f64) -> f64| t.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt = sum(&tx, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(&ty, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let mut var = (v0 - vt - vu) / 18.0;
    var += sum(&tx, &|t| t * (t - 1.0)) * sum(&ty, &|t| t * (t - 1.0)) / (2.0 * nf * (nf - 1.0));
    if n > 2 {
        var += sum(&tx, &|t| t * (t - 1.0) * (t - 2.0)) * sum(&ty, &|t| t * (t - 1.0) * (t - 2.0))
            / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    }
    let p = if var > 0.0 { (2.0 * normal_sf(s.abs() / var.sqrt())).min(1.0) } else { 1.0 };
    Ok(TestResult::new(tau.clamp(-1.0, 1.0), p))
}

/// Holm step-down adjustment, returned in input order.
pub fn holm_bonferroni(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p_values[i]).min(1.0));
        adjusted[i] = running;
    }
    Ok(adjusted)
}

/// Applies Holm to a family of test results in place.
pub fn adjust_family(results: &mut [TestResult]) -> Result<()> {
    let p: Vec<f64> = results.iter().map(|r| r.p_value).collect();
    for (r, a) in results.iter_mut().zip(holm_bonferroni(&p)?) {
        r.adjusted_p = a;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    pub f: f64,
    pub p_value: f64,
    pub omega_sq: f64,
    pub df_between: usize,
    pub df_within: usize,
}

/// One-way ANOVA with omega squared
/// `(SSb - dfb * MSw) / (SStot + MSw)`, clamped at 0.
pub fn oneway_anova(groups: &[Vec<f64>]) -> Result<Anova> {
    if groups.len() < 2 || groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InvalidParameter("ANOVA needs at least 2 nonempty groups".into()));
    }
    let total: usize = groups.iter().map(Vec::len).sum();
    if total <= groups.len() {
        return Err(Error::InvalidParameter("ANOVA needs more observations than groups".into()));
    }
    let grand = groups.iter().flatten().sum::<f64>() / total as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (m - grand) * (m - grand);
        ss_within += g.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    let df_between = groups.len() - 1;
    let df_within = total - groups.len();
    let ms_within = ss_within / df_within as f64;
    let ms_between = ss_between / df_between as f64;
    let ss_total = ss_between + ss_within;
    let omega = |ms_w: f64| ((ss_between - df_between as f64 * ms_w) / (ss_total + ms_w)).max(0.0);
    if ms_within == 0.0 {
        if ss_between == 0.0 {
            return Err(Error::Domain("ANOVA with no variance at all".into()));
        }
        return Ok(Anova { f: f64::INFINITY, p_value: 0.0, omega_sq: omega(0.0), df_between, df_within });
    }
    let f = ms_between / ms_within;
    let p_value = f_distribution_sf(f, df_between as f64, df_within as f64)?;
    Ok(Anova { f, p_value, omega_sq: omega(ms_within), df_between, df_within })
}

/// Compact letter display: two levels share a letter iff their pairwise test
/// is not significant. Built by insert-and-absorb over the significant pairs;
/// letters are ordered by the first level they contain.
pub fn group_letters(significant: &[Vec<bool>]) -> Result<Vec<String>> {
    let k = significant.len();
    if significant.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidParameter("pairwise matrix must be square".into()));
    }
    for i in 0..k {
        for j in 0..i {
            if significant[i][j] != significant[j][i] {
                return Err(Error::InvalidParameter("pairwise matrix must be symmetric".into()));
            }
        }
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut columns: Vec<Vec<bool>> = vec![vec![true; k]];
    for i in 0..k {
        for j in i + 1..k {
            if !significant[i][j] {
                continue;
            }
            let mut next = Vec::with_capacity(columns.len() + 1);
            for col in columns {
                if col[i] && col[j] {
                    let mut without_i = col.clone();
                    without_i[i] = false;
                    let mut without_j = col;
                    without_j[j] = false;
                    next.push(without_i);
                    next.push(without_j);
                } else {
                    next.push(col);
                }
            }
            columns = absorb(next);
        }
    }
    columns.sort_by_key(|c| c.iter().position(|&b| b));
    if columns.len() > 26 {
        return Err(Error::Domain(format!("{} letter groups needed, at most 26 supported", columns.len())));
    }
    let mut letters = vec![String::new(); k];
    for (c, col) in columns.iter().enumerate() {
        for (level, &member) in col.iter().enumerate() {
            if member {
                letters[level].push((b'a' + c as u8) as char);
            }
        }
    }
    Ok(letters)
}

fn absorb(columns: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
    let subset = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(x, y)| !x || *y);
    let mut kept: Vec<Vec<bool>> = Vec::with_capacity(columns.len());
    for (i, col) in columns.iter().enumerate() {
        if !col.iter().any(|&b| b) {
            continue;
        }
        let dominated = columns.iter().enumerate().any(|(j, other)| {
            j != i && subset(col, other) && (col != other || j < i)
        });
        if !dominated {
            kept.push(col.clone());
        }
    }
    kept
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}
