//! Two-level random-intercept linear models,
//! `y_ij = β0 + x_ij'β + u_j + e_ij` with `u_j ~ N(0, σ²_u)` and
//! `e_ij ~ N(0, σ²_e)`, fitted by profile likelihood.
//!
//! With `θ = σ²_u / σ²_e` the marginal covariance of group `j` is
//! `σ²_e (I + θ 11')`, whose inverse is `(I − w_j 11') / σ²_e` with
//! `w_j = θ / (1 + n_j θ)`. For fixed θ the GLS estimate of β and the
//! closed-form σ²_e therefore only need per-group sums, and the likelihood
//! becomes a one-dimensional function of θ that is maximized by a grid scan
//! followed by Brent's method.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{FitError, PanelError};
use crate::panel::PanelRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Criterion {
    #[default]
    Ml,
    Reml,
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ml" => Ok(Self::Ml),
            "reml" => Ok(Self::Reml),
            other => Err(format!("unknown criterion `{other}` (expected ml|reml)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub outcome: String,
    pub covariates: Vec<String>,
    pub group: String,
}

impl ModelSpec {
    pub fn new(name: &str, outcome: &str, covariates: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            outcome: outcome.to_string(),
            covariates: covariates.iter().map(|s| s.to_string()).collect(),
            group: "community_id".to_string(),
        }
    }

    /// The five growth models: `null`, `maturity`, `language`, `interaction`
    /// and `full`.
    pub fn standard(name: &str) -> Option<Self> {
        let covariates: &[&str] = match name {
            "null" => &[],
            "maturity" => &["maturity"],
            "language" => &["sentiment", "complexity", "emotionality"],
            "interaction" => &["past_activity", "group_betweenness", "rotating_leadership"],
            "full" => &[
                "complexity",
                "past_activity",
                "group_betweenness",
                "rotating_leadership",
            ],
            _ => return None,
        };
        Some(Self::new(name, "joiners", covariates))
    }

    pub const STANDARD: [&'static str; 5] = ["null", "maturity", "language", "interaction", "full"];

    /// Parses `NAME` (a standard model) or `NAME=cov1+cov2` (custom
    /// covariates, outcome `joiners`). An empty right-hand side is the null
    /// model.
    pub fn parse(text: &str) -> Result<Self, String> {
        match text.split_once('=') {
            None => Self::standard(text.trim()).ok_or_else(|| {
                format!(
                    "unknown model `{text}` (expected one of {} or NAME=cov1+cov2)",
                    Self::STANDARD.join(", ")
                )
            }),
            Some((name, rhs)) => {
                let covs: Vec<&str> = rhs
                    .split('+')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect();
                Ok(Self::new(name.trim(), "joiners", &covs))
            }
        }
    }

    pub fn with_covariates(mut self, extra: &[String]) -> Self {
        for c in extra {
            if !self.covariates.contains(c) {
                self.covariates.push(c.clone());
            }
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    /// Two-sided normal p-value.
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    /// Fitted variance ratio σ²_u / σ²_e.
    pub theta: f64,
    pub evaluations: usize,
    pub brent_iterations: usize,
    pub at_boundary: bool,
    /// Finite-difference slope of the profile log-likelihood at θ.
    pub profile_gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    pub model: String,
    pub outcome: String,
    pub group: String,
    pub criterion: Criterion,
    pub coefficients: Vec<Coefficient>,
    pub variance_level2: f64,
    pub variance_level1: f64,
    pub icc: f64,
    pub log_likelihood: f64,
    pub deviance: f64,
    pub n_obs: usize,
    pub n_groups: usize,
    pub convergence: Convergence,
}

impl ModelFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn beta(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    pub fn covariates(&self) -> impl Iterator<Item = &str> {
        self.coefficients.iter().skip(1).map(|c| c.name.as_str())
    }
}

/// `σ²_u / (σ²_u + σ²_e)`.
pub fn icc_from(variance_level2: f64, variance_level1: f64) -> f64 {
    let total = variance_level2 + variance_level1;
    if total <= 0.0 {
        0.0
    } else {
        variance_level2 / total
    }
}

pub fn icc(fit: &ModelFit) -> f64 {
    icc_from(fit.variance_level2, fit.variance_level1)
}

/// Percentage change of each variance component relative to a reference
/// (usually null) model; `None` where the reference variance is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceChange {
    pub level2_pct: Option<f64>,
    pub level1_pct: Option<f64>,
}

pub fn percent_change(model: f64, reference: f64) -> Option<f64> {
    (reference != 0.0).then(|| 100.0 * (model - reference) / reference)
}

pub fn variance_change(fit: &ModelFit, null: &ModelFit) -> VarianceChange {
    VarianceChange {
        level2_pct: percent_change(fit.variance_level2, null.variance_level2),
        level1_pct: percent_change(fit.variance_level1, null.variance_level1),
    }
}

const MONTH_NAMES: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

/// Column name of the dummy for calendar month `month` (1..=12).
pub fn seasonal_column(month: u32) -> &'static str {
    MONTH_NAMES[(month as usize).clamp(1, 12) - 1]
}

/// Adds a 0/1 dummy per requested calendar month. December maps onto the
/// panel's built-in `december` column; other months become extra columns.
pub fn seasonal_covariates(rows: &[PanelRow], months: &[u32]) -> Vec<PanelRow> {
    let mut out = rows.to_vec();
    for row in &mut out {
        let Some(m) = row.month else { continue };
        for &month in months {
            let hit = m.month() == month;
            if month == 12 {
                row.december = Some(hit);
            } else {
                row.extra
                    .insert(seasonal_column(month).to_string(), if hit { 1.0 } else { 0.0 });
            }
        }
    }
    out
}

struct GroupStats {
    n: f64,
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
    sum_x: DVector<f64>,
    sum_y: f64,
}

struct Design {
    names: Vec<String>,
    groups: Vec<GroupStats>,
    n: usize,
    p: usize,
}

fn group_key(row: &PanelRow, group: &str) -> Result<String, PanelError> {
    match group {
        "community_id" => Ok(row.community_id.clone()),
        "month" => Ok(row.month.map(|m| m.to_string()).unwrap_or_default()),
        other => Ok(row
            .value(other)?
            .map(|v| v.to_string())
            .unwrap_or_default()),
    }
}

impl Design {
    fn build(rows: &[PanelRow], spec: &ModelSpec) -> Result<Self, FitError> {
        if spec.covariates.contains(&spec.outcome) {
            return Err(FitError::OutcomeIsCovariate(spec.outcome.clone()));
        }
        let mut names = vec!["intercept".to_string()];
        names.extend(spec.covariates.iter().cloned());
        let p = names.len();

        let mut by_group: BTreeMap<String, Vec<(Vec<f64>, f64)>> = BTreeMap::new();
        for row in rows {
            let Some(y) = row.value(&spec.outcome)? else { continue };
            let mut x = Vec::with_capacity(p);
            x.push(1.0);
            let mut complete = true;
            for c in &spec.covariates {
                match row.value(c)? {
                    Some(v) => x.push(v),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete && y.is_finite() && x.iter().all(|v| v.is_finite()) {
                by_group.entry(group_key(row, &spec.group)?).or_default().push((x, y));
            }
        }
        let n: usize = by_group.values().map(Vec::len).sum();
        if n < spec.covariates.len() + 2 {
            return Err(FitError::TooFewRows {
                needed: spec.covariates.len() + 2,
                found: n,
            });
        }
        if by_group.len() < 2 {
            return Err(FitError::TooFewGroups(by_group.len()));
        }
        check_rank(&by_group, &names)?;

        let groups = by_group
            .values()
            .map(|obs| {
                let mut g = GroupStats {
                    n: obs.len() as f64,
                    xtx: DMatrix::zeros(p, p),
                    xty: DVector::zeros(p),
                    yty: 0.0,
                    sum_x: DVector::zeros(p),
                    sum_y: 0.0,
                };
                for (x, y) in obs {
                    for a in 0..p {
                        g.sum_x[a] += x[a];
                        g.xty[a] += x[a] * y;
                        for b in 0..=a {
                            g.xtx[(a, b)] += x[a] * x[b];
                        }
                    }
                    g.yty += y * y;
                    g.sum_y += y;
                }
                g.xtx.fill_upper_triangle_with_lower_triangle();
                g
            })
            .collect();
        Ok(Self { names, groups, n, p })
    }
}

/// Detects exact collinearity by Gram–Schmidt on the design columns.
fn check_rank(
    by_group: &BTreeMap<String, Vec<(Vec<f64>, f64)>>,
    names: &[String],
) -> Result<(), FitError> {
    let p = names.len();
    let rows: Vec<&Vec<f64>> = by_group.values().flatten().map(|(x, _)| x).collect();
    let cols: Vec<DVector<f64>> = (0..p)
        .map(|j| DVector::from_iterator(rows.len(), rows.iter().map(|x| x[j])))
        .collect();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut basis_cols: Vec<usize> = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        let mut resid = col.clone();
        for q in &basis {
            let proj = q.dot(&resid);
            resid -= q * proj;
        }
        let norm = resid.norm();
        if norm <= 1e-9 * col.norm().max(f64::MIN_POSITIVE) {
            // Express the column in terms of the earlier independent ones.
            let sub = DMatrix::from_columns(&basis_cols.iter().map(|&k| cols[k].clone()).collect::<Vec<_>>());
            let coef = (sub.transpose() * &sub)
                .try_inverse()
                .map(|inv| inv * sub.transpose() * col);
            let collinear_with = match coef {
                Some(c) if !basis_cols.is_empty() => basis_cols
                    .iter()
                    .zip(c.iter())
                    .filter(|(_, v)| v.abs() > 1e-8)
                    .map(|(&k, _)| names[k].clone())
                    .collect(),
                _ => Vec::new(),
            };
            return Err(FitError::RankDeficient {
                column: names[j].clone(),
                collinear_with,
            });
        }
        basis.push(resid / norm);
        basis_cols.push(j);
    }
    Ok(())
}

struct Profile {
    loglik: f64,
    beta: DVector<f64>,
    sigma2: f64,
    a_inv: DMatrix<f64>,
}

impl Design {
    fn profile(&self, theta: f64, criterion: Criterion) -> Option<Profile> {
        let p = self.p;
        let mut a = DMatrix::<f64>::zeros(p, p);
        let mut b = DVector::<f64>::zeros(p);
        let mut yhy = 0.0;
        let mut logdet_h = 0.0;
        for g in &self.groups {
            let w = theta / (1.0 + g.n * theta);
            a += &g.xtx - (&g.sum_x * g.sum_x.transpose()) * w;
            b += &g.xty - &g.sum_x * (w * g.sum_y);
            yhy += g.yty - w * g.sum_y * g.sum_y;
            logdet_h += (g.n * theta).ln_1p();
        }
        let chol = a.clone().cholesky()?;
        let beta = chol.solve(&b);
        let rss = (yhy - b.dot(&beta)).max(0.0);
        let n = self.n as f64;
        let two_pi = 2.0 * std::f64::consts::PI;
        let (loglik, sigma2) = match criterion {
            Criterion::Ml => {
                let s2 = rss / n;
                (-0.5 * (n * (two_pi * s2).ln() + logdet_h + n), s2)
            }
            Criterion::Reml => {
                let dof = n - p as f64;
                let s2 = rss / dof;
                let logdet_a: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
                (-0.5 * (dof * (two_pi * s2).ln() + logdet_h + logdet_a + dof), s2)
            }
        };
        if !loglik.is_finite() || sigma2 <= 0.0 {
            return None;
        }
        Some(Profile {
            loglik,
            beta,
            sigma2,
            a_inv: chol.inverse(),
        })
    }
}

const THETA_MAX: f64 = 1e4;
const THETA_TOL: f64 = 1e-10;
const MAX_BRENT_ITERATIONS: usize = 500;

/// Maximizes `f` on `[lo, hi]` by Brent's method (golden section with
/// parabolic steps). Returns the arg-max and the iteration count, or `None`
/// when the iteration budget runs out.
fn brent_maximize(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Option<(f64, usize)> {
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = -f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for iter in 1..=max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            return Some((x, iter));
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut pnum = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                pnum = -pnum;
            }
            q = q.abs();
            if pnum.abs() < (0.5 * q * e).abs() && pnum > q * (a - x) && pnum < q * (b - x) {
                e = d;
                d = pnum / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if mid >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = -f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    None
}

fn theta_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    // 10^-8 .. 10^4 in quarter decades.
    grid.extend((-32..=16).map(|k| 10f64.powf(k as f64 / 4.0)));
    debug_assert!(*grid.last().unwrap() <= THETA_MAX * (1.0 + 1e-12));
    grid
}

/// Fits a random-intercept model to the listwise-complete rows of `rows`.
pub fn fit_lmm(rows: &[PanelRow], spec: &ModelSpec, criterion: Criterion) -> Result<ModelFit, FitError> {
    let design = Design::build(rows, spec)?;
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let eval = |theta: f64, trace: &mut Vec<(f64, f64)>| -> f64 {
        let ll = design
            .profile(theta, criterion)
            .map_or(f64::NEG_INFINITY, |p| p.loglik);
        trace.push((theta, ll));
        ll
    };

    let grid = theta_grid();
    let values: Vec<f64> = grid.iter().map(|&t| eval(t, &mut trace)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best });
    if !values[best].is_finite() {
        return Err(FitError::NonConvergence { trace });
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];

    let mut theta = grid[best];
    let mut iterations = 0;
    if hi > lo {
        let mut brent_trace = Vec::new();
        let result = brent_maximize(
            |t| eval(t, &mut brent_trace),
            lo,
            hi,
            THETA_TOL,
            MAX_BRENT_ITERATIONS,
        );
        trace.extend(brent_trace);
        let (t, it) = result.ok_or_else(|| FitError::NonConvergence {
            trace: trace.clone(),
        })?;
        iterations = it;
        let ll_t = design.profile(t, criterion).map_or(f64::NEG_INFINITY, |p| p.loglik);
        if ll_t >= values[best] {
            theta = t;
        }
    }
    // The boundary is a legitimate optimum.
    if values[0] >= design.profile(theta, criterion).map_or(f64::NEG_INFINITY, |p| p.loglik) {
        theta = 0.0;
    }

    let profile = design
        .profile(theta, criterion)
        .ok_or_else(|| FitError::NonConvergence {
            trace: trace.clone(),
        })?;
    let ll_at = |t: f64| design.profile(t, criterion).map_or(f64::NAN, |p| p.loglik);
    let h = 1e-5 * theta.max(1e-3);
    let profile_gradient = if theta > h {
        (ll_at(theta + h) - ll_at(theta - h)) / (2.0 * h)
    } else {
        (ll_at(theta + h) - profile.loglik) / h
    };

    let coefficients = design
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let estimate = profile.beta[i];
            let std_error = (profile.sigma2 * profile.a_inv[(i, i)]).max(0.0).sqrt();
            let z = estimate / std_error;
            Coefficient {
                name: name.clone(),
                estimate,
                std_error,
                z,
                p_value: erfc(z.abs() / std::f64::consts::SQRT_2),
            }
        })
        .collect();
    let variance_level1 = profile.sigma2;
    let variance_level2 = theta * profile.sigma2;
    Ok(ModelFit {
        model: spec.name.clone(),
        outcome: spec.outcome.clone(),
        group: spec.group.clone(),
        criterion,
        coefficients,
        variance_level2,
        variance_level1,
        icc: icc_from(variance_level2, variance_level1),
        log_likelihood: profile.loglik,
        deviance: -2.0 * profile.loglik,
        n_obs: design.n,
        n_groups: design.groups.len(),
        convergence: Convergence {
            theta,
            evaluations: trace.len(),
            brent_iterations: iterations,
            at_boundary: theta == 0.0,
            profile_gradient,
        },
    })
}

/// Profile log-likelihood at a given variance ratio, for diagnostics.
pub fn profile_loglik(
    rows: &[PanelRow],
    spec: &ModelSpec,
    criterion: Criterion,
    theta: f64,
) -> Result<Option<f64>, FitError> {
    let design = Design::build(rows, spec)?;
    Ok(design.profile(theta, criterion).map(|p| p.loglik))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::month::YearMonth;

    fn rows_from(data: &[(&str, f64, f64)]) -> Vec<PanelRow> {
        data.iter()
            .map(|&(g, x, y)| PanelRow {
                community_id: g.into(),
                month: YearMonth::new(2010, 1),
                joiners: Some(y),
                past_activity: Some(x),
                ..PanelRow::default()
            })
            .collect()
    }

    #[test]
    fn icc_arithmetic() {
        assert!((icc_from(1.0, 9.0) - 0.10).abs() < 1e-15);
        assert_eq!(icc_from(0.0, 3.0), 0.0);
        assert!((100.0 * icc_from(2.871, 24.196) - 10.61).abs() < 0.01);
        assert!((percent_change(1.748, 2.871).unwrap() + 39.11).abs() < 0.01);
        assert!((percent_change(19.340, 24.196).unwrap() + 20.07).abs() < 0.01);
        assert_eq!(percent_change(1.0, 0.0), None);
    }

    #[test]
    fn brent_finds_parabola_peak() {
        let (x, _) = brent_maximize(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10, 100).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(ModelSpec::parse("null").unwrap().covariates.len(), 0);
        assert_eq!(ModelSpec::parse("full").unwrap().covariates.len(), 4);
        let custom = ModelSpec::parse("mine=size + age").unwrap();
        assert_eq!(custom.covariates, ["size", "age"]);
        assert!(ModelSpec::parse("bogus").is_err());
    }

    #[test]
    fn error_paths() {
        let rows = rows_from(&[("a", 1.0, 2.0), ("a", 2.0, 3.0), ("a", 3.0, 5.0)]);
        let spec = ModelSpec::new("m", "joiners", &["past_activity"]);
        assert!(matches!(
            fit_lmm(&rows, &spec, Criterion::Ml),
            Err(FitError::TooFewGroups(1))
        ));
        let spec = ModelSpec::new("m", "joiners", &["joiners"]);
        assert!(matches!(
            fit_lmm(&rows, &spec, Criterion::Ml),
            Err(FitError::OutcomeIsCovariate(_))
        ));
    }

    #[test]
    fn collinear_columns_are_named() {
        let mut rows = rows_from(&[
            ("a", 1.0, 2.0),
            ("a", 2.0, 3.5),
            ("b", 3.0, 5.0),
            ("b", 4.0, 4.0),
            ("c", 5.0, 7.0),
        ]);
        for r in &mut rows {
            r.size = r.past_activity.map(|x| 2.0 * x + 1.0);
        }
        let spec = ModelSpec::new("m", "joiners", &["past_activity", "size"]);
        match fit_lmm(&rows, &spec, Criterion::Ml) {
            Err(FitError::RankDeficient {
                column,
                collinear_with,
            }) => {
                assert_eq!(column, "size");
                assert_eq!(collinear_with, ["intercept", "past_activity"]);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn seasonal_dummies() {
        let rows: Vec<PanelRow> = (1..=12)
            .map(|m| PanelRow {
                community_id: "a".into(),
                month: YearMonth::new(2010, m),
                ..PanelRow::default()
            })
            .collect();
        assert_eq!(seasonal_covariates(&rows, &[]), rows);
        let aug = seasonal_covariates(&rows, &[12, 1]);
        assert_eq!(aug[11].value("december").unwrap(), Some(1.0));
        assert_eq!(aug[10].value("december").unwrap(), Some(0.0));
        assert_eq!(aug[0].value("january").unwrap(), Some(1.0));
        assert_eq!(aug[5].value("january").unwrap(), Some(0.0));
    }

    #[test]
    fn missing_rows_dropped_listwise() {
        let mut rows = rows_from(&[
            ("a", 1.0, 2.0),
            ("a", 2.0, 3.5),
            ("b", 3.0, 5.0),
            ("b", 4.0, 4.0),
            ("c", 5.0, 7.0),
            ("c", 6.0, 6.5),
        ]);
        rows[5].past_activity = None;
        let spec = ModelSpec::new("m", "joiners", &["past_activity"]);
        let fit = fit_lmm(&rows, &spec, Criterion::Ml).unwrap();
        assert_eq!(fit.n_obs, 5);
        assert_eq!(fit.n_groups, 3);
        assert!((fit.icc - icc(&fit)).abs() < 1e-12);
    }
}
