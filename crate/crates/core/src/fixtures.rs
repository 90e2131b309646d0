//! Published reference values used to pin report formatting. They are
//! rendered, never refitted.

use crate::panel::{CorrelationReport, TABLE_VARIABLES};
use crate::report::{RegressionColumn, RegressionTable};

/// Observations behind the published correlation table.
pub const CORRELATION_N: usize = 754;

/// Published lower triangle; row `i` lists r against variables `0..i` in
/// [`TABLE_VARIABLES`] order.
pub const CORRELATION_LOWER: [&[f64]; 10] = [
    &[],
    &[0.195],
    &[0.292, 0.889],
    &[-0.170, -0.575, -0.530],
    &[-0.080, 0.047, 0.013, -0.065],
    &[0.063, 0.055, 0.105, -0.053, -0.012],
    &[-0.229, -0.244, -0.265, 0.129, 0.046, -0.202],
    &[0.300, 0.261, 0.396, -0.233, -0.082, 0.053, -0.167],
    &[0.374, 0.147, 0.149, -0.045, -0.056, -0.131, -0.325, 0.171],
    &[0.234, 0.086, 0.132, -0.104, -0.056, 0.002, -0.122, 0.219, 0.146],
];

/// Published significance marks, same layout as [`CORRELATION_LOWER`].
pub const CORRELATION_STARS: [&[&str]; 10] = [
    &[],
    &["**"],
    &["**", "**"],
    &["**", "**", "**"],
    &["*", "", "", ""],
    &["", "", "**", "", ""],
    &["**", "**", "**", "**", "", "**"],
    &["**", "**", "**", "**", "*", "", "**"],
    &["**", "**", "**", "", "", "**", "**", "**"],
    &["**", "*", "**", "**", "", "", "**", "**", "**"],
];

pub fn correlations() -> CorrelationReport {
    CorrelationReport::from_lower_triangle(&TABLE_VARIABLES, &CORRELATION_LOWER, CORRELATION_N)
}

/// Published maturity loadings on (age, size, launch phase).
pub const MATURITY_LOADINGS: [f64; 3] = [0.94, 0.93, -0.77];
pub const MATURITY_VARIANCE_EXPLAINED: f64 = 0.80;

/// Published null-model variance components (level 2, level 1).
pub const NULL_VARIANCES: (f64, f64) = (2.871, 24.196);
pub const NULL_ICC_PERCENT: f64 = 10.61;

fn column(
    title: &str,
    coefficients: &[(&str, f64, &str)],
    variances: (f64, f64),
    icc: Option<f64>,
    change: Option<(f64, f64)>,
) -> RegressionColumn {
    RegressionColumn {
        title: title.to_string(),
        coefficients: coefficients
            .iter()
            .map(|&(n, v, s)| (n.to_string(), v, s.to_string()))
            .collect(),
        variance_level2: variances.0,
        variance_level1: variances.1,
        icc_percent: icc,
        change_level2_percent: change.map(|c| c.0),
        change_level1_percent: change.map(|c| c.1),
        n_obs: 754,
        n_groups: 16,
    }
}

/// The published five-model regression table, including its reported
/// variance changes.
pub fn regression() -> RegressionTable {
    RegressionTable {
        columns: vec![
            column("Model 1", &[("intercept", 6.054, "**")], NULL_VARIANCES, Some(10.61), None),
            column(
                "Model 2",
                &[("intercept", 6.252, "**"), ("maturity", 1.137, "**")],
                (2.252, 23.184),
                None,
                Some((-21.56, -4.18)),
            ),
            column(
                "Model 3",
                &[
                    ("intercept", 28.071, "**"),
                    ("sentiment", -2.126, ""),
                    ("complexity", -2.892, "**"),
                    ("emotionality", -7.294, ""),
                ],
                (2.381, 23.292),
                None,
                Some((-17.07, -3.74)),
            ),
            column(
                "Model 4",
                &[
                    ("intercept", 1.697, "**"),
                    ("past_activity", 0.039, "**"),
                    ("group_betweenness", 6.029, "**"),
                    ("rotating_leadership", 1.951, "**"),
                ],
                (1.836, 19.458),
                None,
                Some((-36.02, -19.58)),
            ),
            column(
                "Model 5",
                &[
                    ("intercept", 7.385, "**"),
                    ("complexity", -0.846, "*"),
                    ("past_activity", 0.038, "**"),
                    ("group_betweenness", 5.730, "**"),
                    ("rotating_leadership", 1.914, "**"),
                ],
                (1.748, 19.340),
                None,
                Some((-39.11, -19.82)),
            ),
        ],
    }
}
