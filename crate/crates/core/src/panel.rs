//! The monthly community panel, Pearson correlation tables and the
//! principal-component maturity factor.
//!
//! Missing-value policy lives here: metric modules report `None` for
//! undefined values, the join keeps them as missing, correlations use
//! pairwise-complete rows and the factor (like model fits) uses
//! listwise-complete rows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{Read, Write};

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::dynamics::DynamicsRow;
use crate::error::PanelError;
use crate::language::LanguageRow;
use crate::month::YearMonth;

/// Per-window network summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRow {
    pub community_id: String,
    pub month: YearMonth,
    pub nodes: u64,
    pub edges: u64,
    pub group_betweenness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PanelRow {
    pub community_id: String,
    pub month: Option<YearMonth>,
    pub joiners: Option<f64>,
    pub age: Option<f64>,
    pub size: Option<f64>,
    pub launch_phase: Option<bool>,
    pub emotionality: Option<f64>,
    pub sentiment: Option<f64>,
    pub complexity: Option<f64>,
    pub past_activity: Option<f64>,
    pub group_betweenness: Option<f64>,
    pub rotating_leadership: Option<f64>,
    pub maturity: Option<f64>,
    pub december: Option<bool>,
    /// Additional numeric columns (seasonal dummies, analyst edits).
    pub extra: BTreeMap<String, f64>,
}

/// Column order of the exported panel.
pub const PANEL_COLUMNS: [&str; 14] = [
    "community_id",
    "month",
    "joiners",
    "age",
    "size",
    "launch_phase",
    "emotionality",
    "sentiment",
    "complexity",
    "past_activity",
    "group_betweenness",
    "rotating_leadership",
    "maturity",
    "december",
];

/// The ten descriptive variables in correlation-table order.
pub const TABLE_VARIABLES: [&str; 10] = [
    "joiners",
    "age",
    "size",
    "launch_phase",
    "emotionality",
    "sentiment",
    "complexity",
    "past_activity",
    "group_betweenness",
    "rotating_leadership",
];

pub fn display_name(column: &str) -> String {
    match column {
        "joiners" => "Joiners".into(),
        "age" => "Age".into(),
        "size" => "Size".into(),
        "launch_phase" => "Launch Phase".into(),
        "emotionality" => "Emotionality".into(),
        "sentiment" => "Sentiment".into(),
        "complexity" => "Complexity".into(),
        "past_activity" => "Past Activity".into(),
        "group_betweenness" => "Group Betweenness Centrality".into(),
        "rotating_leadership" => "Rotating Leadership".into(),
        "maturity" => "Maturity".into(),
        "december" => "December".into(),
        "intercept" => "Constant".into(),
        other => other.to_string(),
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl PanelRow {
    /// Numeric value of a column; `Ok(None)` when the value is missing.
    pub fn value(&self, column: &str) -> Result<Option<f64>, PanelError> {
        Ok(match column {
            "joiners" => self.joiners,
            "age" => self.age,
            "size" => self.size,
            "launch_phase" => self.launch_phase.map(flag),
            "emotionality" => self.emotionality,
            "sentiment" => self.sentiment,
            "complexity" => self.complexity,
            "past_activity" => self.past_activity,
            "group_betweenness" => self.group_betweenness,
            "rotating_leadership" => self.rotating_leadership,
            "maturity" => self.maturity,
            "december" => self.december.map(flag),
            other => match self.extra.get(other) {
                Some(v) => Some(*v),
                None => return Err(PanelError::UnknownColumn(other.to_string())),
            },
        })
    }

    fn has_column(&self, column: &str) -> bool {
        PANEL_COLUMNS[2..].contains(&column) || self.extra.contains_key(column)
    }
}

/// Full outer join of the three metric tables on (community, month).
///
/// The community sets of the three inputs must agree. Rows come back sorted by
/// community, then month.
pub fn assemble_panel(
    dynamics: &[DynamicsRow],
    language: &[LanguageRow],
    network: &[NetworkRow],
) -> Result<Vec<PanelRow>, PanelError> {
    let ids = |it: &mut dyn Iterator<Item = &String>| it.cloned().collect::<BTreeSet<_>>();
    let dyn_ids = ids(&mut dynamics.iter().map(|r| &r.community_id));
    let lang_ids = ids(&mut language.iter().map(|r| &r.community_id));
    let net_ids = ids(&mut network.iter().map(|r| &r.community_id));
    if dyn_ids != lang_ids || dyn_ids != net_ids {
        let all: BTreeSet<_> = dyn_ids.union(&lang_ids).chain(net_ids.iter()).collect();
        let missing: Vec<String> = all
            .into_iter()
            .filter(|c| !(dyn_ids.contains(*c) && lang_ids.contains(*c) && net_ids.contains(*c)))
            .cloned()
            .collect();
        return Err(PanelError::CommunityMismatch(format!(
            "not present in every table: {}",
            missing.join(", ")
        )));
    }

    let mut rows: BTreeMap<(String, YearMonth), PanelRow> = BTreeMap::new();
    for d in dynamics {
        let row = entry(&mut rows, &d.community_id, d.month);
        row.joiners = Some(d.joiners as f64);
        row.age = Some(d.age as f64);
        row.size = Some(d.size as f64);
        row.launch_phase = Some(d.launch_phase);
        row.past_activity = Some(d.past_activity as f64);
        row.rotating_leadership = Some(d.rotating_leadership);
    }
    for l in language {
        let row = entry(&mut rows, &l.community_id, l.month);
        row.sentiment = l.sentiment;
        row.emotionality = l.emotionality;
        row.complexity = l.complexity;
    }
    for n in network {
        entry(&mut rows, &n.community_id, n.month).group_betweenness = n.group_betweenness;
    }
    Ok(rows.into_values().collect())
}

fn entry<'a>(
    rows: &'a mut BTreeMap<(String, YearMonth), PanelRow>,
    community: &str,
    month: YearMonth,
) -> &'a mut PanelRow {
    rows.entry((community.to_string(), month))
        .or_insert_with(|| PanelRow {
            community_id: community.to_string(),
            month: Some(month),
            december: Some(month.month() == 12),
            ..PanelRow::default()
        })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_flag(v: Option<bool>) -> String {
    v.map(|b| if b { "1" } else { "0" }.to_string()).unwrap_or_default()
}

/// Writes the panel in [`PANEL_COLUMNS`] order, followed by any extra
/// columns in name order. Missing values are empty fields.
pub fn write_panel_csv<W: Write>(rows: &[PanelRow], out: W) -> Result<(), PanelError> {
    let extras: BTreeSet<&String> = rows.iter().flat_map(|r| r.extra.keys()).collect();
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = PANEL_COLUMNS
        .iter()
        .copied()
        .chain(extras.iter().map(|s| s.as_str()))
        .collect();
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.community_id.clone(),
            r.month.map(|m| m.to_string()).unwrap_or_default(),
            fmt_opt(r.joiners),
            fmt_opt(r.age),
            fmt_opt(r.size),
            fmt_flag(r.launch_phase),
            fmt_opt(r.emotionality),
            fmt_opt(r.sentiment),
            fmt_opt(r.complexity),
            fmt_opt(r.past_activity),
            fmt_opt(r.group_betweenness),
            fmt_opt(r.rotating_leadership),
            fmt_opt(r.maturity),
            fmt_flag(r.december),
        ];
        rec.extend(extras.iter().map(|k| fmt_opt(r.extra.get(*k).copied())));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_panel_csv<R: Read>(input: R) -> Result<Vec<PanelRow>, PanelError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let mut row = PanelRow::default();
        for (name, raw) in headers.iter().zip(rec.iter()) {
            let raw = raw.trim();
            let invalid = || PanelError::InvalidValue {
                column: name.to_string(),
                value: raw.to_string(),
            };
            let num = || -> Result<Option<f64>, PanelError> {
                if raw.is_empty() {
                    Ok(None)
                } else {
                    raw.parse::<f64>().map(Some).map_err(|_| invalid())
                }
            };
            let boolean = || -> Result<Option<bool>, PanelError> {
                match raw {
                    "" => Ok(None),
                    "0" | "false" => Ok(Some(false)),
                    "1" | "true" => Ok(Some(true)),
                    _ => Err(invalid()),
                }
            };
            match name {
                "community_id" => row.community_id = raw.to_string(),
                "month" => {
                    row.month = if raw.is_empty() {
                        None
                    } else {
                        Some(raw.parse().map_err(|_| invalid())?)
                    }
                }
                "joiners" => row.joiners = num()?,
                "age" => row.age = num()?,
                "size" => row.size = num()?,
                "launch_phase" => row.launch_phase = boolean()?,
                "emotionality" => row.emotionality = num()?,
                "sentiment" => row.sentiment = num()?,
                "complexity" => row.complexity = num()?,
                "past_activity" => row.past_activity = num()?,
                "group_betweenness" => row.group_betweenness = num()?,
                "rotating_leadership" => row.rotating_leadership = num()?,
                "maturity" => row.maturity = num()?,
                "december" => row.december = boolean()?,
                other => {
                    if let Some(v) = num()? {
                        row.extra.insert(other.to_string(), v);
                    }
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Product-moment correlation with its two-tailed p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CorrelationUndefined {
    #[error("fewer than 3 complete pairs")]
    TooFewPairs,
    #[error("zero variance")]
    ZeroVariance,
}

impl Correlation {
    /// Attaches the t-test p-value (n − 2 degrees of freedom) to a known r.
    ///
    /// With `t² = r²(n−2)/(1−r²)` the two-tailed tail probability reduces to
    /// the regularized incomplete beta `I_{1−r²}((n−2)/2, 1/2)`.
    pub fn from_r(r: f64, n: usize) -> Self {
        let r = r.clamp(-1.0, 1.0);
        let df = n as f64 - 2.0;
        let x = 1.0 - r * r;
        let p = if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            beta_reg(df / 2.0, 0.5, x)
        };
        Self { r, p, n }
    }

    /// `**` below 0.01, `*` below 0.05.
    pub fn stars(&self) -> &'static str {
        significance_stars(self.p, &[0.01, 0.05])
    }
}

/// One star per threshold the p-value falls under; thresholds ascending.
pub fn significance_stars(p: f64, thresholds: &[f64]) -> &'static str {
    const STARS: [&str; 4] = ["", "*", "**", "***"];
    let hits = thresholds.iter().filter(|&&t| p < t).count();
    STARS[hits.min(3)]
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation, CorrelationUndefined> {
    assert_eq!(x.len(), y.len(), "pearson: series lengths differ");
    let n = x.len();
    if n < 3 {
        return Err(CorrelationUndefined::TooFewPairs);
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationUndefined::ZeroVariance);
    }
    Ok(Correlation::from_r((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0), n))
}

/// Pairwise-complete values of two columns.
pub fn complete_pairs(
    rows: &[PanelRow],
    a: &str,
    b: &str,
) -> Result<(Vec<f64>, Vec<f64>), PanelError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in rows {
        if let (Some(x), Some(y)) = (row.value(a)?, row.value(b)?) {
            xs.push(x);
            ys.push(y);
        }
    }
    Ok((xs, ys))
}

/// Symmetric correlation matrix with per-cell n and p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub variables: Vec<String>,
    /// `cells[i][j]`; `None` where undefined.
    pub cells: Vec<Vec<Option<Correlation>>>,
}

impl CorrelationReport {
    pub fn compute(rows: &[PanelRow], variables: &[&str]) -> Result<Self, PanelError> {
        let k = variables.len();
        let mut cells = vec![vec![None; k]; k];
        for i in 0..k {
            for j in 0..=i {
                let (x, y) = complete_pairs(rows, variables[i], variables[j])?;
                let cell = if i == j {
                    // Diagonal is exactly 1 whenever the variable varies.
                    pearson(&x, &y).ok().map(|c| Correlation { r: 1.0, p: 0.0, n: c.n })
                } else {
                    pearson(&x, &y).ok()
                };
                cells[i][j] = cell;
                cells[j][i] = cell;
            }
        }
        Ok(Self {
            variables: variables.iter().map(|s| s.to_string()).collect(),
            cells,
        })
    }

    /// Report from a published lower-triangular r matrix (row i holds
    /// columns 0..i) at a common n; p-values are recomputed from r and n.
    pub fn from_lower_triangle(variables: &[&str], lower: &[&[f64]], n: usize) -> Self {
        let k = variables.len();
        let mut cells = vec![vec![None; k]; k];
        for i in 0..k {
            cells[i][i] = Some(Correlation { r: 1.0, p: 0.0, n });
            for (j, &r) in lower[i].iter().enumerate().take(i) {
                let c = Some(Correlation::from_r(r, n));
                cells[i][j] = c;
                cells[j][i] = c;
            }
        }
        Self {
            variables: variables.iter().map(|s| s.to_string()).collect(),
            cells,
        }
    }

    pub fn get(&self, a: &str, b: &str) -> Option<Correlation> {
        let i = self.variables.iter().position(|v| v == a)?;
        let j = self.variables.iter().position(|v| v == b)?;
        self.cells[i][j]
    }

    /// Lower-triangular table, coefficients to three decimals with stars.
    pub fn render(&self) -> String {
        let k = self.variables.len();
        let labels: Vec<String> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{} {}", i + 1, display_name(v)))
            .collect();
        let label_w = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
        const CELL_W: usize = 8;
        let mut out = String::new();
        let _ = write!(out, "{:label_w$}", "");
        for j in 0..k {
            let _ = write!(out, "{:>CELL_W$}", j + 1);
        }
        out.push('\n');
        for (i, label) in labels.iter().enumerate() {
            let _ = write!(out, "{label:<label_w$}");
            for j in 0..=i {
                let cell = match self.cells[i][j] {
                    _ if i == j => "1".to_string(),
                    Some(c) => format!("{}{}", format_coefficient(c.r), c.stars()),
                    None => "n/a".to_string(),
                };
                let _ = write!(out, "{cell:>CELL_W$}");
            }
            out.push('\n');
        }
        let ns: BTreeSet<usize> = self.cells.iter().flatten().flatten().map(|c| c.n).collect();
        let n_note = match (ns.first(), ns.last()) {
            (Some(a), Some(b)) if a == b => format!("N={a}"),
            (Some(a), Some(b)) => format!("pairwise N={a}..{b}"),
            _ => "N=0".to_string(),
        };
        let _ = writeln!(out, "**p<0.01; *p<0.05. Pearson correlation coefficients ({n_note}).");
        out
    }
}

/// `0.374` → `.374`, `-0.080` → `-.080`.
pub fn format_coefficient(r: f64) -> String {
    let s = format!("{r:.3}");
    if let Some(rest) = s.strip_prefix("-0.") {
        format!("-.{rest}")
    } else if let Some(rest) = s.strip_prefix("0.") {
        format!(".{rest}")
    } else {
        s
    }
}

/// Single principal component of age, size and launch phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaturityFactor {
    /// Loadings on (age, size, launch_phase).
    pub loadings: [f64; 3],
    pub eigenvalue: f64,
    pub variance_explained: f64,
    /// Standardized scores for the rows used, in row order; rows with a
    /// missing input get `None`.
    pub scores: Vec<Option<f64>>,
}

pub const MATURITY_INPUTS: [&str; 3] = ["age", "size", "launch_phase"];

/// Principal-component factoring of the correlation matrix of the three
/// maturity inputs, keeping the first component. The component is oriented
/// so the age loading is non-negative; scores have mean 0 and unit
/// (population) variance.
pub fn maturity_factor(rows: &[PanelRow]) -> Result<MaturityFactor, PanelError> {
    let mut data: Vec<(usize, [f64; 3])> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let vals = [
            row.value("age")?,
            row.value("size")?,
            row.value("launch_phase")?,
        ];
        if let [Some(a), Some(s), Some(l)] = vals {
            data.push((i, [a, s, l]));
        }
    }
    let n = data.len();
    if n < 3 {
        return Err(PanelError::TooFewRows(n));
    }
    let nf = n as f64;
    let mut means = [0.0; 3];
    let mut sds = [0.0; 3];
    for k in 0..3 {
        means[k] = data.iter().map(|(_, v)| v[k]).sum::<f64>() / nf;
        let var = data.iter().map(|(_, v)| (v[k] - means[k]).powi(2)).sum::<f64>() / nf;
        if var <= f64::EPSILON * means[k].abs().max(1.0) {
            return Err(PanelError::DegenerateVariable(MATURITY_INPUTS[k].to_string()));
        }
        sds[k] = var.sqrt();
    }
    let z: Vec<[f64; 3]> = data
        .iter()
        .map(|(_, v)| std::array::from_fn(|k| (v[k] - means[k]) / sds[k]))
        .collect();
    let mut corr = Matrix3::<f64>::identity();
    for a in 0..3 {
        for b in 0..a {
            let r = z.iter().map(|row| row[a] * row[b]).sum::<f64>() / nf;
            let r = r.clamp(-1.0, 1.0);
            corr[(a, b)] = r;
            corr[(b, a)] = r;
        }
    }
    let eigen = SymmetricEigen::new(corr);
    let top = eigen.eigenvalues.imax();
    let eigenvalue = eigen.eigenvalues[top].max(0.0);
    let mut vector: [f64; 3] = std::array::from_fn(|k| eigen.eigenvectors[(k, top)]);
    if vector[0] < 0.0 {
        vector.iter_mut().for_each(|v| *v = -*v);
    }
    let loadings = vector.map(|v| v * eigenvalue.sqrt());

    let raw_scores: Vec<f64> = z
        .iter()
        .map(|row| row.iter().zip(&vector).map(|(a, b)| a * b).sum())
        .collect();
    let mean = raw_scores.iter().sum::<f64>() / nf;
    let sd = (raw_scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / nf).sqrt();
    let mut scores = vec![None; rows.len()];
    for ((i, _), s) in data.iter().zip(&raw_scores) {
        scores[*i] = Some((s - mean) / sd);
    }
    Ok(MaturityFactor {
        loadings,
        eigenvalue,
        variance_explained: eigenvalue / 3.0,
        scores,
    })
}

/// Fills `maturity` from a factor computed on the same rows.
pub fn apply_maturity(rows: &mut [PanelRow], factor: &MaturityFactor) {
    for (row, score) in rows.iter_mut().zip(&factor.scores) {
        row.maturity = *score;
    }
}

/// Checks that every column exists on every row.
pub fn require_columns(rows: &[PanelRow], columns: &[&str]) -> Result<(), PanelError> {
    for c in columns {
        if rows.iter().any(|r| !r.has_column(c)) {
            return Err(PanelError::UnknownColumn(c.to_string()));
        }
    }
    Ok(())
}
