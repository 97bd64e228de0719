//! Datasets, CSV ingestion, response slicing, group moments and
//! standardization.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{format_f64, DenseMatrix, SpdMatrix};
use crate::simgen::RngStream;

/// The response attached to each row. Class labels are 0-based indices
/// into [`LabeledDataset::class_names`].
#[derive(Clone, Debug, PartialEq)]
pub enum Response {
    Binary(Vec<usize>),
    Categorical(Vec<usize>),
    Continuous(Vec<f64>),
}

impl Response {
    pub fn len(&self) -> usize {
        match self {
            Response::Binary(v) | Response::Categorical(v) => v.len(),
            Response::Continuous(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ResponseKind {
        match self {
            Response::Binary(_) => ResponseKind::Binary,
            Response::Categorical(_) => ResponseKind::Categorical,
            Response::Continuous(_) => ResponseKind::Continuous,
        }
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match self {
            Response::Binary(v) | Response::Categorical(v) => Some(v),
            Response::Continuous(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseKind {
    Binary,
    Categorical,
    Continuous,
}

impl std::str::FromStr for ResponseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" => Ok(Self::Binary),
            "categorical" => Ok(Self::Categorical),
            "continuous" => Ok(Self::Continuous),
            other => Err(Error::config("response_kind", format!("unknown kind {other:?}"))),
        }
    }
}

/// A partition of rows into groups, indexed `0..count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Groups {
    pub membership: Vec<usize>,
    pub count: usize,
}

impl Groups {
    pub fn new(membership: Vec<usize>) -> Self {
        let count = membership.iter().max().map_or(0, |m| m + 1);
        Self { membership, count }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.count];
        for &g in &self.membership {
            s[g] += 1;
        }
        s
    }

    pub fn indices(&self, g: usize) -> Vec<usize> {
        self.membership
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == g)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Predictor matrix plus response.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    x: DenseMatrix,
    response: Response,
    class_names: Vec<String>,
    feature_names: Vec<String>,
}

impl LabeledDataset {
    /// Validates shapes and, for class responses, that every class in
    /// `0..H` occurs at least twice.
    pub fn new(x: DenseMatrix, response: Response) -> Result<Self> {
        let class_names = match response.labels() {
            Some(l) => {
                let h = l.iter().max().map_or(0, |m| m + 1);
                (1..=h).map(|i| i.to_string()).collect()
            }
            None => Vec::new(),
        };
        Self::with_names(x, response, class_names, None)
    }

    pub fn with_names(
        x: DenseMatrix,
        response: Response,
        class_names: Vec<String>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if x.rows() != response.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} responses", x.rows()),
                got: format!("{}", response.len()),
            });
        }
        if let Some(labels) = response.labels() {
            let h = class_names.len();
            let mut counts = vec![0usize; h];
            for &l in labels {
                if l >= h {
                    return Err(Error::OutOfRange {
                        context: "class label".into(),
                        value: l as f64,
                    });
                }
                counts[l] += 1;
            }
            let present = counts.iter().filter(|&&c| c > 0).count();
            if present < 2 {
                return Err(Error::SingleClassResponse);
            }
            if matches!(response, Response::Binary(_)) && h != 2 {
                return Err(Error::NotBinary { classes: h });
            }
            if let Some((g, &c)) = counts.iter().enumerate().find(|(_, &c)| c < 2) {
                return Err(Error::GroupTooSmall { group: g, size: c });
            }
        }
        let feature_names =
            feature_names.unwrap_or_else(|| (1..=x.cols()).map(|j| format!("x{j}")).collect());
        Ok(Self {
            x,
            response,
            class_names,
            feature_names,
        })
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn response(&self) -> &Response {
        &self.response
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.groups().map(|g| g.sizes()).unwrap_or_default()
    }

    /// Class membership for a class response; `None` for a continuous one.
    pub fn groups(&self) -> Option<Groups> {
        self.response.labels().map(|l| Groups {
            membership: l.to_vec(),
            count: self.class_names.len(),
        })
    }

    /// Classes for a class response, equal-frequency slices otherwise.
    pub fn groups_or_slices(&self, h_count: usize) -> Result<Groups> {
        match &self.response {
            Response::Continuous(y) => Ok(slice_continuous(y, h_count)?.groups()),
            _ => Ok(self.groups().expect("class response")),
        }
    }

    /// Rows `idx` in the given order. Class validation is not rerun.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let response = match &self.response {
            Response::Binary(l) => Response::Binary(idx.iter().map(|&i| l[i]).collect()),
            Response::Categorical(l) => Response::Categorical(idx.iter().map(|&i| l[i]).collect()),
            Response::Continuous(y) => Response::Continuous(idx.iter().map(|&i| y[i]).collect()),
        };
        Self {
            x: self.x.select_rows(idx),
            response,
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Same response, new predictors (e.g. reduced coordinates).
    pub fn with_x(&self, x: DenseMatrix) -> Result<Self> {
        let names = (1..=x.cols()).map(|j| format!("x{j}")).collect();
        Self::with_names(x, self.response.clone(), self.class_names.clone(), Some(names))
    }

    /// Random split: a `train_fraction` share of rows goes to the first set.
    /// Class responses are split within each class so both sets keep every
    /// class.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::config("train_fraction", "must lie strictly between 0 and 1"));
        }
        let strata: Vec<Vec<usize>> = match self.groups() {
            Some(g) => (0..g.count).map(|h| g.indices(h)).collect(),
            None => vec![(0..self.n()).collect()],
        };
        let mut rng = RngStream::new(seed, 0);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for mut idx in strata {
            for i in (1..idx.len()).rev() {
                let j = rng.below(i as u64 + 1) as usize;
                idx.swap(i, j);
            }
            let n_train = ((idx.len() as f64) * train_fraction).round() as usize;
            a.extend_from_slice(&idx[..n_train]);
            b.extend_from_slice(&idx[n_train..]);
        }
        a.sort_unstable();
        b.sort_unstable();
        let train = self.subset(&a);
        let test = self.subset(&b);
        let revalidate = |d: Self| {
            Self::with_names(d.x, d.response, d.class_names, Some(d.feature_names))
        };
        Ok((revalidate(train)?, revalidate(test)?))
    }
}

/// Which column holds the response.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub response_column: ColumnRef,
    pub response_kind: ResponseKind,
    pub has_header: bool,
}

impl CsvSchema {
    /// Header row, response in the last column.
    pub fn last_column(kind: ResponseKind) -> Self {
        Self {
            response_column: ColumnRef::Name(String::new()),
            response_kind: kind,
            has_header: true,
        }
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "NA" | "na" | "NaN" | "nan" | "null" | "NULL")
}

/// Reads a dataset from CSV.
///
/// Class labels that all parse as numbers are ordered numerically; other
/// labels are numbered in order of first appearance. An empty
/// `ColumnRef::Name` selects the last column.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, schema: &CsvSchema) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(true)
        .from_reader(reader);
    let header: Option<Vec<String>> = if schema.has_header {
        Some(rdr.headers()?.iter().map(|s| s.trim().to_string()).collect())
    } else {
        None
    };

    let mut records: Vec<csv::StringRecord> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        records.push(rec);
    }
    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| records.first().map(|r| r.len()))
        .unwrap_or(0);
    if width < 2 {
        return Err(Error::Parse {
            row: 0,
            col: 0,
            message: "need at least one predictor and one response column".into(),
        });
    }
    let resp_col = match &schema.response_column {
        ColumnRef::Index(i) if *i < width => *i,
        ColumnRef::Index(i) => {
            return Err(Error::config("response_column", format!("index {i} out of range (width {width})")))
        }
        ColumnRef::Name(name) if name.is_empty() => width - 1,
        ColumnRef::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::config("response_column", format!("no column named {name:?}")))?,
    };

    let p = width - 1;
    let mut x = Vec::with_capacity(records.len() * p);
    let mut raw_y: Vec<String> = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::Parse {
                row: r,
                col: rec.len().min(width),
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            if is_missing(cell) {
                return Err(Error::MissingValue { row: r, col: c });
            }
            if c == resp_col {
                raw_y.push(cell.trim().to_string());
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: r,
                col: c,
                message: format!("non-numeric predictor {:?}", cell),
            })?;
            if !v.is_finite() {
                return Err(Error::MissingValue { row: r, col: c });
            }
            x.push(v);
        }
    }
    let xm = DenseMatrix::new(records.len(), p, x)?;
    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(c, _)| *c != resp_col)
            .map(|(_, s)| s)
            .collect()
    });

    match schema.response_kind {
        ResponseKind::Continuous => {
            let y = raw_y
                .iter()
                .enumerate()
                .map(|(r, s)| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        row: r,
                        col: resp_col,
                        message: format!("non-numeric response {s:?}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            LabeledDataset::with_names(xm, Response::Continuous(y), Vec::new(), feature_names)
        }
        kind => {
            let (labels, names) = encode_labels(&raw_y);
            if names.len() < 2 {
                return Err(Error::SingleClassResponse);
            }
            let response = if kind == ResponseKind::Binary {
                if names.len() != 2 {
                    return Err(Error::NotBinary { classes: names.len() });
                }
                Response::Binary(labels)
            } else {
                Response::Categorical(labels)
            };
            LabeledDataset::with_names(xm, response, names, feature_names)
        }
    }
}

fn encode_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut names: Vec<String> = Vec::new();
    let mut lookup: HashMap<&str, usize> = HashMap::new();
    for s in raw {
        if !lookup.contains_key(s.as_str()) {
            lookup.insert(s, names.len());
            names.push(s.clone());
        }
    }
    let numeric: Option<Vec<f64>> = names.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(vals) = numeric {
        let mut order: Vec<usize> = (0..names.len()).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        names = order.iter().map(|&i| names[i].clone()).collect();
        lookup = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    }
    let labels = raw.iter().map(|s| lookup[s.as_str()]).collect();
    (labels, names)
}

/// Writes predictors then the response as the last column, with a header.
pub fn save_csv(path: impl AsRef<Path>, d: &LabeledDataset) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(file, d)
}

pub fn write_csv<W: std::io::Write>(writer: W, d: &LabeledDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = d.feature_names.clone();
    header.push("y".into());
    w.write_record(&header)?;
    let mut rec: Vec<String> = Vec::with_capacity(d.p() + 1);
    for i in 0..d.n() {
        rec.clear();
        rec.extend(d.x.row(i).iter().map(|&v| format_f64(v)));
        rec.push(match &d.response {
            Response::Continuous(y) => format_f64(y[i]),
            Response::Binary(l) | Response::Categorical(l) => d.class_names[l[i]].clone(),
        });
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Equal-frequency slices of a continuous response.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceAssignment {
    pub h_count: usize,
    /// 0-based slice of each observation.
    pub membership: Vec<usize>,
    /// Largest response value in each of the first `H − 1` slices.
    pub boundaries: Vec<f64>,
}

impl SliceAssignment {
    pub fn groups(&self) -> Groups {
        Groups {
            membership: self.membership.clone(),
            count: self.h_count,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups().sizes()
    }
}

/// Cuts `y` into `h_count` contiguous slices of (nearly) equal size in
/// sorted order. Observations tied across a cut all join the lower slice.
pub fn slice_continuous(y: &[f64], h_count: usize) -> Result<SliceAssignment> {
    let n = y.len();
    if h_count < 2 {
        return Err(Error::config("h_count", "need at least 2 slices"));
    }
    if n < 2 * h_count {
        return Err(Error::TooFewObservations {
            n,
            slices: h_count,
            needed: 2 * h_count,
        });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::MissingValue { row: i, col: 0 });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let distinct = 1 + sorted.windows(2).filter(|w| w[0] != w[1]).count();
    if distinct < h_count {
        return Err(Error::DegenerateResponse {
            distinct,
            slices: h_count,
        });
    }

    let mut membership = vec![0usize; n];
    let mut boundaries = Vec::with_capacity(h_count - 1);
    let mut start = 0usize;
    for s in 0..h_count {
        let end = if s + 1 == h_count {
            n
        } else {
            let mut end = ((s + 1) * n / h_count).max(start + 2).min(n);
            while end < n && sorted[end] == sorted[end - 1] {
                end += 1;
            }
            end
        };
        if end - start < 2 {
            return Err(Error::DegenerateResponse {
                distinct,
                slices: h_count,
            });
        }
        for &i in &order[start..end] {
            membership[i] = s;
        }
        if s + 1 < h_count {
            boundaries.push(sorted[end - 1]);
        }
        start = end;
    }
    Ok(SliceAssignment {
        h_count,
        membership,
        boundaries,
    })
}

/// Per-group sample moments plus pooled and marginal covariances.
#[derive(Clone, Debug)]
pub struct GroupMoments {
    pub counts: Vec<usize>,
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Unbiased (divisor `n_h − 1`).
    pub covariances: Vec<DenseMatrix>,
    /// `Σ_h π̂_h S_h`.
    pub pooled: DenseMatrix,
    pub grand_mean: Vec<f64>,
    /// Divisor `n − 1`.
    pub marginal: DenseMatrix,
}

impl GroupMoments {
    pub fn group_count(&self) -> usize {
        self.counts.len()
    }

    pub fn p(&self) -> usize {
        self.grand_mean.len()
    }
}

fn column_means(x: &DenseMatrix) -> Vec<f64> {
    let mut m = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for (a, b) in m.iter_mut().zip(x.row(i)) {
            *a += b;
        }
    }
    let n = x.rows() as f64;
    m.iter_mut().for_each(|a| *a /= n);
    m
}

/// Mean and covariance (divisor `rows − ddof`) of the rows of `x`.
pub fn mean_and_cov(x: &DenseMatrix, ddof: usize) -> (Vec<f64>, DenseMatrix) {
    let mean = column_means(x);
    let centered = DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - mean[j]);
    let cov = centered
        .t_matmul(&centered)
        .expect("same row count")
        .scale(1.0 / (x.rows() - ddof) as f64);
    (mean, cov)
}

pub fn group_moments(d: &LabeledDataset, groups: &Groups) -> Result<GroupMoments> {
    moments_from_matrix(d.x(), groups)
}

pub fn moments_from_matrix(x: &DenseMatrix, groups: &Groups) -> Result<GroupMoments> {
    if groups.membership.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} group labels", x.rows()),
            got: format!("{}", groups.membership.len()),
        });
    }
    let sizes = groups.sizes();
    if let Some((g, &s)) = sizes.iter().enumerate().find(|(_, &s)| s < 2) {
        return Err(Error::GroupTooSmall { group: g, size: s });
    }
    let n = x.rows();
    let p = x.cols();
    let mut means = Vec::with_capacity(groups.count);
    let mut covariances = Vec::with_capacity(groups.count);
    for g in 0..groups.count {
        let (m, c) = mean_and_cov(&x.select_rows(&groups.indices(g)), 1);
        means.push(m);
        covariances.push(c);
    }
    let priors: Vec<f64> = sizes.iter().map(|&s| s as f64 / n as f64).collect();
    let mut pooled = DenseMatrix::zeros(p, p);
    for (pi, c) in priors.iter().zip(&covariances) {
        pooled.add_scaled(*pi, c)?;
    }
    let (grand_mean, marginal) = mean_and_cov(x, 1);
    Ok(GroupMoments {
        counts: sizes,
        priors,
        means,
        covariances,
        pooled,
        grand_mean,
        marginal,
    })
}

/// Rows `z_i = sx^{-1/2}(x_i − x̄)`.
pub fn standardize(x: &DenseMatrix, sx: &SpdMatrix) -> Result<DenseMatrix> {
    let (_, inv_sqrt) = crate::linalg::spd_sqrt_and_invsqrt(sx)?;
    let mean = column_means(x);
    let centered = DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - mean[j]);
    centered.matmul(inv_sqrt.matrix())
}
