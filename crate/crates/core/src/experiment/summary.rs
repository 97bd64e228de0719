//! Median and quartile tables over replicates.

use crate::error::{Error, Result};

use super::runner::{MetricKind, ReplicateResult};

/// Order statistics of one `(tag, n, label)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub tag: String,
    pub n: usize,
    pub label: String,
    pub metric: MetricKind,
    pub count: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub min: f64,
    pub max: f64,
}

/// Linearly interpolated quantile of sorted data (`q ∈ [0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&v, 0.5))
}

/// One row per `(tag, n, label)`, in first-appearance order.
pub fn summarize(rows: &[ReplicateResult]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut keys: Vec<(String, usize, String, MetricKind)> = Vec::new();
    let mut cells: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let key = (r.tag.clone(), r.n, r.label.clone(), r.metric);
        match keys.iter().position(|k| *k == key) {
            Some(i) => cells[i].push(r.value),
            None => {
                keys.push(key);
                cells.push(vec![r.value]);
            }
        }
    }
    Ok(keys
        .into_iter()
        .zip(cells)
        .map(|((tag, n, label, metric), mut v)| {
            v.sort_by(f64::total_cmp);
            SummaryRow {
                tag,
                n,
                label,
                metric,
                count: v.len(),
                median: quantile_sorted(&v, 0.5),
                q25: quantile_sorted(&v, 0.25),
                q75: quantile_sorted(&v, 0.75),
                min: v[0],
                max: v[v.len() - 1],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::RngStream;

    fn row(label: &str, value: f64) -> ReplicateResult {
        ReplicateResult {
            replicate: 0,
            tag: "Q1".into(),
            n: 51,
            method: None,
            criterion: None,
            label: label.into(),
            metric: MetricKind::Cer,
            value,
            baseline: None,
        }
    }

    #[test]
    fn single_row() {
        let s = summarize(&[row("A", 0.3)]).unwrap();
        assert_eq!(s.len(), 1);
        let r = &s[0];
        assert!([r.median, r.q25, r.q75, r.min, r.max].iter().all(|&v| v == 0.3));
    }

    #[test]
    fn odd_and_even_medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert!(matches!(median(&[]), Err(Error::EmptyInput)));
        assert!(matches!(summarize(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn cells_keep_first_appearance_order() {
        let rows = [row("B", 0.1), row("A", 0.2), row("B", 0.3)];
        let s = summarize(&rows).unwrap();
        assert_eq!(s.iter().map(|r| r.label.as_str()).collect::<Vec<_>>(), ["B", "A"]);
        assert_eq!(s[0].count, 2);
        assert!((s[0].median - 0.2).abs() < 1e-15);
    }

    #[test]
    fn matches_sort_based_oracle() {
        let mut rng = RngStream::new(77, 0);
        let values: Vec<f64> = (0..1000).map(|_| rng.uniform()).collect();
        let rows: Vec<_> = values.iter().map(|&v| row("X", v)).collect();
        let s = &summarize(&rows).unwrap()[0];
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(s.median, 0.5 * (sorted[499] + sorted[500]));
        // Position 0.25·999 = 249.75.
        assert!((s.q25 - (sorted[249] + 0.75 * (sorted[250] - sorted[249]))).abs() < 1e-15);
        assert!((s.q75 - (sorted[749] + 0.25 * (sorted[750] - sorted[749]))).abs() < 1e-15);
        assert_eq!(s.min, sorted[0]);
        assert_eq!(s.max, sorted[999]);
    }
}
