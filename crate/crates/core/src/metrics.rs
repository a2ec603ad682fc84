//! Quantization error, PSNR, run-to-run stability and mean ranks, plus the
//! CSV records the benchmark harness writes.

use serde::{Deserialize, Serialize};

use crate::cluster::RunReport;
use crate::error::{Error, Result};
use crate::imageio::RgbImage;

/// Mean over pixels of the squared RGB error.
pub fn mse(original: &RgbImage, quantized: &RgbImage) -> Result<f64> {
    if original.width() != quantized.width() || original.height() != quantized.height() {
        return Err(Error::DimensionMismatch(
            original.width(),
            original.height(),
            quantized.width(),
            quantized.height(),
        ));
    }
    let total: u64 = original
        .pixels()
        .iter()
        .zip(quantized.pixels())
        .map(|(a, b)| u64::from(a.distance_squared(*b)))
        .sum();
    Ok(total as f64 / original.pixel_count() as f64)
}

/// `20 log10(255 / sqrt(mse))`; `+inf` for a lossless result.
pub fn psnr(mse_value: f64) -> Result<f64> {
    if mse_value.is_nan() || mse_value < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "MSE must be nonnegative, got {mse_value}"
        )));
    }
    if mse_value == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (255.0 / mse_value.sqrt()).log10())
}

/// `100 (1 - sigma / mu)`.
pub fn stability(mu: f64, sigma: f64) -> Result<f64> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::InvalidParameter(format!("mean must be positive, got {mu}")));
    }
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "standard deviation must be nonnegative, got {sigma}"
        )));
    }
    Ok(100.0 * (1.0 - sigma / mu))
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Ranks `scores` ascending from 1; tied scores share their average rank.
pub fn rank_average(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Mean rank of each method over all cells. `table[cell][method]` is the
/// score of a method in one (image, K) cell, lower being better. Missing
/// scores are `None` and rejected.
pub fn mean_ranks(table: &[Vec<Option<f64>>]) -> Result<Vec<f64>> {
    let Some(first) = table.first() else {
        return Err(Error::InvalidParameter("rank table has no cells".into()));
    };
    let methods = first.len();
    let mut totals = vec![0.0; methods];
    for (cell, row) in table.iter().enumerate() {
        let scores = (0..methods)
            .map(|m| {
                row.get(m)
                    .copied()
                    .flatten()
                    .filter(|v| !v.is_nan())
                    .ok_or(Error::MissingCell { cell, method: m })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != methods {
            return Err(Error::MissingCell { cell, method: methods.min(row.len()) });
        }
        for (t, r) in totals.iter_mut().zip(rank_average(&scores)) {
            *t += r;
        }
    }
    Ok(totals.into_iter().map(|t| t / table.len() as f64).collect())
}

/// Per-run CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub image: String,
    pub method: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
    pub iterations: usize,
    pub sse: f64,
    pub mse: f64,
    pub elapsed_ms: f64,
    pub distance_evals: u64,
}

impl RunRecord {
    pub fn new(image: impl Into<String>, report: &RunReport, mse: f64) -> Self {
        Self {
            image: image.into(),
            method: report.method.clone(),
            k: report.k,
            seed: report.seed,
            iterations: report.iterations,
            sse: report.sse,
            mse,
            elapsed_ms: report.elapsed.as_secs_f64() * 1e3,
            distance_evals: report.distance_evals,
        }
    }
}

/// Aggregate over the runs of one (method, image, K) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub method: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub image: String,
    pub runs: usize,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub psnr_mean: f64,
    pub time_mean_ms: f64,
    pub stability: f64,
    pub iterations_mean: f64,
}

impl BenchSummary {
    /// Summarizes runs that all belong to one cell.
    pub fn from_runs(records: &[RunRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InvalidParameter("no runs to summarize".into()))?;
        let mses: Vec<f64> = records.iter().map(|r| r.mse).collect();
        let (mse_mean, mse_std) = mean_std(&mses);
        let psnrs = mses.iter().map(|&m| psnr(m)).collect::<Result<Vec<_>>>()?;
        let psnr_mean = psnrs.iter().sum::<f64>() / psnrs.len() as f64;
        let time_mean_ms = records.iter().map(|r| r.elapsed_ms).sum::<f64>() / records.len() as f64;
        let iterations_mean =
            records.iter().map(|r| r.iterations as f64).sum::<f64>() / records.len() as f64;
        let stability = if mse_mean > 0.0 { stability(mse_mean, mse_std)? } else { 100.0 };
        Ok(Self {
            method: first.method.clone(),
            k: first.k,
            image: first.image.clone(),
            runs: records.len(),
            mse_mean,
            mse_std,
            psnr_mean,
            time_mean_ms,
            stability,
            iterations_mean,
        })
    }
}

/// Mean ranks of one method across all cells, per criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub method: String,
    pub mse_rank: f64,
    pub time_rank: f64,
    pub stability_rank: f64,
    pub overall_rank: f64,
}

/// Ranks every method over every (image, K) cell by mean MSE, mean time
/// and stability (higher stability ranks better). `overall_rank` weighs the
/// three criteria equally.
pub fn rank_summaries(summaries: &[BenchSummary]) -> Result<Vec<RankRecord>> {
    let mut methods: Vec<String> = Vec::new();
    let mut cells: Vec<(String, usize)> = Vec::new();
    for s in summaries {
        if !methods.contains(&s.method) {
            methods.push(s.method.clone());
        }
        let cell = (s.image.clone(), s.k);
        if !cells.contains(&cell) {
            cells.push(cell);
        }
    }
    let lookup = |cell: &(String, usize), method: &str| {
        summaries
            .iter()
            .find(|s| s.image == cell.0 && s.k == cell.1 && s.method == method)
    };
    let table = |score: &dyn Fn(&BenchSummary) -> f64| -> Vec<Vec<Option<f64>>> {
        cells
            .iter()
            .map(|cell| methods.iter().map(|m| lookup(cell, m).map(score)).collect())
            .collect()
    };
    let mse = mean_ranks(&table(&|s| s.mse_mean))?;
    let time = mean_ranks(&table(&|s| s.time_mean_ms))?;
    let stab = mean_ranks(&table(&|s| -s.stability))?;
    Ok(methods
        .into_iter()
        .enumerate()
        .map(|(i, method)| RankRecord {
            method,
            mse_rank: mse[i],
            time_rank: time[i],
            stability_rank: stab[i],
            overall_rank: (mse[i] + time[i] + stab[i]) / 3.0,
        })
        .collect())
}

/// Writes serializable rows as CSV with a header. Floats are written in
/// shortest round-trip form; `+inf` becomes `inf`.
pub fn write_csv<T: Serialize>(out: impl std::io::Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(input: impl std::io::Read) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::RgbColor;

    #[test]
    fn mse_basics() {
        let black = RgbImage::filled(3, 2, RgbColor::BLACK).unwrap();
        let white = RgbImage::filled(3, 2, RgbColor::WHITE).unwrap();
        assert_eq!(mse(&black, &black).unwrap(), 0.0);
        assert_eq!(mse(&black, &white).unwrap(), 195075.0);
        let other = RgbImage::filled(2, 3, RgbColor::BLACK).unwrap();
        assert!(mse(&black, &other).is_err());
    }

    #[test]
    fn psnr_values() {
        assert_eq!(psnr(65025.0).unwrap(), 0.0);
        assert_eq!(psnr(0.0).unwrap(), f64::INFINITY);
        assert!((psnr(100.0).unwrap() - 28.130803608679106).abs() < 1e-9);
        assert!(psnr(-1.0).is_err());
        assert!(psnr(f64::NAN).is_err());
    }

    #[test]
    fn stability_values() {
        assert_eq!(stability(5.0, 0.0).unwrap(), 100.0);
        assert_eq!(stability(5.0, 5.0).unwrap(), 0.0);
        assert!((stability(57.461492, 0.861126).unwrap() - 98.50).abs() < 0.01);
        assert!(stability(0.0, 1.0).is_err());
        assert!(stability(1.0, -1.0).is_err());
    }

    #[test]
    fn ranks_with_and_without_ties() {
        assert_eq!(rank_average(&[3.0, 1.0, 2.0]), [3.0, 1.0, 2.0]);
        assert_eq!(rank_average(&[7.0; 4]), [2.5; 4]);
        assert_eq!(rank_average(&[1.0, 5.0, 1.0, 0.0]), [2.5, 4.0, 2.5, 1.0]);
        let table = vec![vec![Some(3.0), Some(1.0), Some(2.0)]];
        assert_eq!(mean_ranks(&table).unwrap(), [3.0, 1.0, 2.0]);
    }

    #[test]
    fn missing_cells_are_errors() {
        let table = vec![vec![Some(1.0), Some(2.0)], vec![Some(1.0), None]];
        assert!(matches!(
            mean_ranks(&table),
            Err(Error::MissingCell { cell: 1, method: 1 })
        ));
        assert!(mean_ranks(&[]).is_err());
    }

    #[test]
    fn summary_of_identical_runs_is_fully_stable() {
        let rec = RunRecord {
            image: "a".into(),
            method: "mc".into(),
            k: 8,
            seed: 0,
            iterations: 0,
            sse: 10.0,
            mse: 10.0,
            elapsed_ms: 1.0,
            distance_evals: 0,
        };
        let s = BenchSummary::from_runs(&[rec.clone(), rec]).unwrap();
        assert_eq!(s.mse_std, 0.0);
        assert_eq!(s.stability, 100.0);
        assert_eq!(s.runs, 2);
    }

    #[test]
    fn rank_records_cover_all_methods() {
        let mk = |method: &str, image: &str, mse: f64, time: f64| BenchSummary {
            method: method.into(),
            k: 32,
            image: image.into(),
            runs: 1,
            mse_mean: mse,
            mse_std: 0.0,
            psnr_mean: 0.0,
            time_mean_ms: time,
            stability: 100.0,
            iterations_mean: 1.0,
        };
        let rows = vec![
            mk("a", "x", 1.0, 9.0),
            mk("b", "x", 2.0, 1.0),
            mk("a", "y", 1.0, 9.0),
            mk("b", "y", 0.5, 1.0),
        ];
        let ranks = rank_summaries(&rows).unwrap();
        assert_eq!(ranks[0].method, "a");
        assert_eq!(ranks[0].mse_rank, 1.5);
        assert_eq!(ranks[1].time_rank, 1.0);
        assert_eq!(ranks[0].stability_rank, 1.5);
    }
}
