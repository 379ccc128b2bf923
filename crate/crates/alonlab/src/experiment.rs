//! Expansion checks and seeded Monte Carlo campaigns over the random models.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{LabeledGraph, ModelTag};
use crate::models::{sample, splitmix64, ModelId};
use crate::par::{par_map, worker_count};
use crate::spectrum::spectrum;

/// Largest vertex count for the exhaustive subset scan.
pub const SPREADER_MAX_N: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct SpreaderReport {
    pub gamma: f64,
    /// Smallest `|Gamma(A)| / |A|` over nonempty `A` with `|A| <= n/2`.
    pub worst_ratio: f64,
    /// A set attaining the worst ratio.
    pub witness: Vec<usize>,
    pub holds: bool,
}

impl SpreaderReport {
    /// The largest `gamma` for which the graph is a spreader.
    pub fn best_gamma(&self) -> f64 {
        self.worst_ratio - 1.0
    }
}

/// Whether every nonempty `A` with `|A| <= n/2` has `|Gamma(A)| >= (1 + gamma)|A|`,
/// `Gamma(A)` being the set of vertices adjacent to some vertex of `A`.
pub fn spreader_check(g: &LabeledGraph, gamma: f64) -> Result<SpreaderReport> {
    let n = g.n();
    if n > SPREADER_MAX_N {
        return Err(Error::Budget(format!("exhaustive spreader scan supports n <= {SPREADER_MAX_N}, got {n}")));
    }
    if n < 2 {
        return Ok(SpreaderReport { gamma, worst_ratio: f64::INFINITY, witness: Vec::new(), holds: true });
    }
    let nbr: Vec<u32> = (0..n).map(|v| g.neighbours(v).iter().fold(0u32, |m, &w| m | (1 << w))).collect();
    let mut gamma_of = vec![0u32; 1 << n];
    let (mut best_num, mut best_den, mut best_set) = (u32::MAX, 1u32, 0u32);
    for mask in 1u32..(1u32 << n) {
        let low = mask.trailing_zeros() as usize;
        gamma_of[mask as usize] = gamma_of[(mask & (mask - 1)) as usize] | nbr[low];
        let size = mask.count_ones();
        if size as usize > n / 2 {
            continue;
        }
        let image = gamma_of[mask as usize].count_ones();
        if (image as u64) * (best_den as u64) < (best_num as u64) * (size as u64) {
            best_num = image;
            best_den = size;
            best_set = mask;
        }
    }
    let worst_ratio = best_num as f64 / best_den as f64;
    let witness = (0..n).filter(|&v| best_set & (1 << v) != 0).collect();
    Ok(SpreaderReport { gamma, worst_ratio, witness, holds: worst_ratio >= 1.0 + gamma - 1e-12 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub gamma: f64,
    /// `d^2 - gamma^2 / (4 + 2 gamma^2)`
    pub bound: f64,
    /// `max_{i > 1} lambda_i^2`
    pub max_square: f64,
    pub holds: bool,
}

/// Absolute slack allowed in the eigenvalue comparison.
pub const SEPARATION_TOL: f64 = 1e-9;

/// Checks `lambda_i^2 <= d^2 - gamma^2/(4 + 2 gamma^2)` for `i > 1` on a
/// d-regular graph that is a gamma-spreader.
pub fn separation_check(g: &LabeledGraph, gamma: f64) -> Result<SeparationReport> {
    let d = g.regular_degree().ok_or_else(|| Error::Invalid("graph is not regular".into()))? as f64;
    if !spreader_check(g, gamma)?.holds {
        return invalid(format!("graph is not a {gamma}-spreader"));
    }
    let s = spectrum(g)?;
    let max_square = s.values.iter().skip(1).map(|x| x * x).fold(0.0, f64::max);
    let bound = d * d - gamma * gamma / (4.0 + 2.0 * gamma * gamma);
    Ok(SeparationReport { gamma, bound, max_square, holds: max_square <= bound + SEPARATION_TOL * d })
}

/// Which eigenvalue statistic a campaign thresholds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    /// The second largest eigenvalue.
    #[default]
    Lambda2,
    /// `max(|lambda_2|, |lambda_n|)`.
    Absmax,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelTag,
    pub d: u32,
    pub n_list: Vec<usize>,
    pub samples: u64,
    pub epsilon: f64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub thresholds: Statistic,
}

fn default_workers() -> usize {
    1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 100 {
            return invalid("samples must be at least 100");
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("n_list must be nonempty and strictly increasing");
        }
        if !(self.epsilon >= 0.0) {
            return invalid("epsilon must be nonnegative");
        }
        for &n in &self.n_list {
            ModelId::new(self.model, self.d, n)?;
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub model: String,
    pub d: u32,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub exceed_bare: u64,
    pub exceed_eps: u64,
    pub p_bare: f64,
    pub p_eps: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub median_lambda2: f64,
    pub median_absmax: f64,
}

/// Per-sample eigenvalue statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStats {
    pub lambda1: f64,
    pub lambda2: f64,
    pub absmax: f64,
    pub connected: bool,
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let m = values.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Root seed of the sample streams for vertex count `n`.
pub fn campaign_root(seed: u64, n: usize) -> u64 {
    splitmix64(seed ^ splitmix64(n as u64))
}

/// Eigenvalue statistics of samples `0..samples` of `model`.
pub fn sample_statistics(model: ModelId, seed: u64, samples: u64, workers: usize) -> Result<Vec<SampleStats>> {
    let root = campaign_root(seed, model.n);
    par_map(0..samples, workers, |i| -> Result<SampleStats> {
        let g = sample(model, root, i)?;
        let s = spectrum(&g)?;
        Ok(SampleStats { lambda1: s.lambda1(), lambda2: s.lambda2(), absmax: s.abs_max_nontrivial(), connected: g.is_connected() })
    })
    .into_iter()
    .collect()
}

/// One CSV row per vertex count.
pub fn run_campaign(cfg: &ExperimentConfig) -> Result<Vec<CampaignRow>> {
    cfg.validate()?;
    let workers = worker_count(Some(cfg.workers));
    let bare = 2.0 * ((cfg.d as f64) - 1.0).sqrt();
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let model = ModelId::new(cfg.model, cfg.d, n)?;
        let stats = sample_statistics(model, cfg.seed, cfg.samples, workers)?;
        for s in &stats {
            if s.connected && (s.lambda1 - cfg.d as f64).abs() > 1e-8 {
                return Err(Error::Verification(format!("connected sample with lambda_1 = {} != d", s.lambda1)));
            }
        }
        let value = |s: &SampleStats| match cfg.thresholds {
            Statistic::Lambda2 => s.lambda2,
            Statistic::Absmax => s.absmax,
        };
        let exceed_bare = stats.iter().filter(|s| value(s) > bare).count() as u64;
        let exceed_eps = stats.iter().filter(|s| value(s) > bare + cfg.epsilon).count() as u64;
        let (wilson_lo, wilson_hi) = wilson_interval(exceed_bare, cfg.samples);
        let mut l2: Vec<f64> = stats.iter().map(|s| s.lambda2).collect();
        let mut am: Vec<f64> = stats.iter().map(|s| s.absmax).collect();
        rows.push(CampaignRow {
            model: cfg.model.as_str().to_string(),
            d: cfg.d,
            n,
            samples: cfg.samples,
            seed: cfg.seed,
            exceed_bare,
            exceed_eps,
            p_bare: exceed_bare as f64 / cfg.samples as f64,
            p_eps: exceed_eps as f64 / cfg.samples as f64,
            wilson_lo,
            wilson_hi,
            median_lambda2: median(&mut l2),
            median_absmax: median(&mut am),
        });
    }
    Ok(rows)
}

pub fn campaign_csv(rows: &[CampaignRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record([
            "model", "d", "n", "samples", "seed", "exceed_bare", "exceed_eps", "p_bare", "p_eps", "wilson_lo", "wilson_hi", "median_lambda2",
            "median_absmax",
        ])?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?).map_err(|e| Error::Invalid(e.to_string()))
}

pub fn read_campaign_csv(text: &str) -> Result<Vec<CampaignRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares slope of `ln p` against `ln n` over points with `p > 0`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|&&(n, p)| n > 0.0 && p > 0.0).map(|&(n, p)| (n.ln(), p.ln())).collect();
    if pts.len() < 3 {
        return invalid(format!("need at least 3 vertex counts with nonzero exceedances, have {}", pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("all vertex counts coincide");
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = if pts.len() > 2 { (sse / (m - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(ExponentFit { slope, stderr, intercept, points: pts.len() })
}

/// Fits the bare-threshold exceedance probabilities of campaign rows.
pub fn fit_rows(rows: &[CampaignRow]) -> Result<ExponentFit> {
    fit_exponent(&rows.iter().map(|r| (r.n as f64, r.p_bare)).collect::<Vec<_>>())
}

/// A minimal SVG scatter of `ln p` against `ln n` with the fitted line.
pub fn scatter_svg(rows: &[CampaignRow], fit: Option<&ExponentFit>) -> String {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.p_bare > 0.0).map(|r| ((r.n as f64).ln(), r.p_bare.ln())).collect();
    let (w, h, pad) = (480.0, 360.0, 40.0);
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
    let (x0, x1) = (fold(f64::min, f64::INFINITY, |p| p.0), fold(f64::max, f64::NEG_INFINITY, |p| p.0));
    let (y0, y1) = (fold(f64::min, f64::INFINITY, |p| p.1), fold(f64::max, f64::NEG_INFINITY, |p| p.1));
    let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-9) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0).max(1e-9) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">ln n</text>"#, w / 2.0, h - 8.0);
    let _ = writeln!(s, r#"<text x="4" y="{}" font-size="12">ln p</text>"#, h / 2.0);
    for &(x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#, sx(x), sy(y));
    }
    if let (Some(f), false) = (fit, pts.is_empty()) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray"/>"#,
            sx(x0),
            sy(f.intercept + f.slope * x0),
            sx(x1),
            sy(f.intercept + f.slope * x1)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    #[test]
    fn spreader_examples() {
        assert!(spreader_check(&k4(), 1.0).unwrap().holds);
        let c8 = spreader_check(&cycle(8), 0.9).unwrap();
        assert!(!c8.holds);
        assert_eq!(c8.witness.len(), 4);
        assert_eq!(c8.worst_ratio, 1.0);
        assert!(spreader_check(&petersen(), 0.0).unwrap().holds);
    }

    #[test]
    fn separation_examples() {
        let r = separation_check(&k4(), 1.0).unwrap();
        assert!((r.bound - (9.0 - 1.0 / 6.0)).abs() < 1e-12);
        assert!((r.max_square - 1.0).abs() < 1e-9);
        assert!(r.holds);
        let gamma = spreader_check(&petersen(), 0.0).unwrap().best_gamma();
        assert!(separation_check(&petersen(), gamma).unwrap().holds);
        assert!(separation_check(&cycle(8), 0.9).is_err());
    }

    #[test]
    fn exact_power_laws() {
        let one: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0].iter().map(|&n| (n, 1.0 / n)).collect();
        let f = fit_exponent(&one).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12 && f.stderr < 1e-12);
        let two: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&n| (n, 3.0 / (n * n))).collect();
        assert!((fit_exponent(&two).unwrap().slope + 2.0).abs() < 1e-12);
        assert!(fit_exponent(&[(10.0, 0.0), (20.0, 0.0), (40.0, 0.1)]).is_err());
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(5, 2000);
        assert!(lo < 0.0025 && 0.0025 < hi && lo > 0.0);
        assert_eq!(wilson_interval(0, 100).0, 0.0);
    }

    fn config(workers: usize, epsilon: f64) -> ExperimentConfig {
        ExperimentConfig {
            model: ModelTag::G,
            d: 4,
            n_list: vec![20, 40],
            samples: 100,
            epsilon,
            seed: 11,
            workers,
            thresholds: Statistic::Lambda2,
        }
    }

    #[test]
    fn campaign_is_deterministic_across_workers() {
        let a = campaign_csv(&run_campaign(&config(1, 0.1)).unwrap()).unwrap();
        let b = campaign_csv(&run_campaign(&config(3, 0.1)).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("model,d,n,samples,seed,exceed_bare,exceed_eps,p_bare,p_eps,wilson_lo,wilson_hi,median_lambda2,median_absmax\n"));
        let rows = read_campaign_csv(&a).unwrap();
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn huge_epsilon_never_exceeds() {
        let eps = 4.0 - 2.0 * 3f64.sqrt();
        assert!(run_campaign(&config(1, eps)).unwrap().iter().all(|r| r.exceed_eps == 0));
    }

    #[test]
    fn config_validation() {
        let mut c = config(1, 0.1);
        c.samples = 10;
        assert!(c.validate().is_err());
        let mut c = config(1, 0.1);
        c.n_list = vec![40, 20];
        assert!(c.validate().is_err());
        let json = r#"{"model":"g","d":4,"n_list":[20,40],"samples":100,"epsilon":0.1,"seed":11,"workers":2,"thresholds":"absmax"}"#;
        assert_eq!(ExperimentConfig::from_json_str(json).unwrap().thresholds, Statistic::Absmax);
    }
}
