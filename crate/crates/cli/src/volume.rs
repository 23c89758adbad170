//! `conevol volume` and `conevol sweep`.

use std::io::Write;
use std::str::FromStr;

use anyhow::Context;
use clap::ValueEnum;
use conevol::bounds::convex_volume_bound;
use conevol::geometry::{orthonormal_basis, volume_ratio, GaugeKind, GaugeOracle, VolumeEstimate};
use conevol::sphere::MetricTag;
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Cone {
    Pos,
    Convex,
    Ktilde,
    Sos,
    Ball,
}

impl Cone {
    pub fn gauge_kind(self) -> GaugeKind {
        match self {
            Cone::Pos => GaugeKind::PosTilde,
            Cone::Convex => GaugeKind::XSection,
            Cone::Ktilde => GaugeKind::KTilde,
            Cone::Sos => GaugeKind::SqTilde,
            Cone::Ball => GaugeKind::Ball,
        }
    }

    /// Metric used by `sweep`, which has no metric flag.
    pub fn natural_metric(self) -> MetricTag {
        match self {
            Cone::Convex | Cone::Ktilde => MetricTag::Hessian,
            Cone::Pos | Cone::Sos | Cone::Ball => MetricTag::L2,
        }
    }

    /// Growth exponent in `n` of the volume at fixed degree, where one is
    /// known.
    pub fn reference_exponent(self, d: u32) -> f64 {
        match self {
            Cone::Pos | Cone::Convex | Cone::Ktilde => -0.5,
            Cone::Sos => 0.5 - d as f64,
            Cone::Ball => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cone::Pos => "pos",
            Cone::Convex => "convex",
            Cone::Ktilde => "ktilde",
            Cone::Sos => "sos",
            Cone::Ball => "ball",
        }
    }
}

/// The convex-section lower bound applies to the section `X` measured in
/// the Hessian metric and to nothing else.
pub fn lower_bound(cone: Cone, metric: MetricTag, n: usize, d: u32) -> Option<f64> {
    (cone == Cone::Convex && metric == MetricTag::Hessian).then(|| convex_volume_bound(n, d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub manifest: RunManifest,
    pub cone: Cone,
    pub n: usize,
    pub degree: u32,
    pub metric: MetricTag,
    pub estimate: VolumeEstimate,
    pub lower_bound: Option<f64>,
    pub reference_exponent: f64,
    pub jensen_chain_holds: bool,
}

pub fn estimate(cone: Cone, n: usize, d: u32, metric: MetricTag, samples: usize, seed: u64) -> anyhow::Result<VolumeEstimate> {
    let basis = orthonormal_basis(n, d, metric).context("building the subspace basis")?;
    let oracle = GaugeOracle::new(cone.gauge_kind(), n, d).with_metric(metric);
    Ok(volume_ratio(&oracle, &basis, samples, seed)?)
}

pub fn jensen_chain(e: &VolumeEstimate) -> bool {
    let s = &e.estimator;
    s.power_mean_root >= s.inverse_mean && s.inverse_mean >= s.harmonic_mean
}

pub fn volume(
    cone: Cone,
    n: usize,
    d: u32,
    metric: MetricTag,
    samples: usize,
    seed: u64,
    manifest: RunManifest,
) -> anyhow::Result<VolumeReport> {
    let estimate = estimate(cone, n, d, metric, samples, seed)?;
    Ok(VolumeReport {
        manifest,
        cone,
        n,
        degree: 2 * d,
        metric,
        jensen_chain_holds: jensen_chain(&estimate),
        lower_bound: lower_bound(cone, metric, n, d),
        reference_exponent: cone.reference_exponent(d),
        estimate,
    })
}

/// Inclusive range `a..b` or a single value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

impl NRange {
    pub fn iter(self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }
}

impl FromStr for NRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad range bound {t:?}: {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        Ok(NRange { lo, hi })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub cone: String,
    pub power_mean_root: Option<f64>,
    pub inverse_mean: Option<f64>,
    pub harmonic_mean: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub lower_bound: Option<f64>,
    pub reference_exponent: f64,
    pub metric: String,
    pub samples: usize,
    pub flagged_fraction: Option<f64>,
    /// This row's `power_mean_root` over the `pos` row at the same `n`;
    /// empty when the two rows use different metrics.
    pub ratio_to_pos: Option<f64>,
    pub error: Option<String>,
}

pub struct SweepPlan {
    pub cones: Vec<Cone>,
    pub n_range: NRange,
    pub d: u32,
    pub samples: usize,
    pub sos_samples: usize,
    pub seed: u64,
}

/// Runs every `(n, cone)` cell in order, writing each row as soon as it is
/// known. A failing cell yields a row with only `error` filled in.
pub fn sweep<W: Write>(plan: &SweepPlan, out: W) -> anyhow::Result<Vec<SweepRow>> {
    let mut writer = csv::Writer::from_writer(out);
    let mut rows = Vec::new();
    for n in plan.n_range.iter() {
        let mut pos_value = None;
        // pos first so the ratio column can be filled for later cones.
        let mut order = plan.cones.clone();
        order.sort_by_key(|c| *c != Cone::Pos);
        let mut cell_rows = Vec::new();
        for cone in order {
            let metric = cone.natural_metric();
            let samples = if cone == Cone::Sos { plan.sos_samples } else { plan.samples };
            let mut row = SweepRow {
                n,
                cone: cone.name().to_string(),
                lower_bound: lower_bound(cone, metric, n, plan.d),
                reference_exponent: cone.reference_exponent(plan.d),
                metric: metric.to_string(),
                samples,
                ..SweepRow::default()
            };
            match estimate(cone, n, plan.d, metric, samples, plan.seed) {
                Ok(e) => {
                    let s = e.estimator;
                    row.power_mean_root = Some(s.power_mean_root);
                    row.inverse_mean = Some(s.inverse_mean);
                    row.harmonic_mean = Some(s.harmonic_mean);
                    row.ci_low = Some(e.ci[0]);
                    row.ci_high = Some(e.ci[1]);
                    row.flagged_fraction = Some(e.flagged_fraction);
                    if cone == Cone::Pos {
                        pos_value = Some(s.power_mean_root);
                    }
                    if metric == Cone::Pos.natural_metric() {
                        row.ratio_to_pos = pos_value.map(|p| s.power_mean_root / p);
                    }
                }
                Err(err) => row.error = Some(format!("{err:#}")),
            }
            cell_rows.push((cone, row));
        }
        // Emit in the requested cone order.
        for cone in &plan.cones {
            if let Some(i) = cell_rows.iter().position(|(c, _)| c == cone) {
                let (_, row) = cell_rows.remove(i);
                writer.serialize(&row)?;
                writer.flush()?;
                rows.push(row);
            }
        }
    }
    writer.flush()?;
    Ok(rows)
}
