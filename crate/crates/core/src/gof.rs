//! Goodness-of-fit simulation and degeneracy scanning.
//!
//! [`gof_compare`] simulates replicate network sets at a fitted θ and wraps
//! the observed degree, shared-partner, geodesic, and triangle summaries in
//! simulation envelopes. [`degeneracy_scan`] maps a θ grid to long-run
//! density summaries with a bimodality indicator, the observable proxy for
//! probability mass concentrating on near-empty or near-complete graphs.

use crate::error::{Error, Result};
use crate::estimate::NetworkData;
use crate::graph::{Graph, NodeAttributes, dyad_count};
use crate::model::ModelSpec;
use crate::sampler::{Chain, McmcConfig, chain_rng};
use crate::util::{self, batch_means_se, quantile_sorted};

/// Observed statistic families aggregated over a set of networks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GofSummary {
    /// `degree[k]` = number of nodes with degree k, summed over networks.
    pub degree: Vec<u64>,
    /// `esp[m]` = number of edges whose endpoints share exactly m partners
    /// (m starts at 0), summed over networks.
    pub esp: Vec<u64>,
    /// `geodesic[d]` = number of dyads at shortest-path distance d
    /// (`geodesic[0]` unused), plus a separate unreachable class.
    pub geodesic: Vec<u64>,
    pub unreachable: u64,
    /// Total triangle count.
    pub triangles: u64,
}

impl GofSummary {
    fn absorb(&mut self, g: &Graph) {
        grow(&mut self.degree, g.n());
        for i in 0..g.n() {
            self.degree[g.degree(i)] += 1;
        }
        grow(&mut self.esp, g.n().saturating_sub(1));
        let mut closed = 0usize;
        for d in g.edges() {
            let c = g.common_neighbors(d.i(), d.j()).expect("edge endpoints");
            self.esp[c] += 1;
            closed += c;
        }
        self.triangles += (closed / 3) as u64;
        let geo = g.all_pairs_geodesics();
        grow(&mut self.geodesic, geo.counts.len());
        for (d, c) in geo.counts.iter().enumerate() {
            self.geodesic[d] += c;
        }
        self.unreachable += geo.unreachable;
    }
}

fn grow(v: &mut Vec<u64>, len: usize) {
    if v.len() < len {
        v.resize(len, 0);
    }
}

/// Aggregated degree, shared-partner, geodesic, and triangle summaries.
pub fn gof_summary(networks: &[Graph]) -> Result<GofSummary> {
    if networks.is_empty() {
        return Err(Error::Invalid("need at least one network".into()));
    }
    let mut s = GofSummary::default();
    for g in networks {
        s.absorb(g);
    }
    Ok(s)
}

/// One statistic family of a goodness-of-fit report: observed values,
/// per-draw simulated values, and 2.5%/50%/97.5% envelopes per bin.
#[derive(Clone, Debug)]
pub struct FamilyReport {
    pub family: &'static str,
    pub bins: Vec<String>,
    pub observed: Vec<f64>,
    /// draws × bins.
    pub simulated: Vec<Vec<f64>>,
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
    /// Observed value outside the [lower, upper] envelope.
    pub outside: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct GofReport {
    pub families: Vec<FamilyReport>,
    pub draws: usize,
    pub seed: u64,
}

impl GofReport {
    /// Bins in which the observed value escapes its envelope.
    pub fn flagged(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        for f in &self.families {
            for (b, &o) in f.outside.iter().enumerate() {
                if o {
                    out.push((f.family, f.bins[b].clone()));
                }
            }
        }
        out
    }
}

fn summary_to_rows(s: &GofSummary) -> Vec<(&'static str, Vec<f64>)> {
    vec![
        ("degree", s.degree.iter().map(|&v| v as f64).collect()),
        ("esp", s.esp.iter().map(|&v| v as f64).collect()),
        ("geodesic", {
            let mut v: Vec<f64> = s.geodesic.iter().skip(1).map(|&v| v as f64).collect();
            v.push(s.unreachable as f64);
            v
        }),
        ("triangles", vec![s.triangles as f64]),
    ]
}

/// Simulates `draws` replicate network sets at θ̂ and assembles envelope
/// reports per statistic family, flagging bins where the observed value
/// falls outside the central 95% envelope. Each observed network gets its
/// own chain (started at the observed graph) whose r-th retained draw joins
/// the r-th replicate set.
pub fn gof_compare(data: &NetworkData, theta: &[f64], draws: usize, cfg: &McmcConfig) -> Result<GofReport> {
    if draws == 0 {
        return Err(Error::Invalid("gof needs at least one simulated draw".into()));
    }
    if data.has_missing() {
        return Err(Error::Invalid("gof compares completely observed networks".into()));
    }
    let observed = gof_summary(
        &data
            .networks()
            .iter()
            .map(|n| n.graph.clone())
            .collect::<Vec<_>>(),
    )?;

    let mut per_draw: Vec<GofSummary> = vec![GofSummary::default(); draws];
    for (k, net) in data.networks().iter().enumerate() {
        let eta = net.spec.eta(theta)?;
        let mut chain = Chain::new(
            &net.spec,
            &net.attrs,
            eta,
            net.graph.clone(),
            None,
            cfg.proposal,
            chain_rng(cfg.seed, k as u64),
        )?;
        let run_cfg = McmcConfig {
            draws,
            ..cfg.clone()
        };
        let mut r = 0usize;
        chain.sample(&run_cfg, |g, _| {
            per_draw[r].absorb(g);
            r += 1;
        });
    }

    let obs_rows = summary_to_rows(&observed);
    let sim_rows: Vec<Vec<(&'static str, Vec<f64>)>> = per_draw.iter().map(summary_to_rows).collect();

    let mut families = Vec::new();
    for (fi, (family, obs)) in obs_rows.into_iter().enumerate() {
        let mut width = obs.len();
        for d in &sim_rows {
            width = width.max(d[fi].1.len());
        }
        let pad = |v: &[f64]| {
            let mut out = v.to_vec();
            out.resize(width, 0.0);
            out
        };
        let observed = pad(&obs);
        let simulated: Vec<Vec<f64>> = sim_rows.iter().map(|d| pad(&d[fi].1)).collect();
        let mut lower = Vec::with_capacity(width);
        let mut median = Vec::with_capacity(width);
        let mut upper = Vec::with_capacity(width);
        let mut outside = Vec::with_capacity(width);
        for b in 0..width {
            let mut col: Vec<f64> = simulated.iter().map(|row| row[b]).collect();
            col.sort_by(f64::total_cmp);
            let lo = quantile_sorted(&col, 0.025);
            let med = quantile_sorted(&col, 0.5);
            let hi = quantile_sorted(&col, 0.975);
            outside.push(observed[b] < lo || observed[b] > hi);
            lower.push(lo);
            median.push(med);
            upper.push(hi);
        }
        let bins = match family {
            "degree" => (0..width).map(|k| k.to_string()).collect(),
            "esp" => (0..width).map(|m| m.to_string()).collect(),
            "geodesic" => {
                let mut v: Vec<String> = (1..width).map(|d| d.to_string()).collect();
                v.push("unreachable".into());
                v
            }
            _ => vec!["total".into()],
        };
        families.push(FamilyReport {
            family,
            bins,
            observed,
            simulated,
            lower,
            median,
            upper,
            outside,
        });
    }
    Ok(GofReport {
        families,
        draws,
        seed: cfg.seed,
    })
}

/// Long-run summary at one grid point of a degeneracy scan.
#[derive(Clone, Debug)]
pub struct ScanRow {
    pub theta: Vec<f64>,
    pub mean_density: f64,
    pub sd_density: f64,
    /// Monte Carlo standard error of the mean density (batch means over the
    /// two chains).
    pub mc_se_density: f64,
    /// Distance between the two largest modes of the per-draw density
    /// histogram; 0 when unimodal.
    pub bimodality_gap: f64,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub seed: u64,
    pub draws_per_chain: usize,
}

/// Simulates the model across a θ grid and summarizes the long-run density
/// at each point. Two chains per point — one from the empty and one from
/// the complete graph — so a mass split between near-empty and
/// near-complete regimes shows up as two histogram modes even when a single
/// chain would stick in one of them.
pub fn degeneracy_scan(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    grid: &[Vec<f64>],
    cfg: &McmcConfig,
) -> Result<ScanReport> {
    if grid.is_empty() {
        return Err(Error::Invalid("scan grid is empty".into()));
    }
    cfg.validate()?;
    let d = dyad_count(spec.n()) as f64;
    let mut rows = Vec::with_capacity(grid.len());
    for (gi, theta) in grid.iter().enumerate() {
        let eta = spec.eta(theta)?;
        let mut densities: Vec<Vec<f64>> = Vec::with_capacity(2);
        for (ci, init) in [Graph::empty(spec.n())?, Graph::complete(spec.n())?]
            .into_iter()
            .enumerate()
        {
            let mut chain = Chain::new(
                spec,
                attrs,
                eta.clone(),
                init,
                None,
                cfg.proposal,
                chain_rng(cfg.seed, (gi as u64) << 1 | ci as u64),
            )?;
            let mut ds = Vec::with_capacity(cfg.draws);
            chain.sample(cfg, |g, _| ds.push(g.edge_count() as f64 / d));
            densities.push(ds);
        }
        let pooled: Vec<f64> = densities.iter().flatten().copied().collect();
        let mean = util::mean(&pooled);
        let sd = util::sample_variance(&pooled).sqrt();
        let se = 0.5
            * (batch_means_se(&densities[0]).powi(2) + batch_means_se(&densities[1]).powi(2))
                .sqrt();
        rows.push(ScanRow {
            theta: theta.clone(),
            mean_density: mean,
            sd_density: sd,
            mc_se_density: se,
            bimodality_gap: bimodality_gap(&pooled),
        });
    }
    Ok(ScanReport {
        rows,
        seed: cfg.seed,
        draws_per_chain: cfg.draws,
    })
}

/// Distance between the two tallest local maxima of a width-0.02 density
/// histogram over [0, 1]; zero when only one mode exists.
fn bimodality_gap(densities: &[f64]) -> f64 {
    const BINS: usize = 50;
    let mut hist = [0usize; BINS];
    for &x in densities {
        let b = ((x * BINS as f64) as usize).min(BINS - 1);
        hist[b] += 1;
    }
    let mut peaks: Vec<(usize, usize)> = Vec::new(); // (count, bin)
    for b in 0..BINS {
        let left = if b == 0 { 0 } else { hist[b - 1] };
        let right = if b + 1 == BINS { 0 } else { hist[b + 1] };
        if hist[b] > 0 && hist[b] >= left && hist[b] >= right && (hist[b] > left || hist[b] > right)
        {
            peaks.push((hist[b], b));
        }
    }
    peaks.sort_unstable_by(|a, b| b.cmp(a));
    if peaks.len() < 2 {
        return 0.0;
    }
    let center = |bin: usize| (bin as f64 + 0.5) / BINS as f64;
    (center(peaks[0].1) - center(peaks[1].1)).abs()
}
