//! Likelihood-based estimation: maximum pseudo-likelihood (baseline and
//! initializer), Monte Carlo maximum likelihood, stochastic approximation,
//! pooled multi-network fitting, and standard errors.
//!
//! All estimators operate on a [`NetworkData`]: one or more independent
//! network observations, each with its own instantiated model sharing one
//! θ vector. Networks may carry an observation mask; the Monte Carlo
//! engine then maximizes the marginal (face-value) likelihood by pairing
//! conditional-simulation pools over completions with unconditional pools.
//!
//! Networks with identical model/attribute instantiations are i.i.d.
//! replicates, so they share one unconditional simulation pool per fitting
//! step: the pool estimates `log E_θ0 exp⟨Δη, s(Y)⟩`, which enters each
//! replicate's likelihood-ratio surrogate identically. Conditional pools
//! are always per network (masks differ).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exact::{self, DEFAULT_ENUM_CAP};
use crate::graph::{Graph, NodeAttributes};
use crate::missing::ObservationMask;
use crate::model::{ChangeScratch, MapEntry, ModelSpec};
use crate::sampler::{Chain, McmcConfig, chain_rng, conditional_state};
use crate::terms::TermKind;
use crate::util::{self, logistic};

/// One observed network with its instantiated model. `mask` is `None` for
/// a completely observed network; a full mask is equivalent.
#[derive(Clone, Debug)]
pub struct Network {
    pub spec: Arc<ModelSpec>,
    pub graph: Graph,
    pub attrs: Arc<NodeAttributes>,
    pub mask: Option<ObservationMask>,
}

impl Network {
    pub fn complete(spec: Arc<ModelSpec>, graph: Graph, attrs: Arc<NodeAttributes>) -> Self {
        Network {
            spec,
            graph,
            attrs,
            mask: None,
        }
    }

    fn missing_count(&self) -> usize {
        self.mask.as_ref().map_or(0, |m| m.unobserved_count())
    }
}

/// Independent network observations sharing one θ vector.
#[derive(Clone, Debug)]
pub struct NetworkData {
    networks: Vec<Network>,
    p: usize,
}

impl NetworkData {
    pub fn new(networks: Vec<Network>) -> Result<Self> {
        let first = networks
            .first()
            .ok_or_else(|| Error::Invalid("need at least one network".into()))?;
        let p = first.spec.p();
        for (k, net) in networks.iter().enumerate() {
            if net.spec.p() != p {
                return Err(Error::DimensionMismatch(format!(
                    "network {k} has p = {}, expected {p}",
                    net.spec.p()
                )));
            }
            if net.graph.n() != net.spec.n() {
                return Err(Error::DimensionMismatch(format!(
                    "network {k}: graph n = {}, model n = {}",
                    net.graph.n(),
                    net.spec.n()
                )));
            }
            if let Some(mask) = &net.mask {
                if mask.n() != net.graph.n() {
                    return Err(Error::DimensionMismatch(format!(
                        "network {k}: mask n = {} does not match graph",
                        mask.n()
                    )));
                }
            }
            net.spec.validate_inputs(&net.graph, &net.attrs)?;
        }
        Ok(NetworkData { networks, p })
    }

    /// Convenience constructor for replicate networks of one model.
    pub fn pooled(spec: Arc<ModelSpec>, attrs: Arc<NodeAttributes>, graphs: Vec<Graph>) -> Result<Self> {
        NetworkData::new(
            graphs
                .into_iter()
                .map(|g| Network::complete(spec.clone(), g, attrs.clone()))
                .collect(),
        )
    }

    pub fn networks(&self) -> &[Network] {
        &self.networks
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn has_missing(&self) -> bool {
        self.networks.iter().any(|n| n.missing_count() > 0)
    }

    fn theta_names(&self) -> Vec<String> {
        self.networks[0].spec.theta_names().to_vec()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Mple,
    Mcmle,
    StochasticApprox,
    Exact,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mple => "mple",
            Method::Mcmle => "mcmle",
            Method::StochasticApprox => "stochastic-approx",
            Method::Exact => "exact",
        }
    }
}

/// Per-outer-iteration trace kept for provenance.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    pub surrogate_gain: f64,
    pub score_norm: f64,
    pub min_ess: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub ess: f64,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
}

/// Estimate with uncertainty and full provenance of the run.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub method: Method,
    pub param_names: Vec<String>,
    pub diagnostics: Diagnostics,
    pub seed: u64,
    pub config: Option<McmcConfig>,
    pub notes: Vec<String>,
}

/// Optimizer settings for the Monte Carlo engines.
#[derive(Clone, Debug)]
pub struct OptSettings {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Reject any step whose importance-weight ESS drops below
    /// `ess_frac × draws`; re-simulate at the current iterate instead.
    pub ess_frac: f64,
    /// Relative surrogate-improvement threshold.
    pub tol: f64,
    /// Score condition: converged when every score coordinate is within
    /// `score_mult` Monte Carlo standard errors of zero.
    pub score_mult: f64,
    /// Parameter sup-norm past which nonexistence is diagnosed.
    pub divergence_cap: f64,
    /// Sup-norm cap on a single Newton step. The surrogate is trustworthy
    /// only near the simulation iterate, and near-boundary statistics
    /// (observed counts at the edge of their attainable range) produce
    /// huge ridge-regularized steps along directions the pool knows
    /// nothing about.
    pub trust: f64,
}

impl Default for OptSettings {
    fn default() -> Self {
        OptSettings {
            max_outer: 60,
            max_inner: 20,
            ess_frac: 0.1,
            tol: 1e-6,
            score_mult: 3.0,
            divergence_cap: 50.0,
            trust: 2.0,
        }
    }
}

/// Robbins-Monro gain schedule `a_t = a0 / (t + t0)` with per-phase halving
/// of `a0`; the final phase averages its iterates.
#[derive(Clone, Debug)]
pub struct GainSchedule {
    pub a0: f64,
    pub t0: f64,
    pub phases: usize,
    pub phase_len: usize,
}

impl Default for GainSchedule {
    fn default() -> Self {
        GainSchedule {
            a0: 1.0,
            t0: 10.0,
            phases: 4,
            phase_len: 600,
        }
    }
}

impl GainSchedule {
    fn validate(&self) -> Result<()> {
        if self.a0 <= 0.0 || self.t0 < 0.0 || self.phases == 0 || self.phase_len == 0 {
            return Err(Error::Invalid("gain schedule must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// grouping of identically specified networks

struct Group {
    spec: Arc<ModelSpec>,
    attrs: Arc<NodeAttributes>,
    /// Indices into `data.networks`.
    members: Vec<usize>,
    /// Σ s(y_k) over completely observed members.
    sum_obs: Vec<f64>,
    complete_count: usize,
}

fn group_networks(data: &NetworkData) -> Result<Vec<Group>> {
    let mut groups: Vec<Group> = Vec::new();
    for (k, net) in data.networks().iter().enumerate() {
        let found = groups.iter_mut().find(|g| {
            (Arc::ptr_eq(&g.spec, &net.spec) || *g.spec == *net.spec)
                && (Arc::ptr_eq(&g.attrs, &net.attrs) || *g.attrs == *net.attrs)
        });
        let group = match found {
            Some(g) => g,
            None => {
                groups.push(Group {
                    spec: net.spec.clone(),
                    attrs: net.attrs.clone(),
                    members: Vec::new(),
                    sum_obs: vec![0.0; net.spec.q()],
                    complete_count: 0,
                });
                groups.last_mut().unwrap()
            }
        };
        group.members.push(k);
        if net.missing_count() == 0 {
            let s = net.spec.stat_vector(&net.graph, &net.attrs)?;
            for (acc, v) in group.sum_obs.iter_mut().zip(&s) {
                *acc += v;
            }
            group.complete_count += 1;
        }
    }
    Ok(groups)
}

// ---------------------------------------------------------------------------
// simulation pools

struct StatPool {
    stats: Vec<f64>, // draws × q, row-major
    draws: usize,
    q: usize,
}

impl StatPool {
    fn row(&self, i: usize) -> &[f64] {
        &self.stats[i * self.q..(i + 1) * self.q]
    }

    /// Importance tilt by ⟨deta, s⟩: log-mean-exp, ESS, normalized weights.
    fn tilt(&self, deta: &[f64]) -> Tilt {
        let mut t = Vec::with_capacity(self.draws);
        let mut max = f64::NEG_INFINITY;
        for i in 0..self.draws {
            let v = util::dot(deta, self.row(i));
            max = max.max(v);
            t.push(v);
        }
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for v in t.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
            sum_sq += *v * *v;
        }
        let ess = sum * sum / sum_sq;
        let lme = max + (sum / self.draws as f64).ln();
        for v in t.iter_mut() {
            *v /= sum;
        }
        Tilt {
            lme,
            ess,
            weights: t,
        }
    }

    /// Weighted mean and covariance of `Jᵀ s` (p-dimensional).
    fn weighted_projection(&self, weights: &[f64], jac: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let p = jac.ncols();
        let mut mu: DVector<f64> = DVector::zeros(p);
        let mut m2: DMatrix<f64> = DMatrix::zeros(p, p);
        let mut v: DVector<f64> = DVector::zeros(p);
        for i in 0..self.draws {
            let w = weights[i];
            let s = self.row(i);
            for b in 0..p {
                let mut acc = 0.0;
                for a in 0..self.q {
                    acc += jac[(a, b)] * s[a];
                }
                v[b] = acc;
            }
            for b in 0..p {
                let wv = w * v[b];
                mu[b] += wv;
                for c in b..p {
                    m2[(b, c)] += wv * v[c];
                }
            }
        }
        let mut cov = DMatrix::zeros(p, p);
        for b in 0..p {
            for c in b..p {
                let x = m2[(b, c)] - mu[b] * mu[c];
                cov[(b, c)] = x;
                cov[(c, b)] = x;
            }
        }
        (mu, cov)
    }
}

struct Tilt {
    lme: f64,
    ess: f64,
    weights: Vec<f64>,
}

fn uniform_weights(draws: usize) -> Vec<f64> {
    vec![1.0 / draws as f64; draws]
}

/// Warm-start graphs carried across outer iterations.
struct SimState {
    group_graphs: Vec<Graph>,
    masked_graphs: Vec<Graph>, // indexed like `masked` list
}

struct MaskedNet {
    net_idx: usize,
    group_idx: usize,
    free: Vec<u32>,
    burnin: u64,
    interval: u64,
}

/// Everything the surrogate needs for one simulation round.
struct Pools {
    uncond: Vec<StatPool>,  // per group
    cond: Vec<StatPool>,    // per masked network
    eta_sim: Vec<f64>,      // η at the simulation iterate
}

#[allow(clippy::too_many_arguments)]
fn simulate_pools(
    data: &NetworkData,
    groups: &[Group],
    masked: &[MaskedNet],
    theta: &[f64],
    cfg: &McmcConfig,
    cond_draws: usize,
    state: &mut SimState,
    round: u64,
) -> Result<Pools> {
    let eta_sim = data.networks()[0].spec.eta(theta)?; // per-group η below
    let mut uncond = Vec::with_capacity(groups.len());
    for (gi, group) in groups.iter().enumerate() {
        let eta = group.spec.eta(theta)?;
        let q = group.spec.q();
        // restart at an observed member every round: a chain warm-started
        // from the previous iterate's draws can lag the moving η through a
        // bistable region and feed the optimizer systematically biased
        // pools; the observed graph is always in the mode the score cares
        // about. Groups without a complete member keep the warm state.
        let init = match group.members.iter().find(|&&k| data.networks()[k].missing_count() == 0)
        {
            Some(&k) => data.networks()[k].graph.clone(),
            None => state.group_graphs[gi].clone(),
        };
        let mut chain = Chain::new(
            &group.spec,
            &group.attrs,
            eta,
            init,
            None,
            cfg.proposal,
            chain_rng(cfg.seed, (round << 24) | gi as u64),
        )?;
        let mut stats = Vec::with_capacity(cfg.draws * q);
        chain.sample(cfg, |_, s| stats.extend_from_slice(s));
        state.group_graphs[gi] = chain.graph().clone();
        uncond.push(StatPool {
            stats,
            draws: cfg.draws,
            q,
        });
    }
    let mut cond = Vec::with_capacity(masked.len());
    for (mi, m) in masked.iter().enumerate() {
        let net = &data.networks()[m.net_idx];
        let eta = net.spec.eta(theta)?;
        let q = net.spec.q();
        let mut chain = Chain::new(
            &net.spec,
            &net.attrs,
            eta,
            state.masked_graphs[mi].clone(),
            Some(m.free.clone()),
            cfg.proposal,
            chain_rng(cfg.seed, (round << 24) | (1 << 23) | mi as u64),
        )?;
        let sub_cfg = McmcConfig {
            burnin: m.burnin,
            interval: m.interval,
            draws: cond_draws,
            proposal: cfg.proposal,
            seed: cfg.seed,
        };
        let mut stats = Vec::with_capacity(cond_draws * q);
        chain.sample(&sub_cfg, |_, s| stats.extend_from_slice(s));
        state.masked_graphs[mi] = chain.graph().clone();
        cond.push(StatPool {
            stats,
            draws: cond_draws,
            q,
        });
    }
    Ok(Pools {
        uncond,
        cond,
        eta_sim,
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo maximum likelihood (complete and incomplete data)

/// Complete-data Monte Carlo maximum likelihood: maximizes the
/// importance-sampled log-likelihood-ratio surrogate, re-simulating at each
/// accepted iterate. `theta0` defaults to the maximum pseudo-likelihood
/// estimate (zeros on separation).
pub fn mcmle(
    data: &NetworkData,
    theta0: Option<&[f64]>,
    cfg: &McmcConfig,
    opt: &OptSettings,
) -> Result<FitResult> {
    if data.has_missing() {
        return Err(Error::Invalid(
            "data carries observation masks; use the incomplete-data fit".into(),
        ));
    }
    fit_surrogate(data, theta0, cfg, opt)
}

/// Shared Monte Carlo engine behind [`mcmle`] and the incomplete-data fit.
pub(crate) fn fit_surrogate(
    data: &NetworkData,
    theta0: Option<&[f64]>,
    cfg: &McmcConfig,
    opt: &OptSettings,
) -> Result<FitResult> {
    cfg.validate()?;
    let p = data.p();
    if p == 0 {
        return Err(Error::NonIdentifiable("model has no free parameters".into()));
    }
    let mut notes = Vec::new();
    let mut theta = initial_theta(data, theta0, &mut notes)?;
    for w in data.networks()[0].spec.validate_theta(&theta)? {
        log::warn!("initial theta: {w}");
        notes.push(format!("initial theta: {w}"));
    }

    let groups = group_networks(data)?;
    let mut masked = Vec::new();
    let mut masked_graphs = Vec::new();
    for (gi, group) in groups.iter().enumerate() {
        for &k in &group.members {
            let net = &data.networks()[k];
            if net.missing_count() == 0 {
                continue;
            }
            let mask = net.mask.as_ref().unwrap();
            if mask.observed_count() == 0 {
                notes.push(format!(
                    "network {k} has no observed dyads and was dropped from the fit"
                ));
                continue;
            }
            let (init, free) = conditional_state(&net.graph, mask);
            masked.push(MaskedNet {
                net_idx: k,
                group_idx: gi,
                free: free.clone(),
                burnin: 10 * free.len() as u64,
                interval: free.len().max(1) as u64,
            });
            masked_graphs.push(init);
        }
    }
    if data.has_missing() {
        notes.push("incomplete data: marginal likelihood via conditional simulation".into());
    }
    let cond_draws = (cfg.draws / 8).max(100);

    let mut state = SimState {
        group_graphs: groups
            .iter()
            .map(|g| {
                // warm start at an observed member when one is complete
                let k = g.members[0];
                let net = &data.networks()[k];
                if net.missing_count() == 0 {
                    net.graph.clone()
                } else {
                    conditional_state(&net.graph, net.mask.as_ref().unwrap()).0
                }
            })
            .collect(),
        masked_graphs,
    };

    let mut diagnostics = Diagnostics::default();
    let mut prev_gain = f64::INFINITY;
    let mut last_ess = cfg.draws as f64;
    let mut stuck_rounds = 0usize;
    let mut rescues = 0usize;
    let mut converged = false;
    let mut final_score_norm = f64::NAN;

    for outer in 1..=opt.max_outer {
        let pools = simulate_pools(data, &groups, &masked, &theta, cfg, cond_draws, &mut state, outer as u64)?;
        let jac = data.networks()[0].spec.eta_jacobian(&theta)?;

        // a pool whose draws never move is a chain frozen at an extreme
        // iterate: its mean equals the start state and the score is a
        // mirage. Halve θ and resimulate instead of trusting it.
        let frozen = pools.uncond.iter().any(pool_is_frozen);
        if frozen {
            rescues += 1;
            if rescues > 6 {
                return Err(Error::EssDegenerate(
                    "simulation repeatedly collapses to a single state".into(),
                ));
            }
            notes.push(format!(
                "round {outer}: simulation frozen at a degenerate iterate; halving theta"
            ));
            theta.iter_mut().for_each(|t| *t *= 0.5);
            prev_gain = f64::INFINITY;
            continue;
        }

        // score and its Monte Carlo standard error at Δη = 0
        let (score, score_se, score_scale) = score_at_sim(&pools, &groups, &masked, &jac);
        let score_norm = score.amax();
        final_score_norm = score_norm;
        let score_ok = (0..p).all(|b| {
            score[b].abs() <= opt.score_mult * score_se[b] + 1e-6 * (1.0 + score_scale[b])
        });
        diagnostics.history.push(IterationRecord {
            iteration: outer,
            surrogate_gain: if prev_gain.is_finite() { prev_gain } else { f64::NAN },
            score_norm,
            min_ess: last_ess,
        });
        diagnostics.iterations = outer;
        if score_ok && prev_gain < opt.tol {
            converged = true;
            break;
        }

        // inner Newton steps on the surrogate within this pool
        let outcome = inner_newton(&pools, &groups, &masked, data, &theta, opt)?;
        if util::sup_norm(&outcome.theta) > opt.divergence_cap {
            return Err(Error::MleNonexistent(format!(
                "parameter diverged past {}; observed statistics may lie on the convex hull boundary",
                opt.divergence_cap
            )));
        }
        // a round that cannot move because every improving step kills the
        // importance weights is degenerate; a round already at its in-pool
        // maximum just waits for a fresh pool
        if !outcome.moved && outcome.ess_blocked {
            stuck_rounds += 1;
            if !score_ok && stuck_rounds >= 3 {
                return Err(Error::EssDegenerate(
                    "importance weights collapse before the score condition holds".into(),
                ));
            }
        } else {
            stuck_rounds = 0;
        }
        theta = outcome.theta;
        prev_gain = outcome.last_gain;
        last_ess = outcome.ess;
    }

    diagnostics.converged = converged;
    diagnostics.final_grad_norm = final_score_norm;
    diagnostics.ess = last_ess;
    if !converged {
        notes.push(format!(
            "no convergence within {} outer iterations (score sup-norm {:.3e})",
            opt.max_outer, final_score_norm
        ));
    }

    let (std_errors, covariance) = standard_errors_impl(data, &theta, cfg)?;
    let names = data.theta_names();
    for (b, se) in std_errors.iter().enumerate() {
        if *se > 50.0 {
            notes.push(format!(
                "parameter {} is effectively unidentified near the estimate (its statistics sit \
                 at or near the boundary of their attainable range)",
                names[b]
            ));
        }
    }
    Ok(FitResult {
        theta_hat: theta,
        std_errors,
        covariance,
        method: Method::Mcmle,
        param_names: names,
        diagnostics,
        seed: cfg.seed,
        config: Some(cfg.clone()),
        notes,
    })
}

fn initial_theta(
    data: &NetworkData,
    theta0: Option<&[f64]>,
    notes: &mut Vec<String>,
) -> Result<Vec<f64>> {
    match theta0 {
        Some(t) => {
            if t.len() != data.p() {
                return Err(Error::DimensionMismatch(format!(
                    "theta0 has length {}, model has p = {}",
                    t.len(),
                    data.p()
                )));
            }
            Ok(t.to_vec())
        }
        None => {
            let mut start = match mple(data) {
                Ok(fit) => fit.theta_hat,
                Err(first) => {
                    notes.push(format!(
                        "pseudo-likelihood initializer failed ({first}); starting at zero with a density-matched edge coefficient"
                    ));
                    density_matched_start(data)
                }
            };
            // an extreme pseudo-likelihood start freezes the first pools;
            // pull it into a box the sampler can actually move in
            let norm = util::sup_norm(&start);
            if norm > 8.0 {
                let scale = 8.0 / norm;
                start.iter_mut().for_each(|t| *t *= scale);
                notes.push(format!(
                    "initializer scaled into the sup-norm-8 box (was {norm:.1})"
                ));
            }
            Ok(start)
        }
    }
}

/// Zero vector with the plain edge coefficient (when the model has one) set
/// to the log-odds of the pooled observed density, so the first simulation
/// round explores the right sparsity regime. Offset coordinates already
/// carry their fixed contribution at zero.
fn density_matched_start(data: &NetworkData) -> Vec<f64> {
    let mut start = vec![0.0; data.p()];
    let spec = &data.networks()[0].spec;
    let mut edges_theta = None;
    let mut coord = 0usize;
    for entry in spec.map() {
        if let MapEntry::Linear { theta } = entry {
            if matches!(spec.terms()[coord], TermKind::Edges) {
                edges_theta = Some(*theta);
            }
        }
        coord += match entry {
            MapEntry::Gwesp { m_count, .. } => *m_count,
            _ => 1,
        };
    }
    if let Some(idx) = edges_theta {
        let mut edges = 0.0;
        let mut dyads = 0.0;
        let mut offset_per_dyad = 0.0;
        for net in data.networks() {
            match &net.mask {
                None => {
                    edges += net.graph.edge_count() as f64;
                    dyads += net.graph.dyad_count() as f64;
                }
                Some(mask) => {
                    for d in mask.observed_dyads() {
                        edges += net.graph.has_edge(d) as u8 as f64;
                        dyads += 1.0;
                    }
                }
            }
        }
        // account for a constant sparse offset so the start matches the
        // observed density including the reference measure
        for t in spec.terms() {
            if let TermKind::Offset(table) = t {
                offset_per_dyad += table.get(0);
            }
        }
        let density = ((edges + 0.5) / (dyads + 1.0)).clamp(1e-6, 1.0 - 1e-6);
        start[idx] = ((density / (1.0 - density)).ln() - offset_per_dyad).clamp(-8.0, 8.0);
    }
    start
}

/// Score `Jᵀ(data side − model side)`, its per-coordinate Monte Carlo SEs,
/// and the magnitude scale of the two sides, evaluated with uniform
/// weights (Δη = 0) on freshly simulated pools. The scale feeds an absolute
/// floor in the convergence test: along a flat (non-identified) direction
/// both the score and its SE vanish together, and a pure ratio test would
/// never pass.
fn score_at_sim(
    pools: &Pools,
    groups: &[Group],
    masked: &[MaskedNet],
    jac: &DMatrix<f64>,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let p = jac.ncols();
    let mut score = DVector::zeros(p);
    let mut var = DVector::zeros(p);
    let mut scale = DVector::zeros(p);
    for (gi, group) in groups.iter().enumerate() {
        let pool = &pools.uncond[gi];
        let w = uniform_weights(pool.draws);
        let (mu, cov) = pool.weighted_projection(&w, jac);
        let total = group.members.len() as f64;
        // data side: complete members' observed statistics
        let mut obs = DVector::zeros(p);
        for b in 0..p {
            let mut acc = 0.0;
            for a in 0..pool.q {
                acc += jac[(a, b)] * group.sum_obs[a];
            }
            obs[b] = acc;
        }
        for b in 0..p {
            score[b] += obs[b] - total * mu[b];
            scale[b] += obs[b].abs() + total * mu[b].abs();
            var[b] += total * total * cov[(b, b)] / pool.draws as f64;
        }
    }
    for (mi, _m) in masked.iter().enumerate() {
        let pool = &pools.cond[mi];
        let w = uniform_weights(pool.draws);
        let (mu, cov) = pool.weighted_projection(&w, jac);
        for b in 0..p {
            score[b] += mu[b];
            scale[b] += mu[b].abs();
            var[b] += cov[(b, b)] / pool.draws as f64;
        }
    }
    let se = var.map(|v: f64| v.max(1e-300).sqrt());
    (score, se, scale)
}

/// Outcome of one inner optimization round over a fixed simulation pool.
struct InnerOutcome {
    theta: Vec<f64>,
    /// Relative improvement of the final accepted step (zero when the
    /// surrogate was already maximized in this pool).
    last_gain: f64,
    /// Minimum pool ESS at the final position.
    ess: f64,
    moved: bool,
    /// An improving step existed but was rejected by the ESS guard.
    ess_blocked: bool,
}

/// Newton steps on the importance-sampled surrogate within one pool round.
fn inner_newton(
    pools: &Pools,
    groups: &[Group],
    masked: &[MaskedNet],
    data: &NetworkData,
    theta: &[f64],
    opt: &OptSettings,
) -> Result<InnerOutcome> {
    let spec0 = &data.networks()[0].spec;
    let p = data.p();

    let objective = |th: &[f64]| -> Result<(f64, f64)> {
        // (surrogate value, min ESS over pools)
        let mut obj = 0.0;
        let mut min_ess = f64::INFINITY;
        for (gi, group) in groups.iter().enumerate() {
            let deta = delta_eta(&group.spec, th, &pools.eta_sim)?;
            let tilt = pools.uncond[gi].tilt(&deta);
            obj -= group.members.len() as f64 * tilt.lme;
            obj += util::dot(&deta, &group.sum_obs);
            min_ess = min_ess.min(tilt.ess / pools.uncond[gi].draws as f64);
        }
        for (mi, m) in masked.iter().enumerate() {
            let group = &groups[m.group_idx];
            let deta = delta_eta(&group.spec, th, &pools.eta_sim)?;
            let tilt = pools.cond[mi].tilt(&deta);
            obj += tilt.lme;
            min_ess = min_ess.min(tilt.ess / pools.cond[mi].draws as f64);
        }
        Ok((obj, min_ess))
    };

    let mut current = theta.to_vec();
    let (mut obj, _) = objective(&current)?;
    let mut moved = false;
    let mut ess_blocked = false;
    let mut final_ess_frac = 1.0;
    let mut last_gain = 0.0;

    for _ in 0..opt.max_inner {
        let jac = spec0.eta_jacobian(&current)?;
        let mut grad = DVector::zeros(p);
        let mut metric = DMatrix::zeros(p, p);
        for (gi, group) in groups.iter().enumerate() {
            let deta = delta_eta(&group.spec, &current, &pools.eta_sim)?;
            let tilt = pools.uncond[gi].tilt(&deta);
            let (mu, cov) = pools.uncond[gi].weighted_projection(&tilt.weights, &jac);
            let total = group.members.len() as f64;
            for b in 0..p {
                let mut acc = 0.0;
                for a in 0..group.spec.q() {
                    acc += jac[(a, b)] * group.sum_obs[a];
                }
                grad[b] += acc;
            }
            grad -= mu.scale(total);
            metric += cov.scale(total);
        }
        for (mi, m) in masked.iter().enumerate() {
            let group = &groups[m.group_idx];
            let deta = delta_eta(&group.spec, &current, &pools.eta_sim)?;
            let tilt = pools.cond[mi].tilt(&deta);
            let (mu, _) = pools.cond[mi].weighted_projection(&tilt.weights, &jac);
            grad += mu;
        }
        let mut step = match util::solve_truncated(&metric, &grad) {
            Some(s) => s,
            None => break,
        };
        let step_norm = step.amax();
        if step_norm > opt.trust {
            step.scale_mut(opt.trust / step_norm);
        }

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<f64> = current
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + lambda * s)
                .collect();
            if let Ok((cand_obj, ess_frac)) = objective(&cand) {
                if cand_obj > obj {
                    if ess_frac >= opt.ess_frac {
                        last_gain = (cand_obj - obj) / (1.0 + cand_obj.abs());
                        current = cand;
                        obj = cand_obj;
                        moved = true;
                        accepted = true;
                        final_ess_frac = ess_frac;
                        break;
                    }
                    // an improving move exists but the pool cannot weight it
                    ess_blocked = true;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // surrogate maximized within this pool (or blocked by the ESS
            // guard); either way the pool has nothing more to say
            if moved {
                last_gain = 0.0;
            }
            break;
        }
        if last_gain < opt.tol {
            break;
        }
    }
    let min_draws = pool_min_draws(pools);
    Ok(InnerOutcome {
        theta: current,
        last_gain,
        ess: final_ess_frac * min_draws,
        moved,
        ess_blocked,
    })
}

/// True when every draw in the pool equals the first one (chain never
/// accepted a move).
fn pool_is_frozen(pool: &StatPool) -> bool {
    if pool.draws < 2 {
        return false;
    }
    let first = pool.row(0);
    (1..pool.draws).all(|i| pool.row(i) == first)
}

fn pool_min_draws(pools: &Pools) -> f64 {
    let mut m = usize::MAX;
    for p in &pools.uncond {
        m = m.min(p.draws);
    }
    for p in &pools.cond {
        m = m.min(p.draws);
    }
    m as f64
}

fn delta_eta(spec: &ModelSpec, theta: &[f64], eta_sim: &[f64]) -> Result<Vec<f64>> {
    let eta = spec.eta(theta)?;
    Ok(eta.iter().zip(eta_sim).map(|(a, b)| a - b).collect())
}

// ---------------------------------------------------------------------------
// maximum pseudo-likelihood

/// Maximum pseudo-likelihood: Newton on the product of per-dyad conditional
/// probabilities with log-odds `⟨η(θ), Δ_d⟩`. Fast, and exact for
/// dyad-independent models, but not likelihood-based — results carry that
/// caveat. With masks, only observed dyads enter (the rest of the graph is
/// zero-filled), which is what makes it a usable incomplete-data
/// initializer.
pub fn mple(data: &NetworkData) -> Result<FitResult> {
    let p = data.p();
    if p == 0 {
        return Err(Error::NonIdentifiable("model has no free parameters".into()));
    }

    // cache sparse change vectors and responses per observed dyad
    struct DyadRow {
        pairs: Vec<(u32, f64)>,
        y: bool,
    }
    let mut rows: Vec<(usize, Vec<DyadRow>)> = Vec::new(); // (network idx, rows)
    let mut scratch = ChangeScratch::new();
    let mut total_dyads = 0usize;
    for (k, net) in data.networks().iter().enumerate() {
        let graph = match &net.mask {
            Some(mask) => conditional_state(&net.graph, mask).0,
            None => net.graph.clone(),
        };
        let mut net_rows = Vec::new();
        for d in crate::graph::all_dyads(net.graph.n()) {
            if let Some(mask) = &net.mask {
                if !mask.is_observed(d) {
                    continue;
                }
            }
            net.spec.change_sparse(&graph, &net.attrs, d, &mut scratch);
            net_rows.push(DyadRow {
                pairs: scratch.pairs.clone(),
                y: graph.has_edge(d),
            });
            total_dyads += 1;
        }
        rows.push((k, net_rows));
    }
    if total_dyads == 0 {
        return Err(Error::Invalid("no observed dyads".into()));
    }

    let mut theta = vec![0.0; p];
    let pseudo_loglik = |eta: &[f64], rows: &[(usize, Vec<DyadRow>)]| -> f64 {
        let mut ll = 0.0;
        for (_, net_rows) in rows {
            for r in net_rows {
                let lam: f64 = r.pairs.iter().map(|&(c, v)| eta[c as usize] * v).sum();
                ll += if r.y { lam } else { 0.0 } - softplus(lam);
            }
        }
        ll
    };

    let spec0 = &data.networks()[0].spec;
    let mut eta = spec0.eta(&theta)?;
    let mut ll = pseudo_loglik(&eta, &rows);
    let mut iterations = 0;
    let mut grad_norm = f64::NAN;
    let mut info = DMatrix::zeros(p, p);
    for iter in 1..=100 {
        iterations = iter;
        let jac = spec0.eta_jacobian(&theta)?;
        let mut grad = DVector::zeros(p);
        info.fill(0.0);
        let mut v = DVector::zeros(p);
        for (k, net_rows) in &rows {
            let net_jac = if Arc::ptr_eq(&data.networks()[*k].spec, spec0) {
                None
            } else {
                Some(data.networks()[*k].spec.eta_jacobian(&theta)?)
            };
            let jac_k = net_jac.as_ref().unwrap_or(&jac);
            let eta_k = data.networks()[*k].spec.eta(&theta)?;
            for r in net_rows {
                let lam: f64 = r.pairs.iter().map(|&(c, x)| eta_k[c as usize] * x).sum();
                let pi = logistic(lam);
                v.fill(0.0);
                for &(c, x) in &r.pairs {
                    for b in 0..p {
                        v[b] += jac_k[(c as usize, b)] * x;
                    }
                }
                let resid = (r.y as i64 as f64) - pi;
                let wt = pi * (1.0 - pi);
                for b in 0..p {
                    grad[b] += resid * v[b];
                    for c in b..p {
                        info[(b, c)] += wt * v[b] * v[c];
                    }
                }
            }
        }
        for b in 0..p {
            for c in 0..b {
                info[(b, c)] = info[(c, b)];
            }
        }
        grad_norm = grad.amax();
        let step = util::solve_spd(&info, &grad).ok_or_else(|| {
            Error::NonIdentifiable("singular pseudo-likelihood information".into())
        })?;
        // on separation the gradient vanishes while the step stays large
        if grad_norm < 1e-9 && step.amax() < 1e-4 {
            break;
        }
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + lambda * s)
                .collect();
            if let Ok(cand_eta) = spec0.eta(&cand) {
                let cand_ll = pseudo_loglik(&cand_eta, &rows);
                if cand_ll > ll {
                    theta = cand;
                    eta = cand_eta;
                    ll = cand_ll;
                    moved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !moved {
            if grad_norm < 1e-5 && step.amax() >= 1e-4 {
                return Err(Error::Separation(
                    "pseudo-likelihood plateaus along an unbounded direction (separation)".into(),
                ));
            }
            break;
        }
        if util::sup_norm(&theta) > 50.0 {
            return Err(Error::Separation(
                "pseudo-likelihood estimate diverged past 50 (complete or quasi-complete separation)"
                    .into(),
            ));
        }
    }
    let _ = eta;

    let covariance = util::invert_spd(&info)
        .ok_or_else(|| Error::NonIdentifiable("singular pseudo-likelihood information".into()))?;
    let std_errors = (0..p).map(|i| covariance[(i, i)].max(0.0).sqrt()).collect();
    Ok(FitResult {
        theta_hat: theta,
        std_errors,
        covariance,
        method: Method::Mple,
        param_names: data.theta_names(),
        diagnostics: Diagnostics {
            iterations,
            final_grad_norm: grad_norm,
            ess: f64::NAN,
            converged: grad_norm < 1e-6,
            history: Vec::new(),
        },
        seed: 0,
        config: None,
        notes: vec![
            "maximum pseudo-likelihood: not likelihood-based; curvature-based errors are not sampling errors"
                .into(),
        ],
    })
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

// ---------------------------------------------------------------------------
// stochastic approximation

/// Robbins-Monro stochastic approximation
/// `θ ← θ + a_t · D⁻¹ · J(θ)ᵀ (s(y) − s(Y_t))` with `Y_t` drawn by a short
/// chain advance at the current θ. The scaling matrix `D` is the Fisher
/// information estimated by a pilot simulation at `theta0`; the final phase
/// averages its iterates.
pub fn stochastic_approximation(
    data: &NetworkData,
    theta0: Option<&[f64]>,
    cfg: &McmcConfig,
    gains: &GainSchedule,
) -> Result<FitResult> {
    cfg.validate()?;
    gains.validate()?;
    if data.has_missing() {
        return Err(Error::Invalid(
            "stochastic approximation requires completely observed networks".into(),
        ));
    }
    let p = data.p();
    if p == 0 {
        return Err(Error::NonIdentifiable("model has no free parameters".into()));
    }
    let mut notes = Vec::new();
    let mut theta = initial_theta(data, theta0, &mut notes)?;
    let groups = group_networks(data)?;

    // pilot pools at theta0 give the fixed scaling matrix
    let mut state = SimState {
        group_graphs: groups
            .iter()
            .map(|g| data.networks()[g.members[0]].graph.clone())
            .collect(),
        masked_graphs: Vec::new(),
    };
    let pools = simulate_pools(data, &groups, &[], &theta, cfg, 0, &mut state, 0)?;
    let jac0 = data.networks()[0].spec.eta_jacobian(&theta)?;
    let mut scaling = DMatrix::zeros(p, p);
    for (gi, group) in groups.iter().enumerate() {
        let w = uniform_weights(pools.uncond[gi].draws);
        let (_, cov) = pools.uncond[gi].weighted_projection(&w, &jac0);
        scaling += cov.scale(group.members.len() as f64);
    }
    let scaling = match util::invert_spd(&scaling) {
        Some(inv) => inv,
        None => DMatrix::identity(p, p),
    };

    // one persistent chain per network
    let mut chains = Vec::new();
    for (k, net) in data.networks().iter().enumerate() {
        let eta = net.spec.eta(&theta)?;
        chains.push(Chain::new(
            &net.spec,
            &net.attrs,
            eta,
            net.graph.clone(),
            None,
            cfg.proposal,
            chain_rng(cfg.seed, 0x5A00_0000 | k as u64),
        )?);
        chains.last_mut().unwrap().run(cfg.burnin);
    }
    let sum_obs: Vec<Vec<f64>> = data
        .networks()
        .iter()
        .map(|net| net.spec.stat_vector(&net.graph, &net.attrs).unwrap())
        .collect();

    let mut avg = vec![0.0; p];
    let mut avg_count = 0usize;
    let mut total_iters = 0usize;
    for phase in 0..gains.phases {
        let a0 = gains.a0 / (1 << phase) as f64;
        for t in 1..=gains.phase_len {
            total_iters += 1;
            let a_t = a0 / (t as f64 + gains.t0);
            let jac = data.networks()[0].spec.eta_jacobian(&theta)?;
            let mut resid = DVector::zeros(p);
            for (k, chain) in chains.iter_mut().enumerate() {
                let eta = data.networks()[k].spec.eta(&theta)?;
                chain.set_eta(eta);
                chain.run(cfg.interval);
                let s = chain.stats();
                for b in 0..p {
                    let mut acc = 0.0;
                    for a in 0..s.len() {
                        acc += jac[(a, b)] * (sum_obs[k][a] - s[a]);
                    }
                    resid[b] += acc;
                }
            }
            let step = &scaling * resid;
            for b in 0..p {
                theta[b] += a_t * step[b];
            }
            if util::sup_norm(&theta) > 50.0 {
                return Err(Error::Diverged(format!(
                    "stochastic approximation left the parameter box at iteration {total_iters}"
                )));
            }
            if phase + 1 == gains.phases {
                for b in 0..p {
                    avg[b] += theta[b];
                }
                avg_count += 1;
            }
        }
    }
    let theta_hat: Vec<f64> = avg.iter().map(|v| v / avg_count as f64).collect();

    // convergence diagnostic: fresh simulation at the final estimate
    let pools = simulate_pools(data, &groups, &[], &theta_hat, cfg, 0, &mut state, 1)?;
    let jac = data.networks()[0].spec.eta_jacobian(&theta_hat)?;
    let (score, score_se, _) = score_at_sim(&pools, &groups, &[], &jac);
    let converged = score
        .iter()
        .zip(score_se.iter())
        .all(|(s, se)| s.abs() <= 3.0 * se);

    let (std_errors, covariance) = standard_errors_impl(data, &theta_hat, cfg)?;
    Ok(FitResult {
        theta_hat,
        std_errors,
        covariance,
        method: Method::StochasticApprox,
        param_names: data.theta_names(),
        diagnostics: Diagnostics {
            iterations: total_iters,
            final_grad_norm: score.amax(),
            ess: cfg.draws as f64,
            converged,
            history: Vec::new(),
        },
        seed: cfg.seed,
        config: Some(cfg.clone()),
        notes,
    })
}

// ---------------------------------------------------------------------------
// exact pooled fit (complete or incomplete data)

/// Exact pooled maximum likelihood by Fisher scoring on the enumerated
/// log-likelihood; with masks, on the enumerated marginal likelihood.
/// Every network must be within the enumeration cap (and ≤ 20 unobserved
/// dyads when masked).
pub fn exact_fit(data: &NetworkData) -> Result<FitResult> {
    exact_fit_from(data, None)
}

pub fn exact_fit_from(data: &NetworkData, theta0: Option<&[f64]>) -> Result<FitResult> {
    let p = data.p();
    if p == 0 {
        return Err(Error::NonIdentifiable("model has no free parameters".into()));
    }
    for net in data.networks() {
        if net.spec.n() > DEFAULT_ENUM_CAP {
            return Err(Error::CapExceeded {
                n: net.spec.n(),
                cap: DEFAULT_ENUM_CAP,
            });
        }
        if net.missing_count() > 20 {
            return Err(Error::TooManyMissing(net.missing_count()));
        }
    }
    let groups = group_networks(data)?;
    let spec0 = &data.networks()[0].spec;

    let objective = |theta: &[f64]| -> Result<f64> {
        let mut obj = 0.0;
        for group in &groups {
            let psi = exact::log_normalizer(&group.spec, &group.attrs, theta)?;
            let eta = group.spec.eta(theta)?;
            for &k in &group.members {
                let net = &data.networks()[k];
                match &net.mask {
                    None => {
                        let s = net.spec.stat_vector(&net.graph, &net.attrs)?;
                        obj += util::dot(&eta, &s) - psi;
                    }
                    Some(mask) => {
                        let (lse, _) =
                            exact::conditional_moments(&net.spec, &net.attrs, &eta, &net.graph, mask)?;
                        obj += lse - psi;
                    }
                }
            }
        }
        Ok(obj)
    };

    let mut theta = match theta0 {
        Some(t) => {
            if t.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "theta0 has length {}, model has p = {p}",
                    t.len()
                )));
            }
            t.to_vec()
        }
        None => vec![0.0; p],
    };
    let mut obj = objective(&theta)?;
    let mut iterations = 0;
    let mut grad_norm = f64::NAN;
    let mut observed_info = DMatrix::zeros(p, p);
    for iter in 1..=200 {
        iterations = iter;
        let jac = spec0.eta_jacobian(&theta)?;
        let mut grad = DVector::zeros(p);
        let mut info_complete = DMatrix::zeros(p, p);
        let mut info_missing = DMatrix::zeros(p, p);
        for group in &groups {
            let mom = exact::exact_moments(&group.spec, &group.attrs, &theta)?;
            let eta = group.spec.eta(&theta)?;
            let q = group.spec.q();
            let jc = jac.transpose() * &mom.covariance * &jac;
            for &k in &group.members {
                let net = &data.networks()[k];
                info_complete += &jc;
                let data_side: Vec<f64> = match &net.mask {
                    None => net.spec.stat_vector(&net.graph, &net.attrs)?,
                    Some(mask) => {
                        let (_, cm) =
                            exact::conditional_moments(&net.spec, &net.attrs, &eta, &net.graph, mask)?;
                        info_missing += jac.transpose() * &cm.covariance * &jac;
                        cm.mean
                    }
                };
                for b in 0..p {
                    let mut acc = 0.0;
                    for a in 0..q {
                        acc += jac[(a, b)] * (data_side[a] - mom.mean[a]);
                    }
                    grad[b] += acc;
                }
            }
        }
        grad_norm = grad.amax();
        observed_info = &info_complete - &info_missing;
        // observed information when it is positive definite, complete-data
        // information otherwise
        let step = util::solve_spd(&observed_info, &grad)
            .or_else(|| util::solve_spd(&info_complete, &grad))
            .ok_or_else(|| Error::NonIdentifiable("singular information in exact fit".into()))?;
        if grad_norm < 1e-8 && step.amax() < 1e-4 {
            break;
        }
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + lambda * s)
                .collect();
            if let Ok(cand_obj) = objective(&cand) {
                if cand_obj > obj {
                    theta = cand;
                    obj = cand_obj;
                    moved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !moved {
            if grad_norm < 1e-5 && step.amax() >= 1e-4 {
                return Err(Error::MleNonexistent(
                    "log-likelihood plateaus along an unbounded direction; observed statistics on the boundary of their convex hull"
                        .into(),
                ));
            }
            break;
        }
        if util::sup_norm(&theta) > 50.0 {
            return Err(Error::MleNonexistent(
                "parameter diverged past 50; observed statistic on the boundary of its convex hull"
                    .into(),
            ));
        }
    }
    if grad_norm >= 1e-6 {
        return Err(Error::MleNonexistent(format!(
            "exact fit stalled at gradient sup-norm {grad_norm:.3e}"
        )));
    }

    let covariance = util::invert_spd(&observed_info)
        .ok_or_else(|| Error::NonIdentifiable("singular information at the estimate".into()))?;
    let std_errors = (0..p).map(|i| covariance[(i, i)].max(0.0).sqrt()).collect();
    Ok(FitResult {
        theta_hat: theta,
        std_errors,
        covariance,
        method: Method::Exact,
        param_names: data.theta_names(),
        diagnostics: Diagnostics {
            iterations,
            final_grad_norm: grad_norm,
            ess: f64::NAN,
            converged: true,
            history: Vec::new(),
        },
        seed: 0,
        config: None,
        notes: if data.has_missing() {
            vec!["incomplete data: exact marginal likelihood".into()]
        } else {
            Vec::new()
        },
    })
}

// ---------------------------------------------------------------------------
// standard errors

/// Standard errors from the inverse estimated curved Fisher information
/// `I(θ) = Σ_k J(θ)ᵀ Cov_k[s] J(θ)`, with exact moments for networks within
/// the enumeration cap and simulation otherwise. Masked networks subtract
/// their conditional (missing-information) part, giving observed-data
/// information.
pub fn standard_errors(
    data: &NetworkData,
    theta: &[f64],
    cfg: &McmcConfig,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    standard_errors_impl(data, theta, cfg)
}

fn standard_errors_impl(
    data: &NetworkData,
    theta: &[f64],
    cfg: &McmcConfig,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let p = data.p();
    let groups = group_networks(data)?;
    let spec0 = &data.networks()[0].spec;
    let jac = spec0.eta_jacobian(theta)?;
    let mut info = DMatrix::zeros(p, p);

    for (gi, group) in groups.iter().enumerate() {
        let complete_cov_p: DMatrix<f64> = if group.spec.n() <= DEFAULT_ENUM_CAP {
            let mom = exact::exact_moments(&group.spec, &group.attrs, theta)?;
            jac.transpose() * &mom.covariance * &jac
        } else {
            let eta = group.spec.eta(theta)?;
            let mut chain = Chain::new(
                &group.spec,
                &group.attrs,
                eta,
                Graph::empty(group.spec.n())?,
                None,
                cfg.proposal,
                chain_rng(cfg.seed, 0x5E00_0000 | gi as u64),
            )?;
            let q = group.spec.q();
            let mut stats = Vec::with_capacity(cfg.draws * q);
            chain.sample(cfg, |_, s| stats.extend_from_slice(s));
            let pool = StatPool {
                stats,
                draws: cfg.draws,
                q,
            };
            let w = uniform_weights(pool.draws);
            pool.weighted_projection(&w, &jac).1
        };
        info += complete_cov_p.scale(group.members.len() as f64);

        for &k in &group.members {
            let net = &data.networks()[k];
            let missing = net.missing_count();
            if missing == 0 {
                continue;
            }
            let mask = net.mask.as_ref().unwrap();
            let cond_cov_p: DMatrix<f64> = if net.spec.n() <= DEFAULT_ENUM_CAP && missing <= 20 {
                let eta = net.spec.eta(theta)?;
                let (_, cm) = exact::conditional_moments(&net.spec, &net.attrs, &eta, &net.graph, mask)?;
                jac.transpose() * &cm.covariance * &jac
            } else {
                let eta = net.spec.eta(theta)?;
                let (init, free) = conditional_state(&net.graph, mask);
                let interval = free.len().max(1) as u64;
                let burnin = 10 * interval;
                let mut chain = Chain::new(
                    &net.spec,
                    &net.attrs,
                    eta,
                    init,
                    Some(free),
                    cfg.proposal,
                    chain_rng(cfg.seed, 0x5E80_0000 | k as u64),
                )?;
                let draws = (cfg.draws / 4).max(100);
                let sub_cfg = McmcConfig {
                    burnin,
                    interval,
                    draws,
                    proposal: cfg.proposal,
                    seed: cfg.seed,
                };
                let q = net.spec.q();
                let mut stats = Vec::with_capacity(draws * q);
                chain.sample(&sub_cfg, |_, s| stats.extend_from_slice(s));
                let pool = StatPool { stats, draws, q };
                let w = uniform_weights(pool.draws);
                pool.weighted_projection(&w, &jac).1
            };
            info -= cond_cov_p;
        }
    }

    let covariance = util::invert_spd(&info).ok_or_else(|| {
        Error::NonIdentifiable("singular Fisher information at the estimate".into())
    })?;
    let std_errors = (0..p).map(|i| covariance[(i, i)].max(0.0).sqrt()).collect();
    Ok((std_errors, covariance))
}

// ---------------------------------------------------------------------------
// pooled dispatch

/// Fits one θ to the pooled data by the chosen method. Masked networks are
/// rejected here; incomplete data go through the incomplete-data fit.
pub fn fit_pooled(data: &NetworkData, method: Method, cfg: &McmcConfig) -> Result<FitResult> {
    if data.has_missing() && !matches!(method, Method::Exact) {
        return Err(Error::Invalid(
            "data carries observation masks; use the incomplete-data fit".into(),
        ));
    }
    match method {
        Method::Mple => mple(data),
        Method::Mcmle => mcmle(data, None, cfg, &OptSettings::default()),
        Method::StochasticApprox => {
            stochastic_approximation(data, None, cfg, &GainSchedule::default())
        }
        Method::Exact => exact_fit(data),
    }
}
