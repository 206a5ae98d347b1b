//! Observation processes: per-dyad observation masks, mask-generating
//! sampling designs (ego-centric, k-wave link-tracing, subgraph, missing at
//! random), and incomplete-data maximum likelihood under ignorable designs.
//!
//! Masks are value objects independent of edge data. The design generators
//! that must not look at edges (`mar_mask`, `subgraph_sample`) take no graph
//! argument at all; ego-centric and link-tracing designs read edges only to
//! find alters.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimate::{FitResult, NetworkData, OptSettings};
use crate::graph::{BlockStructure, Dyad, Graph, all_dyads, dyad_count};
use crate::sampler::McmcConfig;

/// Per-dyad observed/unobserved indicators covering every dyad of an
/// `n`-node network (1 = observed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMask {
    n: usize,
    bits: Vec<u64>,
    observed: usize,
}

impl ObservationMask {
    /// Everything observed.
    pub fn full(n: usize) -> Self {
        let d = dyad_count(n);
        let mut m = ObservationMask {
            n,
            bits: vec![!0u64; d.div_ceil(64).max(1)],
            observed: d,
        };
        // clear bits past the dyad count so equality stays structural
        let extra = m.bits.len() * 64 - d;
        if extra > 0 {
            let last = m.bits.len() - 1;
            m.bits[last] &= !0u64 >> extra;
        }
        m
    }

    /// Nothing observed.
    pub fn empty(n: usize) -> Self {
        let d = dyad_count(n);
        ObservationMask {
            n,
            bits: vec![0u64; d.div_ceil(64).max(1)],
            observed: 0,
        }
    }

    /// Mask observing the complete dyad row of every listed ego.
    pub fn ego_rows(n: usize, egos: &[usize]) -> Result<Self> {
        let mut is_ego = vec![false; n];
        for &e in egos {
            if e >= n {
                return Err(Error::NodeOutOfRange { index: e, n });
            }
            is_ego[e] = true;
        }
        let mut m = ObservationMask::empty(n);
        for d in all_dyads(n) {
            if is_ego[d.i()] || is_ego[d.j()] {
                m.set_observed(d, true);
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_observed(&self, d: Dyad) -> bool {
        let idx = d.index();
        self.bits[idx >> 6] & (1u64 << (idx & 63)) != 0
    }

    pub fn set_observed(&mut self, d: Dyad, observed: bool) {
        let idx = d.index();
        debug_assert!(idx < dyad_count(self.n));
        let bit = 1u64 << (idx & 63);
        let word = &mut self.bits[idx >> 6];
        let was = *word & bit != 0;
        if was != observed {
            *word ^= bit;
            if observed {
                self.observed += 1;
            } else {
                self.observed -= 1;
            }
        }
    }

    pub fn observed_count(&self) -> usize {
        self.observed
    }

    pub fn unobserved_count(&self) -> usize {
        dyad_count(self.n) - self.observed
    }

    pub fn is_full(&self) -> bool {
        self.observed == dyad_count(self.n)
    }

    pub fn unobserved_dyads(&self) -> impl Iterator<Item = Dyad> + '_ {
        all_dyads(self.n).filter(move |d| !self.is_observed(*d))
    }

    pub fn observed_dyads(&self) -> impl Iterator<Item = Dyad> + '_ {
        all_dyads(self.n).filter(move |d| self.is_observed(*d))
    }

    /// Dyad-wise union: observed in either mask.
    pub fn union(&self, other: &ObservationMask) -> Result<ObservationMask> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "mask sizes differ: {} vs {}",
                self.n, other.n
            )));
        }
        let mut out = self.clone();
        for d in other.observed_dyads() {
            out.set_observed(d, true);
        }
        Ok(out)
    }
}

/// Per-unit inclusion probabilities for a node or block sample.
#[derive(Clone, Debug, PartialEq)]
pub enum Inclusion {
    Uniform(f64),
    PerUnit(Vec<f64>),
}

impl Inclusion {
    fn validate(&self, units: usize) -> Result<()> {
        let check = |p: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Invalid(format!("inclusion probability {p} outside [0, 1]")));
            }
            Ok(())
        };
        match self {
            Inclusion::Uniform(p) => check(*p),
            Inclusion::PerUnit(ps) => {
                if ps.len() != units {
                    return Err(Error::DimensionMismatch(format!(
                        "{} inclusion probabilities for {units} units",
                        ps.len()
                    )));
                }
                ps.iter().try_for_each(|&p| check(p))
            }
        }
    }

    fn prob(&self, unit: usize) -> f64 {
        match self {
            Inclusion::Uniform(p) => *p,
            Inclusion::PerUnit(ps) => ps[unit],
        }
    }
}

/// An observation design: which part of the population graph gets recorded.
/// Every design implemented here is ignorable for likelihood-based
/// inference; non-ignorable mechanisms (e.g. respondent-driven sampling)
/// are deliberately not constructible.
#[derive(Clone, Debug, PartialEq)]
pub enum Design {
    /// Probability sample of egos; each ego's full dyad row is observed.
    Ego { inclusion: Inclusion },
    /// Ego sample, then `waves` rounds of adding all alters as new egos.
    LinkTrace { inclusion: Inclusion, waves: usize },
    /// Block sample; the subgraphs induced by sampled blocks are observed.
    Subgraph { inclusion: Inclusion },
    /// Each dyad independently unobserved with probability `q`.
    Mar { q: f64 },
}

impl Design {
    /// All constructible designs satisfy the ignorability conditions: the
    /// probability of a dyad being unobserved never depends on unobserved
    /// edge values, and design parameters share no storage with θ.
    pub fn ignorable(&self) -> bool {
        true
    }
}

fn design_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bernoulli_units(rng: &mut ChaCha8Rng, units: usize, incl: &Inclusion) -> Vec<usize> {
    (0..units)
        .filter(|&u| rng.random::<f64>() < incl.prob(u))
        .collect()
}

/// Ego-centric sampling: a probability sample of egos, with every dyad
/// incident to at least one ego observed (edges and non-edges alike).
pub fn ego_sample(g: &Graph, inclusion: &Inclusion, seed: u64) -> Result<ObservationMask> {
    inclusion.validate(g.n())?;
    let mut rng = design_rng(seed);
    let egos = bernoulli_units(&mut rng, g.n(), inclusion);
    ObservationMask::ego_rows(g.n(), &egos)
}

/// k-wave link-tracing: wave 0 is an ego sample; each later wave adds every
/// node linked to the previous wave's members and observes its dyad row.
/// `waves = 0` reduces to [`ego_sample`] with the same seed.
pub fn link_trace(g: &Graph, inclusion: &Inclusion, waves: usize, seed: u64) -> Result<ObservationMask> {
    inclusion.validate(g.n())?;
    let mut rng = design_rng(seed);
    let mut member = vec![false; g.n()];
    let mut frontier = bernoulli_units(&mut rng, g.n(), inclusion);
    for &e in &frontier {
        member[e] = true;
    }
    for _ in 0..waves {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in g.neighbors(v) {
                if !member[w as usize] {
                    member[w as usize] = true;
                    next.push(w as usize);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let egos: Vec<usize> = member
        .iter()
        .enumerate()
        .filter_map(|(v, &m)| m.then_some(v))
        .collect();
    ObservationMask::ego_rows(g.n(), &egos)
}

/// Subgraph (multilevel) sampling: within-block dyads of sampled blocks are
/// observed; between-block dyads and unsampled blocks are not. Takes no
/// edge access by construction.
pub fn subgraph_sample(
    blocks: &BlockStructure,
    inclusion: &Inclusion,
    seed: u64,
) -> Result<ObservationMask> {
    inclusion.validate(blocks.num_blocks())?;
    let mut rng = design_rng(seed);
    let sampled = bernoulli_units(&mut rng, blocks.num_blocks(), inclusion);
    let mut in_sample = vec![false; blocks.num_blocks()];
    for &b in &sampled {
        in_sample[b] = true;
    }
    let mut m = ObservationMask::empty(blocks.n());
    for d in all_dyads(blocks.n()) {
        if blocks.same_block(d.i(), d.j()) && in_sample[blocks.block_of(d.i())] {
            m.set_observed(d, true);
        }
    }
    Ok(m)
}

/// Missing-at-random dyads: each dyad independently unobserved with
/// probability `q`. Takes no edge access by construction.
pub fn mar_mask(n: usize, q: f64, seed: u64) -> Result<ObservationMask> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Invalid(format!("masking probability {q} outside [0, 1]")));
    }
    let mut rng = design_rng(seed);
    let mut m = ObservationMask::full(n);
    for d in all_dyads(n) {
        if rng.random::<f64>() < q {
            m.set_observed(d, false);
        }
    }
    Ok(m)
}

/// Maximum likelihood from partially observed networks under an ignorable
/// observation process: maximizes the marginal likelihood obtained by
/// summing the complete-data density over all completions of the
/// unobserved dyads — exactly when every network is small enough, otherwise
/// by Monte Carlo with conditional-simulation completions.
///
/// Networks whose masks are full behave exactly like complete data: with
/// the same seed and configuration the result is bit-for-bit the same as
/// the complete-data fit.
pub fn incomplete_fit(
    data: &NetworkData,
    theta0: Option<&[f64]>,
    cfg: &McmcConfig,
) -> Result<FitResult> {
    incomplete_fit_with(data, theta0, cfg, &OptSettings::default())
}

pub fn incomplete_fit_with(
    data: &NetworkData,
    theta0: Option<&[f64]>,
    cfg: &McmcConfig,
    opt: &OptSettings,
) -> Result<FitResult> {
    let any_information = data.networks().iter().any(|net| match &net.mask {
        Some(m) => m.observed_count() > 0,
        None => true,
    });
    if !any_information {
        return Err(Error::Invalid("all dyads of every network are unobserved".into()));
    }
    // With nothing actually missing the fit is the ordinary complete-data
    // Monte Carlo fit (bit-for-bit, given the same seed). With missing
    // dyads, sum over completions exactly while every network permits it.
    let exact_ok = data.has_missing()
        && data.networks().iter().all(|net| {
            net.spec.n() <= crate::exact::DEFAULT_ENUM_CAP
                && net.mask.as_ref().map_or(0, |m| m.unobserved_count()) <= 20
        });
    if exact_ok {
        crate::estimate::exact_fit_from(data, theta0)
    } else {
        crate::estimate::fit_surrogate(data, theta0, cfg, opt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{self, Network};
    use crate::exact;
    use crate::graph::NodeAttributes;
    use crate::model::ModelSpec;
    use crate::terms::TermKind;
    use std::sync::Arc;

    #[test]
    fn incomplete_fit_full_masks_is_bit_for_bit_complete() {
        let graphs = vec![
            Graph::from_edges(5, [(0, 1), (1, 2), (2, 3)]).unwrap(),
            Graph::from_edges(5, [(0, 2), (3, 4), (1, 4), (0, 4)]).unwrap(),
        ];
        let spec = Arc::new(ModelSpec::builder(5).term(TermKind::Edges).build().unwrap());
        let attrs = Arc::new(NodeAttributes::new(5));
        let complete = NetworkData::pooled(spec.clone(), attrs.clone(), graphs.clone()).unwrap();
        let masked = NetworkData::new(
            graphs
                .into_iter()
                .map(|g| Network {
                    spec: spec.clone(),
                    graph: g,
                    attrs: attrs.clone(),
                    mask: Some(ObservationMask::full(5)),
                })
                .collect(),
        )
        .unwrap();
        let cfg = McmcConfig::for_nodes(5, 77).with_draws(400);
        let a = estimate::mcmle(&complete, None, &cfg, &OptSettings::default()).unwrap();
        let b = incomplete_fit(&masked, None, &cfg).unwrap();
        assert_eq!(a.theta_hat, b.theta_hat);
        assert_eq!(a.std_errors, b.std_errors);
    }

    #[test]
    fn incomplete_fit_three_node_worked_example() {
        // observed y12 = 1, y13 = 0, dyad (2,3) missing: the marginal
        // likelihood exp(theta)/(1+exp(theta))^2 peaks at zero
        let spec = Arc::new(ModelSpec::builder(3).term(TermKind::Edges).build().unwrap());
        let attrs = Arc::new(NodeAttributes::new(3));
        let y = Graph::from_edges(3, [(0, 1)]).unwrap();
        let mut mask = ObservationMask::full(3);
        mask.set_observed(Dyad::new(1, 2).unwrap(), false);
        let data = NetworkData::new(vec![Network {
            spec: spec.clone(),
            graph: y.clone(),
            attrs: attrs.clone(),
            mask: Some(mask.clone()),
        }])
        .unwrap();
        let cfg = McmcConfig::for_nodes(3, 1);
        let fit = incomplete_fit(&data, None, &cfg).unwrap();
        assert!(fit.theta_hat[0].abs() < 1e-6, "theta {}", fit.theta_hat[0]);

        // the maximizer also zeroes the exact marginal score
        let h = 1e-5;
        let up = exact::exact_incomplete_loglik(&spec, &attrs, &[fit.theta_hat[0] + h], &y, &mask)
            .unwrap();
        let dn = exact::exact_incomplete_loglik(&spec, &attrs, &[fit.theta_hat[0] - h], &y, &mask)
            .unwrap();
        assert!(((up - dn) / (2.0 * h)).abs() < 1e-4);
    }

    #[test]
    fn incomplete_fit_monte_carlo_path_tracks_complete_fit() {
        // n above the enumeration cap forces the conditional-simulation
        // route; with only two dyads hidden the estimate stays close to the
        // complete-data fit
        let g = Graph::from_edges(
            8,
            [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 7), (1, 4), (2, 6)],
        )
        .unwrap();
        let spec = Arc::new(ModelSpec::builder(8).term(TermKind::Edges).build().unwrap());
        let attrs = Arc::new(NodeAttributes::new(8));
        let complete = NetworkData::pooled(spec.clone(), attrs.clone(), vec![g.clone()]).unwrap();
        let mut mask = ObservationMask::full(8);
        mask.set_observed(Dyad::new(0, 3).unwrap(), false);
        mask.set_observed(Dyad::new(5, 7).unwrap(), false);
        let masked = NetworkData::new(vec![Network {
            spec: spec.clone(),
            graph: g,
            attrs,
            mask: Some(mask),
        }])
        .unwrap();
        let cfg = McmcConfig::for_nodes(8, 4).with_draws(3000);
        let full = estimate::mcmle(&complete, None, &cfg, &OptSettings::default()).unwrap();
        let part = incomplete_fit(&masked, None, &cfg).unwrap();
        assert!(
            (full.theta_hat[0] - part.theta_hat[0]).abs() < 0.25,
            "{} vs {}",
            full.theta_hat[0],
            part.theta_hat[0]
        );
        // losing two dyads cannot shrink the uncertainty
        assert!(part.std_errors[0] > 0.9 * full.std_errors[0]);
    }

    #[test]
    fn incomplete_fit_rejects_information_free_data() {
        let spec = Arc::new(ModelSpec::builder(4).term(TermKind::Edges).build().unwrap());
        let attrs = Arc::new(NodeAttributes::new(4));
        let data = NetworkData::new(vec![Network {
            spec: spec.clone(),
            graph: Graph::empty(4).unwrap(),
            attrs,
            mask: Some(ObservationMask::empty(4)),
        }])
        .unwrap();
        let cfg = McmcConfig::for_nodes(4, 1);
        assert!(matches!(
            incomplete_fit(&data, None, &cfg),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn full_and_empty_masks() {
        let full = ObservationMask::full(4);
        assert_eq!(full.observed_count(), 6);
        assert!(full.is_full());
        let empty = ObservationMask::empty(4);
        assert_eq!(empty.unobserved_count(), 6);
        assert_eq!(full.union(&empty).unwrap(), full);
    }

    #[test]
    fn ego_sample_extremes() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let all = ego_sample(&g, &Inclusion::Uniform(1.0), 7).unwrap();
        assert!(all.is_full());
        let none = ego_sample(&g, &Inclusion::Uniform(0.0), 7).unwrap();
        assert_eq!(none.observed_count(), 0);
    }

    #[test]
    fn single_ego_row() {
        let g = Graph::empty(4).unwrap();
        // only node 2 can be included
        let incl = Inclusion::PerUnit(vec![0.0, 0.0, 1.0, 0.0]);
        let m = ego_sample(&g, &incl, 3).unwrap();
        assert_eq!(m.observed_count(), 3);
        for d in m.observed_dyads() {
            assert!(d.i() == 2 || d.j() == 2);
        }
    }

    #[test]
    fn link_trace_on_a_path() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let incl = Inclusion::PerUnit(vec![1.0, 0.0, 0.0, 0.0]);
        let m0 = link_trace(&g, &incl, 0, 11).unwrap();
        assert_eq!(m0, ego_sample(&g, &incl, 11).unwrap());

        let m1 = link_trace(&g, &incl, 1, 11).unwrap();
        assert_eq!(m1, ObservationMask::ego_rows(4, &[0, 1]).unwrap());

        // enough waves to close the (connected) component
        let m3 = link_trace(&g, &incl, 3, 11).unwrap();
        assert!(m3.is_full());
    }

    #[test]
    fn subgraph_sampling_blocks() {
        let blocks = BlockStructure::new(vec![0, 0, 1, 1]).unwrap();
        let all = subgraph_sample(&blocks, &Inclusion::Uniform(1.0), 5).unwrap();
        // within-block dyads only: {0,1} and {2,3}
        assert_eq!(all.observed_count(), 2);
        assert!(all.is_observed(Dyad::new(0, 1).unwrap()));
        assert!(all.is_observed(Dyad::new(2, 3).unwrap()));
        assert!(!all.is_observed(Dyad::new(1, 2).unwrap()));

        let none = subgraph_sample(&blocks, &Inclusion::Uniform(0.0), 5).unwrap();
        assert_eq!(none.observed_count(), 0);

        let whole = BlockStructure::new(vec![0, 0, 0, 0]).unwrap();
        let m = subgraph_sample(&whole, &Inclusion::Uniform(1.0), 5).unwrap();
        assert!(m.is_full());
    }

    #[test]
    fn mar_extremes_and_rate() {
        assert!(mar_mask(5, 0.0, 1).unwrap().is_full());
        assert_eq!(mar_mask(5, 1.0, 1).unwrap().observed_count(), 0);

        let n = 20;
        let m = mar_mask(n, 0.5, 42).unwrap();
        let d = dyad_count(n) as f64;
        let frac = m.observed_count() as f64 / d;
        let se = (0.25 / d).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * se, "observed fraction {frac}");
    }

    #[test]
    fn union_of_ego_masks_is_mask_of_union() {
        let n = 6;
        let a = ObservationMask::ego_rows(n, &[0, 2]).unwrap();
        let b = ObservationMask::ego_rows(n, &[2, 4]).unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u, ObservationMask::ego_rows(n, &[0, 2, 4]).unwrap());
        // idempotence
        assert_eq!(u.union(&u).unwrap(), u);
    }
}
