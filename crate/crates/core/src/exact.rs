//! Brute-force enumeration for small node counts: exact normalizers,
//! moments, maximum likelihood, and marginal likelihoods under partial
//! observation. This module is the oracle backbone of the test suite — it
//! refuses rather than approximate beyond its cap.
//!
//! Enumeration walks graph states in Gray-code order so consecutive states
//! differ by one dyad toggle and statistics update incrementally.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Dyad, Graph, NodeAttributes, all_dyads, dyad_count};
use crate::missing::ObservationMask;
use crate::model::{ChangeScratch, ModelSpec};
use crate::util::{self, LogSumExp};

/// Largest `n` enumerated by default: 2^21 graph states.
pub const DEFAULT_ENUM_CAP: usize = 7;

/// Exact log-normalizer and first two moments of the statistic vector.
#[derive(Clone, Debug)]
pub struct ExactMoments {
    pub log_normalizer: f64,
    pub mean: Vec<f64>,
    pub covariance: DMatrix<f64>,
}

/// Result of an exact Newton maximum-likelihood fit.
#[derive(Clone, Debug)]
pub struct ExactMle {
    pub theta: Vec<f64>,
    pub log_lik: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Curved Fisher information J(θ̂)ᵀ Cov_θ̂[s] J(θ̂).
    pub fisher: DMatrix<f64>,
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(())
}

/// Visits every assignment of the `free` dyads on top of `base` (which must
/// have all free dyads absent), passing the log-weight and statistic vector
/// of each state. States appear in Gray-code order.
fn enumerate_states(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    eta: &[f64],
    base: &Graph,
    free: &[Dyad],
    mut visit: impl FnMut(f64, &[f64], &Graph),
) -> Result<()> {
    spec.validate_inputs(base, attrs)?;
    let mut g = base.clone();
    let mut s = spec.stat_vector(&g, attrs)?;
    let mut scratch = ChangeScratch::new();
    visit(util::dot(eta, &s), &s, &g);
    let states = 1u64 << free.len();
    for t in 1..states {
        let d = free[t.trailing_zeros() as usize];
        let sign = if g.has_edge(d) { -1.0 } else { 1.0 };
        spec.change_sparse(&g, attrs, d, &mut scratch);
        for &(c, v) in &scratch.pairs {
            s[c as usize] += sign * v;
        }
        g.toggle(d);
        // recompute the inner product from the (exactly maintained) counts
        // rather than accumulating it, to avoid drift over 2^d updates
        visit(util::dot(eta, &s), &s, &g);
    }
    Ok(())
}

fn full_dyads(n: usize) -> Vec<Dyad> {
    all_dyads(n).collect()
}

/// `ψ(θ) = log Σ_y exp⟨η(θ), s(y)⟩` over all `2^{n(n−1)/2}` graphs.
pub fn log_normalizer(spec: &ModelSpec, attrs: &NodeAttributes, theta: &[f64]) -> Result<f64> {
    log_normalizer_with_cap(spec, attrs, theta, DEFAULT_ENUM_CAP)
}

pub fn log_normalizer_with_cap(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    theta: &[f64],
    cap: usize,
) -> Result<f64> {
    check_cap(spec.n(), cap)?;
    let eta = spec.eta(theta)?;
    let mut lse = LogSumExp::new();
    enumerate_states(
        spec,
        attrs,
        &eta,
        &Graph::empty(spec.n())?,
        &full_dyads(spec.n()),
        |w, _, _| lse.add(w),
    )?;
    Ok(lse.value())
}

/// Exact `E[s]` and `Cov[s]` under the model.
pub fn exact_moments(spec: &ModelSpec, attrs: &NodeAttributes, theta: &[f64]) -> Result<ExactMoments> {
    exact_moments_with_cap(spec, attrs, theta, DEFAULT_ENUM_CAP)
}

pub fn exact_moments_with_cap(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    theta: &[f64],
    cap: usize,
) -> Result<ExactMoments> {
    check_cap(spec.n(), cap)?;
    let eta = spec.eta(theta)?;
    let base = Graph::empty(spec.n())?;
    let free = full_dyads(spec.n());
    moments_over(spec, attrs, &eta, &base, &free)
}

/// Two-pass mean/covariance over an enumerated state set.
fn moments_over(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    eta: &[f64],
    base: &Graph,
    free: &[Dyad],
) -> Result<ExactMoments> {
    let q = spec.q();
    let mut lse = LogSumExp::new();
    enumerate_states(spec, attrs, eta, base, free, |w, _, _| lse.add(w))?;
    let psi = lse.value();

    let mut mean = vec![0.0; q];
    let mut m2: DMatrix<f64> = DMatrix::zeros(q, q);
    enumerate_states(spec, attrs, eta, base, free, |w, s, _| {
        let p = (w - psi).exp();
        for a in 0..q {
            mean[a] += p * s[a];
            for b in a..q {
                m2[(a, b)] += p * s[a] * s[b];
            }
        }
    })?;
    let mut cov = DMatrix::zeros(q, q);
    for a in 0..q {
        for b in a..q {
            let c = m2[(a, b)] - mean[a] * mean[b];
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    Ok(ExactMoments {
        log_normalizer: psi,
        mean,
        covariance: cov,
    })
}

/// Exact log-likelihood `⟨η(θ), s(y)⟩ − ψ(θ)`.
pub fn exact_loglik(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    theta: &[f64],
    y: &Graph,
) -> Result<f64> {
    exact_loglik_with_cap(spec, attrs, theta, y, DEFAULT_ENUM_CAP)
}

pub fn exact_loglik_with_cap(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    theta: &[f64],
    y: &Graph,
    cap: usize,
) -> Result<f64> {
    Ok(spec.log_weight(theta, y, attrs)? - log_normalizer_with_cap(spec, attrs, theta, cap)?)
}

const GRAD_TOL: f64 = 1e-8;
const STEP_TOL: f64 = 1e-4;
const DIVERGENCE_CAP: f64 = 50.0;
const MAX_NEWTON_ITER: usize = 200;

/// Newton (Fisher-scoring) maximum likelihood on the exact log-likelihood,
/// with step-halving. Parameter divergence past the cap is diagnosed as MLE
/// nonexistence (the observed statistic lies on the convex hull boundary).
pub fn exact_mle(spec: &ModelSpec, attrs: &NodeAttributes, y: &Graph) -> Result<ExactMle> {
    exact_mle_with(spec, attrs, y, None, DEFAULT_ENUM_CAP)
}

pub fn exact_mle_with(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    y: &Graph,
    theta0: Option<&[f64]>,
    cap: usize,
) -> Result<ExactMle> {
    check_cap(spec.n(), cap)?;
    if spec.p() == 0 {
        return Err(Error::NonIdentifiable("model has no free parameters".into()));
    }
    let s_obs = spec.stat_vector(y, attrs)?;
    let mut theta = match theta0 {
        Some(t) => t.to_vec(),
        None => vec![0.0; spec.p()],
    };
    for w in spec.validate_theta(&theta)? {
        log::warn!("exact_mle initial theta: {w}");
    }

    let base = Graph::empty(spec.n())?;
    let free = full_dyads(spec.n());
    let loglik = |theta: &[f64]| -> Result<f64> {
        let eta = spec.eta(theta)?;
        let mut lse = LogSumExp::new();
        enumerate_states(spec, attrs, &eta, &base, &free, |w, _, _| lse.add(w))?;
        Ok(util::dot(&eta, &s_obs) - lse.value())
    };

    let mut ll = loglik(&theta)?;
    for iter in 1..=MAX_NEWTON_ITER {
        let eta = spec.eta(&theta)?;
        let mom = moments_over(spec, attrs, &eta, &base, &free)?;
        let jac = spec.eta_jacobian(&theta)?;
        let resid = DVector::from_iterator(spec.q(), s_obs.iter().zip(&mom.mean).map(|(o, m)| o - m));
        let grad = jac.transpose() * &resid;
        let grad_norm = grad.amax();
        let fisher = jac.transpose() * &mom.covariance * &jac;
        let step = util::solve_spd(&fisher, &grad).ok_or_else(|| {
            Error::NonIdentifiable("singular Fisher information in exact fit".into())
        })?;
        // A small gradient alone does not mean convergence: on the boundary
        // of the convex hull the gradient vanishes while the Newton step
        // stays large, because the information collapses along the escape
        // direction.
        if grad_norm < GRAD_TOL && step.amax() < STEP_TOL {
            return Ok(ExactMle {
                theta,
                log_lik: ll,
                iterations: iter,
                grad_norm,
                fisher,
            });
        }
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + lambda * s)
                .collect();
            if let Ok(cand_ll) = loglik(&cand) {
                if cand_ll > ll {
                    theta = cand;
                    ll = cand_ll;
                    moved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !moved {
            return if grad_norm < 1e-5 && step.amax() >= STEP_TOL {
                Err(Error::MleNonexistent(
                    "log-likelihood plateaus along an unbounded direction; observed statistic on the boundary of its convex hull"
                        .into(),
                ))
            } else if grad_norm < GRAD_TOL {
                Ok(ExactMle {
                    theta,
                    log_lik: ll,
                    iterations: iter,
                    grad_norm,
                    fisher,
                })
            } else {
                Err(Error::NonIdentifiable(format!(
                    "exact fit stalled at gradient sup-norm {grad_norm:.3e}"
                )))
            };
        }
        if util::sup_norm(&theta) > DIVERGENCE_CAP {
            return Err(Error::MleNonexistent(format!(
                "parameter diverged past {DIVERGENCE_CAP}; observed statistic on the boundary of its convex hull"
            )));
        }
    }
    Err(Error::MleNonexistent(format!(
        "no convergence in {MAX_NEWTON_ITER} Newton iterations"
    )))
}

/// Exact draws from the model by inverse-CDF over the enumerated state
/// space; the oracle-grade sampler for small `n`.
pub fn exact_sample(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    theta: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<Graph>> {
    exact_sample_with_cap(spec, attrs, theta, count, seed, DEFAULT_ENUM_CAP)
}

pub fn exact_sample_with_cap(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    theta: &[f64],
    count: usize,
    seed: u64,
    cap: usize,
) -> Result<Vec<Graph>> {
    use rand::Rng;
    use rand::SeedableRng;
    check_cap(spec.n(), cap)?;
    let eta = spec.eta(theta)?;
    let base = Graph::empty(spec.n())?;
    let free = full_dyads(spec.n());
    let mut lse = LogSumExp::new();
    enumerate_states(spec, attrs, &eta, &base, &free, |w, _, _| lse.add(w))?;
    let psi = lse.value();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut targets: Vec<(f64, usize)> = (0..count).map(|i| (rng.random::<f64>(), i)).collect();
    targets.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Option<Graph>> = vec![None; count];
    let mut cum = 0.0;
    let mut next = 0usize;
    enumerate_states(spec, attrs, &eta, &base, &free, |w, _, g| {
        cum += (w - psi).exp();
        while next < targets.len() && targets[next].0 <= cum {
            out[targets[next].1] = Some(g.clone());
            next += 1;
        }
    })?;
    // the accumulated total is 1 up to rounding, so an unmatched target can
    // occur only with probability ~1e-15; give it the complete graph (the
    // state the cumulative walk undercounts toward)
    let complete = Graph::complete(spec.n())?;
    Ok(out
        .into_iter()
        .map(|g| g.unwrap_or_else(|| complete.clone()))
        .collect())
}

/// Moments of the conditional distribution over completions of the
/// unobserved dyads, plus `log Σ_completions exp⟨η, s⟩` (not normalized).
pub(crate) fn conditional_moments(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    eta: &[f64],
    y_obs: &Graph,
    mask: &ObservationMask,
) -> Result<(f64, ExactMoments)> {
    let free: Vec<Dyad> = mask.unobserved_dyads().collect();
    let mut base = y_obs.clone();
    for &d in &free {
        base.set_edge(d, false);
    }
    let mom = moments_over(spec, attrs, eta, &base, &free)?;
    Ok((mom.log_normalizer, mom))
}

/// Marginal log-likelihood of a partially observed graph: the log of the
/// sum of `exp⟨η, s⟩` over all completions of the unobserved dyads, minus
/// `ψ(θ)`. Requires `n` within the cap; at most 20 unobserved dyads are
/// summed exactly (a full-missing mask short-circuits to 0).
pub fn exact_incomplete_loglik(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    theta: &[f64],
    y_obs: &Graph,
    mask: &ObservationMask,
) -> Result<f64> {
    exact_incomplete_loglik_with_cap(spec, attrs, theta, y_obs, mask, DEFAULT_ENUM_CAP)
}

pub fn exact_incomplete_loglik_with_cap(
    spec: &ModelSpec,
    attrs: &NodeAttributes,
    theta: &[f64],
    y_obs: &Graph,
    mask: &ObservationMask,
    cap: usize,
) -> Result<f64> {
    if mask.n() != spec.n() || y_obs.n() != spec.n() {
        return Err(Error::DimensionMismatch(format!(
            "mask n = {}, graph n = {}, model n = {}",
            mask.n(),
            y_obs.n(),
            spec.n()
        )));
    }
    let missing = mask.unobserved_count();
    if missing == dyad_count(spec.n()) {
        // marginalizing over everything: total probability one
        return Ok(0.0);
    }
    if missing == 0 {
        return exact_loglik_with_cap(spec, attrs, theta, y_obs, cap);
    }
    check_cap(spec.n(), cap)?;
    if missing > 20 {
        return Err(Error::TooManyMissing(missing));
    }
    let eta = spec.eta(theta)?;
    let free: Vec<Dyad> = mask.unobserved_dyads().collect();
    let mut base = y_obs.clone();
    for &d in &free {
        base.set_edge(d, false);
    }
    let mut lse = LogSumExp::new();
    enumerate_states(spec, attrs, &eta, &base, &free, |w, _, _| lse.add(w))?;
    Ok(lse.value() - log_normalizer_with_cap(spec, attrs, theta, cap)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::terms::{DyadTable, TermKind};
    use crate::util::logit;

    fn no_attrs(n: usize) -> NodeAttributes {
        NodeAttributes::new(n)
    }

    fn edges_spec(n: usize) -> ModelSpec {
        ModelSpec::builder(n).term(TermKind::Edges).build().unwrap()
    }

    #[test]
    fn normalizer_closed_forms() {
        let attrs = no_attrs(3);
        let psi = log_normalizer(&edges_spec(3), &attrs, &[0.0]).unwrap();
        assert!((psi - 3.0 * 2f64.ln()).abs() < 1e-12);

        // seven graphs of weight 1 plus the triangle of weight 2
        let spec = ModelSpec::builder(3)
            .term(TermKind::Edges)
            .term(TermKind::Triangles)
            .build()
            .unwrap();
        let psi = log_normalizer(&spec, &attrs, &[0.0, 2f64.ln()]).unwrap();
        assert!((psi - 9f64.ln()).abs() < 1e-12);

        // per-dyad independence with a sparse offset
        let spec = ModelSpec::builder(3)
            .term(TermKind::Edges)
            .offset_sparse()
            .build()
            .unwrap();
        let psi = log_normalizer(&spec, &attrs, &[0.0]).unwrap();
        assert!((psi - 3.0 * (4f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn refuses_beyond_cap() {
        let spec = edges_spec(8);
        assert!(matches!(
            log_normalizer(&spec, &no_attrs(8), &[0.0]),
            Err(Error::CapExceeded { n: 8, cap: 7 })
        ));
        assert!(log_normalizer_with_cap(&spec, &no_attrs(8), &[0.0], 8).is_ok());
    }

    #[test]
    fn moments_closed_forms() {
        let attrs = no_attrs(3);
        let m = exact_moments(&edges_spec(3), &attrs, &[0.0]).unwrap();
        assert!((m.mean[0] - 1.5).abs() < 1e-12);
        assert!((m.covariance[(0, 0)] - 0.75).abs() < 1e-12);

        let m = exact_moments(&edges_spec(4), &no_attrs(4), &[logit(0.2)]).unwrap();
        assert!((m.mean[0] - 1.2).abs() < 1e-12);

        let spec = ModelSpec::builder(3)
            .term(TermKind::Edges)
            .term(TermKind::Triangles)
            .build()
            .unwrap();
        let m = exact_moments(&spec, &attrs, &[0.0, 2f64.ln()]).unwrap();
        assert!((m.mean[1] - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_normalize() {
        // random small models: the enumerated masses must sum to one
        for (i, n) in [3usize, 4, 5, 5].iter().enumerate() {
            let spec = ModelSpec::builder(*n)
                .term(TermKind::Edges)
                .term(TermKind::Triangles)
                .term(TermKind::TwoPaths)
                .build()
                .unwrap();
            let theta = [0.3 - i as f64 * 0.2, 0.1 * i as f64, -0.15];
            let attrs = no_attrs(*n);
            let psi = log_normalizer(&spec, &attrs, &theta).unwrap();
            let eta = spec.eta(&theta).unwrap();
            let mut total = 0.0;
            enumerate_states(
                &spec,
                &attrs,
                &eta,
                &Graph::empty(*n).unwrap(),
                &full_dyads(*n),
                |w, _, _| total += (w - psi).exp(),
            )
            .unwrap();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: total {total}");
        }
    }

    #[test]
    fn mle_closed_form_and_nonexistence() {
        let spec = edges_spec(4);
        let attrs = no_attrs(4);
        let y = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let fit = exact_mle(&spec, &attrs, &y).unwrap();
        assert!(fit.theta[0].abs() < 1e-8, "logit(3/6) = 0, got {}", fit.theta[0]);

        let empty = Graph::empty(4).unwrap();
        assert!(matches!(
            exact_mle(&spec, &attrs, &empty),
            Err(Error::MleNonexistent(_))
        ));
    }

    #[test]
    fn mle_matches_grid_refinement_oracle() {
        // data graph on six nodes with both open and closed triads
        let y = Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (1, 3)])
            .unwrap();
        let spec = ModelSpec::builder(6)
            .term(TermKind::Edges)
            .term(TermKind::Triangles)
            .build()
            .unwrap();
        let attrs = no_attrs(6);
        let fit = exact_mle(&spec, &attrs, &y).unwrap();

        // independent maximizer: coarse grid then shrinking refinement
        // around the best cell (the optimization path is independent of the
        // Newton iteration it checks; psi shares the enumerator, which the
        // normalization test validates against direct summation)
        let mut center = (0.0f64, 0.0f64);
        let mut half = 3.0f64;
        let mut best = (f64::NEG_INFINITY, center);
        for _ in 0..14 {
            for a in -5i32..=5 {
                for b in -5i32..=5 {
                    let t = (
                        center.0 + half * a as f64 / 5.0,
                        center.1 + half * b as f64 / 5.0,
                    );
                    let ll = exact_loglik(&spec, &attrs, &[t.0, t.1], &y).unwrap();
                    if ll > best.0 {
                        best = (ll, t);
                    }
                }
            }
            center = best.1;
            half *= 0.4;
        }
        assert!(
            (fit.theta[0] - best.1 .0).abs() < 1e-4 && (fit.theta[1] - best.1 .1).abs() < 1e-4,
            "newton {:?} vs grid {:?}",
            fit.theta,
            best.1
        );
    }

    #[test]
    fn mean_value_property_at_mle() {
        let spec = ModelSpec::builder(5)
            .term(TermKind::Edges)
            .term(TermKind::TwoPaths)
            .build()
            .unwrap();
        let attrs = no_attrs(5);
        // exact draws keep the observed statistics in the interior of the
        // convex hull with high probability; skip boundary draws
        let mut checked = 0;
        for seed in 0..20u64 {
            let y = exact_sample(&spec, &attrs, &[-0.3, 0.1], 1, seed).unwrap().remove(0);
            let fit = match exact_mle(&spec, &attrs, &y) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let mom = exact_moments(&spec, &attrs, &fit.theta).unwrap();
            let s = spec.stat_vector(&y, &attrs).unwrap();
            for a in 0..spec.q() {
                assert!((mom.mean[a] - s[a]).abs() < 1e-6);
            }
            checked += 1;
            if checked == 5 {
                break;
            }
        }
        assert!(checked >= 3, "only {checked} interior draws in 20 attempts");
    }

    #[test]
    fn curved_score_vanishes_at_mle() {
        let spec = ModelSpec::builder(6)
            .term(TermKind::Edges)
            .gwesp()
            .build()
            .unwrap();
        let attrs = no_attrs(6);
        let mut checked = 0;
        for seed in 0..30u64 {
            let y = exact_sample(&spec, &attrs, &[-0.5, 0.8, 0.4], 1, 100 + seed)
                .unwrap()
                .remove(0);
            let fit = match exact_mle_with(&spec, &attrs, &y, Some(&[-0.5, 0.8, 0.4]), 7) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let mom = exact_moments(&spec, &attrs, &fit.theta).unwrap();
            let jac = spec.eta_jacobian(&fit.theta).unwrap();
            let s = spec.stat_vector(&y, &attrs).unwrap();
            let resid =
                DVector::from_iterator(spec.q(), s.iter().zip(&mom.mean).map(|(o, m)| o - m));
            assert!((jac.transpose() * resid).amax() < 1e-6);
            checked += 1;
            if checked == 3 {
                break;
            }
        }
        assert!(checked >= 2, "only {checked} interior curved fits in 30 attempts");
    }

    #[test]
    fn exact_sampler_matches_moments() {
        let spec = ModelSpec::builder(4)
            .term(TermKind::Edges)
            .term(TermKind::Triangles)
            .build()
            .unwrap();
        let attrs = no_attrs(4);
        let theta = [-0.3, 0.5];
        let mom = exact_moments(&spec, &attrs, &theta).unwrap();
        let draws = exact_sample(&spec, &attrs, &theta, 40_000, 9).unwrap();
        let mean_edges =
            draws.iter().map(|g| g.edge_count() as f64).sum::<f64>() / draws.len() as f64;
        let se = (mom.covariance[(0, 0)] / draws.len() as f64).sqrt();
        assert!(
            (mean_edges - mom.mean[0]).abs() < 4.0 * se,
            "mean {mean_edges} vs {}",
            mom.mean[0]
        );
    }

    #[test]
    fn incomplete_loglik_worked_examples() {
        let spec = edges_spec(3);
        let attrs = no_attrs(3);
        let y = Graph::from_edges(3, [(0, 1)]).unwrap(); // y12 = 1, y13 = 0
        let mut mask = ObservationMask::full(3);
        mask.set_observed(Dyad::new(1, 2).unwrap(), false);
        let ll = exact_incomplete_loglik(&spec, &attrs, &[0.0], &y, &mask).unwrap();
        assert!((ll - (2f64 / 8.0).ln()).abs() < 1e-12);

        // nothing missing: the complete-data log-likelihood
        let full = ObservationMask::full(3);
        let ll_full = exact_incomplete_loglik(&spec, &attrs, &[0.4], &y, &full).unwrap();
        let direct = exact_loglik(&spec, &attrs, &[0.4], &y).unwrap();
        assert!((ll_full - direct).abs() < 1e-12);

        // everything missing: log of total probability one
        let none = ObservationMask::empty(3);
        let ll_none = exact_incomplete_loglik(&spec, &attrs, &[0.4], &y, &none).unwrap();
        assert_eq!(ll_none, 0.0);
    }

    #[test]
    fn marginal_likelihoods_cohere() {
        // summing the marginal over every observed-part configuration fills
        // the whole space again
        let spec = ModelSpec::builder(3)
            .term(TermKind::Edges)
            .term(TermKind::Triangles)
            .build()
            .unwrap();
        let attrs = no_attrs(3);
        let theta = [0.2, -0.4];
        let mut mask = ObservationMask::full(3);
        mask.set_observed(Dyad::new(0, 2).unwrap(), false);

        let mut total = 0.0;
        for bits in 0..4u32 {
            let mut y = Graph::empty(3).unwrap();
            if bits & 1 != 0 {
                y.toggle(Dyad::new(0, 1).unwrap());
            }
            if bits & 2 != 0 {
                y.toggle(Dyad::new(1, 2).unwrap());
            }
            total += exact_incomplete_loglik(&spec, &attrs, &theta, &y, &mask)
                .unwrap()
                .exp();
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_factorization_of_normalizer() {
        // within-block edge counts on the union of blocks {0,1,2} and {3,4};
        // between-block dyads carry no statistic, so the union normalizer is
        // the product of per-block normalizers times 2^#between
        let n = 5;
        let blocks = [vec![0usize, 1, 2], vec![3usize, 4]];
        let w1 = DyadTable::from_fn(n, |i, j| (blocks[0].contains(&i) && blocks[0].contains(&j)) as i32 as f64);
        let w2 = DyadTable::from_fn(n, |i, j| (blocks[1].contains(&i) && blocks[1].contains(&j)) as i32 as f64);
        let union_spec = ModelSpec::builder(n)
            .term(TermKind::DyadCovariate(w1))
            .term(TermKind::DyadCovariate(w2))
            .build()
            .unwrap();
        let theta = [0.7, -0.3];
        let psi_union = log_normalizer(&union_spec, &no_attrs(n), &theta).unwrap();

        let psi_b1 = log_normalizer(&edges_spec(3), &no_attrs(3), &[0.7]).unwrap();
        let psi_b2 = log_normalizer(&edges_spec(2), &no_attrs(2), &[-0.3]).unwrap();
        let between = 6.0; // 3 * 2 cross-block dyads
        assert!((psi_union - (psi_b1 + psi_b2 + between * 2f64.ln())).abs() < 1e-10);
    }
}
