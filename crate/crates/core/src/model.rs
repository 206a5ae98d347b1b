//! ERGM specification: the map from curved parameters θ to natural
//! parameters η, its Jacobian, fixed offsets, and unnormalized log-density.
//!
//! A [`ModelSpec`] pins an ordered list of natural statistics (one
//! [`TermKind`] per natural coordinate) together with a parameter map. Map
//! entries are either `Linear` (the coordinate's weight is a single θ),
//! `Gwesp` (a geometrically weighted family over the full
//! `esp_1 .. esp_{n-2}` block, optionally with additive shifts on the first
//! two coordinates), or `FixedOffset` (weight pinned to 1, never estimated).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Dyad, Graph, NodeAttributes};
use crate::terms::{self, DyadTable, TermKind};

/// How a block of natural coordinates derives from θ.
#[derive(Clone, Debug, PartialEq)]
pub enum MapEntry {
    /// One natural coordinate, weight `θ[theta]`.
    Linear { theta: usize },
    /// `m_count` consecutive coordinates (the `esp_1..esp_{m_count}` family)
    /// with weights `θ[base]·exp(θ[decay])·[1 − (1 − exp(−θ[decay]))^m]`,
    /// plus `θ[shift1]`/`θ[shift2]` added to the m = 1 and m = 2 coordinates
    /// when shifts are present.
    Gwesp {
        base: usize,
        decay: usize,
        shifts: Option<(usize, usize)>,
        m_count: usize,
    },
    /// One natural coordinate with weight exactly 1.
    FixedOffset,
}

impl MapEntry {
    fn span(&self) -> usize {
        match self {
            MapEntry::Gwesp { m_count, .. } => *m_count,
            _ => 1,
        }
    }
}

/// The added value of the `m`-th shared partner under a geometrically
/// weighted family: `base · (1 − exp(−decay))^{m−1}`.
pub fn gwesp_added_value(base: f64, decay: f64, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::TermOutOfRange(format!("added value needs m >= 1, got {m}")));
    }
    Ok(base * (1.0 - (-decay).exp()).powi(m as i32 - 1))
}

/// Soft diagnostics about a parameter vector; estimation proceeds
/// unconstrained, these are surfaced as warnings.
#[derive(Clone, Debug, PartialEq)]
pub enum ThetaWarning {
    /// Geometric decay below zero: added values alternate in sign.
    DecayNegative { theta_index: usize, value: f64 },
    /// Decay below −log 2: the family is near-degenerate for large graphs.
    DecayNearDegenerate { theta_index: usize, value: f64 },
    /// Base parameter is exactly zero: the decay parameter drops out.
    BaseZero { theta_index: usize },
}

impl std::fmt::Display for ThetaWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThetaWarning::DecayNegative { theta_index, value } => write!(
                f,
                "decay parameter theta[{theta_index}] = {value:.4} < 0: added values alternate in sign"
            ),
            ThetaWarning::DecayNearDegenerate { theta_index, value } => write!(
                f,
                "decay parameter theta[{theta_index}] = {value:.4} < -log 2: near-degenerate regime"
            ),
            ThetaWarning::BaseZero { theta_index } => write!(
                f,
                "base parameter theta[{theta_index}] = 0: decay parameter is not identifiable"
            ),
        }
    }
}

/// Execution plan for incremental change statistics; consecutive `Esp`
/// coordinates collapse into one run so shared-partner work happens once.
#[derive(Clone, Debug, PartialEq)]
enum PlanStep {
    Edges(u32),
    DegreeCount(u32, u32),
    TwoPaths(u32),
    Triangles(u32),
    EspRun { coord0: u32, m_lo: u32, m_hi: u32 },
    NodeDegree(u32, u32),
    NodeMatch(u32, String),
    DyadValue(u32, DyadTable),
}

/// Reusable scratch space for sparse change-statistic evaluation. The
/// `pairs` buffer holds `(natural coordinate, delta)` entries; a coordinate
/// may appear more than once and contributions add.
#[derive(Debug, Default)]
pub struct ChangeScratch {
    pub pairs: Vec<(u32, f64)>,
    wset: Vec<u32>,
}

impl ChangeScratch {
    pub fn new() -> Self {
        Self::default()
    }
}

/// A fully instantiated model for graphs on `n` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    n: usize,
    terms: Vec<TermKind>,
    map: Vec<MapEntry>,
    p: usize,
    theta_names: Vec<String>,
    #[doc(hidden)]
    plan: Vec<PlanStep>,
}

impl ModelSpec {
    /// Builds and validates a spec from its parts. Every natural coordinate
    /// must be mapped by exactly one entry, every θ index `0..p` must be
    /// used, offsets must map offset terms, and no statistic may appear
    /// twice.
    pub fn from_parts(n: usize, terms: Vec<TermKind>, map: Vec<MapEntry>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("model needs at least one node".into()));
        }
        for t in &terms {
            t.validate(n)?;
        }
        for (a, ta) in terms.iter().enumerate() {
            if terms[a + 1..].contains(ta) {
                return Err(Error::Invalid(format!(
                    "statistic `{}` is mapped by more than one entry",
                    ta.name()
                )));
            }
        }

        let mapped: usize = map.iter().map(MapEntry::span).sum();
        if mapped != terms.len() {
            return Err(Error::DimensionMismatch(format!(
                "parameter map covers {mapped} natural coordinates, model has {}",
                terms.len()
            )));
        }

        let mut used = Vec::new();
        let mark = |idx: usize, used: &mut Vec<bool>| {
            if used.len() <= idx {
                used.resize(idx + 1, false);
            }
            used[idx] = true;
        };
        let mut coord = 0usize;
        for entry in &map {
            match entry {
                MapEntry::Linear { theta } => {
                    if matches!(terms[coord], TermKind::Offset(_)) {
                        return Err(Error::Invalid(
                            "offset statistics cannot carry an estimated parameter".into(),
                        ));
                    }
                    mark(*theta, &mut used);
                }
                MapEntry::FixedOffset => {
                    if !matches!(terms[coord], TermKind::Offset(_)) {
                        return Err(Error::Invalid(
                            "fixed-offset map entry must cover an offset statistic".into(),
                        ));
                    }
                }
                MapEntry::Gwesp {
                    base,
                    decay,
                    shifts,
                    m_count,
                } => {
                    if *m_count != n.saturating_sub(2) {
                        return Err(Error::TermOutOfRange(format!(
                            "geometrically weighted family must span m = 1..{} for n = {n}, got {m_count}",
                            n.saturating_sub(2)
                        )));
                    }
                    for m in 1..=*m_count {
                        if terms[coord + m - 1] != TermKind::Esp(m) {
                            return Err(Error::Invalid(format!(
                                "curved family coordinate {m} must be esp{m}, found `{}`",
                                terms[coord + m - 1].name()
                            )));
                        }
                    }
                    mark(*base, &mut used);
                    mark(*decay, &mut used);
                    if let Some((s1, s2)) = shifts {
                        if *m_count < 2 {
                            return Err(Error::TermOutOfRange(
                                "shifted family needs m range through 2".into(),
                            ));
                        }
                        mark(*s1, &mut used);
                        mark(*s2, &mut used);
                    }
                }
            }
            coord += entry.span();
        }
        let p = used.len();
        if let Some(gap) = used.iter().position(|u| !u) {
            return Err(Error::Invalid(format!("theta index {gap} is never mapped")));
        }

        let theta_names = derive_theta_names(&terms, &map, p);
        let plan = build_plan(&terms);
        Ok(ModelSpec {
            n,
            terms,
            map,
            p,
            theta_names,
            plan,
        })
    }

    pub fn builder(n: usize) -> ModelBuilder {
        ModelBuilder {
            n,
            terms: Vec::new(),
            map: Vec::new(),
            next_theta: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Curved dimension (length of θ).
    pub fn p(&self) -> usize {
        self.p
    }

    /// Natural dimension (length of η and of the statistic vector).
    pub fn q(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[TermKind] {
        &self.terms
    }

    pub fn map(&self) -> &[MapEntry] {
        &self.map
    }

    /// One display name per θ coordinate.
    pub fn theta_names(&self) -> &[String] {
        &self.theta_names
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "theta has length {}, model has p = {}",
                theta.len(),
                self.p
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("theta must be finite".into()));
        }
        Ok(())
    }

    /// The natural parameter vector η(θ).
    pub fn eta(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        self.eta_into(theta, &mut out)?;
        Ok(out)
    }

    pub fn eta_into(&self, theta: &[f64], out: &mut Vec<f64>) -> Result<()> {
        self.check_theta(theta)?;
        out.clear();
        out.reserve(self.q());
        for entry in &self.map {
            match entry {
                MapEntry::Linear { theta: t } => out.push(theta[*t]),
                MapEntry::FixedOffset => out.push(1.0),
                MapEntry::Gwesp {
                    base,
                    decay,
                    shifts,
                    m_count,
                } => {
                    let b = theta[*base];
                    let t = theta[*decay];
                    let factor = b * t.exp();
                    let u = 1.0 - (-t).exp();
                    let mut u_pow = 1.0;
                    for m in 1..=*m_count {
                        u_pow *= u;
                        let mut eta_m = factor * (1.0 - u_pow);
                        if let Some((s1, s2)) = shifts {
                            if m == 1 {
                                eta_m += theta[*s1];
                            } else if m == 2 {
                                eta_m += theta[*s2];
                            }
                        }
                        out.push(eta_m);
                    }
                }
            }
        }
        Ok(())
    }

    /// Exact analytic Jacobian ∂η/∂θ, a q × p matrix.
    pub fn eta_jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        let mut jac = DMatrix::zeros(self.q(), self.p);
        let mut coord = 0usize;
        for entry in &self.map {
            match entry {
                MapEntry::Linear { theta: t } => {
                    jac[(coord, *t)] = 1.0;
                    coord += 1;
                }
                MapEntry::FixedOffset => {
                    coord += 1;
                }
                MapEntry::Gwesp {
                    base,
                    decay,
                    shifts,
                    m_count,
                } => {
                    let b = theta[*base];
                    let t = theta[*decay];
                    let et = t.exp();
                    let u = 1.0 - (-t).exp();
                    let mut u_pow_prev = 1.0; // u^{m-1}
                    for m in 1..=*m_count {
                        let u_pow = u_pow_prev * u;
                        jac[(coord, *base)] = et * (1.0 - u_pow);
                        jac[(coord, *decay)] = b * (et * (1.0 - u_pow) - m as f64 * u_pow_prev);
                        if let Some((s1, s2)) = shifts {
                            if m == 1 {
                                jac[(coord, *s1)] = 1.0;
                            } else if m == 2 {
                                jac[(coord, *s2)] = 1.0;
                            }
                        }
                        u_pow_prev = u_pow;
                        coord += 1;
                    }
                }
            }
        }
        Ok(jac)
    }

    /// Inner product ⟨η(θ), s(x, y)⟩ including offset coordinates; equals
    /// the log-density up to the log-normalizer.
    pub fn log_weight(&self, theta: &[f64], g: &Graph, attrs: &NodeAttributes) -> Result<f64> {
        self.validate_inputs(g, attrs)?;
        let eta = self.eta(theta)?;
        let s = self.stat_vector(g, attrs)?;
        Ok(eta.iter().zip(&s).map(|(e, v)| e * v).sum())
    }

    /// Full statistic vector in natural-coordinate order.
    pub fn stat_vector(&self, g: &Graph, attrs: &NodeAttributes) -> Result<Vec<f64>> {
        self.validate_inputs(g, attrs)?;
        terms::stat_vector(&self.terms, g, attrs)
    }

    /// Checks graph size and attribute availability once, so the hot
    /// change-statistic path can skip per-call validation.
    pub fn validate_inputs(&self, g: &Graph, attrs: &NodeAttributes) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "graph has n = {}, model instantiated for n = {}",
                g.n(),
                self.n
            )));
        }
        for t in &self.terms {
            if let TermKind::NodeMatch(a) = t {
                let col = attrs.categorical(a)?;
                if col.len() != self.n {
                    return Err(Error::DimensionMismatch(format!(
                        "attribute `{a}` has {} values for n = {}",
                        col.len(),
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sparse change statistic `s(dyad on) − s(dyad off)` as
    /// `(coordinate, delta)` pairs in `scratch.pairs`. Inputs must have been
    /// checked with [`ModelSpec::validate_inputs`].
    pub fn change_sparse(
        &self,
        g: &Graph,
        attrs: &NodeAttributes,
        d: Dyad,
        scratch: &mut ChangeScratch,
    ) {
        scratch.pairs.clear();
        scratch.wset.clear();
        let mut wset_ready = false;
        let y = g.has_edge(d) as usize;
        let (i, j) = (d.i(), d.j());
        let di0 = g.degree(i) - y;
        let dj0 = g.degree(j) - y;

        for step in &self.plan {
            match step {
                PlanStep::Edges(c) => scratch.pairs.push((*c, 1.0)),
                PlanStep::DegreeCount(c, k) => {
                    let k = *k as usize;
                    let delta = (di0 + 1 == k) as i64 - (di0 == k) as i64 + (dj0 + 1 == k) as i64
                        - (dj0 == k) as i64;
                    if delta != 0 {
                        scratch.pairs.push((*c, delta as f64));
                    }
                }
                PlanStep::TwoPaths(c) => {
                    if di0 + dj0 > 0 {
                        scratch.pairs.push((*c, (di0 + dj0) as f64));
                    }
                }
                PlanStep::Triangles(c) => {
                    if !wset_ready {
                        g.common_neighbors_into(i, j, &mut scratch.wset);
                        wset_ready = true;
                    }
                    if !scratch.wset.is_empty() {
                        scratch.pairs.push((*c, scratch.wset.len() as f64));
                    }
                }
                PlanStep::EspRun { coord0, m_lo, m_hi } => {
                    if !wset_ready {
                        g.common_neighbors_into(i, j, &mut scratch.wset);
                        wset_ready = true;
                    }
                    let (lo, hi) = (*m_lo as usize, *m_hi as usize);
                    let pairs = &mut scratch.pairs;
                    terms::esp_bin_changes(g, d, &scratch.wset, |bin, delta| {
                        if bin >= lo && bin <= hi {
                            pairs.push((coord0 + (bin - lo) as u32, delta));
                        }
                    });
                }
                PlanStep::NodeDegree(c, v) => {
                    if *v as usize == i || *v as usize == j {
                        scratch.pairs.push((*c, 1.0));
                    }
                }
                PlanStep::NodeMatch(c, attr) => {
                    let col = attrs.categorical(attr).expect("validated attribute");
                    if col[i] == col[j] {
                        scratch.pairs.push((*c, 1.0));
                    }
                }
                PlanStep::DyadValue(c, table) => {
                    let v = table.get(d.index());
                    if v != 0.0 {
                        scratch.pairs.push((*c, v));
                    }
                }
            }
        }
    }

    /// Dense counterpart of [`ModelSpec::change_sparse`].
    pub fn change_dense(
        &self,
        g: &Graph,
        attrs: &NodeAttributes,
        d: Dyad,
        scratch: &mut ChangeScratch,
        out: &mut [f64],
    ) {
        debug_assert_eq!(out.len(), self.q());
        out.iter_mut().for_each(|v| *v = 0.0);
        self.change_sparse(g, attrs, d, scratch);
        for &(c, v) in &scratch.pairs {
            out[c as usize] += v;
        }
    }

    /// Diagnostics on θ: negative or strongly negative decay parameters and
    /// zero base parameters in geometrically weighted families.
    pub fn validate_theta(&self, theta: &[f64]) -> Result<Vec<ThetaWarning>> {
        self.check_theta(theta)?;
        let mut warnings = Vec::new();
        for entry in &self.map {
            if let MapEntry::Gwesp { base, decay, .. } = entry {
                let t = theta[*decay];
                if t < -(2f64.ln()) {
                    warnings.push(ThetaWarning::DecayNearDegenerate {
                        theta_index: *decay,
                        value: t,
                    });
                } else if t < 0.0 {
                    warnings.push(ThetaWarning::DecayNegative {
                        theta_index: *decay,
                        value: t,
                    });
                }
                if theta[*base] == 0.0 {
                    warnings.push(ThetaWarning::BaseZero { theta_index: *base });
                }
            }
        }
        Ok(warnings)
    }
}

fn derive_theta_names(terms: &[TermKind], map: &[MapEntry], p: usize) -> Vec<String> {
    let mut names = vec![String::new(); p];
    let mut coord = 0usize;
    let set = |idx: usize, name: String, names: &mut Vec<String>| {
        if names[idx].is_empty() {
            names[idx] = name;
        }
    };
    for entry in map {
        match entry {
            MapEntry::Linear { theta } => set(*theta, terms[coord].name(), &mut names),
            MapEntry::FixedOffset => {}
            MapEntry::Gwesp {
                base,
                decay,
                shifts,
                ..
            } => {
                set(*base, "gwesp_base".into(), &mut names);
                set(*decay, "gwesp_decay".into(), &mut names);
                if let Some((s1, s2)) = shifts {
                    set(*s1, "gwesp_shift1".into(), &mut names);
                    set(*s2, "gwesp_shift2".into(), &mut names);
                }
            }
        }
        coord += entry.span();
    }
    for (i, n) in names.iter_mut().enumerate() {
        if n.is_empty() {
            *n = format!("theta{i}");
        }
    }
    names
}

fn build_plan(terms: &[TermKind]) -> Vec<PlanStep> {
    let mut plan = Vec::new();
    let mut coord = 0u32;
    let mut idx = 0usize;
    while idx < terms.len() {
        match &terms[idx] {
            TermKind::Edges => plan.push(PlanStep::Edges(coord)),
            TermKind::DegreeCount(k) => plan.push(PlanStep::DegreeCount(coord, *k as u32)),
            TermKind::TwoPaths => plan.push(PlanStep::TwoPaths(coord)),
            TermKind::Triangles => plan.push(PlanStep::Triangles(coord)),
            TermKind::NodeDegree(v) => plan.push(PlanStep::NodeDegree(coord, *v as u32)),
            TermKind::NodeMatch(a) => plan.push(PlanStep::NodeMatch(coord, a.clone())),
            TermKind::DyadCovariate(t) | TermKind::Offset(t) => {
                plan.push(PlanStep::DyadValue(coord, t.clone()))
            }
            TermKind::Esp(m0) => {
                // merge a maximal run of consecutive esp bins
                let mut m_hi = *m0;
                let mut run = 1usize;
                while idx + run < terms.len() && terms[idx + run] == TermKind::Esp(m_hi + 1) {
                    m_hi += 1;
                    run += 1;
                }
                plan.push(PlanStep::EspRun {
                    coord0: coord,
                    m_lo: *m0 as u32,
                    m_hi: m_hi as u32,
                });
                coord += run as u32;
                idx += run;
                continue;
            }
        }
        coord += 1;
        idx += 1;
    }
    plan
}

/// Incremental builder; θ indices are assigned in declaration order unless
/// given explicitly.
pub struct ModelBuilder {
    n: usize,
    terms: Vec<TermKind>,
    map: Vec<MapEntry>,
    next_theta: usize,
}

impl ModelBuilder {
    pub fn term(mut self, t: TermKind) -> Self {
        self.terms.push(t);
        self.map.push(MapEntry::Linear {
            theta: self.next_theta,
        });
        self.next_theta += 1;
        self
    }

    pub fn term_with_theta(mut self, t: TermKind, theta: usize) -> Self {
        self.terms.push(t);
        self.map.push(MapEntry::Linear { theta });
        self.next_theta = self.next_theta.max(theta + 1);
        self
    }

    /// Geometrically weighted shared-partner family over `m = 1..n-2`.
    pub fn gwesp(self) -> Self {
        self.gwesp_opts(false, None)
    }

    /// Shifted variant: two extra parameters added to the m = 1 and m = 2
    /// natural coordinates.
    pub fn gwesp_shifted(self) -> Self {
        self.gwesp_opts(true, None)
    }

    pub fn gwesp_with_indices(
        self,
        base: usize,
        decay: usize,
        shifts: Option<(usize, usize)>,
    ) -> Self {
        self.gwesp_opts(shifts.is_some(), Some((base, decay, shifts)))
    }

    fn gwesp_opts(
        mut self,
        shifted: bool,
        indices: Option<(usize, usize, Option<(usize, usize)>)>,
    ) -> Self {
        let m_count = self.n.saturating_sub(2);
        for m in 1..=m_count {
            self.terms.push(TermKind::Esp(m));
        }
        let (base, decay, shifts) = match indices {
            Some((b, d, s)) => (b, d, s),
            None => {
                if shifted {
                    let s1 = self.next_theta;
                    let s2 = s1 + 1;
                    let b = s1 + 2;
                    let d = s1 + 3;
                    (b, d, Some((s1, s2)))
                } else {
                    (self.next_theta, self.next_theta + 1, None)
                }
            }
        };
        let mut max = base.max(decay);
        if let Some((s1, s2)) = shifts {
            max = max.max(s1).max(s2);
        }
        self.next_theta = self.next_theta.max(max + 1);
        self.map.push(MapEntry::Gwesp {
            base,
            decay,
            shifts,
            m_count,
        });
        self
    }

    /// Fixed per-dyad offset with the given coefficient table.
    pub fn offset(mut self, table: DyadTable) -> Self {
        self.terms.push(TermKind::Offset(table));
        self.map.push(MapEntry::FixedOffset);
        self
    }

    /// Sparse reference measure: coefficient `−log n` on every dyad.
    pub fn offset_sparse(self) -> Self {
        let n = self.n;
        self.offset(DyadTable::constant(n, -(n as f64).ln()))
    }

    pub fn build(self) -> Result<ModelSpec> {
        ModelSpec::from_parts(self.n, self.terms, self.map)
    }
}
