//! Text formats: graphs, observation masks, node attributes, model
//! configurations, θ grids, and fit reports. All functions are pure
//! string/object conversions; file handling lives in the command-line
//! layer. Node indices are 1-based in every format.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::estimate::FitResult;
use crate::graph::{Dyad, Graph, NodeAttributes};
use crate::missing::ObservationMask;
use crate::model::{ModelSpec, ModelBuilder};
use crate::terms::{DyadTable, TermKind};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn sections(text: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    for line in text.lines() {
        if line.trim() == "---" {
            out.push(String::new());
        } else {
            let cur = out.last_mut().unwrap();
            cur.push_str(line);
            cur.push('\n');
        }
    }
    out
}

// ---------------------------------------------------------------------------
// graphs

/// Parses the graph text format: comment lines start with `#`, the first
/// content line is `n <N>`, and each following line `"<i> <j>"` is an edge
/// with 1-based endpoints (duplicates allowed).
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (lineno, line) in content_lines(text) {
        let mut tok = line.split_whitespace();
        match n {
            None => {
                if tok.next() != Some("n") {
                    return Err(Error::Parse(format!(
                        "line {lineno}: expected `n <N>` header, got `{line}`"
                    )));
                }
                let v: usize = tok
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("line {lineno}: bad node count")))?;
                n = Some(v);
            }
            Some(nv) => {
                let a: usize = tok
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("line {lineno}: bad edge line `{line}`")))?;
                let b: usize = tok
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("line {lineno}: bad edge line `{line}`")))?;
                if a == 0 || b == 0 || a > nv || b > nv {
                    return Err(Error::Parse(format!(
                        "line {lineno}: endpoint outside 1..={nv}"
                    )));
                }
                edges.push((a - 1, b - 1));
            }
        }
        if tok.next().is_some() {
            return Err(Error::Parse(format!("line {lineno}: trailing tokens in `{line}`")));
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing `n <N>` header".into()))?;
    Graph::from_edges(n, edges)
}

/// Parses a multi-network file: networks separated by `---` lines.
pub fn parse_graphs(text: &str) -> Result<Vec<Graph>> {
    let secs = sections(text);
    let mut out = Vec::new();
    for sec in &secs {
        if content_lines(sec).next().is_none() {
            continue;
        }
        out.push(parse_graph(sec)?);
    }
    if out.is_empty() {
        return Err(Error::Parse("no networks in input".into()));
    }
    Ok(out)
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    for d in g.edges() {
        out.push_str(&format!("{} {}\n", d.i() + 1, d.j() + 1));
    }
    out
}

pub fn write_graphs(graphs: &[Graph]) -> String {
    graphs
        .iter()
        .map(write_graph)
        .collect::<Vec<_>>()
        .join("---\n")
}

// ---------------------------------------------------------------------------
// masks

/// Parses a mask section: each content line is one UNOBSERVED dyad
/// `"<i> <j>"` (1-based); absent dyads are observed.
pub fn parse_mask(text: &str, n: usize) -> Result<ObservationMask> {
    let mut mask = ObservationMask::full(n);
    for (lineno, line) in content_lines(text) {
        let mut tok = line.split_whitespace();
        let a: usize = tok
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse(format!("line {lineno}: bad dyad line `{line}`")))?;
        let b: usize = tok
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse(format!("line {lineno}: bad dyad line `{line}`")))?;
        if tok.next().is_some() {
            return Err(Error::Parse(format!("line {lineno}: trailing tokens")));
        }
        if a == 0 || b == 0 || a > n || b > n {
            return Err(Error::Parse(format!("line {lineno}: endpoint outside 1..={n}")));
        }
        mask.set_observed(Dyad::new(a - 1, b - 1)?, false);
    }
    Ok(mask)
}

/// Parses masks for several networks (sections split by `---`), one per
/// network size in `sizes`.
pub fn parse_masks(text: &str, sizes: &[usize]) -> Result<Vec<ObservationMask>> {
    let secs: Vec<String> = sections(text);
    // trailing empty section from a trailing separator is tolerated
    let mut secs: Vec<String> = secs;
    while secs.len() > sizes.len()
        && secs
            .last()
            .map(|s| content_lines(s).next().is_none())
            .unwrap_or(false)
    {
        secs.pop();
    }
    if secs.len() != sizes.len() {
        return Err(Error::Parse(format!(
            "mask file has {} sections for {} networks",
            secs.len(),
            sizes.len()
        )));
    }
    secs.iter()
        .zip(sizes)
        .map(|(sec, &n)| parse_mask(sec, n))
        .collect()
}

pub fn write_mask(mask: &ObservationMask) -> String {
    let mut out = String::new();
    for d in mask.unobserved_dyads() {
        out.push_str(&format!("{} {}\n", d.i() + 1, d.j() + 1));
    }
    out
}

pub fn write_masks(masks: &[ObservationMask]) -> String {
    masks
        .iter()
        .map(write_mask)
        .collect::<Vec<_>>()
        .join("---\n")
}

// ---------------------------------------------------------------------------
// node attributes

/// Parses a node attribute table: a header of attribute names, then one row
/// per node in 1-based node order. A column whose every entry parses as a
/// real number becomes numeric; anything else is categorical.
pub fn parse_attributes(text: &str, n: usize) -> Result<NodeAttributes> {
    let mut lines = content_lines(text);
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("attribute file is empty".into()))?;
    let names: Vec<&str> = header.split_whitespace().collect();
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for (lineno, line) in lines {
        let row: Vec<&str> = line.split_whitespace().collect();
        if row.len() != names.len() {
            return Err(Error::Parse(format!(
                "line {lineno}: {} fields for {} attributes",
                row.len(),
                names.len()
            )));
        }
        for (c, v) in row.iter().enumerate() {
            columns[c].push(v.to_string());
        }
    }
    if columns.first().map_or(0, |c| c.len()) != n {
        return Err(Error::Parse(format!(
            "attribute file has {} rows for {n} nodes",
            columns.first().map_or(0, |c| c.len())
        )));
    }
    let mut attrs = NodeAttributes::new(n);
    for (name, col) in names.iter().zip(columns) {
        let numeric: Option<Vec<f64>> = col.iter().map(|v| v.parse::<f64>().ok()).collect();
        match numeric {
            Some(vals) => attrs.insert_numeric(name, vals)?,
            None => attrs.insert_categorical(name, col)?,
        }
    }
    Ok(attrs)
}

pub fn write_attributes(attrs: &NodeAttributes) -> String {
    let cat: Vec<&str> = attrs.categorical_names().collect();
    let num: Vec<&str> = attrs.numeric_names().collect();
    let mut out = String::new();
    out.push_str(
        &cat.iter()
            .chain(num.iter())
            .copied()
            .collect::<Vec<_>>()
            .join("\t"),
    );
    out.push('\n');
    for i in 0..attrs.n() {
        let mut row = Vec::new();
        for name in &cat {
            row.push(attrs.categorical(name).unwrap()[i].clone());
        }
        for name in &num {
            row.push(attrs.numeric(name).unwrap()[i].to_string());
        }
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// model configuration

/// One declaration line of a model configuration, with θ indices resolved.
#[derive(Clone, Debug, PartialEq)]
pub enum ConfigEntry {
    Term { kind: ConfigTerm, theta: usize },
    Gwesp {
        base: usize,
        decay: usize,
        shifts: Option<(usize, usize)>,
    },
    OffsetSparse,
}

/// Term kinds expressible in configuration files (instantiated per network
/// size and attribute table at load).
#[derive(Clone, Debug, PartialEq)]
pub enum ConfigTerm {
    Edges,
    Degree(usize),
    TwoPaths,
    Triangles,
    Esp(usize),
    /// 0-based internally; 1-based in the file.
    NodeDegree(usize),
    NodeMatch(String),
    /// Euclidean distance between the named numeric attribute columns.
    DistCov(Vec<String>),
}

impl ConfigTerm {
    fn write(&self) -> String {
        match self {
            ConfigTerm::Edges => "term edges".into(),
            ConfigTerm::Degree(k) => format!("term degree k={k}"),
            ConfigTerm::TwoPaths => "term twopaths".into(),
            ConfigTerm::Triangles => "term triangles".into(),
            ConfigTerm::Esp(m) => format!("term esp m={m}"),
            ConfigTerm::NodeDegree(i) => format!("term nodedegree i={}", i + 1),
            ConfigTerm::NodeMatch(a) => format!("term nodematch attr={a}"),
            ConfigTerm::DistCov(attrs) => format!("term distcov attrs={}", attrs.join(",")),
        }
    }
}

/// A validated model factory: declaration order plus the parameter map,
/// instantiated per network size (and attribute table) at load time.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    entries: Vec<ConfigEntry>,
    p: usize,
}

impl ModelConfig {
    pub fn entries(&self) -> &[ConfigEntry] {
        &self.entries
    }

    /// Curved parameter count.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Builds the spec for a graph on `n` nodes. Attribute-dependent terms
    /// resolve their columns here.
    pub fn instantiate(&self, n: usize, attrs: &NodeAttributes) -> Result<ModelSpec> {
        let mut b: ModelBuilder = ModelSpec::builder(n);
        for entry in &self.entries {
            b = match entry {
                ConfigEntry::Term { kind, theta } => {
                    let t = match kind {
                        ConfigTerm::Edges => TermKind::Edges,
                        ConfigTerm::Degree(k) => TermKind::DegreeCount(*k),
                        ConfigTerm::TwoPaths => TermKind::TwoPaths,
                        ConfigTerm::Triangles => TermKind::Triangles,
                        ConfigTerm::Esp(m) => TermKind::Esp(*m),
                        ConfigTerm::NodeDegree(i) => TermKind::NodeDegree(*i),
                        ConfigTerm::NodeMatch(a) => TermKind::NodeMatch(a.clone()),
                        ConfigTerm::DistCov(cols) => {
                            let mut columns = Vec::with_capacity(cols.len());
                            for c in cols {
                                let col = attrs.numeric(c)?;
                                if col.len() != n {
                                    return Err(Error::DimensionMismatch(format!(
                                        "attribute `{c}` has {} values for n = {n}",
                                        col.len()
                                    )));
                                }
                                columns.push(col);
                            }
                            TermKind::DyadCovariate(DyadTable::from_fn(n, |i, j| {
                                columns
                                    .iter()
                                    .map(|c| (c[i] - c[j]).powi(2))
                                    .sum::<f64>()
                                    .sqrt()
                            }))
                        }
                    };
                    b.term_with_theta(t, *theta)
                }
                ConfigEntry::Gwesp { base, decay, shifts } => {
                    b.gwesp_with_indices(*base, *decay, *shifts)
                }
                ConfigEntry::OffsetSparse => b.offset_sparse(),
            };
        }
        b.build()
    }

    /// Canonical one-line-per-entry text; parsing it back reproduces the
    /// configuration exactly.
    pub fn write(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            match entry {
                ConfigEntry::Term { kind, theta } => {
                    out.push_str(&format!("{} theta={theta}\n", kind.write()))
                }
                ConfigEntry::Gwesp { base, decay, shifts } => match shifts {
                    None => out.push_str(&format!("gwesp base={base} decay={decay}\n")),
                    Some((s1, s2)) => out.push_str(&format!(
                        "gwesp base={base} decay={decay} shift1={s1} shift2={s2}\n"
                    )),
                },
                ConfigEntry::OffsetSparse => out.push_str("offset sparse\n"),
            }
        }
        out
    }
}

fn parse_kv(tokens: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for t in tokens {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{t}`")))?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Parse(format!("duplicate key `{k}`")));
        }
    }
    Ok(map)
}

fn take_usize(map: &mut BTreeMap<String, String>, key: &str) -> Result<Option<usize>> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("bad integer for `{key}`: {v}"))),
    }
}

fn reject_leftover(map: &BTreeMap<String, String>, ctx: &str) -> Result<()> {
    if let Some(k) = map.keys().next() {
        return Err(Error::Parse(format!("unknown argument `{k}` for {ctx}")));
    }
    Ok(())
}

/// Parses a model configuration. Lines declare terms in order; θ indices
/// default to declaration order and may be pinned with `theta=` (linear
/// terms) or `base=/decay=/shift1=/shift2=` (curved families). The
/// `brain13` preset expands to edges, degree 0..6 counts, two-paths, and a
/// shifted geometrically weighted shared-partner family (13 parameters).
pub fn parse_model_config(text: &str) -> Result<ModelConfig> {
    let mut entries = Vec::new();
    let mut next_theta = 0usize;
    for (lineno, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: String| Error::Parse(format!("line {lineno}: {msg}"));
        match toks[0] {
            "term" => {
                if toks.len() < 2 {
                    return Err(err("missing term kind".into()));
                }
                let mut kv = parse_kv(&toks[2..])?;
                let theta = take_usize(&mut kv, "theta")?;
                let kind = match toks[1] {
                    "edges" => ConfigTerm::Edges,
                    "twopaths" => ConfigTerm::TwoPaths,
                    "triangles" => ConfigTerm::Triangles,
                    "degree" => ConfigTerm::Degree(
                        take_usize(&mut kv, "k")?.ok_or_else(|| err("degree needs k=".into()))?,
                    ),
                    "esp" => ConfigTerm::Esp(
                        take_usize(&mut kv, "m")?.ok_or_else(|| err("esp needs m=".into()))?,
                    ),
                    "nodedegree" => {
                        let i = take_usize(&mut kv, "i")?
                            .ok_or_else(|| err("nodedegree needs i=".into()))?;
                        if i == 0 {
                            return Err(err("node indices are 1-based".into()));
                        }
                        ConfigTerm::NodeDegree(i - 1)
                    }
                    "nodematch" => ConfigTerm::NodeMatch(
                        kv.remove("attr").ok_or_else(|| err("nodematch needs attr=".into()))?,
                    ),
                    "distcov" => ConfigTerm::DistCov(
                        kv.remove("attrs")
                            .ok_or_else(|| err("distcov needs attrs=".into()))?
                            .split(',')
                            .map(|s| s.to_string())
                            .collect(),
                    ),
                    other => return Err(err(format!("unknown term `{other}`"))),
                };
                reject_leftover(&kv, toks[1])?;
                let theta = theta.unwrap_or(next_theta);
                next_theta = next_theta.max(theta + 1);
                entries.push(ConfigEntry::Term { kind, theta });
            }
            "gwesp" => {
                let mut shifted = false;
                let mut args = Vec::new();
                for t in &toks[1..] {
                    if *t == "shifted" {
                        shifted = true;
                    } else {
                        args.push(*t);
                    }
                }
                let mut kv = parse_kv(&args)?;
                let base = take_usize(&mut kv, "base")?;
                let decay = take_usize(&mut kv, "decay")?;
                let s1 = take_usize(&mut kv, "shift1")?;
                let s2 = take_usize(&mut kv, "shift2")?;
                reject_leftover(&kv, "gwesp")?;
                if s1.is_some() != s2.is_some() {
                    return Err(err("shift1 and shift2 must be given together".into()));
                }
                let shifted = shifted || s1.is_some();
                let (shifts, base, decay) = if shifted {
                    let s1 = s1.unwrap_or(next_theta);
                    let s2 = s2.unwrap_or(s1 + 1);
                    let b = base.unwrap_or(s2 + 1);
                    let d = decay.unwrap_or(b + 1);
                    (Some((s1, s2)), b, d)
                } else {
                    let b = base.unwrap_or(next_theta);
                    let d = decay.unwrap_or(b + 1);
                    (None, b, d)
                };
                let mut max = base.max(decay);
                if let Some((a, b)) = shifts {
                    max = max.max(a).max(b);
                }
                next_theta = next_theta.max(max + 1);
                entries.push(ConfigEntry::Gwesp { base, decay, shifts });
            }
            "offset" => {
                if toks.get(1) != Some(&"sparse") {
                    return Err(err("only `offset sparse` is supported".into()));
                }
                entries.push(ConfigEntry::OffsetSparse);
            }
            "preset" => match toks.get(1) {
                Some(&"brain13") => {
                    entries.push(ConfigEntry::Term {
                        kind: ConfigTerm::Edges,
                        theta: next_theta,
                    });
                    for k in 0..=6 {
                        entries.push(ConfigEntry::Term {
                            kind: ConfigTerm::Degree(k),
                            theta: next_theta + 1 + k,
                        });
                    }
                    entries.push(ConfigEntry::Term {
                        kind: ConfigTerm::TwoPaths,
                        theta: next_theta + 8,
                    });
                    entries.push(ConfigEntry::Gwesp {
                        base: next_theta + 11,
                        decay: next_theta + 12,
                        shifts: Some((next_theta + 9, next_theta + 10)),
                    });
                    next_theta += 13;
                }
                other => {
                    return Err(err(format!("unknown preset `{}`", other.unwrap_or(&""))));
                }
            },
            other => return Err(err(format!("unknown declaration `{other}`"))),
        }
    }
    if entries.is_empty() {
        return Err(Error::Parse("model configuration is empty".into()));
    }
    // θ-index gaps are configuration errors regardless of network size
    let mut used = vec![false; next_theta];
    for e in &entries {
        match e {
            ConfigEntry::Term { theta, .. } => used[*theta] = true,
            ConfigEntry::Gwesp { base, decay, shifts } => {
                used[*base] = true;
                used[*decay] = true;
                if let Some((a, b)) = shifts {
                    used[*a] = true;
                    used[*b] = true;
                }
            }
            ConfigEntry::OffsetSparse => {}
        }
    }
    if let Some(gap) = used.iter().position(|u| !u) {
        return Err(Error::Parse(format!("theta index {gap} is never mapped")));
    }
    Ok(ModelConfig {
        entries,
        p: next_theta,
    })
}

// ---------------------------------------------------------------------------
// θ vectors and grids

pub fn parse_theta(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{t}` in theta")))
        })
        .collect()
}

pub fn write_theta(theta: &[f64]) -> String {
    theta
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// One θ vector per content line, comma- or whitespace-separated.
pub fn parse_grid(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (lineno, line) in content_lines(text) {
        let row: Result<Vec<f64>> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {lineno}: bad number `{t}`")))
            })
            .collect();
        out.push(row?);
    }
    if out.is_empty() {
        return Err(Error::Parse("grid file is empty".into()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// fit reports

/// A fit report read back from disk.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitReport {
    pub keys: BTreeMap<String, String>,
    pub notes: Vec<String>,
    /// (name, estimate, standard error) rows.
    pub params: Vec<(String, f64, f64)>,
}

impl FitReport {
    pub fn theta_hat(&self) -> Result<Vec<f64>> {
        parse_theta(
            self.keys
                .get("theta_hat")
                .ok_or_else(|| Error::Parse("report lacks theta_hat".into()))?,
        )
    }

    pub fn seed(&self) -> Result<u64> {
        self.keys
            .get("seed")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse("report lacks seed".into()))
    }

    pub fn model(&self) -> Result<ModelConfig> {
        let line = self
            .keys
            .get("model")
            .ok_or_else(|| Error::Parse("report lacks model".into()))?;
        parse_model_config(&line.replace("; ", "\n"))
    }
}

/// Writes the fit report: `key<TAB>value` lines, a blank line, then the
/// tab-separated parameter table.
pub fn write_fit_report(fit: &FitResult, model: &ModelConfig, networks: usize) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push('\t');
        out.push_str(&v);
        out.push('\n');
    };
    kv("command", "fit".into());
    kv("method", fit.method.as_str().into());
    kv("seed", fit.seed.to_string());
    kv("networks", networks.to_string());
    kv(
        "model",
        model.write().trim_end().replace('\n', "; "),
    );
    kv("theta_hat", write_theta(&fit.theta_hat));
    kv("std_errors", write_theta(&fit.std_errors));
    kv("converged", fit.diagnostics.converged.to_string());
    kv("iterations", fit.diagnostics.iterations.to_string());
    kv("final_grad_norm", fit.diagnostics.final_grad_norm.to_string());
    kv("ess", fit.diagnostics.ess.to_string());
    if let Some(cfg) = &fit.config {
        kv("burnin", cfg.burnin.to_string());
        kv("interval", cfg.interval.to_string());
        kv("draws", cfg.draws.to_string());
    }
    for note in &fit.notes {
        kv("note", note.clone());
    }
    out.push('\n');
    out.push_str("param\testimate\tstd_error\n");
    for (i, name) in fit.param_names.iter().enumerate() {
        out.push_str(&format!(
            "{name}\t{}\t{}\n",
            fit.theta_hat[i], fit.std_errors[i]
        ));
    }
    out
}

pub fn parse_fit_report(text: &str) -> Result<FitReport> {
    let mut report = FitReport::default();
    let mut in_table = false;
    for line in text.lines() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("param\t") {
            in_table = true;
            continue;
        }
        let mut parts = line.split('\t');
        if in_table {
            let name = parts.next().unwrap_or_default().to_string();
            let est: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad parameter row `{line}`")))?;
            let se: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad parameter row `{line}`")))?;
            report.params.push((name, est, se));
        } else {
            let k = parts.next().unwrap_or_default();
            let v = parts.collect::<Vec<_>>().join("\t");
            if k == "note" {
                report.notes.push(v);
            } else {
                report.keys.insert(k.to_string(), v);
            }
        }
    }
    if report.keys.is_empty() {
        return Err(Error::Parse("empty fit report".into()));
    }
    Ok(report)
}

/// Builds per-network specs plus shared attributes for a parsed dataset.
pub fn instantiate_for_graphs(
    config: &ModelConfig,
    graphs: &[Graph],
    attrs: &Arc<NodeAttributes>,
) -> Result<Vec<Arc<ModelSpec>>> {
    let mut by_n: BTreeMap<usize, Arc<ModelSpec>> = BTreeMap::new();
    let mut out = Vec::with_capacity(graphs.len());
    for g in graphs {
        let spec = match by_n.get(&g.n()) {
            Some(s) => s.clone(),
            None => {
                let s = Arc::new(config.instantiate(g.n(), attrs)?);
                by_n.insert(g.n(), s.clone());
                s
            }
        };
        out.push(spec);
    }
    Ok(out)
}
