// scratch probe (not committed)
use std::sync::Arc;
use ergm::estimate::{self, NetworkData, OptSettings};
use ergm::exact;
use ergm::graph::{Graph, NodeAttributes};
use ergm::model::ModelSpec;
use ergm::sampler::McmcConfig;
use ergm::terms::TermKind;

fn main() {
    let attrs = Arc::new(NodeAttributes::new(6));
    let spec = Arc::new(ModelSpec::builder(6).term(TermKind::Edges).term(TermKind::Triangles).build().unwrap());
    let theta_gen = vec![-1.0, 0.3];
    let graphs = exact::exact_sample(&spec, &attrs, &theta_gen, 1, 1000).unwrap();
    // rebuild the seed-6 data deterministically
    let g = exact::exact_sample(&spec, &attrs, &theta_gen, 1, 400 + 600).unwrap().remove(0);
    println!("data stats {:?}", spec.stat_vector(&g, &attrs).unwrap());
    let _ = graphs;
    let data = NetworkData::pooled(spec.clone(), attrs.clone(), vec![g]).unwrap();
    let mut cfg = McmcConfig::for_nodes(6, 9006).with_draws(12_000);
    cfg.burnin = 3000;
    let opt = OptSettings { score_mult: 2.0, ..OptSettings::default() };
    for (label, t0) in [("exactish", Some(vec![-1.43, 0.95])), ("zeros", Some(vec![0.0, 0.0]))] {
        match estimate::mcmle(&data, t0.as_deref(), &cfg, &opt) {
            Ok(fit) => println!("{label}: {:?} conv {} iters {} notes {:?}", fit.theta_hat, fit.diagnostics.converged, fit.diagnostics.iterations, fit.notes),
            Err(e) => println!("{label}: err {e}"),
        }
    }
    // what does the ridge initializer produce? (reconstruct by hand with a tiny ridge fit)
    let graph = Graph::from_edges(6, []).unwrap();
    let _ = graph;
}
