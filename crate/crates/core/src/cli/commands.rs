use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use indexmap::IndexSet;

use crate::cms::SketchParams;
use crate::graph::{
    build_weights, conductance, max_conductance, read_records, ConductanceWeights, Graph, LabelDist, SeedSet, WeightMode,
};
use crate::metrics::{mrr, size_sketch, skew_report, write_ranks_csv, write_skew_csv, Aggregation, SizingRegime, SizingSpec};
use crate::par::{with_threads, Parallelism};
use crate::solver::{run, Backend, LabelState, Method, RunReport, SolverConfig};
use crate::synth::{gen_community, gen_ksparse, gen_zipf, CommunitySpec, KSparseSpec, ZipfSpec};

use super::input::open;
use super::*;

/// Runs one parsed command. Results go to `out`; the propagation report
/// goes to `diag` unless a report path is given.
pub fn execute(cli: Cli, out: &mut dyn Write, diag: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Propagate(a) => cmd_propagate(&a, out, diag),
        Command::Size(a) => cmd_size(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Skew(a) => cmd_skew(&a, out),
        Command::Conductance(a) => cmd_conductance(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("{}", path.display()))?))
}

fn solver_config(a: &SolverArgs) -> Result<SolverConfig> {
    if a.threads == 0 {
        bail!("--threads must be >= 1");
    }
    let weight_mode = match a.weights {
        WeightsArg::Entropy => WeightMode::Entropy { beta: a.beta },
        WeightsArg::Uniform => WeightMode::Uniform,
    };
    Ok(SolverConfig {
        mu1: a.mu1,
        mu2: a.mu2,
        mu3: a.mu3,
        iterations: a.iters,
        convergence_delta: a.convergence_delta,
        backend: Backend::Exact,
        method: match a.method {
            MethodArg::Mad => Method::Mad,
            MethodArg::Harmonic => Method::Harmonic,
        },
        weight_mode,
        prune_threshold: a.prune_threshold,
        parallelism: if a.threads > 1 { Parallelism::Parallel } else { Parallelism::Sequential },
        assert_guarantee: false,
    })
}

fn regime(kind: RegimeArg, k: u32, z: Option<f64>, psi: Option<f64>) -> Result<SizingRegime> {
    Ok(match kind {
        RegimeArg::Sparse => SizingRegime::Sparse { k },
        RegimeArg::Zipf => SizingRegime::Zipf { z: z.ok_or_else(|| anyhow!("zipf sizing needs --z"))? },
        RegimeArg::Community => {
            SizingRegime::Community { psi: psi.ok_or_else(|| anyhow!("community sizing needs --psi"))? }
        }
    })
}

fn sketch_params(a: &SketchArgs, labels: usize) -> Result<SketchParams> {
    match (a.width, a.depth, a.auto_size) {
        (Some(w), Some(d), None) => Ok(SketchParams::new(w, d, a.hash_seed)?),
        (None, None, Some(kind)) => {
            let spec = SizingSpec {
                regime: regime(kind, a.k, a.z, a.psi)?,
                epsilon: a.eps,
                delta: a.delta,
                m: a.declared_labels.unwrap_or(labels as u64),
            };
            Ok(size_sketch(&spec)?.params(a.hash_seed)?)
        }
        _ => bail!("the sketch backend needs either --width and --depth or --auto-size"),
    }
}

fn sized_explicitly(a: &SketchArgs) -> bool {
    a.width.is_some() || a.depth.is_some() || a.auto_size.is_some()
}

fn run_threads(threads: usize, graph: &Graph, seeds: &SeedSet, cfg: SolverConfig) -> Result<(LabelState, RunReport)> {
    Ok(with_threads(threads, || run(graph, seeds, cfg))?)
}

fn backend_fields(backend: Backend) -> String {
    match backend {
        Backend::Exact => "backend=exact".into(),
        Backend::Sketch(p) => format!("backend=sketch w={} d={} hash_seed={}", p.width(), p.depth(), p.hash_seed()),
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Mad => "mad",
        Method::Harmonic => "harmonic",
    }
}

fn cmd_propagate(a: &PropagateArgs, out: &mut dyn Write, diag: &mut dyn Write) -> Result<()> {
    let graph = a.input.graph()?;
    let seeds = a.input.seeds(&graph)?;
    let mut cfg = solver_config(&a.solver)?;
    cfg.backend = match a.backend {
        BackendArg::Exact if sized_explicitly(&a.sketch) => {
            bail!("--width/--depth/--auto-size only apply to --backend sketch")
        }
        BackendArg::Exact => Backend::Exact,
        BackendArg::Sketch => Backend::Sketch(sketch_params(&a.sketch, seeds.num_labels())?),
    };
    let header = format!(
        "# method={} {} iterations={} nodes={} labels={} mu1={} mu2={} mu3={}",
        method_name(cfg.method),
        backend_fields(cfg.backend),
        cfg.iterations,
        graph.node_count(),
        seeds.num_labels(),
        cfg.mu1,
        cfg.mu2,
        cfg.mu3
    );
    let (state, report) = run_threads(a.solver.threads, &graph, &seeds, cfg)?;

    let sep = a.format.sep();
    let write_labels = |w: &mut dyn Write| -> std::io::Result<()> {
        for v in 0..graph.node_count() {
            for (l, s) in state.top_k(v, a.top_k) {
                let label = seeds.label_name(l).unwrap_or_default();
                writeln!(w, "{}{sep}{label}{sep}{s}", graph.node_name(v))?;
            }
        }
        w.flush()
    };
    match &a.output {
        Some(path) => write_labels(&mut create(path)?).with_context(|| format!("{}", path.display()))?,
        None => write_labels(out)?,
    }
    let write_report = |w: &mut dyn Write| -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        report.write_table(&mut *w, sep)?;
        w.flush()
    };
    match &a.report {
        Some(path) => write_report(&mut create(path)?).with_context(|| format!("{}", path.display()))?,
        None => write_report(diag)?,
    }
    Ok(())
}

fn cmd_size(a: &SizeArgs, out: &mut dyn Write) -> Result<()> {
    let kind = if a.sparse {
        RegimeArg::Sparse
    } else if a.zipf {
        RegimeArg::Zipf
    } else {
        RegimeArg::Community
    };
    let spec = SizingSpec { regime: regime(kind, a.k, a.z, a.psi)?, epsilon: a.eps, delta: a.delta, m: a.m };
    writeln!(out, "{}", size_sketch(&spec)?)?;
    Ok(())
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let read = |path: &Path, min, max| read_records(open(path)?, min, max).with_context(|| format!("{}", path.display()));
    let scored = read(&a.labels, 3, 3)?;
    let gold_recs = read(&a.gold, 2, 2)?;
    let eval_recs = match &a.eval_nodes {
        Some(p) => Some(read(p, 1, 1)?),
        None => None,
    };

    let mut nodes: IndexSet<String> = IndexSet::new();
    let mut labels: IndexSet<String> = IndexSet::new();
    let mut entries: Vec<Vec<(u32, f64)>> = Vec::new();
    for (line, f) in &scored {
        let score: f64 = f[2]
            .parse()
            .map_err(|_| anyhow!("{}: line {line}: score {:?} is not a number", a.labels.display(), f[2]))?;
        let (v, _) = nodes.insert_full(f[0].clone());
        let (l, _) = labels.insert_full(f[1].clone());
        entries.resize(nodes.len(), Vec::new());
        entries[v].push((l as u32, score));
    }
    let mut gold = Vec::with_capacity(gold_recs.len());
    for (_, f) in &gold_recs {
        let (v, _) = nodes.insert_full(f[0].clone());
        let (l, _) = labels.insert_full(f[1].clone());
        gold.push((v, l as u32));
    }
    let eval: Vec<usize> = match eval_recs {
        Some(recs) => recs
            .iter()
            .map(|(line, f)| {
                nodes.get_index_of(&f[0]).ok_or_else(|| {
                    anyhow!("{}: line {line}: node {:?} has no gold label", a.eval_nodes.as_ref().unwrap().display(), f[0])
                })
            })
            .collect::<Result<_>>()?,
        None => {
            let mut seen = HashSet::new();
            gold.iter().map(|g| g.0).filter(|v| seen.insert(*v)).collect()
        }
    };
    entries.resize(nodes.len(), Vec::new());
    let rows = entries.into_iter().map(LabelDist::from_pairs).collect();
    let state = LabelState::exact(rows, labels.len());
    let result = mrr(&state, &gold, &eval)?;
    writeln!(out, "mrr={}", result.mrr)?;
    writeln!(out, "evaluated={}", result.evaluated())?;
    if let Some(path) = &a.ranks {
        let names = Graph::from_named_edges(nodes, std::iter::empty(), true)?;
        let mut w = create(path)?;
        write_ranks_csv(&result, &names, &mut w).and_then(|_| w.flush()).with_context(|| format!("{}", path.display()))?;
    }
    Ok(())
}

fn cmd_skew(a: &SkewArgs, out: &mut dyn Write) -> Result<()> {
    let graph = a.input.graph()?;
    let seeds = a.input.seeds(&graph)?;
    let cfg = solver_config(&a.solver)?;
    let (state, _) = run_threads(a.solver.threads, &graph, &seeds, cfg)?;
    let aggregation = if a.nonzero_only { Aggregation::NonZero } else { Aggregation::AllNodes };
    let report = skew_report(&state, a.rank_limit, aggregation)?;
    let summary = format!("z={} fit_range={}-{}", report.z, report.fit_range.0, report.fit_range.1);
    match &a.output {
        Some(path) => {
            let mut w = create(path)?;
            write_skew_csv(&report, &mut w).and_then(|_| w.flush()).with_context(|| format!("{}", path.display()))?;
            writeln!(out, "{summary}")?;
        }
        None => {
            writeln!(out, "# {summary}")?;
            write_skew_csv(&report, &mut *out)?;
        }
    }
    Ok(())
}

fn cmd_conductance(a: &ConductanceArgs, out: &mut dyn Write) -> Result<()> {
    let graph = a.input.graph()?;
    let sets: Vec<(String, Vec<usize>)> = if let Some(path) = &a.set {
        let recs = read_records(open(path)?, 1, 1).with_context(|| format!("{}", path.display()))?;
        let nodes = recs
            .iter()
            .map(|(line, f)| {
                graph.node_id(&f[0]).ok_or_else(|| anyhow!("{}: line {line}: unknown node {:?}", path.display(), f[0]))
            })
            .collect::<Result<_>>()?;
        vec![("set".into(), nodes)]
    } else {
        let path = a.blocks.as_ref().expect("clap requires --set or --blocks");
        let recs = read_records(open(path)?, 2, 2).with_context(|| format!("{}", path.display()))?;
        let mut blocks: indexmap::IndexMap<String, Vec<usize>> = indexmap::IndexMap::new();
        for (line, f) in &recs {
            let v = graph
                .node_id(&f[0])
                .ok_or_else(|| anyhow!("{}: line {line}: unknown node {:?}", path.display(), f[0]))?;
            blocks.entry(f[1].clone()).or_default().push(v);
        }
        blocks.into_iter().collect()
    };

    let seeds;
    let built;
    let weights = if a.modified {
        seeds = a.input.seeds(&graph)?;
        let cfg = solver_config(&a.solver)?;
        built = build_weights(&graph, &seeds, cfg.weight_mode, cfg.mu1, cfg.mu2, cfg.mu3)?;
        ConductanceWeights::Modified(&built)
    } else {
        ConductanceWeights::Raw
    };

    let sep = a.format.sep();
    writeln!(out, "set{sep}size{sep}psi{sep}phi")?;
    let mut worst: f64 = 0.0;
    for (name, nodes) in &sets {
        let psi = max_conductance(&graph, nodes, weights)?;
        let phi = conductance(&graph, nodes, weights)?;
        worst = worst.max(psi);
        writeln!(out, "{name}{sep}{}{sep}{psi}{sep}{phi}", nodes.len())?;
    }
    writeln!(out, "# max_psi={worst}")?;
    Ok(())
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let graph = a.input.graph()?;
    let seeds = a.input.seeds(&graph)?;
    let evaluation = a.input.evaluation(&graph, &seeds)?;
    let base = solver_config(&a.solver)?;
    let params = sketch_params(&a.sketch, seeds.num_labels())?;

    let (exact, exact_report) = run_threads(a.solver.threads, &graph, &seeds, base.clone())?;
    let (sketch, sketch_report) =
        run_threads(a.solver.threads, &graph, &seeds, base.clone().with_backend(Backend::Sketch(params)))?;

    let score = |state: &LabelState| -> Result<String> {
        Ok(match &evaluation {
            Some((gold, eval)) if !eval.is_empty() => mrr(state, gold, eval)?.mrr.to_string(),
            _ => "-".into(),
        })
    };
    let t_exact = exact_report.total_wall().as_secs_f64();
    let t_sketch = sketch_report.total_wall().as_secs_f64();
    let speedup = if t_sketch > 0.0 { t_exact / t_sketch } else { f64::INFINITY };
    let sep = a.format.sep();
    writeln!(
        out,
        "method{sep}iterations{sep}labels{sep}w{sep}d{sep}exact_bytes{sep}sketch_bytes{sep}exact_runtime_s{sep}sketch_runtime_s{sep}speedup{sep}mrr_exact{sep}mrr_sketch"
    )?;
    writeln!(
        out,
        "{}{sep}{}{sep}{}{sep}{}{sep}{}{sep}{:.0}{sep}{:.0}{sep}{:.6}{sep}{:.6}{sep}{:.3}{sep}{}{sep}{}",
        method_name(base.method),
        exact_report.executed,
        seeds.num_labels(),
        params.width(),
        params.depth(),
        exact_report.mean_store_bytes(),
        sketch_report.mean_store_bytes(),
        t_exact,
        t_sketch,
        speedup,
        score(&exact)?,
        score(&sketch)?
    )?;
    Ok(())
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let dataset = match a.generator.clone() {
        Generator::Ksparse { n, m, k, seeds_per_label, mean_degree, inter_fraction } => gen_ksparse(&KSparseSpec {
            n,
            m,
            k,
            seeds_per_label,
            mean_degree,
            inter_fraction,
            rng_seed: a.rng_seed,
        })?,
        Generator::Zipf { n, m, z, head, clusters, seed_fraction, mean_degree, bridge_weight } => gen_zipf(&ZipfSpec {
            n,
            m,
            z,
            head: head.unwrap_or(m),
            clusters,
            seed_fraction,
            mean_degree,
            bridge_weight,
            rng_seed: a.rng_seed,
            ..ZipfSpec::default()
        })?,
        Generator::Community { blocks, block_size, intra_p, intra_weight, bridges_per_block, bridge_weight, psi } => {
            gen_community(&CommunitySpec {
                blocks,
                block_size,
                intra_p,
                intra_weight,
                bridges_per_block,
                bridge_weight,
                psi_target: psi,
                rng_seed: a.rng_seed,
            })?
        }
    };
    let dir = a.out.as_ref().ok_or_else(|| anyhow!("gen needs --out <dir>"))?;
    dataset.write_to(dir)?;
    for (k, v) in &dataset.meta {
        writeln!(out, "{k}={v}")?;
    }
    Ok(())
}
