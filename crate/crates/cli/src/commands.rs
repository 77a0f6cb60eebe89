use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gridgrowth::epidemics::{self, EpidemicConfig, EpidemicTrace, InitialInfected, Model};
use gridgrowth::fitting::{self, FitResult};
use gridgrowth::growth::{self, degree_histogram};
use gridgrowth::ingestion::{self, LoadReport, LoadedGraph};
use gridgrowth::meanfield::{asymptotic_fraction, DegreeHistogram};
use gridgrowth::metrics::{self, BetweennessResult};
use gridgrowth::{stats, Error, ExponentialMixture, Graph, GrowthConfig, KDistribution, NodeCount};
use log::info;
use serde::Serialize;

use crate::args::*;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::Config(msg.into()).into()
}

pub struct RunContext {
    pub out_dir: PathBuf,
}

impl RunContext {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Echoes an artifact path on stdout.
    fn announce(&self, path: &Path) {
        println!("wrote {}", path.display());
    }
}

impl KArgs {
    fn distribution(&self) -> Result<KDistribution> {
        let dist = match (self.k, self.k_support.is_empty()) {
            (Some(k), true) => KDistribution::constant(k)?,
            (None, false) if self.k_probs.is_empty() => KDistribution::uniform(&self.k_support)?,
            (None, false) => {
                if self.k_probs.len() != self.k_support.len() {
                    return Err(usage("--k-probs must align with --k-support"));
                }
                KDistribution::new(self.k_support.iter().copied().zip(self.k_probs.iter().copied()).collect())?
            }
            _ => return Err(usage("one of --k or --k-support is required")),
        };
        Ok(dist)
    }
}

fn load_graph(path: &Path, format: InputFormat, threshold: f64) -> Result<LoadedGraph> {
    let mtx = match format {
        InputFormat::Auto => path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx")),
        InputFormat::Edgelist => false,
        InputFormat::Mtx => true,
    };
    let loaded = if mtx {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(usage("--threshold must be nonnegative"));
        }
        let doc = ingestion::load_matrix_market(path)?;
        let graph = ingestion::adjacency_from_admittance(&doc, threshold)?;
        LoadedGraph {
            labels: ingestion::default_labels(graph.node_count()),
            integer_labels: true,
            report: LoadReport {
                nodes: graph.node_count(),
                edges: graph.edge_count(),
                self_loops: 0,
                duplicates: 0,
            },
            graph,
        }
    } else {
        ingestion::load_edgelist(path)?
    };
    let r = loaded.report;
    info!(
        "{}: {} nodes, {} edges ({} self-loops dropped, {} duplicates merged)",
        path.display(),
        r.nodes,
        r.edges,
        r.self_loops,
        r.duplicates
    );
    Ok(loaded)
}

fn write_label_map(ctx: &RunContext, loaded: &LoadedGraph) -> Result<()> {
    if !loaded.integer_labels {
        let path = ctx.path("labels.csv");
        ingestion::save_label_map(&path, &loaded.labels)?;
        ctx.announce(&path);
    }
    Ok(())
}

pub fn generate(ctx: &RunContext, args: &GenerateArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
            GrowthConfig::from_toml_str(&text)?
        }
        None => {
            let nodes = match (args.nodes, args.density) {
                (Some(n), None) => NodeCount::Fixed(n),
                (None, Some(density)) => NodeCount::Poisson { density },
                _ => return Err(usage("one of --nodes or --density is required")),
            };
            let cfg = GrowthConfig {
                radius: args.radius,
                nodes,
                k_dist: args.k.distribution()?,
                seed: args.seed,
            };
            cfg.validate()?;
            cfg
        }
    };
    let outcome = growth::grow_traced(&config)?;
    let g = &outcome.graph;
    let edges_path = args.out.clone().unwrap_or_else(|| ctx.path("graph.edges"));
    ingestion::save_graph(&edges_path, g)?;
    ctx.announce(&edges_path);

    let path = ctx.path("positions.csv");
    ingestion::save_positions(&path, g)?;
    ctx.announce(&path);

    let hist = degree_histogram(g);
    let path = ctx.path("degree.csv");
    ingestion::save_histogram(&path, &hist)?;
    ctx.announce(&path);

    let path = ctx.path("meanfield.csv");
    save_meanfield(&path, &hist, &config.k_dist)?;
    ctx.announce(&path);

    let path = ctx.path("growth.toml");
    fs::write(&path, config.to_toml_string()).with_context(|| path.display().to_string())?;
    ctx.announce(&path);

    println!(
        "nodes {} edges {} mean_degree {:.4}",
        g.node_count(),
        g.edge_count(),
        g.mean_degree()
    );
    Ok(())
}

/// Empirical pmf beside the discrete and continuous mean-field predictions.
fn save_meanfield(path: &Path, hist: &DegreeHistogram, k_dist: &KDistribution) -> Result<()> {
    let mix = ExponentialMixture::from_k_distribution(k_dist);
    let max = hist.max_degree().unwrap_or(0);
    ingestion::save_table(
        path,
        &["degree", "empirical_pmf", "discrete_meanfield", "continuous_meanfield"],
        (1..=max).map(|d| (d, hist.pmf(d), asymptotic_fraction(k_dist, d), mix.bin_mass(d))),
    )?;
    Ok(())
}

pub fn analyze(ctx: &RunContext, args: &AnalyzeArgs) -> Result<()> {
    let loaded = load_graph(&args.input.input, args.input.format, args.input.threshold)?;
    write_label_map(ctx, &loaded)?;
    let g = &loaded.graph;
    match args.metric {
        Metric::Degree => {
            let path = ctx.path("degree.csv");
            ingestion::save_histogram(&path, &degree_histogram(g))?;
            ctx.announce(&path);
        }
        Metric::Diameter => {
            let report = metrics::diameter(g)?;
            let path = ctx.path("diameter.csv");
            ingestion::save_table(
                &path,
                &["component_size", "diameter"],
                report.per_component.iter().map(|c| (c.size, c.max_eccentricity)),
            )?;
            ctx.announce(&path);
            println!(
                "diameter {} (largest component {} of {} nodes, {} components)",
                report.diameter,
                report.largest_component_size,
                g.node_count(),
                report.per_component.len()
            );
        }
        Metric::Betweenness => {
            let result = metrics::betweenness(g);
            write_betweenness(ctx, "", &loaded.labels, &result, args.bins)?;
        }
    }
    Ok(())
}

fn write_betweenness(
    ctx: &RunContext,
    prefix: &str,
    labels: &[String],
    result: &BetweennessResult,
    bins: usize,
) -> Result<()> {
    if result.largest_component_only {
        log::warn!("graph is disconnected; betweenness covers the largest component only");
    }
    let path = ctx.path(&format!("{prefix}node_betweenness.csv"));
    ingestion::save_node_scores(&path, labels, result)?;
    ctx.announce(&path);
    let path = ctx.path(&format!("{prefix}edge_betweenness.csv"));
    ingestion::save_edge_scores(&path, labels, result)?;
    ctx.announce(&path);
    for (kind, scores) in [("node", &result.node_scores), ("edge", &result.edge_scores)] {
        match metrics::betweenness_pdf(scores, bins) {
            Ok(h) => {
                let path = ctx.path(&format!("{prefix}{kind}_betweenness_pdf.csv"));
                ingestion::save_score_histogram(&path, &h)?;
                ctx.announce(&path);
            }
            Err(Error::EmptyHistogram) => log::warn!("no {kind} scores to histogram"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn run_fit(hist: &DegreeHistogram, opts: &FitOptions) -> Result<FitResult> {
    let max_degree = hist.max_degree().unwrap_or(0);
    let k_max = opts.k_max.unwrap_or(max_degree).min(max_degree);
    if opts.k_min > k_max {
        return Err(usage(format!("--k-min {} exceeds --k-max {k_max}", opts.k_min)));
    }
    Ok(fitting::fit_mixture(hist, opts.max_components, opts.k_min..=k_max, opts.mode)?)
}

fn write_fit(ctx: &RunContext, prefix: &str, hist: &DegreeHistogram, fit: &FitResult) -> Result<()> {
    let path = ctx.path(&format!("{prefix}fit.toml"));
    fs::write(&path, fit.to_toml_string()).with_context(|| path.display().to_string())?;
    ctx.announce(&path);
    let path = ctx.path(&format!("{prefix}fit.csv"));
    ingestion::save_fit_rows(&path, &fitting::comparison_rows(hist, &fit.mixture))?;
    ctx.announce(&path);
    Ok(())
}

fn describe(mix: &ExponentialMixture) -> String {
    let parts: Vec<String> = mix
        .components()
        .iter()
        .map(|(k, a)| format!("{k}:{a:.4}"))
        .collect();
    format!("[{}] scale {:.4}", parts.join(" "), mix.scale())
}

pub fn fit(ctx: &RunContext, args: &FitArgs) -> Result<()> {
    check_fit_options(&args.fit)?;
    let loaded = load_graph(&args.input.input, args.input.format, args.input.threshold)?;
    let hist = degree_histogram(&loaded.graph);
    let result = run_fit(&hist, &args.fit)?;
    write_fit(ctx, "", &hist, &result)?;
    println!("mixture {} ks {:.5} loss {:.6e}", describe(&result.mixture), result.ks_stat, result.loss);
    Ok(())
}

fn epidemic_model(opts: &EpidemicOptions) -> Model {
    match opts.model {
        ModelKind::Sis => Model::Sis { delta: opts.delta },
        ModelKind::Sir => Model::Sir { gamma: opts.gamma },
    }
}

/// Range checks that need no graph, run before any input is read.
fn check_epidemic_options(opts: &EpidemicOptions) -> Result<()> {
    EpidemicConfig::new(epidemic_model(opts), opts.beta, opts.steps, opts.trials, 0)
        .with_initial(InitialInfected::Fraction(opts.initial_fraction))
        .validate()?;
    Ok(())
}

fn check_fit_options(opts: &FitOptions) -> Result<()> {
    if !(1..=fitting::MAX_COMPONENTS).contains(&opts.max_components) {
        return Err(usage(format!(
            "--max-components must be in 1..={}",
            fitting::MAX_COMPONENTS
        )));
    }
    if opts.k_min < 1 {
        return Err(usage("--k-min must be >= 1"));
    }
    Ok(())
}

fn epidemic_config(opts: &EpidemicOptions, seed: u64, loaded: &LoadedGraph) -> Result<EpidemicConfig> {
    let model = epidemic_model(opts);
    let initial = if opts.initial_nodes.is_empty() {
        InitialInfected::Fraction(opts.initial_fraction)
    } else {
        let ids = opts
            .initial_nodes
            .iter()
            .map(|label| {
                let key = match (loaded.integer_labels, label.parse::<u64>()) {
                    (true, Ok(v)) => v.to_string(),
                    _ => label.clone(),
                };
                loaded
                    .labels
                    .iter()
                    .position(|l| *l == key)
                    .ok_or_else(|| usage(format!("initial node `{label}` is not in the graph")))
            })
            .collect::<Result<Vec<_>>>()?;
        InitialInfected::Nodes(ids)
    };
    let cfg = EpidemicConfig::new(model, opts.beta, opts.steps, opts.trials, seed).with_initial(initial);
    cfg.validate()?;
    Ok(cfg)
}

fn write_trace(ctx: &RunContext, name: &str, trace: &EpidemicTrace) -> Result<()> {
    let path = ctx.path(name);
    ingestion::save_trace(&path, trace)?;
    ctx.announce(&path);
    Ok(())
}

pub fn epidemic(ctx: &RunContext, args: &EpidemicArgs) -> Result<()> {
    check_epidemic_options(&args.epidemic)?;
    let loaded = load_graph(&args.input.input, args.input.format, args.input.threshold)?;
    let cfg = epidemic_config(&args.epidemic, args.seed, &loaded)?;
    let trace = epidemics::simulate(&loaded.graph, &cfg)?;
    write_trace(ctx, "trace.csv", &trace)?;
    let last = trace.infected_fraction().last().unwrap_or(0.0);
    println!("final infected fraction {last:.5}");
    Ok(())
}

#[derive(Serialize)]
struct GraphSummary {
    nodes: usize,
    edges: usize,
    mean_degree: f64,
    diameter: usize,
    largest_component: usize,
}

fn summarize(g: &Graph) -> Result<GraphSummary> {
    let d = metrics::diameter(g)?;
    Ok(GraphSummary {
        nodes: g.node_count(),
        edges: g.edge_count(),
        mean_degree: g.mean_degree(),
        diameter: d.diameter,
        largest_component: d.largest_component_size,
    })
}

#[derive(Serialize)]
struct CompareSummary {
    degree_tv: f64,
    fit_ks: f64,
    trace_max_gap: f64,
    trace_mean_gap: f64,
    real: GraphSummary,
    twin: GraphSummary,
}

pub fn compare(ctx: &RunContext, args: &CompareArgs) -> Result<()> {
    check_fit_options(&args.fit)?;
    check_epidemic_options(&args.epidemic)?;
    if !args.radius.is_finite() || args.radius <= 0.0 {
        return Err(usage("--radius must be positive"));
    }
    let real = load_graph(&args.real, args.format, args.threshold)?;
    write_label_map(ctx, &real)?;
    let real_hist = degree_histogram(&real.graph);
    let fit = run_fit(&real_hist, &args.fit)?;
    write_fit(ctx, "", &real_hist, &fit)?;

    let twin_cfg = GrowthConfig {
        radius: args.radius,
        nodes: NodeCount::Fixed(real.graph.node_count()),
        k_dist: fit.mixture.to_k_distribution(),
        seed: args.seed,
    };
    twin_cfg.validate()?;
    let twin = growth::grow(&twin_cfg)?;
    let path = ctx.path("twin.edges");
    ingestion::save_graph(&path, &twin)?;
    ctx.announce(&path);
    let twin_hist = degree_histogram(&twin);
    for (name, h) in [("real_degree.csv", &real_hist), ("twin_degree.csv", &twin_hist)] {
        let path = ctx.path(name);
        ingestion::save_histogram(&path, h)?;
        ctx.announce(&path);
    }

    let twin_labels = ingestion::default_labels(twin.node_count());
    write_betweenness(ctx, "real_", &real.labels, &metrics::betweenness(&real.graph), args.bins)?;
    write_betweenness(ctx, "twin_", &twin_labels, &metrics::betweenness(&twin), args.bins)?;

    // node labels only make sense on the real graph, so the twin gets the
    // same number of random seeds instead
    let real_cfg = epidemic_config(&args.epidemic, args.seed, &real)?;
    let twin_cfg = match &real_cfg.initial {
        InitialInfected::Nodes(ids) => real_cfg.clone().with_initial(InitialInfected::Count(ids.len())),
        _ => real_cfg.clone(),
    };
    let real_trace = epidemics::simulate(&real.graph, &real_cfg)?;
    let twin_trace = epidemics::simulate(&twin, &twin_cfg)?;
    write_trace(ctx, "real_trace.csv", &real_trace)?;
    write_trace(ctx, "twin_trace.csv", &twin_trace)?;
    let gap = epidemics::compare_traces(&real_trace, &twin_trace)?;

    let summary = CompareSummary {
        degree_tv: real_hist.total_variation_to(&twin_hist),
        fit_ks: fit.ks_stat,
        trace_max_gap: gap.max,
        trace_mean_gap: gap.mean,
        real: summarize(&real.graph)?,
        twin: summarize(&twin)?,
    };
    let path = ctx.path("compare.toml");
    fs::write(&path, toml::to_string(&summary)?).with_context(|| path.display().to_string())?;
    ctx.announce(&path);
    println!("degree_tv {:.5}", summary.degree_tv);
    println!("diameter real {} twin {}", summary.real.diameter, summary.twin.diameter);
    println!("trace gap mean {:.5} max {:.5}", gap.mean, gap.max);
    Ok(())
}

pub fn scaling(ctx: &RunContext, args: &ScalingArgs) -> Result<()> {
    let k_dist = args.k.distribution()?;
    let rows = metrics::diameter_scaling(&k_dist, &args.sizes, args.seeds, args.seed, args.radius)?;
    let path = ctx.path("scaling.csv");
    ingestion::save_scaling(&path, &rows)?;
    ctx.announce(&path);
    if rows.len() >= 2 {
        let ln_n: Vec<f64> = rows.iter().map(|r| (r.nodes as f64).ln()).collect();
        let mean: Vec<f64> = rows.iter().map(|r| r.mean_diameter).collect();
        let fit = stats::linear_fit(&ln_n, &mean);
        println!(
            "mean diameter ~ {:.4} ln N + {:.4} (R^2 {:.4})",
            fit.slope, fit.intercept, fit.r_squared
        );
    }
    Ok(())
}
