//! `flatland`: command-line front end over the flatland library.
//!
//! Every command prints one JSON document on stdout. Exit code 1 marks a
//! domain error and 2 an input error. Diagnostics go to stderr.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use flatland::assembly::{assemble, classify, strip_svg, tangency_census, SurfaceComplex};
use flatland::causality::{colored_isomorphic, derive_tricoloring, extract_causality, reconstruct, CausalityMap};
use flatland::curves::{
    classify_tangencies_oriented, j_from_events, render_svg, vertical_tangencies, whitney_report, Ambient, CurvePattern,
};
use flatland::flowgraph::{
    enumerate_tricolorings, flow_graphs_up_to, validate, ColoredGraph, ColoringDoc, GraphDoc, Tricoloring,
    TrivalentGraph, DEFAULT_VERTEX_CAP,
};
use flatland::patterns::{encode, reduce, render_word_svg, AnnulusWord};
use flatland::polyfam::{delta_curves, j_of_events, perturbation_trials, track_loop, PolyLoop, DEFAULT_RESOLUTION};
use flatland::strata::{complexity_report, index, morse_identity_check, StrataCensus};

#[derive(Parser)]
#[command(name = "flatland", version, about = "Traversing flows on surfaces and the loop invariant J")]
struct Cli {
    /// Emit JSON on stdout (the only output format).
    #[arg(long, global = true, default_value_t = true)]
    json: bool,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for `build --enumerate`.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the strip surface of a colored graph and report its invariants.
    Build(BuildArgs),
    /// Extract the causality map, reconstruct the colored graph and compare.
    Holography(HolographyArgs),
    /// Whitney and region identities for the loops of a curve pattern.
    Whitney(WhitneyArgs),
    /// Track a loop of polynomials and compute J.
    Polyloop(PolyloopArgs),
    /// Reduce a word, curve pattern or polynomial loop to a multiple of the generator.
    ReducePattern(ReduceArgs),
    /// List connected graphs with valencies 1 and 3.
    EnumerateGraphs(EnumerateArgs),
    /// Write the SVG figure of any input document.
    Render(RenderArgs),
}

#[derive(Args)]
struct BuildArgs {
    graph: PathBuf,
    coloring: Option<PathBuf>,
    /// One record per coloring of the graph.
    #[arg(long)]
    enumerate: bool,
    /// Write the graph, coloring and surface complex as JSON.
    #[arg(long, value_name = "FILE")]
    dump_surface: Option<PathBuf>,
    /// Write the strip diagram as SVG.
    #[arg(long, value_name = "FILE")]
    render: Option<PathBuf>,
}

#[derive(Args)]
struct HolographyArgs {
    graph: Option<PathBuf>,
    coloring: Option<PathBuf>,
    /// A surface dump written by `build --dump-surface`.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["graph", "from_causality"])]
    surface: Option<PathBuf>,
    /// Reconstruct from a causality map JSON file ("-" for stdin).
    #[arg(long, value_name = "FILE")]
    from_causality: Option<PathBuf>,
}

#[derive(Args)]
struct WhitneyArgs {
    curve: PathBuf,
    #[arg(long, value_name = "FILE")]
    render: Option<PathBuf>,
}

#[derive(Args)]
struct PolyloopArgs {
    r#loop: PathBuf,
    #[arg(long, value_name = "FILE")]
    render: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Number of seeded Fourier perturbations to re-check J on.
    #[arg(long, default_value_t = 0)]
    perturb: usize,
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,
}

#[derive(Args)]
struct ReduceArgs {
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    render: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, default_value_t = 6)]
    max_vertices: usize,
    /// Include graphs with univalent vertices.
    #[arg(long)]
    mixed: bool,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    /// Coloring for a graph input.
    coloring: Option<PathBuf>,
    #[arg(long, short, value_name = "FILE")]
    render: PathBuf,
}

enum Failure {
    Domain(String, Option<Value>),
    Input(String),
}

type Outcome = Result<Value, Failure>;

fn domain(msg: impl ToString) -> Failure {
    Failure::Domain(msg.to_string(), None)
}

fn input(msg: impl ToString) -> Failure {
    Failure::Input(msg.to_string())
}

fn fixtures_dir() -> PathBuf {
    std::env::var_os("FLATLAND_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"))
}

/// Reads a path as given, or relative to the fixture directory; "-" reads stdin.
fn read(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).map_err(|e| input(format!("stdin: {e}")));
    }
    let direct = std::fs::read_to_string(path);
    match direct {
        Ok(s) => Ok(s),
        Err(e) => {
            std::fs::read_to_string(fixtures_dir().join(path)).map_err(|_| input(format!("{}: {e}", path.display())))
        }
    }
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<(TrivalentGraph, Option<Tricoloring>), Failure> {
    let doc = GraphDoc::parse(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let g = doc.graph().map_err(|e| input(format!("{}: {e}", path.display())))?;
    let c = doc.coloring().map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok((g, c))
}

fn load_coloring(path: &Path, g: &TrivalentGraph) -> Result<Tricoloring, Failure> {
    let doc = ColoringDoc::parse(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    doc.coloring(g.half_edge_count()).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn colored_input(graph: &Path, coloring: Option<&Path>) -> Result<(TrivalentGraph, Tricoloring), Failure> {
    let (g, embedded) = load_graph(graph)?;
    let c = match coloring {
        Some(p) => load_coloring(p, &g)?,
        None => embedded.ok_or_else(|| input("a coloring file is required"))?,
    };
    let report = validate(&g, &c);
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::Domain("invalid coloring".into(), Some(json!({ "violations": list }))));
    }
    Ok((g, c))
}

fn surface_record(g: &TrivalentGraph, c: &Tricoloring) -> Outcome {
    let surf = assemble(g, c).map_err(domain)?;
    let class = classify(&surf).map_err(domain)?;
    let census = tangency_census(&surf).map_err(domain)?;
    let strata = StrataCensus::of_surface(&surf).map_err(domain)?;
    let complexity = complexity_report(&class, &strata).map_err(domain)?;
    Ok(json!({
        "coloring": c.as_map(),
        "class": { "euler": class.euler, "orientable": class.orientable, "genus": class.genus,
                   "boundary_components": class.boundary_components, "name": class.name() },
        "census": { "concave": census.concave_points.len(), "convex": census.convex_points.len(),
                    "entry_arcs": census.entry_arcs, "exit_arcs": census.exit_arcs,
                    "entry_circles": census.entry_circles, "exit_circles": census.exit_circles },
        "strata": { "census": strata, "index": index(&strata),
                    "morse_identity": morse_identity_check(&strata).map_err(domain)?,
                    "complexity": complexity },
    }))
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| input(format!("thread pool: {e}")))
}

/// The document written by `build --dump-surface`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceDump {
    format: u32,
    graph: GraphDoc,
    surface: SurfaceComplex,
}

fn cmd_build(a: &BuildArgs, jobs: Option<usize>) -> Outcome {
    if a.enumerate {
        let (g, _) = load_graph(&a.graph)?;
        let colorings = enumerate_tricolorings(&g);
        let records: Vec<Value> =
            pool(jobs)?.install(|| colorings.par_iter().map(|c| surface_record(&g, c)).collect::<Result<_, _>>())?;
        return Ok(json!({ "format": 1, "command": "build", "count": records.len(), "records": records }));
    }
    let (g, c) = colored_input(&a.graph, a.coloring.as_deref())?;
    let rec = surface_record(&g, &c)?;
    if let Some(p) = &a.dump_surface {
        let dump = SurfaceDump {
            format: 1,
            graph: GraphDoc::from_graph(&g, Some(&c)),
            surface: assemble(&g, &c).map_err(domain)?,
        };
        write(p, &(serde_json::to_string_pretty(&dump).expect("dump serializes") + "\n"))?;
    }
    if let Some(p) = &a.render {
        write(p, &strip_svg(&g, &c))?;
    }
    let mut out = json!({ "format": 1, "command": "build" });
    out.as_object_mut().unwrap().extend(rec.as_object().unwrap().clone());
    Ok(out)
}

fn holography_from_map(cmap: &CausalityMap, original: Option<&ColoredGraph>) -> Outcome {
    let tg = reconstruct(cmap).map_err(domain)?;
    let alpha = derive_tricoloring(cmap, &tg).map_err(domain)?;
    let back = ColoredGraph::new(tg.graph.clone(), alpha.clone())
        .map_err(|r| domain(format!("recovered coloring invalid: {:?}", r.violations)))?;
    let iso = original.map(|o| colored_isomorphic(&back, o));
    Ok(json!({
        "format": 1,
        "command": "holography",
        "causality": cmap,
        "reconstructed": GraphDoc::from_graph(&tg.graph, Some(&alpha)),
        "vertex_labels": tg.vertex_labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "isomorphic": iso,
    }))
}

fn cmd_holography(a: &HolographyArgs) -> Outcome {
    if let Some(p) = &a.from_causality {
        let cmap: CausalityMap = serde_json::from_str(&read(p)?)
            .map_err(|e| input(format!("{}: malformed causality map: {e}", p.display())))?;
        if cmap.format != 1 {
            return Err(input(format!("unsupported causality format {}", cmap.format)));
        }
        let original = match &a.graph {
            Some(g) => {
                let (g, c) = colored_input(g, a.coloring.as_deref())?;
                Some(ColoredGraph::new(g, c).map_err(|_| input("invalid coloring"))?)
            }
            None => None,
        };
        return holography_from_map(&cmap, original.as_ref());
    }
    let (surface, original) = if let Some(p) = &a.surface {
        let dump: SurfaceDump = serde_json::from_str(&read(p)?)
            .map_err(|e| input(format!("{}: malformed surface dump: {e}", p.display())))?;
        if dump.format != 1 {
            return Err(input(format!("unsupported surface format {}", dump.format)));
        }
        dump.surface.check().map_err(domain)?;
        let g = dump.graph.graph().map_err(input)?;
        let c = dump.graph.coloring().map_err(input)?.ok_or_else(|| input("surface dump lacks a coloring"))?;
        (dump.surface, ColoredGraph::new(g, c).map_err(|_| input("invalid coloring in dump"))?)
    } else {
        let g = a.graph.as_ref().ok_or_else(|| input("give a graph, --surface or --from-causality"))?;
        let (g, c) = colored_input(g, a.coloring.as_deref())?;
        let s = assemble(&g, &c).map_err(domain)?;
        (s, ColoredGraph::new(g, c).map_err(|_| input("invalid coloring"))?)
    };
    let cmap = extract_causality(&surface).map_err(domain)?;
    holography_from_map(&cmap, Some(&original))
}

fn load_curve(path: &Path) -> Result<CurvePattern, Failure> {
    CurvePattern::from_json(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn cmd_whitney(a: &WhitneyArgs) -> Outcome {
    let p = load_curve(&a.curve)?;
    let events = vertical_tangencies(&p).map_err(domain)?;
    let mut loops = Vec::new();
    if p.ambient == Ambient::Plane {
        for (i, c) in p.loops.iter().enumerate() {
            let own = classify_tangencies_oriented(&CurvePattern::single(c.clone())).map_err(domain)?;
            let r = whitney_report(c, &own).map_err(domain)?;
            loops.push(json!({ "loop": i, "report": r }));
        }
    }
    if let Some(out) = &a.render {
        write(out, &render_svg(&p, &events))?;
    }
    Ok(json!({
        "format": 1,
        "command": "whitney",
        "ambient": p.ambient,
        "loops": loops,
        "events": events,
        "j": j_from_events(&events),
    }))
}

fn load_loop(path: &Path) -> Result<PolyLoop, Failure> {
    PolyLoop::from_json(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn cmd_polyloop(a: &PolyloopArgs, seed: u64) -> Outcome {
    let l = load_loop(&a.r#loop)?;
    let t = track_loop(&l, a.resolution).map_err(domain)?;
    let j = j_of_events(&t.events).map_err(domain)?;
    let pattern = delta_curves(&l, a.resolution).map_err(domain)?;
    let curve_events = vertical_tangencies(&pattern).map_err(domain)?;
    let curve_j = j_from_events(&curve_events);
    if let Some(out) = &a.render {
        write(out, &render_svg(&pattern, &curve_events))?;
    }
    let perturbations: Vec<Value> = perturbation_trials(&l, a.epsilon, a.perturb, seed)
        .into_iter()
        .map(|r| match r {
            Ok(r) => json!({ "valid": true, "j": r.value() }),
            Err(e) => json!({ "valid": false, "reason": e.to_string() }),
        })
        .collect();
    Ok(json!({
        "format": 1,
        "command": "polyloop",
        "degree": l.degree,
        "events": t.events,
        "strand_bound": t.strand_bound,
        "discriminant_check": t.discriminant_check,
        "kind_rule_check": t.kind_rule_check,
        "j": { "census": j.census, "strata": j.strata, "delta_curves": curve_j.j,
               "concave": j.concave, "convex": j.convex, "bound_holds": curve_j.bound_holds },
        "seed": seed,
        "perturbations": perturbations,
    }))
}

/// Words, curve patterns and loops are told apart by their keys.
fn load_word(path: &Path) -> Result<AnnulusWord, Failure> {
    let body = read(path)?;
    let v: Value = serde_json::from_str(&body).map_err(|e| input(format!("{}: {e}", path.display())))?;
    if v.get("events").is_some() {
        AnnulusWord::from_json(&body).map_err(|e| input(format!("{}: {e}", path.display())))
    } else if v.get("loops").is_some() {
        encode(&load_curve(path)?).map_err(domain)
    } else if v.get("coeffs").is_some() {
        let pattern = delta_curves(&load_loop(path)?, DEFAULT_RESOLUTION).map_err(domain)?;
        encode(&pattern).map_err(domain)
    } else {
        Err(input(format!("{}: not a word, curve pattern or loop", path.display())))
    }
}

fn cmd_reduce(a: &ReduceArgs) -> Outcome {
    let w = load_word(&a.input)?;
    let r = reduce(&w).map_err(domain)?;
    if let Some(out) = &a.render {
        write(out, &render_word_svg(&w))?;
    }
    Ok(json!({
        "format": 1,
        "command": "reduce-pattern",
        "word": w.to_value(),
        "n": r.n,
        "initial": r.initial,
        "terminal": r.terminal,
        "trace": r.trace,
    }))
}

fn cmd_enumerate(a: &EnumerateArgs) -> Outcome {
    if a.max_vertices > DEFAULT_VERTEX_CAP {
        return Err(input(format!("--max-vertices {} exceeds the cap {DEFAULT_VERTEX_CAP}", a.max_vertices)));
    }
    let all = flow_graphs_up_to(a.max_vertices, DEFAULT_VERTEX_CAP).map_err(input)?;
    let mut graphs = Vec::new();
    let mut counts = BTreeMap::<String, usize>::new();
    for g in all.iter().filter(|g| a.mixed || g.univalent_count() == 0) {
        let (t, u) = (g.trivalent_count(), g.univalent_count());
        *counts.entry(format!("{t}+{u}")).or_default() += 1;
        graphs.push(json!({
            "trivalent": t,
            "univalent": u,
            "circle": g.is_circle(),
            "euler": g.euler(),
            "colorings": 6u64.pow(t as u32),
            "graph": GraphDoc::from_graph(g, None),
        }));
    }
    Ok(json!({
        "format": 1,
        "command": "enumerate-graphs",
        "max_vertices": a.max_vertices,
        "total": graphs.len(),
        "counts": counts,
        "graphs": graphs,
    }))
}

fn cmd_render(a: &RenderArgs) -> Outcome {
    let body = read(&a.input)?;
    let v: Value = serde_json::from_str(&body).map_err(|e| input(format!("{}: {e}", a.input.display())))?;
    let (kind, svg) = if v.get("stars").is_some() {
        let (g, c) = colored_input(&a.input, a.coloring.as_deref())?;
        ("graph", strip_svg(&g, &c))
    } else if v.get("loops").is_some() {
        let p = load_curve(&a.input)?;
        ("curve", render_svg(&p, &vertical_tangencies(&p).map_err(domain)?))
    } else if v.get("coeffs").is_some() {
        let p = delta_curves(&load_loop(&a.input)?, DEFAULT_RESOLUTION).map_err(domain)?;
        ("loop", render_svg(&p, &vertical_tangencies(&p).map_err(domain)?))
    } else if v.get("events").is_some() {
        ("word", render_word_svg(&load_word(&a.input)?))
    } else {
        return Err(input(format!("{}: nothing to render", a.input.display())));
    };
    write(&a.render, &svg)?;
    Ok(
        json!({ "format": 1, "command": "render", "kind": kind, "output": a.render.display().to_string(), "bytes": svg.len() }),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Build(a) => cmd_build(a, cli.jobs),
        Command::Holography(a) => cmd_holography(a),
        Command::Whitney(a) => cmd_whitney(a),
        Command::Polyloop(a) => cmd_polyloop(a, cli.seed),
        Command::ReducePattern(a) => cmd_reduce(a),
        Command::EnumerateGraphs(a) => cmd_enumerate(a),
        Command::Render(a) => cmd_render(a),
    };
    match outcome {
        Ok(v) => {
            let mut out = std::io::stdout().lock();
            let body = serde_json::to_string_pretty(&v).expect("output serializes");
            // A closed pipe on stdout is not an error of the command.
            let _ = writeln!(out, "{body}");
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(msg, detail)) => {
            eprintln!("error: {msg}");
            if let Some(d) = detail {
                eprintln!("{}", serde_json::to_string_pretty(&d).expect("detail serializes"));
            }
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
    }
}
