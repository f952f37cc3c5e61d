//! Command-line front end.
//!
//! Exit codes: 0 when the property holds (or the artefact was produced),
//! 1 when it is refuted with a certificate, 2 on input errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::analysis::{gap_bracket, is_negative_type, NegTypeVerdict};
use crate::certificate::{
    self, digest, meets_witness_bound, parse_certificate, parse_points, Certificate, RunReport,
    SubdivisionCertificate, WitnessCertificate,
};
use crate::error::{Error, Result};
use crate::families::{make_named, make_random_cactus, FamilySpec};
use crate::graph::{self, distance_matrix, MetricGraph, Point};
use crate::l1cut::{is_l1_embeddable_with_bound, L1Verdict, DEFAULT_MAX_POINTS};
use crate::rational::{self, Rational};
use crate::suite;
use crate::theta::{blocks, contains_theta, cycle_rank, minimal_theta};
use crate::witness::{construct_witness, subdivision_witness};

#[derive(Parser, Debug)]
#[command(name = "thetagraph", version, about = "Theta detection, negative type and l1 tests for metric graphs")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a graph from a named family.
    Make {
        #[command(subcommand)]
        family: Family,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Counts, connectivity and the minimal theta.
    Info { graph: PathBuf },
    /// Six-point negative type violation on a theta-containing graph.
    Witness {
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact negative type test on a point sample.
    Negtype(PointArgs),
    /// Bracket on the negative type gap of a point sample.
    Gap {
        #[command(flatten)]
        points: PointArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        starts: usize,
        #[arg(long, default_value_t = 400)]
        iters: usize,
    },
    /// Exact l1-embeddability test on a point sample.
    L1 {
        #[command(flatten)]
        points: PointArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
        max_cuts_n: usize,
    },
    /// Witness on the k-subdivision of a unit graph, rounded to vertices.
    Subdivide {
        graph: PathBuf,
        #[arg(short = 'k', default_value_t = 180)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate against a graph.
    Verify { certificate: PathBuf, graph: PathBuf },
    /// Run the reproduction suite.
    CheckPaper {
        /// List the checks without running them.
        #[arg(long)]
        list: bool,
        /// Comma-separated check ids to run.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Args, Debug)]
struct PointArgs {
    graph: PathBuf,
    /// JSON point list, or a certificate carrying points. Defaults to all vertices.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Family {
    /// Two vertices joined by three edges.
    Theta {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        lengths: Vec<String>,
    },
    Complete {
        #[arg(short = 'n')]
        n: usize,
    },
    CompleteBipartite {
        #[arg(short = 'a')]
        a: usize,
        #[arg(short = 'b')]
        b: usize,
    },
    Cycle {
        #[arg(short = 'n')]
        n: usize,
    },
    Path {
        #[arg(short = 'n')]
        n: usize,
    },
    /// Random connected multigraph: spanning tree plus extra edges.
    Random {
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'm')]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "1")]
        min_len: String,
    },
    /// Random cactus (theta-free).
    Cactus {
        #[arg(long)]
        cycles: usize,
        #[arg(long, default_value_t = 0)]
        pendants: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "1")]
        min_len: String,
    },
    /// k-subdivision of a unit-length graph file.
    Subdivide {
        #[arg(long)]
        of: PathBuf,
        #[arg(short = 'k')]
        k: usize,
    },
    /// Scale all edge lengths of a graph file.
    Scale {
        #[arg(long)]
        of: PathBuf,
        #[arg(long)]
        by: String,
    },
}

/// Parsed result of one command.
struct Outcome {
    code: u8,
    verdict: String,
    details: serde_json::Value,
    certificate: Option<Certificate>,
    /// Written to `--out` instead of the certificate when present.
    artefact: Option<String>,
}

/// Runs the CLI on `args` (including the program name), writing the report
/// to `stdout`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(stdout, "{e}");
            } else {
                let _ = write!(stderr, "{e}");
            }
            return code;
        }
    };
    let start = Instant::now();
    let name = command_name(&cli.command);
    let (inputs, out) = inputs_of(&cli.command);
    let mut parts: Vec<Vec<u8>> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned().into_bytes())
        .collect();
    for p in &inputs {
        match std::fs::read(p) {
            Ok(bytes) => parts.push(bytes),
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot read {}: {e}", p.display());
                return 2;
            }
        }
    }
    let refs: Vec<&[u8]> = parts.iter().map(|p| p.as_slice()).collect();
    let inputs_digest = digest(&refs);

    if let Command::CheckPaper { list: true, .. } = &cli.command {
        for (id, title) in suite::describe() {
            let _ = writeln!(stdout, "{id:>2}  {title}");
        }
        return 0;
    }

    let outcome = match execute(&cli.command, stderr) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    if let Some(path) = out {
        let body = match (&outcome.artefact, &outcome.certificate) {
            (Some(a), _) => a.clone(),
            (None, Some(c)) => serde_json::to_string_pretty(c).expect("certificate serialises"),
            (None, None) => String::new(),
        };
        if let Err(e) = std::fs::write(&path, body + "\n") {
            let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
            return 2;
        }
    } else if let (Some(a), Command::Make { .. }) = (&outcome.artefact, &cli.command) {
        let _ = writeln!(stdout, "{a}");
        return outcome.code;
    }
    let report = RunReport {
        command: name.to_string(),
        inputs_digest,
        verdict: outcome.verdict,
        details: outcome.details,
        certificate: outcome.certificate,
        wall_time_ms: start.elapsed().as_secs_f64() * 1000.0,
    };
    let _ = writeln!(stdout, "{}", report.to_json());
    outcome.code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Make { .. } => "make",
        Command::Info { .. } => "info",
        Command::Witness { .. } => "witness",
        Command::Negtype(_) => "negtype",
        Command::Gap { .. } => "gap",
        Command::L1 { .. } => "l1",
        Command::Subdivide { .. } => "subdivide",
        Command::Verify { .. } => "verify",
        Command::CheckPaper { .. } => "check-paper",
    }
}

/// Input files (for the digest) and the output path.
fn inputs_of(c: &Command) -> (Vec<PathBuf>, Option<PathBuf>) {
    let pts = |p: &PointArgs| {
        let mut v = vec![p.graph.clone()];
        v.extend(p.points.clone());
        (v, p.out.clone())
    };
    match c {
        Command::Make { family, out } => {
            let src = match family {
                Family::Subdivide { of, .. } | Family::Scale { of, .. } => vec![of.clone()],
                _ => Vec::new(),
            };
            (src, out.clone())
        }
        Command::Info { graph } => (vec![graph.clone()], None),
        Command::Witness { graph, out } | Command::Subdivide { graph, out, .. } => {
            (vec![graph.clone()], out.clone())
        }
        Command::Negtype(p) => pts(p),
        Command::Gap { points, .. } | Command::L1 { points, .. } => pts(points),
        Command::Verify { certificate, graph } => (vec![certificate.clone(), graph.clone()], None),
        Command::CheckPaper { .. } => (Vec::new(), None),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<MetricGraph> {
    MetricGraph::from_json(&read(path)?)
}

fn load_points(g: &MetricGraph, p: &PointArgs) -> Result<Vec<Point>> {
    match &p.points {
        Some(path) => {
            let pts = parse_points(&read(path)?)?;
            for q in &pts {
                graph::canonical_point(g, q)?;
            }
            Ok(pts)
        }
        None => Ok(g.vertex_points()),
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    rational::parse(s.trim())
}

fn outcome(code: u8, verdict: &str, details: serde_json::Value, certificate: Option<Certificate>) -> Outcome {
    Outcome {
        code,
        verdict: verdict.to_string(),
        details,
        certificate,
        artefact: None,
    }
}

fn execute(cmd: &Command, stderr: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Make { family, .. } => {
            let g = make(family)?;
            let mut o = outcome(
                0,
                "built",
                json!({"vertices": g.vertex_count(), "edges": g.edge_count()}),
                None,
            );
            o.artefact = Some(g.to_json());
            Ok(o)
        }
        Command::Info { graph } => {
            let g = load_graph(graph)?;
            let ranks: Vec<usize> = blocks(&g).iter().map(|b| cycle_rank(&g, b)).collect();
            let mut details = json!({
                "vertices": g.vertex_count(),
                "edges": g.edge_count(),
                "connected": true,
                "total_length": rational::format(&g.total_length()),
                "block_cycle_ranks": ranks,
                "contains_theta": contains_theta(&g),
            });
            let certificate = match minimal_theta(&g) {
                Ok(t) => {
                    details["minimal_theta_total"] = json!(rational::format(&t.total));
                    details["minimal_theta_lengths"] =
                        json!(t.lengths().iter().map(|l| rational::format(l)).collect::<Vec<_>>());
                    Some(Certificate::Theta { theta: t })
                }
                Err(Error::NoTheta) => None,
                Err(e) => return Err(e),
            };
            let verdict = if certificate.is_some() { "theta_containing" } else { "theta_free" };
            Ok(outcome(0, verdict, details, certificate))
        }
        Command::Witness { graph, .. } => {
            let g = load_graph(graph)?;
            let w = construct_witness(&g)?;
            let cert = WitnessCertificate::from_witness(&w);
            let holds = meets_witness_bound(&w.gap);
            let details = json!({
                "gap": rational::format(&w.gap),
                "index": w.index,
                "window_start": rational::format(&w.window.start),
                "theta_total": rational::format(&w.theta.total),
                "blue": cert.blue(),
                "red": cert.red(),
            });
            let verdict = if holds { "gap_at_least_1/12" } else { "gap_below_1/12" };
            Ok(outcome(if holds { 0 } else { 1 }, verdict, details, Some(Certificate::Witness(cert))))
        }
        Command::Negtype(p) => {
            let g = load_graph(&p.graph)?;
            let points = load_points(&g, p)?;
            let m = distance_matrix(&g, &points)?;
            let result = is_negative_type(&m)?;
            let (code, verdict, details) = match &result {
                NegTypeVerdict::NegativeType { .. } => (0, "negative_type", json!({"points": m.len()})),
                NegTypeVerdict::NotNegativeType { gamma, .. } => (
                    1,
                    "not_negative_type",
                    json!({"points": m.len(), "gamma": rational::format(gamma)}),
                ),
            };
            Ok(outcome(code, verdict, details, Some(Certificate::NegativeType { points, result })))
        }
        Command::Gap {
            points: p,
            seed,
            starts,
            iters,
        } => {
            let g = load_graph(&p.graph)?;
            let points = load_points(&g, p)?;
            let m = distance_matrix(&g, &points)?;
            let bracket = gap_bracket(&m, *starts, *iters, *seed)?;
            let details = json!({
                "points": m.len(),
                "lower": rational::format(&bracket.lower),
                "upper": rational::format(&bracket.upper),
                "upper_source": bracket.upper_source,
                "upper_is_floating_point": bracket.upper_source == crate::analysis::UpperSource::Spectral,
                "upper_approx": rational::to_f64(&bracket.upper),
            });
            Ok(outcome(0, "bracket", details, Some(Certificate::Gap { points, bracket })))
        }
        Command::L1 { points: p, max_cuts_n } => {
            let g = load_graph(&p.graph)?;
            let points = load_points(&g, p)?;
            let m = distance_matrix(&g, &points)?;
            let result = is_l1_embeddable_with_bound(&m, *max_cuts_n)?;
            let (code, verdict, details) = match &result {
                L1Verdict::Embeddable { decomposition } => {
                    let labelled: Vec<serde_json::Value> = decomposition
                        .cuts
                        .iter()
                        .map(|c| {
                            json!({
                                "cut": c.cut.iter().map(|&i| points[i].to_string()).collect::<Vec<_>>(),
                                "weight": rational::format(&c.weight),
                            })
                        })
                        .collect();
                    (0, "l1_embeddable", json!({"points": m.len(), "cuts": labelled}))
                }
                L1Verdict::NotEmbeddable { certificate } => (
                    1,
                    "not_l1_embeddable",
                    json!({"points": m.len(), "farkas_value": rational::format(&certificate.value)}),
                ),
            };
            Ok(outcome(code, verdict, details, Some(Certificate::L1 { points, result })))
        }
        Command::Subdivide { graph, k, .. } => {
            let g = load_graph(graph)?;
            let sw = subdivision_witness(&g, *k)?;
            let cert = SubdivisionCertificate {
                k: *k,
                blue: sw.blue_vertices.clone(),
                red: sw.red_vertices.clone(),
                continuous_gap: sw.continuous_gap.clone(),
                vertex_gap: sw.vertex_gap.clone(),
            };
            let details = json!({
                "k": k,
                "vertices": sw.subdivided.vertex_count(),
                "continuous_gap": rational::format(&sw.continuous_gap),
                "vertex_gap": rational::format(&sw.vertex_gap),
                "sandwich_holds": sw.sandwich_holds,
            });
            let holds = sw.vertex_gap > Rational::from_integer(0.into());
            Ok(outcome(
                if holds { 0 } else { 1 },
                "vertex_gap_positive",
                details,
                Some(Certificate::Subdivision(cert)),
            ))
        }
        Command::Verify { certificate, graph } => {
            let cert = parse_certificate(&read(certificate)?)?;
            let mut g = load_graph(graph)?;
            if let Certificate::Subdivision(s) = &cert {
                if s.blue.iter().chain(&s.red).any(|v| g.vertex_idx(v).is_none()) {
                    g = graph::subdivide(&g, s.k)?;
                }
            }
            let v = certificate::verify(&cert, &g)?;
            let details = json!({"kind": v.kind, "detail": v.detail});
            let verdict = if v.valid { "valid" } else { "invalid" };
            Ok(outcome(if v.valid { 0 } else { 1 }, verdict, details, None))
        }
        Command::CheckPaper { only, inject_fault, .. } => {
            let ctx = if *inject_fault { suite::Ctx::faulty() } else { suite::Ctx::new() };
            let results = suite::run(&ctx, only);
            for r in &results {
                let _ = writeln!(
                    stderr,
                    "{} {:>2} {} ({:.2} s): {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.id,
                    r.name,
                    r.seconds,
                    r.detail
                );
            }
            let all = results.iter().all(|r| r.passed);
            let checks: Vec<serde_json::Value> = results
                .iter()
                .map(|r| json!({"id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail}))
                .collect();
            Ok(outcome(
                if all { 0 } else { 1 },
                if all { "all_passed" } else { "failures" },
                json!({"checks": checks}),
                None,
            ))
        }
    }
}

fn make(family: &Family) -> Result<MetricGraph> {
    match family {
        Family::Theta { lengths } => {
            let lengths = lengths.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
            make_named(&FamilySpec::Theta { lengths })
        }
        Family::Complete { n } => make_named(&FamilySpec::Complete { n: *n }),
        Family::CompleteBipartite { a, b } => make_named(&FamilySpec::CompleteBipartite { a: *a, b: *b }),
        Family::Cycle { n } => make_named(&FamilySpec::Cycle { n: *n }),
        Family::Path { n } => make_named(&FamilySpec::Path { n: *n }),
        Family::Random { n, m, seed, min_len } => make_named(&FamilySpec::RandomConnected {
            n: *n,
            m: *m,
            seed: *seed,
            min_len: parse_rational(min_len)?,
        }),
        Family::Cactus {
            cycles,
            pendants,
            seed,
            min_len,
        } => make_random_cactus(*cycles, *pendants, *seed, &parse_rational(min_len)?),
        Family::Subdivide { of, k } => graph::subdivide(&load_graph(of)?, *k),
        Family::Scale { of, by } => graph::scale(&load_graph(of)?, &parse_rational(by)?),
    }
}

/// Binary entry point.
pub fn main() -> std::process::ExitCode {
    let code = run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::ExitCode::from(code)
}
