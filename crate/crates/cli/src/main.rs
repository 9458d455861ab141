//! `homog`: command-line front end. Every command prints JSON; checks come
//! back as a versioned report and set the exit code.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use homog::chains::{reachability_check, Chain};
use homog::embed::Universe;
use homog::indep::{axiom_suite, sink_check, IndepRelation};
use homog::metric::PointId;
use homog::monoid::{Dist, MonoidKind, MonoidSpec};
use homog::oligo::{ElemSet, Kind, Structure, Subuniverse};
use homog::report::{Report, REPORT_VERSION};
use homog::suite::{run_criterion, Fault, SuiteOptions, CRITERIA};
use homog::urysohn::{Generator, StepOutcome};
use homog::zariski::{check_containments, check_o_characterization, check_separation};

/// sysexits EX_USAGE
const EXIT_USAGE: u8 = 64;
/// sysexits EX_SOFTWARE, for errors that are neither usage nor a check result
const EXIT_SOFTWARE: u8 = 70;

#[derive(Parser)]
#[command(name = "homog", version, about = "Finite-scale constructions on homogeneous structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the rational Urysohn generator and dump the prefix
    Gen {
        #[arg(long)]
        monoid: MonoidKind,
        #[arg(long, default_value_t = 100)]
        steps: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a pinching pair at a point and advance it
    Pinch(PairArgs),
    /// Build a spreading pair at a point and advance it
    Spread(PairArgs),
    #[command(subcommand)]
    Zariski(ZariskiCmd),
    #[command(subcommand)]
    Oligo(OligoCmd),
    #[command(subcommand)]
    Chains(ChainsCmd),
    #[command(subcommand)]
    Indep(IndepCmd),
    /// Run the acceptance suite
    VerifyAll {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Only these criteria (1 to 13)
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Record wall-clock time per criterion; reports stop being reproducible
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    Ominus,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    monoid: MonoidKind,
    #[arg(long)]
    eps: String,
    #[arg(long, default_value_t = 30)]
    advances: usize,
    #[arg(long, default_value_t = 0)]
    a: u32,
    /// Points in the starting prefix
    #[arg(long, default_value_t = 6)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value = "q_nonneg")]
    monoid: MonoidKind,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    depth: usize,
    #[arg(long, default_value_t = 6)]
    points: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ZariskiCmd {
    /// W(a,b,ζ) ⊆ Z(b,ζ,η) ⊆ W(a,b,ε⊕ζ) on sampled embeddings
    Containments {
        #[command(flatten)]
        common: SampleArgs,
        #[arg(long, default_value_t = 0)]
        a: u32,
        #[arg(long, default_value_t = 1)]
        b: u32,
        #[arg(long, default_value = "1/4")]
        zeta: String,
        #[arg(long, default_value = "1/2")]
        eta: String,
        #[arg(long, default_value = "1")]
        eps: String,
    },
    /// Membership in O(a,ε) against disagreement of the pinching pair
    OCharacterization {
        #[command(flatten)]
        common: SampleArgs,
        #[arg(long, default_value_t = 0)]
        a: u32,
        #[arg(long, default_value = "1")]
        eps: String,
    },
    /// Embeddings in W(a,b,ε) that disagree with random finite maps
    Separation {
        #[command(flatten)]
        common: SampleArgs,
        #[arg(long, default_value = "1/2")]
        eps: String,
        #[arg(long, default_value_t = 3)]
        map_size: usize,
    },
}

#[derive(Args)]
struct KindArgs {
    #[arg(long)]
    kind: KindName,
    /// Field size for vec_fq and affine_fq
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Clique size for copies_kn
    #[arg(long, default_value_t = 3)]
    n: u64,
    /// Truncation size: dimension for vector kinds, copies for copies_kn,
    /// elements otherwise
    #[arg(long)]
    size: Option<u64>,
    /// Seed for the random graph kinds
    #[arg(long, default_value_t = 0)]
    structure_seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum KindName {
    PureSet,
    DenseOrder,
    VecFq,
    AffineFq,
    CopiesKn,
    RandomGraph,
    RandomBipartite,
}

impl KindArgs {
    fn kind(&self) -> Kind {
        match self.kind {
            KindName::PureSet => Kind::PureSet,
            KindName::DenseOrder => Kind::DenseOrder,
            KindName::VecFq => Kind::VecFq { q: self.q },
            KindName::AffineFq => Kind::AffineFq { q: self.q },
            KindName::CopiesKn => Kind::CopiesKn { n: self.n },
            KindName::RandomGraph => Kind::RandomGraph,
            KindName::RandomBipartite => Kind::RandomBipartite,
        }
    }

    fn structure(&self) -> Result<Structure, Failure> {
        let r = match self.size {
            Some(n) => Structure::with_size(self.kind(), n, self.structure_seed),
            None => Structure::new(self.kind(), self.structure_seed),
        };
        r.map_err(usage)
    }
}

#[derive(Subcommand)]
enum OligoCmd {
    /// Algebraic closure of a finite set
    Acl {
        #[command(flatten)]
        kind: KindArgs,
        /// Comma-separated elements: "e1,e1+e2" for vector kinds, integers otherwise
        #[arg(long, default_value = "")]
        set: String,
    },
    /// Whether two tuples lie in the same orbit
    OrbitEq {
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
}

#[derive(Subcommand)]
enum ChainsCmd {
    /// Sampled stabilizer elements must all get chain membership witnesses
    Reach {
        #[command(flatten)]
        kind: KindArgs,
        /// Chain JSON: {"tuples": [[elem, …], …]}
        #[arg(long)]
        chain: PathBuf,
        /// Common base A; defaults to the intersection of the first two links
        #[arg(long)]
        over: Option<String>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum RelationName {
    Algebraic,
    AlwaysTrue,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum OmegaName {
    EvenSpan,
    Dyadic,
    Side,
}

#[derive(Subcommand)]
enum IndepCmd {
    /// The independence axioms on sampled sets
    Axioms {
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long, default_value = "algebraic")]
        relation: RelationName,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// The three sink conditions for a universally embedded Ω′
    Sink {
        /// Defaults to vec_fq with q=2 and dimension 5
        #[arg(long, default_value = "vec_fq")]
        kind: KindName,
        #[arg(long, default_value_t = 2)]
        q: u64,
        #[arg(long, default_value_t = 5)]
        size: u64,
        #[arg(long)]
        omega: OmegaName,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// How a command failed, short of producing a report.
enum Failure {
    Usage(String),
    Internal(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

/// What a command produced: a plain artifact, or a report with a verdict.
enum Output {
    Artifact(Value),
    Report(Report),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let out_path = out_path(&cli.command);
    match run(cli.command) {
        Ok(out) => {
            let (text, code) = match out {
                Output::Artifact(v) => (format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")), 0),
                Output::Report(r) => (r.to_json_string(), r.exit_code() as u8),
            };
            if let Some(p) = out_path {
                if let Err(e) = fs::write(&p, &text) {
                    eprintln!("homog: cannot write {}: {e}", p.display());
                    return ExitCode::from(EXIT_SOFTWARE);
                }
            }
            print!("{text}");
            ExitCode::from(code)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("homog: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("homog: {m}");
            ExitCode::from(EXIT_SOFTWARE)
        }
    }
}

fn out_path(c: &Command) -> Option<PathBuf> {
    match c {
        Command::Gen { out, .. } => out.clone(),
        Command::Pinch(p) | Command::Spread(p) => p.out.clone(),
        Command::Zariski(
            ZariskiCmd::Containments { common, .. } | ZariskiCmd::OCharacterization { common, .. } | ZariskiCmd::Separation { common, .. },
        ) => common.report.clone(),
        Command::Oligo(_) => None,
        Command::Chains(ChainsCmd::Reach { report, .. }) => report.clone(),
        Command::Indep(IndepCmd::Axioms { report, .. } | IndepCmd::Sink { report, .. }) => report.clone(),
        Command::VerifyAll { report, .. } => report.clone(),
    }
}

fn dist(m: &MonoidSpec, s: &str) -> Result<Dist, Failure> {
    let d = m.parse_dist(s).map_err(|_| Failure::Usage(format!("`{s}` is not a distance of {}", m.kind)))?;
    if !m.in_carrier(&d) {
        return Err(Failure::Usage(format!("{d} lies outside the carrier of {}", m.kind)));
    }
    Ok(d)
}

fn run(cmd: Command) -> Result<Output, Failure> {
    match cmd {
        Command::Gen { monoid, steps, .. } => {
            let mut g = Generator::new(MonoidSpec::new(monoid));
            let mut realized = 0u64;
            for _ in 0..steps {
                if let StepOutcome::Realized(_) = g.step() {
                    realized += 1;
                }
            }
            let mut v = g.to_json();
            v["version"] = REPORT_VERSION.into();
            v["realized"] = realized.into();
            Ok(Output::Artifact(v))
        }
        Command::Pinch(p) => pair(p, true),
        Command::Spread(p) => pair(p, false),
        Command::Zariski(z) => zariski(z),
        Command::Oligo(o) => oligo(o),
        Command::Chains(ChainsCmd::Reach { kind, chain, over, samples, seed, budget, .. }) => {
            let mut s = kind.structure()?;
            let text = fs::read_to_string(&chain).map_err(|e| usage(format!("cannot read {}: {e}", chain.display())))?;
            let c = read_chain(&mut s, &text)?;
            let a = match over {
                Some(set) => s.parse_set(&set).map_err(usage)?,
                None => c.meets().first().cloned().ok_or_else(|| usage("the chain needs at least two links"))?,
            };
            let check = reachability_check(&mut s, &a, &c, samples, budget, seed).map_err(usage)?;
            Ok(Output::Report(Report::new(seed, vec![check])))
        }
        Command::Indep(IndepCmd::Axioms { kind, relation, samples, seed, .. }) => {
            let s = kind.structure()?;
            let rel = match relation {
                RelationName::Algebraic => IndepRelation::Algebraic,
                RelationName::AlwaysTrue => IndepRelation::AlwaysTrue,
            };
            Ok(Output::Report(Report::new(seed, axiom_suite(&s, rel, samples, seed))))
        }
        Command::Indep(IndepCmd::Sink { kind, q, size, omega, k, depth, samples, seed, .. }) => {
            let ka = KindArgs { kind, q, n: 3, size: Some(size), structure_seed: 0 };
            let s = ka.structure()?;
            let omega = match omega {
                OmegaName::EvenSpan => Subuniverse::EvenSpan,
                OmegaName::Dyadic => Subuniverse::Dyadic,
                OmegaName::Side => Subuniverse::Side(true),
            };
            let delta = Subuniverse::Finite(s.acl(&ElemSet::new()));
            Ok(Output::Report(Report::new(seed, sink_check(&s, &omega, &delta, k, depth, samples, seed))))
        }
        Command::VerifyAll { quick, seed, only, timings, inject_fault, .. } => {
            let opts = SuiteOptions { seed, quick, fault: inject_fault.map(|FaultArg::Ominus| Fault::Ominus) };
            let ids: Vec<u8> = if only.is_empty() { CRITERIA.iter().map(|(id, _)| *id).collect() } else { only };
            if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|(c, _)| c == *id)) {
                return Err(usage(format!("no criterion {bad}")));
            }
            let checks = ids
                .iter()
                .map(|&id| {
                    let t = Instant::now();
                    let mut c = run_criterion(id, &opts);
                    if timings {
                        c.runtime_ms = Some(t.elapsed().as_millis() as u64);
                    }
                    c
                })
                .collect();
            Ok(Output::Report(Report::new(seed, checks)))
        }
    }
}

fn pair(p: PairArgs, pinch: bool) -> Result<Output, Failure> {
    let m = MonoidSpec::new(p.monoid);
    let eps = dist(&m, &p.eps)?;
    if eps.is_zero() {
        return Err(usage("ε must be nonzero"));
    }
    let mut u = Universe::with_points(m, p.points.max(1));
    let a = PointId(p.a);
    if p.a as usize >= u.generator().len() {
        return Err(usage(format!("point {} is not in the starting prefix", p.a)));
    }
    let (f, g) = if pinch { u.pinching_pair(a, eps.clone()) } else { u.spreading_pair(a, eps.clone()) }.map_err(usage)?;
    for _ in 0..p.advances {
        u.advance(f).map_err(internal)?;
        if !pinch {
            u.advance(g).map_err(internal)?;
        }
    }
    let names = if pinch { ["phi", "psi"] } else { ["sigma", "theta"] };
    Ok(Output::Artifact(json!({
        "version": REPORT_VERSION,
        "monoid": p.monoid,
        "a": a,
        "eps": eps,
        "advances": p.advances,
        names[0]: u.to_json(f).map_err(internal)?,
        names[1]: u.to_json(g).map_err(internal)?,
        "space": u.generator().space(),
    })))
}

fn zariski(z: ZariskiCmd) -> Result<Output, Failure> {
    let (common, check) = match z {
        ZariskiCmd::Containments { common, a, b, zeta, eta, eps } => {
            let m = MonoidSpec::new(common.monoid);
            let (zeta, eta, eps) = (dist(&m, &zeta)?, dist(&m, &eta)?, dist(&m, &eps)?);
            let g = Generator::with_points(m, common.points.max(2));
            let c = check_containments(&g, PointId(a), PointId(b), &zeta, &eta, &eps, common.samples, common.depth, common.seed)
                .map_err(usage)?;
            (common, c)
        }
        ZariskiCmd::OCharacterization { common, a, eps } => {
            let m = MonoidSpec::new(common.monoid);
            let eps = dist(&m, &eps)?;
            let g = Generator::with_points(m, common.points.max(1));
            let c = check_o_characterization(&g, PointId(a), &eps, common.samples, common.depth, common.seed).map_err(usage)?;
            (common, c)
        }
        ZariskiCmd::Separation { common, eps, map_size } => {
            let m = MonoidSpec::new(common.monoid);
            let eps = dist(&m, &eps)?;
            let g = Generator::with_points(m, common.points.max(2));
            let c = check_separation(&g, &eps, common.samples, map_size, common.seed).map_err(usage)?;
            (common, c)
        }
    };
    Ok(Output::Report(Report::new(common.seed, vec![check])))
}

fn oligo(o: OligoCmd) -> Result<Output, Failure> {
    match o {
        OligoCmd::Acl { kind, set } => {
            let mut s = kind.structure()?;
            let a = s.parse_set(&set).map_err(usage)?;
            let cl = s.acl(&a);
            Ok(Output::Artifact(json!({
                "version": REPORT_VERSION,
                "kind": s.kind(),
                "set": a.iter().map(|&e| s.format_elem(e)).collect::<Vec<_>>(),
                "acl": cl.iter().map(|&e| s.format_elem(e)).collect::<Vec<_>>(),
                "size": cl.len(),
            })))
        }
        OligoCmd::OrbitEq { kind, u, v } => {
            let mut s = kind.structure()?;
            let tuple = |s: &mut Structure, t: &str| -> Result<Vec<u64>, Failure> {
                t.split(',').filter(|x| !x.trim().is_empty()).map(|x| s.parse_elem(x).map_err(usage)).collect()
            };
            let (tu, tv) = (tuple(&mut s, &u)?, tuple(&mut s, &v)?);
            let same = s.orbit_eq(&tu, &tv).map_err(usage)?;
            Ok(Output::Artifact(json!({"version": REPORT_VERSION, "kind": s.kind(), "u": u, "v": v, "same_orbit": same})))
        }
    }
}

/// Chain files may give elements as integers or in the kind's syntax.
fn read_chain(s: &mut Structure, text: &str) -> Result<Chain, Failure> {
    let v: Value = serde_json::from_str(text).map_err(|e| usage(format!("chain file: {e}")))?;
    let tuples = v["tuples"].as_array().ok_or_else(|| usage("chain file: missing \"tuples\""))?;
    let mut out = Vec::new();
    for t in tuples {
        let t = t.as_array().ok_or_else(|| usage("chain file: each tuple must be an array"))?;
        let mut row = Vec::new();
        for e in t {
            let x = match e {
                Value::Number(n) => {
                    let x = n.as_u64().ok_or_else(|| usage(format!("chain file: bad element {n}")))?;
                    while !s.contains(x) {
                        if !s.grow() {
                            return Err(usage(format!("chain file: element {x} is out of reach")));
                        }
                    }
                    x
                }
                Value::String(t) => s.parse_elem(t).map_err(usage)?,
                other => return Err(usage(format!("chain file: bad element {other}"))),
            };
            row.push(x);
        }
        out.push(row);
    }
    Ok(Chain { tuples: out, acl_closed: v["acl_closed"].as_bool().unwrap_or(false) })
}
