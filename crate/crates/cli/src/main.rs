use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polylearn::bimatrix::{
    self, br_oracle, full, lower_bound_game, random_lower_bound_game, solve_wsne, verify_wsne, BimatrixGame, Side,
    SolveConfig,
};
use polylearn::cdgbs::{cd_gbs, cd_gbs_adversarial, GbsConfig};
use polylearn::crgbs::{cr_gbs, CrConfig};
use polylearn::error::Error;
use polylearn::geometry::VPolytope;
use polylearn::labelling::EmpiricalLabelling;
use polylearn::multiplayer::{
    self, jordan_game, learn_multiplayer_labellings, multi_br_oracle, solve_wsne_multiplayer, verify_wsne_multiplayer,
    MultiBrOracle, NormalFormGame,
};
use polylearn::partition::{make_oracle, random_uepp, LabelSource, OracleKind, Policy, Uepp, UeppOptions};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "polylearn", version, about = "Learn simplex partitions and solve games from best-response queries")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random or fixed instance.
    Gen(GenArgs),
    /// Learn an eps-close labelling of a UEPP instance.
    Learn(LearnArgs),
    /// Find a well-supported equilibrium through best-response queries.
    Solve(SolveArgs),
    /// Sweep eps and seeds over an instance family and write CSV rows.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Uepp,
    Bimatrix,
    Lbgame,
    Multi,
    Jordan,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Algo {
    Cdgbs,
    Crgbs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OracleArg {
    Lex,
    Adv,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PolicyArg {
    Seeded,
    Roundrobin,
    Maxindex,
    Antilearner,
}

impl PolicyArg {
    fn policy(self) -> Policy {
        match self {
            PolicyArg::Seeded => Policy::Seeded,
            PolicyArg::Roundrobin => Policy::RoundRobin,
            PolicyArg::Maxindex => Policy::MaxIndex,
            PolicyArg::Antilearner => Policy::AntiLearner,
        }
    }
}

fn oracle_kind(o: OracleArg, p: PolicyArg) -> OracleKind {
    match o {
        OracleArg::Lex => OracleKind::Lexicographic,
        OracleArg::Adv => OracleKind::Adversarial(p.policy()),
    }
}

#[derive(Args, Serialize)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Actions per player for multiplayer games.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    players: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    x: f64,
    #[arg(long, default_value_t = 0.5)]
    y: f64,
    /// Rows copied onto other rows of a UEPP.
    #[arg(long, default_value_t = 0)]
    duplicates: usize,
    /// Dominated rows of a UEPP.
    #[arg(long, default_value_t = 0)]
    empty: usize,
    /// Explicit row payoffs as a JSON matrix; needs --b.
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct LearnArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Cdgbs)]
    algo: Algo,
    #[arg(long, value_enum, default_value_t = OracleArg::Lex)]
    oracle: OracleArg,
    #[arg(long, value_enum, default_value_t = PolicyArg::Seeded)]
    policy: PolicyArg,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget: Option<u64>,
    /// Labelling JSON; the manifest goes next to it.
    #[arg(long)]
    out: PathBuf,
    /// Query transcript as JSON lines.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Seeded)]
    policy: PolicyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget: Option<u64>,
    /// Expected player count; checked against the instance.
    #[arg(long)]
    players: Option<usize>,
    /// Grid halvings past the default resolution.
    #[arg(long, default_value_t = 3)]
    refinements: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Lbgame,
    Uepp,
    Bimatrix,
    Multi,
}

#[derive(Args, Serialize)]
struct BenchArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Algo::Cdgbs)]
    algo: Algo,
    #[arg(long, value_enum, default_value_t = OracleArg::Lex)]
    oracle: OracleArg,
    #[arg(long, value_enum, default_value_t = PolicyArg::Seeded)]
    policy: PolicyArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit codes: 1 rejected or I/O, 2 invalid input, 3 budget, 4 search failure.
enum Fail {
    Rejected(String),
    Io(String),
    Invalid(String),
    Budget,
    Search(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Rejected(_) | Fail::Io(_) => 1,
            Fail::Invalid(_) => 2,
            Fail::Budget => 3,
            Fail::Search(_) => 4,
        }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExhausted => Fail::Budget,
            Error::FixedPointNotFound(r) => {
                Fail::Search(format!("fixed point not found at resolution {r:e}; retry with a larger --refinements"))
            }
            Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::OutsideSimplex(_) => {
                Fail::Invalid(e.to_string())
            }
            other => Fail::Rejected(other.to_string()),
        }
    }
}

type Out<T> = std::result::Result<T, Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(&a),
        Cmd::Learn(a) => cmd_learn(&a),
        Cmd::Solve(a) => cmd_solve(&a),
        Cmd::Bench(a) => cmd_bench(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Fail::Budget => eprintln!("error: query budget exhausted"),
                Fail::Rejected(s) | Fail::Io(s) | Fail::Invalid(s) | Fail::Search(s) => eprintln!("error: {s}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a sibling temp file so a failed run never leaves half a file behind.
fn write_atomic(path: &Path, body: &str) -> Out<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, body).map_err(|e| Fail::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| Fail::Io(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Out<(Value, String)> {
    let text = fs::read_to_string(path).map_err(|e| Fail::Invalid(format!("{}: {e}", path.display())))?;
    let v = serde_json::from_str(&text).map_err(|e| Fail::Invalid(format!("{}: {e}", path.display())))?;
    Ok((v, digest(text.as_bytes())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value) -> Out<T> {
    serde_json::from_value(v).map_err(|e| Fail::Invalid(e.to_string()))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data") + "\n"
}

fn manifest(command: &str, config: &impl Serialize, input_digest: &str, body: Value) -> Value {
    json!({
        "tool": "polylearn",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "input_sha256": input_digest,
        "result": body,
    })
}

fn cmd_gen(a: &GenArgs) -> Out<()> {
    let body = match a.kind {
        Kind::Uepp => {
            let opts = UeppOptions { duplicate_rows: a.duplicates, empty_cells: a.empty };
            pretty(&random_uepp(a.m, a.n, a.seed, opts)?)
        }
        Kind::Bimatrix => match (&a.a, &a.b) {
            (Some(ta), Some(tb)) => {
                let ma: Vec<Vec<f64>> = serde_json::from_str(ta).map_err(|e| Fail::Invalid(format!("--a: {e}")))?;
                let mb: Vec<Vec<f64>> = serde_json::from_str(tb).map_err(|e| Fail::Invalid(format!("--b: {e}")))?;
                pretty(&BimatrixGame::new(ma, mb)?)
            }
            (None, None) => pretty(&bimatrix::random_game(a.m, a.n, a.seed)?),
            _ => return Err(Fail::Invalid("--a and --b go together".into())),
        },
        Kind::Lbgame => pretty(&lower_bound_game(a.x, a.y)?),
        Kind::Multi => pretty(&multiplayer::random_game(a.players, a.k, a.seed)?),
        Kind::Jordan => pretty(&jordan_game()),
    };
    let d = digest(body.as_bytes());
    match &a.out {
        Some(path) => {
            write_atomic(path, &body)?;
            println!("sha256:{d} {}", path.display());
        }
        None => {
            print!("{body}");
            eprintln!("sha256:{d}");
        }
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn cmd_learn(a: &LearnArgs) -> Out<()> {
    if !(a.eps > 0.0) {
        return Err(Fail::Invalid("--eps must be positive".into()));
    }
    let (v, input_digest) = read_json(&a.input)?;
    let u: Uepp = parse(v)?;
    let (m, n) = (u.m(), u.n());
    let src: Arc<dyn LabelSource> = Arc::new(u);
    let kind = oracle_kind(a.oracle, a.policy);
    let mut oracle = make_oracle(src, kind, a.seed);
    if let Some(b) = a.budget {
        oracle = oracle.with_budget(b);
    }
    if a.transcript.is_some() {
        oracle = oracle.with_transcript();
    }
    let adv = kind.is_adversarial();
    let start = Instant::now();
    let (lab, stats): (EmpiricalLabelling, Value) = match a.algo {
        Algo::Cdgbs => {
            let cfg = GbsConfig::new(m, n, a.eps).seed(a.seed);
            let run = if adv { cd_gbs_adversarial(&cfg, &mut oracle)? } else { cd_gbs(&cfg, &mut oracle)? };
            (run.labelling, serde_json::to_value(&run.stats).expect("plain data"))
        }
        Algo::Crgbs => {
            let cfg = CrConfig::new(m, n, a.eps).adversarial(adv).seed(a.seed);
            let run = cr_gbs(&cfg, &mut oracle)?;
            (run.labelling, serde_json::to_value(&run.stats).expect("plain data"))
        }
    };
    let wall_ms = start.elapsed().as_millis();
    let report = lab.is_eps_close(&VPolytope::simplex(m), a.eps);
    let body = json!({
        "queries": oracle.log().count(),
        "wall_ms": wall_ms,
        "merges": lab.merges(),
        "stats": stats,
        "coverage": report,
    });
    write_atomic(&a.out, &pretty(&lab))?;
    write_atomic(&manifest_path(&a.out), &pretty(&manifest("learn", a, &input_digest, body)))?;
    if let Some(t) = &a.transcript {
        write_atomic(t, &oracle.log().to_json_lines())?;
    }
    println!("queries {} eps_close {}", oracle.log().count(), report.is_close);
    if report.is_close {
        Ok(())
    } else {
        Err(Fail::Rejected(format!("labelling is not {}-close", a.eps)))
    }
}

fn cmd_solve(a: &SolveArgs) -> Out<()> {
    if !(a.eps > 0.0) {
        return Err(Fail::Invalid("--eps must be positive".into()));
    }
    let (v, input_digest) = read_json(&a.input)?;
    let (cert, valid) = if v.get("A").is_some() {
        if a.players.is_some_and(|p| p != 2) {
            return Err(Fail::Invalid("bimatrix instances have two players".into()));
        }
        let g: BimatrixGame = parse(v)?;
        solve_bimatrix(&g, a)?
    } else {
        let g: NormalFormGame = parse(v)?;
        if a.players.is_some_and(|p| p != g.players()) {
            return Err(Fail::Invalid(format!("instance has {} players", g.players())));
        }
        solve_multi(&g, a)?
    };
    let out = manifest("solve", a, &input_digest, cert);
    match &a.out {
        Some(p) => write_atomic(p, &pretty(&out))?,
        None => print!("{}", pretty(&out)),
    }
    if valid {
        Ok(())
    } else {
        Err(Fail::Rejected("certificate failed verification".into()))
    }
}

fn audit(before: u64, after: u64) -> Out<()> {
    if after != before {
        return Err(Fail::Rejected(format!("payoff audit: {} reads on the query path", after - before)));
    }
    Ok(())
}

fn solve_bimatrix(g: &BimatrixGame, a: &SolveArgs) -> Out<(Value, bool)> {
    let kind = OracleKind::Adversarial(a.policy.policy());
    let mut ro = br_oracle(g, Side::Row, kind, a.seed);
    let mut co = br_oracle(g, Side::Column, kind, a.seed ^ 0x5eed);
    if let Some(b) = a.budget {
        ro = ro.with_budget(b);
        co = co.with_budget(b);
    }
    let cfg = SolveConfig { eps: a.eps, seed: a.seed, extra_refinements: a.refinements, ..SolveConfig::new(a.eps) };
    let reads = g.payoff_reads();
    let sol = solve_wsne(&mut ro, &mut co, &cfg)?;
    audit(reads, g.payoff_reads())?;
    let cert = verify_wsne(g, &sol.u, &sol.v, a.eps)?;
    let body = json!({
        "profile": { "u": sol.u, "v": sol.v, "row": full(&sol.u), "col": full(&sol.v) },
        "certificate": cert,
        "queries": { "row": sol.row_queries, "col": sol.col_queries, "total": sol.row_queries + sol.col_queries },
        "resolution": sol.resolution,
    });
    Ok((body, cert.valid))
}

fn solve_multi(g: &NormalFormGame, a: &SolveArgs) -> Out<(Value, bool)> {
    let kind = OracleKind::Adversarial(a.policy.policy());
    let mut os: Vec<MultiBrOracle> = (0..g.players())
        .map(|i| {
            let o = multi_br_oracle(g, i, kind, a.seed ^ i as u64)?;
            Ok(match a.budget {
                Some(b) => o.with_budget(b),
                None => o,
            })
        })
        .collect::<polylearn::error::Result<_>>()?;
    let reads = g.payoff_reads();
    let labs = learn_multiplayer_labellings(&mut os, a.eps)?;
    let sol = solve_wsne_multiplayer(&labs, a.eps, a.refinements)?;
    audit(reads, g.payoff_reads())?;
    let cert = verify_wsne_multiplayer(g, &sol.profile, a.eps)?;
    let queries: Vec<u64> = os.iter().map(MultiBrOracle::queries).collect();
    let body = json!({
        "profile": sol.profile,
        "certificate": cert,
        "queries": { "per_player": queries, "total": queries.iter().sum::<u64>() },
        "resolution": sol.resolution,
    });
    Ok((body, cert.valid))
}

#[derive(Serialize)]
struct Row {
    family: &'static str,
    m: usize,
    n: usize,
    eps: f64,
    seed: u64,
    queries: u64,
    wall_ms: u128,
    verified: bool,
}

const HEADER: [&str; 8] = ["family", "m", "n", "eps", "seed", "queries", "wall_ms", "verified"];

fn bench_row(a: &BenchArgs, eps: f64, seed: u64) -> (Row, bool) {
    let start = Instant::now();
    let res: polylearn::error::Result<(usize, usize, u64, bool)> = (|| match a.family {
        Family::Lbgame => {
            let g = random_lower_bound_game(seed)?;
            let kind = OracleKind::Adversarial(a.policy.policy());
            let mut ro = br_oracle(&g, Side::Row, kind, seed);
            let mut co = br_oracle(&g, Side::Column, kind, seed ^ 0x5eed);
            let sol = solve_wsne(&mut ro, &mut co, &SolveConfig { seed, ..SolveConfig::new(eps) })?;
            let ok = verify_wsne(&g, &sol.u, &sol.v, eps)?.valid;
            Ok((2, 2, sol.row_queries + sol.col_queries, ok))
        }
        Family::Bimatrix => {
            let g = bimatrix::random_game(a.m, a.n, seed)?;
            let kind = OracleKind::Adversarial(a.policy.policy());
            let mut ro = br_oracle(&g, Side::Row, kind, seed);
            let mut co = br_oracle(&g, Side::Column, kind, seed ^ 0x5eed);
            let sol = solve_wsne(&mut ro, &mut co, &SolveConfig { seed, ..SolveConfig::new(eps) })?;
            let ok = verify_wsne(&g, &sol.u, &sol.v, eps)?.valid;
            Ok((a.m, a.n, sol.row_queries + sol.col_queries, ok))
        }
        Family::Uepp => {
            let u = random_uepp(a.m, a.n, seed, UeppOptions::default())?;
            let src: Arc<dyn LabelSource> = Arc::new(u);
            let kind = oracle_kind(a.oracle, a.policy);
            let mut o = make_oracle(src, kind, seed);
            let adv = kind.is_adversarial();
            let lab = match a.algo {
                Algo::Cdgbs => {
                    let cfg = GbsConfig::new(a.m, a.n, eps).seed(seed);
                    if adv { cd_gbs_adversarial(&cfg, &mut o)? } else { cd_gbs(&cfg, &mut o)? }.labelling
                }
                Algo::Crgbs => cr_gbs(&CrConfig::new(a.m, a.n, eps).adversarial(adv).seed(seed), &mut o)?.labelling,
            };
            let ok = lab.is_eps_close(&VPolytope::simplex(a.m), eps).is_close;
            Ok((a.m, a.n, o.log().count(), ok))
        }
        Family::Multi => {
            let g = multiplayer::random_game(a.m, a.n, seed)?;
            let kind = OracleKind::Adversarial(a.policy.policy());
            let mut os =
                (0..a.m).map(|i| multi_br_oracle(&g, i, kind, seed ^ i as u64)).collect::<Result<Vec<_>, _>>()?;
            let labs = learn_multiplayer_labellings(&mut os, eps)?;
            let sol = solve_wsne_multiplayer(&labs, eps, 2)?;
            let ok = verify_wsne_multiplayer(&g, &sol.profile, eps)?.valid;
            Ok((a.m, a.n, os.iter().map(MultiBrOracle::queries).sum(), ok))
        }
    })();
    let wall_ms = start.elapsed().as_millis();
    let family = match a.family {
        Family::Lbgame => "lbgame",
        Family::Uepp => "uepp",
        Family::Bimatrix => "bimatrix",
        Family::Multi => "multi",
    };
    match res {
        Ok((m, n, queries, verified)) => (Row { family, m, n, eps, seed, queries, wall_ms, verified }, true),
        Err(e) => {
            eprintln!("row eps={eps} seed={seed}: {e}");
            (Row { family, m: a.m, n: a.n, eps, seed, queries: 0, wall_ms, verified: false }, false)
        }
    }
}

fn cmd_bench(a: &BenchArgs) -> Out<()> {
    if a.eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Fail::Invalid("every --eps must be positive".into()));
    }
    let jobs: Vec<(f64, u64)> = a.eps.iter().flat_map(|&e| a.seeds.iter().map(move |&s| (e, s))).collect();
    let rows: Vec<(Row, bool)> = jobs.par_iter().map(|&(e, s)| bench_row(a, e, s)).collect();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(HEADER).map_err(|e| Fail::Io(e.to_string()))?;
    for (r, _) in &rows {
        w.serialize(r).map_err(|e| Fail::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Fail::Io(e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    match &a.out {
        Some(p) => write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    if rows.is_empty() || rows.iter().any(|r| r.1) {
        Ok(())
    } else {
        Err(Fail::Rejected("every row failed".into()))
    }
}
