//! Command-line front end. JSON is the canonical output; `--csv` writes a
//! mirror where one exists. Exit codes: 0 success, 1 usage or other error,
//! 2 precision failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num::{BigInt, BigRational, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::contfrac::{convergent_table_csv, convergents, expand};
use crate::equidist::{equidist_verdict, smoothness_obstruction, weyl_table_csv};
use crate::error::{Error, Result};
use crate::exceptional::{basis_check, construct_exceptional, verify_conditions, ExceptionalAlphaPlan};
use crate::higherdeg::{family_trichotomy, gamma_construct, verify_highdeg_witness, AffineFamilySpec};
use crate::obstruction::{certify, verify_certificate, ObstructionCertificate, VerificationOutcome};
use crate::realkernel::RealDescriptor;
use crate::recurrence::{enumerate, members_csv, parse_rat, EpsilonSchedule, RecurrenceSetSpec};
use crate::sumset::{report_csv, report_from_members, sumset_bitmap};
use crate::witnesses::{
    badapprox_witnesses, generic_witnesses, pell_witnesses_sqrt2, pell_witnesses_surd, WitnessOptions, WitnessRecord,
};

#[derive(Parser, Debug)]
#[command(name = "recbases", version, about = "Sumsets of Bohr-type recurrence sets {n : ||p(n)|| <= eps(n)}")]
struct Cli {
    /// JSON object whose keys override the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the CSV mirror here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Continued-fraction digits.
    Expand(ExpandArgs),
    /// Convergents p_n/q_n with error terms.
    Convergents(ConvergentsArgs),
    /// Explicit complement witnesses with certificates.
    Witnesses(WitnessArgs),
    /// Best obstruction certificate for one N.
    Certify(CertifyArgs),
    /// The set A and its k-fold sumset.
    Sumset(SumsetArgs),
    /// [0, T] minus kA, with gap statistics.
    Complement(SumsetArgs),
    /// Build and check the exceptional alpha.
    Exceptional(ExceptionalArgs),
    /// Weyl-sum verdict or smoothness-norm scan.
    Equidist(EquidistArgs),
    /// Nested-interval construction for degree d.
    Gamma(GammaArgs),
    /// Classify an affine family of polynomials.
    Trichotomy(TrichotomyArgs),
    /// Re-check a certificate JSON file.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct ExpandArgs {
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 20)]
    count: usize,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct ConvergentsArgs {
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 10)]
    upto: usize,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct WitnessArgs {
    #[arg(long)]
    alpha: Option<String>,
    /// pell | badapprox | generic
    #[arg(long, default_value = "pell")]
    family: String,
    #[arg(long, default_value_t = 3)]
    count: usize,
    #[arg(long, default_value = "1000")]
    digit_bound: String,
    /// Repeated digit for the generic family (odd, >= 3).
    #[arg(long = "A", default_value_t = 3)]
    #[serde(rename = "A")]
    a: u64,
    #[arg(long, default_value_t = 1000)]
    scan_limit: usize,
    #[arg(long, default_value_t = crate::witnesses::DEFAULT_FLOOR)]
    floor: u64,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct CertifyArgs {
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<String>,
    #[arg(long, default_value_t = 16)]
    k_max: u64,
    /// Brute-force confirmation (at eps0_max/2) when N is at most this.
    #[arg(long, default_value_t = 100_000)]
    t_check: u64,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct SumsetArgs {
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 2)]
    degree: u32,
    #[arg(long, default_value = "const:0.1")]
    eps: String,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long = "T", default_value_t = 10_000)]
    #[serde(rename = "T")]
    t: u64,
    /// Also write the kA bitset to this file.
    #[arg(long)]
    bitset_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct ExceptionalArgs {
    /// Plan parameters such as `2=8:1,3=8:1,h=4:4`.
    #[arg(long, default_value = "")]
    plan: String,
    /// Plan as a JSON file (takes precedence over --plan).
    #[arg(long)]
    plan_file: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    p: u64,
    /// Run the basis check at this eps0 ...
    #[arg(long)]
    eps: Option<String>,
    /// ... up to this T.
    #[arg(long = "T", default_value_t = 10_000)]
    #[serde(rename = "T")]
    t: u64,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct EquidistArgs {
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Extra coordinates `degree=descriptor`.
    #[arg(long)]
    term: Vec<String>,
    #[arg(long = "N", default_value_t = 1000)]
    #[serde(rename = "N")]
    n: u64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 8)]
    freq_cap: i64,
    /// Scan k p(n) + l p(N - n) for |k|, |l| <= range instead.
    #[arg(long)]
    smoothness: bool,
    #[arg(long, default_value_t = 4)]
    range: i64,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct GammaArgs {
    #[arg(long, default_value_t = 3)]
    d: u32,
    #[arg(long, default_value = "11")]
    n1: String,
    #[arg(long, default_value = "4")]
    ratio: String,
    #[arg(long, default_value = "0101")]
    bits: String,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Brute-force check of N_1 at this eps0.
    #[arg(long)]
    verify_eps: Option<String>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct TrichotomyArgs {
    /// Family JSON, inline (starting with `{`) or a path.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct VerifyArgs {
    #[arg(long)]
    cert: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    t_check: u64,
    /// Defaults to eps0_max / 2.
    #[arg(long)]
    eps: Option<String>,
}

struct Output {
    json: Value,
    csv: Option<String>,
    summary: String,
    code: i32,
}

impl Output {
    fn new(json: Value, summary: String) -> Self {
        Output { json, csv: None, summary, code: 0 }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| usage(format!("cli: --{name} is required")))
}

fn alpha_of(v: &Option<String>) -> Result<RealDescriptor> {
    need(v, "alpha")?.parse()
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serialises")
}

/// Overlay `config` keys onto the parsed flags.
fn merge<T: Serialize + DeserializeOwned>(args: T, config: &Option<Value>) -> Result<T> {
    let Some(Value::Object(cfg)) = config else { return Ok(args) };
    let mut v = to_json(&args);
    if let Value::Object(m) = &mut v {
        for (k, x) in cfg {
            if !m.contains_key(k) {
                return Err(usage(format!("cli: unknown config key {k:?}")));
            }
            m.insert(k.clone(), x.clone());
        }
    }
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("cli: config: {e}")))
}

fn witness_csv(ws: &[WitnessRecord]) -> String {
    let mut s = String::from("N,k,m,eps0_max\n");
    for w in ws {
        s.push_str(&format!("{},{},{},{:.6}\n", w.n, w.certificate.k, w.certificate.m, w.certificate.eps0_max_f64()));
    }
    s
}

fn cmd_expand(a: ExpandArgs) -> Result<Output> {
    let x = alpha_of(&a.alpha)?;
    let cf = expand(&x, a.count)?;
    let digits: Vec<String> = std::iter::once(&cf.a0).chain(&cf.digits).map(|d| d.to_string()).collect();
    let summary = format!("{cf}{}", if cf.terminated { " (terminated)" } else { "" });
    Ok(Output::new(
        json!({"alpha": x.to_string(), "cf": cf.to_string(), "digits": digits,
               "terminated": cf.terminated, "period": cf.period}),
        summary,
    ))
}

fn cmd_convergents(a: ConvergentsArgs) -> Result<Output> {
    let x = alpha_of(&a.alpha)?;
    let cf = expand(&x, a.upto + 1)?;
    let upto = a.upto.min(cf.len() - 1);
    let conv = convergents(&cf, upto)?;
    let mut out = Output::new(
        json!({"alpha": x.to_string(), "convergents": conv}),
        format!("{} convergents of {x}", conv.len()),
    );
    out.csv = Some(convergent_table_csv(&x, upto)?);
    Ok(out)
}

fn cmd_witnesses(a: WitnessArgs) -> Result<Output> {
    let x = alpha_of(&a.alpha)?;
    let opts = WitnessOptions { floor: a.floor };
    let ws = match a.family.as_str() {
        "pell" => {
            let q = x.exact().ok_or_else(|| usage("cli: the pell family needs a quadratic surd"))?;
            if q == crate::realkernel::QuadSurd::sqrt(BigInt::from(2)) {
                pell_witnesses_sqrt2(a.count, &opts)?
            } else {
                pell_witnesses_surd(&q, a.count, &opts)?
            }
        }
        "badapprox" => {
            let bound: BigInt = a.digit_bound.parse().map_err(|_| usage("cli: bad --digit-bound"))?;
            badapprox_witnesses(&x, a.count, &bound, &opts)?
        }
        "generic" => generic_witnesses(&x, a.a, a.count, a.scan_limit, &opts)?,
        other => return Err(usage(format!("cli: unknown family {other:?}"))),
    };
    let ns: Vec<String> = ws.iter().map(|w| w.n.to_string()).collect();
    let mut out = Output::new(
        json!({"alpha": x.to_string(), "family": a.family, "witnesses": ws}),
        format!("{} witnesses: {}", ws.len(), ns.join(", ")),
    );
    out.csv = Some(witness_csv(&ws));
    Ok(out)
}

fn cmd_certify(a: CertifyArgs) -> Result<Output> {
    let x = alpha_of(&a.alpha)?;
    let n: BigInt = need(&a.n, "N")?.parse().map_err(|_| usage("cli: bad --N"))?;
    let Some(cert) = certify(&x, &n, a.k_max)? else {
        return Ok(Output::new(json!({"certificate": null}), format!("no certificate for N = {n} with k <= {}", a.k_max)));
    };
    let eps = &cert.eps0_max / BigInt::from(2);
    let outcome = verify_certificate(&cert, a.t_check, &eps)?;
    let tag = if outcome == VerificationOutcome::AlgebraAndBruteForce { "brute" } else { "algebra" };
    let mut out = Output::new(
        json!({"certificate": cert.to_json(tag), "outcome": outcome}),
        format!("N = {n}: k = {}, m = {}, eps0_max = {:.6} ({tag})", cert.k, cert.m, cert.eps0_max_f64()),
    );
    if outcome.is_refuted() {
        out.code = 1;
    }
    Ok(out)
}

fn sumset_spec(a: &SumsetArgs) -> Result<RecurrenceSetSpec> {
    let x = alpha_of(&a.alpha)?;
    let sched: EpsilonSchedule = a.eps.parse()?;
    RecurrenceSetSpec::new(vec![(a.degree, x)], sched)
}

fn cmd_sumset(a: SumsetArgs) -> Result<Output> {
    let spec = sumset_spec(&a)?;
    let members = enumerate(&spec, a.t)?;
    let sum = sumset_bitmap(&members, a.k)?;
    if let Some(p) = &a.bitset_out {
        sum.write_file(p, &format!("{}A {}", a.k, serde_json::to_string(&spec).unwrap_or_default()))?;
    }
    let (na, nk) = (members.count_ones(), sum.count_ones());
    let mut out = Output::new(
        json!({"spec": spec, "k": a.k, "T": a.t, "A_count": na, "kA_count": nk,
               "A_density": na as f64 / (a.t + 1) as f64, "kA_density": nk as f64 / (a.t + 1) as f64}),
        format!("|A| = {na}, |{}A| = {nk} in [0, {}]", a.k, a.t),
    );
    out.csv = Some(members_csv(&members));
    Ok(out)
}

fn cmd_complement(a: SumsetArgs) -> Result<Output> {
    let spec = sumset_spec(&a)?;
    let members = enumerate(&spec, a.t)?;
    let rep = report_from_members(Some(spec), &members, a.k)?;
    if let Some(p) = &a.bitset_out {
        sumset_bitmap(&members, a.k)?.write_file(p, &format!("{}A", a.k))?;
    }
    let shown: Vec<String> = rep.complement.iter().take(40).map(|n| n.to_string()).collect();
    let more = if rep.complement.len() > 40 { ", ..." } else { "" };
    let mut out = Output::new(
        to_json(&rep),
        format!("{} elements outside {}A in [0, {}]: {}{more}", rep.complement.len(), a.k, a.t, shown.join(", ")),
    );
    out.csv = Some(report_csv(&rep));
    Ok(out)
}

fn cmd_exceptional(a: ExceptionalArgs) -> Result<Output> {
    let plan: ExceptionalAlphaPlan = match &a.plan_file {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?).map_err(|e| Error::Parse(format!("cli: plan: {e}")))?,
        None => ExceptionalAlphaPlan::from_params(&a.plan)?,
    };
    plan.validate()?;
    let alpha = construct_exceptional(&plan, a.count)?;
    let cond = verify_conditions(&alpha, a.count, a.p, Some(&plan))?;
    let mut j = json!({"plan": plan, "digits": alpha.to_string(), "conditions": cond});
    let mut summary = format!("conditions on {} digits: {}", a.count, if cond.pass { "pass" } else { "fail" });
    if let Some(e) = &a.eps {
        let eps = parse_rat(e)?;
        let stream = crate::exceptional::exceptional_stream(plan.clone())?;
        let rep = basis_check(&stream, &eps, a.t)?;
        summary.push_str(&format!("; complement of 2A in [1, {}]: {} elements, largest {:?}", a.t, rep.complement.len(), rep.largest));
        j["basis"] = to_json(&rep);
    }
    Ok(Output::new(j, summary))
}

fn parse_term(s: &str) -> Result<(u32, RealDescriptor)> {
    let (d, x) = s.split_once('=').ok_or_else(|| usage(format!("cli: term {s:?} is not degree=descriptor")))?;
    let d = d.trim().parse().map_err(|_| usage(format!("cli: bad degree {d:?}")))?;
    Ok((d, x.parse()?))
}

fn cmd_equidist(a: EquidistArgs) -> Result<Output> {
    let mut poly = vec![(a.degree, alpha_of(&a.alpha)?)];
    for t in &a.term {
        poly.push(parse_term(t)?);
    }
    if a.smoothness {
        let scan = smoothness_obstruction(&poly, a.n, -a.range..=a.range, -a.range..=a.range)?;
        let best = scan.first().map(|s| format!("(k, l) = ({}, {}), norm {:.6}", s.k, s.l, s.value_nonconstant));
        return Ok(Output::new(json!({"N": a.n, "norms": scan}), format!("smallest: {}", best.unwrap_or_default())));
    }
    let v = equidist_verdict(&poly, a.n, a.delta, a.freq_cap)?;
    let mut out = Output::new(json!({"N": a.n, "delta": a.delta, "verdict": v}), format!("{v:?}"));
    out.csv = Some(weyl_table_csv(&poly, a.n, a.freq_cap)?);
    Ok(out)
}

fn cmd_gamma(a: GammaArgs) -> Result<Output> {
    let n1: BigInt = a.n1.parse().map_err(|_| usage("cli: bad --n1"))?;
    let ratio: BigRational = parse_rat(&a.ratio)?;
    let g = gamma_construct(a.d, n1, ratio, &a.bits, a.levels)?;
    let mut j = to_json(&g);
    j["levels_hold"] = json!(g.check());
    let mut summary = format!("N_i = {:?}", g.n_sequence.iter().map(|n| n.to_string()).collect::<Vec<_>>());
    if let Some(e) = &a.verify_eps {
        let eps = parse_rat(e)?;
        let rep = verify_highdeg_witness(&g.alpha, &g.n_sequence[0], a.d, &eps)?;
        summary.push_str(&format!("; N_1 at eps0 = {e}: {:?}", rep.outcome));
        j["verification"] = to_json(&rep);
    }
    Ok(Output::new(j, summary))
}

fn cmd_trichotomy(a: TrichotomyArgs) -> Result<Output> {
    let src = need(&a.family, "family")?;
    let text = if src.trim_start().starts_with('{') { src } else { std::fs::read_to_string(&src)? };
    let fam: AffineFamilySpec = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("cli: family: {e}")))?;
    fam.validate()?;
    let t = family_trichotomy(&fam);
    Ok(Output::new(json!({"family": fam, "trichotomy": t, "exact_rank": fam.exact_rank()}), format!("{t:?}")))
}

fn cmd_verify(a: VerifyArgs) -> Result<Output> {
    let path = need(&a.cert, "cert")?;
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path)?).map_err(|e| Error::Parse(format!("cli: {e}")))?;
    let v = v.get("certificate").cloned().unwrap_or(v);
    let cert = ObstructionCertificate::from_json(&v)?;
    let eps = match &a.eps {
        Some(e) => parse_rat(e)?,
        None => &cert.eps0_max / BigInt::from(2),
    };
    let outcome = verify_certificate(&cert, a.t_check, &eps)?;
    let mut out = Output::new(
        json!({"N": cert.n.to_string(), "eps0": eps.to_f64(), "outcome": outcome}),
        format!("{outcome:?}"),
    );
    if outcome.is_refuted() {
        out.code = 1;
    }
    Ok(out)
}

fn execute(cli: Cli) -> Result<Output> {
    let config = match &cli.config {
        Some(p) => Some(
            serde_json::from_str::<Value>(&std::fs::read_to_string(p)?)
                .map_err(|e| Error::Parse(format!("cli: config: {e}")))?,
        ),
        None => None,
    };
    if let Some(n) = cli.threads {
        // a pool may already exist when run() is called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.cmd {
        Command::Expand(a) => cmd_expand(merge(a, &config)?),
        Command::Convergents(a) => cmd_convergents(merge(a, &config)?),
        Command::Witnesses(a) => cmd_witnesses(merge(a, &config)?),
        Command::Certify(a) => cmd_certify(merge(a, &config)?),
        Command::Sumset(a) => cmd_sumset(merge(a, &config)?),
        Command::Complement(a) => cmd_complement(merge(a, &config)?),
        Command::Exceptional(a) => cmd_exceptional(merge(a, &config)?),
        Command::Equidist(a) => cmd_equidist(merge(a, &config)?),
        Command::Gamma(a) => cmd_gamma(merge(a, &config)?),
        Command::Trichotomy(a) => cmd_trichotomy(merge(a, &config)?),
        Command::Verify(a) => cmd_verify(merge(a, &config)?),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_precision() {
        2
    } else {
        1
    }
}

/// Runs one invocation; `args[0]` is the program name.
pub fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (out_path, csv_path) = (cli.out.clone(), cli.csv.clone());
    let out = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = serde_json::to_string_pretty(&out.json).expect("json") + "\n";
    let written = match &out_path {
        Some(p) => std::fs::write(p, &text).map(|_| eprintln!("{}", out.summary)),
        None => {
            print!("{text}");
            eprintln!("{}", out.summary);
            Ok(())
        }
    };
    let written = written.and_then(|_| match (&csv_path, &out.csv) {
        (Some(p), Some(c)) => std::fs::write(p, c),
        (Some(_), None) => {
            eprintln!("note: this command has no CSV form");
            Ok(())
        }
        _ => Ok(()),
    });
    if let Err(e) = written {
        eprintln!("error: {}", Error::from(e));
        return 1;
    }
    out.code
}
