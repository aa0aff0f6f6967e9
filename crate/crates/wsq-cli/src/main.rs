//! `wsq` — weight-sequence calculus CLI.
//!
//! Exit codes: 0 ok, 1 reference-table mismatch, 2 parse/usage error,
//! 3 horizon or blocking-inconclusive error.

use std::io::Write;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use wsq::conditions::{equivalence, inclusion};
use wsq::constructor::{build_from_growth_control, prescribe_gamma, GrowthControl, NodeSeq};
use wsq::report;
use wsq::sequences::parse_spec;
use wsq::WsqError;

#[derive(Parser)]
#[command(name = "wsq", version, about = "Weight-sequence calculus: condition checkers, growth indices, associated functions, and Stieltjes moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Sequence spec, e.g. `gevrey:alpha=2`, `qgevrey:q=2,sigma=3|tilde`,
    /// `file:seq.csv`
    #[arg(long)]
    seq: String,
    /// Truncation (default 2048, or WSQ_PMAX_DEFAULT)
    #[arg(long)]
    pmax: Option<usize>,
    /// Write output to a file instead of stdout
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Full condition/index/target report for a sequence
    Classify {
        #[command(flatten)]
        common: Common,
        /// Emit JSON (default: human-readable summary)
        #[arg(long)]
        json: bool,
    },
    /// Associated functions h_M and omega_M on a t-grid (CSV)
    Assoc {
        #[command(flatten)]
        common: Common,
        /// Grid `a:b:n` (n points from a to b inclusive)
        #[arg(long, value_name = "a:b:n")]
        t_grid: String,
    },
    /// Stieltjes moments of the kernel surrogate e(x) = h_M(1/x)
    Moments {
        #[command(flatten)]
        common: Common,
        /// Moment range `lo..hi`
        #[arg(long, default_value = "0..40")]
        p: String,
        /// Relative tail tolerance
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
        #[arg(long)]
        json: bool,
    },
    /// Build a piecewise-constant-quotient sequence (CSV `p,log_m_p`)
    Construct {
        /// Growth control, e.g. `exp-pow:H=2`, `double-exp:H=1.3`, `poly:beta=2`
        #[arg(long)]
        g: String,
        /// Node generator: `factorial`, `recursive`, `geometric:r=2`
        #[arg(long)]
        nodes: String,
        /// Gamma index to prescribe (product with gevrey(beta))
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 4096)]
        pmax: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// The M~ transform: CSV of its quotients plus the M_{+1} comparison
    Tilde {
        #[command(flatten)]
        common: Common,
    },
    /// Theorem-dispatch verdict (injectivity/surjectivity criteria)
    Verdict {
        #[command(flatten)]
        common: Common,
        /// Auxiliary sequence for the hypothesis gates
        #[arg(long)]
        aux_seq: Option<String>,
    },
    /// Reference classification table; exits 1 on any mismatch
    PaperExamples {
        #[arg(long)]
        pmax: Option<usize>,
    },
}

fn default_pmax() -> usize {
    std::env::var("WSQ_PMAX_DEFAULT")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(wsq::conditions::DEFAULT_P)
}

fn emit(out: &Option<String>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).with_context(|| format!("writing {path}"))?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn parse_range(s: &str) -> anyhow::Result<(usize, usize)> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| anyhow!("range must look like 0..40"))?;
    Ok((lo.parse()?, hi.parse()?))
}

fn parse_growth_control(s: &str) -> anyhow::Result<GrowthControl> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let param = |key: &str| -> anyhow::Result<f64> {
        for piece in rest.split(',') {
            if let Some((k, v)) = piece.split_once('=') {
                if k.trim() == key {
                    return Ok(v.trim().parse()?);
                }
            }
        }
        Err(anyhow!("growth control `{s}` missing parameter `{key}`"))
    };
    match name {
        "exp-pow" => Ok(GrowthControl::ExpPow { h: param("H")? }),
        "double-exp" => Ok(GrowthControl::DoubleExp { h: param("H")? }),
        "poly" => Ok(GrowthControl::PolyShift {
            beta: param("beta")?,
        }),
        other => Err(anyhow!("unknown growth control `{other}`")),
    }
}

fn parse_nodes(s: &str) -> anyhow::Result<NodeSeq> {
    match s {
        "factorial" => Ok(NodeSeq::Factorial),
        "recursive" => Ok(NodeSeq::Recursive),
        other => {
            if let Some(rest) = other.strip_prefix("geometric:r=") {
                return Ok(NodeSeq::Geometric { r: rest.parse()? });
            }
            Err(anyhow!("unknown node generator `{other}`"))
        }
    }
}

/// Exit-code mapping per the interface contract.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(w) = err.downcast_ref::<WsqError>() {
        return match w {
            WsqError::Parse(_)
            | WsqError::InvalidParameter { .. }
            | WsqError::NonContiguousTable { .. }
            | WsqError::EmptyTable => 2,
            _ => 3,
        };
    }
    3
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Classify { common, json } => {
            let p = common.pmax.unwrap_or_else(default_pmax);
            let r = report::classify(&common.seq, p)?;
            if json {
                emit(&common.out, &serde_json::to_string_pretty(&r)?)?;
            } else {
                emit(&common.out, &human_summary(&r))?;
            }
            Ok(0)
        }
        Command::Assoc { common, t_grid } => {
            let seq = parse_spec(&common.seq)?;
            let parts: Vec<&str> = t_grid.split(':').collect();
            if parts.len() != 3 {
                return Err(anyhow!("t-grid must be a:b:n"));
            }
            let (a, b, n): (f64, f64, usize) =
                (parts[0].parse()?, parts[1].parse()?, parts[2].parse()?);
            if !(a > 0.0 && b > a && n >= 2) {
                return Err(anyhow!("need 0 < a < b and n >= 2"));
            }
            let mut wtr = String::from("t,log_h,omega,segment\n");
            for i in 0..n {
                let t = a + (b - a) * i as f64 / (n - 1) as f64;
                let e = wsq::assoc::h_of(&seq, t)?;
                let w = wsq::assoc::omega_of(&seq, 1.0 / t)?;
                let seg = e.segment.map(|s| s as i64).unwrap_or(-1);
                wtr.push_str(&format!("{t},{},{w},{seg}\n", e.log_h));
            }
            emit(&common.out, &wtr)?;
            Ok(0)
        }
        Command::Moments {
            common,
            p,
            eps,
            json,
        } => {
            let range = parse_range(&p)?;
            let v = report::moment_rows(&common.seq, range, eps)?;
            if json {
                emit(&common.out, &serde_json::to_string_pretty(&v)?)?;
            } else {
                let mut s = String::from("p,log_mu,lower_log,upper_log,N,tail\n");
                for row in v["moments"].as_array().unwrap() {
                    s.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        row["p"], row["log_mu"], row["lower_log"], row["upper_log"], row["N"],
                        row["tail"]
                    ));
                }
                emit(&common.out, &s)?;
            }
            Ok(0)
        }
        Command::Construct {
            g,
            nodes,
            beta,
            pmax,
            out,
        } => {
            let control = parse_growth_control(&g)?;
            let nodes = parse_nodes(&nodes)?;
            let seq = if beta == 0.0 {
                build_from_growth_control(control, nodes)?
            } else {
                prescribe_gamma(control, nodes, beta)?
            };
            let pmax = pmax.min(seq.horizon());
            let mut s = String::from("p,log_m_p\n");
            for p in 0..=pmax {
                s.push_str(&format!("{p},{}\n", seq.log_quotient(p)?));
            }
            emit(&out, &s)?;
            Ok(0)
        }
        Command::Tilde { common } => {
            let seq = parse_spec(&common.seq)?;
            let t = seq.tilde()?;
            let p = common.pmax.unwrap_or_else(default_pmax).min(t.horizon());
            let shifted = seq.shift(1)?;
            let fwd = inclusion(&shifted, &t, p)?;
            let eq = equivalence(&t, &shifted, p)?;
            let mut s = String::from("p,log_m_p\n");
            for i in 0..=p {
                s.push_str(&format!("{i},{}\n", t.log_quotient(i)?));
            }
            emit(&common.out, &s)?;
            let verdicts = serde_json::json!({
                "schema": report::SCHEMA,
                "m_plus1_subset_tilde": fwd,
                "tilde_equiv_m_plus1": eq,
            });
            eprintln!("{}", serde_json::to_string_pretty(&verdicts)?);
            Ok(0)
        }
        Command::Verdict { common, aux_seq } => {
            let p = common.pmax.unwrap_or_else(default_pmax);
            let v = report::verdict(&common.seq, aux_seq.as_deref(), p)?;
            emit(&common.out, &serde_json::to_string_pretty(&v)?)?;
            Ok(0)
        }
        Command::PaperExamples { pmax } => {
            let p = pmax.unwrap_or_else(default_pmax);
            let t = report::paper_examples(p)?;
            println!("{:<14} {:>4} {:>4} {:>4} {:>4}  result", "sequence", "lc", "mg", "dc", "sm");
            for row in &t.rows {
                let mark = |s: wsq::conditions::Status| match s {
                    wsq::conditions::Status::Holds => "yes",
                    wsq::conditions::Status::Refuted => "no",
                    wsq::conditions::Status::Inconclusive => "?",
                };
                println!(
                    "{:<14} {:>4} {:>4} {:>4} {:>4}  {}",
                    row.label,
                    mark(row.lc),
                    mark(row.got.0),
                    mark(row.got.1),
                    mark(row.got.2),
                    if row.ok { "ok" } else { "MISMATCH" }
                );
            }
            if t.all_match() {
                println!("all rows match the reference classification");
                Ok(0)
            } else {
                for m in &t.mismatches {
                    eprintln!("mismatch: {m}");
                }
                Ok(1)
            }
        }
    }
}

fn human_summary(r: &report::SequenceReport) -> String {
    use wsq::conditions::Status;
    let mark = |s: Status| match s {
        Status::Holds => "holds",
        Status::Refuted => "refuted",
        Status::Inconclusive => "inconclusive",
    };
    let mut s = String::new();
    s.push_str(&format!("sequence  {}\n", r.spec));
    s.push_str(&format!("P = {}, horizon = {}\n", r.p_max, r.horizon));
    let c = &r.conditions;
    s.push_str(&format!(
        "conditions: lc {} | mg {} | dc {} | sm {} | alg {} | nq {} | snq {}\n",
        mark(c.lc.status),
        mark(c.mg.status),
        mark(c.dc.status),
        mark(c.sm.status),
        mark(c.alg.status),
        mark(c.nq.status),
        mark(c.snq.status)
    ));
    let fmt_bracket = |b: &wsq::indices::IndexBracket| {
        if b.infinite {
            "infinite".to_string()
        } else {
            format!("[{:.3}, {:.3}]", b.lower, b.upper)
        }
    };
    s.push_str(&format!(
        "gamma {}  omega {}\n",
        fmt_bracket(&r.gamma),
        fmt_bracket(&r.omega)
    ));
    if let Some(gt) = &r.gamma_tilde {
        s.push_str(&format!("gamma(M~) {}\n", fmt_bracket(gt)));
    }
    s.push_str(&format!(
        "injectivity: {} ({} series)\n",
        mark(r.injectivity.status),
        r.injectivity.series
    ));
    s.push_str(&format!(
        "surjectivity criteria: gamma>2 {} | gamma(M~) infinite {}\n",
        mark(r.surjectivity.gamma_gt_2),
        mark(r.surjectivity.gamma_tilde_infinite)
    ));
    if let Some(t) = &r.target {
        s.push_str(&format!(
            "moment targets: Lambda_M {} | Lambda_M+1 {} | Lambda_M~ {}\n",
            mark(t.fits_lambda_m.status),
            mark(t.fits_lambda_m_plus1.status),
            mark(t.fits_lambda_m_tilde.status)
        ));
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
