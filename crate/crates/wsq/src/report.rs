//! Aggregated per-sequence reports, the reference-example table, and the
//! theorem-dispatch verdict.

use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::conditions::{self, ConditionVerdict, SearchBounds, Status};
use crate::error::{Result, WsqError};
use crate::indices::{self, IndexBracket, IndexConfig, InjectivityReport, SurjectivityReport};
use crate::moments::{self, TargetClassification};
use crate::sequences::{parse_spec, WeightSequence};

pub const SCHEMA: &str = "wsq/1";

#[derive(Debug, Clone, Serialize)]
pub struct ConditionsBlock {
    pub lc: ConditionVerdict,
    pub sm: ConditionVerdict,
    pub dc: ConditionVerdict,
    pub mg: ConditionVerdict,
    pub alg: ConditionVerdict,
    pub nq: ConditionVerdict,
    pub snq: ConditionVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceReport {
    pub schema: &'static str,
    pub spec: String,
    #[serde(rename = "P")]
    pub p_max: usize,
    pub horizon: usize,
    pub conditions: ConditionsBlock,
    pub gamma: IndexBracket,
    pub omega: IndexBracket,
    pub gamma_tilde: Option<IndexBracket>,
    pub injectivity: InjectivityReport,
    pub surjectivity: SurjectivityReport,
    pub target: Option<TargetClassification>,
    pub notes: Vec<String>,
    pub timings_ms: Vec<(String, f64)>,
}

/// Runs every checker and index estimator on the sequence and aggregates
/// the results; aborts on implication-lattice violations.
pub fn classify(spec: &str, p_max: usize) -> Result<SequenceReport> {
    let seq = parse_spec(spec)?;
    classify_sequence(spec, &seq, p_max)
}

pub fn classify_sequence(
    spec: &str,
    seq: &WeightSequence,
    p_max: usize,
) -> Result<SequenceReport> {
    let bounds = SearchBounds::default();
    let cfg = IndexConfig::default();
    let p = p_max.min(seq.horizon());
    let mut timings = Vec::new();
    let timed = |name: &str, t0: Instant, timings: &mut Vec<(String, f64)>| {
        timings.push((name.to_string(), t0.elapsed().as_secs_f64() * 1e3));
    };

    let t0 = Instant::now();
    let lc = conditions::check_lc(seq, p)?;
    let sm = conditions::check_sm(seq, p, &bounds)?;
    let dc = conditions::check_dc(seq, p, &bounds)?;
    let mg = conditions::check_mg(seq, p.min(2048), &bounds)?;
    let alg = conditions::check_alg(seq, p.min(2048))?;
    let nq = conditions::check_nq(seq, p)?;
    let snq = conditions::check_snq(seq, p)?;
    timed("conditions", t0, &mut timings);

    // the implication lattice must hold verdict-wise
    let lattice = [
        (mg.holds() && dc.refuted(), "(mg) holds but (dc) refuted"),
        (dc.holds() && sm.refuted(), "(dc) holds but (sm) refuted"),
        (snq.holds() && nq.refuted(), "(snq) holds but (nq) refuted"),
    ];
    for (violated, msg) in lattice {
        if violated {
            return Err(WsqError::Inconsistent(format!(
                "implication lattice violated for `{spec}`: {msg}"
            )));
        }
    }

    let t0 = Instant::now();
    let is_weight = lc.holds();
    let (gamma, omega, injectivity, surjectivity) = if is_weight {
        let gamma = indices::gamma_index(seq, p, &cfg)?;
        let omega = indices::omega_index(seq, p, &cfg)?;
        let inj = indices::injectivity_test(seq, p)?;
        let surj = indices::surjectivity_test(seq, p, &cfg)?;
        (gamma, omega, inj, surj)
    } else {
        return Err(WsqError::NotLogConvex {
            p: lc.counterexample.as_ref().map(|c| c.p).unwrap_or(0),
            at: f64::NAN,
            prev_p: 0,
            prev: f64::NAN,
        });
    };
    timed("indices", t0, &mut timings);

    let t0 = Instant::now();
    let p_mom = 40.min(seq.horizon().saturating_sub(4));
    let target = if p_mom >= 16 {
        Some(moments::classify_target(seq, p_mom, p, &bounds)?)
    } else {
        None
    };
    timed("moments", t0, &mut timings);

    if let Some(t) = &target {
        if !t.consistent {
            return Err(WsqError::Inconsistent(format!(
                "target classification inconsistent for `{spec}`: {:?}",
                t.inconsistencies
            )));
        }
    }

    let gamma_tilde = surjectivity.gamma_tilde.clone();
    let mut notes = vec![
        "asymptotic verdicts are truncated: holds/refuted are relative to P and the search bounds"
            .to_string(),
        "the asymptotic Borel mapping is never bijective on these classes (gamma <= omega)"
            .to_string(),
    ];
    if seq.offset() != 0.0 {
        notes.push(format!(
            "sequence carries additive log-offset {} (first term is not 1)",
            seq.offset()
        ));
    }

    Ok(SequenceReport {
        schema: SCHEMA,
        spec: spec.to_string(),
        p_max: p,
        horizon: seq.horizon(),
        conditions: ConditionsBlock {
            lc,
            sm,
            dc,
            mg,
            alg,
            nq,
            snq,
        },
        gamma,
        omega,
        gamma_tilde,
        injectivity,
        surjectivity,
        target,
        notes,
        timings_ms: timings,
    })
}

/// JSON with the timing fields stripped, for byte-identical comparisons.
pub fn report_json_deterministic(report: &SequenceReport) -> serde_json::Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timings_ms");
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cell {
    Yes,
    No,
}

impl Cell {
    fn matches(self, s: Status) -> bool {
        match self {
            Cell::Yes => s == Status::Holds,
            Cell::No => s == Status::Refuted,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PaperRow {
    pub label: String,
    pub spec: String,
    pub expected: (Cell, Cell, Cell), // (mg, dc, sm)
    pub got: (Status, Status, Status),
    pub lc: Status,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaperTable {
    pub rows: Vec<PaperRow>,
    pub mismatches: Vec<String>,
}

impl PaperTable {
    pub fn all_match(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// The reference classification table: the (mg)/(dc)/(sm) pattern across
/// the Gevrey family, the two q-Gevrey regimes, the two power regimes, and
/// the rapidly growing q^(p^p).
pub fn paper_examples(p_max: usize) -> Result<PaperTable> {
    use Cell::{No, Yes};
    let cases: [(&str, &str, (Cell, Cell, Cell)); 8] = [
        ("gevrey(0.5)", "gevrey:alpha=0.5", (Yes, Yes, Yes)),
        ("gevrey(1)", "gevrey:alpha=1", (Yes, Yes, Yes)),
        ("gevrey(3)", "gevrey:alpha=3", (Yes, Yes, Yes)),
        ("qgevrey(2,2)", "qgevrey:q=2,sigma=2", (No, Yes, Yes)),
        ("qgevrey(2,3)", "qgevrey:q=2,sigma=3", (No, No, Yes)),
        ("power(1,2)", "power:tau=1,sigma=2", (No, No, Yes)),
        ("power(1,3)", "power:tau=1,sigma=3", (No, No, Yes)),
        ("qpp(2)", "qpp:q=2", (No, No, No)),
    ];
    let bounds = SearchBounds::default();
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for (label, spec, expected) in cases {
        let seq = parse_spec(spec)?;
        let p = p_max.min(seq.horizon());
        let lc = conditions::check_lc(&seq, p)?;
        let mg = conditions::check_mg(&seq, p.min(2048), &bounds)?;
        let dc = conditions::check_dc(&seq, p, &bounds)?;
        let sm = conditions::check_sm(&seq, p, &bounds)?;
        let got = (mg.status, dc.status, sm.status);
        let ok = lc.holds()
            && expected.0.matches(got.0)
            && expected.1.matches(got.1)
            && expected.2.matches(got.2);
        if !ok {
            mismatches.push(format!(
                "{label}: expected (mg,dc,sm) = {:?}, got {:?} (lc {:?})",
                expected, got, lc.status
            ));
        }
        rows.push(PaperRow {
            label: label.to_string(),
            spec: spec.to_string(),
            expected,
            got,
            lc: lc.status,
            ok,
        });
    }
    Ok(PaperTable { rows, mismatches })
}

#[derive(Debug, Clone, Serialize)]
pub struct Conclusion {
    pub statement: String,
    pub conditional: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub schema: &'static str,
    pub spec: String,
    #[serde(rename = "P")]
    pub p_max: usize,
    /// Which target-space branch applies: "lambda_m" under (dc),
    /// "lambda_m_plus1" under (sm), "lambda_m_tilde" otherwise.
    pub branch: String,
    pub sm: ConditionVerdict,
    pub dc: ConditionVerdict,
    pub injectivity: InjectivityReport,
    pub surjectivity: SurjectivityReport,
    pub aux_gates: Option<AuxGates>,
    pub conclusions: Vec<Conclusion>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuxGates {
    pub spec: String,
    pub nq: ConditionVerdict,
    pub hat_lc: ConditionVerdict,
    pub all_hold: bool,
}

/// Theorem-level dispatch: picks the target space from (dc)/(sm), evaluates
/// the injectivity series and the surjectivity criteria, and labels every
/// conclusion whose hypothesis gates are not all verified as conditional.
pub fn verdict(spec: &str, aux_spec: Option<&str>, p_max: usize) -> Result<VerdictReport> {
    let seq = parse_spec(spec)?;
    let bounds = SearchBounds::default();
    let cfg = IndexConfig::default();
    let p = p_max.min(seq.horizon());

    let sm = conditions::check_sm(&seq, p, &bounds)?;
    let dc = conditions::check_dc(&seq, p, &bounds)?;

    let aux_gates = match aux_spec {
        Some(a) => {
            let aux = parse_spec(a)?;
            let ap = p_max.min(aux.horizon());
            let nq = conditions::check_nq(&aux, ap)?;
            let hat = aux.hat()?;
            let hat_lc = conditions::check_lc(&hat, ap.min(hat.horizon()))?;
            let all_hold = nq.holds() && hat_lc.holds();
            Some(AuxGates {
                spec: a.to_string(),
                nq,
                hat_lc,
                all_hold,
            })
        }
        None => None,
    };
    let gates_hold = aux_gates.as_ref().map(|g| g.all_hold).unwrap_or(false);

    let branch = if dc.holds() {
        "lambda_m"
    } else if sm.holds() {
        "lambda_m_plus1"
    } else if sm.refuted() {
        "lambda_m_tilde"
    } else {
        "undetermined"
    };

    // injectivity series lives on m, or on m~ in the M~ branch
    let injectivity = if branch == "lambda_m_tilde" {
        let t = seq.tilde()?;
        indices::injectivity_test(&t, p.min(t.horizon()))?
    } else {
        indices::injectivity_test(&seq, p)?
    };
    let surjectivity = indices::surjectivity_test(&seq, p, &cfg)?;

    let mut conclusions = Vec::new();
    let target = match branch {
        "lambda_m" => "Lambda_{M}",
        "lambda_m_plus1" => "Lambda_{M_+1}",
        "lambda_m_tilde" => "Lambda_{M~}",
        _ => "unresolved",
    };
    conclusions.push(Conclusion {
        statement: format!("moment mapping is well-defined and continuous into {target}"),
        conditional: branch == "undetermined",
    });
    match injectivity.status {
        Status::Holds => conclusions.push(Conclusion {
            statement: format!("moment mapping into {target} is injective (series diverges)"),
            conditional: !gates_hold,
        }),
        Status::Refuted => conclusions.push(Conclusion {
            statement: format!("moment mapping into {target} is not injective (series converges)"),
            conditional: !gates_hold,
        }),
        Status::Inconclusive => conclusions.push(Conclusion {
            statement: "injectivity series undecided at this truncation".into(),
            conditional: true,
        }),
    }
    if branch == "lambda_m_tilde" {
        if surjectivity.gamma_tilde_infinite == Status::Holds {
            conclusions.push(Conclusion {
                statement: format!("gamma(M~) infinite: moment mapping onto {target} is surjective"),
                conditional: !gates_hold,
            });
        }
    } else if surjectivity.gamma_gt_2 == Status::Holds {
        conclusions.push(Conclusion {
            statement: format!("gamma(M) > 2: moment mapping onto {target} is surjective"),
            conditional: !gates_hold,
        });
    }
    conclusions.push(Conclusion {
        statement: "the asymptotic Borel mapping on these classes is never bijective".into(),
        conditional: false,
    });

    Ok(VerdictReport {
        schema: SCHEMA,
        spec: spec.to_string(),
        p_max: p,
        branch: branch.to_string(),
        sm,
        dc,
        injectivity,
        surjectivity,
        aux_gates,
        conclusions,
    })
}

/// Moment-table row used by the CLI.
pub fn moment_rows(spec: &str, p_range: (usize, usize), eps: f64) -> Result<serde_json::Value> {
    let seq = parse_spec(spec)?;
    let kernel = moments::KernelSurrogate::new(seq, 1.0)?;
    let mut rows = Vec::new();
    for p in p_range.0..=p_range.1 {
        let v = moments::moment_exact(&kernel, p, eps)?;
        let (lower, upper) = moments::sandwich_bounds(&kernel, p)?;
        rows.push(json!({
            "p": p,
            "log_mu": v.log_mu,
            "lower_log": lower,
            "upper_log": upper,
            "N": v.terms_used,
            "tail": v.log_tail_bound,
            "converged": v.converged,
        }));
    }
    Ok(json!({ "schema": SCHEMA, "spec": spec, "moments": rows }))
}
