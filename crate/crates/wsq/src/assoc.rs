//! Associated functions `h_M(t) = inf_p M_p t^p` and
//! `omega_M(t) = sup_p log(t^p/M_p)`, with exact piecewise evaluation.
//!
//! On `[1/m_{p+1}, 1/m_p)` the infimum is `M_{p+1} t^(p+1)`, and
//! `h_M(t) = 1` for `t >= 1/m_0`; knots are half-open exactly as in that
//! display (both adjacent pieces agree at knots, so the choice is
//! observationally irrelevant but fixed for determinism).

use serde::Serialize;

use crate::error::{Result, WsqError};
use crate::sequences::WeightSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSource {
    Piecewise,
    BruteInf,
}

/// One evaluation of `log h_M(t)`.
#[derive(Debug, Clone, Serialize)]
pub struct AssocEval {
    /// The argument (may de/overflow for extreme log_t; log_t is exact).
    pub t: f64,
    pub log_t: f64,
    /// Always <= 0; equals 0 for t >= 1/m_0.
    pub log_h: f64,
    /// The piece index p with t in [1/m_{p+1}, 1/m_p); None on the flat part.
    pub segment: Option<usize>,
    pub source: EvalSource,
}

/// `log h_M(t)` for t given directly in the log domain (needed when `t`
/// itself would underflow, e.g. `t = 1/m_p` for rapidly growing families).
pub fn h_of_log(seq: &WeightSequence, log_t: f64) -> Result<AssocEval> {
    if !log_t.is_finite() {
        return Err(WsqError::InvalidParameter {
            name: "log_t",
            value: log_t,
            constraint: "finite",
        });
    }
    let x = -log_t; // looking for the smallest j with log m_j >= x
    if seq.log_quotient(0)? >= x {
        return Ok(AssocEval {
            t: log_t.exp(),
            log_t,
            log_h: 0.0,
            segment: None,
            source: EvalSource::Piecewise,
        });
    }
    let horizon = seq.horizon();
    // exponential search for a bracketing upper index
    let mut hi = 1usize;
    while hi < horizon && seq.log_quotient(hi)? < x {
        hi = (hi * 2).min(horizon);
    }
    if seq.log_quotient(hi)? < x {
        // t below the horizon's reach: partial inf over the available pieces
        let partial = seq.log_term(horizon)? + horizon as f64 * log_t;
        return Err(WsqError::AssocBeyondHorizon {
            t: log_t.exp(),
            horizon,
            partial_log_h: partial,
        });
    }
    let mut lo = hi / 2; // log m_lo < x
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if seq.log_quotient(mid)? < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // piece p = hi - 1: h = M_{p+1} t^(p+1)
    let j = hi;
    debug_assert!(seq.log_quotient(j)? >= x && seq.log_quotient(j - 1)? < x);
    let log_h = seq.log_term(j)? + j as f64 * log_t;
    Ok(AssocEval {
        t: log_t.exp(),
        log_t,
        log_h: log_h.min(0.0),
        segment: Some(j - 1),
        source: EvalSource::Piecewise,
    })
}

/// `log h_M(t)`, t > 0.
pub fn h_of(seq: &WeightSequence, t: f64) -> Result<AssocEval> {
    if !(t > 0.0) {
        return Err(WsqError::InvalidParameter {
            name: "t",
            value: t,
            constraint: "t > 0",
        });
    }
    h_of_log(seq, t.ln())
}

/// `omega_M(t) = -log h_M(1/t)` for t > 0, `omega_M(0) = 0`.
pub fn omega_of(seq: &WeightSequence, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if !(t > 0.0) {
        return Err(WsqError::InvalidParameter {
            name: "t",
            value: t,
            constraint: "t >= 0",
        });
    }
    Ok(-h_of_log(seq, -t.ln())?.log_h)
}

/// Recovers `log M_p = log sup_{t>0} t^p h_M(1/t)` through the associated
/// function: the sup is attained at `t = m_p`. Roundtrips against
/// `log_term(p)` to high relative accuracy.
pub fn recover_term(seq: &WeightSequence, p: usize) -> Result<f64> {
    if p + 1 > seq.horizon() {
        return Err(WsqError::HorizonExceeded {
            requested: p + 1,
            horizon: seq.horizon(),
        });
    }
    let log_t_star = seq.log_quotient(p)?;
    let eval = h_of_log(seq, -log_t_star)?;
    Ok(p as f64 * log_t_star + eval.log_h)
}
