//! Core representation of weight sequences in the log domain.
//!
//! A sequence is described declaratively by a [`QuotientSpec`] and evaluated
//! through a [`WeightSequence`], which memoizes the prefix sums
//! `log M_p = sum_{j<p} log m_j` in an append-only, internally synchronized
//! cache. Shifted and tilde'd sequences carry an explicit additive offset
//! (`log M_k`, resp. `log M~_0`) so that `log_term` always returns the true
//! term even when the first term is not 1.

mod parse;

pub use parse::parse_spec;

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::constructor::{GrowthControl, NodeSeq};
use crate::error::{Result, WsqError};
use crate::mathutil::ln_p1;
use crate::MAX_HORIZON;

/// Tolerance below which a quotient decrease counts as a log-convexity
/// violation (matches `check_lc`).
pub const LC_TOL: f64 = 1e-12;

/// Built-in closed-form families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `M_p = (p!)^alpha`, quotients `(p+1)^alpha`.
    Gevrey { alpha: f64 },
    /// `M_p = (p!)^alpha * prod_{j<=p} log^beta(e+j)`.
    LogPerturbedGevrey { alpha: f64, beta: f64 },
    /// `M_p = q^(p^sigma)`.
    QGevrey { q: f64, sigma: f64 },
    /// `M_p = p^(tau p^sigma)` with `M_0 = M_1 = 1`.
    PowerFamily { tau: f64, sigma: f64 },
    /// `M_p = q^(p^p)` with `M_0 = 1`.
    QPowPow { q: f64 },
    /// The oscillating quotient sequence `log m_p = n^(p_n)` on
    /// `[p_n, p_{n+1}-1]`, with `p_1 = 1`, `p_{n+1} = 1 + n p_n`.
    OscillatingSm,
}

impl Family {
    fn validate(&self) -> Result<()> {
        let bad = |name, value, constraint| {
            Err(WsqError::InvalidParameter {
                name,
                value,
                constraint,
            })
        };
        match *self {
            Family::Gevrey { alpha } => {
                if !(alpha > 0.0) {
                    return bad("alpha", alpha, "alpha > 0");
                }
            }
            Family::LogPerturbedGevrey { alpha, beta } => {
                if !(alpha > 0.0) {
                    return bad("alpha", alpha, "alpha > 0");
                }
                if !beta.is_finite() {
                    return bad("beta", beta, "finite");
                }
            }
            Family::QGevrey { q, sigma } => {
                if !(q > 1.0) {
                    return bad("q", q, "q > 1");
                }
                if !(sigma > 0.0) {
                    return bad("sigma", sigma, "sigma > 0");
                }
            }
            Family::PowerFamily { tau, sigma } => {
                if !(tau > 0.0) {
                    return bad("tau", tau, "tau > 0");
                }
                if !(sigma > 1.0) {
                    return bad("sigma", sigma, "sigma > 1");
                }
            }
            Family::QPowPow { q } => {
                if !(q > 1.0) {
                    return bad("q", q, "q > 1");
                }
            }
            Family::OscillatingSm => {}
        }
        Ok(())
    }

    /// `log m_p`, evaluated in closed form. May return `inf` past the
    /// representable range; the horizon scan turns that into a hard boundary.
    fn log_quotient(&self, p: usize) -> f64 {
        let pf = p as f64;
        match *self {
            Family::Gevrey { alpha } => alpha * ln_p1(p),
            Family::LogPerturbedGevrey { alpha, beta } => {
                alpha * ln_p1(p) + beta * (std::f64::consts::E + pf + 1.0).ln().ln()
            }
            Family::QGevrey { q, sigma } => ((pf + 1.0).powf(sigma) - pf.powf(sigma)) * q.ln(),
            Family::PowerFamily { tau, sigma } => {
                if p == 0 {
                    // M_0 = M_1 = 1
                    0.0
                } else {
                    tau * ((pf + 1.0).powf(sigma) * (pf + 1.0).ln() - pf.powf(sigma) * pf.ln())
                }
            }
            Family::QPowPow { q } => {
                if p == 0 {
                    // m_0 = M_1/M_0 = q^(1^1)/1
                    q.ln()
                } else {
                    let next = ((pf + 1.0) * (pf + 1.0).ln()).exp();
                    let cur = (pf * pf.ln()).exp();
                    (next - cur) * q.ln()
                }
            }
            Family::OscillatingSm => {
                if p == 0 {
                    return 0.0;
                }
                // find n with p in [p_n, p_{n+1}-1]
                let mut n: u64 = 1;
                let mut pn: u64 = 1;
                loop {
                    let pnext = 1 + n * pn;
                    if (p as u64) < pnext {
                        return ((pn as f64) * (n as f64).ln()).exp();
                    }
                    pn = pnext;
                    n += 1;
                    if n > 64 {
                        return f64::INFINITY;
                    }
                }
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gevrey { alpha } => write!(f, "gevrey:alpha={alpha}"),
            Family::LogPerturbedGevrey { alpha, beta } => {
                write!(f, "logpert:alpha={alpha},beta={beta}")
            }
            Family::QGevrey { q, sigma } => write!(f, "qgevrey:q={q},sigma={sigma}"),
            Family::PowerFamily { tau, sigma } => write!(f, "power:tau={tau},sigma={sigma}"),
            Family::QPowPow { q } => write!(f, "qpp:q={q}"),
            Family::OscillatingSm => write!(f, "oscillating"),
        }
    }
}

/// Declarative description of a quotient sequence `p -> log m_p`.
#[derive(Debug, Clone)]
pub enum QuotientSpec {
    ClosedForm(Family),
    /// Explicit `log m_p` values, contiguous from `p = 0`.
    ExplicitTable(Vec<f64>),
    /// Piecewise-constant quotients: `m_{p_j} = g(p_j)`, constant between
    /// consecutive nodes.
    PiecewiseConstant {
        control: GrowthControl,
        nodes: NodeSeq,
    },
    /// Termwise product; log-quotients add.
    Product(Box<QuotientSpec>, Box<QuotientSpec>),
    /// `M_{+k}`: quotients `log m_{p+k}`, additive offset `log M_k`.
    Shift { base: Box<QuotientSpec>, k: usize },
    /// `M~_p = M_{p+1} (2 + delta_{p+1})` in the log domain.
    Tilde(Box<QuotientSpec>),
    /// `M^ = (p! M_p)`.
    Hat(Box<QuotientSpec>),
    /// `Mv = (M_p / p!)`.
    Check(Box<QuotientSpec>),
}

enum Kind {
    Closed(Family),
    Table(Arc<Vec<f64>>),
    Piecewise {
        control: GrowthControl,
        starts: Vec<u64>,
        log_values: Vec<f64>,
    },
    Product(WeightSequence, WeightSequence),
    Shift(WeightSequence, usize),
    Tilde(WeightSequence),
    Hat(WeightSequence),
    Check(WeightSequence),
}

struct Inner {
    kind: Kind,
    /// Log of the true term at index 0 (0.0 except for shift/tilde/products
    /// thereof).
    offset: f64,
    /// Largest p for which `log m_p` is representable.
    horizon: usize,
    /// Append-only prefix sums: memo[p] = sum_{j<p} log m_j.
    memo: Mutex<Vec<f64>>,
}

/// A weight sequence addressed by its log-quotients, with a synchronized
/// append-only memo of log-terms. Cheap to clone and safe to share.
#[derive(Clone)]
pub struct WeightSequence {
    inner: Arc<Inner>,
}

/// The delta representation of the quotients: `m_p = exp(sum_{j<=p} delta_j)`
/// with `delta_0 = log m_0` and `delta_{p+1} = log(m_{p+1}/m_p)`.
#[derive(Debug, Clone)]
pub struct DeltaSeq {
    pub values: Vec<f64>,
}

impl WeightSequence {
    pub fn new(spec: QuotientSpec) -> Result<Self> {
        match spec {
            QuotientSpec::ClosedForm(f) => {
                f.validate()?;
                let kind = Kind::Closed(f);
                Self::finish(kind, 0.0, None)
            }
            QuotientSpec::ExplicitTable(v) => {
                if v.is_empty() {
                    return Err(WsqError::EmptyTable);
                }
                if let Some(&bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(WsqError::InvalidParameter {
                        name: "log_m_p",
                        value: bad,
                        constraint: "finite",
                    });
                }
                let horizon = v.len() - 1;
                let kind = Kind::Table(Arc::new(v));
                Self::finish(kind, 0.0, Some(horizon))
            }
            QuotientSpec::PiecewiseConstant { control, nodes } => {
                control.validate()?;
                let (starts, log_values) = materialize_plateaus(&control, &nodes)?;
                let kind = Kind::Piecewise {
                    control,
                    starts,
                    log_values,
                };
                Self::finish(kind, 0.0, None)
            }
            QuotientSpec::Product(a, b) => {
                let a = WeightSequence::new(*a)?;
                let b = WeightSequence::new(*b)?;
                a.product(&b)
            }
            QuotientSpec::Shift { base, k } => WeightSequence::new(*base)?.shift(k),
            QuotientSpec::Tilde(base) => WeightSequence::new(*base)?.tilde(),
            QuotientSpec::Hat(base) => WeightSequence::new(*base)?.hat(),
            QuotientSpec::Check(base) => WeightSequence::new(*base)?.check(),
        }
    }

    fn finish(kind: Kind, offset: f64, horizon_hint: Option<usize>) -> Result<Self> {
        let probe = |p: usize| eval_kind(&kind, p);
        // p = 0 must always be evaluable
        match probe(0) {
            Ok(v) if v.is_finite() => {}
            Ok(_) => {
                return Err(WsqError::HorizonExceeded {
                    requested: 0,
                    horizon: 0,
                })
            }
            Err(e) => return Err(e),
        }
        let horizon = match horizon_hint {
            Some(h) => h,
            None => scan_horizon(&probe, MAX_HORIZON),
        };
        Ok(WeightSequence {
            inner: Arc::new(Inner {
                kind,
                offset,
                horizon,
                memo: Mutex::new(vec![0.0]),
            }),
        })
    }

    /// Largest p for which `log m_p` is representable.
    pub fn horizon(&self) -> usize {
        self.inner.horizon
    }

    /// Log of the true term at index 0 (`log M_0` in the ambient indexing,
    /// nonzero only for shifted/tilde'd sequences and their products).
    pub fn offset(&self) -> f64 {
        self.inner.offset
    }

    /// `log m_p`. Fails loudly past the horizon.
    pub fn log_quotient(&self, p: usize) -> Result<f64> {
        if p > self.inner.horizon {
            return Err(WsqError::HorizonExceeded {
                requested: p,
                horizon: self.inner.horizon,
            });
        }
        eval_kind(&self.inner.kind, p)
    }

    /// `log M_p = offset + sum_{j<p} log m_j`. Deterministic: the summation
    /// path is fixed and memoized, so repeated calls return identical bits.
    pub fn log_term(&self, p: usize) -> Result<f64> {
        if p > self.inner.horizon.saturating_add(1) || p > self.inner.horizon + 1 {
            return Err(WsqError::HorizonExceeded {
                requested: p,
                horizon: self.inner.horizon,
            });
        }
        // log M_{horizon+1} still only needs quotients up to `horizon`.
        let mut memo = self.inner.memo.lock().unwrap();
        while memo.len() <= p {
            let i = memo.len() - 1;
            let q = eval_kind(&self.inner.kind, i)?;
            let next = memo[i] + q;
            if !next.is_finite() {
                return Err(WsqError::HorizonExceeded {
                    requested: p,
                    horizon: i,
                });
            }
            memo.push(next);
        }
        Ok(memo[p] + self.inner.offset)
    }

    /// Copies `log m_0 ..= log m_pmax` out as a slice.
    pub fn log_quotients(&self, pmax: usize) -> Result<Vec<f64>> {
        (0..=pmax).map(|p| self.log_quotient(p)).collect()
    }

    /// Copies `log M_0 ..= log M_pmax` out as a slice (offsets applied).
    pub fn log_terms(&self, pmax: usize) -> Result<Vec<f64>> {
        (0..=pmax).map(|p| self.log_term(p)).collect()
    }

    /// `M^ = (p! M_p)`; quotients gain `log(p+1)`.
    pub fn hat(&self) -> Result<Self> {
        if let Kind::Check(base) = &self.inner.kind {
            return Ok(base.clone());
        }
        Self::finish(Kind::Hat(self.clone()), self.inner.offset, None)
    }

    /// `Mv = (M_p/p!)`; quotients lose `log(p+1)`.
    pub fn check(&self) -> Result<Self> {
        if let Kind::Hat(base) = &self.inner.kind {
            return Ok(base.clone());
        }
        Self::finish(Kind::Check(self.clone()), self.inner.offset, None)
    }

    /// `M_{+k}`: quotients `log m_{p+k}`, carrying the additive offset
    /// `log M_k` so `log_term` returns true terms.
    pub fn shift(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        let offset = self.log_term(k)?;
        let horizon = self.inner.horizon.saturating_sub(k);
        let kind = Kind::Shift(self.clone(), k);
        Ok(WeightSequence {
            inner: Arc::new(Inner {
                kind,
                offset,
                horizon,
                memo: Mutex::new(vec![0.0]),
            }),
        })
    }

    /// `M~_p = M_{p+1}(2 + delta_{p+1})` where `delta_{p+1} = log(m_{p+1}/m_p)`.
    /// Requires the base to be log-convex on the evaluated range.
    pub fn tilde(&self) -> Result<Self> {
        // offset = log M~_0 = log M_1 + log(2 + delta_1)
        let d1 = self.log_quotient(1)? - self.log_quotient(0)?;
        if d1 < -LC_TOL {
            return Err(WsqError::NotLogConvex {
                p: 1,
                at: self.log_quotient(1)?,
                prev_p: 0,
                prev: self.log_quotient(0)?,
            });
        }
        let offset = self.log_term(1)? + (2.0 + d1).ln();
        Self::finish(Kind::Tilde(self.clone()), offset, None)
    }

    /// Termwise product; log-quotients and offsets add.
    pub fn product(&self, other: &WeightSequence) -> Result<Self> {
        let offset = self.inner.offset + other.inner.offset;
        Self::finish(Kind::Product(self.clone(), other.clone()), offset, None)
    }

    /// The delta representation up to index P (values `delta_0 ..= delta_P`).
    pub fn deltas(&self, pmax: usize) -> Result<DeltaSeq> {
        let mut values = Vec::with_capacity(pmax + 1);
        let mut prev = 0.0f64;
        for p in 0..=pmax {
            let q = self.log_quotient(p)?;
            if p == 0 {
                values.push(q);
            } else {
                values.push(q - prev);
            }
            prev = q;
        }
        Ok(DeltaSeq { values })
    }

    pub fn describe(&self) -> String {
        describe_kind(&self.inner.kind)
    }
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "WeightSequence({}, horizon={})",
            self.describe(),
            self.inner.horizon
        )
    }
}

impl DeltaSeq {
    /// Reconstructs `log m_p = sum_{j<=p} delta_j`.
    pub fn reconstruct_log_quotient(&self, p: usize) -> f64 {
        self.values[..=p].iter().sum()
    }
}

fn eval_kind(kind: &Kind, p: usize) -> Result<f64> {
    match kind {
        Kind::Closed(f) => Ok(f.log_quotient(p)),
        Kind::Table(v) => Ok(v[p]),
        Kind::Piecewise {
            starts, log_values, ..
        } => {
            let idx = starts.partition_point(|&s| s <= p as u64) - 1;
            Ok(log_values[idx])
        }
        Kind::Product(a, b) => Ok(a.log_quotient(p)? + b.log_quotient(p)?),
        Kind::Shift(a, k) => a.log_quotient(p + *k),
        Kind::Hat(a) => Ok(a.log_quotient(p)? + ln_p1(p)),
        Kind::Check(a) => Ok(a.log_quotient(p)? - ln_p1(p)),
        Kind::Tilde(a) => {
            let m0 = a.log_quotient(p)?;
            let m1 = a.log_quotient(p + 1)?;
            let m2 = a.log_quotient(p + 2)?;
            let d1 = m1 - m0;
            let d2 = m2 - m1;
            if d1 < -LC_TOL {
                return Err(WsqError::NotLogConvex {
                    p: p + 1,
                    at: m1,
                    prev_p: p,
                    prev: m0,
                });
            }
            if d2 < -LC_TOL {
                return Err(WsqError::NotLogConvex {
                    p: p + 2,
                    at: m2,
                    prev_p: p + 1,
                    prev: m1,
                });
            }
            Ok(m1 + (2.0 + d2).ln() - (2.0 + d1).ln())
        }
    }
}

fn describe_kind(kind: &Kind) -> String {
    match kind {
        Kind::Closed(f) => f.to_string(),
        Kind::Table(v) => format!("table[{}]", v.len()),
        Kind::Piecewise { control, .. } => format!("piecewise({control})"),
        Kind::Product(a, b) => format!("{}|prod({})", a.describe(), b.describe()),
        Kind::Shift(a, k) => format!("{}|shift{k}", a.describe()),
        Kind::Tilde(a) => format!("{}|tilde", a.describe()),
        Kind::Hat(a) => format!("{}|hat", a.describe()),
        Kind::Check(a) => format!("{}|check", a.describe()),
    }
}

/// Largest p <= cap with a finite quotient, assuming a single
/// finite-to-overflow boundary (true for every supported family).
fn scan_horizon(probe: &dyn Fn(usize) -> Result<f64>, cap: usize) -> usize {
    let ok = |p: usize| matches!(probe(p), Ok(v) if v.is_finite());
    if ok(cap) {
        return cap;
    }
    let mut lo = 0usize; // known good (p=0 checked by caller)
    let mut hi = 1usize;
    while hi < cap && ok(hi) {
        lo = hi;
        hi = (hi * 2).min(cap);
    }
    // invariant: ok(lo), !ok(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn materialize_plateaus(control: &GrowthControl, nodes: &NodeSeq) -> Result<(Vec<u64>, Vec<f64>)> {
    let mut starts = Vec::new();
    let mut log_values = Vec::new();
    let mut j = 0usize;
    loop {
        let Some(pj) = nodes.node(j) else { break };
        if pj > MAX_HORIZON as u64 {
            break;
        }
        if let Some(&last) = starts.last() {
            if pj <= last {
                return Err(WsqError::InvalidParameter {
                    name: "nodes",
                    value: pj as f64,
                    constraint: "strictly increasing",
                });
            }
        } else if pj != 0 {
            return Err(WsqError::InvalidParameter {
                name: "p_0",
                value: pj as f64,
                constraint: "p_0 = 0",
            });
        }
        let lg = control.log_g(pj as f64);
        if !lg.is_finite() {
            break;
        }
        if let Some(&prev) = log_values.last() {
            if lg <= prev {
                return Err(WsqError::GrowthControlNotIncreasing { t: pj as f64 });
            }
        }
        starts.push(pj);
        log_values.push(lg);
        j += 1;
    }
    if starts.is_empty() {
        return Err(WsqError::EmptyTable);
    }
    Ok((starts, log_values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gevrey(alpha: f64) -> WeightSequence {
        WeightSequence::new(QuotientSpec::ClosedForm(Family::Gevrey { alpha })).unwrap()
    }

    fn qgevrey(q: f64, sigma: f64) -> WeightSequence {
        WeightSequence::new(QuotientSpec::ClosedForm(Family::QGevrey { q, sigma })).unwrap()
    }

    fn qpp(q: f64) -> WeightSequence {
        WeightSequence::new(QuotientSpec::ClosedForm(Family::QPowPow { q })).unwrap()
    }

    #[test]
    fn gevrey_terms_are_factorial_powers() {
        let s = gevrey(1.0);
        assert!((s.log_term(3).unwrap() - 6.0f64.ln()).abs() < 1e-12);
        assert!((s.log_term(4).unwrap() - 24.0f64.ln()).abs() < 1e-12);
        assert_eq!(gevrey(2.0).log_term(0).unwrap(), 0.0);
    }

    #[test]
    fn qgevrey_quotients_closed_form() {
        let s = qgevrey(2.0, 2.0);
        assert!((s.log_quotient(1).unwrap() - 3.0 * 2.0f64.ln()).abs() < 1e-12);
        let s3 = qgevrey(2.0, 3.0);
        assert!((s3.log_term(5).unwrap() - 125.0 * 2.0f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn qpp_horizon_scan() {
        let s = qpp(2.0);
        // largest p with ((p+1)^(p+1) - p^p) log 2 representable
        let h = s.horizon();
        assert_eq!(h, 142);
        assert!(s.log_quotient(h).unwrap().is_finite());
        assert!(s.log_quotient(h + 1).is_err());
    }

    #[test]
    fn horizon_requests_fail_loudly() {
        let s = WeightSequence::new(QuotientSpec::ExplicitTable(vec![0.0, 0.5, 1.0])).unwrap();
        assert_eq!(s.horizon(), 2);
        assert!(s.log_quotient(3).is_err());
        assert!(s.log_term(4).is_err());
        // log M_{horizon+1} only needs quotients up to the horizon
        assert!((s.log_term(3).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn quotient_term_consistency() {
        let s = qgevrey(2.0, 3.0);
        for p in 0..60 {
            let lhs = s.log_term(p + 1).unwrap() - s.log_term(p).unwrap();
            let q = s.log_quotient(p).unwrap();
            assert!(
                (lhs - q).abs() <= 1e-9 * q.abs().max(1.0),
                "p={p} lhs={lhs} q={q}"
            );
        }
    }

    #[test]
    fn hat_of_gevrey1_is_gevrey2() {
        let h = gevrey(1.0).hat().unwrap();
        let g2 = gevrey(2.0);
        for p in 0..=50 {
            let d = h.log_term(p).unwrap() - g2.log_term(p).unwrap();
            assert!(d.abs() < 1e-12, "p={p} d={d}");
        }
    }

    #[test]
    fn check_hat_roundtrip_is_exact() {
        let s = qgevrey(2.0, 2.0);
        let rt = s.hat().unwrap().check().unwrap();
        for p in 0..=64 {
            assert_eq!(
                rt.log_quotient(p).unwrap(),
                s.log_quotient(p).unwrap(),
                "p={p}"
            );
        }
        let rt2 = s.check().unwrap().hat().unwrap();
        assert_eq!(rt2.log_term(37).unwrap(), s.log_term(37).unwrap());
    }

    #[test]
    fn shift_carries_true_terms() {
        let s = gevrey(1.0).shift(1).unwrap();
        // term at p=2 is M_3 = 6
        assert!((s.log_term(2).unwrap() - 6.0f64.ln()).abs() < 1e-12);
        let q = qgevrey(2.0, 2.0);
        let q1 = q.shift(1).unwrap();
        // offset = log M_1 = log q
        assert!((q1.offset() - 2.0f64.ln()).abs() < 1e-12);
        assert!((q1.log_term(0).unwrap() - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn shift_commutes_with_product() {
        let a = gevrey(1.0);
        let b = qgevrey(2.0, 2.0);
        let lhs = a.product(&b).unwrap().shift(1).unwrap();
        let rhs = a.shift(1).unwrap().product(&b.shift(1).unwrap()).unwrap();
        for p in 0..=50 {
            let d = lhs.log_term(p).unwrap() - rhs.log_term(p).unwrap();
            assert!(d.abs() < 1e-10, "p={p} d={d}");
        }
    }

    #[test]
    fn product_of_gevreys_adds_indices() {
        let prod = gevrey(1.0).product(&gevrey(1.0)).unwrap();
        let g2 = gevrey(2.0);
        for p in 0..=40 {
            assert!((prod.log_term(p).unwrap() - g2.log_term(p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn tilde_term_and_quotient_paths_agree() {
        for s in [gevrey(2.0), qgevrey(2.0, 2.0), qpp(2.0)] {
            let t = s.tilde().unwrap();
            for p in 0..=t.horizon().min(60) {
                // independent term path: log M~_p = log M_{p+1} + log(2 + delta_{p+1})
                let d = s.log_quotient(p + 1).unwrap() - s.log_quotient(p).unwrap();
                let term = s.log_term(p + 1).unwrap() + (2.0 + d).ln();
                let via_quotients = t.log_term(p).unwrap();
                let tol = 1e-10 * term.abs().max(1.0);
                assert!(
                    (term - via_quotients).abs() <= tol,
                    "p={p} term={term} quot={via_quotients}"
                );
            }
        }
    }

    #[test]
    fn tilde_of_qgevrey2_has_constant_gap() {
        let s = qgevrey(2.0, 2.0);
        let t = s.tilde().unwrap();
        let expect = (2.0 + 2.0 * 2.0f64.ln()).ln();
        for p in 0..=40 {
            let gap = t.log_term(p).unwrap() - s.log_term(p + 1).unwrap();
            assert!((gap - expect).abs() < 1e-10, "p={p} gap={gap}");
        }
    }

    #[test]
    fn tilde_dominates_twice_shift() {
        // M~_p >= 2 M_{p+1} for every (lc) input
        for s in [gevrey(0.5), gevrey(3.0), qgevrey(2.0, 3.0), qpp(2.0)] {
            let t = s.tilde().unwrap();
            for p in 0..=t.horizon().min(80) {
                let lhs = t.log_term(p).unwrap();
                let rhs = 2.0f64.ln() + s.log_term(p + 1).unwrap();
                assert!(lhs + 1e-12 * lhs.abs().max(1.0) >= rhs, "p={p}");
            }
        }
    }

    #[test]
    fn tilde_rejects_non_log_convex() {
        let s = WeightSequence::new(QuotientSpec::ExplicitTable(vec![0.0, 1.0, 0.5, 2.0]))
            .unwrap();
        assert!(matches!(s.tilde(), Err(WsqError::NotLogConvex { .. })));
    }

    #[test]
    fn deltas_reconstruct_quotients() {
        let s = qpp(2.0);
        let d = s.deltas(40).unwrap();
        for p in [0usize, 1, 7, 23, 40] {
            let rec = d.reconstruct_log_quotient(p);
            let q = s.log_quotient(p).unwrap();
            assert!((rec - q).abs() <= 1e-12 * q.abs().max(1.0), "p={p}");
        }
        // closed form for p >= 1
        for p in 1..=20usize {
            let pf = p as f64;
            let expect = (((pf + 2.0) * (pf + 2.0).ln()).exp() - 2.0 * ((pf + 1.0) * (pf + 1.0).ln()).exp()
                + (pf * pf.ln()).exp())
                * 2.0f64.ln();
            let got = d.values[p + 1];
            assert!(
                (got - expect).abs() <= 1e-9 * expect.abs().max(1.0),
                "p={p} got={got} expect={expect}"
            );
        }
    }

    #[test]
    fn deltas_of_gevrey() {
        let d = gevrey(1.0).deltas(10).unwrap();
        assert_eq!(d.values[0], 0.0);
        for p in 0..10 {
            let expect = ((p as f64 + 2.0) / (p as f64 + 1.0)).ln();
            assert!((d.values[p + 1] - expect).abs() < 1e-14);
        }
        let d2 = qgevrey(2.0, 2.0).deltas(10).unwrap();
        for p in 0..10 {
            assert!((d2.values[p + 1] - 2.0 * 2.0f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn eq21_from_log_convexity() {
        // (lc) + M_0 = 1  =>  M_p M_q <= M_{p+q}
        for s in [gevrey(1.0), qgevrey(2.0, 2.0)] {
            for p in 0..=40usize {
                for q in 0..=(40 - p) {
                    let lhs = s.log_term(p).unwrap() + s.log_term(q).unwrap();
                    let rhs = s.log_term(p + q).unwrap();
                    assert!(lhs <= rhs + 1e-9, "p={p} q={q}");
                }
            }
        }
    }

    #[test]
    fn lc_implies_root_below_quotient() {
        let s = qgevrey(2.0, 2.0);
        for p in 1..=60usize {
            let root = s.log_term(p).unwrap() / p as f64;
            let q = s.log_quotient(p - 1).unwrap();
            assert!(root <= q + 1e-9, "p={p}");
        }
    }

    #[test]
    fn oscillating_family_values() {
        let s = WeightSequence::new(QuotientSpec::ClosedForm(Family::OscillatingSm)).unwrap();
        // log m_{p_2} with p_2 = 2: 2^2 = 4, and 4^(1/2) = 2
        assert_eq!(s.log_quotient(2).unwrap(), 4.0);
        assert_eq!(s.log_quotient(1).unwrap(), 1.0);
        assert_eq!(s.log_quotient(0).unwrap(), 0.0);
        // nodes: 1,2,5,16,65,326,1957 -> horizon just below p_7
        assert_eq!(s.horizon(), 1956);
        // (log m_{p_{n+1}-1})^(1/(p_{n+1}-1)) = n^(1/n) for n = 3,4,5
        let cases = [(3u64, 15usize), (4, 64), (5, 325)];
        for (n, p) in cases {
            let v = s.log_quotient(p).unwrap().powf(1.0 / p as f64);
            let expect = (n as f64).powf(1.0 / n as f64);
            assert!((v - expect).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(WeightSequence::new(QuotientSpec::ClosedForm(Family::Gevrey { alpha: 0.0 }))
            .is_err());
        assert!(WeightSequence::new(QuotientSpec::ClosedForm(Family::QGevrey {
            q: 1.0,
            sigma: 2.0
        }))
        .is_err());
        assert!(WeightSequence::new(QuotientSpec::ClosedForm(Family::PowerFamily {
            tau: 1.0,
            sigma: 1.0
        }))
        .is_err());
        assert!(WeightSequence::new(QuotientSpec::ExplicitTable(vec![])).is_err());
    }

    #[test]
    fn log_term_bitwise_deterministic() {
        let a = qgevrey(2.0, 3.0);
        let b = qgevrey(2.0, 3.0);
        let x = a.log_term(500).unwrap();
        let y = b.log_term(500).unwrap();
        assert_eq!(x.to_bits(), y.to_bits());
        assert_eq!(a.log_term(500).unwrap().to_bits(), x.to_bits());
    }
}
