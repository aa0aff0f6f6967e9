//! Bracketed estimation of the growth indices gamma(M) and omega(M), plus
//! the injectivity series test and the surjectivity criteria.
//!
//! gamma(M) is approached from below by bisection on beta through the
//! (gamma_beta) checker, and from above by bisection on mu through the
//! almost-increasing trend of `m_p/(p+1)^mu`. omega(M) combines the
//! trailing-window liminf of `log m_p / log p` with the series
//! characterization `sup { mu : sum m_p^(-1/mu) < infinity }`.

use serde::Serialize;

use crate::conditions::{
    certify_series, check_almost_increasing_shifted, check_gamma_beta, ConditionVerdict,
    SeriesCertificate, Status,
};
use crate::error::Result;
use crate::sequences::WeightSequence;

#[derive(Debug, Clone)]
pub struct IndexConfig {
    /// Values certified at the cap with P-doubling stability count as infinite.
    pub cap: f64,
    /// Bisection tolerance on the index scale.
    pub tol: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            cap: 64.0,
            tol: 1.0 / 64.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub value: f64,
    pub note: String,
}

/// Lower/upper numeric bracket for an index, with method provenance.
#[derive(Debug, Clone, Serialize)]
pub struct IndexBracket {
    pub index: String,
    pub lower: f64,
    pub upper: f64,
    pub infinite: bool,
    #[serde(rename = "P")]
    pub p_max: usize,
    pub methods: Vec<MethodReport>,
}

impl IndexBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Bisects for the largest `x` in `[0, cap]` where `pred(x)` certifies, to
/// tolerance `tol`. `pred` is treated as monotone (true below, false above).
fn bisect_sup(pred: &dyn Fn(f64) -> bool, cap: f64, tol: f64) -> f64 {
    if pred(cap) {
        return cap;
    }
    let mut lo = 0.0f64;
    let mut hi = cap;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Bisects for the smallest `x` in `[0, cap]` where `pred(x)` certifies.
fn bisect_inf(pred: &dyn Fn(f64) -> bool, cap: f64, tol: f64) -> Option<f64> {
    if !pred(cap) {
        return None;
    }
    let mut lo = 0.0f64;
    let mut hi = cap;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Bracket for gamma(M) = sup { mu : (m_p/(p+1)^mu) almost increasing }
/// = sup { beta : (gamma_beta) holds }.
pub fn gamma_index(seq: &WeightSequence, p_max: usize, cfg: &IndexConfig) -> Result<IndexBracket> {
    require_weight_sequence(seq, p_max)?;
    let quotients = seq.log_quotients(p_max)?;

    let gamma_beta_holds =
        |beta: f64| -> bool { beta > 0.0 && matches!(check_gamma_beta(seq, beta, p_max), Ok(v) if v.holds()) };
    let ai_refuted = |mu: f64| -> bool { check_almost_increasing_shifted(&quotients, mu).refuted() };

    let mut methods = Vec::new();
    let mut lower = bisect_sup(&gamma_beta_holds, cfg.cap, cfg.tol);
    methods.push(MethodReport {
        method: "gamma_beta_test".into(),
        value: lower,
        note: "largest beta with a stable (gamma_beta) constant".into(),
    });
    let infinite = gamma_beta_holds(cfg.cap) && !ai_refuted(cfg.cap);
    let upper = if infinite {
        f64::INFINITY
    } else {
        match bisect_inf(&ai_refuted, cfg.cap, cfg.tol) {
            Some(u) => {
                methods.push(MethodReport {
                    method: "almost_increasing_bisection".into(),
                    value: u,
                    note: "smallest mu with diverging almost-increasing witness".into(),
                });
                u
            }
            None => f64::INFINITY,
        }
    };
    if lower > upper {
        // sparse-plateau sequences can pin the (gamma_beta) constant at p=0
        // at any feasible truncation; the almost-increasing refutation shows
        // an explicit violating pair, so the contradicted certificates are
        // discarded
        lower = 0.0;
        methods.push(MethodReport {
            method: "gamma_beta_test".into(),
            value: 0.0,
            note: "(gamma_beta) certificates contradicted by almost-increasing refutation; discarded".into(),
        });
    }
    Ok(IndexBracket {
        index: "gamma".into(),
        lower,
        upper,
        infinite,
        p_max,
        methods,
    })
}

/// Bracket for omega(M) = liminf log(m_p)/log(p).
pub fn omega_index(seq: &WeightSequence, p_max: usize, cfg: &IndexConfig) -> Result<IndexBracket> {
    require_weight_sequence(seq, p_max)?;
    let quotients = seq.log_quotients(p_max)?;

    // trailing-window estimate of the liminf
    let mut window_min = f64::INFINITY;
    for p in (p_max / 2).max(2)..=p_max {
        window_min = window_min.min(quotients[p] / (p as f64).ln());
    }

    // series characterization: sum m_p^(-1/mu) converges iff mu < omega
    let series_cert = |mu: f64| -> SeriesCertificate {
        let terms: Vec<f64> = quotients.iter().map(|q| -q / mu).collect();
        certify_series(&terms)
    };
    let conv = |mu: f64| -> bool { mu > 0.0 && series_cert(mu).is_convergent() };
    let div = |mu: f64| -> bool { mu > 0.0 && series_cert(mu).is_divergent() };

    let lower = bisect_sup(&conv, cfg.cap, cfg.tol);
    let div_inf = bisect_inf(&div, cfg.cap, cfg.tol);
    let upper_candidates = [window_min, div_inf.unwrap_or(f64::INFINITY)];
    let upper = upper_candidates.iter().cloned().fold(f64::INFINITY, f64::min);
    let infinite = window_min > cfg.cap && conv(cfg.cap);

    let methods = vec![
        MethodReport {
            method: "log_quotient_liminf".into(),
            value: window_min,
            note: format!("min over [{}, {}] of log m_p / log p", (p_max / 2).max(2), p_max),
        },
        MethodReport {
            method: "series_test".into(),
            value: lower,
            note: "largest mu with certified convergence of sum m_p^(-1/mu)".into(),
        },
    ];
    Ok(IndexBracket {
        index: "omega".into(),
        lower: if infinite { cfg.cap } else { lower.min(upper) },
        upper: if infinite { f64::INFINITY } else { upper },
        infinite,
        p_max,
        methods,
    })
}

/// Injectivity dispatch: the moment mapping is injective iff
/// `sum m_p^(-1/2)` diverges, which also forces omega(M) <= 2.
#[derive(Debug, Clone, Serialize)]
pub struct InjectivityReport {
    pub status: Status,
    pub series: String,
    /// Set when divergence is certified.
    pub omega_le_2: bool,
    #[serde(rename = "P")]
    pub p_max: usize,
}

pub fn injectivity_test(seq: &WeightSequence, p_max: usize) -> Result<InjectivityReport> {
    let quotients = seq.log_quotients(p_max)?;
    let terms: Vec<f64> = quotients.iter().map(|q| -q / 2.0).collect();
    let cert = certify_series(&terms);
    let (status, series) = match &cert {
        SeriesCertificate::Divergent { .. } => (Status::Holds, "divergent".to_string()),
        SeriesCertificate::Convergent { .. } => (Status::Refuted, "convergent".to_string()),
        SeriesCertificate::Unknown => (Status::Inconclusive, "unknown".to_string()),
    };
    Ok(InjectivityReport {
        status,
        series,
        omega_le_2: cert.is_divergent(),
        p_max,
    })
}

/// Surjectivity criteria: gamma(M) > 2 (the criterion under (dc)), and
/// gamma(M~) infinite (the criterion when (sm) fails).
#[derive(Debug, Clone, Serialize)]
pub struct SurjectivityReport {
    pub gamma: IndexBracket,
    pub gamma_tilde: Option<IndexBracket>,
    pub gamma_gt_2: Status,
    pub gamma_tilde_infinite: Status,
}

pub fn surjectivity_test(
    seq: &WeightSequence,
    p_max: usize,
    cfg: &IndexConfig,
) -> Result<SurjectivityReport> {
    let gamma = gamma_index(seq, p_max, cfg)?;
    let gamma_gt_2 = if gamma.infinite || gamma.lower > 2.0 {
        Status::Holds
    } else if gamma.upper <= 2.0 {
        Status::Refuted
    } else {
        Status::Inconclusive
    };
    let gamma_tilde = match seq.tilde() {
        Ok(t) => {
            let p = p_max.min(t.horizon());
            Some(gamma_index(&t, p, cfg)?)
        }
        Err(_) => None,
    };
    let gamma_tilde_infinite = match &gamma_tilde {
        Some(b) if b.infinite => Status::Holds,
        Some(b) if b.upper.is_finite() => Status::Refuted,
        Some(_) => Status::Inconclusive,
        None => Status::Inconclusive,
    };
    Ok(SurjectivityReport {
        gamma,
        gamma_tilde,
        gamma_gt_2,
        gamma_tilde_infinite,
    })
}

/// Weight-sequence precondition: log-convex up to P with quotients that keep
/// growing (the `m_p -> infinity` diagnostic at truncation).
fn require_weight_sequence(seq: &WeightSequence, p_max: usize) -> Result<ConditionVerdict> {
    let lc = crate::conditions::check_lc(seq, p_max)?;
    if !lc.holds() {
        return Err(crate::WsqError::NotLogConvex {
            p: lc.counterexample.as_ref().map(|c| c.p).unwrap_or(0),
            at: f64::NAN,
            prev_p: 0,
            prev: f64::NAN,
        });
    }
    Ok(lc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{Family, QuotientSpec};

    fn seq(f: Family) -> WeightSequence {
        WeightSequence::new(QuotientSpec::ClosedForm(f)).unwrap()
    }

    const P: usize = 1 << 14;

    #[test]
    fn gamma_of_gevrey2_brackets_two() {
        let b = gamma_index(&seq(Family::Gevrey { alpha: 2.0 }), P, &IndexConfig::default())
            .unwrap();
        assert!(b.contains(2.0), "{b:?}");
        assert!(b.width() <= 0.3, "{b:?}");
        assert!(!b.infinite);
    }

    #[test]
    fn gamma_of_qgevrey_infinite() {
        let b = gamma_index(
            &seq(Family::QGevrey { q: 2.0, sigma: 2.0 }),
            4096,
            &IndexConfig::default(),
        )
        .unwrap();
        assert!(b.infinite, "{b:?}");
    }

    #[test]
    fn gamma_of_divergent_ratio_nodes_is_zero() {
        let s = crate::constructor::build_from_growth_control(
            crate::constructor::GrowthControl::ExpPow { h: 2.0 },
            crate::constructor::NodeSeq::Factorial,
        )
        .unwrap();
        let p = s.horizon().min(P);
        let b = gamma_index(&s, p, &IndexConfig::default()).unwrap();
        assert!(b.upper <= 0.2, "{b:?}");
    }

    #[test]
    fn omega_of_gevrey3_brackets_three() {
        let b = omega_index(&seq(Family::Gevrey { alpha: 3.0 }), P, &IndexConfig::default())
            .unwrap();
        assert!(b.contains(3.0), "{b:?}");
        assert!(b.width() <= 0.2, "{b:?}");
    }

    #[test]
    fn omega_of_qpp_infinite() {
        let s = seq(Family::QPowPow { q: 2.0 });
        let p = s.horizon();
        let b = omega_index(&s, p, &IndexConfig::default()).unwrap();
        assert!(b.infinite, "{b:?}");
    }

    #[test]
    fn gamma_below_omega() {
        for f in [
            Family::Gevrey { alpha: 0.5 },
            Family::Gevrey { alpha: 1.0 },
            Family::Gevrey { alpha: 3.0 },
        ] {
            let s = seq(f.clone());
            let g = gamma_index(&s, P, &IndexConfig::default()).unwrap();
            let w = omega_index(&s, P, &IndexConfig::default()).unwrap();
            assert!(g.lower <= w.upper + 1e-9, "{f:?}: {g:?} vs {w:?}");
        }
    }

    #[test]
    fn injectivity_by_gevrey_index() {
        // alpha <= 2: divergent -> injective; alpha > 2: convergent
        let v = injectivity_test(&seq(Family::Gevrey { alpha: 1.0 }), 4096).unwrap();
        assert_eq!(v.status, Status::Holds);
        assert!(v.omega_le_2);
        let v = injectivity_test(&seq(Family::Gevrey { alpha: 2.0 }), 4096).unwrap();
        assert_eq!(v.status, Status::Holds);
        let v = injectivity_test(&seq(Family::Gevrey { alpha: 3.0 }), 4096).unwrap();
        assert_eq!(v.status, Status::Refuted);
        let v = injectivity_test(&seq(Family::QGevrey { q: 2.0, sigma: 2.0 }), 4096).unwrap();
        assert_eq!(v.status, Status::Refuted);
    }

    #[test]
    fn surjectivity_dispatch() {
        let cfg = IndexConfig::default();
        // gevrey(3): gamma = 3 > 2
        let r = surjectivity_test(&seq(Family::Gevrey { alpha: 3.0 }), 8192, &cfg).unwrap();
        assert_eq!(r.gamma_gt_2, Status::Holds);
        // qgevrey(2,3): gamma infinite
        let r = surjectivity_test(&seq(Family::QGevrey { q: 2.0, sigma: 3.0 }), 2048, &cfg)
            .unwrap();
        assert_eq!(r.gamma_gt_2, Status::Holds);
        assert!(r.gamma.infinite);
        // qpp(2): gamma(M~) infinite
        let s = seq(Family::QPowPow { q: 2.0 });
        let r = surjectivity_test(&s, s.horizon(), &cfg).unwrap();
        assert_eq!(r.gamma_tilde_infinite, Status::Holds);
    }

    #[test]
    fn rejects_non_weight_sequences() {
        let s = WeightSequence::new(QuotientSpec::ExplicitTable(vec![0.0, 1.0, 0.5, 2.0]))
            .unwrap();
        assert!(gamma_index(&s, 3, &IndexConfig::default()).is_err());
    }
}
