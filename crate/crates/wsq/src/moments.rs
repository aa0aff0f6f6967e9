//! Exact Stieltjes moments of the kernel surrogate `e(x) = h_M(K/x)`.
//!
//! The integrand is piecewise a pure power: on the piece
//! `K m_j < x <= K m_{j+1}` the kernel is `M_{j+1} (K/x)^(j+1)`, so
//! `mu_p = int_0^inf x^p e(x) dx` splits into a head integral, the
//! logarithmic segment `j = p` contributing
//! `K^(p+1) M_{p+1} log(m_{p+1}/m_p)`, and closed-form power segments. The
//! tail past `x = K m_J` is rigorously bounded by instantiating
//! `h_M(t) <= M_{J+1} t^(J+1)`, which gives
//! `K^(p+1) M_{J+1} m_J^(p-J)/(J-p)`.

use serde::Serialize;

use crate::conditions::{self, ConditionVerdict, SearchBounds};
use crate::error::{Result, WsqError};
use crate::mathutil::{binomial_row, logdiffexp, logsumexp};
use crate::sequences::WeightSequence;

/// The optimal-flat kernel surrogate `e(x) = h_M(K/x)`; realizes the ray
/// bounds `K_1 h_M(K_2/x) <= e(x) <= K_3 h_M(K_4/x)` with
/// `K_1 = K_3 = 1`, `K_2 = K_4 = K`.
#[derive(Debug, Clone)]
pub struct KernelSurrogate {
    pub seq: WeightSequence,
    pub k_scale: f64,
}

impl KernelSurrogate {
    pub fn new(seq: WeightSequence, k_scale: f64) -> Result<Self> {
        if !(k_scale > 0.0) {
            return Err(WsqError::InvalidParameter {
                name: "K",
                value: k_scale,
                constraint: "K > 0",
            });
        }
        Ok(KernelSurrogate { seq, k_scale })
    }

    /// `log e(x)` for `x = exp(log_x)`.
    pub fn log_e_at_log_x(&self, log_x: f64) -> Result<f64> {
        Ok(crate::assoc::h_of_log(&self.seq, self.k_scale.ln() - log_x)?.log_h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    ExactSeries,
    QuadratureOracle,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentValue {
    pub p: usize,
    pub log_mu: f64,
    /// `log(mu_p / (K^(p+1) M_{p+1}))`, accumulated relative to the anchor
    /// `K^(p+1) M_{p+1}` so that comparisons against the sandwich bounds are
    /// exact even when `log M_{p+1}` itself exhausts f64 resolution.
    pub log_mu_rel: f64,
    /// Number of kernel pieces summed (head excluded).
    pub terms_used: usize,
    /// Log-domain upper bound on the omitted mass.
    pub log_tail_bound: f64,
    pub method: MomentMethod,
    /// Whether the tail bound met the requested relative tolerance.
    pub converged: bool,
}

/// The lower/upper sandwich for `mu_p` relative to the anchor
/// `K^(p+1) M_{p+1}`:
/// `max(log(m_{p+1}/m_p), 1/(p+1)) <= mu_p/anchor <= 2 + log(m_{p+1}/m_p)`,
/// returned in the log domain. Exact small numbers, directly comparable to
/// `MomentValue::log_mu_rel`.
pub fn sandwich_rel_bounds(kernel: &KernelSurrogate, p: usize) -> Result<(f64, f64)> {
    let seq = &kernel.seq;
    let delta = seq.log_quotient(p + 1)? - seq.log_quotient(p)?;
    let lower_log_piece = if delta > 0.0 {
        delta.ln()
    } else {
        f64::NEG_INFINITY
    };
    let lower = lower_log_piece.max(-(p as f64 + 1.0).ln());
    let upper = (2.0 + delta).ln();
    Ok((lower, upper))
}

/// Absolute version of [`sandwich_rel_bounds`] (adds the anchor back).
pub fn sandwich_bounds(kernel: &KernelSurrogate, p: usize) -> Result<(f64, f64)> {
    let (lo, hi) = sandwich_rel_bounds(kernel, p)?;
    let anchor = (p as f64 + 1.0) * kernel.k_scale.ln() + kernel.seq.log_term(p + 1)?;
    Ok((anchor + lo, anchor + hi))
}

/// Exact piecewise series for `mu_p(e)`, truncated when the rigorous tail
/// bound drops below `eps_rel` of the partial sum. If the horizon is reached
/// first, the value is returned unconverged with the best bound.
///
/// The sum is accumulated relative to the anchor `K^(p+1) M_{p+1}`: the
/// running offset `log M_{j+1} - log M_{p+1}` is built by adding/subtracting
/// single quotients outward from `j = p`, so nearby segments (which carry
/// essentially all the mass) never difference two astronomically large logs.
pub fn moment_exact(kernel: &KernelSurrogate, p: usize, eps_rel: f64) -> Result<MomentValue> {
    let seq = &kernel.seq;
    let horizon = seq.horizon();
    if p + 2 > horizon {
        return Err(WsqError::HorizonExceeded {
            requested: p + 2,
            horizon,
        });
    }
    let ln_k = kernel.k_scale.ln();
    let anchor = (p as f64 + 1.0) * ln_k + seq.log_term(p + 1)?;

    // segment j = p: the logarithmic piece, anchor-relative value log(delta)
    let m_p = seq.log_quotient(p)?;
    let m_p1 = seq.log_quotient(p + 1)?;
    let delta_next = m_p1 - m_p;
    let mut rel_sum = if delta_next > 0.0 {
        delta_next.ln()
    } else {
        f64::NEG_INFINITY
    };

    // descending segments j = p-1 .. 0: rel = log M_{j+1} - log M_{p+1}
    let mut rel = 0.0f64;
    let mut m_hi = m_p; // log m_{j+1} for the current j
    for j in (0..p).rev() {
        rel -= seq.log_quotient(j + 1)?;
        let m_lo = seq.log_quotient(j)?;
        if m_hi > m_lo {
            let c = (p - j) as f64;
            let body = logdiffexp(c * m_hi, c * m_lo) - c.ln();
            rel_sum = logsumexp(rel_sum, rel + body);
        }
        m_hi = m_lo;
    }

    // head: (K m_0)^(p+1)/(p+1); relative value
    // -(log M_{p+1} - (p+1) log m_0) - log(p+1), the excess summed exactly
    let m0 = seq.log_quotient(0)?;
    let mut excess = 0.0f64;
    for i in 0..=p {
        excess += seq.log_quotient(i)? - m0;
    }
    rel_sum = logsumexp(rel_sum, -excess - (p as f64 + 1.0).ln());

    // ascending segments j = p+1, p+2, ...
    let mut terms = p + 1;
    let mut tail_rel = f64::INFINITY;
    let mut converged = false;
    let mut rel_up = 0.0f64; // log M_{j+1} - log M_{p+1}
    let mut m_j = m_p1;
    let mut j = p + 1;
    while j + 1 <= horizon {
        let m_j1 = seq.log_quotient(j + 1)?;
        rel_up += m_j;
        if m_j1 > m_j {
            let c = p as f64 - j as f64; // negative
            let body = logdiffexp(c * m_j, c * m_j1) - (-c).ln();
            rel_sum = logsumexp(rel_sum, rel_up + body);
        }
        terms = j + 1;
        // tail past x = K m_J with J = j+1:
        // T/anchor = (log M_{J+1} - log M_{p+1}) + (p-J) log m_J - log(J-p)
        let big_j = j + 1;
        tail_rel = (rel_up + m_j1) + (p as f64 - big_j as f64) * m_j1
            - ((big_j - p) as f64).ln();
        if tail_rel <= eps_rel.ln() + rel_sum {
            converged = true;
            break;
        }
        m_j = m_j1;
        j += 1;
    }

    Ok(MomentValue {
        p,
        log_mu: anchor + rel_sum,
        log_mu_rel: rel_sum,
        terms_used: terms,
        log_tail_bound: anchor + tail_rel,
        method: MomentMethod::ExactSeries,
        converged,
    })
}

/// Settings for the quadrature verification oracle.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Per-segment relative tolerance for the adaptive Simpson rule.
    pub seg_rel_tol: f64,
    /// Stop integrating segments once the analytic tail is below this
    /// fraction of the partial sum.
    pub tail_rel: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            seg_rel_tol: 1e-9,
            tail_rel: 1e-7,
        }
    }
}

/// Composite-Simpson verification oracle for `mu_p(e)`, integrating
/// `x^p e(x)` piece by piece under the log substitution `x = exp(u)`
/// with `e` evaluated through the associated function. Test-side oracle
/// for small p; shares nothing with the closed-form antiderivatives.
pub fn moment_quadrature_oracle(
    kernel: &KernelSurrogate,
    p: usize,
    cfg: &QuadratureConfig,
) -> Result<MomentValue> {
    let seq = &kernel.seq;
    let horizon = seq.horizon();
    if p + 2 > horizon {
        return Err(WsqError::HorizonExceeded {
            requested: p + 2,
            horizon,
        });
    }
    let ln_k = kernel.k_scale.ln();
    let anchor = (p as f64 + 1.0) * ln_k + seq.log_term(p + 1)?;

    // head on [0, K m_0] in linear x, scaled by the endpoint value
    let m0 = seq.log_quotient(0)?;
    let head_scale = p as f64 * (ln_k + m0);
    let width = (ln_k + m0).exp();
    let head_f = |x: f64| -> f64 {
        if x == 0.0 && p > 0 {
            0.0
        } else {
            (x / width).powi(p as i32)
        }
    };
    let head = simpson_adaptive(&head_f, 0.0, width, cfg.seg_rel_tol);
    let mut log_sum = head_scale + head.ln();

    let mut terms = 0usize;
    let mut tail = f64::INFINITY;
    let mut converged = false;
    let mut j = 0usize;
    while j + 2 <= horizon {
        let u0 = ln_k + seq.log_quotient(j)?;
        let u1 = ln_k + seq.log_quotient(j + 1)?;
        if u1 > u0 {
            // integrand in u: exp((p+1) u + log e(exp(u)))
            let log_f = |u: f64| -> f64 {
                (p as f64 + 1.0) * u + kernel.log_e_at_log_x(u).expect("inside horizon")
            };
            let shift = log_f(u0).max(log_f(u1));
            let f = |u: f64| (log_f(u) - shift).exp();
            let v = simpson_adaptive(&f, u0, u1, cfg.seg_rel_tol);
            log_sum = logsumexp(log_sum, shift + v.ln());
        }
        terms = j + 1;
        let big_j = j + 1;
        if big_j >= p + 1 && big_j + 1 <= horizon {
            let m_bj = seq.log_quotient(big_j)?;
            tail = (p as f64 + 1.0) * ln_k + seq.log_term(big_j + 1)?
                + (p as f64 - big_j as f64) * m_bj
                - ((big_j - p) as f64).ln();
            if tail <= cfg.tail_rel.ln() + log_sum {
                converged = true;
                break;
            }
        }
        j += 1;
    }

    Ok(MomentValue {
        p,
        log_mu: log_sum,
        log_mu_rel: log_sum - anchor,
        terms_used: terms,
        log_tail_bound: tail,
        method: MomentMethod::QuadratureOracle,
        converged,
    })
}

fn simpson_n(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

fn simpson_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut n = 8usize;
    let mut prev = simpson_n(f, a, b, n);
    loop {
        n *= 2;
        let cur = simpson_n(f, a, b, n);
        if (cur - prev).abs() <= rel_tol * cur.abs() || n >= 4096 {
            return cur;
        }
        prev = cur;
    }
}

/// Slack record of the Laplace-chain upper bound `mu_p <= M~_p` (K = 1).
#[derive(Debug, Clone, Serialize)]
pub struct UpperCheck {
    pub p: usize,
    pub log_mu: f64,
    pub log_upper: f64,
    pub slack: f64,
}

/// Verifies `mu_p(e) <= M~_p` for the K = 1 surrogate, whose
/// `s^0_{M,1}` norm is exactly 1; returns the log-domain slack
/// (computed anchor-relative, hence exact).
pub fn moment_upper_check(kernel: &KernelSurrogate, p: usize) -> Result<UpperCheck> {
    if (kernel.k_scale - 1.0).abs() > 0.0 {
        return Err(WsqError::InvalidParameter {
            name: "K",
            value: kernel.k_scale,
            constraint: "K = 1 for the upper check",
        });
    }
    let value = moment_exact(kernel, p, 1e-10)?;
    let (_, upper_rel) = sandwich_rel_bounds(kernel, p)?;
    Ok(UpperCheck {
        p,
        log_mu: value.log_mu,
        log_upper: value.log_mu - value.log_mu_rel + upper_rel,
        slack: upper_rel - value.log_mu_rel,
    })
}

/// Which Lambda-space the moment sequence of the surrogate fits into,
/// cross-checked against (dc) and (sm).
#[derive(Debug, Clone, Serialize)]
pub struct TargetClassification {
    pub p_mom: usize,
    pub fits_lambda_m: ConditionVerdict,
    pub fits_lambda_m_plus1: ConditionVerdict,
    pub fits_lambda_m_tilde: ConditionVerdict,
    pub dc: ConditionVerdict,
    pub sm: ConditionVerdict,
    pub consistent: bool,
    pub inconsistencies: Vec<String>,
}

/// Computes `(log mu_p)` for the K = 1 surrogate and classifies it against
/// `M`, `M_{+1}` and `M~` by equivalence of sequences; any disagreement with
/// the (dc)/(sm) checkers is flagged. All comparisons go through the
/// anchor-relative moment values, so they stay exact for rapidly growing
/// sequences whose log-terms exhaust f64 resolution.
pub fn classify_target(
    seq: &WeightSequence,
    p_mom: usize,
    cond_p: usize,
    bounds: &SearchBounds,
) -> Result<TargetClassification> {
    let kernel = KernelSurrogate::new(seq.clone(), 1.0)?;
    // exact log-ratios: mu_p/M_p, mu_p/M_{p+1}, mu_p/M~_p
    let mut d_m = Vec::with_capacity(p_mom + 1);
    let mut d_m_plus1 = Vec::with_capacity(p_mom + 1);
    let mut d_m_tilde = Vec::with_capacity(p_mom + 1);
    for p in 0..=p_mom {
        let rel = moment_exact(&kernel, p, 1e-10)?.log_mu_rel;
        let delta = seq.log_quotient(p + 1)? - seq.log_quotient(p)?;
        d_m_plus1.push(rel);
        d_m.push(rel + seq.log_quotient(p)?);
        d_m_tilde.push(rel - (2.0 + delta).ln());
    }

    let fits_lambda_m = conditions::equivalence_diffs(&d_m, p_mom);
    let fits_lambda_m_plus1 = conditions::equivalence_diffs(&d_m_plus1, p_mom);
    let fits_lambda_m_tilde = conditions::equivalence_diffs(&d_m_tilde, p_mom);
    let dc = conditions::check_dc(seq, cond_p, bounds)?;
    let sm = conditions::check_sm(seq, cond_p, bounds)?;

    let mut inconsistencies = Vec::new();
    conflict(&fits_lambda_m, &dc, "(mu_p) ~ M vs (dc)", &mut inconsistencies);
    conflict(
        &fits_lambda_m_plus1,
        &sm,
        "(mu_p) ~ M_+1 vs (sm)",
        &mut inconsistencies,
    );
    let consistent = inconsistencies.is_empty();
    Ok(TargetClassification {
        p_mom,
        fits_lambda_m,
        fits_lambda_m_plus1,
        fits_lambda_m_tilde,
        dc,
        sm,
        consistent,
        inconsistencies,
    })
}

fn conflict(a: &ConditionVerdict, b: &ConditionVerdict, what: &str, out: &mut Vec<String>) {
    use crate::conditions::Status::*;
    match (a.status, b.status) {
        (Holds, Refuted) | (Refuted, Holds) => out.push(format!(
            "{what}: {:?} against {:?}",
            a.status, b.status
        )),
        _ => {}
    }
}

/// A polynomial/truncated power series by Taylor coefficients
/// (`coeffs[k] = G^(k)(0)/k!`).
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoly {
    pub coeffs: Vec<f64>,
}

impl SeriesPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        SeriesPoly { coeffs }
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// `G^(k)(0) = k! coeffs[k]`.
    pub fn derivative_at_zero(&self, k: usize) -> f64 {
        factorial(k) * self.coeff(k)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Taylor coefficients of `1/G` up to order n, by the convolution
/// recurrence `sum_{j<=k} g_j r_{k-j} = [k = 0]`.
pub fn series_reciprocal(g: &SeriesPoly, n: usize) -> Result<SeriesPoly> {
    let g0 = g.coeff(0);
    if g0 == 0.0 || !g0.is_finite() {
        return Err(WsqError::ZeroConstantTerm);
    }
    let mut r = vec![0.0f64; n + 1];
    r[0] = 1.0 / g0;
    for k in 1..=n {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += g.coeff(j) * r[k - j];
        }
        r[k] = -acc / g0;
    }
    Ok(SeriesPoly::new(r))
}

#[derive(Debug, Clone)]
pub struct InversionRoundtrip {
    pub b: Vec<f64>,
    pub restored: Vec<f64>,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
}

/// The inversion identity: from `(c_p)` and `G` with `G(0) != 0`, builds
/// `b_p = sum_j C(p,j) c_j (1/G)^(p-j)(0)` and verifies
/// `sum_j C(p,j) b_j G^(p-j)(0) = c_p`.
pub fn inversion_roundtrip(c: &[f64], g: &SeriesPoly) -> Result<InversionRoundtrip> {
    let n = c.len().saturating_sub(1);
    let recip = series_reciprocal(g, n)?;
    let mut b = vec![0.0f64; n + 1];
    for p in 0..=n {
        let binom = binomial_row(p);
        b[p] = (0..=p)
            .map(|j| binom[j] * c[j] * recip.derivative_at_zero(p - j))
            .sum();
    }
    let mut restored = vec![0.0f64; n + 1];
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    for p in 0..=n {
        let binom = binomial_row(p);
        restored[p] = (0..=p)
            .map(|j| binom[j] * b[j] * g.derivative_at_zero(p - j))
            .sum();
        let abs = (restored[p] - c[p]).abs();
        max_abs = max_abs.max(abs);
        max_rel = max_rel.max(abs / c[p].abs().max(1.0));
    }
    Ok(InversionRoundtrip {
        b,
        restored,
        max_abs_err: max_abs,
        max_rel_err: max_rel,
    })
}
