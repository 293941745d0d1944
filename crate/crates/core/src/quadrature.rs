//! Cauchy-type integrals and moment integrals over the hyperplane `w_n = 0`.
//!
//! The hyperplane is truncated to the cube `[−R, R]^n`. Each axis is split
//! at graded breakpoints (fine near the projection of the evaluation point
//! and near the origin, geometric further out), the resulting tensor cells
//! are integrated with an embedded Gauss–Kronrod rule and the worst cells
//! are bisected until the summed error indicator meets the tolerance.
//! The neglected region `|x| > R` is bounded analytically from a decay hint.

use alloc::vec::Vec;

use smallvec::SmallVec;

use crate::boundary::{BoundaryFunction, DecayHint};
use crate::clifford::{Multivector, Paravector, Signature};
use crate::error::{Error, QuadratureError};
use crate::math;
use crate::monogenic::{cauchy_kernel, FueterTable, MultiIndex};

/// Sign `s` in `dσ = s · e_n^{-1} dS`.
///
/// Fixed so that the `n = 1` Schwarz solution for `c = 1/(1+x²)` takes the
/// value `+1/2` at `i`.
pub const MEASURE_ORIENTATION: f64 = 1.0;

/// Parameters of the truncated adaptive quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureScheme {
    /// Half-width `R` of the integration cube.
    pub truncation_radius: f64,
    /// Target number of cells per axis before refinement.
    pub base_grid: usize,
    /// Absolute tolerance on the summed cell error indicators.
    pub tolerance: f64,
    /// Radius `ρ` of the finely meshed zone around the projection of the
    /// evaluation point; `None` uses `|w_n|`.
    pub near_radius: Option<f64>,
    /// Refinement stops once this many cells exist.
    pub max_cells: usize,
    /// Refinement stops after this many rounds.
    pub max_rounds: usize,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            truncation_radius: 1e4,
            base_grid: 64,
            tolerance: 1e-6,
            near_radius: None,
            max_cells: 60_000,
            max_rounds: 24,
        }
    }
}

impl QuadratureScheme {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.truncation_radius > 0.0) || !self.truncation_radius.is_finite() {
            return Err(QuadratureError::InvalidScheme("truncation radius must be positive"));
        }
        if self.base_grid < 4 {
            return Err(QuadratureError::InvalidScheme("base grid needs at least 4 cells per axis"));
        }
        if !(self.tolerance > 0.0) {
            return Err(QuadratureError::InvalidScheme("tolerance must be positive"));
        }
        if let Some(r) = self.near_radius {
            if !(r > 0.0) {
                return Err(QuadratureError::InvalidScheme("near radius must be positive"));
            }
        }
        if self.max_cells == 0 {
            return Err(QuadratureError::InvalidScheme("max_cells must be positive"));
        }
        Ok(())
    }
}

/// A quadrature value with its error indicators.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralResult {
    pub value: Multivector,
    /// Sum of per-cell `|Kronrod − Gauss|` indicators.
    pub error_estimate: f64,
    /// Integrand evaluations.
    pub nodes_used: usize,
    /// Bound on the neglected integral over `|x| > R` (may be `+∞`).
    pub truncation_tail_bound: f64,
}

impl IntegralResult {
    fn zero(sig: Signature) -> Self {
        Self {
            value: Multivector::zero(sig),
            error_estimate: 0.0,
            nodes_used: 0,
            truncation_tail_bound: 0.0,
        }
    }

    /// Placeholder for an integral that does not exist: zero value with
    /// infinite error and tail bounds.
    pub fn divergent(sig: Signature) -> Self {
        Self {
            value: Multivector::zero(sig),
            error_estimate: f64::INFINITY,
            nodes_used: 0,
            truncation_tail_bound: f64::INFINITY,
        }
    }

    /// `error_estimate + truncation_tail_bound`.
    pub fn total_error(&self) -> f64 {
        self.error_estimate + self.truncation_tail_bound
    }
}

/// Area of the unit sphere in `ℝ^{n+1}`: `2π^{(n+1)/2} / Γ((n+1)/2)`.
pub fn sphere_area(n: usize) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    2.0 * math::pow(core::f64::consts::PI, h) / math::gamma(h)
}

/// Area of the unit sphere in `ℝ^n` (`2` for `n = 1`).
fn hyperplane_sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * math::pow(core::f64::consts::PI, h) / math::gamma(h)
}

/// Normalization of the hyperplane Cauchy integral, `2 / ⋁_{n+1}`.
pub fn cauchy_normalization(n: usize) -> f64 {
    2.0 / sphere_area(n)
}

/// Growth of the integrand's non-datum factor at large `|x|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailKernel {
    /// `|E(x − w)| ≤ (R/(R−|w|))^n |x|^{−n}` for `|x| ≥ R > |w|`.
    Cauchy { w_norm: f64 },
    /// `|Z^α(x)| ≤ |α|! |x|^{|α|}`.
    Moment { degree: u32 },
}

/// Bound on `∫_{|x|>R} |K(x)| |c(x)| dx` for the kernel class and decay hint.
///
/// Returns `+∞` when the hint is missing or the integral diverges.
pub fn tail_bound(hint: Option<DecayHint>, kernel: TailKernel, r: f64, n: usize) -> f64 {
    let Some(hint) = hint else {
        return f64::INFINITY;
    };
    if matches!(hint, DecayHint::Zero) {
        return 0.0;
    }
    // |K(x)| ≤ factor · |x|^{−k}
    let (factor, k) = match kernel {
        TailKernel::Cauchy { w_norm } => {
            if r <= w_norm {
                return f64::INFINITY;
            }
            (math::powi(r / (r - w_norm), n as i32), n as f64)
        }
        TailKernel::Moment { degree } => (math::factorial(degree), -(degree as f64)),
    };
    let omega = hyperplane_sphere_area(n);
    // radial exponent of |x|^{−k} · r^{n−1}
    let p = n as f64 - 1.0 - k;
    match hint {
        DecayHint::Zero => 0.0,
        DecayHint::Compact { radius, amplitude } => {
            if r >= radius || amplitude == 0.0 {
                0.0
            } else if (p + 1.0).abs() < 1e-12 {
                factor * amplitude * omega * math::ln(radius / r)
            } else {
                factor * amplitude * omega * (math::pow(radius, p + 1.0) - math::pow(r, p + 1.0)) / (p + 1.0)
            }
        }
        DecayHint::Power { exponent, amplitude } => {
            // (1+|x|)^{−d} ≤ |x|^{−d}
            let margin = k + exponent - n as f64;
            if margin <= 0.0 {
                f64::INFINITY
            } else {
                factor * amplitude * omega * math::pow(r, -margin) / margin
            }
        }
        DecayHint::Gaussian { amplitude, rate } => {
            if !(rate > 0.0) {
                return f64::INFINITY;
            }
            let radial = if rate * r * r > (p - 1.0).max(0.0) && r > 0.0 {
                // r^{p−1} e^{−ar²/2} is decreasing past R
                math::pow(r, p - 1.0) * math::exp(-rate * r * r) / rate
            } else if p > -1.0 {
                math::gamma((p + 1.0) / 2.0) / (2.0 * math::pow(rate, (p + 1.0) / 2.0))
            } else {
                f64::INFINITY
            };
            factor * amplitude * omega * radial
        }
    }
}

/// `s · e_n^{-1} = −s e_n`.
fn measure_blade(sig: Signature) -> Multivector {
    Multivector::generator(sig, sig.n())
        .expect("n ≥ 1")
        .scale(-MEASURE_ORIENTATION)
}

fn decay_for(c: &BoundaryFunction, scheme: &QuadratureScheme) -> (Option<DecayHint>, bool) {
    match c.decay_hint() {
        Some(h) => (Some(h), true),
        None => (c.infer_decay(scheme.truncation_radius), false),
    }
}

fn finish_tail(declared: bool, tail: f64) -> Result<f64, QuadratureError> {
    if tail.is_infinite() && !declared {
        Err(QuadratureError::NonDecayingDatum)
    } else {
        Ok(tail)
    }
}

/// `S[c](w) = (2/⋁_{n+1}) ∫ E(x − w) · s e_n^{-1} · c(x) dS`, truncated to
/// `|x_j| ≤ R`.
pub fn cauchy_integral(
    c: &BoundaryFunction,
    w: &Paravector,
    scheme: &QuadratureScheme,
) -> Result<IntegralResult, Error> {
    scheme.validate()?;
    let sig = c.signature();
    if w.signature() != sig {
        return Err(crate::AlgebraError::SignatureMismatch {
            left: sig.n(),
            right: w.signature().n(),
        }
        .into());
    }
    let height = w.height();
    if height.abs() < 1e-14 {
        return Err(QuadratureError::EvaluationOnHyperplane.into());
    }
    if c.is_identically_zero() {
        return Ok(IntegralResult::zero(sig));
    }
    let (hint, declared) = decay_for(c, scheme);
    let n = sig.n();
    let norm = cauchy_normalization(n);
    let tail = norm
        * tail_bound(
            hint,
            TailKernel::Cauchy { w_norm: w.norm() },
            scheme.truncation_radius,
            n,
        );
    let tail = finish_tail(declared, tail)?;
    let blade = measure_blade(sig);
    let w0 = w.clone();
    let integrand = move |x: &[f64]| -> Result<Multivector, Error> {
        let mut diff: SmallVec<[f64; 4]> = SmallVec::with_capacity(n + 1);
        for (xi, wi) in x.iter().zip(w0.components()) {
            diff.push(xi - wi);
        }
        diff.push(-w0.height());
        let k = cauchy_kernel(&Paravector::new(sig, &diff)?)?;
        Ok(k * &blade * c.eval(x)?)
    };
    let near = scheme.near_radius.unwrap_or(height.abs());
    let centre = w.hyperplane_coords();
    let mut res = integrate(&integrand, sig, centre, near, scheme)?;
    res.value = res.value.scale(norm);
    res.error_estimate *= norm;
    res.truncation_tail_bound = tail;
    Ok(res)
}

/// `∫ Z^α(x) · s e_n^{-1} · c(x) dS` over the truncated hyperplane.
pub fn moment_integral(
    alpha: &MultiIndex,
    c: &BoundaryFunction,
    scheme: &QuadratureScheme,
) -> Result<IntegralResult, Error> {
    let blade = measure_blade(c.signature());
    moment_with(alpha, c, scheme, Some(blade))
}

/// `∫ Z^α(x) c(x) dx` with the scalar Lebesgue measure.
pub fn moment_integral_lebesgue(
    alpha: &MultiIndex,
    c: &BoundaryFunction,
    scheme: &QuadratureScheme,
) -> Result<IntegralResult, Error> {
    moment_with(alpha, c, scheme, None)
}

fn moment_with(
    alpha: &MultiIndex,
    c: &BoundaryFunction,
    scheme: &QuadratureScheme,
    blade: Option<Multivector>,
) -> Result<IntegralResult, Error> {
    scheme.validate()?;
    let sig = c.signature();
    if alpha.alpha().len() != sig.n() {
        return Err(crate::MonogenicError::MultiIndexLength {
            expected: sig.n(),
            got: alpha.alpha().len(),
        }
        .into());
    }
    if c.is_identically_zero() {
        return Ok(IntegralResult::zero(sig));
    }
    let (hint, declared) = decay_for(c, scheme);
    let n = sig.n();
    let tail = tail_bound(
        hint,
        TailKernel::Moment { degree: alpha.degree() },
        scheme.truncation_radius,
        n,
    );
    let tail = finish_tail(declared, tail)?;
    let alpha = alpha.clone();
    let integrand = move |x: &[f64]| -> Result<Multivector, Error> {
        let p = Paravector::on_hyperplane(sig, x)?;
        let z = FueterTable::new(&p).get(&alpha)?;
        let v = c.eval(x)?;
        Ok(match &blade {
            Some(b) => z * b * v,
            None => z * v,
        })
    };
    let origin: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, n);
    let mut res = integrate(&integrand, sig, &origin, ORIGIN_SCALE, scheme)?;
    res.truncation_tail_bound = tail;
    Ok(res)
}

/// The Cauchy-type integral with its mesh frozen at an anchor point.
///
/// The mesh is adapted once at the anchor; [`FrozenCauchy::eval`] then sums
/// `E(x_i − w) g_i` over the fixed nodes. As a finite sum of kernels the
/// result is exactly monogenic in `w`, so finite-difference residuals taken
/// from it measure only the differencing error. Accuracy degrades as `w`
/// moves away from the anchor.
#[derive(Clone, Debug)]
pub struct FrozenCauchy {
    sig: Signature,
    nodes: Vec<f64>,
    weights: Vec<Multivector>,
    anchor: IntegralResult,
}

impl FrozenCauchy {
    pub fn new(c: &BoundaryFunction, anchor: &Paravector, scheme: &QuadratureScheme) -> Result<Self, Error> {
        let anchor_value = cauchy_integral(c, anchor, scheme)?;
        let sig = c.signature();
        let n = sig.n();
        let mut out = Self {
            sig,
            nodes: Vec::new(),
            weights: Vec::new(),
            anchor: anchor_value,
        };
        if c.is_identically_zero() {
            return Ok(out);
        }
        let blade = measure_blade(sig);
        let w0 = anchor.clone();
        let kb = blade.clone();
        let integrand = move |x: &[f64]| -> Result<Multivector, Error> {
            let mut diff: SmallVec<[f64; 4]> = SmallVec::with_capacity(n + 1);
            for (xi, wi) in x.iter().zip(w0.components()) {
                diff.push(xi - wi);
            }
            diff.push(-w0.height());
            let k = cauchy_kernel(&Paravector::new(sig, &diff)?)?;
            Ok(k * &kb * c.eval(x)?)
        };
        let near = scheme.near_radius.unwrap_or(anchor.height().abs());
        let (cells, _, _) = adapt(&integrand, sig, anchor.hyperplane_coords(), near, scheme)?;
        let norm = cauchy_normalization(n);
        let rule = rule_for(n);
        let m = rule.x.len();
        let per_cell = m.pow(n as u32);
        out.nodes.reserve(cells.len() * per_cell * n);
        out.weights.reserve(cells.len() * per_cell);
        let mut idx: SmallVec<[usize; 4]> = SmallVec::from_elem(0, n);
        let mut x: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, n);
        for cell in &cells {
            let mut jac = norm;
            for j in 0..n {
                jac *= 0.5 * (cell.hi[j] - cell.lo[j]);
            }
            for _ in 0..per_cell {
                let mut wk = jac;
                for j in 0..n {
                    let half = 0.5 * (cell.hi[j] - cell.lo[j]);
                    x[j] = 0.5 * (cell.hi[j] + cell.lo[j]) + half * rule.x[idx[j]];
                    wk *= rule.wk[idx[j]];
                }
                let g = (&blade * c.eval(&x)?).scale(wk);
                if !g.is_zero() {
                    out.nodes.extend_from_slice(&x);
                    out.weights.push(g);
                }
                for j in 0..n {
                    idx[j] += 1;
                    if idx[j] < m {
                        break;
                    }
                    idx[j] = 0;
                }
            }
        }
        Ok(out)
    }

    /// The adaptive result at the anchor point.
    pub fn anchor_result(&self) -> &IntegralResult {
        &self.anchor
    }

    /// Number of nodes with a nonzero weight.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn eval(&self, w: &Paravector) -> Result<Multivector, Error> {
        if w.height().abs() < 1e-14 {
            return Err(QuadratureError::EvaluationOnHyperplane.into());
        }
        let n = self.sig.n();
        let mut diff: SmallVec<[f64; 4]> = SmallVec::from_elem(-w.height(), n + 1);
        let terms: Result<Vec<Multivector>, Error> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, g)| {
                for j in 0..n {
                    diff[j] = self.nodes[i * n + j] - w.component(j);
                }
                Ok(cauchy_kernel(&Paravector::new(self.sig, &diff)?)? * g)
            })
            .collect();
        let terms = terms?;
        let refs: Vec<&Multivector> = terms.iter().collect();
        Ok(pairwise_sum(self.sig, &refs))
    }
}

/// Width of the finely meshed zone around the origin, where data features
/// usually sit.
const ORIGIN_SCALE: f64 = 0.5;

struct Rule {
    x: &'static [f64],
    wk: &'static [f64],
    wg: &'static [f64],
}

#[allow(clippy::excessive_precision)]
const XGK15: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK15: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG7: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[allow(clippy::excessive_precision)]
const GK15_X: [f64; 15] = [
    -XGK15[0], -XGK15[1], -XGK15[2], -XGK15[3], -XGK15[4], -XGK15[5], -XGK15[6], 0.0, XGK15[6],
    XGK15[5], XGK15[4], XGK15[3], XGK15[2], XGK15[1], XGK15[0],
];
#[allow(clippy::excessive_precision)]
const GK15_WK: [f64; 15] = [
    WGK15[0], WGK15[1], WGK15[2], WGK15[3], WGK15[4], WGK15[5], WGK15[6], WGK15[7], WGK15[6],
    WGK15[5], WGK15[4], WGK15[3], WGK15[2], WGK15[1], WGK15[0],
];
#[allow(clippy::excessive_precision)]
const GK15_WG: [f64; 15] = [
    0.0, WG7[0], 0.0, WG7[1], 0.0, WG7[2], 0.0, WG7[3], 0.0, WG7[2], 0.0, WG7[1], 0.0, WG7[0], 0.0,
];

#[allow(clippy::excessive_precision)]
const GK7_X: [f64; 7] = [
    -0.9604912687080202834235071,
    -0.7745966692414833770358531,
    -0.4342437493468025580020715,
    0.0,
    0.4342437493468025580020715,
    0.7745966692414833770358531,
    0.9604912687080202834235071,
];
#[allow(clippy::excessive_precision)]
const GK7_WK: [f64; 7] = [
    0.1046562260264672651938239,
    0.2684880898683334407285693,
    0.4013974147759622229050518,
    0.4509165386584741423451091,
    0.4013974147759622229050518,
    0.2684880898683334407285693,
    0.1046562260264672651938239,
];
#[allow(clippy::excessive_precision)]
const GK7_WG: [f64; 7] = [
    0.0,
    0.5555555555555555555555556,
    0.0,
    0.8888888888888888888888889,
    0.0,
    0.5555555555555555555555556,
    0.0,
];

static GK15: Rule = Rule {
    x: &GK15_X,
    wk: &GK15_WK,
    wg: &GK15_WG,
};
static GK7: Rule = Rule {
    x: &GK7_X,
    wk: &GK7_WK,
    wg: &GK7_WG,
};

fn rule_for(dim: usize) -> &'static Rule {
    if dim == 1 {
        &GK15
    } else {
        &GK7
    }
}

/// Axis breakpoints: a uniform zone of half-width `near` around `p`
/// (spacing at most `near / (4√n)`), then geometric growth to the cube
/// boundary; the same around the origin with scale [`ORIGIN_SCALE`].
fn axis_breaks(p: f64, near: f64, n: usize, scheme: &QuadratureScheme) -> Vec<f64> {
    let r = scheme.truncation_radius;
    let m = math::sqrt(n as f64) * 4.0;
    let m = (m as usize + usize::from(!math::is_integer(m))).max(2);
    let budget = scheme.base_grid.saturating_sub(2 * m + 4);
    let k = (budget / 4).max(3);
    let mut pts: Vec<f64> = Vec::with_capacity(4 * k + 2 * m + 8);
    let mut graded = |centre: f64, scale: f64, uniform: usize| {
        for i in 0..=2 * uniform {
            pts.push(centre + scale * (i as f64 - uniform as f64) / uniform as f64);
        }
        let q = math::pow(2.0 * r / scale, 1.0 / k as f64);
        let mut d = scale;
        for _ in 0..k {
            d *= q;
            pts.push(centre + d);
            pts.push(centre - d);
        }
    };
    graded(p, near, m);
    graded(0.0, ORIGIN_SCALE, 2);
    pts.push(-r);
    pts.push(r);
    pts.retain(|v| v.abs() <= r);
    pts.sort_by(f64::total_cmp);
    let min_gap = 1e-3 * near.min(ORIGIN_SCALE);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for v in pts {
        match out.last() {
            Some(&last) if v - last < min_gap => {}
            _ => out.push(v),
        }
    }
    if let Some(last) = out.last_mut() {
        *last = r;
    }
    out
}

#[derive(Clone)]
struct Cell {
    lo: SmallVec<[f64; 4]>,
    hi: SmallVec<[f64; 4]>,
}

struct CellResult {
    value: Multivector,
    err: f64,
}

fn eval_cell<F>(f: &F, sig: Signature, cell: &Cell, rule: &Rule) -> Result<CellResult, Error>
where
    F: Fn(&[f64]) -> Result<Multivector, Error>,
{
    let d = cell.lo.len();
    let m = rule.x.len();
    let half: SmallVec<[f64; 4]> = cell.lo.iter().zip(&cell.hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: SmallVec<[f64; 4]> = cell.lo.iter().zip(&cell.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let jac: f64 = half.iter().product();
    let mut kron = Multivector::zero(sig);
    let mut gauss = Multivector::zero(sig);
    let mut idx: SmallVec<[usize; 4]> = SmallVec::from_elem(0, d);
    let mut x: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, d);
    let total = m.pow(d as u32);
    for _ in 0..total {
        let mut wk = jac;
        let mut wg = jac;
        for j in 0..d {
            x[j] = mid[j] + half[j] * rule.x[idx[j]];
            wk *= rule.wk[idx[j]];
            wg *= rule.wg[idx[j]];
        }
        let v = f(&x)?;
        kron += &v.scale(wk);
        if wg != 0.0 {
            gauss += &v.scale(wg);
        }
        for j in 0..d {
            idx[j] += 1;
            if idx[j] < m {
                break;
            }
            idx[j] = 0;
        }
    }
    let err = kron.distance(&gauss);
    Ok(CellResult { value: kron, err })
}

#[cfg(feature = "parallel")]
fn eval_cells<F>(f: &F, sig: Signature, cells: &[Cell], rule: &Rule) -> Result<Vec<CellResult>, Error>
where
    F: Fn(&[f64]) -> Result<Multivector, Error> + Sync,
{
    use rayon::prelude::*;
    cells.par_iter().map(|c| eval_cell(f, sig, c, rule)).collect()
}

#[cfg(not(feature = "parallel"))]
fn eval_cells<F>(f: &F, sig: Signature, cells: &[Cell], rule: &Rule) -> Result<Vec<CellResult>, Error>
where
    F: Fn(&[f64]) -> Result<Multivector, Error> + Sync,
{
    cells.iter().map(|c| eval_cell(f, sig, c, rule)).collect()
}

fn pairwise_sum(sig: Signature, vals: &[&Multivector]) -> Multivector {
    match vals.len() {
        0 => Multivector::zero(sig),
        1 => vals[0].clone(),
        len => {
            let (a, b) = vals.split_at(len / 2);
            pairwise_sum(sig, a) + pairwise_sum(sig, b)
        }
    }
}

fn pairwise_sum_f64(vals: &[f64]) -> f64 {
    match vals.len() {
        0 => 0.0,
        1 => vals[0],
        len => {
            let (a, b) = vals.split_at(len / 2);
            pairwise_sum_f64(a) + pairwise_sum_f64(b)
        }
    }
}

fn split(cell: &Cell) -> Vec<Cell> {
    let d = cell.lo.len();
    (0..1usize << d)
        .map(|code| {
            let mut lo = cell.lo.clone();
            let mut hi = cell.hi.clone();
            for j in 0..d {
                let mid = 0.5 * (cell.lo[j] + cell.hi[j]);
                if code & (1 << j) == 0 {
                    hi[j] = mid;
                } else {
                    lo[j] = mid;
                }
            }
            Cell { lo, hi }
        })
        .collect()
}

/// Adaptive integration over `[−R, R]^n`. Cell order and summation order
/// are fixed, so results do not depend on thread scheduling.
fn integrate<F>(
    f: &F,
    sig: Signature,
    centre: &[f64],
    near: f64,
    scheme: &QuadratureScheme,
) -> Result<IntegralResult, Error>
where
    F: Fn(&[f64]) -> Result<Multivector, Error> + Sync,
{
    let (_, results, nodes) = adapt(f, sig, centre, near, scheme)?;
    let vals: Vec<&Multivector> = results.iter().map(|r| &r.value).collect();
    let errs: Vec<f64> = results.iter().map(|r| r.err).collect();
    Ok(IntegralResult {
        value: pairwise_sum(sig, &vals),
        error_estimate: pairwise_sum_f64(&errs),
        nodes_used: nodes,
        truncation_tail_bound: 0.0,
    })
}

/// The refinement loop behind [`integrate`]: final cells, their results
/// and the number of integrand evaluations.
fn adapt<F>(
    f: &F,
    sig: Signature,
    centre: &[f64],
    near: f64,
    scheme: &QuadratureScheme,
) -> Result<(Vec<Cell>, Vec<CellResult>, usize), Error>
where
    F: Fn(&[f64]) -> Result<Multivector, Error> + Sync,
{
    let d = sig.n();
    let rule = rule_for(d);
    let nodes_per_cell = rule.x.len().pow(d as u32);
    let axes: Vec<Vec<f64>> = (0..d).map(|j| axis_breaks(centre[j], near, d, scheme)).collect();
    let mut cells: Vec<Cell> = Vec::new();
    let counts: Vec<usize> = axes.iter().map(|a| a.len() - 1).collect();
    let total: usize = counts.iter().product();
    let mut idx = alloc::vec![0usize; d];
    for _ in 0..total {
        let lo = (0..d).map(|j| axes[j][idx[j]]).collect();
        let hi = (0..d).map(|j| axes[j][idx[j] + 1]).collect();
        cells.push(Cell { lo, hi });
        for j in 0..d {
            idx[j] += 1;
            if idx[j] < counts[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    let mut results = eval_cells(f, sig, &cells, rule)?;
    let mut nodes = cells.len() * nodes_per_cell;
    for _round in 0..scheme.max_rounds {
        let errs: Vec<f64> = results.iter().map(|r| r.err).collect();
        let total_err = pairwise_sum_f64(&errs);
        if total_err <= scheme.tolerance || cells.len() >= scheme.max_cells {
            break;
        }
        // split the largest indicators until they cover half the error
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| errs[b].total_cmp(&errs[a]).then(a.cmp(&b)));
        let room = (scheme.max_cells - cells.len()) / ((1 << d) - 1);
        let mut marked = alloc::vec![false; cells.len()];
        let mut covered = 0.0;
        for (count, &i) in order.iter().enumerate() {
            if count >= room.max(1) || covered >= 0.5 * total_err {
                break;
            }
            marked[i] = true;
            covered += errs[i];
        }
        let mut new_cells = Vec::with_capacity(cells.len() + room);
        let mut fresh: Vec<Cell> = Vec::new();
        let mut slots: Vec<Option<CellResult>> = Vec::with_capacity(cells.len() + room);
        for (i, (cell, res)) in cells.into_iter().zip(results).enumerate() {
            if marked[i] {
                for child in split(&cell) {
                    fresh.push(child.clone());
                    new_cells.push(child);
                    slots.push(None);
                }
            } else {
                new_cells.push(cell);
                slots.push(Some(res));
            }
        }
        let computed = eval_cells(f, sig, &fresh, rule)?;
        nodes += fresh.len() * nodes_per_cell;
        let mut computed = computed.into_iter();
        results = slots
            .into_iter()
            .map(|s| s.unwrap_or_else(|| computed.next().expect("one result per fresh cell")))
            .collect();
        cells = new_cells;
    }
    Ok((cells, results, nodes))
}
