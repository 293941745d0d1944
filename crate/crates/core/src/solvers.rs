//! Riemann jump, Schwarz and Hilbert problems on the upper half space.
//!
//! Every solver starts from the Cauchy-type integral `S[c]` of the datum.
//! The order `m` at infinity selects one of four cases ([`CaseTag`]):
//! a free symmetric polynomial for `m ≥ 0`, the condition `c(∞) = 0` for
//! `m = −1`, nothing extra for `−n < m < −1`, and moment conditions for
//! `m ≤ −n`. The Hilbert problem with constant `λ` is the Schwarz problem
//! right-multiplied by `λ^{-1}`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use crate::boundary::classes::{classify_hat_h, ClassReport, LIMIT_ZERO_TOL};
use crate::boundary::BoundaryFunction;
use crate::clifford::{Multivector, Paravector, Signature};
use crate::error::{Error, MonogenicError, QuadratureError, SolveError};
use crate::math;
use crate::monogenic::{
    default_radii, default_rays, dirac_residual, order_at_infinity, Domain, FueterTable, MultiIndex,
    OrderEstimate, PointField, Side, DEFAULT_STEP,
};
use crate::quadrature::{
    cauchy_integral, moment_integral, moment_integral_lebesgue, FrozenCauchy, IntegralResult,
    QuadratureScheme,
};

/// Which of the four solution regimes an order `m` falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseTag {
    /// `m ≥ 0`: a free polynomial of degree `≤ m` is added.
    C1,
    /// `m = −1`: unique, requires `c(∞) = 0`.
    C2,
    /// `−n < m < −1`: unique.
    C3,
    /// `m ≤ −n` (and `m ≠ −1`): unique under moment conditions.
    C4,
}

impl CaseTag {
    /// For `n = 1` the orders `m = −1` and `m ≤ −n` overlap; `m = −1` is
    /// treated as [`CaseTag::C2`], which carries no moment conditions.
    pub fn classify(n: usize, m: i32) -> Self {
        if m >= 0 {
            CaseTag::C1
        } else if m == -1 {
            CaseTag::C2
        } else if m > -(n as i32) {
            CaseTag::C3
        } else {
            CaseTag::C4
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CaseTag::C1 => "C1",
            CaseTag::C2 => "C2",
            CaseTag::C3 => "C3",
            CaseTag::C4 => "C4",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Number of free constants for `m ≥ 0`: `binomial(n + m, m)`.
pub fn count_free_constants(n: usize, m: i32) -> Result<u64, SolveError> {
    if m < 0 {
        return Err(SolveError::OutOfCase { m });
    }
    Ok(math::binomial(n as u64 + m as u64, m as u64))
}

/// Number of moment conditions for `m ≤ −n`: `binomial(−m − 1, n)`.
pub fn count_conditions(n: usize, m: i32) -> Result<u64, SolveError> {
    if m > -(n as i32) {
        return Err(SolveError::OutOfCase { m });
    }
    Ok(math::binomial((-(m as i64) - 1) as u64, n as u64))
}

/// Multi-indices of the free polynomial (`|α| ≤ m`); empty for `m < 0`.
pub fn free_basis(sig: Signature, m: i32) -> Result<Vec<MultiIndex>, MonogenicError> {
    if m < 0 {
        return Ok(Vec::new());
    }
    MultiIndex::up_to_degree(sig, m as u32)
}

/// Multi-indices of the moment conditions (`|α| ≤ −(n + 1 + m)`); empty
/// unless `m ≤ −n − 1`.
pub fn condition_indices(sig: Signature, m: i32) -> Result<Vec<MultiIndex>, MonogenicError> {
    let top = -(sig.n() as i64 + 1 + m as i64);
    if top < 0 {
        return Ok(Vec::new());
    }
    MultiIndex::up_to_degree(sig, top as u32)
}

/// One moment condition `∫ Z^α dσ c = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionCheck {
    pub alpha: MultiIndex,
    /// `∫ Z^α(x) dσ c(x)`, which decides `satisfied`.
    pub moment: IntegralResult,
    /// `∫ Z^α(x) c(x) dx`, reported alongside.
    pub lebesgue: IntegralResult,
    /// `max(scheme tolerance, 10 × quadrature error)`.
    pub tolerance: f64,
    /// `false` when `Z^α c` does not decay fast enough for the moment to
    /// exist; the condition then counts as violated.
    pub converged: bool,
    pub satisfied: bool,
}

/// `Ok(None)` for a moment whose integrand does not decay.
fn convergent(r: Result<IntegralResult, Error>) -> Result<Option<IntegralResult>, Error> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Quadrature(QuadratureError::NonDecayingDatum)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// A non-fatal finding recorded while solving.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// The empirical class estimators did not confirm the datum class.
    ClassHypothesis {
        /// Power `r` in `f = x^r c`.
        r: i32,
        /// Whether `f(∞) = 0` is also required.
        vanishing: bool,
        holder_mu: f64,
        dagger_mu: f64,
        limit: Option<f64>,
    },
    /// `λ` is not a paravector; its inverse came from a linear solve.
    GeneralLambda,
    /// The limit of the datum at infinity could not be estimated.
    LimitUndetermined,
    /// The datum tends to a nonzero constant `κ`; `S[c]` is computed as
    /// `S[c − κ] + κ`.
    ConstantAtInfinity(f64),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ClassHypothesis {
                r,
                vanishing,
                holder_mu,
                dagger_mu,
                limit,
            } => {
                let class = if *vanishing {
                    format!("Ĥ_{{{r},0}}")
                } else if *r == 0 {
                    "Ĥ".to_string()
                } else {
                    format!("Ĥ_{r}")
                };
                write!(
                    f,
                    "datum not confirmed in {class}: Hölder index {holder_mu:.3}, index at infinity {dagger_mu:.3}"
                )?;
                match limit {
                    Some(l) => write!(f, ", |x^{r} c(x)| → {l:.3e}"),
                    None => write!(f, ", limit of x^{r} c(x) at infinity not found"),
                }
            }
            Warning::GeneralLambda => f.write_str("λ is not a paravector; inverse computed by a linear solve"),
            Warning::LimitUndetermined => f.write_str("limit of the datum at infinity could not be estimated"),
            Warning::ConstantAtInfinity(k) => {
                write!(f, "datum tends to a constant of size {k:.3e} at infinity; integral taken in principal value")
            }
        }
    }
}

/// Everything checked before the solution is assembled.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub case: CaseTag,
    pub class: ClassReport,
    pub warnings: Vec<Warning>,
    pub conditions: Vec<ConditionCheck>,
}

/// `Re{Φ⁺(x) λ} = c(x)` with `Φ = o(w^{m+1})`, for constant invertible `λ`.
#[derive(Clone, Debug)]
pub struct HilbertProblem {
    pub m: i32,
    pub lambda: Multivector,
    pub c: BoundaryFunction,
    pub scheme: QuadratureScheme,
}

impl HilbertProblem {
    pub fn new(m: i32, lambda: Multivector, c: BoundaryFunction, scheme: QuadratureScheme) -> Result<Self, Error> {
        let sig = c.signature();
        if lambda.signature() != sig {
            return Err(crate::AlgebraError::SignatureMismatch {
                left: sig.n(),
                right: lambda.signature().n(),
            }
            .into());
        }
        if lambda.invert().is_err() {
            return Err(SolveError::SingularLambda.into());
        }
        scheme.validate()?;
        Ok(Self { m, lambda, c, scheme })
    }

    /// The Schwarz problem `Re Φ⁺ = c` (`λ = 1`).
    pub fn schwarz(m: i32, c: BoundaryFunction, scheme: QuadratureScheme) -> Result<Self, Error> {
        let one = Multivector::one(c.signature());
        Self::new(m, one, c, scheme)
    }

    pub fn signature(&self) -> Signature {
        self.c.signature()
    }

    pub fn case_tag(&self) -> CaseTag {
        CaseTag::classify(self.signature().n(), self.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FreeKind {
    /// Jump problem: arbitrary constants `c_α`, term `Z^α c_α / |α|!`.
    General,
    /// Schwarz/Hilbert: para-real `R_α`, term `Z^α R_α ε_α / |α|!`.
    ParaReal,
}

/// A solved Schwarz or Hilbert problem (or the upper branch of a jump
/// problem).
///
/// The free constants of case C1 are kept symbolically and default to 0;
/// [`Solution::set_free_constant`] picks a member of the family.
#[derive(Clone, Debug)]
pub struct Solution {
    case_tag: CaseTag,
    m: i32,
    lambda: Multivector,
    lambda_inverse: Multivector,
    lambda_is_paravector: bool,
    c: BoundaryFunction,
    integrand: BoundaryFunction,
    shift: Option<Multivector>,
    scheme: QuadratureScheme,
    poly_basis: Vec<MultiIndex>,
    free_constants: BTreeMap<MultiIndex, Multivector>,
    kind: FreeKind,
    extra: Vec<PointField>,
    report: SolveReport,
}

impl Solution {
    pub fn case_tag(&self) -> CaseTag {
        self.case_tag
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn signature(&self) -> Signature {
        self.c.signature()
    }

    pub fn lambda(&self) -> &Multivector {
        &self.lambda
    }

    pub fn lambda_inverse(&self) -> &Multivector {
        &self.lambda_inverse
    }

    /// True when `λ` is a paravector and its inverse is the closed form
    /// `λ̄/|λ|²`.
    pub fn lambda_is_paravector(&self) -> bool {
        self.lambda_is_paravector
    }

    pub fn datum(&self) -> &BoundaryFunction {
        &self.c
    }

    pub fn scheme(&self) -> &QuadratureScheme {
        &self.scheme
    }

    /// `|α| ≤ m`; empty for `m < 0`.
    pub fn poly_basis(&self) -> &[MultiIndex] {
        &self.poly_basis
    }

    /// Current free constants; absent entries are zero.
    pub fn free_constants(&self) -> &BTreeMap<MultiIndex, Multivector> {
        &self.free_constants
    }

    /// Moment conditions (case C4 only).
    pub fn solvability(&self) -> &[ConditionCheck] {
        &self.report.conditions
    }

    pub fn report(&self) -> &SolveReport {
        &self.report
    }

    /// Sets a free constant. For Schwarz and Hilbert solutions the value
    /// must be para-real.
    pub fn set_free_constant(&mut self, alpha: &MultiIndex, value: Multivector) -> Result<(), Error> {
        if !self.poly_basis.contains(alpha) {
            return Err(SolveError::NotInBasis { alpha: alpha.to_string() }.into());
        }
        if value.signature() != self.signature() {
            return Err(crate::AlgebraError::SignatureMismatch {
                left: self.signature().n(),
                right: value.signature().n(),
            }
            .into());
        }
        if self.kind == FreeKind::ParaReal && !value.is_para_real() {
            return Err(SolveError::NotParaReal.into());
        }
        self.free_constants.insert(alpha.clone(), value);
        Ok(())
    }

    /// Adds an arbitrary field to the Schwarz part `Φλ`. Used to build
    /// perturbed candidates for [`verify_solution`].
    pub fn with_added_term(mut self, field: PointField) -> Self {
        self.extra.push(field);
        self
    }

    /// `S[c](w)` on either half space.
    pub fn principal(&self, w: &Paravector) -> Result<IntegralResult, Error> {
        let mut res = cauchy_integral(&self.integrand, w, &self.scheme)?;
        if let Some(k) = &self.shift {
            // S[κ] = sign(w_n) κ for constant para-real κ
            let sign = if w.height() > 0.0 { 1.0 } else { -1.0 };
            res.value += &k.scale(sign);
        }
        Ok(res)
    }

    /// The polynomial part at `w`.
    pub fn free_polynomial(&self, w: &Paravector) -> Result<Multivector, Error> {
        let sig = self.signature();
        let mut acc = Multivector::zero(sig);
        if self.free_constants.values().all(Multivector::is_zero) {
            return Ok(acc);
        }
        let mut table = FueterTable::new(w);
        for (alpha, r) in &self.free_constants {
            if r.is_zero() {
                continue;
            }
            let z = table.get(alpha)?.scale(1.0 / math::factorial(alpha.degree()));
            let coeff = match self.kind {
                FreeKind::General => r.clone(),
                FreeKind::ParaReal => free_coefficient(alpha, r),
            };
            acc += &(z * coeff);
        }
        Ok(acc)
    }

    fn extra_terms(&self, w: &Paravector) -> Result<Multivector, Error> {
        let mut acc = Multivector::zero(self.signature());
        for f in &self.extra {
            acc += &f.eval(w)?;
        }
        Ok(acc)
    }

    /// `S[c](w) + P(w)` before the `λ^{-1}` factor, on either half space.
    pub fn schwarz_value(&self, w: &Paravector) -> Result<Multivector, Error> {
        let base = self.principal(w)?.value + self.free_polynomial(w)?;
        Ok(base + self.extra_terms(w)?)
    }

    /// `Φ(w) = [S[c](w) + P(w)] · λ^{-1}` for `w` in the upper half space.
    pub fn evaluate(&self, w: &Paravector) -> Result<Multivector, Error> {
        if !(w.height() > 0.0) {
            return Err(SolveError::OutsideUpperHalfSpace.into());
        }
        Ok(self.schwarz_value(w)? * &self.lambda_inverse)
    }

    /// `Φ` as a field on the upper half space.
    pub fn field(&self) -> PointField {
        let sol = self.clone();
        PointField::new(self.signature(), Domain::Upper, move |w| sol.evaluate(w))
    }

    /// `Φ` with the integral frozen on the mesh adapted at `anchor`; exactly
    /// monogenic, accurate near the anchor. Used for residual checks.
    pub fn local_field(&self, anchor: &Paravector) -> Result<PointField, Error> {
        if !(anchor.height() > 0.0) {
            return Err(SolveError::OutsideUpperHalfSpace.into());
        }
        let frozen = FrozenCauchy::new(&self.integrand, anchor, &self.scheme)?;
        let sol = self.clone();
        Ok(PointField::new(self.signature(), Domain::Upper, move |w| {
            let mut v = frozen.eval(w)?;
            if let Some(k) = &sol.shift {
                v += k;
            }
            let v = v + sol.free_polynomial(w)? + sol.extra_terms(w)?;
            Ok(v * &sol.lambda_inverse)
        }))
    }

    /// `Φ⁺(x)` by polynomial extrapolation of `Φ(x + ε e_n)` to `ε = 0`.
    pub fn boundary_value(&self, x: &[f64], eps: &[f64]) -> Result<Multivector, Error> {
        let sig = self.signature();
        let vals: Result<Vec<Multivector>, Error> = eps
            .iter()
            .map(|&e| self.evaluate(&lift(sig, x, e)?))
            .collect();
        Ok(extrapolate_to_zero(eps, &vals?))
    }
}

/// `R_α e_n` when `α_n` is even and `R_α` when it is odd.
///
/// On the hyperplane `Z^α(x)` is para-real for even `α_n` and an `e_n`
/// multiple of a para-real value for odd `α_n`; either way the term has no
/// real part there, and `R[±Z^α c]` keeps exactly this shape.
pub fn free_coefficient(alpha: &MultiIndex, r: &Multivector) -> Multivector {
    let sig = r.signature();
    let last = *alpha.alpha().last().expect("n ≥ 1");
    if last.is_multiple_of(2) {
        r * &Multivector::generator(sig, sig.n()).expect("n ≥ 1")
    } else {
        r.clone()
    }
}

fn lift(sig: Signature, x: &[f64], height: f64) -> Result<Paravector, Error> {
    let mut comps: SmallVec<[f64; 4]> = SmallVec::from_slice(x);
    comps.push(height);
    Ok(Paravector::new(sig, &comps)?)
}

/// Neville extrapolation of `f(ε_i)` to `ε = 0`.
pub fn extrapolate_to_zero(eps: &[f64], vals: &[Multivector]) -> Multivector {
    assert!(!vals.is_empty() && eps.len() == vals.len(), "one value per step");
    let mut p: Vec<Multivector> = vals.to_vec();
    let k = p.len();
    for level in 1..k {
        for i in 0..k - level {
            let (a, b) = (eps[i], eps[i + level]);
            // P(0) from the two neighbouring interpolants
            let num = p[i + 1].scale(a) - p[i].scale(b);
            p[i] = num.scale(1.0 / (a - b));
        }
    }
    p.swap_remove(0)
}

fn inverse_of(lambda: &Multivector) -> Result<(Multivector, bool), Error> {
    let inv = lambda.invert().map_err(|_| SolveError::SingularLambda)?;
    Ok((inv, lambda.is_paravector()))
}

fn non_decaying(c: &BoundaryFunction, scheme: &QuadratureScheme) -> bool {
    c.decay_hint().is_none() && c.infer_decay(scheme.truncation_radius).is_none()
}

/// Class checks, the case-specific conditions and the datum used inside
/// the integral.
fn preflight(
    m: i32,
    c: &BoundaryFunction,
    scheme: &QuadratureScheme,
) -> Result<(SolveReport, BoundaryFunction, Option<Multivector>), Error> {
    scheme.validate()?;
    let sig = c.signature();
    let case = CaseTag::classify(sig.n(), m);
    let r = if m >= 0 { 0 } else { -(m + 1) };
    let vanishing = m < 0;
    let class = classify_hat_h(c, r)?;
    let mut warnings = Vec::new();
    let confirmed = if vanishing {
        class.in_hat_h_zero()
    } else {
        class.in_hat_h()
    };
    if !confirmed {
        warnings.push(Warning::ClassHypothesis {
            r,
            vanishing,
            holder_mu: class.holder.mu,
            dagger_mu: class.dagger.mu,
            limit: class.limit_at_infinity.as_ref().map(Multivector::norm),
        });
    }
    let mut integrand = c.clone();
    let mut shift = None;
    match case {
        CaseTag::C1 => {
            if non_decaying(c, scheme) {
                if let Some(k) = class.limit_at_infinity.clone().filter(|k| !k.is_zero() && k.is_para_real()) {
                    warnings.push(Warning::ConstantAtInfinity(k.norm()));
                    let base = c.clone();
                    let kk = k.clone();
                    integrand = BoundaryFunction::from_fn(sig, move |x| Ok(base.eval(x)? - &kk));
                    shift = Some(k);
                }
            }
        }
        CaseTag::C2 => match &class.limit_at_infinity {
            Some(l) if l.norm() > LIMIT_ZERO_TOL => {
                return Err(SolveError::DatumLimitNonzero(l.norm()).into());
            }
            Some(_) => {}
            None => warnings.push(Warning::LimitUndetermined),
        },
        CaseTag::C3 => {}
        CaseTag::C4 => {}
    }
    let mut conditions = Vec::new();
    if case == CaseTag::C4 {
        for alpha in condition_indices(sig, m)? {
            let (Some(moment), Some(lebesgue)) = (
                convergent(moment_integral(&alpha, c, scheme))?,
                convergent(moment_integral_lebesgue(&alpha, c, scheme))?,
            ) else {
                conditions.push(ConditionCheck {
                    moment: IntegralResult::divergent(sig),
                    lebesgue: IntegralResult::divergent(sig),
                    alpha,
                    tolerance: scheme.tolerance,
                    converged: false,
                    satisfied: false,
                });
                continue;
            };
            let tolerance = scheme.tolerance.max(10.0 * moment.total_error());
            let satisfied = moment.value.norm() <= tolerance;
            conditions.push(ConditionCheck {
                alpha,
                moment,
                lebesgue,
                tolerance,
                converged: true,
                satisfied,
            });
        }
    }
    let report = SolveReport {
        case,
        class,
        warnings,
        conditions,
    };
    Ok((report, integrand, shift))
}

/// Runs the class checks and, in case C4, the moment conditions without
/// assembling a solution. Unsatisfied conditions are reported, not raised.
pub fn check_datum(m: i32, c: &BoundaryFunction, scheme: &QuadratureScheme) -> Result<SolveReport, Error> {
    Ok(preflight(m, c, scheme)?.0)
}

fn assemble(
    m: i32,
    lambda: &Multivector,
    c: &BoundaryFunction,
    scheme: &QuadratureScheme,
    kind: FreeKind,
) -> Result<Solution, Error> {
    if lambda.signature() != c.signature() {
        return Err(crate::AlgebraError::SignatureMismatch {
            left: c.signature().n(),
            right: lambda.signature().n(),
        }
        .into());
    }
    let (lambda_inverse, lambda_is_paravector) = inverse_of(lambda)?;
    let (mut report, integrand, shift) = preflight(m, c, scheme)?;
    if !lambda_is_paravector {
        report.warnings.push(Warning::GeneralLambda);
    }
    if report.conditions.iter().any(|k| !k.satisfied) {
        return Err(SolveError::ConditionViolated(report.conditions).into());
    }
    Ok(Solution {
        case_tag: report.case,
        m,
        lambda: lambda.clone(),
        lambda_inverse,
        lambda_is_paravector,
        c: c.clone(),
        integrand,
        shift,
        scheme: scheme.clone(),
        poly_basis: free_basis(c.signature(), m)?,
        free_constants: BTreeMap::new(),
        kind,
        extra: Vec::new(),
        report,
    })
}

/// Solves `Re{Φ⁺ λ} = c`, `Φ = o(w^{m+1})`.
///
/// Class hypotheses that the estimators cannot confirm become warnings in
/// the report. Case C2 fails with [`SolveError::DatumLimitNonzero`] and
/// case C4 with [`SolveError::ConditionViolated`].
pub fn solve_hilbert(problem: &HilbertProblem) -> Result<Solution, Error> {
    assemble(
        problem.m,
        &problem.lambda,
        &problem.c,
        &problem.scheme,
        FreeKind::ParaReal,
    )
}

/// Solves `Re Φ⁺ = c`, `Φ = o(w^{m+1})`.
pub fn solve_schwarz(m: i32, c: &BoundaryFunction, scheme: &QuadratureScheme) -> Result<Solution, Error> {
    solve_hilbert(&HilbertProblem::schwarz(m, c.clone(), scheme.clone())?)
}

/// A field with separate branches on the two open half spaces.
#[derive(Clone, Debug)]
pub struct SectionallyRegularField {
    upper: PointField,
    lower: PointField,
}

impl SectionallyRegularField {
    pub fn new(upper: PointField, lower: PointField) -> Result<Self, Error> {
        if upper.signature() != lower.signature() {
            return Err(crate::AlgebraError::SignatureMismatch {
                left: upper.signature().n(),
                right: lower.signature().n(),
            }
            .into());
        }
        Ok(Self { upper, lower })
    }

    pub fn signature(&self) -> Signature {
        self.upper.signature()
    }

    pub fn upper(&self) -> &PointField {
        &self.upper
    }

    pub fn lower(&self) -> &PointField {
        &self.lower
    }

    /// The branch for the half space containing `w`.
    pub fn eval(&self, w: &Paravector) -> Result<Multivector, Error> {
        let h = w.height();
        if h > 0.0 {
            self.upper.eval(w)
        } else if h < 0.0 {
            self.lower.eval(w)
        } else {
            Err(SolveError::OnJumpSurface.into())
        }
    }

    /// `℧_↕`: upper branch `[℧⁻(w*)]*`, lower branch `[℧⁺(w*)]*`.
    pub fn reflected(&self) -> Self {
        let sig = self.signature();
        let lo = self.lower.clone();
        let up = self.upper.clone();
        Self {
            upper: PointField::new(sig, Domain::Upper, move |w| Ok(lo.eval(&w.star())?.star())),
            lower: PointField::new(sig, Domain::Lower, move |w| Ok(up.eval(&w.star())?.star())),
        }
    }

    /// `R[℧] = (℧ + ℧_↕)/2`.
    pub fn self_reflection(&self) -> Self {
        let refl = self.reflected();
        let sig = self.signature();
        let half = |a: PointField, b: PointField, domain: Domain| {
            PointField::new(sig, domain, move |w| Ok((a.eval(w)? + b.eval(w)?).scale(0.5)))
        };
        Self {
            upper: half(self.upper.clone(), refl.upper, Domain::Upper),
            lower: half(self.lower.clone(), refl.lower, Domain::Lower),
        }
    }

    /// `(Ψ(x + ε e_n), Ψ(x − ε e_n))`.
    pub fn approach(&self, x: &[f64], eps: f64) -> Result<(Multivector, Multivector), Error> {
        let sig = self.signature();
        Ok((self.eval(&lift(sig, x, eps)?)?, self.eval(&lift(sig, x, -eps)?)?))
    }

    /// `(Ψ⁺(x), Ψ⁻(x))` extrapolated from the approach steps `eps`.
    pub fn boundary_values(&self, x: &[f64], eps: &[f64]) -> Result<(Multivector, Multivector), Error> {
        let mut plus = Vec::with_capacity(eps.len());
        let mut minus = Vec::with_capacity(eps.len());
        for &e in eps {
            let (p, q) = self.approach(x, e)?;
            plus.push(p);
            minus.push(q);
        }
        Ok((extrapolate_to_zero(eps, &plus), extrapolate_to_zero(eps, &minus)))
    }
}

/// Extends `phi` from the upper half space by `[phi(w*)]*` below.
pub fn symmetric_extension(phi: &PointField) -> SectionallyRegularField {
    let sig = phi.signature();
    let up = phi.clone();
    let lo = phi.clone();
    SectionallyRegularField {
        upper: PointField::new(sig, Domain::Upper, move |w| up.eval(w)),
        lower: PointField::new(sig, Domain::Lower, move |w| Ok(lo.eval(&w.star())?.star())),
    }
}

/// `℧_↕`.
pub fn reflective(psi: &SectionallyRegularField) -> SectionallyRegularField {
    psi.reflected()
}

/// `R[℧]`.
pub fn self_reflection(psi: &SectionallyRegularField) -> SectionallyRegularField {
    psi.self_reflection()
}

/// A solved jump problem `Ψ⁺ + Ψ⁻ = 2c`: `Ψ = ±Φ` with
/// `Φ = S[c] + Σ Z^α c_α / |α|!` and arbitrary constants `c_α`.
#[derive(Clone, Debug)]
pub struct JumpSolution {
    inner: Solution,
}

impl JumpSolution {
    pub fn case_tag(&self) -> CaseTag {
        self.inner.case_tag
    }

    pub fn poly_basis(&self) -> &[MultiIndex] {
        &self.inner.poly_basis
    }

    pub fn report(&self) -> &SolveReport {
        &self.inner.report
    }

    /// Sets `c_α` (any value in `C(V_n)`).
    pub fn set_free_constant(&mut self, alpha: &MultiIndex, value: Multivector) -> Result<(), Error> {
        self.inner.set_free_constant(alpha, value)
    }

    /// `Φ(w)` on either half space.
    pub fn phi(&self, w: &Paravector) -> Result<Multivector, Error> {
        self.inner.schwarz_value(w)
    }

    /// `+Φ` above the hyperplane, `−Φ` below.
    pub fn field(&self) -> SectionallyRegularField {
        let sig = self.inner.signature();
        let up = self.inner.clone();
        let lo = self.inner.clone();
        SectionallyRegularField {
            upper: PointField::new(sig, Domain::Upper, move |w| up.schwarz_value(w)),
            lower: PointField::new(sig, Domain::Lower, move |w| Ok(-lo.schwarz_value(w)?)),
        }
    }
}

/// Solves the jump problem `Ψ⁺ + Ψ⁻ = 2c`, `Ψ = o(w^{m+1})`.
pub fn solve_riemann_jump(m: i32, c: &BoundaryFunction, scheme: &QuadratureScheme) -> Result<JumpSolution, Error> {
    let one = Multivector::one(c.signature());
    let inner = assemble(m, &one, c, scheme, FreeKind::General)?;
    Ok(JumpSolution { inner })
}

/// Probe geometry for [`verify_solution`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSet {
    /// Points with `w_n > 0` for the Dirac residual.
    pub interior: Vec<Paravector>,
    /// Hyperplane points for the boundary checks.
    pub boundary: Vec<Vec<f64>>,
    /// Approach steps, largest first.
    pub eps: Vec<f64>,
    pub rays: Vec<Paravector>,
    pub radii: Vec<f64>,
    /// Finite-difference step for the Dirac residual.
    pub step: f64,
}

/// Default approach steps `0.1, 0.05, 0.025`.
pub const DEFAULT_EPS: [f64; 3] = [0.1, 0.05, 0.025];

/// Default probe seed.
pub const DEFAULT_PROBE_SEED: u64 = 0x5eed_0b5e;

impl ProbeSet {
    /// Five interior points with `0.5 ≤ w_n ≤ 2`, ten boundary points in
    /// `[−2, 2]^n`, the default rays and radii and `h = 10^{-4}`.
    pub fn standard(sig: Signature, seed: u64) -> Self {
        let n = sig.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coord = |rng: &mut ChaCha8Rng| -> f64 { -2.0 + 4.0 * rng.random::<f64>() };
        let interior = (0..5)
            .map(|_| {
                let mut comps: SmallVec<[f64; 4]> = (0..n).map(|_| coord(&mut rng)).collect();
                comps.push(0.5 + 1.5 * rng.random::<f64>());
                Paravector::new(sig, &comps).expect("finite")
            })
            .collect();
        let boundary = (0..10).map(|_| (0..n).map(|_| coord(&mut rng)).collect()).collect();
        Self {
            interior,
            boundary,
            eps: DEFAULT_EPS.to_vec(),
            rays: default_rays(sig),
            radii: default_radii(),
            step: DEFAULT_STEP,
        }
    }

    pub fn with_eps(mut self, eps: Vec<f64>) -> Self {
        self.eps = eps;
        self
    }
}

/// Pass thresholds used by [`VerificationReport::passed`].
pub const DIRAC_TOLERANCE: f64 = 1e-5;
/// Smallest accepted fitted decay order of the boundary residual.
pub const MIN_BOUNDARY_ORDER: f64 = 0.9;
/// Largest accepted residual after extrapolation to the boundary.
pub const LIMIT_TOLERANCE: f64 = 1e-2;
/// Residuals below this count as exact.
pub const NEGLIGIBLE: f64 = 1e-9;

/// A sequence of residuals over the approach steps.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproachResiduals {
    /// `(ε, sup over probes)`.
    pub steps: Vec<(f64, f64)>,
    /// Fitted `p` in `residual ≈ C ε^p`; `None` when all residuals are
    /// negligible.
    pub order: Option<f64>,
    /// Sup residual with boundary values extrapolated to `ε = 0`.
    pub extrapolated: f64,
}

impl ApproachResiduals {
    fn new(steps: Vec<(f64, f64)>, extrapolated: f64) -> Self {
        let pts: Vec<(f64, f64)> = steps.iter().filter(|s| s.1 > NEGLIGIBLE).copied().collect();
        let order = if pts.len() >= 2 && pts.len() == steps.len() {
            let xs: Vec<f64> = pts.iter().map(|p| math::ln(p.0)).collect();
            let ys: Vec<f64> = pts.iter().map(|p| math::ln(p.1)).collect();
            math::linear_fit(&xs, &ys).map(|f| f.0)
        } else {
            None
        };
        Self {
            steps,
            order,
            extrapolated,
        }
    }

    /// Negligible throughout, or decaying at least linearly with a small
    /// extrapolated limit.
    pub fn converges(&self) -> bool {
        if self.steps.iter().all(|s| s.1 <= NEGLIGIBLE) {
            return true;
        }
        self.order.is_some_and(|p| p >= MIN_BOUNDARY_ORDER) && self.extrapolated <= LIMIT_TOLERANCE
    }

    /// Residual at the smallest step.
    pub fn last(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.1)
    }
}

/// Outcome of [`verify_solution`].
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    /// Largest `|D[Φ]|` over the interior probes.
    pub dirac_residual: f64,
    /// `sup_x |Re(Φ(x + ε e_n) λ) − c(x)|`.
    pub boundary: ApproachResiduals,
    pub order: OrderEstimate,
    /// Order at infinity at most `m`.
    pub growth_ok: bool,
    /// `sup_x |Ψ(x + ε e_n) + Ψ(x − ε e_n) − 2c(x)|` for the symmetric
    /// extension `Ψ` of `Φλ`.
    pub reflection: ApproachResiduals,
    pub m: i32,
}

impl VerificationReport {
    pub fn regularity_ok(&self) -> bool {
        self.dirac_residual < DIRAC_TOLERANCE
    }

    pub fn boundary_ok(&self) -> bool {
        self.boundary.converges()
    }

    pub fn reflection_ok(&self) -> bool {
        self.reflection.converges()
    }

    pub fn passed(&self) -> bool {
        self.regularity_ok() && self.boundary_ok() && self.growth_ok && self.reflection_ok()
    }
}

/// Checks regularity, the boundary condition, the growth condition and the
/// reflection identity of a solution on the given probes.
pub fn verify_solution(sol: &Solution, probes: &ProbeSet) -> Result<VerificationReport, Error> {
    let mut dirac = 0.0f64;
    for w in &probes.interior {
        let local = sol.local_field(w)?;
        let r = dirac_residual(&local, w, probes.step, Side::Left)?;
        dirac = dirac.max(r.norm());
    }

    let field = sol.field();
    let schwarz = field.mul_right(sol.lambda.clone());
    let ext = symmetric_extension(&schwarz);
    let mut bsteps = Vec::with_capacity(probes.eps.len());
    let mut rsteps = Vec::with_capacity(probes.eps.len());
    let mut plus: Vec<Vec<Multivector>> = Vec::new();
    let mut minus: Vec<Vec<Multivector>> = Vec::new();
    let data: Result<Vec<Multivector>, Error> = probes
        .boundary
        .iter()
        .map(|x| Ok(sol.c.eval(x)?))
        .collect();
    let data = data?;
    for &e in &probes.eps {
        let mut bsup = 0.0f64;
        let mut rsup = 0.0f64;
        let mut prow = Vec::with_capacity(probes.boundary.len());
        let mut mrow = Vec::with_capacity(probes.boundary.len());
        for (x, cx) in probes.boundary.iter().zip(&data) {
            let (p, q) = ext.approach(x, e)?;
            bsup = bsup.max((p.re() - cx).norm());
            rsup = rsup.max((&p + &q - cx.scale(2.0)).norm());
            prow.push(p);
            mrow.push(q);
        }
        bsteps.push((e, bsup));
        rsteps.push((e, rsup));
        plus.push(prow);
        minus.push(mrow);
    }
    let mut blimit = 0.0f64;
    let mut rlimit = 0.0f64;
    if !probes.eps.is_empty() {
        for (k, cx) in data.iter().enumerate() {
            let pk: Vec<Multivector> = plus.iter().map(|row| row[k].clone()).collect();
            let mk: Vec<Multivector> = minus.iter().map(|row| row[k].clone()).collect();
            let p = extrapolate_to_zero(&probes.eps, &pk);
            let q = extrapolate_to_zero(&probes.eps, &mk);
            blimit = blimit.max((p.re() - cx).norm());
            rlimit = rlimit.max((&p + &q - cx.scale(2.0)).norm());
        }
    }

    let order = order_at_infinity(&field, &probes.rays, &probes.radii)?;
    let growth_ok = match order.order {
        None => true,
        Some(o) => o <= sol.m,
    };
    Ok(VerificationReport {
        dirac_residual: dirac,
        boundary: ApproachResiduals::new(bsteps, blimit),
        order,
        growth_ok,
        reflection: ApproachResiduals::new(rsteps, rlimit),
        m: sol.m,
    })
}
