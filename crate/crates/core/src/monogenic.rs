//! Monogenic building blocks: the Cauchy kernel, hypercomplex variables,
//! Fueter symmetric powers, finite-difference Dirac residuals and growth
//! order at infinity.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use smallvec::SmallVec;

use crate::clifford::{Multivector, Paravector, Signature};
use crate::error::{Error, MonogenicError};
use crate::math;

/// Largest supported `|α|`.
pub const MAX_DEGREE: u32 = 8;

/// `|w|` below this is treated as the pole of the Cauchy kernel.
pub const POLE_THRESHOLD: f64 = 1e-14;

/// Base finite-difference step; callers usually scale it by `max(1, |w|)`.
pub const DEFAULT_STEP: f64 = 1e-4;

/// `α = [α_1, …, α_n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    alpha: SmallVec<[u32; 4]>,
}

impl MultiIndex {
    pub fn new(sig: Signature, alpha: &[u32]) -> Result<Self, MonogenicError> {
        if alpha.len() != sig.n() {
            return Err(MonogenicError::MultiIndexLength {
                expected: sig.n(),
                got: alpha.len(),
            });
        }
        let degree: u32 = alpha.iter().sum();
        if degree > MAX_DEGREE {
            return Err(MonogenicError::DegreeCapExceeded {
                degree,
                cap: MAX_DEGREE,
            });
        }
        Ok(Self {
            alpha: SmallVec::from_slice(alpha),
        })
    }

    pub fn zero(sig: Signature) -> Self {
        Self {
            alpha: SmallVec::from_elem(0, sig.n()),
        }
    }

    #[inline]
    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    /// `|α|`.
    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum()
    }

    /// `Π α_j!`, the number of orderings that produce the same arrangement.
    pub fn multiplicity(&self) -> u64 {
        self.alpha
            .iter()
            .map(|&a| (1..=a as u64).product::<u64>())
            .product()
    }

    /// Number of distinct arrangements of the index multiset,
    /// `|α|! / Π α_j!`.
    pub fn arrangements(&self) -> u64 {
        let mut remaining = self.degree() as u64;
        let mut acc = 1u64;
        for &a in self.alpha.iter() {
            acc *= math::binomial(remaining, a as u64);
            remaining -= a as u64;
        }
        acc
    }

    /// The ascending index word `(ℓ_1, …, ℓ_k)` with `j` repeated `α_j` times.
    pub fn index_word(&self) -> Vec<usize> {
        self.alpha
            .iter()
            .enumerate()
            .flat_map(|(j, &a)| core::iter::repeat_n(j + 1, a as usize))
            .collect()
    }

    /// Every multi-index of the given degree, in lexicographically
    /// descending order (`[d,0,…]` first).
    pub fn all_of_degree(sig: Signature, degree: u32) -> Result<Vec<Self>, MonogenicError> {
        if degree > MAX_DEGREE {
            return Err(MonogenicError::DegreeCapExceeded {
                degree,
                cap: MAX_DEGREE,
            });
        }
        let mut out = Vec::new();
        let mut buf: SmallVec<[u32; 4]> = SmallVec::from_elem(0, sig.n());
        fill_compositions(&mut buf, 0, degree, &mut out);
        Ok(out)
    }

    /// Every multi-index with `|α| ≤ degree`, grouped by degree.
    pub fn up_to_degree(sig: Signature, degree: u32) -> Result<Vec<Self>, MonogenicError> {
        let mut out = Vec::new();
        for d in 0..=degree {
            out.extend(Self::all_of_degree(sig, d)?);
        }
        Ok(out)
    }

    fn decremented(&self, j: usize) -> Self {
        let mut alpha = self.alpha.clone();
        alpha[j] -= 1;
        Self { alpha }
    }
}

fn fill_compositions(
    buf: &mut SmallVec<[u32; 4]>,
    pos: usize,
    remaining: u32,
    out: &mut Vec<MultiIndex>,
) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex { alpha: buf.clone() });
        return;
    }
    for a in (0..=remaining).rev() {
        buf[pos] = a;
        fill_compositions(buf, pos + 1, remaining - a, out);
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, a) in self.alpha.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("]")
    }
}

/// `z_j(w) = w_j − w_0 e_j`, `1 ≤ j ≤ n`.
pub fn hyper_variable(j: usize, w: &Paravector) -> Result<Multivector, MonogenicError> {
    let sig = w.signature();
    if j == 0 || j > sig.n() {
        return Err(MonogenicError::IndexOutOfRange { j, n: sig.n() });
    }
    let mut coeffs: SmallVec<[f64; 8]> = SmallVec::from_elem(0.0, sig.dim());
    coeffs[0] = w.component(j);
    coeffs[1 << (j - 1)] = -w.component(0);
    Ok(Multivector::from_coeffs(sig, &coeffs).expect("finite paravector"))
}

/// Memoized Fueter powers at a fixed point.
///
/// Writing `A(α)` for the sum over distinct arrangements, grouping by the
/// last factor gives `A(α) = Σ_{α_j > 0} A(α − ε_j) z_j`.
pub struct FueterTable {
    z: Vec<Multivector>,
    cache: BTreeMap<MultiIndex, Multivector>,
}

impl FueterTable {
    pub fn new(w: &Paravector) -> Self {
        let sig = w.signature();
        let z = (1..=sig.n())
            .map(|j| hyper_variable(j, w).expect("index in range"))
            .collect();
        let mut cache = BTreeMap::new();
        cache.insert(MultiIndex::zero(sig), Multivector::one(sig));
        Self { z, cache }
    }

    pub fn get(&mut self, alpha: &MultiIndex) -> Result<Multivector, MonogenicError> {
        if alpha.alpha.len() != self.z.len() {
            return Err(MonogenicError::MultiIndexLength {
                expected: self.z.len(),
                got: alpha.alpha.len(),
            });
        }
        if alpha.degree() > MAX_DEGREE {
            return Err(MonogenicError::DegreeCapExceeded {
                degree: alpha.degree(),
                cap: MAX_DEGREE,
            });
        }
        Ok(self.compute(alpha))
    }

    fn compute(&mut self, alpha: &MultiIndex) -> Multivector {
        if let Some(v) = self.cache.get(alpha) {
            return v.clone();
        }
        let sig = self.z[0].signature();
        let mut acc = Multivector::zero(sig);
        for j in 0..alpha.alpha.len() {
            if alpha.alpha[j] == 0 {
                continue;
            }
            let prefix = self.compute(&alpha.decremented(j));
            acc += &(&prefix * &self.z[j]);
        }
        self.cache.insert(alpha.clone(), acc.clone());
        acc
    }
}

/// Fueter symmetric power `Z^α(w)`: the sum of every distinct product of the
/// `z_j` containing `z_j` exactly `α_j` times.
pub fn fueter_power(alpha: &MultiIndex, w: &Paravector) -> Result<Multivector, MonogenicError> {
    FueterTable::new(w).get(alpha)
}

fn check_pole(w: &Paravector) -> Result<f64, MonogenicError> {
    let r = w.norm();
    if r < POLE_THRESHOLD {
        Err(MonogenicError::PoleAtOrigin)
    } else {
        Ok(r)
    }
}

/// `E(w) = w̄ / |w|^{n+1}`.
pub fn cauchy_kernel(w: &Paravector) -> Result<Multivector, MonogenicError> {
    let r = check_pole(w)?;
    let n = w.signature().n() as i32;
    Ok(w.bar().to_multivector().scale(1.0 / math::powi(r, n + 1)))
}

/// `−∂E/∂w_ℓ = −[ē_ℓ / |w|^{n+1} − (n+1) w_ℓ w̄ / |w|^{n+3}]`, `0 ≤ ℓ ≤ n`.
pub fn cauchy_kernel_derivative(ell: usize, w: &Paravector) -> Result<Multivector, MonogenicError> {
    let sig = w.signature();
    let n = sig.n();
    if ell > n {
        return Err(MonogenicError::IndexOutOfRange { j: ell, n });
    }
    let r = check_pole(w)?;
    let r2 = r * r;
    let inv = 1.0 / math::powi(r, n as i32 + 1);
    let mut out = w.bar().to_multivector().scale((n as f64 + 1.0) * w.component(ell) * inv / r2);
    let mask = if ell == 0 { 0 } else { 1u32 << (ell - 1) };
    let ebar = if ell == 0 { 1.0 } else { -1.0 };
    let mut coeffs: SmallVec<[f64; 8]> = SmallVec::from_slice(out.coeffs());
    coeffs[mask as usize] -= ebar * inv;
    out = Multivector::from_coeffs(sig, &coeffs).expect("finite");
    Ok(out)
}

/// `W_{ℓ_1…ℓ_k}(w) = (−1)^k ∂^k E / ∂w_{ℓ_1}⋯∂w_{ℓ_k}`, `k ≤ 3`.
///
/// `k = 0` is `E`, `k = 1` is the analytic first derivative. Higher orders
/// apply nested central differences with step `h` on top of the analytic
/// first derivative.
pub fn negative_power(indices: &[usize], w: &Paravector, h: f64) -> Result<Multivector, MonogenicError> {
    let n = w.signature().n();
    if indices.len() > 3 {
        return Err(MonogenicError::DerivativeOrderTooHigh(indices.len()));
    }
    if let Some(&bad) = indices.iter().find(|&&l| l > n) {
        return Err(MonogenicError::IndexOutOfRange { j: bad, n });
    }
    check_pole(w)?;
    match indices {
        [] => cauchy_kernel(w),
        [l] => cauchy_kernel_derivative(*l, w),
        [first, rest @ ..] => {
            if !(h > 0.0) {
                return Err(MonogenicError::InvalidStep);
            }
            // (−1)^k ∂^k E = (−1)^{k−1} ∂^{k−1} (−∂_{ℓ_1} E)
            let sign = if rest.len() % 2 == 0 { 1.0 } else { -1.0 };
            Ok(nested_difference(*first, rest, w, h)?.scale(sign))
        }
    }
}

fn nested_difference(
    first: usize,
    rest: &[usize],
    w: &Paravector,
    h: f64,
) -> Result<Multivector, MonogenicError> {
    match rest {
        [] => {
            if w.norm() < POLE_THRESHOLD {
                return Err(MonogenicError::StencilCrossesOrigin);
            }
            cauchy_kernel_derivative(first, w)
        }
        [l, tail @ ..] => {
            let plus = nested_difference(first, tail, &w.offset(*l, h), h)?;
            let minus = nested_difference(first, tail, &w.offset(*l, -h), h)?;
            Ok((plus - minus).scale(0.5 / h))
        }
    }
}

/// Where a [`PointField`] may be evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Everywhere,
    /// `ℝ^{n+1} ∖ {0}`.
    Punctured,
    /// `w_n > 0`.
    Upper,
    /// `w_n < 0`.
    Lower,
    /// `w_n ≠ 0`.
    OffHyperplane,
}

impl Domain {
    pub fn contains(self, w: &Paravector) -> bool {
        match self {
            Domain::Everywhere => true,
            Domain::Punctured => w.norm() >= POLE_THRESHOLD,
            Domain::Upper => w.height() > 0.0,
            Domain::Lower => w.height() < 0.0,
            Domain::OffHyperplane => w.height() != 0.0,
        }
    }
}

type FieldFn = dyn Fn(&Paravector) -> Result<Multivector, Error> + Send + Sync;

/// A multivector-valued function on an open subset of `ℝ^{n+1}`.
///
/// The callable must be pure and safe to evaluate from several threads.
#[derive(Clone)]
pub struct PointField {
    sig: Signature,
    domain: Domain,
    f: Arc<FieldFn>,
}

impl fmt::Debug for PointField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointField")
            .field("sig", &self.sig)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl PointField {
    pub fn new<F>(sig: Signature, domain: Domain, f: F) -> Self
    where
        F: Fn(&Paravector) -> Result<Multivector, Error> + Send + Sync + 'static,
    {
        Self {
            sig,
            domain,
            f: Arc::new(f),
        }
    }

    pub fn constant(value: Multivector) -> Self {
        let sig = value.signature();
        Self::new(sig, Domain::Everywhere, move |_| Ok(value.clone()))
    }

    /// `w ↦ E(w)`.
    pub fn cauchy_kernel(sig: Signature) -> Self {
        Self::new(sig, Domain::Punctured, |w| Ok(cauchy_kernel(w)?))
    }

    /// `w ↦ −∂E/∂w_ℓ`.
    pub fn cauchy_kernel_derivative(sig: Signature, ell: usize) -> Self {
        Self::new(sig, Domain::Punctured, move |w| Ok(cauchy_kernel_derivative(ell, w)?))
    }

    /// `w ↦ z_j(w)`.
    pub fn hyper_variable(sig: Signature, j: usize) -> Self {
        Self::new(sig, Domain::Everywhere, move |w| Ok(hyper_variable(j, w)?))
    }

    /// `w ↦ Z^α(w)`.
    pub fn fueter(alpha: MultiIndex, sig: Signature) -> Self {
        Self::new(sig, Domain::Everywhere, move |w| Ok(fueter_power(&alpha, w)?))
    }

    /// `w ↦ w` as a paravector.
    pub fn identity(sig: Signature) -> Self {
        Self::new(sig, Domain::Everywhere, |w| Ok(w.to_multivector()))
    }

    #[inline]
    pub fn signature(&self) -> Signature {
        self.sig
    }

    #[inline]
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn eval(&self, w: &Paravector) -> Result<Multivector, Error> {
        if w.signature() != self.sig {
            return Err(crate::AlgebraError::SignatureMismatch {
                left: self.sig.n(),
                right: w.signature().n(),
            }
            .into());
        }
        if !self.domain.contains(w) {
            return Err(MonogenicError::OutsideDomain.into());
        }
        (self.f)(w)
    }

    /// `w ↦ f(w)·λ`.
    pub fn mul_right(&self, lambda: Multivector) -> Self {
        let inner = self.clone();
        Self::new(self.sig, self.domain, move |w| Ok(inner.eval(w)? * &lambda))
    }

    /// `w ↦ f(w) + g(w)` on the narrower of the two domains.
    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let domain = if self.domain == Domain::Everywhere {
            other.domain
        } else {
            self.domain
        };
        Self::new(self.sig, domain, move |w| Ok(a.eval(w)? + b.eval(w)?))
    }
}

/// Which side the Dirac operator acts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `D[f] = Σ_k e_k ∂f/∂w_k`.
    Left,
    /// `[f]D = Σ_k ∂f/∂w_k e_k`.
    Right,
}

/// Central differences `∂f/∂w_k`, `k = 0..=n`.
fn partials(f: &PointField, w: &Paravector, h: f64) -> Result<Vec<Multivector>, Error> {
    if !(h > 0.0) {
        return Err(MonogenicError::InvalidStep.into());
    }
    let n = f.signature().n();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let plus = w.offset(k, h);
        let minus = w.offset(k, -h);
        if !f.domain().contains(&plus) || !f.domain().contains(&minus) {
            return Err(MonogenicError::StencilOutsideDomain.into());
        }
        let d = f.eval(&plus)? - f.eval(&minus)?;
        out.push(d.scale(0.5 / h));
    }
    Ok(out)
}

fn generator_or_one(sig: Signature, k: usize) -> Multivector {
    if k == 0 {
        Multivector::one(sig)
    } else {
        Multivector::generator(sig, k).expect("k ≤ n")
    }
}

/// Second-order central-difference approximation of `D[f]` or `[f]D` at `w`.
pub fn dirac_residual(f: &PointField, w: &Paravector, h: f64, side: Side) -> Result<Multivector, Error> {
    let sig = f.signature();
    let parts = partials(f, w, h)?;
    let mut acc = Multivector::zero(sig);
    for (k, d) in parts.iter().enumerate() {
        let ek = generator_or_one(sig, k);
        let term = match side {
            Side::Left => &ek * d,
            Side::Right => d * &ek,
        };
        acc += &term;
    }
    Ok(acc)
}

/// Cauchy–Riemann split of the left Dirac residual.
///
/// With `f = U + e_n V`, `∂_x = Σ_{j<n} e_j ∂_j`, `∂̄_x = e_0∂_0 − Σ_{1≤j<n} e_j ∂_j`
/// and `∂_y = ∂_n`:
/// `r1 = ∂_x[U] − ∂_y[V]`, `r2 = ∂_y[U] + ∂̄_x[V]`, and `D[f] = r1 + e_n r2`.
pub fn cauchy_riemann_residual(
    f: &PointField,
    w: &Paravector,
    h: f64,
) -> Result<(Multivector, Multivector), Error> {
    let sig = f.signature();
    let n = sig.n();
    let parts: Vec<_> = partials(f, w, h)?.iter().map(|d| d.decompose()).collect();
    let mut r1 = Multivector::zero(sig);
    let mut r2 = Multivector::zero(sig);
    for (k, d) in parts.iter().enumerate().take(n) {
        let ek = generator_or_one(sig, k);
        r1 += &(&ek * &d.re);
        let conj = if k == 0 { ek } else { -ek };
        r2 += &(&conj * &d.im_left);
    }
    r1 = r1 - &parts[n].im_left;
    r2 += &parts[n].re;
    Ok((r1, r2))
}

/// Outcome of [`order_at_infinity`].
#[derive(Clone, Debug, PartialEq)]
pub struct OrderEstimate {
    /// Rounded growth exponent; `None` when every sample is zero.
    pub order: Option<i32>,
    /// Least-squares slope of `log sup_rays |f|` against `log r`.
    pub slope: f64,
    /// Largest deviation of an individual ray's slope from `slope`.
    pub spread: f64,
}

/// Radii `2^4, 2^5, …, 2^12`.
pub fn default_radii() -> Vec<f64> {
    (4..=12).map(|k| math::powi(2.0, k)).collect()
}

/// Eight fixed unit directions in the open upper half space.
pub fn default_rays(sig: Signature) -> Vec<Paravector> {
    let n = sig.n();
    (0..8)
        .map(|k| {
            let kf = k as f64;
            let mut comps: SmallVec<[f64; 4]> = (0..n)
                .map(|i| math::sin(0.7 + 1.9 * kf + 2.3 * i as f64))
                .collect();
            comps.push(0.6 + 0.3 * math::cos(kf));
            let norm = math::sqrt(comps.iter().map(|c| c * c).sum());
            for c in comps.iter_mut() {
                *c /= norm;
            }
            Paravector::new(sig, &comps).expect("finite direction")
        })
        .collect()
}

/// Estimates `Ord(f, ∞)` from samples `f(r·d)`.
pub fn order_at_infinity(
    f: &PointField,
    rays: &[Paravector],
    radii: &[f64],
) -> Result<OrderEstimate, Error> {
    let mut logs_r = Vec::new();
    let mut logs_sup = Vec::new();
    let mut per_ray: Vec<(Vec<f64>, Vec<f64>)> = rays.iter().map(|_| (Vec::new(), Vec::new())).collect();
    for &r in radii {
        let mut sup = 0.0f64;
        for (d, samples) in rays.iter().zip(per_ray.iter_mut()) {
            let v = f.eval(&d.scale(r))?.norm();
            if v > 0.0 {
                samples.0.push(math::ln(r));
                samples.1.push(math::ln(v));
            }
            sup = sup.max(v);
        }
        if sup > 0.0 {
            logs_r.push(math::ln(r));
            logs_sup.push(math::ln(sup));
        }
    }
    if logs_r.is_empty() {
        return Ok(OrderEstimate {
            order: None,
            slope: f64::NEG_INFINITY,
            spread: 0.0,
        });
    }
    let slope = match math::linear_fit(&logs_r, &logs_sup) {
        Some((s, _, _)) => s,
        None => f64::NAN,
    };
    let spread = per_ray
        .iter()
        .filter_map(|(x, y)| math::linear_fit(x, y))
        .map(|(s, _, _)| (s - slope).abs())
        .fold(0.0, f64::max);
    let order = if slope.is_finite() {
        Some(math::round(slope) as i32)
    } else {
        None
    };
    Ok(OrderEstimate {
        order,
        slope,
        spread,
    })
}

/// `Σ_α Z^α(w) c_α` with right coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricPolynomial {
    sig: Signature,
    terms: BTreeMap<MultiIndex, Multivector>,
}

impl SymmetricPolynomial {
    pub fn new(sig: Signature) -> Self {
        Self {
            sig,
            terms: BTreeMap::new(),
        }
    }

    #[inline]
    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// Sets `c_α`, replacing any previous coefficient.
    pub fn set(&mut self, alpha: MultiIndex, coeff: Multivector) -> Result<(), Error> {
        if alpha.alpha().len() != self.sig.n() {
            return Err(MonogenicError::MultiIndexLength {
                expected: self.sig.n(),
                got: alpha.alpha().len(),
            }
            .into());
        }
        if coeff.signature() != self.sig {
            return Err(crate::AlgebraError::SignatureMismatch {
                left: self.sig.n(),
                right: coeff.signature().n(),
            }
            .into());
        }
        self.terms.insert(alpha, coeff);
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Multivector)> {
        self.terms.iter()
    }

    /// Largest `|α|` with `c_α ≠ 0`; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(a, _)| a.degree())
            .max()
    }

    pub fn eval(&self, w: &Paravector) -> Result<Multivector, Error> {
        let mut table = FueterTable::new(w);
        let mut acc = Multivector::zero(self.sig);
        for (alpha, c) in &self.terms {
            if c.is_zero() {
                continue;
            }
            acc += &(table.get(alpha)? * c);
        }
        Ok(acc)
    }

    pub fn to_field(&self) -> PointField {
        let p = self.clone();
        PointField::new(self.sig, Domain::Everywhere, move |w| p.eval(w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn sig(n: usize) -> Signature {
        Signature::new(n).unwrap()
    }

    fn pv(s: Signature, c: &[f64]) -> Paravector {
        Paravector::new(s, c).unwrap()
    }

    #[test]
    fn hyper_variable_examples() {
        let s = sig(2);
        let z1 = hyper_variable(1, &pv(s, &[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(z1, -Multivector::generator(s, 1).unwrap());
        assert!(hyper_variable(2, &Paravector::zero(s)).unwrap().is_zero());
        let z2 = hyper_variable(2, &pv(s, &[0.0, 1.0, 3.0])).unwrap();
        assert_eq!(z2, Multivector::scalar(s, 3.0));
        assert!(hyper_variable(3, &Paravector::zero(s)).is_err());
        assert!(hyper_variable(0, &Paravector::zero(s)).is_err());
    }

    #[test]
    fn fueter_examples() {
        let s = sig(2);
        let w = pv(s, &[0.3, -0.7, 1.1]);
        let zero = MultiIndex::zero(s);
        assert_eq!(fueter_power(&zero, &w).unwrap(), Multivector::one(s));
        let a11 = MultiIndex::new(s, &[1, 1]).unwrap();
        let at = pv(s, &[0.0, 1.0, 1.0]);
        assert_eq!(fueter_power(&a11, &at).unwrap(), Multivector::scalar(s, 2.0));
        let a20 = MultiIndex::new(s, &[2, 0]).unwrap();
        let z1 = hyper_variable(1, &w).unwrap();
        assert!(fueter_power(&a20, &w).unwrap().approx_eq(&(&z1 * &z1), 1e-15));
    }

    #[test]
    fn multi_index_validation() {
        let s = sig(2);
        assert!(matches!(
            MultiIndex::new(s, &[1]),
            Err(MonogenicError::MultiIndexLength { .. })
        ));
        assert!(matches!(
            MultiIndex::new(s, &[5, 4]),
            Err(MonogenicError::DegreeCapExceeded { degree: 9, cap: 8 })
        ));
        let a = MultiIndex::new(s, &[2, 1]).unwrap();
        assert_eq!(a.index_word(), [1, 1, 2]);
        assert_eq!(a.arrangements(), 3);
        assert_eq!(a.multiplicity(), 2);
        assert_eq!(a.to_string(), "[2,1]");
    }

    #[test]
    fn enumeration_order() {
        let s = sig(2);
        let all: Vec<_> = MultiIndex::all_of_degree(s, 2)
            .unwrap()
            .iter()
            .map(|a| a.alpha().to_vec())
            .collect();
        assert_eq!(all, [[2, 0], [1, 1], [0, 2]]);
        assert_eq!(MultiIndex::up_to_degree(sig(3), 2).unwrap().len(), 10);
    }

    #[test]
    fn kernel_examples() {
        let s2 = sig(2);
        assert_eq!(cauchy_kernel(&pv(s2, &[1.0, 0.0, 0.0])).unwrap(), Multivector::one(s2));
        assert_eq!(
            cauchy_kernel(&pv(s2, &[2.0, 0.0, 0.0])).unwrap(),
            Multivector::scalar(s2, 0.25)
        );
        let en = cauchy_kernel(&pv(s2, &[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(en, -Multivector::generator(s2, 2).unwrap());
        assert_eq!(
            cauchy_kernel(&Paravector::zero(s2)),
            Err(MonogenicError::PoleAtOrigin)
        );
    }

    #[test]
    fn kernel_derivative_closed_form() {
        let s = sig(2);
        let d = cauchy_kernel_derivative(0, &pv(s, &[1.0, 0.0, 0.0])).unwrap();
        assert!(d.approx_eq(&Multivector::scalar(s, 2.0), 1e-15));
        let w = pv(s, &[1.0, 1.0, 0.0]);
        let h = 1e-5;
        for ell in 0..=2 {
            let fd = (cauchy_kernel(&w.offset(ell, h)).unwrap()
                - cauchy_kernel(&w.offset(ell, -h)).unwrap())
            .scale(-0.5 / h);
            let an = cauchy_kernel_derivative(ell, &w).unwrap();
            assert!(fd.distance(&an) < 1e-9, "ell={ell}");
        }
    }

    #[test]
    fn negative_power_orders() {
        let s = sig(2);
        let w = pv(s, &[2.0, 1.0, 1.0]);
        assert_eq!(negative_power(&[], &w, 1e-4).unwrap(), cauchy_kernel(&w).unwrap());
        assert_eq!(
            negative_power(&[1], &w, 1e-4).unwrap(),
            cauchy_kernel_derivative(1, &w).unwrap()
        );
        assert!(matches!(
            negative_power(&[0, 0, 0, 0], &w, 1e-4),
            Err(MonogenicError::DerivativeOrderTooHigh(4))
        ));
        let tiny = pv(s, &[1e-5, 0.0, 0.0]);
        assert_eq!(
            negative_power(&[0, 0], &tiny, 1e-5),
            Err(MonogenicError::StencilCrossesOrigin)
        );
    }

    #[test]
    fn second_derivative_matches_symmetry() {
        // mixed partials commute
        let s = sig(2);
        let w = pv(s, &[0.8, -0.4, 0.9]);
        let a = negative_power(&[0, 2], &w, 1e-4).unwrap();
        let b = negative_power(&[2, 0], &w, 1e-4).unwrap();
        assert!(a.distance(&b) < 1e-6);
    }

    #[test]
    fn constant_field_has_zero_residual() {
        let s = sig(3);
        let c = Multivector::from_coeffs(s, &[1.0, 2.0, 0.0, 3.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
        let f = PointField::constant(c);
        let w = pv(s, &[0.1, 0.2, 0.3, 0.4]);
        assert!(dirac_residual(&f, &w, 1e-3, Side::Left).unwrap().is_zero());
        let (r1, r2) = cauchy_riemann_residual(&f, &w, 1e-3).unwrap();
        assert!(r1.is_zero() && r2.is_zero());
    }

    #[test]
    fn kernel_is_left_and_right_regular() {
        let s = sig(3);
        let f = PointField::cauchy_kernel(s);
        let w = pv(s, &[1.0, 0.0, 0.0, 0.0]);
        for side in [Side::Left, Side::Right] {
            assert!(dirac_residual(&f, &w, 1e-4, side).unwrap().norm() < 1e-6);
        }
    }

    #[test]
    fn cauchy_riemann_reassembles_dirac() {
        let s = sig(3);
        // a non-regular field: w ↦ w · w
        let f = PointField::new(s, Domain::Everywhere, |w| {
            let m = w.to_multivector();
            Ok(&m * &m * Multivector::generator(w.signature(), 1).unwrap())
        });
        let w = pv(s, &[0.3, -0.2, 0.5, 0.7]);
        let d = dirac_residual(&f, &w, 1e-3, Side::Left).unwrap();
        let (r1, r2) = cauchy_riemann_residual(&f, &w, 1e-3).unwrap();
        let en = Multivector::generator(s, 3).unwrap();
        assert!((r1 + en * r2).distance(&d) < 1e-12);
        assert!(d.norm() > 1e-3);
    }

    #[test]
    fn stencil_outside_domain() {
        let s = sig(1);
        let f = PointField::new(s, Domain::Upper, |w| Ok(w.to_multivector()));
        let w = pv(s, &[0.0, 1e-5]);
        assert!(matches!(
            dirac_residual(&f, &w, 1e-4, Side::Left),
            Err(Error::Monogenic(MonogenicError::StencilOutsideDomain))
        ));
    }

    #[test]
    fn order_examples() {
        let s = sig(2);
        let rays = default_rays(s);
        let radii = default_radii();
        for d in &rays {
            assert!(d.height() > 0.0);
            assert!((d.norm() - 1.0).abs() < 1e-14);
        }
        let e = order_at_infinity(&PointField::cauchy_kernel(s), &rays, &radii).unwrap();
        assert_eq!(e.order, Some(-2));
        let c = order_at_infinity(&PointField::constant(Multivector::scalar(s, 3.0)), &rays, &radii)
            .unwrap();
        assert_eq!(c.order, Some(0));
        let z = order_at_infinity(&PointField::constant(Multivector::zero(s)), &rays, &radii).unwrap();
        assert_eq!(z.order, None);
        let a = MultiIndex::new(s, &[1, 1]).unwrap();
        let q = order_at_infinity(&PointField::fueter(a, s), &rays, &radii).unwrap();
        assert_eq!(q.order, Some(2));
    }

    #[test]
    fn polynomial_eval() {
        let s = sig(2);
        let kappa = Multivector::from_coeffs(s, &[1.0, 2.0, 0.0, 0.5]).unwrap();
        let mut p = SymmetricPolynomial::new(s);
        p.set(MultiIndex::zero(s), kappa.clone()).unwrap();
        assert_eq!(p.eval(&pv(s, &[4.0, 5.0, 6.0])).unwrap(), kappa);
        assert_eq!(p.degree(), Some(0));

        let mut q = SymmetricPolynomial::new(s);
        q.set(MultiIndex::new(s, &[1, 1]).unwrap(), Multivector::one(s)).unwrap();
        assert_eq!(q.eval(&pv(s, &[0.0, 1.0, 1.0])).unwrap(), Multivector::scalar(s, 2.0));
        assert_eq!(q.degree(), Some(2));
        assert_eq!(SymmetricPolynomial::new(s).degree(), None);
    }
}
