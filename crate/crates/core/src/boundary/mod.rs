//! Boundary data on the hyperplane `w_n = 0`.
//!
//! A [`BoundaryFunction`] is a para-real map `x ↦ c(x)` given by a parsed
//! [`Expr`], a sampled table, or a closure. The [`classes`] submodule holds
//! the empirical Hölder-type estimators.

pub mod classes;
mod parser;

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use smallvec::SmallVec;

pub use parser::{parse_multivector, Expr, Func, Node};

use crate::clifford::{Multivector, Paravector, Signature};
use crate::error::{BoundaryError, ParseError};
use crate::math;

/// Declared or inferred bound on `|c(x)|` for large `|x|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayHint {
    /// `c ≡ 0`.
    Zero,
    /// `c(x) = 0` for `|x| > radius`, `|c| ≤ amplitude` elsewhere.
    Compact { radius: f64, amplitude: f64 },
    /// `|c(x)| ≤ amplitude · exp(−rate |x|²)`.
    Gaussian { amplitude: f64, rate: f64 },
    /// `|c(x)| ≤ amplitude · (1 + |x|)^{−exponent}`.
    Power { exponent: f64, amplitude: f64 },
}

type BoundaryFn = dyn Fn(&[f64]) -> Result<Multivector, BoundaryError> + Send + Sync;

#[derive(Clone)]
enum Source {
    Zero,
    Expr(Expr),
    Sampled(Arc<SampledTable>),
    Function(Arc<BoundaryFn>),
}

/// A para-real function on the hyperplane.
#[derive(Clone)]
pub struct BoundaryFunction {
    sig: Signature,
    source: Source,
    decay: Option<DecayHint>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Zero => "0".to_string(),
            Source::Expr(e) => e.to_string(),
            Source::Sampled(t) => alloc::format!("<table of {} points>", t.len()),
            Source::Function(_) => "<closure>".to_string(),
        };
        f.debug_struct("BoundaryFunction")
            .field("n", &self.sig.n())
            .field("source", &kind)
            .field("decay", &self.decay)
            .finish()
    }
}

impl BoundaryFunction {
    pub fn zero(sig: Signature) -> Self {
        Self {
            sig,
            source: Source::Zero,
            decay: Some(DecayHint::Zero),
        }
    }

    /// Parses an expression; see [`Expr`] for the grammar.
    pub fn parse(text: &str, sig: Signature) -> Result<Self, ParseError> {
        Ok(Self::from_expr(Expr::parse(text, sig)?))
    }

    pub fn from_expr(expr: Expr) -> Self {
        let sig = expr.signature();
        if expr.is_literal_zero() {
            return Self::zero(sig);
        }
        Self {
            sig,
            source: Source::Expr(expr),
            decay: None,
        }
    }

    pub fn sampled(table: SampledTable) -> Self {
        let decay = Some(DecayHint::Compact {
            radius: table.extent(),
            amplitude: table.max_abs(),
        });
        Self {
            sig: table.sig,
            source: Source::Sampled(Arc::new(table)),
            decay,
        }
    }

    /// Wraps a closure; values with an `e_n` component are rejected at
    /// evaluation time.
    pub fn from_fn<F>(sig: Signature, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Multivector, BoundaryError> + Send + Sync + 'static,
    {
        Self {
            sig,
            source: Source::Function(Arc::new(f)),
            decay: None,
        }
    }

    /// `Σ a_k c_k` with real weights.
    pub fn linear_combination(terms: &[(f64, BoundaryFunction)]) -> Self {
        let sig = terms.first().map(|t| t.1.sig).expect("at least one term");
        let parts: Vec<(f64, BoundaryFunction)> = terms.to_vec();
        Self::from_fn(sig, move |x| {
            let mut acc = Multivector::zero(sig);
            for (a, c) in &parts {
                acc += &c.eval(x)?.scale(*a);
            }
            Ok(acc)
        })
    }

    /// Attaches a decay bound used for truncation-tail estimates.
    pub fn with_decay(mut self, hint: DecayHint) -> Self {
        self.decay = Some(hint);
        self
    }

    #[inline]
    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// The declared (or intrinsic, for tables and zero) decay bound.
    pub fn decay_hint(&self) -> Option<DecayHint> {
        self.decay
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.source {
            Source::Expr(e) => Some(e),
            _ => None,
        }
    }

    /// True when `c` is known to vanish identically.
    pub fn is_identically_zero(&self) -> bool {
        match &self.source {
            Source::Zero => true,
            Source::Sampled(t) => t.max_abs() == 0.0,
            _ => matches!(self.decay, Some(DecayHint::Zero)),
        }
    }

    /// `c(x)` at hyperplane coordinates `x = (x_0, …, x_{n-1})`.
    pub fn eval(&self, x: &[f64]) -> Result<Multivector, BoundaryError> {
        if x.len() != self.sig.n() {
            return Err(BoundaryError::PointDimension {
                expected: self.sig.n(),
                got: x.len(),
            });
        }
        match &self.source {
            Source::Zero => Ok(Multivector::zero(self.sig)),
            Source::Expr(e) => e.eval(x),
            Source::Sampled(t) => Ok(t.lookup(x)),
            Source::Function(f) => {
                let v = f(x)?;
                if v.signature() != self.sig {
                    return Err(BoundaryError::PointDimension {
                        expected: self.sig.n(),
                        got: v.signature().n(),
                    });
                }
                if !v.is_finite() {
                    return Err(BoundaryError::NonFinite);
                }
                if !v.is_para_real() {
                    return Err(BoundaryError::NotParaReal);
                }
                Ok(v)
            }
        }
    }

    /// `c(w)` for a point with `w_n = 0`.
    pub fn eval_at(&self, w: &Paravector) -> Result<Multivector, BoundaryError> {
        if w.height() != 0.0 {
            return Err(BoundaryError::PointDimension {
                expected: self.sig.n(),
                got: self.sig.n() + 1,
            });
        }
        self.eval(w.hyperplane_coords())
    }

    /// Infers a decay bound by sampling `|c|` on spheres of radius
    /// `r0·2^k`, `k = 0..6`.
    ///
    /// All-zero samples give [`DecayHint::Compact`] with radius `r0`; a
    /// positive fitted exponent gives [`DecayHint::Power`]. Returns `None`
    /// when `c` does not decay or cannot be evaluated.
    pub fn infer_decay(&self, r0: f64) -> Option<DecayHint> {
        if let Some(hint) = self.decay {
            return Some(hint);
        }
        let dirs = sample_directions(self.sig.n());
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut sups = Vec::new();
        for k in 0..7 {
            let r = r0 * math::powi(2.0, k);
            let mut sup = 0.0f64;
            for d in &dirs {
                let x: SmallVec<[f64; 4]> = d.iter().map(|v| v * r).collect();
                let v = self.eval(&x).ok()?.norm();
                sup = sup.max(v);
            }
            sups.push((r, sup));
            if sup > 0.0 {
                xs.push(math::ln(r));
                ys.push(math::ln(sup));
            }
        }
        if xs.is_empty() {
            return Some(DecayHint::Compact {
                radius: r0,
                amplitude: 0.0,
            });
        }
        if xs.len() < 3 {
            // decays to exact zero within the sampled range
            let last_nonzero = sups.iter().rev().find(|s| s.1 > 0.0).map(|s| s.0)?;
            let amp = sups.iter().fold(0.0f64, |a, s| a.max(s.1));
            return Some(DecayHint::Compact {
                radius: 2.0 * last_nonzero,
                amplitude: amp,
            });
        }
        let (slope, _, _) = math::linear_fit(&xs, &ys)?;
        let exponent = -slope;
        if !(exponent > 0.05) {
            return None;
        }
        let amplitude = sups
            .iter()
            .map(|&(r, s)| s * math::pow(1.0 + r, exponent))
            .fold(0.0f64, f64::max);
        Some(DecayHint::Power {
            exponent,
            amplitude: 2.0 * amplitude,
        })
    }
}

/// Fixed unit directions in `ℝ^n`: the `±` coordinate axes plus eight
/// oblique directions.
pub(crate) fn sample_directions(n: usize) -> Vec<SmallVec<[f64; 4]>> {
    let mut out = Vec::new();
    for j in 0..n {
        for s in [1.0, -1.0] {
            let mut d: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, n);
            d[j] = s;
            out.push(d);
        }
    }
    if n > 1 {
        for k in 0..8 {
            let mut d: SmallVec<[f64; 4]> = (0..n)
                .map(|i| math::sin(1.3 + 2.1 * k as f64 + 0.9 * i as f64))
                .collect();
            let norm = math::sqrt(d.iter().map(|v| v * v).sum());
            for v in d.iter_mut() {
                *v /= norm;
            }
            out.push(d);
        }
    }
    out
}

/// A finite table of hyperplane samples with nearest-neighbour lookup.
///
/// A query returns the value of the closest table point within the support
/// radius (ties go to the earlier row), and zero farther away.
#[derive(Clone, Debug)]
pub struct SampledTable {
    sig: Signature,
    points: Vec<f64>,
    values: Vec<Multivector>,
    radius: f64,
    buckets: BTreeMap<SmallVec<[i64; 4]>, Vec<u32>>,
    extent: f64,
    max_abs: f64,
}

impl SampledTable {
    /// Builds a table. Duplicate points with equal values are merged;
    /// conflicting duplicates are an error. Without an explicit
    /// `support_radius` the largest nearest-neighbour distance is used.
    pub fn new(
        sig: Signature,
        points: &[Vec<f64>],
        values: &[Multivector],
        support_radius: Option<f64>,
    ) -> Result<Self, BoundaryError> {
        let n = sig.n();
        if points.is_empty() || points.len() != values.len() {
            return Err(BoundaryError::BadTable("need one value per point".into()));
        }
        let mut flat: Vec<f64> = Vec::with_capacity(points.len() * n);
        let mut vals: Vec<Multivector> = Vec::with_capacity(points.len());
        let mut seen: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        for (p, v) in points.iter().zip(values) {
            if p.len() != n {
                return Err(BoundaryError::PointDimension {
                    expected: n,
                    got: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) || !v.is_finite() {
                return Err(BoundaryError::NonFinite);
            }
            if v.signature() != sig {
                return Err(BoundaryError::BadTable("value has the wrong signature".into()));
            }
            if !v.is_para_real() {
                return Err(BoundaryError::NotParaReal);
            }
            let key: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
            if let Some(&k) = seen.get(&key) {
                if vals[k] != *v {
                    return Err(BoundaryError::BadTable(alloc::format!(
                        "conflicting values at point {p:?}"
                    )));
                }
                continue;
            }
            seen.insert(key, vals.len());
            flat.extend_from_slice(p);
            vals.push(v.clone());
        }
        let count = vals.len();
        let radius = match support_radius {
            Some(r) if r >= 0.0 && r.is_finite() => r,
            Some(_) => return Err(BoundaryError::BadTable("support radius must be ≥ 0".into())),
            None => default_radius(&flat, n, count),
        };
        let extent = (0..count)
            .map(|k| math::sqrt(flat[k * n..(k + 1) * n].iter().map(|c| c * c).sum()))
            .fold(0.0f64, f64::max)
            + radius;
        let max_abs = vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let mut table = Self {
            sig,
            points: flat,
            values: vals,
            radius,
            buckets: BTreeMap::new(),
            extent,
            max_abs,
        };
        if radius > 0.0 {
            for k in 0..count {
                let key = table.bucket(&table.points[k * n..(k + 1) * n]);
                table.buckets.entry(key).or_default().push(k as u32);
            }
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support_radius(&self) -> f64 {
        self.radius
    }

    /// Radius of a ball centred at 0 outside which the table is zero.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    fn bucket(&self, x: &[f64]) -> SmallVec<[i64; 4]> {
        x.iter().map(|c| math_floor(c / self.radius)).collect()
    }

    fn point(&self, k: usize) -> &[f64] {
        let n = self.sig.n();
        &self.points[k * n..(k + 1) * n]
    }

    pub fn lookup(&self, x: &[f64]) -> Multivector {
        let n = self.sig.n();
        if self.radius == 0.0 {
            return (0..self.len())
                .find(|&k| self.point(k) == x)
                .map(|k| self.values[k].clone())
                .unwrap_or_else(|| Multivector::zero(self.sig));
        }
        let centre = self.bucket(x);
        let mut best: Option<(f64, u32)> = None;
        let neighbours = 3usize.pow(n as u32);
        let mut key = centre.clone();
        for code in 0..neighbours {
            let mut c = code;
            for j in 0..n {
                key[j] = centre[j] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(list) = self.buckets.get(&key) {
                for &k in list {
                    let d2: f64 = self
                        .point(k as usize)
                        .iter()
                        .zip(x)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    let better = match best {
                        None => true,
                        Some((bd, bk)) => d2 < bd || (d2 == bd && k < bk),
                    };
                    if better {
                        best = Some((d2, k));
                    }
                }
            }
        }
        match best {
            Some((d2, k)) if d2 <= self.radius * self.radius => self.values[k as usize].clone(),
            _ => Multivector::zero(self.sig),
        }
    }
}

fn math_floor(v: f64) -> i64 {
    let t = v as i64;
    if (t as f64) > v {
        t - 1
    } else {
        t
    }
}

fn default_radius(flat: &[f64], n: usize, count: usize) -> f64 {
    if count < 2 {
        return 0.0;
    }
    let dist2 = |a: usize, b: usize| -> f64 {
        flat[a * n..(a + 1) * n]
            .iter()
            .zip(&flat[b * n..(b + 1) * n])
            .map(|(p, q)| (p - q) * (p - q))
            .sum()
    };
    let mut worst = 0.0f64;
    for a in 0..count {
        let mut nearest = f64::INFINITY;
        for b in 0..count {
            if a != b {
                nearest = nearest.min(dist2(a, b));
            }
        }
        worst = worst.max(nearest);
    }
    math::sqrt(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sig(n: usize) -> Signature {
        Signature::new(n).unwrap()
    }

    #[test]
    fn zero_function() {
        let s = sig(2);
        let c = BoundaryFunction::parse("0", s).unwrap();
        assert!(c.is_identically_zero());
        assert!(c.eval(&[3.0, 4.0]).unwrap().is_zero());
        assert_eq!(c.decay_hint(), Some(DecayHint::Zero));
    }

    #[test]
    fn dimension_checked() {
        let c = BoundaryFunction::parse("x0", sig(2)).unwrap();
        assert_eq!(
            c.eval(&[1.0]),
            Err(BoundaryError::PointDimension { expected: 2, got: 1 })
        );
    }

    #[test]
    fn closure_must_be_para_real() {
        let s = sig(2);
        let c = BoundaryFunction::from_fn(s, move |_| Ok(Multivector::generator(s, 2).unwrap()));
        assert_eq!(c.eval(&[0.0, 0.0]), Err(BoundaryError::NotParaReal));
    }

    #[test]
    fn table_lookup() {
        let s = sig(1);
        let pts: Vec<Vec<f64>> = (0..5).map(|k| vec![k as f64]).collect();
        let vals: Vec<Multivector> = (0..5).map(|k| Multivector::scalar(s, k as f64 * 10.0)).collect();
        let t = SampledTable::new(s, &pts, &vals, None).unwrap();
        assert_eq!(t.support_radius(), 1.0);
        assert_eq!(t.lookup(&[3.0]), vals[3]);
        assert_eq!(t.lookup(&[2.4]), vals[2]);
        assert_eq!(t.lookup(&[2.5]), vals[2]);
        assert!(t.lookup(&[6.5]).is_zero());
        assert!(t.lookup(&[-0.9]) == vals[0]);
        let c = BoundaryFunction::sampled(t);
        assert_eq!(
            c.decay_hint(),
            Some(DecayHint::Compact { radius: 5.0, amplitude: 40.0 })
        );
    }

    #[test]
    fn table_duplicates() {
        let s = sig(1);
        let one = Multivector::one(s);
        let two = Multivector::scalar(s, 2.0);
        let t = SampledTable::new(s, &[vec![0.0], vec![0.0]], &[one.clone(), one.clone()], None).unwrap();
        assert_eq!(t.len(), 1);
        assert!(SampledTable::new(s, &[vec![0.0], vec![0.0]], &[one, two], None).is_err());
    }

    #[test]
    fn inferred_decay() {
        let s = sig(1);
        let rational = BoundaryFunction::parse("1/(1+abs2(x))", s).unwrap();
        match rational.infer_decay(100.0) {
            Some(DecayHint::Power { exponent, amplitude }) => {
                assert!((exponent - 2.0).abs() < 0.01);
                assert!(amplitude >= 1.0);
            }
            other => panic!("{other:?}"),
        }
        let gauss = BoundaryFunction::parse("gauss(x)", s).unwrap();
        assert!(matches!(gauss.infer_decay(1e4), Some(DecayHint::Compact { .. })));
        let flat = BoundaryFunction::parse("1", s).unwrap();
        assert_eq!(flat.infer_decay(1e4), None);
    }
}
