//! Empirical estimators for Hölder-type regularity of boundary data.
//!
//! The exponent is the slope of the upper envelope of `log|Δf|` against
//! `log(distance)`: pairs are binned on the distance axis, the largest
//! `log|Δf|` of each bin is kept and a line is fitted through those maxima.
//! Results are advisory; finitely many samples cannot prove membership.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use super::{sample_directions, BoundaryFunction};
use crate::clifford::{Multivector, Paravector, Signature};
use crate::error::BoundaryError;
use crate::math;

/// Number of log-distance bins.
pub const BINS: usize = 32;

/// Default number of sample pairs.
pub const DEFAULT_PAIRS: usize = 4096;

const DEFAULT_SEED: u64 = 0x5eed_40de;

type PointPair = (SmallVec<[f64; 4]>, SmallVec<[f64; 4]>);

/// Generates pairs of hyperplane points.
#[derive(Clone, Debug, PartialEq)]
pub enum PairSampler {
    /// Pairs inside the ball `|x − center| ≤ radius`. Half the anchors are
    /// uniform in the ball, half are log-radially clustered at the centre;
    /// partner offsets have log-uniform length.
    Ball {
        center: Vec<f64>,
        radius: f64,
        pairs: usize,
        seed: u64,
    },
    /// Pairs with `|x|` log-uniform in `[inner, outer]`, both points kept
    /// outside the ball of radius `inner / 2`.
    Shells {
        inner: f64,
        outer: f64,
        pairs: usize,
        seed: u64,
    },
}

impl PairSampler {
    pub fn ball(n: usize, radius: f64) -> Self {
        PairSampler::Ball {
            center: alloc::vec![0.0; n],
            radius,
            pairs: DEFAULT_PAIRS,
            seed: DEFAULT_SEED,
        }
    }

    pub fn shells(inner: f64, outer: f64) -> Self {
        PairSampler::Shells {
            inner,
            outer,
            pairs: DEFAULT_PAIRS,
            seed: DEFAULT_SEED,
        }
    }

    /// The same sampler with the outer scale divided by `factor`.
    pub fn shrunk(&self, factor: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            PairSampler::Ball { radius, .. } => *radius /= factor,
            PairSampler::Shells { inner, outer, .. } => *outer = (*outer / factor).max(*inner * 2.0),
        }
        out
    }

    fn generate(&self, n: usize) -> Result<Vec<PointPair>, BoundaryError> {
        match self {
            PairSampler::Ball {
                center,
                radius,
                pairs,
                seed,
            } => {
                if center.len() != n {
                    return Err(BoundaryError::PointDimension {
                        expected: n,
                        got: center.len(),
                    });
                }
                if !(*radius > 0.0) || *pairs == 0 {
                    return Err(BoundaryError::DegenerateSampler);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut out = Vec::with_capacity(*pairs);
                for k in 0..*pairs {
                    let anchor_r = if k % 2 == 0 {
                        radius * math::pow(rng.random::<f64>(), 1.0 / n as f64)
                    } else {
                        radius * math::pow(10.0, -12.0 * rng.random::<f64>())
                    };
                    let dir = unit_vector(&mut rng, n);
                    let a: SmallVec<[f64; 4]> =
                        center.iter().zip(&dir).map(|(c, d)| c + anchor_r * d).collect();
                    let len = radius * math::pow(10.0, -8.0 * rng.random::<f64>());
                    let dir2 = unit_vector(&mut rng, n);
                    let b: SmallVec<[f64; 4]> = a.iter().zip(&dir2).map(|(p, d)| p + len * d).collect();
                    out.push((a, b));
                }
                Ok(out)
            }
            PairSampler::Shells {
                inner,
                outer,
                pairs,
                seed,
            } => {
                if !(*inner > 0.0) {
                    return Err(BoundaryError::SampleAtOrigin);
                }
                if !(*outer > *inner) || *pairs == 0 {
                    return Err(BoundaryError::DegenerateSampler);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let (li, lo) = (math::ln(*inner), math::ln(*outer));
                let mut out = Vec::with_capacity(*pairs);
                while out.len() < *pairs {
                    let r = math::exp(li + (lo - li) * rng.random::<f64>());
                    let dir = unit_vector(&mut rng, n);
                    let a: SmallVec<[f64; 4]> = dir.iter().map(|d| r * d).collect();
                    let len = r * math::pow(10.0, -8.0 * rng.random::<f64>());
                    let dir2 = unit_vector(&mut rng, n);
                    let b: SmallVec<[f64; 4]> = a.iter().zip(&dir2).map(|(p, d)| p + len * d).collect();
                    if norm(&b) < inner / 2.0 {
                        continue;
                    }
                    out.push((a, b));
                }
                Ok(out)
            }
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    math::sqrt(x.iter().map(|v| v * v).sum())
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> SmallVec<[f64; 4]> {
    loop {
        let v: SmallVec<[f64; 4]> = (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|c| c / r).collect();
        }
    }
}

/// Outcome of a Hölder-type estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderEstimate {
    /// Envelope slope, capped at 1. Constant data report 1.
    pub mu: f64,
    /// Envelope constant `max exp(y − μ x)` over the bin maxima.
    pub m: f64,
    /// Standard error of the slope.
    pub band: f64,
    /// Pairs that entered the fit.
    pub pairs: usize,
    /// Whether the data look like they belong to the class.
    pub in_class: bool,
}

/// Which distance the estimator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Metric {
    Euclid,
    Inverse,
}

type Sampled<'a> = &'a dyn Fn(&[f64]) -> Result<Multivector, BoundaryError>;

fn inverse_point(sig: Signature, x: &[f64]) -> Result<Paravector, BoundaryError> {
    let p = Paravector::on_hyperplane(sig, x).map_err(|_| BoundaryError::NonFinite)?;
    p.inverse().map_err(|_| BoundaryError::SampleAtOrigin)
}

fn envelope(f: Sampled<'_>, sig: Signature, sampler: &PairSampler, metric: Metric) -> Result<HolderEstimate, BoundaryError> {
    let n = sig.n();
    let pairs = sampler.generate(n)?;
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    let mut scale = 0.0f64;
    let mut max_delta = 0.0f64;
    for (a, b) in &pairs {
        let d = match metric {
            Metric::Euclid => norm(&a.iter().zip(b).map(|(p, q)| p - q).collect::<SmallVec<[f64; 4]>>()),
            Metric::Inverse => inverse_point(sig, a)?.sub(&inverse_point(sig, b)?).norm(),
        };
        if !(d > 0.0) {
            continue;
        }
        let (fa, fb) = (f(a)?, f(b)?);
        scale = scale.max(fa.norm()).max(fb.norm());
        let delta = fa.distance(&fb);
        max_delta = max_delta.max(delta);
        samples.push((d, delta));
    }
    if samples.is_empty() {
        return Err(BoundaryError::DegenerateSampler);
    }
    if max_delta <= 1e-13 * scale.max(1.0) {
        return Ok(HolderEstimate {
            mu: 1.0,
            m: 0.0,
            band: 0.0,
            pairs: samples.len(),
            in_class: true,
        });
    }
    let lo = samples.iter().map(|s| math::ln(s.0)).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| math::ln(s.0)).fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / BINS as f64).max(1e-300);
    let mut bins: [Option<(f64, f64)>; BINS] = [None; BINS];
    for &(d, delta) in &samples {
        if delta <= 0.0 {
            continue;
        }
        let x = math::ln(d);
        let y = math::ln(delta);
        let k = (((x - lo) / width) as usize).min(BINS - 1);
        if bins[k].is_none_or(|(_, by)| y > by) {
            bins[k] = Some((x, y));
        }
    }
    let pts: Vec<(f64, f64)> = bins.iter().flatten().copied().collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, band) = match math::linear_fit(&xs, &ys) {
        Some((s, _, e)) => (s, e),
        None => (0.0, f64::INFINITY),
    };
    let mu = slope.min(1.0);
    let m = pts
        .iter()
        .map(|&(x, y)| math::exp(y - mu * x))
        .fold(0.0f64, f64::max);
    Ok(HolderEstimate {
        mu,
        m,
        band,
        pairs: samples.len(),
        in_class: mu > 0.05 && m.is_finite(),
    })
}

/// Estimates `μ, M` with `|f(t) − f(s)| ≤ M |t − s|^μ`.
pub fn estimate_holder(c: &BoundaryFunction, sampler: &PairSampler) -> Result<HolderEstimate, BoundaryError> {
    envelope(&|x| c.eval(x), c.signature(), sampler, Metric::Euclid)
}

/// Estimates `μ, M` with `|f(ξ) − f(ζ)| ≤ M |1/ξ − 1/ζ|^μ`.
///
/// The estimate is also repeated with the outer radius divided by 10; if
/// `M` grows by more than a factor 10 with the window it is treated as
/// divergent and the data are reported outside the class.
pub fn estimate_holder_dagger(
    c: &BoundaryFunction,
    sampler: &PairSampler,
) -> Result<HolderEstimate, BoundaryError> {
    dagger_fn(&|x| c.eval(x), c.signature(), sampler)
}

fn dagger_fn(f: Sampled<'_>, sig: Signature, sampler: &PairSampler) -> Result<HolderEstimate, BoundaryError> {
    let mut full = envelope(f, sig, sampler, Metric::Inverse)?;
    let small = envelope(f, sig, &sampler.shrunk(10.0), Metric::Inverse)?;
    if small.m > 0.0 && full.m > 10.0 * small.m {
        full.in_class = false;
    }
    Ok(full)
}

/// Class report for `f_m(x) = x^m c(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub m: i32,
    pub holder: HolderEstimate,
    pub dagger: HolderEstimate,
    /// Estimate of `f_m(∞)`; `None` when the sampled rays disagree.
    pub limit_at_infinity: Option<Multivector>,
    pub in_h_m: bool,
    pub in_h_m_dagger: bool,
}

impl ClassReport {
    /// Membership in `Ĥ_m = H_m ∩ H_{m,†}`.
    pub fn in_hat_h(&self) -> bool {
        self.in_h_m && self.in_h_m_dagger
    }

    /// Membership in `Ĥ_{m,0}`: additionally `f_m(∞) = 0`.
    pub fn in_hat_h_zero(&self) -> bool {
        self.in_hat_h() && self.limit_is_zero()
    }

    pub fn limit_is_zero(&self) -> bool {
        self.limit_at_infinity
            .as_ref()
            .is_some_and(|v| v.norm() <= LIMIT_ZERO_TOL)
    }
}

/// `|f_m(∞)|` at or below this counts as zero.
pub const LIMIT_ZERO_TOL: f64 = 1e-3;

/// Default window for the local estimator: the ball of radius 10.
pub const HOLDER_RADIUS: f64 = 10.0;

/// Default shells for the estimator at infinity: `1 ≤ |x| ≤ 10^4`.
pub const DAGGER_SHELLS: (f64, f64) = (1.0, 1e4);

fn power_field<'a>(c: &'a BoundaryFunction, m: i32) -> impl Fn(&[f64]) -> Result<Multivector, BoundaryError> + 'a {
    let sig = c.signature();
    move |x: &[f64]| {
        let v = c.eval(x)?;
        if m == 0 {
            return Ok(v);
        }
        let p = Paravector::on_hyperplane(sig, x).map_err(|_| BoundaryError::NonFinite)?;
        let base = if m < 0 {
            p.inverse().map_err(|_| BoundaryError::DivisionByZero)?
        } else {
            p
        }
        .to_multivector();
        let mut acc = Multivector::one(sig);
        for _ in 0..m.unsigned_abs() {
            acc = acc * &base;
        }
        Ok(acc * v)
    }
}

/// Estimates `f_m(∞) = lim x^m c(x)` from radii `10^3 … 10^6` along the
/// coordinate axes and eight oblique directions.
pub fn limit_at_infinity(c: &BoundaryFunction, m: i32) -> Result<Option<Multivector>, BoundaryError> {
    let sig = c.signature();
    let f = power_field(c, m);
    let dirs = sample_directions(sig.n());
    let radii = [1e3, 1e4, 1e5, 1e6];
    let mut last: Vec<Multivector> = Vec::new();
    let mut prev: Vec<Multivector> = Vec::new();
    for (k, &r) in radii.iter().enumerate() {
        let vals: Result<Vec<_>, _> = dirs
            .iter()
            .map(|d| {
                let x: SmallVec<[f64; 4]> = d.iter().map(|v| v * r).collect();
                f(&x)
            })
            .collect();
        if k + 1 == radii.len() {
            last = vals?;
        } else if k + 2 == radii.len() {
            prev = vals?;
        } else {
            vals?;
        }
    }
    let tol = |a: &Multivector, b: &Multivector| {
        a.distance(b) <= 1e-3 + 1e-2 * a.norm().max(b.norm())
    };
    let reference = &last[0];
    let agree = last.iter().all(|v| tol(v, reference)) && last.iter().zip(&prev).all(|(a, b)| tol(a, b));
    if !agree {
        return Ok(None);
    }
    let mut mean = Multivector::zero(sig);
    for v in &last {
        mean += v;
    }
    Ok(Some(mean.scale(1.0 / last.len() as f64)))
}

/// Runs both estimators on `f_m = x^m c` and estimates `f_m(∞)`.
///
/// For `m = 0` the estimates coincide with [`estimate_holder`] and
/// [`estimate_holder_dagger`] on the default samplers. For `m < 0` the local
/// window excludes `|x| < 0.1`, where `x^m` has a pole.
pub fn classify_hat_h(c: &BoundaryFunction, m: i32) -> Result<ClassReport, BoundaryError> {
    let sig = c.signature();
    let n = sig.n();
    let f = power_field(c, m);
    let local = if m < 0 {
        PairSampler::shells(0.1, HOLDER_RADIUS)
    } else {
        PairSampler::ball(n, HOLDER_RADIUS)
    };
    let holder = envelope(&f, sig, &local, Metric::Euclid)?;
    let dagger = dagger_fn(&f, sig, &PairSampler::shells(DAGGER_SHELLS.0, DAGGER_SHELLS.1))?;
    let limit = limit_at_infinity(c, m)?;
    Ok(ClassReport {
        m,
        in_h_m: holder.in_class,
        in_h_m_dagger: dagger.in_class && limit.is_some(),
        holder,
        dagger,
        limit_at_infinity: limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: usize) -> Signature {
        Signature::new(n).unwrap()
    }

    fn c(text: &str, n: usize) -> BoundaryFunction {
        BoundaryFunction::parse(text, sig(n)).unwrap()
    }

    #[test]
    fn lipschitz_datum() {
        for n in [1, 2] {
            let est = estimate_holder(&c("x0", n), &PairSampler::ball(n, 1.0)).unwrap();
            assert!((est.mu - 1.0).abs() <= 0.05, "n={n}: {est:?}");
        }
    }

    #[test]
    fn square_root_datum() {
        for n in [1, 2] {
            let est = estimate_holder(&c("sqrt(sqrt(abs2(x)))", n), &PairSampler::ball(n, 1.0)).unwrap();
            assert!((est.mu - 0.5).abs() <= 0.05, "n={n}: {est:?}");
        }
    }

    #[test]
    fn constant_datum() {
        let est = estimate_holder(&c("3", 2), &PairSampler::ball(2, 1.0)).unwrap();
        assert_eq!((est.mu, est.m), (1.0, 0.0));
        let dag = estimate_holder_dagger(&c("3", 2), &PairSampler::shells(1.0, 1e4)).unwrap();
        assert_eq!(dag.m, 0.0);
    }

    #[test]
    fn dagger_rational_and_linear() {
        let rational = estimate_holder_dagger(&c("1/(1+abs2(x))", 1), &PairSampler::shells(1.0, 1e4)).unwrap();
        assert!(rational.mu > 0.0 && rational.mu <= 1.0 && rational.in_class, "{rational:?}");
        let linear = estimate_holder_dagger(&c("x0", 1), &PairSampler::shells(1.0, 1e4)).unwrap();
        assert!(!linear.in_class, "{linear:?}");
    }

    #[test]
    fn dagger_rejects_origin() {
        assert_eq!(
            estimate_holder_dagger(&c("x0", 1), &PairSampler::shells(0.0, 1.0)),
            Err(BoundaryError::SampleAtOrigin)
        );
    }

    #[test]
    fn limits() {
        let gauss = classify_hat_h(&c("gauss(x)", 2), 2).unwrap();
        assert!(gauss.limit_is_zero());
        let rational = c("1/(1+abs2(x))", 1);
        let one = limit_at_infinity(&rational, 1).unwrap().unwrap();
        assert!(one.norm() < 1e-3);
        let two = limit_at_infinity(&rational, 2).unwrap().unwrap();
        assert!((two.scalar_part() - 1.0).abs() < 1e-3);
        let zero = classify_hat_h(&BoundaryFunction::zero(sig(2)), 3).unwrap();
        assert!(zero.in_hat_h_zero());
    }

    #[test]
    fn order_zero_matches_raw_estimators() {
        let datum = c("x0*gauss(x) + 1/(1+abs2(x))", 2);
        let report = classify_hat_h(&datum, 0).unwrap();
        let h = estimate_holder(&datum, &PairSampler::ball(2, HOLDER_RADIUS)).unwrap();
        let d = estimate_holder_dagger(&datum, &PairSampler::shells(DAGGER_SHELLS.0, DAGGER_SHELLS.1)).unwrap();
        assert_eq!(report.holder, h);
        assert_eq!(report.dagger, d);
    }
}
