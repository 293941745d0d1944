//! Arithmetic in the Clifford algebra `C(V_n)`.
//!
//! Basis blades `e_A` are indexed by bitmasks: bit `j - 1` is set exactly
//! when generator `e_j` belongs to `A`. The empty mask is the identity `e_0`.
//! Generators square to `-1` and anticommute.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::error::AlgebraError;
use crate::math;

/// Largest supported generator count; `2^12` coefficients per value.
pub const MAX_GENERATORS: usize = 12;

/// Default relative tolerance for approximate comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

type Coeffs = SmallVec<[f64; 8]>;

/// The generator count `n` of `C(V_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    n: u8,
}

impl Signature {
    pub fn new(n: usize) -> Result<Self, AlgebraError> {
        if (1..=MAX_GENERATORS).contains(&n) {
            Ok(Self { n: n as u8 })
        } else {
            Err(AlgebraError::InvalidSignature(n))
        }
    }

    #[inline]
    pub const fn n(self) -> usize {
        self.n as usize
    }

    /// Number of coefficients, `2^n`.
    #[inline]
    pub const fn dim(self) -> usize {
        1 << self.n
    }

    /// Mask of the last generator `e_n`.
    #[inline]
    pub const fn top_mask(self) -> u32 {
        1 << (self.n - 1)
    }

    fn ensure_same(self, other: Signature) -> Result<(), AlgebraError> {
        if self == other {
            Ok(())
        } else {
            Err(AlgebraError::SignatureMismatch {
                left: self.n(),
                right: other.n(),
            })
        }
    }

    fn ensure_mask(self, mask: u32) -> Result<(), AlgebraError> {
        if (mask as usize) < self.dim() {
            Ok(())
        } else {
            Err(AlgebraError::MaskOutOfRange { mask, n: self.n() })
        }
    }
}

/// Parity of `#(A ∩ B) + P(A, B)` where `P(A, B)` counts, for every `j ∈ B`,
/// the elements of `A` greater than `j`.
#[inline]
fn product_parity(a: u32, b: u32) -> u32 {
    let mut swaps = (a & b).count_ones();
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += a.checked_shr(j + 1).unwrap_or(0).count_ones();
        rest &= rest - 1;
    }
    swaps & 1
}

#[inline]
pub(crate) fn blade_sign(a: u32, b: u32) -> f64 {
    if product_parity(a, b) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `e_A e_B = sign · e_{A Δ B}`.
pub fn basis_sign(a: u32, b: u32, sig: Signature) -> Result<(i8, u32), AlgebraError> {
    sig.ensure_mask(a)?;
    sig.ensure_mask(b)?;
    let sign = if product_parity(a, b) == 0 { 1 } else { -1 };
    Ok((sign, a ^ b))
}

/// Sign of the conjugation on a blade of the given grade:
/// `(-1)^{k(k+1)/2}`.
#[inline]
fn bar_sign(grade: u32) -> f64 {
    match grade % 4 {
        0 | 3 => 1.0,
        _ => -1.0,
    }
}

/// An element of `C(V_n)` stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    sig: Signature,
    coeffs: Coeffs,
}

/// `λ = re + e_n·im_left = re + im_right·e_n`, each part free of `e_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub re: Multivector,
    pub im_left: Multivector,
    pub im_right: Multivector,
}

impl Multivector {
    pub fn zero(sig: Signature) -> Self {
        Self {
            sig,
            coeffs: SmallVec::from_elem(0.0, sig.dim()),
        }
    }

    pub fn one(sig: Signature) -> Self {
        Self::scalar(sig, 1.0)
    }

    pub fn scalar(sig: Signature, value: f64) -> Self {
        let mut out = Self::zero(sig);
        out.coeffs[0] = value;
        out
    }

    pub fn basis(sig: Signature, mask: u32) -> Result<Self, AlgebraError> {
        sig.ensure_mask(mask)?;
        let mut out = Self::zero(sig);
        out.coeffs[mask as usize] = 1.0;
        Ok(out)
    }

    /// The generator `e_j`, `1 ≤ j ≤ n`.
    pub fn generator(sig: Signature, j: usize) -> Result<Self, AlgebraError> {
        if j == 0 || j > sig.n() {
            return Err(AlgebraError::MaskOutOfRange {
                mask: 1u32.checked_shl(j as u32).unwrap_or(u32::MAX),
                n: sig.n(),
            });
        }
        Self::basis(sig, 1 << (j - 1))
    }

    pub fn from_coeffs(sig: Signature, coeffs: &[f64]) -> Result<Self, AlgebraError> {
        if coeffs.len() != sig.dim() {
            return Err(AlgebraError::WrongLength {
                expected: sig.dim(),
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        Ok(Self {
            sig,
            coeffs: SmallVec::from_slice(coeffs),
        })
    }

    /// The paravector `Σ w_i e_i` (capital map of a point of `ℝ^{n+1}`).
    pub fn paravector(sig: Signature, components: &[f64]) -> Result<Self, AlgebraError> {
        Ok(Paravector::new(sig, components)?.to_multivector())
    }

    #[inline]
    pub fn signature(&self) -> Signature {
        self.sig
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `e_A`; zero for masks outside the algebra.
    #[inline]
    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeffs.get(mask as usize).copied().unwrap_or(0.0)
    }

    #[inline]
    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn is_scalar(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    /// True when only the scalar and grade-one coefficients are nonzero.
    pub fn is_paravector(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(mask, &c)| c == 0.0 || (mask as u32).count_ones() <= 1)
    }

    /// True when no coefficient carries `e_n`, i.e. the value lies in `C(V_{n-1})`.
    pub fn is_para_real(&self) -> bool {
        let top = self.sig.top_mask();
        self.coeffs
            .iter()
            .enumerate()
            .all(|(mask, &c)| c == 0.0 || (mask as u32) & top == 0)
    }

    pub fn as_paravector(&self) -> Option<Paravector> {
        if !self.is_paravector() {
            return None;
        }
        let n = self.sig.n();
        let mut comps: SmallVec<[f64; 4]> = SmallVec::with_capacity(n + 1);
        comps.push(self.coeffs[0]);
        for j in 0..n {
            comps.push(self.coeffs[1 << j]);
        }
        Some(Paravector {
            sig: self.sig,
            comps,
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.sig.ensure_same(other.sig)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.sig.ensure_same(other.sig)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Clifford product `λμ = Σ_A Σ_B λ_A μ_B e_A e_B`.
    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.sig.ensure_same(other.sig)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.sig);
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (b, &y) in other.coeffs.iter().enumerate() {
                if y == 0.0 {
                    continue;
                }
                let (a, b) = (a as u32, b as u32);
                out.coeffs[(a ^ b) as usize] += blade_sign(a, b) * x * y;
            }
        }
        out
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            sig: self.sig,
            coeffs: self
                .coeffs
                .iter()
                .zip(other.coeffs.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn map(&self, f: impl Fn(u32, f64) -> f64) -> Self {
        Self {
            sig: self.sig,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(mask, &c)| f(mask as u32, c))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|_, c| c * s)
    }

    /// Conjugation `ē_A = (-1)^{#A(#A+1)/2} e_A`.
    pub fn bar(&self) -> Self {
        self.map(|mask, c| {
            if c == 0.0 {
                c
            } else {
                bar_sign(mask.count_ones()) * c
            }
        })
    }

    /// Reflection across the hyperplane: `λ* = Re(λ) - e_n Im^l(λ)`.
    ///
    /// Equivalent to flipping the sign of every blade containing `e_n`; it is
    /// an algebra automorphism.
    pub fn star(&self) -> Self {
        let top = self.sig.top_mask();
        self.map(|mask, c| if mask & top != 0 { -c } else { c })
    }

    pub fn decompose(&self) -> Decomposition {
        let top = self.sig.top_mask();
        let mut re = Self::zero(self.sig);
        let mut im_left = Self::zero(self.sig);
        let mut im_right = Self::zero(self.sig);
        for (mask, &c) in self.coeffs.iter().enumerate() {
            let mask = mask as u32;
            if mask & top == 0 {
                re.coeffs[mask as usize] = c;
            } else {
                // e_{A∪n} = e_A e_n = (-1)^{#A} e_n e_A
                let a = mask & !top;
                im_right.coeffs[a as usize] = c;
                im_left.coeffs[a as usize] = if a.count_ones().is_multiple_of(2) { c } else { -c };
            }
        }
        Decomposition {
            re,
            im_left,
            im_right,
        }
    }

    /// `Re(λ)`, the `C(V_{n-1})` part.
    pub fn re(&self) -> Self {
        let top = self.sig.top_mask();
        self.map(|mask, c| if mask & top == 0 { c } else { 0.0 })
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Euclidean coefficient norm `|λ|`.
    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    /// Banach-algebra norm `|λ|_0 = 2^{n/2} |λ|`.
    pub fn norm0(&self) -> f64 {
        math::pow(2.0, self.sig.n() as f64 / 2.0) * self.norm()
    }

    /// `(λ, μ) = [λ μ̄]_0 = Σ λ_A μ_A`.
    pub fn inner(&self, other: &Self) -> Result<f64, AlgebraError> {
        self.sig.ensure_same(other.sig)?;
        Ok(self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    /// `|self - other|`; panics on signature mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    /// `|self - other| ≤ tol · max(1, |self|, |other|)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.sig != other.sig {
            return false;
        }
        let scale = 1f64.max(self.norm()).max(other.norm());
        self.distance(other) <= tol * scale
    }

    /// Multiplicative inverse.
    ///
    /// Paravectors use `w^{-1} = w̄ / |w|²`; other elements solve the
    /// left-regular representation `L_a x = e_0` by Gaussian elimination.
    pub fn invert(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::SingularElement);
        }
        if self.is_paravector() {
            return Ok(self.bar().scale(1.0 / self.norm_sq()));
        }
        self.invert_dense()
    }

    fn invert_dense(&self) -> Result<Self, AlgebraError> {
        let dim = self.sig.dim();
        // column B holds the coefficients of self · e_B
        let mut m = vec![0.0; dim * dim];
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for b in 0..dim {
                let row = a ^ b;
                m[row * dim + b] = blade_sign(a as u32, b as u32) * x;
            }
        }
        let mut rhs = vec![0.0; dim];
        rhs[0] = 1.0;
        let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let sol = solve_dense(&mut m, &mut rhs, dim, 1e-12 * scale)
            .ok_or(AlgebraError::SingularElement)?;
        let inv = Self::from_coeffs(self.sig, &sol).map_err(|_| AlgebraError::SingularElement)?;
        let check = self.mul_unchecked(&inv);
        if !check.approx_eq(&Self::one(self.sig), 1e-8) {
            return Err(AlgebraError::SingularElement);
        }
        Ok(inv)
    }
}

/// Gaussian elimination with partial pivoting on a row-major `dim × dim`
/// matrix. Returns `None` when a pivot falls below `pivot_floor`.
fn solve_dense(m: &mut [f64], rhs: &mut [f64], dim: usize, pivot_floor: f64) -> Option<Vec<f64>> {
    for col in 0..dim {
        let (pivot_row, pivot_abs) = (col..dim)
            .map(|r| (r, m[r * dim + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= pivot_floor {
            return None;
        }
        if pivot_row != col {
            for k in 0..dim {
                m.swap(col * dim + k, pivot_row * dim + k);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = m[col * dim + col];
        for r in (col + 1)..dim {
            let factor = m[r * dim + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..dim {
                m[r * dim + k] -= factor * m[col * dim + k];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; dim];
    for r in (0..dim).rev() {
        let mut acc = rhs[r];
        for k in (r + 1)..dim {
            acc -= m[r * dim + k] * x[k];
        }
        x[r] = acc / m[r * dim + r];
    }
    Some(x)
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Multivector> for &Multivector {
            type Output = Multivector;
            /// Panics when the signatures differ; use the `checked_*` form
            /// to get an error instead.
            fn $method(self, rhs: &Multivector) -> Multivector {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        impl $trait<Multivector> for Multivector {
            type Output = Multivector;
            fn $method(self, rhs: Multivector) -> Multivector {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Multivector> for Multivector {
            type Output = Multivector;
            fn $method(self, rhs: &Multivector) -> Multivector {
                (&self).$method(rhs)
            }
        }
        impl $trait<Multivector> for &Multivector {
            type Output = Multivector;
            fn $method(self, rhs: Multivector) -> Multivector {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.sig, rhs.sig, "signature mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

/// Writes the blade name used by the text form: `e12` for `n ≤ 9`,
/// `e(1,10)` otherwise. The empty blade has no name.
pub(crate) fn write_blade(f: &mut impl fmt::Write, mask: u32, n: usize) -> fmt::Result {
    let indices = (0..n).filter(|j| mask & (1 << j) != 0).map(|j| j + 1);
    if n <= 9 {
        f.write_char('e')?;
        for j in indices {
            write!(f, "{j}")?;
        }
    } else {
        f.write_str("e(")?;
        for (k, j) in indices.enumerate() {
            if k > 0 {
                f.write_char(',')?;
            }
            write!(f, "{j}")?;
        }
        f.write_char(')')?;
    }
    Ok(())
}

impl Signature {
    /// Blade masks in the order used by the text form: by grade, then mask.
    pub fn blade_order(self) -> Vec<u32> {
        canonical_order(self)
    }

    /// Text-form name of a blade: `1` for the scalar, else `e12` style.
    pub fn blade_name(self, mask: u32) -> String {
        let mut out = String::new();
        if mask == 0 {
            out.push('1');
        } else {
            let _ = write_blade(&mut out, mask, self.n());
        }
        out
    }
}

/// Blade masks ordered by grade, then by mask value.
pub(crate) fn canonical_order(sig: Signature) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..sig.dim() as u32).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

impl fmt::Display for Multivector {
    /// `c0 + c1*e1 + c12*e12 + …`, coefficients in shortest round-trip form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for mask in canonical_order(self.sig) {
            let c = self.coeffs[mask as usize];
            if c == 0.0 {
                continue;
            }
            if first {
                if c < 0.0 {
                    f.write_str("-")?;
                }
            } else if c < 0.0 {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{:?}", c.abs())?;
            if mask != 0 {
                f.write_str("*")?;
                write_blade(f, mask, self.sig.n())?;
            }
        }
        if first {
            f.write_str("0.0")?;
        }
        Ok(())
    }
}

/// A point of `ℝ^{n+1}` identified with the paravector `Σ w_i e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Paravector {
    sig: Signature,
    comps: SmallVec<[f64; 4]>,
}

impl Paravector {
    pub fn new(sig: Signature, components: &[f64]) -> Result<Self, AlgebraError> {
        if components.len() != sig.n() + 1 {
            return Err(AlgebraError::WrongLength {
                expected: sig.n() + 1,
                got: components.len(),
            });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        Ok(Self {
            sig,
            comps: SmallVec::from_slice(components),
        })
    }

    /// The hyperplane point `(x_0, …, x_{n-1}, 0)`.
    pub fn on_hyperplane(sig: Signature, x: &[f64]) -> Result<Self, AlgebraError> {
        if x.len() != sig.n() {
            return Err(AlgebraError::WrongLength {
                expected: sig.n(),
                got: x.len(),
            });
        }
        let mut comps: SmallVec<[f64; 4]> = SmallVec::from_slice(x);
        comps.push(0.0);
        Self::new(sig, &comps)
    }

    pub fn zero(sig: Signature) -> Self {
        Self {
            sig,
            comps: SmallVec::from_elem(0.0, sig.n() + 1),
        }
    }

    #[inline]
    pub fn signature(&self) -> Signature {
        self.sig
    }

    #[inline]
    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    #[inline]
    pub fn component(&self, k: usize) -> f64 {
        self.comps[k]
    }

    /// `w_n`, the coordinate normal to the hyperplane.
    #[inline]
    pub fn height(&self) -> f64 {
        self.comps[self.sig.n()]
    }

    /// `(w_0, …, w_{n-1})`, the projection onto the hyperplane.
    #[inline]
    pub fn hyperplane_coords(&self) -> &[f64] {
        &self.comps[..self.sig.n()]
    }

    pub fn to_multivector(&self) -> Multivector {
        let mut out = Multivector::zero(self.sig);
        out.coeffs[0] = self.comps[0];
        for j in 1..self.comps.len() {
            out.coeffs[1 << (j - 1)] = self.comps[j];
        }
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.comps.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    /// `w̄ = w_0 - Σ w_i e_i`.
    pub fn bar(&self) -> Self {
        let mut out = self.clone();
        for c in out.comps[1..].iter_mut() {
            *c = -*c;
        }
        out
    }

    /// Mirror image across the hyperplane: negates `w_n`.
    pub fn star(&self) -> Self {
        let mut out = self.clone();
        let n = self.sig.n();
        out.comps[n] = -out.comps[n];
        out
    }

    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        let r2 = self.norm_sq();
        if r2 == 0.0 {
            return Err(AlgebraError::SingularElement);
        }
        let mut out = self.bar();
        for c in out.comps.iter_mut() {
            *c /= r2;
        }
        Ok(out)
    }

    /// `self + h·e_k`.
    pub fn offset(&self, k: usize, h: f64) -> Self {
        let mut out = self.clone();
        out.comps[k] += h;
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            sig: self.sig,
            comps: self.comps.iter().map(|c| c * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        Self {
            sig: self.sig,
            comps: self
                .comps
                .iter()
                .zip(other.comps.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl From<&Paravector> for Multivector {
    fn from(w: &Paravector) -> Self {
        w.to_multivector()
    }
}
