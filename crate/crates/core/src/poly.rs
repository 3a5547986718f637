//! Exponent-keyed multivariate polynomials over arbitrary-precision integers.
//!
//! `FPolynomial` is an ordinary polynomial in `y_1..y_n` (nonnegative
//! exponents); `LaurentPoly` allows negative exponents and carries the
//! alphabet it is written in. Both are stored fully expanded with no zero
//! coefficients. Division is exact multivariate division; a failed division
//! signals a bug, never a rounding problem.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub type Exp = Vec<i64>;

/// Graded lexicographic order on exponent vectors.
pub fn grlex(a: &[i64], b: &[i64]) -> Ordering {
    let da: i64 = a.iter().sum();
    let db: i64 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

fn add_exp(a: &[i64], b: &[i64]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_exp(a: &[i64], b: &[i64]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Polynomial in `y` with nonnegative exponent vectors.
#[derive(Clone, PartialEq, Eq)]
pub struct FPolynomial {
    nvars: usize,
    terms: BTreeMap<Exp, BigInt>,
}

impl FPolynomial {
    pub fn zero(nvars: usize) -> Self {
        FPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(vec![0; nvars], BigInt::one())
    }

    pub fn monomial(exp: Exp, coeff: BigInt) -> Self {
        assert!(exp.iter().all(|&e| e >= 0), "F-polynomial exponents must be nonnegative");
        let nvars = exp.len();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        FPolynomial { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().next().map_or(false, |(e, c)| {
                e.iter().all(|&x| x == 0) && c.is_one()
            })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(BigInt::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        FPolynomial { nvars: self.nvars, terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut terms: BTreeMap<Exp, BigInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = add_exp(e1, e2);
                let entry = terms.entry(e).or_insert_with(BigInt::zero);
                *entry += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        FPolynomial { nvars: self.nvars, terms }
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut r = Self::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        r
    }

    fn leading(&self) -> Option<(&Exp, &BigInt)> {
        self.terms.iter().max_by(|a, b| grlex(a.0, b.0))
    }

    /// Exact multivariate division; errors unless `self = q * div` exactly.
    pub fn exact_div(&self, div: &Self) -> Result<Self> {
        assert_eq!(self.nvars, div.nvars);
        if div.is_zero() {
            return Err(Error::InexactDivision("division by zero polynomial".into()));
        }
        if div.is_one() {
            return Ok(self.clone());
        }
        let (lt_e, lt_c) = div.leading().expect("nonzero divisor");
        let lt_e = lt_e.clone();
        let lt_c = lt_c.clone();
        let mut rem = self.clone();
        let mut quo = Self::zero(self.nvars);
        while let Some((re, rc)) = rem.leading() {
            let qe = sub_exp(re, &lt_e);
            if qe.iter().any(|&x| x < 0) {
                return Err(Error::InexactDivision(
                    "leading monomial not divisible".into(),
                ));
            }
            let (qc, r) = num_integer::Integer::div_rem(rc, &lt_c);
            if !r.is_zero() {
                return Err(Error::InexactDivision(
                    "leading coefficient not divisible".into(),
                ));
            }
            let qt = Self::monomial(qe, qc);
            rem = rem.add(&qt.mul(div).neg());
            quo = quo.add(&qt);
        }
        Ok(quo)
    }

    pub fn neg(&self) -> Self {
        FPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    /// Entrywise minimum exponent over all terms (the tropical content).
    pub fn min_exponents(&self) -> Option<Exp> {
        let mut it = self.terms.keys();
        let mut acc = it.next()?.clone();
        for e in it {
            for (a, &x) in acc.iter_mut().zip(e) {
                if x < *a {
                    *a = x;
                }
            }
        }
        Some(acc)
    }

    /// Monomial substitution `y_j -> x^{img_j}`; the result is a Laurent
    /// polynomial in the given alphabet.
    pub fn eval_monomials(&self, images: &[Exp], alphabet: Alphabet) -> LaurentPoly {
        let m = images.first().map_or(0, |v| v.len());
        let mut out = LaurentPoly::zero(m, alphabet);
        for (e, c) in &self.terms {
            let mut exp = vec![0i64; m];
            for (j, &ej) in e.iter().enumerate() {
                for (x, &img) in exp.iter_mut().zip(&images[j]) {
                    *x += ej * img;
                }
            }
            out.add_term(exp, c.clone());
        }
        out
    }

    pub fn to_laurent(&self, alphabet: Alphabet) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.nvars, alphabet);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl std::fmt::Display for FPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_laurent(Alphabet::Y))
    }
}

impl std::fmt::Debug for FPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self)
    }
}

/// Which variable family a Laurent polynomial is written in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Alphabet {
    X,
    Y,
}

impl Alphabet {
    pub fn letter(self) -> char {
        match self {
            Alphabet::X => 'x',
            Alphabet::Y => 'y',
        }
    }
}

/// Laurent polynomial: exponent vectors in `Z^n`, big-integer coefficients,
/// canonical (no zero coefficients stored).
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    nvars: usize,
    alphabet: Alphabet,
    terms: BTreeMap<Exp, BigInt>,
}

impl LaurentPoly {
    pub fn zero(nvars: usize, alphabet: Alphabet) -> Self {
        LaurentPoly { nvars, alphabet, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize, alphabet: Alphabet) -> Self {
        Self::monomial(vec![0; nvars], BigInt::one(), alphabet)
    }

    pub fn monomial(exp: Exp, coeff: BigInt, alphabet: Alphabet) -> Self {
        let nvars = exp.len();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        LaurentPoly { nvars, alphabet, terms }
    }

    /// The i-th variable as a Laurent polynomial.
    pub fn variable(nvars: usize, i: usize, alphabet: Alphabet) -> Self {
        let mut exp = vec![0i64; nvars];
        exp[i] = 1;
        Self::monomial(exp, BigInt::one(), alphabet)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().next().map_or(false, |(e, c)| {
                e.iter().all(|&x| x == 0) && c.is_one()
            })
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &BigInt)> {
        self.terms.iter()
    }

    /// Some((exp, coeff)) when this is a single monomial.
    pub fn as_monomial(&self) -> Option<(&Exp, &BigInt)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn add_term(&mut self, exp: Exp, coeff: BigInt) {
        assert_eq!(exp.len(), self.nvars);
        let entry = self.terms.entry(exp.clone()).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        assert_eq!(self.alphabet, other.alphabet);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        assert_eq!(self.alphabet, other.alphabet);
        let mut out = Self::zero(self.nvars, self.alphabet);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(add_exp(e1, e2), c1 * c2);
            }
        }
        out
    }

    pub fn mul_monomial(&self, exp: &[i64], coeff: &BigInt) -> Self {
        let mut out = Self::zero(self.nvars, self.alphabet);
        for (e, c) in &self.terms {
            out.add_term(add_exp(e, exp), c * coeff);
        }
        out
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut r = Self::one(self.nvars, self.alphabet);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        r
    }

    pub fn has_positive_coeffs(&self) -> bool {
        !self.terms.is_empty() && self.terms.values().all(|c| c.is_positive())
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Entrywise minimum exponent over all terms.
    pub fn min_exponents(&self) -> Option<Exp> {
        let mut it = self.terms.keys();
        let mut acc = it.next()?.clone();
        for e in it {
            for (a, &x) in acc.iter_mut().zip(e) {
                if x < *a {
                    *a = x;
                }
            }
        }
        Some(acc)
    }

    /// Exact division in the Laurent ring; errors unless exact.
    pub fn exact_div(&self, div: &Self) -> Result<Self> {
        assert_eq!(self.nvars, self.nvars);
        if div.is_zero() {
            return Err(Error::InexactDivision("division by zero polynomial".into()));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        // shift both to ordinary polynomials, divide, shift back
        let s1 = self.min_exponents().unwrap();
        let s2 = div.min_exponents().unwrap();
        let f1 = self.shifted_fpoly(&s1);
        let f2 = div.shifted_fpoly(&s2);
        let q = f1.exact_div(&f2)?;
        let shift = sub_exp(&s1, &s2);
        let mut out = Self::zero(self.nvars, self.alphabet);
        for (e, c) in q.terms() {
            out.add_term(add_exp(e, &shift), c.clone());
        }
        Ok(out)
    }

    fn shifted_fpoly(&self, shift: &[i64]) -> FPolynomial {
        let mut out = FPolynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            out = out.add(&FPolynomial::monomial(sub_exp(e, shift), c.clone()));
        }
        out
    }

    /// Monomial substitution: variable `j` maps to `x^{img_j}`.
    pub fn eval_monomials(&self, images: &[Exp], alphabet: Alphabet) -> LaurentPoly {
        let m = images.first().map_or(0, |v| v.len());
        let mut out = LaurentPoly::zero(m, alphabet);
        for (e, c) in &self.terms {
            let mut exp = vec![0i64; m];
            for (j, &ej) in e.iter().enumerate() {
                for (x, &img) in exp.iter_mut().zip(&images[j]) {
                    *x += ej * img;
                }
            }
            out.add_term(exp, c.clone());
        }
        out
    }
}

impl std::fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Exp, &BigInt)> = self.terms.iter().collect();
        terms.sort_by(|a, b| grlex(a.0, b.0));
        for (idx, (e, c)) in terms.iter().enumerate() {
            let positive = !c.is_negative();
            if idx == 0 {
                if !positive {
                    write!(f, "-")?;
                }
            } else if positive {
                write!(f, " + ")?;
            } else {
                write!(f, " - ")?;
            }
            let mag = c.magnitude();
            let is_const = e.iter().all(|&x| x == 0);
            if is_const {
                write!(f, "{}", mag)?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", mag)?;
                }
                write!(f, "{}^(", self.alphabet.letter())?;
                for (j, x) in e.iter().enumerate() {
                    if j > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", x)?;
                }
                write!(f, ")")?;
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self)
    }
}

/// An element of the universal semifield presented as a quotient of two
/// positive-coefficient Laurent polynomials. No normal form is maintained;
/// equality is tested by cross-multiplication.
#[derive(Clone)]
pub struct SubtractionFreeRational {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl SubtractionFreeRational {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Self {
        assert!(num.has_positive_coeffs(), "numerator must have positive coefficients");
        assert!(den.has_positive_coeffs(), "denominator must have positive coefficients");
        SubtractionFreeRational { num, den }
    }

    pub fn from_poly(num: LaurentPoly) -> Self {
        let den = LaurentPoly::one(num.nvars(), num.alphabet());
        Self::new(num, den)
    }

    pub fn one(nvars: usize, alphabet: Alphabet) -> Self {
        Self::from_poly(LaurentPoly::one(nvars, alphabet))
    }

    pub fn monomial(exp: Exp, alphabet: Alphabet) -> Self {
        Self::from_poly(LaurentPoly::monomial(exp, num_traits::One::one(), alphabet))
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.num.alphabet()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn inv(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: i64) -> Self {
        if e < 0 {
            self.inv().pow(-e)
        } else {
            Self::new(self.num.pow(e as u64), self.den.pow(e as u64))
        }
    }

    /// Equality as rational functions: `a/b == c/d  <=>  a*d == c*b`.
    pub fn eq_rational(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }

    /// Some(p) when the element is a Laurent polynomial (den divides num).
    pub fn to_laurent(&self) -> Option<LaurentPoly> {
        self.num.exact_div(&self.den).ok()
    }

    /// Divide numerator and denominator by their common monomial content.
    pub fn reduce_monomial_gcd(&self) -> Self {
        let mn = self.num.min_exponents().unwrap();
        let md = self.den.min_exponents().unwrap();
        let common: Exp = mn.iter().zip(&md).map(|(a, b)| *a.min(b)).collect();
        let neg: Exp = common.iter().map(|x| -x).collect();
        let one = BigInt::one();
        Self::new(self.num.mul_monomial(&neg, &one), self.den.mul_monomial(&neg, &one))
    }

    /// Monomial substitution applied to numerator and denominator.
    pub fn eval_monomials(&self, images: &[Exp], alphabet: Alphabet) -> Self {
        Self::new(
            self.num.eval_monomials(images, alphabet),
            self.den.eval_monomials(images, alphabet),
        )
    }
}

impl std::fmt::Display for SubtractionFreeRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl std::fmt::Debug for SubtractionFreeRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self)
    }
}

/// A Laurent monomial with coefficient 1, the image of a tropicalization.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TropicalMonomial(pub Exp);

impl std::fmt::Display for TropicalMonomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "u^(")?;
        for (j, x) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x)?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(terms: &[(&[i64], i64)]) -> FPolynomial {
        let mut p = FPolynomial::zero(terms[0].0.len());
        for (e, c) in terms {
            p = p.add(&FPolynomial::monomial(e.to_vec(), BigInt::from(*c)));
        }
        p
    }

    #[test]
    fn exact_division_roundtrip() {
        // (1 + y1)(1 + y2 + y1 y2) divided by (1 + y1)
        let a = fp(&[(&[0, 0], 1), (&[1, 0], 1)]);
        let b = fp(&[(&[0, 0], 1), (&[0, 1], 1), (&[1, 1], 1)]);
        let prod = a.mul(&b);
        assert_eq!(prod.exact_div(&a).unwrap(), b);
        assert_eq!(prod.exact_div(&b).unwrap(), a);
    }

    #[test]
    fn inexact_division_rejected() {
        let a = fp(&[(&[0, 0], 1), (&[1, 0], 1)]);
        let b = fp(&[(&[0, 0], 1), (&[0, 1], 1)]);
        assert!(a.exact_div(&b).is_err());
    }

    #[test]
    fn laurent_division_shifts() {
        let x = |e: &[i64]| LaurentPoly::monomial(e.to_vec(), BigInt::one(), Alphabet::X);
        // (x1^-1 + x1^-1 x2) / x1^-1 = 1 + x2
        let p = x(&[-1, 0]).add(&x(&[-1, 1]));
        let q = p.exact_div(&x(&[-1, 0])).unwrap();
        assert_eq!(q, x(&[0, 0]).add(&x(&[0, 1])));
    }

    #[test]
    fn sfr_cross_multiplication_equality() {
        let y = |e: &[i64]| LaurentPoly::monomial(e.to_vec(), BigInt::one(), Alphabet::Y);
        let one_plus_y1 = y(&[0, 0]).add(&y(&[1, 0]));
        // y2(1+y1) / (1+y1)  ==  y2 / 1
        let a = SubtractionFreeRational::new(y(&[0, 1]).mul(&one_plus_y1), one_plus_y1.clone());
        let b = SubtractionFreeRational::from_poly(y(&[0, 1]));
        assert!(a.eq_rational(&b));
        assert!(!a.eq_rational(&SubtractionFreeRational::from_poly(y(&[1, 0]))));
    }

    #[test]
    fn display_graded_lex() {
        let p = fp(&[(&[0, 0], 1), (&[1, 1], 3), (&[1, 0], 1)]);
        assert_eq!(p.to_string(), "1 + y^(1,0) + 3*y^(1,1)");
    }
}
