//! Cluster variables via separation formulas, tropicalization, and the
//! tropical/nontropical decomposition of mutation maps.
//!
//! The separation formulas express every x- and y-variable in terms of the
//! initial variables:
//! `x_{i;t} = x^{g_{i;t}} F_{i;t}(ŷ)` and
//! `y_{i;t} = y^{c_{i;t}} ∏ F_{j;t}(y)^{b_{ji;t}}`,
//! with `ŷ_j = x^{b_j}` the hat-variables of the initial seed. The direct
//! mutation of Laurent expressions serves as an independent oracle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::matrix::{ExchangeMatrix, IntMatrix};
use crate::pattern::{evaluate_walk, PatternPoint, Walk};
use crate::poly::{
    Alphabet, Exp, LaurentPoly, SubtractionFreeRational, TropicalMonomial,
};
use crate::{Error, Result};

fn to_i64_vec(v: &[BigInt]) -> Result<Exp> {
    v.iter()
        .map(|x| i64::try_from(x.clone()).map_err(|_| Error::Invalid("exponent overflow".into())))
        .collect()
}

/// Columns of a matrix as exponent vectors.
fn columns_i64(m: &IntMatrix) -> Result<Vec<Exp>> {
    (0..m.n()).map(|j| to_i64_vec(&m.column(j))).collect()
}

/// `x_{i;t}` as an expanded Laurent polynomial in the initial x-variables:
/// the separation formula `x^{g_{i;t}} F_{i;t}(ŷ)`.
pub fn x_variable(p: &PatternPoint, i: usize) -> Result<LaurentPoly> {
    let b_cols = columns_i64(p.initial().matrix())?;
    let g = to_i64_vec(&p.g_vector(i))?;
    let f_hat = p.f(i).eval_monomials(&b_cols, Alphabet::X);
    Ok(f_hat.mul_monomial(&g, &BigInt::one()))
}

/// All current cluster variables as Laurent polynomials.
pub fn cluster_x_variables(p: &PatternPoint) -> Result<Vec<LaurentPoly>> {
    (0..p.n()).map(|i| x_variable(p, i)).collect()
}

/// `y_{i;t}` as a subtraction-free rational in the initial y-variables:
/// `y^{c_{i;t}} ∏ F_{j;t}(y)^{b_{ji;t}}` with positive powers in the
/// numerator and negative powers in the denominator.
pub fn y_variable(p: &PatternPoint, i: usize) -> Result<SubtractionFreeRational> {
    let n = p.n();
    let c = to_i64_vec(&p.c_vector(i))?;
    let mut num = LaurentPoly::monomial(c, BigInt::one(), Alphabet::Y);
    let mut den = LaurentPoly::one(n, Alphabet::Y);
    for j in 0..n {
        let e = p.b_t().get(j, i);
        let mag = u64::try_from(e.magnitude().clone())
            .map_err(|_| Error::Invalid("exponent overflow".into()))?;
        if mag == 0 {
            continue;
        }
        let fj = p.f(j).to_laurent(Alphabet::Y).pow(mag);
        if e.is_positive() {
            num = num.mul(&fj);
        } else {
            den = den.mul(&fj);
        }
    }
    Ok(SubtractionFreeRational::new(num, den))
}

/// Direct seed mutation of a cluster of Laurent expressions at direction `k`:
/// `x'_k = x_k^{-1} (∏ x_j^{[-b_jk]_+} + ∏ x_j^{[b_jk]_+})`, everything
/// expanded over the initial variables; the division must be exact
/// (Laurent phenomenon). Serves as the independent oracle for `x_variable`.
pub fn mutate_x_direct(
    xs: &[LaurentPoly],
    b_t: &IntMatrix,
    k: usize,
) -> Result<Vec<LaurentPoly>> {
    let n = xs.len();
    if k >= n {
        return Err(Error::DirectionOutOfRange { k, n });
    }
    let nv = xs[0].nvars();
    let mut pos = LaurentPoly::one(nv, Alphabet::X);
    let mut neg = LaurentPoly::one(nv, Alphabet::X);
    for (j, xj) in xs.iter().enumerate() {
        let e = b_t.get(j, k);
        let mag = u64::try_from(e.magnitude().clone())
            .map_err(|_| Error::Invalid("exponent overflow".into()))?;
        if mag == 0 {
            continue;
        }
        if e.is_positive() {
            pos = pos.mul(&xj.pow(mag));
        } else {
            neg = neg.mul(&xj.pow(mag));
        }
    }
    let new_xk = neg.add(&pos).exact_div(&xs[k])?;
    let mut out = xs.to_vec();
    out[k] = new_xk;
    Ok(out)
}

/// Tropicalization of a subtraction-free rational: the entrywise minimum
/// exponent of the numerator minus that of the denominator, after reducing
/// the pair by its common monomial content.
pub fn tropicalize(r: &SubtractionFreeRational) -> TropicalMonomial {
    let r = r.reduce_monomial_gcd();
    let mn = r.num().min_exponents().expect("nonzero numerator");
    let md = r.den().min_exponents().expect("nonzero denominator");
    TropicalMonomial(mn.iter().zip(&md).map(|(a, b)| a - b).collect())
}

/// Image of a q-automorphism: a Laurent polynomial when the exponent turned
/// out nonnegative, otherwise a rational form.
#[derive(Clone, Debug)]
pub enum QImage {
    Laurent(LaurentPoly),
    Rational(SubtractionFreeRational),
}

impl QImage {
    pub fn into_rational(self) -> SubtractionFreeRational {
        match self {
            QImage::Laurent(p) => SubtractionFreeRational::from_poly(p),
            QImage::Rational(r) => r,
        }
    }

    pub fn as_laurent(&self) -> Option<&LaurentPoly> {
        match self {
            QImage::Laurent(p) => Some(p),
            QImage::Rational(_) => None,
        }
    }
}

/// `1 + ŷ^{c^+_{k;t}}` as a Laurent polynomial in the initial x-variables.
fn one_plus_yhat_cplus(p: &PatternPoint, k: usize) -> Result<LaurentPoly> {
    let n = p.initial().n();
    let hat = to_i64_vec(&p.hat_c_plus(k)?)?;
    let mut f = LaurentPoly::one(n, Alphabet::X);
    f.add_term(hat, BigInt::one());
    Ok(f)
}

/// `1 + y^{c^+_{k;t}}` in the y-alphabet.
fn one_plus_y_cplus(p: &PatternPoint, k: usize) -> Result<LaurentPoly> {
    let n = p.initial().n();
    let c = to_i64_vec(&p.c_plus(k)?)?;
    let mut f = LaurentPoly::one(n, Alphabet::Y);
    f.add_term(c, BigInt::one());
    Ok(f)
}

/// The automorphism `q_{k;t}` on an x-monomial:
/// `x^m -> x^m (1 + ŷ^{c^+_{k;t}})^{-(m, d_k c_{k;t})_D}`.
pub fn q_monomial_x(p: &PatternPoint, k: usize, m: &[i64]) -> Result<QImage> {
    let skew = p.initial().skew();
    let mb: Vec<BigInt> = m.iter().map(|&x| BigInt::from(x)).collect();
    let ck: Vec<BigInt> = p.c_vector(k).iter().map(|x| x * skew.d_i(k)).collect();
    let e = skew.pairing(&mb, &ck);
    if !e.is_integer() {
        return Err(Error::Invalid("q-automorphism exponent not integral".into()));
    }
    let e = i64::try_from(e.to_integer()).map_err(|_| Error::Invalid("exponent overflow".into()))?;
    let base = LaurentPoly::monomial(m.to_vec(), BigInt::one(), Alphabet::X);
    let f = one_plus_yhat_cplus(p, k)?;
    mono_times_power(base, f, -e)
}

/// The automorphism `q_{k;t}` on a y-monomial:
/// `y^n -> y^n (1 + y^{c^+_{k;t}})^{(n, d_k ĉ_{k;t})_D}`.
pub fn q_monomial_y(p: &PatternPoint, k: usize, nvec: &[i64]) -> Result<QImage> {
    let skew = p.initial().skew();
    let nb: Vec<BigInt> = nvec.iter().map(|&x| BigInt::from(x)).collect();
    let hk: Vec<BigInt> = p.hat_c_vector(k).iter().map(|x| x * skew.d_i(k)).collect();
    let e = skew.pairing(&nb, &hk);
    if !e.is_integer() {
        return Err(Error::Invalid("q-automorphism exponent not integral".into()));
    }
    let e = i64::try_from(e.to_integer()).map_err(|_| Error::Invalid("exponent overflow".into()))?;
    let base = LaurentPoly::monomial(nvec.to_vec(), BigInt::one(), Alphabet::Y);
    let f = one_plus_y_cplus(p, k)?;
    mono_times_power(base, f, e)
}

fn mono_times_power(base: LaurentPoly, f: LaurentPoly, e: i64) -> Result<QImage> {
    if e >= 0 {
        Ok(QImage::Laurent(base.mul(&f.pow(e as u64))))
    } else {
        Ok(QImage::Rational(SubtractionFreeRational::new(base, f.pow((-e) as u64))))
    }
}

/// `q_{k;t}` applied to a Laurent polynomial term-wise (the map is linear).
pub fn q_automorphism(p: &PatternPoint, k: usize, target: &LaurentPoly) -> Result<QImage> {
    let mut acc: Option<SubtractionFreeRational> = None;
    let mut all_laurent = true;
    for (e, c) in target.terms() {
        let img = match target.alphabet() {
            Alphabet::X => q_monomial_x(p, k, e)?,
            Alphabet::Y => q_monomial_y(p, k, e)?,
        };
        if matches!(img, QImage::Rational(_)) {
            all_laurent = false;
        }
        let r = img.into_rational();
        let r = SubtractionFreeRational::new(
            r.num().mul_monomial(&vec![0; target.nvars()], c),
            r.den().clone(),
        );
        acc = Some(match acc {
            Some(a) => a.add(&r),
            None => r,
        });
    }
    match acc {
        None => Ok(QImage::Laurent(LaurentPoly::zero(target.nvars(), target.alphabet()))),
        Some(a) => {
            if all_laurent {
                if let Some(p) = a.to_laurent() {
                    return Ok(QImage::Laurent(p));
                }
            }
            Ok(QImage::Rational(a))
        }
    }
}

/// `q_t^{t0} = q_{k0;t0} ∘ ... ∘ q_{kr;tr}` applied to a rational in the
/// initial alphabet; needs the pattern points along the walk.
pub fn q_compose_along_walk(
    b0: &ExchangeMatrix,
    walk: &Walk,
    target: &SubtractionFreeRational,
) -> Result<SubtractionFreeRational> {
    // prefix points t_0 .. t_r (endpoint excluded)
    let dirs = walk.directions();
    let mut points = Vec::with_capacity(dirs.len());
    let mut p = PatternPoint::initial_point(b0);
    for &k in dirs {
        points.push((p.clone(), k));
        p = p.step_eps(k, 1)?;
    }
    // innermost factor is q_{k_r;t_r}
    let mut acc = target.clone();
    for (point, k) in points.into_iter().rev() {
        acc = q_apply_rational(&point, k, &acc)?;
        acc = simplify_rational(acc);
    }
    Ok(acc)
}

/// Opportunistic cancellation: clear the denominator when it divides the
/// numerator exactly, and strip common monomial content. Keeps compositions
/// of q-automorphisms from accumulating spurious factors.
fn simplify_rational(r: SubtractionFreeRational) -> SubtractionFreeRational {
    if r.den().is_one() {
        return r;
    }
    if let Ok(q) = r.num().exact_div(r.den()) {
        if q.has_positive_coeffs() {
            return SubtractionFreeRational::from_poly(q);
        }
    }
    r.reduce_monomial_gcd()
}

/// `q_{k;t}` on a subtraction-free rational: apply to numerator and
/// denominator (the map is a field automorphism).
pub fn q_apply_rational(
    p: &PatternPoint,
    k: usize,
    r: &SubtractionFreeRational,
) -> Result<SubtractionFreeRational> {
    let num = q_automorphism(p, k, r.num())?.into_rational();
    let den = q_automorphism(p, k, r.den())?.into_rational();
    Ok(SubtractionFreeRational::new(
        num.num().mul(den.den()),
        num.den().mul(den.num()),
    ))
}

/// Exponent-matrix action of the tropical map `τ_{k;t}` on x-monomials:
/// column `k` is `-e_k + Σ_j [-ε_{k;t} b_{jk;t}]_+ e_j`, the exponential form
/// of the g-vector mutation.
pub fn tau_x_matrix(p: &PatternPoint, k: usize) -> Result<IntMatrix> {
    let n = p.n();
    if k >= n {
        return Err(Error::DirectionOutOfRange { k, n });
    }
    let eps = BigInt::from(p.tropical_sign(k)?);
    Ok(IntMatrix::from_fn(n, |i, j| {
        if j != k {
            if i == j { BigInt::one() } else { BigInt::zero() }
        } else {
            let mut v = if i == k { -BigInt::one() } else { BigInt::zero() };
            let c = -(&eps) * p.b_t().get(i, k);
            if c.is_positive() {
                v += c;
            }
            v
        }
    }))
}

/// Exponent-matrix action of `τ_{k;t}` on y-monomials: column `k` is `-e_k`,
/// column `i != k` is `e_i + [ε_{k;t} b_{ki;t}]_+ e_k`.
pub fn tau_y_matrix(p: &PatternPoint, k: usize) -> Result<IntMatrix> {
    let n = p.n();
    if k >= n {
        return Err(Error::DirectionOutOfRange { k, n });
    }
    let eps = BigInt::from(p.tropical_sign(k)?);
    Ok(IntMatrix::from_fn(n, |i, j| {
        if i == k && j == k {
            -BigInt::one()
        } else if i == k && j != k {
            let c = &eps * p.b_t().get(k, j);
            if c.is_positive() { c } else { BigInt::zero() }
        } else if i == j {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    }))
}

/// Exponent matrix of `τ_t^{t0}` on x-monomials (product over the walk).
/// Equals `G_t` column-for-column.
pub fn tau_x_along_walk(b0: &ExchangeMatrix, walk: &Walk) -> Result<IntMatrix> {
    let mut acc = IntMatrix::identity(b0.n());
    let mut p = PatternPoint::initial_point(b0);
    for &k in walk.directions() {
        let a = tau_x_matrix(&p, k)?;
        acc = acc.mul(&a);
        p = p.step_eps(k, 1)?;
    }
    Ok(acc)
}

/// Exponent matrix of `τ_t^{t0}` on y-monomials. Equals `C_t`.
pub fn tau_y_along_walk(b0: &ExchangeMatrix, walk: &Walk) -> Result<IntMatrix> {
    let mut acc = IntMatrix::identity(b0.n());
    let mut p = PatternPoint::initial_point(b0);
    for &k in walk.directions() {
        let a = tau_y_matrix(&p, k)?;
        acc = acc.mul(&a);
        p = p.step_eps(k, 1)?;
    }
    Ok(acc)
}

/// `ρ_{k;t}` on an x-monomial of the vertex-t variables:
/// `x^v -> x^v (1 + ŷ_{k;t}^{ε_{k;t}})^{-v_k}`, expressed in the t-variables.
pub fn rho_x_monomial(p: &PatternPoint, k: usize, v: &[i64]) -> Result<SubtractionFreeRational> {
    let n = p.n();
    let eps = p.tropical_sign(k)?;
    let bk = to_i64_vec(&p.b_t().column(k))?;
    let yk_exp: Exp = bk.iter().map(|&x| if eps < 0 { -x } else { x }).collect();
    let mut f = LaurentPoly::one(n, Alphabet::X);
    f.add_term(yk_exp, BigInt::one());
    let base = LaurentPoly::monomial(v.to_vec(), BigInt::one(), Alphabet::X);
    Ok(mono_times_power(base, f, -v[k])?.into_rational())
}

/// `ρ_{k;t}` on a y-monomial: `y^v -> y^v (1 + y_{k;t}^{ε_{k;t}})^{-Σ_i v_i b_{ki;t}}`.
pub fn rho_y_monomial(p: &PatternPoint, k: usize, v: &[i64]) -> Result<SubtractionFreeRational> {
    let n = p.n();
    let eps = p.tropical_sign(k)?;
    let mut yk_exp = vec![0i64; n];
    yk_exp[k] = if eps < 0 { -1 } else { 1 };
    let mut f = LaurentPoly::one(n, Alphabet::Y);
    f.add_term(yk_exp, BigInt::one());
    let mut e = 0i64;
    for (i, &vi) in v.iter().enumerate() {
        let b = i64::try_from(p.b_t().get(k, i).clone())
            .map_err(|_| Error::Invalid("exponent overflow".into()))?;
        e += vi * b;
    }
    let base = LaurentPoly::monomial(v.to_vec(), BigInt::one(), Alphabet::Y);
    Ok(mono_times_power(base, f, -e)?.into_rational())
}

/// Applies the exponent matrix of a tropical map to every monomial of a
/// subtraction-free rational.
pub fn apply_exponent_matrix(
    m: &IntMatrix,
    r: &SubtractionFreeRational,
) -> Result<SubtractionFreeRational> {
    let images = columns_i64(m)?;
    Ok(r.eval_monomials(&images, r.alphabet()))
}

/// Report from the Fock-Goncharov decomposition checks.
#[derive(Debug, Default)]
pub struct FgReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl FgReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Verifies, at the endpoint of the walk, the tropical/nontropical
/// decomposition identities: `τ(x_{i;t}) = x^{g_{i;t}}`, `τ(y_{i;t}) =
/// y^{c_{i;t}}`, the involution `τ_{k;t'} ∘ τ_{k;t} = id`, the intertwining
/// `τ ∘ ρ = q ∘ τ`, and that `μ = q ∘ τ` reproduces the separation formulas.
pub fn fock_goncharov_check(b0: &ExchangeMatrix, walk: &Walk) -> Result<FgReport> {
    let mut report = FgReport::default();
    let n = b0.n();
    let p = evaluate_walk(b0, walk)?;

    // τ(x_{i;t}) = x^{g_{i;t}} and τ(y_{i;t}) = y^{c_{i;t}}
    let tx = tau_x_along_walk(b0, walk)?;
    let ty = tau_y_along_walk(b0, walk)?;
    report.check(&tx == p.g_t(), || "tau_x matrix != G_t".into());
    report.check(&ty == p.c_t(), || "tau_y matrix != C_t".into());

    // involution at the endpoint, in every direction
    for k in 0..n {
        let fwd_x = tau_x_matrix(&p, k)?;
        let fwd_y = tau_y_matrix(&p, k)?;
        let q = p.step_eps(k, 1)?;
        let back_x = tau_x_matrix(&q, k)?;
        let back_y = tau_y_matrix(&q, k)?;
        report.check(fwd_x.mul(&back_x) == IntMatrix::identity(n), || {
            format!("tau_x involution failed at k={k}")
        });
        report.check(fwd_y.mul(&back_y) == IntMatrix::identity(n), || {
            format!("tau_y involution failed at k={k}")
        });
    }

    // intertwining τ_t^{t0} ∘ ρ_{k;t} = q_{k;t} ∘ τ_t^{t0} on generators
    for k in 0..n {
        for i in 0..n {
            let mut v = vec![0i64; n];
            v[i] = 1;
            // x-side
            let lhs = apply_exponent_matrix(&tx, &rho_x_monomial(&p, k, &v)?)?;
            let g = to_i64_vec(&p.g_vector(i))?;
            let rhs = q_monomial_x(&p, k, &g)?.into_rational();
            report.check(lhs.eq_rational(&rhs), || {
                format!("taurho intertwining (x) failed at k={k}, i={i}")
            });
            // y-side
            let lhs = apply_exponent_matrix(&ty, &rho_y_monomial(&p, k, &v)?)?;
            let c = to_i64_vec(&p.c_vector(i))?;
            let rhs = q_monomial_y(&p, k, &c)?.into_rational();
            report.check(lhs.eq_rational(&rhs), || {
                format!("taurho intertwining (y) failed at k={k}, i={i}")
            });
        }
    }

    // μ = q ∘ τ: q_t^{t0}(x^{g_{i;t}}) = x^{g_{i;t}} F_{i;t}(ŷ) = x_{i;t},
    // and the y-side separation formula
    for i in 0..n {
        let g = to_i64_vec(&p.g_vector(i))?;
        let target = SubtractionFreeRational::monomial(g, Alphabet::X);
        let got = q_compose_along_walk(b0, walk, &target)?;
        let expect = SubtractionFreeRational::from_poly(x_variable(&p, i)?);
        report.check(got.eq_rational(&expect), || {
            format!("q∘τ on x^g_{i} does not reproduce x_{{{i};t}}")
        });

        let c = to_i64_vec(&p.c_vector(i))?;
        let target = SubtractionFreeRational::monomial(c, Alphabet::Y);
        let got = q_compose_along_walk(b0, walk, &target)?;
        let expect = y_variable(&p, i)?;
        report.check(got.eq_rational(&expect), || {
            format!("q∘τ on y^c_{i} does not reproduce y_{{{i};t}}")
        });
    }

    Ok(report)
}

/// Permutation utilities for detropicalization and periodicity tests.
/// `ν` is given as the image list: `perm[i] = ν(i)`.
pub mod permute {
    use super::*;

    pub fn inverse(perm: &[usize]) -> Vec<usize> {
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        inv
    }

    /// Column relabeling: `(νM)_{ij} = M_{i, ν^{-1}(j)}`.
    pub fn columns(m: &IntMatrix, perm: &[usize]) -> IntMatrix {
        let inv = inverse(perm);
        IntMatrix::from_fn(m.n(), |i, j| m.get(i, inv[j]).clone())
    }

    /// Conjugation relabeling: `(νB)_{ij} = B_{ν^{-1}(i), ν^{-1}(j)}`.
    pub fn conjugate(m: &IntMatrix, perm: &[usize]) -> IntMatrix {
        let inv = inverse(perm);
        IntMatrix::from_fn(m.n(), |i, j| m.get(inv[i], inv[j]).clone())
    }

    /// Tuple relabeling: `(νx)_i = x_{ν^{-1}(i)}`.
    pub fn tuple<T: Clone>(xs: &[T], perm: &[usize]) -> Vec<T> {
        let inv = inverse(perm);
        (0..xs.len()).map(|i| xs[inv[i]].clone()).collect()
    }

    pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut items: Vec<usize> = (0..n).collect();
        let len = items.len();
        heap_permute(&mut items, len, &mut out);
        out
    }

    fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap_permute(items, k - 1, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
}

/// Checks the detropicalization implication `G_t = ν G_{t'}  =>  x_t = ν x_{t'}`
/// over a finite enumeration of pattern points. Returns the number of
/// (ordered) pairs related by some permutation.
pub fn detropicalization_check(points: &[PatternPoint]) -> Result<usize> {
    let mut related = 0;
    if points.is_empty() {
        return Ok(0);
    }
    let n = points[0].n();
    let perms = permute::all_permutations(n);
    for p in points {
        for q in points {
            for perm in &perms {
                if p.g_t() == &permute::columns(q.g_t(), perm) {
                    related += 1;
                    let xp = cluster_x_variables(p)?;
                    let xq = cluster_x_variables(q)?;
                    let xq_perm = permute::tuple(&xq, perm);
                    if xp != xq_perm {
                        return Err(Error::Invalid(
                            "detropicalization violated: G_t = νG_{t'} but x_t != νx_{t'}".into(),
                        ));
                    }
                }
            }
        }
    }
    Ok(related)
}

/// Checks the g-vector ↔ x-variable bijection over a finite enumeration:
/// `g_{i;t} = g_{i';t'}` iff `x_{i;t} = x_{i';t'}`. Returns the number of
/// distinct g-vectors (= distinct cluster variables when the check passes).
pub fn g_vector_bijection_check(points: &[PatternPoint]) -> Result<usize> {
    use std::collections::HashMap;
    let mut by_g: HashMap<Vec<BigInt>, LaurentPoly> = HashMap::new();
    let mut by_x: HashMap<String, Vec<BigInt>> = HashMap::new();
    for p in points {
        for i in 0..p.n() {
            let g = p.g_vector(i);
            let x = x_variable(p, i)?;
            if let Some(prev) = by_g.get(&g) {
                if prev != &x {
                    return Err(Error::Invalid("same g-vector, different x-variable".into()));
                }
            } else {
                by_g.insert(g.clone(), x.clone());
            }
            let key = x.to_string();
            if let Some(prev) = by_x.get(&key) {
                if prev != &g {
                    return Err(Error::Invalid("same x-variable, different g-vector".into()));
                }
            } else {
                by_x.insert(key, g);
            }
        }
    }
    assert_eq!(by_g.len(), by_x.len());
    Ok(by_g.len())
}

/// Checks `ŷ_{i;t} = (∏ ŷ_j^{c_{ji;t}}) ∏ F_{j;t}(ŷ)^{b_{ji;t}}` as an
/// identity of subtraction-free rationals in the initial x-variables.
pub fn yhat_separation_check(p: &PatternPoint) -> Result<bool> {
    let n = p.n();
    let b_cols = columns_i64(p.initial().matrix())?;
    let xs = cluster_x_variables(p)?;
    for i in 0..n {
        // left side: ŷ_{i;t} = ∏_j x_{j;t}^{b_{ji;t}} with x_{j;t} expanded
        let mut num = LaurentPoly::one(n, Alphabet::X);
        let mut den = LaurentPoly::one(n, Alphabet::X);
        for j in 0..n {
            let e = p.b_t().get(j, i);
            let mag = u64::try_from(e.magnitude().clone())
                .map_err(|_| Error::Invalid("exponent overflow".into()))?;
            if mag == 0 {
                continue;
            }
            if e.is_positive() {
                num = num.mul(&xs[j].pow(mag));
            } else {
                den = den.mul(&xs[j].pow(mag));
            }
        }
        let lhs = SubtractionFreeRational::new(num, den);
        // right side: ŷ^{c_i} ∏ F_j(ŷ)^{b_ji}
        let c = to_i64_vec(&p.c_vector(i))?;
        let mut base = vec![0i64; n];
        for (j, &cj) in c.iter().enumerate() {
            for (x, &bx) in base.iter_mut().zip(&b_cols[j]) {
                *x += cj * bx;
            }
        }
        let mut rnum = LaurentPoly::monomial(base, BigInt::one(), Alphabet::X);
        let mut rden = LaurentPoly::one(n, Alphabet::X);
        for j in 0..n {
            let e = p.b_t().get(j, i);
            let mag = u64::try_from(e.magnitude().clone())
                .map_err(|_| Error::Invalid("exponent overflow".into()))?;
            if mag == 0 {
                continue;
            }
            let fj_hat = p.f(j).eval_monomials(&b_cols, Alphabet::X).pow(mag);
            if e.is_positive() {
                rnum = rnum.mul(&fj_hat);
            } else {
                rden = rden.mul(&fj_hat);
            }
        }
        let rhs = SubtractionFreeRational::new(rnum, rden);
        if !lhs.eq_rational(&rhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The pairing identities `(g_{i;t}, d_k c_{k;t})_D = δ_{ik}` and
/// `(c_{i;t}, d_k ĉ_{k;t})_D = -b_{ki;t}`.
pub fn pairing_identities_check(p: &PatternPoint) -> bool {
    let n = p.n();
    let skew = p.initial().skew();
    for i in 0..n {
        for k in 0..n {
            let dk_ck: Vec<BigInt> = p.c_vector(k).iter().map(|x| x * skew.d_i(k)).collect();
            let v = skew.pairing(&p.g_vector(i), &dk_ck);
            let expect = if i == k { BigRational::one() } else { BigRational::zero() };
            if v != expect {
                return false;
            }
            let dk_hk: Vec<BigInt> = p.hat_c_vector(k).iter().map(|x| x * skew.d_i(k)).collect();
            let v = skew.pairing(&p.c_vector(i), &dk_hk);
            let expect = BigRational::from(-p.b_t().get(k, i).clone());
            if v != expect {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use rand::Rng;

    fn a2() -> ExchangeMatrix {
        ExchangeMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap()
    }

    fn lp(terms: &[(&[i64], i64)], alphabet: Alphabet) -> LaurentPoly {
        let mut p = LaurentPoly::zero(terms[0].0.len(), alphabet);
        for (e, c) in terms {
            p.add_term(e.to_vec(), BigInt::from(*c));
        }
        p
    }

    #[test]
    fn x_variable_initial_and_one_step() {
        let p = evaluate_walk(&a2(), &Walk::empty()).unwrap();
        assert_eq!(x_variable(&p, 0).unwrap(), lp(&[(&[1, 0], 1)], Alphabet::X));
        // after one mutation: x'_1 = x1^-1 + x1^-1 x2
        let p = evaluate_walk(&a2(), &Walk::new(vec![0])).unwrap();
        assert_eq!(
            x_variable(&p, 0).unwrap(),
            lp(&[(&[-1, 0], 1), (&[-1, 1], 1)], Alphabet::X)
        );
    }

    #[test]
    fn a2_pentagon_returns_permuted_variables() {
        let p = evaluate_walk(&a2(), &Walk::new(vec![0, 1, 0, 1, 0])).unwrap();
        // x_{t5} = s12 x_{t0}
        assert_eq!(x_variable(&p, 0).unwrap(), lp(&[(&[0, 1], 1)], Alphabet::X));
        assert_eq!(x_variable(&p, 1).unwrap(), lp(&[(&[1, 0], 1)], Alphabet::X));
    }

    #[test]
    fn y_variable_examples() {
        let p = evaluate_walk(&a2(), &Walk::empty()).unwrap();
        let y0 = y_variable(&p, 0).unwrap();
        assert!(y0.eq_rational(&SubtractionFreeRational::monomial(vec![1, 0], Alphabet::Y)));

        let p = evaluate_walk(&a2(), &Walk::new(vec![0])).unwrap();
        // y'_1 = 1/y1
        let y0 = y_variable(&p, 0).unwrap();
        assert!(y0.eq_rational(&SubtractionFreeRational::monomial(vec![-1, 0], Alphabet::Y)));
        // y'_2 = y2 (1 + y1): hand-applied mutation rule with b_12 = -1
        let y1 = y_variable(&p, 1).unwrap();
        let expect = SubtractionFreeRational::from_poly(lp(
            &[(&[0, 1], 1), (&[1, 1], 1)],
            Alphabet::Y,
        ));
        assert!(y1.eq_rational(&expect));
    }

    #[test]
    fn y_mutation_rule_holds() {
        // the y-mutation rule as an identity of subtraction-free rationals
        let mut rng = corpus::rng(211);
        for _ in 0..25 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 6, 8, 16);
            let p = evaluate_walk(&b0, &walk).unwrap();
            let k = rng.gen_range(0..b0.n());
            let q = p.step_eps(k, 1).unwrap();
            let yk = y_variable(&p, k).unwrap();
            for i in 0..b0.n() {
                let lhs = y_variable(&q, i).unwrap();
                let rhs = if i == k {
                    yk.inv()
                } else {
                    let yi = y_variable(&p, i).unwrap();
                    let bki = i64::try_from(p.b_t().get(k, i).clone()).unwrap();
                    let one_plus_yk = SubtractionFreeRational::new(
                        yk.num().add(yk.den()),
                        yk.den().clone(),
                    );
                    yi.mul(&yk.pow(bki.max(0))).mul(&one_plus_yk.pow(-bki))
                };
                assert!(lhs.eq_rational(&rhs), "y-mutation rule failed at i={i}");
            }
        }
    }

    #[test]
    fn direct_mutation_oracle_agrees() {
        let mut rng = corpus::rng(213);
        for _ in 0..30 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 8, 8, 16);
            let n = b0.n();
            let mut xs: Vec<LaurentPoly> =
                (0..n).map(|i| LaurentPoly::variable(n, i, Alphabet::X)).collect();
            let mut b = b0.clone();
            for &k in walk.directions() {
                xs = mutate_x_direct(&xs, b.matrix(), k).unwrap();
                b = b.mutate(k, 1).unwrap();
            }
            let p = evaluate_walk(&b0, &walk).unwrap();
            for i in 0..n {
                assert_eq!(xs[i], x_variable(&p, i).unwrap());
                assert!(xs[i].has_nonnegative_coeffs());
            }
        }
    }

    #[test]
    fn direct_mutation_involution() {
        let n = 2;
        let xs: Vec<LaurentPoly> =
            (0..n).map(|i| LaurentPoly::variable(n, i, Alphabet::X)).collect();
        let b = a2();
        let once = mutate_x_direct(&xs, b.matrix(), 0).unwrap();
        let bb = b.mutate(0, 1).unwrap();
        let twice = mutate_x_direct(&once, bb.matrix(), 0).unwrap();
        assert_eq!(twice, xs);
    }

    #[test]
    fn yhat_mutation_rule() {
        // ŷ-variables transform by the same rule as y-variables
        let mut rng = corpus::rng(215);
        for _ in 0..20 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 5, 8, 12);
            let p = evaluate_walk(&b0, &walk).unwrap();
            let n = b0.n();
            let xs = cluster_x_variables(&p).unwrap();
            let k = rng.gen_range(0..n);
            let xs2 = mutate_x_direct(&xs, p.b_t().matrix(), k).unwrap();
            let b2 = p.b_t().mutate(k, 1).unwrap();
            let yhat = |xs: &[LaurentPoly], b: &IntMatrix, i: usize| {
                let mut num = LaurentPoly::one(n, Alphabet::X);
                let mut den = LaurentPoly::one(n, Alphabet::X);
                for j in 0..n {
                    let e = b.get(j, i);
                    let mag = u64::try_from(e.magnitude().clone()).unwrap();
                    if mag == 0 {
                        continue;
                    }
                    if e.is_positive() {
                        num = num.mul(&xs[j].pow(mag));
                    } else {
                        den = den.mul(&xs[j].pow(mag));
                    }
                }
                SubtractionFreeRational::new(num, den)
            };
            let yh_k = yhat(&xs, p.b_t().matrix(), k);
            let one_plus = SubtractionFreeRational::new(
                yh_k.num().add(yh_k.den()),
                yh_k.den().clone(),
            );
            for i in 0..n {
                let lhs = yhat(&xs2, b2.matrix(), i);
                let rhs = if i == k {
                    yh_k.inv()
                } else {
                    let bki = i64::try_from(p.b_t().get(k, i).clone()).unwrap();
                    yhat(&xs, p.b_t().matrix(), i)
                        .mul(&yh_k.pow(bki.max(0)))
                        .mul(&one_plus.pow(-bki))
                };
                assert!(lhs.eq_rational(&rhs));
            }
        }
    }

    #[test]
    fn tropicalize_worked_example() {
        // (3 u1 u2^2 u3^2 + 2 u1^2 u2 u3) / (3 u2^2 + u1^2 u2^2 + u1 u2^3 u3)
        let num = lp(&[(&[1, 2, 2], 3), (&[2, 1, 1], 2)], Alphabet::Y);
        let den = lp(&[(&[0, 2, 0], 3), (&[2, 2, 0], 1), (&[1, 3, 1], 1)], Alphabet::Y);
        let r = SubtractionFreeRational::new(num, den);
        assert_eq!(tropicalize(&r), TropicalMonomial(vec![1, -1, 1]));
    }

    #[test]
    fn tropicalize_f_and_y() {
        let mut rng = corpus::rng(217);
        for _ in 0..25 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 7, 8, 16);
            let p = evaluate_walk(&b0, &walk).unwrap();
            for i in 0..b0.n() {
                // π_trop(F) = 1
                let f = SubtractionFreeRational::from_poly(p.f(i).to_laurent(Alphabet::Y));
                assert_eq!(tropicalize(&f), TropicalMonomial(vec![0; b0.n()]));
                // π_trop(y_{i;t}) = y^{c_{i;t}}
                let y = y_variable(&p, i).unwrap();
                let c = to_i64_vec(&p.c_vector(i)).unwrap();
                assert_eq!(tropicalize(&y), TropicalMonomial(c));
            }
        }
    }

    #[test]
    fn q_automorphism_fp3() {
        // q_{k;t}(x^{g_{i;t}}) = x^{g_{i;t}} (1 + ŷ^{c+_{k;t}})^{-δ_ik}
        let mut rng = corpus::rng(219);
        for _ in 0..20 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 6, 8, 16);
            let p = evaluate_walk(&b0, &walk).unwrap();
            for k in 0..b0.n() {
                for i in 0..b0.n() {
                    let g = to_i64_vec(&p.g_vector(i)).unwrap();
                    let got = q_monomial_x(&p, k, &g).unwrap().into_rational();
                    let base = SubtractionFreeRational::monomial(g, Alphabet::X);
                    let f = one_plus_yhat_cplus(&p, k).unwrap();
                    let expect = if i == k {
                        SubtractionFreeRational::new(base.num().clone(), base.den().mul(&f))
                    } else {
                        base
                    };
                    assert!(got.eq_rational(&expect));
                }
            }
        }
    }

    #[test]
    fn q_composition_reproduces_f_polynomials() {
        // q_t^{t0}(x^{g_{i;t}}) = x^{g_{i;t}} F_{i;t}(ŷ)
        let mut rng = corpus::rng(221);
        for _ in 0..8 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 4, 4, 6);
            let p = evaluate_walk(&b0, &walk).unwrap();
            for i in 0..b0.n() {
                let g = to_i64_vec(&p.g_vector(i)).unwrap();
                let target = SubtractionFreeRational::monomial(g, Alphabet::X);
                let got = q_compose_along_walk(&b0, &walk, &target).unwrap();
                let expect = SubtractionFreeRational::from_poly(x_variable(&p, i).unwrap());
                assert!(got.eq_rational(&expect));
            }
        }
    }

    #[test]
    fn pairing_identities() {
        let mut rng = corpus::rng(223);
        for _ in 0..30 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 8, 10, 20);
            let p = evaluate_walk(&b0, &walk).unwrap();
            assert!(pairing_identities_check(&p));
        }
    }

    #[test]
    fn fock_goncharov_a2_corpus() {
        for dirs in [vec![], vec![0], vec![0, 1], vec![0, 1, 0], vec![0, 1, 0, 1, 0]] {
            let report = fock_goncharov_check(&a2(), &Walk::new(dirs.clone())).unwrap();
            assert!(report.passed(), "failures for walk {:?}: {:?}", dirs, report.failures);
        }
    }

    #[test]
    fn fock_goncharov_random() {
        let mut rng = corpus::rng(225);
        for _ in 0..5 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 3, 4, 6);
            let report = fock_goncharov_check(&b0, &walk).unwrap();
            assert!(report.passed(), "failures: {:?}", report.failures);
        }
    }

    #[test]
    fn yhat_separation_random() {
        let mut rng = corpus::rng(227);
        for _ in 0..10 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 5, 6, 10);
            let p = evaluate_walk(&b0, &walk).unwrap();
            assert!(yhat_separation_check(&p).unwrap());
        }
    }

    #[test]
    fn detropicalization_and_bijection_a2() {
        let pts = crate::pattern::enumerate_pattern(&a2(), 100).unwrap();
        let related = detropicalization_check(&pts).unwrap();
        assert!(related >= pts.len());
        // A2 has exactly 5 distinct cluster variables (the pentagon)
        let distinct = g_vector_bijection_check(&pts).unwrap();
        assert_eq!(distinct, 5);
    }
}
