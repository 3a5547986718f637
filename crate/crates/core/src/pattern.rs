//! C-, G-, and F-patterns along walks of the n-regular tree.
//!
//! A `PatternPoint` is the full state at a tree vertex relative to a fixed
//! initial vertex: the exchange matrix `B_t`, the tropical data `C_t`, `G_t`,
//! and the F-polynomials. Steps are computed with the definitional mutation
//! rules; `fast_mutate` uses the signed one-product formulas and
//! `dual_mutate_initial` rebases the initial vertex.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::matrix::{coherent_sign, ExchangeMatrix, IntMatrix};
use crate::poly::FPolynomial;
use crate::{Error, Result};

/// A reduced walk on the n-regular tree: a sequence of directions with no
/// two consecutive entries equal. Consecutive equal pairs cancel (mutation
/// is an involution), and cancellation cascades.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Walk {
    dirs: Vec<usize>,
    reduced: bool,
}

impl Walk {
    pub fn new(dirs: Vec<usize>) -> Self {
        let mut stack: Vec<usize> = Vec::with_capacity(dirs.len());
        for k in &dirs {
            if stack.last() == Some(k) {
                stack.pop();
            } else {
                stack.push(*k);
            }
        }
        let reduced = stack.len() != dirs.len();
        Walk { dirs: stack, reduced }
    }

    pub fn empty() -> Self {
        Walk { dirs: Vec::new(), reduced: false }
    }

    pub fn directions(&self) -> &[usize] {
        &self.dirs
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Whether construction removed at least one cancelling pair.
    pub fn was_reduced(&self) -> bool {
        self.reduced
    }

    pub fn extended(&self, k: usize) -> Self {
        let mut dirs = self.dirs.clone();
        dirs.push(k);
        Walk::new(dirs)
    }

    pub fn prepended(&self, k: usize) -> Self {
        let mut dirs = Vec::with_capacity(self.dirs.len() + 1);
        dirs.push(k);
        dirs.extend_from_slice(&self.dirs);
        Walk::new(dirs)
    }
}

/// Full pattern state at a tree vertex `t` relative to the initial vertex.
#[derive(Clone, PartialEq, Eq)]
pub struct PatternPoint {
    initial: ExchangeMatrix,
    walk: Walk,
    b: ExchangeMatrix,
    c: IntMatrix,
    g: IntMatrix,
    f: Vec<FPolynomial>,
}

impl PatternPoint {
    /// The pattern at the initial vertex: `C = G = I`, all `F = 1`.
    pub fn initial_point(b0: &ExchangeMatrix) -> Self {
        let n = b0.n();
        PatternPoint {
            initial: b0.clone(),
            walk: Walk::empty(),
            b: b0.clone(),
            c: IntMatrix::identity(n),
            g: IntMatrix::identity(n),
            f: vec![FPolynomial::one(n); n],
        }
    }

    pub fn n(&self) -> usize {
        self.b.n()
    }

    pub fn initial(&self) -> &ExchangeMatrix {
        &self.initial
    }

    pub fn walk(&self) -> &Walk {
        &self.walk
    }

    pub fn b_t(&self) -> &ExchangeMatrix {
        &self.b
    }

    pub fn c_t(&self) -> &IntMatrix {
        &self.c
    }

    pub fn g_t(&self) -> &IntMatrix {
        &self.g
    }

    pub fn f(&self, i: usize) -> &FPolynomial {
        &self.f[i]
    }

    pub fn f_all(&self) -> &[FPolynomial] {
        &self.f
    }

    pub fn c_vector(&self, i: usize) -> Vec<BigInt> {
        self.c.column(i)
    }

    pub fn g_vector(&self, i: usize) -> Vec<BigInt> {
        self.g.column(i)
    }

    /// Tropical sign of the i-th c-vector, recomputed from the column so each
    /// call doubles as a sign-coherence assertion.
    pub fn tropical_sign(&self, i: usize) -> Result<i8> {
        let col = self.c.column(i);
        match coherent_sign(&col) {
            Err(()) => Err(Error::MixedSigns { i }),
            Ok(0) => Err(Error::ZeroColumn { i }),
            Ok(s) => Ok(s),
        }
    }

    /// `c^+_{i;t} = ε_{i;t} c_{i;t}`, a positive vector.
    pub fn c_plus(&self, i: usize) -> Result<Vec<BigInt>> {
        let s = self.tropical_sign(i)?;
        Ok(self.c_vector(i).into_iter().map(|x| if s < 0 { -x } else { x }).collect())
    }

    /// `ĉ_{i;t} = B_{t0} c_{i;t}`.
    pub fn hat_c_vector(&self, i: usize) -> Vec<BigInt> {
        self.initial.matrix().mul_vec(&self.c_vector(i))
    }

    /// `ĉ^+_{i;t} = ε_{i;t} ĉ_{i;t}`.
    pub fn hat_c_plus(&self, i: usize) -> Result<Vec<BigInt>> {
        let s = self.tropical_sign(i)?;
        Ok(self.hat_c_vector(i).into_iter().map(|x| if s < 0 { -x } else { x }).collect())
    }

    /// One definitional mutation step with the ε-expression formulas
    /// (ε = +1 recovers the defining rules).
    pub fn step_eps(&self, k: usize, eps: i8) -> Result<Self> {
        let n = self.n();
        if k >= n {
            return Err(Error::DirectionOutOfRange { k, n });
        }
        let jk = IntMatrix::j_k(n, k);
        let sgn = BigInt::from(eps);
        let b = self.b.matrix();
        let c = &self.c;
        let g = &self.g;
        let eps_b = b.scale(&sgn);
        let eps_c = c.scale(&sgn);
        // C' = C J_k + C [εB]_+^{k•} + [-εC]_+^{•k} B
        let c_new = c
            .mul(&jk)
            .add(&c.mul(&eps_b.plus_part().row_only(k)))
            .add(&eps_c.neg().plus_part().col_only(k).mul(b));
        // G' = G J_k + G [-εB]_+^{•k} - B0 [-εC]_+^{•k}
        let g_new = g
            .mul(&jk)
            .add(&g.mul(&eps_b.neg().plus_part().col_only(k)))
            .sub(&self.initial.matrix().mul(&eps_c.neg().plus_part().col_only(k)));
        let f_new = self.mutate_f(k)?;
        Ok(PatternPoint {
            initial: self.initial.clone(),
            walk: self.walk.extended(k),
            b: self.b.mutate(k, eps)?,
            c: c_new,
            g: g_new,
            f: f_new,
        })
    }

    /// F-polynomial mutation: `F'_k = M_{k;t} / F_k` with exact division.
    fn mutate_f(&self, k: usize) -> Result<Vec<FPolynomial>> {
        let m = self.exchange_binomial(k)?;
        let quot = m.exact_div(&self.f[k]).map_err(|_| {
            Error::InexactDivision(format!(
                "F-polynomial mutation at direction {k} not exact (polynomiality violated)"
            ))
        })?;
        let mut f = self.f.clone();
        f[k] = quot;
        Ok(f)
    }

    /// `M_{k;t} = ∏ y_j^{[c_jk]_+} ∏ F_j^{[b_jk]_+} + ∏ y_j^{[-c_jk]_+} ∏ F_j^{[-b_jk]_+}`.
    fn exchange_binomial(&self, k: usize) -> Result<FPolynomial> {
        let n = self.n();
        let mut pos_exp = vec![0i64; n];
        let mut neg_exp = vec![0i64; n];
        for j in 0..n {
            let cjk = self.c.get(j, k);
            let v = i64::try_from(cjk.clone()).map_err(|_| {
                Error::Invalid("c-vector entry exceeds exponent range".into())
            })?;
            if v > 0 {
                pos_exp[j] = v;
            } else {
                neg_exp[j] = -v;
            }
        }
        let mut pos = FPolynomial::monomial(pos_exp, BigInt::one());
        let mut neg = FPolynomial::monomial(neg_exp, BigInt::one());
        for j in 0..n {
            let bjk = self.b.get(j, k);
            let e = u64::try_from(bjk.magnitude().clone()).map_err(|_| {
                Error::Invalid("exchange-matrix entry exceeds exponent range".into())
            })?;
            if e == 0 {
                continue;
            }
            if bjk.is_positive() {
                pos = pos.mul(&self.f[j].pow(e));
            } else {
                neg = neg.mul(&self.f[j].pow(e));
            }
        }
        Ok(pos.add(&neg))
    }
}

impl std::fmt::Debug for PatternPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PatternPoint(walk={:?}, B={}, C={}, G={})", self.walk.directions(), self.b.matrix(), self.c, self.g)
    }
}

/// Evaluates the pattern along a walk with the definitional mutation rules.
pub fn evaluate_walk(b0: &ExchangeMatrix, walk: &Walk) -> Result<PatternPoint> {
    evaluate_walk_eps(b0, walk, 1)
}

/// Same, but running every step with a fixed ε in the ε-expressions; the
/// result must not depend on the choice.
pub fn evaluate_walk_eps(b0: &ExchangeMatrix, walk: &Walk, eps: i8) -> Result<PatternPoint> {
    let mut p = PatternPoint::initial_point(b0);
    for &k in walk.directions() {
        p = p.step_eps(k, eps)?;
    }
    Ok(p)
}

/// Signed fast mutation: `C' = C (J_k + [ε_k B]_+^{k•})`,
/// `G' = G (J_k + [-ε_k B]_+^{•k})` with `ε_k` the tropical sign at `k`.
pub fn fast_mutate(p: &PatternPoint, k: usize) -> Result<PatternPoint> {
    let n = p.n();
    if k >= n {
        return Err(Error::DirectionOutOfRange { k, n });
    }
    let eps = p.tropical_sign(k)?;
    let jk = IntMatrix::j_k(n, k);
    let sgn = BigInt::from(eps);
    let eps_b = p.b.matrix().scale(&sgn);
    let c_new = p.c.mul(&jk.add(&eps_b.plus_part().row_only(k)));
    let g_new = p.g.mul(&jk.add(&eps_b.neg().plus_part().col_only(k)));
    let f_new = p.mutate_f(k)?;
    Ok(PatternPoint {
        initial: p.initial.clone(),
        walk: p.walk.extended(k),
        b: p.b.mutate(k, eps)?,
        c: c_new,
        g: g_new,
        f: f_new,
    })
}

/// Rebases the same tree vertex to the mutated initial vertex `t_1 = μ_k(t_0)`
/// via the dual mutation formulas
/// `C^{t1}_t = (J_k + [-ε B0]_+^{k•}) C^{t0}_t`,
/// `G^{t1}_t = (J_k + [ε B0]_+^{•k}) G^{t0}_t`,
/// where ε is the common sign of the k-th row of `G^{t0}_t`. F-polynomials
/// are recomputed from the rebased walk; the dual formulas are asserted
/// against the recomputation.
pub fn dual_mutate_initial(p: &PatternPoint, k: usize) -> Result<PatternPoint> {
    let n = p.n();
    if k >= n {
        return Err(Error::DirectionOutOfRange { k, n });
    }
    let row = p.g.row(k);
    let eps = match coherent_sign(&row) {
        Err(()) => return Err(Error::MixedSigns { i: k }),
        Ok(0) => return Err(Error::ZeroColumn { i: k }),
        Ok(s) => s,
    };
    let jk = IntMatrix::j_k(n, k);
    let sgn = BigInt::from(eps);
    let eps_b0 = p.initial.matrix().scale(&sgn);
    let c_new = jk.add(&eps_b0.neg().plus_part().row_only(k)).mul(&p.c);
    let g_new = jk.add(&eps_b0.plus_part().col_only(k)).mul(&p.g);

    let new_initial = p.initial.mutate(k, 1)?;
    let new_walk = p.walk.prepended(k);
    let recomputed = evaluate_walk(&new_initial, &new_walk)?;
    assert_eq!(recomputed.c, c_new, "dual mutation disagrees with direct recomputation (C)");
    assert_eq!(recomputed.g, g_new, "dual mutation disagrees with direct recomputation (G)");
    Ok(recomputed)
}

/// `Ĉ_t = B_{t0} C_t`; asserts the first-duality expression `G_t B_t`.
pub fn hat_c_matrix(p: &PatternPoint) -> IntMatrix {
    let lhs = p.initial.matrix().mul(&p.c);
    let rhs = p.g.mul(p.b_t().matrix());
    assert_eq!(lhs, rhs, "first duality violated: B0*C != G*B");
    lhs
}

/// Bounded memoization of pattern points keyed by reduced walk.
///
/// Lookups reuse the longest cached prefix of the requested walk; inserts
/// evict the least recently used entry once capacity is reached.
pub struct WalkCache {
    b0: ExchangeMatrix,
    capacity: usize,
    inner: Mutex<CacheInner>,
}

struct CacheInner {
    map: HashMap<Vec<usize>, (Arc<PatternPoint>, u64)>,
    tick: u64,
}

impl WalkCache {
    pub fn new(b0: ExchangeMatrix, capacity: usize) -> Self {
        WalkCache {
            b0,
            capacity: capacity.max(1),
            inner: Mutex::new(CacheInner { map: HashMap::new(), tick: 0 }),
        }
    }

    pub fn b0(&self) -> &ExchangeMatrix {
        &self.b0
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, walk: &Walk) -> Result<Arc<PatternPoint>> {
        let dirs = walk.directions().to_vec();
        let mut inner = self.inner.lock().unwrap();
        inner.tick += 1;
        let tick = inner.tick;
        if let Some((p, used)) = inner.map.get_mut(&dirs) {
            *used = tick;
            return Ok(Arc::clone(p));
        }
        // longest cached prefix
        let mut start = PatternPoint::initial_point(&self.b0);
        let mut from = 0;
        for cut in (1..=dirs.len()).rev() {
            if let Some((p, used)) = inner.map.get_mut(&dirs[..cut]) {
                *used = tick;
                start = (**p).clone();
                from = cut;
                break;
            }
        }
        let mut p = start;
        for (idx, &k) in dirs.iter().enumerate().skip(from) {
            p = p.step_eps(k, 1)?;
            let arc = Arc::new(p.clone());
            Self::insert(&mut inner, self.capacity, dirs[..=idx].to_vec(), arc);
        }
        let arc = inner
            .map
            .get(&dirs)
            .map(|(p, _)| Arc::clone(p))
            .unwrap_or_else(|| Arc::new(PatternPoint::initial_point(&self.b0)));
        Ok(arc)
    }

    fn insert(
        inner: &mut CacheInner,
        capacity: usize,
        key: Vec<usize>,
        value: Arc<PatternPoint>,
    ) {
        if inner.map.len() >= capacity && !inner.map.contains_key(&key) {
            if let Some(oldest) = inner
                .map
                .iter()
                .min_by_key(|(_, (_, used))| *used)
                .map(|(k, _)| k.clone())
            {
                inner.map.remove(&oldest);
            }
        }
        inner.tick += 1;
        let tick = inner.tick;
        inner.map.insert(key, (value, tick));
    }
}

/// Breadth-first enumeration of all distinct seeds of a finite-type pattern,
/// keyed by `(B_t, C_t, G_t)`. Errors if more than `max_vertices` distinct
/// seeds appear (the pattern is then not known to be finite).
pub fn enumerate_pattern(
    b0: &ExchangeMatrix,
    max_vertices: usize,
) -> Result<Vec<PatternPoint>> {
    let mut seen: HashMap<(IntMatrix, IntMatrix, IntMatrix), usize> = HashMap::new();
    let mut out: Vec<PatternPoint> = Vec::new();
    let mut frontier = vec![PatternPoint::initial_point(b0)];
    let key = |p: &PatternPoint| (p.b.matrix().clone(), p.c.clone(), p.g.clone());
    seen.insert(key(&frontier[0]), 0);
    out.push(frontier[0].clone());
    while let Some(p) = frontier.pop() {
        for k in 0..b0.n() {
            if p.walk.directions().last() == Some(&k) {
                continue;
            }
            let q = p.step_eps(k, 1)?;
            let kq = key(&q);
            if !seen.contains_key(&kq) {
                if out.len() >= max_vertices {
                    return Err(Error::Invalid(format!(
                        "pattern exceeded {max_vertices} distinct seeds; not finite type?"
                    )));
                }
                seen.insert(kq, out.len());
                out.push(q.clone());
                frontier.push(q);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use rand::Rng;

    fn a2() -> ExchangeMatrix {
        ExchangeMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap()
    }

    fn im(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    #[test]
    fn walk_reduction() {
        let w = Walk::new(vec![0, 1, 1, 0]);
        assert!(w.is_empty());
        assert!(w.was_reduced());
        let w = Walk::new(vec![0, 1, 0, 1, 0]);
        assert_eq!(w.directions(), &[0, 1, 0, 1, 0]);
        assert!(!w.was_reduced());
    }

    #[test]
    fn initial_conditions() {
        let p = evaluate_walk(&a2(), &Walk::empty()).unwrap();
        assert_eq!(p.c_t(), &IntMatrix::identity(2));
        assert_eq!(p.g_t(), &IntMatrix::identity(2));
        assert!(p.f_all().iter().all(|f| f.is_one()));
        assert_eq!(p.tropical_sign(0).unwrap(), 1);
        assert_eq!(p.tropical_sign(1).unwrap(), 1);
    }

    #[test]
    fn a2_g_matrix_sequence() {
        // the six matrices of the A2 pentagon walk
        let expect = [
            im(&[vec![1, 0], vec![0, 1]]),
            im(&[vec![-1, 0], vec![0, 1]]),
            im(&[vec![-1, 0], vec![0, -1]]),
            im(&[vec![1, 0], vec![-1, -1]]),
            im(&[vec![1, 1], vec![-1, 0]]),
            im(&[vec![0, 1], vec![1, 0]]),
        ];
        let dirs = [0usize, 1, 0, 1, 0];
        let mut p = PatternPoint::initial_point(&a2());
        assert_eq!(p.g_t(), &expect[0]);
        for (step, &k) in dirs.iter().enumerate() {
            p = p.step_eps(k, 1).unwrap();
            assert_eq!(p.g_t(), &expect[step + 1], "G mismatch after step {}", step + 1);
        }
    }

    #[test]
    fn a2_first_f_polynomials() {
        let p = evaluate_walk(&a2(), &Walk::new(vec![0])).unwrap();
        let expected = FPolynomial::one(2)
            .add(&FPolynomial::monomial(vec![1, 0], BigInt::one()));
        assert_eq!(p.f(0), &expected); // 1 + y1
        assert!(p.f(1).is_one());
    }

    #[test]
    fn a2_tropical_signs() {
        // after one mutation at k, ε_k flips
        let p = evaluate_walk(&a2(), &Walk::new(vec![0])).unwrap();
        assert_eq!(p.tropical_sign(0).unwrap(), -1);
        assert_eq!(p.tropical_sign(1).unwrap(), 1);
        // A2 walk [1,2] (0-based [0,1]): C = -I, sign of column 2 is -1
        let p = evaluate_walk(&a2(), &Walk::new(vec![0, 1])).unwrap();
        assert_eq!(p.c_t(), &im(&[vec![-1, 0], vec![0, -1]]));
        assert_eq!(p.tropical_sign(1).unwrap(), -1);
    }

    #[test]
    fn fast_mutate_first_step() {
        let p = PatternPoint::initial_point(&a2());
        let q = fast_mutate(&p, 0).unwrap();
        assert_eq!(q.c_t(), &im(&[vec![-1, 0], vec![0, 1]]));
    }

    #[test]
    fn eps_independence_and_fast_agreement() {
        let mut rng = corpus::rng(101);
        for _ in 0..60 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 8, 10, 24);
            let p1 = evaluate_walk_eps(&b0, &walk, 1).unwrap();
            let p2 = evaluate_walk_eps(&b0, &walk, -1).unwrap();
            assert_eq!(p1.c_t(), p2.c_t());
            assert_eq!(p1.g_t(), p2.g_t());
            assert_eq!(p1.b_t().matrix(), p2.b_t().matrix());
            // signed fast mutation agrees step by step
            let mut q = PatternPoint::initial_point(&b0);
            for &k in walk.directions() {
                q = fast_mutate(&q, k).unwrap();
            }
            assert_eq!(q.c_t(), p1.c_t());
            assert_eq!(q.g_t(), p1.g_t());
            assert_eq!(q.f_all(), p1.f_all());
        }
    }

    #[test]
    fn g_vector_mutation_vector_form() {
        // g'_k = -g_k + Σ_j [-ε b_jk]_+ g_j ; g'_i = g_i otherwise
        let mut rng = corpus::rng(103);
        for _ in 0..40 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 8, 10, 24);
            let p = evaluate_walk(&b0, &walk).unwrap();
            let k = rng.gen_range(0..b0.n());
            let q = fast_mutate(&p, k).unwrap();
            let eps = BigInt::from(p.tropical_sign(k).unwrap());
            let n = b0.n();
            let mut gk: Vec<BigInt> = p.g_vector(k).iter().map(|x| -x).collect();
            for j in 0..n {
                let coef = -(&eps) * p.b_t().get(j, k);
                if coef.is_positive() {
                    for (a, b) in gk.iter_mut().zip(p.g_vector(j)) {
                        *a += &coef * b;
                    }
                }
            }
            assert_eq!(q.g_vector(k), gk);
            for i in 0..n {
                if i != k {
                    assert_eq!(q.g_vector(i), p.g_vector(i));
                }
            }
        }
    }

    #[test]
    fn dualities_on_random_corpus() {
        let mut rng = corpus::rng(105);
        for _ in 0..60 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 8, 10, 24);
            let p = evaluate_walk(&b0, &walk).unwrap();
            let n = b0.n();
            // first duality G B = B0 C
            assert_eq!(p.g_t().mul(p.b_t().matrix()), b0.matrix().mul(p.c_t()));
            // second duality D^-1 G^T D C = I, checked as d_j g_ij c'... via pairing:
            // (g_i, d_j c_j)_D = δ_ij
            let d = b0.skew();
            for i in 0..n {
                for j in 0..n {
                    let gi = p.g_vector(i);
                    let cj: Vec<BigInt> =
                        p.c_vector(j).iter().map(|x| x * d.d_i(j)).collect();
                    let v = d.pairing(&gi, &cj);
                    let expect = if i == j { BigRational::one() } else { BigRational::zero() };
                    assert_eq!(v, expect);
                }
            }
            // unimodularity
            let dc = p.c_t().det();
            let dg = p.g_t().det();
            assert!(dc.magnitude().is_one());
            assert_eq!(dc, dg);
            // C^T (D B0) C = D B_t as rational identity: scale by lcm-free route:
            // d_i^-1 entries; verify entrywise with rationals
            for i in 0..n {
                for j in 0..n {
                    let mut acc = BigRational::zero();
                    for a in 0..n {
                        for b in 0..n {
                            acc += BigRational::new(
                                p.c_t().get(a, i) * b0.get(a, b) * p.c_t().get(b, j),
                                d.d_i(a).clone(),
                            );
                        }
                    }
                    let expect = BigRational::new(p.b_t().get(i, j).clone(), d.d_i(i).clone());
                    assert_eq!(acc, expect, "cbc identity failed at ({i},{j})");
                }
            }
            // sign-coherence for C columns and G rows
            for i in 0..n {
                p.tropical_sign(i).unwrap();
                coherent_sign(&p.g_t().row(i)).unwrap();
            }
            // F properties: constant term 1, nonnegative coefficients
            for i in 0..n {
                assert!(p.f(i).constant_term().is_one());
                assert!(p.f(i).has_nonnegative_coeffs());
            }
        }
    }

    #[test]
    fn involution_extension() {
        let mut rng = corpus::rng(107);
        for _ in 0..20 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 6, 10, 24);
            let k = rng.gen_range(0..b0.n());
            let mut dirs = walk.directions().to_vec();
            dirs.push(k);
            dirs.push(k);
            let p1 = evaluate_walk(&b0, &walk).unwrap();
            let p2 = evaluate_walk(&b0, &Walk::new(dirs)).unwrap();
            assert_eq!(p1, p2);
        }
    }

    #[test]
    fn hat_c_and_orthogonality() {
        let mut rng = corpus::rng(109);
        for _ in 0..40 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 8, 10, 24);
            let p = evaluate_walk(&b0, &walk).unwrap();
            let hc = hat_c_matrix(&p);
            assert_eq!(hc, b0.matrix().mul(p.c_t()));
            // (ĉ_i, c_i)_D = 0
            for i in 0..b0.n() {
                let v = b0.skew().pairing(&p.hat_c_vector(i), &p.c_vector(i));
                assert!(num_traits::Zero::is_zero(&v));
            }
        }
    }

    #[test]
    fn hat_c_mutation_formulas() {
        // (cmut12): Ĉ_{t'} = Ĉ_t (J_k + [ε_{•k}(C) B_t]_+^{k•})
        // (gmut12): Ĉ^{t1}_t = (J_k + [ε_{k•}(G) B0]_+^{•k}) Ĉ^{t0}_t
        let mut rng = corpus::rng(111);
        for _ in 0..30 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 7, 10, 24);
            let p = evaluate_walk(&b0, &walk).unwrap();
            let n = b0.n();
            let k = rng.gen_range(0..n);
            let hc = b0.matrix().mul(p.c_t());
            // forward step
            let q = p.step_eps(k, 1).unwrap();
            let eps = BigInt::from(p.tropical_sign(k).unwrap());
            let jk = IntMatrix::j_k(n, k);
            let m = jk.add(&p.b_t().matrix().scale(&eps).plus_part().row_only(k));
            assert_eq!(b0.matrix().mul(q.c_t()), hc.mul(&m));
            // initial-vertex step
            let eps_row = BigInt::from(coherent_sign(&p.g_t().row(k)).unwrap());
            let m2 = jk.add(&b0.matrix().scale(&eps_row).plus_part().col_only(k));
            let rebased = dual_mutate_initial(&p, k).unwrap();
            let hc_rebased = rebased.initial().matrix().mul(rebased.c_t());
            assert_eq!(hc_rebased, m2.mul(&hc));
        }
    }

    #[test]
    fn dual_mutation_third_duality() {
        // C_t^{t0} = (G̃_{t0}^{t})^T with the tilde pattern built from B^T
        let mut rng = corpus::rng(113);
        for _ in 0..30 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 6, 10, 24);
            let p = evaluate_walk(&b0, &walk).unwrap();
            // transpose pattern: walk reversed, initial matrix B_t^T
            let bt_t = ExchangeMatrix::with_skew(
                p.b_t().matrix().transpose(),
                transpose_skew(&b0),
            )
            .unwrap();
            let rev = Walk::new(walk.directions().iter().rev().cloned().collect());
            let tilde = evaluate_walk(&bt_t, &rev).unwrap();
            assert_eq!(p.c_t(), &tilde.g_t().transpose());
            assert_eq!(p.g_t(), &tilde.c_t().transpose());
        }
    }

    fn transpose_skew(b0: &ExchangeMatrix) -> crate::matrix::SkewSymmetrizer {
        // if diag(1/d_i) B is skew then B^T has skew-symmetrizer with inverse
        // ratios; recompute from scratch for robustness
        crate::matrix::find_skew_symmetrizer(&b0.matrix().transpose())
            .expect("transpose is skew-symmetrizable")
    }

    #[test]
    fn dual_rebase_roundtrip() {
        let mut rng = corpus::rng(115);
        for _ in 0..20 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 6, 10, 24);
            let p = evaluate_walk(&b0, &walk).unwrap();
            let k = rng.gen_range(0..b0.n());
            let q = dual_mutate_initial(&p, k).unwrap();
            let back = dual_mutate_initial(&q, k).unwrap();
            assert_eq!(back.c_t(), p.c_t());
            assert_eq!(back.g_t(), p.g_t());
            assert_eq!(back.initial().matrix(), p.initial().matrix());
        }
    }

    #[test]
    fn dual_rebase_a2_base_case() {
        // C^{t1}_{t0} = J_1 + [-B0]_+^{1•}
        let p = PatternPoint::initial_point(&a2());
        let q = dual_mutate_initial(&p, 0).unwrap();
        let expect = IntMatrix::j_k(2, 0)
            .add(&a2().matrix().neg().plus_part().row_only(0));
        assert_eq!(q.c_t(), &expect);
    }

    #[test]
    fn principal_extension_block_stability() {
        let mut rng = corpus::rng(117);
        for _ in 0..15 {
            let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 6, 10, 24);
            let n = b0.n();
            let ext = b0.principal_extension();
            let p = evaluate_walk(&b0, &walk).unwrap();
            let q = evaluate_walk(&ext, &walk).unwrap();
            // C̄ = [[C,0],[0,I]], Ḡ = [[G,0],[0,I]], F̄ restricts
            for i in 0..2 * n {
                for j in 0..2 * n {
                    let expect_c = if i < n && j < n {
                        p.c_t().get(i, j).clone()
                    } else if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    };
                    let expect_g = if i < n && j < n {
                        p.g_t().get(i, j).clone()
                    } else if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    };
                    assert_eq!(q.c_t().get(i, j), &expect_c);
                    assert_eq!(q.g_t().get(i, j), &expect_g);
                }
            }
            for i in 0..n {
                // F̄_i(y_1..y_n, 0-extended) equals F_i
                for (e, c) in q.f(i).terms() {
                    assert!(e[n..].iter().all(|&x| x == 0));
                    assert_eq!(p.f(i).terms().find(|(pe, _)| pe[..] == e[..n]).map(|t| t.1), Some(c));
                }
                assert_eq!(p.f(i).num_terms(), q.f(i).num_terms());
            }
            for i in n..2 * n {
                assert!(q.f(i).is_one());
            }
        }
    }

    #[test]
    fn walk_cache_reuses_prefixes() {
        let cache = WalkCache::new(a2(), 64);
        let w = Walk::new(vec![0, 1, 0, 1, 0]);
        let p = cache.point(&w).unwrap();
        let direct = evaluate_walk(&a2(), &w).unwrap();
        assert_eq!(&*p, &direct);
        assert!(cache.len() >= 5);
        let p2 = cache.point(&w).unwrap();
        assert!(Arc::ptr_eq(&p, &p2));
        // bounded capacity evicts
        let small = WalkCache::new(a2(), 2);
        for len in 1..=5 {
            let w = Walk::new((0..len).map(|i| i % 2).collect());
            small.point(&w).unwrap();
        }
        assert!(small.len() <= 2);
    }

    #[test]
    fn enumerate_a2_finite() {
        // A2 cluster pattern: rank-2 pentagon gives 10 labeled seeds
        let pts = enumerate_pattern(&a2(), 100).unwrap();
        assert_eq!(pts.len(), 10);
    }
}
