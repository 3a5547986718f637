//! Broken-line enumeration and theta functions on rank-2 consistent
//! scattering diagrams.
//!
//! A broken line for `m0` with endpoint `Q` comes in from infinity with
//! velocity `-m0`, bends at walls by picking a term of the wall-crossing
//! image of its current monomial, and ends at `Q`. The theta function is the
//! sum of the final monomials over all broken lines, truncated by ŷ-degree.
//!
//! Enumeration runs backward from `Q`: candidate final exponents are the
//! lattice points within the degree budget, and each backward step removes
//! a bend. Termination is guaranteed because every bend strictly increases
//! the degree in the forward direction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scattering::{
    degree, n_prime, p_star, pairing_int, ScatteringDiagram, Support, TruncatedSeries, Vec2,
    Wall,
};
use crate::{Error, Result};

/// One straight segment of a broken line, carrying its monomial.
#[derive(Clone, Debug)]
pub struct Segment {
    /// Coefficient of the attached monomial.
    pub coeff: BigInt,
    /// x-exponent of the attached monomial; the velocity is its negative.
    pub exponent: Vec2,
}

/// A bend: which wall, which term of the crossing image, and where.
#[derive(Clone, Debug)]
pub struct Bend {
    pub wall_index: usize,
    /// multiple of the wall direction picked at the bend
    pub step: u32,
    pub point: Vec<BigRational>,
}

/// A broken line for `m0` with endpoint `Q`, in forward order (from infinity
/// to `Q`). `segments.len() == bends.len() + 1`.
#[derive(Clone, Debug)]
pub struct BrokenLine {
    pub segments: Vec<Segment>,
    pub bends: Vec<Bend>,
    pub endpoint: Vec<BigRational>,
}

impl BrokenLine {
    /// The final monomial `Mono(γ)`.
    pub fn mono(&self) -> &Segment {
        self.segments.last().expect("nonempty segments")
    }
}

/// The result of a theta-function computation: the truncated series together
/// with the contributing broken lines.
#[derive(Clone, Debug)]
pub struct ThetaResult {
    pub series: TruncatedSeries,
    pub lines: Vec<BrokenLine>,
}

fn rat(x: i64) -> BigRational {
    BigRational::from(BigInt::from(x))
}

fn pair_rat(d: &crate::matrix::SkewSymmetrizer, n: &[i64], q: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for i in 0..n.len() {
        acc += rat(n[i]) * &q[i] / BigRational::from(d.d_i(i).clone());
    }
    acc
}

/// Whether a point lies on the support of a wall.
fn on_support(d: &ScatteringDiagram, w: &Wall, q: &[BigRational]) -> bool {
    let skew = d.b0().skew();
    if !pair_rat(skew, w.function.dir(), q).is_zero() {
        return false;
    }
    match &w.support {
        Support::Hyperplane(_) => true,
        Support::Cone(gens) => {
            let r = &gens[0];
            let s = if r[0] != 0 { &q[0] / rat(r[0]) } else { &q[1] / rat(r[1]) };
            (0..2).all(|i| q[i].clone() == &s * rat(r[i])) && !s.is_negative()
        }
    }
}

/// Coefficient of `z^step` in `f^e` for a univariate truncated wall function.
fn power_coefficient(w: &Wall, e: i64, step: u32, max_step: u32) -> BigInt {
    let mut series = vec![BigInt::zero(); max_step as usize + 1];
    series[0] = BigInt::one();
    let mut base = vec![BigInt::zero(); max_step as usize + 1];
    base[0] = BigInt::one();
    for (k, c) in w.function.coeffs() {
        if *k <= max_step {
            base[*k as usize] = c.clone();
        }
    }
    assert!(e >= 0, "broken-line multipliers never divide");
    let mul = |a: &[BigInt], b: &[BigInt]| {
        let mut out = vec![BigInt::zero(); max_step as usize + 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if i + j <= max_step as usize && !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        out
    };
    let mut e = e as u64;
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            series = mul(&series, &sq);
        }
        e >>= 1;
        if e > 0 {
            sq = mul(&sq, &sq);
        }
    }
    series[step as usize].clone()
}

struct Enumerator<'a> {
    d: &'a ScatteringDiagram,
    m0: Vec2,
    ell: i64,
    lines: Vec<BrokenLine>,
}

impl<'a> Enumerator<'a> {
    /// Backward search: at `point`, the forward line arrives with exponent
    /// `m0 + B n`. Either `n = 0` (the line goes straight to infinity) or
    /// some earlier bend produced it.
    fn search(
        &mut self,
        point: &[BigRational],
        nvec: &Vec2,
        trail: &mut Vec<(usize, u32, Vec<BigRational>)>,
    ) -> Result<()> {
        if nvec.iter().all(|&x| x == 0) {
            self.record(point, trail)?;
            // a straight line to infinity never bends again (degree 0)
            return Ok(());
        }
        let pn = p_star(self.d.b0(), nvec)?;
        let m: Vec2 = self.m0.iter().zip(&pn).map(|(a, b)| a + b).collect();
        if m.iter().all(|&x| x == 0) {
            // zero velocity cannot move; no line
            return Ok(());
        }
        let skew = self.d.b0().skew();
        // backward ray point + τ m, τ > 0
        for (w_idx, w) in self.d.walls().iter().enumerate() {
            let n0 = w.function.dir();
            let a = pair_rat(skew, n0, point);
            let b = pair_rat(skew, n0, &m.iter().map(|&x| rat(x)).collect::<Vec<_>>());
            if b.is_zero() {
                if a.is_zero() {
                    // segment runs inside the wall line: non-generic
                    if on_support(self.d, w, point) {
                        return Err(Error::NonGenericPoint(
                            "segment runs inside a wall".into(),
                        ));
                    }
                }
                continue;
            }
            let tau = -&a / &b;
            if !tau.is_positive() {
                continue;
            }
            let x: Vec<BigRational> =
                point.iter().zip(&m).map(|(p, &mi)| p + rat(mi) * &tau).collect();
            if x.iter().all(|v| v.is_zero()) {
                return Err(Error::NonGenericPoint(
                    "backward ray passes through the origin".into(),
                ));
            }
            // bend point must lie in the wall support (strictly inside for rays)
            let inside = match &w.support {
                Support::Hyperplane(_) => true,
                Support::Cone(gens) => {
                    let r = &gens[0];
                    let s = if r[0] != 0 { &x[0] / rat(r[0]) } else { &x[1] / rat(r[1]) };
                    (0..2).all(|i| x[i].clone() == &s * rat(r[i])) && s.is_positive()
                }
            };
            if !inside {
                continue;
            }
            // enumerate bend choices: previous exponent n' = n - step·dir
            let dstep = degree(n0);
            let max_step = if dstep > 0 { (self.ell / dstep) as u32 } else { 0 };
            for step in 1..=max_step {
                let prev: Vec2 = nvec
                    .iter()
                    .zip(n0)
                    .map(|(&x, &d0)| x - i64::from(step) * d0)
                    .collect();
                if prev.iter().any(|&x| x < 0) {
                    continue;
                }
                // the forward multiplier never divides: e = |<n', m_prev>|
                let p_prev = p_star(self.d.b0(), &prev)?;
                let m_prev: Vec2 =
                    self.m0.iter().zip(&p_prev).map(|(a, b)| a + b).collect();
                let npr = n_prime(skew, n0);
                let e = pairing_int(skew, &npr, &m_prev).abs();
                if e == 0 {
                    continue;
                }
                let beta = power_coefficient(w, e, step, max_step);
                if beta.is_zero() {
                    continue;
                }
                trail.push((w_idx, step, x.clone()));
                self.search(&x, &prev, trail)?;
                trail.pop();
            }
        }
        Ok(())
    }

    /// Builds the forward line from the backward trail and stores it.
    fn record(
        &mut self,
        _start: &[BigRational],
        trail: &[(usize, u32, Vec<BigRational>)],
    ) -> Result<()> {
        let skew = self.d.b0().skew();
        let mut coeff = BigInt::one();
        let mut nvec = vec![0i64; 2];
        let mut segments = vec![Segment { coeff: coeff.clone(), exponent: self.m0.clone() }];
        let mut bends = Vec::new();
        // trail is recorded backward from Q; forward order is reversed
        for (w_idx, step, x) in trail.iter().rev() {
            let w = &self.d.walls()[*w_idx];
            let n0 = w.function.dir();
            let pn = p_star(self.d.b0(), &nvec)?;
            let m_prev: Vec2 = self.m0.iter().zip(&pn).map(|(a, b)| a + b).collect();
            let npr = n_prime(skew, n0);
            let e = pairing_int(skew, &npr, &m_prev).abs();
            let dstep = degree(n0);
            let max_step = if dstep > 0 { (self.ell / dstep) as u32 } else { 0 };
            let beta = power_coefficient(w, e, *step, max_step);
            assert!(!beta.is_zero());
            assert!(
                !beta.is_negative(),
                "negative bend multiplier despite positive wall functions"
            );
            coeff *= beta;
            for (nv, d0) in nvec.iter_mut().zip(n0) {
                *nv += i64::from(*step) * d0;
            }
            let p_now = p_star(self.d.b0(), &nvec)?;
            let m_now: Vec2 = self.m0.iter().zip(&p_now).map(|(a, b)| a + b).collect();
            segments.push(Segment { coeff: coeff.clone(), exponent: m_now });
            bends.push(Bend { wall_index: *w_idx, step: *step, point: x.clone() });
        }
        self.lines.push(BrokenLine {
            segments,
            bends,
            endpoint: Vec::new(), // filled by the caller
        });
        Ok(())
    }
}

/// Exhaustively enumerates the broken lines for `m0` with endpoint `q` whose
/// final monomial stays within the ŷ-degree budget.
pub fn enumerate_broken_lines(
    d: &ScatteringDiagram,
    m0: &[i64],
    q: &[BigRational],
    ell: i64,
) -> Result<Vec<BrokenLine>> {
    if d.b0().n() != 2 {
        return Err(Error::RankUnsupported { n: d.b0().n(), limit: 2 });
    }
    if m0.iter().all(|&x| x == 0) {
        return Err(Error::Invalid("m0 must be nonzero".into()));
    }
    for w in d.walls() {
        if on_support(d, w, q) {
            return Err(Error::NonGenericPoint("endpoint lies on the support".into()));
        }
    }
    let mut en = Enumerator { d, m0: m0.to_vec(), ell, lines: Vec::new() };
    // candidate final offsets: all n >= 0 with d(n) <= ell
    let mut trail = Vec::new();
    for a in 0..=ell {
        for b in 0..=(ell - a) {
            let nvec = vec![a, b];
            en.search(q, &nvec, &mut trail)?;
            assert!(trail.is_empty());
        }
    }
    let mut lines = en.lines;
    for line in &mut lines {
        line.endpoint = q.to_vec();
    }
    // canonical deterministic order
    lines.sort_by(|a, b| {
        let ka = (a.mono().exponent.clone(), a.bends.len(), encode(a));
        let kb = (b.mono().exponent.clone(), b.bends.len(), encode(b));
        ka.cmp(&kb)
    });
    Ok(lines)
}

fn encode(l: &BrokenLine) -> Vec<(usize, u32)> {
    l.bends.iter().map(|b| (b.wall_index, b.step)).collect()
}

/// The theta function `θ_{Q,m0}` as a truncated series, by summing broken
/// lines. `m0 = 0` is defined as `θ = 1`. On non-generic endpoints the
/// computation retries with a deterministic small rational perturbation, up
/// to three times.
pub fn theta(
    d: &ScatteringDiagram,
    m0: &[i64],
    q: &[BigRational],
    ell: i64,
) -> Result<ThetaResult> {
    if m0.iter().all(|&x| x == 0) {
        return Ok(ThetaResult {
            series: TruncatedSeries::monomial(vec![0; m0.len()], ell),
            lines: Vec::new(),
        });
    }
    let mut q = q.to_vec();
    let mut last_err = None;
    for attempt in 0..=3 {
        if attempt > 0 {
            // deterministic perturbation, distinct primes per coordinate
            let delta0 = BigRational::new(BigInt::from(attempt), BigInt::from(99991));
            let delta1 = BigRational::new(BigInt::from(attempt), BigInt::from(1299709));
            q = vec![&q[0] + delta0, &q[1] + delta1];
        }
        match enumerate_broken_lines(d, m0, &q, ell) {
            Ok(lines) => {
                // start from the empty series over x^{m0}; every line
                // (including the straight one) contributes its monomial
                let mut acc = TruncatedSeries::monomial(m0.to_vec(), ell);
                acc.add_term(vec![0i64; m0.len()], -BigInt::one());
                for line in &lines {
                    let mono = line.mono();
                    let nvec = solve_offset(d.b0(), m0, &mono.exponent)?;
                    acc.add_term(nvec, mono.coeff.clone());
                }
                return Ok(ThetaResult { series: acc, lines });
            }
            Err(Error::NonGenericPoint(msg)) => {
                last_err = Some(Error::NonGenericPoint(msg));
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NonGenericPoint("perturbation exhausted".into())))
}

fn solve_offset(b0: &crate::matrix::ExchangeMatrix, m0: &[i64], m: &[i64]) -> Result<Vec2> {
    use num_integer::Integer;
    let det = b0.det();
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let adj = b0.matrix().adjugate();
    let diff: Vec<BigInt> = m.iter().zip(m0).map(|(a, b)| BigInt::from(a - b)).collect();
    let num = adj.mul_vec(&diff);
    let mut out = Vec::new();
    for x in num {
        let (q, r) = x.div_rem(&det);
        if !r.is_zero() {
            return Err(Error::Invalid("final monomial off the p* lattice".into()));
        }
        out.push(i64::try_from(q).map_err(|_| Error::Invalid("exponent overflow".into()))?);
    }
    if out.iter().any(|&x| x < 0) {
        return Err(Error::Invalid("final monomial below the base".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ExchangeMatrix;
    use crate::pattern::{enumerate_pattern, evaluate_walk, Walk};
    use crate::scattering::{
        apply_crossings, complete_rank2, path_ordered_product, segment_crossings,
    };

    fn exch(rows: &[Vec<i64>]) -> ExchangeMatrix {
        ExchangeMatrix::from_rows(rows).unwrap()
    }

    fn a2() -> ExchangeMatrix {
        exch(&[vec![0, -1], vec![1, 0]])
    }

    fn point(x: (i64, i64), y: (i64, i64)) -> Vec<BigRational> {
        vec![
            BigRational::new(BigInt::from(x.0), BigInt::from(x.1)),
            BigRational::new(BigInt::from(y.0), BigInt::from(y.1)),
        ]
    }

    #[test]
    fn chamber_monomial_single_line() {
        // Q and m0 in the same G-cone: a single unbent line, θ = x^{m0}
        let d = complete_rank2(&a2(), 8).unwrap();
        let q = point((5, 3), (2, 7));
        for m0 in [[2i64, 1], [1, 0], [3, 5]] {
            let r = theta(&d, &m0, &q, 8).unwrap();
            assert_eq!(r.lines.len(), 1);
            assert!(r.lines[0].bends.is_empty());
            assert!(r.series.is_bare_monomial());
            assert_eq!(r.series.base(), &m0);
        }
    }

    #[test]
    fn theta_zero_is_one() {
        let d = complete_rank2(&a2(), 8).unwrap();
        let q = point((5, 3), (2, 7));
        let r = theta(&d, &[0, 0], &q, 8).unwrap();
        assert!(r.series.is_bare_monomial());
        assert!(r.lines.is_empty());
    }

    #[test]
    fn a2_theta_in_initial_chamber_matches_f() {
        // m0 = g_{1;t3} = (1,-1): θ = x^{(1,-1)}(1 + ŷ2), two broken lines
        let d = complete_rank2(&a2(), 8).unwrap();
        let q = point((5, 3), (2, 7));
        let r = theta(&d, &[1, -1], &q, 8).unwrap();
        assert_eq!(r.lines.len(), 2);
        assert_eq!(r.series.coefficient(&[0, 0]), BigInt::one());
        assert_eq!(r.series.coefficient(&[0, 1]), BigInt::one());
        assert_eq!(r.series.terms().len(), 2);
    }

    #[test]
    fn transport_along_admissible_segment() {
        // θ_{Q',m0} = p_{γ,D}(θ_{Q,m0}) for γ from Q to Q'
        let cases = [
            (exch(&[vec![0, -1], vec![1, 0]]), vec![[1i64, -1], [2, -1], [0, 1]]),
            (exch(&[vec![0, -1], vec![2, 0]]), vec![[1, -1], [1, -2]]),
            (exch(&[vec![0, -2], vec![2, 0]]), vec![[1, -1], [2, -1]]),
        ];
        for (b, m0s) in cases {
            let d = complete_rank2(&b, 8).unwrap();
            let q = point((5, 3), (2, 7));
            let q2 = point((-7, 2), (-4, 5));
            let crossings = segment_crossings(&d, &q, &q2).unwrap();
            assert!(!crossings.is_empty());
            for m0 in &m0s {
                let from = theta(&d, m0, &q, 8).unwrap();
                let to = theta(&d, m0, &q2, 8).unwrap();
                let transported =
                    path_ordered_product(&d, &crossings, &from.series).unwrap();
                assert_eq!(transported, to.series, "transport failed for m0={m0:?}");
            }
        }
    }

    #[test]
    fn positivity_across_catalog_diagrams() {
        let qs = [point((5, 3), (2, 7)), point((-7, 2), (3, 5)), point((1, 3), (-9, 4))];
        for rows in [
            vec![vec![0, -1], vec![1, 0]],
            vec![vec![0, -1], vec![2, 0]],
            vec![vec![0, -1], vec![3, 0]],
            vec![vec![0, -2], vec![2, 0]],
        ] {
            let b = exch(&rows);
            let d = complete_rank2(&b, 8).unwrap();
            for q in &qs {
                for m0 in [[1i64, -1], [-1, 2], [2, 1], [-1, -1], [0, 1]] {
                    let r = theta(&d, &m0, q, 8).unwrap();
                    assert!(
                        r.series.has_nonnegative_coeffs(),
                        "negative theta coefficient for {rows:?}, m0={m0:?}"
                    );
                    for line in &r.lines {
                        assert!(!line.mono().coeff.is_negative());
                    }
                }
            }
        }
    }

    #[test]
    fn cluster_identity_on_finite_types() {
        // θ_{Q, g_{i;t}} = x^{g} F_{i;t}(ŷ) truncated, Q in the initial chamber
        let ell = 8;
        let q = point((5, 3), (2, 7));
        for rows in [
            vec![vec![0, -1], vec![1, 0]],
            vec![vec![0, -1], vec![2, 0]],
            vec![vec![0, -1], vec![3, 0]],
        ] {
            let b = exch(&rows);
            let d = complete_rank2(&b, ell).unwrap();
            let pts = enumerate_pattern(&b, 200).unwrap();
            for p in &pts {
                for i in 0..2 {
                    let g: Vec<i64> = p
                        .g_vector(i)
                        .iter()
                        .map(|x| i64::try_from(x.clone()).unwrap())
                        .collect();
                    let r = theta(&d, &g, &q, ell).unwrap();
                    // expected series: F-polynomial coefficients keyed by
                    // their y-exponents (ŷ^e against the base x^g)
                    for (e, c) in p.f(i).terms() {
                        if degree(e) <= ell {
                            assert_eq!(
                                &r.series.coefficient(e),
                                c,
                                "θ mismatch for {rows:?} vertex {:?} i={i}",
                                p.walk().directions()
                            );
                        }
                    }
                    let expected: usize =
                        p.f(i).terms().filter(|(e, _)| degree(e) <= ell).count();
                    assert_eq!(r.series.terms().len(), expected);
                }
            }
        }
    }

    #[test]
    fn theta_transport_equals_walk_product() {
        // moving θ from the initial chamber along γ_t^{t0} reproduces the
        // path-ordered product route
        let b = a2();
        let d = complete_rank2(&b, 8).unwrap();
        let walk = Walk::new(vec![0, 1]);
        let p = evaluate_walk(&b, &walk).unwrap();
        let crossings = crate::scattering::walk_crossings(&b, &walk).unwrap();
        let q = point((5, 3), (2, 7));
        for i in 0..2 {
            let g: Vec<i64> =
                p.g_vector(i).iter().map(|x| i64::try_from(x.clone()).unwrap()).collect();
            let th = theta(&d, &g, &q, 8).unwrap();
            let s = TruncatedSeries::monomial(g, 8);
            let transported = apply_crossings(&b, &crossings, &s).unwrap();
            assert_eq!(th.series, transported);
        }
    }

    #[test]
    fn non_generic_endpoint_rejected_then_perturbed() {
        let d = complete_rank2(&a2(), 8).unwrap();
        // exactly on the wall e_1^⊥ (the x2-axis)
        let q = point((0, 1), (3, 1));
        assert!(matches!(
            enumerate_broken_lines(&d, &[1, 0], &q, 8),
            Err(Error::NonGenericPoint(_))
        ));
        // theta retries with a perturbation and succeeds
        let r = theta(&d, &[2, 1], &q, 8).unwrap();
        assert!(r.series.has_nonnegative_coeffs());
    }
}
