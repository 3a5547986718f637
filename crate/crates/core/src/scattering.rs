//! Walls, wall-crossing automorphisms, path-ordered products, the cluster
//! diagram, rank-2 consistent completion, and diagram mutation.
//!
//! Series bookkeeping lives in the N-lattice: an element `x^m0 · Σ c_n x^{p*(n)}`
//! is stored as its base exponent `m0` together with a map from `n ≥ 0`
//! (componentwise) to coefficients, graded by `d(n) = Σ n_i` and truncated
//! at a fixed degree. Wall crossings act per term by
//! `x^m -> x^m f^{ε <n', m>}` with `<n, m> = (n, m)_D` and `n'` the least
//! multiple of the primitive normal lying in N°.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::fan::in_unimodular_face;
use crate::matrix::{ExchangeMatrix, IntMatrix, SkewSymmetrizer};
use crate::{Error, Result};

pub type Vec2 = Vec<i64>;

fn to_i64(v: &[BigInt]) -> Result<Vec2> {
    v.iter()
        .map(|x| i64::try_from(x.clone()).map_err(|_| Error::Invalid("exponent overflow".into())))
        .collect()
}

fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn primitive_i64(v: &[i64]) -> Vec2 {
    let mut g: i64 = 0;
    for &x in v {
        g = g.gcd(&x);
    }
    if g <= 1 {
        return v.to_vec();
    }
    v.iter().map(|x| x / g).collect()
}

fn content_i64(v: &[i64]) -> i64 {
    let mut g: i64 = 0;
    for &x in v {
        g = g.gcd(&x);
    }
    g
}

/// `p*(n) = B n`, the matrix representation of the form-induced map.
pub fn p_star(b0: &ExchangeMatrix, n: &[i64]) -> Result<Vec2> {
    let nb = to_big(n);
    to_i64(&b0.matrix().mul_vec(&nb))
}

/// The ŷ-degree grading `d(n) = Σ a_i`.
pub fn degree(n: &[i64]) -> i64 {
    n.iter().sum()
}

/// Least positive multiple of the primitive `n0` lying in `N° = {v : d_i | v_i}`.
pub fn n_prime(skew: &SkewSymmetrizer, n0: &[i64]) -> Vec2 {
    let mut c = BigInt::one();
    for (i, &x) in n0.iter().enumerate() {
        if x != 0 {
            let di = skew.d_i(i);
            let g = di.gcd(&BigInt::from(x));
            let need = di / g;
            c = c.lcm(&need);
        }
    }
    let c = i64::try_from(c).expect("n' multiplier overflow");
    n0.iter().map(|&x| c * x).collect()
}

/// Integer pairing `<n, m> = Σ n_i m_i / d_i`; panics unless integral
/// (guaranteed for `n ∈ N°`).
pub fn pairing_int(skew: &SkewSymmetrizer, n: &[i64], m: &[i64]) -> i64 {
    let mut acc = BigRational::zero();
    for i in 0..n.len() {
        acc += BigRational::new(BigInt::from(n[i]) * BigInt::from(m[i]), skew.d_i(i).clone());
    }
    assert!(acc.is_integer(), "pairing expected to be integral");
    i64::try_from(acc.to_integer()).expect("pairing overflow")
}

/// Truncated one-direction power series: `f = 1 + Σ_k c_k x^{k p*(dir)}`
/// against the primitive normal element `dir ∈ N+`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WallFunction {
    dir: Vec2,
    coeffs: BTreeMap<u32, BigInt>,
}

impl WallFunction {
    pub fn new(dir: Vec2, coeffs: BTreeMap<u32, BigInt>) -> Self {
        assert!(dir.iter().all(|&x| x >= 0) && dir.iter().any(|&x| x > 0), "dir must lie in N+");
        assert_eq!(content_i64(&dir), 1, "dir must be primitive");
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        WallFunction { dir, coeffs }
    }

    /// `1 + ŷ^{dir}` (single coefficient 1 at the first multiple).
    pub fn one_plus(dir: Vec2) -> Self {
        Self::new(dir, BTreeMap::from([(1, BigInt::one())]))
    }

    pub fn dir(&self) -> &[i64] {
        &self.dir
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, BigInt> {
        &self.coeffs
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Drops coefficients beyond the truncation degree.
    pub fn truncated(&self, ell: i64) -> Self {
        let d = degree(&self.dir);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| i64::from(**k) * d <= ell)
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        WallFunction { dir: self.dir.clone(), coeffs }
    }

    /// Multiplies two functions on the same primitive direction, truncated.
    pub fn mul(&self, other: &Self, ell: i64) -> Self {
        assert_eq!(self.dir, other.dir);
        let d = degree(&self.dir);
        let max_k = if d > 0 { (ell / d) as u32 } else { 0 };
        let mut coeffs: BTreeMap<u32, BigInt> = BTreeMap::new();
        {
            let mut put = |k: u32, v: BigInt| {
                if k >= 1 && k <= max_k && !v.is_zero() {
                    let e = coeffs.entry(k).or_insert_with(BigInt::zero);
                    *e += v;
                    if e.is_zero() {
                        coeffs.remove(&k);
                    }
                }
            };
            for (k, c) in &self.coeffs {
                put(*k, c.clone());
            }
            for (k, c) in &other.coeffs {
                put(*k, c.clone());
            }
            for (k1, c1) in &self.coeffs {
                for (k2, c2) in &other.coeffs {
                    put(k1 + k2, c1 * c2);
                }
            }
        }
        WallFunction { dir: self.dir.clone(), coeffs }
    }
}

impl std::fmt::Display for WallFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "1")?;
        for (k, c) in &self.coeffs {
            write!(f, " + ")?;
            if !c.is_one() {
                write!(f, "{}*", c)?;
            }
            write!(f, "yhat^(")?;
            for (j, x) in self.dir.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", x * i64::from(*k))?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl std::fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "x^(")?;
        for (j, x) in self.base.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x)?;
        }
        write!(f, ") * (")?;
        let mut first = true;
        for (n, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let is_const = n.iter().all(|&x| x == 0);
            if is_const {
                write!(f, "{}", c)?;
            } else {
                if !c.is_one() {
                    write!(f, "{}*", c)?;
                }
                write!(f, "yhat^(")?;
                for (j, x) in n.iter().enumerate() {
                    if j > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", x)?;
                }
                write!(f, ")")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

/// The support of a wall.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Support {
    /// The full hyperplane `n0^⊥` (D-orthogonal).
    Hyperplane(Vec2),
    /// A cone given by integer generators (a single ray in rank 2).
    Cone(Vec<Vec2>),
}

impl Support {
    pub fn canonical_key(&self) -> Vec<Vec2> {
        match self {
            Support::Hyperplane(n) => {
                vec![vec![i64::MIN], primitive_i64(n)]
            }
            Support::Cone(gens) => {
                let mut k: Vec<Vec2> = gens.iter().map(|v| primitive_i64(v)).collect();
                k.sort();
                k.dedup();
                k
            }
        }
    }
}

/// A wall: support, truncated wall function, and incoming/outgoing flag.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Wall {
    pub support: Support,
    pub function: WallFunction,
    pub incoming: bool,
}

/// A truncated scattering diagram for a fixed initial exchange matrix.
#[derive(Clone, Debug)]
pub struct ScatteringDiagram {
    b0: ExchangeMatrix,
    truncation: i64,
    walls: Vec<Wall>,
}

impl ScatteringDiagram {
    pub fn new(b0: ExchangeMatrix, truncation: i64, walls: Vec<Wall>) -> Self {
        ScatteringDiagram { b0, truncation, walls }
    }

    pub fn b0(&self) -> &ExchangeMatrix {
        &self.b0
    }

    pub fn truncation(&self) -> i64 {
        self.truncation
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn truncated(&self, ell: i64) -> Self {
        let walls = self
            .walls
            .iter()
            .map(|w| Wall {
                support: w.support.clone(),
                function: w.function.truncated(ell),
                incoming: w.incoming,
            })
            .filter(|w| !w.function.is_trivial())
            .collect();
        ScatteringDiagram { b0: self.b0.clone(), truncation: ell, walls }
    }
}

/// Element of `x^{base} · (truncated completed monoid ring)`: terms keyed by
/// N-lattice points, graded by ŷ-degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedSeries {
    base: Vec2,
    ell: i64,
    terms: BTreeMap<Vec2, BigInt>,
}

impl TruncatedSeries {
    /// The bare monomial `x^{base}`.
    pub fn monomial(base: Vec2, ell: i64) -> Self {
        let n = base.len();
        TruncatedSeries { base, ell, terms: BTreeMap::from([(vec![0; n], BigInt::one())]) }
    }

    pub fn base(&self) -> &[i64] {
        &self.base
    }

    pub fn ell(&self) -> i64 {
        self.ell
    }

    pub fn terms(&self) -> &BTreeMap<Vec2, BigInt> {
        &self.terms
    }

    pub fn is_bare_monomial(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map_or(false, |(n, c)| n.iter().all(|&x| x == 0) && c.is_one())
    }

    pub fn coefficient(&self, n: &[i64]) -> BigInt {
        self.terms.get(n).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn add_term(&mut self, n: Vec2, c: BigInt) {
        if degree(&n) > self.ell || c.is_zero() {
            return;
        }
        let e = self.terms.entry(n.clone()).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&n);
        }
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Re-truncates to a smaller degree.
    pub fn truncated(&self, ell: i64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(n, _)| degree(n) <= ell)
            .map(|(n, c)| (n.clone(), c.clone()))
            .collect();
        TruncatedSeries { base: self.base.clone(), ell, terms }
    }
}

/// Powers of a wall function as N-lattice series, with negative exponents
/// expanded as truncated geometric series.
fn function_power(f: &WallFunction, e: i64, nvars: usize, ell: i64) -> BTreeMap<Vec2, BigInt> {
    let one: BTreeMap<Vec2, BigInt> = BTreeMap::from([(vec![0i64; nvars], BigInt::one())]);
    let d = degree(&f.dir);
    if e == 0 || d == 0 {
        return one;
    }
    let mut base: BTreeMap<Vec2, BigInt> = one.clone();
    for (k, c) in &f.coeffs {
        let key: Vec2 = f.dir.iter().map(|&x| x * i64::from(*k)).collect();
        if degree(&key) <= ell {
            base.insert(key, c.clone());
        }
    }
    let mul = |a: &BTreeMap<Vec2, BigInt>, b: &BTreeMap<Vec2, BigInt>| {
        let mut out: BTreeMap<Vec2, BigInt> = BTreeMap::new();
        for (n1, c1) in a {
            for (n2, c2) in b {
                let n: Vec2 = n1.iter().zip(n2).map(|(x, y)| x + y).collect();
                if degree(&n) <= ell {
                    let e = out.entry(n).or_insert_with(BigInt::zero);
                    *e += c1 * c2;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    };
    let positive = e > 0;
    let mut e_abs = e.unsigned_abs();
    let mut result = one.clone();
    let mut sq = base.clone();
    while e_abs > 0 {
        if e_abs & 1 == 1 {
            result = mul(&result, &sq);
        }
        e_abs >>= 1;
        if e_abs > 0 {
            sq = mul(&sq, &sq);
        }
    }
    if positive {
        return result;
    }
    // inverse by geometric series: result = Σ (1 - f^|e|)^j
    let u: BTreeMap<Vec2, BigInt> = result
        .iter()
        .filter(|(n, _)| n.iter().any(|&x| x != 0))
        .map(|(n, c)| (n.clone(), -c))
        .collect();
    assert!(result.get(&vec![0i64; nvars]).map_or(false, |c| c.is_one()));
    let mut acc = one.clone();
    let mut term = one;
    loop {
        term = mul(&term, &u);
        if term.is_empty() {
            break;
        }
        for (n, c) in &term {
            let e = acc.entry(n.clone()).or_insert_with(BigInt::zero);
            *e += c;
        }
    }
    acc.retain(|_, c| !c.is_zero());
    acc
}

/// One wall-crossing automorphism applied to a series:
/// `x^m -> x^m f^{eps <n', m>}` term by term.
pub fn wall_cross(
    b0: &ExchangeMatrix,
    wall: &Wall,
    eps: i8,
    s: &TruncatedSeries,
) -> Result<TruncatedSeries> {
    let skew = b0.skew();
    let nvars = s.base.len();
    let npr = n_prime(skew, wall.function.dir());
    let mut out = TruncatedSeries { base: s.base.clone(), ell: s.ell, terms: BTreeMap::new() };
    let mut power_cache: HashMap<i64, BTreeMap<Vec2, BigInt>> = HashMap::new();
    for (n, c) in &s.terms {
        let pn = p_star(b0, n)?;
        let m: Vec2 = s.base.iter().zip(&pn).map(|(a, b)| a + b).collect();
        let e = i64::from(eps) * pairing_int(skew, &npr, &m);
        let fe = power_cache
            .entry(e)
            .or_insert_with(|| function_power(&wall.function, e, nvars, s.ell));
        for (fn_, fc) in fe.iter() {
            let key: Vec2 = n.iter().zip(fn_).map(|(x, y)| x + y).collect();
            out.add_term(key, c * fc);
        }
    }
    Ok(out)
}

/// Path-ordered product over an explicit crossing list (first crossing first).
pub fn path_ordered_product(
    d: &ScatteringDiagram,
    crossings: &[(usize, i8)],
    s: &TruncatedSeries,
) -> Result<TruncatedSeries> {
    let mut acc = s.clone();
    for &(idx, eps) in crossings {
        acc = wall_cross(&d.b0, &d.walls[idx], eps, &acc)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// rank-2 geometry
// ---------------------------------------------------------------------------

fn rot90(v: &[i64]) -> Vec2 {
    vec![-v[1], v[0]]
}

/// Exact counterclockwise angular order on nonzero rank-2 rays, with the
/// positive x-axis placed last (a loop starting just inside the first
/// quadrant crosses it at the very end).
fn angle_rank(r: &[i64]) -> u8 {
    let (x, y) = (r[0], r[1]);
    assert!(x != 0 || y != 0);
    match (x.signum(), y.signum()) {
        (1, 1) => 0,
        (0, 1) => 1,
        (-1, 1) => 2,
        (-1, 0) => 3,
        (-1, -1) => 4,
        (0, -1) => 5,
        (1, -1) => 6,
        (1, 0) => 7,
        _ => unreachable!(),
    }
}

fn angle_cmp(a: &[i64], b: &[i64]) -> std::cmp::Ordering {
    angle_rank(a).cmp(&angle_rank(b)).then_with(|| {
        // within an open quadrant: a before b iff b is counterclockwise of a,
        // i.e. cross(a, b) > 0
        let cross = a[0] * b[1] - a[1] * b[0];
        cross.cmp(&0).reverse()
    })
}

/// The ray of `n0^⊥` (D-orthogonal) on the `-p*(n0)` side, primitive.
fn outgoing_ray(b0: &ExchangeMatrix, n0: &[i64]) -> Result<Vec2> {
    let p = p_star(b0, n0)?;
    Ok(primitive_i64(&[-p[0], -p[1]]))
}

/// Crossing atlas for a full counterclockwise loop around the origin:
/// ordered `(wall index, ray, sign)` entries; hyperplane walls contribute
/// both rays.
fn loop_crossings(d: &ScatteringDiagram) -> Result<Vec<(usize, Vec2, i8)>> {
    if d.b0.n() != 2 {
        return Err(Error::RankUnsupported { n: d.b0.n(), limit: 2 });
    }
    let skew = d.b0.skew();
    let mut entries: Vec<(usize, Vec2, i8)> = Vec::new();
    for (idx, w) in d.walls.iter().enumerate() {
        let n0 = w.function.dir();
        let rays: Vec<Vec2> = match &w.support {
            Support::Hyperplane(h) => {
                assert_eq!(primitive_i64(h), primitive_i64(n0), "hyperplane normal mismatch");
                let d1 = i64::try_from(skew.d_i(0).clone()).unwrap();
                let d2 = i64::try_from(skew.d_i(1).clone()).unwrap();
                let r = primitive_i64(&[d1 * n0[1], -d2 * n0[0]]);
                vec![r.clone(), vec![-r[0], -r[1]]]
            }
            Support::Cone(gens) => {
                assert_eq!(gens.len(), 1, "rank-2 wall support must be a ray");
                vec![primitive_i64(&gens[0])]
            }
        };
        for ray in rays {
            // sanity: ray orthogonal to the normal element
            let pairing = BigRational::new(BigInt::from(n0[0] * ray[0]), skew.d_i(0).clone())
                + BigRational::new(BigInt::from(n0[1] * ray[1]), skew.d_i(1).clone());
            assert!(pairing.is_zero(), "wall support not orthogonal to its normal");
            let t = rot90(&ray);
            let s = BigRational::new(BigInt::from(n0[0] * t[0]), skew.d_i(0).clone())
                + BigRational::new(BigInt::from(n0[1] * t[1]), skew.d_i(1).clone());
            let eps = if s.is_positive() { -1 } else { 1 };
            entries.push((idx, ray, eps));
        }
    }
    entries.sort_by(|a, b| angle_cmp(&a.1, &b.1).then(a.0.cmp(&b.0)));
    Ok(entries)
}

/// Whether the full-loop path-ordered product around the origin is the
/// identity on `x_1` and `x_2` modulo the truncation.
pub fn check_consistency_rank2(d: &ScatteringDiagram) -> Result<bool> {
    if d.b0.n() != 2 {
        return Err(Error::RankUnsupported { n: d.b0.n(), limit: 2 });
    }
    if !d.b0.is_nonsingular() {
        return Err(Error::SingularMatrix);
    }
    let crossings = loop_crossings(d)?;
    for i in 0..2 {
        let mut base = vec![0i64; 2];
        base[i] = 1;
        let mut s = TruncatedSeries::monomial(base, d.truncation);
        for (idx, _, eps) in &crossings {
            s = wall_cross(&d.b0, &d.walls[*idx], *eps, &s)?;
        }
        if !s.is_bare_monomial() {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// cluster walls
// ---------------------------------------------------------------------------

/// The walls `(σ_i(G_t), 1 + ŷ^{c+_{i;t}})` over the depth-bounded pattern,
/// duplicates discarded, incoming/outgoing marked by exact membership.
pub fn cluster_walls(b0: &ExchangeMatrix, depth: usize, ell: i64) -> Result<ScatteringDiagram> {
    let n = b0.n();
    let fan = crate::fan::build_g_fan(b0, depth)?;
    let mut seen: HashSet<(Vec<Vec2>, Vec2)> = HashSet::new();
    let mut walls = Vec::new();
    for g in fan.g_matrices() {
        // recover C from G via the second duality
        let c = c_from_g(b0, g);
        for i in 0..n {
            let ci = c.column(i);
            let eps = match crate::matrix::coherent_sign(&ci) {
                Ok(s) if s != 0 => s,
                _ => return Err(Error::MixedSigns { i }),
            };
            let c_plus: Vec<BigInt> =
                ci.iter().map(|x| if eps < 0 { -x } else { x.clone() }).collect();
            let dir = to_i64(&c_plus)?;
            assert_eq!(content_i64(&dir), 1, "c+-vector must be primitive");
            let gens: Vec<Vec2> = (0..n)
                .filter(|&j| j != i)
                .map(|j| to_i64(&g.column(j)))
                .collect::<Result<_>>()?;
            let support = Support::Cone(gens);
            let key = (support.canonical_key(), dir.clone());
            if !seen.insert(key) {
                continue;
            }
            // incoming iff ĉ+ = p*(c+) lies in the face
            let hat = b0.matrix().mul_vec(&c_plus);
            let subset: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let incoming = in_unimodular_face(g, &subset, &hat);
            walls.push(Wall { support, function: WallFunction::one_plus(dir), incoming });
        }
    }
    walls.sort_by(|a, b| {
        a.support
            .canonical_key()
            .cmp(&b.support.canonical_key())
            .then_with(|| a.function.dir().cmp(b.function.dir()))
    });
    Ok(ScatteringDiagram { b0: b0.clone(), truncation: ell, walls })
}

/// `C_t` from `G_t` via the second duality `D^{-1} G^T D C = I`.
fn c_from_g(b0: &ExchangeMatrix, g: &IntMatrix) -> IntMatrix {
    let n = g.n();
    let det = g.det();
    assert!(det.magnitude().is_one());
    let adj = g.transpose().adjugate();
    IntMatrix::from_fn(n, |i, j| {
        // (D^{-1} adj(G^T) D)_{ij} / det = d_i adj_{ij} / (d_j det)
        let mut num = b0.skew().d_i(i) * adj.get(i, j);
        if det.is_negative() {
            num = -num;
        }
        let (q, r) = num.div_rem(b0.skew().d_i(j));
        assert!(r.is_zero(), "second duality produced a non-integer C entry");
        q
    })
}

// ---------------------------------------------------------------------------
// rank-2 consistent completion
// ---------------------------------------------------------------------------

/// Order-by-order consistent completion in rank 2: starting from the two
/// incoming walls, insert outgoing corrections degree by degree until the
/// full loop around the origin is the identity modulo each power of the
/// grading ideal.
pub fn complete_rank2(b0: &ExchangeMatrix, ell: i64) -> Result<ScatteringDiagram> {
    if b0.n() != 2 {
        return Err(Error::RankUnsupported { n: b0.n(), limit: 2 });
    }
    if !b0.is_nonsingular() {
        return Err(Error::SingularMatrix);
    }
    let skew = b0.skew();
    let e1 = vec![1i64, 0];
    let e2 = vec![0i64, 1];
    let mut funcs: BTreeMap<Vec2, BTreeMap<u32, BigInt>> = BTreeMap::new();
    funcs.insert(e1.clone(), BTreeMap::from([(1, BigInt::one())]));
    funcs.insert(e2.clone(), BTreeMap::from([(1, BigInt::one())]));

    let build = |funcs: &BTreeMap<Vec2, BTreeMap<u32, BigInt>>,
                 ell: i64|
     -> Result<ScatteringDiagram> {
        let mut walls = Vec::new();
        for (dir, coeffs) in funcs {
            let f = WallFunction::new(dir.clone(), coeffs.clone()).truncated(ell);
            if f.is_trivial() {
                continue;
            }
            if *dir == vec![1, 0] || *dir == vec![0, 1] {
                walls.push(Wall {
                    support: Support::Hyperplane(dir.clone()),
                    function: f,
                    incoming: true,
                });
            } else {
                walls.push(Wall {
                    support: Support::Cone(vec![outgoing_ray(b0, dir)?]),
                    function: f,
                    incoming: false,
                });
            }
        }
        Ok(ScatteringDiagram { b0: b0.clone(), truncation: ell, walls })
    };

    for deg in 2..=ell {
        // measure the loop defect at this degree on both generators
        let d = build(&funcs, deg)?;
        let crossings = loop_crossings(&d)?;
        let mut defects: BTreeMap<Vec2, BTreeMap<usize, BigInt>> = BTreeMap::new();
        for i in 0..2usize {
            let mut base = vec![0i64; 2];
            base[i] = 1;
            let mut s = TruncatedSeries::monomial(base, deg);
            for (idx, _, eps) in &crossings {
                s = wall_cross(&d.b0, &d.walls[*idx], *eps, &s)?;
            }
            for (n, c) in s.terms() {
                if n.iter().all(|&x| x == 0) {
                    assert!(c.is_one(), "loop lost the leading term");
                    continue;
                }
                assert!(degree(n) == deg, "stale lower-degree defect {n:?} at degree {deg}");
                defects.entry(n.clone()).or_default().insert(i, c.clone());
            }
        }
        for (nvec, per_base) in defects {
            let np = primitive_i64(&nvec);
            let g = content_i64(&nvec) as u32;
            assert!(
                np != e1 && np != e2,
                "completion required a correction on an incoming normal"
            );
            let npr = n_prime(skew, &np);
            // the new wall's ray is crossed once; a coefficient δ changes the
            // loop by 1 + ε δ <n', m> z at first order, so δ = -defect/(ε <n',m>)
            let ray = outgoing_ray(b0, &np)?;
            let t = rot90(&ray);
            let sgn = BigRational::new(BigInt::from(np[0] * t[0]), skew.d_i(0).clone())
                + BigRational::new(BigInt::from(np[1] * t[1]), skew.d_i(1).clone());
            let eps_ray: i64 = if sgn.is_positive() { -1 } else { 1 };
            let mut delta: Option<BigRational> = None;
            for (i, c) in &per_base {
                let mut fvec = vec![0i64; 2];
                fvec[*i] = 1;
                let pv = pairing_int(skew, &npr, &fvec);
                if pv == 0 {
                    assert!(c.is_zero(), "defect on a direction with zero pairing");
                    continue;
                }
                let cand = BigRational::new(-c.clone(), BigInt::from(eps_ray * pv));
                match &delta {
                    Some(d) => assert_eq!(d, &cand, "inconsistent correction at {nvec:?}"),
                    None => delta = Some(cand),
                }
            }
            let Some(delta) = delta else { continue };
            if delta.is_zero() {
                continue;
            }
            assert!(delta.is_integer(), "non-integer wall coefficient at {nvec:?}");
            let entry = funcs.entry(np).or_default().entry(g).or_insert_with(BigInt::zero);
            *entry += delta.to_integer();
        }
        // the loop must now close at this degree
        let d = build(&funcs, deg)?;
        let crossings = loop_crossings(&d)?;
        for i in 0..2usize {
            let mut base = vec![0i64; 2];
            base[i] = 1;
            let mut s = TruncatedSeries::monomial(base, deg);
            for (idx, _, eps) in &crossings {
                s = wall_cross(&d.b0, &d.walls[*idx], *eps, &s)?;
            }
            assert!(s.is_bare_monomial(), "loop failed to close at degree {deg}");
        }
    }
    build(&funcs, ell)
}

// ---------------------------------------------------------------------------
// normalization and equivalence
// ---------------------------------------------------------------------------

/// Merges same-support walls multiplicatively, drops trivial walls, and joins
/// opposite rays carrying the same function into full hyperplanes. Walls end
/// up in a canonical order for equality testing.
pub fn normalize(d: &ScatteringDiagram) -> ScatteringDiagram {
    let ell = d.truncation;
    let mut merged: BTreeMap<(Vec<Vec2>, Vec2), (Support, WallFunction, bool)> = BTreeMap::new();
    for w in &d.walls {
        let f = w.function.truncated(ell);
        if f.is_trivial() {
            continue;
        }
        let key = (w.support.canonical_key(), f.dir().to_vec());
        match merged.get_mut(&key) {
            Some((_, existing, incoming)) => {
                *existing = existing.mul(&f, ell);
                *incoming = *incoming || w.incoming;
            }
            None => {
                merged.insert(key, (w.support.clone(), f, w.incoming));
            }
        }
    }
    let mut walls: Vec<Wall> = merged
        .into_values()
        .filter(|(_, f, _)| !f.is_trivial())
        .map(|(support, function, incoming)| Wall { support, function, incoming })
        .collect();
    // join opposite rays with identical functions (rank 2)
    if d.b0.n() == 2 {
        let mut joined: Vec<Wall> = Vec::new();
        let mut used = vec![false; walls.len()];
        for i in 0..walls.len() {
            if used[i] {
                continue;
            }
            let mut done = false;
            if let Support::Cone(gens) = &walls[i].support {
                if gens.len() == 1 {
                    let ray = primitive_i64(&gens[0]);
                    let opp = vec![-ray[0], -ray[1]];
                    for j in i + 1..walls.len() {
                        if used[j] {
                            continue;
                        }
                        if let Support::Cone(gens2) = &walls[j].support {
                            if gens2.len() == 1
                                && primitive_i64(&gens2[0]) == opp
                                && walls[j].function == walls[i].function
                            {
                                used[i] = true;
                                used[j] = true;
                                let dir = walls[i].function.dir().to_vec();
                                joined.push(Wall {
                                    support: Support::Hyperplane(dir),
                                    function: walls[i].function.clone(),
                                    incoming: true,
                                });
                                done = true;
                                break;
                            }
                        }
                    }
                }
            }
            if !done && !used[i] {
                used[i] = true;
                joined.push(walls[i].clone());
            }
        }
        walls = joined;
    }
    walls.sort_by(|a, b| {
        a.support
            .canonical_key()
            .cmp(&b.support.canonical_key())
            .then_with(|| a.function.dir().cmp(b.function.dir()))
    });
    ScatteringDiagram { b0: d.b0.clone(), truncation: ell, walls }
}

/// Ray atlas of a rank-2 diagram: every wall spread onto its ray(s), with
/// per-ray functions merged. Two diagrams are equivalent iff their atlases
/// agree.
pub fn ray_atlas(d: &ScatteringDiagram) -> Result<BTreeMap<Vec2, WallFunction>> {
    if d.b0.n() != 2 {
        return Err(Error::RankUnsupported { n: d.b0.n(), limit: 2 });
    }
    let skew = d.b0.skew();
    let mut atlas: BTreeMap<Vec2, WallFunction> = BTreeMap::new();
    for w in &d.walls {
        let f = w.function.truncated(d.truncation);
        if f.is_trivial() {
            continue;
        }
        let rays: Vec<Vec2> = match &w.support {
            Support::Hyperplane(n0) => {
                let d1 = i64::try_from(skew.d_i(0).clone()).unwrap();
                let d2 = i64::try_from(skew.d_i(1).clone()).unwrap();
                let r = primitive_i64(&[d1 * n0[1], -d2 * n0[0]]);
                vec![r.clone(), vec![-r[0], -r[1]]]
            }
            Support::Cone(gens) => {
                assert_eq!(gens.len(), 1);
                vec![primitive_i64(&gens[0])]
            }
        };
        for ray in rays {
            match atlas.get_mut(&ray) {
                Some(existing) => {
                    assert_eq!(existing.dir(), f.dir(), "distinct normals on one ray");
                    *existing = existing.mul(&f, d.truncation);
                }
                None => {
                    atlas.insert(ray, f.clone());
                }
            }
        }
    }
    atlas.retain(|_, f| !f.is_trivial());
    Ok(atlas)
}

/// Equivalence of rank-2 diagrams: identical ray atlases at the common
/// truncation.
pub fn equivalent_rank2(d1: &ScatteringDiagram, d2: &ScatteringDiagram) -> Result<bool> {
    let ell = d1.truncation.min(d2.truncation);
    let a1 = ray_atlas(&d1.truncated(ell))?;
    let a2 = ray_atlas(&d2.truncated(ell))?;
    Ok(a1 == a2)
}

// ---------------------------------------------------------------------------
// diagram mutation
// ---------------------------------------------------------------------------

/// Wall data during mutation, before normal elements are re-recognized:
/// supports plus a raw x-exponent for the function terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawWall {
    pub gens: Vec<Vec2>,
    pub hyperplane: bool,
    /// function = 1 + Σ_k c_k x^{k·exponent}
    pub exponent: Vec2,
    pub coeffs: BTreeMap<u32, BigInt>,
}

/// The `T_k` transform of diagram mutation, *before* the η change of basis:
/// splits along the `m_k = 0` hyperplane, applies `S_k` on the plus side,
/// and inverts the `(e_k^⊥, 1+ŷ_k)` wall function.
pub fn t_k_transform(d: &ScatteringDiagram, k: usize) -> Result<Vec<RawWall>> {
    let n = d.b0.n();
    if k >= n {
        return Err(Error::DirectionOutOfRange { k, n });
    }
    if !d.b0.is_nonsingular() {
        return Err(Error::SingularMatrix);
    }
    let b = d.b0.matrix();
    let bk: Vec2 = to_i64(&b.column(k))?;
    let s_k = |v: &[i64]| -> Vec2 { (0..n).map(|i| v[i] + v[k] * bk[i]).collect() };
    let e_k: Vec2 = (0..n).map(|i| if i == k { 1 } else { 0 }).collect();
    let mut out = Vec::new();
    for w in &d.walls {
        let dir = w.function.dir().to_vec();
        let exponent = p_star(&d.b0, &dir)?;
        if dir == e_k {
            // rule (b): support fixed pointwise, function exponent negated
            let (gens, hyperplane) = match &w.support {
                Support::Hyperplane(_) => (Vec::new(), true),
                Support::Cone(gens) => (gens.clone(), false),
            };
            out.push(RawWall {
                gens,
                hyperplane,
                exponent: exponent.iter().map(|x| -x).collect(),
                coeffs: w.function.coeffs().clone(),
            });
            continue;
        }
        let parts: Vec<Vec<Vec2>> = match &w.support {
            Support::Hyperplane(n0) => {
                if n == 2 {
                    let skew = d.b0.skew();
                    let d1 = i64::try_from(skew.d_i(0).clone()).unwrap();
                    let d2 = i64::try_from(skew.d_i(1).clone()).unwrap();
                    let r = primitive_i64(&[d1 * n0[1], -d2 * n0[0]]);
                    let ropp = vec![-r[0], -r[1]];
                    vec![vec![r], vec![ropp]]
                } else {
                    return Err(Error::RankUnsupported { n, limit: 2 });
                }
            }
            Support::Cone(gens) => vec![gens.clone()],
        };
        for gens in parts {
            let signs: Vec<i64> = gens.iter().map(|g| g[k].signum()).collect();
            let plus = signs.iter().all(|&s| s >= 0);
            let minus = signs.iter().all(|&s| s <= 0);
            if plus && !minus {
                out.push(RawWall {
                    gens: gens.iter().map(|g| s_k(g)).collect(),
                    hyperplane: false,
                    exponent: s_k(&exponent),
                    coeffs: w.function.coeffs().clone(),
                });
            } else if minus {
                out.push(RawWall {
                    gens,
                    hyperplane: false,
                    exponent: exponent.clone(),
                    coeffs: w.function.coeffs().clone(),
                });
            } else {
                return Err(Error::Invalid(
                    "wall support straddles the mutation hyperplane".into(),
                ));
            }
        }
    }
    Ok(out)
}

/// Applies the linear base change `η_{t0}^{t1}` to raw walls.
pub fn eta_rebase(d: &ScatteringDiagram, k: usize, raw: &[RawWall]) -> Result<Vec<RawWall>> {
    let n = d.b0.n();
    let b = d.b0.matrix();
    let eta = IntMatrix::j_k(n, k).add(&b.neg().plus_part().col_only(k));
    let apply = |v: &[i64]| -> Result<Vec2> { to_i64(&eta.mul_vec(&to_big(v))) };
    raw.iter()
        .map(|w| {
            Ok(RawWall {
                gens: w.gens.iter().map(|g| apply(g)).collect::<Result<_>>()?,
                hyperplane: w.hyperplane,
                exponent: apply(&w.exponent)?,
                coeffs: w.coeffs.clone(),
            })
        })
        .collect()
}

/// Reassembles raw walls into a scattering diagram with respect to the
/// mutated matrix: recovers normal elements from the function exponents and
/// recomputes incoming flags.
pub fn from_raw(b1: &ExchangeMatrix, ell: i64, raw: &[RawWall]) -> Result<ScatteringDiagram> {
    if !b1.is_nonsingular() {
        return Err(Error::SingularMatrix);
    }
    let n = b1.n();
    let det = b1.det();
    let adj = b1.matrix().adjugate();
    let mut walls = Vec::new();
    for w in raw {
        // n-vector with B1 * nvec = exponent
        let num = adj.mul_vec(&to_big(&w.exponent));
        let mut nvec = Vec::with_capacity(n);
        for x in num {
            let (q, r) = x.div_rem(&det);
            if !r.is_zero() {
                return Err(Error::Invalid(
                    "mutated wall exponent leaves the p* image lattice".into(),
                ));
            }
            nvec.push(i64::try_from(q).map_err(|_| Error::Invalid("exponent overflow".into()))?);
        }
        if nvec.iter().any(|&x| x < 0) || nvec.iter().all(|&x| x == 0) {
            return Err(Error::Invalid(format!(
                "mutated wall normal {nvec:?} not in N+ (temporal problem unresolved)"
            )));
        }
        let kappa = content_i64(&nvec) as u32;
        let dir = primitive_i64(&nvec);
        let coeffs: BTreeMap<u32, BigInt> =
            w.coeffs.iter().map(|(j, c)| (j * kappa, c.clone())).collect();
        let function = WallFunction::new(dir.clone(), coeffs).truncated(ell);
        if function.is_trivial() {
            continue;
        }
        let (support, incoming) = if w.hyperplane {
            (Support::Hyperplane(dir.clone()), true)
        } else {
            let gens: Vec<Vec2> = w.gens.iter().map(|g| primitive_i64(g)).collect();
            let p = p_star(b1, &dir)?;
            let incoming = if gens.len() == 1 {
                primitive_i64(&p) == gens[0]
            } else {
                in_cone(&gens, &p)
            };
            (Support::Cone(gens), incoming)
        };
        walls.push(Wall { support, function, incoming });
    }
    Ok(ScatteringDiagram { b0: b1.clone(), truncation: ell, walls })
}

/// Exact membership of `x` in the cone generated by linearly independent
/// integer generators (rational Gaussian elimination).
fn in_cone(gens: &[Vec2], x: &[i64]) -> bool {
    let rows = x.len();
    let cols = gens.len();
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| BigRational::from(BigInt::from(gens[j][i])))
                .chain(std::iter::once(BigRational::from(BigInt::from(x[i]))))
                .collect()
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(r) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, r);
        let inv = m[pivot_row][col].clone();
        for c in col..=cols {
            let v = m[pivot_row][c].clone() / inv.clone();
            m[pivot_row][c] = v;
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=cols {
                    let v = m[r][c].clone() - f.clone() * m[pivot_row][c].clone();
                    m[r][c] = v;
                }
            }
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
    }
    for r in pivot_row..rows {
        if !m[r][cols].is_zero() {
            return false;
        }
    }
    for (r, _) in pivots {
        if m[r][cols].is_negative() {
            return false;
        }
    }
    true
}

/// Full diagram mutation: the `T_k` transform followed by the `η` change of
/// basis; the result is a scattering diagram with respect to `μ_k(B0)`,
/// equivalent to the consistent completion of the mutated matrix.
pub fn mutate_diagram(d: &ScatteringDiagram, k: usize) -> Result<ScatteringDiagram> {
    let raw = t_k_transform(d, k)?;
    let rebased = eta_rebase(d, k, &raw)?;
    let b1 = d.b0.mutate(k, 1)?;
    let out = from_raw(&b1, d.truncation, &rebased)?;
    Ok(normalize(&out))
}

// ---------------------------------------------------------------------------
// curve crossings
// ---------------------------------------------------------------------------

/// Crossing list (with signs) of the straight segment from `q0` to `q1`,
/// ordered by crossing time. Errors when the segment is not admissible:
/// endpoints on the support, simultaneous crossings, or passing through the
/// origin.
pub fn segment_crossings(
    d: &ScatteringDiagram,
    q0: &[BigRational],
    q1: &[BigRational],
) -> Result<Vec<(usize, i8)>> {
    if d.b0.n() != 2 {
        return Err(Error::RankUnsupported { n: d.b0.n(), limit: 2 });
    }
    let skew = d.b0.skew();
    let dirv: Vec<BigRational> = q1.iter().zip(q0).map(|(a, b)| a - b).collect();
    let pair = |n0: &[i64], v: &[BigRational]| -> BigRational {
        BigRational::from(BigInt::from(n0[0])) * &v[0] / BigRational::from(skew.d_i(0).clone())
            + BigRational::from(BigInt::from(n0[1])) * &v[1]
                / BigRational::from(skew.d_i(1).clone())
    };
    let on_support = |w: &Wall, q: &[BigRational]| -> bool {
        if !pair(w.function.dir(), q).is_zero() {
            return false;
        }
        match &w.support {
            Support::Hyperplane(_) => true,
            Support::Cone(gens) => {
                let r = &gens[0];
                let s = if r[0] != 0 {
                    &q[0] / BigRational::from(BigInt::from(r[0]))
                } else {
                    &q[1] / BigRational::from(BigInt::from(r[1]))
                };
                (0..2).all(|i| q[i].clone() == &s * BigRational::from(BigInt::from(r[i])))
                    && !s.is_negative()
            }
        }
    };
    for w in &d.walls {
        if on_support(w, q0) || on_support(w, q1) {
            return Err(Error::NotAdmissible("endpoint lies on the support".into()));
        }
    }
    let mut hits: Vec<(BigRational, usize, i8)> = Vec::new();
    for (idx, w) in d.walls.iter().enumerate() {
        let n0 = w.function.dir();
        let a = pair(n0, q0);
        let b = pair(n0, &dirv);
        if b.is_zero() {
            if a.is_zero() {
                return Err(Error::NotAdmissible("segment runs inside a wall".into()));
            }
            continue;
        }
        let tau = -a / &b;
        if tau <= BigRational::zero() || tau >= BigRational::one() {
            continue;
        }
        let pt: Vec<BigRational> = q0.iter().zip(&dirv).map(|(p, v)| p + v * &tau).collect();
        if pt.iter().all(|x| x.is_zero()) {
            return Err(Error::NotAdmissible("segment passes through the origin".into()));
        }
        let inside = match &w.support {
            Support::Hyperplane(_) => true,
            Support::Cone(gens) => {
                let r = &gens[0];
                let s = if r[0] != 0 {
                    &pt[0] / BigRational::from(BigInt::from(r[0]))
                } else {
                    &pt[1] / BigRational::from(BigInt::from(r[1]))
                };
                (0..2).all(|i| pt[i].clone() == &s * BigRational::from(BigInt::from(r[i])))
                    && s.is_positive()
            }
        };
        if !inside {
            continue;
        }
        let eps = if b.is_negative() { 1 } else { -1 };
        hits.push((tau, idx, eps));
    }
    hits.sort_by(|a, b| a.0.cmp(&b.0));
    for pair2 in hits.windows(2) {
        if pair2[0].0 == pair2[1].0 {
            return Err(Error::NotAdmissible("simultaneous wall crossings".into()));
        }
    }
    Ok(hits.into_iter().map(|(_, idx, eps)| (idx, eps)).collect())
}

/// The crossing list of the canonical curve `γ_t^{t0}` associated to a walk:
/// the walls `(σ_{k_s}(G_{t_s}), 1+ŷ^{c+_{k_s;t_s}})` crossed from the
/// endpoint chamber back to the initial chamber, with signs `-ε_{k_s;t_s}`.
pub fn walk_crossings(
    b0: &ExchangeMatrix,
    walk: &crate::pattern::Walk,
) -> Result<Vec<(Wall, i8)>> {
    let n = b0.n();
    let mut out = Vec::new();
    let mut p = crate::pattern::PatternPoint::initial_point(b0);
    for &k in walk.directions() {
        let eps = p.tropical_sign(k)?;
        let dir = to_i64(&p.c_plus(k)?)?;
        let gens: Vec<Vec2> = (0..n)
            .filter(|&j| j != k)
            .map(|j| to_i64(&p.g_vector(j)))
            .collect::<Result<_>>()?;
        let hat = p.hat_c_plus(k)?;
        let subset: Vec<usize> = (0..n).filter(|&j| j != k).collect();
        let incoming = in_unimodular_face(p.g_t(), &subset, &hat);
        out.push((
            Wall { support: Support::Cone(gens), function: WallFunction::one_plus(dir), incoming },
            -eps,
        ));
        p = p.step_eps(k, 1)?;
    }
    // first crossing of the curve is the last wall built
    out.reverse();
    Ok(out)
}

/// Path-ordered product over explicitly provided walls.
pub fn apply_crossings(
    b0: &ExchangeMatrix,
    crossings: &[(Wall, i8)],
    s: &TruncatedSeries,
) -> Result<TruncatedSeries> {
    let mut acc = s.clone();
    for (w, eps) in crossings {
        acc = wall_cross(b0, w, *eps, &acc)?;
    }
    Ok(acc)
}

/// Factors a truncated wall function as `Π (1 + z^k)^{c_k}`; errors if the
/// factorization needs negative exponents within the truncation. Returns the
/// nonzero `(k, c_k)` pairs.
pub fn factor_positive(f: &WallFunction, ell: i64) -> Result<Vec<(u32, BigInt)>> {
    let d = degree(f.dir());
    if d == 0 {
        return Ok(Vec::new());
    }
    let max_k = (ell / d) as usize;
    let mut rem: Vec<BigInt> = vec![BigInt::zero(); max_k + 1];
    rem[0] = BigInt::one();
    for (k, c) in f.coeffs() {
        if (*k as usize) <= max_k {
            rem[*k as usize] = c.clone();
        }
    }
    let mut out = Vec::new();
    for k in 1..=max_k {
        let c = rem[k].clone();
        if c.is_zero() {
            continue;
        }
        if c.is_negative() {
            return Err(Error::Invalid(format!(
                "negative exponent {c} at z^{k} in positive factorization"
            )));
        }
        out.push((k as u32, c.clone()));
        let e = i64::try_from(c).map_err(|_| Error::Invalid("exponent overflow".into()))?;
        rem = univariate_mul_power(&rem, k, -e, max_k);
        assert!(rem[0].is_one());
        assert!((1..=k).all(|j| rem[j].is_zero()));
    }
    Ok(out)
}

/// Multiplies a truncated univariate series by `(1 + z^step)^e`.
fn univariate_mul_power(a: &[BigInt], step: usize, e: i64, max: usize) -> Vec<BigInt> {
    assert!(step >= 1);
    let mul = |a: &[BigInt], b: &[BigInt]| -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); max + 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if i + j <= max && !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        out
    };
    let mut base = vec![BigInt::zero(); max + 1];
    base[0] = BigInt::one();
    if e >= 0 {
        if step <= max {
            base[step] = BigInt::one();
        }
    } else {
        // (1 + z^step)^{-1} = Σ (-1)^j z^{j·step}
        let mut j = 0;
        let mut sign = BigInt::one();
        while j * step <= max {
            base[j * step] = sign.clone();
            sign = -sign;
            j += 1;
        }
    }
    let mut result = vec![BigInt::zero(); max + 1];
    result[0] = BigInt::one();
    for _ in 0..e.unsigned_abs() {
        result = mul(&result, &base);
    }
    mul(a, &result)
}
