//! G-cones, G-fans, exact polyhedral verification, and the piecewise-linear
//! maps between fans.
//!
//! All polyhedral computations are exact: ray arithmetic over big integers,
//! inner products over big rationals, cone intersections by the double
//! description method.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::matrix::{coherent_sign, ExchangeMatrix, IntMatrix};
use crate::pattern::PatternPoint;
use crate::{Error, Result};

/// Largest rank for which exact pairwise cone intersection is attempted.
pub const FAN_RANK_LIMIT: usize = 4;

/// A rational polyhedral cone given by integer generators.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cone {
    gens: Vec<Vec<BigInt>>,
}

pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for x in v {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

impl Cone {
    pub fn new(gens: Vec<Vec<BigInt>>) -> Self {
        Cone { gens }
    }

    /// The cone spanned by the columns of a G-matrix.
    pub fn from_g_matrix(g: &IntMatrix) -> Self {
        Cone { gens: (0..g.n()).map(|j| g.column(j)).collect() }
    }

    /// The face `σ_i(G)` spanned by all columns except the i-th.
    pub fn face_without(g: &IntMatrix, i: usize) -> Self {
        Cone { gens: (0..g.n()).filter(|&j| j != i).map(|j| g.column(j)).collect() }
    }

    pub fn gens(&self) -> &[Vec<BigInt>] {
        &self.gens
    }

    pub fn ambient_dim(&self) -> usize {
        self.gens.first().map_or(0, |v| v.len())
    }

    /// Canonical key: sorted primitive generators.
    pub fn canonical_key(&self) -> Vec<Vec<BigInt>> {
        let mut k: Vec<Vec<BigInt>> = self.gens.iter().map(|v| primitive(v)).collect();
        k.sort();
        k.dedup();
        k
    }
}

/// Membership of `v` in the simplicial cone spanned by the given subset of
/// columns of a unimodular matrix `g`: the coordinates of `v` in the full
/// column basis must be nonnegative on the subset and zero off it.
pub fn in_unimodular_face(g: &IntMatrix, subset: &[usize], v: &[BigInt]) -> bool {
    let det = g.det();
    assert!(det.magnitude().is_one(), "face membership requires a unimodular basis");
    let adj = g.adjugate();
    let lam = adj.mul_vec(v);
    let keep: HashSet<usize> = subset.iter().copied().collect();
    for (j, l) in lam.iter().enumerate() {
        let l = if det.is_negative() { -l } else { l.clone() };
        if keep.contains(&j) {
            if l.is_negative() {
                return false;
            }
        } else if !l.is_zero() {
            return false;
        }
    }
    true
}

/// The D-inner product `(u, v)_D = u^T diag(d_i^{-1}) v`, exact rational.
pub fn inner_product_d(b: &ExchangeMatrix, u: &[BigInt], v: &[BigInt]) -> BigRational {
    b.skew().pairing(u, v)
}

/// True iff the wall `(σ_i(G_t), 1 + ŷ^{c+_{i;t}})` is incoming, i.e.
/// `ĉ+_{i;t} ∈ σ_i(G_t)`. When true, the c+-vector is asserted to be a
/// standard unit vector.
pub fn is_incoming_wall(p: &PatternPoint, i: usize) -> Result<bool> {
    let n = p.n();
    if i >= n {
        return Err(Error::DirectionOutOfRange { k: i, n });
    }
    let hat = p.hat_c_plus(i)?;
    let subset: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let inside = in_unimodular_face(p.g_t(), &subset, &hat);
    if inside {
        let c_plus = p.c_plus(i)?;
        let ones = c_plus.iter().filter(|x| x.is_one()).count();
        let zeros = c_plus.iter().filter(|x| x.is_zero()).count();
        assert!(
            ones == 1 && ones + zeros == n,
            "incoming wall with non-unit c+-vector {c_plus:?}"
        );
    }
    Ok(inside)
}

/// A depth-bounded G-fan: deduplicated maximal G-cones with a completeness
/// verdict. `complete` is a semi-decision: true only when the exploration
/// closed before the depth bound and the facet pairing is perfect.
pub struct GFan {
    b0: ExchangeMatrix,
    depth: usize,
    g_matrices: Vec<IntMatrix>,
    max_cones: Vec<IntMatrix>,
    closed: bool,
    complete: bool,
}

impl GFan {
    pub fn b0(&self) -> &ExchangeMatrix {
        &self.b0
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Distinct G-matrices discovered (labeled cones).
    pub fn g_matrices(&self) -> &[IntMatrix] {
        &self.g_matrices
    }

    /// Distinct maximal cones, one generator matrix per cone with columns in
    /// canonical (sorted) order.
    pub fn max_cones(&self) -> &[IntMatrix] {
        &self.max_cones
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Whether exploration closed (no new G-matrix at the frontier).
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// All distinct rays (primitive generators of maximal cones).
    pub fn rays(&self) -> Vec<Vec<BigInt>> {
        let mut set: BTreeSet<Vec<BigInt>> = BTreeSet::new();
        for c in &self.max_cones {
            for j in 0..c.n() {
                set.insert(primitive(&c.column(j)));
            }
        }
        set.into_iter().collect()
    }
}

/// Light state for fan exploration: the tropical data only.
#[derive(Clone)]
struct CgState {
    b: ExchangeMatrix,
    c: IntMatrix,
    g: IntMatrix,
}

impl CgState {
    fn initial(b0: &ExchangeMatrix) -> Self {
        let n = b0.n();
        CgState { b: b0.clone(), c: IntMatrix::identity(n), g: IntMatrix::identity(n) }
    }

    fn step(&self, b0: &ExchangeMatrix, k: usize) -> Result<Self> {
        let n = self.b.n();
        let jk = IntMatrix::j_k(n, k);
        let b = self.b.matrix();
        let c_new = self
            .c
            .mul(&jk)
            .add(&self.c.mul(&b.plus_part().row_only(k)))
            .add(&self.c.neg().plus_part().col_only(k).mul(b));
        let g_new = self
            .g
            .mul(&jk)
            .add(&self.g.mul(&b.neg().plus_part().col_only(k)))
            .sub(&b0.matrix().mul(&self.c.neg().plus_part().col_only(k)));
        Ok(CgState { b: self.b.mutate(k, 1)?, c: c_new, g: g_new })
    }
}

fn sorted_columns(g: &IntMatrix) -> IntMatrix {
    let mut cols: Vec<Vec<BigInt>> = (0..g.n()).map(|j| g.column(j)).collect();
    cols.sort();
    IntMatrix::from_fn(g.n(), |i, j| cols[j][i].clone())
}

/// Breadth-first construction of the G-fan to the given depth, deduplicating
/// G-matrices exactly. (The G-matrix determines C and B via the dualities,
/// so visited states are keyed on G alone.)
pub fn build_g_fan(b0: &ExchangeMatrix, depth: usize) -> Result<GFan> {
    let n = b0.n();
    let init = CgState::initial(b0);
    let mut seen: HashSet<IntMatrix> = HashSet::new();
    seen.insert(init.g.clone());
    let mut g_matrices = vec![init.g.clone()];
    let mut frontier: Vec<(CgState, usize)> = vec![(init, usize::MAX)];
    let mut closed = false;
    for _layer in 0..depth {
        let mut next = Vec::new();
        for (state, last) in &frontier {
            for k in 0..n {
                if *last == k {
                    continue;
                }
                let q = state.step(b0, k)?;
                if seen.insert(q.g.clone()) {
                    g_matrices.push(q.g.clone());
                    next.push((q, k));
                }
            }
        }
        if next.is_empty() {
            closed = true;
            break;
        }
        frontier = next;
    }
    if !closed && !frontier.is_empty() {
        // probe whether the final frontier happens to be closed already
        let mut new_found = false;
        'outer: for (state, last) in &frontier {
            for k in 0..n {
                if *last == k {
                    continue;
                }
                let q = state.step(b0, k)?;
                if !seen.contains(&q.g) {
                    new_found = true;
                    break 'outer;
                }
            }
        }
        closed = !new_found;
    }
    // dedup cones by canonical column order
    let mut cone_set: HashSet<IntMatrix> = HashSet::new();
    let mut max_cones = Vec::new();
    for g in &g_matrices {
        let c = sorted_columns(g);
        if cone_set.insert(c.clone()) {
            max_cones.push(c);
        }
    }
    max_cones.sort();
    let complete = closed && facets_paired(&max_cones);
    Ok(GFan { b0: b0.clone(), depth, g_matrices, max_cones, closed, complete })
}

/// Every codimension-one face must be shared by exactly two maximal cones
/// for the fan to cover R^n.
fn facets_paired(max_cones: &[IntMatrix]) -> bool {
    let mut counts: HashMap<Vec<Vec<BigInt>>, usize> = HashMap::new();
    for c in max_cones {
        for i in 0..c.n() {
            let facet = Cone::face_without(c, i).canonical_key();
            *counts.entry(facet).or_insert(0) += 1;
        }
    }
    counts.values().all(|&v| v == 2)
}

/// Report from the exact fan-property verification.
#[derive(Debug)]
pub struct FanReport {
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

impl FanReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// H-representation rows of a unimodular simplicial cone: `x ∈ σ(G)` iff
/// `sign(det G) · adj(G) · x ≥ 0` entrywise.
fn halfspaces(g: &IntMatrix) -> Vec<Vec<BigInt>> {
    let det = g.det();
    assert!(det.magnitude().is_one());
    let adj = g.adjugate();
    (0..g.n())
        .map(|i| {
            let row = adj.row(i);
            if det.is_negative() { row.iter().map(|x| -x).collect() } else { row }
        })
        .collect()
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Double-description step: intersect the cone generated by `rays` with the
/// half-space `h·x ≥ 0`. Returns a (possibly redundant) generating set.
fn dd_step(rays: &[Vec<BigInt>], h: &[BigInt]) -> Vec<Vec<BigInt>> {
    let vals: Vec<BigInt> = rays.iter().map(|r| dot(h, r)).collect();
    let mut out: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for (r, v) in rays.iter().zip(&vals) {
        if !v.is_negative() {
            out.insert(primitive(r));
        }
    }
    for (i, (ri, vi)) in rays.iter().zip(&vals).enumerate() {
        if !vi.is_positive() {
            continue;
        }
        for (rj, vj) in rays.iter().zip(&vals).skip(i + 1) {
            if !vj.is_negative() {
                continue;
            }
            // combination on the boundary: vi * rj - vj * ri
            let mixed: Vec<BigInt> =
                ri.iter().zip(rj).map(|(a, b)| vi * b - vj * a).collect();
            if mixed.iter().any(|x| !x.is_zero()) {
                out.insert(primitive(&mixed));
            }
        }
    }
    out.into_iter().collect()
}

/// Generators of `σ(g1) ∩ σ(g2)` by double description (exact).
pub fn intersect_cones(g1: &IntMatrix, g2: &IntMatrix) -> Vec<Vec<BigInt>> {
    let mut rays: Vec<Vec<BigInt>> = (0..g1.n()).map(|j| primitive(&g1.column(j))).collect();
    for h in halfspaces(g2) {
        rays = dd_step(&rays, &h);
        if rays.is_empty() {
            break;
        }
    }
    rays
}

/// Verifies the fan property: every pair of maximal cones intersects in the
/// cone spanned by their shared generator columns. Rank is limited by
/// `FAN_RANK_LIMIT`.
pub fn verify_fan(fan: &GFan) -> Result<FanReport> {
    let n = fan.b0.n();
    if n > FAN_RANK_LIMIT {
        return Err(Error::RankUnsupported { n, limit: FAN_RANK_LIMIT });
    }
    verify_cone_family(fan.max_cones())
}

/// Same check on an arbitrary family of unimodular cone generator matrices.
pub fn verify_cone_family(max_cones: &[IntMatrix]) -> Result<FanReport> {
    let mut report = FanReport { pairs_checked: 0, failures: Vec::new() };
    for (a, g1) in max_cones.iter().enumerate() {
        for g2 in max_cones.iter().skip(a + 1) {
            report.pairs_checked += 1;
            let inter = intersect_cones(g1, g2);
            // shared generator columns
            let cols1: BTreeSet<Vec<BigInt>> =
                (0..g1.n()).map(|j| primitive(&g1.column(j))).collect();
            let cols2: BTreeSet<Vec<BigInt>> =
                (0..g2.n()).map(|j| primitive(&g2.column(j))).collect();
            let shared: Vec<Vec<BigInt>> = cols1.intersection(&cols2).cloned().collect();
            let subset: Vec<usize> = (0..g1.n())
                .filter(|&j| shared.contains(&primitive(&g1.column(j))))
                .collect();
            // every intersection generator must lie in the shared face
            for r in &inter {
                if !in_unimodular_face(g1, &subset, r) {
                    report.failures.push(format!(
                        "cones {g1} and {g2} intersect outside their common face (ray {r:?})"
                    ));
                    break;
                }
            }
        }
    }
    Ok(report)
}

/// Piecewise-linear / linear maps between fans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlVariant {
    /// `φ_{t0}^{t1}`: `(J_k + [±B]_+^{•k}) v` depending on the sign of `v_k`.
    Phi,
    /// `T_{k;t0}`: `(I + B^{•k}) v` on `v_k ≥ 0`, identity otherwise.
    T,
    /// `S_{k;t0}`: the linear map `(I + B^{•k}) v`.
    S,
    /// `η_{t0}^{t1}`: the linear map `(J_k + [-B]_+^{•k}) v`.
    Eta,
}

fn apply_int_matrix(m: &IntMatrix, v: &[BigRational]) -> Vec<BigRational> {
    (0..m.n())
        .map(|i| {
            let mut acc = BigRational::zero();
            for (j, x) in v.iter().enumerate() {
                acc += BigRational::from(m.get(i, j).clone()) * x;
            }
            acc
        })
        .collect()
}

/// Evaluates the chosen map at a rational vector.
pub fn pl_map(
    b0: &ExchangeMatrix,
    k: usize,
    variant: PlVariant,
    v: &[BigRational],
) -> Result<Vec<BigRational>> {
    let n = b0.n();
    if k >= n {
        return Err(Error::DirectionOutOfRange { k, n });
    }
    let b = b0.matrix();
    let jk = IntMatrix::j_k(n, k);
    let id = IntMatrix::identity(n);
    let m = match variant {
        PlVariant::Phi => {
            if v[k] >= BigRational::zero() {
                jk.add(&b.plus_part().col_only(k))
            } else {
                jk.add(&b.neg().plus_part().col_only(k))
            }
        }
        PlVariant::T => {
            if v[k] >= BigRational::zero() {
                id.add(&b.col_only(k))
            } else {
                id
            }
        }
        PlVariant::S => id.add(&b.col_only(k)),
        PlVariant::Eta => jk.add(&b.neg().plus_part().col_only(k)),
    };
    Ok(apply_int_matrix(&m, v))
}

/// Integer-vector convenience wrapper around `pl_map`.
pub fn pl_map_int(
    b0: &ExchangeMatrix,
    k: usize,
    variant: PlVariant,
    v: &[BigInt],
) -> Result<Vec<BigInt>> {
    let vr: Vec<BigRational> = v.iter().map(|x| BigRational::from(x.clone())).collect();
    let out = pl_map(b0, k, variant, &vr)?;
    Ok(out
        .into_iter()
        .map(|x| {
            assert!(x.is_integer());
            x.to_integer()
        })
        .collect())
}

/// Sign of `a + b·sqrt(s)` for integers `a, b` and a positive integer `s`,
/// computed with integer arithmetic only.
pub fn sign_with_sqrt(a: &BigInt, b: &BigInt, s: &BigInt) -> i8 {
    assert!(s.is_positive());
    let sa: i8 = if a.is_positive() {
        1
    } else if a.is_negative() {
        -1
    } else {
        0
    };
    let sb: i8 = if b.is_positive() {
        1
    } else if b.is_negative() {
        -1
    } else {
        0
    };
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    // opposite signs: compare a^2 with b^2 s
    let lhs = a * a;
    let rhs = b * b * s;
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => sa,
        std::cmp::Ordering::Less => sb,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Row sign-coherence restated geometrically: no G-cone interior meets a
/// coordinate hyperplane.
pub fn cone_interiors_avoid_axes(fan: &GFan) -> bool {
    fan.g_matrices
        .iter()
        .all(|g| (0..g.n()).all(|i| coherent_sign(&g.row(i)).is_ok()))
}
