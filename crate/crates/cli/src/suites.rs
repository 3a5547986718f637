//! Verification suites: each runs a batch of identity checks over seeded
//! random corpora or the fixed rank-2 catalogs, and reports per-case
//! pass/fail lines sorted by case id.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use cluster_scatter::corpus;
use cluster_scatter::fan::{self, PlVariant};
use cluster_scatter::matrix::coherent_sign;
use cluster_scatter::pattern::{
    self, dual_mutate_initial, evaluate_walk, evaluate_walk_eps, Walk,
};
use cluster_scatter::poly::{Alphabet, LaurentPoly, SubtractionFreeRational, TropicalMonomial};
use cluster_scatter::scattering::{
    check_consistency_rank2, cluster_walls, complete_rank2, equivalent_rank2, mutate_diagram,
    normalize, path_ordered_product, ray_atlas, segment_crossings, TruncatedSeries,
};
use cluster_scatter::separation;
use cluster_scatter::theta::theta;
use cluster_scatter::ExchangeMatrix;

use crate::CliError;
use rand::Rng;

pub struct SuiteReport {
    pub name: String,
    pub cases: Vec<(String, bool, String)>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport { name: name.into(), cases: Vec::new() }
    }

    fn case(&mut self, id: String, ok: bool, note: impl Into<String>) {
        self.cases.push((id, ok, note.into()));
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(|(_, ok, _)| *ok)
    }

    pub fn render(&self) -> String {
        let mut cases = self.cases.clone();
        cases.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = format!("suite {}\n", self.name);
        for (id, ok, note) in &cases {
            let mark = if *ok { "ok" } else { "FAIL" };
            if note.is_empty() {
                out.push_str(&format!("  {id}: {mark}\n"));
            } else {
                out.push_str(&format!("  {id}: {mark} ({note})\n"));
            }
        }
        let failed = self.cases.iter().filter(|(_, ok, _)| !ok).count();
        out.push_str(&format!(
            "summary: {} checks, {} failed\n",
            self.cases.len(),
            failed
        ));
        out
    }
}

pub const SUITES: &[&str] = &[
    "dualities",
    "sign-coherence",
    "laurent",
    "tropical",
    "fan",
    "pl-maps",
    "fock-goncharov",
    "consistency-rank2",
    "mutation",
    "theta",
    "applications",
];

pub fn run_suite(name: &str, seed: u64, budget: usize) -> Result<Vec<SuiteReport>, CliError> {
    let all: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name] };
    let mut reports = Vec::new();
    for suite in all {
        let report = match suite {
            "dualities" => dualities(seed, budget),
            "sign-coherence" => sign_coherence(seed, budget),
            "laurent" => laurent(seed, budget.min(100)),
            "tropical" => tropical(seed, budget),
            "fan" => fan_suite(seed, budget.min(8)),
            "pl-maps" => pl_maps(seed, budget),
            "fock-goncharov" => fock_goncharov(seed, budget.min(6)),
            "consistency-rank2" => consistency_rank2(),
            "mutation" => mutation_suite(),
            "theta" => theta_suite(),
            "applications" => applications(),
            other => {
                return Err(CliError::usage(format!(
                    "unknown suite {other:?}; known: {} or \"all\"",
                    SUITES.join(", ")
                )))
            }
        }
        .map_err(CliError::internal)?;
        reports.push(report);
    }
    Ok(reports)
}

type SuiteResult = cluster_scatter::Result<SuiteReport>;

fn dualities(seed: u64, budget: usize) -> SuiteResult {
    let mut rng = corpus::rng(seed);
    let mut report = SuiteReport::new("dualities");
    for case in 0..budget {
        let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 10, 10, 24);
        let p = evaluate_walk(&b0, &walk)?;
        let n = b0.n();
        let mut ok = true;
        let mut note = String::new();
        // first duality
        if p.g_t().mul(p.b_t().matrix()) != b0.matrix().mul(p.c_t()) {
            ok = false;
            note = "first duality".into();
        }
        // second duality via the pairing form
        if ok && !separation::pairing_identities_check(&p) {
            ok = false;
            note = "second duality".into();
        }
        // unimodularity
        let (dc, dg) = (p.c_t().det(), p.g_t().det());
        if ok && (!dc.magnitude().is_one() || dc != dg) {
            ok = false;
            note = "unimodularity".into();
        }
        // third duality via the transposed pattern
        if ok {
            let bt = ExchangeMatrix::new(p.b_t().matrix().transpose())
                .expect("transpose is skew-symmetrizable");
            let rev = Walk::new(walk.directions().iter().rev().cloned().collect());
            let tilde = evaluate_walk(&bt, &rev)?;
            if p.c_t() != &tilde.g_t().transpose() || p.g_t() != &tilde.c_t().transpose() {
                ok = false;
                note = "third duality".into();
            }
        }
        // cbc identity: C^T (D B0) C = D B_t entrywise over rationals
        if ok {
            let d = b0.skew();
            'cbc: for i in 0..n {
                for j in 0..n {
                    let mut acc = BigRational::from(BigInt::from(0));
                    for a in 0..n {
                        for b in 0..n {
                            acc += BigRational::new(
                                p.c_t().get(a, i) * b0.get(a, b) * p.c_t().get(b, j),
                                d.d_i(a).clone(),
                            );
                        }
                    }
                    if acc != BigRational::new(p.b_t().get(i, j).clone(), d.d_i(i).clone()) {
                        ok = false;
                        note = "cbc identity".into();
                        break 'cbc;
                    }
                }
            }
        }
        // ε-independence
        if ok {
            let p_minus = evaluate_walk_eps(&b0, &walk, -1)?;
            if p.c_t() != p_minus.c_t() || p.g_t() != p_minus.g_t() {
                ok = false;
                note = "eps independence".into();
            }
        }
        report.case(format!("case-{case:04}"), ok, note);
    }
    Ok(report)
}

fn sign_coherence(seed: u64, budget: usize) -> SuiteResult {
    let mut rng = corpus::rng(seed);
    let mut report = SuiteReport::new("sign-coherence");
    for case in 0..budget {
        let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 10, 10, 24);
        let p = evaluate_walk(&b0, &walk)?;
        let mut ok = true;
        let mut note = String::new();
        for i in 0..b0.n() {
            if p.tropical_sign(i).is_err() {
                ok = false;
                note = format!("C column {i} not sign-coherent");
                break;
            }
            if coherent_sign(&p.g_t().row(i)).is_err() {
                ok = false;
                note = format!("G row {i} not sign-coherent");
                break;
            }
            if !p.f(i).constant_term().is_one() {
                ok = false;
                note = format!("F[{i}] constant term != 1");
                break;
            }
            if !p.f(i).has_nonnegative_coeffs() {
                ok = false;
                note = format!("F[{i}] has a negative coefficient");
                break;
            }
        }
        report.case(format!("case-{case:04}"), ok, note);
    }
    Ok(report)
}

fn laurent(seed: u64, budget: usize) -> SuiteResult {
    let mut rng = corpus::rng(seed);
    let mut report = SuiteReport::new("laurent");
    for case in 0..budget {
        let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 8, 8, 16);
        let n = b0.n();
        let mut xs: Vec<LaurentPoly> =
            (0..n).map(|i| LaurentPoly::variable(n, i, Alphabet::X)).collect();
        let mut b = b0.clone();
        let mut ok = true;
        let mut note = String::new();
        for &k in walk.directions() {
            match separation::mutate_x_direct(&xs, b.matrix(), k) {
                Ok(next) => xs = next,
                Err(e) => {
                    ok = false;
                    note = format!("inexact division: {e}");
                    break;
                }
            }
            b = b.mutate(k, 1)?;
        }
        if ok {
            let p = evaluate_walk(&b0, &walk)?;
            for i in 0..n {
                let sep = separation::x_variable(&p, i)?;
                if xs[i] != sep {
                    ok = false;
                    note = format!("oracle mismatch at x[{i}]");
                    break;
                }
                if !xs[i].has_nonnegative_coeffs() {
                    ok = false;
                    note = format!("negative coefficient in x[{i}]");
                    break;
                }
            }
        }
        report.case(format!("case-{case:04}"), ok, note);
    }
    Ok(report)
}

fn tropical(seed: u64, budget: usize) -> SuiteResult {
    let mut rng = corpus::rng(seed);
    let mut report = SuiteReport::new("tropical");
    // the worked three-variable example
    {
        let mut num = LaurentPoly::zero(3, Alphabet::Y);
        num.add_term(vec![1, 2, 2], BigInt::from(3));
        num.add_term(vec![2, 1, 1], BigInt::from(2));
        let mut den = LaurentPoly::zero(3, Alphabet::Y);
        den.add_term(vec![0, 2, 0], BigInt::from(3));
        den.add_term(vec![2, 2, 0], BigInt::from(1));
        den.add_term(vec![1, 3, 1], BigInt::from(1));
        let r = SubtractionFreeRational::new(num, den);
        let got = separation::tropicalize(&r);
        report.case(
            "worked-example".into(),
            got == TropicalMonomial(vec![1, -1, 1]),
            "",
        );
    }
    for case in 0..budget {
        let (b0, walk) = corpus::random_bounded_case(&mut rng, 4, 8, 8, 16);
        let p = evaluate_walk(&b0, &walk)?;
        let mut ok = true;
        let mut note = String::new();
        for i in 0..b0.n() {
            let f = SubtractionFreeRational::from_poly(p.f(i).to_laurent(Alphabet::Y));
            if separation::tropicalize(&f) != TropicalMonomial(vec![0; b0.n()]) {
                ok = false;
                note = format!("pi_trop(F[{i}]) != 1");
                break;
            }
            let y = separation::y_variable(&p, i)?;
            let c: Vec<i64> = p
                .c_vector(i)
                .iter()
                .map(|x| i64::try_from(x.clone()).unwrap())
                .collect();
            if separation::tropicalize(&y) != TropicalMonomial(c) {
                ok = false;
                note = format!("pi_trop(y[{i}]) != y^c");
                break;
            }
        }
        report.case(format!("case-{case:04}"), ok, note);
    }
    Ok(report)
}

fn fan_suite(seed: u64, budget: usize) -> SuiteResult {
    let mut report = SuiteReport::new("fan");
    let catalog: [(&str, Vec<Vec<i64>>, usize, bool); 5] = [
        ("A2", vec![vec![0, -1], vec![1, 0]], 8, true),
        ("B2", vec![vec![0, -1], vec![2, 0]], 10, true),
        ("G2", vec![vec![0, -1], vec![3, 0]], 12, true),
        ("A1-affine", vec![vec![0, -2], vec![2, 0]], 12, false),
        ("A2-affine2", vec![vec![0, -1], vec![4, 0]], 12, false),
    ];
    for (name, rows, depth, complete) in catalog {
        let b = ExchangeMatrix::from_rows(&rows).expect("catalog matrix");
        let f = fan::build_g_fan(&b, depth)?;
        let mut ok = f.is_complete() == complete;
        let mut note = if ok { String::new() } else { "completeness flag".into() };
        if ok {
            let rep = fan::verify_fan(&f)?;
            if !rep.passed() {
                ok = false;
                note = format!("fan property: {}", rep.failures.len());
            }
        }
        report.case(format!("catalog-{name}"), ok, note);
    }
    // non-affine rank 2 is incomplete at any depth
    {
        let b = ExchangeMatrix::from_rows(&[vec![0, -3], vec![2, 0]]).expect("matrix");
        let f = fan::build_g_fan(&b, 10)?;
        report.case("catalog-nonaffine".into(), !f.is_complete(), "");
    }
    let mut rng = corpus::rng(seed);
    for case in 0..budget {
        let b0 = corpus::random_exchange_matrix(&mut rng, 3, 2);
        let f = fan::build_g_fan(&b0, 5)?;
        let rep = fan::verify_fan(&f)?;
        report.case(
            format!("random-rank3-{case:03}"),
            rep.passed() && fan::cone_interiors_avoid_axes(&f),
            format!("{} pairs", rep.pairs_checked),
        );
    }
    Ok(report)
}

fn pl_maps(seed: u64, budget: usize) -> SuiteResult {
    let mut rng = corpus::rng(seed);
    let mut report = SuiteReport::new("pl-maps");
    for case in 0..budget {
        let n = rng.gen_range(2..=4);
        let b0 = corpus::random_exchange_matrix(&mut rng, n, 3);
        let k = rng.gen_range(0..n);
        let v: Vec<BigRational> = (0..n)
            .map(|_| {
                BigRational::new(
                    BigInt::from(rng.gen_range(-20..=20i64)),
                    BigInt::from(rng.gen_range(1..=7i64)),
                )
            })
            .collect();
        let phi = fan::pl_map(&b0, k, PlVariant::Phi, &v)?;
        let t = fan::pl_map(&b0, k, PlVariant::T, &v)?;
        let eta_t = fan::pl_map(&b0, k, PlVariant::Eta, &t)?;
        let mut ok = phi == eta_t;
        let mut note = if ok { String::new() } else { "phi != eta∘T".into() };
        if ok {
            let b1 = b0.mutate(k, 1)?;
            let back = fan::pl_map(&b1, k, PlVariant::Phi, &phi)?;
            if back != v {
                ok = false;
                note = "phi involution".into();
            }
        }
        report.case(format!("case-{case:04}"), ok, note);
    }
    // cone transport on a bounded pattern corpus
    for case in 0..budget.min(20) {
        let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 6, 8, 16);
        let p = evaluate_walk(&b0, &walk)?;
        let k = rng.gen_range(0..b0.n());
        let rebased = dual_mutate_initial(&p, k)?;
        let mut ok = true;
        for i in 0..b0.n() {
            let img = fan::pl_map_int(&b0, k, PlVariant::Phi, &p.g_vector(i))?;
            if img != rebased.g_vector(i) {
                ok = false;
                break;
            }
        }
        report.case(format!("transport-{case:04}"), ok, "");
    }
    Ok(report)
}

fn fock_goncharov(seed: u64, budget: usize) -> SuiteResult {
    let mut rng = corpus::rng(seed);
    let mut report = SuiteReport::new("fock-goncharov");
    for case in 0..budget {
        let (b0, walk) = corpus::random_bounded_case(&mut rng, 3, 3, 4, 6);
        let fg = separation::fock_goncharov_check(&b0, &walk)?;
        report.case(
            format!("case-{case:04}"),
            fg.passed(),
            format!("{} checks", fg.checks),
        );
    }
    Ok(report)
}

fn rank2_catalog() -> [(&'static str, Vec<Vec<i64>>); 5] {
    [
        ("A2", vec![vec![0, -1], vec![1, 0]]),
        ("B2", vec![vec![0, -1], vec![2, 0]]),
        ("G2", vec![vec![0, -1], vec![3, 0]]),
        ("A1-affine", vec![vec![0, -2], vec![2, 0]]),
        ("A2-affine2", vec![vec![0, -1], vec![4, 0]]),
    ]
}

fn consistency_rank2() -> SuiteResult {
    let mut report = SuiteReport::new("consistency-rank2");
    for (name, rows) in rank2_catalog() {
        let b = ExchangeMatrix::from_rows(&rows).expect("catalog matrix");
        let d = complete_rank2(&b, 8)?;
        let consistent = check_consistency_rank2(&d)?;
        report.case(format!("complete-{name}"), consistent, "");
        // the cluster part embeds with identical supports and functions
        let cl = normalize(&cluster_walls(&b, 12, 8)?);
        let atlas_cl = ray_atlas(&cl)?;
        let atlas = ray_atlas(&d)?;
        let embeds = atlas_cl.iter().all(|(ray, f)| atlas.get(ray) == Some(f));
        report.case(format!("cluster-embeds-{name}"), embeds, "");
        // positive normals
        let positive = d
            .walls()
            .iter()
            .all(|w| w.function.dir().iter().all(|&x| x >= 0));
        report.case(format!("positive-normals-{name}"), positive, "");
    }
    // the A2 path-ordered products along the two standard curves
    {
        let b = ExchangeMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).expect("A2");
        let d = complete_rank2(&b, 8)?;
        let find = |dir: &[i64]| {
            d.walls().iter().position(|w| w.function.dir() == dir).expect("wall")
        };
        let g1 = vec![(find(&[1, 0]), 1i8), (find(&[0, 1]), 1)];
        let g2 = vec![(find(&[0, 1]), 1i8), (find(&[1, 1]), 1), (find(&[1, 0]), 1)];
        let mut ok = true;
        for base in [vec![1i64, 0], vec![0, 1]] {
            let s = TruncatedSeries::monomial(base, 8);
            if path_ordered_product(&d, &g1, &s)? != path_ordered_product(&d, &g2, &s)? {
                ok = false;
            }
        }
        report.case("a2-gamma-products".into(), ok, "");
    }
    Ok(report)
}

fn mutation_suite() -> SuiteResult {
    let mut report = SuiteReport::new("mutation");
    for (name, rows) in rank2_catalog() {
        let b0 = ExchangeMatrix::from_rows(&rows).expect("catalog matrix");
        for k in 0..2 {
            let b1 = b0.mutate(k, 1)?;
            let target = normalize(&complete_rank2(&b1, 8)?);
            // generous source truncation covers the preimage degrees for
            // these catalogs (|b| <= 4, target degree <= 8)
            let src = complete_rank2(&b0, 24)?;
            let mutated = mutate_diagram(&src, k)?.truncated(8);
            let ok = equivalent_rank2(&mutated, &target)?;
            report.case(format!("tk-eta-{name}-k{}", k + 1), ok, "");
        }
    }
    Ok(report)
}

fn theta_suite() -> SuiteResult {
    let mut report = SuiteReport::new("theta");
    let ell = 8;
    let q = vec![
        BigRational::new(BigInt::from(5), BigInt::from(3)),
        BigRational::new(BigInt::from(2), BigInt::from(7)),
    ];
    let q2 = vec![
        BigRational::new(BigInt::from(-7), BigInt::from(2)),
        BigRational::new(BigInt::from(-4), BigInt::from(5)),
    ];
    for (name, rows) in rank2_catalog().iter().take(4) {
        let b = ExchangeMatrix::from_rows(rows).expect("catalog matrix");
        let d = complete_rank2(&b, ell)?;
        // chamber monomial
        let r = theta(&d, &[2, 1], &q, ell)?;
        report.case(
            format!("chamber-{name}"),
            r.series.is_bare_monomial() && r.lines.len() == 1,
            "",
        );
        // transport
        let crossings = segment_crossings(&d, &q, &q2)?;
        let mut ok = true;
        for m0 in [[1i64, -1], [-1, 2], [2, 1]] {
            let from = theta(&d, &m0, &q, ell)?;
            let to = theta(&d, &m0, &q2, ell)?;
            if path_ordered_product(&d, &crossings, &from.series)? != to.series {
                ok = false;
            }
        }
        report.case(format!("transport-{name}"), ok, "");
        // positivity
        let mut ok = true;
        for m0 in [[1i64, -1], [-1, -1], [0, 1], [3, -2]] {
            let r = theta(&d, &m0, &q, ell)?;
            if !r.series.has_nonnegative_coeffs() {
                ok = false;
            }
        }
        report.case(format!("positivity-{name}"), ok, "");
    }
    // cluster identity over the finite types
    for (name, rows) in rank2_catalog().iter().take(3) {
        let b = ExchangeMatrix::from_rows(rows).expect("catalog matrix");
        let d = complete_rank2(&b, ell)?;
        let pts = pattern::enumerate_pattern(&b, 200)?;
        let mut ok = true;
        'outer: for p in &pts {
            for i in 0..2 {
                let g: Vec<i64> = p
                    .g_vector(i)
                    .iter()
                    .map(|x| i64::try_from(x.clone()).unwrap())
                    .collect();
                let r = theta(&d, &g, &q, ell)?;
                for (e, c) in p.f(i).terms() {
                    if e.iter().sum::<i64>() <= ell && &r.series.coefficient(e) != c {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        report.case(format!("cluster-identity-{name}"), ok, format!("{} vertices", pts.len()));
    }
    Ok(report)
}

fn applications() -> SuiteResult {
    let mut report = SuiteReport::new("applications");
    for (name, rows, expect_vars) in [
        ("A2", vec![vec![0, -1], vec![1, 0]], Some(5)),
        ("B2", vec![vec![0, -1], vec![2, 0]], Some(6)),
        ("G2", vec![vec![0, -1], vec![3, 0]], Some(8)),
        ("A3", vec![vec![0, -1, 0], vec![1, 0, -1], vec![0, 1, 0]], None),
    ] {
        let b = ExchangeMatrix::from_rows(&rows).expect("catalog matrix");
        let pts = pattern::enumerate_pattern(&b, 400)?;
        let distinct = separation::g_vector_bijection_check(&pts)?;
        let ok = expect_vars.map_or(true, |e| distinct == e);
        report.case(format!("gx-bijection-{name}"), ok, format!("{distinct} variables"));
        let related = separation::detropicalization_check(&pts)?;
        report.case(format!("detropicalization-{name}"), true, format!("{related} pairs"));
    }
    Ok(report)
}
