//! Acceptance run: one line per criterion with its verdict, elapsed time and time limit.
//!
//! Criteria that are printed but not asserted are marked `info`; every other failure makes
//! the process exit with status 1.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use padic_soliton::combinat::{hook_schur_value, maya_to_pair, pair_to_maya, schur, MayaDiagram, Partition};
use padic_soliton::curve::{search_affine_instance, BasePoint, BranchFactor, CurveModel, DivisorPoint};
use padic_soliton::grassmann::{GrassPoint, Integrality};
use padic_soliton::padic::{PadicElement, PadicField};
use padic_soliton::series::LaurentSeries;
use padic_soliton::soliton::{
    artin_hasse_coefficients, artin_hasse_loop, artin_hasse_multi, certify_torsion_point, closure_element,
    decompose_frobenius_curve, formal_log, gamma_a_filtration_probe, solve_torsion_cyclic, solve_torsion_full,
    verify_pn_torsion, Component, CyclicTorsion, DominanceCase, FormalLog, PnContext, PnWindow, SolitonError,
    TorsionCertificate, Verdict,
};

/// Outcome of one criterion.
struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Outcome { ok, detail: detail.into() }
    }
}

/// Collects failed sub-checks of a criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn outcome(self, summary: impl Into<String>) -> Outcome {
        let summary = summary.into();
        if self.failures.is_empty() {
            Outcome::new(true, format!("{summary}; {} checks", self.count))
        } else {
            let shown: Vec<&str> = self.failures.iter().take(3).map(String::as_str).collect();
            Outcome::new(false, format!("{summary}; {} of {} checks failed: {}", self.failures.len(), self.count, shown.join("; ")))
        }
    }
}

struct Runner {
    failed: usize,
    /// Criteria selected on the command line; empty selects all.
    only: Vec<u32>,
}

impl Runner {
    fn run(&mut self, id: u32, name: &str, limit: Option<Duration>, asserted: bool, f: impl FnOnce() -> Outcome) {
        if !self.only.is_empty() && !self.only.contains(&id) {
            return;
        }
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = limit.map_or(true, |l| elapsed <= l);
        let ok = out.ok && in_time;
        let verdict = if ok { "PASS" } else { "FAIL" };
        let limit_s = limit.map_or_else(|| "none".to_string(), |l| format!("{} s", l.as_secs()));
        let mark = if asserted { "" } else { " (info, not asserted)" };
        let late = if in_time { "" } else { " [time limit exceeded]" };
        println!(
            "criterion {id:>2} {verdict}{mark} {name}: {} [{:.2} s, limit {limit_s}]{late}",
            out.detail,
            elapsed.as_secs_f64()
        );
        if asserted && !ok {
            self.failed += 1;
        }
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn canonical(n: u32) -> CurveModel {
    CurveModel::fermat_quotient(5, 2, PadicField::qp(11, n).unwrap()).unwrap()
}

fn frac(n: i64, d: i64) -> Ratio<i64> {
    Ratio::new(n.rem_euclid(d), d)
}

/// Gaps of `O(j(P₀ − P₁))` on `y^d = x^a (x−1)^{d+1−a}` from the fractional-part criterion.
fn fractional_part_gaps(d: i64, a: i64, j: i64) -> Vec<i64> {
    let b = d + 1 - a;
    (0..d).filter(|&i| frac(i * a + j, d) + frac(i * b - j, d) - frac(i, d) == Ratio::from(1)).collect()
}

fn binom_mod(n: u64, k: u64, m: u128) -> u128 {
    let v: BigInt = binomial(BigInt::from(n), BigInt::from(k)) % BigInt::from(m);
    u128::try_from(v).unwrap()
}

fn twist(j: i64) -> [(DivisorPoint, i64); 2] {
    [(DivisorPoint::integral(0), j), (DivisorPoint::integral(1), -j)]
}

fn criterion_1() -> Outcome {
    let mut c = Checks::default();
    let can = canonical(8);
    let (a, gd) = can.affine_ring(12).unwrap();
    let ring_gaps: Vec<i64> = (0..=12).filter(|&n| !a.maya().contains(n)).collect();
    c.check(ring_gaps == [1, 2] && gd.gaps == [1, 2], || format!("canonical gaps {ring_gaps:?}"));
    let mut cases = 0;
    for d in [5u32, 7] {
        for a in 2..d {
            let curve = CurveModel::fermat_quotient(d, a, PadicField::qp(29, 6).unwrap()).unwrap();
            let cap = 2 * curve.genus() as i64 + 2 * d as i64;
            for j in 0..d as i64 {
                let expect = fractional_part_gaps(d as i64, a as i64, j);
                match curve.krichever_subspace(&twist(j), cap) {
                    Ok(v) => {
                        let gaps: Vec<i64> = (0..=cap).filter(|&n| !v.maya().contains(n)).collect();
                        c.check(gaps == expect, || format!("d = {d}, a = {a}, j = {j}: {gaps:?} vs {expect:?}"));
                    }
                    Err(e) => c.check(false, || format!("d = {d}, a = {a}, j = {j}: {e}")),
                }
                cases += 1;
            }
        }
    }
    c.outcome(format!("canonical gaps {{1, 2}}; {cases} twisted subspaces against the fractional-part oracle"))
}

fn criterion_2() -> Outcome {
    let mut c = Checks::default();
    let curve = canonical(24);
    let m = 11u128.pow(24);
    for k in 1..=30i64 {
        let dec = curve.power_matrix_mod(m, k).unwrap();
        let herm = curve.hermite_power_matrix_mod(m, k).unwrap();
        c.check(dec == herm, || format!("m = {k}"));
    }
    c.outcome("decomposition and Hermite pipelines agree mod 11^24 for 1 ≤ m ≤ 30")
}

/// `e₁₁^{(k)}` for `k = 1, 2` modulo `p^n`.
fn log_entries(curve: &CurveModel, p: u64, n: u32) -> [u128; 2] {
    let m = (p as u128).pow(n);
    [1, 2].map(|k| curve.power_matrix_mod(m, (p as i64).pow(k)).unwrap()[0][0])
}

fn formula_check(c: &mut Checks, label: &str, curve: &CurveModel, p: u64, n: u32, top: impl Fn(u64) -> (u64, u64)) {
    let m = (p as u128).pow(n);
    let got = log_entries(curve, p, n);
    for k in [1u32, 2] {
        let (t, b) = top(p.pow(k) - 1);
        let want = binom_mod(t, b, m);
        c.check(got[k as usize - 1] == want, || format!("{label}, k = {k}: {} vs binom({t}, {b})", got[k as usize - 1]));
    }
}

fn criterion_3() -> (Outcome, Outcome) {
    let mut c = Checks::default();
    let can = canonical(24);
    formula_check(&mut c, "y^5 = x^2(x-1)^4", &can, 11, 24, |q| (q * 4 / 5, q / 5));
    c.check(log_entries(&can, 11, 24)[0] == 28, || "canonical k = 1 value is not 28".into());
    let x5x = CurveModel::hyperelliptic_x_power(2, PadicField::qp(17, 20).unwrap()).unwrap();
    formula_check(&mut c, "y^2 = x^5 + x", &x5x, 17, 20, |q| (q / 2, q / 8));
    c.check(log_entries(&x5x, 17, 20)[0] == 28, || "x^5 + x at p = 17: k = 1 value is not binom(8, 2)".into());
    let fermat = CurveModel::new(3, vec![BranchFactor::new(&[1, 0, 0, 0, 1], 1)], BasePoint::Infinity, PadicField::qp(13, 20).unwrap())
        .unwrap();
    formula_check(&mut c, "y^3 = x^4 + 1", &fermat, 13, 20, |q| (q / 3, q / 4));
    let third = CurveModel::new(
        3,
        vec![BranchFactor::linear(0, 2), BranchFactor::new(&[1, 0, 1], 1)],
        BasePoint::Infinity,
        PadicField::qp(7, 20).unwrap(),
    )
    .unwrap();
    // Independent series oracle for l = 3, b = 1: e₁₁^{(k)} = binom(2K, K) with K = (p^k − 1)/6.
    formula_check(&mut c, "y^3 = x^2(x^2+1), derived", &third, 7, 20, |q| (q / 3, q / 6));
    let derived = c.outcome("four families at k = 1, 2 (x^5 + x at p = 17 gives 28)");

    let mut lit = Checks::default();
    formula_check(&mut lit, "y^3 = x^2(x^2+1), closed form", &third, 7, 20, |q| (q / 3, q / 3));
    let got = log_entries(&third, 7, 20);
    let literal = lit.outcome(format!("binom((p^k-1)b/l, (p^k-1)(2b-1)/l) against computed values {} and {}", got[0], got[1]));
    (derived, literal)
}

/// The instances of criteria 3 and 11 with the order of their cyclic automorphism.
fn hasse_witt_instances() -> Vec<(String, CurveModel, Option<u64>)> {
    let inst = search_affine_instance(&[7, 11, 13], 2, 8).expect("affine instance");
    vec![
        ("y^5 = x^2(x-1)^4, p = 11".into(), canonical(8), Some(5)),
        ("y^2 = x^5 + x, p = 17".into(), CurveModel::hyperelliptic_x_power(2, PadicField::qp(17, 8).unwrap()).unwrap(), Some(8)),
        (
            "y^3 = x^4 + 1, p = 13".into(),
            CurveModel::new(3, vec![BranchFactor::new(&[1, 0, 0, 0, 1], 1)], BasePoint::Infinity, PadicField::qp(13, 8).unwrap())
                .unwrap(),
            Some(12),
        ),
        (
            "y^3 = x^2(x^2+1), p = 7".into(),
            CurveModel::new(
                3,
                vec![BranchFactor::linear(0, 2), BranchFactor::new(&[1, 0, 1], 1)],
                BasePoint::Infinity,
                PadicField::qp(7, 8).unwrap(),
            )
            .unwrap(),
            Some(6),
        ),
        (
            format!("affine genus two, p = {}", inst.p),
            CurveModel::new(
                2,
                vec![BranchFactor::new(&inst.f, 1)],
                BasePoint::Affine { x0: inst.x0, y0: inst.y0 },
                PadicField::qp(inst.p, 8).unwrap(),
            )
            .unwrap(),
            None,
        ),
    ]
}

fn criterion_4() -> Outcome {
    let mut c = Checks::default();
    let mut names = Vec::new();
    for (name, curve, delta) in hasse_witt_instances() {
        let hw = curve.hasse_witt().unwrap();
        c.check(hw.product_rule.iter().all(|(_, ok)| *ok), || format!("{name}: product rule {:?}", hw.product_rule));
        if let Some(m) = delta {
            c.check(curve.p() % m == 1 && hw.ordinary, || format!("{name}: not ordinary"));
        }
        names.push(name);
    }
    c.outcome(format!("product rule for k ≤ 3 and ordinarity on {} instances", names.len()))
}

fn canonical_log() -> FormalLog {
    formal_log(&decompose_frobenius_curve(&canonical(24), 3, -30).unwrap()).unwrap()
}

fn criterion_5(log: &FormalLog) -> (Outcome, Vec<CyclicTorsion>) {
    let mut c = Checks::default();
    let t1 = solve_torsion_cyclic(log, 0, 1).unwrap();
    let t2 = solve_torsion_cyclic(log, 0, 2).unwrap();
    let v1 = t1.valuation_counts();
    c.check(t1.roots.len() == 11 && v1.get(&Some(Ratio::new(1, 10))) == Some(&10), || format!("T_11 counts {v1:?}"));
    let v2 = t2.valuation_counts();
    c.check(t2.roots.len() == 121 && v2.get(&Some(Ratio::new(1, 110))) == Some(&110), || format!("T_21 counts {v2:?}"));
    for t in [&t1, &t2] {
        c.check(t.residuals_zero(), || format!("level {}: nonzero residual", t.level));
        c.check(t.distinct(), || format!("level {}: repeated roots", t.level));
        c.check(t.polygon_matches(), || format!("level {}: Newton polygon mismatch", t.level));
    }
    let full = solve_torsion_full(log, 12).unwrap();
    let minimal = full.count_with_valuation(1, Ratio::new(1, 10));
    c.check(full.points.len() == 121 && full.distinct() && full.residuals_zero(), || {
        format!("full T_1 has {} points", full.points.len())
    });
    c.check(minimal >= 110, || format!("only {minimal} points with |π_2| = |p|^(1/10)"));
    let out = c.outcome(format!(
        "|T_11| = 11 (10 at 1/10), |T_21| = 121 (110 at 1/110), full |T_1| = {} over f = {} with {minimal} minimal",
        full.points.len(),
        full.residue_degree
    ));
    (out, vec![t1, t2])
}

fn factorial(n: usize) -> BigRational {
    BigRational::from_integer((1..=n).fold(BigInt::one(), |a, b| a * BigInt::from(b)))
}

fn random_unit(rng: &mut ChaCha8Rng, f: &PadicField) -> PadicElement {
    let p = f.p() as i64;
    let high: i64 = rng.gen_range(0..p.pow(4));
    f.int(high * p + rng.gen_range(1..p))
}

fn criterion_6(rng: &mut ChaCha8Rng) -> Outcome {
    let mut c = Checks::default();
    for p in [5u64, 7, 11, 13] {
        let e = artin_hasse_coefficients(p, 200);
        c.check(e.iter().all(|x| x.denom() % BigInt::from(p) != BigInt::zero()), || format!("p = {p}: non-integral coefficient"));
    }
    let qp = PadicField::qp(11, 20).unwrap();
    let ram = PadicField::with_int_eisenstein(11, 1, Some(&[-11, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]), 20).unwrap();
    for trial in 0..50 {
        let f = if trial % 2 == 0 { &qp } else { &ram };
        let k = rng.gen_range(1..=3u64);
        let pi = f.uniformizer().pow(k).mul_ref(&random_unit(rng, f));
        let h = artin_hasse_loop(&pi, 40).unwrap();
        let vp = pi.valuation().unwrap();
        for (i, hi) in h.coeffs().iter().enumerate() {
            let bound = vp * Ratio::from_integer(i as i64);
            c.check(hi.valuation().map_or(true, |v| v >= bound), || format!("trial {trial}: |h_{i}| > |π|^{i}"));
            if i < 11 {
                let exact = pi.pow(i as u64).scale_rational(&factorial(i).recip());
                c.check(exact.eq_at_precision(hi), || format!("trial {trial}: h_{i} ≠ π^{i}/{i}!"));
            }
        }
    }
    c.outcome("integral coefficients through degree 200 for p ∈ {5, 7, 11, 13}; 50 random π")
}

fn criterion_7() -> Outcome {
    let mut c = Checks::default();
    let qp = PadicField::qp(11, 24).unwrap();
    let ram = PadicField::with_int_eisenstein(11, 1, Some(&[-11, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]), 12).unwrap();
    for pi in [qp.int(11), qp.int(33), ram.uniformizer(), ram.uniformizer().pow(3)] {
        let h = artin_hasse_loop(&pi, 16).unwrap();
        let mut values: BTreeMap<Partition, PadicElement> = BTreeMap::new();
        for lam in Partition::all_up_to(10) {
            if lam.weight() <= 6 {
                let s = schur(&lam, h.coeffs()).unwrap();
                let hook = hook_schur_value(&lam, &pi, 11).unwrap();
                c.check(s.eq_at_precision(&hook), || format!("π = {pi}: S_{lam} ≠ hook formula"));
            }
            values.insert(lam.clone(), schur(&lam, h.coeffs()).unwrap());
        }
        for (kappa, sk) in values.iter().filter(|(k, _)| k.weight() <= 6) {
            for (lam, sl) in &values {
                if lam != kappa && kappa.le(lam) && lam.weight() <= kappa.weight() + 4 {
                    let strict = match (sl.valuation(), sk.valuation()) {
                        (Some(a), Some(b)) => a > b,
                        _ => false,
                    };
                    c.check(strict, || format!("π = {pi}: |S_{lam}| not below |S_{kappa}|"));
                }
            }
        }
    }
    c.outcome("determinant against hook formula for |λ| ≤ 6 and strict dominance for 4 loops")
}

fn plucker_checks(c: &mut Checks, label: &str, v: &GrassPoint<PadicElement>) {
    let kappa = v.partition().clone();
    match v.plucker(&kappa) {
        Ok(x) => c.check(x.eq_at_precision(&v.field().one()), || format!("{label}: P_κ = {x}")),
        Err(e) => c.check(false, || format!("{label}: {e}")),
    }
    for lam in Partition::all_up_to(6) {
        if !kappa.le(&lam) {
            match v.plucker(&lam) {
                Ok(x) => c.check(x.is_zero(), || format!("{label}: P_{lam} = {x} with κ = {kappa}")),
                Err(e) => c.check(false, || format!("{label}: {e}")),
            }
        }
    }
}

fn criterion_8() -> Outcome {
    let mut c = Checks::default();
    let curve = canonical(12);
    let (a, _) = curve.affine_ring(16).unwrap();
    plucker_checks(&mut c, "A", &a);
    for j in 1..=5 {
        let v = curve.krichever_subspace(&twist(j), 16).unwrap();
        plucker_checks(&mut c, &format!("twist j = {j}"), &v);
    }
    c.outcome("P_κ = 1 and P_λ = 0 for λ ≱ κ, |λ| ≤ 6, on A and five twists")
}

/// Certificates for the nonzero roots of level 1 and the level-2 roots, plus the zero root.
fn certificates(torsion: &[CyclicTorsion], log: &FormalLog) -> Vec<Result<TorsionCertificate, SolitonError>> {
    let curve = canonical(24);
    let mut out = Vec::new();
    for (s, t) in [1u32, 2].into_iter().zip(torsion) {
        let (a, _) = curve.affine_ring_in(&t.field, 16, -4).unwrap();
        let report = curve.certify_strict_integrality(&a).unwrap();
        for r in t.roots.iter().filter(|r| r.level == s || (s == 1 && r.level == 0)) {
            out.push(certify_torsion_point(&a, &report, log, s, Component::Index(0), vec![r.value.clone()], 8, 6, vec![]));
        }
    }
    out
}

/// Certificates of criterion 9, computing the logarithm and the roots when criterion 5 did not
/// run.
fn certificates_for(
    log: &mut Option<FormalLog>,
    torsion: &mut Vec<CyclicTorsion>,
) -> Vec<Result<TorsionCertificate, SolitonError>> {
    let log = log.get_or_insert_with(canonical_log);
    if torsion.is_empty() {
        *torsion = [1, 2].map(|n| solve_torsion_cyclic(log, 0, n).unwrap()).into();
    }
    certificates(torsion, log)
}

fn criterion_9(certs: &[Result<TorsionCertificate, SolitonError>]) -> Outcome {
    let mut c = Checks::default();
    let (mut outside, mut member) = (0, 0);
    for (i, cert) in certs.iter().enumerate() {
        let cert = match cert {
            Ok(x) => x,
            Err(e) => {
                c.check(false, || format!("certificate {i}: {e}"));
                continue;
            }
        };
        let zero = cert.valuations.iter().all(Option::is_none);
        if zero {
            c.check(cert.verdict == Verdict::MemberOfTheta, || "zero point not on theta".into());
            member += usize::from(cert.verdict == Verdict::MemberOfTheta);
            continue;
        }
        let two = Partition::new(&[2]).unwrap();
        let rho_sq = cert.tau.rho_val.map(|r| r * 2);
        c.check(cert.verdict == Verdict::OutsideTheta, || format!("certificate {i}: {:?}", cert.verdict));
        c.check(cert.tau.kappa == two && cert.tau.exact && cert.tau.case == DominanceCase::SingleLoop, || {
            format!("certificate {i}: dominance {:?}", cert.tau.case)
        });
        c.check(rho_sq.is_some() && cert.tau.s_kappa_val == rho_sq, || format!("certificate {i}: |S_(2)| ≠ ρ²"));
        c.check(cert.window.full_rank, || format!("certificate {i}: window test found a low-degree vector"));
        c.check(cert.residual_zero && cert.valuation_ok, || format!("certificate {i}: not a torsion root"));
        outside += usize::from(cert.verdict == Verdict::OutsideTheta);
    }
    c.check(outside == 120 && member == 1, || format!("{outside} outside, {member} identity"));
    c.outcome(format!("{outside} OutsideTheta certificates (10 at level 1, 110 at level 2) and {member} identity on theta"))
}

fn pn_context(hi: i64) -> PnContext {
    let curve = canonical(24);
    let d = decompose_frobenius_curve(&curve, 3, -(hi + 12)).unwrap();
    let (a, gd) = curve.affine_ring_in(curve.field(), hi, -12).unwrap();
    PnContext::new(a, gd, d).unwrap()
}

fn criterion_10(certs: &[Result<TorsionCertificate, SolitonError>]) -> Outcome {
    let mut c = Checks::default();
    let contexts = [(1u32, pn_context(60), PnWindow { lo: -12, hi: 60 }), (2, pn_context(250), PnWindow { lo: -12, hi: 250 })];
    let mut checked = 0;
    let mut inequalities = 0;
    for cert in certs.iter().flatten().filter(|c| c.verdict == Verdict::OutsideTheta) {
        let (_, ctx, window) = contexts.iter().find(|(n, ..)| *n == cert.level).unwrap();
        let h = artin_hasse_multi(&cert.pis, &cert.mu, 4).unwrap();
        match verify_pn_torsion(ctx, &h, cert.level, *window) {
            Ok(ev) => {
                c.check(ev.passed(), || {
                    format!(
                        "level {}: norm {} inequalities {} window {} (worst {:?}, bound {:?})",
                        cert.level,
                        ev.norm_ok,
                        ev.inequalities_ok(),
                        ev.window_ok,
                        ev.worst_val,
                        ev.certified_val
                    )
                });
                inequalities += ev.inequalities.len();
            }
            Err(e) => c.check(false, || format!("level {}: {e}", cert.level)),
        }
        checked += 1;
    }
    c.check(checked == 120, || format!("{checked} certificates checked"));
    c.outcome(format!("h^(p^n) A = A at the window for {checked} certificates, {inequalities} norm inequalities with the predicted equality pattern"))
}

fn criterion_11() -> Outcome {
    let mut c = Checks::default();
    let Some(inst) = search_affine_instance(&[7, 11, 13], 2, 8) else {
        return Outcome::new(false, "no affine instance found");
    };
    let p = inst.p;
    let curve = CurveModel::new(
        2,
        vec![BranchFactor::new(&inst.f, 1)],
        BasePoint::Affine { x0: inst.x0, y0: inst.y0 },
        PadicField::qp(p, 20).unwrap(),
    )
    .unwrap();
    let gd = curve.gap_data().unwrap();
    c.check(gd.gaps == [1, 2] && curve.reduction_gap_data().unwrap() == gd, || "gap sequences differ from {1, 2}".into());
    c.check(curve.hasse_witt().unwrap().ordinary, || "not ordinary".into());
    c.check(inst.y0.rem_euclid(p as i64) != 0, || "base point is a Weierstrass point".into());
    let log = formal_log(&decompose_frobenius_curve(&curve, 2, -30).unwrap()).unwrap();
    let t = solve_torsion_full(&log, 12).unwrap();
    c.check(t.points.len() as u64 == p * p && t.distinct() && t.residuals_zero(), || format!("{} torsion points", t.points.len()));
    let (a, _) = curve.affine_ring_in(&t.field, 16, -4).unwrap();
    let report = curve.certify_strict_integrality(&a).unwrap();
    let mut certified = 0u64;
    for x in &t.points {
        let cert = certify_torsion_point(&a, &report, &log, 1, Component::Full, x.clone(), 8, 6, vec![]).unwrap();
        if cert.verdict == Verdict::OutsideTheta && cert.tau.case == DominanceCase::MultiLoop {
            certified += 1;
        }
    }
    c.check(certified >= p * p - p, || format!("{certified} < p² − p"));
    c.outcome(format!(
        "p = {p}, f = {:?}, base ({}, {}): {certified} of {} points certified with the multi-loop case",
        inst.f,
        inst.x0,
        inst.y0,
        t.points.len()
    ))
}

/// Standard-basis rows `T^n + (terms at non-member exponents)` for `0 ≤ n ≤ cap + 3`
/// outside `gaps`.
fn constructed_rows(rng: &mut ChaCha8Rng, k: &PadicField, gaps: &[i64], cap: i64) -> Vec<LaurentSeries> {
    let mut rows = Vec::new();
    for n in (0..=cap + 3).filter(|n| !gaps.contains(n)) {
        let mut terms = vec![(n, k.one())];
        for e in gaps.iter().copied().filter(|&g| g < n).chain(-3..0) {
            terms.push((e, k.int(rng.gen_range(-20..20))));
        }
        rows.push(LaurentSeries::from_terms(k, -20, &terms));
    }
    rows
}

/// Returns the number of strict, integral and bounded points, and how many bounded points keep
/// their index under reduction at the cap.
fn integrality_suite(rng: &mut ChaCha8Rng, c: &mut Checks) -> ([usize; 3], usize) {
    let k = PadicField::qp(11, 12).unwrap();
    let cap = 12;
    let mut seen = [0usize; 3];
    let mut bounded_same_index = 0;
    for trial in 0..30 {
        let gaps: Vec<i64> = (1..=5).filter(|_| rng.gen_bool(0.4)).collect();
        let last_gap = gaps.last().copied().unwrap_or(0);
        let mut rows = constructed_rows(rng, &k, &gaps, cap);
        let kind = trial % 3;
        let inv_p = k.rational(rng.gen_range(1..11), 11);
        let bump = |v: &LaurentSeries| v.add(&LaurentSeries::from_terms(&k, -20, &[(-1, inv_p.clone())])).unwrap();
        match kind {
            1 => {
                // One row at or below the last gap gets a coefficient of norm p.
                let i = rows.iter().position(|v| v.deg().unwrap() <= last_gap).unwrap();
                rows[i] = bump(&rows[i]);
            }
            2 => {
                for v in rows.iter_mut().filter(|v| v.deg().unwrap() > last_gap) {
                    *v = bump(v);
                }
            }
            _ => {}
        }
        let v = GrassPoint::standard_basis(&rows, cap).unwrap();
        let rep = match v.classify_integrality() {
            Ok(r) => r,
            Err(e) => {
                c.check(false, || format!("trial {trial}: {e}"));
                continue;
            }
        };
        let red = &rep.reduction;
        let m_v: Vec<i64> = v.degrees();
        let m_red: Vec<i64> = red.degrees();
        let equal = m_v == m_red;
        let contains = m_red.iter().all(|d| v.maya().contains(*d));
        let expected = [Integrality::Strict, Integrality::Integral, Integrality::Bounded][kind];
        c.check(rep.class == expected, || format!("trial {trial}: {:?} instead of {expected:?}", rep.class));
        c.check((rep.class == Integrality::Strict) == equal && equal == contains, || {
            format!("trial {trial}: strict / equal / contained disagree ({:?}, {equal}, {contains})", rep.class)
        });
        if rep.class == Integrality::Bounded {
            bounded_same_index += usize::from(red.index() == v.index());
        } else {
            c.check(red.index() == v.index(), || format!("trial {trial}: integral point changes index"));
            c.check(v.partition().le(red.partition()), || format!("trial {trial}: κ(V) ≰ κ(V^red)"));
        }
        seen[kind] += 1;
    }
    (seen, bounded_same_index)
}

fn probe_suite(rng: &mut ChaCha8Rng, c: &mut Checks) {
    let curve = canonical(16);
    let f = curve.field().clone();
    let (a, gd) = curve.affine_ring(20).unwrap();
    let pi = f.int(11);
    let degrees: Vec<i64> = a.degrees().into_iter().filter(|&d| d <= 12).collect();
    for trial in 0..100 {
        let mut combo: Vec<(i64, PadicElement)> = Vec::new();
        for &s in &degrees {
            if rng.gen_bool(0.6) {
                combo.push((s, pi.pow(s as u64).mul_ref(&f.int(rng.gen_range(-500..500)))));
            }
        }
        let h = closure_element(&a, &combo, &pi).unwrap();
        let res = gamma_a_filtration_probe(&h, &gd, &pi).unwrap();
        c.check(res.iter().all(|r| r.is_zero()), || format!("trial {trial}: probe nonzero on a closure element"));
        // Negative control: a unit multiple of π^{μ_j} T^{μ_j} is detected at index j.
        let j = rng.gen_range(0..gd.mu.len());
        let mu = gd.mu[j];
        let u = random_unit(rng, &f);
        let bad = h.add(&LaurentSeries::monomial(&f, mu, pi.pow(mu as u64).mul_ref(&u), h.floor())).unwrap();
        let res = gamma_a_filtration_probe(&bad, &gd, &pi).unwrap();
        c.check(!res[j].is_zero(), || format!("trial {trial}: gap term at {mu} undetected"));
    }
    let s = degrees[1];
    c.check(
        matches!(closure_element(&a, &[(s, pi.pow(s as u64 - 1))], &pi), Err(SolitonError::NotInClosure { degree }) if degree == s),
        || "oversized coefficient accepted".into(),
    );
}

fn random_element(rng: &mut ChaCha8Rng, f: &PadicField) -> PadicElement {
    let v = rng.gen_range(-2..4i64);
    let u = random_unit(rng, f);
    if v >= 0 {
        u.mul_ref(&f.int(11).pow(v as u64))
    } else {
        u.div(&f.int(11).pow((-v) as u64)).unwrap()
    }
}

fn law_suite(rng: &mut ChaCha8Rng, c: &mut Checks) {
    let f = PadicField::qp(11, 16).unwrap();
    for trial in 0..200 {
        let (x, y) = (random_element(rng, &f), random_element(rng, &f));
        let (vx, vy) = (x.valuation().unwrap(), y.valuation().unwrap());
        let sum = x.add_ref(&y);
        c.check(sum.valuation().map_or(true, |v| v >= vx.min(vy)), || format!("trial {trial}: ultrametric law"));
        c.check(x.mul_ref(&y).valuation() == Some(vx + vy), || format!("trial {trial}: |xy| ≠ |x||y|"));
        if vx >= Ratio::zero() && vy >= Ratio::zero() {
            let (rx, ry) = (x.residue().unwrap(), y.residue().unwrap());
            c.check(sum.residue().unwrap() == rx.add(&ry), || format!("trial {trial}: residue of a sum"));
            c.check(x.mul_ref(&y).residue().unwrap() == rx.mul(&ry), || format!("trial {trial}: residue of a product"));
        }
    }
    let series = |rng: &mut ChaCha8Rng| {
        let terms: Vec<(i64, PadicElement)> = (-3..=5)
            .map(|n| (n, f.int(rng.gen_range(-60..60)).mul_ref(&f.int(11).pow(rng.gen_range(0..3)))))
            .collect();
        // The floor lies below the support, so products are stored completely.
        LaurentSeries::from_terms(&f, -20, &terms)
    };
    for trial in 0..100 {
        let (a, b) = (series(rng), series(rng));
        let (na, nb) = (a.norm_val(), b.norm_val());
        let (Some(na), Some(nb)) = (na, nb) else { continue };
        let sum = a.add(&b).unwrap();
        let prod = a.mul(&b).unwrap();
        c.check(sum.norm_val().map_or(true, |v| v >= na.min(nb)), || format!("series {trial}: ultrametric law"));
        c.check(prod.norm_val() == Some(na + nb), || format!("series {trial}: Gauss norm not multiplicative"));
        let (ra, rb) = (a.reduce_mod_p().unwrap(), b.reduce_mod_p().unwrap());
        let (rs, rp) = (sum.reduce_mod_p().unwrap(), prod.reduce_mod_p().unwrap());
        let rsum = ra.add(&rb).unwrap();
        let rprod = ra.mul(&rb).unwrap();
        let same = |x: &LaurentSeries<_>, y: &LaurentSeries<_>| (-6..=10).all(|n| x.coeff_or_zero(n) == y.coeff_or_zero(n));
        c.check(same(&rs, &rsum), || format!("series {trial}: reduction of a sum"));
        c.check(same(&rp, &rprod), || format!("series {trial}: reduction of a product"));
    }
}

fn criterion_12(rng: &mut ChaCha8Rng) -> Outcome {
    let mut c = Checks::default();
    for _ in 0..1000 {
        let low: Vec<i64> = (-8..=0).filter(|_| rng.gen_bool(0.3)).collect();
        let gaps: Vec<i64> = (1..=10).filter(|_| rng.gen_bool(0.3)).collect();
        let m = MayaDiagram::new(low, gaps);
        let (i, kappa) = maya_to_pair(&m);
        c.check(pair_to_maya(i, &kappa) == m, || format!("Maya round trip fails for {m:?}"));
    }
    let (seen, same_index) = integrality_suite(rng, &mut c);
    probe_suite(rng, &mut c);
    law_suite(rng, &mut c);
    c.outcome(format!(
        "1000 Maya round trips; integrality on {} strict, {} integral, {} bounded points ({same_index} bounded keep their index); 100 probe trials with controls; padic and series laws",
        seen[0], seen[1], seen[2]
    ))
}

fn main() -> ExitCode {
    let only = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut r = Runner { failed: 0, only };
    r.run(1, "gap sequences", secs(10), true, criterion_1);
    r.run(2, "decomposition matrices", secs(30), true, criterion_2);
    let mut literal = None;
    r.run(3, "binomial logarithm coefficients", secs(60), true, || {
        let (derived, closed_form) = criterion_3();
        literal = Some(closed_form);
        derived
    });
    r.run(3, "closed-form binomial for y^l = x^2a(x^2+1)^b", None, false, || literal.take().expect("criterion 3 ran"));
    r.run(4, "Hasse-Witt product rule and ordinarity", None, true, criterion_4);
    let mut log = None;
    let mut torsion = Vec::new();
    r.run(5, "torsion counts", secs(300), true, || {
        let l = canonical_log();
        let (out, t) = criterion_5(&l);
        log = Some(l);
        torsion = t;
        out
    });
    r.run(6, "Artin-Hasse integrality", secs(10), true, || criterion_6(&mut ChaCha8Rng::seed_from_u64(6)));
    r.run(7, "Schur functions on Artin-Hasse loops", None, true, criterion_7);
    r.run(8, "Plucker coordinates", None, true, criterion_8);
    let mut certs = Vec::new();
    r.run(9, "theta avoidance", secs(600), true, || {
        certs = certificates_for(&mut log, &mut torsion);
        criterion_9(&certs)
    });
    r.run(10, "p^n-torsion evidence", None, true, || {
        if certs.is_empty() {
            certs = certificates_for(&mut log, &mut torsion);
        }
        criterion_10(&certs)
    });
    r.run(11, "affine genus-two instance", secs(900), true, criterion_11);
    r.run(12, "structural suites", None, true, || criterion_12(&mut ChaCha8Rng::seed_from_u64(12)));
    if r.failed == 0 {
        println!("acceptance: all asserted criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} asserted criteria failed", r.failed);
        ExitCode::FAILURE
    }
}
