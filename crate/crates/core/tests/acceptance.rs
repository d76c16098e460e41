//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Pass criterion numbers as arguments to run a subset.

mod common;

use std::time::Instant;

use jgap::certificate::{
    counting_check, counting_check_sparse, facet_lower_bound, verify_with_table, PairingTable,
    SimplexPolarDecomposer, HYPOTHESIS_TOL,
};
use jgap::designs::{
    c_nk, exact_tail, intersection_size, max_pairwise_intersection, predicted_inner_product,
    sample_ksubset, subset_direction, tail_bound_check, DirectionMap, KSubset, SubsetSampler,
};
use jgap::frame::{john_check, EquatorFrame, SimplexFrame};
use jgap::hard_body::{
    activation_gap, activation_threshold, build_instance, c1, exponent_profile, exponent_profile_derivative,
    extract_certificate, theorem_bound, HardBodyParams,
};
use jgap::lift::{separation_implication, LiftedPair, C0, SEPARATION_COS};
use jgap::net::{approximate, random_sandwiched_body, NetStrategy};
use jgap::polytope::{inclusion_check, ConvexCoefficients};
use jgap::rng::{equatorial_unit, stream, unit_vector};
use jgap::Error;
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = (u32, &'static str, f64, fn() -> Outcome);

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 11] = [
        (1, "simplex frame identities", 5.0, simplex_frame),
        (2, "lift constant", 5.0, lift_constant),
        (3, "separation implication", 30.0, separation),
        (4, "v_I inner-product formula", 60.0, direction_formula),
        (5, "hypergeometric exactness", 60.0, hypergeometric),
        (6, "overlap tail bound", 10.0, tail_bound),
        (7, "end-to-end certificate", 120.0, end_to_end),
        (8, "counting lemma", 300.0, counting_lemma),
        (9, "net sandwich", 300.0, sandwich_grid),
        (10, "oracle equivalence", 60.0, oracle_equivalence),
        (11, "theorem-bound arithmetic", 1.0, theorem_arithmetic),
    ];
    let mut failures = 0;
    for (id, name, budget, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < budget;
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} [{id:>2}] {name}: {} ({secs:.2} s, budget {budget} s{})",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            if in_time { "" } else { ", over budget" }
        );
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}

fn simplex_frame() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for n in [2usize, 3, 10, 100, 1000] {
        let f = SimplexFrame::build(n).unwrap();
        let (norm_err, off_err) = f.gram_errors();
        let john = john_check(f.contacts(), f.weights()).unwrap();
        worst.0 = worst.0.max(off_err.max(norm_err));
        worst.1 = worst.1.max(f.centroid_error());
        worst.2 = worst.2.max(john.identity_error.max(john.barycenter_error));
    }
    outcome(
        worst.0 <= 1e-10 && worst.1 <= 1e-9 && worst.2 <= 1e-8,
        format!("gram {:.1e}, centroid {:.1e}, john {:.1e}", worst.0, worst.1, worst.2),
    )
}

fn lift_constant() -> Outcome {
    let digits = common::c0_decimal(40);
    let big: f64 = digits.parse().unwrap();
    let c0_ok = big == C0;
    let n = 50;
    let mut rng = stream(2, 0);
    let beta = unit_vector(&mut rng, n);
    let worst = (0..100_000)
        .map(|_| {
            let theta = equatorial_unit(&mut rng, &beta);
            (LiftedPair::new(&theta, &beta).unwrap().pairing() - 1.0 / C0).abs()
        })
        .fold(0.0f64, f64::max);
    outcome(
        c0_ok && worst <= 1e-12,
        format!("C0 = {} (40-digit integer evaluation {digits}), max |<up,down> - 1/C0| = {worst:.1e}", C0),
    )
}

fn separation() -> Outcome {
    let pairs = 1_000_000usize;
    let chunks = 100usize;
    let mut violations = 0usize;
    let mut active = 0usize;
    let mut min_active_cos = f64::INFINITY;
    for n in [3usize, 50, 500] {
        let beta = unit_vector(&mut stream(3, n as u64), n);
        let res: Vec<(usize, usize, f64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream(3, (n * chunks + c + 1) as u64);
                let (mut v, mut a, mut lo) = (0, 0, f64::INFINITY);
                // each pair draws one fresh direction and reuses the previous
                // (independent) one, either directly or as a perturbation
                let mut prev = equatorial_unit(&mut rng, &beta);
                for t in 0..pairs / chunks {
                    let alpha = equatorial_unit(&mut rng, &beta);
                    let theta = if t % 2 == 0 {
                        prev
                    } else {
                        // pairs near the critical angle
                        let s = rng.random_range(0.0..1.2);
                        let mut th = alpha.clone();
                        jgap::point::axpy(s, &prev, &mut th);
                        match th.normalized() {
                            Some(p) => p,
                            None => {
                                prev = alpha;
                                continue;
                            }
                        }
                    };
                    let rep = separation_implication(&alpha, &theta, &beta).unwrap();
                    prev = alpha;
                    if rep.lhs > 0.0 {
                        a += 1;
                        lo = lo.min(rep.rhs);
                        if rep.rhs < SEPARATION_COS - 1e-9 {
                            v += 1;
                        }
                    }
                }
                (v, a, lo)
            })
            .collect();
        for (v, a, lo) in res {
            violations += v;
            active += a;
            min_active_cos = min_active_cos.min(lo);
        }
    }
    outcome(
        violations == 0,
        format!(
            "{violations} violations in 3 x {pairs} pairs; {active} with <a_down, t_up> > 0, smallest <a, t> among them {min_active_cos:.10} (bound {SEPARATION_COS:.10})"
        ),
    )
}

fn direction_formula() -> Outcome {
    let trials = 10_000usize;
    let mut worst_err = 0.0f64;
    let mut worst_sep = f64::NEG_INFINITY;
    let mut separated = 0usize;
    let mut cross_err = 0.0f64;
    for (n, k) in [(101usize, 25usize), (1001, 250), (4001, 1001)] {
        let map = DirectionMap::new(n).unwrap();
        // the O(n) closed form against plain summation over the frame
        let ef = EquatorFrame::from_simplex(&SimplexFrame::build(n).unwrap()).unwrap();
        let mut rng = stream(4, n as u64);
        for _ in 0..20 {
            let set = sample_ksubset(n, k, &mut rng).unwrap();
            let a = map.direction(&set).unwrap();
            let b = subset_direction(&ef, &set).unwrap();
            cross_err = cross_err.max(a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        }
        drop(ef);
        let res: Vec<(f64, f64, usize)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream(4, ((n as u64) << 20) + t as u64);
                let i_set = sample_ksubset(n, k, &mut rng).unwrap();
                // half uniform pairs; half share a prescribed number of elements
                let j_set = if t % 2 == 0 {
                    sample_ksubset(n, k, &mut rng).unwrap()
                } else {
                    let keep = rng.random_range(0..=k);
                    let mut idx: Vec<u32> = i_set.indices()[..keep].to_vec();
                    let mut sampler = SubsetSampler::new(n, k).unwrap();
                    while idx.len() < k {
                        let extra = sampler.sample(&mut rng);
                        for &e in extra.indices() {
                            if idx.len() < k && !i_set.contains(e) && !idx.contains(&e) {
                                idx.push(e);
                            }
                        }
                    }
                    KSubset::new(n, idx).unwrap()
                };
                let l = intersection_size(&i_set, &j_set).unwrap();
                let vi = map.direction(&i_set).unwrap();
                let vj = map.direction(&j_set).unwrap();
                let ip = jgap::point::dot(&vi, &vj);
                let err = (ip - predicted_inner_product(n, k, l)).abs();
                let unit = (vi.norm() - 1.0).abs().max((vj.norm() - 1.0).abs());
                let sep = 2 * l < k;
                (err.max(unit), if sep { ip } else { f64::NEG_INFINITY }, sep as usize)
            })
            .collect();
        for (e, s, c) in res {
            worst_err = worst_err.max(e);
            worst_sep = worst_sep.max(s);
            separated += c;
        }
        assert!(c_nk(n, k).is_finite());
    }
    outcome(
        worst_err <= 1e-9 && worst_sep <= 0.75 && cross_err <= 1e-9,
        format!(
            "max |<v_I,v_J> - formula| (and unit-norm error) {worst_err:.1e}; {separated} separated pairs, max <v_I,v_J> {worst_sep:.4}; closed form vs summation {cross_err:.1e}"
        ),
    )
}

fn hypergeometric() -> Outcome {
    let mut exact_ok = true;
    let mut worst_rel = 0.0f64;
    let mut cases = 0;
    for n in 1..=12usize {
        for k in 1..=6usize.min(n) {
            let counts = common::overlap_counts(n, k);
            let total: u64 = counts.iter().sum();
            for t in 0..=k + 1 {
                let hits: u64 = counts.iter().skip(t).sum();
                let want = hits as f64 / total as f64;
                let got = exact_tail(n as u64, k as u64, t as u64).unwrap();
                cases += 1;
                if want == 0.0 {
                    exact_ok &= got == 0.0;
                } else {
                    let rel = (got - want).abs() / want;
                    worst_rel = worst_rel.max(rel);
                    exact_ok &= rel <= 1e-12;
                }
            }
        }
    }
    let trials = 1_000_000usize;
    let chunks = 50usize;
    let mut worst_sigma = 0.0f64;
    for (n, k) in [(200usize, 20usize), (1000, 50)] {
        let counts: Vec<Vec<u64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream(5, ((n as u64) << 16) + c as u64);
                let mut sampler = SubsetSampler::new(n, k).unwrap();
                let mut hist = vec![0u64; k + 1];
                for _ in 0..trials / chunks {
                    let a = sampler.sample(&mut rng);
                    let b = sampler.sample(&mut rng);
                    hist[intersection_size(&a, &b).unwrap()] += 1;
                }
                hist
            })
            .collect();
        let mut hist = vec![0u64; k + 1];
        for h in counts {
            for (x, y) in hist.iter_mut().zip(h) {
                *x += y;
            }
        }
        for t in 1..=k {
            let p = exact_tail(n as u64, k as u64, t as u64).unwrap();
            let emp = hist[t..].iter().sum::<u64>() as f64 / trials as f64;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            if sigma > 0.0 {
                worst_sigma = worst_sigma.max((emp - p).abs() / sigma);
            } else if emp != p {
                worst_sigma = f64::INFINITY;
            }
        }
    }
    outcome(
        exact_ok && worst_sigma <= 3.0,
        format!(
            "{cases} enumerated cases, max relative error {worst_rel:.1e}; Monte Carlo max deviation {worst_sigma:.2} sigma"
        ),
    )
}

fn tail_bound() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [700_000u64, 1_000_000, 2_000_000] {
        for k in [101u64, 120, 150] {
            match tail_bound_check(n, k) {
                Ok(rep) => {
                    ok &= rep.satisfied;
                    parts.push(format!("({n},{k}) {:.1}<={:.1}", rep.exact_tail_log, rep.bound_log));
                }
                Err(Error::OutOfRegime(_)) => {
                    // only pairs with k >= n/(2e^8) may be gated
                    ok &= k as f64 >= n as f64 / (2.0 * 8.0f64.exp());
                    parts.push(format!("({n},{k}) out of regime"));
                }
                Err(_) => ok = false,
            }
        }
    }
    outcome(ok, parts.join(", "))
}

fn demo_params() -> HardBodyParams {
    HardBodyParams::from_nk(4000, 16, 256, 7).unwrap()
}

fn end_to_end() -> Outcome {
    let params = demo_params();
    let inst = match build_instance(&params) {
        Ok(i) => i,
        Err(e) => return outcome(false, format!("build failed: {e}")),
    };
    let overlap = max_pairwise_intersection(&inst.subsets);
    let cert = extract_certificate(&inst);
    let table = PairingTable::new(&cert).unwrap();
    let rep = verify_with_table(&cert, &table, &inst.body, HYPOTHESIS_TOL).unwrap();
    let closed = 3.0 * C0 * (params.k as f64).sqrt() / params.n as f64;
    let thr_err = (params.threshold() - closed).abs();
    let bound = facet_lower_bound(&rep);
    let rows = inst.body.num_facets();
    outcome(
        rep.pass && overlap <= 7 && thr_err <= 1e-9 && rows == 4257 && bound.is_ok(),
        format!(
            "{rows} rows, max overlap {overlap}, R {:.6}, 1/(2R) {:.7} (vs 3C0 sqrt(k)/n: {thr_err:.1e}); diagonal {:.1e}, cross {:.4}, polar {:.4}, membership {:.1e}, boundary {:.1e}; m/(2R) = {:.3}",
            params.r,
            params.threshold(),
            rep.families.diagonal,
            rep.families.cross,
            rep.families.polar,
            rep.families.membership,
            rep.families.boundary,
            bound.unwrap_or(f64::NAN)
        ),
    )
}

/// A sparse random convex combination over the polar hull: a few facet
/// normals and a few contact points with exponential weights.
fn random_lambda<G: Rng>(rng: &mut G, m: usize, g: usize) -> Vec<(usize, f64)> {
    let ny = rng.random_range(1..=6usize);
    let nu = rng.random_range(0..=6usize);
    let mut out: Vec<(usize, f64)> = Vec::new();
    for _ in 0..ny {
        out.push((rng.random_range(0..m), -rng.random::<f64>().max(1e-300).ln()));
    }
    for _ in 0..nu {
        out.push((m + rng.random_range(0..g), -rng.random::<f64>().max(1e-300).ln()));
    }
    let total: f64 = out.iter().map(|p| p.1).sum();
    out.iter_mut().for_each(|p| p.1 /= total);
    out
}

fn counting_lemma() -> Outcome {
    let params = demo_params();
    let inst = build_instance(&params).unwrap();
    let cert = extract_certificate(&inst);
    let table = PairingTable::new(&cert).unwrap();
    let (m, g) = (cert.m(), cert.polar_generators.len());
    let total = 10_000usize;
    let lp_trials = 100usize;
    let mut violations = 0usize;
    let mut max_o = 0usize;
    let mut trials = 0usize;

    // every generator on its own, then random combinations with the
    // generating weights
    let mut lambdas: Vec<Vec<(usize, f64)>> = (0..m + g).map(|t| vec![(t, 1.0)]).collect();
    let mut rng = stream(8, 0);
    while lambdas.len() < total - lp_trials {
        lambdas.push(random_lambda(&mut rng, m, g));
    }
    for lam in &lambdas {
        let rep = counting_check_sparse(&cert, &table, lam).unwrap();
        trials += 1;
        max_o = max_o.max(rep.o_size);
        if !(rep.ok && rep.lambda_floor_ok) {
            violations += 1;
        }
    }

    // combinations re-decomposed by linear programming
    let dec = SimplexPolarDecomposer::new(&cert).unwrap();
    let hull = cert.polar_hull();
    let mut lp_failures = 0usize;
    for _ in 0..lp_trials {
        let lam = random_lambda(&mut rng, m, g);
        let mut dense = vec![0.0; m + g];
        for &(t, l) in &lam {
            dense[t] += l;
        }
        let w = ConvexCoefficients { lambda: dense }.combine(&hull);
        trials += 1;
        match dec.decompose(&cert, &w).and_then(|l| counting_check(&cert, &w, &l)) {
            Ok(rep) => {
                max_o = max_o.max(rep.o_size);
                if !(rep.ok && rep.lambda_floor_ok) {
                    violations += 1;
                }
            }
            Err(_) => lp_failures += 1,
        }
    }
    outcome(
        violations == 0 && lp_failures == 0 && trials == total,
        format!(
            "{trials} polar points ({lp_trials} decomposed by LP), {violations} violations, {lp_failures} decomposition failures, max |O| = {max_o} (2R = {:.3})",
            2.0 * params.r
        ),
    )
}

fn sandwich_grid() -> Outcome {
    let mut cases = Vec::new();
    for n in [2usize, 3] {
        for r in [1.5f64, 2.0, 3.0] {
            for delta in [0.1f64, 0.2, 0.5] {
                for body in 0..20u64 {
                    cases.push((n, r, delta, body));
                }
            }
        }
    }
    let res: Vec<(bool, bool, f64, f64, usize)> = cases
        .par_iter()
        .map(|&(n, r, delta, body)| {
            let mut rng = stream(9, ((n as u64) << 32) + ((r * 10.0) as u64) * 1000 + ((delta * 10.0) as u64) * 100 + body);
            let k = random_sandwiched_body(n, r, 4 * n, &mut rng).unwrap();
            let rep = approximate(&k, r, delta, NetStrategy::Grid, 0).unwrap();
            (rep.outer_ok, rep.inner_ok, rep.outer_margin, rep.inner_margin, rep.net_size)
        })
        .collect();
    let outer = res.iter().filter(|r| r.0).count();
    let inner = res.iter().filter(|r| r.1).count();
    let om = res.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let im = res.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    let largest = res.iter().map(|r| r.4).max().unwrap_or(0);
    outcome(
        outer == res.len() && inner == res.len(),
        format!(
            "{} bodies: outer {outer}/{0}, inner {inner}/{0}; worst margins outer {om:.2e}, inner {im:.2e}; largest net {largest}",
            res.len()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut worst_support = 0.0f64;
    let mut worst_incl = 0.0f64;
    let mut verdicts_agree = true;
    let mut count = 0;
    for n in [2usize, 3] {
        let mut rng = stream(10, n as u64);
        for _ in 0..100 {
            let ra = rng.random_range(1.2..4.0);
            let rb = rng.random_range(1.2..4.0);
            let fa = rng.random_range(3..=10usize);
            let fb = rng.random_range(3..=10usize);
            let a = random_sandwiched_body(n, ra, fa, &mut rng).unwrap();
            let b = random_sandwiched_body(n, rb, fb, &mut rng).unwrap();
            let verts = common::vertices(&a);
            for _ in 0..10 {
                let d = unit_vector(&mut rng, n);
                let lp = a.support_value(&d).unwrap();
                worst_support = worst_support.max((lp - common::support_by_vertices(&verts, &d)).abs());
            }
            let scale = rng.random_range(0.5..3.0);
            let rep = inclusion_check(&a, &b, scale).unwrap();
            let oracle = common::inclusion_margin_by_vertices(&a, &b, scale);
            worst_incl = worst_incl.max((rep.worst_margin - oracle).abs());
            if (oracle.abs() > 1e-6) && (rep.holds != (oracle <= 0.0)) {
                verdicts_agree = false;
            }
            count += 1;
        }
    }
    outcome(
        worst_support <= 1e-7 && worst_incl <= 1e-7 && verdicts_agree,
        format!("{count} polytopes: support error {worst_support:.1e}, inclusion margin error {worst_incl:.1e}"),
    )
}

fn theorem_arithmetic() -> Outcome {
    let n = 1e6f64;
    let lo = (std::f64::consts::E * n).sqrt();
    let mut deriv_ok = true;
    let mut agree = 0.0f64;
    for i in 1..=100 {
        // log-spaced on (sqrt(e n), n]
        let r = lo * (n / lo).powf(i as f64 / 100.0);
        let h = r * 1e-6;
        let numeric = (exponent_profile(n, r + h) - exponent_profile(n, r - h)) / (2.0 * h);
        let analytic = exponent_profile_derivative(n, r);
        deriv_ok &= numeric < 0.0 && analytic < 0.0;
        agree = agree.max(((numeric - analytic) / analytic).abs());
    }
    let star = activation_threshold();
    let below = activation_gap(star as f64 - 1.0) < 0.0;
    let mut holds_above = true;
    for i in 0..=60 {
        let nn = star as f64 * 10f64.powf(i as f64 / 10.0);
        holds_above &= activation_gap(nn) >= 0.0;
    }
    let at_edge = theorem_bound(n, lo).map(|b| b.log_bound.exp() > 0.0 && b.log_bound.is_finite()).unwrap_or(false);
    let at_star = theorem_bound(star as f64, c1() * star as f64).unwrap();
    outcome(
        deriv_ok && agree < 1e-4 && below && holds_above && at_edge,
        format!(
            "derivative negative on 100 R-values (numeric vs analytic {agree:.1e}); half-C' inequality at R = c1 n first holds at n = {star}, checked up to 1e6 x that; simplified bound there {:.3}",
            at_star.simplified
        ),
    )
}
