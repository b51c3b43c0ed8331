//! Acceptance criteria 1–10. Runs as a plain binary so that every criterion
//! executes and prints its own line; the process fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rmps_magic::exact::to_f64;
use rmps_magic::harness::{crossval_point, run_fig1, ExperimentConfig, DEFAULT_SEED, Z_LIMIT};
use rmps_magic::magic::{magic_l1, magic_report, norm_inequality_check};
use rmps_magic::pauli::SiteClass;
use rmps_magic::polynomial::verify_appendix_polynomials;
use rmps_magic::spectra::{compare_closed_form, verify_bounds_grid, CLOSED_FORM_TOLERANCE};
use rmps_magic::transfer::{
    analytic_moment_sum_exact, analytic_moment_sum_variant, per_string_expectation_exact,
};
use rmps_magic::weingarten::{gram_matrix, weingarten_matrix, WgVariant};

const CLASSES: [SiteClass; 3] = [SiteClass::Identity, SiteClass::O1, SiteClass::O2];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (elapsed <= limit, format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

fn criterion_1() -> Outcome {
    let bad: Vec<u64> = (4..=16)
        .filter(|&q| {
            let w = weingarten_matrix(q).unwrap();
            let g = gram_matrix(q).unwrap();
            !w.entries.mul(&g.entries).is_identity()
        })
        .collect();
    outcome(bad.is_empty(), format!("Wg·G = I exactly for q = 4..16; failures at {bad:?}"))
}

fn criterion_2() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (d, b, n) in [(2, 2, 2), (2, 2, 3), (3, 2, 2)] {
        let r = crossval_point(d, b, n, 100_000, DEFAULT_SEED).unwrap();
        ok &= r.passed && r.z.abs() <= Z_LIMIT && r.identity_z.abs() <= Z_LIMIT;
        lines.push(format!("({d},{b},{n}) z = {:+.2}, identity-string z = {:+.2}", r.z, r.identity_z));
    }
    outcome(ok, lines.join("; "))
}

fn criterion_3() -> Outcome {
    let rep = verify_bounds_grid((2, 10), (2, 10), WgVariant::GramInverse).unwrap();
    let table = verify_bounds_grid((2, 10), (2, 10), WgVariant::PrintedTable).unwrap();
    for v in &rep.violations {
        println!("    violation: {v}");
    }
    let worst_margin = rep.reports.iter().map(|r| r.margin()).fold(f64::INFINITY, f64::min);
    let min_eig = rep.reports.iter().map(|r| r.min_eigenvalue).fold(f64::INFINITY, f64::min);
    outcome(
        rep.passed(),
        format!(
            "{} blocks, {} violations, worst ρ margin {:.3e}, min eigenvalue {:.3e} \
             (printed-table blocks: {} violations)",
            rep.reports.len(),
            rep.violations.len(),
            worst_margin,
            min_eig,
            table.violations.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut table_bad = Vec::new();
    let mut gram_reconciled = 0;
    let mut worst: f64 = 0.0;
    let mut total = 0;
    for d in 2..=8 {
        for b in 2..=8 {
            for class in CLASSES {
                total += 1;
                let t = compare_closed_form(d, b, class, WgVariant::PrintedTable).unwrap();
                worst = worst.max(t.max_relative_deviation);
                if !(t.reconciled && t.max_relative_deviation <= CLOSED_FORM_TOLERANCE) {
                    table_bad.push(format!("({d},{b},{class})"));
                }
                if compare_closed_form(d, b, class, WgVariant::GramInverse).unwrap().reconciled {
                    gram_reconciled += 1;
                }
            }
        }
    }
    outcome(
        table_bad.is_empty(),
        format!(
            "printed-table blocks: {}/{total} reconciled, max rel. deviation {worst:.2e}; \
             Haar-validated Gram-inverse blocks: {gram_reconciled}/{total} reconciled{}",
            total - table_bad.len(),
            if table_bad.is_empty() { String::new() } else { format!("; failing {table_bad:?}") }
        ),
    )
}

fn criterion_5() -> Outcome {
    let rep = verify_appendix_polynomials((2, 12), (2, 12)).unwrap();
    outcome(
        rep.all_nonnegative(),
        format!(
            "{} polynomials, {} exact evaluations, {} negative",
            rep.polynomials_checked,
            rep.evaluations,
            rep.violations.len()
        ),
    )
}

fn fig1_config() -> ExperimentConfig {
    ExperimentConfig {
        d: 2,
        b_list: vec![2, 4, 8],
        n_range: (2, 8),
        samples_per_point: 100,
        root_seed: DEFAULT_SEED,
        ..ExperimentConfig::default()
    }
}

fn criterion_6() -> Outcome {
    let out = run_fig1(&fig1_config()).unwrap();
    let checks: Vec<_> = out.acceptance().into_iter().filter(|c| c.name != "per-state inequality").collect();
    for c in &checks {
        println!("    {} {}: {}", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail);
    }
    let failed = out.records.iter().map(|r| r.failed_samples).sum::<usize>();
    let slope = out.fits.iter().find(|(b, _)| *b == 2).map(|(_, f)| f.slope).unwrap_or(f64::NAN);
    outcome(
        checks.iter().all(|c| c.passed) && checks.len() == 5 && failed == 0,
        format!("B=2 slope {slope:.4}, {} records", out.records.len()),
    )
}

fn criterion_7() -> Outcome {
    let out = run_fig1(&fig1_config()).unwrap();
    let min_margin = out.records.iter().map(|r| r.min_bound_margin).fold(f64::INFINITY, f64::min);
    outcome(
        out.bound_violations() == 0 && out.states_checked() == 2100 && min_margin >= -1e-10,
        format!(
            "{} of {} states satisfy M ≥ d^(n/2)/√Σ|⟨P⟩|⁴ − 1e-10; min margin {min_margin:.4}",
            out.states_checked() - out.bound_violations(),
            out.states_checked()
        ),
    )
}

fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn criterion_8() -> Outcome {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let plus = [Complex64::new(h, 0.0), Complex64::new(h, 0.0)];
    let mut worst: f64 = 0.0;
    let (mut z, mut p) = (vec![Complex64::new(1.0, 0.0)], vec![Complex64::new(1.0, 0.0)]);
    for _ in 1..=6 {
        z = kron(&z, &zero);
        p = kron(&p, &plus);
        worst = worst.max((magic_l1(&z, 2).unwrap() - 1.0).abs());
        worst = worst.max((magic_l1(&p, 2).unwrap() - 1.0).abs());
    }
    let t = [Complex64::new(h, 0.0), Complex64::from_polar(h, std::f64::consts::FRAC_PI_4)];
    let t_dev = (magic_report(&t, 2).unwrap().magic_l1 - (1.0 + 2f64.sqrt()) / 2.0).abs();
    outcome(
        worst <= 1e-10 && t_dev <= 1e-10,
        format!("stabilizer max |M − 1| = {worst:.1e}; T-state |M − (1+√2)/2| = {t_dev:.1e}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let len = rng.random_range(2..=64usize);
        let mut v: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        let r = norm_inequality_check(&v).unwrap();
        worst = worst.min(r.lhs - r.rhs);
        if !r.holds {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("10000 vectors, {violations} violations, min ‖v‖₁ − 1/‖v‖₄² = {worst:.3e}"),
    )
}

fn criterion_10() -> Outcome {
    let mut ok = true;
    let mut largest: f64 = 0.0;
    for b in 2..=4u64 {
        for n in 2..=12usize {
            let exact = analytic_moment_sum_exact(3, b, n, WgVariant::GramInverse).unwrap();
            let trace =
                per_string_expectation_exact(3, b, &vec![SiteClass::Identity; n], WgVariant::GramInverse)
                    .unwrap();
            let float = analytic_moment_sum_variant(3, b, n, WgVariant::GramInverse).unwrap();
            let v = to_f64(&exact);
            largest = largest.max(v);
            ok &= exact == trace && v <= 24.0 && float.o1_count + float.o2_count == 0;
            ok &= (float.value - v).abs() <= 1e-12 * v.max(1.0);
        }
    }
    outcome(ok, format!("d = 3, B = 2..4, n = 2..12: sum = tr[Gⁿ] exactly, largest value {largest:.6}"))
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome, u64);
    let criteria: [Criterion; 10] = [
        (1, "Weingarten inverse identity", criterion_1, 10),
        (2, "Haar-oracle cross-validation", criterion_2, 300),
        (3, "spectral bounds on d, B in 2..10", criterion_3, 60),
        (4, "closed-form eigenvalues on d, B in 2..8", criterion_4, 60),
        (5, "polynomial non-negativity on d, B in 2..12", criterion_5, 60),
        (6, "magic growth with n", criterion_6, 600),
        (7, "per-state magic lower bound", criterion_7, 600),
        (8, "stabilizer and T-state baseline", criterion_8, 60),
        (9, "1-norm / 4-norm inequality", criterion_9, 60),
        (10, "odd-d collapse", criterion_10, 60),
    ];
    let mut failures = Vec::new();
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let (in_time, timing) = within(start.elapsed(), Duration::from_secs(limit));
        let passed = result.passed && in_time;
        println!(
            "criterion {id:>2} [{}] {name}: {} ({timing})",
            if passed { "PASS" } else { "FAIL" },
            result.detail
        );
        if !passed {
            failures.push(id);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: failed criteria {failures:?}");
        std::process::exit(1);
    }
}
