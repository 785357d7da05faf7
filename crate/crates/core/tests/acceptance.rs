//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use afl_core::analytic::{analytic_closed, analytic_oracle, normalize_raw, CanonicalX};
use afl_core::harness::{
    cayley_suite, correspond_canonical, sweep, verify_instance, InstanceSpec, SweepGrid, VerificationRecord, VerifyOptions,
};
use afl_core::matrix::MatrixF;
use afl_core::oracle::{
    count_quadratic_solutions, count_quadratic_solutions_exhaustive, OracleConfig, Parity, QuadraticCondition,
};
use afl_core::{AflError, PrecisionContext};
use rayon::prelude::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn spec(p: u32, parity: Parity, m: i32, va: Option<i32>, vb: i32) -> InstanceSpec {
    InstanceSpec { p, parity, m, va, vb, seed: 0, precision: None }
}

fn grid() -> SweepGrid {
    SweepGrid {
        primes: vec![5, 7],
        parities: vec![Parity::Odd, Parity::Even],
        max_m: 2,
        max_va: 2,
        include_va_inf: true,
        max_vb: 2,
        seeds: 3,
    }
}

fn identity_sweep(records: &[VerificationRecord], expected: usize) -> Outcome {
    let bad: Vec<_> = records
        .iter()
        .filter(|r| !(r.afl_holds && r.analytic_closed.is_some() && r.analytic_oracle == r.analytic_closed))
        .map(|r| r.label.clone())
        .collect();
    let opts = VerifyOptions::default();
    let w1 = verify_instance(&spec(5, Parity::Odd, 0, Some(0), 0), &opts);
    let w4 = verify_instance(&spec(5, Parity::Odd, 1, Some(1), 0), &opts);
    let triple = |r: &afl_core::Result<VerificationRecord>| {
        r.as_ref().ok().map(|r| (r.analytic_closed, r.analytic_oracle, r.geometric_total))
    };
    let witnesses_ok = triple(&w1) == Some((Some(1), Some(1), 1)) && triple(&w4) == Some((Some(4), Some(4), 4));
    outcome(
        bad.is_empty() && records.len() == expected && witnesses_ok,
        format!(
            "{}/{} grid points with closed = oracle = geometric; witnesses {:?} {:?}; failures {:?}",
            records.len() - bad.len(),
            expected,
            triple(&w1),
            triple(&w4),
            bad
        ),
    )
}

fn pairing(records: &[VerificationRecord]) -> Outcome {
    let mut levels = 0;
    let mut bad = Vec::new();
    for r in records.iter().filter(|r| r.integral) {
        for row in r.per_s.iter().filter(|row| row.zs_length.is_some()) {
            levels += 1;
            if row.pair_sum != row.zs_length {
                bad.push(format!("{} s={}", r.label, row.s));
            }
        }
    }
    outcome(bad.is_empty() && levels > 0, format!("{levels} levels checked; failures {bad:?}"))
}

/// Re-runs the oracle on every grid point: each `α(s, t)` must equal the
/// closed count (already tallied in the record) and every boundary cell of
/// the window must be zero.
fn alpha_levels(records: &[VerificationRecord]) -> Outcome {
    let mismatched: usize = records.iter().map(|r| r.alpha_mismatches.unwrap_or(usize::MAX)).sum();
    let boundary: Vec<String> = records
        .par_iter()
        .filter_map(|r| {
            let x = rebuild(r);
            let w = x.default_window();
            let res = analytic_oracle(&x, &OracleConfig::default()).ok()?;
            let hot = res.alpha.iter().any(|(&(s, t), &n)| {
                n > 0 && (s == w.s_min || s == w.s_max || t == w.t_min && t < 0 || t == w.t_max)
            });
            hot.then(|| r.label.clone())
        })
        .collect();
    let cells: usize = records
        .iter()
        .map(|r| {
            let w = rebuild(r).default_window();
            ((w.s_max - w.s_min + 1) * (w.t_max - w.t_min + 1)) as usize
        })
        .sum();
    outcome(
        mismatched == 0 && boundary.is_empty(),
        format!("{cells} (s,t) cells, {mismatched} mismatches, nonzero boundary at {boundary:?}"),
    )
}

fn rebuild(r: &VerificationRecord) -> CanonicalX {
    let s = &r.instance;
    let ctx = PrecisionContext::new(s.p, r.precision).expect("record precision is valid");
    CanonicalX::from_valuations(&ctx, s.parity, s.m, s.va, s.vb, s.seed).expect("record instance rebuilds")
}

fn erratum(records: &[VerificationRecord]) -> Outcome {
    let demo = records.iter().find(|r| {
        r.instance.parity == Parity::Even && r.erratum_check.as_ref().is_some_and(|e| e.sigma0_corrected != e.sigma0_uncorrected)
    });
    let Some(r) = demo else {
        return outcome(false, "no even Case A instance with a visible s=0 discrepancy");
    };
    let e = r.erratum_check.as_ref().expect("filtered above");
    let l = e.l as i64;
    let uncorrected_fails = !(e.uncorrected_total_matches && e.uncorrected_pairing_holds);
    let all_even_case_a_ok = records
        .iter()
        .filter_map(|r| r.erratum_check.as_ref())
        .all(|e| e.corrected_total_matches && e.corrected_pairing_holds);
    outcome(
        e.sigma0_direct == (l + 1) / 2
            && e.sigma0_corrected == e.sigma0_direct
            && e.sigma0_uncorrected == (l - 1) / 2
            && e.corrected_total_matches
            && e.corrected_pairing_holds
            && uncorrected_fails
            && all_even_case_a_ok,
        format!(
            "{}: l={} sigma(0) direct={} corrected={} uncorrected={}; totals corrected={} uncorrected={} geometric={}; \
             pairing corrected={} uncorrected={}",
            r.label,
            e.l,
            e.sigma0_direct,
            e.sigma0_corrected,
            e.sigma0_uncorrected,
            e.total_corrected,
            e.total_uncorrected,
            e.geometric_total,
            e.corrected_pairing_holds,
            e.uncorrected_pairing_holds
        ),
    )
}

fn cayley() -> Outcome {
    let mut details = Vec::new();
    let mut passed = true;
    for p in [5, 7] {
        match cayley_suite(p, 3, 100, 0) {
            Ok(report) => {
                passed &= report.all_passed();
                for c in &report.checks {
                    passed &= c.passed > 0;
                    details.push(format!("p{p} {} {}/{}/{}", c.name, c.passed, c.failed, c.skipped));
                }
            }
            Err(e) => {
                passed = false;
                details.push(format!("p{p}: {e}"));
            }
        }
    }
    outcome(passed, format!("pass/fail/skip: {}", details.join(", ")))
}

fn correspondence() -> Outcome {
    let instances = [
        (Parity::Odd, 0, Some(0), 0),
        (Parity::Odd, 0, None, 1),
        (Parity::Odd, 1, Some(1), 0),
        (Parity::Odd, 1, Some(2), 1),
        (Parity::Odd, 0, Some(1), 1),
        (Parity::Even, 0, Some(0), 0),
        (Parity::Even, 1, None, 0),
        (Parity::Even, 1, Some(1), 1),
        (Parity::Even, 0, Some(2), 0),
        (Parity::Even, 1, Some(0), 2),
    ];
    let results: Vec<(String, bool)> = instances
        .par_iter()
        .map(|&(parity, m, va, vb)| {
            let label = spec(5, parity, m, va, vb).label();
            let run = || -> afl_core::Result<bool> {
                let ctx = PrecisionContext::new(5, 30)?;
                let x = CanonicalX::from_valuations(&ctx, parity, m, va, vb, 0)?;
                let (report, derived) = correspond_canonical(&x, 2, &OracleConfig::default())?;
                Ok(report.passed() && derived == analytic_closed(&x)?)
            };
            match run() {
                Ok(ok) => (label, ok),
                Err(e) => (format!("{label} ({e})"), false),
            }
        })
        .collect();
    let bad: Vec<_> = results.iter().filter(|(_, ok)| !ok).map(|(l, _)| l.clone()).collect();
    outcome(bad.is_empty(), format!("{}/{} instances agree; failures {bad:?}", results.len() - bad.len(), results.len()))
}

fn oracle_self_check(records: &[VerificationRecord]) -> Outcome {
    let per_instance: Vec<afl_core::Result<(usize, Vec<String>)>> = records
        .par_iter()
        .filter(|r| r.integral)
        .map(|r| {
            let x = rebuild(r);
            let cond = QuadraticCondition::from_canonical(&x.build_match_y()?, x.parity(), x.m())?;
            let w = x.default_window();
            let p = x.ctx().p() as u64;
            let (mut checked, mut bad) = (0, Vec::new());
            for t in w.t_min.max(0)..=w.t_max {
                if p.pow(t as u32) > 1_000_000 {
                    break;
                }
                let mut exhaustive: Option<Vec<u64>> = None;
                for s in w.s_min..=w.s_max {
                    let Some((c, d, shift)) = cond.congruence(s, t)? else { continue };
                    if shift > t {
                        continue;
                    }
                    if exhaustive.is_none() {
                        exhaustive = Some(count_quadratic_solutions_exhaustive(&c, &d, t)?);
                    }
                    let expected = exhaustive.as_ref().expect("filled above")[shift as usize];
                    checked += 1;
                    if count_quadratic_solutions(&c, &d, t, shift)? != expected {
                        bad.push(format!("{} s={s} t={t}", r.label));
                    }
                }
            }
            Ok((checked, bad))
        })
        .collect();
    let mut checked = 0;
    let mut bad = Vec::new();
    for r in per_instance {
        match r {
            Ok((c, b)) => {
                checked += c;
                bad.extend(b);
            }
            Err(e) => bad.push(e.to_string()),
        }
    }

    let mut by_valuations: BTreeMap<String, Vec<Option<i64>>> = BTreeMap::new();
    for r in records {
        let key = InstanceSpec { seed: 0, ..r.instance }.label();
        by_valuations.entry(key).or_default().push(r.analytic_oracle);
    }
    let varying: Vec<_> = by_valuations
        .iter()
        .filter(|(_, v)| v.len() != 3 || v.iter().any(|x| x.is_none() || *x != v[0]))
        .map(|(k, _)| k.clone())
        .collect();
    outcome(
        bad.is_empty() && varying.is_empty() && checked > 0,
        format!(
            "{checked} congruences match enumeration (failures {bad:?}); {} valuation classes seed-invariant (varying {varying:?})",
            by_valuations.len() - varying.len()
        ),
    )
}

fn degenerate() -> Outcome {
    let opts = VerifyOptions::default();
    let zero_sides = |s: InstanceSpec| {
        verify_instance(&s, &opts)
            .map(|r| !r.integral && r.analytic_closed == Some(0) && r.analytic_oracle == Some(0) && r.geometric_total == 0)
            .unwrap_or(false)
    };
    let non_integral = zero_sides(spec(5, Parity::Odd, 0, Some(0), -1))
        && zero_sides(spec(7, Parity::Even, 1, Some(-2), 0))
        && zero_sides(spec(5, Parity::Even, 0, None, -2));

    let ctx = PrecisionContext::new(5, 20).expect("valid context");
    let canonical_rejects = matches!(
        CanonicalX::new(&ctx, Parity::Odd, 0, ctx.tau(), ctx.qzero(), ctx.qone()),
        Err(AflError::DegenerateParams(_))
    );
    let raw_rejects = [Parity::Odd, Parity::Even].into_iter().all(|parity| {
        let (a, z, u) = (ctx.tau(), ctx.qzero(), ctx.qone());
        let neg_a = ctx.qint(-1) * a;
        let rows = match parity {
            Parity::Odd => vec![vec![neg_a, z, u], vec![z, a, z], vec![ctx.qpi_pow(1) * u.conj(), z, z]],
            Parity::Even => vec![vec![neg_a, z, z], vec![z, a, u], vec![z, ctx.qint(-1) * u.conj(), z]],
        };
        let x = MatrixF::from_rows(&ctx, rows).expect("3x3");
        matches!(normalize_raw(&x), Err(AflError::NotRegularSemisimple))
    });

    let p3_refused = matches!(PrecisionContext::new(3, 10), Err(AflError::InvalidPrime(3)))
        && matches!(cayley_suite(3, 3, 1, 0), Err(AflError::InvalidPrime(3)))
        && verify_instance(&InstanceSpec { p: 3, ..spec(5, Parity::Odd, 0, Some(0), 0) }, &opts).is_err();

    outcome(
        non_integral && canonical_rejects && raw_rejects && p3_refused,
        format!(
            "non-integral 0=0: {non_integral}; b=0 rejected (canonical {canonical_rejects}, raw {raw_rejects}); p=3 refused: {p3_refused}"
        ),
    )
}

fn main() -> ExitCode {
    let clock = Instant::now();
    let specs = grid().instances();
    let outcome_sweep = sweep(&specs, &VerifyOptions::default());
    if let Some((s, e)) = &outcome_sweep.error {
        println!("FAIL sweep aborted at {}: {e}", s.label());
        return ExitCode::FAILURE;
    }
    let records = &outcome_sweep.records;
    println!("sweep: {} grid points in {:.1}s", records.len(), clock.elapsed().as_secs_f64());

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 AFL identity sweep", Box::new(|| identity_sweep(records, specs.len()))),
        ("2 per-level pairing", Box::new(|| pairing(records))),
        ("3 alpha-level equivalence", Box::new(|| alpha_levels(records))),
        ("4 erratum demonstration", Box::new(|| erratum(records))),
        ("5 Cayley suite", Box::new(cayley)),
        ("6 group/Lie correspondence", Box::new(correspondence)),
        ("7 oracle self-validation", Box::new(|| oracle_self_check(records))),
        ("8 degenerate gates", Box::new(degenerate)),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let clock = Instant::now();
        let o = run();
        all &= o.passed;
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} {name} ({:.1}s): {}", clock.elapsed().as_secs_f64(), o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
