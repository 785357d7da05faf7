//! Per-instance verification records, parameter sweeps and the Cayley
//! property suite that the command-line front end drives.

mod suite;

pub use suite::{cayley_suite, CheckTally, SuiteReport};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::analytic::{
    analytic_oracle, alpha_closed, normalize_raw, pair_sum_printed, sigma_closed, sigma_closed_printed, sigma_direct,
    default_precision, CanonicalX, Case, Invariants,
};
use crate::cayley::{cayley, find_kappa, find_lambda, verify_correspond, CorrespondReport};
use crate::error::{AflError, Result};
use crate::geometric::{geometric_side, levels, zs_length};
use crate::oracle::{OracleConfig, Parity};
use crate::padic::PrecisionContext;

/// Environment variable capping the automatic precision retries.
pub const PRECISION_ENV: &str = "AFL_PRECISION_MAX";

fn serialize_va<S: Serializer>(va: &Option<i32>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match va {
        Some(v) => s.serialize_i32(*v),
        None => s.serialize_str("inf"),
    }
}

/// One grid point: `a` has valuation `va` (`None` for `a = 0`), `b` has
/// valuation `vb`, and `seed` fixes their unit parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InstanceSpec {
    pub p: u32,
    pub parity: Parity,
    pub m: i32,
    #[serde(serialize_with = "serialize_va")]
    pub va: Option<i32>,
    pub vb: i32,
    pub seed: u64,
    /// Starting precision; the default is derived from the valuations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

impl InstanceSpec {
    pub fn label(&self) -> String {
        let va = self.va.map_or("inf".to_string(), |v| v.to_string());
        let parity = match self.parity {
            Parity::Odd => "odd",
            Parity::Even => "even",
        };
        format!("p{}-{}-m{}-va{}-vb{}-seed{}", self.p, parity, self.m, va, self.vb, self.seed)
    }
}

/// Which analytic evaluations to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    Closed,
    Oracle,
    Both,
}

impl ModeSelection {
    fn closed(self) -> bool {
        self != ModeSelection::Oracle
    }

    fn oracle(self) -> bool {
        self != ModeSelection::Closed
    }
}

/// One row of the per-level table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelRow {
    pub s: i32,
    pub sigma: i64,
    /// `σ(s) + σ(s-1)` and `len Z_s`, present for `s ≡ v(j) (mod 2)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_sum: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zs_length: Option<i64>,
}

/// Side-by-side evaluation of the corrected and uncorrected Case A forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErratumCheck {
    pub l: i32,
    pub sigma0_direct: i64,
    pub sigma0_corrected: i64,
    pub sigma0_uncorrected: i64,
    pub total_corrected: i64,
    pub total_uncorrected: i64,
    pub geometric_total: i64,
    pub corrected_total_matches: bool,
    pub uncorrected_total_matches: bool,
    pub corrected_pairing_holds: bool,
    pub uncorrected_pairing_holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Timings {
    pub closed_us: u128,
    pub oracle_us: u128,
    pub geometric_us: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationRecord {
    pub instance: InstanceSpec,
    pub label: String,
    /// Precision that finally succeeded.
    pub precision: u32,
    pub integral: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_closed: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_oracle: Option<i64>,
    pub geometric_total: i64,
    pub per_s: Vec<LevelRow>,
    /// Every `(s, t)` in the oracle window where the closed-form count and
    /// the oracle count differ; `None` when the oracle did not run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_mismatches: Option<usize>,
    pub pairing_holds: bool,
    pub afl_holds: bool,
    pub errata_notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub erratum_check: Option<ErratumCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// Knobs for [`verify_instance`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub mode: ModeSelection,
    pub oracle: OracleConfig,
    pub timings: bool,
    /// Upper bound for precision retries, further capped by the arithmetic.
    pub precision_max: Option<u32>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { mode: ModeSelection::Both, oracle: OracleConfig::default(), timings: false, precision_max: None }
    }
}

impl VerifyOptions {
    /// Reads the retry cap from `AFL_PRECISION_MAX` when set.
    pub fn from_env(mode: ModeSelection) -> Self {
        let precision_max = std::env::var(PRECISION_ENV).ok().and_then(|v| v.parse().ok());
        VerifyOptions { mode, precision_max, ..Default::default() }
    }
}

fn erratum_check(inv: &Invariants, geometric_total: i64) -> Option<ErratumCheck> {
    if inv.case() != Case::A {
        return None;
    }
    let vj = inv.vj();
    let total = |f: &dyn Fn(i32) -> i64| (0..=vj).map(f).sum::<i64>();
    let total_corrected = total(&|s| sigma_closed(inv, s));
    let total_uncorrected = total(&|s| sigma_closed_printed(inv, s));
    let pairing = |f: &dyn Fn(i32) -> i64| levels(inv).all(|s| Some(f(s)) == zs_length(inv, s).ok());
    Some(ErratumCheck {
        l: inv.l,
        sigma0_direct: sigma_direct(inv, 0),
        sigma0_corrected: sigma_closed(inv, 0),
        sigma0_uncorrected: sigma_closed_printed(inv, 0),
        total_corrected,
        total_uncorrected,
        geometric_total,
        corrected_total_matches: total_corrected == geometric_total,
        uncorrected_total_matches: total_uncorrected == geometric_total,
        corrected_pairing_holds: pairing(&|s| sigma_closed(inv, s) + sigma_closed(inv, s - 1)),
        uncorrected_pairing_holds: pairing(&|s| pair_sum_printed(inv, s).unwrap_or(i64::MIN)),
    })
}

fn errata_notes(inv: &Invariants) -> Vec<String> {
    let mut notes = Vec::new();
    if inv.case() == Case::A {
        notes.push(format!(
            "sigma(0) = (l+1)/2 = {} from direct summation; the uncorrected s=0 branch (l-1)/2 gives {}",
            (inv.l + 1) / 2,
            (inv.l - 1) / 2
        ));
        if levels(inv).any(|s| s >= 1 && inv.l > 2 * s) {
            notes.push("pairing sum uses coefficient ((l+1)/2 - s)e_s; the uncorrected ((l-1)/2 - s)e_s disagrees with the length formula".into());
        }
    }
    if inv.vj() % 2 == 0 {
        notes.push("len Z_0 uses the convention gk_length(0, level) = (level+1)/2".into());
    }
    notes
}

fn build_instance(spec: &InstanceSpec, ctx: &PrecisionContext) -> Result<(CanonicalX, bool)> {
    let x = CanonicalX::from_valuations(ctx, spec.parity, spec.m, spec.va, spec.vb, spec.seed)?;
    if x.is_integral() {
        return Ok((x, true));
    }
    // Non-integral instances go through the raw entry point.
    let raw = normalize_raw(&x.build_x())?;
    let params = raw.params.ok_or(AflError::InvalidInput("raw instance has negative m"))?;
    Ok((params, raw.integral))
}

fn verify_at(spec: &InstanceSpec, precision: u32, opts: &VerifyOptions) -> Result<VerificationRecord> {
    let ctx = PrecisionContext::new(spec.p, precision)?;
    let (x, integral) = build_instance(spec, &ctx)?;
    let inv = if integral { Some(x.invariants()?) } else { None };

    let clock = Instant::now();
    let analytic_closed = if opts.mode.closed() { Some(inv.as_ref().map_or(0, crate::analytic::derived_closed)) } else { None };
    let closed_us = clock.elapsed().as_micros();

    let clock = Instant::now();
    let (analytic_oracle, alpha_mismatches) = if opts.mode.oracle() {
        let res = analytic_oracle(&x, &opts.oracle)?;
        let mismatches = res
            .alpha
            .iter()
            .filter(|(&(s, t), &n)| n != inv.as_ref().map_or(0, |i| alpha_closed(i, s, t)))
            .count();
        (Some(res.tally.derived_value()), Some(mismatches))
    } else {
        (None, None)
    };
    let oracle_us = clock.elapsed().as_micros();

    let clock = Instant::now();
    let geometric = geometric_side(&x)?;
    let geometric_us = clock.elapsed().as_micros();

    let mut per_s = Vec::new();
    let mut pairing_holds = true;
    if let Some(inv) = &inv {
        for s in 0..=inv.vj() {
            let sigma = sigma_closed(inv, s);
            let (pair_sum, zs) = match geometric.per_level.get(&s) {
                Some(&len) => (Some(sigma + sigma_closed(inv, s - 1)), Some(len)),
                None => (None, None),
            };
            pairing_holds &= pair_sum == zs;
            per_s.push(LevelRow { s, sigma, pair_sum, zs_length: zs });
        }
    }
    let g = geometric.total;
    let afl_holds = analytic_closed.map_or(true, |v| v == g) && analytic_oracle.map_or(true, |v| v == g);
    Ok(VerificationRecord {
        instance: *spec,
        label: spec.label(),
        precision,
        integral,
        analytic_closed,
        analytic_oracle,
        geometric_total: g,
        per_s,
        alpha_mismatches,
        pairing_holds,
        afl_holds,
        errata_notes: inv.as_ref().map(errata_notes).unwrap_or_default(),
        erratum_check: inv.as_ref().and_then(|i| erratum_check(i, g)),
        timings: opts.timings.then_some(Timings { closed_us, oracle_us, geometric_us }),
    })
}

/// Verifies one instance, doubling the precision after `PrecisionExhausted`
/// until the cap is reached.
pub fn verify_instance(spec: &InstanceSpec, opts: &VerifyOptions) -> Result<VerificationRecord> {
    if spec.m < 0 {
        return Err(AflError::InvalidInput("m must be non-negative"));
    }
    let hard_cap = PrecisionContext::max_precision(spec.p);
    let cap = opts.precision_max.map_or(hard_cap, |c| c.min(hard_cap));
    let mut precision = spec.precision.unwrap_or_else(|| default_precision(spec.p, spec.m, spec.va, spec.vb)).min(cap);
    loop {
        match verify_at(spec, precision, opts) {
            Err(AflError::PrecisionExhausted(_)) if precision < cap => {
                precision = (precision * 2).min(cap);
            }
            other => return other,
        }
    }
}

/// A rectangular parameter grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepGrid {
    pub primes: Vec<u32>,
    pub parities: Vec<Parity>,
    pub max_m: i32,
    pub max_va: i32,
    pub include_va_inf: bool,
    pub max_vb: i32,
    pub seeds: u64,
}

impl SweepGrid {
    /// Grid points in a fixed order: prime, parity, m, vb, va (finite
    /// first, then `inf`), seed.
    pub fn instances(&self) -> Vec<InstanceSpec> {
        let mut out = Vec::new();
        let mut vas: Vec<Option<i32>> = (0..=self.max_va).map(Some).collect();
        if self.include_va_inf {
            vas.push(None);
        }
        for &p in &self.primes {
            for &parity in &self.parities {
                for m in 0..=self.max_m {
                    for vb in 0..=self.max_vb {
                        for &va in &vas {
                            for seed in 0..self.seeds {
                                out.push(InstanceSpec { p, parity, m, va, vb, seed, precision: None });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Records in grid order up to the first error, which is reported
/// separately so that everything before it can still be written out.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<VerificationRecord>,
    pub error: Option<(InstanceSpec, AflError)>,
}

impl SweepOutcome {
    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.afl_holds && r.pairing_holds && r.alpha_mismatches.unwrap_or(0) == 0).count()
    }

    pub fn failed(&self) -> usize {
        self.records.len() - self.passed()
    }
}

/// Runs every grid point in parallel; the output order is the grid order.
pub fn sweep(specs: &[InstanceSpec], opts: &VerifyOptions) -> SweepOutcome {
    let results: Vec<Result<VerificationRecord>> = specs.par_iter().map(|s| verify_instance(s, opts)).collect();
    let mut records = Vec::with_capacity(results.len());
    for (spec, r) in specs.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => return SweepOutcome { records, error: Some((*spec, e)) },
        }
    }
    SweepOutcome { records, error: None }
}

/// Runs the group/Lie coset comparison for a canonical instance: `γ` is
/// the Cayley transform of the matching `y` at the first good `κ`, and `λ`
/// is the first good norm-one residue for `γ`. Also returns the derived
/// value of the group-side tally.
pub fn correspond_canonical(x: &CanonicalX, margin: u32, config: &OracleConfig) -> Result<(CorrespondReport, i64)> {
    let ctx = x.ctx();
    let y = x.build_match_y()?;
    let kappa = find_kappa(&y)?;
    let gamma = cayley(&y, &ctx.qone(), &ctx.embed(kappa))?;
    let lambda = find_lambda(&gamma)?;
    let window = x.default_window().widened(margin);
    let report = verify_correspond(&gamma, &lambda, &window, x.parity(), x.m(), config)?;
    let derived = report.tally_group.derived_value();
    Ok((report, derived))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: u32, parity: Parity, m: i32, va: Option<i32>, vb: i32) -> InstanceSpec {
        InstanceSpec { p, parity, m, va, vb, seed: 0, precision: None }
    }

    #[test]
    fn witness_records() {
        let opts = VerifyOptions::default();
        let r = verify_instance(&spec(5, Parity::Odd, 0, Some(0), 0), &opts).unwrap();
        assert_eq!((r.analytic_closed, r.analytic_oracle, r.geometric_total), (Some(1), Some(1), 1));
        assert!(r.afl_holds && r.pairing_holds);
        let r = verify_instance(&spec(5, Parity::Odd, 1, Some(1), 0), &opts).unwrap();
        assert_eq!((r.analytic_closed, r.analytic_oracle, r.geometric_total), (Some(4), Some(4), 4));
        assert_eq!(r.alpha_mismatches, Some(0));
    }

    #[test]
    fn non_integral_instance_is_zero() {
        let r = verify_instance(&spec(5, Parity::Odd, 0, Some(0), -1), &VerifyOptions::default()).unwrap();
        assert!(!r.integral);
        assert_eq!((r.analytic_closed, r.analytic_oracle, r.geometric_total), (Some(0), Some(0), 0));
        assert!(r.afl_holds);
    }

    #[test]
    fn erratum_is_visible_on_even_case_a() {
        let r = verify_instance(&spec(5, Parity::Even, 1, None, 1), &VerifyOptions::default()).unwrap();
        let e = r.erratum_check.unwrap();
        assert_eq!((e.sigma0_direct, e.sigma0_uncorrected), (2, 1));
        assert!(e.corrected_total_matches && e.corrected_pairing_holds);
        assert!(!e.uncorrected_total_matches && !e.uncorrected_pairing_holds);
        assert!(!r.errata_notes.is_empty());
    }

    #[test]
    fn grid_order_is_stable() {
        let g = SweepGrid { primes: vec![5], parities: vec![Parity::Odd], max_m: 0, max_va: 1, include_va_inf: true, max_vb: 0, seeds: 2 };
        let labels: Vec<_> = g.instances().iter().map(|s| s.label()).collect();
        assert_eq!(labels.len(), 6);
        assert_eq!(labels[0], "p5-odd-m0-va0-vb0-seed0");
        assert_eq!(labels[5], "p5-odd-m0-vainf-vb0-seed1");
        assert!(sweep(&[], &VerifyOptions::default()).records.is_empty());
    }
}
