//! Scenarios and the end-to-end verification pipeline.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dilation::{self, DilationReport};
use crate::error::{Error, Result};
use crate::fundop::{self, FundamentalReport, IdentityReport};
use crate::gamma::{self, GammaClassification, OperatorPair, Verdict};
use crate::model::{self, ModelReport};
use crate::numlin;
use crate::sample;

pub const DEFAULT_MAX_POWER: usize = 5;
pub const DEFAULT_HORIZON: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    SymmetrizedRandom,
    RandomGammaUnitary,
    Explicit,
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetrized_random" => Ok(Generator::SymmetrizedRandom),
            "random_gamma_unitary" => Ok(Generator::RandomGammaUnitary),
            "explicit" => Ok(Generator::Explicit),
            other => Err(Error::InvalidInput(format!("unknown generator {other:?}"))),
        }
    }
}

/// Named tolerances of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Fundamental-equation residuals, relative to `1 + ‖S‖`.
    pub solver: f64,
    pub identities: f64,
    /// Slack on `ω(F) ≤ 1`.
    pub omega: f64,
    /// Slack on the `ρ` grid positivity test.
    pub positivity: f64,
    pub dilation: f64,
    pub structure: f64,
    pub restriction: f64,
    pub minimality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solver: 1e-10,
            identities: 1e-9,
            omega: 1e-8,
            positivity: 1e-8,
            dilation: 1e-9,
            structure: 1e-9,
            restriction: 1e-10,
            minimality: 1e-9,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 8] = [
        "solver",
        "identities",
        "omega",
        "positivity",
        "dilation",
        "structure",
        "restriction",
        "minimality",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance {name} must be positive and finite, got {value}"
            )));
        }
        let slot = match name {
            "solver" => &mut self.solver,
            "identities" => &mut self.identities,
            "omega" => &mut self.omega,
            "positivity" => &mut self.positivity,
            "dilation" => &mut self.dilation,
            "structure" => &mut self.structure,
            "restriction" => &mut self.restriction,
            "minimality" => &mut self.minimality,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown tolerance {other:?}; known: {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    /// Defaults overridden by `overrides`, in order.
    pub fn with_overrides<'a>(
        mut self,
        overrides: impl IntoIterator<Item = (&'a String, &'a f64)>,
    ) -> Result<Self> {
        for (k, v) in overrides {
            self.set(k, *v)?;
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub dimension: usize,
    pub generator: Generator,
    /// Required for explicit scenarios; generated scenarios store the pair
    /// they were drawn with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<OperatorPair>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn generate(seed: u64, dimension: usize, generator: Generator) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let mut rng = sample::rng(seed);
        let pair = match generator {
            Generator::SymmetrizedRandom => sample::symmetrized_pair(&mut rng, dimension),
            Generator::RandomGammaUnitary => sample::gamma_unitary_pair(&mut rng, dimension),
            Generator::Explicit => {
                return Err(Error::InvalidInput(
                    "explicit scenarios are written by hand, not generated".into(),
                ))
            }
        };
        Ok(Scenario {
            seed,
            dimension,
            generator,
            pair: Some(pair),
            tolerances: BTreeMap::new(),
        })
    }

    pub fn explicit(pair: OperatorPair) -> Self {
        Scenario {
            seed: 0,
            dimension: pair.dim(),
            generator: Generator::Explicit,
            pair: Some(pair),
            tolerances: BTreeMap::new(),
        }
    }

    /// The pair to verify: the stored one, or a regeneration from the seed.
    pub fn resolve_pair(&self) -> Result<OperatorPair> {
        if self.dimension == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let pair = match (&self.pair, self.generator) {
            (Some(p), _) => p.clone(),
            (None, Generator::Explicit) => {
                return Err(Error::InvalidInput("explicit scenario without a pair".into()))
            }
            (None, g) => Scenario::generate(self.seed, self.dimension, g)?
                .pair
                .expect("generated"),
        };
        if pair.dim() != self.dimension {
            return Err(Error::InvalidInput(format!(
                "scenario dimension {} differs from pair dimension {}",
                self.dimension,
                pair.dim()
            )));
        }
        Ok(pair)
    }
}

/// Seed and dimension of the `index`-th scenario of a sweep.
pub fn sweep_member(seed0: u64, index: u64, dim_max: usize) -> (u64, usize) {
    let seed = seed0.wrapping_add(index);
    let mut rng = sample::rng(seed ^ 0x5eed_5eed_5eed_5eed);
    (seed, rng.random_range(1..=dim_max.max(1)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSummary {
    #[serde(flatten)]
    pub report: FundamentalReport,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub tolerances: Tolerances,
    pub classification: GammaClassification,
    pub fundamental: Option<FundamentalSummary>,
    pub identity_suite: Option<IdentityReport>,
    pub dilation: Option<DilationReport>,
    pub model: Option<ModelReport>,
    /// Stage failures that prevented a sub-report.
    pub errors: Vec<String>,
    /// Wall-clock milliseconds per stage; the only nondeterministic field.
    pub timings_ms: BTreeMap<String, f64>,
    pub pass: bool,
}

impl RunReport {
    /// Flat map of the residuals that a sweep aggregates.
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("rho_min_eigenvalue_neg".into(), (-self.classification.is_gamma_contraction.min_eigenvalue).max(0.0));
        if let Some(f) = &self.fundamental {
            m.insert("fundamental_residual".into(), f.report.residual_f.max(f.report.residual_fstar));
            m.insert("omega_excess".into(), (f.report.omega_f.max(f.report.omega_fstar) - 1.0).max(0.0));
        }
        if let Some(i) = &self.identity_suite {
            m.insert("identity_suite".into(), i.max);
        }
        if let Some(d) = &self.dilation {
            m.insert("dilation_residual".into(), d.dilation_residual);
            m.insert("commutation".into(), d.commutation);
            m.insert("T0_eq_T0starU0".into(), d.t0_eq_t0star_u0);
            m.insert("U0_unitary".into(), d.u0_unitary);
            m.insert("Vflat_isometry".into(), d.structure.vflat_isometry);
            m.insert("Tflat_eq_TflatstarVflat".into(), d.structure.tflat_eq_tflatstar_vflat);
            m.insert("coextension".into(), d.structure.coextension_residual);
            m.insert("spectral_bound_excess".into(), {
                let s = &d.spectral_bound;
                (s.symbol_norm_f.max(s.symbol_norm_fstar).max(s.norm_s) - 2.0).max(0.0)
            });
            m.insert("minimality_coverage".into(), d.minimality.coverage_residual);
        }
        if let Some(md) = &self.model {
            m.insert("restriction_residual".into(), md.restriction_residual);
            let g = &md.gamma_coisometry_checks;
            m.insert("model_coisometry".into(), g.v_coisometry.max(g.commutation).max(g.tstar_eq_t_vstar));
            m.insert("B_vs_Fstar_window_residual".into(), md.b_vs_fstar_window_residual);
        }
        m
    }
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, name: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.insert(name.into(), start.elapsed().as_secs_f64() * 1e3);
    out
}

/// Runs classification, the fundamental solve, the identity suite, the
/// dilation checks and the co-isometric model. Stops after classification
/// when the pair is not a Γ-contraction.
///
/// `Err` only for invalid input; failed checks are reported with
/// `pass = false`.
pub fn run(scenario: &Scenario, overrides: &BTreeMap<String, f64>) -> Result<RunReport> {
    let tol = Tolerances::default()
        .with_overrides(&scenario.tolerances)?
        .with_overrides(overrides)?;
    let pair = scenario.resolve_pair()?;
    let n = pair.dim();
    let mut timings = BTreeMap::new();
    let mut errors = Vec::new();

    let classification = timed(&mut timings, "classify", || gamma::classify_pair(&pair, tol.positivity));
    let verdict = classification.is_gamma_contraction.verdict;
    let mut report = RunReport {
        scenario: scenario.clone(),
        tolerances: tol,
        classification,
        fundamental: None,
        identity_suite: None,
        dilation: None,
        model: None,
        errors: Vec::new(),
        timings_ms: BTreeMap::new(),
        pass: false,
    };
    if verdict == Verdict::No {
        report.timings_ms = timings;
        return Ok(report);
    }
    if verdict == Verdict::Inconclusive {
        errors.push("classification inconclusive: joint spectrum unavailable".into());
    }

    let fp = timed(&mut timings, "solve", || {
        fundop::solve_fundamental(&pair, numlin::default_rank_tol(n), tol.solver)
    });
    let fp = match fp {
        Ok(fp) => fp,
        Err(e) => {
            errors.push(format!("solve: {e}"));
            report.errors = errors;
            report.timings_ms = timings;
            return Ok(report);
        }
    };
    let fundamental_pass =
        fp.solved && fp.omega_f <= 1.0 + tol.omega && fp.omega_fstar <= 1.0 + tol.omega;
    report.fundamental = Some(FundamentalSummary {
        report: fp.report(),
        pass: fundamental_pass,
    });
    let ids = timed(&mut timings, "identity_suite", || fundop::identity_suite(&pair, &fp, tol.identities));
    report.identity_suite = Some(ids);

    match timed(&mut timings, "build_sznagy", || dilation::build_sznagy(&pair, &fp)) {
        Ok(bundle) => {
            let powers = timed(&mut timings, "verify_dilation", || {
                dilation::verify_dilation(&bundle, DEFAULT_MAX_POWER, tol.dilation)
            });
            let structure = timed(&mut timings, "verify_gamma_unitary_structure", || {
                dilation::verify_gamma_unitary_structure(&bundle, tol.structure)
            });
            let minimality = timed(&mut timings, "minimality_check", || {
                dilation::minimality_check(&bundle, DEFAULT_HORIZON, tol.minimality)
            });
            report.dilation = Some(DilationReport::assemble(&bundle, powers, structure, minimality));
        }
        Err(e) => errors.push(format!("build_sznagy: {e}")),
    }

    match timed(&mut timings, "build_coisometric_model", || {
        model::build_coisometric_model(&pair, &fp, tol.structure)
    }) {
        Ok(m) => {
            let mut r = m.report;
            r.pass = r.pass && r.restriction_residual <= tol.restriction;
            report.model = Some(r);
        }
        Err(e) => errors.push(format!("build_coisometric_model: {e}")),
    }

    report.pass = errors.is_empty()
        && verdict == Verdict::Yes
        && fundamental_pass
        && report.identity_suite.as_ref().is_some_and(|r| r.pass)
        && report.dilation.as_ref().is_some_and(|r| r.pass)
        && report.model.as_ref().is_some_and(|r| r.pass);
    report.errors = errors;
    report.timings_ms = timings;
    Ok(report)
}

/// Worst value of every metric over a set of reports, plus pass counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub count: usize,
    pub passed: usize,
    pub failed_seeds: Vec<u64>,
    pub worst: BTreeMap<String, f64>,
    pub pass: bool,
}

impl SweepAggregate {
    pub fn from_reports<'a>(reports: impl IntoIterator<Item = &'a RunReport>) -> Self {
        let mut count = 0;
        let mut passed = 0;
        let mut failed_seeds = Vec::new();
        let mut worst: BTreeMap<String, f64> = BTreeMap::new();
        for r in reports {
            count += 1;
            if r.pass {
                passed += 1;
            } else {
                failed_seeds.push(r.scenario.seed);
            }
            for (k, v) in r.metrics() {
                let e = worst.entry(k).or_insert(0.0);
                *e = e.max(v);
            }
        }
        SweepAggregate {
            count,
            passed,
            pass: count > 0 && passed == count,
            failed_seeds,
            worst,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{cr, scalar};

    #[test]
    fn gamma_unitary_scenario_passes_with_tiny_residuals() {
        let s = Scenario::generate(3, 4, Generator::RandomGammaUnitary).unwrap();
        let r = run(&s, &BTreeMap::new()).unwrap();
        assert!(r.pass, "{:?}", r.errors);
        for (k, v) in r.metrics() {
            assert!(v <= 1e-12, "{k} = {v}");
        }
    }

    #[test]
    fn non_gamma_pair_stops_after_classification() {
        let pair = OperatorPair::new(scalar(cr(3.0)), scalar(cr(0.0))).unwrap();
        let r = run(&Scenario::explicit(pair), &BTreeMap::new()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.classification.is_gamma_contraction.verdict, Verdict::No);
        assert!(r.fundamental.is_none() && r.dilation.is_none());
    }

    #[test]
    fn random_scenarios_pass() {
        for seed in 0..5 {
            let s = Scenario::generate(seed, 1 + seed as usize, Generator::SymmetrizedRandom).unwrap();
            let r = run(&s, &BTreeMap::new()).unwrap();
            assert!(r.pass, "seed {seed}: {:?}", r.errors);
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(Scenario::generate(1, 0, Generator::SymmetrizedRandom).is_err());
        let s = Scenario::generate(1, 2, Generator::SymmetrizedRandom).unwrap();
        let mut o = BTreeMap::new();
        o.insert("bogus".to_string(), 1e-3);
        assert!(run(&s, &o).is_err());
        let mut o = BTreeMap::new();
        o.insert("solver".to_string(), -1.0);
        assert!(run(&s, &o).is_err());
    }

    #[test]
    fn regenerated_pair_matches_stored_pair() {
        let mut s = Scenario::generate(9, 3, Generator::SymmetrizedRandom).unwrap();
        let stored = s.pair.take().unwrap();
        assert_eq!(s.resolve_pair().unwrap(), stored);
    }
}
