use serde::Serialize;

use crate::numdiff::DiffConfig;
use crate::sampling::SamplePlan;

/// One gating predicate of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: bool,
    pub samples_used: usize,
    pub excluded_samples: usize,
}

impl Check {
    /// Passes iff `residual ≤ tolerance` (NaN never passes).
    pub fn threshold(name: impl Into<String>, residual: f64, tolerance: f64, samples_used: usize) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            verdict: residual <= tolerance,
            samples_used,
            excluded_samples: 0,
        }
    }

    pub fn excluding(mut self, excluded: usize) -> Self {
        self.excluded_samples = excluded;
        self
    }
}

/// A non-gating measured quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub name: String,
    pub value: f64,
    /// Threshold the value was compared against, when one applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub config: DiffConfig,
    pub plan: SamplePlan,
    pub provenance: String,
    pub notes: Vec<String>,
}

/// Named checks for one scenario; `overall` is the conjunction of verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub scenario_id: String,
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    pub overall: bool,
    pub metadata: ReportMetadata,
}

impl VerificationReport {
    pub fn new(scenario_id: impl Into<String>, plan: &SamplePlan, cfg: &DiffConfig, provenance: impl Into<String>) -> Self {
        Self {
            scenario_id: scenario_id.into(),
            checks: Vec::new(),
            observations: Vec::new(),
            overall: true,
            metadata: ReportMetadata {
                config: *cfg,
                plan: *plan,
                provenance: provenance.into(),
                notes: Vec::new(),
            },
        }
    }

    pub fn push(&mut self, check: Check) {
        self.overall &= check.verdict;
        self.checks.push(check);
    }

    pub fn observe(&mut self, name: impl Into<String>, value: f64) {
        self.observations.push(Observation {
            name: name.into(),
            value,
            tolerance: None,
        });
    }

    pub fn observe_against(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.observations.push(Observation {
            name: name.into(),
            value,
            tolerance: Some(tolerance),
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.metadata.notes.push(note.into());
    }

    /// Merges the checks and observations of `other` under a name prefix.
    pub fn absorb(&mut self, prefix: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.push(c);
        }
        for mut o in other.observations {
            o.name = format!("{prefix}{}", o.name);
            self.observations.push(o);
        }
        self.metadata.notes.extend(other.metadata.notes);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn observation(&self, name: &str) -> Option<f64> {
        self.observations.iter().find(|o| o.name == name).map(|o| o.value)
    }

    /// Recomputes `overall` from the checks.
    pub fn is_sound(&self) -> bool {
        self.overall == self.checks.iter().all(|c| c.verdict)
    }
}

/// A residual with the tolerance it is judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Side {
    pub residual: f64,
    pub tolerance: f64,
}

impl Side {
    pub fn new(residual: f64, tolerance: f64) -> Self {
        Self { residual, tolerance }
    }

    pub fn passes(&self) -> bool {
        self.residual <= self.tolerance
    }

    pub fn ratio(&self) -> f64 {
        self.residual / self.tolerance
    }

    /// Conjunction: passes iff both pass; ratio is the larger one.
    pub fn and(self, other: Side) -> Side {
        if self.ratio().is_nan() || self.ratio() >= other.ratio() {
            self
        } else {
            other
        }
    }
}

/// Coupling factor between the two sides of an equivalence or implication.
pub const COUPLING: f64 = 10.0;

/// "Whenever all premises pass, the conclusion passes at `COUPLING`× its
/// tolerance". The residual is the conclusion's residual/tolerance ratio
/// when it is required (0 otherwise), compared against `COUPLING`.
pub fn implication(name: impl Into<String>, rules: &[(&[Side], Side)], samples_used: usize) -> Check {
    let residual = rules
        .iter()
        .filter(|(premises, _)| premises.iter().all(Side::passes))
        .map(|(_, concl)| concl.ratio())
        .fold(0.0, nan_max);
    Check::threshold(name, residual, COUPLING, samples_used)
}

/// Two-way [`implication`].
pub fn equivalence(name: impl Into<String>, a: Side, b: Side, samples_used: usize) -> Check {
    implication(name, &[(&[a], b), (&[b], a)], samples_used)
}

/// `max` that propagates NaN instead of dropping it.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
