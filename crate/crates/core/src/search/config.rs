use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid config field `{field}`: {reason}")]
pub struct ConfigInvalid {
    pub field: String,
    pub reason: String,
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigInvalid {
    ConfigInvalid { field: field.to_string(), reason: reason.into() }
}

/// Search hyperparameters. Unset fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Generator-call budget T per problem.
    pub budget: usize,
    pub islands: usize,
    pub capacity: usize,
    pub lambda: f64,
    pub beta: f64,
    pub eps_mad: f64,
    /// Probabilities of the full, diff and cross operators.
    pub operator_probs: [f64; 3],
    pub max_patch_attempts: usize,
    /// Repair calls allowed per proposal chain; 0 disables repair.
    pub repair_max_attempts: usize,
    pub repair_temperature: f64,
    pub patch_temperature: f64,
    pub seed_temperature: f64,
    /// (uniform archive picks, top-score picks) per context.
    pub inspiration_counts: [usize; 2],
    pub cross_k: usize,
    pub migration_interval: usize,
    pub migration_rate: f64,
    pub elitism_top: usize,
    pub seedbank_size: usize,
    pub evolast_enabled: bool,
    pub evolast_max_steps: usize,
    /// When false, every usage factor is 1.
    pub usage_penalty: bool,
    pub rng_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 100,
            islands: 2,
            capacity: 40,
            lambda: 10.0,
            beta: 0.05,
            eps_mad: 1e-9,
            operator_probs: [0.5, 0.3, 0.2],
            max_patch_attempts: 1,
            repair_max_attempts: 2,
            repair_temperature: 0.7,
            patch_temperature: 1.0,
            seed_temperature: 1.0,
            inspiration_counts: [4, 2],
            cross_k: 1,
            migration_interval: 10,
            migration_rate: 0.1,
            elitism_top: 1,
            seedbank_size: 16,
            evolast_enabled: true,
            evolast_max_steps: 3,
            usage_penalty: true,
            rng_seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigInvalid> {
        if self.islands == 0 {
            return Err(invalid("islands", "must be at least 1"));
        }
        if self.capacity == 0 {
            return Err(invalid("capacity", "must be at least 1"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid("lambda", "must be finite and nonnegative"));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(invalid("beta", "must be finite and nonnegative"));
        }
        if !(self.eps_mad.is_finite() && self.eps_mad > 0.0) {
            return Err(invalid("eps_mad", "must be positive"));
        }
        if self.operator_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("operator_probs", "each probability must lie in [0, 1]"));
        }
        let sum: f64 = self.operator_probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(invalid("operator_probs", format!("must sum to 1, got {sum}")));
        }
        if self.max_patch_attempts != 1 {
            return Err(invalid("max_patch_attempts", "only one proposal call per iteration is supported"));
        }
        for (field, t) in [
            ("repair_temperature", self.repair_temperature),
            ("patch_temperature", self.patch_temperature),
            ("seed_temperature", self.seed_temperature),
        ] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid(field, "must be finite and nonnegative"));
            }
        }
        if self.cross_k != 1 {
            return Err(invalid("cross_k", "the cross prompt carries exactly one inspiration"));
        }
        if self.migration_interval == 0 {
            return Err(invalid("migration_interval", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.migration_rate) {
            return Err(invalid("migration_rate", "must lie in [0, 1]"));
        }
        if self.evolast_max_steps == 0 {
            return Err(invalid("evolast_max_steps", "must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SearchConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_probs_and_islands() {
        let c = SearchConfig { operator_probs: [0.5, 0.3, 0.3], ..SearchConfig::default() };
        assert_eq!(c.validate().unwrap_err().field, "operator_probs");
        let c = SearchConfig { islands: 0, ..SearchConfig::default() };
        assert_eq!(c.validate().unwrap_err().field, "islands");
    }
}
