use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::experiment::{run_experiment_with, ExperimentConfig, ExperimentReport};
use crate::attacks::SynthesisMode;
use crate::datasets::DatasetBundle;
use crate::error::{Error, Result};
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    AttackerFraction,
    Alpha,
    /// Shadow graph size relative to the target graph.
    ShadowFraction,
    SynthesisMode,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::AttackerFraction => "attacker_fraction",
            SweepAxis::Alpha => "alpha",
            SweepAxis::ShadowFraction => "shadow_fraction",
            SweepAxis::SynthesisMode => "synthesis_mode",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "attacker_fraction" => Ok(SweepAxis::AttackerFraction),
            "alpha" => Ok(SweepAxis::Alpha),
            "shadow_fraction" => Ok(SweepAxis::ShadowFraction),
            "synthesis_mode" => Ok(SweepAxis::SynthesisMode),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep axis {other:?} (expected attacker_fraction, alpha, shadow_fraction or synthesis_mode)"
            ))),
        }
    }
}

impl SweepAxis {
    /// Whether sweeping this axis changes anything for `attack_id`.
    pub fn applies_to(self, attack_id: u8) -> bool {
        match self {
            SweepAxis::AttackerFraction => attack_id != 3,
            SweepAxis::Alpha | SweepAxis::SynthesisMode => matches!(attack_id, 0 | 4),
            SweepAxis::ShadowFraction => (3..=6).contains(&attack_id),
        }
    }
}

fn parse_number(axis: SweepAxis, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{axis} value {v:?} is not a number")))
}

/// One config per sweep value, all sharing `base`'s seeds.
pub fn sweep_configs(base: &ExperimentConfig, axis: SweepAxis, values: &[String]) -> Result<Vec<ExperimentConfig>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    if !axis.applies_to(base.attack_id) {
        return Err(Error::InvalidConfig(format!(
            "axis {axis} does not apply to attack-{}",
            base.attack_id
        )));
    }
    values
        .iter()
        .map(|v| {
            let mut cfg = base.clone();
            match axis {
                SweepAxis::AttackerFraction => cfg.attacker_fraction = parse_number(axis, v)?,
                SweepAxis::Alpha => cfg.attack.alpha = parse_number(axis, v)?,
                SweepAxis::ShadowFraction => cfg.shadow_size_ratio = parse_number(axis, v)?,
                SweepAxis::SynthesisMode => cfg.attack.synthesis = v.trim().parse::<SynthesisMode>()?,
            }
            cfg.validate()?;
            Ok(cfg)
        })
        .collect()
}

/// One report per value; points run in parallel.
pub fn run_sweep(
    bundle: &DatasetBundle,
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[String],
) -> Result<Vec<ExperimentReport>> {
    let configs = sweep_configs(base, axis, values)?;
    par::map(Exec::default(), configs.len(), |i| {
        run_experiment_with(bundle, &configs[i], Exec::default())
            .map_err(|e| e.context(format!("{axis} = {}", values[i])))
    })
    .into_iter()
    .collect()
}

/// `axis_value,metric,mean,std` with one row per (value, metric).
pub fn sweep_csv(values: &[String], reports: &[ExperimentReport]) -> String {
    let mut s = String::from("axis_value,metric,mean,std\n");
    for (v, r) in values.iter().zip(reports) {
        let a = &r.aggregate;
        writeln!(s, "{},accuracy,{},{}", v.trim(), a.accuracy_mean, a.accuracy_std).unwrap();
        writeln!(s, "{},fidelity,{},{}", v.trim(), a.fidelity_mean, a.fidelity_std).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn axis_names_round_trip() {
        for axis in [
            SweepAxis::AttackerFraction,
            SweepAxis::Alpha,
            SweepAxis::ShadowFraction,
            SweepAxis::SynthesisMode,
        ] {
            assert_eq!(axis.to_string().parse::<SweepAxis>().unwrap(), axis);
        }
        assert_eq!("attacker-fraction".parse::<SweepAxis>().unwrap(), SweepAxis::AttackerFraction);
        assert!("depth".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn configs_follow_values() {
        let base = ExperimentConfig::for_attack(0);
        let c = sweep_configs(&base, SweepAxis::Alpha, &strings(&["0.2", "0.9"])).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].attack.alpha, 0.9);
        assert_eq!(c[0].seeds, base.seeds);
        let m = sweep_configs(&base, SweepAxis::SynthesisMode, &strings(&["none", "first-order"])).unwrap();
        assert_eq!(m[1].attack.synthesis, SynthesisMode::FirstOrder);
        assert!(sweep_configs(&base, SweepAxis::Alpha, &strings(&["1.5"])).is_err());
        assert!(sweep_configs(&base, SweepAxis::Alpha, &[]).is_err());
    }

    #[test]
    fn axis_must_fit_attack() {
        let a2 = ExperimentConfig::for_attack(2);
        assert!(sweep_configs(&a2, SweepAxis::Alpha, &strings(&["0.5"])).is_err());
        assert!(sweep_configs(&a2, SweepAxis::ShadowFraction, &strings(&["0.5"])).is_err());
        let a3 = ExperimentConfig::for_attack(3);
        assert!(sweep_configs(&a3, SweepAxis::ShadowFraction, &strings(&["0.5"])).is_ok());
    }
}
