use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, fidelity, mean_std};
use crate::adjacency::normalize_adjacency;
use crate::attacks::{self, AttackKnowledge, AttackParams, ShadowKnowledge, Surrogate};
use crate::datasets::{
    make_shadow_split, sample_attacker_nodes, snowball_subsample, DatasetBundle, Split,
};
use crate::error::{Error, Result};
use crate::gcn::{predict, train, train_mlp, GcnModel, Mlp, TrainConfig};
use crate::par::{self, Exec};
use crate::rng;

/// Which model the attacker trains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// The attack's own surrogate.
    #[default]
    Attack,
    /// A structure-free MLP on the attack's attacker attributes and labels.
    DnnBaseline,
}

/// Nodes on which accuracy and fidelity are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalNodes {
    /// The victim's test split.
    #[default]
    Test,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub attack_id: u8,
    pub method: Method,
    pub attacker_fraction: f64,
    pub seeds: Vec<u64>,
    pub attack: AttackParams,
    pub train: TrainConfig,
    /// Share of nodes given to the target side of a community split.
    pub shadow_target_fraction: f64,
    /// Shadow graph size relative to the target graph; below 1 the shadow
    /// side is shrunk by snowball sampling.
    pub shadow_size_ratio: f64,
    pub eval_nodes: EvalNodes,
    /// Record wall-clock seconds per run. Off by default so reports are
    /// byte-for-byte reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_attack(0)
    }
}

impl ExperimentConfig {
    /// Defaults for one attack: 25% attacker nodes for the attacks without a
    /// shadow graph, 10% for those with one, and five seeds.
    pub fn for_attack(attack_id: u8) -> Self {
        Self {
            dataset: String::new(),
            attack_id,
            method: Method::Attack,
            attacker_fraction: if attack_id >= 3 { 0.10 } else { 0.25 },
            seeds: (0..5).collect(),
            attack: AttackParams::default(),
            train: TrainConfig::default(),
            shadow_target_fraction: 0.5,
            shadow_size_ratio: 1.0,
            eval_nodes: EvalNodes::Test,
            timing: false,
        }
    }

    pub fn uses_shadow(&self) -> Result<bool> {
        Ok(attacks::taxonomy(self.attack_id)?.shadow)
    }

    pub fn validate(&self) -> Result<()> {
        let row = attacks::taxonomy(self.attack_id)?;
        self.attack.validate()?;
        self.train.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        if !(self.attacker_fraction > 0.0 && self.attacker_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "attacker fraction {} outside (0, 1]",
                self.attacker_fraction
            )));
        }
        if !(self.shadow_target_fraction > 0.0 && self.shadow_target_fraction < 1.0) {
            return Err(Error::InvalidConfig("shadow_target_fraction must be in (0, 1)".into()));
        }
        if !(self.shadow_size_ratio > 0.0) {
            return Err(Error::InvalidConfig("shadow_size_ratio must be > 0".into()));
        }
        if self.method == Method::DnnBaseline && !row.attributes {
            return Err(Error::Taxonomy {
                attack: self.attack_id,
                missing: "attacker node attributes (needed by the DNN baseline)",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub accuracy: f64,
    pub fidelity: f64,
    pub victim_accuracy: f64,
    pub queries: usize,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub fidelity_mean: f64,
    pub fidelity_std: f64,
    pub victim_accuracy_mean: f64,
    pub victim_accuracy_std: f64,
    pub queries_mean: f64,
    /// Set when only one seed ran, in which case every std is 0.
    pub single_seed: bool,
}

impl Aggregate {
    pub fn from_runs(runs: &[SeedResult]) -> Self {
        let col = |f: fn(&SeedResult) -> f64| mean_std(&runs.iter().map(f).collect::<Vec<_>>());
        let (accuracy_mean, accuracy_std) = col(|r| r.accuracy);
        let (fidelity_mean, fidelity_std) = col(|r| r.fidelity);
        let (victim_accuracy_mean, victim_accuracy_std) = col(|r| r.victim_accuracy);
        let (queries_mean, _) = col(|r| r.queries as f64);
        Self {
            accuracy_mean,
            accuracy_std,
            fidelity_mean,
            fidelity_std,
            victim_accuracy_mean,
            victim_accuracy_std,
            queries_mean,
            single_seed: runs.len() == 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub per_seed: Vec<SeedResult>,
    pub aggregate: Aggregate,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, per_seed: Vec<SeedResult>) -> Self {
        let aggregate = Aggregate::from_runs(&per_seed);
        Self {
            config,
            per_seed,
            aggregate,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// The target graph (with its split) and, for shadow attacks, the shadow graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub target: DatasetBundle,
    pub split: Split,
    pub shadow: Option<DatasetBundle>,
}

/// Prepares one seed's data: a community split into target and shadow
/// sides when the attack uses a shadow graph, the whole bundle otherwise.
pub fn prepare_scenario(bundle: &DatasetBundle, cfg: &ExperimentConfig, seed: u64) -> Result<Scenario> {
    if cfg.uses_shadow()? {
        let (target, shadow) = make_shadow_split(bundle, cfg.shadow_target_fraction, seed)?;
        let shadow = if cfg.shadow_size_ratio < 1.0 {
            let want = (cfg.shadow_size_ratio * target.graph.num_nodes() as f64).round() as usize;
            snowball_subsample(&shadow, want.clamp(1, shadow.graph.num_nodes()), seed)?
        } else {
            shadow
        };
        let split = target.split.clone().expect("community split assigns a split");
        Ok(Scenario {
            target,
            split,
            shadow: Some(shadow),
        })
    } else {
        Ok(Scenario {
            split: bundle.split_or_default(seed)?,
            target: bundle.clone(),
            shadow: None,
        })
    }
}

/// Victim GCN trained on the target's training nodes.
pub fn train_victim(target: &DatasetBundle, split: &Split, cfg: &TrainConfig, seed: u64) -> Result<GcnModel> {
    let cfg = cfg.with_seed(rng::derive_seed(seed, rng::TAG_VICTIM));
    train(&target.graph, &split.train, &split.val, target.num_classes, &cfg)
}

fn eval_nodes(target: &DatasetBundle, split: &Split, which: EvalNodes) -> Vec<usize> {
    match which {
        EvalNodes::Test => split.test.ids().to_vec(),
        EvalNodes::All => (0..target.graph.num_nodes()).collect(),
    }
}

/// A trained extraction result.
#[derive(Debug, Clone, PartialEq)]
pub enum Extracted {
    Surrogate(Surrogate),
    Baseline(Mlp),
}

impl Extracted {
    pub fn to_checkpoint(&self, meta: serde_json::Value) -> crate::checkpoint::Checkpoint {
        match self {
            Extracted::Surrogate(s) => s.to_checkpoint(meta),
            Extracted::Baseline(m) => m.to_checkpoint(meta),
        }
    }
}

/// Structure-free baseline: an MLP (`feature_dim → hidden → C`) on the
/// attacker nodes' attributes and oracle labels.
pub fn dnn_baseline(k: &AttackKnowledge<'_>, cfg: &TrainConfig) -> Result<Mlp> {
    let attrs = k.known_attrs.as_ref().ok_or(Error::Taxonomy {
        attack: 1,
        missing: "attacker node attributes",
    })?;
    let labels = k.oracle.query(k.attacker_nodes.ids())?;
    let targets: Vec<(usize, usize)> = labels.into_iter().enumerate().collect();
    train_mlp(attrs, &targets, k.domain.num_classes, cfg)
}

/// Runs one attack (or the baseline) against a fixed victim and scores it.
pub fn attack_victim(
    scenario: &Scenario,
    victim: &GcnModel,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(SeedResult, Extracted)> {
    let target = &scenario.target;
    let graph = &target.graph;
    let attrs = graph
        .attributes()
        .ok_or_else(|| Error::InvalidConfig("target graph has no attributes".into()))?;
    let labels = graph
        .labels()
        .ok_or_else(|| Error::InvalidConfig("target graph has no labels".into()))?;
    let adj = normalize_adjacency(graph);
    let oracle = crate::gcn::Oracle::new(victim, &adj, attrs)?;
    let attackers = sample_attacker_nodes(graph.num_nodes(), cfg.attacker_fraction, seed)?;
    let shadow = match &scenario.shadow {
        Some(b) => {
            let split = b.split_or_default(seed)?;
            Some(ShadowKnowledge {
                graph: b.graph.clone(),
                train: split.train,
                val: split.val,
            })
        }
        None => None,
    };
    let knowledge = AttackKnowledge::observe(
        cfg.attack_id,
        graph,
        &attackers,
        shadow,
        &oracle,
        target.num_classes,
        cfg.attack.clone(),
    )?;
    let sub_cfg = cfg.train.with_seed(rng::derive_seed(seed, rng::TAG_SURROGATE));
    let start = Instant::now();
    let (extracted, preds) = match cfg.method {
        Method::Attack => {
            let s = attacks::extract(cfg.attack_id, &knowledge, &sub_cfg)?;
            let p = s.predict(graph)?;
            (Extracted::Surrogate(s), p)
        }
        Method::DnnBaseline => {
            let m = dnn_baseline(&knowledge, &sub_cfg)?;
            let p = m.predict(attrs)?;
            (Extracted::Baseline(m), p)
        }
    };
    let seconds = cfg.timing.then(|| start.elapsed().as_secs_f64());
    let victim_preds = predict(victim, &adj, attrs)?;
    let nodes = eval_nodes(target, &scenario.split, cfg.eval_nodes);
    let result = SeedResult {
        seed,
        accuracy: accuracy(preds.hard_labels(), labels, &nodes)?,
        fidelity: fidelity(preds.hard_labels(), victim_preds.hard_labels(), &nodes)?,
        victim_accuracy: accuracy(victim_preds.hard_labels(), labels, &nodes)?,
        queries: oracle.query_count(),
        seconds,
    };
    Ok((result, extracted))
}

/// One full run: scenario, victim and attack for `seed`.
pub fn run_seed(bundle: &DatasetBundle, cfg: &ExperimentConfig, seed: u64) -> Result<(SeedResult, Extracted)> {
    let scenario = prepare_scenario(bundle, cfg, seed)?;
    let victim = train_victim(&scenario.target, &scenario.split, &cfg.train, seed)?;
    attack_victim(&scenario, &victim, cfg, seed)
}

/// Every seed of `cfg` (seeds run in parallel), aggregated.
pub fn run_experiment(bundle: &DatasetBundle, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(bundle, cfg, Exec::default())
}

pub fn run_experiment_with(bundle: &DatasetBundle, cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    cfg.validate()?;
    let runs = par::map(exec, cfg.seeds.len(), |i| {
        let seed = cfg.seeds[i];
        run_seed(bundle, cfg, seed)
            .map(|(r, _)| r)
            .map_err(|e| e.context(format!("{} attack-{} seed {seed}", bundle.name, cfg.attack_id)))
    });
    let per_seed = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut config = cfg.clone();
    if config.dataset.is_empty() {
        config.dataset = bundle.name.clone();
    }
    Ok(ExperimentReport::new(config, per_seed))
}

