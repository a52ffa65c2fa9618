use std::fs;
use std::path::{Path, PathBuf};

use gnnx_core::attacks::SynthesisMode;
use gnnx_core::checkpoint::Checkpoint;
use gnnx_core::datasets::{generate_citation_like, load_bundle, make_shadow_split, write_bundle, SyntheticSpec};
use gnnx_core::eval::{
    accuracy, attack_victim, run_sweep, sweep_csv, train_victim, EvalNodes, ExperimentConfig, ExperimentReport,
    Method, Scenario, SweepAxis,
};
use gnnx_core::gcn::{predict, GcnModel, TrainConfig};
use gnnx_core::{normalize_adjacency, rng, Error, Result};
use log::info;

use crate::args::{AttackArgs, AttackOpts, EvalArg, GenerateArgs, MethodArg, Preset, SplitArgs, SweepArgs, TrainTargetArgs};

/// Creates `out` and refuses to clobber any of `files` unless `force`.
fn prepare_out(out: &Path, files: &[&str], force: bool) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    if !force {
        if let Some(f) = files.iter().find(|f| out.join(f).exists()) {
            return Err(Error::InvalidConfig(format!(
                "{} already exists (use --force to overwrite)",
                out.join(f).display()
            )));
        }
    }
    Ok(())
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn json_text(v: &serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn train_config(epochs: Option<usize>) -> TrainConfig {
    let mut cfg = TrainConfig::default();
    if let Some(e) = epochs {
        cfg.epochs = e;
    }
    cfg
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    let mut spec = match a.preset {
        Preset::CoraLike => SyntheticSpec::cora_like(a.nodes),
        Preset::CiteseerLike => SyntheticSpec::citeseer_like(a.nodes),
        Preset::PubmedLike => SyntheticSpec::pubmed_like(a.nodes),
    };
    if let Some(n) = &a.name {
        spec.name = n.clone();
    }
    prepare_out(&a.output.out, &["meta.json"], a.output.force)?;
    let bundle = generate_citation_like(&spec, a.seed)?;
    write_bundle(&bundle, &a.output.out)?;
    info!("wrote {} ({} nodes, {} edges)", bundle.name, bundle.graph.num_nodes(), bundle.graph.num_edges());
    Ok(())
}

pub fn train_target(a: &TrainTargetArgs) -> Result<()> {
    let out = &a.output.out;
    prepare_out(out, &["victim.ckpt", "victim_metrics.json"], a.output.force)?;
    let bundle = load_bundle(&a.dataset)?;
    let split = bundle.split_or_default(a.seed)?;
    let cfg = train_config(a.epochs);
    cfg.validate()?;
    let victim = train_victim(&bundle, &split, &cfg, a.seed)?;

    let g = &bundle.graph;
    let attrs = g.attributes().ok_or_else(|| Error::InvalidConfig("bundle has no attributes".into()))?;
    let labels = g.labels().ok_or_else(|| Error::InvalidConfig("bundle has no labels".into()))?;
    let preds = predict(&victim, &normalize_adjacency(g), attrs)?;
    let acc = |nodes: &[usize]| accuracy(preds.hard_labels(), labels, nodes);
    let metrics = serde_json::json!({
        "dataset": bundle.name,
        "seed": a.seed,
        "num_nodes": g.num_nodes(),
        "num_classes": bundle.num_classes,
        "train_accuracy": acc(split.train.ids())?,
        "val_accuracy": acc(split.val.ids())?,
        "test_accuracy": acc(split.test.ids())?,
    });

    let used = cfg.with_seed(rng::derive_seed(a.seed, rng::TAG_VICTIM));
    let ck = victim.to_checkpoint(&used, serde_json::json!({ "dataset": bundle.name, "run_seed": a.seed }));
    ck.write(&out.join("victim.ckpt"))?;
    write_text(&out.join("victim_metrics.json"), &json_text(&metrics)?)?;
    info!("victim test accuracy {}", metrics["test_accuracy"]);
    Ok(())
}

fn experiment_config(o: &AttackOpts, dataset: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::for_attack(o.attack_id);
    cfg.dataset = dataset.to_string();
    if let Some(f) = o.attacker_fraction {
        cfg.attacker_fraction = f;
    }
    if let Some(al) = o.alpha {
        cfg.attack.alpha = al;
    }
    if let Some(m) = &o.synthesis_mode {
        cfg.attack.synthesis = m.parse::<SynthesisMode>()?;
    }
    cfg.seeds = o.seeds.clone();
    cfg.train = train_config(o.epochs);
    cfg.method = match o.method {
        MethodArg::Attack => Method::Attack,
        MethodArg::DnnBaseline => Method::DnnBaseline,
    };
    cfg.eval_nodes = match o.eval_nodes {
        EvalArg::Test => EvalNodes::Test,
        EvalArg::All => EvalNodes::All,
    };
    cfg.timing = o.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn load_victim(path: &Path) -> Result<(GcnModel, u64)> {
    let ck = Checkpoint::read(path)?;
    let (model, _) = GcnModel::from_checkpoint(&ck)?;
    let run_seed = ck.meta["extra"]["run_seed"]
        .as_u64()
        .ok_or_else(|| Error::Checkpoint(format!("{}: victim checkpoint lacks run_seed", path.display())))?;
    Ok((model, run_seed))
}

pub fn attack(a: &AttackArgs) -> Result<()> {
    let n = a.attack.attack_id;
    let names = [
        format!("surrogate_attack{n}.ckpt"),
        format!("report_attack{n}.json"),
        format!("report_attack{n}.csv"),
    ];
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    // Everything is checked before the first file is read.
    let cfg = experiment_config(&a.attack, "")?;
    if cfg.uses_shadow()? && a.shadow.is_none() {
        return Err(Error::Taxonomy {
            attack: n,
            missing: "shadow graph (pass --shadow)",
        });
    }
    prepare_out(&a.output.out, &refs, a.output.force)?;

    let bundle = load_bundle(&a.attack.dataset)?;
    let shadow = match (&a.shadow, cfg.uses_shadow()?) {
        (Some(p), true) => Some(load_bundle(p)?),
        _ => None,
    };
    let victim = a.victim.as_deref().map(load_victim).transpose()?;
    let mut cfg = cfg;
    cfg.dataset = bundle.name.clone();

    let mut runs = Vec::new();
    let mut first = None;
    for &seed in &cfg.seeds {
        let ctx = || format!("{} attack-{n} seed {seed}", bundle.name);
        let split_seed = victim.as_ref().map_or(seed, |(_, s)| *s);
        let scenario = Scenario {
            target: bundle.clone(),
            split: bundle.split_or_default(split_seed)?,
            shadow: shadow.clone(),
        };
        let trained;
        let model = match &victim {
            Some((m, _)) => m,
            None => {
                trained = train_victim(&scenario.target, &scenario.split, &cfg.train, seed).map_err(|e| e.context(ctx()))?;
                &trained
            }
        };
        let (result, extracted) = attack_victim(&scenario, model, &cfg, seed).map_err(|e| e.context(ctx()))?;
        info!("seed {seed}: accuracy {:.4} fidelity {:.4} queries {}", result.accuracy, result.fidelity, result.queries);
        runs.push(result);
        if first.is_none() {
            first = Some((seed, extracted));
        }
    }
    let (seed, extracted) = first.expect("validated config has at least one seed");
    let report = ExperimentReport::new(cfg, runs);
    let out = &a.output.out;
    extracted
        .to_checkpoint(serde_json::json!({ "dataset": bundle.name, "attack_id": n, "seed": seed }))
        .write(&out.join(&names[0]))?;
    write_text(&out.join(&names[1]), &report.to_json()?)?;
    let label = format!("{}", report.config.attacker_fraction);
    write_text(&out.join(&names[2]), &sweep_csv(&[label], std::slice::from_ref(&report)))?;
    Ok(())
}

pub fn split(a: &SplitArgs) -> Result<()> {
    let out = &a.output.out;
    for side in ["target", "shadow"] {
        prepare_out(&out.join(side), &["meta.json"], a.output.force)?;
    }
    let bundle = load_bundle(&a.dataset)?;
    let (target, shadow) = make_shadow_split(&bundle, a.target_fraction, a.seed)?;
    write_bundle(&target, &out.join("target"))?;
    write_bundle(&shadow, &out.join("shadow"))?;
    info!(
        "target {} nodes, shadow {} nodes",
        target.graph.num_nodes(),
        shadow.graph.num_nodes()
    );
    Ok(())
}

fn point_file(n: u8, axis: SweepAxis, value: &str) -> String {
    let clean: String = value
        .trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect();
    format!("report_attack{n}_{axis}_{clean}.json")
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let axis: SweepAxis = a.sweep_axis.parse()?;
    let mut base = experiment_config(&a.attack, "")?;
    base.shadow_target_fraction = a.target_fraction;
    base.validate()?;
    let n = base.attack_id;
    let mut names: Vec<String> = a.sweep_values.iter().map(|v| point_file(n, axis, v)).collect();
    names.push(format!("sweep_attack{n}_{axis}.csv"));
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    // Validates every point before any training.
    gnnx_core::eval::sweep_configs(&base, axis, &a.sweep_values)?;
    prepare_out(&a.output.out, &refs, a.output.force)?;

    let bundle = load_bundle(&a.attack.dataset)?;
    base.dataset = bundle.name.clone();
    let reports = run_sweep(&bundle, &base, axis, &a.sweep_values)?;
    let out: PathBuf = a.output.out.clone();
    for (name, r) in names.iter().zip(&reports) {
        write_text(&out.join(name), &r.to_json()?)?;
    }
    write_text(&out.join(names.last().unwrap()), &sweep_csv(&a.sweep_values, &reports))?;
    Ok(())
}
