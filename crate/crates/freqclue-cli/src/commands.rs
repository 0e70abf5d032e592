use std::path::Path;

use freqclue_core::backbone::BackboneSpec;
use freqclue_core::classifier::{self, LinearHead, TrainConfig};
use freqclue_core::data::manifest::DatasetManifest;
use freqclue_core::data::perturb::{perturb_corpus, PerturbationSpec};
use freqclue_core::data::synth::{synth_corpus, SynthConfig};
use freqclue_core::error::{Error, Result};
use freqclue_core::pipeline::{extract_batch, FeatureRecord, PipelineConfig};
use freqclue_core::weighting::{band_energies, WeightMatrix};
use freqclue_core::{dct2_batch, feature_file, metrics, util};
use log::info;

use crate::{EvalArgs, ExtractArgs, InspectArgs, InspectCommand, PerturbArgs, PipelineArgs, SynthArgs, TrainArgs};

impl PipelineArgs {
    fn to_config(&self) -> Result<PipelineConfig> {
        let config = PipelineConfig {
            frames: self.frames,
            grid: self.blocks.parse()?,
            beta: self.beta,
            reduction: self.reduction.parse()?,
            backbone: BackboneSpec::parse(&self.backbone, self.seed)?,
            epsilon: self.epsilon,
            resize: self.resize,
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let config = SynthConfig {
        per_class: args.per_class,
        frames: args.frames,
        size: args.size,
        factor: args.factor,
        mode: args.mode.parse()?,
        seed: args.seed,
        train_fraction: args.train_frac,
    };
    let manifest = synth_corpus(&config, &args.out)?;
    info!(
        "synthesized {} videos into {}",
        manifest.len(),
        args.out.display()
    );
    println!(
        "{}",
        serde_json::json!({
            "manifest": args.out.join("manifest.jsonl"),
            "videos": manifest.len(),
        })
    );
    Ok(())
}

pub fn perturb(args: PerturbArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let spec = PerturbationSpec::parse(&args.perturb, args.seed)?;
    let out_manifest = perturb_corpus(&manifest, &spec, &args.out)?;
    let provenance = serde_json::json!({
        "source": args.manifest,
        "perturbation": spec.id(),
        "seed": args.seed,
        "config_fingerprint": util::short_hash(format!("{};{}", spec.id(), args.seed).as_bytes()),
    });
    util::write_atomic(
        &args.out.join("perturb.json"),
        serde_json::to_string_pretty(&provenance)
            .expect("provenance serializes")
            .as_bytes(),
    )?;
    info!(
        "perturbed {} videos into {}",
        out_manifest.len(),
        args.out.display()
    );
    println!(
        "{}",
        serde_json::json!({
            "manifest": args.out.join("manifest.jsonl"),
            "videos": out_manifest.len(),
        })
    );
    Ok(())
}

pub fn extract(args: ExtractArgs) -> Result<()> {
    let config = args.pipeline.to_config()?;
    let mut manifest = DatasetManifest::load(&args.manifest)?;
    if let Some(split) = &args.split {
        manifest = manifest.filter_split(split)?;
    }
    info!(
        "extracting {} videos with {} workers",
        manifest.len(),
        args.workers.max(1)
    );
    let records = extract_batch(&manifest, &config, args.workers)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    feature_file::write_jsonl(&args.out.join("features.jsonl"), &records)?;
    feature_file::write_binary(&args.out.join("features.fcf"), &records)?;
    let run = serde_json::json!({
        "config_fingerprint": config.fingerprint(),
        "frames": config.frames,
        "blocks": config.grid.block_count(),
        "grid": config.grid.to_string(),
        "beta": config.beta,
        "reduction": config.reduction.to_string(),
        "backbone": config.backbone.id(),
        "epsilon": config.epsilon,
        "resize": config.resize,
        "videos": records.len(),
        "channels": records.first().map(|r| r.values.len()),
        "split": args.split,
    });
    util::write_atomic(
        &args.out.join("run.json"),
        serde_json::to_string_pretty(&run)
            .expect("run config serializes")
            .as_bytes(),
    )?;
    println!(
        "{}",
        serde_json::json!({
            "features": args.out.join("features.jsonl"),
            "videos": records.len(),
            "config_fingerprint": config.fingerprint(),
        })
    );
    Ok(())
}

/// All records of a feature file must agree on one fingerprint.
fn common_fingerprint(records: &[FeatureRecord], path: &Path) -> Result<String> {
    let first = records[0].fingerprint.clone();
    if let Some(odd) = records.iter().find(|r| r.fingerprint != first) {
        return Err(Error::format(
            "feature file",
            format!(
                "{}: mixed fingerprints ({} vs {} on '{}')",
                path.display(),
                first,
                odd.fingerprint,
                odd.id
            ),
        ));
    }
    Ok(first)
}

pub fn train(args: TrainArgs) -> Result<()> {
    let records = feature_file::read_jsonl(&args.features)?;
    let train_fingerprint = common_fingerprint(&records, &args.features)?;
    let validation = match &args.val {
        Some(path) => {
            let val_records = feature_file::read_jsonl(path)?;
            let val_fingerprint = common_fingerprint(&val_records, path)?;
            if val_fingerprint != train_fingerprint && !args.force {
                return Err(Error::FingerprintMismatch {
                    left: train_fingerprint,
                    right: val_fingerprint,
                });
            }
            Some(val_records)
        }
        None => None,
    };
    let config = TrainConfig {
        beta1: args.beta1,
        beta2: args.beta2,
        lr: args.lr,
        epochs: args.epochs,
        batch_size: args.batch_size,
        seed: args.seed,
        ..TrainConfig::default()
    };
    let head = classifier::train(&records, validation.as_deref(), &config)?;
    head.save(&args.out)?;
    info!("trained head on {} records -> {}", records.len(), args.out.display());
    println!(
        "{}",
        serde_json::json!({
            "head": args.out,
            "records": records.len(),
            "config_fingerprint": head.fingerprint,
        })
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let records = feature_file::read_jsonl(&args.features)?;
    let fingerprint = common_fingerprint(&records, &args.features)?;
    let head = LinearHead::load(&args.head)?;
    if head.fingerprint != fingerprint && !args.force {
        return Err(Error::FingerprintMismatch {
            left: head.fingerprint.clone(),
            right: fingerprint,
        });
    }
    let scored = head.score_records(&records)?;
    let accuracy = metrics::accuracy(&scored, args.threshold)?;
    let auc = metrics::auc(&scored)?;
    let positives = scored.iter().filter(|(_, l)| l.is_fake()).count();
    let report = serde_json::json!({
        "accuracy": accuracy,
        "auc": auc,
        "n": scored.len(),
        "positives": positives,
        "negatives": scored.len() - positives,
        "threshold": args.threshold,
        "config_fingerprint": fingerprint,
    });
    let line = serde_json::to_string(&report).expect("report serializes");
    println!("{line}");
    if let Some(out) = &args.out {
        util::write_atomic(out, line.as_bytes())?;
    }
    Ok(())
}

pub fn inspect(args: InspectArgs) -> Result<()> {
    match args.what {
        InspectCommand::Bands { height, width, beta } => {
            let matrix = WeightMatrix::build(height, width, beta)?;
            print!("{}", matrix.band_grid());
            Ok(())
        }
        InspectCommand::Attention {
            manifest,
            id,
            out,
            pipeline,
        } => {
            let config = pipeline.to_config()?;
            let manifest = DatasetManifest::load(&manifest)?;
            let sample = manifest.get(&id).ok_or_else(|| {
                Error::format("manifest", format!("no video with id '{id}'"))
            })?;
            let attention = attention_of(sample, &config)?;
            match out {
                Some(path) => util::write_atomic(&path, attention.as_bytes())?,
                None => print!("{attention}"),
            }
            Ok(())
        }
        InspectCommand::BandEnergy {
            manifest,
            split,
            pipeline,
        } => {
            let config = pipeline.to_config()?;
            let mut manifest = DatasetManifest::load(&manifest)?;
            if let Some(split) = &split {
                manifest = manifest.filter_split(split)?;
            }
            let report = band_energy_report(&manifest, &config)?;
            println!("{report}");
            Ok(())
        }
    }
}

fn attention_of(
    sample: &freqclue_core::data::manifest::VideoSample,
    config: &PipelineConfig,
) -> Result<String> {
    use freqclue_core::backbone::Backbone;
    use freqclue_core::fta::attention;
    use freqclue_core::pipeline::ingest;
    use freqclue_core::weighting::apply_weights;

    let frames = ingest(sample, config)?;
    let maps = Backbone::new(config.backbone.clone())?.featurize(&frames, &sample.id)?;
    let spectrum = dct2_batch(&maps)?;
    let weights = WeightMatrix::build(spectrum.height(), spectrum.width(), config.beta)?;
    let weighted = apply_weights(&spectrum, &weights)?;
    Ok(attention(&weighted, config.grid, config.epsilon)?.to_csv())
}

fn band_energy_report(manifest: &DatasetManifest, config: &PipelineConfig) -> Result<String> {
    use freqclue_core::backbone::Backbone;
    use freqclue_core::data::manifest::Label;
    use freqclue_core::pipeline::ingest;

    let backbone = Backbone::new(config.backbone.clone())?;
    let mut sums: std::collections::BTreeMap<&str, ([f64; 3], usize)> = Default::default();
    for sample in manifest.samples() {
        let frames = ingest(sample, config)?;
        let maps = backbone.featurize(&frames, &sample.id)?;
        let spectrum = dct2_batch(&maps)?;
        let (n, ch, _, _) = spectrum.dims();
        let mut video_energy = [0.0f64; 3];
        for frame in 0..n {
            for channel in 0..ch {
                let bands = band_energies(spectrum.plane(frame, channel));
                for b in 0..3 {
                    video_energy[b] += bands[b];
                }
            }
        }
        for b in &mut video_energy {
            *b /= (n * ch) as f64;
        }
        let key = match sample.label {
            Label::Real => "real",
            Label::Fake => "fake",
        };
        let entry = sums.entry(key).or_insert(([0.0; 3], 0));
        for (total, band) in entry.0.iter_mut().zip(video_energy) {
            *total += band;
        }
        entry.1 += 1;
    }
    let mut report = serde_json::Map::new();
    for (label, (totals, count)) in sums {
        report.insert(
            label.to_string(),
            serde_json::json!({
                "videos": count,
                "low": totals[0] / count as f64,
                "mid": totals[1] / count as f64,
                "high": totals[2] / count as f64,
            }),
        );
    }
    Ok(serde_json::Value::Object(report).to_string())
}
