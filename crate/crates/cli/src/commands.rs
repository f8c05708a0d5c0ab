use std::path::Path;

use ascal::data::{self, FoldSplit, SyntheticSpec};
use ascal::metrics::{self, BinScheme};
use ascal::{fit_calibrator, Calibrator, CalibratorModel, Dataset, Threshold};
use log::{info, warn};

use crate::args::{
    CalibrateArgs, EvaluateArgs, InputArgs, KfoldArgs, SimulateArgs, TauArgs, TauMode,
};
use crate::diagram::reliability_svg;
use crate::error::{CliError, CliResult};
use crate::report::{
    CalibrationReport, EvaluationReport, FitSummary, FoldMetrics, FoldRow, KfoldReport, Summary,
};

pub fn load_input(input: &InputArgs) -> CliResult<Dataset> {
    let format = input.format();
    if !input.input.exists() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{}: no such file", input.input.display()),
        )
        .into());
    }
    let ds = if input.embeddings {
        data::load_embeddings(&input.input, format)?
    } else {
        data::load_dataset(&input.input, format)?
    };
    info!("loaded {} pairs from {}", ds.len(), input.input.display());
    Ok(ds)
}

/// Resolves the threshold on `dataset`. Returns it with a short description
/// of where it came from.
pub fn resolve_tau(args: &TauArgs, dataset: &Dataset) -> CliResult<(Threshold, String)> {
    let mode = args.tau_mode.unwrap_or(if args.tau.is_some() {
        TauMode::Fixed
    } else if args.far_target.is_some() {
        TauMode::FarTarget
    } else {
        TauMode::BestAccuracy
    });
    match mode {
        TauMode::Fixed => {
            let v = args
                .tau
                .ok_or_else(|| CliError::Usage("--tau-mode fixed requires --tau".into()))?;
            Ok((Threshold::new(v)?, "fixed".into()))
        }
        TauMode::FarTarget => {
            let target = args.far_target.ok_or_else(|| {
                CliError::Usage("--tau-mode far-target requires --far-target".into())
            })?;
            let op = metrics::threshold_at_far(dataset, target)?;
            Ok((op.threshold, format!("far-target {target} (tar {}, far {})", op.tar, op.far)))
        }
        TauMode::BestAccuracy => {
            if args.tau.is_some() || args.far_target.is_some() {
                return Err(CliError::Usage(
                    "--tau-mode best-accuracy conflicts with --tau/--far-target".into(),
                ));
            }
            Ok((metrics::best_accuracy_threshold(dataset)?, "best-accuracy".into()))
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => data::write_atomically(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn calibrate(args: &CalibrateArgs) -> CliResult<CalibrationReport> {
    let ds = load_input(&args.input)?;
    let (tau, source) = resolve_tau(&args.tau, &ds)?;
    let config = args.calibrator.config();
    let (model, fit) = fit_calibrator(&ds, tau, &config)?;
    let (bins, scheme) = (args.ece.bins, BinScheme::from(args.ece.scheme));

    let before = Summary::compute(&ds, tau, bins, scheme)?;
    let after = Summary::compute(&model.calibrate_dataset(&ds), model.tau_calibrated(), bins, scheme)?;
    let report = CalibrationReport {
        calibrator: model.kind().to_string(),
        n: ds.len(),
        tau_source: source,
        before,
        after,
        fit: fit.map(|f| FitSummary {
            initial_loss: f.initial_loss,
            final_loss: f.final_loss,
            iterations: f.iterations,
            converged: f.converged,
        }),
    };
    data::save_model(&model, &args.model_out)?;
    if let Some(path) = &args.report_out {
        data::write_atomically(path, to_json(&report)?.as_bytes())?;
    }

    println!("calibrator: {}", report.calibrator);
    println!("tau ({}): {} -> {}", report.tau_source, report.before.tau, report.after.tau);
    println!(
        "ece ({}, M={}): {} -> {}",
        scheme, bins, report.before.ece.ece, report.after.ece.ece
    );
    println!(
        "accuracy: {} -> {}",
        report.before.accuracy, report.after.accuracy
    );
    println!(
        "mean confidence: {} -> {}",
        report.before.mean_confidence, report.after.mean_confidence
    );
    if let CalibratorModel::Asc(p) = &model {
        println!("w: {}  b: {}", p.w(), p.b());
    }
    if let Some(f) = &report.fit {
        println!(
            "fit: loss {} -> {} in {} iterations{}",
            f.initial_loss,
            f.final_loss,
            f.iterations,
            if f.converged { "" } else { " (not converged)" }
        );
    }
    Ok(report)
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<EvaluationReport> {
    let ds = load_input(&args.input)?;
    let (bins, scheme) = (args.ece.bins, BinScheme::from(args.ece.scheme));
    let model: Option<CalibratorModel> = args.model_in.as_deref().map(data::load_model).transpose()?;
    let tau = match &model {
        Some(m) => {
            if args.tau.tau.is_some() || args.tau.far_target.is_some() || args.tau.tau_mode.is_some() {
                warn!("threshold flags ignored: the model carries its own threshold");
            }
            m.tau_raw()
        }
        None => resolve_tau(&args.tau, &ds)?.0,
    };
    let uncalibrated = Summary::compute(&ds, tau, bins, scheme)?;
    let calibrated = model
        .as_ref()
        .map(|m| Summary::compute(&m.calibrate_dataset(&ds), m.tau_calibrated(), bins, scheme))
        .transpose()?;
    let (positives, negatives) = ds.class_counts();
    let report = EvaluationReport {
        n: ds.len(),
        positives,
        negatives,
        calibrator: model.as_ref().map_or("none".into(), |m| m.kind().to_string()),
        uncalibrated,
        calibrated,
    };
    if let Some(path) = &args.diagram_out {
        let mut series = vec![("uncalibrated", &report.uncalibrated.ece)];
        if let Some(c) = &report.calibrated {
            series.push(("calibrated", &c.ece));
        }
        data::write_atomically(path, reliability_svg(&series).as_bytes())?;
    }
    emit(&to_json(&report)?, args.report_out.as_deref())?;
    Ok(report)
}

pub fn kfold(args: &KfoldArgs) -> CliResult<KfoldReport> {
    let ds = load_input(&args.input)?;
    let (split, source) = match FoldSplit::from_dataset(&ds) {
        Some(split) => {
            if split.k != args.folds {
                info!("using the {} folds given in the input", split.k);
            }
            (split, "input")
        }
        None => (data::stratified_folds(&ds, args.folds, args.seed)?, "stratified"),
    };
    if split.k < 2 {
        return Err(CliError::Usage("k-fold needs at least 2 folds".into()));
    }
    let config = args.calibrator.config();
    let (bins, scheme) = (args.ece.bins, BinScheme::from(args.ece.scheme));

    let mut rows = Vec::with_capacity(split.k);
    for fold in 0..split.k {
        let train = ds.subset(&split.train_indices(fold));
        let test = ds.subset(&split.test_indices(fold));
        let (tau, _) = resolve_tau(&args.tau, &train)?;
        let (model, _) = fit_calibrator(&train, tau, &config)?;
        let calibrated = model.calibrate_dataset(&test);
        let tau_c = model.tau_calibrated();
        rows.push(FoldRow {
            fold,
            n_train: train.len(),
            n_test: test.len(),
            tau: tau.value(),
            tau_calibrated: tau_c.value(),
            metrics: FoldMetrics {
                accuracy_before: metrics::accuracy(&test, tau)?,
                accuracy_after: metrics::accuracy(&calibrated, tau_c)?,
                mean_confidence_before: metrics::mean_confidence(&test, tau)?,
                mean_confidence_after: metrics::mean_confidence(&calibrated, tau_c)?,
                ece_before: metrics::ece(&test, tau, bins, scheme)?.ece,
                ece_after: metrics::ece(&calibrated, tau_c, bins, scheme)?.ece,
            },
        });
    }
    let fold_metrics: Vec<FoldMetrics> = rows.iter().map(|r| r.metrics).collect();
    let report = KfoldReport {
        calibrator: config.kind.to_string(),
        k: split.k,
        folds_source: source.into(),
        seed: split.seed,
        scheme,
        m_bins: bins,
        mean: FoldMetrics::mean(&fold_metrics),
        folds: rows,
    };
    emit(&to_json(&report)?, args.report_out.as_deref())?;
    Ok(report)
}

pub fn simulate(args: &SimulateArgs) -> CliResult<Dataset> {
    let spec = SyntheticSpec::new(
        args.n_pos,
        args.n_neg,
        (args.pos_mean, args.pos_sd),
        (args.neg_mean, args.neg_sd),
        args.seed,
    )?;
    let ds = data::generate(&spec)?;
    let format = args
        .format
        .map(Into::into)
        .unwrap_or_else(|| data::InputFormat::from_path(&args.output));
    let mut buf = Vec::new();
    data::write_pairs(&ds, &mut buf, format)?;
    data::write_atomically(&args.output, &buf)?;
    Ok(ds)
}
