use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use patrec::contour::{decision_contour, GridSpec};
use patrec::dataset::{format_real, gen_iris, load_csv, relabel_one_vs_rest};
use patrec::eval::{cross_validate, roc};
use patrec::{dsl, ActionSpec, DataSet, Error, Execution, TargetKind, TrainedAction};
use serde::{Deserialize, Serialize};

use crate::{Command, DataArgs, OutputArgs, PipelineArgs};

/// Process exit codes.
pub mod exit {
    pub const INGESTION: u8 = 2;
    pub const TRAINING: u8 = 3;
    pub const PIPELINE: u8 = 4;
    pub const CONTOUR_DIMENSION: u8 = 5;
    pub const MODEL_MISMATCH: u8 = 6;
}

pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn fail(code: u8, message: impl Display) -> Failure {
    Failure { code, message: message.to_string() }
}

/// Exit code for a library error raised while training or running.
fn classify(e: &Error) -> u8 {
    match e {
        Error::Fold { source, .. } => classify(source),
        Error::Spec(_) | Error::NoScoreColumn | Error::MultipleScoreColumns(_) => exit::PIPELINE,
        Error::ContourDimension(_) => exit::CONTOUR_DIMENSION,
        _ => exit::TRAINING,
    }
}

fn lib(e: Error) -> Failure {
    fail(classify(&e), e)
}

type Outcome<T = ()> = Result<T, Failure>;

pub fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Info(data) => info(&data),
        Command::Kfolds { data, pipeline, k, seed, output } => kfolds(&data, &pipeline, k as usize, seed, &output),
        Command::Contour { data, pipeline, grid_steps, grid_margin, output } => {
            contour(&data, &pipeline, GridSpec { steps: grid_steps, margin: grid_margin }, &output)
        }
        Command::Train { data, pipeline, output } => train(&data, &pipeline, &output),
        Command::Run { data, model, output } => run(&data, &model, &output),
    }
}

fn load(args: &DataArgs) -> Outcome<DataSet> {
    let ds = if args.dataset == "iris" {
        if args.target_column.as_deref().is_some_and(|c| c != "species") {
            return Err(fail(exit::INGESTION, "the bundled iris data has target column `species`"));
        }
        gen_iris()
    } else {
        load_csv(&args.dataset, args.target_column.as_deref(), TargetKind::ClassLabels)
            .map_err(|e| fail(exit::INGESTION, format!("{}: {e}", args.dataset)))?
    };
    let Some(query) = &args.positive_class else {
        return Ok(ds);
    };
    let labels = ds
        .class_labels()
        .ok_or_else(|| fail(exit::INGESTION, "--positive-class needs a labeled dataset (see --target-column)"))?;
    let positive = labels
        .resolve(query)
        .ok_or_else(|| fail(exit::INGESTION, format!("no class `{query}` in {}", args.dataset)))?;
    relabel_one_vs_rest(&ds, positive).map_err(|e| fail(exit::INGESTION, e))
}

fn pipeline(args: &PipelineArgs) -> Outcome<ActionSpec> {
    let syntax = |e: dsl::DslError| fail(exit::PIPELINE, format!("pipeline: {e}"));
    match (&args.pipeline, &args.pipeline_file) {
        (Some(text), _) => dsl::compile(text).map_err(syntax),
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).map_err(|e| fail(exit::INGESTION, format!("{}: {e}", path.display())))?;
            if text.trim_start().starts_with('{') {
                serde_json::from_str(&text).map_err(|e| fail(exit::PIPELINE, format!("{}: {e}", path.display())))
            } else {
                dsl::compile(text.trim()).map_err(syntax)
            }
        }
        (None, None) => unreachable!("clap requires one pipeline source"),
    }
}

fn exec(out: &OutputArgs) -> Execution {
    if out.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn create(out: &OutputArgs, name: &str) -> Outcome<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(&out.out).map_err(|e| fail(exit::INGESTION, format!("{}: {e}", out.out.display())))?;
    let path = out.out.join(name);
    let file = File::create(&path).map_err(|e| fail(exit::INGESTION, format!("{}: {e}", path.display())))?;
    Ok((path, BufWriter::new(file)))
}

fn write_file(out: &OutputArgs, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> patrec::Result<()>) -> Outcome {
    let (path, mut w) = create(out, name)?;
    body(&mut w)
        .and_then(|()| w.flush().map_err(|source| Error::Io { path: path.clone(), source }))
        .map_err(|e| fail(exit::INGESTION, format!("{}: {e}", path.display())))
}

fn json_file<T: Serialize>(out: &OutputArgs, name: &str, value: &T) -> Outcome {
    write_file(out, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io { path: name.into(), source: e.into() })?;
        writeln!(w).map_err(|source| Error::Io { path: name.into(), source })
    })
}

/// `id`, then `target` when present, then every output column.
fn write_scores(out: &OutputArgs, ds: &DataSet) -> Outcome {
    write_file(out, "scores.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_owned()];
        if ds.targets().is_some() {
            header.push("target".to_owned());
        }
        header.extend(ds.feature_names().iter().cloned());
        csv.write_record(&header)?;
        for i in 0..ds.n_observations() {
            let mut rec = vec![ds.observation_ids()[i].clone()];
            if let Some(t) = ds.targets() {
                rec.push(t.cell(i));
            }
            rec.extend(ds.row(i).into_iter().map(format_real));
            csv.write_record(&rec)?;
        }
        csv.flush().map_err(|e| Error::Csv(e.into()))
    })
}

fn info(args: &DataArgs) -> Outcome {
    let ds = load(args)?;
    let s = ds.summary();
    println!("observations: {}", s.n_observations);
    println!("features: {} ({})", s.n_features, ds.feature_names().join(", "));
    if let (Some(k), Some(labels)) = (s.n_classes, ds.class_labels()) {
        println!("classes: {k}");
        for (label, count) in &s.class_counts {
            println!("  {} ({label}): {count}", labels.name(*label));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct KfoldsSummary {
    auc: f64,
    k: usize,
    seed: u64,
    pipeline: String,
    n_observations: usize,
    n_positive: usize,
    n_negative: usize,
    positive_class: String,
}

fn kfolds(data: &DataArgs, pipe: &PipelineArgs, k: usize, seed: u64, out: &OutputArgs) -> Outcome {
    let ds = load(data)?;
    let spec = pipeline(pipe)?;
    if !spec.ends_in_classifier() {
        return Err(fail(exit::PIPELINE, Error::NoScoreColumn));
    }
    let labels =
        ds.class_labels().ok_or_else(|| fail(exit::INGESTION, "kfolds needs class labels (see --target-column)"))?;
    if labels.label_set().len() != 2 {
        return Err(fail(
            exit::INGESTION,
            format!("ROC needs two classes, found {}; pick one with --positive-class", labels.label_set().len()),
        ));
    }
    let positive_class = labels.name(labels.label_set()[1]);
    if k > ds.n_observations() {
        return Err(fail(exit::TRAINING, Error::BadK { k, n: ds.n_observations() }));
    }

    let cv = cross_validate(&spec, &ds, k, seed, exec(out)).map_err(lib)?;
    let curve = roc(&cv.output).map_err(lib)?;
    write_scores(out, &cv.output)?;
    write_file(out, "roc.csv", |w| curve.write_csv(w))?;
    json_file(
        out,
        "summary.json",
        &KfoldsSummary {
            auc: curve.auc,
            k,
            seed,
            pipeline: dsl::print_canonical(&spec),
            n_observations: ds.n_observations(),
            n_positive: curve.n_positive,
            n_negative: curve.n_negative,
            positive_class,
        },
    )?;
    println!("auc: {}", curve.auc);
    Ok(())
}

fn contour(data: &DataArgs, pipe: &PipelineArgs, grid: GridSpec, out: &OutputArgs) -> Outcome {
    let ds = load(data)?;
    let spec = pipeline(pipe)?;
    let exec = exec(out);
    let trained = spec.train_with(&ds, exec).map_err(lib)?;
    let result = decision_contour(&trained, &ds, grid, exec).map_err(|e| match e {
        Error::InvalidGrid(_) => fail(exit::INGESTION, e),
        e => lib(e),
    })?;
    write_file(out, "contour.csv", |w| result.write_csv(w))?;
    write_file(out, "points.csv", |w| result.write_points_csv(w))?;
    println!("grid: {} x {}", result.xs.len(), result.ys.len());
    Ok(())
}

/// Contents of `model.json`.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    pipeline: String,
    spec: ActionSpec,
    model: TrainedAction,
}

fn train(data: &DataArgs, pipe: &PipelineArgs, out: &OutputArgs) -> Outcome {
    let ds = load(data)?;
    let spec = pipeline(pipe)?;
    let model = spec.train_with(&ds, exec(out)).map_err(lib)?;
    json_file(out, "model.json", &ModelFile { pipeline: dsl::print_canonical(&spec), spec, model })
}

fn read_model(path: &Path) -> Outcome<TrainedAction> {
    let text = fs::read_to_string(path).map_err(|e| fail(exit::INGESTION, format!("{}: {e}", path.display())))?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| fail(exit::INGESTION, format!("{}: {e}", path.display())))?;
    Ok(file.model)
}

fn run(data: &DataArgs, model: &Path, out: &OutputArgs) -> Outcome {
    let model = read_model(model)?;
    let ds = load(data)?;
    if ds.n_features() != model.input_dim() {
        return Err(fail(
            exit::MODEL_MISMATCH,
            format!("model expects {} features, dataset has {}", model.input_dim(), ds.n_features()),
        ));
    }
    let result = model.run_with(&ds, exec(out)).map_err(|e| match e {
        Error::DimensionMismatch { .. } => fail(exit::MODEL_MISMATCH, e),
        e => lib(e),
    })?;
    write_scores(out, &result)
}
