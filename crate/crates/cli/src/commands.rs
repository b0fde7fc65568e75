use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use egoprior::data::synth::{gen_synthetic_dataset, write_dataset};
use egoprior::data::{
    read_depth_png, read_gray_png, read_mask_png, read_rgb_png, write_depth_png, write_gray_png, write_mask_png,
    DatasetManifest, GroundTruth, RgbdFrame, SequenceEntry, DEFAULT_DEPTH_SCALE,
};
use egoprior::features::{estimate_homography, Correspondence, FeatureGroup, Homography, GAZE_HISTORY};
use egoprior::forest::Mode;
use egoprior::metrics::{average_precision, max_f_score, EvalReport, MethodRow, PrAccumulator};
use egoprior::pipeline::{
    aggregate_max, analyze_sequence, classify_interaction, extract_frame_features, train_task, FeatureConfig,
    FrameAnalysis, FrameRegions, Task, TaskModel,
};
use egoprior::proposals::{load_masks, propose_regions, propose_regions_with_contour, ContourMap};
use egoprior::raster::Grid;
use egoprior::stereo::{coarse_to_fine, disparity_to_depth};
use serde::Deserialize;

use crate::config::RunConfig;
use crate::{
    DatasetFrame, DepthArgs, EvalArgs, Failure, FeaturesArgs, FrameInput, ImportanceArgs, InteractArgs, PredictArgs,
    ProposeArgs, SynthArgs, TrainArgs,
};

type Res = Result<(), Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Domain(format!("{}: {}", path.display(), e))
}

fn required(flag: Option<&PathBuf>, fallback: Option<&PathBuf>, name: &str) -> Result<PathBuf, Failure> {
    flag.or(fallback)
        .cloned()
        .ok_or_else(|| Failure::Usage(format!("the following required argument was not provided: --{}", name)))
}

fn load_frame(input: &FrameInput) -> Result<RgbdFrame<f64>, Failure> {
    let rgb = read_rgb_png(&input.frame)?;
    let depth = match &input.depth {
        Some(p) => read_depth_png(p, DEFAULT_DEPTH_SCALE)?,
        None => Grid::filled(rgb.width(), rgb.height(), f64::NAN),
    };
    let id = input
        .frame
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(RgbdFrame::new(rgb, depth, id, 0, 0.0)?)
}

pub fn depth(a: &DepthArgs, cfg: &RunConfig) -> Res {
    let mut st = cfg.stereo.clone();
    st.d_max = a.dmax.unwrap_or(st.d_max);
    st.levels = a.levels.unwrap_or(st.levels);
    st.focal = a.focal.unwrap_or(st.focal);
    st.baseline_mm = a.baseline_mm.unwrap_or(st.baseline_mm);
    let gray = |p: &Path| -> Result<Grid<f64>, Failure> { Ok(read_gray_png(p)?.map(|&v| v as f64)) };
    let (left, right) = (gray(&a.left)?, gray(&a.right)?);
    let disp = coarse_to_fine(&left, &right, &st.params())?;
    let z = disparity_to_depth(&disp, st.focal, st.baseline_mm / 1000.0)?;
    write_depth_png(&a.out, &z, DEFAULT_DEPTH_SCALE)?;
    let valid = disp.disparity.data().iter().filter(|d| d.is_some()).count();
    println!("{} of {} pixels have depth", valid, disp.disparity.data().len());
    Ok(())
}

fn is_mask_file(p: &Path) -> bool {
    p.file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_prefix("mask_")?.strip_suffix(".png"))
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

pub fn propose(a: &ProposeArgs, cfg: &RunConfig) -> Res {
    let frame = load_frame(&a.input)?;
    let mut params = cfg.features.proposals;
    params.n_superpixels = a.n_superpixels.unwrap_or(params.n_superpixels);
    params.max_proposals = a.max_proposals.unwrap_or(params.max_proposals);
    let props = match &a.contour {
        Some(p) => propose_regions_with_contour(&frame, ContourMap::from_gray8(&read_gray_png(p)?), &params)?,
        None => propose_regions(&frame, &params)?,
    };
    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    // Masks left by an earlier run would be read back as proposals.
    for entry in fs::read_dir(&a.out).map_err(|e| io_err(&a.out, e))? {
        let p = entry.map_err(|e| io_err(&a.out, e))?.path();
        if is_mask_file(&p) {
            fs::remove_file(&p).map_err(|e| io_err(&p, e))?;
        }
    }
    for (i, m) in props.regions.iter().enumerate() {
        write_mask_png(&a.out.join(format!("mask_{:04}.png", i)), m)?;
    }
    println!("{} proposals written to {}", props.regions.len(), a.out.display());
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Matches {
    Previous(Vec<[f64; 4]>),
    PerFrame(Vec<Vec<[f64; 4]>>),
}

/// Homographies from frames `t-1 ..= t-5` into `t`; frames without matches
/// or with a failed fit map by identity.
fn read_history(path: &Path, fc: &FeatureConfig) -> Result<Vec<Homography>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let lists = match serde_json::from_str::<Matches>(&text) {
        Ok(Matches::Previous(one)) => vec![one],
        Ok(Matches::PerFrame(many)) => many,
        Err(_) => {
            return Err(Failure::Domain(format!(
                "{}: expected a list of [x1, y1, x2, y2] or a list of such lists",
                path.display()
            )))
        }
    };
    if lists.len() > GAZE_HISTORY {
        return Err(Failure::Domain(format!(
            "{}: {} match lists given, at most {} are used",
            path.display(),
            lists.len(),
            GAZE_HISTORY
        )));
    }
    Ok((0..GAZE_HISTORY)
        .map(|k| {
            let Some(list) = lists.get(k) else {
                return Homography::identity();
            };
            let pairs: Vec<Correspondence> = list
                .iter()
                .map(|&[x1, y1, x2, y2]| Correspondence { x1, y1, x2, y2 })
                .collect();
            estimate_homography(&pairs, &fc.ransac).unwrap_or_else(|e| {
                log::warn!("frame t-{}: {}; using identity", k + 1, e);
                Homography::identity()
            })
        })
        .collect())
}

pub fn features(a: &FeaturesArgs, cfg: &RunConfig) -> Res {
    let frame = load_frame(&a.input)?;
    let mut fc = cfg.features.clone();
    fc.context.n_neighbors = a.n_neighbors.unwrap_or(fc.context.n_neighbors);
    fc.context.knn = a.knn.unwrap_or(fc.context.knn);
    let regions = match &a.masks {
        Some(dir) => FrameRegions::from_masks(&frame, load_masks(dir, &frame)?, &fc.proposals)?,
        None => FrameRegions::propose(&frame, &fc.proposals)?,
    };
    let history = a.correspondences.as_deref().map(|p| read_history(p, &fc)).transpose()?;
    let layout = fc.layout(history.is_some());
    let rows = extract_frame_features(&frame, &regions, &layout, history.as_deref())?;

    let mut csv = String::from("region");
    for n in layout.names() {
        write!(csv, ",{}", n).unwrap();
    }
    csv.push('\n');
    for (i, row) in rows.iter().enumerate() {
        write!(csv, "{}", i).unwrap();
        for v in row {
            write!(csv, ",{}", v).unwrap();
        }
        csv.push('\n');
    }
    fs::write(&a.out, csv).map_err(|e| io_err(&a.out, e))?;
    println!(
        "{} regions x {} features written to {}",
        rows.len(),
        layout.dim(),
        a.out.display()
    );
    Ok(())
}

fn open_dataset(flag: Option<&PathBuf>, cfg: &RunConfig) -> Result<DatasetManifest, Failure> {
    let path = required(flag, cfg.paths.dataset.as_ref(), "dataset")?;
    Ok(DatasetManifest::load(&path)?)
}

pub fn train(a: &TrainArgs, cfg: &RunConfig) -> Res {
    let manifest = open_dataset(a.dataset.as_ref(), cfg)?;
    let out = required(a.model.as_ref(), cfg.paths.model.as_ref(), "model")?;
    let seed = cfg.resolve_seed(a.seed).map_err(Failure::Usage)?;
    let model = train_task::<f64, _>(&manifest, a.task, a.hold_out.as_deref(), &cfg.task_config(seed))?;
    model.save(&out)?;
    println!(
        "{} model with {} trees over {} features written to {}",
        a.task,
        model.forest.trees().len(),
        model.forest.feature_dim(),
        out.display()
    );
    Ok(())
}

fn locate<'m>(manifest: &'m DatasetManifest, at: &DatasetFrame) -> Result<(&'m SequenceEntry, usize), Failure> {
    let seq = match &at.sequence {
        Some(id) => manifest
            .sequence(id)
            .ok_or_else(|| Failure::Domain(format!("dataset has no sequence '{}'", id)))?,
        None if manifest.sequences.len() == 1 => &manifest.sequences[0],
        None => {
            return Err(Failure::Usage(format!(
                "--sequence is required; the dataset has {} sequences",
                manifest.sequences.len()
            )))
        }
    };
    let pos = seq
        .frames
        .iter()
        .position(|f| f.index == at.frame)
        .ok_or_else(|| Failure::Domain(format!("sequence '{}' has no frame {}", seq.id, at.frame)))?;
    Ok((seq, pos))
}

/// Analyzes one dataset frame, loading the preceding frames when gaze
/// history is needed.
fn analyze_at(
    manifest: &DatasetManifest,
    at: &DatasetFrame,
    fc: &FeatureConfig,
    gaze: bool,
) -> Result<FrameAnalysis<f64>, Failure> {
    let (seq, pos) = locate(manifest, at)?;
    let first = if gaze { pos.saturating_sub(GAZE_HISTORY) } else { pos };
    let records = seq.frames[first..=pos]
        .iter()
        .map(|f| manifest.load_frame(seq, f))
        .collect::<egoprior::Result<Vec<_>>>()?;
    let mut analysis = analyze_sequence(&seq.id, records, fc, gaze, |r| r.frame.frame_index == at.frame)?;
    analysis
        .frames
        .pop()
        .ok_or_else(|| Failure::Domain(format!("frame {} could not be analyzed", at.frame)))
}

fn load_model(path: &Path) -> Result<TaskModel<f64>, Failure> {
    Ok(TaskModel::load(path)?)
}

/// `horizon` is `Some` for the `future` subcommand, holding the requested
/// horizon if one was given.
pub fn predict(a: &PredictArgs, cfg: &RunConfig, horizon: Option<Option<u32>>) -> Res {
    let path = required(a.model.as_ref(), cfg.paths.model.as_ref(), "model")?;
    let model = load_model(&path)?;
    match (horizon, model.task) {
        (_, Task::Interaction) => {
            return Err(Failure::Usage("an interaction model does not produce heatmaps".into()));
        }
        (Some(Some(h)), Task::Future(m)) if h != m => {
            return Err(Failure::Usage(format!("model predicts {} s ahead, not {} s", m, h)));
        }
        (Some(_), Task::Saliency) => {
            return Err(Failure::Usage("future needs a future-saliency model".into()));
        }
        _ => {}
    }
    let manifest = open_dataset(a.at.dataset.as_ref(), cfg)?;
    let fa = analyze_at(&manifest, &a.at, &model.features, model.task.uses_gaze())?;
    let scores = model.predict_rows(&fa.all_rows(&model.layout())?)?;
    let map = aggregate_max(fa.record.frame.dims(), &fa.regions.regions, &scores)?;
    write_gray_png(&a.out, &map.map(|&v| (v * 255.0).round() as u8))?;
    println!(
        "{} regions scored; heatmap written to {}",
        scores.len(),
        a.out.display()
    );
    Ok(())
}

pub fn interact(a: &InteractArgs, cfg: &RunConfig) -> Res {
    let sal = load_model(&a.saliency_model)?;
    let int = load_model(&a.interaction_model)?;
    if sal.task.mode() != Mode::Regression {
        return Err(Failure::Usage("--saliency-model must be a saliency model".into()));
    }
    if int.task != Task::Interaction {
        return Err(Failure::Usage(
            "--interaction-model must be an interaction model".into(),
        ));
    }
    if sal.features.proposals != int.features.proposals {
        return Err(Failure::Domain(
            "the two models were trained with different proposal settings".into(),
        ));
    }
    let manifest = open_dataset(a.at.dataset.as_ref(), cfg)?;
    let fa = analyze_at(&manifest, &a.at, &sal.features, sal.task.uses_gaze())?;
    if fa.regions.is_empty() {
        return Err(Failure::Domain(format!("frame {} has no regions", a.at.frame)));
    }
    println!("{}", classify_interaction(&fa, &sal, &int)?.as_str());
    Ok(())
}

fn subdirs(dir: &Path) -> Result<Vec<(String, PathBuf)>, Failure> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let p = entry.map_err(|e| io_err(dir, e))?.path();
        if p.is_dir() {
            out.push((p.file_name().unwrap().to_string_lossy().into_owned(), p));
        }
    }
    out.sort();
    Ok(out)
}

fn png_names(dir: &Path) -> Result<Vec<String>, Failure> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let p = entry.map_err(|e| io_err(dir, e))?.path();
        if p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")) {
            out.push(p.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    out.sort();
    Ok(out)
}

fn dir_name(p: &Path) -> String {
    p.canonicalize()
        .ok()
        .and_then(|c| c.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "ours".into())
}

pub fn eval(a: &EvalArgs) -> Res {
    // (sequence name, path relative to a method root)
    let gt_seqs = subdirs(&a.gt)?;
    let nested = !gt_seqs.is_empty();
    let sequences: Vec<(String, PathBuf)> = if nested {
        gt_seqs.iter().map(|(n, _)| (n.clone(), PathBuf::from(n))).collect()
    } else {
        vec![(dir_name(&a.gt), PathBuf::new())]
    };
    let pred_dirs = subdirs(&a.pred)?;
    let single = if nested {
        !pred_dirs.is_empty() && pred_dirs.iter().all(|(n, _)| gt_seqs.iter().any(|(g, _)| g == n))
    } else {
        !png_names(&a.pred)?.is_empty()
    };
    let methods = if single {
        vec![(dir_name(&a.pred), a.pred.clone())]
    } else {
        pred_dirs
    };
    if methods.is_empty() {
        return Err(Failure::Domain(format!(
            "no predictions found under {}",
            a.pred.display()
        )));
    }

    let mut rows = Vec::new();
    for (method, root) in &methods {
        let mut scores = Vec::new();
        for (seq, rel) in &sequences {
            let gt_dir = a.gt.join(rel);
            let names = png_names(&gt_dir)?;
            if names.is_empty() {
                return Err(Failure::Domain(format!(
                    "no ground-truth masks in {}",
                    gt_dir.display()
                )));
            }
            let mut acc = PrAccumulator::default();
            for name in &names {
                let pred_path = root.join(rel).join(name);
                if !pred_path.is_file() {
                    return Err(Failure::Domain(format!(
                        "method '{}' has no prediction for {}/{}",
                        method, seq, name
                    )));
                }
                let heat = read_gray_png(&pred_path)?.map(|&v| v as f64 / 255.0);
                let gt = GroundTruth {
                    mask: read_mask_png(&gt_dir.join(name))?,
                };
                acc.add(&heat, &gt)?;
            }
            let curve = acc.curve()?;
            scores.push((max_f_score(&curve), average_precision(&curve)));
        }
        rows.push(MethodRow::from_fractions(method.clone(), &scores));
    }
    let report = EvalReport::new(&a.task, sequences.into_iter().map(|s| s.0).collect(), rows)?;
    let md_path = a.markdown.clone().unwrap_or_else(|| a.out.with_extension("md"));
    fs::write(&a.out, report.to_csv()).map_err(|e| io_err(&a.out, e))?;
    let md = report.to_markdown();
    fs::write(&md_path, &md).map_err(|e| io_err(&md_path, e))?;
    print!("{}", md);
    Ok(())
}

pub fn importance(a: &ImportanceArgs, cfg: &RunConfig) -> Res {
    let path = required(a.model.as_ref(), cfg.paths.model.as_ref(), "model")?;
    let model = load_model(&path)?;
    if model.forest.mode() != Mode::Regression {
        return Err(Failure::Usage(format!(
            "importance needs a regression model; {} is a {} classifier",
            path.display(),
            model.task
        )));
    }
    let means = model.forest.group_importance(&model.layout().groups())?;
    let mut table: Vec<(FeatureGroup, Option<f64>)> =
        FeatureGroup::ALL.iter().map(|g| (*g, means.get(g).copied())).collect();
    // Groups the model has no columns for go last.
    table.sort_by(|x, y| match (x.1, y.1) {
        (Some(p), Some(q)) => q.total_cmp(&p),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let mut csv = String::from("group,mean_importance\n");
    for (g, v) in &table {
        let cell = v.map_or_else(|| "-".to_string(), |v| format!("{:.6e}", v));
        println!("{:<14} {}", g.name(), cell);
        writeln!(csv, "{},{}", g.name(), cell).unwrap();
    }
    if let Some(out) = &a.out {
        fs::write(out, csv).map_err(|e| io_err(out, e))?;
    }
    Ok(())
}

pub fn synth(a: &SynthArgs, cfg: &RunConfig) -> Res {
    let seed = cfg.resolve_seed(a.seed).map_err(Failure::Usage)?;
    let mut sc = cfg.synth.clone();
    sc.sequences = a.sequences.unwrap_or(sc.sequences);
    sc.frames = a.frames.unwrap_or(sc.frames);
    sc.width = a.width.unwrap_or(sc.width);
    sc.height = a.height.unwrap_or(sc.height);
    sc.sight_fraction = a.sight_fraction.unwrap_or(sc.sight_fraction);
    let seqs = gen_synthetic_dataset::<f64>(&sc.dataset(), seed)?;
    write_dataset(&seqs, &a.out)?;
    println!(
        "{} sequences of {} frames written to {}",
        seqs.len(),
        sc.frames,
        a.out.join("dataset.json").display()
    );
    Ok(())
}
