//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.
//!
//! `NEUROGNN_ACCEPT=1,4,9` restricts the run to the listed criteria.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use ndarray::{Array2, Array3};
use neurognn::eval::{auroc, clustering_purity, headline_metric, weighted_f1};
use neurognn::graph::{build_neurograph, gaussian_kernel, spatial_similarity, GateMode};
use neurognn::model::{read_checkpoint_parts, Ablation, ModelConfig, ModelState, Task};
use neurognn::semantics::{toy_taxonomy, BrainTaxonomy, FallbackEncoder};
use neurognn::signal::{
    clip_to_features, fft_log_amplitude, synthesize_features, DatasetManifest, FeatureClip, Label, SynthConfig,
    SyntheticData, SyntheticGenerator,
};
use neurognn::train::{
    evaluate_clips, pretrain_loss, pretraining_examples, run_batch, train, Adam, Example, LossWeights, Normalizer,
    TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s as f64, || {
        format!("took {elapsed:.1?}, limit {limit_s} s")
    })
}

fn ok<T>(r: neurognn::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- 1

fn naive_dft_log_amplitude(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64;
                re += v * phase.cos();
                im += v * phase.sin();
            }
            ((re * re + im * im).sqrt() + 1e-8).ln()
        })
        .collect()
}

fn fft_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let scale = 10f64.powf(rng.random_range(-1.0..2.0));
        let seg: Vec<f64> = (0..200)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            })
            .collect();
        let fast = ok(fft_log_amplitude(&seg))?;
        let slow = naive_dft_log_amplitude(&seg);
        ensure(fast.len() == 101, || format!("{} bins", fast.len()))?;
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("max deviation {worst:e}"))?;
    within(start.elapsed(), 10)?;
    Ok(format!("100 segments, max |diff| {worst:.2e}, {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------- 2

fn brute_auroc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

fn hand_weighted_f1(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..k {
        let tp = pred.iter().zip(truth).filter(|(&p, &t)| p == c && t == c).count() as f64;
        let fp = pred.iter().zip(truth).filter(|(&p, &t)| p == c && t != c).count() as f64;
        let fn_ = pred.iter().zip(truth).filter(|(&p, &t)| p != c && t == c).count() as f64;
        let f1 = if tp == 0.0 {
            0.0
        } else {
            2.0 * tp / (2.0 * tp + fp + fn_)
        };
        total += f1 * (tp + fn_);
    }
    total / truth.len() as f64
}

fn sse(points: &Array2<f64>, assign: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<usize> = (0..assign.len()).filter(|&i| assign[i] == c).collect();
        if members.is_empty() {
            return f64::INFINITY;
        }
        let mut mean = ndarray::Array1::<f64>::zeros(points.ncols());
        for &i in &members {
            mean += &points.row(i);
        }
        mean /= members.len() as f64;
        for &i in &members {
            let d = &points.row(i) - &mean;
            total += d.dot(&d);
        }
    }
    total
}

fn exhaustive_kmeans(points: &Array2<f64>, k: usize) -> Vec<usize> {
    let m = points.nrows();
    let mut assign = vec![0usize; m];
    let mut best = (f64::INFINITY, assign.clone());
    loop {
        let cost = sse(points, &assign, k);
        if cost < best.0 {
            best = (cost, assign.clone());
        }
        let mut i = 0;
        loop {
            if i == m {
                return best.1;
            }
            assign[i] += 1;
            if assign[i] < k {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

fn hand_purity(assign: &[usize], labels: &[usize], weighted: bool) -> f64 {
    let mut clusters: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&a, &l) in assign.iter().zip(labels) {
        *clusters.entry(a).or_default().entry(l).or_default() += 1;
    }
    let majority = |c: &BTreeMap<usize, usize>| *c.values().max().unwrap() as f64;
    if weighted {
        clusters.values().map(majority).sum::<f64>() / labels.len() as f64
    } else {
        clusters
            .values()
            .map(|c| majority(c) / c.values().sum::<usize>() as f64)
            .sum::<f64>()
            / clusters.len() as f64
    }
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for inst in 0..200 {
        let n = rng.random_range(2..60);
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        // coarse scores in half the instances to exercise ties
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                if inst % 2 == 0 {
                    rng.random::<f64>()
                } else {
                    rng.random_range(0..5) as f64 / 4.0
                }
            })
            .collect();
        let a = ok(auroc(&scores, &labels))?;
        worst = worst.max((a - brute_auroc(&scores, &labels)).abs());
    }
    ensure(worst <= 1e-12, || format!("auroc deviation {worst:e}"))?;

    let mut f1_worst = 0.0f64;
    for _ in 0..20 {
        let k = rng.random_range(2..6);
        let n = rng.random_range(5..80);
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let pred: Vec<usize> = (0..n)
            .map(|i| {
                if rng.random_bool(0.6) {
                    truth[i]
                } else {
                    rng.random_range(0..k)
                }
            })
            .collect();
        f1_worst = f1_worst.max((weighted_f1(&pred, &truth, k) - hand_weighted_f1(&pred, &truth, k)).abs());
    }
    ensure(f1_worst <= 1e-12, || format!("weighted F1 deviation {f1_worst:e}"))?;

    let mut purity_cases = 0;
    for case in 0..30u64 {
        let m = rng.random_range(4..=8);
        let k = rng.random_range(2..=3.min(m - 1));
        let centers: Vec<(f64, f64)> = (0..k)
            .map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
            .collect();
        let points = Array2::from_shape_fn((m, 2), |(i, d)| {
            let c = centers[i % k];
            let jitter: f64 = StandardNormal.sample(&mut rng);
            (if d == 0 { c.0 } else { c.1 }) + 0.8 * jitter
        });
        let labels: Vec<usize> = (0..m).map(|_| rng.random_range(0..3)).collect();
        let exact = exhaustive_kmeans(&points, k);
        for weighted in [false, true] {
            let got = ok(clustering_purity(&points, &labels, k, case, weighted))?;
            let want = hand_purity(&exact, &labels, weighted);
            ensure((got - want).abs() <= 1e-12, || {
                format!("purity {got} vs exhaustive {want} (case {case})")
            })?;
        }
        purity_cases += 1;
    }
    Ok(format!(
        "auroc 200 instances max |diff| {worst:.1e}; weighted F1 20 instances; purity {purity_cases} exhaustive instances"
    ))
}

// ---------------------------------------------------------------- 3

fn shape_suite() -> Outcome {
    let start = Instant::now();
    let mut synth = SynthConfig::new([(Label::GN, 1)], 3);
    synth.test_fraction = 0.0;
    synth.windows_per_recording = 1;
    let generator = ok(SyntheticGenerator::new(synth))?;
    let raw = generator.generate(&generator.plans()[0]).remove(0);
    ensure(raw.channels.dim() == (19, 12000), || {
        format!("raw {:?}", raw.channels.dim())
    })?;
    let clip = ok(clip_to_features(&raw))?;
    let taxonomy = BrainTaxonomy::default_10_20();
    let mut report = Vec::new();
    for (ablation, n) in [(Ablation::None, 25usize), (Ablation::NoMeta, 19)] {
        let config = ModelConfig {
            task: Task::Pretraining,
            ablation,
            ..ModelConfig::default()
        };
        let (m, k, z) = (config.hidden_dim, config.semantic_dim, config.gcn_dim);
        ensure((m, k, z) == (512, 512, 256), || format!("defaults {:?}", (m, k, z)))?;
        let state = ok(ModelState::new(config, taxonomy.clone(), &FallbackEncoder, 0))?;
        let x = ok(state.prepare_input(clip.features.view()))?;
        let fwd = ok(state.forward(std::slice::from_ref(&x)))?;
        let c = &fwd.clips[0];
        let u = fwd.shared.u.as_ref().ok_or("no U")?;
        let forecast = state.forecast(&c.v_out);
        let forecast = forecast
            .into_shape_with_order((n, 12, 101))
            .map_err(|e| format!("forecast reshape: {e}"))?;
        let got = [
            ("X'", x.shape().to_vec(), vec![n, 60, 101]),
            ("C", c.c.shape().to_vec(), vec![n, 2 * m]),
            ("U", u.shape().to_vec(), vec![n, k]),
            ("V", c.v.shape().to_vec(), vec![n, 2 * m + k]),
            ("S", c.s.shape().to_vec(), vec![n, n]),
            ("V'", c.v_out.shape().to_vec(), vec![n, z]),
            ("g", c.g.shape().to_vec(), vec![z]),
            ("forecasts", forecast.shape().to_vec(), vec![n, 12, 101]),
        ];
        for (name, shape, want) in &got {
            ensure(shape == want, || {
                format!("{} {name}: {shape:?}, expected {want:?}", ablation.name())
            })?;
        }
        report.push(format!("{} N'={n}", ablation.name()));
    }
    within(start.elapsed(), 30)?;
    Ok(format!("{} ok, {:.2?}", report.join(", "), start.elapsed()))
}

// ---------------------------------------------------------------- 4

fn random_clip(rng: &mut ChaCha8Rng, id: usize, frames: usize) -> FeatureClip {
    FeatureClip {
        clip_id: format!("rand{id}-w0000"),
        features: Array3::from_shape_fn((19, frames, 101), |_| {
            let v: f64 = StandardNormal.sample(rng);
            v as f32
        }),
        label: Label::NonSeizure,
    }
}

fn small_model(ablation: Ablation, seed: u64) -> neurognn::Result<ModelState> {
    let config = ModelConfig {
        hidden_dim: 16,
        semantic_dim: 16,
        gcn_dim: 8,
        heads: 4,
        ablation,
        ..ModelConfig::default()
    };
    ModelState::new(config, BrainTaxonomy::default_10_20(), &FallbackEncoder, seed)
}

/// Copies every tensor the two models share by name.
fn align_params(target: &mut ModelState, source: &ModelState) {
    let names: Vec<String> = target.params.tensors().iter().map(|t| t.name.clone()).collect();
    for name in names {
        if let Some(src) = source.params.by_name(&name) {
            let id = target.params.id(&name).unwrap();
            if target.params.get(id).dim() == src.value.dim() {
                target.params.get_mut(id).assign(&src.value);
            }
        }
    }
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    if a.dim() != b.dim() {
        return f64::INFINITY;
    }
    (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn same(a: &Array2<f64>, b: &Array2<f64>) -> bool {
    max_abs_diff(a, b) <= 1e-12
}

fn adjacency_invariants() -> Outcome {
    let taxonomy = BrainTaxonomy::default_10_20();
    let kernel = spatial_similarity(&taxonomy, true);
    let mut prev = 1.0;
    for i in 0..=400 {
        let d = kernel.tau * 1.5 * i as f64 / 400.0;
        let v = gaussian_kernel(d, kernel.sigma, kernel.tau);
        ensure(v <= prev, || format!("kernel rises at d = {d}"))?;
        prev = v;
    }
    let n = kernel.distances.nrows();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((kernel.distances[[i, j]], kernel.similarity[[i, j]]));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    ensure(pairs.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15), || {
        "S_D not monotone in distance".into()
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let full = ok(small_model(Ablation::None, 4))?;
    let mut variants = Vec::new();
    for ablation in [
        Ablation::NoTemporal,
        Ablation::NoSemantics,
        Ablation::NoSpace,
        Ablation::NoMeta,
    ] {
        let mut v = ok(small_model(ablation, 4))?;
        align_params(&mut v, &full);
        variants.push(v);
    }
    for c in 0..50 {
        let clip = random_clip(&mut rng, c, 60);
        let g = ok(build_neurograph(&clip, &full))?;
        let b = &g.bundle;
        ensure(g.s.iter().all(|&v| (0.0..=1.0).contains(&v)), || {
            format!("clip {c}: S outside [0,1]")
        })?;
        let s_t = b.s_t.as_ref().ok_or("missing S_T")?;
        for row in s_t.rows() {
            ensure((row.sum() - 1.0).abs() <= 1e-5, || {
                format!("clip {c}: S_T row sum {}", row.sum())
            })?;
        }
        let s_d = b.s_d.as_ref().ok_or("missing S_D")?;
        let s_e = b.s_e.as_ref().ok_or("missing S_E")?;
        ensure(same(s_d, &s_d.t().to_owned()), || "S_D not symmetric".into())?;
        ensure(s_d.diag().iter().all(|&v| v == 1.0), || "S_D diagonal".into())?;
        ensure(b.mode == GateMode::Mixed, || "full model gate".into())?;

        for v in &variants {
            let gv = ok(build_neurograph(&clip, v))?;
            let bv = &gv.bundle;
            let name = v.config.ablation.name();
            let fail = |what: &str| format!("clip {c} {name}: {what}");
            match v.config.ablation {
                Ablation::NoTemporal => {
                    ensure(bv.s_t.is_none(), || fail("S_T present"))?;
                    ensure(same(bv.s_e.as_ref().unwrap(), s_e), || fail("S_E changed"))?;
                    ensure(same(bv.s_d.as_ref().unwrap(), s_d), || fail("S_D changed"))?;
                    ensure(same(&bv.gate, &b.gate), || fail("gate changed"))?;
                    ensure(same(&bv.s_prime, &b.gate), || fail("S' is not the gate"))?;
                }
                Ablation::NoSemantics => {
                    ensure(bv.s_e.is_none(), || fail("S_E present"))?;
                    ensure(same(bv.s_d.as_ref().unwrap(), s_d), || fail("S_D changed"))?;
                    ensure(same(bv.s_t.as_ref().unwrap(), s_t), || fail("S_T changed"))?;
                    ensure(same(&bv.gate, s_d), || fail("gate is not S_D"))?;
                }
                Ablation::NoSpace => {
                    ensure(bv.s_d.is_none(), || fail("S_D present"))?;
                    ensure(same(bv.s_e.as_ref().unwrap(), s_e), || fail("S_E changed"))?;
                    ensure(same(bv.s_t.as_ref().unwrap(), s_t), || fail("S_T changed"))?;
                    ensure(same(&bv.gate, s_e), || fail("gate is not S_E"))?;
                }
                Ablation::NoMeta => {
                    let e = ndarray::s![..19, ..19];
                    ensure(gv.s.dim() == (19, 19), || fail("S not 19x19"))?;
                    ensure(same(bv.s_d.as_ref().unwrap(), &s_d.slice(e).to_owned()), || {
                        fail("S_D electrode block changed")
                    })?;
                    ensure(same(bv.s_e.as_ref().unwrap(), &s_e.slice(e).to_owned()), || {
                        fail("S_E electrode block changed")
                    })?;
                    ensure(bv.alpha == b.alpha, || fail("alpha changed"))?;
                }
                Ablation::None => unreachable!(),
            }
        }
    }
    Ok("50 clips: ranges, row sums, symmetry, monotone kernel; 4 ablations alter only their named matrices".into())
}

// ---------------------------------------------------------------- 5

fn toy_clips() -> Vec<FeatureClip> {
    (0..2)
        .map(|c| FeatureClip {
            clip_id: format!("toy-w{c:04}"),
            features: Array3::from_shape_fn((3, 14, 5), |(i, t, f)| {
                (((i * 31 + t * 7 + f * 3 + c * 11) as f64) * 0.731).sin() as f32 * 1.5
            }),
            label: [Label::CF, Label::NonSeizure][c],
        })
        .collect()
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let clips = toy_clips();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut checked = 0;
    let mut worst = (0.0f64, String::new());
    for task in [Task::Detection, Task::Pretraining] {
        let config = ModelConfig {
            hidden_dim: 3,
            semantic_dim: 4,
            gcn_dim: 4,
            heads: 2,
            freq_bins: 5,
            frames: 14,
            horizon: 3,
            task,
            ..ModelConfig::default()
        };
        let mut state = ok(ModelState::new(config, toy_taxonomy(), &FallbackEncoder, 5))?;
        ensure(state.layout().num_nodes() == 5, || {
            "toy model is not 3 electrodes + 2 regions".into()
        })?;
        let examples = [
            Example {
                clip: &clips[0],
                next: Some(&clips[1]),
            },
            Example {
                clip: &clips[1],
                next: Some(&clips[0]),
            },
        ];
        let batch_loss = |s: &ModelState| -> neurognn::Result<f64> {
            let out = run_batch(s, &examples, LossWeights::default(), None)?;
            Ok(out.losses.iter().sum::<f64>() / out.losses.len() as f64)
        };
        let mut grads = state.params.zero_grads();
        ok(run_batch(&state, &examples, LossWeights::default(), Some(&mut grads)))?;

        let mut positions: Vec<(usize, usize, usize)> = Vec::new();
        for (ti, t) in state.params.tensors().iter().enumerate() {
            for r in 0..t.value.nrows() {
                for c in 0..t.value.ncols() {
                    positions.push((ti, r, c));
                }
            }
        }
        let sample = positions.len().div_ceil(100);
        let mut chosen: Vec<(usize, usize, usize)> = (0..sample)
            .map(|_| positions[rng.random_range(0..positions.len())])
            .collect();
        for name in ["gate.alpha_raw", "semantic.w"] {
            let ti = state
                .params
                .tensors()
                .iter()
                .position(|t| t.name == name)
                .ok_or(format!("no {name}"))?;
            let dim = state.params.tensors()[ti].value.dim();
            chosen.push((ti, rng.random_range(0..dim.0), rng.random_range(0..dim.1)));
        }
        for (ti, r, c) in chosen {
            let name = state.params.tensors()[ti].name.clone();
            let id = state.params.id(&name).unwrap();
            let orig = state.params.get(id)[[r, c]];
            let h = 1e-5;
            state.params.get_mut(id)[[r, c]] = orig + h;
            let up = ok(batch_loss(&state))?;
            state.params.get_mut(id)[[r, c]] = orig - h;
            let down = ok(batch_loss(&state))?;
            state.params.get_mut(id)[[r, c]] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.0[ti][[r, c]];
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
            if rel > worst.0 {
                worst = (rel, format!("{} {name}[{r},{c}]", task.name()));
            }
            checked += 1;
        }
    }
    ensure(worst.0 <= 1e-3, || {
        format!("relative error {:.2e} at {}", worst.0, worst.1)
    })?;
    within(start.elapsed(), 120)?;
    Ok(format!(
        "{checked} sampled entries incl. alpha and W_sem, worst relative error {:.1e}",
        worst.0
    ))
}

// ---------------------------------------------------------------- 6, 7, 8

fn learning_data(task: Task) -> neurognn::Result<SyntheticData> {
    let counts = match task {
        Task::Detection => vec![
            (Label::NonSeizure, 300),
            (Label::CF, 75),
            (Label::GN, 75),
            (Label::AB, 75),
            (Label::CT, 75),
        ],
        _ => vec![(Label::CF, 150), (Label::GN, 150), (Label::AB, 150), (Label::CT, 150)],
    };
    let mut config = SynthConfig::new(counts, 7);
    config.test_fraction = 1.0 / 6.0;
    config.val_fraction = 0.2;
    synthesize_features(&config)
}

fn reduced(task: Task, max_epochs: usize) -> TrainConfig {
    TrainConfig {
        task,
        hidden_dim: 64,
        semantic_dim: 64,
        gcn_dim: 32,
        lr: 1e-3,
        max_epochs: Some(max_epochs),
        seed: 1,
        ..TrainConfig::default()
    }
}

fn learn_detection() -> Outcome {
    let start = Instant::now();
    let data = ok(learning_data(Task::Detection))?;
    let sizes = (data.train.len(), data.val.len(), data.test.len());
    ensure(sizes == (400, 100, 100), || format!("split sizes {sizes:?}"))?;
    let config = reduced(Task::Detection, 30);
    let out = ok(train(
        &data.train,
        &data.val,
        &config,
        &BrainTaxonomy::default_10_20(),
        &FallbackEncoder,
        None,
    ))?;
    let preds = ok(evaluate_clips(&out.best, &data.test, &config))?;
    let auc = headline_metric(Task::Detection, &preds).ok_or("test AUROC undefined")?;
    ensure(auc >= 0.90, || format!("test AUROC {auc:.4}"))?;
    within(start.elapsed(), 20 * 60)?;
    Ok(format!(
        "test AUROC {auc:.4} after {} epochs (best {}), {:.0?}",
        out.log.len(),
        out.best_epoch,
        start.elapsed()
    ))
}

const CLASSIFICATION_EPOCHS: usize = 20;

fn learn_classification() -> Outcome {
    let start = Instant::now();
    let data = ok(learning_data(Task::Classification))?;
    let sizes = (data.train.len(), data.val.len(), data.test.len());
    ensure(sizes == (400, 100, 100), || format!("split sizes {sizes:?}"))?;
    let taxonomy = BrainTaxonomy::default_10_20();
    let mut scores = BTreeMap::new();
    for ablation in [Ablation::None, Ablation::NoTemporal] {
        let config = TrainConfig {
            ablation,
            ..reduced(Task::Classification, CLASSIFICATION_EPOCHS)
        };
        let out = ok(train(
            &data.train,
            &data.val,
            &config,
            &taxonomy,
            &FallbackEncoder,
            None,
        ))?;
        let preds = ok(evaluate_clips(&out.best, &data.test, &config))?;
        scores.insert(
            ablation.name(),
            headline_metric(Task::Classification, &preds).ok_or("F1 undefined")?,
        );
    }
    let (full, no_t) = (scores["none"], scores["no_temporal"]);
    ensure(full >= 0.75, || format!("full model weighted F1 {full:.4}"))?;
    ensure(full > no_t, || {
        format!("full {full:.4} does not exceed no_temporal {no_t:.4}")
    })?;
    Ok(format!(
        "weighted F1 full {full:.4} > no_temporal {no_t:.4} ({CLASSIFICATION_EPOCHS} epochs, {:.0?})",
        start.elapsed()
    ))
}

const PRETRAIN_EPOCHS: usize = 5;

fn transfer() -> Outcome {
    let start = Instant::now();
    let data = ok(learning_data(Task::Detection))?;
    let taxonomy = BrainTaxonomy::default_10_20();

    // fixed batch: the loss must fall at every step
    let pool: Vec<&FeatureClip> = data.train.iter().chain(&data.val).collect();
    let examples: Vec<Example> = pretraining_examples(&data.train, &pool).into_iter().take(8).collect();
    let pre_config = reduced(Task::Pretraining, PRETRAIN_EPOCHS);
    let mut state = ok(ModelState::new(
        pre_config.model_config(),
        taxonomy.clone(),
        &FallbackEncoder,
        pre_config.seed,
    ))?;
    state.normalizer = Normalizer::fit(examples.iter().map(|e| e.clip));
    let mut adam = Adam::new(&state.params, pre_config.weight_decay);
    let mean = |s: &ModelState, g: Option<&mut neurognn::model::Grads>| -> Result<f64, String> {
        let out = ok(run_batch(s, &examples, pre_config.loss_weights, g))?;
        Ok(out.losses.iter().sum::<f64>() / out.losses.len() as f64)
    };
    let mut curve = vec![mean(&state, None)?];
    for _ in 0..5 {
        let mut grads = state.params.zero_grads();
        mean(&state, Some(&mut grads))?;
        adam.step(&mut state.params, &grads, pre_config.lr);
        curve.push(mean(&state, None)?);
    }
    ensure(curve.windows(2).all(|w| w[1] < w[0]), || {
        format!("fixed-batch pretrain loss not decreasing: {curve:?}")
    })?;

    let pre = ok(train(
        &data.train,
        &data.val,
        &pre_config,
        &taxonomy,
        &FallbackEncoder,
        None,
    ))?;
    let down = reduced(Task::Detection, 1);
    let scratch = ok(train(&data.train, &data.val, &down, &taxonomy, &FallbackEncoder, None))?;
    let warm = ok(train(
        &data.train,
        &data.val,
        &down,
        &taxonomy,
        &FallbackEncoder,
        Some(&pre.best),
    ))?;
    let (cold_loss, warm_loss) = (scratch.log[0].val_loss, warm.log[0].val_loss);
    ensure(warm_loss < cold_loss, || {
        format!("epoch-1 val loss pretrained {warm_loss:.5} vs scratch {cold_loss:.5}")
    })?;
    Ok(format!(
        "epoch-1 val loss {warm_loss:.4} (pretrained) < {cold_loss:.4} (Xavier); fixed-batch curve {:.4} -> {:.4}; {:.0?}",
        curve[0],
        curve[5],
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- 9

fn consistency_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut cases = 0;
    for taxonomy in [BrainTaxonomy::default_10_20(), toy_taxonomy()] {
        let layout = taxonomy.layout(true);
        let cols = 12 * 7;
        for _ in 0..10 {
            let mut forecasts = Array2::<f64>::zeros((layout.num_nodes(), cols));
            for r in 0..taxonomy.num_regions() {
                let members = taxonomy.members(r);
                for col in 0..cols {
                    // integer offsets summing to zero keep the member mean exact
                    let base = rng.random_range(-50..50) as f64;
                    let mut offsets: Vec<i64> = (0..members.len()).map(|_| rng.random_range(-9..10)).collect();
                    let total: i64 = offsets.iter().sum();
                    *offsets.last_mut().unwrap() -= total;
                    for (&m, &o) in members.iter().zip(&offsets) {
                        forecasts[[m, col]] = base + o as f64;
                    }
                    forecasts[[layout.num_electrodes + r, col]] = base;
                }
            }
            let targets = forecasts.mapv(|v| v + rng.random_range(-1.0..1.0));
            let terms = ok(pretrain_loss(
                &forecasts,
                &targets,
                &taxonomy,
                layout,
                LossWeights::default(),
            ))?;
            ensure(terms.consistency == 0.0, || {
                format!("consistency {:e}", terms.consistency)
            })?;
            ensure(terms.mse > 0.0, || "degenerate case".into())?;
            cases += 1;
        }
    }
    Ok(format!("{cases} constructed forecasts, consistency term exactly 0"))
}

// ---------------------------------------------------------------- 10, 11

fn cli(args: &[&str]) -> Result<(), String> {
    let mut full = vec!["neurognn"];
    full.extend_from_slice(args);
    match neurognn::cli::main(full.iter().copied()) {
        0 => Ok(()),
        code => Err(format!("`neurognn {}` exited {code}", args.join(" "))),
    }
}

fn dir_bytes(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

const SMALL_COUNTS: &str = "6,6,3,3,18";
const TINY_DIMS: [&str; 8] = [
    "--hidden-dim",
    "8",
    "--semantic-dim",
    "8",
    "--gcn-dim",
    "8",
    "--heads",
    "2",
];

/// Runs the same command twice into the same directory and returns both
/// snapshots of its contents.
fn twice(dir: &Path, args: &[&str]) -> Result<[BTreeMap<String, Vec<u8>>; 2], String> {
    let mut snaps = Vec::new();
    for _ in 0..2 {
        if dir.exists() {
            std::fs::remove_dir_all(dir).map_err(|e| e.to_string())?;
        }
        cli(args)?;
        snaps.push(dir_bytes(dir)?);
    }
    Ok([snaps.remove(0), snaps.remove(0)])
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    let d = data.to_str().unwrap();
    let [a, b] = twice(
        &data,
        &["synth", "--counts", SMALL_COUNTS, "--seed", "11", "--features", "-o", d],
    )?;
    ensure(!a.is_empty() && a == b, || "synth outputs differ".into())?;

    let run = tmp.path().join("run");
    let mut args = vec!["train", "--task", "detection", "--data", d, "-o", run.to_str().unwrap()];
    args.extend_from_slice(&["--max-epochs", "2", "--batch-size", "8", "--seed", "5"]);
    args.extend_from_slice(&TINY_DIMS);
    let [x, y] = twice(&run, &args)?;
    for file in ["metrics.jsonl", "checkpoint.ngck"] {
        ensure(x.contains_key(file), || format!("{file} missing"))?;
        ensure(x.get(file) == y.get(file), || {
            format!("{file} differs between identical runs")
        })?;
    }
    ok(read_checkpoint_parts(&x["checkpoint.ngck"]))?;
    Ok(format!(
        "synth: {} files identical; train: metrics log and checkpoint byte-identical",
        a.len()
    ))
}

fn harness_fidelity() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    cli(&[
        "synth",
        "--counts",
        SMALL_COUNTS,
        "--seed",
        "12",
        "--features",
        "-o",
        data.to_str().unwrap(),
    ])?;
    let out = tmp.path().join("ablate");
    let mut args = vec![
        "ablate",
        "--task",
        "detection",
        "--data",
        data.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(&["--max-epochs", "1", "--batch-size", "8", "--seed", "2"]);
    args.extend_from_slice(&TINY_DIMS);
    cli(&args)?;
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("ablation.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let rows = report["rows"].as_array().ok_or("no rows")?;
    ensure(rows.len() == 5, || format!("{} rows", rows.len()))?;
    let variants: Vec<&str> = rows.iter().filter_map(|r| r["variant"].as_str()).collect();
    ensure(
        variants == ["none", "no_temporal", "no_semantics", "no_space", "no_meta"],
        || format!("variants {variants:?}"),
    )?;
    ensure(rows[0]["pct_change"].as_f64() == Some(0.0), || {
        "full row change is not 0".into()
    })?;

    let mut larger = SynthConfig::new(
        [
            (Label::NonSeizure, 60),
            (Label::CF, 25),
            (Label::GN, 20),
            (Label::AB, 9),
            (Label::CT, 6),
        ],
        13,
    );
    larger.test_fraction = 0.0;
    let synth_dir = tmp.path().join("larger");
    let manifests = ok(neurognn::signal::generate_synthetic_dataset(&larger, &synth_dir, true))?;
    let full = manifests.train.class_counts();
    let manifest_path = synth_dir.join("train.json");
    let mut grid = Vec::new();
    for ratio in [0.8, 0.6, 0.4, 0.2] {
        let sub_path = tmp.path().join(format!("sub_{ratio}.json"));
        let r = ratio.to_string();
        cli(&[
            "subsample",
            "--manifest",
            manifest_path.to_str().unwrap(),
            "--ratio",
            &r,
            "--seed",
            "3",
            "-o",
            sub_path.to_str().unwrap(),
        ])?;
        let sub = ok(DatasetManifest::load(&sub_path))?.class_counts();
        for (label, &n) in &full {
            let want = (ratio * n as f64).round() as usize;
            let got = sub.get(label).copied().unwrap_or(0);
            ensure(got == want, || {
                format!("ratio {ratio} {}: {got} of {n}, expected {want}", label.name())
            })?;
        }
        grid.push(format!("{ratio}:{}", sub.values().sum::<usize>()));
    }
    Ok(format!(
        "ablate: 5-row report; subsample class counts round(r*n) at {}",
        grid.join(" ")
    ))
}

// ----------------------------------------------------------------

fn main() {
    let only: Option<Vec<usize>> = std::env::var("NEUROGNN_ACCEPT")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "fft oracle", fft_oracle),
        (2, "metric oracles", metric_oracles),
        (3, "shape suite", shape_suite),
        (4, "adjacency invariants", adjacency_invariants),
        (5, "gradient check", gradient_check),
        (6, "synthetic detection", learn_detection),
        (7, "synthetic classification", learn_classification),
        (8, "pretraining transfer", transfer),
        (9, "consistency identity", consistency_identity),
        (10, "determinism", determinism),
        (11, "harness fidelity", harness_fidelity),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
