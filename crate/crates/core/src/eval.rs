//! Evaluation: ROC AUC, test-set perturbation, and the benchmark grid
//! (datasets × training regimes × reruns) with wall-time accounting.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;


use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{split, train_stats, TabularDataset, TrainStats};
use crate::liit::{train_full, train_liit, LiitConfig};
use crate::matrix::Matrix;
use crate::sampler::Strategy;
use crate::scalar::Scalar;
use crate::seed::derive_seed;

/// ROC AUC.
///
/// Two columns: standard binary AUC of the positive-class (column 1) score,
/// computed from average ranks so ties count half. More columns: macro
/// average of one-vs-rest AUCs over the classes present in `y_true`.
/// Undefined (fewer than two rows or one class present) yields `None`.
pub fn auc<F: Scalar>(y_true: &[usize], proba: &Matrix<F>) -> Option<f64> {
    assert_eq!(y_true.len(), proba.rows(), "labels align with rows");
    let m = y_true.len();
    if m < 2 {
        return None;
    }
    let k = proba.cols();
    assert!(y_true.iter().all(|&y| y < k), "labels must lie in [0, K)");
    let mut present: Vec<usize> = y_true.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        return None;
    }

    let column = |class: usize| -> Vec<f64> {
        (0..m).map(|i| proba.get(i, class).as_f64()).collect()
    };
    if k == 2 {
        let positives: Vec<bool> = y_true.iter().map(|&y| y == 1).collect();
        return binary_auc(&column(1), &positives);
    }
    let mut sum = 0.0;
    for &class in &present {
        let positives: Vec<bool> = y_true.iter().map(|&y| y == class).collect();
        sum += binary_auc(&column(class), &positives)?;
    }
    Some(sum / present.len() as f64)
}

/// Mann-Whitney rank AUC with average ranks for ties.
fn binary_auc(scores: &[f64], positives: &[bool]) -> Option<f64> {
    let n = scores.len();
    let n_pos = positives.iter().filter(|&&p| p).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share the average rank.
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            if positives[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        start = end;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// How a perturbation level scales the noise distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    /// Noise mean `p·μ`, noise variance `p·σ²`.
    #[default]
    ScaleVariance,
    /// Noise mean `p·μ`, noise standard deviation `p·σ`.
    ScaleStd,
}

/// Perturbation-stability protocol: the levels swept and the seed feeding
/// the noise draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbSpec {
    pub levels: Vec<f64>,
    pub seed: u64,
    pub mode: PerturbMode,
}

impl Default for PerturbSpec {
    fn default() -> Self {
        Self {
            levels: vec![0.0, 0.02, 0.04, 0.06, 0.08],
            seed: 0,
            mode: PerturbMode::ScaleVariance,
        }
    }
}

impl PerturbSpec {
    pub fn validate(&self) -> crate::Result<()> {
        let sorted = self.levels.windows(2).all(|w| w[0] < w[1]);
        let in_range = self.levels.iter().all(|p| (0.0..=0.08).contains(p));
        if !sorted || !in_range {
            return Err(crate::Error::Config(
                "perturb.levels must be strictly increasing within [0, 0.08]".into(),
            ));
        }
        Ok(())
    }
}

/// Add diagonal Gaussian noise scaled from the training statistics to every
/// row. Level 0 returns the input unchanged, bit for bit.
pub fn perturb<F: Scalar>(
    x: &Matrix<F>,
    stats: &TrainStats<F>,
    level: f64,
    mode: PerturbMode,
    seed: u64,
) -> Matrix<F> {
    assert!((0.0..=0.08).contains(&level), "level must lie in [0, 0.08]");
    assert_eq!(stats.mean.len(), x.cols(), "stats must match columns");
    if level == 0.0 {
        return x.clone();
    }
    let noise_mean: Vec<f64> = stats.mean.iter().map(|&m| level * m.as_f64()).collect();
    let noise_sd: Vec<f64> = stats
        .variance
        .iter()
        .map(|&v| match mode {
            PerturbMode::ScaleVariance => (level * v.as_f64()).sqrt(),
            PerturbMode::ScaleStd => level * v.as_f64().sqrt(),
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    for i in 0..out.rows() {
        for (j, value) in out.row_mut(i).iter_mut().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *value += F::from_f64(noise_mean[j] + noise_sd[j] * z);
        }
    }
    out
}

/// A training regime in the benchmark grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FullModel,
    Liit(Strategy),
}

impl Regime {
    pub fn tag(self) -> String {
        match self {
            Regime::FullModel => "full".into(),
            Regime::Liit(s) => format!("liit_{}", s.tag()),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::FullModel => f.write_str("Full Model"),
            Regime::Liit(s) => write!(f, "{s}"),
        }
    }
}

/// AUC samples for one perturbation level, one entry per completed rerun.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbPoint {
    pub level: f64,
    pub aucs: Vec<Option<f64>>,
    pub mean_auc: Option<f64>,
    pub std_auc: Option<f64>,
}

/// Everything measured for one (dataset, regime) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub regime: Regime,
    pub n_train: usize,
    pub rerun_seeds: Vec<u64>,
    pub clean_aucs: Vec<Option<f64>>,
    pub mean_auc: Option<f64>,
    pub std_auc: Option<f64>,
    /// Per rerun: LAD scoring seconds (zero for the full model).
    pub scoring_secs: Vec<f64>,
    /// Per rerun: training-loop seconds (excludes data loading).
    pub training_secs: Vec<f64>,
    /// Per rerun: scoring + training.
    pub total_secs: Vec<f64>,
    /// Per rerun: total sample rows drawn (before deduplication); zero for
    /// the full model.
    pub mts_draws: Vec<usize>,
    /// Largest single `train_batches` epoch count seen in any rerun.
    pub max_epochs_seen: usize,
    pub curve: Vec<PerturbPoint>,
    pub failures: Vec<String>,
}

/// Benchmark grid settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct BenchConfig<F> {
    pub reruns: usize,
    pub master_seed: u64,
    /// Worker threads for grid cells. Keep at 1 when wall times matter:
    /// concurrent cells share cores and distort the comparison.
    pub parallelism: usize,
    pub perturb: PerturbSpec,
    pub liit: LiitConfig<F>,
}

impl<F: Scalar> Default for BenchConfig<F> {
    fn default() -> Self {
        Self {
            reruns: 5,
            master_seed: 0,
            parallelism: 1,
            perturb: PerturbSpec::default(),
            liit: LiitConfig::default(),
        }
    }
}

/// Seed for one (dataset, regime, rerun) cell. `train` runs and benchmark
/// cells share this derivation, so a single training run reproduces the
/// matching benchmark rerun exactly.
pub fn rerun_seed(master_seed: u64, dataset: &str, regime: Regime, rerun: usize) -> u64 {
    let dataset_seed = derive_seed(master_seed, dataset, 0);
    derive_seed(
        derive_seed(dataset_seed, &regime.tag(), 0),
        "rerun",
        rerun as u64,
    )
}

/// Seed for a dataset's fixed train/validation/test split.
pub fn split_seed(master_seed: u64, dataset: &str) -> u64 {
    derive_seed(derive_seed(master_seed, dataset, 0), "split", 0)
}

fn mean_std(values: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    let present: Vec<f64> = values.iter().filter_map(|v| *v).collect();
    if present.is_empty() {
        return (None, None);
    }
    let n = present.len() as f64;
    let mean = present.iter().sum::<f64>() / n;
    let var = present.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

/// Run every (dataset, regime, rerun) combination and aggregate one report
/// per (dataset, regime).
///
/// The split is fixed per dataset; rerun seeds vary network initialization,
/// shuffling, sampling and perturbation noise. The perturbation curve is
/// evaluated on the same trained models as the clean AUC. Failures are
/// recorded in the affected report and the grid continues.
pub fn run_benchmark<F: Scalar>(
    datasets: &[TabularDataset<F>],
    strategies: &[Strategy],
    cfg: &BenchConfig<F>,
) -> Vec<EvalReport> {
    let mut regimes = vec![Regime::FullModel];
    regimes.extend(strategies.iter().map(|&s| Regime::Liit(s)));

    let cells: Vec<(usize, Regime)> = (0..datasets.len())
        .flat_map(|d| regimes.iter().map(move |&r| (d, r)))
        .collect();

    let reports: Mutex<Vec<Option<EvalReport>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    let workers = cfg.parallelism.max(1).min(cells.len().max(1));

    let run_cells = |_worker: usize| loop {
        let cell = next.fetch_add(1, Ordering::Relaxed);
        if cell >= cells.len() {
            break;
        }
        let (ds_index, regime) = cells[cell];
        let report = run_cell(&datasets[ds_index], regime, cfg);
        reports.lock().expect("report store")[cell] = Some(report);
    };

    if workers <= 1 {
        run_cells(0);
    } else {
        std::thread::scope(|scope| {
            for w in 0..workers {
                scope.spawn(move || run_cells(w));
            }
        });
    }

    reports
        .into_inner()
        .expect("report store")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

fn run_cell<F: Scalar>(ds: &TabularDataset<F>, regime: Regime, cfg: &BenchConfig<F>) -> EvalReport {
    let mut report = EvalReport {
        dataset: ds.name().to_string(),
        regime,
        n_train: 0,
        rerun_seeds: Vec::new(),
        clean_aucs: Vec::new(),
        mean_auc: None,
        std_auc: None,
        scoring_secs: Vec::new(),
        training_secs: Vec::new(),
        total_secs: Vec::new(),
        mts_draws: Vec::new(),
        max_epochs_seen: 0,
        curve: cfg
            .perturb
            .levels
            .iter()
            .map(|&level| PerturbPoint {
                level,
                aucs: Vec::new(),
                mean_auc: None,
                std_auc: None,
            })
            .collect(),
        failures: Vec::new(),
    };

    let sp = match split(ds, split_seed(cfg.master_seed, ds.name())) {
        Ok(sp) => sp,
        Err(e) => {
            report.failures.push(format!("split failed: {e}"));
            return report;
        }
    };
    report.n_train = sp.train.n();
    let stats = train_stats(&sp.train);

    for rerun in 0..cfg.reruns {
        let rerun_seed = rerun_seed(cfg.master_seed, ds.name(), regime, rerun);
        match run_single(&sp, &stats, regime, cfg, rerun_seed) {
            Ok(single) => {
                report.rerun_seeds.push(rerun_seed);
                report.clean_aucs.push(single.clean_auc);
                report.scoring_secs.push(single.scoring_secs);
                report.training_secs.push(single.training_secs);
                report.total_secs.push(single.scoring_secs + single.training_secs);
                report.mts_draws.push(single.mts_draws);
                report.max_epochs_seen = report.max_epochs_seen.max(single.max_epochs);
                for (point, auc) in report.curve.iter_mut().zip(single.curve) {
                    point.aucs.push(auc);
                }
            }
            Err(e) => report.failures.push(format!("rerun {rerun}: {e}")),
        }
    }

    let (mean, std) = mean_std(&report.clean_aucs);
    report.mean_auc = mean;
    report.std_auc = std;
    for point in &mut report.curve {
        let (mean, std) = mean_std(&point.aucs);
        point.mean_auc = mean;
        point.std_auc = std;
    }
    report
}

struct SingleRun {
    clean_auc: Option<f64>,
    scoring_secs: f64,
    training_secs: f64,
    mts_draws: usize,
    max_epochs: usize,
    curve: Vec<Option<f64>>,
}

fn run_single<F: Scalar>(
    sp: &crate::dataset::SplitDataset<F>,
    stats: &TrainStats<F>,
    regime: Regime,
    cfg: &BenchConfig<F>,
    rerun_seed: u64,
) -> crate::Result<SingleRun> {
    let mut liit_cfg = cfg.liit.clone();
    liit_cfg.net.seed = derive_seed(rerun_seed, "net", 0);
    liit_cfg.sampler_seed = derive_seed(rerun_seed, "sampler", 0);

    let (net, scoring_secs, training_secs, mts_draws, max_epochs) = match regime {
        Regime::FullModel => {
            let (net, outcome) = train_full(sp, &liit_cfg)?;
            (net, 0.0, outcome.wall_secs, 0, outcome.epochs_run)
        }
        Regime::Liit(strategy) => {
            liit_cfg.strategy = strategy;
            let (net, trace) = train_liit(sp, &liit_cfg)?;
            let training = trace.total_secs - trace.scoring_secs;
            let max_epochs = trace.records.iter().map(|r| r.epochs_run).max().unwrap_or(0);
            (net, trace.scoring_secs, training, trace.mts.appended_total(), max_epochs)
        }
    };

    let clean_proba = net.forward(sp.test.features())?;
    let clean_auc = auc(sp.test.labels(), &clean_proba);

    let mut curve = Vec::with_capacity(cfg.perturb.levels.len());
    for (index, &level) in cfg.perturb.levels.iter().enumerate() {
        let noise_seed = derive_seed(
            derive_seed(rerun_seed, "perturb", cfg.perturb.seed),
            "level",
            index as u64,
        );
        let x = perturb(sp.test.features(), stats, level, cfg.perturb.mode, noise_seed);
        let proba = net.forward(&x)?;
        curve.push(auc(sp.test.labels(), &proba));
    }

    Ok(SingleRun {
        clean_auc,
        scoring_secs,
        training_secs,
        mts_draws,
        max_epochs,
        curve,
    })
}

fn format_cell(mean: Option<f64>, std: Option<f64>) -> String {
    match (mean, std) {
        (Some(m), Some(s)) => format!("{m:.2} (± {s:.2})"),
        _ => "NA".to_string(),
    }
}

/// Write the AUC summary as a CSV table: one row per dataset, one column per
/// regime, cells formatted `mean (± std)`.
pub fn write_auc_table<W: Write>(reports: &[EvalReport], mut w: W) -> std::io::Result<()> {
    let mut datasets: Vec<&str> = Vec::new();
    let mut regimes: Vec<Regime> = Vec::new();
    for r in reports {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
        if !regimes.contains(&r.regime) {
            regimes.push(r.regime);
        }
    }
    write!(w, "Data")?;
    for regime in &regimes {
        write!(w, ",{regime}")?;
    }
    writeln!(w)?;
    for dataset in datasets {
        write!(w, "{dataset}")?;
        for regime in &regimes {
            let cell = reports
                .iter()
                .find(|r| r.dataset == dataset && r.regime == *regime)
                .map(|r| format_cell(r.mean_auc, r.std_auc))
                .unwrap_or_else(|| "NA".into());
            write!(w, ",{cell}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
