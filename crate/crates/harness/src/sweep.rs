//! Grid sweeps: instance generation, the replication pool, records and
//! summary statistics.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bgi_core::environment::{gen_random_gpsi, gen_random_gpsi_mcmc, gen_random_lbgi_multi, GENERATOR_ID};
use bgi_core::{Error as CoreError, Instance, RngStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ExperimentConfig, Preset, Sampler};
use crate::runner::{judge, run_algorithm, Answer, RunParams};
use crate::HarnessError;

/// 64-bit FNV-1a over `key`, a separator byte and the little-endian
/// replication index. Never returns 0, which is reserved for instances.
pub fn stream_index(key: &str, replication: u32) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let bytes = key.bytes().chain([0xff]).chain(replication.to_le_bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h.max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub algorithm: String,
    pub preset: String,
    pub grid_point: String,
    pub instance_label: String,
    pub replication: u32,
    /// Master seed of the sweep.
    pub seed: u64,
    /// Stream index of this replication's noise; `RngStream::new(seed, stream)`.
    pub stream: u64,
    #[serde(rename = "N")]
    pub n_groups: usize,
    #[serde(rename = "K")]
    pub n_arms: usize,
    #[serde(rename = "D")]
    pub n_dims: usize,
    /// Empty for algorithms without an accuracy parameter.
    pub epsilon: Option<f64>,
    pub delta: f64,
    pub beta_scale: f64,
    /// `;`-separated, empty for the Pareto-set problem.
    pub weights: String,
    pub stopping_time: u64,
    pub rounds: u64,
    /// 1-based, `;`-separated.
    pub recommended: String,
    /// Empty unless `status` is `ok`.
    pub correct: Option<bool>,
    pub status: String,
    pub wall_clock_ms: Option<u64>,
}

pub const STATUS_OK: &str = "ok";
pub const STATUS_BUDGET: &str = "budget_exhausted";
pub const STATUS_ERROR: &str = "error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub grid_point: String,
    pub algorithm: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<SummaryRow>,
    /// Every instance used, keyed by file stem.
    pub instances: Vec<(String, Instance)>,
    /// Grid points skipped and replications that failed, one line each.
    pub diagnostics: Vec<String>,
}

pub fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn join_one_based(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(";")
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(';').map(|x| x.parse().ok()).collect()
}

enum Source {
    Gpsi { n: usize, k: usize, d: usize, pareto_count: usize },
    Lbgi { n: usize, k: usize, d: usize },
    File(PathBuf),
}

struct Slot {
    name: String,
    source: Source,
}

struct GridPoint {
    label: String,
    slot: usize,
    weights: Option<Vec<f64>>,
    algorithms: Vec<Algorithm>,
}

fn layout(cfg: &ExperimentConfig) -> (Vec<Slot>, Vec<GridPoint>) {
    let g = &cfg.grid;
    let mut slots = Vec::new();
    let mut points = Vec::new();
    let all = cfg.algorithms.clone();
    match cfg.preset {
        Preset::VaryN => {
            for &n in &g.n_groups {
                let p = g.pareto_count.unwrap_or((0.3 * n as f64).ceil() as usize);
                points.push(GridPoint {
                    label: format!("N={n}"),
                    slot: slots.len(),
                    weights: None,
                    algorithms: all.clone(),
                });
                slots.push(Slot {
                    name: format!("N{n}"),
                    source: Source::Gpsi {
                        n,
                        k: g.n_arms[0],
                        d: g.n_dims[0],
                        pareto_count: p,
                    },
                });
            }
        }
        Preset::VaryK => {
            for &k in &g.n_arms {
                points.push(GridPoint {
                    label: format!("K={k}"),
                    slot: slots.len(),
                    weights: None,
                    algorithms: all.clone(),
                });
                slots.push(Slot {
                    name: format!("K{k}"),
                    source: Source::Gpsi {
                        n: g.n_groups[0],
                        k,
                        d: g.n_dims[0],
                        pareto_count: g.pareto_count.unwrap_or(2),
                    },
                });
            }
        }
        Preset::WeightSweep => {
            slots.push(Slot {
                name: "shared".into(),
                source: Source::Lbgi {
                    n: g.n_groups[0],
                    k: g.n_arms[0],
                    d: g.n_dims[0],
                },
            });
            for (j, w) in g.weights.iter().enumerate() {
                points.push(GridPoint {
                    label: format!("w{}", j + 1),
                    slot: 0,
                    weights: Some(w.clone()),
                    algorithms: all.clone(),
                });
            }
        }
        Preset::Custom => {
            let gpsi: Vec<Algorithm> = all.iter().copied().filter(|a| !a.is_lbgi()).collect();
            let lbgi: Vec<Algorithm> = all.iter().copied().filter(|a| a.is_lbgi()).collect();
            for (s, path) in g.instances.iter().enumerate() {
                let stem = path.file_stem().map_or_else(|| format!("instance{}", s + 1), |x| x.to_string_lossy().into_owned());
                let name = format!("{}-{stem}", s + 1);
                if !gpsi.is_empty() {
                    points.push(GridPoint {
                        label: name.clone(),
                        slot: s,
                        weights: None,
                        algorithms: gpsi.clone(),
                    });
                }
                if !lbgi.is_empty() {
                    for (j, w) in g.weights.iter().enumerate() {
                        points.push(GridPoint {
                            label: format!("{name}/w{}", j + 1),
                            slot: s,
                            weights: Some(w.clone()),
                            algorithms: lbgi.clone(),
                        });
                    }
                }
                slots.push(Slot {
                    name,
                    source: Source::File(path.clone()),
                });
            }
        }
    }
    (slots, points)
}

fn generate(cfg: &ExperimentConfig, slot: &Slot, replication: Option<u32>) -> Result<Instance, HarnessError> {
    let stream = replication.map_or(0, |r| stream_index("instance", r));
    let mut rng = RngStream::new(cfg.master_seed, stream);
    let mut inst = match slot.source {
        Source::Gpsi { n, k, d, pareto_count } => match cfg.sampler {
            Sampler::Rejection => gen_random_gpsi(n, k, d, pareto_count, cfg.epsilon, cfg.attempt_budget, &mut rng)?,
            Sampler::Mcmc => gen_random_gpsi_mcmc(n, k, d, pareto_count, cfg.epsilon, cfg.mcmc_steps, &mut rng)?,
        },
        Source::Lbgi { n, k, d } => gen_random_lbgi_multi(n, k, d, &cfg.grid.weights, cfg.delta_min, cfg.attempt_budget, &mut rng)?,
        Source::File(ref path) => {
            let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            Instance::from_json(&text)?
        }
    };
    if let Some(r) = replication {
        inst.label = format!("{}-r{r}", inst.label);
    }
    Ok(inst)
}

struct Task<'a> {
    point: usize,
    algorithm: Algorithm,
    replication: u32,
    instance: &'a Instance,
}

fn run_task(cfg: &ExperimentConfig, point: &GridPoint, task: &Task<'_>) -> (ExperimentRecord, Option<String>) {
    let key = if cfg.common_random_numbers { "common" } else { task.algorithm.name() };
    let stream = stream_index(key, task.replication);
    let params = RunParams {
        delta: cfg.delta,
        epsilon: cfg.epsilon,
        beta_scale: cfg.beta_scale,
        max_rounds: cfg.max_rounds,
        record_trace: false,
    };
    let inst = task.instance;
    let weights = point.weights.as_deref();
    let epsilon = params.effective_epsilon(task.algorithm);
    let mut rec = ExperimentRecord {
        algorithm: task.algorithm.name().into(),
        preset: cfg.preset.name().into(),
        grid_point: point.label.clone(),
        instance_label: inst.label.clone(),
        replication: task.replication,
        seed: cfg.master_seed,
        stream,
        n_groups: inst.n_groups(),
        n_arms: inst.n_arms(),
        n_dims: inst.n_dims(),
        epsilon,
        delta: cfg.delta,
        beta_scale: cfg.beta_scale,
        weights: weights.map(join_f64).unwrap_or_default(),
        stopping_time: 0,
        rounds: 0,
        recommended: String::new(),
        correct: None,
        status: STATUS_ERROR.into(),
        wall_clock_ms: None,
    };
    let start = Instant::now();
    let result = run_algorithm(task.algorithm, inst, weights, &params, &mut RngStream::new(cfg.master_seed, stream))
        .and_then(|out| Ok((judge(inst, &out.answer, epsilon, weights)?, out)));
    if cfg.timing {
        rec.wall_clock_ms = Some(start.elapsed().as_millis() as u64);
    }
    let diag = |e: &dyn std::fmt::Display| {
        format!(
            "{} {} replication {}: {e}",
            point.label,
            task.algorithm.name(),
            task.replication
        )
    };
    match result {
        Ok((correct, out)) => {
            rec.stopping_time = out.total_pulls;
            rec.rounds = out.rounds;
            rec.recommended = join_one_based(&out.answer.indices());
            rec.correct = Some(correct);
            rec.status = STATUS_OK.into();
            (rec, None)
        }
        Err(HarnessError::Core(CoreError::BudgetExhausted { partial, .. })) => {
            rec.stopping_time = partial.total_pulls;
            rec.rounds = partial.rounds;
            rec.status = STATUS_BUDGET.into();
            let msg = diag(&format!("round budget {} exhausted", cfg.max_rounds));
            (rec, Some(msg))
        }
        Err(e) => {
            let msg = diag(&e);
            (rec, Some(msg))
        }
    }
}

/// Mean and standard deviation (divisor `n - 1`, 0 when `n = 1`) of the
/// `ok` stopping times, summed in record order.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in records {
        let k = (r.grid_point.as_str(), r.algorithm.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(g, a)| {
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| r.grid_point == g && r.algorithm == a && r.status == STATUS_OK)
                .map(|r| r.stopping_time as f64)
                .collect();
            let n = xs.len();
            let mean = if n == 0 { f64::NAN } else { xs.iter().sum::<f64>() / n as f64 };
            let std = if n < 2 {
                0.0
            } else {
                (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            SummaryRow {
                grid_point: g.into(),
                algorithm: a.into(),
                mean,
                std,
                n,
            }
        })
        .collect()
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput, HarnessError> {
    cfg.validate()?;
    let (slots, points) = layout(cfg);
    let reps: Vec<Option<u32>> = if cfg.regenerate_per_replication {
        (0..cfg.replications).map(Some).collect()
    } else {
        vec![None]
    };

    // instances[slot][rep-or-0]
    let mut diagnostics = Vec::new();
    let mut instances: Vec<Option<Vec<Instance>>> = Vec::with_capacity(slots.len());
    for slot in &slots {
        match reps.iter().map(|&r| generate(cfg, slot, r)).collect::<Result<Vec<_>, _>>() {
            Ok(v) => instances.push(Some(v)),
            Err(e @ HarnessError::Io { .. }) => return Err(e),
            Err(e) => {
                diagnostics.push(format!("instance {}: {e}; grid point skipped", slot.name));
                instances.push(None);
            }
        }
    }

    let mut tasks = Vec::new();
    for (p, point) in points.iter().enumerate() {
        let Some(insts) = &instances[point.slot] else { continue };
        for &algorithm in &point.algorithms {
            for replication in 0..cfg.replications {
                let instance = if cfg.regenerate_per_replication {
                    &insts[replication as usize]
                } else {
                    &insts[0]
                };
                tasks.push(Task {
                    point: p,
                    algorithm,
                    replication,
                    instance,
                });
            }
        }
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let mut results: Vec<(usize, ExperimentRecord, Option<String>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let (rec, diag) = run_task(cfg, &points[t.point], t);
                (t.point, rec, diag)
            })
            .collect()
    });
    let alg_rank = |a: &str| cfg.algorithms.iter().position(|x| x.name() == a);
    results.sort_by(|a, b| {
        (a.0, alg_rank(&a.1.algorithm), a.1.replication).cmp(&(b.0, alg_rank(&b.1.algorithm), b.1.replication))
    });

    let mut records = Vec::with_capacity(results.len());
    for (_, rec, diag) in results {
        diagnostics.extend(diag);
        records.push(rec);
    }
    let summary = summarize(&records);
    let mut named = Vec::new();
    for (slot, insts) in slots.iter().zip(instances) {
        for (r, inst) in insts.into_iter().flatten().enumerate() {
            let name = if cfg.regenerate_per_replication {
                format!("{}-r{r}", slot.name)
            } else {
                slot.name.clone()
            };
            named.push((name, inst));
        }
    }
    Ok(SweepOutput {
        records,
        summary,
        instances: named,
        diagnostics,
    })
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(HarnessError::from)).collect()
}

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const METADATA_FILE: &str = "metadata.json";
pub const INSTANCE_DIR: &str = "instances";

/// Writes `results.csv`, `summary.json`, `metadata.json` and one JSON file
/// per instance under `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, out: &SweepOutput, dir: &Path) -> Result<(), HarnessError> {
    let inst_dir = dir.join(INSTANCE_DIR);
    fs::create_dir_all(&inst_dir).map_err(|e| HarnessError::io(&inst_dir, e))?;
    let write = |path: PathBuf, bytes: Vec<u8>| fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e));
    write(dir.join(RESULTS_FILE), records_to_csv(&out.records)?)?;
    write(
        dir.join(SUMMARY_FILE),
        (serde_json::to_string_pretty(&out.summary)? + "\n").into_bytes(),
    )?;
    for (name, inst) in &out.instances {
        write(inst_dir.join(format!("{name}.json")), (inst.to_json() + "\n").into_bytes())?;
    }
    let meta = serde_json::json!({
        "generator_id": GENERATOR_ID,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "diagnostics": out.diagnostics,
    });
    write(dir.join(METADATA_FILE), (serde_json::to_string_pretty(&meta)? + "\n").into_bytes())
}

/// Recomputes the `correct` column of an `ok` record from the stored
/// instance. `None` for other records or unparsable fields.
pub fn rejudge(record: &ExperimentRecord, instance: &Instance) -> Option<bool> {
    if record.status != STATUS_OK {
        return None;
    }
    let picked: Vec<usize> = parse_list::<usize>(&record.recommended)?
        .into_iter()
        .map(|i| i.checked_sub(1))
        .collect::<Option<_>>()?;
    let weights: Vec<f64> = parse_list(&record.weights)?;
    let answer = if weights.is_empty() {
        Answer::Set(picked)
    } else {
        Answer::Single(*picked.first()?)
    };
    let w = (!weights.is_empty()).then_some(weights.as_slice());
    judge(instance, &answer, record.epsilon, w).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Grid;

    fn small(preset: Preset) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::named(match preset {
            Preset::WeightSweep => "desk-weight-sweep",
            _ => "desk-vary-n",
        })
        .unwrap();
        cfg.replications = 2;
        cfg.epsilon = 0.2;
        cfg.delta = 0.2;
        cfg.mcmc_steps = 500;
        if preset == Preset::VaryN {
            cfg.grid = Grid {
                n_groups: vec![2, 3],
                n_arms: vec![2],
                n_dims: vec![2],
                ..Grid::default()
            };
        } else {
            cfg.delta_min = 0.2;
            cfg.grid.n_groups = vec![2];
            cfg.grid.n_arms = vec![2];
        }
        cfg
    }

    #[test]
    fn stream_indices_differ() {
        assert_ne!(stream_index("te", 0), stream_index("te", 1));
        assert_ne!(stream_index("te", 0), stream_index("age", 0));
        assert_eq!(stream_index("te", 3), stream_index("te", 3));
        assert_ne!(stream_index("", 0), 0);
    }

    #[test]
    fn summary_statistics() {
        let rec = |t: u64, status: &str| ExperimentRecord {
            algorithm: "te".into(),
            preset: "vary_n".into(),
            grid_point: "N=3".into(),
            instance_label: String::new(),
            replication: 0,
            seed: 0,
            stream: 1,
            n_groups: 3,
            n_arms: 2,
            n_dims: 2,
            epsilon: Some(0.1),
            delta: 0.1,
            beta_scale: 1.0,
            weights: String::new(),
            stopping_time: t,
            rounds: 1,
            recommended: "1".into(),
            correct: Some(true),
            status: status.into(),
            wall_clock_ms: None,
        };
        let s = summarize(&[rec(2, STATUS_OK), rec(4, STATUS_OK), rec(9, STATUS_BUDGET)]);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].mean, s[0].n), (3.0, 2));
        assert!((s[0].std - 2f64.sqrt()).abs() < 1e-15);
        let one = summarize(&[rec(7, STATUS_OK)]);
        assert_eq!((one[0].mean, one[0].std), (7.0, 0.0));
    }

    #[test]
    fn list_formatting_roundtrips() {
        assert_eq!(join_one_based(&[0, 2]), "1;3");
        assert_eq!(join_f64(&[0.1, 2.0]), "0.1;2");
        assert_eq!(parse_list::<f64>("0.1;2").unwrap(), vec![0.1, 2.0]);
        assert_eq!(parse_list::<usize>("").unwrap(), Vec::<usize>::new());
        assert!(parse_list::<usize>("1;x").is_none());
    }

    #[test]
    fn small_sweeps_are_sorted_and_judged() {
        for preset in [Preset::VaryN, Preset::WeightSweep] {
            let cfg = small(preset);
            let out = run_sweep(&cfg).unwrap();
            let per_point = cfg.algorithms.len() * 2;
            assert_eq!(out.records.len(), per_point * if preset == Preset::VaryN { 2 } else { 5 });
            assert_eq!(out.summary.len(), out.records.len() / 2);
            for r in &out.records {
                assert_eq!(r.status, STATUS_OK);
                assert!(r.stopping_time > 0);
                let inst = &out.instances.iter().find(|(_, i)| i.label == r.instance_label).unwrap().1;
                assert_eq!(rejudge(r, inst), r.correct);
            }
            let keys: Vec<_> = out.records.iter().map(|r| (r.grid_point.clone(), r.replication)).collect();
            assert_eq!(keys[0].1, 0);
            assert_eq!(keys[1].1, 1);
        }
    }

    #[test]
    fn regenerated_instances_per_replication() {
        let mut cfg = small(Preset::VaryN);
        cfg.regenerate_per_replication = true;
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.instances.len(), 4);
        assert_ne!(out.instances[0].1.tensor, out.instances[1].1.tensor);
        let r0 = &out.records[0];
        assert!(r0.instance_label.ends_with("-r0"));
    }

    #[test]
    fn budget_errors_are_recorded_not_fatal() {
        let mut cfg = small(Preset::VaryN);
        cfg.algorithms = vec![Algorithm::Te];
        cfg.max_rounds = 1;
        let out = run_sweep(&cfg).unwrap();
        assert!(out.records.iter().any(|r| r.status == STATUS_BUDGET));
        for r in out.records.iter().filter(|r| r.status == STATUS_BUDGET) {
            assert_eq!(r.correct, None);
            assert!(r.stopping_time > 0);
        }
        assert!(!out.diagnostics.is_empty());
    }

    #[test]
    fn generation_failure_skips_the_grid_point() {
        let mut cfg = small(Preset::VaryN);
        cfg.sampler = Sampler::Rejection;
        cfg.attempt_budget = 1;
        cfg.grid.n_groups = vec![1, 3];
        cfg.grid.pareto_count = Some(3);
        let out = run_sweep(&cfg).unwrap();
        assert!(out.records.iter().all(|r| r.grid_point == "N=3") || out.records.is_empty());
        assert!(out.diagnostics.iter().any(|d| d.contains("N1")));
    }
}
