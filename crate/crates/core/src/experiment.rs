//! Reproducible experiment pipelines: manifests, τ sweeps and kernel benchmarks.
//!
//! A sweep expands a manifest into one blocking per
//! (matrix, scramble seed, partition width, algorithm, τ), runs them on a
//! bounded worker pool and writes `curves.csv` plus `summary.json`. Apart
//! from benchmark timings, every output is a pure function of the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocking::{block_1sa, Similarity};
use crate::error::{Error, Result};
use crate::generators::{
    gen_blocked, gen_rmat, rng_from_seed, scramble, BlockedMatrixSpec, RmatSpec,
};
use crate::matrix::{read_matrix_market, ColumnPartition, CsrMatrix, DenseMatrix, VbrMatrix};
use crate::metrics::{
    blocking_stats, curve_select, default_taus, normalize_taus, Algorithm, BlockingCurve,
    CurveMeta, CurvePoint, CurveTarget, SweepConfig,
};
use crate::multiply::{spmm_csr, spmm_vbr, tcu_cost, TcuModel};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "ROWBLOCK_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSource {
    Blocked(BlockedMatrixSpec),
    Rmat(RmatSpec),
    /// Path to a MatrixMarket file, relative to the manifest.
    Mtx(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub id: String,
    #[serde(flatten)]
    pub source: MatrixSource,
}

impl MatrixEntry {
    pub fn load(&self, base_dir: &Path) -> Result<CsrMatrix> {
        match &self.source {
            MatrixSource::Blocked(spec) => gen_blocked(spec),
            MatrixSource::Rmat(spec) => gen_rmat(spec),
            MatrixSource::Mtx(path) => read_matrix_market(base_dir.join(path)),
        }
    }

    fn blocked_spec(&self) -> Option<&BlockedMatrixSpec> {
        match &self.source {
            MatrixSource::Blocked(spec) => Some(spec),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyFields {
    pub similarity: Similarity,
    pub bounded: bool,
    pub pattern_update: bool,
    pub compress: bool,
}

impl Default for PolicyFields {
    fn default() -> Self {
        PolicyFields {
            similarity: Similarity::Jaccard,
            bounded: true,
            pattern_update: true,
            compress: true,
        }
    }
}

impl PolicyFields {
    pub fn sweep_config(&self, algorithm: Algorithm) -> SweepConfig {
        match algorithm {
            Algorithm::OneSided => SweepConfig {
                algorithm,
                similarity: self.similarity,
                bounded: self.bounded,
                pattern_update: self.pattern_update,
                use_compression: self.compress,
            },
            Algorithm::NaiveSa => SweepConfig::naive(self.similarity),
        }
    }
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::OneSided]
}

fn default_tcu() -> TcuModel {
    TcuModel {
        m: 256.0,
        ell: 16.0,
    }
}

/// A whole experiment as a version-controllable JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub matrices: Vec<MatrixEntry>,
    #[serde(default)]
    pub scramble_seed: Option<u64>,
    /// Additional scramble seeds; every seed yields a separate curve.
    #[serde(default)]
    pub scramble_seeds: Vec<u64>,
    pub partition_widths: Vec<usize>,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub policy: PolicyFields,
    /// Dense operand widths `N` for which TCU costs are reported in the summary.
    #[serde(default)]
    pub dense_widths: Vec<usize>,
    #[serde(default = "default_tcu")]
    pub tcu: TcuModel,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut manifest: ExperimentManifest = serde_json::from_str(&fs::read_to_string(path)?)?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrices.is_empty() {
            return Err(Error::InvalidParameter("manifest lists no matrices".into()));
        }
        if self.partition_widths.is_empty() || self.partition_widths.contains(&0) {
            return Err(Error::InvalidParameter(
                "partition_widths must be nonempty and positive".into(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("algorithms list is empty".into()));
        }
        normalize_taus(&self.taus)?;
        TcuModel::new(self.tcu.m, self.tcu.ell)?;
        for entry in &self.matrices {
            match &entry.source {
                MatrixSource::Blocked(spec) => spec.validate()?,
                MatrixSource::Rmat(spec) => spec.validate()?,
                MatrixSource::Mtx(p) => {
                    let full = self.base_dir.join(p);
                    if !full.exists() {
                        return Err(Error::MissingFile(full));
                    }
                }
            }
        }
        Ok(())
    }

    /// Scramble seeds in order; `[None]` when the rows stay unscrambled.
    pub fn seeds(&self) -> Vec<Option<u64>> {
        let seeds: Vec<Option<u64>> = self
            .scramble_seed
            .iter()
            .chain(&self.scramble_seeds)
            .map(|&s| Some(s))
            .collect();
        if seeds.is_empty() {
            vec![None]
        } else {
            seeds
        }
    }

    /// Output directory: explicit override, then the manifest, then the
    /// environment, then the current directory.
    pub fn resolve_output_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        if let Some(dir) = cli_override {
            return dir.to_path_buf();
        }
        if let Some(dir) = &self.output_dir {
            return self.base_dir.join(dir);
        }
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

/// One CSV row: a blocking of one matrix at one τ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub matrix_id: String,
    pub scramble_seed: Option<u64>,
    pub algorithm: String,
    pub delta_w: usize,
    pub tau: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub gen_delta: Option<usize>,
    pub gen_theta: Option<f64>,
    pub gen_rho: Option<f64>,
    pub rho_prime: f64,
    pub delta_h_prime: f64,
    pub delta_h_prime_groups: f64,
    pub n_groups: usize,
    pub n_stored_blocks: usize,
    pub stored_area: usize,
    pub fill_in: usize,
    pub density_bound_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub target: f64,
    pub tau: f64,
    pub rho_prime: f64,
    pub delta_h_prime: f64,
    /// `ρ′ / ρ` relative to the generator's in-block density.
    pub relative_density: f64,
    /// `Δ′H / Δ` relative to the generator's block size.
    pub relative_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcuEntry {
    pub n: usize,
    pub tau: f64,
    pub blocked: f64,
    pub trivial_dense: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub matrix_id: String,
    pub scramble_seed: Option<u64>,
    pub algorithm: String,
    pub delta_w: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub points: usize,
    pub generator: Option<BlockedMatrixSpec>,
    /// Point with `Δ′H ≈ Δ` (blocked generators only).
    pub at_height: Option<Selection>,
    /// Point with `ρ′ ≈ ρ` (blocked generators only).
    pub at_density: Option<Selection>,
    pub all_density_bounds_ok: Option<bool>,
    /// TCU costs of the `Δ′H ≈ Δ` blocking (or the smallest τ for other sources).
    pub tcu: Vec<TcuEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub curves: Vec<CurveSummary>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<CurveRecord>,
    pub summary: SweepSummary,
}

struct Job {
    entry: usize,
    seed: Option<u64>,
    delta_w: usize,
    algorithm: Algorithm,
}

/// Runs every blocking the manifest describes on `jobs` worker threads.
pub fn run_sweep(manifest: &ExperimentManifest, jobs: usize) -> Result<SweepOutput> {
    manifest.validate()?;
    let taus = normalize_taus(&manifest.taus)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    let bases = manifest
        .matrices
        .iter()
        .map(|m| m.load(&manifest.base_dir))
        .collect::<Result<Vec<_>>>()?;
    let seeds = manifest.seeds();
    let mut inputs: Vec<Vec<CsrMatrix>> = Vec::with_capacity(bases.len());
    for base in &bases {
        inputs.push(
            seeds
                .iter()
                .map(|s| match s {
                    Some(seed) => scramble(base, *seed).0,
                    None => base.clone(),
                })
                .collect(),
        );
    }

    let mut curve_jobs = Vec::new();
    for entry in 0..manifest.matrices.len() {
        for &seed in &seeds {
            for &delta_w in &manifest.partition_widths {
                for &algorithm in &manifest.algorithms {
                    curve_jobs.push(Job {
                        entry,
                        seed,
                        delta_w,
                        algorithm,
                    });
                }
            }
        }
    }
    let points: Vec<(usize, f64)> = (0..curve_jobs.len())
        .flat_map(|j| taus.iter().map(move |&t| (j, t)))
        .collect();

    let input_of = |job: &Job| {
        let si = seeds.iter().position(|&s| s == job.seed).unwrap_or(0);
        &inputs[job.entry][si]
    };

    let stats = pool.install(|| {
        points
            .par_iter()
            .map(|&(j, tau)| {
                let job = &curve_jobs[j];
                let a = input_of(job);
                let partition = ColumnPartition::uniform(a.n_cols(), job.delta_w)?;
                manifest
                    .policy
                    .sweep_config(job.algorithm)
                    .evaluate(a, &partition, tau)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::with_capacity(stats.len());
    let mut curves = Vec::with_capacity(curve_jobs.len());
    let mut stats = stats.into_iter();
    for job in &curve_jobs {
        let entry = &manifest.matrices[job.entry];
        let a = input_of(job);
        let gen = entry.blocked_spec();
        let curve = BlockingCurve {
            meta: CurveMeta {
                n_rows: a.n_rows(),
                n_cols: a.n_cols(),
                nnz: a.nnz(),
                delta_w: job.delta_w,
            },
            points: taus
                .iter()
                .map(|&tau| CurvePoint {
                    tau,
                    stats: stats.next().expect("one result per point"),
                })
                .collect(),
        };
        for p in &curve.points {
            records.push(CurveRecord {
                matrix_id: entry.id.clone(),
                scramble_seed: job.seed,
                algorithm: job.algorithm.name().to_string(),
                delta_w: job.delta_w,
                tau: p.tau,
                n_rows: a.n_rows(),
                n_cols: a.n_cols(),
                nnz: a.nnz(),
                gen_delta: gen.map(|g| g.delta),
                gen_theta: gen.map(|g| g.theta),
                gen_rho: gen.map(|g| g.rho),
                rho_prime: p.stats.rho_prime,
                delta_h_prime: p.stats.delta_h_prime,
                delta_h_prime_groups: p.stats.delta_h_prime_groups,
                n_groups: p.stats.n_groups,
                n_stored_blocks: p.stats.n_stored_blocks,
                stored_area: p.stats.stored_area,
                fill_in: p.stats.fill_in,
                density_bound_ok: p.stats.density_bound_ok,
            });
        }
        curves.push(summarize_curve(manifest, job, entry, a, &curve)?);
    }

    Ok(SweepOutput {
        summary: SweepSummary {
            rows: records.len(),
            curves,
        },
        records,
    })
}

fn summarize_curve(
    manifest: &ExperimentManifest,
    job: &Job,
    entry: &MatrixEntry,
    a: &CsrMatrix,
    curve: &BlockingCurve,
) -> Result<CurveSummary> {
    let gen = entry.blocked_spec();
    let select = |target: CurveTarget| -> Option<Selection> {
        let g = gen?;
        let p = curve_select(curve, target)?;
        Some(Selection {
            target: match target {
                CurveTarget::AtHeight(h) => h,
                CurveTarget::AtDensity(r) => r,
            },
            tau: p.tau,
            rho_prime: p.stats.rho_prime,
            delta_h_prime: p.stats.delta_h_prime,
            relative_density: p.stats.rho_prime / g.rho,
            relative_height: p.stats.delta_h_prime / g.delta as f64,
        })
    };
    let at_height = select(CurveTarget::AtHeight(gen.map_or(0.0, |g| g.delta as f64)));
    let at_density = select(CurveTarget::AtDensity(gen.map_or(0.0, |g| g.rho)));

    let mut tcu = Vec::new();
    if !manifest.dense_widths.is_empty() {
        let tau = at_height
            .as_ref()
            .map(|s| s.tau)
            .or_else(|| curve.points.first().map(|p| p.tau));
        if let Some(tau) = tau {
            let partition = ColumnPartition::uniform(a.n_cols(), job.delta_w)?;
            let grouping = manifest
                .policy
                .sweep_config(job.algorithm)
                .run(a, &partition, tau)?;
            let vbr = VbrMatrix::from_grouping(a, &grouping, &partition)?;
            for &n in &manifest.dense_widths {
                let cost = tcu_cost(&vbr, n, &manifest.tcu);
                tcu.push(TcuEntry {
                    n,
                    tau,
                    blocked: cost.blocked,
                    trivial_dense: cost.trivial_dense,
                });
            }
        }
    }

    let flags: Vec<bool> = curve
        .points
        .iter()
        .filter_map(|p| p.stats.density_bound_ok)
        .collect();
    Ok(CurveSummary {
        matrix_id: entry.id.clone(),
        scramble_seed: job.seed,
        algorithm: job.algorithm.name().to_string(),
        delta_w: job.delta_w,
        n_rows: a.n_rows(),
        n_cols: a.n_cols(),
        nnz: a.nnz(),
        points: curve.points.len(),
        generator: gen.cloned(),
        at_height,
        at_density,
        all_density_bounds_ok: (!flags.is_empty()).then(|| flags.iter().all(|&f| f)),
        tcu,
    })
}

/// Writes `curves.csv` and `summary.json` into `dir`, creating it if needed.
pub fn write_sweep(output: &SweepOutput, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("curves.csv");
    write_csv(&csv_path, &output.records)?;
    let json_path = dir.join("summary.json");
    fs::write(
        &json_path,
        serde_json::to_string_pretty(&output.summary)? + "\n",
    )?;
    Ok((csv_path, json_path))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Settings for a kernel benchmark on one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub partition_widths: Vec<usize>,
    pub tau: f64,
    pub sweep: SweepConfig,
    pub dense_widths: Vec<usize>,
    pub threads: usize,
    pub runs: usize,
    /// Seed for the dense operand.
    pub seed: u64,
    pub tcu: TcuModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub matrix_id: String,
    pub delta_w: usize,
    pub tau: f64,
    pub kernel: String,
    pub threads: usize,
    pub n: usize,
    pub runs: usize,
    pub median_s: f64,
    pub mean_s: f64,
    pub max_rel_err: f64,
    pub rho_prime: f64,
    pub delta_h_prime: f64,
    pub tcu_blocked: f64,
    pub tcu_trivial: f64,
}

/// Relative tolerance the two kernels must agree to before anything is timed.
pub const KERNEL_AGREEMENT_TOL: f64 = 1e-9;

fn time_runs(runs: usize, mut f: impl FnMut() -> Result<DenseMatrix>) -> Result<(f64, f64)> {
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        std::hint::black_box(f()?);
        samples.push(start.elapsed().as_secs_f64());
    }
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    let median = if samples.len() % 2 == 0 {
        (samples[mid - 1] + samples[mid]) / 2.0
    } else {
        samples[mid]
    };
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok((median, mean))
}

/// Blocks `a` once per partition width, checks that the VBR and CSR
/// kernels agree, then times both.
pub fn run_bench(a: &CsrMatrix, matrix_id: &str, config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if config.runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    if config.sweep.algorithm != Algorithm::OneSided {
        return Err(Error::InvalidParameter(
            "benchmarks block with 1sa only".into(),
        ));
    }
    let policy = config.sweep.policy(config.tau)?;
    let mut records = Vec::new();
    for &delta_w in &config.partition_widths {
        let partition = ColumnPartition::uniform(a.n_cols(), delta_w)?;
        let grouping = block_1sa(a, &partition, &policy, config.sweep.use_compression)?;
        let stats = blocking_stats(a, &grouping, &partition)?;
        let vbr = VbrMatrix::from_grouping(a, &grouping, &partition)?;
        for &n in &config.dense_widths {
            let mut rng = rng_from_seed(config.seed);
            let b = DenseMatrix::random(a.n_cols(), n, &mut rng);
            let reference = spmm_csr(a, &b, config.threads)?;
            let blocked = spmm_vbr(&vbr, &b, config.threads)?;
            let err = blocked.max_relative_diff(&reference);
            if err.is_nan() || err > KERNEL_AGREEMENT_TOL {
                return Err(Error::InvalidParameter(format!(
                    "VBR and CSR products disagree (max relative error {err:e}) at delta_w={delta_w}, n={n}"
                )));
            }
            let cost = tcu_cost(&vbr, n, &config.tcu);
            let (csr_median, csr_mean) =
                time_runs(config.runs, || spmm_csr(a, &b, config.threads))?;
            let (vbr_median, vbr_mean) =
                time_runs(config.runs, || spmm_vbr(&vbr, &b, config.threads))?;
            for (kernel, median_s, mean_s) in
                [("csr", csr_median, csr_mean), ("vbr", vbr_median, vbr_mean)]
            {
                records.push(BenchRecord {
                    matrix_id: matrix_id.to_string(),
                    delta_w,
                    tau: config.tau,
                    kernel: kernel.to_string(),
                    threads: config.threads,
                    n,
                    runs: config.runs,
                    median_s,
                    mean_s,
                    max_rel_err: err,
                    rho_prime: stats.rho_prime,
                    delta_h_prime: stats.delta_h_prime,
                    tcu_blocked: cost.blocked,
                    tcu_trivial: cost.trivial_dense,
                });
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_manifest() -> ExperimentManifest {
        serde_json::from_str(
            r#"{
                "matrices": [
                    {"id": "b1", "blocked": {"n_rows": 64, "n_cols": 64, "delta": 8, "theta": 0.2, "rho": 0.5, "seed": 1}},
                    {"id": "r1", "rmat": {"log2_nodes": 6, "avg_degree": 4, "seed": 2}}
                ],
                "scramble_seed": 3,
                "partition_widths": [8],
                "taus": [0.2, 0.6],
                "dense_widths": [16]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn manifest_defaults() {
        let m = small_manifest();
        assert_eq!(m.algorithms, vec![Algorithm::OneSided]);
        assert!(m.policy.bounded);
        assert_eq!(m.seeds(), vec![Some(3)]);
        assert_eq!(
            m.tcu,
            TcuModel {
                m: 256.0,
                ell: 16.0
            }
        );
        m.validate().unwrap();
    }

    #[test]
    fn manifest_rejects_bad_values() {
        let mut m = small_manifest();
        m.taus = vec![1.5];
        assert!(m.validate().is_err());
        let mut m = small_manifest();
        m.partition_widths = vec![];
        assert!(m.validate().is_err());
        let mut m = small_manifest();
        m.matrices[0].source = MatrixSource::Mtx("does/not/exist.mtx".into());
        assert!(matches!(m.validate(), Err(Error::MissingFile(_))));
        assert!(serde_json::from_str::<ExperimentManifest>(
            r#"{"matrices": [], "partition_widths": [1], "bogus": 1}"#
        )
        .is_err());
    }

    #[test]
    fn sweep_cardinality_and_determinism() {
        let m = small_manifest();
        let out = run_sweep(&m, 2).unwrap();
        assert_eq!(out.records.len(), 4);
        assert_eq!(out.summary.curves.len(), 2);
        let again = run_sweep(&m, 1).unwrap();
        assert_eq!(out.records, again.records);
        let blocked = &out.summary.curves[0];
        assert!(blocked.at_height.is_some());
        assert_eq!(blocked.tcu.len(), 1);
        assert!(out.summary.curves[1].at_height.is_none());
    }

    #[test]
    fn bench_agrees_and_reports() {
        let a = gen_blocked(&BlockedMatrixSpec {
            n_rows: 64,
            n_cols: 64,
            delta: 16,
            theta: 0.25,
            rho: 0.5,
            seed: 4,
        })
        .unwrap();
        let config = BenchConfig {
            partition_widths: vec![8, 16],
            tau: 0.5,
            sweep: SweepConfig::default(),
            dense_widths: vec![4],
            threads: 2,
            runs: 3,
            seed: 1,
            tcu: default_tcu(),
        };
        let records = run_bench(&a, "m", &config).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records
            .iter()
            .all(|r| r.max_rel_err <= KERNEL_AGREEMENT_TOL));
        assert!(run_bench(&a, "m", &BenchConfig { runs: 0, ..config }).is_err());
    }
}
