use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dplrf::harness::evaluate::{calibration, evaluate_lowspace, evaluate_spectral, Algorithm};
use dplrf::harness::generate::{gen_stream, Model};
use dplrf::harness::matrix_io::{read_matrix, write_matrix};
use dplrf::harness::sensitivity::{sensitivity_check, SensitivityConfig};
use dplrf::harness::stream::StreamFile;
use dplrf::lowspace::{LowSpaceFactorization, PaddedLayout};
use dplrf::sketch::plan_dimensions;
use dplrf::{
    ContinualLowSpace, ContinualSpectral, DenseMatrix, Epsilon, Error, Factorization, LowSpaceState,
    LrfConfig, Result, SpectralState,
};

#[derive(Parser)]
#[command(name = "dplrf", version, about = "Private low-rank factorization of turnstile matrix streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded test stream and the dense matrix it sums to.
    GenStream(GenArgs),
    /// Sketch a stream and release a rank-k factorization.
    Factorize(FactorizeArgs),
    /// Continual release: a factorization of every prefix, via the binary tree.
    Continual(ContinualArgs),
    /// Compare a saved factorization with the exact matrix.
    Evaluate(EvaluateArgs),
    /// Monte-Carlo check that the sketches do not inflate neighboring differences.
    SensitivityCheck(SensitivityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    ExactRank,
    LowRankNoise,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Spectral,
    Lowspace,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Spectral => Algorithm::Spectral,
            AlgoArg::Lowspace => Algorithm::Lowspace,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "exact-rank")]
    model: ModelArg,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Target σ_{k+1} for the low-rank-noise model.
    #[arg(long, default_value_t = 0.1)]
    tail: f64,
    /// Smallest signal singular value for the low-rank-noise model.
    #[arg(long, default_value_t = 10.0)]
    scale: f64,
    /// Fraction of entries streamed with an extra cancelling pair.
    #[arg(long, default_value_t = 0.1)]
    churn: f64,
    /// Horizon written into the stream header.
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, env = "DPLRF_SEED", default_value_t = 0)]
    seed: u64,
    /// Stream file to write.
    #[arg(long)]
    out: PathBuf,
    /// Dense matrix file (defaults to `<out>.dense`).
    #[arg(long)]
    dense_out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PrivacyArgs {
    #[arg(long, value_enum, default_value = "spectral")]
    algo: AlgoArg,
    #[arg(long)]
    k: usize,
    /// Privacy budget per release; "inf" disables noise.
    #[arg(long, default_value = "1")]
    epsilon: Epsilon,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, env = "DPLRF_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    v: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    c_t: f64,
    #[arg(long, default_value_t = 1.0)]
    c_v: f64,
    /// Same as `--epsilon inf`.
    #[arg(long)]
    non_private: bool,
    /// Constant multiplying the additive-error shape in reports.
    #[arg(long, default_value_t = 1.0)]
    zeta_constant: f64,
}

impl PrivacyArgs {
    fn config(&self, m: usize, n: usize) -> LrfConfig {
        let epsilon = if self.non_private { Epsilon::Infinite } else { self.epsilon };
        LrfConfig::new(m, n, self.k)
            .with_alpha(self.alpha)
            .with_epsilon(epsilon)
            .with_delta(self.delta)
            .with_seed(self.seed)
            .with_sketch_sizes(self.t, self.v)
            .with_planning_constants(self.c_t, self.c_v)
    }
}

#[derive(Args)]
struct FactorizeArgs {
    #[arg(long)]
    stream: PathBuf,
    #[command(flatten)]
    privacy: PrivacyArgs,
    /// Exact matrix for the error report (defaults to summing the stream).
    #[arg(long)]
    dense: Option<PathBuf>,
    /// Skip the error report.
    #[arg(long)]
    no_report: bool,
    /// Write u.txt, sigma.txt, v.txt and meta.json here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Low-space only: also emit the factorization restricted to the A block.
    #[arg(long)]
    restrict: bool,
}

#[derive(Args)]
struct ContinualArgs {
    #[arg(long)]
    stream: PathBuf,
    #[command(flatten)]
    privacy: PrivacyArgs,
    /// Number of epochs; defaults to the stream header or the update count.
    #[arg(long)]
    horizon: Option<u64>,
    /// Report every this many epochs (the last epoch is always reported).
    #[arg(long, default_value_t = 1)]
    query_every: u64,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Exact matrix.
    #[arg(long)]
    dense: PathBuf,
    /// Directory written by `factorize --out-dir`.
    #[arg(long)]
    factors: PathBuf,
    #[arg(long)]
    zeta_constant: Option<f64>,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Gaussian sketch width; planned from (k, alpha, delta) when absent.
    #[arg(long)]
    t: Option<usize>,
    /// SRHT rows; planned and capped to the padded dimension when absent.
    #[arg(long)]
    v: Option<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, env = "DPLRF_SEED", default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenStream(a) => gen(a),
        Command::Factorize(a) => factorize(a),
        Command::Continual(a) => continual(a),
        Command::Evaluate(a) => evaluate(a),
        Command::SensitivityCheck(a) => sensitivity(a),
    };
    match result {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("serializable report");
            match writeln!(std::io::stdout().lock(), "{text}") {
                Ok(()) => ExitCode::SUCCESS,
                // A closed pipe (e.g. `| head`) is not an error worth reporting.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable value")
}

fn gen(a: GenArgs) -> Result<Value> {
    let model = match a.model {
        ModelArg::ExactRank => Model::ExactRank { k: a.k },
        ModelArg::LowRankNoise => Model::LowRankPlusNoise {
            k: a.k,
            tail: a.tail,
            scale: a.scale,
        },
        ModelArg::Uniform => Model::Uniform,
    };
    let mut g = gen_stream(a.m, a.n, model, a.seed, a.churn)?;
    g.stream.horizon = a.horizon;
    let dense_path = a.dense_out.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".dense");
        PathBuf::from(p)
    });
    g.stream.write(&a.out)?;
    write_matrix(&g.dense, &dense_path)?;
    Ok(json!({
        "stream": a.out,
        "dense": dense_path,
        "m": a.m,
        "n": a.n,
        "model": to_json(&model),
        "seed": a.seed,
        "updates": g.stream.updates.len(),
    }))
}

fn load_dense(path: Option<&Path>, stream: &StreamFile) -> Result<DenseMatrix> {
    match path {
        Some(p) => {
            let a = read_matrix(p)?;
            if a.shape() != (stream.m, stream.n) {
                return Err(Error::InvalidInput(format!(
                    "dense matrix is {}x{}, stream header says {}x{}",
                    a.nrows(),
                    a.ncols(),
                    stream.m,
                    stream.n
                )));
            }
            Ok(a)
        }
        None => stream.to_dense(),
    }
}

fn factorization_json(f: &Factorization) -> Value {
    json!({
        "k": f.k(),
        "achieved_rank": f.achieved_rank,
        "rank_deficient": f.is_rank_deficient(),
        "sigma": f.sigma,
        "u_shape": [f.u.nrows(), f.u.ncols()],
        "v_shape": [f.v.nrows(), f.v.ncols()],
        "orthonormality_defect": f.orthonormality_defect(),
    })
}

fn write_factors(dir: &Path, f: &Factorization, prefix: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_matrix(&f.u, dir.join(format!("{prefix}u.txt")))?;
    write_matrix(&DenseMatrix::from_row_slice(1, f.k(), &f.sigma), dir.join(format!("{prefix}sigma.txt")))?;
    write_matrix(&f.v, dir.join(format!("{prefix}v.txt")))?;
    Ok(())
}

fn factorize(a: FactorizeArgs) -> Result<Value> {
    let stream = StreamFile::read(&a.stream)?;
    let config = a.privacy.config(stream.m, stream.n);
    let algo: Algorithm = a.privacy.algo.into();
    let mut out = json!({ "config": to_json(&config), "algorithm": to_json(&algo) });
    let dense = if a.no_report {
        None
    } else {
        Some(load_dense(a.dense.as_deref(), &stream)?)
    };
    match algo {
        Algorithm::Spectral => {
            if a.restrict {
                return Err(Error::InvalidArgument("--restrict applies to --algo lowspace only".into()));
            }
            let mut st = SpectralState::init(&config)?;
            st.update_all(stream.updates.iter().copied())?;
            let f = st.finalize()?;
            out["plan"] = to_json(st.plan());
            out["params"] = to_json(st.params());
            out["transposed"] = json!(st.orientation().transposed);
            out["factorization"] = factorization_json(&f);
            if let Some(d) = &dense {
                out["report"] = to_json(&evaluate_spectral(d, &f, st.params(), st.plan(), a.privacy.zeta_constant)?);
            }
            if let Some(dir) = &a.out_dir {
                write_factors(dir, &f, "")?;
                write_meta(dir, &config, algo, None, a.privacy.zeta_constant)?;
            }
        }
        Algorithm::Lowspace => {
            let mut st = LowSpaceState::init(&config)?;
            st.update_all(stream.updates.iter().copied())?;
            let f = st.finalize()?;
            out["plan"] = to_json(st.plan());
            out["params"] = to_json(st.params());
            out["transposed"] = json!(st.orientation().transposed);
            out["layout"] = to_json(&f.layout);
            out["factorization"] = factorization_json(&f.padded);
            if let Some(d) = &dense {
                out["report"] = to_json(&evaluate_lowspace(d, &f, st.params(), st.plan(), a.privacy.zeta_constant)?);
            }
            let restricted = a.restrict.then(|| f.restricted());
            if let Some(r) = &restricted {
                let mut info = factorization_json(r);
                info["note"] = json!("post-processing: padding coordinates dropped and bases re-orthonormalized");
                out["restricted"] = info;
            }
            if let Some(dir) = &a.out_dir {
                write_factors(dir, &f.padded, "")?;
                if let Some(r) = &restricted {
                    write_factors(dir, r, "restricted_")?;
                }
                write_meta(dir, &config, algo, Some(f.layout), a.privacy.zeta_constant)?;
            }
        }
    }
    if let Some(dir) = &a.out_dir {
        out["out_dir"] = json!(dir);
    }
    Ok(out)
}

fn write_meta(
    dir: &Path,
    config: &LrfConfig,
    algo: Algorithm,
    layout: Option<PaddedLayout>,
    zeta_constant: f64,
) -> Result<()> {
    let meta = json!({
        "config": to_json(config),
        "algorithm": to_json(&algo),
        "layout": layout.map(|l| to_json(&l)),
        "zeta_constant": zeta_constant,
    });
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta).expect("json"))?;
    Ok(())
}

fn meta_field<'a>(meta: &'a Value, path: &[&str]) -> Result<&'a Value> {
    path.iter()
        .try_fold(meta, |v, key| v.get(key))
        .ok_or_else(|| Error::InvalidInput(format!("meta.json lacks {}", path.join("."))))
}

fn meta_usize(meta: &Value, path: &[&str]) -> Result<usize> {
    meta_field(meta, path)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::InvalidInput(format!("meta.json field {} is not a count", path.join("."))))
}

fn meta_f64(meta: &Value, path: &[&str]) -> Result<f64> {
    meta_field(meta, path)?
        .as_f64()
        .ok_or_else(|| Error::InvalidInput(format!("meta.json field {} is not a number", path.join("."))))
}

fn config_from_meta(meta: &Value) -> Result<LrfConfig> {
    let eps = match meta_field(meta, &["config", "epsilon"])? {
        Value::String(s) => s.parse()?,
        v => Epsilon::finite(v.as_f64().ok_or_else(|| Error::InvalidInput("bad epsilon in meta.json".into()))?)?,
    };
    let opt = |key: &str| meta_field(meta, &["config", key]).ok().and_then(Value::as_u64).map(|x| x as usize);
    Ok(LrfConfig::new(
        meta_usize(meta, &["config", "m"])?,
        meta_usize(meta, &["config", "n"])?,
        meta_usize(meta, &["config", "k"])?,
    )
    .with_alpha(meta_f64(meta, &["config", "alpha"])?)
    .with_epsilon(eps)
    .with_delta(meta_f64(meta, &["config", "delta"])?)
    .with_seed(meta_field(meta, &["config", "seed"])?.as_u64().unwrap_or(0))
    .with_sketch_sizes(opt("t"), opt("v"))
    .with_planning_constants(meta_f64(meta, &["config", "c_t"])?, meta_f64(meta, &["config", "c_v"])?))
}

fn evaluate(a: EvaluateArgs) -> Result<Value> {
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(a.factors.join("meta.json"))?)
        .map_err(|e| Error::InvalidInput(format!("meta.json: {e}")))?;
    let config = config_from_meta(&meta)?;
    let algo = match meta_field(&meta, &["algorithm"])?.as_str() {
        Some("spectral") => Algorithm::Spectral,
        Some("lowspace") => Algorithm::Lowspace,
        _ => return Err(Error::InvalidInput("unknown algorithm in meta.json".into())),
    };
    let zeta_constant = match a.zeta_constant {
        Some(c) => c,
        None => meta_f64(&meta, &["zeta_constant"])?,
    };
    let dense = read_matrix(&a.dense)?;
    let u = read_matrix(a.factors.join("u.txt"))?;
    let sigma = read_matrix(a.factors.join("sigma.txt"))?;
    let v = read_matrix(a.factors.join("v.txt"))?;
    let sigma: Vec<f64> = sigma.iter().copied().collect();
    if u.ncols() != sigma.len() || v.ncols() != sigma.len() {
        return Err(Error::InvalidInput("factor files disagree on k".into()));
    }
    let achieved_rank = sigma.iter().filter(|&&s| s > dplrf::linalg::RCOND * sigma[0]).count();
    let f = Factorization {
        u,
        sigma,
        v,
        achieved_rank,
    };
    let (params, plan) = calibration(&config, algo)?;
    let report = match algo {
        Algorithm::Spectral => evaluate_spectral(&dense, &f, &params, &plan, zeta_constant)?,
        Algorithm::Lowspace => {
            let layout = match meta_field(&meta, &["layout"])?.as_str() {
                Some("rows") => PaddedLayout::Rows,
                _ => PaddedLayout::Columns,
            };
            let lf = LowSpaceFactorization {
                padded: f,
                layout,
                rows: dense.nrows(),
                cols: dense.ncols(),
                sigma_min: params.sigma_min,
            };
            let expected = match layout {
                PaddedLayout::Columns => (dense.nrows(), dense.nrows() + dense.ncols()),
                PaddedLayout::Rows => (dense.nrows() + dense.ncols(), dense.ncols()),
            };
            if (lf.padded.u.nrows(), lf.padded.v.nrows()) != expected {
                return Err(Error::InvalidInput("factor shapes do not match the dense matrix".into()));
            }
            evaluate_lowspace(&dense, &lf, &params, &plan, zeta_constant)?
        }
    };
    Ok(json!({ "report": to_json(&report) }))
}

fn continual(a: ContinualArgs) -> Result<Value> {
    let stream = StreamFile::read(&a.stream)?;
    let horizon = a
        .horizon
        .or(stream.horizon)
        .unwrap_or(stream.updates.len().max(2) as u64);
    if a.query_every == 0 {
        return Err(Error::InvalidArgument("--query-every must be positive".into()));
    }
    let config = a.privacy.config(stream.m, stream.n);
    let algo: Algorithm = a.privacy.algo.into();
    // Epoch τ receives a contiguous share of the updates.
    let total = stream.updates.len() as u64;
    let epochs = horizon;
    let bound = |tau: u64| (total * tau / epochs) as usize;
    let mut prefix = DenseMatrix::zeros(stream.m, stream.n);
    let mut queries = Vec::new();
    let zc = a.privacy.zeta_constant;
    let mut run = |step: &mut dyn FnMut(&[dplrf::TurnstileUpdate]) -> Result<()>,
                   query: &mut dyn FnMut(u64, &DenseMatrix) -> Result<Value>|
     -> Result<()> {
        for tau in 1..=epochs {
            let chunk = &stream.updates[bound(tau - 1)..bound(tau)];
            step(chunk)?;
            for u in chunk {
                prefix[(u.i, u.j)] += u.s;
            }
            if tau % a.query_every == 0 || tau == epochs {
                queries.push(query(tau, &prefix)?);
            }
        }
        Ok(())
    };
    let mut out = json!({ "config": to_json(&config), "algorithm": to_json(&algo) });
    match algo {
        Algorithm::Spectral => {
            let tree = std::cell::RefCell::new(ContinualSpectral::init_spectral(&config, horizon)?);
            out["horizon"] = json!(tree.borrow().horizon());
            out["node_params"] = to_json(tree.borrow().node_params());
            run(
                &mut |chunk| tree.borrow_mut().step_batch(chunk).map(|_| ()),
                &mut |tau, prefix| {
                    let t = tree.borrow();
                    Ok(match t.query(tau) {
                        Ok(f) => {
                            let r = evaluate_spectral(prefix, &f, t.node_params(), t.sketcher().plan(), zc)?;
                            json!({ "epoch": tau, "sigma": f.sigma, "spectral_error": r.spectral_error, "delta_k": r.delta_k })
                        }
                        Err(Error::EmptyBasis) => json!({ "epoch": tau, "empty": true }),
                        Err(e) => return Err(e),
                    })
                },
            )?;
        }
        Algorithm::Lowspace => {
            let tree = std::cell::RefCell::new(ContinualLowSpace::init_lowspace(&config, horizon)?);
            out["horizon"] = json!(tree.borrow().horizon());
            out["node_params"] = to_json(tree.borrow().node_params());
            run(
                &mut |chunk| tree.borrow_mut().step_batch(chunk).map(|_| ()),
                &mut |tau, prefix| {
                    let t = tree.borrow();
                    Ok(match t.query(tau) {
                        Ok(f) => {
                            let r = evaluate_lowspace(prefix, &f, t.node_params(), t.sketcher().plan(), zc)?;
                            json!({ "epoch": tau, "sigma": f.padded.sigma, "spectral_error": r.spectral_error, "restricted_error": r.restricted_error, "delta_k": r.delta_k })
                        }
                        Err(Error::EmptyBasis) => json!({ "epoch": tau, "empty": true }),
                        Err(e) => return Err(e),
                    })
                },
            )?;
        }
    }
    out["queries"] = Value::Array(queries);
    Ok(out)
}

fn sensitivity(a: SensitivityArgs) -> Result<Value> {
    // Planned sizes are only defaults; the check itself needs no t <= v.
    let plan = plan_dimensions(a.k, a.alpha, a.delta, 1.0, 1.0)?.capped_to(a.m.next_power_of_two());
    let cfg = SensitivityConfig {
        m: a.m,
        n: a.n,
        t: a.t.unwrap_or(plan.t),
        v: a.v.unwrap_or(plan.v),
        alpha: a.alpha,
        delta: a.delta,
        trials: a.trials,
        seed: a.seed,
    };
    Ok(to_json(&sensitivity_check(&cfg)?))
}
