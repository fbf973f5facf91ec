use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chk_core::cartan::{cartan_invariant, triple_geometry, BoundaryTriple, TripleGeometry, DEFAULT_TOL_ANGLE};
use chk_core::corpus::{self, CorpusKind, CORPUS_TOL};
use chk_core::elements::{classify, normalize_loxodromic, ElementError, ElementKind};
use chk_core::engine::{classify_group, Report, Verdict};
use chk_core::hermitian::{verify_inverse_identities, BoundaryPoint, FormError, IdentityResidual, DEFAULT_TOL_NULL};
use chk_core::json::{self, MatrixRepr, ScalarRepr, VectorRepr};
use chk_core::linalg::CMatrix4;
use chk_core::tracefield::{trace_reality_report_parallel, TraceReport};
use chk_core::{AnalysisConfig, GroupElement, Letter, Word};
use clap::{Args, Parser, Subcommand};
use log::{debug, info};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "chk", version, about = "Real-trace certification for subgroups of SU(3,1)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a generated group conjugates into SO(3,1) or SU(1,1)xSU(2).
    Classify {
        /// JSON array of 4x4 complex matrices.
        #[arg(long)]
        generators: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a single element and give its normal form when loxodromic.
    Element {
        /// JSON 4x4 complex matrix.
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cartan angular invariant of three boundary points.
    Cartan {
        /// JSON array of three null vectors.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL_ANGLE)]
        tol_angle: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest imaginary trace part over all words up to the length bound.
    Trace {
        #[arg(long)]
        generators: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residuals of the twenty entrywise identities behind B B^-1 = B^-1 B = I.
    Identities {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write seeded generator files with known ground truth.
    GenCorpus {
        /// real_form, product_form or generic.
        #[arg(long)]
        kind: CorpusKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON file with analysis settings; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_word_len: Option<usize>,
    #[arg(long)]
    tol_form: Option<f64>,
    #[arg(long)]
    tol_real: Option<f64>,
    #[arg(long)]
    tol_corner: Option<f64>,
    #[arg(long)]
    tol_rel: Option<f64>,
    #[arg(long)]
    tol_spec: Option<f64>,
    #[arg(long)]
    tol_certify: Option<f64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<AnalysisConfig, String> {
        let mut config = match &self.config {
            Some(path) => serde_json::from_str(&read(path)?)
                .map_err(|e| format!("{}: invalid config: {e}", path.display()))?,
            None => AnalysisConfig::default(),
        };
        let overrides = [
            (&mut config.tol_form, self.tol_form),
            (&mut config.tol_real, self.tol_real),
            (&mut config.tol_corner, self.tol_corner),
            (&mut config.tol_rel, self.tol_rel),
            (&mut config.tol_spec, self.tol_spec),
            (&mut config.tol_certify, self.tol_certify),
        ];
        for (slot, value) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if let Some(n) = self.max_word_len {
            config.max_word_length = n;
        }
        if let Some(b) = self.budget {
            config.budget = b;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        config.validate()?;
        Ok(config)
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn certify_generator(m: CMatrix4, index: usize, tol: f64) -> Result<GroupElement, String> {
    GroupElement::certify(m, Word::single(Letter::generator(index)), tol).map_err(|e| match e {
        FormError::NotInGroup { residual, tol } => {
            format!("generator {index} is not in SU(3,1): residual {residual:e} exceeds {tol:e}")
        }
        other => format!("generator {index}: {other}"),
    })
}

fn load_generators(path: &Path, tol: f64) -> Result<Vec<GroupElement>, String> {
    let matrices = json::parse_matrix_list(&read(path)?)
        .map_err(|e| format!("{}: expected a JSON array of 4x4 [re, im] matrices: {e}", path.display()))?;
    if matrices.is_empty() {
        return Err(format!("{}: no generators", path.display()));
    }
    matrices
        .into_iter()
        .enumerate()
        .map(|(i, m)| certify_generator(m, i, tol))
        .collect()
}

fn load_element(path: &Path, tol: f64) -> Result<GroupElement, String> {
    let m = json::parse_matrix(&read(path)?)
        .map_err(|e| format!("{}: expected a 4x4 [re, im] matrix: {e}", path.display()))?;
    certify_generator(m, 0, tol)
}

fn run_classify(generators: &Path, config: &ConfigArgs, out: Option<&Path>) -> Result<ExitCode, String> {
    let config = config.resolve()?;
    let gens = load_generators(generators, config.tol_form)?;
    info!("classifying {} generators up to length {}", gens.len(), config.max_word_length);
    let result = classify_group(&gens, &config);
    for stage in &result.stages {
        debug!("{}: {:?} {:?} {:?}", stage.name, stage.status, stage.residual, stage.detail);
    }
    emit(&Report::new(&result, &config), out)?;
    Ok(match result.verdict {
        Verdict::Inconclusive => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

#[derive(Serialize)]
struct ElementReport {
    #[serde(rename = "type")]
    kind: ElementKind,
    trace: ScalarRepr,
    fixed_points: Vec<VectorRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interior_witness: Option<VectorRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conjugator: Option<MatrixRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normal_form_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normal_form_error: Option<String>,
}

fn run_element(matrix: &Path, config: &ConfigArgs, out: Option<&Path>) -> Result<ExitCode, String> {
    let config = config.resolve()?;
    let a = load_element(matrix, config.tol_form)?;
    let kind = classify(&a, config.tol_spec).map_err(|e| e.to_string())?;
    let mut report = ElementReport {
        kind: kind.kind,
        trace: json::scalar_repr(a.trace()),
        fixed_points: kind.fixed_points.iter().map(|p| json::vector_repr(p.lift())).collect(),
        interior_witness: kind.interior_witness.as_ref().map(json::vector_repr),
        u: None,
        theta: None,
        conjugator: None,
        normal_form_residual: None,
        normal_form_error: None,
    };
    if kind.kind == ElementKind::Loxodromic {
        match normalize_loxodromic(&a, config.tol_real) {
            Ok(nf) => {
                report.u = Some(nf.u);
                report.theta = Some(nf.theta);
                report.conjugator = Some(json::matrix_repr(nf.conjugator.matrix()));
                report.normal_form_residual = Some(nf.residual);
            }
            Err(e @ (ElementError::NotRealTrace { .. } | ElementError::NegativeDilation { .. })) => {
                report.normal_form_error = Some(e.to_string());
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    emit(&report, out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CartanReport {
    invariant: f64,
    geometry: TripleGeometry,
}

fn run_cartan(points: &Path, tol_angle: f64, out: Option<&Path>) -> Result<ExitCode, String> {
    let vectors = json::parse_vector_list(&read(points)?)
        .map_err(|e| format!("{}: expected a JSON array of 4-vectors: {e}", points.display()))?;
    if vectors.len() != 3 {
        return Err(format!("expected 3 points, got {}", vectors.len()));
    }
    let boundary: Vec<BoundaryPoint> = vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| BoundaryPoint::from_lift(v, DEFAULT_TOL_NULL).map_err(|e| format!("point {}: {e}", i + 1)))
        .collect::<Result<_, _>>()?;
    let triple = BoundaryTriple::new(boundary[0], boundary[1], boundary[2]).map_err(|e| e.to_string())?;
    emit(
        &CartanReport {
            invariant: cartan_invariant(&triple),
            geometry: triple_geometry(&triple, tol_angle),
        },
        out,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn run_trace(generators: &Path, config: &ConfigArgs, jobs: usize, out: Option<&Path>) -> Result<ExitCode, String> {
    let config = config.resolve()?;
    let gens = load_generators(generators, config.tol_form)?;
    let report: TraceReport =
        trace_reality_report_parallel(&gens, config.max_word_length, config.tol_real, config.budget, jobs.max(1))
            .map_err(|e| e.to_string())?;
    emit(&report, out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct IdentityReport {
    membership_residual: f64,
    identities: Vec<IdentityResidual>,
}

fn run_identities(matrix: &Path, out: Option<&Path>) -> Result<ExitCode, String> {
    let m = json::parse_matrix(&read(matrix)?)
        .map_err(|e| format!("{}: expected a 4x4 [re, im] matrix: {e}", matrix.display()))?;
    emit(
        &IdentityReport {
            membership_residual: chk_core::hermitian::membership_residual(&m),
            identities: verify_inverse_identities(&m),
        },
        out,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    kind: CorpusKind,
    seed: u64,
    expected: Verdict,
}

fn expected_verdict(kind: CorpusKind) -> Verdict {
    match kind {
        CorpusKind::RealForm => Verdict::RealForm,
        CorpusKind::ProductForm => Verdict::CompactProductForm,
        CorpusKind::Generic => Verdict::NotRealTrace,
    }
}

fn run_gen_corpus(kind: CorpusKind, seed: u64, count: u64, out: &Path) -> Result<ExitCode, String> {
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let mut manifest = Vec::new();
    for s in (0..count).map(|i| seed + i) {
        let corpus = corpus::generate(kind, s);
        let matrices: Vec<CMatrix4> = corpus.generators.iter().map(|g| *g.matrix()).collect();
        let name = format!("{kind}_{s}.json");
        let text = json::matrix_list_to_string(&matrices);
        for (i, m) in json::parse_matrix_list(&text).map_err(|e| e.to_string())?.into_iter().enumerate() {
            certify_generator(m, i, CORPUS_TOL)?;
        }
        fs::write(out.join(&name), text + "\n").map_err(|e| format!("{name}: {e}"))?;
        println!("{}", out.join(&name).display());
        manifest.push(ManifestEntry {
            file: name,
            kind,
            seed: s,
            expected: expected_verdict(kind),
        });
    }
    emit(&manifest, Some(&out.join(format!("{kind}_manifest.json"))))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CHK_LOG", "warn")).init();
    // Usage errors share exit code 1 with other input errors; 2 is reserved
    // for inconclusive classifications.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Classify { generators, config, out } => run_classify(generators, config, out.as_deref()),
        Command::Element { matrix, config, out } => run_element(matrix, config, out.as_deref()),
        Command::Cartan { points, tol_angle, out } => run_cartan(points, *tol_angle, out.as_deref()),
        Command::Trace { generators, config, jobs, out } => run_trace(generators, config, *jobs, out.as_deref()),
        Command::Identities { matrix, out } => run_identities(matrix, out.as_deref()),
        Command::GenCorpus { kind, seed, count, out } => run_gen_corpus(*kind, *seed, *count, out),
    };
    outcome.unwrap_or_else(|message| {
        eprintln!("error: {message}");
        ExitCode::from(1)
    })
}
