use std::fs;
use std::path::Path;
use std::process::ExitCode;

use higgins_core::covgraph::{build_core, complete_graph, CoverError};
use higgins_core::higgins::HigginsError;
use higgins_core::kurosh::{kurosh_decompose, KuroshDecomposition};
use higgins_core::schema::{BoundsSpec, InputError, LoadedSystem, SystemFile};
use higgins_core::{conjecture_decompose, verify_certificate, ConjectureCertificate, ConjectureError, VerifyError};
use serde::Serialize;
use thiserror::Error;

use crate::BoundFlags;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("bound exceeded: {0}")]
    Bound(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Failed(_) => 1,
            CliError::Bound(_) => 2,
            CliError::Input(_) => 3,
        })
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CoverError> for CliError {
    fn from(e: CoverError) -> Self {
        match e {
            CoverError::IndexBoundExceeded(n) => CliError::Bound(format!("more than {n} cosets (--max-cosets); IndexBoundExceeded")),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<ConjectureError> for CliError {
    fn from(e: ConjectureError) -> Self {
        match e {
            ConjectureError::Cover(c) => c.into(),
            ConjectureError::Word(w) => CliError::Input(w.to_string()),
            ConjectureError::ThetaNotSurjectiveOntoB => CliError::Input(e.to_string()),
            ConjectureError::Tree(t @ HigginsError::TreeBoundExceeded { .. }) => {
                CliError::Bound(format!("{t} (--tree-word-bound); TreeBoundExceeded"))
            }
            ConjectureError::RetriesExhausted { ref last, .. } if matches!(**last, ConjectureError::Tree(_)) => {
                CliError::Bound(format!("{e} (--tree-retries)"))
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Cover(c) => c.into(),
            VerifyError::MalformedCertificate(_) => CliError::Input(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn file_and_bounds(path: &Path, flags: BoundFlags) -> Result<(SystemFile, BoundsSpec), CliError> {
    let file = SystemFile::from_json(&read(path)?)?;
    let over = BoundsSpec {
        max_cosets: flags.max_cosets,
        tree_word_bound: flags.tree_word_bound,
        tree_retries: flags.tree_retries,
        free_test_len: flags.free_test_len,
    };
    let bounds = file.bounds.unwrap_or_default().overridden_by(over);
    Ok((file, bounds))
}

fn load(path: &Path, flags: BoundFlags) -> Result<(LoadedSystem, BoundsSpec), CliError> {
    let (file, bounds) = file_and_bounds(path, flags)?;
    Ok((file.load()?, bounds))
}

pub fn decompose(input: &Path, output: Option<&Path>, report_path: Option<&Path>, dot: Option<&Path>, flags: BoundFlags) -> Result<ExitCode, CliError> {
    let (loaded, limits) = load(input, flags)?;
    let sys = &loaded.system;
    let bounds = limits.bounds();
    if let Some(d) = dot {
        let g = complete_graph(sys.g(), &build_core(sys.g(), &loaded.subgroup), bounds.max_cosets)?;
        write_or_print(Some(d), &g.to_dot())?;
    }
    let cert = conjecture_decompose(sys, &loaded.subgroup, &bounds)?;
    let report = verify_certificate(sys, &loaded.subgroup, &cert, &limits.verify_params(flags.seed))?;
    write_or_print(output, &cert.to_json())?;
    if let Some(r) = report_path {
        write_or_print(Some(r), &report.to_json())?;
    }
    // keep stdout for the certificate when it goes there
    if output.is_some() {
        print!("{}", report.to_text());
    } else {
        eprint!("{}", report.to_text());
    }
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(CliError::Failed("certificate failed verification".into()))
    }
}

#[derive(Serialize)]
struct KuroshOutput<'a> {
    index: usize,
    #[serde(flatten)]
    decomposition: &'a KuroshDecomposition,
}

pub fn kurosh(input: &Path, output: Option<&Path>, flags: BoundFlags) -> Result<ExitCode, CliError> {
    let (file, limits) = file_and_bounds(input, flags)?;
    let fp = file.free_product()?;
    let gens = file.subgroup_words(&fp)?;
    let graph = complete_graph(&fp, &build_core(&fp, &gens), limits.bounds().max_cosets)?;
    let d = kurosh_decompose(&fp, &graph).map_err(|e| CliError::Failed(e.to_string()))?;
    let out = KuroshOutput {
        index: graph.vertex_count(),
        decomposition: &d,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("decomposition serializes");
    text.push('\n');
    write_or_print(output, &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn verify(system: &Path, certificate: &Path, output: Option<&Path>, json: bool, flags: BoundFlags) -> Result<ExitCode, CliError> {
    let (loaded, limits) = load(system, flags)?;
    let cert = ConjectureCertificate::from_json(&read(certificate)?).map_err(|e| CliError::Input(format!("{}: {e}", certificate.display())))?;
    let report = verify_certificate(&loaded.system, &loaded.subgroup, &cert, &limits.verify_params(flags.seed))?;
    let text = if json { report.to_json() } else { report.to_text() };
    write_or_print(output, &text)?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(CliError::Failed("certificate failed verification".into()))
    }
}

pub fn graph(input: &Path, core_only: bool, output: Option<&Path>, flags: BoundFlags) -> Result<ExitCode, CliError> {
    let (file, limits) = file_and_bounds(input, flags)?;
    let fp = file.free_product()?;
    let gens = file.subgroup_words(&fp)?;
    let core = build_core(&fp, &gens);
    let g = if core_only { core } else { complete_graph(&fp, &core, limits.bounds().max_cosets)? };
    write_or_print(output, &g.to_dot())?;
    Ok(ExitCode::SUCCESS)
}

pub fn normalform(system: &Path, word: &str) -> Result<ExitCode, CliError> {
    let file = SystemFile::from_json(&read(system)?)?;
    let fp = file.free_product()?;
    let w = SystemFile::parse_word(&fp, word)?;
    println!("{w}");
    Ok(ExitCode::SUCCESS)
}

pub fn member(system: &Path, word: &str) -> Result<ExitCode, CliError> {
    let file = SystemFile::from_json(&read(system)?)?;
    let fp = file.free_product()?;
    let gens = file.subgroup_words(&fp)?;
    let w = SystemFile::parse_word(&fp, word)?;
    println!("{}", build_core(&fp, &gens).membership(&w));
    Ok(ExitCode::SUCCESS)
}
