use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use gett::testkit::{generate_case, run_suite, Category, SuiteReport};
use gett::{
    build_plan, checked_extents, contiguous_increments, contract, footprint, gett, ContractionSpec,
    Element, Operand, OutputPlacement, TensorMut, TensorRef, TensorView, ValidationErrors,
};
use thiserror::Error;

use crate::format::{read_tensor, write_tensor, ReadError, TensorData, TensorFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation failed: {}\n{}", .0.codes().join(", "), .0)]
    Validation(ValidationErrors),
    /// Argument problems found before the library sees the call.
    #[error("validation failed: {0}")]
    Invalid(String),
    #[error("{0}")]
    Verification(String),
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("{}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Invalid(_) | CliError::Verification(_) => 1,
            CliError::Read(_) | CliError::Write { .. } | CliError::Usage(_) => 2,
        }
    }
}

impl From<ValidationErrors> for CliError {
    fn from(e: ValidationErrors) -> Self {
        CliError::Validation(e)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a comma-separated list; the empty string is the empty list.
pub fn parse_list<N: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<N>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--{flag}: cannot parse {t:?}")))
        })
        .collect()
}

/// Arguments of `run`, as given on the command line.
#[derive(Debug, Clone)]
pub struct RunArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    pub out: PathBuf,
    pub conts: usize,
    pub cont_a: Vec<usize>,
    pub cont_b: Vec<usize>,
    pub perm: Vec<usize>,
    pub out_ext: Option<Vec<i64>>,
    pub out_inc: Option<Vec<isize>>,
}

/// Output extents implied by the spec: free extents of A then B, placed by
/// `perm`. Falls back to the unpermuted order when `perm` is not usable;
/// validation reports that case.
fn derived_out_extents(a: &TensorView, b: &TensorView, spec: &ContractionSpec) -> Vec<usize> {
    let free = |v: &TensorView, cont: &[usize]| -> Vec<usize> {
        (0..v.rank())
            .filter(|d| !cont.contains(d))
            .map(|d| v.extents[d])
            .collect()
    };
    let mut free_ext = free(a, &spec.cont_a);
    free_ext.extend(free(b, &spec.cont_b));
    let n = free_ext.len();
    let mut seen = vec![false; n];
    let bijective = spec.perm.len() == n
        && spec
            .perm
            .iter()
            .all(|&p| p < n && !std::mem::replace(&mut seen[p], true));
    if !bijective {
        return free_ext;
    }
    let mut ext = vec![0; n];
    for (i, &p) in spec.perm.iter().enumerate() {
        ext[p] = free_ext[i];
    }
    ext
}

#[allow(clippy::too_many_arguments)]
fn contract_files<T: Element>(
    a: &TensorFile,
    a_data: &[T],
    b: &TensorFile,
    b_data: &[T],
    spec: &ContractionSpec,
    inc_c: &[isize],
    out: &mut [T],
    out_offset: usize,
) -> Result<(), ValidationErrors> {
    gett(
        a.view.rank(),
        &a.view.extents,
        &a.view.increments,
        TensorRef::new(a_data, a.view.base_offset),
        b.view.rank(),
        &b.view.extents,
        &b.view.increments,
        TensorRef::new(b_data, b.view.base_offset),
        spec.conts,
        &spec.cont_a,
        &spec.cont_b,
        &spec.perm,
        inc_c,
        TensorMut::new(out, out_offset),
    )
    .map(|_| ())
}

/// Contracts two tensor files into a fresh output file. Nothing is written
/// unless the contraction succeeds.
pub fn run(args: &RunArgs) -> Result<TensorFile, CliError> {
    let a = read_tensor(&args.a)?;
    let b = read_tensor(&args.b)?;
    if a.dtype() != b.dtype() {
        return Err(CliError::Invalid(format!(
            "DtypeMismatch: A holds {}, B holds {}",
            a.dtype().prefix(),
            b.dtype().prefix()
        )));
    }
    let spec = ContractionSpec {
        conts: args.conts,
        cont_a: args.cont_a.clone(),
        cont_b: args.cont_b.clone(),
        perm: args.perm.clone(),
    };

    let derived = derived_out_extents(&a.view, &b.view, &spec);
    let requested = match &args.out_ext {
        Some(raw) => Some(checked_extents(Operand::C, raw)?),
        None => None,
    };
    let ext_c = requested.clone().unwrap_or_else(|| derived.clone());
    let inc_c = args
        .out_inc
        .clone()
        .unwrap_or_else(|| contiguous_increments(&ext_c));

    let (base, len) = if inc_c.len() == ext_c.len() {
        let fp = footprint(&ext_c, &inc_c);
        if fp.empty {
            (0, 1)
        } else {
            ((-fp.min) as usize, (fp.max - fp.min) as usize + 1)
        }
    } else {
        (0, 1)
    };

    let mut c = TensorData::zeros(a.dtype(), len);
    let result = match (&a.data, &b.data, &mut c) {
        (TensorData::S(x), TensorData::S(y), TensorData::S(z)) => {
            contract_files(&a, x, &b, y, &spec, &inc_c, z, base)
        }
        (TensorData::D(x), TensorData::D(y), TensorData::D(z)) => {
            contract_files(&a, x, &b, y, &spec, &inc_c, z, base)
        }
        (TensorData::C(x), TensorData::C(y), TensorData::C(z)) => {
            contract_files(&a, x, &b, y, &spec, &inc_c, z, base)
        }
        (TensorData::Z(x), TensorData::Z(y), TensorData::Z(z)) => {
            contract_files(&a, x, &b, y, &spec, &inc_c, z, base)
        }
        _ => unreachable!("element types checked above"),
    };
    result?;

    if let Some(requested) = requested {
        if requested != derived {
            return Err(CliError::Invalid(format!(
                "OutExtentMismatch: --out-ext {requested:?} but the contraction yields {derived:?}"
            )));
        }
    }

    let out = TensorFile::new(TensorView::new(ext_c, inc_c, base, len), c);
    write_tensor(&args.out, &out).map_err(|source| CliError::Write {
        path: args.out.clone(),
        source,
    })?;
    Ok(out)
}

/// Runs the generated suite in double precision and writes the per-category
/// report. Categories appear in the order given.
pub fn verify(
    categories: &[Category],
    cases: usize,
    seed: u64,
    out: &mut impl Write,
) -> Result<SuiteReport, CliError> {
    let start = Instant::now();
    let report = run_suite::<f64>(categories, cases, seed);
    let elapsed = start.elapsed();
    let io = |e: std::io::Error| CliError::Usage(format!("writing report: {e}"));
    for c in &report.categories {
        writeln!(
            out,
            "{:<40} {:>6}/{}",
            c.category.name(),
            c.passed,
            c.total()
        )
        .map_err(io)?;
    }
    writeln!(
        out,
        "{} of {} cases passed ({} categories, seed {seed}) in {elapsed:.2?}",
        report.passed(),
        report.passed() + report.failed(),
        categories.len()
    )
    .map_err(io)?;
    if report.is_success() {
        return Ok(report);
    }
    let mut msg = format!("{} cases disagree with the oracle", report.failed());
    for f in report.categories.iter().flat_map(|c| &c.failures).take(10) {
        let _ = write!(msg, "\n  {f}");
    }
    Err(CliError::Verification(msg))
}

/// Resolves `--suite`: a category name or `all`.
pub fn suite_categories(name: &str) -> Result<Vec<Category>, CliError> {
    if name.trim().eq_ignore_ascii_case("all") {
        return Ok(Category::ALL.to_vec());
    }
    name.parse::<Category>()
        .map(|c| vec![c])
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn list<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Writes `a.tns`, `b.tns` and `spec.txt` for one generated case.
pub fn gen(category: Category, seed: u64, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let case = generate_case::<f64>(category, seed);
    for (name, t) in [("a.tns", &case.a), ("b.tns", &case.b)] {
        let path = dir.join(name);
        write_tensor(&path, &TensorFile::new(t.view.clone(), t.data.clone()))
            .map_err(|source| CliError::Write { path, source })?;
    }
    let spec = format!(
        "category: {}\nseed: {seed}\nconts: {}\ncont-a: {}\ncont-b: {}\nperm: {}\nout-ext: {}\nout-inc: {}\n",
        category.name(),
        case.spec.conts,
        list(&case.spec.cont_a),
        list(&case.spec.cont_b),
        list(&case.spec.perm),
        list(&case.c.view.extents),
        list(&case.c.view.increments),
    );
    write_file(&dir.join("spec.txt"), &spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub multiply_adds: usize,
    pub output_elements: usize,
    pub median: Duration,
}

impl BenchReport {
    pub fn multiply_adds_per_sec(&self) -> f64 {
        self.multiply_adds as f64 / self.median.as_secs_f64()
    }

    pub fn elements_per_sec(&self) -> f64 {
        self.output_elements as f64 / self.median.as_secs_f64()
    }
}

/// Times the kernel on two rank-`rank` hypercubes of side `extent`,
/// contracting their first `conts` dimensions pairwise.
pub fn bench(
    rank: usize,
    extent: usize,
    conts: usize,
    reps: usize,
) -> Result<BenchReport, CliError> {
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let size = u32::try_from(rank)
        .ok()
        .and_then(|r| extent.checked_pow(r))
        .ok_or_else(|| CliError::Usage("tensor size overflows".into()))?;
    let ext = vec![extent; rank];
    let view = TensorView::contiguous(&ext);
    let free = (2 * rank).saturating_sub(2 * conts);
    let spec = ContractionSpec::new(
        (0..conts).collect(),
        (0..conts).collect(),
        (0..free).collect(),
    );
    let out_len = free_len(extent, free)?;
    let inc_c = contiguous_increments(&vec![extent; free]);
    let plan = build_plan(
        &view,
        &view,
        &spec,
        &inc_c,
        &OutputPlacement {
            base_offset: 0,
            buffer_len: out_len.max(1),
        },
    )?;

    let a: Vec<f64> = (0..size).map(|i| (i % 7) as f64 - 3.0).collect();
    let b: Vec<f64> = (0..size).map(|i| (i % 5) as f64 - 2.0).collect();
    let mut c = vec![0.0; out_len.max(1)];
    let mut times: Vec<Duration> = (0..reps)
        .map(|_| {
            c.iter_mut().for_each(|v| *v = 0.0);
            let start = Instant::now();
            contract(&plan, &a, &b, &mut c);
            start.elapsed()
        })
        .collect();
    std::hint::black_box(&c);
    times.sort();
    Ok(BenchReport {
        multiply_adds: plan.multiply_adds(),
        output_elements: plan.size_free(),
        median: times[reps / 2],
    })
}

fn free_len(extent: usize, free: usize) -> Result<usize, CliError> {
    u32::try_from(free)
        .ok()
        .and_then(|f| extent.checked_pow(f))
        .ok_or_else(|| CliError::Usage("output size overflows".into()))
}
