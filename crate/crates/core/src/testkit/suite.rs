use std::fmt;

use rayon::prelude::*;

use super::generate::Category;
use super::{
    addressed_offsets, compare, for_each_coord, generate_case, oracle_contract, pack, pack_offsets,
    CompareMode, PackedTensor, StridedTensor, TestCase, TestElement,
};
use crate::kernel::{contract_views, TensorMut};
use crate::layout::{contiguous_increments, TensorView};
use crate::plan::ContractionSpec;

/// A failed check, with enough context to regenerate the case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseFailure {
    pub category: Category,
    pub seed: u64,
    pub detail: String,
}

impl fmt::Display for CaseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "category {:?} seed {}: {}",
            self.category.name(),
            self.seed,
            self.detail
        )
    }
}

impl std::error::Error for CaseFailure {}

fn fail<T>(case: &TestCase<T>, detail: impl Into<String>) -> CaseFailure {
    CaseFailure {
        category: case.category,
        seed: case.seed,
        detail: detail.into(),
    }
}

/// Runs the kernel on the case's buffers, returning the output buffer.
pub fn run_contraction<T: TestElement>(
    a: &StridedTensor<T>,
    b: &StridedTensor<T>,
    spec: &ContractionSpec,
    c: &StridedTensor<T>,
) -> Result<Vec<T>, String> {
    let mut out = c.data.clone();
    contract_views(
        &a.view,
        &a.data,
        &b.view,
        &b.data,
        spec,
        &c.view.increments,
        TensorMut::new(&mut out, c.view.base_offset),
    )
    .map_err(|e| format!("kernel rejected arguments: {e}"))?;
    Ok(out)
}

fn untouched_outside_view<T: TestElement>(
    offsets: &[usize],
    before: &[T],
    after: &[T],
) -> Result<(), String> {
    let mut inside = vec![false; before.len()];
    for &i in offsets {
        inside[i] = true;
    }
    match (0..before.len()).find(|&i| !inside[i] && !before[i].bits_eq(after[i])) {
        None => Ok(()),
        Some(i) => Err(format!(
            "element {i} outside the output view changed from {} to {}",
            before[i].display(),
            after[i].display()
        )),
    }
}

fn oracle_for<T: TestElement>(
    case: &TestCase<T>,
    spec: &ContractionSpec,
) -> Result<PackedTensor<T>, String> {
    oracle_contract(
        &pack(&case.a.view, &case.a.data),
        &pack(&case.b.view, &case.b.data),
        spec,
    )
    .map_err(|e| format!("oracle rejected arguments: {e}"))
}

/// Kernel against oracle for one case, plus the extra checks its category
/// calls for (swapped operands, rotated output permutations).
pub fn check_case<T: TestElement>(
    case: &TestCase<T>,
    mode: CompareMode,
) -> Result<(), CaseFailure> {
    let out = run_contraction(&case.a, &case.b, &case.spec, &case.c).map_err(|e| fail(case, e))?;
    let offsets = addressed_offsets(&case.c.view);
    untouched_outside_view(&offsets, &case.c.data, &out).map_err(|e| fail(case, e))?;
    let got = pack_offsets(&case.c.view, &offsets, &out);
    let expected = oracle_for(case, &case.spec).map_err(|e| fail(case, e))?;
    compare(&got, &expected, mode).map_err(|e| fail(case, format!("kernel vs oracle: {e}")))?;

    match case.category {
        Category::Commutativity => check_commutativity(case, &out),
        Category::Permutations => check_permutations(case, mode),
        _ => Ok(()),
    }
}

/// Swapping A and B (with the spec remapped) must give a bitwise-identical
/// output buffer.
fn check_commutativity<T: TestElement>(case: &TestCase<T>, out: &[T]) -> Result<(), CaseFailure> {
    let swapped = case.spec.swapped(case.a.view.rank());
    let out_swapped =
        run_contraction(&case.b, &case.a, &swapped, &case.c).map_err(|e| fail(case, e))?;
    let lhs = PackedTensor::new(vec![out.len()], out.to_vec());
    let rhs = PackedTensor::new(vec![out.len()], out_swapped);
    compare(&rhs, &lhs, CompareMode::Exact)
        .map_err(|e| fail(case, format!("swapped operands differ: {e}")))
}

/// Runs the case once per cyclic left shift of the output permutation. Each
/// run must match the oracle, and must equal the baseline output relabeled
/// by the same shift.
pub fn check_permutations<T: TestElement>(
    case: &TestCase<T>,
    mode: CompareMode,
) -> Result<(), CaseFailure> {
    let n = case.rank_c();
    let base_out =
        run_contraction(&case.a, &case.b, &case.spec, &case.c).map_err(|e| fail(case, e))?;
    let baseline = pack(&case.c.view, &base_out);

    for shift in 1..n {
        let spec = case.spec.with_rotated_perm(shift);
        // Output dimension d of the baseline becomes dimension (d - shift) mod n.
        let relabel = |d: usize| (d + n - shift) % n;
        let mut ext = vec![0; n];
        for (d, &e) in baseline.extents.iter().enumerate() {
            ext[relabel(d)] = e;
        }
        let c = StridedTensor {
            view: TensorView::contiguous(&ext),
            data: vec![T::zero(); ext.iter().product::<usize>().max(1)],
        };
        let out = run_contraction(&case.a, &case.b, &spec, &c).map_err(|e| fail(case, e))?;
        let got = pack(&c.view, &out);

        let expected = oracle_for(case, &spec).map_err(|e| fail(case, e))?;
        compare(&got, &expected, mode)
            .map_err(|e| fail(case, format!("shift {shift}: kernel vs oracle: {e}")))?;

        let mut moved = vec![0; n];
        let mut mismatch = None;
        for_each_coord(&baseline.extents, |coords| {
            for d in 0..n {
                moved[relabel(d)] = coords[d];
            }
            if mismatch.is_none() && !got.get(&moved).bits_eq(*baseline.get(coords)) {
                mismatch = Some(format!(
                    "shift {shift}: C{moved:?} differs from baseline C{coords:?}"
                ));
            }
        });
        if let Some(detail) = mismatch {
            return Err(fail(case, detail));
        }
    }
    Ok(())
}

/// The strided run must equal a run on packed copies of the inputs, and must
/// leave the output buffer unchanged outside the view.
pub fn check_stride_independence<T: TestElement>(case: &TestCase<T>) -> Result<(), CaseFailure> {
    let out = run_contraction(&case.a, &case.b, &case.spec, &case.c).map_err(|e| fail(case, e))?;
    let offsets = addressed_offsets(&case.c.view);
    untouched_outside_view(&offsets, &case.c.data, &out).map_err(|e| fail(case, e))?;

    let packed = |t: &StridedTensor<T>| {
        let p = pack(&t.view, &t.data);
        StridedTensor {
            view: p.view(),
            data: if p.data.is_empty() {
                vec![T::zero()]
            } else {
                p.data
            },
        }
    };
    let ext_c = &case.c.view.extents;
    let c = StridedTensor {
        view: TensorView::new(
            ext_c.clone(),
            contiguous_increments(ext_c),
            0,
            ext_c.iter().product::<usize>().max(1),
        ),
        data: vec![T::zero(); ext_c.iter().product::<usize>().max(1)],
    };
    let packed_out = run_contraction(&packed(&case.a), &packed(&case.b), &case.spec, &c)
        .map_err(|e| fail(case, e))?;
    compare(
        &pack_offsets(&case.c.view, &offsets, &out),
        &pack(&c.view, &packed_out),
        CompareMode::Exact,
    )
    .map_err(|e| fail(case, format!("strided vs packed: {e}")))
}

/// A second run without re-zeroing must double every output element.
pub fn check_accumulation<T: TestElement>(case: &TestCase<T>) -> Result<(), CaseFailure> {
    let once = run_contraction(&case.a, &case.b, &case.spec, &case.c).map_err(|e| fail(case, e))?;
    let first = StridedTensor {
        view: case.c.view.clone(),
        data: once,
    };
    let twice = run_contraction(&case.a, &case.b, &case.spec, &first).map_err(|e| fail(case, e))?;
    let single = pack(&case.c.view, &first.data);
    let doubled = PackedTensor::new(
        single.extents.clone(),
        single.data.iter().map(|&v| v + v).collect(),
    );
    compare(&pack(&case.c.view, &twice), &doubled, CompareMode::Exact)
        .map_err(|e| fail(case, format!("second run: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryReport {
    pub category: Category,
    pub passed: usize,
    pub failures: Vec<CaseFailure>,
}

impl CategoryReport {
    pub fn total(&self) -> usize {
        self.passed + self.failures.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    /// One entry per requested category, in request order.
    pub categories: Vec<CategoryReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.categories.iter().map(|c| c.passed).sum()
    }

    pub fn failed(&self) -> usize {
        self.categories.iter().map(|c| c.failures.len()).sum()
    }

    pub fn is_success(&self) -> bool {
        self.failed() == 0
    }

    pub fn first_failure(&self) -> Option<&CaseFailure> {
        self.categories.iter().flat_map(|c| &c.failures).next()
    }
}

/// Case `j` of a category uses seed `seed + j`.
pub fn case_seed(seed: u64, j: usize) -> u64 {
    seed.wrapping_add(j as u64)
}

/// Generates `cases` cases per category and checks each exactly against the
/// oracle. Cases run in parallel; the report order follows `categories`.
pub fn run_suite<T: TestElement>(categories: &[Category], cases: usize, seed: u64) -> SuiteReport {
    let reports = categories
        .par_iter()
        .map(|&category| {
            let results: Vec<Result<(), CaseFailure>> = (0..cases)
                .into_par_iter()
                .map(|j| {
                    let case = generate_case::<T>(category, case_seed(seed, j));
                    check_case(&case, CompareMode::Exact)
                })
                .collect();
            let failures: Vec<CaseFailure> = results.into_iter().filter_map(Result::err).collect();
            CategoryReport {
                category,
                passed: cases - failures.len(),
                failures,
            }
        })
        .collect();
    SuiteReport {
        categories: reports,
    }
}
