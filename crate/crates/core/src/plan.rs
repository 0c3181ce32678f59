//! Argument validation and the derived execution plan for one contraction.
//!
//! Free indices are numbered A's non-contracted dimensions first, in ascending
//! dimension order, then B's. `perm[i]` is the output dimension that free
//! index `i` lands on. Contracted pairs are positional: `cont_a[k]` is summed
//! against `cont_b[k]`.
//!
//! Note that `perm` maps free index to output position. The inverse reading
//! (output position to free index) is equally expressive, so callers porting
//! code that uses it must invert their array first.

use std::fmt;

use thiserror::Error;

use crate::layout::{num_elements, TensorView};

/// Which operand an error or table row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operand {
    A,
    B,
    C,
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operand::A => "A",
            Operand::B => "B",
            Operand::C => "C",
        })
    }
}

/// One violated precondition. [`ValidationError::code`] gives the stable
/// name used in reports and CLI output.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("ShapeLengthWrong: {tensor} has rank {rank} but {extents} extents and {increments} increments")]
    ShapeLengthWrong {
        tensor: Operand,
        rank: usize,
        extents: usize,
        increments: usize,
    },
    #[error("NegativeExtent: {tensor} dimension {dim} has extent {extent}")]
    NegativeExtent {
        tensor: Operand,
        dim: usize,
        extent: i64,
    },
    #[error("ContLengthWrong: {conts} contractions but {actual} contracted dimensions listed for {tensor}")]
    ContLengthWrong {
        tensor: Operand,
        conts: usize,
        actual: usize,
    },
    #[error("ContIndexOutOfRange: contraction {k} names dimension {index} of {tensor}, which has rank {rank}")]
    ContIndexOutOfRange {
        tensor: Operand,
        k: usize,
        index: usize,
        rank: usize,
    },
    #[error("ContIndexDuplicate: dimension {index} of {tensor} is contracted more than once")]
    ContIndexDuplicate { tensor: Operand, index: usize },
    #[error("ExtentMismatch: contraction {k} pairs extent {ext_a} (A) with {ext_b} (B)")]
    ExtentMismatch {
        k: usize,
        ext_a: usize,
        ext_b: usize,
    },
    #[error("PermLengthWrong: expected {expected} entries, got {actual}")]
    PermLengthWrong { expected: i64, actual: usize },
    #[error("PermNotBijection: entry {position} maps to output dimension {target}, which is out of range or already taken")]
    PermNotBijection { position: usize, target: usize },
    #[error("IncCLengthWrong: expected {expected} increments for C, got {actual}")]
    IncCLengthWrong { expected: i64, actual: usize },
    #[error("OutputWriteAliasing: C dimension {dim} has extent {extent} and increment 0")]
    OutputWriteAliasing { dim: usize, extent: usize },
    #[error("FootprintOutOfBounds: {tensor} addresses offsets {lo}..={hi} of a buffer of length {buffer_len}")]
    FootprintOutOfBounds {
        tensor: Operand,
        lo: i64,
        hi: i64,
        buffer_len: usize,
    },
}

impl ValidationError {
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::ShapeLengthWrong { .. } => "ShapeLengthWrong",
            ValidationError::NegativeExtent { .. } => "NegativeExtent",
            ValidationError::ContLengthWrong { .. } => "ContLengthWrong",
            ValidationError::ContIndexOutOfRange { .. } => "ContIndexOutOfRange",
            ValidationError::ContIndexDuplicate { .. } => "ContIndexDuplicate",
            ValidationError::ExtentMismatch { .. } => "ExtentMismatch",
            ValidationError::PermLengthWrong { .. } => "PermLengthWrong",
            ValidationError::PermNotBijection { .. } => "PermNotBijection",
            ValidationError::IncCLengthWrong { .. } => "IncCLengthWrong",
            ValidationError::OutputWriteAliasing { .. } => "OutputWriteAliasing",
            ValidationError::FootprintOutOfBounds { .. } => "FootprintOutOfBounds",
        }
    }
}

/// Non-empty list of everything wrong with a call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl ValidationErrors {
    pub fn errors(&self) -> &[ValidationError] {
        &self.0
    }

    pub fn codes(&self) -> Vec<&'static str> {
        self.0.iter().map(ValidationError::code).collect()
    }

    pub fn contains_code(&self, code: &str) -> bool {
        self.0.iter().any(|e| e.code() == code)
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

/// Parses signed extents, reporting negative ones.
pub fn checked_extents(tensor: Operand, raw: &[i64]) -> Result<Vec<usize>, ValidationErrors> {
    let errors: Vec<_> = raw
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < 0)
        .map(|(dim, &extent)| ValidationError::NegativeExtent {
            tensor,
            dim,
            extent,
        })
        .collect();
    if errors.is_empty() {
        Ok(raw.iter().map(|&e| e as usize).collect())
    } else {
        Err(ValidationErrors(errors))
    }
}

/// The contraction arguments: which dimensions pair up and where the free
/// ones go in the output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContractionSpec {
    pub conts: usize,
    pub cont_a: Vec<usize>,
    pub cont_b: Vec<usize>,
    pub perm: Vec<usize>,
}

impl ContractionSpec {
    pub fn new(cont_a: Vec<usize>, cont_b: Vec<usize>, perm: Vec<usize>) -> Self {
        ContractionSpec {
            conts: cont_a.len(),
            cont_a,
            cont_b,
            perm,
        }
    }

    /// Output rank implied by the input ranks, negative when `conts` is too
    /// large for them.
    pub fn output_rank(&self, rank_a: usize, rank_b: usize) -> i64 {
        rank_a as i64 + rank_b as i64 - 2 * self.conts as i64
    }

    /// The spec for the same contraction with A and B swapped.
    ///
    /// Each free index keeps its output position: A's free indices move behind
    /// B's in the enumeration, so `perm` is re-sliced accordingly. Applying the
    /// transform twice (with the ranks swapped back) returns the original.
    pub fn swapped(&self, rank_a: usize) -> ContractionSpec {
        let free_a = rank_a.saturating_sub(self.conts).min(self.perm.len());
        let mut perm = Vec::with_capacity(self.perm.len());
        perm.extend_from_slice(&self.perm[free_a..]);
        perm.extend_from_slice(&self.perm[..free_a]);
        ContractionSpec {
            conts: self.conts,
            cont_a: self.cont_b.clone(),
            cont_b: self.cont_a.clone(),
            perm,
        }
    }

    /// Cyclically shifts every output position `shift` places to the left:
    /// a free index previously at output dimension `p` moves to
    /// `(p - shift) mod rank_c`.
    pub fn with_rotated_perm(&self, shift: usize) -> ContractionSpec {
        let n = self.perm.len();
        let perm = if n == 0 {
            Vec::new()
        } else {
            let s = shift % n;
            self.perm.iter().map(|&p| (p + n - s) % n).collect()
        };
        ContractionSpec {
            perm,
            ..self.clone()
        }
    }
}

/// Where the output tensor starts inside its buffer. Its extents are
/// derived from the inputs, so only placement is supplied by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputPlacement {
    pub base_offset: usize,
    pub buffer_len: usize,
}

/// One output dimension and the free index that feeds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeDim {
    pub owner: Operand,
    /// Dimension of the owning input tensor.
    pub src_dim: usize,
    pub src_increment: isize,
    pub out_increment: isize,
    pub extent: usize,
}

/// One contracted pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContDim {
    pub extent: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub inc_a: isize,
    pub inc_b: isize,
}

/// Validated execution metadata, ordered for the contraction loop.
///
/// `free_table[d]` describes output dimension `d`; `cont_table[k]` describes
/// contracted pair `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionPlan {
    ext_c: Vec<usize>,
    free_table: Vec<FreeDim>,
    cont_table: Vec<ContDim>,
    cont_ext: Vec<usize>,
    size_free: usize,
    size_cont: usize,
    base: [usize; 3],
    buffer_len: [usize; 3],
}

impl ContractionPlan {
    pub fn rank_c(&self) -> usize {
        self.ext_c.len()
    }

    pub fn ext_c(&self) -> &[usize] {
        &self.ext_c
    }

    pub fn free_table(&self) -> &[FreeDim] {
        &self.free_table
    }

    pub fn cont_table(&self) -> &[ContDim] {
        &self.cont_table
    }

    /// Extents of the contracted pairs, in pair order.
    pub fn cont_ext(&self) -> &[usize] {
        &self.cont_ext
    }

    pub fn size_free(&self) -> usize {
        self.size_free
    }

    pub fn size_cont(&self) -> usize {
        self.size_cont
    }

    pub fn base_offset(&self, tensor: Operand) -> usize {
        self.base[tensor as usize]
    }

    pub fn buffer_len(&self, tensor: Operand) -> usize {
        self.buffer_len[tensor as usize]
    }

    /// Output increments in output-dimension order.
    pub fn inc_c(&self) -> Vec<isize> {
        self.free_table.iter().map(|f| f.out_increment).collect()
    }

    /// View describing the output tensor.
    pub fn output_view(&self) -> TensorView {
        TensorView::new(
            self.ext_c.clone(),
            self.inc_c(),
            self.base[Operand::C as usize],
            self.buffer_len[Operand::C as usize],
        )
    }

    /// Total multiply-adds performed by one contraction.
    pub fn multiply_adds(&self) -> usize {
        self.size_free * self.size_cont
    }
}

/// Free dimensions of a tensor: those not contracted, ascending.
fn free_dims(rank: usize, contracted: &[usize]) -> Vec<usize> {
    (0..rank).filter(|d| !contracted.contains(d)).collect()
}

fn check_cont_list(
    tensor: Operand,
    view: &TensorView,
    conts: usize,
    list: &[usize],
    errors: &mut Vec<ValidationError>,
) -> bool {
    let before = errors.len();
    if list.len() != conts {
        errors.push(ValidationError::ContLengthWrong {
            tensor,
            conts,
            actual: list.len(),
        });
    }
    let rank = view.rank();
    let mut seen = vec![false; rank];
    for (k, &index) in list.iter().enumerate() {
        if index >= rank {
            errors.push(ValidationError::ContIndexOutOfRange {
                tensor,
                k,
                index,
                rank,
            });
        } else if seen[index] {
            errors.push(ValidationError::ContIndexDuplicate { tensor, index });
        } else {
            seen[index] = true;
        }
    }
    errors.len() == before
}

fn check_footprint(tensor: Operand, view: &TensorView, errors: &mut Vec<ValidationError>) {
    if !view.fits_buffer() {
        let fp = view.footprint();
        let base = view.base_offset as i64;
        errors.push(ValidationError::FootprintOutOfBounds {
            tensor,
            lo: base + fp.min as i64,
            hi: base + fp.max as i64,
            buffer_len: view.buffer_len,
        });
    }
}

/// Checks every argument and reports all violations found.
pub fn validate(
    a: &TensorView,
    b: &TensorView,
    spec: &ContractionSpec,
    inc_c: &[isize],
    c: &OutputPlacement,
) -> Result<(), ValidationErrors> {
    check_all(a, b, spec, inc_c, c).map(|_| ())
}

/// Runs all checks; on success also returns the output extents.
fn check_all(
    a: &TensorView,
    b: &TensorView,
    spec: &ContractionSpec,
    inc_c: &[isize],
    c: &OutputPlacement,
) -> Result<Vec<usize>, ValidationErrors> {
    let mut errors = Vec::new();

    let mut shapes_ok = true;
    for (tensor, view) in [(Operand::A, a), (Operand::B, b)] {
        if view.is_consistent() {
            check_footprint(tensor, view, &mut errors);
        } else {
            shapes_ok = false;
            errors.push(ValidationError::ShapeLengthWrong {
                tensor,
                rank: view.rank(),
                extents: view.extents.len(),
                increments: view.increments.len(),
            });
        }
    }

    let conts_ok_a = check_cont_list(Operand::A, a, spec.conts, &spec.cont_a, &mut errors);
    let conts_ok_b = check_cont_list(Operand::B, b, spec.conts, &spec.cont_b, &mut errors);

    for (k, (&da, &db)) in spec.cont_a.iter().zip(&spec.cont_b).enumerate() {
        if let (Some(&ext_a), Some(&ext_b)) = (a.extents.get(da), b.extents.get(db)) {
            if ext_a != ext_b {
                errors.push(ValidationError::ExtentMismatch { k, ext_a, ext_b });
            }
        }
    }

    let rank_c = spec.output_rank(a.rank(), b.rank());
    let mut perm_ok = true;
    if spec.perm.len() as i64 != rank_c {
        perm_ok = false;
        errors.push(ValidationError::PermLengthWrong {
            expected: rank_c,
            actual: spec.perm.len(),
        });
    } else {
        let n = spec.perm.len();
        let mut taken = vec![false; n];
        for (position, &target) in spec.perm.iter().enumerate() {
            if target >= n || taken[target] {
                perm_ok = false;
                errors.push(ValidationError::PermNotBijection { position, target });
            } else {
                taken[target] = true;
            }
        }
    }

    let inc_c_ok = inc_c.len() as i64 == rank_c;
    if !inc_c_ok {
        errors.push(ValidationError::IncCLengthWrong {
            expected: rank_c,
            actual: inc_c.len(),
        });
    }

    let mut ext_c = Vec::new();
    if shapes_ok && conts_ok_a && conts_ok_b && perm_ok {
        let free_extents = free_dims(a.rank(), &spec.cont_a)
            .into_iter()
            .map(|d| a.extents[d])
            .chain(
                free_dims(b.rank(), &spec.cont_b)
                    .into_iter()
                    .map(|d| b.extents[d]),
            );
        ext_c = vec![0; spec.perm.len()];
        for (i, extent) in free_extents.enumerate() {
            ext_c[spec.perm[i]] = extent;
        }
        if inc_c_ok {
            for (dim, (&extent, &inc)) in ext_c.iter().zip(inc_c).enumerate() {
                if inc == 0 && extent > 1 {
                    errors.push(ValidationError::OutputWriteAliasing { dim, extent });
                }
            }
            let view = TensorView::new(ext_c.clone(), inc_c.to_vec(), c.base_offset, c.buffer_len);
            check_footprint(Operand::C, &view, &mut errors);
        }
    }

    if errors.is_empty() {
        Ok(ext_c)
    } else {
        Err(ValidationErrors(errors))
    }
}

/// Validates the arguments and derives the execution plan.
pub fn build_plan(
    a: &TensorView,
    b: &TensorView,
    spec: &ContractionSpec,
    inc_c: &[isize],
    c: &OutputPlacement,
) -> Result<ContractionPlan, ValidationErrors> {
    let ext_c = check_all(a, b, spec, inc_c, c)?;

    let sources = free_dims(a.rank(), &spec.cont_a)
        .into_iter()
        .map(|d| (Operand::A, d, a.increments[d]))
        .chain(
            free_dims(b.rank(), &spec.cont_b)
                .into_iter()
                .map(|d| (Operand::B, d, b.increments[d])),
        );
    let mut free_table = vec![None; ext_c.len()];
    for (i, (owner, src_dim, src_increment)) in sources.enumerate() {
        let d = spec.perm[i];
        free_table[d] = Some(FreeDim {
            owner,
            src_dim,
            src_increment,
            out_increment: inc_c[d],
            extent: ext_c[d],
        });
    }
    let free_table: Vec<FreeDim> = free_table
        .into_iter()
        .map(|row| row.expect("perm is a bijection"))
        .collect();

    let cont_table: Vec<ContDim> = spec
        .cont_a
        .iter()
        .zip(&spec.cont_b)
        .map(|(&dim_a, &dim_b)| ContDim {
            extent: a.extents[dim_a],
            dim_a,
            dim_b,
            inc_a: a.increments[dim_a],
            inc_b: b.increments[dim_b],
        })
        .collect();
    let cont_ext: Vec<usize> = cont_table.iter().map(|c| c.extent).collect();

    Ok(ContractionPlan {
        size_free: num_elements(&ext_c),
        size_cont: num_elements(&cont_ext),
        ext_c,
        free_table,
        cont_table,
        cont_ext,
        base: [a.base_offset, b.base_offset, c.base_offset],
        buffer_len: [a.buffer_len, b.buffer_len, c.buffer_len],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::contiguous_increments;
    use proptest::prelude::*;

    fn packed(extents: &[usize]) -> TensorView {
        TensorView::contiguous(extents)
    }

    fn placement_for(extents: &[usize]) -> (Vec<isize>, OutputPlacement) {
        (
            contiguous_increments(extents),
            OutputPlacement {
                base_offset: 0,
                buffer_len: num_elements(extents).max(1),
            },
        )
    }

    #[test]
    fn matmul_shape() {
        let a = packed(&[2, 3]);
        let b = packed(&[3, 4]);
        let spec = ContractionSpec::new(vec![1], vec![0], vec![0, 1]);
        let (inc_c, c) = placement_for(&[2, 4]);
        assert!(validate(&a, &b, &spec, &inc_c, &c).is_ok());
        let plan = build_plan(&a, &b, &spec, &inc_c, &c).unwrap();
        assert_eq!(plan.rank_c(), 2);
        assert_eq!(plan.ext_c(), &[2, 4]);
        assert_eq!(plan.cont_ext(), &[3]);
        assert_eq!(plan.size_free(), 8);
        assert_eq!(plan.size_cont(), 3);
        assert_eq!(plan.free_table()[0].owner, Operand::A);
        assert_eq!(plan.free_table()[1].owner, Operand::B);
        assert_eq!(plan.free_table()[1].src_increment, 3);
        assert_eq!(plan.cont_table()[0].inc_a, 2);
        assert_eq!(plan.cont_table()[0].inc_b, 1);
    }

    #[test]
    fn matmul_transposed_output() {
        let a = packed(&[2, 3]);
        let b = packed(&[3, 4]);
        let spec = ContractionSpec::new(vec![1], vec![0], vec![1, 0]);
        let (inc_c, c) = placement_for(&[4, 2]);
        let plan = build_plan(&a, &b, &spec, &inc_c, &c).unwrap();
        assert_eq!(plan.ext_c(), &[4, 2]);
        assert_eq!(plan.free_table()[0].owner, Operand::B);
    }

    #[test]
    fn dot_product_shape() {
        let a = packed(&[3]);
        let b = packed(&[3]);
        let spec = ContractionSpec::new(vec![0], vec![0], vec![]);
        let (inc_c, c) = placement_for(&[]);
        let plan = build_plan(&a, &b, &spec, &inc_c, &c).unwrap();
        assert_eq!(plan.rank_c(), 0);
        assert_eq!(plan.size_free(), 1);
        assert_eq!(plan.size_cont(), 3);
    }

    #[test]
    fn extent_mismatch() {
        let a = packed(&[2, 3]);
        let b = packed(&[4, 4]);
        let spec = ContractionSpec::new(vec![1], vec![0], vec![0, 1]);
        let (inc_c, c) = placement_for(&[2, 4]);
        let err = validate(&a, &b, &spec, &inc_c, &c).unwrap_err();
        assert_eq!(
            err.errors(),
            &[ValidationError::ExtentMismatch {
                k: 0,
                ext_a: 3,
                ext_b: 4
            }]
        );
    }

    #[test]
    fn perm_not_bijection() {
        let a = packed(&[2, 3]);
        let b = packed(&[3, 4]);
        let spec = ContractionSpec::new(vec![1], vec![0], vec![0, 0]);
        let (inc_c, c) = placement_for(&[2, 4]);
        let err = validate(&a, &b, &spec, &inc_c, &c).unwrap_err();
        assert_eq!(err.codes(), vec!["PermNotBijection"]);
        let spec = ContractionSpec::new(vec![1], vec![0], vec![0, 2]);
        let err = validate(&a, &b, &spec, &inc_c, &c).unwrap_err();
        assert_eq!(err.codes(), vec!["PermNotBijection"]);
    }

    #[test]
    fn collects_every_error() {
        let a = packed(&[2, 3]);
        let b = packed(&[3, 4]);
        let spec = ContractionSpec {
            conts: 1,
            cont_a: vec![5],
            cont_b: vec![0],
            perm: vec![0],
        };
        let err = validate(
            &a,
            &b,
            &spec,
            &[1, 2, 3],
            &OutputPlacement {
                base_offset: 0,
                buffer_len: 8,
            },
        )
        .unwrap_err();
        assert_eq!(
            err.codes(),
            vec!["ContIndexOutOfRange", "PermLengthWrong", "IncCLengthWrong"]
        );
    }

    #[test]
    fn cont_list_errors() {
        let a = packed(&[3, 3]);
        let b = packed(&[3, 3]);
        let spec = ContractionSpec {
            conts: 2,
            cont_a: vec![1, 1],
            cont_b: vec![0],
            perm: vec![],
        };
        let (inc_c, c) = placement_for(&[]);
        let err = validate(&a, &b, &spec, &inc_c, &c).unwrap_err();
        assert_eq!(err.codes(), vec!["ContIndexDuplicate", "ContLengthWrong"]);
    }

    #[test]
    fn shape_length_wrong() {
        let a = TensorView::new(vec![2, 3], vec![1], 0, 6);
        let b = packed(&[3]);
        let spec = ContractionSpec::new(vec![], vec![], vec![0, 1, 2]);
        let err = validate(
            &a,
            &b,
            &spec,
            &[1, 2, 6],
            &OutputPlacement {
                base_offset: 0,
                buffer_len: 18,
            },
        )
        .unwrap_err();
        assert_eq!(err.codes(), vec!["ShapeLengthWrong"]);
    }

    #[test]
    fn output_write_aliasing() {
        let a = packed(&[2]);
        let b = packed(&[3]);
        let spec = ContractionSpec::new(vec![], vec![], vec![0, 1]);
        let c = OutputPlacement {
            base_offset: 0,
            buffer_len: 3,
        };
        let err = validate(&a, &b, &spec, &[0, 1], &c).unwrap_err();
        assert_eq!(
            err.errors(),
            &[ValidationError::OutputWriteAliasing { dim: 0, extent: 2 }]
        );
        // Zero increment on an extent-1 output dimension is harmless.
        let a = packed(&[1]);
        assert!(validate(&a, &b, &spec, &[0, 1], &c).is_ok());
    }

    #[test]
    fn zero_increment_inputs_allowed() {
        let a = TensorView::new(vec![4], vec![0], 0, 1);
        let b = packed(&[4]);
        let spec = ContractionSpec::new(vec![0], vec![0], vec![]);
        let (inc_c, c) = placement_for(&[]);
        assert!(validate(&a, &b, &spec, &inc_c, &c).is_ok());
    }

    #[test]
    fn footprint_out_of_bounds() {
        let a = TensorView::new(vec![3], vec![-1], 1, 3);
        let b = packed(&[3]);
        let spec = ContractionSpec::new(vec![0], vec![0], vec![]);
        let c = OutputPlacement {
            base_offset: 1,
            buffer_len: 1,
        };
        let err = validate(&a, &b, &spec, &[], &c).unwrap_err();
        assert_eq!(
            err.errors(),
            &[
                ValidationError::FootprintOutOfBounds {
                    tensor: Operand::A,
                    lo: -1,
                    hi: 1,
                    buffer_len: 3
                },
                ValidationError::FootprintOutOfBounds {
                    tensor: Operand::C,
                    lo: 1,
                    hi: 1,
                    buffer_len: 1
                },
            ]
        );
    }

    #[test]
    fn zero_extents_are_valid() {
        let a = packed(&[2, 0]);
        let b = packed(&[0, 3]);
        let spec = ContractionSpec::new(vec![1], vec![0], vec![0, 1]);
        let (inc_c, c) = placement_for(&[2, 3]);
        let plan = build_plan(&a, &b, &spec, &inc_c, &c).unwrap();
        assert_eq!(plan.size_cont(), 0);
        assert_eq!(plan.size_free(), 6);
    }

    #[test]
    fn negative_extents() {
        assert_eq!(checked_extents(Operand::B, &[2, 3]).unwrap(), vec![2, 3]);
        let err = checked_extents(Operand::B, &[2, -1]).unwrap_err();
        assert_eq!(
            err.errors(),
            &[ValidationError::NegativeExtent {
                tensor: Operand::B,
                dim: 1,
                extent: -1
            }]
        );
    }

    #[test]
    fn rotation_shifts_left() {
        let spec = ContractionSpec::new(vec![], vec![], vec![0, 1, 2]);
        assert_eq!(spec.with_rotated_perm(1).perm, vec![2, 0, 1]);
        assert_eq!(spec.with_rotated_perm(3).perm, vec![0, 1, 2]);
    }

    #[test]
    fn codes_appear_in_messages() {
        let e = ValidationError::ExtentMismatch {
            k: 0,
            ext_a: 3,
            ext_b: 4,
        };
        assert!(e.to_string().starts_with("ExtentMismatch"));
    }

    /// Random valid contraction: (extents A, extents B, spec).
    fn arb_contraction() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, ContractionSpec)> {
        (0..=5usize, 0..=5usize)
            .prop_flat_map(|(ra, rb)| {
                let max_conts = ra.min(rb);
                (
                    Just(ra),
                    Just(rb),
                    0..=max_conts,
                    prop::collection::vec(1..=5usize, ra + rb),
                    Just((0..ra).collect::<Vec<_>>()).prop_shuffle(),
                    Just((0..rb).collect::<Vec<_>>()).prop_shuffle(),
                )
            })
            .prop_flat_map(|(ra, rb, k, ext, dims_a, dims_b)| {
                let rank_c = ra + rb - 2 * k;
                (
                    Just((ra, k, ext, dims_a, dims_b)),
                    Just((0..rank_c).collect::<Vec<_>>()).prop_shuffle(),
                )
            })
            .prop_map(|((ra, k, ext, dims_a, dims_b), perm)| {
                let ext_a = ext[..ra].to_vec();
                let mut ext_b = ext[ra..].to_vec();
                let cont_a = dims_a[..k].to_vec();
                let cont_b = dims_b[..k].to_vec();
                for (&da, &db) in cont_a.iter().zip(&cont_b) {
                    ext_b[db] = ext_a[da];
                }
                (ext_a, ext_b, ContractionSpec::new(cont_a, cont_b, perm))
            })
    }

    fn plan_for(ext_a: &[usize], ext_b: &[usize], spec: &ContractionSpec) -> ContractionPlan {
        let a = packed(ext_a);
        let b = packed(ext_b);
        let rank_c = spec.perm.len();
        let inc_c: Vec<isize> = (0..rank_c).map(|d| 1 + d as isize).collect();
        let c = OutputPlacement {
            base_offset: 0,
            buffer_len: 1_000_000,
        };
        build_plan(&a, &b, spec, &inc_c, &c).unwrap()
    }

    proptest! {
        #[test]
        fn tables_recover_input_extents((ext_a, ext_b, spec) in arb_contraction()) {
            let plan = plan_for(&ext_a, &ext_b, &spec);
            let mut rec_a = vec![None; ext_a.len()];
            let mut rec_b = vec![None; ext_b.len()];
            for f in plan.free_table() {
                let slot = match f.owner {
                    Operand::A => &mut rec_a[f.src_dim],
                    _ => &mut rec_b[f.src_dim],
                };
                prop_assert!(slot.is_none());
                *slot = Some(f.extent);
            }
            for c in plan.cont_table() {
                prop_assert!(rec_a[c.dim_a].is_none() && rec_b[c.dim_b].is_none());
                rec_a[c.dim_a] = Some(c.extent);
                rec_b[c.dim_b] = Some(c.extent);
            }
            let rec_a: Vec<usize> = rec_a.into_iter().map(Option::unwrap).collect();
            let rec_b: Vec<usize> = rec_b.into_iter().map(Option::unwrap).collect();
            prop_assert_eq!(rec_a, ext_a.clone());
            prop_assert_eq!(rec_b, ext_b.clone());
            let owned_a = plan.free_table().iter().filter(|f| f.owner == Operand::A).count();
            prop_assert_eq!(owned_a, ext_a.len() - spec.conts);
            prop_assert_eq!(plan.rank_c() + 2 * spec.conts, ext_a.len() + ext_b.len());
        }

        #[test]
        fn permuting_perm_permutes_extents(
            (ext_a, ext_b, spec) in arb_contraction(),
            shift in 0..10usize,
        ) {
            let rotated = spec.with_rotated_perm(shift);
            let p1 = plan_for(&ext_a, &ext_b, &spec);
            let p2 = plan_for(&ext_a, &ext_b, &rotated);
            let n = p1.rank_c();
            for d in 0..n {
                let moved = (d + n - shift % n) % n;
                prop_assert_eq!(p1.ext_c()[d], p2.ext_c()[moved]);
            }
        }

        #[test]
        fn swap_is_an_involution((ext_a, ext_b, spec) in arb_contraction()) {
            let twice = spec.swapped(ext_a.len()).swapped(ext_b.len());
            prop_assert_eq!(twice, spec.clone());
            // The swapped spec is valid for (B, A) and gives the same output shape.
            let p1 = plan_for(&ext_a, &ext_b, &spec);
            let p2 = plan_for(&ext_b, &ext_a, &spec.swapped(ext_a.len()));
            prop_assert_eq!(p1.ext_c(), p2.ext_c());
        }
    }
}
