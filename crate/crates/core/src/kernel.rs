//! The reference contraction kernel and the `?gett` entry points.
//!
//! The kernel accumulates: `C[x] += Σ_k A[..] * B[..]`. Callers wanting a
//! plain contraction zero the output view first with [`zero_view`].

use std::fmt;
use std::ops::{Add, Mul};

use num_complex::{Complex32, Complex64};
use num_traits::Zero;

use crate::layout::{increment_coords, CoordCounter, TensorView};
use crate::plan::{
    build_plan, ContractionPlan, ContractionSpec, Operand, OutputPlacement, ValidationError,
    ValidationErrors,
};

/// Element type tag, matching the `s`/`d`/`c`/`z` routine prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementType {
    /// 32-bit real.
    S,
    /// 64-bit real.
    D,
    /// Complex with 32-bit parts.
    C,
    /// Complex with 64-bit parts.
    Z,
}

impl ElementType {
    pub const ALL: [ElementType; 4] = [
        ElementType::S,
        ElementType::D,
        ElementType::C,
        ElementType::Z,
    ];

    pub fn prefix(self) -> char {
        match self {
            ElementType::S => 's',
            ElementType::D => 'd',
            ElementType::C => 'c',
            ElementType::Z => 'z',
        }
    }

    pub fn from_prefix(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            's' => Some(ElementType::S),
            'd' => Some(ElementType::D),
            'c' => Some(ElementType::C),
            'z' => Some(ElementType::Z),
            _ => None,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, ElementType::C | ElementType::Z)
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.prefix())
    }
}

/// Scalars the kernel can contract.
pub trait Element:
    Copy
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Mul<Output = Self>
    + Zero
    + Send
    + Sync
    + 'static
{
    const TYPE: ElementType;
}

impl Element for f32 {
    const TYPE: ElementType = ElementType::S;
}

impl Element for f64 {
    const TYPE: ElementType = ElementType::D;
}

impl Element for Complex32 {
    const TYPE: ElementType = ElementType::C;
}

impl Element for Complex64 {
    const TYPE: ElementType = ElementType::Z;
}

/// A read-only buffer together with the offset of its first used element.
#[derive(Debug, Clone, Copy)]
pub struct TensorRef<'a, T> {
    pub data: &'a [T],
    pub offset: usize,
}

impl<'a, T> TensorRef<'a, T> {
    pub fn new(data: &'a [T], offset: usize) -> Self {
        TensorRef { data, offset }
    }
}

/// A writable buffer together with the offset of its first used element.
#[derive(Debug)]
pub struct TensorMut<'a, T> {
    pub data: &'a mut [T],
    pub offset: usize,
}

impl<'a, T> TensorMut<'a, T> {
    pub fn new(data: &'a mut [T], offset: usize) -> Self {
        TensorMut { data, offset }
    }
}

/// Runs the contraction described by `plan`, accumulating into `c`.
///
/// Output coordinates are visited with output dimension 0 fastest; for each
/// of them the contracted coordinates are visited with pair 0 fastest. This
/// fixes the summation order, so results are reproducible bit for bit.
///
/// # Panics
///
/// If a buffer length differs from the one the plan was validated against.
pub fn contract<T: Element>(plan: &ContractionPlan, a: &[T], b: &[T], c: &mut [T]) {
    assert_eq!(
        a.len(),
        plan.buffer_len(Operand::A),
        "A buffer does not match plan"
    );
    assert_eq!(
        b.len(),
        plan.buffer_len(Operand::B),
        "B buffer does not match plan"
    );
    assert_eq!(
        c.len(),
        plan.buffer_len(Operand::C),
        "C buffer does not match plan"
    );

    let size_free = plan.size_free();
    let size_cont = plan.size_cont();
    if size_free == 0 || size_cont == 0 {
        return;
    }

    let free = plan.free_table();
    let ext_free = plan.ext_c();
    let inc_c: Vec<isize> = free.iter().map(|f| f.out_increment).collect();
    let owned_by_a: Vec<bool> = free.iter().map(|f| f.owner == Operand::A).collect();
    let inc_free: Vec<isize> = free.iter().map(|f| f.src_increment).collect();

    let cont = plan.cont_table();
    let ext_cont = plan.cont_ext();
    let inc_a: Vec<isize> = cont.iter().map(|k| k.inc_a).collect();
    let inc_b: Vec<isize> = cont.iter().map(|k| k.inc_b).collect();

    let base_a = plan.base_offset(Operand::A) as isize;
    let base_b = plan.base_offset(Operand::B) as isize;
    let base_c = plan.base_offset(Operand::C) as isize;

    let mut coord_free = vec![0usize; free.len()];
    let mut coord_cont = vec![0usize; cont.len()];

    for _ in 0..size_free {
        let mut idx_c = base_c;
        let mut free_idx_a = base_a;
        let mut free_idx_b = base_b;
        for j in 0..free.len() {
            let x = coord_free[j] as isize;
            idx_c += inc_c[j] * x;
            if owned_by_a[j] {
                free_idx_a += inc_free[j] * x;
            } else {
                free_idx_b += inc_free[j] * x;
            }
        }
        let idx_c = idx_c as usize;
        for _ in 0..size_cont {
            let mut idx_a = free_idx_a;
            let mut idx_b = free_idx_b;
            for k in 0..cont.len() {
                let x = coord_cont[k] as isize;
                idx_a += inc_a[k] * x;
                idx_b += inc_b[k] * x;
            }
            c[idx_c] = c[idx_c] + a[idx_a as usize] * b[idx_b as usize];
            increment_coords(&mut coord_cont, ext_cont);
        }
        increment_coords(&mut coord_free, ext_free);
    }
}

/// Sets every element addressed by `view` to zero and leaves the rest of
/// `data` alone.
///
/// # Panics
///
/// If the view does not fit inside `data`.
pub fn zero_view<T: Element>(view: &TensorView, data: &mut [T]) {
    assert!(
        view.buffer_len == data.len() && view.fits_buffer(),
        "view does not fit its buffer"
    );
    let Some(mut counter) = CoordCounter::new(&view.extents) else {
        return;
    };
    for _ in 0..counter.cycle_len() {
        let idx = view.offset_of(counter.coords()).expect("consistent view");
        data[idx] = T::zero();
        counter.advance();
    }
}

/// Generic form of the `?gett` routines.
///
/// Arguments follow the routine order: each input tensor as rank, extents,
/// increments and data; then the contraction count, the contracted
/// dimensions of A and of B, and the free-index permutation; finally the
/// output increments and data. On any validation error `c` is left untouched
/// and every problem found is returned.
#[allow(clippy::too_many_arguments)]
pub fn gett<T: Element>(
    rank_a: usize,
    ext_a: &[usize],
    inc_a: &[isize],
    a: TensorRef<'_, T>,
    rank_b: usize,
    ext_b: &[usize],
    inc_b: &[isize],
    b: TensorRef<'_, T>,
    conts: usize,
    cont_a: &[usize],
    cont_b: &[usize],
    perm: &[usize],
    inc_c: &[isize],
    c: TensorMut<'_, T>,
) -> Result<ContractionPlan, ValidationErrors> {
    let mut rank_errors = Vec::new();
    for (tensor, rank, ext, inc) in [
        (Operand::A, rank_a, ext_a, inc_a),
        (Operand::B, rank_b, ext_b, inc_b),
    ] {
        if ext.len() != rank || inc.len() != rank {
            rank_errors.push(ValidationError::ShapeLengthWrong {
                tensor,
                rank,
                extents: ext.len(),
                increments: inc.len(),
            });
        }
    }
    if !rank_errors.is_empty() {
        return Err(ValidationErrors(rank_errors));
    }

    let view_a = TensorView::new(ext_a.to_vec(), inc_a.to_vec(), a.offset, a.data.len());
    let view_b = TensorView::new(ext_b.to_vec(), inc_b.to_vec(), b.offset, b.data.len());
    let spec = ContractionSpec {
        conts,
        cont_a: cont_a.to_vec(),
        cont_b: cont_b.to_vec(),
        perm: perm.to_vec(),
    };
    let placement = OutputPlacement {
        base_offset: c.offset,
        buffer_len: c.data.len(),
    };
    let plan = build_plan(&view_a, &view_b, &spec, inc_c, &placement)?;
    contract(&plan, a.data, b.data, c.data);
    Ok(plan)
}

macro_rules! gett_entry {
    ($(#[$doc:meta])* $name:ident, $ty:ty) => {
        $(#[$doc])*
        #[allow(clippy::too_many_arguments)]
        pub fn $name(
            rank_a: usize,
            ext_a: &[usize],
            inc_a: &[isize],
            a: TensorRef<'_, $ty>,
            rank_b: usize,
            ext_b: &[usize],
            inc_b: &[isize],
            b: TensorRef<'_, $ty>,
            conts: usize,
            cont_a: &[usize],
            cont_b: &[usize],
            perm: &[usize],
            inc_c: &[isize],
            c: TensorMut<'_, $ty>,
        ) -> Result<(), ValidationErrors> {
            gett(
                rank_a, ext_a, inc_a, a, rank_b, ext_b, inc_b, b, conts, cont_a, cont_b, perm,
                inc_c, c,
            )
            .map(|_| ())
        }
    };
}

gett_entry!(
    /// Tensor contraction on 32-bit reals.
    sgett, f32
);
gett_entry!(
    /// Tensor contraction on 64-bit reals.
    dgett, f64
);
gett_entry!(
    /// Tensor contraction on complex numbers with 32-bit parts.
    cgett, Complex32
);
gett_entry!(
    /// Tensor contraction on complex numbers with 64-bit parts.
    zgett, Complex64
);

/// Contracts tensors described by views, for callers that already hold
/// [`TensorView`]s. The output extents are derived, so only the output's
/// increments and placement come from `c_view_inc` and `c`.
pub fn contract_views<T: Element>(
    a_view: &TensorView,
    a: &[T],
    b_view: &TensorView,
    b: &[T],
    spec: &ContractionSpec,
    inc_c: &[isize],
    c: TensorMut<'_, T>,
) -> Result<ContractionPlan, ValidationErrors> {
    gett(
        a_view.rank(),
        &a_view.extents,
        &a_view.increments,
        TensorRef::new(a, a_view.base_offset),
        b_view.rank(),
        &b_view.extents,
        &b_view.increments,
        TensorRef::new(b, b_view.base_offset),
        spec.conts,
        &spec.cont_a,
        &spec.cont_b,
        &spec.perm,
        inc_c,
        c,
    )
}
