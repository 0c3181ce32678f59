//! Verification tooling: a brute-force oracle, a randomized case generator
//! covering the conformance categories, and result comparison.
//!
//! Nothing in this module iterates with the kernel's coordinate counter or
//! reads a [`ContractionPlan`](crate::plan::ContractionPlan). Coordinates are
//! enumerated with plain nested loops (see [`for_each_coord`]), so a defect
//! in the kernel's iteration cannot be mirrored here.

mod compare;
mod generate;
mod oracle;
mod suite;

use std::fmt;
use std::ops::{Add, Mul};

use num_complex::{Complex32, Complex64};
use num_traits::Zero;

use crate::kernel::Element;
use crate::layout::TensorView;

pub use compare::{compare, CompareError, CompareMode};
pub use generate::{
    generate_case, generate_case_with, Category, DataDist, StridedTensor, TestCase,
};
pub use oracle::oracle_contract;
pub use suite::{
    check_accumulation, check_case, check_permutations, check_stride_independence, run_contraction,
    run_suite, CaseFailure, CategoryReport, SuiteReport,
};

/// Element types the test tooling can generate, widen and compare.
pub trait TestElement: Element {
    /// Accumulator used by the oracle: the widest real type, or its complex
    /// counterpart.
    type Wide: Copy + Add<Output = Self::Wide> + Mul<Output = Self::Wide> + Zero;

    fn widen(self) -> Self::Wide;
    fn narrow(wide: Self::Wide) -> Self;
    /// Builds a value from real and imaginary parts; reals drop `im`.
    fn from_parts(re: f64, im: f64) -> Self;
    fn bits_eq(self, other: Self) -> bool;
    fn magnitude(self) -> f64;
    fn distance(self, other: Self) -> f64;
    fn display(self) -> String;
}

impl TestElement for f32 {
    type Wide = f64;
    fn widen(self) -> f64 {
        self as f64
    }
    fn narrow(wide: f64) -> Self {
        wide as f32
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re as f32
    }
    fn bits_eq(self, other: Self) -> bool {
        self.to_bits() == other.to_bits()
    }
    fn magnitude(self) -> f64 {
        (self as f64).abs()
    }
    fn distance(self, other: Self) -> f64 {
        (self as f64 - other as f64).abs()
    }
    fn display(self) -> String {
        self.to_string()
    }
}

impl TestElement for f64 {
    type Wide = f64;
    fn widen(self) -> f64 {
        self
    }
    fn narrow(wide: f64) -> Self {
        wide
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn bits_eq(self, other: Self) -> bool {
        self.to_bits() == other.to_bits()
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).abs()
    }
    fn display(self) -> String {
        self.to_string()
    }
}

impl TestElement for Complex32 {
    type Wide = Complex64;
    fn widen(self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }
    fn narrow(wide: Complex64) -> Self {
        Complex32::new(wide.re as f32, wide.im as f32)
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex32::new(re as f32, im as f32)
    }
    fn bits_eq(self, other: Self) -> bool {
        self.re.to_bits() == other.re.to_bits() && self.im.to_bits() == other.im.to_bits()
    }
    fn magnitude(self) -> f64 {
        self.widen().norm()
    }
    fn distance(self, other: Self) -> f64 {
        (self.widen() - other.widen()).norm()
    }
    fn display(self) -> String {
        self.to_string()
    }
}

impl TestElement for Complex64 {
    type Wide = Complex64;
    fn widen(self) -> Complex64 {
        self
    }
    fn narrow(wide: Complex64) -> Self {
        wide
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn bits_eq(self, other: Self) -> bool {
        self.re.to_bits() == other.re.to_bits() && self.im.to_bits() == other.im.to_bits()
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
    fn display(self) -> String {
        self.to_string()
    }
}

/// A tensor in the packed layout: first dimension fastest, no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedTensor<T> {
    pub extents: Vec<usize>,
    pub data: Vec<T>,
}

impl<T> PackedTensor<T> {
    pub fn new(extents: Vec<usize>, data: Vec<T>) -> Self {
        assert_eq!(
            data.len(),
            extents.iter().product::<usize>(),
            "data length does not match extents"
        );
        PackedTensor { extents, data }
    }

    pub fn rank(&self) -> usize {
        self.extents.len()
    }

    pub fn view(&self) -> TensorView {
        TensorView::contiguous(&self.extents)
    }

    /// Element at `coords`.
    pub fn get(&self, coords: &[usize]) -> &T {
        &self.data[ravel(coords, &self.extents)]
    }
}

impl<T: fmt::Display> fmt::Display for PackedTensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}[", self.extents)?;
        for (i, v) in self.data.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

/// Coordinates of packed linear index `lin`, first dimension fastest.
pub(crate) fn unravel_into(mut lin: usize, extents: &[usize], coords: &mut [usize]) {
    for (c, &e) in coords.iter_mut().zip(extents) {
        *c = lin % e;
        lin /= e;
    }
}

/// Calls `f` on every coordinate of `extents` in packed order (first
/// dimension fastest), as nested loops with the last dimension outermost.
pub fn for_each_coord(extents: &[usize], mut f: impl FnMut(&[usize])) {
    fn nest(dim: usize, extents: &[usize], coords: &mut [usize], f: &mut dyn FnMut(&[usize])) {
        if dim == 0 {
            f(coords);
            return;
        }
        for x in 0..extents[dim - 1] {
            coords[dim - 1] = x;
            nest(dim - 1, extents, coords, f);
        }
    }
    let mut coords = vec![0; extents.len()];
    nest(extents.len(), extents, &mut coords, &mut f);
}

/// Packed linear index of `coords`.
pub(crate) fn ravel(coords: &[usize], extents: &[usize]) -> usize {
    coords
        .iter()
        .zip(extents)
        .rev()
        .fold(0, |acc, (&c, &e)| acc * e + c)
}

/// Buffer offsets addressed by `view`, in packed coordinate order.
pub(crate) fn addressed_offsets(view: &TensorView) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(view.num_elements());
    for_each_coord(&view.extents, |coords| {
        let rel: isize = coords
            .iter()
            .zip(&view.increments)
            .map(|(&c, &inc)| c as isize * inc)
            .sum();
        offsets.push((view.base_offset as isize + rel) as usize);
    });
    offsets
}

/// Copies the elements addressed by `view` into packed order.
///
/// # Panics
///
/// If the view does not fit `data`.
pub fn pack<T: Copy>(view: &TensorView, data: &[T]) -> PackedTensor<T> {
    assert!(
        view.buffer_len == data.len() && view.fits_buffer(),
        "view does not fit its buffer"
    );
    pack_offsets(view, &addressed_offsets(view), data)
}

/// [`pack`] with the view's addressed offsets already computed.
pub(crate) fn pack_offsets<T: Copy>(
    view: &TensorView,
    offsets: &[usize],
    data: &[T],
) -> PackedTensor<T> {
    let values = offsets.iter().map(|&i| data[i]).collect();
    PackedTensor::new(view.extents.clone(), values)
}
