//! General tensor-times-tensor contraction (`?gett`) over strided buffers.
//!
//! The routines take two input tensors, each described by its rank, extents,
//! increments and data, then the contraction arguments, then the output's
//! increments and data:
//!
//! ```text
//! ?GETT(RANKA, EXTA, INCA, A,
//!       RANKB, EXTB, INCB, B,
//!       CONTS, CONTA, CONTB, PERM,
//!       INCC, C)
//! ```
//!
//! `CONTA[k]` of A is contracted against `CONTB[k]` of B. The remaining
//! (free) dimensions are numbered A's first, then B's, each in ascending
//! order, and free index `i` becomes output dimension `PERM[i]`. The output's
//! rank and extents follow from the rest of the arguments.
//!
//! ```
//! use gett::{dgett, TensorMut, TensorRef};
//!
//! // C[i,k] += A[i,j] * B[j,k] with 2x3 and 3x2 packed, first index fastest
//! let a = [1.0, 4.0, 2.0, 5.0, 3.0, 6.0];
//! let b = [7.0, 9.0, 11.0, 8.0, 10.0, 12.0];
//! let mut c = [0.0; 4];
//! dgett(
//!     2, &[2, 3], &[1, 2], TensorRef::new(&a, 0),
//!     2, &[3, 2], &[1, 3], TensorRef::new(&b, 0),
//!     1, &[1], &[0], &[0, 1],
//!     &[1, 2], TensorMut::new(&mut c, 0),
//! )
//! .unwrap();
//! assert_eq!(c, [58.0, 139.0, 64.0, 154.0]);
//! ```

pub mod kernel;
pub mod layout;
pub mod plan;
pub mod testkit;

pub use kernel::{
    cgett, contract, contract_views, dgett, gett, sgett, zero_view, zgett, Element, ElementType,
    TensorMut, TensorRef,
};
pub use layout::{
    contiguous_increments, footprint, increment_coords, linear_offset, num_elements, CoordCounter,
    Footprint, LayoutError, TensorView,
};
pub use num_complex::{Complex32, Complex64};
pub use plan::{
    build_plan, checked_extents, validate, ContDim, ContractionPlan, ContractionSpec, FreeDim,
    Operand, OutputPlacement, ValidationError, ValidationErrors,
};
