//! Strided tensor descriptors and mixed-radix coordinate iteration.
//!
//! A [`TensorView`] addresses the elements of a tensor inside a flat buffer:
//! the element at coordinate `x` lives at
//! `base_offset + Σ x[d] * increments[d]`. Increments may be negative, in
//! which case that dimension is read backward from `base_offset`.
//!
//! Coordinates are always advanced with the first dimension fastest, which is
//! also the canonical packed layout produced by [`contiguous_increments`].

use thiserror::Error;

/// Errors raised by the offset helpers when argument lengths disagree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("length mismatch: {coords} coordinates against {increments} increments")]
    LengthMismatch { coords: usize, increments: usize },
}

/// A strided view of a tensor stored in a flat buffer.
///
/// The fields are plain data; [`TensorView::is_consistent`] and
/// [`TensorView::fits_buffer`] report whether the invariants hold. Contraction
/// entry points validate views before touching any buffer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorView {
    pub extents: Vec<usize>,
    pub increments: Vec<isize>,
    /// Index of the element at coordinate `[0, 0, ...]`.
    pub base_offset: usize,
    pub buffer_len: usize,
}

impl TensorView {
    pub fn new(
        extents: Vec<usize>,
        increments: Vec<isize>,
        base_offset: usize,
        buffer_len: usize,
    ) -> Self {
        TensorView {
            extents,
            increments,
            base_offset,
            buffer_len,
        }
    }

    /// A packed, first-dimension-fastest view occupying its whole buffer.
    pub fn contiguous(extents: &[usize]) -> Self {
        let len = num_elements(extents).max(1);
        TensorView {
            increments: contiguous_increments(extents),
            extents: extents.to_vec(),
            base_offset: 0,
            buffer_len: len,
        }
    }

    /// A rank-0 view of the single element at `offset`.
    pub fn scalar(offset: usize, buffer_len: usize) -> Self {
        TensorView::new(Vec::new(), Vec::new(), offset, buffer_len)
    }

    pub fn rank(&self) -> usize {
        self.extents.len()
    }

    pub fn num_elements(&self) -> usize {
        num_elements(&self.extents)
    }

    pub fn is_empty(&self) -> bool {
        self.extents.contains(&0)
    }

    /// `extents` and `increments` describe the same number of dimensions.
    pub fn is_consistent(&self) -> bool {
        self.extents.len() == self.increments.len()
    }

    /// Offset range addressed by the view, relative to `base_offset`.
    ///
    /// Assumes [`is_consistent`](Self::is_consistent).
    pub fn footprint(&self) -> Footprint {
        footprint(&self.extents, &self.increments)
    }

    /// Every addressed element lies inside `0..buffer_len`.
    pub fn fits_buffer(&self) -> bool {
        if !self.is_consistent() {
            return false;
        }
        let fp = self.footprint();
        if fp.empty {
            return true;
        }
        let base = self.base_offset as i128;
        base + fp.min as i128 >= 0 && base + (fp.max as i128) < self.buffer_len as i128
    }

    /// Buffer index of the element at `coords`.
    pub fn offset_of(&self, coords: &[usize]) -> Result<usize, LayoutError> {
        let rel = linear_offset(coords, &self.increments)?;
        Ok((self.base_offset as isize + rel) as usize)
    }
}

/// Offsets addressed by a view relative to its base, as a closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Footprint {
    pub min: isize,
    pub max: isize,
    /// Some extent is zero, so nothing is addressed at all.
    pub empty: bool,
}

/// `Σ coords[i] * increments[i]`.
pub fn linear_offset(coords: &[usize], increments: &[isize]) -> Result<isize, LayoutError> {
    if coords.len() != increments.len() {
        return Err(LayoutError::LengthMismatch {
            coords: coords.len(),
            increments: increments.len(),
        });
    }
    Ok(coords
        .iter()
        .zip(increments)
        .map(|(&c, &inc)| c as isize * inc)
        .sum())
}

/// Advance `coords` by one step in mixed radix `extents`, position 0 fastest.
///
/// A position that reaches its extent wraps to zero and carries into the next
/// position. After the last coordinate the counter wraps back to all zeros.
/// Empty slices are left untouched. Every extent must be at least 1.
pub fn increment_coords(coords: &mut [usize], extents: &[usize]) {
    debug_assert_eq!(coords.len(), extents.len());
    let n = coords.len();
    if n == 0 {
        return;
    }
    let mut i = 0;
    loop {
        coords[i] = (coords[i] + 1) % extents[i];
        i += 1;
        if coords[i - 1] != 0 || i >= n {
            break;
        }
    }
}

/// Increments of the packed layout with the first dimension fastest.
pub fn contiguous_increments(extents: &[usize]) -> Vec<isize> {
    let mut incs = Vec::with_capacity(extents.len());
    let mut stride = 1isize;
    for &e in extents {
        incs.push(stride);
        stride *= e as isize;
    }
    incs
}

/// Product of the extents; 1 for a rank-0 tensor.
pub fn num_elements(extents: &[usize]) -> usize {
    extents.iter().product()
}

pub fn footprint(extents: &[usize], increments: &[isize]) -> Footprint {
    let mut fp = Footprint {
        min: 0,
        max: 0,
        empty: false,
    };
    for (&e, &inc) in extents.iter().zip(increments) {
        if e == 0 {
            fp.empty = true;
            continue;
        }
        let reach = inc * (e as isize - 1);
        if inc < 0 {
            fp.min += reach;
        } else {
            fp.max += reach;
        }
    }
    fp
}

/// Mixed-radix counter over a fixed set of extents.
///
/// Holds the current coordinate; [`CoordCounter::advance`] steps it with
/// [`increment_coords`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordCounter {
    coords: Vec<usize>,
    extents: Vec<usize>,
}

impl CoordCounter {
    /// Counter at all zeros. Returns `None` when some extent is zero, since
    /// such an index space has no coordinates to visit.
    pub fn new(extents: &[usize]) -> Option<Self> {
        if extents.contains(&0) {
            return None;
        }
        Some(CoordCounter {
            coords: vec![0; extents.len()],
            extents: extents.to_vec(),
        })
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Number of distinct coordinates in one full cycle.
    pub fn cycle_len(&self) -> usize {
        num_elements(&self.extents)
    }

    pub fn advance(&mut self) {
        increment_coords(&mut self.coords, &self.extents);
    }

    /// Returns the advanced counter, leaving `self` unchanged.
    pub fn next_state(&self) -> Self {
        let mut next = self.clone();
        next.advance();
        next
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}
