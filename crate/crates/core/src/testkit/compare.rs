use thiserror::Error;

use super::{unravel_into, PackedTensor, TestElement};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompareMode {
    /// Bitwise equality of every element.
    Exact,
    /// `|x - y| <= tol * max(1, |y|)` elementwise.
    Relative(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompareError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("mismatch at {coords:?}: {left} vs {right}")]
    Mismatch {
        coords: Vec<usize>,
        left: String,
        right: String,
    },
}

/// Compares `x` against the reference `y`, reporting the first mismatch in
/// packed order.
pub fn compare<T: TestElement>(
    x: &PackedTensor<T>,
    y: &PackedTensor<T>,
    mode: CompareMode,
) -> Result<(), CompareError> {
    if x.extents != y.extents {
        return Err(CompareError::ShapeMismatch {
            left: x.extents.clone(),
            right: y.extents.clone(),
        });
    }
    let bad = x.data.iter().zip(&y.data).position(|(&l, &r)| match mode {
        CompareMode::Exact => !l.bits_eq(r),
        CompareMode::Relative(tol) => {
            let d = l.distance(r);
            d.is_nan() || d > tol * r.magnitude().max(1.0)
        }
    });
    match bad {
        None => Ok(()),
        Some(lin) => {
            let mut coords = vec![0; x.rank()];
            unravel_into(lin, &x.extents, &mut coords);
            Err(CompareError::Mismatch {
                coords,
                left: x.data[lin].display(),
                right: y.data[lin].display(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex32;

    #[test]
    fn identical_exact() {
        let t = PackedTensor::new(vec![2], vec![1.0f64, -0.5]);
        assert_eq!(compare(&t, &t.clone(), CompareMode::Exact), Ok(()));
    }

    #[test]
    fn relative_within_tolerance() {
        let x = PackedTensor::new(vec![1], vec![1.0f64]);
        let y = PackedTensor::new(vec![1], vec![1.0 + 1e-15]);
        assert_eq!(compare(&x, &y, CompareMode::Relative(1e-12)), Ok(()));
        assert!(compare(&x, &y, CompareMode::Exact).is_err());
    }

    #[test]
    fn scalar_mismatch_reports_empty_coords() {
        let x = PackedTensor::new(vec![], vec![0.0f64]);
        let y = PackedTensor::new(vec![], vec![1.0f64]);
        assert_eq!(
            compare(&x, &y, CompareMode::Exact),
            Err(CompareError::Mismatch {
                coords: vec![],
                left: "0".into(),
                right: "1".into()
            })
        );
    }

    #[test]
    fn reports_first_coordinate() {
        let x = PackedTensor::new(vec![2, 2], vec![1.0f32, 2.0, 3.0, 4.0]);
        let y = PackedTensor::new(vec![2, 2], vec![1.0f32, 2.0, 3.5, 4.5]);
        match compare(&x, &y, CompareMode::Exact) {
            Err(CompareError::Mismatch { coords, .. }) => assert_eq!(coords, vec![0, 1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn relative_scales_with_magnitude() {
        let x = PackedTensor::new(vec![1], vec![1000.0f64]);
        let y = PackedTensor::new(vec![1], vec![1000.5f64]);
        assert!(compare(&x, &y, CompareMode::Relative(1e-3)).is_ok());
        assert!(compare(&x, &y, CompareMode::Relative(1e-4)).is_err());
    }

    #[test]
    fn nan_never_matches_relative() {
        let x = PackedTensor::new(vec![1], vec![f64::NAN]);
        let y = PackedTensor::new(vec![1], vec![0.0]);
        assert!(compare(&x, &y, CompareMode::Relative(1.0)).is_err());
    }

    #[test]
    fn complex_distance() {
        let x = PackedTensor::new(vec![1], vec![Complex32::new(1.0, 1.0)]);
        let y = PackedTensor::new(vec![1], vec![Complex32::new(1.0, 1.0 + 1e-7)]);
        assert!(compare(&x, &y, CompareMode::Relative(1e-6)).is_ok());
        assert!(compare(&x, &y, CompareMode::Exact).is_err());
    }

    #[test]
    fn shape_mismatch() {
        let x = PackedTensor::new(vec![2], vec![0.0f64; 2]);
        let y = PackedTensor::new(vec![1, 2], vec![0.0f64; 2]);
        assert!(matches!(
            compare(&x, &y, CompareMode::Exact),
            Err(CompareError::ShapeMismatch { .. })
        ));
    }
}
