use num_traits::Zero;

use super::{for_each_coord, ravel, PackedTensor, TestElement};
use crate::plan::{ContractionSpec, Operand, ValidationError, ValidationErrors};

/// Role of one input dimension.
#[derive(Clone, Copy)]
enum Role {
    /// Free index number (A's free indices first, then B's).
    Free(usize),
    /// Contracted pair number.
    Cont(usize),
}

fn roles(
    tensor: Operand,
    rank: usize,
    conts: usize,
    contracted: &[usize],
    first_free: usize,
    errors: &mut Vec<ValidationError>,
) -> Vec<Role> {
    if contracted.len() != conts {
        errors.push(ValidationError::ContLengthWrong {
            tensor,
            conts,
            actual: contracted.len(),
        });
    }
    let mut roles: Vec<Option<Role>> = vec![None; rank];
    for (k, &index) in contracted.iter().enumerate() {
        match roles.get(index) {
            None => errors.push(ValidationError::ContIndexOutOfRange {
                tensor,
                k,
                index,
                rank,
            }),
            Some(Some(_)) => errors.push(ValidationError::ContIndexDuplicate { tensor, index }),
            Some(None) => roles[index] = Some(Role::Cont(k)),
        }
    }
    let mut next = first_free;
    roles
        .into_iter()
        .map(|r| {
            r.unwrap_or_else(|| {
                next += 1;
                Role::Free(next - 1)
            })
        })
        .collect()
}

/// Brute-force contraction of packed tensors straight from the definition
/// `C[free] = Σ_cont A[..] * B[..]`, accumulated in [`TestElement::Wide`].
///
/// Output coordinates are enumerated by nested loops in packed order; for
/// each, a second loop nest runs over every contracted tuple and the operand
/// coordinates are assembled from the two tuples.
pub fn oracle_contract<T: TestElement>(
    a: &PackedTensor<T>,
    b: &PackedTensor<T>,
    spec: &ContractionSpec,
) -> Result<PackedTensor<T>, ValidationErrors> {
    let mut errors = Vec::new();
    let conts = spec.conts;
    let free_a = a.rank().saturating_sub(conts);
    let roles_a = roles(Operand::A, a.rank(), conts, &spec.cont_a, 0, &mut errors);
    let roles_b = roles(
        Operand::B,
        b.rank(),
        conts,
        &spec.cont_b,
        free_a,
        &mut errors,
    );

    let mut cont_ext = vec![0; conts];
    for (k, (&da, &db)) in spec.cont_a.iter().zip(&spec.cont_b).enumerate() {
        if let (Some(&ea), Some(&eb)) = (a.extents.get(da), b.extents.get(db)) {
            if ea != eb {
                errors.push(ValidationError::ExtentMismatch {
                    k,
                    ext_a: ea,
                    ext_b: eb,
                });
            }
            if k < conts {
                cont_ext[k] = ea;
            }
        }
    }

    let rank_c = spec.output_rank(a.rank(), b.rank());
    if spec.perm.len() as i64 != rank_c {
        errors.push(ValidationError::PermLengthWrong {
            expected: rank_c,
            actual: spec.perm.len(),
        });
    } else {
        let mut sorted = spec.perm.clone();
        sorted.sort_unstable();
        for (position, &target) in spec.perm.iter().enumerate() {
            let count = sorted.iter().filter(|&&p| p == target).count();
            if target >= spec.perm.len() || count > 1 {
                errors.push(ValidationError::PermNotBijection { position, target });
            }
        }
    }
    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }

    let rank_c = spec.perm.len();
    let mut ext_c = vec![0; rank_c];
    for (d, role) in roles_a.iter().enumerate() {
        if let Role::Free(i) = *role {
            ext_c[spec.perm[i]] = a.extents[d];
        }
    }
    for (d, role) in roles_b.iter().enumerate() {
        if let Role::Free(i) = *role {
            ext_c[spec.perm[i]] = b.extents[d];
        }
    }

    let mut free_coord = vec![0; rank_c];
    let mut a_coord = vec![0; a.rank()];
    let mut b_coord = vec![0; b.rank()];

    let gather = |roles: &[Role], free: &[usize], cont: &[usize], out: &mut [usize]| {
        for (slot, role) in out.iter_mut().zip(roles) {
            *slot = match *role {
                Role::Free(i) => free[i],
                Role::Cont(k) => cont[k],
            };
        }
    };

    let mut data = Vec::with_capacity(ext_c.iter().product());
    for_each_coord(&ext_c, |out_coord| {
        for (i, &p) in spec.perm.iter().enumerate() {
            free_coord[i] = out_coord[p];
        }
        let mut acc = T::Wide::zero();
        for_each_coord(&cont_ext, |cont_coord| {
            gather(&roles_a, &free_coord, cont_coord, &mut a_coord);
            gather(&roles_b, &free_coord, cont_coord, &mut b_coord);
            let x = a.data[ravel(&a_coord, &a.extents)].widen();
            let y = b.data[ravel(&b_coord, &b.extents)].widen();
            acc = acc + x * y;
        });
        data.push(T::narrow(acc));
    });
    Ok(PackedTensor::new(ext_c, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_product() {
        let a = PackedTensor::new(vec![3], vec![1.0f64, 2.0, 3.0]);
        let b = PackedTensor::new(vec![3], vec![4.0f64, 5.0, 6.0]);
        let c = oracle_contract(&a, &b, &ContractionSpec::new(vec![0], vec![0], vec![])).unwrap();
        assert_eq!(c.extents, Vec::<usize>::new());
        assert_eq!(c.data, vec![32.0]);
    }

    #[test]
    fn identity_matmul() {
        let eye = PackedTensor::new(vec![3, 3], vec![1.0f64, 0., 0., 0., 1., 0., 0., 0., 1.]);
        let m = PackedTensor::new(vec![3, 3], (0..9).map(|v| v as f64 - 2.5).collect());
        let spec = ContractionSpec::new(vec![1], vec![0], vec![0, 1]);
        assert_eq!(oracle_contract(&eye, &m, &spec).unwrap(), m);
    }

    #[test]
    fn transposed_matmul_output() {
        // A 2x3, B 3x2; C^T via perm [1,0]
        let a = PackedTensor::new(vec![2, 3], vec![1.0f64, 4.0, 2.0, 5.0, 3.0, 6.0]);
        let b = PackedTensor::new(vec![3, 2], vec![7.0f64, 9.0, 11.0, 8.0, 10.0, 12.0]);
        // row-major A = [[1,2,3],[4,5,6]], B = [[7,8],[9,10],[11,12]]
        // A*B = [[58,64],[139,154]]
        let c =
            oracle_contract(&a, &b, &ContractionSpec::new(vec![1], vec![0], vec![0, 1])).unwrap();
        assert_eq!(c.data, vec![58.0, 139.0, 64.0, 154.0]);
        let ct =
            oracle_contract(&a, &b, &ContractionSpec::new(vec![1], vec![0], vec![1, 0])).unwrap();
        assert_eq!(ct.extents, vec![2, 2]);
        assert_eq!(ct.data, vec![58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn propagates_errors() {
        let a = PackedTensor::new(vec![3], vec![0.0f64; 3]);
        let b = PackedTensor::new(vec![4], vec![0.0f64; 4]);
        let err =
            oracle_contract(&a, &b, &ContractionSpec::new(vec![0], vec![0], vec![])).unwrap_err();
        assert_eq!(err.codes(), vec!["ExtentMismatch"]);
        let spec = ContractionSpec::new(vec![], vec![], vec![1, 1]);
        let err = oracle_contract(&a, &b, &spec).unwrap_err();
        assert!(err.contains_code("PermNotBijection"));
    }
}
