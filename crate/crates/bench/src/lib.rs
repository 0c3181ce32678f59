//! Benchmark fixtures: ready-built plans with their buffers.

use gett::{
    build_plan, contiguous_increments, ContractionPlan, ContractionSpec, OutputPlacement,
    TensorView,
};

pub struct Fixture {
    pub plan: ContractionPlan,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl Fixture {
    pub fn multiply_adds(&self) -> u64 {
        self.plan.multiply_adds() as u64
    }

    pub fn run(&mut self) {
        gett::contract(&self.plan, &self.a, &self.b, &mut self.c);
    }
}

fn values(n: usize, modulus: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (i % modulus) as f64 - (modulus / 2) as f64)
        .collect()
}

fn build(
    a: TensorView,
    b: TensorView,
    spec: ContractionSpec,
    inc_c: Vec<isize>,
    c_len: usize,
    c_base: usize,
) -> Fixture {
    let plan = build_plan(
        &a,
        &b,
        &spec,
        &inc_c,
        &OutputPlacement {
            base_offset: c_base,
            buffer_len: c_len,
        },
    )
    .expect("fixture arguments are valid");
    Fixture {
        a: values(a.buffer_len, 7),
        b: values(b.buffer_len, 5),
        c: vec![0.0; c_len],
        plan,
    }
}

/// Two rank-`rank` hypercubes of side `extent`, contracting their first
/// `conts` dimensions, packed output.
pub fn hypercube(rank: usize, extent: usize, conts: usize) -> Fixture {
    let view = TensorView::contiguous(&vec![extent; rank]);
    let free = 2 * (rank - conts);
    let ext_c = vec![extent; free];
    let len = ext_c.iter().product::<usize>().max(1);
    let spec = ContractionSpec::new(
        (0..conts).collect(),
        (0..conts).collect(),
        (0..free).collect(),
    );
    build(
        view.clone(),
        view,
        spec,
        contiguous_increments(&ext_c),
        len,
        0,
    )
}

/// `n x n` matrix product, `C = A B` with everything column-major.
pub fn matmul(n: usize) -> Fixture {
    let view = TensorView::contiguous(&[n, n]);
    let spec = ContractionSpec::new(vec![1], vec![0], vec![0, 1]);
    build(view.clone(), view, spec, vec![1, n as isize], n * n, 0)
}

/// [`matmul`] with A transposed in place by negative increments and C
/// written transposed.
pub fn matmul_reversed(n: usize) -> Fixture {
    let m = n as isize;
    let a = TensorView::new(vec![n, n], vec![-m, -1], n * n - 1, n * n);
    let b = TensorView::contiguous(&[n, n]);
    let spec = ContractionSpec::new(vec![1], vec![0], vec![1, 0]);
    build(a, b, spec, vec![1, m], n * n, 0)
}

/// Rank-3 tensors as every second element of a larger parent in each
/// dimension, one contraction, output rotated.
pub fn strided_subtensor(extent: usize) -> Fixture {
    let parent = 2 * extent;
    let inc = vec![2, 2 * parent as isize, 2 * (parent * parent) as isize];
    let len = parent * parent * parent;
    let view = TensorView::new(vec![extent; 3], inc, 0, len);
    let spec = ContractionSpec::new(vec![1], vec![2], vec![1, 2, 3, 0]);
    let ext_c = vec![extent; 4];
    let c_len = ext_c.iter().product();
    build(
        view.clone(),
        view,
        spec,
        contiguous_increments(&ext_c),
        c_len,
        0,
    )
}
