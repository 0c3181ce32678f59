use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TestElement;
use crate::kernel::zero_view;
use crate::layout::{contiguous_increments, num_elements, TensorView};
use crate::plan::ContractionSpec;

/// Largest buffer a generated tensor may occupy, in elements.
const MAX_BUFFER: usize = 1 << 21;
/// Largest number of multiply-adds a generated case may require.
const MAX_WORK: usize = 1 << 23;

macro_rules! categories {
    ($($variant:ident => $name:literal,)*) => {
        /// The conformance test categories.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Category {
            $($variant,)*
        }

        impl Category {
            pub const ALL: [Category; 23] = [$(Category::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Category::$variant => $name,)*
                }
            }
        }
    };
}

categories! {
    Basic => "Basic contraction",
    Commutativity => "Commutativity",
    Nothing => "Nothing contraction",
    Scalar => "Scalar contraction",
    Permutations => "Permutations",
    RankZero => "Rank zero tensor",
    RankOne => "Rank one tensor",
    Square0 => "Square tensors zero contractions",
    Square1 => "Square tensors one contraction",
    Square2 => "Square tensors two contractions",
    Cube0 => "Cube tensors zero contractions",
    Cube1 => "Cube tensor one contraction",
    Cube2 => "Cube tensor two contractions",
    Cube3 => "Cube tensor three contractions",
    Hypercube0 => "Hypercube tensors zero contractions",
    Hypercube1 => "Hypercube tensor one contraction",
    Hypercube2 => "Hypercube tensor two contractions",
    Hypercube3 => "Hypercube tensor three contractions",
    Hypercube4 => "Hypercube tensor four contractions",
    SubTensorSameRank => "Sub-tensor of same rank",
    NegativeIncrement => "Negative increment",
    SubTensorNegative => "Sub-tensor negative increment",
    SubTensorLowerRank => "Sub-tensor of lower rank",
}

impl Category {
    pub fn index(self) -> usize {
        self as usize
    }

    /// Categories whose tensors live inside larger parents or are read
    /// backward.
    pub fn is_strided(self) -> bool {
        matches!(
            self,
            Category::SubTensorSameRank
                | Category::NegativeIncrement
                | Category::SubTensorNegative
                | Category::SubTensorLowerRank
        )
    }

    fn embedding(self) -> Embedding {
        match self {
            Category::SubTensorSameRank => Embedding::SameRank,
            Category::NegativeIncrement => Embedding::Reversed,
            Category::SubTensorNegative => Embedding::SameRankReversed,
            Category::SubTensorLowerRank => Embedding::LowerRank,
            _ => Embedding::Packed,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCategory(pub String);

impl fmt::Display for UnknownCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown test category {:?}", self.0)
    }
}

impl std::error::Error for UnknownCategory {}

impl FromStr for Category {
    type Err = UnknownCategory;

    /// Matches category names case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim();
        Category::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// How tensor values are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataDist {
    /// Integers in `[-4, 4]`; every intermediate sum is exact.
    SmallIntegers,
    /// Uniform reals in `[-1, 1]`.
    UniformUnit,
}

/// A view plus the buffer it addresses.
#[derive(Debug, Clone, PartialEq)]
pub struct StridedTensor<T> {
    pub view: TensorView,
    pub data: Vec<T>,
}

/// One generated contraction: inputs, arguments and a zeroed output view.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCase<T> {
    pub category: Category,
    pub seed: u64,
    pub a: StridedTensor<T>,
    pub b: StridedTensor<T>,
    pub spec: ContractionSpec,
    /// Output view; its increments are the `inc_c` argument. Elements of the
    /// buffer outside the view hold arbitrary values that must survive.
    pub c: StridedTensor<T>,
}

impl<T> TestCase<T> {
    pub fn inc_c(&self) -> &[isize] {
        &self.c.view.increments
    }

    pub fn rank_c(&self) -> usize {
        self.c.view.rank()
    }

    /// Multiply-adds performed by one contraction.
    pub fn work(&self) -> usize {
        let cont: usize = self
            .spec
            .cont_a
            .iter()
            .map(|&d| self.a.view.extents[d])
            .product();
        self.c.view.num_elements() * cont
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Embedding {
    Packed,
    Reversed,
    SameRank,
    SameRankReversed,
    LowerRank,
}

/// Extents and arguments of a contraction before it is laid out in memory.
struct Shape {
    ext_a: Vec<usize>,
    ext_b: Vec<usize>,
    spec: ContractionSpec,
}

impl Shape {
    fn ext_c(&self) -> Vec<usize> {
        let free_a = (0..self.ext_a.len())
            .filter(|d| !self.spec.cont_a.contains(d))
            .map(|d| self.ext_a[d]);
        let free_b = (0..self.ext_b.len())
            .filter(|d| !self.spec.cont_b.contains(d))
            .map(|d| self.ext_b[d]);
        let mut ext_c = vec![0; self.spec.perm.len()];
        for (i, e) in free_a.chain(free_b).enumerate() {
            ext_c[self.spec.perm[i]] = e;
        }
        ext_c
    }
}

fn random_shape(
    rng: &mut ChaCha8Rng,
    rank_a: usize,
    rank_b: usize,
    conts: usize,
    equal_extent: Option<usize>,
) -> Shape {
    let extent = |rng: &mut ChaCha8Rng| equal_extent.unwrap_or_else(|| rng.random_range(1..=5));
    let ext_a: Vec<usize> = (0..rank_a).map(|_| extent(rng)).collect();
    let mut ext_b: Vec<usize> = (0..rank_b).map(|_| extent(rng)).collect();

    let mut dims_a: Vec<usize> = (0..rank_a).collect();
    let mut dims_b: Vec<usize> = (0..rank_b).collect();
    dims_a.shuffle(rng);
    dims_b.shuffle(rng);
    let cont_a = dims_a[..conts].to_vec();
    let cont_b = dims_b[..conts].to_vec();
    for (&da, &db) in cont_a.iter().zip(&cont_b) {
        ext_b[db] = ext_a[da];
    }

    let mut perm: Vec<usize> = (0..rank_a + rank_b - 2 * conts).collect();
    perm.shuffle(rng);
    Shape {
        ext_a,
        ext_b,
        spec: ContractionSpec::new(cont_a, cont_b, perm),
    }
}

fn category_shape(category: Category, rng: &mut ChaCha8Rng) -> Shape {
    use Category::*;
    let any_rank = |rng: &mut ChaCha8Rng| rng.random_range(1..=5usize);
    match category {
        Basic | Commutativity | Permutations | SubTensorSameRank | NegativeIncrement
        | SubTensorNegative | SubTensorLowerRank => {
            let ra = any_rank(rng);
            let rb = any_rank(rng);
            let conts = rng.random_range(0..=ra.min(rb).min(4));
            random_shape(rng, ra, rb, conts, None)
        }
        Nothing => {
            let ra = any_rank(rng);
            let rb = any_rank(rng);
            random_shape(rng, ra, rb, 0, None)
        }
        Scalar => {
            let r = any_rank(rng);
            random_shape(rng, r, r, r, None)
        }
        RankZero | RankOne => {
            let small = if category == RankZero { 0 } else { 1 };
            let other = any_rank(rng);
            let conts = if category == RankZero {
                0
            } else {
                rng.random_range(0..=1)
            };
            if rng.random_bool(0.5) {
                random_shape(rng, small, other, conts, None)
            } else {
                random_shape(rng, other, small, conts, None)
            }
        }
        Square0 | Square1 | Square2 => {
            let conts = category.index() - Square0.index();
            let e = rng.random_range(1..=5);
            random_shape(rng, 2, 2, conts, Some(e))
        }
        Cube0 | Cube1 | Cube2 | Cube3 => {
            let conts = category.index() - Cube0.index();
            let e = rng.random_range(1..=5);
            random_shape(rng, 3, 3, conts, Some(e))
        }
        Hypercube0 | Hypercube1 | Hypercube2 | Hypercube3 | Hypercube4 => {
            let conts = category.index() - Hypercube0.index();
            let e = rng.random_range(1..=5);
            random_shape(rng, 4, 4, conts, Some(e))
        }
    }
}

/// Lays out a tensor with the given extents inside a buffer.
fn embed(extents: &[usize], embedding: Embedding, rng: &mut ChaCha8Rng) -> TensorView {
    let reversed = matches!(embedding, Embedding::Reversed | Embedding::SameRankReversed);
    match embedding {
        Embedding::Packed | Embedding::Reversed => {
            let mut view = TensorView::contiguous(extents);
            if reversed {
                for inc in &mut view.increments {
                    *inc = -*inc;
                }
                view.base_offset = view.buffer_len - 1;
            }
            view
        }
        Embedding::SameRank | Embedding::SameRankReversed => {
            let parent: Vec<usize> = extents
                .iter()
                .map(|&e| e + rng.random_range(1..=5))
                .collect();
            let origin: Vec<usize> = extents
                .iter()
                .zip(&parent)
                .map(|(&e, &p)| rng.random_range(0..=p - e))
                .collect();
            let strides = contiguous_increments(&parent);
            // Reversed views start at the far corner of their window.
            let corner: usize = origin
                .iter()
                .zip(extents)
                .zip(&strides)
                .map(|((&o, &e), &s)| (o + if reversed { e - 1 } else { 0 }) * s as usize)
                .sum();
            let increments = if reversed {
                strides.iter().map(|s| -s).collect()
            } else {
                strides
            };
            TensorView::new(extents.to_vec(), increments, corner, num_elements(&parent))
        }
        Embedding::LowerRank => {
            let rank = extents.len();
            let parent_rank = rank + rng.random_range(1..=3);
            let mut slots: Vec<usize> = (0..parent_rank).collect();
            slots.shuffle(rng);
            let mapped = &slots[..rank];

            // Unmapped parent dimensions have a single fixed coordinate.
            let mut parent = vec![0; parent_rank];
            let mut origin = vec![0; parent_rank];
            for d in 0..parent_rank {
                parent[d] = 1 + rng.random_range(1..=3);
                origin[d] = rng.random_range(0..parent[d]);
            }
            for (&slot, &e) in mapped.iter().zip(extents) {
                parent[slot] = e + rng.random_range(1..=3);
                origin[slot] = rng.random_range(0..=parent[slot] - e);
            }
            let strides = contiguous_increments(&parent);
            let base: usize = origin
                .iter()
                .zip(&strides)
                .map(|(&o, &s)| o * s as usize)
                .sum();
            let increments = mapped.iter().map(|&slot| strides[slot]).collect();
            TensorView::new(extents.to_vec(), increments, base, num_elements(&parent))
        }
    }
}

fn stream_rng(category: Category, seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * category.index() as u64 + stream);
    rng
}

fn fill<T: TestElement>(len: usize, dist: DataDist, rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut draw = || match dist {
        DataDist::SmallIntegers => rng.random_range(-4i32..=4) as f64,
        DataDist::UniformUnit => rng.random_range(-1.0..=1.0),
    };
    (0..len)
        .map(|_| {
            let re = draw();
            let im = if T::TYPE.is_complex() { draw() } else { 0.0 };
            T::from_parts(re, im)
        })
        .collect()
}

/// Generates the case for `(category, seed)` with small-integer data.
pub fn generate_case<T: TestElement>(category: Category, seed: u64) -> TestCase<T> {
    generate_case_with(category, seed, DataDist::SmallIntegers)
}

/// Generates the case for `(category, seed)`.
///
/// The structure (extents, arguments, layout) depends only on
/// `(category, seed)`, never on the element type or `dist`. Shapes whose
/// buffers or work exceed fixed budgets are redrawn from the same stream.
pub fn generate_case_with<T: TestElement>(
    category: Category,
    seed: u64,
    dist: DataDist,
) -> TestCase<T> {
    let mut rng = stream_rng(category, seed, 0);
    let embedding = category.embedding();
    let (shape, views) = loop {
        let shape = category_shape(category, &mut rng);
        let views = [
            embed(&shape.ext_a, embedding, &mut rng),
            embed(&shape.ext_b, embedding, &mut rng),
            embed(&shape.ext_c(), embedding, &mut rng),
        ];
        let cont: usize = shape.spec.cont_a.iter().map(|&d| shape.ext_a[d]).product();
        let work = views[2].num_elements() * cont;
        if views.iter().all(|v| v.buffer_len <= MAX_BUFFER) && work <= MAX_WORK {
            break (shape, views);
        }
    };
    let [view_a, view_b, view_c] = views;

    let mut data_rng = stream_rng(category, seed, 1);
    let a = fill(view_a.buffer_len, dist, &mut data_rng);
    let b = fill(view_b.buffer_len, dist, &mut data_rng);
    let mut c = fill(view_c.buffer_len, dist, &mut data_rng);
    zero_view(&view_c, &mut c);

    TestCase {
        category,
        seed,
        a: StridedTensor {
            view: view_a,
            data: a,
        },
        b: StridedTensor {
            view: view_b,
            data: b,
        },
        spec: shape.spec,
        c: StridedTensor {
            view: view_c,
            data: c,
        },
    }
}
