//! Dense complex tensors stored in column-major order (first index fastest).
//!
//! Every merged index in this crate follows the same rule: among the merged
//! modes the one with the smallest mode number varies fastest. With this
//! convention `vec(A X Bᵀ) = (B ⊗ A) vec(X)` and the tensor Kronecker product
//! below agrees with the matrix Kronecker product.

use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

/// A sorted, nonempty set of modes used to matricize a tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSet(Vec<usize>);

impl ModeSet {
    /// Modes are 0-based; duplicates are merged.
    pub fn new(modes: impl IntoIterator<Item = usize>, order: usize) -> Result<Self> {
        let mut modes: Vec<usize> = modes.into_iter().collect();
        modes.sort_unstable();
        modes.dedup();
        if modes.is_empty() {
            return Err(Error::InvalidModeSet("empty".into()));
        }
        if let Some(&m) = modes.iter().find(|&&m| m >= order) {
            return Err(Error::InvalidModeSet(format!(
                "mode {m} out of range for order {order}"
            )));
        }
        Ok(Self(modes))
    }

    pub fn modes(&self) -> &[usize] {
        &self.0
    }

    fn complement(&self, order: usize) -> Vec<usize> {
        (0..order).filter(|m| !self.0.contains(m)).collect()
    }
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {expected} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn scalar(value: C64) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    /// Order-2 tensor with the entries of `m`.
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self {
            shape: vec![m.nrows(), m.ncols()],
            data: m.as_slice().to_vec(),
        }
    }

    /// Order-1 tensor.
    pub fn from_vector(v: &[C64]) -> Self {
        Self {
            shape: vec![v.len()],
            data: v.to_vec(),
        }
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, &shape);
        }
        Self { shape, data }
    }

    /// Outer product `v₁ ∘ v₂ ∘ … ∘ v_d`.
    pub fn outer(vectors: &[&[C64]]) -> Self {
        let shape = vectors.iter().map(|v| v.len()).collect();
        Self::from_fn(shape, |idx| {
            idx.iter()
                .zip(vectors)
                .map(|(&i, v)| v[i])
                .product::<C64>()
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut lin = 0;
        let mut stride = 1;
        for (&i, &n) in idx.iter().zip(&self.shape) {
            debug_assert!(i < n);
            lin += i * stride;
            stride *= n;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        let lin = self.linear_index(idx);
        self.data[lin] = value;
    }

    /// Same entries viewed with a different shape of equal size.
    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entries in column-major order.
    pub fn vectorize(&self) -> Vec<C64> {
        self.data.clone()
    }

    /// `mat_I(t)`: modes in `I` become rows, the rest columns, each merged
    /// with the smallest mode fastest.
    pub fn matricize(&self, modes: &ModeSet) -> Result<CMatrix> {
        self.check_modes(modes)?;
        let rows_modes = modes.modes();
        let cols_modes = modes.complement(self.order());
        let nrows: usize = rows_modes.iter().map(|&m| self.shape[m]).product();
        let ncols: usize = cols_modes.iter().map(|&m| self.shape[m]).product();
        let row_strides = merged_strides(&self.shape, rows_modes);
        let col_strides = merged_strides(&self.shape, &cols_modes);

        let mut out = CMatrix::zeros(nrows, ncols);
        let mut idx = vec![0usize; self.order()];
        let mut row = 0usize;
        let mut col = 0usize;
        // walk entries in storage order, updating row/col incrementally
        for &value in &self.data {
            out[(row, col)] = value;
            for m in 0..self.order() {
                idx[m] += 1;
                let (r, c) = (row_strides[m], col_strides[m]);
                row += r;
                col += c;
                if idx[m] < self.shape[m] {
                    break;
                }
                row -= r * self.shape[m];
                col -= c * self.shape[m];
                idx[m] = 0;
            }
        }
        Ok(out)
    }

    /// Inverse of [`DenseTensor::matricize`].
    pub fn from_matricization(m: &CMatrix, shape: Vec<usize>, modes: &ModeSet) -> Result<Self> {
        let order = shape.len();
        if modes.modes().iter().any(|&x| x >= order) {
            return Err(Error::InvalidModeSet(format!(
                "mode set {:?} invalid for order {order}",
                modes.modes()
            )));
        }
        let cols_modes = modes.complement(order);
        let nrows: usize = modes.modes().iter().map(|&x| shape[x]).product();
        let ncols: usize = cols_modes.iter().map(|&x| shape[x]).product();
        if m.nrows() != nrows || m.ncols() != ncols {
            return Err(Error::Shape(format!(
                "matricization is {}x{}, expected {nrows}x{ncols}",
                m.nrows(),
                m.ncols()
            )));
        }
        let row_strides = merged_strides(&shape, modes.modes());
        let col_strides = merged_strides(&shape, &cols_modes);
        Ok(Self::from_fn(shape, |idx| {
            let row: usize = idx.iter().zip(&row_strides).map(|(i, s)| i * s).sum();
            let col: usize = idx.iter().zip(&col_strides).map(|(i, s)| i * s).sum();
            m[(row, col)]
        }))
    }

    /// Mode-`k` product `t ×_k M`, replacing mode size `n_k` by `M.nrows()`.
    pub fn mode_product(&self, k: usize, m: &CMatrix) -> Result<Self> {
        if k >= self.order() {
            return Err(Error::InvalidModeSet(format!(
                "mode {k} out of range for order {}",
                self.order()
            )));
        }
        let nk = self.shape[k];
        if m.ncols() != nk {
            return Err(Error::DimensionMismatch {
                mode: k,
                expected: nk,
                found: m.ncols(),
            });
        }
        let left: usize = self.shape[..k].iter().product();
        let right: usize = self.shape[k + 1..].iter().product();
        let p = m.nrows();
        let mut shape = self.shape.clone();
        shape[k] = p;
        let mut data = vec![C64::new(0.0, 0.0); left * p * right];
        for r in 0..right {
            for j in 0..nk {
                let src = &self.data[left * (j + nk * r)..left * (j + nk * r + 1)];
                for a in 0..p {
                    let coeff = m[(a, j)];
                    if coeff == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let dst = &mut data[left * (a + p * r)..left * (a + p * r + 1)];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += coeff * s;
                    }
                }
            }
        }
        Ok(Self { shape, data })
    }

    /// `C ×₁ U₁ ×₂ … ×_m U_m` for the first `factors.len()` modes; remaining
    /// modes (e.g. a trailing rank mode) are left untouched.
    pub fn unfold_mode_product(&self, factors: &[CMatrix]) -> Result<Self> {
        if factors.len() > self.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: factors.len(),
            });
        }
        let mut out = self.clone();
        for (k, u) in factors.iter().enumerate() {
            out = out.mode_product(k, u)?;
        }
        Ok(out)
    }

    fn check_modes(&self, modes: &ModeSet) -> Result<()> {
        match modes.modes().last() {
            Some(&m) if m >= self.order() => Err(Error::InvalidModeSet(format!(
                "mode {m} out of range for order {}",
                self.order()
            ))),
            _ => Ok(()),
        }
    }
}

/// Tensor Kronecker product: `C(j_k + i_k m_k) = A(i) B(j)`, so `b`'s index
/// is the fast one in every mode.
pub fn tensor_kronecker(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    if a.order() != b.order() {
        return Err(Error::OrderMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    let shape: Vec<usize> = a.shape.iter().zip(&b.shape).map(|(n, m)| n * m).collect();
    let mut out = DenseTensor::zeros(shape);
    let mut ia = vec![0usize; a.order()];
    let mut joint = vec![0usize; a.order()];
    for &va in &a.data {
        if va != C64::new(0.0, 0.0) {
            let mut ib = vec![0usize; b.order()];
            for &vb in &b.data {
                for k in 0..joint.len() {
                    joint[k] = ib[k] + ia[k] * b.shape[k];
                }
                out.set(&joint, va * vb);
                increment(&mut ib, &b.shape);
            }
        }
        increment(&mut ia, &a.shape);
    }
    Ok(out)
}

/// Kronecker product of column vectors, `a ⊗ b` with `b` fastest.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Column-major vectorization of a matrix.
pub fn vec_matrix(m: &CMatrix) -> Vec<C64> {
    m.as_slice().to_vec()
}

/// Inverse of [`vec_matrix`] for an `n × n` matrix.
pub fn unvec_square(v: &[C64], n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v)
}

fn merged_strides(shape: &[usize], modes: &[usize]) -> Vec<usize> {
    let mut strides = vec![0usize; shape.len()];
    let mut s = 1;
    for &m in modes {
        strides[m] = s;
        s *= shape[m];
    }
    strides
}

fn increment(idx: &mut [usize], shape: &[usize]) {
    for (i, &n) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < n {
            return;
        }
        *i = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::numerical_rank;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_tensor(rng: &mut impl Rng, shape: Vec<usize>) -> DenseTensor {
        DenseTensor::from_fn(shape, |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn vectorize_identity_is_column_stacked() {
        let t = DenseTensor::from_matrix(&CMatrix::identity(2, 2));
        assert_eq!(t.vectorize(), vec![c(1.0), c(0.0), c(0.0), c(1.0)]);
        let s = DenseTensor::new(vec![1, 1], vec![C64::new(2.0, -1.0)]).unwrap();
        assert_eq!(s.vectorize(), vec![C64::new(2.0, -1.0)]);
    }

    #[test]
    fn vec_of_sandwich_matches_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (ra, rx, rb) in [((2, 3), (3, 2), (2, 2)), ((3, 3), (3, 3), (3, 3))] {
            let a = random_matrix(&mut rng, ra.0, ra.1);
            let x = random_matrix(&mut rng, rx.0, rx.1);
            let b = random_matrix(&mut rng, rb.0, rb.1);
            let lhs = vec_matrix(&(&a * &x * b.transpose()));
            let rhs = b.kronecker(&a) * CMatrix::from_column_slice(x.len(), 1, x.as_slice());
            assert!(max_diff(&lhs, rhs.as_slice()) < 1e-14);
        }
    }

    #[test]
    fn matricize_merges_smallest_mode_fastest() {
        let t = DenseTensor::from_fn(vec![2, 3, 4], |i| c((i[0] + 10 * i[1] + 100 * i[2]) as f64));
        let m = t.matricize(&ModeSet::new([0, 2], 3).unwrap()).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (8, 3));
        for i1 in 0..2 {
            for i2 in 0..3 {
                for i3 in 0..4 {
                    assert_eq!(m[(i1 + 2 * i3, i2)], t.get(&[i1, i2, i3]));
                }
            }
        }
        let full = t.matricize(&ModeSet::new(0..3, 3).unwrap()).unwrap();
        assert_eq!(full.ncols(), 1);
        assert_eq!(full.as_slice(), t.data());
    }

    #[test]
    fn matricize_rejects_bad_mode_sets() {
        assert!(matches!(ModeSet::new([], 3), Err(Error::InvalidModeSet(_))));
        assert!(matches!(ModeSet::new([3], 3), Err(Error::InvalidModeSet(_))));
        let t = DenseTensor::zeros(vec![2, 2]);
        let modes = ModeSet::new([2], 3).unwrap();
        assert!(matches!(t.matricize(&modes), Err(Error::InvalidModeSet(_))));
    }

    #[test]
    fn matricize_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_tensor(&mut rng, vec![2, 2, 2]);
        for modes in [vec![0], vec![1], vec![0, 2], vec![1, 2], vec![0, 1, 2]] {
            let set = ModeSet::new(modes, 3).unwrap();
            let m = t.matricize(&set).unwrap();
            let back = DenseTensor::from_matricization(&m, vec![2, 2, 2], &set).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn outer_product_has_unit_matricization_rank() {
        let u = [c(1.0), c(2.0)];
        let v = [c(0.5), C64::new(0.0, 1.0), c(-1.0)];
        let w = [c(3.0), c(1.0)];
        let t = DenseTensor::outer(&[&u, &v, &w]);
        let m = t.matricize(&ModeSet::new([0], 3).unwrap()).unwrap();
        assert_eq!(numerical_rank(&m, 1e-12).unwrap(), 1);
    }

    #[test]
    fn scalar_with_trailing_singleton_gives_rank_one_tucker_operator() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let core = DenseTensor::new(vec![1, 1], vec![c(1.0)]).unwrap();
        let va = CMatrix::from_column_slice(4, 1, a.as_slice());
        let out = core.unfold_mode_product(&[va]).unwrap();
        assert_eq!(out.shape(), &[4, 1]);
        assert_eq!(out.data(), a.as_slice());
    }

    #[test]
    fn identity_factors_leave_core_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_tensor(&mut rng, vec![2, 3, 2]);
        let ids = [CMatrix::identity(2, 2), CMatrix::identity(3, 3), CMatrix::identity(2, 2)];
        assert_eq!(t.unfold_mode_product(&ids).unwrap(), t);
    }

    #[test]
    fn mode_product_satisfies_unfolding_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let core = random_tensor(&mut rng, vec![2, 2, 2]);
        let us: Vec<CMatrix> = (0..3).map(|_| random_matrix(&mut rng, 3, 2)).collect();
        let x = core.unfold_mode_product(&us).unwrap();
        for j in 0..3 {
            let set = ModeSet::new([j], 3).unwrap();
            let lhs = x.matricize(&set).unwrap();
            // ⊗_{i≠j} U_iᵀ in decreasing mode order
            let others: Vec<usize> = (0..3).filter(|&i| i != j).collect();
            let kron = us[others[1]].transpose().kronecker(&us[others[0]].transpose());
            let rhs = &us[j] * core.matricize(&set).unwrap() * kron;
            assert!(max_diff(lhs.as_slice(), rhs.as_slice()) < 1e-13);
        }
    }

    #[test]
    fn mode_product_names_offending_mode() {
        let t = DenseTensor::zeros(vec![2, 3]);
        let err = t.mode_product(1, &CMatrix::zeros(2, 2)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { mode: 1, expected: 3, found: 2 });
    }

    #[test]
    fn kronecker_element_formula() {
        let a = DenseTensor::from_vector(&[c(1.0), c(2.0)]);
        let b = DenseTensor::from_vector(&[c(1.0), c(0.0), c(0.0)]);
        let k = tensor_kronecker(&a, &b).unwrap();
        let expect: Vec<C64> = [1.0, 0.0, 0.0, 2.0, 0.0, 0.0].iter().map(|&x| c(x)).collect();
        assert_eq!(k.data(), expect.as_slice());
    }

    #[test]
    fn kronecker_of_matrices_matches_matrix_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 2, 3);
        let b = random_matrix(&mut rng, 3, 2);
        let k = tensor_kronecker(&DenseTensor::from_matrix(&a), &DenseTensor::from_matrix(&b)).unwrap();
        assert_eq!(k.shape(), &[6, 6]);
        assert!(max_diff(k.data(), a.kronecker(&b).as_slice()) < 1e-15);
    }

    #[test]
    fn kronecker_with_ones_is_identity_and_orders_must_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_tensor(&mut rng, vec![2, 3, 2]);
        let ones = DenseTensor::new(vec![1, 1, 1], vec![c(1.0)]).unwrap();
        assert_eq!(tensor_kronecker(&a, &ones).unwrap(), a);
        assert!(matches!(
            tensor_kronecker(&a, &DenseTensor::zeros(vec![2, 2])),
            Err(Error::OrderMismatch { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest, Strategy};

        fn int_tensor(shape: Vec<usize>) -> impl Strategy<Value = DenseTensor> {
            let len: usize = shape.iter().product();
            prop::collection::vec(-3i32..=3, len).prop_map(move |v| {
                DenseTensor::new(shape.clone(), v.into_iter().map(|x| c(x as f64)).collect()).unwrap()
            })
        }

        proptest! {
            #[test]
            fn matricize_inverse_round_trips(t in int_tensor(vec![2, 3, 2, 2]), mask in 1u8..15) {
                let modes: Vec<usize> = (0..4).filter(|m| mask & (1 << m) != 0).collect();
                let set = ModeSet::new(modes, 4).unwrap();
                let m = t.matricize(&set).unwrap();
                prop_assert_eq!(DenseTensor::from_matricization(&m, t.shape().to_vec(), &set).unwrap(), t);
            }

            #[test]
            fn matricization_rank_is_transpose_symmetric(seed in any::<u64>(), mask in 1u8..15) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                // rank-deficient tensor: sum of two outer products
                let vs: Vec<Vec<C64>> = (0..8).map(|_| (0..2).map(|_| c(rng.random_range(-1.0..1.0))).collect()).collect();
                let t1 = DenseTensor::outer(&[&vs[0], &vs[1], &vs[2], &vs[3]]);
                let t2 = DenseTensor::outer(&[&vs[4], &vs[5], &vs[6], &vs[7]]);
                let t = DenseTensor::new(vec![2; 4], t1.data().iter().zip(t2.data()).map(|(a, b)| a + b).collect()).unwrap();
                let set = ModeSet::new((0..4).filter(|m| mask & (1 << m) != 0), 4).unwrap();
                let comp = ModeSet::new((0..4).filter(|m| mask & (1 << m) == 0), 4);
                let r = numerical_rank(&t.matricize(&set).unwrap(), 1e-10).unwrap();
                if let Ok(comp) = comp {
                    let rc = numerical_rank(&t.matricize(&comp).unwrap().transpose(), 1e-10).unwrap();
                    prop_assert_eq!(r, rc);
                }
                prop_assert!(r <= 2);
            }

            #[test]
            fn kronecker_is_associative(a in int_tensor(vec![2, 1, 2]), b in int_tensor(vec![1, 2, 2]), c3 in int_tensor(vec![2, 2, 1])) {
                let left = tensor_kronecker(&tensor_kronecker(&a, &b).unwrap(), &c3).unwrap();
                let right = tensor_kronecker(&a, &tensor_kronecker(&b, &c3).unwrap()).unwrap();
                prop_assert_eq!(left, right);
            }
        }
    }
}
