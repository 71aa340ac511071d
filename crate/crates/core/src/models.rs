//! Spin-½ chain Hamiltonians: a closed long-range model, its Lindbladian
//! open-system counterpart and a synthetic model with a cosine interaction.

use crate::build::{InteractionFamily, PairwiseHamiltonianSpec};
use crate::hss::InteractionMatrix;
use crate::{CMatrix, Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// `σ_x = [[0, 1], [1, 0]]`.
pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

/// `n = diag(1, 0)`.
pub fn number_op() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO])
}

/// `J = [[0, 0], [1, 0]]`.
pub fn jump_op() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

/// Parameters shared by the three models. `alpha = f64::INFINITY` means
/// nearest-neighbour coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinModelParams {
    pub d: usize,
    pub alpha: f64,
    pub omega: f64,
    pub delta: f64,
    pub nu: f64,
    pub gamma: f64,
    pub eps: f64,
}

impl Default for SpinModelParams {
    fn default() -> Self {
        Self { d: 8, alpha: 1.0, omega: 3.0, delta: -2.0, nu: 2.0, gamma: 0.0, eps: 1e-12 }
    }
}

impl SpinModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::TooFewSites);
        }
        if !(self.eps >= 0.0) {
            return Err(Error::InvalidSpec(format!("tolerance must be nonnegative, got {}", self.eps)));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidSpec(format!("decay exponent must be nonnegative, got {}", self.alpha)));
        }
        if ![self.omega, self.delta, self.nu, self.gamma].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

/// `β(i,j) = scale / (j − i)^α`; `α = ∞` keeps only `j = i + 1`.
pub fn beta_power_law(d: usize, alpha: f64, scale: C64) -> InteractionMatrix {
    InteractionMatrix::from_fn(d, |i, j| {
        let dist = (j - i) as f64;
        if alpha.is_infinite() {
            if j == i + 1 {
                scale
            } else {
                ZERO
            }
        } else {
            scale / dist.powf(alpha)
        }
    })
}

/// `β(i,j) = 1 / (1 − cos(j − i))`, argument in radians.
pub fn beta_cosine(d: usize) -> InteractionMatrix {
    InteractionMatrix::from_fn(d, |i, j| C64::new(1.0 / (1.0 - ((j - i) as f64).cos()), 0.0))
}

/// `c_α = Σ_{k=1}^{d} k^{−α}`, equal to 1 for `α = ∞`.
pub fn c_alpha(d: usize, alpha: f64) -> f64 {
    if alpha.is_infinite() {
        return 1.0;
    }
    (1..=d).map(|k| (k as f64).powf(-alpha)).sum()
}

/// `Ω σ_x + Δ n`.
pub fn closed_single_site(omega: f64, delta: f64) -> CMatrix {
    sigma_x() * C64::new(omega, 0.0) + number_op() * C64::new(delta, 0.0)
}

/// Single-site Lindbladian on a vectorized 2×2 density matrix:
/// `Ω(−i σ_x⊗I + i I⊗σ_xᵀ) + Δ(−i n⊗I + i I⊗nᵀ)
///  + γ(J⊗(Jᴴ)ᵀ − ½ JᴴJ⊗I − ½ I⊗(JᴴJ)ᵀ)`.
pub fn open_single_site(omega: f64, delta: f64, gamma: f64) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let commutator = |h: &CMatrix| h.kronecker(&id) * (-I) + id.kronecker(&h.transpose()) * I;
    let j = jump_op();
    let jj = j.adjoint() * &j;
    let dissipator = j.kronecker(&j.adjoint().transpose())
        - jj.kronecker(&id) * C64::new(0.5, 0.0)
        - id.kronecker(&jj.transpose()) * C64::new(0.5, 0.0);
    commutator(&sigma_x()) * C64::new(omega, 0.0)
        + commutator(&number_op()) * C64::new(delta, 0.0)
        + dissipator * C64::new(gamma, 0.0)
}

/// `Σ_k (Ω σ_x + Δ n)^{(k)} + ν Σ_{i<j} (j−i)^{−α} n^{(i)} n^{(j)}`.
pub fn closed_system_spec(p: &SpinModelParams) -> Result<PairwiseHamiltonianSpec> {
    p.validate()?;
    let beta = beta_power_law(p.d, p.alpha, C64::new(p.nu, 0.0));
    spin_spec(p, beta)
}

/// Same single-site part as the closed model with `β(i,j) = 1/(1 − cos(j−i))`.
pub fn synthetic_spec(p: &SpinModelParams) -> Result<PairwiseHamiltonianSpec> {
    p.validate()?;
    spin_spec(p, beta_cosine(p.d))
}

fn spin_spec(p: &SpinModelParams, beta: InteractionMatrix) -> Result<PairwiseHamiltonianSpec> {
    let fam = InteractionFamily { beta, ops: vec![number_op(); p.d] };
    let ss = vec![closed_single_site(p.omega, p.delta); p.d];
    PairwiseHamiltonianSpec::new(vec![2; p.d], vec![fam], Some(ss))
}

/// Lindbladian on `d` sites of dimension 4 with interaction families
/// `(−iν/(2c_α)) (j−i)^{−α}` on `n⊗I` and `(+iν/(2c_α)) (j−i)^{−α}` on `I⊗nᵀ`.
pub fn open_system_spec(p: &SpinModelParams) -> Result<PairwiseHamiltonianSpec> {
    p.validate()?;
    let id = CMatrix::identity(2, 2);
    let scale = p.nu / (2.0 * c_alpha(p.d, p.alpha));
    let left = InteractionFamily {
        beta: beta_power_law(p.d, p.alpha, -I * scale),
        ops: vec![number_op().kronecker(&id); p.d],
    };
    let right = InteractionFamily {
        beta: beta_power_law(p.d, p.alpha, I * scale),
        ops: vec![id.kronecker(&number_op().transpose()); p.d],
    };
    let ss = vec![open_single_site(p.omega, p.delta, p.gamma); p.d];
    PairwiseHamiltonianSpec::new(vec![4; p.d], vec![left, right], Some(ss))
}
