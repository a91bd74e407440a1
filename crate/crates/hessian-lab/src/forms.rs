//! Brute-force exterior-algebra oracle.
//!
//! Expands a top-degree wedge product of n constant-coefficient (1,1)-forms
//! over all (n!)² permutation pairs. This is deliberately the slowest,
//! most literal computation in the crate: it shares no code with the
//! polarization/eigenvalue route in [`crate::hermitian`], which is exactly
//! what makes it a trustworthy cross-check. Capped at n ≤ 5.

use crate::error::{LabError, Result};
use crate::hermitian::{HermitianMatrix, Metric};
use crate::sum::NeumaierComplex;
use crate::tol;

/// Maximum dimension the oracle accepts ((n!)² = 14 400 terms at n = 5).
pub const MAX_WEDGE_DIM: usize = 5;

/// Constant-coefficient (1,1)-form, represented by its Hermitian coefficient
/// matrix on the standard basis (realness of the form = self-adjointness of
/// the matrix, which the inner type enforces).
#[derive(Clone, Debug)]
pub struct OneOneForm {
    a: HermitianMatrix,
}

impl OneOneForm {
    pub fn new(a: HermitianMatrix) -> Self {
        Self { a }
    }

    pub fn from_metric(g: &Metric) -> Self {
        Self {
            a: g.matrix().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn coefficients(&self) -> &HermitianMatrix {
        &self.a
    }
}

/// All permutations of 0..n with their signs, via Heap's algorithm.
fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::with_capacity((1..=n).product());
    let mut items: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    out.push((items.clone(), sign));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            sign = -sign;
            out.push((items.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Coefficient of the top-degree wedge of exactly n forms relative to the
/// standard volume element:
///
/// Σ_{σ,τ ∈ S_n} sgn(σ)·sgn(τ) · Π_j a^{(j)}[σ(j)][τ(j)]
///
/// accumulated with compensated summation (the sum alternates in sign and
/// cancels heavily). The result is real for self-adjoint inputs; the
/// residual imaginary part is asserted below `WEDGE_IMAG_TOL`.
pub fn wedge_top_coefficient(forms: &[OneOneForm]) -> Result<f64> {
    let Some(first) = forms.first() else {
        return Err(LabError::Dimension {
            op: "wedge_top_coefficient",
            expected: 1,
            actual: 0,
        });
    };
    let n = first.dim();
    if n > MAX_WEDGE_DIM {
        return Err(LabError::WedgeTooBig {
            n,
            max: MAX_WEDGE_DIM,
        });
    }
    if forms.len() != n || forms.iter().any(|f| f.dim() != n) {
        return Err(LabError::Dimension {
            op: "wedge_top_coefficient",
            expected: n,
            actual: forms.len(),
        });
    }

    let perms = permutations_with_sign(n);
    let mut acc = NeumaierComplex::new();
    let mut magnitude = 0.0f64;
    for (sigma, s_sign) in &perms {
        for (tau, t_sign) in &perms {
            let mut prod = num_complex::Complex64::new(*s_sign * *t_sign, 0.0);
            for (j, form) in forms.iter().enumerate() {
                prod *= form.a.get(sigma[j], tau[j]);
            }
            magnitude += prod.norm();
            acc.add(prod);
        }
    }
    let v = acc.value();
    if v.im.abs() > tol::WEDGE_IMAG_TOL * magnitude.max(1.0) {
        return Err(LabError::NonFinite {
            op: "wedge_top_coefficient imaginary residue",
        });
    }
    Ok(v.re)
}

/// Mixed Hessian density via the oracle route: wedge m factor forms with
/// (n−m) copies of the metric form and normalize by the metric's own top
/// wedge. Fully independent of the Cholesky/eigenvalue pipeline.
pub fn oracle_mixed_density(mats: &[HermitianMatrix], g: &Metric) -> Result<f64> {
    let n = g.dim();
    let m = mats.len();
    if m == 0 || m > n {
        return Err(LabError::IndexRange {
            op: "oracle_mixed_density arity",
            index: m,
            max: n,
        });
    }
    let mut forms: Vec<OneOneForm> = mats.iter().cloned().map(OneOneForm::new).collect();
    for _ in m..n {
        forms.push(OneOneForm::from_metric(g));
    }
    let num = wedge_top_coefficient(&forms)?;
    let den = wedge_top_coefficient(&vec![OneOneForm::from_metric(g); n])?;
    Ok(num / den)
}

/// The constant relating the wedge coefficient of m generic-diagonal factors
/// (padded with identities) to sigma_m of the diagonal: measured, not
/// assumed. Equals m!·(n−m)! and is independent of the generic input, which
/// the tests verify on distinct inputs.
pub fn normalization_constant(n: usize, m: usize) -> Result<f64> {
    if m == 0 || m > n || n > MAX_WEDGE_DIM {
        return Err(LabError::IndexRange {
            op: "normalization_constant",
            index: m,
            max: n.min(MAX_WEDGE_DIM),
        });
    }
    // Fixed generic diagonal: pairwise distinct, irrational spacing.
    let d: Vec<f64> = (0..n)
        .map(|i| 1.0 + (i as f64 + 1.0) * std::f64::consts::SQRT_2 * 0.35)
        .collect();
    measured_constant(&d, n, m)
}

fn measured_constant(d: &[f64], n: usize, m: usize) -> Result<f64> {
    let diag = OneOneForm::new(HermitianMatrix::diagonal(d));
    let ident = OneOneForm::new(HermitianMatrix::identity(n));
    let mut forms = vec![diag; m];
    forms.extend(vec![ident; n - m]);
    let wedge = wedge_top_coefficient(&forms)?;
    let sigma = crate::hermitian::sigma_k(d, m)?;
    Ok(wedge / sigma)
}
