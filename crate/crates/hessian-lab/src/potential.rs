//! Closed-form test potentials.
//!
//! Coordinates are interleaved real pairs: a point in complex dimension n is
//! `[x_1, y_1, x_2, y_2, …]` with `z_j = x_j + i·y_j`. Periodic potentials
//! have period 1 in every coordinate; the log-type potentials live on the
//! centered fundamental chart `[−1/2, 1/2)^{2n}` and are flagged
//! non-periodic, which makes every field sampled from them chart-local.

use crate::hermitian::HermitianMatrix;
use crate::singular::LogMaxSpec;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub enum ClosedFormPotential {
    Zero,
    Constant {
        value: f64,
    },
    /// c·|z|² on the chart.
    Quadratic {
        c: f64,
    },
    /// c·Re(z_axis²) = c·(x² − y²) on the chart: pluriharmonic, so its
    /// complex Hessian vanishes identically — the stencil kernel test case.
    PluriharmonicQuadratic {
        axis: usize,
        c: f64,
    },
    /// c·cos(2π(x_axis − sx))·cos(2π(y_axis − sy)): periodic, one complex
    /// axis, real diagonal Hessian contribution.
    TrigMode {
        axis: usize,
        c: f64,
        shift_x: f64,
        shift_y: f64,
    },
    /// c·cos(2π(x_{ax} − sx))·cos(2π(y_{ay} − sy)) with ax ≠ ay: periodic
    /// cross mode whose complex Hessian has a genuinely imaginary
    /// off-diagonal entry.
    TrigCross {
        axis_x: usize,
        axis_y: usize,
        c: f64,
        shift_x: f64,
        shift_y: f64,
    },
    /// Regularized smooth-max of weighted logs (see [`crate::singular`]).
    LogMax(LogMaxSpec),
    /// (c/2)·log(‖z‖² + ε²): the isotropic regularized log-norm pole.
    IsotropicLog {
        c: f64,
        eps: f64,
    },
    /// (c/2)·log(|z_axis|² + ε²): a single regularized log branch.
    BranchLog {
        axis: usize,
        c: f64,
        eps: f64,
    },
    Sum(Vec<ClosedFormPotential>),
}

impl ClosedFormPotential {
    /// Standard separable trig instance: amp·Σ_j cos(2πx_j)cos(2πy_j).
    pub fn separable_trig(n: usize, amp: f64) -> Self {
        Self::Sum(
            (0..n)
                .map(|axis| Self::TrigMode {
                    axis,
                    c: amp,
                    shift_x: 0.0,
                    shift_y: 0.0,
                })
                .collect(),
        )
    }

    pub fn is_periodic(&self) -> bool {
        match self {
            Self::Zero | Self::Constant { .. } => true,
            Self::TrigMode { .. } | Self::TrigCross { .. } => true,
            Self::Quadratic { .. }
            | Self::PluriharmonicQuadratic { .. }
            | Self::LogMax(_)
            | Self::IsotropicLog { .. }
            | Self::BranchLog { .. } => false,
            Self::Sum(parts) => parts.iter().all(|p| p.is_periodic()),
        }
    }

    /// Evaluation at an interleaved coordinate point (length 2n).
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant { value } => *value,
            Self::Quadratic { c } => c * p.iter().map(|v| v * v).sum::<f64>(),
            Self::PluriharmonicQuadratic { axis, c } => {
                let (x, y) = (p[2 * axis], p[2 * axis + 1]);
                c * (x * x - y * y)
            }
            Self::TrigMode {
                axis,
                c,
                shift_x,
                shift_y,
            } => {
                let x = p[2 * axis] - shift_x;
                let y = p[2 * axis + 1] - shift_y;
                c * (2.0 * PI * x).cos() * (2.0 * PI * y).cos()
            }
            Self::TrigCross {
                axis_x,
                axis_y,
                c,
                shift_x,
                shift_y,
            } => {
                let x = p[2 * axis_x] - shift_x;
                let y = p[2 * axis_y + 1] - shift_y;
                c * (2.0 * PI * x).cos() * (2.0 * PI * y).cos()
            }
            Self::LogMax(spec) => spec.eval(p),
            Self::IsotropicLog { c, eps } => {
                let r2 = p.iter().map(|v| v * v).sum::<f64>();
                0.5 * c * (r2 + eps * eps).ln()
            }
            Self::BranchLog { axis, c, eps } => {
                let (x, y) = (p[2 * axis], p[2 * axis + 1]);
                0.5 * c * (x * x + y * y + eps * eps).ln()
            }
            Self::Sum(parts) => parts.iter().map(|q| q.eval(p)).sum(),
        }
    }

    /// Analytic complex Hessian at a point, for the potentials whose
    /// calculus is closed-form (trig and quadratic families). Returns `None`
    /// for the log-type potentials — their analysis lives in the radial
    /// engine of [`crate::singular`].
    pub fn analytic_hessian(&self, n: usize, p: &[f64]) -> Option<HermitianMatrix> {
        match self {
            Self::Zero | Self::Constant { .. } | Self::PluriharmonicQuadratic { .. } => {
                Some(HermitianMatrix::zero(n))
            }
            Self::Quadratic { c } => Some(HermitianMatrix::diagonal(&vec![*c; n])),
            Self::TrigMode {
                axis,
                c,
                shift_x,
                shift_y,
            } => {
                let x = p[2 * axis] - shift_x;
                let y = p[2 * axis + 1] - shift_y;
                let w = 2.0 * PI;
                // ∂²/∂z∂z̄ = ¼(∂²/∂x² + ∂²/∂y²) on a single complex axis.
                let h = -0.5 * w * w * c * (w * x).cos() * (w * y).cos();
                let mut d = vec![0.0; n];
                d[*axis] = h;
                Some(HermitianMatrix::diagonal(&d))
            }
            Self::TrigCross {
                axis_x,
                axis_y,
                c,
                shift_x,
                shift_y,
            } => {
                let (a, b) = (*axis_x, *axis_y);
                let x = p[2 * a] - shift_x;
                let y = p[2 * b + 1] - shift_y;
                let w = 2.0 * PI;
                let quarter = 0.25 * w * w * c;
                let diag = -quarter * (w * x).cos() * (w * y).cos();
                let off = quarter * (w * x).sin() * (w * y).sin();
                let mut entries = vec![C64::new(0.0, 0.0); n * n];
                entries[a * n + a] = C64::new(diag, 0.0);
                entries[b * n + b] = C64::new(diag, 0.0);
                // H[a][b] = ¼·i·u_{x_a y_b}; the x-x, y-y cross derivatives
                // vanish because the mode only involves (x_a, y_b).
                entries[a * n + b] = C64::new(0.0, off);
                entries[b * n + a] = C64::new(0.0, -off);
                HermitianMatrix::new(n, entries).ok()
            }
            Self::Sum(parts) => {
                let mut acc = HermitianMatrix::zero(n);
                for q in parts {
                    acc = acc.plus(&q.analytic_hessian(n, p)?).ok()?;
                }
                Some(acc)
            }
            Self::LogMax(_) | Self::IsotropicLog { .. } | Self::BranchLog { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodicity_flags() {
        assert!(ClosedFormPotential::separable_trig(2, 0.02).is_periodic());
        assert!(!ClosedFormPotential::Quadratic { c: 1.0 }.is_periodic());
        let mixed = ClosedFormPotential::Sum(vec![
            ClosedFormPotential::separable_trig(2, 0.02),
            ClosedFormPotential::Quadratic { c: 1.0 },
        ]);
        assert!(!mixed.is_periodic());
    }

    #[test]
    fn trig_mode_matches_hand_values() {
        let u = ClosedFormPotential::TrigMode {
            axis: 1,
            c: 0.5,
            shift_x: 0.0,
            shift_y: 0.25,
        };
        // x_2 = 1/3, y_2 = 1/4 ⇒ cos(2π/3)·cos(0) = −1/2.
        let v = u.eval(&[0.9, 0.9, 1.0 / 3.0, 0.25]);
        assert!((v - 0.5 * (-0.5)).abs() < 1e-14);
    }

    #[test]
    fn cross_mode_hessian_is_hermitian_with_imaginary_offdiagonal() {
        let u = ClosedFormPotential::TrigCross {
            axis_x: 0,
            axis_y: 1,
            c: 0.7,
            shift_x: 0.0,
            shift_y: 0.0,
        };
        let p = [0.13, 0.4, 0.2, 0.31];
        let h = u.analytic_hessian(2, &p).unwrap();
        assert_eq!(h.get(0, 1).re, 0.0);
        assert!(h.get(0, 1).im.abs() > 1e-3);
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
    }

    #[test]
    fn pluriharmonic_quadratic_has_vanishing_complex_hessian() {
        let u = ClosedFormPotential::PluriharmonicQuadratic { axis: 0, c: 17.0 };
        let h = u.analytic_hessian(2, &[0.3, -0.2, 0.1, 0.05]).unwrap();
        assert_eq!(h.max_abs_entry(), 0.0);
        // But the function itself is far from constant.
        assert!((u.eval(&[0.3, -0.2, 0.0, 0.0]) - 17.0 * (0.09 - 0.04)).abs() < 1e-12);
    }

    #[test]
    fn quadratic_hessian_is_the_identity_times_c() {
        let u = ClosedFormPotential::Quadratic { c: 1.0 };
        let h = u.analytic_hessian(3, &[0.1; 6]).unwrap();
        assert_eq!(h, HermitianMatrix::identity(3));
    }
}
