//! Centralized numerical tolerances.
//!
//! Every magic number a check depends on lives here with its justification,
//! so tolerances are auditable in one place and cannot silently drift apart
//! between a check and its test.

/// Cone-membership tolerance: `sigma_k >= -CONE_TOL * |lambda|_max^k`.
///
/// S_k is homogeneous of degree k, so an absolute tolerance must scale with
/// the k-th power of the eigenvalue magnitude. 1e-12 absorbs the backward
/// error of the eigensolve on O(1) matrices with two orders of headroom.
pub const CONE_TOL: f64 = 1e-12;

/// Half-width of the cone-boundary band inside which the S_k route and the
/// eps-perturbation route are allowed to disagree (scaled like `CONE_TOL`).
/// Outside this band the two characterizations must coincide exactly.
pub const CONE_BOUNDARY_AGREE_TOL: f64 = 1e-7;

/// Lower bound for Gårding mixed margins on cone samples, scaled by
/// max(1, geometric mean). The inequality is exact in real arithmetic;
/// 1e-9 absorbs accumulated eigensolve error over 2^m subset sums.
pub const GARDING_MARGIN_TOL: f64 = 1e-9;

/// Relative tolerance for polarization-diagonal consistency and argument
/// permutation invariance (pure algebra; only summation order varies).
pub const DIAGONAL_EQUALITY_TOL: f64 = 1e-12;

/// Relative tolerance for agreement between the polarization route and the
/// exterior-algebra oracle (two genuinely independent computations).
pub const ORACLE_EQUIV_TOL: f64 = 1e-10;

/// Residual imaginary part allowed in a wedge-top coefficient, relative to
/// the magnitude of the accumulated sum.
pub const WEDGE_IMAG_TOL: f64 = 1e-12;

/// Mass-conservation tolerance at the reference grid `MASS_TOL_REF_GRID`;
/// scales as h² (second-order stencils): tol(N) = MASS_TOL_REF·(N_ref/N)².
pub const MASS_TOL_REF: f64 = 1e-3;
pub const MASS_TOL_REF_GRID: usize = 64;

/// Mass-conservation tolerance for `points_per_axis = n_axis`.
pub fn mass_tol(points_per_axis: usize) -> f64 {
    let r = MASS_TOL_REF_GRID as f64 / points_per_axis as f64;
    MASS_TOL_REF * r * r
}

/// Factor by which the mass-conservation error must shrink when h halves
/// (asymptotically 4 for second-order stencils; 3.5 leaves pre-asymptotic
/// slack).
pub const MASS_SHRINK_FACTOR: f64 = 3.5;

/// Errors below this are treated as exactly zero in convergence-ratio
/// checks: 0/0 from instances the stencil resolves exactly (separable trig,
/// m = 1 telescoping) is a pass, not a division.
pub const MASS_ERR_FLOOR: f64 = 1e-10;

/// A field that verifies as m-subharmonic may still show density this far
/// below zero from stencil round-off; anything lower is a real negativity.
pub const DENSITY_NONNEG_TOL: f64 = 1e-10;

/// Pointwise margin floor for the field-level mixed Hessian inequality on
/// verified m-sh inputs. The continuum margin is >= 0; discrete Hessians sit
/// O(h²) from the cone interior and the margin function is flat (quadratic)
/// at its zeros, so the discrete dip is O(h⁴) — 1e-6 is generous.
pub const FIELD_MIXED_MARGIN_TOL: f64 = 1e-6;

/// Relative tolerance on singular-mass ratios a(k)/b(k) against k³.
pub const RATIO_TOL_REL: f64 = 0.05;

/// Relative margin used by the violation verdict: a violation is declared
/// when b < a·(1 − VIOLATION_MARGIN_REL). 0.2 cleanly separates the k=1
/// equality trend (ratio 1) from the smallest violating case k>1 measured
/// on the default ladder (k=2: b/a ≈ 1/8).
pub const VIOLATION_MARGIN_REL: f64 = 0.2;

/// Allowed spread (max/min) among calibration-constant candidates measured
/// from the 1-D mass and every a(k), b(k): all must reconcile within 5%.
pub const CONV_SPREAD_TOL: f64 = 1.05;

/// Required resolution coupling for regularized potentials: h <= eps/EPS_H_FACTOR.
/// Coarser grids alias the Dirac-like concentration.
pub const EPS_H_FACTOR: f64 = 8.0;

/// Oversampling actually used by the radial quadrature (h = eps/32): the
/// mass integrand varies on scale eps and midpoint quadrature at eps/32
/// keeps its bias inside the ratio tolerances above.
pub const EPS_H_INTERNAL: f64 = 32.0;

/// Relative agreement required between the 2-D radial quadrature and the
/// full 4-D chart-grid pipeline on the coarse cross-check instance
/// (eps = 0.25, where the 4-D grid is affordable; both sides carry a few
/// percent of discretization error of their own).
pub const RADIAL_VS_GRID_TOL: f64 = 0.08;

/// Mass stability in the mask radius: < 2% when r varies within [r0, 2·r0]
/// once eps << r0 (the mass concentrates at the singular set).
pub const MASS_R_STABILITY_TOL: f64 = 0.02;

/// Successive W^{1,2} increments must shrink at least by this factor for a
/// bounded verdict (measured ratios ≈ 0.5 for the k=1 ladder; 0.85 also
/// rejects the log-divergent single-branch instance, whose increments grow).
pub const W12_INCREMENT_DECAY: f64 = 0.85;

/// Relative trend tolerance for the singular mass along the eps-ladder:
/// the last two entries must agree within 5%.
pub const MASS_TREND_TOL: f64 = 0.05;

/// Noise floor for gradient-energy increments, relative to the sequence
/// scale. Midpoint quadrature re-grids for every eps, so even an exactly
/// eps-independent energy moves by O(h^2) between ladder steps; increments
/// below this floor count as converged rather than growing.
pub const W12_TREND_FLOOR_REL: f64 = 1e-4;

/// Domination-principle conclusion tolerance in grid cells: tol_dom = 10·h.
pub const DOMINATION_TOL_CELLS: f64 = 10.0;

/// eps-perturbation criterion probe grid: log-spaced range (inclusive).
pub const EPS_PROBE_MIN: f64 = 1e-6;
pub const EPS_PROBE_MAX: f64 = 1e2;
pub const EPS_PROBE_COUNT: usize = 81;
