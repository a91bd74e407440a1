//! Uniform grids on the unit torus and sampled scalar fields.
//!
//! A `TorusGrid` discretizes `[0,1)^{2n}` (real coordinates, interleaved as
//! in [`crate::potential`]) with `N` nodes per axis, `h = 1/N`. Node `i`
//! carries the centered coordinate `(i − N/2)·h ∈ [−1/2, 1/2)`, so the same
//! index map serves both periodic fields (where the origin is irrelevant)
//! and chart-local fields of non-periodic potentials, which are only
//! meaningful away from the chart boundary.
//!
//! Derivative stencils are the standard second-order ones:
//! `D_pp u = (u(+e_p) − 2u + u(−e_p))/h²` on a single axis and
//! `D_pq u = (u(+e_p+e_q) − u(+e_p−e_q) − u(−e_p+e_q) + u(−e_p−e_q))/(4h²)`
//! across axes. The complex Hessian entry on complex axes `(a,b)` is
//! `H[a][b] = ¼[(D_{x_a x_b} + D_{y_a y_b}) + i(D_{x_a y_b} − D_{y_a x_b})]`,
//! which is exactly Hermitian by construction — no post-symmetrization.

use crate::error::{LabError, Result};
use crate::hermitian::HermitianMatrix;
use crate::potential::ClosedFormPotential;
use crate::sum::ChunkedSum;
use num_complex::Complex64 as C64;

/// Hard cap on total grid nodes: one `f64` field at the cap is ~2.4 GB, the
/// largest a single-field streaming pass can afford here.
pub const MAX_TOTAL_POINTS: u128 = 300_000_000;
/// Minimum nodes per axis for the stencils to have room.
pub const MIN_SIDE: usize = 8;
/// Chart-local fields support derivative stencils only at nodes at least
/// this many cells from the chart boundary on every axis.
pub const CHART_MARGIN: usize = 2;

/// Entry cap for materializing a full Hessian field (≈128 MB of `C64`).
const MAX_MATERIALIZED_ENTRIES: u128 = 8_000_000;

/// Periodic single-cell step without integer division.
#[inline]
pub(crate) fn wrap_step(i: usize, d: isize, side: usize) -> usize {
    if d >= 0 {
        let j = i + d as usize;
        if j >= side {
            j - side
        } else {
            j
        }
    } else {
        let dd = (-d) as usize;
        if i >= dd {
            i - dd
        } else {
            i + side - dd
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid {
    n: usize,
    side: usize,
    h: f64,
    strides: Vec<usize>,
    total: usize,
}

impl TorusGrid {
    pub fn new(n: usize, side: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Grid(
                "complex dimension must be at least 1".into(),
            ));
        }
        if side < MIN_SIDE || side % 2 != 0 {
            return Err(LabError::Grid(format!(
                "side must be even and at least {MIN_SIDE}, got {side}"
            )));
        }
        let axes = 2 * n;
        let total_wide = (side as u128).pow(axes as u32);
        if total_wide > MAX_TOTAL_POINTS {
            return Err(LabError::Grid(format!(
                "grid of {side}^{axes} = {total_wide} nodes exceeds the cap of {MAX_TOTAL_POINTS}"
            )));
        }
        let total = total_wide as usize;
        let mut strides = vec![1usize; axes];
        for a in (0..axes.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * side;
        }
        Ok(Self {
            n,
            side,
            h: 1.0 / side as f64,
            strides,
            total,
        })
    }

    pub fn complex_dim(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn axes(&self) -> usize {
        2 * self.n
    }

    pub fn total_points(&self) -> usize {
        self.total
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Volume of one grid cell, `h^{2n}`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.axes() as i32)
    }

    /// Centered coordinate of node `i` on any axis.
    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.side / 2) as f64) * self.h
    }

    #[inline]
    pub fn flat_of(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(self.strides.iter())
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn decode(&self, flat: usize, multi: &mut [usize]) {
        let mut rest = flat;
        for (a, s) in self.strides.iter().enumerate() {
            multi[a] = rest / s;
            rest %= s;
        }
    }

    pub fn point(&self, multi: &[usize], out: &mut [f64]) {
        for (o, &i) in out.iter_mut().zip(multi.iter()) {
            *o = self.coordinate(i);
        }
    }

    /// Whether a node keeps `CHART_MARGIN` cells of clearance from the chart
    /// boundary on every axis — the validity region for chart-local stencils.
    pub fn chart_interior(&self, multi: &[usize]) -> bool {
        multi
            .iter()
            .all(|&i| i >= CHART_MARGIN && i + CHART_MARGIN < self.side)
    }

    /// Visits every node in flat order, handing the callback the flat index,
    /// multi-index, and coordinates. The odometer walk keeps per-node cost
    /// O(1) amortized, which matters at hundreds of millions of nodes.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[usize], &[f64])) {
        let axes = self.axes();
        let mut multi = vec![0usize; axes];
        let mut point = vec![self.coordinate(0); axes];
        for flat in 0..self.total {
            f(flat, &multi, &point);
            for a in (0..axes).rev() {
                multi[a] += 1;
                if multi[a] == self.side {
                    multi[a] = 0;
                    point[a] = self.coordinate(0);
                } else {
                    point[a] = self.coordinate(multi[a]);
                    break;
                }
            }
        }
    }
}

/// A sampled scalar field. `chart` records whether the source potential was
/// non-periodic, in which case wrap-around stencils are meaningless and all
/// derivative access is restricted to the chart interior.
#[derive(Clone, Debug)]
pub struct TorusField {
    grid: TorusGrid,
    chart: bool,
    values: Vec<f64>,
}

impl TorusField {
    /// Samples a potential at every node, rejecting non-finite values.
    pub fn sample(grid: &TorusGrid, u: &ClosedFormPotential) -> Result<Self> {
        let mut values = vec![0.0f64; grid.total_points()];
        let mut bad = false;
        grid.for_each_point(|flat, _multi, point| {
            let v = u.eval(point);
            bad |= !v.is_finite();
            values[flat] = v;
        });
        if bad {
            return Err(LabError::NonFinite {
                op: "TorusField::sample",
            });
        }
        Ok(Self {
            grid: grid.clone(),
            chart: !u.is_periodic(),
            values,
        })
    }

    pub fn from_values(grid: &TorusGrid, chart: bool, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(LabError::Dimension {
                op: "TorusField::from_values",
                expected: grid.total_points(),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite {
                op: "TorusField::from_values",
            });
        }
        Ok(Self {
            grid: grid.clone(),
            chart,
            values,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn is_chart(&self) -> bool {
        self.chart
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, multi: &[usize]) -> f64 {
        self.values[self.grid.flat_of(multi)]
    }

    /// Neighbor value with the node shifted by ±1 cell along one axis
    /// (periodic wrap; chart validity is the caller's responsibility and is
    /// enforced by the public derivative entry points). Branches instead of
    /// dividing — these lookups dominate every streaming pass.
    #[inline]
    fn shifted(&self, multi: &[usize], axis: usize, d: isize) -> f64 {
        let i = wrap_step(multi[axis], d, self.grid.side);
        let base = self.grid.flat_of(multi);
        let here = multi[axis] * self.grid.strides[axis];
        self.values[base - here + i * self.grid.strides[axis]]
    }

    #[inline]
    fn shifted2(&self, multi: &[usize], p: usize, dp: isize, q: usize, dq: isize) -> f64 {
        let ip = wrap_step(multi[p], dp, self.grid.side);
        let iq = wrap_step(multi[q], dq, self.grid.side);
        let base = self.grid.flat_of(multi);
        let sp = self.grid.strides[p];
        let sq = self.grid.strides[q];
        self.values[base - multi[p] * sp - multi[q] * sq + ip * sp + iq * sq]
    }

    fn require_stencil_valid(&self, multi: &[usize], op: &'static str) -> Result<()> {
        if self.chart && !self.grid.chart_interior(multi) {
            return Err(LabError::Grid(format!(
                "{op}: node {multi:?} is within {CHART_MARGIN} cells of the chart boundary \
                 of a non-periodic field (side {})",
                self.grid.side
            )));
        }
        Ok(())
    }

    /// Second cross difference along real axes `p, q` (`p ≠ q`).
    #[inline]
    fn cross(&self, multi: &[usize], p: usize, q: usize, inv_4h2: f64) -> f64 {
        (self.shifted2(multi, p, 1, q, 1) - self.shifted2(multi, p, 1, q, -1)
            - self.shifted2(multi, p, -1, q, 1)
            + self.shifted2(multi, p, -1, q, -1))
            * inv_4h2
    }

    /// Writes the `n×n` complex Hessian stencil at a node into `out`
    /// (row-major). Allocation-free; the hot streaming loops live on this.
    pub fn hessian_entries_into(&self, multi: &[usize], out: &mut [C64]) -> Result<()> {
        let n = self.grid.n;
        if out.len() != n * n {
            return Err(LabError::Dimension {
                op: "TorusField::hessian_entries_into",
                expected: n * n,
                actual: out.len(),
            });
        }
        self.require_stencil_valid(multi, "hessian stencil")?;
        let h = self.grid.h;
        let inv_h2 = 1.0 / (h * h);
        let inv_4h2 = 0.25 * inv_h2;
        let u0 = self.values[self.grid.flat_of(multi)];
        for a in 0..n {
            let (xa, ya) = (2 * a, 2 * a + 1);
            let dxx = (self.shifted(multi, xa, 1) - 2.0 * u0 + self.shifted(multi, xa, -1))
                * inv_h2;
            let dyy = (self.shifted(multi, ya, 1) - 2.0 * u0 + self.shifted(multi, ya, -1))
                * inv_h2;
            out[a * n + a] = C64::new(0.25 * (dxx + dyy), 0.0);
            for b in (a + 1)..n {
                let (xb, yb) = (2 * b, 2 * b + 1);
                let re = 0.25
                    * (self.cross(multi, xa, xb, inv_4h2) + self.cross(multi, ya, yb, inv_4h2));
                let im = 0.25
                    * (self.cross(multi, xa, yb, inv_4h2) - self.cross(multi, ya, xb, inv_4h2));
                out[a * n + b] = C64::new(re, im);
                out[b * n + a] = C64::new(re, -im);
            }
        }
        Ok(())
    }

    /// Complex Hessian at one node as a matrix.
    pub fn hessian_at(&self, multi: &[usize]) -> Result<HermitianMatrix> {
        let n = self.grid.n;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        self.hessian_entries_into(multi, &mut out)?;
        HermitianMatrix::new(n, out)
    }

    /// Materializes the Hessian at every node. Guarded by an entry cap —
    /// large grids must stream through [`Self::hessian_entries_into`].
    pub fn complex_hessian(&self) -> Result<Vec<HermitianMatrix>> {
        let n = self.grid.n;
        let entries = self.grid.total as u128 * (n * n) as u128;
        if entries > MAX_MATERIALIZED_ENTRIES {
            return Err(LabError::Grid(format!(
                "materializing {entries} Hessian entries exceeds the cap of \
                 {MAX_MATERIALIZED_ENTRIES}; stream per-node instead"
            )));
        }
        if self.chart {
            // Chart fields have no full-grid Hessian — the stencil is only
            // valid in the interior, so materialization is refused outright.
            return Err(LabError::Grid(
                "complex_hessian is only defined for periodic fields; \
                 chart-local fields must be streamed over interior nodes"
                    .into(),
            ));
        }
        let mut result = Vec::with_capacity(self.grid.total);
        let mut multi = vec![0usize; self.grid.axes()];
        for flat in 0..self.grid.total {
            self.grid.decode(flat, &mut multi);
            result.push(self.hessian_at(&multi)?);
        }
        Ok(result)
    }

    /// Squared gradient `|∇u|²` at a node by central differences.
    pub fn gradient_sq_at(&self, multi: &[usize]) -> Result<f64> {
        self.require_stencil_valid(multi, "gradient stencil")?;
        let inv_2h = 0.5 / self.grid.h;
        let mut acc = 0.0;
        for axis in 0..self.grid.axes() {
            let d = (self.shifted(multi, axis, 1) - self.shifted(multi, axis, -1)) * inv_2h;
            acc += d * d;
        }
        Ok(acc)
    }

    /// `∫ |∇u|² · 1_mask`, the mask being a coordinate predicate. Chart
    /// fields contribute only stencil-valid nodes: masked nodes inside the
    /// chart margin are excluded, never wrapped around. Callers whose mask
    /// must not reach the margin guard the geometry themselves.
    pub fn gradient_l2_integral(&self, mask: impl Fn(&[f64]) -> bool) -> Result<f64> {
        let mut sum = ChunkedSum::new();
        let mut failure: Option<LabError> = None;
        let chart = self.chart;
        let grid = self.grid.clone();
        grid.for_each_point(|_flat, multi, point| {
            if failure.is_some() || !mask(point) {
                return;
            }
            if chart && !grid.chart_interior(multi) {
                return;
            }
            match self.gradient_sq_at(multi) {
                Ok(g) => sum.add(g),
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(sum.finish() * self.grid.cell_volume())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ClosedFormPotential;

    #[test]
    fn grid_rejects_bad_sides_and_oversize() {
        assert!(TorusGrid::new(2, 7).is_err());
        assert!(TorusGrid::new(2, 6).is_err());
        assert!(TorusGrid::new(2, 1024).is_err());
        assert!(TorusGrid::new(0, 16).is_err());
        assert!(TorusGrid::new(2, 16).is_ok());
    }

    #[test]
    fn coordinates_are_centered() {
        let g = TorusGrid::new(1, 16).unwrap();
        assert_eq!(g.coordinate(8), 0.0);
        assert_eq!(g.coordinate(0), -0.5);
        assert_eq!(g.coordinate(15), 0.5 - 1.0 / 16.0);
    }

    #[test]
    fn flat_and_decode_roundtrip() {
        let g = TorusGrid::new(2, 8).unwrap();
        let mut multi = vec![0usize; 4];
        for flat in [0usize, 17, 4095, 511] {
            g.decode(flat, &mut multi);
            assert_eq!(g.flat_of(&multi), flat);
        }
    }

    // On a power-of-two grid every node coordinate, square, and stencil
    // difference of |z|² is a dyadic rational: the whole computation is
    // exact in floating point, so the identity below holds with zero error.
    #[test]
    fn hessian_of_squared_norm_is_exactly_the_identity() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = TorusField::sample(&g, &ClosedFormPotential::Quadratic { c: 1.0 }).unwrap();
        for multi in [[4usize, 5, 6, 7], [2, 2, 13, 2], [8, 8, 8, 8]] {
            let h = f.hessian_at(&multi).unwrap();
            assert_eq!(h, HermitianMatrix::identity(2));
        }
    }

    #[test]
    fn pluriharmonic_field_has_exactly_zero_hessian() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u = ClosedFormPotential::PluriharmonicQuadratic { axis: 0, c: 3.0 };
        let f = TorusField::sample(&g, &u).unwrap();
        let h = f.hessian_at(&[5, 9, 4, 4]).unwrap();
        assert_eq!(h.max_abs_entry(), 0.0);
    }

    #[test]
    fn chart_field_refuses_stencils_near_the_boundary() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = TorusField::sample(&g, &ClosedFormPotential::Quadratic { c: 1.0 }).unwrap();
        assert!(f.is_chart());
        assert!(f.hessian_at(&[1, 8, 8, 8]).is_err());
        assert!(f.hessian_at(&[8, 8, 8, 14]).is_err());
        assert!(f.hessian_at(&[2, 8, 8, 13]).is_ok());
    }

    #[test]
    fn cross_mode_stencil_matches_analytic_hessian_to_second_order() {
        let n = 2;
        let u = ClosedFormPotential::TrigCross {
            axis_x: 0,
            axis_y: 1,
            c: 0.02,
            shift_x: 0.0,
            shift_y: 0.0,
        };
        let g = TorusGrid::new(n, 32).unwrap();
        let f = TorusField::sample(&g, &u).unwrap();
        let multi = [3usize, 11, 7, 29];
        let mut point = vec![0.0; 4];
        g.point(&multi, &mut point);
        let numeric = f.hessian_at(&multi).unwrap();
        let exact = u.analytic_hessian(n, &point).unwrap();
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                worst = worst.max((numeric.get(p, q) - exact.get(p, q)).norm());
            }
        }
        // Fourth-derivative bound: (2πh)²/12 of the entry scale ≈ 6e-4.
        assert!(worst < 2e-3, "stencil error {worst}");
    }

    #[test]
    fn periodic_wraparound_sees_the_same_values_as_interior() {
        let g = TorusGrid::new(1, 16).unwrap();
        let u = ClosedFormPotential::separable_trig(1, 0.5);
        let f = TorusField::sample(&g, &u).unwrap();
        // cos is 1-periodic on this grid, so the stencil at the seam must
        // agree with the analytic value just like anywhere else.
        let h_seam = f.hessian_at(&[0, 0]).unwrap();
        let mut point = vec![0.0; 2];
        g.point(&[0, 0], &mut point);
        let exact = u.analytic_hessian(1, &point).unwrap();
        assert!((h_seam.get(0, 0) - exact.get(0, 0)).norm() < 0.2);
    }

    #[test]
    fn gradient_of_squared_norm_is_exact_on_dyadic_grid() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = TorusField::sample(&g, &ClosedFormPotential::Quadratic { c: 1.0 }).unwrap();
        let multi = [5usize, 6, 9, 10];
        let mut point = vec![0.0; 4];
        g.point(&multi, &mut point);
        let r2: f64 = point.iter().map(|v| v * v).sum();
        // ∇|z|² = 2(x, y, …); the central difference of x² is exactly 2x.
        assert_eq!(f.gradient_sq_at(&multi).unwrap(), 4.0 * r2);
    }

    #[test]
    fn gradient_integral_excludes_chart_margin_nodes() {
        let g = TorusGrid::new(1, 16).unwrap();
        let f = TorusField::sample(&g, &ClosedFormPotential::Quadratic { c: 1.0 }).unwrap();
        // A full mask on a chart field only ever sees the margin-interior
        // nodes, so it must agree with the explicit interior-box mask.
        let full = f.gradient_l2_integral(|_| true).unwrap();
        let margin = CHART_MARGIN as f64 / 16.0;
        let boxed = f
            .gradient_l2_integral(|p| p.iter().all(|v| (-0.5 + margin..0.5 - margin).contains(v)))
            .unwrap();
        assert_eq!(full, boxed);
        assert!(full > 0.0);
    }
}
