//! Hessian-measure densities over sampled fields.
//!
//! The density of the m-Hessian measure of a field `u` relative to the flat
//! volume is, per node, `σ_m(λ)/C(n,m)` where `λ` are the generalized
//! eigenvalues of `g + Hess u` against the ambient metric `g`. Mixed
//! densities of several fields polarize the same expression. Everything here
//! streams over grid nodes deterministically; reductions use the fixed-chunk
//! summation of [`crate::sum`], so results are reproducible bit for bit.
//!
//! Chart-local fields (sampled from non-periodic potentials) contribute only
//! stencil-valid nodes: the two-cell margin at the chart boundary is
//! excluded from densities, statistics, and integrals.

use crate::error::{LabError, Result};
use crate::hermitian::{
    binomial, cone_membership, generalized_eigenvalues, mixed_hessian_density, sigma_ladder,
    HermitianMatrix, Metric,
};
use crate::report::{CheckReport, Provenance};
use crate::sum::ChunkedSum;
use crate::tol;
use crate::torus::{TorusField, TorusGrid};
use num_complex::Complex64 as C64;

/// Cap on materialized density values (~160 MB of `f64`). Larger grids go
/// through the streaming total-mass path instead.
const MAX_DENSITY_POINTS: usize = 20_000_000;

/// Per-node density of an m-Hessian measure relative to the flat volume.
/// Values at chart-margin nodes of chart-local fields are stored as zero and
/// excluded from statistics and integration.
#[derive(Clone, Debug)]
pub struct DensityField {
    grid: TorusGrid,
    chart: bool,
    values: Vec<f64>,
    min_value: f64,
    min_location: Option<Vec<usize>>,
}

impl DensityField {
    fn from_parts(grid: TorusGrid, chart: bool, values: Vec<f64>) -> Self {
        let mut min_value = f64::INFINITY;
        let mut min_location = None;
        grid.for_each_point(|flat, multi, _point| {
            if chart && !grid.chart_interior(multi) {
                return;
            }
            if values[flat] < min_value {
                min_value = values[flat];
                min_location = Some(multi.to_vec());
            }
        });
        Self {
            grid,
            chart,
            values,
            min_value,
            min_location,
        }
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

    /// Minimum density over valid nodes.
    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn min_location(&self) -> Option<&[usize]> {
        self.min_location.as_deref()
    }

    /// Number of valid nodes with density strictly below `threshold`.
    pub fn count_below(&self, threshold: f64) -> usize {
        let mut count = 0usize;
        self.grid.for_each_point(|flat, multi, _point| {
            if self.chart && !self.grid.chart_interior(multi) {
                return;
            }
            if self.values[flat] < threshold {
                count += 1;
            }
        });
        count
    }

    /// Whether the field dips below `-tol` anywhere — a diagnostic flag, not
    /// a construction failure, so negative densities remain inspectable.
    pub fn negativity_flagged(&self, tol: f64) -> bool {
        self.min_value < -tol
    }

    /// Spatially constant density (e.g. the flat reference measure itself).
    pub fn constant(grid: &TorusGrid, value: f64) -> Self {
        Self::from_parts(grid.clone(), false, vec![value; grid.total_points()])
    }

    /// The same density multiplied by a constant factor.
    pub fn scaled(&self, factor: f64) -> Self {
        let values = self.values.iter().map(|v| v * factor).collect();
        Self::from_parts(self.grid.clone(), self.chart, values)
    }
}

/// Node-indexed inclusion mask, same shape as its grid. All geometric
/// constructors use strict inequalities, and the field comparison mask
/// `{u < v}` excludes ties, so `{u < v}` and `{v < u}` never overlap and
/// jointly omit `{u = v}`.
#[derive(Clone, Debug)]
pub struct RegionMask {
    grid: TorusGrid,
    include: Vec<bool>,
}

impl RegionMask {
    pub fn full(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            include: vec![true; grid.total_points()],
        }
    }

    pub fn from_predicate(grid: &TorusGrid, pred: impl Fn(&[f64]) -> bool) -> Self {
        let mut include = vec![false; grid.total_points()];
        grid.for_each_point(|flat, _multi, point| {
            include[flat] = pred(point);
        });
        Self {
            grid: grid.clone(),
            include,
        }
    }

    /// Euclidean ball `Σ x_i² < r²` (strict) around the chart origin.
    pub fn ball(grid: &TorusGrid, radius: f64) -> Self {
        let r2 = radius * radius;
        Self::from_predicate(grid, |p| p.iter().map(|v| v * v).sum::<f64>() < r2)
    }

    /// The strict sublevel mask `{u < v}` on matching grids.
    pub fn strictly_below(u: &TorusField, v: &TorusField) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(LabError::Grid(
                "strictly_below: fields live on different grids".into(),
            ));
        }
        let include = u
            .values()
            .iter()
            .zip(v.values().iter())
            .map(|(a, b)| a < b)
            .collect();
        Ok(Self {
            grid: u.grid().clone(),
            include,
        })
    }

    pub fn complement(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            include: self.include.iter().map(|b| !b).collect(),
        }
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(LabError::Grid(
                "intersect: masks live on different grids".into(),
            ));
        }
        Ok(Self {
            grid: self.grid.clone(),
            include: self
                .include
                .iter()
                .zip(other.include.iter())
                .map(|(a, b)| *a && *b)
                .collect(),
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn contains_flat(&self, flat: usize) -> bool {
        self.include[flat]
    }

    pub fn count(&self) -> usize {
        self.include.iter().filter(|b| **b).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.include.len() as f64
    }
}

/// Density and eigenvalue extraction at single nodes, with reused scratch
/// buffers so streaming passes stay allocation-free on the common path
/// (n = 2 with the standard metric).
struct NodeEval<'a> {
    field: &'a TorusField,
    metric: &'a Metric,
    m: usize,
    n: usize,
    fast2: bool,
    entries: Vec<C64>,
}

impl<'a> NodeEval<'a> {
    fn new(field: &'a TorusField, metric: &'a Metric, m: usize) -> Result<Self> {
        let n = field.grid().complex_dim();
        if metric.dim() != n {
            return Err(LabError::Dimension {
                op: "NodeEval",
                expected: n,
                actual: metric.dim(),
            });
        }
        if m == 0 || m > n {
            return Err(LabError::IndexRange {
                op: "hessian measure order m",
                index: m,
                max: n,
            });
        }
        Ok(Self {
            field,
            metric,
            m,
            n,
            fast2: n == 2 && metric.is_identity(),
            entries: vec![C64::new(0.0, 0.0); n * n],
        })
    }

    #[inline]
    fn density(&mut self, multi: &[usize]) -> Result<f64> {
        self.field.hessian_entries_into(multi, &mut self.entries)?;
        if self.fast2 {
            return Ok(density_identity_2(&self.entries, self.m));
        }
        let spectrum = self.spectrum_generic()?;
        Ok(sigma_ladder(&spectrum, self.m)[self.m] / binomial(self.n, self.m))
    }

    #[inline]
    fn spectrum(&mut self, multi: &[usize]) -> Result<Vec<f64>> {
        self.field.hessian_entries_into(multi, &mut self.entries)?;
        if self.fast2 {
            let (l1, l2) = lambda_identity_2(&self.entries);
            return Ok(vec![l1, l2]);
        }
        self.spectrum_generic()
    }

    fn spectrum_generic(&mut self) -> Result<Vec<f64>> {
        let g = self.metric.matrix();
        let shifted: Vec<C64> = self
            .entries
            .iter()
            .zip(g.entries().iter())
            .map(|(h, ge)| h + ge)
            .collect();
        let a = HermitianMatrix::new(self.n, shifted)?;
        Ok(generalized_eigenvalues(&a, self.metric)?.values().to_vec())
    }
}

/// Eigenvalues of `I + H` for a 2×2 Hermitian stencil output.
#[inline]
fn lambda_identity_2(e: &[C64]) -> (f64, f64) {
    let a = 1.0 + e[0].re;
    let d = 1.0 + e[3].re;
    let mean = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + e[1].norm_sqr()).sqrt();
    (mean - disc, mean + disc)
}

/// `σ_m(λ(I+H))/C(2,m)` for 2×2: the trace mean for m = 1, `det` for m = 2.
#[inline]
fn density_identity_2(e: &[C64], m: usize) -> f64 {
    let a = 1.0 + e[0].re;
    let d = 1.0 + e[3].re;
    match m {
        1 => 0.5 * (a + d),
        _ => a * d - e[1].norm_sqr(),
    }
}

/// Scaled cone margin of a 2-eigenvalue spectrum: min over k ≤ m of
/// `σ_k/|λ|_max^k`, matching [`cone_membership`] without allocating.
#[inline]
fn cone_margin_2(l1: f64, l2: f64, m: usize) -> (f64, usize) {
    let lmax = l1.abs().max(l2.abs());
    if lmax == 0.0 {
        return (0.0, 1);
    }
    let m1 = (l1 + l2) / lmax;
    if m == 1 {
        return (m1, 1);
    }
    let m2 = (l1 * l2) / (lmax * lmax);
    if m2 < m1 {
        (m2, 2)
    } else {
        (m1, 1)
    }
}

/// Streams the complex-Hessian stencil of a periodic n=2 field, handing the
/// sink each node's `(multi, H00, H11, Re H01, Im H01)`. Wrap tables replace
/// modular arithmetic — this is the only loop that ever sees the largest
/// grids, and it must stay branch- and division-free.
fn stream_n2_hessian(
    values: &[f64],
    side: usize,
    mut sink: impl FnMut([usize; 4], f64, f64, f64, f64),
) {
    let s2 = side;
    let s1 = side * side;
    let s0 = s1 * side;
    let h = 1.0 / side as f64;
    let inv_h2 = 1.0 / (h * h);
    let inv_4h2 = 0.25 * inv_h2;
    let plus: Vec<usize> = (0..side).map(|i| (i + 1) % side).collect();
    let minus: Vec<usize> = (0..side).map(|i| (i + side - 1) % side).collect();
    for i0 in 0..side {
        let (o0, o0p, o0m) = (i0 * s0, plus[i0] * s0, minus[i0] * s0);
        for i1 in 0..side {
            let (o1, o1p, o1m) = (i1 * s1, plus[i1] * s1, minus[i1] * s1);
            for i2 in 0..side {
                let (o2, o2p, o2m) = (i2 * s2, plus[i2] * s2, minus[i2] * s2);
                let b12 = o1 + o2;
                let b02 = o0 + o2;
                let b01 = o0 + o1;
                let b012 = b01 + o2;
                for i3 in 0..side {
                    let (p3, m3) = (plus[i3], minus[i3]);
                    let u0 = values[b012 + i3];
                    let dxx1 = (values[o0p + b12 + i3] - 2.0 * u0 + values[o0m + b12 + i3])
                        * inv_h2;
                    let dyy1 = (values[b02 + o1p + i3] - 2.0 * u0 + values[b02 + o1m + i3])
                        * inv_h2;
                    let dxx2 = (values[b01 + o2p + i3] - 2.0 * u0 + values[b01 + o2m + i3])
                        * inv_h2;
                    let dyy2 = (values[b012 + p3] - 2.0 * u0 + values[b012 + m3]) * inv_h2;
                    let h00 = 0.25 * (dxx1 + dyy1);
                    let h11 = 0.25 * (dxx2 + dyy2);
                    // Cross stencils on (x1,x2), (y1,y2), (x1,y2), (y1,x2).
                    let uxx = (values[o0p + o1 + o2p + i3] - values[o0p + o1 + o2m + i3]
                        - values[o0m + o1 + o2p + i3]
                        + values[o0m + o1 + o2m + i3])
                        * inv_4h2;
                    let uyy = (values[b02 + o1p + p3] - values[b02 + o1p + m3]
                        - values[b02 + o1m + p3]
                        + values[b02 + o1m + m3])
                        * inv_4h2;
                    let uxy = (values[o0p + b12 + p3] - values[o0p + b12 + m3]
                        - values[o0m + b12 + p3]
                        + values[o0m + b12 + m3])
                        * inv_4h2;
                    let uyx = (values[o0 + o1p + o2p + i3] - values[o0 + o1p + o2m + i3]
                        - values[o0 + o1m + o2p + i3]
                        + values[o0 + o1m + o2m + i3])
                        * inv_4h2;
                    let re = 0.25 * (uxx + uyy);
                    let im = 0.25 * (uxy - uyx);
                    sink([i0, i1, i2, i3], h00, h11, re, im);
                }
            }
        }
    }
}

fn can_stream_fast(field: &TorusField, metric: &Metric) -> bool {
    field.grid().complex_dim() == 2 && metric.is_identity() && !field.is_chart()
}

/// Density of the m-Hessian measure with the standard metric.
pub fn hessian_measure(u: &TorusField, m: usize) -> Result<DensityField> {
    hessian_measure_with(u, &Metric::identity(u.grid().complex_dim()), m)
}

pub fn hessian_measure_with(u: &TorusField, g: &Metric, m: usize) -> Result<DensityField> {
    let grid = u.grid().clone();
    if grid.total_points() > MAX_DENSITY_POINTS {
        return Err(LabError::Grid(format!(
            "materializing {} density values exceeds the cap of {MAX_DENSITY_POINTS}; \
             use the streaming total-mass path for grids this large",
            grid.total_points()
        )));
    }
    let mut values = vec![0.0f64; grid.total_points()];
    if can_stream_fast(u, g) {
        stream_n2_hessian(u.values(), grid.side(), |multi, h00, h11, re, im| {
            let e = [
                C64::new(h00, 0.0),
                C64::new(re, im),
                C64::new(re, -im),
                C64::new(h11, 0.0),
            ];
            values[grid.flat_of(&multi)] = density_identity_2(&e, m);
        });
        return Ok(DensityField::from_parts(grid, false, values));
    }
    let chart = u.is_chart();
    let mut eval = NodeEval::new(u, g, m)?;
    let mut failure: Option<LabError> = None;
    grid.for_each_point(|flat, multi, _point| {
        if failure.is_some() || (chart && !grid.chart_interior(multi)) {
            return;
        }
        match eval.density(multi) {
            Ok(d) => values[flat] = d,
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(DensityField::from_parts(grid, chart, values))
}

/// Mixed Hessian density of `m = us.len()` fields with the standard metric:
/// the full polarization of `σ_m` over the matrices `g + Hess u_i`.
pub fn mixed_measure(us: &[&TorusField]) -> Result<DensityField> {
    let n = us
        .first()
        .ok_or_else(|| LabError::Grid("mixed_measure: empty field list".into()))?
        .grid()
        .complex_dim();
    mixed_measure_with(us, &Metric::identity(n))
}

pub fn mixed_measure_with(us: &[&TorusField], g: &Metric) -> Result<DensityField> {
    let first = us
        .first()
        .ok_or_else(|| LabError::Grid("mixed_measure: empty field list".into()))?;
    let grid = first.grid().clone();
    for u in us {
        if u.grid() != &grid {
            return Err(LabError::Grid(
                "mixed_measure: fields live on different grids".into(),
            ));
        }
    }
    let n = grid.complex_dim();
    let m = us.len();
    if m == 0 || m > n {
        return Err(LabError::IndexRange {
            op: "mixed_measure factor count",
            index: m,
            max: n,
        });
    }
    if grid.total_points() > MAX_DENSITY_POINTS {
        return Err(LabError::Grid(format!(
            "materializing {} mixed-density values exceeds the cap of {MAX_DENSITY_POINTS}",
            grid.total_points()
        )));
    }
    let chart = us.iter().any(|u| u.is_chart());
    let mut values = vec![0.0f64; grid.total_points()];
    let mut failure: Option<LabError> = None;

    if n == 2 && m == 2 && g.is_identity() && !chart {
        // Polarization of σ_2 for a pair of 2×2 matrices, inlined:
        // ½(a₀₀b₁₁ + a₁₁b₀₀) − Re(a₀₁ conj(b₀₁)) with A = I+H_u, B = I+H_v.
        let mut ea = vec![C64::new(0.0, 0.0); 4];
        let mut eb = vec![C64::new(0.0, 0.0); 4];
        grid.for_each_point(|flat, multi, _point| {
            if failure.is_some() {
                return;
            }
            let r = us[0]
                .hessian_entries_into(multi, &mut ea)
                .and_then(|_| us[1].hessian_entries_into(multi, &mut eb));
            if let Err(e) = r {
                failure = Some(e);
                return;
            }
            let (a00, a11) = (1.0 + ea[0].re, 1.0 + ea[3].re);
            let (b00, b11) = (1.0 + eb[0].re, 1.0 + eb[3].re);
            let cross = ea[1].re * eb[1].re + ea[1].im * eb[1].im;
            values[flat] = 0.5 * (a00 * b11 + a11 * b00) - cross;
        });
        if let Some(e) = failure {
            return Err(e);
        }
        return Ok(DensityField::from_parts(grid, false, values));
    }

    let gm = g.matrix().clone();
    let mut entries = vec![C64::new(0.0, 0.0); n * n];
    let mut mats: Vec<HermitianMatrix> = Vec::with_capacity(m);
    grid.for_each_point(|flat, multi, _point| {
        if failure.is_some() || (chart && !grid.chart_interior(multi)) {
            return;
        }
        mats.clear();
        for u in us {
            if let Err(e) = u.hessian_entries_into(multi, &mut entries) {
                failure = Some(e);
                return;
            }
            let shifted: Vec<C64> = entries
                .iter()
                .zip(gm.entries().iter())
                .map(|(h, ge)| h + ge)
                .collect();
            match HermitianMatrix::new(n, shifted) {
                Ok(a) => mats.push(a),
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        }
        match mixed_hessian_density(&mats, g) {
            Ok(d) => values[flat] = d,
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(DensityField::from_parts(grid, chart, values))
}

/// Verifies m-subharmonicity of `g + Hess u` at every valid node. The report
/// carries the worst scaled `σ_k` deficit, its node, and the binding `k`.
pub fn verify_m_sh(u: &TorusField, m: usize) -> Result<CheckReport> {
    verify_m_sh_with(u, &Metric::identity(u.grid().complex_dim()), m)
}

pub fn verify_m_sh_with(u: &TorusField, g: &Metric, m: usize) -> Result<CheckReport> {
    let grid = u.grid();
    let prov = Provenance::grid(grid.complex_dim(), m, grid.side());
    let mut worst = f64::INFINITY;
    let mut worst_loc: Vec<usize> = Vec::new();
    let mut worst_k = 0usize;
    let mut valid_points = 0usize;

    if can_stream_fast(u, g) {
        if m == 0 || m > 2 {
            return Err(LabError::IndexRange {
                op: "verify_m_sh order m",
                index: m,
                max: 2,
            });
        }
        stream_n2_hessian(u.values(), grid.side(), |multi, h00, h11, re, im| {
            let e = [
                C64::new(h00, 0.0),
                C64::new(re, im),
                C64::new(re, -im),
                C64::new(h11, 0.0),
            ];
            let (l1, l2) = lambda_identity_2(&e);
            let (margin, k) = cone_margin_2(l1, l2, m);
            valid_points += 1;
            if margin < worst {
                worst = margin;
                worst_k = k;
                worst_loc = multi.to_vec();
            }
        });
    } else {
        let chart = u.is_chart();
        let mut eval = NodeEval::new(u, g, m)?;
        let mut failure: Option<LabError> = None;
        grid.for_each_point(|_flat, multi, _point| {
            if failure.is_some() || (chart && !grid.chart_interior(multi)) {
                return;
            }
            match eval.spectrum(multi) {
                Ok(spec) => {
                    let c = cone_membership(&spec, m);
                    valid_points += 1;
                    if c.min_scaled_margin < worst {
                        worst = c.min_scaled_margin;
                        worst_k = c.worst_k;
                        worst_loc = multi.to_vec();
                    }
                }
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }

    Ok(CheckReport::from_margin(
        "m-subharmonicity",
        worst,
        tol::CONE_TOL,
        Some(worst_loc),
        prov,
    )
    .with_detail("worst_sigma_k", worst_k as f64)
    .with_detail("valid_points", valid_points as f64))
}

/// `h^{2n} · Σ` of the density over masked valid nodes.
pub fn integrate(d: &DensityField, mask: &RegionMask) -> Result<f64> {
    if d.grid != mask.grid {
        return Err(LabError::Grid(
            "integrate: density and mask live on different grids".into(),
        ));
    }
    let mut sum = ChunkedSum::new();
    d.grid.for_each_point(|flat, multi, _point| {
        if !mask.include[flat] || (d.chart && !d.grid.chart_interior(multi)) {
            return;
        }
        sum.add(d.values[flat]);
    });
    Ok(sum.finish() * d.grid.cell_volume())
}

/// Total-mass conservation: for a periodic m-subharmonic field the total
/// m-Hessian mass equals the torus volume. Hypothesis problems (chart-local
/// field, failed subharmonicity) are refusals, not failures.
pub fn total_mass_check(u: &TorusField, m: usize) -> Result<CheckReport> {
    total_mass_check_with(u, &Metric::identity(u.grid().complex_dim()), m)
}

pub fn total_mass_check_with(u: &TorusField, g: &Metric, m: usize) -> Result<CheckReport> {
    let grid = u.grid();
    let prov = Provenance::grid(grid.complex_dim(), m, grid.side());
    let suite = "total-mass-conservation";
    if u.is_chart() {
        return Ok(CheckReport::refused(
            suite,
            "field is chart-local; the conservation identity needs the closed torus".into(),
            None,
            prov,
        ));
    }
    let verify = verify_m_sh_with(u, g, m)?;
    if !verify.pass() {
        return Ok(CheckReport::refused(
            suite,
            format!(
                "m-subharmonicity hypothesis fails: worst scaled sigma_k deficit {:.3e}",
                verify.worst_margin
            ),
            verify.location.clone(),
            prov,
        ));
    }

    let mass = if can_stream_fast(u, g) {
        let mut sum = ChunkedSum::new();
        stream_n2_hessian(u.values(), grid.side(), |_multi, h00, h11, re, im| {
            let e = [
                C64::new(h00, 0.0),
                C64::new(re, im),
                C64::new(re, -im),
                C64::new(h11, 0.0),
            ];
            sum.add(density_identity_2(&e, m));
        });
        sum.finish() * grid.cell_volume()
    } else {
        let mut eval = NodeEval::new(u, g, m)?;
        let mut sum = ChunkedSum::new();
        let mut failure: Option<LabError> = None;
        grid.for_each_point(|_flat, multi, _point| {
            if failure.is_some() {
                return;
            }
            match eval.density(multi) {
                Ok(d) => sum.add(d),
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        sum.finish() * grid.cell_volume()
    };

    let deviation = mass - 1.0;
    Ok(CheckReport::from_margin(
        suite,
        -deviation.abs(),
        tol::mass_tol(grid.side()),
        Some(vec![]),
        prov,
    )
    .with_detail("total_mass", mass)
    .with_detail("deviation", deviation))
}
