//! Field-level verification of the mixed-Hessian inequality, the comparison
//! principle, and the domination principle.
//!
//! Every check here is a *conditional* statement: hypotheses first, then a
//! conclusion. Hypothesis failures are hard refusals, never warnings — a
//! "pass" computed under broken hypotheses would assert something the
//! underlying statement does not promise, and the singular laboratory shows
//! the conclusions genuinely fail outside them.
//!
//! Verification is pointwise on smooth instances: for smooth data a measure
//! inequality against the flat reference measure is equivalent to the
//! corresponding density inequality, and only densities are observable on a
//! grid. The comparison and domination checks integrate densities over the
//! strict sublevel mask `{u < v}` (ties excluded, so the masks of `(u, v)`
//! and `(v, u)` never overlap).

use crate::error::{LabError, Result};
use crate::measures::{
    hessian_measure, integrate, mixed_measure, verify_m_sh, DensityField, RegionMask,
};
use crate::report::{CheckReport, Provenance};
use crate::tol::{mass_tol, DOMINATION_TOL_CELLS, FIELD_MIXED_MARGIN_TOL, ORACLE_EQUIV_TOL};
use crate::torus::{TorusField, TorusGrid};

fn same_grid(op: &'static str, a: &TorusGrid, b: &TorusGrid) -> Result<()> {
    if a != b {
        return Err(LabError::Grid(format!(
            "{op}: arguments live on different grids ({}^{} vs {}^{} points)",
            a.side(),
            2 * a.complex_dim(),
            b.side(),
            2 * b.complex_dim()
        )));
    }
    Ok(())
}

/// Does the mixed Hessian measure of `u_1..u_m` dominate the geometric-mean
/// density `(f_1 ⋯ f_m)^{1/m}·mu`?
///
/// Hypotheses (refusals when broken, identifying the offending argument):
/// every `u_j` is m-subharmonic, and pointwise `H_m(u_j) ≥ f_j·mu` up to the
/// margin tolerance. Conclusion: `mixed(u_1..u_m) ≥ (Π f_j)^{1/m}·mu` up to
/// the same tolerance, with the worst margin and its node reported.
///
/// Negative `f_j` values are clamped to zero inside the geometric mean: the
/// conclusion's right-hand side is only meaningful for nonnegative density
/// data, and clamping keeps `f_j ≡ 0` trivially valid rather than undefined.
pub fn check_mixed_inequality(
    us: &[&TorusField],
    mu: &DensityField,
    fs: &[&DensityField],
) -> Result<CheckReport> {
    let m = us.len();
    if m == 0 || fs.len() != m {
        return Err(LabError::Dimension {
            op: "check_mixed_inequality",
            expected: m.max(1),
            actual: fs.len(),
        });
    }
    let grid = us[0].grid().clone();
    let n = grid.complex_dim();
    if m > n {
        return Err(LabError::Dimension {
            op: "check_mixed_inequality degree",
            expected: n,
            actual: m,
        });
    }
    for u in us {
        same_grid("check_mixed_inequality", &grid, u.grid())?;
    }
    same_grid("check_mixed_inequality", &grid, mu.grid())?;
    for f in fs {
        same_grid("check_mixed_inequality", &grid, f.grid())?;
    }
    let chart = us.iter().any(|u| u.is_chart())
        || mu.is_chart()
        || fs.iter().any(|f| f.is_chart());
    let prov = Provenance::grid(n, m, grid.side());

    // Hypothesis 1: every argument is m-subharmonic.
    for (j, u) in us.iter().enumerate() {
        let rep = verify_m_sh(u, m)?;
        if !rep.pass() {
            return Ok(CheckReport::refused(
                "mixed-hessian-inequality",
                format!(
                    "hypothesis failed: argument {j} is not {m}-subharmonic \
                     (worst cone margin {:.3e})",
                    rep.worst_margin
                ),
                rep.location,
                prov,
            ));
        }
    }

    // Hypothesis 2: H_m(u_j) ≥ f_j·mu pointwise, up to the margin tolerance.
    let densities: Vec<DensityField> =
        us.iter().map(|u| hessian_measure(u, m)).collect::<Result<_>>()?;
    let mut worst_hyp = f64::INFINITY;
    let mut worst_hyp_at: Option<(usize, Vec<usize>)> = None;
    grid.for_each_point(|flat, multi, _point| {
        if chart && !grid.chart_interior(multi) {
            return;
        }
        for (j, d) in densities.iter().enumerate() {
            let gap = d.values()[flat] - fs[j].values()[flat] * mu.values()[flat];
            if gap < worst_hyp {
                worst_hyp = gap;
                worst_hyp_at = Some((j, multi.to_vec()));
            }
        }
    });
    if worst_hyp < -FIELD_MIXED_MARGIN_TOL {
        let (j, at) = worst_hyp_at.expect("worst tracked");
        return Ok(CheckReport::refused(
            "mixed-hessian-inequality",
            format!(
                "hypothesis failed: H_{m}(argument {j}) falls {:.3e} below f_{j}·mu",
                -worst_hyp
            ),
            Some(at),
            prov,
        )
        .with_detail("worst_hypothesis_margin", worst_hyp));
    }

    // Conclusion: mixed measure against the geometric-mean density.
    let mixed = mixed_measure(us)?;
    let inv_m = 1.0 / m as f64;
    let mut worst = f64::INFINITY;
    let mut worst_at: Option<Vec<usize>> = None;
    let mut valid = 0usize;
    grid.for_each_point(|flat, multi, _point| {
        if chart && !grid.chart_interior(multi) {
            return;
        }
        valid += 1;
        let mut prod = 1.0;
        for f in fs {
            prod *= f.values()[flat].max(0.0);
        }
        let gm = match m {
            1 => prod,
            2 => prod.sqrt(),
            _ => prod.powf(inv_m),
        };
        let margin = mixed.values()[flat] - gm * mu.values()[flat];
        if margin < worst {
            worst = margin;
            worst_at = Some(multi.to_vec());
        }
    });
    Ok(CheckReport::from_margin(
        "mixed-hessian-inequality",
        worst,
        FIELD_MIXED_MARGIN_TOL,
        worst_at,
        prov,
    )
    .with_detail("worst_hypothesis_margin", worst_hyp)
    .with_detail("valid_points", valid as f64))
}

/// Comparison principle: on the strict sublevel set `{u < v}`, the m-Hessian
/// mass of `v` is dominated by that of `u`, up to the grid's mass tolerance.
/// Both fields must be m-subharmonic (refusal otherwise) and periodic — the
/// mass argument integrates by parts over the closed torus, so chart-local
/// fields are refused rather than silently mis-measured.
pub fn check_comparison(u: &TorusField, v: &TorusField, m: usize) -> Result<CheckReport> {
    same_grid("check_comparison", u.grid(), v.grid())?;
    let grid = u.grid().clone();
    let prov = Provenance::grid(grid.complex_dim(), m, grid.side());
    let suite = "comparison-principle";
    if u.is_chart() || v.is_chart() {
        return Ok(CheckReport::refused(
            suite,
            "comparison needs periodic fields; chart-local data has no closed-torus mass".into(),
            None,
            prov,
        ));
    }
    for (name, field) in [("first", u), ("second", v)] {
        let rep = verify_m_sh(field, m)?;
        if !rep.pass() {
            return Ok(CheckReport::refused(
                suite,
                format!(
                    "hypothesis failed: {name} field is not {m}-subharmonic \
                     (worst cone margin {:.3e})",
                    rep.worst_margin
                ),
                rep.location,
                prov,
            ));
        }
    }
    let mask = RegionMask::strictly_below(u, v)?;
    let mass_v = integrate(&hessian_measure(v, m)?, &mask)?;
    let mass_u = integrate(&hessian_measure(u, m)?, &mask)?;
    Ok(CheckReport::from_margin(
        suite,
        mass_u - mass_v,
        mass_tol(grid.side()),
        None,
        prov,
    )
    .with_detail("mass_of_v_on_sublevel", mass_v)
    .with_detail("mass_of_u_on_sublevel", mass_u)
    .with_detail("mask_fraction", mask.fraction()))
}

/// Domination principle: if `H_m(u)` carries no mass on `{u < v}`, then
/// `u ≥ v` (up to `tol_dom` = [`DOMINATION_TOL_CELLS`]·h, the discrete slack
/// of the statement). When the hypothesis mass exceeds the grid's mass
/// tolerance the check refuses with "no claim" — the principle says nothing
/// about such pairs, and §5-type instances show the conclusion can genuinely
/// fail there.
pub fn check_domination(u: &TorusField, v: &TorusField, m: usize) -> Result<CheckReport> {
    same_grid("check_domination", u.grid(), v.grid())?;
    let grid = u.grid().clone();
    let prov = Provenance::grid(grid.complex_dim(), m, grid.side());
    let suite = "domination-principle";
    for (name, field) in [("first", u), ("second", v)] {
        let rep = verify_m_sh(field, m)?;
        if !rep.pass() {
            return Ok(CheckReport::refused(
                suite,
                format!(
                    "hypothesis failed: {name} field is not {m}-subharmonic \
                     (worst cone margin {:.3e})",
                    rep.worst_margin
                ),
                rep.location,
                prov,
            ));
        }
    }
    let mask = RegionMask::strictly_below(u, v)?;
    let hypothesis_mass = integrate(&hessian_measure(u, m)?, &mask)?;
    let tol = mass_tol(grid.side());
    if hypothesis_mass > tol {
        return Ok(CheckReport::refused(
            suite,
            format!(
                "hypothesis not met — no claim: H_{m}(u) carries mass {hypothesis_mass:.3e} \
                 on {{u < v}} (tolerance {tol:.1e})"
            ),
            None,
            prov,
        )
        .with_detail("hypothesis_mass", hypothesis_mass)
        .with_detail("mask_fraction", mask.fraction()));
    }
    let chart = u.is_chart() || v.is_chart();
    let mut min_diff = f64::INFINITY;
    let mut at: Option<Vec<usize>> = None;
    grid.for_each_point(|flat, multi, _point| {
        if chart && !grid.chart_interior(multi) {
            return;
        }
        let diff = u.values()[flat] - v.values()[flat];
        if diff < min_diff {
            min_diff = diff;
            at = Some(multi.to_vec());
        }
    });
    let tol_dom = DOMINATION_TOL_CELLS * grid.spacing();
    Ok(CheckReport::from_margin(suite, min_diff, tol_dom, at, prov)
        .with_detail("hypothesis_mass", hypothesis_mass)
        .with_detail("min_difference", min_diff)
        .with_detail("mask_fraction", mask.fraction()))
}

/// Smooth shadow of the uniqueness statement: when two fields have the same
/// m-Hessian density pointwise (to equivalence tolerance), their difference
/// is constant up to `tol_dom`. Non-matching densities are a refusal — the
/// statement presumes equal measures.
pub fn uniqueness_shadow(u: &TorusField, v: &TorusField, m: usize) -> Result<CheckReport> {
    same_grid("uniqueness_shadow", u.grid(), v.grid())?;
    let grid = u.grid().clone();
    let prov = Provenance::grid(grid.complex_dim(), m, grid.side());
    let suite = "uniqueness-shadow";
    let du = hessian_measure(u, m)?;
    let dv = hessian_measure(v, m)?;
    let chart = u.is_chart() || v.is_chart();
    let mut max_gap = 0.0f64;
    let mut gap_at: Option<Vec<usize>> = None;
    let mut sum_diff = 0.0;
    let mut valid = 0usize;
    grid.for_each_point(|flat, multi, _point| {
        if chart && !grid.chart_interior(multi) {
            return;
        }
        valid += 1;
        sum_diff += u.values()[flat] - v.values()[flat];
        let gap = (du.values()[flat] - dv.values()[flat]).abs();
        if gap > max_gap {
            max_gap = gap;
            gap_at = Some(multi.to_vec());
        }
    });
    if max_gap > ORACLE_EQUIV_TOL {
        return Ok(CheckReport::refused(
            suite,
            format!(
                "densities differ (max pointwise gap {max_gap:.3e}); \
                 the uniqueness statement does not apply"
            ),
            gap_at,
            prov,
        ));
    }
    let mean = sum_diff / valid as f64;
    let mut deviation = 0.0f64;
    let mut dev_at: Option<Vec<usize>> = None;
    grid.for_each_point(|flat, multi, _point| {
        if chart && !grid.chart_interior(multi) {
            return;
        }
        let d = (u.values()[flat] - v.values()[flat] - mean).abs();
        if d > deviation {
            deviation = d;
            dev_at = Some(multi.to_vec());
        }
    });
    let tol_dom = DOMINATION_TOL_CELLS * grid.spacing();
    Ok(CheckReport::from_margin(suite, tol_dom - deviation, 0.0, dev_at, prov)
        .with_detail("mean_offset", mean)
        .with_detail("max_deviation", deviation))
}
