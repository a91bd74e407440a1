//! Cross-module flows: the 2-D radial quadrature against the full 4-D grid
//! pipeline (two genuinely independent routes to the same mass), chart-field
//! handling end to end, and byte determinism of reports and rendered
//! artifacts across independent recomputation.

use hessian_lab::capacity::{capacity_report, AdmissibleFamily};
use hessian_lab::config::RunConfig;
use hessian_lab::measures::{
    hessian_measure, integrate, total_mass_check, verify_m_sh, RegionMask,
};
use hessian_lab::potential::ClosedFormPotential;
use hessian_lab::singular::{
    default_resolution, mass_table, regularized_potential, singular_mass_with_background,
    LogMaxSpec,
};
use hessian_lab::svg::{line_chart, Series};
use hessian_lab::tol;
use hessian_lab::torus::{TorusField, TorusGrid};

/// Coarse smoothing scale for the cross-check: the 4-D grid route is
/// affordable at side 32 there (h = 1/32 is exactly the eps/8 admissibility
/// boundary), and both routes carry a few percent of their own
/// discretization error.
const CROSS_EPS: f64 = 0.25;

/// The rotation-invariant radial reduction and the full chart-grid pipeline
/// measure the same det-with-background mass over the same polydisc. The two
/// routes share no code below the potential definition: one integrates the
/// closed-form radial Hessian in (r1, r2), the other finite-differences the
/// sampled field on all four real axes.
#[test]
fn radial_and_grid_pipelines_agree_on_the_background_mass() {
    let spec = LogMaxSpec::new(0, 1, 1.0, CROSS_EPS, false).unwrap();
    let radial =
        singular_mass_with_background(&spec, 0.3, default_resolution(CROSS_EPS)).unwrap();

    let grid = TorusGrid::new(2, 32).unwrap();
    let field = TorusField::sample(&grid, &regularized_potential(spec)).unwrap();
    assert!(field.is_chart(), "log-type potentials sample as chart-local fields");
    let density = hessian_measure(&field, 2).unwrap();
    let polydisc = RegionMask::from_predicate(&grid, |p| {
        p[0] * p[0] + p[1] * p[1] < 0.09 && p[2] * p[2] + p[3] * p[3] < 0.09
    });
    let grid_mass = integrate(&density, &polydisc).unwrap();

    // Frozen anchors for each route, then the actual cross-check.
    assert!((radial / 0.847_386_4 - 1.0).abs() < 1e-5, "radial route moved: {radial}");
    assert!((grid_mass / 0.888_401_3 - 1.0).abs() < 1e-4, "grid route moved: {grid_mass}");
    let rel = (grid_mass - radial).abs() / radial;
    assert!(
        rel < tol::RADIAL_VS_GRID_TOL,
        "routes disagree by {:.2}% (radial {radial}, grid {grid_mass})",
        rel * 100.0
    );
}

/// Chart-local fields flow through the local machinery (pointwise cone
/// verification, masked integrals) but are refused by the closed-torus
/// conservation identity rather than silently mis-measured.
#[test]
fn chart_fields_are_verified_locally_but_refused_globally() {
    let spec = LogMaxSpec::new(0, 1, 1.0, CROSS_EPS, false).unwrap();
    let grid = TorusGrid::new(2, 32).unwrap();
    let field = TorusField::sample(&grid, &regularized_potential(spec)).unwrap();

    let verify = verify_m_sh(&field, 2).unwrap();
    assert!(
        verify.pass(),
        "the smooth-max potential is 2-subharmonic on the chart interior: {:?}",
        verify.outcome
    );

    let conservation = total_mass_check(&field, 2).unwrap();
    assert!(conservation.refused_outcome(), "chart fields must be refused, not graded");
    let json = conservation.to_json();
    assert!(json.contains("chart"), "refusal should say why: {json}");
}

/// Two fully independent recomputations (fresh grid, fresh field, fresh
/// check) serialize to byte-identical reports — no timestamps, pointers, or
/// iteration-order noise may leak into the JSON.
#[test]
fn reports_are_byte_deterministic_across_recomputation() {
    let run = || {
        let grid = TorusGrid::new(2, 32).unwrap();
        let u = ClosedFormPotential::separable_trig(2, 0.02);
        let field = TorusField::sample(&grid, &u).unwrap();
        total_mass_check(&field, 2).unwrap().to_json()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "conservation report must be byte-deterministic");

    let cap = || {
        let grid = TorusGrid::new(2, 16).unwrap();
        let family = AdmissibleFamily::standard(2);
        let mask = RegionMask::from_predicate(&grid, |p| p[0] < 0.0);
        capacity_report(&mask, &family, 2, 10, 42).unwrap().to_json()
    };
    assert_eq!(cap(), cap(), "capacity report must be byte-deterministic");
}

/// A mass table rendered to SVG is reproducible byte for byte from a fresh
/// computation of the same ladder, and the chart carries every series.
#[test]
fn mass_table_renders_to_a_deterministic_chart() {
    let render = || {
        let table = mass_table(2.0, &[0.1, 0.05, 0.025], 0.9).unwrap();
        let series = [
            Series {
                label: "diagonal mass".into(),
                points: table.rows().iter().map(|r| (r.eps, r.mass_a)).collect(),
            },
            Series {
                label: "mixed mass".into(),
                points: table.rows().iter().map(|r| (r.eps, r.mass_b)).collect(),
            },
        ];
        line_chart("singular masses along the eps ladder", "eps", "mass", &series, true, false)
            .unwrap()
    };
    let first = render();
    assert_eq!(first, render(), "chart bytes must be reproducible");
    assert!(first.starts_with("<svg"), "renders an inline SVG document");
    assert!(first.contains("diagonal mass") && first.contains("mixed mass"));
}

/// A parsed configuration drives the same verdicts as direct calls: the
/// derived mass tolerance matches the pinned grid law unless overridden, and
/// the configured grid/degree reproduce the conservation verdict.
#[test]
fn config_driven_runs_match_direct_calls() {
    let cfg = RunConfig::parse("grid = 32\nm = 2\n").unwrap();
    assert_eq!(cfg.n, 2, "dimension defaults");
    assert_eq!(cfg.mass_tolerance(), tol::mass_tol(32));

    let grid = TorusGrid::new(cfg.n, cfg.grid).unwrap();
    let u = ClosedFormPotential::separable_trig(cfg.n, 0.02);
    let field = TorusField::sample(&grid, &u).unwrap();
    let rep = total_mass_check(&field, cfg.m).unwrap();
    assert!(rep.pass());
    assert!(rep.details["deviation"].abs() <= cfg.mass_tolerance());

    let tighter = RunConfig::parse("grid = 32\nm = 2\ntol-mass = 1e-12\n").unwrap();
    assert_eq!(tighter.mass_tolerance(), 1e-12);
    // The override is a policy knob for callers; the measured deviation on
    // this exactly-conserved instance still satisfies even the tight bound.
    assert!(rep.details["deviation"].abs() <= tighter.mass_tolerance());
}
