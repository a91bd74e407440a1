//! Pointwise Hermitian algebra: eigenvalues relative to a metric, elementary
//! symmetric polynomials, Gårding-cone membership, and normalized Hessian
//! densities (diagonal and mixed, the latter via polarization).
//!
//! Normalization anchor: `hessian_density(g, g, m) == 1` exactly — the m-th
//! power of the metric form against the volume form is 1 by convention, and
//! every density in the crate inherits its scale from this anchor.

use crate::error::{LabError, Result};
use crate::report::{CheckReport, Provenance};
use crate::sum::Neumaier;
use crate::tol;
use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense Hermitian matrix, row-major. Self-adjointness is enforced by
/// symmetrization on construction, so every stored value satisfies
/// `a[p][q] == conj(a[q][p])` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    a: Vec<C64>,
}

impl HermitianMatrix {
    /// Builds from row-major entries, symmetrizing `(A + A*)/2` exactly.
    pub fn new(n: usize, entries: Vec<C64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(LabError::Dimension {
                op: "HermitianMatrix::new",
                expected: n * n,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::NonFinite {
                op: "HermitianMatrix::new",
            });
        }
        let mut a = entries;
        for p in 0..n {
            a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
            for q in (p + 1)..n {
                let m = (a[p * n + q] + a[q * n + p].conj()) * 0.5;
                a[p * n + q] = m;
                a[q * n + p] = m.conj();
            }
        }
        Ok(Self { n, a })
    }

    /// Strict constructor: rejects entries whose asymmetry exceeds
    /// `1e-12 * max|entry|` instead of silently symmetrizing.
    pub fn try_exact(n: usize, entries: Vec<C64>) -> Result<Self> {
        let scale = entries.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let mut max_asym = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                let d = (entries[p * n + q] - entries[q * n + p].conj()).norm();
                max_asym = max_asym.max(d);
            }
        }
        if max_asym > 1e-12 * scale.max(1.0) {
            return Err(LabError::NotHermitian { max_asym });
        }
        Self::new(n, entries)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut a = Vec::with_capacity(n * n);
        for p in 0..n {
            for q in 0..n {
                a.push(f(p, q));
            }
        }
        Self::new(n, a)
    }

    pub fn identity(n: usize) -> Self {
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for p in 0..n {
            a[p * n + p] = C64::new(1.0, 0.0);
        }
        Self { n, a }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            a: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for p in 0..n {
            a[p * n + p] = C64::new(d[p], 0.0);
        }
        Self { n, a }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> C64 {
        self.a[p * self.n + q]
    }

    pub fn entries(&self) -> &[C64] {
        &self.a
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            a: self.a.iter().map(|z| z * s).collect(),
        }
    }

    pub fn plus(&self, rhs: &Self) -> Result<Self> {
        if rhs.n != self.n {
            return Err(LabError::Dimension {
                op: "HermitianMatrix::plus",
                expected: self.n,
                actual: rhs.n,
            });
        }
        Ok(Self {
            n: self.n,
            a: self
                .a
                .iter()
                .zip(rhs.a.iter())
                .map(|(x, y)| x + y)
                .collect(),
        })
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Positive-definite Hermitian metric. Positive definiteness is proven at
/// construction by a complex Cholesky factorization, which later also powers
/// the pencil reduction, so an invalid metric fails fast and exactly once.
#[derive(Clone, Debug)]
pub struct Metric {
    g: HermitianMatrix,
    /// Lower-triangular Cholesky factor, row-major; `None` marks the exact
    /// identity, for which all transforms are skipped bit-exactly.
    chol: Option<Vec<C64>>,
}

impl Metric {
    pub fn identity(n: usize) -> Self {
        Self {
            g: HermitianMatrix::identity(n),
            chol: None,
        }
    }

    pub fn new(g: HermitianMatrix) -> Result<Self> {
        if g == HermitianMatrix::identity(g.n) {
            return Ok(Self { g, chol: None });
        }
        let chol = cholesky_lower(&g)?;
        Ok(Self {
            g,
            chol: Some(chol),
        })
    }

    pub fn dim(&self) -> usize {
        self.g.n
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.g
    }

    pub fn is_identity(&self) -> bool {
        self.chol.is_none()
    }

    /// Congruence transform `L⁻¹ A L⁻*`, mapping the pencil (A, g) to an
    /// ordinary Hermitian eigenproblem. Identity metric returns A unchanged.
    pub fn reduce(&self, a: &HermitianMatrix) -> Result<HermitianMatrix> {
        if a.n != self.dim() {
            return Err(LabError::Dimension {
                op: "Metric::reduce",
                expected: self.dim(),
                actual: a.n,
            });
        }
        let Some(l) = &self.chol else {
            return Ok(a.clone());
        };
        let n = a.n;
        // X = L⁻¹ A  (forward substitution down each column).
        let mut x = a.a.clone();
        for c in 0..n {
            for i in 0..n {
                let mut v = x[i * n + c];
                for k in 0..i {
                    v -= l[i * n + k] * x[k * n + c];
                }
                x[i * n + c] = v / l[i * n + i];
            }
        }
        // T = X L⁻*  (solve T L* = X along each row; L* is upper triangular
        // with (L*)[k][j] = conj(L[j][k])).
        let mut t = x;
        for r in 0..n {
            for j in 0..n {
                let mut v = t[r * n + j];
                for k in 0..j {
                    v -= t[r * n + k] * l[j * n + k].conj();
                }
                t[r * n + j] = v / l[j * n + j].conj();
            }
        }
        HermitianMatrix::new(n, t)
    }

    /// Inverse congruence `L T L*`: carries a matrix from the reduced frame
    /// back to the original pencil, so `unreduce(reduce(A)) == A` up to
    /// roundoff. Used to construct matrices with a prescribed pencil
    /// spectrum. Identity metric returns T unchanged.
    pub fn unreduce(&self, t: &HermitianMatrix) -> Result<HermitianMatrix> {
        if t.n != self.dim() {
            return Err(LabError::Dimension {
                op: "Metric::unreduce",
                expected: self.dim(),
                actual: t.n,
            });
        }
        let Some(l) = &self.chol else {
            return Ok(t.clone());
        };
        let n = t.n;
        // X = L T.
        let mut x = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = C64::new(0.0, 0.0);
                for k in 0..=i {
                    v += l[i * n + k] * t.a[k * n + j];
                }
                x[i * n + j] = v;
            }
        }
        // A = X L*, with (L*)[k][j] = conj(L[j][k]) nonzero for k ≤ j.
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = C64::new(0.0, 0.0);
                for k in 0..=j {
                    v += x[i * n + k] * l[j * n + k].conj();
                }
                a[i * n + j] = v;
            }
        }
        HermitianMatrix::new(n, a)
    }
}

/// Complex Cholesky `g = L L*`; fails on the first non-positive pivot.
fn cholesky_lower(g: &HermitianMatrix) -> Result<Vec<C64>> {
    let n = g.n;
    let scale = g.max_abs_entry().max(1.0);
    let mut l = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut s = g.get(j, j).re;
        for k in 0..j {
            s -= l[j * n + k].norm_sqr();
        }
        if s <= 1e-14 * scale {
            return Err(LabError::MetricNotPositive { pivot: j, value: s });
        }
        let ljj = s.sqrt();
        l[j * n + j] = C64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut t = g.get(i, j);
            for k in 0..j {
                t -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = t / ljj;
        }
    }
    Ok(l)
}

/// Real spectrum sorted ascending.
#[derive(Clone, Debug)]
pub struct EigenSpectrum {
    values: Vec<f64>,
}

impl EigenSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// n = 1 and n = 2 use closed forms (exact on the identity); larger n goes
/// through the symmetric real embedding `[[Re A, -Im A], [Im A, Re A]]`,
/// whose spectrum is that of A with every eigenvalue doubled.
pub fn hermitian_eigenvalues(a: &HermitianMatrix) -> Vec<f64> {
    let n = a.n;
    match n {
        1 => vec![a.get(0, 0).re],
        2 => {
            let p = a.get(0, 0).re;
            let q = a.get(1, 1).re;
            let mean = 0.5 * (p + q);
            let disc = (0.25 * (p - q) * (p - q) + a.get(0, 1).norm_sqr()).sqrt();
            vec![mean - disc, mean + disc]
        }
        _ => {
            let m = nalgebra::DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
                let (bi, p) = (i / n, i % n);
                let (bj, q) = (j / n, j % n);
                let z = a.get(p, q);
                match (bi, bj) {
                    (0, 0) | (1, 1) => z.re,
                    (0, 1) => -z.im,
                    _ => z.im,
                }
            });
            let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            // Doubled spectrum: after sorting, every second entry picks one
            // representative per pair.
            (0..n).map(|i| ev[2 * i]).collect()
        }
    }
}

/// Generalized eigenvalues of the pencil (A, g): Cholesky reduction followed
/// by an ordinary Hermitian eigensolve. Byte-identical A and g short-circuit
/// to the all-ones spectrum, making the normalization anchor exact.
pub fn generalized_eigenvalues(a: &HermitianMatrix, g: &Metric) -> Result<EigenSpectrum> {
    if a.n != g.dim() {
        return Err(LabError::Dimension {
            op: "generalized_eigenvalues",
            expected: g.dim(),
            actual: a.n,
        });
    }
    if a == g.matrix() {
        return Ok(EigenSpectrum {
            values: vec![1.0; a.n],
        });
    }
    let t = g.reduce(a)?;
    let mut values = hermitian_eigenvalues(&t);
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(EigenSpectrum { values })
}

/// Exact binomial coefficient as f64 (n small throughout this crate).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v.round()
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0f64, |acc, i| acc * i as f64)
}

/// k-th elementary symmetric polynomial; `sigma_0 = 1`.
pub fn sigma_k(lambda: &[f64], k: usize) -> Result<f64> {
    if k > lambda.len() {
        return Err(LabError::IndexRange {
            op: "sigma_k",
            index: k,
            max: lambda.len(),
        });
    }
    Ok(sigma_ladder(lambda, k)[k])
}

/// All of sigma_0..=sigma_m in one Newton-ladder pass.
pub fn sigma_ladder(lambda: &[f64], m: usize) -> Vec<f64> {
    let mut e = vec![0.0f64; m + 1];
    e[0] = 1.0;
    for &l in lambda {
        for j in (1..=m).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e
}

/// Outcome of a closed-cone membership test with degree-scaled margins.
#[derive(Clone, Debug)]
pub struct ConeMembership {
    pub inside: bool,
    /// min over k of sigma_k / |lambda|_max^k — the scaled distance to the
    /// worst cone face (0 when the spectrum is identically zero).
    pub min_scaled_margin: f64,
    /// k achieving the minimum.
    pub worst_k: usize,
}

/// Closed Gårding-cone test: `sigma_k(lambda) >= -CONE_TOL * |lambda|_max^k`
/// for every k = 1..=m. Boundary spectra (some sigma_k = 0) are inside.
pub fn cone_membership(lambda: &[f64], m: usize) -> ConeMembership {
    let lmax = lambda.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let ladder = sigma_ladder(lambda, m);
    let mut min_scaled = f64::INFINITY;
    let mut worst_k = 1;
    let mut inside = true;
    let mut scale = 1.0f64;
    for k in 1..=m {
        scale *= lmax;
        let margin = if scale > 0.0 {
            ladder[k] / scale
        } else {
            // Zero spectrum: every sigma_k is exactly 0, squarely on the
            // boundary of the closed cone.
            0.0
        };
        if margin < min_scaled {
            min_scaled = margin;
            worst_k = k;
        }
        if margin < -tol::CONE_TOL {
            inside = false;
        }
    }
    ConeMembership {
        inside,
        min_scaled_margin: min_scaled,
        worst_k,
    }
}

/// Pointwise m-subharmonicity: the pencil spectrum of (A, g) lies in the
/// closed cone Γ̄_m.
pub fn is_m_sh_point(a: &HermitianMatrix, g: &Metric, m: usize) -> Result<bool> {
    check_m_range(m, g.dim())?;
    let spec = generalized_eigenvalues(a, g)?;
    Ok(cone_membership(spec.values(), m).inside)
}

fn check_m_range(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(LabError::IndexRange {
            op: "hessian degree m",
            index: m,
            max: n,
        });
    }
    Ok(())
}

/// sigma_m(lambda + t·1) expressed in the sigma ladder of lambda:
/// Σ_{j=0..m} C(n−j, m−j) · sigma_j(lambda) · t^{m−j}. Returned as
/// coefficients c[i] of t^i, i = 0..=m.
fn shifted_sigma_poly(lambda: &[f64], m: usize) -> Vec<f64> {
    let n = lambda.len();
    let ladder = sigma_ladder(lambda, m);
    let mut coeff = vec![0.0f64; m + 1];
    for j in 0..=m {
        coeff[m - j] += binomial(n - j, m - j) * ladder[j];
    }
    coeff
}

fn eval_poly(coeff: &[f64], t: f64) -> f64 {
    let mut v = 0.0;
    for &c in coeff.iter().rev() {
        v = v * t + c;
    }
    v
}

/// The eps-perturbation route to cone membership: lambda ∈ Γ̄_m iff
/// sigma_m(lambda + ε·1) ≥ 0 for every ε > 0.
///
/// The infimum over ε is evaluated exactly-in-structure: sigma_m(lambda + t·1)
/// is a degree-m polynomial in t with positive leading coefficient, so its
/// minimum on (0, ∞) is attained at t → 0⁺ or at a positive critical point.
/// Critical points come from a companion-matrix root solve of the derivative;
/// a log-spaced probe grid over [1e−6, 1e2] is evaluated as well, both as a
/// safety net and because the grid is the documented reference behavior.
pub fn eps_perturbation_criterion(lambda: &[f64], m: usize) -> bool {
    let coeff = shifted_sigma_poly(lambda, m);
    let lmax = lambda.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let scale = lmax.max(1.0).powi(m as i32);

    let mut min_val = eval_poly(&coeff, 0.0);

    // Log grid probes.
    let (lo, hi) = (tol::EPS_PROBE_MIN.ln(), tol::EPS_PROBE_MAX.ln());
    for i in 0..tol::EPS_PROBE_COUNT {
        let t = (lo + (hi - lo) * i as f64 / (tol::EPS_PROBE_COUNT - 1) as f64).exp();
        min_val = min_val.min(eval_poly(&coeff, t));
    }

    // Positive real critical points of the shifted polynomial.
    let deriv: Vec<f64> = (1..coeff.len()).map(|i| coeff[i] * i as f64).collect();
    for root in real_positive_roots(&deriv) {
        min_val = min_val.min(eval_poly(&coeff, root));
    }

    min_val >= -tol::CONE_TOL * scale
}

/// Real positive roots of a polynomial (coefficients ascending by degree),
/// via the companion matrix of its monic normalization.
fn real_positive_roots(coeff: &[f64]) -> Vec<f64> {
    // Trim trailing (leading-degree) zeros.
    let mut c: Vec<f64> = coeff.to_vec();
    while c.len() > 1 && c.last().copied().unwrap_or(0.0).abs() == 0.0 {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        let r = -c[0] / c[1];
        return if r > 0.0 { vec![r] } else { Vec::new() };
    }
    let lead = c[deg];
    let comp = nalgebra::DMatrix::<f64>::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = comp.complex_eigenvalues();
    let mut out = Vec::new();
    for z in eig.iter() {
        if z.im.abs() <= 1e-8 * (1.0 + z.re.abs()) && z.re > 0.0 {
            out.push(z.re);
        }
    }
    out
}

/// Normalized Hessian density: sigma_m of the pencil spectrum divided by
/// C(n, m), so that A = g gives exactly 1.
pub fn hessian_density(a: &HermitianMatrix, g: &Metric, m: usize) -> Result<f64> {
    check_m_range(m, g.dim())?;
    let spec = generalized_eigenvalues(a, g)?;
    Ok(sigma_ladder(spec.values(), m)[m] / binomial(g.dim(), m))
}

/// Fully symmetric multilinear extension of [`hessian_density`] via the
/// polarization identity over subset sums:
///
/// D(A_1..A_m) = (1/(m!·C(n,m))) · Σ_{∅≠S⊆{1..m}} (−1)^{m−|S|} ·
///               sigma_m(spectrum of Σ_{i∈S} A_i).
///
/// The 1/C(n,m) makes the diagonal D(A,..,A) equal `hessian_density(A)`
/// exactly; multilinearity and argument symmetry are structural. The
/// alternating subset sum is accumulated with compensated summation.
pub fn mixed_hessian_density(mats: &[HermitianMatrix], g: &Metric) -> Result<f64> {
    let n = g.dim();
    let m = mats.len();
    check_m_range(m, n)?;
    for a in mats {
        if a.dim() != n {
            return Err(LabError::Dimension {
                op: "mixed_hessian_density",
                expected: n,
                actual: a.dim(),
            });
        }
    }
    // Reduce each factor once; subset sums then live in the reduced frame,
    // where the pencil becomes an ordinary eigenproblem.
    let reduced: Vec<HermitianMatrix> = mats
        .iter()
        .map(|a| g.reduce(a))
        .collect::<Result<Vec<_>>>()?;

    let mut acc = Neumaier::new();
    for s in 1u32..(1u32 << m) {
        let mut sum = HermitianMatrix::zero(n);
        for (i, r) in reduced.iter().enumerate() {
            if s >> i & 1 == 1 {
                sum = sum.plus(r)?;
            }
        }
        let lam = hermitian_eigenvalues(&sum);
        let sm = sigma_ladder(&lam, m)[m];
        let sign = if (m - s.count_ones() as usize) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        acc.add(sign * sm);
    }
    Ok(acc.value() / (factorial(m) * binomial(n, m)))
}

/// The mixed-density lower bound by the geometric mean of the diagonal
/// densities, valid for tuples inside the cone.
///
/// Refuses (does not fail) when a factor is outside Γ̄_m: the inequality is
/// only claimed inside the cone, and a verdict under a broken hypothesis
/// would be meaningless.
pub fn garding_mixed_check(mats: &[HermitianMatrix], g: &Metric) -> Result<CheckReport> {
    let n = g.dim();
    let m = mats.len();
    check_m_range(m, n)?;
    let prov = Provenance::algebra(n, m);

    for (j, a) in mats.iter().enumerate() {
        if !is_m_sh_point(a, g, m)? {
            let spec = generalized_eigenvalues(a, g)?;
            let mem = cone_membership(spec.values(), m);
            return Ok(CheckReport::refused(
                "garding-mixed",
                format!(
                    "factor {j} is outside the closed Γ_{m} cone (scaled sigma_{} margin {:.3e})",
                    mem.worst_k, mem.min_scaled_margin
                ),
                Some(vec![j]),
                prov,
            ));
        }
    }

    let mixed = mixed_hessian_density(mats, g)?;
    let mut geo = 1.0f64;
    let mut min_density = f64::INFINITY;
    let mut min_density_at = 0usize;
    for (j, a) in mats.iter().enumerate() {
        // Densities of cone members are >= 0 up to eigensolve roundoff;
        // clamp so the geometric mean stays real.
        let d = hessian_density(a, g, m)?;
        if d < min_density {
            min_density = d;
            min_density_at = j;
        }
        geo *= d.max(0.0);
    }
    let geo = geo.powf(1.0 / m as f64);
    let margin = mixed - geo;
    let tolerance = tol::GARDING_MARGIN_TOL * geo.max(1.0);
    // A failing margin has no single offending point; report the factor with
    // the smallest diagonal density as the most informative parameter index.
    Ok(
        CheckReport::from_margin("garding-mixed", margin, tolerance, Some(vec![min_density_at]), prov)
            .with_detail("mixed_density", mixed)
            .with_detail("geometric_mean", geo),
    )
}
