//! Verification suites over certificate traces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{extend_orthonormal, sym_eig, sym_eig_range, Vector, PSEUDO_SOLVE_CUTOFF};
use crate::methods::{krylov_basis, Method};
use crate::problem::{Objective, QuadraticProblem};
use crate::trace::CertifiedTrace;

/// Relative tolerance for the certificate inequalities.
pub const CERT_TOL: f64 = 1e-9;
/// Krylov membership and restricted-spectrum probes are limited to this size.
pub const KRYLOV_MAX_DIM: usize = 64;
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
pub const MEMBERSHIP_TOL: f64 = 1e-8;
pub const SANDWICH_TOL: f64 = 1e-8;
pub const TERMINATION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Checked,
    /// The method makes no such claim.
    NotClaimed,
    /// Claimed, but the trace lacks what the check needs (e.g. `x*`).
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub pass: bool,
    /// Largest observed value of the checked quantity (a violation when positive
    /// for inequality checks); `None` if nothing was evaluated.
    pub worst: Option<f64>,
    pub at_iter: Option<usize>,
    pub tolerance: Option<f64>,
    pub status: CheckStatus,
}

impl CheckResult {
    fn not_run(name: &str, status: CheckStatus) -> Self {
        CheckResult {
            check: name.to_string(),
            pass: true,
            worst: None,
            at_iter: None,
            tolerance: None,
            status,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(checks: Vec<CheckResult>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        VerificationReport { checks, pass }
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.pass = self.checks.iter().all(|c| c.pass);
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Largest `worst / tolerance` over checked entries; below 1 means passing.
    pub fn worst_ratio(&self) -> f64 {
        self.checks
            .iter()
            .filter_map(|c| match (c.worst, c.tolerance) {
                (Some(w), Some(t)) if t > 0.0 => Some(if w.is_nan() { f64::INFINITY } else { w / t }),
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}

/// Tracks the maximum of `value − tolerance` and where it happened.
/// NaN always counts as a violation.
struct Worst {
    name: &'static str,
    worst: Option<f64>,
    at: Option<usize>,
    tol: Option<f64>,
    margin: f64,
    pass: bool,
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Worst {
            name,
            worst: None,
            at: None,
            tol: None,
            margin: f64::NEG_INFINITY,
            pass: true,
        }
    }

    fn observe(&mut self, k: usize, value: f64, tol: f64) {
        let margin = value - tol;
        if value.is_nan() || !(margin <= 0.0) {
            self.pass = false;
        }
        if self.worst.is_none() || margin > self.margin || value.is_nan() {
            if !(self.worst.is_some_and(f64::is_nan)) {
                self.margin = margin;
                self.worst = Some(value);
                self.at = Some(k);
                self.tol = Some(tol);
            }
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            check: self.name.to_string(),
            pass: self.pass,
            worst: self.worst,
            at_iter: self.at,
            tolerance: self.tol,
            status: CheckStatus::Checked,
        }
    }
}

/// `min{4/((k+1)(k+2)), (1 − √(μ/L))^k} · (L − μ)/2 · R2`
pub fn theorem_bound(k: usize, mu: f64, l: f64, r2: f64) -> Result<f64> {
    if !(mu >= 0.0 && l.is_finite() && mu < l) {
        return Err(Error::InvalidInput(format!("bound needs 0 <= mu < L (got mu = {mu}, L = {l})")));
    }
    if !(r2 >= 0.0 && r2.is_finite()) {
        return Err(Error::InvalidInput(format!("R2 must be finite and >= 0 (got {r2})")));
    }
    let k = k as f64;
    let sublinear = 4.0 / ((k + 1.0) * (k + 2.0));
    let linear = (1.0 - (mu / l).sqrt()).powf(k);
    Ok(sublinear.min(linear) * 0.5 * (l - mu) * r2)
}

/// Smallest `k` with `theorem_bound(k, μ, L, R2) ≤ target`.
pub fn theorem_iterations(mu: f64, l: f64, r2: f64, target: f64) -> Result<usize> {
    let c = theorem_bound(0, mu, l, r2)?;
    if !(target > 0.0) {
        return Err(Error::InvalidInput(format!("target must be > 0 (got {target})")));
    }
    if c <= target {
        return Ok(0);
    }
    // (k+1)(k+2) ≥ 4c/t
    let need = 4.0 * c / target;
    let mut k1 = (((1.0 + 4.0 * need).sqrt() - 3.0) / 2.0).max(0.0).floor() as usize;
    while theorem_bound(k1, 0.0, 1.0, 1.0)? * 2.0 * c > target {
        k1 += 1;
    }
    let mut best = k1;
    if mu > 0.0 {
        let q = 1.0 - (mu / l).sqrt();
        if q > 0.0 {
            let mut k2 = ((target / c).ln() / q.ln()).floor().max(0.0) as usize;
            while q.powf(k2 as f64) * c > target {
                k2 += 1;
            }
            best = best.min(k2);
        } else {
            best = best.min(1);
        }
    }
    Ok(best)
}

fn malformed(trace: &CertifiedTrace) -> Result<()> {
    if trace.rows.is_empty() {
        return Err(Error::InvalidInput("trace has no rows".into()));
    }
    for (i, r) in trace.rows.iter().enumerate() {
        if r.k != i {
            return Err(Error::InvalidInput(format!("row {i} is labelled iteration {}", r.k)));
        }
    }
    let cert: Vec<bool> = trace.rows.iter().map(|r| r.has_certificate()).collect();
    if let Some(first) = cert.iter().position(|&c| c) {
        if cert[first..].iter().any(|&c| !c) {
            return Err(Error::InvalidInput("certificate columns have gaps".into()));
        }
        if trace.meta.schedule_mu.is_none() {
            return Err(Error::InvalidInput("certified trace without schedule metadata".into()));
        }
        for r in &trace.rows[first..] {
            if r.a.is_none() || r.big_a.is_none() {
                return Err(Error::InvalidInput(format!("row {} lacks a or A", r.k)));
            }
        }
    }
    if trace.meta.claims_certificate && !cert.iter().any(|&c| c) {
        return Err(Error::InvalidInput("trace claims a certificate but has none".into()));
    }
    Ok(())
}

/// Certificate checks from the scalar columns alone, so CSV traces verify too.
pub fn check_certificate(trace: &CertifiedTrace) -> Result<VerificationReport> {
    malformed(trace)?;
    let meta = &trace.meta;
    let tol = CERT_TOL * meta.scale;
    let l = meta.l;
    let mut checks = Vec::new();

    let claims = meta.claims_certificate;
    let uncertified_cg = meta.method == Method::Cg && !claims;

    if uncertified_cg {
        checks.push(CheckResult::not_run("upper_descent", CheckStatus::NotClaimed));
    } else {
        let mut w = Worst::new("upper_descent");
        for r in trace.rows.iter().filter(|r| !claims || r.has_certificate()) {
            let v = r.f_y - (r.f_x - r.grad_norm * r.grad_norm / (2.0 * l));
            w.observe(r.k, v, tol);
        }
        checks.push(w.finish());
    }

    if matches!(meta.method, Method::Cg | Method::GradientDescent) {
        let mut w = Worst::new("upper_monotone");
        for pair in trace.rows.windows(2) {
            w.observe(pair[1].k, pair[1].f_y - pair[0].f_y, tol);
        }
        checks.push(w.finish());
    }

    let cert_names = [
        "phi_monotone",
        "step_inequality",
        "coupling_residual",
        "initial_potential",
        "lower_bound_valid",
        "theorem_bound",
        "anchor_offset",
    ];
    if !claims {
        for name in cert_names {
            checks.push(CheckResult::not_run(name, CheckStatus::NotClaimed));
        }
        return Ok(VerificationReport::new(checks));
    }

    let rows: Vec<_> = trace.rows.iter().filter(|r| r.has_certificate()).collect();
    let mu_s = meta.schedule_mu.expect("checked by malformed");
    let mu0 = l - mu_s;

    let mut phi = Worst::new("phi_monotone");
    let mut step = Worst::new("step_inequality");
    let mut coupling = Worst::new("coupling_residual");
    for pair in rows.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        let a = cur.a.unwrap();
        let big_a = cur.big_a.unwrap();
        let step_tol = tol;
        let dphi = cur.potential.unwrap() - prev.potential.unwrap();
        phi.observe(cur.k, dphi, step_tol);
        let coef = a * a / (2.0 * (mu0 + mu_s * big_a)) - big_a / (2.0 * l);
        let c = cur.coupling_residual.unwrap_or(f64::NAN);
        step.observe(cur.k, dphi - coef * cur.grad_norm * cur.grad_norm - c, step_tol);
        coupling.observe(cur.k, c.abs(), step_tol);
    }
    checks.push(phi.finish());
    checks.push(step.finish());
    checks.push(coupling.finish());

    let mut initial = Worst::new("initial_potential");
    let first = rows[0];
    initial.observe(first.k, first.potential.unwrap(), tol);
    checks.push(initial.finish());

    match (meta.f_star, meta.r2) {
        (Some(f_star), Some(r2)) => {
            let mut lower = Worst::new("lower_bound_valid");
            let mut bound = Worst::new("theorem_bound");
            let mut offset = Worst::new("anchor_offset");
            for r in &rows {
                match r.lower {
                    Some(lk) => lower.observe(r.k, lk - f_star, tol),
                    None => lower.observe(r.k, f64::NAN, tol),
                }
                match r.bound_rhs {
                    Some(b) => bound.observe(r.k, r.f_y - f_star - b, tol),
                    None => bound.observe(r.k, f64::NAN, tol),
                }
                if let Some(g) = r.gap {
                    let off = r.potential.unwrap() - r.big_a.unwrap() * g + 0.5 * mu0 * r2;
                    offset.observe(r.k, off.abs(), tol * r.big_a.unwrap());
                }
            }
            checks.push(lower.finish());
            checks.push(bound.finish());
            checks.push(offset.finish());
        }
        _ => {
            for name in ["lower_bound_valid", "theorem_bound", "anchor_offset"] {
                checks.push(CheckResult::not_run(name, CheckStatus::Skipped));
            }
        }
    }

    if let Some(p) = &trace.paranoid {
        let mut v = Worst::new("v_closed_form");
        v.observe(p.v_at_iter, p.max_v_rel_err, 1e-10);
        checks.push(v.finish());
        let mut m = Worst::new("m_recursion");
        m.observe(p.m_at_iter, p.max_m_rel_err, 1e-9);
        checks.push(m.finish());
    }
    if let Some(o) = &trace.oracle {
        let mut w = Worst::new("oracle_equivalence");
        w.observe(o.at_iter, o.max_abs_diff, o.tolerance);
        checks.push(w.finish());
    }

    Ok(VerificationReport::new(checks))
}

fn trace_points(trace: &CertifiedTrace) -> Result<Vec<&crate::trace::RowVectors>> {
    trace
        .rows
        .iter()
        .map(|r| {
            r.vectors
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("trace was recorded without vectors".into()))
        })
        .collect()
}

/// Pairwise normalized inner products of `∇f(y_k)` along a trace.
pub fn check_cg_orthogonality(trace: &CertifiedTrace, problem: &QuadraticProblem) -> Result<VerificationReport> {
    let points = trace_points(trace)?;
    let grads: Vec<Vector> = points.iter().map(|p| problem.gradient(&p.y)).collect();
    let g0 = problem.gradient(problem.x0()).norm();
    let floor = 1e-10 * g0;
    let mut w = Worst::new("cg_orthogonality");
    for k in 0..grads.len() {
        let nk = grads[k].norm();
        if nk <= floor {
            continue;
        }
        for i in 0..k {
            let ni = grads[i].norm();
            if ni <= floor {
                continue;
            }
            w.observe(k, grads[k].dot(&grads[i]).abs() / (nk * ni), ORTHOGONALITY_TOL);
        }
    }
    Ok(VerificationReport::new(vec![w.finish()]))
}

/// `min_{k ≤ n} ‖∇f(y_k)‖ / ‖∇f(x₀)‖ ≤ 1e−8`.
pub fn check_cg_termination(trace: &CertifiedTrace, problem: &QuadraticProblem) -> Result<VerificationReport> {
    let points = trace_points(trace)?;
    let g0 = problem.gradient(problem.x0()).norm();
    let mut best = (f64::INFINITY, 0usize);
    for (k, p) in points.iter().enumerate().take(problem.n() + 1) {
        let ratio = if g0 == 0.0 { 0.0 } else { problem.gradient(&p.y).norm() / g0 };
        if ratio < best.0 {
            best = (ratio, k);
        }
    }
    let mut w = Worst::new("cg_termination");
    w.observe(best.1, best.0, 1e-8);
    Ok(VerificationReport::new(vec![w.finish()]))
}

/// `‖(I − Π_K) w‖` for an orthonormal `basis` of `K`.
fn residual_outside(basis: &[Vector], w: &Vector) -> f64 {
    let mut r = w.clone();
    // Two passes keep the projection accurate when `w` is nearly inside.
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(&r);
            r.axpy(-c, q);
        }
    }
    r.norm()
}

/// Checks `x ∈ x₀ + K_j`, `v, y ∈ x₀ + K_{j+1}` where `j` is the ADGT index
/// of each row (row − 1 for shadow-certified CG rows).
pub fn check_krylov_membership(trace: &CertifiedTrace, problem: &QuadraticProblem) -> Result<VerificationReport> {
    let names = ["krylov_x", "krylov_v", "krylov_y"];
    if !trace.meta.krylov_consistent {
        return Ok(VerificationReport::new(
            names.iter().map(|n| CheckResult::not_run(n, CheckStatus::NotClaimed)).collect(),
        ));
    }
    if problem.n() > KRYLOV_MAX_DIM {
        return Ok(VerificationReport::new(
            names.iter().map(|n| CheckResult::not_run(n, CheckStatus::Skipped)).collect(),
        ));
    }
    let points = trace_points(trace)?;
    let basis = krylov_basis(problem, trace.rows.len() + 1);
    let x0 = problem.x0();
    let cg = trace.meta.method == Method::Cg;
    let k_of = |j: usize| &basis[..j.min(basis.len())];

    let mut wx = Worst::new("krylov_x");
    let mut wv = Worst::new("krylov_v");
    let mut wy = Worst::new("krylov_y");
    for (row, (r, p)) in trace.rows.iter().zip(&points).enumerate() {
        let rel = |w: &Vector, j: usize| {
            let d = w - x0;
            residual_outside(k_of(j), &d) / (1.0 + d.norm())
        };
        if cg {
            wy.observe(row, rel(&p.y, row), MEMBERSHIP_TOL);
            if r.has_certificate() {
                let j = row - 1;
                wx.observe(row, rel(&p.x, j), MEMBERSHIP_TOL);
                if let Some(v) = &p.v {
                    wv.observe(row, rel(v, j + 1), MEMBERSHIP_TOL);
                }
            }
        } else {
            wx.observe(row, rel(&p.x, row), MEMBERSHIP_TOL);
            wy.observe(row, rel(&p.y, row + 1), MEMBERSHIP_TOL);
            if let Some(v) = &p.v {
                wv.observe(row, rel(v, row + 1), MEMBERSHIP_TOL);
            }
        }
    }
    let finish = |w: Worst| {
        if w.worst.is_none() {
            CheckResult::not_run(w.name, CheckStatus::NotClaimed)
        } else {
            w.finish()
        }
    };
    Ok(VerificationReport::new(vec![finish(wx), finish(wv), finish(wy)]))
}

/// Extreme eigenvalues of `A` on the complements of `K_i` inside `range(A)`:
/// `ell_i` over the Euclidean complement, `mu_i` over the `A`-orthogonal one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedSpectrum {
    pub i: usize,
    pub mu_i: f64,
    pub ell_i: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub spectrum: RestrictedSpectrum,
    pub complement_dim: usize,
    /// `f(y_{i+1}) − (f(y_i) − ‖g_i‖²/(2ℓ_i))`, should be ≤ 0.
    pub upper_violation: f64,
    /// `f(y_{i+1}) − f*` should be ≥ 0; this is its negation.
    pub middle_violation: f64,
    /// `(f(y_i) − ‖g_i‖²/(2μ_i)) − f*`, should be ≤ 0.
    pub lower_violation: f64,
    /// For a one-dimensional complement: `|f(y_{i+1}) − f*|`.
    pub termination_gap: Option<f64>,
    pub holds: bool,
}

/// Restricted-spectrum sandwich along a CG trace (`n ≤ 64`).
pub fn restricted_sandwich(problem: &QuadraticProblem, trace: &CertifiedTrace) -> Result<Vec<SandwichRow>> {
    if trace.meta.method != Method::Cg {
        return Err(Error::InvalidInput("sandwich needs a conjugate gradient trace".into()));
    }
    let n = problem.n();
    if n > KRYLOV_MAX_DIM {
        return Err(Error::InvalidInput(format!("sandwich is limited to n <= {KRYLOV_MAX_DIM}")));
    }
    let points = trace_points(trace)?;
    let a = problem.matrix();
    let eig = sym_eig(a);
    let cutoff = PSEUDO_SOLVE_CUTOFF * eig.max().abs();
    let range: Vec<Vector> = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .filter(|(l, _)| **l > cutoff)
        .map(|(_, v)| v.clone())
        .collect();
    let rank = range.len();
    let krylov = krylov_basis(problem, n);
    let f_star = problem.f_star();
    let f_x0 = problem.value(problem.x0());
    let scale = 1.0 + f_x0.abs() + problem.l() * problem.initial_distance_sq();
    let tol = SANDWICH_TOL * scale;
    let g0 = problem.gradient(problem.x0()).norm();

    let mut out = Vec::new();
    for i in 0..points.len().saturating_sub(1) {
        let y = &points[i].y;
        let g = problem.gradient(y);
        if g.norm() <= 1e-10 * g0 || i >= rank {
            continue;
        }
        let k_i = &krylov[..i.min(krylov.len())];
        let complement = |start: Vec<Vector>| -> Vec<Vector> {
            let mut basis = start;
            let keep = basis.len();
            extend_orthonormal(&mut basis, &range, 1e-8);
            basis.split_off(keep)
        };
        let euclid = complement(k_i.to_vec());
        let a_k: Vec<Vector> = k_i.iter().map(|q| a.mul_vec(q)).collect();
        let mut a_start = Vec::new();
        extend_orthonormal(&mut a_start, &a_k, 1e-12);
        let a_orth = complement(a_start);
        if euclid.is_empty() || a_orth.is_empty() {
            continue;
        }
        let (_, ell) = sym_eig_range(&a.compress(&euclid))?;
        let (mu_i, _) = sym_eig_range(&a.compress(&a_orth))?;
        let f_i = problem.value(y);
        let f_next = problem.value(&points[i + 1].y);
        let gg = g.norm_sq();
        let upper_violation = f_next - (f_i - gg / (2.0 * ell));
        let middle_violation = f_star - f_next;
        let lower_violation = (f_i - gg / (2.0 * mu_i)) - f_star;
        let complement_dim = rank - i.min(krylov.len());
        let termination_gap = (complement_dim == 1).then(|| (f_next - f_star).abs());
        let holds = upper_violation <= tol
            && middle_violation <= tol
            && lower_violation <= tol
            && termination_gap.is_none_or(|t| t <= TERMINATION_TOL * scale);
        out.push(SandwichRow {
            spectrum: RestrictedSpectrum { i, mu_i, ell_i: ell },
            complement_dim,
            upper_violation,
            middle_violation,
            lower_violation,
            termination_gap,
            holds,
        });
    }
    Ok(out)
}

/// Moves `y_k` uphill by `sign(∂f/∂y₁)·e₁` and recomputes that row's scalars.
pub fn inject_upper_fault(trace: &mut CertifiedTrace, problem: &QuadraticProblem, k: usize) -> Result<()> {
    let row = trace
        .rows
        .get_mut(k)
        .ok_or_else(|| Error::InvalidInput(format!("no row {k}")))?;
    let vecs = row
        .vectors
        .as_mut()
        .ok_or_else(|| Error::InvalidInput("trace was recorded without vectors".into()))?;
    let g = problem.gradient(&vecs.y);
    let step = if g[0] >= 0.0 { 1.0 } else { -1.0 };
    vecs.y[0] += step;
    let f_new = problem.value(&vecs.y);
    let delta = f_new - row.f_y;
    row.f_y = f_new;
    row.upper = f_new;
    if let Some(gap) = row.gap.as_mut() {
        *gap += delta;
    }
    if let (Some(phi), Some(a)) = (row.potential.as_mut(), row.big_a) {
        *phi += a * delta;
    }
    Ok(())
}

/// Adds `delta` to the Φ column at row `k`.
pub fn tamper_phi(trace: &mut CertifiedTrace, k: usize, delta: f64) -> Result<()> {
    let phi = trace
        .rows
        .get_mut(k)
        .and_then(|r| r.potential.as_mut())
        .ok_or_else(|| Error::InvalidInput(format!("row {k} has no potential")))?;
    *phi += delta;
    Ok(())
}

/// Adds a seeded Gaussian vector to the recorded `v` at row `k`.
pub fn corrupt_v(trace: &mut CertifiedTrace, k: usize, seed: u64) -> Result<()> {
    let v = trace
        .rows
        .get_mut(k)
        .and_then(|r| r.vectors.as_mut())
        .and_then(|p| p.v.as_mut())
        .ok_or_else(|| Error::InvalidInput(format!("row {k} has no recorded v")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..v.len() {
        let z: f64 = StandardNormal.sample(&mut rng);
        v[i] += z;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::methods::{run_method, MethodKind, RunOptions};

    fn diag12() -> QuadraticProblem {
        QuadraticProblem::new(
            SymMatrix::diagonal(&[1.0, 2.0]),
            Vector::zeros(2),
            Vector::new(vec![1.0, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn theorem_bound_examples() {
        assert!((theorem_bound(1, 0.0, 1.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let b = theorem_bound(1, 1.0, 2.0, 2.0).unwrap();
        assert!((b - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!((theorem_bound(0, 0.3, 2.0, 5.0).unwrap() - 0.5 * 1.7 * 5.0).abs() < 1e-14);
        assert!(theorem_bound(3, 2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn theorem_iterations_is_first_crossing() {
        for (mu, l) in [(0.0, 1.0), (0.01, 1.0), (1.0, 100.0)] {
            let t = 1e-6;
            let k = theorem_iterations(mu, l, 3.0, t).unwrap();
            assert!(theorem_bound(k, mu, l, 3.0).unwrap() <= t);
            assert!(k == 0 || theorem_bound(k - 1, mu, l, 3.0).unwrap() > t);
        }
    }

    #[test]
    fn nesterov_diag12_passes() {
        let p = diag12();
        let t = run_method(&MethodKind::nesterov(), &p, &RunOptions::for_problem(&p).with_iters(6)).unwrap();
        let rep = check_certificate(&t).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.get("phi_monotone").unwrap().worst.unwrap() <= 1e-12);
    }

    #[test]
    fn gradient_descent_certificate_not_claimed() {
        let p = diag12();
        let t = run_method(&MethodKind::gradient_descent(), &p, &RunOptions::for_problem(&p)).unwrap();
        let rep = check_certificate(&t).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.get("phi_monotone").unwrap().status, CheckStatus::NotClaimed);
        assert_eq!(rep.get("upper_descent").unwrap().status, CheckStatus::Checked);
    }

    #[test]
    fn upper_fault_is_caught() {
        let p = diag12();
        let mut t = run_method(&MethodKind::nesterov(), &p, &RunOptions::for_problem(&p).with_iters(4)).unwrap();
        inject_upper_fault(&mut t, &p, 2).unwrap();
        let rep = check_certificate(&t).unwrap();
        assert!(!rep.pass);
        assert!(!rep.get("step_inequality").unwrap().pass);
        assert_eq!(rep.get("step_inequality").unwrap().at_iter, Some(2));
    }

    #[test]
    fn malformed_trace_rejected() {
        let p = diag12();
        let mut t = run_method(&MethodKind::nesterov(), &p, &RunOptions::for_problem(&p).with_iters(3)).unwrap();
        t.rows[1].k = 7;
        assert!(check_certificate(&t).is_err());
        t.rows.clear();
        assert!(check_certificate(&t).is_err());
    }

    #[test]
    fn diag12_sandwich() {
        let p = diag12();
        let t = run_method(&MethodKind::cg(), &p, &RunOptions::for_problem(&p)).unwrap();
        let rows = restricted_sandwich(&p, &t).unwrap();
        assert_eq!(rows.len(), 2);
        let r0 = rows[0].spectrum;
        assert!((r0.mu_i - 1.0).abs() < 1e-12 && (r0.ell_i - 2.0).abs() < 1e-12);
        let r1 = rows[1].spectrum;
        assert!((r1.ell_i - 1.2).abs() < 1e-12);
        assert!((r1.mu_i - 18.0 / 17.0).abs() < 1e-12);
        assert_eq!(rows[1].complement_dim, 1);
        assert!(rows.iter().all(|r| r.holds));
    }
}
