//! Solvers and the driver that turns a run into a [`CertifiedTrace`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adgt::{coupling_residual, lower_bound, m_value_with_scale, LowerBoundState, QueryRecord, Schedule};
use crate::diagnostics::{self, theorem_bound};
use crate::error::{Error, Result};
use crate::linalg::{affine_subspace_min, extend_orthonormal, orthonormal_basis, SubspaceSpec, Vector};
use crate::problem::{Objective, QuadraticProblem};
use crate::trace::{CertifiedTrace, OracleComparison, ParanoidStats, RowVectors, TerminalStatus, TraceMeta, TraceRow};

/// Directions shorter than this (relative to their original norm) are treated
/// as dependent when a search subspace is orthonormalized.
const SEARCH_DROP_TOL: f64 = 1e-10;

/// Arnoldi breakdown threshold when building Krylov bases.
const KRYLOV_DROP_TOL: f64 = 1e-13;

/// Paranoid cross-checks are on by default up to this dimension.
pub const PARANOID_MAX_DIM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Nesterov,
    NemirovskiPlane,
    NemirovskiLine,
    Cg,
    GradientDescent,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Nesterov,
        Method::NemirovskiPlane,
        Method::NemirovskiLine,
        Method::Cg,
        Method::GradientDescent,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Nesterov => "nesterov",
            Method::NemirovskiPlane => "nemirovski_plane",
            Method::NemirovskiLine => "nemirovski_line",
            Method::Cg => "cg",
            Method::GradientDescent => "gradient_descent",
        }
    }

    /// Methods that build their own ADGT sequence.
    pub fn is_accelerated(&self) -> bool {
        matches!(self, Method::Nesterov | Method::NemirovskiPlane | Method::NemirovskiLine)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "nesterov" => Ok(Method::Nesterov),
            "nemirovski_plane" | "plane" => Ok(Method::NemirovskiPlane),
            "nemirovski_line" | "line" => Ok(Method::NemirovskiLine),
            "cg" | "cg_shadow" | "conjugate_gradient" => Ok(Method::Cg),
            "gradient_descent" | "gd" => Ok(Method::GradientDescent),
            other => Err(Error::InvalidInput(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneVariant {
    /// Minimize over the linear span of `y_{k−1}` and `v_{k−1}`.
    #[default]
    Span,
    /// Anchor `y_{k−1}`, directions `y_{k−1} − x₀` and `(1/L)Σ_{j<k} a_j g_j`.
    FootnoteAffine,
}

impl fmt::Display for PlaneVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlaneVariant::Span => "span",
            PlaneVariant::FootnoteAffine => "footnote_affine",
        })
    }
}

impl FromStr for PlaneVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "span" => Ok(PlaneVariant::Span),
            "footnote_affine" | "footnote" | "affine" => Ok(PlaneVariant::FootnoteAffine),
            other => Err(Error::InvalidInput(format!("unknown plane variant '{other}'"))),
        }
    }
}

/// Rule producing the shadow query points `x_i` next to conjugate gradients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowPairing {
    #[default]
    Nesterov,
    Line,
    /// Plane search in the affine (Krylov-consistent) form.
    Plane,
}

impl FromStr for ShadowPairing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nesterov" => Ok(ShadowPairing::Nesterov),
            "line" => Ok(ShadowPairing::Line),
            "plane" => Ok(ShadowPairing::Plane),
            other => Err(Error::InvalidInput(format!("unknown shadow pairing '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodKind {
    pub method: Method,
    /// Only read for [`Method::NemirovskiPlane`].
    pub plane_variant: PlaneVariant,
    pub cg_certify: bool,
    pub cg_oracle_check: bool,
    pub shadow_pairing: ShadowPairing,
}

impl MethodKind {
    pub fn new(method: Method) -> Self {
        MethodKind {
            method,
            plane_variant: PlaneVariant::default(),
            cg_certify: true,
            cg_oracle_check: false,
            shadow_pairing: ShadowPairing::default(),
        }
    }

    pub fn nesterov() -> Self {
        Self::new(Method::Nesterov)
    }

    pub fn plane(variant: PlaneVariant) -> Self {
        Self::new(Method::NemirovskiPlane).with_plane_variant(variant)
    }

    pub fn line() -> Self {
        Self::new(Method::NemirovskiLine)
    }

    pub fn cg() -> Self {
        Self::new(Method::Cg)
    }

    pub fn gradient_descent() -> Self {
        Self::new(Method::GradientDescent)
    }

    pub fn with_plane_variant(mut self, v: PlaneVariant) -> Self {
        self.plane_variant = v;
        self
    }

    pub fn with_cg_certify(mut self, on: bool) -> Self {
        self.cg_certify = on;
        self
    }

    pub fn with_oracle_check(mut self, on: bool) -> Self {
        self.cg_oracle_check = on;
        self
    }

    pub fn with_shadow_pairing(mut self, p: ShadowPairing) -> Self {
        self.shadow_pairing = p;
        self
    }

    pub fn claims_certificate(&self) -> bool {
        self.method.is_accelerated() || (self.method == Method::Cg && self.cg_certify)
    }

    /// μ the weight schedule runs with for problem strong convexity `mu`.
    pub fn schedule_mu(&self, mu: f64) -> f64 {
        match self.method {
            Method::NemirovskiPlane | Method::NemirovskiLine => 0.0,
            _ => mu,
        }
    }

    pub fn label(&self) -> String {
        match self.method {
            Method::NemirovskiPlane => format!("{}[{}]", self.method, self.plane_variant),
            m => m.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub max_iters: usize,
    /// Relative: stop once `‖g_k‖ ≤ grad_tol·‖g₀‖`.
    pub grad_tol: f64,
    /// Report `L_k`, `G_k` and rate bounds using the known `x*`.
    pub anchored: bool,
    /// `None` means on for `n ≤ 64`.
    pub paranoid: Option<bool>,
    pub record_vectors: bool,
    /// Stop once `f(y_k) − f* ≤ target` (needs `x*`).
    pub stop_at_gap: Option<f64>,
}

impl RunOptions {
    pub fn for_problem(p: &QuadraticProblem) -> Self {
        RunOptions {
            max_iters: 2 * p.n(),
            grad_tol: 1e-12,
            anchored: true,
            paranoid: None,
            record_vectors: true,
            stop_at_gap: None,
        }
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol = tol;
        self
    }

    pub fn with_anchored(mut self, on: bool) -> Self {
        self.anchored = on;
        self
    }

    pub fn with_paranoid(mut self, on: bool) -> Self {
        self.paranoid = Some(on);
        self
    }

    pub fn with_vectors(mut self, on: bool) -> Self {
        self.record_vectors = on;
        self
    }

    pub fn with_stop_at_gap(mut self, target: f64) -> Self {
        self.stop_at_gap = Some(target);
        self
    }

    fn paranoid_for(&self, n: usize) -> bool {
        self.paranoid.unwrap_or(n <= PARANOID_MAX_DIM)
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        if !(self.grad_tol.is_finite() && self.grad_tol >= 0.0) {
            return Err(Error::InvalidInput(format!("grad_tol must be >= 0 (got {})", self.grad_tol)));
        }
        if let Some(t) = self.stop_at_gap {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidInput(format!("gap target must be >= 0 (got {t})")));
            }
        }
        Ok(())
    }
}

/// State of an accelerated method after iteration `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateState {
    pub x: Vector,
    pub y: Vector,
    pub v: Vector,
    pub g: Vector,
    pub f_x: f64,
    pub f_y: f64,
    pub schedule: Schedule,
    pub lb: LowerBoundState,
    /// Coupling residual of this step; absent at `k = 0`.
    pub coupling: Option<f64>,
    /// Gap potential `Φ_k`, accumulated step by step.
    pub phi: f64,
    /// The part of `Φ_k` that does not depend on `y_k`.
    phi_before_y: f64,
}

impl IterateState {
    pub fn k(&self) -> usize {
        self.schedule.k()
    }

    /// Replaces `y_k` (any point with enough descent from `x_k` will do).
    pub fn set_y<O: Objective + ?Sized>(&mut self, obj: &O, y: Vector) {
        self.f_y = obj.value(&y);
        self.phi = self.phi_before_y + self.schedule.cumulative() * obj.value_change(&self.x, &self.g, &y);
        self.y = y;
    }
}

fn gradient_step<O: Objective + ?Sized>(obj: &O, x: &Vector, g: &Vector) -> Vector {
    let mut y = x.clone();
    y.axpy(-1.0 / obj.smoothness(), g);
    y
}

/// Iteration 0: `x₀` from the problem, `y₀ = x₀ − g₀/L`, `v₀` from the first update.
pub fn initial_state<O: Objective + ?Sized>(obj: &O, schedule: Schedule) -> Result<IterateState> {
    if schedule.k() != 0 {
        return Err(Error::InvalidInput("initial state needs the k = 0 schedule".into()));
    }
    let x = obj.start().clone();
    let g = obj.gradient(&x);
    let f_x = obj.value(&x);
    let y = gradient_step(obj, &x, &g);
    let lb = LowerBoundState::new(x.clone()).update(&schedule, &x, &g, f_x);
    let mut st = IterateState {
        v: lb.v.clone(),
        phi_before_y: -lb.last_dm,
        x,
        y: Vector::zeros(0),
        g,
        f_x,
        f_y: f64::NAN,
        schedule,
        lb,
        coupling: None,
        phi: f64::NAN,
    };
    st.set_y(obj, y);
    Ok(st)
}

/// Shared tail of every accelerated step once `x_k` is chosen.
fn finish_step<O: Objective + ?Sized>(obj: &O, prev: &IterateState, s: Schedule, x: Vector) -> Result<IterateState> {
    if !x.is_finite() {
        return Err(Error::NonFinite("query point"));
    }
    let g = obj.gradient(&x);
    let f_x = obj.value(&x);
    let y = gradient_step(obj, &x, &g);
    let coupling = coupling_residual(&s, &x, &g, &prev.y, &prev.v)?;
    let lb = prev.lb.update(&s, &x, &g, f_x);
    let dy_prev = obj.value_change(&x, &g, &prev.y);
    let phi_before_y = prev.phi - s.prev_cumulative() * dy_prev - lb.last_dm;
    let mut st = IterateState {
        v: lb.v.clone(),
        x,
        y: Vector::zeros(0),
        g,
        f_x,
        f_y: f64::NAN,
        schedule: s,
        lb,
        coupling: Some(coupling),
        phi: f64::NAN,
        phi_before_y,
    };
    st.set_y(obj, y);
    Ok(st)
}

fn nesterov_point(s: &Schedule, y_prev: &Vector, v_prev: &Vector) -> Vector {
    let prev = s.prev_cumulative();
    let ap = s.a_prime().unwrap_or(0.0);
    Vector::lin_comb(prev / (prev + ap), y_prev, ap / (prev + ap), v_prev)
}

fn plane_point(p: &QuadraticProblem, variant: PlaneVariant, state: &IterateState) -> Result<Vector> {
    let spec = match variant {
        PlaneVariant::Span => {
            let dirs = orthonormal_basis(&[state.y.clone(), state.v.clone()], SEARCH_DROP_TOL);
            if dirs.is_empty() {
                return Ok(state.y.clone());
            }
            SubspaceSpec::new(Vector::zeros(p.n()), dirs)?
        }
        PlaneVariant::FootnoteAffine => {
            let drift = &state.y - p.x0();
            let agg = state.lb.sum_agrad.scaled(1.0 / p.l());
            SubspaceSpec::new(state.y.clone(), orthonormal_basis(&[drift, agg], SEARCH_DROP_TOL))?
        }
    };
    affine_subspace_min(p.matrix(), p.rhs(), &spec)
}

fn line_point(p: &QuadraticProblem, state: &IterateState) -> Result<Vector> {
    let dirs = orthonormal_basis(&[&state.v - &state.y], SEARCH_DROP_TOL);
    affine_subspace_min(p.matrix(), p.rhs(), &SubspaceSpec::new(state.y.clone(), dirs)?)
}

/// `x_k = (A_{k−1}y_{k−1} + a′_k v_{k−1}) / (A_{k−1} + a′_k)`.
pub fn nesterov_step<O: Objective + ?Sized>(state: &IterateState, obj: &O) -> Result<IterateState> {
    let s = state.schedule.advance();
    let x = nesterov_point(&s, &state.y, &state.v);
    finish_step(obj, state, s, x)
}

pub fn nemirovski_plane_step(state: &IterateState, p: &QuadraticProblem, variant: PlaneVariant) -> Result<IterateState> {
    let s = state.schedule.advance();
    let x = plane_point(p, variant, state)?;
    finish_step(p, state, s, x)
}

pub fn nemirovski_line_step(state: &IterateState, p: &QuadraticProblem) -> Result<IterateState> {
    let s = state.schedule.advance();
    let x = line_point(p, state)?;
    finish_step(p, state, s, x)
}

/// Two-term conjugate gradient recurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct CgState {
    pub k: usize,
    pub y: Vector,
    /// Recursive residual `b − Ay_k`.
    pub r: Vector,
    pub p: Vector,
    pub rr: f64,
}

impl CgState {
    pub fn new(p: &QuadraticProblem) -> Self {
        let y = p.x0().clone();
        let r = p.rhs() - &p.matrix().mul_vec(&y);
        let rr = r.norm_sq();
        CgState {
            k: 0,
            p: r.clone(),
            y,
            r,
            rr,
        }
    }
}

/// `y_{k+1} = y_k + α_k p_k`. Returns `None` on exact termination
/// (zero residual or zero curvature along `p_k`).
pub fn cg_step(state: &CgState, problem: &QuadraticProblem) -> Option<CgState> {
    if state.rr == 0.0 {
        return None;
    }
    let ap = problem.matrix().mul_vec(&state.p);
    let pap = state.p.dot(&ap);
    if !(pap > 0.0) {
        return None;
    }
    let alpha = state.rr / pap;
    let mut y = state.y.clone();
    y.axpy(alpha, &state.p);
    let mut r = state.r.clone();
    r.axpy(-alpha, &ap);
    let rr = r.norm_sq();
    let beta = rr / state.rr;
    let p = Vector::lin_comb(1.0, &r, beta, &state.p);
    Some(CgState { k: state.k + 1, y, r, p, rr })
}

/// Orthonormal basis of `K_k = span{A d, …, A^k d}` with `d = x₀ − x*`,
/// built by Arnoldi with full re-orthogonalization. Stops early when the
/// space becomes invariant.
pub fn krylov_basis(problem: &QuadraticProblem, k: usize) -> Vec<Vector> {
    let a = problem.matrix();
    let d = problem.x0() - problem.x_star();
    let mut basis: Vec<Vector> = Vec::new();
    let mut w = a.mul_vec(&d);
    for _ in 0..k.min(problem.n()) {
        if w.norm() == 0.0 || extend_orthonormal(&mut basis, &[w], KRYLOV_DROP_TOL) == 0 {
            break;
        }
        w = a.mul_vec(basis.last().expect("just extended"));
    }
    basis
}

/// Minimizer of `f` over `x₀ + K_k`, computed from an explicit Krylov basis.
pub fn cg_krylov_oracle(problem: &QuadraticProblem, k: usize) -> Result<Vector> {
    if k == 0 {
        return Err(Error::InvalidInput("Krylov oracle needs k >= 1".into()));
    }
    let spec = SubspaceSpec::new(problem.x0().clone(), krylov_basis(problem, k))?;
    affine_subspace_min(problem.matrix(), problem.rhs(), &spec)
}

struct Context<'a> {
    problem: &'a QuadraticProblem,
    opts: &'a RunOptions,
    f_x0: f64,
    g0_norm: f64,
    r2: Option<f64>,
    claim_mu: f64,
}

impl<'a> Context<'a> {
    fn new(problem: &'a QuadraticProblem, opts: &'a RunOptions, claim_mu: f64) -> Self {
        let x0 = problem.x0();
        Context {
            problem,
            opts,
            f_x0: problem.value(x0),
            g0_norm: problem.gradient(x0).norm(),
            r2: opts.anchored.then(|| problem.initial_distance_sq()),
            claim_mu,
        }
    }

    fn scale(&self) -> f64 {
        match self.r2 {
            Some(r2) => 1.0 + self.f_x0.abs() + self.problem.l() * r2,
            None => 1.0 + self.f_x0.abs() + self.g0_norm * self.g0_norm / self.problem.l(),
        }
    }

    fn meta(&self, kind: &MethodKind, schedule_mu: Option<f64>, claims: bool) -> TraceMeta {
        TraceMeta {
            method: kind.method,
            plane_variant: (kind.method == Method::NemirovskiPlane).then_some(kind.plane_variant),
            n: self.problem.n(),
            mu: self.problem.mu(),
            l: self.problem.l(),
            schedule_mu,
            f_x0: self.f_x0,
            anchored: self.opts.anchored,
            f_star: self.opts.anchored.then(|| self.problem.f_star()),
            r2: self.r2,
            scale: self.scale(),
            claims_certificate: claims,
            krylov_consistent: !(kind.method == Method::NemirovskiPlane && kind.plane_variant == PlaneVariant::Span),
        }
    }

    fn bound(&self, k: usize) -> Option<f64> {
        let r2 = self.r2?;
        theorem_bound(k, self.claim_mu, self.problem.l(), r2).ok()
    }

    fn grad_converged(&self, g_norm: f64) -> bool {
        g_norm <= self.opts.grad_tol * self.g0_norm
    }

    fn target_reached(&self, f_y: f64) -> bool {
        match self.opts.stop_at_gap {
            Some(t) => f_y - self.problem.f_star() <= t,
            None => false,
        }
    }

    fn vectors(&self, x: &Vector, y: &Vector, g: &Vector, v: Option<&Vector>) -> Option<RowVectors> {
        self.opts.record_vectors.then(|| RowVectors {
            x: x.clone(),
            y: y.clone(),
            g: g.clone(),
            v: v.cloned(),
        })
    }
}

/// Direct re-evaluation of `v_k` and `m_k(v_k)` from the query history.
struct Paranoid {
    history: Vec<QueryRecord>,
    stats: ParanoidStats,
}

impl Paranoid {
    fn new() -> Self {
        Paranoid {
            history: Vec::new(),
            stats: ParanoidStats {
                max_v_rel_err: 0.0,
                v_at_iter: 0,
                max_m_rel_err: 0.0,
                m_at_iter: 0,
            },
        }
    }

    fn observe(&mut self, row: usize, s: &Schedule, x: &Vector, g: &Vector, lb: &LowerBoundState) {
        self.history.push(QueryRecord {
            a: s.a(),
            x: x.clone(),
            g: g.clone(),
        });
        let v_cf = lb.closed_form_v(s);
        let v_mag = 1.0
            + lb.v.norm()
            + (s.mu0() * lb.x0.norm() + s.mu() * lb.sum_ax.norm() + lb.sum_agrad.norm()) / s.weight();
        let v_err = (&lb.v - &v_cf).norm() / v_mag;
        if v_err > self.stats.max_v_rel_err || v_err.is_nan() {
            self.stats.max_v_rel_err = v_err;
            self.stats.v_at_iter = row;
        }
        let (m_direct, m_mag) = m_value_with_scale(&self.history, s.mu(), s.mu0(), &lb.x0, &lb.v);
        let m_err = (lb.m_at_v - m_direct).abs() / (1.0 + m_mag);
        if m_err > self.stats.max_m_rel_err || m_err.is_nan() {
            self.stats.max_m_rel_err = m_err;
            self.stats.m_at_iter = row;
        }
    }
}

fn certificate_row(ctx: &Context<'_>, row_k: usize, st: &IterateState, bound_k: usize) -> TraceRow {
    let s = &st.schedule;
    let lower = ctx
        .opts
        .anchored
        .then(|| lower_bound(&st.lb, s, ctx.problem.x_star()));
    TraceRow {
        k: row_k,
        a: Some(s.a()),
        big_a: Some(s.cumulative()),
        a_prime: s.a_prime(),
        f_x: st.f_x,
        f_y: st.f_y,
        grad_norm: st.g.norm(),
        upper: st.f_y,
        lower,
        gap: lower.map(|l| st.f_y - l),
        potential: Some(st.phi),
        coupling_residual: st.coupling,
        bound_rhs: ctx.bound(bound_k),
        vectors: ctx.vectors(&st.x, &st.y, &st.g, Some(&st.v)),
    }
}

/// Trace for `μ = L`: one gradient step lands on `x*`, no schedule exists.
fn degenerate_row(ctx: &Context<'_>) -> TraceRow {
    let p = ctx.problem;
    let x = p.x0().clone();
    let g = p.gradient(&x);
    let y = gradient_step(p, &x, &g);
    let f_y = p.value(&y);
    TraceRow {
        k: 0,
        a: None,
        big_a: None,
        a_prime: None,
        f_x: ctx.f_x0,
        f_y,
        grad_norm: g.norm(),
        upper: f_y,
        lower: None,
        gap: None,
        potential: None,
        coupling_residual: None,
        bound_rhs: None,
        vectors: ctx.vectors(&x, &y, &g, None),
    }
}

fn run_accelerated(kind: &MethodKind, p: &QuadraticProblem, opts: &RunOptions) -> Result<CertifiedTrace> {
    let schedule_mu = kind.schedule_mu(p.mu());
    let ctx = Context::new(p, opts, schedule_mu);
    if schedule_mu >= p.l() {
        return Ok(CertifiedTrace {
            meta: ctx.meta(kind, None, false),
            status: TerminalStatus::Exact,
            rows: vec![degenerate_row(&ctx)],
            paranoid: None,
            oracle: None,
            verification: None,
        });
    }
    let mut paranoid = opts.paranoid_for(p.n()).then(Paranoid::new);
    let mut st = initial_state(p, Schedule::new(schedule_mu, p.l())?)?;
    if let Some(pc) = paranoid.as_mut() {
        pc.observe(0, &st.schedule, &st.x, &st.g, &st.lb);
    }
    let mut rows = vec![certificate_row(&ctx, 0, &st, 0)];
    let mut status = TerminalStatus::MaxIters;
    if ctx.g0_norm == 0.0 {
        status = TerminalStatus::Exact;
    } else if ctx.target_reached(st.f_y) {
        status = TerminalStatus::TargetGap;
    } else {
        for _ in 1..=opts.max_iters {
            if ctx.grad_converged(st.g.norm()) {
                status = TerminalStatus::GradTol;
                break;
            }
            st = match kind.method {
                Method::Nesterov => nesterov_step(&st, p)?,
                Method::NemirovskiPlane => nemirovski_plane_step(&st, p, kind.plane_variant)?,
                Method::NemirovskiLine => nemirovski_line_step(&st, p)?,
                _ => unreachable!("not an accelerated method"),
            };
            let k = st.k();
            if let Some(pc) = paranoid.as_mut() {
                pc.observe(k, &st.schedule, &st.x, &st.g, &st.lb);
            }
            rows.push(certificate_row(&ctx, k, &st, k));
            if st.g.norm() == 0.0 {
                status = TerminalStatus::Exact;
                break;
            }
            if ctx.target_reached(st.f_y) {
                status = TerminalStatus::TargetGap;
                break;
            }
        }
    }
    Ok(CertifiedTrace {
        meta: ctx.meta(kind, Some(schedule_mu), true),
        status,
        rows,
        paranoid: paranoid.map(|pc| pc.stats),
        oracle: None,
        verification: None,
    })
}

fn run_gradient_descent(kind: &MethodKind, p: &QuadraticProblem, opts: &RunOptions) -> Result<CertifiedTrace> {
    let ctx = Context::new(p, opts, p.mu());
    let mut rows = Vec::new();
    let mut x = p.x0().clone();
    let mut status = TerminalStatus::MaxIters;
    for k in 0..=opts.max_iters {
        let g = p.gradient(&x);
        let g_norm = g.norm();
        if k > 0 && ctx.grad_converged(g_norm) {
            status = TerminalStatus::GradTol;
            break;
        }
        let y = gradient_step(p, &x, &g);
        let f_y = p.value(&y);
        if !f_y.is_finite() {
            return Err(Error::NonFinite("gradient descent"));
        }
        rows.push(TraceRow {
            k,
            a: None,
            big_a: None,
            a_prime: None,
            f_x: p.value(&x),
            f_y,
            grad_norm: g_norm,
            upper: f_y,
            lower: None,
            gap: None,
            potential: None,
            coupling_residual: None,
            bound_rhs: None,
            vectors: ctx.vectors(&x, &y, &g, None),
        });
        if g_norm == 0.0 {
            status = TerminalStatus::Exact;
            break;
        }
        if ctx.target_reached(f_y) {
            status = TerminalStatus::TargetGap;
            break;
        }
        x = y;
    }
    Ok(CertifiedTrace {
        meta: ctx.meta(kind, None, false),
        status,
        rows,
        paranoid: None,
        oracle: None,
        verification: None,
    })
}

/// Runs the CG recurrence and returns the iterates `y_0 = x₀, y_1, …`.
fn cg_iterates(ctx: &Context<'_>) -> (Vec<Vector>, TerminalStatus) {
    let p = ctx.problem;
    let mut st = CgState::new(p);
    let r0 = st.rr.sqrt();
    let mut ys = vec![st.y.clone()];
    if r0 == 0.0 {
        return (ys, TerminalStatus::Exact);
    }
    if ctx.target_reached(ctx.f_x0) {
        return (ys, TerminalStatus::TargetGap);
    }
    for _ in 1..=ctx.opts.max_iters {
        if st.rr.sqrt() <= ctx.opts.grad_tol * r0 {
            return (ys, TerminalStatus::GradTol);
        }
        match cg_step(&st, p) {
            Some(next) => st = next,
            None => return (ys, TerminalStatus::Exact),
        }
        ys.push(st.y.clone());
        if st.rr == 0.0 {
            return (ys, TerminalStatus::Exact);
        }
        if ctx.target_reached(p.value(&st.y)) {
            return (ys, TerminalStatus::TargetGap);
        }
    }
    (ys, TerminalStatus::MaxIters)
}

fn shadow_point(p: &QuadraticProblem, pairing: ShadowPairing, s: &Schedule, st: &IterateState) -> Result<Vector> {
    match pairing {
        ShadowPairing::Nesterov => Ok(nesterov_point(s, &st.y, &st.v)),
        ShadowPairing::Line => line_point(p, st),
        ShadowPairing::Plane => {
            // Affine plane through y_{i−1} spanned by the drifts of y and v from x₀.
            // With μ = 0 this is the footnote_affine plane; for μ > 0 it still contains v_{i−1}.
            let dirs = orthonormal_basis(&[&st.y - p.x0(), &st.v - p.x0()], SEARCH_DROP_TOL);
            affine_subspace_min(p.matrix(), p.rhs(), &SubspaceSpec::new(st.y.clone(), dirs)?)
        }
    }
}

fn run_cg(kind: &MethodKind, p: &QuadraticProblem, opts: &RunOptions) -> Result<CertifiedTrace> {
    let ctx = Context::new(p, opts, p.mu());
    let (ys, status) = cg_iterates(&ctx);
    let certify = kind.cg_certify && p.mu() < p.l();

    let x0 = p.x0();
    let g0 = p.gradient(x0);
    let mut rows = vec![TraceRow {
        k: 0,
        a: None,
        big_a: None,
        a_prime: None,
        f_x: ctx.f_x0,
        f_y: ctx.f_x0,
        grad_norm: g0.norm(),
        upper: ctx.f_x0,
        lower: None,
        gap: None,
        potential: None,
        coupling_residual: None,
        bound_rhs: None,
        vectors: ctx.vectors(x0, x0, &g0, None),
    }];
    let mut paranoid = None;

    if certify {
        let mut pc = opts.paranoid_for(p.n()).then(Paranoid::new);
        let s0 = Schedule::new(p.mu(), p.l())?;
        let mut st: Option<IterateState> = None;
        for (i, y_cg) in ys.iter().enumerate().skip(1) {
            let shadow_k = i - 1;
            let mut next = match &st {
                None => initial_state(p, s0)?,
                Some(prev) => {
                    let s = prev.schedule.advance();
                    let x = shadow_point(p, kind.shadow_pairing, &s, prev)?;
                    finish_step(p, prev, s, x)?
                }
            };
            next.set_y(p, y_cg.clone());
            if let Some(pc) = pc.as_mut() {
                pc.observe(shadow_k, &next.schedule, &next.x, &next.g, &next.lb);
            }
            rows.push(certificate_row(&ctx, i, &next, shadow_k));
            st = Some(next);
        }
        paranoid = pc.map(|pc| pc.stats);
    } else {
        for (i, y) in ys.iter().enumerate().skip(1) {
            let g = p.gradient(y);
            let f = p.value(y);
            rows.push(TraceRow {
                k: i,
                a: None,
                big_a: None,
                a_prime: None,
                f_x: f,
                f_y: f,
                grad_norm: g.norm(),
                upper: f,
                lower: None,
                gap: None,
                potential: None,
                coupling_residual: None,
                bound_rhs: None,
                vectors: ctx.vectors(y, y, &g, None),
            });
        }
    }

    let oracle = if kind.cg_oracle_check {
        let tolerance = 1e-9 * (1.0 + ctx.f_x0.abs());
        let mut cmp = OracleComparison {
            max_abs_diff: 0.0,
            at_iter: 0,
            tolerance,
        };
        for (k, y) in ys.iter().enumerate().skip(1) {
            let y_oracle = cg_krylov_oracle(p, k)?;
            let diff = (p.value(y) - p.value(&y_oracle)).abs();
            if diff > cmp.max_abs_diff || diff.is_nan() {
                cmp.max_abs_diff = diff;
                cmp.at_iter = k;
            }
        }
        Some(cmp)
    } else {
        None
    };

    Ok(CertifiedTrace {
        meta: ctx.meta(kind, certify.then(|| p.mu()), certify),
        status,
        rows,
        paranoid,
        oracle,
        verification: None,
    })
}

/// Runs `kind` on `problem`, recording one row per iteration (k = 0 included).
pub fn run_method(kind: &MethodKind, problem: &QuadraticProblem, opts: &RunOptions) -> Result<CertifiedTrace> {
    opts.validate()?;
    match kind.method {
        Method::Nesterov | Method::NemirovskiPlane | Method::NemirovskiLine => run_accelerated(kind, problem, opts),
        Method::Cg => run_cg(kind, problem, opts),
        Method::GradientDescent => run_gradient_descent(kind, problem, opts),
    }
}

/// CG with the Nesterov-paired shadow certificate and the verification suite
/// attached. Failed checks are recorded in `trace.verification`, not returned
/// as errors.
pub fn cg_shadow_certificate(problem: &QuadraticProblem, iters: usize) -> Result<CertifiedTrace> {
    let kind = MethodKind::cg().with_cg_certify(true);
    let opts = RunOptions::for_problem(problem).with_iters(iters);
    let mut trace = run_method(&kind, problem, &opts)?;
    let mut report = diagnostics::check_certificate(&trace)?;
    if problem.n() <= diagnostics::KRYLOV_MAX_DIM {
        report.merge(diagnostics::check_krylov_membership(&trace, problem)?);
    }
    trace.verification = Some(report);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    fn diag12() -> QuadraticProblem {
        QuadraticProblem::new(
            SymMatrix::diagonal(&[1.0, 2.0]),
            Vector::zeros(2),
            Vector::new(vec![1.0, 1.0]),
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("newton".parse::<Method>().is_err());
    }

    #[test]
    fn nesterov_first_step_on_diag12() {
        let p = diag12();
        let st0 = initial_state(&p, Schedule::new(1.0, 2.0).unwrap()).unwrap();
        assert_eq!(st0.y.as_slice(), &[0.5, 0.0]);
        assert_eq!(st0.v.as_slice(), &[0.5, 0.0]);
        let st1 = nesterov_step(&st0, &p).unwrap();
        assert!(close(st1.x[0], 0.5, 1e-15) && close(st1.x[1], 0.0, 1e-15));
        assert!(st1.coupling.unwrap().abs() < 1e-12);
    }

    #[test]
    fn nesterov_equal_points_stay_put() {
        let s = Schedule::new(0.0, 1.0).unwrap().advance();
        let p = Vector::new(vec![3.0, -1.0]);
        let x = nesterov_point(&s, &p, &p);
        assert!(close(x[0], 3.0, 1e-15) && close(x[1], -1.0, 1e-15));
    }

    #[test]
    fn span_plane_degenerates_to_line() {
        let p = diag12();
        let st0 = initial_state(&p, Schedule::new(0.0, 2.0).unwrap()).unwrap();
        // μ = 0 schedule: v₀ = x₀ − g₀/L = (0.5, 0) as well.
        assert!(close(st0.v[0], 0.5, 1e-15) && close(st0.v[1], 0.0, 1e-15));
        let st1 = nemirovski_plane_step(&st0, &p, PlaneVariant::Span).unwrap();
        assert!(st1.x.norm() < 1e-15);
    }

    #[test]
    fn affine_plane_with_no_directions_returns_anchor() {
        let p = diag12();
        let mut st = initial_state(&p, Schedule::new(0.0, 2.0).unwrap()).unwrap();
        st.y = p.x0().clone();
        st.lb.sum_agrad = Vector::zeros(2);
        let x = plane_point(&p, PlaneVariant::FootnoteAffine, &st).unwrap();
        assert_eq!(x.as_slice(), p.x0().as_slice());
    }

    #[test]
    fn line_with_zero_direction_returns_anchor() {
        let p = diag12();
        let mut st = initial_state(&p, Schedule::new(0.0, 2.0).unwrap()).unwrap();
        st.v = st.y.clone();
        assert_eq!(line_point(&p, &st).unwrap(), st.y);
    }

    #[test]
    fn line_step_is_first_order_optimal() {
        let p = QuadraticProblem::new(
            SymMatrix::diagonal(&[1.0, 3.0, 10.0]),
            Vector::new(vec![1.0, -2.0, 0.5]),
            Vector::new(vec![2.0, 1.0, -1.0]),
        )
        .unwrap();
        let mut st = initial_state(&p, Schedule::new(0.0, p.l()).unwrap()).unwrap();
        for _ in 0..4 {
            let next = nemirovski_line_step(&st, &p).unwrap();
            let dir = &st.v - &st.y;
            assert!(next.g.dot(&dir).abs() < 1e-12);
            assert!(next.coupling.unwrap().abs() < 1e-12);
            st = next;
        }
    }

    #[test]
    fn cg_on_diag12() {
        let p = diag12();
        let s0 = CgState::new(&p);
        let s1 = cg_step(&s0, &p).unwrap();
        assert!(close(s1.y[0], 4.0 / 9.0, 1e-15) && close(s1.y[1], -1.0 / 9.0, 1e-15));
        assert!(close(p.value(&s1.y), 1.0 / 9.0, 1e-15));
        assert!(p.gradient(&s1.y).dot(&p.gradient(&s0.y)).abs() < 1e-15);
        let s2 = cg_step(&s1, &p).unwrap();
        assert!(s2.y.norm() < 1e-15);
    }

    #[test]
    fn oracle_on_diag12() {
        let p = diag12();
        let y1 = cg_krylov_oracle(&p, 1).unwrap();
        assert!(close(y1[0], 4.0 / 9.0, 1e-14) && close(y1[1], -1.0 / 9.0, 1e-14));
        assert!(cg_krylov_oracle(&p, 2).unwrap().norm() < 1e-12);
        assert!(cg_krylov_oracle(&p, 0).is_err());
    }

    #[test]
    fn max_iters_zero_rejected() {
        let p = diag12();
        let opts = RunOptions::for_problem(&p).with_iters(0);
        assert!(matches!(
            run_method(&MethodKind::nesterov(), &p, &opts),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn trace_row_count_matches_iterations() {
        let p = diag12();
        for kind in [
            MethodKind::nesterov(),
            MethodKind::line(),
            MethodKind::plane(PlaneVariant::FootnoteAffine),
            MethodKind::gradient_descent(),
            MethodKind::cg(),
        ] {
            let t = run_method(&kind, &p, &RunOptions::for_problem(&p).with_iters(3)).unwrap();
            assert!(t.rows.len() >= 1);
            for (i, r) in t.rows.iter().enumerate() {
                assert_eq!(r.k, i, "{}", kind.label());
            }
        }
    }

    #[test]
    fn cg_trace_terminates_at_n() {
        let p = diag12();
        let t = run_method(&MethodKind::cg(), &p, &RunOptions::for_problem(&p).with_iters(4)).unwrap();
        assert_ne!(t.status, TerminalStatus::MaxIters);
        assert_eq!(t.iterations(), 2);
        assert!(t.last().f_y.abs() < 1e-15);
        // Row 1: shadow index 0 with the CG iterate as y.
        let r1 = &t.rows[1];
        assert!(close(r1.f_y, 1.0 / 9.0, 1e-15));
        assert!(close(r1.f_x, 1.5, 1e-15));
        assert!(close(r1.lower.unwrap(), -0.75, 1e-12));
    }

    #[test]
    fn gradient_descent_has_no_certificate() {
        let p = diag12();
        let t = run_method(&MethodKind::gradient_descent(), &p, &RunOptions::for_problem(&p).with_iters(3)).unwrap();
        assert!(t.rows.iter().all(|r| !r.has_certificate() && r.bound_rhs.is_none()));
        let v = t.rows[1].vectors.as_ref().unwrap();
        let v0 = t.rows[0].vectors.as_ref().unwrap();
        assert_eq!(v.x, v0.y);
    }

    #[test]
    fn degenerate_conditioning_is_exact_after_one_step() {
        let p = QuadraticProblem::new(
            SymMatrix::identity(3),
            Vector::new(vec![1.0, 2.0, 3.0]),
            Vector::zeros(3),
        )
        .unwrap();
        let t = run_method(&MethodKind::nesterov(), &p, &RunOptions::for_problem(&p)).unwrap();
        assert_eq!(t.status, TerminalStatus::Exact);
        assert_eq!(t.rows.len(), 1);
        assert!((t.rows[0].f_y - p.f_star()).abs() < 1e-14);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = diag12();
        let opts = RunOptions::for_problem(&p).with_iters(5);
        let a = run_method(&MethodKind::nesterov(), &p, &opts).unwrap();
        let b = run_method(&MethodKind::nesterov(), &p, &opts).unwrap();
        assert_eq!(a, b);
    }
}
