//! Convex quadratic objectives `f(x) = ½⟨Ax,x⟩ − ⟨b,x⟩` and seeded test instances.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    qr_orthogonal, solve_spd, sym_eig, sym_eig_range, SymEig, SymMatrix, Vector,
    PSEUDO_SOLVE_CUTOFF,
};

/// Relative tolerance for the `b ∈ range(A)` test.
const RANGE_TOL: f64 = 1e-10;

/// What a first-order method is allowed to see: values, gradients and the
/// curvature constants. The minimizer is deliberately not part of it.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    /// Strong-convexity constant μ ≥ 0.
    fn strong_convexity(&self) -> f64;
    /// Smoothness constant L > 0.
    fn smoothness(&self) -> f64;
    fn start(&self) -> &Vector;

    /// `f(z) − f(x)` given `g = ∇f(x)`. Implementations should avoid the
    /// cancellation of subtracting two full function values.
    fn value_change(&self, x: &Vector, g: &Vector, z: &Vector) -> f64 {
        let _ = g;
        self.value(z) - self.value(x)
    }
}

/// A quadratic together with its cached ground truth.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    a: SymMatrix,
    b: Vector,
    x0: Vector,
    mu: f64,
    l: f64,
    x_star: Vector,
    f_star: f64,
}

impl QuadraticProblem {
    /// Builds a problem from an explicit matrix. `μ` and `L` are computed
    /// with the Jacobi eigensolver; `x*` is the minimizer nearest to `x0`.
    pub fn new(a: SymMatrix, b: Vector, x0: Vector) -> Result<Self> {
        let n = a.dim();
        if n == 0 {
            return Err(Error::InvalidInput("empty problem".into()));
        }
        check_dim(n, b.len())?;
        check_dim(n, x0.len())?;
        if !b.is_finite() || !x0.is_finite() {
            return Err(Error::InvalidInput("non-finite b or x0".into()));
        }
        let eig = sym_eig(&a);
        let (lo, hi) = (eig.min(), eig.max());
        if hi <= 0.0 {
            return Err(Error::InvalidInput(
                "matrix has no positive eigenvalue".into(),
            ));
        }
        let mu = if lo.abs() <= PSEUDO_SOLVE_CUTOFF * hi {
            0.0
        } else if lo < 0.0 {
            return Err(Error::InvalidInput(format!(
                "matrix is not positive semidefinite (λ_min = {lo:e})"
            )));
        } else {
            lo
        };
        let x_star = optimal_point_from_eig(&a, &b, &x0, &eig)?;
        Ok(Self::assemble(a, b, x0, mu, hi, x_star))
    }

    fn assemble(a: SymMatrix, b: Vector, x0: Vector, mu: f64, l: f64, x_star: Vector) -> Self {
        let f_star = 0.5 * a.quad_form(&x_star) - b.dot(&x_star);
        QuadraticProblem {
            a,
            b,
            x0,
            mu,
            l,
            x_star,
            f_star,
        }
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn x_star(&self) -> &Vector {
        &self.x_star
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn n(&self) -> usize {
        self.a.dim()
    }

    /// `‖x₀ − x*‖²`
    pub fn initial_distance_sq(&self) -> f64 {
        self.x0.distance_sq(&self.x_star)
    }

    /// Same objective, different starting point.
    pub fn with_start(&self, x0: Vector) -> Result<Self> {
        check_dim(self.n(), x0.len())?;
        let x_star = if self.mu > 0.0 {
            self.x_star.clone()
        } else {
            optimal_point(&self.a, &self.b, &x0)?
        };
        Ok(Self::assemble(
            self.a.clone(),
            self.b.clone(),
            x0,
            self.mu,
            self.l,
            x_star,
        ))
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        self.n()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * self.a.quad_form(x) - self.b.dot(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.a.mul_vec(x) - &self.b
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }

    fn smoothness(&self) -> f64 {
        self.l
    }

    fn start(&self) -> &Vector {
        &self.x0
    }

    fn value_change(&self, x: &Vector, g: &Vector, z: &Vector) -> f64 {
        let d = z - x;
        g.dot(&d) + 0.5 * self.a.quad_form(&d)
    }
}

/// `f(x) = ½⟨Ax,x⟩ − ⟨b,x⟩`
pub fn quad_eval(p: &QuadraticProblem, x: &Vector) -> Result<f64> {
    check_dim(p.n(), x.len())?;
    Ok(p.value(x))
}

/// `∇f(x) = Ax − b`
pub fn quad_grad(p: &QuadraticProblem, x: &Vector) -> Result<Vector> {
    check_dim(p.n(), x.len())?;
    Ok(p.gradient(x))
}

/// Minimizer of the quadratic. For singular `A` this is the point of the
/// solution set closest to `x0`.
pub fn optimal_point(a: &SymMatrix, b: &Vector, x0: &Vector) -> Result<Vector> {
    check_dim(a.dim(), b.len())?;
    check_dim(a.dim(), x0.len())?;
    let eig = sym_eig(a);
    optimal_point_from_eig(a, b, x0, &eig)
}

fn optimal_point_from_eig(a: &SymMatrix, b: &Vector, x0: &Vector, eig: &SymEig) -> Result<Vector> {
    let hi = eig.max();
    let cutoff = PSEUDO_SOLVE_CUTOFF * hi.abs();
    if eig.min() > cutoff {
        return solve_spd(a, b);
    }
    // x* = x0 − A⁺(A x0 − b), after checking b has no null-space component.
    let mut null_part = Vector::zeros(b.len());
    let residual = &a.mul_vec(x0) - b;
    let mut x = x0.clone();
    for (lam, q) in eig.values.iter().zip(&eig.vectors) {
        if *lam <= cutoff {
            null_part.axpy(q.dot(b), q);
        } else {
            x.axpy(-q.dot(&residual) / lam, q);
        }
    }
    if null_part.norm() > RANGE_TOL * b.norm() {
        return Err(Error::Unbounded(
            "b has a component outside range(A)".into(),
        ));
    }
    Ok(x)
}

/// Target eigenvalues for a generated problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub eigenvalues: Vec<f64>,
    pub seed: u64,
}

impl SpectrumSpec {
    pub fn new(mut eigenvalues: Vec<f64>, seed: u64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidInput("empty spectrum".into()));
        }
        if eigenvalues.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidInput(
                "eigenvalues must be finite and non-negative".into(),
            ));
        }
        eigenvalues.sort_by(f64::total_cmp);
        if *eigenvalues.last().unwrap() <= 0.0 {
            return Err(Error::InvalidInput("all eigenvalues are zero".into()));
        }
        Ok(SpectrumSpec { eigenvalues, seed })
    }

    pub fn mu(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn l(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

/// How the starting point of a generated problem is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    #[default]
    Ones,
    Seeded,
}

impl FromStr for StartMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ones" => Ok(StartMode::Ones),
            "seeded" => Ok(StartMode::Seeded),
            other => Err(Error::InvalidInput(format!("unknown x0 mode '{other}'"))),
        }
    }
}

impl fmt::Display for StartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StartMode::Ones => "ones",
            StartMode::Seeded => "seeded",
        })
    }
}

/// Standard-normal vectors from a ChaCha stream; `stream` separates the
/// independent draws made from one seed.
pub fn seeded_gaussian_vectors(n: usize, count: usize, seed: u64, stream: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count)
        .map(|_| Vector::new((0..n).map(|_| rng.sample(StandardNormal)).collect()))
        .collect()
}

/// Random orthogonal matrix (as a list of orthonormal columns) from the QR
/// factorization of a seeded Gaussian matrix.
pub fn seeded_orthogonal(n: usize, seed: u64) -> Result<Vec<Vector>> {
    qr_orthogonal(&seeded_gaussian_vectors(n, n, seed, 0))
}

/// `A = QᵀΛQ` with `Q` from the QR of a seeded Gaussian matrix, `b = A z`
/// for a seeded `z`. Identical inputs give bit-identical problems.
pub fn gen_spectrum_problem(n: usize, spec: &SpectrumSpec, x0_mode: StartMode) -> Result<QuadraticProblem> {
    check_dim(n, spec.eigenvalues.len())?;
    let spec = SpectrumSpec::new(spec.eigenvalues.clone(), spec.seed)?;
    let q = seeded_orthogonal(n, spec.seed)?;

    // q[j][k] is entry (k, j) of Q; A_ij = Σ_k Q_ki λ_k Q_kj.
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for (k, lam) in spec.eigenvalues.iter().enumerate() {
                s += q[i][k] * lam * q[j][k];
            }
            data[i * n + j] = s;
            data[j * n + i] = s;
        }
    }
    let a = SymMatrix::from_row_major(n, data)?;
    let z = seeded_gaussian_vectors(n, 1, spec.seed, 1).remove(0);
    let b = a.mul_vec(&z);
    let x0 = match x0_mode {
        StartMode::Ones => Vector::from_elem(n, 1.0),
        StartMode::Seeded => seeded_gaussian_vectors(n, 1, spec.seed, 2).remove(0),
    };
    from_spectrum_parts(a, b, x0, &spec)
}

/// Builds a problem whose `μ`, `L` come from a known spectrum, cross-checked
/// against the Jacobi eigensolver.
pub(crate) fn from_spectrum_parts(a: SymMatrix, b: Vector, x0: Vector, spec: &SpectrumSpec) -> Result<QuadraticProblem> {
    check_dim(a.dim(), b.len())?;
    check_dim(a.dim(), x0.len())?;
    let (mu, l) = (spec.mu(), spec.l());
    let tol = 1e-10 * a.frobenius_norm().max(1.0);
    let x_star = if mu > 0.0 {
        let (lo, hi) = sym_eig_range(&a)?;
        cross_check(lo, hi, mu, l, tol)?;
        solve_spd(&a, &b)?
    } else {
        let eig = sym_eig(&a);
        cross_check(eig.min(), eig.max(), mu, l, tol)?;
        optimal_point_from_eig(&a, &b, &x0, &eig)?
    };
    Ok(QuadraticProblem::assemble(a, b, x0, mu, l, x_star))
}

fn cross_check(lo: f64, hi: f64, mu: f64, l: f64, tol: f64) -> Result<()> {
    if (lo - mu).abs() > tol || (hi - l).abs() > tol {
        return Err(Error::InvalidInput(format!(
            "eigen cross-check failed: computed ({lo:e}, {hi:e}) vs spectrum ({mu:e}, {l:e})"
        )));
    }
    Ok(())
}

/// Eigenvalue profiles for generated problems. Non-zero eigenvalues span `[1, κ]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Uniform,
    Geometric,
    /// Half the spectrum in `[1, 1.1]`, the rest in `[0.9κ, κ]`.
    Clustered,
    Explicit(Vec<f64>),
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Uniform => "uniform",
            Profile::Geometric => "geometric",
            Profile::Clustered => "clustered",
            Profile::Explicit(_) => "explicit",
        }
    }
}

/// Generator description, written `n=50,profile=geometric,kappa=100,seed=7`.
///
/// Keys: `n`, `profile` (uniform|geometric|clustered|explicit), `kappa`,
/// `eigs` (colon-separated explicit eigenvalues, implies `profile=explicit`),
/// `zeros` (number of zero eigenvalues prepended to the profile), `seed`,
/// `x0` (ones|seeded).
#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub profile: Profile,
    pub kappa: f64,
    pub zeros: usize,
    pub seed: u64,
    pub x0: StartMode,
}

impl GenSpec {
    pub fn new(n: usize, profile: Profile, kappa: f64, seed: u64) -> Self {
        GenSpec {
            n,
            profile,
            kappa,
            zeros: 0,
            seed,
            x0: StartMode::Ones,
        }
    }

    pub fn with_zeros(mut self, zeros: usize) -> Self {
        self.zeros = zeros;
        self
    }

    pub fn with_start(mut self, x0: StartMode) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if let Profile::Explicit(e) = &self.profile {
            if e.len() != self.n {
                return Err(Error::InvalidInput(format!(
                    "{} explicit eigenvalues given for n = {}",
                    e.len(),
                    self.n
                )));
            }
            return Ok(e.clone());
        }
        if self.zeros >= self.n {
            return Err(Error::InvalidInput("zeros must be smaller than n".into()));
        }
        if !(self.kappa.is_finite() && self.kappa > 1.0) {
            return Err(Error::InvalidInput("kappa must exceed 1".into()));
        }
        let m = self.n - self.zeros;
        let kappa = self.kappa;
        let t = |i: usize| if m == 1 { 0.0 } else { i as f64 / (m - 1) as f64 };
        let nonzero: Vec<f64> = match self.profile {
            Profile::Uniform => (0..m).map(|i| 1.0 + (kappa - 1.0) * t(i)).collect(),
            Profile::Geometric => (0..m).map(|i| kappa.powf(t(i))).collect(),
            Profile::Clustered => {
                let low = m.div_ceil(2);
                let high = m - low;
                let span = |i: usize, len: usize| if len <= 1 { 0.0 } else { i as f64 / (len - 1) as f64 };
                let mut e: Vec<f64> = (0..low).map(|i| 1.0 + 0.1 * span(i, low)).collect();
                e.extend((0..high).map(|i| kappa * (0.9 + 0.1 * span(i, high))));
                if high == 0 {
                    *e.last_mut().unwrap() = kappa;
                }
                e
            }
            Profile::Explicit(_) => unreachable!(),
        };
        let mut e = vec![0.0; self.zeros];
        e.extend(nonzero);
        Ok(e)
    }

    pub fn spectrum(&self) -> Result<SpectrumSpec> {
        SpectrumSpec::new(self.eigenvalues()?, self.seed)
    }

    pub fn generate(&self) -> Result<QuadraticProblem> {
        gen_spectrum_problem(self.n, &self.spectrum()?, self.x0)
    }
}

impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut n = None;
        let mut profile = None;
        let mut kappa = 100.0;
        let mut zeros = 0;
        let mut seed = 0;
        let mut x0 = StartMode::Ones;
        let bad = |k: &str, v: &str| Error::InvalidInput(format!("bad value '{v}' for '{k}'"));
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected key=value, got '{part}'")))?;
            match k {
                "n" => n = Some(v.parse().map_err(|_| bad(k, v))?),
                "kappa" => kappa = v.parse().map_err(|_| bad(k, v))?,
                "zeros" => zeros = v.parse().map_err(|_| bad(k, v))?,
                "seed" => seed = v.parse().map_err(|_| bad(k, v))?,
                "x0" => x0 = v.parse()?,
                "profile" => {
                    profile = Some(match v {
                        "uniform" => Profile::Uniform,
                        "geometric" => Profile::Geometric,
                        "clustered" => Profile::Clustered,
                        "explicit" => Profile::Explicit(Vec::new()),
                        _ => return Err(bad(k, v)),
                    })
                }
                "eigs" => {
                    let e = v
                        .split(':')
                        .map(|x| x.parse::<f64>().map_err(|_| bad(k, v)))
                        .collect::<Result<Vec<_>>>()?;
                    profile = Some(Profile::Explicit(e));
                }
                other => {
                    return Err(Error::InvalidInput(format!("unknown generator key '{other}'")))
                }
            }
        }
        let profile = profile.unwrap_or(Profile::Geometric);
        let n = match (&profile, n) {
            (_, Some(n)) => n,
            (Profile::Explicit(e), None) if !e.is_empty() => e.len(),
            _ => return Err(Error::InvalidInput("generator spec needs n".into())),
        };
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if matches!(&profile, Profile::Explicit(e) if e.is_empty()) {
            return Err(Error::InvalidInput("profile=explicit needs eigs=".into()));
        }
        Ok(GenSpec {
            n,
            profile,
            kappa,
            zeros,
            seed,
            x0,
        })
    }
}

/// On-disk problem description (UTF-8 JSON). Either `A` or `spectrum` must
/// be present; `b` may be omitted with `spectrum`, `x0` defaults to ones.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

impl ProblemFile {
    /// Dense form of a problem, as written by the CLI.
    pub fn from_problem(p: &QuadraticProblem) -> Self {
        ProblemFile {
            n: p.n(),
            a: Some(p.matrix().row_major().to_vec()),
            spectrum: None,
            b: Some(p.rhs().as_slice().to_vec()),
            x0: Some(p.x0().as_slice().to_vec()),
        }
    }

    pub fn into_problem(self) -> Result<QuadraticProblem> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        let x0 = match self.x0 {
            Some(x) => Vector::new(x),
            None => Vector::from_elem(n, 1.0),
        };
        check_dim(n, x0.len())?;
        match (self.a, self.spectrum) {
            (Some(a), _) => {
                let a = SymMatrix::from_row_major(n, a)?;
                let b = self
                    .b
                    .map(Vector::new)
                    .ok_or_else(|| Error::InvalidInput("dense problem needs b".into()))?;
                QuadraticProblem::new(a, b, x0)
            }
            (None, Some(spec)) => {
                let generated = gen_spectrum_problem(n, &spec, StartMode::Ones)?;
                let b = match self.b {
                    Some(b) => Vector::new(b),
                    None => generated.rhs().clone(),
                };
                let spec = SpectrumSpec::new(spec.eigenvalues, spec.seed)?;
                from_spectrum_parts(generated.matrix().clone(), b, x0, &spec)
            }
            (None, None) => Err(Error::InvalidInput(
                "problem file needs either A or spectrum".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag12() -> QuadraticProblem {
        QuadraticProblem::new(
            SymMatrix::diagonal(&[1.0, 2.0]),
            Vector::zeros(2),
            Vector::new(vec![1.0, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn quad_eval_examples() {
        let p = diag12();
        assert_eq!(quad_eval(&p, &Vector::new(vec![1.0, 1.0])).unwrap(), 1.5);
        let one = QuadraticProblem::new(
            SymMatrix::diagonal(&[1.0]),
            Vector::zeros(1),
            Vector::zeros(1),
        )
        .unwrap();
        assert_eq!(quad_eval(&one, &Vector::zeros(1)).unwrap(), 0.0);
        assert!(quad_eval(&p, &Vector::zeros(3)).is_err());
    }

    #[test]
    fn quad_grad_examples() {
        let p = diag12();
        assert_eq!(
            quad_grad(&p, &Vector::new(vec![1.0, 1.0])).unwrap(),
            Vector::new(vec![1.0, 2.0])
        );
        assert_eq!(quad_grad(&p, p.x_star()).unwrap(), Vector::zeros(2));
        let q = QuadraticProblem::new(
            SymMatrix::diagonal(&[2.0]),
            Vector::new(vec![1.0]),
            Vector::zeros(1),
        )
        .unwrap();
        assert_eq!(quad_grad(&q, &Vector::new(vec![1.0])).unwrap(), Vector::new(vec![1.0]));
    }

    #[test]
    fn optimal_point_examples() {
        let x = optimal_point(
            &SymMatrix::diagonal(&[1.0, 2.0]),
            &Vector::zeros(2),
            &Vector::new(vec![1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(x, Vector::zeros(2));

        let x = optimal_point(
            &SymMatrix::diagonal(&[0.0, 1.0]),
            &Vector::new(vec![0.0, 1.0]),
            &Vector::new(vec![3.0, 5.0]),
        )
        .unwrap();
        assert!((&x - &Vector::new(vec![3.0, 1.0])).norm() < 1e-15);

        let x = optimal_point(
            &SymMatrix::identity(2),
            &Vector::new(vec![1.0, 1.0]),
            &Vector::new(vec![-7.0, 2.0]),
        )
        .unwrap();
        assert_eq!(x, Vector::new(vec![1.0, 1.0]));
    }

    #[test]
    fn optimal_point_rejects_b_outside_range() {
        let r = optimal_point(
            &SymMatrix::diagonal(&[0.0, 1.0]),
            &Vector::new(vec![1.0, 1.0]),
            &Vector::zeros(2),
        );
        assert!(matches!(r, Err(Error::Unbounded(_))));
    }

    #[test]
    fn generated_spectrum_is_reproduced() {
        let spec = SpectrumSpec::new(vec![1.0, 2.0], 5).unwrap();
        let p = gen_spectrum_problem(2, &spec, StartMode::Ones).unwrap();
        let (lo, hi) = sym_eig_range(p.matrix()).unwrap();
        assert!((lo - 1.0).abs() < 1e-10 && (hi - 2.0).abs() < 1e-10);
        assert_eq!((p.mu(), p.l()), (1.0, 2.0));
    }

    #[test]
    fn singular_spectrum_keeps_b_in_range() {
        let spec = SpectrumSpec::new(vec![0.0, 1.0], 3).unwrap();
        let p = gen_spectrum_problem(2, &spec, StartMode::Seeded).unwrap();
        assert_eq!(p.mu(), 0.0);
        // (I − A A⁺) b: project b onto the null eigenvector.
        let eig = sym_eig(p.matrix());
        let null = &eig.vectors[0];
        assert!(null.dot(p.rhs()).abs() <= 1e-10);
        assert!(p.gradient(p.x_star()).norm() < 1e-12);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SpectrumSpec::new(vec![0.5, 1.0, 3.0, 9.0], 11).unwrap();
        let a = gen_spectrum_problem(4, &spec, StartMode::Seeded).unwrap();
        let b = gen_spectrum_problem(4, &spec, StartMode::Seeded).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(a.rhs(), b.rhs());
        assert_eq!(a.x0(), b.x0());
        let ja = serde_json::to_string(&ProblemFile::from_problem(&a)).unwrap();
        let jb = serde_json::to_string(&ProblemFile::from_problem(&b)).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn all_zero_spectrum_rejected() {
        assert!(SpectrumSpec::new(vec![0.0, 0.0], 1).is_err());
        assert!(SpectrumSpec::new(vec![], 1).is_err());
    }

    #[test]
    fn gen_spec_parsing() {
        let g: GenSpec = "n=2,eigs=1:2,seed=1".parse().unwrap();
        assert_eq!(g.n, 2);
        assert_eq!(g.profile, Profile::Explicit(vec![1.0, 2.0]));
        assert_eq!(g.seed, 1);

        let g: GenSpec = "n=50,profile=geometric,kappa=100,seed=7".parse().unwrap();
        let e = g.eigenvalues().unwrap();
        assert_eq!(e.len(), 50);
        assert!((e[0] - 1.0).abs() < 1e-15 && (e[49] - 100.0).abs() < 1e-12);

        let g: GenSpec = "n=10,profile=uniform,kappa=10,zeros=2".parse().unwrap();
        let e = g.eigenvalues().unwrap();
        assert_eq!(&e[..3], &[0.0, 0.0, 1.0]);
        assert_eq!(e[9], 10.0);

        let g: GenSpec = "n=5,profile=clustered,kappa=1000".parse().unwrap();
        let e = g.eigenvalues().unwrap();
        assert_eq!(e[0], 1.0);
        assert_eq!(e[4], 1000.0);

        assert!("n=3,bogus=1".parse::<GenSpec>().is_err());
        assert!("profile=uniform".parse::<GenSpec>().is_err());
        assert!("n=3,eigs=1:2".parse::<GenSpec>().unwrap().eigenvalues().is_err());
    }

    #[test]
    fn problem_file_round_trip() {
        let p = GenSpec::new(4, Profile::Uniform, 10.0, 2).generate().unwrap();
        let json = serde_json::to_string(&ProblemFile::from_problem(&p)).unwrap();
        let back: ProblemFile = serde_json::from_str(&json).unwrap();
        let q = back.into_problem().unwrap();
        assert_eq!(q.matrix(), p.matrix());
        assert_eq!(q.rhs(), p.rhs());
        assert!((q.mu() - p.mu()).abs() < 1e-10);
        assert!((q.l() - p.l()).abs() < 1e-10);
    }

    #[test]
    fn problem_file_spectrum_form() {
        let json = r#"{"n": 3, "spectrum": {"eigenvalues": [1, 2, 4], "seed": 9}, "x0": [0, 0, 1]}"#;
        let p = serde_json::from_str::<ProblemFile>(json).unwrap().into_problem().unwrap();
        assert_eq!((p.mu(), p.l()), (1.0, 4.0));
        assert_eq!(p.x0(), &Vector::new(vec![0.0, 0.0, 1.0]));
        let missing = r#"{"n": 3, "x0": [0, 0, 1]}"#;
        assert!(serde_json::from_str::<ProblemFile>(missing).unwrap().into_problem().is_err());
    }
}
