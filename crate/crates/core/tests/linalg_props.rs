use gapcert::linalg::{
    affine_subspace_min, orthonormal_basis, qr_orthogonal, solve_spd, sym_eig, sym_eig_range, SubspaceSpec,
};
use gapcert::problem::seeded_gaussian_vectors;
use gapcert::{SymMatrix, Vector};
use proptest::prelude::*;

fn dense(n: usize, f: impl Fn(usize, usize) -> f64) -> SymMatrix {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = f(i, j);
        }
    }
    SymMatrix::from_row_major(n, d).unwrap()
}

/// `BᵀB + shift·I` for a random `B`.
fn spd_from(n: usize, entries: &[f64], shift: f64) -> SymMatrix {
    dense(n, |i, j| {
        let s: f64 = (0..n).map(|k| entries[k * n + i] * entries[k * n + j]).sum();
        s + if i == j { shift } else { 0.0 }
    })
}

fn sym_from(n: usize, entries: &[f64]) -> SymMatrix {
    dense(n, |i, j| 0.5 * (entries[i * n + j] + entries[j * n + i]))
}

fn matrix_and_vec() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (1usize..9).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(-1.0f64..1.0, n * n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solve_spd_residual_bound((n, entries, rhs) in matrix_and_vec(), shift in 1e-3f64..2.0) {
        let m = spd_from(n, &entries, shift);
        let rhs = Vector::new(rhs);
        let x = solve_spd(&m, &rhs).unwrap();
        let r = (&m.mul_vec(&x) - &rhs).norm();
        prop_assert!(r <= 1e-10 * (m.frobenius_norm() * x.norm() + rhs.norm()), "residual {r:e}");
    }

    #[test]
    fn orthonormal_basis_is_orthonormal_and_spans(
        n in 1usize..8,
        count in 1usize..8,
        seed in any::<u64>(),
    ) {
        let vs = seeded_gaussian_vectors(n, count, seed, 0);
        let b = orthonormal_basis(&vs, 1e-10);
        prop_assert_eq!(b.len(), count.min(n));
        for i in 0..b.len() {
            for j in 0..b.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((b[i].dot(&b[j]) - want).abs() <= 1e-12);
            }
        }
        for v in &vs {
            let mut r = v.clone();
            for q in &b {
                r.axpy(-q.dot(v), q);
            }
            prop_assert!(r.norm() <= 1e-10 * v.norm());
        }
    }

    #[test]
    fn affine_min_is_first_order_optimal(
        (n, entries, rhs) in matrix_and_vec(),
        shift in 1e-2f64..2.0,
        k in 0usize..4,
        seed in any::<u64>(),
    ) {
        let a = spd_from(n, &entries, shift);
        let b = Vector::new(rhs);
        let mut vs = seeded_gaussian_vectors(n, k + 1, seed, 3);
        let anchor = vs.pop().unwrap();
        let spec = SubspaceSpec::new(anchor, vs.clone()).unwrap();
        let x = affine_subspace_min(&a, &b, &spec).unwrap();
        let g = &a.mul_vec(&x) - &b;
        for d in &vs {
            let lhs = g.dot(d).abs();
            prop_assert!(lhs <= 1e-9 * a.frobenius_norm() * d.norm() * (1.0 + x.norm()), "{lhs:e}");
        }
    }

    #[test]
    fn eig_range_is_similarity_invariant(
        (n, entries, _) in matrix_and_vec(),
        seed in any::<u64>(),
    ) {
        let m = sym_from(n, &entries);
        let q = qr_orthogonal(&seeded_gaussian_vectors(n, n, seed, 0)).unwrap();
        // (QᵀMQ)_ij = q_iᵀ M q_j
        let mq: Vec<Vector> = q.iter().map(|c| m.mul_vec(c)).collect();
        let rotated = dense(n, |i, j| q[i].dot(&mq[j]));
        let (lo, hi) = sym_eig_range(&m).unwrap();
        let (lo2, hi2) = sym_eig_range(&rotated).unwrap();
        let tol = 1e-9 * m.frobenius_norm().max(f64::MIN_POSITIVE);
        prop_assert!((lo - lo2).abs() <= tol && (hi - hi2).abs() <= tol, "{lo} {lo2} {hi} {hi2}");
    }

    #[test]
    fn eigenpairs_reconstruct((n, entries, _) in matrix_and_vec()) {
        let m = sym_from(n, &entries);
        let e = sym_eig(&m);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            let r = &m.mul_vec(v) - &v.scaled(*lam);
            prop_assert!(r.norm() <= 1e-10 * m.frobenius_norm().max(1.0));
        }
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

/// Determinant by LU with partial pivoting.
fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    d
}

fn char_poly(m: &SymMatrix, lam: f64) -> f64 {
    let n = m.dim();
    det((0..n)
        .map(|i| (0..n).map(|j| m.get(i, j) - if i == j { lam } else { 0.0 }).collect())
        .collect())
}

#[test]
fn seed7_eigenvalues_match_bisection_oracle() {
    let n = 5;
    let g = seeded_gaussian_vectors(n, n, 7, 0);
    let m = dense(n, |i, j| 0.5 * (g[i][j] + g[j][i]));

    // Gershgorin interval, scanned finely, then bisection on each sign change.
    let radius = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = 20_000;
    let h = 2.0 * radius / steps as f64;
    let mut roots = Vec::new();
    let mut lo = -radius;
    let mut flo = char_poly(&m, lo);
    for s in 1..=steps {
        let hi = -radius + s as f64 * h;
        let fhi = char_poly(&m, hi);
        if flo == 0.0 {
            roots.push(lo);
        } else if flo * fhi < 0.0 {
            let (mut a, mut b, mut fa) = (lo, hi, flo);
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                let fc = char_poly(&m, c);
                if fa * fc <= 0.0 {
                    b = c;
                } else {
                    a = c;
                    fa = fc;
                }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
        flo = fhi;
    }
    assert_eq!(roots.len(), n, "oracle found {roots:?}");

    let e = sym_eig(&m);
    for (r, v) in roots.iter().zip(&e.values) {
        assert!((r - v).abs() <= 1e-8, "oracle {r} vs jacobi {v}");
    }
    let (lmin, lmax) = sym_eig_range(&m).unwrap();
    assert!((lmin - roots[0]).abs() <= 1e-8);
    assert!((lmax - roots[n - 1]).abs() <= 1e-8);
}

#[test]
fn identity_and_diagonal_ranges() {
    assert_eq!(sym_eig_range(&SymMatrix::identity(4)).unwrap(), (1.0, 1.0));
    assert_eq!(sym_eig_range(&SymMatrix::diagonal(&[1.0, 2.0])).unwrap(), (1.0, 2.0));
}
