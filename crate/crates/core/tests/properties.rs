use std::f64::consts::TAU;

use bergman_lab::diagnostics::{m_threshold, m_threshold_small_p, pq_regime, pq_window, PqRegime};
use bergman_lab::estimates::{i_ct, lattice_sum};
use bergman_lab::geometry::{bergman_disk, bergman_metric, disk_reach};
use bergman_lab::kernels::{kernel_c, monomial_norm_sq};
use bergman_lab::operators::{berezin, berezin_closed_form, u_z_apply, NamedFn};
use bergman_lab::quadrature::gamma;
use bergman_lab::{DiskPoint, Lattice, OperatorSpec, QuadratureGrid, Sequence, Truncation};
use num_complex::Complex64;
use proptest::prelude::*;

fn disk_point(max: f64) -> impl Strategy<Value = DiskPoint> {
    (0.0..max, 0.0..TAU).prop_map(|(r, t)| DiskPoint::polar(r, t).unwrap())
}

fn moment(j: i32, alpha: f64) -> f64 {
    gamma(j as f64 + 1.0).unwrap() * gamma(alpha + 2.0).unwrap() / gamma(j as f64 + alpha + 2.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bergman_ball_is_euclidean_disk(a in disk_point(0.95), r in 0.05..2.5f64, w in disk_point(0.999)) {
        let d = bergman_disk(a, r).unwrap();
        let beta = bergman_metric(a, w);
        // membership may differ only right at the boundary
        prop_assume!((beta - r).abs() > 1e-9 * r.max(1.0));
        prop_assert_eq!(beta < r, d.contains(w.value()));
    }

    #[test]
    fn reach_is_increasing(s in 0.001..0.999f64, x in 0.0..0.99f64, dx in 1e-6..0.01f64) {
        prop_assert!(disk_reach(s, x + dx) > disk_reach(s, x));
    }

    #[test]
    fn quadrature_is_exact_on_monomials(
        n_rad in 2usize..24,
        log_ang in 3u32..7,
        alpha in -0.9..3.0f64,
        jf in 0.0..1.0f64,
        kf in -1.0..1.0f64,
    ) {
        let n_ang = 1usize << log_ang;
        let grid = QuadratureGrid::new(alpha, n_rad, n_ang).unwrap();
        // |w|^{2j} e^{ikθ} with 2j <= 2 n_rad - 1 and |k| < n_ang
        let j = (jf * (n_rad - 1) as f64) as i32;
        let k = (kf * (n_ang - 1) as f64) as i32;
        let vals: Vec<Complex64> = grid
            .nodes()
            .map(|w| Complex64::from_polar(w.norm_sqr().powi(j), k as f64 * w.arg()))
            .collect();
        let v = grid.integrate_values(&vals).unwrap();
        let exact = if k == 0 { moment(j, alpha) } else { 0.0 };
        prop_assert!((v - exact).norm() <= 1e-12 * exact.max(1.0), "j={} k={} {} vs {}", j, k, v, exact);
    }

    #[test]
    fn quadrature_is_deterministic(alpha in -0.9..3.0f64, z in disk_point(0.9)) {
        let grid = QuadratureGrid::new(alpha, 32, 64).unwrap();
        let f = |w: Complex64| kernel_c(z.value(), w, alpha) * w.conj();
        let a = grid.integrate_values(&grid.nodes().map(f).collect::<Vec<_>>()).unwrap();
        let b = grid.integrate_values(&grid.nodes().map(f).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
        prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn gamma_recursion(x in 0.1..50.0f64) {
        let lhs = gamma(x + 1.0).unwrap();
        prop_assert!((lhs - x * gamma(x).unwrap()).abs() <= 1e-11 * lhs);
    }

    #[test]
    fn thresholds(p in 1.0001..10.0f64, alpha in -0.9..5.0f64) {
        let m = m_threshold(p, alpha).unwrap();
        prop_assert!((m - p * (2.0 + alpha) / (1.0 + alpha) * (1.0f64).max(1.0 / (p - 1.0))).abs() <= 1e-12 * m);
        if p < 1.5 && alpha == 0.0 {
            prop_assert!(m < 3.0 / (p - 1.0));
        }
    }

    #[test]
    fn small_p_branches_meet(p in 0.01..=1.0f64, alpha in -0.9..5.0f64, delta in 0.01..20.0f64) {
        let balanced = m_threshold_small_p(p, alpha, (1.0 + alpha) / p).unwrap();
        prop_assert!((balanced.first_branch - balanced.second_branch).abs() <= 1e-12 * balanced.threshold);
        prop_assert!((balanced.threshold - (2.0 + 1.0 / (1.0 + alpha))).abs() <= 1e-12 * balanced.threshold);
        // the balanced choice minimizes the threshold over δ
        let t = m_threshold_small_p(p, alpha, delta).unwrap();
        prop_assert!(t.threshold >= balanced.threshold * (1.0 - 1e-12));
    }

    #[test]
    fn pq_regimes_follow_the_window(p in 2.01..10.0f64, q in 0.01..10.0f64, m in 0.5..20.0f64, alpha in -0.5..3.0f64) {
        let (lo, hi) = pq_window(p, alpha);
        let r = pq_regime(p, q, m, alpha).unwrap();
        match r {
            PqRegime::CaseA => prop_assert!(m > lo && m <= hi && p >= m && q < m * (1.0 + alpha) / (2.0 + alpha)),
            PqRegime::CaseB => prop_assert!(m > lo && m <= hi && p < m && q < p / (2.0 + alpha)),
            PqRegime::Inapplicable(_) => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn basis_is_orthonormal(m in 0usize..=20, n in 0usize..=20, alpha in -0.5..2.5f64) {
        let grid = QuadratureGrid::new(alpha, 32, 64).unwrap();
        let vals: Vec<Complex64> = grid
            .nodes()
            .map(|w| w.powi(m as i32) * w.conj().powi(n as i32))
            .collect();
        let v = grid.integrate_values(&vals).unwrap() / (monomial_norm_sq(m, alpha) * monomial_norm_sq(n, alpha)).sqrt();
        let expected = if m == n { 1.0 } else { 0.0 };
        prop_assert!((v - expected).norm() < 1e-10);
    }

    #[test]
    fn i_ct_is_radial(r in 0.0..0.95f64, t1 in 0.0..TAU, t2 in 0.0..TAU) {
        let a = i_ct(DiskPoint::polar(r, t1).unwrap(), 1.0, 0.5, 1e-10).unwrap();
        let b = i_ct(DiskPoint::polar(r, t2).unwrap(), 1.0, 0.5, 1e-10).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-8 * a.value.abs() + a.err_est + b.err_est);
    }

    #[test]
    fn lattice_sum_at_origin_ignores_t2(t1 in 1.1..4.0f64, t2 in -3.0..6.0f64) {
        let lat = Lattice::build(0.7, 0.9).unwrap();
        let a = lattice_sum(&lat, t1, t2, DiskPoint::ORIGIN).unwrap().value;
        let b = lattice_sum(&lat, t1, 0.0, DiskPoint::ORIGIN).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-14 * b);
    }

    #[test]
    fn cells_go_to_nearest_center(w in disk_point(0.9)) {
        let lat = Lattice::build(0.5, 0.9).unwrap();
        let k = lat.cell_assign(w).unwrap();
        let d = bergman_metric(w, lat.centers()[k]);
        for (j, &c) in lat.centers().iter().enumerate() {
            let dj = bergman_metric(w, c);
            prop_assert!(d <= dj * (1.0 + 1e-12), "cell {} at {} but center {} at {}", k, d, j, dj);
        }
    }

    #[test]
    fn u_z_is_an_isometry(z in disk_point(0.9), which in 0usize..4) {
        let alpha = 0.5;
        let grid = QuadratureGrid::default_for(alpha).unwrap();
        let a = Complex64::new(0.3, 0.0);
        let f = move |w: Complex64| match which {
            0 => Complex64::new(1.0, 0.0),
            1 => w,
            2 => w * w,
            _ => kernel_c(a, w, alpha),
        };
        let norm = |g: &dyn Fn(Complex64) -> Complex64| {
            let vals: Vec<f64> = grid.nodes().map(|w| g(w).norm_sqr()).collect();
            grid.integrate_real_values(&vals).unwrap().sqrt()
        };
        let moved = norm(&|w| u_z_apply(z, |u| f(u.value()), DiskPoint::from_complex(w).unwrap(), alpha));
        prop_assert!((moved - norm(&f)).abs() < 1e-7);
    }

    #[test]
    fn berezin_is_linear(
        z in disk_point(0.9),
        ar in -2.0..2.0f64, ai in -2.0..2.0f64,
        br in -2.0..2.0f64, bi in -2.0..2.0f64,
        q in -0.9..0.9f64,
    ) {
        let alpha = 1.0;
        let s1 = OperatorSpec::FiniteRank(vec![(NamedFn::monomial(1), NamedFn::monomial(2))]);
        let s2 = OperatorSpec::diagonal(Sequence::geometric(q).unwrap());
        let (a, b) = (Complex64::new(ar, ai), Complex64::new(br, bi));
        let comb = OperatorSpec::Combination(vec![(a, s1.clone()), (b, s2.clone())]);
        let grid = QuadratureGrid::focused(alpha, z.modulus()).unwrap();
        let lhs = berezin(&comb, z, alpha, &grid).unwrap();
        let rhs = a * berezin(&s1, z, alpha, &grid).unwrap() + b * berezin(&s2, z, alpha, &grid).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn diagonal_dual_path(z in disk_point(0.95), alpha in 0.0..2.0f64, c in 0.1..1.0f64) {
        let s = OperatorSpec::diagonal(Sequence::constant(c).unwrap()).with_truncation(Truncation::Auto);
        let grid = QuadratureGrid::focused(alpha, z.modulus()).unwrap();
        let closed = berezin_closed_form(&s, z, alpha).unwrap().unwrap();
        prop_assert!((berezin(&s, z, alpha, &grid).unwrap() - closed).norm() < 1e-6);
        // a constant sequence is c times the identity
        prop_assert!((closed - c).norm() < 1e-12 * c);
    }
}
