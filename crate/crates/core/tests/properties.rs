use std::f64::consts::PI;

use proptest::prelude::*;

use robin_spectra::discretize::mesh::mesh_rectangle;
use robin_spectra::discretize::meshio::{parse_mesh, write_mesh};
use robin_spectra::discretize::tridiag::principal_eigenvalue_tridiag;
use robin_spectra::exact1d::{decide_sign, principal_eigenvalue_1d, SignRegime};
use robin_spectra::harness::fit::{fit_rate, FittedModel};
use robin_spectra::harness::sweep::{read_csv, write_csv, SweepRow};
use robin_spectra::radial::{sigma_dot_formula, sigma_scaled};
use robin_spectra::types::{BoundaryOperator, BoundaryOperator::*, Method, Problem1D, TolerancePolicy};

fn sigma(l: f64, left: BoundaryOperator, right: BoundaryOperator) -> f64 {
    principal_eigenvalue_1d(&Problem1D::interval(l, left, right), &TolerancePolicy::default()).unwrap().value
}

fn endpoint() -> impl Strategy<Value = BoundaryOperator> {
    prop_oneof![
        1 => Just(Dirichlet),
        1 => Just(Neumann),
        4 => (-4.0..4.0f64).prop_map(Robin),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn increasing_a_coefficient_raises_sigma(l in 0.1..5.0f64, b0 in -3.0..3.0f64, b1 in -3.0..3.0f64, d in 0.05..2.0f64) {
        let low = sigma(l, Robin(b0), Robin(b1));
        let high = sigma(l, Robin(b0 + d), Robin(b1));
        prop_assert!(high >= low);
        prop_assert!(sigma(l, Dirichlet, Robin(b1)) >= high);
    }

    #[test]
    fn mirror_symmetry(l in 0.1..5.0f64, left in endpoint(), right in endpoint()) {
        let (a, b) = (sigma(l, left, right), sigma(l, right, left));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn scaling_identity(l in 0.2..4.0f64, t in 0.1..10.0f64, b0 in -3.0..3.0f64, b1 in -3.0..3.0f64) {
        let base = sigma(l, Robin(b0), Robin(b1));
        let scaled = sigma(t * l, Robin(b0 / t), Robin(b1 / t));
        prop_assert!((t * t * scaled - base).abs() <= 1e-9 * (1.0 + base.abs()));
    }

    #[test]
    fn sign_regime_matches_value(l in 0.1..5.0f64, left in endpoint(), right in endpoint()) {
        let p = Problem1D::interval(l, left, right);
        let v = sigma(l, left, right);
        match decide_sign(&p) {
            SignRegime::Positive => prop_assert!(v > 0.0),
            SignRegime::Zero => prop_assert_eq!(v, 0.0),
            SignRegime::Negative => prop_assert!(v < 0.0),
        }
    }

    #[test]
    fn exact_eigenfunction_is_positive_inside(l in 0.1..5.0f64, left in endpoint(), right in endpoint()) {
        let est = principal_eigenvalue_1d(&Problem1D::interval(l, left, right), &TolerancePolicy::default()).unwrap();
        let samples = est.eigenfunction.samples(65);
        prop_assert!(samples[1..64].iter().all(|s| s.1 > 0.0));
        let max = samples.iter().map(|s| s.1).fold(f64::MIN, f64::max);
        prop_assert!(max <= 1.0 + 1e-12);
    }

    #[test]
    fn bounded_by_dirichlet(l in 0.1..5.0f64, left in endpoint(), right in endpoint()) {
        prop_assert!(sigma(l, left, right) <= (PI / l).powi(2) * (1.0 + 1e-12));
    }

    #[test]
    fn csv_round_trip_is_bit_exact(values in prop::collection::vec((1e-12..1e6f64, -1e9..1e9f64, 0.0..1.0f64), 1..20)) {
        let rows: Vec<SweepRow> = values.iter().map(|&(scale, sigma, residual)| SweepRow {
            scale, sigma, residual, method: Method::Shooting, wall_ms: 0.0,
        }).collect();
        let mut bytes = Vec::new();
        write_csv(&rows, &mut bytes, false).unwrap();
        let back = read_csv(bytes.as_slice()).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in back.iter().zip(&rows) {
            prop_assert_eq!(a.sigma.to_bits(), b.sigma.to_bits());
            prop_assert_eq!(a.scale.to_bits(), b.scale.to_bits());
            prop_assert_eq!(a.residual.to_bits(), b.residual.to_bits());
        }
    }

    #[test]
    fn power_laws_are_recovered(c in 0.1..10.0f64, p in -3.0..-0.5f64, sign in prop::bool::ANY) {
        let c = if sign { c } else { -c };
        let rows: Vec<(f64, f64)> = (0..8).map(|k| {
            let x = 0.5f64.powi(k);
            (x, c * x.powf(p))
        }).collect();
        match fit_rate(&rows).unwrap().model {
            FittedModel::PowerLaw { c: fc, p: fp } => {
                prop_assert!((fc - c).abs() <= 1e-9 * c.abs() && (fp - p).abs() <= 1e-9);
            }
            other => prop_assert!(false, "{}", other),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tridiagonal_tracks_exact(l in 0.2..4.0f64, left in endpoint(), right in endpoint()) {
        let p = Problem1D::interval(l, left, right);
        let exact = sigma(l, left, right);
        let disc = principal_eigenvalue_tridiag(&p, 1024, &TolerancePolicy::discretization()).unwrap().value;
        prop_assert!((disc - exact).abs() <= 5e-3 * (1.0 + exact.abs()), "{} vs {}", disc, exact);
    }

    #[test]
    fn mesh_text_round_trip(a in 0.1..4.0f64, b in 0.1..4.0f64, res in 8usize..14, beta in -2.0..2.0f64) {
        let mesh = mesh_rectangle(a, b, res).unwrap().with_uniform_boundary(Robin(beta));
        let back = parse_mesh(&write_mesh(&mesh)).unwrap();
        prop_assert_eq!(&back.vertices, &mesh.vertices);
        prop_assert_eq!(&back.triangles, &mesh.triangles);
        prop_assert_eq!(back.boundary_edges.len(), mesh.boundary_edges.len());
        for (x, y) in back.boundary_edges.iter().zip(&mesh.boundary_edges) {
            prop_assert_eq!(x.vertices, y.vertices);
            prop_assert_eq!(x.condition.normalized(), y.condition.normalized());
        }
    }
}

// For N = 1 the unit-ball problem is (0, 1) with a Neumann centre, so Σ = s²
// with s tan s = βR; implicit differentiation gives dΣ/dR independently.
#[test]
fn derivative_formula_matches_implicit_1d_derivative() {
    for r in [0.1, 0.5, 1.0, 2.0] {
        let s = sigma_scaled(1, r, 1.0, &TolerancePolicy::default()).unwrap().sqrt();
        let ds = 1.0 / (s.tan() + s / s.cos().powi(2));
        let oracle = 2.0 * s * ds;
        let formula = sigma_dot_formula(1, r, 1.0, &TolerancePolicy::default()).unwrap();
        assert!((formula - oracle).abs() < 1e-6 * oracle, "R={r}: {formula} vs {oracle}");
    }
}
