//! Principal eigenvalue of `−u'' = σu` on `(0, L)` with constant endpoint
//! conditions `−u'(0) + β₀u(0) = 0` and `u'(L) + β_L u(L) = 0` (either end
//! may be Dirichlet).
//!
//! The sign of `σ₁` is settled algebraically from the `σ = 0` solution. For
//! a nonzero eigenvalue the root variable is `s = √|σ₁|` and the principal
//! root is located with the Prüfer angle of the solution that satisfies the
//! left condition. The angle is strictly increasing in `σ`, so it has exactly
//! one crossing of the target on the bracket and never meets the poles of
//! the tan/tanh forms of the characteristic equation.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Result, SpectraError};
use crate::roots::first_root;
use crate::types::{BoundaryKind, BoundaryOperator, EigenEstimate, Eigenfunction, Method, Problem1D, TolerancePolicy};

/// Relative size of the zero-eigenvalue condition below which `σ₁ = 0` is
/// returned without root finding.
const ZERO_GUARD: f64 = 1e-14;

/// Algebraic sign of the principal eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignRegime {
    Positive,
    Zero,
    Negative,
}

/// Which endpoint combination a problem falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// Both ends Dirichlet or Neumann.
    DirichletNeumann,
    RobinDirichlet,
    DirichletRobin,
    RobinNeumann,
    NeumannRobin,
    RobinRobin,
}

impl CaseTag {
    pub fn of(problem: &Problem1D) -> CaseTag {
        use BoundaryKind::*;
        match (problem.left.kind(), problem.right.kind()) {
            (Robin, Dirichlet) => CaseTag::RobinDirichlet,
            (Dirichlet, Robin) => CaseTag::DirichletRobin,
            (Robin, Neumann) => CaseTag::RobinNeumann,
            (Neumann, Robin) => CaseTag::NeumannRobin,
            (Robin, Robin) => CaseTag::RobinRobin,
            _ => CaseTag::DirichletNeumann,
        }
    }
}

/// Value and slope at `x = 0` of the solution satisfying the left condition.
fn left_data(left: &BoundaryOperator) -> (f64, f64) {
    match left.beta() {
        None => (0.0, 1.0),
        Some(b) => (1.0, b),
    }
}

/// `(defect, scale)` of the right condition applied to the `σ = 0` solution
/// `ψ₀(x) = ψ(0) + ψ'(0)x`.
fn zero_condition(problem: &Problem1D) -> (f64, f64) {
    let (a, b) = left_data(&problem.left);
    let l = problem.length;
    let value = a + b * l;
    match problem.right.beta() {
        None => (value, a.abs() + (b * l).abs()),
        Some(br) => (b + br * value, b.abs() + br.abs() * (a.abs() + (b * l).abs())),
    }
}

/// Relative residual of the exact zero-eigenvalue condition.
pub fn zero_condition_residual(problem: &Problem1D) -> f64 {
    let (d, scale) = zero_condition(problem);
    if scale == 0.0 {
        d.abs()
    } else {
        d.abs() / scale
    }
}

/// Sign of `σ₁`, decided from the `σ = 0` solution `ψ₀` of the left
/// condition: if `ψ₀` already has a node before the right end, or violates
/// the right condition in the direction of a supersolution, `σ₁ < 0`; an
/// exact fit means `σ₁ = 0`. The radial dimension is ignored.
pub fn decide_sign(problem: &Problem1D) -> SignRegime {
    let (a, b) = left_data(&problem.left);
    let l = problem.length;
    let end_value = a + b * l;
    let (d, _) = zero_condition(problem);
    match problem.right.beta() {
        None => {
            if end_value > 0.0 {
                SignRegime::Positive
            } else if end_value == 0.0 {
                SignRegime::Zero
            } else {
                SignRegime::Negative
            }
        }
        Some(_) => {
            if end_value <= 0.0 || d < 0.0 {
                SignRegime::Negative
            } else if d == 0.0 {
                SignRegime::Zero
            } else {
                SignRegime::Positive
            }
        }
    }
}

/// Characteristic equation of a nonzero principal eigenvalue in the root
/// variable `s = √|σ₁|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicEquation {
    pub case: CaseTag,
    pub regime: SignRegime,
    pub length: f64,
    pub left: BoundaryOperator,
    pub right: BoundaryOperator,
    /// Interval of `s` containing exactly one crossing of [`Self::phase_defect`].
    pub bracket: (f64, f64),
}

impl CharacteristicEquation {
    fn sigma(&self, s: f64) -> f64 {
        match self.regime {
            SignRegime::Negative => -s * s,
            _ => s * s,
        }
    }

    /// Right-boundary defect `ψ'(L) + β_L ψ(L)` (or `ψ(L)` for Dirichlet)
    /// of the left solution with `ψ(0) = s` (Robin) or `ψ'(0) = s`
    /// (Dirichlet). This is the tan/tanh relation multiplied through by its
    /// denominators, e.g. `β₀ sin(sL) + s cos(sL)` for Robin–Dirichlet,
    /// `(s² + β₀β_L) sinh(sL) + s(β₀ + β_L) cosh(sL)` for Robin–Robin in
    /// the negative regime. Hyperbolic forms are divided by `cosh(sL)`.
    pub fn mismatch(&self, s: f64) -> f64 {
        let (a0, b0) = left_data(&self.left);
        let (a, b) = (a0 * s, b0);
        let l = self.length;
        let (value, slope) = match self.regime {
            SignRegime::Negative => {
                let t = (s * l).tanh();
                (a + b * t, s * (a * t) + b * s)
            }
            _ => {
                let (sn, cs) = (s * l).sin_cos();
                (a * cs + b * sn, -a * s * sn + b * s * cs)
            }
        };
        match self.right.beta() {
            None => value,
            Some(br) => slope + br * value,
        }
    }

    /// `θ(L; σ) − θ*` for the Prüfer angle `θ = atan2(ψ, ψ')` of the left
    /// solution, with `θ* ∈ (0, π]` the angle imposed by the right
    /// condition. Increasing in `σ`; zero exactly at the principal root.
    pub fn phase_defect(&self, s: f64) -> f64 {
        prufer_defect(self.length, &self.left, &self.right, self.sigma(s))
    }
}

/// `θ(L; σ) − θ*` evaluated in closed form.
fn prufer_defect(length: f64, left: &BoundaryOperator, right: &BoundaryOperator, sigma: f64) -> f64 {
    let (a, b) = left_data(left);
    let l = length;
    let theta = if sigma > 0.0 {
        // ψ = ρ sin(sx + φ), ψ' = ρs cos(sx + φ); taking the branch from the
        // phase itself keeps θ continuous across zeros of ψ(L)
        let s = sigma.sqrt();
        let phase = s * l + a.atan2(b / s);
        let k = (phase / PI).floor();
        let rem = phase - k * PI;
        k * PI + rem.sin().atan2(s * rem.cos())
    } else {
        // at most one interior zero, present exactly when ψ(L) < 0
        let (value, slope) = if sigma == 0.0 {
            (a + b * l, b)
        } else {
            let s = (-sigma).sqrt();
            let t = (s * l).tanh();
            (a + b / s * t, a * s * t + b)
        };
        if value == 0.0 {
            PI
        } else if value < 0.0 {
            value.atan2(slope) + 2.0 * PI
        } else {
            value.atan2(slope)
        }
    };
    let target = match right.beta() {
        None => PI,
        Some(br) => 1f64.atan2(-br),
    };
    theta - target
}

/// Characteristic equation and bracket for a nonzero regime.
pub fn characteristic(problem: &Problem1D, regime: SignRegime) -> Result<CharacteristicEquation> {
    let problem = problem.validate()?;
    let l = problem.length;
    let mut eq = CharacteristicEquation {
        case: CaseTag::of(&problem),
        regime,
        length: l,
        left: problem.left.normalized(),
        right: problem.right.normalized(),
        bracket: (0.0, 0.0),
    };
    eq.bracket = match regime {
        SignRegime::Zero => return Err(SpectraError::UnsupportedRegime),
        // σ₁ never exceeds the Dirichlet–Dirichlet value (π/L)²
        SignRegime::Positive => (0.0, PI / l),
        SignRegime::Negative => {
            let betas = [problem.left.beta(), problem.right.beta()];
            let mut hi = betas.iter().flatten().fold(1.0 / l, |m, b| m.max(b.abs())) * 2.0;
            let mut tries = 0;
            while eq.phase_defect(hi) >= 0.0 {
                hi *= 2.0;
                tries += 1;
                if tries > 200 || !hi.is_finite() {
                    return Err(SpectraError::NoSignChange { lo: 0.0, hi });
                }
            }
            (0.0, hi)
        }
    };
    Ok(eq)
}

/// Solve the characteristic equation for its principal root `s*`.
pub fn solve_characteristic(eq: &CharacteristicEquation, tol: &TolerancePolicy) -> Result<f64> {
    let (lo, hi) = eq.bracket;
    first_root(|s| eq.phase_defect(s), lo, hi, tol)
}

fn closed_form(problem: &Problem1D) -> Option<(f64, Eigenfunction)> {
    use BoundaryKind::*;
    let l = problem.length;
    let trig = |s: f64, phase: f64| {
        let x_max = (phase / s).clamp(0.0, l);
        let scale = (s * x_max - phase).cos();
        Eigenfunction::Trig { s, phase, length: l, scale }
    };
    match (problem.left.kind(), problem.right.kind()) {
        (Dirichlet, Dirichlet) => Some(((PI / l).powi(2), trig(PI / l, FRAC_PI_2))),
        (Dirichlet, Neumann) => Some(((PI / (2.0 * l)).powi(2), trig(PI / (2.0 * l), FRAC_PI_2))),
        (Neumann, Dirichlet) => Some(((PI / (2.0 * l)).powi(2), trig(PI / (2.0 * l), 0.0))),
        (Neumann, Neumann) => Some((0.0, Eigenfunction::Affine { slope: 0.0, intercept: 1.0, length: l, scale: 1.0 })),
        _ => None,
    }
}

/// Max-normalized left solution for `σ = ±s²` (or `σ = 0` when `s = 0`).
fn left_solution(problem: &Problem1D, regime: SignRegime, s: f64) -> Eigenfunction {
    let (a, b) = left_data(&problem.left);
    let l = problem.length;
    match regime {
        SignRegime::Zero => {
            let scale = a.max(a + b * l);
            Eigenfunction::Affine { slope: b, intercept: a, length: l, scale }
        }
        SignRegime::Positive => {
            // a cos(sx) + (b/s) sin(sx) = ρ cos(sx − φ)
            let phase = (b / s).atan2(a);
            let x_max = (phase / s).clamp(0.0, l);
            let scale = (s * x_max - phase).cos();
            Eigenfunction::Trig { s, phase, length: l, scale }
        }
        SignRegime::Negative => {
            // ψ = A e^{s(x−L)} + B e^{−sx}. Each boundary condition is one
            // linear row in (A, B); the row with the larger norm is the one
            // least disturbed by the rounding in s, and fixes (A, B)
            let e = (-s * l).exp();
            let left_row = match problem.left.beta() {
                None => [e, 1.0],
                Some(b0) => [e * (b0 - s), b0 + s],
            };
            let right_row = match problem.right.beta() {
                None => [1.0, e],
                Some(bl) => [s + bl, e * (bl - s)],
            };
            let norm = |r: [f64; 2]| r[0].hypot(r[1]);
            let [p, q] = if norm(left_row) >= norm(right_row) { left_row } else { right_row };
            let (mut ca, mut cb) = (q, -p);
            // ψ(0) + ψ(L) > 0 for the positive eigenfunction
            if ca * e + cb + ca + cb * e < 0.0 {
                (ca, cb) = (-ca, -cb);
            }
            let unit = Eigenfunction::Hyperbolic { s, a: ca, b: cb, length: l, scale: 1.0 };
            // monotone or convex: the max is at an end
            let scale = unit.raw_at(0.0).max(unit.raw_at(l));
            Eigenfunction::Hyperbolic { s, a: ca, b: cb, length: l, scale }
        }
    }
}

impl Eigenfunction {
    fn raw_at(&self, x: f64) -> f64 {
        self.derivatives(x).map_or(f64::NAN, |d| d.0)
    }
}

/// Principal eigenvalue of the interval problem.
pub fn principal_eigenvalue_1d(problem: &Problem1D, tol: &TolerancePolicy) -> Result<EigenEstimate> {
    let problem = problem.validate()?;
    if problem.radial_dimension != 1 {
        return Err(SpectraError::Unsupported("exact1d solves the interval problem (N = 1) only"));
    }
    let tol = tol.validate()?;
    let l = problem.length;

    if let Some((value, f)) = closed_form(&problem) {
        return EigenEstimate::new(value, 0.0, Method::ClosedForm, f);
    }

    // β_L = −β₀: ψ = e^{β₀x} and σ₁ = −β₀² for every L
    if let (Some(b0), Some(bl)) = (problem.left.beta(), problem.right.beta()) {
        if bl == -b0 {
            let s = b0.abs();
            let f = left_solution(&problem, SignRegime::Negative, s);
            return EigenEstimate::new(-b0 * b0, 0.0, Method::ClosedForm, f);
        }
    }

    let mut regime = decide_sign(&problem);
    if regime != SignRegime::Zero && zero_condition_residual(&problem) < ZERO_GUARD {
        let (a, b) = left_data(&problem.left);
        if a + b * l > 0.0 {
            regime = SignRegime::Zero;
        }
    }
    if regime == SignRegime::Zero {
        let f = left_solution(&problem, SignRegime::Zero, 0.0);
        return EigenEstimate::new(0.0, 0.0, Method::ClosedForm, f);
    }

    let eq = characteristic(&problem, regime)?;
    let s = solve_characteristic(&eq, &tol)?;
    let delta = tol.root_abs_tol;
    let residual = 2.0 * s * delta + delta * delta;
    let value = eq.sigma(s);
    let f = left_solution(&problem, regime, s);
    EigenEstimate::new(value, residual, Method::TranscendentalRoot, f)
}

/// Evaluate the principal eigenfunction carried by an estimate at `x`.
pub fn eigenfunction_1d(estimate: &EigenEstimate, x: f64) -> Result<f64> {
    estimate.eigenfunction.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoundaryOperator::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn sigma(l: f64, left: BoundaryOperator, right: BoundaryOperator) -> f64 {
        principal_eigenvalue_1d(&Problem1D::interval(l, left, right), &tol()).unwrap().value
    }

    #[test]
    fn localized_negative_eigenfunction_stays_positive() {
        // ψ decays by e^{−sL} ≈ 2e−8 across the interval
        let p = Problem1D::interval(4.953995687658884, Robin(-3.5641073249455113), Robin(3.793122882156534));
        let est = principal_eigenvalue_1d(&p, &tol()).unwrap();
        let samples = est.eigenfunction.samples(65);
        assert!(samples.iter().all(|s| s.1 > 0.0));
        let (v, d, _) = est.eigenfunction.derivatives(p.length).unwrap();
        assert!((d + 3.793122882156534 * v).abs() < 1e-6 * v, "{d} {v}");
    }

    #[test]
    fn neumann_robin_root_not_the_pole() {
        // the first bisection midpoint lands exactly on sL = π/2
        for (l, b) in [(2.5783795172194544, 0.182877684512865), (1.3826709720811101, 1.9386057533048815)] {
            let s = sigma(l, Neumann, Robin(b)).sqrt();
            assert!((s * (s * l).tan() - b).abs() < 1e-9, "L={l}, β={b}: s={s}");
            assert!((sigma(l, Neumann, Robin(b)) - sigma(l, Robin(b), Neumann)).abs() < 1e-12);
        }
    }

    /// Plain bisection on an explicit function, used as an oracle.
    fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let ga = g(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if g(m).signum() == ga.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn decide_sign_examples() {
        let p = |l, a, b| Problem1D::interval(l, a, b);
        assert_eq!(decide_sign(&p(0.5, Robin(2.0), Robin(-1.0))), SignRegime::Zero);
        assert_eq!(decide_sign(&p(1.0, Neumann, Neumann)), SignRegime::Zero);
        assert_eq!(decide_sign(&p(1.0, Robin(1.0), Neumann)), SignRegime::Positive);
        assert_eq!(decide_sign(&p(1.0, Robin(-1.0), Neumann)), SignRegime::Negative);
        assert_eq!(decide_sign(&p(2.0, Robin(-0.5), Dirichlet)), SignRegime::Zero);
        assert_eq!(decide_sign(&p(2.0, Dirichlet, Robin(-0.5))), SignRegime::Zero);
        assert_eq!(decide_sign(&p(1.0, Dirichlet, Dirichlet)), SignRegime::Positive);
        // σ = 0 is an eigenvalue here but its eigenfunction changes sign
        assert_eq!(decide_sign(&p(2.0, Robin(-1.0), Robin(-1.0))), SignRegime::Negative);
    }

    #[test]
    fn characteristic_robin_dirichlet() {
        let p = Problem1D::interval(1.0, Robin(1.0), Dirichlet);
        let eq = characteristic(&p, SignRegime::Positive).unwrap();
        assert_eq!(eq.case, CaseTag::RobinDirichlet);
        let oracle = bisect(|s| s.tan() + s, FRAC_PI_2 + 1e-9, PI);
        let s = solve_characteristic(&eq, &tol()).unwrap();
        assert!((s - oracle).abs() < 1e-11, "{s} vs {oracle}");
        assert!(s > FRAC_PI_2 && s < PI);
        // the pole-free mismatch changes sign at the same root
        assert!(eq.mismatch(s - 1e-6).signum() != eq.mismatch(s + 1e-6).signum());
    }

    #[test]
    fn characteristic_robin_neumann() {
        let p = Problem1D::interval(1.0, Robin(1.0), Neumann);
        let eq = characteristic(&p, SignRegime::Positive).unwrap();
        assert_eq!(eq.case, CaseTag::RobinNeumann);
        let s = solve_characteristic(&eq, &tol()).unwrap();
        let oracle = bisect(|s| s * s.tan() - 1.0, 1e-9, FRAC_PI_2 - 1e-9);
        assert!((s - oracle).abs() < 1e-11);
        assert!(s < FRAC_PI_2);
    }

    #[test]
    fn characteristic_robin_robin_negative() {
        let p = Problem1D::interval(1.0, Robin(-2.0), Robin(1.0));
        assert_eq!(decide_sign(&p), SignRegime::Negative);
        let eq = characteristic(&p, SignRegime::Negative).unwrap();
        let s = solve_characteristic(&eq, &tol()).unwrap();
        let s0 = 2f64.sqrt();
        assert!(s > s0);
        let g = |s: f64| s.tanh() * (s * s - 2.0) - s;
        let oracle = bisect(g, s0 + 1e-12, 50.0);
        assert!((s - oracle).abs() < 1e-10, "{s} vs {oracle}");
        assert!(g(s).abs() < 1e-9);
    }

    #[test]
    fn zero_regime_has_no_characteristic() {
        let p = Problem1D::interval(1.0, Neumann, Neumann);
        assert_eq!(characteristic(&p, SignRegime::Zero), Err(SpectraError::UnsupportedRegime));
    }

    #[test]
    fn eigenvalue_examples() {
        assert!((sigma(1.0, Dirichlet, Dirichlet) - 9.869604401).abs() < 1e-9);
        assert!((sigma(1.0, Dirichlet, Neumann) - 2.467401100).abs() < 1e-9);
        assert_eq!(sigma(7.3, Robin(3.0), Robin(-3.0)), -9.0);
        let s_rd = bisect(|s| s.tan() + s, FRAC_PI_2 + 1e-9, PI);
        assert!((sigma(1.0, Robin(1.0), Dirichlet) - s_rd * s_rd).abs() < 1e-10);
        assert!((sigma(1.0, Robin(1.0), Dirichlet) - 4.115858365).abs() < 1e-8);
        let s_rn = bisect(|s| s * s.tanh() - 1.0, 0.0, 5.0);
        assert!((sigma(1.0, Robin(-1.0), Neumann) + s_rn * s_rn).abs() < 1e-10);
        assert!((sigma(1.0, Robin(-1.0), Neumann) + 1.4392288399).abs() < 1e-9);
    }

    #[test]
    fn eigenfunction_examples() {
        let est = principal_eigenvalue_1d(&Problem1D::interval(1.0, Neumann, Robin(1.0)), &tol()).unwrap();
        assert!((eigenfunction_1d(&est, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(eigenfunction_1d(&est, 1.0).unwrap() < 1.0);

        let est = principal_eigenvalue_1d(&Problem1D::interval(1.0, Dirichlet, Dirichlet), &tol()).unwrap();
        assert!((eigenfunction_1d(&est, 0.5).unwrap() - 1.0).abs() < 1e-14);

        let est = principal_eigenvalue_1d(&Problem1D::interval(0.5, Robin(2.0), Robin(-1.0)), &tol()).unwrap();
        assert_eq!(est.value, 0.0);
        for x in [0.0, 0.1, 0.25, 0.5] {
            let v = eigenfunction_1d(&est, x).unwrap();
            assert!((v - (2.0 * x + 1.0) / 2.0).abs() < 1e-14);
        }
        assert!(matches!(eigenfunction_1d(&est, 0.6), Err(SpectraError::OutOfDomain(_))));
    }

    #[test]
    fn radial_input_rejected() {
        let p = Problem1D::radial(3, 1.0, Robin(1.0));
        assert!(principal_eigenvalue_1d(&p, &tol()).is_err());
    }

    #[test]
    fn opposite_coefficients_are_length_independent() {
        for l in [1e-3, 0.7, 1.0, 1e3] {
            assert_eq!(sigma(l, Robin(-2.0), Robin(2.0)), -4.0);
            assert_eq!(sigma(l, Robin(0.5), Robin(-0.5)), -0.25);
        }
    }

    #[test]
    fn residual_of_closed_forms() {
        let cases = [
            (1.0, Robin(1.0), Dirichlet),
            (2.0, Robin(-1.0), Robin(0.3)),
            (0.3, Robin(4.0), Robin(-2.0)),
            (5.0, Dirichlet, Robin(-0.2)),
            (1.5, Robin(-3.0), Robin(-3.0)),
        ];
        for (l, a, b) in cases {
            let p = Problem1D::interval(l, a, b);
            let est = principal_eigenvalue_1d(&p, &tol()).unwrap();
            let f = &est.eigenfunction;
            for i in 1..50 {
                let x = l * i as f64 / 50.0;
                let (v, _, d2) = f.derivatives(x).unwrap();
                assert!((d2 + est.value * v).abs() < 1e-8);
                assert!(v > 0.0);
            }
            let (v0, d0, _) = f.derivatives(0.0).unwrap();
            let (vl, dl, _) = f.derivatives(l).unwrap();
            match a.beta() {
                None => assert!(v0.abs() < 1e-8),
                Some(b0) => assert!((-d0 + b0 * v0).abs() < 1e-8),
            }
            match b.beta() {
                None => assert!(vl.abs() < 1e-8),
                Some(bl) => assert!((dl + bl * vl).abs() < 1e-8),
            }
        }
    }
}
