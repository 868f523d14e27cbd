use decaykit::charfn::{
    defects, langer_split, random_contraction, random_with_unitary_part, CharacteristicFunction, MatrixContraction,
};
use decaykit::inner::{DeltaOptions, MinModulusOptions};
use decaykit::measures::Arc;
use decaykit::modelspace::{sarason_norm, Symbol};
use decaykit::{InnerFunction, SingularMeasure};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type CMat = DMatrix<Complex64>;

fn disk_point(max_r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max_r, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..std::f64::consts::TAU, 0.05..2.0f64), 1..4)
}

fn inner_fn() -> impl Strategy<Value = InnerFunction> {
    (prop::collection::vec(disk_point(0.95), 0..4), prop::option::of(atoms())).prop_map(|(zeros, at)| {
        let blaschke = if zeros.is_empty() { vec![Complex64::new(0.5, 0.0)] } else { zeros };
        let f = InnerFunction::blaschke(&blaschke).unwrap();
        match at {
            Some(a) => InnerFunction::new(
                f.zeros().to_vec(),
                Some(SingularMeasure::atomic(a).unwrap()),
                Complex64::new(1.0, 0.0),
            )
            .unwrap(),
            None => f,
        }
    })
}

fn norm2(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_functions_map_disk_into_disk(f in inner_fn(), z in disk_point(0.999)) {
        prop_assert!(f.evaluate(z).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn min_modulus_is_attained_and_minimal(f in inner_fn(), r in 0.05..0.95f64, t in 0.0..std::f64::consts::TAU) {
        let m = f.min_modulus(r, &MinModulusOptions::default()).unwrap();
        let at = f.evaluate(Complex64::from_polar(r, m.angle)).unwrap().norm();
        prop_assert!((at - m.value).abs() <= 1e-12 + 1e-9 * m.value);
        prop_assert!(m.value <= f.evaluate(Complex64::from_polar(r, t)).unwrap().norm() + 1e-14);
    }

    #[test]
    fn singular_min_modulus_decreases_with_radius(a in atoms(), r in 0.05..0.9f64, dr in 0.01..0.09f64) {
        let f = InnerFunction::singular(SingularMeasure::atomic(a).unwrap());
        let opts = MinModulusOptions::default();
        let inner = f.min_modulus(r, &opts).unwrap().neg_log;
        let outer = f.min_modulus(r + dr, &opts).unwrap().neg_log;
        prop_assert!(outer >= inner - 1e-12 * inner.max(1.0));
    }

    #[test]
    fn arc_mass_bounds_are_ordered(a in atoms(), center in 0.0..6.0f64, len in 0.001..0.99f64, ratio in 0.1..0.45f64) {
        let arc = Arc::new(center, len).unwrap();
        for nu in [SingularMeasure::atomic(a.clone()).unwrap(), SingularMeasure::cantor(1.0, ratio).unwrap()] {
            let m = nu.mass(&arc);
            prop_assert!(m.lower() >= -1e-15);
            prop_assert!(m.lower() <= m.upper() + 1e-15);
            prop_assert!(m.upper() <= nu.total_mass() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn random_contractions_are_contractions(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_contraction(&mut rng, d, 0.2, 0.95);
        prop_assert!(t.norm() <= 0.95 + 1e-12);
        let back = MatrixContraction::from_csv(&t.to_csv()).unwrap();
        prop_assert_eq!(back.matrix(), t.matrix());
    }

    /// `I − Θ(λ)*Θ(λ) = (1 − |λ|²) D_T (I − λ̄T)⁻¹ (I − λT*)⁻¹ D_T`, read in the
    /// defect basis.
    #[test]
    fn characteristic_function_transfer_identity(seed in any::<u64>(), d in 1usize..5, lam in disk_point(0.98)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_contraction(&mut rng, d, 0.2, 0.95);
        let cf = CharacteristicFunction::new(t.clone()).unwrap();
        let th = cf.theta_eval(lam).unwrap();
        let m = t.matrix();
        let id = CMat::identity(d, d);
        let dd = defects(&t).unwrap();
        let a = (&id - m.scale(1.0) * lam.conj()).try_inverse().unwrap();
        let b = (&id - m.adjoint() * lam).try_inverse().unwrap();
        let rhs = (&dd.d_t * a * b * &dd.d_t) * Complex64::new(1.0 - lam.norm_sqr(), 0.0);
        let rhs = dd.basis_t.adjoint() * rhs * &dd.basis_t;
        let k = th.ncols();
        let lhs = CMat::identity(k, k) - th.adjoint() * &th;
        prop_assert!((lhs - rhs).norm() < 1e-9);
        prop_assert!(norm2(&th) <= 1.0 + 1e-12);
    }

    #[test]
    fn langer_split_recovers_unitary_dimension(seed in any::<u64>(), k in 0usize..3, c in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_with_unitary_part(&mut rng, k, c, 0.3, 0.9);
        let split = langer_split(&t);
        prop_assert_eq!(split.unitary.ncols(), k);
        prop_assert!(split.residuals(&t).unwrap().holds());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn delta_is_nonincreasing(a in atoms()) {
        let f = InnerFunction::singular(SingularMeasure::atomic(a).unwrap());
        let opts = DeltaOptions::default();
        let mut last = 1.0;
        for n in 1..=8 {
            let d = f.delta_n(n, &opts).unwrap().delta_n;
            prop_assert!(d > 0.0 && d <= last + 1e-13);
            last = d;
        }
    }

    #[test]
    fn functional_calculus_is_bounded_by_sup_norm(f in inner_fn(), p in prop::collection::vec(disk_point(1.0), 1..5)) {
        let symbol = Symbol::Polynomial(p);
        let s = sarason_norm(&f, &symbol, 32).unwrap();
        prop_assert!(s.norm <= symbol.sup_bound() + 1e-8);
    }

    /// Taylor data of degree 4K resolves θ(S_θ) = 0 only when the coefficients
    /// decay fast, so zeros stay inside |z| ≤ 0.8.
    #[test]
    fn theta_annihilates_its_model_space(zeros in prop::collection::vec(disk_point(0.8), 1..4)) {
        let f = InnerFunction::blaschke(&zeros).unwrap();
        let own = sarason_norm(&f, &Symbol::Inner(f.clone()), 32).unwrap();
        prop_assert!(own.norm < 1e-8);
    }
}
