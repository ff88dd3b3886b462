use proptest::prelude::*;

use eqweyl_core::geometry::{hamiltonian_p, BUILTIN_MODELS};
use eqweyl_core::modespec::exact_spectrum_between;
use eqweyl_core::peterweyl::growth_rate_estimate;
use eqweyl_core::{
    assemble_mode_operator, builtin_model, family_at, mollified_window, weyl_lhs_single, Character,
    CharacterFamily, ExactSource, ModeGrid, Observable, PhasePoint, RadialObservable,
    SpectralWindow, TestFunction, WindowKind,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_law_families_grow_as_h_shrinks(theta in 0.0f64..0.5, h in 1e-6f64..1.0, f in 0.01f64..1.0) {
        let fam = CharacterFamily::PowerLaw(theta);
        let big = family_at(&fam, h);
        let small = family_at(&fam, h * f);
        prop_assert!(big.iter().all(|c| small.contains(c)));
        prop_assert!(big.contains(&Character::circle(0)));
    }

    #[test]
    fn power_law_growth_ratio_at_most_one(theta in 0.01f64..0.5, order in 0u32..=6, h in 1e-6f64..1.0) {
        let r = growth_rate_estimate(&CharacterFamily::PowerLaw(theta), order, &[h])[0];
        prop_assert!(r <= 1.0 + 1e-9, "r = {}", r);
    }

    #[test]
    fn windows_sandwich_the_indicator(
        c in -1.0f64..2.0,
        h in 1e-4f64..0.1,
        delta in 0.01f64..0.3,
        lambda in 0.35f64..1.0,
        t in -0.5f64..1.5,
    ) {
        prop_assume!(3.0 * h.powf(lambda) < 0.5);
        let inner = mollified_window(c, h, delta, lambda, WindowKind::Inner).unwrap();
        let outer = mollified_window(c, h, delta, lambda, WindowKind::Outer).unwrap();
        let width = h.powf(delta);
        let x = c + t * width;
        let ind = if (c..=c + width).contains(&x) { 1.0 } else { 0.0 };
        prop_assert!(inner.eval(x) <= ind);
        prop_assert!(ind <= outer.eval(x));
        // shoulder bands
        let gap = TestFunction::shoulder_gap(&outer, &inner);
        let band = 3.0 * h.powf(lambda) * width;
        let near = (x - c).abs() <= band || (x - c - width).abs() <= band;
        if !near {
            prop_assert_eq!(gap.eval(x), 0.0);
        }
    }

    #[test]
    fn hamiltonian_ignores_the_angle(s in 0.05f64..3.0, sigma in -2.0f64..2.0, p in -2.0f64..2.0, phi in 0.0f64..std::f64::consts::TAU) {
        for name in BUILTIN_MODELS {
            let model = builtin_model(name).unwrap();
            let a = hamiltonian_p(&model, &PhasePoint::new(s, 0.0, sigma, p));
            let b = hamiltonian_p(&model, &PhasePoint::new(s, phi, sigma, p));
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn character_sign_does_not_change_the_operator(k in 0i64..20, h in 0.01f64..1.0) {
        let model = builtin_model("spheroid").unwrap();
        let grid = ModeGrid::new(&model, 64).unwrap();
        let plus = assemble_mode_operator(&model, k, h, &grid).unwrap();
        let minus = assemble_mode_operator(&model, -k, h, &grid).unwrap();
        prop_assert_eq!(plus.matrix, minus.matrix);
    }

    #[test]
    fn narrower_windows_hold_fewer_eigenvalues(h in 1e-3f64..0.1, d1 in 0.01f64..0.3, d2 in 0.01f64..0.3, k in -5i64..=5) {
        let model = builtin_model("sphere").unwrap();
        let (lo_d, hi_d) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let count = |d: f64| {
            let w = SpectralWindow::new(1.0, d, false).unwrap();
            let (lo, hi) = w.interval(h);
            exact_spectrum_between(&model, k, h, lo, hi).unwrap().len()
        };
        prop_assert!(count(hi_d) <= count(lo_d));
    }

    #[test]
    fn window_sums_scale_with_the_observable(alpha in -3.0f64..3.0, h in 0.005f64..0.05) {
        let model = builtin_model("sphere").unwrap();
        let src = ExactSource::new(&model, h).unwrap();
        let window = SpectralWindow::new(1.0, 0.1, true).unwrap();
        let chi = Character::circle(1);
        let base = Observable::multiplication(RadialObservable::CosSquared);
        let scaled = Observable::multiplication(RadialObservable::CosSquared.scaled(alpha));
        let x = weyl_lhs_single(&src, &chi, &window, &base).unwrap();
        let y = weyl_lhs_single(&src, &chi, &window, &scaled).unwrap();
        prop_assert!((y - alpha * x).abs() <= 1e-12 * x.abs().max(1.0));
    }
}
