//! Randomized invariants.

mod common;

use proptest::prelude::*;
use vspinn::autodiff::Jet2;
use vspinn::godunov::{godunov_flux, interface_fluxes, step};
use vspinn::metrics::relative_l2_values;
use vspinn::pde::{Flux, GreenshieldsFlux};
use vspinn::stacked::StackedPinn;

fn jet() -> impl Strategy<Value = Jet2> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(v, t, x, xx)| Jet2::new(v, t, x, xx))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn jet_product_distributes_over_addition(a in jet(), b in jet(), c in jet()) {
        let lhs = a * (b + c);
        let rhs = a * b + a * c;
        for (l, r) in lhs.slots().iter().zip(rhs.slots()) {
            prop_assert!(close(*l, r));
        }
    }

    #[test]
    fn jet_product_commutes(a in jet(), b in jet()) {
        let (ab, ba) = (a * b, b * a);
        prop_assert_eq!(ab.value, ba.value);
        for (l, r) in ab.slots().iter().zip(ba.slots()) {
            prop_assert!(close(*l, r));
        }
    }

    #[test]
    fn godunov_flux_is_consistent_and_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64, h in 0.0..0.1f64) {
        let f = GreenshieldsFlux::new(1.0).unwrap();
        let g = |l: f64, r: f64| godunov_flux(l, r, &f).unwrap();
        prop_assert_eq!(g(a, a), f.flux(a));
        // Non-decreasing in the left state, non-increasing in the right one.
        prop_assert!(g((a + h).min(1.0), b) >= g(a, b) - 1e-15);
        prop_assert!(g(a, (b + h).min(1.0)) <= g(a, b) + 1e-15);
    }

    #[test]
    fn one_step_conserves_mass(cells in prop::collection::vec(0.0..1.0f64, 3..60), lg in 0.0..1.0f64, rg in 0.0..1.0f64) {
        let f = GreenshieldsFlux::new(1.0).unwrap();
        let ratio = 0.45;
        let next = step(&cells, lg, rg, ratio, &f);
        let fluxes = interface_fluxes(&cells, lg, rg, &f);
        let change: f64 = next.iter().sum::<f64>() - cells.iter().sum::<f64>();
        let boundary = ratio * (fluxes[0] - fluxes[fluxes.len() - 1]);
        prop_assert!((change - boundary).abs() < 1e-12);
        let lo = cells.iter().copied().fold(lg.min(rg), f64::min);
        let hi = cells.iter().copied().fold(lg.max(rg), f64::max);
        prop_assert!(next.iter().all(|&v| v >= lo - 1e-15 && v <= hi + 1e-15));
    }

    #[test]
    fn relative_l2_is_scale_invariant(
        pairs in prop::collection::vec((0.1..1.0f64, 0.0..1.0f64), 1..50),
        scale in 0.01..100.0f64,
    ) {
        let truth: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let base = relative_l2_values(&truth, &pred).unwrap();
        let scaled = relative_l2_values(
            &truth.iter().map(|v| v * scale).collect::<Vec<_>>(),
            &pred.iter().map(|v| v * scale).collect::<Vec<_>>(),
        ).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-12 * base.max(1.0));
        prop_assert_eq!(relative_l2_values(&truth, &truth).unwrap(), 0.0);
    }

    #[test]
    fn checkpoint_json_round_trips_bit_for_bit(n in 0usize..3, seed in any::<u64>()) {
        let model = common::random_model(&[2, 4, 1], &[3, 4, 1], n, seed);
        let text = serde_json::to_string(&model.to_checkpoint()).unwrap();
        let back = StackedPinn::from_checkpoint(&serde_json::from_str(&text).unwrap()).unwrap();
        let bits = |m: &StackedPinn| m.flatten().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&model));
    }
}
