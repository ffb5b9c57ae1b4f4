use mars_core::vrem::{vrem_iterate, LineSearchParams, RestLengthRule, SpringSystem};

use proptest::prelude::*;

mod common;
use common::{patch, smooth_jitter};

fn jitter_strategy(scale: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-scale..scale, -scale..scale), 49)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gradient_matches_central_differences(
        n in 4usize..8,
        a in -0.5f64..0.5,
        b in -0.5f64..0.5,
        jit in jitter_strategy(0.3),
        rest in 0.05f64..0.4,
    ) {
        let m = patch(n, a, b, &jit);
        let sys = SpringSystem::with_rest_length(&m, rest);
        let g = sys.energy_gradient(&m).unwrap();
        let eps = 1e-6;
        let mut fd = Vec::with_capacity(g.len());
        for &v in &sys.free {
            for axis in 0..3 {
                let shifted = |s: f64| {
                    sys.energy_with(|w| {
                        let mut q = *m.position(w);
                        if w == v {
                            q[axis] += s;
                        }
                        q
                    })
                };
                fd.push((shifted(eps) - shifted(-eps)) / (2.0 * eps));
            }
        }
        let diff: f64 = g.iter().zip(&fd).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-6 * norm.max(1e-12), "diff {diff} norm {norm}");
    }

    #[test]
    fn energy_never_increases(
        n in 4usize..8,
        a in -0.4f64..0.4,
        b in -0.4f64..0.4,
        jit in jitter_strategy(0.35),
    ) {
        let mut m = patch(n, a, b, &jit);
        let tris: Vec<[usize; 3]> = m.triangle_ids().map(|t| m.triangle(t)).collect();
        let sys = SpringSystem::new(&m, RestLengthRule::InteriorEdges).unwrap();
        let hist = vrem_iterate(&mut m, &sys, &LineSearchParams::default(), 60).unwrap();
        let mut last = f64::INFINITY;
        for st in &hist {
            prop_assert!(st.energy <= st.energy_before);
            prop_assert!(st.energy_before <= last);
            prop_assert!(st.max_offset_ratio <= 0.4 + 1e-12, "offset ratio {}", st.max_offset_ratio);
            last = st.energy;
        }
        let after: Vec<[usize; 3]> = m.triangle_ids().map(|t| m.triangle(t)).collect();
        prop_assert_eq!(tris, after);
    }
}

#[test]
fn smooth_patch_gradient_vanishes() {
    let mut m = patch(7, 0.0, 0.0, &smooth_jitter());
    let sys = SpringSystem::new(&m, RestLengthRule::InteriorEdges).unwrap();
    let g0 = sys.energy_gradient(&m).unwrap().iter().map(|x| x * x).sum::<f64>().sqrt();
    vrem_iterate(&mut m, &sys, &LineSearchParams::default(), 500).unwrap();
    let g = sys.energy_gradient(&m).unwrap().iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(g < 1e-8 * g0, "gradient {g} from {g0}");
}
