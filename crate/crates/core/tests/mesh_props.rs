use mars_core::ema::{edge_collapse, edge_flip, edge_split, Keep};
use mars_core::io::{icosphere, obj_string, parse_obj};
use mars_core::mesh::{classify, validate};
use mars_core::{Point3, RegularityParams};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Op {
    Split(usize, usize),
    Collapse(usize),
    Flip(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (any::<usize>(), 2usize..4).prop_map(|(e, n)| Op::Split(e, n)),
        any::<usize>().prop_map(Op::Collapse),
        any::<usize>().prop_map(Op::Flip),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn elementary_operations_keep_a_valid_sphere(ops in prop::collection::vec(op(), 1..40)) {
        let mut m = icosphere(Point3::new(0.5, 0.5, 0.5), 0.2, 2);
        let params = RegularityParams::new(0.1, 0.2, 0.5).unwrap();
        for o in ops {
            let edges = m.edges();
            match o {
                Op::Split(e, n) => {
                    edge_split(&mut m, edges[e % edges.len()], n).unwrap();
                }
                Op::Collapse(e) => {
                    let _ = edge_collapse(&mut m, edges[e % edges.len()], Keep::Auto, None);
                }
                Op::Flip(t) => {
                    let tris: Vec<usize> = m.triangle_ids().collect();
                    edge_flip(&mut m, tris[t % tris.len()], &params);
                }
            }
            prop_assert!(validate(&m).is_empty());
            prop_assert_eq!(m.euler_characteristic(), 2);
            prop_assert!(classify(&m).boundary_edges.is_empty());
        }
    }

    #[test]
    fn obj_round_trip_is_exact(level in 0usize..3, r in 0.05f64..2.0, cx in -1.0f64..1.0) {
        let m = icosphere(Point3::new(cx, 0.3, -0.2), r, level);
        let back = parse_obj(&obj_string(&m)).unwrap();
        prop_assert_eq!(back.num_triangles(), m.num_triangles());
        for v in m.vertex_ids() {
            prop_assert_eq!(back.position(v), m.position(v));
        }
        for t in m.triangle_ids() {
            prop_assert_eq!(back.triangle(t), m.triangle(t));
        }
    }
}
