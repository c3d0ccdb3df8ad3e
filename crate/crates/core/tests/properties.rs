use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qh_core::Error;
use qh_core::geometry::{eguchi_hanson_reference, to_gh_coordinates};
use qh_core::nahm::{elliptic_invariants, euler_flow, EguchiHansonFlow, EulerFlowState};
use qh_core::numerics::FdScheme;
use qh_core::quadric::{eval_v, eval_vhat, euler_operator, sample, solve_quadric_h, HProfile, QuadricFamily};
use qh_core::twistor::{auto_contour, default_split_contours, penrose_transform, splitting, Kernel};

fn point3() -> impl Strategy<Value = [f64; 3]> {
    (0.4f64..3.0, 0.15f64..(PI - 0.15), 0.0f64..(2.0 * PI))
        .prop_map(|(r, t, p)| [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()])
}

#[test]
fn splitting_on_the_equatorial_plane_is_reported() {
    let x = [0.6, -0.8, 0.0];
    assert!(matches!(default_split_contours(&Kernel::NegLogMu, &x), Err(Error::Contour(_))));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn v_is_constant_on_each_quadric(h in 2.3f64..6.0, u in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(norm > 0.2);
        let u: Vec<f64> = u.iter().map(|v| v / norm).collect();
        let fam = QuadricFamily::new(vec![2.0, 1.0, 0.5, 0.0], 1.0).unwrap();
        let prof = HProfile::for_family(&fam).with_tolerance(1e-12);
        let x = fam.quadric_point(h, &u).unwrap();
        let smp = sample(&x, &fam, &prof).unwrap();
        prop_assert!((smp.h - h).abs() < 1e-9 * h);
        prop_assert!((smp.v - prof.v_of_h(h).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn scaling_identity(x in point3(), c in 0.5f64..2.0) {
        let fam = QuadricFamily::new(vec![1.5, 0.7, 0.0], c).unwrap();
        // ∇V jumps across the focal disc; keep the FD stencil off it
        prop_assume!(solve_quadric_h(&x, &fam).unwrap() - fam.max_beta() > 0.02);
        let prof = HProfile::for_family(&fam).with_tolerance(1e-13);
        let scheme = FdScheme::new(1e-3, 4, true).unwrap();
        let ups = euler_operator(|q: &[f64]| eval_v(q, &fam, &prof), &x, &scheme).unwrap();
        let vhat = eval_vhat(&x, &fam).unwrap();
        prop_assert!((ups + 2.0 * c * vhat).abs() < 1e-6, "{} vs {}", ups, vhat);
    }

    #[test]
    fn inverse_mu_transform_is_the_coulomb_potential(x in point3()) {
        let k = Kernel::InvMu;
        let tc = auto_contour(&k, &x).unwrap();
        let v = penrose_transform(&k, &x, &tc).unwrap();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((v * r + Complex64::new(0.0, PI)).norm() < 1e-8);
    }

    #[test]
    fn projected_splitting_is_constant(x in point3(), arg in 0.0f64..(2.0 * PI)) {
        // on x₃ = 0 both roots of μ sit on |λ| = 1 and no annulus separates them
        prop_assume!(x[2].abs() > 0.02);
        let k = Kernel::NegLogMu;
        let (outer, inner) = default_split_contours(&k, &x).unwrap();
        let base = splitting(&k, &x, Complex64::new(1.0, 0.0), (&outer, &inner)).unwrap();
        let sp = splitting(&k, &x, Complex64::from_polar(1.0, arg), (&outer, &inner)).unwrap();
        prop_assert!(sp.difference_residual < 1e-8);
        prop_assert!((sp.pi_h0 - base.pi_h0).norm() < 1e-8);
        prop_assert!((sp.pi_h1 - base.pi_h1).norm() < 1e-8);
    }

    #[test]
    fn killing_norm_inverts_vhat(rho in 1.3f64..4.0, t in 0.2f64..2.9, p in -3.0f64..3.0, q in 0.0f64..6.0) {
        let eh = EguchiHansonFlow::from_rho(1.0, 2.0).unwrap();
        let s = eh.s_of_rho(rho).unwrap();
        let pt = to_gh_coordinates(&eh, [t, p, q], s).unwrap();
        let fam = QuadricFamily::eguchi_hanson(1.0).unwrap();
        let vhat = eval_vhat(&pt.x, &fam).unwrap();
        prop_assert!((pt.kk * -vhat - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pipeline_matches_two_centre_closed_form(x in point3(), a in 0.3f64..2.0) {
        let r = match eguchi_hanson_reference(&x, a) {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        let fam = QuadricFamily::eguchi_hanson(a).unwrap();
        let prof = HProfile::for_family(&fam).with_tolerance(1e-13);
        let v = eval_v(&x, &fam, &prof).unwrap();
        prop_assert!(((v - r.v) / r.v).abs() < 1e-8);
    }

    #[test]
    fn euler_flow_keeps_a_and_b(w in proptest::array::uniform3(0.3f64..2.0)) {
        let tr = euler_flow(w, (0.0, 0.05), 1e-12).unwrap();
        let e0 = elliptic_invariants(&EulerFlowState { w, s: 0.0 });
        let y = tr.last();
        let e1 = elliptic_invariants(&EulerFlowState { w: [y[0], y[1], y[2]], s: 0.05 });
        prop_assert!((e1.a - e0.a).abs() < 1e-9 * (1.0 + e0.a.abs()));
        prop_assert!((e1.b - e0.b).abs() < 1e-9 * (1.0 + e0.b.abs()));
    }
}
