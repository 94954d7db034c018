use std::sync::Arc;

use num_complex::Complex64;

use scispec::oracle::{fd_schrodinger_1d, hermitian_eigenvalues, quad_element_oracle};
use scispec::schrodinger::{
    assemble_hnl, element_bound, gamma3, potential_element, BoxRegion, FourierBasis, Limits,
    PolynomialBump, SchrodingerProblem,
};
use scispec::setdist::{d_aw, dist_to, ClosedSet};

fn bump_problem(amplitude: f64) -> SchrodingerProblem {
    let bump = PolynomialBump::real(amplitude, 1.0, 1).unwrap();
    let m = bump.c1_norm();
    SchrodingerProblem::new(1, Arc::new(bump), BoxRegion::cube(1.0, 1), m).unwrap()
}

#[test]
fn lattice_elements_within_bound_up_to_level_three() {
    let prob = bump_problem(1.0);
    let limits = Limits::default();
    for n in 1..=3 {
        let basis = FourierBasis::new(n, 1, 4096).unwrap();
        for l in [16u64, 64] {
            let bound = element_bound(n, l, &prob);
            for k in 0..basis.len() {
                for m in 0..basis.len() {
                    let approx = potential_element(k, m, n, l, &prob, &limits).unwrap();
                    let exact = quad_element_oracle(&basis, k, m, &prob, 64).unwrap();
                    assert!(
                        (approx - exact.value).norm() <= bound,
                        "n = {n}, l = {l}, ({k}, {m})"
                    );
                }
            }
        }
    }
}

#[test]
fn level_one_l_eight_matches_quadrature() {
    let prob = bump_problem(1.0);
    let basis = FourierBasis::new(1, 1, 16).unwrap();
    let approx = potential_element(0, 0, 1, 8, &prob, &Limits::default()).unwrap();
    let exact = quad_element_oracle(&basis, 0, 0, &prob, 64).unwrap();
    assert!((approx - exact.value).norm() <= element_bound(1, 8, &prob));
}

#[test]
fn quadrature_refinement_converges() {
    let prob = bump_problem(1.0);
    let basis = FourierBasis::new(2, 1, 64).unwrap();
    for (k, m) in [(0, 0), (1, 3), (6, 2)] {
        let gaps: Vec<f64> = [4, 8, 16, 32]
            .iter()
            .map(|&r| {
                quad_element_oracle(&basis, k, m, &prob, r)
                    .unwrap()
                    .discrepancy
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "({k}, {m}): {gaps:?}");
    }
    let r64 = quad_element_oracle(&FourierBasis::new(1, 1, 4).unwrap(), 0, 0, &prob, 64).unwrap();
    assert!(r64.discrepancy < 1e-4);
}

#[test]
fn relaxed_well_stays_in_numerical_range_box() {
    let prob = bump_problem(-8.0);
    let limits = Limits::default();
    let n = 4;
    let set = gamma3(&prob, n, Some(200), &limits).unwrap();
    let eta = set.provenance.error_bound.unwrap();
    let h = assemble_hnl(&prob, n, 200, &limits).unwrap();
    // V ≤ 0, so the top of the spectrum is below the largest Laplacian entry.
    let top = h
        .basis
        .laplacian_diagonal()
        .into_iter()
        .fold(f64::MIN, f64::max);
    let eig = hermitian_eigenvalues(&h.matrix).unwrap();
    assert!(eig[0] >= -8.0 && *eig.last().unwrap() <= top);
    let slack = 2.0 / n as f64 + eta;
    for z in &set.points {
        assert!(z.re >= -8.0 - slack && z.re <= top + slack, "{z}");
        assert!(z.im.abs() <= slack, "{z}");
    }
    assert!(set.points.iter().any(|z| z.re < 0.0));
}

#[test]
fn well_bound_state_agrees_with_finite_differences() {
    // Diagnostic: the FD ground state must be spectrally close to gamma3.
    let prob = bump_problem(-8.0);
    let fd = fd_schrodinger_1d(&prob, 10.0, 800, 1).unwrap();
    let ground = fd.value[0];
    assert!(ground < 0.0);
    let set = gamma3(&prob, 4, Some(200), &Limits::default()).unwrap();
    let points = ClosedSet::points(set.points.clone()).unwrap();
    let gap = dist_to(Complex64::new(ground, 0.0), &points);
    assert!(
        gap <= 2.0 / 4.0 + set.provenance.error_bound.unwrap(),
        "gap {gap}"
    );
}

/// Independent sampler for one Attouch-Wets term on a grid `refine` times
/// finer than the production step.
fn brute_term(a: &ClosedSet, b: &ClosedSet, i: i64, refine: i64) -> f64 {
    let scale = 8 * i * refine;
    let rad = scale * i;
    let mut best = 0.0f64;
    for p in -rad..=rad {
        for q in -rad..=rad {
            if p * p + q * q < rad * rad {
                let z = Complex64::new(p as f64 / scale as f64, q as f64 / scale as f64);
                best = best.max((dist_to(z, a) - dist_to(z, b)).abs());
            }
        }
    }
    best
}

#[test]
fn far_point_series_matches_refined_sampling() {
    let a = ClosedSet::points(vec![Complex64::new(0.0, 0.0)]).unwrap();
    let b = ClosedSet::points(vec![Complex64::new(0.0, 0.0), Complex64::new(10.0, 0.0)]).unwrap();
    let r = d_aw(&a, &b, 20).unwrap();
    let mut refined = 0.0;
    for i in 1..=20i64 {
        // Terms beyond the first saturated one stay saturated.
        let s = if i <= 6 {
            brute_term(&a, &b, i, 10)
        } else {
            1.0
        };
        refined += 0.5f64.powi(i as i32) * s.min(1.0);
    }
    assert!(
        (r.estimate - refined).abs() <= r.slack + 1e-15,
        "{} vs {refined}",
        r.estimate
    );
}
