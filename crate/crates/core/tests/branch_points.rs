use r3s2::spectral::{detect_branch_points, gswe_eigensystem, min_eigenvalue_gap};

// Colliding eigenvalues split like √(ρ - ρ₀), so the gap left at a point
// located to within `res` is of order √res.
#[test]
fn gap_closes_like_square_root_of_resolution() {
    for res in [1e-4, 1e-6, 1e-8] {
        let bp = detect_branch_points(0, 4.0, res).unwrap();
        assert_eq!(bp.points.len(), 1);
        let gap = min_eigenvalue_gap(0, bp.points[0], 40).unwrap();
        assert!(gap < 10.0 * res.sqrt(), "res {res}: gap {gap}");
    }
}

#[test]
fn first_branch_point_of_order_zero() {
    let p = detect_branch_points(0, 4.0, 1e-8).unwrap().points[0];
    assert!((p - 1.899_451_7).abs() < 1e-6, "{p}");
    let below = gswe_eigensystem(0, p - 1e-6, 30).unwrap();
    let above = gswe_eigensystem(0, p + 1e-6, 30).unwrap();
    assert!(below.eigenvalues[..2].iter().all(|v| v.im == 0.0));
    assert!(
        above.eigenvalues[0].im > 0.0
            && (above.eigenvalues[0] - above.eigenvalues[1].conj()).norm() < 1e-9
    );
}

#[test]
fn higher_orders_branch_later() {
    let first = |m: i64| {
        detect_branch_points(m, 8.0, 1e-5)
            .unwrap()
            .points
            .first()
            .copied()
    };
    let p0 = first(0).unwrap();
    let p1 = first(1).unwrap();
    assert!(p1 > p0);
    assert!(first(3).is_none_or(|p3| p3 > p1));
}
