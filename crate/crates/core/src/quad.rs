//! Quadrature rules: symmetric triangle rules in barycentric coordinates and
//! 1-D Gauss-Legendre nodes on [0, 1].

/// (l1, l2, weight); l3 = 1 - l1 - l2.  Weights sum to 1 (multiply by the
/// triangle area).
pub type TriPoint = (f64, f64, f64);

/// Symmetric triangle rule exact up to the requested polynomial degree
/// (1, 2, 4 or 5; higher requests fall back to composite refinement by the
/// caller).
pub fn tri_rule(degree: usize) -> Vec<TriPoint> {
    match degree {
        0 | 1 => vec![(1.0 / 3.0, 1.0 / 3.0, 1.0)],
        2 => vec![
            (0.5, 0.5, 1.0 / 3.0),
            (0.5, 0.0, 1.0 / 3.0),
            (0.0, 0.5, 1.0 / 3.0),
        ],
        3 | 4 => {
            let (a, wa) = (0.445948490915965, 0.223381589678011);
            let (b, wb) = (0.091576213509771, 0.109951743655322);
            perm3(a, wa).into_iter().chain(perm3(b, wb)).collect()
        }
        _ => {
            let mut pts = vec![(1.0 / 3.0, 1.0 / 3.0, 0.225)];
            let (a, wa) = (0.470142064105115, 0.132394152788506);
            let (b, wb) = (0.101286507323456, 0.125939180544827);
            pts.extend(perm3(a, wa));
            pts.extend(perm3(b, wb));
            pts
        }
    }
}

fn perm3(a: f64, w: f64) -> Vec<TriPoint> {
    let b = 1.0 - 2.0 * a;
    vec![(a, a, w), (a, b, w), (b, a, w)]
}

/// Gauss-Legendre nodes and weights on [0, 1]; supported sizes 1..=6 and 8.
pub fn gauss_01(n: usize) -> Vec<(f64, f64)> {
    // nodes/weights on [-1, 1]
    let (x, w): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3.0f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => (
            vec![
                -0.861136311594053,
                -0.339981043584856,
                0.339981043584856,
                0.861136311594053,
            ],
            vec![
                0.347854845137454,
                0.652145154862546,
                0.652145154862546,
                0.347854845137454,
            ],
        ),
        5 => (
            vec![
                -0.906179845938664,
                -0.538469310105683,
                0.0,
                0.538469310105683,
                0.906179845938664,
            ],
            vec![
                0.236926885056189,
                0.478628670499366,
                0.568888888888889,
                0.478628670499366,
                0.236926885056189,
            ],
        ),
        6 => (
            vec![
                -0.932469514203152,
                -0.661209386466265,
                -0.238619186083197,
                0.238619186083197,
                0.661209386466265,
                0.932469514203152,
            ],
            vec![
                0.171324492379170,
                0.360761573048139,
                0.467913934572691,
                0.467913934572691,
                0.360761573048139,
                0.171324492379170,
            ],
        ),
        _ => (
            vec![
                -0.960289856497536,
                -0.796666477413627,
                -0.525532409916329,
                -0.183434642495650,
                0.183434642495650,
                0.525532409916329,
                0.796666477413627,
                0.960289856497536,
            ],
            vec![
                0.101228536290376,
                0.222381034453374,
                0.313706645877887,
                0.362683783378362,
                0.362683783378362,
                0.313706645877887,
                0.222381034453374,
                0.101228536290376,
            ],
        ),
    };
    x.into_iter()
        .zip(w)
        .map(|(xi, wi)| ((xi + 1.0) / 2.0, wi / 2.0))
        .collect()
}
