use std::ops::ControlFlow;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use ttp_core::model::Family;
use ttp_core::polyhedra::*;
use ttp_core::schedule::Layout;
use ttp_core::Rational;

fn cloud() -> &'static PointCloud {
    static CLOUD: OnceLock<PointCloud> = OnceLock::new();
    CLOUD.get_or_init(|| PointCloud::new(4).unwrap())
}

const P: i64 = 1_000_000_007;

fn pow_mod(mut b: i64, mut e: i64) -> i64 {
    let mut r = 1;
    b %= P;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    r
}

/// Row echelon basis modulo a prime, fed one vector at a time.
struct ModBasis {
    rows: Vec<(usize, Vec<i64>)>,
}

impl ModBasis {
    fn insert(&mut self, v: &[i64]) {
        let mut v: Vec<i64> = v.iter().map(|x| x.rem_euclid(P)).collect();
        for (pivot, r) in &self.rows {
            let f = v[*pivot];
            if f != 0 {
                for (a, b) in v.iter_mut().zip(r) {
                    *a = (*a - f * b).rem_euclid(P);
                }
            }
        }
        if let Some(pivot) = v.iter().position(|&x| x != 0) {
            let inv = pow_mod(v[pivot], P - 2);
            for a in v.iter_mut() {
                *a = *a * inv % P;
            }
            for (_, r) in self.rows.iter_mut() {
                let f = r[pivot];
                if f != 0 {
                    for (a, b) in r.iter_mut().zip(&v) {
                        *a = (*a - f * b).rem_euclid(P);
                    }
                }
            }
            self.rows.push((pivot, v));
        }
    }
}

#[test]
fn polytope_dimension_is_88_by_modular_rank() {
    let pts = cloud().tournament_points();
    let origin: Vec<i64> = pts[0].iter().map(|&v| v as i64).collect();
    let mut basis = ModBasis { rows: Vec::new() };
    cloud().visit(|p, _| {
        let d: Vec<i64> = p.iter().zip(&origin).map(|(&a, b)| a as i64 - b).collect();
        basis.insert(&d);
        ControlFlow::Continue(())
    });
    assert_eq!(basis.rows.len(), 88);
    assert_eq!(cloud().dimension(), 88);
    assert_eq!(polytope_dimension_formula(4), 88);
}

#[test]
fn equation_system_rank_and_bases() {
    for n in [4, 6] {
        assert_eq!(equation_rank(n).unwrap(), equation_count(n));
        for k in 1..=2 * n - 2 {
            let c = check_basis_submatrix(n, k).unwrap();
            assert_eq!(c.size, 3 * n * n - 4 * n);
            assert!(c.nonsingular, "n={n} slot {k}");
        }
        assert!(verify_slot1_redundant(n));
    }
}

#[test]
fn slot1_team_rows_do_not_raise_the_rank() {
    for n in [4, 6] {
        let extra = RationalMatrix::from_constraints(Layout::new(n).num_play(), slot1_rows(n).iter());
        let (before, after) = rank_with(n, extra.rows()).unwrap();
        assert_eq!((before, after), (equation_count(n), equation_count(n)));
    }
}

#[test]
fn sampled_facets_have_dimension_87() {
    let cloud = cloud();
    for class in FACE_CLASSES.iter().filter(|c| c.codim == 1) {
        let rows = sample_rows(family_rows(4, class.family), Sample::Spread(3));
        assert!(rows.len() >= 3, "{:?}", class.family);
        for row in rows {
            let r = face_dimension(cloud, &FaceSpec::new(row)).unwrap();
            assert_eq!(r.dimension, 87, "{}", r.tag);
            assert!(r.tight > 0 && r.tight < r.total);
        }
    }
}

/// Unlifted away-away rows give faces of dimension 85: the upper bound comes
/// from two coordinates that vanish on the face, the lower bound from 86
/// explicit tight points whose differences have rank 85.
#[test]
fn unlifted_away_away_faces_have_dimension_85() {
    let cloud = cloud();
    let layout = Layout::new(4);
    let eqs = equation_rows(4).unwrap();
    for row in sample_rows(family_rows(4, Family::AwayAway), Sample::Spread(3)) {
        let (k, i, j, t) = parse4(&row.tag);
        let int = row.to_int_row().unwrap();
        let vanish = [layout.x(k, j, t), layout.x(k + 1, i, t)];

        let mut upper = RationalMatrix::from_constraints(layout.num_vars(), eqs.iter().chain([&row]));
        for c in vanish {
            let mut unit = vec![Rational::zero(); layout.num_vars()];
            unit[c] = Rational::one();
            upper.push_row(unit);
        }
        assert_eq!(upper.rank(), 35);

        let mut acc = AffineRank::new(layout.num_vars());
        cloud.visit(|p, _| {
            if int.slack(p) == 0 {
                assert!(vanish.iter().all(|&c| p[c] == 0));
                acc.insert(p);
            }
            ControlFlow::Continue(())
        });
        let w = acc.witnesses();
        assert_eq!(w.len(), 86);
        let diffs: Vec<Vec<i64>> =
            w[1..].iter().map(|p| p.iter().zip(&w[0]).map(|(a, b)| a - b).collect()).collect();
        assert_eq!(RationalMatrix::from_i64(&diffs).rank(), 85);

        assert_eq!(face_dimension(cloud, &FaceSpec::new(row)).unwrap().dimension, 85);
    }
}

fn parse4(tag: &str) -> (usize, usize, usize, usize) {
    let inner = &tag[tag.find('[').unwrap() + 1..tag.len() - 1];
    let v: Vec<usize> = inner.split(',').map(|s| s.parse().unwrap()).collect();
    (v[0], v[1], v[2], v[3])
}

#[test]
fn flow_equation_face_contains_exactly_the_tournaments() {
    let r = flow_equation_face(cloud());
    assert!(r.passes());
    assert_eq!(r.tournaments, 5760);
    assert!(verify_flow_equation_face(4).unwrap());
}

#[test]
fn invalid_inequality_is_reported() {
    let err = face_dimension(cloud(), &corrupted_face(4)).unwrap_err();
    assert!(matches!(err, PolyhedraError::NotValid { .. }));
    let report = Report { records: facet_claims(cloud(), Sample::Spread(1), true) };
    assert!(!report.all_pass());
    assert!(report.failures().any(|r| r.claim.contains("corrupted")));
}
