use proptest::prelude::*;
use qwalk::fusion::{FreeUnitary, FusionSystem, Letter, QParam, Word};
use qwalk::walk::{convolve, convolve_point, AtomicMeasure, Cylinder};

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::bool::ANY, 0..=max).prop_map(|bits| {
        Word::from_letters(bits.into_iter().map(|b| if b { Letter::B } else { Letter::A }).collect())
    })
}

fn qparam() -> impl Strategy<Value = QParam> {
    (0.05f64..0.95).prop_map(|v| QParam::new(v).unwrap())
}

proptest! {
    #[test]
    fn involution_is_an_antiautomorphism(x in word(12), y in word(12)) {
        prop_assert_eq!(x.involute().involute(), x.clone());
        prop_assert_eq!(x.concat(&y).involute(), y.involute().concat(&x.involute()));
    }

    #[test]
    fn display_round_trips(x in word(16)) {
        prop_assert_eq!(x.to_string().parse::<Word>().unwrap(), x);
    }

    #[test]
    fn dimension_is_additive_on_products(x in word(9), y in word(9), q in qparam()) {
        let sys = FreeUnitary::new(q);
        let lhs = sys.qdim(&x) * sys.qdim(&y);
        let rhs: f64 = sys.decompose(&x, &y).iter().map(|(w, m)| f64::from(*m) * sys.qdim(w)).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        prop_assert_eq!(sys.qdim(&x.involute()), sys.qdim(&x));
    }

    #[test]
    fn point_convolution_is_a_probability(z in word(10), y in word(10), q in qparam()) {
        let m = convolve_point(&z, &y, q);
        prop_assert!((m.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(m.iter().all(|(_, v)| v > 0.0));
        // lengths change by an even amount
        prop_assert!(m.labels().all(|w| (z.len() + y.len() - w.len()) % 2 == 0));
    }

    #[test]
    fn convolution_is_associative(a in word(4), b in word(4), c in word(4), q in qparam()) {
        let d = |w: &Word| AtomicMeasure::dirac(w.clone());
        let left = convolve(&convolve(&d(&a), &d(&b), q), &d(&c), q);
        let right = convolve(&d(&a), &convolve(&d(&b), &d(&c), q), q);
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn cylinders_partition_by_last_letter(z in word(6), y in word(6), q in qparam()) {
        let m = convolve_point(&z, &y, q);
        let ca = qwalk::walk::cylinder_mass(&m, &Cylinder::new("a".parse().unwrap()));
        let cb = qwalk::walk::cylinder_mass(&m, &Cylinder::new("b".parse().unwrap()));
        let ce = m.get(&Word::empty());
        prop_assert!((ca + cb + ce - 1.0).abs() < 1e-12);
    }
}
