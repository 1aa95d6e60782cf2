use qglab_core::linalg::Mat;
use qglab_core::massive::{higher_order_values, source_term_value, HigherOrderCase, ScalingSeries};
use qglab_core::perron::{spectral_gap, GapMethod, PfOperator, PfResolvent, WMatrix};
use qglab_core::scattering::{PropagationMatrix, VertexKind};
use qglab_core::wick::{enumerate_contractions, evaluate_term, TracePattern, WSet};

fn complete(v: usize) -> (PropagationMatrix<f64>, Vec<WMatrix<f64>>, f64) {
    let b = PropagationMatrix::complete(v, VertexKind::Dft).unwrap();
    let f = PfOperator::from_propagation(&b).unwrap();
    let g = spectral_gap(&f, GapMethod::Dense).unwrap();
    let ws = PfResolvent::new(&f, &g).unwrap().w_series(3).unwrap();
    (b, ws, g.gap)
}

#[test]
fn enumerated_first_higher_order_term_on_two_by_two_example() {
    let f = PfOperator::from_matrix(Mat::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()).unwrap();
    let g = spectral_gap(&f, GapMethod::Dense).unwrap();
    let ws = PfResolvent::new(&f, &g).unwrap().w_series(3).unwrap();
    let direct = higher_order_values(&ws, HigherOrderCase::M1n2).unwrap();
    let terms = enumerate_contractions(&TracePattern::standard(&[2], &[]).unwrap()).unwrap();
    let first = terms.iter().find(|t| t.form.to_string().contains("W3")).unwrap();
    // 2B = 2: B = 1, prefactor 1/B² = 1
    let v = evaluate_term(first, WSet::new(&ws, None), 1.0f64).unwrap();
    assert!((v.class_value.re - 0.5).abs() < 1e-14);
    assert!((v.class_value.re - direct[0]).abs() < 1e-14);
}

#[test]
fn source_term_equals_enumerated_cross_contraction() {
    for v in [4, 6, 9] {
        let (b, ws, _) = complete(v);
        let f = PfOperator::from_propagation(&b).unwrap();
        let g = spectral_gap(&f, GapMethod::Dense).unwrap();
        let st = source_term_value(&ws[0], &ws[1], &g).unwrap();
        let terms = enumerate_contractions(&TracePattern::standard(&[], &[]).unwrap()).unwrap();
        assert_eq!(terms.len(), 1);
        let bonds = b.bond_count() as f64;
        let e = evaluate_term(&terms[0], WSet::new(&ws, Some(&b)), 1.0 / (bonds * bonds)).unwrap();
        assert!((e.class_value.re - st.value).abs() < 1e-12, "V={v}");
    }
}

#[test]
fn dressed_source_term_decays_like_inverse_square() {
    let term = enumerate_contractions(&TracePattern::standard(&[], &[1]).unwrap()).unwrap().remove(0);
    let mut points = Vec::new();
    for v in [6, 8, 10, 12, 16] {
        let (b, ws, _) = complete(v);
        let bonds = b.bond_count() as f64;
        let value = evaluate_term(&term, WSet::new(&ws, Some(&b)), 1.0 / (bonds * bonds)).unwrap();
        assert!(value.class_value.im.abs() < 1e-12);
        let scaled = value.class_value.re.abs() * (b.dim() * b.dim()) as f64;
        assert!((0.1..10.0).contains(&scaled), "V={v}: (2B)² |value| = {scaled}");
        points.push((b.dim(), value.class_value.re));
    }
    let fit = ScalingSeries::fit(points).unwrap();
    assert!((fit.slope + 2.0).abs() < 0.25, "slope {}", fit.slope);
    assert!(fit.sign_consistent);
}

#[test]
fn complete_graph_closed_forms_across_sizes() {
    for v in [5usize, 7, 10] {
        let (b, ws, gap) = complete(v);
        let vf = v as f64;
        assert!((gap - (vf - 2.0) / (vf - 1.0)).abs() < 1e-10, "V={v}");
        let two_b = b.dim() as f64;
        let trace = (vf - 1.0).powi(2) / vf + two_b - vf;
        assert!((ws[0].matrix().trace() - trace).abs() < 1e-9, "V={v}");
    }
}
