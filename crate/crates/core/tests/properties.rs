mod common;

use common::props;

#[test]
fn ratio_monotonicity() {
    props::ratio_monotonicity().unwrap();
}

#[test]
fn mask_nesting() {
    props::mask_nesting().unwrap();
}

#[test]
fn composition_law() {
    props::composition_law().unwrap();
}

#[test]
fn hilbert_contraction() {
    props::hilbert_contraction().unwrap();
}

#[test]
fn survivor_recursion() {
    props::survivor_recursion().unwrap();
}

#[test]
fn ly_variation() {
    props::ly_variation().unwrap();
}

#[test]
fn lebesgue_duality() {
    props::lebesgue_duality().unwrap();
}

#[test]
fn zeta_product() {
    props::zeta_product().unwrap();
}
