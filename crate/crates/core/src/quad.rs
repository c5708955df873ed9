//! Cached Gauss–Legendre rules on `[-1, 1]`.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

fn rule(cell: &'static OnceLock<Vec<(f64, f64)>>, n: usize) -> &'static [(f64, f64)] {
    cell.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(n).expect("nonzero degree"))
            .as_node_weight_pairs()
            .to_vec()
    })
}

pub(crate) fn gl16() -> &'static [(f64, f64)] {
    static CELL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    rule(&CELL, 16)
}

pub(crate) fn gl20() -> &'static [(f64, f64)] {
    static CELL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    rule(&CELL, 20)
}

/// Maps the rule onto `[a, b]`, yielding `(node, weight)`.
pub(crate) fn mapped(rule: &'static [(f64, f64)], a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.iter().map(move |&(x, w)| (mid + half * x, half * w))
}
