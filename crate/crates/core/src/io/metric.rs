use crate::model::GraphicalModel;

/// `1 - Σ_{u∉A} ln|X_u| / Σ_u ln|X_u|`: the share of the label space fixed
/// by `A`. Equals `|A|/|V|` for uniform label counts; a model without any
/// free node counts as fully determined.
pub fn persistency_percentage(model: &GraphicalModel, a: &[usize]) -> f64 {
    let mut inside = vec![false; model.num_nodes()];
    for &v in a {
        inside[v] = true;
    }
    let weight = |v: usize| (model.label_count(v) as f64).ln();
    let total: f64 = (0..model.num_nodes()).map(weight).sum();
    if total == 0.0 {
        return 1.0;
    }
    let free: f64 = (0..model.num_nodes())
        .filter(|&v| !inside[v])
        .map(weight)
        .sum();
    (1.0 - free / total).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let m = GraphicalModel::new(vec![2, 4], vec![]).unwrap();
        assert!((persistency_percentage(&m, &[1]) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(persistency_percentage(&m, &[0, 1]), 1.0);
        assert_eq!(persistency_percentage(&m, &[]), 0.0);
        let single = GraphicalModel::new(vec![1, 1], vec![]).unwrap();
        assert_eq!(persistency_percentage(&single, &[]), 1.0);
        let uniform = GraphicalModel::new(vec![3; 7], vec![]).unwrap();
        assert!((persistency_percentage(&uniform, &[0, 2, 5]) - 3.0 / 7.0).abs() < 1e-12);
    }
}
