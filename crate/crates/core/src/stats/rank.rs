use super::StatsError;

/// Joint ranks with ties averaged, plus the tie term `Σ (t³ − t)` over tie groups.
pub(crate) fn rank_and_tie_term(values: &[f64]) -> Result<(Vec<f64>, f64), StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(i));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        // -0.0 and 0.0 tie.
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end; their mean:
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    Ok((ranks, tie_term))
}

pub fn rank_with_ties(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    rank_and_tie_term(values).map(|(r, _)| r)
}
