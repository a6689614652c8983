//! Order statistics without sorting.

/// `k`-th largest value (1-based) of `values`, found by linear-time selection on a copy.
pub(crate) fn kth_largest(values: &[f64], k: usize) -> f64 {
    debug_assert!(k >= 1 && k <= values.len());
    let mut scratch = values.to_vec();
    let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    *kth
}

/// Sum of squares of the `k - 1` largest values together with the square of the
/// `k`-th largest.
pub(crate) fn top_squares(values: &[f64], k: usize) -> (f64, f64) {
    debug_assert!(k >= 1 && k <= values.len());
    let mut scratch = values.to_vec();
    let (above, kth, _) = scratch.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    let head = above.iter().map(|v| v * v).sum();
    (head, *kth * *kth)
}

/// Largest and second largest values of an iterator; missing entries read as zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct TopTwo {
    pub first: f64,
    pub second: f64,
    pub first_index: Option<usize>,
}

impl TopTwo {
    pub fn scan(items: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut top = TopTwo::default();
        for (index, value) in items {
            match top.first_index {
                None => {
                    top.first = value;
                    top.first_index = Some(index);
                }
                Some(_) if value > top.first => {
                    top.second = top.first;
                    top.first = value;
                    top.first_index = Some(index);
                }
                Some(_) if value > top.second => top.second = value,
                Some(_) => {}
            }
        }
        top
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kth_largest_against_sort() {
        let values: [f64; 8] = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for k in 1..=values.len() {
            assert_eq!(kth_largest(&values, k), sorted[k - 1]);
        }
    }

    #[test]
    fn top_squares_splits_head() {
        let (head, kth) = top_squares(&[1.0, 3.0, 2.0, 2.0], 3);
        assert_eq!(head, 9.0 + 4.0);
        assert_eq!(kth, 4.0);
    }

    #[test]
    fn top_two_keeps_first_index_on_ties() {
        let top = TopTwo::scan([(4, 2.0), (7, 2.0), (9, 1.0)]);
        assert_eq!(top.first, 2.0);
        assert_eq!(top.second, 2.0);
        assert_eq!(top.first_index, Some(4));

        let single = TopTwo::scan([(3, 5.0)]);
        assert_eq!(single.second, 0.0);
        assert_eq!(TopTwo::scan([]).first_index, None);
    }
}
