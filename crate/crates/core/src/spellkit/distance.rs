/// Levenshtein distance with unit costs over bytes.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `Some(distance)` when the distance is at most `max`, `None` otherwise.
///
/// Only the diagonal band of width `2 * max + 1` is evaluated and the scan
/// stops as soon as a whole row exceeds `max`.
pub fn bounded_edit_distance(a: &[u8], b: &[u8], max: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > max {
        return None;
    }
    if a.is_empty() || b.is_empty() {
        return Some(a.len().max(b.len()));
    }
    let inf = max + 1;
    let width = b.len() + 1;
    let mut prev = vec![inf; width];
    let mut cur = vec![inf; width];
    for (j, slot) in prev.iter_mut().enumerate().take(max.min(b.len()) + 1) {
        *slot = j;
    }
    for i in 1..=a.len() {
        let lo = i.saturating_sub(max).max(1);
        let hi = (i + max).min(b.len());
        cur.iter_mut().for_each(|c| *c = inf);
        if i <= max {
            cur[0] = i;
        }
        let mut row_min = cur[0];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1).min(inf);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[b.len()];
    (d <= max).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_distances() {
        assert_eq!(edit_distance("kitten", "sitting"), 3);
        assert_eq!(edit_distance("s*mmer", "summer"), 1);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("abc", ""), 3);
        assert_eq!(edit_distance("summ*r", "summr"), 1);
        assert_eq!(edit_distance("*", "*"), 0);
    }

    #[test]
    fn bounded_matches_exact_on_examples() {
        assert_eq!(bounded_edit_distance(b"kitten", b"sitting", 3), Some(3));
        assert_eq!(bounded_edit_distance(b"kitten", b"sitting", 2), None);
        assert_eq!(bounded_edit_distance(b"", b"ab", 2), Some(2));
        assert_eq!(bounded_edit_distance(b"", b"ab", 1), None);
        assert_eq!(bounded_edit_distance(b"su*m*r", b"sumer", 2), Some(2));
    }

    fn word() -> impl Strategy<Value = String> {
        "[abc*]{0,7}"
    }

    proptest! {
        #[test]
        fn identity_and_symmetry(a in word(), b in word()) {
            prop_assert_eq!(edit_distance(&a, &a), 0);
            prop_assert_eq!(edit_distance(&a, &b), edit_distance(&b, &a));
        }

        #[test]
        fn triangle_inequality(a in word(), b in word(), c in word()) {
            prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
        }

        #[test]
        fn bounded_agrees_with_full(a in word(), b in word(), max in 0usize..4) {
            let d = edit_distance(&a, &b);
            let expected = (d <= max).then_some(d);
            prop_assert_eq!(bounded_edit_distance(a.as_bytes(), b.as_bytes(), max), expected);
        }
    }
}
