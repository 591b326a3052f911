//! Schubert calculus on `Gr(N+1, d+1)`: Littlewood-Richardson coefficients
//! by tableau enumeration and intersection numbers of basic situations.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::field::Field;
use crate::ramification::BasicSituation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchubertError {
    #[error("partition {0} does not fit in the {1}x{2} box")]
    BoxOverflow(Partition, usize, usize),
    #[error("codimensions sum to {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("partition entries must be weakly decreasing: {0:?}")]
    NotPartition(Vec<usize>),
}

/// Weakly decreasing parts; trailing zeros are dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self, SchubertError> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(SchubertError::NotPartition(parts));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// `(c, c, ..., c)` with `r` rows.
    pub fn rectangle(r: usize, c: usize) -> Self {
        if c == 0 {
            return Partition::empty();
        }
        Partition(vec![c; r])
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn part(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn fits(&self, rows: usize, cols: usize) -> bool {
        self.0.len() <= rows && self.part(0) <= cols
    }

    pub fn contains(&self, other: &Partition) -> bool {
        (0..other.len()).all(|i| self.part(i) >= other.part(i))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

fn check_box(p: &Partition, rows: usize, cols: usize) -> Result<(), SchubertError> {
    if p.fits(rows, cols) {
        Ok(())
    } else {
        Err(SchubertError::BoxOverflow(p.clone(), rows, cols))
    }
}

/// Number of LR tableaux of shape `nu / lambda` and content `mu`.
pub fn lr_coefficient(
    lambda: &Partition,
    mu: &Partition,
    nu: &Partition,
    rows: usize,
    cols: usize,
) -> Result<u64, SchubertError> {
    for p in [lambda, mu, nu] {
        check_box(p, rows, cols)?;
    }
    Ok(lr_unchecked(lambda, mu, nu))
}

fn lr_unchecked(lambda: &Partition, mu: &Partition, nu: &Partition) -> u64 {
    if lambda.size() + mu.size() != nu.size() || !nu.contains(lambda) {
        return 0;
    }
    if mu.is_empty() {
        return 1;
    }
    // cells of nu/lambda in reverse reading order: rows top to bottom, each
    // row right to left
    let mut cells = Vec::new();
    for r in 0..nu.len() {
        for c in (lambda.part(r)..nu.part(r)).rev() {
            cells.push((r, c));
        }
    }
    let mut fill: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut used = vec![0usize; mu.len()];
    count_fillings(&cells, 0, lambda, mu, &mut fill, &mut used)
}

fn count_fillings(
    cells: &[(usize, usize)],
    idx: usize,
    lambda: &Partition,
    mu: &Partition,
    fill: &mut BTreeMap<(usize, usize), usize>,
    used: &mut Vec<usize>,
) -> u64 {
    if idx == cells.len() {
        return 1;
    }
    let (r, c) = cells[idx];
    // rows weakly increase left to right: bounded by the right neighbour
    let hi = fill.get(&(r, c + 1)).copied().unwrap_or(mu.len() - 1);
    // columns strictly increase downwards
    let lo = if r > 0 && c >= lambda.part(r - 1) {
        fill[&(r - 1, c)] + 1
    } else {
        0
    };
    let mut total = 0;
    for v in lo..=hi.min(mu.len() - 1) {
        if used[v] >= mu.part(v) {
            continue;
        }
        // lattice condition on the reverse reading word
        if v > 0 && used[v] + 1 > used[v - 1] {
            continue;
        }
        used[v] += 1;
        fill.insert((r, c), v);
        total += count_fillings(cells, idx + 1, lambda, mu, fill, used);
        fill.remove(&(r, c));
        used[v] -= 1;
    }
    total
}

/// All partitions `nu` in the box with `nu / lambda` a horizontal strip of
/// size `k` (Pieri rule for multiplication by the one-row class `(k)`).
pub fn pieri(lambda: &Partition, k: usize, rows: usize, cols: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(rows);
    pieri_rec(lambda, k, rows, cols, 0, &mut cur, &mut out);
    out
}

fn pieri_rec(
    lambda: &Partition,
    k: usize,
    rows: usize,
    cols: usize,
    r: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Partition>,
) {
    if r == rows {
        if k == 0 {
            out.push(Partition::new(cur.clone()).expect("interlacing keeps order"));
        }
        return;
    }
    let lo = lambda.part(r);
    let hi = if r == 0 { cols } else { lambda.part(r - 1) };
    for v in lo..=hi {
        let add = v - lo;
        if add > k {
            break;
        }
        cur.push(v);
        pieri_rec(lambda, k - add, rows, cols, r + 1, cur, out);
        cur.pop();
    }
}

/// Partitions in the box of the given size containing `lambda`.
fn partitions_containing(lambda: &Partition, size: usize, rows: usize, cols: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        lambda: &Partition,
        left: usize,
        rows: usize,
        cols: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Partition>,
    ) {
        let r = cur.len();
        if r == rows {
            if left == 0 {
                out.push(Partition::new(cur.clone()).expect("decreasing"));
            }
            return;
        }
        let hi = if r == 0 { cols } else { cur[r - 1] };
        for v in lambda.part(r)..=hi.min(lambda.part(r) + left) {
            cur.push(v);
            rec(lambda, left - (v - lambda.part(r)), rows, cols, cur, out);
            cur.pop();
        }
    }
    if size >= lambda.size() {
        rec(lambda, size - lambda.size(), rows, cols, &mut cur, &mut out);
    }
    out
}

/// `sigma_lambda * sigma_mu` in the cohomology of the Grassmannian, with
/// terms outside the box dropped.
pub fn multiply(
    lambda: &Partition,
    mu: &Partition,
    rows: usize,
    cols: usize,
) -> Result<BTreeMap<Partition, u64>, SchubertError> {
    check_box(lambda, rows, cols)?;
    check_box(mu, rows, cols)?;
    let mut out = BTreeMap::new();
    for nu in partitions_containing(lambda, lambda.size() + mu.size(), rows, cols) {
        let c = lr_unchecked(lambda, mu, &nu);
        if c > 0 {
            out.insert(nu, c);
        }
    }
    Ok(out)
}

/// Coefficient of the point class in the product of the given classes.
pub fn intersection_number_of(classes: &[Partition], rows: usize, cols: usize) -> Result<u64, SchubertError> {
    let expected = rows * cols;
    let got: usize = classes.iter().map(|p| p.size()).sum();
    if got != expected {
        return Err(SchubertError::DimensionMismatch { expected, got });
    }
    let mut acc: BTreeMap<Partition, u64> = BTreeMap::from([(Partition::empty(), 1)]);
    for cls in classes {
        check_box(cls, rows, cols)?;
        let mut next: BTreeMap<Partition, u64> = BTreeMap::new();
        for (lam, coef) in &acc {
            for (nu, c) in multiply(lam, cls, rows, cols)? {
                *next.entry(nu).or_insert(0) += coef * c;
            }
        }
        acc = next;
    }
    Ok(acc
        .get(&Partition::rectangle(rows, cols))
        .copied()
        .unwrap_or(0))
}

/// The intersection number of the Schubert conditions of a basic situation
/// in `Gr(N+1, d+1)`.
pub fn intersection_number<F: Field>(basic: &BasicSituation<F>) -> Result<u64, SchubertError> {
    let mut classes: Vec<Partition> = basic
        .ram
        .iter()
        .map(|a| Partition::new(a.entries().to_vec()))
        .collect::<Result<_, _>>()?;
    classes.push(Partition::new(basic.infinity.entries().to_vec())?);
    intersection_number_of(&classes, basic.n + 1, basic.d - basic.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sigma_one_squared() {
        let prod = multiply(&p(&[1]), &p(&[1]), 2, 2).unwrap();
        assert_eq!(prod.get(&p(&[2])), Some(&1));
        assert_eq!(prod.get(&p(&[1, 1])), Some(&1));
        assert_eq!(prod.len(), 2);
    }

    #[test]
    fn point_counts() {
        assert_eq!(intersection_number_of(&vec![p(&[1]); 4], 2, 2), Ok(2));
        assert_eq!(intersection_number_of(&vec![p(&[1]); 6], 2, 3), Ok(5));
        assert_eq!(intersection_number_of(&[p(&[2, 2])], 2, 2), Ok(1));
        assert!(matches!(
            intersection_number_of(&vec![p(&[1]); 3], 2, 2),
            Err(SchubertError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_class_and_overflow() {
        assert_eq!(lr_coefficient(&p(&[]), &p(&[2, 1]), &p(&[2, 1]), 3, 3), Ok(1));
        assert!(matches!(
            lr_coefficient(&p(&[3]), &p(&[1]), &p(&[3, 1]), 2, 2),
            Err(SchubertError::BoxOverflow(..))
        ));
    }

    #[test]
    fn classic_coefficient() {
        // c_{21,21}^{321} = 2
        assert_eq!(lr_coefficient(&p(&[2, 1]), &p(&[2, 1]), &p(&[3, 2, 1]), 3, 3), Ok(2));
    }

    fn boxed() -> impl Strategy<Value = (Partition, Partition, Partition, usize, usize)> {
        (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
            let part = prop::collection::vec(0..=c, r).prop_map(|mut v| {
                v.sort_unstable_by(|a, b| b.cmp(a));
                Partition::new(v).unwrap()
            });
            (part.clone(), part.clone(), part, Just(r), Just(c))
        })
    }

    proptest! {
        #[test]
        fn symmetric_in_the_factors((l, m, n, r, c) in boxed()) {
            prop_assert_eq!(lr_coefficient(&l, &m, &n, r, c), lr_coefficient(&m, &l, &n, r, c));
        }

        #[test]
        fn one_row_products_follow_pieri((l, _m, _n, r, c) in boxed(), k in 0usize..=4) {
            prop_assume!(k <= c);
            let by_lr = multiply(&l, &p(&[k]), r, c).unwrap();
            let strips = pieri(&l, k, r, c);
            prop_assert_eq!(by_lr.len(), strips.len());
            for nu in strips {
                prop_assert_eq!(by_lr.get(&nu), Some(&1));
            }
        }
    }
}
