use std::collections::{BTreeMap, BTreeSet};

use super::multiset::Multiset;
use crate::dataset::Token;
use crate::error::{MemcapError, Result};

/// A token set `A` of size below `N` on which the restrictions of the given
/// pairwise distinct multisets stay distinct. Built greedily: whenever a
/// restriction collides with an earlier one, the lexicographically smallest
/// token on which the two multisets differ is added.
pub fn restriction_set(multisets: &[Multiset]) -> Result<BTreeSet<Token>> {
    let mut seen: BTreeMap<&Multiset, usize> = BTreeMap::new();
    for (j, m) in multisets.iter().enumerate() {
        if let Some(&i) = seen.get(m) {
            return Err(MemcapError::NotDistinct { first: i, second: j });
        }
        seen.insert(m, j);
    }
    let mut a: BTreeSet<Token> = BTreeSet::new();
    for k in 1..multisets.len() {
        let mk = multisets[k].restrict(&a);
        let clash = (0..k).find(|&i| multisets[i].restrict(&a) == mk);
        if let Some(i) = clash {
            let candidates: BTreeSet<&Token> = multisets[i].support().chain(multisets[k].support()).collect();
            let x = candidates
                .into_iter()
                .find(|x| !a.contains(*x) && multisets[i].count(x) != multisets[k].count(x))
                .expect("distinct multisets differ on some token outside A");
            a.insert(x.clone());
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separation::sequence_to_multiset;

    fn ms(v: &[i64]) -> Multiset {
        sequence_to_multiset(&v.iter().map(|&x| Token::from_ints(&[x])).collect::<Vec<_>>())
    }

    #[test]
    fn single_multiset_gives_empty_set() {
        assert!(restriction_set(&[ms(&[1, 2])]).unwrap().is_empty());
    }

    #[test]
    fn rejects_duplicates() {
        assert!(matches!(
            restriction_set(&[ms(&[1, 2]), ms(&[2, 1])]),
            Err(MemcapError::NotDistinct { first: 0, second: 1 })
        ));
    }

    #[test]
    fn separates_small_family() {
        let family = [ms(&[1, 2]), ms(&[1, 3]), ms(&[2, 3]), ms(&[1, 1])];
        let a = restriction_set(&family).unwrap();
        assert!(a.len() < family.len());
        let restricted: BTreeSet<Multiset> = family.iter().map(|m| m.restrict(&a)).collect();
        assert_eq!(restricted.len(), family.len());
    }
}
