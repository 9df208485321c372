use std::collections::BTreeMap;

use super::multiset::{sequence_to_multiset, Multiset};
use crate::dataset::{Dataset, Labels, Token};
use crate::error::{MemcapError, Result};

/// Positions sharing a key `(token, multiset of the sequence)`. All of them
/// must carry the same label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyGroup {
    pub token: Token,
    pub multiset: Multiset,
    pub label: u64,
    /// `(sequence index, position)` pairs.
    pub members: Vec<(usize, usize)>,
}

/// Groups labeled positions by key, in order of first occurrence. For
/// next-token data only the last position of each sequence is labeled.
pub fn consistency_groups(ds: &Dataset) -> Result<Vec<ConsistencyGroup>> {
    let mut index: BTreeMap<(Token, Multiset), usize> = BTreeMap::new();
    let mut groups: Vec<ConsistencyGroup> = Vec::new();
    for (i, seq) in ds.sequences.iter().enumerate() {
        let ms = sequence_to_multiset(seq);
        let labeled: Vec<(usize, u64)> = match &ds.labels {
            Labels::NextToken(l) => vec![(seq.len() - 1, l[i])],
            Labels::Seq2seq(l) => l[i].iter().copied().enumerate().collect(),
        };
        for (pos, label) in labeled {
            let key = (seq[pos].clone(), ms.clone());
            match index.get(&key) {
                Some(&g) => {
                    let grp = &mut groups[g];
                    if grp.label != label {
                        let (first, first_pos) = grp.members[0];
                        return Err(MemcapError::Consistency {
                            first,
                            second: i,
                            detail: format!(
                                "position {first_pos} has label {} but position {pos} has label {label}",
                                grp.label
                            ),
                        });
                    }
                    grp.members.push((i, pos));
                }
                None => {
                    index.insert(key, groups.len());
                    groups.push(ConsistencyGroup {
                        token: seq[pos].clone(),
                        multiset: ms.clone(),
                        label,
                        members: vec![(i, pos)],
                    });
                }
            }
        }
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: i64) -> Token {
        Token::from_ints(&[v])
    }

    #[test]
    fn permuted_prefix_conflict() {
        let ds = Dataset::new(
            1,
            3,
            vec![vec![t(1), t(2), t(3)], vec![t(2), t(1), t(3)]],
            Labels::NextToken(vec![1, 2]),
        )
        .unwrap();
        match consistency_groups(&ds) {
            Err(MemcapError::Consistency { first, second, .. }) => assert_eq!((first, second), (0, 1)),
            other => panic!("expected a consistency error, got {other:?}"),
        }
    }

    #[test]
    fn duplicates_collapse() {
        let ds = Dataset::new(
            1,
            2,
            vec![vec![t(1), t(2)], vec![t(1), t(2)], vec![t(2), t(1)]],
            Labels::NextToken(vec![4, 4, 4]),
        )
        .unwrap();
        let g = consistency_groups(&ds).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].members, vec![(0, 1), (1, 1)]);
    }
}
