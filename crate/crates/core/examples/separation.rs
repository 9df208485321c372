//! Integer token weights whose weighted sums tell multisets apart.

use memcap::dataset::Token;
use memcap::separation::{restriction_set, separating_function, sequence_to_multiset, verify_separating};

fn main() -> memcap::Result<()> {
    let words: [&[i64]; 5] = [&[1, 2, 2], &[2, 1, 2], &[1, 3], &[3, 3, 3], &[4, 2]];
    let mut family = Vec::new();
    for w in words {
        let ms = sequence_to_multiset(&w.iter().map(|&v| Token::from_ints(&[v, 0])).collect::<Vec<_>>());
        if !family.contains(&ms) {
            family.push(ms);
        }
    }
    let support = restriction_set(&family)?;
    println!("{} distinct multisets, restriction set of size {}", family.len(), support.len());
    let f = separating_function(&family, &support, 7)?;
    println!("table: {}", f.to_json());
    for (k, m) in family.iter().enumerate() {
        println!("multiset {k}: weighted sum {}", f.weighted_sum(m));
    }
    let restricted: Vec<_> = family.iter().map(|m| m.restrict(&support)).collect();
    println!("gap and magnitude verified: {}", verify_separating(&f, &restricted, 3)?);
    Ok(())
}
