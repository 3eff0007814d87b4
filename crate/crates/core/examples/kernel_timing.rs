use std::time::Instant;
use tml_core::characters::{all_twisted_sums, naive_twisted_sum, CharacterIndex};
use tml_core::hecke::HeckeTable;
fn main() {
    let table = HeckeTable::build(1000).unwrap();
    let coeffs = table.coefficients(1000);
    let t = Instant::now();
    let idx = CharacterIndex::new(1_000_003).unwrap();
    let t_idx = t.elapsed();
    let v = all_twisted_sums(&idx, &coeffs).unwrap();
    println!("q=1e6+3: index {:?}, total {:?}, {}", t_idx, t.elapsed(), v.values.len());
    let idx = CharacterIndex::new(10_007).unwrap();
    let t = Instant::now();
    let mut acc = 0.0;
    for a in 0..idx.order() { acc += naive_twisted_sum(&idx, a, &coeffs).norm(); }
    let naive = t.elapsed();
    println!("naive q=10007: {:?} ({acc}); extrapolated to 1e6: {:?}", naive, naive * 100);
}
