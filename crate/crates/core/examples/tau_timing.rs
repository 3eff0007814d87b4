fn main() {
    let n: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(1_000_000);
    let t = std::time::Instant::now();
    let tau = tml_core::hecke::build_tau_table(n).unwrap();
    println!("N = {n}: {:?}, tau(N) = {}", t.elapsed(), tau[n]);
}
