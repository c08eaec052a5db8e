// Temporary: scan synthetic-recovery behavior across seeds.
use bhpfit_core::bhp::{BhpTable, GridSpec, Orientation};
use bhpfit_core::market::{Sign, SignedReturns};
use bhpfit_core::scan::{scan, AlphaRange};

fn main() {
    let table = BhpTable::build(10, Orientation::RightSkew, &GridSpec::default()).unwrap();
    let trunc = table.truncate(-1.90, 5.51).unwrap();
    let range = AlphaRange::default();
    for seed in 0..24u64 {
        let ys: Vec<f64> = trunc.sample(seed, 2500);
        let mags: Vec<f64> = ys.iter().map(|&y| (0.045 * y + 0.09f64).powi(2)).collect();
        let pop = SignedReturns {
            sign: Sign::Positive,
            magnitudes: mags,
            total_days: 2500,
        };
        let result = scan(&pop, &table, &range).unwrap();
        println!(
            "seed {seed:2}: alpha* = {:.2}  p* = {:.4}  D* = {:.5}",
            result.alpha_star(),
            result.p_star(),
            result.d_star()
        );
    }
}
