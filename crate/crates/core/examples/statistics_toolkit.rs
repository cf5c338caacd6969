// Gaussian tail functions, exact binomial confidence bounds and
// reproducible random streams.

use semisup_robust::statkit::{clopper_pearson_lower, inverse_gaussian_cdf, q_function, split_stream};

fn main() -> semisup_robust::Result<()> {
    for t in [0.0, 1.0, 3.0, 8.0] {
        println!("Q({t}) = {:.6e}", q_function(t));
    }
    println!("Phi^-1(0.975) = {:.12}", inverse_gaussian_cdf(0.975)?);

    for (k, n) in [(9_000, 10_000), (10_000, 10_000), (50, 100)] {
        println!("{k}/{n} successes: 99.9% lower bound {:.6}", clopper_pearson_lower(k, n, 1e-3)?);
    }

    // the same (seed, index) always gives the same stream; substreams split
    // it further without overlap
    let mut a = split_stream(42, 3);
    let mut b = split_stream(42, 3);
    assert_eq!(a.standard_normal(), b.standard_normal());
    let mut sub = a.substream(0);
    println!("stream 42/3, substream 0: {:.6}", sub.uniform());
    Ok(())
}
