//! Small shared helpers: stable hashing for seed derivation, deterministic
//! float formatting, and medians.

/// Stable 64-bit FNV-1a hash over length-prefixed parts.
///
/// Used to derive per-run seeds from `(master_seed, algorithm id, function id,
/// run index)`. The algorithm is fixed by this crate (not `std`'s hasher, whose
/// output may change between releases), so seeds written into manifests and CSV
/// files stay meaningful forever. Parts are length-prefixed so that
/// `("ab", "c")` and `("a", "bc")` hash differently.
pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    };
    for part in parts {
        eat(&(part.len() as u64).to_le_bytes());
        eat(part);
    }
    h
}

/// Derives the seed for one run of `algorithm` on `function`.
pub fn run_seed(master_seed: u64, algorithm: &str, function: &str, run: u64) -> u64 {
    stable_hash(&[
        &master_seed.to_le_bytes(),
        algorithm.as_bytes(),
        function.as_bytes(),
        &run.to_le_bytes(),
    ])
}

/// Formats a float with 17 significant digits (`1.0000000000000000e0` style),
/// enough for a lossless `f64` round trip through text.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats a float as `d.dde±dd` (two mantissa decimals, two exponent digits),
/// the scientific notation used by the Markdown tables.
pub fn format_sci(x: f64) -> String {
    if x == 0.0 {
        return "0.00e+00".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.2e}");
    // `{:e}` emits `4.79e-2`; widen the exponent to two digits with a sign.
    let (mantissa, exp) = s.split_once('e').expect("exponent in {:e} output");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Median of a sample; averages the two middle values for even lengths.
///
/// Panics on an empty slice (callers validate non-emptiness).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Arithmetic mean (callers validate non-emptiness).
pub fn mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "mean of empty slice");
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with Bessel's correction; 0 for a single observation.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}
