/// Riemann zeta function for real `s > 1` by Euler–Maclaurin summation.
pub fn riemann_zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta is only evaluated for s > 1");
    const N: usize = 12;
    // B_2k / (2k)!
    const COEFFS: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2)
    let mut rising = s;
    let mut power = nf.powf(-s - 1.0);
    for (k, c) in COEFFS.iter().enumerate() {
        sum += c * rising * power;
        let a = s + (2 * k + 1) as f64;
        rising *= a * (a + 1.0);
        power /= nf * nf;
    }
    sum
}
