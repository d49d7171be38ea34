#![allow(dead_code)]

use qplane::{ExtReal, QContext};

pub fn ctx(q: f64) -> QContext {
    QContext::new(q).unwrap()
}

fn log2_qnum(q: f64, k: f64) -> f64 {
    -k * q.log2() + (1.0 - q.powf(2.0 * k)).log2() - (1.0 / q - q).log2()
}

/// `𝒥(x)` and `𝒩(x; c)` summed term by term in software floats from
/// `Σ(−1)^k x^(2k)/([k]!)²`, at a precision covering the largest term.
pub fn series(q: f64, x2: f64, c: f64) -> (f64, f64) {
    let lx = x2.log2();
    let (mut lt, mut top, mut peak) = (0.0f64, 0.0f64, 0usize);
    for k in 1usize.. {
        lt += lx - 2.0 * log2_qnum(q, k as f64);
        if lt > top {
            top = lt;
            peak = k;
        }
        if k > peak + 4 && lt < -400.0 {
            break;
        }
    }
    let bits = top as usize + 320;
    let x2 = ExtReal::from_f64(x2, bits);
    let qe = ExtReal::from_f64(q, bits);
    let qi = qe.recip();
    let d = &qe - &qi;
    let one = ExtReal::one(bits);
    let (mut t, mut j) = (one.clone(), one.clone());
    let (mut s, mut h) = (ExtReal::zero(bits), ExtReal::zero(bits));
    let (mut qk, mut qmk) = (one.clone(), one);
    let mut k = 0usize;
    loop {
        k += 1;
        qk = &qk * &qe;
        qmk = &qmk * &qi;
        let b = &(&qk - &qmk) / &d;
        t = -(&(&t * &x2) / &(&b * &b));
        j = &j + &t;
        h = &h + &(&(&qk + &qmk) / &b);
        s = &s + &(&t * &h);
        if k > peak.max(200) && t.log2_abs() + h.log2_abs() < -300.0 {
            break;
        }
    }
    let a = &d / &(&(&qe + &qe) * &qe.ln());
    let log_term = &x2.ln() + &ExtReal::from_f64(2.0 * c, bits);
    let n = &(&(&a * &j) * &log_term) - &(&s * &qi);
    (j.to_f64(), n.to_f64())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
