//! Adaptive Dormand–Prince 8(5,3) for a complex state of fixed size.

use num_complex::Complex64;

use super::MonodromyError;

const STAGES: usize = 12;

const C: [f64; STAGES] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];

/// Lower-triangular stage coefficients, row `s` holding `a_{s,0..s}`.
const A: [[f64; STAGES - 1]; STAGES] = [
    [0.0; STAGES - 1],

    [
        0.05260015195876773,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],

    [
        0.0197250569845379,
        0.0591751709536137,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],

    [
        0.02958758547680685,
        0.0,
        0.08876275643042054,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],

    [
        0.2413651341592667,
        0.0,
        -0.8845494793282861,
        0.924834003261792,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],

    [
        0.037037037037037035,
        0.0,
        0.0,
        0.17082860872947386,
        0.12546768756682242,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],

    [
        0.037109375,
        0.0,
        0.0,
        0.17025221101954405,
        0.06021653898045596,
        -0.017578125,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],

    [
        0.03709200011850479,
        0.0,
        0.0,
        0.17038392571223998,
        0.10726203044637328,
        -0.015319437748624402,
        0.008273789163814023,
        0.0,
        0.0,
        0.0,
        0.0,
    ],

    [
        0.6241109587160757,
        0.0,
        0.0,
        -3.3608926294469414,
        -0.868219346841726,
        27.59209969944671,
        20.154067550477894,
        -43.48988418106996,
        0.0,
        0.0,
        0.0,
    ],

    [
        0.47766253643826434,
        0.0,
        0.0,
        -2.4881146199716677,
        -0.590290826836843,
        21.230051448181193,
        15.279233632882423,
        -33.28821096898486,
        -0.020331201708508627,
        0.0,
        0.0,
    ],

    [
        -0.9371424300859873,
        0.0,
        0.0,
        5.186372428844064,
        1.0914373489967295,
        -8.149787010746927,
        -18.52006565999696,
        22.739487099350505,
        2.4936055526796523,
        -3.0467644718982196,
        0.0,
    ],

    [
        2.273310147516538,
        0.0,
        0.0,
        -10.53449546673725,
        -2.0008720582248625,
        -17.9589318631188,
        27.94888452941996,
        -2.8589982771350235,
        -8.87285693353063,
        12.360567175794303,
        0.6433927460157636,
    ],

];

/// Eighth-order weights.
const B: [f64; STAGES] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];

/// Fifth-order error weights.
const E5: [f64; STAGES] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
];

/// Third-order error weights on stages 0, 8 and 11.
const BHH: [f64; 3] = [0.2440944881889764, 0.7338466882816118, 0.022058823529411766];

/// Integrate `y' = f(x, y)` from `x0` to `x1` with mixed absolute/relative
/// local error `tol * max(1, |y_i|)`.
pub fn integrate<const D: usize, F>(
    f: F,
    x0: f64,
    x1: f64,
    y0: [Complex64; D],
    tol: f64,
) -> Result<[Complex64; D], MonodromyError>
where
    F: Fn(f64, &[Complex64; D]) -> [Complex64; D],
{
    let zero = Complex64::new(0.0, 0.0);
    let span = x1 - x0;
    let mut x = x0;
    let mut y = y0;
    let mut k = [[zero; D]; STAGES];
    k[0] = f(x, &y);
    let mut h = initial_step(&k[0], &y, span, tol);
    let h_min = 1e-14 * span.abs().max(1.0);
    let mut rejected_last = false;
    let mut steps = 0usize;
    while x < x1 {
        steps += 1;
        if steps > 1_000_000 {
            return Err(MonodromyError::StepUnderflow { x });
        }
        if x + h > x1 {
            h = x1 - x;
        }
        let mut ytmp = [zero; D];
        for s in 1..STAGES {
            for i in 0..D {
                let mut acc = zero;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += kj[i] * A[s][j];
                }
                ytmp[i] = y[i] + acc * h;
            }
            k[s] = f(x + C[s] * h, &ytmp);
        }
        let mut ynew = [zero; D];
        let (mut e5, mut e3) = (0.0f64, 0.0f64);
        for i in 0..D {
            let mut incr = zero;
            let mut err5 = zero;
            for s in 0..STAGES {
                incr += k[s][i] * B[s];
                err5 += k[s][i] * E5[s];
            }
            let err3 = incr - k[0][i] * BHH[0] - k[8][i] * BHH[1] - k[11][i] * BHH[2];
            ynew[i] = y[i] + incr * h;
            let scale = tol * y[i].norm().max(ynew[i].norm()).max(1.0);
            e5 += (err5.norm() / scale).powi(2);
            e3 += (err3.norm() / scale).powi(2);
        }
        // combined estimate, the fifth-order part damped by the third-order one
        let deno = if e5 + 0.01 * e3 > 0.0 { e5 + 0.01 * e3 } else { 1.0 };
        let err = h.abs() * e5 / (deno * D as f64).sqrt();
        if !err.is_finite() {
            return Err(MonodromyError::NonFinite { x });
        }
        let fac = if err == 0.0 { 6.0 } else { (0.9 * err.powf(-0.125)).clamp(0.333, 6.0) };
        if err <= 1.0 {
            x += h;
            y = ynew;
            k[0] = f(x, &y);
            h *= if rejected_last { fac.min(1.0) } else { fac };
            rejected_last = false;
        } else {
            h *= fac.min(1.0);
            rejected_last = true;
            if h < h_min {
                return Err(MonodromyError::StepUnderflow { x });
            }
        }
    }
    Ok(y)
}

fn initial_step<const D: usize>(f0: &[Complex64; D], y0: &[Complex64; D], span: f64, tol: f64) -> f64 {
    let d0 = y0.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let d1 = f0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let h = if d1 <= 1e-12 { 1e-3 } else { 0.05 * d0 / d1 };
    (h * tol.powf(0.125) / 1e-2).clamp(1e-8, span.abs())
}
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        // y'' = -w^2 y, y(0) = 1, y'(0) = 0
        let w = 3.5;
        let f = |_x: f64, y: &[Complex64; 2]| [y[1], -w * w * y[0]];
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let y = integrate(f, 0.0, 2.0, [one, zero], 1e-12).unwrap();
        assert!((y[0] - (2.0 * w).cos()).norm() < 1e-10);
        assert!((y[1] + w * (2.0 * w).sin()).norm() < 1e-9);
    }

    #[test]
    fn complex_exponential() {
        let lam = Complex64::new(2.0, 0.3);
        let f = |_x: f64, y: &[Complex64; 1]| [Complex64::new(0.0, -1.0) * lam * y[0]];
        let y = integrate(f, 0.0, std::f64::consts::PI, [Complex64::new(1.0, 0.0)], 1e-12).unwrap();
        let exact = (Complex64::new(0.0, -std::f64::consts::PI) * lam).exp();
        assert!((y[0] - exact).norm() < 1e-10 * exact.norm().max(1.0));
    }
}
