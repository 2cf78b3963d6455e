//! Frozen reference values (50-digit mpmath) for the Bessel and Gamma routines.
//! Bessel entries are (ν, z, e^{−z}I_ν, e^{z}K_ν, e^{−z}I′_ν, e^{z}K′_ν).

use magcount::special_functions::{bessel_ik, bessel_ik_log, bessel_ik_scaled, gamma_fn};
use proptest::prelude::*;

const BESSEL_REF: [(f64, f64, f64, f64, f64, f64); 35] = [
    (0.0, 9.9999999999999998e-13, 0.999999999999, 27.746952631614708, 4.9999999999949999e-13, -1000000000001.0),
    (0.0, 0.0001, 0.99990000749958335, 9.3272045872745339, 4.999500031248542e-5, -10000.999558638937),
    (0.0, 0.5, 0.64503527044915007, 1.5241093857739095, 0.1564208031848717, -2.7310097082117857),
    (0.0, 1.0, 0.46575960759364044, 1.144463079806895, 0.20791041534970845, -1.6361534862632582),
    (0.0, 2.0, 0.30850832255367104, 0.84156821507077142, 0.21526928924893766, -1.0334768470686886),
    (0.0, 10.0, 0.12783333716342861, 0.39163193443659867, 0.12126268138445552, -0.41076657059578875),
    (0.0, 60.0, 0.051611549173609841, 0.16146817823629393, 0.051179630189028718, -0.16280823094404427),
    (0.0, 700.0, 0.015081295651531358, 0.047362369454613572, 0.015070519444716847, -0.047396187653494544),
    (0.0, 10000.0, 0.0039894726746047321, 0.012532984717699285, 0.0039892731959836623, -0.012533611351270506),
    (0.5, 0.29999999999999999, 0.32863009259125285, 2.2882280821594225, 0.58038432721276451, -6.1019415524251269),
    (1.0, 1.0e-8, 4.9999999500000004e-9, 100000000.99999991, 0.49999999500000004, -10000000100000009.0),
    (1.0, 1.0, 0.20791041534970845, 1.6361534862632582, 0.25784919224393199, -2.7806165660701533),
    (1.0, 3.7000000000000002, 0.18383785802735623, 0.71300650104957612, 0.16636353409801258, -0.82492251894186935),
    (1.0, 100.0, 0.039744153025130253, 0.12579995047957853, 0.03954693776884538, -0.12643362116392236),
    (1.5, 2.2000000000000002, 0.15151237624462802, 1.2290679549110504, 0.16236074048170353, -1.6829850973497905),
    (2.0, 0.001, 1.2487507288542741e-7, 2002000.4998341392, 0.00024975016658336653, -4004002000.6650129),
    (2.0, 5.0, 0.11795190583151141, 0.78791710782884402, 0.11679150461193779, -0.91544070191985019),
    (2.5, 0.01, 5.2663407950484643e-7, 379766.71674796971, 0.00013165927220941672, -94942945.034271115),
    (2.5, 40.0, 0.058465711408685896, 0.21340040418047366, 0.057847248261198533, -0.21645804926358767),
    (3.0, 7.5, 0.078571963371959865, 0.78816782167503191, 0.080076054982330436, -0.89370254345253395),
    (3.2999999999999998, 1.8999999999999999, 0.017520457231778677, 7.4522378382862517, 0.034157286467281051, -15.511442607564849),
    (5.0, 0.20000000000000001, 6.8341356618234106e-8, 1462025.1983783109, 1.7096726669832414e-6, -36587150.206273729),
    (7.25, 12.0, 0.012725772067256811, 2.8019836322307353, 0.014482532310991238, -3.3596008649791211),
    (10.0, 1.0, 1.0127529864692066e-10, 491229652.09901986, 1.0173477208908413e-9, -4939493042.0999715),
    (10.0, 30.0, 0.013646390946186457, 1.158714876451886, 0.014179058192301943, -1.2387046317590614),
    (12.5, 250.0, 0.018458508130391718, 0.10821614560022167, 0.018444705445123988, -0.10856701179970894),
    (20.0, 3.0, 7.572443832391637e-17, 326483251275269.91, 5.1021237798038121e-16, -2202162749839027.9),
    (20.0, 80.0, 0.003657588077949455, 1.6577768041811172, 0.0037485939552204366, -1.7185281007001559),
    (33.299999999999997, 5.0, 5.781981676568706e-27, 2.5680514590928142e+24, 3.8927271403418828e-26, -1.7300774971205433e+25),
    (50.0, 1.0, 1.0795919973373182e-80, 9.2609058101020406e+77, 5.3990183104558714e-79, -4.6313977950162007e+79),
    (50.0, 60.0, 1.1124803610686486e-10, 57544950.780896889, 1.4426723710071416e-10, -75190681.122450078),
    (50.0, 2500.0, 0.0048392531050250506, 0.041320429339887019, 0.0048392532986726299, -0.041336952557133692),
    (0.29999999999999999, 9.9999999999999995e-7, 0.014344000439358052, 116.16474677095781, 4303.2001318129326, -34866134.34638048),
    (0.69999999999999996, 1500.0, 0.010299821093777407, 0.032363019951572462, 0.010296388369769841, -0.032373809349767802),
    (4.0, 10000.0, 0.003986282213329902, 0.012543014615298247, 0.0039860832131703441, -0.012543642753692613),
];
const GAMMA_REF: [(f64, f64); 11] = [
    (0.1, 9.51350769866873184),
    (0.5, 1.77245385090551603),
    (1.0, 1.0),
    (1.5, 0.886226925452758014),
    (2.5, 1.32934038817913702),
    (3.7, 4.17065178379660317),
    (7.3, 1271.42363366390927),
    (10.0, 362880.0),
    (25.5, 3.08677054052869678e+24),
    (50.0, 6.08281864034267561e+62),
    (99.9, 5.89173215164436166e+155),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn scaled_values_match_reference() {
    for &(nu, z, i, k, ip, kp) in BESSEL_REF.iter() {
        let s = bessel_ik_scaled(nu, z).unwrap();
        assert!(rel(s.i_val, i) < 1e-12, "I nu={nu} z={z}: {} vs {i}", s.i_val);
        assert!(rel(s.k_val, k) < 1e-12, "K nu={nu} z={z}: {} vs {k}", s.k_val);
        assert!(rel(s.i_deriv, ip) < 1e-11, "I' nu={nu} z={z}: {} vs {ip}", s.i_deriv);
        assert!(rel(s.k_deriv, kp) < 1e-11, "K' nu={nu} z={z}: {} vs {kp}", s.k_deriv);
    }
}

#[test]
fn gamma_matches_reference() {
    for &(x, g) in GAMMA_REF.iter() {
        assert!(rel(gamma_fn(x).unwrap(), g) < 1e-13, "x={x}");
    }
}

#[test]
fn derivative_recurrences_hold() {
    for &(nu, z) in &[(1.0, 0.3), (2.5, 4.0), (7.0, 60.0), (20.0, 3.0), (49.0, 200.0)] {
        let lo = bessel_ik(nu - 1.0, z).unwrap();
        let mid = bessel_ik(nu, z).unwrap();
        let hi = bessel_ik(nu + 1.0, z).unwrap();
        assert!(rel(mid.i_deriv, 0.5 * (lo.i_val + hi.i_val)) < 1e-12);
        assert!(rel(mid.k_deriv, -0.5 * (lo.k_val + hi.k_val)) < 1e-12);
    }
}

#[test]
fn small_z_product_tends_to_power_law() {
    // I_α(κr)K_α(κr′) → (r/r′)^α/(2α) for r ≤ r′ as κ → 0.
    let kappa = 1e-6;
    for &alpha in &[0.5, 1.0, 2.5, 4.0] {
        for &(r, rp) in &[(0.3, 0.9), (1.0, 2.0), (0.5, 7.0)] {
            let a = bessel_ik(alpha, kappa * r).unwrap();
            let b = bessel_ik(alpha, kappa * rp).unwrap();
            let limit = (r / rp).powf(alpha) / (2.0 * alpha);
            assert!(rel(a.i_val * b.k_val, limit) < 1e-4, "alpha={alpha}");
        }
    }
}

proptest! {
    #[test]
    fn wronskian_identity(nu in 0.0f64..49.0, lz in -12.0f64..4.0) {
        let z = 10f64.powf(lz);
        let a = bessel_ik_log(nu, z).unwrap();
        let b = bessel_ik_log(nu + 1.0, z).unwrap();
        let lz = z.ln();
        let w = (a.ln_i + b.ln_k + lz).exp() + (a.ln_k + b.ln_i + lz).exp();
        prop_assert!((w - 1.0).abs() < 1e-10, "nu={} z={} w={}", nu, z, w);
    }

    #[test]
    fn positivity_and_monotonicity(nu in 0.0f64..50.0, lz in -12.0f64..3.5, f in 1.01f64..3.0) {
        let z = 10f64.powf(lz);
        let a = bessel_ik_log(nu, z).unwrap();
        let b = bessel_ik_log(nu, z * f).unwrap();
        prop_assert!(a.ln_i.is_finite() && a.ln_k.is_finite());
        prop_assert!(b.ln_k < a.ln_k);
        prop_assert!(b.ln_i > a.ln_i);
    }
}
