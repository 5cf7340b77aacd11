use super::netlists::*;
use super::*;
use crate::design::CalibrationTable;
use crate::mna::solve_sparams;
use crate::netcore::{abcd_to_s, mag_db, omega, FrequencyGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R1_4DB: f64 = 11.3127;
const R2_4DB: f64 = 104.8288;

fn rel(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn assert_sparams_close(a: &SParams2, b: &SParams2, tol: f64) {
    for (x, y, name) in [
        (a.s11, b.s11, "s11"),
        (a.s21, b.s21, "s21"),
        (a.s12, b.s12, "s12"),
        (a.s22, b.s22, "s22"),
    ] {
        let err = (x - y).norm() / y.norm().max(1.0e-3);
        assert!(err <= tol, "{name}: {x} vs {y} (rel {err:e})");
    }
}

fn sample_ttype(rng: &mut impl Rng) -> TTypeUnitSpec {
    TTypeUnitSpec {
        r1: ResistorModel::new(rng.gen_range(2.0..30.0), rng.gen_range(0.0..15e-15)).unwrap(),
        r2: ResistorModel::new(rng.gen_range(20.0..400.0), rng.gen_range(0.0..15e-15)).unwrap(),
        c_comp: rng.gen_range(0.0..60e-15),
        series_switch: SwitchModel::new(rng.gen_range(2.0..15.0), rng.gen_range(0.0..40e-15), rng.gen_range(0.0..5e-15)).unwrap(),
        shunt_switch: SwitchModel::new(rng.gen_range(2.0..30.0), rng.gen_range(1e-15..40e-15), rng.gen_range(0.0..5e-15)).unwrap(),
    }
}

fn sample_simplified(rng: &mut impl Rng) -> SimplifiedTUnitSpec {
    SimplifiedTUnitSpec {
        r1: ResistorModel::new(rng.gen_range(1.0..15.0), rng.gen_range(0.0..5e-15)).unwrap(),
        r2: ResistorModel::new(rng.gen_range(20.0..400.0), rng.gen_range(0.0..15e-15)).unwrap(),
        c_comp: rng.gen_range(0.0..40e-15),
        shunt_switch: SwitchModel::new(rng.gen_range(2.0..30.0), rng.gen_range(1e-15..40e-15), rng.gen_range(0.0..5e-15)).unwrap(),
    }
}

fn sample_continuous(rng: &mut impl Rng) -> ContinuousUnitSpec {
    let r_min = rng.gen_range(5.0..50.0);
    ContinuousUnitSpec {
        r2: ResistorModel::new(rng.gen_range(5.0..100.0), rng.gen_range(0.0..10e-15)).unwrap(),
        fet: ContinuousFetModel::new(r_min, r_min + rng.gen_range(100.0..1e5), 0.0, 1.2, rng.gen_range(1.0..10.0)).unwrap(),
    }
}

#[test]
fn eq1_resistive_limit() {
    let (r1, r2, ron, z0) = (R1_4DB, R2_4DB, 10.0, 50.0);
    let s = eval_eq1(r1, r2, ron, 0.0, z0, omega(37e9)).unwrap();
    let za = z0 + r1;
    let expect = 2.0 * z0 * (r2 + ron) / (za * za + 2.0 * (r2 + ron) * za);
    assert_eq!(s.im, 0.0);
    assert!((s.re - expect).abs() < 1e-15);
    assert!((s.norm() - 0.64365).abs() < 5e-6);
}

#[test]
fn eq1_matches_oracle_examples() {
    let net = eq1_netlist(R1_4DB, R2_4DB, 10.0, 0.0).unwrap();
    let dc = solve_sparams(&net, 0.0, 50.0).unwrap().s.s21;
    let cf = eval_eq1(R1_4DB, R2_4DB, 10.0, 0.0, 50.0, 0.0).unwrap();
    assert!(rel(cf, dc) < 1e-12);

    let w = omega(60e9);
    let net = eq1_netlist(R1_4DB, R2_4DB, 10.0, 20e-15).unwrap();
    let oracle = solve_sparams(&net, w, 50.0).unwrap().s.s21;
    let cf = eval_eq1(R1_4DB, R2_4DB, 10.0, 20e-15, 50.0, w).unwrap();
    assert!(rel(cf, oracle) < 1e-9, "{cf} vs {oracle}");
}

#[test]
fn eq1_rejects_nonpositive() {
    assert!(eval_eq1(0.0, 1.0, 1.0, 0.0, 50.0, 1.0).is_err());
    assert!(eval_eq2(1.0, 1.0, -1.0, 0.0, 50.0, 1.0).is_err());
}

#[test]
fn eq2_zero_cases() {
    assert_eq!(eval_eq2(R1_4DB, R2_4DB, 10.0, 20e-15, 50.0, 0.0).unwrap(), 0.0);
    assert_eq!(eval_eq2(R1_4DB, R2_4DB, 10.0, 0.0, 50.0, omega(60e9)).unwrap(), 0.0);
}

#[test]
fn eq2_is_first_order_phase() {
    let c = 20e-15;
    let resid = |f: f64| {
        let w = omega(f);
        let exact = eval_eq1(R1_4DB, R2_4DB, 10.0, c, 50.0, w).unwrap().arg();
        (exact - eval_eq2(R1_4DB, R2_4DB, 10.0, c, 50.0, w).unwrap()).abs()
    };
    let e1 = resid(1e9);
    let e2 = resid(2e9);
    assert!(e1 <= 1e-4);
    assert!((e2 / e1 - 8.0).abs() < 0.1, "ratio {}", e2 / e1);
}

#[test]
fn ideal_reference_state_is_a_through() {
    let spec = TTypeUnitSpec {
        r1: ResistorModel::ideal(R1_4DB),
        r2: ResistorModel::ideal(R2_4DB),
        c_comp: 0.0,
        series_switch: SwitchModel::new(1e-6, 0.0, 0.0).unwrap(),
        shunt_switch: SwitchModel::new(1e-6, 0.0, 0.0).unwrap(),
    };
    let s = abcd_to_s(&ttype_twoport(&spec, BitState::Ref, 0.0).unwrap(), 50.0).unwrap();
    assert!((s.s21.norm() - 1.0).abs() < 1e-4);
}

#[test]
fn attenuation_state_at_dc_matches_closed_form() {
    let spec = TTypeUnitSpec {
        r1: ResistorModel::new(R1_4DB, 8e-15).unwrap(),
        r2: ResistorModel::new(R2_4DB, 8e-15).unwrap(),
        c_comp: 25e-15,
        series_switch: SwitchModel::new(6.0, 10e-15, 0.0).unwrap(),
        shunt_switch: SwitchModel::new(10.0, 15e-15, 0.0).unwrap(),
    };
    let s = abcd_to_s(&ttype_twoport(&spec, BitState::Att, 0.0).unwrap(), 50.0).unwrap();
    let cf = eval_eq1(R1_4DB, R2_4DB, 10.0, 25e-15, 50.0, 0.0).unwrap();
    assert!((s.s21.norm() - cf.norm()).abs() < 1e-14);
}

#[test]
fn ttype_without_parasitics_reduces_to_eq1() {
    let spec = TTypeUnitSpec {
        r1: ResistorModel::ideal(R1_4DB),
        r2: ResistorModel::ideal(R2_4DB),
        c_comp: 20e-15,
        series_switch: SwitchModel::new(5.0, 0.0, 0.0).unwrap(),
        shunt_switch: SwitchModel::new(10.0, 15e-15, 0.0).unwrap(),
    };
    for f in [20e9, 60e9, 100e9] {
        let w = omega(f);
        let s = abcd_to_s(&ttype_twoport(&spec, BitState::Att, w).unwrap(), 50.0).unwrap();
        let cf = eval_eq1(R1_4DB, R2_4DB, 10.0, 20e-15, 50.0, w).unwrap();
        assert!(rel(s.s21, cf) < 1e-12);
    }
}

#[test]
fn units_match_oracle_over_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let grid = FrequencyGrid::log(20e9, 100e9, 50).unwrap();
    for _ in 0..20 {
        let t = sample_ttype(&mut rng);
        let st = sample_simplified(&mut rng);
        let ct = sample_continuous(&mut rng);
        let vc = rng.gen_range(0.0..1.2);
        for state in [BitState::Ref, BitState::Att] {
            let nt = ttype_netlist(&t, state).unwrap();
            let ns = simplified_netlist(&st, state).unwrap();
            for &f in grid.points() {
                let w = omega(f);
                let a = abcd_to_s(&ttype_twoport(&t, state, w).unwrap(), 50.0).unwrap();
                let o = solve_sparams(&nt, w, 50.0).unwrap().s;
                assert_sparams_close(&a, &o, 1e-9);
                let a = abcd_to_s(&simplified_twoport(&st, state, w).unwrap(), 50.0).unwrap();
                let o = solve_sparams(&ns, w, 50.0).unwrap().s;
                assert_sparams_close(&a, &o, 1e-9);
            }
        }
        let nc = continuous_netlist(&ct, vc).unwrap();
        for &f in grid.points() {
            let w = omega(f);
            let a = abcd_to_s(&continuous_twoport(&ct, vc, w).unwrap(), 50.0).unwrap();
            let o = solve_sparams(&nc, w, 50.0).unwrap().s;
            assert_sparams_close(&a, &o, 1e-9);
        }
    }
}

#[test]
fn simplified_series_pad_limit() {
    let r1 = 5.7312;
    let spec = SimplifiedTUnitSpec {
        r1: ResistorModel::ideal(r1),
        r2: ResistorModel::ideal(90.0),
        c_comp: 0.0,
        shunt_switch: SwitchModel::new(10.0, 0.0, 0.0).unwrap(),
    };
    let s = abcd_to_s(&simplified_twoport(&spec, BitState::Ref, 1e3).unwrap(), 50.0).unwrap();
    assert!((s.s21.norm() - 100.0 / (100.0 + 2.0 * r1)).abs() < 1e-12);
}

#[test]
fn simplified_dc_delta_matches_resistive_closed_form() {
    let (z0, r1, r2, ron) = (50.0, 5.7312, 90.0, 1e-9);
    let spec = SimplifiedTUnitSpec {
        r1: ResistorModel::ideal(r1),
        r2: ResistorModel::ideal(r2),
        c_comp: 0.0,
        shunt_switch: SwitchModel::new(ron, 0.0, 0.0).unwrap(),
    };
    let sref = abcd_to_s(&simplified_twoport(&spec, BitState::Ref, 0.0).unwrap(), z0).unwrap();
    let satt = abcd_to_s(&simplified_twoport(&spec, BitState::Att, 0.0).unwrap(), z0).unwrap();
    let delta = mag_db(sref.s21).unwrap() - mag_db(satt.s21).unwrap();
    // |s21_ref / s21_att| = 1 + (z0 + r1) / (2·r2) for an open/shorted shunt
    let closed = 20.0 * (1.0 + (z0 + r1) / (2.0 * (r2 + ron))).log10();
    assert!((delta - closed).abs() < 1e-12);
    let net = simplified_netlist(&spec, BitState::Att).unwrap();
    let o = solve_sparams(&net, 0.0, z0).unwrap().s;
    assert!(rel(o.s21, satt.s21) < 1e-12);
}

fn continuous_spec() -> ContinuousUnitSpec {
    ContinuousUnitSpec {
        r2: ResistorModel::new(20.0, 2e-15).unwrap(),
        fet: ContinuousFetModel::new(15.0, 50_000.0, 0.0, 1.2, 8.0).unwrap(),
    }
}

#[test]
fn continuous_unit_behaviour() {
    let spec = continuous_spec();
    let w = omega(60e9);
    let s = abcd_to_s(&continuous_twoport(&spec, 0.0, w).unwrap(), 50.0).unwrap();
    assert!((s.s21.norm() - 1.0).abs() < 1e-3);
    let mut last = 0.0;
    for k in 1..=60 {
        let vc = 1.2 * k as f64 / 60.0;
        let s = abcd_to_s(&continuous_twoport(&spec, vc, w).unwrap(), 50.0).unwrap();
        let att = -mag_db(s.s21).unwrap();
        assert!(att > last, "attenuation not increasing at vc = {vc}");
        last = att;
    }
    assert!(last > 2.0);
    assert!(continuous_twoport(&spec, 1.5, w).is_err());
}

fn sample_chip(rng: &mut impl Rng) -> AttenuatorChipSpec {
    AttenuatorChipSpec {
        unit4: sample_ttype(rng),
        tl_a: LineSpec { z_c: rng.gen_range(40.0..120.0), theta_ref: rng.gen_range(0.0..0.8), f_ref: 60e9 },
        unit2: sample_simplified(rng),
        tl_b: LineSpec { z_c: rng.gen_range(40.0..120.0), theta_ref: rng.gen_range(0.0..0.8), f_ref: 60e9 },
        cont: sample_continuous(rng),
        z0: 50.0,
    }
}

#[test]
fn chip_with_zero_length_lines_is_product_of_units() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut chip = sample_chip(&mut rng);
    chip.tl_a.theta_ref = 0.0;
    chip.tl_b.theta_ref = 0.0;
    let state = AttenuatorState { bit4: BitState::Att, bit2: BitState::Ref, vc: 0.7 };
    let f = 73e9;
    let w = omega(f);
    let m = ttype_twoport(&chip.unit4, state.bit4, w).unwrap()
        * simplified_twoport(&chip.unit2, state.bit2, w).unwrap()
        * continuous_twoport(&chip.cont, state.vc, w).unwrap();
    let expect = abcd_to_s(&m, 50.0).unwrap();
    let got = chip_twoport(&chip, &state, f).unwrap();
    assert_sparams_close(&got, &expect, 1e-14);
}

#[test]
fn chip_matches_ladder_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let chip = sample_chip(&mut rng);
        for (b4, b2) in [(BitState::Ref, BitState::Ref), (BitState::Att, BitState::Att)] {
            let state = AttenuatorState { bit4: b4, bit2: b2, vc: rng.gen_range(0.0..1.2) };
            let net = chip_netlist(&chip, &state).unwrap();
            for f in [20e9, 55e9, 100e9] {
                let a = chip_twoport(&chip, &state, f).unwrap();
                let o = solve_sparams(&net, omega(f), 50.0).unwrap().s;
                let err = (a.s21.norm() - o.s21.norm()).abs() / a.s21.norm();
                assert!(err < 1e-3, "|s21| ladder error {err:e} at {f}");
            }
        }
    }
}

#[test]
fn compensation_adds_phase_lag() {
    let w = omega(60e9);
    let mut last = f64::INFINITY;
    for k in 0..=50 {
        let c = k as f64 * 1e-15;
        let spec = TTypeUnitSpec {
            r1: ResistorModel::new(R1_4DB, 4e-15).unwrap(),
            r2: ResistorModel::new(R2_4DB, 4e-15).unwrap(),
            c_comp: c,
            series_switch: SwitchModel::new(6.0, 8e-15, 0.0).unwrap(),
            shunt_switch: SwitchModel::default_shunt(),
        };
        let s = abcd_to_s(&ttype_twoport(&spec, BitState::Att, w).unwrap(), 50.0).unwrap();
        let ph = s.s21.arg();
        assert!(ph < last, "phase did not decrease at c_comp = {c:e}");
        last = ph;
    }
}

#[test]
fn reciprocity_and_passivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let grid = FrequencyGrid::linear(20e9, 100e9, 17).unwrap();
    for _ in 0..10 {
        let chip = sample_chip(&mut rng);
        for b4 in [BitState::Ref, BitState::Att] {
            for b2 in [BitState::Ref, BitState::Att] {
                let state = AttenuatorState { bit4: b4, bit2: b2, vc: rng.gen_range(0.0..1.2) };
                for &f in grid.points() {
                    let s = chip_twoport(&chip, &state, f).unwrap();
                    assert!((s.s12 - s.s21).norm() <= 1e-9 * s.s21.norm().max(1.0));
                    assert!(s.s21.norm() <= 1.0 + 1e-9);
                    assert!(s.s11.norm() <= 1.0 + 1e-9);
                    assert!(s.s11.norm_sqr() + s.s21.norm_sqr() <= 1.0 + 1e-9);
                    let m = chip_abcd(&chip, &state, f).unwrap();
                    assert!((m.det() - 1.0).norm() <= 1e-9);
                }
            }
        }
    }
}

fn table_for(f0: f64) -> CalibrationTable {
    let entries = (0..=20)
        .map(|k| {
            let t = k as f64 / 10.0;
            (t, 0.05 * k as f64, t)
        })
        .collect();
    CalibrationTable::new(f0, entries).unwrap()
}

fn nominal_chip() -> AttenuatorChipSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    sample_chip(&mut rng)
}

#[test]
fn enumerate_coarse_and_fine() {
    let chip = nominal_chip();
    let table = table_for(60e9);
    let coarse = enumerate_states(&chip, 0.5, 60e9, &table).unwrap();
    assert_eq!(coarse.len(), 16);
    assert_eq!(coarse[0].state.bit4, BitState::Ref);
    assert_eq!(coarse[0].state.bit2, BitState::Ref);
    assert_eq!(coarse[0].state.vc, 0.0);
    assert_eq!(coarse[0].label(), "0.0dB");
    // 4.5 dB = unit4 + 0.5 dB continuous
    let s = coarse[9];
    assert_eq!(s.nominal_db, 4.5);
    assert_eq!((s.state.bit4, s.state.bit2), (BitState::Att, BitState::Ref));
    assert!((s.state.vc - 0.25).abs() < 1e-12);
    // 7.5 dB = both bits + 1.5 dB
    let s = coarse[15];
    assert_eq!((s.state.bit4, s.state.bit2), (BitState::Att, BitState::Att));
    assert!((s.state.vc - 0.75).abs() < 1e-12);

    let fine = enumerate_states(&chip, 0.1, 60e9, &table).unwrap();
    assert_eq!(fine.len(), 76);
    assert_eq!(fine[75].nominal_db, 7.5);
    // 3.9 dB stays on the 2-dB bit with 1.9 dB continuous
    let s = fine[39];
    assert_eq!((s.state.bit4, s.state.bit2), (BitState::Ref, BitState::Att));
    assert!((s.state.vc - 0.95).abs() < 1e-12);
}

#[test]
fn enumerate_errors() {
    let chip = nominal_chip();
    let table = table_for(60e9);
    assert!(enumerate_states(&chip, 0.7, 60e9, &table).is_err());
    assert!(enumerate_states(&chip, 0.5, 30e9, &table).is_err());
    let short = CalibrationTable::new(60e9, vec![(0.0, 0.0, 0.0), (1.0, 0.5, 1.0)]).unwrap();
    assert!(matches!(
        enumerate_states(&chip, 0.5, 60e9, &short),
        Err(Error::MissingCalibration { .. })
    ));
}
