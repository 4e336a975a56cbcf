use std::collections::BTreeMap;
use std::path::Path;

use clap::ValueEnum;
use num_bigint::BigUint;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use salem_core::dimension_lab::{
    box_dim_fit_levels, cantor_box_levels, fourier_decay_fit, verify_cover_sum, verify_decay_bound, verify_effective_g, verify_vanishing_window,
    BoundReport,
};
use salem_core::hyperspace::{cover_check, validate_tree_code, CoverVerdict, HausdorffBall, MeasureTreeCode};
use salem_core::kaufman_engine::coeffs::CoefficientTable;
use salem_core::kaufman_engine::levels::{density_coefficients, s_level};
use salem_core::kaufman_engine::schedule::{stage_m0, theta_schedule, KaufmanSchedule, Mode};
use salem_core::rat::{fmt_q, parse_q, Q};
use salem_core::salem_constructions::{
    big_f_level, cantor_level, f_level, g_construction_level, g_profile_trace, h_level, t_level, weihrauch_decode,
    weihrauch_encode, BitMatrixPrefix, LowerRealPrefix,
};
use salem_core::{IntervalUnion, Result, SalemError};

use crate::output::{sha256_hex, to_json, Artifacts};
use crate::{
    error_code, Cli, CodecArgs, CodecOp, Command, ConstructArgs, ConstructKind, CoverArgs, EstimateArgs, EstimateKind, Outcome,
    Suite, VerifyArgs,
};

fn value_name<V: ValueEnum>(v: &V) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

pub fn command_name(c: &Command) -> String {
    match c {
        Command::Construct(a) => format!("construct {}", value_name(&a.kind)),
        Command::Verify(a) => format!("verify {}", value_name(&a.suite)),
        Command::Estimate(a) => format!("estimate {}", value_name(&a.kind)),
        Command::Codec(a) => format!("codec {}", value_name(&a.op)),
        Command::CoverCheck(_) => "cover-check".into(),
    }
}

pub fn parameters(cli: &Cli) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("seed".into(), cli.seed.to_string());
    if let Some(c) = &cli.relaxed_c {
        m.insert("relaxed_c".into(), c.clone());
    }
    m.insert("args".into(), format!("{:?}", cli.command));
    m
}

pub fn run(cli: &Cli, mode: &Mode, inputs: &mut BTreeMap<String, String>, art: &mut Artifacts) -> Outcome {
    let r = match &cli.command {
        Command::Construct(a) => construct(cli, a, mode, art),
        Command::Verify(a) => verify(cli, a, mode, inputs, art),
        Command::Estimate(a) => estimate(cli, a, mode, inputs, art),
        Command::Codec(a) => codec(cli, a, art),
        Command::CoverCheck(a) => cover(cli, a, inputs, art),
    };
    match r {
        Ok(code) => Outcome { code, message: None },
        Err(e) => Outcome { code: error_code(&e), message: Some(e.to_string()) },
    }
}

fn need<'a>(v: &'a Option<String>, name: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| SalemError::invalid(format!("--{name} is required")))
}

fn q_arg(v: &Option<String>, name: &str) -> Result<Q> {
    parse_q(need(v, name)?)
}

pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .filter(|c| !matches!(c, ',' | ' '))
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(SalemError::Parse(format!("bit string contains {c:?}"))),
        })
        .collect()
}

fn parse_prefix(s: &str) -> Result<LowerRealPrefix> {
    LowerRealPrefix::new(s.split(',').map(|t| parse_q(t.trim())).collect::<Result<Vec<_>>>()?)
}

fn parse_matrix(s: &str) -> Result<BitMatrixPrefix> {
    BitMatrixPrefix::new(s.split(';').map(parse_bits).collect::<Result<Vec<_>>>()?)
}

fn read_json<T: DeserializeOwned>(path: &Path, inputs: &mut BTreeMap<String, String>) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| SalemError::invalid(format!("reading {}: {e}", path.display())))?;
    inputs.insert(path.display().to_string(), sha256_hex(&bytes));
    serde_json::from_slice(&bytes).map_err(|e| SalemError::Parse(format!("{}: {e}", path.display())))
}

fn construct(cli: &Cli, a: &ConstructArgs, mode: &Mode, art: &mut Artifacts) -> Result<u8> {
    let level: IntervalUnion = match a.kind {
        ConstructKind::Cantor => cantor_level(a.k)?,
        ConstructKind::SLevel => {
            let mut data = s_level(&q_arg(&a.alpha, "alpha")?, a.k, mode)?;
            let level = data.level.take().expect("s_level fills the level");
            art.side(&cli.out, ".schedules.json", to_json(&data));
            level
        }
        ConstructKind::TLevel => {
            let t = t_level(&q_arg(&a.alpha, "alpha")?, a.k, mode)?;
            art.main(&cli.out, to_json(&t));
            return Ok(0);
        }
        ConstructKind::G => {
            let q = q_arg(&a.q, "q")?;
            let x = parse_bits(&a.x)?;
            if a.trace {
                art.main(&cli.out, to_json(&g_profile_trace(&q, &x, a.k, mode)?));
                return Ok(0);
            }
            g_construction_level(&q, &x, a.k, mode)?
        }
        ConstructKind::F => {
            let p = parse_prefix(need(&a.p, "p")?)?;
            f_level(&p, &parse_bits(&a.x)?, a.k, a.n_max, mode)?
        }
        ConstructKind::BigF => {
            let p = parse_prefix(need(&a.p, "p")?)?;
            big_f_level(&p, &parse_matrix(need(&a.matrix, "matrix")?)?, a.k, a.m_max, mode)?
        }
        ConstructKind::H => {
            let p = q_arg(&a.alpha, "alpha")?;
            h_level(&parse_matrix(need(&a.matrix, "matrix")?)?, &p, a.k, a.m_max, mode)?
        }
    };
    art.main(&cli.out, to_json(&level));
    Ok(0)
}

fn report(cli: &Cli, r: &BoundReport, art: &mut Artifacts) -> u8 {
    let csv = cli.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
    let bytes = if csv {
        format!("lemma,checked_band,max_violation,pass\n{}\n", r.to_csv_row()).into_bytes()
    } else {
        to_json(r)
    };
    art.main(&cli.out, bytes);
    u8::from(!r.pass)
}

fn default_zeta(a: &VerifyArgs, m: u64) -> Result<Q> {
    match &a.zeta {
        Some(z) => parse_q(z),
        None => Ok(Q::new(1.into(), (m * m).into())),
    }
}

/// A schedule plus the number of stages folded into its `ψ`.
#[derive(Serialize, Deserialize)]
struct EffectiveGInput {
    schedule: KaufmanSchedule,
    #[serde(default)]
    psi_k: u64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScheduleFile {
    Wrapped(EffectiveGInput),
    Bare(KaufmanSchedule),
}

fn verify(cli: &Cli, a: &VerifyArgs, mode: &Mode, inputs: &mut BTreeMap<String, String>, art: &mut Artifacts) -> Result<u8> {
    let m = || a.m.ok_or_else(|| SalemError::invalid("--M is required"));
    let r = match a.suite {
        Suite::Window => {
            let m = m()?;
            verify_vanishing_window(m, &default_zeta(a, m)?)?
        }
        Suite::Decay => {
            let m = m()?;
            verify_decay_bound(m, &default_zeta(a, m)?, a.n, a.band.unwrap_or(1000))?
        }
        Suite::EffectiveG => {
            let band = a.band.unwrap_or(512);
            let (s, psi_k) = match &a.input {
                Some(p) => {
                    match read_json(p, inputs)? {
                        ScheduleFile::Wrapped(w) => (w.schedule, w.psi_k),
                        ScheduleFile::Bare(s) => (s, 0),
                    }
                }
                None => {
                    let alpha = q_arg(&a.alpha, "alpha")?;
                    let psi = psi_table(&alpha, a.psi_k, band, mode)?;
                    let eps = match &a.epsilon {
                        Some(e) => parse_q(e)?,
                        None => Q::new(1.into(), 2.into()),
                    };
                    let m0 = match &a.m0 {
                        Some(v) => v.parse::<BigUint>().map_err(|e| SalemError::Parse(format!("--m0: {e}")))?,
                        None => stage_m0(&alpha, mode.m0_scale, a.psi_k + 1),
                    };
                    let s = theta_schedule(&alpha, &psi, &eps, &m0, mode)?;
                    let wrapped = EffectiveGInput { schedule: s, psi_k: a.psi_k };
                    art.side(&cli.out, ".input.json", to_json(&wrapped));
                    (wrapped.schedule, wrapped.psi_k)
                }
            };
            let psi = psi_table(&s.alpha, psi_k, band, mode)?;
            verify_effective_g(&s, &psi, band, mode.caps.max_sieve)?
        }
        Suite::CoverSum => {
            let trace = match &a.input {
                Some(p) => read_json(p, inputs)?,
                None => {
                    let x = parse_bits(&a.x)?;
                    let k = a.k.unwrap_or(x.len() as u64);
                    g_profile_trace(&q_arg(&a.q, "q")?, &x, k, mode)?
                }
            };
            verify_cover_sum(&trace)?
        }
        Suite::TreeCode => {
            let code: MeasureTreeCode = match &a.input {
                Some(p) => read_json(p, inputs)?,
                None => MeasureTreeCode::stick_breaking(a.depth, cli.seed),
            };
            let check = validate_tree_code(&code);
            art.main(&cli.out, to_json(&check));
            return Ok(u8::from(!check.valid));
        }
    };
    Ok(report(cli, &r, art))
}

fn psi_table(alpha: &Q, k: u64, band: usize, mode: &Mode) -> Result<CoefficientTable> {
    if k == 0 {
        Ok(CoefficientTable::delta(band))
    } else {
        density_coefficients(alpha, k, band, mode)
    }
}

#[derive(Deserialize)]
struct ScaledLevel {
    j: u32,
    level: IntervalUnion,
}

fn estimate(cli: &Cli, a: &EstimateArgs, mode: &Mode, inputs: &mut BTreeMap<String, String>, art: &mut Artifacts) -> Result<u8> {
    let bytes = match a.kind {
        EstimateKind::Box => {
            let levels: Vec<(u32, IntervalUnion)> = if let Some(p) = &a.input {
                let v: Vec<ScaledLevel> = read_json(p, inputs)?;
                v.into_iter().map(|s| (s.j, s.level)).collect()
            } else if let Some(d) = a.cantor {
                cantor_box_levels(d)?
            } else if let Some(d) = a.full {
                (1..=d).map(|j| (j, IntervalUnion::unit())).collect()
            } else {
                return Err(SalemError::invalid("one of --input, --cantor, --full is required"));
            };
            to_json(&box_dim_fit_levels(&levels)?)
        }
        EstimateKind::Fourier => {
            let table: CoefficientTable = match &a.input {
                Some(p) => read_json(p, inputs)?,
                None => density_coefficients(&q_arg(&a.alpha, "alpha")?, a.k, a.band, mode)?,
            };
            to_json(&fourier_decay_fit(&table, a.band_lo)?)
        }
    };
    art.main(&cli.out, bytes);
    Ok(0)
}

fn bits_string(bits: &[u8]) -> String {
    bits.iter().map(|b| b.to_string()).collect()
}

fn codec(cli: &Cli, a: &CodecArgs, art: &mut Artifacts) -> Result<u8> {
    let line = match a.op {
        CodecOp::Encode => fmt_q(&weihrauch_encode(&parse_bits(need(&a.bits, "bits")?)?, a.d)?),
        CodecOp::Decode => {
            let v = q_arg(&a.value, "value")?;
            let bits = match a.count {
                Some(c) => weihrauch_decode(&v, c, a.d)?,
                None => shortest_decoding(&v, a.d)?,
            };
            bits_string(&bits)
        }
    };
    art.main(&cli.out, format!("{line}\n").into_bytes());
    Ok(0)
}

/// Smallest bit count whose decoding re-encodes to exactly `v`.
fn shortest_decoding(v: &Q, d: u64) -> Result<Vec<u8>> {
    let mut first_err = None;
    for count in 0..=256 {
        match weihrauch_decode(v, count, d) {
            Ok(bits) => {
                if weihrauch_encode(&bits, d)? == *v {
                    return Ok(bits);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| SalemError::NonCodeword("no finite bit list encodes to this value".into())))
}

fn cover(cli: &Cli, a: &CoverArgs, inputs: &mut BTreeMap<String, String>, art: &mut Artifacts) -> Result<u8> {
    let balls: Vec<HausdorffBall> = read_json(&a.balls, inputs)?;
    for b in &balls {
        b.validate()?;
    }
    let v = cover_check(&balls)?;
    art.main(&cli.out, to_json(&v));
    Ok(u8::from(matches!(v, CoverVerdict::NotCovers { .. })))
}
