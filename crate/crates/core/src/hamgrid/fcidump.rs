//! FCIDUMP reading and writing.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fermion::{IntegralSet, SYMMETRY_TOLERANCE};

/// Entries whose magnitude is at or below this are omitted on write.
pub const WRITE_TOLERANCE: f64 = 0.0;

pub fn parse_fcidump(path: impl AsRef<Path>) -> Result<IntegralSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fcidump_str(&text, path)
}

/// Parses FCIDUMP text; `origin` only labels error messages.
pub fn parse_fcidump_str(text: &str, origin: &Path) -> Result<IntegralSet> {
    let perr = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let mut header = String::new();
    let mut started = false;
    let mut header_end = 0;
    for (no, line) in lines.by_ref() {
        let upper = line.trim().to_ascii_uppercase();
        if !started {
            if upper.is_empty() {
                continue;
            }
            if !upper.starts_with("&FCI") {
                return Err(perr(no, "expected &FCI header".into()));
            }
            started = true;
            header.push_str(&upper[4..]);
        } else {
            header.push(' ');
            header.push_str(&upper);
        }
        header_end = no;
        if let Some(pos) = header.find("&END").or_else(|| header.find('/')) {
            header.truncate(pos);
            break;
        }
    }
    if !started {
        return Err(perr(1, "empty file".into()));
    }
    let fields = header_fields(&header);
    let get = |key: &str| -> Result<Option<i64>> {
        match fields.get(key).and_then(|v| v.first()) {
            None => Ok(None),
            Some(v) => v
                .parse::<i64>()
                .map(Some)
                .map_err(|_| perr(header_end, format!("bad {key} value {v:?}"))),
        }
    };
    let norb = get("NORB")?.ok_or_else(|| perr(header_end, "missing NORB".into()))?;
    let nelec = get("NELEC")?.ok_or_else(|| perr(header_end, "missing NELEC".into()))?;
    let ms2 = get("MS2")?.unwrap_or(0);
    if norb <= 0 || norb > 32 {
        return Err(perr(header_end, format!("NORB={norb} out of range")));
    }
    if nelec < 0 || nelec > 2 * norb {
        return Err(perr(header_end, format!("NELEC={nelec} out of range")));
    }
    let n = norb as usize;
    let mut ints = IntegralSet::zeros(n, nelec as usize);
    ints.ms2 = ms2 as i32;

    let mut seen_h1: HashMap<(usize, usize), f64> = HashMap::new();
    let mut seen_h2: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    let mut seen_core: Option<f64> = None;

    for (no, line) in lines {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(perr(no, format!("expected 5 fields, found {}", toks.len())));
        }
        let value: f64 = toks[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| perr(no, format!("bad value {:?}", toks[0])))?;
        let mut idx = [0usize; 4];
        for k in 0..4 {
            let v: i64 = toks[k + 1]
                .parse()
                .map_err(|_| perr(no, format!("bad index {:?}", toks[k + 1])))?;
            if v < 0 || v > norb {
                return Err(perr(no, format!("index {v} out of range 0..={norb}")));
            }
            idx[k] = v as usize;
        }
        let conflict = |old: f64| (old - value).abs() > SYMMETRY_TOLERANCE;
        match idx {
            [0, 0, 0, 0] => {
                if let Some(old) = seen_core {
                    if conflict(old) {
                        return Err(perr(no, format!("conflicting core energy {value} vs {old}")));
                    }
                }
                seen_core = Some(value);
                ints.core_energy = value;
            }
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let (p, q) = (i - 1, j - 1);
                let key = (p.max(q), p.min(q));
                if let Some(&old) = seen_h1.get(&key) {
                    if conflict(old) {
                        return Err(perr(no, format!("conflicting entry h[{i},{j}]: {value} vs {old}")));
                    }
                }
                seen_h1.insert(key, value);
                ints.set_h1(p, q, value);
            }
            // orbital energies carry no Hamiltonian information
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (p, q, r, s) = (i - 1, j - 1, k - 1, l - 1);
                let key = canonical(p, q, r, s);
                if let Some(&old) = seen_h2.get(&key) {
                    if conflict(old) {
                        return Err(perr(no, format!("conflicting entry ({i}{j}|{k}{l}): {value} vs {old}")));
                    }
                }
                seen_h2.insert(key, value);
                ints.set_h2(p, q, r, s, value);
            }
            _ => return Err(perr(no, format!("unrecognized index pattern {idx:?}"))),
        }
    }
    Ok(ints)
}

fn canonical(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    let (a, b) = (p.max(q), p.min(q));
    let (c, d) = (r.max(s), r.min(s));
    if (a, b) >= (c, d) {
        (a, b, c, d)
    } else {
        (c, d, a, b)
    }
}

/// Splits `KEY=v1,v2, KEY2=...` into key → values.
fn header_fields(header: &str) -> HashMap<String, Vec<String>> {
    let mut out: HashMap<String, Vec<String>> = HashMap::new();
    let mut key = String::new();
    for tok in header.split(|c: char| c == ',' || c.is_whitespace()) {
        if tok.is_empty() {
            continue;
        }
        if let Some((k, v)) = tok.split_once('=') {
            key = k.trim().to_string();
            out.entry(key.clone()).or_default();
            if !v.is_empty() {
                out.get_mut(&key).unwrap().push(v.to_string());
            }
        } else if !key.is_empty() {
            out.get_mut(&key).unwrap().push(tok.to_string());
        }
    }
    out
}

/// Serializes unique entries (`p ≥ q`, `r ≥ s`, `pq ≥ rs`) at full precision.
pub fn fcidump_string(ints: &IntegralSet) -> String {
    let n = ints.n_orbitals;
    let mut s = String::new();
    let _ = writeln!(s, " &FCI NORB={n},NELEC={},MS2={},", ints.n_electrons, ints.ms2);
    let _ = writeln!(s, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(s, "  ISYM=1,");
    let _ = writeln!(s, " &END");
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for t in 0..=r {
                    if p * (p + 1) / 2 + q < r * (r + 1) / 2 + t {
                        continue;
                    }
                    let v = ints.h2(p, q, r, t);
                    if v.abs() > WRITE_TOLERANCE {
                        let _ = writeln!(s, "{v:.17e} {} {} {} {}", p + 1, q + 1, r + 1, t + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.h1(p, q);
            if v.abs() > WRITE_TOLERANCE {
                let _ = writeln!(s, "{v:.17e} {} {} 0 0", p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(s, "{:.17e} 0 0 0 0", ints.core_energy);
    s
}

pub fn write_fcidump(path: impl AsRef<Path>, ints: &IntegralSet) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, fcidump_string(ints)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<IntegralSet> {
        parse_fcidump_str(s, Path::new("test.fcidump"))
    }

    const HEAD: &str = " &FCI NORB=   2,NELEC= 2,MS2=0,\n  ORBSYM=1,1,\n  ISYM=1,\n &END\n";

    #[test]
    fn one_body_and_core_lines() {
        let ints = parse(&format!("{HEAD}0.5 1 1 0 0\n-1.2 0 0 0 0\n")).unwrap();
        assert_eq!(ints.h1(0, 0), 0.5);
        assert_eq!(ints.core_energy, -1.2);
        assert_eq!(ints.n_orbitals, 2);
        assert_eq!(ints.n_electrons, 2);
    }

    #[test]
    fn two_body_fills_all_permutations() {
        let ints = parse(&format!("{HEAD}0.25 2 1 2 2\n")).unwrap();
        for (p, q, r, s) in [(1, 0, 1, 1), (0, 1, 1, 1), (1, 1, 1, 0), (1, 1, 0, 1)] {
            assert_eq!(ints.h2(p, q, r, s), 0.25);
        }
        assert_eq!(ints.h2(0, 0, 1, 1), 0.0);
        ints.validate().unwrap();
    }

    #[test]
    fn single_line_header_and_fortran_exponent() {
        let ints = parse("&FCI NORB=1, NELEC=2, MS2=0 /\n 1.0D-01 1 1 1 1\n").unwrap();
        assert!((ints.h2(0, 0, 0, 0) - 0.1).abs() < 1e-16);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse(&format!("{HEAD}0.5 3 1 0 0\n")) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 5);
                assert!(message.contains("out of range"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("NORB=2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse(" &FCI NELEC=2 &END\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse(&format!("{HEAD}0.5 1 1 0\n")),
            Err(Error::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn conflicting_duplicates_rejected() {
        assert!(parse(&format!("{HEAD}0.5 1 2 0 0\n0.5 2 1 0 0\n")).is_ok());
        assert!(parse(&format!("{HEAD}0.5 1 2 0 0\n0.6 2 1 0 0\n")).is_err());
        assert!(parse(&format!("{HEAD}0.1 1 2 1 1\n0.2 1 1 2 1\n")).is_err());
    }

    #[test]
    fn write_parse_round_trip() {
        let mut ints = IntegralSet::zeros(3, 2);
        ints.core_energy = 0.713;
        ints.set_h1(0, 2, -0.1234567890123);
        ints.set_h1(1, 1, 0.3);
        ints.set_h2(2, 0, 1, 1, 1.0 / 3.0);
        ints.set_h2(0, 0, 0, 0, 0.7);
        let back = parse(&fcidump_string(&ints)).unwrap();
        assert_eq!(back, ints);
    }
}
