//! Plain-text bin packing format: item count, capacity, then one weight per
//! line. Blank lines are ignored.

use std::fs;
use std::path::Path;

use log::warn;

use super::{BpInstance, ZooError};

#[derive(Debug, Clone, PartialEq)]
pub struct SchollFile {
    pub instance: BpInstance,
    /// Items heavier than the capacity, with their line numbers.
    pub warnings: Vec<String>,
}

pub fn parse_scholl(text: &str) -> Result<SchollFile, ZooError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut last = 0;
    let mut next = |what: &str| -> Result<(usize, u64), ZooError> {
        match lines.next() {
            Some((line, tok)) => {
                last = line;
                tok.parse::<u64>().map(|v| (line, v)).map_err(|_| ZooError::Parse {
                    line,
                    message: format!("expected an integer {what}, found {tok:?}"),
                })
            }
            None => Err(ZooError::Parse {
                line: last + 1,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let (_, n) = next("item count")?;
    let (cap_line, cap) = next("capacity")?;
    if n == 0 {
        return Err(ZooError::Parse {
            line: 1,
            message: "item count must be positive".into(),
        });
    }
    if cap == 0 {
        return Err(ZooError::Parse {
            line: cap_line,
            message: "capacity must be positive".into(),
        });
    }
    let mut w = Vec::with_capacity(n as usize);
    let mut warnings = Vec::new();
    for j in 0..n {
        let (line, wj) = next(&format!("weight of item {}", j + 1))?;
        if wj == 0 {
            return Err(ZooError::Parse {
                line,
                message: "weights must be positive".into(),
            });
        }
        if wj > cap {
            let msg = format!("line {line}: weight {wj} exceeds capacity {cap}");
            warn!("{msg}");
            warnings.push(msg);
        }
        w.push(wj);
    }
    if let Ok((line, _)) = next("end of file") {
        return Err(ZooError::Parse {
            line,
            message: format!("more than {n} weights"),
        });
    }
    let n = w.len();
    Ok(SchollFile {
        instance: BpInstance { n, m: n, cap, w },
        warnings,
    })
}

pub fn read_scholl(path: impl AsRef<Path>) -> Result<SchollFile, ZooError> {
    parse_scholl(&fs::read_to_string(path)?)
}

pub fn format_scholl(inst: &BpInstance) -> String {
    let mut s = format!("{}\n{}\n", inst.n, inst.cap);
    for w in &inst.w {
        s.push_str(&format!("{w}\n"));
    }
    s
}

pub fn write_scholl(path: impl AsRef<Path>, inst: &BpInstance) -> Result<(), ZooError> {
    fs::write(path, format_scholl(inst))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::gen_bp;

    #[test]
    fn parses_direct_file() {
        let f = parse_scholl("2\n40\n20\n30").unwrap();
        assert_eq!(f.instance, BpInstance { n: 2, m: 2, cap: 40, w: vec![20, 30] });
        assert!(f.warnings.is_empty());
    }

    #[test]
    fn truncated_file_reports_line() {
        match parse_scholl("3\n40\n20\n30\n") {
            Err(ZooError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        match parse_scholl("2\n40\n20\nx\n") {
            Err(ZooError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_scholl("2\n40\n20\n30\n10\n").is_err());
        assert!(parse_scholl("").is_err());
    }

    #[test]
    fn heavy_item_is_a_warning() {
        let f = parse_scholl("2\n40\n50\n30\n").unwrap();
        assert_eq!(f.instance.w, vec![50, 30]);
        assert_eq!(f.warnings.len(), 1);
        assert!(f.warnings[0].contains("line 3"));
    }

    #[test]
    fn round_trip() {
        let inst = gen_bp(50, 100, 4).unwrap();
        let f = parse_scholl(&format_scholl(&inst)).unwrap();
        assert_eq!(f.instance, inst);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.txt");
        write_scholl(&path, &inst).unwrap();
        assert_eq!(read_scholl(&path).unwrap().instance, inst);
    }
}
