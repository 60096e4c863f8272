//! Plain-text problem dump in an SDPA-sparse-like layout.
//!
//! Layout, line by line:
//!
//! ```text
//! " free-form comment lines (quoted)
//! m                      number of variables
//! nblocks                number of PSD blocks
//! d1 d2 ... dn           block dimensions
//! c1 c2 ... cm           objective (maximize c.x)
//! matno blockno i j v    one entry per line; matno 0 is F0, matno k>0 is
//!                        the coefficient of variable k; i <= j, 1-based;
//!                        the symmetric partner entry is implied
//! ```
//!
//! The constraint encoded is `F0_b + Σ_k x_k F_kb ⪰ 0` per block `b` (note:
//! classic SDPA writes `Σ y_i F_i - F0 ⪰ 0`, so F0 carries the opposite
//! sign there). Block metadata round-trips through comment lines of the
//! form `" meta <blockno> <label> [pair i j] [embedded]`.

use std::fmt::Write as _;

use crate::problem::{Block, BlockMeta, ConicProblem, SparseSym};
use crate::{Error, Result};

pub fn write_problem(p: &ConicProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\" dual-form block SDP: maximize c.x s.t. F0 + sum_i x_i F_i >= 0");
    for (b, block) in p.blocks.iter().enumerate() {
        let mut meta = format!("\" meta {} {}", b + 1, sanitize(&block.meta.label));
        if let Some((g, d)) = block.meta.pair {
            let _ = write!(meta, " pair {g} {d}");
        }
        if block.meta.complex_embedded {
            let _ = write!(meta, " embedded");
        }
        let _ = writeln!(out, "{meta}");
    }
    let _ = writeln!(out, "{}", p.num_vars);
    let _ = writeln!(out, "{}", p.blocks.len());
    let dims: Vec<String> = p.blocks.iter().map(|b| b.dim.to_string()).collect();
    let _ = writeln!(out, "{}", dims.join(" "));
    let objs: Vec<String> = p.objective.iter().map(|c| format!("{c:.17e}")).collect();
    let _ = writeln!(out, "{}", objs.join(" "));
    for (b, block) in p.blocks.iter().enumerate() {
        write_mat(&mut out, 0, b + 1, &block.f0);
        for (var, f) in &block.terms {
            write_mat(&mut out, var + 1, b + 1, f);
        }
    }
    out
}

fn sanitize(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    if s.is_empty() {
        "-".into()
    } else {
        s
    }
}

fn write_mat(out: &mut String, matno: usize, blockno: usize, f: &SparseSym) {
    for &(i, j, v) in &f.entries {
        if i <= j {
            let _ = writeln!(out, "{} {} {} {} {:.17e}", matno, blockno, i + 1, j + 1, v);
        }
    }
}

pub fn read_problem(text: &str) -> Result<ConicProblem> {
    let mut meta_lines: Vec<(usize, BlockMeta)> = Vec::new();
    let mut data_lines = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('"') || trimmed.starts_with('*') {
            if let Some(rest) = trimmed.strip_prefix("\" meta ") {
                meta_lines.push(parse_meta(rest)?);
            }
            continue;
        }
        data_lines.push(trimmed);
    }
    if data_lines.len() < 4 {
        return Err(Error::Parse("truncated problem file".into()));
    }
    let num_vars: usize = data_lines[0]
        .parse()
        .map_err(|_| Error::Parse("bad variable count".into()))?;
    let nblocks: usize = data_lines[1]
        .parse()
        .map_err(|_| Error::Parse("bad block count".into()))?;
    let dims: Vec<usize> = data_lines[2]
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse("bad block dimension".into())))
        .collect::<Result<_>>()?;
    if dims.len() != nblocks {
        return Err(Error::Parse("block dimension list length mismatch".into()));
    }
    let objective: Vec<f64> = data_lines[3]
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse("bad objective entry".into())))
        .collect::<Result<_>>()?;
    if objective.len() != num_vars {
        return Err(Error::Parse("objective length mismatch".into()));
    }

    // (matno, blockno) -> triplets.
    let mut f0s: Vec<Vec<(u32, u32, f64)>> = vec![Vec::new(); nblocks];
    let mut terms: Vec<std::collections::BTreeMap<usize, Vec<(u32, u32, f64)>>> =
        vec![Default::default(); nblocks];
    for line in &data_lines[4..] {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(Error::Parse(format!("bad entry line: {line}")));
        }
        let matno: usize = toks[0].parse().map_err(|_| Error::Parse("bad matno".into()))?;
        let blockno: usize = toks[1].parse().map_err(|_| Error::Parse("bad blockno".into()))?;
        let i: u32 = toks[2].parse().map_err(|_| Error::Parse("bad row".into()))?;
        let j: u32 = toks[3].parse().map_err(|_| Error::Parse("bad col".into()))?;
        let v: f64 = toks[4].parse().map_err(|_| Error::Parse("bad value".into()))?;
        if blockno == 0 || blockno > nblocks {
            return Err(Error::Parse(format!("block {blockno} out of range")));
        }
        if matno > num_vars {
            return Err(Error::Parse(format!("matrix {matno} out of range")));
        }
        let dim = dims[blockno - 1] as u32;
        if i == 0 || j == 0 || i > dim || j > dim || i > j {
            return Err(Error::Parse(format!("entry ({i},{j}) invalid for dim {dim}")));
        }
        let mut tri = vec![(i - 1, j - 1, v)];
        if i != j {
            tri.push((j - 1, i - 1, v));
        }
        if matno == 0 {
            f0s[blockno - 1].extend(tri);
        } else {
            terms[blockno - 1].entry(matno - 1).or_default().extend(tri);
        }
    }

    let mut p = ConicProblem::new(num_vars, objective)?;
    for b in 0..nblocks {
        let meta = meta_lines
            .iter()
            .find(|(idx, _)| *idx == b + 1)
            .map(|(_, m)| m.clone())
            .unwrap_or_default();
        p.add_block(Block {
            dim: dims[b],
            f0: SparseSym { dim: dims[b], entries: std::mem::take(&mut f0s[b]) },
            terms: std::mem::take(&mut terms[b])
                .into_iter()
                .map(|(var, entries)| (var, SparseSym { dim: dims[b], entries }))
                .collect(),
            meta,
        })?;
    }
    Ok(p)
}

fn parse_meta(rest: &str) -> Result<(usize, BlockMeta)> {
    let toks: Vec<&str> = rest.split_whitespace().collect();
    if toks.len() < 2 {
        return Err(Error::Parse("bad meta line".into()));
    }
    let idx: usize = toks[0].parse().map_err(|_| Error::Parse("bad meta index".into()))?;
    let mut meta = BlockMeta { label: toks[1].to_string(), ..Default::default() };
    let mut k = 2;
    while k < toks.len() {
        match toks[k] {
            "pair" => {
                if k + 2 >= toks.len() {
                    return Err(Error::Parse("bad meta pair".into()));
                }
                let g = toks[k + 1].parse().map_err(|_| Error::Parse("bad pair".into()))?;
                let d = toks[k + 2].parse().map_err(|_| Error::Parse("bad pair".into()))?;
                meta.pair = Some((g, d));
                k += 3;
            }
            "embedded" => {
                meta.complex_embedded = true;
                k += 1;
            }
            other => return Err(Error::Parse(format!("unknown meta token {other}"))),
        }
    }
    Ok((idx, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn round_trip() {
        let mut p = ConicProblem::new(2, vec![1.0, -0.5]).unwrap();
        p.add_block(Block {
            dim: 2,
            f0: SparseSym::from_dense(&array![[1.0, 0.25], [0.25, 2.0]], 1e-12).unwrap(),
            terms: vec![
                (0, SparseSym::from_dense(&array![[-1.0, 0.0], [0.0, -1.0]], 1e-12).unwrap()),
                (1, SparseSym::from_dense(&array![[0.0, 1.0], [1.0, 0.0]], 1e-12).unwrap()),
            ],
            meta: BlockMeta { label: "pair(0,1)".into(), pair: Some((0, 1)), complex_embedded: true },
        })
        .unwrap();
        let text = write_problem(&p);
        let q = read_problem(&text).unwrap();
        assert_eq!(q.num_vars, 2);
        assert_eq!(q.objective, vec![1.0, -0.5]);
        assert_eq!(q.blocks.len(), 1);
        assert_eq!(q.blocks[0].dim, 2);
        assert_eq!(q.blocks[0].meta.pair, Some((0, 1)));
        assert!(q.blocks[0].meta.complex_embedded);
        assert_eq!(q.blocks[0].f0.to_dense(), p.blocks[0].f0.to_dense());
        assert_eq!(q.blocks[0].terms.len(), 2);
        let t0 = &q.blocks[0].terms[0];
        assert_eq!(t0.0, 0);
        assert_eq!(t0.1.to_dense(), array![[-1.0, 0.0], [0.0, -1.0]]);
    }
}
