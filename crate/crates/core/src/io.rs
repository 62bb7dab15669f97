//! Text formats: PACE-style `.gr` graphs (with optional rotation comments)
//! and PACE `.td` tree decompositions. Ids are 1-indexed on disk.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{Edge, TreeDecomposition, WeightedGraph};

pub fn write_graph<W: Write>(g: &WeightedGraph, mut out: W) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "p tw {} {}", g.n(), g.m()).unwrap();
    for e in g.edges() {
        writeln!(s, "{} {} {}", e.u + 1, e.v + 1, e.w).unwrap();
    }
    for (id, e) in g.edges().iter().enumerate() {
        if e.structural {
            writeln!(s, "c structural {}", id + 1).unwrap();
        }
    }
    if let Some(rot) = g.rotation() {
        for (v, list) in rot.iter().enumerate() {
            write!(s, "c rot {}", v + 1).unwrap();
            for &e in list {
                write!(s, " {}", e + 1).unwrap();
            }
            s.push('\n');
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse { line, msg: format!("expected {what}") })
}

fn one_indexed(x: usize, line: usize) -> Result<usize> {
    x.checked_sub(1)
        .ok_or_else(|| Error::Parse { line, msg: "ids are 1-indexed".into() })
}

pub fn read_graph<R: BufRead>(input: R) -> Result<WeightedGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut rotation: Vec<Option<Vec<usize>>> = Vec::new();
    let mut structural = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let mut toks = line.split_whitespace();
        match toks.next() {
            None => continue,
            Some("p") => {
                if toks.next() != Some("tw") {
                    return Err(Error::Parse { line: lineno, msg: "expected 'p tw n m'".into() });
                }
                let n = parse_num(toks.next(), lineno, "vertex count")?;
                let m = parse_num(toks.next(), lineno, "edge count")?;
                header = Some((n, m));
                rotation = vec![None; n];
            }
            Some("c") => match toks.next() {
                Some("rot") => {
                    let v: usize = one_indexed(parse_num(toks.next(), lineno, "vertex")?, lineno)?;
                    let list = toks
                        .map(|t| {
                            t.parse::<usize>()
                                .ok()
                                .and_then(|e| e.checked_sub(1))
                                .ok_or_else(|| Error::Parse { line: lineno, msg: "bad edge id".into() })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let slot = rotation.get_mut(v).ok_or_else(|| Error::Parse {
                        line: lineno,
                        msg: "rotation before header or vertex out of range".into(),
                    })?;
                    *slot = Some(list);
                }
                Some("structural") => {
                    let e: usize = one_indexed(parse_num(toks.next(), lineno, "edge id")?, lineno)?;
                    structural.push((e, lineno));
                }
                _ => {}
            },
            Some(tok) => {
                if header.is_none() {
                    return Err(Error::Parse { line: lineno, msg: "edge before header".into() });
                }
                let u = one_indexed(parse_num(Some(tok), lineno, "vertex")?, lineno)?;
                let v = one_indexed(parse_num(toks.next(), lineno, "vertex")?, lineno)?;
                let w: f64 = match toks.next() {
                    Some(t) => parse_num(Some(t), lineno, "weight")?,
                    None => 1.0,
                };
                edges.push(Edge::new(u, v, w));
            }
        }
    }
    let (n, m) = header.ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    if edges.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    for (e, lineno) in structural {
        edges
            .get_mut(e)
            .ok_or(Error::Parse { line: lineno, msg: "edge id out of range".into() })?
            .structural = true;
    }
    let rotation = if rotation.iter().any(Option::is_some) {
        Some(rotation.into_iter().map(Option::unwrap_or_default).collect())
    } else {
        None
    };
    WeightedGraph::from_parts(n, edges, rotation, true)
}

pub fn write_td<W: Write>(td: &TreeDecomposition, n: usize, mut out: W) -> Result<()> {
    let mut s = String::new();
    let max_bag = td.bags.iter().map(Vec::len).max().unwrap_or(0);
    writeln!(s, "s td {} {} {}", td.bags.len(), max_bag, n).unwrap();
    for (i, bag) in td.bags.iter().enumerate() {
        write!(s, "b {}", i + 1).unwrap();
        for &v in bag {
            write!(s, " {}", v + 1).unwrap();
        }
        s.push('\n');
    }
    for &(a, b) in &td.tree_edges {
        writeln!(s, "{} {}", a + 1, b + 1).unwrap();
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_td<R: BufRead>(input: R) -> Result<TreeDecomposition> {
    let mut td = TreeDecomposition::default();
    let mut declared = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let mut toks = line.split_whitespace();
        match toks.next() {
            None | Some("c") => continue,
            Some("s") => {
                if toks.next() != Some("td") {
                    return Err(Error::Parse { line: lineno, msg: "expected 's td'".into() });
                }
                let k: usize = parse_num(toks.next(), lineno, "bag count")?;
                td.bags = vec![Vec::new(); k];
                declared = Some(k);
            }
            Some("b") => {
                let k = declared.ok_or(Error::Parse { line: lineno, msg: "bag before header".into() })?;
                let id = one_indexed(parse_num(toks.next(), lineno, "bag id")?, lineno)?;
                if id >= k {
                    return Err(Error::Parse { line: lineno, msg: "bag id out of range".into() });
                }
                td.bags[id] = toks
                    .map(|t| one_indexed(parse_num(Some(t), lineno, "vertex")?, lineno))
                    .collect::<Result<_>>()?;
            }
            Some(tok) => {
                let a = one_indexed(parse_num(Some(tok), lineno, "bag id")?, lineno)?;
                let b = one_indexed(parse_num(toks.next(), lineno, "bag id")?, lineno)?;
                td.tree_edges.push((a, b));
            }
        }
    }
    Ok(td)
}
