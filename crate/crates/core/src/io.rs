//! Grid serialization: CSV with a metadata header, and PPM heatmaps.
//!
//! CSV layout: one `#`-prefixed header line of `key=value` pairs, then `N`
//! rows (position `x`), each with `N` comma-separated values (momentum index
//! `kappa`) printed with 17 significant digits.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::DisorderKind;
use crate::wigner::{GridMeta, PhaseSpaceGrid, TimeLabel};

pub const FORMAT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default pixels per grid cell.
pub const DEFAULT_ZOOM: usize = 4;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes through a sibling temp file and renames, so a failed run never
/// leaves a partial output behind.
fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
{
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    let mut out = BufWriter::new(file);
    let written = body(&mut out).and_then(|_| out.flush());
    if let Err(e) = written {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(&tmp)(e));
    }
    drop(out);
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn header_line(meta: &GridMeta) -> String {
    format!(
        "# n={} j={} time={} kind={} delta={} r={} seed={} version={}",
        meta.n, meta.j, meta.time, meta.kind, meta.delta, meta.r, meta.seed, FORMAT_VERSION
    )
}

/// 17 significant digits, which round-trips every `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_grid_csv(g: &PhaseSpaceGrid, path: &Path) -> Result<()> {
    let n = g.n();
    write_atomic(path, |out| {
        writeln!(out, "{}", header_line(&g.meta))?;
        for x in 0..n {
            let row: Vec<String> = g.row(x).iter().map(|&v| format_value(v)).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    })
}

fn parse_time(s: &str) -> Option<TimeLabel> {
    if s == "longtime" {
        return Some(TimeLabel::LongTime);
    }
    if let Some(rest) = s.strip_prefix("avg") {
        return rest.parse().ok().map(TimeLabel::Average);
    }
    s.parse().ok().map(TimeLabel::At)
}

fn parse_header(line: &str, path: &Path) -> Result<GridMeta> {
    let bad = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        msg,
    };
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| bad("missing `#` metadata header".into()))?;
    let mut meta = GridMeta::new(0, 0, TimeLabel::LongTime);
    let mut seen_n = false;
    for pair in body.split_whitespace() {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| bad(format!("malformed pair `{pair}`")))?;
        let invalid = || bad(format!("invalid value for `{key}`: `{value}`"));
        match key {
            "n" => {
                meta.n = value.parse().map_err(|_| invalid())?;
                seen_n = true;
            }
            "j" => meta.j = value.parse().map_err(|_| invalid())?,
            "time" => meta.time = parse_time(value).ok_or_else(invalid)?,
            "kind" => meta.kind = value.parse::<DisorderKind>().map_err(|_| invalid())?,
            "delta" => meta.delta = value.parse().map_err(|_| invalid())?,
            "r" => meta.r = value.parse().map_err(|_| invalid())?,
            "seed" => meta.seed = value.parse().map_err(|_| invalid())?,
            _ => {}
        }
    }
    if !seen_n {
        return Err(bad("header lacks `n`".into()));
    }
    Ok(meta)
}

pub fn read_grid_csv(path: &Path) -> Result<PhaseSpaceGrid> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    let meta = parse_header(lines.next().unwrap_or(""), path)?;
    let n = meta.n;
    let mut w = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let bad = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            msg,
        };
        let before = w.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| bad(format!("not a number: `{field}`")))?;
            w.push(v);
        }
        if w.len() - before != n {
            return Err(bad(format!("expected {n} columns, found {}", w.len() - before)));
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: rows + 1,
            msg: format!("expected {n} rows, found {rows}"),
        });
    }
    PhaseSpaceGrid::from_values(meta, w)
}

/// Diverging red-white-blue map: `+m` is pure red, `0` white, `-m` pure blue,
/// linear in RGB in between.
pub fn diverging_color(v: f64, m: f64) -> [u8; 3] {
    if m.is_nan() || m <= 0.0 || !v.is_finite() {
        return [255, 255, 255];
    }
    let s = (v / m).clamp(-1.0, 1.0);
    let fade = (255.0 * (1.0 - s.abs())).round() as u8;
    if s >= 0.0 {
        [255, fade, fade]
    } else {
        [fade, fade, 255]
    }
}

/// Encodes a grid as binary PPM (P6). Position runs left to right, momentum
/// index bottom to top.
pub fn heatmap_ppm(g: &PhaseSpaceGrid, zoom: usize) -> Vec<u8> {
    let zoom = zoom.max(1);
    let n = g.n();
    let side = n * zoom;
    let m = g.max_abs();
    let mut buf = format!("P6\n{side} {side}\n255\n").into_bytes();
    buf.reserve(side * side * 3);
    for kappa in (0..n).rev() {
        let mut line = Vec::with_capacity(side * 3);
        for x in 0..n {
            let px = diverging_color(g.get(x, kappa), m);
            for _ in 0..zoom {
                line.extend_from_slice(&px);
            }
        }
        for _ in 0..zoom {
            buf.extend_from_slice(&line);
        }
    }
    buf
}

pub fn render_heatmap(g: &PhaseSpaceGrid, path: &Path, zoom: usize) -> Result<()> {
    let bytes = heatmap_ppm(g, zoom);
    write_atomic(path, |out| out.write_all(&bytes))
}
