//! Plain-text geometry decks, legacy VTK output, and CSV time series.
//!
//! Deck formats (first line is always the record count, indices are 1-based):
//!
//! | file      | record                               |
//! |-----------|--------------------------------------|
//! | `.vertex` | `x y`                                |
//! | `.target` | `node k_targ`                        |
//! | `.spring` | `master slave k_spr rest_length`     |
//! | `.beam`   | `node1 node2 node3 k_beam C_x C_y`   |
//!
//! `.pts` state files use the `.vertex` layout; the count line is optional.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::fibers::{Beam, BeamSet, Spring, SpringSet, Target, TargetSet};
use crate::fluid::Grid;
use crate::{Error, Real, Result, Vec2};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Non-empty lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_float<T: Real>(path: &Path, line: usize, tok: &str) -> Result<T> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("expected a number, found {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value {tok:?}")));
    }
    Ok(T::lit(v))
}

fn parse_index(path: &Path, line: usize, tok: &str) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("expected a node index, found {tok:?}")))?;
    if v == 0 {
        return Err(parse_err(path, line, "node indices are 1-based"));
    }
    Ok(v - 1)
}

/// Splits a counted deck into body records of exactly `columns` tokens.
fn counted_records<'a>(
    path: &Path,
    text: &'a str,
    columns: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = content_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let count: usize = header
        .parse()
        .map_err(|_| parse_err(path, hl, format!("expected record count, found {header:?}")))?;
    let body = records(path, lines, columns)?;
    if body.len() != count {
        return Err(parse_err(
            path,
            hl,
            format!(
                "header declares {count} records but file has {}",
                body.len()
            ),
        ));
    }
    Ok(body)
}

fn records<'a>(
    path: &Path,
    lines: impl Iterator<Item = (usize, &'a str)>,
    columns: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    lines
        .map(|(ln, l)| {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != columns {
                Err(parse_err(
                    path,
                    ln,
                    format!("expected {columns} columns, found {}", toks.len()),
                ))
            } else {
                Ok((ln, toks))
            }
        })
        .collect()
}

/// Reads a `.vertex` file (count line required).
pub fn read_vertex<T: Real>(path: impl AsRef<Path>) -> Result<Vec<Vec2<T>>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    counted_records(path, &text, 2)?
        .into_iter()
        .map(|(ln, t)| {
            Ok(Vec2::new(
                parse_float(path, ln, t[0])?,
                parse_float(path, ln, t[1])?,
            ))
        })
        .collect()
}

/// Reads a point list with or without the leading count line.
pub fn read_points<T: Real>(path: impl AsRef<Path>) -> Result<Vec<Vec2<T>>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let has_header = content_lines(&text)
        .next()
        .map(|(_, l)| l.split_whitespace().count() == 1)
        .unwrap_or(false);
    let recs = if has_header {
        counted_records(path, &text, 2)?
    } else {
        records(path, content_lines(&text), 2)?
    };
    if recs.is_empty() {
        return Err(parse_err(path, 1, "no points"));
    }
    recs.into_iter()
        .map(|(ln, t)| {
            Ok(Vec2::new(
                parse_float(path, ln, t[0])?,
                parse_float(path, ln, t[1])?,
            ))
        })
        .collect()
}

fn full(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_vertex<T: Real>(path: impl AsRef<Path>, points: &[Vec2<T>]) -> Result<()> {
    let mut s = format!("{}\n", points.len());
    for p in points {
        let _ = writeln!(s, "{} {}", full(p.x.as_f64()), full(p.y.as_f64()));
    }
    write_text(path.as_ref(), &s)
}

pub fn write_targets<T: Real>(path: impl AsRef<Path>, set: &TargetSet<T>) -> Result<()> {
    let mut s = format!("{}\n", set.targets.len());
    for t in &set.targets {
        let _ = writeln!(s, "{} {}", t.node + 1, full(t.stiffness.as_f64()));
    }
    write_text(path.as_ref(), &s)
}

/// Reads a `.target` deck; prescribed positions start at the given vertices.
pub fn read_targets<T: Real>(path: impl AsRef<Path>, vertices: &[Vec2<T>]) -> Result<TargetSet<T>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let targets = counted_records(path, &text, 2)?
        .into_iter()
        .map(|(ln, t)| {
            let node = parse_index(path, ln, t[0])?;
            let position = *vertices.get(node).ok_or_else(|| {
                parse_err(
                    path,
                    ln,
                    format!("node {} beyond {} vertices", node + 1, vertices.len()),
                )
            })?;
            Ok(Target {
                node,
                position,
                stiffness: parse_float(path, ln, t[1])?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TargetSet { targets })
}

pub fn write_springs<T: Real>(path: impl AsRef<Path>, set: &SpringSet<T>) -> Result<()> {
    let mut s = format!("{}\n", set.springs.len());
    for sp in &set.springs {
        let _ = writeln!(
            s,
            "{} {} {} {}",
            sp.master + 1,
            sp.slave + 1,
            full(sp.stiffness.as_f64()),
            full(sp.rest_length.as_f64())
        );
    }
    write_text(path.as_ref(), &s)
}

pub fn read_springs<T: Real>(path: impl AsRef<Path>) -> Result<SpringSet<T>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let springs = counted_records(path, &text, 4)?
        .into_iter()
        .map(|(ln, t)| {
            Ok(Spring {
                master: parse_index(path, ln, t[0])?,
                slave: parse_index(path, ln, t[1])?,
                stiffness: parse_float(path, ln, t[2])?,
                rest_length: parse_float(path, ln, t[3])?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SpringSet { springs })
}

pub fn write_beams<T: Real>(path: impl AsRef<Path>, set: &BeamSet<T>) -> Result<()> {
    let mut s = format!("{}\n", set.beams.len());
    for b in &set.beams {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            b.nodes[0] + 1,
            b.nodes[1] + 1,
            b.nodes[2] + 1,
            full(b.stiffness.as_f64()),
            full(b.curvature.x.as_f64()),
            full(b.curvature.y.as_f64())
        );
    }
    write_text(path.as_ref(), &s)
}

pub fn read_beams<T: Real>(path: impl AsRef<Path>) -> Result<BeamSet<T>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let beams = counted_records(path, &text, 6)?
        .into_iter()
        .map(|(ln, t)| {
            Ok(Beam {
                nodes: [
                    parse_index(path, ln, t[0])?,
                    parse_index(path, ln, t[1])?,
                    parse_index(path, ln, t[2])?,
                ],
                stiffness: parse_float(path, ln, t[3])?,
                curvature: Vec2::new(parse_float(path, ln, t[4])?, parse_float(path, ln, t[5])?),
            })
        })
        .collect::<Result<_>>()?;
    Ok(BeamSet { beams })
}

fn vtk_num(v: f64) -> String {
    // shortest round-trip representation, never locale dependent
    format!("{v:e}")
}

fn structured_header<T: Real>(title: &str, grid: &Grid<T>) -> String {
    format!(
        "# vtk DataFile Version 2.0\n{title}\nASCII\nDATASET STRUCTURED_POINTS\n\
         DIMENSIONS {} {} 1\nORIGIN 0 0 0\nSPACING {} {} 1\nPOINT_DATA {}\n",
        grid.nx,
        grid.ny,
        vtk_num(grid.dx().as_f64()),
        vtk_num(grid.dy().as_f64()),
        grid.nx * grid.ny
    )
}

/// Legacy ASCII structured-points file with one scalar field. Values are
/// written x-fastest as VTK expects.
pub fn vtk_scalar_text<T: Real>(
    title: &str,
    name: &str,
    grid: &Grid<T>,
    field: &Array2<T>,
) -> String {
    let mut s = structured_header(title, grid);
    let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let _ = writeln!(s, "{}", vtk_num(field[[i, j]].as_f64()));
        }
    }
    s
}

pub fn vtk_vector_text<T: Real>(
    title: &str,
    name: &str,
    grid: &Grid<T>,
    u: &Array2<T>,
    v: &Array2<T>,
) -> String {
    let mut s = structured_header(title, grid);
    let _ = writeln!(s, "VECTORS {name} double");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let _ = writeln!(
                s,
                "{} {} 0",
                vtk_num(u[[i, j]].as_f64()),
                vtk_num(v[[i, j]].as_f64())
            );
        }
    }
    s
}

pub fn vtk_points_text<T: Real>(title: &str, points: &[Vec2<T>]) -> String {
    let mut s = format!(
        "# vtk DataFile Version 2.0\n{title}\nASCII\nDATASET POLYDATA\nPOINTS {} double\n",
        points.len()
    );
    for p in points {
        let _ = writeln!(s, "{} {} 0", vtk_num(p.x.as_f64()), vtk_num(p.y.as_f64()));
    }
    let _ = writeln!(s, "VERTICES {} {}", points.len(), 2 * points.len());
    for i in 0..points.len() {
        let _ = writeln!(s, "1 {i}");
    }
    s
}

/// Eulerian and Lagrangian fields for one dump.
pub struct DumpFields<'a, T> {
    pub grid: &'a Grid<T>,
    pub u: &'a Array2<T>,
    pub v: &'a Array2<T>,
    pub p: &'a Array2<T>,
    pub vorticity: &'a Array2<T>,
    pub lagrangian: &'a [Vec2<T>],
}

/// Writes `uMag`, `Omega`, `P`, `u` and `lagPts` files for dump `index`.
pub fn write_fields_vtk<T: Real>(
    dir: impl AsRef<Path>,
    fields: &DumpFields<'_, T>,
    index: usize,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let tag = format!("{index:05}");
    let speed = ndarray::Zip::from(fields.u)
        .and(fields.v)
        .map_collect(|&a, &b| a.hypot(b));
    let files = [
        (
            format!("uMag.{tag}.vtk"),
            vtk_scalar_text("uMag", "uMag", fields.grid, &speed),
        ),
        (
            format!("Omega.{tag}.vtk"),
            vtk_scalar_text("Omega", "Omega", fields.grid, fields.vorticity),
        ),
        (
            format!("P.{tag}.vtk"),
            vtk_scalar_text("P", "P", fields.grid, fields.p),
        ),
        (
            format!("u.{tag}.vtk"),
            vtk_vector_text("u", "u", fields.grid, fields.u, fields.v),
        ),
        (
            format!("lagPts.{tag}.vtk"),
            vtk_points_text("lagPts", fields.lagrangian),
        ),
    ];
    let mut out = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        if path.exists() {
            return Err(Error::io(
                &path,
                std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    "dump file already exists",
                ),
            ));
        }
        write_text(&path, &text)?;
        out.push(path);
    }
    Ok(out)
}

/// One row of a swimming-performance time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesRecord {
    pub time: f64,
    pub stroke: f64,
    pub head_x: f64,
    pub head_y: f64,
    pub distance_bl: f64,
    pub speed_bl_per_stroke: f64,
}

pub const TIMESERIES_HEADER: &str = "time,stroke,head_x,head_y,distance_bl,speed_bl_per_stroke";

pub fn write_timeseries_csv(path: impl AsRef<Path>, records: &[TimeseriesRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    w.write_record(TIMESERIES_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_timeseries_csv(path: impl AsRef<Path>) -> Result<Vec<TimeseriesRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|rec| rec.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_pts_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("State_A.pts");
        fs::write(&p, "0.1 0.2\n0.3 0.4").unwrap();
        let pts: Vec<Vec2<f64>> = read_points(&p).unwrap();
        assert_eq!(pts, vec![Vec2::new(0.1, 0.2), Vec2::new(0.3, 0.4)]);
    }

    #[test]
    fn header_mismatch_and_bad_tokens() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.vertex");
        fs::write(&p, "3\n0.1 0.2\n0.3 0.4\n").unwrap();
        let err = read_vertex::<f64>(&p).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        assert!(read_points::<f64>(&p).is_err());

        fs::write(&p, "2\n0.1 0.2\n0.3 abc\n").unwrap();
        assert!(matches!(
            read_vertex::<f64>(&p),
            Err(Error::Parse { line: 3, .. })
        ));
        fs::write(&p, "1\n0.1 0.2 0.3\n").unwrap();
        assert!(matches!(
            read_vertex::<f64>(&p),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_vertex::<f64>(dir.path().join("missing.vertex")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn target_spring_beam_decks() {
        let dir = tempfile::tempdir().unwrap();
        let verts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.1),
            Vec2::new(1.0, 0.4),
        ];
        let targets = TargetSet::all_nodes(&verts, 2.5e4);
        write_targets(dir.path().join("x.target"), &targets).unwrap();
        assert_eq!(
            read_targets(dir.path().join("x.target"), &verts).unwrap(),
            targets
        );

        let springs = SpringSet::chain(&verts, 10.0);
        write_springs(dir.path().join("x.spring"), &springs).unwrap();
        assert_eq!(
            read_springs::<f64>(dir.path().join("x.spring")).unwrap(),
            springs
        );

        let curv = crate::geometry::compute_curvatures(&verts).unwrap();
        let beams = BeamSet::chain(3, 7.5, &curv).unwrap();
        write_beams(dir.path().join("x.beam"), &beams).unwrap();
        assert_eq!(read_beams::<f64>(dir.path().join("x.beam")).unwrap(), beams);

        let text = fs::read_to_string(dir.path().join("x.spring")).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("1 2 "));

        fs::write(dir.path().join("bad.target"), "1\n0 1.0\n").unwrap();
        assert!(read_targets(dir.path().join("bad.target"), &verts).is_err());
        fs::write(dir.path().join("bad.target"), "1\n9 1.0\n").unwrap();
        assert!(read_targets(dir.path().join("bad.target"), &verts).is_err());
    }

    #[test]
    fn vtk_golden_2x2() {
        let g = Grid::new(4, 4, 1.0, 1.0).unwrap();
        // serialization only depends on dims, spacing and values
        let g2 = Grid { nx: 2, ny: 2, ..g };
        let f = ndarray::arr2(&[[1.0, 0.5], [-2.0, 0.25]]);
        let text = vtk_scalar_text("P", "P", &g2, &f);
        let golden = "# vtk DataFile Version 2.0\nP\nASCII\nDATASET STRUCTURED_POINTS\n\
DIMENSIONS 2 2 1\nORIGIN 0 0 0\nSPACING 5e-1 5e-1 1\nPOINT_DATA 4\n\
SCALARS P double 1\nLOOKUP_TABLE default\n1e0\n-2e0\n5e-1\n2.5e-1\n";
        assert_eq!(text, golden);

        let u = ndarray::arr2(&[[1.0, 0.0], [0.0, 0.0]]);
        let v = ndarray::arr2(&[[0.0, 0.0], [0.0, -1.0]]);
        let vt = vtk_vector_text("u", "u", &g2, &u, &v);
        assert!(vt.ends_with("VECTORS u double\n1e0 0e0 0\n0e0 0e0 0\n0e0 0e0 0\n0e0 -1e0 0\n"));

        let pts = vtk_points_text("lagPts", &[Vec2::new(0.25, 0.75)]);
        assert_eq!(
            pts,
            "# vtk DataFile Version 2.0\nlagPts\nASCII\nDATASET POLYDATA\nPOINTS 1 double\n\
2.5e-1 7.5e-1 0\nVERTICES 1 2\n1 0\n"
        );
    }

    #[test]
    fn dumps_refuse_to_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(4, 4, 1.0, 1.0).unwrap();
        let z = g.zeros();
        let fields = DumpFields {
            grid: &g,
            u: &z,
            v: &z,
            p: &z,
            vorticity: &z,
            lagrangian: &[Vec2::new(0.5, 0.5)],
        };
        let files = write_fields_vtk(dir.path(), &fields, 0).unwrap();
        assert_eq!(files.len(), 5);
        assert!(files[0].ends_with("uMag.00000.vtk"));
        write_fields_vtk(dir.path(), &fields, 1).unwrap();
        assert!(write_fields_vtk(dir.path(), &fields, 1).is_err());
    }

    #[test]
    fn timeseries_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ts.csv");
        write_timeseries_csv(&p, &[]).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            format!("{TIMESERIES_HEADER}\n")
        );
        assert!(read_timeseries_csv(&p).unwrap().is_empty());

        let zero = TimeseriesRecord {
            time: 0.0,
            stroke: 0.0,
            head_x: 0.0,
            head_y: 0.0,
            distance_bl: 0.0,
            speed_bl_per_stroke: 0.0,
        };
        write_timeseries_csv(&p, &[zero]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(read_timeseries_csv(&p).unwrap(), vec![zero]);

        let rec = TimeseriesRecord {
            time: 0.1 + 0.2,
            stroke: 1.0 / 3.0,
            head_x: -1e-17,
            head_y: 12345.678,
            distance_bl: 2.0f64.sqrt(),
            speed_bl_per_stroke: -0.0625,
        };
        write_timeseries_csv(&p, &[rec, zero]).unwrap();
        assert_eq!(read_timeseries_csv(&p).unwrap(), vec![rec, zero]);
    }
}
