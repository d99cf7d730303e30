//! CSV formats for channel matrices, scattering grids, sampled element
//! patterns and angular variance maps.
//!
//! Channel matrix:
//! ```text
//! N_R,<rows>
//! N_S,<cols>
//! q,p,re,im
//! 0,0,<re>,<im>
//! ...
//! ```
//! Indices are 0-based. Values are written with 17 significant digits so a
//! write/read cycle is bit-exact.
//!
//! Scattering grid: header `p,q,re,im`, one row per lattice offset.
//!
//! Element patterns: header
//! `element,theta_deg,phi_deg,dtheta_re,dtheta_im,dphi_re,dphi_im`, rows
//! ordered by `theta_deg` then `phi_deg` on a full grid, and one
//! `efficiency,<element>,<chi>` line per element. The element column may be
//! `*` for a pattern shared by every element without its own rows.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::angular::AngularVarianceMap;
use crate::efficiency::{EfficiencyProfile, EfficiencySource};
use crate::error::{Error, Result};
use crate::pattern::{PatternKind, PolarizedPattern, SampledPattern};
use crate::scattering::ScatteringGrid;

const PATTERN_HEADER: [&str; 7] = ["element", "theta_deg", "phi_deg", "dtheta_re", "dtheta_im", "dphi_re", "dphi_im"];

fn schema(line: u64, message: impl Into<String>) -> Error {
    Error::Schema {
        line: line as usize,
        message: message.into(),
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn records<R: Read>(input: R) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in reader(input).records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            schema(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn field(rec: &csv::StringRecord, i: usize, line: u64) -> Result<&str> {
    rec.get(i).ok_or_else(|| schema(line, format!("missing column {}", i + 1)))
}

fn parse<F: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64, what: &str) -> Result<F> {
    let raw = field(rec, i, line)?;
    raw.parse().map_err(|_| schema(line, format!("cannot parse {what} from {raw:?}")))
}

fn expect_width(rec: &csv::StringRecord, width: usize, line: u64) -> Result<()> {
    if rec.len() != width {
        return Err(schema(line, format!("expected {width} columns, found {}", rec.len())));
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_channel_csv<W: Write>(h: &DMatrix<Complex64>, mut out: W) -> Result<()> {
    writeln!(out, "N_R,{}", h.nrows())?;
    writeln!(out, "N_S,{}", h.ncols())?;
    writeln!(out, "q,p,re,im")?;
    for q in 0..h.nrows() {
        for p in 0..h.ncols() {
            let z = h[(q, p)];
            writeln!(out, "{q},{p},{},{}", fmt(z.re), fmt(z.im))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_channel_csv<R: Read>(input: R) -> Result<DMatrix<Complex64>> {
    let recs = records(input)?;
    let mut it = recs.iter();
    let mut dim = |name: &str| -> Result<usize> {
        let (line, rec) = it.next().ok_or_else(|| schema(0, format!("missing {name} row")))?;
        expect_width(rec, 2, *line)?;
        if field(rec, 0, *line)? != name {
            return Err(schema(*line, format!("expected {name} row")));
        }
        parse(rec, 1, *line, name)
    };
    let (rows, cols) = (dim("N_R")?, dim("N_S")?);
    let (line, header) = it.next().ok_or_else(|| schema(0, "missing q,p,re,im header"))?;
    if header.iter().collect::<Vec<_>>() != ["q", "p", "re", "im"] {
        return Err(schema(*line, "expected header q,p,re,im"));
    }
    let mut h = DMatrix::zeros(rows, cols);
    let mut seen = vec![false; rows * cols];
    for (line, rec) in it {
        expect_width(rec, 4, *line)?;
        let q: usize = parse(rec, 0, *line, "q")?;
        let p: usize = parse(rec, 1, *line, "p")?;
        if q >= rows || p >= cols {
            return Err(schema(*line, format!("entry ({q}, {p}) outside {rows}x{cols}")));
        }
        if std::mem::replace(&mut seen[q * cols + p], true) {
            return Err(schema(*line, format!("duplicate entry ({q}, {p})")));
        }
        h[(q, p)] = Complex64::new(parse(rec, 2, *line, "re")?, parse(rec, 3, *line, "im")?);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(schema(
            recs.last().map(|r| r.0).unwrap_or(0),
            format!("missing entry ({}, {})", missing / cols, missing % cols),
        ));
    }
    Ok(h)
}

pub fn save_channel(path: &Path, h: &DMatrix<Complex64>) -> Result<()> {
    write_channel_csv(h, create(path)?)
}

pub fn load_channel(path: &Path) -> Result<DMatrix<Complex64>> {
    read_channel_csv(open(path)?)
}

pub fn read_scattering_csv<R: Read>(input: R, reference_impedance: f64) -> Result<ScatteringGrid<f64>> {
    let recs = records(input)?;
    let (line, header) = recs.first().ok_or_else(|| schema(0, "empty scattering file"))?;
    if header.iter().collect::<Vec<_>>() != ["p", "q", "re", "im"] {
        return Err(schema(*line, "expected header p,q,re,im"));
    }
    let mut coefficients = BTreeMap::new();
    for (line, rec) in &recs[1..] {
        expect_width(rec, 4, *line)?;
        let key = (parse(rec, 0, *line, "p")?, parse(rec, 1, *line, "q")?);
        let value = Complex64::new(parse(rec, 2, *line, "re")?, parse(rec, 3, *line, "im")?);
        if coefficients.insert(key, value).is_some() {
            return Err(schema(*line, format!("duplicate offset {key:?}")));
        }
    }
    Ok(ScatteringGrid::new(coefficients, reference_impedance))
}

pub fn write_scattering_csv<W: Write>(grid: &ScatteringGrid<f64>, mut out: W) -> Result<()> {
    writeln!(out, "p,q,re,im")?;
    for (&(p, q), s) in &grid.coefficients {
        writeln!(out, "{p},{q},{},{}", fmt(s.re), fmt(s.im))?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_scattering(path: &Path, reference_impedance: f64) -> Result<ScatteringGrid<f64>> {
    read_scattering_csv(open(path)?, reference_impedance)
}

/// Patterns and simulated efficiencies read from one pattern file.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    pub patterns: Vec<PolarizedPattern<f64>>,
    pub efficiency: EfficiencyProfile<f64>,
}

#[derive(Default)]
struct GridRows {
    first_line: u64,
    thetas: Vec<f64>,
    phis: Vec<f64>,
    rows: usize,
    d_theta: Vec<Complex64>,
    d_phi: Vec<Complex64>,
    last: Option<(f64, f64)>,
}

impl GridRows {
    fn push(&mut self, line: u64, theta: f64, phi: f64, dt: Complex64, dp: Complex64) -> Result<()> {
        if let Some((t0, p0)) = self.last {
            if !(theta > t0 || (theta == t0 && phi > p0)) {
                return Err(schema(line, "grid is not monotone (rows must increase in theta, then phi)"));
            }
        } else {
            self.first_line = line;
        }
        if self.thetas.last() != Some(&theta) {
            self.thetas.push(theta);
        }
        if self.thetas.len() == 1 {
            self.phis.push(phi);
        }
        self.last = Some((theta, phi));
        self.rows += 1;
        self.d_theta.push(dt);
        self.d_phi.push(dp);
        Ok(())
    }

    fn finish(self, label: String) -> Result<PolarizedPattern<f64>> {
        let complete = self.rows == self.thetas.len() * self.phis.len();
        let line = self.first_line;
        if !complete {
            return Err(schema(line, "pattern samples do not form a full theta x phi grid"));
        }
        let sampled =
            SampledPattern::new(self.thetas, self.phis.clone(), self.d_theta, self.d_phi).map_err(|e| schema(line, e.to_string()))?;
        // Every theta row must repeat the phi axis of the first row.
        Ok(PolarizedPattern {
            kind: PatternKind::Sampled(sampled),
            label,
        })
    }
}

pub fn read_pattern_csv<R: Read>(input: R) -> Result<PatternSet> {
    let recs = records(input)?;
    let (line, header) = recs.first().ok_or_else(|| schema(0, "empty pattern file"))?;
    if header.iter().collect::<Vec<_>>() != PATTERN_HEADER {
        return Err(schema(*line, format!("expected header {}", PATTERN_HEADER.join(","))));
    }
    let mut grids: BTreeMap<Option<usize>, GridRows> = BTreeMap::new();
    let mut phi_axis: BTreeMap<Option<usize>, Vec<f64>> = BTreeMap::new();
    let mut efficiencies: BTreeMap<usize, (f64, u64)> = BTreeMap::new();
    for (line, rec) in &recs[1..] {
        let line = *line;
        if field(rec, 0, line)? == "efficiency" {
            expect_width(rec, 3, line)?;
            let element: usize = parse(rec, 1, line, "element index")?;
            let chi: f64 = parse(rec, 2, line, "efficiency")?;
            if !(0.0..=1.0).contains(&chi) {
                return Err(schema(line, format!("efficiency {chi} outside [0, 1]")));
            }
            if efficiencies.insert(element, (chi, line)).is_some() {
                return Err(schema(line, format!("duplicate efficiency for element {element}")));
            }
            continue;
        }
        expect_width(rec, 7, line)?;
        let key = match field(rec, 0, line)? {
            "*" => None,
            _ => Some(parse::<usize>(rec, 0, line, "element index")?),
        };
        let num = |i: usize, what: &str| parse::<f64>(rec, i, line, what);
        let (theta, phi) = (num(1, "theta_deg")?, num(2, "phi_deg")?);
        let dt = Complex64::new(num(3, "dtheta_re")?, num(4, "dtheta_im")?);
        let dp = Complex64::new(num(5, "dphi_re")?, num(6, "dphi_im")?);
        let grid = grids.entry(key).or_default();
        grid.push(line, theta, phi, dt, dp)?;
        // Track the phi axis of every theta row to reject ragged grids early.
        let axis = phi_axis.entry(key).or_default();
        if grid.thetas.len() == 1 {
            axis.push(phi);
        } else {
            let pos = (grid.rows - 1) % axis.len().max(1);
            if axis.get(pos) != Some(&phi) {
                return Err(schema(line, "pattern samples do not form a full theta x phi grid"));
            }
        }
    }
    let last_line = recs.last().map(|r| r.0).unwrap_or(0);
    let count = efficiencies
        .keys()
        .chain(grids.keys().flatten())
        .max()
        .map(|m| m + 1)
        .ok_or_else(|| schema(last_line, "no elements defined"))?;
    let shared = grids.remove(&None).map(|g| g.finish("shared".into())).transpose()?;
    let mut patterns = Vec::with_capacity(count);
    let mut chi = Vec::with_capacity(count);
    for element in 0..count {
        let own = grids.remove(&Some(element));
        let first_line = own.as_ref().map(|g| g.first_line).unwrap_or(last_line);
        let pattern = match (own, &shared) {
            (Some(g), _) => g.finish(format!("element {element}"))?,
            (None, Some(s)) => s.clone(),
            (None, None) => return Err(schema(last_line, format!("no pattern rows for element {element}"))),
        };
        let (value, _) = efficiencies
            .get(&element)
            .ok_or_else(|| schema(first_line, format!("missing efficiency for element {element}")))?;
        patterns.push(pattern);
        chi.push(*value);
    }
    Ok(PatternSet {
        patterns,
        efficiency: EfficiencyProfile::new(chi, EfficiencySource::Simulated)?,
    })
}

pub fn load_patterns(path: &Path) -> Result<PatternSet> {
    read_pattern_csv(open(path)?)
}

/// Writes patterns in the schema above. `None` as the element writes a
/// shared `*` pattern.
pub fn write_pattern_csv<W: Write>(patterns: &[(Option<usize>, &SampledPattern<f64>)], efficiencies: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "{}", PATTERN_HEADER.join(","))?;
    for (element, p) in patterns {
        let tag = element.map(|e| e.to_string()).unwrap_or_else(|| "*".into());
        let np = p.phi_deg.len();
        for (i, &t) in p.theta_deg.iter().enumerate() {
            for (j, &ph) in p.phi_deg.iter().enumerate() {
                let (a, b) = (p.d_theta[i * np + j], p.d_phi[i * np + j]);
                writeln!(out, "{tag},{t},{ph},{},{},{},{}", fmt(a.re), fmt(a.im), fmt(b.re), fmt(b.im))?;
            }
        }
    }
    for (e, chi) in efficiencies.iter().enumerate() {
        writeln!(out, "efficiency,{e},{chi}")?;
    }
    out.flush()?;
    Ok(())
}

/// Dumps `σ²(l, m)` as `l,m,variance` rows.
pub fn write_variance_map<W: Write>(map: &AngularVarianceMap<f64>, mut out: W) -> Result<()> {
    writeln!(out, "l,m,variance")?;
    let (r, c) = map.shape();
    for l in 0..r {
        for m in 0..c {
            writeln!(out, "{l},{m},{}", fmt(map.variances[(l, m)]))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{dipole_pattern, isotropic_pattern, IsotropicPolarization};
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn channel_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = DMatrix::from_fn(7, 3, |_, _| {
            Complex64::new(rng.random_range(-1e3..1e3) * 1e-7, rng.random::<f64>() - 0.5)
        });
        let mut buf = Vec::new();
        write_channel_csv(&h, &mut buf).unwrap();
        let back = read_channel_csv(buf.as_slice()).unwrap();
        assert!(h
            .iter()
            .zip(back.iter())
            .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("N_R,7\nN_S,3\nq,p,re,im\n0,0,"));
    }

    #[test]
    fn channel_schema_errors_name_lines() {
        let bad = "N_R,1\nN_S,2\nq,p,re,im\n0,0,1,0\n0,5,1,0\n";
        assert!(matches!(read_channel_csv(bad.as_bytes()), Err(Error::Schema { line: 5, .. })));
        let missing = "N_R,1\nN_S,2\nq,p,re,im\n0,0,1,0\n";
        assert!(matches!(read_channel_csv(missing.as_bytes()), Err(Error::Schema { .. })));
        let garbled = "N_R,1\nN_S,1\nq,p,re,im\n0,0,abc,0\n";
        assert!(matches!(read_channel_csv(garbled.as_bytes()), Err(Error::Schema { line: 4, .. })));
    }

    #[test]
    fn scattering_round_trip() {
        let grid = ScatteringGrid::from_entries([((0, 0), Complex64::new(0.2, -0.1)), ((-1, 2), Complex64::new(0.0, 0.05))], 50.0);
        let mut buf = Vec::new();
        write_scattering_csv(&grid, &mut buf).unwrap();
        assert_eq!(read_scattering_csv(buf.as_slice(), 50.0).unwrap(), grid);
        assert!(read_scattering_csv("q,p,re,im\n".as_bytes(), 50.0).is_err());
    }

    #[test]
    fn constant_pattern_file() {
        let text = "element,theta_deg,phi_deg,dtheta_re,dtheta_im,dphi_re,dphi_im\n0,0,-180,1,0,0,0\n0,0,180,1,0,0,0\n0,90,-180,1,0,0,0\n0,90,180,1,0,0,0\nefficiency,0,1\n";
        let set = read_pattern_csv(text.as_bytes()).unwrap();
        assert_eq!(set.efficiency.per_element, vec![1.0]);
        let iso = isotropic_pattern::<f64>(IsotropicPolarization::Theta);
        for (t, p) in [(0.1, 0.2), (1.5, -3.0), (0.7, 2.9)] {
            assert_eq!(set.patterns[0].evaluate(t, p).unwrap(), iso.evaluate(t, p).unwrap());
        }
    }

    #[test]
    fn shared_pattern_with_per_element_efficiency() {
        let text = "element,theta_deg,phi_deg,dtheta_re,dtheta_im,dphi_re,dphi_im\n*,0,0,1,0,0,0\nefficiency,0,0.2925\nefficiency,1,0.5\n";
        let set = read_pattern_csv(text.as_bytes()).unwrap();
        assert_eq!(set.patterns.len(), 2);
        assert_eq!(set.efficiency.per_element, vec![0.2925, 0.5]);
        assert_eq!(set.efficiency.source, EfficiencySource::Simulated);
    }

    fn header() -> &'static str {
        "element,theta_deg,phi_deg,dtheta_re,dtheta_im,dphi_re,dphi_im\n"
    }

    #[test]
    fn pattern_schema_errors() {
        let cases = [
            (format!("{}0,0,0,1,0,0\nefficiency,0,1\n", header()), 2),
            (format!("{}0,10,0,1,0,0,0\n0,0,0,1,0,0,0\nefficiency,0,1\n", header()), 3),
            (
                format!("{}0,0,0,1,0,0,0\n0,0,10,1,0,0,0\n0,10,0,1,0,0,0\nefficiency,0,1\n", header()),
                2,
            ),
            (format!("{}0,0,0,1,0,0,0\n", header()), 2),
            (format!("{}0,0,0,1,0,0,0\nefficiency,0,1.5\n", header()), 3),
            (format!("{}0,0,x,1,0,0,0\nefficiency,0,1\n", header()), 2),
            ("element,theta\n".to_string(), 1),
        ];
        for (text, line) in cases {
            match read_pattern_csv(text.as_bytes()) {
                Err(Error::Schema { line: got, .. }) => assert_eq!(got, line, "{text}"),
                other => panic!("expected schema error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn dipole_file_round_trip() {
        let d = dipole_pattern(Vector3::y()).unwrap();
        let thetas: Vec<f64> = (0..=90).map(|i| i as f64).collect();
        let phis: Vec<f64> = (0..=360).map(|i| i as f64 - 180.0).collect();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for &t in &thetas {
            for &p in &phis {
                let (x, y) = d.evaluate(t.to_radians(), p.to_radians()).unwrap();
                a.push(x);
                b.push(y);
            }
        }
        let sampled = SampledPattern::new(thetas, phis, a, b).unwrap();
        let mut buf = Vec::new();
        write_pattern_csv(&[(Some(0), &sampled)], &[0.7407], &mut buf).unwrap();
        let set = read_pattern_csv(buf.as_slice()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let (t, p) = (
                rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            );
            let (x, y) = d.evaluate(t, p).unwrap();
            let (u, v) = set.patterns[0].evaluate(t, p).unwrap();
            worst = worst.max((x - u).norm()).max((y - v).norm());
        }
        assert!(worst < 1e-3, "{worst}");
        assert_eq!(set.efficiency.per_element, vec![0.7407]);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_channel(Path::new("/nonexistent/h.csv")), Err(Error::Io(_))));
    }
}
