//! PWPS binary dumps, particle snapshots and CSV tables.
//!
//! Layout (little-endian):
//!
//! ```text
//! "PWPS" | u32 version | u32 d | u32 n[d] | f64 L[d] | u32 components | u8 complex
//!        | u32 extension kind | extension | u32 metadata length | metadata (UTF-8 JSON)
//!        | payload
//! ```
//!
//! The payload is row-major (last axis fastest), one component after another,
//! with `re, im` interleaved when complex. Extension kinds: `0` none, `1` phase
//! grid (`f64 ħ`, `u32 n_ξ[d]`, `f64 Ξ[d]`, momentum axes follow the position
//! axes in the payload), `2` particles (`u64 count`, payload is
//! `x[d] p[d] w` per particle).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::kinetic::ParticleEnsemble;
use crate::spectral::{Grid, ScalarField, SpinorField};
use crate::wigner::{PhaseGrid, WignerFunction};

pub const MAGIC: &[u8; 4] = b"PWPS";
pub const FORMAT_VERSION: u32 = 1;

/// Extra header data for non-field payloads.
#[derive(Clone, Debug, PartialEq)]
pub enum Extension {
    None,
    Phase {
        hbar: f64,
        n_xi: Vec<usize>,
        xi_box: Vec<f64>,
    },
    Particles {
        count: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DumpHeader {
    pub shape: Vec<usize>,
    pub lengths: Vec<f64>,
    pub components: usize,
    pub complex: bool,
    pub extension: Extension,
    /// Free-form JSON, normally a [`Provenance`].
    pub metadata: String,
}

impl DumpHeader {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(&self.shape, &self.lengths)
    }

    /// Number of `f64` values in the payload.
    pub fn payload_len(&self) -> usize {
        let per = match &self.extension {
            Extension::Particles { count } => *count as usize,
            Extension::Phase { n_xi, .. } => {
                self.shape.iter().product::<usize>() * n_xi.iter().product::<usize>()
            }
            Extension::None => self.shape.iter().product(),
        };
        per * self.components * if self.complex { 2 } else { 1 }
    }
}

/// Tool, version and config hash written into every dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Provenance {
            tool: "pwlab".into(),
            version: crate::VERSION.into(),
            config_hash: config_hash.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dump {
    pub header: DumpHeader,
    pub data: Vec<f64>,
}

fn put_u32(w: &mut impl Write, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Io(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| Error::Io(format!("truncated dump: {e}")))?;
    Ok(b)
}

fn get_u32(r: &mut impl Read) -> Result<usize> {
    Ok(u32::from_le_bytes(get(r)?) as usize)
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(get(r)?))
}

pub fn write_dump(w: &mut impl Write, header: &DumpHeader, data: &[f64]) -> Result<()> {
    let d = header.shape.len();
    if header.lengths.len() != d || !(1..=3).contains(&d) {
        return Err(Error::Io(format!("bad header dimension {d}")));
    }
    if data.len() != header.payload_len() {
        return Err(Error::Io(format!(
            "payload has {} values, header needs {}",
            data.len(),
            header.payload_len()
        )));
    }
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    put_u32(w, d)?;
    for &n in &header.shape {
        put_u32(w, n)?;
    }
    for l in &header.lengths {
        w.write_all(&l.to_le_bytes())?;
    }
    put_u32(w, header.components)?;
    w.write_all(&[header.complex as u8])?;
    match &header.extension {
        Extension::None => put_u32(w, 0)?,
        Extension::Phase { hbar, n_xi, xi_box } => {
            put_u32(w, 1)?;
            w.write_all(&hbar.to_le_bytes())?;
            for &n in n_xi {
                put_u32(w, n)?;
            }
            for b in xi_box {
                w.write_all(&b.to_le_bytes())?;
            }
        }
        Extension::Particles { count } => {
            put_u32(w, 2)?;
            w.write_all(&count.to_le_bytes())?;
        }
    }
    put_u32(w, header.metadata.len())?;
    w.write_all(header.metadata.as_bytes())?;
    let mut buf = Vec::with_capacity(8 * data.len());
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_dump(r: &mut impl Read) -> Result<Dump> {
    if &get::<4>(r)? != MAGIC {
        return Err(Error::Io("not a PWPS dump (bad magic)".into()));
    }
    let version = u32::from_le_bytes(get(r)?);
    if version != FORMAT_VERSION {
        return Err(Error::Io(format!("unsupported PWPS version {version}")));
    }
    let d = get_u32(r)?;
    if !(1..=3).contains(&d) {
        return Err(Error::Io(format!("bad dimension {d}")));
    }
    let shape = (0..d).map(|_| get_u32(r)).collect::<Result<Vec<_>>>()?;
    let lengths = (0..d).map(|_| get_f64(r)).collect::<Result<Vec<_>>>()?;
    let components = get_u32(r)?;
    let complex = match get::<1>(r)?[0] {
        0 => false,
        1 => true,
        f => return Err(Error::Io(format!("bad complex flag {f}"))),
    };
    let extension = match get_u32(r)? {
        0 => Extension::None,
        1 => {
            let hbar = get_f64(r)?;
            let n_xi = (0..d).map(|_| get_u32(r)).collect::<Result<Vec<_>>>()?;
            let xi_box = (0..d).map(|_| get_f64(r)).collect::<Result<Vec<_>>>()?;
            Extension::Phase { hbar, n_xi, xi_box }
        }
        2 => Extension::Particles {
            count: u64::from_le_bytes(get(r)?),
        },
        k => return Err(Error::Io(format!("unknown extension kind {k}"))),
    };
    let mlen = get_u32(r)?;
    let mut meta = vec![0u8; mlen];
    r.read_exact(&mut meta)
        .map_err(|e| Error::Io(format!("truncated metadata: {e}")))?;
    let metadata =
        String::from_utf8(meta).map_err(|e| Error::Io(format!("metadata is not UTF-8: {e}")))?;
    let header = DumpHeader {
        shape,
        lengths,
        components,
        complex,
        extension,
        metadata,
    };
    let n = header.payload_len();
    let mut bytes = vec![0u8; 8 * n];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Io(format!("truncated payload: {e}")))?;
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Io("trailing bytes after payload".into()));
    }
    Ok(Dump { header, data })
}

pub fn save(path: &Path, header: &DumpHeader, data: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
    );
    write_dump(&mut w, header, data)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Dump> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_dump(&mut BufReader::new(f))
}

fn field_header(grid: &Grid, components: usize, complex: bool, meta: &Provenance) -> DumpHeader {
    DumpHeader {
        shape: grid.shape().to_vec(),
        lengths: grid.lengths().to_vec(),
        components,
        complex,
        extension: Extension::None,
        metadata: meta.to_json(),
    }
}

fn interleave(values: &[Complex64]) -> impl Iterator<Item = f64> + '_ {
    values.iter().flat_map(|z| [z.re, z.im])
}

fn deinterleave(data: &[f64]) -> Vec<Complex64> {
    data.chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect()
}

/// Real samples on `grid` (one or more components, concatenated).
pub fn save_real(path: &Path, grid: &Grid, comps: &[&[f64]], meta: &Provenance) -> Result<()> {
    let data: Vec<f64> = comps.iter().flat_map(|c| c.iter().copied()).collect();
    save(path, &field_header(grid, comps.len(), false, meta), &data)
}

pub fn save_scalar(path: &Path, f: &ScalarField, meta: &Provenance) -> Result<()> {
    let data: Vec<f64> = interleave(f.values()).collect();
    save(path, &field_header(f.grid(), 1, true, meta), &data)
}

pub fn load_scalar(path: &Path) -> Result<ScalarField> {
    let d = load(path)?;
    if d.header.components != 1 || !d.header.complex || d.header.extension != Extension::None {
        return Err(Error::Io(format!(
            "{} is not a complex scalar field",
            path.display()
        )));
    }
    ScalarField::new(d.header.grid()?, deinterleave(&d.data))
}

pub fn save_spinor(path: &Path, u: &SpinorField, meta: &Provenance) -> Result<()> {
    let data: Vec<f64> = u.comps().iter().flat_map(|c| interleave(c)).collect();
    save(path, &field_header(u.grid(), 2, true, meta), &data)
}

pub fn load_spinor(path: &Path) -> Result<SpinorField> {
    let d = load(path)?;
    if d.header.components != 2 || !d.header.complex || d.header.extension != Extension::None {
        return Err(Error::Io(format!(
            "{} is not a spinor field",
            path.display()
        )));
    }
    let grid = d.header.grid()?;
    let half = d.data.len() / 2;
    SpinorField::new(
        grid,
        deinterleave(&d.data[..half]),
        deinterleave(&d.data[half..]),
    )
}

pub fn save_wigner(path: &Path, f: &WignerFunction, meta: &Provenance) -> Result<()> {
    let pg = f.phase();
    let d = pg.dim();
    let mut h = field_header(pg.x_grid(), 1, false, meta);
    h.extension = Extension::Phase {
        hbar: pg.hbar(),
        n_xi: (0..d).map(|a| pg.n_xi(a)).collect(),
        xi_box: (0..d).map(|a| pg.xi_box(a)).collect(),
    };
    save(path, &h, f.values())
}

pub fn load_wigner(path: &Path) -> Result<WignerFunction> {
    let d = load(path)?;
    match &d.header.extension {
        Extension::Phase { hbar, n_xi, xi_box }
            if d.header.components == 1 && !d.header.complex =>
        {
            let pg = PhaseGrid::new(d.header.grid()?, *hbar, xi_box, n_xi)?;
            WignerFunction::new(pg, d.data)
        }
        _ => Err(Error::Io(format!(
            "{} is not a Wigner function dump",
            path.display()
        ))),
    }
}

pub fn save_particles(path: &Path, ens: &ParticleEnsemble, meta: &Provenance) -> Result<()> {
    let d = ens.dim();
    let mut h = field_header(ens.grid(), 2 * d + 1, false, meta);
    h.extension = Extension::Particles {
        count: ens.len() as u64,
    };
    let mut data = Vec::with_capacity(ens.len() * (2 * d + 1));
    for ((x, p), w) in ens.positions().iter().zip(ens.momenta()).zip(ens.weights()) {
        data.extend_from_slice(&x[..d]);
        data.extend_from_slice(&p[..d]);
        data.push(*w);
    }
    save(path, &h, &data)
}

pub fn load_particles(path: &Path) -> Result<ParticleEnsemble> {
    let dump = load(path)?;
    let grid = dump.header.grid()?;
    let d = grid.dim();
    if !matches!(dump.header.extension, Extension::Particles { .. })
        || dump.header.components != 2 * d + 1
    {
        return Err(Error::Io(format!(
            "{} is not a particle snapshot",
            path.display()
        )));
    }
    let (mut xs, mut ps, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for row in dump.data.chunks_exact(2 * d + 1) {
        let (mut x, mut p) = ([0.0; 3], [0.0; 3]);
        x[..d].copy_from_slice(&row[..d]);
        p[..d].copy_from_slice(&row[d..2 * d]);
        xs.push(x);
        ps.push(p);
        ws.push(row[2 * d]);
    }
    ParticleEnsemble::new(grid, xs, ps, ws)
}

/// Sidecar naming the preset of a field-set dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSetSidecar {
    pub preset: Option<String>,
    pub params: Option<serde_json::Value>,
    pub files: Vec<String>,
    pub provenance: Provenance,
}

/// Writes `A` (one file per component), `V` and `B` when present, plus a JSON
/// sidecar. Returns the written paths.
pub fn save_field_set(
    dir: &Path,
    stem: &str,
    fs: &FieldSet,
    meta: &Provenance,
) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let grid = *fs.grid();
    let mut written = Vec::new();
    let mut put = |name: String, values: &[f64]| -> Result<()> {
        let p = dir.join(&name);
        save_real(&p, &grid, &[values], meta)?;
        written.push(p);
        Ok(())
    };
    for c in 0..fs.a().ncomp() {
        put(format!("{stem}_A{c}.pwps"), fs.a().comp(c))?;
    }
    if let Some(v) = fs.v_ext() {
        put(format!("{stem}_V.pwps"), v)?;
    }
    if let Some(b) = fs.b() {
        let n = grid.size();
        for c in 0..3 {
            let vals: Vec<f64> = (0..n).map(|i| b.at(i)[c]).collect();
            put(format!("{stem}_B{c}.pwps"), &vals)?;
        }
    }
    let sidecar = FieldSetSidecar {
        preset: fs.preset().map(|p| p.name().to_string()),
        params: fs
            .preset()
            .map(|p| serde_json::to_value(p).expect("serialisable")),
        files: written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
        provenance: meta.clone(),
    };
    let side = dir.join(format!("{stem}.json"));
    std::fs::write(
        &side,
        serde_json::to_string_pretty(&sidecar).expect("serialisable"),
    )?;
    written.push(side);
    Ok(written)
}

/// A CSV table with a provenance comment line and a fixed header.
pub fn write_csv(path: &Path, meta: &Provenance, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    std::fs::write(path, csv_string(meta, header, rows)?)?;
    Ok(())
}

pub fn csv_string(meta: &Provenance, header: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    use std::fmt::Write as _;
    let mut s = format!(
        "# {} {} config={}\n{}\n",
        meta.tool,
        meta.version,
        meta.config_hash,
        header.join(",")
    );
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::Io(format!(
                "row has {} values, header has {}",
                r.len(),
                header.len()
            )));
        }
        let line: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    Ok(s)
}
