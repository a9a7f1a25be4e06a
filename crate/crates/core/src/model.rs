//! Model definitions: integral files, the Hubbard dimer fixture and seeded random models.
//!
//! Spin-orbitals are interleaved: spatial orbital `i` gives modes `2i` (alpha)
//! and `2i + 1` (beta).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{build_dipole, build_hamiltonian, FermionOperator, Tensor4};

/// Largest spatial-orbital count accepted by the random generator.
pub const MAX_RANDOM_SPATIAL: usize = 7;

pub const AXIS_NAMES: [char; 3] = ['x', 'y', 'z'];

/// Spin-orbital model: one- and two-body integrals, dipoles and bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Number of spin-orbitals.
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub t: DMatrix<f64>,
    pub v: Tensor4,
    pub dipole: [DMatrix<f64>; 3],
    pub nuclear_shift: f64,
    pub label: String,
    /// Set when the dipole file was absent and zeros were substituted.
    pub dipole_missing: bool,
}

pub fn spin_mode(spatial: usize, beta: bool) -> usize {
    2 * spatial + usize::from(beta)
}

impl ModelSpec {
    /// Lifts spatial-orbital integrals to interleaved spin-orbitals.
    pub fn from_spatial(
        t: &DMatrix<f64>,
        v: &Tensor4,
        dipole: &[DMatrix<f64>; 3],
        n_electrons: usize,
        nuclear_shift: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let m = t.nrows();
        if v.n != m || dipole.iter().any(|d| d.nrows() != m || d.ncols() != m) {
            return Err(Error::input("integral dimensions disagree"));
        }
        if n_electrons > 2 * m {
            return Err(Error::input(format!(
                "{n_electrons} electrons do not fit in {m} spatial orbitals"
            )));
        }
        let n = 2 * m;
        let lift = |a: &DMatrix<f64>| {
            let mut out = DMatrix::zeros(n, n);
            for p in 0..m {
                for q in 0..m {
                    for s in [false, true] {
                        out[(spin_mode(p, s), spin_mode(q, s))] = a[(p, q)];
                    }
                }
            }
            out
        };
        let mut vs = Tensor4::zeros(n);
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        let x = v.get(p, q, r, s);
                        if x == 0.0 {
                            continue;
                        }
                        // p and s share one electron, q and r the other.
                        for sig in [false, true] {
                            for tau in [false, true] {
                                vs.set(
                                    spin_mode(p, sig),
                                    spin_mode(q, tau),
                                    spin_mode(r, tau),
                                    spin_mode(s, sig),
                                    x,
                                );
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            n_orbitals: n,
            n_electrons,
            t: lift(t),
            v: vs,
            dipole: [lift(&dipole[0]), lift(&dipole[1]), lift(&dipole[2])],
            nuclear_shift,
            label: label.into(),
            dipole_missing: false,
        })
    }

    pub fn n_spatial(&self) -> usize {
        self.n_orbitals / 2
    }

    /// Electronic Hamiltonian plus the constant shift.
    pub fn hamiltonian(&self) -> Result<FermionOperator> {
        let mut h = build_hamiltonian(&self.t, &self.v)?;
        if self.nuclear_shift != 0.0 {
            h.add_term(self.nuclear_shift, vec![])?;
        }
        Ok(h)
    }

    pub fn dipole_operator(&self, axis: usize) -> Result<FermionOperator> {
        let d = self
            .dipole
            .get(axis)
            .ok_or_else(|| Error::input(format!("axis {axis} out of range")))?;
        build_dipole(d)
    }

    /// Spatial one-body block (alpha spin).
    pub fn spatial_t(&self) -> DMatrix<f64> {
        let m = self.n_spatial();
        DMatrix::from_fn(m, m, |p, q| self.t[(2 * p, 2 * q)])
    }

    pub fn spatial_dipole(&self, axis: usize) -> DMatrix<f64> {
        let m = self.n_spatial();
        DMatrix::from_fn(m, m, |p, q| self.dipole[axis][(2 * p, 2 * q)])
    }

    pub fn spatial_v(&self) -> Tensor4 {
        let m = self.n_spatial();
        let mut v = Tensor4::zeros(m);
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        v.set(p, q, r, s, self.v.get(2 * p, 2 * q, 2 * r, 2 * s));
                    }
                }
            }
        }
        v
    }
}

/// Two-site Hubbard model at half filling with a single (x) dipole axis.
///
/// `H = -t sum_s (c0s^dag c1s + h.c.) + U sum_i n_i,up n_i,dn`. The on-site
/// energy is stored as `V[i,i,i,i] = U/2`, because the spin sum in the
/// two-body term visits each opposite-spin pair twice.
pub fn make_hubbard_dimer(t: f64, u: f64, d01: f64) -> ModelSpec {
    let tm = DMatrix::from_row_slice(2, 2, &[0.0, -t, -t, 0.0]);
    let mut v = Tensor4::zeros(2);
    for i in 0..2 {
        v.set(i, i, i, i, u / 2.0);
    }
    let dx = DMatrix::from_row_slice(2, 2, &[0.0, d01, d01, 0.0]);
    let z = DMatrix::zeros(2, 2);
    ModelSpec::from_spatial(&tm, &v, &[dx, z.clone(), z], 2, 0.0, format!("hubbard:t={t},U={u},d={d01}"))
        .expect("dimer dimensions are consistent")
}

/// Seeded random model on `n_spatial` spatial orbitals.
pub fn make_random_model(n_spatial: usize, n_electrons: usize, seed: u64) -> Result<ModelSpec> {
    if n_spatial == 0 || n_spatial > MAX_RANDOM_SPATIAL {
        return Err(Error::resource(format!(
            "random models support 1..={MAX_RANDOM_SPATIAL} spatial orbitals, got {n_spatial}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = n_spatial;
    let mut t = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in p..m {
            let x = if p == q { rng.gen_range(-2.0..0.5) } else { rng.gen_range(-0.5..0.5) };
            t[(p, q)] = x;
            t[(q, p)] = x;
        }
    }
    let mut v = Tensor4::zeros(m);
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let x: f64 = rng.gen_range(-0.1..0.1);
                    v.set_symmetric(p, q, r, s, x);
                }
            }
        }
    }
    for p in 0..m {
        for q in 0..m {
            v.set_symmetric(p, q, q, p, 0.2 + rng.gen_range(0.0..0.2));
        }
    }
    let mut dip = [DMatrix::zeros(m, m), DMatrix::zeros(m, m), DMatrix::zeros(m, m)];
    for d in &mut dip {
        for p in 0..m {
            for q in p..m {
                let x = rng.gen_range(-0.5..0.5);
                d[(p, q)] = x;
                d[(q, p)] = x;
            }
        }
    }
    ModelSpec::from_spatial(&t, &v, &dip, n_electrons, 0.0, format!("random:{m}:{n_electrons}:{seed}"))
}

fn parse_axis(tok: &str) -> Option<usize> {
    match tok.to_ascii_lowercase().as_str() {
        "x" | "0" => Some(0),
        "y" | "1" => Some(1),
        "z" | "2" => Some(2),
        _ => None,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("{}:{line}: {msg}", path.display()))
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

/// Reads an integral file (and optional dipole file) over spatial orbitals.
///
/// Integral file: header lines `NORB <n>`, `NELEC <n>`, optional `LABEL <text>`
/// (`KEY=value` also accepted), then records `value i j k l` with 1-based
/// indices: `i j 0 0` is a one-body entry, all four non-zero is a two-body
/// entry in this module's index convention, `0 0 0 0` is the scalar shift.
/// Dipole file: records `axis value i j` with axis `x|y|z`.
pub fn load_fcidump_like(path: &Path, dipole_path: Option<&Path>) -> Result<ModelSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut norb: Option<usize> = None;
    let mut nelec: Option<usize> = None;
    let mut label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut records: Vec<(usize, f64, [usize; 4])> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let first = line.chars().next().unwrap();
        if first.is_ascii_alphabetic() || first == '&' {
            let cleaned = line.trim_start_matches('&').replace('=', " ");
            let mut toks = cleaned.split_whitespace();
            let key = toks.next().unwrap_or("").to_ascii_uppercase();
            let rest: Vec<&str> = toks.collect();
            let num = |what: &str| -> Result<usize> {
                rest.first()
                    .and_then(|s| s.trim_end_matches(',').parse().ok())
                    .ok_or_else(|| parse_err(path, line_no, format!("{what} needs an integer")))
            };
            match key.as_str() {
                "NORB" => norb = Some(num("NORB")?),
                "NELEC" => nelec = Some(num("NELEC")?),
                "LABEL" => label = rest.join(" "),
                other => return Err(parse_err(path, line_no, format!("unknown header key {other}"))),
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(parse_err(path, line_no, "expected `value i j k l`"));
        }
        let value: f64 = toks[0]
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("bad value {:?}", toks[0])))?;
        let mut idx = [0usize; 4];
        for (k, tok) in toks[1..].iter().enumerate() {
            idx[k] = tok
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("bad index {tok:?}")))?;
        }
        records.push((line_no, value, idx));
    }
    let norb = norb.ok_or_else(|| Error::input(format!("{}: missing NORB", path.display())))?;
    let nelec = nelec.ok_or_else(|| Error::input(format!("{}: missing NELEC", path.display())))?;
    if norb == 0 {
        return Err(Error::input("NORB must be positive"));
    }
    if nelec > 2 * norb {
        return Err(Error::input(format!("NELEC {nelec} exceeds 2*NORB = {}", 2 * norb)));
    }
    let mut t = DMatrix::zeros(norb, norb);
    let mut v = Tensor4::zeros(norb);
    let mut shift = 0.0;
    for (line_no, value, [i, j, k, l]) in records {
        if [i, j, k, l].iter().any(|&x| x > norb) {
            return Err(parse_err(path, line_no, format!("index out of range for NORB={norb}")));
        }
        match (i, j, k, l) {
            (0, 0, 0, 0) => shift = value,
            (i, j, 0, 0) if i > 0 && j > 0 => {
                t[(i - 1, j - 1)] = value;
                t[(j - 1, i - 1)] = value;
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                v.set_symmetric(i - 1, j - 1, k - 1, l - 1, value);
            }
            _ => return Err(parse_err(path, line_no, "mixed zero and non-zero indices")),
        }
    }
    let mut dip = [DMatrix::zeros(norb, norb), DMatrix::zeros(norb, norb), DMatrix::zeros(norb, norb)];
    let mut missing = false;
    match dipole_path {
        Some(dp) if dp.exists() => {
            let dtext = fs::read_to_string(dp)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", dp.display())))?;
            for (i, raw) in dtext.lines().enumerate() {
                let line_no = i + 1;
                let line = strip_comment(raw);
                if line.is_empty() {
                    continue;
                }
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 4 {
                    return Err(parse_err(dp, line_no, "expected `axis value i j`"));
                }
                let axis = parse_axis(toks[0])
                    .ok_or_else(|| parse_err(dp, line_no, format!("bad axis {:?}", toks[0])))?;
                let value: f64 = toks[1]
                    .parse()
                    .map_err(|_| parse_err(dp, line_no, format!("bad value {:?}", toks[1])))?;
                let p: usize = toks[2].parse().map_err(|_| parse_err(dp, line_no, "bad index"))?;
                let q: usize = toks[3].parse().map_err(|_| parse_err(dp, line_no, "bad index"))?;
                if p == 0 || q == 0 || p > norb || q > norb {
                    return Err(parse_err(dp, line_no, format!("index out of range for NORB={norb}")));
                }
                dip[axis][(p - 1, q - 1)] = value;
                dip[axis][(q - 1, p - 1)] = value;
            }
        }
        _ => missing = true,
    }
    let mut model = ModelSpec::from_spatial(&t, &v, &dip, nelec, shift, label)?;
    model.dipole_missing = missing;
    Ok(model)
}

/// Writes a model built from spatial orbitals in the format read by [`load_fcidump_like`].
pub fn write_fcidump_like(model: &ModelSpec, path: &Path, dipole_path: &Path) -> Result<()> {
    let m = model.n_spatial();
    let t = model.spatial_t();
    let v = model.spatial_v();
    let mut out = String::new();
    writeln!(out, "# integral file").unwrap();
    writeln!(out, "NORB {m}").unwrap();
    writeln!(out, "NELEC {}", model.n_electrons).unwrap();
    writeln!(out, "LABEL {}", model.label).unwrap();
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let x = v.get(p, q, r, s);
                    let key = (p, q, r, s);
                    let canonical = crate::operator::symmetry_images(p, q, r, s)
                        .iter()
                        .all(|img| key <= *img);
                    if x != 0.0 && canonical {
                        writeln!(out, "{x:.17e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1).unwrap();
                    }
                }
            }
        }
    }
    for p in 0..m {
        for q in 0..=p {
            if t[(p, q)] != 0.0 {
                writeln!(out, "{:.17e} {} {} 0 0", t[(p, q)], p + 1, q + 1).unwrap();
            }
        }
    }
    writeln!(out, "{:.17e} 0 0 0 0", model.nuclear_shift).unwrap();
    fs::write(path, out)?;

    let mut dout = String::new();
    for axis in 0..3 {
        let d = model.spatial_dipole(axis);
        for p in 0..m {
            for q in 0..=p {
                if d[(p, q)] != 0.0 {
                    writeln!(dout, "{} {:.17e} {} {}", AXIS_NAMES[axis], d[(p, q)], p + 1, q + 1).unwrap();
                }
            }
        }
    }
    fs::write(dipole_path, dout)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn dimer_layout() {
        let m = make_hubbard_dimer(1.0, 2.0, 0.5);
        assert_eq!(m.n_orbitals, 4);
        assert_eq!(m.n_electrons, 2);
        assert_eq!(m.t[(0, 2)], -1.0);
        assert_eq!(m.t[(1, 3)], -1.0);
        assert_eq!(m.t[(0, 3)], 0.0);
        assert_eq!(m.v.get(0, 1, 1, 0), 1.0);
        assert_eq!(m.v.get(0, 0, 0, 0), 1.0);
        assert_eq!(m.dipole[0][(1, 3)], 0.5);
        assert!(m.dipole[1].iter().all(|&x| x == 0.0));
        assert!(m.v.symmetry_violation() < 1e-15);
    }

    #[test]
    fn random_models_deterministic() {
        let a = make_random_model(3, 2, 1).unwrap();
        let b = make_random_model(3, 2, 1).unwrap();
        let c = make_random_model(3, 2, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.t, c.t);
        assert!(a.v.symmetry_violation() < 1e-14);
        assert!(make_random_model(8, 2, 1).is_err());
    }

    #[test]
    fn minimal_file_completes_symmetry() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.fcid");
        let mut f = fs::File::create(&p).unwrap();
        writeln!(f, "# two orbitals\nNORB=2\nNELEC=2\n0.25 1 2 0 0\n0.5 1 2 2 1\n1.5 0 0 0 0").unwrap();
        let m = load_fcidump_like(&p, Some(&dir.path().join("absent"))).unwrap();
        assert!(m.dipole_missing);
        let t = m.spatial_t();
        assert_eq!(t[(1, 0)], 0.25);
        let v = m.spatial_v();
        for (a, b, c, d) in crate::operator::symmetry_images(0, 1, 1, 0) {
            assert_eq!(v.get(a, b, c, d), 0.5);
        }
        assert_eq!(m.nuclear_shift, 1.5);
    }

    #[test]
    fn too_many_electrons_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.fcid");
        fs::write(&p, "NORB 1\nNELEC 3\n").unwrap();
        assert!(load_fcidump_like(&p, None).is_err());
    }

    #[test]
    fn parse_error_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.fcid");
        fs::write(&p, "NORB 2\nNELEC 2\n\n0.1 1 x 0 0\n").unwrap();
        let err = load_fcidump_like(&p, None).unwrap_err().to_string();
        assert!(err.contains(":4:"), "{err}");
        fs::write(&p, "NORB 2\nNELEC 2\n0.1 3 1 0 0\n").unwrap();
        let err = load_fcidump_like(&p, None).unwrap_err().to_string();
        assert!(err.contains("out of range"), "{err}");
    }
}
