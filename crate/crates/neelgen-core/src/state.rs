//! Dense state vectors over the 2^N spin-1/2 basis and matrix-free
//! spin-operator application.
//!
//! Basis convention: bit j of the index mask set = spin j up (s^z = +1/2).
//! Fourier components all share the phase e^{+iq·r_j}; with that choice
//! (S^α_q)† = S^ᾱ_{-q} where ᾱ swaps + and -.
//!
//! Operators are gather-form (each output amplitude reads input
//! amplitudes), so parallel application is deterministic: results do not
//! depend on thread count or scheduling.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Spin-1/2 hard cap: dense vectors above 2^24 amplitudes (256 MiB) are
/// outside this crate's scope.
pub const MAX_SITES: usize = 24;

/// Below this length parallel dispatch costs more than it saves.
const PAR_THRESHOLD: usize = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteOp {
    SPlus,
    SMinus,
    Sz,
    Sx,
    Sy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierOp {
    SPlus,
    SMinus,
    Sz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::SizeCap {
                n: n_sites,
                cap: MAX_SITES,
            });
        }
        Ok(StateVector {
            n_sites,
            amps: vec![Complex64::new(0.0, 0.0); 1 << n_sites],
        })
    }

    /// Basis state |mask⟩.
    pub fn basis(n_sites: usize, mask: usize) -> Result<Self> {
        let mut s = Self::zero(n_sites)?;
        s.amps[mask] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(n_sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::SizeCap {
                n: n_sites,
                cap: MAX_SITES,
            });
        }
        if amps.len() != 1 << n_sites {
            return Err(Error::DimensionMismatch(amps.len(), 1 << n_sites));
        }
        Ok(StateVector { n_sites, amps })
    }

    /// Haar-ish random normalized state (exact distribution is irrelevant
    /// for the identity tests this feeds).
    pub fn random<R: Rng>(n_sites: usize, rng: &mut R) -> Result<Self> {
        let mut s = Self::zero(n_sites)?;
        for a in &mut s.amps {
            *a = Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
        }
        let nrm = s.norm();
        if nrm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(s.scaled(Complex64::new(1.0 / nrm, 0.0)))
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amp(&self, mask: usize) -> Complex64 {
        self.amps[mask]
    }

    pub fn norm_sq(&self) -> f64 {
        det_sum(&self.amps, |a| a.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> StateVector {
        StateVector {
            n_sites: self.n_sites,
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let nrm = self.norm();
        if nrm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / nrm, 0.0)))
    }

    pub fn plus(&self, other: &StateVector) -> Result<StateVector> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn minus(&self, other: &StateVector) -> Result<StateVector> {
        self.zip_with(other, |a, b| a - b)
    }

    /// self + c · other
    pub fn add_scaled(&self, other: &StateVector, c: Complex64) -> Result<StateVector> {
        self.zip_with(other, |a, b| a + c * b)
    }

    fn zip_with(
        &self,
        other: &StateVector,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<StateVector> {
        if self.n_sites != other.n_sites {
            return Err(Error::DimensionMismatch(self.n_sites, other.n_sites));
        }
        Ok(StateVector {
            n_sites: self.n_sites,
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Apply a single-site spin operator; the image is generally
    /// unnormalized (s^± annihilate half the basis).
    pub fn apply_site_op(&self, site: usize, op: SiteOp) -> Result<StateVector> {
        if site >= self.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n: self.n_sites,
            });
        }
        let b = 1usize << site;
        let zero = Complex64::new(0.0, 0.0);
        let half = Complex64::new(0.5, 0.0);
        let i_half = Complex64::new(0.0, 0.5);
        let amps = &self.amps;
        let out = map_indexed(amps.len(), move |m| match op {
            SiteOp::SPlus => {
                if m & b != 0 {
                    amps[m & !b]
                } else {
                    zero
                }
            }
            SiteOp::SMinus => {
                if m & b == 0 {
                    amps[m | b]
                } else {
                    zero
                }
            }
            SiteOp::Sz => {
                if m & b != 0 {
                    half * amps[m]
                } else {
                    -half * amps[m]
                }
            }
            SiteOp::Sx => half * amps[m ^ b],
            SiteOp::Sy => {
                if m & b != 0 {
                    -i_half * amps[m ^ b]
                } else {
                    i_half * amps[m ^ b]
                }
            }
        });
        Ok(StateVector {
            n_sites: self.n_sites,
            amps: out,
        })
    }

    /// Apply S^α_q = (1/√N) Σ_j e^{+iq·r_j} s^α_j for a grid momentum.
    pub fn apply_fourier_op(
        &self,
        lat: &LatticeSpec,
        q: &[usize],
        op: FourierOp,
    ) -> Result<StateVector> {
        if lat.n_sites != self.n_sites {
            return Err(Error::DimensionMismatch(lat.n_sites, self.n_sites));
        }
        let iq = lat.momentum_index(q)?;
        let n = self.n_sites;
        let root = 1.0 / (n as f64).sqrt();
        let phases: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(root, lat.q_dot_r(iq, j)))
            .collect();
        let amps = &self.amps;
        let out = match op {
            FourierOp::SPlus => map_indexed(amps.len(), |m| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, ph) in phases.iter().enumerate() {
                    let b = 1usize << j;
                    if m & b != 0 {
                        acc += ph * amps[m & !b];
                    }
                }
                acc
            }),
            FourierOp::SMinus => map_indexed(amps.len(), |m| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, ph) in phases.iter().enumerate() {
                    let b = 1usize << j;
                    if m & b == 0 {
                        acc += ph * amps[m | b];
                    }
                }
                acc
            }),
            FourierOp::Sz => {
                // Diagonal: out[m] = [Σ_j ±(1/2) e^{iq·r_j}] in[m].
                map_indexed(amps.len(), |m| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, ph) in phases.iter().enumerate() {
                        if m & (1usize << j) != 0 {
                            acc += 0.5 * ph;
                        } else {
                            acc -= 0.5 * ph;
                        }
                    }
                    acc * amps[m]
                })
            }
        };
        Ok(StateVector {
            n_sites: self.n_sites,
            amps: out,
        })
    }

    /// Weights of the total-S^z sectors, indexed by M = number of down
    /// spins (sector eigenvalue 𝒮_z = N/2 - M). Weights sum to ‖ψ‖².
    pub fn sector_decompose(&self) -> Vec<(f64, f64)> {
        let n = self.n_sites;
        let mut w = vec![0.0f64; n + 1];
        for (m, a) in self.amps.iter().enumerate() {
            let downs = n - (m.count_ones() as usize);
            w[downs] += a.norm_sqr();
        }
        w.into_iter()
            .enumerate()
            .map(|(downs, weight)| (n as f64 / 2.0 - downs as f64, weight))
            .collect()
    }

    /// Global rotation about z: multiplies each amplitude by
    /// e^{+iθ·𝒮_z(mask)}. Under this sign the axis-angle estimator of
    /// `axis_diagnostics` shifts by +θ.
    pub fn rotate_z(&self, theta: f64) -> StateVector {
        let n = self.n_sites as f64;
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(m, a)| {
                let sz = m.count_ones() as f64 - n / 2.0;
                a * Complex64::from_polar(1.0, theta * sz)
            })
            .collect();
        StateVector {
            n_sites: self.n_sites,
            amps,
        }
    }
}

/// ⟨a|b⟩, conjugate-linear in the first argument.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.n_sites != b.n_sites {
        return Err(Error::DimensionMismatch(a.n_sites, b.n_sites));
    }
    let pairs: Vec<Complex64> = a
        .amps
        .par_chunks(1 << 13)
        .zip(b.amps.par_chunks(1 << 13))
        .map(|(ca, cb)| {
            ca.iter()
                .zip(cb)
                .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
        })
        .collect();
    // Chunk boundaries are fixed, combination order is serial: the sum is
    // bit-reproducible regardless of thread count.
    Ok(pairs.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b))
}

/// Deterministic chunked reduction (see `inner`).
fn det_sum(amps: &[Complex64], f: impl Fn(&Complex64) -> f64 + Sync) -> f64 {
    let partials: Vec<f64> = amps
        .par_chunks(1 << 13)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    partials.into_iter().sum()
}

fn map_indexed(
    len: usize,
    f: impl Fn(usize) -> Complex64 + Sync + Send,
) -> Vec<Complex64> {
    if len < PAR_THRESHOLD {
        (0..len).map(f).collect()
    } else {
        (0..len).into_par_iter().map(f).collect()
    }
}

/// Index lists of each fixed-popcount sector, ordered by M = downs count.
#[derive(Debug, Clone)]
pub struct SzSectorView {
    /// 2·𝒮_z (integer to stay exact).
    pub twice_sz: i64,
    /// Number of down spins.
    pub downs: usize,
    /// Basis masks in ascending order.
    pub members: Vec<usize>,
}

pub fn sector_views(n_sites: usize) -> Vec<SzSectorView> {
    let mut views: Vec<SzSectorView> = (0..=n_sites)
        .map(|downs| SzSectorView {
            twice_sz: n_sites as i64 - 2 * downs as i64,
            downs,
            members: Vec::new(),
        })
        .collect();
    for m in 0..(1usize << n_sites) {
        let downs = n_sites - m.count_ones() as usize;
        views[downs].members.push(m);
    }
    views
}

const STATE_MAGIC: &[u8; 8] = b"NEELGENS";
const STATE_VERSION: u32 = 1;

/// Binary dump: 8-byte magic, u32 version, u32 N (little-endian), then
/// 2^N (re, im) f64 LE pairs. A JSON sidecar `<path>.json` carries the
/// caller's metadata (lattice hash, construction recipe, ...).
pub fn write_state_file(
    state: &StateVector,
    path: &Path,
    meta: &serde_json::Value,
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(STATE_MAGIC)?;
    f.write_all(&STATE_VERSION.to_le_bytes())?;
    f.write_all(&(state.n_sites as u32).to_le_bytes())?;
    for a in &state.amps {
        f.write_all(&a.re.to_le_bytes())?;
        f.write_all(&a.im.to_le_bytes())?;
    }
    f.flush()?;
    let sidecar = serde_json::json!({
        "format": {"magic": "NEELGENS", "version": STATE_VERSION},
        "n_sites": state.n_sites,
        "meta": meta,
    });
    std::fs::write(
        sidecar_path(path),
        serde_json::to_string_pretty(&sidecar)?,
    )?;
    Ok(())
}

pub fn read_state_file(path: &Path) -> Result<(StateVector, Option<serde_json::Value>)> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != STATE_MAGIC {
        return Err(Error::BadMagic);
    }
    let mut word = [0u8; 4];
    f.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != STATE_VERSION {
        return Err(Error::BadVersion(version));
    }
    f.read_exact(&mut word)?;
    let n_sites = u32::from_le_bytes(word) as usize;
    if n_sites == 0 || n_sites > MAX_SITES {
        return Err(Error::SizeCap {
            n: n_sites,
            cap: MAX_SITES,
        });
    }
    let mut amps = Vec::with_capacity(1 << n_sites);
    let mut pair = [0u8; 16];
    for _ in 0..(1usize << n_sites) {
        f.read_exact(&mut pair)?;
        let re = f64::from_le_bytes(pair[..8].try_into().unwrap());
        let im = f64::from_le_bytes(pair[8..].try_into().unwrap());
        amps.push(Complex64::new(re, im));
    }
    let meta = match std::fs::read_to_string(sidecar_path(path)) {
        Ok(text) => Some(serde_json::from_str(&text)?),
        Err(_) => None,
    };
    Ok((StateVector::from_amplitudes(n_sites, amps)?, meta))
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::chain;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ladder_actions_two_sites() {
        // |↑↑⟩ = mask 0b11
        let up2 = StateVector::basis(2, 0b11).unwrap();
        let lowered = up2.apply_site_op(0, SiteOp::SMinus).unwrap();
        // s^-_0 |↑↑⟩ = |↓↑⟩ = mask 0b10
        assert_eq!(lowered.amp(0b10), c(1.0, 0.0));
        assert_eq!(lowered.norm_sq(), 1.0);
        // nilpotency
        let twice = lowered.apply_site_op(0, SiteOp::SMinus).unwrap();
        assert_eq!(twice.norm_sq(), 0.0);
        // s^x_0 |↓↑⟩ = (1/2)|↑↑⟩
        let x = lowered.apply_site_op(0, SiteOp::Sx).unwrap();
        assert_eq!(x.amp(0b11), c(0.5, 0.0));
        assert_eq!(x.norm_sq(), 0.25);
    }

    #[test]
    fn sy_phases() {
        let up = StateVector::basis(1, 1).unwrap();
        let y = up.apply_site_op(0, SiteOp::Sy).unwrap();
        assert_eq!(y.amp(0), c(0.0, 0.5)); // s^y|↑⟩ = (i/2)|↓⟩
        let down = StateVector::basis(1, 0).unwrap();
        let y = down.apply_site_op(0, SiteOp::Sy).unwrap();
        assert_eq!(y.amp(1), c(0.0, -0.5)); // s^y|↓⟩ = -(i/2)|↑⟩
    }

    #[test]
    fn fourier_minus_at_pi_makes_singlet() {
        let lat = chain(2).unwrap();
        let up2 = StateVector::basis(2, 0b11).unwrap();
        let s = up2.apply_fourier_op(&lat, &[1], FourierOp::SMinus).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((s.amp(0b10) - c(r, 0.0)).norm() < 1e-15); // |↓↑⟩
        assert!((s.amp(0b01) - c(-r, 0.0)).norm() < 1e-15); // -|↑↓⟩
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fourier_z_at_zero_is_total_sz() {
        let lat = chain(4).unwrap();
        let st = StateVector::basis(4, 0b0111).unwrap(); // 3 up, 1 down: Sz = 1
        let z = st.apply_fourier_op(&lat, &[0], FourierOp::Sz).unwrap();
        // S^z_{q=0} = 𝒮_z/√N
        assert!((z.amp(0b0111) - c(1.0 / 2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inner_products() {
        let a = StateVector::basis(2, 0b01).unwrap();
        let b = StateVector::basis(2, 0b10).unwrap();
        assert_eq!(inner(&a, &a).unwrap(), c(1.0, 0.0));
        assert_eq!(inner(&a, &b).unwrap(), c(0.0, 0.0));
        let sup = a.add_scaled(&b, c(0.0, 1.0)).unwrap();
        assert!((inner(&sup, &a).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((inner(&a, &sup).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((inner(&sup, &b).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn sector_decompose_weights() {
        let mut s = StateVector::zero(2).unwrap();
        s = s
            .plus(&StateVector::basis(2, 0b11).unwrap().scaled(c(0.6, 0.0)))
            .unwrap();
        s = s
            .plus(&StateVector::basis(2, 0b01).unwrap().scaled(c(0.0, 0.8)))
            .unwrap();
        let secs = s.sector_decompose();
        // (sz, weight) indexed by downs: downs=0 → sz=1, downs=1 → sz=0
        assert_eq!(secs[0], (1.0, 0.36));
        assert!((secs[1].1 - 0.64).abs() < 1e-15);
        assert_eq!(secs[2].1, 0.0);
    }

    #[test]
    fn sector_views_partition_basis() {
        let views = sector_views(6);
        let total: usize = views.iter().map(|v| v.members.len()).sum();
        assert_eq!(total, 64);
        for v in &views {
            for &m in &v.members {
                assert_eq!(6 - m.count_ones() as usize, v.downs);
            }
            assert!(v.members.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(views[3].members.len(), 20); // C(6,3)
    }

    #[test]
    fn dump_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bin");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let s = StateVector::random(5, &mut rng).unwrap();
        let meta = serde_json::json!({"recipe": "random", "seed": 7});
        write_state_file(&s, &path, &meta).unwrap();
        let (back, side) = read_state_file(&path).unwrap();
        assert_eq!(back.n_sites(), 5);
        assert_eq!(back.amplitudes(), s.amplitudes());
        assert_eq!(side.unwrap()["meta"]["seed"], 7);
    }

    #[test]
    fn rotate_z_phases() {
        let s = StateVector::basis(2, 0b11).unwrap(); // Sz = +1
        let r = s.rotate_z(std::f64::consts::PI / 2.0);
        assert!((r.amp(0b11) - c(0.0, 1.0)).norm() < 1e-15);
    }
}
