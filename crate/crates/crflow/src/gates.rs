//! Pauli-basis gate parameters of the effective Hamiltonian, the printed
//! lowest-order closed forms, detuning-region classification and the
//! Kerr-versus-energy-basis observable error.

use crate::model::{BuiltModel, DeviceSpec, ModelError, Role};
use crate::opalg::CMatrix;
use crate::swpt::{self, SwptError};
use crate::transmon::MatrixElements;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GateError {
    #[error("matrix dimension {0} is not 2^{1}")]
    BadDimension(usize, usize),
    #[error("decomposition input is not Hermitian (max anti-Hermitian part {0:.3e})")]
    NotHermitian(f64),
    #[error("closed form evaluated at a pole: denominator {denom} = {value:.3e} MHz")]
    ClosedFormPole { denom: &'static str, value: f64 },
    #[error("Kerr/energy coefficient ratio is negative; error measure undefined")]
    InvalidCoefficientRatio,
    #[error(transparent)]
    Swpt(#[from] SwptError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("detuning {delta_ct} MHz sits on the pole at {pole_mhz} MHz")]
    AtBoundary { delta_ct: f64, pole_mhz: f64 },
    #[error("detuning {delta_ct} MHz outside the perturbative window ({lo}, {hi}) MHz")]
    OutOfRange { delta_ct: f64, lo: f64, hi: f64 },
}

fn pauli_matrix(ch: u8) -> DMatrix<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match ch {
        b'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        b'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        b'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        b'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => unreachable!(),
    }
}

/// Dense matrix of a Pauli string such as "ZX" (leftmost letter = first
/// tensor factor).
pub fn pauli_string_matrix(label: &str) -> DMatrix<Complex64> {
    let mut out = DMatrix::identity(1, 1);
    for ch in label.bytes() {
        out = out.kronecker(&pauli_matrix(ch));
    }
    out
}

fn pauli_labels(n_qubits: usize) -> Vec<String> {
    let letters = [b'I', b'X', b'Y', b'Z'];
    let mut labels = vec![String::new()];
    for _ in 0..n_qubits {
        labels = labels
            .iter()
            .flat_map(|p| {
                letters
                    .iter()
                    .map(move |l| format!("{p}{}", *l as char))
            })
            .collect();
    }
    labels
}

/// Coefficients `w_P` of `H = sum_P w_P P / 2` over all Pauli strings:
/// `w_P = tr(P H) / 2^(n-1)`. Reconstruction is exact.
pub fn pauli_decompose(
    h: &CMatrix,
    n_qubits: usize,
) -> Result<Vec<(String, f64)>, GateError> {
    let dim = 1usize << n_qubits;
    if h.nrows() != dim || h.ncols() != dim {
        return Err(GateError::BadDimension(h.nrows(), n_qubits));
    }
    let anti = (h - h.adjoint()).camax();
    if anti > 1e-9 * h.camax().max(1e-12) {
        return Err(GateError::NotHermitian(anti));
    }
    let norm = 1.0 / (dim as f64 / 2.0);
    let mut out = Vec::with_capacity(4usize.pow(n_qubits as u32));
    for label in pauli_labels(n_qubits) {
        let p = pauli_string_matrix(&label);
        let tr: Complex64 = (&p * h).trace();
        out.push((label, tr.re * norm));
    }
    Ok(out)
}

/// `sum_P w_P P / 2` for testing reconstruction.
pub fn pauli_reconstruct(coeffs: &[(String, f64)], n_qubits: usize) -> CMatrix {
    let dim = 1usize << n_qubits;
    let mut h = CMatrix::zeros(dim, dim);
    for (label, w) in coeffs {
        if *w != 0.0 {
            h += pauli_string_matrix(label) * Complex64::new(0.5 * w, 0.0);
        }
    }
    h
}

/// Pauli-basis rates of the static effective Hamiltonian restricted to the
/// computational subspace. For two qubits the canonical nonzero set is
/// {IX, IZ, ZI, ZX, ZZ}; with three qubits the 11 strings over {I,Z} on the
/// control/spectator sectors and {I,X,Z} on the target.
#[derive(Debug, Clone)]
pub struct GateParams {
    pub n_qubits: usize,
    /// Position of the target qubit among the tensor factors.
    pub target_factor: usize,
    pub order: u8,
    pub kerr_basis: bool,
    pub static_subtracted: bool,
    coeffs: BTreeMap<String, f64>,
}

impl GateParams {
    pub fn from_coeffs(
        coeffs: BTreeMap<String, f64>,
        n_qubits: usize,
        target_factor: usize,
        order: u8,
        kerr_basis: bool,
        static_subtracted: bool,
    ) -> Self {
        Self {
            n_qubits,
            target_factor,
            order,
            kerr_basis,
            static_subtracted,
            coeffs,
        }
    }

    pub fn get(&self, label: &str) -> f64 {
        self.coeffs.get(label).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &BTreeMap<String, f64> {
        &self.coeffs
    }

    /// Canonical rate names: the dominant strings given which factor is the
    /// target ({I,X,Z} there, {I,Z} elsewhere), identity excluded.
    pub fn canonical_labels(&self) -> Vec<String> {
        let mut labels = vec![String::new()];
        for f in 0..self.n_qubits {
            let letters: &[u8] = if f == self.target_factor {
                &[b'I', b'X', b'Z']
            } else {
                &[b'I', b'Z']
            };
            labels = labels
                .iter()
                .flat_map(|p| letters.iter().map(move |l| format!("{p}{}", *l as char)))
                .collect();
        }
        labels.retain(|l| l.bytes().any(|b| b != b'I'));
        labels
    }

    /// The five two-qubit rates (IX, IZ, ZI, ZX, ZZ) in MHz.
    pub fn two_qubit_rates(&self) -> (f64, f64, f64, f64, f64) {
        (
            self.get("IX"),
            self.get("IZ"),
            self.get("ZI"),
            self.get("ZX"),
            self.get("ZZ"),
        )
    }
}

fn computational_block(built: &BuiltModel, h: &CMatrix) -> CMatrix {
    let idx = built.computational_indices();
    let dim = idx.len();
    let mut out = CMatrix::zeros(dim, dim);
    for (r, &ir) in idx.iter().enumerate() {
        for (c, &ic) in idx.iter().enumerate() {
            out[(r, c)] = h[(ir, ic)];
        }
    }
    out
}

fn decompose_static(
    spec: &DeviceSpec,
    order: u8,
) -> Result<(BuiltModel, BTreeMap<String, f64>), GateError> {
    let series = swpt::run_swpt(spec, order)?;
    let h = series.static_hamiltonian(&spec.tol);
    let block = computational_block(&series.model, &h);
    let n = series.model.dims.len();
    let coeffs = pauli_decompose(&block, n)?;
    Ok((series.model, coeffs.into_iter().collect()))
}

/// Gate parameters from the engine. The drive-independent parts of the
/// single-qubit Z rates (the exchange dressing, which is not observable)
/// are removed by subtracting a zero-amplitude run at the same order.
pub fn gate_params(spec: &DeviceSpec, order: u8) -> Result<GateParams, GateError> {
    let (built, mut coeffs) = decompose_static(spec, order)?;
    let mut quiet = spec.clone();
    quiet.drive.amp_mhz = 0.0;
    let (_, statics) = decompose_static(&quiet, order)?;
    for (label, value) in coeffs.iter_mut() {
        let weight_z = label.bytes().filter(|b| *b == b'Z').count();
        let weight_other = label.bytes().filter(|b| *b != b'Z' && *b != b'I').count();
        if weight_z == 1 && weight_other == 0 {
            *value -= statics.get(label).copied().unwrap_or(0.0);
        }
    }
    Ok(GateParams::from_coeffs(
        coeffs,
        built.dims.len(),
        built.target_factor,
        order,
        spec.kerr_mode,
        true,
    ))
}

/// Rates of a single perturbative order, no static subtraction. Order 2 is
/// the lowest-order estimate; order 4 isolates the J Omega^3 class.
pub fn gate_params_at_order(spec: &DeviceSpec, order: u8) -> Result<GateParams, GateError> {
    let series = swpt::run_swpt(spec, order)?;
    let h = series.orders[order as usize - 1].dc_part(&spec.tol);
    let block = computational_block(&series.model, &h);
    let n = series.model.dims.len();
    let coeffs: BTreeMap<String, f64> = pauli_decompose(&block, n)?.into_iter().collect();
    Ok(GateParams::from_coeffs(
        coeffs,
        series.model.dims.len(),
        series.model.target_factor,
        order,
        spec.kerr_mode,
        false,
    ))
}

/// The printed lowest-order rate formulas plus the fourth-order ZX class,
/// evaluated without the engine.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormParams {
    pub ix2: f64,
    pub iy2: f64,
    pub zi2: f64,
    pub zx2: f64,
    pub zz2: f64,
    /// Fourth-order J Omega^3 correction to ZX.
    pub zx4: f64,
    /// Lowest-order coefficients A (ZX = A J Omega), B (ZZ = B J^2) and
    /// C (ZI = C Omega^2).
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub coeff_c: f64,
}

fn check_denominator(name: &'static str, v: f64, pole_mhz: f64) -> Result<f64, GateError> {
    if v.abs() <= pole_mhz {
        Err(GateError::ClosedFormPole {
            denom: name,
            value: v,
        })
    } else {
        Ok(v)
    }
}

/// Evaluates Table-style closed forms with the spec's matrix elements
/// (harmonic ones in Kerr mode) and crosstalk split when present.
pub fn closed_form_params(spec: &DeviceSpec) -> Result<ClosedFormParams, GateError> {
    spec.validate()?;
    let ce = spec.elements(Role::Control)?;
    let te = spec.elements(Role::Target)?;
    let delta = spec.delta_ct();
    let alpha_c = spec.qubit(Role::Control).alpha_mhz;
    let alpha_t = spec.qubit(Role::Target).alpha_mhz;
    let j = spec.coupling(Role::Control, Role::Target).unwrap_or(0.0);
    let omega = spec.drive.amp_mhz;
    closed_forms_raw(&ce, &te, delta, alpha_c, alpha_t, j, omega, spec)
}

#[allow(clippy::too_many_arguments)]
fn closed_forms_raw(
    ce: &MatrixElements,
    te: &MatrixElements,
    delta: f64,
    alpha_c: f64,
    alpha_t: f64,
    j: f64,
    omega: f64,
    spec: &DeviceSpec,
) -> Result<ClosedFormParams, GateError> {
    let pole = spec.tol.pole_mhz;
    let d0 = check_denominator("Delta_ct", delta, pole)?;
    let d1 = check_denominator("Delta_ct + alpha_c", delta + alpha_c, pole)?;
    let d2 = check_denominator("Delta_ct - alpha_t", delta - alpha_t, pole)?;
    let d3 = check_denominator("2 Delta_ct + alpha_c", 2.0 * delta + alpha_c, pole)?;
    let d4 = check_denominator("2 Delta_ct + 3 alpha_c", 2.0 * delta + 3.0 * alpha_c, pole)?;

    let nc01 = ce.nu[0];
    let nc12 = ce.nu[1];
    let nc23 = ce.nu[2];
    let nt01 = te.nu[0];
    let nt12 = te.nu[1];

    let coeff_a = 0.5 * (nt01 * nc12 * nc12 / d1 - 2.0 * nt01 * nc01 * nc01 / d0);
    let coeff_b = 0.5 * (nc01 * nc01 * nt12 * nt12 / d2 - nt01 * nt01 * nc12 * nc12 / d1);
    let coeff_c = nc12 * nc12 / (4.0 * d1) - nc01 * nc01 / (2.0 * d0);

    let (amp_on_control, leak) = match &spec.crosstalk {
        Some(ct) => (
            (1.0 - ct.a_c) * omega,
            Some((ct.a_t * omega, ct.phi_t)),
        ),
        None => (omega, None),
    };

    let mut ix2 = -nt01 * nc12 * nc12 / (2.0 * d1) * j * amp_on_control;
    let mut iy2 = 0.0;
    if let Some((amp_t, phi_t)) = leak {
        // Direct resonant drive on the target. The Y component carries the
        // sign of this crate's sigma_y convention.
        ix2 += nt01 * amp_t * phi_t.cos();
        iy2 -= nt01 * amp_t * phi_t.sin();
    }
    let zi2 = coeff_c * amp_on_control * amp_on_control;
    let zx2 = coeff_a * j * amp_on_control;
    let zz2 = coeff_b * j * j;

    let zx4 = (nc01.powi(4) * nt01 / (2.0 * d0.powi(3))
        + (-nc01 * nc01 * nc12 * nc12 * nt01 - 3.0 * nc12 * nc12 * nc23 * nc23 * nt01)
            / (4.0 * d0 * d0 * d1)
        + (nc01 * nc01 * nc12 * nc12 * nt01 - nc12 * nc12 * nc23 * nc23 * nt01)
            / (4.0 * d0 * d1 * d1)
        - nc12.powi(4) * nt01 / (4.0 * d1.powi(3))
        - nc01 * nc01 * nc12 * nc12 * nt01 / (4.0 * d0 * d0 * d3)
        + 9.0 * nc12 * nc12 * nc23 * nc23 * nt01 / (4.0 * d0 * d0 * d4))
        * j
        * amp_on_control.powi(3);

    Ok(ClosedFormParams {
        ix2,
        iy2,
        zi2,
        zx2,
        zz2,
        zx4,
        coeff_a,
        coeff_b,
        coeff_c,
    })
}

/// The Kerr-theory fourth-order ZX correction in closed form.
pub fn zx4_kerr(delta: f64, alpha_c: f64, j: f64, omega: f64) -> f64 {
    let num = 3.0 * alpha_c.powi(5)
        + 11.0 * alpha_c.powi(4) * delta
        + 15.0 * alpha_c.powi(3) * delta * delta
        + 9.0 * alpha_c * alpha_c * delta.powi(3);
    let den = 2.0
        * delta.powi(3)
        * (delta + alpha_c).powi(3)
        * (2.0 * delta + alpha_c)
        * (2.0 * delta + 3.0 * alpha_c);
    num / den * j * omega.powi(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    I,
    II,
    III,
    IV,
    V,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
            Region::V => "V",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionLabel {
    pub region: Region,
    pub lower_pole_mhz: f64,
    pub upper_pole_mhz: f64,
}

/// Detuning regions bounded by the perturbative poles:
/// I: (alpha_t, 0), II: (0, -alpha_c/2), III: (-alpha_c/2, -alpha_c),
/// IV: (-alpha_c, -3 alpha_c/2), V: (-3 alpha_c/2, -2 alpha_c). Boundary
/// values are poles, not members of a region.
pub fn classify_region(
    delta_ct: f64,
    alpha_c: f64,
    alpha_t: f64,
) -> Result<RegionLabel, RegionError> {
    assert!(alpha_c < 0.0 && alpha_t < 0.0);
    let bounds = [
        alpha_t,
        0.0,
        -alpha_c / 2.0,
        -alpha_c,
        -1.5 * alpha_c,
        -2.0 * alpha_c,
    ];
    for b in bounds {
        if delta_ct == b {
            return Err(RegionError::AtBoundary {
                delta_ct,
                pole_mhz: b,
            });
        }
    }
    if delta_ct < bounds[0] || delta_ct > bounds[5] {
        return Err(RegionError::OutOfRange {
            delta_ct,
            lo: bounds[0],
            hi: bounds[5],
        });
    }
    let regions = [Region::I, Region::II, Region::III, Region::IV, Region::V];
    for (k, reg) in regions.iter().enumerate() {
        if delta_ct > bounds[k] && delta_ct < bounds[k + 1] {
            return Ok(RegionLabel {
                region: *reg,
                lower_pole_mhz: bounds[k],
                upper_pole_mhz: bounds[k + 1],
            });
        }
    }
    unreachable!()
}

/// Relative experimental error of the Kerr prediction for ZX given measured
/// ZZ and ZI: `1 - (A_kerr / A) sqrt((B C)/(B_kerr C_kerr))`.
pub fn kerr_vs_energy_zx_error(spec: &DeviceSpec) -> Result<f64, GateError> {
    let mut en = spec.clone();
    en.kerr_mode = false;
    en.crosstalk = None;
    let mut kerr = en.clone();
    kerr.kerr_mode = true;
    let e = closed_form_params(&en)?;
    let k = closed_form_params(&kerr)?;
    let ratio = (e.coeff_b * e.coeff_c) / (k.coeff_b * k.coeff_c);
    if ratio < 0.0 {
        return Err(GateError::InvalidCoefficientRatio);
    }
    Ok(1.0 - (k.coeff_a / e.coeff_a) * ratio.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DriveFrequencyMode;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn table1_spec() -> DeviceSpec {
        let mut s = DeviceSpec::two_qubit(5114.0, 4914.0, -330.0, -330.0, 3.8, 50.0);
        s.drive.frequency = DriveFrequencyMode::BareTarget;
        s
    }

    #[test]
    fn pure_zx_input_decomposes_to_single_coefficient() {
        let c = 1.7;
        let h = pauli_string_matrix("ZX") * Complex64::new(0.5 * c, 0.0);
        let coeffs = pauli_decompose(&h, 2).unwrap();
        for (label, v) in coeffs {
            if label == "ZX" {
                assert!((v - c).abs() < 1e-14);
            } else {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_decomposes_to_ii() {
        let h = CMatrix::identity(4, 4);
        let coeffs = pauli_decompose(&h, 2).unwrap();
        for (label, v) in coeffs {
            if label == "II" {
                assert!((v - 2.0).abs() < 1e-14);
            } else {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn random_hermitian_reconstruction_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [2usize, 3] {
            let dim = 1usize << n;
            let a = CMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
            let coeffs = pauli_decompose(&h, n).unwrap();
            let back = pauli_reconstruct(&coeffs, n);
            assert!((back - h).camax() < 1e-13);
        }
    }

    #[test]
    fn pauli_orthogonality() {
        let labels = pauli_labels(2);
        for a in &labels {
            for b in &labels {
                let tr = (pauli_string_matrix(a) * pauli_string_matrix(b)).trace();
                let expect = if a == b { 4.0 } else { 0.0 };
                assert!((tr.re - expect).abs() < 1e-14);
                assert!(tr.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn table1_energy_basis_rates() {
        let s = table1_spec();
        let p = gate_params(&s, 2).unwrap();
        assert!((p.get("IX") - 1.250).abs() < 2e-3, "IX {}", p.get("IX"));
        assert!((p.get("ZI") - (-14.371)).abs() < 2e-3, "ZI {}", p.get("ZI"));
        assert!((p.get("ZX") - (-2.118)).abs() < 2e-3, "ZX {}", p.get("ZX"));
        assert!((p.get("ZZ") - 0.114).abs() < 2e-3, "ZZ {}", p.get("ZZ"));
    }

    #[test]
    fn table1_kerr_rates() {
        let mut s = table1_spec();
        s.kerr_mode = true;
        let p = gate_params(&s, 2).unwrap();
        assert!((p.get("IX") - 1.462).abs() < 2e-3);
        assert!((p.get("ZI") - (-15.865)).abs() < 2e-3);
        assert!((p.get("ZX") - (-2.411)).abs() < 2e-3);
        assert!((p.get("ZZ") - 0.138).abs() < 2e-3);
    }

    #[test]
    fn engine_matches_closed_forms_to_float_precision() {
        for (delta, omega) in [(-150.0, 30.0), (100.0, 55.0), (200.0, 50.0), (260.0, 75.0)] {
            let mut s = table1_spec();
            s.qubits[1].omega_mhz = s.qubits[0].omega_mhz - delta;
            s.drive.amp_mhz = omega;
            let cf = closed_form_params(&s).unwrap();
            let p = gate_params(&s, 2).unwrap();
            for (label, want) in [
                ("IX", cf.ix2),
                ("ZI", cf.zi2),
                ("ZX", cf.zx2),
                ("ZZ", cf.zz2),
            ] {
                let got = p.get(label);
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1e-6),
                    "{label} at delta {delta}: engine {got} vs closed {want}"
                );
            }
            assert!(p.get("IZ").abs() < 1e-10, "IZ dynamic at order 2");
        }
    }

    #[test]
    fn kerr_fourth_order_zx_matches_printed_form() {
        // The printed correction is the J Omega^3 class; the J^3 Omega class
        // also lives at fourth order and is suppressed by (J/Omega)^2, so the
        // comparison runs at small exchange.
        let j = 1e-4;
        for delta in [-150.0, 100.0, 200.0, 260.0, 420.0] {
            let mut s = table1_spec();
            s.kerr_mode = true;
            s.couplings[0].2 = j;
            s.qubits[1].omega_mhz = s.qubits[0].omega_mhz - delta;
            let p4 = gate_params_at_order(&s, 4).unwrap();
            let want = zx4_kerr(delta, -330.0, j, 50.0);
            let got = p4.get("ZX");
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1e-12),
                "delta {delta}: engine {got} vs printed {want}"
            );
        }
    }

    #[test]
    fn energy_basis_zx4_reduces_to_kerr_form() {
        let mut s = table1_spec();
        s.kerr_mode = true;
        let cf = closed_form_params(&s).unwrap();
        let want = zx4_kerr(200.0, -330.0, 3.8, 50.0);
        assert!((cf.zx4 - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn closed_form_vs_engine_fourth_order_energy_basis() {
        // The printed class is linear in J and cubic in Omega; at small J
        // the remaining J^3 Omega class drops below the comparison floor.
        let mut s = table1_spec();
        s.couplings[0].2 = 1e-4;
        let p4 = gate_params_at_order(&s, 4).unwrap();
        let cf = closed_form_params(&s).unwrap();
        assert!(
            (p4.get("ZX") - cf.zx4).abs() < 1e-9 * cf.zx4.abs().max(1e-12),
            "engine {} vs closed {}",
            p4.get("ZX"),
            cf.zx4
        );
    }

    #[test]
    fn drive_parity_of_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let delta: f64 = [-140.0, 90.0, 210.0, 400.0, 590.0][rng.random_range(0..5)];
            let omega: f64 = rng.random_range(10.0..70.0);
            let mut plus = table1_spec();
            plus.qubits[1].omega_mhz = plus.qubits[0].omega_mhz - delta;
            plus.drive.amp_mhz = omega;
            let mut minus = plus.clone();
            minus.drive.amp_mhz = -omega;
            let pp = gate_params(&plus, 4).unwrap();
            let pm = gate_params(&minus, 4).unwrap();
            for odd in ["IX", "ZX"] {
                assert!(
                    (pp.get(odd) + pm.get(odd)).abs() <= 1e-12 * pp.get(odd).abs().max(1e-12),
                    "{odd} not odd under drive sign flip"
                );
            }
            for even in ["IZ", "ZI", "ZZ"] {
                assert!(
                    (pp.get(even) - pm.get(even)).abs() <= 1e-12 * pp.get(even).abs().max(1e-12),
                    "{even} not even under drive sign flip"
                );
            }
        }
    }

    #[test]
    fn drive_phase_rotates_zx_into_zy() {
        let mut s = table1_spec();
        s.drive.phase_rad = std::f64::consts::FRAC_PI_2;
        let p = gate_params(&s, 2).unwrap();
        let reference = gate_params(&table1_spec(), 2).unwrap();
        assert!(p.get("ZX").abs() < 1e-9);
        assert!((p.get("ZY").abs() - reference.get("ZX").abs()).abs() < 1e-9);
    }

    #[test]
    fn zero_drive_kills_x_rates() {
        let mut s = table1_spec();
        s.drive.amp_mhz = 0.0;
        let p = gate_params(&s, 4).unwrap();
        assert_eq!(p.get("IX"), 0.0);
        assert_eq!(p.get("ZX"), 0.0);
    }

    #[test]
    fn crosstalk_lowest_order_ix() {
        let mut s = table1_spec();
        s.crosstalk = Some(crate::model::CrosstalkSpec {
            a_c: 0.05,
            a_t: 0.05,
            phi_t: std::f64::consts::PI / 36.0,
        });
        let p = gate_params(&s, 2).unwrap();
        assert!((p.get("IX") - 3.603).abs() < 2e-3, "IX {}", p.get("IX"));
        assert!((p.get("IY").abs() - 0.211).abs() < 2e-3, "IY {}", p.get("IY"));
        assert!((p.get("ZI") - (-12.969)).abs() < 2e-3, "ZI {}", p.get("ZI"));
        assert!((p.get("ZX") - (-2.012)).abs() < 2e-3, "ZX {}", p.get("ZX"));
        assert!((p.get("ZZ") - 0.114).abs() < 2e-3, "ZZ {}", p.get("ZZ"));
        let cf = closed_form_params(&s).unwrap();
        assert!((cf.ix2 - p.get("IX")).abs() < 1e-9);
        assert!((cf.iy2 - p.get("IY")).abs() < 1e-9);
    }

    #[test]
    fn region_classification() {
        assert_eq!(
            classify_region(200.0, -330.0, -330.0).unwrap().region,
            Region::III
        );
        assert_eq!(
            classify_region(100.0, -330.0, -330.0).unwrap().region,
            Region::II
        );
        assert_eq!(
            classify_region(-100.0, -330.0, -330.0).unwrap().region,
            Region::I
        );
        assert_eq!(
            classify_region(400.0, -330.0, -330.0).unwrap().region,
            Region::IV
        );
        assert_eq!(
            classify_region(600.0, -330.0, -330.0).unwrap().region,
            Region::V
        );
        assert!(matches!(
            classify_region(165.0, -330.0, -330.0),
            Err(RegionError::AtBoundary { pole_mhz, .. }) if pole_mhz == 165.0
        ));
        assert!(matches!(
            classify_region(700.0, -330.0, -330.0),
            Err(RegionError::OutOfRange { .. })
        ));
    }

    #[test]
    fn hilbert_cutoff_study() {
        let rates_at = |cutoff: usize, omega: f64| -> (f64, f64) {
            let mut s = table1_spec();
            s.qubits[0].cutoff = cutoff;
            s.qubits[1].cutoff = cutoff;
            s.drive.amp_mhz = omega;
            let p = gate_params(&s, 4).unwrap();
            (p.get("ZX"), p.get("ZZ"))
        };
        let (_, zz2) = rates_at(2, 50.0);
        assert_eq!(zz2, 0.0, "two-level model must not produce ZZ");
        let (_, zz3) = rates_at(3, 50.0);
        assert!(zz3.abs() > 1e-3);
        let (_, zz4_lo) = rates_at(4, 30.0);
        let (_, zz3_lo) = rates_at(3, 30.0);
        let (_, zz4_hi) = rates_at(4, 60.0);
        let (_, zz3_hi) = rates_at(3, 60.0);
        assert!(
            (zz4_hi - zz3_hi).abs() > (zz4_lo - zz3_lo).abs(),
            "fourth-level correction should grow with drive"
        );
    }

    #[test]
    fn zx_over_zz_ratio_peaks_in_region_ii() {
        let ratio = |delta: f64| -> f64 {
            let mut s = table1_spec();
            s.qubits[1].omega_mhz = s.qubits[0].omega_mhz - delta;
            let p = gate_params(&s, 4).unwrap();
            (p.get("ZX") / p.get("ZZ")).abs()
        };
        let mid_ii = ratio(100.0);
        for other in [-100.0, 200.0, 400.0, 580.0] {
            assert!(
                mid_ii > ratio(other),
                "ZX/ZZ at 100 MHz should dominate {other} MHz"
            );
        }
    }

    #[test]
    fn kerr_energy_error_measure() {
        // With identical coefficients on both sides the measure vanishes.
        let mut kerr_both = table1_spec();
        kerr_both.kerr_mode = true;
        let k = closed_form_params(&kerr_both).unwrap();
        let ratio = (k.coeff_b * k.coeff_c) / (k.coeff_b * k.coeff_c);
        assert_eq!(1.0 - (k.coeff_a / k.coeff_a) * ratio.sqrt(), 0.0);

        // Magnitude at the reference point, and monotone decrease with
        // higher qubit frequency at fixed detuning.
        let err_at = |omega_c: f64| {
            let mut s = table1_spec();
            s.qubits[0].omega_mhz = omega_c;
            s.qubits[1].omega_mhz = omega_c - 200.0;
            kerr_vs_energy_zx_error(&s).unwrap().abs()
        };
        let reference = err_at(5114.0);
        assert!(reference > 0.001 && reference < 0.1, "error {reference}");
        let (a, b, c) = (err_at(4800.0), err_at(5100.0), err_at(5400.0));
        assert!(a > b && b > c, "error not decreasing: {a} {b} {c}");
    }
}
