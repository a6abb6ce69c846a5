//! Cross-resonance gate Hamiltonians in the transmon energy basis: the
//! two-qubit model, the control/target-spectator three-qubit extensions,
//! classical crosstalk on the drive line, and the exchange-dressed basis.

use crate::opalg::{AlgebraTol, BlockStructure, CMatrix, FourierOperator};
use crate::transmon::{self, MatrixElements, TransmonError, TransmonParams};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("device must have exactly one control and one target qubit")]
    BadRoles,
    #[error("device supports at most one spectator qubit")]
    TooManySpectators,
    #[error("coupling strength must be positive, got {0} MHz")]
    BadCoupling(f64),
    #[error("drive amplitude must be non-negative, got {0} MHz")]
    BadDrive(f64),
    #[error("qubit cutoff must lie in 2..=4, got {0}")]
    BadCutoff(usize),
    #[error("coupling graph does not match a supported topology (control-target, spectator-control-target or control-target-spectator chain)")]
    BadTopology,
    #[error("crosstalk amplitudes must lie in [0, 1], got A_c = {0}, A_t = {1}")]
    BadCrosstalk(f64, f64),
    #[error("crosstalk modeling is only supported for two-qubit devices")]
    CrosstalkWithSpectator,
    #[error("spec has no spectator qubit")]
    NoSpectator,
    #[error("spec has a spectator qubit but a two-qubit build was requested")]
    UnexpectedSpectator,
    #[error("dressed-state label ambiguous: best overlap {overlap:.3} for bare state {state}")]
    LabelAmbiguity { state: usize, overlap: f64 },
    #[error(transparent)]
    Transmon(#[from] TransmonError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Control,
    Target,
    Spectator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub role: Role,
    pub omega_mhz: f64,
    pub alpha_mhz: f64,
    pub cutoff: usize,
}

/// How the CR tone frequency is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DriveFrequencyMode {
    /// Bare target frequency; the convention under which the closed-form
    /// rates are written.
    BareTarget,
    /// Target frequency shifted by the exchange dressing (the experimentally
    /// calibrated choice). Default.
    DressedTarget,
    /// Explicit value in MHz.
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Amplitude Omega (MHz).
    pub amp_mhz: f64,
    /// Drive phase phi_d; pi yields ZX, pi/2 yields ZY.
    pub phase_rad: f64,
    pub frequency: DriveFrequencyMode,
}

/// Classical microwave crosstalk: the control line loses a fraction `a_c` of
/// its amplitude and a fraction `a_t` leaks onto the target with relative
/// phase `phi_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkSpec {
    pub a_c: f64,
    pub a_t: f64,
    pub phi_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub qubits: Vec<QubitSpec>,
    /// (qubit index, qubit index, J in MHz).
    pub couplings: Vec<(usize, usize, f64)>,
    pub drive: DriveSpec,
    pub crosstalk: Option<CrosstalkSpec>,
    /// Keep only co-rotating exchange and drive terms. Default on.
    pub rwa: bool,
    /// Replace energy-basis matrix elements by harmonic (sqrt n) values.
    pub kerr_mode: bool,
    /// Restore the third-level deviation beta on the bare ladders.
    pub include_beta: bool,
    /// Restore the 0-3 charge/flux elements dropped by default.
    pub include_03_elements: bool,
    pub tol: AlgebraTol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    TwoQubit,
    ControlSpectator,
    TargetSpectator,
}

impl DeviceSpec {
    /// Two-qubit device with shared anharmonicity/cutoff defaults of the
    /// reference hardware and an explicit drive.
    pub fn two_qubit(
        omega_c: f64,
        omega_t: f64,
        alpha_c: f64,
        alpha_t: f64,
        j_mhz: f64,
        amp_mhz: f64,
    ) -> Self {
        Self {
            qubits: vec![
                QubitSpec {
                    role: Role::Control,
                    omega_mhz: omega_c,
                    alpha_mhz: alpha_c,
                    cutoff: 4,
                },
                QubitSpec {
                    role: Role::Target,
                    omega_mhz: omega_t,
                    alpha_mhz: alpha_t,
                    cutoff: 4,
                },
            ],
            couplings: vec![(0, 1, j_mhz)],
            drive: DriveSpec {
                amp_mhz,
                phase_rad: std::f64::consts::PI,
                frequency: DriveFrequencyMode::DressedTarget,
            },
            crosstalk: None,
            rwa: true,
            kerr_mode: false,
            include_beta: false,
            include_03_elements: false,
            tol: AlgebraTol::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n_control = self.qubits.iter().filter(|q| q.role == Role::Control).count();
        let n_target = self.qubits.iter().filter(|q| q.role == Role::Target).count();
        let n_spec = self.qubits.iter().filter(|q| q.role == Role::Spectator).count();
        if n_control != 1 || n_target != 1 {
            return Err(ModelError::BadRoles);
        }
        if n_spec > 1 {
            return Err(ModelError::TooManySpectators);
        }
        for q in &self.qubits {
            if !(2..=4).contains(&q.cutoff) {
                return Err(ModelError::BadCutoff(q.cutoff));
            }
        }
        for &(_, _, j) in &self.couplings {
            if !(j > 0.0) {
                return Err(ModelError::BadCoupling(j));
            }
        }
        // Negative amplitudes are accepted: the drive-parity checks and the
        // echo construction rely on sign-flipped runs.
        if !self.drive.amp_mhz.is_finite() {
            return Err(ModelError::BadDrive(self.drive.amp_mhz));
        }
        if let Some(ct) = &self.crosstalk {
            if !(0.0..=1.0).contains(&ct.a_c) || !(0.0..=1.0).contains(&ct.a_t) {
                return Err(ModelError::BadCrosstalk(ct.a_c, ct.a_t));
            }
            if n_spec > 0 {
                return Err(ModelError::CrosstalkWithSpectator);
            }
        }
        self.topology()?;
        Ok(())
    }

    pub fn qubit_index(&self, role: Role) -> Option<usize> {
        self.qubits.iter().position(|q| q.role == role)
    }

    pub fn qubit(&self, role: Role) -> &QubitSpec {
        &self.qubits[self.qubit_index(role).expect("role present")]
    }

    pub fn has_spectator(&self) -> bool {
        self.qubit_index(Role::Spectator).is_some()
    }

    /// Control-target detuning (bare frequencies).
    pub fn delta_ct(&self) -> f64 {
        self.qubit(Role::Control).omega_mhz - self.qubit(Role::Target).omega_mhz
    }

    /// Spectator-target detuning (bare frequencies).
    pub fn delta_st(&self) -> Option<f64> {
        self.qubit_index(Role::Spectator)
            .map(|i| self.qubits[i].omega_mhz - self.qubit(Role::Target).omega_mhz)
    }

    pub fn coupling(&self, a: Role, b: Role) -> Option<f64> {
        let ia = self.qubit_index(a)?;
        let ib = self.qubit_index(b)?;
        self.couplings
            .iter()
            .find(|(x, y, _)| (*x == ia && *y == ib) || (*x == ib && *y == ia))
            .map(|(_, _, j)| *j)
    }

    pub fn topology(&self) -> Result<Topology, ModelError> {
        let jct = self.coupling(Role::Control, Role::Target);
        let jsc = self.coupling(Role::Spectator, Role::Control);
        let jst = self.coupling(Role::Spectator, Role::Target);
        match (self.has_spectator(), jct, jsc, jst) {
            (false, _, _, _) if self.couplings.is_empty() => Ok(Topology::TwoQubit),
            (false, Some(_), _, _) if self.couplings.len() == 1 => Ok(Topology::TwoQubit),
            (true, Some(_), Some(_), None) if self.couplings.len() == 2 => {
                Ok(Topology::ControlSpectator)
            }
            (true, Some(_), None, Some(_)) if self.couplings.len() == 2 => {
                Ok(Topology::TargetSpectator)
            }
            _ => Err(ModelError::BadTopology),
        }
    }

    pub(crate) fn transmon_params(&self, role: Role) -> Result<TransmonParams, TransmonError> {
        let q = self.qubit(role);
        TransmonParams::from_spectrum(q.omega_mhz, q.alpha_mhz, q.cutoff)
    }

    /// Charge matrix elements for one qubit, honoring kerr_mode.
    pub(crate) fn elements(&self, role: Role) -> Result<MatrixElements, ModelError> {
        if self.kerr_mode {
            return Ok(MatrixElements::harmonic());
        }
        let p = self.transmon_params(role)?;
        Ok(transmon::matrix_elements(p.epsilon)?)
    }

    /// Bare energy ladder `E_n - E_0` for one qubit (Kerr ladder built from
    /// the measured pair; beta restored only on request and never in Kerr
    /// mode, where the quartic model has no third-level deviation).
    pub(crate) fn ladder(&self, role: Role) -> Result<Vec<f64>, ModelError> {
        let q = self.qubit(role);
        let include_beta = self.include_beta && !self.kerr_mode;
        if include_beta {
            let p = self.transmon_params(role)?;
            Ok(p.kerr_ladder(q.cutoff, true))
        } else {
            Ok((0..q.cutoff)
                .map(|n| {
                    let nf = n as f64;
                    nf * q.omega_mhz + 0.5 * nf * (nf - 1.0) * q.alpha_mhz
                })
                .collect())
        }
    }
}

/// Everything the perturbation engine needs: tensor layout, the frame ladder
/// with the drive detuning folded into the target, the lab-frame interaction
/// and the static detuning insertion that compensates the frame shift.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub dims: Vec<usize>,
    /// Position of the target qubit in the tensor order.
    pub target_factor: usize,
    /// Roles in tensor order.
    pub roles: Vec<Role>,
    /// Bare diagonal energies per basis state (MHz).
    pub h0_bare: Vec<f64>,
    /// Frame diagonal: target ladder shifted so the drive is frame-static.
    pub h0_frame: Vec<f64>,
    /// Lab-frame interaction (exchange + drive terms).
    pub hint: FourierOperator,
    /// Static diagonal `(omega_t - omega_d) n_target`, treated at second
    /// order by the engine. Zero in bare mode.
    pub detuning_diag: Vec<f64>,
    pub omega_d: f64,
    pub blocks: BlockStructure,
}

impl BuiltModel {
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat index of a product state given per-factor levels.
    pub fn state_index(&self, levels: &[usize]) -> usize {
        let mut idx = 0;
        for (d, l) in self.dims.iter().zip(levels) {
            idx = idx * d + l;
        }
        idx
    }

    /// Indices of the computational product states (all levels in {0, 1}),
    /// ordered as the binary expansion over the tensor factors.
    pub fn computational_indices(&self) -> Vec<usize> {
        let n = self.dims.len();
        (0..1usize << n)
            .map(|bits| {
                let levels: Vec<usize> =
                    (0..n).map(|f| (bits >> (n - 1 - f)) & 1).collect();
                self.state_index(&levels)
            })
            .collect()
    }
}

/// Embeds per-factor operators into the product space.
fn kron_all(factors: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = out.kronecker(f);
    }
    out
}

fn embed_at(dims: &[usize], which: usize, op: &DMatrix<f64>) -> DMatrix<f64> {
    let factors: Vec<DMatrix<f64>> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if i == which {
                op.clone()
            } else {
                DMatrix::identity(d, d)
            }
        })
        .collect();
    kron_all(&factors)
}

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Pairwise second-order dressing shift of the target frequency from one
/// coupled qubit (the drive-frequency condition, averaged over the partner
/// computational states).
fn target_dressing_shift(
    t_elems: &MatrixElements,
    q_elems: &MatrixElements,
    delta_qt: f64,
    alpha_q: f64,
    alpha_t: f64,
    j: f64,
) -> f64 {
    let nq01 = q_elems.nu[0];
    let nq12 = q_elems.nu[1];
    let nt01 = t_elems.nu[0];
    let nt12 = t_elems.nu[1];
    0.5 * j
        * j
        * (nq01 * nq01 * nt12 * nt12 / (delta_qt - alpha_t)
            - nq12 * nq12 * nt01 * nt01 / (delta_qt + alpha_q)
            - 2.0 * nq01 * nq01 * nt01 * nt01 / delta_qt)
}

/// CR tone frequency for the spec's frequency mode. The dressed mode sums the
/// pairwise shifts from every qubit exchanged-coupled to the target.
pub fn drive_frequency(spec: &DeviceSpec) -> Result<f64, ModelError> {
    let omega_t = spec.qubit(Role::Target).omega_mhz;
    match spec.drive.frequency {
        DriveFrequencyMode::BareTarget => Ok(omega_t),
        DriveFrequencyMode::Explicit(v) => Ok(v),
        DriveFrequencyMode::DressedTarget => {
            let t_elems = spec.elements(Role::Target)?;
            let alpha_t = spec.qubit(Role::Target).alpha_mhz;
            let mut omega_d = omega_t;
            for role in [Role::Control, Role::Spectator] {
                if spec.qubit_index(role).is_none() {
                    continue;
                }
                if let Some(j) = spec.coupling(role, Role::Target) {
                    let q = spec.qubit(role);
                    let q_elems = spec.elements(role)?;
                    omega_d += target_dressing_shift(
                        &t_elems,
                        &q_elems,
                        q.omega_mhz - omega_t,
                        q.alpha_mhz,
                        alpha_t,
                        j,
                    );
                }
            }
            Ok(omega_d)
        }
    }
}

struct QubitOps {
    ladder: Vec<f64>,
    /// Charge lowering operator with energy-basis elements.
    ylow: DMatrix<f64>,
}

fn qubit_ops(spec: &DeviceSpec, role: Role) -> Result<QubitOps, ModelError> {
    let q = spec.qubit(role);
    let elems = spec.elements(role)?;
    Ok(QubitOps {
        ladder: spec.ladder(role)?,
        ylow: elems.charge_lowering(q.cutoff, spec.include_03_elements && !spec.kerr_mode),
    })
}

/// Exchange term `J (y_a^- y_b^+ + h.c.)`, plus the counter-rotating
/// `-J (y_a^- y_b^- + h.c.)` when the RWA is off. All terms are static in the
/// lab frame.
fn exchange_terms(
    dims: &[usize],
    a: usize,
    b: usize,
    j: f64,
    ya_low: &DMatrix<f64>,
    yb_low: &DMatrix<f64>,
    rwa: bool,
) -> CMatrix {
    let ya_m = embed_at(dims, a, ya_low);
    let yb_m = embed_at(dims, b, yb_low);
    let ya_p = ya_m.transpose();
    let yb_p = yb_m.transpose();
    let mut m = j * (&ya_m * &yb_p + &ya_p * &yb_m);
    if !rwa {
        m -= j * (&ya_m * &yb_m + &ya_p * &yb_p);
    }
    to_complex(&m)
}

/// Drive terms on one qubit: `Omega y sin(w_d t + phase)` expands to
/// `-(Omega/2) e^{i phase} y^- e^{i w_d t} + h.c.`, with the counter-rotating
/// pieces restored when the RWA is off.
fn drive_terms(
    dims: &[usize],
    which: usize,
    amp: f64,
    phase: f64,
    omega_d: f64,
    ylow: &DMatrix<f64>,
    rwa: bool,
    out: &mut Vec<(f64, CMatrix)>,
) {
    if amp == 0.0 {
        return;
    }
    let ym = to_complex(&embed_at(dims, which, ylow));
    let yp = ym.adjoint();
    let pref = Complex64::from_polar(-amp / 2.0, phase);
    out.push((omega_d, &ym * pref));
    out.push((-omega_d, &yp * pref.conj()));
    if !rwa {
        out.push((-omega_d, &ym * (-pref.conj())));
        out.push((omega_d, &yp * (-pref)));
    }
}

/// Builds the full engine input for any supported topology, with crosstalk
/// folded into the drive when present.
pub fn build(spec: &DeviceSpec) -> Result<BuiltModel, ModelError> {
    spec.validate()?;
    let topo = spec.topology()?;
    // Tensor orders: control x target, spectator x control x target, or
    // control x target x spectator.
    let (roles, target_factor): (Vec<Role>, usize) = match topo {
        Topology::TwoQubit => (vec![Role::Control, Role::Target], 1),
        Topology::ControlSpectator => (vec![Role::Spectator, Role::Control, Role::Target], 2),
        Topology::TargetSpectator => (vec![Role::Control, Role::Target, Role::Spectator], 1),
    };
    let dims: Vec<usize> = roles.iter().map(|r| spec.qubit(*r).cutoff).collect();
    let dim: usize = dims.iter().product();
    let ops: Vec<QubitOps> = roles
        .iter()
        .map(|r| qubit_ops(spec, *r))
        .collect::<Result<_, _>>()?;

    let omega_d = drive_frequency(spec)?;
    let omega_t = spec.qubit(Role::Target).omega_mhz;
    let frame_shift = omega_t - omega_d; // subtracted per target excitation

    let mut h0_bare = vec![0.0; dim];
    let mut h0_frame = vec![0.0; dim];
    let mut detuning_diag = vec![0.0; dim];
    for state in 0..dim {
        let mut rest = state;
        let mut level = vec![0usize; dims.len()];
        for f in (0..dims.len()).rev() {
            level[f] = rest % dims[f];
            rest /= dims[f];
        }
        let bare: f64 = (0..dims.len()).map(|f| ops[f].ladder[level[f]]).sum();
        let nt = level[target_factor] as f64;
        h0_bare[state] = bare;
        h0_frame[state] = bare - nt * frame_shift;
        detuning_diag[state] = nt * frame_shift;
    }

    let mut terms: Vec<(f64, CMatrix)> = Vec::new();
    // Exchange couplings.
    for &(qa, qb, j) in &spec.couplings {
        let role_a = spec.qubits[qa].role;
        let role_b = spec.qubits[qb].role;
        let fa = roles.iter().position(|r| *r == role_a).unwrap();
        let fb = roles.iter().position(|r| *r == role_b).unwrap();
        terms.push((
            0.0,
            exchange_terms(&dims, fa, fb, j, &ops[fa].ylow, &ops[fb].ylow, spec.rwa),
        ));
    }
    // Drive on the control, with optional crosstalk split.
    let control_factor = roles.iter().position(|r| *r == Role::Control).unwrap();
    let (amp_c, leak) = match &spec.crosstalk {
        Some(ct) => (
            (1.0 - ct.a_c) * spec.drive.amp_mhz,
            Some((ct.a_t * spec.drive.amp_mhz, ct.phi_t)),
        ),
        None => (spec.drive.amp_mhz, None),
    };
    drive_terms(
        &dims,
        control_factor,
        amp_c,
        spec.drive.phase_rad,
        omega_d,
        &ops[control_factor].ylow,
        spec.rwa,
        &mut terms,
    );
    if let Some((amp_t, phi_t)) = leak {
        drive_terms(
            &dims,
            target_factor,
            amp_t,
            spec.drive.phase_rad + phi_t,
            omega_d,
            &ops[target_factor].ylow,
            spec.rwa,
            &mut terms,
        );
    }

    let hint = FourierOperator::from_terms(dim, terms, &spec.tol);
    let blocks = BlockStructure::new(dims.clone(), target_factor);
    Ok(BuiltModel {
        dims,
        target_factor,
        roles,
        h0_bare,
        h0_frame,
        hint,
        detuning_diag,
        omega_d,
        blocks,
    })
}

/// Two-qubit Hamiltonian exactly as specified: bare diagonal plus the
/// exchange/drive interaction, without crosstalk.
pub fn build_two_qubit(spec: &DeviceSpec) -> Result<(Vec<f64>, FourierOperator), ModelError> {
    if spec.has_spectator() {
        return Err(ModelError::UnexpectedSpectator);
    }
    let mut clean = spec.clone();
    clean.crosstalk = None;
    let built = build(&clean)?;
    Ok((built.h0_bare, built.hint))
}

/// Three-qubit Hamiltonian for the requested spectator topology.
pub fn build_three_qubit(
    spec: &DeviceSpec,
    topology: Topology,
) -> Result<(Vec<f64>, FourierOperator), ModelError> {
    if !spec.has_spectator() {
        return Err(ModelError::NoSpectator);
    }
    if spec.topology()? != topology {
        return Err(ModelError::BadTopology);
    }
    let built = build(spec)?;
    Ok((built.h0_bare, built.hint))
}

/// The interaction with the drive split between control and target per the
/// crosstalk model.
pub fn apply_crosstalk(spec: &DeviceSpec) -> Result<FourierOperator, ModelError> {
    if spec.crosstalk.is_none() {
        let (_, hint) = build_two_qubit(spec)?;
        return Ok(hint);
    }
    let built = build(spec)?;
    Ok(built.hint)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DressedMethod {
    Perturbative,
    Numeric,
}

/// Exchange-dressed two-qubit basis: energies for all product states, the
/// dressed states in the bare product basis and the static computational
/// rates.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    pub cutoffs: (usize, usize),
    /// `energies[(m, n)]` is the dressed energy of the state adiabatically
    /// connected to bare `|c=m, t=n>`, in MHz.
    pub energies: DMatrix<f64>,
    /// Dressed states as columns in the bare product basis (c major).
    pub states: DMatrix<f64>,
    pub zz_mhz: f64,
    pub iz_mhz: f64,
    pub zi_mhz: f64,
}

/// Dressing of the undriven two-qubit system by the exchange interaction,
/// either from the printed O(J^2)/O(J) formulas or by direct
/// diagonalization with maximal-overlap labeling.
pub fn dressed_basis(spec: &DeviceSpec, method: DressedMethod) -> Result<DressedBasis, ModelError> {
    if spec.has_spectator() {
        return Err(ModelError::UnexpectedSpectator);
    }
    spec.validate()?;
    let nc = spec.qubit(Role::Control).cutoff;
    let nt = spec.qubit(Role::Target).cutoff;
    let j = spec.coupling(Role::Control, Role::Target).unwrap_or(0.0);
    let ec = spec.ladder(Role::Control)?;
    let et = spec.ladder(Role::Target)?;
    let ce = spec.elements(Role::Control)?;
    let te = spec.elements(Role::Target)?;
    let delta = spec.delta_ct();
    let alpha_c = spec.qubit(Role::Control).alpha_mhz;
    let alpha_t = spec.qubit(Role::Target).alpha_mhz;

    // nu ladder elements indexed by the lower level of the transition.
    let nc_elem = |m: usize| ce.nu[m];
    let nt_elem = |n: usize| te.nu[n];

    let mut energies = DMatrix::<f64>::zeros(nc, nt);
    let mut states = DMatrix::<f64>::zeros(nc * nt, nc * nt);

    match method {
        DressedMethod::Perturbative => {
            for m in 0..nc {
                for n in 0..nt {
                    let mut e = ec[m] + et[n];
                    // Repulsion from |m-1, n+1> (element nu_{c,m-1,m} nu_{t,n,n+1}).
                    if m >= 1 && n + 1 < nt {
                        let g = nc_elem(m - 1) * nt_elem(n) * j;
                        let gap = delta + (m as f64 - 1.0) * alpha_c - n as f64 * alpha_t;
                        e += g * g / gap;
                    }
                    // Repulsion from |m+1, n-1>.
                    if n >= 1 && m + 1 < nc {
                        let g = nc_elem(m) * nt_elem(n - 1) * j;
                        let gap = delta + m as f64 * alpha_c - (n as f64 - 1.0) * alpha_t;
                        e -= g * g / gap;
                    }
                    energies[(m, n)] = e;

                    let idx = m * nt + n;
                    states[(idx, idx)] = 1.0;
                    if m >= 1 && n + 1 < nt {
                        let g = nc_elem(m - 1) * nt_elem(n) * j;
                        let gap = delta + (m as f64 - 1.0) * alpha_c - n as f64 * alpha_t;
                        states[((m - 1) * nt + n + 1, idx)] = g / gap;
                    }
                    if n >= 1 && m + 1 < nc {
                        let g = nc_elem(m) * nt_elem(n - 1) * j;
                        let gap = delta + m as f64 * alpha_c - (n as f64 - 1.0) * alpha_t;
                        states[((m + 1) * nt + n - 1, idx)] = -g / gap;
                    }
                }
            }
        }
        DressedMethod::Numeric => {
            let dim = nc * nt;
            let mut h = DMatrix::<f64>::zeros(dim, dim);
            for m in 0..nc {
                for n in 0..nt {
                    h[(m * nt + n, m * nt + n)] = ec[m] + et[n];
                }
            }
            let yc = ce.charge_lowering(nc, spec.include_03_elements && !spec.kerr_mode);
            let yt = te.charge_lowering(nt, spec.include_03_elements && !spec.kerr_mode);
            let ycm = embed_at(&[nc, nt], 0, &yc);
            let ytm = embed_at(&[nc, nt], 1, &yt);
            h += j * (&ycm * ytm.transpose() + ycm.transpose() * &ytm);
            let eig = h.symmetric_eigen();
            // Assign each eigenvector to the bare state of maximal overlap.
            let mut used = vec![false; dim];
            for col in 0..dim {
                let v = eig.eigenvectors.column(col);
                let (mut best, mut besti) = (0.0, 0);
                for s in 0..dim {
                    let w = v[s] * v[s];
                    if w > best {
                        best = w;
                        besti = s;
                    }
                }
                if best < 0.5 {
                    return Err(ModelError::LabelAmbiguity {
                        state: besti,
                        overlap: best,
                    });
                }
                assert!(!used[besti], "two eigenvectors claim bare state {besti}");
                used[besti] = true;
                let sign = if v[besti] < 0.0 { -1.0 } else { 1.0 };
                energies[(besti / nt, besti % nt)] = eig.eigenvalues[col];
                for s in 0..dim {
                    states[(s, besti)] = sign * v[s];
                }
            }
            let e00 = energies[(0, 0)];
            for m in 0..nc {
                for n in 0..nt {
                    energies[(m, n)] -= e00;
                }
            }
            energies[(0, 0)] = 0.0;
        }
    }

    let e00 = energies[(0, 0)];
    let e01 = energies[(0, 1)];
    let e10 = energies[(1, 0)];
    let e11 = energies[(1, 1)];
    // Static computational rates of the dressed (undriven) Hamiltonian.
    let zz = 0.5 * (e11 - e10 - e01 + e00);
    let iz = -0.5 * (e01 - e00 + e11 - e10);
    let zi = -0.5 * (e10 - e00 + e11 - e01);
    Ok(DressedBasis {
        cutoffs: (nc, nt),
        energies,
        states,
        zz_mhz: zz,
        iz_mhz: iz,
        zi_mhz: zi,
    })
}

/// Interaction-picture transform with respect to a diagonal `h0`: the matrix
/// element (r, c) of a term at `w` moves to `w + h0[r] - h0[c]`.
pub fn interaction_frame(
    h0: &[f64],
    hint: &FourierOperator,
    tol: &AlgebraTol,
) -> FourierOperator {
    let dim = hint.dim();
    assert_eq!(dim, h0.len());
    let mut terms: Vec<(f64, CMatrix)> = Vec::new();
    for (f, m) in hint.terms() {
        // Group the entries of this term by their frame frequency.
        let mut groups: Vec<(f64, CMatrix)> = Vec::new();
        for col in 0..dim {
            for row in 0..dim {
                let v = m[(row, col)];
                if v.norm() == 0.0 {
                    continue;
                }
                let freq = f + h0[row] - h0[col];
                match groups
                    .iter_mut()
                    .find(|(g, _)| (*g - freq).abs() <= tol.merge_mhz)
                {
                    Some((_, gm)) => gm[(row, col)] = v,
                    None => {
                        let mut gm = CMatrix::zeros(dim, dim);
                        gm[(row, col)] = v;
                        groups.push((freq, gm));
                    }
                }
            }
        }
        terms.extend(groups);
    }
    FourierOperator::from_terms(dim, terms, tol)
}

/// Static diagonal of a built model as a Fourier operator (for oracles).
pub fn diagonal_operator(diag: &[f64]) -> FourierOperator {
    let dim = diag.len();
    let m = CMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        diag.iter().map(|v| Complex64::new(*v, 0.0)),
    ));
    FourierOperator::from_static(m)
}
