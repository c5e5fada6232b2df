//! Spiking neuron dynamics with shift-register delay states.
//!
//! Each neuron carries, next to its intrinsic state (membrane potential, and
//! an adaptation variable for the adaptive family), a delay buffer holding
//! its last `n_d` input values. The buffer advances by a lower-shift
//! transition: the newest input enters at slot 0 and older entries move down,
//! scaled by the shift coefficients (all ones in the trained models). A
//! per-neuron coefficient row mixes the buffer back into the membrane update,
//! giving the neuron direct access to a finite input history.

use crate::error::{Result, SnnError};
use crate::math::{dot, Matrix};
use crate::rng::RngStream;

/// Fixed, non-trainable firing threshold.
pub const THRESHOLD: f64 = 1.0;

/// Clip range for the membrane leak.
pub const ALPHA_RANGE: (f64, f64) = (0.36, 0.96);
/// Clip range for the adaptation leak.
pub const BETA_RANGE: (f64, f64) = (0.96, 0.99);
/// Clip range for the subthreshold adaptation coupling.
pub const ADAPT_A_RANGE: (f64, f64) = (0.0, 1.0);
/// Clip range for the spike-triggered adaptation increment.
pub const ADAPT_B_RANGE: (f64, f64) = (0.0, 2.0);

// ---------------------------------------------------------------------------
// Delay buffer
// ---------------------------------------------------------------------------

/// Shift-register buffer of the last `n_d` inputs.
///
/// `buf[0]` is the most recent input contribution; with unit shift
/// coefficients, `buf[j]` equals the input from `j + 1` steps before the next
/// update (i.e. after stepping with input `i`, `buf[0] == i`).
#[derive(Clone, Debug, PartialEq)]
pub struct DelayState {
    buf: Vec<f64>,
}

impl DelayState {
    pub fn zeros(n_d: usize) -> Self {
        DelayState {
            buf: vec![0.0; n_d],
        }
    }

    pub fn order(&self) -> usize {
        self.buf.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.buf
    }

    /// Weighted readout of the buffer.
    pub fn mix(&self, weights: &[f64]) -> f64 {
        dot(weights, &self.buf)
    }
}

/// Subdiagonal coefficients of the shift transition (`n_d - 1` values).
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftCoeffs {
    coeffs: Vec<f64>,
}

impl ShiftCoeffs {
    /// Unit coefficients: the buffer becomes a plain sliding window.
    pub fn ones(n_d: usize) -> Self {
        ShiftCoeffs {
            coeffs: vec![1.0; n_d.saturating_sub(1)],
        }
    }

    pub fn new(coeffs: Vec<f64>) -> Self {
        ShiftCoeffs { coeffs }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }
}

/// One shift-register update: slot 0 takes `input`, slot `j` takes
/// `coeffs[j-1] * buf[j-1]`. A zero-order state passes through unchanged.
pub fn delay_step(state: &DelayState, coeffs: &ShiftCoeffs, input: f64) -> DelayState {
    let n_d = state.order();
    if n_d == 0 {
        return state.clone();
    }
    assert_eq!(
        coeffs.coeffs.len(),
        n_d - 1,
        "delay_step: {} coefficients for order {}",
        coeffs.coeffs.len(),
        n_d
    );
    let mut buf = vec![0.0; n_d];
    buf[0] = input;
    for j in 1..n_d {
        buf[j] = coeffs.coeffs[j - 1] * state.buf[j - 1];
    }
    DelayState { buf }
}

// ---------------------------------------------------------------------------
// Delay-coefficient schemes
// ---------------------------------------------------------------------------

/// Initialization family for a neuron's delay-mixing row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DelayKind {
    Ones,
    LinearDecay,
    ExpDecay,
    Uniform,
}

impl DelayKind {
    /// Builds one neuron's row of delay coefficients.
    pub fn build_row(&self, n_d: usize, rng: &mut RngStream) -> Vec<f64> {
        (0..n_d)
            .map(|j| match self {
                DelayKind::Ones => 1.0,
                DelayKind::LinearDecay => (n_d - j) as f64 / n_d as f64,
                DelayKind::ExpDecay => (-0.5 * j as f64).exp(),
                DelayKind::Uniform => rng.uniform_unchecked(0.0, 1.0),
            })
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            DelayKind::Ones => "ones",
            DelayKind::LinearDecay => "lindecay",
            DelayKind::ExpDecay => "expdecay",
            DelayKind::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ones" => Ok(DelayKind::Ones),
            "lindecay" | "linear" | "linear_decay" => Ok(DelayKind::LinearDecay),
            "expdecay" | "exp" | "exp_decay" => Ok(DelayKind::ExpDecay),
            "uniform" => Ok(DelayKind::Uniform),
            other => Err(SnnError::InvalidArg(format!(
                "unknown delay scheme '{other}' (expected ones|lindecay|expdecay|uniform)"
            ))),
        }
    }
}

/// Delay-coefficient scheme plus whether the coefficients are trained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DelayScheme {
    pub kind: DelayKind,
    pub trainable: bool,
}

impl DelayScheme {
    pub fn fixed(kind: DelayKind) -> Self {
        DelayScheme {
            kind,
            trainable: false,
        }
    }

    pub fn trainable(kind: DelayKind) -> Self {
        DelayScheme {
            kind,
            trainable: true,
        }
    }
}

// ---------------------------------------------------------------------------
// Spike nonlinearity
// ---------------------------------------------------------------------------

/// Boxcar surrogate window half-width around the threshold.
pub const BOXCAR_HALF_WIDTH: f64 = 0.5;
/// Boxcar surrogate height.
pub const BOXCAR_HEIGHT: f64 = 0.5;

/// Hard threshold with boxcar surrogate derivative.
///
/// Returns `(spike, dspike_du)`. Ties fire: `u == theta` emits a spike.
#[inline]
pub fn surrogate_spike(u: f64, theta: f64) -> (f64, f64) {
    let s = if u >= theta { 1.0 } else { 0.0 };
    let g = if (u - theta).abs() <= BOXCAR_HALF_WIDTH {
        BOXCAR_HEIGHT
    } else {
        0.0
    };
    (s, g)
}

/// Spike nonlinearity used by layer simulation.
///
/// `Boxcar` is the real model: hard threshold forward, boxcar surrogate
/// backward. `Sigmoid` is a relaxed twin whose forward pass is also smooth,
/// so reverse-mode gradients through it can be validated against finite
/// differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpikeFn {
    Boxcar,
    Sigmoid { temperature: f64 },
}

impl SpikeFn {
    /// Returns `(spike, dspike_du)` at membrane value `u`.
    #[inline]
    pub fn apply(&self, u: f64, theta: f64) -> (f64, f64) {
        match *self {
            SpikeFn::Boxcar => surrogate_spike(u, theta),
            SpikeFn::Sigmoid { temperature } => {
                let x = (u - theta) / temperature;
                let s = 1.0 / (1.0 + (-x).exp());
                (s, s * (1.0 - s) / temperature)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Intrinsic state and parameters
// ---------------------------------------------------------------------------

/// Intrinsic neuron state: membrane potential, plus an adaptation variable
/// for the adaptive family (`w` is `None` exactly for the plain-LIF family).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeuronState {
    pub u: f64,
    pub w: Option<f64>,
}

impl NeuronState {
    pub fn lif() -> Self {
        NeuronState { u: 0.0, w: None }
    }

    pub fn adlif() -> Self {
        NeuronState {
            u: 0.0,
            w: Some(0.0),
        }
    }
}

/// Per-neuron dynamics parameters with their clip ranges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeuronParams {
    /// Membrane leak, clipped to [0.36, 0.96].
    pub alpha: f64,
    /// Adaptation leak, clipped to [0.96, 0.99].
    pub beta: f64,
    /// Subthreshold adaptation coupling, clipped to [0, 1].
    pub adapt_a: f64,
    /// Spike-triggered adaptation increment, clipped to [0, 2].
    pub adapt_b: f64,
    /// Firing threshold (fixed, not trained).
    pub theta: f64,
}

impl NeuronParams {
    pub fn new(alpha: f64, beta: f64, adapt_a: f64, adapt_b: f64) -> Self {
        NeuronParams {
            alpha,
            beta,
            adapt_a,
            adapt_b,
            theta: THRESHOLD,
        }
    }

    pub fn lif(alpha: f64) -> Self {
        NeuronParams::new(alpha, 0.0, 0.0, 0.0)
    }

    pub fn in_clip_ranges(&self, adaptive: bool) -> bool {
        let ok_alpha = self.alpha >= ALPHA_RANGE.0 && self.alpha <= ALPHA_RANGE.1;
        if !adaptive {
            return ok_alpha;
        }
        ok_alpha
            && self.beta >= BETA_RANGE.0
            && self.beta <= BETA_RANGE.1
            && self.adapt_a >= ADAPT_A_RANGE.0
            && self.adapt_a <= ADAPT_A_RANGE.1
            && self.adapt_b >= ADAPT_B_RANGE.0
            && self.adapt_b <= ADAPT_B_RANGE.1
    }
}

fn check_finite_inputs(op: &'static str, i_s: f64, i_d: f64) -> Result<()> {
    if !i_s.is_finite() || !i_d.is_finite() {
        return Err(SnnError::NonFinite(format!(
            "{op}: inputs i_s = {i_s}, i_d = {i_d}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// LIF / adLIF single-step transitions
// ---------------------------------------------------------------------------

/// One leaky integrate-and-fire step with delay mixing.
///
/// The spike is taken from the current membrane value, the delay contribution
/// is read from the buffer *before* it advances, and the buffer then shifts
/// with unit coefficients:
///
/// ```text
/// s      = u >= theta
/// u'     = alpha*u + (1-alpha)*i_s - alpha*theta*s + delay_w . buf
/// buf'   = shift(buf) <- i_d
/// ```
pub fn lif_step(
    state: &NeuronState,
    delay: &DelayState,
    params: &NeuronParams,
    delay_w: &[f64],
    i_s: f64,
    i_d: f64,
) -> Result<(NeuronState, DelayState, f64)> {
    check_finite_inputs("lif_step", i_s, i_d)?;
    if delay_w.len() != delay.order() {
        return Err(SnnError::dim(
            "lif_step",
            format!("{} delay weights for order {}", delay_w.len(), delay.order()),
        ));
    }
    let (s, _) = surrogate_spike(state.u, params.theta);
    let u_next = params.alpha * state.u + (1.0 - params.alpha) * i_s
        - params.alpha * params.theta * s
        + delay.mix(delay_w);
    let delay_next = delay_step(delay, &ShiftCoeffs::ones(delay.order()), i_d);
    Ok((NeuronState { u: u_next, w: None }, delay_next, s))
}

/// One adaptive-LIF step with delay mixing.
///
/// Differs from [`lif_step`] in two ways: the adaptation variable `w` couples
/// into the membrane, and the delay contribution is read from the buffer
/// *after* it advances (so the current input participates immediately):
///
/// ```text
/// s      = u >= theta
/// buf'   = shift(buf) <- i_d
/// u'     = alpha*u + (1-alpha)*(i_s - w) - alpha*theta*s + delay_w . buf'
/// w'     = adapt_a*u + beta*w + adapt_b*s
/// ```
pub fn adlif_step(
    state: &NeuronState,
    delay: &DelayState,
    params: &NeuronParams,
    delay_w: &[f64],
    i_s: f64,
    i_d: f64,
) -> Result<(NeuronState, DelayState, f64)> {
    check_finite_inputs("adlif_step", i_s, i_d)?;
    if delay_w.len() != delay.order() {
        return Err(SnnError::dim(
            "adlif_step",
            format!("{} delay weights for order {}", delay_w.len(), delay.order()),
        ));
    }
    let w = state.w.ok_or_else(|| {
        SnnError::InvalidArg("adlif_step: state has no adaptation variable".into())
    })?;
    let (s, _) = surrogate_spike(state.u, params.theta);
    let delay_next = delay_step(delay, &ShiftCoeffs::ones(delay.order()), i_d);
    let u_next = params.alpha * state.u + (1.0 - params.alpha) * (i_s - w)
        - params.alpha * params.theta * s
        + delay_next.mix(delay_w);
    let w_next = params.adapt_a * state.u + params.beta * w + params.adapt_b * s;
    Ok((
        NeuronState {
            u: u_next,
            w: Some(w_next),
        },
        delay_next,
        s,
    ))
}

// ---------------------------------------------------------------------------
// Generic state-space neuron
// ---------------------------------------------------------------------------

/// Which delay buffer the intrinsic-state update reads: the buffer as it was
/// before this step's shift (LIF family) or after it (adaptive family).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DelayTiming {
    PreUpdate,
    PostUpdate,
}

/// Fully general linear state-space spiking neuron.
///
/// Intrinsic state `v_s` (dimension `n_s`) and delay state `v_d` (dimension
/// `n_d`) evolve as
///
/// ```text
/// s      = (c_s . v_s + c_d . v_d) >= theta
/// v_d'   = a_d v_d + b_d i_d
/// v_s'   = a_s v_s + b_s i_s + a_sd v_d[*] - r s      (* per `timing`)
/// ```
///
/// The LIF/adLIF instantiations are provided as constructors and are
/// equivalence-tested against the dedicated step functions.
#[derive(Clone, Debug)]
pub struct GenericNeuronSpec {
    pub a_s: Matrix,
    pub b_s: Vec<f64>,
    pub c_s: Vec<f64>,
    pub reset: Vec<f64>,
    pub a_d: Matrix,
    pub b_d: Vec<f64>,
    pub c_d: Vec<f64>,
    pub a_sd: Matrix,
    pub theta: f64,
    pub timing: DelayTiming,
}

impl GenericNeuronSpec {
    pub fn state_dim(&self) -> usize {
        self.a_s.rows()
    }

    pub fn delay_dim(&self) -> usize {
        self.a_d.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let n_s = self.a_s.rows();
        let n_d = self.a_d.rows();
        let ok = self.a_s.cols() == n_s
            && self.b_s.len() == n_s
            && self.c_s.len() == n_s
            && self.reset.len() == n_s
            && self.a_d.cols() == n_d
            && self.b_d.len() == n_d
            && self.c_d.len() == n_d
            && self.a_sd.rows() == n_s
            && self.a_sd.cols() == n_d;
        if !ok {
            return Err(SnnError::dim(
                "GenericNeuronSpec",
                format!("inconsistent dimensions (n_s = {n_s}, n_d = {n_d})"),
            ));
        }
        Ok(())
    }

    /// Lower-shift delay transition with unit subdiagonal and impulse input.
    fn shift_pair(n_d: usize) -> (Matrix, Vec<f64>) {
        let mut a_d = Matrix::zeros(n_d, n_d);
        for i in 1..n_d {
            a_d.set(i, i - 1, 1.0);
        }
        let mut b_d = vec![0.0; n_d];
        if n_d > 0 {
            b_d[0] = 1.0;
        }
        (a_d, b_d)
    }

    /// One-state instantiation matching [`lif_step`].
    pub fn lif(alpha: f64, theta: f64, delay_w: &[f64]) -> Self {
        let n_d = delay_w.len();
        let (a_d, b_d) = Self::shift_pair(n_d);
        GenericNeuronSpec {
            a_s: Matrix::from_vec(1, 1, vec![alpha]).unwrap(),
            b_s: vec![1.0 - alpha],
            c_s: vec![1.0],
            reset: vec![alpha * theta],
            a_d,
            b_d,
            c_d: vec![0.0; n_d],
            a_sd: Matrix::from_vec(1, n_d, delay_w.to_vec()).unwrap(),
            theta,
            timing: DelayTiming::PreUpdate,
        }
    }

    /// Two-state instantiation matching [`adlif_step`]; state is `[u, w]`.
    pub fn adlif(params: &NeuronParams, delay_w: &[f64]) -> Self {
        let n_d = delay_w.len();
        let (a_d, b_d) = Self::shift_pair(n_d);
        let alpha = params.alpha;
        let mut a_sd_data = delay_w.to_vec();
        a_sd_data.resize(2 * n_d, 0.0);
        GenericNeuronSpec {
            a_s: Matrix::from_vec(
                2,
                2,
                vec![alpha, -(1.0 - alpha), params.adapt_a, params.beta],
            )
            .unwrap(),
            b_s: vec![1.0 - alpha, 0.0],
            c_s: vec![1.0, 0.0],
            reset: vec![alpha * params.theta, -params.adapt_b],
            a_d,
            b_d,
            c_d: vec![0.0; n_d],
            a_sd: Matrix::from_vec(2, n_d, a_sd_data).unwrap(),
            theta: params.theta,
            timing: DelayTiming::PostUpdate,
        }
    }
}

/// One step of the generic state-space neuron.
pub fn generic_step(
    spec: &GenericNeuronSpec,
    v_s: &[f64],
    v_d: &[f64],
    i_s: f64,
    i_d: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    spec.validate()?;
    check_finite_inputs("generic_step", i_s, i_d)?;
    if v_s.len() != spec.state_dim() || v_d.len() != spec.delay_dim() {
        return Err(SnnError::dim(
            "generic_step",
            format!(
                "state lengths {}/{} vs spec {}/{}",
                v_s.len(),
                v_d.len(),
                spec.state_dim(),
                spec.delay_dim()
            ),
        ));
    }

    let readout = dot(&spec.c_s, v_s) + dot(&spec.c_d, v_d);
    let s = if readout >= spec.theta { 1.0 } else { 0.0 };

    let mut v_d_next = spec.a_d.matvec(v_d);
    axpy_scalar(&mut v_d_next, &spec.b_d, i_d);

    let delayed = match spec.timing {
        DelayTiming::PreUpdate => v_d,
        DelayTiming::PostUpdate => &v_d_next,
    };
    let mut v_s_next = spec.a_s.matvec(v_s);
    axpy_scalar(&mut v_s_next, &spec.b_s, i_s);
    let mixed = spec.a_sd.matvec(delayed);
    for (o, m) in v_s_next.iter_mut().zip(&mixed) {
        *o += m;
    }
    for (o, r) in v_s_next.iter_mut().zip(&spec.reset) {
        *o -= r * s;
    }
    Ok((v_s_next, v_d_next, s))
}

#[inline]
fn axpy_scalar(out: &mut [f64], coeff: &[f64], scalar: f64) {
    for (o, c) in out.iter_mut().zip(coeff) {
        *o += c * scalar;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delay_step_fills_in_arrival_order() {
        let ones = ShiftCoeffs::ones(3);
        let mut st = DelayState::zeros(3);
        for x in [3.0, 7.0, 2.0] {
            st = delay_step(&st, &ones, x);
        }
        assert_eq!(st.as_slice(), &[2.0, 7.0, 3.0]);
    }

    #[test]
    fn delay_step_zero_stream_stays_zero() {
        let ones = ShiftCoeffs::ones(4);
        let mut st = DelayState::zeros(4);
        for _ in 0..10 {
            st = delay_step(&st, &ones, 0.0);
        }
        assert_eq!(st.as_slice(), &[0.0; 4]);
    }

    #[test]
    fn delay_step_products_of_coefficients() {
        // Impulse through a=[2,3]: the entry picks up the running product.
        let coeffs = ShiftCoeffs::new(vec![2.0, 3.0]);
        let mut st = DelayState::zeros(3);
        st = delay_step(&st, &coeffs, 1.0);
        assert_eq!(st.as_slice(), &[1.0, 0.0, 0.0]);
        st = delay_step(&st, &coeffs, 0.0);
        assert_eq!(st.as_slice(), &[0.0, 2.0, 0.0]);
        st = delay_step(&st, &coeffs, 0.0);
        assert_eq!(st.as_slice(), &[0.0, 0.0, 6.0]);
    }

    #[test]
    fn delay_step_order_zero_is_noop() {
        let st = DelayState::zeros(0);
        let out = delay_step(&st, &ShiftCoeffs::ones(0), 5.0);
        assert_eq!(out.order(), 0);
    }

    #[test]
    fn linear_decay_row_n5() {
        let mut rng = RngStream::new(0);
        let row = DelayKind::LinearDecay.build_row(5, &mut rng);
        assert_eq!(row, vec![1.0, 0.8, 0.6, 0.4, 0.2]);
    }

    #[test]
    fn ones_row_n3() {
        let mut rng = RngStream::new(0);
        assert_eq!(DelayKind::Ones.build_row(3, &mut rng), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn exp_decay_row_n5() {
        let mut rng = RngStream::new(0);
        let row = DelayKind::ExpDecay.build_row(5, &mut rng);
        let expected = [1.0, 0.6065306597126334, 0.36787944117144233, 0.22313016014842982, 0.1353352832366127];
        for (a, b) in row.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn uniform_row_in_half_open_interval() {
        let mut rng = RngStream::new(11);
        let row = DelayKind::Uniform.build_row(1000, &mut rng);
        assert!(row.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn surrogate_spike_cases() {
        assert_eq!(surrogate_spike(1.2, 1.0), (1.0, 0.5));
        assert_eq!(surrogate_spike(0.2, 1.0), (0.0, 0.0));
        // Tie fires.
        assert_eq!(surrogate_spike(1.0, 1.0), (1.0, 0.5));
    }

    #[test]
    fn lif_step_subthreshold() {
        let p = NeuronParams::lif(0.5);
        let st = NeuronState { u: 0.8, w: None };
        let (st2, _, s) = lif_step(&st, &DelayState::zeros(0), &p, &[], 1.0, 1.0).unwrap();
        assert_eq!(s, 0.0);
        assert!((st2.u - 0.9).abs() < 1e-15);
    }

    #[test]
    fn lif_step_reset_after_spike() {
        let p = NeuronParams::lif(0.5);
        let st = NeuronState { u: 1.2, w: None };
        let (st2, _, s) = lif_step(&st, &DelayState::zeros(0), &p, &[], 1.0, 1.0).unwrap();
        assert_eq!(s, 1.0);
        assert!((st2.u - 0.6).abs() < 1e-15);
    }

    #[test]
    fn lif_step_rejects_non_finite() {
        let p = NeuronParams::lif(0.5);
        let st = NeuronState::lif();
        assert!(lif_step(&st, &DelayState::zeros(0), &p, &[], f64::NAN, 0.0).is_err());
    }

    #[test]
    fn adlif_step_subthreshold() {
        let p = NeuronParams::new(0.9, 0.97, 0.5, 1.0);
        let st = NeuronState::adlif();
        let (st2, _, s) = adlif_step(&st, &DelayState::zeros(0), &p, &[], 1.0, 1.0).unwrap();
        assert_eq!(s, 0.0);
        assert!((st2.u - 0.1).abs() < 1e-15);
        assert_eq!(st2.w, Some(0.0));
    }

    #[test]
    fn adlif_step_spike_bumps_adaptation() {
        let p = NeuronParams::new(0.9, 0.97, 0.5, 1.0);
        let st = NeuronState {
            u: 1.5,
            w: Some(0.0),
        };
        let (st2, _, s) = adlif_step(&st, &DelayState::zeros(0), &p, &[], 0.0, 0.0).unwrap();
        assert_eq!(s, 1.0);
        // w' = a*u + beta*w + b*s = 0.5*1.5 + 0 + 1.0
        assert!((st2.w.unwrap() - 1.75).abs() < 1e-15);
    }

    #[test]
    fn adlif_step_zero_everything_stays_zero() {
        let p = NeuronParams::new(0.9, 0.97, 0.5, 1.0);
        let mut st = NeuronState::adlif();
        let mut dl = DelayState::zeros(3);
        for _ in 0..20 {
            let (s2, d2, spike) = adlif_step(&st, &dl, &p, &[1.0, 1.0, 1.0], 0.0, 0.0).unwrap();
            assert_eq!(spike, 0.0);
            st = s2;
            dl = d2;
        }
        assert_eq!(st.u, 0.0);
        assert_eq!(st.w, Some(0.0));
    }

    #[test]
    fn adlif_delay_uses_post_update_buffer() {
        // With n_d = 1 the current input contributes immediately.
        let p = NeuronParams::new(0.5, 0.97, 0.0, 0.0);
        let st = NeuronState::adlif();
        let (st2, _, _) = adlif_step(&st, &DelayState::zeros(1), &p, &[2.0], 0.0, 3.0).unwrap();
        assert!((st2.u - 6.0).abs() < 1e-15);

        // LIF reads the buffer before the shift, so the same input lands one
        // step later.
        let stl = NeuronState::lif();
        let (stl2, dl2, _) = lif_step(&stl, &DelayState::zeros(1), &p, &[2.0], 0.0, 3.0).unwrap();
        assert_eq!(stl2.u, 0.0);
        assert_eq!(dl2.as_slice(), &[3.0]);
    }

    #[test]
    fn generic_all_zero_never_spikes() {
        let spec = GenericNeuronSpec {
            a_s: Matrix::zeros(1, 1),
            b_s: vec![0.0],
            c_s: vec![0.0],
            reset: vec![0.0],
            a_d: Matrix::zeros(2, 2),
            b_d: vec![0.0, 0.0],
            c_d: vec![0.0, 0.0],
            a_sd: Matrix::zeros(1, 2),
            theta: 1.0,
            timing: DelayTiming::PreUpdate,
        };
        let mut v_s = vec![0.0];
        let mut v_d = vec![0.0, 0.0];
        for _ in 0..10 {
            let (s2, d2, spike) = generic_step(&spec, &v_s, &v_d, 1.0, 1.0).unwrap();
            assert_eq!(spike, 0.0);
            v_s = s2;
            v_d = d2;
        }
        assert_eq!(v_s, vec![0.0]);
        assert_eq!(v_d, vec![0.0, 0.0]);
    }

    #[test]
    fn generic_step_rejects_dim_mismatch() {
        let spec = GenericNeuronSpec::lif(0.5, 1.0, &[1.0, 1.0]);
        assert!(generic_step(&spec, &[0.0, 0.0], &[0.0, 0.0], 0.0, 0.0).is_err());
        assert!(generic_step(&spec, &[0.0], &[0.0], 0.0, 0.0).is_err());
    }

    proptest! {
        // Unit-coefficient buffer equals the literal input history.
        #[test]
        fn delay_buffer_is_input_history(
            inputs in proptest::collection::vec(-10.0f64..10.0, 1..60),
            n_d in prop_oneof![Just(1usize), Just(5), Just(10), Just(100)],
        ) {
            let ones = ShiftCoeffs::ones(n_d);
            let mut st = DelayState::zeros(n_d);
            for (t, &x) in inputs.iter().enumerate() {
                st = delay_step(&st, &ones, x);
                for j in 0..n_d {
                    let expect = if j <= t { inputs[t - j] } else { 0.0 };
                    prop_assert_eq!(st.as_slice()[j], expect);
                }
            }
        }

        // Mixing with a ones row is the running sum of the last n_d inputs.
        #[test]
        fn ones_mix_is_running_sum(
            inputs in proptest::collection::vec(-5.0f64..5.0, 1..40),
        ) {
            let n_d = 7usize;
            let ones_coeffs = ShiftCoeffs::ones(n_d);
            let mut rng = RngStream::new(0);
            let row = DelayKind::Ones.build_row(n_d, &mut rng);
            let mut st = DelayState::zeros(n_d);
            for (t, &x) in inputs.iter().enumerate() {
                st = delay_step(&st, &ones_coeffs, x);
                let lo = t.saturating_sub(n_d - 1);
                let want: f64 = inputs[lo..=t].iter().sum();
                prop_assert!((st.mix(&row) - want).abs() < 1e-9);
            }
        }

        // Spikes are binary and the membrane stays bounded for bounded input.
        #[test]
        fn lif_spikes_binary_membrane_bounded(
            alpha in 0.36f64..0.96,
            inputs in proptest::collection::vec(-2.0f64..2.0, 1..200),
        ) {
            let p = NeuronParams::lif(alpha);
            let mut st = NeuronState::lif();
            // |u'| <= alpha|u| + (1-alpha)|i| + alpha*theta, fixed point at
            // ((1-alpha)*max_i + alpha*theta) / (1-alpha).
            let bound = ((1.0 - alpha) * 2.0 + alpha) / (1.0 - alpha) + 1.0;
            for &x in &inputs {
                let (s2, _, spike) = lif_step(&st, &DelayState::zeros(0), &p, &[], x, x).unwrap();
                prop_assert!(spike == 0.0 || spike == 1.0);
                prop_assert!(s2.u.is_finite());
                prop_assert!(s2.u.abs() <= bound, "u = {} bound = {}", s2.u, bound);
                st = s2;
            }
        }
    }
}
