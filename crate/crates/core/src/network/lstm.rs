use super::{Dims, Gradients, LstmState, ModelParams};
use crate::corpus::{NumberFeature, Preamble, TokenId};
use crate::error::{Error, Result};

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in chunks_a.zip(chunks_b) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Reusable activation storage for one sequence.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    len: usize,
    /// `(len + 1) × h`; row 0 is the zero initial state.
    hidden: Vec<f64>,
    cell: Vec<f64>,
    /// `len × 4h` post-activation gates.
    gates: Vec<f64>,
    /// `len × h`
    tanh_cell: Vec<f64>,
    input: Vec<f64>,
    d_input: Vec<f64>,
    d_gate: Vec<f64>,
    d_hidden: Vec<f64>,
    d_cell: Vec<f64>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, dims: Dims, len: usize) {
        let h = dims.hidden;
        self.len = len;
        self.hidden.clear();
        self.hidden.resize((len + 1) * h, 0.0);
        self.cell.clear();
        self.cell.resize((len + 1) * h, 0.0);
        self.gates.resize(len * 4 * h, 0.0);
        self.tanh_cell.resize(len * h, 0.0);
        self.input.resize(dims.input_width(), 0.0);
        self.d_input.resize(dims.input_width(), 0.0);
        self.d_gate.resize(4 * h, 0.0);
        self.d_hidden.resize(h, 0.0);
        self.d_cell.resize(h, 0.0);
    }

    /// Hidden state after `t` tokens.
    fn hidden_at(&self, h: usize, t: usize) -> &[f64] {
        &self.hidden[t * h..(t + 1) * h]
    }
}

fn check_tokens(params: &ModelParams, tokens: &[TokenId]) -> Result<()> {
    if tokens.is_empty() {
        return Err(Error::Input("empty token sequence".into()));
    }
    if let Some(bad) = tokens.iter().find(|t| t.index() >= params.dims.vocab) {
        return Err(Error::Input(format!(
            "token id {} outside vocabulary of {}",
            bad.0, params.dims.vocab
        )));
    }
    Ok(())
}

/// One LSTM transition. `gates` receives the activated `i, f, g, o` blocks.
#[inline]
#[allow(clippy::too_many_arguments)]
fn transition(
    params: &ModelParams,
    token: TokenId,
    input: &mut [f64],
    h_prev: &[f64],
    c_prev: &[f64],
    gates: &mut [f64],
    h_next: &mut [f64],
    c_next: &mut [f64],
    tanh_c: &mut [f64],
) {
    let Dims {
        embed: d, hidden: h, ..
    } = params.dims;
    let width = d + h;
    let t = token.index();
    input[..d].copy_from_slice(&params.embeddings[t * d..(t + 1) * d]);
    input[d..].copy_from_slice(h_prev);
    for (r, (z, row)) in gates
        .iter_mut()
        .zip(params.lstm_weights.chunks_exact(width))
        .enumerate()
    {
        *z = params.lstm_bias[r] + dot(row, input);
    }
    let (i_gate, rest) = gates.split_at_mut(h);
    let (f_gate, rest) = rest.split_at_mut(h);
    let (g_gate, o_gate) = rest.split_at_mut(h);
    for k in 0..h {
        let i = sigmoid(i_gate[k]);
        let f = sigmoid(f_gate[k]);
        let g = g_gate[k].tanh();
        let o = sigmoid(o_gate[k]);
        i_gate[k] = i;
        f_gate[k] = f;
        g_gate[k] = g;
        o_gate[k] = o;
        let c = f * c_prev[k] + i * g;
        let tc = c.tanh();
        c_next[k] = c;
        tanh_c[k] = tc;
        h_next[k] = o * tc;
    }
}

/// Runs the recurrence over `tokens`, filling the workspace.
fn run(params: &ModelParams, tokens: &[TokenId], ws: &mut Workspace) {
    let h = params.dims.hidden;
    ws.prepare(params.dims, tokens.len());
    for (t, &token) in tokens.iter().enumerate() {
        let (h_done, h_rest) = ws.hidden.split_at_mut((t + 1) * h);
        let (c_done, c_rest) = ws.cell.split_at_mut((t + 1) * h);
        transition(
            params,
            token,
            &mut ws.input,
            &h_done[t * h..],
            &c_done[t * h..],
            &mut ws.gates[t * 4 * h..(t + 1) * 4 * h],
            &mut h_rest[..h],
            &mut c_rest[..h],
            &mut ws.tanh_cell[t * h..(t + 1) * h],
        );
    }
}

#[inline]
fn readout_logit(params: &ModelParams, hidden: &[f64]) -> f64 {
    dot(&params.output_weights, hidden) + params.output_bias
}

/// Advances the recurrent state by one token.
pub fn step(params: &ModelParams, state: &LstmState, token: TokenId) -> Result<LstmState> {
    let h = params.dims.hidden;
    if token.index() >= params.dims.vocab {
        return Err(Error::Input(format!(
            "token id {} outside vocabulary of {}",
            token.0, params.dims.vocab
        )));
    }
    if state.hidden.len() != h || state.cell.len() != h {
        return Err(Error::Input(format!("state width must be {h}")));
    }
    let mut input = vec![0.0; params.dims.input_width()];
    let mut gates = vec![0.0; 4 * h];
    let mut next = LstmState::zeros(h);
    let mut tanh_c = vec![0.0; h];
    transition(
        params,
        token,
        &mut input,
        &state.hidden,
        &state.cell,
        &mut gates,
        &mut next.hidden,
        &mut next.cell,
        &mut tanh_c,
    );
    Ok(next)
}

/// Probability that the upcoming verb is plural, read from the final state.
pub fn forward(params: &ModelParams, tokens: &[TokenId]) -> Result<f64> {
    forward_with(params, tokens, &mut Workspace::new())
}

/// [`forward`] reusing caller-owned buffers.
pub fn forward_with(params: &ModelParams, tokens: &[TokenId], ws: &mut Workspace) -> Result<f64> {
    check_tokens(params, tokens)?;
    run(params, tokens, ws);
    Ok(sigmoid(readout_logit(
        params,
        ws.hidden_at(params.dims.hidden, tokens.len()),
    )))
}

/// Plural probabilities read out after each prefix length in `probe_points`,
/// computed in a single left-to-right pass.
pub fn forward_probe(params: &ModelParams, tokens: &[TokenId], probe_points: &[usize]) -> Result<Vec<f64>> {
    check_tokens(params, tokens)?;
    if let Some(&bad) = probe_points.iter().find(|&&p| p == 0 || p > tokens.len()) {
        return Err(Error::Input(format!(
            "probe position {bad} outside 1..={}",
            tokens.len()
        )));
    }
    let mut ws = Workspace::new();
    let deepest = probe_points.iter().copied().max().unwrap_or(0);
    run(params, &tokens[..deepest.max(1)], &mut ws);
    let h = params.dims.hidden;
    Ok(probe_points
        .iter()
        .map(|&p| sigmoid(readout_logit(params, ws.hidden_at(h, p))))
        .collect())
}

fn target(gold: NumberFeature) -> Result<f64> {
    match gold {
        NumberFeature::Singular => Ok(0.0),
        NumberFeature::Plural => Ok(1.0),
        NumberFeature::Unmarked => Err(Error::Input("gold number must be singular or plural".into())),
    }
}

/// Binary cross-entropy of the prediction for `tokens` against `gold`.
pub fn loss(params: &ModelParams, tokens: &[TokenId], gold: NumberFeature) -> Result<f64> {
    let y = target(gold)?;
    check_tokens(params, tokens)?;
    let mut ws = Workspace::new();
    run(params, tokens, &mut ws);
    let z = readout_logit(params, ws.hidden_at(params.dims.hidden, tokens.len()));
    Ok(softplus(z) - y * z)
}

/// Adds the gradient of the loss on one sequence into `grads` and returns
/// the loss. Backpropagates through every time step.
pub fn accumulate_gradients(
    params: &ModelParams,
    tokens: &[TokenId],
    gold: NumberFeature,
    grads: &mut Gradients,
    ws: &mut Workspace,
) -> Result<f64> {
    let y = target(gold)?;
    check_tokens(params, tokens)?;
    let Dims {
        embed: d, hidden: h, ..
    } = params.dims;
    let width = d + h;
    run(params, tokens, ws);

    let len = tokens.len();
    let z = readout_logit(params, ws.hidden_at(h, len));
    let loss = softplus(z) - y * z;
    if !loss.is_finite() {
        return Err(Error::Numerical("loss".into()));
    }
    let d_logit = sigmoid(z) - y;

    axpy(d_logit, &ws.hidden[len * h..(len + 1) * h], &mut grads.output_weights);
    grads.output_bias += d_logit;

    ws.d_hidden.clear();
    ws.d_hidden.extend(params.output_weights.iter().map(|w| w * d_logit));
    ws.d_cell.fill(0.0);

    for t in (0..len).rev() {
        let gates = &ws.gates[t * 4 * h..(t + 1) * 4 * h];
        let tanh_c = &ws.tanh_cell[t * h..(t + 1) * h];
        let c_prev = &ws.cell[t * h..(t + 1) * h];
        for k in 0..h {
            let i = gates[k];
            let f = gates[h + k];
            let g = gates[2 * h + k];
            let o = gates[3 * h + k];
            let dh = ws.d_hidden[k];
            let tc = tanh_c[k];
            let dc = ws.d_cell[k] + dh * o * (1.0 - tc * tc);
            ws.d_gate[k] = dc * g * i * (1.0 - i);
            ws.d_gate[h + k] = dc * c_prev[k] * f * (1.0 - f);
            ws.d_gate[2 * h + k] = dc * i * (1.0 - g * g);
            ws.d_gate[3 * h + k] = dh * tc * o * (1.0 - o);
            ws.d_cell[k] = dc * f;
        }

        let token = tokens[t].index();
        ws.input[..d].copy_from_slice(&params.embeddings[token * d..(token + 1) * d]);
        ws.input[d..].copy_from_slice(&ws.hidden[t * h..(t + 1) * h]);
        ws.d_input.fill(0.0);
        for (r, (w_row, g_row)) in params
            .lstm_weights
            .chunks_exact(width)
            .zip(grads.lstm_weights.chunks_exact_mut(width))
            .enumerate()
        {
            let dz = ws.d_gate[r];
            if dz == 0.0 {
                continue;
            }
            axpy(dz, &ws.input, g_row);
            axpy(dz, w_row, &mut ws.d_input);
            grads.lstm_bias[r] += dz;
        }
        axpy(1.0, &ws.d_input[..d], &mut grads.embeddings[token * d..(token + 1) * d]);
        ws.d_hidden.copy_from_slice(&ws.d_input[d..]);
    }
    Ok(loss)
}

/// Loss and full gradient for one sequence.
pub fn backward(params: &ModelParams, tokens: &[TokenId], gold: NumberFeature) -> Result<(f64, Gradients)> {
    let mut grads = Gradients::zeros(params.dims);
    let mut ws = Workspace::new();
    let loss = accumulate_gradients(params, tokens, gold, &mut grads, &mut ws)?;
    use super::Blocks;
    if let Some(block) = grads.first_non_finite() {
        return Err(Error::Numerical(block.into()));
    }
    Ok((loss, grads))
}

/// Predicted number (plural iff `p > 0.5`, ties go to singular) and whether
/// it differs from the preamble's gold number.
pub fn predict(params: &ModelParams, preamble: &Preamble) -> Result<(NumberFeature, bool)> {
    let p = forward(params, &preamble.tokens)?;
    let predicted = number_from_probability(p);
    Ok((predicted, predicted != preamble.gold))
}

pub(crate) fn number_from_probability(p_plural: f64) -> NumberFeature {
    if p_plural > 0.5 {
        NumberFeature::Plural
    } else {
        NumberFeature::Singular
    }
}

#[cfg(test)]
mod tests {
    use super::super::{init_params, Blocks};
    use super::*;

    fn ids(v: &[u32]) -> Vec<TokenId> {
        v.iter().map(|&i| TokenId(i)).collect()
    }

    #[test]
    fn zero_params_give_zero_hidden_and_half() {
        let p = ModelParams::zeros(Dims::new(5, 3, 4));
        let s = step(&p, &LstmState::zeros(4), TokenId(2)).unwrap();
        assert!(s.hidden.iter().all(|&v| v == 0.0));
        assert_eq!(forward(&p, &ids(&[1, 2, 3])).unwrap(), 0.5);
        let l = loss(&p, &ids(&[1]), NumberFeature::Plural).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn scalar_cell_matches_hand_computation() {
        // d = h = 1. Rows: [w_x, w_h] per gate I, F, G, O.
        let mut p = ModelParams::zeros(Dims::new(2, 1, 1));
        p.embeddings = vec![0.0, 0.7];
        p.lstm_weights = vec![0.5, -0.3, 0.2, 0.4, -0.6, 0.9, 1.1, 0.1];
        p.lstm_bias = vec![0.1, 1.0, -0.2, 0.05];
        let state = LstmState {
            hidden: vec![0.25],
            cell: vec![-0.4],
        };
        let s = step(&p, &state, TokenId(1)).unwrap();

        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let (x, h0, c0) = (0.7, 0.25, -0.4);
        let i = sig(0.5 * x - 0.3 * h0 + 0.1);
        let f = sig(0.2 * x + 0.4 * h0 + 1.0);
        let g = (-0.6 * x + 0.9 * h0 - 0.2).tanh();
        let o = sig(1.1 * x + 0.1 * h0 + 0.05);
        let c = f * c0 + i * g;
        let h = o * c.tanh();
        assert!((s.cell[0] - c).abs() < 1e-15);
        assert!((s.hidden[0] - h).abs() < 1e-15);
    }

    #[test]
    fn forward_is_bit_reproducible() {
        let p = init_params(Dims::new(12, 4, 5), 3).unwrap();
        let t = ids(&[1, 5, 7, 2, 11]);
        assert_eq!(forward(&p, &t).unwrap().to_bits(), forward(&p, &t).unwrap().to_bits());
    }

    #[test]
    fn probe_prefixes_match_forward() {
        let p = init_params(Dims::new(12, 4, 5), 8).unwrap();
        let t = ids(&[3, 1, 4, 1, 5, 9]);
        let probes = forward_probe(&p, &t, &[1, 2, 3, 4, 5, 6]).unwrap();
        for (k, got) in probes.iter().enumerate() {
            let expected = forward(&p, &t[..=k]).unwrap();
            assert_eq!(got.to_bits(), expected.to_bits());
        }
        assert_eq!(
            forward_probe(&p, &t, &[6]).unwrap()[0].to_bits(),
            forward(&p, &t).unwrap().to_bits()
        );
        assert!(forward_probe(&p, &t, &[0]).is_err());
        assert!(forward_probe(&p, &t, &[7]).is_err());
    }

    #[test]
    fn input_errors() {
        let p = init_params(Dims::new(4, 2, 2), 0).unwrap();
        assert!(forward(&p, &[]).is_err());
        assert!(forward(&p, &ids(&[4])).is_err());
        assert!(step(&p, &LstmState::zeros(2), TokenId(9)).is_err());
        assert!(backward(&p, &ids(&[1]), NumberFeature::Unmarked).is_err());
    }

    #[test]
    fn output_bias_gradient_is_p_minus_y() {
        let p = init_params(Dims::new(10, 3, 4), 5).unwrap();
        let t = ids(&[2, 3, 9]);
        let prob = forward(&p, &t).unwrap();
        let (_, g) = backward(&p, &t, NumberFeature::Plural).unwrap();
        assert_eq!(g.output_bias, prob - 1.0);
        let (_, g) = backward(&p, &t, NumberFeature::Singular).unwrap();
        assert_eq!(g.output_bias, prob);
    }

    #[test]
    fn non_finite_parameters_are_reported() {
        let mut p = init_params(Dims::new(5, 2, 3), 5).unwrap();
        p.lstm_weights[0] = f64::NAN;
        assert!(matches!(
            backward(&p, &ids(&[1, 2]), NumberFeature::Plural),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn tie_resolves_to_singular() {
        assert_eq!(number_from_probability(0.5), NumberFeature::Singular);
        assert_eq!(number_from_probability(0.7), NumberFeature::Plural);
        assert_eq!(number_from_probability(0.2), NumberFeature::Singular);
    }

    #[test]
    fn gradients_have_parameter_shapes() {
        let p = init_params(Dims::new(10, 3, 4), 5).unwrap();
        let (_, g) = backward(&p, &ids(&[1, 2]), NumberFeature::Plural).unwrap();
        assert!(g.matches(p.dims));
        assert_eq!(g.parameter_count(), p.parameter_count());
    }
}
