use rand_chacha::ChaCha8Rng;

use super::{sigmoid, xavier_init, Gradients, ParamStore, Real, Tensor};
use crate::error::{Error, Result};

/// Input/hidden widths of one LSTM direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmDims {
    pub input: usize,
    pub hidden: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Parameter names registered for a prefix: stacked gate weights
/// (rows ordered input, forget, candidate, output).
pub fn lstm_param_names(prefix: &str) -> [String; 3] {
    [
        format!("{prefix}.wx"),
        format!("{prefix}.wh"),
        format!("{prefix}.b"),
    ]
}

/// Registers `{prefix}.wx` (4H x I), `{prefix}.wh` (4H x H), and
/// `{prefix}.b` (4H), Xavier for the weights and zeros for the bias.
pub fn init_lstm_params<F: Real>(
    store: &mut ParamStore<F>,
    prefix: &str,
    dims: LstmDims,
    rng: &mut ChaCha8Rng,
) {
    let [wx, wh, b] = lstm_param_names(prefix);
    store.insert(wx, xavier_init(4 * dims.hidden, dims.input, rng));
    store.insert(wh, xavier_init(4 * dims.hidden, dims.hidden, rng));
    store.insert(b, Tensor::vector(4 * dims.hidden));
}

/// Activations cached by the forward pass, in run order (already
/// reversed for [`Direction::Backward`]).
#[derive(Clone, Debug)]
pub struct LstmCache<F> {
    dims: LstmDims,
    direction: Direction,
    xs: Vec<Vec<F>>,
    gates_i: Vec<Vec<F>>,
    gates_f: Vec<Vec<F>>,
    gates_g: Vec<Vec<F>>,
    gates_o: Vec<Vec<F>>,
    cells: Vec<Vec<F>>,
    tanh_cells: Vec<Vec<F>>,
    hiddens: Vec<Vec<F>>,
}

impl<F: Real> LstmCache<F> {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// Runs the standard LSTM recurrence over a sequence and returns hidden
/// states aligned to the input order, plus the cache needed by
/// [`lstm_sequence_backward`]. `Direction::Backward` consumes the
/// sequence right-to-left; a BiLSTM is one call per direction with the
/// per-position outputs concatenated.
pub fn lstm_sequence_forward<F: Real>(
    store: &ParamStore<F>,
    prefix: &str,
    inputs: &[Vec<F>],
    direction: Direction,
) -> Result<(Vec<Vec<F>>, LstmCache<F>)> {
    let [wx_n, wh_n, b_n] = lstm_param_names(prefix);
    let wx = store.tensor(&wx_n);
    let wh = store.tensor(&wh_n);
    let b = store.tensor(&b_n);
    let hidden = wh.cols();
    let input_dim = wx.cols();
    if wx.rows() != 4 * hidden || b.len() != 4 * hidden {
        return Err(Error::usage(format!(
            "inconsistent LSTM parameter shapes under {prefix:?}"
        )));
    }
    for x in inputs {
        if x.len() != input_dim {
            return Err(Error::usage(format!(
                "LSTM input dim {} does not match parameter dim {input_dim}",
                x.len()
            )));
        }
    }
    let dims = LstmDims {
        input: input_dim,
        hidden,
    };

    let run_inputs: Vec<Vec<F>> = match direction {
        Direction::Forward => inputs.to_vec(),
        Direction::Backward => inputs.iter().rev().cloned().collect(),
    };

    let t_len = run_inputs.len();
    let mut cache = LstmCache {
        dims,
        direction,
        xs: run_inputs,
        gates_i: Vec::with_capacity(t_len),
        gates_f: Vec::with_capacity(t_len),
        gates_g: Vec::with_capacity(t_len),
        gates_o: Vec::with_capacity(t_len),
        cells: Vec::with_capacity(t_len),
        tanh_cells: Vec::with_capacity(t_len),
        hiddens: Vec::with_capacity(t_len),
    };

    let mut h_prev = vec![F::zero(); hidden];
    let mut c_prev = vec![F::zero(); hidden];
    for t in 0..t_len {
        let mut pre = wx.matvec(&cache.xs[t]);
        let rec = wh.matvec(&h_prev);
        for ((p, r), &bi) in pre.iter_mut().zip(&rec).zip(b.as_slice()) {
            *p += *r + bi;
        }
        let mut gi = vec![F::zero(); hidden];
        let mut gf = vec![F::zero(); hidden];
        let mut gg = vec![F::zero(); hidden];
        let mut go = vec![F::zero(); hidden];
        for j in 0..hidden {
            gi[j] = sigmoid(pre[j]);
            gf[j] = sigmoid(pre[hidden + j]);
            gg[j] = pre[2 * hidden + j].tanh();
            go[j] = sigmoid(pre[3 * hidden + j]);
        }
        let mut c = vec![F::zero(); hidden];
        let mut tanh_c = vec![F::zero(); hidden];
        let mut h = vec![F::zero(); hidden];
        for j in 0..hidden {
            c[j] = gf[j] * c_prev[j] + gi[j] * gg[j];
            tanh_c[j] = c[j].tanh();
            h[j] = go[j] * tanh_c[j];
        }
        cache.gates_i.push(gi);
        cache.gates_f.push(gf);
        cache.gates_g.push(gg);
        cache.gates_o.push(go);
        cache.cells.push(c.clone());
        cache.tanh_cells.push(tanh_c);
        cache.hiddens.push(h.clone());
        h_prev = h;
        c_prev = c;
    }

    let outputs: Vec<Vec<F>> = match direction {
        Direction::Forward => cache.hiddens.clone(),
        Direction::Backward => cache.hiddens.iter().rev().cloned().collect(),
    };
    Ok((outputs, cache))
}

/// Backpropagates hidden-state gradients (aligned to the original input
/// order) through a cached run; accumulates parameter gradients and
/// returns input gradients in input order.
pub fn lstm_sequence_backward<F: Real>(
    store: &ParamStore<F>,
    prefix: &str,
    cache: &LstmCache<F>,
    d_hidden: &[Vec<F>],
    grads: &mut Gradients<F>,
) -> Vec<Vec<F>> {
    assert_eq!(d_hidden.len(), cache.len(), "gradient length mismatch");
    let [wx_n, wh_n, b_n] = lstm_param_names(prefix);
    let wx = store.tensor(&wx_n);
    let wh = store.tensor(&wh_n);
    let hidden = cache.dims.hidden;
    let t_len = cache.len();

    let dh_run: Vec<&Vec<F>> = match cache.direction {
        Direction::Forward => d_hidden.iter().collect(),
        Direction::Backward => d_hidden.iter().rev().collect(),
    };

    let mut dx_run: Vec<Vec<F>> = vec![Vec::new(); t_len];
    let mut dh_carry = vec![F::zero(); hidden];
    let mut dc_next = vec![F::zero(); hidden];
    for t in (0..t_len).rev() {
        let (gi, gf, gg, go) = (
            &cache.gates_i[t],
            &cache.gates_f[t],
            &cache.gates_g[t],
            &cache.gates_o[t],
        );
        let tanh_c = &cache.tanh_cells[t];
        let mut dpre = vec![F::zero(); 4 * hidden];
        for j in 0..hidden {
            let dh = dh_run[t][j] + dh_carry[j];
            let d_o = dh * tanh_c[j];
            let dc = dc_next[j] + dh * go[j] * (F::one() - tanh_c[j] * tanh_c[j]);
            let d_i = dc * gg[j];
            let d_g = dc * gi[j];
            let c_prev = if t == 0 {
                F::zero()
            } else {
                cache.cells[t - 1][j]
            };
            let d_f = dc * c_prev;
            dpre[j] = d_i * gi[j] * (F::one() - gi[j]);
            dpre[hidden + j] = d_f * gf[j] * (F::one() - gf[j]);
            dpre[2 * hidden + j] = d_g * (F::one() - gg[j] * gg[j]);
            dpre[3 * hidden + j] = d_o * go[j] * (F::one() - go[j]);
            dc_next[j] = dc * gf[j];
        }
        let h_prev: &[F] = if t == 0 { &[] } else { &cache.hiddens[t - 1] };
        grads
            .tensor_mut(&wx_n)
            .add_outer(&dpre, &cache.xs[t], F::one());
        if t > 0 {
            grads.tensor_mut(&wh_n).add_outer(&dpre, h_prev, F::one());
        }
        for (g, &d) in grads.tensor_mut(&b_n).as_mut_slice().iter_mut().zip(&dpre) {
            *g += d;
        }
        dx_run[t] = wx.t_matvec(&dpre);
        dh_carry = wh.t_matvec(&dpre);
    }

    match cache.direction {
        Direction::Forward => dx_run,
        Direction::Backward => {
            dx_run.reverse();
            dx_run
        }
    }
}
