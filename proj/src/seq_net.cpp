#include "cascade/seq_net.hpp"

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cascade {

namespace {

Eigen::MatrixXd uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            m(r, c) = rng.uniform(-0.1, 0.1);
        }
    }
    return m;
}

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) { return 1.0 / (1.0 + (-z).exp()); }

}  // namespace

LstmParams init_lstm(const LstmConfig& cfg) {
    if (cfg.input_dim < 1 || cfg.hidden_dim < 1 || cfg.num_classes < 2 || cfg.seq_len < 1) {
        throw std::invalid_argument("init_lstm: bad dimensions");
    }
    Rng rng(cfg.seed);
    const Eigen::Index h = cfg.hidden_dim;
    const Eigen::Index z = cfg.input_dim + cfg.hidden_dim;
    LstmParams p;
    p.cfg = cfg;
    p.w_input = uniform_matrix(rng, h, z);
    p.w_forget = uniform_matrix(rng, h, z);
    p.w_output = uniform_matrix(rng, h, z);
    p.w_cell = uniform_matrix(rng, h, z);
    p.b_input = Eigen::VectorXd::Zero(h);
    p.b_forget = Eigen::VectorXd::Ones(h);  // keeps the memory path alive early
    p.b_output = Eigen::VectorXd::Zero(h);
    p.b_cell = Eigen::VectorXd::Zero(h);
    p.w_readout = uniform_matrix(rng, cfg.num_classes, h);
    p.b_readout = Eigen::VectorXd::Zero(cfg.num_classes);
    return p;
}

SequenceWindow make_window(const std::vector<Eigen::VectorXd>& history, std::size_t end_pos,
                           int seq_len) {
    if (end_pos >= history.size()) {
        throw std::invalid_argument("make_window: end_pos out of range");
    }
    SequenceWindow w;
    w.steps.resize(static_cast<std::size_t>(seq_len));
    const Eigen::Index dim = history[end_pos].size();
    for (int t = 0; t < seq_len; ++t) {
        const std::ptrdiff_t pos =
            static_cast<std::ptrdiff_t>(end_pos) - (seq_len - 1 - t);
        w.steps[static_cast<std::size_t>(t)] =
            pos < 0 ? Eigen::VectorXd::Zero(dim) : history[static_cast<std::size_t>(pos)];
    }
    return w;
}

LstmState lstm_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                    const Eigen::VectorXd& c_prev, const LstmParams& p) {
    const Eigen::Index fdim = p.w_input.cols() - p.w_input.rows();
    if (x.size() != fdim || h_prev.size() != p.w_input.rows() || c_prev.size() != p.w_input.rows()) {
        throw std::invalid_argument("lstm_cell: shape mismatch");
    }
    Eigen::VectorXd z(x.size() + h_prev.size());
    z << x, h_prev;
    const Eigen::ArrayXd i = sigmoid((p.w_input * z + p.b_input).array());
    const Eigen::ArrayXd f = sigmoid((p.w_forget * z + p.b_forget).array());
    const Eigen::ArrayXd o = sigmoid((p.w_output * z + p.b_output).array());
    const Eigen::ArrayXd g = (p.w_cell * z + p.b_cell).array().tanh();
    LstmState state;
    state.c = (f * c_prev.array() + i * g).matrix();
    state.h = (o * state.c.array().tanh()).matrix();
    return state;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double peak = logits.maxCoeff();
    const Eigen::ArrayXd e = (logits.array() - peak).exp();
    return (e / e.sum()).matrix();
}

namespace {

// Everything the backward pass needs, per step.
struct StepTrace {
    Eigen::VectorXd z;  // [x; h_prev]
    Eigen::ArrayXd i, f, o, g;
    Eigen::VectorXd c, c_prev;
    Eigen::ArrayXd tanh_c;
};

struct ForwardTrace {
    std::vector<StepTrace> steps;
    Eigen::VectorXd h_final;
    Eigen::VectorXd probabilities;
};

ForwardTrace run_forward(const SequenceWindow& window, const LstmParams& p) {
    const Eigen::Index h = p.cfg.hidden_dim;
    ForwardTrace trace;
    trace.steps.reserve(window.steps.size());
    Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
    for (const auto& x : window.steps) {
        StepTrace st;
        st.z.resize(x.size() + h);
        st.z << x, h_prev;
        st.i = sigmoid((p.w_input * st.z + p.b_input).array());
        st.f = sigmoid((p.w_forget * st.z + p.b_forget).array());
        st.o = sigmoid((p.w_output * st.z + p.b_output).array());
        st.g = (p.w_cell * st.z + p.b_cell).array().tanh();
        st.c_prev = c_prev;
        st.c = (st.f * c_prev.array() + st.i * st.g).matrix();
        st.tanh_c = st.c.array().tanh();
        h_prev = (st.o * st.tanh_c).matrix();
        c_prev = st.c;
        trace.steps.push_back(std::move(st));
    }
    trace.h_final = h_prev;
    trace.probabilities = softmax(p.w_readout * h_prev + p.b_readout);
    return trace;
}

void zero_like(const LstmParams& p, LstmGradients& g) {
    g.w_input = Eigen::MatrixXd::Zero(p.w_input.rows(), p.w_input.cols());
    g.w_forget = g.w_input;
    g.w_output = g.w_input;
    g.w_cell = g.w_input;
    g.b_input = Eigen::VectorXd::Zero(p.b_input.size());
    g.b_forget = g.b_input;
    g.b_output = g.b_input;
    g.b_cell = g.b_input;
    g.w_readout = Eigen::MatrixXd::Zero(p.w_readout.rows(), p.w_readout.cols());
    g.b_readout = Eigen::VectorXd::Zero(p.b_readout.size());
}

}  // namespace

Eigen::VectorXd lstm_forward(const SequenceWindow& window, const LstmParams& p) {
    if (window.steps.empty()) {
        throw std::invalid_argument("lstm_forward: empty window");
    }
    return run_forward(window, p).probabilities;
}

double lstm_loss_and_gradients(const SequenceWindow& window, int true_class,
                               const LstmParams& p, LstmGradients& grads) {
    if (true_class < 0 || true_class >= p.cfg.num_classes) {
        throw std::invalid_argument("lstm_loss_and_gradients: class out of range");
    }
    const ForwardTrace trace = run_forward(window, p);
    const double prob = trace.probabilities[true_class];
    const double loss = -std::log(std::max(prob, 1e-300));

    Eigen::VectorXd dlogits = trace.probabilities;
    dlogits[true_class] -= 1.0;
    grads.w_readout += dlogits * trace.h_final.transpose();
    grads.b_readout += dlogits;

    const Eigen::Index h = p.cfg.hidden_dim;
    Eigen::VectorXd dh = p.w_readout.transpose() * dlogits;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(h);
    for (std::size_t t = trace.steps.size(); t-- > 0;) {
        const StepTrace& st = trace.steps[t];
        const Eigen::ArrayXd dh_a = dh.array();
        const Eigen::ArrayXd do_ = dh_a * st.tanh_c;
        const Eigen::ArrayXd dc_total = dc.array() + dh_a * st.o * (1.0 - st.tanh_c.square());
        const Eigen::ArrayXd di = dc_total * st.g;
        const Eigen::ArrayXd dg = dc_total * st.i;
        const Eigen::ArrayXd df = dc_total * st.c_prev.array();

        const Eigen::VectorXd dai = (di * st.i * (1.0 - st.i)).matrix();
        const Eigen::VectorXd daf = (df * st.f * (1.0 - st.f)).matrix();
        const Eigen::VectorXd dao = (do_ * st.o * (1.0 - st.o)).matrix();
        const Eigen::VectorXd dag = (dg * (1.0 - st.g.square())).matrix();

        grads.w_input += dai * st.z.transpose();
        grads.w_forget += daf * st.z.transpose();
        grads.w_output += dao * st.z.transpose();
        grads.w_cell += dag * st.z.transpose();
        grads.b_input += dai;
        grads.b_forget += daf;
        grads.b_output += dao;
        grads.b_cell += dag;

        const Eigen::VectorXd dz = p.w_input.transpose() * dai + p.w_forget.transpose() * daf +
                                   p.w_output.transpose() * dao + p.w_cell.transpose() * dag;
        dh = dz.tail(h);
        dc = (dc_total * st.f).matrix();
    }
    return loss;
}

TrainResult lstm_train_step(const LstmParams& params,
                            const std::vector<std::pair<SequenceWindow, int>>& batch) {
    if (batch.empty()) {
        throw std::invalid_argument("lstm_train_step: empty batch");
    }
    LstmGradients grads;
    zero_like(params, grads);
    double loss_sum = 0.0;
    for (const auto& [window, label] : batch) {
        loss_sum += lstm_loss_and_gradients(window, label, params, grads);
    }
    const double scale = 1.0 / static_cast<double>(batch.size());
    const double mean_loss = loss_sum * scale;
    if (!std::isfinite(mean_loss)) {
        throw TrainingError("lstm_train_step: non-finite loss");
    }

    TrainResult result;
    result.mean_loss = mean_loss;
    result.params = params;
    const double step = params.cfg.learning_rate * scale;
    result.params.w_input -= step * grads.w_input;
    result.params.w_forget -= step * grads.w_forget;
    result.params.w_output -= step * grads.w_output;
    result.params.w_cell -= step * grads.w_cell;
    result.params.b_input -= step * grads.b_input;
    result.params.b_forget -= step * grads.b_forget;
    result.params.b_output -= step * grads.b_output;
    result.params.b_cell -= step * grads.b_cell;
    result.params.w_readout -= step * grads.w_readout;
    result.params.b_readout -= step * grads.b_readout;
    return result;
}

}  // namespace cascade
