#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace cascade {

struct LstmConfig {
    int input_dim = 0;   // masked feature arity
    int hidden_dim = 32;
    int num_classes = 0;
    int seq_len = 8;
    double learning_rate = 0.01;
    int epochs = 5;
    std::uint64_t seed = 0;
};

// Single-layer LSTM classifier parameters. Gate weights act on [x_t; h_prev].
struct LstmParams {
    Eigen::MatrixXd w_input, w_forget, w_output, w_cell;  // H x (F' + H)
    Eigen::VectorXd b_input, b_forget, b_output, b_cell;  // H
    Eigen::MatrixXd w_readout;                            // K x H
    Eigen::VectorXd b_readout;                            // K
    LstmConfig cfg;
};

// Weights uniform(-0.1, 0.1) from the seed; forget bias 1, other biases 0.
LstmParams init_lstm(const LstmConfig& cfg);

// T consecutive masked feature vectors ending at the record under
// classification; missing leading steps are zero vectors.
struct SequenceWindow {
    std::vector<Eigen::VectorXd> steps;
};

// history holds vectors in arrival order; the window ends at history[end_pos].
SequenceWindow make_window(const std::vector<Eigen::VectorXd>& history, std::size_t end_pos,
                           int seq_len);

struct LstmState {
    Eigen::VectorXd h, c;
};

// One step: gates from [x; h_prev], then c = f.c_prev + i.g, h = o.tanh(c).
LstmState lstm_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                    const Eigen::VectorXd& c_prev, const LstmParams& params);

// Runs the cell over the window from zero state; softmax over the readout of
// the final hidden state (max-subtracted, stable for large logits).
Eigen::VectorXd lstm_forward(const SequenceWindow& window, const LstmParams& params);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

struct LstmGradients {
    Eigen::MatrixXd w_input, w_forget, w_output, w_cell;
    Eigen::VectorXd b_input, b_forget, b_output, b_cell;
    Eigen::MatrixXd w_readout;
    Eigen::VectorXd b_readout;
};

// Cross-entropy loss and full BPTT gradients for one labeled window.
double lstm_loss_and_gradients(const SequenceWindow& window, int true_class,
                               const LstmParams& params, LstmGradients& grads_accum);

struct TrainResult {
    LstmParams params;
    double mean_loss = 0.0;
};

// One vanilla gradient-descent step on the mean batch loss. Throws
// TrainingError on a non-finite loss; callers keep their previous params.
TrainResult lstm_train_step(const LstmParams& params,
                            const std::vector<std::pair<SequenceWindow, int>>& batch);

}  // namespace cascade
