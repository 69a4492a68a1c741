#pragma once

#include <Eigen/Dense>

#include "lexner/random.h"

namespace lexner {

// Single-layer LSTM. Gate rows are stacked [input; forget; candidate; output],
// each `hidden` rows tall. Sequences are matrices with one column per step.
struct LstmWeights {
  Eigen::MatrixXd wx;  // 4H x In
  Eigen::MatrixXd wh;  // 4H x H
  Eigen::MatrixXd b;   // 4H x 1

  static LstmWeights zeros(int input, int hidden);
  // Glorot-uniform matrices, zero biases except forget gate = 1.
  static LstmWeights random(int input, int hidden, Rng& rng);

  int hidden() const { return static_cast<int>(wh.cols()); }
  int input() const { return static_cast<int>(wx.cols()); }
  void set_zero();
};

struct LstmTrace {
  Eigen::MatrixXd x;      // In x T
  Eigen::MatrixXd gates;  // 4H x T, after nonlinearities
  Eigen::MatrixXd c;      // H x T
  Eigen::MatrixXd tanh_c; // H x T
  Eigen::MatrixXd h;      // H x T
};

// Zero initial state. Returns H x T. Fills `trace` when non-null.
Eigen::MatrixXd lstm_forward(const LstmWeights& w, const Eigen::MatrixXd& inputs,
                             LstmTrace* trace = nullptr);

// Backpropagates d_hidden (H x T) through a recorded trace. Accumulates into
// `grads` and returns dL/dinputs (In x T).
Eigen::MatrixXd lstm_backward(const LstmWeights& w, const LstmTrace& trace,
                              const Eigen::MatrixXd& d_hidden, LstmWeights* grads);

// Glorot-uniform in +-sqrt(6 / (rows + cols)).
Eigen::MatrixXd glorot(int rows, int cols, Rng& rng);

}  // namespace lexner
