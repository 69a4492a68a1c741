#include "lexner/lstm.h"

#include <cmath>

namespace lexner {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Eigen::MatrixXd glorot(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / double(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

LstmWeights LstmWeights::zeros(int input, int hidden) {
  LstmWeights w;
  w.wx = Eigen::MatrixXd::Zero(4 * hidden, input);
  w.wh = Eigen::MatrixXd::Zero(4 * hidden, hidden);
  w.b = Eigen::MatrixXd::Zero(4 * hidden, 1);
  return w;
}

LstmWeights LstmWeights::random(int input, int hidden, Rng& rng) {
  LstmWeights w;
  w.wx = glorot(4 * hidden, input, rng);
  w.wh = glorot(4 * hidden, hidden, rng);
  w.b = Eigen::MatrixXd::Zero(4 * hidden, 1);
  w.b.block(hidden, 0, hidden, 1).setOnes();
  return w;
}

void LstmWeights::set_zero() {
  wx.setZero();
  wh.setZero();
  b.setZero();
}

Eigen::MatrixXd lstm_forward(const LstmWeights& w, const Eigen::MatrixXd& inputs,
                             LstmTrace* trace) {
  const Eigen::Index H = w.hidden();
  const Eigen::Index T = inputs.cols();
  Eigen::MatrixXd h(H, T);
  if (T == 0) {
    if (trace) *trace = LstmTrace{inputs, Eigen::MatrixXd(4 * H, 0),
                                  Eigen::MatrixXd(H, 0), Eigen::MatrixXd(H, 0), h};
    return h;
  }
  Eigen::MatrixXd z = w.wx * inputs;
  z.colwise() += w.b.col(0);
  Eigen::MatrixXd c(H, T), tanh_c(H, T);
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(H);
  for (Eigen::Index t = 0; t < T; ++t) {
    auto zt = z.col(t);
    if (t > 0) zt.noalias() += w.wh * h_prev;
    for (Eigen::Index k = 0; k < H; ++k) {
      zt(k) = sigmoid(zt(k));
      zt(H + k) = sigmoid(zt(H + k));
      zt(2 * H + k) = std::tanh(zt(2 * H + k));
      zt(3 * H + k) = sigmoid(zt(3 * H + k));
      const double ct = zt(H + k) * c_prev(k) + zt(k) * zt(2 * H + k);
      c(k, t) = ct;
      tanh_c(k, t) = std::tanh(ct);
      h(k, t) = zt(3 * H + k) * tanh_c(k, t);
    }
    h_prev = h.col(t);
    c_prev = c.col(t);
  }
  if (trace) {
    trace->x = inputs;
    trace->gates = std::move(z);
    trace->c = std::move(c);
    trace->tanh_c = std::move(tanh_c);
    trace->h = h;
  }
  return h;
}

Eigen::MatrixXd lstm_backward(const LstmWeights& w, const LstmTrace& trace,
                              const Eigen::MatrixXd& d_hidden, LstmWeights* grads) {
  const Eigen::Index H = w.hidden();
  const Eigen::Index T = trace.x.cols();
  Eigen::MatrixXd dz(4 * H, T);
  if (T == 0) return Eigen::MatrixXd(w.input(), 0);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto g = trace.gates.col(t);
    for (Eigen::Index k = 0; k < H; ++k) {
      const double i = g(k), f = g(H + k), cand = g(2 * H + k), o = g(3 * H + k);
      const double dh = d_hidden(k, t) + dh_next(k);
      const double tc = trace.tanh_c(k, t);
      const double dc = dc_next(k) + dh * o * (1.0 - tc * tc);
      const double c_prev = t > 0 ? trace.c(k, t - 1) : 0.0;
      dz(k, t) = dc * cand * i * (1.0 - i);
      dz(H + k, t) = dc * c_prev * f * (1.0 - f);
      dz(2 * H + k, t) = dc * i * (1.0 - cand * cand);
      dz(3 * H + k, t) = dh * tc * o * (1.0 - o);
      dc_next(k) = dc * f;
    }
    dh_next.noalias() = w.wh.transpose() * dz.col(t);
  }
  grads->wx.noalias() += dz * trace.x.transpose();
  if (T > 1) {
    grads->wh.noalias() +=
        dz.rightCols(T - 1) * trace.h.leftCols(T - 1).transpose();
  }
  grads->b.col(0) += dz.rowwise().sum();
  return w.wx.transpose() * dz;
}

}  // namespace lexner
