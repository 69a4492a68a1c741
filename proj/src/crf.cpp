#include "lexner/crf.h"

#include <cmath>
#include <limits>

#include "lexner/corpus.h"

namespace lexner {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((v.array() - m).exp().sum());
}

// alpha(t, y): log-sum of prefix scores ending in y at t.
Eigen::MatrixXd forward_scores(const Eigen::MatrixXd& e, const Eigen::MatrixXd& tr) {
  const int T = static_cast<int>(e.rows());
  const int L = static_cast<int>(e.cols());
  Eigen::MatrixXd alpha(T, L);
  alpha.row(0) = tr.block(crf_start(L), 0, 1, L) + e.row(0);
  Eigen::VectorXd scratch(L);
  for (int t = 1; t < T; ++t) {
    for (int y = 0; y < L; ++y) {
      scratch = alpha.row(t - 1).transpose() + tr.block(0, y, L, 1);
      alpha(t, y) = log_sum_exp(scratch) + e(t, y);
    }
  }
  return alpha;
}

}  // namespace

double crf_path_score(const Eigen::MatrixXd& emissions,
                      const Eigen::MatrixXd& transitions, std::span<const int> path) {
  const int L = static_cast<int>(emissions.cols());
  double s = transitions(crf_start(L), path[0]);
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += emissions(static_cast<Eigen::Index>(t), path[t]);
    if (t > 0) s += transitions(path[t - 1], path[t]);
  }
  return s + transitions(path.back(), crf_stop(L));
}

double crf_log_partition(const Eigen::MatrixXd& emissions,
                         const Eigen::MatrixXd& transitions) {
  const int L = static_cast<int>(emissions.cols());
  const Eigen::MatrixXd alpha = forward_scores(emissions, transitions);
  const Eigen::VectorXd last = alpha.row(alpha.rows() - 1).transpose() +
                               transitions.block(0, crf_stop(L), L, 1);
  return log_sum_exp(last);
}

CrfLoss crf_nll(const Eigen::MatrixXd& e, const Eigen::MatrixXd& tr,
                std::span<const int> gold) {
  const int T = static_cast<int>(e.rows());
  const int L = static_cast<int>(e.cols());
  const Eigen::MatrixXd alpha = forward_scores(e, tr);
  Eigen::MatrixXd beta(T, L);
  beta.row(T - 1) = tr.block(0, crf_stop(L), L, 1).transpose();
  Eigen::VectorXd scratch(L);
  for (int t = T - 2; t >= 0; --t) {
    const Eigen::VectorXd next = e.row(t + 1).transpose() + beta.row(t + 1).transpose();
    for (int y = 0; y < L; ++y) {
      scratch = tr.block(y, 0, 1, L).transpose() + next;
      beta(t, y) = log_sum_exp(scratch);
    }
  }
  const Eigen::VectorXd last = alpha.row(T - 1).transpose() + beta.row(T - 1).transpose();
  const double log_z = log_sum_exp(last);

  CrfLoss out;
  out.loss = log_z - crf_path_score(e, tr, gold);
  out.d_emissions = (alpha + beta).array() - log_z;
  out.d_emissions = out.d_emissions.array().exp();
  out.d_transitions = Eigen::MatrixXd::Zero(L + 2, L + 2);
  out.d_transitions.block(crf_start(L), 0, 1, L) = out.d_emissions.row(0);
  out.d_transitions.block(0, crf_stop(L), L, 1) =
      out.d_emissions.row(T - 1).transpose();
  for (int t = 0; t + 1 < T; ++t) {
    for (int a = 0; a < L; ++a) {
      if (alpha(t, a) == kNegInf) continue;
      for (int b = 0; b < L; ++b) {
        const double lp = alpha(t, a) + tr(a, b) + e(t + 1, b) + beta(t + 1, b) - log_z;
        out.d_transitions(a, b) += std::exp(lp);
      }
    }
  }
  // Subtract the gold path's indicators.
  out.d_transitions(crf_start(L), gold[0]) -= 1.0;
  for (int t = 0; t < T; ++t) {
    out.d_emissions(t, gold[static_cast<std::size_t>(t)]) -= 1.0;
    if (t > 0) out.d_transitions(gold[t - 1], gold[t]) -= 1.0;
  }
  out.d_transitions(gold[static_cast<std::size_t>(T - 1)], crf_stop(L)) -= 1.0;
  return out;
}

ViterbiResult viterbi_decode(const Eigen::MatrixXd& e, const Eigen::MatrixXd& transitions,
                             const Eigen::MatrixXd* mask) {
  const int T = static_cast<int>(e.rows());
  const int L = static_cast<int>(e.cols());
  ViterbiResult result;
  if (T == 0) return result;
  const Eigen::MatrixXd tr = mask ? Eigen::MatrixXd(transitions + *mask) : transitions;

  // best(t, y): best score of the suffix t..T-1 with tag y at t.
  Eigen::MatrixXd best(T, L);
  for (int y = 0; y < L; ++y) best(T - 1, y) = e(T - 1, y) + tr(y, crf_stop(L));
  for (int t = T - 2; t >= 0; --t) {
    for (int y = 0; y < L; ++y) {
      double m = kNegInf;
      for (int z = 0; z < L; ++z) m = std::max(m, tr(y, z) + best(t + 1, z));
      best(t, y) = e(t, y) + m;
    }
  }
  // Forward greedy choice of the lowest index attaining the optimum.
  result.path.resize(static_cast<std::size_t>(T));
  int prev = crf_start(L);
  for (int t = 0; t < T; ++t) {
    int arg = 0;
    double m = kNegInf;
    for (int y = 0; y < L; ++y) {
      const double v = tr(prev, y) + best(t, y);
      if (v > m) {
        m = v;
        arg = y;
      }
    }
    if (t == 0) result.score = m;
    result.path[static_cast<std::size_t>(t)] = arg;
    prev = arg;
  }
  return result;
}

Eigen::MatrixXd bilou_transition_mask(std::span<const std::string> tags) {
  const int L = static_cast<int>(tags.size());
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(L + 2, L + 2);
  std::vector<TagParts> parts;
  std::vector<bool> shaped;
  for (const auto& t : tags) {
    try {
      parts.push_back(split_tag(t));
      shaped.push_back(true);
    } catch (...) {
      parts.emplace_back();
      shaped.push_back(false);
    }
  }
  const auto opens = [&](int i) {
    return shaped[i] && (parts[i].prefix == 'B' || parts[i].prefix == 'I');
  };
  const auto continues = [&](int i) {
    return shaped[i] && (parts[i].prefix == 'I' || parts[i].prefix == 'L');
  };
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      bool ok;
      if (opens(a)) {
        ok = continues(b) && parts[b].type == parts[a].type;
      } else {
        ok = !continues(b);
      }
      if (!shaped[a] || !shaped[b]) ok = true;
      if (!ok) mask(a, b) = kNegInf;
    }
    if (continues(a)) mask(crf_start(L), a) = kNegInf;
    if (opens(a)) mask(a, crf_stop(L)) = kNegInf;
  }
  // The start and stop states are never entered or left the wrong way.
  for (int i = 0; i < L + 2; ++i) {
    mask(i, crf_start(L)) = kNegInf;
    mask(crf_stop(L), i) = kNegInf;
  }
  return mask;
}

}  // namespace lexner
