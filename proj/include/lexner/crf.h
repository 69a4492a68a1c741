#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lexner {

// Linear-chain CRF over L tags. Emissions are T x L. Transitions are
// (L+2) x (L+2), entry (i, j) scoring i -> j, with row/column L the start
// state and L+1 the stop state.
inline int crf_start(int num_tags) { return num_tags; }
inline int crf_stop(int num_tags) { return num_tags + 1; }

double crf_path_score(const Eigen::MatrixXd& emissions,
                      const Eigen::MatrixXd& transitions, std::span<const int> path);

// log sum over all L^T paths of exp(score), via log-sum-exp forward recursion.
double crf_log_partition(const Eigen::MatrixXd& emissions,
                         const Eigen::MatrixXd& transitions);

struct CrfLoss {
  double loss = 0;                  // log Z - score(gold)
  Eigen::MatrixXd d_emissions;      // T x L
  Eigen::MatrixXd d_transitions;    // (L+2) x (L+2)
};

// Negative log-likelihood of `gold` and its gradients (marginals minus gold
// indicators), from forward-backward in log space.
CrfLoss crf_nll(const Eigen::MatrixXd& emissions, const Eigen::MatrixXd& transitions,
                std::span<const int> gold);

struct ViterbiResult {
  std::vector<int> path;
  double score = 0;
};

// Best path; among equal-scoring paths, the lexicographically smallest under
// tag index order. `mask` (same shape as transitions, 0 or -inf) is added to
// the transitions when given.
ViterbiResult viterbi_decode(const Eigen::MatrixXd& emissions,
                             const Eigen::MatrixXd& transitions,
                             const Eigen::MatrixXd* mask = nullptr);

// 0 for transitions allowed in BILOU, -inf otherwise (start and stop
// included). Tags that are not BILOU-shaped are unconstrained.
Eigen::MatrixXd bilou_transition_mask(std::span<const std::string> tags);

}  // namespace lexner
