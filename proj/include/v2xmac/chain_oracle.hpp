#pragma once

// Generic finite DTMC machinery: explicit transition matrices for the five
// model chains and a direct steady-state solver used to check every closed
// form in the library.
//
// State enumeration order (stable; snapshots and flatten() depend on it):
//   cam     "tx,j" j=0..T-1, then "txp,j" j=0..T-1
//   denm    as cam, then "Idle"
//   queue   "q,i" i=0..M
//   cv2x    "Idle", "w,j" j=0..G-2, then "rc,i,j" row-major i=1..R_h, j=0..G-1
//   dot11p  "Idle", "A,i" i=1..W, "B,i" i=1..V, "D,s,j" (stage-major),
//           "SA,s,j" j=1..W-1 (stage-major), "I,s", "Tx,i" i=1..V
// where s runs over the backoff stages {0, 2, 3, ..., Č-1}.

#include <Eigen/SparseCore>

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "v2xmac/coupling.hpp"
#include "v2xmac/params.hpp"

namespace v2xmac {

class TransitionMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  /// Validates row-stochasticity (1e-12), entry range and label uniqueness.
  TransitionMatrix(std::vector<std::string> labels, const std::vector<Eigen::Triplet<double>>& entries);

  int size() const { return static_cast<int>(labels_.size()); }
  const Storage& rows() const { return rows_; }
  std::span<const std::string> labels() const { return labels_; }
  int index_of(std::string_view label) const;
  double at(int from, int to) const { return rows_.coeff(from, to); }
  double at(std::string_view from, std::string_view to) const { return at(index_of(from), index_of(to)); }

  /// Same chain with state k moved to position order[k].
  TransitionMatrix relabeled(std::span<const int> order) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  Storage rows_;
};

struct SteadyStateVector {
  std::vector<double> probs;
  std::vector<std::string> labels;
  double residual = 0.0;  // max |pi P - pi|

  double at(std::string_view label) const;
};

/// Solves pi P = pi, sum(pi) = 1 as a sparse linear system with the
/// normalization row replacing the last balance equation. Periodic chains
/// are fine; chains with more than one closed class are singular and raise
/// NoConvergence.
SteadyStateVector solve_steady_state(const TransitionMatrix& m);

/// Incremental construction by state label.
class ChainBuilder {
 public:
  int add_state(std::string label);
  void add(int from, int to, double p);
  void add(std::string_view from, std::string_view to, double p) { add(index(from), index(to), p); }
  int index(std::string_view label) const;
  TransitionMatrix build() &&;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  std::vector<Eigen::Triplet<double>> entries_;
};

enum class ChainKind { Cam, Denm, Queue, Cv2x, Dot11p };

ChainKind parse_chain_kind(std::string_view name);  // UnknownChainKind
std::string_view to_string(ChainKind kind);

TransitionMatrix build_cam_chain(int interval, double transmit);
TransitionMatrix build_denm_chain(int interval, int repetitions, double trigger_probability, double transmit);
TransitionMatrix build_queue_chain(double growth, double first_arrival, double drain, int capacity);
TransitionMatrix build_cv2x_chain(const Cv2xParams& params, double queue_nonempty, double arrival_when_empty);
TransitionMatrix build_dot11p_chain(const Dot11pParams& params, double queue_empty, double arrival_when_empty,
                                    double channel_busy);

/// Builds the chain of the given kind at the linking probabilities in
/// `coupling`. The queue chain uses generator solutions at coupling.transmit.
TransitionMatrix build_chain(ChainKind kind, const ScenarioConfig& params, const CouplingState& coupling);

}  // namespace v2xmac
