#include "v2xmac/chain_oracle.hpp"

#include <fmt/format.h>

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "v2xmac/dot11p.hpp"
#include "v2xmac/error.hpp"
#include "v2xmac/traffic.hpp"

namespace v2xmac {

TransitionMatrix::TransitionMatrix(std::vector<std::string> labels, const std::vector<Eigen::Triplet<double>>& entries)
    : labels_(std::move(labels)) {
  const int n = size();
  if (n == 0) fail(ErrorCode::NonStochasticMatrix, "empty state space");
  for (int i = 0; i < n; ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      fail(ErrorCode::NonStochasticMatrix, fmt::format("duplicate state label '{}'", labels_[i]));
    }
  }
  rows_.resize(n, n);
  rows_.setFromTriplets(entries.begin(), entries.end());
  rows_.makeCompressed();

  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Storage::InnerIterator it(rows_, i); it; ++it) {
      if (!(it.value() >= 0.0 && it.value() <= 1.0 + 1e-12)) {
        fail(ErrorCode::NonStochasticMatrix,
             fmt::format("entry ({}, {}) = {} outside [0, 1]", labels_[i], labels_[it.col()], it.value()));
      }
      sum += it.value();
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      fail(ErrorCode::NonStochasticMatrix, fmt::format("row '{}' sums to {:.17g}", labels_[i], sum));
    }
  }
}

int TransitionMatrix::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) fail(ErrorCode::InvalidParameter, fmt::format("no state labelled '{}'", label));
  return it->second;
}

TransitionMatrix TransitionMatrix::relabeled(std::span<const int> order) const {
  const int n = size();
  if (static_cast<int>(order.size()) != n) fail(ErrorCode::InvalidParameter, "permutation size mismatch");
  std::vector<std::string> labels(n);
  std::vector<bool> seen(n, false);
  for (int k = 0; k < n; ++k) {
    const int to = order[k];
    if (to < 0 || to >= n || seen[to]) fail(ErrorCode::InvalidParameter, "order is not a permutation");
    seen[to] = true;
    labels[to] = labels_[k];
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(rows_.nonZeros());
  for (int i = 0; i < n; ++i) {
    for (Storage::InnerIterator it(rows_, i); it; ++it) entries.emplace_back(order[i], order[it.col()], it.value());
  }
  return TransitionMatrix(std::move(labels), entries);
}

double SteadyStateVector::at(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) fail(ErrorCode::InvalidParameter, fmt::format("no state labelled '{}'", label));
  return probs[it - labels.begin()];
}

SteadyStateVector solve_steady_state(const TransitionMatrix& m) {
  const int n = m.size();
  const auto& p = m.rows();

  // A = P^T - I with the last balance equation replaced by sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(p.nonZeros() + 2 * n);
  for (int i = 0; i < n; ++i) {
    for (TransitionMatrix::Storage::InnerIterator it(p, i); it; ++it) {
      if (it.col() != n - 1) entries.emplace_back(it.col(), i, it.value());
    }
  }
  for (int k = 0; k < n - 1; ++k) entries.emplace_back(k, k, -1.0);
  for (int k = 0; k < n; ++k) entries.emplace_back(n - 1, k, 1.0);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    fail(ErrorCode::NoConvergence, "balance equations are singular (chain has more than one closed class)");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::VectorXd pi = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !pi.allFinite()) fail(ErrorCode::NoConvergence, "sparse solve failed");

  for (int k = 0; k < n; ++k) {
    if (pi[k] < -1e-10) {  // roundoff on states with vanishing mass is clipped
      fail(ErrorCode::NoConvergence, fmt::format("negative mass {} at '{}'", pi[k], m.labels()[k]));
    }
    pi[k] = std::max(pi[k], 0.0);
  }
  pi /= pi.sum();

  Eigen::RowVectorXd moved = pi.transpose() * p;
  const double residual = (moved - pi.transpose()).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10)) fail(ErrorCode::NoConvergence, fmt::format("residual {} above 1e-10", residual));

  SteadyStateVector out;
  out.probs.assign(pi.data(), pi.data() + n);
  out.labels.assign(m.labels().begin(), m.labels().end());
  out.residual = residual;
  return out;
}

int ChainBuilder::add_state(std::string label) {
  const int id = static_cast<int>(labels_.size());
  if (!index_.emplace(label, id).second) fail(ErrorCode::InvalidParameter, fmt::format("duplicate state '{}'", label));
  labels_.push_back(std::move(label));
  return id;
}

void ChainBuilder::add(int from, int to, double p) {
  if (p != 0.0) entries_.emplace_back(from, to, p);
}

int ChainBuilder::index(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) fail(ErrorCode::InvalidParameter, fmt::format("no state labelled '{}'", label));
  return it->second;
}

TransitionMatrix ChainBuilder::build() && { return TransitionMatrix(std::move(labels_), entries_); }

ChainKind parse_chain_kind(std::string_view name) {
  if (name == "cam") return ChainKind::Cam;
  if (name == "denm") return ChainKind::Denm;
  if (name == "queue") return ChainKind::Queue;
  if (name == "cv2x") return ChainKind::Cv2x;
  if (name == "dot11p") return ChainKind::Dot11p;
  fail(ErrorCode::UnknownChainKind, fmt::format("'{}' is not one of cam, denm, queue, cv2x, dot11p", name));
}

std::string_view to_string(ChainKind kind) {
  switch (kind) {
    case ChainKind::Cam: return "cam";
    case ChainKind::Denm: return "denm";
    case ChainKind::Queue: return "queue";
    case ChainKind::Cv2x: return "cv2x";
    case ChainKind::Dot11p: return "dot11p";
  }
  return "?";
}

namespace {

// Periodic generator part shared by CAM and DENM. `repeat` scales the
// continuation out of (tx,0); the remainder goes to Idle (DENM only).
ChainBuilder generator_chain(int interval, double transmit, double repeat) {
  ChainBuilder b;
  for (int j = 0; j < interval; ++j) b.add_state(fmt::format("tx,{}", j));
  for (int j = 0; j < interval; ++j) b.add_state(fmt::format("txp,{}", j));
  auto tx = [](int j) { return j; };
  auto txp = [interval](int j) { return interval + j; };
  for (int j = 1; j < interval; ++j) {
    b.add(tx(j), tx(j - 1), 1.0);
    b.add(txp(j), tx(j - 1), transmit);
    b.add(txp(j), txp(j - 1), 1.0 - transmit);
  }
  b.add(tx(0), tx(interval - 1), repeat * transmit);
  b.add(tx(0), txp(interval - 1), repeat * (1.0 - transmit));
  b.add(txp(0), txp(interval - 1), 1.0);
  return b;
}

}  // namespace

TransitionMatrix build_cam_chain(int interval, double transmit) {
  if (interval < 2) fail(ErrorCode::InvalidParameter, "CAM interval < 2");
  return generator_chain(interval, transmit, 1.0).build();
}

TransitionMatrix build_denm_chain(int interval, int repetitions, double trigger_probability, double transmit) {
  if (interval < 2 || repetitions < 1) fail(ErrorCode::InvalidParameter, "DENM interval < 2 or K < 1");
  const double repeat = 1.0 - 1.0 / repetitions;
  ChainBuilder b = generator_chain(interval, transmit, repeat);
  const int idle = b.add_state("Idle");
  b.add(0, idle, 1.0 / repetitions);
  b.add(idle, idle, 1.0 - trigger_probability);
  b.add(idle, 0, trigger_probability);
  return std::move(b).build();
}

TransitionMatrix build_queue_chain(double growth, double first_arrival, double drain, int capacity) {
  if (capacity < 1) fail(ErrorCode::InvalidParameter, "queue capacity < 1");
  ChainBuilder b;
  for (int i = 0; i <= capacity; ++i) b.add_state(fmt::format("q,{}", i));
  b.add(0, 1, first_arrival);
  b.add(0, 0, 1.0 - first_arrival);
  for (int i = 1; i <= capacity; ++i) {
    const double up = i < capacity ? growth : 0.0;
    if (i < capacity) b.add(i, i + 1, growth);
    b.add(i, i - 1, drain);
    b.add(i, i, 1.0 - up - drain);
  }
  return std::move(b).build();
}

TransitionMatrix build_cv2x_chain(const Cv2xParams& params, double queue_nonempty, double arrival_when_empty) {
  const int gamma = params.selection_window;
  const int lo = params.rc_low, hi = params.rc_high;
  const double keep = params.keep_probability, sched = params.schedule_probability;

  ChainBuilder b;
  const int idle = b.add_state("Idle");
  for (int j = 0; j <= gamma - 2; ++j) b.add_state(fmt::format("w,{}", j));
  for (int i = 1; i <= hi; ++i) {
    for (int j = 0; j < gamma; ++j) b.add_state(fmt::format("rc,{},{}", i, j));
  }
  auto w = [](int j) { return 1 + j; };
  auto rc = [gamma](int i, int j) { return gamma + (i - 1) * gamma + j; };

  const double start = union_probability(arrival_when_empty, queue_nonempty) * sched;
  b.add(idle, idle, 1.0 - start);
  for (int j = 0; j <= gamma - 2; ++j) b.add(idle, w(j), start / (gamma - 1));
  for (int j = 1; j <= gamma - 2; ++j) b.add(w(j), w(j - 1), 1.0);
  for (int i = lo; i <= hi; ++i) b.add(w(0), rc(i, 0), 1.0 / (hi - lo + 1));
  for (int i = 1; i <= hi; ++i) {
    for (int j = 1; j < gamma; ++j) b.add(rc(i, j), rc(i, j - 1), 1.0);
    b.add(rc(i, 0), rc(i, gamma - 1), 1.0 - queue_nonempty);
    if (i > 1) b.add(rc(i, 0), rc(i - 1, gamma - 1), queue_nonempty);
  }
  b.add(rc(1, 0), w(gamma - 2), queue_nonempty * keep);
  for (int j = 0; j <= gamma - 2; ++j) b.add(rc(1, 0), w(j), queue_nonempty * (1.0 - keep) * sched / (gamma - 1));
  b.add(rc(1, 0), idle, queue_nonempty * (1.0 - keep) * (1.0 - sched));
  return std::move(b).build();
}

TransitionMatrix build_dot11p_chain(const Dot11pParams& params, double queue_empty, double arrival_when_empty,
                                    double channel_busy) {
  const int aifs = params.aifs_slots();
  const int tx_slots = params.tx_slots;
  const double theta = channel_busy;
  const auto stages = backoff_stages(params.min_contention_window);

  ChainBuilder b;
  b.add_state("Idle");
  for (int i = 1; i <= aifs; ++i) b.add_state(fmt::format("A,{}", i));
  for (int i = 1; i <= tx_slots; ++i) b.add_state(fmt::format("B,{}", i));
  for (int s : stages) {
    for (int j = 1; j <= tx_slots; ++j) b.add_state(fmt::format("D,{},{}", s, j));
  }
  for (int s : stages) {
    for (int j = 1; j < aifs; ++j) b.add_state(fmt::format("SA,{},{}", s, j));
  }
  for (int s : stages) b.add_state(fmt::format("I,{}", s));
  for (int i = 1; i <= tx_slots; ++i) b.add_state(fmt::format("Tx,{}", i));

  auto id = [&b](std::string_view pattern, auto... args) {
    return b.index(fmt::format(fmt::runtime(pattern), args...));
  };
  const double access = 1.0 - queue_empty * (1.0 - arrival_when_empty);
  b.add("Idle", "A,1", access);
  b.add("Idle", "Idle", 1.0 - access);

  for (int k = 1; k <= tx_slots; ++k) b.add(id("A,1"), id("B,{}", k), theta / tx_slots);
  for (int i = 1; i < aifs; ++i) {
    b.add(id("A,{}", i), id("A,{}", i + 1), 1.0 - theta);
    if (i > 1) b.add(id("A,{}", i), id("B,1"), theta);
  }
  b.add(id("A,{}", aifs), id("Tx,1"), 1.0 - theta);
  b.add(id("A,{}", aifs), id("B,1"), theta);

  for (int i = 1; i < tx_slots; ++i) b.add(id("B,{}", i), id("B,{}", i + 1), 1.0);
  const int contention = params.min_contention_window;
  for (int s : stages) {
    b.add(id("B,{}", tx_slots), id("SA,{},1", s), stage_selection_weight(s, contention));
    for (int j = 1; j < tx_slots; ++j) b.add(id("D,{},{}", s, j), id("D,{},{}", s, j + 1), 1.0);
    b.add(id("D,{},{}", s, tx_slots), id("SA,{},1", s), 1.0);
    for (int j = 1; j < aifs - 1; ++j) b.add(id("SA,{},{}", s, j), id("SA,{},{}", s, j + 1), 1.0);
    b.add(id("SA,{},{}", s, aifs - 1), id("I,{}", s), 1.0);
    b.add(id("I,{}", s), id("D,{},1", s), theta);
    const int next = s == 0 ? id("Tx,1") : id("I,{}", s == 2 ? 0 : s - 1);
    b.add(id("I,{}", s), next, 1.0 - theta);
  }
  for (int i = 1; i < tx_slots; ++i) b.add(id("Tx,{}", i), id("Tx,{}", i + 1), 1.0);
  b.add(id("Tx,{}", tx_slots), id("Idle"), 1.0);
  return std::move(b).build();
}

TransitionMatrix build_chain(ChainKind kind, const ScenarioConfig& params, const CouplingState& coupling) {
  validate(params);
  const auto& t = params.traffic;
  switch (kind) {
    case ChainKind::Cam: return build_cam_chain(t.cam_interval, coupling.transmit);
    case ChainKind::Denm:
      return build_denm_chain(t.denm_interval, t.denm_repetitions, t.trigger_probability(), coupling.transmit);
    case ChainKind::Queue: {
      const auto q = queue_transitions(t, coupling.transmit);
      return build_queue_chain(q.growth, q.first_arrival, q.drain, t.queue_capacity);
    }
    case ChainKind::Cv2x: {
      ScenarioConfig resolved = params;
      resolve_rc_bounds(resolved);
      return build_cv2x_chain(resolved.cv2x, coupling.queue_nonempty, coupling.arrival_when_empty);
    }
    case ChainKind::Dot11p:
      return build_dot11p_chain(params.dot11p, coupling.queue_empty, coupling.arrival_when_empty,
                                coupling.channel_busy);
  }
  fail(ErrorCode::UnknownChainKind, "unhandled chain kind");
}

}  // namespace v2xmac
