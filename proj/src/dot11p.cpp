#include "v2xmac/dot11p.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

#include "v2xmac/error.hpp"

namespace v2xmac {

std::vector<int> backoff_stages(int min_contention_window) {
  std::vector<int> out{0};
  for (int s = 2; s < min_contention_window; ++s) out.push_back(s);
  return out;
}

double stage_selection_weight(int stage, int min_contention_window) {
  if (stage == 1 || stage < 0 || stage >= min_contention_window) return 0.0;
  return (stage == 0 ? 2.0 : 1.0) / min_contention_window;
}

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void check_theta(double theta) {
  if (theta >= 1.0) fail(ErrorCode::ChannelSaturated, fmt::format("theta = {} leaves no idle slot", theta));
  if (!(theta >= 0.0)) fail(ErrorCode::InvalidParameter, fmt::format("theta = {} is negative", theta));
}

}  // namespace

double Dot11pSolution::access_probability() const { return sensing.at(0) + aifs.back() + sum(transmit); }

double Dot11pSolution::total_mass() const {
  double m = idle + sum(aifs) + sum(busy) + sum(sensing) + sum(transmit);
  for (const auto& v : deferral) m += sum(v);
  for (const auto& v : backoff_aifs) m += sum(v);
  return m;
}

std::vector<double> Dot11pSolution::flatten() const {
  std::vector<double> out{idle};
  auto append = [&out](const std::vector<double>& v) { out.insert(out.end(), v.begin(), v.end()); };
  append(aifs);
  append(busy);
  for (const auto& v : deferral) append(v);
  for (const auto& v : backoff_aifs) append(v);
  append(sensing);
  append(transmit);
  return out;
}

Dot11pSolution solve_dot11p(const Dot11pParams& params, double queue_empty, double arrival_when_empty, double theta) {
  validate(params);
  check_theta(theta);
  const int aifs = params.aifs_slots();
  const int tx = params.tx_slots;
  const int cw = params.min_contention_window;
  const double c = cw;
  const double idle_run = std::pow(1.0 - theta, aifs);  // AIFS completed without interruption
  const double interrupted = 1.0 - idle_run;

  Dot11pSolution sol;
  sol.stages = backoff_stages(cw);
  sol.theta = theta;
  const double access = 1.0 - queue_empty * (1.0 - arrival_when_empty);

  // Unnormalized: pi_Idle = 1, then scale by the total.
  const double base = access;
  const double backoff = base * interrupted;
  sol.idle = 1.0;
  sol.aifs.resize(aifs);
  for (int i = 1; i <= aifs; ++i) sol.aifs[i - 1] = base * std::pow(1.0 - theta, i - 1);
  sol.busy.resize(tx);
  for (int i = 1; i <= tx; ++i) sol.busy[i - 1] = base * (1.0 - theta * (1.0 - double(i) / tx) - idle_run);
  for (int s : sol.stages) {
    const double remaining = (c - s) / (c * (1.0 - theta));
    const double restart = (s == 0 ? 2.0 - 2.0 * theta + c * theta : 1.0 + (c - s - 1.0) * theta) / (c * (1.0 - theta));
    sol.deferral.emplace_back(tx, backoff * remaining * theta);
    sol.backoff_aifs.emplace_back(aifs - 1, backoff * restart);
    sol.sensing.push_back(backoff * remaining);
  }
  sol.transmit.assign(tx, base);

  const double total = sol.total_mass();
  auto scale = [total](std::vector<double>& v) {
    for (double& x : v) x /= total;
  };
  sol.idle /= total;
  scale(sol.aifs);
  scale(sol.busy);
  for (auto& v : sol.deferral) scale(v);
  for (auto& v : sol.backoff_aifs) scale(v);
  scale(sol.sensing);
  scale(sol.transmit);
  sol.transmit_probability = sum(sol.transmit);
  return sol;
}

double update_theta(double transmit, int vehicles) {
  if (!(transmit >= 0.0 && transmit <= 1.0)) fail(ErrorCode::InvalidParameter, fmt::format("P_t = {}", transmit));
  if (vehicles < 1) fail(ErrorCode::InvalidParameter, fmt::format("N = {} < 1", vehicles));
  return -std::expm1((vehicles - 1) * std::log1p(-transmit));
}

std::vector<double> DelayTable::flatten() const {
  std::vector<double> out{0.0};
  auto append = [&out](const std::vector<double>& v) { out.insert(out.end(), v.begin(), v.end()); };
  append(aifs);
  append(busy);
  for (const auto& v : deferral) append(v);
  for (const auto& v : backoff_aifs) append(v);
  append(sensing);
  append(transmit);
  return out;
}

DelayTable state_delays(const Dot11pParams& params, double theta) {
  validate(params);
  check_theta(theta);
  const int aifs = params.aifs_slots();
  const int tx = params.tx_slots;
  const int cw = params.min_contention_window;
  const double w = aifs, v = tx, c = cw;

  DelayTable d;
  d.stages = backoff_stages(cw);
  auto sensing_delay = [&](int s) {
    if (s == 0) return (1.0 + v + theta * (w - 1.0)) / (1.0 - theta);
    return (s + v * (1.0 + theta * (s - 1.0)) + s * theta * (w - 1.0)) / (1.0 - theta);
  };
  double later_stages = 0.0;
  for (int s : d.stages) {
    const double di = sensing_delay(s);
    d.sensing.push_back(di);
    std::vector<double> sa(aifs - 1), def(tx);
    for (int j = 1; j < aifs; ++j) sa[j - 1] = (w - j) + di;
    for (int j = 1; j <= tx; ++j) def[j - 1] = (v - j + 1.0) + (w - 1.0) + di;
    d.backoff_aifs.push_back(std::move(sa));
    d.deferral.push_back(std::move(def));
    if (s != 0) later_stages += di;
  }

  d.busy.resize(tx);
  d.busy[tx - 1] = 1.0 + 2.0 / c * ((w - 1.0) + d.sensing[0]) + (c - 2.0) * (w - 1.0) / c + later_stages / c;
  for (int i = tx - 1; i >= 1; --i) d.busy[i - 1] = 1.0 + d.busy[i];

  d.transmit.resize(tx);
  for (int i = 1; i <= tx; ++i) d.transmit[i - 1] = v - i + 1.0;

  d.aifs.resize(aifs);
  d.aifs[aifs - 1] = 1.0 + (1.0 - theta) * v + theta * d.busy[0];
  for (int i = aifs - 1; i >= 2; --i) d.aifs[i - 1] = 1.0 + (1.0 - theta) * d.aifs[i] + theta * d.busy[0];
  if (aifs >= 2) d.aifs[0] = 1.0 + (1.0 - theta) * d.aifs[1] + theta / v * sum(d.busy);
  return d;
}

}  // namespace v2xmac
