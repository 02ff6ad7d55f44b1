#pragma once

#include <vector>

#include "v2xmac/params.hpp"

namespace v2xmac {

/// Steady state of the Mode 4 semi-persistent scheduling chain.
struct Cv2xSolution {
  int selection_window = 0;  // Gamma
  int rc_high = 0;           // R_h
  double idle = 0.0;
  std::vector<double> waiting;  // (w, j), j = 0..Gamma-2
  std::vector<double> counter;  // (i, j) row-major, i = 1..R_h, j = 0..Gamma-1
  double tx_opportunity = 0.0;  // P_txo: mass of the (i, 0) states
  double transmit_probability = 0.0;

  double at(int rc, int slot) const { return counter[(rc - 1) * selection_window + slot]; }
  double total_mass() const;
  std::vector<double> flatten() const;  // chain_oracle enumeration order
};

/// Throws SaturatedQueue if P_qne <= 0 and InvalidMass if the assembled
/// vector misses normalization by more than 1e-8. Rc bounds are taken from
/// `params` as given (see resolve_rc_bounds).
Cv2xSolution solve_cv2x(const Cv2xParams& params, double queue_empty, double queue_nonempty,
                        double arrival_when_empty);

/// P_t = P_txo * P_qne.
double transmit_probability(const Cv2xSolution& sol, double queue_nonempty);

}  // namespace v2xmac
