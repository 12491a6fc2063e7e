#pragma once

#include <vector>

#include "phprior/signed_log.hpp"

namespace phprior {

// Coefficients of an explicit partial-fraction formula together with the
// normalizer assembled from them. `gamma` and `beta` are the two coefficient
// families of the formula (their meaning is documented by each producer).
struct ClosedForm {
  std::vector<SignedLogReal> gamma;
  std::vector<SignedLogReal> beta;
  double log_norm = 0.0;
  double cancellation = 0.0;
  Precision precision_used;
  // Normalizer replaced by quadrature after Extended precision also failed.
  bool numeric_fallback = false;

  double norm() const;
};

}  // namespace phprior
