#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dagn/autodiff.hpp"

namespace dagn {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> per_param;
  double max_rel_err = 0.0;
  double h = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Compares tape gradients of a scalar loss against central finite
// differences (f(theta+h) - f(theta-h)) / 2h, per parameter element.
// f must rebuild the loss from scratch on the tape it is handed and be
// deterministic; the checker evaluates it repeatedly with perturbed
// parameter values. Relative error uses denominator max(1, |a|, |n|) so
// near-zero gradients are judged absolutely.
GradCheckReport finite_diff_check(const std::function<Var(Tape&)>& f,
                                  const std::vector<Parameter*>& params, double h, double tol);

}  // namespace dagn
