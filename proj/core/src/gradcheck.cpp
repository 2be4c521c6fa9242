#include "dagn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace dagn {

namespace {

double eval_value(const std::function<Var(Tape&)>& f) {
  Tape tape;
  Var loss = f(tape);
  if (loss.value().numel() != 1) {
    raise(ErrorKind::Argument, "finite_diff_check: f must produce a scalar loss");
  }
  return loss.value().at(0);
}

}  // namespace

GradCheckReport finite_diff_check(const std::function<Var(Tape&)>& f,
                                  const std::vector<Parameter*>& params, double h, double tol) {
  if (!(h > 0.0 && h <= 1e-2)) {
    raise(ErrorKind::Argument, "finite_diff_check: h must lie in (0, 1e-2]");
  }

  double v0 = eval_value(f);
  double v1 = eval_value(f);
  if (v0 != v1) {
    raise(ErrorKind::Oracle, "finite_diff_check: f is not deterministic (repeated evaluation mismatch)");
  }

  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }

  GradCheckReport report;
  report.h = h;
  report.tol = tol;
  for (Parameter* p : params) {
    GradCheckEntry entry;
    entry.name = p->name;
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      double orig = p->value.at(i);
      p->value.at(i) = orig + h;
      double up = eval_value(f);
      p->value.at(i) = orig - h;
      double down = eval_value(f);
      p->value.at(i) = orig;
      double numeric = (up - down) / (2.0 * h);
      double analytic = p->grad.at(i);
      double rel = std::abs(analytic - numeric) /
                   std::max({1.0, std::abs(analytic), std::abs(numeric)});
      if (rel >= entry.max_rel_err) {
        entry.max_rel_err = rel;
        entry.worst_index = i;
        entry.analytic = analytic;
        entry.numeric = numeric;
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.per_param.push_back(std::move(entry));
  }
  report.pass = report.max_rel_err <= tol;
  return report;
}

}  // namespace dagn
