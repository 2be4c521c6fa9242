#include "dagn/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace dagn {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.value().shape() != b.value().shape()) {
    raise(ErrorKind::Dimension, std::string(op) + ": shape mismatch " +
                                    shape_to_string(a.shape()) + " vs " +
                                    shape_to_string(b.shape()));
  }
}

void check_same_tape(const Var& a, const Var& b, const char* op) {
  if (a.tape() != b.tape()) {
    raise(ErrorKind::Argument, std::string(op) + ": operands from different tapes");
  }
}

}  // namespace

Parameter Parameter::uniform_init(std::string name, Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor value = Tensor::zeros(shape);
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < value.numel(); ++i) {
    value.at(i) = rng.uniform(-bound, bound);
  }
  return Parameter(std::move(name), std::move(value));
}

const Tensor& Var::value() const {
  return tape_->value_of(id_);
}

Var Tape::emplace(Tensor value, BackpropFn backprop) {
  nodes_.push_back(Node{std::move(value), {}, std::move(backprop), nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  return emplace(std::move(value), nullptr);
}

Var Tape::leaf(Parameter& param) {
  auto it = param_nodes_.find(&param);
  if (it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  Var v = emplace(param.value, nullptr);
  nodes_[v.id()].param = &param;
  param_nodes_.emplace(&param, v.id());
  return v;
}

std::vector<double>& Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) {
    node.grad.assign(node.value.numel(), 0.0);
  }
  return node.grad;
}

void Tape::backward(const Var& loss) {
  if (consumed_) {
    raise(ErrorKind::State, "backward: tape already consumed; rebuild the forward pass");
  }
  if (loss.tape() != this) {
    raise(ErrorKind::Argument, "backward: loss recorded on a different tape");
  }
  if (loss.value().numel() != 1) {
    raise(ErrorKind::Argument,
          "backward: loss must be scalar, got shape " + shape_to_string(loss.shape()));
  }
  consumed_ = true;
  grad_buffer(loss.id())[0] = 1.0;

  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty() || !node.backprop) continue;
    node.backprop(*this, i);
  }

  for (auto& [param, id] : param_nodes_) {
    Node& node = nodes_[id];
    if (node.grad.empty()) continue;
    Parameter* p = node.param;
    for (std::size_t i = 0; i < node.grad.size(); ++i) {
      p->grad.at(i) += node.grad[i];
    }
  }
}

// --- ops --------------------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  check_same_tape(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    raise(ErrorKind::Dimension, "matmul: incompatible shapes " + shape_to_string(av.shape()) +
                                    " and " + shape_to_string(bv.shape()));
  }
  std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double aij = av.at(i, j);
      if (aij == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        out.at(i, c) += aij * bv.at(j, c);
      }
    }
  }
  std::size_t aid = a.id(), bid = b.id();
  return a.tape()->emplace(std::move(out), [aid, bid, m, k, n](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    const Tensor& av2 = t.value_of(aid);
    const Tensor& bv2 = t.value_of(bid);
    std::vector<double>& ga = t.grad_buffer(aid);
    std::vector<double>& gb = t.grad_buffer(bid);
    // dA = dC * B^T
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < n; ++c) {
        double gic = g[i * n + c];
        if (gic == 0.0) continue;
        for (std::size_t j = 0; j < k; ++j) {
          ga[i * k + j] += gic * bv2.at(j, c);
        }
      }
    }
    // dB = A^T * dC
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        double aij = av2.at(i, j);
        if (aij == 0.0) continue;
        for (std::size_t c = 0; c < n; ++c) {
          gb[j * n + c] += aij * g[i * n + c];
        }
      }
    }
  });
}

Var add(const Var& a, const Var& b) {
  check_same_tape(a, b, "add");
  check_same_shape(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out.at(i) += b.value().at(i);
  std::size_t aid = a.id(), bid = b.id();
  return a.tape()->emplace(std::move(out), [aid, bid](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::vector<double>& ga = t.grad_buffer(aid);
    std::vector<double>& gb = t.grad_buffer(bid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_tape(a, b, "sub");
  check_same_shape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out.at(i) -= b.value().at(i);
  std::size_t aid = a.id(), bid = b.id();
  return a.tape()->emplace(std::move(out), [aid, bid](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::vector<double>& ga = t.grad_buffer(aid);
    std::vector<double>& gb = t.grad_buffer(bid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_tape(a, b, "mul");
  check_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out.at(i) *= b.value().at(i);
  std::size_t aid = a.id(), bid = b.id();
  return a.tape()->emplace(std::move(out), [aid, bid](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    const Tensor& av = t.value_of(aid);
    const Tensor& bv = t.value_of(bid);
    std::vector<double>& ga = t.grad_buffer(aid);
    std::vector<double>& gb = t.grad_buffer(bid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * bv.at(i);
      gb[i] += g[i] * av.at(i);
    }
  });
}

Var scale(const Var& x, double c) {
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out.at(i) *= c;
  std::size_t xid = x.id();
  return x.tape()->emplace(std::move(out), [xid, c](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::vector<double>& gx = t.grad_buffer(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += c * g[i];
  });
}

Var add_row_broadcast(const Var& m, const Var& r) {
  check_same_tape(m, r, "add_row_broadcast");
  const Tensor& mv = m.value();
  const Tensor& rv = r.value();
  if (mv.rank() != 2 || rv.rank() != 1 || rv.shape()[0] != mv.cols()) {
    raise(ErrorKind::Dimension, "add_row_broadcast: shapes " + shape_to_string(mv.shape()) +
                                    " and " + shape_to_string(rv.shape()));
  }
  std::size_t rows_n = mv.rows(), cols_n = mv.cols();
  Tensor out = mv;
  for (std::size_t i = 0; i < rows_n; ++i) {
    for (std::size_t j = 0; j < cols_n; ++j) out.at(i, j) += rv.at(j);
  }
  std::size_t mid = m.id(), rid = r.id();
  return m.tape()->emplace(std::move(out), [mid, rid, rows_n, cols_n](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::vector<double>& gm = t.grad_buffer(mid);
    std::vector<double>& gr = t.grad_buffer(rid);
    for (std::size_t i = 0; i < rows_n; ++i) {
      for (std::size_t j = 0; j < cols_n; ++j) {
        gm[i * cols_n + j] += g[i * cols_n + j];
        gr[j] += g[i * cols_n + j];
      }
    }
  });
}

Var activation(const Var& x, Activation kind) {
  const Tensor& xv = x.value();
  Tensor out = xv;
  switch (kind) {
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < out.numel(); ++i) out.at(i) = stable_sigmoid(xv.at(i));
      break;
    case Activation::Relu:
      for (std::size_t i = 0; i < out.numel(); ++i) out.at(i) = xv.at(i) > 0.0 ? xv.at(i) : 0.0;
      break;
    case Activation::Gelu:
      // exact Gaussian-CDF form, x * Phi(x)
      for (std::size_t i = 0; i < out.numel(); ++i) {
        double v = xv.at(i);
        out.at(i) = v * 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      }
      break;
  }
  std::size_t xid = x.id();
  return x.tape()->emplace(std::move(out), [xid, kind](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    const Tensor& xv2 = t.value_of(xid);
    const Tensor& yv = t.value_of(self);
    std::vector<double>& gx = t.grad_buffer(xid);
    switch (kind) {
      case Activation::Sigmoid:
        for (std::size_t i = 0; i < g.size(); ++i) {
          double y = yv.at(i);
          gx[i] += g[i] * y * (1.0 - y);
        }
        break;
      case Activation::Relu:
        // derivative at exactly 0 is defined as 0
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (xv2.at(i) > 0.0) gx[i] += g[i];
        }
        break;
      case Activation::Gelu:
        for (std::size_t i = 0; i < g.size(); ++i) {
          double v = xv2.at(i);
          double phi = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
          double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
          gx[i] += g[i] * (phi + v * pdf);
        }
        break;
    }
  });
}

Var tanh_act(const Var& x) {
  const Tensor& xv = x.value();
  Tensor out = xv;
  for (std::size_t i = 0; i < out.numel(); ++i) out.at(i) = std::tanh(xv.at(i));
  std::size_t xid = x.id();
  return x.tape()->emplace(std::move(out), [xid](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    const Tensor& yv = t.value_of(self);
    std::vector<double>& gx = t.grad_buffer(xid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double y = yv.at(i);
      gx[i] += g[i] * (1.0 - y * y);
    }
  });
}

Var softmax(const Var& x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 1) {
    raise(ErrorKind::Argument, "softmax: expected rank-1 input, got " + shape_to_string(xv.shape()));
  }
  std::size_t n = xv.numel();
  double mx = xv.at(0);
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, xv.at(i));
  Tensor out = Tensor::zeros({n});
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.at(i) = std::exp(xv.at(i) - mx);
    denom += out.at(i);
  }
  for (std::size_t i = 0; i < n; ++i) out.at(i) /= denom;
  std::size_t xid = x.id();
  return x.tape()->emplace(std::move(out), [xid, n](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    const Tensor& yv = t.value_of(self);
    std::vector<double>& gx = t.grad_buffer(xid);
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += g[i] * yv.at(i);
    for (std::size_t i = 0; i < n; ++i) gx[i] += yv.at(i) * (g[i] - dot);
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  check_same_tape(x, gain, "layer_norm");
  check_same_tape(x, bias, "layer_norm");
  if (eps <= 0.0) raise(ErrorKind::Argument, "layer_norm: eps must be positive");
  const Tensor& xv = x.value();
  if (xv.rank() != 1 && xv.rank() != 2) {
    raise(ErrorKind::Dimension, "layer_norm: expected rank 1 or 2, got " + shape_to_string(xv.shape()));
  }
  std::size_t d = xv.rank() == 2 ? xv.cols() : xv.numel();
  std::size_t nrows = xv.rank() == 2 ? xv.rows() : 1;
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  if (gv.numel() != d || bv.numel() != d) {
    raise(ErrorKind::Dimension, "layer_norm: gain/bias length must match last axis " + std::to_string(d));
  }
  Tensor out = xv;
  for (std::size_t r = 0; r < nrows; ++r) {
    const double* xp = xv.data().data() + r * d;
    double* op = out.data().data() + r * d;
    double mean = 0.0;
    for (std::size_t i = 0; i < d; ++i) mean += xp[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double c = xp[i] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    double inv_std = 1.0 / std::sqrt(var + eps);
    for (std::size_t i = 0; i < d; ++i) {
      op[i] = (xp[i] - mean) * inv_std * gv.at(i) + bv.at(i);
    }
  }
  std::size_t xid = x.id(), gid = gain.id(), bid = bias.id();
  return x.tape()->emplace(std::move(out), [xid, gid, bid, d, nrows, eps](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    const Tensor& xv2 = t.value_of(xid);
    const Tensor& gv2 = t.value_of(gid);
    std::vector<double>& gx = t.grad_buffer(xid);
    std::vector<double>& gg = t.grad_buffer(gid);
    std::vector<double>& gb = t.grad_buffer(bid);
    std::vector<double> xhat(d);
    for (std::size_t r = 0; r < nrows; ++r) {
      const double* xp = xv2.data().data() + r * d;
      const double* gp = g.data() + r * d;
      double mean = 0.0;
      for (std::size_t i = 0; i < d; ++i) mean += xp[i];
      mean /= static_cast<double>(d);
      double var = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double c = xp[i] - mean;
        var += c * c;
      }
      var /= static_cast<double>(d);
      double inv_std = 1.0 / std::sqrt(var + eps);
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        xhat[i] = (xp[i] - mean) * inv_std;
        double dxhat = gp[i] * gv2.at(i);
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat[i];
        gg[i] += gp[i] * xhat[i];
        gb[i] += gp[i];
      }
      double inv_d = 1.0 / static_cast<double>(d);
      for (std::size_t i = 0; i < d; ++i) {
        double dxhat = gp[i] * gv2.at(i);
        gx[r * d + i] += inv_std * (dxhat - inv_d * sum_dxhat - xhat[i] * inv_d * sum_dxhat_xhat);
      }
    }
  });
}

Var cross_entropy(const Var& scores, std::size_t gold) {
  const Tensor& sv = scores.value();
  if (sv.rank() != 1) {
    raise(ErrorKind::Argument, "cross_entropy: expected rank-1 scores");
  }
  std::size_t n = sv.numel();
  if (gold >= n) {
    raise(ErrorKind::Argument, "cross_entropy: gold index " + std::to_string(gold) +
                                   " out of range for " + std::to_string(n) + " scores");
  }
  double mx = sv.at(0);
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, sv.at(i));
  double lse = 0.0;
  for (std::size_t i = 0; i < n; ++i) lse += std::exp(sv.at(i) - mx);
  lse = mx + std::log(lse);
  Tensor out = Tensor::scalar(lse - sv.at(gold));
  std::size_t sid = scores.id();
  return scores.tape()->emplace(std::move(out), [sid, gold, n](Tape& t, std::size_t self) {
    double g = t.grad_buffer(self)[0];
    const Tensor& sv2 = t.value_of(sid);
    std::vector<double>& gs = t.grad_buffer(sid);
    double mx2 = sv2.at(0);
    for (std::size_t i = 1; i < n; ++i) mx2 = std::max(mx2, sv2.at(i));
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) denom += std::exp(sv2.at(i) - mx2);
    for (std::size_t i = 0; i < n; ++i) {
      double p = std::exp(sv2.at(i) - mx2) / denom;
      gs[i] += g * (p - (i == gold ? 1.0 : 0.0));
    }
  });
}

Var sum(const Var& x) {
  const Tensor& xv = x.value();
  double s = 0.0;
  for (std::size_t i = 0; i < xv.numel(); ++i) s += xv.at(i);
  std::size_t xid = x.id();
  return x.tape()->emplace(Tensor::scalar(s), [xid](Tape& t, std::size_t self) {
    double g = t.grad_buffer(self)[0];
    std::vector<double>& gx = t.grad_buffer(xid);
    for (double& v : gx) v += g;
  });
}

Var reshape(const Var& x, Shape shape) {
  const Tensor& xv = x.value();
  // Tensor::from rejects a shape whose numel disagrees with the data length.
  Tensor out = Tensor::from(std::move(shape), std::vector<double>(xv.data().begin(), xv.data().end()));
  std::size_t xid = x.id();
  return x.tape()->emplace(std::move(out), [xid](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::vector<double>& gx = t.grad_buffer(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var row(const Var& m, std::size_t r) {
  const Tensor& mv = m.value();
  if (mv.rank() != 2 || r >= mv.rows()) {
    raise(ErrorKind::Dimension, "row: index " + std::to_string(r) + " out of range for " +
                                    shape_to_string(mv.shape()));
  }
  std::size_t c = mv.cols();
  std::vector<double> data(mv.data().begin() + r * c, mv.data().begin() + (r + 1) * c);
  std::size_t mid = m.id();
  return m.tape()->emplace(Tensor::from({1, c}, std::move(data)),
                           [mid, r, c](Tape& t, std::size_t self) {
                             const std::vector<double>& g = t.grad_buffer(self);
                             std::vector<double>& gm = t.grad_buffer(mid);
                             for (std::size_t j = 0; j < c; ++j) gm[r * c + j] += g[j];
                           });
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) raise(ErrorKind::Argument, "stack_rows: no rows");
  std::size_t c = rows[0].value().numel();
  Tensor out = Tensor::zeros({rows.size(), c});
  std::vector<std::size_t> ids;
  ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& rv = rows[i].value();
    if (rv.numel() != c) raise(ErrorKind::Dimension, "stack_rows: ragged rows");
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) = rv.at(j);
    ids.push_back(rows[i].id());
  }
  return rows[0].tape()->emplace(std::move(out), [ids, c](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::vector<double>& gr = t.grad_buffer(ids[i]);
      for (std::size_t j = 0; j < c; ++j) gr[j] += g[i * c + j];
    }
  });
}

Var hconcat(const Var& a, const Var& b) {
  check_same_tape(a, b, "hconcat");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.rows() != bv.rows()) {
    raise(ErrorKind::Dimension, "hconcat: shapes " + shape_to_string(av.shape()) + " and " +
                                    shape_to_string(bv.shape()));
  }
  std::size_t m = av.rows(), ca = av.cols(), cb = bv.cols();
  Tensor out = Tensor::zeros({m, ca + cb});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < ca; ++j) out.at(i, j) = av.at(i, j);
    for (std::size_t j = 0; j < cb; ++j) out.at(i, ca + j) = bv.at(i, j);
  }
  std::size_t aid = a.id(), bid = b.id();
  return a.tape()->emplace(std::move(out), [aid, bid, m, ca, cb](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::vector<double>& ga = t.grad_buffer(aid);
    std::vector<double>& gb = t.grad_buffer(bid);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < ca; ++j) ga[i * ca + j] += g[i * (ca + cb) + j];
      for (std::size_t j = 0; j < cb; ++j) gb[i * cb + j] += g[i * (ca + cb) + ca + j];
    }
  });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) raise(ErrorKind::Argument, "concat: no parts");
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().rank() != 1) raise(ErrorKind::Dimension, "concat: expected rank-1 parts");
    total += p.value().numel();
  }
  Tensor out = Tensor::zeros({total});
  std::vector<std::size_t> ids;
  std::vector<std::size_t> sizes;
  std::size_t off = 0;
  for (const Var& p : parts) {
    for (std::size_t i = 0; i < p.value().numel(); ++i) out.at(off + i) = p.value().at(i);
    ids.push_back(p.id());
    sizes.push_back(p.value().numel());
    off += p.value().numel();
  }
  return parts[0].tape()->emplace(std::move(out), [ids, sizes](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::size_t off2 = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      std::vector<double>& gp = t.grad_buffer(ids[k]);
      for (std::size_t i = 0; i < sizes[k]; ++i) gp[i] += g[off2 + i];
      off2 += sizes[k];
    }
  });
}

Var gather_rows(const Var& table, const std::vector<std::size_t>& ids) {
  const Tensor& tv = table.value();
  if (tv.rank() != 2) raise(ErrorKind::Dimension, "gather_rows: table must be rank 2");
  if (ids.empty()) raise(ErrorKind::Argument, "gather_rows: empty id list");
  std::size_t c = tv.cols();
  for (std::size_t id : ids) {
    if (id >= tv.rows()) {
      raise(ErrorKind::Argument, "gather_rows: row " + std::to_string(id) + " out of range " +
                                     shape_to_string(tv.shape()));
    }
  }
  Tensor out = Tensor::zeros({ids.size(), c});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) = tv.at(ids[i], j);
  }
  std::size_t tid = table.id();
  return table.tape()->emplace(std::move(out), [tid, ids, c](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::vector<double>& gt = t.grad_buffer(tid);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = 0; j < c; ++j) gt[ids[i] * c + j] += g[i * c + j];
    }
  });
}

Var span_sum(const Var& tokens, const std::vector<std::vector<std::size_t>>& spans) {
  const Tensor& tv = tokens.value();
  if (tv.rank() != 2) raise(ErrorKind::Dimension, "span_sum: tokens must be rank 2");
  if (spans.empty()) raise(ErrorKind::Segment, "span_sum: no spans");
  std::size_t c = tv.cols();
  Tensor out = Tensor::zeros({spans.size(), c});
  for (std::size_t n = 0; n < spans.size(); ++n) {
    if (spans[n].empty()) {
      raise(ErrorKind::Segment, "span_sum: empty span " + std::to_string(n) +
                                    "; empty spans must be dropped upstream");
    }
    for (std::size_t l : spans[n]) {
      if (l >= tv.rows()) raise(ErrorKind::Segment, "span_sum: position out of range");
      for (std::size_t j = 0; j < c; ++j) out.at(n, j) += tv.at(l, j);
    }
  }
  std::size_t tid = tokens.id();
  return tokens.tape()->emplace(std::move(out), [tid, spans, c](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::vector<double>& gt = t.grad_buffer(tid);
    for (std::size_t n = 0; n < spans.size(); ++n) {
      for (std::size_t l : spans[n]) {
        for (std::size_t j = 0; j < c; ++j) gt[l * c + j] += g[n * c + j];
      }
    }
  });
}

Var span_add(const Var& tokens, const Var& states,
             const std::vector<std::vector<std::size_t>>& spans) {
  check_same_tape(tokens, states, "span_add");
  const Tensor& tv = tokens.value();
  const Tensor& sv = states.value();
  if (tv.rank() != 2 || sv.rank() != 2 || tv.cols() != sv.cols()) {
    raise(ErrorKind::Dimension, "span_add: shapes " + shape_to_string(tv.shape()) + " and " +
                                    shape_to_string(sv.shape()));
  }
  if (spans.size() != sv.rows()) {
    raise(ErrorKind::Segment, "span_add: span count must equal state rows");
  }
  std::size_t c = tv.cols();
  Tensor out = tv;
  for (std::size_t n = 0; n < spans.size(); ++n) {
    for (std::size_t l : spans[n]) {
      if (l >= tv.rows()) raise(ErrorKind::Segment, "span_add: position out of range");
      for (std::size_t j = 0; j < c; ++j) out.at(l, j) += sv.at(n, j);
    }
  }
  std::size_t tid = tokens.id(), sid = states.id();
  return tokens.tape()->emplace(std::move(out), [tid, sid, spans, c](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    std::vector<double>& gt = t.grad_buffer(tid);
    std::vector<double>& gs = t.grad_buffer(sid);
    for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
    for (std::size_t n = 0; n < spans.size(); ++n) {
      for (std::size_t l : spans[n]) {
        for (std::size_t j = 0; j < c; ++j) gs[n * c + j] += g[l * c + j];
      }
    }
  });
}

Var scale_rows(const Var& m, const Var& s) {
  check_same_tape(m, s, "scale_rows");
  const Tensor& mv = m.value();
  const Tensor& sv = s.value();
  if (mv.rank() != 2 || sv.rank() != 1 || sv.numel() != mv.rows()) {
    raise(ErrorKind::Dimension, "scale_rows: shapes " + shape_to_string(mv.shape()) + " and " +
                                    shape_to_string(sv.shape()));
  }
  std::size_t rows_n = mv.rows(), cols_n = mv.cols();
  Tensor out = mv;
  for (std::size_t i = 0; i < rows_n; ++i) {
    for (std::size_t j = 0; j < cols_n; ++j) out.at(i, j) *= sv.at(i);
  }
  std::size_t mid = m.id(), sid = s.id();
  return m.tape()->emplace(std::move(out), [mid, sid, rows_n, cols_n](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad_buffer(self);
    const Tensor& mv2 = t.value_of(mid);
    const Tensor& sv2 = t.value_of(sid);
    std::vector<double>& gm = t.grad_buffer(mid);
    std::vector<double>& gs = t.grad_buffer(sid);
    for (std::size_t i = 0; i < rows_n; ++i) {
      for (std::size_t j = 0; j < cols_n; ++j) {
        gm[i * cols_n + j] += g[i * cols_n + j] * sv2.at(i);
        gs[i] += g[i * cols_n + j] * mv2.at(i, j);
      }
    }
  });
}

}  // namespace dagn
