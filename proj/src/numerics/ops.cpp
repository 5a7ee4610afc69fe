#include "gqn/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gqn/error.hpp"
#include "gqn/numerics/canonical_sum.hpp"

namespace gqn::numerics {

using detail::make_result;
using detail::Node;

namespace {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " +
                     shape_str(a.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

// Stable softmax of `n` scores read through `at`, written to `out`.
template <typename At>
void softmax_into(std::size_t n, At at, double* out, std::vector<double>& scratch) {
  double peak = at(0);
  for (std::size_t i = 1; i < n; ++i) peak = std::max(peak, at(i));
  scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(at(i) - peak);
    scratch[i] = out[i];
  }
  const double z = canonical_sum(std::span<double>(scratch.data(), n));
  for (std::size_t i = 0; i < n; ++i) out[i] /= z;
}

void check_finite(std::span<const double> values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InvalidInput(std::string(op) + ": non-finite score");
    }
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      Node& in = parent(self, p);
      if (!in.requires_grad) continue;
      for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& lhs = parent(self, 0);
    Node& rhs = parent(self, 1);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (lhs.requires_grad) lhs.grad[i] += self.grad[i];
      if (rhs.requires_grad) rhs.grad[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& lhs = parent(self, 0);
    Node& rhs = parent(self, 1);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (lhs.requires_grad) lhs.grad[i] += self.grad[i] * rhs.value[i];
      if (rhs.requires_grad) rhs.grad[i] += self.grad[i] * lhs.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return make_result(a.shape(), std::move(out), {a}, [factor](Node& self) {
    Node& in = parent(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      in.grad[i] += self.grad[i] * factor;
    }
  });
}

Tensor matmul(const Tensor& a, const Tensor& b, SumOrder order) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul: inner dimensions " + shape_str(a.shape()) +
                     " * " + shape_str(b.shape()));
  }
  std::vector<double> out(n * m, 0.0);
  auto av = a.values();
  auto bv = b.values();
  if (order == SumOrder::index) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = av[i * k + p];
        for (std::size_t j = 0; j < m; ++j) out[i * m + j] += aip * bv[p * m + j];
      }
    }
  } else {
    std::vector<double> terms(k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t p = 0; p < k; ++p) terms[p] = av[i * k + p] * bv[p * m + j];
        out[i * m + j] = canonical_sum(std::span<double>(terms));
      }
    }
  }
  return make_result({n, m}, std::move(out), {a, b}, [n, k, m](Node& self) {
    Node& lhs = parent(self, 0);
    Node& rhs = parent(self, 1);
    const auto& g = self.grad;
    if (lhs.requires_grad) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += g[i * m + j] * rhs.value[p * m + j];
          lhs.grad[i * k + p] += acc;
        }
    }
    if (rhs.requires_grad) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = lhs.value[i * k + p];
          for (std::size_t j = 0; j < m; ++j) rhs.grad[p * m + j] += aip * g[i * m + j];
        }
    }
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  if (b.cols() != k) {
    throw ShapeError("matmul_nt: inner dimensions " + shape_str(a.shape()) +
                     " * " + shape_str(b.shape()) + "^T");
  }
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      out[i * m + j] = acc;
    }
  return make_result({n, m}, std::move(out), {a, b}, [n, k, m](Node& self) {
    Node& lhs = parent(self, 0);
    Node& rhs = parent(self, 1);
    const auto& g = self.grad;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double gij = g[i * m + j];
        for (std::size_t p = 0; p < k; ++p) {
          if (lhs.requires_grad) lhs.grad[i * k + p] += gij * rhs.value[j * k + p];
          if (rhs.requires_grad) rhs.grad[j * k + p] += gij * lhs.value[i * k + p];
        }
      }
  });
}

Tensor matvec(const Tensor& a, const Tensor& v) {
  require_matrix(a, "matvec");
  const std::size_t n = a.rows(), k = a.cols();
  if (v.rank() != 1 || v.numel() != k) {
    throw ShapeError("matvec: " + shape_str(a.shape()) + " * " +
                     shape_str(v.shape()));
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * v[p];
    out[i] = acc;
  }
  return make_result({n}, std::move(out), {a, v}, [n, k](Node& self) {
    Node& mat = parent(self, 0);
    Node& vec = parent(self, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = self.grad[i];
      for (std::size_t p = 0; p < k; ++p) {
        if (mat.requires_grad) mat.grad[i * k + p] += gi * vec.value[p];
        if (vec.requires_grad) vec.grad[p] += gi * mat.value[i * k + p];
      }
    }
  });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_matrix(a, "add_bias");
  const std::size_t n = a.rows(), m = a.cols();
  if (bias.numel() != m) throw ShapeError("add_bias: bias width mismatch");
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += bias[j];
  return make_result(a.shape(), std::move(out), {a, bias}, [n, m](Node& self) {
    Node& in = parent(self, 0);
    Node& b = parent(self, 1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double g = self.grad[i * m + j];
        if (in.requires_grad) in.grad[i * m + j] += g;
        if (b.requires_grad) b.grad[j] += g;
      }
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
  return make_result(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& in = parent(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (in.value[i] > 0.0) in.grad[i] += self.grad[i];
    }
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
  const std::size_t n = parts.front().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    require_matrix(p, "concat_cols");
    if (p.rows() != n) throw ShapeError("concat_cols: row count mismatch");
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(n * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t w = widths[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) out[i * total + offset + j] = parts[k][i * w + j];
    offset += w;
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return make_result({n, total}, std::move(out), std::move(parents),
                     [n, total, widths](Node& self) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         Node& in = parent(self, k);
                         const std::size_t w = widths[k];
                         if (in.requires_grad) {
                           for (std::size_t i = 0; i < n; ++i)
                             for (std::size_t j = 0; j < w; ++j)
                               in.grad[i * w + j] += self.grad[i * total + offset + j];
                         }
                         offset += w;
                       }
                     });
}

Tensor concat_cols(std::initializer_list<Tensor> parts) {
  return concat_cols(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor concat_rows(std::initializer_list<Tensor> parts) {
  return concat_rows(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: nothing to concatenate");
  const std::size_t m = parts.front().cols();
  std::vector<double> out;
  std::vector<std::size_t> sizes;
  for (const Tensor& p : parts) {
    require_matrix(p, "concat_rows");
    if (p.cols() != m) throw ShapeError("concat_rows: width mismatch");
    out.insert(out.end(), p.values().begin(), p.values().end());
    sizes.push_back(p.numel());
  }
  const std::size_t n = out.size() / m;
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return make_result({n, m}, std::move(out), std::move(parents), [sizes](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      Node& in = parent(self, k);
      if (in.requires_grad) {
        for (std::size_t i = 0; i < sizes[k]; ++i) in.grad[i] += self.grad[offset + i];
      }
      offset += sizes[k];
    }
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index) {
  if (index.empty()) throw ShapeError("gather_rows: empty index list");
  const bool is_vector = a.rank() == 1;
  if (!is_vector) require_matrix(a, "gather_rows");
  const std::size_t n = is_vector ? a.numel() : a.rows();
  const std::size_t m = is_vector ? 1 : a.cols();
  std::vector<double> out(index.size() * m);
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= n) throw ShapeError("gather_rows: index out of range");
    for (std::size_t j = 0; j < m; ++j) out[r * m + j] = a[index[r] * m + j];
  }
  Shape shape = is_vector ? Shape{index.size()} : Shape{index.size(), m};
  std::vector<std::size_t> idx(index.begin(), index.end());
  return make_result(std::move(shape), std::move(out), {a},
                     [idx = std::move(idx), m](Node& self) {
                       Node& in = parent(self, 0);
                       for (std::size_t r = 0; r < idx.size(); ++r)
                         for (std::size_t j = 0; j < m; ++j)
                           in.grad[idx[r] * m + j] += self.grad[r * m + j];
                     });
}

Tensor row(const Tensor& a, std::size_t r) {
  require_matrix(a, "row");
  const std::size_t m = a.cols();
  if (r >= a.rows()) throw ShapeError("row: index out of range");
  std::vector<double> out(a.values().begin() + r * m,
                          a.values().begin() + (r + 1) * m);
  return make_result({m}, std::move(out), {a}, [r, m](Node& self) {
    Node& in = parent(self, 0);
    for (std::size_t j = 0; j < m; ++j) in.grad[r * m + j] += self.grad[j];
  });
}

Tensor column(const Tensor& a, std::size_t c) {
  require_matrix(a, "column");
  const std::size_t n = a.rows(), m = a.cols();
  if (c >= m) throw ShapeError("column: index out of range");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i * m + c];
  return make_result({n}, std::move(out), {a}, [c, n, m](Node& self) {
    Node& in = parent(self, 0);
    for (std::size_t i = 0; i < n; ++i) in.grad[i * m + c] += self.grad[i];
  });
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no rows");
  const std::size_t m = rows.front().numel();
  std::vector<double> out;
  out.reserve(rows.size() * m);
  for (const Tensor& r : rows) {
    if (r.rank() != 1 || r.numel() != m) throw ShapeError("stack_rows: width mismatch");
    out.insert(out.end(), r.values().begin(), r.values().end());
  }
  std::vector<Tensor> parents(rows.begin(), rows.end());
  const std::size_t n = rows.size();
  return make_result({n, m}, std::move(out), std::move(parents), [n, m](Node& self) {
    for (std::size_t i = 0; i < n; ++i) {
      Node& in = parent(self, i);
      if (!in.requires_grad) continue;
      for (std::size_t j = 0; j < m; ++j) in.grad[j] += self.grad[i * m + j];
    }
  });
}

Tensor broadcast_rows(const Tensor& v, std::size_t n) {
  if (v.rank() != 1) throw ShapeError("broadcast_rows: expected a vector");
  if (n == 0) throw ShapeError("broadcast_rows: zero rows");
  const std::size_t m = v.numel();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = v[j];
  return make_result({n, m}, std::move(out), {v}, [n, m](Node& self) {
    Node& in = parent(self, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) in.grad[j] += self.grad[i * m + j];
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) throw ShapeError("reshape: element count changes");
  std::vector<double> out(a.values().begin(), a.values().end());
  return make_result(std::move(shape), std::move(out), {a}, [](Node& self) {
    Node& in = parent(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
  });
}

Tensor scale_rows(const Tensor& a, const Tensor& w) {
  require_matrix(a, "scale_rows");
  const std::size_t n = a.rows(), m = a.cols();
  if (w.numel() != n) throw ShapeError("scale_rows: weight count mismatch");
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = a[i * m + j] * w[i];
  return make_result({n, m}, std::move(out), {a, w}, [n, m](Node& self) {
    Node& in = parent(self, 0);
    Node& wt = parent(self, 1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double g = self.grad[i * m + j];
        if (in.requires_grad) in.grad[i * m + j] += g * wt.value[i];
        if (wt.requires_grad) wt.grad[i] += g * in.value[i * m + j];
      }
  });
}

Tensor rowwise_dot(const Tensor& a, const Tensor& b) {
  require_matrix(a, "rowwise_dot");
  require_same_shape(a, b, "rowwise_dot");
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += a[i * m + j] * b[i * m + j];
    out[i] = acc;
  }
  return make_result({n}, std::move(out), {a, b}, [n, m](Node& self) {
    Node& lhs = parent(self, 0);
    Node& rhs = parent(self, 1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double g = self.grad[i];
        if (lhs.requires_grad) lhs.grad[i * m + j] += g * rhs.value[i * m + j];
        if (rhs.requires_grad) rhs.grad[i * m + j] += g * lhs.value[i * m + j];
      }
  });
}

Tensor softmax(const Tensor& scores) {
  if (!scores.defined() || scores.numel() == 0) throw InvalidInput("softmax: empty input");
  if (scores.rank() != 1) throw ShapeError("softmax: expected a vector");
  check_finite(scores.values(), "softmax");
  const std::size_t n = scores.numel();
  std::vector<double> out(n), scratch;
  auto sv = scores.values();
  softmax_into(n, [&](std::size_t i) { return sv[i]; }, out.data(), scratch);
  return make_result({n}, std::move(out), {scores}, [n](Node& self) {
    Node& in = parent(self, 0);
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += self.value[i] * self.grad[i];
    for (std::size_t i = 0; i < n; ++i) {
      in.grad[i] += self.value[i] * (self.grad[i] - dot);
    }
  });
}

Tensor row_softmax(const Tensor& scores) {
  require_matrix(scores, "row_softmax");
  check_finite(scores.values(), "row_softmax");
  const std::size_t n = scores.rows(), m = scores.cols();
  std::vector<double> out(n * m), scratch;
  auto sv = scores.values();
  for (std::size_t i = 0; i < n; ++i) {
    softmax_into(m, [&](std::size_t j) { return sv[i * m + j]; }, out.data() + i * m,
                 scratch);
  }
  return make_result({n, m}, std::move(out), {scores}, [n, m](Node& self) {
    Node& in = parent(self, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += self.value[i * m + j] * self.grad[i * m + j];
      for (std::size_t j = 0; j < m; ++j) {
        in.grad[i * m + j] += self.value[i * m + j] * (self.grad[i * m + j] - dot);
      }
    }
  });
}

namespace {

std::vector<std::vector<std::size_t>> members_of(std::span<const std::size_t> group,
                                                 std::size_t num_groups) {
  std::vector<std::vector<std::size_t>> members(num_groups);
  for (std::size_t e = 0; e < group.size(); ++e) {
    if (group[e] >= num_groups) throw ShapeError("group id out of range");
    members[group[e]].push_back(e);
  }
  return members;
}

}  // namespace

Tensor group_softmax(const Tensor& scores, std::span<const std::size_t> group,
                     std::size_t num_groups) {
  if (scores.rank() != 1 || scores.numel() != group.size()) {
    throw ShapeError("group_softmax: one group id per score required");
  }
  check_finite(scores.values(), "group_softmax");
  auto members = members_of(group, num_groups);
  std::vector<double> out(scores.numel()), local, scratch;
  for (const auto& ids : members) {
    if (ids.empty()) throw ContractError("group_softmax: a group has no members");
    local.resize(ids.size());
    softmax_into(ids.size(), [&](std::size_t i) { return scores[ids[i]]; }, local.data(),
                 scratch);
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = local[i];
  }
  return make_result({scores.numel()}, std::move(out), {scores},
                     [members = std::move(members)](Node& self) {
                       Node& in = parent(self, 0);
                       for (const auto& ids : members) {
                         double dot = 0.0;
                         for (std::size_t e : ids) dot += self.value[e] * self.grad[e];
                         for (std::size_t e : ids) {
                           in.grad[e] += self.value[e] * (self.grad[e] - dot);
                         }
                       }
                     });
}

Tensor group_weighted_sum(const Tensor& rows, const Tensor& w,
                          std::span<const std::size_t> group, std::size_t num_groups) {
  require_matrix(rows, "group_weighted_sum");
  const std::size_t m = rows.cols();
  if (rows.rows() != group.size() || w.numel() != group.size()) {
    throw ShapeError("group_weighted_sum: rows, weights and groups disagree");
  }
  auto members = members_of(group, num_groups);
  std::vector<double> out(num_groups * m, 0.0), terms;
  for (std::size_t g = 0; g < num_groups; ++g) {
    const auto& ids = members[g];
    terms.resize(ids.size());
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t i = 0; i < ids.size(); ++i) terms[i] = w[ids[i]] * rows[ids[i] * m + c];
      out[g * m + c] = canonical_sum(std::span<double>(terms));
    }
  }
  std::vector<std::size_t> gid(group.begin(), group.end());
  return make_result({num_groups, m}, std::move(out), {rows, w},
                     [gid = std::move(gid), m](Node& self) {
                       Node& in = parent(self, 0);
                       Node& wt = parent(self, 1);
                       for (std::size_t e = 0; e < gid.size(); ++e) {
                         const double* g = &self.grad[gid[e] * m];
                         for (std::size_t c = 0; c < m; ++c) {
                           if (in.requires_grad) in.grad[e * m + c] += wt.value[e] * g[c];
                           if (wt.requires_grad) wt.grad[e] += in.value[e * m + c] * g[c];
                         }
                       }
                     });
}

Tensor max_rows(const Tensor& a) {
  require_matrix(a, "max_rows");
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(m);
  std::vector<std::size_t> arg(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    out[j] = a[j];
    for (std::size_t i = 1; i < n; ++i) {
      if (a[i * m + j] > out[j]) {
        out[j] = a[i * m + j];
        arg[j] = i;
      }
    }
  }
  return make_result({m}, std::move(out), {a}, [arg = std::move(arg), m](Node& self) {
    Node& in = parent(self, 0);
    for (std::size_t j = 0; j < m; ++j) in.grad[arg[j] * m + j] += self.grad[j];
  });
}

Tensor scatter_mean(const Tensor& rows, std::span<const std::size_t> cell,
                    std::size_t num_cells) {
  require_matrix(rows, "scatter_mean");
  if (rows.rows() != cell.size()) throw ShapeError("scatter_mean: one cell per row required");
  const std::size_t m = rows.cols();
  auto members = members_of(cell, num_cells);
  std::vector<double> out(num_cells * m, 0.0), terms;
  std::vector<double> inv_count(num_cells, 0.0);
  for (std::size_t c = 0; c < num_cells; ++c) {
    const auto& ids = members[c];
    if (ids.empty()) continue;
    inv_count[c] = 1.0 / static_cast<double>(ids.size());
    terms.resize(ids.size());
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < ids.size(); ++i) terms[i] = rows[ids[i] * m + j];
      out[c * m + j] = canonical_sum(std::span<double>(terms)) / static_cast<double>(ids.size());
    }
  }
  std::vector<std::size_t> cid(cell.begin(), cell.end());
  return make_result({num_cells, m}, std::move(out), {rows},
                     [cid = std::move(cid), inv_count = std::move(inv_count), m](Node& self) {
                       Node& in = parent(self, 0);
                       for (std::size_t r = 0; r < cid.size(); ++r)
                         for (std::size_t j = 0; j < m; ++j)
                           in.grad[r * m + j] += self.grad[cid[r] * m + j] * inv_count[cid[r]];
                     });
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  return make_result({}, {acc}, {a}, [](Node& self) {
    Node& in = parent(self, 0);
    for (double& g : in.grad) g += self.grad[0];
  });
}

Tensor mean_squared_error(const Tensor& prediction, const Tensor& target) {
  if (prediction.numel() != target.numel()) {
    throw ShapeError("mean_squared_error: size mismatch");
  }
  const std::size_t n = prediction.numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = prediction[i] - target[i];
    acc += diff * diff;
  }
  return make_result({}, {acc / static_cast<double>(n)}, {prediction, target},
                     [n](Node& self) {
                       Node& pred = parent(self, 0);
                       Node& tgt = parent(self, 1);
                       const double k = 2.0 * self.grad[0] / static_cast<double>(n);
                       for (std::size_t i = 0; i < n; ++i) {
                         const double diff = pred.value[i] - tgt.value[i];
                         if (pred.requires_grad) pred.grad[i] += k * diff;
                         if (tgt.requires_grad) tgt.grad[i] -= k * diff;
                       }
                     });
}

}  // namespace gqn::numerics
