#include "unotb/tape.hpp"

#include <cassert>
#include <cstring>

#include "unotb/error.hpp"
#include "unotb/kernels.hpp"

namespace unotb {

namespace k = kernels;

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_id(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size()))
    throw NumericError("tape node id out of range");
}

const Tensor& Tape::val(int id) const {
  const Node& n = nodes_[static_cast<size_t>(id)];
  return n.op == Op::kLeaf ? *n.external : n.value;
}

const Tensor& Tape::value(int id) const {
  check_id(id);
  return val(id);
}

const Tensor& Tape::grad(int id) const {
  check_id(id);
  return nodes_[static_cast<size_t>(id)].grad;
}

Tensor& Tape::ensure_grad(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.empty()) n.grad = Tensor(val(id).shape());
  return n.grad;
}

void Tape::reset() {
  nodes_.clear();
  leaf_ids_.clear();
}

int Tape::leaf(const Tensor* t, bool requires_grad) {
  if (auto it = leaf_ids_.find(t); it != leaf_ids_.end()) {
    if (nodes_[static_cast<size_t>(it->second)].needs_grad != requires_grad)
      throw NumericError("leaf re-registered with conflicting requires_grad");
    return it->second;
  }
  Node n;
  n.op = Op::kLeaf;
  n.external = t;
  n.needs_grad = requires_grad;
  const int id = push(std::move(n));
  leaf_ids_.emplace(t, id);
  return id;
}

int Tape::constant(Tensor value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

int Tape::linear(int x, int w, int b) {
  check_id(x), check_id(w), check_id(b);
  const Tensor& xv = val(x);
  const Tensor& wv = val(w);
  const Tensor& bv = val(b);
  const int64_t rows = xv.rows(), in = xv.cols(), out = wv.cols();
  if (wv.rows() != in || bv.size() != out)
    throw NumericError("linear: shape mismatch " + xv.shape_str() + " x " +
                       wv.shape_str());
  Node n;
  n.op = Op::kLinear;
  n.a = x, n.b = w, n.c = b;
  n.value = Tensor({rows, out});
  k::gemm_nn(xv.data(), wv.data(), n.value.data(), rows, in, out);
  k::add_bias(n.value.data(), bv.data(), n.value.data(), rows, out);
  n.needs_grad = nodes_[x].needs_grad || nodes_[w].needs_grad ||
                 nodes_[b].needs_grad;
  return push(std::move(n));
}

int Tape::relu(int x) {
  check_id(x);
  const Tensor& xv = val(x);
  Node n;
  n.op = Op::kRelu;
  n.a = x;
  n.value = Tensor(xv.shape());
  k::relu_fwd(xv.data(), n.value.data(), xv.size());
  n.needs_grad = nodes_[x].needs_grad;
  return push(std::move(n));
}

int Tape::concat_cols(int a, int b) {
  check_id(a), check_id(b);
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (av.rows() != bv.rows())
    throw NumericError("concat_cols: row mismatch");
  const int64_t rows = av.rows(), ca = av.cols(), cb = bv.cols();
  Node n;
  n.op = Op::kConcatCols;
  n.a = a, n.b = b;
  n.value = Tensor({rows, ca + cb});
  for (int64_t i = 0; i < rows; ++i) {
    std::memcpy(n.value.data() + i * (ca + cb), av.data() + i * ca,
                static_cast<size_t>(ca) * sizeof(double));
    std::memcpy(n.value.data() + i * (ca + cb) + ca, bv.data() + i * cb,
                static_cast<size_t>(cb) * sizeof(double));
  }
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

int Tape::add(int a, int b) { return add_scaled(a, b, 1.0); }

int Tape::sub(int a, int b) { return add_scaled(a, b, -1.0); }

int Tape::add_scaled(int a, int b, double beta) {
  check_id(a), check_id(b);
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (!av.same_shape(bv))
    throw NumericError("add_scaled: shape mismatch " + av.shape_str() +
                       " vs " + bv.shape_str());
  Node n;
  n.op = Op::kAddScaled;
  n.a = a, n.b = b;
  n.alpha = beta;
  n.value = Tensor(av.shape());
  for (int64_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + beta * bv[i];
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

int Tape::add_scalar(int a, int s, double beta) {
  check_id(a), check_id(s);
  const Tensor& av = val(a);
  const Tensor& sv = val(s);
  if (sv.size() != 1) throw NumericError("add_scalar: s must be a scalar");
  Node n;
  n.op = Op::kAddScalar;
  n.a = a, n.b = s;
  n.alpha = beta;
  n.value = Tensor(av.shape());
  const double sval = beta * sv[0];
  for (int64_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + sval;
  n.needs_grad = nodes_[a].needs_grad || nodes_[s].needs_grad;
  return push(std::move(n));
}

int Tape::scale(int a, double alpha) {
  check_id(a);
  const Tensor& av = val(a);
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.alpha = alpha;
  n.value = Tensor(av.shape());
  for (int64_t i = 0; i < av.size(); ++i) n.value[i] = alpha * av[i];
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

int Tape::pair_cost(int y, const Tensor* x, CostFn cost) {
  check_id(y);
  const Tensor& yv = val(y);
  if (!yv.same_shape(*x))
    throw NumericError("pair_cost: shape mismatch " + yv.shape_str() + " vs " +
                       x->shape_str());
  Node n;
  n.op = Op::kPairCost;
  n.a = y;
  n.external = x;
  n.cost = cost;
  n.value = Tensor({yv.rows(), 1});
  cost_eval_rows(cost, *x, yv, n.value);
  n.needs_grad = nodes_[y].needs_grad;
  return push(std::move(n));
}

int Tape::div_conj(int a, Divergence d) {
  check_id(a);
  const Tensor& av = val(a);
  Node n;
  n.op = Op::kDivConj;
  n.a = a;
  n.div = d;
  n.value = Tensor(av.shape());
  conj_rows(d, av, n.value);
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

int Tape::mean_groups(int a, int64_t group_size) {
  check_id(a);
  const Tensor& av = val(a);
  if (group_size < 1 || av.size() % group_size != 0)
    throw NumericError("mean_groups: size not divisible by group");
  const int64_t groups = av.size() / group_size;
  Node n;
  n.op = Op::kMeanGroups;
  n.a = a;
  n.group = group_size;
  n.value = Tensor({groups, 1});
  for (int64_t g = 0; g < groups; ++g) {
    double s = 0.0;
    for (int64_t j = 0; j < group_size; ++j) s += av[g * group_size + j];
    n.value[g] = s / static_cast<double>(group_size);
  }
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

int Tape::mean_all(int a) {
  check_id(a);
  const Tensor& av = val(a);
  if (av.size() == 0) throw NumericError("mean_all on empty tensor");
  Node n;
  n.op = Op::kMeanAll;
  n.a = a;
  n.value = Tensor({1});
  double s = 0.0;
  for (int64_t i = 0; i < av.size(); ++i) s += av[i];
  n.value[0] = s / static_cast<double>(av.size());
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

void Tape::backward(int loss_id) {
  check_id(loss_id);
  if (val(loss_id).size() != 1)
    throw NumericError("backward target must be scalar");
  for (Node& n : nodes_) n.grad = Tensor();
  ensure_grad(loss_id)[0] = 1.0;

  for (int id = loss_id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.needs_grad || n.grad.empty()) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConstant:
        break;
      case Op::kLinear: {
        const Tensor& xv = val(n.a);
        const Tensor& wv = val(n.b);
        const int64_t rows = xv.rows(), in = xv.cols(), out = wv.cols();
        if (nodes_[n.a].needs_grad) {
          Tensor& gx = ensure_grad(n.a);
          k::gemm_nt(g.data(), wv.data(), gx.data(), rows, out, in, true);
        }
        if (nodes_[n.b].needs_grad) {
          Tensor& gw = ensure_grad(n.b);
          k::gemm_tn(xv.data(), g.data(), gw.data(), in, rows, out, true);
        }
        if (nodes_[n.c].needs_grad) {
          Tensor& gb = ensure_grad(n.c);
          k::colsum_acc(g.data(), gb.data(), rows, out);
        }
        break;
      }
      case Op::kRelu:
        if (nodes_[n.a].needs_grad) {
          const Tensor& xv = val(n.a);
          k::relu_bwd(xv.data(), g.data(), ensure_grad(n.a).data(), xv.size());
        }
        break;
      case Op::kConcatCols: {
        const Tensor& av = val(n.a);
        const Tensor& bv = val(n.b);
        const int64_t rows = av.rows(), ca = av.cols(), cb = bv.cols();
        if (nodes_[n.a].needs_grad) {
          Tensor& ga = ensure_grad(n.a);
          for (int64_t i = 0; i < rows; ++i)
            for (int64_t j = 0; j < ca; ++j)
              ga[i * ca + j] += g[i * (ca + cb) + j];
        }
        if (nodes_[n.b].needs_grad) {
          Tensor& gb = ensure_grad(n.b);
          for (int64_t i = 0; i < rows; ++i)
            for (int64_t j = 0; j < cb; ++j)
              gb[i * cb + j] += g[i * (ca + cb) + ca + j];
        }
        break;
      }
      case Op::kAddScaled:
        if (nodes_[n.a].needs_grad)
          k::axpy(1.0, g.data(), ensure_grad(n.a).data(), g.size());
        if (nodes_[n.b].needs_grad)
          k::axpy(n.alpha, g.data(), ensure_grad(n.b).data(), g.size());
        break;
      case Op::kAddScalar: {
        if (nodes_[n.a].needs_grad)
          k::axpy(1.0, g.data(), ensure_grad(n.a).data(), g.size());
        if (nodes_[n.b].needs_grad) {
          double s = 0.0;
          for (int64_t i = 0; i < g.size(); ++i) s += g[i];
          ensure_grad(n.b)[0] += n.alpha * s;
        }
        break;
      }
      case Op::kScale:
        if (nodes_[n.a].needs_grad)
          k::axpy(n.alpha, g.data(), ensure_grad(n.a).data(), g.size());
        break;
      case Op::kPairCost:
        if (nodes_[n.a].needs_grad)
          cost_grad_y_rows_acc(n.cost, *n.external, val(n.a), g,
                               ensure_grad(n.a));
        break;
      case Op::kDivConj:
        if (nodes_[n.a].needs_grad) {
          const Tensor& av = val(n.a);
          Tensor& ga = ensure_grad(n.a);
          for (int64_t i = 0; i < av.size(); ++i)
            ga[i] += g[i] * conj_grad(n.div, av[i]);
        }
        break;
      case Op::kMeanGroups:
        if (nodes_[n.a].needs_grad) {
          Tensor& ga = ensure_grad(n.a);
          const double inv = 1.0 / static_cast<double>(n.group);
          for (int64_t i = 0; i < g.size(); ++i)
            for (int64_t j = 0; j < n.group; ++j)
              ga[i * n.group + j] += g[i] * inv;
        }
        break;
      case Op::kMeanAll:
        if (nodes_[n.a].needs_grad) {
          Tensor& ga = ensure_grad(n.a);
          const double inv = g[0] / static_cast<double>(ga.size());
          for (int64_t i = 0; i < ga.size(); ++i) ga[i] += inv;
        }
        break;
    }
  }
}

}  // namespace unotb
