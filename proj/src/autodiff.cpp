#include "cfnn/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace cfnn {

void Tape::check_operand(int32_t id) const {
    if (id < 0 || static_cast<size_t>(id) >= kind_.size())
        throw UnknownOperand("tape operand id " + std::to_string(id) + " does not exist");
}

Val Tape::record(OpKind k, int32_t a, int32_t b, int32_t aux, double v) {
    if (!std::isfinite(v))
        throw NonFiniteValue("non-finite forward value in op " +
                             std::to_string(static_cast<int>(k)));
    kind_.push_back(static_cast<uint8_t>(k));
    a_.push_back(a);
    b_.push_back(b);
    aux_.push_back(aux);
    value_.push_back(v);
    return Val{this, static_cast<int32_t>(kind_.size() - 1)};
}

Val Tape::constant(double v) { return record(OpKind::Constant, -1, -1, 0, v); }

Val Tape::parameter(int param_index, double v) {
    num_params_ = std::max(num_params_, param_index + 1);
    return record(OpKind::Parameter, -1, -1, param_index, v);
}

Val Tape::add(Val a, Val b) {
    check_operand(a.id);
    check_operand(b.id);
    return record(OpKind::Add, a.id, b.id, 0, value_[a.id] + value_[b.id]);
}

Val Tape::sub(Val a, Val b) {
    check_operand(a.id);
    check_operand(b.id);
    return record(OpKind::Sub, a.id, b.id, 0, value_[a.id] - value_[b.id]);
}

Val Tape::mul(Val a, Val b) {
    check_operand(a.id);
    check_operand(b.id);
    return record(OpKind::Mul, a.id, b.id, 0, value_[a.id] * value_[b.id]);
}

Val Tape::div(Val a, Val b) {
    check_operand(a.id);
    check_operand(b.id);
    return record(OpKind::Div, a.id, b.id, 0, value_[a.id] / value_[b.id]);
}

Val Tape::pow_int(Val a, int k) {
    check_operand(a.id);
    if (k < 0) throw InvalidConfig("pow_int requires a non-negative exponent");
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= value_[a.id];
    return record(OpKind::PowInt, a.id, -1, k, r);
}

Val Tape::exp(Val a) {
    check_operand(a.id);
    return record(OpKind::Exp, a.id, -1, 0, std::exp(value_[a.id]));
}

Val Tape::sin(Val a) {
    check_operand(a.id);
    return record(OpKind::Sin, a.id, -1, 0, std::sin(value_[a.id]));
}

Val Tape::cos(Val a) {
    check_operand(a.id);
    return record(OpKind::Cos, a.id, -1, 0, std::cos(value_[a.id]));
}

Val Tape::tanh(Val a) {
    check_operand(a.id);
    return record(OpKind::Tanh, a.id, -1, 0, std::tanh(value_[a.id]));
}

Val Tape::relu(Val a) {
    check_operand(a.id);
    double v = value_[a.id];
    return record(OpKind::Relu, a.id, -1, 0, v > 0.0 ? v : 0.0);
}

Val Tape::softplus(Val a) {
    check_operand(a.id);
    return record(OpKind::Softplus, a.id, -1, 0, stable_softplus(value_[a.id]));
}

Val Tape::max(Val a, Val b) {
    check_operand(a.id);
    check_operand(b.id);
    return record(OpKind::Max, a.id, b.id, 0, std::max(value_[a.id], value_[b.id]));
}

Val Tape::abs(Val a) {
    check_operand(a.id);
    return record(OpKind::Abs, a.id, -1, 0, std::fabs(value_[a.id]));
}

GradientMap Tape::backward(Val root) const {
    GradientMap out;
    out.d.assign(static_cast<size_t>(num_params_), 0.0);
    if (root.id < 0) return out;
    std::vector<double> scratch;
    backward_into(root, out.d, scratch, out.all_finite);
    for (double v : out.d) {
        if (!std::isfinite(v)) {
            out.all_finite = false;
            break;
        }
    }
    return out;
}

void Tape::backward_into(Val root, std::span<double> grad_accum,
                         std::vector<double>& adj, bool& finite) const {
    adj.assign(kind_.size(), 0.0);
    adj[static_cast<size_t>(root.id)] = 1.0;

    for (int32_t i = root.id; i >= 0; --i) {
        double g = adj[static_cast<size_t>(i)];
        if (g == 0.0) continue;
        if (!std::isfinite(g)) finite = false;
        int32_t a = a_[i];
        int32_t b = b_[i];
        double va = a >= 0 ? value_[a] : 0.0;
        switch (static_cast<OpKind>(kind_[i])) {
            case OpKind::Constant:
                break;
            case OpKind::Parameter:
                grad_accum[static_cast<size_t>(aux_[i])] += g;
                break;
            case OpKind::Add:
                adj[a] += g;
                adj[b] += g;
                break;
            case OpKind::Sub:
                adj[a] += g;
                adj[b] -= g;
                break;
            case OpKind::Mul:
                adj[a] += g * value_[b];
                adj[b] += g * va;
                break;
            case OpKind::Div: {
                double vb = value_[b];
                adj[a] += g / vb;
                adj[b] -= g * va / (vb * vb);
                break;
            }
            case OpKind::PowInt: {
                int k = aux_[i];
                if (k > 0) {
                    double r = 1.0;
                    for (int j = 0; j < k - 1; ++j) r *= va;
                    adj[a] += g * static_cast<double>(k) * r;
                }
                break;
            }
            case OpKind::Exp:
                adj[a] += g * value_[i];
                break;
            case OpKind::Sin:
                adj[a] += g * std::cos(va);
                break;
            case OpKind::Cos:
                adj[a] -= g * std::sin(va);
                break;
            case OpKind::Tanh: {
                double t = value_[i];
                adj[a] += g * (1.0 - t * t);
                break;
            }
            case OpKind::Relu:
                // subgradient at 0 is 0
                if (va > 0.0) adj[a] += g;
                break;
            case OpKind::Softplus:
                adj[a] += g * sigmoid(va);
                break;
            case OpKind::Max:
                // ties route to the first operand
                if (va >= value_[b])
                    adj[a] += g;
                else
                    adj[b] += g;
                break;
            case OpKind::Abs:
                if (va > 0.0)
                    adj[a] += g;
                else if (va < 0.0)
                    adj[a] -= g;
                break;
        }
    }
}

GradientCheckReport check_gradient(
    const std::function<double(std::span<const double>)>& f,
    const std::function<GradientMap(std::span<const double>)>& grad_f,
    std::span<const double> params, int probe_count, double step,
    double tolerance, uint64_t seed) {
    GradientCheckReport report;
    if (params.empty()) return report;

    GradientMap analytic = grad_f(params);
    std::vector<double> work(params.begin(), params.end());

    Rng rng(seed);
    std::vector<int> order(params.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    int probes = std::min<int>(probe_count, static_cast<int>(order.size()));

    for (int n = 0; n < probes; ++n) {
        int j = order[static_cast<size_t>(n)];
        double saved = work[j];
        work[j] = saved + step;
        double fp = f(work);
        work[j] = saved - step;
        double fm = f(work);
        work[j] = saved;
        double fd = (fp - fm) / (2.0 * step);
        double analytic_j = j < static_cast<int>(analytic.d.size()) ? analytic.d[j] : 0.0;
        double rel = std::fabs(analytic_j - fd) / std::max(1.0, std::fabs(fd));
        report.max_rel_error = std::max(report.max_rel_error, rel);
        if (rel >= tolerance) report.failing_params.push_back(j);
        ++report.probed;
    }
    return report;
}

}  // namespace cfnn
