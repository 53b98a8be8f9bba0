#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cfnn/common.hpp"

namespace cfnn {

// Reverse-mode scalar tape. Define-by-run: every forward pass rebuilds the
// graph; nodes only reference earlier nodes, so a single backward sweep in
// reverse id order is exact.

enum class OpKind : uint8_t {
    Constant,
    Parameter,
    Add,
    Sub,
    Mul,
    Div,
    PowInt,  // non-negative integer exponent in aux
    Exp,
    Sin,
    Cos,
    Tanh,
    Relu,
    Softplus,
    Max,
    Abs,
};

class Tape;

// Handle to a tape node. Cheap to copy; valid until the tape is cleared.
struct Val {
    Tape* tape = nullptr;
    int32_t id = -1;
    double value() const;
};

struct GradientMap {
    // Indexed by parameter index as registered via Tape::parameter().
    // Unreachable parameters keep an exact 0 entry.
    std::vector<double> d;
    bool all_finite = true;
};

class Tape {
public:
    Tape() = default;

    size_t size() const { return kind_.size(); }

    void clear() {
        kind_.clear();
        a_.clear();
        b_.clear();
        aux_.clear();
        value_.clear();
        num_params_ = 0;
    }

    Val constant(double v);
    Val parameter(int param_index, double v);

    Val add(Val a, Val b);
    Val sub(Val a, Val b);
    Val mul(Val a, Val b);
    Val div(Val a, Val b);
    Val pow_int(Val a, int k);
    Val exp(Val a);
    Val sin(Val a);
    Val cos(Val a);
    Val tanh(Val a);
    Val relu(Val a);
    Val softplus(Val a);
    Val max(Val a, Val b);
    Val abs(Val a);

    double value_of(int32_t id) const { return value_[static_cast<size_t>(id)]; }
    int num_params() const { return num_params_; }

    // Reverse sweep from a scalar root. Does not mutate forward values, so
    // repeated calls on the same tape are identical.
    GradientMap backward(Val root) const;

    // Allocation-free variant for hot loops: adds partials into grad_accum
    // (sized >= num_params) using adj_scratch as workspace. Clears finite on
    // any non-finite adjoint.
    void backward_into(Val root, std::span<double> grad_accum,
                       std::vector<double>& adj_scratch, bool& finite) const;

private:
    Val record(OpKind k, int32_t a, int32_t b, int32_t aux, double v);
    void check_operand(int32_t id) const;

    std::vector<uint8_t> kind_;
    std::vector<int32_t> a_;
    std::vector<int32_t> b_;
    std::vector<int32_t> aux_;  // param index or integer exponent
    std::vector<double> value_;
    int num_params_ = 0;
};

inline double Val::value() const { return tape->value_of(id); }

// Operator sugar so model code reads like the math.
inline Val operator+(Val a, Val b) { return a.tape->add(a, b); }
inline Val operator-(Val a, Val b) { return a.tape->sub(a, b); }
inline Val operator*(Val a, Val b) { return a.tape->mul(a, b); }
inline Val operator/(Val a, Val b) { return a.tape->div(a, b); }

// Generic math shims: the model evaluators are templated on the scalar type
// so the same source runs on doubles (inference) and on the tape (training).
inline Val vexp(Val a) { return a.tape->exp(a); }
inline Val vsin(Val a) { return a.tape->sin(a); }
inline Val vcos(Val a) { return a.tape->cos(a); }
inline Val vtanh(Val a) { return a.tape->tanh(a); }
inline Val vrelu(Val a) { return a.tape->relu(a); }
inline Val vsoftplus(Val a) { return a.tape->softplus(a); }
inline Val vmax(Val a, Val b) { return a.tape->max(a, b); }
inline Val vabs(Val a) { return a.tape->abs(a); }
inline Val vpow_int(Val a, int k) { return a.tape->pow_int(a, k); }
inline double scalar_value(Val a) { return a.value(); }

inline double vexp(double a) { return std::exp(a); }
inline double vsin(double a) { return std::sin(a); }
inline double vcos(double a) { return std::cos(a); }
inline double vtanh(double a) { return std::tanh(a); }
inline double vrelu(double a) { return a > 0.0 ? a : 0.0; }
inline double vsoftplus(double a) { return stable_softplus(a); }
inline double vmax(double a, double b) { return a >= b ? a : b; }
inline double vabs(double a) { return std::fabs(a); }
inline double vpow_int(double a, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= a;
    return r;
}
inline double scalar_value(double a) { return a; }

struct GradientCheckReport {
    double max_rel_error = 0.0;
    std::vector<int> failing_params;
    int probed = 0;
};

// Compares an analytic gradient against central finite differences on a
// random subset of parameters. Failures are reported, never thrown.
GradientCheckReport check_gradient(
    const std::function<double(std::span<const double>)>& f,
    const std::function<GradientMap(std::span<const double>)>& grad_f,
    std::span<const double> params, int probe_count, double step,
    double tolerance, uint64_t seed);

}  // namespace cfnn
