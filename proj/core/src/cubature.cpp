#include "polymer/cubature.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <queue>

#include "polymer/error.hpp"

namespace polymer {

namespace {

struct Region {
    std::vector<double> center;
    std::vector<double> half;
    double value = 0.0;
    double error = 0.0;
    std::size_t split_axis = 0;
    std::size_t id = 0;
};

struct ByError {
    bool operator()(const Region& a, const Region& b) const {
        if (a.error != b.error) return a.error < b.error;
        return a.id > b.id;
    }
};

class GenzMalik {
public:
    explicit GenzMalik(std::size_t dim) : dim_(dim) {
        const double d = static_cast<double>(dim);
        w1_ = (12824.0 - 9120.0 * d + 400.0 * d * d) / 19683.0;
        w2_ = 980.0 / 6561.0;
        w3_ = (1820.0 - 400.0 * d) / 19683.0;
        w4_ = 200.0 / 19683.0;
        w5_ = 6859.0 / 19683.0 / std::ldexp(1.0, static_cast<int>(dim));
        e1_ = (729.0 - 950.0 * d + 50.0 * d * d) / 729.0;
        e2_ = 245.0 / 486.0;
        e3_ = (265.0 - 100.0 * d) / 1458.0;
        e4_ = 25.0 / 729.0;
    }

    std::size_t points() const {
        return 1 + 4 * dim_ + 2 * dim_ * (dim_ - 1) + (std::size_t{1} << dim_);
    }

    void evaluate(const Integrand& f, Region& r) const {
        static constexpr double l2 = 0.35856858280031809199;  // sqrt(9/70)
        static constexpr double l4 = 0.94868329805051379960;  // sqrt(9/10)
        static constexpr double l5 = 0.68824720161168529772;  // sqrt(9/19)
        static constexpr double ratio = (l2 * l2) / (l4 * l4);

        std::vector<double> x = r.center;
        const double f0 = f(x);
        double sum2 = 0, sum3 = 0, sum4 = 0, sum5 = 0;
        double vol = 1.0;
        double best_diff = -1.0;
        std::size_t axis = 0;
        for (std::size_t i = 0; i < dim_; ++i) {
            vol *= 2.0 * r.half[i];
            const double c = r.center[i], h = r.half[i];
            x[i] = c + l2 * h; const double a1 = f(x);
            x[i] = c - l2 * h; const double a2 = f(x);
            x[i] = c + l4 * h; const double b1 = f(x);
            x[i] = c - l4 * h; const double b2 = f(x);
            x[i] = c;
            sum2 += a1 + a2;
            sum3 += b1 + b2;
            const double diff = std::abs(a1 + a2 - 2 * f0 - ratio * (b1 + b2 - 2 * f0));
            // Ties go to the widest axis.
            if (diff > best_diff * (1 + 1e-10) ||
                (std::abs(diff - best_diff) <= 1e-10 * best_diff && h > r.half[axis])) {
                best_diff = diff;
                axis = i;
            }
        }
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t j = i + 1; j < dim_; ++j) {
                for (int si : {-1, 1}) {
                    for (int sj : {-1, 1}) {
                        x[i] = r.center[i] + si * l4 * r.half[i];
                        x[j] = r.center[j] + sj * l4 * r.half[j];
                        sum4 += f(x);
                    }
                }
                x[i] = r.center[i];
                x[j] = r.center[j];
            }
        }
        const std::size_t corners = std::size_t{1} << dim_;
        for (std::size_t mask = 0; mask < corners; ++mask) {
            for (std::size_t i = 0; i < dim_; ++i) {
                const double s = (mask >> i) & 1u ? 1.0 : -1.0;
                x[i] = r.center[i] + s * l5 * r.half[i];
            }
            sum5 += f(x);
        }
        const double deg7 = vol * (w1_ * f0 + w2_ * sum2 + w3_ * sum3 + w4_ * sum4 + w5_ * sum5);
        const double deg5 = vol * (e1_ * f0 + e2_ * sum2 + e3_ * sum3 + e4_ * sum4);
        r.value = deg7;
        r.error = std::abs(deg7 - deg5);
        r.split_axis = axis;
    }

private:
    std::size_t dim_;
    double w1_, w2_, w3_, w4_, w5_;
    double e1_, e2_, e3_, e4_;
};

}  // namespace

CubatureResult adaptive_cubature(const Integrand& f, std::span<const double> lower,
                                 std::span<const double> upper,
                                 const CubatureOptions& options) {
    const std::size_t dim = lower.size();
    if (dim < 2 || upper.size() != dim) {
        throw InvalidArgument("adaptive_cubature: need matching bounds of dimension >= 2");
    }
    GenzMalik rule(dim);
    Region root;
    root.center.resize(dim);
    root.half.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        root.center[i] = 0.5 * (lower[i] + upper[i]);
        root.half[i] = 0.5 * (upper[i] - lower[i]);
    }
    for (double h : root.half) {
        if (h == 0.0) return {0.0, 0.0, 0, true};
    }

    std::priority_queue<Region, std::vector<Region>, ByError> heap;
    std::size_t next_id = 0;
    root.id = next_id++;
    rule.evaluate(f, root);
    CubatureResult out;
    out.evaluations = rule.points();
    double total = root.value, total_err = root.error;
    heap.push(std::move(root));

    // Periodically re-sum to keep the running totals free of drift.
    std::size_t since_resum = 0;
    while (true) {
        const double target = std::max(options.abs_tol, options.rel_tol * std::abs(total));
        if (total_err <= target) {
            out.converged = true;
            break;
        }
        if (out.evaluations + 2 * rule.points() > options.max_evaluations) break;
        Region r = heap.top();
        heap.pop();
        total -= r.value;
        total_err -= r.error;
        Region a = r, b = r;
        const std::size_t ax = r.split_axis;
        a.half[ax] = b.half[ax] = 0.5 * r.half[ax];
        a.center[ax] = r.center[ax] - a.half[ax];
        b.center[ax] = r.center[ax] + b.half[ax];
        a.id = next_id++;
        b.id = next_id++;
        rule.evaluate(f, a);
        rule.evaluate(f, b);
        out.evaluations += 2 * rule.points();
        total += a.value + b.value;
        total_err += a.error + b.error;
        heap.push(std::move(a));
        heap.push(std::move(b));
        if (++since_resum == 1024) {
            since_resum = 0;
            auto copy = heap;
            total = total_err = 0;
            while (!copy.empty()) {
                total += copy.top().value;
                total_err += copy.top().error;
                copy.pop();
            }
        }
    }
    // Final deterministic re-sum, smallest contributions first.
    std::vector<Region> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    total = total_err = 0;
    for (auto it = all.rbegin(); it != all.rend(); ++it) {
        total += it->value;
        total_err += it->error;
    }
    out.value = total;
    out.error = total_err;
    out.converged = total_err <= std::max(options.abs_tol, options.rel_tol * std::abs(total));
    return out;
}

CubatureResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                            double rel_tol) {
    if (!(a <= b)) throw InvalidArgument("integrate_1d: need a <= b");
    if (a == b) return {0.0, 0.0, 0, true};
    // The double-exponential abscissae cannot resolve a vanishing interval.
    if (b - a <= 1e-9 * (std::abs(a) + std::abs(b))) {
        return {f(0.5 * (a + b)) * (b - a), 0.0, 1, true};
    }
    boost::math::quadrature::tanh_sinh<double> integrator;
    double err = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    const double value = integrator.integrate(f, a, b, rel_tol, &err, &l1, &levels);
    CubatureResult out;
    out.value = value;
    out.error = err;
    out.evaluations = levels;
    out.converged = err <= 10.0 * std::max(rel_tol, 1e-14) * l1;
    return out;
}

}  // namespace polymer
